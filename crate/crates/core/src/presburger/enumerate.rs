//! Exhaustive enumeration of a bounded, parameter-free conjunction.

use alloc::vec;
use alloc::vec::Vec;

use super::{Constraint, ConstraintKind, Space};
use crate::error::{Error, Result};

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -div_floor(-a, b)
}

/// Interval propagation to a fixpoint (or a round limit). `None` when the
/// conjunction is proven empty.
fn bounding_box(n: usize, conj: &[Constraint]) -> Option<(Vec<Option<i128>>, Vec<Option<i128>>)> {
    let mut lo: Vec<Option<i128>> = vec![None; n];
    let mut hi: Vec<Option<i128>> = vec![None; n];
    for _ in 0..(2 * n + 8) {
        let mut changed = false;
        for c in conj {
            let signs: &[i128] = match c.kind {
                ConstraintKind::Inequality => &[1],
                ConstraintKind::Equality => &[1, -1],
            };
            for &s in signs {
                let a: Vec<i128> = c.expr.coeffs().iter().map(|&v| s * v as i128).collect();
                let k = s * c.expr.constant_term() as i128;
                let mut sum = 0i128;
                let mut inf = 0;
                let mut inf_col = 0;
                for j in 0..n {
                    if a[j] == 0 {
                        continue;
                    }
                    let m = if a[j] > 0 { hi[j].map(|u| a[j] * u) } else { lo[j].map(|l| a[j] * l) };
                    match m {
                        Some(m) => sum += m,
                        None => {
                            inf += 1;
                            inf_col = j;
                        }
                    }
                }
                if inf == 0 && sum + k < 0 {
                    return None;
                }
                if inf > 1 {
                    continue;
                }
                for j in 0..n {
                    if a[j] == 0 || (inf == 1 && j != inf_col) {
                        continue;
                    }
                    let own = if inf == 1 {
                        0
                    } else if a[j] > 0 {
                        a[j] * hi[j].unwrap()
                    } else {
                        a[j] * lo[j].unwrap()
                    };
                    let rhs = -k - (sum - own);
                    if a[j] > 0 {
                        let b = div_ceil(rhs, a[j]);
                        if lo[j].map_or(true, |l| l < b) {
                            lo[j] = Some(b);
                            changed = true;
                        }
                    } else {
                        let b = div_floor(rhs, a[j]);
                        if hi[j].map_or(true, |u| u > b) {
                            hi[j] = Some(b);
                            changed = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|j| matches!((lo[j], hi[j]), (Some(l), Some(h)) if l > h)) {
            return None;
        }
        if !changed {
            break;
        }
    }
    Some((lo, hi))
}

fn constant_holds(c: &Constraint) -> bool {
    let k = c.expr.constant_term();
    match c.kind {
        ConstraintKind::Equality => k == 0,
        ConstraintKind::Inequality => k >= 0,
    }
}

pub(super) fn enumerate_conjunction(
    space: &Space,
    conj: &[Constraint],
    budget: usize,
    out: &mut Vec<Vec<i64>>,
) -> Result<()> {
    let n = space.n_dims();
    let Some((lo, hi)) = bounding_box(n, conj) else {
        return Ok(());
    };
    let mut box_lo = Vec::with_capacity(n);
    let mut box_hi = Vec::with_capacity(n);
    for j in 0..n {
        match (lo[j], hi[j]) {
            (Some(l), Some(h)) => {
                box_lo.push(l);
                box_hi.push(h);
            }
            _ => return Err(Error::Unbounded(space.dims()[j].clone())),
        }
    }
    if n == 0 {
        if conj.iter().all(|c| constant_holds(c)) {
            out.push(Vec::new());
        }
        return Ok(());
    }
    // Constraints are checked at the level of their last variable.
    let mut by_level: Vec<Vec<&Constraint>> = vec![Vec::new(); n];
    for c in conj {
        match c.expr.terms().map(|(j, _)| j).last() {
            Some(j) => by_level[j].push(c),
            None => {
                if !constant_holds(c) {
                    return Ok(());
                }
            }
        }
    }
    let mut walk = Walk {
        by_level,
        box_lo,
        box_hi,
        point: vec![0; n],
        out,
        budget,
        found: 0,
        work: 0,
        work_budget: budget.saturating_mul(64).max(1 << 20),
    };
    walk.descend(0)
}

struct Walk<'a, 'c> {
    by_level: Vec<Vec<&'c Constraint>>,
    box_lo: Vec<i128>,
    box_hi: Vec<i128>,
    point: Vec<i64>,
    out: &'a mut Vec<Vec<i64>>,
    budget: usize,
    found: usize,
    work: usize,
    work_budget: usize,
}

impl Walk<'_, '_> {
    fn descend(&mut self, level: usize) -> Result<()> {
        let n = self.point.len();
        let (mut lo, mut hi) = (self.box_lo[level], self.box_hi[level]);
        // Each constraint ending here is linear in the current coordinate.
        for c in &self.by_level[level] {
            let a = c.expr.coeff(level) as i128;
            let rest = c.expr.constant_term() as i128
                + (0..level).map(|j| c.expr.coeff(j) as i128 * self.point[j] as i128).sum::<i128>();
            match c.kind {
                ConstraintKind::Equality => {
                    if rest % a != 0 {
                        return Ok(());
                    }
                    let v = -rest / a;
                    lo = lo.max(v);
                    hi = hi.min(v);
                }
                ConstraintKind::Inequality => {
                    if a > 0 {
                        lo = lo.max(div_ceil(-rest, a));
                    } else {
                        hi = hi.min(div_floor(-rest, a));
                    }
                }
            }
        }
        let mut v = lo;
        while v <= hi {
            self.work += 1;
            if self.work > self.work_budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            self.point[level] = i64::try_from(v).map_err(|_| Error::Overflow("enumeration"))?;
            if level + 1 == n {
                self.found += 1;
                if self.found > self.budget {
                    return Err(Error::BudgetExceeded(self.budget));
                }
                self.out.push(self.point.clone());
            } else {
                self.descend(level + 1)?;
            }
            v += 1;
        }
        Ok(())
    }
}
