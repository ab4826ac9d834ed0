//! Integer feasibility of a conjunction of affine constraints.
//!
//! Presolve normalizes rows by their coefficient gcd and substitutes away
//! equalities that carry a unit coefficient. The remaining problem is
//! searched depth-first: interval propagation on integer bounds, then the
//! rational relaxation (a bounded-variable simplex with Bland's rule), then
//! a branch on a fractional coordinate. All arithmetic is arbitrary
//! precision.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Constraint, ConstraintKind};
use crate::error::{Error, Result};

/// Search limits for emptiness queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Branch-and-bound nodes before giving up with `UnboundedSearch`.
    pub node_budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { node_budget: 200_000 }
    }
}

type Q = BigRational;

#[derive(Debug, Clone)]
struct Row {
    a: Vec<BigInt>,
    c: BigInt,
    eq: bool,
}

enum Norm {
    Drop,
    Infeasible,
    Keep(Row),
}

fn normalize(mut row: Row) -> Norm {
    let g = row.a.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
    if g.is_zero() {
        let ok = if row.eq { row.c.is_zero() } else { !row.c.is_negative() };
        return if ok { Norm::Drop } else { Norm::Infeasible };
    }
    if !g.is_one() {
        if row.eq {
            if !row.c.is_multiple_of(&g) {
                return Norm::Infeasible;
            }
            row.c /= &g;
        } else {
            row.c = row.c.div_floor(&g);
        }
        for a in &mut row.a {
            *a /= &g;
        }
    }
    Norm::Keep(row)
}

/// `x_var = Σ coef·x + constant`, recorded for back-substitution.
struct Substitution {
    var: usize,
    a: Vec<BigInt>,
    c: BigInt,
}

/// Find an integer point of the conjunction over `n` columns, or `None`.
pub(crate) fn find_integer_point(
    n: usize,
    conj: &[Constraint],
    cfg: &SolverConfig,
) -> Result<Option<Vec<i64>>> {
    let mut rows = Vec::with_capacity(conj.len());
    for c in conj {
        let row = Row {
            a: c.expr.coeffs().iter().map(|&v| BigInt::from(v)).collect(),
            c: BigInt::from(c.expr.constant_term()),
            eq: c.kind == ConstraintKind::Equality,
        };
        match normalize(row) {
            Norm::Drop => {}
            Norm::Infeasible => return Ok(None),
            Norm::Keep(r) => rows.push(r),
        }
    }

    let mut subs: Vec<Substitution> = Vec::new();
    loop {
        let pick = rows.iter().enumerate().find_map(|(k, r)| {
            if !r.eq {
                return None;
            }
            r.a.iter().position(|a| a.abs().is_one()).map(|v| (k, v))
        });
        let Some((k, v)) = pick else { break };
        let row = rows.swap_remove(k);
        // a_v·x_v + rest = 0 with a_v = ±1  =>  x_v = -a_v·rest
        let s = -row.a[v].clone();
        let mut a: Vec<BigInt> = row.a.iter().map(|x| x * &s).collect();
        a[v] = BigInt::zero();
        let c = &row.c * &s;
        let mut next = Vec::with_capacity(rows.len());
        for mut r in rows.drain(..) {
            let k = core::mem::take(&mut r.a[v]);
            if !k.is_zero() {
                for (x, y) in r.a.iter_mut().zip(&a) {
                    *x += &k * y;
                }
                r.c += &k * &c;
            }
            match normalize(r) {
                Norm::Drop => {}
                Norm::Infeasible => return Ok(None),
                Norm::Keep(r) => next.push(r),
            }
        }
        rows = next;
        subs.push(Substitution { var: v, a, c });
    }

    let eliminated: Vec<bool> = {
        let mut e = vec![false; n];
        for s in &subs {
            e[s.var] = true;
        }
        e
    };

    // Single-variable rows become bounds.
    let mut lb: Vec<Option<BigInt>> = vec![None; n];
    let mut ub: Vec<Option<BigInt>> = vec![None; n];
    let mut multi = Vec::new();
    for r in rows {
        let nz: Vec<usize> = (0..n).filter(|&j| !r.a[j].is_zero()).collect();
        if nz.len() == 1 {
            let j = nz[0];
            let a = &r.a[j];
            // a·x + c (>=|=) 0, |a| = 1 after normalization
            let bound = if a.is_positive() { -&r.c } else { r.c.clone() };
            if r.eq {
                tighten_lb(&mut lb[j], &bound);
                tighten_ub(&mut ub[j], &bound);
            } else if a.is_positive() {
                tighten_lb(&mut lb[j], &bound);
            } else {
                tighten_ub(&mut ub[j], &bound);
            }
        } else {
            multi.push(r);
        }
    }

    let active: Vec<usize> = (0..n).filter(|&j| !eliminated[j]).collect();
    let problem = Problem { n, rows: multi, active };
    let Some(mut values) = problem.branch_and_bound(lb, ub, cfg)? else {
        return Ok(None);
    };

    for s in subs.iter().rev() {
        let mut v = s.c.clone();
        for (x, a) in values.iter().zip(&s.a) {
            if !a.is_zero() {
                v += a * x;
            }
        }
        values[s.var] = v;
    }
    let point = values
        .iter()
        .map(|v| v.to_i64().ok_or(Error::Overflow("sample point")))
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(conj.iter().all(|c| c.is_satisfied(&point)));
    Ok(Some(point))
}

fn tighten_lb(slot: &mut Option<BigInt>, v: &BigInt) -> bool {
    match slot {
        Some(cur) if *cur >= *v => false,
        _ => {
            *slot = Some(v.clone());
            true
        }
    }
}

fn tighten_ub(slot: &mut Option<BigInt>, v: &BigInt) -> bool {
    match slot {
        Some(cur) if *cur <= *v => false,
        _ => {
            *slot = Some(v.clone());
            true
        }
    }
}

struct Problem {
    n: usize,
    rows: Vec<Row>,
    active: Vec<usize>,
}

struct Node {
    lb: Vec<Option<BigInt>>,
    ub: Vec<Option<BigInt>>,
    lp: Simplex,
}

impl Problem {
    fn branch_and_bound(
        &self,
        lb: Vec<Option<BigInt>>,
        ub: Vec<Option<BigInt>>,
        cfg: &SolverConfig,
    ) -> Result<Option<Vec<BigInt>>> {
        let mut stack = vec![Node { lb, ub, lp: Simplex::new(self.n, &self.rows) }];
        let mut nodes = 0usize;
        while let Some(mut node) = stack.pop() {
            nodes += 1;
            if nodes > cfg.node_budget {
                return Err(Error::UnboundedSearch(cfg.node_budget));
            }
            if !self.propagate(&mut node.lb, &mut node.ub) {
                continue;
            }
            if self.active.iter().all(|&j| fixed(&node.lb[j], &node.ub[j])) {
                let values: Vec<BigInt> = (0..self.n)
                    .map(|j| node.lb[j].clone().or_else(|| node.ub[j].clone()).unwrap_or_default())
                    .collect();
                if self.rows.iter().all(|r| row_holds(r, &values)) {
                    return Ok(Some(values));
                }
                continue;
            }
            for &j in &self.active {
                node.lp.tighten(j, node.lb[j].as_ref(), node.ub[j].as_ref());
            }
            if !node.lp.check() {
                continue;
            }
            let frac = self
                .active
                .iter()
                .copied()
                .filter(|&j| !node.lp.value[j].is_integer())
                .min_by_key(|&j| match (&node.lb[j], &node.ub[j]) {
                    (Some(l), Some(u)) => (0u8, (u - l).to_u64().unwrap_or(u64::MAX)),
                    _ => (1, 0),
                });
            let Some(j) = frac else {
                let values = (0..self.n).map(|j| node.lp.value[j].to_integer()).collect();
                return Ok(Some(values));
            };
            let v = node.lp.value[j].clone();
            let down = v.floor().to_integer();
            let up = v.ceil().to_integer();
            let near_up = (&v - v.floor()) >= Q::new(BigInt::one(), BigInt::from(2));

            let mut left = Node { lb: node.lb.clone(), ub: node.ub.clone(), lp: node.lp.clone() };
            left.ub[j] = Some(down);
            let mut right = node;
            right.lb[j] = Some(up);
            if near_up {
                stack.push(left);
                stack.push(right);
            } else {
                stack.push(right);
                stack.push(left);
            }
        }
        Ok(None)
    }

    /// Interval propagation over all rows. Returns false on a proven
    /// contradiction.
    fn propagate(&self, lb: &mut [Option<BigInt>], ub: &mut [Option<BigInt>]) -> bool {
        let rounds = 2 * self.active.len() + 8;
        for _ in 0..rounds {
            let mut changed = false;
            for r in &self.rows {
                for sign in [1i8, -1] {
                    if sign < 0 && !r.eq {
                        continue;
                    }
                    match propagate_row(r, sign, lb, ub) {
                        None => return false,
                        Some(c) => changed |= c,
                    }
                }
            }
            for &j in &self.active {
                if let (Some(l), Some(u)) = (&lb[j], &ub[j]) {
                    if l > u {
                        return false;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        true
    }
}

fn fixed(l: &Option<BigInt>, u: &Option<BigInt>) -> bool {
    matches!((l, u), (Some(l), Some(u)) if l == u)
}

fn row_holds(r: &Row, x: &[BigInt]) -> bool {
    let mut v = r.c.clone();
    for (a, x) in r.a.iter().zip(x) {
        if !a.is_zero() {
            v += a * x;
        }
    }
    if r.eq {
        v.is_zero()
    } else {
        !v.is_negative()
    }
}

/// Tighten bounds from `sign·(a·x + c) >= 0`. `None` on contradiction,
/// otherwise whether anything changed.
fn propagate_row(
    r: &Row,
    sign: i8,
    lb: &mut [Option<BigInt>],
    ub: &mut [Option<BigInt>],
) -> Option<bool> {
    let coef = |j: usize| if sign > 0 { r.a[j].clone() } else { -&r.a[j] };
    let c = if sign > 0 { r.c.clone() } else { -&r.c };
    // max of Σ a_j x_j, tracking unbounded contributions
    let mut max_sum = BigInt::zero();
    let mut inf_count = 0usize;
    let mut inf_col = usize::MAX;
    let contrib = |j: usize, a: &BigInt, lb: &[Option<BigInt>], ub: &[Option<BigInt>]| -> Option<BigInt> {
        if a.is_positive() {
            ub[j].as_ref().map(|u| a * u)
        } else {
            lb[j].as_ref().map(|l| a * l)
        }
    };
    for j in 0..r.a.len() {
        if r.a[j].is_zero() {
            continue;
        }
        let a = coef(j);
        match contrib(j, &a, lb, ub) {
            Some(v) => max_sum += v,
            None => {
                inf_count += 1;
                inf_col = j;
            }
        }
    }
    if inf_count == 0 && &max_sum + &c < BigInt::zero() {
        return None;
    }
    if inf_count > 1 {
        return Some(false);
    }
    let mut changed = false;
    for j in 0..r.a.len() {
        if r.a[j].is_zero() || (inf_count == 1 && j != inf_col) {
            continue;
        }
        let a = coef(j);
        let others = if inf_count == 1 {
            max_sum.clone()
        } else {
            &max_sum - contrib(j, &a, lb, ub).expect("finite contribution")
        };
        // a·x_j >= -c - others
        let rhs = -&c - others;
        if a.is_positive() {
            let b = Integer::div_ceil(&rhs, &a);
            changed |= tighten_lb(&mut lb[j], &b);
        } else {
            // dividing by a negative flips the inequality
            let b = rhs.div_floor(&a);
            changed |= tighten_ub(&mut ub[j], &b);
        }
    }
    Some(changed)
}

/// Bounded-variable simplex in the style used by SMT arithmetic solvers:
/// every row introduces a slack `s_r = Σ a_rj x_j` with bounds taken from
/// the row's constant; original variables are free unless bounded by the
/// search.
#[derive(Debug, Clone)]
struct Simplex {
    /// `basic[r] = Σ_j tab[r][j]·x_j` over nonbasic `j`.
    tab: Vec<Vec<Q>>,
    basic: Vec<usize>,
    row_of: Vec<Option<usize>>,
    value: Vec<Q>,
    lo: Vec<Option<Q>>,
    hi: Vec<Option<Q>>,
}

impl Simplex {
    fn new(n: usize, rows: &[Row]) -> Self {
        let total = n + rows.len();
        let mut tab = Vec::with_capacity(rows.len());
        let mut basic = Vec::with_capacity(rows.len());
        let mut row_of = vec![None; total];
        let mut lo = vec![None; total];
        let mut hi = vec![None; total];
        for (r, row) in rows.iter().enumerate() {
            let mut t = vec![Q::zero(); total];
            for j in 0..n {
                t[j] = Q::from_integer(row.a[j].clone());
            }
            tab.push(t);
            let s = n + r;
            basic.push(s);
            row_of[s] = Some(r);
            let bound = Q::from_integer(-&row.c);
            if row.eq {
                hi[s] = Some(bound.clone());
            }
            lo[s] = Some(bound);
        }
        Simplex { tab, basic, row_of, value: vec![Q::zero(); total], lo, hi }
    }

    fn tighten(&mut self, j: usize, l: Option<&BigInt>, u: Option<&BigInt>) {
        if let Some(l) = l {
            let l = Q::from_integer(l.clone());
            if self.lo[j].as_ref().map_or(true, |cur| *cur < l) {
                self.lo[j] = Some(l);
            }
        }
        if let Some(u) = u {
            let u = Q::from_integer(u.clone());
            if self.hi[j].as_ref().map_or(true, |cur| *cur > u) {
                self.hi[j] = Some(u);
            }
        }
        if self.row_of[j].is_none() {
            if let Some(l) = self.lo[j].clone() {
                if self.value[j] < l {
                    self.update(j, l);
                }
            }
            if let Some(u) = self.hi[j].clone() {
                if self.value[j] > u {
                    self.update(j, u);
                }
            }
        }
    }

    fn update(&mut self, j: usize, v: Q) {
        let delta = &v - &self.value[j];
        for r in 0..self.tab.len() {
            let t = &self.tab[r][j];
            if !t.is_zero() {
                let b = self.basic[r];
                self.value[b] += t * &delta;
            }
        }
        self.value[j] = v;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let b = self.basic[r];
        let a = self.tab[r][j].clone();
        let inv = a.recip();
        let mut new_row: Vec<Q> = self.tab[r].iter().map(|t| -(t * &inv)).collect();
        new_row[j] = Q::zero();
        new_row[b] = inv;
        for r2 in 0..self.tab.len() {
            if r2 == r {
                continue;
            }
            let c = self.tab[r2][j].clone();
            if c.is_zero() {
                continue;
            }
            let row = &mut self.tab[r2];
            for (k, x) in new_row.iter().enumerate() {
                if !x.is_zero() {
                    row[k] += &c * x;
                }
            }
            row[j] = Q::zero();
        }
        self.tab[r] = new_row;
        self.basic[r] = j;
        self.row_of[j] = Some(r);
        self.row_of[b] = None;
    }

    fn pivot_and_update(&mut self, r: usize, j: usize, v: Q) {
        let b = self.basic[r];
        let theta = (&v - &self.value[b]) / &self.tab[r][j];
        self.value[b] = v;
        self.value[j] += &theta;
        for r2 in 0..self.tab.len() {
            if r2 != r {
                let t = &self.tab[r2][j];
                if !t.is_zero() {
                    let b2 = self.basic[r2];
                    self.value[b2] += t * &theta;
                }
            }
        }
        self.pivot(r, j);
    }

    /// Restore feasibility of basic variables. False when the rational
    /// relaxation is infeasible.
    fn check(&mut self) -> bool {
        let total = self.value.len();
        if self.lo.iter().zip(&self.hi).any(|(l, h)| matches!((l, h), (Some(l), Some(h)) if l > h)) {
            return false;
        }
        loop {
            let violated = (0..total).find_map(|b| {
                let r = self.row_of[b]?;
                if self.lo[b].as_ref().is_some_and(|l| self.value[b] < *l) {
                    Some((r, b, true))
                } else if self.hi[b].as_ref().is_some_and(|h| self.value[b] > *h) {
                    Some((r, b, false))
                } else {
                    None
                }
            });
            let Some((r, b, below)) = violated else {
                return true;
            };
            let can_raise = |j: usize| self.hi[j].as_ref().map_or(true, |h| self.value[j] < *h);
            let can_lower = |j: usize| self.lo[j].as_ref().map_or(true, |l| self.value[j] > *l);
            let entering = (0..total).find(|&j| {
                if self.row_of[j].is_some() {
                    return false;
                }
                let t = &self.tab[r][j];
                if t.is_zero() {
                    return false;
                }
                let pos = t.is_positive();
                if below {
                    (pos && can_raise(j)) || (!pos && can_lower(j))
                } else {
                    (!pos && can_raise(j)) || (pos && can_lower(j))
                }
            });
            let Some(j) = entering else {
                return false;
            };
            let target = if below { self.lo[b].clone() } else { self.hi[b].clone() };
            self.pivot_and_update(r, j, target.expect("violated bound exists"));
        }
    }
}
