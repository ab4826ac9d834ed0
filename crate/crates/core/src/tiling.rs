//! Loop tiling by hyperplanes: tile coordinates `φ_k = floor(τ_k·i / b_k)`
//! become genuine leading dimensions constrained by
//! `0 <= τ_k·i - b_k·φ_k <= b_k - 1`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ppn::{Channel, Ppn, Process, Schedule};
use crate::presburger::{AffineExpr, Constraint, IntegerRelation, IntegerSet, Space};

/// Hyperplane normals `τ_1..τ_n` and tile sizes `b_1..b_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTiling")]
pub struct Tiling {
    normals: Vec<Vec<i64>>,
    sizes: Vec<i64>,
}

#[derive(Deserialize)]
struct RawTiling {
    normals: Vec<Vec<i64>>,
    sizes: Vec<i64>,
}

impl TryFrom<RawTiling> for Tiling {
    type Error = Error;

    fn try_from(raw: RawTiling) -> Result<Self> {
        Tiling::new(raw.normals, raw.sizes)
    }
}

impl Tiling {
    pub fn new(normals: Vec<Vec<i64>>, sizes: Vec<i64>) -> Result<Self> {
        if normals.len() != sizes.len() {
            return Err(Error::InvalidTiling(format!(
                "{} normals but {} sizes",
                normals.len(),
                sizes.len()
            )));
        }
        if let Some(b) = sizes.iter().find(|&&b| b < 1) {
            return Err(Error::InvalidTiling(format!("tile size {} is not positive", b)));
        }
        if let Some(first) = normals.first() {
            if normals.iter().any(|v| v.len() != first.len()) {
                return Err(Error::InvalidTiling("normals have different lengths".into()));
            }
        }
        if rank(&normals) != normals.len() {
            return Err(Error::InvalidTiling("normals are linearly dependent".into()));
        }
        Ok(Tiling { normals, sizes })
    }

    /// The empty tiling.
    pub fn none() -> Self {
        Tiling { normals: Vec::new(), sizes: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[Vec<i64>] {
        &self.normals
    }

    pub fn sizes(&self) -> &[i64] {
        &self.sizes
    }

    /// Tile coordinates of an iteration.
    pub fn tile_of(&self, point: &[i64]) -> Vec<i64> {
        self.normals
            .iter()
            .zip(&self.sizes)
            .map(|(tau, &b)| {
                let dot: i64 = tau.iter().zip(point).map(|(a, x)| a * x).sum();
                dot.div_euclid(b)
            })
            .collect()
    }

    fn check_arity(&self, dims: usize) -> Result<()> {
        match self.normals.first() {
            Some(v) if v.len() != dims => Err(Error::InvalidTiling(format!(
                "normals have {} entries but the process has {} dimensions",
                v.len(),
                dims
            ))),
            Some(_) if self.depth() > dims => {
                Err(Error::InvalidTiling("more hyperplanes than dimensions".into()))
            }
            _ => Ok(()),
        }
    }

    /// Membership constraints over a space of `n_cols` columns, with the
    /// tile coordinates at `phi_cols` and the iteration at `dim_cols`.
    fn membership(&self, n_cols: usize, phi_cols: &[usize], dim_cols: &[usize]) -> Result<Vec<Constraint>> {
        let mut out = Vec::with_capacity(2 * self.depth());
        for (k, (tau, &b)) in self.normals.iter().zip(&self.sizes).enumerate() {
            let mut e = AffineExpr::zero(n_cols);
            for (d, &a) in tau.iter().enumerate() {
                e = e.add(&AffineExpr::var(n_cols, dim_cols[d]).scale(a)?)?;
            }
            let e = e.sub(&AffineExpr::var(n_cols, phi_cols[k]).scale(b)?)?;
            out.push(Constraint::ge(e.clone()));
            out.push(Constraint::ge(e.scale(-1)?.add_constant(b - 1)?));
        }
        Ok(out)
    }
}

/// Rank of an integer matrix by fraction-free elimination.
fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                for j in 0..cols {
                    m[i][j] = m[i][j] * a - m[r][j] * b;
                }
                let g = m[i].iter().fold(0i128, |g, &x| gcd(g, x.abs()));
                if g > 1 {
                    m[i].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        r += 1;
    }
    r
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| *t == name) {
        name.push('_');
    }
    name
}

fn fresh_names(prefix: &str, suffix: &str, n: usize, space: &Space) -> Vec<String> {
    let mut taken: Vec<String> = space.dims().iter().chain(space.params()).cloned().collect();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let name = fresh(&format!("{}{}{}", prefix, k, suffix), &taken);
        taken.push(name.clone());
        out.push(name);
    }
    out
}

/// Tile a process: new dimensions `(φ_1..φ_n, i)` with the membership
/// constraints, and schedule `(φ_1..φ_n, θ(i))`.
pub fn tile_process(p: &Process, t: &Tiling) -> Result<Process> {
    if t.depth() == 0 {
        return Ok(p.clone());
    }
    if p.tiling.is_some() {
        return Err(Error::InvalidTiling(format!("process `{}` is already tiled", p.name)));
    }
    let nd = p.dims().len();
    t.check_arity(nd)?;
    let n = t.depth();
    let names = fresh_names("phi", "", n, p.domain.space());
    let lifted = p.domain.insert_dims(0, &names)?;
    let space = lifted.space().clone();
    let cols = space.n_cols();
    let phi_cols: Vec<usize> = (0..n).collect();
    let dim_cols: Vec<usize> = (n..n + nd).collect();
    let domain = lifted.with_constraints(&t.membership(cols, &phi_cols, &dim_cols)?)?;

    let mut rows: Vec<AffineExpr> = (0..n).map(|k| AffineExpr::var(cols, k)).collect();
    let shift: Vec<usize> = (0..p.schedule.space().n_cols()).map(|c| c + n).collect();
    rows.extend(p.schedule.rows().iter().map(|r| r.remap(&shift, cols)));
    let schedule = Schedule::new(p.schedule.name(), space, rows)?.with_sequential(p.schedule.is_sequential());

    Ok(Process {
        name: p.name.clone(),
        domain,
        schedule,
        instance_label: p.instance_label.clone(),
        tiling: Some(t.clone()),
    })
}

/// Lift a dataflow relation into tiled coordinates on whichever sides are
/// tiled. Tile coordinates are placed before each side's dimensions.
pub fn lift_dataflow(
    rel: &IntegerRelation,
    producer: Option<&Tiling>,
    consumer: Option<&Tiling>,
) -> Result<IntegerRelation> {
    let np = producer.map_or(0, Tiling::depth);
    let nc = consumer.map_or(0, Tiling::depth);
    if np == 0 && nc == 0 {
        return Ok(rel.clone());
    }
    let (n_in, n_out) = (rel.n_in(), rel.n_out());
    if let Some(t) = producer {
        t.check_arity(n_in)?;
    }
    if let Some(t) = consumer {
        t.check_arity(n_out)?;
    }
    let in_names = fresh_names("phi", "", np, rel.space());
    let mut set: IntegerSet = rel.as_set().insert_dims(0, &in_names)?;
    let out_names = fresh_names("phi", "'", nc, set.space());
    set = set.insert_dims(np + n_in, &out_names)?;
    let cols = set.space().n_cols();
    let mut guard = Vec::new();
    if let Some(t) = producer.filter(|t| t.depth() > 0) {
        let phi: Vec<usize> = (0..np).collect();
        let dims: Vec<usize> = (np..np + n_in).collect();
        guard.extend(t.membership(cols, &phi, &dims)?);
    }
    if let Some(t) = consumer.filter(|t| t.depth() > 0) {
        let base = np + n_in;
        let phi: Vec<usize> = (base..base + nc).collect();
        let dims: Vec<usize> = (base + nc..base + nc + n_out).collect();
        guard.extend(t.membership(cols, &phi, &dims)?);
    }
    IntegerRelation::from_set(np + n_in, set.with_constraints(&guard)?)
}

/// Lift a channel whose endpoints are tiled with the same number of
/// hyperplanes.
pub fn lift_relation(c: &Channel, producer: &Tiling, consumer: &Tiling) -> Result<Channel> {
    if producer.depth() != consumer.depth() {
        return Err(Error::DepthMismatch { producer: producer.depth(), consumer: consumer.depth() });
    }
    Ok(Channel {
        id: c.id.clone(),
        producer: c.producer.clone(),
        consumer: c.consumer.clone(),
        dataflow: lift_dataflow(&c.dataflow, Some(producer), Some(consumer))?,
    })
}

/// A tiling request for one process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessTiling {
    pub process: String,
    #[serde(flatten)]
    pub tiling: Tiling,
}

/// Insert zero rows after the leading row of an untiled schedule so that
/// it has `len` rows.
fn pad_schedule(s: &Schedule, len: usize) -> Result<Schedule> {
    if s.len() >= len || s.is_empty() {
        return Ok(s.clone());
    }
    let cols = s.space().n_cols();
    let mut rows = s.rows().to_vec();
    for _ in s.len()..len {
        rows.insert(1, AffineExpr::zero(cols));
    }
    Ok(Schedule::new(s.name(), s.space().clone(), rows)?.with_sequential(s.is_sequential()))
}

/// Tile the named processes and lift every channel touching them.
///
/// Untiled processes keep their iterations; their schedules are padded with
/// zero rows after the leading row to the tiled timestamp length, so the
/// leading row alone must order them against tiled processes.
pub fn apply_tilings(ppn: &Ppn, plan: &[ProcessTiling]) -> Result<Ppn> {
    for (k, pt) in plan.iter().enumerate() {
        if ppn.process(&pt.process).is_none() {
            return Err(Error::Validation(format!("tiling names unknown process `{}`", pt.process)));
        }
        if plan[..k].iter().any(|o| o.process == pt.process) {
            return Err(Error::Validation(format!("process `{}` tiled twice", pt.process)));
        }
    }
    let tiling_of = |name: &str| plan.iter().find(|pt| pt.process == name).map(|pt| &pt.tiling);
    let mut processes = ppn
        .processes()
        .iter()
        .map(|p| match tiling_of(&p.name) {
            Some(t) => tile_process(p, t),
            None => Ok(p.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    let len = processes
        .iter()
        .filter(|p| tiling_of(&p.name).is_some_and(|t| t.depth() > 0))
        .map(|p| p.schedule.len())
        .max();
    if let Some(len) = len {
        for p in processes.iter_mut().filter(|p| tiling_of(&p.name).map_or(true, |t| t.depth() == 0)) {
            p.schedule = pad_schedule(&p.schedule, len)?;
        }
    }
    let channels = ppn
        .channels()
        .iter()
        .map(|c| {
            Ok(Channel {
                id: c.id.clone(),
                producer: c.producer.clone(),
                consumer: c.consumer.clone(),
                dataflow: lift_dataflow(&c.dataflow, tiling_of(&c.producer), tiling_of(&c.consumer))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ppn.rebuild(processes, channels)
}
