//! Communication patterns of a channel: in-order and unicity predicates,
//! decided as emptiness of violation sets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ppn::Schedule;
use crate::presburger::{
    AffineExpr, Conjunction, Constraint, IntegerRelation, IntegerSet, ParamAssignment, SolverConfig, Space,
};

/// Upper bound on disjuncts built for a single violation query.
const MAX_QUERY_DISJUNCTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternClass {
    Fifo,
    InOrderWithMultiplicity,
    OutOfOrderNoMultiplicity,
    OutOfOrderWithMultiplicity,
}

impl PatternClass {
    pub fn from_predicates(in_order: bool, unicity: bool) -> Self {
        match (in_order, unicity) {
            (true, true) => PatternClass::Fifo,
            (true, false) => PatternClass::InOrderWithMultiplicity,
            (false, true) => PatternClass::OutOfOrderNoMultiplicity,
            (false, false) => PatternClass::OutOfOrderWithMultiplicity,
        }
    }

    pub fn is_fifo(self) -> bool {
        self == PatternClass::Fifo
    }

    pub fn in_order(self) -> bool {
        matches!(self, PatternClass::Fifo | PatternClass::InOrderWithMultiplicity)
    }

    pub fn unicity(self) -> bool {
        matches!(self, PatternClass::Fifo | PatternClass::OutOfOrderNoMultiplicity)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternClass::Fifo => "fifo",
            PatternClass::InOrderWithMultiplicity => "in-order-multiplicity",
            PatternClass::OutOfOrderNoMultiplicity => "out-of-order",
            PatternClass::OutOfOrderWithMultiplicity => "out-of-order-multiplicity",
        }
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Comparison between producer and consumer timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexMode {
    /// Equal on the first `k - 1` entries, strictly smaller at entry `k`.
    PrecedesAtDepth(usize),
    /// Equal on the first `n` entries.
    EqualFirst(usize),
    /// Lexicographically strictly smaller.
    StrictlyPrecedes,
    /// Equal timestamps.
    Equal,
}

/// Disjuncts encoding `a ≪ b` under `mode`.
fn lex_disjuncts(a: &[AffineExpr], b: &[AffineExpr], mode: LexMode) -> Result<Vec<Conjunction>> {
    let d = a.len();
    let equal_prefix = |n: usize| -> Result<Conjunction> {
        (0..n).map(|j| Constraint::eq_of(&a[j], &b[j])).collect()
    };
    let at_depth = |k: usize| -> Result<Conjunction> {
        let mut c = equal_prefix(k - 1)?;
        c.push(Constraint::lt_of(&a[k - 1], &b[k - 1])?);
        Ok(c)
    };
    match mode {
        LexMode::PrecedesAtDepth(k) => {
            if k == 0 || k > d {
                return Err(Error::DepthOutOfRange { depth: k, max: d });
            }
            Ok(alloc::vec![at_depth(k)?])
        }
        LexMode::EqualFirst(n) => {
            if n > d {
                return Err(Error::DepthOutOfRange { depth: n, max: d });
            }
            Ok(alloc::vec![equal_prefix(n)?])
        }
        LexMode::StrictlyPrecedes => (1..=d).map(at_depth).collect(),
        LexMode::Equal => Ok(alloc::vec![equal_prefix(d)?]),
    }
}

/// Schedule rows re-expressed in a target space: schedule dimension `j`
/// goes to column `offset + j`, parameters by name.
fn place_rows(s: &Schedule, offset: usize, target: &Space) -> Result<Vec<AffineExpr>> {
    let src = s.space();
    let mut map = Vec::with_capacity(src.n_cols());
    map.extend((0..src.n_dims()).map(|j| offset + j));
    for p in src.params() {
        let col = target
            .param_index(p)
            .map(|i| target.n_dims() + i)
            .ok_or_else(|| Error::SpaceMismatch(format!("schedule parameter `{}` missing from relation", p)))?;
        map.push(col);
    }
    Ok(s.rows().iter().map(|r| r.remap(&map, target.n_cols())).collect())
}

fn check_shapes(rel: &IntegerRelation, sp: &Schedule, sc: &Schedule) -> Result<()> {
    if sp.len() != sc.len() {
        return Err(Error::ScheduleArity(sp.len(), sc.len()));
    }
    if sp.space().n_dims() != rel.n_in() || sc.space().n_dims() != rel.n_out() {
        return Err(Error::SpaceMismatch(format!(
            "schedules over {}/{} dimensions, relation {} -> {}",
            sp.space().n_dims(),
            sc.space().n_dims(),
            rel.n_in(),
            rel.n_out()
        )));
    }
    Ok(())
}

/// Constraints over the relation's space relating `θ_P(x)` to `θ_C(y)`.
pub fn lex_compare_set(rel: &IntegerRelation, sp: &Schedule, sc: &Schedule, mode: LexMode) -> Result<IntegerSet> {
    check_shapes(rel, sp, sc)?;
    let space = rel.space();
    let a = place_rows(sp, 0, space)?;
    let b = place_rows(sc, rel.n_in(), space)?;
    IntegerSet::from_disjuncts(space.clone(), lex_disjuncts(&a, &b, mode)?)
}

/// Two dataflow pairs whose reads happen in the opposite order of their
/// writes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reversal {
    pub first_source: Vec<i64>,
    pub first_read: Vec<i64>,
    pub second_source: Vec<i64>,
    pub second_read: Vec<i64>,
}

/// Space of several tagged copies of dimension tuples.
fn copy_space(parts: &[(&[String], &str)]) -> Result<Space> {
    let dims = parts
        .iter()
        .flat_map(|(names, tag)| names.iter().map(move |n| format!("{}#{}", n, tag)))
        .collect();
    Space::new(dims, Vec::new())
}

fn push_product(
    out: &mut Vec<Conjunction>,
    factors: &[&[Conjunction]],
) -> Result<()> {
    let total = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()));
    if total.map_or(true, |t| t > MAX_QUERY_DISJUNCTS) {
        return Err(Error::ComplexityCap(MAX_QUERY_DISJUNCTS));
    }
    let mut acc: Vec<Conjunction> = alloc::vec![Vec::new()];
    for f in factors {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for a in &acc {
            for b in f.iter() {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    out.extend(acc);
    Ok(())
}

fn remap_disjuncts(rel: &IntegerRelation, map: &[usize], cols: usize) -> Vec<Conjunction> {
    rel.disjuncts()
        .iter()
        .map(|d| {
            d.iter()
                .map(|c| Constraint { expr: c.expr.remap(map, cols), kind: c.kind })
                .collect()
        })
        .collect()
}

struct Instance {
    rel: IntegerRelation,
    sp: Schedule,
    sc: Schedule,
}

fn instantiate(rel: &IntegerRelation, sp: &Schedule, sc: &Schedule, pa: &ParamAssignment) -> Result<Instance> {
    check_shapes(rel, sp, sc)?;
    Ok(Instance { rel: rel.instantiate(pa)?, sp: sp.instantiate(pa)?, sc: sc.instantiate(pa)? })
}

/// Some pair of reads consumed out of production order, or `None` when
/// the channel is in-order.
pub fn in_order_violation_with(
    rel: &IntegerRelation,
    sp: &Schedule,
    sc: &Schedule,
    pa: &ParamAssignment,
    cfg: &SolverConfig,
) -> Result<Option<Reversal>> {
    let inst = instantiate(rel, sp, sc, pa)?;
    if inst.rel.as_set().is_obviously_empty() {
        return Ok(None);
    }
    let (ni, no) = (inst.rel.n_in(), inst.rel.n_out());
    let w = ni + no;
    // columns: x, x', y, y'
    let space = copy_space(&[
        (inst.rel.input_dims(), "1"),
        (inst.rel.output_dims(), "1"),
        (inst.rel.input_dims(), "2"),
        (inst.rel.output_dims(), "2"),
    ])?;
    let cols = space.n_cols();
    let first: Vec<usize> = (0..w).collect();
    let second: Vec<usize> = (w..2 * w).collect();
    let rel_x = remap_disjuncts(&inst.rel, &first, cols);
    let rel_y = remap_disjuncts(&inst.rel, &second, cols);
    let read_x = place_rows(&inst.sc, ni, &space)?;
    let read_y = place_rows(&inst.sc, w + ni, &space)?;
    let write_x = place_rows(&inst.sp, 0, &space)?;
    let write_y = place_rows(&inst.sp, w, &space)?;
    let reads_ordered = lex_disjuncts(&read_x, &read_y, LexMode::StrictlyPrecedes)?;
    let writes_reversed = lex_disjuncts(&write_y, &write_x, LexMode::StrictlyPrecedes)?;
    let mut disjuncts = Vec::new();
    push_product(&mut disjuncts, &[&rel_x, &rel_y, &reads_ordered, &writes_reversed])?;
    let set = IntegerSet::from_disjuncts(space, disjuncts)?;
    Ok(set.sample_with(cfg)?.map(|p| Reversal {
        first_source: p[..ni].to_vec(),
        first_read: p[ni..w].to_vec(),
        second_source: p[w..w + ni].to_vec(),
        second_read: p[w + ni..2 * w].to_vec(),
    }))
}

pub fn in_order_with(
    rel: &IntegerRelation,
    sp: &Schedule,
    sc: &Schedule,
    pa: &ParamAssignment,
    cfg: &SolverConfig,
) -> Result<bool> {
    Ok(in_order_violation_with(rel, sp, sc, pa, cfg)?.is_none())
}

/// Consumer reads values in the order the producer writes them.
pub fn in_order(rel: &IntegerRelation, sp: &Schedule, sc: &Schedule, pa: &ParamAssignment) -> Result<bool> {
    in_order_with(rel, sp, sc, pa, &SolverConfig::default())
}

pub fn unicity_with(rel: &IntegerRelation, pa: &ParamAssignment, cfg: &SolverConfig) -> Result<bool> {
    let rel = rel.instantiate(pa)?;
    if rel.as_set().is_obviously_empty() {
        return Ok(true);
    }
    let (ni, no) = (rel.n_in(), rel.n_out());
    // columns: x, x', y'
    let space = copy_space(&[(rel.input_dims(), "1"), (rel.output_dims(), "1"), (rel.output_dims(), "2")])?;
    let cols = space.n_cols();
    let first: Vec<usize> = (0..ni + no).collect();
    let shared_source: Vec<usize> = (0..ni).chain(ni + no..ni + 2 * no).collect();
    let rel_a = remap_disjuncts(&rel, &first, cols);
    let rel_b = remap_disjuncts(&rel, &shared_source, cols);
    let a: Vec<AffineExpr> = (ni..ni + no).map(|c| AffineExpr::var(cols, c)).collect();
    let b: Vec<AffineExpr> = (ni + no..ni + 2 * no).map(|c| AffineExpr::var(cols, c)).collect();
    // distinct reads of one value, ordered to break the symmetry
    let distinct = lex_disjuncts(&a, &b, LexMode::StrictlyPrecedes)?;
    let mut disjuncts = Vec::new();
    push_product(&mut disjuncts, &[&rel_a, &rel_b, &distinct])?;
    Ok(IntegerSet::from_disjuncts(space, disjuncts)?.is_empty_with(cfg)?)
}

/// Every value is read exactly once. Independent of schedules.
pub fn unicity(rel: &IntegerRelation, pa: &ParamAssignment) -> Result<bool> {
    unicity_with(rel, pa, &SolverConfig::default())
}

pub fn classify_with(
    rel: &IntegerRelation,
    sp: &Schedule,
    sc: &Schedule,
    pa: &ParamAssignment,
    cfg: &SolverConfig,
) -> Result<PatternClass> {
    let ordered = in_order_with(rel, sp, sc, pa, cfg)?;
    let once = unicity_with(rel, pa, cfg)?;
    Ok(PatternClass::from_predicates(ordered, once))
}

pub fn classify(rel: &IntegerRelation, sp: &Schedule, sc: &Schedule, pa: &ParamAssignment) -> Result<PatternClass> {
    classify_with(rel, sp, sc, pa, &SolverConfig::default())
}
