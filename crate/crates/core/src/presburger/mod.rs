//! Quantifier-free Presburger sets and relations over named integer
//! dimensions and symbolic parameters.
//!
//! Every object lives in a [`Space`]. Affine expressions are stored densely
//! over the space's columns: the dimensions first, then the parameters. A
//! set is a finite union of conjunctions of affine constraints; a relation
//! is a set whose dimensions are split into an input and an output tuple.

mod enumerate;
mod parse;
pub use parse::parse_affine;
pub(crate) mod solver;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use solver::SolverConfig;

/// Default cap on the number of disjuncts an intersection may produce.
pub const DEFAULT_DISJUNCT_CAP: usize = 256;

/// Ordered dimension and parameter names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Space {
    dims: Vec<String>,
    params: Vec<String>,
}

impl Space {
    pub fn new(dims: Vec<String>, params: Vec<String>) -> Result<Self> {
        let mut seen = alloc::collections::BTreeSet::new();
        for n in dims.iter().chain(params.iter()) {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateName(n.clone()));
            }
        }
        Ok(Space { dims, params })
    }

    /// Convenience constructor from string slices.
    pub fn from_names(dims: &[&str], params: &[&str]) -> Result<Self> {
        Self::new(
            dims.iter().map(|s| s.to_string()).collect(),
            params.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn dims(&self) -> &[String] {
        &self.dims
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Number of expression columns (dimensions followed by parameters).
    pub fn n_cols(&self) -> usize {
        self.dims.len() + self.params.len()
    }

    pub fn dim_index(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d == name)
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }

    /// Column of a dimension or parameter name.
    pub fn col(&self, name: &str) -> Option<usize> {
        self.dim_index(name)
            .or_else(|| self.param_index(name).map(|p| self.dims.len() + p))
    }

    pub fn col_name(&self, col: usize) -> &str {
        if col < self.dims.len() {
            &self.dims[col]
        } else {
            &self.params[col - self.dims.len()]
        }
    }

    fn without_params(&self) -> Space {
        Space { dims: self.dims.clone(), params: Vec::new() }
    }
}

/// Affine form `Σ coeffs[c]·col[c] + constant` over a space's columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineExpr {
    coeffs: Vec<i64>,
    constant: i64,
}

impl AffineExpr {
    pub fn zero(n_cols: usize) -> Self {
        AffineExpr { coeffs: vec![0; n_cols], constant: 0 }
    }

    pub fn constant(n_cols: usize, c: i64) -> Self {
        AffineExpr { coeffs: vec![0; n_cols], constant: c }
    }

    /// The single column `col` with coefficient 1.
    pub fn var(n_cols: usize, col: usize) -> Self {
        let mut e = Self::zero(n_cols);
        e.coeffs[col] = 1;
        e
    }

    pub fn from_parts(coeffs: Vec<i64>, constant: i64) -> Self {
        AffineExpr { coeffs, constant }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, col: usize) -> i64 {
        self.coeffs[col]
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    pub fn n_cols(&self) -> usize {
        self.coeffs.len()
    }

    /// Nonzero `(column, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs.iter().copied().enumerate().filter(|&(_, c)| c != 0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &AffineExpr) -> Result<AffineExpr> {
        debug_assert_eq!(self.n_cols(), other.n_cols());
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow("affine addition")))
            .collect::<Result<Vec<_>>>()?;
        let constant = self
            .constant
            .checked_add(other.constant)
            .ok_or(Error::Overflow("affine addition"))?;
        Ok(AffineExpr { coeffs, constant })
    }

    pub fn scale(&self, k: i64) -> Result<AffineExpr> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.checked_mul(k).ok_or(Error::Overflow("affine scaling")))
            .collect::<Result<Vec<_>>>()?;
        let constant = self.constant.checked_mul(k).ok_or(Error::Overflow("affine scaling"))?;
        Ok(AffineExpr { coeffs, constant })
    }

    pub fn sub(&self, other: &AffineExpr) -> Result<AffineExpr> {
        self.add(&other.scale(-1)?)
    }

    pub fn add_constant(&self, c: i64) -> Result<AffineExpr> {
        let mut e = self.clone();
        e.constant = e.constant.checked_add(c).ok_or(Error::Overflow("affine addition"))?;
        Ok(e)
    }

    /// Evaluate at a full column assignment. Computed in `i128`.
    pub fn eval(&self, values: &[i64]) -> i128 {
        debug_assert_eq!(values.len(), self.coeffs.len());
        self.coeffs
            .iter()
            .zip(values)
            .fold(self.constant as i128, |acc, (&a, &v)| acc + a as i128 * v as i128)
    }

    /// Re-express this expression in a target space with `target_cols`
    /// columns; column `c` of `self` becomes column `map[c]`.
    pub fn remap(&self, map: &[usize], target_cols: usize) -> AffineExpr {
        debug_assert_eq!(map.len(), self.coeffs.len());
        let mut coeffs = vec![0; target_cols];
        for (c, a) in self.terms() {
            coeffs[map[c]] += a;
        }
        AffineExpr { coeffs, constant: self.constant }
    }

    /// Substitute the trailing `values.len()` columns by constants.
    fn substitute_tail(&self, values: &[i64]) -> Result<AffineExpr> {
        let keep = self.coeffs.len() - values.len();
        let mut constant = self.constant as i128;
        for (a, v) in self.coeffs[keep..].iter().zip(values) {
            constant += *a as i128 * *v as i128;
        }
        let constant = i64::try_from(constant).map_err(|_| Error::Overflow("parameter substitution"))?;
        Ok(AffineExpr { coeffs: self.coeffs[..keep].to_vec(), constant })
    }

    /// Insert `count` zero columns before column `at`.
    fn insert_cols(&self, at: usize, count: usize) -> AffineExpr {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + count);
        coeffs.extend_from_slice(&self.coeffs[..at]);
        coeffs.extend(core::iter::repeat(0).take(count));
        coeffs.extend_from_slice(&self.coeffs[at..]);
        AffineExpr { coeffs, constant: self.constant }
    }

    /// Render with the column names of `space`.
    pub fn display<'a>(&'a self, space: &'a Space) -> impl fmt::Display + 'a {
        ExprDisplay { expr: self, space }
    }
}

struct ExprDisplay<'a> {
    expr: &'a AffineExpr,
    space: &'a Space,
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, a) in self.expr.terms() {
            let name = self.space.col_name(c);
            let mag = a.unsigned_abs();
            if first {
                if a < 0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if a < 0 { " - " } else { " + " })?;
            }
            if mag != 1 {
                write!(f, "{}*", mag)?;
            }
            f.write_str(name)?;
            first = false;
        }
        let k = self.expr.constant;
        if first {
            write!(f, "{}", k)
        } else if k > 0 {
            write!(f, " + {}", k)
        } else if k < 0 {
            write!(f, " - {}", k.unsigned_abs())
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `expr = 0`
    Equality,
    /// `expr >= 0`
    Inequality,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub expr: AffineExpr,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn eq(expr: AffineExpr) -> Self {
        Constraint { expr, kind: ConstraintKind::Equality }
    }

    pub fn ge(expr: AffineExpr) -> Self {
        Constraint { expr, kind: ConstraintKind::Inequality }
    }

    /// `lhs <= rhs`
    pub fn le_of(lhs: &AffineExpr, rhs: &AffineExpr) -> Result<Self> {
        Ok(Self::ge(rhs.sub(lhs)?))
    }

    /// `lhs < rhs`
    pub fn lt_of(lhs: &AffineExpr, rhs: &AffineExpr) -> Result<Self> {
        Ok(Self::ge(rhs.sub(lhs)?.add_constant(-1)?))
    }

    /// `lhs = rhs`
    pub fn eq_of(lhs: &AffineExpr, rhs: &AffineExpr) -> Result<Self> {
        Ok(Self::eq(lhs.sub(rhs)?))
    }

    pub fn is_satisfied(&self, values: &[i64]) -> bool {
        let v = self.expr.eval(values);
        match self.kind {
            ConstraintKind::Equality => v == 0,
            ConstraintKind::Inequality => v >= 0,
        }
    }

    fn remap(&self, map: &[usize], target_cols: usize) -> Constraint {
        Constraint { expr: self.expr.remap(map, target_cols), kind: self.kind }
    }

    pub fn display<'a>(&'a self, space: &'a Space) -> impl fmt::Display + 'a {
        ConstraintDisplay { c: self, space }
    }
}

struct ConstraintDisplay<'a> {
    c: &'a Constraint,
    space: &'a Space,
}

impl fmt::Display for ConstraintDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.c.kind {
            ConstraintKind::Equality => "=",
            ConstraintKind::Inequality => ">=",
        };
        write!(f, "{} {} 0", self.c.expr.display(self.space), op)
    }
}

/// A conjunction of constraints.
pub type Conjunction = Vec<Constraint>;

/// Finite union of conjunctions of affine constraints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerSet {
    space: Space,
    disjuncts: Vec<Conjunction>,
}

impl IntegerSet {
    pub fn empty(space: Space) -> Self {
        IntegerSet { space, disjuncts: Vec::new() }
    }

    pub fn universe(space: Space) -> Self {
        IntegerSet { space, disjuncts: vec![Vec::new()] }
    }

    pub fn from_constraints(space: Space, constraints: Conjunction) -> Result<Self> {
        Self::from_disjuncts(space, vec![constraints])
    }

    pub fn from_disjuncts(space: Space, disjuncts: Vec<Conjunction>) -> Result<Self> {
        let n = space.n_cols();
        for c in disjuncts.iter().flatten() {
            if c.expr.n_cols() != n {
                return Err(Error::SpaceMismatch(format!(
                    "constraint over {} columns in a space of {}",
                    c.expr.n_cols(),
                    n
                )));
            }
        }
        let mut s = IntegerSet { space, disjuncts };
        s.dedup();
        Ok(s)
    }

    /// Parse the textual form `{ [params] -> [dims] : constraints }`.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_set(text, None)
    }

    /// Parse with an ambient parameter list: names not bound as dimensions
    /// resolve against `params`, and the result's parameters are exactly
    /// `params`.
    pub fn parse_with_params(text: &str, params: &[String]) -> Result<Self> {
        parse::parse_set(text, Some(params))
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn disjuncts(&self) -> &[Conjunction] {
        &self.disjuncts
    }

    /// True when the set has no disjuncts (syntactically empty).
    pub fn is_obviously_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    fn dedup(&mut self) {
        for d in &mut self.disjuncts {
            let mut seen: Vec<Constraint> = Vec::with_capacity(d.len());
            for c in d.drain(..) {
                if !seen.contains(&c) {
                    seen.push(c);
                }
            }
            *d = seen;
        }
        let mut uniq: Vec<Conjunction> = Vec::with_capacity(self.disjuncts.len());
        for d in self.disjuncts.drain(..) {
            if !uniq.contains(&d) {
                uniq.push(d);
            }
        }
        self.disjuncts = uniq;
    }

    fn check_same_space(&self, other: &IntegerSet) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.space.dims, self.space.params, other.space.dims, other.space.params
            )));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &IntegerSet) -> Result<IntegerSet> {
        self.intersect_capped(other, DEFAULT_DISJUNCT_CAP)
    }

    pub fn intersect_capped(&self, other: &IntegerSet, cap: usize) -> Result<IntegerSet> {
        self.check_same_space(other)?;
        if self.disjuncts.len().saturating_mul(other.disjuncts.len()) > cap {
            return Err(Error::ComplexityCap(cap));
        }
        let mut disjuncts = Vec::with_capacity(self.disjuncts.len() * other.disjuncts.len());
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                let mut c = a.clone();
                c.extend(b.iter().cloned());
                disjuncts.push(c);
            }
        }
        let mut s = IntegerSet { space: self.space.clone(), disjuncts };
        s.dedup();
        Ok(s)
    }

    pub fn union(&self, other: &IntegerSet) -> Result<IntegerSet> {
        self.check_same_space(other)?;
        let mut s = self.clone();
        s.disjuncts.extend(other.disjuncts.iter().cloned());
        s.dedup();
        if s.disjuncts.len() > DEFAULT_DISJUNCT_CAP {
            return Err(Error::ComplexityCap(DEFAULT_DISJUNCT_CAP));
        }
        Ok(s)
    }

    /// Conjoin extra constraints onto every disjunct.
    pub fn with_constraints(&self, extra: &[Constraint]) -> Result<IntegerSet> {
        let guard = IntegerSet::from_constraints(self.space.clone(), extra.to_vec())?;
        self.intersect(&guard)
    }

    /// Substitute every parameter by its value.
    pub fn instantiate(&self, pa: &ParamAssignment) -> Result<IntegerSet> {
        let values = pa.values_for(self.space.params())?;
        let disjuncts = self
            .disjuncts
            .iter()
            .map(|d| {
                d.iter()
                    .map(|c| Ok(Constraint { expr: c.expr.substitute_tail(&values)?, kind: c.kind }))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut s = IntegerSet { space: self.space.without_params(), disjuncts };
        s.dedup();
        Ok(s)
    }

    /// Integer emptiness, treating unassigned parameters as existentially
    /// quantified unknowns.
    pub fn is_empty(&self) -> Result<bool> {
        self.is_empty_with(&SolverConfig::default())
    }

    pub fn is_empty_with(&self, cfg: &SolverConfig) -> Result<bool> {
        Ok(self.sample_with(cfg)?.is_none())
    }

    /// Some integer point of the set, over all columns (dims then params).
    pub fn sample(&self) -> Result<Option<Vec<i64>>> {
        self.sample_with(&SolverConfig::default())
    }

    pub fn sample_with(&self, cfg: &SolverConfig) -> Result<Option<Vec<i64>>> {
        let n = self.space.n_cols();
        for d in &self.disjuncts {
            if let Some(p) = solver::find_integer_point(n, d, cfg)? {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    /// Membership of a full column assignment.
    pub fn contains(&self, values: &[i64]) -> bool {
        values.len() == self.space.n_cols()
            && self
                .disjuncts
                .iter()
                .any(|d| d.iter().all(|c| c.is_satisfied(values)))
    }

    /// All integer points, sorted lexicographically. The set must be
    /// parameter-free and bounded.
    pub fn enumerate_points(&self, budget: usize) -> Result<Vec<Vec<i64>>> {
        if self.space.n_params() != 0 {
            return Err(Error::Parametric);
        }
        let mut all = Vec::new();
        for d in &self.disjuncts {
            enumerate::enumerate_conjunction(&self.space, d, budget, &mut all)?;
            if all.len() > budget {
                all.sort_unstable();
                all.dedup();
                if all.len() > budget {
                    return Err(Error::BudgetExceeded(budget));
                }
            }
        }
        all.sort_unstable();
        all.dedup();
        Ok(all)
    }

    /// Insert new dimensions named `names` before dimension `at`.
    pub fn insert_dims(&self, at: usize, names: &[String]) -> Result<IntegerSet> {
        let mut dims = self.space.dims.clone();
        for (k, n) in names.iter().enumerate() {
            dims.insert(at + k, n.clone());
        }
        let space = Space::new(dims, self.space.params.clone())?;
        let disjuncts = self
            .disjuncts
            .iter()
            .map(|d| {
                d.iter()
                    .map(|c| Constraint { expr: c.expr.insert_cols(at, names.len()), kind: c.kind })
                    .collect()
            })
            .collect();
        Ok(IntegerSet { space, disjuncts })
    }

    /// Re-express in `target`, sending column `c` to `map[c]`.
    pub fn embed(&self, target: &Space, map: &[usize]) -> IntegerSet {
        let n = target.n_cols();
        let disjuncts = self
            .disjuncts
            .iter()
            .map(|d| d.iter().map(|c| c.remap(map, n)).collect())
            .collect();
        IntegerSet { space: target.clone(), disjuncts }
    }

    /// Same constraints under renamed dimensions (count must match).
    pub fn rename_dims(&self, dims: Vec<String>) -> Result<IntegerSet> {
        if dims.len() != self.space.n_dims() {
            return Err(Error::SpaceMismatch("rename changes dimension count".into()));
        }
        let space = Space::new(dims, self.space.params.clone())?;
        Ok(IntegerSet { space, disjuncts: self.disjuncts.clone() })
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
    f.write_str("[")?;
    for (k, n) in names.iter().enumerate() {
        if k > 0 {
            f.write_str(", ")?;
        }
        f.write_str(n)?;
    }
    f.write_str("]")
}

fn write_body(f: &mut fmt::Formatter<'_>, space: &Space, disjuncts: &[Conjunction]) -> fmt::Result {
    f.write_str(" : ")?;
    if disjuncts.is_empty() {
        return f.write_str("false }");
    }
    for (k, d) in disjuncts.iter().enumerate() {
        if k > 0 {
            f.write_str(" or ")?;
        }
        if d.is_empty() {
            f.write_str("true")?;
        }
        for (j, c) in d.iter().enumerate() {
            if j > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{}", c.display(space))?;
        }
    }
    f.write_str(" }")
}

impl fmt::Display for IntegerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{ ")?;
        if !self.space.params.is_empty() {
            write_tuple(f, &self.space.params)?;
            f.write_str(" -> ")?;
        }
        write_tuple(f, &self.space.dims)?;
        write_body(f, &self.space, &self.disjuncts)
    }
}

/// A set whose dimensions split into an input tuple followed by an output
/// tuple. Input and output names are disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerRelation {
    n_in: usize,
    set: IntegerSet,
}

impl IntegerRelation {
    pub fn from_set(n_in: usize, set: IntegerSet) -> Result<Self> {
        if n_in > set.space.n_dims() {
            return Err(Error::SpaceMismatch("input arity exceeds dimension count".into()));
        }
        Ok(IntegerRelation { n_in, set })
    }

    pub fn new(
        in_dims: Vec<String>,
        out_dims: Vec<String>,
        params: Vec<String>,
        disjuncts: Vec<Conjunction>,
    ) -> Result<Self> {
        let n_in = in_dims.len();
        let mut dims = in_dims;
        dims.extend(out_dims);
        let space = Space::new(dims, params)?;
        Ok(IntegerRelation { n_in, set: IntegerSet::from_disjuncts(space, disjuncts)? })
    }

    /// Parse `{ [params] -> [in] -> [out] : constraints }`.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_relation(text, None)
    }

    pub fn parse_with_params(text: &str, params: &[String]) -> Result<Self> {
        parse::parse_relation(text, Some(params))
    }

    pub fn as_set(&self) -> &IntegerSet {
        &self.set
    }

    pub fn space(&self) -> &Space {
        &self.set.space
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.set.space.n_dims() - self.n_in
    }

    pub fn input_dims(&self) -> &[String] {
        &self.set.space.dims[..self.n_in]
    }

    pub fn output_dims(&self) -> &[String] {
        &self.set.space.dims[self.n_in..]
    }

    pub fn params(&self) -> &[String] {
        self.set.space.params()
    }

    pub fn disjuncts(&self) -> &[Conjunction] {
        self.set.disjuncts()
    }

    fn same_shape(&self, other: &IntegerRelation) -> Result<()> {
        if self.n_in != other.n_in {
            return Err(Error::SpaceMismatch("relations differ in input arity".into()));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &IntegerRelation) -> Result<IntegerRelation> {
        self.same_shape(other)?;
        Ok(IntegerRelation { n_in: self.n_in, set: self.set.intersect(&other.set)? })
    }

    /// Intersect with a set living in the relation's concatenated space.
    pub fn intersect_set(&self, other: &IntegerSet) -> Result<IntegerRelation> {
        Ok(IntegerRelation { n_in: self.n_in, set: self.set.intersect(other)? })
    }

    pub fn union(&self, other: &IntegerRelation) -> Result<IntegerRelation> {
        self.same_shape(other)?;
        Ok(IntegerRelation { n_in: self.n_in, set: self.set.union(&other.set)? })
    }

    pub fn instantiate(&self, pa: &ParamAssignment) -> Result<IntegerRelation> {
        Ok(IntegerRelation { n_in: self.n_in, set: self.set.instantiate(pa)? })
    }

    pub fn is_empty(&self) -> Result<bool> {
        self.set.is_empty()
    }

    pub fn is_empty_with(&self, cfg: &SolverConfig) -> Result<bool> {
        self.set.is_empty_with(cfg)
    }

    /// All `(source, target)` pairs, sorted.
    pub fn enumerate_pairs(&self, budget: usize) -> Result<Vec<(Vec<i64>, Vec<i64>)>> {
        Ok(self
            .set
            .enumerate_points(budget)?
            .into_iter()
            .map(|mut p| {
                let out = p.split_off(self.n_in);
                (p, out)
            })
            .collect())
    }

    pub fn contains(&self, src: &[i64], dst: &[i64], params: &[i64]) -> bool {
        let mut v = Vec::with_capacity(src.len() + dst.len() + params.len());
        v.extend_from_slice(src);
        v.extend_from_slice(dst);
        v.extend_from_slice(params);
        self.set.contains(&v)
    }

    /// Replace the underlying set, keeping the input arity.
    pub fn with_set(&self, set: IntegerSet) -> Result<IntegerRelation> {
        Self::from_set(self.n_in, set)
    }
}

impl fmt::Display for IntegerRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{ ")?;
        write_tuple(f, self.set.space.params())?;
        f.write_str(" -> ")?;
        write_tuple(f, self.input_dims())?;
        f.write_str(" -> ")?;
        write_tuple(f, self.output_dims())?;
        write_body(f, &self.set.space, &self.set.disjuncts)
    }
}

/// Values for symbolic parameters.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamAssignment(BTreeMap<String, i64>);

impl ParamAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        ParamAssignment(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn set(&mut self, name: &str, value: i64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<i64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, i64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Values in the order of `params`, failing on the first missing one.
    pub fn values_for(&self, params: &[String]) -> Result<Vec<i64>> {
        params
            .iter()
            .map(|p| self.get(p).ok_or_else(|| Error::MissingParameter(p.clone())))
            .collect()
    }
}

impl FromStr for ParamAssignment {
    type Err = Error;

    /// `T=8,N=16`
    fn from_str(s: &str) -> Result<Self> {
        let mut pa = ParamAssignment::new();
        for (k, item) in s.split(',').map(str::trim).filter(|t| !t.is_empty()).enumerate() {
            let (name, value) = item.split_once('=').ok_or_else(|| Error::Parse {
                pos: k,
                msg: format!("expected name=value, got `{}`", item),
            })?;
            let value: i64 = value.trim().parse().map_err(|_| Error::Parse {
                pos: k,
                msg: format!("bad integer in `{}`", item),
            })?;
            pa.set(name.trim(), value);
        }
        Ok(pa)
    }
}

impl fmt::Display for ParamAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, v)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}={}", name, v)?;
        }
        Ok(())
    }
}
