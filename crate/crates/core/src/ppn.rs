//! Polyhedral process networks: processes with iteration domains and
//! sequential affine schedules, connected by channels carrying dataflow
//! relations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::presburger::{parse_affine, AffineExpr, IntegerRelation, IntegerSet, ParamAssignment, Space};
use crate::tiling::Tiling;

/// Default enumeration budget for checks at fixed parameters.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Affine map from a process's iteration space to timestamp vectors,
/// ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    name: String,
    space: Space,
    rows: Vec<AffineExpr>,
    sequential: bool,
}

impl Schedule {
    pub fn new(name: impl Into<String>, space: Space, rows: Vec<AffineExpr>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.n_cols() != space.n_cols()) {
            return Err(Error::SpaceMismatch(format!(
                "schedule row over {} columns in a space of {}",
                r.n_cols(),
                space.n_cols()
            )));
        }
        Ok(Schedule { name: name.into(), space, rows, sequential: true })
    }

    /// `θ(i) = i`
    pub fn identity(name: impl Into<String>, space: Space) -> Self {
        let n = space.n_cols();
        let rows = (0..space.n_dims()).map(|d| AffineExpr::var(n, d)).collect();
        Schedule { name: name.into(), space, rows, sequential: true }
    }

    /// Rows given as affine expressions over the space's names.
    pub fn parse(name: impl Into<String>, space: Space, rows: &[&str]) -> Result<Self> {
        let rows = rows.iter().map(|r| parse_affine(r, &space)).collect::<Result<Vec<_>>>()?;
        Self::new(name, space, rows)
    }

    pub fn with_sequential(mut self, sequential: bool) -> Self {
        self.sequential = sequential;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn rows(&self) -> &[AffineExpr] {
        &self.rows
    }

    /// Number of timestamp dimensions.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_sequential(&self) -> bool {
        self.sequential
    }

    pub fn instantiate(&self, pa: &ParamAssignment) -> Result<Schedule> {
        let values = pa.values_for(self.space.params())?;
        let space = Space::new(self.space.dims().to_vec(), Vec::new())?;
        let nd = self.space.n_dims();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut k = r.constant_term() as i128;
                for (p, v) in values.iter().enumerate() {
                    k += r.coeff(nd + p) as i128 * *v as i128;
                }
                let k = i64::try_from(k).map_err(|_| Error::Overflow("schedule instantiation"))?;
                Ok(AffineExpr::from_parts(r.coeffs()[..nd].to_vec(), k))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Schedule { name: self.name.clone(), space, rows, sequential: self.sequential })
    }

    /// Timestamp of a point given over all columns of the schedule's space.
    pub fn eval(&self, values: &[i64]) -> Result<Vec<i64>> {
        self.rows
            .iter()
            .map(|r| i64::try_from(r.eval(values)).map_err(|_| Error::Overflow("timestamp")))
            .collect()
    }

    /// Rows rendered with the space's names.
    pub fn row_strings(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.display(&self.space).to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Process {
    pub name: String,
    pub domain: IntegerSet,
    pub schedule: Schedule,
    /// Free-form description of the program instances this process runs.
    pub instance_label: Option<String>,
    /// Tiling already applied to this process, if any.
    pub tiling: Option<Tiling>,
}

impl Process {
    pub fn new(name: impl Into<String>, domain: IntegerSet, schedule: Schedule) -> Result<Self> {
        let name = name.into();
        if schedule.space() != domain.space() {
            return Err(Error::Validation(format!(
                "process `{}`: schedule space differs from domain space",
                name
            )));
        }
        Ok(Process { name, domain, schedule, instance_label: None, tiling: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.instance_label = Some(label.into());
        self
    }

    pub fn dims(&self) -> &[String] {
        self.domain.space().dims()
    }

    /// Number of tiling hyperplanes applied (0 when untiled).
    pub fn tile_depth(&self) -> usize {
        self.tiling.as_ref().map_or(0, Tiling::depth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub id: String,
    pub producer: String,
    pub consumer: String,
    pub dataflow: IntegerRelation,
}

impl Channel {
    pub fn new(
        id: impl Into<String>,
        producer: impl Into<String>,
        consumer: impl Into<String>,
        dataflow: IntegerRelation,
    ) -> Self {
        Channel { id: id.into(), producer: producer.into(), consumer: consumer.into(), dataflow }
    }
}

/// A symbolic parameter with optional bounds and a default value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub min: Option<i64>,
    pub max: Option<i64>,
    pub default: Option<i64>,
}

impl ParamDecl {
    pub fn new(name: impl Into<String>) -> Self {
        ParamDecl { name: name.into(), min: None, max: None, default: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ppn {
    pub name: String,
    params: Vec<ParamDecl>,
    processes: Vec<Process>,
    channels: Vec<Channel>,
}

impl Ppn {
    /// Build a network, checking its structural invariants.
    pub fn new(
        name: impl Into<String>,
        params: Vec<ParamDecl>,
        processes: Vec<Process>,
        channels: Vec<Channel>,
    ) -> Result<Self> {
        let ppn = Ppn { name: name.into(), params, processes, channels };
        ppn.check_structure()?;
        Ok(ppn)
    }

    pub fn params(&self) -> &[ParamDecl] {
        &self.params
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn processes(&self) -> &[Process] {
        &self.processes
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn process(&self, name: &str) -> Option<&Process> {
        self.processes.iter().find(|p| p.name == name)
    }

    pub fn channel(&self, id: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.id == id)
    }

    /// Producer and consumer of a channel.
    pub fn endpoints(&self, c: &Channel) -> Result<(&Process, &Process)> {
        let p = self
            .process(&c.producer)
            .ok_or_else(|| Error::Validation(format!("unknown process `{}`", c.producer)))?;
        let q = self
            .process(&c.consumer)
            .ok_or_else(|| Error::Validation(format!("unknown process `{}`", c.consumer)))?;
        Ok((p, q))
    }

    /// Same parameters, new processes and channels.
    pub fn rebuild(&self, processes: Vec<Process>, channels: Vec<Channel>) -> Result<Ppn> {
        Ppn::new(self.name.clone(), self.params.clone(), processes, channels)
    }

    fn check_structure(&self) -> Result<()> {
        let names = self.param_names();
        let mut seen = BTreeSet::new();
        for p in &self.processes {
            if !seen.insert(p.name.as_str()) {
                return Err(Error::Validation(format!("duplicate process `{}`", p.name)));
            }
            if p.domain.space().params() != &names[..] {
                return Err(Error::Validation(format!(
                    "process `{}`: domain parameters {:?} differ from network parameters {:?}",
                    p.name,
                    p.domain.space().params(),
                    names
                )));
            }
            if p.schedule.space() != p.domain.space() {
                return Err(Error::Validation(format!(
                    "process `{}`: schedule space differs from domain space",
                    p.name
                )));
            }
        }
        let mut ids = BTreeSet::new();
        for c in &self.channels {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::Validation(format!("duplicate channel id `{}`", c.id)));
            }
            let (p, q) = self.endpoints(c).map_err(|_| {
                let missing = if self.process(&c.producer).is_none() { &c.producer } else { &c.consumer };
                Error::Validation(format!("channel `{}` references unknown process `{}`", c.id, missing))
            })?;
            if c.dataflow.params() != &names[..] {
                return Err(Error::Validation(format!(
                    "channel `{}`: relation parameters differ from network parameters",
                    c.id
                )));
            }
            if c.dataflow.n_in() != p.dims().len() || c.dataflow.n_out() != q.dims().len() {
                return Err(Error::Validation(format!(
                    "channel `{}`: relation arity {}->{} does not match {}->{}",
                    c.id,
                    c.dataflow.n_in(),
                    c.dataflow.n_out(),
                    p.dims().len(),
                    q.dims().len()
                )));
            }
        }
        Ok(())
    }

    /// Assignment built from the declared defaults, if every parameter has one.
    pub fn default_assignment(&self) -> Result<ParamAssignment> {
        let mut pa = ParamAssignment::new();
        for p in &self.params {
            let v = p.default.ok_or_else(|| Error::MissingParameter(p.name.clone()))?;
            pa.set(&p.name, v);
        }
        Ok(pa)
    }

    /// Defaults overridden by `given`; errors on unknown names, missing
    /// values and out-of-range values.
    pub fn resolve_assignment(&self, given: &ParamAssignment) -> Result<ParamAssignment> {
        let mut pa = ParamAssignment::new();
        for (name, _) in given.iter() {
            if !self.params.iter().any(|p| p.name == name) {
                return Err(Error::UnknownDimension(name.to_string()));
            }
        }
        for p in &self.params {
            let v = given
                .get(&p.name)
                .or(p.default)
                .ok_or_else(|| Error::MissingParameter(p.name.clone()))?;
            if p.min.is_some_and(|m| v < m) || p.max.is_some_and(|m| v > m) {
                return Err(Error::Validation(format!(
                    "parameter {}={} outside [{:?}, {:?}]",
                    p.name, v, p.min, p.max
                )));
            }
            pa.set(&p.name, v);
        }
        Ok(pa)
    }
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub invariant: &'static str,
    pub subject: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub const INV_INJECTIVE: &str = "schedule-injective";
pub const INV_IN_DOMAINS: &str = "dataflow-within-domains";
pub const INV_PARTITION: &str = "channels-disjoint";

/// Check the enumeration-based invariants at fixed parameters.
pub fn validate_at(ppn: &Ppn, pa: &ParamAssignment, budget: usize) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();

    let mut domains = BTreeMap::new();
    for p in ppn.processes() {
        let dom = p.domain.instantiate(pa)?;
        let points = dom.enumerate_points(budget)?;
        if p.schedule.is_sequential() {
            let sched = p.schedule.instantiate(pa)?;
            let mut stamped = points
                .iter()
                .map(|x| Ok((sched.eval(x)?, x.clone())))
                .collect::<Result<Vec<_>>>()?;
            stamped.sort();
            let clash = stamped.windows(2).find(|w| w[0].0 == w[1].0);
            report.checks.push(Check {
                invariant: INV_INJECTIVE,
                subject: p.name.clone(),
                passed: clash.is_none(),
                witness: clash.map(|w| format!("{:?} and {:?} both at {:?}", w[0].1, w[1].1, w[0].0)),
            });
        }
        domains.insert(p.name.as_str(), dom);
    }

    let mut pair_sets: BTreeMap<(&str, &str), Vec<(&str, Vec<(Vec<i64>, Vec<i64>)>)>> = BTreeMap::new();
    for c in ppn.channels() {
        let pairs = c.dataflow.instantiate(pa)?.enumerate_pairs(budget)?;
        let (src, dst) = (&domains[c.producer.as_str()], &domains[c.consumer.as_str()]);
        let outside = pairs.iter().find(|(x, y)| !src.contains(x) || !dst.contains(y));
        report.checks.push(Check {
            invariant: INV_IN_DOMAINS,
            subject: c.id.clone(),
            passed: outside.is_none(),
            witness: outside.map(|(x, y)| format!("{:?} -> {:?}", x, y)),
        });
        pair_sets
            .entry((c.producer.as_str(), c.consumer.as_str()))
            .or_default()
            .push((c.id.as_str(), pairs));
    }

    for ((p, q), chans) in &pair_sets {
        let mut owner: BTreeMap<&(Vec<i64>, Vec<i64>), &str> = BTreeMap::new();
        let mut clash = None;
        'outer: for (id, pairs) in chans {
            for pair in pairs {
                if let Some(prev) = owner.insert(pair, id) {
                    clash = Some(format!("{:?} -> {:?} in both `{}` and `{}`", pair.0, pair.1, prev, id));
                    break 'outer;
                }
            }
        }
        report.checks.push(Check {
            invariant: INV_PARTITION,
            subject: format!("{} -> {}", p, q),
            passed: clash.is_none(),
            witness: clash,
        });
    }
    Ok(report)
}
