//! Ground truth by exhaustion: enumerate a channel's pairs at fixed
//! parameters, order writes and reads by their timestamps, and read off
//! order, multiplicity and occupancy directly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::PatternClass;
use crate::ppn::{Channel, Schedule};
use crate::presburger::ParamAssignment;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceWrite {
    pub timestamp: Vec<i64>,
    pub iteration: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRead {
    pub timestamp: Vec<i64>,
    pub iteration: Vec<i64>,
    /// Index into `writes` of the value read.
    pub source: usize,
}

/// Writes in production order and reads in consumption order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub channel: alloc::string::String,
    pub writes: Vec<TraceWrite>,
    pub reads: Vec<TraceRead>,
}

/// Timestamps of a set of points, sorted; distinct points sharing a
/// timestamp are a collision.
fn stamp(s: &Schedule, who: &str, points: Vec<Vec<i64>>) -> Result<Vec<(Vec<i64>, Vec<i64>)>> {
    let mut out = points
        .into_iter()
        .map(|x| Ok((s.eval(&x)?, x)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    out.dedup();
    if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::ScheduleCollision(format!(
            "{} iterations {:?} and {:?} share timestamp {:?}",
            who, w[0].1, w[1].1, w[0].0
        )));
    }
    Ok(out)
}

/// Enumerate the channel and order its events.
pub fn build_trace(c: &Channel, sp: &Schedule, sc: &Schedule, pa: &ParamAssignment, budget: usize) -> Result<Trace> {
    let pairs = c.dataflow.instantiate(pa)?.enumerate_pairs(budget)?;
    let sp = sp.instantiate(pa)?;
    let sc = sc.instantiate(pa)?;

    let writes = stamp(&sp, &c.producer, pairs.iter().map(|(x, _)| x.clone()).collect())?;
    let index: BTreeMap<&Vec<i64>, usize> = writes.iter().enumerate().map(|(k, (_, x))| (x, k)).collect();
    let reads = stamp(&sc, &c.consumer, pairs.iter().map(|(_, y)| y.clone()).collect())?;

    // a producer and a distinct consumer iteration at one timestamp
    let same_process = c.producer == c.consumer;
    let by_time: BTreeMap<&Vec<i64>, &Vec<i64>> = writes.iter().map(|(t, x)| (t, x)).collect();
    for (t, y) in &reads {
        if let Some(x) = by_time.get(t) {
            if !(same_process && *x == y) {
                return Err(Error::ScheduleCollision(format!(
                    "`{}` {:?} and `{}` {:?} share timestamp {:?}",
                    c.producer, x, c.consumer, y, t
                )));
            }
        }
    }

    let read_time: BTreeMap<&Vec<i64>, &Vec<i64>> = reads.iter().map(|(t, y)| (y, t)).collect();
    let mut trace_reads = Vec::with_capacity(pairs.len());
    for (x, y) in &pairs {
        let source = index[x];
        let t = read_time[y].clone();
        if t <= writes[source].0 {
            return Err(Error::CausalityViolation(format!(
                "{:?} reads {:?} at {:?}, not after it is written at {:?}",
                y, x, t, writes[source].0
            )));
        }
        trace_reads.push(TraceRead { timestamp: t, iteration: y.clone(), source });
    }
    trace_reads.sort_by(|a, b| (&a.timestamp, a.source).cmp(&(&b.timestamp, b.source)));

    Ok(Trace {
        channel: c.id.clone(),
        writes: writes.into_iter().map(|(timestamp, iteration)| TraceWrite { timestamp, iteration }).collect(),
        reads: trace_reads,
    })
}

impl Trace {
    /// Reads grouped by consumer iteration, in consumption order.
    fn read_groups(&self) -> Vec<&[TraceRead]> {
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=self.reads.len() {
            if k == self.reads.len() || self.reads[k].timestamp != self.reads[start].timestamp {
                groups.push(&self.reads[start..k]);
                start = k;
            }
        }
        groups
    }

    /// Indices of two reads whose values were written in the opposite order.
    /// Reads made by one iteration are unordered among themselves.
    pub fn reversal(&self) -> Option<(usize, usize)> {
        let mut latest: Option<usize> = None;
        let mut offset = 0;
        for g in self.read_groups() {
            if let Some(prev) = latest {
                if let Some(j) = g.iter().position(|r| r.source < self.reads[prev].source) {
                    return Some((prev, offset + j));
                }
            }
            let top = (0..g.len()).max_by_key(|&j| g[j].source).map(|j| offset + j);
            latest = match (latest, top) {
                (Some(p), Some(t)) if self.reads[p].source >= self.reads[t].source => Some(p),
                (_, t) => t,
            };
            offset += g.len();
        }
        None
    }

    pub fn in_order(&self) -> bool {
        self.reversal().is_none()
    }

    pub fn unicity(&self) -> bool {
        let mut seen = vec![false; self.writes.len()];
        self.reads.iter().all(|r| !core::mem::replace(&mut seen[r.source], true))
    }

    pub fn classify(&self) -> PatternClass {
        PatternClass::from_predicates(self.in_order(), self.unicity())
    }

    /// Peak number of values written and not yet read for the last time,
    /// stepping through writes and reads in timestamp order. A read and a
    /// write at one timestamp belong to one iteration, which reads first.
    pub fn max_live(&self) -> usize {
        let mut pending = vec![0usize; self.writes.len()];
        for r in &self.reads {
            pending[r.source] += 1;
        }
        let (mut w, mut r) = (0, 0);
        let (mut live, mut peak) = (0usize, 0usize);
        while w < self.writes.len() || r < self.reads.len() {
            let write_next = w < self.writes.len()
                && (r == self.reads.len() || self.writes[w].timestamp < self.reads[r].timestamp);
            if write_next {
                live += 1;
                peak = peak.max(live);
                w += 1;
            } else {
                let s = self.reads[r].source;
                pending[s] -= 1;
                if pending[s] == 0 {
                    live -= 1;
                }
                r += 1;
            }
        }
        peak
    }
}

pub fn oracle_classify(c: &Channel, sp: &Schedule, sc: &Schedule, pa: &ParamAssignment, budget: usize) -> Result<PatternClass> {
    Ok(build_trace(c, sp, sc, pa, budget)?.classify())
}

pub fn oracle_maxlive(c: &Channel, sp: &Schedule, sc: &Schedule, pa: &ParamAssignment, budget: usize) -> Result<usize> {
    Ok(build_trace(c, sp, sc, pa, budget)?.max_live())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::{IntegerRelation, IntegerSet, Space};
    use crate::tiling::{lift_relation, tile_process, Tiling};
    use crate::ppn::Process;

    const B: usize = 100_000;

    fn compute() -> Process {
        let domain = IntegerSet::parse("{ [T, N] -> [t, i] : 1 <= t <= T and 1 <= i <= N }").unwrap();
        let schedule = Schedule::identity("compute", domain.space().clone());
        Process::new("compute", domain, schedule).unwrap()
    }

    fn dep5() -> Channel {
        let r = IntegerRelation::parse(
            "{ [T, N] -> [t, i] -> [t', i'] : t' = t + 1 and i' = i and 1 <= t and t' <= T and 1 <= i <= N }",
        )
        .unwrap();
        Channel::new("dep5", "compute", "compute", r)
    }

    fn pa8() -> ParamAssignment {
        ParamAssignment::from_pairs([("T", 8), ("N", 8)])
    }

    #[test]
    fn untiled_dep5_is_fifo() {
        let s = compute().schedule;
        assert_eq!(oracle_classify(&dep5(), &s, &s, &pa8(), B).unwrap(), PatternClass::Fifo);
        // one row of N values
        assert_eq!(oracle_maxlive(&dep5(), &s, &s, &pa8(), B).unwrap(), 8);
    }

    #[test]
    fn tiled_dep5_reverses_across_the_skewed_hyperplane() {
        let t = Tiling::new(vec![vec![1, 0], vec![1, 1]], vec![2, 2]).unwrap();
        let p = tile_process(&compute(), &t).unwrap();
        let c = lift_relation(&dep5(), &t, &t).unwrap();
        let trace = build_trace(&c, &p.schedule, &p.schedule, &pa8(), B).unwrap();
        let (a, b) = trace.reversal().unwrap();
        let (ra, rb) = (&trace.reads[a], &trace.reads[b]);
        assert!(ra.timestamp < rb.timestamp);
        assert!(trace.writes[rb.source].timestamp < trace.writes[ra.source].timestamp);
        assert_eq!(trace.classify(), PatternClass::OutOfOrderNoMultiplicity);
    }

    #[test]
    fn reads_follow_one_two_four_three_across_tiles() {
        let t = Tiling::new(vec![vec![1, 0], vec![1, 1]], vec![2, 2]).unwrap();
        let p = tile_process(&compute(), &t).unwrap();
        let c = lift_relation(&dep5(), &t, &t).unwrap();
        let trace = build_trace(&c, &p.schedule, &p.schedule, &pa8(), B).unwrap();
        let order: Vec<usize> = trace.reads.iter().map(|r| r.source).collect();
        // four values written in order w1 < w2 < w3 < w4, read as w1, w2, w4, w3
        let n = order.len();
        let found = (0..n).any(|a| {
            (a + 1..n).any(|b| {
                order[a] < order[b]
                    && (b + 1..n).any(|c| {
                        order[b] < order[c] && (c + 1..n).any(|d| order[b] < order[d] && order[d] < order[c])
                    })
            })
        });
        assert!(found);
        // some reversal has its two reads in different tiles along the skewed
        // hyperplane
        let straddles = (0..n).any(|a| {
            (a + 1..n).any(|b| {
                order[b] < order[a] && trace.reads[a].iteration[1] != trace.reads[b].iteration[1]
            })
        });
        assert!(straddles);
    }

    #[test]
    fn broadcast_read_in_writer_order() {
        let r = IntegerRelation::parse("{ [i] -> [i', j] : i' = i and 0 <= i <= 4 and 0 <= j <= 2 }").unwrap();
        let c = Channel::new("b", "p", "c", r);
        let sp = Schedule::parse("p", Space::from_names(&["i"], &[]).unwrap(), &["i", "0"]).unwrap();
        let sc = Schedule::parse("c", Space::from_names(&["i'", "j"], &[]).unwrap(), &["i'", "j + 1"]).unwrap();
        let pa = ParamAssignment::new();
        assert_eq!(oracle_classify(&c, &sp, &sc, &pa, B).unwrap(), PatternClass::InOrderWithMultiplicity);
        assert_eq!(oracle_maxlive(&c, &sp, &sc, &pa, B).unwrap(), 1);
    }

    #[test]
    fn empty_and_single_pair_channels() {
        let s = Schedule::identity("p", Space::from_names(&["i"], &[]).unwrap());
        let t = Schedule::identity("c", Space::from_names(&["j"], &[]).unwrap());
        let empty = Channel::new("e", "p", "c", IntegerRelation::parse("{ [i] -> [j] : false }").unwrap());
        assert_eq!(oracle_maxlive(&empty, &s, &t, &ParamAssignment::new(), B).unwrap(), 0);
        assert_eq!(oracle_classify(&empty, &s, &t, &ParamAssignment::new(), B).unwrap(), PatternClass::Fifo);
        let one = Channel::new("o", "p", "c", IntegerRelation::parse("{ [i] -> [j] : i = 0 and j = 3 }").unwrap());
        assert_eq!(oracle_maxlive(&one, &s, &t, &ParamAssignment::new(), B).unwrap(), 1);
    }

    #[test]
    fn collisions_and_causality_are_errors() {
        let s = Schedule::identity("p", Space::from_names(&["i"], &[]).unwrap());
        let t = Schedule::identity("c", Space::from_names(&["j"], &[]).unwrap());
        let same = Channel::new("s", "p", "c", IntegerRelation::parse("{ [i] -> [j] : 0 <= i <= 2 and j = i }").unwrap());
        assert!(matches!(oracle_maxlive(&same, &s, &t, &ParamAssignment::new(), B), Err(Error::ScheduleCollision(_))));
        let back = Channel::new("b", "p", "c", IntegerRelation::parse("{ [i] -> [j] : 0 <= i <= 2 and j = i - 5 }").unwrap());
        assert!(matches!(oracle_maxlive(&back, &s, &t, &ParamAssignment::new(), B), Err(Error::CausalityViolation(_))));
        let flat = Schedule::parse("c", Space::from_names(&["j"], &[]).unwrap(), &["10"]).unwrap();
        let two = Channel::new("t", "p", "c", IntegerRelation::parse("{ [i] -> [j] : 0 <= i <= 1 and j = i }").unwrap());
        assert!(matches!(oracle_maxlive(&two, &s, &flat, &ParamAssignment::new(), B), Err(Error::ScheduleCollision(_))));
    }

    #[test]
    fn trace_is_deterministic() {
        let s = compute().schedule;
        let a = build_trace(&dep5(), &s, &s, &pa8(), B).unwrap();
        let b = build_trace(&dep5(), &s, &s, &pa8(), B).unwrap();
        assert_eq!(a, b);
        assert!(a.reads.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }
}
