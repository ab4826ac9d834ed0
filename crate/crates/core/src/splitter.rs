//! Splitting a channel by the depth at which its dependences cross tile
//! boundaries, and rewriting a network when every piece is a FIFO.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{classify_with, lex_compare_set, LexMode, PatternClass};
use crate::ppn::{Channel, Ppn, Schedule};
use crate::presburger::{IntegerRelation, ParamAssignment, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    /// Crossing depths `1..=n`, then the intra-tile part.
    pub parts: Vec<IntegerRelation>,
    /// Whether each part has a pair at the given parameters.
    pub nonempty_mask: Vec<bool>,
}

/// Id suffix of part `k` (0-based) of an `n`-deep split.
pub fn part_suffix(k: usize, n: usize) -> String {
    if k < n {
        format!(".d{}", k + 1)
    } else {
        ".intra".to_string()
    }
}

/// The first `n` rows must be the tile coordinates, i.e. the first `n`
/// dimensions taken as they are.
fn check_shape(s: &Schedule, n: usize) -> Result<()> {
    if s.len() <= n || s.space().n_dims() < n {
        return Err(Error::BadScheduleShape(format!(
            "schedule `{}` has {} rows, need more than {} tile rows",
            s.name(),
            s.len(),
            n
        )));
    }
    for (k, row) in s.rows()[..n].iter().enumerate() {
        let unit = row.constant_term() == 0 && row.terms().eq(core::iter::once((k, 1)));
        if !unit {
            return Err(Error::BadScheduleShape(format!(
                "schedule `{}` row {} is `{}`, expected the tile coordinate `{}`",
                s.name(),
                k + 1,
                row.display(s.space()),
                s.space().col_name(k)
            )));
        }
    }
    Ok(())
}

/// Partition `rel` by tile-crossing depth under tiled schedules of depth `n`.
pub fn split(rel: &IntegerRelation, sp: &Schedule, sc: &Schedule, n: usize, pa: &ParamAssignment) -> Result<SplitResult> {
    split_with(rel, sp, sc, n, pa, &SolverConfig::default())
}

pub fn split_with(
    rel: &IntegerRelation,
    sp: &Schedule,
    sc: &Schedule,
    n: usize,
    pa: &ParamAssignment,
    cfg: &SolverConfig,
) -> Result<SplitResult> {
    if n == 0 {
        return Err(Error::BadScheduleShape("split needs at least one tiling hyperplane".into()));
    }
    check_shape(sp, n)?;
    check_shape(sc, n)?;
    let mut parts = Vec::with_capacity(n + 1);
    for k in 1..=n {
        parts.push(rel.intersect_set(&lex_compare_set(rel, sp, sc, LexMode::PrecedesAtDepth(k))?)?);
    }
    parts.push(rel.intersect_set(&lex_compare_set(rel, sp, sc, LexMode::EqualFirst(n))?)?);
    let nonempty_mask = parts
        .iter()
        .map(|p| Ok(!p.instantiate(pa)?.is_empty_with(cfg)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitResult { parts, nonempty_mask })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Replaced,
    Kept,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartLog {
    pub suffix: String,
    pub class: PatternClass,
    /// Dataflow pairs in the part at the given parameters.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelLog {
    pub id: String,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default)]
    pub parts: Vec<PartLog>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FifoizeLog {
    pub channels: Vec<ChannelLog>,
}

impl FifoizeLog {
    pub fn entry(&self, id: &str) -> Option<&ChannelLog> {
        self.channels.iter().find(|c| c.id == id)
    }
}

/// Why a channel cannot be split, if it cannot.
fn skip_reason(ppn: &Ppn, c: &Channel) -> Result<Option<String>> {
    let (p, q) = ppn.endpoints(c)?;
    let (np, nq) = (p.tile_depth(), q.tile_depth());
    if np == 0 || nq == 0 {
        return Ok(Some("endpoint not tiled".into()));
    }
    if np != nq {
        return Ok(Some(format!("tiling depths differ ({} vs {})", np, nq)));
    }
    if let Err(e) = check_shape(&p.schedule, np).and_then(|_| check_shape(&q.schedule, nq)) {
        return Ok(Some(e.to_string()));
    }
    if p.schedule.len() != q.schedule.len() {
        return Ok(Some("schedule lengths differ".into()));
    }
    Ok(None)
}

/// Replace every tiled channel whose split parts are all FIFOs by those
/// parts. Channels that cannot be split, or that have a non-FIFO part, are
/// kept as they are.
pub fn fifoize(ppn: &Ppn, pa: &ParamAssignment, budget: usize) -> Result<(Ppn, FifoizeLog)> {
    fifoize_with(ppn, pa, budget, &SolverConfig::default())
}

pub fn fifoize_with(ppn: &Ppn, pa: &ParamAssignment, budget: usize, cfg: &SolverConfig) -> Result<(Ppn, FifoizeLog)> {
    let mut channels = Vec::with_capacity(ppn.channels().len());
    let mut log = FifoizeLog::default();
    for c in ppn.channels() {
        if let Some(reason) = skip_reason(ppn, c)? {
            channels.push(c.clone());
            log.channels.push(ChannelLog { id: c.id.clone(), action: Action::Skipped, reason: Some(reason), parts: Vec::new() });
            continue;
        }
        let (p, q) = ppn.endpoints(c)?;
        let n = p.tile_depth();
        let result = split_with(&c.dataflow, &p.schedule, &q.schedule, n, pa, cfg)?;
        let mut parts = Vec::with_capacity(n + 1);
        for (k, part) in result.parts.iter().enumerate() {
            let size = if result.nonempty_mask[k] { part.instantiate(pa)?.enumerate_pairs(budget)?.len() } else { 0 };
            // empty parts satisfy both predicates vacuously
            let class = if size == 0 {
                PatternClass::Fifo
            } else {
                classify_with(part, &p.schedule, &q.schedule, pa, cfg)?
            };
            parts.push(PartLog { suffix: part_suffix(k, n), class, size });
        }
        let live: Vec<usize> = (0..parts.len()).filter(|&k| parts[k].size > 0).collect();
        let all_fifo = parts.iter().all(|p| p.class.is_fifo());
        let (action, reason) = if !all_fifo {
            (Action::Kept, Some("a part is not a FIFO".to_string()))
        } else if live.len() < 2 {
            (Action::Kept, Some("a single nonempty part".to_string()))
        } else {
            (Action::Replaced, None)
        };
        if action == Action::Replaced {
            for &k in &live {
                channels.push(Channel {
                    id: format!("{}{}", c.id, parts[k].suffix),
                    producer: c.producer.clone(),
                    consumer: c.consumer.clone(),
                    dataflow: result.parts[k].clone(),
                });
            }
        } else {
            channels.push(c.clone());
        }
        log.channels.push(ChannelLog { id: c.id.clone(), action, reason, parts });
    }
    let out = ppn.rebuild(ppn.processes().to_vec(), channels)?;
    Ok((out, log))
}
