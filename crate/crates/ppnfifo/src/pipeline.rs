//! The analysis pipeline behind each subcommand.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use ppnfifo_core::oracle::build_trace;
use ppnfifo_core::patterns::{self, PatternClass};
use ppnfifo_core::ppn::{validate_at, Ppn, DEFAULT_BUDGET};
use ppnfifo_core::sizing::{max_live, round_size};
use ppnfifo_core::splitter::{self, Action};
use ppnfifo_core::tiling::{apply_tilings, ProcessTiling};
use ppnfifo_core::ParamAssignment;

use crate::error::{AppError, AppResult};
use crate::report::{percent, ChannelRow, Report, Row, Stage, LAYOUT_NOTE, SIZING_NOTE};

#[derive(Debug, Clone)]
pub struct Options {
    /// Enumeration budget for validation, sizing and the oracle.
    pub budget: usize,
    pub oracle: bool,
    /// Write one trace file per channel and stage here.
    pub dump_trace: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Options { budget: DEFAULT_BUDGET, oracle: true, dump_trace: None }
    }
}

/// Run the enumeration checks and turn the first failure into an error.
pub fn check_network(ppn: &Ppn, pa: &ParamAssignment, budget: usize) -> AppResult<()> {
    let report = validate_at(ppn, pa, budget)?;
    let failure = report.failures().next().map(|f| AppError::Invariant {
        invariant: f.invariant,
        subject: f.subject.clone(),
        witness: f.witness.clone().unwrap_or_default(),
    });
    failure.map_or(Ok(()), Err)
}

fn label_of(ppn: &Ppn) -> &'static str {
    if ppn.processes().iter().any(|p| p.tile_depth() > 0) {
        "tiled"
    } else {
        "untiled"
    }
}

/// Classify, size and optionally cross-check every channel.
pub fn analyze_stage(label: &str, ppn: &Ppn, pa: &ParamAssignment, opts: &Options) -> AppResult<Stage> {
    let mut channels = Vec::with_capacity(ppn.channels().len());
    for c in ppn.channels() {
        let (p, q) = ppn.endpoints(c)?;
        let (sp, sc) = (&p.schedule, &q.schedule);
        let in_order = patterns::in_order(&c.dataflow, sp, sc, pa)?;
        let unicity = patterns::unicity(&c.dataflow, pa)?;
        let raw = max_live(c, sp, sc, pa, opts.budget)? as u64;
        let (mut oracle_class, mut oracle_maxlive) = (None, None);
        if opts.oracle || opts.dump_trace.is_some() {
            let trace = build_trace(c, sp, sc, pa, opts.budget)?;
            if let Some(dir) = &opts.dump_trace {
                let path = dir.join(format!("{}.{}.trace.json", label, c.id));
                let text = serde_json::to_string(&trace).expect("trace serializes");
                fs::write(&path, text).map_err(|source| AppError::Io { path, source })?;
            }
            if opts.oracle {
                oracle_class = Some(trace.classify());
                oracle_maxlive = Some(trace.max_live() as u64);
            }
        }
        channels.push(ChannelRow {
            id: c.id.clone(),
            producer: c.producer.clone(),
            consumer: c.consumer.clone(),
            class: PatternClass::from_predicates(in_order, unicity),
            in_order,
            unicity,
            raw_maxlive: raw,
            rounded: round_size(raw),
            oracle_class,
            oracle_maxlive,
        });
    }
    channels.sort_by(|a, b| a.id.cmp(&b.id));

    let n_fifo = channels.iter().filter(|c| c.class.is_fifo()).count();
    let summary = Row {
        n_channels: channels.len(),
        n_fifo,
        pct_fifo: percent(n_fifo, channels.len()),
        n_fifo_split: None,
        pct_fifo_split: None,
        fifo_size: channels.iter().filter(|c| c.class.is_fifo()).map(|c| c.rounded).sum(),
        total_size: channels.iter().map(|c| c.rounded).sum(),
    };
    Ok(Stage { label: label.to_string(), summary, channels })
}

fn agreement(stages: &[&Stage], opts: &Options) -> Option<bool> {
    opts.oracle.then(|| {
        stages
            .iter()
            .flat_map(|s| &s.channels)
            .all(|c| c.oracle_agrees() == Some(true))
    })
}

/// Classify the network as given and, with a plan, after tiling.
pub fn analyze(ppn: &Ppn, plan: Option<&[ProcessTiling]>, given: &ParamAssignment, opts: &Options) -> AppResult<Report> {
    let pa = ppn.resolve_assignment(given)?;
    check_network(ppn, &pa, opts.budget)?;
    let before = analyze_stage(label_of(ppn), ppn, &pa, opts)?;
    let after = match plan {
        Some(plan) => {
            let tiled = apply_tilings(ppn, plan)?;
            Some(analyze_stage("tiled", &tiled, &pa, opts)?)
        }
        None => None,
    };
    let oracle_agreement = agreement(&[&before].into_iter().chain(after.as_ref()).collect::<Vec<_>>(), opts);
    Ok(Report {
        network: ppn.name.clone(),
        params: pa,
        tilings: plan.map(<[_]>::to_vec).unwrap_or_default(),
        before,
        after,
        fifoize: None,
        oracle_agreement,
        notes: vec![SIZING_NOTE.to_string()],
    })
}

/// Tile, split every channel that can be turned into FIFOs, and report
/// both networks. Returns the transformed network too.
pub fn fifoize(ppn: &Ppn, plan: &[ProcessTiling], given: &ParamAssignment, opts: &Options) -> AppResult<(Report, Ppn)> {
    let pa = ppn.resolve_assignment(given)?;
    check_network(ppn, &pa, opts.budget)?;
    let tiled = apply_tilings(ppn, plan)?;
    let (out, log) = splitter::fifoize(&tiled, &pa, opts.budget)?;
    let before = analyze_stage(label_of(&tiled), &tiled, &pa, opts)?;
    let mut after = analyze_stage("split", &out, &pa, opts)?;

    let actions: BTreeMap<&str, Action> = log.channels.iter().map(|e| (e.id.as_str(), e.action)).collect();
    let n_fifo_split = before
        .channels
        .iter()
        .filter(|c| c.class.is_fifo() || actions.get(c.id.as_str()) == Some(&Action::Replaced))
        .count();
    after.summary.n_fifo_split = Some(n_fifo_split);
    after.summary.pct_fifo_split = Some(percent(n_fifo_split, before.summary.n_channels));

    let oracle_agreement = agreement(&[&before, &after], opts);
    let report = Report {
        network: ppn.name.clone(),
        params: pa,
        tilings: plan.to_vec(),
        before,
        after: Some(after),
        fifoize: Some(log),
        oracle_agreement,
        notes: vec![SIZING_NOTE.to_string(), LAYOUT_NOTE.to_string()],
    };
    Ok((report, out))
}
