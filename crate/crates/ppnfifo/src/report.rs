//! Report types and their text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use ppnfifo_core::patterns::PatternClass;
use ppnfifo_core::sizing::delta_percent;
use ppnfifo_core::splitter::{Action, FifoizeLog};
use ppnfifo_core::tiling::ProcessTiling;
use ppnfifo_core::ParamAssignment;

use crate::error::{AppError, AppResult};

/// Integer percentage truncated toward zero; 0 when `whole` is 0.
pub fn percent(part: usize, whole: usize) -> u32 {
    if whole == 0 {
        0
    } else {
        (part * 100 / whole) as u32
    }
}

/// Summary of one network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub n_channels: usize,
    pub n_fifo: usize,
    pub pct_fifo: u32,
    /// Original channels that are FIFOs once split (after rows only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_fifo_split: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pct_fifo_split: Option<u32>,
    pub fifo_size: u64,
    pub total_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRow {
    pub id: String,
    pub producer: String,
    pub consumer: String,
    pub class: PatternClass,
    pub in_order: bool,
    pub unicity: bool,
    pub raw_maxlive: u64,
    pub rounded: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_class: Option<PatternClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_maxlive: Option<u64>,
}

impl ChannelRow {
    /// Whether the oracle columns, when present, match the symbolic ones.
    pub fn oracle_agrees(&self) -> Option<bool> {
        match (self.oracle_class, self.oracle_maxlive) {
            (Some(c), Some(m)) => Some(c == self.class && m == self.raw_maxlive),
            _ => None,
        }
    }
}

/// One analysed network: `untiled`, `tiled` or `split`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    pub summary: Row,
    pub channels: Vec<ChannelRow>,
}

impl Stage {
    pub fn channel(&self, id: &str) -> Option<&ChannelRow> {
        self.channels.iter().find(|c| c.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub network: String,
    pub params: ParamAssignment,
    #[serde(default)]
    pub tilings: Vec<ProcessTiling>,
    pub before: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<Stage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fifoize: Option<FifoizeLog>,
    /// Absent when the cross-check was not run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_agreement: Option<bool>,
    #[serde(default)]
    pub notes: Vec<String>,
}

pub const SIZING_NOTE: &str = "sizes are peak live values under the shared schedule, rounded up to the next power of two \
per channel; other sizing heuristics can give different totals";

pub const LAYOUT_NOTE: &str = "#fifo-split and %fifo-split describe the split network and are stored with the after row";

impl Report {
    pub fn stages(&self) -> impl Iterator<Item = &Stage> {
        std::iter::once(&self.before).chain(self.after.as_ref())
    }

    pub fn stage(&self, label: &str) -> Option<&Stage> {
        self.stages().find(|s| s.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "network {}  params {}", self.network, self.params);
        for t in &self.tilings {
            let _ = writeln!(out, "tiling {}: normals {:?} sizes {:?}", t.process, t.tiling.normals(), t.tiling.sizes());
        }
        out.push('\n');
        out.push_str(&self.summary_table());
        for s in self.stages() {
            let _ = writeln!(out, "\nchannels ({})", s.label);
            out.push_str(&channel_table(s));
        }
        if let Some(log) = &self.fifoize {
            out.push_str("\nfifoize\n");
            for e in &log.channels {
                let action = match e.action {
                    Action::Replaced => "replaced",
                    Action::Kept => "kept",
                    Action::Skipped => "skipped",
                };
                let _ = write!(out, "  {:<10} {}", e.id, action);
                if e.action == Action::Replaced {
                    let parts: Vec<String> = e
                        .parts
                        .iter()
                        .filter(|p| p.size > 0)
                        .map(|p| format!("{}{}", e.id, p.suffix))
                        .collect();
                    let _ = write!(out, " by {}", parts.join(" "));
                }
                if let Some(r) = &e.reason {
                    let _ = write!(out, " ({})", r);
                }
                out.push('\n');
            }
        }
        let oracle = match self.oracle_agreement {
            Some(true) => "agrees",
            Some(false) => "DISAGREES",
            None => "not run",
        };
        let _ = writeln!(out, "\noracle: {}", oracle);
        for n in &self.notes {
            let _ = writeln!(out, "note: {}", n);
        }
        out
    }

    /// The one-line summary in the before/after column layout.
    pub fn summary_table(&self) -> String {
        let before = [
            "#channel",
            "#fifo",
            "#fifo-split",
            "%fifo",
            "%fifo-split",
            "fifo-size",
            "total-size",
        ];
        let after = ["#channel", "#fifo", "fifo-size", "total-size"];
        let b = &self.before.summary;
        let split = self.after.as_ref().map(|a| &a.summary);
        let dash = || "-".to_string();
        let mut cells = vec![
            b.n_channels.to_string(),
            b.n_fifo.to_string(),
            split.and_then(|a| a.n_fifo_split).map_or_else(dash, |n| n.to_string()),
            format!("{}%", b.pct_fifo),
            split.and_then(|a| a.pct_fifo_split).map_or_else(dash, |p| format!("{}%", p)),
            b.fifo_size.to_string(),
            b.total_size.to_string(),
        ];
        match split {
            Some(a) => cells.extend([
                a.n_channels.to_string(),
                a.n_fifo.to_string(),
                a.fifo_size.to_string(),
                a.total_size.to_string(),
            ]),
            None => cells.extend((0..4).map(|_| dash())),
        }
        let mut header = vec!["kernel"];
        header.extend(before);
        header.extend(after);
        let mut body = vec![self.network.clone()];
        body.extend(cells);

        let widths: Vec<usize> = header.iter().zip(&body).map(|(h, c)| h.len().max(c.len())).collect();
        let line = |cols: Vec<&str>| {
            let mut s = String::new();
            for (k, (c, w)) in cols.iter().zip(&widths).enumerate() {
                if k == 8 {
                    s.push_str(" |");
                }
                if k > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{:<w$}", c, w = *w);
            }
            s.trim_end().to_string() + "\n"
        };
        let before_w: usize = widths[1..8].iter().sum::<usize>() + 2 * 6;
        let mut out = format!(
            "{:<kw$}  {:<bw$} |  {}\n",
            "",
            format!("before ({})", self.before.label),
            self.after.as_ref().map_or("after".to_string(), |a| format!("after ({})", a.label)),
            kw = widths[0],
            bw = before_w
        );
        out.push_str(&line(header));
        out.push_str(&line(body.iter().map(String::as_str).collect()));
        out
    }
}

fn channel_table(s: &Stage) -> String {
    let mut rows: Vec<Vec<String>> = vec![["id", "producer", "consumer", "class", "maxlive", "size", "oracle"]
        .iter()
        .map(|h| h.to_string())
        .collect()];
    for c in &s.channels {
        let oracle = match c.oracle_agrees() {
            Some(true) => "ok".to_string(),
            Some(false) => format!(
                "{} / {}",
                c.oracle_class.map_or("?", PatternClass::as_str),
                c.oracle_maxlive.map_or("?".to_string(), |m| m.to_string())
            ),
            None => "-".to_string(),
        };
        rows.push(vec![
            c.id.clone(),
            c.producer.clone(),
            c.consumer.clone(),
            c.class.as_str().to_string(),
            c.raw_maxlive.to_string(),
            c.rounded.to_string(),
            oracle,
        ]);
    }
    let widths: Vec<usize> = (0..7).map(|k| rows.iter().map(|r| r[k].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::from(" ");
        for (c, w) in r.iter().zip(&widths) {
            let _ = write!(line, " {:<w$}", c, w = *w);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Size of the channels fifoize replaced, before and after splitting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub network: String,
    pub size_fifo_fail: u64,
    pub size_fifo_split: u64,
    /// Percent change, absent when `size_fifo_fail` is 0.
    pub delta: Option<i64>,
}

impl DeltaRow {
    pub fn new(network: impl Into<String>, fail: u64, split: u64) -> Self {
        DeltaRow { network: network.into(), size_fifo_fail: fail, size_fifo_split: split, delta: delta_percent(fail, split) }
    }

    /// `-44%`, or empty when undefined.
    pub fn delta_text(&self) -> String {
        self.delta.map_or_else(String::new, |d| format!("{}%", d))
    }

    pub fn to_text(&self) -> String {
        let header = ["kernel", "size-fifo-fail", "size-fifo-split", "delta"];
        let cells = [
            self.network.clone(),
            self.size_fifo_fail.to_string(),
            self.size_fifo_split.to_string(),
            self.delta_text(),
        ];
        let widths: Vec<usize> = header.iter().zip(&cells).map(|(h, c)| h.len().max(c.len())).collect();
        let mut out = String::new();
        for row in [header.map(String::from), cells.clone()] {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{:<w$}", c, w = *w)).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Compare the replaced channels of `split` (a fifoize report) against
/// their sizes in the tiled network of `original`.
pub fn report_delta(original: &Report, split: &Report) -> AppResult<DeltaRow> {
    if original.network != split.network {
        return Err(AppError::MismatchedReports(format!(
            "networks `{}` and `{}`",
            original.network, split.network
        )));
    }
    if original.params != split.params {
        return Err(AppError::MismatchedReports(format!(
            "parameters {} and {}",
            original.params, split.params
        )));
    }
    if original.tilings != split.tilings {
        return Err(AppError::MismatchedReports("tilings differ".into()));
    }
    let log = split
        .fifoize
        .as_ref()
        .ok_or_else(|| AppError::MismatchedReports("second report has no fifoize log".into()))?;
    let after = split
        .after
        .as_ref()
        .ok_or_else(|| AppError::MismatchedReports("second report has no split network".into()))?;
    let tiled = original
        .stage("tiled")
        .ok_or_else(|| AppError::MismatchedReports("first report has no tiled network".into()))?;

    let (mut fail, mut done) = (0u64, 0u64);
    for e in log.channels.iter().filter(|e| e.action == Action::Replaced) {
        let orig = tiled
            .channel(&e.id)
            .ok_or_else(|| AppError::MismatchedReports(format!("channel `{}` missing from first report", e.id)))?;
        fail += orig.rounded;
        for p in e.parts.iter().filter(|p| p.size > 0) {
            let id = format!("{}{}", e.id, p.suffix);
            let part = after
                .channel(&id)
                .ok_or_else(|| AppError::MismatchedReports(format!("channel `{}` missing from second report", id)))?;
            done += part.rounded;
        }
    }
    Ok(DeltaRow::new(original.network.clone(), fail, done))
}
