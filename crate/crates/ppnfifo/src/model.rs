//! JSON model files: networks and tiling plans.
//!
//! A network file looks like
//!
//! ```json
//! {
//!   "name": "jacobi1d",
//!   "params": [{ "name": "N", "min": 1, "default": 8 }],
//!   "processes": [
//!     { "name": "compute", "dims": ["t", "i"],
//!       "domain": "{ [t, i] : 1 <= t <= T and 1 <= i <= N }",
//!       "schedule": ["t", "i"] }
//!   ],
//!   "channels": [
//!     { "id": "c5", "producer": "compute", "consumer": "compute",
//!       "relation": "{ [t, i] -> [t', i'] : t' = t + 1 and i' = i }" }
//!   ]
//! }
//! ```
//!
//! Domain and relation strings may omit the parameter tuple; the network's
//! parameters are in scope everywhere. A tiling plan is a JSON array of
//! `{ "process", "normals", "sizes" }` entries.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ppnfifo_core::ppn::{Channel, ParamDecl, Ppn, Process, Schedule};
use ppnfifo_core::tiling::{ProcessTiling, Tiling};
use ppnfifo_core::{IntegerRelation, IntegerSet};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessEntry {
    pub name: String,
    pub dims: Vec<String>,
    pub domain: String,
    pub schedule: Vec<String>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub sequential: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiling: Option<Tiling>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub id: String,
    pub producer: String,
    pub consumer: String,
    pub relation: String,
}

/// On-disk form of a network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    #[serde(default)]
    pub params: Vec<ParamEntry>,
    pub processes: Vec<ProcessEntry>,
    pub channels: Vec<ChannelEntry>,
}

fn context<T>(what: &str, r: ppnfifo_core::Result<T>) -> AppResult<T> {
    r.map_err(|source| AppError::Model { what: what.to_string(), source })
}

impl ModelFile {
    /// Build and structurally validate the network.
    pub fn to_ppn(&self) -> AppResult<Ppn> {
        let names: Vec<String> = self.params.iter().map(|p| p.name.clone()).collect();
        let params = self
            .params
            .iter()
            .map(|p| ParamDecl { name: p.name.clone(), min: p.min, max: p.max, default: p.default })
            .collect();

        let mut processes = Vec::with_capacity(self.processes.len());
        for e in &self.processes {
            let what = format!("process `{}`", e.name);
            let domain = context(&what, IntegerSet::parse_with_params(&e.domain, &names))?;
            if domain.space().dims() != &e.dims[..] {
                return Err(AppError::Model {
                    what,
                    source: ppnfifo_core::Error::Validation(format!(
                        "domain dimensions {:?} differ from declared dims {:?}",
                        domain.space().dims(),
                        e.dims
                    )),
                });
            }
            let rows: Vec<&str> = e.schedule.iter().map(String::as_str).collect();
            let schedule = context(&what, Schedule::parse(e.name.clone(), domain.space().clone(), &rows))?
                .with_sequential(e.sequential);
            let mut p = context(&what, Process::new(e.name.clone(), domain, schedule))?;
            p.instance_label = e.label.clone();
            p.tiling = e.tiling.clone().filter(|t| t.depth() > 0);
            processes.push(p);
        }

        let mut channels = Vec::with_capacity(self.channels.len());
        for e in &self.channels {
            let what = format!("channel `{}`", e.id);
            let rel = context(&what, IntegerRelation::parse_with_params(&e.relation, &names))?;
            channels.push(Channel::new(e.id.clone(), e.producer.clone(), e.consumer.clone(), rel));
        }
        context("network", Ppn::new(self.name.clone(), params, processes, channels))
    }

    pub fn from_ppn(ppn: &Ppn) -> ModelFile {
        ModelFile {
            name: ppn.name.clone(),
            params: ppn
                .params()
                .iter()
                .map(|p| ParamEntry { name: p.name.clone(), min: p.min, max: p.max, default: p.default })
                .collect(),
            processes: ppn
                .processes()
                .iter()
                .map(|p| ProcessEntry {
                    name: p.name.clone(),
                    dims: p.dims().to_vec(),
                    domain: p.domain.to_string(),
                    schedule: p.schedule.row_strings(),
                    sequential: p.schedule.is_sequential(),
                    label: p.instance_label.clone(),
                    tiling: p.tiling.clone(),
                })
                .collect(),
            channels: ppn
                .channels()
                .iter()
                .map(|c| ChannelEntry {
                    id: c.id.clone(),
                    producer: c.producer.clone(),
                    consumer: c.consumer.clone(),
                    relation: c.dataflow.to_string(),
                })
                .collect(),
        }
    }
}

fn read(path: &Path) -> AppResult<String> {
    fs::read_to_string(path).map_err(|source| AppError::Io { path: path.to_path_buf(), source })
}

fn json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> AppResult<T> {
    serde_json::from_str(text).map_err(|source| AppError::Json { path: path.to_path_buf(), source })
}

pub fn parse_ppn(text: &str) -> AppResult<Ppn> {
    json::<ModelFile>(Path::new("<input>"), text)?.to_ppn()
}

pub fn load_ppn(path: &Path) -> AppResult<Ppn> {
    json::<ModelFile>(path, &read(path)?)?.to_ppn()
}

pub fn ppn_to_json(ppn: &Ppn) -> String {
    serde_json::to_string_pretty(&ModelFile::from_ppn(ppn)).expect("model serializes")
}

pub fn save_ppn(ppn: &Ppn, path: &Path) -> AppResult<()> {
    fs::write(path, ppn_to_json(ppn) + "\n").map_err(|source| AppError::Io { path: path.to_path_buf(), source })
}

pub fn load_tilings(path: &Path) -> AppResult<Vec<ProcessTiling>> {
    json(path, &read(path)?)
}
