#![allow(dead_code)]

use std::path::PathBuf;

use ppnfifo::model::{load_ppn, load_tilings};
use ppnfifo_core::ppn::Ppn;
use ppnfifo_core::tiling::ProcessTiling;
use ppnfifo_core::ParamAssignment;

pub const BUDGET: usize = 1_000_000;

pub fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

pub fn ppn(name: &str) -> Ppn {
    load_ppn(&model(&format!("{}.ppn.json", name))).unwrap()
}

pub fn plan(file: &str) -> Vec<ProcessTiling> {
    load_tilings(&model(file)).unwrap()
}

pub fn pa(pairs: &[(&str, i64)]) -> ParamAssignment {
    ParamAssignment::from_pairs(pairs.iter().copied())
}

/// Corpus kernels with their tiling file and two parameter assignments.
pub fn corpus() -> Vec<(&'static str, &'static str, [ParamAssignment; 2])> {
    vec![
        ("jacobi1d", "jacobi1d.tile2x2.json", [pa(&[("T", 8), ("N", 8)]), pa(&[("T", 6), ("N", 11)])]),
        ("gemm", "gemm.tile.json", [pa(&[("N", 4)]), pa(&[("N", 5)])]),
        ("seidel", "seidel.tile.json", [pa(&[("N", 6)]), pa(&[("N", 9)])]),
    ]
}

/// Every dataflow pair of the network in untiled coordinates, tagged with
/// its endpoints, sorted.
pub fn pair_multiset(ppn: &Ppn, pa: &ParamAssignment) -> Vec<(String, String, Vec<i64>, Vec<i64>)> {
    let mut out = Vec::new();
    for c in ppn.channels() {
        let (p, q) = ppn.endpoints(c).unwrap();
        for (x, y) in c.dataflow.instantiate(pa).unwrap().enumerate_pairs(BUDGET).unwrap() {
            out.push((
                c.producer.clone(),
                c.consumer.clone(),
                x[p.tile_depth()..].to_vec(),
                y[q.tile_depth()..].to_vec(),
            ));
        }
    }
    out.sort();
    out
}
