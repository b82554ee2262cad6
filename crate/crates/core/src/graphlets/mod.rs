//! Graphlet-based node features: static orbit counts (GDV), temporal event
//! graphlets (dynamic GDV) and graphlet-orbit transitions (GoT), each with an
//! exhaustive oracle for small inputs.
//!
//! Column naming, stable across runs:
//!
//! * static GDV: `o0`, `o1`, ... one column per orbit (`o0..o14` for 2..=4 nodes);
//! * dynamic GDV: `dg_<groups>` where groups are separated by `_`, simultaneous
//!   events inside a group by `+`, and each event is written as its two local
//!   node labels. The focal node is always `0`, e.g. `dg_01_12` is "focal node
//!   on an edge, followed in a later week by an edge between its partner and a
//!   third node";
//! * GoT: `got_<from>_<to>` over orbit labels plus `x` for a disconnected subset.

pub mod atlas;
mod dynamic;
mod got;
pub mod oracle;
mod static_gdv;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub use dynamic::{dynamic_gdv, DynamicGraphletConfig, DynamicTypes};
pub use got::{got, got_columns};
pub use static_gdv::static_gdv;

use crate::error::{Error, Result};
use crate::netmodel::{Graph, NodeId};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GdvKind {
    StaticGdv,
    DynamicGdv,
    Got,
}

/// Node x column matrix of non-negative counts, rows in node-universe order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GdvMatrix {
    pub kind: GdvKind,
    pub columns: Vec<String>,
    rows: usize,
    counts: Vec<u64>,
}

impl GdvMatrix {
    pub fn zeros(kind: GdvKind, columns: Vec<String>, rows: usize) -> Self {
        let counts = vec![0; rows * columns.len()];
        GdvMatrix {
            kind,
            columns,
            rows,
            counts,
        }
    }

    pub(crate) fn from_counts(kind: GdvKind, columns: Vec<String>, rows: usize, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), rows * columns.len());
        GdvMatrix {
            kind,
            columns,
            rows,
            counts,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, v: usize) -> &[u64] {
        let c = self.cols();
        &self.counts[v * c..(v + 1) * c]
    }

    pub fn get(&self, v: usize, col: usize) -> u64 {
        self.counts[v * self.cols() + col]
    }

    pub(crate) fn add(&mut self, v: usize, col: usize, by: u64) {
        let c = self.cols();
        self.counts[v * c + col] += by;
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.cols()];
        for v in 0..self.rows {
            for (s, &x) in sums.iter_mut().zip(self.row(v)) {
                *s += x;
            }
        }
        sums
    }

    /// Writes `node_id,<columns...>` followed by one row per node.
    pub fn write_csv(&self, path: impl AsRef<Path>, nodes: &[NodeId]) -> Result<()> {
        let path = path.as_ref();
        assert_eq!(nodes.len(), self.rows);
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        let mut write = || -> std::io::Result<()> {
            write!(out, "node_id")?;
            for c in &self.columns {
                write!(out, ",{c}")?;
            }
            writeln!(out)?;
            for (v, id) in nodes.iter().enumerate() {
                write!(out, "{id}")?;
                for x in self.row(v) {
                    write!(out, ",{x}")?;
                }
                writeln!(out)?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

/// Graphlet degree centrality: `sum_o ln(count_o + 1)` with uniform orbit weights.
pub fn gdc<T: Real>(gdv_row: &[u64]) -> T {
    gdv_row
        .iter()
        .map(|&c| T::of(c as f64).ln_1p())
        .sum()
}

/// Adjacency lookup backed by a bit matrix when the graph is small enough,
/// falling back to binary search on the sorted neighbour lists.
pub(crate) struct Adjacency<'a> {
    g: &'a Graph,
    words: usize,
    bits: Vec<u64>,
}

const DENSE_LIMIT: usize = 1 << 14;

impl<'a> Adjacency<'a> {
    pub(crate) fn new(g: &'a Graph) -> Self {
        let n = g.node_count();
        if n > DENSE_LIMIT {
            return Adjacency { g, words: 0, bits: Vec::new() };
        }
        let words = n.div_ceil(64);
        let mut bits = vec![0u64; n * words];
        for &(u, v) in g.edges() {
            bits[u * words + v / 64] |= 1 << (v % 64);
            bits[v * words + u / 64] |= 1 << (u % 64);
        }
        Adjacency { g, words, bits }
    }

    #[inline]
    pub(crate) fn has(&self, u: usize, v: usize) -> bool {
        if self.words == 0 {
            return self.g.has_edge(u, v);
        }
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub(crate) fn neighbors(&self, v: usize) -> &'a [usize] {
        self.g.neighbors(v)
    }
}

/// Calls `visit` once for every connected node subset of size `1..=max_size`
/// whose smallest node is `root` (ESU enumeration).
pub(crate) fn for_each_connected_subset(
    adj: &Adjacency,
    root: usize,
    max_size: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    let mut sub = vec![root];
    let ext: Vec<usize> = adj.neighbors(root).iter().copied().filter(|&u| u > root).collect();
    extend_subset(adj, root, max_size, &mut sub, ext, visit);
}

fn extend_subset(
    adj: &Adjacency,
    root: usize,
    max_size: usize,
    sub: &mut Vec<usize>,
    mut ext: Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    visit(sub);
    if sub.len() == max_size {
        return;
    }
    if sub.len() + 1 == max_size {
        for &w in &ext {
            sub.push(w);
            visit(sub);
            sub.pop();
        }
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in adj.neighbors(w) {
            // exclusive neighbourhood: not in the subset and not adjacent to it
            if u > root && !sub.contains(&u) && !sub.iter().any(|&s| adj.has(s, u)) {
                next.push(u);
            }
        }
        sub.push(w);
        extend_subset(adj, root, max_size, sub, next, visit);
        sub.pop();
    }
}

/// Bitmask of the subgraph induced on `nodes`, in local pair order.
#[inline]
pub(crate) fn induced_mask(adj: &Adjacency, nodes: &[usize]) -> u32 {
    let mut mask = 0;
    for j in 1..nodes.len() {
        for i in 0..j {
            if adj.has(nodes[i], nodes[j]) {
                mask |= atlas::pair_bit(i, j);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gdc_values() {
        assert_eq!(gdc::<f64>(&[0; 15]), 0.0);
        let mut v = [0u64; 15];
        v[0] = 1;
        assert!((gdc::<f64>(&v) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((gdc::<f32>(&v) - std::f32::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn gdc_is_monotone() {
        let a = [1u64, 0, 3, 2];
        let b = [1u64, 5, 3, 9];
        assert!(gdc::<f64>(&a) <= gdc::<f64>(&b));
    }

    #[test]
    fn esu_visits_each_connected_subset_once() {
        // 4-cycle plus chord: count connected subsets by brute force
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4)]);
        let adj = Adjacency::new(&g);
        let mut seen = std::collections::BTreeSet::new();
        let mut visits = 0;
        for r in 0..5 {
            for_each_connected_subset(&adj, r, 4, &mut |s: &[usize]| {
                visits += 1;
                let mut s = s.to_vec();
                s.sort_unstable();
                assert!(seen.insert(s));
            });
        }
        let mut expect = 0;
        for m in 1u32..32 {
            let nodes: Vec<usize> = (0..5).filter(|&i| m & (1 << i) != 0).collect();
            if nodes.len() <= 4 && atlas::is_connected(induced_mask(&adj, &nodes), nodes.len()) {
                expect += 1;
            }
        }
        assert_eq!(visits, expect);
    }
}
