//! Eight node centralities per snapshot and their conversion to within-snapshot ranks.
//!
//! All measures are oriented so that a larger value means a more central
//! node, and an isolated node scores 0 on every measure:
//!
//! * eccentricity is the reciprocal of the largest geodesic distance inside
//!   the node's component;
//! * closeness is component-normalized, `(r / (N - 1)) * (r / sum d)` over the
//!   `r` reachable nodes;
//! * betweenness counts shortest paths through the node, divided by the
//!   number of node pairs excluding it, `(N - 1)(N - 2) / 2`;
//! * eigenvector centrality is the principal eigenvector of the whole
//!   adjacency matrix, found by power iteration on `A + I` (the shift keeps
//!   bipartite components from oscillating without changing eigenvectors).

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphlets::{gdc, static_gdv, GdvMatrix};
use crate::netmodel::{DynamicNetwork, Graph, NodeId};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityMeasure {
    Eccentricity,
    Closeness,
    Betweenness,
    Eigenvector,
    KCoreness,
    ClusteringCoefficient,
    Degree,
    GraphletDegreeCentrality,
}

impl CentralityMeasure {
    pub const ALL: [CentralityMeasure; 8] = [
        CentralityMeasure::Eccentricity,
        CentralityMeasure::Closeness,
        CentralityMeasure::Betweenness,
        CentralityMeasure::Eigenvector,
        CentralityMeasure::KCoreness,
        CentralityMeasure::ClusteringCoefficient,
        CentralityMeasure::Degree,
        CentralityMeasure::GraphletDegreeCentrality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CentralityMeasure::Eccentricity => "eccentricity",
            CentralityMeasure::Closeness => "closeness",
            CentralityMeasure::Betweenness => "betweenness",
            CentralityMeasure::Eigenvector => "eigenvector",
            CentralityMeasure::KCoreness => "k_coreness",
            CentralityMeasure::ClusteringCoefficient => "clustering_coefficient",
            CentralityMeasure::Degree => "degree",
            CentralityMeasure::GraphletDegreeCentrality => "graphlet_degree_centrality",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for CentralityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Graphlet size used by the graphlet degree centrality unless configured otherwise.
pub const DEFAULT_GRAPHLET_SIZE: usize = 4;

/// Raw centrality of every node, using 2..=4-node graphlets for the graphlet degree centrality.
pub fn compute_centrality<T: Real>(measure: CentralityMeasure, g: &Graph) -> Vec<T> {
    compute_centrality_with(measure, g, DEFAULT_GRAPHLET_SIZE)
}

pub fn compute_centrality_with<T: Real>(
    measure: CentralityMeasure,
    g: &Graph,
    graphlet_size: usize,
) -> Vec<T> {
    match measure {
        CentralityMeasure::Degree => (0..g.node_count()).map(|v| T::of_usize(g.degree(v))).collect(),
        CentralityMeasure::ClusteringCoefficient => clustering(g),
        CentralityMeasure::KCoreness => core_numbers(g).into_iter().map(T::of_usize).collect(),
        CentralityMeasure::Eccentricity => eccentricity(g),
        CentralityMeasure::Closeness => closeness(g),
        CentralityMeasure::Betweenness => betweenness(g),
        CentralityMeasure::Eigenvector => eigenvector(g),
        CentralityMeasure::GraphletDegreeCentrality => {
            let m = static_gdv(g, graphlet_size).expect("graphlet size validated by caller");
            (0..g.node_count()).map(|v| gdc(m.row(v))).collect()
        }
    }
}

fn clustering<T: Real>(g: &Graph) -> Vec<T> {
    (0..g.node_count())
        .map(|v| {
            let nb = g.neighbors(v);
            let d = nb.len();
            if d < 2 {
                return T::zero();
            }
            let mut closed = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if g.has_edge(a, b) {
                        closed += 1;
                    }
                }
            }
            T::of_usize(closed) / T::of_usize(d * (d - 1) / 2)
        })
        .collect()
}

/// Core number of every node (Batagelj-Zaversnik bucket algorithm).
pub fn core_numbers(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let maxd = deg.iter().copied().max().unwrap_or(0);
    let mut bin = vec![0usize; maxd + 1];
    for &d in &deg {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let c = *b;
        *b = start;
        start += c;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        bin[deg[v]] += 1;
    }
    for d in (1..=maxd).rev() {
        bin[d] = bin[d - 1];
    }
    if maxd > 0 || n > 0 {
        bin[0] = 0;
    }
    for i in 0..n {
        let v = vert[i];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// BFS distances from `s`; unreachable nodes get `usize::MAX`.
fn bfs(g: &Graph, s: usize, dist: &mut [usize], queue: &mut VecDeque<usize>) {
    dist.fill(usize::MAX);
    dist[s] = 0;
    queue.clear();
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
}

fn eccentricity<T: Real>(g: &Graph) -> Vec<T> {
    let n = g.node_count();
    let mut dist = vec![0; n];
    let mut queue = VecDeque::new();
    (0..n)
        .map(|v| {
            bfs(g, v, &mut dist, &mut queue);
            let ecc = dist.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
            if ecc == 0 {
                T::zero()
            } else {
                T::one() / T::of_usize(ecc)
            }
        })
        .collect()
}

fn closeness<T: Real>(g: &Graph) -> Vec<T> {
    let n = g.node_count();
    let mut dist = vec![0; n];
    let mut queue = VecDeque::new();
    (0..n)
        .map(|v| {
            bfs(g, v, &mut dist, &mut queue);
            let (r, total) = dist
                .iter()
                .filter(|&&d| d != usize::MAX && d > 0)
                .fold((0usize, 0usize), |(r, t), &d| (r + 1, t + d));
            if r == 0 {
                return T::zero();
            }
            let r_t = T::of_usize(r);
            (r_t / T::of_usize(n - 1)) * (r_t / T::of_usize(total))
        })
        .collect()
}

/// Brandes shortest-path betweenness, normalized by the number of pairs not containing the node.
fn betweenness<T: Real>(g: &Graph) -> Vec<T> {
    let n = g.node_count();
    let mut cb = vec![T::zero(); n];
    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![T::zero(); n];
    let mut delta = vec![T::zero(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        if g.degree(s) == 0 {
            continue;
        }
        dist.fill(usize::MAX);
        sigma.fill(T::zero());
        delta.fill(T::zero());
        order.clear();
        dist[s] = 0;
        sigma[s] = T::one();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if dist[v] == dist[u] + 1 {
                    sigma[v] = sigma[v] + sigma[u];
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in g.neighbors(w) {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] = delta[v] + sigma[v] / sigma[w] * (T::one() + delta[w]);
                }
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    // each unordered pair was counted from both ends
    let two = T::of(2.0);
    let pairs = if n > 2 {
        T::of_usize((n - 1) * (n - 2)) / two
    } else {
        T::one()
    };
    cb.into_iter().map(|c| c / two / pairs).collect()
}

pub(crate) const EIGEN_MAX_ITER: usize = 10_000;

fn eigenvector<T: Real>(g: &Graph) -> Vec<T> {
    let n = g.node_count();
    let active: Vec<bool> = (0..n).map(|v| g.degree(v) > 0).collect();
    let m = active.iter().filter(|&&a| a).count();
    if m == 0 {
        return vec![T::zero(); n];
    }
    let tol = T::of(1e-10).max(T::epsilon() * T::of(16.0));
    let init = T::one() / T::of_usize(m).sqrt();
    let mut x: Vec<T> = active.iter().map(|&a| if a { init } else { T::zero() }).collect();
    let mut next = vec![T::zero(); n];
    for _ in 0..EIGEN_MAX_ITER {
        for v in 0..n {
            next[v] = if active[v] {
                x[v] + g.neighbors(v).iter().map(|&u| x[u]).sum::<T>()
            } else {
                T::zero()
            };
        }
        let norm = next.iter().map(|&a| a * a).sum::<T>().sqrt();
        for a in next.iter_mut() {
            *a /= norm;
        }
        let diff = x
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        std::mem::swap(&mut x, &mut next);
        if diff < tol {
            break;
        }
    }
    x
}

/// Ascending ranks `1..=N`; exactly equal values share the average of the ranks they span.
pub fn to_ranks<T: Real>(values: &[T]) -> Vec<T> {
    rank_with(values, |a, b| a == b)
}

/// Like [`to_ranks`], but values within `rel_tol` (relative to the larger
/// magnitude, or absolute below 1) of their sorted predecessor count as tied.
/// Used so floating-point noise between structurally equivalent nodes does
/// not break ties.
pub fn to_ranks_tolerant<T: Real>(values: &[T], rel_tol: T) -> Vec<T> {
    rank_with(values, |a, b| {
        (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(T::one())
    })
}

fn rank_with<T: Real>(values: &[T], tied: impl Fn(T, T) -> bool) -> Vec<T> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("centrality values are finite")
            .then(a.cmp(&b))
    });
    let mut ranks = vec![T::zero(); n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && tied(values[order[j - 1]], values[order[j]]) {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = T::of_usize(i + 1 + j) / T::of(2.0);
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Relative tolerance used when ranking raw centralities.
pub fn rank_tolerance<T: Real>() -> T {
    T::epsilon() * T::of(1024.0)
}

/// Node x week matrix of centrality ranks for one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityProfile<T> {
    pub measure: CentralityMeasure,
    nodes: usize,
    weeks: usize,
    ranks: Vec<T>,
}

impl<T: Real> CentralityProfile<T> {
    pub fn from_columns(measure: CentralityMeasure, columns: Vec<Vec<T>>) -> Self {
        let weeks = columns.len();
        let nodes = columns.first().map_or(0, Vec::len);
        let mut ranks = vec![T::zero(); nodes * weeks];
        for (w, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), nodes);
            for (v, &r) in col.iter().enumerate() {
                ranks[v * weeks + w] = r;
            }
        }
        CentralityProfile {
            measure,
            nodes,
            weeks,
            ranks,
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn weeks(&self) -> usize {
        self.weeks
    }

    /// Rank series of node `v` over the weeks.
    pub fn row(&self, v: usize) -> &[T] {
        &self.ranks[v * self.weeks..(v + 1) * self.weeks]
    }

    pub fn rank(&self, v: usize, week: usize) -> T {
        self.ranks[v * self.weeks + week]
    }

    pub fn column(&self, week: usize) -> Vec<T> {
        (0..self.nodes).map(|v| self.rank(v, week)).collect()
    }

    /// Rows `node_id,week_0..week_{W-1}`.
    pub fn write_csv(&self, path: impl AsRef<Path>, ids: &[NodeId]) -> Result<()> {
        let path = path.as_ref();
        assert_eq!(ids.len(), self.nodes);
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        let mut write = || -> std::io::Result<()> {
            write!(out, "node_id")?;
            for w in 0..self.weeks {
                write!(out, ",week_{w}")?;
            }
            writeln!(out)?;
            for (v, id) in ids.iter().enumerate() {
                write!(out, "{id}")?;
                for r in self.row(v) {
                    write!(out, ",{r}")?;
                }
                writeln!(out)?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }
}

pub fn centrality_profile<T: Real>(
    d: &DynamicNetwork,
    measure: CentralityMeasure,
    graphlet_size: usize,
) -> Result<CentralityProfile<T>> {
    check_graphlet_size(graphlet_size)?;
    let columns = d
        .snapshots()
        .par_iter()
        .map(|s| ranked(measure, &s.graph, graphlet_size))
        .collect();
    Ok(CentralityProfile::from_columns(measure, columns))
}

/// Profiles for all eight measures, computed over the whole (measure, week) grid in parallel.
pub fn all_profiles<T: Real>(d: &DynamicNetwork, graphlet_size: usize) -> Result<Vec<CentralityProfile<T>>> {
    check_graphlet_size(graphlet_size)?;
    let w = d.num_weeks();
    let cells: Vec<Vec<T>> = (0..CentralityMeasure::ALL.len() * w)
        .into_par_iter()
        .map(|i| {
            let measure = CentralityMeasure::ALL[i / w];
            ranked(measure, &d.snapshots()[i % w].graph, graphlet_size)
        })
        .collect();
    let mut cells = cells.into_iter();
    Ok(CentralityMeasure::ALL
        .iter()
        .map(|&m| CentralityProfile::from_columns(m, cells.by_ref().take(w).collect()))
        .collect())
}

/// Ranks of every node on the given graph for all eight measures, measure-major.
pub fn static_ranks<T: Real>(g: &Graph, graphlet_size: usize) -> Result<Vec<Vec<T>>> {
    check_graphlet_size(graphlet_size)?;
    Ok(CentralityMeasure::ALL
        .par_iter()
        .map(|&m| ranked(m, g, graphlet_size))
        .collect())
}

/// Same as [`static_ranks`], taking the graphlet degree centrality from an
/// already computed orbit count matrix of `g`.
pub fn static_ranks_with_gdv<T: Real>(g: &Graph, gdv: &GdvMatrix) -> Result<Vec<Vec<T>>> {
    if gdv.rows() != g.node_count() {
        return Err(Error::invalid(format!(
            "orbit count matrix has {} rows for a graph of {} nodes",
            gdv.rows(),
            g.node_count()
        )));
    }
    Ok(CentralityMeasure::ALL
        .par_iter()
        .map(|&m| match m {
            CentralityMeasure::GraphletDegreeCentrality => {
                let raw: Vec<T> = (0..g.node_count()).map(|v| gdc(gdv.row(v))).collect();
                to_ranks_tolerant(&raw, rank_tolerance())
            }
            _ => ranked(m, g, DEFAULT_GRAPHLET_SIZE),
        })
        .collect())
}

fn ranked<T: Real>(measure: CentralityMeasure, g: &Graph, graphlet_size: usize) -> Vec<T> {
    let raw = compute_centrality_with::<T>(measure, g, graphlet_size);
    to_ranks_tolerant(&raw, rank_tolerance())
}

fn check_graphlet_size(size: usize) -> Result<()> {
    if !(4..=5).contains(&size) {
        return Err(Error::invalid(format!("graphlet size must be 4 or 5, got {size}")));
    }
    Ok(())
}
