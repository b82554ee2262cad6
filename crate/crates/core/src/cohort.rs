//! Trait-group comparisons of centrality magnitude and fluctuation, k-medoids
//! clustering of rank profiles, and hypergeometric enrichment of clusters.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centrality::{CentralityMeasure, CentralityProfile};
use crate::error::{Error, Result};
use crate::netmodel::{Cohort, NodeId};
use crate::scalar::{mean, sample_sd, Real};
use crate::stats::{
    adjust_all, coefficient_of_variation, hypergeom_enrichment, wilcoxon_rank_sum, TestResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Magnitude,
    Fluctuation,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Magnitude => "magnitude",
            Quantity::Fluctuation => "fluctuation",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupPair<T> {
    pub positive: T,
    pub negative: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison<T> {
    pub measure: CentralityMeasure,
    pub quantity: Quantity,
    pub group_sizes: GroupPair<usize>,
    pub group_means: GroupPair<T>,
    pub group_sds: GroupPair<T>,
    pub test: TestResult<T>,
}

/// Per-node mean rank over the weeks, positive vs. negative, one rank-sum test per measure.
pub fn compare_magnitude<T: Real>(
    profiles: &[CentralityProfile<T>],
    cohort: &Cohort,
) -> Result<Vec<GroupComparison<T>>> {
    compare(profiles, cohort, Quantity::Magnitude, |row| Ok(mean(row)))
}

/// Per-node coefficient of variation of the weekly ranks, one rank-sum test per measure.
pub fn compare_fluctuation<T: Real>(
    profiles: &[CentralityProfile<T>],
    cohort: &Cohort,
) -> Result<Vec<GroupComparison<T>>> {
    compare(profiles, cohort, Quantity::Fluctuation, coefficient_of_variation)
}

fn compare<T: Real>(
    profiles: &[CentralityProfile<T>],
    cohort: &Cohort,
    quantity: Quantity,
    summarize: impl Fn(&[T]) -> Result<T>,
) -> Result<Vec<GroupComparison<T>>> {
    let positives = cohort.positives();
    if positives == 0 || positives == cohort.len() {
        return Err(Error::invalid(format!(
            "trait {} needs labeled nodes in both groups ({positives} of {} positive)",
            cohort.trait_,
            cohort.len()
        )));
    }
    let mut out = Vec::with_capacity(profiles.len());
    for p in profiles {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (&v, &label) in cohort.indices.iter().zip(&cohort.labels) {
            let s = summarize(p.row(v))?;
            if label {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
        out.push(GroupComparison {
            measure: p.measure,
            quantity,
            group_sizes: GroupPair {
                positive: pos.len(),
                negative: neg.len(),
            },
            group_means: GroupPair {
                positive: mean(&pos),
                negative: mean(&neg),
            },
            group_sds: GroupPair {
                positive: sample_sd(&pos),
                negative: sample_sd(&neg),
            },
            test: wilcoxon_rank_sum(&pos, &neg)?,
        });
    }
    adjust_all(&mut out.iter_mut().map(|c| &mut c.test).collect::<Vec<_>>());
    Ok(out)
}

/// Rows of `profile` for the cohort, in cohort order.
pub fn profile_points<T: Real>(profile: &CentralityProfile<T>, cohort: &Cohort) -> Vec<Vec<T>> {
    cohort.indices.iter().map(|&v| profile.row(v).to_vec()).collect()
}

/// Concatenation of every profile's row for each cohort node.
pub fn concatenated_points<T: Real>(profiles: &[CentralityProfile<T>], cohort: &Cohort) -> Vec<Vec<T>> {
    cohort
        .indices
        .iter()
        .map(|&v| profiles.iter().flat_map(|p| p.row(v).iter().copied()).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering<T> {
    /// `None` for the concatenated-measure mode.
    pub measure: Option<CentralityMeasure>,
    pub k: usize,
    pub ids: Vec<NodeId>,
    /// Cluster of each point, `0..k`, with cluster 0 the least central.
    pub assignment: Vec<usize>,
    /// Point index of each cluster's medoid.
    pub medoids: Vec<usize>,
    pub cost: T,
    /// Total cost after each assignment step, starting with the seeding.
    pub cost_history: Vec<T>,
}

impl<T: Real> Clustering<T> {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }

    pub fn medoid_ids(&self) -> Vec<&NodeId> {
        self.medoids.iter().map(|&m| &self.ids[m]).collect()
    }
}

pub const KMEDOIDS_MAX_ITER: usize = 100;
const KMEDOIDS_TOL: f64 = 1e-12;

fn euclidean<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// Nearest medoid of every point; a medoid always stays in its own cluster.
fn assign<T: Real>(dist: &[Vec<T>], medoids: &[usize]) -> (Vec<usize>, T) {
    let mut cost = T::zero();
    let assignment = (0..dist.len())
        .map(|i| {
            if let Some(c) = medoids.iter().position(|&m| m == i) {
                return c;
            }
            let mut best = 0;
            for c in 1..medoids.len() {
                if dist[i][medoids[c]] < dist[i][medoids[best]] {
                    best = c;
                }
            }
            cost += dist[i][medoids[best]];
            best
        })
        .collect();
    (assignment, cost)
}

/// Alternating k-medoids under Euclidean distance.
///
/// The first medoid is drawn from `seed`, the rest by greedy farthest-point
/// seeding; then assignment and per-cluster medoid updates alternate until
/// the cost changes by less than 1e-12 or 100 iterations pass. Clusters are
/// returned ordered by ascending mean coordinate of their members.
pub fn kmedoids<T: Real>(
    ids: &[NodeId],
    points: &[Vec<T>],
    k: usize,
    seed: u64,
    measure: Option<CentralityMeasure>,
) -> Result<Clustering<T>> {
    let n = points.len();
    if ids.len() != n {
        return Err(Error::invalid("one id per point required"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} with {n} points")));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("points differ in dimension"));
    }
    let dist: Vec<Vec<T>> = points
        .iter()
        .map(|a| points.iter().map(|b| euclidean(a, b)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = vec![rng.random_range(0..n)];
    let mut nearest: Vec<T> = dist[medoids[0]].clone();
    while medoids.len() < k {
        let next = (0..n)
            .filter(|i| !medoids.contains(i))
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if nearest[b] >= nearest[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n leaves a candidate");
        medoids.push(next);
        for i in 0..n {
            nearest[i] = nearest[i].min(dist[next][i]);
        }
    }

    let (mut assignment, mut cost) = assign(&dist, &medoids);
    let mut history = vec![cost];
    for _ in 0..KMEDOIDS_MAX_ITER {
        for (c, medoid) in medoids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            let within = |m: usize| members.iter().map(|&i| dist[m][i]).sum::<T>();
            let mut best = *medoid;
            let mut best_cost = within(best);
            for &m in &members {
                let c = within(m);
                if c < best_cost {
                    best = m;
                    best_cost = c;
                }
            }
            *medoid = best;
        }
        let (a, next) = assign(&dist, &medoids);
        assignment = a;
        history.push(next);
        let change = (cost - next).abs();
        cost = next;
        if change.f64() < KMEDOIDS_TOL {
            break;
        }
    }

    // relabel clusters by ascending mean coordinate of their members
    let centrality: Vec<T> = (0..k)
        .map(|c| {
            let vals: Vec<T> = (0..n)
                .filter(|&i| assignment[i] == c)
                .flat_map(|i| points[i].iter().copied())
                .collect();
            mean(&vals)
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centrality[a].partial_cmp(&centrality[b]).unwrap().then(a.cmp(&b)));
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    Ok(Clustering {
        measure,
        k,
        ids: ids.to_vec(),
        assignment: assignment.iter().map(|&c| relabel[c]).collect(),
        medoids: order.iter().map(|&old| medoids[old]).collect(),
        cost,
        cost_history: history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEnrichment<T> {
    /// 1-based, 1 = least central.
    pub cluster: usize,
    pub medoid: NodeId,
    pub size: usize,
    pub positive: usize,
    pub negative: usize,
    pub positive_pct: T,
    pub negative_pct: T,
    pub p_pos: TestResult<T>,
    pub p_neg: TestResult<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentReport<T> {
    pub measure: Option<CentralityMeasure>,
    pub population: usize,
    pub population_positive: usize,
    pub clusters: Vec<ClusterEnrichment<T>>,
}

/// Upper-tail hypergeometric tests for positive and for negative labels in
/// every cluster, BH-adjusted across all `2k` tests. `labels` follow the
/// clustering's point order.
pub fn cluster_enrichment<T: Real>(c: &Clustering<T>, labels: &[bool]) -> Result<EnrichmentReport<T>> {
    if labels.len() != c.assignment.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} clustered nodes",
            labels.len(),
            c.assignment.len()
        )));
    }
    let n = labels.len() as u64;
    let total_pos = labels.iter().filter(|&&l| l).count() as u64;
    let mut clusters = Vec::with_capacity(c.k);
    for k in 0..c.k {
        let members: Vec<bool> = c
            .assignment
            .iter()
            .zip(labels)
            .filter(|(&a, _)| a == k)
            .map(|(_, &l)| l)
            .collect();
        let size = members.len();
        let pos = members.iter().filter(|&&l| l).count();
        let neg = size - pos;
        let pct = |x: usize| T::of(100.0 * x as f64 / size as f64);
        clusters.push(ClusterEnrichment {
            cluster: k + 1,
            medoid: c.ids[c.medoids[k]].clone(),
            size,
            positive: pos,
            negative: neg,
            positive_pct: pct(pos),
            negative_pct: pct(neg),
            p_pos: hypergeom_enrichment(n, total_pos, size as u64, pos as u64)?,
            p_neg: hypergeom_enrichment(n, n - total_pos, size as u64, neg as u64)?,
        });
    }
    adjust_all(
        &mut clusters
            .iter_mut()
            .flat_map(|c| [&mut c.p_pos, &mut c.p_neg])
            .collect::<Vec<_>>(),
    );
    Ok(EnrichmentReport {
        measure: c.measure,
        population: labels.len(),
        population_positive: total_pos as usize,
        clusters,
    })
}
