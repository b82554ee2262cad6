//! Synthetic interaction logs with a planted trait effect.
//!
//! Every week each node pair `(u, v)` interacts with probability
//! `q_u * q_v * base_edge_prob * m_w(u) * m_w(v)` (clamped to 1), where `q` is
//! `centrality_multiplier` for positive nodes and 1 otherwise, and
//! `m_w(u) = exp(s_u z - s_u^2 / 2)` with `z` standard normal is a mean-one
//! weekly modulation whose log-scale `s_u` is `modulation_sd`, multiplied by
//! `volatility_multiplier` for positive nodes. An interacting pair exchanges
//! `1 + Poisson(extra_events)` messages in random directions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use netmh::error::{Error, Result};
use netmh::netmodel::{write_events, write_labels, Event, NodeId, TraitLabels, TraitTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub n_nodes: usize,
    pub n_weeks: usize,
    pub base_edge_prob: f64,
    pub positive_fraction: f64,
    /// Fraction of nodes that carry labels; the rest are written as `NA`.
    pub labeled_fraction: f64,
    pub centrality_multiplier: f64,
    pub volatility_multiplier: f64,
    pub modulation_sd: f64,
    pub extra_events: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            n_nodes: 576,
            n_weeks: 31,
            base_edge_prob: 0.006,
            positive_fraction: 0.25,
            labeled_fraction: 1.0,
            centrality_multiplier: 0.5,
            volatility_multiplier: 2.0,
            modulation_sd: 0.5,
            extra_events: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("base_edge_prob", self.base_edge_prob)?;
        unit("positive_fraction", self.positive_fraction)?;
        unit("labeled_fraction", self.labeled_fraction)?;
        if self.positive_fraction > self.labeled_fraction {
            return Err(Error::Config("positive_fraction exceeds labeled_fraction".into()));
        }
        for (name, v) in [
            ("centrality_multiplier", self.centrality_multiplier),
            ("volatility_multiplier", self.volatility_multiplier),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.modulation_sd >= 0.0 && self.modulation_sd.is_finite()) {
            return Err(Error::Config(format!("modulation_sd = {} must be non-negative", self.modulation_sd)));
        }
        if !(self.extra_events >= 0.0 && self.extra_events.is_finite()) {
            return Err(Error::Config(format!("extra_events = {} must be non-negative", self.extra_events)));
        }
        if self.n_nodes < 2 || self.n_weeks == 0 {
            return Err(Error::Config("need at least 2 nodes and 1 week".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    /// All generated nodes, `n000`, `n001`, ...
    pub nodes: Vec<NodeId>,
    pub positive: Vec<bool>,
    pub events: Vec<Event>,
    /// Labels of the labeled nodes that took part in at least one event.
    pub labels: TraitTable,
}

pub fn generate_synthetic(p: &SyntheticParams) -> Result<SyntheticData> {
    p.validate()?;
    let n = p.n_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let width = (n - 1).to_string().len().max(3);
    let nodes: Vec<NodeId> = (0..n)
        .map(|i| NodeId::new(format!("n{i:0width$}")).expect("generated ids are valid"))
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_pos = (p.positive_fraction * n as f64).ceil() as usize;
    let n_lab = ((p.labeled_fraction * n as f64).ceil() as usize).max(n_pos);
    let mut positive = vec![false; n];
    let mut labeled = vec![false; n];
    for (rank, &v) in order.iter().enumerate() {
        positive[v] = rank < n_pos;
        labeled[v] = rank < n_lab;
    }

    let q: Vec<f64> = positive.iter().map(|&pos| if pos { p.centrality_multiplier } else { 1.0 }).collect();
    let sd: Vec<f64> = positive
        .iter()
        .map(|&pos| p.modulation_sd * if pos { p.volatility_multiplier } else { 1.0 })
        .collect();
    let extra = (p.extra_events > 0.0).then(|| Poisson::new(p.extra_events).expect("positive rate"));

    let mut events = Vec::new();
    let mut active = vec![false; n];
    let mut weight = vec![0.0; n];
    for week in 0..p.n_weeks {
        for v in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            weight[v] = q[v] * (sd[v] * z - sd[v] * sd[v] / 2.0).exp();
        }
        for u in 0..n {
            for v in u + 1..n {
                let prob = (p.base_edge_prob * weight[u] * weight[v]).min(1.0);
                if rng.random::<f64>() >= prob {
                    continue;
                }
                let count = 1 + extra.as_ref().map_or(0, |d| d.sample(&mut rng) as usize);
                for _ in 0..count {
                    let (a, b) = if rng.random_bool(0.5) { (u, v) } else { (v, u) };
                    events.push(Event::new(nodes[a].clone(), nodes[b].clone(), week)?);
                }
                active[u] = true;
                active[v] = true;
            }
        }
    }

    let universe: Vec<NodeId> = (0..n).filter(|&v| active[v]).map(|v| nodes[v].clone()).collect();
    let rows: BTreeMap<NodeId, TraitLabels> = (0..n)
        .filter(|&v| active[v] && labeled[v])
        .map(|v| {
            let l = Some(positive[v]);
            (nodes[v].clone(), TraitLabels { depressed: l, anxious: l })
        })
        .collect();
    let dropped = (0..n).filter(|&v| labeled[v] && !active[v]).count();
    if dropped > 0 {
        log::info!("{dropped} labeled synthetic node(s) had no events and were left out of the labels");
    }
    Ok(SyntheticData {
        nodes,
        positive,
        events,
        labels: TraitTable::new(rows, &universe)?,
    })
}

/// Writes `events.csv` and `labels.csv` into `dir`, returning their paths.
pub fn write_synthetic(data: &SyntheticData, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    let events = dir.join("events.csv");
    let labels = dir.join("labels.csv");
    write_events(&events, &data.events)?;
    write_labels(&labels, &data.labels)?;
    Ok((events, labels))
}
