use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::centrality::{all_profiles, static_ranks, static_ranks_with_gdv, CentralityMeasure, CentralityProfile, DEFAULT_GRAPHLET_SIZE};
use crate::error::{Error, Result};
use crate::graphlets::{dynamic_gdv, got, static_gdv, DynamicGraphletConfig, GdvMatrix};
use crate::netmodel::{Cohort, DynamicNetwork, Event, NodeId, StaticNetwork};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureTag {
    DynCentrality,
    DynGdv,
    Got,
    StatCentrality,
    StatGdv,
    RawSms,
}

impl FeatureTag {
    pub const ALL: [FeatureTag; 6] = [
        FeatureTag::DynCentrality,
        FeatureTag::DynGdv,
        FeatureTag::Got,
        FeatureTag::StatCentrality,
        FeatureTag::StatGdv,
        FeatureTag::RawSms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureTag::DynCentrality => "dyn_centrality",
            FeatureTag::DynGdv => "dyn_gdv",
            FeatureTag::Got => "got",
            FeatureTag::StatCentrality => "stat_centrality",
            FeatureTag::StatGdv => "stat_gdv",
            FeatureTag::RawSms => "raw_sms",
        }
    }

    pub fn parse(s: &str) -> Result<FeatureTag> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown feature kind `{s}`")))
    }

    pub fn is_dynamic(self) -> bool {
        matches!(self, FeatureTag::DynCentrality | FeatureTag::DynGdv | FeatureTag::Got)
    }

    pub fn is_static(self) -> bool {
        matches!(self, FeatureTag::StatCentrality | FeatureTag::StatGdv)
    }
}

impl fmt::Display for FeatureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A feature family, optionally reduced by PCA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureKind {
    pub tag: FeatureTag,
    pub pca: bool,
}

impl FeatureKind {
    /// The twelve model variants: every family without and with PCA.
    pub fn all() -> Vec<FeatureKind> {
        FeatureTag::ALL
            .iter()
            .flat_map(|&tag| [false, true].map(|pca| FeatureKind { tag, pca }))
            .collect()
    }

    /// `<tag>` or `<tag>_pca`.
    pub fn label(self) -> String {
        if self.pca {
            format!("{}_pca", self.tag)
        } else {
            self.tag.to_string()
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureConfig {
    /// Static graphlet size for `stat_gdv` and the graphlet degree centrality (4 or 5).
    pub graphlet_size: usize,
    pub dynamic: DynamicGraphletConfig,
    /// Subset size for graphlet-orbit transitions (3 or 4).
    pub got_k: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            graphlet_size: DEFAULT_GRAPHLET_SIZE,
            dynamic: DynamicGraphletConfig::default(),
            got_k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    pub kind: FeatureKind,
    pub ids: Vec<NodeId>,
    pub columns: Vec<String>,
    pub values: Matrix<T>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    fn new(tag: FeatureTag, ids: Vec<NodeId>, columns: Vec<String>, values: Matrix<T>) -> Self {
        FeatureMatrix {
            kind: FeatureKind { tag, pca: false },
            ids,
            columns,
            values,
        }
    }

    fn from_counts(tag: FeatureTag, ids: &[NodeId], m: &GdvMatrix) -> Self {
        let data = (0..m.rows())
            .flat_map(|v| m.row(v).iter().map(|&c| T::of(c as f64)))
            .collect();
        Self::new(tag, ids.to_vec(), m.columns.clone(), Matrix::from_vec(m.rows(), m.cols(), data))
    }

    /// Concatenated weekly rank profiles, measure-major (`<measure>_w<week>`).
    pub fn from_profiles(profiles: &[CentralityProfile<T>], ids: &[NodeId]) -> Self {
        let columns = profiles
            .iter()
            .flat_map(|p| (0..p.weeks()).map(move |w| format!("{}_w{w}", p.measure)))
            .collect::<Vec<_>>();
        let rows: Vec<Vec<T>> = (0..ids.len())
            .map(|v| profiles.iter().flat_map(|p| p.row(v).iter().copied()).collect())
            .collect();
        Self::new(FeatureTag::DynCentrality, ids.to_vec(), columns, Matrix::from_rows(&rows))
    }

    /// Rows of the cohort, in cohort order.
    pub fn restrict(&self, cohort: &Cohort) -> Self {
        FeatureMatrix {
            kind: self.kind,
            ids: cohort.ids.clone(),
            columns: self.columns.clone(),
            values: self.values.select_rows(&cohort.indices),
        }
    }

    /// Rows `node_id,<columns>`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        self.write_to(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "node_id,{}", self.columns.join(","))?;
        for (i, id) in self.ids.iter().enumerate() {
            write!(out, "{id}")?;
            for x in self.values.row(i) {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Per-week count of events each node sent or received, over the node universe of `d`.
pub fn raw_sms<T: Real>(d: &DynamicNetwork, events: &[Event]) -> Result<FeatureMatrix<T>> {
    let (n, w) = (d.node_count(), d.num_weeks());
    let mut counts = vec![0usize; n * w];
    for e in events {
        if e.week >= w {
            return Err(Error::WeekOutOfRange { week: e.week, num_weeks: w });
        }
        for id in [&e.a, &e.b] {
            let v = d
                .index_of(id)
                .ok_or_else(|| Error::invalid(format!("event endpoint {id} outside the node universe")))?;
            counts[v * w + e.week] += 1;
        }
    }
    let columns = (0..w).map(|i| format!("week_{i}")).collect();
    let data = counts.into_iter().map(T::of_usize).collect();
    Ok(FeatureMatrix::new(FeatureTag::RawSms, d.nodes().to_vec(), columns, Matrix::from_vec(n, w, data)))
}

/// One feature family over the whole node universe.
pub fn compute_features<T: Real>(
    tag: FeatureTag,
    d: &DynamicNetwork,
    s: &StaticNetwork,
    events: &[Event],
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix<T>> {
    if s.nodes != d.nodes() {
        return Err(Error::invalid("static and dynamic networks differ in node universe"));
    }
    let ids = d.nodes();
    Ok(match tag {
        FeatureTag::DynCentrality => FeatureMatrix::from_profiles(&all_profiles(d, cfg.graphlet_size)?, ids),
        FeatureTag::DynGdv => FeatureMatrix::from_counts(tag, ids, &dynamic_gdv(d, cfg.dynamic)?),
        FeatureTag::Got => FeatureMatrix::from_counts(tag, ids, &got(d, cfg.got_k)?),
        FeatureTag::StatCentrality => {
            let ranks: Vec<Vec<T>> = static_ranks(&s.graph, cfg.graphlet_size)?;
            static_centrality_matrix(ids, &ranks)
        }
        FeatureTag::StatGdv => FeatureMatrix::from_counts(tag, ids, &static_gdv(&s.graph, cfg.graphlet_size)?),
        FeatureTag::RawSms => raw_sms(d, events)?,
    })
}

/// All six feature families over the node universe, in [`FeatureTag::ALL`]
/// order. The static orbit counts are computed once and shared; weekly rank
/// profiles are reused when given.
pub fn compute_all_features<T: Real>(
    d: &DynamicNetwork,
    s: &StaticNetwork,
    events: &[Event],
    cfg: &FeatureConfig,
    profiles: Option<&[CentralityProfile<T>]>,
) -> Result<Vec<FeatureMatrix<T>>> {
    if s.nodes != d.nodes() {
        return Err(Error::invalid("static and dynamic networks differ in node universe"));
    }
    let ids = d.nodes();
    let sgdv = static_gdv(&s.graph, cfg.graphlet_size)?;
    FeatureTag::ALL
        .iter()
        .map(|&tag| match tag {
            FeatureTag::StatCentrality => {
                let ranks: Vec<Vec<T>> = static_ranks_with_gdv(&s.graph, &sgdv)?;
                Ok(static_centrality_matrix(ids, &ranks))
            }
            FeatureTag::StatGdv => Ok(FeatureMatrix::from_counts(tag, ids, &sgdv)),
            FeatureTag::DynCentrality => match profiles {
                Some(p) => Ok(FeatureMatrix::from_profiles(p, ids)),
                None => compute_features(tag, d, s, events, cfg),
            },
            _ => compute_features(tag, d, s, events, cfg),
        })
        .collect()
}

fn static_centrality_matrix<T: Real>(ids: &[NodeId], ranks: &[Vec<T>]) -> FeatureMatrix<T> {
    let rows: Vec<Vec<T>> = (0..ids.len()).map(|v| ranks.iter().map(|r| r[v]).collect()).collect();
    let columns = CentralityMeasure::ALL.iter().map(|m| m.name().to_string()).collect();
    FeatureMatrix::new(FeatureTag::StatCentrality, ids.to_vec(), columns, Matrix::from_rows(&rows))
}

/// One feature family restricted to the labeled cohort.
pub fn assemble_features<T: Real>(
    tag: FeatureTag,
    d: &DynamicNetwork,
    s: &StaticNetwork,
    events: &[Event],
    cohort: &Cohort,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix<T>> {
    Ok(compute_features(tag, d, s, events, cfg)?.restrict(cohort))
}
