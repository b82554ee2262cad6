//! End-to-end runs: ingestion, features, and the three trait analyses.
//!
//! Every task renders its files in memory; the files are written to a staging
//! directory and moved into the output directory only when the whole run
//! succeeded, so a failed run leaves no partial reports behind.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use netmh::centrality::{all_profiles, CentralityMeasure, CentralityProfile};
use netmh::cohort::{
    cluster_enrichment, compare_fluctuation, compare_magnitude, concatenated_points, kmedoids,
    profile_points, Clustering, EnrichmentReport, GroupComparison,
};
use netmh::error::{Error, Result};
use netmh::netmodel::{
    build_dynamic, flatten, load_events, load_labels, Cohort, DynamicNetwork, Event, StaticNetwork, Trait,
    TraitTable,
};
use netmh::predict::{
    compute_all_features, compute_features, cross_validate, external_baseline, stratified_partition, Baseline,
    CvReport, FeatureKind, FeatureMatrix, FeatureTag, Metric, ModelInput, PairwiseMatrix,
};
use netmh::scalar::{mean, sample_sd, Real};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{PipelineConfig, Precision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Task1,
    Task2,
    Task3,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Task1, Task::Task2, Task::Task3];
}

/// Parsed inputs shared by every stage.
pub struct Inputs {
    pub events: Vec<Event>,
    pub dynamic: DynamicNetwork,
    pub flat: StaticNetwork,
    pub labels: TraitTable,
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    let events = load_events(&cfg.events_path).map_err(|e| e.in_stage("load_events"))?;
    let dynamic = build_dynamic(&events, cfg.num_weeks, None).map_err(|e| e.in_stage("build_network"))?;
    let flat = flatten(&dynamic);
    let labels = load_labels(&cfg.labels_path, dynamic.nodes()).map_err(|e| e.in_stage("load_labels"))?;
    Ok(Inputs { events, dynamic, flat, labels })
}

/// A rendered output file.
struct Output {
    name: String,
    bytes: Vec<u8>,
}

fn json_output(name: String, value: &impl Serialize) -> Result<Output> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(Output { name, bytes })
}

/// CSV number: plain decimals for ordinary magnitudes, exponent form otherwise.
struct Num<T>(T);

impl<T: Real> std::fmt::Display for Num<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let x = self.0.f64();
        let a = x.abs();
        if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

fn csv_output(name: String, text: String) -> Output {
    Output { name, bytes: text.into_bytes() }
}

/// Writes the outputs through a staging directory next to the reports.
fn commit(outputs: &[Output], dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |e| Error::Io { path, source: e }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let staging = dir.join(format!(".netmh-staging-{}", std::process::id()));
    let result = (|| {
        std::fs::create_dir_all(&staging).map_err(io(&staging))?;
        for o in outputs {
            let p = staging.join(&o.name);
            std::fs::write(&p, &o.bytes).map_err(io(&p))?;
        }
        let mut written = Vec::with_capacity(outputs.len());
        for o in outputs {
            let (from, to) = (staging.join(&o.name), dir.join(&o.name));
            std::fs::rename(&from, &to).map_err(io(&to))?;
            written.push(to);
        }
        Ok(written)
    })();
    let _ = std::fs::remove_dir_all(&staging);
    if result.is_err() {
        for o in outputs {
            let _ = std::fs::remove_file(dir.join(&o.name));
        }
    }
    result.map_err(|e: Error| e.in_stage("write_outputs"))
}

/// Runs the selected tasks and writes their reports into `cfg.output_dir`.
/// Returns the written paths in a fixed order.
pub fn run_pipeline(cfg: &PipelineConfig, tasks: &[Task]) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let outputs = match cfg.precision {
        Precision::F32 => render_tasks::<f32>(cfg, &inputs, tasks)?,
        Precision::F64 => render_tasks::<f64>(cfg, &inputs, tasks)?,
    };
    commit(&outputs, &cfg.output_dir)
}

fn render_tasks<T: Real + Serialize>(cfg: &PipelineConfig, inputs: &Inputs, tasks: &[Task]) -> Result<Vec<Output>> {
    let d = &inputs.dynamic;
    let cohorts: Vec<Cohort> = cfg.traits.iter().map(|&t| inputs.labels.cohort(t, d.nodes())).collect();
    let profiles: Vec<CentralityProfile<T>> =
        all_profiles(d, cfg.graphlet_size).map_err(|e| e.in_stage("centrality"))?;
    let features: Vec<FeatureMatrix<T>> = if tasks.contains(&Task::Task3) {
        compute_all_features(d, &inputs.flat, &inputs.events, &cfg.feature_config(), Some(&profiles))
            .map_err(|e| e.in_stage("features"))?
    } else {
        Vec::new()
    };
    let jobs: Vec<(Task, &Cohort)> = tasks
        .iter()
        .flat_map(|&task| cohorts.iter().map(move |c| (task, c)))
        .collect();
    let rendered = jobs
        .par_iter()
        .map(|&(task, cohort)| match task {
            Task::Task1 => task1(&profiles, cohort).map_err(|e| e.in_stage("task1")),
            Task::Task2 => task2(cfg, &profiles, cohort).map_err(|e| e.in_stage("task2")),
            Task::Task3 => task3(cfg, &features, cohort).map_err(|e| e.in_stage("task3")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rendered.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct Task1Report<T> {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub cohort_size: usize,
    pub positives: usize,
    pub comparisons: Vec<GroupComparison<T>>,
}

pub fn task1_report<T: Real>(profiles: &[CentralityProfile<T>], cohort: &Cohort) -> Result<Task1Report<T>> {
    let mut comparisons = compare_magnitude(profiles, cohort)?;
    comparisons.extend(compare_fluctuation(profiles, cohort)?);
    Ok(Task1Report {
        trait_: cohort.trait_,
        cohort_size: cohort.len(),
        positives: cohort.positives(),
        comparisons,
    })
}

fn task1<T: Real + Serialize>(profiles: &[CentralityProfile<T>], cohort: &Cohort) -> Result<Vec<Output>> {
    let report = task1_report(profiles, cohort)?;
    let t = report.trait_;
    let mut table = String::from(
        "measure,quantity,n_positive,n_negative,mean_positive,mean_negative,sd_positive,sd_negative,statistic,p_value,adjusted_p,method\n",
    );
    let mut fig = String::from("measure,quantity,group,n,mean,sd,adjusted_p\n");
    for c in &report.comparisons {
        let q = c.test.adjusted_p.unwrap_or(c.test.p_value);
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.measure,
            c.quantity,
            c.group_sizes.positive,
            c.group_sizes.negative,
            Num(c.group_means.positive),
            Num(c.group_means.negative),
            Num(c.group_sds.positive),
            Num(c.group_sds.negative),
            Num(c.test.statistic),
            Num(c.test.p_value),
            Num(q),
            c.test.method
        );
        for (group, n, m, sd) in [
            ("positive", c.group_sizes.positive, c.group_means.positive, c.group_sds.positive),
            ("negative", c.group_sizes.negative, c.group_means.negative, c.group_sds.negative),
        ] {
            let _ = writeln!(fig, "{},{},{group},{n},{},{},{}", c.measure, c.quantity, Num(m), Num(sd), Num(q));
        }
    }
    Ok(vec![
        json_output(format!("task1_{t}.json"), &report)?,
        csv_output(format!("task1_{t}.csv"), table),
        csv_output(format!("fig1_{t}.csv"), fig),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct Task2Report<T> {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    /// A centrality name, or `concatenated`.
    pub measure: String,
    pub seed: u64,
    pub clustering: Clustering<T>,
    pub enrichment: EnrichmentReport<T>,
}

/// Clusters the cohort on one measure's rank profiles, or on all of them
/// concatenated when `measure` is `None`.
pub fn task2_report<T: Real>(
    profiles: &[CentralityProfile<T>],
    cohort: &Cohort,
    measure: Option<CentralityMeasure>,
    k: usize,
    seed: u64,
) -> Result<Task2Report<T>> {
    let points = match measure {
        Some(m) => {
            let p = profiles
                .iter()
                .find(|p| p.measure == m)
                .ok_or_else(|| Error::InvalidInput(format!("no profile for {m}")))?;
            profile_points(p, cohort)
        }
        None => concatenated_points(profiles, cohort),
    };
    let clustering = kmedoids(&cohort.ids, &points, k, seed, measure)?;
    let enrichment = cluster_enrichment(&clustering, &cohort.labels)?;
    Ok(Task2Report {
        trait_: cohort.trait_,
        measure: measure.map_or("concatenated".to_string(), |m| m.name().to_string()),
        seed,
        clustering,
        enrichment,
    })
}

fn task2<T: Real + Serialize>(
    cfg: &PipelineConfig,
    profiles: &[CentralityProfile<T>],
    cohort: &Cohort,
) -> Result<Vec<Output>> {
    let mut modes: Vec<Option<CentralityMeasure>> = CentralityMeasure::ALL.iter().map(|&m| Some(m)).collect();
    if cfg.cluster_concatenated {
        modes.push(None);
    }
    let mut out = Vec::new();
    for mode in modes {
        let report = task2_report(profiles, cohort, mode, cfg.cluster_k, cfg.cluster_seed)?;
        let stem = format!("{}_{}", report.measure, report.trait_);
        out.push(csv_output(format!("fig2_{stem}.csv"), cluster_series(profiles, cohort, &report.clustering, mode)));
        let mut fig3 = String::from(
            "cluster,n,positive,negative,positive_pct,negative_pct,adjusted_p_positive,adjusted_p_negative\n",
        );
        for c in &report.enrichment.clusters {
            let _ = writeln!(
                fig3,
                "{},{},{},{},{},{},{},{}",
                c.cluster,
                c.size,
                c.positive,
                c.negative,
                Num(c.positive_pct),
                Num(c.negative_pct),
                Num(c.p_pos.adjusted_p.unwrap_or(c.p_pos.p_value)),
                Num(c.p_neg.adjusted_p.unwrap_or(c.p_neg.p_value))
            );
        }
        out.push(csv_output(format!("fig3_{stem}.csv"), fig3));
        out.push(json_output(format!("task2_{stem}.json"), &report)?);
    }
    Ok(out)
}

/// Per-cluster weekly mean and sd of the ranks the clustering was built on.
fn cluster_series<T: Real>(
    profiles: &[CentralityProfile<T>],
    cohort: &Cohort,
    c: &Clustering<T>,
    mode: Option<CentralityMeasure>,
) -> String {
    let sizes = c.sizes();
    let mut s = String::from("cluster,n,measure,week,mean,sd\n");
    for (ci, &n) in sizes.iter().enumerate() {
        let members: Vec<usize> = (0..c.assignment.len()).filter(|&i| c.assignment[i] == ci).collect();
        for p in profiles.iter().filter(|p| mode.is_none_or(|m| m == p.measure)) {
            for w in 0..p.weeks() {
                let vals: Vec<T> = members.iter().map(|&i| p.rank(cohort.indices[i], w)).collect();
                let _ = writeln!(s, "{},{n},{},{w},{},{}", ci + 1, p.measure, Num(mean(&vals)), Num(sample_sd(&vals)));
            }
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionInfo {
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    pub fingerprint: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Task3Report<T> {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub cohort_size: usize,
    pub positives: usize,
    pub partition: PartitionInfo,
    pub variance_fraction: f64,
    pub l2_strength: f64,
    /// The twelve native models, then the baselines.
    pub models: Vec<CvReport<T>>,
    pub pairwise: Vec<PairwiseMatrix<T>>,
}

/// Cross-validates the twelve native models plus baselines on one cohort.
/// `features` are universe-wide matrices in [`FeatureTag::ALL`] order.
pub fn task3_report<T: Real>(
    cfg: &PipelineConfig,
    features: &[FeatureMatrix<T>],
    cohort: &Cohort,
) -> Result<Task3Report<T>> {
    let cv = cfg.cv_config();
    let restricted: Vec<FeatureMatrix<T>> = features.iter().map(|f| f.restrict(cohort)).collect();
    let models: Vec<ModelInput<'_, T>> = FeatureKind::all()
        .into_iter()
        .map(|kind| {
            let i = FeatureTag::ALL.iter().position(|&t| t == kind.tag).expect("every tag has a matrix");
            ModelInput { kind, features: &restricted[i].values }
        })
        .collect();
    let y = &cohort.labels;
    let partition = stratified_partition(y, cv.repeats, cv.folds, cv.seed)?;
    let mut reports = cross_validate(&models, y, &partition, &cv)?;
    reports.push(Baseline::RandomGuess.evaluate("random_guess", y, &partition, cv.seed)?);
    if let Some(path) = &cfg.baseline_path {
        let predicted = external_baseline(path, &cohort.ids)?;
        reports.push(Baseline::External(predicted).evaluate("external", y, &partition, cv.seed)?);
    }
    let pairwise = Metric::ALL
        .iter()
        .map(|&m| PairwiseMatrix::compute(&reports, m))
        .collect::<Result<_>>()?;
    Ok(Task3Report {
        trait_: cohort.trait_,
        cohort_size: cohort.len(),
        positives: cohort.positives(),
        partition: PartitionInfo {
            repeats: cv.repeats,
            folds: cv.folds,
            seed: cv.seed,
            fingerprint: partition.fingerprint.clone(),
        },
        variance_fraction: cv.variance_fraction,
        l2_strength: cv.logreg.l2_strength,
        models: reports,
        pairwise,
    })
}

fn task3<T: Real + Serialize>(
    cfg: &PipelineConfig,
    features: &[FeatureMatrix<T>],
    cohort: &Cohort,
) -> Result<Vec<Output>> {
    let report = task3_report(cfg, features, cohort)?;
    let mut fig = String::from("model,metric,mean,sd\n");
    for r in &report.models {
        for m in Metric::ALL {
            let _ = writeln!(fig, "{},{},{},{}", r.model, m.name(), Num(m.of(&r.mean)), Num(m.of(&r.sd)));
        }
    }
    let t = report.trait_;
    Ok(vec![
        json_output(format!("task3_{t}.json"), &report)?,
        csv_output(format!("fig4_{t}.csv"), fig),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct TraitSummary {
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub labeled: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub nodes: usize,
    pub weeks: usize,
    pub events: usize,
    pub static_edges: usize,
    pub weekly_edges: Vec<usize>,
    pub traits: Vec<TraitSummary>,
}

/// Loads and validates the inputs, then writes `ingest_summary.json`.
pub fn run_ingest(cfg: &PipelineConfig) -> Result<(IngestSummary, Vec<PathBuf>)> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let d = &inputs.dynamic;
    let summary = IngestSummary {
        nodes: d.node_count(),
        weeks: d.num_weeks(),
        events: inputs.events.len(),
        static_edges: inputs.flat.graph.edge_count(),
        weekly_edges: d.snapshots().iter().map(|s| s.graph.edge_count()).collect(),
        traits: Trait::ALL
            .iter()
            .map(|&t| {
                let c = inputs.labels.counts(t);
                TraitSummary { trait_: t, labeled: c.labeled, positive: c.positive }
            })
            .collect(),
    };
    let written = commit(&[json_output("ingest_summary.json".into(), &summary)?], &cfg.output_dir)?;
    Ok((summary, written))
}

/// Writes `features_<kind>.csv` over the whole node universe for one feature
/// kind, or for all six when `kind` is `all`.
pub fn export_features(cfg: &PipelineConfig, kind: &str) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let tags: Vec<FeatureTag> = if kind == "all" {
        FeatureTag::ALL.to_vec()
    } else {
        vec![FeatureTag::parse(kind).map_err(|_| {
            let known: Vec<&str> = FeatureTag::ALL.iter().map(|t| t.name()).collect();
            Error::Config(format!("unknown feature kind {kind:?}; expected one of {} or all", known.join(", ")))
        })?]
    };
    let inputs = load_inputs(cfg)?;
    let outputs = match cfg.precision {
        Precision::F32 => render_features::<f32>(cfg, &inputs, &tags)?,
        Precision::F64 => render_features::<f64>(cfg, &inputs, &tags)?,
    };
    commit(&outputs, &cfg.output_dir)
}

fn render_features<T: Real>(cfg: &PipelineConfig, inputs: &Inputs, tags: &[FeatureTag]) -> Result<Vec<Output>> {
    let fc = cfg.feature_config();
    let mats: Vec<FeatureMatrix<T>> = if tags.len() == FeatureTag::ALL.len() {
        compute_all_features(&inputs.dynamic, &inputs.flat, &inputs.events, &fc, None)
    } else {
        tags.iter()
            .map(|&t| compute_features(t, &inputs.dynamic, &inputs.flat, &inputs.events, &fc))
            .collect()
    }
    .map_err(|e| e.in_stage("features"))?;
    mats.iter()
        .map(|m| {
            let mut buf = Vec::new();
            m.write_to(&mut buf).map_err(|e| Error::Io { path: PathBuf::from("<memory>"), source: e })?;
            Ok(Output { name: format!("features_{}.csv", m.kind.tag.name()), bytes: buf })
        })
        .collect()
}
