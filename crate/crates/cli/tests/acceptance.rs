//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion fails that is not listed in `KNOWN_UNATTAINABLE`.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use netmh::centrality::{all_profiles, CentralityMeasure, CentralityProfile};
use netmh::cohort::{kmedoids, Quantity};
use netmh::graphlets::oracle::{oracle_dynamic_gdv, oracle_got, oracle_static_gdv};
use netmh::graphlets::{dynamic_gdv, got, static_gdv, DynamicGraphletConfig};
use netmh::netmodel::{
    build_dynamic, flatten, DynamicNetwork, Graph, NodeId, Trait, TraitLabels, TraitTable,
};
use netmh::predict::{
    compute_features, logistic_objective, stratified_partition, Baseline, FeatureConfig, FeatureKind,
    FeatureTag, Matrix, Metric, Pca,
};
use netmh::stats::{bh_fdr, hypergeom_enrichment, wilcoxon_rank_sum, wilcoxon_signed_rank};
use netmh_cli::config::PipelineConfig;
use netmh_cli::pipeline::{run_pipeline, task1_report, task2_report, task3_report, Task};
use netmh_cli::synth::{generate_synthetic, SyntheticParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose failure is expected and explained in the project notes.
/// Criterion 6 asks for p < 0.05 from a two-sided exact signed-rank test on
/// five paired values, whose smallest attainable p-value is 2/32 = 0.0625.
const KNOWN_UNATTAINABLE: &[u8] = &[6];

struct Outcome {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for j in 1..n {
        for i in 0..j {
            if rng.random_bool(density) {
                e.push((i, j));
            }
        }
    }
    e
}

fn random_dynamic(rng: &mut ChaCha8Rng, n: usize, weeks: usize, density: f64) -> DynamicNetwork {
    let nodes = (0..n).map(|i| NodeId::new(format!("v{i}")).unwrap()).collect();
    let snaps = (0..weeks).map(|_| random_graph(rng, n, density)).collect();
    DynamicNetwork::from_snapshots(nodes, snaps).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let configs = [
        DynamicGraphletConfig::default(),
        DynamicGraphletConfig { max_nodes: 4, max_events: 3, max_gap: 2 },
    ];
    let (mut stat_bad, mut dyn_bad, mut got_bad) = (0, 0, 0);
    const INSTANCES: u64 = 200;
    for i in 0..INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(i);
        let n = rng.random_range(3..=8);
        let weeks = rng.random_range(2..=5);
        let density = rng.random_range(0.1..=0.6);
        let g = Graph::from_edges(n, random_graph(&mut rng, n, density));
        for size in [4, 5] {
            if static_gdv(&g, size).unwrap() != oracle_static_gdv(&g, size).unwrap() {
                stat_bad += 1;
            }
        }
        let d = random_dynamic(&mut rng, n, weeks, density);
        let cfg = configs[i as usize % configs.len()];
        if dynamic_gdv(&d, cfg).unwrap() != oracle_dynamic_gdv(&d, cfg).unwrap() {
            dyn_bad += 1;
        }
        let k = 3 + (i as usize % 2);
        if got(&d, k).unwrap() != oracle_got(&d, k).unwrap() {
            got_bad += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        id: 1,
        name: "graphlet counts equal brute-force oracles",
        pass: stat_bad + dyn_bad + got_bad == 0 && secs < 120.0,
        detail: format!(
            "{INSTANCES} instances each; mismatches static {stat_bad}, dynamic {dyn_bad}, got {got_bad}; {secs:.1}s"
        ),
    }
}

/// A 576-node universe with the paper's label counts: 274 labeled, 67
/// depressed, 106 anxious.
fn paper_scale() -> (DynamicNetwork, Vec<netmh::netmodel::Event>, TraitTable) {
    let data = generate_synthetic(&SyntheticParams { base_edge_prob: 0.002, seed: 7, ..SyntheticParams::default() })
        .unwrap();
    let d = build_dynamic(&data.events, 31, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut order: Vec<usize> = (0..d.node_count()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut rows = BTreeMap::new();
    for (rank, &v) in order.iter().take(274).enumerate() {
        rows.insert(
            d.nodes()[v].clone(),
            TraitLabels { depressed: Some(rank < 67), anxious: Some(rank >= 274 - 106) },
        );
    }
    let table = TraitTable::new(rows, d.nodes()).unwrap();
    (d, data.events, table)
}

fn structural_checks() -> Outcome {
    let (d, events, table) = paper_scale();
    let s = flatten(&d);
    let cfg = FeatureConfig::default();
    let dim = |tag| compute_features::<f64>(tag, &d, &s, &events, &cfg).unwrap().dim();
    let dims = [dim(FeatureTag::DynCentrality), dim(FeatureTag::StatCentrality), dim(FeatureTag::RawSms)];

    let dep = table.cohort(Trait::Depressed, d.nodes());
    let profiles: Vec<CentralityProfile<f64>> = all_profiles(&d, 4).unwrap();
    let t1 = task1_report(&profiles, &dep).unwrap();
    let per_quantity = [Quantity::Magnitude, Quantity::Fluctuation]
        .map(|q| t1.comparisons.iter().filter(|c| c.quantity == q).count());

    let kinds = FeatureKind::all();
    let mut labels: Vec<String> = kinds.iter().map(|k| k.label()).collect();
    labels.sort();
    labels.dedup();

    let mut guessed = Vec::new();
    for t in Trait::ALL {
        let c = table.cohort(t, d.nodes());
        let part = stratified_partition(&c.labels, 5, 5, 0).unwrap();
        let r = Baseline::RandomGuess.evaluate::<f64>("random_guess", &c.labels, &part, 0).unwrap();
        let per_repeat: Vec<u64> = r
            .confusion
            .iter()
            .map(|folds| folds.iter().map(|f| f.tp + f.fp).sum())
            .collect();
        guessed.push((c.len(), c.positives(), per_repeat));
    }
    let guess_ok = guessed[0].0 == 274
        && guessed[0].2.iter().all(|&p| p == 67)
        && guessed[1].2.iter().all(|&p| p == 106);
    Outcome {
        id: 2,
        name: "structural checks",
        pass: dims == [248, 8, 31] && per_quantity == [8, 8] && kinds.len() == 12 && labels.len() == 12 && guess_ok,
        detail: format!(
            "dims {dims:?}; tests per quantity {per_quantity:?}; {} variants; random-guess positives {:?} / {:?}",
            labels.len(),
            guessed[0].2,
            guessed[1].2
        ),
    }
}

fn exact_statistics() -> Outcome {
    let rs = wilcoxon_rank_sum(&[1.0f64, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap().p_value;
    let sr = wilcoxon_signed_rank(&[2.0f64, 3.0, 4.0, 5.0, 6.0], &[1.0; 5]).unwrap().p_value;
    let hg = hypergeom_enrichment::<f64>(10, 5, 5, 5).unwrap().p_value;
    let bh = bh_fdr(&[0.01f64, 0.02, 0.03, 0.04]).unwrap();
    let errs = [
        (rs - 0.1).abs(),
        (sr - 0.0625).abs(),
        (hg - 1.0 / 252.0).abs(),
        bh.iter().map(|q| (q - 0.04).abs()).fold(0.0, f64::max),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Outcome {
        id: 3,
        name: "exact statistics",
        pass: worst <= 1e-9,
        detail: format!("rank-sum {rs}, signed-rank {sr}, hypergeometric {hg:.6e}, BH {bh:?}; max error {worst:.1e}"),
    }
}

struct Planted {
    profiles: Vec<CentralityProfile<f64>>,
    cohort: netmh::netmodel::Cohort,
}

fn planted(seed: u64, centrality: f64, volatility: f64) -> Planted {
    let p = SyntheticParams {
        n_nodes: 200,
        n_weeks: 31,
        positive_fraction: 0.25,
        centrality_multiplier: centrality,
        volatility_multiplier: volatility,
        seed,
        ..SyntheticParams::default()
    };
    let data = generate_synthetic(&p).unwrap();
    let d = build_dynamic(&data.events, p.n_weeks, None).unwrap();
    let cohort = data.labels.cohort(Trait::Depressed, d.nodes());
    Planted { profiles: all_profiles(&d, 4).unwrap(), cohort }
}

fn task1_recovery(planted_runs: &[Planted]) -> Outcome {
    let mut recovered = 0;
    for r in planted_runs {
        let t1 = task1_report(&r.profiles, &r.cohort).unwrap();
        let deg = |q| {
            t1.comparisons
                .iter()
                .find(|c| c.measure == CentralityMeasure::Degree && c.quantity == q)
                .unwrap()
        };
        let (m, f) = (deg(Quantity::Magnitude), deg(Quantity::Fluctuation));
        let sig = |c: &netmh::cohort::GroupComparison<f64>| c.test.adjusted_p.unwrap() < 0.05;
        if sig(m) && sig(f) && m.group_means.positive < m.group_means.negative
            && f.group_means.positive > f.group_means.negative
        {
            recovered += 1;
        }
    }
    let (mut any_sig, mut degree_sig) = (0, 0);
    const NULL_SEEDS: u64 = 100;
    for seed in 0..NULL_SEEDS {
        let r = planted(10_000 + seed, 1.0, 1.0);
        let t1 = task1_report(&r.profiles, &r.cohort).unwrap();
        let sig: Vec<_> = t1.comparisons.iter().filter(|c| c.test.adjusted_p.unwrap() < 0.05).collect();
        if !sig.is_empty() {
            any_sig += 1;
        }
        if sig.iter().any(|c| c.measure == CentralityMeasure::Degree) {
            degree_sig += 1;
        }
    }
    Outcome {
        id: 4,
        name: "Task 1 recovery and null calibration",
        pass: recovered >= 9 && any_sig <= 10,
        detail: format!(
            "planted degree effects recovered in {recovered}/{}; null seeds with any adjusted p < 0.05: {any_sig}/{NULL_SEEDS} (degree tests only: {degree_sig})",
            planted_runs.len()
        ),
    }
}

fn task2_recovery(planted_runs: &[Planted]) -> Outcome {
    let mut hits = 0;
    for r in planted_runs {
        let t2 = task2_report(&r.profiles, &r.cohort, Some(CentralityMeasure::Degree), 4, 0).unwrap();
        let c = &t2.enrichment.clusters;
        let (first, last) = (&c[0], &c[c.len() - 1]);
        if first.p_pos.adjusted_p.unwrap() < 0.05 && last.p_neg.adjusted_p.unwrap() < 0.05 {
            hits += 1;
        }
    }
    Outcome {
        id: 5,
        name: "Task 2 enrichment pattern",
        pass: hits >= 8,
        detail: format!("least-central cluster positive-enriched and most-central negative-enriched in {hits}/{}", planted_runs.len()),
    }
}

fn task3_ordering() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = SyntheticParams { centrality_multiplier: 1.0, volatility_multiplier: 2.5, ..SyntheticParams::default() };
    let cfg = common::synthetic_config(dir.path(), &p);
    let inputs = netmh_cli::pipeline::load_inputs(&cfg).unwrap();
    let features = netmh::predict::compute_all_features::<f64>(
        &inputs.dynamic,
        &inputs.flat,
        &inputs.events,
        &cfg.feature_config(),
        None,
    )
    .unwrap();
    let cohort = inputs.labels.cohort(Trait::Depressed, inputs.dynamic.nodes());
    let report = task3_report(&cfg, &features, &cohort).unwrap();
    let precision = |pred: fn(FeatureTag) -> bool| -> Vec<(String, f64)> {
        report
            .models
            .iter()
            .filter(|r| r.kind.is_some_and(|k| pred(k.tag)))
            .map(|r| (r.model.clone(), r.mean.precision))
            .collect()
    };
    let dynamic = precision(FeatureTag::is_dynamic);
    let stat = precision(FeatureTag::is_static);
    let native = precision(|_| true);
    let random = report.models.iter().find(|r| r.model == "random_guess").unwrap().mean.precision;
    let pw = report.pairwise.iter().find(|m| m.metric == Metric::Precision).unwrap();

    let mut ordered = 0;
    let mut significant = 0;
    let mut max_q: f64 = 0.0;
    for (dn, dp) in &dynamic {
        for (sn, sp) in &stat {
            ordered += usize::from(dp > sp);
            let q = pw.adjusted(dn, sn).unwrap();
            max_q = max_q.max(q);
            significant += usize::from(dp > sp && q < 0.05);
        }
    }
    let pairs = dynamic.len() * stat.len();
    let beats_random = native.iter().filter(|(_, p)| *p > random).count();
    let show = |v: &[(String, f64)]| v.iter().map(|(n, p)| format!("{n} {p:.3}")).collect::<Vec<_>>().join(", ");
    Outcome {
        id: 6,
        name: "Task 3 dynamic-over-static ordering",
        pass: ordered == pairs && significant == pairs && beats_random == native.len(),
        detail: format!(
            "dynamic > static in {ordered}/{pairs} pairs, significant in {significant}/{pairs} (largest adjusted p {max_q:.4}); \
             {beats_random}/{} native models beat random guess ({random:.3}); dynamic [{}]; static [{}]",
            native.len(),
            show(&dynamic),
            show(&stat)
        ),
    }
}

fn numerical_hygiene() -> Outcome {
    let mut worst_grad: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + i);
        let (n, d) = (rng.random_range(5..40), rng.random_range(1..6));
        let x: Matrix<f64> = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect());
        let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = rng.random_range(-1.0..1.0);
        let l2 = rng.random_range(0.0..2.0);
        let (_, gw, gb) = logistic_objective(&x, &y, &w, b, l2);
        let h = 1e-6;
        let loss = |w: &[f64], b: f64| logistic_objective(&x, &y, w, b, l2).0;
        let mut analytic = gw.clone();
        analytic.push(gb);
        let mut numeric = Vec::with_capacity(d + 1);
        for j in 0..d {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            numeric.push((loss(&up, b) - loss(&down, b)) / (2.0 * h));
        }
        numeric.push((loss(&w, b + h) - loss(&w, b - h)) / (2.0 * h));
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / (norm(&analytic) + norm(&numeric)).max(1e-12);
        worst_grad = worst_grad.max(rel);
    }

    let mut worst_recon: f64 = 0.0;
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + i);
        let (n, d) = (rng.random_range(3..40), rng.random_range(1..10));
        let x: Matrix<f64> = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-10.0..10.0)).collect());
        let p = Pca::fit(&x, 1.0).unwrap();
        let back = p.inverse_transform(&p.transform(&x));
        let err = x.data().iter().zip(back.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_recon = worst_recon.max(err);
    }

    let mut increases = 0;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + i);
        let n = rng.random_range(2..60);
        let dim = rng.random_range(1..6);
        let k = rng.random_range(1..=n.min(6));
        let ids: Vec<NodeId> = (0..n).map(|j| NodeId::new(format!("p{j}")).unwrap()).collect();
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(0.0..100.0)).collect()).collect();
        let c = kmedoids(&ids, &pts, k, i, None).unwrap();
        increases += c.cost_history.windows(2).filter(|w| w[1] > w[0]).count();
    }
    Outcome {
        id: 7,
        name: "numerical hygiene",
        pass: worst_grad <= 1e-5 && worst_recon <= 1e-8 && increases == 0,
        detail: format!(
            "gradient max relative error {worst_grad:.2e} over 50; PCA max reconstruction error {worst_recon:.2e}; k-medoids cost increases {increases} over 100"
        ),
    }
}

fn scale_and_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg: PipelineConfig = common::synthetic_config(dir.path(), &SyntheticParams::default());
    let t = Instant::now();
    run_pipeline(&cfg, &Task::ALL).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let first = common::snapshot(&cfg.output_dir);
    let rerun = PipelineConfig { output_dir: dir.path().join("rerun"), ..cfg.clone() };
    run_pipeline(&rerun, &Task::ALL).unwrap();
    let second = common::snapshot(&rerun.output_dir);
    let identical = first == second;
    let schema_errors = common::schema_errors(&cfg.output_dir).len();
    let inputs = netmh_cli::pipeline::load_inputs(&cfg).unwrap();
    let mean_weekly_degree = inputs.dynamic.snapshots().iter().map(|s| s.graph.edge_count()).sum::<usize>() as f64
        * 2.0
        / (inputs.dynamic.node_count() * inputs.dynamic.num_weeks()) as f64;
    Outcome {
        id: 8,
        name: "576-node full pipeline",
        pass: secs < 600.0 && identical && schema_errors == 0,
        detail: format!(
            "{} nodes, mean weekly degree {mean_weekly_degree:.2}, {} files in {secs:.1}s on {} thread(s); reruns byte-identical: {identical}; schema errors {schema_errors}",
            inputs.dynamic.node_count(),
            first.len(),
            rayon::current_num_threads()
        ),
    }
}

fn main() {
    let mut outcomes = Vec::new();
    let mut report = |o: Outcome| {
        println!("{} criterion {}: {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
        outcomes.push((o.id, o.pass));
    };
    report(oracle_equivalence());
    report(structural_checks());
    report(exact_statistics());
    let planted_runs: Vec<Planted> = (0..10).map(|seed| planted(seed, 0.5, 2.0)).collect();
    report(task1_recovery(&planted_runs));
    report(task2_recovery(&planted_runs));
    report(task3_ordering());
    report(numerical_hygiene());
    report(scale_and_determinism());

    let unexpected: Vec<u8> = outcomes
        .iter()
        .filter(|(id, pass)| !pass && !KNOWN_UNATTAINABLE.contains(id))
        .map(|(id, _)| *id)
        .collect();
    let passed = outcomes.iter().filter(|(_, p)| *p).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
