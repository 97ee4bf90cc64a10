//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng;

use simloss::harness::{analyze_distributions, run_grid_with_models, ExperimentConfig, GridOutcome};
use simloss::loss::{loss_gap, prob_loss, prob_loss_grad_probs, simloss, simloss_grad_logits, simloss_grad_probs, softmax};
use simloss::metrics::{wilcoxon_signed_rank, Metric, PairedSamples, DEFAULT_SPIKE_THRESHOLD};
use simloss::model::{backward, batch_loss, init_network};
use simloss::rng::{stream, Stream};
use simloss::sim_matrix::{identity_matrix, lower_bound_matrix, order_matrix};
use simloss::{LabelBatch, LogitBatch, SimilarityMatrix};

const A1_TOL: f64 = 1e-12;
const A2_STEP: f64 = 1e-5;
const A2_REL_TOL: f64 = 1e-4;
const A2_ABS_FLOOR: f64 = 1e-8;
const A3_TOL: f64 = 1e-10;
const A8_TOL: f64 = 1e-12;
const ALPHA: f64 = 0.05;
const SPIKE_TARGET_CLASS: usize = 15;

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn random_logits(rng: &mut Stream, n: usize, c: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, c), || rng.gen_range(-scale..scale))
}

fn random_labels(rng: &mut Stream, n: usize, c: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..c)).collect()
}

fn random_matrix(rng: &mut Stream, c: usize) -> SimilarityMatrix {
    if rng.gen_bool(0.5) {
        order_matrix(c, rng.gen_range(0.0..0.95)).unwrap()
    } else {
        let mut raw = Array2::eye(c);
        for i in 0..c {
            for j in i + 1..c {
                let v = rng.gen_range(0.0..1.0);
                raw[[i, j]] = v;
                raw[[j, i]] = v;
            }
        }
        lower_bound_matrix(raw.view(), rng.gen_range(0.0..0.9)).unwrap()
    }
}

fn a1_cce_equivalence() -> Verdict {
    let mut rng = stream(101);
    let mut worst = 0.0f64;
    let batches = 1000;
    for _ in 0..batches {
        let n = rng.gen_range(1..=32);
        let c = rng.gen_range(2..=20);
        let probs = softmax(&LogitBatch::new(random_logits(&mut rng, n, c, 6.0)).unwrap());
        let labels = random_labels(&mut rng, n, c);
        let got = simloss(&probs, &LabelBatch::from_vec(labels.clone()), &identity_matrix(c).unwrap()).unwrap();
        let p = probs.view();
        let reference = -labels.iter().enumerate().map(|(i, &y)| p[[i, y]].ln()).sum::<f64>() / n as f64;
        worst = worst.max((got - reference).abs());
    }
    verdict(worst <= A1_TOL, format!("{batches} batches, max |simloss(I) - cce| = {worst:.3e} (tol {A1_TOL:e})"))
}

fn relative_ok(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= A2_ABS_FLOOR || diff <= A2_REL_TOL * analytic.abs().max(numeric.abs())
}

fn a2_gradients() -> Verdict {
    let mut rng = stream(202);
    let triples = 100;
    let mut bad = 0usize;
    let mut checked = 0usize;
    for _ in 0..triples {
        let n = rng.gen_range(1..=6);
        let c = rng.gen_range(2..=8);
        let z = random_logits(&mut rng, n, c, 3.0);
        let labels = LabelBatch::from_vec(random_labels(&mut rng, n, c));
        let s = random_matrix(&mut rng, c);
        let grad = simloss_grad_logits(&LogitBatch::new(z.clone()).unwrap(), &labels, &s).unwrap();
        let f = |z: &Array2<f64>| simloss(&softmax(&LogitBatch::new(z.clone()).unwrap()), &labels, &s).unwrap();
        for ((i, j), &analytic) in grad.indexed_iter() {
            let mut plus = z.clone();
            let mut minus = z.clone();
            plus[[i, j]] += A2_STEP;
            minus[[i, j]] -= A2_STEP;
            let numeric = (f(&plus) - f(&minus)) / (2.0 * A2_STEP);
            checked += 1;
            if !relative_ok(analytic, numeric) {
                bad += 1;
            }
        }
    }
    let nets = 30;
    for k in 0..nets {
        let d_in = rng.gen_range(1..=4);
        let hidden = rng.gen_range(1..=6);
        let c = rng.gen_range(2..=5);
        let net = init_network(&[d_in, hidden, c], 900 + k).unwrap();
        assert!(net.parameter_count() <= 100);
        let n = rng.gen_range(1..=8);
        let x = Array2::from_shape_simple_fn((n, d_in), || rng.gen_range(-2.0..2.0));
        let labels = LabelBatch::from_vec(random_labels(&mut rng, n, c));
        let s = random_matrix(&mut rng, c);
        let g = backward(&net, x.view(), &labels, &s).unwrap();
        let analytic: Vec<f64> = g
            .weights
            .iter()
            .flat_map(|w| w.iter().copied())
            .chain(g.biases.iter().flat_map(|b| b.iter().copied()))
            .collect();
        for (idx, &a) in analytic.iter().enumerate() {
            let mut plus = net.clone();
            *plus.parameters_mut().nth(idx).unwrap() += A2_STEP;
            let mut minus = net.clone();
            *minus.parameters_mut().nth(idx).unwrap() -= A2_STEP;
            let numeric = (batch_loss(&plus, x.view(), &labels, &s).unwrap()
                - batch_loss(&minus, x.view(), &labels, &s).unwrap())
                / (2.0 * A2_STEP);
            checked += 1;
            if !relative_ok(a, numeric) {
                bad += 1;
            }
        }
    }
    verdict(
        bad == 0,
        format!("{triples} loss triples + {nets} MLPs, {checked} components, {bad} outside rel {A2_REL_TOL:e}"),
    )
}

fn a3_row_normalized_identities() -> Verdict {
    let mut rng = stream(303);
    let instances = 1000;
    let (mut gap_err, mut grad_err) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let n = rng.gen_range(1..=16);
        let c = rng.gen_range(2..=12);
        let probs = softmax(&LogitBatch::new(random_logits(&mut rng, n, c, 5.0)).unwrap());
        let labels = LabelBatch::from_vec(random_labels(&mut rng, n, c));
        let s = random_matrix(&mut rng, c);
        let gap = prob_loss(&probs, &labels, &s).unwrap() - simloss(&probs, &labels, &s).unwrap();
        gap_err = gap_err.max((gap - loss_gap(&labels, &s).unwrap()).abs());
        let a = simloss_grad_probs(&probs, &labels, &s).unwrap();
        let b = prob_loss_grad_probs(&probs, &labels, &s).unwrap();
        grad_err = a.iter().zip(b.iter()).fold(grad_err, |m, (x, y)| m.max((x - y).abs()));
    }
    verdict(
        gap_err <= A3_TOL && grad_err <= A3_TOL,
        format!("{instances} instances, gap err {gap_err:.3e}, gradient err {grad_err:.3e} (tol {A3_TOL:e})"),
    )
}

fn a4_matrix_generators() -> Verdict {
    let mut failures = Vec::new();
    for c in [2, 3, 10, 90] {
        if order_matrix(c, 0.0).unwrap() != identity_matrix(c).unwrap() {
            failures.push(format!("order_matrix({c}, 0) != identity"));
        }
    }
    let order = order_matrix(3, 0.5).unwrap();
    if order.get(0, 2) != 0.25 || order.get(0, 1) != 0.5 {
        failures.push(format!("order spot {} {}", order.get(0, 1), order.get(0, 2)));
    }
    let raw = ndarray::array![[1.0, 0.7, 0.3], [0.7, 1.0, 0.0], [0.3, 0.0, 1.0]];
    let lb = lower_bound_matrix(raw.view(), 0.5).unwrap();
    // 0.7 - 0.5 rounds below 0.2 in binary, so the result is within one ulp of 0.4
    let spot = lb.get(0, 1);
    if (spot - 0.4).abs() > 2.0 * f64::EPSILON * 0.4 || lb.get(0, 2) != 0.0 {
        failures.push(format!("lower-bound spot {spot} {}", lb.get(0, 2)));
    }
    let max_off = 0.7;
    for l in [max_off, 0.8, 0.99] {
        if lower_bound_matrix(raw.view(), l).unwrap() != identity_matrix(3).unwrap() {
            failures.push(format!("lower_bound(l={l}) != identity"));
        }
    }
    let detail = if failures.is_empty() {
        format!("r=0 identity, 0.5^2 = 0.25, (0.7-0.5)/(1-0.5) = {spot}, l >= max off-diagonal gives identity")
    } else {
        failures.join("; ")
    };
    verdict(failures.is_empty(), detail)
}

fn mean_test(outcome: &GridOutcome, grid_value: f64, metric: Metric) -> f64 {
    outcome.report.row(grid_value).unwrap().mean.test[&metric].unwrap()
}

fn a5_ordinal(outcome: &GridOutcome) -> Vec<(String, Verdict)> {
    let report = &outcome.report;
    let mae_best = report.best_grid_value(Metric::Mae).unwrap();
    let acc_best = report.best_grid_value(Metric::Accuracy).unwrap();
    let baseline = report.config.baseline_value();
    let a = verdict(
        mae_best > 0.0,
        format!("best mean validation MAE at r = {mae_best}"),
    );
    let b = if mae_best == baseline {
        verdict(false, "best r is the baseline, nothing to test")
    } else {
        let p = report.row(mae_best).unwrap().p_values.get(&Metric::Mae).copied();
        let (best, base) = (mean_test(outcome, mae_best, Metric::Mae), mean_test(outcome, baseline, Metric::Mae));
        let pass = p.is_some_and(|p| p < ALPHA) && best < base;
        verdict(
            pass,
            format!("test MAE {best:.4} at r = {mae_best} vs {base:.4} at r = 0, Wilcoxon p = {p:?} (need < {ALPHA})"),
        )
    };
    let c = verdict(
        acc_best <= mae_best,
        format!("accuracy-optimal r = {acc_best}, MAE-optimal r = {mae_best}"),
    );
    vec![("A5a".into(), a), ("A5b".into(), b), ("A5c".into(), c)]
}

fn a6_grouped() -> Verdict {
    let config = ExperimentConfig::load(config_path("grouped.json")).unwrap();
    let outcome = run_grid_with_models(&config, None).unwrap();
    let baseline = config.baseline_value();
    let raw = outcome.prepared.raw_similarity.as_ref().unwrap();
    let max_off = raw
        .indexed_iter()
        .filter(|((i, j), _)| i != j)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    if baseline <= max_off {
        return verdict(false, format!("l_CCE = {baseline} does not exceed max off-diagonal {max_off:.4}"));
    }
    let base_fsa = mean_test(&outcome, baseline, Metric::Fsa);
    let winners: Vec<String> = outcome
        .report
        .rows
        .iter()
        .filter(|r| r.grid_value < baseline)
        .filter(|r| {
            r.mean.test[&Metric::Fsa].is_some_and(|v| v > base_fsa)
                && r.p_values.get(&Metric::Fsa).is_some_and(|&p| p < ALPHA)
        })
        .map(|r| format!("l={} fsa {:.4} p={:.4}", r.grid_value, r.mean.test[&Metric::Fsa].unwrap(), r.p_values[&Metric::Fsa]))
        .collect();
    verdict(
        !winners.is_empty(),
        format!(
            "max off-diagonal {max_off:.4} < l_CCE {baseline}, baseline fsa {base_fsa:.4}; significant wins: [{}]",
            winners.join(", ")
        ),
    )
}

fn a7_representative_classes(outcome: &GridOutcome) -> Verdict {
    let analysis = analyze_distributions(outcome, SPIKE_TARGET_CLASS, DEFAULT_SPIKE_THRESHOLD).unwrap();
    let counts = analysis.mean_spike_counts();
    let inversions = counts.windows(2).filter(|w| w[1] > w[0]).count();
    let series: Vec<String> = counts.iter().map(|c| format!("{c:.1}")).collect();
    verdict(
        inversions <= 1,
        format!("mean spike counts r=0.0..0.9: [{}], {inversions} inversions (max 1)", series.join(", ")),
    )
}

/// Enumerates all 2^n sign assignments with average ranks kept as floats.
fn brute_force_p(diffs: &[f64]) -> Option<f64> {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nz.len();
    if n == 0 {
        return None;
    }
    let ranks: Vec<f64> = nz
        .iter()
        .map(|d| {
            let below = nz.iter().filter(|e| e.abs() < d.abs()).count() as f64;
            let tied = nz.iter().filter(|e| e.abs() == d.abs()).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = (0..n).filter(|&k| nz[k] > 0.0).map(|k| ranks[k]).sum();
    let (mut lower, mut upper) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
        if w <= observed + 1e-9 {
            lower += 1;
        }
        if w >= observed - 1e-9 {
            upper += 1;
        }
    }
    Some((2.0 * lower.min(upper) as f64 / (1u64 << n) as f64).min(1.0))
}

fn a8_wilcoxon_oracle() -> Verdict {
    let mut rng = stream(808);
    let per_n = 100;
    let mut worst = 0.0f64;
    let mut mismatched = 0usize;
    for n in 1..=12 {
        for k in 0..per_n {
            // half the samples on a coarse grid to force ties and zero differences
            let coarse = k % 2 == 0;
            let mut draw = || {
                let v: f64 = rng.gen_range(0.0..1.0);
                if coarse {
                    (v * 5.0).floor() / 5.0
                } else {
                    v
                }
            };
            let a: Vec<f64> = (0..n).map(|_| draw()).collect();
            let b: Vec<f64> = (0..n).map(|_| draw()).collect();
            let samples = PairedSamples::new(a, b).unwrap();
            match (wilcoxon_signed_rank(&samples, ALPHA), brute_force_p(&samples.differences())) {
                (Ok(r), Some(p)) => worst = worst.max((r.p_value - p).abs()),
                (Err(_), None) => {}
                _ => mismatched += 1,
            }
        }
    }
    verdict(
        worst <= A8_TOL && mismatched == 0,
        format!("n = 1..12 x {per_n} samples, max |p - brute force| = {worst:.3e}, {mismatched} definedness mismatches"),
    )
}

fn a9_determinism(first: &GridOutcome) -> Verdict {
    let config = ExperimentConfig::load(config_path("ordinal.json")).unwrap();
    let second = run_grid_with_models(&config, None).unwrap();
    let mut a = first.report.clone();
    let mut b = second.report;
    a.meta.wall_time_seconds = 0.0;
    b.meta.wall_time_seconds = 0.0;
    let (ja, jb) = (a.to_json().unwrap(), b.to_json().unwrap());
    verdict(ja == jb, format!("report JSON {} bytes, identical modulo wall time: {}", ja.len(), ja == jb))
}

fn record(results: &mut Vec<(String, Verdict)>, name: &str, start: Instant, v: Verdict) {
    println!(
        "{name} {} ({:.1}s) {}",
        if v.pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64(),
        v.detail
    );
    results.push((name.to_string(), v));
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    let quick: [Check; 4] = [
        ("A1", a1_cce_equivalence),
        ("A2", a2_gradients),
        ("A3", a3_row_normalized_identities),
        ("A4", a4_matrix_generators),
    ];
    for (name, check) in quick {
        let start = Instant::now();
        record(&mut results, name, start, check());
    }

    let start = Instant::now();
    let config = ExperimentConfig::load(config_path("ordinal.json")).unwrap();
    let ordinal = run_grid_with_models(&config, None).unwrap();
    for (name, v) in a5_ordinal(&ordinal) {
        record(&mut results, &name, start, v);
    }
    let start = Instant::now();
    record(&mut results, "A6", start, a6_grouped());
    let start = Instant::now();
    record(&mut results, "A7", start, a7_representative_classes(&ordinal));
    let start = Instant::now();
    record(&mut results, "A8", start, a8_wilcoxon_oracle());
    let start = Instant::now();
    record(&mut results, "A9", start, a9_determinism(&ordinal));

    let failed: Vec<&str> = results.iter().filter(|(_, v)| !v.pass).map(|(n, _)| n.as_str()).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of {} failed: {}", failed.len(), results.len(), failed.join(", "));
        ExitCode::FAILURE
    }
}
