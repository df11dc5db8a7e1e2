//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance` runs everything; numeric arguments select
//! criteria, e.g. `cargo test --test acceptance -- 4 5`.

use std::alloc::{GlobalAlloc, Layout, System};
use std::fs::File;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use dp_lumberjack::bench::{bench_forest, bench_hh, median, path_heavy_tree, ForestBenchConfig, HhBenchConfig};
use dp_lumberjack::data::{gen_moons, gen_moons_holdout, read_csv, split_indices};
use dp_lumberjack::forest::{deserialize, evaluate, predict, serialize, train, train_with_trees, TrainConfig};
use dp_lumberjack::hh::{
    baseline_sigma, binary_search_sigma, brute_force_heavy, mark_heavy_hitters, mark_with_oracle, misclassification_margin,
    CountTree, NodeId,
};
use dp_lumberjack::privacy::{gaussian_tight_delta, max_rho_for, zcdp_to_dp, EpsilonDelta};
use dp_lumberjack::rng::{stream_rng, Stream};
use dp_lumberjack::threshold::{
    calibrate_simple, calibrate_tight, check_threshold_two_sided, forest_delta, Decision, GaussianSparseThreshold,
    InstrumentedOracle, ThresholdOracleConfig, Variant,
};
use dp_lumberjack::tree::FeatureSchema;
use flate2::read::GzDecoder;
use rand::Rng;

struct CountingAlloc;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

fn record_grow(bytes: usize) {
    let now = CURRENT.fetch_add(bytes, Ordering::Relaxed) + bytes;
    PEAK.fetch_max(now, Ordering::Relaxed);
}

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            record_grow(layout.size());
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            if new_size >= layout.size() {
                record_grow(new_size - layout.size());
            } else {
                CURRENT.fetch_sub(layout.size() - new_size, Ordering::Relaxed);
            }
        }
        p
    }
}

#[global_allocator]
static GLOBAL: CountingAlloc = CountingAlloc;

/// Peak heap growth above the level at entry, and the result.
fn peak_during<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let base = CURRENT.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let out = f();
    (out, PEAK.load(Ordering::Relaxed) - base)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(limit: Duration, start: Instant) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.1}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn random_tree<R: Rng>(rng: &mut R, h: usize, n: usize) -> CountTree {
    let bias: f64 = rng.random_range(0.5..0.95);
    let leaves: Vec<(NodeId, u64)> = (0..n)
        .map(|_| {
            let mut u = NodeId::ROOT;
            for _ in 1..h {
                u = u.child(!rng.random_bool(bias));
            }
            (u, 1)
        })
        .collect();
    CountTree::from_leaf_counts(h, leaves).unwrap()
}

fn c1_touches() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(1, Stream::Bench, 1, 0);
    let (mut violations, mut worst) = (0usize, 0u32);
    for h in 1..=20usize {
        let bound = 1 + h.ilog2();
        for t in 0..50 {
            let n = rng.random_range(1..=500);
            let tree = random_tree(&mut rng, h, n);
            let tau = rng.random_range(1.0..40.0);
            let cfg = ThresholdOracleConfig::new(rng.random_range(0.5..10.0), tau, (tau - 1.0) * 0.5, Variant::OneSided).unwrap();
            let mut oracle = InstrumentedOracle::new(GaussianSparseThreshold::new(cfg, stream_rng(1, Stream::Threshold, t, h as u128)));
            mark_with_oracle(&tree, &mut oracle);
            for leaf in tree.layer(h - 1) {
                let touches = oracle.touches_on_path(leaf.label);
                worst = worst.max(touches.saturating_sub(bound));
                violations += usize::from(touches > bound);
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    outcome(violations == 0 && fast, format!("violations={violations} worst_excess={worst} time {time}"))
}

fn c2_noiseless() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(2, Stream::Bench, 2, 0);
    let mut mismatches = 0;
    for t in 0..200u32 {
        let h = rng.random_range(1..=20);
        let n = rng.random_range(1..=1000);
        let tree = random_tree(&mut rng, h, n);
        let gate = rng.random_range(0..120) as f64 / 4.0;
        let tau = 1.0 + gate;
        let cfg = ThresholdOracleConfig::noiseless(tau, gate, Variant::OneSided).unwrap();
        let heavy = mark_heavy_hitters(&tree, &cfg, stream_rng(2, Stream::Threshold, t, 0)).unwrap();
        mismatches += usize::from(heavy != brute_force_heavy(&tree, tau));
    }
    let (fast, time) = within(Duration::from_secs(30), start);
    outcome(mismatches == 0 && fast, format!("mismatching trees={mismatches}/200 time {time}"))
}

fn c3_concentration() -> Outcome {
    let start = Instant::now();
    let (n, h, beta) = (2000usize, 16usize, 0.05);
    let m = (h as f64 + 1.0).log2().ceil() as u64;
    let cal = calibrate_simple(0.9, 1e-6, m).unwrap();
    let tau = 1.0 + cal.delta_gate;
    let tree = path_heavy_tree(n, h, 0.8, 3).unwrap();
    let alpha = cal.sigma * (2.0 * (2.0 * n as f64 * m as f64 / beta).ln()).sqrt();
    let cfg = ThresholdOracleConfig::new(cal.sigma, tau, cal.delta_gate, Variant::OneSided).unwrap();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let heavy = mark_heavy_hitters(&tree, &cfg, stream_rng(3, Stream::Threshold, t, 0)).unwrap();
        let margin = misclassification_margin(&tree, &heavy, tau);
        worst = worst.max(margin);
        failures += usize::from(margin > alpha);
    }
    let near = tree.iter().filter(|node| (node.count as f64 - tau).abs() <= alpha).count();
    let (fast, time) = within(Duration::from_secs(120), start);
    outcome(
        failures <= 10 && fast,
        format!(
            "m={m} sigma={:.3} alpha={alpha:.2} failing trials={failures}/100 worst margin={worst:.2} nodes within alpha of tau={near} time {time}",
            cal.sigma
        ),
    )
}

fn c4_accounting() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();

    let mut worst_rt: f64 = 0.0;
    for &eps in &[0.1, 0.5, 1.0, 2.0, 4.0] {
        for &delta in &[1e-3, 1e-5, 1e-7, 1e-9] {
            let rho = max_rho_for(EpsilonDelta::new(eps, delta).unwrap()).unwrap();
            let back = zcdp_to_dp(rho, eps).unwrap();
            worst_rt = worst_rt.max(((back - delta) / delta).abs());
        }
    }
    let a = worst_rt <= 1e-6;
    notes.push(format!("(a) roundtrip rel err {worst_rt:.1e}"));

    let mut worst_gauss: f64 = 0.0;
    for &m in &[1u64, 7, 210] {
        for &sigma in &[0.5, 2.0, 10.0, 50.0] {
            for &eps in &[0.1, 0.5, 1.0, 2.0] {
                let g = gaussian_tight_delta(sigma / (m as f64).sqrt(), eps);
                let f = forest_delta(sigma, 40.0 * sigma, eps, m);
                if g > 0.0 {
                    worst_gauss = worst_gauss.max(((f - g) / g).abs());
                } else {
                    worst_gauss = worst_gauss.max(f);
                }
            }
        }
    }
    let b = worst_gauss <= 1e-9;
    notes.push(format!("(b) ratio-40 vs Gaussian rel err {worst_gauss:.1e}"));

    let (mut c, mut d) = (true, true);
    let mut worst_ratio: f64 = 0.0;
    for &eps in &[0.1, 0.5, 0.9] {
        for &delta in &[1e-6, 1e-8] {
            for &m in &[7u64, 210, 1000] {
                let simple = calibrate_simple(eps, delta, m).unwrap();
                c &= forest_delta(simple.sigma, simple.delta_gate, eps, m) <= delta;
                let tight = calibrate_tight(eps, delta, m).unwrap();
                d &= tight.sigma <= simple.sigma && tight.achieved_delta <= delta && tight.achieved_delta >= 0.999 * delta;
                worst_ratio = worst_ratio.max(tight.sigma / simple.sigma);
            }
        }
    }
    notes.push(format!("(c) closed form feasible {c}"));
    notes.push(format!("(d) tight <= simple and achieved in [0.999δ, δ] {d} (max σ ratio {worst_ratio:.3})"));
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(a && b && c && d && fast, format!("{} time {time}", notes.join("; ")))
}

fn c5_two_sided() -> Outcome {
    let start = Instant::now();
    let (tau, gate) = (10.0, 3.0);
    let cfg = ThresholdOracleConfig::new(1.0, tau, gate, Variant::TwoSided).unwrap();
    let mut rng = stream_rng(5, Stream::Bench, 5, 0);
    let (mut bad_top, mut bad_bottom) = (0, 0);
    let top = (tau + gate + 2.0) as u64;
    for count in 0..=top {
        for _ in 0..10_000 {
            let d = check_threshold_two_sided(count, &cfg, &mut rng);
            if count as f64 <= tau - gate - 1.0 && d == Decision::Top {
                bad_top += 1;
            }
            if count as f64 >= tau + gate + 1.0 && d == Decision::Bottom {
                bad_bottom += 1;
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(60), start);
    outcome(
        bad_top == 0 && bad_bottom == 0 && fast,
        format!("tau={tau} gate={gate} counts 0..={top}: Top below gate={bad_top} Bottom above gate={bad_bottom} time {time}"),
    )
}

fn c6_baseline() -> Outcome {
    let start = Instant::now();
    let (h, rho) = (64usize, 0.5);
    let ratio = baseline_sigma(h, rho) / binary_search_sigma(h, rho);
    let expected = 8.0 / 7f64.sqrt();
    let cfg = HhBenchConfig { heights: vec![h], rho, trials: 100, n: 10_000, tau: 100.0, left_bias: 0.8, seed: 6 };
    let runs = bench_hh(&cfg).unwrap();
    let ours = median(&runs.iter().find(|r| r.method == "binary_search").unwrap().margins);
    let base = median(&runs.iter().find(|r| r.method == "topdown").unwrap().margins);
    let (fast, time) = within(Duration::from_secs(120), start);
    outcome(
        (ratio - expected).abs() < 1e-12 && ours < base && fast,
        format!("noise ratio {ratio:.6} (expected {expected:.6}); median margin {ours:.2} vs baseline {base:.2}; time {time}"),
    )
}

fn c7_moons() -> Outcome {
    let start = Instant::now();
    let cfg = ForestBenchConfig::default();
    let runs = bench_forest(&cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &bounds in &cfg.grids {
        let acc: Vec<f64> = runs.iter().filter(|r| r.bounds == bounds).map(|r| r.accuracy).collect();
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        pass &= mean >= 0.90;
        parts.push(format!("{}x{}: {mean:.4}", bounds.0, bounds.1));
    }
    let (fast, time) = within(Duration::from_secs(600), start);
    outcome(pass && fast, format!("{}; mean accuracy {}; time {time}", cfg.describe(), parts.join(", ")))
}

fn c8_adult() -> Outcome {
    let start = Instant::now();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = FeatureSchema::load(dir.join("adult.schema.json")).unwrap();
    let (data, _) = read_csv(GzDecoder::new(File::open(dir.join("adult.csv.gz")).unwrap()), &schema).unwrap();
    let mut accs = Vec::new();
    for seed in 0..5 {
        let (tr, _va, te) = split_indices(data.len(), 0.8, 0.1, seed).unwrap();
        let cfg = TrainConfig::new(EpsilonDelta::new(2.0, 1e-6).unwrap()).with_trees(30).with_depth(100).with_seed(seed);
        let model = train(&data.select(&tr), &schema, &cfg).unwrap();
        accs.push(evaluate(&model, &data.select(&te)).unwrap().accuracy);
    }
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let (fast, time) = within(Duration::from_secs(900), start);
    outcome(
        mean >= 0.771 && fast,
        format!("rows={} mean test accuracy {mean:.4} over seeds {accs:.4?} (bar 0.771); time {time}", data.len()),
    )
}

fn c9_scaling() -> Outcome {
    let start = Instant::now();
    let cfg = TrainConfig::new(EpsilonDelta::new(2.0, 1e-6).unwrap()).with_trees(10).with_depth(50).with_seed(9);
    let mut stats = Vec::new();
    for n in [10_000usize, 100_000] {
        let (schema, data) = gen_moons(n, (5.0, 4.0), 9);
        let t0 = Instant::now();
        let ((_, traces), peak) = peak_during(|| train_with_trees(&data, &schema, &cfg).unwrap());
        let secs = t0.elapsed().as_secs_f64();
        let nodes: usize = traces.iter().map(|t| t.stored_nodes).sum();
        stats.push((n, secs, peak, nodes));
    }
    let time_ratio = stats[1].1 / stats[0].1;
    let mem_ratio = stats[1].2 as f64 / stats[0].2 as f64;
    let (fast, time) = within(Duration::from_secs(600), start);
    outcome(
        time_ratio <= 15.0 && mem_ratio <= 12.0 && fast,
        format!(
            "n=1e4: {:.2}s {:.1} MB {} nodes; n=1e5: {:.2}s {:.1} MB {} nodes; time ratio {time_ratio:.2} (<=15), memory ratio {mem_ratio:.2} (<=12); time {time}",
            stats[0].1,
            stats[0].2 as f64 / 1e6,
            stats[0].3,
            stats[1].1,
            stats[1].2 as f64 / 1e6,
            stats[1].3
        ),
    )
}

fn c10_determinism() -> Outcome {
    let start = Instant::now();
    let (schema, data) = gen_moons(5000, (50.0, 40.0), 10);
    let cfg = TrainConfig::new(EpsilonDelta::new(2.0, 1e-6).unwrap()).with_trees(10).with_depth(100).with_seed(10);
    let a = serialize(&train(&data, &schema, &cfg).unwrap());
    let b = serialize(&train(&data, &schema, &cfg).unwrap());
    let model = deserialize(&a).unwrap();
    let original = train(&data, &schema, &cfg).unwrap();
    let (_, rows) = gen_moons_holdout(1000, (50.0, 40.0), 10);
    let same = (0..rows.len()).all(|i| predict(&model, &rows.row(i)) == predict(&original, &rows.row(i)));
    let (fast, time) = within(Duration::from_secs(120), start);
    outcome(
        a == b && same && serialize(&model) == a && fast,
        format!("identical bytes {} ({} bytes); identical predictions on 1000 rows {same}; time {time}", a == b, a.len()),
    )
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "sensitivity bound on oracle touches", c1_touches),
        (2, "noiseless marking equals brute force", c2_noiseless),
        (3, "error concentration", c3_concentration),
        (4, "accounting numerics", c4_accounting),
        (5, "two-sided deterministic error", c5_two_sided),
        (6, "baseline dominance", c6_baseline),
        (7, "toy-example utility", c7_moons),
        (8, "Adult desk-scale accuracy", c8_adult),
        (9, "training scaling", c9_scaling),
        (10, "determinism and serialization", c10_determinism),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let result = std::panic::catch_unwind(run);
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("panicked: {}", e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())),
        };
        failed += usize::from(!pass);
        println!("{} criterion {id} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
