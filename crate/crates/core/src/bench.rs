//! Benchmark sweeps that emit plot-ready CSV: heavy-hitter margins against
//! the top-down baseline, toy-forest accuracy across bound grids, and
//! calibration tables.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::data::{gen_moons, gen_moons_holdout, MOONS_BOUNDS_GRID};
use crate::forest::{evaluate, train, TrainConfig};
use crate::hh::{
    baseline_sigma, baseline_topdown, binary_search_sigma, mark_heavy_hitters, misclassification_margin, CountTree,
    NodeId,
};
use crate::privacy::EpsilonDelta;
use crate::rng::{stream_rng, Stream};
use crate::threshold::{calibrate, calibrate_simple, CalibrationMode, ThresholdOracleConfig, Variant};
use crate::{Error, Result};

pub const HH_HEADER: &[&str] = &[
    "method",
    "h",
    "rho",
    "n",
    "tau",
    "trials",
    "seed",
    "sigma",
    "noise_ratio",
    "median_margin",
    "mean_margin",
    "max_margin",
    "wall_seconds",
];

pub const FOREST_HEADER: &[&str] = &[
    "method",
    "f1_hi",
    "f2_hi",
    "epsilon",
    "delta",
    "structure_fraction",
    "trees",
    "depth",
    "n",
    "seed",
    "accuracy",
    "wall_seconds",
];

pub const CALIBRATE_HEADER: &[&str] = &["mode", "variant", "epsilon", "delta", "m", "sigma", "delta_gate", "achieved_delta"];

/// Append-only table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl BenchReport {
    pub fn new(header: &'static [&'static str]) -> Self {
        BenchReport { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[&'static str] {
        self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Count tree of height `h` built from `n` root-to-leaf walks that go left
/// with probability `left_bias` at every level.
pub fn path_heavy_tree(n: usize, h: usize, left_bias: f64, seed: u64) -> Result<CountTree> {
    if !(0.0..=1.0).contains(&left_bias) {
        return Err(Error::param(format!("left bias must lie in [0, 1], got {left_bias}")));
    }
    let mut rng = stream_rng(seed, Stream::Bench, 0, h as u128);
    let mut leaves: Vec<NodeId> = (0..n)
        .map(|_| {
            let mut u = NodeId::ROOT;
            for _ in 1..h {
                u = u.child(!rng.random_bool(left_bias));
            }
            u
        })
        .collect();
    leaves.sort_unstable();
    let mut counted: Vec<(NodeId, u64)> = Vec::new();
    for u in leaves {
        match counted.last_mut() {
            Some((v, c)) if *v == u => *c += 1,
            _ => counted.push((u, 1)),
        }
    }
    CountTree::from_leaf_counts(h, counted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HhBenchConfig {
    pub heights: Vec<usize>,
    pub rho: f64,
    pub trials: usize,
    pub n: usize,
    pub tau: f64,
    pub left_bias: f64,
    pub seed: u64,
}

impl Default for HhBenchConfig {
    fn default() -> Self {
        HhBenchConfig { heights: vec![8, 16, 32, 64], rho: 0.5, trials: 100, n: 10_000, tau: 100.0, left_bias: 0.8, seed: 0 }
    }
}

/// Margins of one method at one height.
#[derive(Debug, Clone, PartialEq)]
pub struct HhBenchRun {
    pub method: &'static str,
    pub h: usize,
    pub sigma: f64,
    pub margins: Vec<f64>,
    pub wall_seconds: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Binary-search marking against the top-down baseline at the same ρ on a
/// fixed path-heavy tree per height. The marking runs with lower gate 0
/// (Δ = τ − 1), so only the Gaussian noise differs between the methods.
pub fn bench_hh(cfg: &HhBenchConfig) -> Result<Vec<HhBenchRun>> {
    if cfg.heights.is_empty() || cfg.heights.iter().any(|&h| h == 0 || h > crate::hh::MAX_DEPTH) {
        return Err(Error::param("heights must lie in 1..=126"));
    }
    if !(cfg.rho > 0.0) || cfg.trials == 0 || !(cfg.tau >= 1.0) {
        return Err(Error::param("need rho > 0, trials >= 1 and tau >= 1"));
    }
    let mut runs = Vec::new();
    for &h in &cfg.heights {
        let tree = path_heavy_tree(cfg.n, h, cfg.left_bias, cfg.seed)?;
        let sigma = binary_search_sigma(h, cfg.rho);
        let oracle = ThresholdOracleConfig::new(sigma, cfg.tau, cfg.tau - 1.0, Variant::OneSided)?;

        let start = Instant::now();
        let margins = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let rng = stream_rng(cfg.seed, Stream::Threshold, t as u32, h as u128);
                let heavy = mark_heavy_hitters(&tree, &oracle, rng)?;
                Ok(misclassification_margin(&tree, &heavy, cfg.tau))
            })
            .collect::<Result<Vec<_>>>()?;
        runs.push(HhBenchRun { method: "binary_search", h, sigma, margins, wall_seconds: start.elapsed().as_secs_f64() });

        let start = Instant::now();
        let margins = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(cfg.seed, Stream::Baseline, t as u32, h as u128);
                let heavy = baseline_topdown(&tree, cfg.tau, cfg.rho, &mut rng)?;
                Ok(misclassification_margin(&tree, &heavy, cfg.tau))
            })
            .collect::<Result<Vec<_>>>()?;
        runs.push(HhBenchRun {
            method: "topdown",
            h,
            sigma: baseline_sigma(h, cfg.rho),
            margins,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(runs)
}

pub fn hh_report(cfg: &HhBenchConfig, runs: &[HhBenchRun]) -> BenchReport {
    let mut report = BenchReport::new(HH_HEADER);
    for r in runs {
        let ratio = baseline_sigma(r.h, cfg.rho) / binary_search_sigma(r.h, cfg.rho);
        let mean = r.margins.iter().sum::<f64>() / r.margins.len() as f64;
        let max = r.margins.iter().copied().fold(0.0, f64::max);
        report.push(vec![
            r.method.to_string(),
            r.h.to_string(),
            cfg.rho.to_string(),
            cfg.n.to_string(),
            cfg.tau.to_string(),
            r.margins.len().to_string(),
            cfg.seed.to_string(),
            r.sigma.to_string(),
            ratio.to_string(),
            median(&r.margins).to_string(),
            mean.to_string(),
            max.to_string(),
            format!("{:.6}", r.wall_seconds),
        ]);
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestBenchConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub trees: usize,
    pub depth: usize,
    pub structure_fraction: f64,
    pub n: usize,
    pub n_test: usize,
    pub seeds: Vec<u64>,
    pub grids: Vec<(f64, f64)>,
}

impl Default for ForestBenchConfig {
    fn default() -> Self {
        ForestBenchConfig {
            epsilon: 2.0,
            delta: 1e-6,
            trees: 25,
            depth: 100,
            structure_fraction: 0.75,
            n: 10_000,
            n_test: 10_000,
            seeds: (0..5).collect(),
            grids: MOONS_BOUNDS_GRID.to_vec(),
        }
    }
}

impl ForestBenchConfig {
    /// One-line summary of the run.
    pub fn describe(&self) -> String {
        format!(
            "bench forest: ε={} δ={} trees={} depth={} ε₁={}ε n={} n_test={} seeds={} grids={}",
            self.epsilon,
            self.delta,
            self.trees,
            self.depth,
            self.structure_fraction,
            self.n,
            self.n_test,
            self.seeds.len(),
            self.grids.iter().map(|(a, b)| format!("{a}x{b}")).collect::<Vec<_>>().join(",")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestBenchRun {
    pub bounds: (f64, f64),
    pub seed: u64,
    pub accuracy: f64,
    pub wall_seconds: f64,
}

/// Trains the toy forest on every (grid, seed) pair and scores it on an
/// independent sample.
pub fn bench_forest(cfg: &ForestBenchConfig) -> Result<Vec<ForestBenchRun>> {
    if cfg.grids.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::param("need at least one grid point and one seed"));
    }
    if cfg.grids.iter().any(|&(a, b)| !(a > 1.0 && b > 1.0)) {
        return Err(Error::param("grid bounds must exceed 1"));
    }
    let budget = EpsilonDelta::new(cfg.epsilon, cfg.delta)?;
    let mut runs = Vec::new();
    for &bounds in &cfg.grids {
        for &seed in &cfg.seeds {
            let start = Instant::now();
            let (schema, data) = gen_moons(cfg.n, bounds, seed);
            let (_, test) = gen_moons_holdout(cfg.n_test, bounds, seed);
            let tc = TrainConfig::new(budget)
                .with_trees(cfg.trees)
                .with_depth(cfg.depth)
                .with_structure_fraction(cfg.structure_fraction)
                .with_seed(seed);
            let model = train(&data, &schema, &tc)?;
            let accuracy = evaluate(&model, &test)?.accuracy;
            runs.push(ForestBenchRun { bounds, seed, accuracy, wall_seconds: start.elapsed().as_secs_f64() });
        }
    }
    Ok(runs)
}

pub fn forest_report(cfg: &ForestBenchConfig, runs: &[ForestBenchRun]) -> BenchReport {
    let mut report = BenchReport::new(FOREST_HEADER);
    for r in runs {
        report.push(vec![
            "lumberjack".to_string(),
            r.bounds.0.to_string(),
            r.bounds.1.to_string(),
            cfg.epsilon.to_string(),
            cfg.delta.to_string(),
            cfg.structure_fraction.to_string(),
            cfg.trees.to_string(),
            cfg.depth.to_string(),
            cfg.n.to_string(),
            r.seed.to_string(),
            r.accuracy.to_string(),
            format!("{:.6}", r.wall_seconds),
        ]);
    }
    report
}

/// (σ, Δ, achieved δ) for every combination of the given grids.
pub fn bench_calibrate(
    epsilons: &[f64],
    deltas: &[f64],
    ms: &[u64],
    mode: CalibrationMode,
    variant: Variant,
) -> Result<BenchReport> {
    if epsilons.is_empty() || deltas.is_empty() || ms.is_empty() {
        return Err(Error::param("calibration grids must not be empty"));
    }
    if mode == CalibrationMode::Simple && variant == Variant::TwoSided {
        return Err(Error::param("closed-form calibration is one-sided only"));
    }
    let mut report = BenchReport::new(CALIBRATE_HEADER);
    for &eps in epsilons {
        for &delta in deltas {
            for &m in ms {
                let cal = match mode {
                    CalibrationMode::Simple => calibrate_simple(eps, delta, m)?,
                    CalibrationMode::Tight => calibrate(eps, delta, m, variant, None)?,
                };
                report.push(vec![
                    match mode {
                        CalibrationMode::Simple => "simple",
                        CalibrationMode::Tight => "tight",
                    }
                    .to_string(),
                    variant.as_str().to_string(),
                    eps.to_string(),
                    delta.to_string(),
                    m.to_string(),
                    cal.sigma.to_string(),
                    cal.delta_gate.to_string(),
                    cal.achieved_delta.to_string(),
                ]);
            }
        }
    }
    Ok(report)
}
