//! Timing harness behind `slo-broker bench`.
//!
//! A sweep is a grid of cells; each cell generates one synthetic workload
//! and times one pipeline phase on it. Inputs are prepared outside the timed
//! region, three warm-up runs are discarded, and the remaining repetitions
//! give a mean and (sample) standard deviation in milliseconds.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::codegen::{generate_hcl, TemplateSet};
use crate::model::SloRegistry;
use crate::parser::validate_text;
use crate::selector::{select, SelectOptions, SelectionProblem};
use crate::workload::{generate_workload, synthetic_registry, Connectivity, SyntheticWorkload};

pub const DEFAULT_REPS: usize = 100;
pub const WARMUP_RUNS: usize = 3;
pub const DEFAULT_CELL_CAP: Duration = Duration::from_secs(60);
pub const CSV_HEADER: &str = "phase,n_components,n_slos,connectivity,n_candidates,reps,mean_ms,stddev_ms,timed_out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Parse,
    Select,
    Codegen,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Parse, Phase::Select, Phase::Codegen];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Parse => "parse",
            Phase::Select => "select",
            Phase::Codegen => "codegen",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parse" => Ok(Phase::Parse),
            "select" => Ok(Phase::Select),
            "codegen" => Ok(Phase::Codegen),
            _ => Err(format!("unknown phase \"{s}\" (expected parse, select or codegen)")),
        }
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchCell {
    pub phase: Phase,
    pub workload: SyntheticWorkload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub phase: Phase,
    pub n_components: usize,
    pub n_slos: usize,
    pub connectivity: Connectivity,
    pub n_candidates: usize,
    /// Completed timed repetitions.
    pub reps: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub timed_out: bool,
    /// Combinations scored by the selector (select phase only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combinations: Option<u64>,
    /// Product of the per-component feasible-set sizes (select phase only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_product: Option<u128>,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{}",
            self.phase,
            self.n_components,
            self.n_slos,
            self.connectivity,
            self.n_candidates,
            self.reps,
            self.mean_ms,
            self.stddev_ms,
            self.timed_out
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub reps: usize,
    pub warmup: usize,
    /// Cap on the time spent inside one cell's operation, warm-up included.
    pub cell_cap: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { reps: DEFAULT_REPS, warmup: WARMUP_RUNS, cell_cap: DEFAULT_CELL_CAP }
    }
}

/// Mean and sample standard deviation.
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `op` `warmup + reps` times, stopping early once `cap` is spent.
/// Returns the timed samples in milliseconds and whether the cap was hit.
pub fn time_op(cfg: &BenchConfig, mut op: impl FnMut()) -> (Vec<f64>, bool) {
    let mut t = CellTimer::new(cfg);
    while t.wants_more(cfg) {
        t.run(cfg, &mut op);
    }
    (t.samples, t.timed_out)
}

/// Per-cell bookkeeping, so cells can be run one repetition at a time.
struct CellTimer {
    warmed: usize,
    spent: Duration,
    samples: Vec<f64>,
    timed_out: bool,
}

impl CellTimer {
    fn new(cfg: &BenchConfig) -> Self {
        CellTimer { warmed: 0, spent: Duration::ZERO, samples: Vec::with_capacity(cfg.reps), timed_out: false }
    }

    fn wants_more(&self, cfg: &BenchConfig) -> bool {
        !self.timed_out && self.samples.len() < cfg.reps
    }

    fn run(&mut self, cfg: &BenchConfig, op: &mut impl FnMut()) {
        let t = Instant::now();
        op();
        let dt = t.elapsed();
        self.spent += dt;
        if self.warmed < cfg.warmup {
            self.warmed += 1;
        } else {
            self.samples.push(dt.as_secs_f64() * 1e3);
        }
        if self.spent > cfg.cell_cap && self.samples.len() < cfg.reps {
            self.timed_out = true;
        }
    }
}

/// Pre-built inputs for one cell, so timing excludes generation.
pub struct PreparedCell {
    pub cell: BenchCell,
    registry: SloRegistry,
    workload: crate::workload::Workload,
    slo_text: String,
    plan: Option<crate::selector::SelectionPlan>,
    templates: TemplateSet,
}

impl PreparedCell {
    pub fn new(cell: &BenchCell) -> Self {
        let registry = synthetic_registry();
        let workload = generate_workload(&cell.workload);
        let slo_text = workload.slo_text();
        let plan = match cell.phase {
            Phase::Codegen => {
                let p = SelectionProblem::new(&workload.document, &workload.catalog, &registry, SelectOptions::default())
                    .expect("synthetic workloads resolve");
                Some(select(&p).expect("synthetic workloads are feasible"))
            }
            _ => None,
        };
        PreparedCell { cell: cell.clone(), registry, workload, slo_text, plan, templates: TemplateSet::embedded() }
    }

    /// One execution of the phase under test.
    pub fn run_once(&self) {
        match self.cell.phase {
            Phase::Parse => {
                let out = validate_text(black_box(&self.slo_text), Some(&self.workload.topology), &self.registry);
                assert!(out.1.is_valid, "synthetic document failed validation: {}", out.1);
                black_box(out);
            }
            Phase::Select => {
                black_box(self.select_once().expect("synthetic workloads are feasible"));
            }
            Phase::Codegen => {
                let plan = self.plan.as_ref().expect("prepared");
                let a = generate_hcl(plan, &self.workload.document, &self.templates, "bench").expect("templates cover workloads");
                black_box(a);
            }
        }
    }

    fn select_once(&self) -> Result<crate::selector::SelectionPlan, crate::selector::SelectError> {
        let p = SelectionProblem::new(&self.workload.document, &self.workload.catalog, &self.registry, SelectOptions::default())?;
        select(&p)
    }

    fn record(&self, samples: &[f64], timed_out: bool) -> BenchRecord {
        let (mean_ms, stddev_ms) = mean_stddev(samples);
        let w = &self.cell.workload;
        let (combinations, feasible_product) = if self.cell.phase == Phase::Select {
            match self.select_once() {
                Ok(plan) => (
                    Some(plan.alternatives_considered),
                    Some(plan.feasible_set_sizes.values().fold(1u128, |a, &n| a * n as u128)),
                ),
                Err(_) => (None, None),
            }
        } else {
            (None, None)
        };
        BenchRecord {
            phase: self.cell.phase,
            n_components: w.n_components,
            n_slos: w.n_slos_per_component,
            connectivity: w.connectivity,
            n_candidates: w.n_candidates_per_component,
            reps: samples.len(),
            mean_ms,
            stddev_ms,
            timed_out,
            combinations,
            feasible_product,
        }
    }
}

pub fn run_cell(cell: &BenchCell, cfg: &BenchConfig) -> BenchRecord {
    let prepared = PreparedCell::new(cell);
    let (samples, timed_out) = time_op(cfg, || prepared.run_once());
    prepared.record(&samples, timed_out)
}

/// Cells timed together round-robin by [`run_sweep`].
pub const INTERLEAVE_CHUNK: usize = 12;

/// Runs cells one at a time. Consecutive chunks of [`INTERLEAVE_CHUNK`]
/// cells are interleaved: after each cell's warm-up, repetitions rotate
/// through the chunk so that transient machine noise lands on all of them
/// alike instead of skewing a single cell.
///
/// With `parallel`, cells instead run on separate threads (each cell stays
/// single-threaded); timings then interfere with each other.
pub fn run_sweep(cells: &[BenchCell], cfg: &BenchConfig, parallel: bool) -> Vec<BenchRecord> {
    if parallel {
        return std::thread::scope(|s| {
            let handles: Vec<_> = cells.iter().map(|c| s.spawn(move || run_cell(c, cfg))).collect();
            handles.into_iter().map(|h| h.join().expect("bench cell panicked")).collect()
        });
    }
    let mut out = Vec::with_capacity(cells.len());
    for chunk in cells.chunks(INTERLEAVE_CHUNK) {
        let prepared: Vec<PreparedCell> = chunk.iter().map(PreparedCell::new).collect();
        let mut timers: Vec<CellTimer> = prepared.iter().map(|_| CellTimer::new(cfg)).collect();
        for (p, t) in prepared.iter().zip(&mut timers) {
            while t.warmed < cfg.warmup && !t.timed_out {
                t.run(cfg, &mut || p.run_once());
            }
        }
        while timers.iter().any(|t| t.wants_more(cfg)) {
            for (p, t) in prepared.iter().zip(&mut timers) {
                if t.wants_more(cfg) {
                    t.run(cfg, &mut || p.run_once());
                }
            }
        }
        out.extend(prepared.iter().zip(&timers).map(|(p, t)| p.record(&t.samples, t.timed_out)));
    }
    out
}

/// Least-squares line through `(xs, ys)`: `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Slope of `ln y` against `ln x`; 1 is linear growth, above 1 super-linear.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Swept dimension values; a cell is generated for every combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub components: Vec<usize>,
    pub slos: Vec<usize>,
    pub connectivity: Vec<Connectivity>,
    pub candidates: Vec<usize>,
    pub app_slos: bool,
    pub seed: u64,
}

fn parse_counts(key: &str, v: &str) -> Result<Vec<usize>, String> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("{key}: \"{s}\" is not a count"));
    let out: Vec<usize> = if let Some((range, step)) = v.split_once('/') {
        let (a, b) = range.split_once("..").ok_or_else(|| format!("{key}: expected START..END/STEP"))?;
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step == 0 || a > b {
            return Err(format!("{key}: empty range {v}"));
        }
        (a..=b).step_by(step).collect()
    } else if let Some((a, b)) = v.split_once("..") {
        (num(a)?..=num(b)?).collect()
    } else {
        v.split('|').map(num).collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(format!("{key}: counts must be non-empty and positive"));
    }
    Ok(out)
}

impl SweepSpec {
    /// The default grid for a phase, matching the scaling experiments.
    pub fn default_for(phase: Phase) -> Vec<SweepSpec> {
        let all = Connectivity::ALL.to_vec();
        let hundreds: Vec<usize> = (100..=1000).step_by(100).collect();
        match phase {
            Phase::Parse => vec![
                SweepSpec { components: hundreds, slos: vec![10], connectivity: all.clone(), candidates: vec![2], app_slos: false, seed: 42 },
                SweepSpec {
                    components: vec![100],
                    slos: (10..=100).step_by(10).collect(),
                    connectivity: all,
                    candidates: vec![2],
                    app_slos: false,
                    seed: 42,
                },
            ],
            Phase::Codegen => vec![SweepSpec {
                components: hundreds,
                slos: vec![2],
                connectivity: vec![Connectivity::Low],
                candidates: vec![3],
                app_slos: false,
                seed: 42,
            }],
            // One SLO per component keeps most candidates feasible, so the
            // sweep measures enumeration rather than pruning.
            Phase::Select => vec![SweepSpec {
                components: vec![2, 3, 4],
                slos: vec![1],
                connectivity: vec![Connectivity::Low],
                candidates: (2..=10).collect(),
                app_slos: true,
                seed: 42,
            }],
        }
    }

    pub fn cells(&self, phase: Phase) -> Vec<BenchCell> {
        let mut out = Vec::new();
        for &c in &self.components {
            for &s in &self.slos {
                for &conn in &self.connectivity {
                    for &k in &self.candidates {
                        out.push(BenchCell {
                            phase,
                            workload: SyntheticWorkload::new(c, s, conn, k, self.seed).with_app_slos(self.app_slos),
                        });
                    }
                }
            }
        }
        out
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    /// `components=100..1000/100,slos=10,connectivity=low|mid|high,candidates=2..10,app=on,seed=7`.
    /// Omitted keys default to 10 components, 10 SLOs, low connectivity,
    /// 5 candidates, no application SLOs, seed 42.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut spec = SweepSpec {
            components: vec![10],
            slos: vec![10],
            connectivity: vec![Connectivity::Low],
            candidates: vec![5],
            app_slos: false,
            seed: 42,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got \"{part}\""))?;
            match k.trim() {
                "components" => spec.components = parse_counts(k, v)?,
                "slos" => spec.slos = parse_counts(k, v)?,
                "candidates" => spec.candidates = parse_counts(k, v)?,
                "connectivity" => {
                    spec.connectivity = v.split('|').map(|c| c.trim().parse()).collect::<Result<_, _>>()?;
                }
                "app" => {
                    spec.app_slos = match v.trim() {
                        "on" | "true" | "yes" => true,
                        "off" | "false" | "no" => false,
                        other => return Err(format!("app: expected on/off, got \"{other}\"")),
                    }
                }
                "seed" => spec.seed = v.trim().parse().map_err(|_| format!("seed: \"{v}\" is not an integer"))?,
                other => return Err(format!("unknown sweep key \"{other}\"")),
            }
        }
        Ok(spec)
    }
}

/// Human-readable growth diagnostics for a finished sweep.
///
/// For parse and codegen, each group of records that differ in exactly one
/// of components/SLOs gets a linear fit; for select, the log-log slope of
/// time against candidates per component count.
pub fn diagnostics(records: &[BenchRecord]) -> Vec<String> {
    let mut lines = Vec::new();
    let done: Vec<&BenchRecord> = records.iter().filter(|r| !r.timed_out && r.reps > 0).collect();
    let mut groups: std::collections::BTreeMap<(Phase, &str, usize, Connectivity, usize), Vec<(f64, f64)>> = Default::default();
    for r in &done {
        match r.phase {
            Phase::Parse | Phase::Codegen => {
                groups.entry((r.phase, "components", r.n_slos, r.connectivity, r.n_candidates)).or_default().push((r.n_components as f64, r.mean_ms));
                groups.entry((r.phase, "slos", r.n_components, r.connectivity, r.n_candidates)).or_default().push((r.n_slos as f64, r.mean_ms));
            }
            Phase::Select => {
                groups.entry((r.phase, "candidates", r.n_components, r.connectivity, r.n_slos)).or_default().push((r.n_candidates as f64, r.mean_ms));
            }
        }
    }
    for ((phase, dim, fixed, conn, _), pts) in groups {
        if pts.len() < 3 {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let fixed_name = if dim == "components" { "slos" } else { "components" };
        if phase == Phase::Select {
            lines.push(format!(
                "select vs candidates ({fixed_name}={fixed}, {conn}): log-log slope {:.2}",
                log_log_slope(&xs, &ys)
            ));
        } else {
            let (slope, _, r2) = linear_fit(&xs, &ys);
            lines.push(format!("{phase} vs {dim} ({fixed_name}={fixed}, {conn}): {slope:.4} ms/unit, R² {r2:.3}"));
        }
    }
    let timed_out = records.iter().filter(|r| r.timed_out).count();
    if timed_out > 0 {
        lines.push(format!("{timed_out} cell(s) hit the time cap"));
    }
    lines
}
