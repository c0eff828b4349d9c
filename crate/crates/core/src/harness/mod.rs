//! End-to-end runs: generate, solve, compare against exact oracles, report.

mod generate;

pub use generate::{generate, instance_from_json, instance_to_json, Family, GenParams, InstanceFile, LinkMode, LinkRecord};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::decompose::{reduce_to_k_wide_with, ReductionResult};
use crate::error::{ensure, Result, TapError};
use crate::exact::brute_force_opt;
use crate::instance::{is_feasible, shadow_complete, LinkSet, TapInstance, Vertex};
use crate::lp::{build_cut_lp, solve_cg_lp, solve_lp};
use crate::rounding::{round_k_wide_with, Arm, KWideRounding, RoundingInner};
use crate::scalar::{Rational, Scalar};
use crate::weighted::{g_delta_bound, weighted_round_k_wide, WeightedReport, WeightedRounding};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    KWideOnly,
    FullReduction,
    Weighted,
}

impl std::str::FromStr for Mode {
    type Err = TapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k-wide-only" => Ok(Mode::KWideOnly),
            "full-reduction" => Ok(Mode::FullReduction),
            "weighted" => Ok(Mode::Weighted),
            _ => Err(TapError::Input(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub k: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Compute OPT by brute force when n is at most this.
    pub oracle_bound: usize,
    /// Also solve the cut LP and the CG-LP for the report.
    pub lp_values: bool,
    pub limits: Limits,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        let limits = Limits::default();
        PipelineOptions {
            k: 2,
            mode: Mode::FullReduction,
            seed: 0,
            oracle_bound: limits.oracle_max_vertices,
            lp_values: false,
            limits,
        }
    }
}

/// One line of the JSONL report stream. Rationals are strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub id: String,
    pub family: String,
    pub seed: u64,
    pub mode: Mode,
    pub n: usize,
    pub links: usize,
    pub k: usize,
    pub delta: String,
    /// Vertex the k-wide rounding was rooted at; none for the reduction.
    pub root: Option<Vertex>,
    pub opt: Option<String>,
    pub cut_lp: Option<String>,
    pub cg_lp: Option<String>,
    pub kwide_lp: Option<String>,
    pub cg_arm: Option<String>,
    pub rewire_arm: Option<String>,
    pub chosen: Option<Arm>,
    pub matching_size: Option<usize>,
    pub rewirings: Option<usize>,
    pub reduction_nu: Option<String>,
    pub learned_cuts: Option<usize>,
    pub final_size: usize,
    pub final_cost: String,
    pub ratio: Option<f64>,
    pub g_delta: Option<f64>,
    pub weighted: Option<WeightedReport>,
    pub feasible: bool,
    pub solution: Vec<(Vertex, Vertex)>,
    pub wall_ms: u64,
}

/// Everything a run produced, for callers that check more than the report.
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub report: RunReport,
    /// Final solution in the input instance's link ids.
    pub solution: LinkSet,
    /// The shadow-completed instance the algorithms ran on.
    pub closed: TapInstance,
    pub rounding: Option<KWideRounding>,
    pub weighted: Option<WeightedRounding>,
    pub reduction: Option<ReductionResult>,
}

/// Smallest vertex among those of minimum width.
pub fn best_root(inst: &TapInstance) -> (Vertex, usize) {
    let tree = inst.tree();
    (0..tree.n())
        .map(|v| (v, tree.rooted(v).map(|r| r.width()).unwrap_or(usize::MAX)))
        .min_by_key(|&(v, w)| (w, v))
        .expect("trees have a vertex")
}

pub fn run_pipeline(inst: &TapInstance, opts: &PipelineOptions) -> Result<PipelineOutcome> {
    run_pipeline_named(inst, opts, "instance", "input")
}

pub fn run_pipeline_named(inst: &TapInstance, opts: &PipelineOptions, id: &str, family: &str) -> Result<PipelineOutcome> {
    let start = Instant::now();
    let closed = shadow_complete(inst);
    let (root, width) = best_root(&closed);
    let k_wide = width <= opts.k;
    let mut out = PipelineOutcome {
        report: RunReport {
            id: id.to_string(),
            family: family.to_string(),
            seed: opts.seed,
            mode: opts.mode,
            n: inst.n(),
            links: inst.link_count(),
            k: opts.k,
            delta: "1".into(),
            root: None,
            opt: None,
            cut_lp: None,
            cg_lp: None,
            kwide_lp: None,
            cg_arm: None,
            rewire_arm: None,
            chosen: None,
            matching_size: None,
            rewirings: None,
            reduction_nu: None,
            learned_cuts: None,
            final_size: 0,
            final_cost: "0".into(),
            ratio: None,
            g_delta: None,
            weighted: None,
            feasible: false,
            solution: Vec::new(),
            wall_ms: 0,
        },
        solution: LinkSet::new(),
        closed: closed.clone(),
        rounding: None,
        weighted: None,
        reduction: None,
    };
    let r = &mut out.report;
    let sol_closed: LinkSet = if inst.tree().edge_count() == 0 {
        LinkSet::new()
    } else if opts.mode == Mode::KWideOnly && !k_wide {
        return Err(TapError::Input(format!("instance is {width}-wide at best, not {}-wide", opts.k)));
    } else if k_wide && opts.mode == Mode::Weighted {
        let w = weighted_round_k_wide(&closed, root, opts.k, &opts.limits)?;
        r.root = Some(root);
        r.kwide_lp = Some(w.lp.objective.to_string());
        r.cg_arm = Some(closed.total_cost(&w.cg_arm).to_string());
        r.rewire_arm = Some(closed.total_cost(&w.rewiring.derandomization.state.result).to_string());
        r.chosen = Some(w.chosen);
        r.matching_size = Some(w.rewiring.derandomization.certificate.matching.len());
        r.rewirings = Some(w.rewiring.derandomization.state.matching.len());
        r.weighted = Some(w.report());
        let s = w.solution.clone();
        out.weighted = Some(w);
        s
    } else if k_wide {
        let k = round_k_wide_with(&closed, root, opts.k, &opts.limits)?;
        r.root = Some(root);
        let rep = k.report(&closed);
        r.kwide_lp = Some(rep.lp_value);
        r.cg_arm = Some(rep.cg_arm_cost);
        r.rewire_arm = Some(rep.rewire_arm_cost);
        r.chosen = Some(rep.chosen);
        r.matching_size = Some(rep.matching_size);
        r.rewirings = Some(rep.rewirings);
        let s = k.solution.clone();
        out.rounding = Some(k);
        s
    } else {
        let inner = RoundingInner { limits: opts.limits.clone() };
        let red = reduce_to_k_wide_with(&closed, opts.k, &inner, &opts.limits)?;
        r.reduction_nu = Some(red.nu.to_string());
        r.learned_cuts = Some(red.cuts.len());
        let s = red.solution.clone();
        out.reduction = Some(red);
        s
    };
    ensure!(is_feasible(&closed, &sol_closed), "pipeline produced a non-cover");
    let solution = closed.map_to_original(&sol_closed);
    ensure!(is_feasible(inst, &solution), "pipeline solution is infeasible on the input");
    let cost = inst.total_cost(&solution);
    ensure!(cost <= closed.total_cost(&sol_closed), "mapping back to input links raised the cost");
    if !inst.is_unit_cost() {
        let costs: Vec<&Rational> = inst.links().iter().map(|l| &l.cost).collect();
        let lo = costs.iter().min().unwrap();
        let hi = costs.iter().max().unwrap();
        let delta = *hi / *lo;
        r.g_delta = g_delta_bound(&delta).ok();
        r.delta = delta.to_string();
    }
    if opts.lp_values {
        r.cut_lp = Some(solve_lp(&build_cut_lp(inst))?.value.to_string());
        if inst.n() <= opts.limits.cg_max_vertices {
            r.cg_lp = Some(solve_cg_lp(inst, &opts.limits)?.value.to_string());
        }
    }
    if inst.n() <= opts.oracle_bound {
        let opt = brute_force_opt(inst, &inst.tree().full_edge_set())?;
        ensure!(opt.value <= cost, "brute force OPT {} above a feasible cost {cost}", opt.value);
        if opt.value.is_pos() {
            r.ratio = Some((&cost / &opt.value).to_f64());
        } else {
            r.ratio = Some(1.0);
        }
        r.opt = Some(opt.value.to_string());
    }
    r.final_size = solution.len();
    r.final_cost = cost.to_string();
    r.feasible = true;
    r.solution = solution.iter().map(|&id| (inst.link(id).u, inst.link(id).v)).collect();
    r.wall_ms = start.elapsed().as_millis() as u64;
    out.solution = solution;
    Ok(out)
}

/// One manifest entry; `count` expands to seeds seed, seed+1, ….
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(flatten)]
    pub gen: GenParams,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub count: usize,
}

fn default_mode() -> Mode {
    Mode::FullReduction
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| TapError::Input(format!("manifest: {e}")))
    }

    /// (id, family, params, mode, seed) per run, in manifest order.
    pub fn runs(&self) -> Vec<(String, ManifestEntry, u64)> {
        let mut out = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            for c in 0..e.count {
                let seed = e.seed + c as u64;
                let base = e.id.clone().unwrap_or_else(|| format!("e{i}"));
                let id = if e.count == 1 { base } else { format!("{base}-{seed}") };
                out.push((id, e.clone(), seed));
            }
        }
        out
    }
}

/// A failed batch entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub id: String,
    pub family: String,
    pub seed: u64,
    pub error: String,
    pub exit_code: i32,
}

pub type BatchLine = std::result::Result<RunReport, RunFailure>;

/// Worker count from TAP_WORKERS, else rayon's default.
pub fn workers_from_env() -> Option<usize> {
    std::env::var("TAP_WORKERS").ok().and_then(|v| v.parse().ok()).filter(|&w| w > 0)
}

pub fn batch(manifest: &Manifest, base: &PipelineOptions, workers: Option<usize>) -> Vec<BatchLine> {
    let runs = manifest.runs();
    let job = |(id, e, seed): &(String, ManifestEntry, u64)| -> BatchLine {
        let family = e.gen.family.name().to_string();
        let fail = |err: TapError| RunFailure {
            id: id.clone(),
            family: family.clone(),
            seed: *seed,
            error: err.to_string(),
            exit_code: err.exit_code(),
        };
        let inst = generate(&e.gen, *seed).map_err(fail)?;
        let opts = PipelineOptions { k: e.gen.k, mode: e.mode, seed: *seed, ..base.clone() };
        run_pipeline_named(&inst, &opts, id, &family).map(|o| o.report).map_err(fail)
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build().expect("thread pool");
    pool.install(|| runs.par_iter().map(job).collect())
}

pub fn to_jsonl(lines: &[BatchLine]) -> String {
    let mut s = String::new();
    for l in lines {
        let v = match l {
            Ok(r) => serde_json::to_string(r),
            Err(f) => serde_json::to_string(f),
        };
        s.push_str(&v.expect("plain data"));
        s.push('\n');
    }
    s
}

/// Columns of the per-family CSV summary, in order.
pub const CSV_COLUMNS: [&str; 8] =
    ["family", "runs", "failures", "with_opt", "mean_ratio", "max_ratio", "mean_final_cost", "max_n"];

/// Per-family aggregates. Deterministic: no timings.
pub fn csv_summary(lines: &[BatchLine]) -> String {
    use std::collections::BTreeMap;
    #[derive(Default)]
    struct Agg {
        runs: usize,
        failures: usize,
        ratios: Vec<f64>,
        cost: f64,
        ok: usize,
        max_n: usize,
    }
    let mut by: BTreeMap<String, Agg> = BTreeMap::new();
    for l in lines {
        match l {
            Ok(r) => {
                let a = by.entry(r.family.clone()).or_default();
                a.runs += 1;
                a.ok += 1;
                a.max_n = a.max_n.max(r.n);
                a.cost += r.final_cost.parse::<Rational>().map(|c| c.to_f64()).unwrap_or(f64::NAN);
                a.ratios.extend(r.ratio);
            }
            Err(f) => {
                let a = by.entry(f.family.clone()).or_default();
                a.runs += 1;
                a.failures += 1;
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for (fam, a) in by {
        let mean = |s: f64, n: usize| if n == 0 { String::new() } else { format!("{:.6}", s / n as f64) };
        let max_ratio = a.ratios.iter().copied().fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        w.write_record([
            fam,
            a.runs.to_string(),
            a.failures.to_string(),
            a.ratios.len().to_string(),
            mean(a.ratios.iter().sum(), a.ratios.len()),
            max_ratio.map(|m| format!("{m:.6}")).unwrap_or_default(),
            mean(a.cost, a.ok),
            a.max_n.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Columns of the per-run CSV, in order.
pub const REPORT_COLUMNS: [&str; 14] = [
    "id", "family", "seed", "mode", "n", "links", "k", "delta", "opt", "kwide_lp", "cg_arm", "rewire_arm", "final_cost",
    "ratio",
];

pub fn reports_to_csv(reports: &[RunReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS).expect("in-memory write");
    for r in reports {
        let mode = serde_json::to_value(r.mode).expect("plain data");
        w.write_record([
            r.id.clone(),
            r.family.clone(),
            r.seed.to_string(),
            mode.as_str().unwrap_or_default().to_string(),
            r.n.to_string(),
            r.links.to_string(),
            r.k.to_string(),
            r.delta.clone(),
            r.opt.clone().unwrap_or_default(),
            r.kwide_lp.clone().unwrap_or_default(),
            r.cg_arm.clone().unwrap_or_default(),
            r.rewire_arm.clone().unwrap_or_default(),
            r.final_cost.clone(),
            r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
