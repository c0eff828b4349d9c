//! `tap`: generate instances, solve them, run manifests, check solutions.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tap_core::decompose::decompose;
use tap_core::harness::{
    batch, csv_summary, generate, instance_from_json, instance_to_json, reports_to_csv, run_pipeline_named,
    to_jsonl, workers_from_env, Family, GenParams, LinkMode, Manifest, Mode, PipelineOptions,
};
use tap_core::instance::{is_feasible, LinkSet};
use tap_core::{Limits, TapError, TapInstance};

#[derive(Parser)]
#[command(name = "tap", version, about = "Tree augmentation: generate, solve, benchmark")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Out {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated instance as JSON.
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// all, leaf-pairs or density:<p>
        #[arg(long, default_value = "all", value_parser = parse_links)]
        links: LinkMode,
        #[arg(long)]
        delta: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance file and print a report.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "full-reduction")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = Limits::default().oracle_max_vertices)]
        oracle_bound: usize,
        #[arg(long, value_enum, default_value = "json")]
        out: Out,
        /// Also solve the cut LP and CG-LP for the report.
        #[arg(long)]
        lp_values: bool,
        /// Write the final LP model in LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Write the γ-light / ζ-heavy decomposition as JSON.
        #[arg(long)]
        dump_decomposition: Option<PathBuf>,
    },
    /// Run a manifest; JSONL reports to stdout or --jsonl, summary to --csv.
    Batch {
        manifest: PathBuf,
        #[arg(long)]
        jsonl: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = Limits::default().oracle_max_vertices)]
        oracle_bound: usize,
    },
    /// Check that a solution (JSON list of [u, v] pairs) covers the tree.
    Verify { instance: PathBuf, solution: PathBuf },
}

fn parse_family(s: &str) -> Result<Family, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown family {s:?}"))
}

fn parse_links(s: &str) -> Result<LinkMode, String> {
    match s {
        "all" => Ok(LinkMode::All),
        "leaf-pairs" => Ok(LinkMode::LeafPairs),
        _ => s
            .strip_prefix("density:")
            .and_then(|p| p.parse().ok())
            .map(|p| LinkMode::Density { p })
            .ok_or_else(|| format!("bad link mode {s:?}")),
    }
}

fn read(path: &PathBuf) -> Result<String, TapError> {
    fs::read_to_string(path).map_err(|e| TapError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, text: &str) -> Result<(), TapError> {
    fs::write(path, text).map_err(|e| TapError::Input(format!("{}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<TapInstance, TapError> {
    instance_from_json(&read(path)?)
}

fn run(cli: Cli) -> Result<ExitCode, TapError> {
    match cli.cmd {
        Cmd::Gen { family, n, k, seed, links, delta, output } => {
            let inst = generate(&GenParams { family, n, k, links, delta }, seed)?;
            let text = instance_to_json(&inst);
            match output {
                Some(p) => write(&p, &text)?,
                None => println!("{text}"),
            }
        }
        Cmd::Solve { instance, k, mode, seed, oracle_bound, out, lp_values, dump_lp, dump_decomposition } => {
            let inst = load(&instance)?;
            let opts = PipelineOptions { k, mode, seed, oracle_bound, lp_values, ..Default::default() };
            let id = instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let o = run_pipeline_named(&inst, &opts, &id, "file")?;
            if let Some(p) = dump_lp {
                let model = match (&o.rounding, &o.weighted) {
                    (Some(r), _) => r.lp.model.to_lp_format(),
                    (_, Some(w)) => w.lp.model.to_lp_format(),
                    _ => tap_core::lp::build_cut_lp(&o.closed).to_lp_format(),
                };
                write(&p, &model)?;
            }
            if let Some(p) = dump_decomposition {
                let d = match (&o.reduction, &o.rounding) {
                    (Some(r), _) => r.certificate.decomposition.clone(),
                    (_, Some(r)) => decompose(&o.closed, &r.lp.x, k)?,
                    _ => match &o.weighted {
                        Some(w) => decompose(&o.closed, &w.lp.x, k)?,
                        None => return Err(TapError::Input("no LP point to decompose".into())),
                    },
                };
                write(&p, &serde_json::to_string_pretty(&d.to_json()).expect("plain data"))?;
            }
            match out {
                Out::Json => println!("{}", serde_json::to_string(&o.report).expect("plain data")),
                Out::Csv => print!("{}", reports_to_csv(&[o.report])),
            }
        }
        Cmd::Batch { manifest, jsonl, csv, oracle_bound } => {
            let m = Manifest::parse(&read(&manifest)?)?;
            let base = PipelineOptions { oracle_bound, ..Default::default() };
            let lines = batch(&m, &base, workers_from_env());
            let text = to_jsonl(&lines);
            match jsonl {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
            if let Some(p) = csv {
                write(&p, &csv_summary(&lines))?;
            }
            if lines.iter().any(|l| l.is_err()) {
                eprintln!("{} of {} runs failed", lines.iter().filter(|l| l.is_err()).count(), lines.len());
            }
        }
        Cmd::Verify { instance, solution } => {
            let inst = load(&instance)?;
            let pairs: Vec<(usize, usize)> =
                serde_json::from_str(&read(&solution)?).map_err(|e| TapError::Input(format!("solution: {e}")))?;
            let mut sol = LinkSet::new();
            for (u, v) in pairs {
                let id = inst.link_id(u, v).ok_or_else(|| TapError::Input(format!("{{{u},{v}}} is not a link")))?;
                sol.insert(id);
            }
            let ok = is_feasible(&inst, &sol);
            println!("{} cost {}", if ok { "feasible" } else { "infeasible" }, inst.total_cost(&sol));
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
