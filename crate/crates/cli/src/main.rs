//! `slo-broker` — validate `.slo` models, select offerings, generate HCL,
//! and run the scaling benchmarks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use slo_broker::bench::{diagnostics, run_sweep, to_csv, BenchConfig, Phase, SweepSpec, DEFAULT_CELL_CAP, DEFAULT_REPS, WARMUP_RUNS};
use slo_broker::catalog::Catalog;
use slo_broker::codegen::{dry_run_deploy, generate_hcl, CodegenError, TemplateSet};
use slo_broker::model::SloRegistry;
use slo_broker::parser::{parse_topology, validate_text, SloDocument, ValidationReport};
use slo_broker::selector::{requirement_summary, select, SelectError, SelectOptions, SelectionPlan, SelectionProblem, DEFAULT_BUDGET};
use slo_broker::workload::{generate_workload, synthetic_registry, Connectivity, SyntheticWorkload};

const EXIT_INVALID: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_CODEGEN: u8 = 5;

#[derive(Parser)]
#[command(name = "slo-broker", version, about = "SLO-driven cloud service selection and deployment generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the syntax, unit and consistency checks on a .slo file.
    Validate {
        slo: PathBuf,
        /// Application topology (JSON); derived from the document when omitted.
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Pick the best feasible offering for every component.
    Select {
        slo: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Write the selection plan as JSON.
        #[arg(long)]
        plan_out: Option<PathBuf>,
        /// Maximum number of combinations to enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Print the plan as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Render Terraform HCL for a selection plan and dry-run it.
    Generate {
        plan: PathBuf,
        slo: PathBuf,
        /// Output root; files go to <out>/<app>/.
        #[arg(long)]
        out: PathBuf,
        /// Application name (defaults to the .slo file stem).
        #[arg(long)]
        app: Option<String>,
        /// Directory of provider template TOML files overriding the built-in ones.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Time the pipeline phases over a grid of synthetic workloads.
    Bench(BenchArgs),
    /// Write a synthetic workload (workload.slo, topology.json, catalog.json).
    Workload {
        #[arg(long, default_value_t = 10)]
        components: usize,
        #[arg(long, default_value_t = 10)]
        slos: usize,
        #[arg(long, default_value_t = Connectivity::Low)]
        connectivity: Connectivity,
        #[arg(long, default_value_t = 5)]
        candidates: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Add application-level SLOs.
        #[arg(long)]
        app_slos: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BenchArgs {
    /// parse, select, codegen or all.
    #[arg(long, default_value = "all")]
    phase: String,
    /// Grid, e.g. `components=100..1000/100,slos=10,connectivity=low|mid|high`.
    /// Defaults to the built-in grid for each phase.
    #[arg(long)]
    sweep: Option<String>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    reps: usize,
    #[arg(long, default_value_t = WARMUP_RUNS)]
    warmup: usize,
    /// Per-cell cap in seconds on time spent in the timed operation.
    #[arg(long, default_value_t = DEFAULT_CELL_CAP.as_secs())]
    cap_secs: u64,
    /// Override the seed of every sweep.
    #[arg(long)]
    seed: Option<u64>,
    /// Run cells on separate threads (one cell per thread).
    #[arg(long)]
    parallel: bool,
}

/// A failed command: exit code plus message for standard error.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn print_report(report: &ValidationReport) {
    for d in report.errors.iter() {
        println!("error {d}");
    }
    for d in report.warnings.iter() {
        println!("warning {d}");
    }
}

/// Parses and validates a .slo file; invalid documents fail with exit 1.
fn load_document(slo: &Path, topology: Option<&Path>, registry: &SloRegistry) -> Result<SloDocument, Failure> {
    let text = read(slo)?;
    let topo = match topology {
        Some(p) => Some(parse_topology(&read(p)?).map_err(|r| Failure::new(EXIT_IO, format!("{}: {r}", p.display())))?),
        None => None,
    };
    let (doc, report) = validate_text(&text, topo.as_ref(), registry);
    match doc {
        Some(doc) => Ok(doc),
        None => {
            print_report(&report);
            Err(Failure::new(EXIT_INVALID, format!("{} is invalid ({} error(s))", slo.display(), report.errors.len())))
        }
    }
}

fn cmd_validate(slo: &Path, topology: Option<&Path>, json: bool, registry: &SloRegistry) -> CmdResult {
    let text = read(slo)?;
    let topo = match topology {
        Some(p) => Some(parse_topology(&read(p)?).map_err(|r| Failure::new(EXIT_IO, format!("{}: {r}", p.display())))?),
        None => None,
    };
    let (_, report) = validate_text(&text, topo.as_ref(), registry);
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_report(&report);
        if report.is_valid {
            println!("{}: valid", slo.display());
        }
    }
    if report.is_valid {
        Ok(())
    } else {
        Err(Failure::new(EXIT_INVALID, format!("{}: {} error(s)", slo.display(), report.errors.len())))
    }
}

fn plan_table(plan: &SelectionPlan) -> String {
    let c = &plan.combination;
    let mut s = String::new();
    for (comp, offering) in &c.assignment {
        let u = c.service_utilities.get(comp).map(|u| u.total).unwrap_or(f64::NAN);
        let _ = writeln!(s, "{comp:<20} {:<45} utility {u:.6}", offering.key().to_string());
    }
    for a in &c.per_app_slo {
        let value = a.aggregated_value.map(|v| format!("{v}")).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(s, "application {:<28} value {value:<12} utility {:.6}", a.slo_name, a.utility);
    }
    let _ = writeln!(s, "total utility {:.6}", c.total);
    let _ = writeln!(s, "bandwidth cost {:.2}", c.bandwidth_cost);
    let _ = write!(s, "{} alternative(s) considered in {:.3} ms", plan.alternatives_considered, plan.elapsed.as_secs_f64() * 1e3);
    s
}

fn cmd_select(
    slo: &Path,
    catalog: &Path,
    topology: Option<&Path>,
    plan_out: Option<&Path>,
    budget: u64,
    json: bool,
    registry: &SloRegistry,
) -> CmdResult {
    let doc = load_document(slo, topology, registry)?;
    let catalog = Catalog::parse(&read(catalog)?, &catalog.display().to_string(), registry)
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    let options = SelectOptions { budget, ..SelectOptions::default() };
    let problem = SelectionProblem::new(&doc, &catalog, registry, options).map_err(select_failure)?;
    let plan = select(&problem).map_err(select_failure)?;
    for w in &plan.warnings {
        eprintln!("warning: {w}");
    }
    let plan_json = serde_json::to_string_pretty(&plan).expect("plan serializes");
    if let Some(p) = plan_out {
        write(p, &plan_json)?;
    }
    if json {
        println!("{plan_json}");
    } else {
        for (comp, spec) in &doc.components {
            let reqs: Vec<String> = spec.slos.iter().map(requirement_summary).collect();
            println!("# {comp} ({}): {}", spec.kind(), reqs.join(", "));
        }
        println!("{}", plan_table(&plan));
    }
    Ok(())
}

fn select_failure(e: SelectError) -> Failure {
    let code = match e {
        SelectError::InfeasibleSelection { .. } => EXIT_INFEASIBLE,
        SelectError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_INVALID,
    };
    Failure::new(code, e.to_string())
}

fn cmd_generate(
    plan: &Path,
    slo: &Path,
    out: &Path,
    app: Option<&str>,
    templates: Option<&Path>,
    json: bool,
    registry: &SloRegistry,
) -> CmdResult {
    let plan: SelectionPlan = serde_json::from_str(&read(plan)?)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: not a selection plan: {e}", plan.display())))?;
    let doc = load_document(slo, None, registry)?;
    let templates = match templates {
        Some(dir) => TemplateSet::with_overrides(dir).map_err(codegen_failure)?,
        None => TemplateSet::embedded(),
    };
    let app = app.map(str::to_owned).unwrap_or_else(|| {
        slo.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "app".into())
    });
    let artifact = generate_hcl(&plan, &doc, &templates, &app).map_err(codegen_failure)?;
    let report = dry_run_deploy(&artifact);
    if !report.is_clean() {
        for d in &report.defects {
            eprintln!("defect: {d}");
        }
        return Err(Failure::new(EXIT_CODEGEN, format!("dry run found {} defect(s)", report.defects.len())));
    }
    let dir = artifact.write_to(out).map_err(codegen_failure)?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "directory": dir,
                "resource_blocks": report.resource_blocks,
                "provider_blocks": report.provider_blocks,
                "manifest": artifact.manifest,
            })
        );
    } else {
        println!(
            "wrote {} ({} resource block(s), {} provider block(s); dry run clean)",
            dir.display(),
            report.resource_blocks,
            report.provider_blocks
        );
    }
    Ok(())
}

fn codegen_failure(e: CodegenError) -> Failure {
    let code = if matches!(e, CodegenError::Io { .. }) { EXIT_IO } else { EXIT_CODEGEN };
    Failure::new(code, e.to_string())
}

fn cmd_bench(args: &BenchArgs) -> CmdResult {
    let phases: Vec<Phase> = if args.phase == "all" {
        Phase::ALL.to_vec()
    } else {
        vec![args.phase.parse().map_err(|e: String| Failure::new(EXIT_INVALID, e))?]
    };
    let custom: Option<SweepSpec> = match &args.sweep {
        Some(s) => Some(s.parse().map_err(|e: String| Failure::new(EXIT_INVALID, format!("--sweep: {e}")))?),
        None => None,
    };
    let cfg = BenchConfig { reps: args.reps, warmup: args.warmup, cell_cap: Duration::from_secs(args.cap_secs) };
    let mut records = Vec::new();
    for phase in phases {
        let specs = custom.clone().map(|s| vec![s]).unwrap_or_else(|| SweepSpec::default_for(phase));
        let mut cells = Vec::new();
        for mut spec in specs {
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            cells.extend(spec.cells(phase));
        }
        eprintln!("{phase}: {} cell(s), {} rep(s) each", cells.len(), cfg.reps);
        records.extend(run_sweep(&cells, &cfg, args.parallel));
    }
    let csv = to_csv(&records);
    match &args.csv {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    for line in diagnostics(&records) {
        eprintln!("{line}");
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    // Synthetic SLO names are registered too so generated workloads validate.
    let registry = synthetic_registry();
    match cli.command {
        Command::Validate { slo, topology, json } => cmd_validate(&slo, topology.as_deref(), json, &registry),
        Command::Select { slo, catalog, topology, plan_out, budget, json } => {
            cmd_select(&slo, &catalog, topology.as_deref(), plan_out.as_deref(), budget, json, &registry)
        }
        Command::Generate { plan, slo, out, app, templates, json } => {
            cmd_generate(&plan, &slo, &out, app.as_deref(), templates.as_deref(), json, &registry)
        }
        Command::Bench(args) => cmd_bench(&args),
        Command::Workload { components, slos, connectivity, candidates, seed, app_slos, out } => {
            if components == 0 || slos == 0 || candidates == 0 {
                return Err(Failure::new(EXIT_INVALID, "counts must be at least 1"));
            }
            let spec = SyntheticWorkload::new(components, slos, connectivity, candidates, seed).with_app_slos(app_slos);
            let w = generate_workload(&spec);
            fs::create_dir_all(&out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", out.display())))?;
            w.write_to(&out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", out.display())))?;
            println!(
                "wrote {} ({} components, {} edges, {} offerings)",
                out.display(),
                w.document.components.len(),
                w.document.data_flow.len(),
                w.catalog.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("slo-broker: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
