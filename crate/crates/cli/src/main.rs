//! `slp`: command-line driver for the spectral experiments in `slp-core`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use slp_core::bc::{chart_decompose, layer_index, load_bc, stratum_label, stratum_margin, ChartRepr};
use slp_core::experiments::{
    default_s_values, emit, run_derivative_check, run_homotopy_scan, run_jump_scan, run_layer_continuity,
    run_monotonicity_check, run_multiplicity_check, run_rellich, Format, Report, ScanOptions,
};
use slp_core::kernel::{CMatrix, Inertia};
use slp_core::model::{load_problem, CoefficientField};
use slp_core::shooting::locate_eigenvalues;

#[derive(Parser, Debug)]
#[command(name = "slp", version, about = "Spectra of matrix Sturm-Liouville problems and boundary-condition experiments")]
struct Cli {
    #[command(flatten)]
    output: OutputArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Comma-separated output formats: csv, svg, json.
    #[arg(long, global = true, value_delimiter = ',', default_value = "csv,svg,json")]
    format: Vec<Format>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    /// Number of eigenvalue branches to follow.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Eigenvalue tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Values below this are reported as diverged.
    #[arg(long, default_value_t = -1.0e6, allow_hyphen_values = true)]
    divergence_floor: f64,
    /// Relative tolerance for convergence to the limit spectrum.
    #[arg(long, default_value_t = 1e-3)]
    conv_rtol: f64,
}

impl ScanArgs {
    fn options(&self) -> ScanOptions {
        ScanOptions { divergence_floor: self.divergence_floor, conv_rtol: self.conv_rtol, value_tol: self.tol }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chart, stratum label and layer index of a boundary condition.
    Classify {
        bc: String,
        /// Zero band for the inertia of the chart coordinate.
        #[arg(long)]
        tol_zero: Option<f64>,
    },
    /// Eigenvalues in an interval.
    Spectrum {
        problem: String,
        bc: String,
        #[arg(long, num_args = 2, value_names = ["R1", "R2"], allow_hyphen_values = true)]
        range: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// −u'' = λu with u(0) = 0 and κu'(1) = u(1) as κ → 0.
    Rellich {
        /// Decreasing κ values; defaults to 2^-k for k = 0..=12.
        #[arg(long, value_delimiter = ',')]
        kappas: Vec<f64>,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Approach a singular condition of a given stratum along a straight path.
    JumpScan {
        problem: String,
        #[command(flatten)]
        approach: ApproachArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Sample the lowest eigenvalues along a path between two conditions of one stratum.
    LayerPath {
        problem: String,
        bc1: String,
        bc2: String,
        #[arg(long, default_value_t = 32)]
        steps: usize,
        /// Join both conditions in this chart (1-based indices).
        #[arg(long, value_delimiter = ',')]
        chart: Option<Vec<usize>>,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Jump scan while the coefficients move from one problem to another.
    HomotopyScan {
        /// Problem at s = 1.
        source_problem: String,
        /// Problem in the limit s → 0.
        target_problem: String,
        #[command(flatten)]
        approach: ApproachArgs,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Compare analytic and geometric multiplicities on random problems.
    MultiplicityCheck {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        m: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Compare u*Hu with finite differences of an eigenvalue in chart coordinates.
    DerivativeCheck {
        problem: String,
        bc_chart: String,
        /// JSON file (or inline JSON) with the Hermitian direction H.
        #[arg(long = "H-file")]
        h_file: String,
        /// 1-based eigenvalue index.
        #[arg(long, default_value_t = 1)]
        branch: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.01,0.005,0.0025")]
        hs: Vec<f64>,
    },
    /// Check that an eigenvalue does not decrease along S + tH with H ≥ 0.
    MonotonicityCheck {
        problem: String,
        bc_chart: String,
        #[arg(long = "H-file")]
        h_file: String,
        #[arg(long, default_value_t = 1)]
        branch: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.4,0.8,1.6")]
        steps: Vec<f64>,
    },
}

#[derive(Args, Debug, Clone)]
struct ApproachArgs {
    /// Chart index set K, 1-based and comma-separated; empty for the Dirichlet chart.
    #[arg(long, value_delimiter = ',', default_value = "")]
    chart: Vec<String>,
    /// Inertia of the limit condition as n0,n+,n-.
    #[arg(long)]
    target: String,
    /// Inertia of the approaching conditions as n0,n+,n-.
    #[arg(long)]
    source: String,
    /// Use s = 2^-k for k = 0..=N.
    #[arg(long, default_value_t = 12)]
    s_steps: u32,
}

impl ApproachArgs {
    fn chart(&self) -> Result<Vec<usize>> {
        parse_chart(self.chart.iter().filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse::<usize>()).collect::<Result<_, _>>()?)
    }

    fn s_values(&self) -> Vec<f64> {
        if self.s_steps == 12 {
            default_s_values()
        } else {
            (0..=self.s_steps).map(|k| 0.5f64.powi(k as i32)).collect()
        }
    }
}

fn parse_chart(one_based: Vec<usize>) -> Result<Vec<usize>> {
    one_based
        .into_iter()
        .map(|i| i.checked_sub(1).ok_or_else(|| anyhow!("chart indices are 1-based")))
        .collect()
}

fn parse_inertia(text: &str) -> Result<Inertia> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("inertia '{text}' is not n0,n+,n-"))?;
    match parts[..] {
        [z, p, m] => Ok(Inertia::new(z, p, m)),
        _ => bail!("inertia '{text}' needs three counts"),
    }
}

fn problem(arg: &str) -> Result<CoefficientField> {
    load_problem(arg).with_context(|| format!("loading problem {arg}"))
}

fn chart_of(arg: &str) -> Result<ChartRepr> {
    let doc = load_bc(arg).with_context(|| format!("loading boundary condition {arg}"))?;
    Ok(match doc.chart()? {
        Some(c) => c,
        None => chart_decompose(&doc.to_condition()?),
    })
}

fn complex_entry(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let f = |x: &Value| x.as_f64().ok_or_else(|| anyhow!("matrix entry is not a number"));
            Ok(Complex64::new(f(&p[0])?, f(&p[1])?))
        }
        _ => bail!("matrix entries must be numbers or [re, im] pairs"),
    }
}

/// A matrix given as rows of entries, either bare or under key `"H"`.
fn load_matrix(arg: &str) -> Result<CMatrix> {
    let text = if arg.trim_start().starts_with(['[', '{']) {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    };
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
    let rows = match &v {
        Value::Object(o) => o.get("H").ok_or_else(|| anyhow!("missing key \"H\""))?,
        other => other,
    };
    let rows = rows.as_array().ok_or_else(|| anyhow!("H must be an array of rows"))?;
    let rows = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(|| anyhow!("H rows must be arrays"))?.iter().map(complex_entry).collect())
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    Ok(CMatrix::from_rows(&rows)?)
}

fn print_assertions(report: &dyn Report) {
    println!("{}", report.name());
    for a in report.assertions() {
        println!("  {} {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
}

fn finish(report: &dyn Report, output: &OutputArgs, stem: &str) -> Result<bool> {
    print_assertions(report);
    for path in emit(report, &output.format, &output.out, stem)? {
        log::info!("wrote {}", path.display());
    }
    Ok(report.passed())
}

fn write_json(output: &OutputArgs, stem: &str, value: &Value) -> Result<()> {
    if !output.format.contains(&Format::Json) {
        return Ok(());
    }
    std::fs::create_dir_all(&output.out).with_context(|| format!("creating {}", output.out.display()))?;
    let path = Path::new(&output.out).join(format!("{stem}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let output = &cli.output;
    match cli.command {
        Command::Classify { bc, tol_zero } => {
            let doc = load_bc(&bc).with_context(|| format!("loading boundary condition {bc}"))?;
            let cond = doc.to_condition()?;
            let label = stratum_label(&cond, tol_zero);
            let layer = layer_index(&cond);
            let margin = stratum_margin(&cond, tol_zero);
            let chart = chart_decompose(&cond);
            println!("stratum {label}");
            println!("layer {layer}");
            if let Some(m) = margin {
                println!("margin {m:e}");
            }
            let k1: Vec<usize> = label.k.iter().map(|i| i + 1).collect();
            write_json(
                output,
                "classify",
                &json!({
                    "K": k1,
                    "inertia": label.inertia,
                    "layer": layer,
                    "margin": margin,
                    "chart": serde_json::from_str::<Value>(&slp_core::bc::BcDocument::from_chart(&chart).to_json())?,
                }),
            )?;
            Ok(true)
        }
        Command::Spectrum { problem: p, bc, range, tol } => {
            let field = problem(&p)?;
            let cond = load_bc(&bc).with_context(|| format!("loading boundary condition {bc}"))?.to_condition()?;
            let slice = locate_eigenvalues(&field, &cond, range[0], range[1], tol)?;
            if !slice.certified {
                log::warn!("interval nudged to ({}, {})", slice.r1, slice.r2);
            }
            println!("{} eigenvalue(s) in ({}, {})", slice.total, slice.r1, slice.r2);
            for (v, mult) in &slice.eigenvalues {
                println!("{v:.12}\t{mult}");
            }
            let values: Vec<Value> = slice.eigenvalues.iter().map(|(v, m)| json!({ "value": v, "multiplicity": m })).collect();
            write_json(
                output,
                "spectrum",
                &json!({
                    "interval": [slice.r1, slice.r2],
                    "certified": slice.certified,
                    "total": slice.total,
                    "eigenvalues": values,
                }),
            )?;
            Ok(true)
        }
        Command::Rellich { kappas, scan } => {
            let kappas = if kappas.is_empty() { default_s_values() } else { kappas };
            let report = run_rellich(&kappas, scan.m, &scan.options())?;
            finish(&report, output, "rellich")
        }
        Command::JumpScan { problem: p, approach, scan } => {
            let field = problem(&p)?;
            let k = approach.chart()?;
            let report = run_jump_scan(
                &field,
                &k,
                parse_inertia(&approach.target)?,
                parse_inertia(&approach.source)?,
                &approach.s_values(),
                scan.m,
                &scan.options(),
            )?;
            finish(&report, output, "jump_scan")
        }
        Command::LayerPath { problem: p, bc1, bc2, steps, chart, scan } => {
            let field = problem(&p)?;
            let c1 = load_bc(&bc1)?.to_condition()?;
            let c2 = load_bc(&bc2)?.to_condition()?;
            let chart = chart.map(parse_chart).transpose()?;
            let report = run_layer_continuity(&field, &c1, &c2, chart.as_deref(), steps, scan.m, &scan.options())?;
            finish(&report, output, "layer_path")
        }
        Command::HomotopyScan { source_problem, target_problem, approach, scan } => {
            let source = problem(&source_problem)?;
            let target = problem(&target_problem)?;
            let k = approach.chart()?;
            let report = run_homotopy_scan(
                &source,
                &target,
                &k,
                parse_inertia(&approach.target)?,
                parse_inertia(&approach.source)?,
                &approach.s_values(),
                scan.m,
                &scan.options(),
            )?;
            finish(&report, output, "homotopy_scan")
        }
        Command::MultiplicityCheck { seed, trials, dim, m, tol } => {
            let report = run_multiplicity_check(seed, trials, dim, m, tol)?;
            finish(&report, output, "multiplicity_check")
        }
        Command::DerivativeCheck { problem: p, bc_chart, h_file, branch, hs } => {
            let field = problem(&p)?;
            let chart = chart_of(&bc_chart)?;
            let h = load_matrix(&h_file)?;
            let branch = branch.checked_sub(1).ok_or_else(|| anyhow!("branch is 1-based"))?;
            let report = run_derivative_check(&field, &chart, &h, &hs, branch)?;
            finish(&report, output, "derivative_check")
        }
        Command::MonotonicityCheck { problem: p, bc_chart, h_file, branch, steps } => {
            let field = problem(&p)?;
            let chart = chart_of(&bc_chart)?;
            let h = load_matrix(&h_file)?;
            let branch = branch.checked_sub(1).ok_or_else(|| anyhow!("branch is 1-based"))?;
            let report = run_monotonicity_check(&field, &chart, &h, &steps, branch)?;
            finish(&report, output, "monotonicity_check")
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.output.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
