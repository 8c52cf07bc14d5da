//! Batch driver: enumerate catalog pairs, run the verification suite, and
//! run flow experiments. Reports are deterministic given the same inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use brf_core::flow::{
    grf_rhs_raw, invariant_tensors, run_flow, FlowMethod, FlowState,
};
use brf_core::oracle::ReductiveModel;
use brf_core::orbit::TangentModel;
use brf_core::report::{
    csv_header, csv_row, flow_trace_json, run_catalog, run_verification, Tolerances, F17,
};
use brf_core::symmetric::{catalog_entries, PairId};
use brf_core::tolerances;
use brf_core::CoreError;

/// Environment variable overriding the default output directory.
const OUT_DIR_ENV: &str = "BRF_LAB_OUT";

#[derive(Parser)]
#[command(
    name = "brf-lab",
    about = "Verification laboratory for Bismut Ricci flat pairs on double quotients of compact Lie groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog rows with their dimensions
    List {
        /// Restrict to one class (AIII, BDI_even, BDI_odd, DIII, CI, CII)
        #[arg(long)]
        class: Option<String>,
        /// Only rows with dim M at most this bound
        #[arg(long, default_value_t = 60)]
        max_dim: usize,
        /// Output format: text or json
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Run the verification suite on one catalog pair
    Verify {
        /// Pair identifier, e.g. "AIII:n=2,p=1"
        #[arg(long)]
        pair: String,
        /// Seed for the sampled checks
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format: json or csv
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        tols: TolArgs,
    },
    /// Verify every catalog pair up to a dimension bound
    All {
        #[arg(long, default_value_t = 60)]
        max_dim: usize,
        /// Worker threads for the sweep (0 = automatic)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for per-pair reports and the CSV summary
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tols: TolArgs,
    },
    /// Generalized Ricci flow experiment on one pair
    Flow {
        #[arg(long)]
        pair: String,
        /// Perturbation scale; 0 runs the fixed-point check only
        #[arg(long, default_value_t = 0.0)]
        scale: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        step_size: f64,
        /// Integration method: rk4 or euler
        #[arg(long, default_value = "rk4")]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trace here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TolArgs {
    /// Override: Jacobi residual tolerance
    #[arg(long)]
    tol_jacobi: Option<f64>,
    /// Override: Killing ad-invariance tolerance
    #[arg(long)]
    tol_ad_invariance: Option<f64>,
    /// Override: metric block identities tolerance
    #[arg(long)]
    tol_metric_blocks: Option<f64>,
    /// Override: mean curvature tolerance
    #[arg(long)]
    tol_mean_curvature: Option<f64>,
    /// Override: max |Ric| tolerance
    #[arg(long)]
    tol_ricci: Option<f64>,
    /// Override: curvature oracle gap tolerance
    #[arg(long)]
    tol_oracle_curvature: Option<f64>,
    /// Override: Ricci oracle gap tolerance
    #[arg(long)]
    tol_oracle_ricci: Option<f64>,
    /// Override: closedness tolerance
    #[arg(long)]
    tol_closedness: Option<f64>,
    /// Override: codifferential tolerance
    #[arg(long)]
    tol_delta_h: Option<f64>,
    /// Override: Ricci identity tolerance
    #[arg(long)]
    tol_ricci_identity: Option<f64>,
    /// Override: flow fixed-point tolerance
    #[arg(long)]
    tol_flow: Option<f64>,
}

impl TolArgs {
    fn build(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_jacobi {
            t.jacobi = F17(v);
        }
        if let Some(v) = self.tol_ad_invariance {
            t.ad_invariance = F17(v);
        }
        if let Some(v) = self.tol_metric_blocks {
            t.metric_blocks = F17(v);
        }
        if let Some(v) = self.tol_mean_curvature {
            t.mean_curvature = F17(v);
        }
        if let Some(v) = self.tol_ricci {
            t.ricci_max = F17(v);
        }
        if let Some(v) = self.tol_oracle_curvature {
            t.oracle_curvature_gap = F17(v);
        }
        if let Some(v) = self.tol_oracle_ricci {
            t.oracle_ricci_gap = F17(v);
        }
        if let Some(v) = self.tol_closedness {
            t.closedness = F17(v);
        }
        if let Some(v) = self.tol_delta_h {
            t.delta_h = F17(v);
        }
        if let Some(v) = self.tol_ricci_identity {
            t.ricci_identity = F17(v);
        }
        if let Some(v) = self.tol_flow {
            t.flow_fixed_point = F17(v);
        }
        t
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_code(&err))
        }
    }
}

/// Usage problems exit 2; runtime/check failures exit 1.
fn error_code(err: &AppError) -> u8 {
    match err {
        AppError::Usage(_) => 2,
        AppError::Core(e) => match e {
            CoreError::PairParse(_)
            | CoreError::InvalidParameter(_)
            | CoreError::IndexOutOfRange(_) => 2,
            _ => 1,
        },
    }
}

#[derive(Debug)]
enum AppError {
    Usage(String),
    Core(CoreError),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(s) => write!(f, "{s}"),
            AppError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Core(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, AppError> {
    Err(AppError::Usage(msg.into()))
}

fn dispatch(cli: Cli) -> Result<ExitCode, AppError> {
    match cli.command {
        Command::List {
            class,
            max_dim,
            format,
        } => cmd_list(class.as_deref(), max_dim, &format),
        Command::Verify {
            pair,
            seed,
            out,
            format,
            tols,
        } => cmd_verify(&pair, seed, out.as_deref(), &format, &tols.build()),
        Command::All {
            max_dim,
            workers,
            seed,
            out,
            tols,
        } => cmd_all(max_dim, workers, seed, out, &tols.build()),
        Command::Flow {
            pair,
            scale,
            steps,
            step_size,
            method,
            seed,
            out,
        } => cmd_flow(&pair, scale, steps, step_size, &method, seed, out.as_deref()),
    }
}

fn cmd_list(class: Option<&str>, max_dim: usize, format: &str) -> Result<ExitCode, AppError> {
    if let Some(c) = class {
        let known = ["AIII", "BDI_even", "BDI_odd", "DIII", "CI", "CII"];
        if !known.contains(&c) {
            return usage(format!("unknown class '{c}'; expected one of {known:?}"));
        }
    }
    let rows: Vec<PairId> = catalog_entries(max_dim)
        .into_iter()
        .filter(|id| class.is_none_or(|c| id.class_name() == c))
        .collect();
    match format {
        "text" => {
            println!("{:<20} {:<10} {:>4} {:>4} {:>4} {:>6}", "pair", "class", "d", "k", "q", "dim_M");
            for id in rows {
                let (d, k, q, m) = id.dims();
                println!(
                    "{:<20} {:<10} {:>4} {:>4} {:>4} {:>6}",
                    id.to_string(),
                    id.class_name(),
                    d,
                    k,
                    q,
                    m
                );
            }
        }
        "json" => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|id| {
                    let (d, k, q, m) = id.dims();
                    serde_json::json!({
                        "pair_id": id.to_string(),
                        "class": id.class_name(),
                        "dims": {"d": d, "k": k, "q": q, "m": m},
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&items).expect("listing"));
        }
        other => return usage(format!("unknown format '{other}'; expected text or json")),
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_pair(s: &str) -> Result<PairId, AppError> {
    let id: PairId = s.parse().map_err(AppError::Core)?;
    id.validate()?;
    Ok(id)
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), AppError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_verify(
    pair: &str,
    seed: u64,
    out: Option<&Path>,
    format: &str,
    tols: &Tolerances,
) -> Result<ExitCode, AppError> {
    let id = parse_pair(pair)?;
    let report = run_verification(&id, seed, tols)?;
    let content = match format {
        "json" => report.to_json(),
        "csv" => format!("{}\n{}\n", csv_header(), csv_row(&report)),
        other => return usage(format!("unknown format '{other}'; expected json or csv")),
    };
    write_or_print(out, &content)?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{id}: verification FAILED");
        Ok(ExitCode::from(1))
    }
}

fn sanitize_pair_id(id: &PairId) -> String {
    id.to_string().replace([':', ','], "_").replace('=', "")
}

fn cmd_all(
    max_dim: usize,
    workers: usize,
    seed: u64,
    out: Option<PathBuf>,
    tols: &Tolerances,
) -> Result<ExitCode, AppError> {
    let out_dir = out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));
    fs::create_dir_all(&out_dir)
        .map_err(|e| AppError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;

    let reports = run_catalog(max_dim, workers, seed, tols)?;
    let mut csv = csv_header();
    csv.push('\n');
    let mut failed = 0usize;
    for report in &reports {
        let id: PairId = report.pair_id.parse().expect("round trip");
        let path = out_dir.join(format!("{}.json", sanitize_pair_id(&id)));
        fs::write(&path, report.to_json())
            .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", path.display())))?;
        csv.push_str(&csv_row(report));
        csv.push('\n');
        if !report.passed() {
            failed += 1;
        }
        println!(
            "{:<20} dim_M {:>3}  ricci {:>10.3e}  oracle gap {:>10.3e}  witness {:>11.4e}  {}",
            report.pair_id,
            report.dims.m,
            report.residuals.ricci_max.0,
            report
                .residuals
                .oracle_curvature_gap
                .0
                .max(report.residuals.oracle_ricci_gap.0),
            report.witnesses.nonflat_value.0,
            report.verdict
        );
    }
    let summary = out_dir.join("summary.csv");
    fs::write(&summary, csv)
        .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", summary.display())))?;
    println!(
        "{} pairs verified, {} failed; reports in {}",
        reports.len(),
        failed,
        out_dir.display()
    );
    if failed == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn cmd_flow(
    pair: &str,
    scale: f64,
    steps: usize,
    step_size: f64,
    method: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode, AppError> {
    if !step_size.is_finite() || step_size < 0.0 {
        return usage(format!("step size must be non-negative, got {step_size}"));
    }
    if !scale.is_finite() {
        return usage("perturbation scale must be finite".to_string());
    }
    let method = FlowMethod::parse(method).map_err(AppError::Core)?;
    let id = parse_pair(pair)?;
    let pair_model = id.build()?;
    let tangent = TangentModel::new(pair_model)?;
    let model = ReductiveModel::from_tangent(&tangent)?;
    let m = model.m_dim();

    if scale == 0.0 {
        let b0 = DMatrix::zeros(m, m);
        let (rhs_g, rhs_b) = grf_rhs_raw(&model, model.h_tensor(), model.metric(), &b0)?;
        let residual = rhs_g.amax().max(rhs_b.amax());
        println!("{id}: fixed-point residual {residual:.3e}");
        if residual <= tolerances::FLOW_FIXED_POINT {
            return Ok(ExitCode::SUCCESS);
        }
        eprintln!(
            "{id}: fixed-point residual exceeds {:.1e}",
            tolerances::FLOW_FIXED_POINT
        );
        return Ok(ExitCode::from(1));
    }

    let inv = invariant_tensors(&model)?;
    // seeded perturbation inside the invariant symmetric space
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut direction = DMatrix::zeros(m, m);
    for basis in &inv.sym {
        let c: f64 = rng.gen_range(-1.0..1.0);
        direction += basis * c;
    }
    let norm = direction.amax().max(1e-300);
    let initial = FlowState {
        time: 0.0,
        metric: model.metric() + direction * (scale / norm),
        two_form: DMatrix::zeros(m, m),
    };
    let trace = run_flow(
        &model,
        model.h_tensor(),
        &inv,
        initial,
        step_size,
        steps,
        method,
    )?;
    let content = flow_trace_json(&id, method, step_size, steps, &trace);
    write_or_print(out, &content)?;
    Ok(ExitCode::SUCCESS)
}
