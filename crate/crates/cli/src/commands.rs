use std::path::{Path, PathBuf};

use serde::Serialize;
use subnet_core::design::CombinationMatrix;
use subnet_core::experiment::{
    build_setup, prepare_strategies, simulate_step_size, ExperimentConfig, PreparedStrategy, Setup, StrategyKind,
    SummaryRow,
};
use subnet_core::subspace::{check_conditions, FeasibilityReport};
use subnet_core::theory::{limit_point, predict, TheorySummary, DEFAULT_TAIL_TOL};
use subnet_core::Error;

use crate::output::{
    mu_tag, read_matrix_csv, write_curve_csv, write_json, write_matrix_csv, write_rows_csv, write_text,
    write_trace_csv,
};
use crate::Common;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Config(_) | Error::InvalidParameter(_) | Error::DimensionMismatch { .. }) => 2,
            CliError::Usage(_) => 2,
            CliError::Core(Error::Infeasible { .. } | Error::NotConverged { .. }) => 3,
            CliError::Core(Error::Divergence { .. }) => 4,
            _ => 1,
        }
    }
}

/// Resolved configuration and output directory of one invocation.
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn load(args: &Common) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::load(&args.config)?;
        if let Some(seed) = args.seed {
            cfg.master_seed = seed;
        }
        if let Some(out) = &args.out {
            cfg.output_dir = out.clone();
        }
        let out = cfg.output_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        write_text(&out.join("config.toml"), &cfg.to_toml_string()?)?;
        Ok(Context { cfg, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn setup(&self) -> Result<Setup, CliError> {
        let setup = build_setup(&self.cfg)?;
        write_json(&self.path("topology.json"), &setup.topology)?;
        write_json(&self.path("ensemble.json"), &setup.ensemble)?;
        Ok(setup)
    }

    fn strategies(&self, cfg: &ExperimentConfig, setup: &Setup) -> Result<Vec<PreparedStrategy>, CliError> {
        prepare_strategies(cfg, setup).map_err(|e| {
            if let Err(write_err) = self.write_design_diagnostic(None, &e) {
                eprintln!("warning: {write_err}");
            }
            e.into()
        })
    }

    fn write_design_diagnostic(&self, p: Option<usize>, err: &Error) -> Result<(), CliError> {
        let diag = DesignDiagnostic::from_error(p, err);
        if diag.report.is_none() && diag.iterations.is_none() {
            return Ok(());
        }
        let name = match p {
            Some(p) => format!("design_p{p}_diagnostic.json"),
            None => "design_diagnostic.json".to_string(),
        };
        write_json(&self.path(&name), &diag)
    }
}

#[derive(Serialize)]
struct DesignDiagnostic {
    p: Option<usize>,
    error: String,
    report: Option<FeasibilityReport>,
    iterations: Option<usize>,
    step_residual: Option<f64>,
    omega_residual: Option<f64>,
}

impl DesignDiagnostic {
    fn from_error(p: Option<usize>, err: &Error) -> Self {
        let mut d = DesignDiagnostic {
            p,
            error: err.to_string(),
            report: None,
            iterations: None,
            step_residual: None,
            omega_residual: None,
        };
        match err {
            Error::Infeasible { report } => d.report = Some((**report).clone()),
            Error::NotConverged {
                iterations,
                step_residual,
                omega_residual,
            } => {
                d.iterations = Some(*iterations);
                d.step_residual = Some(*step_residual);
                d.omega_residual = Some(*omega_residual);
            }
            _ => {}
        }
        d
    }
}

#[derive(Serialize)]
struct DesignRecord<'a> {
    p: usize,
    block_size: usize,
    iterations: usize,
    final_objective: f64,
    added_edges: Vec<(usize, usize)>,
    certificate: &'a FeasibilityReport,
}

pub fn cmd_design(ctx: &Context) -> Result<(), CliError> {
    let setup = ctx.setup()?;
    let mut first_error = None;
    for &p in &ctx.cfg.subspace.p {
        let basis = setup.subspace(p)?;
        match setup.design(&basis, &ctx.cfg.design) {
            Ok(a) => write_design(ctx, p, &a)?,
            Err(e @ (Error::Infeasible { .. } | Error::NotConverged { .. })) => {
                ctx.write_design_diagnostic(Some(p), &e)?;
                eprintln!("p={p}: {e}");
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn write_design(ctx: &Context, p: usize, a: &CombinationMatrix) -> Result<(), CliError> {
    write_matrix_csv(&ctx.path(&format!("design_p{p}_matrix.csv")), &a.a)?;
    write_trace_csv(&ctx.path(&format!("design_p{p}_f_trace.csv")), &a.objective_trace)?;
    let record = DesignRecord {
        p,
        block_size: a.block_size,
        iterations: a.objective_trace.len(),
        final_objective: a.objective_trace.last().copied().unwrap_or(0.0),
        added_edges: a.added_edges(0.0),
        certificate: &a.certificate,
    };
    write_json(&ctx.path(&format!("design_p{p}_certificate.json")), &record)
}

#[derive(Serialize)]
struct Summary<'a> {
    master_seed: u64,
    rows: &'a [SummaryRow],
}

fn simulate_all(ctx: &Context, cfg: &ExperimentConfig, write_curves: bool) -> Result<Vec<SummaryRow>, CliError> {
    let setup = ctx.setup()?;
    let strategies = ctx.strategies(cfg, &setup)?;
    for s in strategies.iter().filter(|s| s.kind == StrategyKind::Distributed) {
        if let Some(p) = s.p {
            write_design(ctx, p, &s.a)?;
        }
    }
    let mut rows = Vec::new();
    for &mu in &cfg.simulation.mu {
        let result = simulate_step_size(cfg, &setup, &strategies, mu)?;
        if write_curves {
            for curve in &result.curves {
                let name = format!("curve_{}_mu{}.csv", curve.label, mu_tag(mu));
                write_curve_csv(&ctx.path(&name), curve, cfg.simulation.curve_stride)?;
            }
        }
        rows.extend(result.rows);
    }
    Ok(rows)
}

pub fn cmd_simulate(ctx: &Context) -> Result<(), CliError> {
    let rows = simulate_all(ctx, &ctx.cfg, true)?;
    write_json(
        &ctx.path("summary.json"),
        &Summary {
            master_seed: ctx.cfg.master_seed,
            rows: &rows,
        },
    )
}

#[derive(Serialize)]
struct TableRow {
    p: usize,
    mu: f64,
    strategy: StrategyKind,
    msd_closed_db: f64,
    msd_series_db: f64,
    simulation_db: f64,
    iterations: usize,
    n_runs: usize,
}

pub fn cmd_table2(ctx: &Context) -> Result<(), CliError> {
    let mut cfg = ctx.cfg.clone();
    cfg.simulation.strategies = vec![StrategyKind::Centralized, StrategyKind::Distributed];
    let rows = simulate_all(ctx, &cfg, false)?;
    let table: Vec<TableRow> = rows
        .iter()
        .map(|r| TableRow {
            p: r.p.unwrap_or(0),
            mu: r.mu,
            strategy: r.strategy,
            msd_closed_db: r.msd_closed_db,
            msd_series_db: r.msd_series_db,
            simulation_db: r.steady_state_db,
            iterations: r.iterations,
            n_runs: r.n_runs,
        })
        .collect();
    write_rows_csv(&ctx.path("table2.csv"), &table)?;
    write_json(
        &ctx.path("table2.json"),
        &Summary {
            master_seed: cfg.master_seed,
            rows: &rows,
        },
    )
}

#[derive(Serialize)]
struct TheoryRow {
    label: String,
    p: Option<usize>,
    mu: f64,
    #[serde(flatten)]
    summary: TheorySummary,
}

pub fn cmd_theory(ctx: &Context, matrix: Option<&Path>) -> Result<(), CliError> {
    let setup = ctx.setup()?;
    let ens = &setup.ensemble;
    let mut rows = Vec::new();
    match matrix {
        Some(path) => {
            let p = ctx.cfg.subspace.p[0];
            let basis = setup.subspace(p)?;
            let a = read_matrix_csv(path)?;
            let report = check_conditions(&a, &basis, &setup.mask, ctx.cfg.design.eps)?;
            write_json(&ctx.path("matrix_certificate.json"), &report)?;
            limit_point(&basis, ens)?;
            for &mu in &ctx.cfg.simulation.mu {
                rows.push(TheoryRow {
                    label: format!("matrix_p{p}"),
                    p: Some(p),
                    mu,
                    summary: predict(&basis, ens, &a, mu, DEFAULT_TAIL_TOL)?,
                });
            }
        }
        None => {
            let strategies = ctx.strategies(&ctx.cfg, &setup)?;
            for &mu in &ctx.cfg.simulation.mu {
                for s in &strategies {
                    rows.push(TheoryRow {
                        label: s.label.clone(),
                        p: s.p,
                        mu,
                        summary: s.theory(ens, mu)?,
                    });
                }
            }
        }
    }
    write_json(&ctx.path("theory.json"), &rows)
}
