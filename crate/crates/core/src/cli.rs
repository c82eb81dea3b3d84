//! Command-line front end.
//!
//! Every result-producing subcommand writes a CSV table to `--out` and a
//! `<out>.manifest.json` beside it. `replay` re-runs a manifest and produces
//! a byte-identical CSV. Exit status: 0 on success, 1 on a configuration
//! error, 2 on a runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{apply_config_str, parse_config, render_config, ConfigError};
use crate::error::SimError;
use crate::montecarlo::{estimate, with_threads};
use crate::params::{Association, SimParams};
use crate::report::{manifest_path, write_atomic, RunManifest, Table};
use crate::sweep::{
    find_optimal, linear_grid, log_grid, presets, sweep_beta, sweep_lambda, LambdaCoupling, Objective, SweepResult,
    SweptParam, Window,
};

#[derive(Debug, Parser)]
#[command(name = "ehsim", version, about = "Outage and energy-efficiency simulator for energy-harvesting small cell networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate outage and EE at a single parameter point.
    Point(PointArgs),
    /// Sweep the SBS intensity (macro intensity follows at lambda_s/50 by default).
    SweepLambda(LambdaArgs),
    /// Sweep the on-grid proportion beta.
    SweepBeta(BetaArgs),
    /// Density sweep under both the dual-slope and the single-slope law.
    ComparePathloss(LambdaArgs),
    /// Beta sweep under both association policies.
    CompareAssociation(BetaArgs),
    /// Grid search for the best lambda_s or beta.
    Optimize(OptimizeArgs),
    /// Print the built-in parameter defaults as a config file.
    ShowDefaults,
    /// Re-run a manifest written by an earlier run.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Config file (key=value), or `defaults` for the built-in parameters.
    #[arg(long, default_value = "defaults")]
    pub config: String,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output CSV path. Defaults to `<subcommand>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// `fixed` to use region_radius_m at every point, or an expected SBS count
    /// per window. Defaults to the preset count for named grids, else `fixed`.
    #[arg(long)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct LambdaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `density` (preset), `start:stop:step`, `log:start:stop:n`, or a comma list.
    #[arg(long, default_value = "density")]
    pub grid: String,
    /// lambda_m = lambda_s / ratio at each point.
    #[arg(long, default_value_t = 50.0, conflicts_with = "fixed_macro")]
    pub lambda_ratio: f64,
    /// Keep lambda_m from the config instead of coupling it to lambda_s.
    #[arg(long)]
    pub fixed_macro: bool,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BetaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `proportion` (preset), `start:stop:step`, or a comma list.
    #[arg(long, default_value = "proportion")]
    pub grid: String,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamArg {
    LambdaS,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    MinOutage,
    MaxEe,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "lambda-s")]
    pub param: ParamArg,
    #[arg(long, value_enum, default_value = "min-outage")]
    pub objective: ObjectiveArg,
    /// Grid spec; defaults to the preset for `--param`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 50.0)]
    pub lambda_ratio: f64,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Output path; defaults to the one recorded in the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Fully resolved description of a run, stored in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunSpec {
    Point,
    SweepLambda {
        grid: Vec<f64>,
        coupling: LambdaCoupling,
        window: Window,
    },
    SweepBeta {
        grid: Vec<f64>,
        window: Window,
    },
    ComparePathloss {
        grid: Vec<f64>,
        coupling: LambdaCoupling,
        window: Window,
    },
    CompareAssociation {
        grid: Vec<f64>,
        window: Window,
    },
    Optimize {
        param: ParamArg,
        objective: Objective,
        grid: Vec<f64>,
        coupling: LambdaCoupling,
        window: Window,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Sim(SimError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Sim(SimError::Parameter { .. }) => 1,
            CliError::Sim(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}

/// Output of [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub trials_per_row: Vec<u64>,
    pub n_failed: u64,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
}

/// Parses a grid spec.
pub fn parse_grid(spec: &str, param: SweptParam) -> Result<(Vec<f64>, Option<String>), CliError> {
    let bad = |msg: &str| CliError::Usage(format!("bad grid `{spec}`: {msg}"));
    let preset = match param {
        SweptParam::LambdaS => presets::lambda_grid_by_name(spec),
        SweptParam::Beta => presets::beta_grid_by_name(spec),
    };
    if let Some(grid) = preset {
        return Ok((grid, Some(spec.to_string())));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
    let grid = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(bad("expected log:start:stop:n"));
        };
        let n: usize = n.trim().parse().map_err(|_| bad("point count must be an integer"))?;
        let (a, b) = (num(a)?, num(b)?);
        if !(a > 0.0 && b > 0.0) {
            return Err(bad("log grid bounds must be positive"));
        }
        log_grid(a, b, n)
    } else if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(bad("expected start:stop:step"));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) {
            return Err(bad("step must be positive"));
        }
        linear_grid(a, b, step)
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("no points"));
    }
    Ok((grid, None))
}

fn parse_window(arg: &Option<String>, preset: bool) -> Result<Window, CliError> {
    match arg.as_deref() {
        None if preset => Ok(presets::lambda_window()),
        None | Some("fixed") => Ok(Window::Fixed),
        Some(s) => s
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite() && *c > 0.0)
            .map(Window::ExpectedSbsCount)
            .ok_or_else(|| CliError::Usage(format!("bad --window `{s}`: expected `fixed` or a positive count"))),
    }
}

fn coupling(ratio: f64, fixed_macro: bool) -> Result<LambdaCoupling, CliError> {
    if fixed_macro {
        return Ok(LambdaCoupling::FixedMacro);
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(CliError::Usage(format!("--lambda-ratio must be > 0, got {ratio}")));
    }
    Ok(LambdaCoupling::Ratio(ratio))
}

/// Builds the parameter set from `--config`, `--set`, `--seed` and `--trials`.
pub fn resolve_params(common: &CommonArgs) -> Result<SimParams, CliError> {
    let mut params = match common.config.as_str() {
        "defaults" => SimParams::default(),
        path => parse_config(Path::new(path))?,
    };
    if !common.set.is_empty() {
        params = apply_config_str(params, &common.set.join("\n"))?;
    }
    if let Some(seed) = common.seed {
        params.seed = seed;
    }
    if let Some(trials) = common.trials {
        if trials == 0 {
            return Err(CliError::Usage("--trials must be >= 1".into()));
        }
        params.n_trials = trials;
    }
    params.validate()?;
    Ok(params)
}

fn sweep_table(label: Option<&str>, sweeps: &[(Option<String>, SweepResult)]) -> RunOutput {
    let keys: Vec<&str> = label.into_iter().chain(["param_value"]).collect();
    let mut table = Table::for_estimates(&keys);
    let mut trials_per_row = Vec::new();
    let mut n_failed = 0;
    for (tag, sweep) in sweeps {
        table.push_sweep(tag.as_deref(), sweep);
        trials_per_row.extend(sweep.points.iter().map(|p| p.estimates.outage.n_trials));
        n_failed += sweep.n_failed();
    }
    RunOutput {
        table,
        trials_per_row,
        n_failed,
        notes: Vec::new(),
    }
}

/// Runs `spec` on the current rayon pool.
pub fn execute(spec: &RunSpec, params: &SimParams) -> Result<RunOutput, CliError> {
    match spec {
        RunSpec::Point => {
            let e = estimate(params)?;
            let mut table = Table::for_estimates(&["lambda_s", "beta"]);
            table.push_estimates(vec![params.lambda_s.to_string(), params.beta.to_string()], &e);
            Ok(RunOutput {
                table,
                trials_per_row: vec![e.outage.n_trials],
                n_failed: e.n_failed,
                notes: Vec::new(),
            })
        }
        RunSpec::SweepLambda { grid, coupling, window } => {
            let s = sweep_lambda(params, grid, *coupling, *window)?;
            Ok(sweep_table(None, &[(None, s)]))
        }
        RunSpec::SweepBeta { grid, window } => {
            let s = sweep_beta(params, grid, *window)?;
            Ok(sweep_table(None, &[(None, s)]))
        }
        RunSpec::ComparePathloss { grid, coupling, window } => {
            let mut dual = params.clone();
            dual.path_loss.mode = crate::channel::PathLossMode::Dual;
            let single = SimParams {
                path_loss: params.path_loss.to_single(),
                ..params.clone()
            };
            let sweeps = [dual, single]
                .iter()
                .map(|p| Ok((Some(p.path_loss.mode.as_str().to_string()), sweep_lambda(p, grid, *coupling, *window)?)))
                .collect::<Result<Vec<_>, SimError>>()?;
            Ok(sweep_table(Some("pathloss_mode"), &sweeps))
        }
        RunSpec::CompareAssociation { grid, window } => {
            let sweeps = [Association::NearestAny, Association::OffgridOnly]
                .iter()
                .map(|&a| {
                    let p = SimParams {
                        association: a,
                        ..params.clone()
                    };
                    Ok((Some(a.as_str().to_string()), sweep_beta(&p, grid, *window)?))
                })
                .collect::<Result<Vec<_>, SimError>>()?;
            Ok(sweep_table(Some("association"), &sweeps))
        }
        RunSpec::Optimize {
            param,
            objective,
            grid,
            coupling,
            window,
        } => {
            let sweep = match param {
                ParamArg::LambdaS => sweep_lambda(params, grid, *coupling, *window)?,
                ParamArg::Beta => sweep_beta(params, grid, *window)?,
            };
            let opt = find_optimal(&sweep, *objective).expect("grid is non-empty");
            let mut table = Table::new(&[
                "objective",
                "param",
                "param_value",
                "mean",
                "ci_lo",
                "ci_hi",
                "ci_separated",
                "runner_up_value",
                "grid_points",
            ]);
            table.rows.push(vec![
                objective.as_str().to_string(),
                sweep.swept_param.as_str().to_string(),
                opt.value.to_string(),
                opt.estimate.mean.to_string(),
                opt.estimate.ci_lo.to_string(),
                opt.estimate.ci_hi.to_string(),
                opt.ci_separated.to_string(),
                opt.runner_up.map(|(v, _)| v.to_string()).unwrap_or_default(),
                sweep.points.len().to_string(),
            ]);
            let note = format!(
                "best {} = {} ({} {} [{}, {}]){}",
                sweep.swept_param.as_str(),
                opt.value,
                objective.as_str(),
                opt.estimate.mean,
                opt.estimate.ci_lo,
                opt.estimate.ci_hi,
                if opt.ci_separated { "" } else { "; not CI-separated from the runner-up" }
            );
            Ok(RunOutput {
                table,
                trials_per_row: sweep.points.iter().map(|p| p.estimates.outage.n_trials).collect(),
                n_failed: sweep.n_failed(),
                notes: vec![note],
            })
        }
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn finish(
    spec: RunSpec,
    params: SimParams,
    presets: Vec<String>,
    threads: Option<usize>,
    out: PathBuf,
) -> Result<(), CliError> {
    let result = with_threads(threads.unwrap_or_else(default_threads), || execute(&spec, &params))?;
    for note in &result.notes {
        eprintln!("{note}");
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        seed: params.seed,
        run: spec,
        params,
        presets,
        trials_per_row: result.trials_per_row,
        n_failed: result.n_failed,
        output: out.clone(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let io = |context: String| move |source| CliError::Io { context, source };
    write_atomic(&out, &result.table.to_csv()).map_err(io(format!("writing {}", out.display())))?;
    let mpath = manifest_path(&out);
    if let Err(e) = write_atomic(&mpath, &manifest_json) {
        let _ = std::fs::remove_file(&out);
        return Err(io(format!("writing {}", mpath.display()))(e));
    }
    if manifest.n_failed > 0 {
        eprintln!("{} trial(s) dropped on a singular distance", manifest.n_failed);
    }
    eprintln!("wrote {} and {}", out.display(), mpath.display());
    Ok(())
}

fn out_path(common: &CommonArgs, name: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")))
}

fn lambda_spec(args: &LambdaArgs) -> Result<(Vec<f64>, LambdaCoupling, Window, Vec<String>), CliError> {
    let (grid, preset) = parse_grid(&args.grid, SweptParam::LambdaS)?;
    let window = parse_window(&args.window.window, preset.is_some())?;
    Ok((grid, coupling(args.lambda_ratio, args.fixed_macro)?, window, preset.into_iter().collect()))
}

fn beta_spec(args: &BetaArgs) -> Result<(Vec<f64>, Window, Vec<String>), CliError> {
    let (grid, preset) = parse_grid(&args.grid, SweptParam::Beta)?;
    let window = parse_window(&args.window.window, preset.is_some())?;
    Ok((grid, window, preset.into_iter().collect()))
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ShowDefaults => {
            print!("{}", render_config(&SimParams::default()));
            Ok(())
        }
        Command::Point(a) => {
            let params = resolve_params(&a.common)?;
            finish(RunSpec::Point, params, vec![], a.common.threads, out_path(&a.common, "point"))
        }
        Command::SweepLambda(a) => {
            let params = resolve_params(&a.common)?;
            let (grid, coupling, window, presets) = lambda_spec(&a)?;
            let spec = RunSpec::SweepLambda { grid, coupling, window };
            finish(spec, params, presets, a.common.threads, out_path(&a.common, "sweep-lambda"))
        }
        Command::ComparePathloss(a) => {
            let params = resolve_params(&a.common)?;
            let (grid, coupling, window, presets) = lambda_spec(&a)?;
            let spec = RunSpec::ComparePathloss { grid, coupling, window };
            finish(spec, params, presets, a.common.threads, out_path(&a.common, "compare-pathloss"))
        }
        Command::SweepBeta(a) => {
            let params = resolve_params(&a.common)?;
            let (grid, window, presets) = beta_spec(&a)?;
            let spec = RunSpec::SweepBeta { grid, window };
            finish(spec, params, presets, a.common.threads, out_path(&a.common, "sweep-beta"))
        }
        Command::CompareAssociation(a) => {
            let params = resolve_params(&a.common)?;
            let (grid, window, presets) = beta_spec(&a)?;
            let spec = RunSpec::CompareAssociation { grid, window };
            finish(spec, params, presets, a.common.threads, out_path(&a.common, "compare-association"))
        }
        Command::Optimize(a) => {
            let params = resolve_params(&a.common)?;
            let swept = match a.param {
                ParamArg::LambdaS => SweptParam::LambdaS,
                ParamArg::Beta => SweptParam::Beta,
            };
            let default_grid = match a.param {
                ParamArg::LambdaS => "density",
                ParamArg::Beta => "proportion",
            };
            let (grid, preset) = parse_grid(a.grid.as_deref().unwrap_or(default_grid), swept)?;
            let window = parse_window(&a.window.window, preset.is_some())?;
            let objective = match a.objective {
                ObjectiveArg::MinOutage => Objective::MinOutage,
                ObjectiveArg::MaxEe => Objective::MaxEe,
            };
            let spec = RunSpec::Optimize {
                param: a.param,
                objective,
                grid,
                coupling: coupling(a.lambda_ratio, false)?,
                window,
            };
            finish(spec, params, preset.into_iter().collect(), a.common.threads, out_path(&a.common, "optimize"))
        }
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.manifest).map_err(|source| CliError::Io {
                context: format!("reading {}", a.manifest.display()),
                source,
            })?;
            let m: RunManifest<RunSpec> = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: not a run manifest: {e}", a.manifest.display())))?;
            m.params.validate()?;
            let out = a.out.unwrap_or(m.output);
            finish(m.run, m.params, m.presets, a.threads, out)
        }
    }
}

/// Parses `args` and runs; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        let (g, p) = parse_grid("0:1:0.25", SweptParam::Beta).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(p.is_none());
        let (g, _) = parse_grid("0.1, 0.2,0.4", SweptParam::Beta).unwrap();
        assert_eq!(g, vec![0.1, 0.2, 0.4]);
        let (g, _) = parse_grid("log:1e-3:1:4", SweptParam::LambdaS).unwrap();
        assert_eq!(g.len(), 4);
        let (g, p) = parse_grid("density", SweptParam::LambdaS).unwrap();
        assert_eq!((g, p.as_deref()), (presets::lambda_grid(), Some("density")));
        assert!(parse_grid("density", SweptParam::Beta).is_err());
        assert!(parse_grid("0:1:0", SweptParam::Beta).is_err());
        assert!(parse_grid("log:0:1:3", SweptParam::LambdaS).is_err());
        assert!(parse_grid("a,b", SweptParam::Beta).is_err());
    }

    #[test]
    fn window_flag() {
        assert_eq!(parse_window(&None, true).unwrap(), presets::lambda_window());
        assert_eq!(parse_window(&None, false).unwrap(), Window::Fixed);
        assert_eq!(parse_window(&Some("250".into()), false).unwrap(), Window::ExpectedSbsCount(250.0));
        assert!(parse_window(&Some("-3".into()), false).is_err());
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Sim(SimError::param("beta", "bad")).exit_code(), 1);
        assert_eq!(CliError::Sim(SimError::SingularDistance).exit_code(), 2);
    }

    #[test]
    fn run_spec_round_trips_through_json() {
        let spec = RunSpec::Optimize {
            param: ParamArg::Beta,
            objective: Objective::MaxEe,
            grid: vec![0.0, 0.5, 1.0],
            coupling: LambdaCoupling::Ratio(50.0),
            window: Window::ExpectedSbsCount(300.0),
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<RunSpec>(&json).unwrap(), spec);
    }
}
