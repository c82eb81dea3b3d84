//! One-dimensional parameter sweeps and grid-search optimisation.
//!
//! Every grid point reuses the master seed of the base parameters, so a
//! point's estimate depends only on its own parameter values: a singleton
//! sweep equals a direct [`estimate`] call and the grid order is irrelevant.

use serde::{Deserialize, Serialize};

use crate::channel::PathLossMode;
use crate::error::{Result, SimError};
use crate::geometry::Region;
use crate::montecarlo::{estimate, Estimates, MetricEstimate};
use crate::params::{Association, SimParams, DEFAULT_LAMBDA_RATIO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    LambdaS,
    Beta,
}

impl SweptParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweptParam::LambdaS => "lambda_s",
            SweptParam::Beta => "beta",
        }
    }
}

/// How the macro intensity follows the SBS intensity in a lambda sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaCoupling {
    /// `lambda_m = lambda_s / ratio`.
    Ratio(f64),
    /// Keep the base `lambda_m`.
    FixedMacro,
}

impl Default for LambdaCoupling {
    fn default() -> Self {
        LambdaCoupling::Ratio(DEFAULT_LAMBDA_RATIO)
    }
}

/// Simulation window used at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// The base region at every point.
    #[default]
    Fixed,
    /// Radius chosen per point so the window holds this many SBSs on average.
    /// Keeps the per-trial cost flat across a sweep spanning several decades
    /// of density.
    ExpectedSbsCount(f64),
}

impl Window {
    pub fn apply(&self, params: &mut SimParams) -> Result<()> {
        if let Window::ExpectedSbsCount(count) = *self {
            if !(count.is_finite() && count > 0.0) {
                return Err(SimError::param("window_count", format!("must be > 0, got {count}")));
            }
            if params.lambda_s > 0.0 {
                params.region = Region::new((count / (std::f64::consts::PI * params.lambda_s)).sqrt())?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub region_radius_m: f64,
    pub estimates: Estimates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub swept_param: SweptParam,
    pub points: Vec<SweepPoint>,
    pub fixed_params: SimParams,
    pub path_loss_mode: PathLossMode,
    pub association: Association,
    pub window: Window,
}

impl SweepResult {
    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn metric(&self, objective: Objective) -> Vec<MetricEstimate> {
        self.points.iter().map(|p| objective.pick(&p.estimates)).collect()
    }

    pub fn n_failed(&self) -> u64 {
        self.points.iter().map(|p| p.estimates.n_failed).sum()
    }
}

fn check_grid(grid: &[f64], lo: f64, hi: f64, name: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(SimError::param(name, "grid is empty"));
    }
    for (i, v) in grid.iter().enumerate() {
        if !(v.is_finite() && *v >= lo && *v <= hi) {
            return Err(SimError::param(name, format!("grid point {i} = {v} outside [{lo}, {hi}]")));
        }
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SimError::param(name, "grid must be strictly increasing"));
    }
    Ok(())
}

fn run_point(params: SimParams, value: f64, name: &'static str) -> Result<SweepPoint> {
    let estimates = estimate(&params).map_err(|e| match e {
        SimError::Parameter { reason, .. } => SimError::param(name, format!("at {value}: {reason}")),
        other => other,
    })?;
    Ok(SweepPoint {
        value,
        region_radius_m: params.region.radius_m(),
        estimates,
    })
}

/// Sweeps the SBS intensity; the macro intensity follows `coupling`.
pub fn sweep_lambda(base: &SimParams, grid: &[f64], coupling: LambdaCoupling, window: Window) -> Result<SweepResult> {
    check_grid(grid, 0.0, f64::INFINITY, "lambda_s")?;
    if let LambdaCoupling::Ratio(r) = coupling {
        if !(r.is_finite() && r > 0.0) {
            return Err(SimError::param("lambda_ratio", format!("must be > 0, got {r}")));
        }
    }
    let points = grid
        .iter()
        .map(|&lambda_s| {
            let mut params = base.clone();
            params.lambda_s = lambda_s;
            if let LambdaCoupling::Ratio(r) = coupling {
                params.lambda_m = lambda_s / r;
            }
            window.apply(&mut params)?;
            run_point(params, lambda_s, "lambda_s")
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        swept_param: SweptParam::LambdaS,
        points,
        fixed_params: base.clone(),
        path_loss_mode: base.path_loss.mode,
        association: base.association,
        window,
    })
}

pub fn sweep_beta(base: &SimParams, grid: &[f64], window: Window) -> Result<SweepResult> {
    check_grid(grid, 0.0, 1.0, "beta")?;
    let mut windowed = base.clone();
    window.apply(&mut windowed)?;
    let points = grid
        .iter()
        .map(|&beta| {
            let mut params = windowed.clone();
            params.beta = beta;
            run_point(params, beta, "beta")
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        swept_param: SweptParam::Beta,
        points,
        fixed_params: base.clone(),
        path_loss_mode: base.path_loss.mode,
        association: base.association,
        window,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MinOutage,
    MaxEe,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::MinOutage => "min_outage",
            Objective::MaxEe => "max_ee",
        }
    }

    pub fn pick(&self, e: &Estimates) -> MetricEstimate {
        match self {
            Objective::MinOutage => e.outage,
            Objective::MaxEe => e.ee,
        }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self {
            Objective::MinOutage => a < b,
            Objective::MaxEe => a > b,
        }
    }

    /// `a`'s interval lies entirely on the better side of `b`'s.
    pub fn separated(&self, a: &MetricEstimate, b: &MetricEstimate) -> bool {
        match self {
            Objective::MinOutage => a.ci_hi < b.ci_lo,
            Objective::MaxEe => a.ci_lo > b.ci_hi,
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "min_outage" => Ok(Objective::MinOutage),
            "max_ee" => Ok(Objective::MaxEe),
            other => Err(format!("expected `min_outage` or `max_ee`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub index: usize,
    pub value: f64,
    pub estimate: MetricEstimate,
    /// Best of the remaining points, if any.
    pub runner_up: Option<(f64, MetricEstimate)>,
    /// The winner's interval is strictly better than the runner-up's.
    pub ci_separated: bool,
}

fn best_index(values: &[f64], objective: Objective, skip: Option<usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        match best {
            Some(b) if !objective.better(v, values[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Exhaustive scan of the point estimates. Ties go to the smaller parameter
/// value (grids are increasing, so the first index wins).
pub fn find_optimal(sweep: &SweepResult, objective: Objective) -> Option<Optimum> {
    let estimates = sweep.metric(objective);
    let means: Vec<f64> = estimates.iter().map(|e| e.mean).collect();
    let index = best_index(&means, objective, None)?;
    let runner = best_index(&means, objective, Some(index));
    let runner_up = runner.map(|r| (sweep.points[r].value, estimates[r]));
    Some(Optimum {
        index,
        value: sweep.points[index].value,
        estimate: estimates[index],
        runner_up,
        ci_separated: runner_up.is_none_or(|(_, r)| objective.separated(&estimates[index], &r)),
    })
}

/// Index of an interior grid point whose interval is strictly better than
/// both endpoint intervals, preferring the best such point.
pub fn separated_interior_extremum(sweep: &SweepResult, objective: Objective) -> Option<usize> {
    let est = sweep.metric(objective);
    let n = est.len();
    if n < 3 {
        return None;
    }
    (1..n - 1)
        .filter(|&i| objective.separated(&est[i], &est[0]) && objective.separated(&est[i], &est[n - 1]))
        .reduce(|a, b| if objective.better(est[b].mean, est[a].mean) { b } else { a })
}

/// `n` log-spaced values from `start` to `stop` inclusive.
pub fn log_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.log10(), stop.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// `start, start+step, ...` up to `stop` inclusive (within 1e-9 steps).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Named grids and windows for the reference studies.
pub mod presets {
    use super::*;

    /// SBS intensities for the density study, per m²: three decades from
    /// sparse (about 30 m between SBSs) to ultra-dense (about 1 m).
    pub fn lambda_grid() -> Vec<f64> {
        log_grid(1e-3, 1.0, 10)
    }

    /// Expected SBS count per window in density sweeps.
    pub const LAMBDA_WINDOW_COUNT: f64 = 300.0;

    pub fn lambda_window() -> Window {
        Window::ExpectedSbsCount(LAMBDA_WINDOW_COUNT)
    }

    /// 0.0, 0.1, ..., 1.0
    pub fn beta_grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 / 10.0).collect()
    }

    /// SBS intensity for the on-grid proportion study, per m².
    pub const BETA_STUDY_LAMBDA_S: f64 = 1e-2;

    /// Lower SBS intensity for the shifted-optimum comparison, per m².
    pub const BETA_STUDY_LOW_LAMBDA_S: f64 = 2e-3;

    pub fn beta_window() -> Window {
        Window::ExpectedSbsCount(LAMBDA_WINDOW_COUNT)
    }

    pub fn lambda_grid_by_name(name: &str) -> Option<Vec<f64>> {
        (name == "density").then(lambda_grid)
    }

    pub fn beta_grid_by_name(name: &str) -> Option<Vec<f64>> {
        (name == "proportion").then(beta_grid)
    }
}
