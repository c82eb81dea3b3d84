//! Per-realization metrics for the typical user at the origin: serving SBS,
//! aggregate interference, SINR, outage and energy efficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{nearest, Deployment, Point};
use crate::params::{Association, SimParams};
use crate::power::PowerMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServingClass {
    Ongrid,
    Offgrid,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub serving_class: ServingClass,
    /// Index into the deployment list of `serving_class`.
    pub serving_index: Option<usize>,
    pub serving_power_w: f64,
    pub sinr_linear: f64,
    pub outage: bool,
    /// Energy efficiency in bits/s/Hz per watt.
    pub ee: f64,
}

impl TrialOutcome {
    /// Outcome when there is no SBS to associate with.
    pub fn unserved() -> Self {
        TrialOutcome {
            serving_class: ServingClass::None,
            serving_index: None,
            serving_power_w: 0.0,
            sinr_linear: 0.0,
            outage: true,
            ee: 0.0,
        }
    }
}

/// Picks the serving SBS for the user at the origin. Macros never serve.
/// With `NearestAny` a distance tie between classes goes to the on-grid SBS.
pub fn select_serving(deployment: &Deployment, association: Association) -> (ServingClass, Option<usize>) {
    let off = nearest(&deployment.offgrid_positions, Point::ORIGIN).ok();
    match association {
        Association::OffgridOnly => match off {
            Some((i, _)) => (ServingClass::Offgrid, Some(i)),
            None => (ServingClass::None, None),
        },
        Association::NearestAny => {
            let on = nearest(&deployment.ongrid_positions, Point::ORIGIN).ok();
            match (on, off) {
                (Some((i, d_on)), Some((_, d_off))) if d_on <= d_off => (ServingClass::Ongrid, Some(i)),
                (_, Some((j, _))) => (ServingClass::Offgrid, Some(j)),
                (Some((i, _)), None) => (ServingClass::Ongrid, Some(i)),
                (None, None) => (ServingClass::None, None),
            }
        }
    }
}

/// Sum of received power at the origin from every transmitter except the
/// serving SBS.
pub fn aggregate_interference(
    deployment: &Deployment,
    powers: &PowerMap,
    serving_class: ServingClass,
    serving_index: Option<usize>,
    params: &SimParams,
) -> Result<f64> {
    let model = &params.path_loss;
    let skip = |class: ServingClass, i: usize| serving_class == class && serving_index == Some(i);

    let mut total = 0.0;
    for (i, (p, w)) in deployment.ongrid_positions.iter().zip(&powers.ongrid_powers_w).enumerate() {
        if !skip(ServingClass::Ongrid, i) {
            total += w * model.gain_sq(p.norm_sq())?;
        }
    }
    for (i, (p, w)) in deployment.offgrid_positions.iter().zip(&powers.offgrid_powers_w).enumerate() {
        if !skip(ServingClass::Offgrid, i) {
            total += w * model.gain_sq(p.norm_sq())?;
        }
    }
    for (p, w) in deployment.macro_positions.iter().zip(&powers.macro_powers_w) {
        total += w * model.gain_sq(p.norm_sq())?;
    }
    Ok(total)
}

pub fn sinr(serving_power_w: f64, serving_distance_m: f64, interference_w: f64, params: &SimParams) -> Result<f64> {
    if !(serving_distance_m > 0.0) && !params.path_loss.clamp_gain {
        return Err(SimError::SingularDistance);
    }
    if serving_power_w == 0.0 {
        return Ok(0.0);
    }
    let signal = serving_power_w * params.path_loss.gain(serving_distance_m)?;
    Ok(signal / (interference_w + params.n0_w()))
}

/// `log2(1 + SINR)` over the grid power the serving SBS draws: `Ps + Pε`
/// when on-grid, `Pε` alone when off-grid.
pub fn energy_efficiency(sinr_linear: f64, serving_class: ServingClass, params: &SimParams) -> f64 {
    let rate = (1.0 + sinr_linear).log2();
    match serving_class {
        ServingClass::Ongrid => rate / (params.p_s_w() + params.p_eps_w()),
        ServingClass::Offgrid => rate / params.p_eps_w(),
        ServingClass::None => 0.0,
    }
}

pub fn is_outage(sinr_linear: f64, params: &SimParams) -> bool {
    sinr_linear <= params.theta_t_linear()
}

/// Serving selection through EE for one fixed deployment and power map.
pub fn evaluate(deployment: &Deployment, powers: &PowerMap, params: &SimParams) -> Result<TrialOutcome> {
    let (serving_class, serving_index) = select_serving(deployment, params.association);
    let (position, serving_power_w) = match (serving_class, serving_index) {
        (ServingClass::Ongrid, Some(i)) => (deployment.ongrid_positions[i], powers.ongrid_powers_w[i]),
        (ServingClass::Offgrid, Some(i)) => (deployment.offgrid_positions[i], powers.offgrid_powers_w[i]),
        _ => {
            // still validates that no interferer sits on the user
            aggregate_interference(deployment, powers, ServingClass::None, None, params)?;
            return Ok(TrialOutcome::unserved());
        }
    };
    let interference = aggregate_interference(deployment, powers, serving_class, serving_index, params)?;
    let sinr_linear = sinr(serving_power_w, position.norm(), interference, params)?;
    Ok(TrialOutcome {
        serving_class,
        serving_index,
        serving_power_w,
        sinr_linear,
        outage: is_outage(sinr_linear, params),
        ee: energy_efficiency(sinr_linear, serving_class, params),
    })
}
