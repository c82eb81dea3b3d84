//! Dual-slope path loss and unit conversions.
//!
//! The path loss is the plain piecewise power law: `d^-alpha_near` for
//! `d <= dc` and `d^-alpha_far` beyond. There is no continuity constant, so
//! the gain jumps at `dc` whenever the two exponents differ.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossMode {
    Dual,
    Single,
}

impl PathLossMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathLossMode::Dual => "dual",
            PathLossMode::Single => "single",
        }
    }
}

impl std::str::FromStr for PathLossMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dual" => Ok(PathLossMode::Dual),
            "single" => Ok(PathLossMode::Single),
            other => Err(format!("expected `dual` or `single`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    /// Exponent for `d <= critical_distance_m`.
    pub alpha_near: f64,
    /// Exponent for `d > critical_distance_m`.
    pub alpha_far: f64,
    pub critical_distance_m: f64,
    pub mode: PathLossMode,
    /// Bound the gain at 1.0 (and map zero distance to 1.0) instead of using
    /// the raw law. Off by default.
    pub clamp_gain: bool,
}

impl Default for PathLossModel {
    fn default() -> Self {
        PathLossModel::dual(2.0, 4.0, 4.0)
    }
}

impl PathLossModel {
    pub fn dual(alpha_near: f64, alpha_far: f64, critical_distance_m: f64) -> Self {
        PathLossModel {
            alpha_near,
            alpha_far,
            critical_distance_m,
            mode: PathLossMode::Dual,
            clamp_gain: false,
        }
    }

    pub fn single(alpha: f64, critical_distance_m: f64) -> Self {
        PathLossModel {
            alpha_near: alpha,
            alpha_far: alpha,
            critical_distance_m,
            mode: PathLossMode::Single,
            clamp_gain: false,
        }
    }

    /// Same model with a single exponent `alpha_far` everywhere.
    pub fn to_single(self) -> Self {
        PathLossModel {
            alpha_near: self.alpha_far,
            mode: PathLossMode::Single,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_near.is_finite() && self.alpha_near >= 0.0) {
            return Err(SimError::param("alpha_near", format!("must be >= 0, got {}", self.alpha_near)));
        }
        if !(self.alpha_far.is_finite() && self.alpha_far >= 0.0) {
            return Err(SimError::param("alpha_far", format!("must be >= 0, got {}", self.alpha_far)));
        }
        if !(self.critical_distance_m.is_finite() && self.critical_distance_m > 0.0) {
            return Err(SimError::param(
                "d_c_m",
                format!("must be > 0, got {}", self.critical_distance_m),
            ));
        }
        if self.mode == PathLossMode::Single && self.alpha_near != self.alpha_far {
            return Err(SimError::param(
                "pathloss_mode",
                format!(
                    "single slope requires alpha_near == alpha_far, got {} and {}",
                    self.alpha_near, self.alpha_far
                ),
            ));
        }
        Ok(())
    }

    /// Multiplicative gain at distance `distance_m`.
    pub fn gain(&self, distance_m: f64) -> Result<f64> {
        self.gain_sq(distance_m * distance_m)
    }

    /// Gain from a squared distance. Hot path of the simulator: even integer
    /// exponents avoid `powf` and the square root.
    #[inline]
    pub fn gain_sq(&self, dist_sq: f64) -> Result<f64> {
        if dist_sq == 0.0 {
            return if self.clamp_gain { Ok(1.0) } else { Err(SimError::SingularDistance) };
        }
        let dc = self.critical_distance_m;
        let alpha = if dist_sq > dc * dc { self.alpha_far } else { self.alpha_near };
        let g = pow_neg_half(dist_sq, alpha);
        Ok(if self.clamp_gain { g.min(1.0) } else { g })
    }
}

/// `x^(-alpha/2)`.
#[inline]
fn pow_neg_half(x: f64, alpha: f64) -> f64 {
    let half = alpha * 0.5;
    if half == half.trunc() && half.abs() <= 16.0 {
        1.0 / x.powi(half as i32)
    } else {
        x.powf(-half)
    }
}

/// Path loss at `distance_m` under `model`. Zero distance is singular unless
/// the model clamps.
pub fn path_loss(distance_m: f64, model: &PathLossModel) -> Result<f64> {
    if !(distance_m >= 0.0) {
        return Err(SimError::param("distance_m", format!("must be >= 0, got {distance_m}")));
    }
    model.gain(distance_m)
}

pub fn dbm_to_watt(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}
