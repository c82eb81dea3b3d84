//! Model parameters.

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, dbm_to_watt, PathLossModel};
use crate::error::{Result, SimError};
use crate::geometry::Region;

/// Which SBSs the typical user may associate with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Association {
    /// Closest SBS of either class.
    NearestAny,
    /// Closest off-grid SBS, even if an on-grid SBS is nearer.
    OffgridOnly,
}

impl Association {
    pub fn as_str(&self) -> &'static str {
        match self {
            Association::NearestAny => "nearest_any",
            Association::OffgridOnly => "offgrid_only",
        }
    }
}

impl std::str::FromStr for Association {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nearest_any" => Ok(Association::NearestAny),
            "offgrid_only" => Ok(Association::OffgridOnly),
            other => Err(format!("expected `nearest_any` or `offgrid_only`, got `{other}`")),
        }
    }
}

pub const DEFAULT_LAMBDA_RATIO: f64 = 50.0;

/// Every scalar knob of the model. Powers are held in dBm and ratios in dB as
/// configured; the `*_w` / `*_linear` accessors convert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// SBS intensity, per m².
    pub lambda_s: f64,
    /// Macro BS intensity, per m².
    pub lambda_m: f64,
    /// Fraction of SBSs that are on-grid.
    pub beta: f64,
    pub p_m_dbm: f64,
    /// Grid power of on-grid SBSs and battery cap of off-grid SBSs.
    pub p_s_dbm: f64,
    /// RF-to-DC conversion efficiency.
    pub eta: f64,
    pub n0_dbm: f64,
    pub theta_t_db: f64,
    /// Static power drawn by a serving SBS.
    pub p_eps_dbm: f64,
    pub path_loss: PathLossModel,
    pub region: Region,
    pub n_trials: u64,
    pub seed: u64,
    pub association: Association,
}

impl Default for SimParams {
    fn default() -> Self {
        let lambda_s = 1e-3;
        SimParams {
            lambda_s,
            lambda_m: lambda_s / DEFAULT_LAMBDA_RATIO,
            beta: 0.5,
            p_m_dbm: 40.0,
            p_s_dbm: 23.0,
            eta: 0.7,
            n0_dbm: -120.0,
            theta_t_db: 5.0,
            p_eps_dbm: 6.0,
            path_loss: PathLossModel::default(),
            region: Region::new(500.0).expect("default radius is positive"),
            n_trials: 10_000,
            seed: 1,
            association: Association::NearestAny,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_s", self.lambda_s), ("lambda_m", self.lambda_m)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::param(name, format!("must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(SimError::param("beta", format!("must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(SimError::param("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        for (name, v) in [
            ("p_m_dbm", self.p_m_dbm),
            ("p_s_dbm", self.p_s_dbm),
            ("n0_dbm", self.n0_dbm),
            ("theta_t_db", self.theta_t_db),
            ("p_eps_dbm", self.p_eps_dbm),
        ] {
            if !v.is_finite() {
                return Err(SimError::param(name, format!("must be finite, got {v}")));
            }
        }
        if self.n_trials == 0 {
            return Err(SimError::param("n_trials", "must be >= 1"));
        }
        self.path_loss.validate()
    }

    pub fn p_m_w(&self) -> f64 {
        dbm_to_watt(self.p_m_dbm)
    }

    pub fn p_s_w(&self) -> f64 {
        dbm_to_watt(self.p_s_dbm)
    }

    pub fn n0_w(&self) -> f64 {
        dbm_to_watt(self.n0_dbm)
    }

    pub fn p_eps_w(&self) -> f64 {
        dbm_to_watt(self.p_eps_dbm)
    }

    pub fn theta_t_linear(&self) -> f64 {
        db_to_linear(self.theta_t_db)
    }

    /// Mean number of SBSs in the window.
    pub fn expected_sbs_count(&self) -> f64 {
        self.lambda_s * self.region.area_m2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let p = SimParams::default();
        assert_eq!(p.p_m_dbm, 40.0);
        assert_eq!(p.p_s_dbm, 23.0);
        assert_eq!(p.eta, 0.7);
        assert_eq!(p.n0_dbm, -120.0);
        assert_eq!(p.theta_t_db, 5.0);
        assert_eq!(p.p_eps_dbm, 6.0);
        assert_eq!(p.path_loss.alpha_far, 4.0);
        assert_eq!(p.path_loss.alpha_near, 2.0);
        assert_eq!(p.path_loss.critical_distance_m, 4.0);
        assert_eq!(p.lambda_s, 50.0 * p.lambda_m);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validation_names_the_key() {
        let mut p = SimParams::default();
        p.beta = 1.5;
        assert!(matches!(p.validate(), Err(SimError::Parameter { name: "beta", .. })));
        let mut p = SimParams::default();
        p.eta = 0.0;
        assert!(matches!(p.validate(), Err(SimError::Parameter { name: "eta", .. })));
        let mut p = SimParams::default();
        p.n_trials = 0;
        assert!(matches!(p.validate(), Err(SimError::Parameter { name: "n_trials", .. })));
        let mut p = SimParams::default();
        p.lambda_m = -1.0;
        assert!(matches!(p.validate(), Err(SimError::Parameter { name: "lambda_m", .. })));
    }
}
