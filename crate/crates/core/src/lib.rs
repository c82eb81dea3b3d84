//! Monte Carlo simulator for downlink SINR outage and energy efficiency in
//! small cell networks that mix grid-powered SBSs with SBSs running on
//! ambient RF energy harvested from co-channel transmissions.
//!
//! The pipeline for one realization is
//! [`deploy`] → [`assign_powers`] → [`select_serving`] →
//! [`aggregate_interference`] → [`sinr`] → [`energy_efficiency`];
//! [`estimate`] repeats it over seeded trials and [`sweep`] varies one
//! parameter at a time.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod montecarlo;
pub mod params;
pub mod power;
pub mod report;
pub mod sweep;

pub use channel::{db_to_linear, dbm_to_watt, path_loss, PathLossMode, PathLossModel};
pub use error::{Result, SimError};
pub use geometry::{deploy, nearest, sample_ppp, thin, Deployment, Point, Region};
pub use metrics::{
    aggregate_interference, energy_efficiency, evaluate, select_serving, sinr, ServingClass, TrialOutcome,
};
pub use montecarlo::{estimate, run_trial, trial_rng, Estimates, MetricEstimate, MetricId};
pub use params::{Association, SimParams};
pub use power::{assign_powers, harvested_power, PowerMap};
