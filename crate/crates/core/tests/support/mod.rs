//! Glue between oracle fixtures and the simulator's types.

#![allow(dead_code)]

use ehsim::{assign_powers, evaluate, Association, Deployment, PathLossModel, Point, PowerMap, Region, SimParams};
use rand::Rng;

use crate::oracle::{Class, Fixture, Knobs, Tx};

pub fn params_for(k: &Knobs) -> SimParams {
    SimParams {
        p_m_dbm: k.pm_dbm,
        p_s_dbm: k.ps_dbm,
        eta: k.eta,
        n0_dbm: k.n0_dbm,
        p_eps_dbm: k.peps_dbm,
        path_loss: PathLossModel::dual(k.a_near, k.a_far, k.dc),
        association: if k.offgrid_only {
            Association::OffgridOnly
        } else {
            Association::NearestAny
        },
        ..SimParams::default()
    }
}

pub fn deployment_for(f: &Fixture) -> Deployment {
    let mut d = Deployment::empty(Region::new(1e4).unwrap());
    for t in &f.txs {
        let p = Point::new(t.x, t.y);
        match t.class {
            Class::Macro => d.macro_positions.push(p),
            Class::Ongrid => d.ongrid_positions.push(p),
            Class::Offgrid => d.offgrid_positions.push(p),
        }
    }
    d
}

/// Runs the simulator's power assignment and metrics on a fixture.
pub fn pipeline(f: &Fixture) -> ehsim::Result<(ehsim::TrialOutcome, PowerMap)> {
    let params = params_for(&f.knobs);
    let d = deployment_for(f);
    let powers = assign_powers(&d, &params)?;
    Ok((evaluate(&d, &powers, &params)?, powers))
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Random fixture with 1..=10 transmitters spread over near and far ranges.
pub fn random_fixture<R: Rng>(rng: &mut R, index: usize) -> Fixture {
    let n = rng.random_range(1..=10);
    let txs = (0..n)
        .map(|_| {
            let class = match rng.random_range(0..3) {
                0 => Class::Macro,
                1 => Class::Ongrid,
                _ => Class::Offgrid,
            };
            // radii from ~0.1 m to ~40 m, so both branches and the cap get exercised
            let r = 0.1 + 40.0 * rng.random::<f64>().powi(2);
            let th = std::f64::consts::TAU * rng.random::<f64>();
            Tx {
                x: r * th.cos(),
                y: r * th.sin(),
                class,
            }
        })
        .collect();
    let exps = [2.0, 2.5, 3.0, 3.7, 4.0];
    let knobs = Knobs {
        eta: rng.random_range(0.05..=1.0),
        a_near: exps[rng.random_range(0..exps.len())],
        a_far: exps[rng.random_range(0..exps.len())],
        dc: rng.random_range(1.0..8.0),
        offgrid_only: rng.random_bool(0.3),
        ..Knobs::default()
    };
    Fixture {
        name: format!("random-{index}"),
        knobs,
        txs,
        expect_sinr: None,
        expect_ee: None,
        expect_offgrid_power: None,
        expect_singular: false,
    }
}
