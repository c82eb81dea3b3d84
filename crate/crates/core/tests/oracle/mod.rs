//! Brute-force reference evaluation of SINR and EE for small fixtures.
//!
//! Written without any of the simulator's helpers: its own unit conversions,
//! its own path loss (`powf` on the plain distance), its own serving search
//! over a single mixed transmitter list. Every sum is taken over terms sorted
//! by magnitude, so the result does not depend on transmitter order.

#![allow(dead_code)]

use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Macro,
    Ongrid,
    Offgrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tx {
    pub x: f64,
    pub y: f64,
    pub class: Class,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knobs {
    pub pm_dbm: f64,
    pub ps_dbm: f64,
    pub eta: f64,
    pub n0_dbm: f64,
    pub peps_dbm: f64,
    pub a_near: f64,
    pub a_far: f64,
    pub dc: f64,
    pub offgrid_only: bool,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            pm_dbm: 40.0,
            ps_dbm: 23.0,
            eta: 0.7,
            n0_dbm: -120.0,
            peps_dbm: 6.0,
            a_near: 2.0,
            a_far: 4.0,
            dc: 4.0,
            offgrid_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub knobs: Knobs,
    pub txs: Vec<Tx>,
    pub expect_sinr: Option<f64>,
    pub expect_ee: Option<f64>,
    pub expect_offgrid_power: Option<f64>,
    pub expect_singular: bool,
}

fn watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

fn loss(k: &Knobs, d: f64) -> f64 {
    if d <= k.dc {
        d.powf(-k.a_near)
    } else {
        d.powf(-k.a_far)
    }
}

fn dist(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    terms.into_iter().sum()
}

/// Transmit power of each transmitter, in fixture order.
pub fn oracle_powers(f: &Fixture) -> Vec<f64> {
    let k = &f.knobs;
    f.txs
        .iter()
        .map(|t| match t.class {
            Class::Macro => watts(k.pm_dbm),
            Class::Ongrid => watts(k.ps_dbm),
            Class::Offgrid => {
                let incoming: Vec<f64> = f
                    .txs
                    .iter()
                    .filter(|s| s.class != Class::Offgrid)
                    .map(|s| {
                        let p = if s.class == Class::Macro { watts(k.pm_dbm) } else { watts(k.ps_dbm) };
                        p * loss(k, dist(t.x, t.y, s.x, s.y))
                    })
                    .collect();
                let harvested = k.eta * sorted_sum(incoming);
                if harvested < watts(k.ps_dbm) {
                    harvested
                } else {
                    watts(k.ps_dbm)
                }
            }
        })
        .collect()
}

/// Index (in fixture order) of the serving SBS, if any.
pub fn oracle_serving(f: &Fixture) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in f.txs.iter().enumerate() {
        let eligible = match t.class {
            Class::Macro => false,
            Class::Ongrid => !f.knobs.offgrid_only,
            Class::Offgrid => true,
        };
        if !eligible {
            continue;
        }
        let d = dist(t.x, t.y, 0.0, 0.0);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

pub fn oracle_sinr(f: &Fixture) -> f64 {
    let k = &f.knobs;
    let Some(s) = oracle_serving(f) else {
        return 0.0;
    };
    let powers = oracle_powers(f);
    let interference: Vec<f64> = f
        .txs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != s)
        .map(|(i, t)| powers[i] * loss(k, dist(t.x, t.y, 0.0, 0.0)))
        .collect();
    let signal = powers[s] * loss(k, dist(f.txs[s].x, f.txs[s].y, 0.0, 0.0));
    signal / (sorted_sum(interference) + watts(k.n0_dbm))
}

pub fn oracle_ee(f: &Fixture) -> f64 {
    let k = &f.knobs;
    let Some(s) = oracle_serving(f) else {
        return 0.0;
    };
    let rate = (1.0 + oracle_sinr(f)).ln() / std::f64::consts::LN_2;
    match f.txs[s].class {
        Class::Ongrid => rate / (watts(k.ps_dbm) + watts(k.peps_dbm)),
        Class::Offgrid => rate / watts(k.peps_dbm),
        Class::Macro => unreachable!("macros never serve"),
    }
}

/// Reads a fixture file:
///
/// ```text
/// # comment
/// set eta 0.7
/// association offgrid_only
/// tx macro 10 0
/// tx ongrid 2 0
/// tx offgrid 0 1
/// expect sinr 49.88
/// ```
pub fn load_fixture(path: &Path) -> Fixture {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut f = Fixture {
        name: path.file_stem().unwrap().to_string_lossy().into_owned(),
        knobs: Knobs::default(),
        txs: Vec::new(),
        expect_sinr: None,
        expect_ee: None,
        expect_offgrid_power: None,
        expect_singular: false,
    };
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let w: Vec<&str> = line.split_whitespace().collect();
        let num = |i: usize| -> f64 {
            w.get(i)
                .and_then(|s| s.parse().ok())
                .unwrap_or_else(|| panic!("{}:{}: bad number", path.display(), n + 1))
        };
        match w[0] {
            "tx" => {
                let class = match w[1] {
                    "macro" => Class::Macro,
                    "ongrid" => Class::Ongrid,
                    "offgrid" => Class::Offgrid,
                    c => panic!("{}:{}: unknown class {c}", path.display(), n + 1),
                };
                f.txs.push(Tx { x: num(2), y: num(3), class });
            }
            "association" => f.knobs.offgrid_only = w[1] == "offgrid_only",
            "set" => {
                let v = num(2);
                match w[1] {
                    "eta" => f.knobs.eta = v,
                    "p_m_dbm" => f.knobs.pm_dbm = v,
                    "p_s_dbm" => f.knobs.ps_dbm = v,
                    "n0_dbm" => f.knobs.n0_dbm = v,
                    "p_eps_dbm" => f.knobs.peps_dbm = v,
                    "alpha_near" => f.knobs.a_near = v,
                    "alpha_far" => f.knobs.a_far = v,
                    "d_c_m" => f.knobs.dc = v,
                    k => panic!("{}:{}: unknown knob {k}", path.display(), n + 1),
                }
            }
            "expect" => match w[1] {
                "sinr" => f.expect_sinr = Some(num(2)),
                "ee" => f.expect_ee = Some(num(2)),
                "offgrid_power" => f.expect_offgrid_power = Some(num(2)),
                "singular" => f.expect_singular = true,
                k => panic!("{}:{}: unknown expectation {k}", path.display(), n + 1),
            },
            k => panic!("{}:{}: unknown directive {k}", path.display(), n + 1),
        }
    }
    assert!(f.txs.len() <= 10, "fixtures hold at most 10 transmitters");
    f
}

pub fn fixtures_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}
