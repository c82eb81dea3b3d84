//! Spatial point patterns for one network realization.
//!
//! All processes are sampled on a disc centred on the typical user, who sits
//! at the origin.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::params::SimParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

/// Simulation window: a disc of the given radius centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    radius_m: f64,
}

impl Region {
    pub fn new(radius_m: f64) -> Result<Self> {
        if !(radius_m.is_finite() && radius_m > 0.0) {
            return Err(SimError::param("region_radius_m", format!("must be > 0, got {radius_m}")));
        }
        Ok(Region { radius_m })
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn area_m2(&self) -> f64 {
        std::f64::consts::PI * self.radius_m * self.radius_m
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.norm_sq() <= self.radius_m * self.radius_m
    }
}

/// One spatial realization of the network. The typical user is at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub macro_positions: Vec<Point>,
    pub ongrid_positions: Vec<Point>,
    pub offgrid_positions: Vec<Point>,
    pub region: Region,
}

impl Deployment {
    pub fn empty(region: Region) -> Self {
        Deployment {
            macro_positions: Vec::new(),
            ongrid_positions: Vec::new(),
            offgrid_positions: Vec::new(),
            region,
        }
    }

    pub fn sbs_count(&self) -> usize {
        self.ongrid_positions.len() + self.offgrid_positions.len()
    }
}

/// Samples a homogeneous PPP of the given intensity (points per m²) on `region`.
///
/// The count is Poisson with mean `intensity * area`; each point is placed
/// uniformly on the disc via radius `R * sqrt(u)` and a uniform angle.
pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, region: Region, rng: &mut R) -> Result<Vec<Point>> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(SimError::param("intensity", format!("must be >= 0, got {intensity}")));
    }
    let mean = intensity * region.area_m2();
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| SimError::param("intensity", e.to_string()))?
        .sample(rng) as usize;

    let radius = region.radius_m();
    let points = (0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            Point::new(r * theta.cos(), r * theta.sin())
        })
        .collect();
    Ok(points)
}

/// Independent thinning: each point is kept with probability `beta`.
///
/// Returns `(kept, removed)`, each preserving input order.
pub fn thin<R: Rng + ?Sized>(points: &[Point], beta: f64, rng: &mut R) -> Result<(Vec<Point>, Vec<Point>)> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(SimError::param("beta", format!("must lie in [0, 1], got {beta}")));
    }
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for p in points {
        // one uniform per point regardless of beta keeps streams aligned across beta values
        let u: f64 = rng.random();
        if u < beta {
            kept.push(*p);
        } else {
            removed.push(*p);
        }
    }
    Ok((kept, removed))
}

/// Index and distance of the point closest to `query`; ties go to the lowest index.
pub fn nearest(points: &[Point], query: Point) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d2 = p.dist_sq(&query);
        match best {
            Some((_, b)) if d2 >= b => {}
            _ => best = Some((i, d2)),
        }
    }
    best.map(|(i, d2)| (i, d2.sqrt())).ok_or(SimError::NoCandidate)
}

/// Draws one realization: macros ~ PPP(λm), SBSs ~ PPP(λs) thinned with β
/// into on-grid (kept) and off-grid (removed).
pub fn deploy<R: Rng + ?Sized>(params: &SimParams, rng: &mut R) -> Result<Deployment> {
    params.validate()?;
    let macro_positions = sample_ppp(params.lambda_m, params.region, rng)?;
    let sbs = sample_ppp(params.lambda_s, params.region, rng)?;
    let (ongrid_positions, offgrid_positions) = thin(&sbs, params.beta, rng)?;
    Ok(Deployment {
        macro_positions,
        ongrid_positions,
        offgrid_positions,
        region: params.region,
    })
}
