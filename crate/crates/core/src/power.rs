//! Transmit power assignment.
//!
//! On-grid SBSs always transmit at `Ps` and macros at `Pm`. An off-grid SBS
//! transmits whatever it harvests from the on-grid SBSs and macros around it,
//! scaled by the conversion efficiency and capped at `Ps`. Harvesting is
//! instantaneous; there is no battery state carried between realizations.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Deployment, Point};
use crate::params::SimParams;

/// Per-transmitter transmit power in watts, index-aligned with [`Deployment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMap {
    pub macro_powers_w: Vec<f64>,
    pub ongrid_powers_w: Vec<f64>,
    pub offgrid_powers_w: Vec<f64>,
}

/// Power an off-grid SBS at `sbs_position` can transmit:
/// `min(Ps, eta * (sum Ps*L over on-grid + sum Pm*L over macros))`.
///
/// Other off-grid SBSs are not harvest sources.
pub fn harvested_power(
    sbs_position: Point,
    ongrid_positions: &[Point],
    macro_positions: &[Point],
    params: &SimParams,
) -> Result<f64> {
    Harvester::new(params).harvest(sbs_position, ongrid_positions, macro_positions)
}

pub fn assign_powers(deployment: &Deployment, params: &SimParams) -> Result<PowerMap> {
    let harvester = Harvester::new(params);
    let offgrid_powers_w = deployment
        .offgrid_positions
        .iter()
        .map(|&p| harvester.harvest(p, &deployment.ongrid_positions, &deployment.macro_positions))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerMap {
        macro_powers_w: vec![params.p_m_w(); deployment.macro_positions.len()],
        ongrid_powers_w: vec![params.p_s_w(); deployment.ongrid_positions.len()],
        offgrid_powers_w,
    })
}

/// Unit conversions hoisted out of the per-SBS loop.
struct Harvester<'a> {
    params: &'a SimParams,
    p_s: f64,
    p_m: f64,
}

impl<'a> Harvester<'a> {
    fn new(params: &'a SimParams) -> Self {
        Harvester {
            params,
            p_s: params.p_s_w(),
            p_m: params.p_m_w(),
        }
    }

    fn harvest(&self, at: Point, ongrid: &[Point], macros: &[Point]) -> Result<f64> {
        let model = &self.params.path_loss;
        let mut from_ongrid = 0.0;
        for n in ongrid {
            from_ongrid += model.gain_sq(at.dist_sq(n))?;
        }
        let mut from_macros = 0.0;
        for m in macros {
            from_macros += model.gain_sq(at.dist_sq(m))?;
        }
        let incident = self.p_s * from_ongrid + self.p_m * from_macros;
        Ok(self.p_s.min(self.params.eta * incident))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SimError;
    use crate::geometry::Region;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn nothing_to_harvest() {
        let params = SimParams::default();
        assert_eq!(harvested_power(p(0.0, 0.0), &[], &[], &params).unwrap(), 0.0);
    }

    #[test]
    fn single_ongrid_source_below_cap() {
        let params = SimParams::default();
        let got = harvested_power(p(0.0, 0.0), &[p(2.0, 0.0)], &[], &params).unwrap();
        // 0.7 * 0.1995262315 * 0.25
        assert_relative_eq!(got, 0.034917090512, max_relative = 1e-9);
    }

    #[test]
    fn cap_binds_for_close_source() {
        let params = SimParams::default();
        let got = harvested_power(p(0.0, 0.0), &[p(0.5, 0.0)], &[], &params).unwrap();
        assert_eq!(got, params.p_s_w());
    }

    #[test]
    fn coincident_source_is_singular() {
        let params = SimParams::default();
        assert_eq!(
            harvested_power(p(1.0, 1.0), &[p(1.0, 1.0)], &[], &params),
            Err(SimError::SingularDistance)
        );
        let mut clamped = params.clone();
        clamped.path_loss.clamp_gain = true;
        assert_eq!(
            harvested_power(p(1.0, 1.0), &[p(1.0, 1.0)], &[], &clamped).unwrap(),
            clamped.p_s_w().min(0.7 * clamped.p_s_w())
        );
    }

    #[test]
    fn three_transmitter_fixture() {
        let params = SimParams::default();
        let d = Deployment {
            macro_positions: vec![p(10.0, 0.0)],
            ongrid_positions: vec![p(2.0, 0.0)],
            offgrid_positions: vec![p(0.0, 0.0)],
            region: Region::new(50.0).unwrap(),
        };
        let map = assign_powers(&d, &params).unwrap();
        assert_relative_eq!(map.offgrid_powers_w[0], 0.7 * (0.1995262315 * 0.25 + 10.0 * 1e-4), max_relative = 1e-9);
        assert_relative_eq!(map.offgrid_powers_w[0], 0.03561709, max_relative = 1e-7);
        assert_eq!(map.ongrid_powers_w, vec![params.p_s_w()]);
        assert_eq!(map.macro_powers_w, vec![params.p_m_w()]);
    }

    #[test]
    fn all_ongrid_deployment() {
        let params = SimParams::default();
        let d = Deployment {
            macro_positions: vec![],
            ongrid_positions: vec![p(3.0, 0.0), p(0.0, 7.0)],
            offgrid_positions: vec![],
            region: Region::new(50.0).unwrap(),
        };
        let map = assign_powers(&d, &params).unwrap();
        assert!(map.offgrid_powers_w.is_empty());
        assert!(map.ongrid_powers_w.iter().all(|&w| w == params.p_s_w()));
    }

    fn arb_points(max: usize) -> impl Strategy<Value = Vec<Point>> {
        prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| Point::new(x, y)), 0..max)
    }

    proptest! {
        #[test]
        fn power_within_cap(at in (-50.0f64..50.0, -50.0f64..50.0), on in arb_points(12), m in arb_points(4)) {
            let params = SimParams::default();
            let at = Point::new(at.0, at.1);
            if let Ok(w) = harvested_power(at, &on, &m, &params) {
                prop_assert!((0.0..=params.p_s_w()).contains(&w));
            }
        }

        #[test]
        fn adding_a_source_never_lowers_power(at in (-50.0f64..50.0, -50.0f64..50.0), on in arb_points(8), m in arb_points(3), extra in (-50.0f64..50.0, -50.0f64..50.0), to_macro in any::<bool>()) {
            let params = SimParams::default();
            let at = Point::new(at.0, at.1);
            let before = harvested_power(at, &on, &m, &params);
            let (mut on2, mut m2) = (on.clone(), m.clone());
            if to_macro { m2.push(Point::new(extra.0, extra.1)) } else { on2.push(Point::new(extra.0, extra.1)) }
            if let (Ok(b), Ok(a)) = (before, harvested_power(at, &on2, &m2, &params)) {
                prop_assert!(a >= b);
            }
        }

        #[test]
        fn linear_in_eta_below_cap(at in (-50.0f64..50.0, -50.0f64..50.0), on in arb_points(8), m in arb_points(3), eta in 0.05f64..0.5) {
            let mut lo = SimParams::default();
            lo.eta = eta;
            let mut hi = lo.clone();
            hi.eta = 2.0 * eta;
            let at = Point::new(at.0, at.1);
            if let (Ok(a), Ok(b)) = (harvested_power(at, &on, &m, &lo), harvested_power(at, &on, &m, &hi)) {
                prop_assert!(b >= a);
                if b < hi.p_s_w() {
                    prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b.max(1e-300));
                }
            }
        }

        #[test]
        fn offgrid_powers_are_local(on in arb_points(6), m in arb_points(3), off in arb_points(6), moved in (-50.0f64..50.0, -50.0f64..50.0)) {
            prop_assume!(off.len() >= 2);
            let params = SimParams::default();
            let region = Region::new(100.0).unwrap();
            let d1 = Deployment { macro_positions: m.clone(), ongrid_positions: on.clone(), offgrid_positions: off.clone(), region };
            let mut off2 = off.clone();
            off2[1] = Point::new(moved.0, moved.1);
            let d2 = Deployment { offgrid_positions: off2, ..d1.clone() };
            if let (Ok(a), Ok(b)) = (assign_powers(&d1, &params), assign_powers(&d2, &params)) {
                prop_assert_eq!(a.offgrid_powers_w[0], b.offgrid_powers_w[0]);
            }
        }
    }
}
