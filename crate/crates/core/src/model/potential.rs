//! Truncated Lennard-Jones pair interaction in reduced units (epsilon = sigma = 1).
//!
//! ```text
//! V(r) = 4 (r^-12 - r^-6)   for r <= r_cutoff
//!        0                  otherwise
//! F_i  = 24 (2 r^-14 - r^-8) (q_i - q_j)
//! ```
//!
//! The truncation is a hard cut, so `V` jumps by `-V(r_cutoff)` there. The
//! optional shift subtracts `V(r_cutoff)` inside the cutoff.

use super::Vec2;
use crate::error::{Error, Result};

/// Pair interaction with a precomputed squared cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairKernel {
    cutoff2: f64,
    shift: f64,
}

impl PairKernel {
    pub fn new(r_cutoff: f64, shift_potential: bool) -> Self {
        let shift = if shift_potential { untruncated(r_cutoff * r_cutoff) } else { 0.0 };
        PairKernel { cutoff2: r_cutoff * r_cutoff, shift }
    }

    #[inline]
    pub fn cutoff2(&self) -> f64 {
        self.cutoff2
    }

    /// Force on `i` from `j` and the pair energy, given `disp = q_i - q_j` and
    /// its squared length. Zero beyond the cutoff.
    #[inline]
    pub fn evaluate(&self, disp: Vec2, r2: f64) -> (Vec2, f64) {
        if r2 > self.cutoff2 {
            return (Vec2::ZERO, 0.0);
        }
        let ir2 = 1.0 / r2;
        let ir6 = ir2 * ir2 * ir2;
        let energy = 4.0 * ir6 * (ir6 - 1.0) - self.shift;
        let scale = 24.0 * ir2 * ir6 * (2.0 * ir6 - 1.0);
        (disp * scale, energy)
    }

    #[inline]
    pub fn energy(&self, r2: f64) -> f64 {
        if r2 > self.cutoff2 {
            0.0
        } else {
            untruncated(r2) - self.shift
        }
    }
}

#[inline]
fn untruncated(r2: f64) -> f64 {
    let ir2 = 1.0 / r2;
    let ir6 = ir2 * ir2 * ir2;
    4.0 * ir6 * (ir6 - 1.0)
}

/// Truncated Lennard-Jones energy at separation `r`.
pub fn lj_potential(r: f64, r_cutoff: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("pair separation must be positive, got {r}")));
    }
    Ok(PairKernel::new(r_cutoff, false).energy(r * r))
}

/// Force exerted on particle `i` by particle `j`, where `disp` is the
/// minimum-image displacement `q_i - q_j`.
pub fn lj_pair_force(disp: Vec2, r_cutoff: f64) -> Result<Vec2> {
    let r2 = disp.norm2();
    if r2 == 0.0 {
        return Err(Error::Domain("coincident particles: zero pair displacement".into()));
    }
    Ok(PairKernel::new(r_cutoff, false).evaluate(disp, r2).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const RC: f64 = 2.5;

    fn central_difference(r: f64, h: f64) -> f64 {
        let plus = lj_potential(r + h, RC).unwrap();
        let minus = lj_potential(r - h, RC).unwrap();
        -(plus - minus) / (2.0 * h)
    }

    #[test]
    fn zero_crossing_at_unit_distance() {
        assert_eq!(lj_potential(1.0, RC).unwrap(), 0.0);
    }

    #[test]
    fn minimum_depth() {
        let r = 2f64.powf(1.0 / 6.0);
        assert!((lj_potential(r, RC).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn value_at_cutoff() {
        // 4 (2.5^-12 - 2.5^-6) = 4 (16777216 - 4096) / 2.5^12 / 4096, evaluated exactly:
        // 2.5^-6 = 0.004096, 2.5^-12 = 0.000016777216
        let exact: f64 = 4.0 * (0.000016777216 - 0.004096);
        assert!((exact + 0.016316891136).abs() < 1e-15);
        let v = lj_potential(2.5, 2.5).unwrap();
        assert!((v - exact).abs() < 1e-15, "{v}");
    }

    #[test]
    fn truncated_beyond_cutoff() {
        assert_eq!(lj_potential(3.0, RC).unwrap(), 0.0);
        assert_eq!(lj_pair_force(Vec2::new(3.0, 0.0), RC).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn zero_separation_is_domain_error() {
        assert!(matches!(lj_potential(0.0, RC), Err(Error::Domain(_))));
        assert!(matches!(lj_pair_force(Vec2::ZERO, RC), Err(Error::Domain(_))));
    }

    #[test]
    fn force_vanishes_at_minimum() {
        let r = 2f64.powf(1.0 / 6.0);
        let f = lj_pair_force(Vec2::new(r, 0.0), RC).unwrap();
        assert!(f.x.abs() < 1e-12 && f.y == 0.0, "{f:?}");
    }

    #[test]
    fn unit_separation_force_matches_finite_difference() {
        let fd = central_difference(1.0, 1e-6);
        assert!((fd - 24.0).abs() < 1e-6, "{fd}");
        assert_eq!(lj_pair_force(Vec2::new(1.0, 0.0), RC).unwrap(), Vec2::new(24.0, 0.0));
    }

    #[test]
    fn shifted_potential_is_continuous() {
        let k = PairKernel::new(RC, true);
        assert!(k.energy(RC * RC).abs() < 1e-15);
        let plain = PairKernel::new(RC, false);
        let d = Vec2::new(1.3, 0.4);
        assert_eq!(k.evaluate(d, d.norm2()).0, plain.evaluate(d, d.norm2()).0);
    }

    proptest! {
        #[test]
        fn analytic_force_matches_finite_difference(r in 0.8f64..2.499) {
            let h = 1e-6;
            let fd = central_difference(r, h);
            let f = lj_pair_force(Vec2::new(r, 0.0), RC).unwrap().x;
            let rel = (f - fd).abs() / f.abs().max(1e-3);
            prop_assert!(rel < 1e-6, "r={} analytic={} fd={} rel={}", r, f, fd, rel);
        }

        #[test]
        fn force_is_antisymmetric(x in -2.5f64..2.5, y in -2.5f64..2.5) {
            let d = Vec2::new(x, y);
            prop_assume!(d.norm2() > 0.01);
            prop_assert_eq!(lj_pair_force(d, RC).unwrap(), -lj_pair_force(-d, RC).unwrap());
        }
    }
}
