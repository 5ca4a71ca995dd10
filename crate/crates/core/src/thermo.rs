//! Reference pair potentials and compressibility diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, TableKind, Tabulated};
use crate::state::StatePoint;

/// Lennard-Jones parameters; `cutoff` is used by the truncated-shifted form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjParams {
    pub epsilon: f64,
    pub sigma: f64,
    pub cutoff: f64,
}

impl LjParams {
    pub fn new(epsilon: f64, sigma: f64, cutoff: f64) -> Result<Self> {
        if !(epsilon > 0.0 && sigma > 0.0 && cutoff > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Lennard-Jones parameters must be positive (epsilon {epsilon}, sigma {sigma}, cutoff {cutoff})"
            )));
        }
        Ok(Self { epsilon, sigma, cutoff })
    }

    /// Reduced units, `epsilon = sigma = 1`, cutoff 2.5.
    pub fn reduced() -> Self {
        Self { epsilon: 1.0, sigma: 1.0, cutoff: 2.5 }
    }
}

impl Default for LjParams {
    fn default() -> Self {
        Self::reduced()
    }
}

/// `4 eps ((sigma/r)^12 - (sigma/r)^6)`
pub fn lj(r: f64, p: &LjParams) -> f64 {
    let s6 = (p.sigma / r).powi(6);
    4.0 * p.epsilon * (s6 * s6 - s6)
}

/// Lennard-Jones shifted to vanish at the cutoff and zero beyond it.
pub fn truncated_shifted_lj(r: f64, p: &LjParams) -> f64 {
    if r < p.cutoff {
        lj(r, p) - lj(p.cutoff, p)
    } else {
        0.0
    }
}

/// Tabulate the truncated-shifted potential on the potential subgrid.
pub fn tabulate_truncated_shifted_lj(grid: RadialGrid, p: &LjParams) -> Tabulated {
    Tabulated::from_fn(grid, TableKind::Potential, |r| truncated_shifted_lj(r, p))
        .expect("grid-sized table")
}

/// Kirkwood-Buff route `rho kappa_T / beta = 1 + 4 pi rho int h r^2 dr`.
///
/// Uses the same quadrature as the `w = 0` limit of the radial transform, so
/// it equals the spectral `S(0)`.
pub fn kirkwood_buff_compressibility(g: &Tabulated, state: &StatePoint) -> f64 {
    let grid = g.grid();
    let integral: f64 = g
        .full_values()
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let r = grid.r(j);
            r * (r * (v - 1.0))
        })
        .sum();
    1.0 + state.density * 4.0 * PI * grid.dr() * integral
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lj_values() {
        let p = LjParams::reduced();
        assert_eq!(lj(1.0, &p), 0.0);
        assert!((lj(2f64.powf(1.0 / 6.0), &p) + 1.0).abs() < 1e-14);
        assert!((lj(2.0, &p) - 4.0 * (2f64.powi(-12) - 2f64.powi(-6))).abs() < 1e-16);
        assert!((lj(2.0, &p) + 0.0615234375).abs() < 1e-9);
    }

    #[test]
    fn truncated_shifted_values() {
        let p = LjParams::reduced();
        assert_eq!(truncated_shifted_lj(2.5, &p), 0.0);
        assert_eq!(truncated_shifted_lj(10.0, &p), 0.0);
        // 4 (2.5^-12 - 2.5^-6) evaluated by hand
        let at_cut: f64 = 4.0 * (1.0 / 59604.644775390625 - 1.0 / 244.140625);
        assert!((at_cut + 0.0163169).abs() < 1e-7);
        let rmin = 2f64.powf(1.0 / 6.0);
        assert!((truncated_shifted_lj(rmin, &p) - (-1.0 - at_cut)).abs() < 1e-12);
        assert!(truncated_shifted_lj(2.5 - 1e-8, &p).abs() <= 1e-6);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(LjParams::new(0.0, 1.0, 2.5).is_err());
        assert!(LjParams::new(1.0, -1.0, 2.5).is_err());
    }

    #[test]
    fn compressibility_trivial_cases() {
        let grid = RadialGrid::new(0.05, 100, 50).unwrap();
        let ones = Tabulated::rdf(grid, vec![1.0; 100]).unwrap();
        let st = StatePoint::new(0.5, 1.0).unwrap();
        assert_eq!(kirkwood_buff_compressibility(&ones, &st), 1.0);
        let g = Tabulated::from_fn(grid, TableKind::Rdf, |r| 1.0 + (-r).exp()).unwrap();
        let zero = StatePoint::new(0.0, 1.0).unwrap();
        assert_eq!(kirkwood_buff_compressibility(&g, &zero), 1.0);
    }
}
