//! Ornstein-Zernike relation, the linearized HNC operator and a
//! hypernetted-chain forward solver.
//!
//! With `A f = rho h * f` (3D convolution), the linearization of the HNC
//! potential map `U(g) = -log(g)/beta + (h - c)/beta` is
//! `U'(g) g' = -g'/(beta g) + T g' / beta` where
//! `T = (I + A)^-2 (2I + A) A` is diagonal in Fourier space.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{
    detect_core_region, normalize_potential, RadialGrid, TableKind, Tabulated,
    DEFAULT_CORE_THRESHOLD,
};
use crate::state::StatePoint;
use crate::transform::{RadialTransform, SpectralField};

/// Smallest admissible structure factor.
pub const DEFAULT_S_MIN: f64 = 1e-8;

/// Spectral data of a pair correlation function at a fixed state.
#[derive(Debug, Clone)]
pub struct OzContext {
    state: StatePoint,
    grid: RadialGrid,
    h: Vec<f64>,
    h_hat: SpectralField,
    structure_factor: SpectralField,
}

impl OzContext {
    pub fn state(&self) -> &StatePoint {
        &self.state
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// `h = g - 1` on the full grid.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h_hat(&self) -> &SpectralField {
        &self.h_hat
    }

    /// `S(w_l) = 1 + rho h^(w_l)` with the `w = 0` limit.
    pub fn structure_factor(&self) -> &SpectralField {
        &self.structure_factor
    }
}

/// Transform `h = g - 1` and check that the structure factor stays above `s_min`.
pub fn make_oz_context(g: &Tabulated, state: &StatePoint, s_min: f64) -> Result<OzContext> {
    let h: Vec<f64> = g.full_values().iter().map(|v| v - 1.0).collect();
    let mut transform = RadialTransform::new(*g.grid());
    let h_hat = transform.forward_values(&h);
    let rho = state.density;
    let structure_factor = h_hat.map(|x| 1.0 + rho * x);
    check_structure_factor(&structure_factor, s_min)?;
    Ok(OzContext { state: *state, grid: *g.grid(), h, h_hat, structure_factor })
}

fn check_structure_factor(s: &SpectralField, s_min: f64) -> Result<()> {
    if !(s.zero_limit() > s_min) {
        return Err(Error::SingularStructureFactor { omega: 0.0, value: s.zero_limit() });
    }
    if let Some(l) = s.values().iter().position(|v| !(*v > s_min)) {
        return Err(Error::SingularStructureFactor { omega: s.omega(l), value: s.values()[l] });
    }
    Ok(())
}

/// `c^ = h^ / (1 + rho h^)` on the frequency ladder.
pub fn direct_correlation_spectrum(ctx: &OzContext) -> SpectralField {
    let rho = ctx.state.density;
    ctx.h_hat.map(|h| h / (1.0 + rho * h))
}

/// Direct correlation function `c` solving `c + rho h*c = h`.
pub fn direct_correlation(ctx: &OzContext) -> Tabulated {
    if ctx.state.density == 0.0 {
        // c = h; skip the round trip so the identity holds bit for bit
        return Tabulated::from_parts_unchecked(ctx.grid, ctx.h.clone(), TableKind::Correlation);
    }
    let c_hat = direct_correlation_spectrum(ctx);
    RadialTransform::new(ctx.grid).inverse(&c_hat, TableKind::Correlation)
}

/// Fourier symbol `(2 + x) x / (1 + x)^2` with `x = rho h^`.
#[inline]
pub fn t_symbol_value(x: f64) -> f64 {
    (2.0 + x) * x / ((1.0 + x) * (1.0 + x))
}

/// Symbol of `T` on the frequency ladder.
pub fn t_symbol(ctx: &OzContext) -> SpectralField {
    let rho = ctx.state.density;
    ctx.h_hat.map(|h| t_symbol_value(rho * h))
}

/// `T f` evaluated spectrally; `f` is zero-padded to the full grid.
pub fn apply_t(ctx: &OzContext, f: &Tabulated) -> Tabulated {
    let symbol = t_symbol(ctx);
    apply_symbol(&ctx.grid, symbol.values(), &f.full_values())
}

pub(crate) fn apply_symbol(grid: &RadialGrid, symbol: &[f64], f: &[f64]) -> Tabulated {
    let mut transform = RadialTransform::new(*grid);
    let f_hat = transform.forward_values(f);
    let product: Vec<f64> = f_hat.values().iter().zip(symbol).map(|(a, t)| a * t).collect();
    let values = transform.inverse_values(&product);
    Tabulated::from_parts_unchecked(*grid, values, TableKind::Generic)
}

/// Dense `F^-1 diag(symbol) F` for the discrete transform pair of `grid`.
///
/// Entry `(j, k)` is `2/(m+1) * r_k / r_j * sum_l t_l sin(pi l j/(m+1)) sin(pi l k/(m+1))`.
pub fn matrix_from_symbol(grid: &RadialGrid, symbol: &[f64]) -> DMatrix<f64> {
    let m = grid.m();
    assert_eq!(symbol.len(), m);
    let scale = (2.0 / (m + 1) as f64).sqrt();
    let s = DMatrix::from_fn(m, m, |l, j| {
        scale * (std::f64::consts::PI * ((l + 1) * (j + 1)) as f64 / (m + 1) as f64).sin()
    });
    let mut weighted = s.clone();
    for l in 0..m {
        weighted.row_mut(l).scale_mut(symbol[l]);
    }
    let mut t = s.transpose() * weighted;
    for j in 0..m {
        for k in 0..m {
            t[(j, k)] *= grid.r(k) / grid.r(j);
        }
    }
    t
}

/// Matrix representation of `T` on the full grid.
pub fn assemble_t_matrix(ctx: &OzContext) -> DMatrix<f64> {
    matrix_from_symbol(&ctx.grid, t_symbol(ctx).values())
}

/// `beta * U(g) = -log g + h - c` on the potential subgrid, without any
/// core or tail processing (core entries may be infinite).
pub fn hnc_potential_raw(g: &Tabulated, state: &StatePoint, s_min: f64) -> Result<Vec<f64>> {
    let ctx = make_oz_context(g, state, s_min)?;
    let c = direct_correlation(&ctx);
    let n = g.grid().n();
    Ok((0..n)
        .map(|j| {
            let gj = g.values()[j];
            (-gj.ln() + (gj - 1.0) - c.values()[j]) / state.beta
        })
        .collect())
}

/// HNC inversion `U(g) = -log(g)/beta + (h - c)/beta`, tail-shifted and
/// extrapolated into the core.
pub fn hnc_potential(g: &Tabulated, state: &StatePoint) -> Result<Tabulated> {
    let raw = hnc_potential_raw(g, state, DEFAULT_S_MIN)?;
    let core = detect_core_region(g, g, DEFAULT_CORE_THRESHOLD)?;
    let u = Tabulated::from_parts_unchecked(*g.grid(), raw, TableKind::Potential);
    normalize_potential(&u, core)
}

/// Picard iteration for the HNC integral equation with linear mixing on the
/// indirect correlation `gamma = h - c`.
#[derive(Debug, Clone, Copy)]
pub struct HncSolver {
    pub mix: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub s_min: f64,
}

impl Default for HncSolver {
    fn default() -> Self {
        Self { mix: 0.15, tol: 1e-10, max_iter: 20_000, s_min: DEFAULT_S_MIN }
    }
}

#[derive(Debug, Clone)]
pub struct HncSolution {
    pub g: Tabulated,
    /// Indirect correlation `h - c` on the full grid.
    pub gamma: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl HncSolver {
    pub fn new(mix: f64, tol: f64, max_iter: usize) -> Result<Self> {
        if !(mix > 0.0 && mix <= 1.0) {
            return Err(Error::InvalidArgument(format!("mixing must lie in (0, 1], got {mix}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self { mix, tol, max_iter, s_min: DEFAULT_S_MIN })
    }

    /// Solve from `gamma = 0`, the exact solution at zero density.
    ///
    /// The density is ramped up when the direct Picard iteration from the
    /// Mayer function leaves the region of positive structure factors.
    pub fn solve(&self, u: &Tabulated, state: &StatePoint) -> Result<HncSolution> {
        let first = match self.solve_from(u, state, None) {
            Ok(sol) => return Ok(sol),
            Err(e @ Error::SingularStructureFactor { .. }) => e,
            Err(Error::NoConvergence { residual, .. }) if !residual.is_finite() => {
                Error::NoConvergence { iterations: 0, residual }
            }
            Err(e) => return Err(e),
        };
        let target = state.density;
        let min_step = target / 1024.0;
        let mut known = 0.0;
        let mut gamma = vec![0.0; u.grid().m()];
        let mut step = target / 2.0;
        let stage = HncSolver { tol: self.tol.max(1e-8), ..*self };
        while known < target {
            let rho = (known + step).min(target);
            let solver = if rho == target { *self } else { stage };
            let st = StatePoint { density: rho, ..*state };
            match solver.solve_from(u, &st, Some(&gamma)) {
                Ok(sol) if rho == target => return Ok(sol),
                Ok(sol) => {
                    known = rho;
                    gamma = sol.gamma;
                    step *= 1.5;
                }
                Err(Error::SingularStructureFactor { .. }) | Err(Error::NoConvergence { .. })
                    if step > min_step =>
                {
                    step *= 0.5;
                }
                Err(Error::SingularStructureFactor { .. }) => return Err(first),
                Err(e) => return Err(e),
            }
        }
        Err(first)
    }

    /// Solve starting from a previous `gamma` (zero if `None`).
    pub fn solve_from(
        &self,
        u: &Tabulated,
        state: &StatePoint,
        gamma0: Option<&[f64]>,
    ) -> Result<HncSolution> {
        let grid = *u.grid();
        let m = grid.m();
        let beta_u: Vec<f64> = u.full_values().iter().map(|v| state.beta * v).collect();
        let rho = state.density;
        let mut gamma = match gamma0 {
            Some(g0) if g0.len() == m => g0.to_vec(),
            _ => vec![0.0; m],
        };
        let mut transform = RadialTransform::new(grid);
        let mut residual = f64::INFINITY;
        let closure = |gamma: &[f64]| -> Vec<f64> {
            beta_u.iter().zip(gamma).map(|(bu, gm)| (-bu + gm).exp()).collect()
        };
        for iteration in 1..=self.max_iter {
            let g = closure(&gamma);
            let c: Vec<f64> = g.iter().zip(&gamma).map(|(gv, gm)| gv - 1.0 - gm).collect();
            let c_hat = transform.forward_values(&c);
            let denom = c_hat.map(|c| 1.0 - rho * c);
            if let Err(Error::SingularStructureFactor { omega, value }) =
                check_structure_factor(&denom, self.s_min)
            {
                return Err(Error::SingularStructureFactor { omega, value: 1.0 / value });
            }
            let gamma_hat: Vec<f64> = c_hat
                .values()
                .iter()
                .zip(denom.values())
                .map(|(c, d)| c / d - c)
                .collect();
            let gamma_new = transform.inverse_values(&gamma_hat);
            let g_new = closure(&gamma_new);
            residual = g_new
                .iter()
                .zip(&g)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            if !residual.is_finite() {
                return Err(Error::NoConvergence { iterations: iteration, residual });
            }
            if residual <= self.tol {
                let g = Tabulated::from_parts_unchecked(grid, g_new, TableKind::Rdf);
                return Ok(HncSolution { g, gamma: gamma_new, iterations: iteration, residual });
            }
            for (gm, gn) in gamma.iter_mut().zip(&gamma_new) {
                *gm = (1.0 - self.mix) * *gm + self.mix * gn;
            }
        }
        Err(Error::NoConvergence { iterations: self.max_iter, residual })
    }
}

/// Solve the HNC equation for `g` given the potential `u`.
pub fn hnc_forward_solve(
    u: &Tabulated,
    state: &StatePoint,
    mix: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Tabulated> {
    Ok(HncSolver::new(mix, tol, max_iter)?.solve(u, state)?.g)
}
