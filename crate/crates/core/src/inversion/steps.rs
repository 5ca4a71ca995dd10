//! Update rules `u_k -> u_{k+1}` for the inverse problem.
//!
//! Every increment is formed on the non-core nodes of the potential grid; the
//! result is then tail-shifted and extrapolated into the core detected from
//! `(g, g_k)`.

use crate::error::{Error, Result};
use crate::grid::{
    detect_core_region, normalize_potential, CoreRegion, RadialGrid, TableKind, Tabulated,
    DEFAULT_CORE_THRESHOLD,
};
use crate::oz::{apply_symbol, direct_correlation, make_oz_context, t_symbol, DEFAULT_S_MIN};
use crate::state::StatePoint;

/// Cavity values at or below this bound are rejected by the PY variant.
pub const CAVITY_FLOOR: f64 = 1e-12;

/// Linearization of the HNC potential map at the target RDF: the symbol of
/// `T` and the target's direct correlation function.
#[derive(Debug, Clone)]
pub struct TargetLinearization {
    state: StatePoint,
    grid: RadialGrid,
    symbol: Vec<f64>,
    c: Tabulated,
}

impl TargetLinearization {
    pub fn new(g: &Tabulated, state: &StatePoint) -> Result<Self> {
        Self::with_s_min(g, state, DEFAULT_S_MIN)
    }

    pub fn with_s_min(g: &Tabulated, state: &StatePoint, s_min: f64) -> Result<Self> {
        let ctx = make_oz_context(g, state, s_min)?;
        let symbol = t_symbol(&ctx).values().to_vec();
        let c = direct_correlation(&ctx);
        Ok(Self { state: *state, grid: *g.grid(), symbol, c })
    }

    pub fn state(&self) -> &StatePoint {
        &self.state
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Direct correlation function of the target.
    pub fn direct_correlation(&self) -> &Tabulated {
        &self.c
    }

    /// `phi = T (g - g_k)` on the full grid.
    pub fn phi(&self, g: &Tabulated, g_k: &Tabulated) -> Vec<f64> {
        if self.state.density == 0.0 {
            return vec![0.0; self.grid.m()];
        }
        let diff: Vec<f64> = g.values().iter().zip(g_k.values()).map(|(a, b)| a - b).collect();
        apply_symbol(&self.grid, &self.symbol, &diff).into_values()
    }
}

fn check_inputs(u_k: &Tabulated, g_k: &Tabulated, g: &Tabulated) -> Result<()> {
    if !u_k.grid().same_mesh(g.grid()) || !g_k.grid().same_mesh(g.grid()) {
        return Err(Error::GridMismatch);
    }
    if u_k.len() != g.grid().n() || g.len() != g.grid().m() || g_k.len() != g.len() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Joint core of `g` and `g_k`; it must leave at least two potential nodes.
pub(crate) fn joint_core(g: &Tabulated, g_k: &Tabulated) -> Result<CoreRegion> {
    let core = detect_core_region(g, g_k, DEFAULT_CORE_THRESHOLD)?;
    if core.boundary + 2 > g.grid().n() {
        return Err(Error::DegenerateRdf);
    }
    Ok(core)
}

/// `u_k + increment` beyond the joint core, then normalized.
fn apply_increment(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    increment: impl Fn(usize) -> Result<f64>,
) -> Result<Tabulated> {
    check_inputs(u_k, g_k, g)?;
    let core = joint_core(g, g_k)?;
    let mut values = u_k.values().to_vec();
    for (j, v) in values.iter_mut().enumerate().skip(core.boundary) {
        *v += increment(j)?;
    }
    let raw = Tabulated::from_parts_unchecked(*u_k.grid(), values, TableKind::Potential);
    normalize_potential(&raw, core)
}

/// Potential of mean force `-log(g)/beta`, tail-shifted and core-extrapolated.
pub fn pmf_initial_guess(g: &Tabulated, beta: f64) -> Result<Tabulated> {
    let core = joint_core(g, g)?;
    let n = g.grid().n();
    let values = (0..n)
        .map(|j| if j < core.boundary { 0.0 } else { -g.values()[j].ln() / beta })
        .collect();
    let raw = Tabulated::from_parts_unchecked(*g.grid(), values, TableKind::Potential);
    normalize_potential(&raw, core)
}

/// Iterative Boltzmann inversion: `u_k + log(g_k/g)/beta`.
pub fn ibi_step(u_k: &Tabulated, g_k: &Tabulated, g: &Tabulated, beta: f64) -> Result<Tabulated> {
    let (gk, gt) = (g_k.values(), g.values());
    apply_increment(u_k, g_k, g, |j| Ok((gk[j] / gt[j]).ln() / beta))
}

/// Relative update `u_k + (g_k - g)/(beta g)`.
pub fn relative_step(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    beta: f64,
) -> Result<Tabulated> {
    let (gk, gt) = (g_k.values(), g.values());
    apply_increment(u_k, g_k, g, |j| Ok((gk[j] - gt[j]) / gt[j] / beta))
}

pub fn ihnc_step(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    state: &StatePoint,
) -> Result<Tabulated> {
    ihnc_step_with(&TargetLinearization::new(g, state)?, u_k, g_k, g)
}

/// IHNC update `u_k + (log(g_k/g) + T(g - g_k))/beta` with `T` taken from the target.
pub fn ihnc_step_with(
    lin: &TargetLinearization,
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
) -> Result<Tabulated> {
    let beta = lin.state.beta;
    let phi = lin.phi(g, g_k);
    let (gk, gt) = (g_k.values(), g.values());
    apply_increment(u_k, g_k, g, |j| Ok(((gk[j] / gt[j]).ln() + phi[j]) / beta))
}

pub fn hncn_step(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    state: &StatePoint,
) -> Result<Tabulated> {
    hncn_step_with(&TargetLinearization::new(g, state)?, u_k, g_k, g)
}

/// HNC Newton update `u_k + ((g_k - g)/g + T(g - g_k))/beta`.
pub fn hncn_step_with(
    lin: &TargetLinearization,
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
) -> Result<Tabulated> {
    let beta = lin.state.beta;
    let phi = lin.phi(g, g_k);
    let (gk, gt) = (g_k.values(), g.values());
    apply_increment(u_k, g_k, g, |j| Ok(((gk[j] - gt[j]) / gt[j] + phi[j]) / beta))
}

pub fn lwr_step(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    state: &StatePoint,
) -> Result<Tabulated> {
    lwr_step_with(&TargetLinearization::new(g, state)?, u_k, g_k, g)
}

/// Secant update `u_k + U(g) - U(g_k)` written as
/// `u_k + (log(g_k/g) + g - g_k - c + c_k)/beta`.
pub fn lwr_step_with(
    lin: &TargetLinearization,
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
) -> Result<Tabulated> {
    let beta = lin.state.beta;
    let ctx_k = make_oz_context(g_k, &lin.state, DEFAULT_S_MIN)?;
    let c_k = direct_correlation(&ctx_k);
    let (gk, gt) = (g_k.values(), g.values());
    let (c, ck) = (lin.c.values(), c_k.values());
    apply_increment(u_k, g_k, g, |j| {
        Ok(((gk[j] / gt[j]).ln() + gt[j] - gk[j] - c[j] + ck[j]) / beta)
    })
}

pub fn pyv_step(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    state: &StatePoint,
) -> Result<Tabulated> {
    pyv_step_with(&TargetLinearization::new(g, state)?, u_k, g_k, g)
}

/// IHNC with the correction divided by the cavity function `y_k = g_k exp(beta u_k)`.
pub fn pyv_step_with(
    lin: &TargetLinearization,
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
) -> Result<Tabulated> {
    let beta = lin.state.beta;
    let phi = lin.phi(g, g_k);
    let (gk, gt, uk) = (g_k.values(), g.values(), u_k.values());
    let grid = *g.grid();
    apply_increment(u_k, g_k, g, |j| {
        let y = gk[j] * (beta * uk[j]).exp();
        if !(y > CAVITY_FLOOR) {
            return Err(Error::CavityUnderflow { r: grid.r(j), value: y });
        }
        Ok(((gk[j] / gt[j]).ln() + phi[j] / y) / beta)
    })
}
