//! Gauss-Newton update built on the HNC linearization at the target RDF,
//! optionally constrained to hit a prescribed virial pressure.

use nalgebra::{DMatrix, DVector, SymmetricEigen, LU};

use crate::error::{Error, Result};
use crate::grid::{extrapolate_core, RadialGrid, TableKind, Tabulated};
use crate::inversion::config::SchemeConfig;
use crate::inversion::steps::{joint_core, TargetLinearization};
use crate::oz::matrix_from_symbol;
use crate::state::StatePoint;

/// Condition number above which the reduced Gram matrix is regularized.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// `m x (n-1)` matrix with `A_ij = dr` for `i <= j < n-1` and zeros elsewhere;
/// `A w` is piecewise linear, vanishes at `r_n` and has slope `-w_i` on `(r_i, r_{i+1})`.
pub fn antiderivative_matrix(grid: &RadialGrid) -> DMatrix<f64> {
    let (m, n) = (grid.m(), grid.n());
    let cols = n.saturating_sub(1);
    DMatrix::from_fn(m, cols, |i, j| if i <= j { grid.dr() } else { 0.0 })
}

/// `l_i = (2/3) pi rho^2 (g_i + g_{i+1})/2 (r_{i+1}^4 - r_i^4)/4`, `i = 1..n-1`.
pub fn pressure_constraint_vector(g: &Tabulated, state: &StatePoint) -> Vec<f64> {
    let grid = g.grid();
    let rho = state.density;
    let pre = 2.0 / 3.0 * std::f64::consts::PI * rho * rho;
    (0..grid.n().saturating_sub(1))
        .map(|i| {
            let (r0, r1) = (grid.r(i), grid.r(i + 1));
            let gm = 0.5 * (g.values()[i] + g.values()[i + 1]);
            pre * gm * (r1.powi(4) - r0.powi(4)) / 4.0
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct HncgnOutcome {
    pub potential: Tabulated,
    /// Slopes `w` on the intervals `(r_i, r_{i+1})`, `i = 1..n-1` (zero inside the core).
    pub w: Vec<f64>,
    /// `l^T w - (p - p_k)` when a pressure target is active.
    pub constraint_residual: Option<f64>,
}

/// Gauss-Newton solver state: the dense `T` matrix of the target and the LU
/// factorization of `U` for the most recent core boundary.
pub struct GaussNewton {
    lin: TargetLinearization,
    t: DMatrix<f64>,
    target: Tabulated,
    weight_exponent: f64,
    constraint: Vec<f64>,
    factor: Option<(usize, LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
}

impl GaussNewton {
    pub fn new(g: &Tabulated, state: &StatePoint, weight_exponent: f64) -> Result<Self> {
        Self::from_linearization(TargetLinearization::new(g, state)?, g, weight_exponent)
    }

    pub fn from_linearization(
        lin: TargetLinearization,
        g: &Tabulated,
        weight_exponent: f64,
    ) -> Result<Self> {
        if !(weight_exponent >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "weight exponent must be >= 0, got {weight_exponent}"
            )));
        }
        let t = matrix_from_symbol(lin.grid(), lin.symbol());
        let constraint = pressure_constraint_vector(g, lin.state());
        Ok(Self { lin, t, target: g.clone(), weight_exponent, constraint, factor: None })
    }

    pub fn constraint_vector(&self) -> &[f64] {
        &self.constraint
    }

    fn weight(&self, r: f64) -> f64 {
        if self.weight_exponent == 0.0 {
            1.0
        } else {
            (1.0 + r * r).powf(self.weight_exponent)
        }
    }

    /// `U^-1 X` restricted to nodes at and beyond `j0`.
    fn solve_u(&mut self, j0: usize, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if self.factor.as_ref().map(|(b, _)| *b) != Some(j0) {
            let m = self.lin.grid().m();
            let beta = self.lin.state().beta;
            let g = self.target.values();
            let mut u = self.t.view((j0, j0), (m - j0, m - j0)).into_owned();
            for i in 0..m - j0 {
                u[(i, i)] -= 1.0 / g[j0 + i];
            }
            u /= beta;
            self.factor = Some((j0, u.lu()));
        }
        let lu = &self.factor.as_ref().unwrap().1;
        lu.solve(x).ok_or(Error::SingularNormalEquations)
    }

    /// `||W (g - g_k - U^-1 v)||_2` for a potential increment `v` given on the
    /// potential grid; entries inside the joint core are ignored.
    pub fn model_residual(&mut self, g_k: &Tabulated, v: &[f64]) -> Result<f64> {
        let core = joint_core(&self.target, g_k)?;
        let j0 = core.boundary;
        let grid = *self.lin.grid();
        let (m, n) = (grid.m(), grid.n());
        let x = DMatrix::from_fn(m - j0, 1, |i, _| if j0 + i < n { v[j0 + i] } else { 0.0 });
        let z = self.solve_u(j0, &x)?;
        let g = self.target.values();
        let sum: f64 = (0..m - j0)
            .map(|i| {
                let d = self.weight(grid.r(j0 + i)) * (g[j0 + i] - g_k.values()[j0 + i] - z[(i, 0)]);
                d * d
            })
            .sum();
        Ok(sum.sqrt())
    }

    /// One Gauss-Newton step; `pressure = Some((p_target, p_k))` activates the constraint.
    pub fn step(
        &mut self,
        u_k: &Tabulated,
        g_k: &Tabulated,
        pressure: Option<(f64, f64)>,
    ) -> Result<HncgnOutcome> {
        let grid = *self.lin.grid();
        if !u_k.grid().same_mesh(&grid) || !g_k.grid().same_mesh(&grid) || g_k.len() != grid.m() {
            return Err(Error::GridMismatch);
        }
        let core = joint_core(&self.target, g_k)?;
        let j0 = core.boundary;
        let (m, n) = (grid.m(), grid.n());
        let rows = m - j0;
        let q = n - 1 - j0;
        let a = DMatrix::from_fn(rows, q, |i, c| if i <= c { grid.dr() } else { 0.0 });
        let mut b_mat = self.solve_u(j0, &a)?;
        let g = self.target.values();
        let mut y = DVector::from_fn(rows, |i, _| g[j0 + i] - g_k.values()[j0 + i]);
        for i in 0..rows {
            let wt = self.weight(grid.r(j0 + i));
            y[i] *= wt;
            b_mat.row_mut(i).scale_mut(wt);
        }
        let ell: Vec<f64> = self.constraint[j0..].to_vec();

        let (local_w, residual) = match pressure {
            None => (least_squares(&b_mat, &y)?, None),
            Some((p_target, p_k)) => {
                let d = p_target - p_k;
                let (i0, lmax) = ell
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |acc, (i, l)| if l.abs() > acc.1.abs() { (i, *l) } else { acc });
                if lmax == 0.0 {
                    if d != 0.0 {
                        return Err(Error::ConstraintInfeasible { gap: d });
                    }
                    (least_squares(&b_mat, &y)?, Some(0.0))
                } else {
                    // w_{i0} = (d - sum_{i != i0} l_i w_i) / l_{i0}
                    let col0 = b_mat.column(i0).into_owned();
                    let rhs = &y - &col0 * (d / lmax);
                    let mut reduced = DMatrix::zeros(rows, q - 1);
                    for (c, i) in (0..q).filter(|&i| i != i0).enumerate() {
                        let col = b_mat.column(i) - &col0 * (ell[i] / lmax);
                        reduced.set_column(c, &col);
                    }
                    let z = if q > 1 { least_squares(&reduced, &rhs)? } else { DVector::zeros(0) };
                    let mut w = DVector::zeros(q);
                    let mut acc = 0.0;
                    for (c, i) in (0..q).filter(|&i| i != i0).enumerate() {
                        w[i] = z[c];
                        acc += ell[i] * z[c];
                    }
                    w[i0] = (d - acc) / lmax;
                    let achieved: f64 = ell.iter().zip(w.iter()).map(|(l, x)| l * x).sum();
                    (w, Some(achieved - d))
                }
            }
        };

        let mut values = u_k.values().to_vec();
        let mut tail = 0.0;
        for j in (j0..n).rev() {
            values[j] += tail;
            if j > j0 {
                tail += grid.dr() * local_w[j - 1 - j0];
            }
        }
        let raw = Tabulated::from_parts_unchecked(grid, values, TableKind::Potential);
        let potential = extrapolate_core(&raw, core)?;
        let mut w = vec![0.0; n - 1];
        w[j0..].copy_from_slice(local_w.as_slice());
        Ok(HncgnOutcome { potential, w, constraint_residual: residual })
    }
}

/// Solve `min ||M x - y||` through the normal equations, regularizing an
/// ill-conditioned Gram matrix.
fn least_squares(m: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let q = m.ncols();
    if q == 0 {
        return Ok(DVector::zeros(0));
    }
    let mut gram = m.transpose() * m;
    let rhs = m.transpose() * y;
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if !(max > 0.0) {
        return Err(Error::SingularNormalEquations);
    }
    if !(min > 0.0) || max / min > GRAM_CONDITION_LIMIT {
        let lambda = 1e-10 * gram.trace() / q as f64;
        for i in 0..q {
            gram[(i, i)] += lambda;
        }
    }
    let chol = gram.cholesky().ok_or(Error::SingularNormalEquations)?;
    Ok(chol.solve(&rhs))
}

/// Single HNCGN step from scratch; see [`GaussNewton`] for repeated use.
/// `p_k` is only used when `cfg` carries a pressure target.
pub fn hncgn_step(
    u_k: &Tabulated,
    g_k: &Tabulated,
    g: &Tabulated,
    state: &StatePoint,
    cfg: &SchemeConfig,
    p_k: f64,
) -> Result<Tabulated> {
    let pressure = cfg.pressure_target.map(|p| (p, p_k));
    Ok(GaussNewton::new(g, state, cfg.weight_exponent)?.step(u_k, g_k, pressure)?.potential)
}
