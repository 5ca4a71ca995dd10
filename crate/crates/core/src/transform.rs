//! Three-dimensional Fourier transform of radial functions.
//!
//! On the grid `r_j = j*dr`, `j = 1..m`, the trapezoidal rule for
//!
//! ```text
//! f^(w) = 2/w * int_0^inf r f(r) sin(2 pi r w) dr
//! ```
//!
//! evaluated at `w_l = l / (2 (m+1) dr)` is a type-I discrete sine transform of
//! `r_j f(r_j)`. The DST is computed with a complex FFT of length `2(m+1)` on
//! the odd extension. With `dw = 1/(2 (m+1) dr)` the inverse rule is the same
//! DST again, so the discrete round trip is exact up to rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{RadialGrid, TableKind, Tabulated};

/// Values on the frequency ladder `w_l = l * dw`, `l = 1..m`, of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: RadialGrid,
    values: Vec<f64>,
    zero: f64,
}

impl SpectralField {
    pub fn new(grid: RadialGrid, values: Vec<f64>, zero: f64) -> Result<Self> {
        if values.len() != grid.m() {
            return Err(Error::InvalidArgument(format!(
                "spectral field needs {} values, got {}",
                grid.m(),
                values.len()
            )));
        }
        Ok(Self { grid, values, zero })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Values at `w_1..w_m`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `w -> 0` limit.
    pub fn zero_limit(&self) -> f64 {
        self.zero
    }

    pub fn delta_omega(&self) -> f64 {
        delta_omega(&self.grid)
    }

    /// Frequency of zero-based index `idx`, i.e. `w_{idx+1}`.
    pub fn omega(&self, idx: usize) -> f64 {
        (idx + 1) as f64 * self.delta_omega()
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.values.len()).map(|l| self.omega(l)).collect()
    }

    /// `(w, value)` columns including the `w = 0` limit as the first row.
    pub fn columns(&self) -> (Vec<f64>, Vec<f64>) {
        let mut w = vec![0.0];
        w.extend(self.omegas());
        let mut v = vec![self.zero];
        v.extend_from_slice(&self.values);
        (w, v)
    }

    /// Pointwise map on the ladder and on the zero limit.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            zero: f(self.zero),
        }
    }

    /// Pointwise combination of two fields on the same ladder.
    pub fn zip_with(&self, other: &SpectralField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.grid.same_mesh(&other.grid));
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            zero: f(self.zero, other.zero),
        }
    }
}

/// Frequency spacing `1 / (2 (m+1) dr)`.
pub fn delta_omega(grid: &RadialGrid) -> f64 {
    1.0 / (2.0 * (grid.m() + 1) as f64 * grid.dr())
}

/// Nyquist-type bound `w* = 1 / (2 dr)`.
pub fn omega_star(grid: &RadialGrid) -> f64 {
    0.5 / grid.dr()
}

/// Reusable FFT plan for one grid size.
pub struct RadialTransform {
    grid: RadialGrid,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl RadialTransform {
    pub fn new(grid: RadialGrid) -> Self {
        let len = 2 * (grid.m() + 1);
        let fft = FftPlanner::new().plan_fft_forward(len);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Self { grid, fft, buffer: vec![Complex64::default(); len], scratch }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// `X_l = sum_j x_j sin(pi l j / (m+1))`, both indices `1..=m`, stored zero-based.
    pub fn dst1(&mut self, x: &[f64], out: &mut [f64]) {
        let m = self.grid.m();
        debug_assert_eq!(x.len(), m);
        let len = 2 * (m + 1);
        self.buffer.iter_mut().for_each(|c| *c = Complex64::default());
        for (j, &v) in x.iter().enumerate() {
            self.buffer[j + 1] = Complex64::new(v, 0.0);
            self.buffer[len - j - 1] = Complex64::new(-v, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buffer, &mut self.scratch);
        for (l, o) in out.iter_mut().enumerate() {
            *o = -0.5 * self.buffer[l + 1].im;
        }
    }

    /// Forward transform of samples on the full grid (length `m`).
    pub fn forward_values(&mut self, f: &[f64]) -> SpectralField {
        let grid = self.grid;
        let dr = grid.dr();
        let x: Vec<f64> = f.iter().enumerate().map(|(j, &v)| grid.r(j) * v).collect();
        let mut out = vec![0.0; grid.m()];
        self.dst1(&x, &mut out);
        let dw = delta_omega(&grid);
        for (l, o) in out.iter_mut().enumerate() {
            *o *= 2.0 * dr / ((l + 1) as f64 * dw);
        }
        let zero = 4.0 * PI * dr * x.iter().enumerate().map(|(j, &v)| grid.r(j) * v).sum::<f64>();
        SpectralField { grid, values: out, zero }
    }

    pub fn forward(&mut self, f: &Tabulated) -> SpectralField {
        debug_assert!(f.grid().same_mesh(&self.grid));
        self.forward_values(&f.full_values())
    }

    /// Inverse transform to samples on the full grid.
    pub fn inverse_values(&mut self, spectrum: &[f64]) -> Vec<f64> {
        let grid = self.grid;
        let dw = delta_omega(&grid);
        let y: Vec<f64> = spectrum.iter().enumerate().map(|(l, &v)| (l + 1) as f64 * dw * v).collect();
        let mut out = vec![0.0; grid.m()];
        self.dst1(&y, &mut out);
        for (j, o) in out.iter_mut().enumerate() {
            *o *= 2.0 * dw / grid.r(j);
        }
        out
    }

    pub fn inverse(&mut self, field: &SpectralField, kind: TableKind) -> Tabulated {
        let values = self.inverse_values(&field.values);
        Tabulated::from_parts_unchecked(field.grid, values, kind)
    }
}

/// Forward transform of a tabulated function (potentials are zero-padded).
pub fn radial_fft_forward(f: &Tabulated) -> SpectralField {
    RadialTransform::new(*f.grid()).forward(f)
}

/// Inverse transform back to samples on the full grid.
pub fn radial_fft_inverse(field: &SpectralField) -> Tabulated {
    RadialTransform::new(field.grid).inverse(field, TableKind::Generic)
}

fn sine_matrix(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |l, j| (PI * ((l + 1) * (j + 1)) as f64 / (m + 1) as f64).sin())
}

/// Dense matrix of the forward rule, mapping `[f(r_j)]` to `[f^(w_l)]`.
pub fn forward_matrix(grid: &RadialGrid) -> DMatrix<f64> {
    let dw = delta_omega(grid);
    let mut s = sine_matrix(grid.m());
    for l in 0..grid.m() {
        for j in 0..grid.m() {
            s[(l, j)] *= 2.0 * grid.dr() * grid.r(j) / ((l + 1) as f64 * dw);
        }
    }
    s
}

/// Dense matrix of the inverse rule.
pub fn inverse_matrix(grid: &RadialGrid) -> DMatrix<f64> {
    let dw = delta_omega(grid);
    let mut s = sine_matrix(grid.m());
    for j in 0..grid.m() {
        for l in 0..grid.m() {
            s[(j, l)] *= 2.0 * dw * (l + 1) as f64 * dw / grid.r(j);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn direct_forward(grid: &RadialGrid, f: &[f64], w: f64) -> f64 {
        // trapezoidal quadrature of 2/w int r f sin(2 pi r w) dr, f(0) r = 0
        (2.0 / w) * grid.dr()
            * f.iter()
                .enumerate()
                .map(|(j, v)| grid.r(j) * v * (2.0 * PI * grid.r(j) * w).sin())
                .sum::<f64>()
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = make_grid(0.1, 50, 50).unwrap();
        let z = Tabulated::new(grid, vec![0.0; 50], TableKind::Generic).unwrap();
        let f = radial_fft_forward(&z);
        assert!(f.values().iter().all(|&v| v == 0.0));
        assert_eq!(f.zero_limit(), 0.0);
        assert!(radial_fft_inverse(&f).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gaussian_pair() {
        let grid = make_grid(0.05, 400, 400).unwrap();
        let f = Tabulated::from_fn(grid, TableKind::Generic, |r| (-PI * r * r).exp()).unwrap();
        let hat = radial_fft_forward(&f);
        let ws = omega_star(&grid);
        for (l, w) in hat.omegas().into_iter().enumerate() {
            if w <= ws / 2.0 {
                assert!((hat.values()[l] - (-PI * w * w).exp()).abs() <= 1e-6, "w = {w}");
            }
        }
        assert!((hat.zero_limit() - 1.0).abs() < 1e-6);
        let w = hat.omega(17);
        assert!((direct_forward(&grid, f.values(), w) - hat.values()[17]).abs() < 1e-12);
        let back = radial_fft_inverse(&hat);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) || (a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn step_function_against_sphere_transform() {
        // h = -1 inside the unit sphere; the grid puts r = 1 on a node, so
        // half-weight it as the trapezoid rule requires at the discontinuity.
        let grid = make_grid(0.001, 4000, 4000).unwrap();
        let f = Tabulated::from_fn(grid, TableKind::Generic, |r| {
            if (r - 1.0).abs() < 1e-9 {
                -0.5
            } else if r < 1.0 {
                -1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let hat = radial_fft_forward(&f);
        for l in [0usize, 10, 50, 200, 800] {
            let w = hat.omega(l);
            let x = 2.0 * PI * w;
            let exact = -(x.sin() - x * x.cos()) / (2.0 * PI * PI * w * w * w);
            assert!((hat.values()[l] - exact).abs() <= 1e-4, "w = {w}");
        }
        assert!((hat.zero_limit() + 4.0 * PI / 3.0).abs() < 1e-4);
    }

    #[test]
    fn matrices_match_fft() {
        let grid = make_grid(0.3, 17, 9).unwrap();
        let f: Vec<f64> = (0..17).map(|j| ((j * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let mut t = RadialTransform::new(grid);
        let hat = t.forward_values(&f);
        let via_matrix = forward_matrix(&grid) * nalgebra::DVector::from_vec(f.clone());
        for l in 0..17 {
            assert!((via_matrix[l] - hat.values()[l]).abs() < 1e-12);
        }
        let ident = inverse_matrix(&grid) * forward_matrix(&grid);
        for i in 0..17 {
            for j in 0..17 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((ident[(i, j)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bump_maximum_at_zero() {
        let grid = make_grid(0.05, 200, 200).unwrap();
        let f = Tabulated::from_fn(grid, TableKind::Generic, |r| (-(r - 1.0).powi(2)).exp()).unwrap();
        let hat = radial_fft_forward(&f);
        let peak = hat.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(hat.zero_limit() >= peak);
    }

    proptest! {
        #[test]
        fn round_trip_exact(vals in proptest::collection::vec(-10.0f64..10.0, 1..300), dr in 0.01f64..0.5) {
            let grid = make_grid(dr, vals.len(), vals.len()).unwrap();
            let mut t = RadialTransform::new(grid);
            let hat = t.forward_values(&vals);
            let back = t.inverse_values(hat.values());
            let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            for (a, b) in back.iter().zip(&vals) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn linearity(
            f in proptest::collection::vec(-1.0f64..1.0, 64),
            g in proptest::collection::vec(-1.0f64..1.0, 64),
            a in -3.0f64..3.0, b in -3.0f64..3.0,
        ) {
            let grid = make_grid(0.1, 64, 64).unwrap();
            let mut t = RadialTransform::new(grid);
            let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
            let lhs = t.forward_values(&comb);
            let fa = t.forward_values(&f);
            let gb = t.forward_values(&g);
            for l in 0..64 {
                let rhs = a * fa.values()[l] + b * gb.values()[l];
                prop_assert!((lhs.values()[l] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) * 10.0);
            }
        }
    }
}
