//! Radial grids and tabulated functions.
//!
//! Every function lives on an equidistant mesh `r_j = j * dr`, `j = 1..=m`.
//! Potentials are stored on the first `n <= m` points only and are taken to be
//! identically zero for `r > r_n`.

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Default RDF threshold below which a grid point is treated as core.
pub const DEFAULT_CORE_THRESHOLD: f64 = 1e-6;

/// Maximal number of points beyond the core used to fit the power-law wall.
pub const CORE_FIT_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    dr: f64,
    m: usize,
    n: usize,
}

impl RadialGrid {
    pub fn new(dr: f64, m: usize, n: usize) -> Result<Self> {
        if !(dr.is_finite() && dr > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dr}")));
        }
        if n == 0 || m == 0 {
            return Err(Error::InvalidGrid("grid needs at least one point".into()));
        }
        if n > m {
            return Err(Error::InvalidGrid(format!(
                "potential grid ({n} points) larger than RDF grid ({m} points)"
            )));
        }
        Ok(Self { dr, m, n })
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.dr
    }

    /// Number of RDF grid points.
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of potential grid points.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Radius of the zero-based index `idx`, i.e. `r_{idx+1}`.
    #[inline]
    pub fn r(&self, idx: usize) -> f64 {
        (idx + 1) as f64 * self.dr
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.r(i)).collect()
    }

    /// Potential cutoff `r_n`.
    pub fn cutoff(&self) -> f64 {
        self.r(self.n - 1)
    }

    /// Outer edge `r_m` of the RDF range.
    pub fn r_max(&self) -> f64 {
        self.r(self.m - 1)
    }

    /// Same spacing and point counts.
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.m == other.m && self.n == other.n && (self.dr - other.dr).abs() <= 1e-12 * self.dr
    }

    /// Same mesh, ignoring the potential subgrid.
    pub fn same_mesh(&self, other: &RadialGrid) -> bool {
        self.m == other.m && (self.dr - other.dr).abs() <= 1e-12 * self.dr
    }
}

/// Build a grid with `m` points of spacing `dr` and a potential subgrid of `n` points.
pub fn make_grid(dr: f64, m: usize, n: usize) -> Result<RadialGrid> {
    RadialGrid::new(dr, m, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Potential,
    Rdf,
    Correlation,
    Generic,
}

/// A real function sampled on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    grid: RadialGrid,
    values: Vec<f64>,
    kind: TableKind,
}

impl Tabulated {
    pub fn new(grid: RadialGrid, values: Vec<f64>, kind: TableKind) -> Result<Self> {
        let expected = match kind {
            TableKind::Potential => grid.n(),
            _ => grid.m(),
        };
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} table needs {expected} values, got {}",
                values.len()
            )));
        }
        if kind == TableKind::Rdf {
            if let Some(j) = values.iter().position(|v| !(*v >= 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "RDF value {} at r = {} is negative or NaN",
                    values[j],
                    grid.r(j)
                )));
            }
        }
        Ok(Self { grid, values, kind })
    }

    pub fn potential(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values, TableKind::Potential)
    }

    pub fn rdf(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values, TableKind::Rdf)
    }

    pub fn correlation(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values, TableKind::Correlation)
    }

    /// Sample `f` on the grid points appropriate for `kind`.
    pub fn from_fn(grid: RadialGrid, kind: TableKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        let len = if kind == TableKind::Potential { grid.n() } else { grid.m() };
        let values = (0..len).map(|i| f(grid.r(i))).collect();
        Self::new(grid, values, kind)
    }

    pub(crate) fn from_parts_unchecked(grid: RadialGrid, values: Vec<f64>, kind: TableKind) -> Self {
        Self { grid, values, kind }
    }

    #[inline]
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values on all `m` points; potentials are padded with zeros beyond `r_n`.
    pub fn full_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.resize(self.grid.m(), 0.0);
        v
    }

    /// Radii matching [`Self::values`].
    pub fn radii(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.grid.r(i)).collect()
    }

    /// Same values on a grid with a different potential subgrid size.
    pub fn with_grid(&self, grid: RadialGrid) -> Result<Self> {
        let same_dr = (self.grid.dr - grid.dr).abs() <= 1e-12 * grid.dr;
        let fits = match self.kind {
            // potential files only cover the potential subgrid
            TableKind::Potential => same_dr && self.values.len() <= grid.m(),
            _ => grid.same_mesh(&self.grid),
        };
        if !fits {
            return Err(Error::GridMismatch);
        }
        let mut values = self.values.clone();
        if self.kind == TableKind::Potential {
            values.resize(grid.n(), 0.0);
        }
        Self::new(grid, values, self.kind)
    }

    /// Pointwise map into a table of another kind on the same grid.
    pub fn map(&self, kind: TableKind, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind,
        }
    }
}

/// Core region marker: zero-based indices `< boundary` are inside the core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreRegion {
    pub boundary: usize,
}

impl CoreRegion {
    pub const EMPTY: CoreRegion = CoreRegion { boundary: 0 };

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        idx < self.boundary
    }

    /// Core radius `r_{j0}` (0 for an empty core).
    pub fn radius(&self, grid: &RadialGrid) -> f64 {
        self.boundary as f64 * grid.dr()
    }
}

/// Smallest `j0` such that both RDFs exceed `threshold` at every point beyond `r_{j0}`.
pub fn detect_core_region(g: &Tabulated, g_k: &Tabulated, threshold: f64) -> Result<CoreRegion> {
    if !g.grid().same_mesh(g_k.grid()) || g.len() != g_k.len() {
        return Err(Error::GridMismatch);
    }
    let boundary = g
        .values()
        .iter()
        .zip(g_k.values())
        .rposition(|(a, b)| !(a.min(*b) > threshold))
        .map_or(0, |j| j + 1);
    if boundary >= g.len() {
        return Err(Error::DegenerateRdf);
    }
    Ok(CoreRegion { boundary })
}

/// Power-law wall `a * r^(-alpha)` fitted beyond the core.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreFit {
    pub amplitude: f64,
    pub exponent: f64,
}

impl CoreFit {
    pub fn eval(&self, r: f64) -> f64 {
        self.amplitude * r.powf(-self.exponent)
    }
}

/// Least-squares fit of `log u = log a - alpha log r` on the window right after the core.
pub fn fit_core(u: &Tabulated, core: CoreRegion) -> Result<CoreFit> {
    let start = core.boundary;
    let window = CORE_FIT_WINDOW.min(u.len().saturating_sub(start));
    if window < 2 {
        return Err(Error::CoreFitFailure(format!(
            "only {window} point(s) available beyond the core"
        )));
    }
    let mut xs = Vec::with_capacity(window);
    let mut ys = Vec::with_capacity(window);
    for j in start..start + window {
        let v = u.values()[j];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::CoreFitFailure(format!(
                "potential {v} at r = {} is not positive",
                u.grid().r(j)
            )));
        }
        xs.push(u.grid().r(j).ln());
        ys.push(v.ln());
    }
    let k = window as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let exponent = -slope;
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(Error::CoreFitFailure(format!(
            "fitted exponent {exponent} is not positive"
        )));
    }
    let amplitude = (my - slope * mx).exp();
    Ok(CoreFit { amplitude, exponent })
}

/// Replace values inside the core by a fitted power-law wall.
pub fn extrapolate_core(u: &Tabulated, core: CoreRegion) -> Result<Tabulated> {
    if core.boundary == 0 {
        return Ok(u.clone());
    }
    let fit = fit_core(u, core)?;
    let mut values = u.values().to_vec();
    for (j, v) in values.iter_mut().enumerate().take(core.boundary) {
        *v = fit.eval(u.grid().r(j));
    }
    Ok(Tabulated::from_parts_unchecked(*u.grid(), values, u.kind()))
}

/// Subtract the last tabulated value so the table vanishes at its end point.
pub fn shift_to_zero_tail(u: &Tabulated) -> Tabulated {
    let tail = u.values().last().copied().unwrap_or(0.0);
    u.map(u.kind(), |v| v - tail)
}

/// Tail shift followed by core extrapolation; the standard post-processing of
/// every potential update.
pub fn normalize_potential(u: &Tabulated, core: CoreRegion) -> Result<Tabulated> {
    extrapolate_core(&shift_to_zero_tail(u), core)
}

/// Interpolate a potential onto a grid ten times finer over `(0, r_n]`.
pub fn refine_tenfold(u: &Tabulated) -> Result<Tabulated> {
    let grid = u.grid();
    let fine = RadialGrid::new(grid.dr() / 10.0, 10 * u.len(), 10 * u.len())?;
    let spline = CubicSpline::uniform(grid.dr(), grid.dr(), u.values().to_vec());
    let values = (0..fine.n())
        .map(|i| {
            if (i + 1) % 10 == 0 {
                u.values()[(i + 1) / 10 - 1]
            } else {
                spline.eval(fine.r(i))
            }
        })
        .collect();
    Ok(Tabulated::from_parts_unchecked(fine, values, TableKind::Potential))
}
