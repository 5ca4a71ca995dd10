//! Cubic interpolation on uniform knots with not-a-knot end conditions.

/// Piecewise cubic through equidistant knots `x0 + i*h`.
///
/// Stored as per-interval polynomial coefficients in the local offset
/// `t = x - x_i`, so evaluation is one index computation plus Horner.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    coeffs: Vec<[f64; 4]>,
}

impl CubicSpline {
    /// Interpolant through `(x0 + i*h, y[i])`.
    pub fn uniform(x0: f64, h: f64, y: Vec<f64>) -> Self {
        assert!(!y.is_empty(), "spline needs at least one knot");
        assert!(h > 0.0);
        let n = y.len();
        if n == 1 {
            return Self { x0, h, coeffs: vec![[y[0], 0.0, 0.0, 0.0]] };
        }
        let m = second_derivatives(h, &y);
        let coeffs = (0..n - 1)
            .map(|i| {
                let a = y[i];
                let b = (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
                let c = 0.5 * m[i];
                let d = (m[i + 1] - m[i]) / (6.0 * h);
                [a, b, c, d]
            })
            .collect();
        Self { x0, h, coeffs }
    }

    #[inline]
    fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.x0) / self.h;
        let last = self.coeffs.len() - 1;
        let i = if s > 0.0 { (s as usize).min(last) } else { 0 };
        (i, x - (self.x0 + i as f64 * self.h))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let [a, b, c, d] = self.coeffs[i];
        a + t * (b + t * (c + t * d))
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        let [_, b, c, d] = self.coeffs[i];
        b + t * (2.0 * c + t * 3.0 * d)
    }

    /// Value and derivative in one lookup.
    #[inline]
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let (i, t) = self.locate(x);
        let [a, b, c, d] = self.coeffs[i];
        (a + t * (b + t * (c + t * d)), b + t * (2.0 * c + t * 3.0 * d))
    }
}

/// Knot second derivatives for the not-a-knot spline on uniform spacing.
///
/// Interior equations `M[i-1] + 4 M[i] + M[i+1] = 6/h^2 (y[i-1] - 2y[i] + y[i+1])`.
/// Not-a-knot gives `M[0] = 2M[1] - M[2]`, which turns the first and last
/// interior rows into `6 M[1] = rhs[1]` and `6 M[n-2] = rhs[n-2]`.
fn second_derivatives(h: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    match n {
        2 => return vec![0.0; 2],
        3 => {
            let c = (y[0] - 2.0 * y[1] + y[2]) / (h * h);
            return vec![c; 3];
        }
        _ => {}
    }
    let rhs: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                0.0
            } else {
                6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h)
            }
        })
        .collect();
    let mut m = vec![0.0; n];
    m[1] = rhs[1] / 6.0;
    m[n - 2] = rhs[n - 2] / 6.0;
    // Thomas algorithm on rows 2..=n-3 with known M[1], M[n-2].
    if n > 4 {
        let lo = 2;
        let hi = n - 3;
        let len = hi - lo + 1;
        let mut diag = vec![4.0; len];
        let mut d: Vec<f64> = (lo..=hi).map(|i| rhs[i]).collect();
        d[0] -= m[1];
        d[len - 1] -= m[n - 2];
        for k in 1..len {
            let w = 1.0 / diag[k - 1];
            diag[k] -= w;
            d[k] -= w * d[k - 1];
        }
        m[hi] = d[len - 1] / diag[len - 1];
        for k in (0..len - 1).rev() {
            m[lo + k] = (d[k] - m[lo + k + 1]) / diag[k];
        }
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    m
}
