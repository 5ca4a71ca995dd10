use crate::grid::Tabulated;

/// Weighted L2 error `(dr sum_i g_i (u_i - uref_i)^2 r_i^2)^(1/2)` over the potential grid.
pub fn error_metric(u: &Tabulated, u_ref: &Tabulated, g: &Tabulated) -> f64 {
    let grid = u.grid();
    let n = u.len().min(u_ref.len());
    let sum: f64 = (0..n)
        .map(|i| {
            let r = grid.r(i);
            let d = u.values()[i] - u_ref.values()[i];
            let w = g.values()[i];
            if w == 0.0 {
                0.0
            } else {
                w * d * d * r * r
            }
        })
        .sum();
    (grid.dr() * sum).sqrt()
}

/// `max_j |a_j - b_j|` over all data points.
pub fn sup_distance(a: &Tabulated, b: &Tabulated) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Relative sup-norm data fit `||g_k - g|| / ||g_0 - g||`.
pub fn data_fit(g_k: &Tabulated, g: &Tabulated, g0_fit: f64) -> f64 {
    let d = sup_distance(g_k, g);
    if g0_fit > 0.0 {
        d / g0_fit
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
