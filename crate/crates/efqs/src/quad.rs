//! Small quadrature and grid helpers shared by the filter backends and the
//! prediction integrals.

/// `n` evenly spaced points covering [a, b] inclusive; n = 1 gives just `a`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 1, "linspace needs at least one point");
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}

/// Trapezoid rule on a uniform grid with spacing `dt`.
pub fn trapezoid_uniform(dt: f64, ys: &[f64]) -> f64 {
    if ys.len() < 2 {
        return 0.0;
    }
    let interior: f64 = ys[1..ys.len() - 1].iter().sum();
    dt * (0.5 * (ys[0] + ys[ys.len() - 1]) + interior)
}

/// Trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "grid and values must have equal length");
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
    }
    acc
}

/// Linear interpolation on a uniform grid starting at `t0` with step `dt`.
/// Returns None outside the sampled range (top end inclusive within roundoff).
pub(crate) fn interp_linear_uniform(t0: f64, dt: f64, values: &[f64], t: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    if values.len() == 1 {
        let tol = 1e-9 * dt.abs().max(1.0);
        return ((t - t0).abs() <= tol).then_some(values[0]);
    }
    let span = dt * (values.len() - 1) as f64;
    let x = (t - t0) / span * (values.len() - 1) as f64;
    let tol = 1e-9 * (values.len() - 1) as f64;
    if x < -tol || x > (values.len() - 1) as f64 + tol {
        return None;
    }
    let x = x.clamp(0.0, (values.len() - 1) as f64);
    let i = (x.floor() as usize).min(values.len() - 2);
    let frac = x - i as f64;
    Some(values[i] * (1.0 - frac) + values[i + 1] * frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints_and_count() {
        let g = linspace(-2.0, 2.0, 5);
        assert_eq!(g, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let xs = linspace(0.0, 3.0, 7);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        // integral of 2x + 1 over [0, 3] is 12
        assert!((trapezoid(&xs, &ys) - 12.0).abs() < 1e-13);
        assert!((trapezoid_uniform(0.5, &ys) - 12.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_gaussian_converges() {
        // integral of exp(-t^2) over R is sqrt(pi); [-8, 8] truncation error
        // is far below the grid error at 4001 points.
        let xs = linspace(-8.0, 8.0, 4001);
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let val = trapezoid(&xs, &ys);
        assert!((val - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let vals = [1.0, 3.0, 2.0];
        assert_eq!(interp_linear_uniform(0.0, 0.5, &vals, 0.5), Some(3.0));
        assert_eq!(interp_linear_uniform(0.0, 0.5, &vals, 0.25), Some(2.0));
        assert_eq!(interp_linear_uniform(0.0, 0.5, &vals, 0.75), Some(2.5));
        assert_eq!(interp_linear_uniform(0.0, 0.5, &vals, 1.2), None);
        assert_eq!(interp_linear_uniform(0.0, 0.5, &vals, -0.1), None);
        // top endpoint inclusive
        assert_eq!(interp_linear_uniform(0.0, 0.5, &vals, 1.0), Some(2.0));
    }
}
