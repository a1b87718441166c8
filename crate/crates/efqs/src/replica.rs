//! Closed forms for the replica saddle-point calculation: the coupling
//! matrix of the short-filter expansion, its analytic continuation in the
//! replica count, the infinite-filter spectrum, the medium-filter entropy
//! prediction, and the extraction of growth-rate parameters from twist data.

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Parameters of the replica calculation. `n` is the Renyi index (real for
/// the analytic continuation, integer where a matrix is built), `tau_tilde`
/// the volume-rescaled filter width, `eps2` the energy-variance density,
/// `f` the subsystem fraction. The remaining fields feed the asymptotic
/// forms: chain volume `v`, cut count `area`, growth rate `gamma_n`,
/// saturation entropy density `s_n`, saturation time `t_th`.
#[derive(Clone, Debug)]
pub struct ReplicaParams {
    pub n: f64,
    pub tau_tilde: f64,
    pub eps2: f64,
    pub f: f64,
    pub v: usize,
    pub area: f64,
    pub gamma_n: f64,
    pub s_n: f64,
    pub t_th: f64,
}

impl ReplicaParams {
    pub fn new(n: f64, tau_tilde: f64, eps2: f64, f: f64) -> Result<ReplicaParams> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::domain(format!("replica index must be > 0, got {n}")));
        }
        if !(tau_tilde.is_finite() && tau_tilde > 0.0) {
            return Err(Error::domain(format!(
                "rescaled filter width must be positive and finite, got {tau_tilde}; \
                 the infinite-width spectrum is available directly from nn_eigenvalues"
            )));
        }
        if !(eps2.is_finite() && eps2 > 0.0) {
            return Err(Error::domain(format!(
                "variance density must be positive, got {eps2}"
            )));
        }
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::domain(format!(
                "subsystem fraction must lie in [0, 1], got {f}"
            )));
        }
        Ok(ReplicaParams {
            n,
            tau_tilde,
            eps2,
            f,
            v: 1,
            area: 1.0,
            gamma_n: 0.0,
            s_n: 0.0,
            t_th: f64::INFINITY,
        })
    }

    pub fn with_volume(mut self, v: usize) -> Result<Self> {
        if v == 0 {
            return Err(Error::domain("volume must be positive"));
        }
        self.v = v;
        Ok(self)
    }

    pub fn with_area(mut self, area: f64) -> Result<Self> {
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::domain(format!(
                "cut count must be positive, got {area}"
            )));
        }
        self.area = area;
        Ok(self)
    }

    pub fn with_rate(mut self, gamma_n: f64) -> Result<Self> {
        if !(gamma_n.is_finite() && gamma_n >= 0.0) {
            return Err(Error::domain(format!(
                "growth rate must be >= 0, got {gamma_n}"
            )));
        }
        self.gamma_n = gamma_n;
        Ok(self)
    }

    pub fn with_saturation(mut self, s_n: f64) -> Result<Self> {
        if !s_n.is_finite() {
            return Err(Error::domain("saturation density must be finite"));
        }
        self.s_n = s_n;
        Ok(self)
    }

    pub fn with_t_th(mut self, t_th: f64) -> Result<Self> {
        // NaN must fail this guard too
        if t_th.is_nan() || t_th < 0.0 {
            return Err(Error::domain(format!(
                "saturation time must be >= 0, got {t_th}"
            )));
        }
        self.t_th = t_th;
        Ok(self)
    }

    fn diagonal(&self) -> f64 {
        2.0 / (self.tau_tilde * self.tau_tilde) + self.eps2
    }
}

fn integer_replicas(n: f64) -> Result<usize> {
    let r = n.round();
    if (n - r).abs() > 1e-9 || r < 1.0 {
        return Err(Error::domain(format!(
            "this operation needs a positive integer replica count, got {n}"
        )));
    }
    Ok(r as usize)
}

// squared magnitude of the cyclic coupling at momentum k of n:
// (1-f)^2 + f^2 + 2 f (1-f) cos(2 pi k / n)
fn coupling_sq(f: f64, k: f64, n: f64) -> f64 {
    let g = 1.0 - f;
    g * g + f * f + 2.0 * f * g * (2.0 * PI * k / n).cos()
}

/// Quadratic-form matrix of the 2n integration variables
/// (t_1, s_1, t_2, s_2, ..., t_n, s_n): diagonal 2/tau_tilde^2 + eps2,
/// coupling -eps2(1-f) within each replica pair and -eps2 f cyclically
/// between pairs.
pub fn build_mn(p: &ReplicaParams) -> Result<DMatrix<f64>> {
    let n = integer_replicas(p.n)?;
    let size = 2 * n;
    let mut m = DMatrix::zeros(size, size);
    let d = p.diagonal();
    for i in 0..size {
        m[(i, i)] = d;
    }
    for j in 0..n {
        let a = 2 * j;
        let b = 2 * j + 1;
        let c = (2 * (j + 1)) % size;
        m[(a, b)] += -p.eps2 * (1.0 - p.f);
        m[(b, a)] += -p.eps2 * (1.0 - p.f);
        m[(b, c)] += -p.eps2 * p.f;
        m[(c, b)] += -p.eps2 * p.f;
    }
    Ok(m)
}

/// Spectrum in closed form, ascending: for each cyclic momentum k the pair
/// diag +- eps2 sqrt(coupling_sq(k)).
pub fn mn_eigenvalues(p: &ReplicaParams) -> Result<Vec<f64>> {
    let n = integer_replicas(p.n)?;
    let d = p.diagonal();
    let mut vals = Vec::with_capacity(2 * n);
    for k in 0..n {
        let s = p.eps2 * coupling_sq(p.f, k as f64, n as f64).sqrt();
        vals.push(d - s);
        vals.push(d + s);
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// det M_n as the product of eigenvalue pairs (d^2 - eps2^2 g_k); exact for
/// integer n.
pub fn det_mn(p: &ReplicaParams) -> Result<f64> {
    let n = integer_replicas(p.n)?;
    let d = p.diagonal();
    let mut det = 1.0;
    for k in 0..n {
        det *= d * d - p.eps2 * p.eps2 * coupling_sq(p.f, k as f64, n as f64);
    }
    Ok(det)
}

fn continued_roots(p: &ReplicaParams) -> Result<(f64, f64)> {
    let d = p.diagonal();
    let g = 1.0 - p.f;
    let x = d * d - p.eps2 * p.eps2 * (g * g + p.f * p.f);
    let y = 2.0 * p.eps2 * p.eps2 * p.f * g;
    if x < y.abs() - 1e-12 * y.abs().max(1.0) {
        return Err(Error::domain(format!(
            "determinant continuation needs x >= |y|, got x = {x}, y = {y}"
        )));
    }
    let disc = (x * x - y * y).max(0.0).sqrt();
    Ok(((x + disc) / 2.0, (x - disc) / 2.0))
}

/// det M_n continued to real n > 0 via the factorization of the cyclic
/// product: [r_+^{n/2} - r_-^{n/2}]^2 with r_{+-} = (x +- sqrt(x^2-y^2))/2.
/// Agrees with det_mn at integer n.
pub fn det_mn_continued(p: &ReplicaParams) -> Result<f64> {
    if !(p.n.is_finite() && p.n > 0.0) {
        return Err(Error::domain(format!(
            "replica index must be > 0, got {}",
            p.n
        )));
    }
    let (r_plus, r_minus) = continued_roots(p)?;
    let half = p.n / 2.0;
    let root = r_plus.powf(half) - r_minus.powf(half);
    Ok(root * root)
}

/// Single-replica determinant (2/tau_tilde^2)(2/tau_tilde^2 + 2 eps2), the
/// normalization every det M_n is measured against.
pub fn det_m1(p: &ReplicaParams) -> f64 {
    let t2 = 2.0 / (p.tau_tilde * p.tau_tilde);
    t2 * (t2 + 2.0 * p.eps2)
}

/// Entropy excess of the short-filter expansion,
/// (1 / 2(n-1)) log[det M_n / det M_1^n], continued in n; the n -> 1 limit
/// is taken by central difference.
pub fn short_filter_entropy_delta(p: &ReplicaParams) -> Result<f64> {
    let log_det1 = det_m1(p).ln();
    let half_log_ratio = |n: f64| -> Result<f64> {
        let mut q = p.clone();
        q.n = n;
        Ok(0.5 * (det_mn_continued(&q)?.ln() - n * log_det1))
    };
    if (p.n - 1.0).abs() < 1e-9 {
        let h = 1e-5;
        Ok((half_log_ratio(1.0 + h)? - half_log_ratio(1.0 - h)?) / (2.0 * h))
    } else {
        Ok(half_log_ratio(p.n)? / (p.n - 1.0))
    }
}

/// Second Renyi entropy of the half chain at short filter widths:
/// with u = eps2 tau_tilde^2, log[(u + 2) / (2 sqrt(u + 1))]. This is the
/// f = 1/2 case of the n = 2 determinant ratio.
pub fn s2_half_chain(tau_tilde: f64, eps2: f64) -> Result<f64> {
    if !(tau_tilde.is_finite() && tau_tilde >= 0.0) {
        return Err(Error::domain(format!(
            "rescaled filter width must be >= 0, got {tau_tilde}"
        )));
    }
    if !(eps2.is_finite() && eps2 >= 0.0) {
        return Err(Error::domain(format!(
            "variance density must be >= 0, got {eps2}"
        )));
    }
    let u = eps2 * tau_tilde * tau_tilde;
    Ok(((u + 2.0) / (2.0 * (u + 1.0).sqrt())).ln())
}

/// Spectrum of the coupling matrix in the infinite-filter limit, ascending.
/// The plus branch eps2 (1 + sqrt(g_k)) appears for every momentum, the
/// minus branch only for k > 0; the dropped k = 0 zero mode is the overall
/// time translation.
pub fn nn_eigenvalues(p: &ReplicaParams) -> Result<Vec<f64>> {
    let n = integer_replicas(p.n)?;
    let mut vals = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        let s = coupling_sq(p.f, k as f64, n as f64).sqrt();
        vals.push(p.eps2 * (1.0 + s));
        if k > 0 {
            vals.push(p.eps2 * (1.0 - s));
        }
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

pub fn det_nn(p: &ReplicaParams) -> Result<f64> {
    Ok(nn_eigenvalues(p)?.iter().product())
}

const MEDIUM_TAIL_TOL: f64 = 1e-8;

/// Renyi entropy prediction at medium filter widths from unfiltered twist
/// dynamics: the Gaussian-weighted time average of the twist series,
/// normalized and dressed by the saddle-point determinants,
/// S_n = log(moment) / (1 - n). Needs integer n >= 2 and f strictly inside
/// (0, 1); `p.v` must hold the chain volume.
pub fn medium_entropy_prediction(
    p: &ReplicaParams,
    twist_series: &TimeSeries,
    tau: f64,
) -> Result<f64> {
    let n = integer_replicas(p.n)?;
    if n < 2 {
        return Err(Error::domain(
            "medium-filter prediction needs a replica count of at least 2",
        ));
    }
    if p.f <= 0.0 || p.f >= 1.0 {
        return Err(Error::domain(format!(
            "medium-filter prediction needs a subsystem fraction strictly inside (0, 1), \
             got {}; at the endpoints the fluctuation determinant degenerates",
            p.f
        )));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::domain(format!(
            "filter width must be positive, got {tau}"
        )));
    }
    let nf = n as f64;
    // the weight exp(-2 n t^2 / tau^2) must be negligible at both ends
    let needed = tau * ((-MEDIUM_TAIL_TOL.ln()) / (2.0 * nf)).sqrt();
    let slack = 1e-9 * needed.max(1.0);
    if twist_series.t0() > -needed + slack || twist_series.t_end() < needed - slack {
        return Err(Error::Coverage {
            need_lo: -needed,
            need_hi: needed,
            have_lo: twist_series.t0(),
            have_hi: twist_series.t_end(),
        });
    }
    let dt = twist_series.dt();
    if dt <= 0.0 {
        return Err(Error::domain("twist series needs at least two samples"));
    }
    let times = twist_series.times();
    let values = twist_series.values();
    let mut weighted = 0.0;
    for (i, (&t, &w)) in times.iter().zip(values).enumerate() {
        let edge = if i == 0 || i == times.len() - 1 {
            0.5
        } else {
            1.0
        };
        weighted += edge * (-2.0 * nf * t * t / (tau * tau)).exp() * w;
    }
    weighted *= dt;

    let norm = (tau * (PI / 2.0).sqrt()).powi(n as i32);
    let volume_factor = (p.v as f64 / (2.0 * PI)).powf((1.0 - nf) / 2.0);
    let det_n = det_nn(p)?;
    let det_1 = 2.0 * p.eps2;
    let moment = weighted / norm * volume_factor * det_n.powf(-0.5) * det_1.powf(nf / 2.0);
    if !(moment.is_finite() && moment > 0.0) {
        return Err(Error::NumericalConsistency {
            context: "medium-filter replica moment",
            value: moment,
            tolerance: 0.0,
        });
    }
    Ok(moment.ln() / (1.0 - nf))
}

/// Growth-rate asymptotics of the filtered Renyi entropy, leading order:
/// (n/(n-1)) log tau above n = 1, a linear-in-tau law at n = 1, a quadratic
/// law below. Subleading log tau terms are available through
/// `gmft_asymptotic_with`.
pub fn gmft_asymptotic(p: &ReplicaParams, tau: f64) -> Result<f64> {
    gmft_asymptotic_with(p, tau, false)
}

/// As `gmft_asymptotic`; with `include_subleading` the additive log tau
/// correction is applied to the n = 1 and n < 1 branches (the n > 1 branch
/// is already logarithmic and has no such term).
pub fn gmft_asymptotic_with(p: &ReplicaParams, tau: f64, include_subleading: bool) -> Result<f64> {
    if !(p.n.is_finite() && p.n > 0.0) {
        return Err(Error::domain(format!(
            "replica index must be > 0, got {}",
            p.n
        )));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::domain(format!(
            "filter width must be positive, got {tau}"
        )));
    }
    if tau < 1.0 || tau > p.t_th {
        log::warn!(
            "asymptotic form evaluated at tau = {tau} outside its window [1, {}]",
            p.t_th
        );
    }
    let log_tau = tau.ln();
    if (p.n - 1.0).abs() < 1e-9 {
        let leading = p.gamma_n * p.area * tau / (2.0 * PI).sqrt();
        Ok(leading + if include_subleading { log_tau } else { 0.0 })
    } else if p.n > 1.0 {
        Ok(p.n / (p.n - 1.0) * log_tau)
    } else {
        let leading =
            (1.0 - p.n) / (8.0 * p.n) * p.gamma_n * p.gamma_n * p.area * p.area * tau * tau;
        Ok(leading + if include_subleading { log_tau } else { 0.0 })
    }
}

/// Result of fitting the exponential-decay window of a twist series.
#[derive(Clone, Copy, Debug)]
pub struct TwistFit {
    pub gamma_n: f64,
    pub s_n: f64,
    pub t_th: f64,
}

/// Extract (Gamma_n, s_n, t_th) from twist dynamics: find the longest window
/// where the local log-slope is constant within 10% and negative, fit the
/// decay line there, read the saturation plateau from the flat tail, and
/// intersect the two. A series that is constant throughout reports zero rate
/// and zero saturation time.
pub fn fit_growth_rate(series: &TimeSeries, n: f64, area: f64, volume_a: f64) -> Result<TwistFit> {
    if (n - 1.0).abs() < 1e-9 || n <= 0.0 {
        return Err(Error::domain(format!(
            "rate extraction needs a replica index away from 1, got {n}"
        )));
    }
    if !(area > 0.0 && volume_a > 0.0) {
        return Err(Error::domain(
            "cut count and subsystem volume must be positive",
        ));
    }
    if series.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples to fit a decay window, got {}",
            series.len()
        )));
    }
    if let Some(bad) = series.values().iter().find(|v| **v <= 0.0) {
        return Err(Error::Fit(format!(
            "twist values must be positive to take logs, found {bad}"
        )));
    }
    let dt = series.dt();
    let s: Vec<f64> = series.values().iter().map(|v| v.ln()).collect();
    let slopes: Vec<f64> = s.windows(2).map(|w| (w[1] - w[0]) / dt).collect();

    let flat_tol = 1e-10;
    if slopes.iter().all(|m| m.abs() < flat_tol) {
        let mean_s = s.iter().sum::<f64>() / s.len() as f64;
        return Ok(TwistFit {
            gamma_n: 0.0,
            s_n: -mean_s / ((n - 1.0) * volume_a),
            t_th: 0.0,
        });
    }

    // longest run of consecutive slopes within 10% of the running mean,
    // greedy from each start
    let mut best: Option<(usize, usize)> = None;
    for start in 0..slopes.len() {
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (end, &slope) in slopes.iter().enumerate().skip(start) {
            sum += slope;
            lo = lo.min(slope);
            hi = hi.max(slope);
            let mean = sum / (end - start + 1) as f64;
            let tol = 0.1 * mean.abs();
            if (hi - mean) > tol || (mean - lo) > tol {
                break;
            }
            if mean < 0.0 {
                let len = end - start + 1;
                if best.is_none_or(|(b0, b1)| len > b1 - b0) {
                    best = Some((start, end + 1));
                }
            }
        }
    }
    let (w0, w1) = best.ok_or_else(|| {
        Error::Fit(
            "no window of steadily decaying twist found; the series never settles \
             into a constant negative log-slope"
                .into(),
        )
    })?;

    // least squares on the window's points (slope indexes i..i+1 span points
    // w0..=w1)
    let times = series.times();
    let count = (w1 - w0 + 1) as f64;
    let mean_t: f64 = times[w0..=w1].iter().sum::<f64>() / count;
    let mean_s: f64 = s[w0..=w1].iter().sum::<f64>() / count;
    let mut cov = 0.0;
    let mut var = 0.0;
    for i in w0..=w1 {
        cov += (times[i] - mean_t) * (s[i] - mean_s);
        var += (times[i] - mean_t) * (times[i] - mean_t);
    }
    let slope = cov / var;
    let intercept = mean_s - slope * mean_t;

    // plateau: maximal flat suffix relative to the decay slope
    let suffix_tol = 0.1 * slope.abs();
    let mut tail_start = slopes.len();
    while tail_start > w1 && slopes[tail_start - 1].abs() < suffix_tol {
        tail_start -= 1;
    }
    let plateau = if tail_start < slopes.len() {
        let pts = &s[tail_start..];
        pts.iter().sum::<f64>() / pts.len() as f64
    } else {
        *s.last().unwrap()
    };

    Ok(TwistFit {
        gamma_n: -slope / ((n - 1.0) * area),
        s_n: -plateau / ((n - 1.0) * volume_a),
        t_th: (plateau - intercept) / slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::linspace;

    fn params(n: f64, tau_tilde: f64, eps2: f64, f: f64) -> ReplicaParams {
        ReplicaParams::new(n, tau_tilde, eps2, f).unwrap()
    }

    struct XorShift(u64);

    impl XorShift {
        fn next_f64(&mut self) -> f64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            (x >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn single_replica_matrix_by_hand() {
        let p = params(1.0, 1.5, 0.7, 0.3);
        let m = build_mn(&p).unwrap();
        let d = 2.0 / 2.25 + 0.7;
        assert_eq!(m.nrows(), 2);
        assert!((m[(0, 0)] - d).abs() < 1e-15);
        assert!((m[(1, 1)] - d).abs() < 1e-15);
        // the two couplings act on the same pair and add up to -eps2
        assert!((m[(0, 1)] + 0.7).abs() < 1e-15);
        assert!((m[(1, 0)] + 0.7).abs() < 1e-15);
        let t2 = 2.0 / 2.25;
        assert!((det_mn(&p).unwrap() - t2 * (t2 + 1.4)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_spectrum_matches_dense_solver() {
        let mut rng = XorShift(0x9e3779b97f4a7c15);
        for _ in 0..40 {
            let n = 1.0 + (rng.next_f64() * 6.0).floor();
            let p = params(
                n,
                0.2 + 3.0 * rng.next_f64(),
                0.1 + 2.0 * rng.next_f64(),
                rng.next_f64(),
            );
            let closed = mn_eigenvalues(&p).unwrap();
            let m = build_mn(&p).unwrap();
            let (dense, _) = crate::linalg::eigh_real(&m).unwrap();
            assert_eq!(closed.len(), dense.len());
            for (a, b) in closed.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-12, "closed {a} vs dense {b} at n = {n}");
            }
        }
    }

    #[test]
    fn decoupled_fraction_gives_paired_spectrum() {
        // f = 0 splits the chain into independent pairs: eigenvalues
        // d +- eps2, each n-fold
        let p = params(3.0, 1.0, 0.5, 0.0);
        let vals = mn_eigenvalues(&p).unwrap();
        let d = 2.5;
        for i in 0..3 {
            assert!((vals[i] - (d - 0.5)).abs() < 1e-14);
            assert!((vals[i + 3] - (d + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn determinant_identities_on_random_draws() {
        let mut rng = XorShift(0x51a0b3c9d2e4f681);
        for _ in 0..200 {
            let n = 2.0 + (rng.next_f64() * 5.0).floor();
            let p = params(
                n,
                0.1 + 4.0 * rng.next_f64(),
                0.05 + 2.0 * rng.next_f64(),
                rng.next_f64(),
            );
            let direct = det_mn(&p).unwrap();
            let from_eigs: f64 = mn_eigenvalues(&p).unwrap().iter().product();
            let continued = det_mn_continued(&p).unwrap();
            let scale = direct.abs().max(1e-300);
            assert!((direct - from_eigs).abs() / scale < 1e-10);
            assert!(
                (direct - continued).abs() / scale < 1e-10,
                "continuation {continued} vs product {direct} at n = {n}, f = {}",
                p.f
            );
            // filtering can only raise the determinant ratio
            let d1 = det_m1(&p);
            assert!(direct >= d1.powi(n as i32) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn cyclic_product_factorization() {
        // product over k of (x - y cos(2 pi k / n)) equals the two-root form
        // used by the continuation
        let mut rng = XorShift(0xabcdef1234567890);
        for n in 2..=8usize {
            let y = 0.1 + rng.next_f64();
            let x = y * (1.01 + 2.0 * rng.next_f64());
            let mut product = 1.0;
            for k in 0..n {
                product *= x - y * (2.0 * PI * k as f64 / n as f64).cos();
            }
            let disc = (x * x - y * y).sqrt();
            let r_plus = (x + disc) / 2.0;
            let r_minus = (x - disc) / 2.0;
            let half = n as f64 / 2.0;
            let closed = (r_plus.powf(half) - r_minus.powf(half)).powi(2);
            assert!(
                (product - closed).abs() / product.abs() < 1e-12,
                "n = {n}: {product} vs {closed}"
            );
        }
    }

    #[test]
    fn infinite_width_limit_reaches_reduced_spectrum() {
        let p = params(2.0, 1e6, 1.0, 0.5);
        let m_vals = mn_eigenvalues(&p).unwrap();
        let mut expected = nn_eigenvalues(&p).unwrap();
        expected.push(0.0);
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in m_vals.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
    }

    #[test]
    fn entropy_delta_limits_and_symmetry() {
        // vanishing filter width: no entropy change
        let p = params(2.0, 1e-4, 1.0, 0.5);
        assert!(short_filter_entropy_delta(&p).unwrap().abs() < 1e-6);
        // decoupled subsystem: determinants cancel exactly
        let p = params(3.0, 1.7, 0.8, 0.0);
        assert!(short_filter_entropy_delta(&p).unwrap().abs() < 1e-12);
        // fraction symmetry f <-> 1 - f
        let a = short_filter_entropy_delta(&params(2.5, 1.3, 0.6, 0.2)).unwrap();
        let b = short_filter_entropy_delta(&params(2.5, 1.3, 0.6, 0.8)).unwrap();
        assert!((a - b).abs() < 1e-12);
        // positive for a genuine bipartition
        assert!(short_filter_entropy_delta(&params(2.0, 1.0, 1.0, 0.5)).unwrap() > 0.0);
    }

    #[test]
    fn entropy_delta_is_continuous_through_n_equals_one() {
        let at_one = short_filter_entropy_delta(&params(1.0, 1.2, 0.9, 0.4)).unwrap();
        let above = short_filter_entropy_delta(&params(1.0 + 1e-4, 1.2, 0.9, 0.4)).unwrap();
        let below = short_filter_entropy_delta(&params(1.0 - 1e-4, 1.2, 0.9, 0.4)).unwrap();
        assert!(at_one.is_finite());
        assert!((above - at_one).abs() < 1e-3 * at_one.abs().max(1e-3));
        assert!((below - at_one).abs() < 1e-3 * at_one.abs().max(1e-3));
    }

    #[test]
    fn half_chain_entropy_closed_form() {
        assert!(s2_half_chain(0.0, 1.0).unwrap().abs() < 1e-15);
        // agrees with the determinant ratio at n = 2, f = 1/2
        for (tt, e2) in [(0.5, 1.0), (1.3, 0.42), (2.8, 2.0)] {
            let closed = s2_half_chain(tt, e2).unwrap();
            let delta = short_filter_entropy_delta(&params(2.0, tt, e2, 0.5)).unwrap();
            assert!((closed - delta).abs() < 1e-10, "{closed} vs {delta}");
        }
        // collapse: only the combination eps2 tau_tilde^2 matters
        let a = s2_half_chain(2.0, 0.3).unwrap();
        let b = s2_half_chain(1.0, 1.2).unwrap();
        assert!((a - b).abs() < 1e-14);
        // slope 1 in log tau_tilde once u >> 1
        let big = 1e3;
        let ratio = s2_half_chain(big * std::f64::consts::E, 1.0).unwrap()
            - s2_half_chain(big, 1.0).unwrap();
        assert!((ratio - 1.0).abs() < 1e-3, "log-slope {ratio}");
    }

    #[test]
    fn reduced_spectrum_special_cases() {
        let p1 = params(1.0, 1.0, 0.7, 0.5);
        assert_eq!(nn_eigenvalues(&p1).unwrap(), vec![1.4]);
        let p2 = params(2.0, 1.0, 1.0, 0.5);
        let vals = nn_eigenvalues(&p2).unwrap();
        assert_eq!(vals.len(), 3);
        for (v, want) in vals.iter().zip([1.0, 1.0, 2.0]) {
            assert!((v - want).abs() < 1e-14);
        }
        // f = 0: minus branch collapses to zero modes
        let p3 = params(3.0, 1.0, 0.5, 0.0);
        let vals = nn_eigenvalues(&p3).unwrap();
        assert!(vals[0].abs() < 1e-14 && vals[1].abs() < 1e-14);
        assert!((vals[4] - 1.0).abs() < 1e-14);
    }

    fn unit_twist(t_max: f64, points: usize) -> TimeSeries {
        TimeSeries::new(linspace(-t_max, t_max, points), vec![1.0; points], "twist").unwrap()
    }

    #[test]
    fn medium_prediction_against_analytic_integral() {
        // with twist = 1 the time integral is Gaussian and everything is
        // known in closed form
        let tau = 1.3;
        let eps2 = 0.42;
        let v = 8usize;
        let p = params(2.0, 1.0, eps2, 0.5).with_volume(v).unwrap();
        let series = unit_twist(12.0, 4001);
        let got = medium_entropy_prediction(&p, &series, tau).unwrap();

        let nf = 2.0;
        let integral = tau * (PI / (2.0 * nf)).sqrt();
        let norm = (tau * (PI / 2.0).sqrt()).powi(2);
        let det_n = 2.0 * eps2.powi(3);
        let det_1 = 2.0 * eps2;
        let moment =
            integral / norm * (v as f64 / (2.0 * PI)).powf(-0.5) * det_n.powf(-0.5) * det_1;
        let want = moment.ln() / (1.0 - nf);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn medium_prediction_volume_shift() {
        // doubling the volume adds log(2)/2 at n = 2
        let series = unit_twist(12.0, 4001);
        let base = params(2.0, 1.0, 0.5, 0.5).with_volume(8).unwrap();
        let doubled = params(2.0, 1.0, 0.5, 0.5).with_volume(16).unwrap();
        let s8 = medium_entropy_prediction(&base, &series, 1.0).unwrap();
        let s16 = medium_entropy_prediction(&doubled, &series, 1.0).unwrap();
        assert!((s16 - s8 - 0.5 * 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn medium_prediction_rejections() {
        let series = unit_twist(12.0, 801);
        let p = params(2.5, 1.0, 0.5, 0.5);
        assert!(medium_entropy_prediction(&p, &series, 1.0).is_err());
        let p = params(1.0, 1.0, 0.5, 0.5);
        assert!(medium_entropy_prediction(&p, &series, 1.0).is_err());
        let p = params(2.0, 1.0, 0.5, 1.0);
        assert!(medium_entropy_prediction(&p, &series, 1.0).is_err());
        // window too short for the requested tau
        let short = unit_twist(1.0, 101);
        let p = params(2.0, 1.0, 0.5, 0.5);
        let err = medium_entropy_prediction(&p, &short, 2.0).unwrap_err();
        assert!(matches!(err, Error::Coverage { .. }));
    }

    #[test]
    fn asymptotic_forms_arithmetic() {
        let above = params(2.0, 1.0, 0.5, 0.5);
        let got = gmft_asymptotic(&above, std::f64::consts::E).unwrap();
        assert!((got - 2.0).abs() < 1e-12);

        let at_one = params(1.0, 1.0, 0.5, 0.5).with_rate(1.0).unwrap();
        let tau = (2.0 * PI).sqrt();
        assert!((gmft_asymptotic(&at_one, tau).unwrap() - 1.0).abs() < 1e-12);

        let below = params(0.5, 1.0, 0.5, 0.5)
            .with_rate(1.0)
            .unwrap()
            .with_area(2.0)
            .unwrap();
        assert!((gmft_asymptotic(&below, 1.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_subleading_only_at_and_below_one() {
        let tau = 2.0;
        let above = params(3.0, 1.0, 0.5, 0.5);
        assert_eq!(
            gmft_asymptotic(&above, tau).unwrap(),
            gmft_asymptotic_with(&above, tau, true).unwrap()
        );
        let at_one = params(1.0, 1.0, 0.5, 0.5).with_rate(0.7).unwrap();
        let diff = gmft_asymptotic_with(&at_one, tau, true).unwrap()
            - gmft_asymptotic(&at_one, tau).unwrap();
        assert!((diff - tau.ln()).abs() < 1e-14);
        let below = params(0.7, 1.0, 0.5, 0.5).with_rate(0.7).unwrap();
        let diff = gmft_asymptotic_with(&below, tau, true).unwrap()
            - gmft_asymptotic(&below, tau).unwrap();
        assert!((diff - tau.ln()).abs() < 1e-14);
    }

    #[test]
    fn rate_fit_recovers_piecewise_decay() {
        // exp(-0.3 min(t, 10)) on [0, 15]: rate 0.3, saturation at t = 10
        let times = linspace(0.0, 15.0, 151);
        let values = times.iter().map(|t| (-0.3 * t.min(10.0)).exp()).collect();
        let series = TimeSeries::new(times, values, "twist").unwrap();
        let fit = fit_growth_rate(&series, 2.0, 1.0, 1.0).unwrap();
        assert!((fit.gamma_n - 0.3).abs() < 1e-10, "rate {}", fit.gamma_n);
        assert!(
            (fit.t_th - 10.0).abs() < 1e-8,
            "saturation time {}",
            fit.t_th
        );
        assert!((fit.s_n - 3.0).abs() < 1e-8, "plateau density {}", fit.s_n);
    }

    #[test]
    fn rate_fit_edge_cases() {
        let times = linspace(0.0, 5.0, 51);
        let flat = TimeSeries::new(times.clone(), vec![0.5; 51], "twist").unwrap();
        let fit = fit_growth_rate(&flat, 2.0, 1.0, 4.0).unwrap();
        assert_eq!(fit.gamma_n, 0.0);
        assert_eq!(fit.t_th, 0.0);
        assert!((fit.s_n - 0.5_f64.ln() / -4.0).abs() < 1e-12);

        // growth instead of decay: no qualifying window
        let rising = TimeSeries::new(
            times.clone(),
            times.iter().map(|t| (0.3 * t).exp()).collect(),
            "twist",
        )
        .unwrap();
        assert!(matches!(
            fit_growth_rate(&rising, 2.0, 1.0, 1.0),
            Err(Error::Fit(_))
        ));

        // nonpositive samples cannot be logged
        let negative = TimeSeries::new(times, vec![-1.0; 51], "twist").unwrap();
        assert!(matches!(
            fit_growth_rate(&negative, 2.0, 1.0, 1.0),
            Err(Error::Fit(_))
        ));
    }
}
