//! Unitary dynamics in the eigenbasis, the Loschmidt echo with its rate
//! function, and the time-average predictions for filtered expectation
//! values, the time-averaged density matrix, and the clustering-violation
//! correlator.

use crate::entanglement::{accumulate_reduced, reduced_density_matrix, Region};
use crate::error::{Error, Result};
use crate::filter::{FilterKernel, FourierGrid};
use crate::hamiltonian::HermitianOperator;
use crate::linalg;
use crate::quad::{interp_linear_uniform, linspace};
use crate::spectral::SpectralData;
use crate::state::{expectation, PureState};
use nalgebra::DMatrix;
use num_complex::Complex64;

const EVOLVE_CHUNK: usize = 128;

/// Real samples on an ascending uniform time grid.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: &str) -> Result<TimeSeries> {
        if times.len() != values.len() {
            return Err(Error::ShapeMismatch {
                context: "time series lengths",
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::domain("time series must not be empty"));
        }
        if times.len() >= 2 {
            let dt = times[1] - times[0];
            if dt <= 0.0 {
                return Err(Error::domain("time grid must ascend"));
            }
            for w in times.windows(2) {
                if ((w[1] - w[0]) - dt).abs() > 1e-12 {
                    return Err(Error::domain(format!(
                        "time grid spacing varies: {} vs {dt}",
                        w[1] - w[0]
                    )));
                }
            }
        }
        Ok(TimeSeries {
            times,
            values,
            label: label.to_string(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Linear interpolation; None outside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        if self.times.len() == 1 {
            let tol = 1e-9 * self.times[0].abs().max(1.0);
            return ((t - self.times[0]).abs() <= tol).then_some(self.values[0]);
        }
        interp_linear_uniform(self.t0(), self.dt(), &self.values, t)
    }

    /// Same grid, values transformed pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64, label: &str) -> TimeSeries {
        TimeSeries {
            times: self.times.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
            label: label.to_string(),
        }
    }

    fn same_grid(&self, other: &TimeSeries) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12)
    }
}

/// Hermitian, trace-one matrix on the sites of `region`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
    region: Region,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>, region: Region) -> Result<DensityMatrix> {
        let dim = 1usize << region.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::ShapeMismatch {
                context: "density matrix dimension",
                expected: dim,
                got: matrix.nrows(),
            });
        }
        let herm_dev = linalg::max_nonhermiticity(&matrix);
        if herm_dev > 1e-10 {
            return Err(Error::NotHermitian { max_dev: herm_dev });
        }
        let tr: Complex64 = matrix.diagonal().iter().sum();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::NumericalConsistency {
                context: "density matrix trace",
                value: ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt(),
                tolerance: 1e-10,
            });
        }
        Ok(DensityMatrix { matrix, region })
    }

    /// Symmetrize and trace-normalize an accumulated sum of projectors,
    /// then validate.
    pub(crate) fn from_accumulated(m: DMatrix<Complex64>, region: Region) -> Result<DensityMatrix> {
        let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let tr: Complex64 = sym.diagonal().iter().sum();
        if tr.re < 1e-300 {
            return Err(Error::InvalidState(
                "density matrix accumulation has vanishing trace".into(),
            ));
        }
        DensityMatrix::new(sym / Complex64::new(tr.re, 0.0), region)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Tr rho^2 via the Frobenius norm; 1 exactly on pure states.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// e^{-iHt} |state> through the eigenbasis; exactly unitary up to transform
/// roundoff.
pub fn evolve(spec: &SpectralData, state: &PureState, t: f64) -> Result<PureState> {
    let mut c = spec.to_eigenbasis(state)?;
    for (k, e) in spec.eigenvalues().iter().enumerate() {
        c[k] *= Complex64::from_polar(1.0, -e * t);
    }
    spec.state_from_eigen(&c)
}

fn op_label(op: &HermitianOperator) -> String {
    let sum = op.pauli_sum();
    if sum.terms().len() == 1
        && sum.identity_coeff() == 0.0
        && sum.terms()[0].factors.len() == 1
        && sum.terms()[0].coeff == 1.0
    {
        let (site, axis) = sum.terms()[0].factors[0];
        format!("{}{site}", axis.as_str())
    } else {
        "operator".to_string()
    }
}

/// <op(t)> for the evolving state on `steps` points covering [t_from, t_to].
pub fn observable_series_between(
    spec: &SpectralData,
    state0: &PureState,
    op: &HermitianOperator,
    t_from: f64,
    t_to: f64,
    steps: usize,
) -> Result<TimeSeries> {
    if steps < 2 {
        return Err(Error::domain(format!(
            "series needs >= 2 steps, got {steps}"
        )));
    }
    if !(t_to.is_finite() && t_from.is_finite() && t_to > t_from) {
        return Err(Error::domain(format!("bad time span [{t_from}, {t_to}]")));
    }
    if op.l() != spec.l() {
        return Err(Error::ShapeMismatch {
            context: "observable site count",
            expected: spec.l(),
            got: op.l(),
        });
    }
    let c0 = spec.to_eigenbasis(state0)?;
    let times = linspace(t_from, t_to, steps);
    let mut values = Vec::with_capacity(steps);
    for chunk in times.chunks(EVOLVE_CHUNK) {
        let block = spec.evolve_block(&c0, chunk);
        for j in 0..chunk.len() {
            let state = spec.column_to_state(&block, j)?;
            values.push(expectation(&state, op)?);
        }
    }
    TimeSeries::new(times, values, &op_label(op))
}

/// <op(t)> on the uniform grid [0, t_max] with `steps` samples.
pub fn observable_series(
    spec: &SpectralData,
    state0: &PureState,
    op: &HermitianOperator,
    t_max: f64,
    steps: usize,
) -> Result<TimeSeries> {
    observable_series_between(spec, state0, op, 0.0, t_max, steps)
}

/// Two-sided variant on [-t_max, t_max] with an odd number of samples so
/// that t = 0 is on the grid; `steps_per_side` counts samples on each side.
pub fn observable_series_two_sided(
    spec: &SpectralData,
    state0: &PureState,
    op: &HermitianOperator,
    t_max: f64,
    steps_per_side: usize,
) -> Result<TimeSeries> {
    if steps_per_side < 1 {
        return Err(Error::domain("need at least one step per side"));
    }
    observable_series_between(spec, state0, op, -t_max, t_max, 2 * steps_per_side + 1)
}

/// Return amplitude <Psi0| e^{-iHt} |Psi0> = sum_k |c_k|^2 e^{-i E_k t}.
pub fn loschmidt_echo(spec: &SpectralData, state0: &PureState, t: f64) -> Result<Complex64> {
    let c = spec.to_eigenbasis(state0)?;
    let mut echo = Complex64::new(0.0, 0.0);
    for (k, e) in spec.eigenvalues().iter().enumerate() {
        echo += Complex64::from_polar(c[k].norm_sqr(), -e * t);
    }
    Ok(echo)
}

// Largest tolerated phase advance of the echo between grid points before the
// branch of the logarithm becomes ambiguous.
const BRANCH_JUMP_MAX: f64 = 3.0;

/// Rate function F(t) = log(echo)/V along `times`, branch-continuous from
/// F(0) = 0. The grid must start at 0 and be fine enough that the echo's
/// phase advances by less than about pi per step.
pub fn loschmidt_rate_series(
    spec: &SpectralData,
    state0: &PureState,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::domain(
            "rate function grid must start at t = 0 where F = 0",
        ));
    }
    let v = spec.l() as f64;
    let mut out = Vec::with_capacity(times.len());
    let mut prev = Complex64::new(1.0, 0.0);
    let mut theta = 0.0f64;
    for (j, &t) in times.iter().enumerate() {
        let echo = loschmidt_echo(spec, state0, t)?;
        if j == 0 {
            out.push(Complex64::new(0.0, 0.0));
            prev = echo;
            continue;
        }
        let r = echo.norm();
        if r < 1e-300 {
            return Err(Error::RefineGrid(format!(
                "echo magnitude vanished at t = {t}; the branch cannot be tracked"
            )));
        }
        let step = (echo * prev.conj()).arg();
        if step.abs() > BRANCH_JUMP_MAX {
            return Err(Error::RefineGrid(format!(
                "echo phase advances by {step:.3} rad between t = {} and t = {t}; refine the grid",
                times[j - 1]
            )));
        }
        theta += step;
        out.push(Complex64::new(r.ln(), theta) / v);
        prev = echo;
    }
    Ok(out)
}

/// Core of the time-average predictions: the |lambda_tau|^2-weighted average
/// of the series around `center`, with weights renormalized on the realized
/// window so constants map to themselves exactly.
fn gaussian_average(series: &TimeSeries, tau: f64, center: f64, even: bool) -> Result<f64> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!(
            "filter time must be >= 0, got {tau}"
        )));
    }
    let lookup = |x: f64| -> Result<f64> {
        let x_eff = if even { x.abs() } else { x };
        series.value_at(x_eff).ok_or(Error::Coverage {
            need_lo: x_eff,
            need_hi: x_eff,
            have_lo: series.t0(),
            have_hi: series.t_end(),
        })
    };
    if tau == 0.0 {
        return lookup(center);
    }

    let reach = 4.0 * tau;
    let (need_lo, need_hi) = if even {
        (0.0, (center - reach).abs().max(center + reach))
    } else {
        (center - reach, center + reach)
    };
    let slack = 1e-9 * reach.max(1.0);
    if series.t0() > need_lo + slack || series.t_end() < need_hi - slack {
        return Err(Error::Coverage {
            need_lo,
            need_hi,
            have_lo: series.t0(),
            have_hi: series.t_end(),
        });
    }

    let dt = series.dt();
    let half_steps = if dt > 0.0 {
        (reach / dt).floor() as i64
    } else {
        0
    };
    if half_steps < 1 {
        return lookup(center);
    }
    let kernel = FilterKernel::new(tau)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in -half_steps..=half_steps {
        let t1 = k as f64 * dt;
        let edge = if k.abs() == half_steps { 0.5 } else { 1.0 };
        let w = edge * kernel.time_profile_sq(t1);
        num += w * lookup(center + t1)?;
        den += w;
    }
    Ok(num / den)
}

/// Filtered expectation value <O>_tau predicted from unfiltered dynamics:
/// int |lambda_tau(t1)|^2 <O(t + t1)> dt1 / int |lambda_tau|^2. The series
/// must cover [t - 4tau, t + 4tau]; provide two-sided data.
pub fn filtered_expectation_prediction(series: &TimeSeries, tau: f64, t: f64) -> Result<f64> {
    gaussian_average(series, tau, t, false)
}

/// Same prediction using the even extension series(-t) = series(t), valid
/// when the Hamiltonian matrix and initial amplitudes are real so that
/// <O(t)> = <O(-t)>. The series must start at t = 0.
pub fn filtered_expectation_prediction_even(series: &TimeSeries, tau: f64, t: f64) -> Result<f64> {
    if series.t0().abs() > 1e-12 {
        return Err(Error::domain(
            "even extension needs a series starting at t = 0",
        ));
    }
    gaussian_average(series, tau, t, true)
}

/// Predicted connected correlator: Gaussian-weighted variance of the
/// single-site trajectory, int |lambda|^2 <O_x(t1)>^2 / int |lambda|^2
/// minus the squared filtered mean. Assumes <O_y(t)> = <O_x(t)>.
pub fn connected_correlator_prediction(series_x: &TimeSeries, tau: f64) -> Result<f64> {
    let sq = series_x.map(|v| v * v, "squared");
    let second = gaussian_average(&sq, tau, 0.0, false)?;
    let mean = gaussian_average(series_x, tau, 0.0, false)?;
    Ok(second - mean * mean)
}

/// Two-series variant for sites with distinct trajectories; the second term
/// is the product of the two filtered means.
pub fn connected_correlator_prediction_pair(
    series_x: &TimeSeries,
    series_y: &TimeSeries,
    tau: f64,
) -> Result<f64> {
    if !series_x.same_grid(series_y) {
        return Err(Error::ShapeMismatch {
            context: "correlator series grids",
            expected: series_x.len(),
            got: series_y.len(),
        });
    }
    let product = TimeSeries::new(
        series_x.times().to_vec(),
        series_x
            .values()
            .iter()
            .zip(series_y.values())
            .map(|(a, b)| a * b)
            .collect(),
        "product",
    )?;
    let cross = gaussian_average(&product, tau, 0.0, false)?;
    let mean_x = gaussian_average(series_x, tau, 0.0, false)?;
    let mean_y = gaussian_average(series_y, tau, 0.0, false)?;
    Ok(cross - mean_x * mean_y)
}

/// Reduced state of the time-averaged mixed state
/// rho(tau) ~ int dt1 |lambda_tau(t1)|^2 |Psi0(t1)><Psi0(t1)| on `region`.
pub fn time_averaged_density_matrix(
    spec: &SpectralData,
    state0: &PureState,
    tau: f64,
    region: &Region,
    grid: &FourierGrid,
) -> Result<DensityMatrix> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!(
            "filter time must be >= 0, got {tau}"
        )));
    }
    if region.l() != spec.l() {
        return Err(Error::ShapeMismatch {
            context: "region chain length",
            expected: spec.l(),
            got: region.l(),
        });
    }
    if tau == 0.0 {
        return reduced_density_matrix(state0, region);
    }
    // the squared profile at the window edge must be negligible
    let needed = tau * (8.0_f64 * std::f64::consts::LN_10 / 2.0).sqrt();
    let edge_weight = (-2.0 * grid.half_width * grid.half_width / (tau * tau)).exp();
    if edge_weight >= 1e-8 {
        return Err(Error::Coverage {
            need_lo: -needed,
            need_hi: needed,
            have_lo: -grid.half_width,
            have_hi: grid.half_width,
        });
    }

    let kernel = FilterKernel::new(tau)?;
    let c0 = spec.to_eigenbasis(state0)?;
    let times = linspace(-grid.half_width, grid.half_width, grid.points);
    let dim = 1usize << region.len();
    let mut acc = DMatrix::zeros(dim, dim);
    let mut index = 0usize;
    for chunk in times.chunks(EVOLVE_CHUNK) {
        let block = spec.evolve_block(&c0, chunk);
        for j in 0..chunk.len() {
            let t = times[index];
            let edge = if index == 0 || index == times.len() - 1 {
                0.5
            } else {
                1.0
            };
            let w = edge * kernel.time_profile_sq(t);
            index += 1;
            if w == 0.0 {
                continue;
            }
            let state = spec.column_to_state(&block, j)?;
            accumulate_reduced(&mut acc, state.amplitudes(), region, w);
        }
    }
    DensityMatrix::from_accumulated(acc, region.clone())
}

/// <O_x O_y> - <O_x><O_y> on `state`; the operators must touch disjoint
/// sites so the product is Hermitian.
pub fn connected_correlator(
    state: &PureState,
    op_x: &HermitianOperator,
    op_y: &HermitianOperator,
) -> Result<f64> {
    if op_x.l() != state.l() || op_y.l() != state.l() {
        return Err(Error::ShapeMismatch {
            context: "correlator operator site count",
            expected: state.l(),
            got: if op_x.l() != state.l() {
                op_x.l()
            } else {
                op_y.l()
            },
        });
    }
    let sup_x = op_x.support();
    if let Some(site) = op_y.support().iter().find(|s| sup_x.contains(s)) {
        return Err(Error::OverlappingRegions { site: *site });
    }
    let x_psi = op_x.apply(state)?;
    let y_psi = op_y.apply(state)?;
    let joint = x_psi.dotc(&y_psi);
    if joint.im.abs() > 1e-10 {
        return Err(Error::NumericalConsistency {
            context: "correlator imaginary part",
            value: joint.im.abs(),
            tolerance: 1e-10,
        });
    }
    let mean_x = expectation(state, op_x)?;
    let mean_y = expectation(state, op_y)?;
    Ok(joint.re - mean_x * mean_y)
}
