//! Full eigendecomposition of chain operators plus the spectral quantities
//! every filter and prediction is built from: eigenbasis transforms, energy
//! moments, and the overlap distribution of an initial state.

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::linalg;
use crate::state::PureState;
use faer::{c64, Mat};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

/// Eigenvector matrix; the real variant is the common case (the chain
/// Hamiltonian is real in the computational basis) and halves transform cost.
enum EigenBasis {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

struct EigenPairs {
    l: usize,
    eigenvalues: Vec<f64>,
    basis: EigenBasis,
}

/// Spectrum, eigenbasis, and initial-state overlaps c_k = <E_k|Psi_0>.
/// The basis is shared behind an Arc so rebinding to a new initial state
/// is cheap.
pub struct SpectralData {
    pairs: Arc<EigenPairs>,
    overlaps: DVector<Complex64>,
}

impl Clone for SpectralData {
    fn clone(&self) -> Self {
        SpectralData {
            pairs: Arc::clone(&self.pairs),
            overlaps: self.overlaps.clone(),
        }
    }
}

fn split_columns(m: &Mat<c64>) -> (Mat<f64>, Mat<f64>) {
    let re = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
    let im = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im);
    (re, im)
}

fn join_columns(re: &Mat<f64>, im: &Mat<f64>) -> Mat<c64> {
    Mat::from_fn(re.nrows(), re.ncols(), |i, j| {
        c64::new(re[(i, j)], im[(i, j)])
    })
}

fn dvec_to_cmat(v: &DVector<Complex64>) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn cmat_col_to_dvec(m: &Mat<c64>, j: usize) -> DVector<Complex64> {
    DVector::from_fn(m.nrows(), |i, _| m[(i, j)])
}

// Deterministic probe generator for spot checks; not user-visible randomness.
struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
    fn next_index(&mut self, n: usize) -> usize {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 % n as u64) as usize
    }
}

impl EigenPairs {
    fn dim(&self) -> usize {
        1usize << self.l
    }

    /// U * cols, or U^H * cols when `adjoint`.
    fn mul_u(&self, cols: &Mat<c64>, adjoint: bool) -> Mat<c64> {
        match &self.basis {
            EigenBasis::Real(u) => {
                let (re, im) = split_columns(cols);
                let (yr, yi) = if adjoint {
                    (u.transpose() * &re, u.transpose() * &im)
                } else {
                    (u * &re, u * &im)
                };
                join_columns(&yr, &yi)
            }
            EigenBasis::Complex(u) => {
                if adjoint {
                    u.adjoint() * cols
                } else {
                    u * cols
                }
            }
        }
    }

    fn column_dot(&self, i: usize, j: usize) -> Complex64 {
        let n = self.dim();
        match &self.basis {
            EigenBasis::Real(u) => {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += u[(r, i)] * u[(r, j)];
                }
                Complex64::new(acc, 0.0)
            }
            EigenBasis::Complex(u) => {
                let mut acc = c64::new(0.0, 0.0);
                for r in 0..n {
                    acc += u[(r, i)].conj() * u[(r, j)];
                }
                acc
            }
        }
    }
}

impl SpectralData {
    pub fn l(&self) -> usize {
        self.pairs.l
    }

    pub fn dim(&self) -> usize {
        self.pairs.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.pairs.eigenvalues
    }

    /// Overlaps of the bound initial state, c_k = <E_k|Psi_0>.
    pub fn overlaps(&self) -> &DVector<Complex64> {
        &self.overlaps
    }

    /// Eigenbasis weights of the bound initial state, |c_k|^2.
    pub fn weights(&self) -> Vec<f64> {
        self.overlaps.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Mean energy of the bound initial state.
    pub fn mean_energy(&self) -> f64 {
        self.overlaps
            .iter()
            .zip(self.pairs.eigenvalues.iter())
            .map(|(c, e)| c.norm_sqr() * e)
            .sum()
    }

    /// Coefficients of `state` in the eigenbasis.
    pub fn to_eigenbasis(&self, state: &PureState) -> Result<DVector<Complex64>> {
        if state.l() != self.l() {
            return Err(Error::ShapeMismatch {
                context: "spectral basis site count",
                expected: self.l(),
                got: state.l(),
            });
        }
        let col = dvec_to_cmat(state.amplitudes());
        let out = self.pairs.mul_u(&col, true);
        Ok(cmat_col_to_dvec(&out, 0))
    }

    /// State with the given eigenbasis coefficients, renormalized
    /// (the transform is orthogonal up to roundoff).
    pub fn state_from_eigen(&self, coeffs: &DVector<Complex64>) -> Result<PureState> {
        if coeffs.len() != self.dim() {
            return Err(Error::ShapeMismatch {
                context: "eigenbasis coefficients",
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let col = dvec_to_cmat(coeffs);
        let out = self.pairs.mul_u(&col, false);
        PureState::from_unnormalized(self.l(), cmat_col_to_dvec(&out, 0))
    }

    /// The k-th eigenstate as a computational-basis state.
    pub fn eigenstate(&self, k: usize) -> Result<PureState> {
        if k >= self.dim() {
            return Err(Error::domain(format!(
                "eigenstate index {k} outside dimension {}",
                self.dim()
            )));
        }
        let amps = match &self.pairs.basis {
            EigenBasis::Real(u) => {
                DVector::from_fn(self.dim(), |i, _| Complex64::new(u[(i, k)], 0.0))
            }
            EigenBasis::Complex(u) => DVector::from_fn(self.dim(), |i, _| u[(i, k)]),
        };
        PureState::from_unnormalized(self.l(), amps)
    }

    /// Same spectrum and basis, overlaps bound to a different initial state.
    pub fn rebind(&self, state0: &PureState) -> Result<SpectralData> {
        let overlaps = self.to_eigenbasis(state0)?;
        let total: f64 = overlaps.iter().map(|c| c.norm_sqr()).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalConsistency {
                context: "overlap completeness",
                value: (total - 1.0).abs(),
                tolerance: 1e-10,
            });
        }
        Ok(SpectralData {
            pairs: Arc::clone(&self.pairs),
            overlaps,
        })
    }

    /// Columns U * (c0 .* exp(-i E t_j)) for a block of times; used by the
    /// trajectory-heavy callers so the transform runs as one matrix product.
    pub(crate) fn evolve_block(&self, c0: &DVector<Complex64>, times: &[f64]) -> Mat<c64> {
        let d = self.dim();
        let evals = &self.pairs.eigenvalues;
        let block = Mat::from_fn(d, times.len(), |k, j| {
            let phase = Complex64::from_polar(1.0, -evals[k] * times[j]);
            c0[k] * phase
        });
        self.pairs.mul_u(&block, false)
    }

    pub(crate) fn column_to_state(&self, block: &Mat<c64>, j: usize) -> Result<PureState> {
        PureState::from_unnormalized(self.l(), cmat_col_to_dvec(block, j))
    }
}

/// Full spectrum of H with overlaps against `state0`. Checks hermiticity,
/// overlap completeness, and spot-checks orthonormality and reconstruction.
pub fn eigendecompose(h: &HermitianOperator, state0: &PureState) -> Result<SpectralData> {
    if state0.l() != h.l() {
        return Err(Error::ShapeMismatch {
            context: "operator/state site count",
            expected: h.l(),
            got: state0.l(),
        });
    }
    let dense = h.dense()?;
    let max_dev = linalg::max_nonhermiticity(dense);
    if max_dev > 1e-12 {
        return Err(Error::NotHermitian { max_dev });
    }

    let l = h.l();
    let dim = 1usize << l;
    let (eigenvalues, basis) = if linalg::matrix_is_real(dense, 0.0) {
        let re = DMatrix::from_fn(dim, dim, |i, j| dense[(i, j)].re);
        let (vals, vecs) = linalg::eigh_real(&re)?;
        (vals, EigenBasis::Real(vecs))
    } else {
        let (vals, vecs) = linalg::eigh_complex(dense)?;
        (vals, EigenBasis::Complex(vecs))
    };

    let pairs = Arc::new(EigenPairs {
        l,
        eigenvalues,
        basis,
    });

    // Orthonormality spot check: a handful of column norms and cross products.
    let mut probe = XorShift(0x2545f4914f6cdd1d);
    for _ in 0..8 {
        let i = probe.next_index(dim);
        let j = probe.next_index(dim);
        let dot = pairs.column_dot(i, j);
        let expected = if i == j { 1.0 } else { 0.0 };
        let dev = (dot - Complex64::new(expected, 0.0)).norm();
        if dev > 1e-10 {
            return Err(Error::NumericalConsistency {
                context: "eigenvector orthonormality",
                value: dev,
                tolerance: 1e-10,
            });
        }
    }

    let data = SpectralData {
        pairs: Arc::clone(&pairs),
        overlaps: DVector::zeros(dim),
    };

    // Reconstruction spot check on random probes: U diag(E) U^H v vs the
    // exact string-sum application of H.
    for _ in 0..2 {
        let v = DVector::from_fn(dim, |_, _| {
            Complex64::new(probe.next_f64(), probe.next_f64())
        });
        let exact = h.pauli_sum().apply(&v)?;
        let mut c = cmat_col_to_dvec(&pairs.mul_u(&dvec_to_cmat(&v), true), 0);
        for (k, e) in pairs.eigenvalues.iter().enumerate() {
            c[k] *= *e;
        }
        let rec = cmat_col_to_dvec(&pairs.mul_u(&dvec_to_cmat(&c), false), 0);
        let scale = exact.norm().max(1.0);
        let dev = (&rec - &exact).norm() / scale;
        if dev > 1e-8 {
            return Err(Error::NumericalConsistency {
                context: "spectral reconstruction of H",
                value: dev,
                tolerance: 1e-8,
            });
        }
    }

    data.rebind(state0)
}

/// Mean energy and second moment about `center` of `state` in the spectrum.
pub fn energy_moments(spec: &SpectralData, state: &PureState, center: f64) -> Result<(f64, f64)> {
    let c = spec.to_eigenbasis(state)?;
    let mut total = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for (k, e) in spec.eigenvalues().iter().enumerate() {
        let w = c[k].norm_sqr();
        total += w;
        mean += w * e;
        second += w * (e - center) * (e - center);
    }
    Ok((mean / total, second / total))
}

/// The energy distribution of the bound initial state.
#[derive(Clone, Debug)]
pub struct OverlapSpectrum {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    /// Variance density (<H^2>_0 - <H>_0^2) / L.
    pub eps2: f64,
}

impl OverlapSpectrum {
    pub fn mean(&self) -> f64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| e * w)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * (e - mean) * (e - mean))
            .sum()
    }

    fn standardized_moment(&self, p: i32) -> f64 {
        let mean = self.mean();
        let sigma = self.variance().sqrt();
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * ((e - mean) / sigma).powi(p))
            .sum()
    }

    pub fn skewness(&self) -> f64 {
        self.standardized_moment(3)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        self.standardized_moment(4) - 3.0
    }

    /// Coarse-grained histogram: (bin center, total weight) over equal bins
    /// spanning the occupied part of the spectrum.
    pub fn histogram(&self, bins: usize) -> Vec<(f64, f64)> {
        assert!(bins >= 1);
        let lo = self
            .energies
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 1e-14)
            .map(|(e, _)| *e)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .energies
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 1e-14)
            .map(|(e, _)| *e)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return vec![((lo + hi) / 2.0, 1.0)];
        }
        let width = (hi - lo) / bins as f64;
        let mut out: Vec<(f64, f64)> = (0..bins)
            .map(|b| (lo + (b as f64 + 0.5) * width, 0.0))
            .collect();
        for (e, w) in self.energies.iter().zip(&self.weights) {
            if *w <= 0.0 {
                continue;
            }
            let b = (((e - lo) / width) as usize).min(bins - 1);
            out[b].1 += w;
        }
        out
    }
}

/// Energies and weights |c_k|^2 of the bound initial state, with the fitted
/// variance density eps2 = variance / L.
pub fn overlap_distribution(spec: &SpectralData) -> OverlapSpectrum {
    let weights = spec.weights();
    let energies = spec.eigenvalues().to_vec();
    let mean: f64 = energies.iter().zip(&weights).map(|(e, w)| e * w).sum();
    let var: f64 = energies
        .iter()
        .zip(&weights)
        .map(|(e, w)| w * (e - mean) * (e - mean))
        .sum();
    OverlapSpectrum {
        energies,
        weights,
        eps2: var / spec.l() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, Boundary, HamiltonianSpec, HermitianOperator};
    use crate::pauli::{PauliAxis, PauliSum};
    use crate::state::{product_state, SitePattern};

    fn standard_spec(l: usize) -> HamiltonianSpec {
        HamiltonianSpec::new(1.0, 1.2, 0.8, l)
    }

    #[test]
    fn diagonal_operator_decomposition() {
        // diag(1, 2) as 1.5*I - S^z; the basis state (1, 0) overlaps only E=1.
        let mut sum = PauliSum::new(1).unwrap();
        sum.add_identity(1.5);
        sum.add_term(-1.0, &[(1, PauliAxis::Z)]).unwrap();
        let op = HermitianOperator::from_pauli_sum(sum);
        let state = PureState::basis_state(1, 0).unwrap();
        let spec = eigendecompose(&op, &state).unwrap();
        assert!((spec.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((spec.eigenvalues()[1] - 2.0).abs() < 1e-14);
        let w = spec.weights();
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!(w[1].abs() < 1e-12);
    }

    #[test]
    fn overlap_completeness_at_l4() {
        let h = build_hamiltonian(&standard_spec(4)).unwrap();
        let neel = product_state(&SitePattern::Neel, 4).unwrap();
        let spec = eigendecompose(&h, &neel).unwrap();
        let total: f64 = spec.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn second_moment_matches_direct_matvec_at_l10() {
        // Spectral sum-rule oracle: sum_k |c_k|^2 E_k^2 must equal <H^2>
        // computed by direct string application, and for the periodic chain
        // both equal the closed form (1/16 + 1.44/4) * 10.
        let l = 10;
        let neel = product_state(&SitePattern::Neel, l).unwrap();

        for boundary in [Boundary::Open, Boundary::Periodic] {
            let h = build_hamiltonian(&standard_spec(l).with_boundary(boundary)).unwrap();
            let spec = eigendecompose(&h, &neel).unwrap();
            let spectral_sum: f64 = spec
                .eigenvalues()
                .iter()
                .zip(spec.weights())
                .map(|(e, w)| w * e * e)
                .sum();
            let hn = h.apply(&neel).unwrap();
            let direct = hn.norm_squared();
            assert!(
                (spectral_sum - direct).abs() < 1e-10,
                "{boundary:?}: spectral {spectral_sum} vs direct {direct}"
            );
            if boundary == Boundary::Periodic {
                let closed = (1.0 / 16.0 + 1.44 / 4.0) * l as f64;
                assert!((spectral_sum - closed).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_moments_on_eigenstate() {
        let h = build_hamiltonian(&standard_spec(4)).unwrap();
        let neel = product_state(&SitePattern::Neel, 4).unwrap();
        let spec = eigendecompose(&h, &neel).unwrap();
        let k = 7;
        let e_k = spec.eigenvalues()[k];
        let eig = spec.eigenstate(k).unwrap();
        let (mean, second) = energy_moments(&spec, &eig, 0.5).unwrap();
        assert!((mean - e_k).abs() < 1e-10);
        assert!((second - (e_k - 0.5) * (e_k - 0.5)).abs() < 1e-10);
    }

    #[test]
    fn eps2_closed_form_periodic() {
        // (J^2/16 + h_x^2/4) = 0.4225 per site for the periodic chain.
        let l = 10;
        let h = build_hamiltonian(&standard_spec(l).with_boundary(Boundary::Periodic)).unwrap();
        let neel = product_state(&SitePattern::Neel, l).unwrap();
        let spec = eigendecompose(&h, &neel).unwrap();
        let dist = overlap_distribution(&spec);
        assert!(
            (dist.eps2 - 0.4225).abs() < 1e-10,
            "eps2 = {} should be 0.4225",
            dist.eps2
        );
    }

    #[test]
    fn single_eigenstate_has_zero_eps2() {
        let h = build_hamiltonian(&standard_spec(4)).unwrap();
        let any = product_state(&SitePattern::Neel, 4).unwrap();
        let spec = eigendecompose(&h, &any).unwrap();
        let eig = spec.eigenstate(3).unwrap();
        let spec_eig = spec.rebind(&eig).unwrap();
        let dist = overlap_distribution(&spec_eig);
        assert!(dist.eps2.abs() < 1e-12);
        assert!(dist.variance().abs() < 1e-12);
    }

    #[test]
    fn gaussianity_improves_with_size() {
        // The overlap distribution tends to a Gaussian: the magnitudes of the
        // skewness and the excess kurtosis shrink as L grows.
        let mut skew = Vec::new();
        let mut kurt = Vec::new();
        for l in [6usize, 8, 10] {
            let h = build_hamiltonian(&standard_spec(l)).unwrap();
            let neel = product_state(&SitePattern::Neel, l).unwrap();
            let spec = eigendecompose(&h, &neel).unwrap();
            let dist = overlap_distribution(&spec);
            skew.push(dist.skewness().abs());
            kurt.push(dist.excess_kurtosis().abs());
            let mass: f64 = dist.histogram(16).iter().map(|(_, m)| m).sum();
            assert!((mass - 1.0).abs() < 1e-10);
        }
        assert!(
            skew[2] < skew[0],
            "skewness magnitudes {skew:?} should shrink"
        );
        assert!(
            kurt[2] < kurt[0],
            "kurtosis magnitudes {kurt:?} should shrink"
        );
    }

    #[test]
    fn round_trip_through_eigenbasis() {
        let h = build_hamiltonian(&standard_spec(6)).unwrap();
        let yp = product_state(&SitePattern::YPlus, 6).unwrap();
        let spec = eigendecompose(&h, &yp).unwrap();
        let c = spec.to_eigenbasis(&yp).unwrap();
        let back = spec.state_from_eigen(&c).unwrap();
        assert!(back.fidelity(&yp).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn complex_hermitian_path() {
        // A single S^y term makes the dense matrix genuinely complex.
        let mut sum = PauliSum::new(2).unwrap();
        sum.add_term(0.7, &[(1, PauliAxis::Y)]).unwrap();
        sum.add_term(0.3, &[(2, PauliAxis::Z)]).unwrap();
        let op = HermitianOperator::from_pauli_sum(sum);
        let state = product_state(&SitePattern::Neel, 2).unwrap();
        let spec = eigendecompose(&op, &state).unwrap();
        // Spectrum of 0.7 S^y + 0.3 S^z over two sites: {+-0.35 +- 0.15}.
        let expected = [-0.5, -0.2, 0.2, 0.5];
        for (a, b) in spec.eigenvalues().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let total: f64 = spec.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
