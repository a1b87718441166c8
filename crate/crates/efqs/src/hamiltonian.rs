//! The mixed-field Ising chain and Hermitian operators built from spin sums.

use crate::error::{Error, Result};
use crate::pauli::{PauliAxis, PauliSum};
use crate::state::PureState;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Sites beyond this make the dense 2^L x 2^L form impractical on a desk machine.
pub const DEFAULT_DENSE_CAP: usize = 14;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Parameters of H = -J sum S^x_j S^x_{j+1} + h_x sum S^x_j + h_z sum S^z_j
/// with spin-1/2 operators S = sigma/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianSpec {
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
    pub l: usize,
    pub boundary: Boundary,
}

impl HamiltonianSpec {
    pub fn new(j: f64, h_x: f64, h_z: f64, l: usize) -> Self {
        HamiltonianSpec {
            j,
            h_x,
            h_z,
            l,
            boundary: Boundary::Open,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::domain(format!(
                "chain needs at least 2 sites, got {}",
                self.l
            )));
        }
        if self.boundary == Boundary::Periodic && self.l < 3 {
            // At L=2 the wrap bond duplicates the single open bond.
            return Err(Error::domain(
                "periodic boundary needs at least 3 sites (the wrap bond would duplicate the open one)",
            ));
        }
        if ![self.j, self.h_x, self.h_z].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("couplings must be finite"));
        }
        Ok(())
    }
}

/// Hermitian operator stored as a real-weighted spin-string sum with a
/// lazily realized dense form. The sum representation is exact; the dense
/// form is gated by the capacity cap.
#[derive(Debug)]
pub struct HermitianOperator {
    sum: PauliSum,
    dense_cap: usize,
    dense: OnceLock<DMatrix<Complex64>>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        HermitianOperator {
            sum: self.sum.clone(),
            dense_cap: self.dense_cap,
            dense: OnceLock::new(),
        }
    }
}

impl HermitianOperator {
    pub fn from_pauli_sum(sum: PauliSum) -> Self {
        HermitianOperator {
            sum,
            dense_cap: DEFAULT_DENSE_CAP,
            dense: OnceLock::new(),
        }
    }

    pub fn with_dense_cap(mut self, cap: usize) -> Self {
        self.dense_cap = cap;
        self
    }

    pub fn l(&self) -> usize {
        self.sum.l()
    }

    pub fn dim(&self) -> usize {
        self.sum.dim()
    }

    pub fn dense_cap(&self) -> usize {
        self.dense_cap
    }

    pub fn pauli_sum(&self) -> &PauliSum {
        &self.sum
    }

    pub fn support(&self) -> std::collections::BTreeSet<usize> {
        self.sum.support()
    }

    pub fn is_real(&self) -> bool {
        self.sum.is_real()
    }

    /// Dense matrix in the computational basis; errors past the capacity cap.
    pub fn dense(&self) -> Result<&DMatrix<Complex64>> {
        if self.l() > self.dense_cap {
            return Err(Error::Capacity {
                l: self.l(),
                cap: self.dense_cap,
            });
        }
        Ok(self.dense.get_or_init(|| self.sum.to_dense()))
    }

    pub fn apply(&self, state: &PureState) -> Result<nalgebra::DVector<Complex64>> {
        if state.l() != self.l() {
            return Err(Error::ShapeMismatch {
                context: "operator/state site count",
                expected: self.l(),
                got: state.l(),
            });
        }
        self.sum.apply(state.amplitudes())
    }

    /// Upper bound on max |E - e0| over the spectrum.
    pub fn spectral_bound_about(&self, e0: f64) -> f64 {
        self.sum.spectral_bound_about(e0)
    }
}

fn ising_sum(spec: &HamiltonianSpec) -> Result<PauliSum> {
    let mut sum = PauliSum::new(spec.l)?;
    for j in 1..spec.l {
        sum.add_term(-spec.j, &[(j, PauliAxis::X), (j + 1, PauliAxis::X)])?;
    }
    if spec.boundary == Boundary::Periodic {
        sum.add_term(-spec.j, &[(1, PauliAxis::X), (spec.l, PauliAxis::X)])?;
    }
    for j in 1..=spec.l {
        sum.add_term(spec.h_x, &[(j, PauliAxis::X)])?;
        sum.add_term(spec.h_z, &[(j, PauliAxis::Z)])?;
    }
    Ok(sum)
}

/// Builds the chain Hamiltonian. Errors when L exceeds the dense cap,
/// since every downstream spectral method needs the dense form.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<HermitianOperator> {
    build_hamiltonian_with_cap(spec, DEFAULT_DENSE_CAP)
}

pub fn build_hamiltonian_with_cap(spec: &HamiltonianSpec, cap: usize) -> Result<HermitianOperator> {
    spec.validate()?;
    if spec.l > cap {
        return Err(Error::Capacity { l: spec.l, cap });
    }
    Ok(HermitianOperator::from_pauli_sum(ising_sum(spec)?).with_dense_cap(cap))
}

/// S^axis at one site, identity elsewhere; eigenvalues are +-1/2.
pub fn local_observable(axis: PauliAxis, site: usize, l: usize) -> Result<HermitianOperator> {
    if site == 0 || site > l {
        return Err(Error::domain(format!(
            "site {site} outside chain of {l} sites"
        )));
    }
    let mut sum = PauliSum::new(l)?;
    sum.add_term(1.0, &[(site, axis)])?;
    Ok(HermitianOperator::from_pauli_sum(sum))
}

/// H - <state|H|state> * identity, so the shifted expectation vanishes.
pub fn shift_hamiltonian(h: &HermitianOperator, state: &PureState) -> Result<HermitianOperator> {
    let e = crate::state::expectation(state, h)?;
    let mut sum = h.pauli_sum().clone();
    sum.add_identity(-e);
    Ok(HermitianOperator::from_pauli_sum(sum).with_dense_cap(h.dense_cap()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{expectation, product_state, SitePattern};

    fn standard_spec(l: usize) -> HamiltonianSpec {
        HamiltonianSpec::new(1.0, 1.2, 0.8, l)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn free_spins_spectrum() {
        // J=0, h_x=0, h_z=1 at L=2: H = S^z_1 + S^z_2, diagonal with {-1, 0, 0, 1}.
        let spec = HamiltonianSpec::new(0.0, 0.0, 1.0, 2);
        let h = build_hamiltonian(&spec).unwrap();
        let m = h.dense().unwrap();
        let mut diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(m[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(diag, vec![-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn dense_matches_kronecker_construction() {
        // Independent oracle: explicit 16x16 tensor products.
        let l = 4;
        let spec = standard_spec(l);
        let h = build_hamiltonian(&spec).unwrap();

        let id2 = DMatrix::<Complex64>::identity(2, 2);
        let sx = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let sz = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.5, 0.0),
            ],
        );
        let site_op = |op: &DMatrix<Complex64>, site: usize| -> DMatrix<Complex64> {
            let mut m = DMatrix::<Complex64>::identity(1, 1);
            for s in 1..=l {
                let f = if s == site { op.clone() } else { id2.clone() };
                m = m.kronecker(&f);
            }
            m
        };
        let dim = 1 << l;
        let mut expected = DMatrix::<Complex64>::zeros(dim, dim);
        for j in 1..l {
            expected += site_op(&sx, j) * site_op(&sx, j + 1) * Complex64::new(-spec.j, 0.0);
        }
        for j in 1..=l {
            expected += site_op(&sx, j) * Complex64::new(spec.h_x, 0.0);
            expected += site_op(&sz, j) * Complex64::new(spec.h_z, 0.0);
        }
        let dev = max_abs(&(h.dense().unwrap() - &expected));
        assert!(
            dev < 1e-14,
            "dense form deviates from kronecker oracle by {dev}"
        );
    }

    #[test]
    fn standard_parameters_give_hermitian_256() {
        let h = build_hamiltonian(&standard_spec(8)).unwrap();
        let m = h.dense().unwrap();
        assert_eq!(m.nrows(), 256);
        let mut max_dev: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                max_dev = max_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        assert!(max_dev < 1e-12);
    }

    #[test]
    fn capacity_cap_enforced() {
        let err = build_hamiltonian(&standard_spec(15)).unwrap_err();
        assert!(matches!(err, Error::Capacity { l: 15, cap: 14 }));
        // Configurable cap.
        assert!(build_hamiltonian_with_cap(&standard_spec(15), 15).is_ok());
        let err = build_hamiltonian_with_cap(&standard_spec(10), 8).unwrap_err();
        assert!(matches!(err, Error::Capacity { l: 10, cap: 8 }));
    }

    #[test]
    fn local_observable_values() {
        // (z, 1, 1) is diag(1/2, -1/2).
        let op = local_observable(PauliAxis::Z, 1, 1).unwrap();
        let m = op.dense().unwrap();
        assert_eq!(m[(0, 0)], Complex64::new(0.5, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(-0.5, 0.0));

        // S^x is purely off-diagonal, so <uu|S^x_2|uu> = 0.
        let op = local_observable(PauliAxis::X, 2, 2).unwrap();
        let up_up = product_state(
            &SitePattern::Custom(vec![
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ]),
            2,
        )
        .unwrap();
        assert_eq!(expectation(&up_up, &op).unwrap(), 0.0);

        // Neel site 4 points down.
        let op = local_observable(PauliAxis::Z, 4, 8).unwrap();
        let neel = product_state(&SitePattern::Neel, 8).unwrap();
        assert!((expectation(&neel, &op).unwrap() + 0.5).abs() < 1e-14);

        assert!(local_observable(PauliAxis::Z, 0, 4).is_err());
        assert!(local_observable(PauliAxis::Z, 5, 4).is_err());
    }

    #[test]
    fn local_observable_squares_to_quarter_identity() {
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            for site in 1..=3 {
                let op = local_observable(axis, site, 3).unwrap();
                let m = op.dense().unwrap();
                let sq = m * m;
                let dev = max_abs(&(&sq - DMatrix::<Complex64>::identity(8, 8).scale(0.25)));
                assert!(dev < 1e-15, "S^2 != I/4 for {axis:?} at site {site}");
            }
        }
    }

    #[test]
    fn shift_hamiltonian_zeroes_expectation() {
        // Identity operator shifts to the zero operator.
        let mut id = PauliSum::new(2).unwrap();
        id.add_identity(1.0);
        let id_op = HermitianOperator::from_pauli_sum(id);
        let neel = product_state(&SitePattern::Neel, 2).unwrap();
        let shifted = shift_hamiltonian(&id_op, &neel).unwrap();
        assert_eq!(max_abs(shifted.dense().unwrap()), 0.0);

        // Neel at even L already has <H> = 0, so the operator is unchanged.
        let h = build_hamiltonian(&standard_spec(6)).unwrap();
        let neel6 = product_state(&SitePattern::Neel, 6).unwrap();
        let shifted = shift_hamiltonian(&h, &neel6).unwrap();
        assert!(
            max_abs(&(shifted.dense().unwrap() - h.dense().unwrap())) < 1e-13,
            "shift must be a no-op when the expectation already vanishes"
        );

        // Y+ at L=6 has a nonzero <H>; after shifting it vanishes.
        let yplus = product_state(&SitePattern::YPlus, 6).unwrap();
        let shifted = shift_hamiltonian(&h, &yplus).unwrap();
        assert!(expectation(&yplus, &shifted).unwrap().abs() < 1e-12);
    }

    #[test]
    fn periodic_needs_three_sites() {
        let spec = standard_spec(2).with_boundary(Boundary::Periodic);
        assert!(build_hamiltonian(&spec).is_err());
        let spec = standard_spec(3).with_boundary(Boundary::Periodic);
        assert!(build_hamiltonian(&spec).is_ok());
    }
}
