//! Pure states of the chain and product-state preparation.

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use nalgebra::DVector;
use num_complex::Complex64;

const NORM_TOL: f64 = 1e-12;

/// Normalized amplitude vector over the 2^L computational basis
/// (site 1 = most significant bit, up = 0).
#[derive(Clone, Debug)]
pub struct PureState {
    l: usize,
    amps: DVector<Complex64>,
}

impl PureState {
    /// Wraps amplitudes that are already unit-norm within 1e-12.
    pub fn new(l: usize, amps: DVector<Complex64>) -> Result<Self> {
        let dim = 1usize << l;
        if amps.len() != dim {
            return Err(Error::ShapeMismatch {
                context: "state amplitudes",
                expected: dim,
                got: amps.len(),
            });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have norm {norm:.16}, expected 1 within {NORM_TOL:.0e}"
            )));
        }
        Ok(PureState { l, amps })
    }

    /// Normalizes and wraps; errors only on a (near-)zero vector.
    pub fn from_unnormalized(l: usize, amps: DVector<Complex64>) -> Result<Self> {
        let dim = 1usize << l;
        if amps.len() != dim {
            return Err(Error::ShapeMismatch {
                context: "state amplitudes",
                expected: dim,
                got: amps.len(),
            });
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidState(format!(
                "cannot normalize a vector of norm {norm:.3e}"
            )));
        }
        Ok(PureState {
            l,
            amps: amps / Complex64::new(norm, 0.0),
        })
    }

    /// The computational basis state with the given index.
    pub fn basis_state(l: usize, index: usize) -> Result<Self> {
        let dim = 1usize << l;
        if index >= dim {
            return Err(Error::domain(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut amps = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { l, amps })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.l != other.l {
            return Err(Error::ShapeMismatch {
                context: "inner product site count",
                expected: self.l,
                got: other.l,
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// |<self|other>|.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// True when every amplitude is real within tol (enables real-arithmetic paths).
    pub fn is_real(&self, tol: f64) -> bool {
        self.amps.iter().all(|a| a.im.abs() <= tol)
    }
}

/// Initial product patterns: the alternating up-down chain, all spins along +y,
/// or explicit per-site spinors (each unit-norm, components ordered (up, down)).
#[derive(Clone, Debug)]
pub enum SitePattern {
    Neel,
    YPlus,
    Custom(Vec<[Complex64; 2]>),
}

/// Tensor product of per-site spinors; Neel = up,down,up,down,...;
/// Y+ = (1, i)/sqrt(2) on every site.
pub fn product_state(pattern: &SitePattern, l: usize) -> Result<PureState> {
    if l == 0 {
        return Err(Error::domain("state needs at least one site"));
    }
    let spinors: Vec<[Complex64; 2]> = match pattern {
        SitePattern::Neel => (1..=l)
            .map(|j| {
                if j % 2 == 1 {
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
                } else {
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
                }
            })
            .collect(),
        SitePattern::YPlus => {
            let r = 1.0 / 2f64.sqrt();
            (0..l)
                .map(|_| [Complex64::new(r, 0.0), Complex64::new(0.0, r)])
                .collect()
        }
        SitePattern::Custom(spinors) => {
            if spinors.len() != l {
                return Err(Error::ShapeMismatch {
                    context: "custom pattern site count",
                    expected: l,
                    got: spinors.len(),
                });
            }
            for (i, s) in spinors.iter().enumerate() {
                let norm = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::InvalidState(format!(
                        "spinor at site {} has norm {norm:.16}, expected 1",
                        i + 1
                    )));
                }
            }
            spinors.clone()
        }
    };

    // Site 1 outermost so it lands on the most significant bit.
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for s in &spinors {
        let mut next = Vec::with_capacity(amps.len() * 2);
        for a in &amps {
            next.push(a * s[0]);
            next.push(a * s[1]);
        }
        amps = next;
    }
    PureState::new(l, DVector::from_vec(amps))
}

/// <state|op|state> with the imaginary part discarded after checking it is noise.
pub fn expectation(state: &PureState, op: &HermitianOperator) -> Result<f64> {
    let applied = op.apply(state)?;
    let val = state.amplitudes().dotc(&applied);
    if val.im.abs() >= 1e-10 {
        return Err(Error::NumericalConsistency {
            context: "expectation imaginary part",
            value: val.im.abs(),
            tolerance: 1e-10,
        });
    }
    Ok(val.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, local_observable, HamiltonianSpec};
    use crate::pauli::PauliAxis;

    #[test]
    fn neel_two_sites_is_up_down() {
        let s = product_state(&SitePattern::Neel, 2).unwrap();
        // |ud> has index 0b01 = 1.
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expected = if i == 1 { 1.0 } else { 0.0 };
            assert_eq!(*a, Complex64::new(expected, 0.0));
        }
    }

    #[test]
    fn yplus_single_site_spinor() {
        let s = product_state(&SitePattern::YPlus, 1).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((s.amplitudes()[0] - Complex64::new(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(0.0, r)).norm() < 1e-15);
        // It is the +1/2 eigenvector of S^y.
        let sy = local_observable(PauliAxis::Y, 1, 1).unwrap();
        assert!((expectation(&s, &sy).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn neel_energy_vanishes_at_standard_parameters() {
        let h = build_hamiltonian(&HamiltonianSpec::new(1.0, 1.2, 0.8, 8)).unwrap();
        let neel = product_state(&SitePattern::Neel, 8).unwrap();
        assert!(expectation(&neel, &h).unwrap().abs() < 1e-12);
    }

    #[test]
    fn product_states_are_unit_norm() {
        for l in 1..=8 {
            let neel = product_state(&SitePattern::Neel, l).unwrap();
            assert!((neel.amplitudes().norm() - 1.0).abs() < 1e-12);
            let yp = product_state(&SitePattern::YPlus, l).unwrap();
            assert!((yp.amplitudes().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn custom_pattern_validation() {
        let good = vec![[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]; 3];
        assert!(product_state(&SitePattern::Custom(good.clone()), 3).is_ok());
        assert!(matches!(
            product_state(&SitePattern::Custom(good), 2),
            Err(Error::ShapeMismatch { .. })
        ));
        let bad = vec![[Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.0)]; 2];
        assert!(matches!(
            product_state(&SitePattern::Custom(bad), 2),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn identity_expectation_is_one() {
        let mut id = crate::pauli::PauliSum::new(3).unwrap();
        id.add_identity(1.0);
        let id_op = HermitianOperator::from_pauli_sum(id);
        let s = product_state(&SitePattern::YPlus, 3).unwrap();
        assert!((expectation(&s, &id_op).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn yplus_has_no_z_magnetization() {
        let s = product_state(&SitePattern::YPlus, 6).unwrap();
        let sz = local_observable(PauliAxis::Z, 3, 6).unwrap();
        assert!(expectation(&s, &sz).unwrap().abs() < 1e-14);
    }

    #[test]
    fn variance_closed_forms() {
        // Periodic: <H^2> - <H>^2 = (J^2/16 + h_x^2/4) L exactly (every bond
        // contributes J^2/16, every site h_x^2/4; the Neel state is a total-S^z
        // eigenstate so h_z drops out of the variance).
        // Open: the wrap bond is missing, J^2 (L-1)/16 + h_x^2 L/4.
        use crate::hamiltonian::Boundary;
        for l in [4usize, 5, 6, 8] {
            let spec = HamiltonianSpec::new(1.0, 1.2, 0.8, l);
            let neel = product_state(&SitePattern::Neel, l).unwrap();

            let variance = |spec: &HamiltonianSpec| -> f64 {
                let h = build_hamiltonian(spec).unwrap();
                let hn = h.apply(&neel).unwrap();
                let mean = neel.amplitudes().dotc(&hn).re;
                hn.norm_squared() - mean * mean
            };

            let open = variance(&spec);
            let expected_open = (l as f64 - 1.0) / 16.0 + 1.44 / 4.0 * l as f64;
            assert!(
                (open - expected_open).abs() < 1e-12,
                "open variance at L={l}: {open} vs {expected_open}"
            );

            let periodic = variance(&spec.with_boundary(Boundary::Periodic));
            let expected_periodic = (1.0 / 16.0 + 1.44 / 4.0) * l as f64;
            assert!(
                (periodic - expected_periodic).abs() < 1e-10,
                "periodic variance at L={l}: {periodic} vs {expected_periodic}"
            );
        }
    }
}
