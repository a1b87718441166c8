//! Sparse spin-1/2 operator algebra as sums of Pauli strings.
//!
//! Operators are stored as real-weighted products of single-site spin
//! operators S^a = sigma^a / 2, which keeps every sum Hermitian by
//! construction and lets `apply` run in O(terms * 2^L) bit arithmetic
//! without materializing a matrix.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeSet;
use std::str::FromStr;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        }
    }
}

impl FromStr for PauliAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(PauliAxis::X),
            "y" | "Y" => Ok(PauliAxis::Y),
            "z" | "Z" => Ok(PauliAxis::Z),
            other => Err(Error::domain(format!("unknown spin axis '{other}'"))),
        }
    }
}

/// One product of single-site spin operators with a real weight.
/// Sites are 1-based and strictly ascending.
#[derive(Clone, Debug)]
pub struct PauliTerm {
    pub coeff: f64,
    pub factors: Vec<(usize, PauliAxis)>,
}

/// coeff * Prod_j S^{a_j}_{site_j} summed over terms, plus a multiple of the identity.
#[derive(Clone, Debug)]
pub struct PauliSum {
    l: usize,
    identity: f64,
    terms: Vec<PauliTerm>,
}

/// Per-term bit masks so `apply` is a single pass over the amplitudes.
struct CompiledTerm {
    flip: usize,
    sign_mask: usize,
    base: Complex64,
}

impl PauliSum {
    pub fn new(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("operator needs at least one site"));
        }
        Ok(PauliSum {
            l,
            identity: 0.0,
            terms: Vec::new(),
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        1usize << self.l
    }

    pub fn identity_coeff(&self) -> f64 {
        self.identity
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn add_identity(&mut self, coeff: f64) {
        self.identity += coeff;
    }

    /// Adds coeff * Prod S^axis_site. Sites must be distinct and within 1..=L.
    pub fn add_term(&mut self, coeff: f64, factors: &[(usize, PauliAxis)]) -> Result<()> {
        if factors.is_empty() {
            self.identity += coeff;
            return Ok(());
        }
        let mut sorted: Vec<(usize, PauliAxis)> = factors.to_vec();
        sorted.sort_by_key(|&(site, _)| site);
        for window in sorted.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::domain(format!(
                    "duplicate site {} in operator product",
                    window[0].0
                )));
            }
        }
        for &(site, _) in &sorted {
            if site == 0 || site > self.l {
                return Err(Error::domain(format!(
                    "site {site} outside chain of {} sites",
                    self.l
                )));
            }
        }
        self.terms.push(PauliTerm {
            coeff,
            factors: sorted,
        });
        Ok(())
    }

    /// Set of sites any term acts on.
    pub fn support(&self) -> BTreeSet<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|&(site, _)| site))
            .collect()
    }

    /// True when the matrix in the computational basis is real
    /// (every term carries an even number of S^y factors).
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| {
            t.factors
                .iter()
                .filter(|&&(_, a)| a == PauliAxis::Y)
                .count()
                % 2
                == 0
        })
    }

    fn compile(&self) -> Vec<CompiledTerm> {
        let l = self.l;
        self.terms
            .iter()
            .map(|term| {
                let mut flip = 0usize;
                let mut sign_mask = 0usize;
                let mut num_y = 0u32;
                for &(site, axis) in &term.factors {
                    let bit = 1usize << (l - site);
                    match axis {
                        PauliAxis::X => flip |= bit,
                        PauliAxis::Y => {
                            flip |= bit;
                            sign_mask |= bit;
                            num_y += 1;
                        }
                        PauliAxis::Z => sign_mask |= bit,
                    }
                }
                let half = 0.5f64.powi(term.factors.len() as i32);
                let base = Complex64::i().powu(num_y) * (term.coeff * half);
                CompiledTerm {
                    flip,
                    sign_mask,
                    base,
                }
            })
            .collect()
    }

    /// out = (this operator) * amps. Both slices have length 2^L.
    pub fn apply_to_slice(&self, amps: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = self.dim();
        if amps.len() != dim {
            return Err(Error::ShapeMismatch {
                context: "operator apply",
                expected: dim,
                got: amps.len(),
            });
        }
        if out.len() != dim {
            return Err(Error::ShapeMismatch {
                context: "operator apply output",
                expected: dim,
                got: out.len(),
            });
        }
        let id = Complex64::new(self.identity, 0.0);
        if self.identity != 0.0 {
            for (o, a) in out.iter_mut().zip(amps.iter()) {
                *o = id * a;
            }
        } else {
            out.fill(Complex64::new(0.0, 0.0));
        }
        for term in self.compile() {
            for (x, &a) in amps.iter().enumerate() {
                let sign = if (x & term.sign_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out[x ^ term.flip] += term.base * a * sign;
            }
        }
        Ok(())
    }

    pub fn apply(
        &self,
        amps: &nalgebra::DVector<Complex64>,
    ) -> Result<nalgebra::DVector<Complex64>> {
        let mut out = nalgebra::DVector::from_element(self.dim(), Complex64::new(0.0, 0.0));
        self.apply_to_slice(amps.as_slice(), out.as_mut_slice())?;
        Ok(out)
    }

    /// Dense matrix in the computational basis (site 1 = most significant bit, up = 0).
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for x in 0..dim {
            m[(x, x)] += Complex64::new(self.identity, 0.0);
        }
        for term in self.compile() {
            for x in 0..dim {
                let sign = if (x & term.sign_mask).count_ones() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                m[(x ^ term.flip, x)] += term.base * sign;
            }
        }
        m
    }

    /// Upper bound on max |E - e0| over the spectrum: sum of term norms
    /// (each S-string has operator norm 2^-weight) plus the shifted identity.
    pub fn spectral_bound_about(&self, e0: f64) -> f64 {
        let terms: f64 = self
            .terms
            .iter()
            .map(|t| t.coeff.abs() * 0.5f64.powi(t.factors.len() as i32))
            .sum();
        terms + (self.identity - e0).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_site_matrices() {
        // S^z on one site: diag(1/2, -1/2) with up mapped to index 0.
        let mut z = PauliSum::new(1).unwrap();
        z.add_term(1.0, &[(1, PauliAxis::Z)]).unwrap();
        let mz = z.to_dense();
        assert_eq!(mz[(0, 0)], c(0.5, 0.0));
        assert_eq!(mz[(1, 1)], c(-0.5, 0.0));
        assert_eq!(mz[(0, 1)], c(0.0, 0.0));

        let mut x = PauliSum::new(1).unwrap();
        x.add_term(1.0, &[(1, PauliAxis::X)]).unwrap();
        let mx = x.to_dense();
        assert_eq!(mx[(0, 1)], c(0.5, 0.0));
        assert_eq!(mx[(1, 0)], c(0.5, 0.0));

        // S^y |up> = (i/2)|down>, S^y |down> = (-i/2)|up>.
        let mut y = PauliSum::new(1).unwrap();
        y.add_term(1.0, &[(1, PauliAxis::Y)]).unwrap();
        let my = y.to_dense();
        assert_eq!(my[(1, 0)], c(0.0, 0.5));
        assert_eq!(my[(0, 1)], c(0.0, -0.5));
    }

    #[test]
    fn site_one_is_most_significant_bit() {
        // S^z on site 1 of two: sign set by the high bit.
        let mut z1 = PauliSum::new(2).unwrap();
        z1.add_term(1.0, &[(1, PauliAxis::Z)]).unwrap();
        let m = z1.to_dense();
        assert_eq!(m[(0, 0)], c(0.5, 0.0)); // |uu>
        assert_eq!(m[(1, 1)], c(0.5, 0.0)); // |ud>
        assert_eq!(m[(2, 2)], c(-0.5, 0.0)); // |du>
        assert_eq!(m[(3, 3)], c(-0.5, 0.0)); // |dd>
    }

    #[test]
    fn apply_matches_dense_on_random_vectors() {
        // Low-level oracle: bit-twiddled apply vs explicit matrix product.
        let l = 4;
        let mut sum = PauliSum::new(l).unwrap();
        sum.add_identity(0.3);
        sum.add_term(-1.0, &[(1, PauliAxis::X), (2, PauliAxis::X)])
            .unwrap();
        sum.add_term(0.7, &[(2, PauliAxis::Y), (4, PauliAxis::Z)])
            .unwrap();
        sum.add_term(1.2, &[(3, PauliAxis::X)]).unwrap();
        sum.add_term(
            -0.4,
            &[(1, PauliAxis::Y), (3, PauliAxis::Y), (4, PauliAxis::X)],
        )
        .unwrap();
        let dense = sum.to_dense();

        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..5 {
            let v = DVector::from_fn(1 << l, |_, _| c(next(), next()));
            let fast = sum.apply(&v).unwrap();
            let slow = &dense * &v;
            let dev = (&fast - &slow).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-13, "apply deviates from dense by {dev}");
        }
    }

    #[test]
    fn dense_is_hermitian() {
        let mut sum = PauliSum::new(3).unwrap();
        sum.add_term(-1.0, &[(1, PauliAxis::X), (2, PauliAxis::X)])
            .unwrap();
        sum.add_term(0.9, &[(2, PauliAxis::Y)]).unwrap();
        sum.add_term(0.8, &[(3, PauliAxis::Z)]).unwrap();
        let m = sum.to_dense();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                assert!(dev < 1e-15);
            }
        }
    }

    #[test]
    fn duplicate_site_rejected() {
        let mut sum = PauliSum::new(2).unwrap();
        let err = sum
            .add_term(1.0, &[(1, PauliAxis::X), (1, PauliAxis::Z)])
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn spectral_bound_dominates_extremes() {
        // Bound for S^x S^x is 1/4; for the field terms 1/2 each.
        let mut sum = PauliSum::new(2).unwrap();
        sum.add_term(-1.0, &[(1, PauliAxis::X), (2, PauliAxis::X)])
            .unwrap();
        sum.add_term(1.2, &[(1, PauliAxis::X)]).unwrap();
        let bound = sum.spectral_bound_about(0.0);
        assert!((bound - (0.25 + 0.6)).abs() < 1e-15);
    }
}
