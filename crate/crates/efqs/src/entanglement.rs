//! Partial traces over arbitrary site subsets, Renyi and von Neumann
//! entropies, RDM moments, mutual information, and the filtered entropy
//! sweep driver.

use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};
use crate::filter::{filter_state, FilterBackend};
use crate::linalg;
use crate::spectral::SpectralData;
use crate::state::PureState;
use crate::table::ResultTable;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// A nonempty set of sites out of a chain of `l`, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    sites: Vec<usize>,
    l: usize,
}

impl Region {
    pub fn new(sites: impl IntoIterator<Item = usize>, l: usize) -> Result<Region> {
        let mut sites: Vec<usize> = sites.into_iter().collect();
        sites.sort_unstable();
        if sites.is_empty() {
            return Err(Error::InvalidRegion("region must be nonempty".into()));
        }
        for w in sites.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidRegion(format!("duplicate site {}", w[0])));
            }
        }
        if sites[0] < 1 || sites[sites.len() - 1] > l {
            return Err(Error::InvalidRegion(format!(
                "sites must lie in [1, {l}], got {sites:?}"
            )));
        }
        Ok(Region { sites, l })
    }

    /// Contiguous block a..=b.
    pub fn range(a: usize, b: usize, l: usize) -> Result<Region> {
        if a > b {
            return Err(Error::InvalidRegion(format!("empty range {a}:{b}")));
        }
        Region::new(a..=b, l)
    }

    /// The first half of the chain, sites 1..=L/2.
    pub fn half_chain(l: usize) -> Result<Region> {
        Region::range(1, l / 2, l)
    }

    pub fn full(l: usize) -> Result<Region> {
        Region::range(1, l, l)
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    /// Always false; construction rejects empty regions.
    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.sites.len() == self.l
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.sites.iter().all(|s| !other.contains(*s))
    }

    pub fn complement(&self) -> Result<Region> {
        Region::new((1..=self.l).filter(|s| !self.contains(*s)), self.l)
    }

    pub fn union(&self, other: &Region) -> Result<Region> {
        if self.l != other.l {
            return Err(Error::InvalidRegion(
                "regions belong to different chains".into(),
            ));
        }
        let mut sites = self.sites.clone();
        for s in &other.sites {
            if !self.contains(*s) {
                sites.push(*s);
            }
        }
        Region::new(sites, self.l)
    }

    /// Canonical text form: maximal runs as a:b, single sites bare, runs
    /// joined by '+' (e.g. "1:2+11:12"); comma-free so it can sit in a CSV.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        let mut start = self.sites[0];
        let mut prev = start;
        for &s in &self.sites[1..] {
            if s == prev + 1 {
                prev = s;
                continue;
            }
            parts.push(if start == prev {
                format!("{start}")
            } else {
                format!("{start}:{prev}")
            });
            start = s;
            prev = s;
        }
        parts.push(if start == prev {
            format!("{start}")
        } else {
            format!("{start}:{prev}")
        });
        parts.join("+")
    }
}

/// Scatter table: sub-index bits (MSB first) to full-index bit positions.
struct BitScatter {
    table: Vec<usize>,
}

impl BitScatter {
    /// `sites` ascending; site s occupies full bit (l - s), and the i-th
    /// listed site owns sub-bit (len - 1 - i), mirroring the global
    /// site-1-is-MSB layout inside the subspace.
    fn from_sites(sites: &[usize], l: usize) -> BitScatter {
        let r = sites.len();
        let dim = 1usize << r;
        let mut table = vec![0usize; dim];
        for (m, entry) in table.iter_mut().enumerate() {
            let mut full = 0usize;
            for (i, &s) in sites.iter().enumerate() {
                if (m >> (r - 1 - i)) & 1 == 1 {
                    full |= 1 << (l - s);
                }
            }
            *entry = full;
        }
        BitScatter { table }
    }
}

/// rho_A += weight * Tr_complement |amps><amps| without allocating the full
/// projector; used directly by the time-average accumulation.
pub(crate) fn accumulate_reduced(
    acc: &mut DMatrix<Complex64>,
    amps: &DVector<Complex64>,
    region: &Region,
    weight: f64,
) {
    let l = region.l();
    let comp_sites: Vec<usize> = (1..=l).filter(|s| !region.contains(*s)).collect();
    let reg = BitScatter::from_sites(region.sites(), l);
    let comp = BitScatter::from_sites(&comp_sites, l);
    let dim_r = reg.table.len();
    let mut v = vec![Complex64::new(0.0, 0.0); dim_r];
    for &base in &comp.table {
        for (m, slot) in v.iter_mut().enumerate() {
            *slot = amps[base | reg.table[m]];
        }
        for i in 0..dim_r {
            let vi = v[i] * weight;
            for j in 0..dim_r {
                acc[(i, j)] += vi * v[j].conj();
            }
        }
    }
}

/// Partial trace of a pure state over the complement of `region`.
pub fn reduced_density_matrix(state: &PureState, region: &Region) -> Result<DensityMatrix> {
    if region.l() != state.l() {
        return Err(Error::ShapeMismatch {
            context: "region chain length",
            expected: state.l(),
            got: region.l(),
        });
    }
    let dim = 1usize << region.len();
    let mut acc = DMatrix::zeros(dim, dim);
    accumulate_reduced(&mut acc, state.amplitudes(), region, 1.0);
    DensityMatrix::from_accumulated(acc, region.clone())
}

/// Partial trace of a (possibly already reduced) density matrix down to
/// `target`, which must be a subset of the matrix's region.
pub fn reduced_density_matrix_mixed(dm: &DensityMatrix, target: &Region) -> Result<DensityMatrix> {
    let holder = dm.region();
    if target.l() != holder.l() {
        return Err(Error::ShapeMismatch {
            context: "region chain length",
            expected: holder.l(),
            got: target.l(),
        });
    }
    for s in target.sites() {
        if !holder.contains(*s) {
            return Err(Error::InvalidRegion(format!(
                "site {s} is not held by the density matrix (region {})",
                holder.label()
            )));
        }
    }
    // positions of target sites (and the rest) inside the holder's layout
    let local_bits = |sites: &[usize]| -> Vec<usize> {
        let m = holder.len();
        sites
            .iter()
            .map(|s| {
                let pos = holder.sites().iter().position(|h| h == s).unwrap();
                m - 1 - pos
            })
            .collect()
    };
    let keep_bits = local_bits(target.sites());
    let drop_sites: Vec<usize> = holder
        .sites()
        .iter()
        .copied()
        .filter(|s| !target.contains(*s))
        .collect();
    let drop_bits = local_bits(&drop_sites);

    let expand = |m: usize, bits: &[usize]| -> usize {
        let r = bits.len();
        let mut out = 0usize;
        for (i, &b) in bits.iter().enumerate() {
            if (m >> (r - 1 - i)) & 1 == 1 {
                out |= 1 << b;
            }
        }
        out
    };

    let dim_t = 1usize << target.len();
    let dim_d = 1usize << drop_bits.len();
    let src = dm.matrix();
    let mut out = DMatrix::zeros(dim_t, dim_t);
    for i in 0..dim_t {
        let ei = expand(i, &keep_bits);
        for j in 0..dim_t {
            let ej = expand(j, &keep_bits);
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..dim_d {
                let eb = expand(b, &drop_bits);
                acc += src[(ei | eb, ej | eb)];
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::from_accumulated(out, target.clone())
}

/// Clip stray negatives at zero and renormalize to a probability vector.
/// A warning is logged if clipping removes more than numerical dust.
fn normalized_probabilities(mut p: Vec<f64>, label: &str) -> Result<Vec<f64>> {
    let worst = p.iter().cloned().fold(0.0f64, f64::min);
    if worst < -1e-8 {
        log::warn!("spectrum on {label} has eigenvalue {worst:.3e}; upstream numerics are damaged");
    }
    for v in p.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState(
            "density matrix spectrum sums to zero".into(),
        ));
    }
    for v in p.iter_mut() {
        *v /= total;
    }
    Ok(p)
}

fn clipped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let p = linalg::hermitian_eigenvalues(rho.matrix())?;
    normalized_probabilities(p, &rho.region().label())
}

/// Entanglement spectrum of a pure state across the cut defined by
/// `region`, computed on the smaller tensor factor. Both sides of the cut
/// share this spectrum exactly, so entropies derived from it obey the
/// pure-state symmetry S_n(A) = S_n(complement) to machine precision,
/// where independently diagonalizing the two reduced matrices would not.
pub fn schmidt_spectrum(state: &PureState, region: &Region) -> Result<Vec<f64>> {
    if region.l() != state.l() {
        return Err(Error::ShapeMismatch {
            context: "region chain length",
            expected: state.l(),
            got: region.l(),
        });
    }
    let l = region.l();
    let comp_sites: Vec<usize> = (1..=l).filter(|s| !region.contains(*s)).collect();
    // Factor choice must be invariant under complementation so that a
    // region and its complement build bitwise-identical Gram matrices:
    // strictly smaller side wins, equal halves resolved by site 1's side.
    let region_rows = match region.len().cmp(&comp_sites.len()) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => region.contains(1),
    };
    let (row_sites, col_sites) = if region_rows {
        (region.sites(), &comp_sites[..])
    } else {
        (&comp_sites[..], region.sites())
    };
    let rows = BitScatter::from_sites(row_sites, l);
    let cols = BitScatter::from_sites(col_sites, l);
    let amps = state.amplitudes();
    let nr = rows.table.len();
    let nc = cols.table.len();
    let psi = DMatrix::from_fn(nr, nc, |i, j| amps[rows.table[i] | cols.table[j]]);
    let gram = &psi * psi.adjoint();
    let p = linalg::hermitian_eigenvalues(&gram)?;
    normalized_probabilities(p, &region.label())
}

fn entropy_from_spectrum(p: &[f64], n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::domain(format!("Renyi index must be > 0, got {n}")));
    }
    let s = if (n - 1.0).abs() < 1e-12 {
        // von Neumann, with 0 log 0 = 0
        -p.iter()
            .filter(|v| **v > 0.0)
            .map(|v| v * v.ln())
            .sum::<f64>()
    } else {
        let moment: f64 = p.iter().map(|v| v.powf(n)).sum();
        moment.ln() / (1.0 - n)
    };
    Ok(s.max(0.0))
}

/// S_n = log(Tr rho^n)/(1-n) from the spectrum of rho; n = 1 is the
/// von Neumann entropy -Tr(rho log rho).
pub fn renyi_entropy(rho: &DensityMatrix, n: f64) -> Result<f64> {
    entropy_from_spectrum(&clipped_spectrum(rho)?, n)
}

/// Renyi entropy of a region of a pure state through the Schmidt spectrum;
/// preferred over building the reduced matrix when the state is pure, both
/// for cost (the smaller factor is diagonalized) and for the exact
/// complement symmetry.
pub fn renyi_entropy_pure(state: &PureState, region: &Region, n: f64) -> Result<f64> {
    entropy_from_spectrum(&schmidt_spectrum(state, region)?, n)
}

/// Entropy of an explicit probability spectrum; lets one diagonalization
/// serve several indices.
pub fn spectrum_entropy(p: &[f64], n: f64) -> Result<f64> {
    entropy_from_spectrum(p, n)
}

/// Tr(rho_A^n) by repeated matrix multiplication; an eigenvalue-free code
/// path, so it cross-checks renyi_entropy rather than repeating it.
pub fn rdm_moment(state: &PureState, region: &Region, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("moment order must be >= 1"));
    }
    let rho = reduced_density_matrix(state, region)?;
    let m = rho.matrix();
    let mut power = m.clone();
    for _ in 1..n {
        power = &power * m;
    }
    let tr: Complex64 = power.diagonal().iter().sum();
    if tr.im.abs() > 1e-10 {
        return Err(Error::NumericalConsistency {
            context: "RDM moment imaginary part",
            value: tr.im.abs(),
            tolerance: 1e-10,
        });
    }
    Ok(tr.re)
}

/// I(A,B) = S1(A) + S1(B) - S1(A u B) on disjoint regions.
pub fn mutual_information(state: &PureState, a: &Region, b: &Region) -> Result<f64> {
    if let Some(site) = a.sites().iter().find(|s| b.contains(**s)) {
        return Err(Error::OverlappingRegions { site: *site });
    }
    let s_a = renyi_entropy_pure(state, a, 1.0)?;
    let s_b = renyi_entropy_pure(state, b, 1.0)?;
    let s_ab = renyi_entropy_pure(state, &a.union(b)?, 1.0)?;
    Ok(s_a + s_b - s_ab)
}

/// Filter at every tau, reduce onto `region`, and tabulate S_n for every n.
/// Columns: tau, n, entropy. Rows ordered by the given tau grid, then by n.
pub fn entropy_sweep(
    spec: &SpectralData,
    state0: &PureState,
    backend: &FilterBackend,
    taus: &[f64],
    region: &Region,
    ns: &[f64],
) -> Result<ResultTable> {
    let groups: Vec<Vec<(f64, f64, f64)>> = taus
        .par_iter()
        .map(|&tau| -> Result<Vec<(f64, f64, f64)>> {
            let filtered = filter_state(spec, state0, tau, backend)?;
            let p = schmidt_spectrum(&filtered, region)?;
            ns.iter()
                .map(|&n| Ok((tau, n, entropy_from_spectrum(&p, n)?)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new(&["tau", "n", "entropy"]);
    table.add_metadata("region", &region.label());
    for group in groups {
        for (tau, n, s) in group {
            table.push_row(vec![tau.into(), n.into(), s.into()])?;
        }
    }
    Ok(table)
}
