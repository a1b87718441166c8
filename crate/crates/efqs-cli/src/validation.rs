//! The validation suite behind `efqs validate`: thirteen named checks
//! combining exact identities, independent numerical oracles, and
//! finite-size trend comparisons. Quick level stays at L <= 10; full level
//! reaches L = 12. Expensive diagonalizations are shared across checks.

use crate::config::ScenarioConfig;
use crate::scenario::{run_scenario, series_grid};
use efqs::quad::linspace;
use efqs::{
    apply_gaussian_filter, build_hamiltonian, build_mn, connected_correlator,
    connected_correlator_prediction_pair, det_m1, det_mn, det_mn_continued, eigendecompose,
    energy_moments, expectation, filtered_expectation_prediction, fourier_filter, iterative_filter,
    local_observable, mn_eigenvalues, mutual_information, observable_series_two_sided,
    overlap_distribution, phase_aligned_distance, product_state, renyi_entropy_pure, s2_half_chain,
    Boundary, FilterKernel, FourierGrid, HamiltonianSpec, PauliAxis, PureState, Region,
    ReplicaParams, SitePattern, SpectralData,
};
use std::collections::HashMap;
use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Level {
    Quick,
    Full,
}

pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Environment hook for exercising the failure path end to end: setting
/// EFQS_FAULT_INJECT=replica-det perturbs the closed-form determinant used
/// in check 5, which must then fail and drive a nonzero exit.
pub const FAULT_ENV: &str = "EFQS_FAULT_INJECT";

type Check = Result<(bool, String), String>;
type CheckFn = Box<dyn FnOnce(&mut Cache) -> Check>;

fn s<E: std::fmt::Display>(e: E) -> String {
    format!("{e}")
}

/// Eigendecompositions of the standard chain (J=1, h_x=1.2, h_z=0.8, open,
/// Neel start) keyed by size; cloning hands out the shared eigenbasis.
struct Cache {
    specs: HashMap<usize, (SpectralData, PureState)>,
}

impl Cache {
    fn new() -> Cache {
        Cache {
            specs: HashMap::new(),
        }
    }

    fn neel_open(&mut self, l: usize) -> Result<(SpectralData, PureState), String> {
        if let Some(v) = self.specs.get(&l) {
            return Ok(v.clone());
        }
        let h = build_hamiltonian(&HamiltonianSpec::new(1.0, 1.2, 0.8, l)).map_err(s)?;
        let s0 = product_state(&SitePattern::Neel, l).map_err(s)?;
        let spec = eigendecompose(&h, &s0).map_err(s)?;
        self.specs.insert(l, (spec.clone(), s0.clone()));
        Ok((spec, s0))
    }
}

fn filtered(spec: &SpectralData, s0: &PureState, tau: f64) -> Result<PureState, String> {
    apply_gaussian_filter(spec, s0, &FilterKernel::new(tau).map_err(s)?).map_err(s)
}

fn half_chain(l: usize) -> Result<Region, String> {
    Region::new(1..=l / 2, l).map_err(s)
}

// Deterministic xorshift for the random-parameter checks.
struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

fn draw_params(rng: &mut Rng, tau_lo: f64) -> Result<ReplicaParams, String> {
    let n = rng.int(2, 6) as f64;
    ReplicaParams::new(
        n,
        rng.uniform(tau_lo, 4.0),
        rng.uniform(0.05, 2.0),
        rng.uniform(0.0, 1.0),
    )
    .map_err(s)
}

/// Check 1: the initial-state energy variance is exactly extensive on the
/// ring, (J^2/16 + h_x^2/4) L, measured matrix-free.
fn variance_closed_form(level: Level) -> Check {
    let sizes: &[usize] = match level {
        Level::Full => &[4, 6, 8, 10, 12],
        Level::Quick => &[4, 6, 8, 10],
    };
    let start = Instant::now();
    let mut max_dev = 0.0f64;
    for &l in sizes {
        let spec = HamiltonianSpec {
            j: 1.0,
            h_x: 1.2,
            h_z: 0.8,
            l,
            boundary: Boundary::Periodic,
        };
        let h = build_hamiltonian(&spec).map_err(s)?;
        let psi = product_state(&SitePattern::Neel, l).map_err(s)?;
        let hpsi = h.apply(&psi).map_err(s)?;
        let mean = psi.amplitudes().dotc(&hpsi).re;
        let var = hpsi.norm_squared() - mean * mean;
        let want = (1.0 / 16.0 + 1.2 * 1.2 / 4.0) * l as f64;
        max_dev = max_dev.max((var - want).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok((
        max_dev <= 1e-10 && elapsed < 30.0,
        format!("ring variance vs 0.4225 L over L={sizes:?}: max dev {max_dev:.2e} (budget 30s)"),
    ))
}

/// Check 2: the Fourier-integral backend reproduces the exact filter.
fn fourier_matches_exact(cache: &mut Cache) -> Check {
    let (spec, s0) = cache.neel_open(8)?;
    let mut min_fid = f64::INFINITY;
    for tau in [0.5, 1.0, 2.0] {
        let grid = FourierGrid::new(6.0 * tau, 4001).map_err(s)?;
        let four = fourier_filter(&spec, &s0, tau, &grid).map_err(s)?;
        let fid = four.fidelity(&filtered(&spec, &s0, tau)?).map_err(s)?;
        min_fid = min_fid.min(fid);
    }
    Ok((
        min_fid >= 1.0 - 1e-8,
        format!(
            "L=8 window 6 tau, 4001 points: min fidelity 1 - {:.2e}",
            1.0 - min_fid
        ),
    ))
}

/// Check 3: halving the iterative step shrinks the error by ~4 (second
/// order in the step).
fn iterative_halving_ratio(cache: &mut Cache) -> Check {
    let h = build_hamiltonian(&HamiltonianSpec::new(1.0, 1.2, 0.8, 8)).map_err(s)?;
    let (spec, s0) = cache.neel_open(8)?;
    let exact = filtered(&spec, &s0, 1.0)?;
    let err_at = |dtau: f64| -> Result<f64, String> {
        let state = iterative_filter(&h, &s0, 1.0, dtau).map_err(s)?;
        phase_aligned_distance(&state, &exact).map_err(s)
    };
    let coarse = err_at(0.1)?;
    let fine = err_at(0.05)?;
    let ratio = coarse / fine;
    Ok((
        (3.5..=4.5).contains(&ratio),
        format!("L=8 tau=1: error {coarse:.2e} -> {fine:.2e}, ratio {ratio:.2} (want 3.5..4.5)"),
    ))
}

/// Check 4: the filtered second moment about the initial mean energy never
/// increases with the filter width.
fn second_moment_monotone(level: Level, cache: &mut Cache) -> Check {
    let l = match level {
        Level::Full => 10,
        Level::Quick => 8,
    };
    let (spec, s0) = cache.neel_open(l)?;
    let e0 = spec.mean_energy();
    let mut prev = f64::INFINITY;
    let mut worst_rise = f64::NEG_INFINITY;
    for tau in linspace(0.0, 5.0, 50) {
        let state = filtered(&spec, &s0, tau)?;
        let (_, second) = energy_moments(&spec, &state, e0).map_err(s)?;
        worst_rise = worst_rise.max(second - prev);
        prev = second;
    }
    Ok((
        worst_rise <= 1e-12,
        format!("L={l}, 50 widths in [0,5]: worst step increase {worst_rise:.2e} (tol 1e-12)"),
    ))
}

/// Check 5: closed-form determinant equals an LU determinant and the
/// analytic continuation on 1000 random parameter draws, and never drops
/// below the uncoupled bound.
fn replica_determinant_identities() -> Check {
    let fault = std::env::var(FAULT_ENV)
        .map(|v| v == "replica-det")
        .unwrap_or(false);
    let start = Instant::now();
    let mut rng = Rng(0x9e3779b97f4a7c15);
    let mut max_rel = 0.0f64;
    let mut bound_ok = true;
    for _ in 0..1000 {
        let p = draw_params(&mut rng, 0.1)?;
        let numeric = build_mn(&p).map_err(s)?.determinant();
        let mut closed = det_mn(&p).map_err(s)?;
        if fault {
            closed *= 1.001;
        }
        let cont = det_mn_continued(&p).map_err(s)?;
        max_rel = max_rel
            .max(((numeric - closed) / closed).abs())
            .max(((cont - closed) / closed).abs());
        if closed < det_m1(&p).powi(p.n as i32) * (1.0 - 1e-12) {
            bound_ok = false;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let marker = if fault { " [fault injected]" } else { "" };
    Ok((
        max_rel <= 1e-10 && bound_ok && elapsed < 5.0,
        format!(
            "1000 draws: max rel dev {max_rel:.2e}, lower bound {}held, {elapsed:.2}s{marker}",
            if bound_ok { "" } else { "NOT " }
        ),
    ))
}

/// Check 6: the momentum-space eigenvalue formula matches a dense
/// symmetric eigensolver.
fn replica_eigenvalue_formula() -> Check {
    let mut rng = Rng(0x2545f4914f6cdd1d);
    let mut max_dev = 0.0f64;
    for _ in 0..200 {
        let p = draw_params(&mut rng, 0.3)?;
        let dense = nalgebra::SymmetricEigen::new(build_mn(&p).map_err(s)?);
        let mut numeric: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let closed = mn_eigenvalues(&p).map_err(s)?;
        for (a, b) in numeric.iter().zip(&closed) {
            max_dev = max_dev.max((a - b).abs());
        }
    }
    Ok((
        max_dev <= 1e-12,
        format!("200 draws vs dense eigensolver: max dev {max_dev:.2e}"),
    ))
}

/// Check 7: measured half-chain second Renyi entropy approaches the
/// closed form as the chain grows.
fn half_chain_entropy_trend(level: Level, cache: &mut Cache) -> Check {
    let sizes: &[usize] = match level {
        Level::Full => &[8, 10, 12],
        Level::Quick => &[8, 10],
    };
    let tau_tildes = linspace(0.5, 3.0, 11);
    let mut devs: Vec<Vec<f64>> = Vec::new();
    for &l in sizes {
        let (spec, s0) = cache.neel_open(l)?;
        let eps2 = overlap_distribution(&spec).eps2;
        let region = half_chain(l)?;
        let mut d = Vec::new();
        for &tt in &tau_tildes {
            let tau = tt / (l as f64).sqrt();
            let state = filtered(&spec, &s0, tau)?;
            let s2 = renyi_entropy_pure(&state, &region, 2.0).map_err(s)?;
            let pred = s2_half_chain(tt, eps2).map_err(s)?;
            d.push((s2 - pred).abs());
        }
        devs.push(d);
    }
    let first = &devs[0];
    let last = &devs[devs.len() - 1];
    let better = first.iter().zip(last).filter(|(a, b)| b < a).count();
    Ok((
        better * 5 >= tau_tildes.len() * 4,
        format!(
            "closed form tracked more closely at L={} than L={} for {better}/{} widths (need 80%)",
            sizes[sizes.len() - 1],
            sizes[0],
            tau_tildes.len()
        ),
    ))
}

/// Check 8: the time-average prediction for the mid-chain S^z tightens
/// with system size.
fn filtered_expectation_trend(level: Level, cache: &mut Cache) -> Check {
    let (l_small, l_big) = match level {
        Level::Full => (6, 12),
        Level::Quick => (6, 10),
    };
    let taus = linspace(0.0, 4.0, 20);
    let (t_max, steps) = series_grid(4.0);
    let mut devs = Vec::new();
    for l in [l_small, l_big] {
        let (spec, s0) = cache.neel_open(l)?;
        let op = local_observable(PauliAxis::Z, l / 2, l).map_err(s)?;
        let series = observable_series_two_sided(&spec, &s0, &op, t_max, steps).map_err(s)?;
        let mut d = Vec::new();
        for &tau in &taus {
            let state = filtered(&spec, &s0, tau)?;
            let ed = expectation(&state, &op).map_err(s)?;
            let pred = filtered_expectation_prediction(&series, tau, 0.0).map_err(s)?;
            d.push((ed - pred).abs());
        }
        devs.push(d);
    }
    // a point counts when the deviation shrank, or when it already sits at
    // the noise floor where no decrease is measurable (tau = 0 is exact at
    // every size)
    let better = devs[0]
        .iter()
        .zip(&devs[1])
        .filter(|(a, b)| *b < *a || **b <= 1e-12)
        .count();
    Ok((
        better * 5 >= taus.len() * 4,
        format!(
            "prediction closer at L={l_big} than L={l_small} (or at noise floor) for {better}/{} widths (need 80%)",
            taus.len()
        ),
    ))
}

/// Check 9: the connected quarter-to-three-quarter S^z correlator
/// vanishes in the product state, grows under filtering, and matches the
/// time-average prediction in sign and peak position.
fn clustering_violation_shape(level: Level, cache: &mut Cache) -> Check {
    // the peak-position agreement needs L >= 10; smaller chains put the
    // measured maximum several grid steps past the predicted one
    let l = match level {
        Level::Full => 12,
        Level::Quick => 10,
    };
    let (sx, sy) = (l / 4, 3 * l / 4);
    let (spec, s0) = cache.neel_open(l)?;
    let op_x = local_observable(PauliAxis::Z, sx, l).map_err(s)?;
    let op_y = local_observable(PauliAxis::Z, sy, l).map_err(s)?;
    let (t_max, steps) = series_grid(4.0);
    let tx = observable_series_two_sided(&spec, &s0, &op_x, t_max, steps).map_err(s)?;
    let ty = observable_series_two_sided(&spec, &s0, &op_y, t_max, steps).map_err(s)?;

    let base = connected_correlator(&filtered(&spec, &s0, 0.0)?, &op_x, &op_y).map_err(s)?;
    let taus: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
    let mut ed = Vec::new();
    let mut pred = Vec::new();
    for &tau in &taus {
        let state = filtered(&spec, &s0, tau)?;
        ed.push(connected_correlator(&state, &op_x, &op_y).map_err(s)?);
        pred.push(connected_correlator_prediction_pair(&tx, &ty, tau).map_err(s)?);
    }
    let argmax = |v: &[f64]| -> usize {
        v.iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    };
    let i_ed = argmax(&ed);
    let i_pred = argmax(&pred);
    let peak = ed[i_ed].abs();
    let quiet = base.abs() <= 1e-10;
    let grows = peak > 5.0 * base.abs() && peak > 1e-8;
    let sign_match = ed[i_ed] * pred[i_ed] > 0.0;
    let peak_match = (i_ed as i64 - i_pred as i64).abs() <= 1;
    Ok((
        quiet && grows && sign_match && peak_match,
        format!(
            "L={l} sites ({sx},{sy}): |C(0)|={:.1e}, peak |C|={peak:.2e} at tau={:.1} (prediction peaks at tau={:.1}, sign {})",
            base.abs(),
            taus[i_ed],
            taus[i_pred],
            if sign_match { "agrees" } else { "DISAGREES" }
        ),
    ))
}

/// Check 10: Renyi entropies of a region and its complement coincide for
/// every sweep state.
fn entropy_complement_symmetry(level: Level, cache: &mut Cache) -> Check {
    let sizes: &[usize] = match level {
        Level::Full => &[8, 12],
        Level::Quick => &[8, 10],
    };
    let mut max_asym = 0.0f64;
    let mut states = 0usize;
    for &l in sizes {
        let (spec, s0) = cache.neel_open(l)?;
        let regions = [
            half_chain(l)?,
            Region::new([1, 2], l).map_err(s)?,
            Region::new(2..=l / 2 + 1, l).map_err(s)?,
        ];
        for tau in [0.0, 0.7, 1.5, 3.0] {
            let state = filtered(&spec, &s0, tau)?;
            states += 1;
            for region in &regions {
                let comp_sites: Vec<usize> = (1..=l)
                    .filter(|site| !region.sites().contains(site))
                    .collect();
                let comp = Region::new(comp_sites, l).map_err(s)?;
                for n in [0.5, 1.0, 2.0, 3.0] {
                    let sa = renyi_entropy_pure(&state, region, n).map_err(s)?;
                    let sc = renyi_entropy_pure(&state, &comp, n).map_err(s)?;
                    max_asym = max_asym.max((sa - sc).abs());
                }
            }
        }
    }
    Ok((
        max_asym <= 1e-9,
        format!(
            "{states} states x 3 regions x 4 indices: max |S_n(A) - S_n(comp)| = {max_asym:.2e}"
        ),
    ))
}

/// Check 11: mutual information between the end blocks is never
/// meaningfully negative and grows under filtering.
fn mutual_information_growth(level: Level, cache: &mut Cache) -> Check {
    let l = match level {
        Level::Full => 12,
        Level::Quick => 10,
    };
    let (spec, s0) = cache.neel_open(l)?;
    let a = Region::new([1, 2], l).map_err(s)?;
    let b = Region::new([l - 1, l], l).map_err(s)?;
    let mut min_mi = f64::INFINITY;
    let mut mi_at = HashMap::new();
    for tau in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let state = filtered(&spec, &s0, tau)?;
        let mi = mutual_information(&state, &a, &b).map_err(s)?;
        min_mi = min_mi.min(mi);
        mi_at.insert((tau * 10.0) as i64, mi);
    }
    let mi0 = mi_at[&0];
    let mi2 = mi_at[&20];
    // ten times a ~1e-12 noise floor on entropy arithmetic
    let grows = mi2 > mi0 + 1e-11;
    Ok((
        min_mi >= -1e-9 && grows,
        format!(
            "L={l} end blocks: min I = {min_mi:.1e}, I(tau=2) - I(tau=0) = {:.2e} (need > 1e-11)",
            mi2 - mi0
        ),
    ))
}

/// Check 12: half-chain S2 grows with log tau inside the width window
/// where the filtered variance is O(1); slope reported, the asymptotic
/// value 2 is out of reach at these sizes.
fn entropy_log_slope(level: Level, cache: &mut Cache) -> Check {
    let l = match level {
        Level::Full => 12,
        Level::Quick => 10,
    };
    let (spec, s0) = cache.neel_open(l)?;
    let eps2 = overlap_distribution(&spec).eps2;
    let b = 1.0 / (eps2 * l as f64);
    let tau_lo = (0.5 - b).max(1e-4).sqrt();
    let tau_hi = (2.0 - b).sqrt();
    let region = half_chain(l)?;
    let va = (l / 2) as f64;
    let taus = linspace(tau_lo, tau_hi, 8);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &tau in &taus {
        let state = filtered(&spec, &s0, tau)?;
        let s2 = renyi_entropy_pure(&state, &region, 2.0).map_err(s)?;
        xs.push(tau.ln());
        ys.push(s2 - 0.5 * va.ln());
    }
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    let slope = num / den;
    Ok((
        slope > 0.0,
        format!(
            "L={l}, tau in [{tau_lo:.3}, {tau_hi:.3}] (O(1) filtered variance): slope {slope:.3}; \
             the asymptotic slope 2 is not expected at this size, recorded only"
        ),
    ))
}

/// Check 13: running the same scenario twice yields byte-identical CSVs.
fn deterministic_output() -> Check {
    let dir = std::env::temp_dir().join(format!("efqs-validate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(s)?;
    let text = format!(
        "\
[model]
L = 4, 6
[state]
kind = neel
[filter]
tau_start = 0.0
tau_stop = 1.5
tau_steps = 4
[measurements]
observable = z@L/2
correlator = L/4+1@3L/4
entropy = 1:L/2@0.5,1,2
mutual_info = 1@L
variance = true
[output]
directory = {}
",
        dir.display()
    );
    let cfg = ScenarioConfig::parse(&text).map_err(s)?;
    let run = |cfg: &ScenarioConfig| -> Result<Vec<(String, Vec<u8>)>, String> {
        let summary = run_scenario(cfg, false).map_err(s)?;
        let mut files = Vec::new();
        for path in summary.files {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            files.push((name, std::fs::read(&path).map_err(s)?));
        }
        Ok(files)
    };
    let first = run(&cfg)?;
    let second = run(&cfg)?;
    let _ = std::fs::remove_dir_all(&dir);
    if first.len() != second.len() || first.is_empty() {
        return Ok((
            false,
            format!("file sets differ: {} vs {}", first.len(), second.len()),
        ));
    }
    let mut diffs = Vec::new();
    for ((name_a, bytes_a), (_, bytes_b)) in first.iter().zip(&second) {
        if bytes_a != bytes_b {
            diffs.push(name_a.clone());
        }
    }
    Ok((
        diffs.is_empty(),
        if diffs.is_empty() {
            format!("{} CSV files byte-identical across two runs", first.len())
        } else {
            format!("files differ between runs: {}", diffs.join(" "))
        },
    ))
}

pub fn run_criteria(level: Level, selected: Option<&[usize]>) -> Vec<CriterionResult> {
    let mut cache = Cache::new();
    let mut results = Vec::new();
    let checks: Vec<(usize, &'static str, CheckFn)> = vec![
        (
            1,
            "variance-closed-form",
            Box::new(move |_| variance_closed_form(level)),
        ),
        (2, "fourier-matches-exact", Box::new(fourier_matches_exact)),
        (
            3,
            "iterative-halving-ratio",
            Box::new(iterative_halving_ratio),
        ),
        (
            4,
            "second-moment-monotone",
            Box::new(move |c| second_moment_monotone(level, c)),
        ),
        (
            5,
            "replica-determinant-identities",
            Box::new(move |_| replica_determinant_identities()),
        ),
        (
            6,
            "replica-eigenvalue-formula",
            Box::new(move |_| replica_eigenvalue_formula()),
        ),
        (
            7,
            "half-chain-entropy-trend",
            Box::new(move |c| half_chain_entropy_trend(level, c)),
        ),
        (
            8,
            "filtered-expectation-trend",
            Box::new(move |c| filtered_expectation_trend(level, c)),
        ),
        (
            9,
            "clustering-violation-shape",
            Box::new(move |c| clustering_violation_shape(level, c)),
        ),
        (
            10,
            "entropy-complement-symmetry",
            Box::new(move |c| entropy_complement_symmetry(level, c)),
        ),
        (
            11,
            "mutual-information-growth",
            Box::new(move |c| mutual_information_growth(level, c)),
        ),
        (
            12,
            "entropy-log-slope",
            Box::new(move |c| entropy_log_slope(level, c)),
        ),
        (
            13,
            "deterministic-output",
            Box::new(move |_| deterministic_output()),
        ),
    ];
    for (index, name, check) in checks {
        if let Some(sel) = selected {
            if !sel.contains(&index) {
                continue;
            }
        }
        let start = Instant::now();
        let (passed, detail) = check(&mut cache).unwrap_or_else(|e| (false, format!("error: {e}")));
        results.push(CriterionResult {
            index,
            name,
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    results
}

/// One line per criterion; returns whether everything passed.
pub fn print_report(results: &[CriterionResult]) -> bool {
    let mut all = true;
    for r in results {
        println!(
            "criterion {:>2}  {:<32} {}  [{:>6.2}s]  {}",
            r.index,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
        all &= r.passed;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let total: f64 = results.iter().map(|r| r.seconds).sum();
    println!(
        "{passed} of {} criteria passed in {total:.1}s",
        results.len()
    );
    all
}

// The criteria themselves are exercised end to end by tests/acceptance.rs
// (full level) and tests/cli.rs (fault injection through the binary); unit
// tests here cover only the plumbing that those paths do not reach.
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_filters_and_preserves_order() {
        let results = run_criteria(Level::Quick, Some(&[5, 6]));
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].index, 5);
        assert_eq!(results[1].index, 6);
        assert!(
            results.iter().all(|r| r.passed),
            "{:?}",
            results
                .iter()
                .map(|r| format!("{}:{}", r.index, r.detail))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn replica_checks_are_fast_and_deterministic() {
        let a = run_criteria(Level::Quick, Some(&[5]));
        let b = run_criteria(Level::Quick, Some(&[5]));
        assert_eq!(a[0].detail, b[0].detail);
        assert!(a[0].seconds < 5.0);
    }
}
