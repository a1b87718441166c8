//! Executes one scenario config end to end: shared diagonalization per
//! size, filtered states per width, one CSV per measurement family, and a
//! metadata sidecar that guards the output directory against accidental
//! mixing of results from different configs.

use crate::config::{BackendChoice, ScenarioConfig};
use crate::AppError;
use efqs::{
    build_hamiltonian, connected_correlator, connected_correlator_prediction_pair, eigendecompose,
    energy_moments, expectation, filter_state, local_observable, mutual_information,
    observable_series_two_sided, overlap_distribution, product_state, schmidt_spectrum,
    spectrum_entropy, variance_prediction, FilterBackend, HamiltonianSpec, PauliAxis, PureState,
    Region, ResultTable, SpectralData, TimeSeries, DEFAULT_DENSE_CAP,
};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Trajectory sampling used for time-average predictions: extent is four
/// filter widths (the Gaussian weight is below 1e-8 beyond that), sampled
/// densely enough that interpolation error stays far below physics scales.
const SERIES_DT: f64 = 0.05;

pub const METADATA_FILE: &str = "metadata.txt";

#[derive(Debug)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
}

pub fn config_hash(raw: &str) -> String {
    let digest = Sha256::digest(raw.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Refuse to overwrite results produced by a different config unless the
/// caller forces it. Same hash means same bytes, so overwriting is safe.
fn guard_output_dir(cfg: &ScenarioConfig, hash: &str, force: bool) -> Result<(), AppError> {
    let meta = cfg.output_dir.join(METADATA_FILE);
    if !meta.exists() {
        return Ok(());
    }
    let text = std::fs::read_to_string(&meta)?;
    let existing = text
        .lines()
        .find_map(|l| l.strip_prefix("config_hash="))
        .unwrap_or("");
    if existing == hash || force {
        Ok(())
    } else {
        Err(AppError::Refused(format!(
            "{} holds results for config {}, refusing to overwrite with config {} (pass --force to override)",
            cfg.output_dir.display(),
            &existing[..existing.len().min(12)],
            &hash[..12]
        )))
    }
}

struct Tables {
    observables: ResultTable,
    correlators: ResultTable,
    entropies: ResultTable,
    variance: ResultTable,
    mutual_info: ResultTable,
}

impl Tables {
    fn new() -> Tables {
        Tables {
            observables: ResultTable::new(&["L", "tau", "site", "axis", "value"]),
            correlators: ResultTable::new(&[
                "L",
                "tau",
                "site_x",
                "site_y",
                "connected_ed",
                "connected_prediction",
            ]),
            entropies: ResultTable::new(&["L", "tau", "n", "region", "entropy"]),
            variance: ResultTable::new(&["L", "tau", "variance_ed", "variance_prediction"]),
            mutual_info: ResultTable::new(&["L", "tau", "region_a", "region_b", "mi"]),
        }
    }
}

/// Everything computed once per chain length and shared by the
/// measurement families.
pub(crate) struct SizeContext {
    pub(crate) l: usize,
    pub(crate) spec: SpectralData,
    pub(crate) state0: PureState,
    pub(crate) filtered: Vec<PureState>,
}

pub(crate) fn size_context(
    cfg: &ScenarioConfig,
    l: usize,
    taus: &[f64],
) -> Result<SizeContext, AppError> {
    let hspec = HamiltonianSpec {
        j: cfg.model.j,
        h_x: cfg.model.h_x,
        h_z: cfg.model.h_z,
        l,
        boundary: cfg.model.boundary,
    };
    let h = build_hamiltonian(&hspec)?;
    let state0 = product_state(&cfg.state, l)?;
    let spec = eigendecompose(&h, &state0)?;
    let backend = match cfg.filter.backend {
        BackendChoice::Exact => FilterBackend::Exact,
        BackendChoice::Iterative { dtau } => FilterBackend::Iterative { h: &h, dtau },
        BackendChoice::Fourier {
            window_factor,
            points,
        } => FilterBackend::Fourier {
            window_factor,
            points,
        },
    };
    let filtered: Vec<PureState> = taus
        .par_iter()
        .map(|&tau| filter_state(&spec, &state0, tau, &backend))
        .collect::<efqs::Result<_>>()?;
    Ok(SizeContext {
        l,
        spec,
        state0,
        filtered,
    })
}

/// Trajectories of single-site S^z-style observables, cached per site so a
/// site shared by several correlator pairs is evolved once.
struct SeriesCache<'a> {
    ctx: &'a SizeContext,
    t_max: f64,
    steps_per_side: usize,
    map: BTreeMap<(PauliAxis, usize), TimeSeries>,
}

impl<'a> SeriesCache<'a> {
    fn new(ctx: &'a SizeContext, tau_max: f64) -> SeriesCache<'a> {
        let reach = (4.0 * tau_max).max(4.0 * SERIES_DT);
        let steps_per_side = (reach / SERIES_DT).ceil() as usize;
        SeriesCache {
            ctx,
            t_max: steps_per_side as f64 * SERIES_DT,
            steps_per_side,
            map: BTreeMap::new(),
        }
    }

    fn get(&mut self, axis: PauliAxis, site: usize) -> Result<&TimeSeries, AppError> {
        if !self.map.contains_key(&(axis, site)) {
            let op = local_observable(axis, site, self.ctx.l)?;
            let series = observable_series_two_sided(
                &self.ctx.spec,
                &self.ctx.state0,
                &op,
                self.t_max,
                self.steps_per_side,
            )?;
            self.map.insert((axis, site), series);
        }
        Ok(&self.map[&(axis, site)])
    }
}

pub fn run_scenario(cfg: &ScenarioConfig, force: bool) -> Result<RunSummary, AppError> {
    for &l in &cfg.model.ls {
        if l > DEFAULT_DENSE_CAP {
            return Err(AppError::Capacity(format!(
                "model.L: size {l} exceeds the dense cap {DEFAULT_DENSE_CAP}"
            )));
        }
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let hash = config_hash(&cfg.raw);
    guard_output_dir(cfg, &hash, force)?;

    let taus = cfg.filter.taus();
    let tau_max = *taus.last().expect("grid is nonempty");
    let m = &cfg.measurements;
    let mut tables = Tables::new();

    for &l in &cfg.model.ls {
        let ctx = size_context(cfg, l, &taus)?;
        let mut series = SeriesCache::new(&ctx, tau_max);

        for (i, (axis, site_expr)) in m.observables.iter().enumerate() {
            let path = format!("measurements.observable[{i}]");
            let site = site_expr.eval(l).map_err(AppError::Config)?;
            let op = local_observable(*axis, site, l)
                .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
            for (ti, &tau) in taus.iter().enumerate() {
                let value = expectation(&ctx.filtered[ti], &op)
                    .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
                tables.observables.push_row(vec![
                    l.into(),
                    tau.into(),
                    site.into(),
                    format!("{axis:?}").to_lowercase().into(),
                    value.into(),
                ])?;
            }
        }

        for (i, (ex, ey)) in m.correlators.iter().enumerate() {
            let path = format!("measurements.correlator[{i}]");
            let (sx, sy) = (
                ex.eval(l).map_err(AppError::Config)?,
                ey.eval(l).map_err(AppError::Config)?,
            );
            let op_x = local_observable(PauliAxis::Z, sx, l)?;
            let op_y = local_observable(PauliAxis::Z, sy, l)?;
            let tx = series.get(PauliAxis::Z, sx)?.clone();
            let ty = series.get(PauliAxis::Z, sy)?.clone();
            for (ti, &tau) in taus.iter().enumerate() {
                let ed = connected_correlator(&ctx.filtered[ti], &op_x, &op_y)
                    .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
                let pred = connected_correlator_prediction_pair(&tx, &ty, tau)
                    .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
                tables.correlators.push_row(vec![
                    l.into(),
                    tau.into(),
                    sx.into(),
                    sy.into(),
                    ed.into(),
                    pred.into(),
                ])?;
            }
        }

        for (i, (region_spec, ns)) in m.entropies.iter().enumerate() {
            let path = format!("measurements.entropy[{i}]");
            let region = Region::new(region_spec.eval(l).map_err(AppError::Config)?, l)
                .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
            let label = region.label();
            for (ti, &tau) in taus.iter().enumerate() {
                let spectrum = schmidt_spectrum(&ctx.filtered[ti], &region)
                    .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
                for &n in ns {
                    let s = spectrum_entropy(&spectrum, n)
                        .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
                    tables.entropies.push_row(vec![
                        l.into(),
                        tau.into(),
                        n.into(),
                        label.clone().into(),
                        s.into(),
                    ])?;
                }
            }
        }

        for (i, (ra, rb)) in m.mutual_info.iter().enumerate() {
            let path = format!("measurements.mutual_info[{i}]");
            let a = Region::new(ra.eval(l).map_err(AppError::Config)?, l)
                .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
            let b = Region::new(rb.eval(l).map_err(AppError::Config)?, l)
                .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
            for (ti, &tau) in taus.iter().enumerate() {
                let mi = mutual_information(&ctx.filtered[ti], &a, &b)
                    .map_err(|e| AppError::Config(format!("{path}: {e}")))?;
                tables.mutual_info.push_row(vec![
                    l.into(),
                    tau.into(),
                    a.label().into(),
                    b.label().into(),
                    mi.into(),
                ])?;
            }
        }

        if m.variance {
            let eps2 = overlap_distribution(&ctx.spec).eps2;
            let e0 = ctx.spec.mean_energy();
            for (ti, &tau) in taus.iter().enumerate() {
                let (_, second) = energy_moments(&ctx.spec, &ctx.filtered[ti], e0)?;
                tables.variance.push_row(vec![
                    l.into(),
                    tau.into(),
                    second.into(),
                    variance_prediction(eps2, l, tau).into(),
                ])?;
            }
        }
    }

    // Write only the families that were requested; an empty measurement
    // list still produces the metadata sidecar and succeeds.
    let mut files = Vec::new();
    let mut rows = 0;
    let outputs: [(&str, &ResultTable, bool); 5] = [
        (
            "observables.csv",
            &tables.observables,
            !m.observables.is_empty(),
        ),
        (
            "correlators.csv",
            &tables.correlators,
            !m.correlators.is_empty(),
        ),
        ("entropies.csv", &tables.entropies, !m.entropies.is_empty()),
        ("variance.csv", &tables.variance, m.variance),
        (
            "mutual_info.csv",
            &tables.mutual_info,
            !m.mutual_info.is_empty(),
        ),
    ];
    for (name, table, requested) in outputs {
        if !requested {
            continue;
        }
        let path = cfg.output_dir.join(name);
        std::fs::write(&path, table.to_csv())?;
        rows += table.len();
        files.push(path);
    }

    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = format!(
        "config_hash={hash}\ncode_version={}\ngenerated_unix={stamp}\n",
        env!("CARGO_PKG_VERSION")
    );
    std::fs::write(cfg.output_dir.join(METADATA_FILE), meta)?;

    Ok(RunSummary { files, rows })
}

/// Shared prediction grid parameters, exported for the validation suite so
/// its trajectories match what `run_scenario` would produce.
pub fn series_grid(tau_max: f64) -> (f64, usize) {
    let reach = (4.0 * tau_max).max(4.0 * SERIES_DT);
    let steps = (reach / SERIES_DT).ceil() as usize;
    (steps as f64 * SERIES_DT, steps)
}
