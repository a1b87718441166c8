//! Config-free sweep shortcuts. Each builds a minimal scenario in memory,
//! reuses the scenario machinery, and returns a single table in the same
//! schema the corresponding scenario family would produce.

use crate::config::ScenarioConfig;
use crate::scenario::size_context;
use crate::AppError;
use efqs::{
    energy_moments, expectation, local_observable, overlap_distribution, schmidt_spectrum,
    spectrum_entropy, variance_prediction, PauliAxis, Region, ResultTable, DEFAULT_DENSE_CAP,
};

#[derive(Clone, Debug)]
pub struct SweepParams {
    pub l: usize,
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
    /// "neel" or "yplus"
    pub state: String,
    pub tau_max: f64,
    pub tau_steps: usize,
    /// "exact", "iterative", or "fourier" with library defaults
    pub backend: String,
}

impl SweepParams {
    /// Express the flags as a scenario config so parsing and validation
    /// are shared with the run command.
    fn to_config(&self) -> Result<ScenarioConfig, AppError> {
        if self.l > DEFAULT_DENSE_CAP {
            return Err(AppError::Capacity(format!(
                "--L: size {} exceeds the dense cap {DEFAULT_DENSE_CAP}",
                self.l
            )));
        }
        if self.tau_steps < 2 {
            return Err(AppError::Config("--tau-steps: need at least 2".into()));
        }
        if self.tau_max.is_nan() || self.tau_max <= 0.0 {
            return Err(AppError::Config("--tau-max: must be positive".into()));
        }
        let text = format!(
            "\
[model]
J = {j}
h_x = {hx}
h_z = {hz}
L = {l}
[state]
kind = {state}
[filter]
tau_start = 0.0
tau_stop = {tmax}
tau_steps = {tsteps}
backend = {backend}
[output]
directory = unused
",
            j = self.j,
            hx = self.h_x,
            hz = self.h_z,
            l = self.l,
            state = self.state,
            tmax = self.tau_max,
            tsteps = self.tau_steps,
            backend = self.backend,
        );
        ScenarioConfig::parse(&text)
    }
}

/// Filter-strength sweep: measured energy variance of the filtered state
/// against the closed-form prediction, one row per width.
pub fn filter_sweep(p: &SweepParams) -> Result<ResultTable, AppError> {
    let cfg = p.to_config()?;
    let taus = cfg.filter.taus();
    let ctx = size_context(&cfg, p.l, &taus)?;
    let eps2 = overlap_distribution(&ctx.spec).eps2;
    let e0 = ctx.spec.mean_energy();
    let mut table = ResultTable::new(&["L", "tau", "variance_ed", "variance_prediction"]);
    for (ti, &tau) in taus.iter().enumerate() {
        let (_, second) = energy_moments(&ctx.spec, &ctx.filtered[ti], e0)?;
        table.push_row(vec![
            p.l.into(),
            tau.into(),
            second.into(),
            variance_prediction(eps2, p.l, tau).into(),
        ])?;
    }
    Ok(table)
}

/// Width sweep of the mid-chain S^z expectation in the filtered state.
pub fn time_sweep(p: &SweepParams) -> Result<ResultTable, AppError> {
    let cfg = p.to_config()?;
    let taus = cfg.filter.taus();
    let ctx = size_context(&cfg, p.l, &taus)?;
    let site = p.l / 2;
    let op = local_observable(PauliAxis::Z, site, p.l)?;
    let mut table = ResultTable::new(&["L", "tau", "site", "axis", "value"]);
    for (ti, &tau) in taus.iter().enumerate() {
        let value = expectation(&ctx.filtered[ti], &op)?;
        table.push_row(vec![
            p.l.into(),
            tau.into(),
            site.into(),
            "z".into(),
            value.into(),
        ])?;
    }
    Ok(table)
}

/// Width sweep of half-chain Renyi entropies (n = 1 and 2).
pub fn entropy_sweep(p: &SweepParams) -> Result<ResultTable, AppError> {
    let cfg = p.to_config()?;
    let taus = cfg.filter.taus();
    let ctx = size_context(&cfg, p.l, &taus)?;
    let region = Region::new(1..=p.l / 2, p.l)?;
    let label = region.label();
    let mut table = ResultTable::new(&["L", "tau", "n", "region", "entropy"]);
    for (ti, &tau) in taus.iter().enumerate() {
        let spectrum = schmidt_spectrum(&ctx.filtered[ti], &region)?;
        for n in [1.0, 2.0] {
            table.push_row(vec![
                p.l.into(),
                tau.into(),
                n.into(),
                label.clone().into(),
                spectrum_entropy(&spectrum, n)?.into(),
            ])?;
        }
    }
    Ok(table)
}
