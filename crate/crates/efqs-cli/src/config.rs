//! Scenario configuration: a small INI dialect with sections [model],
//! [state], [filter], [measurements], [output]. Sites may be written
//! relative to the chain length (`L/2`, `3L/4`, `L-1`), so one file can
//! drive a whole size sweep.

use crate::AppError;
use efqs::{Boundary, PauliAxis, SitePattern};
use std::path::{Path, PathBuf};

/// Site position, either a literal integer or an expression of the form
/// `[a]L[/d][+c|-c]` evaluated with floor division once L is known.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteExpr {
    coeff: i64,
    div: i64,
    offset: i64,
    uses_l: bool,
    raw: String,
}

impl SiteExpr {
    pub fn parse(text: &str) -> Result<SiteExpr, String> {
        let raw = text.trim().to_string();
        let bad = |m: &str| format!("site expression '{raw}': {m}");
        if raw.is_empty() {
            return Err(bad("empty"));
        }
        if !raw.contains('L') {
            let n: i64 = raw
                .parse()
                .map_err(|_| bad("expected an integer or an L-relative form like 3L/4+1"))?;
            return Ok(SiteExpr {
                coeff: 0,
                div: 1,
                offset: n,
                uses_l: false,
                raw,
            });
        }
        let (lhs, rest) = raw.split_once('L').ok_or_else(|| bad("missing L"))?;
        let coeff: i64 = if lhs.is_empty() {
            1
        } else {
            lhs.parse().map_err(|_| bad("bad coefficient before L"))?
        };
        if coeff < 1 {
            return Err(bad("coefficient must be positive"));
        }
        // rest is [/d][+c|-c]; locate the sign that starts the offset.
        let (div_part, offset_part) = match rest.find(['+', '-']) {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        let div: i64 = if div_part.is_empty() {
            1
        } else {
            let d = div_part
                .strip_prefix('/')
                .ok_or_else(|| bad("expected /divisor after L"))?;
            d.parse().map_err(|_| bad("bad divisor"))?
        };
        if div < 1 {
            return Err(bad("divisor must be positive"));
        }
        let offset: i64 = if offset_part.is_empty() {
            0
        } else {
            offset_part.parse().map_err(|_| bad("bad offset"))?
        };
        Ok(SiteExpr {
            coeff,
            div,
            offset,
            uses_l: true,
            raw,
        })
    }

    /// Resolve against a concrete chain length; 1-based result checked > 0
    /// here, upper bound checked by the caller who knows the context.
    pub fn eval(&self, l: usize) -> Result<usize, String> {
        let value = if self.uses_l {
            self.coeff * l as i64 / self.div + self.offset
        } else {
            self.offset
        };
        if value < 1 {
            return Err(format!(
                "site expression '{}' evaluates to {value} at L={l}",
                self.raw
            ));
        }
        Ok(value as usize)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }
}

/// One comma-separated region item: a single site or an inclusive range.
#[derive(Clone, Debug)]
enum RegionItem {
    Single(SiteExpr),
    Range(SiteExpr, SiteExpr),
}

/// Unresolved region: comma list of sites and a:b ranges, ends allowed to
/// be L-relative expressions.
#[derive(Clone, Debug)]
pub struct RegionSpec {
    items: Vec<RegionItem>,
    raw: String,
}

impl RegionSpec {
    pub fn parse(text: &str) -> Result<RegionSpec, String> {
        let raw = text.trim().to_string();
        if raw.is_empty() {
            return Err("empty region".into());
        }
        let mut items = Vec::new();
        for part in raw.split(',') {
            let part = part.trim();
            match part.split_once(':') {
                Some((a, b)) => {
                    items.push(RegionItem::Range(SiteExpr::parse(a)?, SiteExpr::parse(b)?))
                }
                None => items.push(RegionItem::Single(SiteExpr::parse(part)?)),
            }
        }
        Ok(RegionSpec { items, raw })
    }

    pub fn eval(&self, l: usize) -> Result<Vec<usize>, String> {
        let mut sites = Vec::new();
        for item in &self.items {
            match item {
                RegionItem::Single(e) => sites.push(e.eval(l)?),
                RegionItem::Range(a, b) => {
                    let (lo, hi) = (a.eval(l)?, b.eval(l)?);
                    if lo > hi {
                        return Err(format!(
                            "region '{}': range {lo}:{hi} is reversed at L={l}",
                            self.raw
                        ));
                    }
                    sites.extend(lo..=hi);
                }
            }
        }
        Ok(sites)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BackendChoice {
    Exact,
    Iterative { dtau: f64 },
    Fourier { window_factor: f64, points: usize },
}

#[derive(Clone, Debug)]
pub struct ModelSection {
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
    pub ls: Vec<usize>,
    pub boundary: Boundary,
}

#[derive(Clone, Debug)]
pub struct FilterSection {
    pub tau_start: f64,
    pub tau_stop: f64,
    pub tau_steps: usize,
    pub backend: BackendChoice,
}

impl FilterSection {
    /// Ascending filter-width grid; a single step collapses to tau_start.
    pub fn taus(&self) -> Vec<f64> {
        if self.tau_steps == 1 {
            return vec![self.tau_start];
        }
        let h = (self.tau_stop - self.tau_start) / (self.tau_steps - 1) as f64;
        (0..self.tau_steps)
            .map(|i| self.tau_start + h * i as f64)
            .collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Measurements {
    pub observables: Vec<(PauliAxis, SiteExpr)>,
    pub correlators: Vec<(SiteExpr, SiteExpr)>,
    pub entropies: Vec<(RegionSpec, Vec<f64>)>,
    pub mutual_info: Vec<(RegionSpec, RegionSpec)>,
    pub variance: bool,
}

impl Measurements {
    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
            && self.correlators.is_empty()
            && self.entropies.is_empty()
            && self.mutual_info.is_empty()
            && !self.variance
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub state: SitePattern,
    pub filter: FilterSection,
    pub measurements: Measurements,
    pub output_dir: PathBuf,
    /// Original file text, the input to the config hash.
    pub raw: String,
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<ScenarioConfig, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        ScenarioConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ScenarioConfig, AppError> {
        let entries = parse_ini(text).map_err(AppError::Config)?;

        let mut j = 1.0;
        let mut h_x = 1.2;
        let mut h_z = 0.8;
        let mut ls: Option<Vec<usize>> = None;
        let mut boundary = Boundary::Open;
        let mut state = SitePattern::Neel;
        let mut tau_start = 0.0;
        let mut tau_stop: Option<f64> = None;
        let mut tau_steps: Option<usize> = None;
        let mut backend_name = String::from("exact");
        let mut dtau = 0.05;
        let mut window_factor = 6.0;
        let mut points = 2001usize;
        let mut meas = Measurements::default();
        let mut output_dir: Option<PathBuf> = None;

        for (section, key, value) in &entries {
            let path = format!("{section}.{key}");
            let err = |m: String| AppError::Config(format!("{path}: {m}"));
            match (section.as_str(), key.as_str()) {
                ("model", "J") => j = parse_f64(value).map_err(err)?,
                ("model", "h_x") => h_x = parse_f64(value).map_err(err)?,
                ("model", "h_z") => h_z = parse_f64(value).map_err(err)?,
                ("model", "L") => {
                    let mut sizes = Vec::new();
                    for part in value.split(',') {
                        let l: usize = part
                            .trim()
                            .parse()
                            .map_err(|_| err(format!("bad size '{}'", part.trim())))?;
                        sizes.push(l);
                    }
                    sizes.sort_unstable();
                    sizes.dedup();
                    if sizes.is_empty() || sizes[0] < 2 {
                        return Err(err("need sizes >= 2".into()));
                    }
                    ls = Some(sizes);
                }
                ("model", "boundary") => {
                    boundary = match value.as_str() {
                        "open" => Boundary::Open,
                        "periodic" => Boundary::Periodic,
                        other => return Err(err(format!("unknown boundary '{other}'"))),
                    }
                }
                ("state", "kind") => {
                    state = match value.as_str() {
                        "neel" => SitePattern::Neel,
                        "yplus" | "y+" => SitePattern::YPlus,
                        other => return Err(err(format!("unknown state kind '{other}'"))),
                    }
                }
                ("filter", "tau_start") => tau_start = parse_f64(value).map_err(err)?,
                ("filter", "tau_stop") => tau_stop = Some(parse_f64(value).map_err(err)?),
                ("filter", "tau_steps") => {
                    tau_steps = Some(value.parse().map_err(|_| err("bad step count".into()))?)
                }
                ("filter", "backend") => backend_name = value.clone(),
                ("filter", "dtau") => dtau = parse_f64(value).map_err(err)?,
                ("filter", "window") => window_factor = parse_f64(value).map_err(err)?,
                ("filter", "points") => {
                    points = value.parse().map_err(|_| err("bad point count".into()))?
                }
                ("measurements", "observable") => {
                    let (axis, site) = value
                        .split_once('@')
                        .ok_or_else(|| err("expected axis@site".into()))?;
                    let axis = parse_axis(axis.trim()).map_err(err)?;
                    let site = SiteExpr::parse(site).map_err(err)?;
                    meas.observables.push((axis, site));
                }
                ("measurements", "correlator") => {
                    let (a, b) = value
                        .split_once('@')
                        .ok_or_else(|| err("expected site@site".into()))?;
                    meas.correlators.push((
                        SiteExpr::parse(a).map_err(err)?,
                        SiteExpr::parse(b).map_err(err)?,
                    ));
                }
                ("measurements", "entropy") => {
                    let (region, ns) = value
                        .split_once('@')
                        .ok_or_else(|| err("expected region@n-list".into()))?;
                    let region = RegionSpec::parse(region).map_err(err)?;
                    let mut indices = Vec::new();
                    for part in ns.split(',') {
                        let n = parse_f64(part).map_err(err)?;
                        if n <= 0.0 {
                            return Err(err(format!("entropy index {n} must be positive")));
                        }
                        indices.push(n);
                    }
                    if indices.is_empty() {
                        return Err(err("empty n-list".into()));
                    }
                    meas.entropies.push((region, indices));
                }
                ("measurements", "mutual_info") => {
                    let (a, b) = value
                        .split_once('@')
                        .ok_or_else(|| err("expected region@region".into()))?;
                    meas.mutual_info.push((
                        RegionSpec::parse(a).map_err(err)?,
                        RegionSpec::parse(b).map_err(err)?,
                    ));
                }
                ("measurements", "variance") => {
                    meas.variance = match value.as_str() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        other => return Err(err(format!("expected true/false, got '{other}'"))),
                    }
                }
                ("output", "directory") => output_dir = Some(PathBuf::from(value)),
                _ => {
                    return Err(AppError::Config(format!(
                        "{path}: unknown key (sections: model, state, filter, measurements, output)"
                    )))
                }
            }
        }

        let ls = ls.ok_or_else(|| AppError::Config("model.L: missing".into()))?;
        let tau_stop =
            tau_stop.ok_or_else(|| AppError::Config("filter.tau_stop: missing".into()))?;
        let tau_steps =
            tau_steps.ok_or_else(|| AppError::Config("filter.tau_steps: missing".into()))?;
        let output_dir =
            output_dir.ok_or_else(|| AppError::Config("output.directory: missing".into()))?;

        if tau_steps < 1 {
            return Err(AppError::Config("filter.tau_steps: need at least 1".into()));
        }
        if !tau_start.is_finite() || tau_start < 0.0 {
            return Err(AppError::Config(
                "filter.tau_start: must be finite and >= 0".into(),
            ));
        }
        if tau_steps > 1 && tau_stop <= tau_start {
            return Err(AppError::Config(
                "filter.tau_stop: grid must ascend (tau_stop > tau_start)".into(),
            ));
        }

        let backend = match backend_name.as_str() {
            "exact" => BackendChoice::Exact,
            "iterative" => {
                if dtau.is_nan() || dtau <= 0.0 {
                    return Err(AppError::Config("filter.dtau: must be positive".into()));
                }
                BackendChoice::Iterative { dtau }
            }
            "fourier" => {
                if window_factor.is_nan() || window_factor <= 0.0 {
                    return Err(AppError::Config("filter.window: must be positive".into()));
                }
                if points < 2 {
                    return Err(AppError::Config("filter.points: need at least 2".into()));
                }
                BackendChoice::Fourier {
                    window_factor,
                    points,
                }
            }
            other => {
                return Err(AppError::Config(format!(
                    "filter.backend: unknown backend '{other}' (exact, iterative, fourier)"
                )))
            }
        };

        let cfg = ScenarioConfig {
            model: ModelSection {
                j,
                h_x,
                h_z,
                ls,
                boundary,
            },
            state,
            filter: FilterSection {
                tau_start,
                tau_stop,
                tau_steps,
                backend,
            },
            measurements: meas,
            output_dir,
            raw: text.to_string(),
        };
        cfg.check_sites()?;
        Ok(cfg)
    }

    /// Resolve every site expression at every requested size so a bad
    /// combination is reported before any computation starts.
    fn check_sites(&self) -> Result<(), AppError> {
        for &l in &self.model.ls {
            let check = |site: usize, path: &str, raw: &str| -> Result<(), AppError> {
                if site > l {
                    Err(AppError::Config(format!(
                        "{path}: site '{raw}' = {site} exceeds L={l}"
                    )))
                } else {
                    Ok(())
                }
            };
            for (i, (_, e)) in self.measurements.observables.iter().enumerate() {
                let path = format!("measurements.observable[{i}]");
                let s = e.eval(l).map_err(AppError::Config)?;
                check(s, &path, e.raw())?;
            }
            for (i, (a, b)) in self.measurements.correlators.iter().enumerate() {
                let path = format!("measurements.correlator[{i}]");
                for e in [a, b] {
                    let s = e.eval(l).map_err(AppError::Config)?;
                    check(s, &path, e.raw())?;
                }
            }
            for (i, (r, _)) in self.measurements.entropies.iter().enumerate() {
                let path = format!("measurements.entropy[{i}]");
                for s in r.eval(l).map_err(AppError::Config)? {
                    check(s, &path, r.raw())?;
                }
            }
            for (i, (a, b)) in self.measurements.mutual_info.iter().enumerate() {
                let path = format!("measurements.mutual_info[{i}]");
                for r in [a, b] {
                    for s in r.eval(l).map_err(AppError::Config)? {
                        check(s, &path, r.raw())?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("bad number '{}'", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("non-finite number '{}'", s.trim()));
    }
    Ok(v)
}

pub fn parse_axis(s: &str) -> Result<PauliAxis, String> {
    match s.to_ascii_lowercase().as_str() {
        "x" => Ok(PauliAxis::X),
        "y" => Ok(PauliAxis::Y),
        "z" => Ok(PauliAxis::Z),
        other => Err(format!("unknown axis '{other}'")),
    }
}

/// Flatten an INI text into (section, key, value) triples in file order.
/// Duplicate keys are kept; the interpreter decides whether that means
/// accumulate (measurements) or overwrite (scalars).
fn parse_ini(text: &str) -> Result<Vec<(String, String, String)>, String> {
    let mut entries = Vec::new();
    let mut section = String::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| format!("line {}: unterminated section header", lineno + 1))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        if section.is_empty() {
            return Err(format!("line {}: key outside any section", lineno + 1));
        }
        entries.push((
            section.clone(),
            key.trim().to_string(),
            value.trim().to_string(),
        ));
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn site_expressions_evaluate_with_floor_division() {
        let cases = [
            ("L/2", 12, 6),
            ("3L/4", 12, 9),
            ("3L/4", 10, 7),
            ("L-1", 8, 7),
            ("L/4+1", 10, 3),
            ("2L/3", 10, 6),
            ("5", 12, 5),
            ("L", 6, 6),
        ];
        for (text, l, want) in cases {
            let e = SiteExpr::parse(text).unwrap();
            assert_eq!(e.eval(l).unwrap(), want, "{text} at L={l}");
        }
    }

    #[test]
    fn bad_site_expressions_are_rejected() {
        for text in ["", "L/", "L/0", "0L", "q", "L+", "1.5"] {
            assert!(SiteExpr::parse(text).is_err(), "{text:?} should fail");
        }
        // valid form, but lands below site 1
        let e = SiteExpr::parse("L/2-9").unwrap();
        assert!(e.eval(8).is_err());
    }

    #[test]
    fn regions_mix_singles_and_ranges() {
        let r = RegionSpec::parse("1:3,5,L-1:L").unwrap();
        assert_eq!(r.eval(8).unwrap(), vec![1, 2, 3, 5, 7, 8]);
        assert!(RegionSpec::parse("3:1").unwrap().eval(8).is_err());
    }

    #[test]
    fn full_scenario_round_trip() {
        let text = "\
[model]
J = 1.0
h_x = 1.2
h_z = 0.8
L = 8, 6, 8
boundary = open

[state]
kind = neel

[filter]
tau_start = 0.0
tau_stop = 2.0
tau_steps = 5
backend = exact

[measurements]
observable = z@L/2
observable = x@1
correlator = L/4@3L/4
entropy = 1:L/2@1,2
mutual_info = 1,2@L-1,L
variance = true

[output]
directory = out
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.model.ls, vec![6, 8]); // sorted, deduped
        assert_eq!(cfg.filter.taus(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(cfg.measurements.observables.len(), 2);
        assert!(cfg.measurements.variance);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn config_errors_name_the_offending_path() {
        let base = "\
[model]
L = 6
[state]
kind = neel
[filter]
tau_start = 0
tau_stop = 1
tau_steps = 2
[output]
directory = out
";
        // site beyond the smallest size
        let text = base.replace("[output]", "[measurements]\nobservable = z@7\n[output]");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("measurements.observable[0]"), "{msg}");

        // descending grid
        let text = base.replace("tau_stop = 1", "tau_stop = -1");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        assert!(format!("{err}").contains("tau_stop"));

        // unknown key
        let text = base.replace("kind = neel", "kind = neel\ncolour = blue");
        assert!(ScenarioConfig::parse(&text).is_err());
    }

    #[test]
    fn single_step_grid_is_just_the_start() {
        let text = "\
[model]
L = 4
[state]
kind = yplus
[filter]
tau_start = 1.5
tau_stop = 1.5
tau_steps = 1
backend = fourier
window = 5
points = 401
[output]
directory = o
";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.filter.taus(), vec![1.5]);
        assert_eq!(
            cfg.filter.backend,
            BackendChoice::Fourier {
                window_factor: 5.0,
                points: 401
            }
        );
        assert!(matches!(cfg.state, SitePattern::YPlus));
    }
}
