//! Closed-form replica quantities printed as an aligned text report.

use crate::AppError;
use efqs::{
    det_m1, det_mn, det_mn_continued, gmft_asymptotic_with, mn_eigenvalues, nn_eigenvalues,
    short_filter_entropy_delta, ReplicaParams,
};

#[derive(Clone, Debug)]
pub struct PredictArgs {
    pub n: f64,
    pub tau_tilde: f64,
    pub eps2: f64,
    pub f: f64,
    pub volume: usize,
    /// Physical filter width for the asymptotic branch; needs gamma.
    pub tau: Option<f64>,
    pub gamma: f64,
    pub area: f64,
    pub subleading: bool,
}

fn fmt_list(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| format!("{v:.12}"))
        .collect::<Vec<_>>()
        .join("  ")
}

/// Build the report; parameter problems surface as usage errors.
pub fn replica_report(args: &PredictArgs) -> Result<String, AppError> {
    let params = ReplicaParams::new(args.n, args.tau_tilde, args.eps2, args.f)
        .and_then(|p| p.with_volume(args.volume))
        .map_err(|e| AppError::Config(format!("{e}")))?;

    let mut lines: Vec<(String, String)> = vec![
        ("n".into(), format!("{}", args.n)),
        ("tau_tilde".into(), format!("{}", args.tau_tilde)),
        ("eps2".into(), format!("{}", args.eps2)),
        ("f".into(), format!("{}", args.f)),
        ("det_M1".into(), format!("{:.12}", det_m1(&params))),
    ];

    let integer_n = (args.n - args.n.round()).abs() < 1e-9 && args.n >= 1.0;
    if integer_n {
        lines.push(("det_Mn".into(), format!("{:.12}", det_mn(&params)?)));
        lines.push(("Mn_eigenvalues".into(), fmt_list(&mn_eigenvalues(&params)?)));
        lines.push(("Nn_eigenvalues".into(), fmt_list(&nn_eigenvalues(&params)?)));
    } else {
        lines.push(("det_Mn".into(), "n/a (integer n only)".into()));
    }
    lines.push((
        "det_Mn_continued".into(),
        format!("{:.12}", det_mn_continued(&params)?),
    ));
    lines.push((
        "delta_S_n".into(),
        format!("{:.12}", short_filter_entropy_delta(&params)?),
    ));

    if let Some(tau) = args.tau {
        let asym = ReplicaParams::new(args.n, args.tau_tilde, args.eps2, args.f)
            .and_then(|p| p.with_volume(args.volume))
            .and_then(|p| p.with_area(args.area))
            .and_then(|p| p.with_rate(args.gamma))
            .map_err(|e| AppError::Config(format!("{e}")))?;
        lines.push((
            "gmft_entropy".into(),
            format!(
                "{:.12}",
                gmft_asymptotic_with(&asym, tau, args.subleading)
                    .map_err(|e| AppError::Config(format!("{e}")))?
            ),
        ));
    }

    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0) + 2;
    let mut out = String::new();
    for (k, v) in &lines {
        out.push_str(&format!("{k:<width$}{v}\n"));
    }
    if (args.n - 1.0).abs() < 1e-9 {
        out.push_str(
            "note: delta_S_n at n = 1 is the replica limit, taken by central difference with step 1e-5\n",
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use efqs::s2_half_chain;

    fn base() -> PredictArgs {
        PredictArgs {
            n: 2.0,
            tau_tilde: 1.0,
            eps2: 1.0,
            f: 0.5,
            volume: 1,
            tau: None,
            gamma: 0.0,
            area: 1.0,
            subleading: false,
        }
    }

    fn field(report: &str, key: &str) -> f64 {
        for line in report.lines() {
            let mut parts = line.split_whitespace();
            if parts.next() == Some(key) {
                return parts.next().unwrap().parse().unwrap();
            }
        }
        panic!("missing {key} in report:\n{report}");
    }

    #[test]
    fn half_chain_delta_matches_the_closed_form() {
        let report = replica_report(&base()).unwrap();
        let delta = field(&report, "delta_S_n");
        let want = s2_half_chain(1.0, 1.0).unwrap();
        assert!((delta - want).abs() < 1e-9, "{delta} vs {want}");
    }

    #[test]
    fn replica_limit_report_carries_a_note() {
        let mut args = base();
        args.n = 1.0;
        let report = replica_report(&args).unwrap();
        assert!(report.contains("central difference"));
        assert!(report.contains("step 1e-5"));
    }

    #[test]
    fn fraction_out_of_range_is_a_usage_error() {
        let mut args = base();
        args.f = 1.5;
        let err = replica_report(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn non_integer_n_still_reports_the_continuation() {
        let mut args = base();
        args.n = 1.5;
        let report = replica_report(&args).unwrap();
        assert!(report.contains("n/a (integer n only)"));
        assert!(report.contains("det_Mn_continued"));
        let delta = field(&report, "delta_S_n");
        assert!(delta.is_finite() && delta > 0.0);
    }
}
