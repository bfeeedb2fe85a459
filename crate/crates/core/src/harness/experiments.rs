use std::fmt;

use crate::error::{ErknError, Result};
use crate::harness::benchmark::{
    benchmark_initial_state, blocks_from, build_paper_system, quartic_system,
};
use crate::harness::config::ExperimentConfig;
use crate::harness::series::EnergySeries;
use crate::integrator::{
    block_sigmas, check_newcond, check_order2, check_symmetry, check_symplecticity, integrate,
    propagate, Builtin, ConditionReport, ErknScheme, Observer,
};
use crate::system::{
    default_tolerance, nonresonance_margin, resonance_scan, OscillatorySystem, ResonanceScan, State,
};

/// System and initial state described by a config.
pub fn system_from_config(cfg: &ExperimentConfig) -> Result<(OscillatorySystem<f64>, State<f64>)> {
    let epsilon = 1.0 / cfg.epsilon_inv;
    let blocks = blocks_from(&cfg.lambda, &cfg.dims)?;
    let sys = quartic_system(epsilon, blocks, cfg.potential_coeffs.clone())?;
    let s0 = match (&cfg.q0, &cfg.p0) {
        (Some(q), Some(p)) => State::new(q.clone(), p.clone())?,
        (None, None) if sys.dim() == 5 => benchmark_initial_state(epsilon),
        (None, None) => {
            return Err(ErknError::Config(
                "q0 and p0 are required unless the benchmark layout (dimension 5) is used".into(),
            ))
        }
        _ => return Err(ErknError::Config("q0 and p0 must be given together".into())),
    };
    sys.check_state(&s0)?;
    Ok((sys, s0))
}

/// Column names for `l` frequencies and the given weightings.
pub fn energy_columns(l: usize, mu_labels: &[&str]) -> Vec<String> {
    let mut cols = vec!["err_H".to_string(), "err_I".to_string()];
    cols.extend((1..=l).map(|j| format!("err_I{j}")));
    cols.extend(mu_labels.iter().map(|m| format!("err_Imu_{m}")));
    cols.push("err_Hstar".to_string());
    cols.extend(mu_labels.iter().map(|m| format!("err_Istar_{m}")));
    cols
}

/// Energy-error series of a long run; `failure` is set when the run
/// diverged, in which case the series holds the samples before it.
#[derive(Debug, Clone)]
pub struct LongrunOutcome {
    pub series: EnergySeries,
    pub failure: Option<ErknError>,
}

/// Integrates the configured run and samples every energy functional.
pub fn longrun_series(cfg: &ExperimentConfig) -> Result<LongrunOutcome> {
    cfg.validate()?;
    let scheme = ErknScheme::<f64>::builtin(&cfg.scheme_name)?;
    let (sys, s0) = system_from_config(cfg)?;
    let h = cfg.h;
    let sigmas = block_sigmas(&scheme, &sys, h)?;
    let l = sys.num_frequencies();

    let mut observers: Vec<Observer<'_, f64>> = vec![
        Observer::new("H", |s: &State<f64>| sys.total_energy(s)),
        Observer::new("I", |s: &State<f64>| sys.total_oscillatory_energy(s)),
    ];
    for j in 1..=l {
        let sys = &sys;
        observers.push(Observer::new(format!("I{j}"), move |s: &State<f64>| {
            sys.oscillatory_energy(s, j)
        }));
    }
    for (label, mu) in &cfg.mu_list {
        let sys = &sys;
        observers.push(Observer::new(label.clone(), move |s: &State<f64>| {
            sys.weighted_oscillatory_energy(s, mu)
        }));
    }
    {
        let (sys, sigmas) = (&sys, &sigmas);
        observers.push(Observer::new("Hstar", move |s: &State<f64>| {
            let mut acc = sys.total_energy(s)?;
            for (j, sg) in sigmas.iter().enumerate().skip(1) {
                acc += (sg - 1.0) * sys.oscillatory_energy(s, j)?;
            }
            Ok(acc)
        }));
    }
    for (label, mu) in &cfg.mu_list {
        let (sys, sigmas) = (&sys, &sigmas);
        observers.push(Observer::new(format!("{label}*"), move |s: &State<f64>| {
            sys.weighted_energy_with(s, mu, |j| sigmas[j])
        }));
    }

    let labels: Vec<&str> = cfg.mu_list.iter().map(|(l, _)| l.as_str()).collect();
    let columns = energy_columns(l, &labels);
    let n_steps = cfg.n_steps()?;
    let (sampled, failure) =
        match integrate(&scheme, &sys, h, &s0, n_steps, cfg.sample_every, &observers) {
            Ok(series) => (series, None),
            Err(e) => match e.partial {
                Some(partial) => (partial, Some(e.source)),
                None => return Err(e.source),
            },
        };
    Ok(LongrunOutcome {
        series: EnergySeries::from_values(columns, sampled.times, sampled.rows),
        failure,
    })
}

/// Runs [`longrun_series`] and writes the CSV to `cfg.output_path`, partial
/// on divergence. Divergence is reported through `failure`.
pub fn run_longrun(cfg: &ExperimentConfig) -> Result<LongrunOutcome> {
    let outcome = longrun_series(cfg)?;
    outcome.series.write_csv(&cfg.output_path)?;
    Ok(outcome)
}

/// Self-convergence study at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: String,
    pub h_list: Vec<f64>,
    pub h_reference: f64,
    /// Max-norm error over `(q, p)` at `t_end` for each `h`.
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log h`; `None` when exact.
    pub slope: Option<f64>,
    /// All errors at rounding level; no slope is fitted.
    pub exact: bool,
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "convergence of {} (reference h = {:e})",
            self.scheme, self.h_reference
        )?;
        for (h, e) in self.h_list.iter().zip(&self.errors) {
            writeln!(f, "  h = {h:<10} error = {e:e}")?;
        }
        match self.slope {
            Some(s) => write!(f, "  slope = {s:.4}"),
            None => write!(f, "  exact (errors at rounding level)"),
        }
    }
}

/// Least-squares slope through `(x_i, y_i)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn steps_for(t_end: f64, h: f64) -> Result<usize> {
    let ratio = t_end / h;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-6 * n {
        return Err(ErknError::InvalidArgument(format!(
            "h = {h} does not divide t_end = {t_end}"
        )));
    }
    Ok(n as usize)
}

/// Convergence study for an arbitrary scheme and system.
///
/// `h_list` must be sorted descending with at least three entries, each
/// dividing `t_end`. The reference uses the same scheme at `min(h) / 50`.
pub fn run_convergence_with(
    scheme: &ErknScheme<f64>,
    sys: &OscillatorySystem<f64>,
    s0: &State<f64>,
    h_list: &[f64],
    t_end: f64,
) -> Result<ConvergenceReport> {
    if h_list.len() < 3 {
        return Err(ErknError::InvalidArgument(
            "at least three step sizes are required".into(),
        ));
    }
    if h_list.windows(2).any(|w| !(w[0] > w[1])) || !(h_list[h_list.len() - 1] > 0.0) {
        return Err(ErknError::InvalidArgument(
            "step sizes must be positive and strictly descending".into(),
        ));
    }
    let h_ref = h_list[h_list.len() - 1] / 50.0;
    let reference = propagate(scheme, sys, h_ref, s0, steps_for(t_end, h_ref)?)?;
    let scale = reference
        .q
        .iter()
        .chain(&reference.p)
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let mut errors = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let sol = propagate(scheme, sys, h, s0, steps_for(t_end, h)?)?;
        let err = sol
            .q
            .iter()
            .chain(&sol.p)
            .zip(reference.q.iter().chain(&reference.p))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        errors.push(err);
    }
    let exact = errors.iter().all(|&e| e <= 1e-10 * scale);
    let slope = (!exact).then(|| {
        let lx: Vec<f64> = h_list.iter().map(|h| h.ln()).collect();
        let ly: Vec<f64> = errors
            .iter()
            .map(|e| e.max(f64::MIN_POSITIVE).ln())
            .collect();
        fit_slope(&lx, &ly)
    });
    Ok(ConvergenceReport {
        scheme: scheme.name().to_string(),
        h_list: h_list.to_vec(),
        h_reference: h_ref,
        errors,
        slope,
        exact,
    })
}

/// Convergence of a built-in scheme on the benchmark system at `omega`.
pub fn run_convergence(
    scheme_name: &str,
    h_list: &[f64],
    t_end: f64,
    omega: f64,
) -> Result<ConvergenceReport> {
    let scheme = ErknScheme::builtin(scheme_name)?;
    let (sys, s0) = build_paper_system(omega)?;
    run_convergence_with(&scheme, &sys, &s0, h_list, t_end)
}

/// Condition reports for one scheme, compared with the expected table.
#[derive(Debug, Clone)]
pub struct ChecksReport {
    pub scheme: String,
    /// `order2`, `symmetric`, `symplectic`, `newcond`, in that order.
    pub reports: Vec<ConditionReport<f64>>,
    /// Expected pass/fail of each report, for built-in schemes.
    pub expected: Option<[bool; 4]>,
}

impl ChecksReport {
    pub fn matches_expected(&self) -> bool {
        match self.expected {
            Some(exp) => self.reports.iter().zip(exp).all(|(r, e)| r.passed == e),
            None => true,
        }
    }
}

impl fmt::Display for ChecksReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.scheme)?;
        for (i, r) in self.reports.iter().enumerate() {
            let mark = match self.expected {
                Some(exp) if exp[i] == r.passed => "  [as expected]",
                Some(_) => "  [MISMATCH]",
                None => "",
            };
            writeln!(f, "  {r}{mark}")?;
        }
        Ok(())
    }
}

/// Runs the four condition checks on `scheme`.
pub fn checks_for(scheme: &ErknScheme<f64>, expected: Option<[bool; 4]>) -> ChecksReport {
    ChecksReport {
        scheme: scheme.name().to_string(),
        reports: vec![
            check_order2(scheme),
            check_symmetry(scheme),
            check_symplecticity(scheme),
            check_newcond(scheme),
        ],
        expected,
    }
}

/// Expected `(order2, symmetric, symplectic, newcond)` for a built-in scheme.
pub fn expected_checks(b: Builtin) -> [bool; 4] {
    let (sym, symp) = b.expected_structure();
    [true, sym, symp, b.expected_energy_condition()]
}

/// Condition checks for a built-in scheme by name.
pub fn run_checks(scheme_name: &str) -> Result<ChecksReport> {
    let b: Builtin = scheme_name.parse()?;
    Ok(checks_for(&b.scheme(), Some(expected_checks(b))))
}

/// Resonance module and non-resonance margin for one parameter set.
#[derive(Debug, Clone)]
pub struct ResonanceReport {
    pub lambda: Vec<f64>,
    pub scan: ResonanceScan<f64>,
    pub h: f64,
    pub epsilon: f64,
    pub margin: f64,
}

impl fmt::Display for ResonanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lambda = {:?}, N = {}, tol = {:e}",
            self.lambda, self.scan.order, self.scan.tol
        )?;
        if self.scan.module_vectors.is_empty() {
            writeln!(f, "resonance module (|k| <= N): empty")?;
        } else {
            writeln!(f, "resonance module (|k| <= N):")?;
            for k in &self.scan.module_vectors {
                writeln!(f, "  {k:?}")?;
            }
        }
        writeln!(f, "representatives: {}", self.scan.representatives.len())?;
        write!(
            f,
            "non-resonance margin at h = {}, eps = {}: min |sin(h/(2 eps) k.lambda)| / sqrt(h) = {}",
            self.h, self.epsilon, self.margin
        )
    }
}

/// Scans `lambda` to order `n` and evaluates the margin at `(h, epsilon)`.
/// `tol = None` uses `1e-9 * max lambda`.
pub fn run_resonance(
    lambda: &[f64],
    n: u32,
    tol: Option<f64>,
    h: f64,
    epsilon: f64,
) -> Result<ResonanceReport> {
    let tol = tol.unwrap_or_else(|| default_tolerance(lambda));
    let scan = resonance_scan(lambda, n, tol)?;
    let margin = nonresonance_margin(h, epsilon, lambda, &scan)?;
    Ok(ResonanceReport {
        lambda: lambda.to_vec(),
        scan,
        h,
        epsilon,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_for_benchmark() {
        let cols = energy_columns(3, &["I1+I3", "I2"]);
        assert_eq!(
            cols.join(","),
            "err_H,err_I,err_I1,err_I2,err_I3,err_Imu_I1+I3,err_Imu_I2,err_Hstar,err_Istar_I1+I3,err_Istar_I2"
        );
    }

    #[test]
    fn single_step_run() {
        let mut cfg = ExperimentConfig::desk("ERKN3", "unused.csv");
        cfg.t_end = 0.01;
        let out = longrun_series(&cfg).unwrap();
        assert!(out.failure.is_none());
        assert_eq!(out.series.len(), 2);
        assert!(out.series.rows[0].iter().all(|&v| v == 0.0));
        assert_eq!(out.series.times, vec![0.0, 0.01]);
        // one step from the benchmark data keeps H within 0.1
        assert!(out.series.column("err_H").unwrap()[1].abs() <= 0.1);
    }

    #[test]
    fn unknown_scheme_in_config() {
        let cfg = ExperimentConfig::desk("RK4", "unused.csv");
        assert!(matches!(
            longrun_series(&cfg),
            Err(ErknError::UnknownScheme(_))
        ));
    }

    #[test]
    fn config_initial_state_rules() {
        let mut cfg = ExperimentConfig::desk("ERKN3", "unused.csv");
        cfg.q0 = Some(vec![0.0; 5]);
        assert!(system_from_config(&cfg).is_err());
        cfg.p0 = Some(vec![0.0; 5]);
        assert!(system_from_config(&cfg).is_ok());
        cfg.dims = vec![1, 1, 1, 1];
        cfg.potential_coeffs = vec![1.0; 4];
        cfg.q0 = None;
        cfg.p0 = None;
        assert!(system_from_config(&cfg).is_err());
    }

    #[test]
    fn slope_fit() {
        let x = [0.0, 1.0, 2.0];
        assert!((fit_slope(&x, &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn convergence_argument_checks() {
        assert!(run_convergence("ERKN3", &[0.02, 0.01], 1.0, 10.0).is_err());
        assert!(run_convergence("ERKN3", &[0.01, 0.02, 0.005], 1.0, 10.0).is_err());
        assert!(run_convergence("ERKN3", &[0.3, 0.2, 0.1], 1.0, 10.0).is_err());
    }

    #[test]
    fn free_convergence_is_exact() {
        let sys =
            OscillatorySystem::free(0.1, blocks_from(&[1.0, 2.0], &[1, 1, 1]).unwrap()).unwrap();
        let s0 = State::new(vec![0.5, 0.01, -0.02], vec![1.0, 0.3, 0.2]).unwrap();
        let r = run_convergence_with(
            &Builtin::Erkn2.scheme(),
            &sys,
            &s0,
            &[0.02, 0.01, 0.005],
            1.0,
        )
        .unwrap();
        assert!(r.exact);
        assert_eq!(r.slope, None);
    }

    #[test]
    fn check_tables() {
        for b in Builtin::ALL {
            let r = run_checks(b.name()).unwrap();
            assert!(r.matches_expected(), "{r}");
        }
        assert_eq!(expected_checks(Builtin::Erkn3), [true; 4]);
        assert_eq!(expected_checks(Builtin::Erkn1), [true, false, false, false]);
        assert_eq!(expected_checks(Builtin::Erkn4), [true, true, false, false]);
        assert!(run_checks("ERKN9").is_err());
    }

    #[test]
    fn resonance_report_text() {
        let r = run_resonance(
            &[1.0, std::f64::consts::SQRT_2, 2.0],
            3,
            None,
            0.01,
            1.0 / 70.0,
        )
        .unwrap();
        let text = r.to_string();
        assert!(
            text.contains("[-2, 0, 1]") && text.contains("[2, 0, -1]"),
            "{text}"
        );
        let r1 = run_resonance(
            &[1.0, std::f64::consts::SQRT_2, 2.0],
            1,
            None,
            0.01,
            1.0 / 70.0,
        )
        .unwrap();
        assert!(r1.scan.module_vectors.is_empty());
    }
}
