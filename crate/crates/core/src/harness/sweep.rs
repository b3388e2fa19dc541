//! Convergence sweeps: evaluate the discrete evolution against its
//! continuous limit over a (t, h) grid and fit empirical orders.
//!
//! Cells are independent and evaluated in parallel; rows are assembled in a
//! deterministic order (t ascending, then the h_list order, which is
//! strictly decreasing).

use std::time::Instant;

use rayon::prelude::*;

use crate::continuous::{lindblad_generator, qsde_matrix_element, semigroup_apply};
use crate::discrete::{discrete_matrix_element, discretize_coherent, iterate_cp, reduced_cp_map, steps_for};
use crate::error::{Error, Result};
use crate::hamiltonian::QsdeCoefficients;
use crate::harness::config::Scenario;
use crate::harness::report::{
    ConvergenceReport, ReportMetadata, ReportRow, SimulationReport, SimulationRow,
};
use crate::numerics::matrix::operator_norm;

/// Least-squares slope of log(error) against log(h).
pub fn fit_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    for &(h, e) in points {
        if !(h > 0.0) || !(e > 0.0) || !h.is_finite() || !e.is_finite() {
            return Err(Error::NonPositiveValue(format!("({h}, {e})")));
        }
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, e) in points {
        let (x, y) = (h.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::NonPositiveValue("repeated step sizes".into()));
    }
    Ok((n * sxy - sx * sy) / denom)
}

fn metadata(s: &Scenario, kind: &str) -> ReportMetadata {
    let coefficient_norm = s.system.coefficients().ok().map(|c| {
        let e = c.dims().env_dim();
        let mut worst: f64 = 0.0;
        for j in 0..e {
            for i in 0..e {
                worst = worst.max(operator_norm(c.block(j, i)));
            }
        }
        worst
    });
    ReportMetadata {
        scenario: s.name.clone(),
        kind: kind.into(),
        n0: s.dims.n0,
        n_env: s.dims.n_env,
        coefficient_norm,
        seed: s.seed,
        wall_time: None,
    }
}

/// Group rows by t and attach the fitted order of each group.
fn attach_orders(cells: Vec<(f64, f64, f64, f64, f64)>) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = cells
        .into_iter()
        .map(|(t, h, discrete_norm, continuous_norm, abs_error)| ReportRow {
            t,
            h,
            discrete_norm,
            continuous_norm,
            abs_error,
            fitted_order: None,
        })
        .collect();
    let mut start = 0;
    while start < rows.len() {
        let mut end = start + 1;
        while end < rows.len() && rows[end].t == rows[start].t {
            end += 1;
        }
        let points: Vec<(f64, f64)> =
            rows[start..end].iter().map(|r| (r.h, r.abs_error)).collect();
        let order = fit_order(&points).ok();
        for row in &mut rows[start..end] {
            row.fitted_order = order;
        }
        start = end;
    }
    rows
}

fn sorted_times(s: &Scenario) -> Vec<f64> {
    let mut t_grid = s.t_grid.clone();
    t_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t_grid
}

/// Compare the discrete coherent bracket operator at n = floor(t/h) steps
/// with the limit bracket, for every grid cell.
pub fn run_matrix_element_convergence(s: &Scenario) -> Result<ConvergenceReport> {
    let start = Instant::now();
    let coeffs = s.system.coefficients()?;
    let t_grid = sorted_times(s);
    // the continuous side does not depend on h: one solve per t
    let targets: Vec<_> = t_grid
        .iter()
        .map(|&t| qsde_matrix_element(&coeffs, &s.phi, &s.psi, t, s.ode_step))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..t_grid.len())
        .flat_map(|ti| (0..s.h_list.len()).map(move |hi| (ti, hi)))
        .collect();
    let computed: Vec<(f64, f64, f64, f64, f64)> = cells
        .par_iter()
        .map(|&(ti, hi)| -> Result<_> {
            let (t, h) = (t_grid[ti], s.h_list[hi]);
            let l = s.system.step(h)?;
            let n = steps_for(t, h);
            let dphi = discretize_coherent(&s.phi, h, n)?;
            let dpsi = discretize_coherent(&s.psi, h, n)?;
            let me = discrete_matrix_element(&l, &dphi, &dpsi, n)?;
            let err = operator_norm(&(&me.bracket - &targets[ti]));
            Ok((t, h, operator_norm(&me.bracket), operator_norm(&targets[ti]), err))
        })
        .collect::<Result<_>>()?;
    let mut report = ConvergenceReport {
        metadata: metadata(s, "matrix-element"),
        rows: attach_orders(computed),
    };
    report.metadata.wall_time = Some(start.elapsed());
    Ok(report)
}

/// Compare iterates of the reduced step map with the limit semigroup
/// e^{t L} in superoperator spectral norm, for every grid cell.
pub fn run_semigroup_convergence(s: &Scenario) -> Result<ConvergenceReport> {
    let start = Instant::now();
    let coeffs = s.system.coefficients()?;
    let generator = lindblad_generator(&coeffs);
    let t_grid = sorted_times(s);
    let targets: Vec<_> = t_grid
        .iter()
        .map(|&t| semigroup_apply(&generator, t))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..t_grid.len())
        .flat_map(|ti| (0..s.h_list.len()).map(move |hi| (ti, hi)))
        .collect();
    let computed: Vec<(f64, f64, f64, f64, f64)> = cells
        .par_iter()
        .map(|&(ti, hi)| -> Result<_> {
            let (t, h) = (t_grid[ti], s.h_list[hi]);
            let l = s.system.step(h)?;
            let iterated = iterate_cp(&reduced_cp_map(&l), steps_for(t, h));
            let err = iterated.sub(&targets[ti]).spectral_norm();
            Ok((t, h, iterated.spectral_norm(), targets[ti].spectral_norm(), err))
        })
        .collect::<Result<_>>()?;
    let mut report = ConvergenceReport {
        metadata: metadata(s, "semigroup"),
        rows: attach_orders(computed),
    };
    report.metadata.wall_time = Some(start.elapsed());
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimulationMode {
    /// Iterated reduced step map at every h in h_list.
    Discrete,
    /// Limit Lindblad semigroup (no h).
    Qsde,
}

/// Evolve each observable in the Heisenberg picture and summarize it.
pub fn run_simulation(s: &Scenario, mode: SimulationMode) -> Result<SimulationReport> {
    let start = Instant::now();
    let t_grid = sorted_times(s);
    let mut rows = Vec::new();
    match mode {
        SimulationMode::Discrete => {
            for &t in &t_grid {
                for &h in &s.h_list {
                    let l = s.system.step(h)?;
                    let map = iterate_cp(&reduced_cp_map(&l), steps_for(t, h));
                    for (k, x) in s.observables.iter().enumerate() {
                        let xt = map.apply(x);
                        let tr = xt.trace();
                        rows.push(SimulationRow {
                            t,
                            h: Some(h),
                            observable: k,
                            norm: operator_norm(&xt),
                            trace_re: tr.re,
                            trace_im: tr.im,
                        });
                    }
                }
            }
        }
        SimulationMode::Qsde => {
            let coeffs = s.system.coefficients()?;
            let generator = lindblad_generator(&coeffs);
            for &t in &t_grid {
                let map = semigroup_apply(&generator, t)?;
                for (k, x) in s.observables.iter().enumerate() {
                    let xt = map.apply(x);
                    let tr = xt.trace();
                    rows.push(SimulationRow {
                        t,
                        h: None,
                        observable: k,
                        norm: operator_norm(&xt),
                        trace_re: tr.re,
                        trace_im: tr.im,
                    });
                }
            }
        }
    }
    let kind = match mode {
        SimulationMode::Discrete => "simulate-discrete",
        SimulationMode::Qsde => "simulate-qsde",
    };
    let mut report = SimulationReport { metadata: metadata(s, kind), rows };
    report.metadata.wall_time = Some(start.elapsed());
    Ok(report)
}

/// Table of the limit coefficients, rendered for the CLI.
pub fn coefficients_for(s: &Scenario) -> Result<QsdeCoefficients> {
    s.system.coefficients()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::builtin_scenario;
    use crate::harness::report::{emit_report, ReportFormat};
    use crate::numerics::expm::expm;
    use crate::numerics::matrix::ComplexMatrix;
    use num_complex::Complex64;

    #[test]
    fn fit_order_recovers_exact_power_laws() {
        let hs = [1e-1, 1e-2, 1e-3, 1e-4];
        let quad: Vec<(f64, f64)> = hs.iter().map(|&h| (h, h * h)).collect();
        assert!((fit_order(&quad).unwrap() - 2.0).abs() < 1e-9);
        let half: Vec<(f64, f64)> = hs.iter().map(|&h| (h, 3.0 * h.sqrt())).collect();
        assert!((fit_order(&half).unwrap() - 0.5).abs() < 1e-9);
        let flat: Vec<(f64, f64)> = hs.iter().map(|&h| (h, 0.7)).collect();
        assert!(fit_order(&flat).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fit_order_rejects_degenerate_input() {
        assert!(matches!(
            fit_order(&[(0.1, 0.01), (0.01, 0.001)]),
            Err(Error::InsufficientPoints(2))
        ));
        assert!(matches!(
            fit_order(&[(0.1, 0.0), (0.01, 0.1), (0.001, 0.1)]),
            Err(Error::NonPositiveValue(_))
        ));
        assert!(matches!(
            fit_order(&[(0.1, 0.1), (0.1, 0.1), (0.1, 0.1)]),
            Err(Error::NonPositiveValue(_))
        ));
    }

    #[test]
    fn two_level_vacuum_error_matches_closed_forms() {
        // vacuum two-level cell: the report's error must equal
        // ||diag(1, cos(sqrt h))^n - e^{L00}|| computed by hand
        let mut s = builtin_scenario("two-level").unwrap();
        s.phi = crate::discrete::CoherentFunction::zero(1);
        s.psi = crate::discrete::CoherentFunction::zero(1);
        s.h_list = vec![1e-2, 2e-3, 1e-3];
        s.ode_step = 2.5e-4;
        let report = run_matrix_element_convergence(&s).unwrap();
        for row in &report.rows {
            let n = steps_for(row.t, row.h);
            let cosn = row.h.sqrt().cos().powi(n as i32);
            let l00 = ComplexMatrix::diagonal(&[
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.5 * row.t, 0.0),
            ]);
            let expect = operator_norm(
                &(&ComplexMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(cosn, 0.0)])
                    - &expm(&l00).unwrap()),
            );
            assert!((row.abs_error - expect).abs() < 1e-9, "h = {}", row.h);
        }
        let order = report.rows[0].fitted_order.unwrap();
        assert!(order > 0.8, "vacuum decay converges at first order, got {order}");
    }

    #[test]
    fn zero_hamiltonian_scenario_has_vanishing_errors() {
        let text = r#"{
            "name": "trivial", "dims": {"n0": 2, "n_env": 1},
            "params": {
                "h0": [[[0,0],[0,0]],[[0,0],[0,0]]],
                "hs": [[[0,0],[0,0]],[[0,0],[0,0]]],
                "v": [[[[0,0],[0,0]],[[0,0],[0,0]]]],
                "d": [[[0,0],[0,0]],[[0,0],[0,0]]]
            },
            "t_grid": [0.0, 1.0], "h_list": [1e-1, 1e-2]
        }"#;
        let s = crate::harness::config::parse_scenario(text).unwrap();
        let report = run_matrix_element_convergence(&s).unwrap();
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            assert!(row.abs_error <= 1e-10, "t = {}, h = {}", row.t, row.h);
            assert!(row.fitted_order.is_none());
        }
        let sg = run_semigroup_convergence(&s).unwrap();
        for row in &sg.rows {
            assert!(row.abs_error <= 1e-10);
        }
    }

    #[test]
    fn semigroup_time_zero_row_is_exact() {
        let mut s = builtin_scenario("von-neumann").unwrap();
        s.t_grid = vec![0.0, 1.0];
        s.h_list = vec![1e-1, 1e-2, 1e-3];
        let report = run_semigroup_convergence(&s).unwrap();
        for row in report.rows.iter().filter(|r| r.t == 0.0) {
            assert!(row.abs_error <= 1e-12);
        }
        // errors decrease at t = 1
        let at_one: Vec<_> = report.rows.iter().filter(|r| r.t == 1.0).collect();
        assert!(at_one.windows(2).all(|w| w[1].abs_error < w[0].abs_error));
    }

    #[test]
    fn reports_are_deterministic() {
        let mut s = builtin_scenario("two-level").unwrap();
        s.h_list = vec![1e-1, 1e-2, 1e-3];
        s.ode_step = 2.5e-4;
        let a = emit_report(&run_matrix_element_convergence(&s).unwrap(), ReportFormat::Json);
        let b = emit_report(&run_matrix_element_convergence(&s).unwrap(), ReportFormat::Json);
        assert_eq!(a, b);
    }

    #[test]
    fn rows_are_sorted_by_t_then_follow_h_list() {
        let mut s = builtin_scenario("von-neumann").unwrap();
        s.t_grid = vec![1.0, 0.0];
        s.h_list = vec![1e-1, 1e-2];
        let report = run_semigroup_convergence(&s).unwrap();
        let keys: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.t, r.h)).collect();
        assert_eq!(keys, vec![(0.0, 1e-1), (0.0, 1e-2), (1.0, 1e-1), (1.0, 1e-2)]);
    }

    #[test]
    fn simulation_reports_population_decay() {
        let mut s = builtin_scenario("two-level").unwrap();
        s.h_list = vec![1e-3];
        let sim = run_simulation(&s, SimulationMode::Qsde).unwrap();
        assert_eq!(sim.rows.len(), 1);
        // observable diag(0,1) evolves to diag(0, e^{-t}); trace e^{-1}
        assert!((sim.rows[0].trace_re - (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(sim.rows[0].h, None);
        let disc = run_simulation(&s, SimulationMode::Discrete).unwrap();
        assert_eq!(disc.rows.len(), 1);
        let n = steps_for(1.0, 1e-3);
        let expect = crate::scenarios::two_level_population(n, 1e-3f64.sqrt());
        assert!((disc.rows[0].trace_re - expect).abs() < 1e-12);
    }
}
