//! Symmetric shooting for planar periodic orbits.
//!
//! Orbits symmetric under `(X, Y, X', Y')(f) -> (X, -Y, -X', Y')(-f)` start
//! on the section `Y = X' = 0` at `f = 0` and cross it again perpendicularly
//! at half period. Two error functions measure the defect:
//!
//! - `F = |S(-T/2) - S(T/2)|`, from a backward and a forward integration;
//! - `G = |X'|` at the `Y = 0` crossing near `T/2`.
//!
//! For an `m:n` resonance the period is pinned to `T = 2πn`. The initial
//! `(X0, Y0')` is first corrected by a damped two-dimensional Newton
//! iteration on `(Y, X')(T/2)`, which cannot increase `F`; if the crossing
//! defect `G` is still above tolerance, a scalar search on `X0` along the
//! converged energy level follows. At zero eccentricity without a resonance
//! the period is free and only the scalar search runs, on the energy level
//! of the initial guess.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::dynamics::{
    integrate, omega_potential, propagate, CrossingKind, ExtendedState, PlaneEvent, PulsatingState, Sampling,
};
use crate::error::{Error, Result};
use crate::fmath::sqrt;
use crate::geometry::SystemParams;
use crate::integrator::IntegratorOptions;
use crate::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinementConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub event_tol: f64,
    /// Largest admissible distance of `X0` from the initial guess.
    pub bracket_width: f64,
    /// Half-width of the crossing search window, as a fraction of `T/2`.
    pub window_fraction: f64,
    /// `(m, n)`: `m` revolutions in `n` synodic periods, `T = 2πn`.
    pub resonance: Option<(u32, u32)>,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-10,
            max_iters: 40,
            rel_tol: 1e-13,
            abs_tol: 1e-13,
            event_tol: 1e-13,
            bracket_width: 0.02,
            window_fraction: 0.25,
            resonance: None,
        }
    }
}

impl RefinementConfig {
    pub fn resonant(m: u32, n: u32) -> Self {
        Self { resonance: Some((m, n)), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidOption("epsilon must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.event_tol > 0.0) {
            return Err(Error::InvalidOption("tolerances must be positive"));
        }
        if self.rel_tol * 100.0 > self.epsilon {
            return Err(Error::InvalidOption("integrator tolerance must be 100x tighter than epsilon"));
        }
        if !(self.bracket_width > 0.0) || !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(Error::InvalidOption("bracket width and window fraction must be positive"));
        }
        if let Some((m, n)) = self.resonance {
            if m == 0 || n == 0 {
                return Err(Error::InvalidOption("resonance m:n needs positive integers"));
            }
        }
        Ok(())
    }

    pub fn integrator_options(&self) -> IntegratorOptions {
        IntegratorOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            event_tol: self.event_tol,
            ..IntegratorOptions::default()
        }
    }

    /// Pinned period `2πn`, if a resonance is set.
    pub fn period(&self) -> Option<f64> {
        self.resonance.map(|(_, n)| TAU * n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub x0: f64,
    pub y0p: f64,
    pub f_error: f64,
    pub g_error: f64,
    pub t_half: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RefinementReport {
    pub converged: bool,
    pub failure: Option<String>,
    pub aic_x0: f64,
    pub aic_y0p: f64,
    pub x0: f64,
    pub y0p: f64,
    pub t_half: f64,
    pub period: f64,
    pub iterations: usize,
    pub f_error: f64,
    pub g_error: f64,
    /// Jacobi-form value `2Ω - |v|²` of the initial guess at epoch.
    pub jacobi_aic: f64,
    /// Same quantity for the refined state.
    pub jacobi_refined: f64,
    pub history: Vec<IterationRecord>,
    pub hamiltonian_drift: f64,
    pub closure: f64,
}

impl RefinementReport {
    pub fn state(&self) -> PulsatingState {
        symmetric_state(self.x0, self.y0p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicityReport {
    pub closure: f64,
    pub hamiltonian_drift: f64,
}

/// `(X0, 0, 0, 0, Y0', 0)` at `f = 0`.
pub fn symmetric_state(x0: f64, y0p: f64) -> PulsatingState {
    PulsatingState::new([x0, 0.0, 0.0], [0.0, y0p, 0.0], 0.0)
}

/// Epoch Jacobi-form value of a symmetric planar state.
pub fn epoch_jacobi(x0: f64, y0p: f64, params: &SystemParams) -> Result<f64> {
    Ok(2.0 * omega_potential(x0, 0.0, 0.0, 0.0, params)? - y0p * y0p)
}

/// `Y0'` on the level `2Ω - |v|² = c_target` at `f = 0`, with the sign of
/// `direction`.
pub fn jacobi_epoch_link(x0: f64, c_target: f64, direction: f64, params: &SystemParams) -> Result<f64> {
    let radicand = 2.0 * omega_potential(x0, 0.0, 0.0, 0.0, params)? - c_target;
    if !(radicand >= 0.0) {
        return Err(Error::NegativeRadicand { x0, radicand });
    }
    let v = sqrt(radicand);
    Ok(if direction < 0.0 { -v } else { v })
}

/// `|S(-T/2) - S(T/2)|` for the symmetric state `(x0, y0p)`.
pub fn half_period_error(
    x0: f64,
    y0p: f64,
    period: f64,
    params: &SystemParams,
    options: &IntegratorOptions,
) -> Result<f64> {
    let start = ExtendedState::new(symmetric_state(x0, y0p), 0.0);
    let fwd = propagate(&start, 0.5 * period, params, options)?.state.to_array();
    let bwd = propagate(&start, -0.5 * period, params, options)?.state.to_array();
    Ok(fwd.iter().zip(bwd.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// `F` with `Y0'` slaved to `x0` through the epoch Jacobi link.
pub fn half_period_error_f(
    x0: f64,
    c_target: f64,
    direction: f64,
    period: f64,
    config: &RefinementConfig,
    params: &SystemParams,
) -> Result<f64> {
    let y0p = jacobi_epoch_link(x0, c_target, direction, params)?;
    half_period_error(x0, y0p, period, params, &config.integrator_options())
}

/// Expected orientation of the half-period crossing for a start moving with
/// `Y' = direction`.
fn crossing_kind(direction: f64, same_as_start: bool) -> CrossingKind {
    let falling_at_start = direction < 0.0;
    if falling_at_start == same_as_start {
        CrossingKind::Falling
    } else {
        CrossingKind::Rising
    }
}

/// Signed `X'` at the `Y = 0` crossing inside `window`, and its anomaly.
pub fn crossing_defect(
    x0: f64,
    y0p: f64,
    kind: CrossingKind,
    window: (f64, f64),
    params: &SystemParams,
    options: &IntegratorOptions,
) -> Result<(f64, f64)> {
    let start = ExtendedState::new(symmetric_state(x0, y0p), 0.0);
    let event = PlaneEvent::y_crossing(0, kind).within(window.0, window.1).terminal();
    let traj = integrate(&start, window.1, params, options, &Sampling::EndOnly, &[event])?;
    match traj.first_event(0) {
        Some(hit) => Ok((hit.state.state.xp, hit.f)),
        None => Err(Error::EventNotFound { what: "Y = 0 crossing", from: window.0, to: window.1 }),
    }
}

/// `(G, T_half)` with `Y0'` slaved through the epoch Jacobi link, for the
/// configured resonance.
pub fn crossing_error_g(
    x0: f64,
    c_target: f64,
    direction: f64,
    config: &RefinementConfig,
    params: &SystemParams,
) -> Result<(f64, f64)> {
    let (m, n) = config.resonance.ok_or(Error::InvalidOption("crossing window needs a resonance"))?;
    let half = 0.5 * TAU * n as f64;
    let window = (half * (1.0 - config.window_fraction), half * (1.0 + config.window_fraction));
    let y0p = jacobi_epoch_link(x0, c_target, direction, params)?;
    let kind = crossing_kind(direction, m % 2 == 0);
    let (g, t) = crossing_defect(x0, y0p, kind, window, params, &config.integrator_options())?;
    Ok((g.abs(), t))
}

/// Full-period closure `|S(T) - S(0)|` and extended-Hamiltonian drift.
pub fn verify_periodicity(
    state0: &PulsatingState,
    period: f64,
    params: &SystemParams,
    options: &IntegratorOptions,
) -> Result<PeriodicityReport> {
    let start = ExtendedState::with_null_action(*state0, params)?;
    let traj = integrate(&start, state0.f + period, params, options, &Sampling::Steps, &[])?;
    let a = state0.to_array();
    let b = traj.last.state.to_array();
    let closure = a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    Ok(PeriodicityReport { closure, hamiltonian_drift: traj.extended_hamiltonian_drift(params)? })
}

struct Shooter<'a> {
    params: &'a SystemParams,
    options: IntegratorOptions,
}

impl Shooter<'_> {
    /// `(Y, X')` at anomaly `t` from the symmetric start.
    fn residual(&self, x0: f64, y0p: f64, t: f64) -> Result<[f64; 2]> {
        let start = ExtendedState::new(symmetric_state(x0, y0p), 0.0);
        let end = propagate(&start, t, self.params, &self.options)?.state;
        Ok([end.y, end.xp])
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    sqrt(v[0] * v[0] + v[1] * v[1])
}

/// Refines a planar symmetric initial guess into a periodic orbit.
/// Non-convergence is reported in the returned record.
pub fn refine_report(aic: &PulsatingState, config: &RefinementConfig, params: &SystemParams) -> Result<RefinementReport> {
    config.validate()?;
    let (x_aic, y_aic) = (aic.x, aic.yp);
    if y_aic == 0.0 {
        return Err(Error::OutOfDomain("initial guess needs a nonzero Y0'"));
    }
    let direction = y_aic.signum();
    let jacobi_aic = epoch_jacobi(x_aic, y_aic, params)?;
    let mut report = RefinementReport {
        converged: false,
        failure: None,
        aic_x0: x_aic,
        aic_y0p: y_aic,
        x0: x_aic,
        y0p: y_aic,
        t_half: f64::NAN,
        period: f64::NAN,
        iterations: 0,
        f_error: f64::NAN,
        g_error: f64::NAN,
        jacobi_aic,
        jacobi_refined: jacobi_aic,
        history: Vec::new(),
        hamiltonian_drift: f64::NAN,
        closure: f64::NAN,
    };
    let outcome = match config.resonance {
        Some(_) => refine_resonant(&mut report, config, params, direction),
        None if params.e == 0.0 => refine_free(&mut report, config, params, direction),
        None => Err(Error::InvalidOption("a resonance is required when e > 0")),
    };
    match outcome {
        Ok(()) => {}
        Err(err @ (Error::NoConvergence { .. } | Error::NoSignChange { .. } | Error::EventNotFound { .. })) => {
            report.failure = Some(alloc::format!("{err}"));
            return Ok(report);
        }
        Err(err) => return Err(err),
    }
    let options = config.integrator_options();
    let check = verify_periodicity(&report.state(), report.period, params, &options)?;
    report.closure = check.closure;
    report.hamiltonian_drift = check.hamiltonian_drift;
    report.jacobi_refined = epoch_jacobi(report.x0, report.y0p, params)?;
    report.converged = report.f_error <= config.epsilon && report.g_error <= config.epsilon;
    if !report.converged {
        report.failure = Some(alloc::format!(
            "F = {:e}, G = {:e} above epsilon {:e}",
            report.f_error,
            report.g_error,
            config.epsilon
        ));
    }
    Ok(report)
}

/// As [`refine_report`], with non-convergence turned into an error.
pub fn refine(aic: &PulsatingState, config: &RefinementConfig, params: &SystemParams) -> Result<RefinementReport> {
    let report = refine_report(aic, config, params)?;
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence { what: "periodic-orbit refinement", iterations: report.iterations })
    }
}

fn refine_resonant(
    report: &mut RefinementReport,
    config: &RefinementConfig,
    params: &SystemParams,
    direction: f64,
) -> Result<()> {
    let (m, _) = config.resonance.expect("resonant mode");
    let period = config.period().expect("resonant mode");
    let half = 0.5 * period;
    let shooter = Shooter { params, options: config.integrator_options() };
    let mut z = [report.aic_x0, report.aic_y0p];
    let mut r = shooter.residual(z[0], z[1], half)?;
    let mut f_err = 2.0 * norm2(r);
    report.history.push(IterationRecord {
        iteration: 0,
        x0: z[0],
        y0p: z[1],
        f_error: f_err,
        g_error: r[1].abs(),
        t_half: half,
    });

    let target = 1e-2 * config.epsilon;
    let mut iteration = 0;
    while f_err > target {
        if iteration >= config.max_iters {
            report.iterations = iteration;
            return Err(Error::NoConvergence { what: "periodic-orbit refinement", iterations: iteration });
        }
        iteration += 1;
        let h = 1e-7;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let rp = shooter.residual(zp[0], zp[1], half)?;
            let rm = shooter.residual(zm[0], zm[1], half)?;
            jac[0][j] = (rp[0] - rm[0]) / (2.0 * h);
            jac[1][j] = (rp[1] - rm[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence { what: "singular shooting Jacobian", iterations: iteration });
        }
        let dz = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-4 {
            let trial = [z[0] + lambda * dz[0], z[1] + lambda * dz[1]];
            if (trial[0] - report.aic_x0).abs() > config.bracket_width {
                lambda *= 0.5;
                continue;
            }
            if let Ok(rt) = shooter.residual(trial[0], trial[1], half) {
                let ft = 2.0 * norm2(rt);
                if ft < f_err {
                    accepted = Some((trial, rt, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, rt, ft)) = accepted else {
            // No descent left: either converged to the noise floor or stuck.
            if f_err <= config.epsilon {
                break;
            }
            report.iterations = iteration;
            return Err(Error::NoConvergence { what: "periodic-orbit refinement", iterations: iteration });
        };
        z = trial;
        r = rt;
        f_err = ft;
        report.history.push(IterationRecord {
            iteration,
            x0: z[0],
            y0p: z[1],
            f_error: f_err,
            g_error: r[1].abs(),
            t_half: half,
        });
    }
    report.iterations = iteration;

    let c_level = epoch_jacobi(z[0], z[1], params)?;
    let window = (half * (1.0 - config.window_fraction), half * (1.0 + config.window_fraction));
    let kind = crossing_kind(direction, m % 2 == 0);
    let options = config.integrator_options();
    let (mut g, mut t_half) = crossing_defect(z[0], z[1], kind, window, params, &options)?;
    if g.abs() > config.epsilon {
        let signed = |x: f64| -> Result<f64> {
            let y = jacobi_epoch_link(x, c_level, direction, params)?;
            Ok(crossing_defect(x, y, kind, window, params, &options)?.0)
        };
        let x = scalar_search(signed, z[0], report.aic_x0, config, 1e-6)?;
        z = [x, jacobi_epoch_link(x, c_level, direction, params)?];
        (g, t_half) = crossing_defect(z[0], z[1], kind, window, params, &options)?;
        f_err = half_period_error(z[0], z[1], period, params, &options)?;
        report.iterations += 1;
        report.history.push(IterationRecord {
            iteration: report.iterations,
            x0: z[0],
            y0p: z[1],
            f_error: f_err,
            g_error: g.abs(),
            t_half,
        });
    } else {
        f_err = half_period_error(z[0], z[1], period, params, &options)?;
    }
    report.x0 = z[0];
    report.y0p = z[1];
    report.t_half = t_half;
    report.period = period;
    report.f_error = f_err;
    report.g_error = g.abs();
    Ok(())
}

fn refine_free(
    report: &mut RefinementReport,
    config: &RefinementConfig,
    params: &SystemParams,
    direction: f64,
) -> Result<()> {
    let options = config.integrator_options();
    let c_level = report.jacobi_aic;
    let kind = crossing_kind(direction, false);
    // First opposite crossing; the lower bound skips the start point.
    let window = (1e-3, 4.0 * TAU);
    let defect = |x: f64| -> Result<(f64, f64)> {
        let y = jacobi_epoch_link(x, c_level, direction, params)?;
        crossing_defect(x, y, kind, window, params, &options)
    };
    let (g0, t0) = defect(report.aic_x0)?;
    report.history.push(IterationRecord {
        iteration: 0,
        x0: report.aic_x0,
        y0p: report.aic_y0p,
        f_error: half_period_error(report.aic_x0, report.aic_y0p, 2.0 * t0, params, &options)?,
        g_error: g0.abs(),
        t_half: t0,
    });
    let x = if g0.abs() <= 1e-2 * config.epsilon {
        report.aic_x0
    } else {
        scalar_search(|x| Ok(defect(x)?.0), report.aic_x0, report.aic_x0, config, 1e-4)?
    };
    let y0p = jacobi_epoch_link(x, c_level, direction, params)?;
    let (g, t_half) = defect(x)?;
    let period = 2.0 * t_half;
    let f_err = half_period_error(x, y0p, period, params, &options)?;
    report.iterations += 1;
    report.history.push(IterationRecord { iteration: report.iterations, x0: x, y0p, f_error: f_err, g_error: g.abs(), t_half });
    report.x0 = x;
    report.y0p = y0p;
    report.t_half = t_half;
    report.period = period;
    report.f_error = f_err;
    report.g_error = g.abs();
    Ok(())
}

/// Brackets a sign change of `g` around `x_start` by expanding steps (never
/// leaving `center ± bracket_width`), then solves with Brent's method.
fn scalar_search<G>(mut g: G, x_start: f64, center: f64, config: &RefinementConfig, first_step: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    let lo_limit = center - config.bracket_width;
    let hi_limit = center + config.bracket_width;
    let g_start = g(x_start)?;
    if g_start == 0.0 {
        return Ok(x_start);
    }
    let mut step = first_step.min(config.bracket_width);
    let mut bracket = None;
    while bracket.is_none() {
        let mut progressed = false;
        for cand in [x_start - step, x_start + step] {
            if cand < lo_limit || cand > hi_limit {
                continue;
            }
            progressed = true;
            let Ok(gc) = g(cand) else { continue };
            if gc.signum() != g_start.signum() {
                bracket = Some(if cand < x_start { (cand, x_start) } else { (x_start, cand) });
                break;
            }
        }
        if !progressed {
            return Err(Error::NoSignChange { what: "half-period crossing defect", lo: lo_limit, hi: hi_limit });
        }
        step *= 2.0;
    }
    let (lo, hi) = bracket.expect("bracket found");
    brent(g, lo, hi, 4.0 * f64::EPSILON * x_start.abs(), 1e-2 * config.epsilon, config.max_iters.max(100), "half-period crossing defect")
}
