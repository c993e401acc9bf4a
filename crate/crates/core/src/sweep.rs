//! Bandwidth-factor calibration and pulse width / power sweeps.
//!
//! Calibration and knee location use the closed-form error from the
//! noiseless blob separation and the modelled noise; Monte Carlo ensembles
//! at every row validate it.

use crate::chain::{measurement_noise_sigma, noiseless_readout, ChainConfig};
use crate::error::{invalid, Error, Result};
use crate::fidelity::{analytic_error, empirical_error};
use crate::montecarlo::{row_seed, run_ensemble};
use crate::scalar::Real;
use crate::signal::{Fourier, GridParams, PulseSpec};

/// Search interval for B during calibration.
pub const B_SEARCH_RANGE: (f64, f64) = (1e-12, 1e12);
pub const DEFAULT_TARGET_ERROR: f64 = 1e-3;
pub const DEFAULT_KNEE_THRESHOLD: f64 = 1e-2;
const CALIBRATION_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    /// Pulse width in s, or relative power in dB.
    pub parameter: T,
    pub d: T,
    pub sigma: T,
    pub snr: T,
    pub analytic_error: T,
    pub empirical_error: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationTarget<T> {
    /// Use this B as is.
    Fixed(T),
    /// Find B giving this analytic error at the calibration pulse.
    Error(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationPoint<T> {
    pub spec: PulseSpec<T>,
    pub target: CalibrationTarget<T>,
}

/// Noiseless blob separation and per-quadrature noise for one pulse.
pub fn separation_and_sigma<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &GridParams<T>,
    spec: &PulseSpec<T>,
) -> Result<(T, T)> {
    let g = grid.build(spec.width())?;
    let fourier = Fourier::new(g.n())?;
    let [ground, excited] = noiseless_readout(cfg, &g, spec, &fourier)?;
    Ok(((excited - ground).norm(), measurement_noise_sigma(cfg, spec)?))
}

pub fn analytic_error_at<T: Real>(cfg: &ChainConfig<T>, grid: &GridParams<T>, spec: &PulseSpec<T>) -> Result<T> {
    let (d, sigma) = separation_and_sigma(cfg, grid, spec)?;
    Ok(analytic_error(d, sigma))
}

/// Returns the bandwidth factor for `point`: the fixed value, or the B at
/// which the analytic error equals the target (bisection in log B).
pub fn calibrate_b<T: Real>(cfg: &ChainConfig<T>, grid: &GridParams<T>, point: &CalibrationPoint<T>) -> Result<T> {
    let target = match point.target {
        CalibrationTarget::Fixed(b) => {
            if !(b > T::zero()) || !b.is_finite() {
                return Err(invalid(format!("bandwidth factor {b} must be positive")));
            }
            return Ok(b);
        }
        CalibrationTarget::Error(p) => p,
    };
    if !(target > T::zero() && target < T::lit(0.5)) {
        return Err(invalid(format!("target error {target} must lie in (0, 0.5)")));
    }
    let g = grid.build(point.spec.width())?;
    let fourier = Fourier::new(g.n())?;
    let [ground, excited] = noiseless_readout(cfg, &g, &point.spec, &fourier)?;
    let d = (excited - ground).norm();
    let error_at = |b: T| -> Result<T> {
        let sigma = measurement_noise_sigma(&cfg.with_bandwidth_factor(b)?, &point.spec)?;
        Ok(analytic_error(d, sigma))
    };

    let (mut lo, mut hi) = (T::lit(B_SEARCH_RANGE.0), T::lit(B_SEARCH_RANGE.1));
    let (err_lo, err_hi) = (error_at(lo)?, error_at(hi)?);
    if !(err_lo < target && target < err_hi) {
        return Err(Error::CalibrationInfeasible {
            target: target.as_f64(),
            b_low: lo.as_f64(),
            error_low: err_lo.as_f64(),
            b_high: hi.as_f64(),
            error_high: err_hi.as_f64(),
        });
    }
    // error(B) is increasing; bisect until the bracket stops shrinking
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        if error_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = (lo * hi).sqrt();
    let achieved = error_at(b)?;
    if (achieved - target).abs() > T::lit(CALIBRATION_REL_TOL) * target {
        return Err(Error::CalibrationInfeasible {
            target: target.as_f64(),
            b_low: lo.as_f64(),
            error_low: error_at(lo)?.as_f64(),
            b_high: hi.as_f64(),
            error_high: error_at(hi)?.as_f64(),
        });
    }
    Ok(b)
}

/// Analytic and Monte Carlo figures for one pulse.
pub fn evaluate_point<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &GridParams<T>,
    spec: &PulseSpec<T>,
    parameter: T,
    n_trials: usize,
    seed: u64,
) -> Result<SweepRow<T>> {
    let (d, sigma) = separation_and_sigma(cfg, grid, spec)?;
    let ensemble = run_ensemble(cfg, &grid.build(spec.width())?, spec, n_trials, seed)?;
    Ok(SweepRow {
        parameter,
        d,
        sigma,
        snr: d / sigma,
        analytic_error: analytic_error(d, sigma),
        empirical_error: empirical_error(&ensemble)?,
    })
}

fn check_sorted<T: Real>(values: &[T], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(format!("no {what} to sweep")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{what} must be finite")));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// One row per width at fixed generator power; row `i` uses
/// `row_seed(seed, i)`.
pub fn sweep_pulse_width<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &GridParams<T>,
    base: &PulseSpec<T>,
    widths: &[T],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow<T>>> {
    check_sorted(widths, "pulse widths")?;
    widths
        .iter()
        .enumerate()
        .map(|(i, &w)| evaluate_point(cfg, grid, &base.with_width(w)?, w, n_trials, row_seed(seed, i as u64)))
        .collect()
}

/// One row per power offset (dB relative to `base`) at fixed width.
pub fn sweep_power<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &GridParams<T>,
    base: &PulseSpec<T>,
    rel_powers_db: &[T],
    n_trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow<T>>> {
    check_sorted(rel_powers_db, "relative powers")?;
    rel_powers_db
        .iter()
        .enumerate()
        .map(|(i, &rel)| {
            let spec = base.with_power_dbm(base.generator_power_dbm() + rel)?;
            evaluate_point(cfg, grid, &spec, rel, n_trials, row_seed(seed, i as u64))
        })
        .collect()
}

/// Parameter at which the analytic error crosses `threshold`, interpolated
/// linearly in parameter against log-error between the bracketing rows.
pub fn knee_detect<T: Real>(rows: &[SweepRow<T>], threshold: T) -> Result<T> {
    let not_bracketed = || {
        let (min, max) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            let e = r.analytic_error.as_f64();
            (lo.min(e), hi.max(e))
        });
        Error::KneeNotBracketed { threshold: threshold.as_f64(), min_error: min, max_error: max }
    };
    if !(threshold > T::zero()) {
        return Err(not_bracketed());
    }
    let floor = T::min_positive_value();
    let ln = |e: T| e.max(floor).ln();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ea, eb) = (a.analytic_error, b.analytic_error);
        if ea == threshold {
            return Ok(a.parameter);
        }
        if (ea - threshold) * (eb - threshold) <= T::zero() {
            if eb == threshold || ea == eb {
                return Ok(b.parameter);
            }
            let t = (threshold.ln() - ln(ea)) / (ln(eb) - ln(ea));
            return Ok(a.parameter + t * (b.parameter - a.parameter));
        }
    }
    match rows.last() {
        Some(r) if r.analytic_error == threshold => Ok(r.parameter),
        _ => Err(not_bracketed()),
    }
}
