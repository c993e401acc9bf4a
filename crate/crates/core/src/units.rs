//! Physical constants and the handful of unit conversions the pipeline needs.
//!
//! Everything internal is SI (Hz, s, W, V, K, Ω); dBm and dB appear only at
//! the edges.

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Exact SI values of Planck's and Boltzmann's constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants<T> {
    planck_h: T,
    boltzmann_k: T,
}

pub const PLANCK_H: f64 = 6.626_070_15e-34;
pub const BOLTZMANN_K: f64 = 1.380_649e-23;

impl<T: Real> Constants<T> {
    pub fn si() -> Self {
        Self { planck_h: T::lit(PLANCK_H), boltzmann_k: T::lit(BOLTZMANN_K) }
    }

    /// J·s
    pub fn planck_h(&self) -> T {
        self.planck_h
    }

    /// J/K
    pub fn boltzmann_k(&self) -> T {
        self.boltzmann_k
    }
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self::si()
    }
}

pub fn dbm_to_watts<T: Real>(p_dbm: T) -> Result<T> {
    if !p_dbm.is_finite() {
        return Err(invalid(format!("power {p_dbm} dBm is not finite")));
    }
    Ok(T::lit(1e-3) * T::lit(10.0).powf(p_dbm / T::lit(10.0)))
}

pub fn watts_to_dbm<T: Real>(p_watts: T) -> Result<T> {
    if !(p_watts > T::zero()) || !p_watts.is_finite() {
        return Err(invalid(format!("power {p_watts} W must be positive and finite")));
    }
    Ok(T::lit(10.0) * (p_watts / T::lit(1e-3)).log10())
}

/// Linear power ratio of a gain in dB.
pub fn db_to_power_ratio<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Linear voltage ratio of a gain in dB.
pub fn db_to_voltage_ratio<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(20.0))
}

/// RMS voltage across `r_ohm` carrying `p_watts`.
pub fn power_to_vrms<T: Real>(p_watts: T, r_ohm: T) -> Result<T> {
    if !(p_watts >= T::zero()) {
        return Err(invalid(format!("power {p_watts} W is negative")));
    }
    if !(r_ohm > T::zero()) {
        return Err(invalid(format!("resistance {r_ohm} Ω must be positive")));
    }
    Ok((p_watts * r_ohm).sqrt())
}

/// Number of photons of frequency `f_hz` carried by power `p_watts` over `t_s`.
pub fn photon_count<T: Real>(p_watts: T, f_hz: T, t_s: T, c: &Constants<T>) -> Result<T> {
    if !(p_watts >= T::zero()) {
        return Err(invalid(format!("power {p_watts} W is negative")));
    }
    if !(f_hz > T::zero()) {
        return Err(invalid(format!("frequency {f_hz} Hz must be positive")));
    }
    if !(t_s > T::zero()) {
        return Err(invalid(format!("duration {t_s} s must be positive")));
    }
    Ok(p_watts * t_s / (c.planck_h() * f_hz))
}
