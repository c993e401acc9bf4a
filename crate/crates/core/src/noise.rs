//! Noise temperatures, spectral densities and white-noise synthesis.
//!
//! Every source is referred to the resonator output plane by dividing its
//! PSD by the power gain that precedes its injection point. Quantum-limited
//! sources use `k·T·R`, thermal amplifiers `4·k·T·R`.

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::signal::{Fourier, SimGrid, Spectrum};
use crate::units::Constants;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    QuantumLimited,
    Thermal,
}

impl NoiseKind {
    pub fn psd_factor(self) -> u32 {
        match self {
            Self::QuantumLimited => 1,
            Self::Thermal => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource<T> {
    kind: NoiseKind,
    temperature: T,
    preceding_gain: T,
}

impl<T: Real> NoiseSource<T> {
    /// `temperature` in K (zero switches the source off); `preceding_gain` is
    /// the linear power gain between the resonator output and this source.
    pub fn new(kind: NoiseKind, temperature: T, preceding_gain: T) -> Result<Self> {
        if !(temperature >= T::zero()) || !temperature.is_finite() {
            return Err(invalid(format!("noise temperature {temperature} K must be ≥ 0")));
        }
        if !(preceding_gain >= T::one()) || !preceding_gain.is_finite() {
            return Err(invalid(format!("preceding gain {preceding_gain} must be ≥ 1")));
        }
        Ok(Self { kind, temperature, preceding_gain })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn preceding_gain(&self) -> T {
        self.preceding_gain
    }

    pub fn psd_factor(&self) -> T {
        T::from_u32(self.kind.psd_factor()).expect("small integer")
    }

    pub fn with_preceding_gain(self, preceding_gain: T) -> Result<Self> {
        Self::new(self.kind, self.temperature, preceding_gain)
    }
}

/// Noise temperature of a quantum-limited linear amplifier, `h·f / (k·ln 2)`.
pub fn quantum_limit_temperature<T: Real>(f: T, c: &Constants<T>) -> Result<T> {
    if !(f > T::zero()) || !f.is_finite() {
        return Err(invalid(format!("frequency {f} Hz must be positive")));
    }
    Ok(c.planck_h() * f / (c.boltzmann_k() * T::LN_2()))
}

/// Voltage PSD of one source, V²/Hz.
pub fn source_psd<T: Real>(s: &NoiseSource<T>, r_ohm: T, c: &Constants<T>) -> T {
    s.psd_factor() * c.boltzmann_k() * s.temperature() * r_ohm
}

/// Sum of all sources referred to the resonator output, V²/Hz.
pub fn total_input_referred_psd<T: Real>(sources: &[NoiseSource<T>], r_ohm: T, c: &Constants<T>) -> Result<T> {
    if sources.is_empty() {
        return Err(invalid("no noise sources"));
    }
    if !(r_ohm > T::zero()) {
        return Err(invalid(format!("resistance {r_ohm} Ω must be positive")));
    }
    Ok(sources.iter().map(|s| source_psd(s, r_ohm, c) / s.preceding_gain()).sum())
}

/// Per-bin complex noise variance: `psd · B / t_p`.
pub fn noise_bin_variance<T: Real>(psd: T, b: T, t_p: T) -> Result<T> {
    if !(b > T::zero()) || !b.is_finite() {
        return Err(invalid(format!("bandwidth factor {b} must be positive")));
    }
    if !(t_p > T::zero()) {
        return Err(invalid(format!("pulse width {t_p} s must be positive")));
    }
    if !(psd >= T::zero()) {
        return Err(invalid(format!("PSD {psd} must be ≥ 0")));
    }
    Ok(psd * b / t_p)
}

/// White complex Gaussian noise, drawn in the time domain and transformed.
///
/// Time samples carry variance `n · bin_variance` so that after the 1/n
/// forward transform every bin has complex variance `bin_variance`.
pub fn sample_noise_spectrum<T: Real, R: Rng + ?Sized>(
    grid: &SimGrid<T>,
    carrier: T,
    bin_variance: T,
    rng: &mut R,
    fourier: &Fourier<T>,
) -> Result<Spectrum<T>> {
    if !(bin_variance >= T::zero()) || !bin_variance.is_finite() {
        return Err(invalid(format!("bin variance {bin_variance} must be ≥ 0")));
    }
    let mut spectrum = Spectrum::zeros(*grid, carrier);
    if bin_variance == T::zero() {
        return Ok(spectrum);
    }
    let n = T::from_usize(grid.n()).expect("sample count fits scalar");
    let quad_sigma = (n * bin_variance / T::lit(2.0)).sqrt();
    for z in &mut spectrum.bins {
        let re = T::standard_normal(rng);
        let im = T::standard_normal(rng);
        *z = Complex::new(re * quad_sigma, im * quad_sigma);
    }
    fourier.forward_in_place(&mut spectrum.bins)?;
    Ok(spectrum)
}
