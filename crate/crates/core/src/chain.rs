//! The readout path: input attenuation, the dispersive resonator, and the
//! amplifier cascade behind it.
//!
//! Fidelity is evaluated at the resonator output plane with all noise
//! referred there. Amplifier gains only matter for display spectra and for
//! weighting later noise sources.

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::noise::{
    noise_bin_variance, quantum_limit_temperature, sample_noise_spectrum, total_input_referred_psd, NoiseKind,
    NoiseSource,
};
use crate::resonator::{make_dispersive_pair, DispersivePair, QubitState};
use crate::scalar::{abs, Real};
use crate::signal::{rect_pulse, Fourier, PulseSpec, SimGrid, Spectrum};
use crate::units::{db_to_power_ratio, db_to_voltage_ratio, Constants};

pub const DEFAULT_INPUT_ATTENUATION_DB: f64 = 76.0;
pub const DEFAULT_REF_IMPEDANCE: f64 = 50.0;
pub const DEFAULT_BANDWIDTH_FACTOR: f64 = 3500.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Amplifier<T> {
    pub name: String,
    pub gain_db: T,
    /// Input-referred noise of this stage.
    pub noise: NoiseSource<T>,
}

/// One amplifier before its preceding gain is known.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSpec<T> {
    pub name: String,
    pub gain_db: T,
    pub kind: NoiseKind,
    pub temperature: T,
}

/// Builds amplifiers whose `preceding_gain` equals the product of the gains
/// ahead of them.
pub fn cascade<T: Real>(stages: &[StageSpec<T>]) -> Result<Vec<Amplifier<T>>> {
    let mut gain = T::one();
    stages
        .iter()
        .map(|s| {
            if !s.gain_db.is_finite() {
                return Err(invalid(format!("gain of '{}' must be finite", s.name)));
            }
            let amp = Amplifier {
                name: s.name.clone(),
                gain_db: s.gain_db,
                noise: NoiseSource::new(s.kind, s.temperature, gain)?,
            };
            gain = gain * db_to_power_ratio(s.gain_db);
            Ok(amp)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig<T> {
    input_attenuation_db: T,
    pair: DispersivePair<T>,
    photon_noise: Option<NoiseSource<T>>,
    amplifiers: Vec<Amplifier<T>>,
    ref_impedance: T,
    bandwidth_factor: T,
    constants: Constants<T>,
}

impl<T: Real> ChainConfig<T> {
    pub fn new(
        input_attenuation_db: T,
        pair: DispersivePair<T>,
        photon_noise: Option<NoiseSource<T>>,
        amplifiers: Vec<Amplifier<T>>,
        ref_impedance: T,
        bandwidth_factor: T,
    ) -> Result<Self> {
        if !(input_attenuation_db >= T::zero()) || !input_attenuation_db.is_finite() {
            return Err(invalid(format!("input attenuation {input_attenuation_db} dB must be ≥ 0")));
        }
        if !(ref_impedance > T::zero()) || !ref_impedance.is_finite() {
            return Err(invalid(format!("reference impedance {ref_impedance} Ω must be positive")));
        }
        if !(bandwidth_factor > T::zero()) || !bandwidth_factor.is_finite() {
            return Err(invalid(format!("bandwidth factor {bandwidth_factor} must be positive")));
        }
        if photon_noise.is_none() && amplifiers.is_empty() {
            return Err(invalid("chain has no noise sources"));
        }
        if let Some(p) = &photon_noise {
            if p.preceding_gain() != T::one() {
                return Err(invalid("photon-fluctuation noise sits at the resonator output (preceding gain 1)"));
            }
        }
        let mut gain = T::one();
        for amp in &amplifiers {
            if !amp.gain_db.is_finite() {
                return Err(invalid(format!("gain of '{}' must be finite", amp.name)));
            }
            let declared = amp.noise.preceding_gain();
            if abs(declared - gain) > T::lit(1e-9) * gain {
                return Err(invalid(format!(
                    "amplifier '{}' declares preceding gain {declared} but the cascade ahead of it gives {gain}",
                    amp.name
                )));
            }
            gain = gain * db_to_power_ratio(amp.gain_db);
        }
        Ok(Self {
            input_attenuation_db,
            pair,
            photon_noise,
            amplifiers,
            ref_impedance,
            bandwidth_factor,
            constants: Constants::si(),
        })
    }

    /// TWPA (+20 dB, quantum limited), HEMT (+40 dB, 1.5 K), room-temperature
    /// amplifier (+40 dB, 54 K), photon-fluctuation noise at the resonator
    /// output, behind 76 dB of input attenuation.
    pub fn default_for_pair(pair: DispersivePair<T>) -> Result<Self> {
        let t_n = quantum_limit_temperature(pair.readout_frequency(), &Constants::si())?;
        let amplifiers = cascade(&default_stages(t_n))?;
        Self::new(
            T::lit(DEFAULT_INPUT_ATTENUATION_DB),
            pair,
            Some(NoiseSource::new(NoiseKind::QuantumLimited, t_n, T::one())?),
            amplifiers,
            T::lit(DEFAULT_REF_IMPEDANCE),
            T::lit(DEFAULT_BANDWIDTH_FACTOR),
        )
    }

    /// Resonators at 7.252456 / 7.252612 GHz, Q = 48000, A = 0.73, with the
    /// default amplifier chain.
    pub fn reference() -> Self {
        let pair = make_dispersive_pair(T::lit(7.252456e9), T::lit(7.252612e9), T::lit(48000.0), T::lit(0.73))
            .expect("reference resonator parameters are valid");
        Self::default_for_pair(pair).expect("reference chain is valid")
    }

    pub fn with_bandwidth_factor(&self, b: T) -> Result<Self> {
        Self::new(
            self.input_attenuation_db,
            self.pair.clone(),
            self.photon_noise,
            self.amplifiers.clone(),
            self.ref_impedance,
            b,
        )
    }

    pub fn input_attenuation_db(&self) -> T {
        self.input_attenuation_db
    }

    pub fn pair(&self) -> &DispersivePair<T> {
        &self.pair
    }

    pub fn photon_noise(&self) -> Option<&NoiseSource<T>> {
        self.photon_noise.as_ref()
    }

    pub fn amplifiers(&self) -> &[Amplifier<T>] {
        &self.amplifiers
    }

    pub fn ref_impedance(&self) -> T {
        self.ref_impedance
    }

    pub fn bandwidth_factor(&self) -> T {
        self.bandwidth_factor
    }

    pub fn constants(&self) -> &Constants<T> {
        &self.constants
    }

    pub fn noise_sources(&self) -> Vec<NoiseSource<T>> {
        self.photon_noise.iter().copied().chain(self.amplifiers.iter().map(|a| a.noise)).collect()
    }

    pub fn total_gain_db(&self) -> T {
        self.amplifiers.iter().fold(T::zero(), |acc, a| acc + a.gain_db)
    }
}

pub fn default_stages<T: Real>(t_n: T) -> Vec<StageSpec<T>> {
    vec![
        StageSpec { name: "TWPA".into(), gain_db: T::lit(20.0), kind: NoiseKind::QuantumLimited, temperature: t_n },
        StageSpec { name: "HEMT".into(), gain_db: T::lit(40.0), kind: NoiseKind::Thermal, temperature: T::lit(1.5) },
        StageSpec {
            name: "room-temperature".into(),
            gain_db: T::lit(40.0),
            kind: NoiseKind::Thermal,
            temperature: T::lit(54.0),
        },
    ]
}

/// Power arriving at the resonator input, dBm.
pub fn port1_power<T: Real>(cfg: &ChainConfig<T>, spec: &PulseSpec<T>) -> T {
    spec.generator_power_dbm() - cfg.input_attenuation_db()
}

/// Noiseless spectrum at the resonator output for one qubit state.
pub fn propagate<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &SimGrid<T>,
    spec: &PulseSpec<T>,
    state: QubitState,
    fourier: &Fourier<T>,
) -> Result<Spectrum<T>> {
    let mut input = fourier.forward(&rect_pulse(grid, spec, cfg.ref_impedance())?)?;
    input.scale(db_to_voltage_ratio(-cfg.input_attenuation_db()));
    let response = cfg.pair().response(state);
    for k in 0..input.bins.len() {
        let f = input.bin_frequency(k);
        input.bins[k] = input.bins[k] * response.s21(f)?;
    }
    Ok(input)
}

/// Complex noise variance of the readout bin, V².
pub fn measurement_noise_variance<T: Real>(cfg: &ChainConfig<T>, spec: &PulseSpec<T>) -> Result<T> {
    let psd = total_input_referred_psd(&cfg.noise_sources(), cfg.ref_impedance(), cfg.constants())?;
    noise_bin_variance(psd, cfg.bandwidth_factor(), spec.width())
}

/// Per-quadrature standard deviation of the readout bin, V.
pub fn measurement_noise_sigma<T: Real>(cfg: &ChainConfig<T>, spec: &PulseSpec<T>) -> Result<T> {
    Ok((measurement_noise_variance(cfg, spec)? / T::lit(2.0)).sqrt())
}

/// Adds noise (optionally) and applies the cascade's voltage gain. For
/// plots and dumps only.
pub fn output_display_spectrum<T: Real, R: Rng + ?Sized>(
    cfg: &ChainConfig<T>,
    s: &Spectrum<T>,
    spec: &PulseSpec<T>,
    with_noise: bool,
    rng: &mut R,
    fourier: &Fourier<T>,
) -> Result<Spectrum<T>> {
    let mut out = s.clone();
    if with_noise {
        let variance = measurement_noise_variance(cfg, spec)?;
        let noise = sample_noise_spectrum(&s.grid, s.carrier, variance, rng, fourier)?;
        out.add(&noise)?;
    }
    let gain = cfg.total_gain_db();
    if gain != T::zero() {
        out.scale(db_to_voltage_ratio(gain));
    }
    Ok(out)
}

/// Noiseless readout-bin values for both states.
pub fn noiseless_readout<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &SimGrid<T>,
    spec: &PulseSpec<T>,
    fourier: &Fourier<T>,
) -> Result<[Complex<T>; 2]> {
    let g = propagate(cfg, grid, spec, QubitState::Ground, fourier)?.at(spec.carrier_freq())?;
    let e = propagate(cfg, grid, spec, QubitState::Excited, fourier)?.at(spec.carrier_freq())?;
    Ok([g, e])
}
