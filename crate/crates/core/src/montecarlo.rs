//! Repeated noisy quadrature measurements for both qubit states.
//!
//! Trial `i` of state `s` draws from a ChaCha stream keyed by
//! `(seed, s, i)`, so an ensemble is bit-identical regardless of how trials
//! are scheduled across threads.

use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{measurement_noise_variance, propagate, ChainConfig};
use crate::error::{invalid, Result};
use crate::noise::sample_noise_spectrum;
use crate::resonator::QubitState;
use crate::scalar::Real;
use crate::signal::{Fourier, PulseSpec, SimGrid, Spectrum};

pub const DEFAULT_TRIALS: usize = 1000;

const TRIAL_DOMAIN: &[u8; 8] = b"IQ-TRIAL";
const ROW_DOMAIN: &[u8; 8] = b"SWEEPROW";

fn keyed_stream(a: u64, b: u64, c: u64, domain: &[u8; 8]) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..].copy_from_slice(domain);
    ChaCha8Rng::from_seed(key)
}

/// Random stream for one trial.
pub fn trial_rng(seed: u64, state: QubitState, trial: u64) -> ChaCha8Rng {
    keyed_stream(seed, state.index() as u64, trial, TRIAL_DOMAIN)
}

/// Seed for row `row` of a sweep started from `seed`.
pub fn row_seed(seed: u64, row: u64) -> u64 {
    keyed_stream(seed, row, 0, ROW_DOMAIN).next_u64()
}

/// Everything needed to reproduce an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleParams<T> {
    pub spec: PulseSpec<T>,
    pub grid: SimGrid<T>,
    pub chain: ChainConfig<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IQEnsemble<T> {
    pub state0: Vec<Complex<T>>,
    pub state1: Vec<Complex<T>>,
    pub n_trials: usize,
    pub seed: u64,
    pub params: Option<EnsembleParams<T>>,
}

impl<T: Real> IQEnsemble<T> {
    /// Wraps externally produced samples (no simulation metadata).
    pub fn from_samples(state0: Vec<Complex<T>>, state1: Vec<Complex<T>>) -> Result<Self> {
        if state0.len() != state1.len() {
            return Err(invalid(format!("state ensembles differ in size: {} vs {}", state0.len(), state1.len())));
        }
        if state0.len() < 2 {
            return Err(invalid("need at least 2 samples per state"));
        }
        Ok(Self { n_trials: state0.len(), state0, state1, seed: 0, params: None })
    }

    pub fn samples(&self, state: QubitState) -> &[Complex<T>] {
        match state {
            QubitState::Ground => &self.state0,
            QubitState::Excited => &self.state1,
        }
    }

    /// Applies `f` to every sample of both states.
    pub fn map_samples(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            state0: self.state0.iter().map(|&z| f(z)).collect(),
            state1: self.state1.iter().map(|&z| f(z)).collect(),
            ..self.clone()
        }
    }
}

/// Precomputed noiseless spectra and noise level shared by all trials of a
/// configuration.
#[derive(Debug, Clone)]
pub struct TrialContext<T: Real> {
    noiseless: [Spectrum<T>; 2],
    bin_variance: T,
    readout_freq: T,
    fourier: Fourier<T>,
}

impl<T: Real> TrialContext<T> {
    pub fn new(cfg: &ChainConfig<T>, grid: &SimGrid<T>, spec: &PulseSpec<T>) -> Result<Self> {
        let fourier = Fourier::new(grid.n())?;
        let ground = propagate(cfg, grid, spec, QubitState::Ground, &fourier)?;
        let excited = propagate(cfg, grid, spec, QubitState::Excited, &fourier)?;
        Ok(Self {
            noiseless: [ground, excited],
            bin_variance: measurement_noise_variance(cfg, spec)?,
            readout_freq: spec.carrier_freq(),
            fourier,
        })
    }

    pub fn noiseless_readout(&self, state: QubitState) -> Result<Complex<T>> {
        self.noiseless[state.index()].at(self.readout_freq)
    }

    pub fn bin_variance(&self) -> T {
        self.bin_variance
    }

    pub fn sample<R: Rng + ?Sized>(&self, state: QubitState, rng: &mut R) -> Result<Complex<T>> {
        let clean = &self.noiseless[state.index()];
        let mut noisy = sample_noise_spectrum(&clean.grid, clean.carrier, self.bin_variance, rng, &self.fourier)?;
        noisy.add(clean)?;
        noisy.at(self.readout_freq)
    }
}

/// One quadrature measurement: noiseless spectrum plus fresh noise, read at
/// the carrier bin.
pub fn simulate_trial<T: Real, R: Rng + ?Sized>(
    cfg: &ChainConfig<T>,
    grid: &SimGrid<T>,
    spec: &PulseSpec<T>,
    state: QubitState,
    rng: &mut R,
) -> Result<Complex<T>> {
    TrialContext::new(cfg, grid, spec)?.sample(state, rng)
}

pub fn run_ensemble<T: Real>(
    cfg: &ChainConfig<T>,
    grid: &SimGrid<T>,
    spec: &PulseSpec<T>,
    n_trials: usize,
    seed: u64,
) -> Result<IQEnsemble<T>> {
    if n_trials < 2 {
        return Err(invalid(format!("need at least 2 trials, got {n_trials}")));
    }
    let ctx = TrialContext::new(cfg, grid, spec)?;
    let run_state = |state: QubitState| -> Result<Vec<Complex<T>>> {
        (0..n_trials).into_par_iter().map(|i| ctx.sample(state, &mut trial_rng(seed, state, i as u64))).collect()
    };
    Ok(IQEnsemble {
        state0: run_state(QubitState::Ground)?,
        state1: run_state(QubitState::Excited)?,
        n_trials,
        seed,
        params: Some(EnsembleParams { spec: *spec, grid: *grid, chain: cfg.clone() }),
    })
}
