//! Complex-baseband time/frequency grids around the readout carrier.
//!
//! The observation window is `padding · t_p` long so the rectangular pulse
//! occupies the same fraction of the window at every width. Forward
//! transforms carry the `1/n` factor: bin 0 is the time average of the
//! envelope, which is what a quadrature measurement reads.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::scalar::{abs, Real};
use crate::units::{dbm_to_watts, power_to_vrms};

pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_PADDING: f64 = 4.0;
pub const MIN_SAMPLES: usize = 64;

/// Readout pulse at the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec<T> {
    carrier_freq: T,
    width: T,
    generator_power_dbm: T,
}

impl<T: Real> PulseSpec<T> {
    pub fn new(carrier_freq: T, width: T, generator_power_dbm: T) -> Result<Self> {
        if !(carrier_freq > T::zero()) || !carrier_freq.is_finite() {
            return Err(invalid(format!("carrier frequency {carrier_freq} Hz must be positive")));
        }
        if !(width > T::zero()) || !width.is_finite() {
            return Err(invalid(format!("pulse width {width} s must be positive")));
        }
        if !generator_power_dbm.is_finite() {
            return Err(invalid("generator power must be finite"));
        }
        Ok(Self { carrier_freq, width, generator_power_dbm })
    }

    /// −47 dBm, 3.5 µs at 7.252534 GHz.
    pub fn nominal() -> Self {
        Self { carrier_freq: T::lit(7.252534e9), width: T::lit(3.5e-6), generator_power_dbm: T::lit(-47.0) }
    }

    pub fn carrier_freq(&self) -> T {
        self.carrier_freq
    }

    pub fn width(&self) -> T {
        self.width
    }

    pub fn generator_power_dbm(&self) -> T {
        self.generator_power_dbm
    }

    pub fn with_width(self, width: T) -> Result<Self> {
        Self::new(self.carrier_freq, width, self.generator_power_dbm)
    }

    pub fn with_power_dbm(self, power_dbm: T) -> Result<Self> {
        Self::new(self.carrier_freq, self.width, power_dbm)
    }

    pub fn with_carrier(self, carrier_freq: T) -> Result<Self> {
        Self::new(carrier_freq, self.width, self.generator_power_dbm)
    }
}

/// Sample count and window-to-pulse ratio; a [`SimGrid`] is built from these
/// for each pulse width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams<T> {
    pub n: usize,
    pub padding: T,
}

impl<T: Real> Default for GridParams<T> {
    fn default() -> Self {
        Self { n: DEFAULT_SAMPLES, padding: T::lit(DEFAULT_PADDING) }
    }
}

impl<T: Real> GridParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < MIN_SAMPLES {
            return Err(invalid(format!("sample count {} must be a power of two ≥ {MIN_SAMPLES}", self.n)));
        }
        if !(self.padding >= T::lit(2.0)) || !self.padding.is_finite() {
            return Err(invalid(format!("padding {} must be ≥ 2", self.padding)));
        }
        Ok(())
    }

    pub fn build(&self, t_p: T) -> Result<SimGrid<T>> {
        make_grid(t_p, self.n, self.padding)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid<T> {
    n: usize,
    padding: T,
    window: T,
    dt: T,
    df: T,
}

pub fn make_grid<T: Real>(t_p: T, n: usize, padding: T) -> Result<SimGrid<T>> {
    GridParams { n, padding }.validate()?;
    if !(t_p > T::zero()) || !t_p.is_finite() {
        return Err(invalid(format!("pulse width {t_p} s must be positive")));
    }
    let window = padding * t_p;
    let n_t = T::from_usize(n).expect("sample count fits scalar");
    Ok(SimGrid { n, padding, window, dt: window / n_t, df: T::one() / window })
}

impl<T: Real> SimGrid<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn padding(&self) -> T {
        self.padding
    }

    /// Window length T = padding · t_p.
    pub fn window(&self) -> T {
        self.window
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn df(&self) -> T {
        self.df
    }

    pub fn pulse_width(&self) -> T {
        self.window / self.padding
    }

    pub fn params(&self) -> GridParams<T> {
        GridParams { n: self.n, padding: self.padding }
    }

    /// Baseband offset of bin `k`: `k·df` below n/2, `(k − n)·df` above.
    pub fn baseband_frequency(&self, k: usize) -> T {
        let k = k as f64;
        let n = self.n as f64;
        let signed = if k < n / 2.0 { k } else { k - n };
        T::lit(signed) * self.df
    }

    /// Total spectral span n·df.
    pub fn span(&self) -> T {
        T::from_usize(self.n).expect("sample count fits scalar") * self.df
    }

    /// Index of the bin nearest to baseband offset `f_bb`; ties go to the
    /// lower frequency.
    pub fn bin_index(&self, f_bb: T) -> Result<usize> {
        let half = self.span() / T::lit(2.0);
        if !(abs(f_bb) <= half) {
            return Err(Error::OutOfRange {
                what: "baseband frequency",
                value: f_bb.as_f64(),
                min: -half.as_f64(),
                max: half.as_f64(),
            });
        }
        let k = (f_bb / self.df - T::lit(0.5)).ceil();
        let n = self.n as i64;
        let k = k.to_i64().expect("bounded bin index");
        Ok(k.rem_euclid(n) as usize)
    }
}

/// Time-domain complex envelope, volts.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<T> {
    pub grid: SimGrid<T>,
    pub carrier: T,
    pub samples: Vec<Complex<T>>,
}

/// Frequency-domain samples, volts per bin (1/n normalisation).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub grid: SimGrid<T>,
    pub carrier: T,
    pub bins: Vec<Complex<T>>,
}

impl<T: Real> Envelope<T> {
    pub fn zeros(grid: SimGrid<T>, carrier: T) -> Self {
        Self { grid, carrier, samples: vec![Complex::new(T::zero(), T::zero()); grid.n()] }
    }
}

impl<T: Real> Spectrum<T> {
    pub fn zeros(grid: SimGrid<T>, carrier: T) -> Self {
        Self { grid, carrier, bins: vec![Complex::new(T::zero(), T::zero()); grid.n()] }
    }

    /// Absolute frequency of bin `k`.
    pub fn bin_frequency(&self, k: usize) -> T {
        self.carrier + self.grid.baseband_frequency(k)
    }

    pub fn at(&self, f: T) -> Result<Complex<T>> {
        let k = self.grid.bin_index(f - self.carrier)?;
        Ok(self.bins[k])
    }

    pub fn scale(&mut self, factor: T) {
        for b in &mut self.bins {
            *b = *b * factor;
        }
    }

    /// Bin-wise sum; both spectra must share a grid and carrier.
    pub fn add(&mut self, other: &Spectrum<T>) -> Result<()> {
        if self.grid != other.grid || self.carrier != other.carrier {
            return Err(invalid("cannot add spectra on different grids"));
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a = *a + *b;
        }
        Ok(())
    }
}

/// Reads the bin nearest to absolute frequency `f`.
pub fn spectrum_at<T: Real>(s: &Spectrum<T>, f: T) -> Result<Complex<T>> {
    s.at(f)
}

/// Rectangular pulse: `V_peak` on `[0, t_p)`, zero for the rest of the window.
pub fn rect_pulse<T: Real>(grid: &SimGrid<T>, spec: &PulseSpec<T>, r_ohm: T) -> Result<Envelope<T>> {
    let v_peak = power_to_vrms(dbm_to_watts(spec.generator_power_dbm())?, r_ohm)?;
    let mut env = Envelope::zeros(*grid, spec.carrier_freq());
    // t_k = k·T/n < t_p  ⇔  k < n/padding
    let on = T::from_usize(grid.n()).expect("sample count fits scalar") / grid.padding();
    for (k, s) in env.samples.iter_mut().enumerate() {
        if T::from_usize(k).expect("index fits scalar") < on {
            *s = Complex::new(v_peak, T::zero());
        }
    }
    Ok(env)
}

/// Planned forward/inverse transforms for one length. Cheap to clone and
/// shareable across threads.
#[derive(Clone)]
pub struct Fourier<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Fourier<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl<T: Real> Fourier<T> {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(invalid(format!("transform length {n} must be a power of two")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, len: usize, grid_n: usize) -> Result<()> {
        if len != grid_n || len != self.n {
            return Err(invalid(format!(
                "sample count {len} does not match grid ({grid_n}) and transform ({})",
                self.n
            )));
        }
        Ok(())
    }

    /// Forward DFT with 1/n scaling, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.check(buf.len(), self.n)?;
        self.forward.process(buf);
        let scale = T::one() / T::from_usize(self.n).expect("length fits scalar");
        for z in buf.iter_mut() {
            *z = *z * scale;
        }
        Ok(())
    }

    /// Inverse of [`Fourier::forward_in_place`] (no scaling).
    pub fn inverse_in_place(&self, buf: &mut [Complex<T>]) -> Result<()> {
        self.check(buf.len(), self.n)?;
        self.inverse.process(buf);
        Ok(())
    }

    pub fn forward(&self, e: &Envelope<T>) -> Result<Spectrum<T>> {
        self.check(e.samples.len(), e.grid.n())?;
        let mut bins = e.samples.clone();
        self.forward_in_place(&mut bins)?;
        Ok(Spectrum { grid: e.grid, carrier: e.carrier, bins })
    }

    pub fn inverse(&self, s: &Spectrum<T>) -> Result<Envelope<T>> {
        self.check(s.bins.len(), s.grid.n())?;
        let mut samples = s.bins.clone();
        self.inverse_in_place(&mut samples)?;
        Ok(Envelope { grid: s.grid, carrier: s.carrier, samples })
    }
}

pub fn fft_forward<T: Real>(e: &Envelope<T>) -> Result<Spectrum<T>> {
    Fourier::new(e.grid.n())?.forward(e)
}

pub fn fft_inverse<T: Real>(s: &Spectrum<T>) -> Result<Envelope<T>> {
    Fourier::new(s.grid.n())?.inverse(s)
}
