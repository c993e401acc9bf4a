//! Per-qubit-state resonator transmission.
//!
//! The qubit is not modelled; the two states differ only through the
//! resonance frequency of the readout resonator. Each state's S21 comes
//! either from a single-pole Lorentzian or from an imported two-port table.

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::{abs, Real};
use crate::touchstone::TwoPortTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitState {
    Ground,
    Excited,
}

impl QubitState {
    pub const BOTH: [QubitState; 2] = [QubitState::Ground, QubitState::Excited];

    pub fn index(self) -> usize {
        match self {
            Self::Ground => 0,
            Self::Excited => 1,
        }
    }
}

/// Series-coupled transmission resonance `S21(f) = A / (1 + 2iQ(f - f0)/f0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorModel<T> {
    f0: T,
    q_loaded: T,
    peak_transmission: T,
}

impl<T: Real> ResonatorModel<T> {
    pub fn new(f0: T, q_loaded: T, peak_transmission: T) -> Result<Self> {
        if !(f0 > T::zero()) || !f0.is_finite() {
            return Err(invalid(format!("resonance frequency {f0} Hz must be positive")));
        }
        if !(q_loaded > T::zero()) || !q_loaded.is_finite() {
            return Err(invalid(format!("loaded Q {q_loaded} must be positive")));
        }
        if !(peak_transmission > T::zero() && peak_transmission <= T::one()) {
            return Err(invalid(format!("peak transmission {peak_transmission} must lie in (0, 1]")));
        }
        Ok(Self { f0, q_loaded, peak_transmission })
    }

    pub fn f0(&self) -> T {
        self.f0
    }

    pub fn q_loaded(&self) -> T {
        self.q_loaded
    }

    pub fn peak_transmission(&self) -> T {
        self.peak_transmission
    }

    /// Full width at half power, f0/Q.
    pub fn linewidth(&self) -> T {
        self.f0 / self.q_loaded
    }

    pub fn s21(&self, f: T) -> Complex<T> {
        let x = T::lit(2.0) * self.q_loaded * (f - self.f0) / self.f0;
        Complex::new(self.peak_transmission, T::zero()) / Complex::new(T::one(), x)
    }
}

pub fn lorentzian_s21<T: Real>(m: &ResonatorModel<T>, f: T) -> Complex<T> {
    m.s21(f)
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateResponse<T> {
    Lorentzian(ResonatorModel<T>),
    Table(TwoPortTable<T>),
}

impl<T: Real> StateResponse<T> {
    pub fn s21(&self, f: T) -> Result<Complex<T>> {
        match self {
            Self::Lorentzian(m) => Ok(m.s21(f)),
            Self::Table(t) => t.interpolate_s21(f),
        }
    }

    /// Frequency of maximum transmission.
    pub fn resonance(&self) -> T {
        match self {
            Self::Lorentzian(m) => m.f0(),
            Self::Table(t) => t.peak_s21_frequency(),
        }
    }
}

/// Ground- and excited-state responses plus their dispersive shift.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersivePair<T> {
    ground: StateResponse<T>,
    excited: StateResponse<T>,
    chi: T,
}

impl<T: Real> DispersivePair<T> {
    /// Builds a pair from two imported tables; χ is the separation of their
    /// |S21| peaks.
    pub fn from_tables(ground: TwoPortTable<T>, excited: TwoPortTable<T>) -> Result<Self> {
        Self::from_responses(StateResponse::Table(ground), StateResponse::Table(excited))
    }

    fn from_responses(ground: StateResponse<T>, excited: StateResponse<T>) -> Result<Self> {
        let chi = excited.resonance() - ground.resonance();
        if chi == T::zero() {
            return Err(Error::DegeneratePair(ground.resonance().as_f64()));
        }
        Ok(Self { ground, excited, chi })
    }

    /// f0(excited) − f0(ground); signed.
    pub fn chi(&self) -> T {
        self.chi
    }

    pub fn response(&self, state: QubitState) -> &StateResponse<T> {
        match state {
            QubitState::Ground => &self.ground,
            QubitState::Excited => &self.excited,
        }
    }

    pub fn readout_frequency(&self) -> T {
        (self.ground.resonance() + self.excited.resonance()) / T::lit(2.0)
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.ground, StateResponse::Lorentzian(_))
    }

    pub fn state_response(&self, state: QubitState, f: T) -> Result<Complex<T>> {
        self.response(state).s21(f)
    }
}

/// Analytic pair sharing Q and peak transmission.
pub fn make_dispersive_pair<T: Real>(f0_ground: T, f0_excited: T, q: T, a: T) -> Result<DispersivePair<T>> {
    if f0_ground == f0_excited {
        return Err(Error::DegeneratePair(f0_ground.as_f64()));
    }
    DispersivePair::from_responses(
        StateResponse::Lorentzian(ResonatorModel::new(f0_ground, q, a)?),
        StateResponse::Lorentzian(ResonatorModel::new(f0_excited, q, a)?),
    )
}

pub fn readout_frequency<T: Real>(p: &DispersivePair<T>) -> T {
    p.readout_frequency()
}

pub fn state_response<T: Real>(p: &DispersivePair<T>, state: QubitState, f: T) -> Result<Complex<T>> {
    p.state_response(state, f)
}

/// Magnitude of the S21 difference between the two states at `f`; this sets
/// the I-Q blob separation.
pub fn state_contrast<T: Real>(p: &DispersivePair<T>, f: T) -> Result<T> {
    let g = p.state_response(QubitState::Ground, f)?;
    let e = p.state_response(QubitState::Excited, f)?;
    Ok(abs((e - g).norm()))
}
