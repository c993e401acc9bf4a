//! Blob statistics and readout error of an I-Q ensemble.
//!
//! The classifier is the equal-covariance, equal-prior linear discriminant:
//! project on the axis joining the two blob means and threshold at their
//! midpoint.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::montecarlo::IQEnsemble;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobStats<T> {
    pub mean0: Complex<T>,
    pub mean1: Complex<T>,
    /// |mean1 − mean0|
    pub separation: T,
    /// Pooled per-quadrature spread along the discriminant axis.
    pub sigma: T,
    pub snr: T,
}

fn mean<T: Real>(s: &[Complex<T>]) -> Complex<T> {
    let n = T::from_usize(s.len()).expect("sample count fits scalar");
    s.iter().fold(Complex::new(T::zero(), T::zero()), |a, &z| a + z) / n
}

/// Means and unit discriminant axis (ground → excited). The axis falls back
/// to the real axis when the means coincide.
fn geometry<T: Real>(e: &IQEnsemble<T>) -> (Complex<T>, Complex<T>, Complex<T>, T) {
    let m0 = mean(&e.state0);
    let m1 = mean(&e.state1);
    let diff = m1 - m0;
    let d = diff.norm();
    let axis = if d > T::zero() { diff / d } else { Complex::new(T::one(), T::zero()) };
    (m0, m1, axis, d)
}

fn project<T: Real>(z: Complex<T>, axis: Complex<T>) -> T {
    (z * axis.conj()).re
}

pub fn blob_stats<T: Real>(e: &IQEnsemble<T>) -> Result<BlobStats<T>> {
    if e.state0.len() < 2 || e.state1.len() < 2 {
        return Err(Error::DegenerateEnsemble("need at least 2 samples per state".into()));
    }
    let (m0, m1, axis, d) = geometry(e);
    let sum_sq = |s: &[Complex<T>], m: Complex<T>| -> T {
        let c = project(m, axis);
        s.iter()
            .map(|&z| {
                let p = project(z, axis) - c;
                p * p
            })
            .sum()
    };
    let dof = T::from_usize(e.state0.len() + e.state1.len() - 2).expect("count fits scalar");
    let sigma = ((sum_sq(&e.state0, m0) + sum_sq(&e.state1, m1)) / dof).sqrt();
    if !(sigma > T::zero()) {
        return Err(Error::DegenerateEnsemble("blobs have zero spread along the discriminant axis".into()));
    }
    Ok(BlobStats { mean0: m0, mean1: m1, separation: d, sigma, snr: d / sigma })
}

/// Overlap error of two equal-variance Gaussians split at the midpoint,
/// `Φ(−d/2σ)`.
pub fn analytic_error<T: Real>(d: T, sigma: T) -> T {
    if !(sigma > T::zero()) {
        return if d > T::zero() { T::zero() } else { T::lit(0.5) };
    }
    T::lit(0.5) * (d / (T::lit(2.0) * T::SQRT_2() * sigma)).erfc()
}

/// Fraction of all samples that the midpoint discriminant assigns to the
/// wrong state.
pub fn empirical_error<T: Real>(e: &IQEnsemble<T>) -> Result<T> {
    let (m0, m1, axis, d) = geometry(e);
    if !(d > T::zero()) {
        return Err(Error::DegenerateEnsemble("blob means coincide; no discriminant axis".into()));
    }
    let threshold = project((m0 + m1) / T::lit(2.0), axis);
    let wrong0 = e.state0.iter().filter(|&&z| project(z, axis) > threshold).count();
    let wrong1 = e.state1.iter().filter(|&&z| project(z, axis) <= threshold).count();
    let total = e.state0.len() + e.state1.len();
    Ok(T::from_usize(wrong0 + wrong1).expect("count fits scalar") / T::from_usize(total).expect("count fits scalar"))
}
