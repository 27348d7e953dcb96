//! Entropy kernels in nats.

use crate::error::{Error, Result};
use crate::scalar::{effective_tol, Real};

/// Clamp tolerance separating genuine zero probabilities/occupations from
/// round-off.
pub const KERNEL_TOL: f64 = 1e-12;

/// A list of eigenvalues (ascending when produced by the solvers) and the
/// tolerance used when treating them as probabilities or occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    values: Vec<T>,
    tol: T,
}

impl<T: Real> Spectrum<T> {
    /// Spectrum with the default [`KERNEL_TOL`] (raised to the type's
    /// resolution for `f32`).
    pub fn new(values: Vec<T>) -> Self {
        Self {
            values,
            tol: effective_tol(KERNEL_TOL),
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks the density-matrix invariants: every value in `[-tol, 1+tol]`
    /// and the total within `tol·dim` of one.
    pub fn check_density(&self) -> Result<()> {
        let tol = self.tol;
        for &p in &self.values {
            if !(p >= -tol && p <= T::one() + tol) {
                return Err(Error::NumericDomain(format!(
                    "probability {p} outside [0, 1] beyond tolerance {tol}"
                )));
            }
        }
        let total: T = self.values.iter().copied().sum();
        let slack = tol * T::from_usize(self.values.len().max(1)).expect("dimension");
        if (total - T::one()).abs() > slack {
            return Err(Error::NumericDomain(format!(
                "spectrum sums to {total}, not 1 within {slack}"
            )));
        }
        Ok(())
    }
}

/// `-ν ln ν - (1-ν) ln(1-ν)`, exactly zero within `tol` of either end.
pub fn binary_entropy<T: Real>(nu: T, tol: T) -> Result<T> {
    if !(nu >= -tol && nu <= T::one() + tol) {
        return Err(Error::NumericDomain(format!(
            "occupation {nu} outside [0, 1] beyond tolerance {tol}"
        )));
    }
    if nu <= tol || nu >= T::one() - tol {
        return Ok(T::zero());
    }
    let mu = T::one() - nu;
    Ok(-(nu * nu.ln()) - mu * mu.ln())
}

/// Von Neumann entropy `-Σ p ln p` of a density-matrix spectrum.
pub fn spectrum_entropy<T: Real>(spec: &Spectrum<T>) -> Result<T> {
    spec.check_density()?;
    let tol = spec.tol;
    let s: T = spec
        .values
        .iter()
        .filter(|&&p| p > tol)
        .map(|&p| -(p * p.ln()))
        .sum();
    Ok(s.max(T::zero()))
}
