//! Collective noise channels.
//!
//! Every photon of a quartet sees the same unitary. Across quartets the noise
//! parameter is redrawn according to a [`NoisePolicy`].

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};
use crate::statevector::{Gate, StateVector};

/// Phase `phi` of the collective dephasing map |1> -> e^{i phi}|1>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingParam(pub f64);

/// Angle `theta` of the collective polarization rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParam(pub f64);

impl DephasingParam {
    pub fn reduced(self) -> f64 {
        self.0.rem_euclid(TAU)
    }

    pub fn matrix(self) -> Gate {
        let zero = Complex64::new(0.0, 0.0);
        [
            [Complex64::new(1.0, 0.0), zero],
            [zero, Complex64::from_polar(1.0, self.0)],
        ]
    }
}

impl RotationParam {
    pub fn reduced(self) -> f64 {
        self.0.rem_euclid(TAU)
    }

    /// Columns are the images of |0> and |1>:
    /// |0> -> cos|0> + sin|1>, |1> -> -sin|0> + cos|1>.
    pub fn matrix(self) -> Gate {
        let (s, c) = self.0.sin_cos();
        [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoisePolicy {
    Fixed { value: f64 },
    UniformPerQuartet { lo: f64, hi: f64 },
}

impl Default for NoisePolicy {
    fn default() -> Self {
        NoisePolicy::Fixed { value: 0.0 }
    }
}

impl NoisePolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoisePolicy::Fixed { value } if !value.is_finite() => {
                Err(QkdError::InvalidPolicy(format!("non-finite value {value}")))
            }
            NoisePolicy::UniformPerQuartet { lo, hi } if !(lo.is_finite() && hi.is_finite()) => {
                Err(QkdError::InvalidPolicy(format!(
                    "non-finite bounds [{lo}, {hi}]"
                )))
            }
            NoisePolicy::UniformPerQuartet { lo, hi } if lo > hi => {
                Err(QkdError::InvalidPolicy(format!("lo {lo} exceeds hi {hi}")))
            }
            _ => Ok(()),
        }
    }
}

/// Draws one noise parameter. `Fixed` consumes no randomness.
pub fn sample_noise<R: Rng + ?Sized>(policy: &NoisePolicy, rng: &mut R) -> f64 {
    match *policy {
        NoisePolicy::Fixed { value } => value,
        NoisePolicy::UniformPerQuartet { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
    }
}

fn check_distinct(photons: &[usize]) -> Result<()> {
    for (i, p) in photons.iter().enumerate() {
        if photons[..i].contains(p) {
            return Err(QkdError::DuplicateQubit(*p));
        }
    }
    Ok(())
}

fn apply_collective(s: &StateVector, photons: &[usize], gate: &Gate) -> Result<StateVector> {
    check_distinct(photons)?;
    photons
        .iter()
        .try_fold(s.clone(), |acc, &q| acc.apply_single_qubit(q, gate))
}

pub fn collective_dephasing(
    s: &StateVector,
    photons: &[usize],
    p: DephasingParam,
) -> Result<StateVector> {
    apply_collective(s, photons, &p.matrix())
}

pub fn collective_rotation(
    s: &StateVector,
    photons: &[usize],
    p: RotationParam,
) -> Result<StateVector> {
    apply_collective(s, photons, &p.matrix())
}
