//! Dense statevector engine for up to five qubits.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so the bitstring
//! of an outcome reads left to right in photon order (photon 1 first).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QkdError, Result};

pub type Amplitude = Complex64;

/// Row-major 2x2 complex matrix.
pub type Gate = [[Amplitude; 2]; 2];

pub const MAX_QUBITS: usize = 5;

/// Tolerance for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance for accepting an amplitude vector as normalized.
pub const NORM_TOL: f64 = 1e-10;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasBasis {
    Z,
    X,
}

impl MeasBasis {
    pub fn symbol(self, bit: u8) -> char {
        match (self, bit) {
            (MeasBasis::Z, 0) => '0',
            (MeasBasis::Z, _) => '1',
            (MeasBasis::X, 0) => '+',
            (MeasBasis::X, _) => '-',
        }
    }

    /// Single-qubit eigenstate for outcome `bit` (`0` -> |0> or |+>).
    pub fn eigenstate(self, bit: u8) -> [Amplitude; 2] {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match (self, bit) {
            (MeasBasis::Z, 0) => [ONE, ZERO],
            (MeasBasis::Z, _) => [ZERO, ONE],
            (MeasBasis::X, 0) => [s, s],
            (MeasBasis::X, _) => [s, -s],
        }
    }
}

impl fmt::Display for MeasBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasBasis::Z => f.write_str("Z"),
            MeasBasis::X => f.write_str("X"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// Amplitudes on |00>, |01>, |10>, |11> of the ordered pair.
    pub fn amplitudes(self) -> [Amplitude; 4] {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellOutcome::PhiPlus => [s, ZERO, ZERO, s],
            BellOutcome::PhiMinus => [s, ZERO, ZERO, -s],
            BellOutcome::PsiPlus => [ZERO, s, s, ZERO],
            BellOutcome::PsiMinus => [ZERO, s, -s, ZERO],
        }
    }

    pub fn state(self) -> StateVector {
        StateVector {
            num_qubits: 2,
            amplitudes: self.amplitudes().to_vec(),
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        };
        f.write_str(s)
    }
}

pub fn identity() -> Gate {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn hadamard() -> Gate {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[s, s], [s, -s]]
}

/// Largest entry of `U^dagger U - I`.
pub fn unitarity_deviation(u: &Gate) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut acc: Amplitude = u.iter().map(|row| row[i].conj() * row[j]).sum();
            if i == j {
                acc -= ONE;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Formats an outcome index as a bitstring in the symbols of `basis`.
pub fn format_outcome(bits: usize, num_qubits: usize, basis: MeasBasis) -> String {
    (0..num_qubits)
        .map(|q| basis.symbol(bit_of(bits, num_qubits, q)))
        .collect()
}

/// Parses `0/1` or `+/-` strings (either sign variant of the minus) into an
/// outcome index. Returns the basis implied by the symbols and the index.
pub fn parse_outcome(s: &str) -> Result<(MeasBasis, usize)> {
    let mut basis = None;
    let mut value = 0usize;
    for ch in s.chars() {
        let (b, bit) = match ch {
            '0' => (MeasBasis::Z, 0),
            '1' => (MeasBasis::Z, 1),
            '+' => (MeasBasis::X, 0),
            '-' | '\u{2212}' => (MeasBasis::X, 1),
            other => return Err(QkdError::InvalidBitChar(other)),
        };
        match basis {
            None => basis = Some(b),
            Some(prev) if prev != b => return Err(QkdError::InvalidBitChar(ch)),
            _ => {}
        }
        value = (value << 1) | bit;
    }
    let basis = basis.ok_or(QkdError::BitLength {
        expected: 1,
        got: 0,
    })?;
    Ok((basis, value))
}

/// Bit of qubit `q` in outcome index `bits`.
#[inline]
pub fn bit_of(bits: usize, num_qubits: usize, q: usize) -> u8 {
    ((bits >> (num_qubits - 1 - q)) & 1) as u8
}

fn check_count(num_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&num_qubits) {
        Ok(())
    } else {
        Err(QkdError::InvalidQubitCount(num_qubits))
    }
}

/// Picks an index by inverse CDF with a single uniform draw `u` in [0, 1).
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
            acc += p;
            if target < acc {
                return i;
            }
        }
    }
    last_nonzero
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

impl StateVector {
    /// Product state from a string of `0`, `1`, `+`, `-` symbols.
    pub fn basis_state(num_qubits: usize, bits: &str) -> Result<Self> {
        check_count(num_qubits)?;
        let len = bits.chars().count();
        if len != num_qubits {
            return Err(QkdError::BitLength {
                expected: num_qubits,
                got: len,
            });
        }
        let kets = bits
            .chars()
            .map(|ch| match ch {
                '0' => Ok(MeasBasis::Z.eigenstate(0)),
                '1' => Ok(MeasBasis::Z.eigenstate(1)),
                '+' => Ok(MeasBasis::X.eigenstate(0)),
                '-' | '\u{2212}' => Ok(MeasBasis::X.eigenstate(1)),
                other => Err(QkdError::InvalidBitChar(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        let amplitudes = (0..1usize << num_qubits)
            .map(|idx| {
                kets.iter().enumerate().fold(ONE, |acc, (q, ket)| {
                    acc * ket[bit_of(idx, num_qubits, q) as usize]
                })
            })
            .collect();
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_index(num_qubits: usize, index: usize) -> Result<Self> {
        check_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QkdError::BitLength {
                expected: num_qubits,
                got: usize::BITS as usize - index.leading_zeros() as usize,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Product of single-qubit eigenstates of `basis`, one per bit of `outcome`.
    pub fn product_eigenstate(num_qubits: usize, basis: MeasBasis, outcome: usize) -> Result<Self> {
        check_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        let amplitudes = (0..dim)
            .map(|idx| {
                (0..num_qubits).fold(ONE, |acc, q| {
                    let ket = basis.eigenstate(bit_of(outcome, num_qubits, q));
                    acc * ket[bit_of(idx, num_qubits, q) as usize]
                })
            })
            .collect();
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes; length must be a power of two and
    /// the vector normalized within [`NORM_TOL`].
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(QkdError::InvalidQubitCount(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_count(num_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(QkdError::NotNormalized(norm));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Rescales an unnormalized vector; `None` when its norm vanishes.
    pub fn normalized(amplitudes: Vec<Amplitude>) -> Option<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 1e-24 || !norm.is_finite() {
            return None;
        }
        let scale = 1.0 / norm.sqrt();
        let len = amplitudes.len();
        Some(Self {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.num_qubits {
            Ok(())
        } else {
            Err(QkdError::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            })
        }
    }

    /// Kronecker product; `self` occupies the leading (most significant) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        check_count(n)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    pub fn apply_single_qubit(&self, q: usize, u: &Gate) -> Result<Self> {
        self.check_qubit(q)?;
        let dev = unitarity_deviation(u);
        if dev.is_nan() || dev > UNITARY_TOL {
            return Err(QkdError::NotUnitary(dev));
        }
        let mut out = self.clone();
        out.apply_unchecked(q, u);
        Ok(out)
    }

    fn apply_unchecked(&mut self, q: usize, u: &Gate) {
        let stride = 1usize << (self.num_qubits - 1 - q);
        for i in 0..self.amplitudes.len() {
            if i & stride == 0 {
                let j = i | stride;
                let (a0, a1) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amplitudes[j] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Controlled flip. In the X basis the control fires on |-> and the target
    /// swaps |+> and |->, i.e. the Z-basis CNOT conjugated by Hadamards on both
    /// wires.
    pub fn apply_cnot(&self, control: usize, target: usize, basis: MeasBasis) -> Result<Self> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(QkdError::SameQubit(control));
        }
        let mut out = self.clone();
        let h = hadamard();
        if basis == MeasBasis::X {
            out.apply_unchecked(control, &h);
            out.apply_unchecked(target, &h);
        }
        let n = self.num_qubits;
        let cmask = 1usize << (n - 1 - control);
        let tmask = 1usize << (n - 1 - target);
        for i in 0..out.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                out.amplitudes.swap(i, i | tmask);
            }
        }
        if basis == MeasBasis::X {
            out.apply_unchecked(control, &h);
            out.apply_unchecked(target, &h);
        }
        Ok(out)
    }

    /// Amplitudes expressed in the product basis `basis`.
    pub fn amplitudes_in(&self, basis: MeasBasis) -> Vec<Amplitude> {
        match basis {
            MeasBasis::Z => self.amplitudes.clone(),
            MeasBasis::X => {
                let mut rotated = self.clone();
                let h = hadamard();
                for q in 0..self.num_qubits {
                    rotated.apply_unchecked(q, &h);
                }
                rotated.amplitudes
            }
        }
    }

    /// Born distribution of a product measurement in `basis`.
    pub fn probabilities(&self, basis: MeasBasis) -> Vec<f64> {
        self.amplitudes_in(basis)
            .iter()
            .map(|a| a.norm_sqr())
            .collect()
    }

    pub fn measure_all<R: Rng + ?Sized>(
        &self,
        basis: MeasBasis,
        rng: &mut R,
    ) -> (usize, StateVector) {
        let probs = self.probabilities(basis);
        let bits = sample_index(&probs, rng.random::<f64>());
        let collapsed = Self::product_eigenstate(self.num_qubits, basis, bits)
            .expect("qubit count already validated");
        (bits, collapsed)
    }

    /// Projects qubit `q` onto the `outcome` eigenstate of `basis`.
    /// Returns the Born probability and the renormalized post-measurement state.
    pub fn project_qubit(
        &self,
        q: usize,
        basis: MeasBasis,
        outcome: u8,
    ) -> Result<(f64, Option<StateVector>)> {
        self.check_qubit(q)?;
        let ket = basis.eigenstate(outcome);
        let n = self.num_qubits;
        let mask = 1usize << (n - 1 - q);
        let mut projected = vec![ZERO; self.dim()];
        for i in 0..self.dim() {
            if i & mask == 0 {
                let j = i | mask;
                let overlap =
                    ket[0].conj() * self.amplitudes[i] + ket[1].conj() * self.amplitudes[j];
                projected[i] = ket[0] * overlap;
                projected[j] = ket[1] * overlap;
            }
        }
        let prob: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        Ok((prob, Self::normalized(projected)))
    }

    pub fn measure_qubit<R: Rng + ?Sized>(
        &self,
        q: usize,
        basis: MeasBasis,
        rng: &mut R,
    ) -> Result<(u8, StateVector)> {
        let (p0, s0) = self.project_qubit(q, basis, 0)?;
        let (p1, s1) = self.project_qubit(q, basis, 1)?;
        let outcome = sample_index(&[p0, p1], rng.random::<f64>()) as u8;
        let state = if outcome == 0 { s0 } else { s1 };
        Ok((
            outcome,
            state.expect("sampled outcome has positive probability"),
        ))
    }

    /// Detaches qubit `q`, which must be in the `outcome` eigenstate of `basis`
    /// (e.g. right after measuring it).
    pub fn remove_qubit(&self, q: usize, basis: MeasBasis, outcome: u8) -> Result<StateVector> {
        self.check_qubit(q)?;
        if self.num_qubits == 1 {
            return Err(QkdError::InvalidQubitCount(0));
        }
        let ket = basis.eigenstate(outcome);
        let n = self.num_qubits;
        let mask = 1usize << (n - 1 - q);
        let low = mask - 1;
        let mut reduced = vec![ZERO; self.dim() / 2];
        for i in 0..self.dim() {
            if i & mask == 0 {
                let j = i | mask;
                let r = ((i >> 1) & !low) | (i & low);
                reduced[r] =
                    ket[0].conj() * self.amplitudes[i] + ket[1].conj() * self.amplitudes[j];
            }
        }
        let kept: f64 = reduced.iter().map(|a| a.norm_sqr()).sum();
        if (kept - 1.0).abs() > NORM_TOL {
            return Err(QkdError::NotSeparable(q));
        }
        Ok(Self {
            num_qubits: n - 1,
            amplitudes: reduced,
        })
    }

    /// Unnormalized `(|b><b|_{q1 q2} (x) I) |self>`.
    pub fn bell_component(
        &self,
        q1: usize,
        q2: usize,
        outcome: BellOutcome,
    ) -> Result<Vec<Amplitude>> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(QkdError::SameQubit(q1));
        }
        let bell = outcome.amplitudes();
        let n = self.num_qubits;
        let m1 = 1usize << (n - 1 - q1);
        let m2 = 1usize << (n - 1 - q2);
        let mut out = vec![ZERO; self.dim()];
        for base in 0..self.dim() {
            if base & (m1 | m2) != 0 {
                continue;
            }
            let idx = |b1: usize, b2: usize| {
                base | (if b1 == 1 { m1 } else { 0 }) | (if b2 == 1 { m2 } else { 0 })
            };
            let mut overlap = ZERO;
            for (k, b) in bell.iter().enumerate() {
                overlap += b.conj() * self.amplitudes[idx(k >> 1, k & 1)];
            }
            for (k, b) in bell.iter().enumerate() {
                out[idx(k >> 1, k & 1)] = b * overlap;
            }
        }
        Ok(out)
    }

    /// Probability of `outcome` on the pair and the renormalized collapsed state.
    pub fn bell_projection(
        &self,
        q1: usize,
        q2: usize,
        outcome: BellOutcome,
    ) -> Result<(f64, Option<StateVector>)> {
        let component = self.bell_component(q1, q2, outcome)?;
        let prob = component.iter().map(|a| a.norm_sqr()).sum();
        Ok((prob, Self::normalized(component)))
    }

    pub fn measure_bell_pair<R: Rng + ?Sized>(
        &self,
        q1: usize,
        q2: usize,
        rng: &mut R,
    ) -> Result<(BellOutcome, StateVector)> {
        let mut probs = [0.0; 4];
        let mut states: [Option<StateVector>; 4] = Default::default();
        for (k, outcome) in BellOutcome::ALL.iter().enumerate() {
            let (p, s) = self.bell_projection(q1, q2, *outcome)?;
            probs[k] = p;
            states[k] = s;
        }
        let k = sample_index(&probs, rng.random::<f64>());
        let collapsed = states[k]
            .take()
            .expect("sampled outcome has positive probability");
        Ok((BellOutcome::ALL[k], collapsed))
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Amplitude> {
        if self.num_qubits != other.num_qubits {
            return Err(QkdError::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }
}
