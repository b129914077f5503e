//! Eavesdropping strategies acting on the quantum channel, one quartet at a time.
//!
//! Eve never sees the spatial bases before they are announced. Each intercepted
//! quartet leaves an [`EveNote`] holding what she observed and the likelihood
//! of that observation under each codeword; key guesses are derived from the
//! note alone, with the announcement as the only extra input.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codewords::{bell_product, build_codeword, LogicalState, SpatialBasis, Variant};
use crate::error::{QkdError, Result};
use crate::statevector::{BellOutcome, MeasBasis, StateVector};

/// Likelihood differences below this are treated as ties.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AttackKind {
    None,
    /// Measure every photon in a product basis, resend the observed product state.
    MeasureResendProduct(MeasBasis),
    /// Measure in a product basis, resend a codeword consistent with the result.
    MeasureResendEntangled(MeasBasis),
    /// Bell-measure under a guessed pairing, resend Bell pairs or a switched codeword.
    BellResend,
    /// Extract the parity of two photons onto an ancilla.
    CnotParity(MeasBasis),
}

impl AttackKind {
    pub fn id(self) -> &'static str {
        use AttackKind::*;
        use MeasBasis::{X, Z};
        match self {
            None => "none",
            MeasureResendProduct(X) => "mrp-x",
            MeasureResendProduct(Z) => "mrp-z",
            MeasureResendEntangled(X) => "mre-x",
            MeasureResendEntangled(Z) => "mre-z",
            BellResend => "bell",
            CnotParity(X) => "cnot-x",
            CnotParity(Z) => "cnot-z",
        }
    }

    pub fn description(self) -> &'static str {
        use AttackKind::*;
        use MeasBasis::{X, Z};
        match self {
            None => "no eavesdropper",
            MeasureResendProduct(X) => "MB: X, resend: product state",
            MeasureResendProduct(Z) => "MB: Z, resend: product state",
            MeasureResendEntangled(X) => "MB: X, resend: entangled state",
            MeasureResendEntangled(Z) => "MB: Z, resend: entangled state",
            BellResend => "MB: Bell, resend: entangled state",
            CnotParity(X) => "CNOT on auxiliary on X basis",
            CnotParity(Z) => "CNOT on auxiliary on Z basis",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AttackKind {
    type Err = QkdError;

    fn from_str(s: &str) -> Result<Self> {
        use AttackKind::*;
        use MeasBasis::{X, Z};
        Ok(match s {
            "none" => None,
            "mrp-x" => MeasureResendProduct(X),
            "mrp-z" => MeasureResendProduct(Z),
            "mre-x" => MeasureResendEntangled(X),
            "mre-z" => MeasureResendEntangled(Z),
            "bell" => BellResend,
            "cnot-x" => CnotParity(X),
            "cnot-z" => CnotParity(Z),
            other => return Err(QkdError::UnknownIdentifier(other.to_owned())),
        })
    }
}

impl From<AttackKind> for String {
    fn from(kind: AttackKind) -> String {
        kind.id().to_owned()
    }
}

impl TryFrom<String> for AttackKind {
    type Error = QkdError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Attack rows analysed for each variant, in table order.
pub fn table_rows(variant: Variant) -> &'static [AttackKind] {
    use AttackKind::*;
    use MeasBasis::{X, Z};
    match variant {
        Variant::Dephasing => &[
            MeasureResendProduct(X),
            MeasureResendEntangled(X),
            BellResend,
            CnotParity(X),
        ],
        Variant::Rotation => &[
            MeasureResendProduct(X),
            MeasureResendEntangled(X),
            MeasureResendProduct(Z),
            MeasureResendEntangled(Z),
            BellResend,
            CnotParity(Z),
        ],
    }
}

pub fn is_supported(variant: Variant, kind: AttackKind) -> bool {
    kind == AttackKind::None || table_rows(variant).contains(&kind)
}

/// Which two photons feed the parity ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnotPair {
    /// Photons 3 and 4 (parity of the second neighbouring pair).
    #[default]
    Photons34,
    /// Photons 2 and 4 (parity of the second crossing pair).
    Photons24,
}

impl CnotPair {
    pub fn controls(self) -> (usize, usize) {
        match self {
            CnotPair::Photons34 => (2, 3),
            CnotPair::Photons24 => (1, 3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attack {
    pub kind: AttackKind,
    /// Probability that a given quartet is intercepted.
    pub intercept_probability: f64,
    #[serde(default)]
    pub cnot_pair: CnotPair,
}

impl Attack {
    pub fn new(kind: AttackKind) -> Self {
        Self {
            kind,
            intercept_probability: 1.0,
            cnot_pair: CnotPair::default(),
        }
    }

    pub fn none() -> Self {
        Self::new(AttackKind::None)
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.intercept_probability = p;
        self
    }

    pub fn with_cnot_pair(mut self, pair: CnotPair) -> Self {
        self.cnot_pair = pair;
        self
    }

    pub fn validate(&self, variant: Variant) -> Result<()> {
        if !(0.0..=1.0).contains(&self.intercept_probability) {
            return Err(QkdError::InvalidConfig(format!(
                "interception probability {} outside [0, 1]",
                self.intercept_probability
            )));
        }
        if !is_supported(variant, self.kind) {
            return Err(QkdError::UnsupportedAttack {
                variant,
                attack: self.kind,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    Product {
        basis: MeasBasis,
        bits: usize,
    },
    Bell {
        pairing: SpatialBasis,
        first: BellOutcome,
        second: BellOutcome,
    },
    Ancilla {
        basis: MeasBasis,
        outcome: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resent {
    Product {
        basis: MeasBasis,
        bits: usize,
    },
    Codeword {
        state: LogicalState,
    },
    BellPairs {
        pairing: SpatialBasis,
        first: BellOutcome,
        second: BellOutcome,
    },
    /// Post-measurement residual of the probed quartet.
    Residual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveNote {
    pub variant: Variant,
    pub observation: Observation,
    pub resent: Resent,
    /// P(observation | codeword), indexed like [`LogicalState::all`].
    pub likelihoods: [f64; 4],
    /// Coins for tied posteriors: before announcement, after neighbouring,
    /// after crossing. Drawn at interception time.
    pub tie_breaks: [bool; 3],
}

impl EveNote {
    /// Eve's key-bit guess, optionally using the announced spatial basis.
    pub fn guess(&self, announced: Option<SpatialBasis>) -> bool {
        let mut weight = [0.0f64; 2];
        for ls in LogicalState::all(self.variant) {
            if announced.is_none_or(|a| a == ls.spatial) {
                weight[ls.key_bit as usize] += self.likelihoods[ls.index()];
            }
        }
        if (weight[0] - weight[1]).abs() <= TIE_TOL {
            let coin = match announced {
                None => 0,
                Some(SpatialBasis::Neighboring) => 1,
                Some(SpatialBasis::Crossing) => 2,
            };
            self.tie_breaks[coin]
        } else {
            weight[1] > weight[0]
        }
    }
}

/// Eve's notes for the intercepted positions, in transmission order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EveRecord {
    entries: Vec<(usize, EveNote)>,
}

impl EveRecord {
    pub fn push(&mut self, position: usize, note: EveNote) {
        debug_assert!(self.entries.last().is_none_or(|(p, _)| *p < position));
        self.entries.push((position, note));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, EveNote)] {
        &self.entries
    }

    pub fn get(&self, position: usize) -> Option<&EveNote> {
        self.entries
            .binary_search_by_key(&position, |(p, _)| *p)
            .ok()
            .map(|i| &self.entries[i].1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveSummary {
    /// Quartets Eve intercepted over the whole session.
    pub intercepted: usize,
    /// Intercepted quartets among the evaluated key positions.
    pub evaluated: usize,
    pub pre_announcement_correct: usize,
    pub pre_accuracy: Option<f64>,
    pub post_announcement_correct: Option<usize>,
    pub post_accuracy: Option<f64>,
}

/// Scores Eve's guesses at `key_positions` against Alice's key. Post-announcement
/// figures are only available when the bases were actually announced.
pub fn eve_finalize(
    record: &EveRecord,
    alice_key: &[bool],
    announced: Option<&[SpatialBasis]>,
    key_positions: &[usize],
) -> EveSummary {
    let mut evaluated = 0;
    let mut pre = 0;
    let mut post = 0;
    for &pos in key_positions {
        let Some(note) = record.get(pos) else {
            continue;
        };
        evaluated += 1;
        if note.guess(None) == alice_key[pos] {
            pre += 1;
        }
        if let Some(bases) = announced {
            if note.guess(Some(bases[pos])) == alice_key[pos] {
                post += 1;
            }
        }
    }
    let ratio = |k: usize| (evaluated > 0).then(|| k as f64 / evaluated as f64);
    EveSummary {
        intercepted: record.len(),
        evaluated,
        pre_announcement_correct: pre,
        pre_accuracy: ratio(pre),
        post_announcement_correct: announced.map(|_| post),
        post_accuracy: announced.and_then(|_| ratio(post)),
    }
}

/// An eavesdropper bound to one protocol variant.
#[derive(Debug, Clone)]
pub struct Eavesdropper {
    variant: Variant,
    attack: Attack,
    codewords: [StateVector; 4],
}

impl Eavesdropper {
    pub fn new(variant: Variant, attack: Attack) -> Result<Self> {
        attack.validate(variant)?;
        Ok(Self {
            variant,
            attack,
            codewords: LogicalState::all(variant).map(build_codeword),
        })
    }

    pub fn attack(&self) -> &Attack {
        &self.attack
    }

    /// Intercepts one quartet. Returns the state forwarded to Bob and, when the
    /// quartet was actually attacked, Eve's note.
    pub fn attack_quartet<R: Rng + ?Sized>(
        &self,
        s: &StateVector,
        rng: &mut R,
    ) -> Result<(StateVector, Option<EveNote>)> {
        if s.num_qubits() != 4 {
            return Err(QkdError::DimensionMismatch {
                left: 4,
                right: s.num_qubits(),
            });
        }
        if self.attack.kind == AttackKind::None
            || !rng.random_bool(self.attack.intercept_probability)
        {
            return Ok((s.clone(), None));
        }
        let (out, observation, resent, likelihoods) = match self.attack.kind {
            AttackKind::None => unreachable!("handled above"),
            AttackKind::MeasureResendProduct(basis) => {
                let (bits, collapsed) = s.measure_all(basis, rng);
                let lik = self.product_likelihoods(basis, bits);
                (
                    collapsed,
                    Observation::Product { basis, bits },
                    Resent::Product { basis, bits },
                    lik,
                )
            }
            AttackKind::MeasureResendEntangled(basis) => {
                let (bits, _) = s.measure_all(basis, rng);
                let lik = self.product_likelihoods(basis, bits);
                let candidates: Vec<LogicalState> = LogicalState::all(self.variant)
                    .into_iter()
                    .filter(|ls| lik[ls.index()] > TIE_TOL)
                    .collect();
                let pick = candidates[rng.random_range(0..candidates.len())];
                (
                    build_codeword(pick),
                    Observation::Product { basis, bits },
                    Resent::Codeword { state: pick },
                    lik,
                )
            }
            AttackKind::BellResend => self.bell_resend(s, rng)?,
            AttackKind::CnotParity(direction) => {
                let (c1, c2) = self.attack.cnot_pair.controls();
                let probed = parity_probe(s, c1, c2, direction)?;
                let (outcome, collapsed) = probed.measure_qubit(4, direction, rng)?;
                let residual = collapsed.remove_qubit(4, direction, outcome)?;
                let mut lik = [0.0; 4];
                for (k, c) in self.codewords.iter().enumerate() {
                    lik[k] = parity_probe(c, c1, c2, direction)?
                        .project_qubit(4, direction, outcome)?
                        .0;
                }
                (
                    residual,
                    Observation::Ancilla {
                        basis: direction,
                        outcome,
                    },
                    Resent::Residual,
                    lik,
                )
            }
        };
        let tie_breaks = [
            rng.random_bool(0.5),
            rng.random_bool(0.5),
            rng.random_bool(0.5),
        ];
        let note = EveNote {
            variant: self.variant,
            observation,
            resent,
            likelihoods,
            tie_breaks,
        };
        Ok((out, Some(note)))
    }

    fn product_likelihoods(&self, basis: MeasBasis, bits: usize) -> [f64; 4] {
        let mut lik = [0.0; 4];
        for (k, c) in self.codewords.iter().enumerate() {
            lik[k] = c.probabilities(basis)[bits];
        }
        lik
    }

    fn bell_resend<R: Rng + ?Sized>(
        &self,
        s: &StateVector,
        rng: &mut R,
    ) -> Result<(StateVector, Observation, Resent, [f64; 4])> {
        let pairing = if rng.random_bool(0.5) {
            SpatialBasis::Crossing
        } else {
            SpatialBasis::Neighboring
        };
        let [(a1, b1), (a2, b2)] = pairing.pairs();
        let (first, s1) = s.measure_bell_pair(a1, b1, rng)?;
        let (second, s2) = s1.measure_bell_pair(a2, b2, rng)?;
        let observed = bell_product(pairing.pairs(), first, second);
        let mut lik = [0.0; 4];
        for (k, c) in self.codewords.iter().enumerate() {
            lik[k] = observed.fidelity(c)?;
        }
        let observation = Observation::Bell {
            pairing,
            first,
            second,
        };

        let alphabet = |b| self.variant.bit_for_bell(b).is_some();
        if alphabet(first) && alphabet(second) {
            return Ok((
                s2,
                observation,
                Resent::BellPairs {
                    pairing,
                    first,
                    second,
                },
                lik,
            ));
        }
        // An off-alphabet outcome exposes the wrong pairing: re-prepare a
        // codeword on the other one, using the swapping statistics when they
        // single out a key bit.
        let switched = pairing.other();
        let w = |bit| lik[LogicalState::new(self.variant, switched, bit).index()];
        let bit = match (w(false) > TIE_TOL, w(true) > TIE_TOL) {
            (true, false) => false,
            (false, true) => true,
            _ => rng.random_bool(0.5),
        };
        let state = LogicalState::new(self.variant, switched, bit);
        Ok((
            build_codeword(state),
            observation,
            Resent::Codeword { state },
            lik,
        ))
    }
}

/// Appends the ancilla (|+> or |0>) as qubit 4 and applies the two controlled
/// flips from `c1` and `c2` onto it in `direction`.
pub fn parity_probe(
    s: &StateVector,
    c1: usize,
    c2: usize,
    direction: MeasBasis,
) -> Result<StateVector> {
    let ancilla = StateVector::product_eigenstate(1, direction, 0)?;
    s.tensor(&ancilla)?
        .apply_cnot(c1, 4, direction)?
        .apply_cnot(c2, 4, direction)
}
