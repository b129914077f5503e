//! The eight four-photon codewords and their parity bookkeeping.
//!
//! A codeword is two copies of one Bell state laid out over the quartet either
//! as neighbours `(1,2),(3,4)` or crossed `(1,3),(2,4)`. The dephasing variant
//! uses `psi+` / `psi-`, the rotation variant `phi+` / `psi-`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::QkdError;
use crate::statevector::{bit_of, BellOutcome, MeasBasis, StateVector};

pub const QUARTET: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Dephasing,
    Rotation,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Dephasing, Variant::Rotation];

    /// Product basis Bob decodes key bits from.
    pub fn key_basis(self) -> MeasBasis {
        match self {
            Variant::Dephasing => MeasBasis::X,
            Variant::Rotation => MeasBasis::Z,
        }
    }

    /// Bell state carrying `key_bit` on each pair.
    pub fn bell_for_bit(self, key_bit: bool) -> BellOutcome {
        match (self, key_bit) {
            (Variant::Dephasing, false) => BellOutcome::PsiPlus,
            (Variant::Rotation, false) => BellOutcome::PhiPlus,
            (_, true) => BellOutcome::PsiMinus,
        }
    }

    /// Inverse of [`Variant::bell_for_bit`]; `None` outside the alphabet.
    pub fn bit_for_bell(self, bell: BellOutcome) -> Option<bool> {
        [false, true]
            .into_iter()
            .find(|&bit| self.bell_for_bit(bit) == bell)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Dephasing => "dephasing",
            Variant::Rotation => "rotation",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = QkdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dephasing" | "dp" => Ok(Variant::Dephasing),
            "rotation" | "r" => Ok(Variant::Rotation),
            other => Err(QkdError::UnknownIdentifier(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialBasis {
    Neighboring,
    Crossing,
}

impl SpatialBasis {
    pub const ALL: [SpatialBasis; 2] = [SpatialBasis::Neighboring, SpatialBasis::Crossing];

    /// Zero-based photon pairs.
    pub fn pairs(self) -> [(usize, usize); 2] {
        match self {
            SpatialBasis::Neighboring => [(0, 1), (2, 3)],
            SpatialBasis::Crossing => [(0, 2), (1, 3)],
        }
    }

    pub fn other(self) -> SpatialBasis {
        match self {
            SpatialBasis::Neighboring => SpatialBasis::Crossing,
            SpatialBasis::Crossing => SpatialBasis::Neighboring,
        }
    }

    /// Alice's basis-string encoding: 0 neighbouring, 1 crossing.
    pub fn from_bit(bit: bool) -> SpatialBasis {
        if bit {
            SpatialBasis::Crossing
        } else {
            SpatialBasis::Neighboring
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalState {
    pub variant: Variant,
    pub spatial: SpatialBasis,
    pub key_bit: bool,
}

impl LogicalState {
    pub fn new(variant: Variant, spatial: SpatialBasis, key_bit: bool) -> Self {
        Self {
            variant,
            spatial,
            key_bit,
        }
    }

    /// The four codewords of a variant: Psi_0, Psi_1, Phi_0, Phi_1.
    pub fn all(variant: Variant) -> [LogicalState; 4] {
        [
            Self::new(variant, SpatialBasis::Neighboring, false),
            Self::new(variant, SpatialBasis::Neighboring, true),
            Self::new(variant, SpatialBasis::Crossing, false),
            Self::new(variant, SpatialBasis::Crossing, true),
        ]
    }

    /// Position of this state in [`LogicalState::all`].
    pub fn index(self) -> usize {
        let s = match self.spatial {
            SpatialBasis::Neighboring => 0,
            SpatialBasis::Crossing => 2,
        };
        s + self.key_bit as usize
    }

    pub fn bell(self) -> BellOutcome {
        self.variant.bell_for_bit(self.key_bit)
    }
}

impl fmt::Display for LogicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.spatial {
            SpatialBasis::Neighboring => "Psi",
            SpatialBasis::Crossing => "Phi",
        };
        let tag = match self.variant {
            Variant::Dephasing => "dp",
            Variant::Rotation => "r",
        };
        write!(f, "{letter}^{tag}_{}", self.key_bit as u8)
    }
}

/// Product of `first` on pair `pairs[0]` and `second` on pair `pairs[1]`.
pub fn bell_product(
    pairs: [(usize, usize); 2],
    first: BellOutcome,
    second: BellOutcome,
) -> StateVector {
    let b1 = first.amplitudes();
    let b2 = second.amplitudes();
    let amps = (0..1usize << QUARTET)
        .map(|idx| {
            let pick = |(p, q): (usize, usize)| {
                ((bit_of(idx, QUARTET, p) << 1) | bit_of(idx, QUARTET, q)) as usize
            };
            b1[pick(pairs[0])] * b2[pick(pairs[1])]
        })
        .collect();
    StateVector::from_amplitudes(amps).expect("product of Bell states is normalized")
}

pub fn build_codeword(ls: LogicalState) -> StateVector {
    let bell = ls.bell();
    bell_product(ls.spatial.pairs(), bell, bell)
}

/// Two-qubit building blocks: `(|0>_L, |1>_L)` for dephasing, the invariant
/// pair `(phi+, psi-)` for rotation.
pub fn logical_basis_states(variant: Variant) -> (StateVector, StateVector) {
    match variant {
        Variant::Dephasing => (
            StateVector::basis_state(2, "01").expect("valid literal"),
            StateVector::basis_state(2, "10").expect("valid literal"),
        ),
        Variant::Rotation => (BellOutcome::PhiPlus.state(), BellOutcome::PsiMinus.state()),
    }
}

/// Named two-string superpositions that codewords decompose into.
/// `A..D` are X-basis pairs, `E..H` Z-basis pairs; each has squared norm 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentTerm {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

// Computational-basis expansions, scaled: a..d by 1/4, e..h by 1/2.
const TERM_A: [i8; 16] = [1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1];
const TERM_B: [i8; 16] = [1, 0, 0, 1, 0, -1, -1, 0, 0, -1, -1, 0, 1, 0, 0, 1];
const TERM_C: [i8; 16] = [1, 0, 0, -1, 0, 1, -1, 0, 0, -1, 1, 0, -1, 0, 0, 1];
const TERM_D: [i8; 16] = [1, 0, 0, -1, 0, -1, 1, 0, 0, 1, -1, 0, -1, 0, 0, 1];
const TERM_E: [i8; 16] = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1];
const TERM_F: [i8; 16] = [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0];
const TERM_G: [i8; 16] = [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0];
const TERM_H: [i8; 16] = [0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0];

impl ComponentTerm {
    pub const ALL: [ComponentTerm; 8] = [
        ComponentTerm::A,
        ComponentTerm::B,
        ComponentTerm::C,
        ComponentTerm::D,
        ComponentTerm::E,
        ComponentTerm::F,
        ComponentTerm::G,
        ComponentTerm::H,
    ];

    /// The two basis strings whose equal-weight sum forms the term.
    pub fn strings(self) -> (&'static str, &'static str) {
        match self {
            ComponentTerm::A => ("++++", "----"),
            ComponentTerm::B => ("++--", "--++"),
            ComponentTerm::C => ("+-+-", "-+-+"),
            ComponentTerm::D => ("+--+", "-++-"),
            ComponentTerm::E => ("0000", "1111"),
            ComponentTerm::F => ("0011", "1100"),
            ComponentTerm::G => ("0101", "1010"),
            ComponentTerm::H => ("0110", "1001"),
        }
    }

    pub fn amplitudes(self) -> [Complex64; 16] {
        let (table, scale) = match self {
            ComponentTerm::A => (&TERM_A, 0.25),
            ComponentTerm::B => (&TERM_B, 0.25),
            ComponentTerm::C => (&TERM_C, 0.25),
            ComponentTerm::D => (&TERM_D, 0.25),
            ComponentTerm::E => (&TERM_E, 0.5),
            ComponentTerm::F => (&TERM_F, 0.5),
            ComponentTerm::G => (&TERM_G, 0.5),
            ComponentTerm::H => (&TERM_H, 0.5),
        };
        table.map(|v| Complex64::new(f64::from(v) * scale, 0.0))
    }
}

/// Signed component expansion `s1 * t1 + s2 * t2` of a codeword.
///
/// For the dephasing zero-bit codewords the second sign is negative:
/// `|psi+> = (|++> - |-->)/sqrt2`, so `Psi_0 = a - b` and `Phi_0 = a - c`.
pub fn decomposition(ls: LogicalState) -> [(f64, ComponentTerm); 2] {
    use ComponentTerm::*;
    match (ls.variant, ls.spatial, ls.key_bit) {
        (Variant::Dephasing, SpatialBasis::Neighboring, false) => [(1.0, A), (-1.0, B)],
        (Variant::Dephasing, SpatialBasis::Neighboring, true) => [(1.0, C), (-1.0, D)],
        (Variant::Dephasing, SpatialBasis::Crossing, false) => [(1.0, A), (-1.0, C)],
        (Variant::Dephasing, SpatialBasis::Crossing, true) => [(1.0, B), (-1.0, D)],
        (Variant::Rotation, SpatialBasis::Neighboring, false) => [(1.0, E), (1.0, F)],
        (Variant::Rotation, SpatialBasis::Neighboring, true) => [(1.0, G), (-1.0, H)],
        (Variant::Rotation, SpatialBasis::Crossing, false) => [(1.0, E), (1.0, G)],
        (Variant::Rotation, SpatialBasis::Crossing, true) => [(1.0, F), (-1.0, H)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoded {
    Bit(bool),
    Inconsistent,
}

/// True when the two photons of `pair` gave the same eigenvalue.
pub fn parallel(outcome: usize, pair: (usize, usize)) -> bool {
    bit_of(outcome, QUARTET, pair.0) == bit_of(outcome, QUARTET, pair.1)
}

/// Decodes a key-basis outcome under the announced pairing: parallel pairs
/// mean bit 0, antiparallel bit 1, disagreeing pairs are inconsistent.
pub fn decode_key(_variant: Variant, spatial: SpatialBasis, outcome: usize) -> Decoded {
    // Both variants share the rule: psi+ is X-parallel, phi+ is Z-parallel,
    // psi- is antiparallel in either basis.
    let [p1, p2] = spatial.pairs();
    match (parallel(outcome, p1), parallel(outcome, p2)) {
        (true, true) => Decoded::Bit(false),
        (false, false) => Decoded::Bit(true),
        _ => Decoded::Inconsistent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairChecks {
    pub pair1_ok: bool,
    pub pair2_ok: bool,
}

impl PairChecks {
    pub fn failures(self) -> u8 {
        u8::from(!self.pair1_ok) + u8::from(!self.pair2_ok)
    }

    pub fn all_ok(self) -> bool {
        self.pair1_ok && self.pair2_ok
    }
}

/// Whether a pair of `ls`'s own Bell state is parallel when measured in `meas`.
fn expects_parallel(ls: LogicalState, meas: MeasBasis) -> bool {
    match (ls.variant, meas) {
        // psi+/psi- are both antiparallel in Z.
        (Variant::Dephasing, MeasBasis::Z) => false,
        _ => !ls.key_bit,
    }
}

/// Per-pair comparison of an outcome against the support of the announced state.
pub fn check_consistency(ls: LogicalState, meas: MeasBasis, outcome: usize) -> PairChecks {
    let want = expects_parallel(ls, meas);
    let [p1, p2] = ls.spatial.pairs();
    PairChecks {
        pair1_ok: parallel(outcome, p1) == want,
        pair2_ok: parallel(outcome, p2) == want,
    }
}

/// `|<c_i|c_j>|` over the codewords ordered as in [`LogicalState::all`].
pub fn overlap_table(variant: Variant) -> [[f64; 4]; 4] {
    let states = LogicalState::all(variant).map(build_codeword);
    let mut table = [[0.0; 4]; 4];
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            table[i][j] = a.inner_product(b).expect("equal sizes").norm();
        }
    }
    table
}
