//! Alice/Bob session pipeline.
//!
//! Alice prepares `n + 2*delta` codewords, the channel applies collective noise
//! (optionally split around an eavesdropper), Bob measures everything in product
//! bases and picks `2*delta` check positions. Basis announcement is only
//! reachable through a passed check: [`announce_bases`] requires a
//! [`CheckResult`] that did not abort, and [`sift`] requires the announcement.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{eve_finalize, Attack, Eavesdropper, EveRecord, EveSummary};
use crate::codewords::{
    build_codeword, check_consistency, decode_key, Decoded, LogicalState, SpatialBasis, Variant,
};
use crate::error::{QkdError, Result};
use crate::noise::{
    collective_dephasing, collective_rotation, sample_noise, DephasingParam, NoisePolicy,
    RotationParam,
};
use crate::statevector::{MeasBasis, StateVector};

pub const DEFAULT_ABORT_THRESHOLD: f64 = 0.01;

const PHOTONS: [usize; 4] = [0, 1, 2, 3];

/// Bits rendered as a `0`/`1` string.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = QkdError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QkdError::InvalidBitChar(other)),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Key quartets.
    pub n: usize,
    /// Check quartets per check basis.
    pub delta: usize,
    pub variant: Variant,
    pub noise_policy: NoisePolicy,
    /// Fraction of each quartet's noise applied before the eavesdropper; the
    /// remainder is applied after her.
    pub noise_split: f64,
    pub abort_threshold: f64,
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(variant: Variant, n: usize, delta: usize, seed: u64) -> Self {
        Self {
            n,
            delta,
            variant,
            noise_policy: NoisePolicy::default(),
            noise_split: 1.0,
            abort_threshold: DEFAULT_ABORT_THRESHOLD,
            seed,
        }
    }

    pub fn with_noise(mut self, policy: NoisePolicy) -> Self {
        self.noise_policy = policy;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.abort_threshold = threshold;
        self
    }

    pub fn with_split(mut self, split: f64) -> Self {
        self.noise_split = split;
        self
    }

    pub fn total(&self) -> usize {
        self.n + 2 * self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(QkdError::InvalidConfig("n must be at least 1".into()));
        }
        if self.delta < 1 {
            return Err(QkdError::InvalidConfig("delta must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) {
            return Err(QkdError::InvalidConfig(format!(
                "abort threshold {} outside [0, 1]",
                self.abort_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.noise_split) {
            return Err(QkdError::InvalidConfig(format!(
                "noise split {} outside [0, 1]",
                self.noise_split
            )));
        }
        self.noise_policy.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliceRecord {
    pub variant: Variant,
    pub key_bits: BitString,
    /// 0 selects the neighbouring pairing, 1 the crossing one.
    pub basis_bits: BitString,
}

impl AliceRecord {
    pub fn len(&self) -> usize {
        self.key_bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.key_bits.is_empty()
    }

    pub fn state(&self, i: usize) -> LogicalState {
        LogicalState::new(
            self.variant,
            SpatialBasis::from_bit(self.basis_bits.0[i]),
            self.key_bits.0[i],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Key,
    CheckZ,
    CheckX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BobOutcome {
    pub basis: MeasBasis,
    pub bits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobRecord {
    /// Sorted positions checked in Z.
    pub check_z: Vec<usize>,
    /// Sorted positions checked in X.
    pub check_x: Vec<usize>,
    pub roles: Vec<Role>,
    pub outcomes: Vec<BobOutcome>,
}

impl BobRecord {
    pub fn key_positions(&self) -> Vec<usize> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Role::Key)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Failure counts over the quartets of one check basis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckTally {
    pub quartets: usize,
    /// Quartets with exactly one failed pair.
    pub one_pair_failed: usize,
    /// Quartets with both pairs failed.
    pub both_pairs_failed: usize,
}

impl CheckTally {
    pub fn record(&mut self, failures: u8) {
        self.quartets += 1;
        match failures {
            0 => {}
            1 => self.one_pair_failed += 1,
            _ => self.both_pairs_failed += 1,
        }
    }

    pub fn merge(&mut self, other: &CheckTally) {
        self.quartets += other.quartets;
        self.one_pair_failed += other.one_pair_failed;
        self.both_pairs_failed += other.both_pairs_failed;
    }

    pub fn failed_pairs(&self) -> usize {
        self.one_pair_failed + 2 * self.both_pairs_failed
    }

    /// Fraction of failed pair checks.
    pub fn rate(&self) -> f64 {
        if self.quartets == 0 {
            0.0
        } else {
            self.failed_pairs() as f64 / (2 * self.quartets) as f64
        }
    }

    /// Standard error of [`CheckTally::rate`] with quartets as independent
    /// units; the two pairs of a quartet are often perfectly correlated.
    pub fn standard_error(&self) -> f64 {
        let n = self.quartets as f64;
        if self.quartets < 2 {
            return 0.0;
        }
        let mean = self.rate();
        let sum_sq = 0.25 * self.one_pair_failed as f64 + self.both_pairs_failed as f64;
        let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub e_x: f64,
    pub e_z: f64,
    pub x_tally: CheckTally,
    pub z_tally: CheckTally,
    pub abort: bool,
}

impl CheckResult {
    pub fn e_a(&self) -> f64 {
        0.5 * (self.e_x + self.e_z)
    }
}

/// Alice's public spatial bases; only obtainable after a passed check.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisAnnouncement {
    bases: Vec<SpatialBasis>,
}

impl BasisAnnouncement {
    pub fn bases(&self) -> &[SpatialBasis] {
        &self.bases
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiftResult {
    pub alice_key: BitString,
    pub bob_key: BitString,
    pub inconsistent_count: usize,
}

/// Classical messages exchanged over the authenticated channel, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "message", rename_all = "snake_case")]
pub enum TranscriptEntry {
    /// Bob -> Alice: which positions were checked in Z and X.
    CheckPositions {
        z: usize,
        x: usize,
    },
    /// Alice -> Bob: logical states at the check positions.
    CheckStateReveal {
        states: usize,
    },
    Abort,
    /// Alice -> Bob: spatial basis of every quartet.
    BasisAnnouncement {
        bases: usize,
    },
    /// Placeholder for error correction and privacy amplification; no-op.
    PostProcessing {
        raw_key_bits: usize,
    },
}

pub fn alice_prepare<R: Rng + ?Sized>(
    cfg: &SessionConfig,
    rng: &mut R,
) -> (AliceRecord, Vec<StateVector>) {
    let total = cfg.total();
    let mut key = Vec::with_capacity(total);
    let mut bases = Vec::with_capacity(total);
    let mut quartets = Vec::with_capacity(total);
    for _ in 0..total {
        let k: bool = rng.random();
        let b: bool = rng.random();
        key.push(k);
        bases.push(b);
        quartets.push(build_codeword(LogicalState::new(
            cfg.variant,
            SpatialBasis::from_bit(b),
            k,
        )));
    }
    let record = AliceRecord {
        variant: cfg.variant,
        key_bits: BitString(key),
        basis_bits: BitString(bases),
    };
    (record, quartets)
}

/// Applies the variant's collective channel with parameter `value`.
pub fn apply_channel(variant: Variant, s: &StateVector, value: f64) -> Result<StateVector> {
    if value == 0.0 {
        return Ok(s.clone());
    }
    match variant {
        Variant::Dephasing => collective_dephasing(s, &PHOTONS, DephasingParam(value)),
        Variant::Rotation => collective_rotation(s, &PHOTONS, RotationParam(value)),
    }
}

pub fn bob_measure<R: Rng + ?Sized>(
    cfg: &SessionConfig,
    quartets: &[StateVector],
    rng: &mut R,
) -> Result<BobRecord> {
    let total = cfg.total();
    if quartets.len() != total {
        return Err(QkdError::QuartetCount {
            expected: total,
            got: quartets.len(),
        });
    }
    let picked = index::sample(rng, total, 2 * cfg.delta).into_vec();
    let mut check_z = picked[..cfg.delta].to_vec();
    let mut check_x = picked[cfg.delta..].to_vec();
    check_z.sort_unstable();
    check_x.sort_unstable();

    let mut roles = vec![Role::Key; total];
    for &i in &check_z {
        roles[i] = Role::CheckZ;
    }
    for &i in &check_x {
        roles[i] = Role::CheckX;
    }
    let outcomes = quartets
        .iter()
        .zip(&roles)
        .map(|(q, role)| {
            let basis = match role {
                Role::Key => cfg.variant.key_basis(),
                Role::CheckZ => MeasBasis::Z,
                Role::CheckX => MeasBasis::X,
            };
            let (bits, _) = q.measure_all(basis, rng);
            BobOutcome { basis, bits }
        })
        .collect();
    Ok(BobRecord {
        check_z,
        check_x,
        roles,
        outcomes,
    })
}

/// Alice's answer to Bob's check-position message.
pub fn alice_reveal(alice: &AliceRecord, positions: &[usize]) -> Vec<LogicalState> {
    positions.iter().map(|&i| alice.state(i)).collect()
}

pub fn run_check(alice: &AliceRecord, bob: &BobRecord, cfg: &SessionConfig) -> CheckResult {
    let tally = |positions: &[usize]| {
        let mut t = CheckTally::default();
        for (&pos, ls) in positions.iter().zip(alice_reveal(alice, positions)) {
            let o = bob.outcomes[pos];
            t.record(check_consistency(ls, o.basis, o.bits).failures());
        }
        t
    };
    let x_tally = tally(&bob.check_x);
    let z_tally = tally(&bob.check_z);
    let e_x = x_tally.rate();
    let e_z = z_tally.rate();
    CheckResult {
        e_x,
        e_z,
        x_tally,
        z_tally,
        abort: 0.5 * (e_x + e_z) > cfg.abort_threshold,
    }
}

/// Alice publishes her basis string; `None` when the check aborted.
pub fn announce_bases(alice: &AliceRecord, check: &CheckResult) -> Option<BasisAnnouncement> {
    (!check.abort).then(|| BasisAnnouncement {
        bases: alice
            .basis_bits
            .0
            .iter()
            .map(|&b| SpatialBasis::from_bit(b))
            .collect(),
    })
}

pub fn sift(alice: &AliceRecord, bob: &BobRecord, announcement: &BasisAnnouncement) -> SiftResult {
    let mut alice_key = Vec::new();
    let mut bob_key = Vec::new();
    let mut inconsistent_count = 0;
    for (i, role) in bob.roles.iter().enumerate() {
        if *role != Role::Key {
            continue;
        }
        match decode_key(alice.variant, announcement.bases[i], bob.outcomes[i].bits) {
            Decoded::Bit(b) => {
                alice_key.push(alice.key_bits.0[i]);
                bob_key.push(b);
            }
            Decoded::Inconsistent => inconsistent_count += 1,
        }
    }
    SiftResult {
        alice_key: BitString(alice_key),
        bob_key: BitString(bob_key),
        inconsistent_count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub config: SessionConfig,
    pub attack: Attack,
    pub observed_e_x: f64,
    pub observed_e_z: f64,
    pub observed_e_a: f64,
    pub x_check: CheckTally,
    pub z_check: CheckTally,
    pub aborted: bool,
    pub alice_raw_key: BitString,
    pub bob_raw_key: BitString,
    pub inconsistent_count: usize,
    pub transcript: Vec<TranscriptEntry>,
    pub eve_stats: Option<EveSummary>,
}

impl SessionResult {
    pub fn keys_agree(&self) -> bool {
        !self.aborted && self.alice_raw_key == self.bob_raw_key
    }

    /// Raw-key bits per transmitted quartet.
    pub fn sifted_fraction(&self) -> f64 {
        self.bob_raw_key.len() as f64 / self.config.total() as f64
    }
}

/// Runs one full session: prepare, channel (noise / Eve / noise), measure,
/// check, then announce and sift unless aborted. Deterministic in `cfg.seed`.
pub fn run_session(cfg: &SessionConfig, attack: &Attack) -> Result<SessionResult> {
    cfg.validate()?;
    let eve = Eavesdropper::new(cfg.variant, *attack)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (alice, quartets) = alice_prepare(cfg, &mut rng);

    let mut record = EveRecord::default();
    let mut received = Vec::with_capacity(quartets.len());
    for (pos, q) in quartets.iter().enumerate() {
        let x = sample_noise(&cfg.noise_policy, &mut rng);
        let before = cfg.noise_split * x;
        let after = x - before;
        let q = apply_channel(cfg.variant, q, before)?;
        let (q, note) = eve.attack_quartet(&q, &mut rng)?;
        if let Some(note) = note {
            record.push(pos, note);
        }
        received.push(apply_channel(cfg.variant, &q, after)?);
    }

    let bob = bob_measure(cfg, &received, &mut rng)?;
    let mut transcript = vec![TranscriptEntry::CheckPositions {
        z: bob.check_z.len(),
        x: bob.check_x.len(),
    }];
    let check = run_check(&alice, &bob, cfg);
    transcript.push(TranscriptEntry::CheckStateReveal {
        states: bob.check_z.len() + bob.check_x.len(),
    });

    let key_positions = bob.key_positions();
    let attacked = attack.kind != crate::adversary::AttackKind::None;
    let (sifted, eve_stats) = match announce_bases(&alice, &check) {
        None => {
            transcript.push(TranscriptEntry::Abort);
            let stats = attacked
                .then(|| eve_finalize(&record, alice.key_bits.as_slice(), None, &key_positions));
            (
                SiftResult {
                    alice_key: BitString::default(),
                    bob_key: BitString::default(),
                    inconsistent_count: 0,
                },
                stats,
            )
        }
        Some(announcement) => {
            transcript.push(TranscriptEntry::BasisAnnouncement {
                bases: announcement.bases().len(),
            });
            let sifted = sift(&alice, &bob, &announcement);
            transcript.push(TranscriptEntry::PostProcessing {
                raw_key_bits: sifted.bob_key.len(),
            });
            let stats = attacked.then(|| {
                eve_finalize(
                    &record,
                    alice.key_bits.as_slice(),
                    Some(announcement.bases()),
                    &key_positions,
                )
            });
            (sifted, stats)
        }
    };

    Ok(SessionResult {
        config: cfg.clone(),
        attack: *attack,
        observed_e_x: check.e_x,
        observed_e_z: check.e_z,
        observed_e_a: check.e_a(),
        x_check: check.x_tally,
        z_check: check.z_tally,
        aborted: check.abort,
        alice_raw_key: sifted.alice_key,
        bob_raw_key: sifted.bob_key,
        inconsistent_count: sifted.inconsistent_count,
        transcript,
        eve_stats,
    })
}
