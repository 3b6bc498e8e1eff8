//! Exact, seeded samplers for the four measured distributions.
//!
//! Every sampler draws i.i.d. outcomes from a closed-form density through a
//! mixture decomposition (plus rejection where the mixture has a negative
//! component), so no burn-in or autocorrelation is involved.
//!
//! Randomness comes from [`SimRng`] (ChaCha8) seeded with a 64-bit seed.
//! Independent streams are obtained with [`derive_seed`], which makes a run's
//! output independent of how work is split across threads.

mod io;
mod samplers;

use serde::{Deserialize, Serialize};

use crate::error::{KqpdError, Result};

pub use io::{parse_record_csv, read_record_csv, record_to_csv, write_record, write_record_csv, RecordManifest};
pub use samplers::{
    sample_p_single, sample_spin_joint, sample_spin_joint_for, sample_spin_single, sample_spin_single_for,
    sample_x_single, sample_xp_joint,
};

/// Random number generator used by every sampler.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Deterministic generator for `seed`.
pub fn rng_from_seed(seed: u64) -> SimRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`:
/// `splitmix64(master + (index + 1) · 0x9E3779B97F4A7C15)` in wrapping
/// arithmetic. For a fixed master the map is injective in `index`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    FockXp,
    Spin,
}

impl System {
    pub fn as_str(&self) -> &'static str {
        match self {
            System::FockXp => "fock_xp",
            System::Spin => "spin",
        }
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for System {
    type Err = KqpdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fock_xp" => Ok(System::FockXp),
            "spin" => Ok(System::Spin),
            other => Err(KqpdError::Config(format!("unknown system '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Joint,
    #[serde(rename = "single_1")]
    Single1,
    #[serde(rename = "single_2")]
    Single2,
}

impl RecordKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordKind::Joint => "joint",
            RecordKind::Single1 => "single_1",
            RecordKind::Single2 => "single_2",
        }
    }

    /// Number of reals per outcome.
    pub fn arity(&self) -> usize {
        match self {
            RecordKind::Joint => 2,
            _ => 1,
        }
    }

    pub fn is_single(&self) -> bool {
        !matches!(self, RecordKind::Joint)
    }
}

impl std::fmt::Display for RecordKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RecordKind {
    type Err = KqpdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(RecordKind::Joint),
            "single_1" => Ok(RecordKind::Single1),
            "single_2" => Ok(RecordKind::Single2),
            other => Err(KqpdError::Format(format!("unknown record kind '{other}'"))),
        }
    }
}

/// A batch of sampled outcomes with its provenance. Joint outcomes are stored
/// interleaved `[a1, a2, a1, a2, ...]`; spin `σ2` is stored as `±1.0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub system: System,
    pub kind: RecordKind,
    pub chi: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl MeasurementRecord {
    pub fn new(system: System, kind: RecordKind, chi: f64, seed: u64, values: Vec<f64>) -> Result<Self> {
        if values.len() % kind.arity() != 0 {
            return Err(KqpdError::Format(format!(
                "{} values do not form {}-tuples",
                values.len(),
                kind.arity()
            )));
        }
        Ok(MeasurementRecord { system, kind, chi, seed, values })
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.values.len() / self.kind.arity()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Outcomes of a single-observable record.
    pub fn singles(&self) -> Result<&[f64]> {
        if !self.kind.is_single() {
            return Err(KqpdError::WrongRecord { expected: "single record".into(), found: self.kind.to_string() });
        }
        Ok(&self.values)
    }

    /// Outcome pairs of a joint record.
    pub fn pairs(&self) -> Result<impl Iterator<Item = (f64, f64)> + '_> {
        if self.kind != RecordKind::Joint {
            return Err(KqpdError::WrongRecord { expected: "joint record".into(), found: self.kind.to_string() });
        }
        Ok(self.values.chunks_exact(2).map(|c| (c[0], c[1])))
    }

    pub(crate) fn expect(&self, system: System, kind_is_joint: bool) -> Result<()> {
        if self.system != system || (self.kind == RecordKind::Joint) != kind_is_joint {
            let expected = format!("{} {}", system, if kind_is_joint { "joint" } else { "single" });
            return Err(KqpdError::WrongRecord { expected, found: format!("{} {}", self.system, self.kind) });
        }
        if self.is_empty() {
            return Err(KqpdError::EmptyRecord);
        }
        Ok(())
    }
}

pub(crate) fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(KqpdError::InvalidParameter("sample count must be at least 1".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn derived_seeds_are_distinct() {
        let seeds: HashSet<u64> = (0..10_000).map(|i| derive_seed(2019, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn derive_seed_is_pinned() {
        // fixed values guard the cross-version stream contract
        assert_eq!(splitmix64(0), 0);
        assert_eq!(derive_seed(0, 0), splitmix64(0x9E37_79B9_7F4A_7C15));
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn record_accessors_check_kind() {
        let joint = MeasurementRecord::new(System::FockXp, RecordKind::Joint, 1.0, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(joint.len(), 2);
        assert!(joint.singles().is_err());
        assert_eq!(joint.pairs().unwrap().collect::<Vec<_>>(), vec![(1.0, 2.0), (3.0, 4.0)]);
        assert!(MeasurementRecord::new(System::Spin, RecordKind::Joint, 1.0, 1, vec![1.0]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for s in [System::FockXp, System::Spin] {
            assert_eq!(s.as_str().parse::<System>().unwrap(), s);
        }
        for k in [RecordKind::Joint, RecordKind::Single1, RecordKind::Single2] {
            assert_eq!(k.as_str().parse::<RecordKind>().unwrap(), k);
        }
    }
}
