//! Entropies and information gains, by exhaustive enumeration and in closed form.
//!
//! All logs are base 2. Inputs `X` (Alice) and `Y` (Bob) are independent and
//! uniform over `{0,1}^n`. An agent's observation is the own leaf that clicked,
//! or silence.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::MzTree;
use crate::protocol::{self, Agent, DetectorAssignment, ProtocolError};

/// Deepest tree `enumerate_gains` will enumerate (`4^n` input pairs).
pub const MAX_ENUM_LEVELS: u32 = 8;
/// Deepest tree the closed forms accept.
pub const MAX_ANALYTIC_LEVELS: u32 = 62;
/// Deepest tree `optimal_m` will scan.
pub const MAX_SCAN_LEVELS: u32 = 24;

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InfoError {
    #[error("probability {0} is negative or not finite")]
    BadProbability(f64),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("n = {n} exceeds the limit {limit} for this computation")]
    TooLarge { n: u32, limit: u32 },
    #[error("n must be at least 1")]
    ZeroLevels,
    #[error("m = {m} outside 0..={max}")]
    ShareOutOfRange { m: u64, max: u64 },
    #[error("maximum of the total gain is not unique for n = {0}")]
    NonUniqueOptimum(u32),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// `p * log2(p)` with `0 log 0 = 0`.
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    outcomes: Vec<(String, f64)>,
}

impl Distribution {
    pub fn new(outcomes: Vec<(String, f64)>) -> Result<Self, InfoError> {
        let mut total = 0.0;
        for (_, p) in &outcomes {
            if !p.is_finite() || *p < 0.0 {
                return Err(InfoError::BadProbability(*p));
            }
            total += p;
        }
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(InfoError::NotNormalized(total));
        }
        Ok(Self { outcomes })
    }

    /// Unlabelled outcomes, labelled by position.
    pub fn from_probs(probs: &[f64]) -> Result<Self, InfoError> {
        Self::new(probs.iter().enumerate().map(|(i, p)| (i.to_string(), *p)).collect())
    }

    pub fn outcomes(&self) -> &[(String, f64)] {
        &self.outcomes
    }
}

pub fn shannon_entropy(dist: &Distribution) -> f64 {
    -dist.outcomes.iter().map(|(_, p)| plogp(*p)).sum::<f64>()
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a u64>, total: u64) -> f64 {
    let total = total as f64;
    -counts.map(|c| plogp(*c as f64 / total)).sum::<f64>()
}

/// `H(O | C)` for equally weighted samples `(c, o)`.
fn conditional_entropy<C: Ord, O: Ord>(samples: impl IntoIterator<Item = (C, O)>) -> f64 {
    let mut groups: BTreeMap<C, BTreeMap<O, u64>> = BTreeMap::new();
    let mut total = 0u64;
    for (c, o) in samples {
        *groups.entry(c).or_default().entry(o).or_default() += 1;
        total += 1;
    }
    groups
        .values()
        .map(|counts| {
            let size: u64 = counts.values().sum();
            size as f64 / total as f64 * entropy_of_counts(counts.values(), size)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainReport {
    /// `I(Y;A|X)`: what Alice learns about `Y`.
    pub i_a: f64,
    /// `I(X;B|Y)`: what Bob learns about `X`.
    pub i_b: f64,
    pub total: f64,
    /// Marginal entropy of Alice's observation.
    pub h_a: f64,
    /// Marginal entropy of Bob's observation.
    pub h_b: f64,
}

/// An agent's observation: `Some(leaf)` for an own click, `None` for silence.
fn observation(assignment: &DetectorAssignment, agent: Agent, leaf: u64) -> Option<u64> {
    (assignment.owner(leaf) == agent).then_some(leaf)
}

fn check_enum(n: u32) -> Result<MzTree, InfoError> {
    if n == 0 {
        return Err(InfoError::ZeroLevels);
    }
    if n > MAX_ENUM_LEVELS {
        return Err(InfoError::TooLarge { n, limit: MAX_ENUM_LEVELS });
    }
    Ok(MzTree::new(n).map_err(ProtocolError::from)?)
}

/// Every `(x, y)` pair with the leaf it routes to.
fn routed_pairs(tree: &MzTree) -> Result<Vec<(BitString, BitString, u64)>, InfoError> {
    let n = tree.levels();
    let mut out = Vec::with_capacity(1usize << (2 * n));
    for x in BitString::all(n).map_err(ProtocolError::from)? {
        for y in BitString::all(n).map_err(ProtocolError::from)? {
            let (_, leaf) = crate::circuit::parity_route(&x, &y).map_err(ProtocolError::from)?;
            out.push((x, y, leaf));
        }
    }
    Ok(out)
}

/// Exact conditional mutual informations by enumerating all `4^n` input pairs.
pub fn enumerate_gains(n: u32, assignment: &DetectorAssignment) -> Result<GainReport, InfoError> {
    let tree = check_enum(n)?;
    if assignment.leaf_count() != tree.leaf_count() {
        return Err(ProtocolError::AssignmentSize {
            got: assignment.owners().len(),
            expected: tree.leaf_count(),
        }
        .into());
    }
    let pairs = routed_pairs(&tree)?;

    let mutual = |agent: Agent| {
        let obs = |leaf| observation(assignment, agent, leaf);
        // The agent conditions on its own input.
        let own = |x: &BitString, y: &BitString| match agent {
            Agent::Alice => x.value(),
            Agent::Bob => y.value(),
        };
        let h_given_own = conditional_entropy(pairs.iter().map(|(x, y, l)| (own(x, y), obs(*l))));
        let h_given_both =
            conditional_entropy(pairs.iter().map(|(x, y, l)| ((x.value(), y.value()), obs(*l))));
        let h_marginal = conditional_entropy(pairs.iter().map(|(_, _, l)| ((), obs(*l))));
        (h_given_own - h_given_both, h_marginal)
    };

    let (i_a, h_a) = mutual(Agent::Alice);
    let (i_b, h_b) = mutual(Agent::Bob);
    Ok(GainReport { i_a, i_b, total: i_a + i_b, h_a, h_b })
}

fn check_share(n: u32, m: u64) -> Result<f64, InfoError> {
    if n == 0 {
        return Err(InfoError::ZeroLevels);
    }
    if n > MAX_ANALYTIC_LEVELS {
        return Err(InfoError::TooLarge { n, limit: MAX_ANALYTIC_LEVELS });
    }
    let leaves = 1u64 << n;
    if m > leaves {
        return Err(InfoError::ShareOutOfRange { m, max: leaves });
    }
    Ok(leaves as f64)
}

/// Entropy of Bob's observation when he holds `m` of the `2^n` detectors:
/// `n - (1 - m/2^n) log2(2^n - m)`.
pub fn analytic_h_b(n: u32, m: u64) -> Result<f64, InfoError> {
    let leaves = check_share(n, m)?;
    let rest = leaves - m as f64;
    let tail = if rest > 0.0 { (rest / leaves) * rest.log2() } else { 0.0 };
    Ok(f64::from(n) - tail)
}

/// Entropy of Alice's observation, who holds the other `2^n - m` detectors.
pub fn analytic_h_a(n: u32, m: u64) -> Result<f64, InfoError> {
    check_share(n, m)?;
    analytic_h_b(n, (1u64 << n) - m)
}

/// `2n - (m/2^n) log2 m - (1 - m/2^n) log2(2^n - m)`.
pub fn analytic_total(n: u32, m: u64) -> Result<f64, InfoError> {
    let leaves = check_share(n, m)?;
    let q = m as f64 / leaves;
    let bob = if m > 0 { q * (m as f64).log2() } else { 0.0 };
    let rest = leaves - m as f64;
    let alice = if rest > 0.0 { (1.0 - q) * rest.log2() } else { 0.0 };
    Ok(2.0 * f64::from(n) - bob - alice)
}

/// Bob's share maximising the total gain, found by scanning every `m`.
pub fn optimal_m(n: u32) -> Result<u64, InfoError> {
    if n > MAX_SCAN_LEVELS {
        return Err(InfoError::TooLarge { n, limit: MAX_SCAN_LEVELS });
    }
    let mut best = (0u64, f64::NEG_INFINITY);
    let mut ties = 0;
    for m in 0..=(1u64 << n) {
        let v = analytic_total(n, m)?;
        if v > best.1 {
            best = (m, v);
            ties = 0;
        } else if v == best.1 {
            ties += 1;
        }
    }
    if ties > 0 {
        return Err(InfoError::NonUniqueOptimum(n));
    }
    Ok(best.0)
}

/// Probability that one of `agent`'s detectors clicks, by enumeration.
pub fn click_probability(assignment: &DetectorAssignment, agent: Agent) -> Result<f64, InfoError> {
    let tree = check_enum(assignment.levels())?;
    let pairs = routed_pairs(&tree)?;
    let hits = pairs.iter().filter(|(_, _, l)| assignment.owner(*l) == agent).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Average gain of the silent agent `silent`, over the input pairs on which
/// the other agent's detector clicks. `None` if the other agent never clicks.
pub fn conditional_silent_gain(
    assignment: &DetectorAssignment,
    silent: Agent,
) -> Result<Option<f64>, InfoError> {
    let tree = check_enum(assignment.levels())?;
    let mut sum = 0.0;
    let mut count = 0u64;
    for (x, y, leaf) in routed_pairs(&tree)? {
        if assignment.owner(leaf) == silent {
            continue;
        }
        let own = match silent {
            Agent::Alice => x,
            Agent::Bob => y,
        };
        sum += protocol::decode_silent(assignment, &own, silent)?.bits_gained;
        count += 1;
    }
    Ok((count > 0).then(|| sum / count as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub case: u8,
    pub pattern: String,
    pub bob_gain: f64,
    pub reference_gain: f64,
}

/// The eight two-level ownership patterns (leaves 1..4) with Bob's reference
/// gain given an Alice click.
pub fn table1_cases() -> [(&'static str, f64); 8] {
    [
        ("AABB", 1.0),
        ("BBAA", 1.0),
        ("ABAB", 1.0),
        ("BABA", 1.0),
        ("BAAB", 1.0),
        ("ABBA", 1.0),
        ("ABBB", 2.0),
        ("BAAA", 2.0 - 3f64.log2()),
    ]
}

/// Bob's average gain, conditioned on an Alice click, for each of the eight patterns.
pub fn table1_report() -> Result<Vec<Table1Row>, InfoError> {
    table1_cases()
        .iter()
        .enumerate()
        .map(|(i, (pattern, reference))| {
            let assignment = DetectorAssignment::parse_pattern(pattern)?;
            let gain = conditional_silent_gain(&assignment, Agent::Bob)?
                .expect("every pattern gives Alice at least one detector");
            Ok(Table1Row {
                case: i as u8 + 1,
                pattern: pattern.chars().map(String::from).collect::<Vec<_>>().join(","),
                bob_gain: gain,
                reference_gain: *reference,
            })
        })
        .collect()
}
