//! From measured bitstrings to channel guesses and success estimates.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Hypothesis, MeasurementKind};
use crate::error::{Error, Result};
use crate::simulator::{Distribution, OutcomeCounts};

/// Result of a rule before tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Decided(Hypothesis),
    Tie,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// Membership lookup; outcomes in neither set go to the nearer set in
    /// Hamming distance, equal distance is a tie.
    OutcomeSets { h0: BTreeSet<u64>, h1: BTreeSet<u64> },
    /// `H0` iff the XOR of all bits is 0.
    Parity,
    /// `H0` if zeros outnumber ones, `H1` if ones outnumber zeros.
    MajorityBits,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationRule {
    n_bits: usize,
    kind: RuleKind,
}

impl ClassificationRule {
    pub fn parity(n_bits: usize) -> Self {
        Self { n_bits, kind: RuleKind::Parity }
    }

    pub fn majority_bits(n_bits: usize) -> Self {
        Self { n_bits, kind: RuleKind::MajorityBits }
    }

    pub fn outcome_sets(n_bits: usize, h0: BTreeSet<u64>, h1: BTreeSet<u64>) -> Result<Self> {
        if let Some(x) = h0.intersection(&h1).next() {
            return Err(Error::InvalidConfig(format!("outcome {x:#b} is in both sets")));
        }
        let limit = if n_bits >= 64 { u64::MAX } else { (1u64 << n_bits) - 1 };
        if h0.iter().chain(&h1).any(|&x| x > limit) {
            return Err(Error::LengthMismatch { expected: n_bits, found: 64 });
        }
        Ok(Self { n_bits, kind: RuleKind::OutcomeSets { h0, h1 } })
    }

    /// Maximum-likelihood sets from the two noiseless output distributions;
    /// outcomes equally likely under both are left out.
    pub fn from_distributions(d0: &Distribution, d1: &Distribution) -> Result<Self> {
        if d0.n_bits() != d1.n_bits() {
            return Err(Error::LengthMismatch { expected: d0.n_bits(), found: d1.n_bits() });
        }
        let support: BTreeSet<u64> = d0.support(1e-12).into_iter().chain(d1.support(1e-12)).collect();
        let (mut h0, mut h1) = (BTreeSet::new(), BTreeSet::new());
        for x in support {
            let (p0, p1) = (d0.prob(x), d1.prob(x));
            if p0 > p1 + 1e-12 {
                h0.insert(x);
            } else if p1 > p0 + 1e-12 {
                h1.insert(x);
            }
        }
        Self::outcome_sets(d0.n_bits(), h0, h1)
    }

    /// Default rule for each measurement: outcome sets for the
    /// short measurement, majority of bits for XOR, parity for parity.
    pub fn for_measurement(kind: MeasurementKind, d0: &Distribution, d1: &Distribution) -> Result<Self> {
        match kind {
            MeasurementKind::Short => Self::from_distributions(d0, d1),
            MeasurementKind::Xor => Ok(Self::majority_bits(d0.n_bits())),
            MeasurementKind::Parity => Ok(Self::parity(d0.n_bits())),
        }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn verdict(&self, bits: u64, len: usize) -> Result<Verdict> {
        if len != self.n_bits {
            return Err(Error::LengthMismatch { expected: self.n_bits, found: len });
        }
        let ones = bits.count_ones() as usize;
        Ok(match &self.kind {
            RuleKind::Parity if ones.is_multiple_of(2) => Verdict::Decided(Hypothesis::H0),
            RuleKind::Parity => Verdict::Decided(Hypothesis::H1),
            RuleKind::MajorityBits => match (len - ones).cmp(&ones) {
                std::cmp::Ordering::Greater => Verdict::Decided(Hypothesis::H0),
                std::cmp::Ordering::Less => Verdict::Decided(Hypothesis::H1),
                std::cmp::Ordering::Equal => Verdict::Tie,
            },
            RuleKind::OutcomeSets { h0, h1 } => {
                if h0.contains(&bits) {
                    Verdict::Decided(Hypothesis::H0)
                } else if h1.contains(&bits) {
                    Verdict::Decided(Hypothesis::H1)
                } else {
                    let nearest = |set: &BTreeSet<u64>| set.iter().map(|x| (x ^ bits).count_ones()).min();
                    match (nearest(h0), nearest(h1)) {
                        (Some(a), Some(b)) if a < b => Verdict::Decided(Hypothesis::H0),
                        (Some(a), Some(b)) if b < a => Verdict::Decided(Hypothesis::H1),
                        (Some(_), None) => Verdict::Decided(Hypothesis::H0),
                        (None, Some(_)) => Verdict::Decided(Hypothesis::H1),
                        _ => Verdict::Tie,
                    }
                }
            }
        })
    }
}

fn coin<R: Rng + ?Sized>(rng: &mut R) -> Hypothesis {
    if rng.random_bool(0.5) {
        Hypothesis::H0
    } else {
        Hypothesis::H1
    }
}

/// Guess for one measured bitstring of length `len`; ties take one coin flip.
pub fn classify<R: Rng + ?Sized>(bits: u64, len: usize, rule: &ClassificationRule, rng: &mut R) -> Result<Hypothesis> {
    Ok(match rule.verdict(bits, len)? {
        Verdict::Decided(h) => h,
        Verdict::Tie => coin(rng),
    })
}

pub fn majority_vote<R: Rng + ?Sized>(labels: &[Hypothesis], rng: &mut R) -> Result<Hypothesis> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let k = labels.iter().filter(|&&h| h == Hypothesis::H0).count();
    let rest = labels.len() - k;
    Ok(match k.cmp(&rest) {
        std::cmp::Ordering::Greater => Hypothesis::H0,
        std::cmp::Ordering::Less => Hypothesis::H1,
        std::cmp::Ordering::Equal => coin(rng),
    })
}

fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    // ln C(n, k) by summing logs keeps large n finite.
    let ln_c: f64 = (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum();
    let ln_p = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let ln_q = if k == n { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
    (ln_c + ln_p + ln_q).exp()
}

/// Success of a fair-tie majority vote over `w` independent guesses that are
/// each right with probability `p_single`.
pub fn majority_success_closed_form(w: usize, p_single: f64) -> f64 {
    let p = p_single.clamp(0.0, 1.0);
    let mut total: f64 = (w / 2 + 1..=w).map(|k| binomial_pmf(w, k, p)).sum();
    if w.is_multiple_of(2) {
        total += 0.5 * binomial_pmf(w, w / 2, p);
    }
    total.min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub p_succ: f64,
    pub shots: u64,
    pub ties: u64,
    pub bound: Option<f64>,
    #[serde(default)]
    pub swapped: bool,
}

impl SuccessEstimate {
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }
}

/// Equal-prior success estimate from per-hypothesis shot histograms. Tie
/// draws are taken in outcome order, H0 run first.
pub fn estimate_success<R: Rng + ?Sized>(
    counts_h0: &OutcomeCounts,
    counts_h1: &OutcomeCounts,
    rule: &ClassificationRule,
    rng: &mut R,
) -> Result<SuccessEstimate> {
    if counts_h0.shots() != counts_h1.shots() {
        return Err(Error::ShotMismatch { h0: counts_h0.shots(), h1: counts_h1.shots() });
    }
    let (mut correct, mut ties) = (0u64, 0u64);
    for (truth, counts) in [(Hypothesis::H0, counts_h0), (Hypothesis::H1, counts_h1)] {
        for (&bits, &n) in counts.counts() {
            match rule.verdict(bits, counts.n_bits())? {
                Verdict::Decided(h) => correct += if h == truth { n } else { 0 },
                Verdict::Tie => {
                    ties += n;
                    correct += (0..n).filter(|_| coin(rng) == truth).count() as u64;
                }
            }
        }
    }
    let shots = counts_h0.shots();
    let p_succ = if shots == 0 { 0.5 } else { correct as f64 / (2 * shots) as f64 };
    Ok(SuccessEstimate { p_succ, shots, ties, bound: None, swapped: false })
}

/// Replaces estimates below one half by their complement and flags them.
pub fn answer_swap_correction(estimates: &[SuccessEstimate]) -> Vec<SuccessEstimate> {
    estimates
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.p_succ < 0.5 {
                e.p_succ = 1.0 - e.p_succ;
                e.swapped = true;
            }
            e
        })
        .collect()
}
