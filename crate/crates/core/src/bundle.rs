//! Flag calculus for bundles over a curve: slopes, the norm of a
//! slope-decreasing flag, the weight functional of a degeneration, optimal
//! weights, Harder–Narasimhan filtrations of formal direct sums, and an
//! exhaustive search over flags and weight vectors.
//!
//! A bundle is modeled as a direct sum of stable pieces; the flags searched
//! are those whose quotients are sub-sums of the pieces.

use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{Rational, SqrtRatio};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("flag must have at least one quotient")]
    EmptyFlag,
    #[error("quotient {index} has rank 0")]
    ZeroRank { index: usize },
    #[error("flag is not slope-decreasing at quotient {index}")]
    NotSlopeDecreasing { index: usize },
    #[error("weight vector has length {weights}, flag has {quotients} quotients")]
    LengthMismatch { weights: usize, quotients: usize },
    #[error("weight vector is identically zero")]
    ZeroWeights,
    #[error("weight bound must be at least 1, got {0}")]
    NonPositiveBound(i64),
    #[error("all slopes are zero; no weight vector gives a positive value")]
    AllSlopesZero,
    #[error("weights {index} and {} differ; only equal weights merge", index + 1)]
    WeightsDiffer { index: usize },
    #[error("merge index {index} out of range for a flag of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("bundle has no pieces")]
    EmptySpec,
    #[error("piece {index} is invalid: rank and multiplicity must be positive")]
    InvalidPiece { index: usize },
    #[error("search too large: {work} evaluations exceed the budget of {budget}")]
    TooLarge { work: u128, budget: u128 },
}

pub fn slope(rank: u32, degree: i64) -> Rational {
    assert!(rank >= 1, "slope of a rank-zero sheaf");
    Rational::frac(degree, rank as i64)
}

/// Rank and degree of one quotient `E_i / E_{i-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuotientDatum {
    pub rank: u32,
    pub degree: i64,
}

impl QuotientDatum {
    pub fn new(rank: u32, degree: i64) -> Self {
        QuotientDatum { rank, degree }
    }

    pub fn slope(&self) -> Rational {
        slope(self.rank, self.degree)
    }
}

/// A flag `0 = E_0 ⊂ E_1 ⊂ … ⊂ E_q = E`, stored through its successive
/// quotients, innermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<QuotientDatum>", into = "Vec<QuotientDatum>")]
pub struct FlagData {
    quotients: Vec<QuotientDatum>,
}

impl FlagData {
    pub fn new(quotients: Vec<QuotientDatum>) -> Result<Self, BundleError> {
        if quotients.is_empty() {
            return Err(BundleError::EmptyFlag);
        }
        if let Some(index) = quotients.iter().position(|q| q.rank == 0) {
            return Err(BundleError::ZeroRank { index });
        }
        Ok(FlagData { quotients })
    }

    /// Builds a flag from `(rank, degree)` pairs.
    pub fn from_pairs(pairs: &[(u32, i64)]) -> Result<Self, BundleError> {
        Self::new(
            pairs
                .iter()
                .map(|&(r, d)| QuotientDatum::new(r, d))
                .collect(),
        )
    }

    pub fn quotients(&self) -> &[QuotientDatum] {
        &self.quotients
    }

    pub fn len(&self) -> usize {
        self.quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn total_rank(&self) -> u64 {
        self.quotients.iter().map(|q| q.rank as u64).sum()
    }

    pub fn total_degree(&self) -> i64 {
        self.quotients.iter().map(|q| q.degree).sum()
    }

    pub fn is_slope_decreasing(&self) -> bool {
        self.first_slope_violation().is_none()
    }

    fn first_slope_violation(&self) -> Option<usize> {
        self.quotients
            .windows(2)
            .position(|w| w[0].slope() <= w[1].slope())
            .map(|i| i + 1)
    }

    fn require_slope_decreasing(&self) -> Result<(), BundleError> {
        match self.first_slope_violation() {
            Some(index) => Err(BundleError::NotSlopeDecreasing { index }),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<QuotientDatum>> for FlagData {
    type Error = BundleError;
    fn try_from(value: Vec<QuotientDatum>) -> Result<Self, Self::Error> {
        FlagData::new(value)
    }
}

impl From<FlagData> for Vec<QuotientDatum> {
    fn from(value: FlagData) -> Self {
        value.quotients
    }
}

/// Integer weights `w_1, …, w_q` of the torus action on the graded pieces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn is_weakly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    pub fn scaled(&self, c: i64) -> WeightVector {
        WeightVector(self.0.iter().map(|w| w * c).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundlePiece {
    pub rank: u32,
    pub degree: i64,
    pub multiplicity: u32,
}

/// A bundle given as a direct sum of stable pieces with multiplicities.
///
/// JSON form: `{"pieces": [{"rank": r, "degree": d, "multiplicity": m}, …]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub pieces: Vec<BundlePiece>,
}

impl BundleSpec {
    /// From `(rank, degree, multiplicity)` triples.
    pub fn from_triples(triples: &[(u32, i64, u32)]) -> Self {
        BundleSpec {
            pieces: triples
                .iter()
                .map(|&(rank, degree, multiplicity)| BundlePiece {
                    rank,
                    degree,
                    multiplicity,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), BundleError> {
        if self.pieces.is_empty() {
            return Err(BundleError::EmptySpec);
        }
        if let Some(index) = self
            .pieces
            .iter()
            .position(|p| p.rank == 0 || p.multiplicity == 0)
        {
            return Err(BundleError::InvalidPiece { index });
        }
        Ok(())
    }

    pub fn piece_count(&self) -> u64 {
        self.pieces.iter().map(|p| p.multiplicity as u64).sum()
    }

    /// A weight bound that always contains an optimal weight vector:
    /// `lcm(ranks) * max |slope|`, rounded up, and at least 1.
    pub fn sufficient_weight_bound(&self) -> i64 {
        let lcm = self
            .pieces
            .iter()
            .fold(1i64, |acc, p| acc.lcm(&(p.rank as i64)));
        let bound = self
            .pieces
            .iter()
            .map(|p| (Rational::from(lcm) * slope(p.rank, p.degree)).abs().ceil())
            .max()
            .unwrap_or_default();
        i64::try_from(bound).unwrap_or(i64::MAX).max(1)
    }
}

/// Φ(F) = (Σ r_i μ_i²)^{1/2} for a slope-decreasing flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiValue {
    pub value: SqrtRatio,
    pub radicand: Rational,
}

pub fn phi(flag: &FlagData) -> Result<PhiValue, BundleError> {
    flag.require_slope_decreasing()?;
    let radicand: Rational = flag
        .quotients
        .iter()
        .map(|q| {
            let mu = q.slope();
            &mu * &mu * Rational::from(q.rank)
        })
        .sum();
    let value = SqrtRatio::sqrt_of(radicand.clone()).expect("sum of squares is non-negative");
    Ok(PhiValue { value, radicand })
}

/// The leading-order data of the weight action on `H^0(E_0 ⊗ K^{1/2} ⊗ L^k)`:
/// `dim = α₀k + α₁`, `Tr A = β₀k + β₁`, `Tr A² ~ Qk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagHilbertData {
    pub alpha0: i64,
    pub alpha1: i64,
    pub beta0: i64,
    pub beta1: i64,
    pub q: i64,
}

impl FlagHilbertData {
    /// Ψ = −β₁/√Q.
    pub fn psi(&self) -> Result<SqrtRatio, BundleError> {
        if self.q == 0 {
            return Err(BundleError::ZeroWeights);
        }
        Ok(SqrtRatio {
            a: Rational::from(-self.beta1),
            b: Rational::from(self.q),
        })
    }
}

pub fn hilbert_data(flag: &FlagData, w: &WeightVector) -> Result<FlagHilbertData, BundleError> {
    check_lengths(flag, w)?;
    let mut data = FlagHilbertData {
        alpha0: 0,
        alpha1: 0,
        beta0: 0,
        beta1: 0,
        q: 0,
    };
    for (qd, &wi) in flag.quotients.iter().zip(&w.0) {
        let r = qd.rank as i64;
        data.alpha0 += r;
        data.alpha1 += qd.degree;
        data.beta0 += r * wi;
        data.beta1 += qd.degree * wi;
        data.q += r * wi * wi;
    }
    Ok(data)
}

fn check_lengths(flag: &FlagData, w: &WeightVector) -> Result<(), BundleError> {
    if flag.len() != w.0.len() {
        return Err(BundleError::LengthMismatch {
            weights: w.0.len(),
            quotients: flag.len(),
        });
    }
    Ok(())
}

/// Ψ(F, W) = −Σ d_i w_i / √(Σ r_i w_i²).
pub fn psi_flag(flag: &FlagData, w: &WeightVector) -> Result<SqrtRatio, BundleError> {
    hilbert_data(flag, w)?.psi()
}

/// The maximizing weights `w_i = −C d_i / r_i` with `C = lcm(r_i)`.
pub fn optimal_weights(flag: &FlagData) -> Result<WeightVector, BundleError> {
    flag.require_slope_decreasing()?;
    if flag.quotients.iter().all(|q| q.degree == 0) {
        return Err(BundleError::AllSlopesZero);
    }
    let c = flag
        .quotients
        .iter()
        .fold(1i64, |acc, q| acc.lcm(&(q.rank as i64)));
    Ok(WeightVector(
        flag.quotients
            .iter()
            .map(|q| -c * q.degree / q.rank as i64)
            .collect(),
    ))
}

/// Merges quotients `index` and `index + 1` (0-based), which must carry equal
/// weights; Ψ is unchanged.
pub fn merge_step(
    flag: &FlagData,
    w: &WeightVector,
    index: usize,
) -> Result<(FlagData, WeightVector), BundleError> {
    check_lengths(flag, w)?;
    if index + 1 >= flag.len() {
        return Err(BundleError::IndexOutOfRange {
            index,
            len: flag.len(),
        });
    }
    if w.0[index] != w.0[index + 1] {
        return Err(BundleError::WeightsDiffer { index });
    }
    let mut quotients = flag.quotients.clone();
    let next = quotients.remove(index + 1);
    quotients[index].rank += next.rank;
    quotients[index].degree += next.degree;
    let mut weights = w.0.clone();
    weights.remove(index + 1);
    Ok((FlagData { quotients }, WeightVector(weights)))
}

/// Groups the pieces by slope and orders the groups by decreasing slope.
pub fn harder_narasimhan(spec: &BundleSpec) -> Result<FlagData, BundleError> {
    spec.validate()?;
    let mut groups: BTreeMap<Rational, QuotientDatum> = BTreeMap::new();
    for p in &spec.pieces {
        let entry = groups
            .entry(slope(p.rank, p.degree))
            .or_insert(QuotientDatum::new(0, 0));
        entry.rank += p.rank * p.multiplicity;
        entry.degree += p.degree * p.multiplicity as i64;
    }
    FlagData::new(groups.into_values().rev().collect())
}

/// Result of the exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupPsi {
    pub value: SqrtRatio,
    pub flag: FlagData,
    pub weights: WeightVector,
    /// Distinct quotient sequences examined.
    pub flags_examined: usize,
    /// Weight vectors evaluated across all flags.
    pub evaluations: u128,
}

/// Default cap on the number of Ψ evaluations.
pub const DEFAULT_SEARCH_BUDGET: u128 = 4_000_000_000;
/// Largest number of pieces (with multiplicity) the search accepts.
pub const MAX_SEARCH_PIECES: u64 = 8;

pub fn brute_force_sup_psi(spec: &BundleSpec, weight_bound: i64) -> Result<SupPsi, BundleError> {
    brute_force_sup_psi_with_budget(spec, weight_bound, DEFAULT_SEARCH_BUDGET)
}

/// Exhaustive maximum of Ψ(F, W) over every ordered partition of the pieces
/// into flag quotients and every weakly increasing `W ∈ [−B, B]^q` other than
/// zero.
///
/// Ties keep the earliest flag in enumeration order; within a flag the
/// maximizer of smallest `Σ r_i w_i²`, then the lexicographically smallest.
pub fn brute_force_sup_psi_with_budget(
    spec: &BundleSpec,
    weight_bound: i64,
    budget: u128,
) -> Result<SupPsi, BundleError> {
    spec.validate()?;
    let pieces = spec.piece_count();
    if pieces > MAX_SEARCH_PIECES {
        return Err(BundleError::TooLarge {
            work: pieces as u128,
            budget: MAX_SEARCH_PIECES as u128,
        });
    }
    if weight_bound < 1 {
        return Err(BundleError::NonPositiveBound(weight_bound));
    }
    let bound = weight_bound;
    let flags = ordered_quotient_sequences(spec);
    let span = (2 * bound + 1) as u128;
    let work: u128 = flags
        .iter()
        .map(|f| multichoose(span, f.len() as u128))
        .sum();
    if work > budget {
        return Err(BundleError::TooLarge { work, budget });
    }

    let best = flags
        .par_iter()
        .enumerate()
        .filter_map(|(idx, flag)| best_weights(flag, bound).map(|c| (idx, c)))
        .reduce_with(|x, y| {
            use std::cmp::Ordering::*;
            match x.1.value_cmp(&y.1) {
                Greater => x,
                Less => y,
                Equal => {
                    if x.0 <= y.0 {
                        x
                    } else {
                        y
                    }
                }
            }
        })
        .expect("the trivial flag always has a nonzero weight vector");

    let (idx, cand) = best;
    let flag = FlagData::new(flags[idx].clone())?;
    Ok(SupPsi {
        value: SqrtRatio {
            a: Rational::from(cand.num as i64),
            b: Rational::from(cand.den as i64),
        },
        flag,
        weights: WeightVector(cand.weights),
        flags_examined: flags.len(),
        evaluations: work,
    })
}

/// Number of weakly increasing sequences of length `q` over `n` values.
fn multichoose(n: u128, q: u128) -> u128 {
    // C(n + q − 1, q)
    let mut acc: u128 = 1;
    for i in 0..q {
        acc = acc * (n + i) / (i + 1);
    }
    acc
}

/// Every distinct sequence of quotients obtained by splitting the multiset of
/// pieces into consecutive nonempty blocks, in a fixed enumeration order.
fn ordered_quotient_sequences(spec: &BundleSpec) -> Vec<Vec<QuotientDatum>> {
    let mut types: BTreeMap<(u32, i64), u32> = BTreeMap::new();
    for p in &spec.pieces {
        *types.entry((p.rank, p.degree)).or_default() += p.multiplicity;
    }
    let kinds: Vec<(u32, i64)> = types.keys().copied().collect();
    let remaining: Vec<u32> = types.values().copied().collect();

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    split_blocks(&kinds, remaining, &mut prefix, &mut seen, &mut out);
    out
}

fn split_blocks(
    kinds: &[(u32, i64)],
    remaining: Vec<u32>,
    prefix: &mut Vec<QuotientDatum>,
    seen: &mut HashSet<Vec<QuotientDatum>>,
    out: &mut Vec<Vec<QuotientDatum>>,
) {
    if remaining.iter().all(|&m| m == 0) {
        if seen.insert(prefix.clone()) {
            out.push(prefix.clone());
        }
        return;
    }
    // Enumerate nonempty sub-multisets as count vectors in lexicographic order.
    let mut take = vec![0u32; remaining.len()];
    loop {
        let mut i = take.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if take[i] < remaining[i] {
                take[i] += 1;
                for t in take.iter_mut().skip(i + 1) {
                    *t = 0;
                }
                break;
            }
        }
        let block = kinds
            .iter()
            .zip(&take)
            .fold(QuotientDatum::new(0, 0), |acc, (&(r, d), &t)| {
                QuotientDatum::new(acc.rank + r * t, acc.degree + d * t as i64)
            });
        let rest: Vec<u32> = remaining.iter().zip(&take).map(|(m, t)| m - t).collect();
        prefix.push(block);
        split_blocks(kinds, rest, prefix, seen, out);
        prefix.pop();
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    num: i128,
    den: i128,
    weights: Vec<i64>,
}

impl Candidate {
    /// Compares num/√den values exactly.
    fn value_cmp(&self, other: &Candidate) -> std::cmp::Ordering {
        let (sa, sb) = (self.num.signum(), other.num.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        let lhs = self.num * self.num * other.den;
        let rhs = other.num * other.num * self.den;
        if sa >= 0 {
            lhs.cmp(&rhs)
        } else {
            rhs.cmp(&lhs)
        }
    }
}

struct WeightSearch<'a> {
    ranks: Vec<i128>,
    degrees: Vec<i128>,
    bound: i64,
    current: Vec<i64>,
    best: Option<Candidate>,
    _flag: &'a [QuotientDatum],
}

impl WeightSearch<'_> {
    fn descend(&mut self, pos: usize, lo: i64, num: i128, den: i128) {
        if pos == self.current.len() {
            if den == 0 {
                return;
            }
            self.offer(num, den);
            return;
        }
        let (r, d) = (self.ranks[pos], self.degrees[pos]);
        for w in lo..=self.bound {
            self.current[pos] = w;
            let wi = w as i128;
            self.descend(pos + 1, w, num - d * wi, den + r * wi * wi);
        }
    }

    fn offer(&mut self, num: i128, den: i128) {
        if matches!(&self.best, Some(b) if num.signum() < b.num.signum()) {
            return;
        }
        let better = match &self.best {
            None => true,
            Some(b) => {
                let probe = Candidate {
                    num,
                    den,
                    weights: Vec::new(),
                };
                match probe.value_cmp(b) {
                    std::cmp::Ordering::Greater => true,
                    // Enumeration is lexicographic, so on equal norms the
                    // incumbent is already the lexicographically smaller one.
                    std::cmp::Ordering::Equal => den < b.den,
                    std::cmp::Ordering::Less => false,
                }
            }
        };
        if better {
            self.best = Some(Candidate {
                num,
                den,
                weights: self.current.clone(),
            });
        }
    }
}

fn best_weights(flag: &[QuotientDatum], bound: i64) -> Option<Candidate> {
    let mut search = WeightSearch {
        ranks: flag.iter().map(|q| q.rank as i128).collect(),
        degrees: flag.iter().map(|q| q.degree as i128).collect(),
        bound,
        current: vec![0; flag.len()],
        best: None,
        _flag: flag,
    };
    search.descend(0, -bound, 0, 0);
    search.best
}
