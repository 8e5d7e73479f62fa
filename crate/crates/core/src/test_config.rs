//! Invariants of a test configuration read off from its weight spectrum:
//! Hilbert and trace polynomials, the Futaki invariant, Ψ, the normalized
//! L^p norms, character twists and base changes, and the resulting lower
//! bounds on the Calabi functional.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    fit_polynomial, leading_coefficient, ExactError, Rational, RootRatio, SqrtRatio, UniPoly,
    DEFAULT_GUARD,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("spectrum has no samples")]
    EmptySpectrum,
    #[error("weight multiset at k = {k} is empty")]
    EmptyMultiset { k: i64 },
    #[error("k values must be contiguous; {k} is missing")]
    NonContiguous { k: i64 },
    #[error("p = {p} is not a positive even integer")]
    InvalidPower { p: u32 },
    #[error("exponent r must be positive")]
    ZeroExponent,
    #[error("fitting {what}: {source}; extend the k-range to at least k_max = {suggested_k_max}")]
    Fit {
        what: String,
        source: ExactError,
        suggested_k_max: i64,
    },
    #[error("leading dimension coefficient a0 = {0} is not positive")]
    NonPositiveA0(Rational),
    #[error("Q = {0} is not positive; the weights are degenerate")]
    NonPositiveQ(Rational),
    #[error("base-change degree must be positive")]
    ZeroDegree,
    #[error("Futaki invariant {0} is non-negative; the twisted Ψ has no interior maximum")]
    NonNegativeFutaki(Rational),
}

/// For each k, the weights (with multiplicity) of the generator `A_k` acting
/// on `U_k`.
///
/// JSON form: `{"n": n, "r": r, "weights": {"k": [w, …], …}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSpectrum {
    pub n: u32,
    #[serde(default = "default_r")]
    pub r: u32,
    pub weights: BTreeMap<i64, Vec<i64>>,
}

fn default_r() -> u32 {
    1
}

impl WeightSpectrum {
    pub fn new(n: u32, r: u32) -> Self {
        WeightSpectrum {
            n,
            r,
            weights: BTreeMap::new(),
        }
    }

    /// Builds a spectrum by evaluating `f` at every `k` in `k_min..=k_max`.
    pub fn from_fn(n: u32, r: u32, k_min: i64, k_max: i64, f: impl Fn(i64) -> Vec<i64>) -> Self {
        WeightSpectrum {
            n,
            r,
            weights: (k_min..=k_max).map(|k| (k, f(k))).collect(),
        }
    }

    pub fn k_range(&self) -> Option<(i64, i64)> {
        Some((
            *self.weights.keys().next()?,
            *self.weights.keys().next_back()?,
        ))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.r == 0 {
            return Err(ConfigError::ZeroExponent);
        }
        let (lo, hi) = self.k_range().ok_or(ConfigError::EmptySpectrum)?;
        for k in lo..=hi {
            match self.weights.get(&k) {
                None => return Err(ConfigError::NonContiguous { k }),
                Some(w) if w.is_empty() => return Err(ConfigError::EmptyMultiset { k }),
                _ => {}
            }
        }
        Ok(())
    }

    /// `Tr A_k^j` for every k.
    pub fn power_traces(&self, j: u32) -> Vec<(i64, Rational)> {
        let entries: Vec<_> = self.weights.iter().collect();
        entries
            .par_iter()
            .map(|(&k, ws)| {
                let s: BigInt = ws.iter().map(|&w| BigInt::from(w).pow(j)).sum();
                (k, Rational::from(s))
            })
            .collect()
    }

    /// `Tr A̲_k^p = Σ (w − Tr A_k / dim U_k)^p` at a single k.
    pub fn centered_trace(&self, k: i64, p: u32) -> Option<Rational> {
        let ws = self.weights.get(&k)?;
        let mean = Rational::from(ws.iter().map(|&w| BigInt::from(w)).sum::<BigInt>())
            / Rational::from(ws.len());
        Some(
            ws.iter()
                .map(|&w| (Rational::from(w) - &mean).pow(p as i32).expect("p >= 0"))
                .sum(),
        )
    }
}

/// The exact invariants of a test configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigInvariants {
    pub n: u32,
    pub r: u32,
    pub a0: Rational,
    pub a1: Rational,
    pub b0: Rational,
    pub b1: Rational,
    pub q: Rational,
    /// `N_p^p` for each requested even p.
    pub np_pow_p: BTreeMap<u32, Rational>,
    pub futaki: Rational,
    pub psi: SqrtRatio,
    /// Ψ̂_p, present whenever `N_p > 0`.
    pub psi_hat: BTreeMap<u32, RootRatio>,
}

/// The fitted polynomials behind a set of invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FittedSpectrum {
    pub dim: UniPoly,
    /// `traces[j - 1]` is the fit of `Tr A_k^j`.
    pub traces: Vec<UniPoly>,
}

pub fn invariants_from_spectrum(
    s: &WeightSpectrum,
    p_list: &[u32],
) -> Result<ConfigInvariants, ConfigError> {
    invariants_with_fits(s, p_list, DEFAULT_GUARD).map(|(inv, _)| inv)
}

/// Fits `dim U_k` (degree n) and `Tr A_k^j` (degree n + j) for
/// `j = 1..=max(p_list ∪ {2})` and extracts the invariants.
pub fn invariants_with_fits(
    s: &WeightSpectrum,
    p_list: &[u32],
    guard: usize,
) -> Result<(ConfigInvariants, FittedSpectrum), ConfigError> {
    s.validate()?;
    if let Some(&p) = p_list.iter().find(|&&p| p == 0 || p % 2 == 1) {
        return Err(ConfigError::InvalidPower { p });
    }
    let (k_min, _) = s.k_range().expect("validated");
    let n = s.n as usize;
    let max_j = p_list.iter().copied().max().unwrap_or(2).max(2);

    let fit = |what: String, samples: Vec<(i64, Rational)>, degree: usize| {
        fit_polynomial(&samples, degree, guard).map_err(|source| ConfigError::Fit {
            what,
            source,
            suggested_k_max: k_min + (degree + guard) as i64,
        })
    };

    let dim_samples = s
        .weights
        .iter()
        .map(|(&k, ws)| (k, Rational::from(ws.len())))
        .collect();
    let dim = fit("dim U_k".into(), dim_samples, n)?;
    let traces = (1..=max_j)
        .map(|j| fit(format!("Tr A_k^{j}"), s.power_traces(j), n + j as usize))
        .collect::<Result<Vec<_>, _>>()?;

    let lead =
        |p: &UniPoly, deg: usize| leading_coefficient(p, deg).expect("degree bounded by fit");
    let a0 = lead(&dim, n);
    let a1 = if n == 0 {
        Rational::zero()
    } else {
        dim.coeff(n - 1)
    };
    let b0 = lead(&traces[0], n + 1);
    let b1 = traces[0].coeff(n);
    let q = lead(&traces[1], n + 2);
    if !a0.is_positive() {
        return Err(ConfigError::NonPositiveA0(a0));
    }
    if !q.is_positive() {
        return Err(ConfigError::NonPositiveQ(q));
    }

    // c_j: coefficient of k^{n+j} in Tr A_k^j, with c_0 = a0.
    let c: Vec<Rational> = std::iter::once(a0.clone())
        .chain(traces.iter().enumerate().map(|(i, t)| lead(t, n + i + 1)))
        .collect();
    let shift = -(&b0 / &a0);
    let np_pow_p = p_list
        .iter()
        .map(|&p| {
            let v: Rational = (0..=p)
                .map(|j| {
                    Rational::from(binomial(BigInt::from(p), BigInt::from(j)))
                        * shift.pow((p - j) as i32).expect("non-negative")
                        * &c[j as usize]
                })
                .sum();
            (p, v)
        })
        .collect();

    let futaki = &b1 - &b0 * &a1 / &a0;
    let mut inv = ConfigInvariants {
        n: s.n,
        r: s.r,
        a0,
        a1,
        b0,
        b1,
        q,
        np_pow_p,
        futaki,
        psi: SqrtRatio::zero(),
        psi_hat: BTreeMap::new(),
    };
    inv.refresh();
    Ok((inv, FittedSpectrum { dim, traces }))
}

impl ConfigInvariants {
    /// Builds invariants from the five basic coefficients; `N_p^p` for
    /// p = 2 is filled in as `Q − b0²/a0`.
    pub fn from_coefficients(
        n: u32,
        r: u32,
        a0: Rational,
        a1: Rational,
        b0: Rational,
        b1: Rational,
        q: Rational,
    ) -> Result<Self, ConfigError> {
        if r == 0 {
            return Err(ConfigError::ZeroExponent);
        }
        if !a0.is_positive() {
            return Err(ConfigError::NonPositiveA0(a0));
        }
        if !q.is_positive() {
            return Err(ConfigError::NonPositiveQ(q));
        }
        let n2 = &q - &b0 * &b0 / &a0;
        let futaki = &b1 - &b0 * &a1 / &a0;
        let mut inv = ConfigInvariants {
            n,
            r,
            a0,
            a1,
            b0,
            b1,
            q,
            np_pow_p: BTreeMap::from([(2, n2)]),
            futaki,
            psi: SqrtRatio::zero(),
            psi_hat: BTreeMap::new(),
        };
        inv.refresh();
        Ok(inv)
    }

    fn r_pow(&self, exp: i64) -> Rational {
        Rational::from(self.r)
            .pow(exp as i32)
            .expect("r is positive")
    }

    /// Recomputes Ψ and Ψ̂_p from the stored coefficients.
    fn refresh(&mut self) {
        let n = self.n as i64;
        self.psi = SqrtRatio {
            a: -self.b1.clone(),
            b: &self.q * self.r_pow(n - 2),
        };
        self.psi_hat = self
            .np_pow_p
            .iter()
            .filter(|(_, np)| np.is_positive())
            .map(|(&p, np)| {
                let p64 = p as i64;
                let b = self.r_pow(n * (p64 - 1) - p64) * np;
                (
                    p,
                    RootRatio::new(-self.futaki.clone(), b, p).expect("b > 0"),
                )
            })
            .collect();
    }

    /// `N_2^2 = Q − b0²/a0`.
    pub fn n2_squared(&self) -> Rational {
        &self.q - &self.b0 * &self.b0 / &self.a0
    }

    /// `Q − b1²/a0`, the variant printed alongside the adopted formula.
    pub fn n2_squared_printed(&self) -> Rational {
        &self.q - &self.b1 * &self.b1 / &self.a0
    }

    /// Ŝ = a1/a0.
    pub fn s_hat(&self) -> Rational {
        &self.a1 / &self.a0
    }

    /// The bound `|a1|/√a0` available without any test configuration.
    pub fn trivial_bound(&self) -> SqrtRatio {
        SqrtRatio {
            a: self.a1.abs(),
            b: self.a0.clone(),
        }
    }

    /// Replaces `A_k` by `A_k + kν`.
    pub fn twist(&self, nu: &Rational) -> Self {
        let mut out = self.clone();
        out.b0 = &self.b0 + nu * &self.a0;
        out.b1 = &self.b1 + nu * &self.a1;
        out.q = &self.q + Rational::from(2) * &self.b0 * nu + &self.a0 * nu * nu;
        out.refresh();
        out
    }

    /// Replaces `A_k` by `d·A_k`.
    pub fn base_change(&self, d: u32) -> Result<Self, ConfigError> {
        if d == 0 {
            return Err(ConfigError::ZeroDegree);
        }
        let d = Rational::from(d);
        let mut out = self.clone();
        out.b0 = &self.b0 * &d;
        out.b1 = &self.b1 * &d;
        out.q = &self.q * &d * &d;
        out.futaki = &self.futaki * &d;
        out.np_pow_p = self
            .np_pow_p
            .iter()
            .map(|(&p, v)| (p, v * d.pow(p as i32).expect("non-negative")))
            .collect();
        out.refresh();
        Ok(out)
    }

    /// The twist `ν = (a1 Q − b0 b1)/(a0 b1 − a1 b0)` maximizing Ψ.
    pub fn optimal_nu(&self) -> Result<Rational, ConfigError> {
        if !self.futaki.is_negative() {
            return Err(ConfigError::NonNegativeFutaki(self.futaki.clone()));
        }
        let num = &self.a1 * &self.q - &self.b0 * &self.b1;
        let den = &self.a0 * &self.b1 - &self.a1 * &self.b0;
        Ok(num / den)
    }

    /// The maximum of Ψ over all rational twists:
    /// `(a1²/a0 + F²/N_2²)^{1/2} / r^{(n−2)/2}`.
    pub fn sup_twisted_psi(&self) -> Result<SqrtRatio, ConfigError> {
        if !self.futaki.is_negative() {
            return Err(ConfigError::NonNegativeFutaki(self.futaki.clone()));
        }
        let sq = &self.a1 * &self.a1 / &self.a0 + &self.futaki * &self.futaki / self.n2_squared();
        let sq = sq / self.r_pow(self.n as i64 - 2);
        Ok(SqrtRatio::sqrt_of(sq).expect("sum of squares"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PsiHatBranch {
    Bound {
        p: u32,
        psi_hat: RootRatio,
    },
    /// The bound is vacuous because `F ≥ 0`.
    Vacuous {
        p: u32,
    },
    /// `N_p = 0`, so Ψ̂_p is undefined.
    Undefined {
        p: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub s_hat: Rational,
    pub trivial_bound: SqrtRatio,
    pub branches: Vec<PsiHatBranch>,
    /// `√(a1²/a0 + Ψ̂_2²)`, when the p = 2 branch is active.
    pub combined_bound: Option<SqrtRatio>,
    pub n2_squared: Rational,
    pub n2_squared_printed: Rational,
    /// Whether the two N_2² formulas disagree on this data.
    pub n2_formulas_differ: bool,
}

pub fn lower_bound_report(inv: &ConfigInvariants, p_list: &[u32]) -> LowerBoundReport {
    let vacuous = !inv.futaki.is_negative();
    let branches = p_list
        .iter()
        .map(|&p| match inv.psi_hat.get(&p) {
            _ if vacuous => PsiHatBranch::Vacuous { p },
            Some(v) => PsiHatBranch::Bound {
                p,
                psi_hat: v.clone(),
            },
            None => PsiHatBranch::Undefined { p },
        })
        .collect::<Vec<_>>();
    let combined_bound = branches.iter().find_map(|b| match b {
        PsiHatBranch::Bound { p: 2, psi_hat } => {
            // Ψ̂_2² = F² / b
            let sq = &inv.a1 * &inv.a1 / &inv.a0 + &psi_hat.a * &psi_hat.a / &psi_hat.b;
            Some(SqrtRatio::sqrt_of(sq).expect("sum of squares"))
        }
        _ => None,
    });
    let n2 = inv.n2_squared();
    let printed = inv.n2_squared_printed();
    LowerBoundReport {
        s_hat: inv.s_hat(),
        trivial_bound: inv.trivial_bound(),
        branches,
        combined_bound,
        n2_formulas_differ: n2 != printed,
        n2_squared: n2,
        n2_squared_printed: printed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{compare_root_ratio, compare_sqrt_ratio};
    use std::cmp::Ordering;

    fn q(a: i64, b: i64) -> Rational {
        Rational::frac(a, b)
    }

    fn line_spectrum() -> WeightSpectrum {
        WeightSpectrum::from_fn(1, 1, 1, 8, |k| (0..=k).collect())
    }

    fn synthetic() -> ConfigInvariants {
        ConfigInvariants::from_coefficients(1, 1, q(1, 1), q(0, 1), q(0, 1), q(-1, 1), q(1, 1))
            .unwrap()
    }

    #[test]
    fn projective_line_invariants() {
        let inv = invariants_from_spectrum(&line_spectrum(), &[2, 4]).unwrap();
        assert_eq!(inv.a0, q(1, 1));
        assert_eq!(inv.a1, q(1, 1));
        assert_eq!(inv.b0, q(1, 2));
        assert_eq!(inv.b1, q(1, 2));
        assert_eq!(inv.q, q(1, 3));
        assert_eq!(inv.futaki, Rational::zero());
        assert_eq!(inv.np_pow_p[&2], q(1, 12));
        // ∫₀¹ (x − 1/2)⁴ dx = 1/80
        assert_eq!(inv.np_pow_p[&4], q(1, 80));
    }

    #[test]
    fn zero_weights_are_degenerate() {
        let s = WeightSpectrum::from_fn(1, 1, 1, 8, |k| vec![0; (k + 1) as usize]);
        assert!(matches!(
            invariants_from_spectrum(&s, &[2]),
            Err(ConfigError::NonPositiveQ(_))
        ));
    }

    #[test]
    fn short_range_suggests_more_samples() {
        let s = WeightSpectrum::from_fn(1, 1, 1, 3, |k| (0..=k).collect());
        match invariants_from_spectrum(&s, &[2]) {
            Err(ConfigError::Fit {
                suggested_k_max, ..
            }) => assert!(suggested_k_max > 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        let mut s = line_spectrum();
        assert!(matches!(
            invariants_from_spectrum(&s, &[3]),
            Err(ConfigError::InvalidPower { p: 3 })
        ));
        s.weights.remove(&4);
        assert!(matches!(
            invariants_from_spectrum(&s, &[2]),
            Err(ConfigError::NonContiguous { k: 4 })
        ));
    }

    #[test]
    fn twist_example() {
        let t = synthetic().twist(&q(2, 1));
        assert_eq!(
            (t.b0.clone(), t.b1.clone(), t.q.clone()),
            (q(2, 1), q(-1, 1), q(5, 1))
        );
        assert_eq!(synthetic().twist(&Rational::zero()), synthetic());
    }

    #[test]
    fn futaki_is_twist_invariant() {
        let inv = invariants_from_spectrum(&line_spectrum(), &[2]).unwrap();
        for nu in -3..=3 {
            let t = inv.twist(&Rational::from(nu));
            assert_eq!(t.futaki, inv.futaki);
            assert_eq!(t.n2_squared(), inv.n2_squared());
        }
    }

    #[test]
    fn base_change_examples() {
        let inv = invariants_from_spectrum(&line_spectrum(), &[2]).unwrap();
        assert_eq!(inv.base_change(1).unwrap(), inv);
        let d3 = inv.base_change(3).unwrap();
        assert_eq!(d3.b1, q(3, 2));
        assert_eq!(d3.q, q(3, 1));
        assert_eq!(compare_sqrt_ratio(&d3.psi, &inv.psi), Ordering::Equal);

        let syn = synthetic();
        let d2 = syn.base_change(2).unwrap();
        assert_eq!(
            compare_root_ratio(&d2.psi_hat[&2], &syn.psi_hat[&2]),
            Ordering::Equal
        );
    }

    #[test]
    fn optimal_twist_examples() {
        let syn = synthetic();
        assert_eq!(syn.futaki, q(-1, 1));
        let nu = syn.optimal_nu().unwrap();
        assert_eq!(nu, Rational::zero());
        let best = syn.twist(&nu).psi;
        assert_eq!(best, SqrtRatio::sqrt_of(q(1, 1)).unwrap());
        assert_eq!(syn.sup_twisted_psi().unwrap(), best);
        assert_eq!(syn.psi_hat[&2].to_f64(), 1.0);
        for d in -2..=2 {
            let other = syn.twist(&(&nu + Rational::from(d))).psi;
            assert_ne!(compare_sqrt_ratio(&best, &other), Ordering::Less);
        }

        let line = invariants_from_spectrum(&line_spectrum(), &[2]).unwrap();
        assert!(matches!(
            line.optimal_nu(),
            Err(ConfigError::NonNegativeFutaki(_))
        ));
    }

    #[test]
    fn reports() {
        let line = invariants_from_spectrum(&line_spectrum(), &[2, 4]).unwrap();
        let rep = lower_bound_report(&line, &[2, 4]);
        assert_eq!(rep.trivial_bound, SqrtRatio::sqrt_of(q(1, 1)).unwrap());
        assert!(rep
            .branches
            .iter()
            .all(|b| matches!(b, PsiHatBranch::Vacuous { .. })));
        assert!(rep.combined_bound.is_none());
        assert!(!rep.n2_formulas_differ);

        let rep = lower_bound_report(&synthetic(), &[2]);
        match &rep.branches[0] {
            PsiHatBranch::Bound { psi_hat, .. } => {
                assert_eq!(
                    compare_root_ratio(psi_hat, &RootRatio::new(q(1, 1), q(1, 1), 2).unwrap()),
                    Ordering::Equal
                )
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            rep.combined_bound,
            Some(SqrtRatio::sqrt_of(q(1, 1)).unwrap())
        );
    }

    #[test]
    fn centered_trace_matches_direct_sum() {
        let s = line_spectrum();
        // k = 2: weights 0,1,2 around mean 1
        assert_eq!(s.centered_trace(2, 2), Some(q(2, 1)));
        assert_eq!(s.centered_trace(99, 2), None);
    }

    #[test]
    fn spectrum_json_round_trip() {
        let s = WeightSpectrum::from_fn(1, 1, 1, 2, |k| (0..=k).collect());
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"n":1,"r":1,"weights":{"1":[0,1],"2":[0,1,2]}}"#);
        let back: WeightSpectrum =
            serde_json::from_str(r#"{"n":1,"weights":{"1":[0,1],"2":[0,1,2]}}"#).unwrap();
        assert_eq!(back, s);
    }
}
