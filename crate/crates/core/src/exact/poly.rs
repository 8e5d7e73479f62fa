use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ExactError, Rational};

/// Univariate polynomial with rational coefficients, lowest degree first.
///
/// The coefficient vector never ends in a zero; the zero polynomial is the
/// empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// Convenience for integer-numerator, common-denominator data.
    pub fn from_ints(numers: &[i64], denom: i64) -> Self {
        Self::from_coeffs(numers.iter().map(|&n| Rational::frac(n, denom)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// `self * (x - root)`.
    fn mul_linear(&self, root: &Rational) -> UniPoly {
        let mut out = vec![Rational::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= &(c * root);
        }
        UniPoly::from_coeffs(out)
    }

    fn add_constant(mut self, c: &Rational) -> UniPoly {
        if self.coeffs.is_empty() {
            self.coeffs.push(Rational::zero());
        }
        self.coeffs[0] += c;
        UniPoly::from_coeffs(self.coeffs)
    }
}

impl TryFrom<Vec<Rational>> for UniPoly {
    type Error = ExactError;

    fn try_from(value: Vec<Rational>) -> Result<Self, Self::Error> {
        Ok(UniPoly::from_coeffs(value))
    }
}

impl From<UniPoly> for Vec<Rational> {
    fn from(value: UniPoly) -> Self {
        value.coeffs
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})k")?,
                _ => write!(f, "({c})k^{i}")?,
            }
        }
        Ok(())
    }
}

/// Interpolates the first `degree + 1` samples (after sorting by `k`) and
/// requires every remaining sample to lie on the result exactly.
///
/// Interpolation runs through Newton divided differences, which reduce to
/// forward differences on consecutive integer `k`.
pub fn fit_polynomial(
    samples: &[(i64, Rational)],
    degree: usize,
    guard: usize,
) -> Result<UniPoly, ExactError> {
    let needed = degree + 1 + guard;
    if samples.len() < needed {
        return Err(ExactError::InsufficientSamples {
            needed,
            got: samples.len(),
        });
    }
    let mut sorted: Vec<&(i64, Rational)> = samples.iter().collect();
    sorted.sort_by_key(|(k, _)| *k);
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ExactError::DegenerateSamples { k: w[0].0 });
    }

    let nodes: Vec<Rational> = sorted[..=degree]
        .iter()
        .map(|(k, _)| Rational::from(*k))
        .collect();
    let mut table: Vec<Rational> = sorted[..=degree].iter().map(|(_, v)| v.clone()).collect();
    // In-place divided differences: afterwards table[i] = f[x_0, ..., x_i].
    for level in 1..=degree {
        for i in (level..=degree).rev() {
            let num = &table[i] - &table[i - 1];
            let den = &nodes[i] - &nodes[i - level];
            table[i] = num / den;
        }
    }
    // Horner on the Newton form.
    let mut poly = UniPoly::from_coeffs(vec![table[degree].clone()]);
    for i in (0..degree).rev() {
        poly = poly.mul_linear(&nodes[i]).add_constant(&table[i]);
    }

    for (k, v) in &sorted[degree + 1..] {
        let got = poly.eval(&Rational::from(*k));
        if &got != v {
            return Err(ExactError::GuardMismatch {
                k: *k,
                expected: Box::new(v.clone()),
                got: Box::new(got),
            });
        }
    }
    Ok(poly)
}

/// Coefficient of `k^expected_degree`; zero when the fitted degree is lower.
pub fn leading_coefficient(p: &UniPoly, expected_degree: usize) -> Result<Rational, ExactError> {
    match p.degree() {
        Some(d) if d > expected_degree => Err(ExactError::DegreeExceeded {
            degree: d,
            expected: expected_degree,
        }),
        _ => Ok(p.coeff(expected_degree)),
    }
}
