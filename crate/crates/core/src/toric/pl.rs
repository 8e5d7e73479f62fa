use serde::{Deserialize, Serialize};

use super::{LatticePolytope, ToricError};
use crate::exact::Rational;
use crate::test_config::WeightSpectrum;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffinePiece {
    pub c: Vec<i64>,
    pub d: i64,
}

impl AffinePiece {
    pub fn new(c: Vec<i64>, d: i64) -> Self {
        AffinePiece { c, d }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.c
            .iter()
            .zip(x)
            .map(|(&ci, xi)| Rational::from(ci) * xi)
            .sum::<Rational>()
            + Rational::from(self.d)
    }

    /// `⟨c, α⟩ + d·k`.
    pub fn scaled_value(&self, alpha: &[i64], k: i64) -> i64 {
        self.c.iter().zip(alpha).map(|(c, a)| c * a).sum::<i64>() + self.d * k
    }
}

/// `f(x) = max_j (⟨c_j, x⟩ + d_j)` with integer data.
///
/// JSON form: `{"pieces": [{"c": […], "d": d}, …]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLConvexFunction {
    pub pieces: Vec<AffinePiece>,
}

impl PLConvexFunction {
    pub fn affine(c: Vec<i64>, d: i64) -> Self {
        PLConvexFunction {
            pieces: vec![AffinePiece::new(c, d)],
        }
    }

    pub fn from_pieces(pieces: &[(&[i64], i64)]) -> Self {
        PLConvexFunction {
            pieces: pieces
                .iter()
                .map(|(c, d)| AffinePiece::new(c.to_vec(), *d))
                .collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ToricError> {
        if self.pieces.is_empty() {
            return Err(ToricError::EmptyFunction);
        }
        if let Some(p) = self.pieces.iter().find(|p| p.c.len() != n) {
            return Err(ToricError::DimensionMismatch {
                expected: n,
                got: p.c.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.eval(x))
            .max()
            .expect("nonempty")
    }

    /// `w_k(α) = max_j (⟨c_j, α⟩ + d_j k) = k·f(α/k)`.
    pub fn weight(&self, alpha: &[i64], k: i64) -> i64 {
        self.pieces
            .iter()
            .map(|p| p.scaled_value(alpha, k))
            .max()
            .expect("nonempty")
    }

    /// The same function with every `d_j` shifted by `nu`.
    pub fn shifted(&self, nu: i64) -> Self {
        PLConvexFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| AffinePiece::new(p.c.clone(), p.d + nu))
                .collect(),
        }
    }

    /// Pieces with distinct data, in first-occurrence order.
    pub(crate) fn distinct_pieces(&self) -> Vec<&AffinePiece> {
        let mut out: Vec<&AffinePiece> = Vec::new();
        for p in &self.pieces {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Indices of pieces that never attain the maximum on `kP ∩ Zⁿ`.
    pub fn idle_pieces(&self, p: &LatticePolytope, k: i64) -> Vec<usize> {
        let points = p.lattice_points(k);
        (0..self.pieces.len())
            .filter(|&j| {
                !points
                    .iter()
                    .any(|a| self.pieces[j].scaled_value(a, k) == self.weight(a, k))
            })
            .collect()
    }
}

/// For each k in the range, the multiset `{w_k(α) : α ∈ kP ∩ Zⁿ}`.
pub fn weight_spectrum(
    p: &LatticePolytope,
    f: &PLConvexFunction,
    k_min: i64,
    k_max: i64,
) -> Result<WeightSpectrum, ToricError> {
    f.validate(p.dim())?;
    if k_min < 1 || k_max < k_min {
        return Err(ToricError::InvalidRange { k_min, k_max });
    }
    Ok(WeightSpectrum::from_fn(
        p.dim() as u32,
        1,
        k_min,
        k_max,
        |k| p.lattice_points(k).iter().map(|a| f.weight(a, k)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corner() -> PLConvexFunction {
        PLConvexFunction::from_pieces(&[(&[0, 0], 0), (&[1, 1], -1)])
    }

    #[test]
    fn segment_identity_weights() {
        let p = LatticePolytope::segment(1).unwrap();
        let s = weight_spectrum(&p, &PLConvexFunction::affine(vec![1], 0), 3, 3).unwrap();
        let mut w = s.weights[&3].clone();
        w.sort();
        assert_eq!(w, vec![0, 1, 2, 3]);
    }

    #[test]
    fn corner_function_trace() {
        let s = weight_spectrum(&LatticePolytope::unit_square(), &corner(), 1, 6).unwrap();
        for (k, ws) in &s.weights {
            assert_eq!(ws.iter().sum::<i64>(), k * (k + 1) * (k + 2) / 6);
        }
        assert_eq!(s.weights[&2].iter().sum::<i64>(), 4);
    }

    #[test]
    fn scaled_segment_trace() {
        for m in 1..=4 {
            let p = LatticePolytope::segment(m).unwrap();
            let s = weight_spectrum(&p, &PLConvexFunction::affine(vec![1], 0), 1, 5).unwrap();
            for (k, ws) in &s.weights {
                assert_eq!(ws.iter().sum::<i64>(), m * k * (m * k + 1) / 2);
            }
        }
    }

    #[test]
    fn evaluation_and_idle_pieces() {
        let f = corner();
        let half = Rational::frac(1, 2);
        assert_eq!(f.eval(&[half.clone(), half]), Rational::zero());
        assert_eq!(f.eval(&[Rational::one(), Rational::one()]), Rational::one());
        assert!(f.idle_pieces(&LatticePolytope::unit_square(), 2).is_empty());
        let g = PLConvexFunction::from_pieces(&[(&[0, 0], 5), (&[1, 1], -1)]);
        assert_eq!(g.idle_pieces(&LatticePolytope::unit_square(), 2), vec![1]);
    }

    #[test]
    fn rejects_bad_functions() {
        let p = LatticePolytope::unit_square();
        let empty = PLConvexFunction { pieces: vec![] };
        assert_eq!(
            weight_spectrum(&p, &empty, 1, 2),
            Err(ToricError::EmptyFunction)
        );
        let wrong = PLConvexFunction::affine(vec![1], 0);
        assert!(matches!(
            weight_spectrum(&p, &wrong, 1, 2),
            Err(ToricError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            weight_spectrum(&p, &corner(), 3, 2),
            Err(ToricError::InvalidRange { .. })
        ));
    }
}
