use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EmbedError;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        SquareMatrix {
            n,
            data: (0..n * n).map(|i| f(i / n, i % n)).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &SquareMatrix) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_fn(self.n, |i, j| {
            (0..self.n).map(|l| self[(i, l)] * other[(l, j)]).sum()
        })
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.mul(&self.adjoint())
            .max_abs_diff(&Self::identity(self.n))
            <= tol
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Self-adjoint complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareMatrix", into = "SquareMatrix")]
pub struct HermitianMatrix(SquareMatrix);

/// Tolerance on `|T_ij − conj(T_ji)|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;

impl TryFrom<SquareMatrix> for HermitianMatrix {
    type Error = EmbedError;
    fn try_from(m: SquareMatrix) -> Result<Self, EmbedError> {
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for SquareMatrix {
    fn from(h: HermitianMatrix) -> Self {
        h.0
    }
}

impl HermitianMatrix {
    pub fn new(m: SquareMatrix) -> Result<Self, EmbedError> {
        let gap = m.max_abs_diff(&m.adjoint());
        if gap > HERMITIAN_TOL * (1.0 + m.data.iter().fold(0.0f64, |a, z| a.max(z.norm()))) {
            return Err(EmbedError::NotHermitian { gap });
        }
        // Symmetrize away rounding noise.
        let sym = SquareMatrix::from_fn(m.n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        Ok(HermitianMatrix(sym))
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = SquareMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        HermitianMatrix(m)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `T − (vol/(N+1))·1`, where `vol` defaults to the trace.
    pub fn trace_free(&self, vol: Option<f64>) -> Self {
        let shift = vol.unwrap_or_else(|| self.trace()) / self.size() as f64;
        let mut m = self.0.clone();
        for i in 0..self.size() {
            m[(i, i)] -= Complex64::new(shift, 0.0);
        }
        HermitianMatrix(m)
    }

    /// `U T U*`.
    pub fn conjugate_by(&self, u: &SquareMatrix) -> Result<Self, EmbedError> {
        HermitianMatrix::new(u.mul(&self.0).mul(&u.adjoint()))
    }

    /// `Tr(S T)` for Hermitian S, T (real).
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .mul(&other.0)
            .data
            .iter()
            .step_by(self.size() + 1)
            .map(|z| z.re)
            .sum()
    }

    /// Eigenvalues in increasing order, via cyclic Jacobi on the real
    /// symmetric form `[[Re, −Im], [Im, Re]]`, whose spectrum is that of
    /// `T` with every eigenvalue doubled.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.size();
        let m = 2 * n;
        let mut a = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.0[(i, j)];
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[(i + n) * m + j] = z.im;
                a[i * m + (j + n)] = -z.im;
            }
        }
        jacobi_eigenvalues(&mut a, m);
        let mut ev: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
        ev.sort_by(f64::total_cmp);
        ev.into_iter().step_by(2).collect()
    }
}

fn off_diagonal_norm(a: &[f64], m: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                s += a[i * m + j] * a[i * m + j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations on a real symmetric `m × m` matrix, in place,
/// until the off-diagonal Frobenius norm is below tolerance.
fn jacobi_eigenvalues(a: &mut [f64], m: usize) {
    let scale = a.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    for _sweep in 0..100 {
        if off_diagonal_norm(a, m) <= JACOBI_TOL * scale {
            return;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..m {
                    let arp = a[r * m + p];
                    let arq = a[r * m + q];
                    a[r * m + p] = c * arp - s * arq;
                    a[r * m + q] = s * arp + c * arq;
                }
                for r in 0..m {
                    let apr = a[p * m + r];
                    let aqr = a[q * m + r];
                    a[p * m + r] = c * apr - s * aqr;
                    a[q * m + r] = s * apr + c * aqr;
                }
            }
        }
    }
}

/// Schatten norm `(Σ |λ|^q)^{1/q}`; `q = ∞` gives the largest `|λ|`.
pub fn q_norm(t: &HermitianMatrix, q: f64) -> f64 {
    assert!(q >= 1.0, "q must be at least 1");
    let ev = t.eigenvalues();
    if q.is_infinite() {
        return ev.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    ev.iter()
        .map(|x| x.abs().powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// The conjugate exponent `p/(p − 1)`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norms_of_diagonal_matrices() {
        assert!((q_norm(&HermitianMatrix::diag(&[1.0, -1.0]), 2.0) - 2f64.sqrt()).abs() < 1e-14);
        assert!((q_norm(&HermitianMatrix::diag(&[3.0]), 1.0) - 3.0).abs() < 1e-14);
        assert_eq!(
            q_norm(&HermitianMatrix::diag(&[1.0, -4.0, 2.0]), f64::INFINITY),
            4.0
        );
    }

    #[test]
    fn complex_eigenvalues() {
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3.
        let m = SquareMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, 1.0),
            (1, 0) => c(0.0, -1.0),
            _ => c(2.0, 0.0),
        });
        let ev = HermitianMatrix::new(m).unwrap().eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = SquareMatrix::from_fn(2, |i, j| c((i + 2 * j) as f64, 0.0));
        assert!(matches!(
            HermitianMatrix::new(m),
            Err(EmbedError::NotHermitian { .. })
        ));
    }

    #[test]
    fn trace_free_part() {
        let t = HermitianMatrix::diag(&[1.0, 2.0, 6.0]).trace_free(None);
        assert!(t.trace().abs() < 1e-15);
        assert_eq!(t.diagonal(), vec![-2.0, -1.0, 3.0]);
    }

    #[test]
    fn conjugate_exponents() {
        assert_eq!(conjugate_exponent(2.0), 2.0);
        assert!((conjugate_exponent(4.0) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(conjugate_exponent(f64::INFINITY), 1.0);
    }
}
