//! Circle-invariant metrics on the projective line in symplectic
//! coordinates `x ∈ [0, 1]`, with potential
//! `u = ½[x ln x + (1−x) ln(1−x)] + s(x)` for a polynomial `s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hermitian::{q_norm, HermitianMatrix};
use super::quadrature::{uniform_breaks, Quadrature};
use super::EmbedError;
use crate::toric::least_squares_slope;

/// JSON form of a metric in the standard perturbation family
/// `s(x) = ε x²(1−x)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub epsilon: f64,
    #[serde(default = "default_resolution")]
    pub resolution: u32,
}

fn default_resolution() -> u32 {
    3
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &a)| i as f64 * a)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMetricCP1 {
    /// Coefficients of `s`, lowest degree first, followed by its first four
    /// derivatives.
    s: [Vec<f64>; 5],
    resolution: u32,
    quad: Quadrature,
}

/// Number of grid points used for convexity checks and sup norms.
pub const CHECK_GRID: usize = 400;

impl InvariantMetricCP1 {
    pub fn round() -> Self {
        Self::with_perturbation(vec![]).expect("the round metric is convex")
    }

    /// `s(x) = ε x²(1−x)²`.
    pub fn perturbed(epsilon: f64) -> Result<Self, EmbedError> {
        if !epsilon.is_finite() || epsilon.abs() > 1.0 {
            return Err(EmbedError::InvalidParameter(format!(
                "epsilon must lie in [-1, 1], got {epsilon}"
            )));
        }
        Self::with_perturbation(vec![0.0, 0.0, epsilon, -2.0 * epsilon, epsilon])
    }

    pub fn from_spec(spec: &MetricSpec) -> Result<Self, EmbedError> {
        Ok(Self::perturbed(spec.epsilon)?.with_resolution(spec.resolution))
    }

    /// Any polynomial perturbation; `u''` is checked to stay positive.
    pub fn with_perturbation(coeffs: Vec<f64>) -> Result<Self, EmbedError> {
        let d1 = poly_derivative(&coeffs);
        let d2 = poly_derivative(&d1);
        let d3 = poly_derivative(&d2);
        let d4 = poly_derivative(&d3);
        let m = InvariantMetricCP1 {
            s: [coeffs, d1, d2, d3, d4],
            resolution: default_resolution(),
            quad: Quadrature::default(),
        };
        for i in 0..=CHECK_GRID {
            let x = i as f64 / CHECK_GRID as f64;
            if m.inverse_hessian_denominator(x) <= 0.0 {
                return Err(EmbedError::NonConvexPotential { x });
            }
        }
        Ok(m)
    }

    pub fn with_resolution(mut self, resolution: u32) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_quadrature(mut self, quad: Quadrature) -> Self {
        self.quad = quad;
        self
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    fn s(&self, order: usize, x: f64) -> f64 {
        poly_eval(&self.s[order], x)
    }

    /// `D = 1 + 2x(1−x) s''`, so that `1/u'' = 2x(1−x)/D`.
    fn inverse_hessian_denominator(&self, x: f64) -> f64 {
        1.0 + 2.0 * x * (1.0 - x) * self.s(2, x)
    }

    /// `u''(x)`.
    pub fn hessian(&self, x: f64) -> f64 {
        1.0 / (2.0 * x * (1.0 - x)) + self.s(2, x)
    }

    /// `S = −¼ (1/u'')''`, evaluated in closed form.
    pub fn scalar_curvature(&self, x: f64) -> f64 {
        let (n0, n1, n2) = (2.0 * x * (1.0 - x), 2.0 - 4.0 * x, -4.0);
        let (s2, s3, s4) = (self.s(2, x), self.s(3, x), self.s(4, x));
        let d0 = 1.0 + n0 * s2;
        let d1 = n1 * s2 + n0 * s3;
        let d2 = n2 * s2 + 2.0 * n1 * s3 + n0 * s4;
        let g2 = (n2 * d0 - n0 * d2) / (d0 * d0) - 2.0 * d1 * (n1 * d0 - n0 * d1) / (d0 * d0 * d0);
        -0.25 * g2
    }

    /// Panels for integrals over `[0, 1]`.
    pub fn breaks(&self) -> Vec<f64> {
        uniform_breaks(0.0, 1.0, 1 << self.resolution.min(16))
    }

    fn breaks_with(&self, extra: f64) -> Vec<f64> {
        let mut b = self.breaks();
        if extra > 0.0 && extra < 1.0 && !b.contains(&extra) {
            b.push(extra);
            b.sort_by(f64::total_cmp);
        }
        b
    }

    /// `∫₀¹ g(x) dx`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> Result<f64, EmbedError> {
        self.quad.integrate(g, &self.breaks())
    }

    /// Pointwise `|z^j|²` for sections of `L^k`, in moment coordinates.
    pub fn section_weight(&self, j: u32, k: u32, x: f64) -> f64 {
        let (jf, kf) = (j as f64, k as f64);
        let poly = x.powi(j as i32) * (1.0 - x).powi((k - j) as i32);
        poly * (2.0 * (jf - kf * x) * self.s(1, x) + 2.0 * kf * self.s(0, x)).exp()
    }

    /// `‖z^j‖² = ∫₀¹ |z^j|² dx` for `j = 0..=k`.
    pub fn section_norms(&self, k: u32) -> Result<Vec<f64>, EmbedError> {
        (0..=k)
            .into_par_iter()
            .map(|j| {
                let peak = j as f64 / k.max(1) as f64;
                self.quad
                    .integrate(|x| self.section_weight(j, k, x), &self.breaks_with(peak))
            })
            .collect()
    }

    /// `ρ_k(x) = Σ_j |z^j|²(x)/‖z^j‖²`.
    pub fn density_at(&self, k: u32, norms: &[f64], x: f64) -> f64 {
        (0..=k)
            .map(|j| self.section_weight(j, k, x) / norms[j as usize])
            .sum()
    }

    pub fn density_of_states(&self, k: u32) -> Result<DensityOfStates, EmbedError> {
        if k == 0 {
            return Err(EmbedError::InvalidParameter("k must be positive".into()));
        }
        let norms = self.section_norms(k)?;
        let grid: Vec<f64> = (0..=CHECK_GRID)
            .map(|i| i as f64 / CHECK_GRID as f64)
            .collect();
        let rho: Vec<f64> = grid
            .iter()
            .map(|&x| self.density_at(k, &norms, x))
            .collect();
        let eta = rho.iter().map(|r| r - k as f64).collect();
        let integral = self.integrate(|x| self.density_at(k, &norms, x))?;
        Ok(DensityOfStates {
            k,
            norms,
            grid,
            rho,
            eta,
            integral,
        })
    }

    /// Diagonal `m_α = ∫ h_αα dμ` of the moment matrix of the embedding by
    /// the orthonormal monomial basis of `H⁰(L^k)`. The pulled-back
    /// Fubini–Study measure is `2u''·Var(x) dx`, where `Var` is the variance
    /// of `j` under the weights `h_jj`.
    pub fn moment_diagonal(&self, k: u32) -> Result<Vec<f64>, EmbedError> {
        let norms = self.section_norms(k)?;
        let dim = k as usize + 1;
        self.quad.integrate_vec(
            dim,
            |x, out| {
                let mut total = 0.0;
                for j in 0..dim {
                    out[j] = self.section_weight(j as u32, k, x) / norms[j];
                    total += out[j];
                }
                let (mut mean, mut second) = (0.0, 0.0);
                for (j, o) in out.iter_mut().enumerate() {
                    *o /= total;
                    mean += j as f64 * *o;
                    second += (j * j) as f64 * *o;
                }
                let measure = 2.0 * self.hessian(x) * (second - mean * mean);
                for o in out.iter_mut() {
                    *o *= measure;
                }
            },
            &self.breaks(),
        )
    }

    /// `M̲(V_k)` as a Hermitian matrix (diagonal for circle-invariant metrics).
    pub fn trace_free_moment_matrix(&self, k: u32) -> Result<HermitianMatrix, EmbedError> {
        let m = self.moment_diagonal(k)?;
        Ok(HermitianMatrix::diag(&m).trace_free(Some(k as f64)))
    }

    /// `∫₀¹ S dx` and `∫₀¹ S x dx`.
    pub fn topological_integrals(&self) -> Result<(f64, f64), EmbedError> {
        Ok((
            self.integrate(|x| self.scalar_curvature(x))?,
            self.integrate(|x| self.scalar_curvature(x) * x)?,
        ))
    }

    /// `Ŝ = ∫S / Vol`, with `Vol = 1`.
    pub fn average_scalar_curvature(&self) -> Result<f64, EmbedError> {
        self.integrate(|x| self.scalar_curvature(x))
    }

    /// `‖S − Ŝ‖_{L^q}`; `q = ∞` is the sup over the check grid.
    pub fn curvature_deviation(&self, q: f64) -> Result<f64, EmbedError> {
        let s_hat = self.average_scalar_curvature()?;
        lq_norm(self, q, |x| self.scalar_curvature(x) - s_hat)
    }
}

fn lq_norm(m: &InvariantMetricCP1, q: f64, g: impl Fn(f64) -> f64) -> Result<f64, EmbedError> {
    if q.is_infinite() {
        return Ok((0..=CHECK_GRID)
            .map(|i| g(i as f64 / CHECK_GRID as f64).abs())
            .fold(0.0, f64::max));
    }
    Ok(m.integrate(|x| g(x).abs().powf(q))?.powf(1.0 / q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOfStates {
    pub k: u32,
    pub norms: Vec<f64>,
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    /// `η_k = ρ_k − k`.
    pub eta: Vec<f64>,
    /// `∫₀¹ ρ_k dx`, which should be `k + 1`.
    pub integral: f64,
}

impl DensityOfStates {
    /// `sup |η_k − S|` over the grid.
    pub fn sup_deviation(&self, m: &InvariantMetricCP1) -> f64 {
        self.grid
            .iter()
            .zip(&self.eta)
            .map(|(&x, e)| (e - m.scalar_curvature(x)).abs())
            .fold(0.0, f64::max)
    }

    /// `sup |ρ_k − c|` over the grid.
    pub fn sup_distance_to_constant(&self, c: f64) -> f64 {
        self.rho.iter().map(|r| (r - c).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub k: u32,
    pub sup_error: f64,
    pub scaled_error: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub rows: Vec<DensityRow>,
    /// Smallest C with `sup|η_k − S| ≤ C/k` on every row.
    pub fitted_c: f64,
    pub decreasing: bool,
    pub log_log_slope: Option<f64>,
}

/// `sup |η_k − S|` for each k.
pub fn density_convergence(
    m: &InvariantMetricCP1,
    ks: &[u32],
) -> Result<DensityReport, EmbedError> {
    let rows = ks
        .iter()
        .map(|&k| {
            let dos = m.density_of_states(k)?;
            let e = dos.sup_deviation(m);
            Ok(DensityRow {
                k,
                sup_error: e,
                scaled_error: e * k as f64,
                integral: dos.integral,
            })
        })
        .collect::<Result<Vec<_>, EmbedError>>()?;
    let fitted_c = rows.iter().map(|r| r.scaled_error).fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sup_error > 0.0)
        .map(|r| ((r.k as f64).ln(), r.sup_error.ln()))
        .collect();
    Ok(DensityReport {
        rows,
        fitted_c,
        decreasing,
        log_log_slope: least_squares_slope(&pts),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub p: f64,
    pub q: f64,
    /// `∫(S − Ŝ)H / ‖H − Ĥ‖_{L^p}` with `H = x`.
    pub lhs: f64,
    /// `‖S − Ŝ‖_{L^q}`.
    pub rhs: f64,
}

impl HolderReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// The Hölder estimate for the Hamiltonian `H = x` of the circle action.
pub fn holder_chain(m: &InvariantMetricCP1, p: f64) -> Result<HolderReport, EmbedError> {
    let q = super::hermitian::conjugate_exponent(p);
    let s_hat = m.average_scalar_curvature()?;
    let futaki_like = m.integrate(|x| (m.scalar_curvature(x) - s_hat) * x)?;
    let h_norm = lq_norm(m, p, |x| x - 0.5)?;
    Ok(HolderReport {
        p,
        q,
        lhs: futaki_like / h_norm,
        rhs: m.curvature_deviation(q)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundRow {
    pub k: u32,
    pub trace_m: f64,
    pub norm: f64,
    /// `‖M̲(V_k)‖_q · k^{1 − 1/q}`.
    pub scaled_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundReport {
    pub q: f64,
    /// `‖S − Ŝ‖_{L^q}`.
    pub curvature_norm: f64,
    pub rows: Vec<MomentBoundRow>,
    /// Values of k used to fit C.
    pub fit_ks: Vec<u32>,
    /// Smallest C with `scaled_norm ≤ curvature_norm + C/k` on `fit_ks`.
    pub fitted_c: f64,
    /// Whether the bound with the fitted C holds on every row.
    pub holds: bool,
}

/// Moment-matrix norms of the Bergman embeddings against the curvature
/// bound. C is fitted on the first half of `ks` and then checked on all.
pub fn moment_bound_check(
    m: &InvariantMetricCP1,
    ks: &[u32],
    q: f64,
    tol: f64,
) -> Result<MomentBoundReport, EmbedError> {
    if ks.is_empty() {
        return Err(EmbedError::InvalidParameter("k-range is empty".into()));
    }
    let curvature_norm = m.curvature_deviation(q)?;
    let rows = ks
        .iter()
        .map(|&k| {
            let diag = m.moment_diagonal(k)?;
            let trace_m = diag.iter().sum();
            let mbar = HermitianMatrix::diag(&diag).trace_free(Some(k as f64));
            let norm = q_norm(&mbar, q);
            let exponent = if q.is_infinite() { 1.0 } else { 1.0 - 1.0 / q };
            Ok(MomentBoundRow {
                k,
                trace_m,
                norm,
                scaled_norm: norm * (k as f64).powf(exponent),
            })
        })
        .collect::<Result<Vec<_>, EmbedError>>()?;
    let fit_len = rows.len().div_ceil(2);
    let fit_ks = ks[..fit_len].to_vec();
    let fitted_c = rows[..fit_len]
        .iter()
        .map(|r| (r.scaled_norm - curvature_norm) * r.k as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let holds = rows
        .iter()
        .all(|r| r.scaled_norm <= curvature_norm + fitted_c / r.k as f64 + tol);
    Ok(MomentBoundReport {
        q,
        curvature_norm,
        rows,
        fit_ks,
        fitted_c,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_metric_curvature_is_one() {
        let m = InvariantMetricCP1::round();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert!((m.scalar_curvature(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_curvature_matches_finite_differences() {
        let m = InvariantMetricCP1::perturbed(0.5).unwrap();
        let g = |x: f64| 1.0 / m.hessian(x);
        let h = 1e-4;
        for &x in &[0.1, 0.3, 0.5, 0.77] {
            let fd = -0.25 * (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
            assert!((fd - m.scalar_curvature(x)).abs() < 1e-5, "x = {x}");
        }
    }

    #[test]
    fn rejects_non_convex_potentials() {
        assert!(matches!(
            InvariantMetricCP1::with_perturbation(vec![0.0, 0.0, -10.0]),
            Err(EmbedError::NonConvexPotential { .. })
        ));
        assert!(InvariantMetricCP1::perturbed(2.0).is_err());
    }

    #[test]
    fn round_section_norms_are_beta_values() {
        let m = InvariantMetricCP1::round();
        let norms = m.section_norms(4).unwrap();
        // j!(4−j)!/5!
        let want = [1.0 / 5.0, 1.0 / 20.0, 1.0 / 30.0, 1.0 / 20.0, 1.0 / 5.0];
        for (a, b) in norms.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn moment_diagonal_sums_to_k() {
        let m = InvariantMetricCP1::perturbed(0.3).unwrap();
        let d = m.moment_diagonal(5).unwrap();
        assert!((d.iter().sum::<f64>() - 5.0).abs() < 1e-10);
    }

    #[test]
    fn metric_spec_json() {
        let s: MetricSpec = serde_json::from_str(r#"{"epsilon": 0.5}"#).unwrap();
        assert_eq!(s.resolution, 3);
        assert!(InvariantMetricCP1::from_spec(&s).is_ok());
    }
}
