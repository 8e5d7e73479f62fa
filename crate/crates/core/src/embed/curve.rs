//! Monomial curves `z ↦ U·(c_α z^{m_α})` in projective space, their moment
//! matrices, and one-parameter degenerations of plane conics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hermitian::{conjugate_exponent, q_norm, HermitianMatrix, SquareMatrix};
use super::quadrature::{geometric_breaks, Quadrature};
use super::EmbedError;

/// Scales resolved near `s = 0` and `s = ∞`: `2^{-48}`.
const GEOMETRIC_LEVELS: u32 = 48;

/// The curve `z ↦ U·(c_0 z^{m_0}, …, c_N z^{m_N})` with real coefficients and
/// an optional unitary frame `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialCurve {
    pub coeffs: Vec<f64>,
    pub exponents: Vec<u32>,
    #[serde(default)]
    pub frame: Option<SquareMatrix>,
}

impl MonomialCurve {
    pub fn new(coeffs: Vec<f64>, exponents: Vec<u32>) -> Result<Self, EmbedError> {
        if coeffs.len() != exponents.len() || coeffs.is_empty() {
            return Err(EmbedError::InvalidParameter(
                "coefficients and exponents must have the same nonzero length".into(),
            ));
        }
        let used: Vec<u32> = exponents
            .iter()
            .zip(&coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&m, _)| m)
            .collect();
        if used.len() < 2 || used.iter().min() == used.iter().max() {
            return Err(EmbedError::InvalidParameter(
                "a curve needs two nonzero coordinates of different degree".into(),
            ));
        }
        Ok(MonomialCurve {
            coeffs,
            exponents,
            frame: None,
        })
    }

    /// `z ↦ (1, z)`, the identity embedding of the line.
    pub fn line() -> Self {
        Self::new(vec![1.0, 1.0], vec![0, 1]).expect("valid")
    }

    /// `z ↦ (1, z, z²)`, the conic `z₀z₂ = z₁²`.
    pub fn conic() -> Self {
        Self::new(vec![1.0, 1.0, 1.0], vec![0, 1, 2]).expect("valid")
    }

    pub fn with_frame(mut self, u: SquareMatrix) -> Result<Self, EmbedError> {
        if u.size() != self.coeffs.len() || !u.is_unitary(1e-12) {
            return Err(EmbedError::InvalidParameter(
                "frame must be a unitary matrix of matching size".into(),
            ));
        }
        self.frame = Some(u);
        Ok(self)
    }

    /// Number of homogeneous coordinates, `N + 1`.
    pub fn ambient_size(&self) -> usize {
        self.coeffs.len()
    }

    /// The degree `max m − min m` over nonzero coordinates, which is the
    /// Fubini–Study volume of the image.
    pub fn degree(&self) -> u32 {
        let used = self
            .exponents
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(&m, _)| m);
        used.clone().max().unwrap_or(0) - used.min().unwrap_or(0)
    }

    /// Pulled-back Fubini–Study density in `s = |z|²`, integrated over the
    /// circle: `(‖Z‖²‖Z'‖² − |⟨Z', Z⟩|²)/‖Z‖⁴`. Unitary frames leave it
    /// unchanged.
    pub fn area_density(&self, s: f64) -> f64 {
        let (mut z2, mut dz2, mut inner) = (0.0, 0.0, 0.0);
        for (&c, &m) in self.coeffs.iter().zip(&self.exponents) {
            if c == 0.0 {
                continue;
            }
            let c2 = c * c;
            let mf = m as f64;
            let sm = s.powi(m as i32);
            z2 += c2 * sm;
            inner += c2 * mf * sm;
            if m > 0 {
                dz2 += c2 * mf * mf * s.powi(m as i32 - 1);
            }
        }
        (z2 * dz2 - inner * inner / s) / (z2 * z2)
    }

    /// `|Z_α|²/‖Z‖²` in the monomial frame.
    fn diagonal_weights(&self, s: f64, out: &mut [f64]) {
        let mut total = 0.0;
        for (o, (&c, &m)) in out.iter_mut().zip(self.coeffs.iter().zip(&self.exponents)) {
            *o = c * c * s.powi(m as i32);
            total += *o;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }

    /// `∫_V g dμ` for an integrand written in `s = |z|²`, split as
    /// `[0, 1] ∪ [1, ∞)` with `v = 1/s` on the second half.
    fn integrate_over_curve<F: Fn(f64, &mut [f64])>(
        &self,
        quad: &Quadrature,
        dim: usize,
        g: F,
    ) -> Result<Vec<f64>, EmbedError> {
        let breaks = geometric_breaks(GEOMETRIC_LEVELS);
        let inner = quad.integrate_vec(
            dim,
            |s, out| {
                g(s, out);
                let k = self.area_density(s);
                out.iter_mut().for_each(|o| *o *= k);
            },
            &breaks,
        )?;
        let outer = quad.integrate_vec(
            dim,
            |v, out| {
                let s = 1.0 / v;
                g(s, out);
                let k = self.area_density(s) / (v * v);
                out.iter_mut().for_each(|o| *o *= k);
            },
            &breaks,
        )?;
        Ok(inner.iter().zip(&outer).map(|(a, b)| a + b).collect())
    }

    /// Fubini–Study area of the image, by quadrature.
    pub fn volume(&self, quad: &Quadrature) -> Result<f64, EmbedError> {
        Ok(self.integrate_over_curve(quad, 1, |_, out| out[0] = 1.0)?[0])
    }

    /// `M_αβ = ∫_V z_α z̄_β/‖z‖² dμ`.
    ///
    /// In the monomial frame M is diagonal and each entry is a 1-D integral.
    /// With a frame, every entry is computed as a 2-D integral over `s` and
    /// the angle (trapezoid rule, exact for these trigonometric
    /// polynomials).
    pub fn m_matrix(&self, quad: &Quadrature) -> Result<HermitianMatrix, EmbedError> {
        let n = self.ambient_size();
        match &self.frame {
            None => {
                let d =
                    self.integrate_over_curve(quad, n, |s, out| self.diagonal_weights(s, out))?;
                Ok(HermitianMatrix::diag(&d))
            }
            Some(u) => {
                let max_m = *self.exponents.iter().max().unwrap_or(&0) as usize;
                let angles = 4 * max_m + 8;
                let flat = self.integrate_over_curve(quad, 2 * n * n, |s, out| {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    let r = s.sqrt();
                    for a in 0..angles {
                        let theta = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
                        let z = Complex64::from_polar(r, theta);
                        let raw: Vec<Complex64> = self
                            .coeffs
                            .iter()
                            .zip(&self.exponents)
                            .map(|(&c, &m)| c * z.powu(m))
                            .collect();
                        let w = u.apply(&raw);
                        let norm2: f64 = w.iter().map(|x| x.norm_sqr()).sum();
                        for i in 0..n {
                            for j in 0..n {
                                let h = w[i] * w[j].conj() / norm2;
                                out[2 * (i * n + j)] += h.re / angles as f64;
                                out[2 * (i * n + j) + 1] += h.im / angles as f64;
                            }
                        }
                    }
                })?;
                let m = SquareMatrix::from_fn(n, |i, j| {
                    Complex64::new(flat[2 * (i * n + j)], flat[2 * (i * n + j) + 1])
                });
                HermitianMatrix::new(m)
            }
        }
    }

    /// `M̲ = M − (Vol/(N+1))·1` with `Vol` the degree.
    pub fn trace_free_m_matrix(&self, quad: &Quadrature) -> Result<HermitianMatrix, EmbedError> {
        Ok(self.m_matrix(quad)?.trace_free(Some(self.degree() as f64)))
    }

    /// `∫_V Σ a_α |z_α|²/‖z‖² dμ` in the monomial frame.
    pub fn hamiltonian_integral(&self, a: &[f64], quad: &Quadrature) -> Result<f64, EmbedError> {
        let d = self.integrate_over_curve(quad, self.ambient_size(), |s, out| {
            self.diagonal_weights(s, out)
        })?;
        Ok(d.iter().zip(a).map(|(x, w)| x * w).sum())
    }

    /// The translate by `diag(t^{a_α})`.
    pub fn translated(&self, a: &[i64], t: f64) -> Self {
        MonomialCurve {
            coeffs: self
                .coeffs
                .iter()
                .zip(a)
                .map(|(&c, &w)| c * t.powi(w as i32))
                .collect(),
            ..self.clone()
        }
    }
}

/// A component of a limit cycle with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleComponent {
    pub curve: MonomialCurve,
    pub multiplicity: u32,
}

/// A curve, a diagonal one-parameter subgroup, and the analytic limit cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerationExample {
    pub name: String,
    pub curve: MonomialCurve,
    /// Diagonal entries of the generator A.
    pub weights: Vec<i64>,
    pub limit: Vec<CycleComponent>,
    /// FCh computed by hand, when known.
    #[serde(default)]
    pub analytic_fch: Option<f64>,
}

fn line_through(coords: [bool; 3]) -> MonomialCurve {
    let mut coeffs = vec![0.0; 3];
    let mut exponents = vec![0; 3];
    let mut next = 0;
    for i in 0..3 {
        if coords[i] {
            coeffs[i] = 1.0;
            exponents[i] = next;
            next += 1;
        }
    }
    MonomialCurve::new(coeffs, exponents).expect("two coordinates")
}

impl DegenerationExample {
    /// The conic under `diag(1, 0, 0)`; the limit is `{z₀ = 0} + {z₂ = 0}`.
    pub fn conic_a() -> Self {
        DegenerationExample {
            name: "conic-a".into(),
            curve: MonomialCurve::conic(),
            weights: vec![1, 0, 0],
            limit: vec![
                CycleComponent {
                    curve: line_through([false, true, true]),
                    multiplicity: 1,
                },
                CycleComponent {
                    curve: line_through([true, true, false]),
                    multiplicity: 1,
                },
            ],
            analytic_fch: Some(1.0 / 6.0),
        }
    }

    /// The conic under `diag(−1, 0, 0)`; the limit is `2·{z₁ = 0}`.
    pub fn conic_b() -> Self {
        DegenerationExample {
            name: "conic-b".into(),
            curve: MonomialCurve::conic(),
            weights: vec![-1, 0, 0],
            limit: vec![CycleComponent {
                curve: line_through([true, false, true]),
                multiplicity: 2,
            }],
            analytic_fch: Some(1.0 / 3.0),
        }
    }

    /// The conic with the trivial subgroup.
    pub fn conic_trivial() -> Self {
        DegenerationExample {
            name: "conic-trivial".into(),
            curve: MonomialCurve::conic(),
            weights: vec![0, 0, 0],
            limit: vec![CycleComponent {
                curve: MonomialCurve::conic(),
                multiplicity: 1,
            }],
            analytic_fch: Some(0.0),
        }
    }

    pub fn by_name(name: &str) -> Result<Self, EmbedError> {
        match name {
            "conic-a" => Ok(Self::conic_a()),
            "conic-b" => Ok(Self::conic_b()),
            "conic-trivial" => Ok(Self::conic_trivial()),
            other => Err(EmbedError::UnknownExample(other.to_string())),
        }
    }

    fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(|&w| w as f64).collect()
    }

    /// `A̲ = A − (Tr A/(N+1))·1`.
    pub fn trace_free_generator(&self) -> HermitianMatrix {
        HermitianMatrix::diag(&self.weights_f64()).trace_free(None)
    }

    /// `I = Σ m_i ∫_{W_i} h dμ` and `FCh = (Vol/(N+1)) Tr A − I`.
    pub fn fch(&self, quad: &Quadrature) -> Result<FchValue, EmbedError> {
        let a = self.weights_f64();
        let mut integral = 0.0;
        let mut volume = 0.0;
        for c in &self.limit {
            integral += c.multiplicity as f64 * c.curve.hamiltonian_integral(&a, quad)?;
            volume += (c.multiplicity * c.curve.degree()) as f64;
        }
        let trace: f64 = a.iter().sum();
        Ok(FchValue {
            integral,
            volume,
            fch: volume / a.len() as f64 * trace - integral,
        })
    }

    /// `f(t) = Tr(A̲ M̲(V^t))`.
    pub fn f_of_t(&self, t: f64, quad: &Quadrature) -> Result<f64, EmbedError> {
        let vt = self.curve.translated(&self.weights, t);
        let a = self.weights_f64();
        let ham = vt.hamiltonian_integral(&a, quad)?;
        let trace: f64 = a.iter().sum();
        Ok(ham - vt.degree() as f64 / a.len() as f64 * trace)
    }

    pub fn monotonicity_check(
        &self,
        t_grid: &[f64],
        tol: f64,
        quad: &Quadrature,
    ) -> Result<MonotonicityReport, EmbedError> {
        if t_grid.len() < 2
            || t_grid.windows(2).any(|w| w[1] <= w[0])
            || t_grid[0] <= 0.0
            || *t_grid.last().unwrap() > 1.0
        {
            return Err(EmbedError::InvalidParameter(
                "t-grid must be increasing inside (0, 1] with at least two points".into(),
            ));
        }
        let values = t_grid
            .iter()
            .map(|&t| self.f_of_t(t, quad))
            .collect::<Result<Vec<_>, _>>()?;
        let largest_drop = values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max);
        let (t0, t1) = (t_grid[0], t_grid[1]);
        let extrapolated = values[0] - t0 * (values[1] - values[0]) / (t1 - t0);
        let fch = self.fch(quad)?.fch;
        let at_one = self.f_of_t(1.0, quad)?;
        Ok(MonotonicityReport {
            t: t_grid.to_vec(),
            values,
            largest_drop,
            monotone: largest_drop <= tol,
            extrapolated_limit: extrapolated,
            fch,
            limit_gap: (extrapolated + fch).abs(),
            f_at_one: at_one,
            lower_bound_holds: at_one >= -fch - tol,
        })
    }

    /// The Schatten-norm lower bound `‖M̲(V)‖_q ≥ max(−FCh, f(1))/‖A̲‖_p`.
    pub fn schatten_bound_check(
        &self,
        p: f64,
        quad: &Quadrature,
    ) -> Result<SchattenBoundReport, EmbedError> {
        let q = conjugate_exponent(p);
        let fch = self.fch(quad)?.fch;
        let f1 = self.f_of_t(1.0, quad)?;
        let a_norm = q_norm(&self.trace_free_generator(), p);
        let m_norm = q_norm(&self.curve.trace_free_m_matrix(quad)?, q);
        let target = (-fch).max(f1);
        Ok(SchattenBoundReport {
            p,
            q,
            fch,
            f_at_one: f1,
            a_norm,
            m_norm,
            bound: if a_norm > 0.0 { target / a_norm } else { 0.0 },
        })
    }
}

/// Default t-grid: `count` geometrically spaced points from `t_min` to 1.
pub fn geometric_t_grid(t_min: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            if i + 1 == count {
                1.0
            } else {
                t_min * (1.0 / t_min).powf(i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FchValue {
    pub integral: f64,
    pub volume: f64,
    pub fch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `f(t_i) − f(t_{i+1})`; non-positive when f is nondecreasing.
    pub largest_drop: f64,
    pub monotone: bool,
    /// Linear extrapolation to `t = 0` from the two smallest grid points.
    pub extrapolated_limit: f64,
    pub fch: f64,
    /// `|extrapolated_limit + FCh|`.
    pub limit_gap: f64,
    pub f_at_one: f64,
    /// `Tr(A̲ M̲(V)) ≥ −FCh`.
    pub lower_bound_holds: bool,
}

impl MonotonicityReport {
    pub fn require_monotone(&self) -> Result<(), EmbedError> {
        if self.monotone {
            Ok(())
        } else {
            Err(EmbedError::MonotonicityViolated {
                drop: self.largest_drop,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenBoundReport {
    pub p: f64,
    pub q: f64,
    pub fch: f64,
    pub f_at_one: f64,
    /// `‖A̲‖_p`.
    pub a_norm: f64,
    /// `‖M̲(V)‖_q`.
    pub m_norm: f64,
    /// `max(−FCh, f(1))/‖A̲‖_p`.
    pub bound: f64,
}

impl SchattenBoundReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.m_norm >= self.bound - tol
    }
}
