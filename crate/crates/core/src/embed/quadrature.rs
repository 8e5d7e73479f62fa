//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! Intervals are bisected greedily by largest error estimate. After the
//! estimate meets the tolerance, every final interval is re-integrated as
//! two halves and the two levels must agree to the same tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::EmbedError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_41,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_intervals: 50_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    kronrod: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl Quadrature {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            ..Default::default()
        }
    }

    fn tolerance(&self, total: &[f64]) -> f64 {
        self.abs_tol.max(self.rel_tol * max_abs(total))
    }

    fn panel<F: Fn(f64, &mut [f64])>(f: &F, dim: usize, a: f64, b: f64) -> Panel {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kron = vec![0.0; dim];
        let mut gauss = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        for (i, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
            let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
            for &sign in nodes {
                f(c + sign * h * x, &mut buf);
                for d in 0..dim {
                    kron[d] += wk * buf[d];
                    if i % 2 == 1 {
                        gauss[d] += WG[i / 2] * buf[d];
                    }
                }
            }
        }
        for d in 0..dim {
            kron[d] *= h;
            gauss[d] *= h;
        }
        let error = kron
            .iter()
            .zip(&gauss)
            .fold(0.0f64, |m, (k, g)| m.max((k - g).abs()));
        Panel {
            a,
            b,
            kronrod: kron,
            error,
        }
    }

    /// Integrates `f` over `[breaks[0], breaks.last()]`, starting from the
    /// panels between consecutive break points. `f` writes `dim` values.
    pub fn integrate_vec<F: Fn(f64, &mut [f64])>(
        &self,
        dim: usize,
        f: F,
        breaks: &[f64],
    ) -> Result<Vec<f64>, EmbedError> {
        assert!(breaks.len() >= 2, "need at least one interval");
        let mut heap: BinaryHeap<Panel> = breaks
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| Self::panel(&f, dim, w[0], w[1]))
            .collect();
        loop {
            let mut total = vec![0.0; dim];
            let mut error = 0.0;
            for p in heap.iter() {
                for (t, k) in total.iter_mut().zip(&p.kronrod) {
                    *t += k;
                }
                error += p.error;
            }
            let tol = self.tolerance(&total);
            if error <= tol {
                return self.confirm(&f, dim, heap.into_vec(), total, tol);
            }
            if heap.len() >= self.max_intervals {
                return Err(EmbedError::QuadratureNotConverged {
                    estimate: max_abs(&total),
                    error,
                    intervals: heap.len(),
                });
            }
            let worst = heap.pop().expect("nonempty");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                return Err(EmbedError::QuadratureNotConverged {
                    estimate: max_abs(&total),
                    error,
                    intervals: heap.len() + 1,
                });
            }
            heap.push(Self::panel(&f, dim, worst.a, mid));
            heap.push(Self::panel(&f, dim, mid, worst.b));
        }
    }

    /// Second level: bisect every panel once and compare.
    fn confirm<F: Fn(f64, &mut [f64])>(
        &self,
        f: &F,
        dim: usize,
        mut panels: Vec<Panel>,
        coarse: Vec<f64>,
        tol: f64,
    ) -> Result<Vec<f64>, EmbedError> {
        // Fixed summation order for reproducibility.
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut fine = vec![0.0; dim];
        for p in &panels {
            let mid = 0.5 * (p.a + p.b);
            for half in [Self::panel(f, dim, p.a, mid), Self::panel(f, dim, mid, p.b)] {
                for (t, k) in fine.iter_mut().zip(&half.kronrod) {
                    *t += k;
                }
            }
        }
        let gap = fine
            .iter()
            .zip(&coarse)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if gap > tol {
            return Err(EmbedError::QuadratureNotConverged {
                estimate: max_abs(&fine),
                error: gap,
                intervals: panels.len(),
            });
        }
        Ok(fine)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<f64, EmbedError> {
        self.integrate_vec(1, |x, out| out[0] = f(x), breaks)
            .map(|v| v[0])
    }
}

/// `n + 1` equally spaced points from `a` to `b`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * i as f64 / n as f64
            }
        })
        .collect()
}

/// `0, 2^{-levels}, …, 1/2, 1`: resolves integrable features near 0 at every
/// scale down to `2^{-levels}`.
pub fn geometric_breaks(levels: u32) -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..=levels).rev().map(|i| 0.5f64.powi(i as i32)))
        .collect()
}
