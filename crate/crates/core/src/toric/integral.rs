use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::linalg::{abs_det, affine_dim, sub, Point};
use super::polytope::{enumerate_vertices, HalfSpace};
use super::{weight_spectrum, AffinePiece, LatticePolytope, PLConvexFunction, ToricError};
use crate::exact::Rational;

/// A full-dimensional cell of P on which f agrees with one affine piece.
struct Region<'a> {
    piece: &'a AffinePiece,
    vertices: Vec<Point>,
    halfspaces: Vec<HalfSpace>,
}

fn linearity_regions<'a>(
    p: &LatticePolytope,
    f: &'a PLConvexFunction,
) -> Result<Vec<Region<'a>>, ToricError> {
    f.validate(p.dim())?;
    let n = p.dim();
    let pieces = f.distinct_pieces();
    if pieces.len() > 1 && n > 2 {
        return Err(ToricError::UnsupportedDimension { n });
    }
    let base = p.halfspaces();
    let mut out = Vec::new();
    for (j, piece) in pieces.iter().enumerate() {
        let mut hs = base.clone();
        for (l, other) in pieces.iter().enumerate() {
            if l != j {
                hs.push(HalfSpace {
                    normal: piece
                        .c
                        .iter()
                        .zip(&other.c)
                        .map(|(a, b)| Rational::from(a - b))
                        .collect(),
                    offset: Rational::from(piece.d - other.d),
                });
            }
        }
        let vertices = enumerate_vertices(n, &hs);
        if affine_dim(&vertices.iter().collect::<Vec<_>>()) == n as isize {
            out.push(Region {
                piece,
                vertices,
                halfspaces: hs,
            });
        }
    }
    Ok(out)
}

/// Triangulates a polytope by pulling its first vertex: cones from it over a
/// triangulation of every facet not containing it.
fn pulling_triangulation(
    ids: &[usize],
    verts: &[Point],
    hs: &[HalfSpace],
    dim: usize,
) -> Vec<Vec<usize>> {
    let v0 = ids[0];
    if dim == 0 {
        return vec![vec![v0]];
    }
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for h in hs {
        let face: Vec<usize> = ids
            .iter()
            .copied()
            .filter(|&v| h.value(&verts[v]).is_zero())
            .collect();
        if face.contains(&v0) || faces.contains(&face) {
            continue;
        }
        let pts: Vec<&Point> = face.iter().map(|&v| &verts[v]).collect();
        if affine_dim(&pts) == dim as isize - 1 {
            faces.push(face);
        }
    }
    faces
        .iter()
        .flat_map(|face| {
            pulling_triangulation(face, verts, hs, dim - 1)
                .into_iter()
                .map(|mut s| {
                    s.insert(0, v0);
                    s
                })
        })
        .collect()
}

/// Complete homogeneous symmetric polynomial `h_r(x_0, …, x_m)`.
pub fn complete_homogeneous(values: &[Rational], r: u32) -> Rational {
    // h[j] over the variables seen so far; h_j ← h_j + x·h_{j−1}.
    let mut h = vec![Rational::zero(); r as usize + 1];
    h[0] = Rational::one();
    for x in values {
        for j in 1..=r as usize {
            let add = x * &h[j - 1];
            h[j] += add;
        }
    }
    h.pop().expect("r + 1 entries")
}

fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// `∫_Δ ℓ^r dx = vol(Δ) · r! n! / (n + r)! · h_r(ℓ(v_0), …, ℓ(v_n))`.
pub fn simplex_moment(simplex: &[Point], values: &[Rational], r: u32) -> Rational {
    let n = simplex.len() - 1;
    let edges: Vec<Point> = simplex[1..].iter().map(|v| sub(v, &simplex[0])).collect();
    let vol = abs_det(&edges) / Rational::from(factorial(n as u32));
    let weight = Rational::from(factorial(r) * factorial(n as u32))
        / Rational::from(factorial(n as u32 + r));
    vol * weight * complete_homogeneous(values, r)
}

/// `∫_P (f − shift)^r dx`.
fn integrate_shifted(
    p: &LatticePolytope,
    f: &PLConvexFunction,
    r: u32,
    shift: &Rational,
) -> Result<Rational, ToricError> {
    let n = p.dim();
    let mut total = Rational::zero();
    for region in linearity_regions(p, f)? {
        let ids: Vec<usize> = (0..region.vertices.len()).collect();
        for simplex in pulling_triangulation(&ids, &region.vertices, &region.halfspaces, n) {
            let pts: Vec<Point> = simplex
                .iter()
                .map(|&v| region.vertices[v].clone())
                .collect();
            let values: Vec<Rational> = pts.iter().map(|x| region.piece.eval(x) - shift).collect();
            total += simplex_moment(&pts, &values, r);
        }
    }
    Ok(total)
}

pub fn volume(p: &LatticePolytope) -> Rational {
    integrate_shifted(
        p,
        &PLConvexFunction::affine(vec![0; p.dim()], 0),
        0,
        &Rational::zero(),
    )
    .expect("a single piece is supported in every dimension")
}

/// `f̂ = ∫_P f / vol(P)`.
pub fn mean_value(p: &LatticePolytope, f: &PLConvexFunction) -> Result<Rational, ToricError> {
    Ok(integrate_shifted(p, f, 1, &Rational::zero())? / volume(p))
}

/// `∫_P f^r dx`, or `∫_P (f − f̂)^r dx` when `centered`.
pub fn exact_integral(
    p: &LatticePolytope,
    f: &PLConvexFunction,
    r: u32,
    centered: bool,
) -> Result<Rational, ToricError> {
    let shift = if centered {
        mean_value(p, f)?
    } else {
        Rational::zero()
    };
    integrate_shifted(p, f, r, &shift)
}

/// `‖f − f̂‖_∞` on P, attained at a vertex of some linearity region.
pub fn n_infinity(p: &LatticePolytope, f: &PLConvexFunction) -> Result<Rational, ToricError> {
    let fhat = mean_value(p, f)?;
    let regions = linearity_regions(p, f)?;
    Ok(regions
        .iter()
        .flat_map(|reg| reg.vertices.iter())
        .map(|v| (f.eval(v) - &fhat).abs())
        .max()
        .unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub k: i64,
    /// `Tr A̲_k^r / k^{n+r}` (or `Tr A_k / k^{n+1}`).
    pub normalized_trace: Rational,
    pub residual: Rational,
    /// `k · residual`.
    pub scaled_residual: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub label: String,
    pub oracle: Rational,
    pub rows: Vec<ResidualRow>,
    /// Smallest C with `residual ≤ C/k` on every row.
    pub constant: Rational,
    /// Least-squares slope of `ln residual` against `ln k` over the nonzero
    /// residuals; `None` when fewer than two are nonzero.
    pub log_log_slope: Option<f64>,
}

impl ResidualSeries {
    fn build(label: String, oracle: Rational, samples: Vec<(i64, Rational)>) -> Self {
        let rows: Vec<ResidualRow> = samples
            .into_iter()
            .map(|(k, value)| {
                let residual = (&value - &oracle).abs();
                ResidualRow {
                    k,
                    scaled_residual: &residual * Rational::from(k),
                    residual,
                    normalized_trace: value,
                }
            })
            .collect();
        let constant = rows
            .iter()
            .map(|r| r.scaled_residual.clone())
            .max()
            .unwrap_or_default();
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.residual.is_positive())
            .map(|r| ((r.k as f64).ln(), r.residual.to_f64().ln()))
            .collect();
        ResidualSeries {
            label,
            oracle,
            rows,
            constant,
            log_log_slope: least_squares_slope(&pts),
        }
    }

    /// `residual ≤ C/k` on every row, for the given C.
    pub fn bounded_by(&self, c: &Rational) -> bool {
        self.rows.iter().all(|r| &r.scaled_residual <= c)
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Lattice-sum asymptotics against the exact integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub r: u32,
    /// `Tr A̲_k^r / k^{n+r}` against `∫_P (f − f̂)^r`.
    pub centered: ResidualSeries,
    /// `Tr A_k / k^{n+1}` against `∫_P f`. This limit is the k^{n+1}
    /// coefficient of `Tr A_k`, labelled b0 in the Hilbert expansion.
    pub uncentered: ResidualSeries,
}

pub fn verify_trace_asymptotics(
    p: &LatticePolytope,
    f: &PLConvexFunction,
    r: u32,
    k_min: i64,
    k_max: i64,
) -> Result<AsymptoticsReport, ToricError> {
    let n = p.dim() as i32;
    let spectrum = weight_spectrum(p, f, k_min, k_max)?;
    let centered_oracle = exact_integral(p, f, r, true)?;
    let mean_oracle = exact_integral(p, f, 1, false)?;
    let scale = |k: i64, e: i32| Rational::from(k).pow(e).expect("k > 0");

    let centered = spectrum
        .weights
        .keys()
        .map(|&k| {
            let t = spectrum.centered_trace(k, r).expect("k in range");
            (k, t / scale(k, n + r as i32))
        })
        .collect();
    let uncentered = spectrum
        .weights
        .iter()
        .map(|(&k, ws)| (k, Rational::from(ws.iter().sum::<i64>()) / scale(k, n + 1)))
        .collect();
    Ok(AsymptoticsReport {
        r,
        centered: ResidualSeries::build(format!("Tr A̲^{r}/k^(n+{r})"), centered_oracle, centered),
        uncentered: ResidualSeries::build("Tr A/k^(n+1)".into(), mean_oracle, uncentered),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corner() -> PLConvexFunction {
        PLConvexFunction::from_pieces(&[(&[0, 0], 0), (&[1, 1], -1)])
    }

    fn identity() -> PLConvexFunction {
        PLConvexFunction::affine(vec![1], 0)
    }

    #[test]
    fn segment_integrals() {
        let p = LatticePolytope::segment(1).unwrap();
        assert_eq!(
            exact_integral(&p, &identity(), 2, true).unwrap(),
            Rational::frac(1, 12)
        );
        assert_eq!(
            exact_integral(&p, &identity(), 1, false).unwrap(),
            Rational::frac(1, 2)
        );
    }

    #[test]
    fn unit_square_corner() {
        let p = LatticePolytope::unit_square();
        let f = corner();
        assert_eq!(
            exact_integral(&p, &f, 1, false).unwrap(),
            Rational::frac(1, 6)
        );
        assert_eq!(
            exact_integral(&p, &f, 2, false).unwrap(),
            Rational::frac(1, 12)
        );
        assert_eq!(
            exact_integral(&p, &f, 2, true).unwrap(),
            Rational::frac(1, 18)
        );
        assert_eq!(n_infinity(&p, &f).unwrap(), Rational::frac(5, 6));
    }

    #[test]
    fn volumes() {
        assert_eq!(volume(&LatticePolytope::unit_square()), Rational::one());
        assert_eq!(
            volume(&LatticePolytope::segment(3).unwrap()),
            Rational::from(3)
        );
        assert_eq!(
            volume(&LatticePolytope::standard_simplex(3).unwrap()),
            Rational::frac(1, 6)
        );
    }

    #[test]
    fn infinity_norms() {
        let p = LatticePolytope::segment(1).unwrap();
        assert_eq!(n_infinity(&p, &identity()).unwrap(), Rational::frac(1, 2));
        let c = PLConvexFunction::affine(vec![0], 4);
        assert_eq!(n_infinity(&p, &c).unwrap(), Rational::zero());
        // |x − 1/2| on [0, 1] has its maximum of f − f̂ at the endpoints but
        // its minimum at the kink.
        let v = PLConvexFunction::from_pieces(&[(&[2], -1), (&[-2], 1)]);
        assert_eq!(mean_value(&p, &v).unwrap(), Rational::frac(1, 2));
        assert_eq!(n_infinity(&p, &v).unwrap(), Rational::frac(1, 2));
    }

    #[test]
    fn three_dimensional_support() {
        let s = LatticePolytope::standard_simplex(3).unwrap();
        let f = PLConvexFunction::affine(vec![1, 0, 0], 0);
        // ∫ x over the standard 3-simplex = 1/24
        assert_eq!(
            exact_integral(&s, &f, 1, false).unwrap(),
            Rational::frac(1, 24)
        );
        let g = PLConvexFunction::from_pieces(&[(&[1, 0, 0], 0), (&[0, 1, 0], 0)]);
        assert_eq!(
            exact_integral(&s, &g, 1, false),
            Err(ToricError::UnsupportedDimension { n: 3 })
        );
    }

    #[test]
    fn duplicate_pieces_are_counted_once() {
        let p = LatticePolytope::unit_square();
        let f = PLConvexFunction::from_pieces(&[(&[0, 0], 0), (&[1, 1], -1), (&[0, 0], 0)]);
        assert_eq!(
            exact_integral(&p, &f, 1, false).unwrap(),
            Rational::frac(1, 6)
        );
    }

    #[test]
    fn homogeneous_polynomials() {
        let v = [Rational::from(1), Rational::from(2)];
        // h_2(1, 2) = 1 + 2 + 4
        assert_eq!(complete_homogeneous(&v, 2), Rational::from(7));
        assert_eq!(complete_homogeneous(&v, 0), Rational::one());
    }

    #[test]
    fn segment_rate_closed_form() {
        let p = LatticePolytope::segment(1).unwrap();
        let rep = verify_trace_asymptotics(&p, &identity(), 2, 1, 10).unwrap();
        for row in &rep.uncentered.rows {
            // (k + 1)/(2k) − 1/2 = 1/(2k)
            assert_eq!(row.residual, Rational::frac(1, 2 * row.k));
        }
        assert_eq!(rep.uncentered.constant, Rational::frac(1, 2));

        let zero = PLConvexFunction::affine(vec![0], 0);
        let rep = verify_trace_asymptotics(&p, &zero, 2, 1, 10).unwrap();
        assert!(rep.centered.rows.iter().all(|r| r.residual.is_zero()));
        assert!(rep.uncentered.rows.iter().all(|r| r.residual.is_zero()));
        assert_eq!(rep.centered.log_log_slope, None);
    }
}
