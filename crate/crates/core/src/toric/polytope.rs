use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{affine_dim, dot, for_each_subset, kernel_line, rank, solve, Point};
use super::ToricError;
use crate::exact::Rational;

/// One defining inequality `⟨normal, x⟩ + offset ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn new(normal: Vec<i64>, offset: i64) -> Self {
        Facet { normal, offset }
    }
}

/// An inequality with rational data, used for clipped regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct HalfSpace {
    pub normal: Point,
    pub offset: Rational,
}

impl HalfSpace {
    pub fn value(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x) + &self.offset
    }
}

impl From<&Facet> for HalfSpace {
    fn from(f: &Facet) -> Self {
        HalfSpace {
            normal: f.normal.iter().map(|&u| Rational::from(u)).collect(),
            offset: Rational::from(f.offset),
        }
    }
}

/// Exact vertex enumeration: every feasible point where `n` linearly
/// independent constraints are tight, in discovery order.
pub(crate) fn enumerate_vertices(n: usize, halfspaces: &[HalfSpace]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for_each_subset(halfspaces.len(), n, |idx| {
        let a: Vec<Point> = idx.iter().map(|&i| halfspaces[i].normal.clone()).collect();
        let b: Vec<Rational> = idx.iter().map(|&i| -halfspaces[i].offset.clone()).collect();
        if let Some(x) = solve(&a, &b) {
            if halfspaces.iter().all(|h| !h.value(&x).is_negative()) && !out.contains(&x) {
                out.push(x);
            }
        }
    });
    out
}

/// Whether the feasible region has a nonzero recession direction.
fn has_recession_ray(n: usize, halfspaces: &[HalfSpace]) -> bool {
    let normals: Vec<Point> = halfspaces.iter().map(|h| h.normal.clone()).collect();
    if rank(&normals) < n {
        return true;
    }
    let mut found = false;
    for_each_subset(halfspaces.len(), n - 1, |idx| {
        if found {
            return;
        }
        let a: Vec<Point> = idx.iter().map(|&i| normals[i].clone()).collect();
        let Some(y) = kernel_line(&a, n) else {
            return;
        };
        let neg: Point = y.iter().map(|v| -v.clone()).collect();
        found = [y, neg]
            .iter()
            .any(|d| normals.iter().all(|u| !dot(u, d).is_negative()));
    });
    found
}

/// A full-dimensional lattice polytope `{x : ⟨u_i, x⟩ + λ_i ≥ 0}` with
/// integral vertices, `1 ≤ n ≤ 3`.
///
/// JSON form: `{"n": n, "vertices": [[…], …], "facets": [{"normal": […], "offset": λ}, …]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeRepr")]
pub struct LatticePolytope {
    n: usize,
    vertices: Vec<Vec<i64>>,
    facets: Vec<Facet>,
}

#[derive(Deserialize)]
struct PolytopeRepr {
    n: usize,
    #[serde(default)]
    vertices: Option<Vec<Vec<i64>>>,
    facets: Vec<Facet>,
}

impl TryFrom<PolytopeRepr> for LatticePolytope {
    type Error = ToricError;
    fn try_from(r: PolytopeRepr) -> Result<Self, Self::Error> {
        match r.vertices {
            Some(v) => LatticePolytope::new(r.n, v, r.facets),
            None => LatticePolytope::from_facets(r.n, r.facets),
        }
    }
}

impl LatticePolytope {
    /// Validates the facet description and computes the vertices.
    pub fn from_facets(n: usize, facets: Vec<Facet>) -> Result<Self, ToricError> {
        if !(1..=3).contains(&n) {
            return Err(ToricError::UnsupportedDimension { n });
        }
        if let Some(f) = facets.iter().find(|f| f.normal.len() != n) {
            return Err(ToricError::DimensionMismatch {
                expected: n,
                got: f.normal.len(),
            });
        }
        let hs: Vec<HalfSpace> = facets.iter().map(HalfSpace::from).collect();
        if has_recession_ray(n, &hs) {
            return Err(ToricError::Unbounded);
        }
        let verts = enumerate_vertices(n, &hs);
        if verts.is_empty() {
            return Err(ToricError::Empty);
        }
        if affine_dim(&verts.iter().collect::<Vec<_>>()) < n as isize {
            return Err(ToricError::NotFullDimensional);
        }
        let vertices = verts
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| x.to_i64().filter(|_| x.is_integer()))
                    .collect::<Option<Vec<i64>>>()
                    .ok_or_else(|| ToricError::NonIntegralVertex {
                        vertex: v.iter().map(|x| x.to_string()).collect(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LatticePolytope {
            n,
            vertices,
            facets,
        })
    }

    /// Validates that `vertices` are exactly the extreme points of the facet
    /// description.
    pub fn new(n: usize, vertices: Vec<Vec<i64>>, facets: Vec<Facet>) -> Result<Self, ToricError> {
        let p = Self::from_facets(n, facets)?;
        let mut given = vertices.clone();
        given.sort();
        given.dedup();
        let mut computed = p.vertices.clone();
        computed.sort();
        if given != computed || given.len() != vertices.len() {
            return Err(ToricError::VertexMismatch);
        }
        Ok(LatticePolytope { vertices, ..p })
    }

    /// The segment `[0, m]`.
    pub fn segment(m: i64) -> Result<Self, ToricError> {
        Self::from_facets(1, vec![Facet::new(vec![1], 0), Facet::new(vec![-1], m)])
    }

    /// `[0, 1]²`.
    pub fn unit_square() -> Self {
        Self::from_facets(
            2,
            vec![
                Facet::new(vec![1, 0], 0),
                Facet::new(vec![0, 1], 0),
                Facet::new(vec![-1, 0], 1),
                Facet::new(vec![0, -1], 1),
            ],
        )
        .expect("unit square is valid")
    }

    /// The simplex with vertices `0, e_1, …, e_n`.
    pub fn standard_simplex(n: usize) -> Result<Self, ToricError> {
        let mut facets: Vec<Facet> = (0..n)
            .map(|i| {
                let mut u = vec![0; n];
                u[i] = 1;
                Facet::new(u, 0)
            })
            .collect();
        facets.push(Facet::new(vec![-1; n], 1));
        Self::from_facets(n, facets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub(crate) fn halfspaces(&self) -> Vec<HalfSpace> {
        self.facets.iter().map(HalfSpace::from).collect()
    }

    pub fn contains_scaled(&self, alpha: &[i64], k: i64) -> bool {
        self.facets.iter().all(|f| {
            f.normal.iter().zip(alpha).map(|(u, a)| u * a).sum::<i64>() + k * f.offset >= 0
        })
    }

    /// All `α ∈ kP ∩ Zⁿ`, in lexicographic order.
    pub fn lattice_points(&self, k: i64) -> Vec<Vec<i64>> {
        let lo: Vec<i64> = (0..self.n)
            .map(|i| self.vertices.iter().map(|v| k * v[i]).min().unwrap())
            .collect();
        let hi: Vec<i64> = (0..self.n)
            .map(|i| self.vertices.iter().map(|v| k * v[i]).max().unwrap())
            .collect();
        (lo[0]..=hi[0])
            .into_par_iter()
            .flat_map_iter(|x0| {
                let mut out = Vec::new();
                let mut cur = vec![x0];
                self.fill_box(&lo, &hi, k, &mut cur, &mut out);
                out
            })
            .collect()
    }

    fn fill_box(
        &self,
        lo: &[i64],
        hi: &[i64],
        k: i64,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let i = cur.len();
        if i == self.n {
            if self.contains_scaled(cur, k) {
                out.push(cur.clone());
            }
            return;
        }
        for x in lo[i]..=hi[i] {
            cur.push(x);
            self.fill_box(lo, hi, k, cur, out);
            cur.pop();
        }
    }
}
