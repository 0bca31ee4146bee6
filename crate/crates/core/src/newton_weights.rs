//! Newton diagrams of planar systems and the weights of ℂP³(p,q,r,s).
//!
//! A monomial xⁱyʲzᵏ of `f` contributes the lattice point (i−1, j, k+1), one
//! of `g` the point (i, j−1, k+1). When the upper convex hull of these points
//! has a single compact face with primitive positive normal (p,q,r) at level
//! s, the system is quasi-homogeneous of weight (p,q,r,s) up to lower-order
//! terms.

use crate::algebra::{sym, Monomial, Poly, Var, VarWeights};
use num_integer::Integer;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Weights {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightsError {
    #[error("weights ({p},{q},{r},{s}) violate 1 <= p,q,r <= s")]
    OutOfRange { p: i64, q: i64, r: i64, s: i64 },
    #[error("weights {0:?} have three entries with a common factor {1}")]
    NotCoprime([i64; 4], i64),
    #[error("Newton diagram has no compact two-dimensional face")]
    NoCompactFace,
    #[error("Newton diagram has {} compact faces: {}", .0.len(), fmt_faces(.0))]
    MultipleFaces(Vec<([i64; 3], i64)>),
}

fn fmt_faces(f: &[([i64; 3], i64)]) -> String {
    f.iter().map(|(n, l)| format!("{}x+{}y+{}z={}", n[0], n[1], n[2], l)).collect::<Vec<_>>().join(", ")
}

impl Weights {
    pub fn new(p: i64, q: i64, r: i64, s: i64) -> Result<Self, WeightsError> {
        if [p, q, r].iter().any(|&v| v < 1 || v > s) {
            return Err(WeightsError::OutOfRange { p, q, r, s });
        }
        let all = [p, q, r, s];
        for skip in 0..4 {
            let g = (0..4).filter(|&i| i != skip).fold(0i64, |acc, i| acc.gcd(&all[i]));
            if g != 1 {
                return Err(WeightsError::NotCoprime(all, g));
            }
        }
        Ok(Weights { p, q, r, s })
    }

    pub fn as_array(&self) -> [i64; 4] {
        [self.p, self.q, self.r, self.s]
    }

    /// Weight table for the original coordinates x, y, z.
    pub fn var_weights(&self) -> VarWeights {
        [(sym::x(), self.p), (sym::y(), self.q), (sym::z(), self.r)].into_iter().collect()
    }

    /// Weighted degree the principal part of `f` (resp. `g`) must have.
    pub fn f_degree(&self) -> i64 {
        self.s - self.r + self.p
    }

    pub fn g_degree(&self) -> i64 {
        self.s - self.r + self.q
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.p, self.q, self.r, self.s)
    }
}

/// dx/dz = f(x,y,z), dy/dz = g(x,y,z), polynomial in x, y, z.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarODE {
    pub f: Poly,
    pub g: Poly,
}

impl PlanarODE {
    pub fn new(f: Poly, g: Poly) -> Self {
        PlanarODE { f, g }
    }

    pub fn vars() -> [Var; 3] {
        [sym::x(), sym::y(), sym::z()]
    }

    pub fn is_polynomial(&self) -> bool {
        self.f.terms().chain(self.g.terms()).all(|(m, _)| m.pairs().iter().all(|p| p.1 >= 0))
    }

    /// Parameter symbols appearing in the system.
    pub fn parameters(&self) -> BTreeSet<Var> {
        self.f.vars().into_iter().chain(self.g.vars()).filter(|v| v.is_parameter()).collect()
    }

    /// Splits into (principal part, perturbation) for the given weights.
    pub fn split(&self, w: &Weights) -> (PlanarODE, (Poly, Poly)) {
        let vw = w.var_weights();
        let fp = self.f.weighted_part(&vw, w.f_degree());
        let gp = self.g.weighted_part(&vw, w.g_degree());
        let pert = (&self.f - &fp, &self.g - &gp);
        (PlanarODE::new(fp, gp), pert)
    }
}

fn xyz_exponents(m: &Monomial) -> (i64, i64, i64) {
    (m.exp(sym::x()) as i64, m.exp(sym::y()) as i64, m.exp(sym::z()) as i64)
}

/// Lattice points of the Newton diagram.
pub fn exponent_lattice(ode: &PlanarODE) -> BTreeSet<[i64; 3]> {
    let mut pts = BTreeSet::new();
    for (m, _) in ode.f.terms() {
        let (i, j, k) = xyz_exponents(m);
        pts.insert([i - 1, j, k + 1]);
    }
    for (m, _) in ode.g.terms() {
        let (i, j, k) = xyz_exponents(m);
        pts.insert([i, j - 1, k + 1]);
    }
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonDiagramResult {
    pub points: Vec<[i64; 3]>,
    pub normal: [i64; 3],
    pub level: i64,
    pub unique_face: bool,
}

fn cross(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [i64; 3], b: [i64; 3]) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// All supporting planes with strictly positive normal that contain at least
/// three non-collinear lattice points: the compact faces of the upper hull of
/// the points minus the positive octant.
pub fn compact_faces(points: &BTreeSet<[i64; 3]>) -> Vec<([i64; 3], i64)> {
    let pts: Vec<[i64; 3]> = points.iter().copied().collect();
    let mut faces: BTreeSet<([i64; 3], i64)> = BTreeSet::new();
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            for c in b + 1..pts.len() {
                let u = [pts[b][0] - pts[a][0], pts[b][1] - pts[a][1], pts[b][2] - pts[a][2]];
                let v = [pts[c][0] - pts[a][0], pts[c][1] - pts[a][1], pts[c][2] - pts[a][2]];
                let mut n = cross(u, v);
                if n == [0, 0, 0] {
                    continue;
                }
                if n.iter().all(|&x| x < 0) {
                    n = [-n[0], -n[1], -n[2]];
                }
                if !n.iter().all(|&x| x > 0) {
                    continue;
                }
                let g = n[0].gcd(&n[1]).gcd(&n[2]);
                let n = [n[0] / g, n[1] / g, n[2] / g];
                let level = dot(n, pts[a]);
                if pts.iter().all(|p| dot(n, *p) <= level) {
                    faces.insert((n, level));
                }
            }
        }
    }
    faces.into_iter().collect()
}

/// Weights from the unique compact face of the Newton diagram.
pub fn newton_face_weights(points: &BTreeSet<[i64; 3]>) -> Result<Weights, WeightsError> {
    let faces = compact_faces(points);
    match faces.as_slice() {
        [] => Err(WeightsError::NoCompactFace),
        [(n, level)] => Weights::new(n[0], n[1], n[2], *level),
        _ => Err(WeightsError::MultipleFaces(faces)),
    }
}

pub fn newton_diagram(ode: &PlanarODE) -> Result<NewtonDiagramResult, WeightsError> {
    let pts = exponent_lattice(ode);
    let faces = compact_faces(&pts);
    let w = newton_face_weights(&pts)?;
    Ok(NewtonDiagramResult {
        points: pts.into_iter().collect(),
        normal: [w.p, w.q, w.r],
        level: w.s,
        unique_face: faces.len() == 1,
    })
}

/// f(λᵖx, λᑫy, λʳz) = λ^{s−r+p} f and likewise for g with s−r+q.
pub fn check_quasi_homogeneous(ode: &PlanarODE, w: &Weights) -> bool {
    let vw = w.var_weights();
    let ok = |p: &Poly, d: i64| p.terms().all(|(m, _)| m.weighted(&vw) == d);
    ok(&ode.f, w.f_degree()) && ok(&ode.g, w.g_degree())
}

/// Every perturbation monomial lies strictly below the Newton face.
pub fn check_perturbation_lower_order(g_part: &(Poly, Poly), w: &Weights) -> bool {
    let vw = w.var_weights();
    let ok = |p: &Poly, d: i64| p.terms().all(|(m, _)| m.weighted(&vw) < d);
    ok(&g_part.0, w.f_degree()) && ok(&g_part.1, w.g_degree())
}

/// Invariance under (x,y,z) ↦ (ωᵖx, ωᑫy, ωʳz) with ω a primitive s-th root of
/// unity, decided by exponent congruences modulo s.
pub fn check_zs_invariance(ode: &PlanarODE, w: &Weights) -> bool {
    let vw = w.var_weights();
    let ok = |p: &Poly, d: i64| p.terms().all(|(m, _)| (m.weighted(&vw) - d).rem_euclid(w.s) == 0);
    ok(&ode.f, w.f_degree()) && ok(&ode.g, w.g_degree())
}
