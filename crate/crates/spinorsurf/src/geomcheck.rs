//! Discrete extrinsic geometry of immersed grids.
//!
//! All immersions are stored as quaternion fields: ℝ³ and Nil₃ points are
//! imaginary (`x₁ i + x₂ j + x₃ k`), ℝ⁴ points use all four components.
//! Tangent vectors of Nil₃ immersions are always expressed in the
//! left-invariant frame `(E₁, E₂, E₃)`, where the metric is Euclidean.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{dx, dy, pointwise, Domain, Field, ResidualReport};
use crate::quatcliff::Quaternion;

/// Smallest admissible `|f_x|²`, `|f_y|²`.
pub const DEGENERATE_METRIC: f64 = 1e-14;

/// Target space of an immersion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Ambient {
    R3,
    Nil3 { tau: f64 },
    R4,
}

impl Ambient {
    pub fn tau(&self) -> f64 {
        match self {
            Ambient::Nil3 { tau } => *tau,
            _ => 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Ambient::R4 => 4,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ambient::R3 => "R3",
            Ambient::Nil3 { .. } => "Nil3",
            Ambient::R4 => "R4",
        }
    }
}

/// A grid of points in ℝ³, Nil₃(τ) or ℝ⁴.
#[derive(Clone, Debug, PartialEq)]
pub struct Immersion {
    pub ambient: Ambient,
    pub points: Field<Quaternion>,
    /// Tangent vectors `(f_x, f_y)` known in closed form, if any. When absent,
    /// they are obtained by finite differences of `points`.
    pub tangents: Option<(Field<Quaternion>, Field<Quaternion>)>,
}

impl Immersion {
    pub fn new(ambient: Ambient, points: Field<Quaternion>) -> Result<Self> {
        if points.values.iter().any(|p| !p.is_finite()) {
            return invalid("immersion has non-finite points");
        }
        if ambient != Ambient::R4 && points.values.iter().any(|p| p.w != 0.0) {
            return invalid("three-dimensional immersion stored with a real part");
        }
        Ok(Immersion { ambient, points, tangents: None })
    }

    pub fn with_tangents(mut self, fx: Field<Quaternion>, fy: Field<Quaternion>) -> Self {
        self.tangents = Some((fx, fy));
        self
    }

    pub fn without_tangents(&self) -> Self {
        Immersion { ambient: self.ambient, points: self.points.clone(), tangents: None }
    }

    pub fn domain(&self) -> Domain {
        self.points.domain
    }

    /// Grid point used as the base of path integrations and sign continuity.
    pub fn base(&self) -> (usize, usize) {
        base_point(&self.domain())
    }

    /// `(f_x, f_y)`: closed-form tangents when stored, finite differences otherwise.
    pub fn tangent_fields(&self) -> (Field<Quaternion>, Field<Quaternion>) {
        match &self.tangents {
            Some((a, b)) => (a.clone(), b.clone()),
            None => self.fd_tangents(),
        }
    }

    /// Finite-difference tangents, in frame components for Nil₃.
    pub fn fd_tangents(&self) -> (Field<Quaternion>, Field<Quaternion>) {
        let (fx, fy) = (dx(&self.points), dy(&self.points));
        match self.ambient {
            Ambient::Nil3 { tau } => {
                let conv = |d: &Field<Quaternion>| {
                    self.points.zip(d, move |p, v| {
                        Quaternion::pure([v.x, v.y, v.z - tau * (p.x * v.y - p.y * v.x)])
                    })
                };
                (conv(&fx), conv(&fy))
            }
            _ => (fx, fy),
        }
    }

    /// Point `k` as a vector of ambient coordinates.
    pub fn coords(&self, k: usize) -> Vec<f64> {
        let p = self.points.values[k];
        match self.ambient {
            Ambient::R4 => p.to_array().to_vec(),
            _ => p.vec().to_vec(),
        }
    }
}

/// The grid point nearest to `z = 0`.
pub fn base_point(d: &Domain) -> (usize, usize) {
    d.nearest(0.0, 0.0)
}

/// First fundamental form `E, F, G` and its deviation from conformality.
#[derive(Clone, Debug)]
pub struct FirstForm {
    pub e: Field<f64>,
    pub f: Field<f64>,
    pub g: Field<f64>,
    /// `max(|E − G|, |F|) / max(E, G)`.
    pub conformality: ResidualReport,
}

pub fn first_form(imm: &Immersion) -> Result<FirstForm> {
    let (fx, fy) = imm.tangent_fields();
    let e = fx.map(|v| v.norm_sqr());
    let g = fy.map(|v| v.norm_sqr());
    let f = fx.zip(&fy, |a, b| a.dot(b));
    if e.values.iter().chain(g.values.iter()).any(|&v| !(v > DEGENERATE_METRIC)) {
        return Err(Error::Invariant("degenerate first fundamental form".into()));
    }
    let d = e.domain;
    let rel = pointwise(d, |k| {
        let (e, f, g) = (e.values[k], f.values[k], g.values[k]);
        (e - g).abs().max(f.abs()) / e.max(g)
    });
    let conformality = ResidualReport::from_values("conformality", &rel, 1, None);
    Ok(FirstForm { e, f, g, conformality })
}

/// Conformal factor `e^ρ = |f_x|`.
pub fn conformal_factor(imm: &Immersion) -> Field<f64> {
    imm.tangent_fields().0.map(|v| v.norm())
}

/// Extrinsic curvature of a surface in ℝ³.
#[derive(Clone, Debug)]
pub struct CurvatureR3 {
    pub normal: Field<Quaternion>,
    /// Shape operator in the orthonormal frame `e^{−ρ}(f_x, f_y)`.
    pub h11: Field<f64>,
    pub h12: Field<f64>,
    pub h22: Field<f64>,
    pub mean: Field<f64>,
}

/// `ν = f_x × f_y / |f_x × f_y|`, `S` from second differences, `H = ½ tr S`.
pub fn mean_curvature_r3(imm: &Immersion) -> Result<CurvatureR3> {
    if imm.ambient != Ambient::R3 {
        return invalid("mean_curvature_r3 needs an immersion into R3");
    }
    first_form(imm)?;
    let (fx, fy) = imm.tangent_fields();
    let (fxx, fxy, fyx, fyy) = (dx(&fx), dy(&fx), dx(&fy), dy(&fy));
    let normal = fx.zip(&fy, |a, b| a.cross(b).normalized());
    let d = fx.domain;
    let e2r = pointwise(d, |k| 0.5 * (fx.values[k].norm_sqr() + fy.values[k].norm_sqr()));
    let sec = |a: &Field<Quaternion>| pointwise(d, |k| a.values[k].dot(normal.values[k]) / e2r.values[k]);
    let h11 = sec(&fxx);
    let h22 = sec(&fyy);
    let h12 = pointwise(d, |k| {
        0.5 * (fxy.values[k] + fyx.values[k]).dot(normal.values[k]) / e2r.values[k]
    });
    let mean = h11.zip(&h22, |a, b| 0.5 * (a + b));
    Ok(CurvatureR3 { normal, h11, h12, h22, mean })
}

/// Orthonormal frame `(n₁, n₂)` of the normal bundle of a surface in ℝ⁴.
#[derive(Clone, Debug)]
pub struct NormalFrame {
    pub n1: Field<Quaternion>,
    pub n2: Field<Quaternion>,
    /// Coordinate axes of ℍ that were orthonormalized against the tangent plane.
    pub axes: (usize, usize),
}

fn unit_tangents(imm: &Immersion) -> (Field<Quaternion>, Field<Quaternion>) {
    let (fx, fy) = imm.tangent_fields();
    (fx.map(|v| v.normalized()), fy.map(|v| v.normalized()))
}

fn axis(k: usize) -> Quaternion {
    let mut a = [0.0; 4];
    a[k] = 1.0;
    Quaternion::from_array(a)
}

fn reject(mut b: Quaternion, against: &[Quaternion]) -> Quaternion {
    for e in against {
        b = b - *e * b.dot(*e);
    }
    b
}

fn det4(c: [Quaternion; 4]) -> f64 {
    nalgebra::Matrix4::from_fn(|r, k| c[k].to_array()[r]).determinant()
}

/// Gram–Schmidt of the two coordinate axes most transverse to the tangent
/// plane at the base point, oriented so that `(e₁, e₂, n₁, n₂)` is positive.
pub fn normal_frame_r4(imm: &Immersion) -> Result<NormalFrame> {
    if imm.ambient != Ambient::R4 {
        return invalid("normal_frame_r4 needs an immersion into R4");
    }
    first_form(imm)?;
    let (e1, e2) = unit_tangents(imm);
    let d = imm.domain();
    let (bx, by) = imm.base();
    let kb = d.index(bx, by);
    let t = [e1.values[kb], e2.values[kb]];
    let first = (0..4).max_by(|&a, &b| reject(axis(a), &t).norm().total_cmp(&reject(axis(b), &t).norm())).unwrap();
    let n_first = reject(axis(first), &t).normalized();
    let tn = [t[0], t[1], n_first];
    let second = (0..4)
        .filter(|&a| a != first)
        .max_by(|&a, &b| reject(axis(a), &tn).norm().total_cmp(&reject(axis(b), &tn).norm()))
        .unwrap();
    let frames: Vec<Option<(Quaternion, Quaternion)>> = crate::par::map_indexed(d.len(), |k| {
        let (a, b) = (e1.values[k], e2.values[k]);
        let b = reject(b, &[a]).normalized();
        let n1 = reject(axis(first), &[a, b]);
        if n1.norm() < 1e-6 {
            return None;
        }
        let n1 = n1.normalized();
        let n2 = reject(axis(second), &[a, b, n1]);
        if n2.norm() < 1e-6 {
            return None;
        }
        let n2 = n2.normalized();
        let s = det4([a, b, n1, n2]).signum();
        Some((n1, n2 * s))
    });
    if frames.iter().any(|f| f.is_none()) {
        return Err(Error::Invariant("normal frame degenerates inside the domain".into()));
    }
    let n1 = pointwise(d, |k| frames[k].unwrap().0);
    let n2 = pointwise(d, |k| frames[k].unwrap().1);
    Ok(NormalFrame { n1, n2, axes: (first, second) })
}

/// Mean curvature vector components and normal connection of a surface in ℝ⁴.
#[derive(Clone, Debug)]
pub struct NormalData {
    /// `H_β = ½⟨B(e₁,e₁) + B(e₂,e₂), n_β⟩`.
    pub h3: Field<f64>,
    pub h4: Field<f64>,
    /// `c_x = ⟨∂_x n₁, n₂⟩`, `c_y = ⟨∂_y n₁, n₂⟩`.
    pub cx: Field<f64>,
    pub cy: Field<f64>,
}

pub fn mean_curvature_r4(imm: &Immersion, frame: &NormalFrame) -> Result<NormalData> {
    if imm.ambient != Ambient::R4 {
        return invalid("mean_curvature_r4 needs an immersion into R4");
    }
    let (e1, e2) = unit_tangents(imm);
    let d = imm.domain();
    let ortho = pointwise(d, |k| {
        let v = [e1.values[k], e2.values[k], frame.n1.values[k], frame.n2.values[k]];
        let mut err: f64 = 0.0;
        for i in 0..4 {
            for j in i..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                // e₁ ⟂ e₂ only up to the conformality defect; skip that pair.
                if (i, j) != (0, 1) {
                    err = err.max((v[i].dot(v[j]) - target).abs());
                }
            }
        }
        err
    });
    if crate::par::max(&ortho.values) > 1e-8 {
        return Err(Error::Invariant("normal frame is not orthonormal".into()));
    }
    let (fx, fy) = imm.tangent_fields();
    let lap = dx(&fx).zip(&dy(&fy), |a, b| a + b);
    let e2r = pointwise(d, |k| 0.5 * (fx.values[k].norm_sqr() + fy.values[k].norm_sqr()));
    let h = |n: &Field<Quaternion>| pointwise(d, |k| 0.5 * lap.values[k].dot(n.values[k]) / e2r.values[k]);
    let (dn1x, dn1y) = (dx(&frame.n1), dy(&frame.n1));
    Ok(NormalData {
        h3: h(&frame.n1),
        h4: h(&frame.n2),
        cx: dn1x.zip(&frame.n2, |a, b| a.dot(b)),
        cy: dn1y.zip(&frame.n2, |a, b| a.dot(b)),
    })
}

/// Best rigid motion `x ↦ R x + t` taking one immersion onto another.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Congruence {
    /// Row-major rotation matrix.
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    /// RMS distance after alignment by a proper rotation.
    pub rms: f64,
    /// RMS of the best orthogonal fit when that fit is a reflection.
    pub reflection_rms: Option<f64>,
}

impl Congruence {
    /// Whether a reflection aligns the surfaces strictly better than any rotation.
    pub fn reflection_preferred(&self) -> bool {
        self.reflection_rms.map_or(false, |r| r < self.rms)
    }
}

/// Least-squares rigid alignment of `f` onto `g` (Kabsch).
pub fn congruence(f: &Immersion, g: &Immersion) -> Result<Congruence> {
    if f.ambient != g.ambient {
        return invalid("congruence between different ambient spaces");
    }
    if matches!(f.ambient, Ambient::Nil3 { .. }) {
        return invalid("congruence is only defined for Euclidean ambients");
    }
    if f.domain() != g.domain() {
        return invalid("congruence needs identical domains");
    }
    let dim = f.ambient.dim();
    let n = f.domain().len();
    let a = DMatrix::from_fn(n, dim, |k, c| f.coords(k)[c]);
    let b = DMatrix::from_fn(n, dim, |k, c| g.coords(k)[c]);
    let ca = a.row_mean();
    let cb = b.row_mean();
    let mut a0 = a.clone();
    let mut b0 = b.clone();
    for mut row in a0.row_iter_mut() {
        row -= &ca;
    }
    for mut row in b0.row_iter_mut() {
        row -= &cb;
    }
    let hcov = a0.transpose() * &b0;
    let svd = hcov.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Solver("SVD failed in congruence".into())),
    };
    let v = vt.transpose();
    let ut = u.transpose();
    let raw = &v * &ut;
    let det = raw.determinant();
    let mut dmat = DMatrix::<f64>::identity(dim, dim);
    dmat[(dim - 1, dim - 1)] = det.signum();
    let rot = &v * dmat * &ut;
    let rms_of = |r: &DMatrix<f64>| {
        let aligned = &a0 * r.transpose();
        ((aligned - &b0).norm_squared() / n as f64).sqrt()
    };
    let rms = rms_of(&rot);
    let reflection_rms = if det < 0.0 { Some(rms_of(&raw)) } else { None };
    let t = cb.transpose() - &rot * ca.transpose();
    Ok(Congruence {
        rotation: (0..dim).map(|r| (0..dim).map(|c| rot[(r, c)]).collect()).collect(),
        translation: t.iter().copied().collect(),
        rms,
        reflection_rms,
    })
}
