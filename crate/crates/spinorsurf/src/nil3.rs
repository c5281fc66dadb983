//! The Heisenberg group Nil₃(τ) in exponential coordinates.
//!
//! Product `(x)·(y) = (x₁+y₁, x₂+y₂, x₃+y₃ + τ(x₁y₂ − x₂y₁))`, left-invariant
//! frame `E₁ = ∂₁ − τx₂∂₃`, `E₂ = ∂₂ + τx₁∂₃`, `E₃ = ∂₃`, so that
//! `[E₁, E₂] = 2τE₃`. Tangent vectors are handled through their components
//! in this frame, in which the metric is Euclidean.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac3::{integrand, SpinorField3, SurfaceData3};
use crate::error::{invalid, Error, Result};
use crate::geomcheck::{base_point, first_form, Ambient, Immersion};
use crate::grid::{dx, dy, integrate_form, path_dependence, pointwise, Field, ResidualReport};
use crate::quatcliff::Quaternion;

/// A point of Nil₃(τ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nil3Point {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub tau: f64,
}

impl Nil3Point {
    pub fn new(x1: f64, x2: f64, x3: f64, tau: f64) -> Self {
        Nil3Point { x1, x2, x3, tau }
    }

    pub fn identity(tau: f64) -> Self {
        Nil3Point::new(0.0, 0.0, 0.0, tau)
    }

    pub fn inverse(self) -> Self {
        Nil3Point::new(-self.x1, -self.x2, -self.x3, self.tau)
    }

    pub fn from_quaternion(q: Quaternion, tau: f64) -> Self {
        Nil3Point::new(q.x, q.y, q.z, tau)
    }

    pub fn to_quaternion(self) -> Quaternion {
        Quaternion::pure([self.x1, self.x2, self.x3])
    }

    /// Components in `(E₁, E₂, E₃)` of a coordinate vector `v` at this point.
    pub fn frame_components(self, v: [f64; 3]) -> [f64; 3] {
        [v[0], v[1], v[2] - self.tau * (self.x1 * v[1] - self.x2 * v[0])]
    }

    /// Coordinate vector with frame components `a` at this point.
    pub fn coordinate_vector(self, a: [f64; 3]) -> [f64; 3] {
        [a[0], a[1], a[2] + self.tau * (self.x1 * a[1] - self.x2 * a[0])]
    }
}

/// Group product.
pub fn nil3_mul(p: Nil3Point, q: Nil3Point) -> Result<Nil3Point> {
    if p.tau != q.tau {
        return invalid(format!("Nil3 points with different τ ({} and {})", p.tau, q.tau));
    }
    Ok(Nil3Point::new(p.x1 + q.x1, p.x2 + q.x2, p.x3 + q.x3 + p.tau * (p.x1 * q.x2 - p.x2 * q.x1), p.tau))
}

/// Coordinate expressions of `E₁, E₂, E₃` at `p`.
pub fn left_frame(p: Nil3Point) -> [[f64; 3]; 3] {
    [[1.0, 0.0, -p.tau * p.x2], [0.0, 1.0, p.tau * p.x1], [0.0, 0.0, 1.0]]
}

/// `α = f⁻¹df` in frame components: `α = α_x dx + α_y dy`.
#[derive(Clone, Debug)]
pub struct MaurerCartanField {
    pub alpha_x: Field<Quaternion>,
    pub alpha_y: Field<Quaternion>,
}

/// `α = Re(Z dz)` built from the null integrand of a spinor field.
pub fn maurer_cartan_from_spinor(sf: &SpinorField3) -> MaurerCartanField {
    let (alpha_x, alpha_y) = integrand(sf);
    MaurerCartanField { alpha_x, alpha_y }
}

/// Pointwise `∂_x α_y − ∂_y α_x + [α_x, α_y]` with `[a, b] = 2τ(a₁b₂ − a₂b₁)E₃`.
pub fn integrability_field(mc: &MaurerCartanField, tau: f64) -> Field<Quaternion> {
    let (ayx, axy) = (dx(&mc.alpha_y), dy(&mc.alpha_x));
    pointwise(mc.alpha_x.domain, |k| {
        let (a, b) = (mc.alpha_x.values[k], mc.alpha_y.values[k]);
        ayx.values[k] - axy.values[k] + Quaternion::K * (2.0 * tau * (a.x * b.y - a.y * b.x))
    })
}

pub fn nil3_integrability_residual(mc: &MaurerCartanField, tau: f64) -> ResidualReport {
    ResidualReport::of_field("nil3_integrability", &integrability_field(mc, tau))
}

/// `(τ/2)(|ψ₁|² + |ψ₂|²)(|ψ₂|² − |ψ₁|²)`: the `E₃` defect of the integrability
/// condition for data whose potential is real.
pub fn real_potential_defect(sf: &SpinorField3, tau: f64) -> Field<f64> {
    sf.psi1.zip(&sf.psi2, move |a, b| {
        let (n1, n2) = (a.norm_sqr(), b.norm_sqr());
        0.5 * tau * (n1 + n2) * (n2 - n1)
    })
}

/// `|Im U − (τ/4)(|ψ₂|² − |ψ₁|²)|`.
pub fn potential_residual(sf: &SpinorField3, u: &Field<Complex64>, tau: f64) -> ResidualReport {
    let r = pointwise(sf.domain(), |k| {
        let (n1, n2) = (sf.psi1.values[k].norm_sqr(), sf.psi2.values[k].norm_sqr());
        u.values[k].im - 0.25 * tau * (n2 - n1)
    });
    ResidualReport::from_values("nil3_potential", &r, 1, None)
}

fn coordinate_forms(
    mc: &MaurerCartanField,
    x1: &Field<f64>,
    x2: &Field<f64>,
    tau: f64,
) -> (Field<f64>, Field<f64>) {
    let third = |a: &Field<Quaternion>| {
        pointwise(a.domain, |k| {
            let v = a.values[k];
            v.z + tau * (x1.values[k] * v.y - x2.values[k] * v.x)
        })
    };
    (third(&mc.alpha_x), third(&mc.alpha_y))
}

/// Solves `f⁻¹df = α` with `f = identity` at the base point.
pub fn immerse_mc(mc: &MaurerCartanField, tau: f64) -> Immersion {
    let d = mc.alpha_x.domain;
    let base = base_point(&d);
    let comp = |a: &Field<Quaternion>, c: usize| a.map(move |q| q.vec()[c]);
    let x1 = integrate_form(&comp(&mc.alpha_x, 0), &comp(&mc.alpha_y, 0), base);
    let x2 = integrate_form(&comp(&mc.alpha_x, 1), &comp(&mc.alpha_y, 1), base);
    let (p3, q3) = coordinate_forms(mc, &x1, &x2, tau);
    let x3 = integrate_form(&p3, &q3, base);
    let points = pointwise(d, |k| Quaternion::pure([x1.values[k], x2.values[k], x3.values[k]]));
    Immersion {
        ambient: Ambient::Nil3 { tau },
        points,
        tangents: Some((mc.alpha_x.clone(), mc.alpha_y.clone())),
    }
}

/// The spinor representation formula in Nil₃(τ).
pub fn immerse_nil3(sf: &SpinorField3, tau: f64) -> Immersion {
    immerse_mc(&maurer_cartan_from_spinor(sf), tau)
}

/// Row-first versus column-first integration of the `x₃` equation.
pub fn x3_path_dependence(imm: &Immersion) -> Result<ResidualReport> {
    let tau = match imm.ambient {
        Ambient::Nil3 { tau } => tau,
        _ => return invalid("x3_path_dependence needs a Nil3 immersion"),
    };
    let (ax, ay) = imm.tangent_fields();
    let mc = MaurerCartanField { alpha_x: ax, alpha_y: ay };
    let x1 = imm.points.map(|q| q.x);
    let x2 = imm.points.map(|q| q.y);
    let (p3, q3) = coordinate_forms(&mc, &x1, &x2, tau);
    let mut r = path_dependence(&p3, &q3, imm.base());
    r.name = "x3_path_dependence".into();
    Ok(r)
}

/// Christoffel term of the Levi-Civita connection in frame components:
/// `∇_V W = dW(V) + Γ(V, W)`.
fn gamma(tau: f64, v: Quaternion, w: Quaternion) -> Quaternion {
    Quaternion::pure([
        tau * (v.y * w.z + v.z * w.y),
        -tau * (v.x * w.z + v.z * w.x),
        tau * (v.x * w.y - v.y * w.x),
    ])
}

/// Conformal factor, shape operator, `T` and `λ` of an immersion into ℝ³
/// (`τ = 0`) or Nil₃(τ), with `E₃ = T + λν`.
pub fn surface_data(imm: &Immersion) -> Result<SurfaceData3> {
    let tau = match imm.ambient {
        Ambient::R3 => 0.0,
        Ambient::Nil3 { tau } => tau,
        Ambient::R4 => return invalid("surface_data needs an immersion into R3 or Nil3"),
    };
    first_form(imm)?;
    let (ax, ay) = imm.tangent_fields();
    let d = imm.domain();
    let e_rho = ax.map(|v| v.norm());
    let rho = e_rho.map(f64::ln);
    let e1 = ax.map(|v| v.normalized());
    let e2 = ay.map(|v| v.normalized());
    let nu = e1.zip(&e2, |a, b| a.cross(b).normalized());
    let (axx, axy, ayx, ayy) = (dx(&ax), dx(&ay), dy(&ax), dy(&ay));
    let sec = |k: usize, dw: Quaternion, v: Quaternion, w: Quaternion| {
        (dw + gamma(tau, v, w)).dot(nu.values[k]) / (e_rho.values[k] * e_rho.values[k])
    };
    let (a, b) = (&ax.values, &ay.values);
    let h11 = pointwise(d, |k| sec(k, axx.values[k], a[k], a[k]));
    let h22 = pointwise(d, |k| sec(k, ayy.values[k], b[k], b[k]));
    let h12 = pointwise(d, |k| 0.5 * (sec(k, axy.values[k], a[k], b[k]) + sec(k, ayx.values[k], b[k], a[k])));
    Ok(SurfaceData3 {
        rho_x: dx(&rho),
        rho_y: dy(&rho),
        rho,
        h11,
        h12,
        h22,
        t1: e1.map(|v| v.z),
        t2: e2.map(|v| v.z),
        lambda: nu.map(|v| v.z),
        tau,
    })
}

/// `T` in the tangent frame and `λ = ⟨E₃, ν⟩`.
#[derive(Clone, Debug)]
pub struct TLambda {
    pub t1: Field<f64>,
    pub t2: Field<f64>,
    pub lambda: Field<f64>,
    /// `|λ² + ‖T‖² − 1|`.
    pub unit: ResidualReport,
}

pub fn extract_t_lambda(imm: &Immersion) -> Result<TLambda> {
    let ff = first_form(imm)?;
    if ff.conformality.full_max > crate::dirac3::CONFORMAL_TOL {
        return Err(Error::InvalidInput("immersion is not conformal".into()));
    }
    let (ax, ay) = imm.tangent_fields();
    let e1 = ax.map(|v| v.normalized());
    let e2 = ay.zip(&e1, |b, a| (b - a * b.dot(a)).normalized());
    let nu = e1.zip(&e2, |a, b| a.cross(b));
    let t1 = e1.map(|v| v.z);
    let t2 = e2.map(|v| v.z);
    let lambda = nu.map(|v| v.z);
    let r = pointwise(imm.domain(), |k| {
        lambda.values[k].powi(2) + t1.values[k].powi(2) + t2.values[k].powi(2) - 1.0
    });
    Ok(TLambda { t1, t2, lambda, unit: ResidualReport::from_values("unit_e3", &r, 0, None) })
}

/// `p⁻¹ · f` applied pointwise.
pub fn left_translate(imm: &Immersion, p: Nil3Point) -> Result<Immersion> {
    let tau = imm.ambient.tau();
    let inv = p.inverse();
    let mut pts = Vec::with_capacity(imm.domain().len());
    for q in &imm.points.values {
        pts.push(nil3_mul(inv, Nil3Point::from_quaternion(*q, tau))?.to_quaternion());
    }
    Ok(Immersion { ambient: imm.ambient, points: Field::new(imm.domain(), pts)?, tangents: imm.tangents.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use proptest::prelude::*;

    #[test]
    fn group_law_examples() {
        let p = Nil3Point::new(1.0, 0.0, 0.0, 1.0);
        let q = Nil3Point::new(0.0, 1.0, 0.0, 1.0);
        assert_eq!(nil3_mul(p, q).unwrap(), Nil3Point::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(nil3_mul(q, p).unwrap(), Nil3Point::new(1.0, 1.0, -1.0, 1.0));
        assert_eq!(nil3_mul(p, Nil3Point::identity(1.0)).unwrap(), p);
        assert!(nil3_mul(p, Nil3Point::new(0.0, 0.0, 0.0, 0.5)).is_err());
    }

    #[test]
    fn frame_at_identity_and_flat_limit() {
        let id = left_frame(Nil3Point::identity(0.7));
        assert_eq!(id, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let flat = left_frame(Nil3Point::new(3.0, -2.0, 1.0, 0.0));
        assert_eq!(flat[0][2].abs() + flat[1][2].abs(), 0.0);
    }

    /// Applies the vector field with coordinates `e(p)` to `f` by central differences.
    fn apply(e: impl Fn(Nil3Point) -> [f64; 3], f: &dyn Fn(Nil3Point) -> f64, p: Nil3Point) -> f64 {
        let h = 1e-4;
        let v = e(p);
        let at = |s: f64| f(Nil3Point::new(p.x1 + s * v[0], p.x2 + s * v[1], p.x3 + s * v[2], p.tau));
        (at(h) - at(-h)) / (2.0 * h)
    }

    proptest! {
        #[test]
        fn group_axioms(a in prop::array::uniform3(-3.0f64..3.0), b in prop::array::uniform3(-3.0f64..3.0),
                        c in prop::array::uniform3(-3.0f64..3.0), tau in -2.0f64..2.0) {
            let p = Nil3Point::new(a[0], a[1], a[2], tau);
            let q = Nil3Point::new(b[0], b[1], b[2], tau);
            let r = Nil3Point::new(c[0], c[1], c[2], tau);
            let l = nil3_mul(nil3_mul(p, q).unwrap(), r).unwrap();
            let rr = nil3_mul(p, nil3_mul(q, r).unwrap()).unwrap();
            prop_assert!((l.x3 - rr.x3).abs() < 1e-12 && (l.x1 - rr.x1).abs() < 1e-12);
            let e = nil3_mul(p, p.inverse()).unwrap();
            prop_assert!(e.x1.abs() + e.x2.abs() + e.x3.abs() < 1e-12);
        }

        #[test]
        fn frame_brackets(a in prop::array::uniform3(-2.0f64..2.0), tau in -1.0f64..1.0) {
            let p = Nil3Point::new(a[0], a[1], a[2], tau);
            let e1 = |p: Nil3Point| left_frame(p)[0];
            let e2 = |p: Nil3Point| left_frame(p)[1];
            let e3 = |p: Nil3Point| left_frame(p)[2];
            let x3 = |p: Nil3Point| p.x3;
            let e2x3 = |q: Nil3Point| apply(e2, &x3, q);
            let e1x3 = |q: Nil3Point| apply(e1, &x3, q);
            let br = apply(e1, &e2x3, p) - apply(e2, &e1x3, p);
            prop_assert!((br - 2.0 * tau).abs() < 1e-6);
            let g = |p: Nil3Point| p.x1 * p.x2 + p.x3 * p.x1;
            let e3g = |q: Nil3Point| apply(e3, &g, q);
            let e1g = |q: Nil3Point| apply(e1, &g, q);
            let br13 = apply(e1, &e3g, p) - apply(e3, &e1g, p);
            prop_assert!(br13.abs() < 1e-5);
        }

        #[test]
        fn frame_components_invert(a in prop::array::uniform3(-2.0f64..2.0), v in prop::array::uniform3(-2.0f64..2.0)) {
            let p = Nil3Point::new(a[0], a[1], a[2], 0.5);
            let w = p.coordinate_vector(p.frame_components(v));
            prop_assert!((w[2] - v[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_maurer_cartan_is_closed() {
        let d = Domain::unit_square(0.1).unwrap();
        let mc = MaurerCartanField {
            alpha_x: Field::constant(d, Quaternion::pure([0.0, 0.0, 1.0])),
            alpha_y: Field::constant(d, Quaternion::pure([0.0, 0.0, 2.0])),
        };
        assert_eq!(nil3_integrability_residual(&mc, 0.5).full_max, 0.0);
    }

    #[test]
    fn tau_zero_matches_r3() {
        let d = Domain::unit_square(0.05).unwrap();
        let sf = SpinorField3::new(Field::from_z(d, |z| z.exp()), Field::from_z(d, |z| (z * 0.5).conj())).unwrap();
        let a = immerse_nil3(&sf, 0.0);
        let b = crate::dirac3::immerse_r3(&sf);
        let diff = a.points.zip(&b.points, |p, q| (p - q).norm());
        assert!(crate::par::max(&diff.values) < 1e-12);
    }
}
