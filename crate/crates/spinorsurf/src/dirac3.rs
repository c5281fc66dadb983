//! Spinor data of surfaces in ℝ³ and Nil₃(τ).
//!
//! A pair `(ψ₁, ψ₂)` of complex fields defines the null integrand
//! `Z = (i(ψ̄₂² + ψ₁²)/2, (ψ̄₂² − ψ₁²)/2, ψ₁ψ̄₂)` and the surface
//! `f = Re ∫ Z dz`, which is integrable exactly when
//! `∂ψ₁/∂z̄ = Uψ₂`, `∂ψ₂/∂z = −Uψ₁` with `Im U = 0` (ℝ³).
//!
//! Throughout, `e^ρ = |f_x| = (|ψ₁|² + |ψ₂|²)/2`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geomcheck::{base_point, first_form, Ambient, Immersion};
use crate::grid::{
    d_dz, d_dzbar, dx, dxx, dy, dyy, integrate_form, path_signs, pointwise, Domain, Field, ResidualReport,
};
use crate::quatcliff::{frame3_from_columns, Convention, Quaternion, R3, U0};

/// Below this modulus a spinor component is treated as vanishing.
pub const VANISHING: f64 = 1e-8;
/// Largest conformality defect accepted by [`induced_spinor`].
pub const CONFORMAL_TOL: f64 = 1e-3;

type C = Complex64;

/// Spinor fields `(ψ₁, ψ₂)` on a common domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField3 {
    pub psi1: Field<C>,
    pub psi2: Field<C>,
}

impl SpinorField3 {
    pub fn new(psi1: Field<C>, psi2: Field<C>) -> Result<Self> {
        if psi1.domain != psi2.domain {
            return invalid("spinor components live on different domains");
        }
        if psi1.values.iter().zip(&psi2.values).any(|(a, b)| !(a.norm_sqr() + b.norm_sqr() > 0.0)) {
            return invalid("spinor vanishes at a grid point");
        }
        Ok(SpinorField3 { psi1, psi2 })
    }

    pub fn domain(&self) -> Domain {
        self.psi1.domain
    }

    /// `|ψ₁|² + |ψ₂|²`.
    pub fn norm_sqr(&self) -> Field<f64> {
        self.psi1.zip(&self.psi2, |a, b| a.norm_sqr() + b.norm_sqr())
    }

    pub fn negated(&self) -> Self {
        SpinorField3 { psi1: self.psi1.map(|v| -v), psi2: self.psi2.map(|v| -v) }
    }
}

/// The null vector `Z(ψ₁, ψ₂) ∈ ℂ³`.
pub fn segre(psi1: C, psi2: C) -> [C; 3] {
    let c2 = psi2.conj() * psi2.conj();
    let s1 = psi1 * psi1;
    [C::i() * (c2 + s1) * 0.5, (c2 - s1) * 0.5, psi1 * psi2.conj()]
}

/// `(P, Q) = (Re Z, −Im Z)`, the coefficients of `Re(Z dz)` as imaginary quaternions.
pub fn integrand(sf: &SpinorField3) -> (Field<Quaternion>, Field<Quaternion>) {
    let z = sf.psi1.zip(&sf.psi2, segre);
    (
        z.map(|z| Quaternion::pure([z[0].re, z[1].re, z[2].re])),
        z.map(|z| Quaternion::pure([-z[0].im, -z[1].im, -z[2].im])),
    )
}

/// The potential `U` and the consistency of its two expressions.
#[derive(Clone, Debug)]
pub struct Potential3 {
    pub u: Field<C>,
    /// `|(1/ψ₂)∂ψ₁/∂z̄ + (1/ψ₁)∂ψ₂/∂z|` where both components are non-vanishing.
    pub consistency: ResidualReport,
}

/// `U = (1/ψ₂)∂ψ₁/∂z̄`, or `−(1/ψ₁)∂ψ₂/∂z` where `|ψ₁| > |ψ₂|`.
pub fn potential_from_spinor(sf: &SpinorField3) -> Result<Potential3> {
    let a = d_dzbar(&sf.psi1);
    let b = d_dz(&sf.psi2);
    let d = sf.domain();
    let (p1, p2) = (&sf.psi1.values, &sf.psi2.values);
    if (0..d.len()).any(|k| p1[k].norm().max(p2[k].norm()) < VANISHING) {
        return Err(Error::Invariant("both spinor components vanish at a grid point".into()));
    }
    let u = pointwise(d, |k| {
        if p2[k].norm() >= p1[k].norm() {
            a.values[k] / p2[k]
        } else {
            -b.values[k] / p1[k]
        }
    });
    let mask: Vec<bool> = (0..d.len()).map(|k| p1[k].norm() >= VANISHING && p2[k].norm() >= VANISHING).collect();
    let diff = pointwise(d, |k| if mask[k] { (a.values[k] / p2[k] + b.values[k] / p1[k]).norm() } else { 0.0 });
    Ok(Potential3 { u, consistency: ResidualReport::from_values("potential_consistency", &diff, 1, Some(&mask)) })
}

/// `max(|∂ψ₁/∂z̄ − Uψ₂|, |∂ψ₂/∂z + Uψ₁|)`.
pub fn dirac_residual(sf: &SpinorField3, u: &Field<C>) -> ResidualReport {
    let a = d_dzbar(&sf.psi1);
    let b = d_dz(&sf.psi2);
    let r = pointwise(sf.domain(), |k| {
        let (p1, p2, u) = (sf.psi1.values[k], sf.psi2.values[k], u.values[k]);
        (a.values[k] - u * p2).norm().max((b.values[k] + u * p1).norm())
    });
    ResidualReport::from_values("dirac", &r, 1, None)
}

/// `f = Re ∫ Z dz` with `f = 0` at the grid point nearest `z = 0`.
///
/// The integrand is kept as the closed-form tangent field of the result.
pub fn immerse_r3(sf: &SpinorField3) -> Immersion {
    let (p, q) = integrand(sf);
    let f = integrate_form(&p, &q, base_point(&sf.domain()));
    Immersion { ambient: Ambient::R3, points: f, tangents: Some((p, q)) }
}

/// Holomorphic data `(g, h)` of the classical Weierstrass representation.
#[derive(Clone, Debug)]
pub struct WeierstrassData {
    pub g: Field<C>,
    pub h: Field<C>,
}

/// The classical integrand `((1 − g²)/2, i(1 + g²)/2, g) h` as `(Re, −Im)` parts.
pub fn classical_integrand(wd: &WeierstrassData) -> (Field<Quaternion>, Field<Quaternion>) {
    let z = wd.g.zip(&wd.h, |g, h| [(C::new(1.0, 0.0) - g * g) * h * 0.5, C::i() * (g * g + 1.0) * h * 0.5, g * h]);
    (
        z.map(|z| Quaternion::pure([z[0].re, z[1].re, z[2].re])),
        z.map(|z| Quaternion::pure([-z[0].im, -z[1].im, -z[2].im])),
    )
}

/// `Re ∫ ((1 − g²)/2, i(1 + g²)/2, g) h dz`.
pub fn classical_weierstrass(wd: &WeierstrassData) -> Immersion {
    let (p, q) = classical_integrand(wd);
    let f = integrate_form(&p, &q, base_point(&wd.g.domain));
    Immersion { ambient: Ambient::R3, points: f, tangents: Some((p, q)) }
}

/// `ψ₁ = √h` (branch continued from the base point), `ψ₂ = conj(g ψ₁)`.
///
/// The resulting surface is the classical one composed with the rotation
/// `(x₁, x₂, x₃) ↦ (x₂, −x₁, x₃)`.
pub fn spinor_from_weierstrass(wd: &WeierstrassData) -> Result<SpinorField3> {
    let d = wd.h.domain;
    if wd.g.domain != d {
        return invalid("Weierstrass data on different domains");
    }
    let hmax = wd.h.values.iter().map(|h| h.norm()).fold(0.0, f64::max);
    if wd.h.values.iter().any(|h| !(h.norm() > 1e-12 * hmax.max(1.0))) {
        return invalid("h vanishes on the domain");
    }
    let root = wd.h.map(|h| h.sqrt());
    let base = base_point(&d);
    let s = path_signs(d, &root.values, base, |a, b| (a * b.conj()).re);
    let psi1 = pointwise(d, |k| root.values[k] * s[k]);
    // A branch that winds around 0 shows up as a jump between grid neighbours.
    for iy in 0..d.ny {
        for ix in 0..d.nx {
            let a = psi1.get(ix, iy);
            for (jx, jy) in [(ix + 1, iy), (ix, iy + 1)] {
                if jx < d.nx && jy < d.ny {
                    let b = psi1.get(jx, jy);
                    if (a - b).norm() > (a + b).norm() {
                        return Err(Error::Solver("square-root branch of h cannot be continued".into()));
                    }
                }
            }
        }
    }
    let psi2 = wd.g.zip(&psi1, |g, p| (g * p).conj());
    SpinorField3::new(psi1, psi2)
}

/// Inverse of [`spinor_from_weierstrass`]: `h = ψ₁²`, `g = conj(ψ₂)/ψ₁`.
pub fn weierstrass_from_spinor(sf: &SpinorField3) -> Result<WeierstrassData> {
    if sf.psi1.values.iter().any(|p| p.norm() < VANISHING) {
        return invalid("ψ₁ vanishes on the domain");
    }
    Ok(WeierstrassData { g: sf.psi1.zip(&sf.psi2, |a, b| b.conj() / a), h: sf.psi1.map(|a| a * a) })
}

/// Output of [`induced_spinor`].
#[derive(Clone, Debug)]
pub struct InducedSpinor {
    pub spinor: SpinorField3,
    /// Unit spinor `v = a u₀` with `e^{−ρ}(f_x, f_y, ν) = (ā i a, ā j a, ā k a)`.
    pub v: Field<Quaternion>,
    pub e_rho: Field<f64>,
}

/// Spinor of a conformal immersion into ℝ³ (or Nil₃, using frame components).
pub fn induced_spinor(imm: &Immersion) -> Result<InducedSpinor> {
    if imm.ambient == Ambient::R4 {
        return invalid("induced_spinor needs an immersion into R3 or Nil3");
    }
    let ff = first_form(imm)?;
    if ff.conformality.full_max > CONFORMAL_TOL {
        return invalid(format!("immersion is not conformal (defect {:.3e})", ff.conformality.full_max));
    }
    let (fx, fy) = imm.tangent_fields();
    let d = imm.domain();
    let e_rho = fx.map(|v| v.norm());
    let raw = pointwise(d, |k| {
        let e1 = fx.values[k].normalized();
        let e2 = fy.values[k].normalized();
        let e3 = e1.cross(e2).normalized();
        let b = frame3_from_columns([e1, e2, e3]);
        b.conj() * U0
    });
    let s = path_signs(d, &raw.values, imm.base(), |a, b| a.dot(b));
    let v = pointwise(d, |k| raw.values[k] * s[k]);
    let (mut psi1, mut psi2) = (Vec::with_capacity(d.len()), Vec::with_capacity(d.len()));
    for k in 0..d.len() {
        let (p, m) = R3::split(v.values[k]);
        let c = (2.0 * e_rho.values[k]).sqrt();
        psi1.push(p * c);
        psi2.push(m * c);
    }
    let spinor = SpinorField3::new(Field::new(d, psi1)?, Field::new(d, psi2)?)?;
    Ok(InducedSpinor { spinor, v, e_rho })
}

/// Max `|ψ − s·ψ′|` over the interior for the better global sign `s = ±1`.
pub fn spinor_distance_up_to_sign(a: &SpinorField3, b: &SpinorField3) -> f64 {
    let dist = |s: f64| {
        let r = pointwise(a.domain(), |k| {
            (a.psi1.values[k] - b.psi1.values[k] * s).norm().max((a.psi2.values[k] - b.psi2.values[k] * s).norm())
        });
        ResidualReport::from_values("d", &r, 1, None).max_abs
    };
    dist(1.0).min(dist(-1.0))
}

/// Geometric data of a surface in ℝ³ or Nil₃(τ) in the orthonormal frame
/// `e^{−ρ}(∂_x, ∂_y)`.
#[derive(Clone, Debug)]
pub struct SurfaceData3 {
    pub rho: Field<f64>,
    pub rho_x: Field<f64>,
    pub rho_y: Field<f64>,
    pub h11: Field<f64>,
    pub h12: Field<f64>,
    pub h22: Field<f64>,
    pub t1: Field<f64>,
    pub t2: Field<f64>,
    pub lambda: Field<f64>,
    pub tau: f64,
}

/// [`SurfaceData3`] at a single point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointData {
    pub rho: f64,
    pub rho_x: f64,
    pub rho_y: f64,
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
    pub t1: f64,
    pub t2: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl PointData {
    pub fn mean_curvature(&self) -> f64 {
        0.5 * (self.h11 + self.h22)
    }

    /// `E = T₁ i + T₂ j + λ k`.
    pub fn e3(&self) -> Quaternion {
        Quaternion::pure([self.t1, self.t2, self.lambda])
    }
}

impl SurfaceData3 {
    pub fn domain(&self) -> Domain {
        self.rho.domain
    }

    pub fn at(&self, k: usize) -> PointData {
        PointData {
            rho: self.rho.values[k],
            rho_x: self.rho_x.values[k],
            rho_y: self.rho_y.values[k],
            h11: self.h11.values[k],
            h12: self.h12.values[k],
            h22: self.h22.values[k],
            t1: self.t1.values[k],
            t2: self.t2.values[k],
            lambda: self.lambda.values[k],
            tau: self.tau,
        }
    }

    pub fn mean_curvature(&self) -> Field<f64> {
        self.h11.zip(&self.h22, |a, b| 0.5 * (a + b))
    }

    /// `|λ² + ‖T‖² − 1|`.
    pub fn unit_residual(&self) -> ResidualReport {
        let r = pointwise(self.domain(), |k| {
            let p = self.at(k);
            p.lambda * p.lambda + p.t1 * p.t1 + p.t2 * p.t2 - 1.0
        });
        ResidualReport::from_values("unit_e3", &r, 0, None)
    }
}

/// Imaginary quaternions `V_x, V_y` with `v_x = V_x v`, `v_y = V_y v` in (C′).
pub fn constancy_coefficients(p: &PointData) -> (Quaternion, Quaternion) {
    let e = p.rho.exp();
    let te = p.tau * e;
    let vx = Quaternion::pure([-e * p.h12 / 2.0 + te / 2.0, e * p.h11 / 2.0, p.rho_y / 2.0]) - p.e3() * (te * p.t1);
    let vy = Quaternion::pure([-e * p.h22 / 2.0, e * p.h12 / 2.0 + te / 2.0, -p.rho_x / 2.0]) - p.e3() * (te * p.t2);
    (vx, vy)
}

/// Right-hand sides `(v_x, v_y)` of (C′) at a point.
pub fn constancy_rhs(p: &PointData, v: Quaternion) -> (Quaternion, Quaternion) {
    let (a, b) = constancy_coefficients(p);
    (a * v, b * v)
}

/// Residuals of (C′) and of `|v| = 1`.
#[derive(Clone, Debug)]
pub struct ConstancyReport {
    pub equation: ResidualReport,
    pub norm: ResidualReport,
}

pub fn constancy_residual(sd: &SurfaceData3, v: &Field<Quaternion>) -> ConstancyReport {
    let (vx, vy) = (dx(v), dy(v));
    let r = pointwise(sd.domain(), |k| {
        let (rx, ry) = constancy_rhs(&sd.at(k), v.values[k]);
        (vx.values[k] - rx).norm().max((vy.values[k] - ry).norm())
    });
    ConstancyReport {
        equation: ResidualReport::from_values("constancy", &r, 1, None),
        norm: ResidualReport::from_values("constancy_norm", &v.map(|q| q.norm() - 1.0), 0, None),
    }
}

/// Difference between the split form of (C′) and the Dirac system
/// `v⁺_z̄ = −(ρ_z̄/2)v⁺ + Uv⁻`, `v⁻_z = −(ρ_z/2)v⁻ − Uv⁺`, `U = (H + iτλ)e^ρ/2`,
/// at a point where `(T₁ i + T₂ j + λ k) v = v i`.
pub fn dkt_reduction_residual(p: &PointData, v: Quaternion) -> f64 {
    let (vx, vy) = constancy_rhs(p, v);
    let vzbar = (vx + vy * Quaternion::I) * 0.5;
    let vz = (vx - vy * Quaternion::I) * 0.5;
    let (vp, vm) = R3::split(v);
    let u = C::new(p.mean_curvature(), p.tau * p.lambda) * (p.rho.exp() / 2.0);
    let rho_zbar = C::new(p.rho_x, p.rho_y) * 0.5;
    let rho_z = rho_zbar.conj();
    let lhs_p = R3::split(vzbar).0;
    let lhs_m = R3::split(vz).1;
    let rhs_p = -rho_zbar / 2.0 * vp + u * vm;
    let rhs_m = -rho_z / 2.0 * vm - u * vp;
    (lhs_p - rhs_p).norm().max((lhs_m - rhs_m).norm())
}

/// The invariant `q = v̄ (T₁ i + T₂ j + λ k) v` and its diagnostics.
#[derive(Clone, Debug)]
pub struct QInvariant {
    pub q: Field<Quaternion>,
    pub mean: Quaternion,
    /// Largest componentwise standard deviation of `q` over the grid.
    pub std: f64,
    /// `|q − mean|`.
    pub deviation: ResidualReport,
    /// `|Re q|`.
    pub real_part: ResidualReport,
    /// `|λ v̄Ev − ⟨v̄kv, q⟩q|` with `q` the mean value.
    pub vanishing: ResidualReport,
}

pub fn q_invariant(v: &Field<Quaternion>, sd: &SurfaceData3) -> QInvariant {
    let d = sd.domain();
    let q = pointwise(d, |k| v.values[k].conj() * sd.at(k).e3() * v.values[k]);
    let n = d.len() as f64;
    let comp = |c: usize| q.values.iter().map(|x| x.to_array()[c]).collect::<Vec<_>>();
    let mut mean = [0.0; 4];
    let mut std: f64 = 0.0;
    for (c, m) in mean.iter_mut().enumerate() {
        let xs = comp(c);
        *m = crate::par::sum(&xs) / n;
        let var = crate::par::sum(&xs.iter().map(|x| (x - *m) * (x - *m)).collect::<Vec<_>>()) / n;
        std = std.max(var.sqrt());
    }
    let mean = Quaternion::from_array(mean);
    let deviation = ResidualReport::from_values("q_deviation", &q.map(|x| (x - mean).norm()), 0, None);
    let real_part = ResidualReport::from_values("q_real_part", &q.map(|x| x.w), 0, None);
    let van = pointwise(d, |k| {
        let (vk, p) = (v.values[k], sd.at(k));
        let lhs = (vk.conj() * p.e3() * vk) * p.lambda;
        let rhs = mean * (vk.conj() * Quaternion::K * vk).dot(mean);
        (lhs - rhs).norm()
    });
    QInvariant {
        q,
        mean,
        std,
        deviation,
        real_part,
        vanishing: ResidualReport::from_values("vanishing_lemma", &van, 0, None),
    }
}

/// Residuals of the four `T` equations and two `λ` equations of Daniel.
pub fn daniel_residual(sd: &SurfaceData3) -> ResidualReport {
    let (t1x, t1y, t2x, t2y) = (dx(&sd.t1), dy(&sd.t1), dx(&sd.t2), dy(&sd.t2));
    let (lx, ly) = (dx(&sd.lambda), dy(&sd.lambda));
    let r = pointwise(sd.domain(), |k| {
        let p = sd.at(k);
        let e = p.rho.exp();
        let tau = p.tau;
        let res = [
            t1x.values[k] - (p.lambda * e * p.h11 - p.t2 * p.rho_y),
            t1y.values[k] - (p.lambda * e * (p.h12 + tau) + p.t2 * p.rho_x),
            t2x.values[k] - (p.lambda * e * (p.h12 - tau) + p.t1 * p.rho_y),
            t2y.values[k] - (p.lambda * e * p.h22 - p.t1 * p.rho_x),
            lx.values[k] + e * (p.t1 * p.h11 + p.t2 * (p.h12 - tau)),
            ly.values[k] + e * (p.t1 * (p.h12 + tau) + p.t2 * p.h22),
        ];
        res.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    });
    ResidualReport::from_values("daniel", &r, 1, None)
}

/// Reading of the energy-momentum identity `dλ + 2Q_φ(T) + B(T) + τJT = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmConvention {
    /// `Q_φ` with Clifford action `X·ν·` on the surface spinor and
    /// `B(T) = −τ|T|²JT`; this is the combination that holds on generated surfaces.
    Consistent,
    /// `Q_φ` with plain left multiplication by `X` and the matrix
    /// `τ[[2T₁T₂, T₁²−T₂²], [T₁²−T₂², −2T₁T₂]]` applied to `T`.
    Displayed,
}

/// The symmetric traceless tensor `B` as a matrix in the frame `(e₁, e₂)`.
pub fn b_tensor(t1: f64, t2: f64, tau: f64, conv: EmConvention) -> [[f64; 2]; 2] {
    let off = tau * (t1 * t1 - t2 * t2);
    let off = match conv {
        EmConvention::Displayed => off,
        EmConvention::Consistent => -off,
    };
    [[2.0 * tau * t1 * t2, off], [off, -2.0 * tau * t1 * t2]]
}

/// `|dλ + 2Q_φ(T) + B(T) + τJT|` in the orthonormal frame.
pub fn em_tensor_residual(v: &Field<Quaternion>, sd: &SurfaceData3, conv: EmConvention) -> ResidualReport {
    let (vx, vy, lx, ly) = (dx(v), dy(v), dx(&sd.lambda), dy(&sd.lambda));
    let r = pointwise(sd.domain(), |k| {
        let p = sd.at(k);
        let vk = v.values[k];
        let em = (-p.rho).exp();
        // Intrinsic spinor derivative along the unit vector (y1, y2).
        let nabla = |y1: f64, y2: f64| {
            (vx.values[k] * y1 + vy.values[k] * y2) * em
                + Quaternion::K * vk * (em / 2.0 * (p.rho_x * y2 - p.rho_y * y1))
        };
        let act = |x: Quaternion, w: Quaternion| match conv {
            EmConvention::Displayed => x * w,
            EmConvention::Consistent => x * Quaternion::K * w,
        };
        let q = |x1: f64, x2: f64, y1: f64, y2: f64| {
            let x = Quaternion::pure([x1, x2, 0.0]);
            let y = Quaternion::pure([y1, y2, 0.0]);
            0.5 * (act(x, nabla(y1, y2)) + act(y, nabla(x1, x2))).dot(vk) / vk.norm_sqr()
        };
        let qt = [q(p.t1, p.t2, 1.0, 0.0), q(p.t1, p.t2, 0.0, 1.0)];
        let b = b_tensor(p.t1, p.t2, p.tau, conv);
        let bt = [b[0][0] * p.t1 + b[0][1] * p.t2, b[1][0] * p.t1 + b[1][1] * p.t2];
        let jt = [-p.t2, p.t1];
        let dl = [em * lx.values[k], em * ly.values[k]];
        let r0 = dl[0] + 2.0 * qt[0] + bt[0] + p.tau * jt[0];
        let r1 = dl[1] + 2.0 * qt[1] + bt[1] + p.tau * jt[1];
        (r0 * r0 + r1 * r1).sqrt()
    });
    let name = match conv {
        EmConvention::Consistent => "em_tensor",
        EmConvention::Displayed => "em_tensor_displayed",
    };
    ResidualReport::from_values(name, &r, 1, None)
}

/// `|K − (det S + τ²(1 − 4λ²))|` with `K = −e^{−2ρ}Δρ`, interior margin 2.
pub fn gauss_residual(sd: &SurfaceData3) -> ResidualReport {
    let lap = dxx(&sd.rho).zip(&dyy(&sd.rho), |a, b| a + b);
    let r = pointwise(sd.domain(), |k| {
        let p = sd.at(k);
        let kk = -(-2.0 * p.rho).exp() * lap.values[k];
        kk - (p.h11 * p.h22 - p.h12 * p.h12 + p.tau * p.tau * (1.0 - 4.0 * p.lambda * p.lambda))
    });
    ResidualReport::from_values("gauss", &r, 2, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn enneper(h: f64) -> SpinorField3 {
        let d = Domain::unit_square(h).unwrap();
        let wd = WeierstrassData { g: Field::from_z(d, |z| z), h: Field::constant(d, c(1.0, 0.0)) };
        spinor_from_weierstrass(&wd).unwrap()
    }

    #[test]
    fn segre_examples() {
        let z = segre(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(z, [c(0.0, 0.5), c(-0.5, 0.0), c(0.0, 0.0)]);
        let z = segre(c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(z, [c(0.0, 0.5), c(0.5, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn plane_spinor() {
        let d = Domain::unit_square(0.1).unwrap();
        let sf = SpinorField3::new(Field::constant(d, c(1.0, 0.0)), Field::constant(d, c(0.0, 0.0))).unwrap();
        let f = immerse_r3(&sf);
        for k in 0..d.len() {
            let z = d.z(k);
            assert!((f.points.values[k] - Quaternion::pure([-z.im / 2.0, -z.re / 2.0, 0.0])).norm() < 1e-14);
        }
        let ind = induced_spinor(&f).unwrap();
        assert!(spinor_distance_up_to_sign(&ind.spinor, &sf) < 1e-14);
        let pot = potential_from_spinor(&sf).unwrap();
        assert!(dirac_residual(&sf, &pot.u).full_max == 0.0);
    }

    #[test]
    fn enneper_is_holomorphic_data() {
        let sf = enneper(0.01);
        let zero = Field::constant(sf.domain(), c(0.0, 0.0));
        assert!(dirac_residual(&sf, &zero).full_max < 1e-10);
        assert!(sf.psi1.values.iter().all(|p| (p - c(1.0, 0.0)).norm() < 1e-15));
        let perturbed = SpinorField3::new(sf.psi1.zip(&Field::from_z(sf.domain(), |z| z.conj() * 0.01), |a, b| a + b), sf.psi2.clone()).unwrap();
        let r = dirac_residual(&perturbed, &zero);
        assert!((r.max_abs - 0.01).abs() < 1e-10);
    }

    #[test]
    fn enneper_round_trip() {
        let sf = enneper(0.01);
        let f = immerse_r3(&sf);
        let back = induced_spinor(&f).unwrap();
        assert!(spinor_distance_up_to_sign(&back.spinor, &sf) < 1e-6);
        let fd = induced_spinor(&f.without_tangents()).unwrap();
        assert!(spinor_distance_up_to_sign(&fd.spinor, &sf) < 1e-2);
    }

    #[test]
    fn weierstrass_data_round_trip() {
        let d = Domain::unit_square(0.1).unwrap();
        let wd = WeierstrassData { g: Field::from_z(d, |z| z.exp()), h: Field::from_z(d, |z| (-z).exp()) };
        let back = weierstrass_from_spinor(&spinor_from_weierstrass(&wd).unwrap()).unwrap();
        let err = |a: &Field<C>, b: &Field<C>| a.zip(b, |x, y| (x - y).norm()).values.iter().fold(0.0f64, |m, v| m.max(*v));
        assert!(err(&back.g, &wd.g) < 1e-12 && err(&back.h, &wd.h) < 1e-12);
    }

    #[test]
    fn branch_winding_is_rejected() {
        let d = Domain::unit_square(0.05).unwrap();
        let wd = WeierstrassData { g: Field::constant(d, c(0.0, 0.0)), h: Field::from_z(d, |z| z + c(0.01, 0.013)) };
        assert!(spinor_from_weierstrass(&wd).is_err());
    }

    #[test]
    fn potential_requires_nonvanishing_spinor() {
        let d = Domain::unit_square(0.5).unwrap();
        let mut p1 = Field::constant(d, c(1.0, 0.0));
        p1.values[3] = c(1e-10, 0.0);
        let mut p2 = Field::constant(d, c(0.0, 0.0));
        p2.values[3] = c(1e-10, 0.0);
        let sf = SpinorField3::new(p1, p2).unwrap();
        assert!(matches!(potential_from_spinor(&sf), Err(Error::Invariant(_))));
    }

    #[test]
    fn flat_constancy_is_trivial() {
        let p = PointData { lambda: 1.0, ..Default::default() };
        let (a, b) = constancy_rhs(&p, Quaternion::new(0.3, 0.1, -0.2, 0.5));
        assert_eq!(a.norm() + b.norm(), 0.0);
    }

    #[test]
    fn b_tensor_is_symmetric_traceless() {
        for conv in [EmConvention::Consistent, EmConvention::Displayed] {
            let b = b_tensor(0.3, -0.7, 0.5, conv);
            assert_eq!(b[0][1], b[1][0]);
            assert_eq!(b[0][0] + b[1][1], 0.0);
        }
    }

    fn arb_point() -> impl Strategy<Value = (PointData, Quaternion)> {
        (prop::array::uniform8(-1.0f64..1.0), prop::array::uniform4(-1.0f64..1.0), 0.0f64..1.0)
            .prop_filter("v nonzero", |(_, v, _)| Quaternion::from_array(*v).norm() > 1e-2)
            .prop_map(|(a, v, tau)| {
                let v = Quaternion::from_array(v).normalized();
                // E = v i v̄ makes (T₁ i + T₂ j + λ k) v = v i.
                let e = v * Quaternion::I * v.conj();
                let p = PointData {
                    rho: a[0],
                    rho_x: a[1],
                    rho_y: a[2],
                    h11: a[3],
                    h12: a[4],
                    h22: a[5],
                    t1: e.x,
                    t2: e.y,
                    lambda: e.z,
                    tau,
                };
                (p, v)
            })
    }

    proptest! {
        #[test]
        fn segre_identities(a in prop::array::uniform4(-3.0f64..3.0)) {
            let (p1, p2) = (c(a[0], a[1]), c(a[2], a[3]));
            let z = segre(p1, p2);
            let null = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
            let n2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
            let s = p1.norm_sqr() + p2.norm_sqr();
            prop_assert!(null.norm() < 1e-12 * s * s.max(1.0));
            prop_assert!((n2 - s * s / 2.0).abs() < 1e-12 * s * s.max(1.0));
        }

        #[test]
        fn constancy_coefficients_are_imaginary((p, _v) in arb_point()) {
            let (a, b) = constancy_coefficients(&p);
            prop_assert_eq!(a.w, 0.0);
            prop_assert_eq!(b.w, 0.0);
        }

        #[test]
        fn colinear_data_reduces_to_dkt((p, v) in arb_point()) {
            prop_assert!((p.e3() * v - v * Quaternion::I).norm() < 1e-12);
            prop_assert!(dkt_reduction_residual(&p, v) < 1e-12);
        }

        #[test]
        fn vanishing_lemma_identity((p, v) in arb_point(), w in prop::array::uniform4(-1.0f64..1.0)) {
            // Holds for any unit v once q is the pointwise value of v̄Ev.
            let w = Quaternion::from_array(w);
            prop_assume!(w.norm() > 1e-2);
            let w = w.normalized();
            let q = w.conj() * p.e3() * w;
            let lhs = q * p.lambda;
            let rhs = q * (w.conj() * Quaternion::K * w).dot(q);
            prop_assert!((lhs - rhs).norm() < 1e-12);
            let _ = v;
        }
    }
}
