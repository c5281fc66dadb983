//! Surfaces in ℝ⁴ = ℍ: the Konopelchenko–Taimanov representation, the
//! twisted Dirac system and the passage between the two.
//!
//! `∂z\∂F = ½(F_x − iF_y)` and `∂z̄\∂F = ½(F_x + iF_y)` with `i` acting on the left.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geomcheck::{first_form, mean_curvature_r4, normal_frame_r4, Ambient, Immersion};
use crate::grid::{
    closedness_residual, d_dz, d_dzbar, dx_adjoint, dy_adjoint, dz_quat, dzbar_quat, integrate_form,
    path_signs, pointwise, Domain, Field, ResidualReport, Side,
};
use crate::par;
use crate::quatcliff::{frame4_from_columns, Quaternion};

/// Smallest admissible `|A|`, `|B|`.
pub const VANISHING: f64 = 1e-8;
/// Allowed drift of `|a|`, `|b|` away from 1.
pub const NORM_DRIFT: f64 = 1e-8;
/// Relative normal-equation residual at which the ∂̄ solver stops.
pub const DBAR_TOL: f64 = 1e-10;
/// Iteration cap of the ∂̄ solver.
pub const DBAR_MAX_ITER: usize = 300;
/// Largest relative residual accepted from a capped ∂̄ solve.
pub const DBAR_ACCEPT: f64 = 1e-5;

const I: Quaternion = Quaternion::I;
const J: Quaternion = Quaternion::J;

fn cq(c: C) -> Quaternion {
    Quaternion::from_complex(c)
}

/// Spinor data `(s₁, s₂, t₁, t₂)` with `A = s̄₁ − js₂`, `B = t₁ + t₂j`.
#[derive(Clone, Debug)]
pub struct KTData {
    pub s1: Field<C>,
    pub s2: Field<C>,
    pub t1: Field<C>,
    pub t2: Field<C>,
}

impl KTData {
    pub fn new(s1: Field<C>, s2: Field<C>, t1: Field<C>, t2: Field<C>) -> Result<Self> {
        let d = s1.domain;
        if [s2.domain, t1.domain, t2.domain].iter().any(|o| *o != d) {
            return Err(Error::InvalidInput("KT components live on different grids".into()));
        }
        let kt = KTData { s1, s2, t1, t2 };
        let (a, b) = (kt.a(), kt.b());
        let small = |f: &Field<Quaternion>| f.values.iter().any(|q| !q.is_finite() || q.norm() < VANISHING);
        if small(&a) || small(&b) {
            return Err(Error::InvalidInput("A and B must not vanish".into()));
        }
        Ok(kt)
    }

    /// Data with the given quaternionic fields `A`, `B`.
    pub fn from_ab(a: &Field<Quaternion>, b: &Field<Quaternion>) -> Result<Self> {
        let ap = a.map(|q| q.complex_parts());
        let bp = b.map(|q| q.complex_parts());
        KTData::new(ap.map(|p| p.0.conj()), ap.map(|p| -p.1.conj()), bp.map(|p| p.0), bp.map(|p| p.1))
    }

    pub fn domain(&self) -> Domain {
        self.s1.domain
    }

    /// `A = s̄₁ − js₂`.
    pub fn a(&self) -> Field<Quaternion> {
        self.s1.zip(&self.s2, |s1, s2| Quaternion::from_complex_parts(s1.conj(), -s2.conj()))
    }

    /// `B = t₁ + t₂j`.
    pub fn b(&self) -> Field<Quaternion> {
        self.t1.zip(&self.t2, |t1, t2| Quaternion::from_complex_parts(t1, t2))
    }

    /// `e^ρ = |A||B|`.
    pub fn e_rho(&self) -> Field<f64> {
        self.a().zip(&self.b(), |a, b| a.norm() * b.norm())
    }
}

/// Both forms of the KT Dirac equation and their agreement.
#[derive(Clone, Debug, Serialize)]
pub struct KtResidual {
    /// `∂s₁/∂z̄ + h̄s̄₂`, `∂s̄₂/∂z − hs₁`, `∂t₁/∂z̄ + ht̄₂`, `∂t̄₂/∂z − h̄t₁`.
    pub componentwise: ResidualReport,
    /// `(∂z\∂A)A⁻¹ + hj` and `(∂z̄\∂B)B⁻¹ − hj`.
    pub quaternionic: ResidualReport,
    /// Max mismatch between the two forms after clearing `A⁻¹`, `B⁻¹`.
    pub agreement: f64,
}

pub fn kt_dirac_residual(kt: &KTData, h: &Field<C>) -> KtResidual {
    let d = kt.domain();
    let s2b = kt.s2.map(|c| c.conj());
    let t2b = kt.t2.map(|c| c.conj());
    let (s1zb, s2bz, t1zb, t2bz) = (d_dzbar(&kt.s1), d_dz(&s2b), d_dzbar(&kt.t1), d_dz(&t2b));
    let comp = pointwise(d, |k| {
        let (hk, s1, t1) = (h.values[k], kt.s1.values[k], kt.t1.values[k]);
        [
            s1zb.values[k] + hk.conj() * s2b.values[k],
            s2bz.values[k] - hk * s1,
            t1zb.values[k] + hk * t2b.values[k],
            t2bz.values[k] - hk.conj() * t1,
        ]
    });
    let (a, b) = (kt.a(), kt.b());
    let (az, bzb) = (dz_quat(&a, Side::Left), dzbar_quat(&b, Side::Left));
    let quat = pointwise(d, |k| {
        let hj = cq(h.values[k]) * J;
        ((az.values[k] * a.values[k].inv() + hj).norm(), (bzb.values[k] * b.values[k].inv() - hj).norm())
    });
    let agree = pointwise(d, |k| {
        let hj = cq(h.values[k]) * J;
        let r = comp.values[k];
        let qa = az.values[k] + hj * a.values[k];
        let qb = bzb.values[k] - hj * b.values[k];
        let ca = Quaternion::from_complex_parts(r[0].conj(), -r[1]);
        let cb = Quaternion::from_complex_parts(r[2], r[3].conj());
        (qa - ca).norm().max((qb - cb).norm())
    });
    let comp_max = comp.map(|r| r.iter().map(|c| c.norm()).fold(0.0, f64::max));
    KtResidual {
        componentwise: ResidualReport::from_values("kt_dirac", &comp_max, 1, None),
        quaternionic: ResidualReport::from_values("kt_dirac_quaternion", &quat.map(|p| p.0.max(p.1)), 1, None),
        agreement: par::max(&agree.values),
    }
}

/// `df = Ā dz B`, integrated from the base point.
pub fn kt_immerse(kt: &KTData) -> Immersion {
    let (a, b) = (kt.a(), kt.b());
    let p = a.zip(&b, |a, b| a.conj() * b);
    let q = a.zip(&b, |a, b| a.conj() * I * b);
    immersion_from_form(p, q)
}

/// The componentwise form: `f = f₁ + f₂j` with `df₁ = s₁t₁dz − s̄₂t̄₂dz̄`
/// and `df₂ = s₁t₂dz + s̄₂t̄₁dz̄`.
pub fn kt_immerse_componentwise(kt: &KTData) -> Immersion {
    let d = kt.domain();
    let i = C::i();
    let parts = pointwise(d, |k| {
        let (s1, s2, t1, t2) = (kt.s1.values[k], kt.s2.values[k], kt.t1.values[k], kt.t2.values[k]);
        let (a1, b1) = (s1 * t1, -(s2.conj() * t2.conj()));
        let (a2, b2) = (s1 * t2, s2.conj() * t1.conj());
        // ω = a dz + b dz̄ has ω(∂x) = a + b and ω(∂y) = i(a − b).
        let px = Quaternion::from_complex_parts(a1 + b1, a2 + b2);
        let py = Quaternion::from_complex_parts(i * (a1 - b1), i * (a2 - b2));
        (px, py)
    });
    immersion_from_form(parts.map(|p| p.0), parts.map(|p| p.1))
}

fn immersion_from_form(p: Field<Quaternion>, q: Field<Quaternion>) -> Immersion {
    let base = crate::geomcheck::base_point(&p.domain);
    let points = integrate_form(&p, &q, base);
    Immersion { ambient: Ambient::R4, points, tangents: Some((p, q)) }
}

/// `|Ā⁻¹(∂Ā/∂z̄)i + i(∂z̄\∂B)B⁻¹|`, the factor of `d(df)`.
pub fn integrability_residual(kt: &KTData) -> ResidualReport {
    let (a, b) = (kt.a(), kt.b());
    let abar = a.map(|q| q.conj());
    let (az, bz) = (dzbar_quat(&abar, Side::Right), dzbar_quat(&b, Side::Left));
    let r = pointwise(kt.domain(), |k| {
        (abar.values[k].inv() * az.values[k] * I + I * bz.values[k] * b.values[k].inv()).norm()
    });
    ResidualReport::from_values("kt_integrability", &r, 1, None)
}

/// Outcome of an iterative ∂̄ solve.
#[derive(Clone, Debug)]
pub struct DbarSolution {
    pub w: Field<C>,
    pub iterations: usize,
    /// Relative residual of the normal equations at exit.
    pub relative_residual: f64,
}

fn cdot(a: &[C], b: &[C]) -> C {
    let re = par::map_indexed(a.len(), |k| (a[k].conj() * b[k]).re);
    let im = par::map_indexed(a.len(), |k| (a[k].conj() * b[k]).im);
    C::new(par::sum(&re), par::sum(&im))
}

fn adjoint_op(g: &Field<C>) -> Field<C> {
    let (gx, gy) = (dx_adjoint(g), dy_adjoint(g));
    gx.zip(&gy, |a, b| (a - C::i() * b) * 0.5)
}

/// Dense one-dimensional difference matrix used by [`dx`](crate::grid::dx).
fn difference_matrix(n: usize, h: f64) -> DMatrix<f64> {
    let s = 0.5 / h;
    let mut m = DMatrix::zeros(n, n);
    for i in 1..n - 1 {
        m[(i, i - 1)] = -s;
        m[(i, i + 1)] = s;
    }
    for (c, v) in [-3.0, 4.0, -1.0].iter().enumerate() {
        m[(0, c)] = v * s;
        m[(n - 1, n - 1 - c)] = -v * s;
    }
    m
}

/// Exact inverse of `¼(I ⊗ DₓᵀDₓ + D_yᵀD_y ⊗ I)` on the complement of its kernel,
/// applied through the eigenvectors of the one-dimensional factors.
struct KroneckerPreconditioner {
    qx: DMatrix<f64>,
    qy: DMatrix<f64>,
    inv: DMatrix<f64>,
}

impl KroneckerPreconditioner {
    fn new(d: Domain) -> Self {
        let eig = |n: usize| {
            let m = difference_matrix(n, d.h);
            nalgebra::SymmetricEigen::new(m.transpose() * m)
        };
        let (ex, ey) = (eig(d.nx), eig(d.ny));
        let top = ex.eigenvalues.max() + ey.eigenvalues.max();
        let inv = DMatrix::from_fn(d.ny, d.nx, |i, j| {
            let l = 0.25 * (ey.eigenvalues[i] + ex.eigenvalues[j]);
            if l > 1e-13 * top {
                1.0 / l
            } else {
                0.0
            }
        });
        KroneckerPreconditioner { qx: ex.eigenvectors, qy: ey.eigenvectors, inv }
    }

    fn apply_real(&self, r: &DMatrix<f64>) -> DMatrix<f64> {
        let t = self.qy.transpose() * r * &self.qx;
        let t = t.component_mul(&self.inv);
        &self.qy * t * self.qx.transpose()
    }

    fn apply(&self, d: Domain, r: &[C]) -> Vec<C> {
        let re = DMatrix::from_fn(d.ny, d.nx, |iy, ix| r[iy * d.nx + ix].re);
        let im = DMatrix::from_fn(d.ny, d.nx, |iy, ix| r[iy * d.nx + ix].im);
        let (re, im) = (self.apply_real(&re), self.apply_real(&im));
        (0..d.len()).map(|k| C::new(re[(k / d.nx, k % d.nx)], im[(k / d.nx, k % d.nx)])).collect()
    }
}

/// Least-squares solution of `∂w/∂z̄ = rhs`: preconditioned conjugate gradients
/// on the normal equations `DᴴD w = Dᴴ rhs`, starting from `w = 0`.
///
/// Iterates until `‖Dᴴ(rhs − Dw)‖ ≤ DBAR_TOL·‖Dᴴ rhs‖` or `DBAR_MAX_ITER`
/// iterations. At the cap the best iterate is returned when its relative
/// residual is below `DBAR_ACCEPT`; otherwise the solve fails.
pub fn dbar_solve(rhs: &Field<C>) -> Result<DbarSolution> {
    let d = rhs.domain;
    let b = adjoint_op(rhs);
    let bnorm = cdot(&b.values, &b.values).re.sqrt();
    let zero = Field::constant(d, C::new(0.0, 0.0));
    if bnorm == 0.0 {
        return Ok(DbarSolution { w: zero, iterations: 0, relative_residual: 0.0 });
    }
    if !bnorm.is_finite() {
        return Err(Error::InvalidInput("∂̄ right-hand side is not finite".into()));
    }
    let pre = KroneckerPreconditioner::new(d);
    let mut x = zero.values;
    let mut r = b.values;
    let mut z = pre.apply(d, &r);
    let mut p = z.clone();
    let mut rz = cdot(&r, &z).re;
    let mut best = (f64::INFINITY, x.clone(), 0);
    for it in 1..=DBAR_MAX_ITER {
        let dp = d_dzbar(&Field { domain: d, values: p.clone() });
        let ap = adjoint_op(&dp).values;
        let alpha = rz / cdot(&dp.values, &dp.values).re;
        x = par::map_indexed(x.len(), |k| x[k] + p[k] * alpha);
        r = par::map_indexed(r.len(), |k| r[k] - ap[k] * alpha);
        let rel = cdot(&r, &r).re.sqrt() / bnorm;
        if rel < best.0 {
            best = (rel, x.clone(), it);
        }
        if rel <= DBAR_TOL {
            break;
        }
        z = pre.apply(d, &r);
        let rz_new = cdot(&r, &z).re;
        p = par::map_indexed(p.len(), |k| z[k] + p[k] * (rz_new / rz));
        rz = rz_new;
    }
    let (rel, x, it) = best;
    if !(rel <= DBAR_ACCEPT) {
        return Err(Error::Solver(format!(
            "dbar_solve reached relative residual {rel:e} after {DBAR_MAX_ITER} iterations"
        )));
    }
    log::debug!("dbar_solve: relative residual {rel:e} at iteration {it}");
    Ok(DbarSolution { w: Field { domain: d, values: x }, iterations: it, relative_residual: rel })
}

/// Gauge-fixed KT data.
#[derive(Clone, Debug)]
pub struct GaugeFixed {
    pub kt: KTData,
    pub h: Field<C>,
    /// The complex gauge function `α`, with `A′ = e^{iα}A`, `B′ = e^{iᾱ}B`.
    pub alpha: Field<C>,
    /// `|1, i` components of `(∂z\∂A′)A′⁻¹|`.
    pub span_residual: ResidualReport,
    pub dbar: DbarSolution,
}

fn log_derivative_a(kt: &KTData) -> Field<(C, C)> {
    let a = kt.a();
    let az = dz_quat(&a, Side::Left);
    az.zip(&a, |d, a| (d * a.inv()).complex_parts())
}

/// Rotates `(A, B)` so that `(∂z\∂A)A⁻¹` lies in `span(j, k)` and reads off `h`
/// from `(∂z\∂A)A⁻¹ = −hj`.
pub fn gauge_fix(kt: &KTData) -> Result<GaugeFixed> {
    let l = log_derivative_a(kt);
    let rhs = l.map(|(c, _)| -C::i() * c.conj());
    let dbar = dbar_solve(&rhs)?;
    let alpha = dbar.w.map(|w| w.conj());
    let i = C::i();
    let a = kt.a().zip(&alpha, move |a, al| cq((i * al).exp()) * a);
    let b = kt.b().zip(&alpha, move |b, al| cq((i * al.conj()).exp()) * b);
    let fixed = KTData::from_ab(&a, &b)?;
    let l = log_derivative_a(&fixed);
    let h = l.map(|(_, d)| -d);
    let span = l.map(|(c, _)| c.norm());
    Ok(GaugeFixed {
        kt: fixed,
        h,
        alpha,
        span_residual: ResidualReport::from_values("gauge_span_jk", &span, 1, None),
        dbar,
    })
}

/// Twisted spinor `(a, b)` with the geometric data it is coupled to.
#[derive(Clone, Debug)]
pub struct TwistedSpinor4 {
    pub a: Field<Quaternion>,
    pub b: Field<Quaternion>,
    pub rho: Field<f64>,
    pub cx: Field<f64>,
    pub cy: Field<f64>,
    pub h3: Field<f64>,
    pub h4: Field<f64>,
}

impl TwistedSpinor4 {
    pub fn domain(&self) -> Domain {
        self.a.domain
    }

    /// Max `| |a| − 1 |`, `| |b| − 1 |`.
    pub fn norm_drift(&self) -> f64 {
        let drift = self.a.zip(&self.b, |a, b| (a.norm() - 1.0).abs().max((b.norm() - 1.0).abs()));
        par::max(&drift.values)
    }

    fn check_norms(&self) -> Result<()> {
        let drift = self.norm_drift();
        if !(drift <= NORM_DRIFT) {
            return Err(Error::Invariant(format!("|a|, |b| drift from 1 by {drift:e}")));
        }
        Ok(())
    }
}

/// Residual fields of the twisted Dirac system.
#[derive(Clone, Debug)]
pub struct TwistedResidual {
    /// `2(∂z\∂a)a⁻¹ + ∂ρ/∂z + (c_y + ic_x)/2 + e^ρ(H₃j + H₄k)`.
    pub first: Field<Quaternion>,
    /// `2(∂z̄\∂b)b⁻¹ + ∂ρ/∂z̄ − (c_y − ic_x)/2 − e^ρ(H₃j + H₄k)`.
    pub second: Field<Quaternion>,
    pub report: ResidualReport,
}

pub fn twisted_dirac_residual(ts: &TwistedSpinor4) -> Result<TwistedResidual> {
    ts.check_norms()?;
    let d = ts.domain();
    let rho_c = ts.rho.map(|r| C::new(r, 0.0));
    let (rz, rzb) = (d_dz(&rho_c), d_dzbar(&rho_c));
    let (az, bzb) = (dz_quat(&ts.a, Side::Left), dzbar_quat(&ts.b, Side::Left));
    let i = C::i();
    let hq = |k: usize| Quaternion::new(0.0, 0.0, ts.h3.values[k], ts.h4.values[k]) * ts.rho.values[k].exp();
    let conn = |k: usize| C::new(ts.cy.values[k], 0.0) + i * ts.cx.values[k];
    let first = pointwise(d, |k| {
        az.values[k] * ts.a.values[k].inv() * 2.0 + cq(rz.values[k] + conn(k) * 0.5) + hq(k)
    });
    let second = pointwise(d, |k| {
        bzb.values[k] * ts.b.values[k].inv() * 2.0 + cq(rzb.values[k] - conn(k).conj() * 0.5) - hq(k)
    });
    let both = first.zip(&second, |p, q| p.norm().max(q.norm()));
    Ok(TwistedResidual { first, second, report: ResidualReport::from_values("twisted_dirac", &both, 1, None) })
}

/// KT data built from a twisted spinor.
#[derive(Clone, Debug)]
pub struct KtFromTwisted {
    pub kt: KTData,
    pub h: Field<C>,
    pub u: Field<f64>,
    pub v: Field<f64>,
    pub dbar: DbarSolution,
}

/// `A = e^{u+iv+ρ/2}a`, `B = e^{−u+iv+ρ/2}b` with `∂(u − iv)/∂z̄ = (c_y − ic_x)/4`,
/// and `h = e^{ρ+2iv}(H₃ + iH₄)/2`.
#[allow(non_snake_case)]
pub fn build_AB_from_ab(ts: &TwistedSpinor4) -> Result<KtFromTwisted> {
    ts.check_norms()?;
    let rhs = ts.cy.zip(&ts.cx, |cy, cx| C::new(cy, -cx) * 0.25);
    let dbar = dbar_solve(&rhs)?;
    let u = dbar.w.map(|w| w.re);
    let v = dbar.w.map(|w| -w.im);
    let d = ts.domain();
    let a = pointwise(d, |k| {
        let (uk, vk, rk) = (u.values[k], v.values[k], ts.rho.values[k]);
        cq(C::new(uk + 0.5 * rk, vk).exp()) * ts.a.values[k]
    });
    let b = pointwise(d, |k| {
        let (uk, vk, rk) = (u.values[k], v.values[k], ts.rho.values[k]);
        cq(C::new(-uk + 0.5 * rk, vk).exp()) * ts.b.values[k]
    });
    let h = pointwise(d, |k| {
        C::new(ts.rho.values[k], 2.0 * v.values[k]).exp() * C::new(ts.h3.values[k], ts.h4.values[k]) * 0.5
    });
    Ok(KtFromTwisted { kt: KTData::from_ab(&a, &b)?, h, u, v, dbar })
}

fn xi_form(ts: &TwistedSpinor4) -> (Field<Quaternion>, Field<Quaternion>) {
    let d = ts.domain();
    let p = pointwise(d, |k| ts.a.values[k].inv() * ts.b.values[k] * ts.rho.values[k].exp());
    let q = pointwise(d, |k| ts.a.values[k].inv() * I * ts.b.values[k] * ts.rho.values[k].exp());
    (p, q)
}

/// Integrates `ξ = e^ρ a⁻¹(dx + i dy)b`.
pub fn xi_immerse(ts: &TwistedSpinor4) -> Result<Immersion> {
    ts.check_norms()?;
    let (p, q) = xi_form(ts);
    Ok(immersion_from_form(p, q))
}

pub fn xi_closedness(ts: &TwistedSpinor4) -> ResidualReport {
    let (p, q) = xi_form(ts);
    let mut r = closedness_residual(&p, &q);
    r.name = "xi_closedness".into();
    r
}

/// Twisted spinor of an immersion in the constant gauge: `a = p̄`, `b = q̄` for
/// the spin frame `(p, q)` of `(e₁, e₂, n₁, n₂)`.
pub fn build_ab_from_immersion(imm: &Immersion) -> Result<TwistedSpinor4> {
    if imm.ambient != Ambient::R4 {
        return Err(Error::InvalidInput("build_ab_from_immersion needs an immersion into R4".into()));
    }
    let ff = first_form(imm)?;
    if ff.conformality.full_max > crate::dirac3::CONFORMAL_TOL {
        return Err(Error::InvalidInput(format!(
            "immersion is not conformal (residual {:.3e})",
            ff.conformality.full_max
        )));
    }
    let frame = normal_frame_r4(imm)?;
    let nd = mean_curvature_r4(imm, &frame)?;
    let (fx, fy) = imm.tangent_fields();
    let d = imm.domain();
    let spin = pointwise(d, |k| {
        let e1 = fx.values[k].normalized();
        let e2 = fy.values[k];
        let e2 = (e2 - e1 * e2.dot(e1)).normalized();
        let f = frame4_from_columns([e1, e2, frame.n1.values[k], frame.n2.values[k]]);
        (f.p, f.q)
    });
    let signs = path_signs(d, &spin.values, imm.base(), |u, v| u.0.dot(v.0));
    let a = pointwise(d, |k| spin.values[k].0.conj() * signs[k]);
    let b = pointwise(d, |k| spin.values[k].1.conj() * signs[k]);
    let rho = pointwise(d, |k| 0.5 * (0.5 * (fx.values[k].norm_sqr() + fy.values[k].norm_sqr())).ln());
    Ok(TwistedSpinor4 { a, b, rho, cx: nd.cx, cy: nd.cy, h3: nd.h3, h4: nd.h4 })
}

/// `f*(dx₁∧dy₁ + dx₂∧dy₂)` for `f = (x₁ + iy₁) + (x₂ + iy₂)j`.
pub fn lagrangian_residual(imm: &Immersion) -> ResidualReport {
    let (fx, fy) = imm.tangent_fields();
    let r = fx.zip(&fy, |a, b| {
        let (a1, a2) = a.complex_parts();
        let (b1, b2) = b.complex_parts();
        (a1.conj() * b1).im + (a2.conj() * b2).im
    });
    ResidualReport::from_values("lagrangian", &r, 1, None)
}

/// The constant-gauge scramble `(A, B) ↦ (e^{iα}A, e^{iα}B)` with real `α`.
pub fn scramble_gauge(kt: &KTData, alpha: &Field<f64>) -> Result<KTData> {
    let a = kt.a().zip(alpha, |a, t| cq(C::new(0.0, t).exp()) * a);
    let b = kt.b().zip(alpha, |b, t| cq(C::new(0.0, t).exp()) * b);
    KTData::from_ab(&a, &b)
}

/// `|h| − ‖H⃗‖e^ρ/2` for gauge-fixed data of an immersion.
pub fn potential_modulus_residual(h: &Field<C>, ts: &TwistedSpinor4) -> ResidualReport {
    let r = pointwise(h.domain, |k| {
        h.values[k].norm() - ts.h3.values[k].hypot(ts.h4.values[k]) * ts.rho.values[k].exp() * 0.5
    });
    ResidualReport::from_values("potential_modulus", &r, 1, None)
}
