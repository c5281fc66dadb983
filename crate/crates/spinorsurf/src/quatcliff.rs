//! Quaternions and the Clifford/spin representations built on them.
//!
//! ℍ carries the spinor modules in dimensions 2, 3 and 4: Spin(3) = 𝕊³ acts
//! on Im ℍ by `x ↦ a x ā`, Spin(4) = 𝕊³×𝕊³ acts on ℍ by `x ↦ p x q̄`, and
//! vectors act on spinors by left multiplication. Complex scalars always act
//! on the right; the two splitting conventions below differ in which
//! quaternion plays the role of the complex unit.

use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Tolerance for the unit-norm and purity preconditions.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Tolerance for orthogonality checks on rotation matrices.
pub const MATRIX_TOL: f64 = 1e-8;

/// A quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Imaginary quaternion `v₀ i + v₁ j + v₂ k`.
    pub const fn pure(v: [f64; 3]) -> Self {
        Quaternion::new(0.0, v[0], v[1], v[2])
    }

    /// Embeds `a + b i ∈ ℂ` as `a + b i ∈ ℍ`.
    pub fn from_complex(c: Complex64) -> Self {
        Quaternion::new(c.re, c.im, 0.0, 0.0)
    }

    /// Embeds `a + b i ∈ ℂ` as `a + b j ∈ Ĉ = ℝ ⊕ jℝ`.
    pub fn from_chat(c: Complex64) -> Self {
        Quaternion::new(c.re, 0.0, c.im, 0.0)
    }

    /// Writes `q = c + d j` with `c, d ∈ ℂ = span(1, i)`.
    pub fn complex_parts(self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    /// Inverse of [`Quaternion::complex_parts`].
    pub fn from_complex_parts(c: Complex64, d: Complex64) -> Self {
        Quaternion::new(c.re, c.im, d.re, d.im)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inv(self) -> Self {
        self.conj() / self.norm_sqr()
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    /// Euclidean inner product on ℍ ≅ ℝ⁴.
    pub fn dot(self, o: Self) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn re(self) -> f64 {
        self.w
    }

    /// Imaginary part as a 3-vector.
    pub fn vec(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn im(self) -> Self {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    /// Cross product of the imaginary parts.
    pub fn cross(self, o: Self) -> Self {
        Quaternion::new(
            0.0,
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    /// `exp(θ n)` for a unit imaginary `n`.
    pub fn exp_axis(n: Quaternion, theta: f64) -> Self {
        Quaternion::ONE * theta.cos() + n * theta.sin()
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a1, b1, c1, d1) = (self.w, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (o.w, o.x, o.y, o.z);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

fn check_unit(q: Quaternion, what: &str) -> Result<()> {
    if (q.norm() - 1.0).abs() > ALGEBRAIC_TOL {
        return invalid(format!("{what} must be a unit quaternion (|q| = {})", q.norm()));
    }
    Ok(())
}

fn check_pure(x: Quaternion, what: &str) -> Result<()> {
    if x.w.abs() > ALGEBRAIC_TOL * x.norm().max(1.0) {
        return invalid(format!("{what} must be imaginary (Re = {})", x.w));
    }
    Ok(())
}

/// Spin(3) action on Im ℍ: `a x ā`.
pub fn rot3(a: Quaternion, x: Quaternion) -> Result<Quaternion> {
    check_unit(a, "rot3 spinor")?;
    check_pure(x, "rot3 argument")?;
    Ok(a * x * a.conj())
}

/// An element `(p, q)` of Spin(4) = 𝕊³ × 𝕊³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinFrame4 {
    pub p: Quaternion,
    pub q: Quaternion,
}

impl SpinFrame4 {
    pub fn new(p: Quaternion, q: Quaternion) -> Result<Self> {
        check_unit(p, "frame p")?;
        check_unit(q, "frame q")?;
        Ok(SpinFrame4 { p, q })
    }
}

/// Spin(4) action on ℍ: `p x q̄`.
pub fn rot4(frame: SpinFrame4, x: Quaternion) -> Result<Quaternion> {
    check_unit(frame.p, "frame p")?;
    check_unit(frame.q, "frame q")?;
    Ok(frame.p * x * frame.q.conj())
}

/// An element of Cl₃ ≅ ℍ ⊕ ℍ written as the block matrix `[[a, b], [b, a]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cl3Element {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl Cl3Element {
    /// A vector `x ∈ Im ℍ` sits in Cl₃ as `[[0, x], [x, 0]]`.
    pub fn from_vector(x: Quaternion) -> Self {
        Cl3Element { a: Quaternion::ZERO, b: x }
    }

    pub fn scalar(s: f64) -> Self {
        Cl3Element { a: Quaternion::ONE * s, b: Quaternion::ZERO }
    }

    /// The spinor representation: left multiplication by `a + b`.
    pub fn chi3(self) -> Quaternion {
        self.a + self.b
    }
}

impl Mul for Cl3Element {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Cl3Element { a: self.a * o.a + self.b * o.b, b: self.a * o.b + self.b * o.a }
    }
}

impl Add for Cl3Element {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Cl3Element { a: self.a + o.a, b: self.b + o.b }
    }
}

/// Splitting convention of a two-dimensional spinor module.
pub trait Convention: Copy + Default + std::fmt::Debug {
    const NAME: &'static str;
    /// Components `(v⁺, v⁻)` in the normalized half-spinor basis.
    fn split(v: Quaternion) -> (Complex64, Complex64);
    /// Inverse of `split`.
    fn join(plus: Complex64, minus: Complex64) -> Quaternion;
}

/// ℝ³ convention: `J = R_i`, `Σ± = (1 ± j)ℂ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct R3;

/// ℝ⁴ convention: `J = R_j`, `Σ⁺ = (1 − i)Ĉ`, `Σ⁻ = (1 + i)Ĉ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct R4;

impl Convention for R3 {
    const NAME: &'static str = "R3";

    fn split(v: Quaternion) -> (Complex64, Complex64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (
            Complex64::new((v.w + v.y) * s, (v.x - v.z) * s),
            Complex64::new((v.w - v.y) * s, (v.x + v.z) * s),
        )
    }

    fn join(p: Complex64, m: Complex64) -> Quaternion {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (Quaternion::new(1.0, 0.0, 1.0, 0.0) * Quaternion::from_complex(p)
            + Quaternion::new(1.0, 0.0, -1.0, 0.0) * Quaternion::from_complex(m))
            * s
    }
}

impl Convention for R4 {
    const NAME: &'static str = "R4";

    fn split(v: Quaternion) -> (Complex64, Complex64) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (
            Complex64::new((v.w - v.x) * s, (v.y - v.z) * s),
            Complex64::new((v.w + v.x) * s, (v.y + v.z) * s),
        )
    }

    fn join(p: Complex64, m: Complex64) -> Quaternion {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (Quaternion::new(1.0, -1.0, 0.0, 0.0) * Quaternion::from_chat(p)
            + Quaternion::new(1.0, 1.0, 0.0, 0.0) * Quaternion::from_chat(m))
            * s
    }
}

/// A spinor of Σ₂ tagged with its splitting convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinorValue2<C: Convention> {
    pub value: Quaternion,
    _convention: PhantomData<C>,
}

impl<C: Convention> SpinorValue2<C> {
    pub fn new(value: Quaternion) -> Self {
        SpinorValue2 { value, _convention: PhantomData }
    }

    pub fn from_split(plus: Complex64, minus: Complex64) -> Self {
        Self::new(C::join(plus, minus))
    }

    pub fn split(self) -> (Complex64, Complex64) {
        C::split(self.value)
    }
}

/// Splits a spinor into its positive and negative components.
pub fn split2<C: Convention>(v: SpinorValue2<C>) -> (Complex64, Complex64) {
    v.split()
}

/// Clifford multiplication of a spinor by an imaginary quaternion.
pub fn clifford3<C: Convention>(x: Quaternion, v: SpinorValue2<C>) -> Result<SpinorValue2<C>> {
    check_pure(x, "Clifford vector")?;
    Ok(SpinorValue2::new(x * v.value))
}

/// A spinor of Σ₄ = Σ₄⁺ ⊕ Σ₄⁻ ≅ ℍ ⊕ ℍ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpinorValue4 {
    pub a: Quaternion,
    pub b: Quaternion,
}

impl SpinorValue4 {
    pub fn norm(self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }
}

/// Clifford action on Σ₄: `x · (a, b) = (x b, −x̄ a)`.
pub fn chi4(x: Quaternion, s: SpinorValue4) -> SpinorValue4 {
    SpinorValue4 { a: x * s.b, b: -(x.conj() * s.a) }
}

/// Coefficients of an element of Σ₂ ⊗ Σ₂′ over Ĉ in the basis
/// `(1∓i) ⊗ (1∓i)`; the complex unit of each coefficient stands for `j`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TensorCoeffs {
    pub pp: Complex64,
    pub mm: Complex64,
    pub pm: Complex64,
    pub mp: Complex64,
}

impl TensorCoeffs {
    fn get(&self, e: i8, e2: i8) -> Complex64 {
        match (e, e2) {
            (1, 1) => self.pp,
            (-1, -1) => self.mm,
            (1, -1) => self.pm,
            _ => self.mp,
        }
    }

    fn slot(&mut self, e: i8, e2: i8) -> &mut Complex64 {
        match (e, e2) {
            (1, 1) => &mut self.pp,
            (-1, -1) => &mut self.mm,
            (1, -1) => &mut self.pm,
            _ => &mut self.mp,
        }
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        [(self.pp - o.pp), (self.mm - o.mm), (self.pm - o.pm), (self.mp - o.mp)]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        TensorCoeffs { pp: self.pp * s, mm: self.mm * s, pm: self.pm * s, mp: self.mp * s }
    }
}

/// `u ⊗ u′` for two spinors in the ℝ⁴ convention.
pub fn tensor(u: SpinorValue2<R4>, u2: SpinorValue2<R4>) -> TensorCoeffs {
    // split2 uses the normalized basis (1∓i)/√2; tensor coefficients do not.
    let (p, m) = u.split();
    let (p2, m2) = u2.split();
    TensorCoeffs { pp: p * p2, mm: m * m2, pm: p * m2, mp: m * p2 }.scale(0.5)
}

/// The intertwiner `Ψ : Σ₂ ⊗ Σ₂′ → Σ₄`.
pub fn psi_iso(t: TensorCoeffs) -> SpinorValue4 {
    let one_k = Quaternion::new(1.0, 0.0, 0.0, 1.0);
    let i_j = Quaternion::new(0.0, 1.0, 1.0, 0.0);
    let c = Quaternion::from_chat;
    SpinorValue4 {
        a: one_k * c(t.pp) - i_j * c(t.mm),
        b: i_j * c(t.pm) - one_k * c(t.mp),
    }
}

/// Inverse of [`psi_iso`].
pub fn psi_iso_inv(s: SpinorValue4) -> TensorCoeffs {
    let (a, b) = (s.a, s.b);
    TensorCoeffs {
        pp: Complex64::new((a.w + a.z) / 2.0, (a.y - a.x) / 2.0),
        mm: Complex64::new(-(a.x + a.y) / 2.0, (a.w - a.z) / 2.0),
        pm: Complex64::new((b.x + b.y) / 2.0, (b.z - b.w) / 2.0),
        mp: Complex64::new(-(b.w + b.z) / 2.0, (b.x - b.y) / 2.0),
    }
}

/// `γ(u + v)` on Σ₂ ⊗ Σ₂′, with `u, v ∈ ℝ²` the two halves of `x ∈ ℝ⁴`.
///
/// `γ(u) = χ₂(u) ⊗ χ₂′(ω₂ℂ)` and `γ(v) = Id ⊗ χ₂′(v)`, where `χ₂(e₁) = L_i`,
/// `χ₂(e₂) = L_j` and `ω₂ℂ = L_k R_j` is `±1` on `(1∓i)Ĉ`.
pub fn gamma4(xu: [f64; 2], xv: [f64; 2], t: TensorCoeffs) -> TensorCoeffs {
    let jj = Complex64::i();
    let mut out = TensorCoeffs::default();
    for e in [1i8, -1] {
        for e2 in [1i8, -1] {
            let a = t.get(e, e2);
            let (ef, e2f) = (f64::from(e), f64::from(e2));
            // L_i(1−εi) = ε(1+εi), L_j(1−εi) = (1+εi)j.
            *out.slot(-e, e2) += (jj * xu[1] + xu[0] * ef) * e2f * a;
            *out.slot(e, -e2) += (jj * xv[1] + xv[0] * e2f) * a;
        }
    }
    out
}

/// Splits `x ∈ ℍ` into the `(u, v) ∈ ℝ² ⊕ ℝ²` halves used by [`gamma4`].
pub fn split_r4(x: Quaternion) -> ([f64; 2], [f64; 2]) {
    ([x.w, x.x], [x.y, x.z])
}

fn quat_from_rotation_unchecked(m: &Matrix3<f64>) -> Quaternion {
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let cands = [tr, m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let mut k = 0;
    for (idx, &c) in cands.iter().enumerate() {
        if c > cands[k] {
            k = idx;
        }
    }
    let q = match k {
        0 => {
            let w = (1.0 + tr).max(0.0).sqrt() / 2.0;
            let s = 4.0 * w;
            Quaternion::new(w, (m[(2, 1)] - m[(1, 2)]) / s, (m[(0, 2)] - m[(2, 0)]) / s, (m[(1, 0)] - m[(0, 1)]) / s)
        }
        1 => {
            let x = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).max(0.0).sqrt() / 2.0;
            let s = 4.0 * x;
            Quaternion::new((m[(2, 1)] - m[(1, 2)]) / s, x, (m[(0, 1)] + m[(1, 0)]) / s, (m[(0, 2)] + m[(2, 0)]) / s)
        }
        2 => {
            let y = (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).max(0.0).sqrt() / 2.0;
            let s = 4.0 * y;
            Quaternion::new((m[(0, 2)] - m[(2, 0)]) / s, (m[(0, 1)] + m[(1, 0)]) / s, y, (m[(1, 2)] + m[(2, 1)]) / s)
        }
        _ => {
            let z = (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).max(0.0).sqrt() / 2.0;
            let s = 4.0 * z;
            Quaternion::new((m[(1, 0)] - m[(0, 1)]) / s, (m[(0, 2)] + m[(2, 0)]) / s, (m[(1, 2)] + m[(2, 1)]) / s, z)
        }
    };
    normalize_sign(q.normalized())
}

/// Fixes the sign of `±q` so that its first non-negligible component is positive.
pub fn normalize_sign(q: Quaternion) -> Quaternion {
    for c in q.to_array() {
        if c.abs() > 1e-14 {
            return if c > 0.0 { q } else { -q };
        }
    }
    q
}

fn check_rotation(orth_err: f64, det: f64) -> Result<()> {
    if !(orth_err <= MATRIX_TOL) {
        return invalid(format!("matrix is not orthogonal (|RᵀR − I| = {orth_err:e})"));
    }
    if det < 0.0 {
        return invalid("matrix is a reflection (det = −1)");
    }
    Ok(())
}

/// Unit quaternion `a` (sign-normalized) with `a x ā = R x`, where column `c`
/// of `R` is the image of the `c`-th basis vector of Im ℍ.
pub fn frame_from_rotation3(m: &Matrix3<f64>) -> Result<Quaternion> {
    check_rotation((m.transpose() * m - Matrix3::identity()).abs().max(), m.determinant())?;
    Ok(quat_from_rotation_unchecked(m))
}

/// Spin frame `(p, q)` with `p x q̄ = R x`, where column `c` of `R` is the image
/// of the `c`-th element of the basis `(1, i, j, k)`.
pub fn frame_from_rotation4(m: &Matrix4<f64>) -> Result<SpinFrame4> {
    check_rotation((m.transpose() * m - Matrix4::identity()).abs().max(), m.determinant())?;
    Ok(frame4_unchecked(m))
}

fn frame4_unchecked(m: &Matrix4<f64>) -> SpinFrame4 {
    let col = |c: usize| Quaternion::new(m[(0, c)], m[(1, c)], m[(2, c)], m[(3, c)]);
    // R x = (p x p̄) r with r = R 1, so x ↦ R(x) r̄ is a rotation of Im ℍ.
    let r = col(0);
    let mut m3 = Matrix3::zeros();
    for c in 0..3 {
        let img = col(c + 1) * r.conj();
        m3[(0, c)] = img.x;
        m3[(1, c)] = img.y;
        m3[(2, c)] = img.z;
    }
    let p = quat_from_rotation_unchecked(&m3);
    SpinFrame4 { p, q: (r.conj() * p).normalized() }
}

/// Spin frame from four orthonormal quaternions `e₁..e₄` (images of `1, i, j, k`),
/// without re-checking orthogonality.
pub(crate) fn frame4_from_columns(e: [Quaternion; 4]) -> SpinFrame4 {
    let mut m = Matrix4::zeros();
    for (c, q) in e.iter().enumerate() {
        for (r, v) in q.to_array().iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    frame4_unchecked(&m)
}

/// Unit quaternion from three orthonormal imaginary quaternions (images of `i, j, k`),
/// without re-checking orthogonality.
pub(crate) fn frame3_from_columns(e: [Quaternion; 3]) -> Quaternion {
    let mut m = Matrix3::zeros();
    for (c, q) in e.iter().enumerate() {
        m[(0, c)] = q.x;
        m[(1, c)] = q.y;
        m[(2, c)] = q.z;
    }
    quat_from_rotation_unchecked(&m)
}

/// The constant spinor `u₀ = (1 + i − j + k)/2` with `u₀ k ū₀ = −j`.
pub const U0: Quaternion = Quaternion::new(0.5, 0.5, -0.5, 0.5);
