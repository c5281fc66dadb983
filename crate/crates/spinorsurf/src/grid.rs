//! Rectangular conformal parameter domains and finite differences on them.
//!
//! Fields are stored row-major with `index = iy * nx + ix`; a "row" is a line
//! of constant `y`. Derivatives use second-order centred stencils inside and
//! second-order one-sided stencils on the boundary.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::par;
use crate::quatcliff::Quaternion;

/// Minimum number of grid points along each axis.
pub const MIN_POINTS: usize = 5;

/// Values that can live on a grid and be differentiated.
pub trait FieldValue:
    Copy + Send + Sync + Default + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn norm(self) -> f64;
}

impl FieldValue for f64 {
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Complex64 {
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

impl FieldValue for Quaternion {
    fn norm(self) -> f64 {
        Quaternion::norm(self)
    }
}

/// A rectangle in the `z = x + iy` plane sampled with square cells of side `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_min: f64,
    pub y_min: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Domain {
    /// `nx` points across `[x_min, x_max]`; `ny` follows from the square-cell rule
    /// and must fit `[y_min, y_max]` to within `1e−9` relative.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize) -> Result<Self> {
        if nx < MIN_POINTS || !(x_max > x_min) || !(y_max > y_min) {
            return invalid(format!("degenerate domain [{x_min}, {x_max}]×[{y_min}, {y_max}] with nx = {nx}"));
        }
        let h = (x_max - x_min) / (nx - 1) as f64;
        let steps = (y_max - y_min) / h;
        let ny = steps.round() as usize + 1;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return invalid(format!("y-span {} is not a multiple of h = {h}", y_max - y_min));
        }
        Self::checked(x_min, y_min, h, nx, ny)
    }

    /// Spacing `h`; each axis gets the nearest whole number of cells and is
    /// re-centred on the requested interval when the span is not a multiple of `h`.
    pub fn with_spacing(x_min: f64, x_max: f64, y_min: f64, y_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(x_max > x_min) || !(y_max > y_min) {
            return invalid(format!("degenerate domain [{x_min}, {x_max}]×[{y_min}, {y_max}] with h = {h}"));
        }
        let fit = |lo: f64, hi: f64| {
            let n = ((hi - lo) / h).round() as usize + 1;
            let span = (n - 1) as f64 * h;
            let lo = if (span - (hi - lo)).abs() > 1e-9 * (hi - lo) { 0.5 * (lo + hi) - 0.5 * span } else { lo };
            (lo, n)
        };
        let (x0, nx) = fit(x_min, x_max);
        let (y0, ny) = fit(y_min, y_max);
        Self::checked(x0, y0, h, nx, ny)
    }

    fn checked(x_min: f64, y_min: f64, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return invalid(format!("domain needs at least {MIN_POINTS} points per axis, got {nx}×{ny}"));
        }
        if !(x_min.is_finite() && y_min.is_finite() && h.is_finite()) {
            return invalid("non-finite domain parameters");
        }
        Ok(Domain { x_min, y_min, h, nx, ny })
    }

    /// The reference square `[−1, 1]²` at spacing `h`.
    pub fn unit_square(h: f64) -> Result<Self> {
        Self::with_spacing(-1.0, 1.0, -1.0, 1.0, h)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.h
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.h
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn z(&self, k: usize) -> Complex64 {
        let (ix, iy) = self.coords(k);
        Complex64::new(self.x(ix), self.y(iy))
    }

    /// Grid point closest to `(x, y)`, clamped into the domain.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let ix = ((x - self.x_min) / self.h).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = ((y - self.y_min) / self.h).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        (ix, iy)
    }

    /// Whether `k` lies at least `margin` points away from the boundary.
    pub fn is_interior(&self, k: usize, margin: usize) -> bool {
        let (ix, iy) = self.coords(k);
        ix >= margin && iy >= margin && ix + margin < self.nx && iy + margin < self.ny
    }

    /// Same grid at half the spacing over the same rectangle.
    pub fn refined(&self) -> Self {
        Domain { x_min: self.x_min, y_min: self.y_min, h: self.h / 2.0, nx: 2 * self.nx - 1, ny: 2 * self.ny - 1 }
    }
}

/// Samples of a value type over a [`Domain`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field<V> {
    pub domain: Domain,
    pub values: Vec<V>,
}

impl<V: Copy + Send + Sync> Field<V> {
    pub fn new(domain: Domain, values: Vec<V>) -> Result<Self> {
        if values.len() != domain.len() {
            return invalid(format!("field has {} values for a {}×{} grid", values.len(), domain.nx, domain.ny));
        }
        Ok(Field { domain, values })
    }

    pub fn constant(domain: Domain, v: V) -> Self {
        Field { domain, values: vec![v; domain.len()] }
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn<F: Fn(f64, f64) -> V + Send + Sync>(domain: Domain, f: F) -> Self {
        let values = par::map_indexed(domain.len(), |k| {
            let (ix, iy) = domain.coords(k);
            f(domain.x(ix), domain.y(iy))
        });
        Field { domain, values }
    }

    /// Samples `f(z)` at every grid point.
    pub fn from_z<F: Fn(Complex64) -> V + Send + Sync>(domain: Domain, f: F) -> Self {
        Self::from_fn(domain, |x, y| f(Complex64::new(x, y)))
    }

    pub fn get(&self, ix: usize, iy: usize) -> V {
        self.values[self.domain.index(ix, iy)]
    }

    pub fn map<W: Copy + Send + Sync, F: Fn(V) -> W + Send + Sync>(&self, f: F) -> Field<W> {
        Field { domain: self.domain, values: par::map_slice(&self.values, |v| f(*v)) }
    }

    /// Pointwise combination of two fields on the same domain.
    pub fn zip<W, R, F>(&self, other: &Field<W>, f: F) -> Field<R>
    where
        W: Copy + Send + Sync,
        R: Copy + Send + Sync,
        F: Fn(V, W) -> R + Send + Sync,
    {
        debug_assert_eq!(self.domain, other.domain);
        Field { domain: self.domain, values: par::map_indexed(self.values.len(), |k| f(self.values[k], other.values[k])) }
    }
}

impl<V: FieldValue> Field<V> {
    /// Pointwise norm.
    pub fn norms(&self) -> Field<f64> {
        self.map(|v| v.norm())
    }
}

/// Evaluates `f(k)` at every grid index.
pub(crate) fn pointwise<R, F>(domain: Domain, f: F) -> Field<R>
where
    R: Copy + Send + Sync,
    F: Fn(usize) -> R + Send + Sync,
{
    Field { domain, values: par::map_indexed(domain.len(), f) }
}

#[inline]
fn stencil<V: FieldValue>(get: impl Fn(usize) -> V, i: usize, n: usize, h: f64) -> V {
    let s = 0.5 / h;
    if i == 0 {
        (get(1) * 4.0 - get(0) * 3.0 - get(2)) * s
    } else if i == n - 1 {
        (get(n - 1) * 3.0 - get(n - 2) * 4.0 + get(n - 3)) * s
    } else {
        (get(i + 1) - get(i - 1)) * s
    }
}

/// `∂f/∂x`.
pub fn dx<V: FieldValue>(f: &Field<V>) -> Field<V> {
    let d = f.domain;
    pointwise(d, |k| {
        let (ix, iy) = d.coords(k);
        let row = iy * d.nx;
        stencil(|i| f.values[row + i], ix, d.nx, d.h)
    })
}

/// `∂f/∂y`.
pub fn dy<V: FieldValue>(f: &Field<V>) -> Field<V> {
    let d = f.domain;
    pointwise(d, |k| {
        let (ix, iy) = d.coords(k);
        stencil(|j| f.values[j * d.nx + ix], iy, d.ny, d.h)
    })
}

/// Transpose of the one-dimensional difference matrix applied to `get`.
#[inline]
fn stencil_t<V: FieldValue>(get: impl Fn(usize) -> V, j: usize, n: usize, h: f64) -> V {
    let s = 0.5 / h;
    let mut acc = V::default();
    if j + 1 <= n - 2 {
        acc = acc - get(j + 1) * s;
    }
    if j >= 2 {
        acc = acc + get(j - 1) * s;
    }
    let first = [-3.0, 4.0, -1.0];
    if j < 3 {
        acc = acc + get(0) * (first[j] * s);
    }
    if j + 3 >= n {
        acc = acc - get(n - 1) * (first[n - 1 - j] * s);
    }
    acc
}

/// `Dₓᵀ f`, the adjoint of [`dx`] for the Euclidean inner product on grid values.
pub fn dx_adjoint<V: FieldValue>(f: &Field<V>) -> Field<V> {
    let d = f.domain;
    pointwise(d, |k| {
        let (ix, iy) = d.coords(k);
        let row = iy * d.nx;
        stencil_t(|i| f.values[row + i], ix, d.nx, d.h)
    })
}

/// `D_yᵀ f`, the adjoint of [`dy`].
pub fn dy_adjoint<V: FieldValue>(f: &Field<V>) -> Field<V> {
    let d = f.domain;
    pointwise(d, |k| {
        let (ix, iy) = d.coords(k);
        stencil_t(|j| f.values[j * d.nx + ix], iy, d.ny, d.h)
    })
}

/// `∂²f/∂x²` as the composition of two first differences.
pub fn dxx<V: FieldValue>(f: &Field<V>) -> Field<V> {
    dx(&dx(f))
}

/// `∂²f/∂y²` as the composition of two first differences.
pub fn dyy<V: FieldValue>(f: &Field<V>) -> Field<V> {
    dy(&dy(f))
}

/// `∂f/∂z = ½(f_x − i f_y)`.
pub fn d_dz(f: &Field<Complex64>) -> Field<Complex64> {
    dx(f).zip(&dy(f), |a, b| (a - Complex64::i() * b) * 0.5)
}

/// `∂f/∂z̄ = ½(f_x + i f_y)`.
pub fn d_dzbar(f: &Field<Complex64>) -> Field<Complex64> {
    dx(f).zip(&dy(f), |a, b| (a + Complex64::i() * b) * 0.5)
}

/// Side on which the complex unit `i` multiplies a quaternionic derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `∂f/∂z = ½(f_x − f_y i)`.
    Right,
    /// `∂z\∂f = ½(f_x − i f_y)`.
    Left,
}

/// Quaternionic `∂/∂z` with `i` acting on the given side.
pub fn dz_quat(f: &Field<Quaternion>, side: Side) -> Field<Quaternion> {
    dx(f).zip(&dy(f), move |a, b| {
        let ib = match side {
            Side::Right => b * Quaternion::I,
            Side::Left => Quaternion::I * b,
        };
        (a - ib) * 0.5
    })
}

/// Quaternionic `∂/∂z̄` with `i` acting on the given side.
pub fn dzbar_quat(f: &Field<Quaternion>, side: Side) -> Field<Quaternion> {
    dx(f).zip(&dy(f), move |a, b| {
        let ib = match side {
            Side::Right => b * Quaternion::I,
            Side::Left => Quaternion::I * b,
        };
        (a + ib) * 0.5
    })
}

/// Max/mean of a pointwise residual over the interior of the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    /// Maximum over points at least `margin` away from the boundary.
    pub max_abs: f64,
    pub mean_abs: f64,
    pub h: f64,
    /// Maximum over the whole grid, boundary included.
    pub full_max: f64,
}

impl ResidualReport {
    /// Statistics of `|values|` over the interior ring `margin`. Points where
    /// `mask` is `false` are skipped.
    pub fn from_values(name: impl Into<String>, values: &Field<f64>, margin: usize, mask: Option<&[bool]>) -> Self {
        let d = values.domain;
        let keep = |k: usize| mask.map_or(true, |m| m[k]);
        let interior: Vec<f64> =
            (0..d.len()).filter(|&k| keep(k) && d.is_interior(k, margin)).map(|k| values.values[k].abs()).collect();
        let all: Vec<f64> = (0..d.len()).filter(|&k| keep(k)).map(|k| values.values[k].abs()).collect();
        let mean = if interior.is_empty() { 0.0 } else { par::sum(&interior) / interior.len() as f64 };
        ResidualReport {
            name: name.into(),
            max_abs: par::max(&interior),
            mean_abs: mean,
            h: d.h,
            full_max: par::max(&all),
        }
    }

    /// Report of a scalar quantity that has no spatial distribution.
    pub fn scalar(name: impl Into<String>, value: f64, h: f64) -> Self {
        ResidualReport { name: name.into(), max_abs: value.abs(), mean_abs: value.abs(), h, full_max: value.abs() }
    }

    /// Pointwise norm of a residual field, interior margin 1.
    pub fn of_field<V: FieldValue>(name: impl Into<String>, f: &Field<V>) -> Self {
        Self::from_values(name, &f.norms(), 1, None)
    }

    /// Combines several reports into one by taking maxima.
    pub fn combine(name: impl Into<String>, parts: &[ResidualReport]) -> Self {
        let h = parts.first().map_or(0.0, |r| r.h);
        let fold = |g: fn(&ResidualReport) -> f64| parts.iter().map(g).fold(0.0, f64::max);
        ResidualReport {
            name: name.into(),
            max_abs: fold(|r| r.max_abs),
            mean_abs: fold(|r| r.mean_abs),
            h,
            full_max: fold(|r| r.full_max),
        }
    }

    /// Observed convergence order between this report and one at spacing `h/2`.
    pub fn order_against(&self, finer: &ResidualReport) -> f64 {
        (self.max_abs / finer.max_abs).log2()
    }
}

/// `|∂Q/∂x − ∂P/∂y|` for the 1-form `P dx + Q dy`.
pub fn closedness_residual<V: FieldValue>(p: &Field<V>, q: &Field<V>) -> ResidualReport {
    let r = dx(q).zip(&dy(p), |a, b| a - b);
    ResidualReport::of_field("closedness", &r)
}

fn check_closed<V: FieldValue>(p: &Field<V>, q: &Field<V>) {
    let scale = p.values.iter().chain(q.values.iter()).map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let h = p.domain.h;
    let r = closedness_residual(p, q);
    if r.max_abs > 10.0 * h * h * scale {
        log::warn!("integrating a form with closedness residual {:.3e} (h = {h})", r.max_abs);
    }
}

/// Trapezoidal integral of `P dx + Q dy` along the base row, then up and down
/// each column; zero at `base`.
pub fn integrate_form<V: FieldValue>(p: &Field<V>, q: &Field<V>, base: (usize, usize)) -> Field<V> {
    check_closed(p, q);
    integrate_row_first(p, q, base)
}

pub(crate) fn integrate_row_first<V: FieldValue>(p: &Field<V>, q: &Field<V>, base: (usize, usize)) -> Field<V> {
    let d = p.domain;
    let (bx, by) = base;
    let mut f = vec![V::default(); d.len()];
    let half = 0.5 * d.h;
    let at = |ix: usize, iy: usize| d.index(ix, iy);
    for ix in bx + 1..d.nx {
        f[at(ix, by)] = f[at(ix - 1, by)] + (p.values[at(ix, by)] + p.values[at(ix - 1, by)]) * half;
    }
    for ix in (0..bx).rev() {
        f[at(ix, by)] = f[at(ix + 1, by)] - (p.values[at(ix, by)] + p.values[at(ix + 1, by)]) * half;
    }
    for ix in 0..d.nx {
        for iy in by + 1..d.ny {
            f[at(ix, iy)] = f[at(ix, iy - 1)] + (q.values[at(ix, iy)] + q.values[at(ix, iy - 1)]) * half;
        }
        for iy in (0..by).rev() {
            f[at(ix, iy)] = f[at(ix, iy + 1)] - (q.values[at(ix, iy)] + q.values[at(ix, iy + 1)]) * half;
        }
    }
    Field { domain: d, values: f }
}

/// Integral along the base column first, then along each row.
pub fn integrate_form_column_first<V: FieldValue>(p: &Field<V>, q: &Field<V>, base: (usize, usize)) -> Field<V> {
    let t = |f: &Field<V>| transpose(f);
    let d = p.domain;
    let out = integrate_row_first(&t(q), &t(p), (base.1, base.0));
    let back = transpose(&out);
    Field { domain: d, values: back.values }
}

pub(crate) fn transpose<V: Copy + Send + Sync>(f: &Field<V>) -> Field<V> {
    let d = f.domain;
    let td = Domain { x_min: d.y_min, y_min: d.x_min, h: d.h, nx: d.ny, ny: d.nx };
    pointwise(td, |k| {
        let (i, j) = td.coords(k);
        f.values[d.index(j, i)]
    })
}

/// Max difference between row-first and column-first integration.
pub fn path_dependence<V: FieldValue>(p: &Field<V>, q: &Field<V>, base: (usize, usize)) -> ResidualReport {
    let a = integrate_row_first(p, q, base);
    let b = integrate_form_column_first(p, q, base);
    let r = a.zip(&b, |u, v| (u - v).norm());
    ResidualReport::from_values("path_dependence", &r, 0, None)
}

/// Signs `±1` making `values` continuous along the integration path from
/// `base` (base row first, then columns): each point is flipped when `dot`
/// with its predecessor on the path is negative.
pub fn path_signs<V: Copy>(domain: Domain, values: &[V], base: (usize, usize), dot: impl Fn(V, V) -> f64) -> Vec<f64> {
    let d = domain;
    let (bx, by) = base;
    let mut s = vec![1.0; d.len()];
    let link = |k: usize, prev: usize, s: &mut Vec<f64>| {
        if dot(values[k], values[prev]) * s[prev] < 0.0 {
            s[k] = -1.0;
        }
    };
    for ix in bx + 1..d.nx {
        link(d.index(ix, by), d.index(ix - 1, by), &mut s);
    }
    for ix in (0..bx).rev() {
        link(d.index(ix, by), d.index(ix + 1, by), &mut s);
    }
    for ix in 0..d.nx {
        for iy in by + 1..d.ny {
            link(d.index(ix, iy), d.index(ix, iy - 1), &mut s);
        }
        for iy in (0..by).rev() {
            link(d.index(ix, iy), d.index(ix, iy + 1), &mut s);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> Domain {
        Domain::unit_square(h).unwrap()
    }

    #[test]
    fn domain_shapes() {
        let d = square(0.01);
        assert_eq!((d.nx, d.ny), (201, 201));
        assert!((d.x_max() - 1.0).abs() < 1e-12);
        assert!(Domain::new(0.0, 1.0, 0.0, 1.0, 4).is_err());
        assert!(Domain::new(0.0, 1.0, 0.0, 0.55, 11).is_err());
        let c = Domain::with_spacing(-1.0, 1.0, -1.5, 1.5, 0.4).unwrap();
        assert!((c.y_min + c.y_max()).abs() < 1e-12);
        let r = d.refined();
        assert_eq!((r.nx, r.h), (401, 0.005));
    }

    #[test]
    fn wirtinger_of_linear_functions() {
        let d = square(0.05);
        let z = Field::from_z(d, |z| z);
        let zb = Field::from_z(d, |z| z.conj());
        for k in 0..d.len() {
            assert!((d_dz(&z).values[k] - 1.0).norm() < 1e-12);
            assert!(d_dzbar(&z).values[k].norm() < 1e-12);
            assert!(d_dz(&zb).values[k].norm() < 1e-12);
            assert!((d_dzbar(&zb).values[k] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn wirtinger_of_z_squared() {
        let d = square(0.01);
        let f = Field::from_z(d, |z| z * z);
        let e = d_dz(&f).zip(&Field::from_z(d, |z| 2.0 * z), |a, b| (a - b).norm());
        assert!(par::max(&e.values) < 1e-10);
        assert!(par::max(&d_dzbar(&f).norms().values) < 1e-10);
    }

    #[test]
    fn quaternion_sides_differ() {
        let d = square(0.1);
        // f = y j: ∂z\∂ gives −½ i j = −½k, ∂/∂z gives −½ j i = ½k.
        let f = Field::from_fn(d, |_, y| Quaternion::J * y);
        let l = dz_quat(&f, Side::Left).values[7];
        let r = dz_quat(&f, Side::Right).values[7];
        assert!((l - Quaternion::K * -0.5).norm() < 1e-12);
        assert!((r - Quaternion::K * 0.5).norm() < 1e-12);
    }

    #[test]
    fn constants_differentiate_to_zero() {
        let d = square(0.1);
        let f = Field::constant(d, Complex64::new(2.0, -3.0));
        assert!(dx(&f).values.iter().all(|v| v.norm() == 0.0));
        assert!(dy(&f).values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn closedness_examples() {
        let d = square(0.05);
        let p = Field::from_fn(d, |x, _| 2.0 * x);
        let q = Field::from_fn(d, |_, y| 2.0 * y);
        assert!(closedness_residual(&p, &q).full_max < 1e-12);
        let p = Field::from_fn(d, |_, y| -y);
        let q = Field::from_fn(d, |x, _| x);
        let r = closedness_residual(&p, &q);
        assert!((r.max_abs - 2.0).abs() < 1e-12 && (r.mean_abs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let d = square(0.01);
        let base = d.nearest(0.0, 0.0);
        let f = integrate_form(&Field::constant(d, 1.0), &Field::constant(d, 0.0), base);
        let e = Field::from_fn(d, |x, _| x).zip(&f, |a, b| (a - b).abs());
        assert!(par::max(&e.values) < 1e-12);
        let f = integrate_form(&Field::from_fn(d, |x, _| 2.0 * x), &Field::from_fn(d, |_, y| 2.0 * y), (0, 0));
        let e = Field::from_fn(d, |x, y| x * x + y * y - 2.0).zip(&f, |a, b| (a - b).abs());
        assert!(par::max(&e.values) < 1e-6);
    }

    #[test]
    fn path_dependence_is_second_order() {
        let run = |h: f64| {
            let d = square(h);
            // d(sin x e^y + x³y)
            let p = Field::from_fn(d, |x, y| x.cos() * y.exp() + 3.0 * x * x * y);
            let q = Field::from_fn(d, |x, y| x.sin() * y.exp() + x * x * x);
            path_dependence(&p, &q, d.nearest(0.0, 0.0)).max_abs
        };
        let (a, b) = (run(0.02), run(0.01));
        assert!(a < 1e-3 && a / b > 3.0, "{a} {b}");
    }

    #[test]
    fn adjoint_stencils() {
        let d = Domain::new(0.0, 1.0, 0.0, 0.6, 11).unwrap();
        let u = Field::from_fn(d, |x, y| (3.0 * x).sin() + x * y * y);
        let v = Field::from_fn(d, |x, y| (2.0 * y).cos() - x * x);
        let ip = |a: &Field<f64>, b: &Field<f64>| a.values.iter().zip(&b.values).map(|(p, q)| p * q).sum::<f64>();
        assert!((ip(&dx(&u), &v) - ip(&u, &dx_adjoint(&v))).abs() < 1e-10);
        assert!((ip(&dy(&u), &v) - ip(&u, &dy_adjoint(&v))).abs() < 1e-10);
    }

    #[test]
    fn integrate_then_differentiate() {
        let d = square(0.01);
        let p = Field::from_fn(d, |x, y| x.cos() * y.exp());
        let q = Field::from_fn(d, |x, y| x.sin() * y.exp());
        let f = integrate_form(&p, &q, (0, 0));
        let ex = dx(&f).zip(&p, |a, b| a - b);
        let ey = dy(&f).zip(&q, |a, b| a - b);
        assert!(ResidualReport::of_field("x", &ex).max_abs < 1e-4);
        assert!(ResidualReport::of_field("y", &ey).max_abs < 1e-4);
    }

    #[test]
    fn report_ordering() {
        let d = square(0.1);
        let f = Field::from_fn(d, |x, y| x * y);
        let r = ResidualReport::from_values("t", &f, 1, None);
        assert!(r.max_abs >= r.mean_abs && r.mean_abs >= 0.0 && r.full_max >= r.max_abs);
    }
}
