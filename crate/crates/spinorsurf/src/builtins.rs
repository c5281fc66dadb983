//! Built-in example data, runnable without external input.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::dirac3::{SpinorField3, WeierstrassData};
use crate::dirac4::KTData;
use crate::error::{invalid, Error, Result};
use crate::geomcheck::{Ambient, Immersion};
use crate::grid::{Domain, Field};
use crate::quatcliff::Quaternion;

/// Names accepted by `--builtin`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    Plane,
    Enneper,
    Catenoid,
    Sphere,
    VerticalPlane,
    Nil3FromSpinor,
    FlatPlane,
    HolomorphicGraph,
    CliffordTorus,
    LagrangianHr,
}

impl Builtin {
    pub const ALL: [Builtin; 10] = [
        Builtin::Plane,
        Builtin::Enneper,
        Builtin::Catenoid,
        Builtin::Sphere,
        Builtin::VerticalPlane,
        Builtin::Nil3FromSpinor,
        Builtin::FlatPlane,
        Builtin::HolomorphicGraph,
        Builtin::CliffordTorus,
        Builtin::LagrangianHr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Plane => "plane",
            Builtin::Enneper => "enneper",
            Builtin::Catenoid => "catenoid",
            Builtin::Sphere => "sphere",
            Builtin::VerticalPlane => "vertical-plane",
            Builtin::Nil3FromSpinor => "nil3-from-spinor",
            Builtin::FlatPlane => "flat-plane",
            Builtin::HolomorphicGraph => "holomorphic-graph",
            Builtin::CliffordTorus => "clifford-torus",
            Builtin::LagrangianHr => "lagrangian-hr",
        }
    }

    /// Ambient space, with `τ` filled in for Nil₃ examples.
    pub fn ambient(self, tau: f64) -> Ambient {
        match self {
            Builtin::Plane | Builtin::Enneper | Builtin::Catenoid | Builtin::Sphere => Ambient::R3,
            Builtin::VerticalPlane | Builtin::Nil3FromSpinor => Ambient::Nil3 { tau },
            _ => Ambient::R4,
        }
    }

    pub fn load(self, d: Domain, tau: f64) -> Result<Source> {
        Ok(match self {
            Builtin::Plane => Source::Spinor(plane(d)),
            Builtin::Enneper => Source::Weierstrass(enneper(d)),
            Builtin::Catenoid => Source::Weierstrass(catenoid(d)),
            Builtin::Sphere => Source::Immersion(sphere(d)?),
            Builtin::VerticalPlane => Source::Spinor(vertical_plane(d)),
            Builtin::Nil3FromSpinor => Source::Immersion(nil3_umbrella(d, tau)?),
            Builtin::FlatPlane => Source::Kt { kt: flat_plane(d)?, h: Some(Field::constant(d, C::new(0.0, 0.0))) },
            Builtin::HolomorphicGraph => {
                Source::Kt { kt: holomorphic_graph(d)?, h: Some(Field::constant(d, C::new(0.0, 0.0))) }
            }
            Builtin::CliffordTorus => Source::Immersion(clifford_torus(d)?),
            Builtin::LagrangianHr => {
                let (kt, h) = lagrangian_hr(d, LAGRANGIAN_A, LAGRANGIAN_B)?;
                Source::Kt { kt, h: Some(h) }
            }
        })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown builtin `{s}`")))
    }
}

/// Input data of a job.
#[derive(Clone, Debug)]
pub enum Source {
    Spinor(SpinorField3),
    Weierstrass(WeierstrassData),
    Immersion(Immersion),
    Kt { kt: KTData, h: Option<Field<C>> },
}

/// `ψ = (1, 0)`: the plane `(−y/2, −x/2, 0)`.
pub fn plane(d: Domain) -> SpinorField3 {
    SpinorField3 { psi1: Field::constant(d, C::new(1.0, 0.0)), psi2: Field::constant(d, C::new(0.0, 0.0)) }
}

/// `g = z`, `h = 1`.
pub fn enneper(d: Domain) -> WeierstrassData {
    WeierstrassData { g: Field::from_z(d, |z| z), h: Field::constant(d, C::new(1.0, 0.0)) }
}

/// `g = e^z`, `h = e^{−z}`.
pub fn catenoid(d: Domain) -> WeierstrassData {
    WeierstrassData { g: Field::from_z(d, |z| z.exp()), h: Field::from_z(d, |z| (-z).exp()) }
}

/// Inverse stereographic projection `(2x, 2y, |z|² − 1)/(1 + |z|²)` with exact tangents.
pub fn sphere(d: Domain) -> Result<Immersion> {
    let pts = Field::from_fn(d, |x, y| {
        let r2 = x * x + y * y;
        Quaternion::pure([2.0 * x, 2.0 * y, r2 - 1.0]) / (1.0 + r2)
    });
    let fx = Field::from_fn(d, |x, y| {
        let (r2, q) = (x * x + y * y, 1.0 + x * x + y * y);
        Quaternion::pure([2.0 / q - 4.0 * x * x / (q * q), -4.0 * x * y / (q * q), 2.0 * x / q - 2.0 * x * (r2 - 1.0) / (q * q)])
    });
    let fy = Field::from_fn(d, |x, y| {
        let (r2, q) = (x * x + y * y, 1.0 + x * x + y * y);
        Quaternion::pure([-4.0 * x * y / (q * q), 2.0 / q - 4.0 * y * y / (q * q), 2.0 * y / q - 2.0 * y * (r2 - 1.0) / (q * q)])
    });
    Ok(Immersion::new(Ambient::R3, pts)?.with_tangents(fx, fy))
}

/// `ψ = (e^{−iπ/4}, e^{iπ/4})`, whose surface is a vertical plane in Nil₃.
pub fn vertical_plane(d: Domain) -> SpinorField3 {
    SpinorField3 {
        psi1: Field::constant(d, C::from_polar(1.0, -FRAC_PI_4)),
        psi2: Field::constant(d, C::from_polar(1.0, FRAC_PI_4)),
    }
}

/// Horizontal umbrella `x₃ = 0` of Nil₃(τ) in the conformal coordinates
/// `s + iθ = z − 2`, `r = 2e^s / (τ(1 − e^{2s}))`.
pub fn nil3_umbrella(d: Domain, tau: f64) -> Result<Immersion> {
    if !(tau > 0.0) {
        return invalid("nil3-from-spinor needs τ > 0");
    }
    if d.x_max() >= 2.0 {
        return invalid("nil3-from-spinor needs x < 2 on the domain");
    }
    let radius = move |x: f64| {
        let w = (x - 2.0).exp();
        2.0 * w / (tau * (1.0 - w * w))
    };
    let pts = Field::from_fn(d, move |x, y| {
        let r = radius(x);
        Quaternion::pure([r * y.cos(), r * y.sin(), 0.0])
    });
    let ax = Field::from_fn(d, move |x, y| {
        let r = radius(x);
        let e = r * (1.0 + tau * tau * r * r).sqrt();
        Quaternion::pure([e * y.cos(), e * y.sin(), 0.0])
    });
    let ay = Field::from_fn(d, move |x, y| {
        let r = radius(x);
        Quaternion::pure([-r * y.sin(), r * y.cos(), -tau * r * r])
    });
    Ok(Immersion::new(Ambient::Nil3 { tau }, pts)?.with_tangents(ax, ay))
}

/// `s = (1, 0)`, `t = (1, 0)`: the plane `(x, y, 0, 0)`.
pub fn flat_plane(d: Domain) -> Result<KTData> {
    let one = Field::constant(d, C::new(1.0, 0.0));
    let zero = Field::constant(d, C::new(0.0, 0.0));
    KTData::new(one.clone(), zero.clone(), one, zero)
}

/// `s = (1, 0)`, `t = (1, z)`: the complex curve `(z, z²/2)`.
pub fn holomorphic_graph(d: Domain) -> Result<KTData> {
    let one = Field::constant(d, C::new(1.0, 0.0));
    let zero = Field::constant(d, C::new(0.0, 0.0));
    KTData::new(one.clone(), zero, one, Field::from_z(d, |z| z))
}

/// The graph `f = z + (z²/2)j` with exact tangents.
pub fn holomorphic_graph_immersion(d: Domain) -> Result<Immersion> {
    let pts = Field::from_z(d, |z| Quaternion::from_complex_parts(z, z * z * 0.5));
    let fx = Field::from_z(d, |z| Quaternion::from_complex_parts(C::new(1.0, 0.0), z));
    let fy = Field::from_z(d, |z| Quaternion::from_complex_parts(C::i(), C::i() * z));
    Ok(Immersion::new(Ambient::R4, pts)?.with_tangents(fx, fy))
}

/// `(cos x, sin x, cos y, sin y)/√2` with exact tangents.
pub fn clifford_torus(d: Domain) -> Result<Immersion> {
    let s = FRAC_1_SQRT_2;
    let pts = Field::from_fn(d, move |x, y| Quaternion::new(x.cos(), x.sin(), y.cos(), y.sin()) * s);
    let fx = Field::from_fn(d, move |x, _| Quaternion::new(-x.sin(), x.cos(), 0.0, 0.0) * s);
    let fy = Field::from_fn(d, move |_, y| Quaternion::new(0.0, 0.0, -y.sin(), y.cos()) * s);
    Ok(Immersion::new(Ambient::R4, pts)?.with_tangents(fx, fy))
}

pub const LAGRANGIAN_A: f64 = 1.0;
pub const LAGRANGIAN_B: f64 = 0.5;

/// Lagrangian surface with Lagrangian angle `β = ax + by`:
/// `t = (cos β/2, sin β/2)`, `s₁ = e^{−i(ax − by)/2}`, `s₂ = conj(i s₁)`,
/// with constant potential `h = (a + ib)/4`.
pub fn lagrangian_hr(d: Domain, a: f64, b: f64) -> Result<(KTData, Field<C>)> {
    let s1 = Field::from_fn(d, move |x, y| C::from_polar(1.0, -(a * x - b * y) / 2.0));
    let s2 = s1.map(|s| (C::i() * s).conj());
    let t1 = Field::from_fn(d, move |x, y| C::new(((a * x + b * y) / 2.0).cos(), 0.0));
    let t2 = Field::from_fn(d, move |x, y| C::new(((a * x + b * y) / 2.0).sin(), 0.0));
    Ok((KTData::new(s1, s2, t1, t2)?, Field::constant(d, C::new(a / 4.0, b / 4.0))))
}
