//! CSV field dumps and OBJ meshes.
//!
//! Every CSV has `x,y` as its first two columns followed by named value
//! columns, one row per grid point in storage order. Floats are written with
//! 17 significant digits so that identical inputs give identical files.
//! Lines starting with `#` are comments.

use std::io::{Read, Write};

use num_complex::Complex64 as C;

use crate::dirac3::{SpinorField3, WeierstrassData};
use crate::dirac4::{KTData, TwistedSpinor4};
use crate::error::{Error, Result};
use crate::geomcheck::{Ambient, Immersion};
use crate::grid::{Domain, Field};
use crate::quatcliff::Quaternion;

/// Named real columns over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub domain: Domain,
    pub comment: Option<String>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new(domain: Domain) -> Self {
        Table { domain, comment: None, names: Vec::new(), columns: Vec::new() }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        debug_assert_eq!(values.len(), self.domain.len());
        self.names.push(name.to_string());
        self.columns.push(values);
        self
    }

    pub fn push_real(&mut self, name: &str, f: &Field<f64>) -> &mut Self {
        self.push(name, f.values.clone())
    }

    pub fn push_complex(&mut self, name: &str, f: &Field<C>) -> &mut Self {
        self.push(&format!("{name}_re"), f.values.iter().map(|c| c.re).collect());
        self.push(&format!("{name}_im"), f.values.iter().map(|c| c.im).collect())
    }

    pub fn push_quaternion(&mut self, name: &str, f: &Field<Quaternion>) -> &mut Self {
        for (c, suffix) in ["w", "x", "y", "z"].iter().enumerate() {
            self.push(&format!("{name}_{suffix}"), f.values.iter().map(|q| q.to_array()[c]).collect());
        }
        self
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.columns[k].as_slice())
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    }

    pub fn real(&self, name: &str) -> Result<Field<f64>> {
        Field::new(self.domain, self.column(name)?.to_vec())
    }

    pub fn complex(&self, name: &str) -> Result<Field<C>> {
        let (re, im) = (self.column(&format!("{name}_re"))?, self.column(&format!("{name}_im"))?);
        Field::new(self.domain, re.iter().zip(im).map(|(a, b)| C::new(*a, *b)).collect())
    }

    pub fn quaternion(&self, name: &str) -> Result<Field<Quaternion>> {
        let cols: Vec<&[f64]> =
            ["w", "x", "y", "z"].iter().map(|s| self.column(&format!("{name}_{s}"))).collect::<Result<_>>()?;
        Field::new(self.domain, (0..self.domain.len()).map(|k| Quaternion::new(cols[0][k], cols[1][k], cols[2][k], cols[3][k])).collect())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        if let Some(c) = &self.comment {
            for line in c.lines() {
                writeln!(out, "# {line}")?;
            }
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string(), "y".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        let d = self.domain;
        for k in 0..d.len() {
            let (ix, iy) = d.coords(k);
            let mut row = vec![fmt(d.x(ix)), fmt(d.y(iy))];
            row.extend(self.columns.iter().map(|c| fmt(c[k])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table and recovers its grid from the `x,y` columns.
    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut text = String::new();
        let mut input = input;
        input.read_to_string(&mut text)?;
        let comment: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).map(|l| l[1..].trim()).collect();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != "x" || header[1] != "y" {
            return Err(Error::Parse("CSV must start with columns x,y".into()));
        }
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(Error::Parse("ragged CSV row".into()));
            }
            for (c, v) in rec.iter().enumerate() {
                cols[c].push(v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{v}`")))?);
            }
        }
        let domain = infer_domain(&cols[0], &cols[1])?;
        Ok(Table {
            domain,
            comment: if comment.is_empty() { None } else { Some(comment.join("\n")) },
            names: header[2..].to_vec(),
            columns: cols.split_off(2),
        })
    }
}

fn infer_domain(xs: &[f64], ys: &[f64]) -> Result<Domain> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::Parse("CSV has too few rows".into()));
    }
    let nx = ys.iter().take_while(|&&y| y == ys[0]).count();
    if nx < 2 || n % nx != 0 {
        return Err(Error::Parse("rows do not form a rectangular grid".into()));
    }
    let ny = n / nx;
    let h = (xs[nx - 1] - xs[0]) / (nx - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Parse("x must increase along a row".into()));
    }
    let d = Domain { x_min: xs[0], y_min: ys[0], h, nx, ny };
    for k in 0..n {
        let (ix, iy) = d.coords(k);
        if (xs[k] - d.x(ix)).abs() > 1e-9 * h.max(1.0) || (ys[k] - d.y(iy)).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Parse(format!("row {k} is off the uniform square grid")));
        }
    }
    if nx < crate::grid::MIN_POINTS || ny < crate::grid::MIN_POINTS {
        return Err(Error::Parse(format!("grid {nx}×{ny} is too small")));
    }
    Ok(d)
}

pub fn spinor_table(sf: &SpinorField3) -> Table {
    let mut t = Table::new(sf.domain());
    t.push_complex("psi1", &sf.psi1).push_complex("psi2", &sf.psi2);
    t
}

pub fn spinor_from_table(t: &Table) -> Result<SpinorField3> {
    SpinorField3::new(t.complex("psi1")?, t.complex("psi2")?)
}

pub fn weierstrass_table(wd: &WeierstrassData) -> Table {
    let mut t = Table::new(wd.g.domain);
    t.push_complex("g", &wd.g).push_complex("h", &wd.h);
    t
}

pub fn weierstrass_from_table(t: &Table) -> Result<WeierstrassData> {
    Ok(WeierstrassData { g: t.complex("g")?, h: t.complex("h")? })
}

pub fn kt_table(kt: &KTData, h: Option<&Field<C>>) -> Table {
    let mut t = Table::new(kt.domain());
    t.push_complex("s1", &kt.s1).push_complex("s2", &kt.s2).push_complex("t1", &kt.t1).push_complex("t2", &kt.t2);
    if let Some(h) = h {
        t.push_complex("h", h);
    }
    t
}

pub fn kt_from_table(t: &Table) -> Result<(KTData, Option<Field<C>>)> {
    let kt = KTData::new(t.complex("s1")?, t.complex("s2")?, t.complex("t1")?, t.complex("t2")?)?;
    let h = if t.names.iter().any(|n| n == "h_re") { Some(t.complex("h")?) } else { None };
    Ok((kt, h))
}

pub fn twisted_table(ts: &TwistedSpinor4) -> Table {
    let mut t = Table::new(ts.domain());
    t.push_quaternion("a", &ts.a).push_quaternion("b", &ts.b);
    t.push_real("rho", &ts.rho).push_real("cx", &ts.cx).push_real("cy", &ts.cy);
    t.push_real("H3", &ts.h3).push_real("H4", &ts.h4);
    t
}

pub fn twisted_from_table(t: &Table) -> Result<TwistedSpinor4> {
    Ok(TwistedSpinor4 {
        a: t.quaternion("a")?,
        b: t.quaternion("b")?,
        rho: t.real("rho")?,
        cx: t.real("cx")?,
        cy: t.real("cy")?,
        h3: t.real("H3")?,
        h4: t.real("H4")?,
    })
}

const POINT_COLUMNS: [&str; 4] = ["f1", "f2", "f3", "f4"];

/// Immersion points; Nil₃ tables carry a comment naming `τ` and the metric.
pub fn immersion_table(imm: &Immersion) -> Table {
    let mut t = Table::new(imm.domain());
    let dim = imm.ambient.dim();
    for (c, name) in POINT_COLUMNS.iter().enumerate().take(dim) {
        t.push(name, (0..imm.domain().len()).map(|k| imm.coords(k)[c]).collect());
    }
    t.comment = Some(match imm.ambient {
        Ambient::R3 => "ambient R3".to_string(),
        Ambient::R4 => "ambient R4".to_string(),
        Ambient::Nil3 { tau } => format!(
            "ambient Nil3 tau={}\nexponential coordinates (x1,x2,x3); the metric is left-invariant, not Euclidean",
            fmt(tau)
        ),
    });
    t
}

pub fn immersion_from_table(t: &Table) -> Result<Immersion> {
    let ambient = parse_ambient(t.comment.as_deref().unwrap_or(""), t.names.iter().any(|n| n == "f4"))?;
    let d = t.domain;
    let cols: Vec<&[f64]> = POINT_COLUMNS[..ambient.dim()].iter().map(|n| t.column(n)).collect::<Result<_>>()?;
    let pts = (0..d.len())
        .map(|k| match ambient {
            Ambient::R4 => Quaternion::new(cols[0][k], cols[1][k], cols[2][k], cols[3][k]),
            _ => Quaternion::pure([cols[0][k], cols[1][k], cols[2][k]]),
        })
        .collect();
    Immersion::new(ambient, Field::new(d, pts)?)
}

fn parse_ambient(comment: &str, has_f4: bool) -> Result<Ambient> {
    for line in comment.lines() {
        let mut it = line.split_whitespace();
        if it.next() != Some("ambient") {
            continue;
        }
        return match it.next() {
            Some("R3") => Ok(Ambient::R3),
            Some("R4") => Ok(Ambient::R4),
            Some("Nil3") => {
                let tau = it
                    .next()
                    .and_then(|s| s.strip_prefix("tau="))
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse("Nil3 header without tau=".into()))?;
                Ok(Ambient::Nil3 { tau })
            }
            other => Err(Error::Parse(format!("unknown ambient {other:?}"))),
        };
    }
    Ok(if has_f4 { Ambient::R4 } else { Ambient::R3 })
}

/// How ℝ⁴ points are mapped to ℝ³ for OBJ output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projection {
    /// Drop the given coordinate (0..4).
    Drop(usize),
    /// Stereographic projection from `±e_k` on the sphere of the given radius.
    Stereographic { pole: usize, radius: f64 },
}

impl std::str::FromStr for Projection {
    type Err = Error;

    /// `drop:K` or `stereo:K[:R]` with `K ∈ {0,1,2,3}`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let axis = |p: Option<&&str>| -> Result<usize> {
            p.and_then(|v| v.parse::<usize>().ok())
                .filter(|&k| k < 4)
                .ok_or_else(|| Error::Parse(format!("bad projection `{s}`")))
        };
        match parts.first().copied() {
            Some("drop") if parts.len() == 2 => Ok(Projection::Drop(axis(parts.get(1))?)),
            Some("stereo") if parts.len() == 2 || parts.len() == 3 => {
                let radius = match parts.get(2) {
                    Some(r) => r.parse::<f64>().map_err(|_| Error::Parse(format!("bad radius in `{s}`")))?,
                    None => 1.0,
                };
                Ok(Projection::Stereographic { pole: axis(parts.get(1))?, radius })
            }
            _ => Err(Error::Parse(format!("bad projection `{s}` (use drop:K or stereo:K[:R])"))),
        }
    }
}

impl Projection {
    pub fn apply(self, p: [f64; 4]) -> Result<[f64; 3]> {
        let rest = |k: usize| {
            let mut out = [0.0; 3];
            let mut j = 0;
            for (c, v) in p.iter().enumerate() {
                if c != k {
                    out[j] = *v;
                    j += 1;
                }
            }
            out
        };
        match self {
            Projection::Drop(k) => Ok(rest(k)),
            Projection::Stereographic { pole, radius } => {
                let denom = radius - p[pole];
                if denom.abs() < 1e-12 * radius.max(1.0) {
                    return Err(Error::InvalidInput("point at the projection pole".into()));
                }
                Ok(rest(pole).map(|v| radius * v / denom))
            }
        }
    }
}

/// Vertices and grid quads split into two triangles each.
pub fn write_obj<W: Write>(imm: &Immersion, projection: Projection, mut out: W) -> Result<()> {
    let d = imm.domain();
    writeln!(out, "# {} surface, {}x{} grid, h={}", imm.ambient.name(), d.nx, d.ny, fmt(d.h))?;
    if let Ambient::Nil3 { tau } = imm.ambient {
        writeln!(out, "# Nil3 tau={}: exponential coordinates, left-invariant metric", fmt(tau))?;
    }
    for k in 0..d.len() {
        let c = imm.coords(k);
        let v = if c.len() == 4 { projection.apply([c[0], c[1], c[2], c[3]])? } else { [c[0], c[1], c[2]] };
        writeln!(out, "v {} {} {}", fmt(v[0]), fmt(v[1]), fmt(v[2]))?;
    }
    for iy in 0..d.ny - 1 {
        for ix in 0..d.nx - 1 {
            let a = d.index(ix, iy) + 1;
            let b = d.index(ix + 1, iy) + 1;
            let c = d.index(ix + 1, iy + 1) + 1;
            let e = d.index(ix, iy + 1) + 1;
            writeln!(out, "f {a} {b} {c}")?;
            writeln!(out, "f {a} {c} {e}")?;
        }
    }
    Ok(())
}
