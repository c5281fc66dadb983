//! Command-line front end: job configuration, pipelines and the JSON report.
//!
//! A job is a verb applied to one data source. Every verb writes
//! `report.json` to the output directory; `gen`, `export` and `convert` also
//! write CSV and OBJ artifacts there.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::builtins::{Builtin, Source};
use crate::dirac3::{self, EmConvention, SpinorField3, WeierstrassData};
use crate::dirac4::{self, KTData, TwistedSpinor4};
use crate::error::{Error, Result};
use crate::geomcheck::{self, Ambient, Immersion};
use crate::grid::{closedness_residual, Domain, Field, ResidualReport};
use crate::io::{self, Projection, Table};
use crate::{expr, nil3, par};

/// Threshold of residuals that vanish up to roundoff.
pub const EXACT_TOL: f64 = 1e-10;
/// `C` in the `C·h²` threshold of residuals with second-order truncation error.
pub const ORDER2_CONST: f64 = 50.0;
/// Threshold of congruence RMS values.
pub const CONGRUENCE_TOL: f64 = 1e-4;
/// Threshold of the spread of the `q` invariant.
pub const Q_STD_TOL: f64 = 1e-6;
/// `τ` used for Nil₃ builtins when none is given.
pub const DEFAULT_TAU: f64 = 0.5;
/// Grid spacing used when none is given.
pub const DEFAULT_H: f64 = 0.01;
/// Rectangle `[x_min, x_max, y_min, y_max]` used when none is given.
pub const DEFAULT_DOMAIN: [f64; 4] = [-1.0, 1.0, -1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    /// Spinor data to immersion, with residuals, CSV and OBJ.
    Gen,
    /// All residuals applicable to the data.
    Verify,
    /// Immersion to spinor to immersion.
    Roundtrip,
    /// Weierstrass and spinor data, or twisted and KT data, into each other.
    Convert,
    /// Immersion as OBJ and CSV.
    Export,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AmbientTag {
    R3,
    Nil3,
    R4,
}

/// Where the data of a job comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Builtin(Builtin),
    Csv(PathBuf),
    /// Expressions keyed by `psi1, psi2` | `g, h` | `s1, s2, t1, t2[, h]`.
    Expr(BTreeMap<String, String>),
}

/// Contents of a `--config` file; every field may be overridden by a flag.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub verb: Option<Verb>,
    pub ambient: Option<AmbientTag>,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    pub domain: Option<[f64; 4]>,
    pub source: Option<SourceSpec>,
    pub out_dir: Option<PathBuf>,
    pub projection: Option<String>,
    pub tol_scale: Option<f64>,
    /// Absolute thresholds by residual name, replacing the defaults.
    pub tolerances: BTreeMap<String, f64>,
    pub timings: bool,
}

#[derive(Debug, Parser)]
#[command(name = "spinorsurf", version, about = "Spinor representations of surfaces in R3, Nil3 and R4")]
pub struct Args {
    /// Pipeline to run; may instead be given by the config file.
    #[arg(value_enum)]
    pub verb: Option<Verb>,
    /// JSON job configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in example (plane, enneper, catenoid, sphere, vertical-plane,
    /// nil3-from-spinor, flat-plane, holomorphic-graph, clifford-torus, lagrangian-hr).
    #[arg(long, conflicts_with_all = ["csv", "exprs"])]
    pub builtin: Option<String>,
    /// CSV field dump; its kind is recognised from the column names.
    #[arg(long, conflicts_with = "exprs")]
    pub csv: Option<PathBuf>,
    /// Expression data as KEY=EXPR, repeated (see docs/expressions.md).
    #[arg(long = "expr", value_name = "KEY=EXPR")]
    pub exprs: Vec<String>,
    #[arg(long, value_enum)]
    pub ambient: Option<AmbientTag>,
    /// Bundle curvature of Nil3.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Grid spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Rectangle as X_MIN,X_MAX,Y_MIN,Y_MAX.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub domain: Option<Vec<f64>>,
    /// Factor applied to every default threshold.
    #[arg(long)]
    pub tol_scale: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// OBJ projection to 3D: drop:K or stereo:K[:R], K a coordinate index 0..3.
    #[arg(long)]
    pub projection: Option<String>,
    /// Record wall-clock timings in the report (makes it non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

impl Args {
    /// The config file, if any, with flags applied on top.
    pub fn into_config(self) -> Result<JobConfig> {
        let mut cfg = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
            None => JobConfig::default(),
        };
        if self.verb.is_some() {
            cfg.verb = self.verb;
        }
        if let Some(b) = self.builtin {
            cfg.source = Some(SourceSpec::Builtin(b.parse()?));
        }
        if let Some(p) = self.csv {
            cfg.source = Some(SourceSpec::Csv(p));
        }
        if !self.exprs.is_empty() {
            let mut map = BTreeMap::new();
            for e in &self.exprs {
                let (k, v) = e.split_once('=').ok_or_else(|| Error::Parse(format!("expected KEY=EXPR, got `{e}`")))?;
                if map.insert(k.trim().to_string(), v.to_string()).is_some() {
                    return Err(Error::Parse(format!("expression `{k}` given twice")));
                }
            }
            cfg.source = Some(SourceSpec::Expr(map));
        }
        if let Some(d) = self.domain {
            let d: [f64; 4] = d.try_into().map_err(|_| Error::Parse("--domain takes X_MIN,X_MAX,Y_MIN,Y_MAX".into()))?;
            cfg.domain = Some(d);
        }
        cfg.ambient = self.ambient.or(cfg.ambient);
        cfg.tau = self.tau.or(cfg.tau);
        cfg.h = self.h.or(cfg.h);
        cfg.tol_scale = self.tol_scale.or(cfg.tol_scale);
        cfg.out_dir = self.out_dir.or(cfg.out_dir);
        cfg.projection = self.projection.or(cfg.projection);
        cfg.timings |= self.timings;
        Ok(cfg)
    }
}

/// Input data after loading.
#[derive(Clone, Debug)]
pub enum Data {
    Spinor(SpinorField3),
    Weierstrass(WeierstrassData),
    Immersion(Immersion),
    Kt(KTData, Option<Field<C>>),
    Twisted(TwistedSpinor4),
}

impl Data {
    fn kind(&self) -> &'static str {
        match self {
            Data::Spinor(_) => "spinor",
            Data::Weierstrass(_) => "weierstrass",
            Data::Immersion(_) => "immersion",
            Data::Kt(..) => "kt",
            Data::Twisted(_) => "twisted",
        }
    }

    fn domain(&self) -> Domain {
        match self {
            Data::Spinor(s) => s.domain(),
            Data::Weierstrass(w) => w.g.domain,
            Data::Immersion(i) => i.domain(),
            Data::Kt(kt, _) => kt.domain(),
            Data::Twisted(t) => t.domain(),
        }
    }
}

/// A validated job.
#[derive(Clone, Debug)]
pub struct Job {
    pub verb: Verb,
    pub label: String,
    pub ambient: Ambient,
    pub data: Data,
    pub out_dir: PathBuf,
    pub projection: Projection,
    pub tol_scale: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub timings: bool,
}

fn ambient_for_3d(tag: Option<AmbientTag>, tau: Option<f64>) -> Result<Ambient> {
    match (tag, tau) {
        (None | Some(AmbientTag::R3), None) => Ok(Ambient::R3),
        (None | Some(AmbientTag::Nil3), Some(tau)) => Ok(Ambient::Nil3 { tau }),
        (Some(AmbientTag::Nil3), None) => Err(Error::InvalidInput("ambient Nil3 needs --tau".into())),
        (Some(AmbientTag::R3), Some(_)) => Err(Error::InvalidInput("τ is only meaningful for Nil3".into())),
        (Some(AmbientTag::R4), _) => Err(Error::InvalidInput("spinor data of this kind lives in R3 or Nil3".into())),
    }
}

fn ambient_r4(tag: Option<AmbientTag>, tau: Option<f64>) -> Result<Ambient> {
    if tau.is_some() || matches!(tag, Some(AmbientTag::R3 | AmbientTag::Nil3)) {
        return Err(Error::InvalidInput("R4 data takes no τ and no other ambient".into()));
    }
    Ok(Ambient::R4)
}

fn check_ambient(got: Ambient, tag: Option<AmbientTag>, tau: Option<f64>) -> Result<()> {
    let tag_ok = match tag {
        None => true,
        Some(AmbientTag::R3) => got == Ambient::R3,
        Some(AmbientTag::Nil3) => matches!(got, Ambient::Nil3 { .. }),
        Some(AmbientTag::R4) => got == Ambient::R4,
    };
    let tau_ok = match (got, tau) {
        (_, None) => true,
        (Ambient::Nil3 { tau: t }, Some(tau)) => t == tau,
        _ => false,
    };
    if !(tag_ok && tau_ok) {
        return Err(Error::InvalidInput(format!("data lives in {}, which contradicts --ambient/--tau", got.name())));
    }
    Ok(())
}

fn grid(cfg: &JobConfig) -> Result<Domain> {
    let [x0, x1, y0, y1] = cfg.domain.unwrap_or(DEFAULT_DOMAIN);
    Domain::with_spacing(x0, x1, y0, y1, cfg.h.unwrap_or(DEFAULT_H))
}

fn expr_data(map: &BTreeMap<String, String>, d: Domain) -> Result<Data> {
    let keys: Vec<&str> = map.keys().map(String::as_str).collect();
    let get = |k: &str| expr::sample(&map[k], d);
    match keys.as_slice() {
        ["psi1", "psi2"] => Ok(Data::Spinor(SpinorField3::new(get("psi1")?, get("psi2")?)?)),
        ["g", "h"] => Ok(Data::Weierstrass(WeierstrassData { g: get("g")?, h: get("h")? })),
        ["s1", "s2", "t1", "t2"] | ["h", "s1", "s2", "t1", "t2"] => {
            let kt = KTData::new(get("s1")?, get("s2")?, get("t1")?, get("t2")?)?;
            let h = if map.contains_key("h") { Some(get("h")?) } else { None };
            Ok(Data::Kt(kt, h))
        }
        _ => Err(Error::InvalidInput(format!(
            "expression keys {keys:?} are none of psi1,psi2 | g,h | s1,s2,t1,t2[,h]"
        ))),
    }
}

fn csv_data(path: &Path) -> Result<Data> {
    let t = Table::read(fs::File::open(path)?)?;
    let has = |n: &str| t.names.iter().any(|c| c == n);
    if has("psi1_re") {
        Ok(Data::Spinor(io::spinor_from_table(&t)?))
    } else if has("g_re") {
        Ok(Data::Weierstrass(io::weierstrass_from_table(&t)?))
    } else if has("s1_re") {
        let (kt, h) = io::kt_from_table(&t)?;
        Ok(Data::Kt(kt, h))
    } else if has("a_w") {
        Ok(Data::Twisted(io::twisted_from_table(&t)?))
    } else if has("f1") {
        Ok(Data::Immersion(io::immersion_from_table(&t)?))
    } else {
        Err(Error::Parse(format!("{}: no known column set", path.display())))
    }
}

impl Job {
    pub fn from_config(cfg: JobConfig) -> Result<Job> {
        let verb = cfg.verb.ok_or_else(|| Error::InvalidInput("no verb given".into()))?;
        let source = cfg.source.clone().ok_or_else(|| Error::InvalidInput("no data source given".into()))?;
        if let Some(t) = cfg.tau {
            if !t.is_finite() {
                return Err(Error::InvalidInput("τ must be finite".into()));
            }
        }
        let (label, ambient, data) = match &source {
            SourceSpec::Builtin(b) => {
                let natural = b.ambient(0.0);
                let tau = match natural {
                    Ambient::Nil3 { .. } => Some(cfg.tau.unwrap_or(DEFAULT_TAU)),
                    _ => cfg.tau,
                };
                let ambient = b.ambient(tau.unwrap_or(0.0));
                check_ambient(ambient, cfg.ambient, tau)?;
                let data = match b.load(grid(&cfg)?, ambient.tau())? {
                    Source::Spinor(s) => Data::Spinor(s),
                    Source::Weierstrass(w) => Data::Weierstrass(w),
                    Source::Immersion(i) => Data::Immersion(i),
                    Source::Kt { kt, h } => Data::Kt(kt, h),
                };
                (format!("builtin:{b}"), ambient, data)
            }
            SourceSpec::Csv(path) => {
                if cfg.h.is_some() || cfg.domain.is_some() {
                    return Err(Error::InvalidInput("the grid of CSV data is read from the file".into()));
                }
                let data = csv_data(path)?;
                let ambient = match &data {
                    Data::Immersion(i) => {
                        check_ambient(i.ambient, cfg.ambient, cfg.tau)?;
                        i.ambient
                    }
                    Data::Spinor(_) => ambient_for_3d(cfg.ambient, cfg.tau)?,
                    Data::Weierstrass(_) => ambient_for_3d(cfg.ambient, cfg.tau).and_then(only_r3)?,
                    Data::Kt(..) | Data::Twisted(_) => ambient_r4(cfg.ambient, cfg.tau)?,
                };
                (format!("csv:{}", path.display()), ambient, data)
            }
            SourceSpec::Expr(map) => {
                let data = expr_data(map, grid(&cfg)?)?;
                let ambient = match &data {
                    Data::Spinor(_) => ambient_for_3d(cfg.ambient, cfg.tau)?,
                    Data::Weierstrass(_) => ambient_for_3d(cfg.ambient, cfg.tau).and_then(only_r3)?,
                    _ => ambient_r4(cfg.ambient, cfg.tau)?,
                };
                let desc: Vec<String> = map.iter().map(|(k, v)| format!("{k}={v}")).collect();
                (format!("expr:{}", desc.join(";")), ambient, data)
            }
        };
        let projection = match &cfg.projection {
            Some(p) => p.parse()?,
            None if ambient == Ambient::R4 => Projection::Drop(3),
            None => Projection::Drop(0),
        };
        let tol_scale = cfg.tol_scale.unwrap_or(1.0);
        if !(tol_scale > 0.0 && tol_scale.is_finite()) {
            return Err(Error::InvalidInput("--tol-scale must be positive".into()));
        }
        Ok(Job {
            verb,
            label,
            ambient,
            data,
            out_dir: cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            projection,
            tol_scale,
            tolerances: cfg.tolerances.clone(),
            timings: cfg.timings,
        })
    }
}

fn only_r3(a: Ambient) -> Result<Ambient> {
    if a != Ambient::R3 {
        return Err(Error::InvalidInput("Weierstrass data lives in R3".into()));
    }
    Ok(a)
}

/// How the threshold of a residual is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rule {
    /// [`EXACT_TOL`].
    Exact,
    /// `ORDER2_CONST · h²`.
    Order2,
    Fixed(f64),
    /// Reported without a threshold.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JobInfo {
    pub verb: Verb,
    pub source: String,
    pub data: String,
    pub ambient: Ambient,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridInfo {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub job: JobInfo,
    pub grid: GridInfo,
    pub residuals: Vec<Entry>,
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    /// Whether every thresholded residual passed.
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|e| e.pass != Some(false))
    }
}

struct Checks<'a> {
    job: &'a Job,
    h: f64,
    entries: Vec<Entry>,
}

impl Checks<'_> {
    fn threshold(&self, name: &str, rule: Rule) -> Option<f64> {
        if let Some(t) = self.job.tolerances.get(name) {
            return Some(*t);
        }
        let s = self.job.tol_scale;
        match rule {
            Rule::Exact => Some(EXACT_TOL * s),
            Rule::Order2 => Some(ORDER2_CONST * self.h * self.h * s),
            Rule::Fixed(t) => Some(t * s),
            Rule::Info => None,
        }
    }

    fn push(&mut self, name: &str, max: f64, mean: f64, rule: Rule) {
        let threshold = self.threshold(name, rule);
        let pass = threshold.map(|t| max <= t);
        self.entries.push(Entry { name: name.to_string(), max, mean, threshold, pass });
    }

    fn report(&mut self, r: &ResidualReport, rule: Rule) {
        self.push(&r.name, r.max_abs, r.mean_abs, rule);
    }

    fn named(&mut self, name: &str, r: &ResidualReport, rule: Rule) {
        self.push(name, r.max_abs, r.mean_abs, rule);
    }

    fn scalar(&mut self, name: &str, v: f64, rule: Rule) {
        self.push(name, v.abs(), v.abs(), rule);
    }

    fn conformality(&mut self, imm: &Immersion) -> Result<()> {
        let ff = geomcheck::first_form(imm)?;
        let rule = if imm.tangents.is_some() { Rule::Exact } else { Rule::Order2 };
        self.report(&ff.conformality, rule);
        Ok(())
    }

    /// Checks of spinor data; returns the generated immersion.
    fn spinor3(&mut self, sf: &SpinorField3, ambient: Ambient) -> Result<Immersion> {
        let pot = dirac3::potential_from_spinor(sf)?;
        self.report(&pot.consistency, Rule::Order2);
        self.report(&dirac3::dirac_residual(sf, &pot.u), Rule::Order2);
        let (p, q) = dirac3::integrand(sf);
        match ambient {
            Ambient::R3 => {
                self.named("closedness", &closedness_residual(&p, &q), Rule::Order2);
                let imm = dirac3::immerse_r3(sf);
                self.conformality(&imm)?;
                let im = pot.u.map(|u| u.im);
                self.named("potential_imaginary", &ResidualReport::from_values("", &im, 1, None), Rule::Order2);
                let curv = geomcheck::mean_curvature_r3(&imm)?;
                let e_rho = geomcheck::conformal_factor(&imm);
                let r = pointwise3(&pot.u, &curv.mean, &e_rho, |u, h, e| u.re - h * e / 2.0);
                self.named("potential_vs_mean_curvature", &ResidualReport::from_values("", &r, 2, None), Rule::Order2);
                self.named("mean_curvature", &ResidualReport::from_values("", &curv.mean, 2, None), Rule::Info);
                Ok(imm)
            }
            Ambient::Nil3 { tau } => {
                self.report(&nil3::potential_residual(sf, &pot.u, tau), Rule::Order2);
                self.report(&nil3::nil3_integrability_residual(&nil3::maurer_cartan_from_spinor(sf), tau), Rule::Order2);
                let imm = nil3::immerse_nil3(sf, tau);
                self.report(&nil3::x3_path_dependence(&imm)?, Rule::Order2);
                self.conformality(&imm)?;
                Ok(imm)
            }
            Ambient::R4 => Err(Error::InvalidInput("spinor data in R4 must be KT or twisted data".into())),
        }
    }

    /// Structure equations of a surface in Nil₃ and the invariants of its spinor.
    fn nil3_witnesses(&mut self, imm: &Immersion) -> Result<()> {
        let ind = dirac3::induced_spinor(imm)?;
        let sd = nil3::surface_data(imm)?;
        self.report(&dirac3::daniel_residual(&sd), Rule::Order2);
        let c = dirac3::constancy_residual(&sd, &ind.v);
        self.report(&c.equation, Rule::Order2);
        self.report(&c.norm, Rule::Exact);
        let q = dirac3::q_invariant(&ind.v, &sd);
        self.scalar("q_std", q.std, Rule::Fixed(Q_STD_TOL));
        self.report(&q.real_part, Rule::Exact);
        self.report(&q.vanishing, Rule::Exact);
        self.report(&dirac3::em_tensor_residual(&ind.v, &sd, EmConvention::Consistent), Rule::Order2);
        self.report(&dirac3::em_tensor_residual(&ind.v, &sd, EmConvention::Displayed), Rule::Info);
        self.report(&dirac3::gauss_residual(&sd), Rule::Order2);
        Ok(())
    }

    fn weierstrass(&mut self, wd: &WeierstrassData) -> Result<Immersion> {
        let sf = dirac3::spinor_from_weierstrass(wd)?;
        let imm = self.spinor3(&sf, Ambient::R3)?;
        let classical = dirac3::classical_weierstrass(wd);
        self.scalar("weierstrass_congruence", geomcheck::congruence(&imm, &classical)?.rms, Rule::Fixed(CONGRUENCE_TOL));
        let curv = geomcheck::mean_curvature_r3(&imm)?;
        // Overrides the informational entry: Weierstrass data are minimal.
        self.entries.retain(|e| e.name != "mean_curvature");
        self.named("mean_curvature", &ResidualReport::from_values("", &curv.mean, 2, None), Rule::Order2);
        Ok(imm)
    }

    /// Checks of KT data; returns the data used (gauge-fixed if no `h` was given),
    /// its potential and immersion.
    fn kt(&mut self, kt: &KTData, h: Option<&Field<C>>) -> Result<(KTData, Field<C>, Immersion)> {
        let (kt, h) = match h {
            Some(h) => (kt.clone(), h.clone()),
            None => {
                let g = dirac4::gauge_fix(kt)?;
                self.report(&g.span_residual, Rule::Order2);
                self.scalar("dbar_relative", g.dbar.relative_residual, Rule::Fixed(dirac4::DBAR_ACCEPT));
                (g.kt, g.h)
            }
        };
        let r = dirac4::kt_dirac_residual(&kt, &h);
        self.report(&r.componentwise, Rule::Order2);
        self.report(&r.quaternionic, Rule::Order2);
        self.scalar("kt_agreement", r.agreement, Rule::Exact);
        self.report(&dirac4::integrability_residual(&kt), Rule::Order2);
        let imm = dirac4::kt_immerse(&kt);
        let comp = dirac4::kt_immerse_componentwise(&kt);
        self.scalar("kt_immerse_agreement", max_distance(&imm.points, &comp.points), Rule::Exact);
        self.conformality(&imm)?;
        self.r4_curvature(&imm)?;
        self.report(&dirac4::lagrangian_residual(&imm), Rule::Info);
        Ok((kt, h, imm))
    }

    fn r4_curvature(&mut self, imm: &Immersion) -> Result<()> {
        let frame = geomcheck::normal_frame_r4(imm)?;
        let nd = geomcheck::mean_curvature_r4(imm, &frame)?;
        let norm = nd.h3.zip(&nd.h4, f64::hypot);
        self.named("mean_curvature_norm", &ResidualReport::from_values("", &norm, 2, None), Rule::Info);
        Ok(())
    }

    fn twisted(&mut self, ts: &TwistedSpinor4) -> Result<dirac4::KtFromTwisted> {
        self.scalar("norm_drift", ts.norm_drift(), Rule::Fixed(dirac4::NORM_DRIFT));
        self.report(&dirac4::twisted_dirac_residual(ts)?.report, Rule::Order2);
        self.report(&dirac4::xi_closedness(ts), Rule::Order2);
        let out = dirac4::build_AB_from_ab(ts)?;
        self.scalar("dbar_relative", out.dbar.relative_residual, Rule::Fixed(dirac4::DBAR_ACCEPT));
        let xi = dirac4::xi_immerse(ts)?;
        let kt_imm = dirac4::kt_immerse(&out.kt);
        self.scalar("xi_kt_agreement", max_distance(&xi.points, &kt_imm.points), Rule::Exact);
        self.report(&dirac4::potential_modulus_residual(&out.h, ts), Rule::Exact);
        let r = dirac4::kt_dirac_residual(&out.kt, &out.h);
        self.report(&r.componentwise, Rule::Order2);
        self.scalar("kt_agreement", r.agreement, Rule::Exact);
        let abs_h = out.h.map(|h| h.norm());
        self.named("potential_abs", &ResidualReport::from_values("", &abs_h, 1, None), Rule::Info);
        Ok(out)
    }

    fn r4_immersion(&mut self, imm: &Immersion) -> Result<TwistedSpinor4> {
        self.conformality(imm)?;
        self.r4_curvature(imm)?;
        let ts = dirac4::build_ab_from_immersion(imm)?;
        self.twisted(&ts)?;
        Ok(ts)
    }

    /// All checks applicable to the data; returns its immersion.
    fn verify(&mut self, data: &Data, ambient: Ambient) -> Result<Immersion> {
        match data {
            Data::Spinor(sf) => {
                let imm = self.spinor3(sf, ambient)?;
                if let Ambient::Nil3 { .. } = ambient {
                    self.nil3_witnesses(&imm)?;
                }
                Ok(imm)
            }
            Data::Weierstrass(wd) => self.weierstrass(wd),
            Data::Immersion(imm) if imm.ambient == Ambient::R4 => {
                self.r4_immersion(imm)?;
                Ok(imm.clone())
            }
            Data::Immersion(imm) => {
                self.conformality(imm)?;
                let ind = dirac3::induced_spinor(imm)?;
                self.spinor3(&ind.spinor, ambient)?;
                if let Ambient::Nil3 { .. } = ambient {
                    self.nil3_witnesses(imm)?;
                }
                Ok(imm.clone())
            }
            Data::Kt(kt, h) => Ok(self.kt(kt, h.as_ref())?.2),
            Data::Twisted(ts) => {
                let out = self.twisted(ts)?;
                Ok(dirac4::kt_immerse(&out.kt))
            }
        }
    }
}

fn pointwise3(u: &Field<C>, a: &Field<f64>, b: &Field<f64>, f: impl Fn(C, f64, f64) -> f64 + Sync) -> Field<f64> {
    crate::grid::pointwise(u.domain, |k| f(u.values[k], a.values[k], b.values[k]))
}

fn max_distance(a: &Field<crate::Quaternion>, b: &Field<crate::Quaternion>) -> f64 {
    par::max(&a.zip(b, |p, q| (p - q).norm()).values)
}

/// The immersion a source describes, without any checks.
fn immersion_of(data: &Data, ambient: Ambient) -> Result<Immersion> {
    Ok(match data {
        Data::Spinor(sf) => match ambient {
            Ambient::Nil3 { tau } => nil3::immerse_nil3(sf, tau),
            _ => dirac3::immerse_r3(sf),
        },
        Data::Weierstrass(wd) => dirac3::immerse_r3(&dirac3::spinor_from_weierstrass(wd)?),
        Data::Immersion(imm) => imm.clone(),
        Data::Kt(kt, _) => dirac4::kt_immerse(kt),
        Data::Twisted(ts) => dirac4::xi_immerse(ts)?,
    })
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<String>,
}

impl Writer<'_> {
    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let mut buf = Vec::new();
        t.write(&mut buf)?;
        fs::write(self.dir.join(name), buf)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn surface(&mut self, imm: &Immersion, projection: Projection) -> Result<()> {
        self.table("surface.csv", &io::immersion_table(imm))?;
        let mut buf = Vec::new();
        io::write_obj(imm, projection, &mut buf)?;
        fs::write(self.dir.join("surface.obj"), buf)?;
        self.outputs.push("surface.obj".to_string());
        Ok(())
    }
}

fn roundtrip(c: &mut Checks, data: &Data, ambient: Ambient) -> Result<()> {
    let imm = immersion_of(data, ambient)?;
    match ambient {
        Ambient::R3 => {
            let ind = dirac3::induced_spinor(&imm)?;
            let back = dirac3::immerse_r3(&ind.spinor);
            c.scalar("roundtrip_congruence", geomcheck::congruence(&back, &imm)?.rms, Rule::Fixed(CONGRUENCE_TOL));
            if let Data::Spinor(sf) = data {
                let dist = dirac3::spinor_distance_up_to_sign(&ind.spinor, sf);
                c.scalar("spinor_recovery", dist, Rule::Fixed(1e-6));
            }
        }
        Ambient::Nil3 { tau } => {
            let ind = dirac3::induced_spinor(&imm)?;
            let back = nil3::immerse_nil3(&ind.spinor, tau);
            // Both surfaces pass through the identity at the base point after a left translation.
            let (bx, by) = imm.base();
            let p0 = nil3::Nil3Point::from_quaternion(imm.points.get(bx, by), tau);
            let moved = nil3::left_translate(&imm, p0)?;
            c.scalar("roundtrip_distance", max_distance(&moved.points, &back.points), Rule::Order2);
            if let Data::Spinor(sf) = data {
                let dist = dirac3::spinor_distance_up_to_sign(&ind.spinor, sf);
                c.scalar("spinor_recovery", dist, Rule::Fixed(1e-6));
            }
        }
        Ambient::R4 => {
            let ts = dirac4::build_ab_from_immersion(&imm)?;
            let xi = dirac4::xi_immerse(&ts)?;
            c.scalar("roundtrip_congruence", geomcheck::congruence(&xi, &imm)?.rms, Rule::Fixed(CONGRUENCE_TOL));
            let out = dirac4::build_AB_from_ab(&ts)?;
            let kt_imm = dirac4::kt_immerse(&out.kt);
            let rms = geomcheck::congruence(&kt_imm, &imm)?.rms;
            c.scalar("roundtrip_kt_congruence", rms, Rule::Fixed(CONGRUENCE_TOL));
        }
    }
    Ok(())
}

fn convert(c: &mut Checks, w: &mut Writer, data: &Data, ambient: Ambient) -> Result<()> {
    match data {
        Data::Weierstrass(wd) => {
            let sf = dirac3::spinor_from_weierstrass(wd)?;
            let rms = geomcheck::congruence(&dirac3::immerse_r3(&sf), &dirac3::classical_weierstrass(wd))?.rms;
            c.scalar("weierstrass_congruence", rms, Rule::Fixed(CONGRUENCE_TOL));
            w.table("spinor.csv", &io::spinor_table(&sf))
        }
        Data::Spinor(sf) if ambient == Ambient::R3 => {
            let wd = dirac3::weierstrass_from_spinor(sf)?;
            let rms = geomcheck::congruence(&dirac3::immerse_r3(sf), &dirac3::classical_weierstrass(&wd))?.rms;
            c.scalar("weierstrass_congruence", rms, Rule::Fixed(CONGRUENCE_TOL));
            w.table("weierstrass.csv", &io::weierstrass_table(&wd))
        }
        Data::Immersion(imm) if imm.ambient != Ambient::R4 => {
            c.conformality(imm)?;
            let ind = dirac3::induced_spinor(imm)?;
            w.table("spinor.csv", &io::spinor_table(&ind.spinor))
        }
        Data::Spinor(_) => Err(Error::InvalidInput("convert handles R3 spinor data only".into())),
        Data::Twisted(ts) => {
            let out = c.twisted(ts)?;
            w.table("kt.csv", &io::kt_table(&out.kt, Some(&out.h)))
        }
        Data::Immersion(imm) => {
            let ts = c.r4_immersion(imm)?;
            w.table("twisted.csv", &io::twisted_table(&ts))?;
            let out = dirac4::build_AB_from_ab(&ts)?;
            w.table("kt.csv", &io::kt_table(&out.kt, Some(&out.h)))
        }
        Data::Kt(kt, h) => {
            let (fixed, h, imm) = c.kt(kt, h.as_ref())?;
            let ts = dirac4::build_ab_from_immersion(&imm)?;
            c.report(&dirac4::twisted_dirac_residual(&ts)?.report, Rule::Order2);
            w.table("kt.csv", &io::kt_table(&fixed, Some(&h)))?;
            w.table("twisted.csv", &io::twisted_table(&ts))
        }
    }
}

/// Runs a job and writes its artifacts and `report.json`.
pub fn run(job: &Job) -> Result<Report> {
    fs::create_dir_all(&job.out_dir)?;
    let d = job.data.domain();
    let mut timings = BTreeMap::new();
    let mut checks = Checks { job, h: d.h, entries: Vec::new() };
    let mut writer = Writer { dir: &job.out_dir, outputs: Vec::new() };
    let start = Instant::now();
    match job.verb {
        Verb::Gen => {
            let imm = checks.verify(&job.data, job.ambient)?;
            timings.insert("checks".to_string(), start.elapsed().as_secs_f64());
            writer.surface(&imm, job.projection)?;
        }
        Verb::Verify => {
            checks.verify(&job.data, job.ambient)?;
        }
        Verb::Roundtrip => roundtrip(&mut checks, &job.data, job.ambient)?,
        Verb::Convert => convert(&mut checks, &mut writer, &job.data, job.ambient)?,
        Verb::Export => {
            let imm = immersion_of(&job.data, job.ambient)?;
            writer.surface(&imm, job.projection)?;
        }
    }
    timings.insert("total".to_string(), start.elapsed().as_secs_f64());
    writer.outputs.push("report.json".to_string());
    let report = Report {
        job: JobInfo {
            verb: job.verb,
            source: job.label.clone(),
            data: job.data.kind().to_string(),
            ambient: job.ambient,
            outputs: writer.outputs,
        },
        grid: GridInfo { h: d.h, nx: d.nx, ny: d.ny },
        residuals: checks.entries,
        timings: if job.timings { timings } else { BTreeMap::new() },
    };
    fs::write(job.out_dir.join("report.json"), report_json(&report)?)?;
    Ok(report)
}

pub fn report_json(r: &Report) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

/// `{"error": {"kind", "message"}}`.
pub fn error_json(e: &Error) -> String {
    let body = serde_json::json!({ "error": ErrorBody { kind: e.kind(), message: e.to_string() } });
    serde_json::to_string_pretty(&body).expect("error body serializes") + "\n"
}

/// Exit status: 0 if every residual passed, 1 if one failed, 2 on error.
pub fn main_with(args: Args) -> i32 {
    let out_dir = args.out_dir.clone();
    let result = args.into_config().and_then(|cfg| {
        let job = Job::from_config(cfg)?;
        run(&job)
    });
    match result {
        Ok(report) => {
            print!("{}", report_json(&report).unwrap_or_default());
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let body = error_json(&e);
            print!("{body}");
            if let Some(dir) = out_dir {
                let _ = fs::create_dir_all(&dir).and_then(|_| fs::write(dir.join("report.json"), &body));
            }
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(verb: Verb, source: SourceSpec, h: f64, dir: &Path) -> Job {
        let cfg = JobConfig {
            verb: Some(verb),
            source: Some(source),
            h: Some(h),
            out_dir: Some(dir.to_path_buf()),
            ..JobConfig::default()
        };
        Job::from_config(cfg).unwrap()
    }

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("spinorsurf-cli-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn plane_verifies_with_zero_residuals() {
        let dir = tmp("plane");
        let r = run(&job(Verb::Verify, SourceSpec::Builtin(Builtin::Plane), 0.1, &dir)).unwrap();
        assert!(r.passed());
        assert!(r.residuals.iter().all(|e| e.max < 1e-14), "{:?}", r.residuals);
        let text = fs::read_to_string(dir.join("report.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["grid"]["nx"], 21);
        assert!(v["residuals"][0]["threshold"].is_number());
        assert_eq!(v["timings"], serde_json::json!({}));
    }

    #[test]
    fn gen_writes_mesh_and_table() {
        let dir = tmp("gen");
        let r = run(&job(Verb::Gen, SourceSpec::Builtin(Builtin::Enneper), 0.05, &dir)).unwrap();
        assert!(r.passed(), "{:?}", r.residuals);
        assert!(r.residuals.iter().any(|e| e.name == "mean_curvature" && e.threshold.is_some()));
        let obj = fs::read_to_string(dir.join("surface.obj")).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 41 * 41);
        let t = Table::read(fs::File::open(dir.join("surface.csv")).unwrap()).unwrap();
        assert_eq!(t.names, ["f1", "f2", "f3"]);
    }

    #[test]
    fn expression_and_csv_sources() {
        let dir = tmp("expr");
        let mut map = BTreeMap::new();
        map.insert("g".to_string(), "z".to_string());
        map.insert("h".to_string(), "1".to_string());
        let r = run(&job(Verb::Convert, SourceSpec::Expr(map), 0.05, &dir)).unwrap();
        assert!(r.passed());
        let cfg = JobConfig {
            verb: Some(Verb::Verify),
            source: Some(SourceSpec::Csv(dir.join("spinor.csv"))),
            out_dir: Some(dir.clone()),
            ..JobConfig::default()
        };
        let r2 = run(&Job::from_config(cfg).unwrap()).unwrap();
        assert!(r2.passed(), "{:?}", r2.residuals);
        assert_eq!(r2.job.data, "spinor");
    }

    #[test]
    fn config_validation() {
        let base = JobConfig { verb: Some(Verb::Verify), h: Some(0.1), ..JobConfig::default() };
        let with = |f: &dyn Fn(&mut JobConfig)| {
            let mut c = base.clone();
            f(&mut c);
            Job::from_config(c)
        };
        assert!(with(&|_| {}).is_err());
        assert!(with(&|c| c.source = Some(SourceSpec::Builtin(Builtin::Plane))).is_ok());
        assert!(with(&|c| {
            c.source = Some(SourceSpec::Builtin(Builtin::Plane));
            c.tau = Some(0.5);
        })
        .is_err());
        let nil = with(&|c| c.source = Some(SourceSpec::Builtin(Builtin::VerticalPlane))).unwrap();
        assert_eq!(nil.ambient, Ambient::Nil3 { tau: DEFAULT_TAU });
        assert!(with(&|c| {
            c.source = Some(SourceSpec::Builtin(Builtin::CliffordTorus));
            c.ambient = Some(AmbientTag::R3);
        })
        .is_err());
        let json = r#"{"verb": "gen", "source": {"builtin": "sphere"}, "h": 0.1, "tolerances": {"dirac": 1.0}}"#;
        let cfg: JobConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.source, Some(SourceSpec::Builtin(Builtin::Sphere)));
        assert!(serde_json::from_str::<JobConfig>(r#"{"verbb": "gen"}"#).is_err());
    }

    #[test]
    fn flags_override_config() {
        let dir = tmp("flags");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("job.json");
        fs::write(&path, r#"{"verb": "verify", "source": {"builtin": "plane"}, "h": 0.1}"#).unwrap();
        let args = Args::parse_from(["spinorsurf", "--config", path.to_str().unwrap(), "--h", "0.2", "--builtin", "enneper"]);
        let cfg = args.into_config().unwrap();
        assert_eq!(cfg.h, Some(0.2));
        assert_eq!(cfg.verb, Some(Verb::Verify));
        assert_eq!(cfg.source, Some(SourceSpec::Builtin(Builtin::Enneper)));
        let args = Args::parse_from(["spinorsurf", "gen", "--domain", "-2,2,-1,1", "--expr", "psi1=1", "--expr", "psi2=z"]);
        let cfg = args.into_config().unwrap();
        assert_eq!(cfg.domain, Some([-2.0, 2.0, -1.0, 1.0]));
        assert!(matches!(cfg.source, Some(SourceSpec::Expr(ref m)) if m.len() == 2));
        let args = Args::parse_from(["spinorsurf", "gen", "--domain", "-2,2,-1"]);
        assert!(args.into_config().is_err());
    }

    #[test]
    fn errors_are_reported_as_json() {
        let e = Error::InvalidInput("bad".into());
        let v: serde_json::Value = serde_json::from_str(&error_json(&e)).unwrap();
        assert_eq!(v["error"]["kind"], "invalid_input");
    }

    #[test]
    fn thresholds_scale_and_override() {
        let dir = tmp("tol");
        let mut j = job(Verb::Verify, SourceSpec::Builtin(Builtin::Plane), 0.1, &dir);
        j.tol_scale = 2.0;
        j.tolerances.insert("dirac".into(), 0.5);
        let c = Checks { job: &j, h: 0.1, entries: Vec::new() };
        assert_eq!(c.threshold("dirac", Rule::Order2), Some(0.5));
        assert!((c.threshold("x", Rule::Order2).unwrap() - 2.0 * ORDER2_CONST * 0.01).abs() < 1e-15);
        assert_eq!(c.threshold("x", Rule::Info), None);
    }
}
