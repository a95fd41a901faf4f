//! Rigorous verification of shape solutions with the Krawczyk test, and
//! certified volumes.
//!
//! For a square system `F(z) = 0`, a box `X`, a point `y` in it and any
//! matrix `Y`, the Krawczyk image `K(X) = y - Y F(y) + (I - Y J(X))(X - y)`
//! lying in the interior of `X` proves that `X` holds exactly one zero of
//! `F` and that it lies in `K(X)`. With every shape box in the upper half
//! plane that zero is a geometric solution.

use crate::diagram::{ComponentRole, FramedLink, LinkDiagram, Slope};
use crate::dilog::bloch_wigner;
use crate::gluing::{
    build_system, invert, newton_continuation, newton_solve_with, select_square_system, Complex, GluingSystem,
    NewtonOptions, ShapeAssignment,
};
use crate::interval::{CInterval, Interval};
use crate::triangulate::{octahedral_triangulation, randomize, simplify, IdealTriangulation, SimplifyOptions};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("shape box {0} meets the real axis or a branch cut")]
    BranchCut(usize),
    #[error("system is not square")]
    NotSquare,
    #[error("{boxes} boxes for {n} shapes")]
    Length { boxes: usize, n: usize },
    #[error("shape box {index} has width {width:e}, too wide for the volume series")]
    TooWide { index: usize, width: f64 },
    #[error("dilogarithm series failed to converge on box {0}")]
    Series(usize),
}

pub const DEFAULT_RADIUS: f64 = 1e-10;
pub const MAX_RADIUS: f64 = 1e-6;
const MAX_VOLUME_BOX: f64 = 1e-2;

/// Enclosures of every row's defect
/// `sum a log z + b log(1 - z) - (c + flattening) pi i` over `boxes`.
pub fn interval_eval(
    g: &GluingSystem,
    boxes: &[CInterval],
    flattenings: &[i64],
) -> Result<Vec<CInterval>, CertifyError> {
    if boxes.len() != g.n {
        return Err(CertifyError::Length { boxes: boxes.len(), n: g.n });
    }
    let mut logs = Vec::with_capacity(g.n);
    for (j, z) in boxes.iter().enumerate() {
        // off the real axis both logarithms stay away from their cuts
        if z.im.contains_zero() {
            return Err(CertifyError::BranchCut(j));
        }
        let lz = z.ln().ok_or(CertifyError::BranchCut(j))?;
        let l1 = (CInterval::ONE - *z).ln().ok_or(CertifyError::BranchCut(j))?;
        logs.push((lz, l1));
    }
    let pi = Interval::pi();
    Ok(g.rows
        .iter()
        .zip(flattenings)
        .map(|(r, f)| {
            let mut s = CInterval::new(Interval::ZERO, -(pi * Interval::from_i128((r.c + f) as i128)));
            for j in 0..g.n {
                if r.a[j] != 0 {
                    s = s + logs[j].0.scale(Interval::from_i128(r.a[j] as i128));
                }
                if r.b[j] != 0 {
                    s = s + logs[j].1.scale(Interval::from_i128(r.b[j] as i128));
                }
            }
            s
        })
        .collect())
}

/// Interval Jacobian `a / z - b / (1 - z)` over `boxes`.
fn interval_jacobian(g: &GluingSystem, boxes: &[CInterval]) -> Vec<Vec<CInterval>> {
    let inv_z: Vec<CInterval> = boxes.iter().map(|z| z.recip()).collect();
    let inv_1z: Vec<CInterval> = boxes.iter().map(|z| (CInterval::ONE - *z).recip()).collect();
    g.rows
        .iter()
        .map(|r| {
            (0..g.n)
                .map(|j| {
                    inv_z[j].scale(Interval::from_i128(r.a[j] as i128))
                        - inv_1z[j].scale(Interval::from_i128(r.b[j] as i128))
                })
                .collect()
        })
        .collect()
}

fn cpoint(z: Complex) -> CInterval {
    CInterval::point(z.re, z.im)
}

/// Outcome of one Krawczyk test.
#[derive(Debug, Clone)]
pub struct Krawczyk {
    pub contained: bool,
    pub image: Vec<CInterval>,
}

/// Computes `K(X)` for `X = center +- radius` and tests containment.
pub fn krawczyk_step(g: &GluingSystem, center: &[Complex], radius: f64) -> Result<Krawczyk, CertifyError> {
    if !g.is_square() {
        return Err(CertifyError::NotSquare);
    }
    let n = g.n;
    let targets: Vec<i64> = g.rows.iter().map(|r| r.branch).collect();
    let x: Vec<CInterval> = center.iter().map(|z| CInterval::around(z.re, z.im, radius)).collect();
    let y: Vec<CInterval> = center.iter().map(|&z| cpoint(z)).collect();
    let fy = interval_eval(g, &y, &targets)?;
    let jx = interval_jacobian(g, &x);
    let yinv = invert(&g.jacobian(center)).ok_or(CertifyError::NotSquare)?;
    let yi: Vec<Vec<CInterval>> = yinv.iter().map(|row| row.iter().map(|&v| cpoint(v)).collect()).collect();
    let dx: Vec<CInterval> = x.iter().zip(&y).map(|(a, b)| *a - *b).collect();
    let mut image = Vec::with_capacity(n);
    for i in 0..n {
        let mut yf = CInterval::ZERO;
        for k in 0..n {
            yf = yf + yi[i][k] * fy[k];
        }
        let mut acc = CInterval::ZERO;
        for j in 0..n {
            // (I - Y J(X))_{ij}
            let mut m = if i == j { CInterval::ONE } else { CInterval::ZERO };
            for k in 0..n {
                m = m - yi[i][k] * jx[k][j];
            }
            acc = acc + m * dx[j];
        }
        image.push(y[i] - yf + acc);
    }
    let contained = image.iter().zip(&x).all(|(k, b)| k.interior_of(b));
    Ok(Krawczyk { contained, image })
}

/// Volume enclosure `sum D(z_j)` of certified shape boxes.
pub fn certified_volume(boxes: &[CInterval]) -> Result<Interval, CertifyError> {
    let mut total = Interval::ZERO;
    for (index, z) in boxes.iter().enumerate() {
        let width = z.width();
        if width > MAX_VOLUME_BOX {
            return Err(CertifyError::TooWide { index, width });
        }
        if z.im.lo <= 0.0 {
            return Err(CertifyError::BranchCut(index));
        }
        total = total + bloch_wigner(*z).ok_or(CertifyError::Series(index))?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedHyperbolic,
    NotCertified(String),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedHyperbolic)
    }
}

/// Run parameters recorded alongside a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateMeta {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// Radius of the Krawczyk box that certified, if any.
    #[serde(with = "hex_opt")]
    pub radius: Option<f64>,
    pub newton_tolerance: f64,
    /// Center of the Krawczyk box.
    #[serde(with = "hex_points")]
    pub center: Vec<Complex>,
    pub tetrahedra: usize,
    pub cusps: usize,
    /// Pipeline stage that failed, for uncertified results.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    #[serde(with = "hex_boxes")]
    pub shapes: Vec<CInterval>,
    #[serde(with = "hex_interval_opt")]
    pub volume: Option<Interval>,
    pub flattenings: Vec<i64>,
    pub system_hash: String,
    pub meta: CertificateMeta,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict.is_certified()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    fn failed(stage: &str, reason: String, meta: CertificateMeta, hash: String) -> Certificate {
        Certificate {
            verdict: Verdict::NotCertified(format!("{stage}: {reason}")),
            shapes: Vec::new(),
            volume: None,
            flattenings: Vec::new(),
            system_hash: hash,
            meta: CertificateMeta { stage: Some(stage.to_string()), ..meta },
        }
    }
}

fn base_meta(seed: u64) -> CertificateMeta {
    CertificateMeta {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        radius: None,
        newton_tolerance: NewtonOptions::default().tolerance,
        center: Vec::new(),
        tetrahedra: 0,
        cusps: 0,
        stage: None,
    }
}

/// Krawczyk certification of `center` with radius escalation from `radius`
/// by factors of ten up to [`MAX_RADIUS`].
pub fn krawczyk_certify(g: &GluingSystem, center: &ShapeAssignment, radius: f64) -> Certificate {
    let mut meta = base_meta(0);
    meta.center = center.z.clone();
    meta.tetrahedra = g.n;
    meta.cusps = g.num_cusps;
    let hash = g.hash();
    if !g.is_square() {
        return Certificate::failed("krawczyk", "system is not square".into(), meta, hash);
    }
    if center.z.iter().any(|z| z.im <= 0.0) {
        return Certificate::failed("krawczyk", "NonGeometric: center has a shape with Im z <= 0".into(), meta, hash);
    }
    let mut r = radius;
    let mut last = String::from("containment failed");
    while r <= MAX_RADIUS * (1.0 + 1e-9) {
        match krawczyk_step(g, &center.z, r) {
            Ok(k) if k.contained => {
                if let Some(j) = k.image.iter().position(|b| b.im.lo <= 0.0) {
                    return Certificate::failed(
                        "krawczyk",
                        format!("NonGeometric: box {j} meets Im z <= 0"),
                        meta,
                        hash,
                    );
                }
                meta.radius = Some(r);
                let flattenings = g.rows.iter().map(|row| row.branch).collect();
                let (verdict, volume) = match certified_volume(&k.image) {
                    Ok(v) => (Verdict::CertifiedHyperbolic, Some(v)),
                    Err(e) => (Verdict::NotCertified(format!("volume: {e}")), None),
                };
                return Certificate { verdict, shapes: k.image, volume, flattenings, system_hash: hash, meta };
            }
            Ok(_) => last = format!("K(X) not inside X at radius {r:e}"),
            Err(e) => last = e.to_string(),
        }
        r *= 10.0;
    }
    Certificate::failed("krawczyk", last, meta, hash)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReverifyError {
    #[error("certificate does not claim hyperbolicity")]
    NotClaimed,
    #[error("certificate has {got} shape boxes, system has {n} unknowns")]
    Shape { got: usize, n: usize },
    #[error("shape box {0} does not lie in the upper half plane")]
    NonGeometric(usize),
    #[error("flattening of row {0} does not match the system")]
    Flattening(usize),
    #[error("defect of row {0} does not contain zero")]
    Defect(usize),
    #[error("Krawczyk containment failed on the recorded box")]
    Containment,
    #[error("recorded shapes do not contain the recomputed Krawczyk image")]
    ShapeMismatch,
    #[error("claimed volume does not contain the recomputed enclosure")]
    Volume,
    #[error("system hash mismatch")]
    Hash,
    #[error(transparent)]
    Interval(#[from] CertifyError),
}

/// Re-checks a certificate against a system without running Newton: the
/// recorded boxes must be geometric, have defects containing zero with the
/// recorded flattenings, and Krawczyk containment must hold again at the
/// recorded center and radius. The hash is compared last.
pub fn reverify(cert: &Certificate, g: &GluingSystem) -> Result<(), ReverifyError> {
    if !cert.is_certified() {
        return Err(ReverifyError::NotClaimed);
    }
    if cert.shapes.len() != g.n || cert.meta.center.len() != g.n || cert.flattenings.len() != g.rows.len() {
        return Err(ReverifyError::Shape { got: cert.shapes.len(), n: g.n });
    }
    if let Some(j) = cert.shapes.iter().position(|b| b.im.lo <= 0.0) {
        return Err(ReverifyError::NonGeometric(j));
    }
    if let Some(r) = g.rows.iter().zip(&cert.flattenings).position(|(row, f)| row.branch != *f) {
        return Err(ReverifyError::Flattening(r));
    }
    let defects = interval_eval(g, &cert.shapes, &cert.flattenings)?;
    if let Some(r) = defects.iter().position(|d| !d.contains(0.0, 0.0)) {
        return Err(ReverifyError::Defect(r));
    }
    let radius = cert.meta.radius.ok_or(ReverifyError::Containment)?;
    let k = krawczyk_step(g, &cert.meta.center, radius)?;
    if !k.contained {
        return Err(ReverifyError::Containment);
    }
    let inside = |a: &CInterval, b: &CInterval| a.re.subset_of(&b.re) && a.im.subset_of(&b.im);
    if !k.image.iter().zip(&cert.shapes).all(|(a, b)| inside(a, b)) {
        return Err(ReverifyError::ShapeMismatch);
    }
    let v = certified_volume(&cert.shapes)?;
    match cert.volume {
        Some(claim) if v.subset_of(&claim) => {}
        _ => return Err(ReverifyError::Volume),
    }
    if cert.system_hash != g.hash() {
        return Err(ReverifyError::Hash);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub seed: u64,
    pub radius: f64,
    pub max_tets: Option<usize>,
    pub max_moves: usize,
    /// Fresh triangulations to try when the solve on the first one fails.
    pub retriangulations: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { seed: 0, radius: DEFAULT_RADIUS, max_tets: None, max_moves: 10_000, retriangulations: 24 }
    }
}

/// Everything produced by a pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub certificate: Certificate,
    pub triangulation: Option<IdealTriangulation>,
    pub system: Option<GluingSystem>,
    pub shapes: Option<ShapeAssignment>,
}

/// Fillings per knotted component, after dropping split unknots whose
/// filling is trivial. Fails on any other crossingless component.
fn prepare(fl: &FramedLink) -> Result<(LinkDiagram, Vec<Option<Slope>>), String> {
    let d = &fl.diagram;
    let k = d.num_knotted_components();
    for (i, role) in fl.roles.iter().enumerate().skip(k) {
        let trivial = matches!(role, ComponentRole::Filled { slope } | ComponentRole::TwistCircle { slope } if slope.is_meridian());
        if !trivial {
            return Err(format!("component {i} has no crossings and is not trivially filled"));
        }
    }
    let diagram = LinkDiagram::new(d.crossings().to_vec(), 0).map_err(|e| e.to_string())?;
    let fillings = fl.roles[..k]
        .iter()
        .map(|r| match r {
            ComponentRole::Filled { slope } | ComponentRole::TwistCircle { slope } => Some(*slope),
            ComponentRole::Cusp | ComponentRole::CoCore | ComponentRole::BranchLocus => None,
        })
        .collect();
    Ok((diagram, fillings))
}

/// A simplified triangulation of a link complement, ready to be filled.
#[derive(Debug, Clone)]
pub struct PreparedComplement {
    pub triangulation: IdealTriangulation,
    /// Filling per cusp as read from the component roles.
    pub fillings: Vec<Option<Slope>>,
}

/// Triangulates and simplifies the complement of `fl`. On failure returns
/// the uncertified run describing the stage that failed.
pub fn prepare_complement(fl: &FramedLink, opts: &PipelineOptions) -> Result<PreparedComplement, Box<PipelineRun>> {
    let meta = base_meta(opts.seed);
    let fail = |stage: &str, reason: String, meta: CertificateMeta, tri: Option<IdealTriangulation>| {
        Box::new(PipelineRun {
            certificate: Certificate::failed(stage, reason, meta, String::new()),
            triangulation: tri,
            system: None,
            shapes: None,
        })
    };
    let (diagram, fillings) = prepare(fl).map_err(|e| fail("diagram", e, meta.clone(), None))?;
    let tri = octahedral_triangulation(&diagram).map_err(|e| fail("triangulate", e.to_string(), meta.clone(), None))?;
    let tri = simplify(&tri, &SimplifyOptions { seed: opts.seed, max_moves: opts.max_moves, ..Default::default() });
    if let Some(cap) = opts.max_tets {
        if tri.num_tetrahedra() > cap {
            let reason = format!("{} tetrahedra exceed the cap of {cap}", tri.num_tetrahedra());
            let meta = CertificateMeta { tetrahedra: tri.num_tetrahedra(), cusps: tri.num_cusps(), ..meta };
            return Err(fail("triangulate", reason, meta, Some(tri)));
        }
    }
    Ok(PreparedComplement { triangulation: tri, fillings })
}

/// Builds and solves the filled gluing system on a prepared triangulation,
/// certifies the solution and encloses the volume. If that fails, retries on
/// randomized retriangulations, since a filled structure may have no
/// positively oriented solution on a particular triangulation.
pub fn certify_filled(tri: &IdealTriangulation, fillings: &[Option<Slope>], opts: &PipelineOptions) -> PipelineRun {
    let first = certify_on(tri, fillings, opts);
    if first.certificate.is_certified() {
        return first;
    }
    for i in 1..=opts.retriangulations as u64 {
        let seed = opts.seed.wrapping_add(i);
        let shaken = randomize(tri, seed, 2 * tri.num_tetrahedra());
        let simple = SimplifyOptions { seed, max_moves: opts.max_moves, ..Default::default() };
        let run = certify_on(&simplify(&shaken, &simple), fillings, opts);
        if run.certificate.is_certified() {
            return run;
        }
    }
    first
}

fn certify_on(tri: &IdealTriangulation, fillings: &[Option<Slope>], opts: &PipelineOptions) -> PipelineRun {
    let meta = CertificateMeta { tetrahedra: tri.num_tetrahedra(), cusps: tri.num_cusps(), ..base_meta(opts.seed) };
    let system = match build_system(tri, fillings).and_then(|g| select_square_system(&g)) {
        Ok(g) => g,
        Err(e) => {
            return PipelineRun {
                certificate: Certificate::failed("gluing", e.to_string(), meta, String::new()),
                triangulation: Some(tri.clone()),
                system: None,
                shapes: None,
            }
        }
    };
    let newton = NewtonOptions { seed: opts.seed, ..Default::default() };
    let direct = newton_solve_with(&system, None, &newton);
    let shapes = match direct.or_else(|e| continue_from_complete(tri, fillings, &system, &newton).ok_or(e)) {
        Ok(s) => s,
        Err(e) => {
            return PipelineRun {
                certificate: Certificate::failed(
                    "newton",
                    format!("NonGeometric: no shape solution with Im z > 0 was found ({e})"),
                    meta,
                    system.hash(),
                ),
                triangulation: Some(tri.clone()),
                system: Some(system),
                shapes: None,
            }
        }
    };
    let mut cert = krawczyk_certify(&system, &shapes, opts.radius);
    cert.meta = CertificateMeta {
        radius: cert.meta.radius,
        center: cert.meta.center.clone(),
        stage: cert.meta.stage.clone(),
        ..meta
    };
    PipelineRun { certificate: cert, triangulation: Some(tri.clone()), system: Some(system), shapes: Some(shapes) }
}

/// Solves the unfilled complete structure and deforms it into the filled
/// one. Used when Newton from the regular shapes fails.
fn continue_from_complete(
    tri: &IdealTriangulation,
    fillings: &[Option<Slope>],
    system: &GluingSystem,
    opts: &NewtonOptions,
) -> Option<ShapeAssignment> {
    if fillings.iter().all(Option::is_none) {
        return None;
    }
    let complete = build_system(tri, &vec![None; fillings.len()]).and_then(|g| select_square_system(&g)).ok()?;
    let start = newton_solve_with(&complete, None, opts).ok()?;
    newton_continuation(system, &start.z, opts).ok()
}

/// triangulate, simplify, build and solve the filled system, certify, and
/// enclose the volume. Failures become `NotCertified` with the stage name.
pub fn run_pipeline(fl: &FramedLink, opts: &PipelineOptions) -> PipelineRun {
    match prepare_complement(fl, opts) {
        Ok(p) => certify_filled(&p.triangulation, &p.fillings, opts),
        Err(run) => *run,
    }
}

pub fn certify_pipeline(fl: &FramedLink, opts: &PipelineOptions) -> Certificate {
    run_pipeline(fl, opts).certificate
}

/// Exact hexadecimal rendering of an `f64`, e.g. `0x1.8p+1` for 3.
pub fn to_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x == 0.0 {
        return format!("{sign}0x0p+0");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e:+}")
    }
}

pub fn from_hex(s: &str) -> Result<f64, String> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => hexf_parse::parse_hexf64(s, false).map_err(|e| format!("{s}: {e}")),
    }
}

fn interval_to_hex(i: &Interval) -> [String; 2] {
    [to_hex(i.lo), to_hex(i.hi)]
}

fn interval_from_hex(v: &[String; 2]) -> Result<Interval, String> {
    let (lo, hi) = (from_hex(&v[0])?, from_hex(&v[1])?);
    // NaN bounds must be rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(lo <= hi) {
        return Err(format!("empty interval [{lo}, {hi}]"));
    }
    Ok(Interval::new(lo, hi))
}

#[derive(Serialize, Deserialize)]
struct HexBox {
    re: [String; 2],
    im: [String; 2],
}

mod hex_boxes {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[CInterval], s: S) -> Result<S::Ok, S::Error> {
        let boxes: Vec<HexBox> =
            v.iter().map(|b| HexBox { re: interval_to_hex(&b.re), im: interval_to_hex(&b.im) }).collect();
        boxes.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CInterval>, D::Error> {
        let boxes = Vec::<HexBox>::deserialize(d)?;
        boxes
            .iter()
            .map(|b| Ok(CInterval::new(interval_from_hex(&b.re)?, interval_from_hex(&b.im)?)))
            .collect::<Result<_, String>>()
            .map_err(serde::de::Error::custom)
    }
}

mod hex_interval_opt {
    use super::*;
    pub fn serialize<S: Serializer>(v: &Option<Interval>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(interval_to_hex).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Interval>, D::Error> {
        Option::<[String; 2]>::deserialize(d)?
            .map(|v| interval_from_hex(&v))
            .transpose()
            .map_err(serde::de::Error::custom)
    }
}

mod hex_opt {
    use super::*;
    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_hex).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<String>::deserialize(d)?.map(|x| from_hex(&x)).transpose().map_err(serde::de::Error::custom)
    }
}

mod hex_points {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[Complex], s: S) -> Result<S::Ok, S::Error> {
        let pts: Vec<[String; 2]> = v.iter().map(|z| [to_hex(z.re), to_hex(z.im)]).collect();
        pts.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex>, D::Error> {
        Vec::<[String; 2]>::deserialize(d)?
            .iter()
            .map(|p| Ok(Complex::new(from_hex(&p[0])?, from_hex(&p[1])?)))
            .collect::<Result<_, String>>()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";
    // high-precision reference values
    const FIG8_VOLUME: f64 = 2.029_883_212_819_307;
    const FIG8_5_1_VOLUME: f64 = 0.981_368_828_892_232_1;

    fn fig8(fill: Option<(i64, i64)>) -> FramedLink {
        let d = parse_pd(FIG8).unwrap();
        let role = match fill {
            None => ComponentRole::Cusp,
            Some((p, q)) => ComponentRole::Filled { slope: Slope::new(p, q).unwrap() },
        };
        FramedLink::new(d, vec![role]).unwrap()
    }

    #[test]
    fn hex_round_trip() {
        for x in [0.0, -0.0, 1.0, 3.0, 0.1, -2.5e-300, 5e-324, f64::MAX, std::f64::consts::PI] {
            let h = to_hex(x);
            assert_eq!(from_hex(&h).unwrap().to_bits(), x.to_bits(), "{h}");
        }
        assert_eq!(to_hex(3.0), "0x1.8p+1");
    }

    #[test]
    fn regular_point_has_zero_defect() {
        let run = run_pipeline(&fig8(None), &PipelineOptions::default());
        let g = run.system.unwrap();
        let im = Interval::point(3.0).sqrt() * Interval::point(0.5);
        let z = CInterval::new(Interval::point(0.5), im);
        let flats: Vec<i64> = g.rows.iter().map(|r| r.branch).collect();
        for d in interval_eval(&g, &vec![z; g.n], &flats).unwrap() {
            assert!(d.contains(0.0, 0.0));
            assert!(d.width() < 1e-14, "{}", d.width());
        }
        let bad = CInterval::around(0.5, 0.0, 1e-3);
        assert!(interval_eval(&g, &vec![bad; g.n], &flats).is_err());
    }

    #[test]
    fn figure_eight_certifies() {
        let run = run_pipeline(&fig8(None), &PipelineOptions::default());
        let c = &run.certificate;
        assert!(c.is_certified(), "{:?}", c.verdict);
        let v = c.volume.unwrap();
        assert!(v.contains(FIG8_VOLUME) && v.width() < 1e-8, "{v}");
        let back = Certificate::from_json(&c.to_json()).unwrap();
        assert_eq!(&back, c);
        reverify(&back, run.system.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn displaced_center_fails() {
        let run = run_pipeline(&fig8(None), &PipelineOptions::default());
        let g = run.system.unwrap();
        let s =
            ShapeAssignment { z: vec![Complex::new(0.6, 0.8); g.n], residual: 1.0, flattenings: vec![], iterations: 0 };
        assert!(!krawczyk_certify(&g, &s, 1e-6).is_certified());
        let s = ShapeAssignment { z: vec![Complex::new(0.6, -0.8); g.n], ..s };
        let c = krawczyk_certify(&g, &s, 1e-6);
        assert!(matches!(c.verdict, Verdict::NotCertified(ref r) if r.contains("NonGeometric")));
    }

    #[test]
    fn exceptional_and_generic_fillings() {
        let c = certify_pipeline(&fig8(Some((5, 1))), &PipelineOptions::default());
        assert!(c.volume.unwrap().contains(FIG8_5_1_VOLUME));
        assert!(!certify_pipeline(&fig8(Some((4, 1))), &PipelineOptions::default()).is_certified());
    }
}
