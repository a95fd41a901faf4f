//! Subcommand implementations behind the `knotcert` binary. Each command
//! reads its inputs from files, returns the text it would print, and reports
//! whether the run certified.

pub mod grid;

use knotcert::certify::{reverify, run_pipeline, Certificate, PipelineOptions, DEFAULT_RADIUS};
use knotcert::cover::{assemble_base, assemble_cover, cover_homology_crosscheck, AxisPresentation, CoverError};
use knotcert::diagram::{parse_pd, DiagramError, FramedLink, Slope};
use knotcert::gluing::{GluingError, GluingSystem};
use knotcert::tangle::{self, Tangle, TangleError};
use knotcert::triangulate::{octahedral_triangulation, simplify, SimplifyOptions, TriangulationError};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Tangle(#[from] TangleError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Gluing(#[from] GluingError),
}

/// Exit status of a successful command run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    NotCertified,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Done => 0,
            Status::NotCertified => 2,
        }
    }
}

/// What a command produced: the main output and a note for standard error.
#[derive(Debug, Clone)]
pub struct Output {
    pub text: String,
    pub note: Option<String>,
    pub status: Status,
}

impl Output {
    fn done(text: String) -> Self {
        Output { text, note: None, status: Status::Done }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Flags {
    pub seed: u64,
    pub jobs: usize,
    pub radius: f64,
    pub max_tets: Option<usize>,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { seed: 0, jobs: 1, radius: DEFAULT_RADIUS, max_tets: None }
    }
}

impl Flags {
    pub fn pipeline(&self) -> PipelineOptions {
        PipelineOptions { seed: self.seed, radius: self.radius, max_tets: self.max_tets, ..Default::default() }
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

/// A framed link from JSON, or the complement of a link given as PD text.
pub fn load_link(path: &Path) -> Result<FramedLink, CliError> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        Ok(FramedLink::from_json_str(&text)?)
    } else {
        Ok(FramedLink::complement(parse_pd(&text)?))
    }
}

pub fn load_tangle(path: &Path) -> Result<Tangle, CliError> {
    Ok(Tangle::from_json_str(&read(path)?)?)
}

pub fn load_axis(path: &Path) -> Result<AxisPresentation, CliError> {
    Ok(AxisPresentation::from_json_str(&read(path)?)?)
}

pub fn cmd_parse(input: &Path) -> Result<Output, CliError> {
    let fl = load_link(input)?;
    let d = &fl.diagram;
    let note = format!("{} crossings, {} components, writhe {}", d.num_crossings(), d.num_components(), d.writhe());
    Ok(Output { note: Some(note), ..Output::done(fl.to_json_string()) })
}

pub fn cmd_mirror(input: &Path) -> Result<Output, CliError> {
    Ok(Output::done(load_link(input)?.mirror().to_json_string()))
}

#[derive(Serialize)]
struct HomologyReport {
    free_rank: usize,
    torsion: Vec<i64>,
    /// 0 when infinite.
    order: i64,
}

pub fn cmd_homology(input: &Path) -> Result<Output, CliError> {
    let h = load_link(input)?.homology_of_surgery()?;
    Ok(Output::done(json(&HomologyReport { order: h.order(), free_rank: h.free_rank, torsion: h.torsion })))
}

/// Operations of the `tangle` subcommand.
#[derive(Debug, Clone)]
pub enum TangleOp {
    Rational { p: i64, q: i64 },
    Fraction { input: PathBuf },
    Fill { input: PathBuf, slot: String, with: PathBuf },
    Caps { input: PathBuf, pairs: Vec<(usize, usize)> },
    Closure { input: PathBuf },
}

pub fn cmd_tangle(op: &TangleOp) -> Result<Output, CliError> {
    let text = match op {
        TangleOp::Rational { p, q } => tangle::rational_tangle(Slope::new(*p, *q)?).to_json_string(),
        TangleOp::Fraction { input } => {
            let s = tangle::fraction(&load_tangle(input)?)?;
            json(&serde_json::json!({ "p": s.p, "q": s.q }))
        }
        TangleOp::Fill { input, slot, with } => {
            tangle::fill_slot(&load_tangle(input)?, slot, &load_tangle(with)?)?.to_json_string()
        }
        TangleOp::Caps { input, pairs } => tangle::attach_caps(&load_tangle(input)?, pairs)?.to_json_string(),
        TangleOp::Closure { input } => tangle::numerator_closure(&load_tangle(input)?)?.to_json_string(),
    };
    Ok(Output::done(text))
}

pub fn cmd_double(input: &Path) -> Result<Output, CliError> {
    Ok(Output::done(tangle::double(&load_tangle(input)?)?.to_json_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMode {
    Base,
    Cover { keep_axis: bool },
    Crosscheck,
}

pub fn cmd_cover(input: &Path, mode: CoverMode) -> Result<Output, CliError> {
    let a = load_axis(input)?;
    Ok(match mode {
        CoverMode::Base => Output::done(assemble_base(&a)?.to_json_string()),
        CoverMode::Cover { keep_axis } => Output::done(assemble_cover(&a, keep_axis)?.to_json_string()),
        CoverMode::Crosscheck => {
            let x = cover_homology_crosscheck(&a)?;
            let status = if x.consistent { Status::Done } else { Status::NotCertified };
            Output { text: json(&x), note: None, status }
        }
    })
}

pub fn cmd_triangulate(input: &Path, flags: &Flags) -> Result<Output, CliError> {
    let fl = load_link(input)?;
    let d = knotcert::diagram::LinkDiagram::new(fl.diagram.crossings().to_vec(), 0)?;
    let t = octahedral_triangulation(&d)?;
    let t = simplify(&t, &SimplifyOptions { seed: flags.seed, ..Default::default() });
    let note = format!("{} tetrahedra, {} cusps", t.num_tetrahedra(), t.num_cusps());
    Ok(Output { note: Some(note), ..Output::done(t.to_text()) })
}

/// Certifies a framed link. The gluing system is written to `system` when
/// given, for later re-verification.
pub fn cmd_certify(input: &Path, system: Option<&Path>, flags: &Flags) -> Result<Output, CliError> {
    let fl = load_link(input)?;
    let run = run_pipeline(&fl, &flags.pipeline());
    if let (Some(path), Some(g)) = (system, &run.system) {
        write(path, &g.to_json())?;
    }
    let cert = run.certificate;
    let (status, note) = match &cert.verdict {
        knotcert::Verdict::CertifiedHyperbolic => {
            let v = cert.volume.expect("certified runs carry a volume");
            (Status::Done, format!("certified hyperbolic, volume in [{:.12}, {:.12}]", v.lo, v.hi))
        }
        knotcert::Verdict::NotCertified(reason) => (Status::NotCertified, format!("not certified: {reason}")),
    };
    Ok(Output { text: cert.to_json(), note: Some(note), status })
}

pub fn cmd_reverify(certificate: &Path, system: &Path) -> Result<Output, CliError> {
    let cert = Certificate::from_json(&read(certificate)?).map_err(|e| CliError::Input(e.to_string()))?;
    let g = GluingSystem::from_json(&read(system)?)?;
    Ok(match reverify(&cert, &g) {
        Ok(()) => Output { text: "ok\n".into(), note: None, status: Status::Done },
        Err(e) => Output {
            text: String::new(),
            note: Some(format!("re-verification failed: {e}")),
            status: Status::NotCertified,
        },
    })
}

pub fn cmd_grid(spec: &Path, flags: &Flags) -> Result<Output, CliError> {
    let spec: grid::GridSpec = serde_json::from_str(&read(spec)?).map_err(|e| CliError::Input(e.to_string()))?;
    let report = grid::run_grid(&spec, &flags.pipeline(), flags.jobs)?;
    let status = if report.certified == report.cells.len() { Status::Done } else { Status::NotCertified };
    Ok(Output { text: json(&report), note: Some(report.table()), status })
}
