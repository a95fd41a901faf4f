//! Parameter sweeps over two twist coefficients on a single triangulation.

use crate::CliError;
use knotcert::certify::{certify_filled, prepare_complement, PipelineOptions};
use knotcert::cover::{assemble_base, assemble_cover, AxisPresentation};
use knotcert::diagram::{ComponentRole, FramedLink, FramedLinkJson, Slope};
use knotcert::tangle::{double, ArcRole, Tangle};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// `link` is a framed link used as is.
    #[default]
    Link,
    /// `axis` is an axis presentation; sweep its base link.
    Base,
    /// `axis` is an axis presentation; sweep its double branched cover.
    Cover,
    /// `tangle` is doubled first.
    Double,
}

/// How a parameter value `n` becomes a filling slope.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeForm {
    /// `(1, n)`, a twist circle with coefficient `1/n`.
    #[default]
    Reciprocal,
    /// `(n, 1)`, integral surgery.
    Integral,
}

impl SlopeForm {
    fn slope(self, n: i64) -> Result<Slope, CliError> {
        let s = match self {
            SlopeForm::Reciprocal => Slope::new(1, n),
            SlopeForm::Integral => Slope::new(n, 1),
        };
        Ok(s?)
    }
}

/// A sweep description. `slots` names one arc label per parameter: on the
/// link itself in `link` mode, on the cut tangle or tangle otherwise. With a
/// single slot the grid runs over `n` alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub mode: GridMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<FramedLinkJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangle: Option<Tangle>,
    pub slots: Vec<u32>,
    #[serde(default)]
    pub slope_form: SlopeForm,
    pub n: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub n: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    pub certified: bool,
    pub verdict: String,
    /// Volume enclosure as `[lo, hi]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
    pub certified: usize,
    /// Smallest `N` such that every tested cell with all parameters above
    /// `N` in absolute value certified; `None` when nothing failed.
    pub n_star: Option<i64>,
    pub tetrahedra: usize,
}

impl GridReport {
    pub fn table(&self) -> String {
        let mut out = String::from("n\tm\tverdict\tvolume\n");
        for c in &self.cells {
            let m = c.m.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
            let v = c.volume.map(|[lo, hi]| format!("[{lo:.12}, {hi:.12}]")).unwrap_or_else(|| "-".into());
            let verdict = if c.certified { "certified" } else { c.verdict.as_str() };
            out.push_str(&format!("{}\t{m}\t{verdict}\t{v}\n", c.n));
        }
        let n_star = self.n_star.map(|n| n.to_string()).unwrap_or_else(|| "none".into());
        out.push_str(&format!("# {}/{} certified, N* = {n_star}\n", self.certified, self.cells.len()));
        out
    }
}

/// Placeholder coefficient marking slot `k` until the link is assembled.
/// Even, so it survives the lifting rule as `(1, K)`.
fn sentinel(k: usize) -> Slope {
    Slope::new(1, 2 * (1_000_001 + 2 * k as i64)).expect("coprime")
}

fn sentinel_slot(role: ComponentRole) -> Option<(usize, bool)> {
    let s = role.slope()?;
    if s.p.abs() != 1 {
        return None;
    }
    (0..2).find(|&k| s.q == sentinel(k).q || s.q == sentinel(k).q / 2).map(|k| (k, s.p < 0))
}

/// A parameter component: `(component, slot, mirrored)`.
type Parameter = (usize, usize, bool);

/// The link to sweep, with each parameter component located. Slot
/// components become cusps.
fn parameter_link(spec: &GridSpec) -> Result<(FramedLink, Vec<Parameter>), CliError> {
    let bad = |s: &str| CliError::Input(s.to_string());
    let mark = |roles: &mut std::collections::BTreeMap<u32, ArcRole>| {
        for (k, &l) in spec.slots.iter().enumerate() {
            roles.insert(l, ArcRole::Filled { slope: sentinel(k) });
        }
    };
    let mut fl = match spec.mode {
        GridMode::Link => {
            let raw = spec.link.clone().ok_or_else(|| bad("grid mode link needs a `link`"))?;
            let text = serde_json::to_string(&raw).map_err(|e| bad(&e.to_string()))?;
            let mut fl = FramedLink::from_json_str(&text)?;
            for (k, &l) in spec.slots.iter().enumerate() {
                if !fl.diagram.crossings().iter().flatten().any(|&x| x == l) {
                    return Err(CliError::Input(format!("slot label {l} is not an arc of the link")));
                }
                let c = fl.diagram.component_of_arc(l);
                fl.roles[c] = ComponentRole::Filled { slope: sentinel(k) };
            }
            fl
        }
        GridMode::Base | GridMode::Cover => {
            let raw = spec.axis.clone().ok_or_else(|| bad("grid modes base and cover need an `axis`"))?;
            let mut a = AxisPresentation::from_json_str(&raw.to_string())?;
            a.twist_circles.retain(|d| !spec.slots.contains(&d.component));
            mark(&mut a.cut_tangle.arc_roles);
            let a = AxisPresentation::new(a.cut_tangle, a.matching, a.twist_circles)?;
            if spec.mode == GridMode::Base {
                assemble_base(&a)?
            } else {
                assemble_cover(&a, false)?
            }
        }
        GridMode::Double => {
            let mut t = spec.tangle.clone().ok_or_else(|| bad("grid mode double needs a `tangle`"))?;
            mark(&mut t.arc_roles);
            double(&t)?
        }
    };
    let mut slots = Vec::new();
    for c in 0..fl.roles.len() {
        if let Some((k, mirrored)) = sentinel_slot(fl.roles[c]) {
            if c >= fl.diagram.num_knotted_components() {
                return Err(CliError::Input(format!("parameter slot {k} is a split unknot")));
            }
            slots.push((c, k, mirrored));
            fl.roles[c] = ComponentRole::Cusp;
        }
    }
    for k in 0..spec.slots.len() {
        if !slots.iter().any(|s| s.1 == k) {
            return Err(CliError::Input(format!("parameter slot {k} did not survive assembly")));
        }
    }
    Ok((fl, slots))
}

fn range(r: [i64; 2]) -> Vec<i64> {
    (r[0]..=r[1]).collect()
}

/// Runs every cell on a pool of `jobs` workers. Cells come back in `(n, m)`
/// order whatever order they finish in.
pub fn run_grid(spec: &GridSpec, opts: &PipelineOptions, jobs: usize) -> Result<GridReport, CliError> {
    if spec.slots.is_empty() || spec.slots.len() > 2 {
        return Err(CliError::Input("a grid needs one or two parameter slots".into()));
    }
    if spec.slots.len() == 2 && spec.m.is_none() {
        return Err(CliError::Input("two slots need an `m` range".into()));
    }
    let ns = range(spec.n);
    let ms: Vec<Option<i64>> = match (spec.slots.len(), spec.m) {
        (2, Some(m)) => range(m).into_iter().map(Some).collect(),
        _ => vec![None],
    };
    if ns.is_empty() || ms.is_empty() {
        return Err(CliError::Input("empty parameter range".into()));
    }
    let (fl, slots) = parameter_link(spec)?;
    let prepared =
        prepare_complement(&fl, opts).map_err(|run| CliError::Input(format!("{:?}", run.certificate.verdict)))?;
    let cells: Vec<(i64, Option<i64>)> = ns.iter().flat_map(|&n| ms.iter().map(move |&m| (n, m))).collect();
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| CliError::Input(e.to_string()))?;
    let results: Vec<Result<GridCell, CliError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, m)| {
                let mut fillings = prepared.fillings.clone();
                for &(c, k, mirrored) in &slots {
                    let value = if k == 0 { n } else { m.expect("second range") };
                    let s = spec.slope_form.slope(value)?;
                    fillings[c] = Some(if mirrored { s.negate() } else { s });
                }
                let cert = certify_filled(&prepared.triangulation, &fillings, opts).certificate;
                Ok(GridCell {
                    n,
                    m,
                    certified: cert.is_certified(),
                    verdict: match &cert.verdict {
                        knotcert::Verdict::CertifiedHyperbolic => "certified_hyperbolic".into(),
                        knotcert::Verdict::NotCertified(r) => r.clone(),
                    },
                    volume: cert.volume.map(|v| [v.lo, v.hi]),
                })
            })
            .collect()
    });
    let cells = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let n_star = cells.iter().filter(|c| !c.certified).map(|c| c.m.map_or(c.n.abs(), |m| c.n.abs().min(m.abs()))).max();
    Ok(GridReport {
        certified: cells.iter().filter(|c| c.certified).count(),
        n_star,
        tetrahedra: prepared.triangulation.num_tetrahedra(),
        cells,
    })
}
