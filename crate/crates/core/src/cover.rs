//! Surgery descriptions around an unknotted branch axis, their double
//! branched covers, and Rolfsen twists that trade twist circles for
//! explicit full twists.
//!
//! Picture the axis perpendicular to the page through a point `O`, with the
//! content arranged in an annulus around `O` and cut open along a ray. The
//! cut tangle sits in a box above `O`: its left endpoints (listed top to
//! bottom) and right endpoints (listed bottom to top, continuing the
//! counterclockwise boundary order) are joined by concentric closure arcs
//! that pass below `O`. To draw the axis in the page it is laid along the
//! horizontal line through `O`, passing under everything on the left of `O`
//! and over everything on the right, so each closure arc crosses it twice.

use crate::diagram::{goeritz_determinant, ComponentRole, DiagramError, FramedLink, LinkDiagram, Slope};
use crate::tangle::{finish_framed, ArcRole, Merger, Tangle, TangleError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error(transparent)]
    Tangle(#[from] TangleError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("cut tangle has slots; fill them first")]
    OpenSlots,
    #[error("matching is not a bijection between left and right endpoints")]
    Matching,
    #[error("matching pairs left position {left} with right position {right}; closure arcs must not cross")]
    NonPlanarMatching { left: usize, right: usize },
    #[error("label {0} is not on the cut tangle")]
    UnknownLabel(u32),
    #[error("the branch axis is added by the closure and cannot appear in the cut tangle")]
    BranchInCutTangle,
    #[error("component through label {label} links the axis an odd number of times but has slope {slope}, not 1/2a")]
    NotLiftable { label: u32, slope: Slope },
    #[error(
        "twist circle through label {0} links the axis an odd number of times and needs declared enclosed strands"
    )]
    Undeclared(u32),
    #[error("twist circle {component} is not a thin loop: {reason}")]
    NotThin { component: usize, reason: &'static str },
    #[error("twist circle {component} encloses strands of another twist circle")]
    Threaded { component: usize },
    #[error("component {0} is filled but is not a twist circle")]
    NotTwist(usize),
    #[error("twist circle {component} encloses components {found:?}, declared {declared:?}")]
    EnclosedMismatch { component: usize, found: Vec<usize>, declared: Vec<usize> },
    #[error("no branch locus component")]
    NoBranch,
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// A twist circle of the cut tangle with the strands it encircles. The
/// axis is implicitly enclosed when the circle links it an odd number of
/// times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistDeclaration {
    /// Any arc label on the circle.
    pub component: u32,
    #[serde(default)]
    pub enclosed_strands: Vec<u32>,
    pub slope: Slope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisPresentation {
    pub cut_tangle: Tangle,
    /// `(left label, right label)` pairs joined around the axis.
    pub matching: Vec<(u32, u32)>,
    pub twist_circles: Vec<TwistDeclaration>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AxisJson {
    #[serde(default)]
    pd: Vec<[u32; 4]>,
    #[serde(default)]
    endpoints: Vec<u32>,
    #[serde(default)]
    arc_roles: BTreeMap<u32, ArcRole>,
    #[serde(default)]
    loops: Vec<u32>,
    #[serde(default)]
    matching: Vec<[u32; 2]>,
    #[serde(default)]
    twist_circles: Vec<TwistDeclaration>,
}

/// A closed component of the closure: its labels in the cut tangle and how
/// many times it passes the cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureComponent {
    pub labels: Vec<u32>,
    pub passes: usize,
    pub role: ComponentRole,
}

impl ClosureComponent {
    pub fn parity(&self) -> usize {
        self.passes % 2
    }
}

impl AxisPresentation {
    pub fn new(
        cut_tangle: Tangle,
        matching: Vec<(u32, u32)>,
        twist_circles: Vec<TwistDeclaration>,
    ) -> Result<Self, CoverError> {
        let a = AxisPresentation { cut_tangle, matching, twist_circles };
        a.components()?;
        Ok(a)
    }

    pub fn from_json_str(s: &str) -> Result<Self, CoverError> {
        let raw: AxisJson = serde_json::from_str(s).map_err(|e| CoverError::Json(e.to_string()))?;
        let t = Tangle::new(raw.pd, raw.endpoints, BTreeMap::new(), raw.arc_roles, raw.loops)?;
        AxisPresentation::new(t, raw.matching.into_iter().map(|[l, r]| (l, r)).collect(), raw.twist_circles)
    }

    pub fn to_json_string(&self) -> String {
        let t = &self.cut_tangle;
        let raw = AxisJson {
            pd: t.crossings.clone(),
            endpoints: t.endpoints.clone(),
            arc_roles: t.arc_roles.clone(),
            loops: t.loops.clone(),
            matching: self.matching.iter().map(|&(l, r)| [l, r]).collect(),
            twist_circles: self.twist_circles.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("serialisable")
    }

    /// Number of strands crossing the cut.
    pub fn width(&self) -> usize {
        self.cut_tangle.endpoints.len() / 2
    }

    fn left(&self, i: usize) -> u32 {
        self.cut_tangle.endpoints[i]
    }

    fn right(&self, i: usize) -> u32 {
        let t = &self.cut_tangle;
        t.endpoints[t.endpoints.len() - 1 - i]
    }

    fn check_matching(&self) -> Result<(), CoverError> {
        let n = self.width();
        if self.matching.len() != n {
            return Err(CoverError::Matching);
        }
        let mut left_used = BTreeSet::new();
        let mut right_used = BTreeSet::new();
        for &(l, r) in &self.matching {
            // the first unused position carrying the label, so a crossing-less
            // arc from left to right may name the same label twice
            let i = (0..n).find(|&i| self.left(i) == l && !left_used.contains(&i)).ok_or(CoverError::Matching)?;
            let j = (0..n).find(|&j| self.right(j) == r && !right_used.contains(&j)).ok_or(CoverError::Matching)?;
            left_used.insert(i);
            right_used.insert(j);
            if i != j {
                return Err(CoverError::NonPlanarMatching { left: i, right: j });
            }
        }
        Ok(())
    }

    /// Components of the closure with their pass counts and resolved roles.
    pub fn components(&self) -> Result<Vec<ClosureComponent>, CoverError> {
        let t = &self.cut_tangle;
        if !t.slots.is_empty() {
            return Err(CoverError::OpenSlots);
        }
        t.validate()?;
        self.check_matching()?;
        let n = self.width();
        let strands = t.trace();
        // strands meeting endpoint positions, joined through the closure
        let mut at_end = vec![usize::MAX; 2 * n];
        for (k, s) in strands.iter().enumerate() {
            if let Some((a, b)) = &s.ends {
                for e in [a, b] {
                    if let crate::tangle::StrandEnd::Boundary(p) = e {
                        at_end[*p] = k;
                    }
                }
            }
        }
        let mut m = Merger::default();
        for i in 0..n {
            m.union(at_end[i] as u32, at_end[2 * n - 1 - i] as u32);
        }
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for k in 0..strands.len() {
            groups.entry(m.find(k as u32)).or_default().push(k);
        }
        let declared: BTreeMap<u32, &TwistDeclaration> = self.twist_circles.iter().map(|d| (d.component, d)).collect();
        let all_labels: BTreeSet<u32> = strands.iter().flat_map(|s| s.labels.iter().copied()).collect();
        for d in &self.twist_circles {
            for l in std::iter::once(&d.component).chain(&d.enclosed_strands) {
                if !all_labels.contains(l) {
                    return Err(CoverError::UnknownLabel(*l));
                }
            }
        }
        let mut out = Vec::new();
        for members in groups.values() {
            let labels: Vec<u32> = members.iter().flat_map(|&k| strands[k].labels.iter().copied()).collect();
            let passes = (0..n).filter(|&i| members.contains(&at_end[i])).count();
            let mut role: Option<ComponentRole> = None;
            for l in &labels {
                let from_tag = t.arc_roles.get(l).map(|r| r.component_role());
                let from_decl = declared.get(l).map(|d| ComponentRole::TwistCircle { slope: d.slope });
                for r in [from_tag, from_decl].into_iter().flatten() {
                    match role {
                        Some(old) if old != r => return Err(TangleError::RoleConflict(*l).into()),
                        _ => role = Some(r),
                    }
                }
            }
            let role = role.unwrap_or(ComponentRole::Cusp);
            if role == ComponentRole::BranchLocus {
                return Err(CoverError::BranchInCutTangle);
            }
            if matches!(role, ComponentRole::TwistCircle { .. })
                && passes % 2 == 1
                && !labels.iter().any(|l| declared.contains_key(l))
            {
                return Err(CoverError::Undeclared(labels[0]));
            }
            out.push(ClosureComponent { labels, passes, role });
        }
        Ok(out)
    }
}

/// Crossings joining left endpoint `i` to right endpoint `i` around the
/// axis, for every `i`, with fresh labels from `next`. Returns the crossings
/// and the first axis label, or `None` when the axis is a loose loop.
fn closure_with_axis(left: &[u32], right: &[u32], next: &mut u32) -> (Vec<[u32; 4]>, Option<u32>) {
    let n = left.len();
    if n == 0 {
        return (Vec::new(), None);
    }
    let fresh = |next: &mut u32| {
        *next += 1;
        *next - 1
    };
    let arcs: Vec<u32> = (0..n).map(|_| fresh(next)).collect();
    let segments: Vec<u32> = (0..2 * n).map(|_| fresh(next)).collect();
    let mut out = Vec::with_capacity(2 * n);
    // along the axis from left to right: left crossings outermost first,
    // then right crossings innermost first
    for k in 0..2 * n {
        let west = segments[(k + 2 * n - 1) % (2 * n)];
        let east = segments[k];
        if k < n {
            let i = k;
            out.push([west, arcs[i], east, left[i]]);
        } else {
            let i = 2 * n - 1 - k;
            out.push([arcs[i], east, right[i], west]);
        }
    }
    (out, Some(segments[0]))
}

fn lifted(role: ComponentRole, parity: usize, label: u32) -> Result<ComponentRole, CoverError> {
    if parity == 0 {
        return Ok(role);
    }
    let halve = |slope: Slope| -> Result<Slope, CoverError> {
        if slope.is_meridian() {
            return Ok(slope);
        }
        if slope.p.abs() != 1 || slope.q % 2 != 0 {
            return Err(CoverError::NotLiftable { label, slope });
        }
        Ok(Slope::new(slope.p, slope.q / 2)?)
    };
    Ok(match role {
        ComponentRole::Filled { slope } => ComponentRole::Filled { slope: halve(slope)? },
        ComponentRole::TwistCircle { slope } => ComponentRole::TwistCircle { slope: halve(slope)? },
        r => r,
    })
}

/// The closure of the cut tangle with the axis as a branch locus component.
pub fn assemble_base(a: &AxisPresentation) -> Result<FramedLink, CoverError> {
    let comps = a.components()?;
    let t = &a.cut_tangle;
    let n = a.width();
    let left: Vec<u32> = (0..n).map(|i| a.left(i)).collect();
    let right: Vec<u32> = (0..n).map(|i| a.right(i)).collect();
    let mut next = t.max_label() + 1;
    let (extra, axis) = closure_with_axis(&left, &right, &mut next);
    let mut crossings = t.crossings.clone();
    crossings.extend(extra);
    let loop_labels: BTreeSet<u32> = t.loops.iter().copied().collect();
    let mut roles = BTreeMap::new();
    let mut loops = Vec::new();
    for c in &comps {
        if loop_labels.contains(&c.labels[0]) {
            loops.push(c.role);
        } else {
            roles.insert(c.labels[0], c.role);
        }
    }
    match axis {
        Some(l) => {
            roles.insert(l, ComponentRole::BranchLocus);
        }
        None => loops.push(ComponentRole::BranchLocus),
    }
    let known: BTreeSet<u32> = crossings.iter().flatten().copied().collect();
    Ok(finish_framed(&crossings, &roles, loops, &known, &mut Merger::default())?)
}

/// The double cover branched along the axis: two copies of the cut tangle
/// placed end to end and closed up. Components passing the cut an odd number
/// of times fuse into one lift with the coefficient halved; the rest lift
/// to two copies with the original role. The lifted axis is kept as a cusp
/// only when asked for.
pub fn assemble_cover(a: &AxisPresentation, keep_axis: bool) -> Result<FramedLink, CoverError> {
    let comps = a.components()?;
    let t = &a.cut_tangle;
    let n = a.width();
    let off = t.max_label() + 1;
    let second = t.shifted(off);
    let mut m = Merger::default();
    // right face of the first copy meets the left face of the second
    for i in 0..n {
        m.union(a.right(i), second.endpoints[i]);
    }
    let left: Vec<u32> = (0..n).map(|i| a.left(i)).collect();
    let right: Vec<u32> = (0..n).map(|i| second.endpoints[2 * n - 1 - i]).collect();
    let mut crossings = t.crossings.clone();
    crossings.extend(second.crossings.iter().copied());
    let mut next = 2 * off;
    let mut axis_role = None;
    if keep_axis {
        let (extra, axis) = closure_with_axis(&left, &right, &mut next);
        crossings.extend(extra);
        axis_role = Some(axis);
    } else {
        for i in 0..n {
            m.union(left[i], right[i]);
        }
    }
    let loop_labels: BTreeSet<u32> = t.loops.iter().copied().collect();
    let mut roles = BTreeMap::new();
    let mut loops = Vec::new();
    for c in &comps {
        let r = lifted(c.role, c.parity(), c.labels[0])?;
        if loop_labels.contains(&c.labels[0]) {
            loops.extend([r, r]);
        } else {
            roles.insert(c.labels[0], r);
            roles.insert(c.labels[0] + off, r);
        }
    }
    match axis_role {
        Some(Some(l)) => {
            roles.insert(l, ComponentRole::Cusp);
        }
        Some(None) => loops.push(ComponentRole::Cusp),
        None => {}
    }
    let mut known: BTreeSet<u32> = crossings.iter().flatten().copied().collect();
    known.extend(t.endpoints.iter().chain(second.endpoints.iter()).copied());
    known.retain(|l| !loop_labels.contains(l));
    Ok(finish_framed(&crossings, &roles, loops, &known, &mut m)?)
}

/// A twist circle drawn as a thin loop: the strands through it, in order
/// from left to right, with the arc outside the loop on each side.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ThinLoop {
    crossings: Vec<usize>,
    inside: Vec<u32>,
    below: Vec<u32>,
    above: Vec<u32>,
}

fn thin_loop(d: &LinkDiagram, k: usize) -> Result<ThinLoop, CoverError> {
    let bad = |reason| CoverError::NotThin { component: k, reason };
    let arcs = d.component_arcs(k);
    let x = d.crossings();
    let mut seq = Vec::with_capacity(arcs.len());
    for (i, &a) in arcs.iter().enumerate() {
        let b = arcs[(i + 1) % arcs.len()];
        // the crossing where arc `a` arrives: slot 0 for the under-strand,
        // slot 3 or 1 for the over-strand depending on the sign
        let incoming = |c: usize, s: usize| s == 0 || (s == 3 && d.sign(c) > 0) || (s == 1 && d.sign(c) < 0);
        let (c, s_in) = (0..x.len())
            .flat_map(|c| (0..4).map(move |s| (c, s)))
            .find(|&(c, s)| x[c][s] == a && incoming(c, s))
            .ok_or(bad("arc has no end"))?;
        if x[c][(s_in + 2) % 4] != b {
            return Err(bad("component does not pass straight through its crossings"));
        }
        let (u, o) = d.crossing_components(c);
        if u == o {
            return Err(bad("self-crossing"));
        }
        seq.push((c, s_in, s_in % 2 == 1, b));
    }
    let m = seq.len();
    if m % 2 == 1 {
        return Err(bad("odd number of crossings"));
    }
    let half = m / 2;
    let start = (0..m).find(|&i| seq[i].2 != seq[(i + m - 1) % m].2).ok_or(bad("passes entirely over or under"))?;
    let seq: Vec<_> = (0..m).map(|i| seq[(start + i) % m]).collect();
    if (0..half).any(|i| seq[i].2 != seq[0].2) || (half..m).any(|i| seq[i].2 == seq[0].2) {
        return Err(bad("over and under passes interleave"));
    }
    let mut inside = Vec::new();
    let mut below = Vec::new();
    let mut above = Vec::new();
    let mut eastward = None;
    for j in 0..half {
        let (cx, sx, _, out_label) = seq[j];
        let (cy, sy, _, _) = seq[m - 1 - j];
        let across_x = [x[cx][(sx + 1) % 4], x[cx][(sx + 3) % 4]];
        let across_y = [x[cy][(sy + 1) % 4], x[cy][(sy + 3) % 4]];
        let shared: Vec<u32> = across_x.iter().copied().filter(|l| across_y.contains(l)).collect();
        // a strand meeting only this loop has both arcs joining the two
        // crossings; either can serve as the inside arc
        if shared.is_empty() || shared.len() > 2 {
            return Err(bad("strand does not pass straight through the loop"));
        }
        let mid = shared[0];
        let outer_x = if across_x[0] == mid { across_x[1] } else { across_x[0] };
        let outer_y = if across_y[0] == mid { across_y[1] } else { across_y[0] };
        // with the strand pointing into the loop, the next arm
        // counterclockwise points east
        let south = (0..4).find(|&s| x[cx][s] == outer_x && s % 2 != sx % 2).unwrap();
        let east = x[cx][(south + 1) % 4];
        let e = east == out_label;
        if shared.len() == 1 && *eastward.get_or_insert(e) != e {
            return Err(bad("loop turns back on itself"));
        }
        inside.push(mid);
        below.push(outer_x);
        above.push(outer_y);
    }
    if eastward == Some(false) {
        inside.reverse();
        below.reverse();
        above.reverse();
    }
    let crossings = seq.iter().map(|s| s.0).collect();
    Ok(ThinLoop { crossings, inside, below, above })
}

/// Right-handed full twists represented by a twist circle with this slope:
/// coefficient `1/a` is `-a` of them.
pub fn twist_count(slope: Slope) -> i64 {
    if slope.is_meridian() {
        0
    } else {
        -slope.p * slope.q
    }
}

/// Crossings of `twists` full twists on parallel strands entering from below
/// with labels `below` (left to right) and leaving above as `above`.
fn full_twists(below: &[u32], above: &[u32], twists: i64, next: &mut u32, m: &mut Merger) -> Vec<[u32; 4]> {
    let k = below.len();
    let mut cur = below.to_vec();
    let mut out = Vec::new();
    if k > 1 {
        for _ in 0..twists.unsigned_abs() * k as u64 {
            for i in 0..k - 1 {
                let (bl, br) = (cur[i], cur[i + 1]);
                let (tl, tr) = (*next, *next + 1);
                *next += 2;
                out.push(if twists > 0 { [br, tr, tl, bl] } else { [bl, br, tr, tl] });
                cur[i] = tl;
                cur[i + 1] = tr;
            }
        }
    }
    for (c, &a) in cur.iter().zip(above) {
        m.union(*c, a);
    }
    out
}

/// Replaces one twist circle by full twists on the strands it encloses,
/// adjusting the coefficients of filled components that pass through it.
fn realize_one(fl: &FramedLink, k: usize) -> Result<FramedLink, CoverError> {
    let d = &fl.diagram;
    let slope = fl.roles[k].slope().expect("twist circle");
    if k >= d.num_knotted_components() {
        let mut roles = fl.roles.clone();
        roles.remove(k);
        let diagram = LinkDiagram::new(d.crossings().to_vec(), d.unknotted_extras() - 1)?;
        return Ok(FramedLink::new(diagram, roles)?);
    }
    let thin = thin_loop(d, k)?;
    let through: Vec<usize> = thin.inside.iter().map(|&l| d.component_of_arc(l)).collect();
    for &c in &through {
        if matches!(fl.roles[c], ComponentRole::TwistCircle { .. }) {
            return Err(CoverError::Threaded { component: k });
        }
    }
    let n = twist_count(slope);
    let lk = d.linking_numbers();
    let removed: BTreeSet<usize> = thin.crossings.iter().copied().collect();
    let gone: BTreeSet<u32> = d.component_arcs(k).iter().chain(thin.inside.iter()).copied().collect();
    let mut crossings: Vec<[u32; 4]> =
        d.crossings().iter().enumerate().filter(|(c, _)| !removed.contains(c)).map(|(_, &x)| x).collect();
    let mut m = Merger::default();
    let mut next = d.max_label() + 1;
    crossings.extend(full_twists(&thin.below, &thin.above, n, &mut next, &mut m));
    let mut roles = BTreeMap::new();
    for c in 0..d.num_knotted_components() {
        if c == k {
            continue;
        }
        let rep = *d.component_arcs(c).iter().find(|l| !gone.contains(l)).expect("component keeps an outer arc");
        let role = match fl.roles[c] {
            ComponentRole::Filled { slope: s } if !s.is_meridian() => {
                let l = lk[k][c];
                ComponentRole::Filled { slope: Slope::new(s.p + n * l * l * s.q, s.q)? }
            }
            r => r,
        };
        roles.insert(rep, role);
    }
    let loops = fl.roles[d.num_knotted_components()..].to_vec();
    let mut known: BTreeSet<u32> = crossings.iter().flatten().copied().collect();
    known.extend(thin.below.iter().chain(thin.above.iter()).copied());
    Ok(finish_framed(&crossings, &roles, loops, &known, &mut m)?)
}

/// Removes every twist circle, inserting its full twists. At each step some
/// circle must be a thin loop around strands that are not themselves twist
/// circles; nested circles become thin once the inner ones are gone.
pub fn rolfsen_realize(fl: &FramedLink) -> Result<FramedLink, CoverError> {
    let mut cur = fl.clone();
    loop {
        let circles: Vec<usize> =
            (0..cur.roles.len()).filter(|&k| matches!(cur.roles[k], ComponentRole::TwistCircle { .. })).collect();
        let Some(&first) = circles.first() else {
            return Ok(cur);
        };
        let next = circles.iter().find_map(|&k| realize_one(&cur, k).ok());
        cur = match next {
            Some(n) => n,
            None => return Err(realize_one(&cur, first).unwrap_err()),
        };
    }
}

/// The diagram of one component alone, every crossing with other
/// components smoothed away.
pub fn component_diagram(d: &LinkDiagram, k: usize) -> Result<LinkDiagram, CoverError> {
    if k >= d.num_knotted_components() {
        return Ok(LinkDiagram::new(Vec::new(), 1)?);
    }
    let mut m = Merger::default();
    let mut kept = Vec::new();
    for (c, &x) in d.crossings().iter().enumerate() {
        let (u, o) = d.crossing_components(c);
        match (u == k, o == k) {
            (true, true) => kept.push(x),
            (true, false) => m.union(x[0], x[2]),
            (false, true) => m.union(x[1], x[3]),
            (false, false) => {}
        }
    }
    if kept.is_empty() {
        return Ok(LinkDiagram::new(Vec::new(), 1)?);
    }
    let kept = kept.into_iter().map(|x| x.map(|l| m.find(l))).collect();
    Ok(LinkDiagram::new(kept, 0)?)
}

/// Checks each declared twist circle against the strands it actually
/// encircles in the base diagram. Circles that only become thin loops after
/// others are realized are not checked.
fn check_declarations(a: &AxisPresentation, base: &FramedLink) -> Result<(), CoverError> {
    let d = &base.diagram;
    let branch = base.roles.iter().position(|r| *r == ComponentRole::BranchLocus).ok_or(CoverError::NoBranch)?;
    let comps = a.components()?;
    for decl in &a.twist_circles {
        let Some(k) = (0..d.num_knotted_components()).find(|&k| d.component_arcs(k).contains(&decl.component)) else {
            continue;
        };
        let Ok(thin) = thin_loop(d, k) else {
            continue;
        };
        let found: BTreeSet<usize> = thin.inside.iter().map(|&l| d.component_of_arc(l)).collect();
        let mut declared = BTreeSet::new();
        for l in &decl.enclosed_strands {
            if let Some(c) = (0..d.num_knotted_components()).find(|&c| d.component_arcs(c).contains(l)) {
                declared.insert(c);
            }
        }
        let odd = comps.iter().any(|c| c.labels.contains(&decl.component) && c.parity() == 1);
        if odd {
            declared.insert(branch);
        }
        if found != declared {
            return Err(CoverError::EnclosedMismatch {
                component: k,
                found: found.into_iter().collect(),
                declared: declared.into_iter().collect(),
            });
        }
    }
    Ok(())
}

/// Outcome of comparing the base and cover sides of a presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Crosscheck {
    /// Determinant of the branch locus after all twists are realized.
    pub base_det: i64,
    /// Order of the first homology of the lifted surgery, 0 if infinite.
    pub cover_h1: i64,
    pub consistent: bool,
}

/// `|H1|` of the double branched cover computed two ways: the determinant
/// of the branch knot once every twist circle has been realized, and the
/// Smith normal form of the lifted surgery description.
pub fn cover_homology_crosscheck(a: &AxisPresentation) -> Result<Crosscheck, CoverError> {
    let base = assemble_base(a)?;
    for (k, r) in base.roles.iter().enumerate() {
        if matches!(r, ComponentRole::Filled { .. }) {
            return Err(CoverError::NotTwist(k));
        }
    }
    check_declarations(a, &base)?;
    let realized = rolfsen_realize(&base)?;
    let branch = realized.roles.iter().position(|r| *r == ComponentRole::BranchLocus).ok_or(CoverError::NoBranch)?;
    let knot = component_diagram(&realized.diagram, branch)?;
    let base_det = goeritz_determinant(&knot)?.abs();
    let cover = assemble_cover(a, false)?;
    let cover_h1 = cover.homology_of_surgery()?.order();
    Ok(Crosscheck { base_det, cover_h1, consistent: base_det == cover_h1 })
}

/// A random presentation of the family used for cross-checks: nested
/// circles around the axis with coefficients `1/2a`, plus split twist
/// circles with coefficients `1/a`.
pub fn random_presentation(rng: &mut impl rand::Rng) -> AxisPresentation {
    let n = rng.gen_range(0..=3usize);
    let loose = rng.gen_range(0..=2usize);
    let nonzero = |rng: &mut dyn rand::RngCore| loop {
        let a = rand::Rng::gen_range(rng, -4i64..=4);
        if a != 0 {
            return a;
        }
    };
    // left endpoint i and right endpoint i share the label i + 1
    let mut endpoints: Vec<u32> = (1..=n as u32).collect();
    endpoints.extend((1..=n as u32).rev());
    let mut arc_roles = BTreeMap::new();
    let mut decls = Vec::new();
    for i in 1..=n as u32 {
        let slope = Slope::new(1, 2 * nonzero(rng)).expect("primitive");
        decls.push(TwistDeclaration { component: i, enclosed_strands: Vec::new(), slope });
    }
    let mut loops = Vec::new();
    for j in 0..loose as u32 {
        let l = 100 + j;
        loops.push(l);
        arc_roles.insert(l, ArcRole::TwistCircle { slope: Slope::reciprocal(nonzero(rng)) });
    }
    let t = Tangle::new(Vec::new(), endpoints, BTreeMap::new(), arc_roles, loops).expect("valid tangle");
    let matching = (1..=n as u32).map(|l| (l, l)).collect();
    AxisPresentation::new(t, matching, decls).expect("valid presentation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn slope(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    /// One strand straight across the box, i.e. a circle around the axis.
    fn one_circle(role: ArcRole) -> AxisPresentation {
        let mut roles = BTreeMap::new();
        roles.insert(1, role);
        let t = Tangle::new(vec![], vec![1, 1], BTreeMap::new(), roles, vec![]).unwrap();
        let decls = match role {
            ArcRole::TwistCircle { slope } => {
                vec![TwistDeclaration { component: 1, enclosed_strands: vec![], slope }]
            }
            _ => vec![],
        };
        AxisPresentation::new(t, vec![(1, 1)], decls).unwrap()
    }

    #[test]
    fn empty_cut_tangle_is_the_axis() {
        let a = AxisPresentation::new(
            Tangle::new(vec![], vec![], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap(),
            vec![],
            vec![],
        )
        .unwrap();
        let b = assemble_base(&a).unwrap();
        assert_eq!(b.roles, vec![ComponentRole::BranchLocus]);
        assert_eq!(b.diagram.num_crossings(), 0);
    }

    #[test]
    fn circle_around_the_axis() {
        let a = one_circle(ArcRole::Filled { slope: slope(1, 2) });
        let b = assemble_base(&a).unwrap();
        assert_eq!(b.diagram.num_components(), 2);
        assert!(b.roles.contains(&ComponentRole::BranchLocus));
        assert!(b.roles.contains(&ComponentRole::Filled { slope: slope(1, 2) }));
        assert_eq!(b.diagram.linking_numbers()[0][1].abs(), 1);
        assert_eq!(a.components().unwrap()[0].parity(), 1);
    }

    #[test]
    fn lifting_rule() {
        for a in [-5i64, -4, -3, -2, -1, 1, 2, 3, 4, 5] {
            let p = one_circle(ArcRole::Filled { slope: slope(1, 2 * a) });
            let c = assemble_cover(&p, false).unwrap();
            assert_eq!(c.roles, vec![ComponentRole::Filled { slope: slope(1, a) }], "a = {a}");
        }
        let c = assemble_cover(&one_circle(ArcRole::Filled { slope: slope(1, -6) }), false).unwrap();
        assert_eq!(c.roles, vec![ComponentRole::Filled { slope: slope(-1, 3) }]);
        assert!(matches!(
            assemble_cover(&one_circle(ArcRole::Filled { slope: slope(1, 3) }), false),
            Err(CoverError::NotLiftable { .. })
        ));
    }

    #[test]
    fn meridian_of_the_axis_lifts_to_a_meridian() {
        let c = assemble_cover(&one_circle(ArcRole::Cusp), true).unwrap();
        assert_eq!(c.diagram.num_components(), 2);
        assert_eq!(c.diagram.linking_numbers()[0][1].abs(), 1);
    }

    #[test]
    fn even_components_lift_twice() {
        let mut roles = BTreeMap::new();
        roles.insert(7, ArcRole::Filled { slope: slope(2, 3) });
        roles.insert(8, ArcRole::CoCore);
        let t = Tangle::new(vec![], vec![], BTreeMap::new(), roles, vec![7, 8]).unwrap();
        let a = AxisPresentation::new(t, vec![], vec![]).unwrap();
        let c = assemble_cover(&a, false).unwrap();
        assert_eq!(c.diagram.num_components(), 4);
        assert_eq!(c.roles.iter().filter(|&&r| r == ComponentRole::CoCore).count(), 2);
    }

    #[test]
    fn two_passes_fuse_into_two_lifts() {
        // left 1 -> right 2 and left 2 -> right 1, crossing once: a curve
        // going twice around the axis
        let t = Tangle::new(vec![[1, 2, 3, 4]], vec![1, 2, 3, 4], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap();
        let a = AxisPresentation::new(t, vec![(1, 4), (2, 3)], vec![]).unwrap();
        let comps = a.components().unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].passes, 2);
        let c = assemble_cover(&a, false).unwrap();
        assert_eq!(c.diagram.num_components(), 2);
    }

    #[test]
    fn crossing_matchings_are_rejected() {
        let t = Tangle::new(vec![], vec![1, 2, 2, 1], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap();
        assert!(matches!(AxisPresentation::new(t.clone(), vec![(1, 2)], vec![]), Err(CoverError::Matching)));
        assert!(matches!(
            AxisPresentation::new(t.clone(), vec![(1, 2), (2, 1)], vec![]),
            Err(CoverError::NonPlanarMatching { left: 0, right: 1 })
        ));
        assert!(AxisPresentation::new(t, vec![(1, 1), (2, 2)], vec![]).is_ok());
    }

    #[test]
    fn odd_twist_circles_need_declarations() {
        let mut roles = BTreeMap::new();
        roles.insert(1, ArcRole::TwistCircle { slope: slope(1, 2) });
        let t = Tangle::new(vec![], vec![1, 1], BTreeMap::new(), roles, vec![]).unwrap();
        assert!(matches!(AxisPresentation::new(t, vec![(1, 1)], vec![]), Err(CoverError::Undeclared(1))));
    }

    #[test]
    fn single_circle_crosscheck() {
        let a = one_circle(ArcRole::TwistCircle { slope: slope(1, 2) });
        let x = cover_homology_crosscheck(&a).unwrap();
        assert_eq!(x, Crosscheck { base_det: 1, cover_h1: 1, consistent: true });
    }

    #[test]
    fn random_family_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_presentation(&mut rng);
            let x = cover_homology_crosscheck(&a).unwrap();
            assert!(x.consistent, "{x:?}\n{}", a.to_json_string());
        }
    }

    #[test]
    fn json_round_trip() {
        let a = one_circle(ArcRole::TwistCircle { slope: slope(-1, 4) });
        let back = AxisPresentation::from_json_str(&a.to_json_string()).unwrap();
        assert_eq!(back, a);
    }

    /// An unknot with two antiparallel vertical strands and a twist circle
    /// drawn as a thin loop around them, over both below and under both
    /// above. As a link it is split.
    fn band_through_circle(slope: Slope) -> FramedLink {
        let x = vec![[1, 5, 2, 8], [1, 6, 4, 5], [8, 2, 7, 3], [7, 4, 6, 3]];
        let d = LinkDiagram::from_unoriented(x, 0).unwrap();
        let mut roles = vec![ComponentRole::Cusp; 2];
        roles[d.component_of_arc(5)] = ComponentRole::TwistCircle { slope };
        FramedLink::new(d, roles).unwrap()
    }

    #[test]
    fn twist_circle_around_two_strands() {
        for a in [-3i64, -1, 1, 2] {
            let fl = band_through_circle(Slope::reciprocal(a));
            let k = fl.roles.iter().position(|r| matches!(r, ComponentRole::TwistCircle { .. })).unwrap();
            let thin = thin_loop(&fl.diagram, k).unwrap();
            assert_eq!(thin.inside.len(), 2);
            let r = rolfsen_realize(&fl).unwrap();
            assert_eq!(r.roles, vec![ComponentRole::Cusp]);
            assert_eq!(r.diagram.num_crossings(), 2 * a.unsigned_abs() as usize);
            assert_eq!(r.diagram.writhe(), 2 * a);
            assert_eq!(twist_count(Slope::reciprocal(a)), -a);
        }
    }
}
