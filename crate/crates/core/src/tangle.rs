//! Tangles in a disk: crossings, boundary endpoints, named slots awaiting a
//! rational tangle, and roles attached to arcs.
//!
//! Crossings are stored unoriented. A tuple lists the four arms
//! counterclockwise and the under-strand occupies slots 0 and 2, so any PD
//! tuple is valid here; orientation is recovered when a closed diagram is
//! built. Boundary endpoints are listed counterclockwise. For a 4-endpoint
//! tangle the positions are NW, SW, SE, NE, and the same order is used for
//! the four ends of a slot.

use crate::diagram::{ComponentRole, DiagramError, FramedLink, Slope};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TangleError {
    #[error("arc label {label} occurs {count} times, expected exactly twice")]
    LabelCount { label: u32, count: usize },
    #[error("odd number of boundary endpoints ({0})")]
    OddEndpoints(usize),
    #[error("unknown slot {0:?}")]
    UnknownSlot(String),
    #[error("expected {expected} endpoints, found {found}")]
    EndpointCount { expected: usize, found: usize },
    #[error("tangle is not rational: {0}")]
    NotRational(&'static str),
    #[error("endpoint positions {0} and {1} are not adjacent on the boundary")]
    NotAdjacent(usize, usize),
    #[error("endpoint position {0} is used by more than one cap")]
    ReusedEndpoint(usize),
    #[error("open arc through label {0} is neither a co-core nor a marked core")]
    UnfusedArc(u32),
    #[error("slots remain unfilled: {0:?}")]
    OpenSlots(Vec<String>),
    #[error("conflicting roles on the strand through label {0}")]
    RoleConflict(u32),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// Role of an arc: a component role, or the marked core arc that becomes
/// the knot after doubling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArcRole {
    Cusp,
    Filled {
        slope: Slope,
    },
    #[serde(rename = "cocore")]
    CoCore,
    #[serde(rename = "branch")]
    BranchLocus,
    #[serde(rename = "twist")]
    TwistCircle {
        slope: Slope,
    },
    #[serde(rename = "marked")]
    MarkedCore,
}

impl ArcRole {
    pub fn mirrored(self) -> Self {
        match self {
            ArcRole::Filled { slope } => ArcRole::Filled { slope: slope.negate() },
            ArcRole::TwistCircle { slope } => ArcRole::TwistCircle { slope: slope.negate() },
            r => r,
        }
    }

    /// The component role of a closed strand carrying this tag. Marked
    /// cores become cusps.
    pub fn component_role(self) -> ComponentRole {
        match self {
            ArcRole::Cusp | ArcRole::MarkedCore => ComponentRole::Cusp,
            ArcRole::Filled { slope } => ComponentRole::Filled { slope },
            ArcRole::CoCore => ComponentRole::CoCore,
            ArcRole::BranchLocus => ComponentRole::BranchLocus,
            ArcRole::TwistCircle { slope } => ComponentRole::TwistCircle { slope },
        }
    }
}

impl From<ComponentRole> for ArcRole {
    fn from(r: ComponentRole) -> Self {
        match r {
            ComponentRole::Cusp => ArcRole::Cusp,
            ComponentRole::Filled { slope } => ArcRole::Filled { slope },
            ComponentRole::CoCore => ArcRole::CoCore,
            ComponentRole::BranchLocus => ArcRole::BranchLocus,
            ComponentRole::TwistCircle { slope } => ArcRole::TwistCircle { slope },
        }
    }
}

/// Where a label occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Occ {
    Cross(usize, usize),
    End(usize),
    Slot(usize, usize),
}

/// One end of an open strand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrandEnd {
    Boundary(usize),
    Slot(String, usize),
}

/// A strand found by tracing: its labels in order and, for an open strand,
/// its two ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strand {
    pub labels: Vec<u32>,
    pub ends: Option<(StrandEnd, StrandEnd)>,
}

impl Strand {
    pub fn is_closed(&self) -> bool {
        self.ends.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tangle {
    #[serde(rename = "pd", default)]
    pub crossings: Vec<[u32; 4]>,
    #[serde(default)]
    pub endpoints: Vec<u32>,
    #[serde(default)]
    pub slots: BTreeMap<String, [u32; 4]>,
    #[serde(default)]
    pub arc_roles: BTreeMap<u32, ArcRole>,
    /// Labels of closed crossing-less loops.
    #[serde(default)]
    pub loops: Vec<u32>,
}

/// Union-find over arc labels; the smaller label becomes the root.
#[derive(Debug, Default, Clone)]
pub(crate) struct Merger {
    parent: BTreeMap<u32, u32>,
}

impl Merger {
    pub(crate) fn find(&mut self, a: u32) -> u32 {
        let mut r = a;
        while let Some(&p) = self.parent.get(&r) {
            if p == r {
                break;
            }
            r = p;
        }
        let mut x = a;
        while x != r {
            let next = self.parent.get(&x).copied().unwrap_or(r);
            self.parent.insert(x, r);
            x = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }
}

/// Closes up a glued collection of crossings into a framed link: labels are
/// replaced by their roots, roots with no remaining occurrence become
/// crossing-less loops, and roles are collected per root.
pub(crate) fn finish_framed(
    crossings: &[[u32; 4]],
    label_roles: &BTreeMap<u32, ComponentRole>,
    mut loops: Vec<ComponentRole>,
    known: &BTreeSet<u32>,
    m: &mut Merger,
) -> Result<FramedLink, TangleError> {
    let crossings: Vec<[u32; 4]> = crossings.iter().map(|x| x.map(|l| m.find(l))).collect();
    let mut roles: BTreeMap<u32, ComponentRole> = BTreeMap::new();
    for (&l, &r) in label_roles {
        let root = m.find(l);
        match roles.get(&root) {
            Some(&old) if old != r => return Err(TangleError::RoleConflict(l)),
            _ => {
                roles.insert(root, r);
            }
        }
    }
    let used: BTreeSet<u32> = crossings.iter().flatten().copied().collect();
    let roots: BTreeSet<u32> = known.iter().map(|&l| m.find(l)).collect();
    for r in roots {
        if !used.contains(&r) {
            loops.push(roles.get(&r).copied().unwrap_or(ComponentRole::Cusp));
        }
    }
    Ok(FramedLink::assemble(crossings, &roles, loops, ComponentRole::Cusp)?)
}

/// Crossing seen in a mirror that keeps the boundary fixed: the cyclic
/// order of arms reverses.
fn reflect(x: [u32; 4]) -> [u32; 4] {
    [x[0], x[3], x[2], x[1]]
}

impl Tangle {
    /// Validates label counts and the endpoint parity.
    pub fn new(
        crossings: Vec<[u32; 4]>,
        endpoints: Vec<u32>,
        slots: BTreeMap<String, [u32; 4]>,
        arc_roles: BTreeMap<u32, ArcRole>,
        loops: Vec<u32>,
    ) -> Result<Self, TangleError> {
        let t = Tangle { crossings, endpoints, slots, arc_roles, loops };
        t.validate()?;
        Ok(t)
    }

    /// Two horizontal crossing-less strands, NW-NE and SW-SE.
    pub fn zero() -> Self {
        Tangle { endpoints: vec![1, 2, 2, 1], ..Default::default() }
    }

    /// Two vertical crossing-less strands, NW-SW and NE-SE.
    pub fn infinity() -> Self {
        Tangle { endpoints: vec![1, 1, 2, 2], ..Default::default() }
    }

    pub fn from_json_str(s: &str) -> Result<Self, TangleError> {
        let t: Tangle = serde_json::from_str(s).map_err(|e| TangleError::Json(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    fn occurrences(&self) -> BTreeMap<u32, Vec<Occ>> {
        let mut at: BTreeMap<u32, Vec<Occ>> = BTreeMap::new();
        for (c, x) in self.crossings.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                at.entry(l).or_default().push(Occ::Cross(c, s));
            }
        }
        for (i, &l) in self.endpoints.iter().enumerate() {
            at.entry(l).or_default().push(Occ::End(i));
        }
        for (k, ends) in self.slots.values().enumerate() {
            for (i, &l) in ends.iter().enumerate() {
                at.entry(l).or_default().push(Occ::Slot(k, i));
            }
        }
        at
    }

    pub fn validate(&self) -> Result<(), TangleError> {
        if self.endpoints.len() % 2 == 1 {
            return Err(TangleError::OddEndpoints(self.endpoints.len()));
        }
        let at = self.occurrences();
        if let Some((&label, o)) = at.iter().find(|(_, o)| o.len() != 2) {
            return Err(TangleError::LabelCount { label, count: o.len() });
        }
        let mut seen = BTreeSet::new();
        for &l in &self.loops {
            if at.contains_key(&l) || !seen.insert(l) {
                return Err(TangleError::LabelCount { label: l, count: 3 });
            }
        }
        Ok(())
    }

    pub fn max_label(&self) -> u32 {
        self.crossings
            .iter()
            .flatten()
            .chain(self.endpoints.iter())
            .chain(self.slots.values().flatten())
            .chain(self.loops.iter())
            .chain(self.arc_roles.keys())
            .copied()
            .max()
            .unwrap_or(0)
    }

    fn labels(&self) -> BTreeSet<u32> {
        self.crossings
            .iter()
            .flatten()
            .chain(self.endpoints.iter())
            .chain(self.slots.values().flatten())
            .chain(self.loops.iter())
            .copied()
            .collect()
    }

    /// Same tangle with every label increased by `by`.
    pub fn shifted(&self, by: u32) -> Tangle {
        Tangle {
            crossings: self.crossings.iter().map(|x| x.map(|l| l + by)).collect(),
            endpoints: self.endpoints.iter().map(|l| l + by).collect(),
            slots: self.slots.iter().map(|(k, v)| (k.clone(), v.map(|l| l + by))).collect(),
            arc_roles: self.arc_roles.iter().map(|(&l, &r)| (l + by, r)).collect(),
            loops: self.loops.iter().map(|l| l + by).collect(),
        }
    }

    /// Follows every strand through the crossings. Open strands come first,
    /// in order of their first terminal occurrence; closed strands follow in
    /// label order, then the crossing-less loops.
    pub fn trace(&self) -> Vec<Strand> {
        let at = self.occurrences();
        let slot_names: Vec<&String> = self.slots.keys().collect();
        let other = |label: u32, o: Occ| -> Occ {
            let v = &at[&label];
            if v[0] == o {
                v[1]
            } else {
                v[0]
            }
        };
        let to_end = |o: Occ| match o {
            Occ::End(i) => StrandEnd::Boundary(i),
            Occ::Slot(k, i) => StrandEnd::Slot(slot_names[k].clone(), i),
            Occ::Cross(..) => unreachable!("terminal occurrence"),
        };
        let mut visited = BTreeSet::new();
        let mut out = Vec::new();
        let mut terminals: Vec<(u32, Occ)> =
            self.endpoints.iter().enumerate().map(|(i, &l)| (l, Occ::End(i))).collect();
        for (k, ends) in self.slots.values().enumerate() {
            terminals.extend(ends.iter().enumerate().map(|(i, &l)| (l, Occ::Slot(k, i))));
        }
        for (start, occ) in terminals {
            if visited.contains(&start) {
                continue;
            }
            let mut labels = Vec::new();
            let (mut label, mut from) = (start, occ);
            let last = loop {
                visited.insert(label);
                labels.push(label);
                match other(label, from) {
                    Occ::Cross(c, s) => {
                        from = Occ::Cross(c, s ^ 2);
                        label = self.crossings[c][s ^ 2];
                    }
                    t => break t,
                }
            };
            out.push(Strand { labels, ends: Some((to_end(occ), to_end(last))) });
        }
        for (&start, occs) in &at {
            if visited.contains(&start) {
                continue;
            }
            let mut labels = Vec::new();
            let (mut label, mut from) = (start, occs[0]);
            while visited.insert(label) {
                labels.push(label);
                match other(label, from) {
                    Occ::Cross(c, s) => {
                        from = Occ::Cross(c, s ^ 2);
                        label = self.crossings[c][s ^ 2];
                    }
                    _ => unreachable!("closed strand"),
                }
            }
            out.push(Strand { labels, ends: None });
        }
        out.extend(self.loops.iter().map(|&l| Strand { labels: vec![l], ends: None }));
        out
    }

    /// Role of a strand, from any tagged label on it.
    pub fn strand_role(&self, s: &Strand) -> Result<Option<ArcRole>, TangleError> {
        let mut role = None;
        for l in &s.labels {
            if let Some(&r) = self.arc_roles.get(l) {
                match role {
                    Some(old) if old != r => return Err(TangleError::RoleConflict(*l)),
                    _ => role = Some(r),
                }
            }
        }
        Ok(role)
    }

    /// Number of boundary endpoints on strands other than co-core arcs.
    pub fn strand_endpoint_count(&self) -> usize {
        self.trace()
            .iter()
            .filter_map(|s| s.ends.as_ref().map(|_| s))
            .filter(|s| !matches!(self.strand_role(s), Ok(Some(ArcRole::CoCore))))
            .count()
            * 2
    }

    /// Replaces labels by their roots under `m`, turning labels that lost all
    /// occurrences into loops.
    fn rebuilt(mut self, m: &mut Merger, known: &BTreeSet<u32>) -> Result<Tangle, TangleError> {
        for x in &mut self.crossings {
            *x = x.map(|l| m.find(l));
        }
        for l in &mut self.endpoints {
            *l = m.find(*l);
        }
        for v in self.slots.values_mut() {
            *v = v.map(|l| m.find(l));
        }
        let mut roles = BTreeMap::new();
        for (&l, &r) in &self.arc_roles {
            let root = m.find(l);
            match roles.get(&root) {
                Some(&old) if old != r => return Err(TangleError::RoleConflict(l)),
                _ => {
                    roles.insert(root, r);
                }
            }
        }
        self.arc_roles = roles;
        let mut loops: BTreeSet<u32> = self.loops.iter().map(|&l| m.find(l)).collect();
        let used: BTreeSet<u32> = self
            .crossings
            .iter()
            .flatten()
            .chain(self.endpoints.iter())
            .chain(self.slots.values().flatten())
            .copied()
            .collect();
        for &l in known {
            let r = m.find(l);
            if !used.contains(&r) {
                loops.insert(r);
            }
        }
        self.loops = loops.into_iter().collect();
        self.validate()?;
        Ok(self)
    }
}

/// Partial quotients of the twist-normal form: `(horizontal, count)` pairs,
/// outermost first, and whether the innermost tangle is the infinity tangle.
fn twist_sequence(s: Slope) -> (Vec<(bool, i64)>, bool) {
    let mut ops = Vec::new();
    if s.q == 0 {
        return (ops, true);
    }
    let (mut p, mut q) = (s.p, s.q);
    let mut horizontal = true;
    loop {
        if horizontal {
            let h = p.div_euclid(q);
            ops.push((true, h));
            p -= h * q;
            if p == 0 {
                return (ops, false);
            }
        } else {
            let v = q.div_euclid(p);
            ops.push((false, v));
            q -= v * p;
            if q == 0 {
                return (ops, true);
            }
        }
        horizontal = !horizontal;
    }
}

/// The rational tangle with fraction `p/q`, built from the continued
/// fraction by horizontal twists on the east side and vertical twists on the
/// south side. A positive twist has the SW-NE strand on top.
pub fn rational_tangle(s: Slope) -> Tangle {
    let (ops, infinite) = twist_sequence(s);
    let mut t = if infinite { Tangle::infinity() } else { Tangle::zero() };
    let mut next = 3;
    for &(horizontal, count) in ops.iter().rev() {
        let positive = count > 0;
        for _ in 0..count.unsigned_abs() {
            let (a, b) = (next, next + 1);
            next += 2;
            // arms of the new crossing, counterclockwise from NW
            let (arms, new_pos) = if horizontal {
                ([t.endpoints[3], t.endpoints[2], a, b], [(3usize, b), (2usize, a)])
            } else {
                ([t.endpoints[1], a, b, t.endpoints[2]], [(1usize, a), (2usize, b)])
            };
            let [nw, sw, se, ne] = arms;
            t.crossings.push(if positive { [nw, sw, se, ne] } else { [sw, se, ne, nw] });
            for (pos, l) in new_pos {
                t.endpoints[pos] = l;
            }
        }
    }
    t
}

/// Fraction of a 4-endpoint tangle made of twists, by peeling crossings
/// that meet two neighbouring endpoints and replaying the twists on the
/// innermost 0 or infinity tangle.
pub fn fraction(t: &Tangle) -> Result<Slope, TangleError> {
    if t.endpoints.len() != 4 {
        return Err(TangleError::EndpointCount { expected: 4, found: t.endpoints.len() });
    }
    if !t.slots.is_empty() || !t.loops.is_empty() {
        return Err(TangleError::NotRational("slots or closed loops present"));
    }
    t.validate()?;
    let mut crossings = t.crossings.clone();
    let mut ep = t.endpoints.clone();
    let mut ops = Vec::new();
    'peel: while !crossings.is_empty() {
        for p in 0..4 {
            let q = (p + 1) % 4;
            let (a, b) = (ep[p], ep[q]);
            if a == b {
                continue;
            }
            for (c, x) in crossings.iter().enumerate() {
                let (Some(sa), Some(sb)) = (x.iter().position(|&l| l == a), x.iter().position(|&l| l == b)) else {
                    continue;
                };
                if sb != (sa + 1) % 4 {
                    continue;
                }
                // compass direction of each slot, NW = 0 counterclockwise
                let slot_of = |compass: usize| (sa + compass + 4 - p) % 4;
                let horizontal = p % 2 == 0;
                let eps = if (p + 1 + 4 - sa) % 4 % 2 == 1 { 1 } else { -1 };
                let reflect = |pos: usize| if horizontal { 3 - pos } else { pos ^ 1 };
                let new_p = x[slot_of(reflect(p))];
                let new_q = x[slot_of(reflect(q))];
                ep[p] = new_p;
                ep[q] = new_q;
                crossings.remove(c);
                ops.push((horizontal, eps));
                continue 'peel;
            }
        }
        return Err(TangleError::NotRational("no twist meets the boundary"));
    }
    let (mut p, mut q): (i64, i64) = if ep[0] == ep[3] && ep[1] == ep[2] {
        (0, 1)
    } else if ep[0] == ep[1] && ep[2] == ep[3] {
        (1, 0)
    } else {
        return Err(TangleError::NotRational("innermost tangle is neither 0 nor infinity"));
    };
    for &(horizontal, eps) in ops.iter().rev() {
        if horizontal {
            p += eps * q;
        } else {
            q += eps * p;
        }
    }
    Ok(Slope::new(p, q)?)
}

/// Substitutes `r` into the named slot, gluing the slot's ends to the
/// endpoints of `r` in order.
pub fn fill_slot(t: &Tangle, slot: &str, r: &Tangle) -> Result<Tangle, TangleError> {
    if r.endpoints.len() != 4 {
        return Err(TangleError::EndpointCount { expected: 4, found: r.endpoints.len() });
    }
    let ends = *t.slots.get(slot).ok_or_else(|| TangleError::UnknownSlot(slot.to_string()))?;
    let rr = r.shifted(t.max_label() + 1);
    let mut out = t.clone();
    out.slots.remove(slot);
    out.crossings.extend(rr.crossings.iter().copied());
    for (name, v) in &rr.slots {
        let mut key = name.clone();
        while out.slots.contains_key(&key) {
            key = format!("{slot}.{key}");
        }
        out.slots.insert(key, *v);
    }
    out.arc_roles.extend(rr.arc_roles.iter().map(|(&l, &x)| (l, x)));
    out.loops.extend(rr.loops.iter().copied());
    let mut known = t.labels();
    known.extend(rr.labels());
    let mut m = Merger::default();
    for (i, &e) in ends.iter().enumerate() {
        m.union(e, rr.endpoints[i]);
    }
    out.rebuilt(&mut m, &known)
}

/// The same tangle turned a quarter turn counterclockwise.
pub fn rotate(t: &Tangle) -> Result<Tangle, TangleError> {
    if t.endpoints.len() != 4 {
        return Err(TangleError::EndpointCount { expected: 4, found: t.endpoints.len() });
    }
    let e = &t.endpoints;
    let mut out = t.clone();
    out.endpoints = vec![e[3], e[0], e[1], e[2]];
    Ok(out)
}

/// Two horizontal strands passing through a thin twist circle with the
/// given slope. The circle crosses over both strands on its left edge and
/// under both on its right edge.
pub fn encircled_pair(slope: Slope) -> Tangle {
    let crossings = vec![[1, 7, 2, 10], [4, 8, 5, 7], [9, 3, 10, 2], [8, 6, 9, 5]];
    let mut roles = BTreeMap::new();
    roles.insert(7, ArcRole::TwistCircle { slope });
    Tangle::new(crossings, vec![1, 4, 6, 3], BTreeMap::new(), roles, Vec::new()).expect("fixed tangle is valid")
}

/// Closes a 4-ended tangle by joining NW to NE and SW to SE.
pub fn numerator_closure(t: &Tangle) -> Result<FramedLink, TangleError> {
    if !t.slots.is_empty() {
        return Err(TangleError::OpenSlots(t.slots.keys().cloned().collect()));
    }
    if t.endpoints.len() != 4 {
        return Err(TangleError::EndpointCount { expected: 4, found: t.endpoints.len() });
    }
    t.validate()?;
    let mut m = Merger::default();
    m.union(t.endpoints[0], t.endpoints[3]);
    m.union(t.endpoints[1], t.endpoints[2]);
    let loop_labels: BTreeSet<u32> = t.loops.iter().copied().collect();
    let mut roles = BTreeMap::new();
    let mut loops = Vec::new();
    for s in t.trace() {
        let role = t.strand_role(&s)?.map(ArcRole::component_role);
        if loop_labels.contains(&s.labels[0]) {
            loops.push(role.unwrap_or(ComponentRole::Cusp));
        } else if let Some(r) = role {
            roles.insert(s.labels[0], r);
        }
    }
    let mut known = t.labels();
    known.retain(|l| !loop_labels.contains(l));
    finish_framed(&t.crossings, &roles, loops, &known, &mut m)
}

/// Unknot threading two twist circles: the numerator closure of a
/// horizontal encircled pair beside a vertical one. Realizing the circles
/// with slopes `1/a` and `1/b` gives the double twist knot whose twist
/// regions hold `2a` and `2b` crossings.
pub fn double_twist_base(a: Slope, b: Slope) -> Result<FramedLink, TangleError> {
    let mut slots = BTreeMap::new();
    slots.insert("h".to_string(), [1, 2, 3, 4]);
    slots.insert("v".to_string(), [4, 3, 5, 6]);
    let skeleton = Tangle::new(Vec::new(), vec![1, 2, 5, 6], slots, BTreeMap::new(), Vec::new())?;
    let t = fill_slot(&skeleton, "h", &encircled_pair(a))?;
    let t = fill_slot(&t, "v", &rotate(&encircled_pair(b))?)?;
    numerator_closure(&t)
}

/// Joins each pair of neighbouring endpoint positions by a cap lying just
/// outside the old boundary, and hooks a co-core arc once around every cap.
/// The two ends of each co-core arc take the places of the capped endpoints.
pub fn attach_caps(t: &Tangle, pairs: &[(usize, usize)]) -> Result<Tangle, TangleError> {
    let n = t.endpoints.len();
    let mut used = BTreeSet::new();
    let mut out = t.clone();
    let mut next = t.max_label() + 1;
    for &(i, j) in pairs {
        if i >= n || j >= n {
            return Err(TangleError::EndpointCount { expected: n, found: i.max(j) + 1 });
        }
        let (first, second) = if j == (i + 1) % n {
            (i, j)
        } else if i == (j + 1) % n {
            (j, i)
        } else {
            return Err(TangleError::NotAdjacent(i, j));
        };
        for p in [first, second] {
            if !used.insert(p) {
                return Err(TangleError::ReusedEndpoint(p));
            }
        }
        let (a, b) = (t.endpoints[first], t.endpoints[second]);
        let (mid, d1, dm, d2) = (next, next + 1, next + 2, next + 3);
        next += 4;
        // the co-core passes over the cap, then under it
        out.crossings.push([a, d1, mid, dm]);
        out.crossings.push([d2, b, dm, mid]);
        out.endpoints[first] = d1;
        out.endpoints[second] = d2;
        out.arc_roles.insert(d1, ArcRole::CoCore);
    }
    out.validate()?;
    Ok(out)
}

/// The tangle glued to its mirror image along the identity of the boundary.
/// Co-core arcs close up into 0-framed components, marked cores into cusps,
/// and closed components appear twice with mirrored slopes.
pub fn double(t: &Tangle) -> Result<FramedLink, TangleError> {
    let (crossings, roles, loops, known, mut m) = glue_double(t)?;
    finish_framed(&crossings, &roles, loops, &known, &mut m)
}

type Glued = (Vec<[u32; 4]>, BTreeMap<u32, ComponentRole>, Vec<ComponentRole>, BTreeSet<u32>, Merger);

fn glue_double(t: &Tangle) -> Result<Glued, TangleError> {
    if !t.slots.is_empty() {
        return Err(TangleError::OpenSlots(t.slots.keys().cloned().collect()));
    }
    t.validate()?;
    for s in t.trace().iter().filter(|s| !s.is_closed()) {
        match t.strand_role(s)? {
            Some(ArcRole::CoCore) | Some(ArcRole::MarkedCore) => {}
            _ => return Err(TangleError::UnfusedArc(s.labels[0])),
        }
    }
    let off = t.max_label() + 1;
    let image = t.shifted(off);
    let mut crossings = t.crossings.clone();
    crossings.extend(image.crossings.iter().map(|&x| reflect(x)));
    let fused = |r: ArcRole| match r {
        ArcRole::CoCore => ComponentRole::Filled { slope: Slope { p: 0, q: 1 } },
        r => r.component_role(),
    };
    let mut roles = BTreeMap::new();
    for (&l, &r) in &t.arc_roles {
        roles.insert(l, fused(r));
        roles.insert(l + off, fused(r.mirrored()));
    }
    let mut loops = Vec::new();
    for (tt, mirrored) in [(t, false), (&image, true)] {
        for &l in &tt.loops {
            let r = tt.arc_roles.get(&l).map(|&r| if mirrored { r.mirrored() } else { r });
            loops.push(r.map(fused).unwrap_or(ComponentRole::Cusp));
        }
    }
    let mut m = Merger::default();
    for (&a, &b) in t.endpoints.iter().zip(&image.endpoints) {
        m.union(a, b);
    }
    let loop_labels: BTreeSet<u32> = t.loops.iter().chain(image.loops.iter()).copied().collect();
    let known: BTreeSet<u32> =
        t.labels().union(&image.labels()).copied().filter(|l| !loop_labels.contains(l)).collect();
    Ok((crossings, roles, loops, known, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn slope(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    #[test]
    fn zero_and_infinity_are_crossingless() {
        let z = rational_tangle(slope(0, 1));
        assert!(z.crossings.is_empty());
        assert_eq!(z.endpoints, vec![1, 2, 2, 1]);
        let i = rational_tangle(slope(1, 0));
        assert!(i.crossings.is_empty());
        assert_eq!(i.endpoints, vec![1, 1, 2, 2]);
        assert_eq!(fraction(&z).unwrap(), slope(0, 1));
        assert_eq!(fraction(&i).unwrap(), slope(1, 0));
    }

    #[test]
    fn minus_three_halves_has_four_crossings() {
        let t = rational_tangle(slope(-3, 2));
        assert_eq!(t.crossings.len(), 4);
        assert_eq!(twist_sequence(slope(-3, 2)).0, vec![(true, -2), (false, 2)]);
        assert_eq!(fraction(&t).unwrap(), slope(-3, 2));
    }

    #[test]
    fn one_positive_horizontal_twist() {
        let mut t = Tangle::zero();
        // NW-NE strand continues into the new crossing; SW-NE on top
        t.crossings.push([1, 2, 4, 3]);
        t.endpoints = vec![1, 2, 4, 3];
        assert_eq!(fraction(&t).unwrap(), slope(1, 1));
        assert_eq!(rational_tangle(slope(1, 1)).crossings.len(), 1);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut done = 0;
        while done < 50 {
            let (p, q) = (rng.gen_range(-100i64..=100), rng.gen_range(0i64..=100));
            let Ok(s) = Slope::new(p, q) else { continue };
            assert_eq!(fraction(&rational_tangle(s)).unwrap(), s, "{p}/{q}");
            done += 1;
        }
    }

    #[test]
    fn non_rational_is_rejected() {
        let mut t = Tangle::zero();
        t.loops.push(9);
        assert!(matches!(fraction(&t), Err(TangleError::NotRational(_))));
        assert!(matches!(fraction(&Tangle::default()), Err(TangleError::EndpointCount { .. })));
    }

    fn bare_slot() -> Tangle {
        let mut slots = BTreeMap::new();
        slots.insert("s".to_string(), [1, 2, 3, 4]);
        Tangle::new(vec![], vec![1, 2, 3, 4], slots, BTreeMap::new(), vec![]).unwrap()
    }

    #[test]
    fn filling_a_bare_slot_reproduces_the_tangle() {
        for (p, q) in [(0, 1), (1, 0), (2, 5), (-7, 3)] {
            let r = rational_tangle(slope(p, q));
            let f = fill_slot(&bare_slot(), "s", &r).unwrap();
            assert_eq!(f.endpoints.len(), 4);
            assert_eq!(fraction(&f).unwrap(), slope(p, q));
        }
        let z = fill_slot(&bare_slot(), "s", &Tangle::zero()).unwrap();
        assert_eq!(z.endpoints[0], z.endpoints[3]);
        assert_eq!(z.endpoints[1], z.endpoints[2]);
        assert!(matches!(fill_slot(&bare_slot(), "t", &Tangle::zero()), Err(TangleError::UnknownSlot(_))));
        assert!(matches!(fill_slot(&bare_slot(), "s", &Tangle::default()), Err(TangleError::EndpointCount { .. })));
    }

    /// Two slots side by side, joined to each other with no endpoints.
    fn two_slots() -> Tangle {
        let mut slots = BTreeMap::new();
        // A: NW z, SW w, SE y, NE x; B: NW x, SW y, SE w, NE z
        slots.insert("a".to_string(), [3, 4, 2, 1]);
        slots.insert("b".to_string(), [1, 2, 4, 3]);
        Tangle::new(vec![], vec![], slots, BTreeMap::new(), vec![]).unwrap()
    }

    #[test]
    fn filled_slots_trace_to_hand_counts() {
        for filler in [Tangle::infinity(), Tangle::zero()] {
            let t = fill_slot(&fill_slot(&two_slots(), "a", &filler).unwrap(), "b", &filler).unwrap();
            assert!(t.slots.is_empty());
            let strands = t.trace();
            assert_eq!(strands.len(), 2);
            assert!(strands.iter().all(|s| s.is_closed()));
        }
        let t = fill_slot(&fill_slot(&two_slots(), "a", &rational_tangle(slope(1, 1))).unwrap(), "b", &Tangle::zero())
            .unwrap();
        assert_eq!(t.trace().len(), 1);
    }

    fn trivial_three_strand() -> Tangle {
        Tangle::new(vec![], vec![1, 2, 3, 3, 2, 1], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap()
    }

    #[test]
    fn capping_three_strands_leaves_one() {
        let t = attach_caps(&trivial_three_strand(), &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(t.endpoints.len(), 6);
        assert_eq!(t.strand_endpoint_count(), 2);
        let strands = t.trace();
        let cocores = strands.iter().filter(|s| t.strand_role(s).unwrap() == Some(ArcRole::CoCore)).count();
        assert_eq!(cocores, 2);
        assert_eq!(strands.iter().filter(|s| !s.is_closed()).count(), 3);
        assert!(matches!(attach_caps(&trivial_three_strand(), &[(0, 2)]), Err(TangleError::NotAdjacent(0, 2))));
        assert!(matches!(attach_caps(&trivial_three_strand(), &[(0, 1), (1, 2)]), Err(TangleError::ReusedEndpoint(1))));
    }

    #[test]
    fn capping_one_strand_closes_it() {
        let t = Tangle::new(vec![], vec![1, 1], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap();
        let c = attach_caps(&t, &[(0, 1)]).unwrap();
        assert_eq!(c.strand_endpoint_count(), 0);
        assert_eq!(c.trace().iter().filter(|s| s.is_closed()).count(), 1);
    }

    #[test]
    fn doubling_a_trivial_marked_arc() {
        let mut roles = BTreeMap::new();
        roles.insert(1, ArcRole::MarkedCore);
        let t = Tangle::new(vec![], vec![1, 1], BTreeMap::new(), roles, vec![]).unwrap();
        let d = double(&t).unwrap();
        assert_eq!(d.diagram.num_crossings(), 0);
        assert_eq!(d.roles, vec![ComponentRole::Cusp]);
    }

    #[test]
    fn doubling_a_capped_tangle() {
        let mut t = attach_caps(&trivial_three_strand(), &[(0, 1), (3, 4)]).unwrap();
        let core = t.trace().into_iter().find(|s| t.strand_role(s).unwrap().is_none()).unwrap();
        t.arc_roles.insert(core.labels[0], ArcRole::MarkedCore);
        let d = double(&t).unwrap();
        let zero = ComponentRole::Filled { slope: slope(0, 1) };
        assert_eq!(d.roles.iter().filter(|&&r| r == zero).count(), 2);
        assert_eq!(d.roles.iter().filter(|&&r| r == ComponentRole::Cusp).count(), 1);
        assert_eq!(d.diagram.num_components(), 3);
        assert_eq!(d.diagram.writhe(), 0);
        let h = d.homology_of_surgery();
        assert!(h.is_err(), "the cusp is unframed");
    }

    #[test]
    fn doubling_duplicates_closed_components() {
        let mut roles = BTreeMap::new();
        roles.insert(1, ArcRole::MarkedCore);
        roles.insert(5, ArcRole::TwistCircle { slope: slope(1, 2) });
        let t = Tangle::new(vec![], vec![1, 1], BTreeMap::new(), roles, vec![5]).unwrap();
        let d = double(&t).unwrap();
        assert_eq!(d.diagram.num_components(), 3);
        assert!(d.roles.contains(&ComponentRole::TwistCircle { slope: slope(1, 2) }));
        assert!(d.roles.contains(&ComponentRole::TwistCircle { slope: slope(-1, 2) }));
    }

    #[test]
    fn double_rejects_loose_arcs() {
        assert!(matches!(double(&trivial_three_strand()), Err(TangleError::UnfusedArc(_))));
        assert!(matches!(double(&bare_slot()), Err(TangleError::OpenSlots(_))));
    }

    #[test]
    fn double_has_the_mirror_involution() {
        let mut t =
            attach_caps(&fill_slot(&bare_slot(), "s", &rational_tangle(slope(3, 2))).unwrap(), &[(0, 1)]).unwrap();
        let core = t.trace().into_iter().find(|s| t.strand_role(s).unwrap().is_none()).unwrap();
        t.arc_roles.insert(core.labels[0], ArcRole::MarkedCore);
        let (crossings, ..) = glue_double(&t).unwrap();
        let off = t.max_label() + 1;
        let swap = |l: u32| if l >= off { l - off } else { l + off };
        let canon = |x: [u32; 4]| {
            let y = [x[2], x[3], x[0], x[1]];
            x.min(y)
        };
        let set: BTreeSet<[u32; 4]> = crossings.iter().map(|&x| canon(x)).collect();
        let image: BTreeSet<[u32; 4]> = crossings.iter().map(|&x| canon(reflect(x).map(swap))).collect();
        assert_eq!(set, image);
        let d = double(&t).unwrap();
        assert_eq!(d.diagram.num_crossings(), 2 * t.crossings.len());
    }

    #[test]
    fn json_round_trip() {
        let mut t = attach_caps(&trivial_three_strand(), &[(0, 1)]).unwrap();
        t.slots.insert("x".into(), [100, 101, 102, 103]);
        t.crossings.push([100, 101, 102, 103]);
        let back = Tangle::from_json_str(&t.to_json_string()).unwrap();
        assert_eq!(back, t);
        assert!(Tangle::from_json_str(r#"{"pd": [[1,2,3,4]]}"#).is_err());
    }
}
