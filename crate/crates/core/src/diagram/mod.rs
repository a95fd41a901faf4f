//! Planar diagrams of links given as PD codes, and framed links built on them.
//!
//! A crossing `X(i,j,k,l)` lists the four arcs meeting it counterclockwise,
//! starting with the incoming under-strand, so the under-strand runs `i -> k`.
//! The over-strand runs either `l -> j` (a positive crossing) or `j -> l`
//! (negative); which one is decided by tracing the component that passes over.

mod framed;
mod goeritz;

pub use framed::{ComponentRole, FramedLink, FramedLinkJson, Slope};
pub use goeritz::goeritz_determinant;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed PD code at byte {pos}: {msg}")]
    Malformed { pos: usize, msg: String },
    #[error("arc label {label} occurs {count} times, expected exactly twice")]
    LabelCount { label: u32, count: usize },
    #[error("component through arc {label} passes under in both directions")]
    InconsistentOrientation { label: u32 },
    #[error("rotation system is not planar (Euler characteristic {chi})")]
    Nonplanar { chi: i64 },
    #[error("diagram is disconnected")]
    Disconnected,
    #[error("{roles} roles supplied for {components} components")]
    RoleCount { roles: usize, components: usize },
    #[error("slope ({p},{q}) is not a primitive pair")]
    BadSlope { p: i64, q: i64 },
    #[error("twist circle on component {component} has slope ({p},{q}); expected (+-1, a)")]
    BadTwist { component: usize, p: i64, q: i64 },
    #[error("component {0} has no surgery framing")]
    Unframed(usize),
    #[error("more than one branch locus component")]
    BranchCount,
    #[error("arc {label} carries conflicting roles")]
    RoleConflict { label: u32 },
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// A position on a crossing: crossing index and slot `0..4`.
pub type Position = (usize, usize);

/// A validated link diagram. Crossing-less unknots are carried as a count and
/// are ordered after all knotted components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkDiagram {
    crossings: Vec<[u32; 4]>,
    unknotted_extras: usize,
    /// Arcs of each knotted component in orientation order, starting at its
    /// lowest label. Components are sorted by lowest label.
    components: Vec<Vec<u32>>,
    /// Slot (1 or 3) through which the over-strand enters each crossing.
    over_in: Vec<u8>,
    arc_component: BTreeMap<u32, usize>,
}

impl LinkDiagram {
    pub fn new(crossings: Vec<[u32; 4]>, unknotted_extras: usize) -> Result<Self, DiagramError> {
        let mut at: BTreeMap<u32, Vec<Position>> = BTreeMap::new();
        for (c, x) in crossings.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                at.entry(l).or_default().push((c, s));
            }
        }
        if let Some((&label, p)) = at.iter().find(|(_, p)| p.len() != 2) {
            return Err(DiagramError::LabelCount { label, count: p.len() });
        }
        let other = |label: u32, p: Position| -> Position {
            let ps = &at[&label];
            if ps[0] == p {
                ps[1]
            } else {
                ps[0]
            }
        };

        let mut visited: BTreeMap<u32, bool> = at.keys().map(|&l| (l, false)).collect();
        let mut over_in = vec![0u8; crossings.len()];
        let mut components = Vec::new();
        for &start in at.keys() {
            if visited[&start] {
                continue;
            }
            // Walk from the first position of the lowest unvisited label,
            // recording the arcs travelled and the slot each one arrives at.
            let mut arcs = Vec::new();
            let mut arrivals = Vec::new();
            let mut leave = at[&start][0];
            loop {
                let label = crossings[leave.0][leave.1];
                if visited[&label] {
                    break;
                }
                visited.insert(label, true);
                let arrive = other(label, leave);
                arcs.push(label);
                arrivals.push(arrive);
                leave = (arrive.0, arrive.1 ^ 2);
            }
            let fwd = arrivals.iter().any(|p| p.1 == 0);
            let back = arrivals.iter().any(|p| p.1 == 2);
            let reversed = match (fwd, back) {
                (true, true) => return Err(DiagramError::InconsistentOrientation { label: start }),
                (true, false) => false,
                (false, true) => true,
                (false, false) => {
                    // All-over component: head from the lowest label toward
                    // its smaller neighbour.
                    let m = arcs.len();
                    let i = (0..m).min_by_key(|&i| arcs[i]).unwrap();
                    arcs[(i + m - 1) % m] < arcs[(i + 1) % m]
                }
            };
            let (arcs, arrivals) = if reversed {
                // Travelling backwards, arc a_i arrives at the position it
                // left from in the forward walk.
                let m = arcs.len();
                let mut ra = Vec::with_capacity(m);
                let mut rp = Vec::with_capacity(m);
                for i in (0..m).rev() {
                    ra.push(arcs[i]);
                    let prev = arrivals[(i + m - 1) % m];
                    rp.push((prev.0, prev.1 ^ 2));
                }
                (ra, rp)
            } else {
                (arcs, arrivals)
            };
            for p in &arrivals {
                if p.1 % 2 == 1 {
                    over_in[p.0] = p.1 as u8;
                }
            }
            let m = arcs.len();
            let i = (0..m).min_by_key(|&i| arcs[i]).unwrap();
            let mut rotated = arcs[i..].to_vec();
            rotated.extend_from_slice(&arcs[..i]);
            components.push(rotated);
        }
        components.sort_by_key(|c| c[0]);
        let mut arc_component = BTreeMap::new();
        for (k, comp) in components.iter().enumerate() {
            for &a in comp {
                arc_component.insert(a, k);
            }
        }
        let d = LinkDiagram { crossings, unknotted_extras, components, over_in, arc_component };
        d.check_planar()?;
        Ok(d)
    }

    pub fn crossings(&self) -> &[[u32; 4]] {
        &self.crossings
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn unknotted_extras(&self) -> usize {
        self.unknotted_extras
    }

    /// Knotted components followed by the crossing-less extras.
    pub fn num_components(&self) -> usize {
        self.components.len() + self.unknotted_extras
    }

    pub fn num_knotted_components(&self) -> usize {
        self.components.len()
    }

    /// Arcs of a knotted component in orientation order.
    pub fn component_arcs(&self, k: usize) -> &[u32] {
        &self.components[k]
    }

    pub fn component_of_arc(&self, label: u32) -> usize {
        self.arc_component[&label]
    }

    /// Slot through which the over-strand enters crossing `c` (1 or 3).
    pub fn over_in_slot(&self, c: usize) -> usize {
        self.over_in[c] as usize
    }

    /// Component of the under-strand and of the over-strand at crossing `c`.
    pub fn crossing_components(&self, c: usize) -> (usize, usize) {
        let x = self.crossings[c];
        (self.component_of_arc(x[0]), self.component_of_arc(x[1]))
    }

    /// +1 when the over-strand runs `l -> j`, -1 when it runs `j -> l`.
    pub fn sign(&self, c: usize) -> i32 {
        if self.over_in[c] == 3 {
            1
        } else {
            -1
        }
    }

    pub fn writhe(&self) -> i64 {
        (0..self.crossings.len()).map(|c| self.sign(c) as i64).sum()
    }

    /// Signed count of crossings of component `k` with itself.
    pub fn self_writhe(&self, k: usize) -> i64 {
        (0..self.crossings.len()).filter(|&c| self.crossing_components(c) == (k, k)).map(|c| self.sign(c) as i64).sum()
    }

    /// Linking numbers between knotted components (zero diagonal); extras
    /// contribute zero rows and columns.
    pub fn linking_numbers(&self) -> Vec<Vec<i64>> {
        let n = self.num_components();
        let mut twice = vec![vec![0i64; n]; n];
        for c in 0..self.crossings.len() {
            let (a, b) = self.crossing_components(c);
            if a != b {
                twice[a][b] += self.sign(c) as i64;
                twice[b][a] += self.sign(c) as i64;
            }
        }
        twice.iter().map(|r| r.iter().map(|x| x / 2).collect()).collect()
    }

    /// The other end of the arc leaving position `p`.
    pub fn across(&self, p: Position) -> Position {
        let label = self.crossings[p.0][p.1];
        for (c, x) in self.crossings.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                if l == label && (c, s) != p {
                    return (c, s);
                }
            }
        }
        unreachable!("validated diagram has every label twice")
    }

    /// Table of [`Self::across`] for every position, indexed `4 * c + s`.
    pub fn across_table(&self) -> Vec<Position> {
        let mut first: BTreeMap<u32, Position> = BTreeMap::new();
        let mut out = vec![(0, 0); 4 * self.crossings.len()];
        for (c, x) in self.crossings.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                if let Some(&q) = first.get(&l) {
                    out[4 * c + s] = q;
                    out[4 * q.0 + q.1] = (c, s);
                } else {
                    first.insert(l, (c, s));
                }
            }
        }
        out
    }

    /// Faces of the projection as cycles of corners. Corner `(c, s)` is the
    /// region between slots `s` and `s + 1` at crossing `c`.
    pub fn faces(&self) -> Vec<Vec<Position>> {
        let across = self.across_table();
        let n = self.crossings.len();
        let mut seen = vec![false; 4 * n];
        let mut faces = Vec::new();
        for start in 0..4 * n {
            if seen[start] {
                continue;
            }
            let mut face = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                let (c, s) = (k / 4, k % 4);
                face.push((c, s));
                let q = across[4 * c + (s + 1) % 4];
                k = 4 * q.0 + q.1;
            }
            faces.push(face);
        }
        faces
    }

    /// Connected pieces of the crossing graph, as a label per crossing.
    pub fn pieces(&self) -> (Vec<usize>, usize) {
        let n = self.crossings.len();
        let across = self.across_table();
        let mut piece = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if piece[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            piece[s] = count;
            while let Some(c) = stack.pop() {
                for slot in 0..4 {
                    let d = across[4 * c + slot].0;
                    if piece[d] == usize::MAX {
                        piece[d] = count;
                        stack.push(d);
                    }
                }
            }
            count += 1;
        }
        (piece, count)
    }

    pub fn is_connected(&self) -> bool {
        self.pieces().1 <= 1 && (self.unknotted_extras == 0 || self.crossings.is_empty() && self.unknotted_extras == 1)
    }

    fn check_planar(&self) -> Result<(), DiagramError> {
        let v = self.crossings.len() as i64;
        let f = self.faces().len() as i64;
        let pieces = self.pieces().1 as i64;
        let chi = v - 2 * v + f;
        if chi != 2 * pieces {
            return Err(DiagramError::Nonplanar { chi: chi - 2 * (pieces - 1) });
        }
        Ok(())
    }

    /// Every crossing switched. Arc labels and orientations are kept, so the
    /// component structure is unchanged and every sign flips.
    pub fn mirror(&self) -> LinkDiagram {
        let crossings = self
            .crossings
            .iter()
            .enumerate()
            .map(|(c, &[i, j, k, l])| if self.over_in[c] == 3 { [l, i, j, k] } else { [j, k, l, i] })
            .collect();
        LinkDiagram::new(crossings, self.unknotted_extras).expect("mirror of a valid diagram")
    }

    /// Canonical text form, `X(i,j,k,l)` separated by spaces.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (n, x) in self.crossings.iter().enumerate() {
            if n > 0 {
                s.push(' ');
            }
            let _ = write!(s, "X({},{},{},{})", x[0], x[1], x[2], x[3]);
        }
        s
    }

    /// Same diagram with labels renumbered `1..` along components in order.
    pub fn relabel_sequential(&self) -> LinkDiagram {
        let mut map = BTreeMap::new();
        let mut next = 1u32;
        for comp in &self.components {
            for &a in comp {
                map.insert(a, next);
                next += 1;
            }
        }
        let crossings = self.crossings.iter().map(|x| x.map(|l| map[&l])).collect();
        LinkDiagram::new(crossings, self.unknotted_extras).expect("relabelling keeps validity")
    }

    /// Largest arc label in use (0 when there are no crossings).
    pub fn max_label(&self) -> u32 {
        self.crossings.iter().flat_map(|x| x.iter().copied()).max().unwrap_or(0)
    }
}

impl LinkDiagram {
    /// Builds a diagram from crossings whose under-strand occupies slots 0
    /// and 2 in either direction. Each component is traced once and the
    /// tuples are rotated so that the under-strand enters at slot 0.
    pub fn from_unoriented(mut crossings: Vec<[u32; 4]>, unknotted_extras: usize) -> Result<Self, DiagramError> {
        let mut at: BTreeMap<u32, Vec<Position>> = BTreeMap::new();
        for (c, x) in crossings.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                at.entry(l).or_default().push((c, s));
            }
        }
        if let Some((&label, p)) = at.iter().find(|(_, p)| p.len() != 2) {
            return Err(DiagramError::LabelCount { label, count: p.len() });
        }
        let mut flip = vec![false; crossings.len()];
        let mut seen: BTreeMap<u32, bool> = BTreeMap::new();
        for (&start, ps) in at.iter() {
            if seen.contains_key(&start) {
                continue;
            }
            let mut leave = ps[0];
            loop {
                let label = crossings[leave.0][leave.1];
                if seen.insert(label, true).is_some() {
                    break;
                }
                let both = &at[&label];
                let arrive = if both[0] == leave { both[1] } else { both[0] };
                if arrive.1 % 2 == 0 {
                    flip[arrive.0] = arrive.1 == 2;
                }
                leave = (arrive.0, arrive.1 ^ 2);
            }
        }
        for (x, f) in crossings.iter_mut().zip(flip) {
            if f {
                x.rotate_left(2);
            }
        }
        LinkDiagram::new(crossings, unknotted_extras)
    }
}

/// Builds a crossing tuple from the oriented strands through it.
pub fn crossing_tuple(under_in: u32, under_out: u32, over_in: u32, over_out: u32, positive: bool) -> [u32; 4] {
    if positive {
        [under_in, over_out, under_out, over_in]
    } else {
        [under_in, over_in, under_out, over_out]
    }
}

/// Parses a PD code such as `X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)`. Brackets may
/// be round or square, and an enclosing `PD[...]` is accepted.
pub fn parse_pd(text: &str) -> Result<LinkDiagram, DiagramError> {
    parse_pd_with_extras(text, 0)
}

pub fn parse_pd_with_extras(text: &str, unknotted_extras: usize) -> Result<LinkDiagram, DiagramError> {
    LinkDiagram::new(parse_tuples(text)?, unknotted_extras)
}

fn parse_tuples(text: &str) -> Result<Vec<[u32; 4]>, DiagramError> {
    let b = text.as_bytes();
    let mut pos = 0;
    let err = |pos: usize, msg: &str| DiagramError::Malformed { pos, msg: msg.to_string() };
    let skip = |pos: &mut usize| {
        while *pos < b.len() && (b[*pos].is_ascii_whitespace() || b[*pos] == b',') {
            *pos += 1;
        }
    };
    skip(&mut pos);
    let mut wrapped = false;
    if text[pos..].starts_with("PD") {
        pos += 2;
        if pos < b.len() && (b[pos] == b'[' || b[pos] == b'(') {
            pos += 1;
            wrapped = true;
        } else {
            return Err(err(pos, "expected bracket after PD"));
        }
    }
    let mut out = Vec::new();
    loop {
        skip(&mut pos);
        if pos == b.len() {
            if wrapped {
                return Err(err(pos, "unclosed PD bracket"));
            }
            break;
        }
        if wrapped && (b[pos] == b']' || b[pos] == b')') {
            pos += 1;
            skip(&mut pos);
            if pos != b.len() {
                return Err(err(pos, "trailing input"));
            }
            break;
        }
        if b[pos] != b'X' {
            return Err(err(pos, "expected X"));
        }
        pos += 1;
        let close = match b.get(pos) {
            Some(b'(') => b')',
            Some(b'[') => b']',
            _ => return Err(err(pos, "expected ( or [")),
        };
        pos += 1;
        let mut tuple = [0u32; 4];
        for (k, slot) in tuple.iter_mut().enumerate() {
            while pos < b.len() && b[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < b.len() && b[pos].is_ascii_digit() {
                pos += 1;
            }
            if start == pos {
                return Err(err(pos, "expected a nonnegative integer"));
            }
            *slot = text[start..pos].parse().map_err(|_| err(start, "label out of range"))?;
            while pos < b.len() && b[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let want = if k == 3 { close } else { b',' };
            if b.get(pos) != Some(&want) {
                return Err(err(pos, if k == 3 { "expected closing bracket" } else { "expected comma" }));
            }
            pos += 1;
        }
        out.push(tuple);
    }
    Ok(out)
}
