//! Ideal triangulations of link complements.
//!
//! Tetrahedra carry face pairings, cusp labels on their vertices and the
//! peripheral curves (meridian and longitude) as signed flows across the
//! sides of the vertex-link triangles: `curve[c][v][f]` is the net number
//! of strands of curve `c` entering the corner triangle at vertex `v`
//! through its side lying in face `f`.

mod cusp;
mod drill;
mod io;
mod link;
mod moves;
pub mod perm;

pub use cusp::{CuspSection, PeripheralBasis};
pub use link::octahedral_triangulation;
pub use moves::{randomize, simplify, SimplifyOptions};

use perm::{Perm, EDGE_BETWEEN_VERTICES, ONE_VERTEX_AT_EDGE, OTHER_VERTEX_AT_EDGE};
use thiserror::Error;

pub const MERIDIAN: usize = 0;
pub const LONGITUDE: usize = 1;

/// Marker for a vertex that is not (yet) known to be a cusp.
pub(crate) const FINITE: i32 = -1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("diagram is disconnected; a connected projection is required")]
    Disconnected,
    #[error("component {0} has no crossings")]
    CrosslessComponent(usize),
    #[error("diagram has no crossings")]
    Empty,
    #[error("face {face} of tetrahedron {tet} is not glued consistently")]
    BadGluing { tet: usize, face: usize },
    #[error("gluing on face {face} of tetrahedron {tet} reverses orientation")]
    OrientationReversing { tet: usize, face: usize },
    #[error("vertex link of cusp {cusp} has Euler characteristic {chi}, expected a torus")]
    NotTorus { cusp: usize, chi: i64 },
    #[error("vertex classes disagree about cusp labels")]
    CuspLabels,
    #[error("{edges} edge classes for {tets} tetrahedra")]
    EdgeCount { edges: usize, tets: usize },
    #[error("peripheral curve {curve} is not a cycle on tetrahedron {tet}")]
    BrokenCurve { tet: usize, curve: usize },
    #[error("meridian and longitude of cusp {cusp} meet {count} times algebraically")]
    Intersection { cusp: usize, count: i64 },
    #[error("cusp index {0} out of range")]
    NoSuchCusp(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tetrahedron {
    pub neighbor: [usize; 4],
    pub gluing: [Perm; 4],
    pub(crate) cusp: [i32; 4],
    pub curve: [[[i32; 4]; 4]; 2],
}

impl Tetrahedron {
    pub(crate) fn blank() -> Self {
        Tetrahedron {
            neighbor: [usize::MAX; 4],
            gluing: [Perm::IDENTITY; 4],
            cusp: [FINITE; 4],
            curve: [[[0; 4]; 4]; 2],
        }
    }

    /// Cusp index of vertex `v`.
    pub fn cusp_of(&self, v: usize) -> usize {
        debug_assert!(self.cusp[v] >= 0);
        self.cusp[v] as usize
    }
}

/// One member of an edge class: tetrahedron `tet`, edge index `edge`, and
/// whether the vertex `ONE_VERTEX_AT_EDGE[edge]` sits at the class's first end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSlot {
    pub tet: usize,
    pub edge: usize,
    pub aligned: bool,
}

#[derive(Debug, Clone)]
pub struct EdgeClasses {
    pub class_of: Vec<[usize; 6]>,
    pub aligned: Vec<[bool; 6]>,
    pub members: Vec<Vec<EdgeSlot>>,
}

impl EdgeClasses {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn order(&self, class: usize) -> usize {
        self.members[class].len()
    }

    /// Identifier of the end of an edge class sitting at vertex `v` of edge `e`
    /// of tetrahedron `t`: `2 * class + (0 | 1)`.
    pub fn end_id(&self, t: usize, e: usize, v: usize) -> usize {
        let first = if self.aligned[t][e] { ONE_VERTEX_AT_EDGE[e] } else { OTHER_VERTEX_AT_EDGE[e] };
        2 * self.class_of[t][e] + usize::from(v != first)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealTriangulation {
    pub tets: Vec<Tetrahedron>,
    pub(crate) num_cusps: usize,
}

impl IdealTriangulation {
    pub fn num_tetrahedra(&self) -> usize {
        self.tets.len()
    }

    pub fn num_cusps(&self) -> usize {
        self.num_cusps
    }

    /// Walks every edge class, recording members in cyclic order.
    pub fn edge_classes(&self) -> EdgeClasses {
        let n = self.tets.len();
        let mut class_of = vec![[usize::MAX; 6]; n];
        let mut aligned = vec![[true; 6]; n];
        let mut members = Vec::new();
        for t0 in 0..n {
            for e0 in 0..6 {
                if class_of[t0][e0] != usize::MAX {
                    continue;
                }
                let id = members.len();
                let mut list = Vec::new();
                let (mut t, mut a, mut b) = (t0, ONE_VERTEX_AT_EDGE[e0], OTHER_VERTEX_AT_EDGE[e0]);
                let mut c = perm::REMAINING_FACE[a][b];
                let mut d = perm::REMAINING_FACE[b][a];
                loop {
                    let e = EDGE_BETWEEN_VERTICES[a][b];
                    if class_of[t][e] != usize::MAX {
                        break;
                    }
                    class_of[t][e] = id;
                    aligned[t][e] = a == ONE_VERTEX_AT_EDGE[e];
                    list.push(EdgeSlot { tet: t, edge: e, aligned: aligned[t][e] });
                    let g = self.tets[t].gluing[c];
                    let nt = self.tets[t].neighbor[c];
                    let (na, nb, nc, nd) = (g.at(a), g.at(b), g.at(d), g.at(c));
                    t = nt;
                    a = na;
                    b = nb;
                    c = nc;
                    d = nd;
                }
                members.push(list);
            }
        }
        EdgeClasses { class_of, aligned, members }
    }

    /// Union-find over tetrahedron corners; returns the class of each corner
    /// and the number of classes.
    pub(crate) fn vertex_classes(&self) -> (Vec<[usize; 4]>, usize) {
        let n = self.tets.len();
        let mut parent: Vec<usize> = (0..4 * n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in 0..n {
            for f in 0..4 {
                let nt = self.tets[t].neighbor[f];
                let g = self.tets[t].gluing[f];
                for v in 0..4 {
                    if v == f {
                        continue;
                    }
                    let a = find(&mut parent, 4 * t + v);
                    let b = find(&mut parent, 4 * nt + g.at(v));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut label = vec![usize::MAX; 4 * n];
        let mut count = 0;
        let mut out = vec![[0usize; 4]; n];
        for t in 0..n {
            for v in 0..4 {
                let r = find(&mut parent, 4 * t + v);
                if label[r] == usize::MAX {
                    label[r] = count;
                    count += 1;
                }
                out[t][v] = label[r];
            }
        }
        (out, count)
    }

    /// Checks the combinatorial invariants: symmetric odd gluings, torus
    /// vertex links, as many edges as tetrahedra, and closed peripheral flows.
    pub fn validate(&self) -> Result<(), TriangulationError> {
        self.check_gluings()?;
        let edges = self.edge_classes();
        let (vclass, nv) = self.vertex_classes();
        let mut label_of_class = vec![i32::MIN; nv];
        for (t, tet) in self.tets.iter().enumerate() {
            for v in 0..4 {
                let c = vclass[t][v];
                if label_of_class[c] == i32::MIN {
                    label_of_class[c] = tet.cusp[v];
                } else if label_of_class[c] != tet.cusp[v] {
                    return Err(TriangulationError::CuspLabels);
                }
            }
        }
        let mut seen = vec![false; self.num_cusps];
        for &l in &label_of_class {
            if l < 0 || l as usize >= self.num_cusps || seen[l as usize] {
                return Err(TriangulationError::CuspLabels);
            }
            seen[l as usize] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(TriangulationError::CuspLabels);
        }
        // Euler characteristic of each vertex link: ends - sides + triangles
        let mut faces = vec![0i64; self.num_cusps];
        for tet in &self.tets {
            for v in 0..4 {
                faces[tet.cusp_of(v)] += 1;
            }
        }
        let mut ends = vec![0i64; self.num_cusps];
        for members in &edges.members {
            let s = members[0];
            let a = ONE_VERTEX_AT_EDGE[s.edge];
            let b = OTHER_VERTEX_AT_EDGE[s.edge];
            ends[self.tets[s.tet].cusp_of(a)] += 1;
            ends[self.tets[s.tet].cusp_of(b)] += 1;
        }
        for c in 0..self.num_cusps {
            let x = ends[c] - faces[c] * 3 / 2 + faces[c];
            if faces[c] % 2 != 0 || x != 0 {
                return Err(TriangulationError::NotTorus { cusp: c, chi: x });
            }
        }
        if edges.len() != self.tets.len() {
            return Err(TriangulationError::EdgeCount { edges: edges.len(), tets: self.tets.len() });
        }
        self.check_curves()?;
        Ok(())
    }

    pub(crate) fn check_gluings(&self) -> Result<(), TriangulationError> {
        let n = self.tets.len();
        for (t, tet) in self.tets.iter().enumerate() {
            for f in 0..4 {
                let nt = tet.neighbor[f];
                let g = tet.gluing[f];
                if nt >= n {
                    return Err(TriangulationError::BadGluing { tet: t, face: f });
                }
                let back = &self.tets[nt];
                let ff = g.at(f);
                if back.neighbor[ff] != t || back.gluing[ff] != g.inverse() || (nt == t && ff == f) {
                    return Err(TriangulationError::BadGluing { tet: t, face: f });
                }
                if !g.is_odd() {
                    return Err(TriangulationError::OrientationReversing { tet: t, face: f });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_curves(&self) -> Result<(), TriangulationError> {
        for (t, tet) in self.tets.iter().enumerate() {
            for c in 0..2 {
                for v in 0..4 {
                    let s: i32 = (0..4).filter(|&f| f != v).map(|f| tet.curve[c][v][f]).sum();
                    if s != 0 || tet.curve[c][v][v] != 0 {
                        return Err(TriangulationError::BrokenCurve { tet: t, curve: c });
                    }
                    for f in 0..4 {
                        if f == v {
                            continue;
                        }
                        let nt = tet.neighbor[f];
                        let g = tet.gluing[f];
                        if self.tets[nt].curve[c][g.at(v)][g.at(f)] != -tet.curve[c][v][f] {
                            return Err(TriangulationError::BrokenCurve { tet: t, curve: c });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Returns the same manifold with the opposite orientation: every
    /// tetrahedron has vertices 2 and 3 swapped, which conjugates all shapes.
    pub fn reflect(&self) -> IdealTriangulation {
        let s = Perm::new([0, 1, 3, 2]);
        let tets = self
            .tets
            .iter()
            .map(|tet| {
                let mut out = Tetrahedron::blank();
                for f in 0..4 {
                    let nf = s.at(f);
                    out.neighbor[nf] = tet.neighbor[f];
                    out.gluing[nf] = s.then(tet.gluing[f]).then(s);
                    out.cusp[nf] = tet.cusp[f];
                    for c in 0..2 {
                        for v in 0..4 {
                            // reversing orientation flips the meridian so that
                            // the pair keeps its right-handed convention
                            let sign = if c == MERIDIAN { -1 } else { 1 };
                            out.curve[c][s.at(v)][nf] = sign * tet.curve[c][v][f];
                        }
                    }
                }
                out
            })
            .collect();
        IdealTriangulation { tets, num_cusps: self.num_cusps }
    }

    /// Removes tetrahedra listed in `dead` (sorted or not), renumbering the rest.
    pub(crate) fn remove_tets(&mut self, dead: &[usize]) {
        let n = self.tets.len();
        let mut keep = vec![true; n];
        for &d in dead {
            keep[d] = false;
        }
        let mut new_index = vec![usize::MAX; n];
        let mut k = 0;
        for i in 0..n {
            if keep[i] {
                new_index[i] = k;
                k += 1;
            }
        }
        let mut tets = Vec::with_capacity(k);
        for (i, tet) in self.tets.drain(..).enumerate() {
            if keep[i] {
                tets.push(tet);
            }
        }
        for tet in tets.iter_mut() {
            for f in 0..4 {
                tet.neighbor[f] = new_index[tet.neighbor[f]];
            }
        }
        self.tets = tets;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    fn figure_eight() -> IdealTriangulation {
        let d = parse_pd("X(7,4,0,5) X(3,0,4,1) X(1,7,2,6) X(5,3,6,2)").unwrap();
        octahedral_triangulation(&d).unwrap()
    }

    #[test]
    fn edge_classes_partition_edges() {
        let t = figure_eight();
        let e = t.edge_classes();
        let total: usize = e.members.iter().map(|m| m.len()).sum();
        assert_eq!(total, 6 * t.num_tetrahedra());
        assert_eq!(e.len(), t.num_tetrahedra());
    }

    #[test]
    fn reflection_is_valid() {
        let t = figure_eight();
        let r = t.reflect();
        r.validate().unwrap();
        assert_eq!(r.reflect(), t);
    }
}
