//! Cusp cross-sections: the triangulated tori linking each ideal vertex, the
//! peripheral curves drawn on them, and a tree/cotree basis of their
//! homology.
//!
//! A peripheral curve is stored as a flow: for each corner triangle
//! `(t, v)` and each of its sides (indexed by the face `f` containing it),
//! the net number of strands entering the triangle through that side.
//! Primal cycles run along triangle sides, between link vertices (edge ends).

use super::perm::{EDGE_BETWEEN_VERTICES, REMAINING_FACE};
use super::{IdealTriangulation, TriangulationError, LONGITUDE, MERIDIAN};
use std::collections::{BTreeMap, VecDeque};

/// Flow of a curve on the corner triangles of every tetrahedron.
pub type Flow = Vec<[[i32; 4]; 4]>;

/// A side of a corner triangle: tetrahedron, vertex, face.
pub type Side = (usize, usize, usize);

/// The triangulated torus at one cusp.
#[derive(Debug, Clone)]
pub struct CuspSection {
    pub cusp: usize,
    /// Corner triangles `(tet, vertex)` belonging to this cusp.
    pub triangles: Vec<(usize, usize)>,
    /// Each side once, as its two incarnations; the first is the canonical one.
    pub sides: Vec<[Side; 2]>,
    /// Endpoints of each side in canonical direction, as vertex indices.
    pub ends: Vec<[usize; 2]>,
    pub num_vertices: usize,
    pub euler_characteristic: i64,
    /// Meridian and longitude weights on each triangle's three sides,
    /// listed in increasing face order.
    pub meridian: Vec<[i32; 3]>,
    pub longitude: Vec<[i32; 3]>,
}

/// The two endpoints of a side, in the direction that keeps its own
/// triangle on the left.
pub(crate) fn side_direction(v: usize, f: usize) -> [usize; 2] {
    let a = REMAINING_FACE[v][f];
    let b = (0..4).find(|&w| w != v && w != f && w != a).unwrap();
    [a, b]
}

struct Complex {
    section: CuspSection,
    /// side index and whether the local side is the canonical incarnation
    side_of: BTreeMap<Side, (usize, bool)>,
    tri_index: BTreeMap<(usize, usize), usize>,
}

fn build(tri: &IdealTriangulation, cusp: usize) -> Complex {
    let edges = tri.edge_classes();
    let mut triangles = Vec::new();
    let mut tri_index = BTreeMap::new();
    for (t, tet) in tri.tets.iter().enumerate() {
        for v in 0..4 {
            if tet.cusp[v] == cusp as i32 {
                tri_index.insert((t, v), triangles.len());
                triangles.push((t, v));
            }
        }
    }
    let mut vertex_of_end = BTreeMap::new();
    let mut vertex = |t: usize, v: usize, w: usize| -> usize {
        let id = edges.end_id(t, EDGE_BETWEEN_VERTICES[v][w], v);
        let next = vertex_of_end.len();
        *vertex_of_end.entry(id).or_insert(next)
    };
    let mut sides = Vec::new();
    let mut ends = Vec::new();
    let mut side_of = BTreeMap::new();
    for &(t, v) in &triangles {
        for f in (0..4).filter(|&f| f != v) {
            if side_of.contains_key(&(t, v, f)) {
                continue;
            }
            let g = tri.tets[t].gluing[f];
            let other = (tri.tets[t].neighbor[f], g.at(v), g.at(f));
            let id = sides.len();
            side_of.insert((t, v, f), (id, true));
            side_of.insert(other, (id, false));
            sides.push([(t, v, f), other]);
            let [a, b] = side_direction(v, f);
            ends.push([vertex(t, v, a), vertex(t, v, b)]);
        }
    }
    let num_vertices = vertex_of_end.len();
    let euler_characteristic = num_vertices as i64 - sides.len() as i64 + triangles.len() as i64;
    let weights = |c: usize| -> Vec<[i32; 3]> {
        triangles
            .iter()
            .map(|&(t, v)| {
                let mut w = [0; 3];
                for (k, f) in (0..4).filter(|&f| f != v).enumerate() {
                    w[k] = tri.tets[t].curve[c][v][f];
                }
                w
            })
            .collect()
    };
    let section = CuspSection {
        cusp,
        meridian: weights(MERIDIAN),
        longitude: weights(LONGITUDE),
        triangles,
        sides,
        ends,
        num_vertices,
        euler_characteristic,
    };
    Complex { section, side_of, tri_index }
}

/// Homology basis of one cusp torus: two simple dual cycles and the
/// coordinates of the meridian and longitude in that basis.
#[derive(Debug, Clone)]
pub struct PeripheralBasis {
    pub cusp: usize,
    pub cycles: [Flow; 2],
    /// `meridian ~ meridian[0] * cycles[0] + meridian[1] * cycles[1]`.
    pub meridian: [i64; 2],
    pub longitude: [i64; 2],
    /// Signed intersection number of the meridian with the longitude.
    pub intersection: i64,
}

impl Complex {
    /// Flow of `flow` into the canonical triangle of side `s`.
    fn flow_across(&self, flow: &Flow, s: usize) -> i64 {
        let (t, v, f) = self.section.sides[s][0];
        flow[t][v][f] as i64
    }

    /// Pairing of a flow with a primal chain given per canonical side.
    fn pair(&self, flow: &Flow, chain: &[i64]) -> i64 {
        chain.iter().enumerate().map(|(s, &c)| c * self.flow_across(flow, s)).sum()
    }

    /// Primal chain homologous to a flow: each arc through a triangle is
    /// slid onto the corner it turns around.
    fn push_to_primal(&self, flow: &Flow) -> Vec<i64> {
        let n = self.section.sides.len();
        // half-side coefficients: [side][0 = tail half, 1 = head half], oriented mid -> end
        let mut half = vec![[0i64; 2]; n];
        for &(t, v) in &self.section.triangles {
            let fs: Vec<usize> = (0..4).filter(|&f| f != v).collect();
            let x = |k: usize| flow[t][v][fs[k]] as i64;
            for (b, y) in [(1usize, -x(1)), (2usize, -x(2))] {
                if y == 0 {
                    continue;
                }
                let (fa, fb) = (fs[0], fs[b]);
                let w = (0..4).find(|&w| w != v && w != fa && w != fb).unwrap();
                for (f, sign) in [(fa, 1i64), (fb, -1i64)] {
                    let (s, canonical) = self.side_of[&(t, v, f)];
                    let local = side_direction(v, f);
                    // position of w along the local direction, then in canonical terms
                    let at_head_local = local[1] == w;
                    let at_head = if canonical { at_head_local } else { !at_head_local };
                    half[s][usize::from(at_head)] += sign * y;
                }
            }
        }
        half.iter()
            .map(|h| {
                debug_assert_eq!(h[0], -h[1], "pushed-off chain must close up");
                h[1]
            })
            .collect()
    }
}

impl IdealTriangulation {
    /// Cross-section of cusp `cusp`, checked to be a connected torus.
    pub fn cusp_cross_section(&self, cusp: usize) -> Result<CuspSection, TriangulationError> {
        if cusp >= self.num_cusps {
            return Err(TriangulationError::NoSuchCusp(cusp));
        }
        let cx = build(self, cusp);
        if cx.section.euler_characteristic != 0 {
            return Err(TriangulationError::NotTorus { cusp, chi: cx.section.euler_characteristic });
        }
        Ok(cx.section)
    }

    /// Signed intersection number of two flows on a cusp torus.
    pub fn intersection_of(&self, cusp: usize, a: &Flow, b: &Flow) -> i64 {
        let cx = build(self, cusp);
        cx.pair(a, &cx.push_to_primal(b))
    }

    /// The stored peripheral curve `c` as a flow.
    pub fn curve_flow(&self, c: usize) -> Flow {
        self.tets.iter().map(|t| t.curve[c]).collect()
    }

    /// Tree/cotree homology bases for every cusp.
    pub fn peripheral_bases(&self) -> Result<Vec<PeripheralBasis>, TriangulationError> {
        (0..self.num_cusps).map(|k| self.peripheral_basis(k)).collect()
    }

    pub fn peripheral_basis(&self, cusp: usize) -> Result<PeripheralBasis, TriangulationError> {
        let cx = build(self, cusp);
        let sec = &cx.section;
        if sec.euler_characteristic != 0 {
            return Err(TriangulationError::NotTorus { cusp, chi: sec.euler_characteristic });
        }
        let nv = sec.num_vertices;
        let ns = sec.sides.len();
        let nt = sec.triangles.len();

        // primal BFS tree on link vertices
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for (s, e) in sec.ends.iter().enumerate() {
            adj[e[0]].push((s, e[1]));
            adj[e[1]].push((s, e[0]));
        }
        let mut in_tree = vec![false; ns];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
        let mut depth = vec![usize::MAX; nv];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &(s, w) in &adj[u] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some((s, u));
                    in_tree[s] = true;
                    queue.push_back(w);
                }
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(TriangulationError::NotTorus { cusp, chi: sec.euler_characteristic });
        }

        // dual BFS tree on triangles, avoiding primal tree sides
        let tri_of = |side: Side| cx.tri_index[&(side.0, side.1)];
        let mut dual_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nt];
        for (s, inc) in sec.sides.iter().enumerate() {
            if in_tree[s] {
                continue;
            }
            let (a, b) = (tri_of(inc[0]), tri_of(inc[1]));
            dual_adj[a].push((s, b));
            dual_adj[b].push((s, a));
        }
        let mut in_cotree = vec![false; ns];
        let mut dparent: Vec<Option<(usize, usize)>> = vec![None; nt];
        let mut ddepth = vec![usize::MAX; nt];
        ddepth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for &(s, w) in &dual_adj[u] {
                if ddepth[w] == usize::MAX {
                    ddepth[w] = ddepth[u] + 1;
                    dparent[w] = Some((s, u));
                    in_cotree[s] = true;
                    queue.push_back(w);
                }
            }
        }
        let leftover: Vec<usize> = (0..ns).filter(|&s| !in_tree[s] && !in_cotree[s]).collect();
        if leftover.len() != 2 {
            return Err(TriangulationError::NotTorus { cusp, chi: sec.euler_characteristic });
        }

        // P_x: primal cycle along x (canonical direction) closed through the tree
        let primal_cycle = |x: usize| -> Vec<i64> {
            let mut chain = vec![0i64; ns];
            chain[x] += 1;
            // walk from head back to tail through the tree: path(head -> root) - path(tail -> root)
            let climb = |mut u: usize, sign: i64, chain: &mut Vec<i64>| {
                while let Some((s, p)) = parent[u] {
                    // side s traversed from u to p
                    let dir = if sec.ends[s] == [u, p] { 1 } else { -1 };
                    chain[s] += sign * dir;
                    u = p;
                }
            };
            climb(sec.ends[x][1], 1, &mut chain);
            climb(sec.ends[x][0], -1, &mut chain);
            chain
        };

        // D_x: dual cycle crossing x from its canonical triangle, closed through the cotree
        let dual_cycle = |x: usize| -> Flow {
            let mut flow: Flow = vec![[[0; 4]; 4]; self.tets.len()];
            let cross = |flow: &mut Flow, s: usize, from_canonical: bool| {
                let [a, b] = sec.sides[s];
                let (exit, enter) = if from_canonical { (a, b) } else { (b, a) };
                flow[exit.0][exit.1][exit.2] -= 1;
                flow[enter.0][enter.1][enter.2] += 1;
            };
            cross(&mut flow, x, true);
            let start = tri_of(sec.sides[x][1]);
            let goal = tri_of(sec.sides[x][0]);
            // route start -> goal: up from start to the common ancestor, down to goal
            let path_up = |mut u: usize| {
                let mut p = vec![u];
                while let Some((_, w)) = dparent[u] {
                    p.push(w);
                    u = w;
                }
                p
            };
            let up_a = path_up(start);
            let up_b = path_up(goal);
            let mut common = 0;
            while common < up_a.len().min(up_b.len()) && up_a[up_a.len() - 1 - common] == up_b[up_b.len() - 1 - common]
            {
                common += 1;
            }
            let mut route: Vec<usize> = up_a[..up_a.len() - common + 1].to_vec();
            let down: Vec<usize> = up_b[..up_b.len() - common].iter().rev().copied().collect();
            route.extend(down);
            for w in route.windows(2) {
                let (u, next) = (w[0], w[1]);
                let s = if dparent[u].map(|p| p.1) == Some(next) {
                    dparent[u].unwrap().0
                } else {
                    dparent[next].unwrap().0
                };
                let from_canonical = tri_of(sec.sides[s][0]) == u && tri_of(sec.sides[s][1]) == next;
                cross(&mut flow, s, from_canonical);
            }
            flow
        };

        let (x, y) = (leftover[0], leftover[1]);
        let (px, py) = (primal_cycle(x), primal_cycle(y));
        let dx = dual_cycle(x);
        let dy = dual_cycle(y);
        let ix = cx.pair(&dx, &px);
        let iy = cx.pair(&dy, &py);
        debug_assert!(ix.abs() == 1 && iy.abs() == 1);
        debug_assert_eq!(cx.pair(&dx, &py), 0);
        debug_assert_eq!(cx.pair(&dy, &px), 0);

        let coords = |c: usize| -> [i64; 2] {
            let f = self.curve_flow(c);
            [cx.pair(&f, &px) * ix, cx.pair(&f, &py) * iy]
        };
        let meridian = coords(MERIDIAN);
        let longitude = coords(LONGITUDE);
        let intersection = cx.pair(&self.curve_flow(MERIDIAN), &cx.push_to_primal(&self.curve_flow(LONGITUDE)));
        Ok(PeripheralBasis { cusp, cycles: [dx, dy], meridian, longitude, intersection })
    }

    /// Checks that each cusp's meridian and longitude meet once.
    pub fn check_peripheral_curves(&self) -> Result<(), TriangulationError> {
        for b in self.peripheral_bases()? {
            if b.intersection.abs() != 1 {
                return Err(TriangulationError::Intersection { cusp: b.cusp, count: b.intersection });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;
    use crate::triangulate::octahedral_triangulation;

    const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";

    #[test]
    fn side_orientations_agree_across_gluings() {
        let t = octahedral_triangulation(&parse_pd(FIG8).unwrap()).unwrap();
        for (ti, tet) in t.tets.iter().enumerate() {
            for v in 0..4 {
                for f in (0..4).filter(|&f| f != v) {
                    let g = tet.gluing[f];
                    let [a, b] = side_direction(v, f);
                    let [c, d] = side_direction(g.at(v), g.at(f));
                    // the neighbour sees the same side traversed backwards
                    assert_eq!([g.at(a), g.at(b)], [d, c], "tet {ti} v {v} f {f}");
                }
            }
        }
    }

    #[test]
    fn figure_eight_section_is_torus() {
        let t = octahedral_triangulation(&parse_pd(FIG8).unwrap()).unwrap();
        let s = t.cusp_cross_section(0).unwrap();
        assert_eq!(s.euler_characteristic, 0);
        assert_eq!(s.triangles.len(), 4 * t.num_tetrahedra());
        assert!(t.cusp_cross_section(1).is_err());
    }

    #[test]
    fn meridian_meets_longitude_once() {
        for pd in [FIG8, "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)", "X(1,3,2,4) X(3,1,4,2)"] {
            let t = octahedral_triangulation(&parse_pd(pd).unwrap()).unwrap();
            for b in t.peripheral_bases().unwrap() {
                assert_eq!(b.intersection.abs(), 1, "{pd}");
                let det = b.meridian[0] * b.longitude[1] - b.meridian[1] * b.longitude[0];
                assert_eq!(det.abs(), 1, "{pd}");
                let m = t.curve_flow(MERIDIAN);
                assert_eq!(t.intersection_of(b.cusp, &m, &m), 0);
            }
        }
    }
}
