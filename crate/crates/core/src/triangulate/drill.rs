//! Removal of finite vertices by drilling tubes along edges that join a
//! finite vertex to a vertex already attached to a real cusp.
//!
//! Finite vertices carry negative labels while drilling; once every finite
//! vertex has been matched to a real cusp the labels are rewritten.

use super::perm::{Perm, ONE_VERTEX_AT_EDGE, OTHER_VERTEX_AT_EDGE, REMAINING_FACE};
use super::{IdealTriangulation, Tetrahedron};
use std::collections::BTreeMap;

fn pairs(p: [(usize, usize); 4]) -> Perm {
    let mut img = [0u8; 4];
    for (a, b) in p {
        img[a] = b as u8;
    }
    Perm::new(img)
}

/// Inserts a triangular pillow with a tunnel into a face containing edge
/// `e` of tetrahedron `t`, joining the vertex links at the two ends of `e`.
/// The two new tetrahedra take the label of the edge's first vertex and
/// are appended at the end.
pub(crate) fn drill_tube(tri: &mut IdealTriangulation, t: usize, e: usize) {
    let v0 = ONE_VERTEX_AT_EDGE[e];
    let v1 = OTHER_VERTEX_AT_EDGE[e];
    let v2 = REMAINING_FACE[v1][v0];
    let f = REMAINING_FACE[v0][v1];

    let nbr = tri.tets[t].neighbor[f];
    let g = tri.tets[t].gluing[f];
    let ff = g.at(f);
    let (vv0, vv1, vv2) = (g.at(v0), g.at(v1), g.at(v2));

    let n0 = tri.tets.len();
    let n1 = n0 + 1;
    let swap12 = pairs([(0, 0), (1, 2), (2, 1), (3, 3)]);
    let swap01 = pairs([(0, 1), (1, 0), (2, 2), (3, 3)]);

    let mut a = Tetrahedron::blank();
    let mut b = Tetrahedron::blank();
    a.neighbor = [n1, usize::MAX, usize::MAX, n1];
    a.gluing = [swap12, Perm::IDENTITY, Perm::IDENTITY, swap01];
    b.neighbor = [n0, n1, n1, n0];
    b.gluing = [swap12, swap12, swap12, swap01];

    let old = &tri.tets[t];
    let label0 = old.cusp[v0];
    let label2 = old.cusp[v2];
    a.cusp = [label0, label0, label0, label2];
    b.cusp = a.cusp;

    for c in 0..2 {
        let s = old.curve[c][v0][f];
        a.curve[c][0][2] = -s;
        a.curve[c][0][1] = s;

        let s = old.curve[c][v1][f];
        a.curve[c][1][2] = -s;
        a.curve[c][1][0] = s;
        b.curve[c][2][0] = -s;
        b.curve[c][2][1] = s;
        b.curve[c][1][2] = -s;
        b.curve[c][1][0] = s;
        a.curve[c][2][0] = -s;
        a.curve[c][2][1] = s;

        let s = old.curve[c][v2][f];
        a.curve[c][3][2] = -s;
        a.curve[c][3][1] = s;
    }

    let to_a = pairs([(f, 2), (v0, 0), (v1, 1), (v2, 3)]);
    let nbr_to_a = pairs([(ff, 1), (vv0, 0), (vv1, 2), (vv2, 3)]);
    a.neighbor[2] = t;
    a.gluing[2] = to_a.inverse();
    a.neighbor[1] = nbr;
    a.gluing[1] = nbr_to_a.inverse();
    tri.tets.push(a);
    tri.tets.push(b);
    tri.tets[t].neighbor[f] = n0;
    tri.tets[t].gluing[f] = to_a;
    tri.tets[nbr].neighbor[ff] = n0;
    tri.tets[nbr].gluing[ff] = nbr_to_a;
}

/// Connects every finite vertex (negative label) to a real cusp by drilling,
/// then replaces the negative labels by the matched cusp labels.
pub(crate) fn remove_finite_vertices(tri: &mut IdealTriangulation) {
    let mut matching: BTreeMap<i32, i32> = BTreeMap::new();
    loop {
        let mut progress = false;
        let edges = tri.edge_classes();
        for members in &edges.members {
            let s = members[0];
            let (a, b) = (ONE_VERTEX_AT_EDGE[s.edge], OTHER_VERTEX_AT_EDGE[s.edge]);
            let la = tri.tets[s.tet].cusp[a];
            let lb = tri.tets[s.tet].cusp[b];
            let resolve = |l: i32, m: &BTreeMap<i32, i32>| if l >= 0 { Some(l) } else { m.get(&l).copied() };
            let (ra, rb) = (resolve(la, &matching), resolve(lb, &matching));
            match (ra, rb) {
                (None, Some(r)) => {
                    matching.insert(la, r);
                    drill_tube(tri, s.tet, s.edge);
                }
                (Some(r), None) => {
                    matching.insert(lb, r);
                    drill_tube(tri, s.tet, s.edge);
                }
                _ => continue,
            }
            progress = true;
            // edge classes are stale after a drill
            break;
        }
        if !progress {
            break;
        }
    }
    for tet in tri.tets.iter_mut() {
        for v in 0..4 {
            if tet.cusp[v] < 0 {
                tet.cusp[v] = matching[&tet.cusp[v]];
            }
        }
    }
    debug_assert!(tri.tets.iter().all(|t| t.cusp.iter().all(|&c| c >= 0)));
}
