//! Local moves (2-3, 3-2, 4-4, 2-0 and removal of order-one edges) and a
//! seeded greedy simplifier built from them.
//!
//! The 2-3, 3-2 and 4-4 moves are all instances of one operation: replace a
//! set of tetrahedra filling a ball by another triangulation of the same
//! ball. Tetrahedra of both sides are described by local vertex labels, so
//! faces are matched by their label sets. Peripheral flows are copied on the
//! ball's boundary and re-solved inside it.

use super::perm::{Perm, EDGE_BETWEEN_VERTICES, ONE_VERTEX_AT_EDGE, OTHER_VERTEX_AT_EDGE, REMAINING_FACE};
use super::{IdealTriangulation, Tetrahedron};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, VecDeque};

#[derive(Debug, Clone)]
pub struct SimplifyOptions {
    pub seed: u64,
    /// Upper bound on the number of moves attempted.
    pub max_moves: usize,
    /// Randomisation rounds without improvement before giving up.
    pub patience: usize,
}

impl Default for SimplifyOptions {
    fn default() -> Self {
        SimplifyOptions { seed: 0, max_moves: 10_000, patience: 24 }
    }
}

impl SimplifyOptions {
    pub fn with_seed(seed: u64) -> Self {
        SimplifyOptions { seed, ..Default::default() }
    }
}

type Labels = [u8; 4];

fn face_key(l: &Labels, f: usize) -> [u8; 3] {
    let mut k = [0u8; 3];
    let mut i = 0;
    for (v, &x) in l.iter().enumerate() {
        if v != f {
            k[i] = x;
            i += 1;
        }
    }
    k.sort();
    k
}

/// Permutation sending vertex `v` of a tetrahedron labelled `from` to the
/// vertex of `to` carrying the same label; the unmatched vertex (face `f`)
/// goes to face `g`.
fn match_labels(from: &Labels, f: usize, to: &Labels, g: usize) -> Perm {
    let mut img = [0u8; 4];
    for v in 0..4 {
        img[v] = if v == f { g as u8 } else { to.iter().position(|&x| x == from[v]).unwrap() as u8 };
    }
    Perm::new(img)
}

enum FaceKind {
    Internal { tet: usize, face: usize },
    External { old: usize, face: usize, sigma: Perm },
}

/// Replaces tetrahedra `old` (with vertex labels `old_labels`) by new
/// tetrahedra with vertex labels `new_labels`. Returns `None` if the data do
/// not describe two triangulations of a common ball.
fn retriangulate(
    tri: &IdealTriangulation,
    old: &[usize],
    old_labels: &[Labels],
    new_labels: &[Labels],
) -> Option<IdealTriangulation> {
    let mut distinct = old.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != old.len() {
        return None;
    }
    let slot_of_old: BTreeMap<usize, usize> = old.iter().enumerate().map(|(i, &t)| (t, i)).collect();

    // boundary faces of the old region: label sets seen once
    let mut old_faces: BTreeMap<[u8; 3], Vec<(usize, usize)>> = BTreeMap::new();
    for (i, l) in old_labels.iter().enumerate() {
        for f in 0..4 {
            old_faces.entry(face_key(l, f)).or_default().push((i, f));
        }
    }
    let mut new_labels = new_labels.to_vec();
    let mut new_faces: BTreeMap<[u8; 3], Vec<(usize, usize)>> = BTreeMap::new();
    for (j, l) in new_labels.iter().enumerate() {
        for f in 0..4 {
            new_faces.entry(face_key(l, f)).or_default().push((j, f));
        }
    }
    // the two sides must have the same boundary
    let boundary = |m: &BTreeMap<[u8; 3], Vec<(usize, usize)>>| -> Vec<[u8; 3]> {
        m.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect()
    };
    if boundary(&old_faces) != boundary(&new_faces) || new_faces.values().any(|v| v.len() > 2) {
        return None;
    }

    let kind_of = |labels: &[Labels], j: usize, f: usize| -> FaceKind {
        let key = face_key(&labels[j], f);
        let users: Vec<(usize, usize)> = (0..labels.len())
            .flat_map(|a| (0..4).map(move |b| (a, b)))
            .filter(|&(a, b)| face_key(&labels[a], b) == key)
            .collect();
        if users.len() == 2 {
            let &(jj, ff) = users.iter().find(|&&(a, b)| (a, b) != (j, f)).unwrap();
            FaceKind::Internal { tet: jj, face: ff }
        } else {
            let (i, g) = old_faces[&key][0];
            FaceKind::External { old: i, face: g, sigma: match_labels(&labels[j], f, &old_labels[i], g) }
        }
    };

    // orient every new tetrahedron consistently with its surroundings
    for j in 0..new_labels.len() {
        let f = (0..4).find(|&f| new_faces[&face_key(&new_labels[j], f)].len() == 1)?;
        if let FaceKind::External { old: i, face: g, sigma } = kind_of(&new_labels, j, f) {
            if !sigma.then(tri.tets[old[i]].gluing[g]).is_odd() {
                new_labels[j].swap(2, 3);
            }
        }
    }

    let base = tri.tets.len();
    let mut out = tri.clone();
    let mut fresh = vec![Tetrahedron::blank(); new_labels.len()];
    let mut ext_sigma: Vec<[ExtGluing; 4]> = vec![[None; 4]; new_labels.len()];
    for j in 0..new_labels.len() {
        for f in 0..4 {
            match kind_of(&new_labels, j, f) {
                FaceKind::Internal { tet, face } => {
                    let g = match_labels(&new_labels[j], f, &new_labels[tet], face);
                    if !g.is_odd() {
                        return None;
                    }
                    fresh[j].neighbor[f] = base + tet;
                    fresh[j].gluing[f] = g;
                }
                FaceKind::External { old: i, face: g, sigma } => {
                    ext_sigma[j][f] = Some((i, g, sigma));
                    let src = &tri.tets[old[i]];
                    for v in (0..4).filter(|&v| v != f) {
                        fresh[j].cusp[v] = src.cusp[sigma.at(v)];
                        for c in 0..2 {
                            fresh[j].curve[c][v][f] = src.curve[c][sigma.at(v)][g];
                        }
                    }
                }
            }
        }
    }
    // outer gluings, after every new tetrahedron has its boundary data
    for j in 0..new_labels.len() {
        for f in 0..4 {
            let Some((i, g, sigma)) = ext_sigma[j][f] else { continue };
            let src = &tri.tets[old[i]];
            let (u, gg) = (src.neighbor[g], src.gluing[g]);
            let through = sigma.then(gg);
            if let Some(&i2) = slot_of_old.get(&u) {
                // glued to another face of the region; find its new owner
                let g2 = through.at(f);
                let (j2, f2, s2) = (0..new_labels.len()).flat_map(|a| (0..4).map(move |b| (a, b))).find_map(
                    |(a, b)| match ext_sigma[a][b] {
                        Some((ii, gg2, s)) if ii == i2 && gg2 == g2 => Some((a, b, s)),
                        _ => None,
                    },
                )?;
                let _ = f2;
                fresh[j].neighbor[f] = base + j2;
                fresh[j].gluing[f] = through.then(s2.inverse());
            } else {
                fresh[j].neighbor[f] = u;
                fresh[j].gluing[f] = through;
                out.tets[u].neighbor[through.at(f)] = base + j;
                out.tets[u].gluing[through.at(f)] = through.inverse();
            }
        }
    }
    out.tets.extend(fresh);
    solve_interior_flows(&mut out, base, &ext_sigma)?;
    out.remove_tets(old);
    Some(out)
}

/// Gluing of a face to the outside: `(tetrahedron, face, permutation)`.
type ExtGluing = Option<(usize, usize, Perm)>;

/// Fills in flows on interior sides of the new tetrahedra `base..` so that
/// every corner triangle is balanced. Uses a spanning forest of the interior
/// sides and leaves non-tree sides at zero.
fn solve_interior_flows(tri: &mut IdealTriangulation, base: usize, ext: &[[ExtGluing; 4]]) -> Option<()> {
    let m = ext.len();
    let node = |j: usize, v: usize| 4 * j + v;
    let mut adj: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); 4 * m]; // (other node, face here, face there)
    for j in 0..m {
        for f in 0..4 {
            if ext[j][f].is_some() {
                continue;
            }
            let nt = tri.tets[base + j].neighbor[f] - base;
            let g = tri.tets[base + j].gluing[f];
            for v in (0..4).filter(|&v| v != f) {
                adj[node(j, v)].push((node(nt, g.at(v)), f, g.at(f)));
            }
        }
    }
    for c in 0..2 {
        let mut visited = vec![false; 4 * m];
        for root in 0..4 * m {
            if visited[root] {
                continue;
            }
            // BFS order with parent links
            let mut order = Vec::new();
            let mut parent: BTreeMap<usize, (usize, usize, usize)> = BTreeMap::new();
            let mut queue = VecDeque::from([root]);
            visited[root] = true;
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &(w, f_here, f_there) in &adj[u] {
                    if !visited[w] {
                        visited[w] = true;
                        // w reached from u: side f_there of w is glued to side f_here of u
                        parent.insert(w, (u, f_there, f_here));
                        queue.push_back(w);
                    }
                }
            }
            // net inflow still missing at each node
            let mut need: BTreeMap<usize, i32> = BTreeMap::new();
            for &u in &order {
                let (j, v) = (u / 4, u % 4);
                let s: i32 = (0..4).filter(|&f| f != v).map(|f| tri.tets[base + j].curve[c][v][f]).sum();
                need.insert(u, -s);
            }
            for &u in order.iter().rev() {
                let Some(&(p, f_u, f_p)) = parent.get(&u) else { continue };
                let x = need[&u];
                let (j, v) = (u / 4, u % 4);
                let (pj, pv) = (p / 4, p % 4);
                tri.tets[base + j].curve[c][v][f_u] += x;
                tri.tets[base + pj].curve[c][pv][f_p] -= x;
                *need.get_mut(&p).unwrap() += x;
                need.insert(u, 0);
            }
            if need[&root] != 0 {
                return None;
            }
        }
    }
    Some(())
}

/// 2-3 move across face `f` of tetrahedron `t`.
pub(crate) fn two_to_three(tri: &IdealTriangulation, t: usize, f: usize) -> Option<IdealTriangulation> {
    let u = tri.tets[t].neighbor[f];
    if u == t {
        return None;
    }
    let g = tri.tets[t].gluing[f];
    // labels: 0 = apex of t, 1 = apex of u, 2..4 = the shared face
    let mut lt = [0u8; 4];
    let mut lu = [0u8; 4];
    lt[f] = 0;
    lu[g.at(f)] = 1;
    let mut k = 2;
    for v in (0..4).filter(|&v| v != f) {
        lt[v] = k;
        lu[g.at(v)] = k;
        k += 1;
    }
    let new = [[0, 1, 3, 4], [0, 1, 4, 2], [0, 1, 2, 3]];
    retriangulate(tri, &[t, u], &[lt, lu], &new)
}

/// Tetrahedra and local labels around an edge class, walking as in
/// [`IdealTriangulation::edge_classes`]: labels 0 and 1 are the edge's ends,
/// labels `2 + i` run around the equator.
fn around_edge(tri: &IdealTriangulation, t0: usize, e0: usize) -> (Vec<usize>, Vec<Labels>) {
    let (mut t, mut a, mut b) = (t0, ONE_VERTEX_AT_EDGE[e0], OTHER_VERTEX_AT_EDGE[e0]);
    let mut c = REMAINING_FACE[a][b];
    let mut d = REMAINING_FACE[b][a];
    let mut tets = Vec::new();
    let mut labels = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut i = 0u8;
    while seen.insert((t, EDGE_BETWEEN_VERTICES[a][b])) {
        let mut l = [0u8; 4];
        l[a] = 0;
        l[b] = 1;
        l[c] = 2 + i;
        l[d] = 2 + i + 1;
        tets.push(t);
        labels.push(l);
        let g = tri.tets[t].gluing[c];
        let nt = tri.tets[t].neighbor[c];
        (t, a, b, c, d) = (nt, g.at(a), g.at(b), g.at(d), g.at(c));
        i += 1;
    }
    // close the equator: the last label wraps to the first
    let n = labels.len() as u8;
    for l in labels.iter_mut() {
        for x in l.iter_mut() {
            if *x >= 2 {
                *x = 2 + (*x - 2) % n;
            }
        }
    }
    (tets, labels)
}

/// 3-2 move removing an edge of order three.
pub(crate) fn three_to_two(tri: &IdealTriangulation, t: usize, e: usize) -> Option<IdealTriangulation> {
    let (tets, labels) = around_edge(tri, t, e);
    if tets.len() != 3 {
        return None;
    }
    retriangulate(tri, &tets, &labels, &[[0, 2, 3, 4], [1, 2, 4, 3]])
}

/// 4-4 move on an edge of order four, switching to the axis through
/// equator labels `2 + k` and `4 + k` (`k` is 0 or 1).
pub(crate) fn four_to_four(tri: &IdealTriangulation, t: usize, e: usize, k: u8) -> Option<IdealTriangulation> {
    let (tets, labels) = around_edge(tri, t, e);
    if tets.len() != 4 {
        return None;
    }
    let (p, q) = (2 + k, 4 + k);
    let (r, s) = (3 + k, 2 + (k + 3) % 4);
    let new = [[p, q, 0, r], [p, q, r, 1], [p, q, 1, s], [p, q, s, 0]];
    retriangulate(tri, &tets, &labels, &new)
}

/// Unit circulation of flow around an edge class, at the end that sits at
/// vertex `a` of edge `(a, b)` in tetrahedron `t`.
fn circulation(tri: &IdealTriangulation, t0: usize, a0: usize, b0: usize) -> Vec<[[i32; 4]; 4]> {
    let mut flow = vec![[[0i32; 4]; 4]; tri.tets.len()];
    let (mut t, mut a, mut b) = (t0, a0, b0);
    let mut c = REMAINING_FACE[a][b];
    let mut d = REMAINING_FACE[b][a];
    let mut seen = std::collections::BTreeSet::new();
    while seen.insert((t, a, b)) {
        flow[t][a][d] += 1;
        flow[t][a][c] -= 1;
        let g = tri.tets[t].gluing[c];
        let nt = tri.tets[t].neighbor[c];
        (t, a, b, c, d) = (nt, g.at(a), g.at(b), g.at(d), g.at(c));
    }
    flow
}

/// 2-0 move: removes the two tetrahedra around an edge of order two and
/// glues their outer faces together.
pub(crate) fn cancel_pair(tri: &IdealTriangulation, t0: usize, e: usize) -> Option<IdealTriangulation> {
    let v0 = [
        ONE_VERTEX_AT_EDGE[e],
        OTHER_VERTEX_AT_EDGE[e],
        REMAINING_FACE[OTHER_VERTEX_AT_EDGE[e]][ONE_VERTEX_AT_EDGE[e]],
        REMAINING_FACE[ONE_VERTEX_AT_EDGE[e]][OTHER_VERTEX_AT_EDGE[e]],
    ];
    let a = &tri.tets[t0];
    let t1 = a.neighbor[v0[2]];
    if t1 == t0 || a.neighbor[v0[3]] != t1 || a.gluing[v0[2]] != a.gluing[v0[3]] {
        return None;
    }
    let g = a.gluing[v0[2]];
    let v1 = v0.map(|v| g.at(v));
    for (t, v) in [(t0, &v0), (t1, &v1)] {
        for i in 0..2 {
            let n = tri.tets[t].neighbor[v[i]];
            if n == t0 || n == t1 {
                return None;
            }
        }
    }
    let edges = tri.edge_classes();
    let outer0 = edges.class_of[t0][EDGE_BETWEEN_VERTICES[v0[2]][v0[3]]];
    let outer1 = edges.class_of[t1][EDGE_BETWEEN_VERTICES[v1[2]][v1[3]]];
    if outer0 == outer1 {
        return None;
    }

    let mut out = tri.clone();
    // Make the flow through the pillow's outer faces balanced by adding
    // circulations around the outer edge of t1 at both of its ends.
    let defect = |flow: &dyn Fn(usize, usize, usize) -> i64, j: usize| -> i64 {
        flow(t1, v1[j + 2], v1[0]) + flow(t0, v0[j + 2], v0[0])
    };
    let circ = [circulation(tri, t1, v1[2], v1[3]), circulation(tri, t1, v1[3], v1[2])];
    let mut effect = [[0i64; 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let cf = &circ[k];
            effect[j][k] = defect(&|t, v, f| cf[t][v][f] as i64, j);
        }
    }
    let det = effect[0][0] * effect[1][1] - effect[0][1] * effect[1][0];
    for c in 0..2 {
        let cur = |t: usize, v: usize, f: usize| tri.tets[t].curve[c][v][f] as i64;
        let d = [defect(&cur, 0), defect(&cur, 1)];
        if d == [0, 0] {
            continue;
        }
        if det == 0 {
            return None;
        }
        // solve effect * k = -d
        let k0 = -(d[0] * effect[1][1] - d[1] * effect[0][1]);
        let k1 = -(effect[0][0] * d[1] - effect[1][0] * d[0]);
        if k0 % det != 0 || k1 % det != 0 {
            return None;
        }
        let k = [k0 / det, k1 / det];
        for (kk, cf) in k.iter().zip(&circ) {
            for (t, tet) in out.tets.iter_mut().enumerate() {
                for v in 0..4 {
                    for f in 0..4 {
                        tet.curve[c][v][f] += (*kk as i32) * cf[t][v][f];
                    }
                }
            }
        }
    }

    for i in 0..2 {
        let mut nbr = [0usize; 2];
        let mut w = [[0usize; 4]; 2];
        for (j, (t, v)) in [(t0, &v0), (t1, &v1)].into_iter().enumerate() {
            nbr[j] = out.tets[t].neighbor[v[i]];
            let gl = out.tets[t].gluing[v[i]];
            w[j] = v.map(|x| gl.at(x));
        }
        for j in 0..2 {
            let mut img = [0u8; 4];
            for k in 0..4 {
                img[w[j][k]] = w[1 - j][k] as u8;
            }
            out.tets[nbr[j]].neighbor[w[j][i]] = nbr[1 - j];
            out.tets[nbr[j]].gluing[w[j][i]] = Perm::new(img);
        }
    }
    out.remove_tets(&[t0, t1]);
    Some(out)
}

/// Removes an edge of order one by a 2-3 move on a face opposite one of its
/// ends, followed by cancelling the resulting pair.
fn remove_order_one(tri: &IdealTriangulation, t: usize, e: usize) -> Option<IdealTriangulation> {
    for f in [ONE_VERTEX_AT_EDGE[e], OTHER_VERTEX_AT_EDGE[e]] {
        let Some(mid) = two_to_three(tri, t, f) else { continue };
        // the edge now has order two; find it among the new tetrahedra
        let edges = mid.edge_classes();
        for members in &edges.members {
            if members.len() != 2 {
                continue;
            }
            let s = members[0];
            if s.tet + 3 < mid.tets.len() {
                continue;
            }
            if let Some(done) = cancel_pair(&mid, s.tet, s.edge) {
                if done.tets.len() < tri.tets.len() {
                    return Some(done);
                }
            }
        }
    }
    None
}

fn is_sound(t: &IdealTriangulation) -> bool {
    t.check_gluings().is_ok() && t.check_curves().is_ok() && t.edge_classes().len() == t.tets.len()
}

/// One pass of size-reducing moves; returns true if something changed.
fn reduce_once(tri: &mut IdealTriangulation, moves: &mut usize) -> bool {
    let edges = tri.edge_classes();
    for members in &edges.members {
        let s = members[0];
        let attempt = match members.len() {
            1 => remove_order_one(tri, s.tet, s.edge),
            2 => cancel_pair(tri, s.tet, s.edge),
            3 => three_to_two(tri, s.tet, s.edge),
            _ => None,
        };
        *moves += 1;
        if let Some(next) = attempt {
            if next.tets.len() < tri.tets.len() && is_sound(&next) {
                *tri = next;
                return true;
            }
        }
    }
    false
}

fn reduce(tri: &mut IdealTriangulation, moves: &mut usize, budget: usize) {
    while *moves < budget && reduce_once(tri, moves) {}
}

/// Applies `count` random 2-3 or 4-4 moves.
fn shake(tri: &mut IdealTriangulation, rng: &mut ChaCha8Rng, count: usize) {
    for _ in 0..count {
        let edges = tri.edge_classes();
        let fours: Vec<_> = edges.members.iter().filter(|m| m.len() == 4).map(|m| m[0]).collect();
        let next = if !fours.is_empty() && rng.gen_bool(0.5) {
            let s = *fours.choose(rng).unwrap();
            four_to_four(tri, s.tet, s.edge, rng.gen_range(0..2))
        } else {
            let t = rng.gen_range(0..tri.tets.len());
            two_to_three(tri, t, rng.gen_range(0..4))
        };
        if let Some(n) = next.filter(is_sound) {
            *tri = n;
        }
    }
}

/// Seeded greedy simplification. Deterministic for a fixed seed; never
/// returns a larger triangulation than its input.
pub fn simplify(t: &IdealTriangulation, opts: &SimplifyOptions) -> IdealTriangulation {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut moves = 0;
    let mut cur = t.clone();
    reduce(&mut cur, &mut moves, opts.max_moves);
    let mut best = cur.clone();
    let mut stale = 0;
    while moves < opts.max_moves && stale < opts.patience {
        let mut trial = best.clone();
        let kicks = 1 + rng.gen_range(0..=best.tets.len().min(8));
        shake(&mut trial, &mut rng, kicks);
        moves += kicks;
        reduce(&mut trial, &mut moves, opts.max_moves);
        if trial.tets.len() < best.tets.len() {
            best = trial;
            stale = 0;
        } else {
            stale += 1;
        }
    }
    best
}

/// Applies random 2-3 and 4-4 moves; used to produce equivalent but
/// different triangulations.
pub fn randomize(t: &IdealTriangulation, seed: u64, count: usize) -> IdealTriangulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = t.clone();
    shake(&mut out, &mut rng, count);
    out
}
