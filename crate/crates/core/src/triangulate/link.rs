//! The four-tetrahedra-per-crossing triangulation of a link complement.
//!
//! Around each crossing sit four tetrahedra, one per quadrant, with vertex 0
//! at the south pole, vertex 1 at the north pole and vertices 2, 3 on the
//! link. Every face gluing swaps vertices 2 and 3. The two poles are
//! finite vertices that are drilled out afterwards.

use super::drill::remove_finite_vertices;
use super::perm::Perm;
use super::{IdealTriangulation, Tetrahedron, TriangulationError, LONGITUDE, MERIDIAN};
use crate::diagram::LinkDiagram;

const X: usize = 0;
const Y: usize = 1;
const BACK: usize = 0;
const FWD: usize = 1;

/// One crossing in the strand-oriented form used by the construction.
#[derive(Debug, Clone, Copy)]
struct Crossing {
    /// Clockwise half twist, i.e. a positive crossing with X on top.
    cl: bool,
    component: [usize; 2],
    /// `(crossing, strand)` reached by following strand `s` in direction `d`.
    neighbor: [[(usize, usize); 2]; 2],
}

impl Crossing {
    fn goes_over(&self, strand: usize) -> bool {
        if self.cl {
            strand == X
        } else {
            strand == Y
        }
    }
}

/// Adds a kink to the first arc of every component that never changes
/// between passing over and passing under, so each component has both.
fn add_kinks(d: &LinkDiagram) -> LinkDiagram {
    let mut crossings = d.crossings().to_vec();
    let mut next = d.max_label() + 1;
    for k in 0..d.num_knotted_components() {
        let mut over = false;
        let mut under = false;
        for c in 0..d.num_crossings() {
            let (u, o) = d.crossing_components(c);
            under |= u == k;
            over |= o == k;
        }
        if over && under {
            continue;
        }
        let a = d.component_arcs(k)[0];
        let head = (0..d.num_crossings())
            .flat_map(|c| [(c, 0), (c, d.over_in_slot(c))])
            .find(|&(c, s)| d.crossings()[c][s] == a)
            .expect("every arc has a head");
        let (b, e) = (next, next + 1);
        next += 2;
        crossings[head.0][head.1] = e;
        crossings.push([a, b, b, e]);
    }
    LinkDiagram::new(crossings, 0).expect("kinks keep the diagram valid")
}

fn to_strands(d: &LinkDiagram) -> Vec<Crossing> {
    let n = d.num_crossings();
    let across = d.across_table();
    // slot of strand (X or Y) at crossing c, entering and leaving
    let slots = |c: usize, strand: usize| -> (usize, usize) {
        let positive = d.over_in_slot(c) == 3;
        let over = (d.over_in_slot(c), d.over_in_slot(c) ^ 2);
        let is_over = (strand == X) == positive;
        if is_over {
            over
        } else {
            (0, 2)
        }
    };
    let strand_at = |c: usize, slot: usize| -> usize {
        let positive = d.over_in_slot(c) == 3;
        let is_over = slot % 2 == 1;
        if is_over == positive {
            X
        } else {
            Y
        }
    };
    (0..n)
        .map(|c| {
            let positive = d.over_in_slot(c) == 3;
            let (under, over) = d.crossing_components(c);
            let component = if positive { [over, under] } else { [under, over] };
            let mut neighbor = [[(0, 0); 2]; 2];
            for s in [X, Y] {
                let (i, o) = slots(c, s);
                let back = across[4 * c + i];
                let fwd = across[4 * c + o];
                neighbor[s][BACK] = (back.0, strand_at(back.0, back.1));
                neighbor[s][FWD] = (fwd.0, strand_at(fwd.0, fwd.1));
            }
            Crossing { cl: positive, component, neighbor }
        })
        .collect()
}

/// Triangulates the complement of a connected link diagram in which every
/// component has a crossing. The meridian and Seifert longitude of each
/// component are installed as peripheral curves.
pub fn octahedral_triangulation(d: &LinkDiagram) -> Result<IdealTriangulation, TriangulationError> {
    if d.num_crossings() == 0 {
        return Err(TriangulationError::Empty);
    }
    if d.unknotted_extras() > 0 {
        return Err(TriangulationError::CrosslessComponent(d.num_knotted_components()));
    }
    if d.pieces().1 != 1 {
        return Err(TriangulationError::Disconnected);
    }
    let d = add_kinks(d);
    let xs = to_strands(&d);
    let num_cusps = d.num_knotted_components();
    let n = xs.len();
    let tet = |c: usize, j: usize| 4 * c + j;
    let mut tets = vec![Tetrahedron::blank(); 4 * n];

    for (i, x) in xs.iter().enumerate() {
        let within: [[usize; 2]; 4] =
            if x.cl { [[1, 3], [0, 2], [3, 1], [2, 0]] } else { [[3, 1], [2, 0], [1, 3], [0, 2]] };
        for j in 0..4 {
            tets[tet(i, j)].neighbor[0] = tet(i, within[j][0]);
            tets[tet(i, j)].neighbor[1] = tet(i, within[j][1]);
        }
        let (nb, ns) = x.neighbor[X][BACK];
        let (a, b) = if ns == X { (3, 0) } else { (0, 1) };
        tets[tet(i, 2)].neighbor[3] = tet(nb, a);
        tets[tet(i, 1)].neighbor[2] = tet(nb, b);

        let (nb, ns) = x.neighbor[X][FWD];
        let (a, b) = if ns == X { (1, 2) } else { (2, 3) };
        tets[tet(i, 0)].neighbor[3] = tet(nb, a);
        tets[tet(i, 3)].neighbor[2] = tet(nb, b);

        let (nb, ns) = x.neighbor[Y][BACK];
        let (a, b) = if ns == X { (3, 0) } else { (0, 1) };
        tets[tet(i, 3)].neighbor[3] = tet(nb, a);
        tets[tet(i, 2)].neighbor[2] = tet(nb, b);

        let (nb, ns) = x.neighbor[Y][FWD];
        let (a, b) = if ns == X { (1, 2) } else { (2, 3) };
        tets[tet(i, 1)].neighbor[3] = tet(nb, a);
        tets[tet(i, 0)].neighbor[2] = tet(nb, b);

        let (cx, cy) = (x.component[X] as i32, x.component[Y] as i32);
        for j in 0..4 {
            let t = &mut tets[tet(i, j)];
            t.gluing = [Perm::new([0, 1, 3, 2]); 4];
            // poles: south is -1, north is -2
            t.cusp[0] = -1;
            t.cusp[1] = -2;
            if j % 2 == 0 {
                t.cusp[2] = cx;
                t.cusp[3] = cy;
            } else {
                t.cusp[2] = cy;
                t.cusp[3] = cx;
            }
        }
    }

    add_longitudes(&xs, &mut tets);
    add_meridians(&xs, &mut tets, num_cusps);
    adjust_longitudes(&xs, &mut tets, num_cusps);

    let mut tri = IdealTriangulation { tets, num_cusps };
    tri.check_gluings()?;
    remove_finite_vertices(&mut tri);
    tri.validate()?;
    Ok(tri)
}

fn add_longitudes(xs: &[Crossing], tets: &mut [Tetrahedron]) {
    let l = LONGITUDE;
    for (i, x) in xs.iter().enumerate() {
        let t = |j: usize| 4 * i + j;
        tets[t(2)].curve[l][2][3] = 1;
        tets[t(3)].curve[l][3][2] = -1;
        let f = if x.cl { 0 } else { 1 };
        tets[t(2)].curve[l][2][f] = -1;
        tets[t(3)].curve[l][3][f] = 1;

        tets[t(3)].curve[l][2][3] = 1;
        tets[t(0)].curve[l][3][2] = -1;
        let f = if x.cl { 1 } else { 0 };
        tets[t(3)].curve[l][2][f] = -1;
        tets[t(0)].curve[l][3][f] = 1;
    }
}

fn add_meridians(xs: &[Crossing], tets: &mut [Tetrahedron], num_cusps: usize) {
    let m = MERIDIAN;
    for k in 0..num_cusps {
        let Some((start, strand)) =
            xs.iter().enumerate().find_map(|(i, x)| [X, Y].into_iter().find(|&s| x.component[s] == k).map(|s| (i, s)))
        else {
            continue;
        };
        let (mut c, mut s) = (start, strand);
        let mut over = xs[c].goes_over(s);
        let (mut nc, mut ns) = xs[c].neighbor[s][FWD];
        let mut next_over = xs[nc].goes_over(ns);
        // walk forward to an over-passage followed by an under-passage
        while !over || next_over {
            (c, s, over) = (nc, ns, next_over);
            (nc, ns) = xs[c].neighbor[s][FWD];
            next_over = xs[nc].goes_over(ns);
        }
        let t = |i: usize, j: usize| 4 * i + j;
        if s == X {
            tets[t(c, 3)].curve[m][3][1] = -1;
            tets[t(c, 3)].curve[m][3][2] = 1;
            tets[t(c, 0)].curve[m][2][1] = 1;
            tets[t(c, 0)].curve[m][2][3] = -1;
        } else {
            tets[t(c, 0)].curve[m][3][1] = -1;
            tets[t(c, 0)].curve[m][3][2] = 1;
            tets[t(c, 1)].curve[m][2][1] = 1;
            tets[t(c, 1)].curve[m][2][3] = -1;
        }
        if ns == X {
            tets[t(nc, 1)].curve[m][3][0] = -1;
            tets[t(nc, 1)].curve[m][3][2] = 1;
            tets[t(nc, 2)].curve[m][2][0] = 1;
            tets[t(nc, 2)].curve[m][2][3] = -1;
        } else {
            tets[t(nc, 2)].curve[m][3][0] = -1;
            tets[t(nc, 2)].curve[m][3][2] = 1;
            tets[t(nc, 3)].curve[m][2][0] = 1;
            tets[t(nc, 3)].curve[m][2][3] = -1;
        }
    }
}

/// Subtracts blackboard self-writhe copies of the meridian so that each
/// longitude is null-homologous in the complement of its own component.
fn adjust_longitudes(xs: &[Crossing], tets: &mut [Tetrahedron], num_cusps: usize) {
    let mut sum = vec![0i32; num_cusps];
    for x in xs {
        if x.component[X] == x.component[Y] {
            sum[x.component[X]] += if x.cl { 1 } else { -1 };
        }
    }
    for (i, x) in xs.iter().enumerate() {
        let (sx, sy) = (sum[x.component[X]], sum[x.component[Y]]);
        for j in 0..4 {
            let t = &mut tets[4 * i + j];
            for v in 2..4 {
                let w = if (j & 1) == (v & 1) { sx } else { sy };
                for f in 0..4 {
                    t.curve[LONGITUDE][v][f] -= w * t.curve[MERIDIAN][v][f];
                }
            }
        }
    }
}
