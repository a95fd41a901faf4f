use knotcert::certify::{certify_pipeline, PipelineOptions};
use knotcert::cover::{assemble_cover, random_presentation, AxisPresentation};
use knotcert::diagram::{goeritz_determinant, parse_pd, ComponentRole, FramedLink, LinkDiagram, Slope};
use knotcert::gluing::{build_system, newton_solve, select_square_system};
use knotcert::tangle::{attach_caps, fill_slot, numerator_closure, rational_tangle, ArcRole, Tangle};
use knotcert::triangulate::{octahedral_triangulation, simplify, SimplifyOptions};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Two-bridge links: numerator closures of rational tangles.
fn two_bridge() -> impl Strategy<Value = LinkDiagram> {
    (-40i64..=40, 1i64..=40)
        .prop_filter("coprime", |&(p, q)| gcd(p, q) == 1)
        .prop_map(|(p, q)| numerator_closure(&rational_tangle(Slope::new(p, q).unwrap())).unwrap().diagram)
        .prop_filter("has crossings", |d| d.num_crossings() > 0 && d.unknotted_extras() == 0)
}

fn shifted(d: &LinkDiagram, by: u32) -> LinkDiagram {
    LinkDiagram::new(d.crossings().iter().map(|x| x.map(|l| l + by)).collect(), d.unknotted_extras()).unwrap()
}

fn framed(d: &LinkDiagram, framings: &[i64]) -> FramedLink {
    let roles = (0..d.num_components())
        .map(|k| ComponentRole::Filled { slope: Slope::new(framings[k % framings.len()], 1).unwrap() })
        .collect();
    FramedLink::new(d.clone(), roles).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_identity(d in two_bridge()) {
        prop_assert_eq!(parse_pd(&d.serialize()).unwrap(), d);
    }

    #[test]
    fn mirror_is_an_involution(d in two_bridge()) {
        let m = d.mirror();
        prop_assert_eq!(m.num_crossings(), d.num_crossings());
        prop_assert_eq!(m.num_components(), d.num_components());
        prop_assert_eq!(m.writhe(), -d.writhe());
        prop_assert_eq!(m.mirror(), d);
    }

    #[test]
    fn linking_matrix_is_symmetric_and_mirrors(d in two_bridge(), f in proptest::collection::vec(-5i64..=5, 1..3)) {
        let fl = framed(&d, &f);
        let a = fl.linking_matrix().unwrap();
        let b = fl.mirror().linking_matrix().unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert_eq!(a[i][j], a[j][i]);
                prop_assert_eq!(b[i][j], -a[i][j]);
            }
        }
    }

    #[test]
    fn homology_ignores_labels(d in two_bridge(), by in 1u32..50, f in proptest::collection::vec(-5i64..=5, 1..3)) {
        let h = framed(&d, &f).homology_of_surgery().unwrap();
        prop_assert_eq!(framed(&shifted(&d, by), &f).homology_of_surgery().unwrap(), h.clone());
        prop_assert_eq!(framed(&d.relabel_sequential(), &f).homology_of_surgery().unwrap(), h);
    }

    #[test]
    fn determinant_is_mirror_invariant(d in two_bridge()) {
        prop_assume!(d.num_components() == 1);
        prop_assert_eq!(goeritz_determinant(&d).unwrap(), goeritz_determinant(&d.mirror()).unwrap());
    }

    #[test]
    fn filling_keeps_endpoint_count(p in -12i64..=12, q in 1i64..=12) {
        prop_assume!(gcd(p, q) == 1);
        let mut slots = BTreeMap::new();
        slots.insert("s".to_string(), [1, 2, 3, 4]);
        let t = Tangle::new(vec![], vec![1, 2, 3, 4], slots, BTreeMap::new(), vec![]).unwrap();
        let filled = fill_slot(&t, "s", &rational_tangle(Slope::new(p, q).unwrap())).unwrap();
        prop_assert_eq!(filled.endpoints.len(), t.endpoints.len());
        prop_assert_eq!(filled.strand_endpoint_count(), 4);
    }

    #[test]
    fn two_caps_remove_four_endpoints(start in 0usize..6) {
        // three parallel strands, capped on two neighbouring pairs
        let t = Tangle::new(vec![], vec![1, 2, 3, 3, 2, 1], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap();
        let a = start % 6;
        let b = (start + 2) % 6;
        let pairs = [(a, (a + 1) % 6), (b, (b + 1) % 6)];
        let capped = attach_caps(&t, &pairs).unwrap();
        prop_assert_eq!(capped.strand_endpoint_count(), t.strand_endpoint_count() - 4);
    }

    #[test]
    fn lifted_component_count(seed in 0u64..10_000) {
        let a = random_presentation(&mut ChaCha8Rng::seed_from_u64(seed));
        let comps = a.components().unwrap();
        let odd = comps.iter().filter(|c| c.parity() == 1).count();
        let even = comps.len() - odd;
        let c = assemble_cover(&a, false).unwrap();
        prop_assert_eq!(c.diagram.num_components(), odd + 2 * even);
        let with_axis = assemble_cover(&a, true).unwrap();
        prop_assert_eq!(with_axis.diagram.num_components(), odd + 2 * even + 1);
    }

    #[test]
    fn triangulations_are_valid(d in two_bridge(), seed in 0u64..100) {
        prop_assume!(d.num_crossings() <= 8);
        let t = octahedral_triangulation(&d);
        prop_assume!(t.is_ok());
        let t = simplify(&t.unwrap(), &SimplifyOptions { seed, max_moves: 2_000, ..Default::default() });
        prop_assert!(t.validate().is_ok());
        prop_assert_eq!(t.edge_classes().len(), t.num_tetrahedra());
        prop_assert_eq!(t.num_cusps(), d.num_components());
    }
}

#[test]
fn empty_presentation_lifts_to_the_empty_description() {
    let t = Tangle::new(vec![], vec![], BTreeMap::new(), BTreeMap::new(), vec![]).unwrap();
    let a = AxisPresentation::new(t, vec![], vec![]).unwrap();
    let c = assemble_cover(&a, false).unwrap();
    assert_eq!(c.diagram.num_components(), 0);
    assert_eq!(c.homology_of_surgery().unwrap().order(), 1);
}

#[test]
fn cocore_lifts_by_parity() {
    let mut roles = BTreeMap::new();
    roles.insert(1, ArcRole::CoCore);
    let around = Tangle::new(vec![], vec![1, 1], BTreeMap::new(), roles.clone(), vec![]).unwrap();
    let a = AxisPresentation::new(around, vec![(1, 1)], vec![]).unwrap();
    assert_eq!(assemble_cover(&a, false).unwrap().roles, vec![ComponentRole::CoCore]);
    let split = Tangle::new(vec![], vec![], BTreeMap::new(), roles, vec![1]).unwrap();
    let a = AxisPresentation::new(split, vec![], vec![]).unwrap();
    assert_eq!(assemble_cover(&a, false).unwrap().roles, vec![ComponentRole::CoCore; 2]);
}

#[test]
fn shape_parameters_are_consistent() {
    let d = parse_pd("X(4,0,5,3) X(0,4,1,9) X(6,1,7,2) X(2,7,3,8) X(8,5,9,6)").unwrap();
    let t = simplify(&octahedral_triangulation(&d).unwrap(), &SimplifyOptions::default());
    let g = select_square_system(&build_system(&t, &[None, None]).unwrap()).unwrap();
    let s = newton_solve(&g, None).unwrap();
    assert!(s.residual < 1e-12);
    let one = Complex64::new(1.0, 0.0);
    for &z in &s.z {
        let z1 = one / (one - z);
        let z2 = one - one / z;
        assert!((z * z1 * z2 + one).norm() < 1e-12);
    }
}

#[test]
fn mirror_triangulations_match() {
    for pd in ["X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)", "X(4,0,5,9) X(0,6,1,5) X(8,2,9,1) X(2,8,3,7) X(6,4,7,3)"]
    {
        let d = parse_pd(pd).unwrap();
        let opts = SimplifyOptions::default();
        let a = simplify(&octahedral_triangulation(&d).unwrap(), &opts);
        let b = simplify(&octahedral_triangulation(&d.mirror()).unwrap(), &opts);
        assert_eq!(a.num_tetrahedra(), b.num_tetrahedra());
        let va = certify_pipeline(&FramedLink::complement(d.clone()), &PipelineOptions::default()).volume.unwrap();
        let vb = certify_pipeline(&FramedLink::complement(d.mirror()), &PipelineOptions::default()).volume.unwrap();
        assert!(va.lo > 0.0);
        assert!((va.mid() - vb.mid()).abs() < 1e-9);
    }
}

#[test]
fn certificates_are_deterministic() {
    let fl = FramedLink::complement(parse_pd("X(4,0,5,9) X(0,6,1,5) X(8,2,9,1) X(2,8,3,7) X(6,4,7,3)").unwrap());
    let opts = PipelineOptions { seed: 17, ..Default::default() };
    assert_eq!(certify_pipeline(&fl, &opts).to_json(), certify_pipeline(&fl, &opts).to_json());
}
