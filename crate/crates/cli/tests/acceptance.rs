//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use knotcert::certify::{certify_pipeline, reverify, run_pipeline, Certificate, PipelineOptions};
use knotcert::cover::{
    assemble_cover, cover_homology_crosscheck, random_presentation, rolfsen_realize, AxisPresentation,
};
use knotcert::diagram::{parse_pd, ComponentRole, FramedLink, Slope};
use knotcert::gluing::GluingSystem;
use knotcert::interval::Interval;
use knotcert::tangle::{double_twist_base, fraction, rational_tangle, ArcRole, Tangle};
use knotcert_cli::grid::{run_grid, GridMode, GridSpec, SlopeForm};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";
const WHITEHEAD: &str = "X(4,0,5,3) X(0,4,1,9) X(6,1,7,2) X(2,7,3,8) X(8,5,9,6)";
const BORROMEAN: &str = "X(4,0,5,3) X(0,8,1,11) X(6,1,7,2) X(2,9,3,10) X(8,4,9,7) X(10,5,11,6)";
const TREFOIL: &str = "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)";

type Outcome = Result<String, String>;

fn link(pd: &str) -> FramedLink {
    FramedLink::complement(parse_pd(pd).expect("valid PD"))
}

fn opts() -> PipelineOptions {
    PipelineOptions::default()
}

/// An oracle quoted to `digits` decimals, as the interval of reals that
/// round to it.
fn quoted(value: f64, digits: i32) -> Interval {
    let half = 0.5 * 10f64.powi(-digits);
    Interval::new(value - half, value + half)
}

fn certified_volume(fl: &FramedLink) -> Result<Interval, String> {
    let c = certify_pipeline(fl, &opts());
    match (&c.verdict, c.volume) {
        (knotcert::Verdict::CertifiedHyperbolic, Some(v)) => Ok(v),
        (v, _) => Err(format!("{v:?}")),
    }
}

fn check_volume(name: &str, fl: &FramedLink, oracle: Interval, limit: Duration) -> Outcome {
    let t = Instant::now();
    let v = certified_volume(fl).map_err(|e| format!("{name}: {e}"))?;
    let dt = t.elapsed();
    if v.width() >= 1e-8 {
        return Err(format!("{name}: width {:e}", v.width()));
    }
    if !v.intersects(&oracle) {
        return Err(format!("{name}: {v} misses {oracle}"));
    }
    if dt > limit {
        return Err(format!("{name}: took {dt:?}"));
    }
    Ok(format!("{name} {v} in {dt:.2?}"))
}

fn criterion_1() -> Outcome {
    check_volume("4_1", &link(FIG8), quoted(2.029883212819, 12), Duration::from_secs(5))
}

fn criterion_2() -> Outcome {
    let a = check_volume("L5a1", &link(WHITEHEAD), quoted(3.663862376709, 12), Duration::from_secs(10))?;
    let b = check_volume("L6a4", &link(BORROMEAN), quoted(7.327724753418, 12), Duration::from_secs(10))?;
    Ok(format!("{a}; {b}"))
}

fn fig8_filled(p: i64, q: i64) -> FramedLink {
    let fl = link(FIG8);
    FramedLink::new(fl.diagram, vec![ComponentRole::Filled { slope: Slope::new(p, q).unwrap() }]).unwrap()
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let complete = certified_volume(&link(FIG8))?;
    let mut prev: Option<Interval> = None;
    for n in 5..=9 {
        let v = certified_volume(&fig8_filled(n, 1)).map_err(|e| format!("({n},1): {e}"))?;
        if let Some(p) = prev {
            if p.hi >= v.lo {
                return Err(format!("({n},1) volume {v} not above {p}"));
            }
        }
        if v.hi >= complete.lo {
            return Err(format!("({n},1) volume {v} not below the complete volume"));
        }
        if n == 5 && !v.intersects(&quoted(0.9813688289, 10)) {
            return Err(format!("(5,1) volume {v} misses 0.9813688289"));
        }
        prev = Some(v);
    }
    let exceptional = (0..=4).map(|n| (n, 1)).chain([(0, 1), (1, 0)]);
    for (p, q) in exceptional {
        if let Ok(v) = certified_volume(&fig8_filled(p, q)) {
            return Err(format!("({p},{q}) certified with volume {v}"));
        }
    }
    let dt = t.elapsed();
    if dt > Duration::from_secs(60) {
        return Err(format!("sweep took {dt:?}"));
    }
    Ok(format!("5..9 certified and increasing, 0..4 and the longitude rejected, {dt:.2?}"))
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut odd = 0;
    let mut even = 0;
    for i in 0..50 {
        let a = random_presentation(&mut rng);
        for c in a.components().map_err(|e| e.to_string())? {
            if c.parity() == 1 {
                odd += 1;
            } else {
                even += 1;
            }
        }
        let x = cover_homology_crosscheck(&a).map_err(|e| format!("instance {i}: {e}"))?;
        if !x.consistent {
            return Err(format!("instance {i}: det {} vs |H1| {}", x.base_det, x.cover_h1));
        }
    }
    let dt = t.elapsed();
    if dt > Duration::from_secs(60) {
        return Err(format!("took {dt:?}"));
    }
    Ok(format!("50/50 consistent ({odd} odd and {even} even components) in {dt:.2?}"))
}

fn circle_presentation(role: ArcRole, around_axis: bool) -> AxisPresentation {
    let mut roles = BTreeMap::new();
    roles.insert(1, role);
    let (endpoints, loops, matching) =
        if around_axis { (vec![1, 1], vec![], vec![(1, 1)]) } else { (vec![], vec![1], vec![]) };
    let t = Tangle::new(vec![], endpoints, BTreeMap::new(), roles, loops).unwrap();
    AxisPresentation::new(t, matching, vec![]).unwrap()
}

fn criterion_5() -> Outcome {
    for a in (-5..=5).filter(|&a| a != 0) {
        let lifted = Slope::new(1, a).unwrap();
        let odd = circle_presentation(ArcRole::Filled { slope: Slope::new(1, 2 * a).unwrap() }, true);
        let c = assemble_cover(&odd, false).map_err(|e| e.to_string())?;
        if c.roles != vec![ComponentRole::Filled { slope: lifted }] {
            return Err(format!("a = {a}: odd lift {:?}", c.roles));
        }
        let s = Slope::new(1, 2 * a).unwrap();
        let even = circle_presentation(ArcRole::Filled { slope: s }, false);
        let c = assemble_cover(&even, false).map_err(|e| e.to_string())?;
        if c.roles != vec![ComponentRole::Filled { slope: s }; 2] {
            return Err(format!("a = {a}: even lift {:?}", c.roles));
        }
    }
    Ok("odd parity halves, even parity duplicates, for all ten a".into())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    while done < 50 {
        let (p, q) = (rng.gen_range(-100i64..=100), rng.gen_range(-100i64..=100));
        let Ok(s) = Slope::new(p, q) else { continue };
        if gcd(p, q) != 1 {
            continue;
        }
        let back = fraction(&rational_tangle(s)).map_err(|e| format!("{p}/{q}: {e}"))?;
        if back != s {
            return Err(format!("{p}/{q} came back as {}/{}", back.p, back.q));
        }
        done += 1;
    }
    Ok("50 round trips exact".into())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn criterion_7() -> Outcome {
    let run = run_pipeline(&link(FIG8), &opts());
    let cert = run.certificate;
    let g = run.system.ok_or("no system")?;
    reverify(&cert, &g).map_err(|e| format!("fresh certificate: {e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let mut bad = g.clone();
        let r = rng.gen_range(0..bad.rows.len());
        let delta = if rng.gen_bool(0.5) { 1 } else { -1 } * rng.gen_range(1..=3);
        let row = &mut bad.rows[r];
        match rng.gen_range(0..3) {
            0 => row.a[rng.gen_range(0..g.n)] += delta,
            1 => row.b[rng.gen_range(0..g.n)] += delta,
            _ => row.c += delta,
        }
        if reverify(&cert, &bad).is_ok() {
            return Err(format!("corruption {i} of row {r} passed"));
        }
    }

    for pd in [FIG8, WHITEHEAD] {
        let run = run_pipeline(&link(pd), &opts());
        let text = run.certificate.to_json();
        let back = Certificate::from_json(&text).map_err(|e| e.to_string())?;
        if back != run.certificate || back.to_json() != text {
            return Err("certificate changed in a JSON round trip".into());
        }
        let g = GluingSystem::from_json(&run.system.ok_or("no system")?.to_json()).map_err(|e| e.to_string())?;
        reverify(&back, &g).map_err(|e| format!("round-tripped certificate: {e}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let draw = |rng: &mut ChaCha8Rng, positive: bool| {
        let a: f64 = rng.gen_range(-10.0..10.0);
        let w: f64 = rng.gen_range(0.0..1.0) * 10f64.powi(rng.gen_range(-12..0));
        let lo = if positive { a.abs() + 1e-3 } else { a };
        Interval::new(lo, lo + w)
    };
    for i in 0..1000 {
        let op = i % 6;
        let x = draw(&mut rng, op >= 4);
        let y = draw(&mut rng, op == 3);
        let (result, f): (Interval, fn(f64, f64) -> f64) = match op {
            0 => (x + y, |a, b| a + b),
            1 => (x - y, |a, b| a - b),
            2 => (x * y, |a, b| a * b),
            3 => (x / y, |a, b| a / b),
            4 => (x.sqrt(), |a, _| a.sqrt()),
            _ => (x.sqr(), |a, _| a * a),
        };
        for a in [x.lo, x.hi] {
            for b in [y.lo, y.hi] {
                let v = f(a, b);
                if !result.contains(v) {
                    return Err(format!("case {i}: op {op} at ({a:e}, {b:e}) gives {v:e} outside {result}"));
                }
            }
        }
    }
    Ok("100 corruptions rejected, round trips re-verify, 1000 inclusion checks hold".into())
}

/// A tetrahedron's shape up to relabelings that keep its orientation: the
/// smallest of its three edge parameters, rounded to 1e-9.
fn canonical(z: Complex64) -> (i64, i64) {
    let one = Complex64::new(1.0, 0.0);
    let key = |w: Complex64| ((w.re * 1e9).round() as i64, (w.im * 1e9).round() as i64);
    [z, one / (one - z), one - one / z].into_iter().map(key).min().unwrap()
}

fn shapes(fl: &FramedLink) -> Result<(Interval, Vec<Complex64>), String> {
    let c = certify_pipeline(fl, &opts());
    let v = c.volume.ok_or_else(|| format!("{:?}", c.verdict))?;
    Ok((v, c.meta.center.clone()))
}

fn criterion_8() -> Outcome {
    let tre = link(TREFOIL);
    let a = certify_pipeline(&tre, &opts()).is_certified();
    let b = certify_pipeline(&tre.mirror(), &opts()).is_certified();
    if a || b {
        return Err("trefoil or its mirror certified".into());
    }
    for (name, pd) in [("4_1", FIG8), ("L5a1", WHITEHEAD)] {
        let fl = link(pd);
        let (v, z) = shapes(&fl)?;
        let (vm, zm) = shapes(&fl.mirror())?;
        if (v.mid() - vm.mid()).abs() > 1e-9 {
            return Err(format!("{name}: volumes {v} and {vm}"));
        }
        // a mirrored tetrahedron with shape w is the conjugate of a shape
        // read with vertices 2 and 3 swapped, so 1 / conj(w) recovers it
        let mut ours: Vec<_> = z.iter().map(|&w| canonical(w)).collect();
        let mut theirs: Vec<_> = zm.iter().map(|&w| canonical(Complex64::new(1.0, 0.0) / w.conj())).collect();
        ours.sort();
        theirs.sort();
        if ours != theirs {
            return Err(format!("{name}: shapes {ours:?} against conjugated mirror shapes {theirs:?}"));
        }
    }
    Ok("trefoil rejected on both sides; 4_1 and L5a1 mirror volumes agree and shapes are conjugate".into())
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let base = double_twist_base(Slope::reciprocal(1), Slope::reciprocal(1)).map_err(|e| e.to_string())?;
    let slots: Vec<u32> = (0..base.roles.len())
        .filter(|&k| matches!(base.roles[k], ComponentRole::TwistCircle { .. }))
        .map(|k| base.diagram.component_arcs(k)[0])
        .collect();
    let spec = GridSpec {
        mode: GridMode::Link,
        link: Some(base.to_json()),
        axis: None,
        tangle: None,
        slots,
        slope_form: SlopeForm::Reciprocal,
        n: [-4, 4],
        m: Some([-4, 4]),
    };
    let grid = run_grid(&spec, &opts(), 4).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let candidates: Vec<_> = grid.cells.iter().filter(|c| c.n.abs() >= 2 && c.m.unwrap().abs() >= 2).collect();
    let mut picked = Vec::new();
    while picked.len() < 5 {
        let c = candidates[rng.gen_range(0..candidates.len())];
        if !picked.contains(&c) {
            picked.push(c);
        }
    }
    for c in picked {
        let (n, m) = (c.n, c.m.unwrap());
        let [lo, hi] = c.volume.ok_or_else(|| format!("cell ({n},{m}) not certified by filling: {}", c.verdict))?;
        let filled = Interval::new(lo, hi);
        let b = double_twist_base(Slope::reciprocal(n), Slope::reciprocal(m)).map_err(|e| e.to_string())?;
        let knot = rolfsen_realize(&b).map_err(|e| e.to_string())?;
        let direct = certified_volume(&knot).map_err(|e| format!("cell ({n},{m}) after twisting: {e}"))?;
        if !filled.intersects(&direct) || (filled.mid() - direct.mid()).abs() > 1e-9 {
            return Err(format!("cell ({n},{m}): filled {filled} against twisted {direct}"));
        }
    }
    let dt = t.elapsed();
    if dt > Duration::from_secs(120) {
        return Err(format!("took {dt:?}"));
    }
    Ok(format!("5 cells agree ({} of {} grid cells certified) in {dt:.2?}", grid.certified, grid.cells.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("figure-eight volume", criterion_1),
        ("Whitehead and Borromean volumes", criterion_2),
        ("figure-eight filling dichotomy", criterion_3),
        ("branched-cover homology cross-check", criterion_4),
        ("lifting rule", criterion_5),
        ("rational tangle round trip", criterion_6),
        ("certificate soundness", criterion_7),
        ("mirror symmetry", criterion_8),
        ("cross-route consistency", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
