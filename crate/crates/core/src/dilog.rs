//! Bloch–Wigner dilogarithm `D(z) = Im Li2(z) + arg(1 - z) log|z|`, the
//! volume of the ideal tetrahedron with shape `z`, evaluated on complex
//! boxes with a rigorous error term.
//!
//! `D` is invariant up to sign under the six cross-ratio substitutions, so
//! the argument is first moved to a point `w` where `u = -log(1 - w)` is
//! small. There `Li2(w) = sum B_n u^(n+1) / (n+1)!`, which converges for
//! `|u| < 2 pi`; the tail is bounded with `|B_n| <= 4 n! / (2 pi)^n`.

use crate::interval::{CInterval, Interval};

/// Bernoulli numbers `B_n` for `n <= 28`, as (numerator, denominator);
/// odd indices above 1 vanish.
const BERNOULLI: [(i128, i128); 29] = [
    (1, 1),
    (-1, 2),
    (1, 6),
    (0, 1),
    (-1, 30),
    (0, 1),
    (1, 42),
    (0, 1),
    (-1, 30),
    (0, 1),
    (5, 66),
    (0, 1),
    (-691, 2730),
    (0, 1),
    (7, 6),
    (0, 1),
    (-3617, 510),
    (0, 1),
    (43867, 798),
    (0, 1),
    (-174611, 330),
    (0, 1),
    (854513, 138),
    (0, 1),
    (-236364091, 2730),
    (0, 1),
    (8553103, 6),
    (0, 1),
    (-23749461029, 870),
];

fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

/// The six substitutions preserving `|D|`, with the sign of `D` they induce.
fn substitutions(z: CInterval) -> [(CInterval, i32); 6] {
    let one = CInterval::ONE;
    [(z, 1), (one - z, -1), (z.recip(), -1), ((one - z).recip(), 1), (one - z.recip(), 1), (z / (z - one), -1)]
}

fn point_u(w: (f64, f64)) -> f64 {
    // |log(1 - w)| at a point, for choosing the substitution
    let (re, im) = (1.0 - w.0, -w.1);
    let m = 0.5 * (re * re + im * im).ln();
    let a = im.atan2(re);
    (m * m + a * a).sqrt()
}

/// Enclosure of `Li2(w)`; `None` unless `|log(1 - w)| < 2 pi` on the box.
pub fn li2(w: CInterval) -> Option<CInterval> {
    let u = -(CInterval::ONE - w).ln()?;
    let two_pi = Interval::pi() * Interval::point(2.0);
    let r = u.abs() / two_pi;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(r.hi < 1.0) {
        return None;
    }
    let mut sum = CInterval::ZERO;
    let mut power = u; // u^(n+1)
    let n_max = BERNOULLI.len() - 1;
    for (n, &(num, den)) in BERNOULLI.iter().enumerate() {
        if num != 0 {
            let c = Interval::ratio(num, den * factorial(n as u32 + 1));
            sum = sum + power.scale(c);
        }
        power = power * u;
    }
    // tail: sum over n > n_max of 4 |u|^(n+1) / ((2 pi)^n (n+1))
    let n1 = n_max as u32 + 1;
    let abs_u = Interval::new(0.0, u.abs().hi);
    let tail = Interval::point(4.0) * abs_u.powi(n1 + 1)
        / (two_pi.powi(n1) * Interval::point((n1 + 1) as f64) * (Interval::ONE - Interval::new(0.0, r.hi)));
    let t = tail.hi;
    Some(CInterval::new(sum.re.inflate(t), sum.im.inflate(t)))
}

/// Enclosure of the Bloch–Wigner function on a box away from the real axis.
pub fn bloch_wigner(z: CInterval) -> Option<Interval> {
    if z.im.contains_zero() {
        return None;
    }
    let subs = substitutions(z);
    let mut order: Vec<usize> = (0..6).filter(|&k| subs[k].0.is_finite()).collect();
    order.sort_by(|&a, &b| point_u(subs[a].0.mid()).total_cmp(&point_u(subs[b].0.mid())));
    for k in order {
        let (w, sign) = subs[k];
        let Some(l) = li2(w) else { continue };
        let arg = (CInterval::ONE - w).arg()?;
        let log_abs = w.norm_sqr().ln() * Interval::point(0.5);
        let d = l.im + arg * log_abs;
        return Some(if sign > 0 { d } else { -d });
    }
    None
}

/// Floating point `D(z)`, the midpoint of the enclosure at a point.
pub fn bloch_wigner_f64(re: f64, im: f64) -> f64 {
    bloch_wigner(CInterval::point(re, im)).map(|d| d.mid()).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_ideal_tetrahedron() {
        // D(e^{i pi/3}) is the volume of the regular ideal tetrahedron
        let s = 3f64.sqrt() / 2.0;
        let d = bloch_wigner(CInterval::point(0.5, s)).unwrap();
        assert!(d.contains(1.0149416064096536), "{d}");
        assert!(d.width() < 1e-13, "{}", d.width());
    }

    #[test]
    fn small_series_matches_li2() {
        // Li2(1/2) = pi^2/12 - ln(2)^2/2
        let l = li2(CInterval::point(0.5, 0.0)).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 12.0 - 2f64.ln().powi(2) / 2.0;
        assert!(l.re.inflate(1e-15).contains(exact), "{}", l.re);
    }

    #[test]
    fn symmetries() {
        let z = CInterval::point(0.3, 1.7);
        let d = bloch_wigner(z).unwrap().mid();
        let d2 = bloch_wigner(CInterval::ONE - z.recip()).unwrap().mid();
        let d3 = bloch_wigner(z.conj()).unwrap().mid();
        assert!((d - d2).abs() < 1e-13);
        assert!((d + d3).abs() < 1e-13);
    }
}
