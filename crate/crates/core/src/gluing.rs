//! Edge, completeness and Dehn filling equations of an ideal triangulation
//! in shape coordinates, and a damped Newton solver for them.
//!
//! Every row reads `sum_j a_j log z_j + b_j log(1 - z_j) = (c + branch) pi i`
//! with principal logarithms. `c` is the nominal constant of the row's kind
//! (2 for edges and fillings, 0 for completeness). `branch` comes from
//! rewriting `log z'' = log(1 - z) - log z + pi i`, which holds exactly when
//! `Im z > 0`, so at a geometric solution the observed flattening of every
//! row equals its `branch`.

use crate::diagram::Slope;
use crate::triangulate::perm::{EDGE3, EDGE3_BETWEEN_FACES, REMAINING_FACE};
use crate::triangulate::{IdealTriangulation, TriangulationError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use thiserror::Error;

pub type Complex = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GluingError {
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error("{given} filling entries for {cusps} cusps")]
    FillingCount { given: usize, cusps: usize },
    #[error("slope {slope} on cusp {cusp} is not primitive")]
    InvalidSlope { cusp: usize, slope: Slope },
    #[error("edge equations have rank {rank}, expected {expected}")]
    EdgeRank { rank: usize, expected: usize },
    #[error("system has {rows} rows for {n} unknowns")]
    NotSquare { rows: usize, n: usize },
    #[error("iterate reached a degenerate shape")]
    Degenerate,
    #[error("Newton iteration did not converge (residual {residual:e})")]
    Diverged { residual: f64 },
    #[error("converged to a solution with a shape of non-positive imaginary part")]
    NonGeometric,
    #[error("malformed system: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowTag {
    Edge { class: usize },
    Completeness { cusp: usize },
    Filling { cusp: usize, slope: Slope },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingRow {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub c: i64,
    pub branch: i64,
    pub tag: RowTag,
}

impl GluingRow {
    /// Right-hand side as a multiple of `pi i`.
    pub fn target(&self) -> i64 {
        self.c + self.branch
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingSystem {
    pub n: usize,
    pub num_cusps: usize,
    pub rows: Vec<GluingRow>,
}

impl GluingSystem {
    pub fn is_square(&self) -> bool {
        self.rows.len() == self.n
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("system serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, GluingError> {
        let g: GluingSystem = serde_json::from_str(s).map_err(|e| GluingError::Malformed(e.to_string()))?;
        if g.rows.iter().any(|r| r.a.len() != g.n || r.b.len() != g.n) {
            return Err(GluingError::Malformed("row length differs from n".into()));
        }
        Ok(g)
    }

    /// SHA-256 of the canonical JSON encoding, in hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Row values `sum a log z + b log(1-z) - target pi i` at a point.
    pub fn residuals(&self, z: &[Complex]) -> Vec<Complex> {
        self.residuals_along(z, 1.0, None)
    }

    /// Residuals with each filling target moved a fraction `t` of the way
    /// from `from` (its value at the complete structure) to the real target.
    fn residuals_along(&self, z: &[Complex], t: f64, from: Option<&[i64]>) -> Vec<Complex> {
        let logs: Vec<(Complex, Complex)> = z.iter().map(|&w| (w.ln(), (Complex::new(1.0, 0.0) - w).ln())).collect();
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let target = match (from, r.tag) {
                    (Some(f), RowTag::Filling { .. }) => f[i] as f64 + t * (r.target() - f[i]) as f64,
                    _ => r.target() as f64,
                };
                let mut s = Complex::new(0.0, -target * PI);
                for j in 0..self.n {
                    s += logs[j].0 * r.a[j] as f64 + logs[j].1 * r.b[j] as f64;
                }
                s
            })
            .collect()
    }

    /// Jacobian `a_j / z_j - b_j / (1 - z_j)`.
    pub fn jacobian(&self, z: &[Complex]) -> Vec<Vec<Complex>> {
        self.rows
            .iter()
            .map(|r| {
                (0..self.n)
                    .map(|j| {
                        let one = Complex::new(1.0, 0.0);
                        (r.a[j] as f64) / z[j] - (r.b[j] as f64) / (one - z[j])
                    })
                    .collect()
            })
            .collect()
    }

    /// Integers `k_r` with `sum a log z + b log(1 - z) ~ (c + k_r) pi i`.
    pub fn flattenings(&self, z: &[Complex]) -> Vec<i64> {
        let logs: Vec<(Complex, Complex)> = z.iter().map(|&w| (w.ln(), (Complex::new(1.0, 0.0) - w).ln())).collect();
        self.rows
            .iter()
            .map(|r| {
                let im: f64 = (0..self.n).map(|j| logs[j].0.im * r.a[j] as f64 + logs[j].1.im * r.b[j] as f64).sum();
                (im / PI).round() as i64 - r.c
            })
            .collect()
    }
}

/// SnapPea's rule for the net number of strands turning around the corner
/// between two sides carrying flows `a` and `b`.
fn turn(a: i32, b: i32) -> i64 {
    if (a < 0) ^ (b < 0) {
        if (a < 0) ^ (a + b < 0) {
            a as i64
        } else {
            -(b as i64)
        }
    } else {
        0
    }
}

/// Holonomy exponents (of z, z', z'') of a flow along a simple curve.
fn holonomy(flow: &[[[i32; 4]; 4]]) -> Vec<[i64; 3]> {
    flow.iter()
        .map(|f| {
            let mut row = [0i64; 3];
            for v in 0..4 {
                for initial in (0..4).filter(|&i| i != v) {
                    let terminal = REMAINING_FACE[v][initial];
                    row[EDGE3_BETWEEN_FACES[initial][terminal]] += turn(f[v][initial], f[v][terminal]);
                }
            }
            row
        })
        .collect()
}

/// Rewrites `sum A log z + B log z' + C log z'' = c pi i` in the
/// `(log z, log(1 - z))` coordinates.
fn to_row(abc: &[[i64; 3]], c: i64, tag: RowTag) -> GluingRow {
    let a = abc.iter().map(|x| x[0] - x[2]).collect();
    let b = abc.iter().map(|x| x[2] - x[1]).collect();
    let branch = -abc.iter().map(|x| x[2]).sum::<i64>();
    GluingRow { a, b, c, branch, tag }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Builds edge rows for every edge class and one cusp row per cusp:
/// completeness for `None`, the filling equation for `Some(slope)`.
pub fn build_system(t: &IdealTriangulation, fillings: &[Option<Slope>]) -> Result<GluingSystem, GluingError> {
    let n = t.num_tetrahedra();
    let k = t.num_cusps();
    if fillings.len() != k {
        return Err(GluingError::FillingCount { given: fillings.len(), cusps: k });
    }
    let mut rows = Vec::new();
    let edges = t.edge_classes();
    for (class, members) in edges.members.iter().enumerate() {
        let mut abc = vec![[0i64; 3]; n];
        for m in members {
            abc[m.tet][EDGE3[m.edge]] += 1;
        }
        rows.push(to_row(&abc, 2, RowTag::Edge { class }));
    }
    for (cusp, filling) in fillings.iter().enumerate() {
        let basis = t.peripheral_basis(cusp)?;
        let d = [holonomy(&basis.cycles[0]), holonomy(&basis.cycles[1])];
        let combine = |w: [i64; 2]| -> Vec<[i64; 3]> {
            (0..n).map(|j| [0, 1, 2].map(|s| w[0] * d[0][j][s] + w[1] * d[1][j][s])).collect()
        };
        let m = combine(basis.meridian);
        let l = combine(basis.longitude);
        match filling {
            None => rows.push(to_row(&m, 0, RowTag::Completeness { cusp })),
            Some(slope) => {
                if gcd(slope.p, slope.q) != 1 {
                    return Err(GluingError::InvalidSlope { cusp, slope: *slope });
                }
                let abc: Vec<[i64; 3]> =
                    (0..n).map(|j| [0, 1, 2].map(|s| slope.p * m[j][s] + slope.q * l[j][s])).collect();
                rows.push(to_row(&abc, 2, RowTag::Filling { cusp, slope: *slope }));
            }
        }
    }
    Ok(GluingSystem { n, num_cusps: k, rows })
}

/// Incremental rank over the rationals with integer rows kept in echelon form.
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    /// Adds `v` if it is independent of the rows so far.
    fn insert(&mut self, mut v: Vec<i128>) -> bool {
        for (p, r) in &self.rows {
            if v[*p] != 0 {
                let (x, y) = (r[*p], v[*p]);
                for i in 0..v.len() {
                    v[i] = v[i] * x - r[i] * y;
                }
                let g = v.iter().fold(0i128, |g, &x| {
                    let (mut a, mut b) = (g.abs(), x.abs());
                    while b != 0 {
                        (a, b) = (b, a % b);
                    }
                    a
                });
                if g > 1 {
                    v.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }
}

/// Keeps the first maximal independent set of edge rows (in order) and all
/// cusp rows.
pub fn select_square_system(g: &GluingSystem) -> Result<GluingSystem, GluingError> {
    let expected = g.n.saturating_sub(g.num_cusps);
    let mut ech = Echelon { rows: Vec::new() };
    let mut rows = Vec::new();
    for r in g.rows.iter().filter(|r| matches!(r.tag, RowTag::Edge { .. })) {
        let v: Vec<i128> = r.a.iter().chain(&r.b).map(|&x| x as i128).collect();
        if ech.insert(v) {
            rows.push(r.clone());
        }
    }
    if rows.len() != expected {
        return Err(GluingError::EdgeRank { rank: rows.len(), expected });
    }
    rows.extend(g.rows.iter().filter(|r| !matches!(r.tag, RowTag::Edge { .. })).cloned());
    let out = GluingSystem { n: g.n, num_cusps: g.num_cusps, rows };
    if !out.is_square() {
        return Err(GluingError::NotSquare { rows: out.rows.len(), n: out.n });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeAssignment {
    pub z: Vec<Complex>,
    pub residual: f64,
    pub flattenings: Vec<i64>,
    pub iterations: usize,
}

impl ShapeAssignment {
    /// All shapes strictly in the upper half plane.
    pub fn is_geometric(&self) -> bool {
        self.z.iter().all(|z| z.im > GEOMETRIC_EPS)
    }
}

/// Imaginary parts at or below this are treated as flat or negative.
const GEOMETRIC_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tolerance: 1e-12, max_iterations: 100, max_halvings: 30, restarts: 16, seed: 0 }
    }
}

/// The regular ideal tetrahedron's shape `1/2 + (sqrt 3 / 2) i`.
pub fn regular_shape() -> Complex {
    Complex::new(0.5, 3f64.sqrt() / 2.0)
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub(crate) fn solve_linear(mut m: Vec<Vec<Complex>>, mut rhs: Vec<Complex>) -> Option<Vec<Complex>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))?;
        if m[piv][col].norm() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == Complex::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = vec![Complex::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for c in r + 1..n {
            s -= m[r][c] * x[c];
        }
        x[r] = s / m[r][r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Inverse of a square complex matrix.
pub(crate) fn invert(m: &[Vec<Complex>]) -> Option<Vec<Vec<Complex>>> {
    let n = m.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![Complex::new(0.0, 0.0); n];
        e[k] = Complex::new(1.0, 0.0);
        cols.push(solve_linear(m.to_vec(), e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

fn degenerate(z: &Complex) -> bool {
    let one = Complex::new(1.0, 0.0);
    !z.is_finite() || z.norm() < 1e-10 || (one - z).norm() < 1e-10 || z.norm() > 1e10
}

fn max_norm(v: &[Complex]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// One damped Newton run from `start`.
fn newton_run(g: &GluingSystem, start: Vec<Complex>, opts: &NewtonOptions) -> Result<ShapeAssignment, GluingError> {
    let mut z = start;
    if z.iter().any(degenerate) {
        return Err(GluingError::Degenerate);
    }
    let mut res = max_norm(&g.residuals(&z));
    let mut iterations = 0;
    while res >= opts.tolerance {
        if iterations == opts.max_iterations || !res.is_finite() {
            return Err(GluingError::Diverged { residual: res });
        }
        iterations += 1;
        let f = g.residuals(&z);
        let step = solve_linear(g.jacobian(&z), f.iter().map(|x| -x).collect()).ok_or(GluingError::Degenerate)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        let mut all_degenerate = true;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<Complex> = z.iter().zip(&step).map(|(a, d)| a + d * lambda).collect();
            if !trial.iter().any(degenerate) {
                all_degenerate = false;
                let r = max_norm(&g.residuals(&trial));
                if r < res {
                    z = trial;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(if all_degenerate { GluingError::Degenerate } else { GluingError::Diverged { residual: res } });
        }
    }
    let flattenings = g.flattenings(&z);
    let out = ShapeAssignment { z, residual: res, flattenings, iterations };
    if !out.is_geometric() {
        return Err(GluingError::NonGeometric);
    }
    Ok(out)
}

/// Solves a square system from `initial` (default: all shapes regular),
/// retrying from seeded random starts in the upper half plane.
pub fn newton_solve_with(
    g: &GluingSystem,
    initial: Option<&[Complex]>,
    opts: &NewtonOptions,
) -> Result<ShapeAssignment, GluingError> {
    if !g.is_square() {
        return Err(GluingError::NotSquare { rows: g.rows.len(), n: g.n });
    }
    let start = initial.map(|s| s.to_vec()).unwrap_or_else(|| vec![regular_shape(); g.n]);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = match newton_run(g, start, opts) {
        Ok(s) => return Ok(s),
        Err(e) => e,
    };
    for _ in 0..opts.restarts {
        let start: Vec<Complex> =
            (0..g.n).map(|_| Complex::new(rng.gen_range(-0.5..1.5), rng.gen_range(0.1..1.5))).collect();
        match newton_run(g, start, opts) {
            Ok(s) => return Ok(s),
            // a converged non-geometric answer is the most informative failure
            Err(GluingError::NonGeometric) => worst = GluingError::NonGeometric,
            Err(e) if worst != GluingError::NonGeometric => worst = e,
            Err(_) => {}
        }
    }
    Err(worst)
}

/// Undamped Newton iterations on the scaled system, staying in the upper
/// half plane. Returns `None` if it does not settle quickly.
fn corrector(g: &GluingSystem, z: &[Complex], t: f64, from: &[i64]) -> Option<Vec<Complex>> {
    let mut z = z.to_vec();
    for _ in 0..12 {
        let f = g.residuals_along(&z, t, Some(from));
        if max_norm(&f) < 1e-11 {
            return Some(z);
        }
        let step = solve_linear(g.jacobian(&z), f.iter().map(|x| -x).collect())?;
        z.iter_mut().zip(&step).for_each(|(a, d)| *a += d);
        if z.iter().any(degenerate) {
            return None;
        }
    }
    (max_norm(&g.residuals_along(&z, t, Some(from))) < 1e-9).then_some(z)
}

/// Follows the geometric solution from the complete structure `complete`
/// (which must solve the edge rows) to the filled structure, moving each
/// filling target linearly from its value at `complete`, then polishes with
/// ordinary Newton.
pub fn newton_continuation(
    g: &GluingSystem,
    complete: &[Complex],
    opts: &NewtonOptions,
) -> Result<ShapeAssignment, GluingError> {
    if !g.is_square() {
        return Err(GluingError::NotSquare { rows: g.rows.len(), n: g.n });
    }
    // value of each row at the complete structure, in units of pi i
    let from: Vec<i64> =
        g.residuals(complete).iter().zip(&g.rows).map(|(v, r)| r.target() + (v.im / PI).round() as i64).collect();
    let mut z = corrector(g, complete, 0.0, &from).ok_or(GluingError::Diverged { residual: f64::NAN })?;
    let (mut t, mut dt) = (0.0f64, 0.05f64);
    while t < 1.0 {
        let next = (t + dt).min(1.0);
        match corrector(g, &z, next, &from) {
            Some(w) => {
                z = w;
                t = next;
                dt = (dt * 1.5).min(0.25);
            }
            None if dt > 1e-4 => dt /= 2.0,
            None => {
                let residual = max_norm(&g.residuals_along(&z, next, Some(&from)));
                return Err(GluingError::Diverged { residual });
            }
        }
    }
    newton_run(g, z, opts)
}

pub fn newton_solve(g: &GluingSystem, initial: Option<&[Complex]>) -> Result<ShapeAssignment, GluingError> {
    newton_solve_with(g, initial, &NewtonOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;
    use crate::triangulate::{octahedral_triangulation, simplify, SimplifyOptions};

    fn tri(pd: &str) -> IdealTriangulation {
        let t = octahedral_triangulation(&parse_pd(pd).unwrap()).unwrap();
        simplify(&t, &SimplifyOptions::default())
    }

    const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";

    #[test]
    fn edge_rows_use_each_shape_twice() {
        let t = tri(FIG8);
        let g = build_system(&t, &[None]).unwrap();
        assert_eq!(g.rows.len(), 3);
        for j in 0..g.n {
            let edges = g.rows.iter().filter(|r| matches!(r.tag, RowTag::Edge { .. }));
            let (sa, sb): (i64, i64) = edges.fold((0, 0), |(x, y), r| (x + r.a[j], y + r.b[j]));
            assert_eq!((sa, sb), (0, 0));
        }
        let total: i64 = g.rows.iter().filter(|r| matches!(r.tag, RowTag::Edge { .. })).map(|r| r.target()).sum();
        assert_eq!(total, 0);
    }

    #[test]
    fn figure_eight_regular_solution() {
        let t = tri(FIG8);
        let g = select_square_system(&build_system(&t, &[None]).unwrap()).unwrap();
        assert_eq!(g.rows.len(), 2);
        let s = newton_solve(&g, None).unwrap();
        assert_eq!(s.iterations, 0);
        for z in &s.z {
            assert!((z - regular_shape()).norm() < 1e-12);
        }
        let branches: Vec<i64> = g.rows.iter().map(|r| r.branch).collect();
        assert_eq!(s.flattenings, branches);
    }

    #[test]
    fn hopf_link_has_no_geometric_solution() {
        let t = tri("X(1,3,2,4) X(3,1,4,2)");
        let g = build_system(&t, &[None, None]).unwrap();
        let r = select_square_system(&g).and_then(|g| newton_solve(&g, None));
        assert!(r.is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = tri(FIG8);
        let g = build_system(&t, &[Some(Slope::new(5, 1).unwrap())]).unwrap();
        let back = GluingSystem::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.hash(), g.hash());
    }
}
