//! Plain-text triangulation format.
//!
//! ```text
//! knotcert-triangulation 1
//! tetrahedra <n> cusps <k>
//! <n0> <n1> <n2> <n3> <p0> <p1> <p2> <p3> <c0> <c1> <c2> <c3>
//! ...
//! curves
//! <32 integers>
//! ...
//! ```
//!
//! Each tetrahedron line gives the neighbours across faces 0..3, the face
//! gluing permutations as four-digit image codes (`0132` sends 2 to 3 and 3
//! to 2) and the cusp index of each vertex. Each line of the curve block
//! lists `curve[c][v][f]` for `c` in meridian, longitude, then `v`, then `f`.
//! Blank lines and lines starting with `#` are ignored.

use super::perm::Perm;
use super::{IdealTriangulation, Tetrahedron, TriangulationError};
use std::fmt::Write as _;

const MAGIC: &str = "knotcert-triangulation 1";

fn parse_err(line: usize, msg: impl Into<String>) -> TriangulationError {
    TriangulationError::Parse { line, msg: msg.into() }
}

impl IdealTriangulation {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "tetrahedra {} cusps {}", self.tets.len(), self.num_cusps).unwrap();
        for t in &self.tets {
            let n: Vec<String> = t.neighbor.iter().map(|x| x.to_string()).collect();
            let g: Vec<String> = t.gluing.iter().map(|p| p.to_code()).collect();
            let c: Vec<String> = t.cusp.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{} {} {}", n.join(" "), g.join(" "), c.join(" ")).unwrap();
        }
        writeln!(out, "curves").unwrap();
        for t in &self.tets {
            let w: Vec<String> = t.curve.iter().flatten().flatten().map(|x| x.to_string()).collect();
            writeln!(out, "{}", w.join(" ")).unwrap();
        }
        out
    }

    /// Parses [`IdealTriangulation::to_text`] output and validates it.
    pub fn from_text(text: &str) -> Result<Self, TriangulationError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, first) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        if first != MAGIC {
            return Err(parse_err(ln, format!("expected `{MAGIC}`")));
        }
        let (ln, header) = lines.next().ok_or_else(|| parse_err(ln, "missing header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        let (n, k) = match h.as_slice() {
            ["tetrahedra", n, "cusps", k] => (
                n.parse::<usize>().map_err(|e| parse_err(ln, e.to_string()))?,
                k.parse::<usize>().map_err(|e| parse_err(ln, e.to_string()))?,
            ),
            _ => return Err(parse_err(ln, "expected `tetrahedra <n> cusps <k>`")),
        };
        let mut tets = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "missing tetrahedron line"))?;
            let w: Vec<&str> = l.split_whitespace().collect();
            if w.len() != 12 {
                return Err(parse_err(ln, "tetrahedron line needs 12 fields"));
            }
            let mut t = Tetrahedron::blank();
            for f in 0..4 {
                t.neighbor[f] = w[f].parse().map_err(|_| parse_err(ln, "bad neighbour"))?;
                if t.neighbor[f] >= n {
                    return Err(parse_err(ln, "neighbour out of range"));
                }
                t.gluing[f] = Perm::from_code(w[4 + f]).ok_or_else(|| parse_err(ln, "bad permutation"))?;
                t.cusp[f] = w[8 + f].parse().map_err(|_| parse_err(ln, "bad cusp index"))?;
            }
            tets.push(t);
        }
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "missing `curves`"))?;
        if l != "curves" {
            return Err(parse_err(ln, "expected `curves`"));
        }
        for t in tets.iter_mut() {
            let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "missing curve line"))?;
            let w: Vec<i32> = l
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| parse_err(ln, "bad curve weight")))
                .collect::<Result<_, _>>()?;
            if w.len() != 32 {
                return Err(parse_err(ln, "curve line needs 32 integers"));
            }
            for (i, x) in w.into_iter().enumerate() {
                t.curve[i / 16][(i / 4) % 4][i % 4] = x;
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(parse_err(ln, "trailing content"));
        }
        let tri = IdealTriangulation { tets, num_cusps: k };
        tri.validate()?;
        Ok(tri)
    }
}
