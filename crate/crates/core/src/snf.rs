//! Smith normal form over the integers, used for first homology of surgery
//! descriptions and for rank computations on gluing systems.

/// Result of reducing an integer presentation matrix.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct HomologySummary {
    /// Rank of the free part of the cokernel.
    pub free_rank: usize,
    /// Invariant factors greater than 1, in divisibility order.
    pub torsion: Vec<i64>,
}

impl HomologySummary {
    /// Order of the group, or 0 when it is infinite.
    pub fn order(&self) -> i64 {
        if self.free_rank > 0 {
            0
        } else {
            self.torsion.iter().product()
        }
    }
}

/// Diagonal of the Smith normal form of `m` (rows x cols), nonnegative,
/// with zeros for the missing pivots up to `min(rows, cols)`.
pub fn smith_diagonal(m: &[Vec<i64>]) -> Vec<i64> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut diag = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        // pivot: the smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        loop {
            let mut clean = true;
            for i in (k + 1)..rows {
                let q = a[i][k].div_euclid(a[k][k]);
                if q != 0 {
                    for j in k..cols {
                        a[i][j] -= q * a[k][j];
                    }
                }
                if a[i][k] != 0 {
                    clean = false;
                    if a[i][k].abs() < a[k][k].abs() {
                        a.swap(k, i);
                    }
                }
            }
            for j in (k + 1)..cols {
                let q = a[k][j].div_euclid(a[k][k]);
                if q != 0 {
                    for row in a.iter_mut().skip(k) {
                        row[j] -= q * row[k];
                    }
                }
                if a[k][j] != 0 {
                    clean = false;
                    if a[k][j].abs() < a[k][k].abs() {
                        for row in a.iter_mut() {
                            row.swap(k, j);
                        }
                    }
                }
            }
            if clean {
                // divisibility: fold any entry not divisible by the pivot back in
                let p = a[k][k];
                let bad = ((k + 1)..rows).find(|&i| ((k + 1)..cols).any(|j| a[i][j] % p != 0));
                match bad {
                    Some(i) => {
                        for j in k..cols {
                            let v = a[i][j];
                            a[k][j] += v;
                        }
                    }
                    None => break,
                }
            }
        }
        diag.push(a[k][k].unsigned_abs() as i64);
        k += 1;
    }
    while diag.len() < rows.min(cols) {
        diag.push(0);
    }
    diag
}

/// Cokernel of the square or rectangular relation matrix `m` acting on
/// `Z^rows` (each column a relation).
pub fn cokernel(m: &[Vec<i64>], generators: usize) -> HomologySummary {
    let diag = smith_diagonal(m);
    let nonzero = diag.iter().filter(|&&d| d != 0).count();
    HomologySummary { free_rank: generators - nonzero, torsion: diag.into_iter().filter(|&d| d > 1).collect() }
}

/// Rank of an integer matrix.
pub fn rank(m: &[Vec<i64>]) -> usize {
    smith_diagonal(m).iter().filter(|&&d| d != 0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hopf_pair() {
        assert_eq!(smith_diagonal(&[vec![2, 1], vec![1, 2]]), vec![1, 3]);
        let h = cokernel(&[vec![2, 1], vec![1, 2]], 2);
        assert_eq!(h, HomologySummary { free_rank: 0, torsion: vec![3] });
    }

    #[test]
    fn divisibility_chain() {
        let d = smith_diagonal(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(d, vec![1, 6]);
        let d = smith_diagonal(&[vec![4, 0, 0], vec![0, 6, 0], vec![0, 0, 0]]);
        assert_eq!(d, vec![2, 12, 0]);
    }

    #[test]
    fn rectangular_rank() {
        assert_eq!(rank(&[vec![1, 2, 3], vec![2, 4, 6]]), 1);
        assert_eq!(rank(&[]), 0);
    }
}
