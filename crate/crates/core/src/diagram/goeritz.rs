use super::{DiagramError, LinkDiagram};

/// Checkerboard colouring of faces: `true` for white. The face holding
/// corner `(0, 0)` is white.
fn colour_faces(d: &LinkDiagram, faces: &[Vec<(usize, usize)>]) -> Vec<bool> {
    let n = d.num_crossings();
    let mut face_of = vec![0usize; 4 * n];
    for (f, face) in faces.iter().enumerate() {
        for &(c, s) in face {
            face_of[4 * c + s] = f;
        }
    }
    let mut colour: Vec<Option<bool>> = vec![None; faces.len()];
    // Neighbouring corners at a crossing lie on opposite sides of a strand.
    let mut stack = vec![(face_of[0], true)];
    while let Some((f, col)) = stack.pop() {
        if colour[f].is_some() {
            continue;
        }
        colour[f] = Some(col);
        for &(c, s) in &faces[f] {
            for t in [(s + 1) % 4, (s + 3) % 4] {
                let g = face_of[4 * c + t];
                if colour[g].is_none() {
                    stack.push((g, !col));
                }
            }
        }
    }
    colour.into_iter().map(|c| c.unwrap_or(true)).collect()
}

fn determinant(mut a: Vec<Vec<i128>>) -> i128 {
    // Bareiss fraction-free elimination
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match ((k + 1)..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Absolute determinant of a Goeritz matrix. The white faces index the
/// matrix; each crossing contributes `eta = +1` when its white corners are
/// the ones following the under-strand slots and `-1` otherwise.
pub fn goeritz_determinant(d: &LinkDiagram) -> Result<i64, DiagramError> {
    if d.num_crossings() == 0 {
        return match d.unknotted_extras() {
            1 => Ok(1),
            _ => Err(DiagramError::Disconnected),
        };
    }
    if !d.is_connected() {
        return Err(DiagramError::Disconnected);
    }
    let faces = d.faces();
    let colour = colour_faces(d, &faces);
    let mut index = vec![usize::MAX; faces.len()];
    let mut white = 0;
    for (f, &c) in colour.iter().enumerate() {
        if c {
            index[f] = white;
            white += 1;
        }
    }
    let mut corner_face = vec![0usize; 4 * d.num_crossings()];
    for (f, face) in faces.iter().enumerate() {
        for &(c, s) in face {
            corner_face[4 * c + s] = f;
        }
    }
    let mut g = vec![vec![0i128; white]; white];
    for c in 0..d.num_crossings() {
        let (eta, a, b) = if colour[corner_face[4 * c]] {
            (1, corner_face[4 * c], corner_face[4 * c + 2])
        } else {
            (-1, corner_face[4 * c + 1], corner_face[4 * c + 3])
        };
        if a == b {
            continue;
        }
        let (i, j) = (index[a], index[b]);
        g[i][j] -= eta;
        g[j][i] -= eta;
        g[i][i] += eta;
        g[j][j] += eta;
    }
    let minor: Vec<Vec<i128>> = g.iter().skip(1).map(|r| r[1..].to_vec()).collect();
    Ok(determinant(minor).unsigned_abs() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    #[test]
    fn small_knots() {
        let t = parse_pd("X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)").unwrap();
        assert_eq!(goeritz_determinant(&t).unwrap(), 3);
        assert_eq!(goeritz_determinant(&t.mirror()).unwrap(), 3);
        let f = parse_pd("X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)").unwrap();
        assert_eq!(goeritz_determinant(&f).unwrap(), 5);
        // unknot drawn with one kink
        let u = parse_pd("X(1,2,2,1)").unwrap();
        assert_eq!(goeritz_determinant(&u).unwrap(), 1);
    }

    #[test]
    fn bareiss() {
        assert_eq!(determinant(vec![vec![2, 1], vec![1, 2]]), 3);
        assert_eq!(determinant(vec![vec![0, 1], vec![1, 0]]), -1);
    }
}
