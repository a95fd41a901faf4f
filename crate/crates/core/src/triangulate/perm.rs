//! Permutations of the four vertices of a tetrahedron and the fixed
//! lookup tables describing how vertices, edges and faces relate.

use serde::{Deserialize, Serialize};

/// A permutation of `{0, 1, 2, 3}` stored as its image list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Perm(pub [u8; 4]);

impl Perm {
    pub const IDENTITY: Perm = Perm([0, 1, 2, 3]);

    pub fn new(images: [u8; 4]) -> Self {
        debug_assert!(Self::is_valid(images));
        Perm(images)
    }

    pub fn is_valid(images: [u8; 4]) -> bool {
        let mut seen = [false; 4];
        for &i in &images {
            if i > 3 || seen[i as usize] {
                return false;
            }
            seen[i as usize] = true;
        }
        true
    }

    /// Builds the permutation sending `from[k]` to `to[k]`.
    pub fn from_pairs(from: [usize; 4], to: [usize; 4]) -> Self {
        let mut images = [0u8; 4];
        for k in 0..4 {
            images[from[k]] = to[k] as u8;
        }
        Perm::new(images)
    }

    #[inline]
    pub fn at(self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn inverse(self) -> Self {
        let mut images = [0u8; 4];
        for i in 0..4 {
            images[self.0[i] as usize] = i as u8;
        }
        Perm(images)
    }

    /// `self.then(other)` applies `self` first.
    pub fn then(self, other: Perm) -> Self {
        let mut images = [0u8; 4];
        for i in 0..4 {
            images[i] = other.0[self.0[i] as usize];
        }
        Perm(images)
    }

    pub fn is_odd(self) -> bool {
        let mut inversions = 0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        inversions % 2 == 1
    }

    /// Compact text form used by the triangulation file format, e.g. `0132`.
    pub fn to_code(self) -> String {
        self.0.iter().map(|d| char::from(b'0' + d)).collect()
    }

    pub fn from_code(s: &str) -> Option<Self> {
        let b = s.as_bytes();
        if b.len() != 4 {
            return None;
        }
        let mut images = [0u8; 4];
        for k in 0..4 {
            if !(b'0'..=b'3').contains(&b[k]) {
                return None;
            }
            images[k] = b[k] - b'0';
        }
        Self::is_valid(images).then_some(Perm(images))
    }
}

/// Which of the three shape parameters (z, z', z'') sits on each edge.
pub const EDGE3: [usize; 6] = [0, 1, 2, 2, 1, 0];

pub const EDGE_BETWEEN_FACES: [[usize; 4]; 4] = [[9, 0, 1, 2], [0, 9, 3, 4], [1, 3, 9, 5], [2, 4, 5, 9]];

pub const EDGE3_BETWEEN_FACES: [[usize; 4]; 4] = [[9, 0, 1, 2], [0, 9, 2, 1], [1, 2, 9, 0], [2, 1, 0, 9]];

pub const EDGE_BETWEEN_VERTICES: [[usize; 4]; 4] = [[9, 5, 4, 3], [5, 9, 2, 1], [4, 2, 9, 0], [3, 1, 0, 9]];

pub const ONE_VERTEX_AT_EDGE: [usize; 6] = [2, 1, 1, 0, 0, 0];
pub const OTHER_VERTEX_AT_EDGE: [usize; 6] = [3, 3, 2, 3, 2, 1];

/// `REMAINING_FACE[a][b]` is the third face met when circling vertex `a`
/// counterclockwise (as seen from outside a right-handed tetrahedron)
/// starting from face `b`.
pub const REMAINING_FACE: [[usize; 4]; 4] = [[9, 3, 1, 2], [2, 9, 3, 0], [3, 0, 9, 1], [1, 2, 0, 9]];
