use super::{DiagramError, LinkDiagram};
use crate::snf::{cokernel, HomologySummary};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A slope `p * meridian + q * longitude`, read as the surgery coefficient
/// `p / q`. Normalised so that `q >= 0`, with `(1, 0)` for `q == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct Slope {
    pub p: i64,
    pub q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Slope {
    pub const MERIDIAN: Slope = Slope { p: 1, q: 0 };

    pub fn new(p: i64, q: i64) -> Result<Self, DiagramError> {
        if gcd(p, q) != 1 {
            return Err(DiagramError::BadSlope { p, q });
        }
        Ok(if q == 0 {
            Slope { p: 1, q: 0 }
        } else if q < 0 {
            Slope { p: -p, q: -q }
        } else {
            Slope { p, q }
        })
    }

    /// The slope `1 / a`.
    pub fn reciprocal(a: i64) -> Self {
        Slope::new(1, a).expect("1/a is primitive")
    }

    pub fn is_meridian(self) -> bool {
        self.q == 0
    }

    pub fn negate(self) -> Self {
        Slope { p: -self.p, q: self.q }
    }

    /// Integer framings of the continued-fraction chain of unknots that
    /// realises this rational coefficient: `p/q = a1 - 1/(a2 - 1/(...))`.
    /// Negative coefficients expand `|p|/q` and negate every framing.
    pub fn chain(self) -> Vec<i64> {
        if self.q == 0 {
            return Vec::new();
        }
        let sign = if self.p < 0 { -1 } else { 1 };
        let (mut p, mut q) = (self.p.abs(), self.q);
        let mut out = Vec::new();
        while q != 1 {
            let a = p.div_euclid(q) + 1;
            out.push(sign * a);
            (p, q) = (q, a * q - p);
        }
        out.push(sign * p);
        out
    }
}

impl TryFrom<[i64; 2]> for Slope {
    type Error = DiagramError;
    fn try_from(v: [i64; 2]) -> Result<Self, Self::Error> {
        Slope::new(v[0], v[1])
    }
}

impl From<Slope> for [i64; 2] {
    fn from(s: Slope) -> Self {
        [s.p, s.q]
    }
}

impl std::fmt::Display for Slope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentRole {
    Cusp,
    Filled {
        slope: Slope,
    },
    #[serde(rename = "cocore")]
    CoCore,
    #[serde(rename = "branch")]
    BranchLocus,
    #[serde(rename = "twist")]
    TwistCircle {
        slope: Slope,
    },
}

impl ComponentRole {
    /// Surgery slope for filled and twist components.
    pub fn slope(self) -> Option<Slope> {
        match self {
            ComponentRole::Filled { slope } | ComponentRole::TwistCircle { slope } => Some(slope),
            _ => None,
        }
    }

    /// The role after reversing ambient orientation.
    pub fn mirrored(self) -> Self {
        match self {
            ComponentRole::Filled { slope } => ComponentRole::Filled { slope: slope.negate() },
            ComponentRole::TwistCircle { slope } => ComponentRole::TwistCircle { slope: slope.negate() },
            r => r,
        }
    }
}

/// A diagram with one role per component (knotted components first, then
/// the crossing-less extras).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedLink {
    pub diagram: LinkDiagram,
    pub roles: Vec<ComponentRole>,
}

/// On-disk form of a [`FramedLink`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FramedLinkJson {
    pub pd: Vec<[u32; 4]>,
    #[serde(default)]
    pub unknotted_extras: usize,
    pub roles: Vec<ComponentRole>,
}

impl FramedLink {
    pub fn new(diagram: LinkDiagram, roles: Vec<ComponentRole>) -> Result<Self, DiagramError> {
        if roles.len() != diagram.num_components() {
            return Err(DiagramError::RoleCount { roles: roles.len(), components: diagram.num_components() });
        }
        for (k, r) in roles.iter().enumerate() {
            if let ComponentRole::TwistCircle { slope } = r {
                if slope.p.abs() != 1 && !slope.is_meridian() {
                    return Err(DiagramError::BadTwist { component: k, p: slope.p, q: slope.q });
                }
            }
        }
        if roles.iter().filter(|r| matches!(r, ComponentRole::BranchLocus)).count() > 1 {
            return Err(DiagramError::BranchCount);
        }
        Ok(FramedLink { diagram, roles })
    }

    /// Builds a framed link from unoriented crossings, roles attached to arc
    /// labels, and the roles of crossing-less loops. Components with no
    /// labelled arc get `default`.
    pub fn assemble(
        crossings: Vec<[u32; 4]>,
        label_roles: &BTreeMap<u32, ComponentRole>,
        loops: Vec<ComponentRole>,
        default: ComponentRole,
    ) -> Result<Self, DiagramError> {
        let diagram = LinkDiagram::from_unoriented(crossings, loops.len())?;
        let knotted = diagram.num_knotted_components();
        let mut roles: Vec<Option<ComponentRole>> = vec![None; knotted];
        for (&label, &role) in label_roles {
            if !diagram.arc_component.contains_key(&label) {
                continue;
            }
            let k = diagram.component_of_arc(label);
            match roles[k] {
                Some(r) if r != role => return Err(DiagramError::RoleConflict { label }),
                _ => roles[k] = Some(role),
            }
        }
        let mut roles: Vec<ComponentRole> = roles.into_iter().map(|r| r.unwrap_or(default)).collect();
        roles.extend(loops);
        FramedLink::new(diagram, roles)
    }

    /// All components unfilled.
    pub fn complement(diagram: LinkDiagram) -> Self {
        let roles = vec![ComponentRole::Cusp; diagram.num_components()];
        FramedLink { diagram, roles }
    }

    pub fn from_json_str(s: &str) -> Result<Self, DiagramError> {
        let raw: FramedLinkJson = serde_json::from_str(s).map_err(|e| DiagramError::Json(e.to_string()))?;
        Self::try_from(raw)
    }

    pub fn to_json(&self) -> FramedLinkJson {
        FramedLinkJson {
            pd: self.diagram.crossings().to_vec(),
            unknotted_extras: self.diagram.unknotted_extras(),
            roles: self.roles.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serialisable")
    }

    /// Mirror image: crossings switched, slopes negated.
    pub fn mirror(&self) -> FramedLink {
        FramedLink { diagram: self.diagram.mirror(), roles: self.roles.iter().map(|r| r.mirrored()).collect() }
    }

    /// Linking matrix of the integrally framed link obtained by expanding
    /// every rational coefficient into its continued-fraction chain and
    /// dropping meridionally filled components. Chain unknots follow all
    /// original components, in component order.
    pub fn linking_matrix(&self) -> Result<Vec<Vec<i64>>, DiagramError> {
        let lk = self.diagram.linking_numbers();
        let mut chains = Vec::new();
        for (k, r) in self.roles.iter().enumerate() {
            match r.slope() {
                Some(s) => chains.push(s.chain()),
                None => return Err(DiagramError::Unframed(k)),
            }
        }
        let kept: Vec<usize> = (0..self.roles.len()).filter(|&k| !chains[k].is_empty()).collect();
        let extra: usize = kept.iter().map(|&k| chains[k].len() - 1).sum();
        let n = kept.len() + extra;
        let mut m = vec![vec![0i64; n]; n];
        for (i, &a) in kept.iter().enumerate() {
            for (j, &b) in kept.iter().enumerate() {
                m[i][j] = if i == j { chains[a][0] } else { lk[a][b] };
            }
        }
        let mut next = kept.len();
        for (i, &a) in kept.iter().enumerate() {
            let chain = &chains[a];
            let sign = if chain[0] < 0 { -1 } else { 1 };
            let mut prev = i;
            for &f in &chain[1..] {
                m[next][next] = f;
                m[prev][next] = sign;
                m[next][prev] = sign;
                prev = next;
                next += 1;
            }
        }
        Ok(m)
    }

    /// First homology of the surgered manifold via the Smith normal form of
    /// the linking matrix.
    pub fn homology_of_surgery(&self) -> Result<HomologySummary, DiagramError> {
        let m = self.linking_matrix()?;
        Ok(cokernel(&m, m.len()))
    }
}

impl TryFrom<FramedLinkJson> for FramedLink {
    type Error = DiagramError;
    fn try_from(raw: FramedLinkJson) -> Result<Self, Self::Error> {
        let d = LinkDiagram::new(raw.pd, raw.unknotted_extras)?;
        FramedLink::new(d, raw.roles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd_with_extras;

    fn unknot(slope: Slope) -> FramedLink {
        let d = parse_pd_with_extras("", 1).unwrap();
        FramedLink::new(d, vec![ComponentRole::Filled { slope }]).unwrap()
    }

    #[test]
    fn slope_normalisation() {
        assert_eq!(Slope::new(3, -2).unwrap(), Slope { p: -3, q: 2 });
        assert_eq!(Slope::new(-1, 0).unwrap(), Slope::MERIDIAN);
        assert!(Slope::new(2, 4).is_err());
        assert!(Slope::new(0, 0).is_err());
    }

    #[test]
    fn chains_evaluate_back() {
        for (p, q) in [(1, 2), (5, 3), (-7, 4), (3, 1), (0, 1), (-1, 6)] {
            let c = Slope::new(p, q).unwrap().chain();
            // evaluate a1 - 1/(a2 - 1/(...)) as a fraction
            let (mut num, mut den) = (c[c.len() - 1], 1i64);
            for &a in c[..c.len() - 1].iter().rev() {
                (num, den) = (a * num - den, num);
            }
            if den < 0 {
                (num, den) = (-num, -den);
            }
            assert_eq!((num, den), (p, q), "chain {c:?}");
        }
    }

    #[test]
    fn unknot_homology() {
        let h = unknot(Slope::new(0, 1).unwrap()).homology_of_surgery().unwrap();
        assert_eq!((h.free_rank, h.torsion.clone()), (1, vec![]));
        let h = unknot(Slope::new(5, 1).unwrap()).homology_of_surgery().unwrap();
        assert_eq!((h.free_rank, h.torsion.clone()), (0, vec![5]));
        let h = unknot(Slope::new(7, 3).unwrap()).homology_of_surgery().unwrap();
        assert_eq!(h.order(), 7);
        assert_eq!(unknot(Slope::MERIDIAN).linking_matrix().unwrap(), Vec::<Vec<i64>>::new());
    }

    #[test]
    fn split_unlink() {
        let d = parse_pd_with_extras("", 2).unwrap();
        let s = |p| ComponentRole::Filled { slope: Slope::new(p, 1).unwrap() };
        let fl = FramedLink::new(d, vec![s(2), s(-3)]).unwrap();
        assert_eq!(fl.linking_matrix().unwrap(), vec![vec![2, 0], vec![0, -3]]);
    }

    #[test]
    fn role_json_shape() {
        let r: ComponentRole = serde_json::from_str(r#"{"kind":"filled","slope":[1,2]}"#).unwrap();
        assert_eq!(r, ComponentRole::Filled { slope: Slope { p: 1, q: 2 } });
        let r: ComponentRole = serde_json::from_str(r#"{"kind":"cocore"}"#).unwrap();
        assert_eq!(r, ComponentRole::CoCore);
        assert!(serde_json::from_str::<ComponentRole>(r#"{"kind":"filled","slope":[2,4]}"#).is_err());
    }
}
