// SPDX-License-Identifier: Apache-2.0

//! Causal structure of the spacetimes tasks live on.
//!
//! Two backends are supported: 1+1 dimensional Minkowski space and finite
//! causal sets. Precedence is reflexive, so `J^+(p)` and `J^-(p)` both contain
//! `p` itself.
//!
//! In 1+1 dimensions the light-cone coordinates `u = t - x`, `v = t + x` turn
//! the causal order into the componentwise order on `(u, v)`, which makes
//! intersections of cones axis-aligned boxes and region emptiness exact.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point {0} does not belong to the {1} backend")]
    BackendMismatch(String, &'static str),
    #[error("unknown causal-set element `{0}`")]
    UnknownElement(String),
    #[error("duplicate causal-set element `{0}`")]
    DuplicateElement(String),
    #[error("causal relation contains a cycle through `{0}` and `{1}`")]
    Cycle(String, String),
    #[error("non-finite Minkowski coordinate ({t}, {x})")]
    NonFinite { t: f64, x: f64 },
    #[error("region queries are not supported for this backend")]
    UnsupportedDimension,
}

/// A spacetime point, tagged by backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Minkowski { t: f64, x: f64 },
    Element(String),
}

impl Point {
    pub fn minkowski(t: f64, x: f64) -> Self {
        Point::Minkowski { t, x }
    }

    pub fn element(id: impl Into<String>) -> Self {
        Point::Element(id.into())
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Point::Minkowski { t, x } => write!(f, "(t={t}, x={x})"),
            Point::Element(id) => write!(f, "{id}"),
        }
    }
}

/// `u = t - x`, `v = t + x`.
pub fn lightcone_coords(t: f64, x: f64) -> (f64, f64) {
    (t - x, t + x)
}

/// A finite causal set with its reflexive-transitive closure precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalSet {
    elements: Vec<String>,
    index: BTreeMap<String, usize>,
    /// `reach[a][b]` is true iff `a ≺ b`.
    reach: Vec<Vec<bool>>,
}

impl CausalSet {
    /// Builds a causal set from a cover or full relation. The closure is
    /// computed here; any cycle (other than self-loops) is rejected.
    pub fn new<S: AsRef<str>>(
        elements: &[S],
        relations: &[(S, S)],
    ) -> Result<Self, GeometryError> {
        let mut index = BTreeMap::new();
        let mut names = Vec::with_capacity(elements.len());
        for e in elements {
            let e = e.as_ref().to_string();
            if index.insert(e.clone(), names.len()).is_some() {
                return Err(GeometryError::DuplicateElement(e));
            }
            names.push(e);
        }
        let n = names.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in relations {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| GeometryError::UnknownElement(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| GeometryError::UnknownElement(b.as_ref().to_string()))?;
            reach[ia][ib] = true;
        }
        // Warshall closure.
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if reach[i][j] && reach[j][i] {
                    return Err(GeometryError::Cycle(names[i].clone(), names[j].clone()));
                }
            }
        }
        Ok(CausalSet { elements: names, index, reach })
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    fn idx(&self, id: &str) -> Result<usize, GeometryError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GeometryError::UnknownElement(id.to_string()))
    }

    pub fn precedes(&self, a: &str, b: &str) -> Result<bool, GeometryError> {
        Ok(self.reach[self.idx(a)?][self.idx(b)?])
    }

    /// Covering pairs of the order: `a ≺ b`, `a ≠ b`, with nothing strictly between.
    pub fn cover_relations(&self) -> Vec<(String, String)> {
        let n = self.elements.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a == b || !self.reach[a][b] {
                    continue;
                }
                let between = (0..n).any(|k| k != a && k != b && self.reach[a][k] && self.reach[k][b]);
                if !between {
                    out.push((self.elements[a].clone(), self.elements[b].clone()));
                }
            }
        }
        out
    }
}

/// The spacetime a task or circuit is defined on.
#[derive(Debug, Clone, PartialEq)]
pub enum Spacetime {
    /// Flat 1+1 Minkowski space; `eps` is a slack added to the time
    /// separation when deciding precedence (0 means exact comparison).
    Minkowski2D { eps: f64 },
    CausalSet(CausalSet),
}

impl Spacetime {
    pub fn minkowski() -> Self {
        Spacetime::Minkowski2D { eps: 0.0 }
    }

    pub fn backend_name(&self) -> &'static str {
        match self {
            Spacetime::Minkowski2D { .. } => "minkowski2d",
            Spacetime::CausalSet(_) => "causal_set",
        }
    }

    /// Checks that `p` is a well-formed point of this spacetime.
    pub fn check_point(&self, p: &Point) -> Result<(), GeometryError> {
        match (self, p) {
            (Spacetime::Minkowski2D { .. }, Point::Minkowski { t, x }) => {
                if t.is_finite() && x.is_finite() {
                    Ok(())
                } else {
                    Err(GeometryError::NonFinite { t: *t, x: *x })
                }
            }
            (Spacetime::CausalSet(cs), Point::Element(id)) => {
                if cs.contains(id) {
                    Ok(())
                } else {
                    Err(GeometryError::UnknownElement(id.clone()))
                }
            }
            _ => Err(GeometryError::BackendMismatch(p.to_string(), self.backend_name())),
        }
    }

    /// Reflexive causal precedence `p ≺ q`.
    pub fn precedes(&self, p: &Point, q: &Point) -> Result<bool, GeometryError> {
        self.check_point(p)?;
        self.check_point(q)?;
        match (self, p, q) {
            (
                Spacetime::Minkowski2D { eps },
                Point::Minkowski { t: t1, x: x1 },
                Point::Minkowski { t: t2, x: x2 },
            ) => Ok((t2 - t1) + eps >= (x2 - x1).abs()),
            (Spacetime::CausalSet(cs), Point::Element(a), Point::Element(b)) => cs.precedes(a, b),
            _ => unreachable!("backend checked above"),
        }
    }

    /// Whether `(∩ J^+(future_of)) ∩ (∩ J^-(past_of))` is nonempty.
    pub fn region_nonempty(&self, region: &Region) -> Result<bool, GeometryError> {
        for p in region.future_of.iter().chain(&region.past_of) {
            self.check_point(p)?;
        }
        match self {
            Spacetime::Minkowski2D { eps } => {
                let (mut lo_u, mut lo_v) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                let (mut hi_u, mut hi_v) = (f64::INFINITY, f64::INFINITY);
                for p in &region.future_of {
                    let (u, v) = minkowski_uv(p);
                    lo_u = lo_u.max(u);
                    lo_v = lo_v.max(v);
                }
                for p in &region.past_of {
                    let (u, v) = minkowski_uv(p);
                    hi_u = hi_u.min(u);
                    hi_v = hi_v.min(v);
                }
                Ok(lo_u <= hi_u + eps && lo_v <= hi_v + eps)
            }
            Spacetime::CausalSet(cs) => {
                let future: Vec<usize> = region
                    .future_of
                    .iter()
                    .map(|p| cs.idx(element_id(p)))
                    .collect::<Result<_, _>>()?;
                let past: Vec<usize> = region
                    .past_of
                    .iter()
                    .map(|p| cs.idx(element_id(p)))
                    .collect::<Result<_, _>>()?;
                Ok((0..cs.elements.len()).any(|e| {
                    future.iter().all(|&f| cs.reach[f][e]) && past.iter().all(|&q| cs.reach[e][q])
                }))
            }
        }
    }
}

fn minkowski_uv(p: &Point) -> (f64, f64) {
    match p {
        Point::Minkowski { t, x } => lightcone_coords(*t, *x),
        Point::Element(_) => unreachable!("checked by caller"),
    }
}

fn element_id(p: &Point) -> &str {
    match p {
        Point::Element(id) => id,
        Point::Minkowski { .. } => unreachable!("checked by caller"),
    }
}

/// `(∩_{p ∈ future_of} J^+(p)) ∩ (∩_{q ∈ past_of} J^-(q))`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Region {
    pub future_of: Vec<Point>,
    pub past_of: Vec<Point>,
}

impl Region {
    pub fn new(future_of: Vec<Point>, past_of: Vec<Point>) -> Self {
        Region { future_of, past_of }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
enum RawSpacetime {
    #[serde(rename = "minkowski2d")]
    Minkowski2D {
        #[serde(default, skip_serializing_if = "is_zero")]
        eps: f64,
    },
    CausalSet {
        elements: Vec<String>,
        relations: Vec<(String, String)>,
    },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Serialize for Spacetime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = match self {
            Spacetime::Minkowski2D { eps } => RawSpacetime::Minkowski2D { eps: *eps },
            Spacetime::CausalSet(cs) => RawSpacetime::CausalSet {
                elements: cs.elements.clone(),
                relations: cs.cover_relations(),
            },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Spacetime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match RawSpacetime::deserialize(d)? {
            RawSpacetime::Minkowski2D { eps } => {
                if !(eps.is_finite() && eps >= 0.0) {
                    return Err(serde::de::Error::custom("eps must be a finite non-negative number"));
                }
                Ok(Spacetime::Minkowski2D { eps })
            }
            RawSpacetime::CausalSet { elements, relations } => {
                CausalSet::new(&elements, &relations).map(Spacetime::CausalSet).map_err(serde::de::Error::custom)
            }
        }
    }
}

/// Builds the smallest causal set realising a bipartite precedence pattern:
/// elements `inputs ∪ outputs`, with `inputs[i] ≺ outputs[j]` iff `matrix[i][j]`.
pub fn bipartite_causal_set(
    inputs: &[String],
    outputs: &[String],
    matrix: &[Vec<bool>],
) -> Result<CausalSet, GeometryError> {
    let mut elements: Vec<String> = inputs.to_vec();
    elements.extend(outputs.iter().cloned());
    let seen: BTreeSet<&String> = elements.iter().collect();
    if seen.len() != elements.len() {
        let dup = elements
            .iter()
            .find(|e| elements.iter().filter(|f| f == e).count() > 1)
            .cloned()
            .unwrap_or_default();
        return Err(GeometryError::DuplicateElement(dup));
    }
    let mut relations = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, &rel) in row.iter().enumerate() {
            if rel {
                relations.push((inputs[i].clone(), outputs[j].clone()));
            }
        }
    }
    CausalSet::new(&elements, &relations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk(t: f64, x: f64) -> Point {
        Point::minkowski(t, x)
    }

    #[test]
    fn minkowski_precedence_examples() {
        let s = Spacetime::minkowski();
        assert!(s.precedes(&mk(0.0, 0.0), &mk(2.0, 1.0)).unwrap());
        assert!(!s.precedes(&mk(0.0, 0.0), &mk(1.0, 2.0)).unwrap());
        assert!(s.precedes(&mk(0.3, -4.0), &mk(0.3, -4.0)).unwrap());
        // on the light cone
        assert!(s.precedes(&mk(0.0, 0.0), &mk(1.0, 1.0)).unwrap());
    }

    #[test]
    fn lightcone_examples() {
        assert_eq!(lightcone_coords(1.0, 0.0), (1.0, 1.0));
        assert_eq!(lightcone_coords(0.0, 1.0), (-1.0, 1.0));
        assert_eq!(lightcone_coords(2.0, -2.0), (4.0, 0.0));
    }

    #[test]
    fn backend_mismatch_and_unknown_element() {
        let s = Spacetime::minkowski();
        assert!(matches!(
            s.precedes(&Point::element("a"), &mk(0.0, 0.0)),
            Err(GeometryError::BackendMismatch(..))
        ));
        let cs = Spacetime::CausalSet(CausalSet::new(&["a", "b"], &[("a", "b")]).unwrap());
        assert!(cs.precedes(&Point::element("a"), &Point::element("b")).unwrap());
        assert!(!cs.precedes(&Point::element("b"), &Point::element("a")).unwrap());
        assert_eq!(
            cs.precedes(&Point::element("a"), &Point::element("zz")),
            Err(GeometryError::UnknownElement("zz".into()))
        );
    }

    #[test]
    fn causal_set_closure_and_cycles() {
        let cs = CausalSet::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert!(cs.precedes("a", "c").unwrap());
        assert_eq!(cs.cover_relations().len(), 2);
        let err = CausalSet::new(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")]).unwrap_err();
        assert!(matches!(err, GeometryError::Cycle(..)));
        // self-loops are just reflexivity
        assert!(CausalSet::new(&["a"], &[("a", "a")]).is_ok());
        assert!(matches!(
            CausalSet::new(&["a", "a"], &[]),
            Err(GeometryError::DuplicateElement(_))
        ));
    }

    #[test]
    fn region_examples() {
        let s = Spacetime::minkowski();
        let reg = Region::new(vec![mk(0.0, -1.0), mk(0.0, 1.0)], vec![mk(2.0, -1.0), mk(2.0, 1.0)]);
        assert!(s.region_nonempty(&reg).unwrap());

        let cs = CausalSet::new(
            &["c1", "c2", "r1", "r2"],
            &[("c1", "r1"), ("c1", "r2"), ("c2", "r1"), ("c2", "r2")],
        )
        .unwrap();
        let cs = Spacetime::CausalSet(cs);
        let e = Point::element;
        let reg = Region::new(vec![e("c1"), e("c2")], vec![e("r1"), e("r2")]);
        assert!(!cs.region_nonempty(&reg).unwrap());
        assert!(cs.region_nonempty(&Region::default()).unwrap());
        assert!(s.region_nonempty(&Region::default()).unwrap());
    }

    #[test]
    fn region_rejects_foreign_points() {
        let s = Spacetime::minkowski();
        let reg = Region::new(vec![Point::element("x")], vec![]);
        assert!(matches!(s.region_nonempty(&reg), Err(GeometryError::BackendMismatch(..))));
    }

    #[test]
    fn spacetime_json_round_trip() {
        let json = r#"{"backend":"causal_set","elements":["a","b","c"],"relations":[["a","b"],["b","c"],["a","c"]]}"#;
        let s: Spacetime = serde_json::from_str(json).unwrap();
        let back = serde_json::to_string(&s).unwrap();
        let again: Spacetime = serde_json::from_str(&back).unwrap();
        assert_eq!(s, again);
        let m: Spacetime = serde_json::from_str(r#"{"backend":"minkowski2d"}"#).unwrap();
        assert_eq!(m, Spacetime::minkowski());
        let bad = r#"{"backend":"causal_set","elements":["a","b"],"relations":[["a","b"],["b","a"]]}"#;
        assert!(serde_json::from_str::<Spacetime>(bad).is_err());
    }
}
