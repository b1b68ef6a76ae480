// SPDX-License-Identifier: Apache-2.0

//! Encryption bookkeeping for teleported systems.
//!
//! A system that was normal-teleported from `p` carries a suffix entry `p`
//! (decrypted last-in-first-out); one that was port-teleported from `p`
//! carries a prefix entry `p` (removable in any order). Normal encryption
//! distributes over tensor products, so suffixes live on the individual
//! parts of a unit; port encryption does not, so the prefix belongs to the
//! whole unit.

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{PointId, SystemId};

/// One encryption layer: where its key lives and which teleportation made it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct KeyTag {
    pub point: PointId,
    pub key: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Part {
    pub system: SystemId,
    /// Normal encryptions in order of occurrence.
    pub suffix: Vec<KeyTag>,
}

impl Part {
    pub fn plain(system: SystemId) -> Self {
        Part { system, suffix: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedSystem {
    pub parts: Vec<Part>,
    /// Port encryptions in order of occurrence.
    pub port_prefix: Vec<KeyTag>,
    pub location: PointId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Normal,
    Port,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("normal key of `{0}` is not the most recent one")]
    NotLastNormalKey(PointId),
    #[error("no encryption from `{0}` is present")]
    KeyNotPresent(PointId),
    #[error("`{at}` is not in the causal future of key point `{key}`")]
    NotInCausalFuture { key: PointId, at: PointId },
    #[error("channel applied under normal encryption")]
    NormalEncryptionPresent,
    #[error("channel legs {expected:?} do not match annotated systems {found:?}")]
    LegMismatch { expected: Vec<SystemId>, found: Vec<SystemId> },
    #[error("normal suffixes differ")]
    SuffixMismatch,
    #[error("systems under port encryption cannot be merged")]
    PortMergeForbidden,
    #[error("systems are at different points: `{0}` and `{1}`")]
    LocationMismatch(PointId, PointId),
}

/// Causal precedence oracle, `precedes(p, q)` for `p ≺ q`.
pub type Precedes<'a> = &'a dyn Fn(&PointId, &PointId) -> bool;

impl AnnotatedSystem {
    pub fn new(systems: Vec<SystemId>, location: PointId) -> Self {
        AnnotatedSystem { parts: systems.into_iter().map(Part::plain).collect(), port_prefix: Vec::new(), location }
    }

    pub fn systems(&self) -> Vec<SystemId> {
        self.parts.iter().map(|p| p.system.clone()).collect()
    }

    pub fn contains(&self, s: &SystemId) -> bool {
        self.parts.iter().any(|p| &p.system == s)
    }

    pub fn is_plain(&self) -> bool {
        self.port_prefix.is_empty() && self.parts.iter().all(|p| p.suffix.is_empty())
    }

    /// Every key point mentioned in prefix or suffixes.
    pub fn key_points(&self) -> Vec<PointId> {
        let mut out: Vec<PointId> = self.port_prefix.iter().map(|t| t.point.clone()).collect();
        for p in &self.parts {
            out.extend(p.suffix.iter().map(|t| t.point.clone()));
        }
        out
    }

    pub fn normal_teleport(&self, to: &PointId, key: u64) -> Self {
        let tag = KeyTag { point: self.location.clone(), key };
        let mut out = self.clone();
        for p in &mut out.parts {
            p.suffix.push(tag.clone());
        }
        out.location = to.clone();
        out
    }

    pub fn port_teleport(&self, to: &PointId, key: u64) -> Self {
        let mut out = self.clone();
        out.port_prefix.push(KeyTag { point: self.location.clone(), key });
        out.location = to.clone();
        out
    }

    /// Removes one layer keyed at `point`. Normal: strips the last suffix
    /// entry of every part whose last entry is at `point`. Port: strips the
    /// latest prefix entry at `point`. Returns the systems affected.
    pub fn decrypt(
        &self,
        point: &PointId,
        kind: KeyKind,
        precedes: Precedes<'_>,
    ) -> Result<(Self, Vec<SystemId>), AnnotationError> {
        let present = match kind {
            KeyKind::Normal => self.parts.iter().any(|p| p.suffix.iter().any(|t| &t.point == point)),
            KeyKind::Port => self.port_prefix.iter().any(|t| &t.point == point),
        };
        if !present {
            return Err(AnnotationError::KeyNotPresent(point.clone()));
        }
        if !precedes(point, &self.location) {
            return Err(AnnotationError::NotInCausalFuture { key: point.clone(), at: self.location.clone() });
        }
        let mut out = self.clone();
        let mut touched = Vec::new();
        match kind {
            KeyKind::Normal => {
                for p in &mut out.parts {
                    if p.suffix.last().is_some_and(|t| &t.point == point) {
                        p.suffix.pop();
                        touched.push(p.system.clone());
                    }
                }
                if touched.is_empty() {
                    return Err(AnnotationError::NotLastNormalKey(point.clone()));
                }
            }
            KeyKind::Port => {
                let pos = out.port_prefix.iter().rposition(|t| &t.point == point).expect("checked present");
                out.port_prefix.remove(pos);
                touched = out.systems();
            }
        }
        Ok((out, touched))
    }

    /// Applies a channel `ins -> outs` to the whole unit, which must be free
    /// of normal encryption; port encryption is kept.
    pub fn apply_channel(&self, ins: &[SystemId], outs: &[SystemId]) -> Result<Self, AnnotationError> {
        if self.parts.iter().any(|p| !p.suffix.is_empty()) {
            return Err(AnnotationError::NormalEncryptionPresent);
        }
        let mut have = self.systems();
        let mut want = ins.to_vec();
        have.sort();
        want.sort();
        if have != want {
            return Err(AnnotationError::LegMismatch { expected: ins.to_vec(), found: self.systems() });
        }
        Ok(AnnotatedSystem {
            parts: outs.iter().cloned().map(Part::plain).collect(),
            port_prefix: self.port_prefix.clone(),
            location: self.location.clone(),
        })
    }

    /// Reverse distributivity: `(A^{(q)})(B^{(q)}) = (AB)^{(q)}`.
    pub fn merge(&self, other: &AnnotatedSystem) -> Result<Self, AnnotationError> {
        if self.location != other.location {
            return Err(AnnotationError::LocationMismatch(self.location.clone(), other.location.clone()));
        }
        if !self.port_prefix.is_empty() || !other.port_prefix.is_empty() {
            return Err(AnnotationError::PortMergeForbidden);
        }
        let suffix = |a: &AnnotatedSystem| a.parts.first().map(|p| p.suffix.clone());
        let uniform = |a: &AnnotatedSystem| a.parts.iter().all(|p| Some(&p.suffix) == suffix(a).as_ref());
        if !uniform(self) || !uniform(other) || (suffix(self).is_some() && suffix(other).is_some() && suffix(self) != suffix(other)) {
            return Err(AnnotationError::SuffixMismatch);
        }
        self.collect(other)
    }

    /// Holds two co-located units side by side. Each part keeps its own
    /// normal suffix, so suffixes may differ; port-encrypted units cannot
    /// be paired.
    pub fn collect(&self, other: &AnnotatedSystem) -> Result<Self, AnnotationError> {
        if self.location != other.location {
            return Err(AnnotationError::LocationMismatch(self.location.clone(), other.location.clone()));
        }
        if !self.port_prefix.is_empty() || !other.port_prefix.is_empty() {
            return Err(AnnotationError::PortMergeForbidden);
        }
        let mut out = self.clone();
        out.parts.extend(other.parts.iter().cloned());
        Ok(out)
    }

    /// Splits off `systems`; both pieces keep the port prefix, since the
    /// ports they sit in are the same.
    pub fn split(&self, systems: &[SystemId]) -> (Self, Self) {
        let (taken, rest): (Vec<Part>, Vec<Part>) = self.parts.iter().cloned().partition(|p| systems.contains(&p.system));
        let mk = |parts| AnnotatedSystem { parts, port_prefix: self.port_prefix.clone(), location: self.location.clone() };
        (mk(taken), mk(rest))
    }

    /// Moves the unit without encryption (a plain send along an edge).
    pub fn send(&self, to: &PointId) -> Self {
        let mut out = self.clone();
        out.location = to.clone();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PointId {
        s.into()
    }

    fn always(_: &PointId, _: &PointId) -> bool {
        true
    }

    fn never(a: &PointId, b: &PointId) -> bool {
        a == b
    }

    #[test]
    fn normal_teleport_appends_suffix() {
        let a = AnnotatedSystem::new(vec!["I1".into()], p("c1"));
        let b = a.normal_teleport(&p("c2"), 1);
        assert_eq!(b.location, p("c2"));
        assert_eq!(b.parts[0].suffix, vec![KeyTag { point: p("c1"), key: 1 }]);
        let c = b.normal_teleport(&p("c3"), 2);
        let pts: Vec<_> = c.parts[0].suffix.iter().map(|t| t.point.clone()).collect();
        assert_eq!(pts, vec![p("c1"), p("c2")]);
    }

    #[test]
    fn port_teleport_records_occurrence_order() {
        let a = AnnotatedSystem::new(vec!["X".into()], p("c2"));
        let b = a.port_teleport(&p("c3"), 1).port_teleport(&p("c4"), 2).port_teleport(&p("c1"), 3);
        let pts: Vec<_> = b.port_prefix.iter().map(|t| t.point.clone()).collect();
        assert_eq!(pts, vec![p("c2"), p("c3"), p("c4")]);
        assert_eq!(b.location, p("c1"));
    }

    #[test]
    fn decrypt_is_lifo_for_normal_keys() {
        let a = AnnotatedSystem::new(vec!["A".into()], p("c1")).normal_teleport(&p("c2"), 1).normal_teleport(&p("c3"), 2);
        let err = a.decrypt(&p("c1"), KeyKind::Normal, &always).unwrap_err();
        assert_eq!(err, AnnotationError::NotLastNormalKey(p("c1")));
        let (b, touched) = a.decrypt(&p("c2"), KeyKind::Normal, &always).unwrap();
        assert_eq!(touched, vec![SystemId::from("A")]);
        let (c, _) = b.decrypt(&p("c1"), KeyKind::Normal, &always).unwrap();
        assert!(c.is_plain());
        assert_eq!(
            c.decrypt(&p("c1"), KeyKind::Normal, &always).unwrap_err(),
            AnnotationError::KeyNotPresent(p("c1"))
        );
    }

    #[test]
    fn round_trip_restores_annotation() {
        let a = AnnotatedSystem::new(vec!["A".into()], p("c1"));
        let moved = a.normal_teleport(&p("c2"), 5).send(&p("c1"));
        let (back, _) = moved.decrypt(&p("c1"), KeyKind::Normal, &always).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn port_keys_come_off_in_any_order() {
        let a = AnnotatedSystem::new(vec!["X".into()], p("c2"))
            .port_teleport(&p("c3"), 1)
            .port_teleport(&p("c4"), 2)
            .port_teleport(&p("c1"), 3);
        let (b, _) = a.decrypt(&p("c3"), KeyKind::Port, &always).unwrap();
        let (c, _) = b.decrypt(&p("c2"), KeyKind::Port, &always).unwrap();
        let (d, _) = c.decrypt(&p("c4"), KeyKind::Port, &always).unwrap();
        assert!(d.is_plain());
    }

    #[test]
    fn decryption_needs_causal_future() {
        let a = AnnotatedSystem::new(vec!["A".into()], p("c1")).normal_teleport(&p("c2"), 1);
        let err = a.decrypt(&p("c1"), KeyKind::Normal, &never).unwrap_err();
        assert!(matches!(err, AnnotationError::NotInCausalFuture { .. }));
    }

    #[test]
    fn channel_only_under_port_encryption() {
        let a = AnnotatedSystem::new(vec!["I1".into(), "I2".into()], p("c2")).port_teleport(&p("c1"), 1);
        let out = a.apply_channel(&["I2".into(), "I1".into()], &["E".into()]).unwrap();
        assert_eq!(out.port_prefix, a.port_prefix);
        assert_eq!(out.systems(), vec![SystemId::from("E")]);
        let same = a.apply_channel(&["I1".into(), "I2".into()], &["I1".into(), "I2".into()]).unwrap();
        assert_eq!(same, a);
        let enc = AnnotatedSystem::new(vec!["I1".into()], p("c1")).normal_teleport(&p("c2"), 2);
        assert_eq!(enc.apply_channel(&["I1".into()], &["E".into()]).unwrap_err(), AnnotationError::NormalEncryptionPresent);
        assert!(matches!(a.apply_channel(&["I1".into()], &["E".into()]), Err(AnnotationError::LegMismatch { .. })));
    }

    #[test]
    fn merge_rules() {
        let a = AnnotatedSystem::new(vec!["A".into()], p("q0")).normal_teleport(&p("x"), 1);
        let b = AnnotatedSystem::new(vec!["B".into()], p("q0")).normal_teleport(&p("x"), 1);
        let ab = a.merge(&b).unwrap();
        assert_eq!(ab.systems(), vec![SystemId::from("A"), SystemId::from("B")]);

        let pa = AnnotatedSystem::new(vec!["A".into()], p("q")).port_teleport(&p("x"), 2);
        let pb = AnnotatedSystem::new(vec!["B".into()], p("q")).port_teleport(&p("x"), 2);
        assert_eq!(pa.merge(&pb).unwrap_err(), AnnotationError::PortMergeForbidden);

        let plain = AnnotatedSystem::new(vec!["C".into()], p("x"));
        assert_eq!(a.merge(&plain).unwrap_err(), AnnotationError::SuffixMismatch);
        assert!(a.collect(&plain).is_ok());
        let other = AnnotatedSystem::new(vec!["D".into()], p("y"));
        assert!(matches!(plain.merge(&other), Err(AnnotationError::LocationMismatch(..))));
        let both = plain.merge(&AnnotatedSystem::new(vec!["E".into()], p("x"))).unwrap();
        assert_eq!(both.parts.len(), 2);
    }
}
