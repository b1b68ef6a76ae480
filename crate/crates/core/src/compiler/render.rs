// SPDX-License-Identifier: Apache-2.0

//! LaTeX-style rendering of annotated systems, e.g.
//! `^{(c_2)}(I_1^{(c_1)}I_2)` at `c_1`.

use std::collections::BTreeMap;

use super::annotation::{AnnotatedSystem, KeyTag, Part};
use crate::circuit::{PointChannel, PointId, SpacetimeCircuit, SystemId, SystemKind};
use crate::quantum::{channel_distance, QuantumChannel};

/// `c1` → `c_1`, `g12` → `g_{12}`, `alice` → `alice`.
pub fn latex_point(id: &str) -> String {
    let split = id.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (head, digits) = id.split_at(split);
    match (head.is_empty(), digits.len()) {
        (_, 0) | (true, _) => id.to_string(),
        (false, 1) => format!("{head}_{digits}"),
        (false, _) => format!("{head}_{{{digits}}}"),
    }
}

fn subscript_of(id: &str) -> String {
    let latex = latex_point(id);
    match latex.split_once('_') {
        Some((_, sub)) => sub.to_string(),
        None => format!("{{{id}}}"),
    }
}

/// Display names for the systems of one circuit.
#[derive(Debug, Clone)]
pub struct Naming {
    names: BTreeMap<SystemId, String>,
    order: BTreeMap<SystemId, usize>,
    /// Transit systems entering each output point, in output order.
    output_inputs: Vec<(PointId, Vec<SystemId>)>,
}

fn is_identity(ch: &QuantumChannel) -> bool {
    ch.d_in() == ch.d_out()
        && QuantumChannel::identity(ch.in_legs.clone(), ch.out_legs.clone())
            .ok()
            .and_then(|id| channel_distance(&id, ch).ok())
            .is_some_and(|d| d < 1e-9)
}

impl Naming {
    pub fn new(circ: &SpacetimeCircuit) -> Self {
        let mut names = BTreeMap::new();
        let mut order = BTreeMap::new();
        for (i, s) in circ.systems.iter().enumerate() {
            order.insert(s.id.clone(), i);
            let name = match &s.kind {
                SystemKind::Input { point } => format!("I_{}", subscript_of(point.as_str())),
                SystemKind::Output { point } => format!("O_{}", subscript_of(point.as_str())),
                SystemKind::Ancilla { point } => format!("R_{{{}}}", latex_point(point.as_str())),
                SystemKind::Transit { from, to } => {
                    format!("E_{{({},{})}}", latex_point(from.as_str()), latex_point(to.as_str()))
                }
                SystemKind::Reference => s.id.to_string(),
            };
            names.insert(s.id.clone(), name);
        }
        // A transit system leaving an input point whose channel is a plain
        // identity from the input system is shown under the input's name.
        for c in circ.inputs() {
            if let Some(PointChannel::Kraus(ch)) = circ.channels.get(&c) {
                if ch.in_legs.len() == 1 && ch.out_legs.len() == 1 && is_identity(ch) {
                    if let Some(input) = circ.input_system(&c) {
                        if ch.in_legs[0].name == input.id.as_str() {
                            let alias = names[&input.id].clone();
                            names.insert(SystemId(ch.out_legs[0].name.clone()), alias);
                        }
                    }
                }
            }
        }
        let output_inputs = circ
            .outputs()
            .into_iter()
            .map(|r| {
                let ins = circ
                    .s_in(&r)
                    .into_iter()
                    .filter(|s| matches!(s.kind, SystemKind::Transit { .. }))
                    .map(|s| s.id.clone())
                    .collect();
                (r, ins)
            })
            .collect();
        Naming { names, order, output_inputs }
    }

    pub fn system(&self, id: &SystemId) -> String {
        self.names.get(id).cloned().unwrap_or_else(|| id.to_string())
    }

    fn rank(&self, id: &SystemId) -> usize {
        self.order.get(id).copied().unwrap_or(usize::MAX)
    }

    fn keys(tags: &[KeyTag]) -> String {
        let pts: Vec<String> = tags.iter().map(|t| latex_point(t.point.as_str())).collect();
        format!("^{{({})}}", pts.join(","))
    }

    /// Renders parts in declaration order, grouping runs with a shared
    /// nonempty suffix as `(AB)^{(q)}` and, when `substitute` is set,
    /// collapsing complete output inputs to `S_{in}(r)`.
    fn body(&self, parts: &[Part], substitute: bool) -> String {
        let mut parts: Vec<&Part> = parts.iter().collect();
        parts.sort_by_key(|p| self.rank(&p.system));
        let mut out = String::new();
        if substitute {
            for (r, ins) in &self.output_inputs {
                if ins.is_empty() {
                    continue;
                }
                let all_plain = ins.iter().all(|s| parts.iter().any(|p| &p.system == s && p.suffix.is_empty()));
                if all_plain {
                    out.push_str(&format!("S_{{in}}({})", latex_point(r.as_str())));
                    parts.retain(|p| !ins.contains(&p.system));
                }
            }
        }
        let mut i = 0;
        while i < parts.len() {
            let suffix = &parts[i].suffix;
            let mut j = i + 1;
            while !suffix.is_empty() && j < parts.len() && &parts[j].suffix == suffix {
                j += 1;
            }
            if j - i >= 2 {
                let names: String = parts[i..j].iter().map(|p| self.system(&p.system)).collect();
                out.push_str(&format!("({names}){}", Self::keys(suffix)));
            } else {
                out.push_str(&self.system(&parts[i].system));
                if !suffix.is_empty() {
                    out.push_str(&Self::keys(suffix));
                }
            }
            i = j;
        }
        out
    }

    fn wrap(&self, prefix: &[KeyTag], body: String) -> String {
        if prefix.is_empty() {
            body
        } else {
            format!("{}({body})", Self::keys(prefix))
        }
    }

    pub fn annotation(&self, a: &AnnotatedSystem) -> String {
        self.wrap(&a.port_prefix, self.body(&a.parts, true))
    }

    /// `$<annotation>$ at $<location>$`.
    pub fn line(&self, a: &AnnotatedSystem) -> String {
        format!("${}$ at ${}$", self.annotation(a), latex_point(a.location.as_str()))
    }

    /// The state right before `Λ_source` acts, shown as `Λ_source(...)`.
    pub fn channel_line(&self, a: &AnnotatedSystem, source: &PointId) -> String {
        let inner = format!("\\Lambda_{{{}}}({})", latex_point(source.as_str()), self.body(&a.parts, false));
        format!("${}$ at ${}$", self.wrap(&a.port_prefix, inner), latex_point(a.location.as_str()))
    }
}

/// Canonical form for comparing traces: drops the empty group `{}` that
/// LaTeX sources sometimes put before a leading superscript.
pub fn normalize_trace_line(s: &str) -> String {
    s.replace("{}", "").trim().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_names() {
        assert_eq!(latex_point("c1"), "c_1");
        assert_eq!(latex_point("g12"), "g_{12}");
        assert_eq!(latex_point("alice"), "alice");
        assert_eq!(latex_point("42"), "42");
    }

    #[test]
    fn normalization_drops_empty_groups() {
        assert_eq!(normalize_trace_line("${}^{(c_2)}(A)$"), "$^{(c_2)}(A)$");
    }
}
