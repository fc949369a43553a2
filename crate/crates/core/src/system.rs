//! Static model of a graph-structured symbol-object membrane system.
//!
//! A system is a set of compartments labeled 1..m arranged in a nesting
//! tree (for `in`/`out` targets) plus an undirected relation of channel
//! edges (for `to` targets), with per-compartment multiset contents and
//! evolution rules and a designated elementary output compartment.
//!
//! Serialized form is the `psys-v1` JSON schema; see [`PSystem`] docs.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::multiset::{Multiset, Symbol};

/// A compartment label, 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A stage label. Stages partition compartments into sub-system groups:
/// the unit of quiescence gating and of reset actions. A compartment
/// without an explicit stage defaults to a singleton stage named after its
/// own label.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stage(pub u32);

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Target command attached to a produced object.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Target {
    /// Stay in the compartment where the rule fired.
    Here,
    /// Move to the surrounding compartment; at the skin the object is
    /// discarded (the environment is a sink).
    Out,
    /// Move into the immediate child compartment `j`.
    In(Label),
    /// Move along a channel edge to compartment `j`; requires `{i,j}` in
    /// the edge relation.
    To(Label),
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Target::Here => "here".serialize(ser),
            Target::Out => "out".serialize(ser),
            Target::In(j) => ("in", j.0).serialize(ser),
            Target::To(j) => ("to", j.0).serialize(ser),
        }
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Word(String),
            Pair(String, u32),
        }
        match Repr::deserialize(de)? {
            Repr::Word(w) if w == "here" => Ok(Target::Here),
            Repr::Word(w) if w == "out" => Ok(Target::Out),
            Repr::Word(w) => Err(D::Error::custom(format!("unknown target {w:?}"))),
            Repr::Pair(k, j) if k == "in" => Ok(Target::In(Label(j))),
            Repr::Pair(k, j) if k == "to" => Ok(Target::To(Label(j))),
            Repr::Pair(k, _) => Err(D::Error::custom(format!("unknown target kind {k:?}"))),
        }
    }
}

/// The three rule kinds.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// `u -> v` with non-empty `u`.
    Ordinary,
    /// `u -> empty`: annihilates the consumed objects.
    Catharsis,
    /// `empty -> v`: applicable only to an empty compartment, and consumed
    /// after one use (until its stage is reset).
    OneShotEmpty,
}

/// One rhs item: a produced symbol with its routing target.
pub type Product = (Symbol, Target);

/// An evolution rule.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EvolutionRule {
    pub lhs: Multiset,
    #[serde(serialize_with = "ser_rhs", deserialize_with = "de_rhs")]
    pub rhs: Vec<Product>,
    pub kind: RuleKind,
    /// Strong priority rank: an applicable higher-priority rule blocks
    /// lower-priority rules in the same compartment for the whole step.
    #[serde(default)]
    pub priority: u32,
    /// When present, the rule is applicable only if at least one copy of
    /// this symbol is in the compartment; promoters are not consumed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub promoter: Option<Symbol>,
    /// When present, the rule is applicable only while the named stage has
    /// no applicable non-gated rule (quiescence gating).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<Stage>,
    /// When present, applying the rule re-initializes the named stage at
    /// the end of the step: contents of its compartments (and everything
    /// nested inside them) return to the initial w_i and their one-shot
    /// rules are re-armed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<Stage>,
}

fn ser_rhs<S: Serializer>(rhs: &[Product], ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_seq(rhs.iter().map(|(sym, tar)| (sym.clone(), *tar)))
}

fn de_rhs<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Product>, D::Error> {
    Vec::<(Symbol, Target)>::deserialize(de)
}

impl EvolutionRule {
    /// Plain cooperative/non-cooperative rewrite rule.
    pub fn ordinary(lhs: Multiset, rhs: Vec<Product>) -> Self {
        EvolutionRule {
            lhs,
            rhs,
            kind: RuleKind::Ordinary,
            priority: 0,
            promoter: None,
            gate: None,
            reset: None,
        }
    }

    /// `u -> empty`.
    pub fn catharsis(lhs: Multiset) -> Self {
        EvolutionRule {
            lhs,
            rhs: Vec::new(),
            kind: RuleKind::Catharsis,
            priority: 0,
            promoter: None,
            gate: None,
            reset: None,
        }
    }

    /// `empty -> v`, usable once per arming.
    pub fn one_shot(rhs: Vec<Product>) -> Self {
        EvolutionRule {
            lhs: Multiset::new(),
            rhs,
            kind: RuleKind::OneShotEmpty,
            priority: 0,
            promoter: None,
            gate: None,
            reset: None,
        }
    }

    pub fn with_priority(mut self, priority: u32) -> Self {
        self.priority = priority;
        self
    }

    pub fn with_promoter(mut self, promoter: Symbol) -> Self {
        self.promoter = Some(promoter);
        self
    }

    pub fn with_gate(mut self, gate: Stage) -> Self {
        self.gate = Some(gate);
        self
    }

    pub fn with_reset(mut self, reset: Stage) -> Self {
        self.reset = Some(reset);
        self
    }

    /// The radius of the rule is the size of its left multiset.
    pub fn radius(&self) -> u64 {
        self.lhs.cardinality()
    }
}

/// An undirected channel edge, stored with endpoints in sorted order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge(Label, Label);

impl Edge {
    pub fn new(a: Label, b: Label) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn endpoints(&self) -> (Label, Label) {
        (self.0, self.1)
    }
}

impl Serialize for Edge {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        (self.0 .0, self.1 .0).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let (a, b) = <(u32, u32)>::deserialize(de)?;
        Ok(Edge::new(Label(a), Label(b)))
    }
}

/// One compartment: label, position in the nesting tree, stage, initial
/// contents and rule list.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Compartment {
    pub label: Label,
    /// Surrounding compartment; `None` for the skin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Label>,
    /// Stage assignment; defaults to a stage named after the label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    #[serde(default)]
    pub initial: Multiset,
    #[serde(default)]
    pub rules: Vec<EvolutionRule>,
}

/// A validated-on-demand graph-structured P system. Serialized as `psys-v1`:
///
/// ```json
/// {"alphabet":["a"],
///  "compartments":[{"label":1,"initial":{"a":2},"rules":[
///     {"lhs":{"a":1},"rhs":[["a",["in",2]]],"kind":"ordinary"}]},
///    {"label":2,"parent":1}],
///  "edges":[],
///  "output":2}
/// ```
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PSystem {
    pub alphabet: BTreeSet<Symbol>,
    pub compartments: Vec<Compartment>,
    #[serde(default)]
    pub edges: BTreeSet<Edge>,
    pub output: Label,
}

/// A structural violation, with coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("system has no compartments")]
    Empty,
    #[error("compartment at position {position} has label {found} (expected {expected})")]
    LabelMismatch {
        position: usize,
        found: Label,
        expected: Label,
    },
    #[error("compartment {0} names out-of-range parent {1}")]
    ParentOutOfRange(Label, Label),
    #[error("compartment {0} is its own ancestor")]
    ParentCycle(Label),
    #[error("system has {0} roots (exactly one skin expected)")]
    RootCount(usize),
    #[error("output {0} is out of range")]
    OutputOutOfRange(Label),
    #[error("output {0} is not elementary")]
    OutputNotElementary(Label),
    #[error("edge ({0}, {1}) has an out-of-range endpoint")]
    EdgeOutOfRange(Label, Label),
    #[error("rule {rule} of compartment {compartment}: {reason}")]
    MalformedRule {
        compartment: Label,
        rule: usize,
        reason: String,
    },
    #[error("rule {rule} of compartment {compartment} targets in_{target}, which is not an immediate child")]
    InvalidInTarget {
        compartment: Label,
        rule: usize,
        target: Label,
    },
    #[error(
        "rule {rule} of compartment {compartment} targets to_{target} without a matching edge"
    )]
    InvalidGraphTarget {
        compartment: Label,
        rule: usize,
        target: Label,
    },
    #[error("symbol {symbol} {place} of compartment {compartment} is not in the alphabet")]
    UnknownSymbol {
        compartment: Label,
        place: String,
        symbol: Symbol,
    },
    #[error("rule {rule} of compartment {compartment} references unknown stage {stage}")]
    UnknownStage {
        compartment: Label,
        rule: usize,
        stage: Stage,
    },
}

impl PSystem {
    /// Number of compartments.
    pub fn m(&self) -> u32 {
        self.compartments.len() as u32
    }

    pub fn compartment(&self, label: Label) -> &Compartment {
        &self.compartments[(label.0 - 1) as usize]
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (1..=self.m()).map(Label)
    }

    /// The stage a compartment belongs to (explicit or defaulted).
    pub fn stage_of(&self, label: Label) -> Stage {
        self.compartment(label).stage.unwrap_or(Stage(label.0))
    }

    pub fn parent_of(&self, label: Label) -> Option<Label> {
        self.compartment(label).parent
    }

    pub fn children_of(&self, label: Label) -> impl Iterator<Item = Label> + '_ {
        self.compartments
            .iter()
            .filter(move |c| c.parent == Some(label))
            .map(|c| c.label)
    }

    pub fn has_edge(&self, a: Label, b: Label) -> bool {
        self.edges.contains(&Edge::new(a, b))
    }

    /// All compartments of `stage`, plus everything nested inside them.
    /// This is the scope a reset action re-initializes.
    pub fn stage_scope(&self, stage: Stage) -> BTreeSet<Label> {
        let mut scope: BTreeSet<Label> = self
            .labels()
            .filter(|&l| self.stage_of(l) == stage)
            .collect();
        // close over descendants
        let mut grew = true;
        while grew {
            grew = false;
            for c in &self.compartments {
                if let Some(p) = c.parent {
                    if scope.contains(&p) && scope.insert(c.label) {
                        grew = true;
                    }
                }
            }
        }
        scope
    }

    fn in_range(&self, label: Label) -> bool {
        label.0 >= 1 && label.0 <= self.m()
    }

    /// Checks every structural invariant, returning one error per violation.
    pub fn validate(&self) -> Vec<StructuralError> {
        let mut errors = Vec::new();
        if self.compartments.is_empty() {
            errors.push(StructuralError::Empty);
            return errors;
        }
        for (position, comp) in self.compartments.iter().enumerate() {
            let expected = Label(position as u32 + 1);
            if comp.label != expected {
                errors.push(StructuralError::LabelMismatch {
                    position,
                    found: comp.label,
                    expected,
                });
            }
        }
        if !errors.is_empty() {
            // Label addressing is broken; the remaining checks rely on it.
            return errors;
        }

        let roots = self
            .compartments
            .iter()
            .filter(|c| c.parent.is_none())
            .count();
        if roots != 1 {
            errors.push(StructuralError::RootCount(roots));
        }
        for comp in &self.compartments {
            if let Some(parent) = comp.parent {
                if !self.in_range(parent) {
                    errors.push(StructuralError::ParentOutOfRange(comp.label, parent));
                    continue;
                }
                // walk to the root; a walk longer than m is a cycle
                let mut cursor = parent;
                let mut hops = 0;
                loop {
                    if cursor == comp.label {
                        errors.push(StructuralError::ParentCycle(comp.label));
                        break;
                    }
                    match self.parent_of(cursor) {
                        Some(next) if self.in_range(next) => cursor = next,
                        _ => break,
                    }
                    hops += 1;
                    if hops > self.m() {
                        errors.push(StructuralError::ParentCycle(comp.label));
                        break;
                    }
                }
            }
        }

        if !self.in_range(self.output) {
            errors.push(StructuralError::OutputOutOfRange(self.output));
        } else if self.children_of(self.output).next().is_some() {
            errors.push(StructuralError::OutputNotElementary(self.output));
        }

        for edge in &self.edges {
            let (a, b) = edge.endpoints();
            if !self.in_range(a) || !self.in_range(b) {
                errors.push(StructuralError::EdgeOutOfRange(a, b));
            }
        }

        let stages: BTreeSet<Stage> = self.labels().map(|l| self.stage_of(l)).collect();

        for comp in &self.compartments {
            for (sym, _) in comp.initial.iter() {
                if !self.alphabet.contains(sym) {
                    errors.push(StructuralError::UnknownSymbol {
                        compartment: comp.label,
                        place: "in the initial contents".into(),
                        symbol: sym.clone(),
                    });
                }
            }
            for (idx, rule) in comp.rules.iter().enumerate() {
                match rule.kind {
                    RuleKind::Ordinary => {
                        if rule.lhs.is_empty() {
                            errors.push(StructuralError::MalformedRule {
                                compartment: comp.label,
                                rule: idx,
                                reason: "ordinary rule has empty lhs".into(),
                            });
                        }
                    }
                    RuleKind::Catharsis => {
                        if rule.lhs.is_empty() {
                            errors.push(StructuralError::MalformedRule {
                                compartment: comp.label,
                                rule: idx,
                                reason: "catharsis rule has empty lhs".into(),
                            });
                        }
                        if !rule.rhs.is_empty() {
                            errors.push(StructuralError::MalformedRule {
                                compartment: comp.label,
                                rule: idx,
                                reason: "catharsis rule has non-empty rhs".into(),
                            });
                        }
                    }
                    RuleKind::OneShotEmpty => {
                        if !rule.lhs.is_empty() {
                            errors.push(StructuralError::MalformedRule {
                                compartment: comp.label,
                                rule: idx,
                                reason: "one-shot rule has non-empty lhs".into(),
                            });
                        }
                        if rule.rhs.is_empty() {
                            errors.push(StructuralError::MalformedRule {
                                compartment: comp.label,
                                rule: idx,
                                reason: "one-shot rule has empty rhs".into(),
                            });
                        }
                    }
                }
                for (sym, _) in rule.lhs.iter() {
                    if !self.alphabet.contains(sym) {
                        errors.push(StructuralError::UnknownSymbol {
                            compartment: comp.label,
                            place: format!("in the lhs of rule {idx}"),
                            symbol: sym.clone(),
                        });
                    }
                }
                for (sym, target) in &rule.rhs {
                    if !self.alphabet.contains(sym) {
                        errors.push(StructuralError::UnknownSymbol {
                            compartment: comp.label,
                            place: format!("in the rhs of rule {idx}"),
                            symbol: sym.clone(),
                        });
                    }
                    match *target {
                        Target::Here | Target::Out => {}
                        Target::In(j) => {
                            if !self.in_range(j) || self.parent_of(j) != Some(comp.label) {
                                errors.push(StructuralError::InvalidInTarget {
                                    compartment: comp.label,
                                    rule: idx,
                                    target: j,
                                });
                            }
                        }
                        Target::To(j) => {
                            if !self.in_range(j) || !self.has_edge(comp.label, j) {
                                errors.push(StructuralError::InvalidGraphTarget {
                                    compartment: comp.label,
                                    rule: idx,
                                    target: j,
                                });
                            }
                        }
                    }
                }
                if let Some(promoter) = &rule.promoter {
                    if !self.alphabet.contains(promoter) {
                        errors.push(StructuralError::UnknownSymbol {
                            compartment: comp.label,
                            place: format!("as the promoter of rule {idx}"),
                            symbol: promoter.clone(),
                        });
                    }
                }
                for stage in [rule.gate, rule.reset].into_iter().flatten() {
                    if !stages.contains(&stage) {
                        errors.push(StructuralError::UnknownStage {
                            compartment: comp.label,
                            rule: idx,
                            stage,
                        });
                    }
                }
            }
        }
        errors
    }

    /// Canonical JSON serialization (compact, sorted maps, fixed field
    /// order). Byte-identical across runs for equal systems.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("PSystem serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(name: &str) -> Symbol {
        Symbol::new(name).unwrap()
    }

    fn ms(pairs: &[(&str, u64)]) -> Multiset {
        pairs.iter().map(|&(s, c)| (sym(s), c)).collect()
    }

    /// Two nested compartments, skin rule sending into the inner one.
    fn nested_pair() -> PSystem {
        PSystem {
            alphabet: [sym("a")].into_iter().collect(),
            compartments: vec![
                Compartment {
                    label: Label(1),
                    parent: None,
                    stage: None,
                    initial: ms(&[("a", 2)]),
                    rules: vec![EvolutionRule::ordinary(
                        ms(&[("a", 1)]),
                        vec![(sym("a"), Target::In(Label(2)))],
                    )],
                },
                Compartment {
                    label: Label(2),
                    parent: Some(Label(1)),
                    stage: None,
                    initial: Multiset::new(),
                    rules: vec![],
                },
            ],
            edges: BTreeSet::new(),
            output: Label(2),
        }
    }

    #[test]
    fn canonical_two_compartment_system_validates() {
        assert_eq!(nested_pair().validate(), vec![]);
    }

    #[test]
    fn to_target_requires_edge() {
        let mut sys = nested_pair();
        sys.compartments[0].rules[0].rhs = vec![(sym("a"), Target::To(Label(2)))];
        let errors = sys.validate();
        assert_eq!(
            errors,
            vec![StructuralError::InvalidGraphTarget {
                compartment: Label(1),
                rule: 0,
                target: Label(2),
            }]
        );
        sys.edges.insert(Edge::new(Label(1), Label(2)));
        assert_eq!(sys.validate(), vec![]);
    }

    #[test]
    fn output_must_be_elementary() {
        let mut sys = nested_pair();
        sys.output = Label(1);
        assert_eq!(
            sys.validate(),
            vec![StructuralError::OutputNotElementary(Label(1))]
        );
    }

    #[test]
    fn kind_shape_violations_reported() {
        let mut sys = nested_pair();
        sys.compartments[0].rules = vec![
            EvolutionRule {
                lhs: Multiset::new(),
                rhs: vec![(sym("a"), Target::Here)],
                kind: RuleKind::Ordinary,
                priority: 0,
                promoter: None,
                gate: None,
                reset: None,
            },
            EvolutionRule {
                lhs: ms(&[("a", 1)]),
                rhs: vec![(sym("a"), Target::Here)],
                kind: RuleKind::Catharsis,
                priority: 0,
                promoter: None,
                gate: None,
                reset: None,
            },
            EvolutionRule {
                lhs: ms(&[("a", 1)]),
                rhs: vec![(sym("a"), Target::Here)],
                kind: RuleKind::OneShotEmpty,
                priority: 0,
                promoter: None,
                gate: None,
                reset: None,
            },
        ];
        let errors = sys.validate();
        assert_eq!(errors.len(), 3);
        assert!(errors
            .iter()
            .all(|e| matches!(e, StructuralError::MalformedRule { .. })));
    }

    #[test]
    fn unknown_symbol_and_stage_reported() {
        let mut sys = nested_pair();
        sys.compartments[0].rules[0].promoter = Some(sym("zz"));
        sys.compartments[0].rules[0].gate = Some(Stage(9));
        let errors = sys.validate();
        assert!(errors.contains(&StructuralError::UnknownSymbol {
            compartment: Label(1),
            place: "as the promoter of rule 0".into(),
            symbol: sym("zz"),
        }));
        assert!(errors.contains(&StructuralError::UnknownStage {
            compartment: Label(1),
            rule: 0,
            stage: Stage(9),
        }));
    }

    #[test]
    fn parent_cycle_detected() {
        let mut sys = nested_pair();
        sys.compartments[0].parent = Some(Label(2));
        let errors = sys.validate();
        assert!(errors
            .iter()
            .any(|e| matches!(e, StructuralError::ParentCycle(_))));
        assert!(errors.contains(&StructuralError::RootCount(0)));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut sys = nested_pair();
        sys.edges.insert(Edge::new(Label(2), Label(1)));
        sys.compartments[0].rules[0].promoter = Some(sym("a"));
        sys.compartments[0].rules[0].priority = 3;
        let json = sys.to_json();
        let back = PSystem::from_json(&json).unwrap();
        assert_eq!(back, sys);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn edge_endpoints_normalized() {
        assert_eq!(Edge::new(Label(3), Label(1)), Edge::new(Label(1), Label(3)));
        let e: Edge = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), "[1,3]");
    }

    #[test]
    fn stage_scope_includes_descendants() {
        // 1 (stage 7) contains 2 contains 3; scope of stage 7 covers all
        let sys = PSystem {
            alphabet: BTreeSet::new(),
            compartments: vec![
                Compartment {
                    label: Label(1),
                    parent: None,
                    stage: Some(Stage(7)),
                    initial: Multiset::new(),
                    rules: vec![],
                },
                Compartment {
                    label: Label(2),
                    parent: Some(Label(1)),
                    stage: Some(Stage(8)),
                    initial: Multiset::new(),
                    rules: vec![],
                },
                Compartment {
                    label: Label(3),
                    parent: Some(Label(2)),
                    stage: Some(Stage(9)),
                    initial: Multiset::new(),
                    rules: vec![],
                },
            ],
            edges: BTreeSet::new(),
            output: Label(3),
        };
        let scope = sys.stage_scope(Stage(7));
        assert_eq!(scope, [Label(1), Label(2), Label(3)].into_iter().collect());
        let scope8 = sys.stage_scope(Stage(8));
        assert_eq!(scope8, [Label(2), Label(3)].into_iter().collect());
    }
}
