//! Execution engine: admissibility, maximal-parallel selection, step
//! application, halting and output reading.
//!
//! Rules are applied synchronously: all applicability conditions
//! (containment, promoters, emptiness for one-shot rules, gates,
//! priorities) are evaluated once against the step-start contents, never
//! against residuals during selection. A step applies a multiset of rule
//! instances that cannot be extended by any further applicable instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::multiset::Multiset;
use crate::system::{Label, PSystem, RuleKind, StructuralError, Target};

/// Deterministic 64-bit generator (splitmix64). Self-contained so traces
/// stay bit-identical regardless of any external RNG crate's evolution.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw in `0..bound` (modulo; bias is irrelevant here).
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }
}

/// Snapshot of a running system between steps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    /// Contents of every compartment, keyed by label.
    pub contents: BTreeMap<Label, Multiset>,
    /// Coordinates of one-shot rules consumed since their last arming.
    pub fired: BTreeSet<(Label, usize)>,
    /// Number of steps taken so far.
    pub step: u64,
}

/// How many times each rule fires in one step, keyed by
/// (compartment label, rule index).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct RuleInstanceSet {
    pub counts: BTreeMap<(Label, usize), u64>,
}

impl RuleInstanceSet {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn get(&self, label: Label, rule: usize) -> u64 {
        self.counts.get(&(label, rule)).copied().unwrap_or(0)
    }
}

/// Strategy for resolving the non-deterministic choice among maximal
/// instance sets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    /// One run, every choice derived from (seed, step).
    SeededRandom { seed: u64 },
    /// Explore every maximal set at every step, up to `max_branches`
    /// distinct branches.
    Exhaustive { max_branches: usize },
}

/// Terminal state of a run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Outcome {
    /// No rule admissible anywhere; `output` is the cardinality of the
    /// output compartment.
    Halted {
        output: u64,
    },
    StepLimitExceeded,
}

/// One executed step: the configuration it started from and the instance
/// set applied to it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TraceStep {
    pub before: Configuration,
    pub applied: RuleInstanceSet,
}

/// A complete run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn halted_output(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Halted { output } => Some(output),
            Outcome::StepLimitExceeded => None,
        }
    }

    /// JSON-lines rendering: one record per step
    /// `{"step":n,"applied":[[label,rule,count],...],"contents":{"1":{"a":2}}}`
    /// followed by an outcome record.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            write!(out, r#"{{"step":{},"applied":["#, step.before.step).unwrap();
            for (idx, (&(label, rule), &count)) in step.applied.counts.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                write!(out, "[{},{rule},{count}]", label.0).unwrap();
            }
            out.push_str(r#"],"contents":{"#);
            for (idx, (label, ms)) in step.before.contents.iter().enumerate() {
                if idx > 0 {
                    out.push(',');
                }
                let ms_json = serde_json::to_string(ms).expect("multiset serializes");
                write!(out, r#""{}":{ms_json}"#, label.0).unwrap();
            }
            out.push_str("}}\n");
        }
        match self.outcome {
            Outcome::Halted { output } => {
                writeln!(out, r#"{{"outcome":"halted","output":{output}}}"#).unwrap()
            }
            Outcome::StepLimitExceeded => writeln!(out, r#"{{"outcome":"step_limit"}}"#).unwrap(),
        }
        out
    }
}

/// One fully explored branch of an exhaustive run: the index of the
/// maximal set chosen at each step, and where that path ended.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Branch {
    pub choices: Vec<usize>,
    pub trace: Trace,
}

/// Result of exploring every schedule.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExhaustiveRun {
    pub branches: Vec<Branch>,
}

impl ExhaustiveRun {
    /// Outputs of all halted branches, deduplicated.
    pub fn distinct_outputs(&self) -> BTreeSet<Option<u64>> {
        self.branches
            .iter()
            .map(|b| b.trace.halted_output())
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("system failed validation: {0:?}")]
    InvalidSystem(Vec<StructuralError>),
    #[error("exhaustive exploration exceeded the branch limit of {limit}")]
    BranchLimitExceeded { limit: usize },
    #[error("illegal instance set: {reason}")]
    IllegalInstanceSet { reason: String },
}

/// Builds the starting configuration of a validated system.
pub fn initial_configuration(sys: &PSystem) -> Result<Configuration, EngineError> {
    let errors = sys.validate();
    if !errors.is_empty() {
        return Err(EngineError::InvalidSystem(errors));
    }
    Ok(Configuration {
        contents: sys
            .compartments
            .iter()
            .map(|c| (c.label, c.initial.clone()))
            .collect(),
        fired: BTreeSet::new(),
        step: 0,
    })
}

/// Target validity at runtime. Validated systems always pass; kept as a
/// separate check so hand-built configurations fail closed.
fn targets_ok(sys: &PSystem, label: Label, rule: usize) -> bool {
    sys.compartment(label).rules[rule]
        .rhs
        .iter()
        .all(|(_, target)| match *target {
            Target::Here | Target::Out => true,
            Target::In(j) => j.0 >= 1 && j.0 <= sys.m() && sys.parent_of(j) == Some(label),
            Target::To(j) => j.0 >= 1 && j.0 <= sys.m() && sys.has_edge(label, j),
        })
}

/// Local admissibility: target validity, the kind-specific contents test,
/// and promoter presence. Gates and priorities are resolved on top of
/// this, per step.
fn locally_admissible(cfg: &Configuration, sys: &PSystem, label: Label, rule_idx: usize) -> bool {
    let rule = &sys.compartment(label).rules[rule_idx];
    let contents = &cfg.contents[&label];
    if !targets_ok(sys, label, rule_idx) {
        return false;
    }
    let kind_ok = match rule.kind {
        RuleKind::Ordinary | RuleKind::Catharsis => contents.contains(&rule.lhs),
        RuleKind::OneShotEmpty => contents.is_empty() && !cfg.fired.contains(&(label, rule_idx)),
    };
    if !kind_ok {
        return false;
    }
    match &rule.promoter {
        Some(p) => contents.count(p) >= 1,
        None => true,
    }
}

/// Per-step admissibility of every rule in every compartment.
///
/// Stratification: a stage is quiescent iff it has no locally admissible
/// non-gated rule; a gated rule passes its gate iff the gated stage is
/// quiescent; a rule is admissible iff it is locally admissible, passes
/// its gate, and no gate-passing locally admissible rule of strictly
/// higher priority shares its compartment.
pub fn admissibility_map(cfg: &Configuration, sys: &PSystem) -> BTreeMap<Label, Vec<usize>> {
    let mut local: BTreeMap<Label, Vec<bool>> = BTreeMap::new();
    for label in sys.labels() {
        let flags = (0..sys.compartment(label).rules.len())
            .map(|idx| locally_admissible(cfg, sys, label, idx))
            .collect();
        local.insert(label, flags);
    }

    let mut busy_stages = BTreeSet::new();
    for label in sys.labels() {
        let stage = sys.stage_of(label);
        if busy_stages.contains(&stage) {
            continue;
        }
        let rules = &sys.compartment(label).rules;
        if rules
            .iter()
            .enumerate()
            .any(|(idx, rule)| rule.gate.is_none() && local[&label][idx])
        {
            busy_stages.insert(stage);
        }
    }

    let gate_open = |label: Label, idx: usize| -> bool {
        match sys.compartment(label).rules[idx].gate {
            Some(stage) => !busy_stages.contains(&stage),
            None => true,
        }
    };

    let mut result = BTreeMap::new();
    for label in sys.labels() {
        let rules = &sys.compartment(label).rules;
        let ceiling = rules
            .iter()
            .enumerate()
            .filter(|&(idx, _)| local[&label][idx] && gate_open(label, idx))
            .map(|(_, rule)| rule.priority)
            .max();
        let admissible = match ceiling {
            None => Vec::new(),
            Some(top) => rules
                .iter()
                .enumerate()
                .filter(|&(idx, rule)| {
                    local[&label][idx] && gate_open(label, idx) && rule.priority == top
                })
                .map(|(idx, _)| idx)
                .collect(),
        };
        result.insert(label, admissible);
    }
    result
}

/// Admissible rule indices for one compartment.
pub fn admissible_rules(cfg: &Configuration, sys: &PSystem, label: Label) -> Vec<usize> {
    admissibility_map(cfg, sys)
        .remove(&label)
        .unwrap_or_default()
}

fn consumes(sys: &PSystem, label: Label, rule: usize) -> &Multiset {
    &sys.compartment(label).rules[rule].lhs
}

/// True if one more instance of `rule` fits the residual contents.
fn instance_fits(
    sys: &PSystem,
    label: Label,
    rule: usize,
    residual: &Multiset,
    picked: u64,
) -> bool {
    match sys.compartment(label).rules[rule].kind {
        RuleKind::OneShotEmpty => picked == 0,
        _ => residual.contains(consumes(sys, label, rule)),
    }
}

/// All maximal instance sets for one compartment.
fn compartment_maximal_sets(
    cfg: &Configuration,
    sys: &PSystem,
    label: Label,
    admissible: &[usize],
) -> Vec<BTreeMap<usize, u64>> {
    fn explore(
        sys: &PSystem,
        label: Label,
        admissible: &[usize],
        pos: usize,
        residual: Multiset,
        picked: &mut BTreeMap<usize, u64>,
        out: &mut Vec<BTreeMap<usize, u64>>,
    ) {
        if pos == admissible.len() {
            // maximal iff no admissible rule fits what is left
            let maximal = admissible.iter().all(|&r| {
                !instance_fits(
                    sys,
                    label,
                    r,
                    &residual,
                    picked.get(&r).copied().unwrap_or(0),
                )
            });
            if maximal {
                out.push(picked.clone());
            }
            return;
        }
        let rule = admissible[pos];
        let is_one_shot = sys.compartment(label).rules[rule].kind == RuleKind::OneShotEmpty;
        let lhs = consumes(sys, label, rule);
        // how many instances can fire at most
        let cap = if is_one_shot {
            1
        } else {
            lhs.iter()
                .map(|(sym, need)| residual.count(sym) / need)
                .min()
                .unwrap_or(0)
        };
        for count in (0..=cap).rev() {
            let mut next = residual.clone();
            for _ in 0..count {
                next = next.subtract(lhs).expect("cap bounds the subtraction");
            }
            if count > 0 {
                picked.insert(rule, count);
            } else {
                picked.remove(&rule);
            }
            explore(sys, label, admissible, pos + 1, next, picked, out);
        }
        picked.remove(&rule);
    }

    let mut out = Vec::new();
    explore(
        sys,
        label,
        admissible,
        0,
        cfg.contents[&label].clone(),
        &mut BTreeMap::new(),
        &mut out,
    );
    out.sort();
    out.dedup();
    out
}

/// The full set of maximal instance sets for a configuration: the product
/// of the per-compartment sets (compartments select independently because
/// admissibility and consumption are local to each compartment).
pub fn enumerate_maximal_sets(
    cfg: &Configuration,
    sys: &PSystem,
    max_branches: usize,
) -> Result<Vec<RuleInstanceSet>, EngineError> {
    enumerate_with(&admissibility_map(cfg, sys), cfg, sys, max_branches)
}

fn enumerate_with(
    admissible: &BTreeMap<Label, Vec<usize>>,
    cfg: &Configuration,
    sys: &PSystem,
    max_branches: usize,
) -> Result<Vec<RuleInstanceSet>, EngineError> {
    let mut per_compartment: Vec<(Label, Vec<BTreeMap<usize, u64>>)> = Vec::new();
    for label in sys.labels() {
        let sets = compartment_maximal_sets(cfg, sys, label, &admissible[&label]);
        if sets.len() > 1 || (sets.len() == 1 && !sets[0].is_empty()) {
            per_compartment.push((label, sets));
        }
    }
    let total: usize = per_compartment
        .iter()
        .map(|(_, sets)| sets.len())
        .try_fold(1usize, |acc, n| acc.checked_mul(n))
        .unwrap_or(usize::MAX);
    if total > max_branches {
        return Err(EngineError::BranchLimitExceeded {
            limit: max_branches,
        });
    }

    let mut result = vec![RuleInstanceSet::default()];
    for (label, sets) in per_compartment {
        let mut grown = Vec::with_capacity(result.len() * sets.len());
        for base in &result {
            for set in &sets {
                let mut combined = base.clone();
                for (&rule, &count) in set {
                    combined.counts.insert((label, rule), count);
                }
                grown.push(combined);
            }
        }
        result = grown;
    }
    Ok(result)
}

/// Normative seeded selection: collect admissible (compartment, rule)
/// pairs sorted by (label, rule index); repeatedly draw uniformly among
/// the pairs still applicable to the residual contents, decrementing
/// residuals, until none remain. Fully determined by (cfg, sys, seed,
/// cfg.step).
pub fn select_maximal(cfg: &Configuration, sys: &PSystem, seed: u64) -> RuleInstanceSet {
    select_with(&admissibility_map(cfg, sys), cfg, sys, seed)
}

fn select_with(
    admissible: &BTreeMap<Label, Vec<usize>>,
    cfg: &Configuration,
    sys: &PSystem,
    seed: u64,
) -> RuleInstanceSet {
    let mut rng = SplitMix64::new(seed ^ cfg.step.wrapping_mul(0xA076_1D64_78BD_642F));
    let pairs: Vec<(Label, usize)> = admissible
        .iter()
        .flat_map(|(&label, rules)| rules.iter().map(move |&r| (label, r)))
        .collect();

    let mut residual: BTreeMap<Label, Multiset> = cfg.contents.clone();
    let mut picked = RuleInstanceSet::default();
    loop {
        let applicable: Vec<&(Label, usize)> = pairs
            .iter()
            .filter(|(label, rule)| {
                instance_fits(
                    sys,
                    *label,
                    *rule,
                    &residual[label],
                    picked.get(*label, *rule),
                )
            })
            .collect();
        if applicable.is_empty() {
            return picked;
        }
        let &(label, rule) = applicable[rng.below(applicable.len())];
        *picked.counts.entry((label, rule)).or_insert(0) += 1;
        let lhs = consumes(sys, label, rule);
        if !lhs.is_empty() {
            let reduced = residual[&label].subtract(lhs).expect("fit checked");
            residual.insert(label, reduced);
        }
    }
}

/// Applies one maximal instance set, producing the next configuration.
///
/// Effects, in order: consumption of all left-hand sides, placement of
/// all products (Out at the skin discards), recording of fired one-shot
/// coordinates, then reset actions, which re-initialize every compartment
/// in the named stage's scope and re-arm its one-shot rules.
pub fn apply_step(
    cfg: &Configuration,
    sys: &PSystem,
    set: &RuleInstanceSet,
) -> Result<Configuration, EngineError> {
    apply_with(&admissibility_map(cfg, sys), cfg, sys, set)
}

fn apply_with(
    admissible: &BTreeMap<Label, Vec<usize>>,
    cfg: &Configuration,
    sys: &PSystem,
    set: &RuleInstanceSet,
) -> Result<Configuration, EngineError> {
    // guard: only admissible rules, consumption within contents
    let mut consumption: BTreeMap<Label, Multiset> = BTreeMap::new();
    for (&(label, rule), &count) in &set.counts {
        if count == 0 {
            return Err(EngineError::IllegalInstanceSet {
                reason: format!("zero count recorded for rule {rule} at {label}"),
            });
        }
        if !admissible.get(&label).is_some_and(|rs| rs.contains(&rule)) {
            return Err(EngineError::IllegalInstanceSet {
                reason: format!("rule {rule} at {label} is not admissible"),
            });
        }
        let kind = sys.compartment(label).rules[rule].kind;
        if kind == RuleKind::OneShotEmpty && count > 1 {
            return Err(EngineError::IllegalInstanceSet {
                reason: format!("one-shot rule {rule} at {label} fired {count} times"),
            });
        }
        let mut want = consumption.remove(&label).unwrap_or_default();
        for _ in 0..count {
            want = want.union(consumes(sys, label, rule));
        }
        consumption.insert(label, want);
    }
    for (label, want) in &consumption {
        if !cfg.contents[label].contains(want) {
            return Err(EngineError::IllegalInstanceSet {
                reason: format!("consumption at {label} exceeds contents"),
            });
        }
    }
    // guard: maximality — no admissible instance fits the residuals
    for (&label, rules) in admissible {
        let residual = match consumption.get(&label) {
            Some(want) => cfg.contents[&label].subtract(want).expect("checked"),
            None => cfg.contents[&label].clone(),
        };
        for &rule in rules {
            if instance_fits(sys, label, rule, &residual, set.get(label, rule)) {
                return Err(EngineError::IllegalInstanceSet {
                    reason: format!("not maximal: rule {rule} at {label} could still fire"),
                });
            }
        }
    }

    let mut contents = cfg.contents.clone();
    for (label, want) in &consumption {
        let reduced = contents[label].subtract(want).expect("checked");
        contents.insert(*label, reduced);
    }
    let mut fired = cfg.fired.clone();
    let mut reset_stages = BTreeSet::new();
    for (&(label, rule_idx), &count) in &set.counts {
        let rule = &sys.compartment(label).rules[rule_idx];
        for (sym, target) in &rule.rhs {
            let destination = match *target {
                Target::Here => Some(label),
                Target::Out => sys.parent_of(label), // None at the skin: discard
                Target::In(j) | Target::To(j) => Some(j),
            };
            if let Some(dest) = destination {
                contents
                    .get_mut(&dest)
                    .expect("validated label")
                    .insert(sym.clone(), count);
            }
        }
        if rule.kind == RuleKind::OneShotEmpty {
            fired.insert((label, rule_idx));
        }
        if let Some(stage) = rule.reset {
            reset_stages.insert(stage);
        }
    }
    for stage in reset_stages {
        for label in sys.stage_scope(stage) {
            contents.insert(label, sys.compartment(label).initial.clone());
            fired.retain(|&(l, _)| l != label);
        }
    }
    Ok(Configuration {
        contents,
        fired,
        step: cfg.step + 1,
    })
}

/// Runs to halting (no rule admissible anywhere) or to the step limit,
/// with every choice drawn from the seed.
pub fn run_seeded(sys: &PSystem, seed: u64, max_steps: u64) -> Result<Trace, EngineError> {
    let mut cfg = initial_configuration(sys)?;
    let mut steps = Vec::new();
    loop {
        let admissible = admissibility_map(&cfg, sys);
        if admissible.values().all(|rules| rules.is_empty()) {
            let output = cfg.contents[&sys.output].cardinality();
            return Ok(Trace {
                steps,
                outcome: Outcome::Halted { output },
            });
        }
        if cfg.step >= max_steps {
            return Ok(Trace {
                steps,
                outcome: Outcome::StepLimitExceeded,
            });
        }
        let set = select_with(&admissible, &cfg, sys, seed);
        let next = apply_with(&admissible, &cfg, sys, &set)?;
        steps.push(TraceStep {
            before: cfg,
            applied: set,
        });
        cfg = next;
    }
}

/// Depth-first exploration of every maximal-parallel schedule.
///
/// Branch points fan out in the deterministic order produced by
/// [`enumerate_maximal_sets`]; `max_branches` bounds both the per-step
/// fan-out and the number of completed branches.
pub fn run_exhaustive(
    sys: &PSystem,
    max_branches: usize,
    max_steps: u64,
) -> Result<ExhaustiveRun, EngineError> {
    let initial = initial_configuration(sys)?;
    let mut branches = Vec::new();
    // explicit stack: (config, choice path, trace prefix)
    let mut stack: Vec<(Configuration, Vec<usize>, Vec<TraceStep>)> =
        vec![(initial, Vec::new(), Vec::new())];
    while let Some((cfg, choices, steps)) = stack.pop() {
        let admissible = admissibility_map(&cfg, sys);
        if admissible.values().all(|rules| rules.is_empty()) {
            let output = cfg.contents[&sys.output].cardinality();
            branches.push(Branch {
                choices,
                trace: Trace {
                    steps,
                    outcome: Outcome::Halted { output },
                },
            });
        } else if cfg.step >= max_steps {
            branches.push(Branch {
                choices,
                trace: Trace {
                    steps,
                    outcome: Outcome::StepLimitExceeded,
                },
            });
        } else {
            let sets = enumerate_with(&admissible, &cfg, sys, max_branches)?;
            // push in reverse so branch 0 is explored first
            for (idx, set) in sets.iter().enumerate().rev() {
                let next = apply_with(&admissible, &cfg, sys, set)?;
                let mut next_choices = choices.clone();
                next_choices.push(idx);
                let mut next_steps = steps.clone();
                next_steps.push(TraceStep {
                    before: cfg.clone(),
                    applied: set.clone(),
                });
                stack.push((next, next_choices, next_steps));
            }
        }
        if branches.len() > max_branches {
            return Err(EngineError::BranchLimitExceeded {
                limit: max_branches,
            });
        }
    }
    // deterministic order: lexicographic by choice path
    branches.sort_by(|a, b| a.choices.cmp(&b.choices));
    Ok(ExhaustiveRun { branches })
}

/// Convenience dispatch over [`Strategy`].
pub enum RunResult {
    Single(Trace),
    Branches(ExhaustiveRun),
}

pub fn run(sys: &PSystem, strategy: Strategy, max_steps: u64) -> Result<RunResult, EngineError> {
    match strategy {
        Strategy::SeededRandom { seed } => run_seeded(sys, seed, max_steps).map(RunResult::Single),
        Strategy::Exhaustive { max_branches } => {
            run_exhaustive(sys, max_branches, max_steps).map(RunResult::Branches)
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Halted { output } => write!(f, "halted({output})"),
            Outcome::StepLimitExceeded => write!(f, "step_limit"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiset::Symbol;
    use crate::system::{Compartment, Edge, EvolutionRule, Stage};

    fn sym(name: &str) -> Symbol {
        Symbol::new(name).unwrap()
    }

    fn ms(pairs: &[(&str, u64)]) -> Multiset {
        pairs.iter().map(|&(s, c)| (sym(s), c)).collect()
    }

    /// Single-compartment system plus an inner output compartment.
    fn one_pot(initial: Multiset, rules: Vec<EvolutionRule>) -> PSystem {
        let alphabet = ["a", "b", "c", "d", "p", "o"]
            .into_iter()
            .map(sym)
            .collect();
        PSystem {
            alphabet,
            compartments: vec![
                Compartment {
                    label: Label(1),
                    parent: None,
                    stage: None,
                    initial,
                    rules,
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

    fn set_of(pairs: &[(u32, usize, u64)]) -> RuleInstanceSet {
        RuleInstanceSet {
            counts: pairs.iter().map(|&(l, r, c)| ((Label(l), r), c)).collect(),
        }
    }

    #[test]
    fn admissible_containment_cases() {
        // contents {a:2,b:1}, rules [ab->c, a->d]: both admissible
        let sys = one_pot(
            ms(&[("a", 2), ("b", 1)]),
            vec![
                EvolutionRule::ordinary(ms(&[("a", 1), ("b", 1)]), vec![(sym("c"), Target::Here)]),
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("d"), Target::Here)]),
            ],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert_eq!(admissible_rules(&cfg, &sys, Label(1)), vec![0, 1]);
    }

    #[test]
    fn one_shot_admissible_only_untripped_and_empty() {
        let sys = one_pot(
            Multiset::new(),
            vec![EvolutionRule::one_shot(vec![(
                sym("a"),
                Target::In(Label(2)),
            )])],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert_eq!(admissible_rules(&cfg, &sys, Label(1)), vec![0]);
        let mut tripped = cfg.clone();
        tripped.fired.insert((Label(1), 0));
        assert_eq!(
            admissible_rules(&tripped, &sys, Label(1)),
            Vec::<usize>::new()
        );
        let mut inhabited = cfg;
        inhabited.contents.insert(Label(1), ms(&[("a", 1)]));
        assert_eq!(
            admissible_rules(&inhabited, &sys, Label(1)),
            Vec::<usize>::new()
        );
    }

    #[test]
    fn strong_priority_blocks_lower() {
        // r_hi (priority 1, lhs {p,#}) and r_lo (priority 0, lhs {#}),
        // contents {p:1,#:4}: only r_hi admissible
        let sys = one_pot(
            ms(&[("p", 1), ("a", 4)]),
            vec![
                EvolutionRule::ordinary(ms(&[("p", 1), ("a", 1)]), vec![(sym("c"), Target::Here)])
                    .with_priority(1),
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("d"), Target::Here)]),
            ],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert_eq!(admissible_rules(&cfg, &sys, Label(1)), vec![0]);
    }

    /// Independent brute-force oracle for maximal sets of a single
    /// compartment: enumerate all count vectors below saturation bounds,
    /// keep those that fit, drop those extendable by any admissible rule.
    fn brute_force_maximal(
        cfg: &Configuration,
        sys: &PSystem,
        label: Label,
    ) -> BTreeSet<Vec<(usize, u64)>> {
        let admissible = admissible_rules(cfg, sys, label);
        let contents = &cfg.contents[&label];
        let caps: Vec<u64> = admissible
            .iter()
            .map(|&r| {
                let rule = &sys.compartment(label).rules[r];
                match rule.kind {
                    RuleKind::OneShotEmpty => 1,
                    _ => rule
                        .lhs
                        .iter()
                        .map(|(s, need)| contents.count(s) / need)
                        .min()
                        .unwrap_or(0),
                }
            })
            .collect();
        let mut out = BTreeSet::new();
        let mut vector = vec![0u64; admissible.len()];
        loop {
            // does the vector fit?
            let mut need = Multiset::new();
            for (slot, &count) in vector.iter().enumerate() {
                for _ in 0..count {
                    need = need.union(&sys.compartment(label).rules[admissible[slot]].lhs);
                }
            }
            if contents.contains(&need) {
                let residual = contents.subtract(&need).unwrap();
                let extendable = admissible
                    .iter()
                    .enumerate()
                    .any(|(slot, &r)| instance_fits(sys, label, r, &residual, vector[slot]));
                if !extendable {
                    out.insert(
                        vector
                            .iter()
                            .enumerate()
                            .filter(|(_, &c)| c > 0)
                            .map(|(slot, &c)| (admissible[slot], c))
                            .collect(),
                    );
                }
            }
            // odometer
            let mut slot = 0;
            loop {
                if slot == vector.len() {
                    return out;
                }
                if vector[slot] < caps[slot] {
                    vector[slot] += 1;
                    break;
                }
                vector[slot] = 0;
                slot += 1;
            }
        }
    }

    #[test]
    fn enumerate_matches_brute_force_on_competing_rules() {
        let sys = one_pot(
            ms(&[("a", 2), ("b", 1)]),
            vec![
                EvolutionRule::ordinary(ms(&[("a", 1), ("b", 1)]), vec![(sym("c"), Target::Here)]),
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("d"), Target::Here)]),
            ],
        );
        let cfg = initial_configuration(&sys).unwrap();
        let expected = brute_force_maximal(&cfg, &sys, Label(1));
        assert_eq!(
            expected,
            [vec![(0usize, 1u64), (1, 1)], vec![(1, 2)],]
                .into_iter()
                .collect::<BTreeSet<_>>()
        );
        let got: BTreeSet<Vec<(usize, u64)>> = enumerate_maximal_sets(&cfg, &sys, 1000)
            .unwrap()
            .into_iter()
            .map(|set| set.counts.into_iter().map(|((_, r), c)| (r, c)).collect())
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn enumerate_forced_saturation_and_empty() {
        let sys = one_pot(
            ms(&[("a", 3)]),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("b"), Target::Here)],
            )],
        );
        let cfg = initial_configuration(&sys).unwrap();
        let sets = enumerate_maximal_sets(&cfg, &sys, 10).unwrap();
        assert_eq!(sets, vec![set_of(&[(1, 0, 3)])]);

        // no rule applies to {a:1}: the empty set is the only maximal set
        let sys = one_pot(
            ms(&[("a", 1)]),
            vec![EvolutionRule::ordinary(
                ms(&[("b", 1)]),
                vec![(sym("c"), Target::Here)],
            )],
        );
        let cfg = initial_configuration(&sys).unwrap();
        let sets = enumerate_maximal_sets(&cfg, &sys, 10).unwrap();
        assert_eq!(sets, vec![RuleInstanceSet::default()]);
    }

    #[test]
    fn branch_limit_enforced() {
        let sys = one_pot(
            ms(&[("a", 6)]),
            vec![
                EvolutionRule::ordinary(ms(&[("a", 2)]), vec![(sym("b"), Target::Here)]),
                EvolutionRule::ordinary(ms(&[("a", 3)]), vec![(sym("c"), Target::Here)]),
            ],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert!(matches!(
            enumerate_maximal_sets(&cfg, &sys, 1),
            Err(EngineError::BranchLimitExceeded { limit: 1 })
        ));
    }

    #[test]
    fn select_forced_case_every_seed() {
        let sys = one_pot(
            ms(&[("a", 3)]),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("b"), Target::Here)],
            )],
        );
        let cfg = initial_configuration(&sys).unwrap();
        for seed in 0..50 {
            assert_eq!(select_maximal(&cfg, &sys, seed), set_of(&[(1, 0, 3)]));
        }
    }

    #[test]
    fn select_reaches_every_maximal_set() {
        let sys = one_pot(
            ms(&[("a", 2), ("b", 1)]),
            vec![
                EvolutionRule::ordinary(ms(&[("a", 1), ("b", 1)]), vec![(sym("c"), Target::Here)]),
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("d"), Target::Here)]),
            ],
        );
        let cfg = initial_configuration(&sys).unwrap();
        let all: BTreeSet<RuleInstanceSet> = enumerate_maximal_sets(&cfg, &sys, 100)
            .unwrap()
            .into_iter()
            .collect();
        let mut seen = BTreeSet::new();
        for seed in 0..100 {
            let picked = select_maximal(&cfg, &sys, seed);
            assert!(all.contains(&picked), "selection outside the maximal sets");
            seen.insert(picked);
        }
        assert_eq!(
            seen, all,
            "both maximal sets must be reachable over 100 seeds"
        );
    }

    #[test]
    fn select_empty_when_nothing_admissible() {
        let sys = one_pot(ms(&[("a", 1)]), vec![]);
        let cfg = initial_configuration(&sys).unwrap();
        assert!(select_maximal(&cfg, &sys, 0).is_empty());
    }

    #[test]
    fn apply_rejects_non_maximal_and_inadmissible() {
        let sys = one_pot(
            ms(&[("a", 2)]),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("b"), Target::Here)],
            )],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert!(matches!(
            apply_step(&cfg, &sys, &set_of(&[(1, 0, 1)])),
            Err(EngineError::IllegalInstanceSet { .. })
        ));
        assert!(matches!(
            apply_step(&cfg, &sys, &set_of(&[(1, 0, 3)])),
            Err(EngineError::IllegalInstanceSet { .. })
        ));
        assert!(apply_step(&cfg, &sys, &set_of(&[(1, 0, 2)])).is_ok());
    }

    #[test]
    fn out_at_skin_discards() {
        let sys = one_pot(
            ms(&[("a", 1)]),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("a"), Target::Out)],
            )],
        );
        let trace = run_seeded(&sys, 0, 100).unwrap();
        assert_eq!(trace.outcome, Outcome::Halted { output: 0 });
        assert_eq!(trace.steps.len(), 1);
        let last = apply_step(&trace.steps[0].before, &sys, &trace.steps[0].applied).unwrap();
        assert!(last.contents[&Label(1)].is_empty());
    }

    #[test]
    fn promoter_enables_without_consumption() {
        let sys = one_pot(
            ms(&[("p", 1), ("a", 3)]),
            vec![
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("b"), Target::In(Label(2)))])
                    .with_promoter(sym("p")),
            ],
        );
        let trace = run_seeded(&sys, 0, 100).unwrap();
        assert_eq!(trace.outcome, Outcome::Halted { output: 3 });
        // all three instances in one step, promoter still present after
        let after = apply_step(&trace.steps[0].before, &sys, &trace.steps[0].applied).unwrap();
        assert_eq!(after.contents[&Label(1)], ms(&[("p", 1)]));
    }

    #[test]
    fn promoter_absent_blocks() {
        let sys = one_pot(
            ms(&[("a", 3)]),
            vec![
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("b"), Target::In(Label(2)))])
                    .with_promoter(sym("p")),
            ],
        );
        let trace = run_seeded(&sys, 0, 100).unwrap();
        assert_eq!(trace.outcome, Outcome::Halted { output: 0 });
        assert_eq!(trace.steps.len(), 0);
    }

    #[test]
    fn gate_waits_for_stage_quiescence() {
        // compartment 1 (stage 5) drains a's; compartment 3's gated rule
        // forwards o to the output only once stage 5 is quiescent.
        let alphabet = ["a", "o"].into_iter().map(sym).collect();
        let sys = PSystem {
            alphabet,
            compartments: vec![
                Compartment {
                    label: Label(1),
                    parent: None,
                    stage: Some(Stage(5)),
                    initial: ms(&[("a", 2)]),
                    rules: vec![EvolutionRule::catharsis(ms(&[("a", 1)]))],
                },
                Compartment {
                    label: Label(2),
                    parent: Some(Label(1)),
                    stage: Some(Stage(6)),
                    initial: Multiset::new(),
                    rules: vec![],
                },
                Compartment {
                    label: Label(3),
                    parent: Some(Label(1)),
                    stage: Some(Stage(6)),
                    initial: ms(&[("o", 2)]),
                    rules: vec![EvolutionRule::ordinary(
                        ms(&[("o", 1)]),
                        vec![(sym("o"), Target::To(Label(2)))],
                    )
                    .with_gate(Stage(5))],
                },
            ],
            edges: [Edge::new(Label(3), Label(2))].into_iter().collect(),
            output: Label(2),
        };
        let trace = run_seeded(&sys, 1, 100).unwrap();
        assert_eq!(trace.outcome, Outcome::Halted { output: 2 });
        // step 0 must be the catharsis alone: the gate is closed
        assert_eq!(trace.steps[0].applied, set_of(&[(1, 0, 2)]));
        assert_eq!(trace.steps[1].applied, set_of(&[(3, 0, 2)]));
    }

    #[test]
    fn reset_restores_scope_and_rearms() {
        // compartment 2 (stage 9, child of 1) starts with {a:1}, drains it,
        // and its one-shot then fires once; a reset rule in 1 re-arms it.
        let alphabet = ["a", "b", "o", "r"].into_iter().map(sym).collect();
        let sys = PSystem {
            alphabet,
            compartments: vec![
                Compartment {
                    label: Label(1),
                    parent: None,
                    stage: Some(Stage(1)),
                    initial: ms(&[("r", 1)]),
                    rules: vec![EvolutionRule::ordinary(ms(&[("r", 1)]), vec![])
                        .with_gate(Stage(9))
                        .with_reset(Stage(9))],
                },
                Compartment {
                    label: Label(2),
                    parent: Some(Label(1)),
                    stage: Some(Stage(9)),
                    initial: ms(&[("a", 1)]),
                    rules: vec![
                        EvolutionRule::catharsis(ms(&[("a", 1)])),
                        EvolutionRule::one_shot(vec![(sym("o"), Target::In(Label(3)))]),
                    ],
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
        // run manually: catharsis (step 0), one-shot (step 1), then stage 9
        // quiescent: reset fires (step 2) restoring {a:1}, clearing 3, and
        // re-arming the one-shot; the cycle then repeats without the reset
        // token, halting with output 1.
        let trace = run_seeded(&sys, 3, 100).unwrap();
        assert_eq!(trace.steps[0].applied, set_of(&[(2, 0, 1)]));
        assert_eq!(trace.steps[1].applied, set_of(&[(2, 1, 1)]));
        assert_eq!(trace.steps[2].applied, set_of(&[(1, 0, 1)]));
        let after_reset =
            apply_step(&trace.steps[2].before, &sys, &trace.steps[2].applied).unwrap();
        assert_eq!(after_reset.contents[&Label(2)], ms(&[("a", 1)]));
        assert!(after_reset.contents[&Label(3)].is_empty());
        assert!(after_reset.fired.is_empty());
        assert_eq!(trace.outcome, Outcome::Halted { output: 1 });
        assert_eq!(trace.steps.len(), 5);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let sys = one_pot(
            ms(&[("a", 4), ("b", 2)]),
            vec![
                EvolutionRule::ordinary(
                    ms(&[("a", 1), ("b", 1)]),
                    vec![(sym("c"), Target::In(Label(2)))],
                ),
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("d"), Target::In(Label(2)))]),
                EvolutionRule::ordinary(ms(&[("c", 1)]), vec![]),
            ],
        );
        let a = run_seeded(&sys, 42, 100).unwrap();
        let b = run_seeded(&sys, 42, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_jsonl(), b.to_jsonl());
    }

    #[test]
    fn exhaustive_explores_all_orders() {
        let sys = one_pot(
            ms(&[("a", 2), ("b", 1)]),
            vec![
                EvolutionRule::ordinary(
                    ms(&[("a", 1), ("b", 1)]),
                    vec![(sym("c"), Target::In(Label(2)))],
                ),
                EvolutionRule::ordinary(ms(&[("a", 1)]), vec![(sym("d"), Target::In(Label(2)))]),
            ],
        );
        let run = run_exhaustive(&sys, 64, 100).unwrap();
        // branch 1: {r0:1, r1:1} -> output 2; branch 2: {r1:2} -> output 2
        assert_eq!(run.branches.len(), 2);
        assert_eq!(run.distinct_outputs(), [Some(2)].into_iter().collect());
    }

    #[test]
    fn trace_jsonl_shape() {
        let sys = one_pot(
            ms(&[("a", 1)]),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("b"), Target::In(Label(2)))],
            )],
        );
        let trace = run_seeded(&sys, 0, 10).unwrap();
        let jsonl = trace.to_jsonl();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["step"], 0);
        assert_eq!(first["applied"], serde_json::json!([[1, 0, 1]]));
        assert_eq!(first["contents"]["1"], serde_json::json!({"a": 1}));
        let last: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(last["outcome"], "halted");
        assert_eq!(last["output"], 1);
    }

    #[test]
    fn initial_configuration_rejects_invalid_systems() {
        let mut sys = one_pot(Multiset::new(), vec![]);
        sys.output = Label(9);
        assert!(matches!(
            initial_configuration(&sys),
            Err(EngineError::InvalidSystem(_))
        ));
    }

    #[test]
    fn initial_configuration_snapshot() {
        // all contents empty: nothing admissible, halting immediately
        let sys = one_pot(
            Multiset::new(),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("b"), Target::Here)],
            )],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert!(cfg.contents.values().all(Multiset::is_empty));
        assert!(cfg.fired.is_empty());
        assert_eq!(cfg.step, 0);
        let trace = run_seeded(&sys, 0, 10).unwrap();
        assert_eq!(trace.outcome, Outcome::Halted { output: 0 });
        assert_eq!(trace.steps.len(), 0);

        // a one-shot rule makes the empty system take a step first
        let sys = one_pot(
            Multiset::new(),
            vec![EvolutionRule::one_shot(vec![(
                sym("a"),
                Target::In(Label(2)),
            )])],
        );
        let cfg = initial_configuration(&sys).unwrap();
        assert!(cfg.contents[&Label(1)].is_empty());
        assert!(!cfg.fired.contains(&(Label(1), 0)));
        let trace = run_seeded(&sys, 0, 10).unwrap();
        assert_eq!(trace.outcome, Outcome::Halted { output: 1 });
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn run_dispatches_on_strategy() {
        let sys = one_pot(
            ms(&[("a", 2)]),
            vec![EvolutionRule::ordinary(
                ms(&[("a", 1)]),
                vec![(sym("b"), Target::In(Label(2)))],
            )],
        );
        match run(&sys, Strategy::SeededRandom { seed: 5 }, 100).unwrap() {
            RunResult::Single(trace) => {
                assert_eq!(trace.outcome, Outcome::Halted { output: 2 })
            }
            RunResult::Branches(_) => panic!("seeded strategy returned branches"),
        }
        match run(&sys, Strategy::Exhaustive { max_branches: 16 }, 100).unwrap() {
            RunResult::Branches(run) => {
                assert_eq!(run.distinct_outputs(), [Some(2)].into_iter().collect())
            }
            RunResult::Single(_) => panic!("exhaustive strategy returned a single trace"),
        }
    }

    #[test]
    fn splitmix_is_deterministic_and_seed_sensitive() {
        let mut a = SplitMix64::new(1);
        let mut b = SplitMix64::new(1);
        let mut c = SplitMix64::new(2);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }
}
