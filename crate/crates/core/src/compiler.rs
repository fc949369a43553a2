//! Compiles a mu-recursive function expression plus concrete input
//! arguments into a graph-structured P system whose run output equals the
//! function value.
//!
//! Top-level basic functions use the two-compartment encodings directly:
//! catharsis rules for zero, a one-shot rule for successor, a move rule
//! plus catharsis for projection. Composite expressions are built from
//! recursively compiled sub-system stages wired by a small calling
//! convention:
//!
//! * every stage has an input compartment expecting one designated symbol
//!   per argument, and a single `go` token that arrives with or after the
//!   last argument object;
//! * input-consuming rules are promoted by the `go` token, so early
//!   arrivals park untouched until the stage is started;
//! * results leave through channel rules gated on the producing stage's
//!   quiescence, and a single done token follows the last batch, so a
//!   consumer can wait for all of its producers before starting.
//!
//! Compilation is input-specialized: the compiler evaluates sub-expressions
//! on the expected inputs to size primitive-recursion pipelines, so it
//! takes the concrete arguments, not just the expression. Where a runtime
//! recursion count can undershoot the compiled pipeline length (inside
//! minimalization), router compartments count the runtime argument and
//! pass the accumulator through unchanged beyond it.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::multiset::{Multiset, Symbol};
use crate::recfun::{eval, EvalResult, ParseError, RecExpr};
use crate::system::{
    Compartment, Edge, EvolutionRule, Label, PSystem, Stage, StructuralError, Target,
};

/// Fuel for each oracle evaluation during sizing.
const SIZING_FUEL: u64 = 1_000_000;
/// Probes attempted before declaring a minimalization divergent.
const MIN_PROBE_CAP: u64 = 16;

/// A compiled system together with its input placement and stage map.
#[derive(Clone, Debug)]
pub struct CompiledUnit {
    pub system: PSystem,
    /// argument index (0-based) -> (symbol, number of copies placed)
    pub input_map: BTreeMap<usize, (Symbol, u64)>,
    /// sub-expression path -> stage label
    pub stage_of: BTreeMap<String, Stage>,
    pub output: Label,
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("arity mismatch: expression takes {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Invalid(#[from] ParseError),
    #[error("compiled system failed validation (compiler bug): {0:?}")]
    Internal(Vec<StructuralError>),
}

/// Compiles `expr` applied to `args`.
pub fn compile(expr: &RecExpr, args: &[u64]) -> Result<CompiledUnit, CompileError> {
    expr.check()?;
    if args.len() != expr.arity() {
        return Err(CompileError::ArityMismatch {
            expected: expr.arity(),
            got: args.len(),
        });
    }
    let unit = match expr {
        RecExpr::Zero(n) => literal_zero(*n, args),
        RecExpr::Succ => literal_succ(args[0]),
        RecExpr::Proj(n, i) => literal_proj(*n, *i, args),
        _ => compile_composite(expr, args)?,
    };
    let errors = unit.system.validate();
    if !errors.is_empty() {
        return Err(CompileError::Internal(errors));
    }
    Ok(unit)
}

fn sym(name: String) -> Symbol {
    Symbol::new(name).expect("compiler symbol names are valid")
}

fn arg_symbols(n: usize) -> Vec<Symbol> {
    (1..=n).map(|i| sym(format!("a{i}"))).collect()
}

/// Two nested compartments; every argument object is annihilated.
fn literal_zero(n: usize, args: &[u64]) -> CompiledUnit {
    let syms = arg_symbols(n);
    let skin = Compartment {
        label: Label(1),
        parent: None,
        stage: None,
        initial: syms.iter().cloned().zip(args.iter().copied()).collect(),
        rules: syms
            .iter()
            .map(|s| EvolutionRule::catharsis([(s.clone(), 1)].into_iter().collect()))
            .collect(),
    };
    finish_literal(skin, syms, args)
}

/// Two nested compartments; arguments move inward, and a one-shot rule
/// adds the extra object once the skin is empty.
fn literal_succ(x: u64) -> CompiledUnit {
    let syms = arg_symbols(1);
    let a = syms[0].clone();
    let skin = Compartment {
        label: Label(1),
        parent: None,
        stage: None,
        initial: [(a.clone(), x)].into_iter().collect(),
        rules: vec![
            EvolutionRule::ordinary(
                [(a.clone(), 1)].into_iter().collect(),
                vec![(a.clone(), Target::In(Label(2)))],
            ),
            EvolutionRule::one_shot(vec![(a.clone(), Target::In(Label(2)))]),
        ],
    };
    finish_literal(skin, syms, &[x])
}

/// Two nested compartments; the kept argument moves inward, the rest are
/// annihilated.
fn literal_proj(n: usize, keep: usize, args: &[u64]) -> CompiledUnit {
    let syms = arg_symbols(n);
    let rules = syms
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let lhs: Multiset = [(s.clone(), 1)].into_iter().collect();
            if idx + 1 == keep {
                EvolutionRule::ordinary(lhs, vec![(s.clone(), Target::In(Label(2)))])
            } else {
                EvolutionRule::catharsis(lhs)
            }
        })
        .collect();
    let skin = Compartment {
        label: Label(1),
        parent: None,
        stage: None,
        initial: syms.iter().cloned().zip(args.iter().copied()).collect(),
        rules,
    };
    finish_literal(skin, syms, args)
}

fn finish_literal(skin: Compartment, syms: Vec<Symbol>, args: &[u64]) -> CompiledUnit {
    let system = PSystem {
        alphabet: syms.iter().cloned().collect(),
        compartments: vec![
            skin,
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
    };
    CompiledUnit {
        input_map: syms
            .into_iter()
            .zip(args.iter().copied())
            .enumerate()
            .collect(),
        stage_of: [("root".to_string(), Stage(1))].into_iter().collect(),
        system,
        output: Label(2),
    }
}

fn compile_composite(expr: &RecExpr, args: &[u64]) -> Result<CompiledUnit, CompileError> {
    let mut b = Builder {
        comps: Vec::new(),
        edges: BTreeSet::new(),
        alphabet: BTreeSet::new(),
        next_stage: 1,
        stage_of: BTreeMap::new(),
    };
    let expecteds: BTreeSet<Vec<u64>> = [args.to_vec()].into_iter().collect();
    let top = b.build(expr, &expecteds, None, "root", None, None)?;
    for (k, s) in top.input_syms.iter().enumerate() {
        b.preload(top.input, s, args[k]);
    }
    b.preload(top.input, &top.go, 1);
    let output = top
        .output
        .expect("a stage built without a data sink owns its output");
    let input_map = top
        .input_syms
        .iter()
        .cloned()
        .zip(args.iter().copied())
        .enumerate()
        .collect();
    Ok(CompiledUnit {
        system: PSystem {
            alphabet: b.alphabet,
            compartments: b.comps,
            edges: b.edges,
            output,
        },
        input_map,
        stage_of: b.stage_of,
        output,
    })
}

/// Where a stage's forwarded objects land: a compartment and the symbol
/// they are tagged as on arrival.
#[derive(Clone, Debug)]
struct Sink {
    target: Label,
    tag: Symbol,
}

/// The calling convention of a built stage.
struct Built {
    /// Input compartment; the root of the stage's subtree.
    input: Label,
    /// Stage label of the input compartment; resets anchored here cover
    /// the whole subtree.
    stage: Stage,
    /// One symbol per argument, in order.
    input_syms: Vec<Symbol>,
    /// The stage's go token.
    go: Symbol,
    /// Output compartment, present iff the stage was built without a data
    /// sink and therefore keeps its result.
    output: Option<Label>,
}

struct Builder {
    comps: Vec<Compartment>,
    edges: BTreeSet<Edge>,
    alphabet: BTreeSet<Symbol>,
    next_stage: u32,
    stage_of: BTreeMap<String, Stage>,
}

impl Builder {
    fn alloc(&mut self, parent: Option<Label>, stage: Stage) -> Label {
        let label = Label(self.comps.len() as u32 + 1);
        self.comps.push(Compartment {
            label,
            parent,
            stage: Some(stage),
            initial: Multiset::new(),
            rules: Vec::new(),
        });
        label
    }

    fn fresh_stage(&mut self, path: &str) -> Stage {
        let stage = Stage(self.next_stage);
        self.next_stage += 1;
        self.stage_of.insert(path.to_string(), stage);
        stage
    }

    fn sym(&mut self, name: String) -> Symbol {
        let s = sym(name);
        self.alphabet.insert(s.clone());
        s
    }

    fn rule(&mut self, at: Label, rule: EvolutionRule) {
        self.comps[(at.0 - 1) as usize].rules.push(rule);
    }

    fn preload(&mut self, at: Label, s: &Symbol, count: u64) {
        self.alphabet.insert(s.clone());
        self.comps[(at.0 - 1) as usize]
            .initial
            .insert(s.clone(), count);
    }

    /// Routing target from one compartment to another: `in_j` for an
    /// immediate child, otherwise a channel edge and `to_j`.
    fn route(&mut self, from: Label, to: Label) -> Target {
        if self.comps[(to.0 - 1) as usize].parent == Some(from) {
            Target::In(to)
        } else {
            self.edges.insert(Edge::new(from, to));
            Target::To(to)
        }
    }

    fn build(
        &mut self,
        expr: &RecExpr,
        expecteds: &BTreeSet<Vec<u64>>,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Result<Built, CompileError> {
        match expr {
            RecExpr::Zero(n) => Ok(self.build_zero(*n, parent, path, data_sink, done_sink)),
            RecExpr::Succ => Ok(self.build_succ(parent, path, data_sink, done_sink)),
            RecExpr::Proj(n, i) => Ok(self.build_proj(*n, *i, parent, path, data_sink, done_sink)),
            RecExpr::Comp(f, gs) => {
                self.build_comp(f, gs, expecteds, parent, path, data_sink, done_sink)
            }
            RecExpr::PrimRec(f, g) => {
                self.build_primrec(expr, f, g, expecteds, parent, path, data_sink, done_sink)
            }
            RecExpr::Min(f) => self.build_min(f, expecteds, parent, path, data_sink, done_sink),
        }
    }

    /// Shared scaffolding: input compartment, argument symbols, go token,
    /// and the optional completion rule sending the done token.
    fn stage_header(
        &mut self,
        arity: usize,
        parent: Option<Label>,
        path: &str,
    ) -> (Stage, Label, Vec<Symbol>, Symbol) {
        let stage = self.fresh_stage(path);
        let input = self.alloc(parent, stage);
        let sid = stage.0;
        let input_syms = (1..=arity)
            .map(|k| self.sym(format!("s{sid}:x{k}")))
            .collect();
        let go = self.sym(format!("s{sid}:go"));
        (stage, input, input_syms, go)
    }

    /// Completion rule: once the stage is quiescent, its go token leaves
    /// as the done token.
    fn completion(&mut self, input: Label, stage: Stage, go: &Symbol, done: &Sink) {
        let target = self.route(input, done.target);
        self.alphabet.insert(done.tag.clone());
        self.rule(
            input,
            EvolutionRule::ordinary(
                [(go.clone(), 1)].into_iter().collect(),
                vec![(done.tag.clone(), target)],
            )
            .with_gate(stage),
        );
    }

    /// Gated channel out of an output buffer.
    fn channel(&mut self, from: Label, stage: Stage, carried: &Symbol, sink: &Sink) {
        let target = self.route(from, sink.target);
        self.alphabet.insert(sink.tag.clone());
        self.rule(
            from,
            EvolutionRule::ordinary(
                [(carried.clone(), 1)].into_iter().collect(),
                vec![(sink.tag.clone(), target)],
            )
            .with_gate(stage),
        );
    }

    fn build_zero(
        &mut self,
        n: usize,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Built {
        let (stage, input, input_syms, go) = self.stage_header(n, parent, path);
        for s in input_syms.clone() {
            self.rule(
                input,
                EvolutionRule::catharsis([(s, 1)].into_iter().collect()).with_promoter(go.clone()),
            );
        }
        if let Some(done) = &done_sink {
            self.completion(input, stage, &go.clone(), done);
        }
        // zero emits no data; an output buffer exists only to be read
        let output = match data_sink {
            Some(_) => None,
            None => Some(self.alloc(Some(input), stage)),
        };
        Built {
            input,
            stage,
            input_syms,
            go,
            output,
        }
    }

    fn build_succ(
        &mut self,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Built {
        let (stage, input, input_syms, go) = self.stage_header(1, parent, path);
        let sid = stage.0;
        let carried = self.sym(format!("s{sid}:o"));
        let output = self.alloc(Some(input), stage);
        match &data_sink {
            Some(sink) => {
                // The one-shot contribution surfaces as a token in the
                // input compartment, so it only moves on under the go
                // promoter; otherwise a never-started stage would leak it.
                let extra = self.sym(format!("s{sid}:u"));
                let well = self.alloc(Some(input), stage);
                self.rule(
                    well,
                    EvolutionRule::one_shot(vec![(extra.clone(), Target::Out)]),
                );
                for moved in [input_syms[0].clone(), extra] {
                    self.rule(
                        input,
                        EvolutionRule::ordinary(
                            [(moved, 1)].into_iter().collect(),
                            vec![(carried.clone(), Target::In(output))],
                        )
                        .with_promoter(go.clone()),
                    );
                }
                self.channel(output, stage, &carried, sink);
            }
            None => {
                self.rule(
                    input,
                    EvolutionRule::ordinary(
                        [(input_syms[0].clone(), 1)].into_iter().collect(),
                        vec![(carried.clone(), Target::In(output))],
                    )
                    .with_promoter(go.clone()),
                );
                self.rule(
                    output,
                    EvolutionRule::one_shot(vec![(carried.clone(), Target::Here)]),
                );
            }
        }
        if let Some(done) = &done_sink {
            self.completion(input, stage, &go.clone(), done);
        }
        Built {
            input,
            stage,
            input_syms,
            go,
            output: data_sink.is_none().then_some(output),
        }
    }

    fn build_proj(
        &mut self,
        n: usize,
        keep: usize,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Built {
        let (stage, input, input_syms, go) = self.stage_header(n, parent, path);
        let sid = stage.0;
        let carried = self.sym(format!("s{sid}:o"));
        let output = self.alloc(Some(input), stage);
        for (idx, s) in input_syms.iter().enumerate() {
            let lhs: Multiset = [(s.clone(), 1)].into_iter().collect();
            let rule = if idx + 1 == keep {
                EvolutionRule::ordinary(lhs, vec![(carried.clone(), Target::In(output))])
            } else {
                EvolutionRule::catharsis(lhs)
            };
            self.rule(input, rule.with_promoter(go.clone()));
        }
        if let Some(sink) = &data_sink {
            self.channel(output, stage, &carried, sink);
        }
        if let Some(done) = &done_sink {
            self.completion(input, stage, &go.clone(), done);
        }
        Built {
            input,
            stage,
            input_syms,
            go,
            output: data_sink.is_none().then_some(output),
        }
    }

    /// Composition: fan every argument out to all inner stages, collect
    /// their done tokens in an and-gate, and start the outer stage once
    /// all inner results are in.
    #[allow(clippy::too_many_arguments)]
    fn build_comp(
        &mut self,
        f: &RecExpr,
        gs: &[RecExpr],
        expecteds: &BTreeSet<Vec<u64>>,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Result<Built, CompileError> {
        let n = gs[0].arity();
        let (stage, input, input_syms, go) = self.stage_header(n, parent, path);
        let sid = stage.0;
        let gate_comp = self.alloc(Some(input), stage);

        let f_expecteds: BTreeSet<Vec<u64>> = expecteds
            .iter()
            .filter_map(|t| {
                gs.iter()
                    .map(|g| oracle(g, t))
                    .collect::<Option<Vec<u64>>>()
            })
            .collect();
        let f_stage = self.build(
            f,
            &f_expecteds,
            Some(input),
            &format!("{path}.f"),
            data_sink,
            done_sink,
        )?;

        let mut done_syms = Vec::new();
        let mut fan_targets: Vec<(Vec<Symbol>, Label, Symbol)> = Vec::new();
        for (i, g) in gs.iter().enumerate() {
            let value_tag = f_stage.input_syms[i].clone();
            let done_tag = self.sym(format!("s{sid}:d{}", i + 1));
            let g_stage = self.build(
                g,
                expecteds,
                Some(input),
                &format!("{path}.g{}", i + 1),
                Some(Sink {
                    target: f_stage.input,
                    tag: value_tag,
                }),
                Some(Sink {
                    target: gate_comp,
                    tag: done_tag.clone(),
                }),
            )?;
            done_syms.push(done_tag);
            fan_targets.push((g_stage.input_syms, g_stage.input, g_stage.go));
        }

        // argument fan-out: each object duplicates into one tagged copy
        // per inner stage, in a single rule
        for k in 0..n {
            let mut rhs = Vec::new();
            for (syms, g_input, _) in &fan_targets {
                let target = self.route(input, *g_input);
                rhs.push((syms[k].clone(), target));
            }
            self.rule(
                input,
                EvolutionRule::ordinary([(input_syms[k].clone(), 1)].into_iter().collect(), rhs)
                    .with_promoter(go.clone()),
            );
        }
        // go relay, in the same step as the fan-out
        let mut relay_rhs = Vec::new();
        for (_, g_input, g_go) in &fan_targets {
            let target = self.route(input, *g_input);
            relay_rhs.push((g_go.clone(), target));
        }
        self.rule(
            input,
            EvolutionRule::ordinary([(go.clone(), 1)].into_iter().collect(), relay_rhs),
        );
        // and-gate: all inner stages done -> start f
        let lhs: Multiset = done_syms.iter().cloned().map(|d| (d, 1)).collect();
        let go_target = self.route(gate_comp, f_stage.input);
        self.rule(
            gate_comp,
            EvolutionRule::ordinary(lhs, vec![(f_stage.go.clone(), go_target)]),
        );

        Ok(Built {
            input,
            stage,
            input_syms,
            go,
            output: f_stage.output,
        })
    }

    /// Primitive recursion: a base stage plus one compiled step stage per
    /// expected iteration, pre-seeded with the first arguments and the
    /// iteration counter (or fed at runtime when the first arguments vary
    /// across the expected inputs). Router compartments compare the
    /// runtime recursion argument against each stage index and either
    /// feed the stage or pass accumulator and done token straight
    /// through, so runs with a smaller recursion argument than the
    /// pipeline length stay exact.
    #[allow(clippy::too_many_arguments)]
    fn build_primrec(
        &mut self,
        whole: &RecExpr,
        f: &RecExpr,
        g: &RecExpr,
        expecteds: &BTreeSet<Vec<u64>>,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Result<Built, CompileError> {
        let k = f.arity();
        let (stage, input, input_syms, go) = self.stage_header(k + 1, parent, path);
        let sid = stage.0;

        let pipeline_len = expecteds.iter().map(|t| t[k]).max().unwrap_or(0);
        // Pre-seed the first arguments when they are single-valued across
        // the expected inputs (the normal case). When they vary — the
        // recursion sits under a minimalization whose search variable
        // feeds them — fall back to fanning the runtime objects out to
        // the base and step stages instead.
        let firsts: BTreeSet<&[u64]> = expecteds.iter().map(|t| &t[..k]).collect();
        let preseed = firsts.len() <= 1;
        let first_args: Option<Vec<u64>> = firsts.into_iter().next().map(<[u64]>::to_vec);

        // data and done destinations of the final pipeline element
        let (final_data, own_output) = match data_sink {
            Some(sink) => (sink, None),
            None => {
                let out = self.alloc(Some(input), stage);
                let tag = self.sym(format!("s{sid}:o"));
                (Sink { target: out, tag }, Some(out))
            }
        };

        let routers: Vec<Label> = (0..pipeline_len)
            .map(|_| self.alloc(Some(input), stage))
            .collect();
        let value_syms: Vec<Symbol> = (1..=pipeline_len)
            .map(|i| self.sym(format!("s{sid}:r{i}")))
            .collect();
        let chain_syms: Vec<Symbol> = (1..=pipeline_len)
            .map(|i| self.sym(format!("s{sid}:c{i}")))
            .collect();

        // base stage, pre-loaded and self-starting
        let (base_data, base_done) = if pipeline_len > 0 {
            (
                Sink {
                    target: routers[0],
                    tag: value_syms[0].clone(),
                },
                Some(Sink {
                    target: routers[0],
                    tag: chain_syms[0].clone(),
                }),
            )
        } else {
            (final_data.clone(), done_sink.clone())
        };
        let base_expecteds: BTreeSet<Vec<u64>> =
            expecteds.iter().map(|t| t[..k].to_vec()).collect();
        let base = self.build(
            f,
            &base_expecteds,
            Some(input),
            &format!("{path}.f"),
            Some(base_data),
            base_done,
        )?;
        if preseed {
            if let Some(xs) = &first_args {
                for (j, &count) in xs.iter().enumerate() {
                    let s = base.input_syms[j].clone();
                    self.preload(base.input, &s, count);
                }
            }
            let base_go = base.go.clone();
            self.preload(base.input, &base_go, 1);
        }

        // step stages and their routers
        let mut step_targets: Vec<(Label, Vec<Symbol>)> = Vec::new();
        for i in 1..=pipeline_len {
            let slot = (i - 1) as usize;
            let (step_data, step_done) = if i < pipeline_len {
                (
                    Sink {
                        target: routers[slot + 1],
                        tag: value_syms[slot + 1].clone(),
                    },
                    Some(Sink {
                        target: routers[slot + 1],
                        tag: chain_syms[slot + 1].clone(),
                    }),
                )
            } else {
                (final_data.clone(), done_sink.clone())
            };
            let step_expecteds: BTreeSet<Vec<u64>> = expecteds
                .iter()
                .filter(|t| t[k] >= i)
                .filter_map(|t| {
                    let mut prefix = t[..k].to_vec();
                    prefix.push(i - 1);
                    let acc = oracle(whole, &prefix)?;
                    prefix.push(acc);
                    Some(prefix)
                })
                .collect();
            let step = self.build(
                g,
                &step_expecteds,
                Some(input),
                &format!("{path}.g{i}"),
                Some(step_data),
                step_done,
            )?;
            if preseed {
                if let Some(xs) = &first_args {
                    for (j, &count) in xs.iter().enumerate() {
                        let s = step.input_syms[j].clone();
                        self.preload(step.input, &s, count);
                    }
                }
            }
            let counter = step.input_syms[k].clone();
            self.preload(step.input, &counter, i - 1);
            step_targets.push((step.input, step.input_syms.clone()));

            // router: compare the runtime recursion argument against i
            let router = routers[slot];
            let pilot = self.sym(format!("s{sid}:pi{i}"));
            let count_tag = self.sym(format!("s{sid}:y{i}"));
            let apply_flag = self.sym(format!("s{sid}:ap{i}"));
            let skip_flag = self.sym(format!("s{sid}:sk{i}"));
            self.rule(
                router,
                EvolutionRule::ordinary(
                    [(pilot.clone(), 1), (count_tag.clone(), i)]
                        .into_iter()
                        .collect(),
                    vec![(apply_flag.clone(), Target::Here)],
                )
                .with_priority(1),
            );
            self.rule(
                router,
                EvolutionRule::ordinary(
                    [(pilot.clone(), 1)].into_iter().collect(),
                    vec![(skip_flag.clone(), Target::Here)],
                ),
            );
            // value routing
            let into_step = self.route(router, step.input);
            self.rule(
                router,
                EvolutionRule::ordinary(
                    [(value_syms[slot].clone(), 1)].into_iter().collect(),
                    vec![(step.input_syms[k + 1].clone(), into_step)],
                )
                .with_promoter(apply_flag.clone()),
            );
            let (skip_value_sym, skip_value_to) = if i < pipeline_len {
                (value_syms[slot + 1].clone(), routers[slot + 1])
            } else {
                (final_data.tag.clone(), final_data.target)
            };
            let skip_value_target = self.route(router, skip_value_to);
            self.rule(
                router,
                EvolutionRule::ordinary(
                    [(value_syms[slot].clone(), 1)].into_iter().collect(),
                    vec![(skip_value_sym, skip_value_target)],
                )
                .with_promoter(skip_flag.clone()),
            );
            // done-token routing
            let go_target = self.route(router, step.input);
            self.rule(
                router,
                EvolutionRule::ordinary(
                    [(chain_syms[slot].clone(), 1)].into_iter().collect(),
                    vec![(step.go.clone(), go_target)],
                )
                .with_promoter(apply_flag),
            );
            let skip_done = if i < pipeline_len {
                Some((chain_syms[slot + 1].clone(), routers[slot + 1]))
            } else {
                done_sink.as_ref().map(|d| (d.tag.clone(), d.target))
            };
            if let Some((tag, to)) = skip_done {
                let target = self.route(router, to);
                self.rule(
                    router,
                    EvolutionRule::ordinary(
                        [(chain_syms[slot].clone(), 1)].into_iter().collect(),
                        vec![(tag, target)],
                    )
                    .with_promoter(skip_flag),
                );
            }
        }

        // entry: the first arguments are discarded when pre-seeded and
        // fanned out to the base and step stages otherwise; the recursion
        // argument fans out to the routers; the relay launches the router
        // pilots (and the base stage, when not self-starting)
        for j in 0..k {
            let s = input_syms[j].clone();
            let rule = if preseed {
                EvolutionRule::catharsis([(s, 1)].into_iter().collect())
            } else {
                let mut rhs = vec![(base.input_syms[j].clone(), self.route(input, base.input))];
                for (step_input, step_syms) in &step_targets {
                    let target = self.route(input, *step_input);
                    rhs.push((step_syms[j].clone(), target));
                }
                EvolutionRule::ordinary([(s, 1)].into_iter().collect(), rhs)
            };
            self.rule(input, rule.with_promoter(go.clone()));
        }
        let mut relay_rhs = Vec::new();
        if !preseed {
            let target = self.route(input, base.input);
            relay_rhs.push((base.go.clone(), target));
        }
        if pipeline_len > 0 {
            let mut fan_rhs = Vec::new();
            for i in 1..=pipeline_len {
                let router = routers[(i - 1) as usize];
                let target = self.route(input, router);
                fan_rhs.push((sym(format!("s{sid}:y{i}")), target));
                relay_rhs.push((sym(format!("s{sid}:pi{i}")), target));
            }
            self.rule(
                input,
                EvolutionRule::ordinary(
                    [(input_syms[k].clone(), 1)].into_iter().collect(),
                    fan_rhs,
                )
                .with_promoter(go.clone()),
            );
        } else {
            self.rule(
                input,
                EvolutionRule::catharsis([(input_syms[k].clone(), 1)].into_iter().collect())
                    .with_promoter(go.clone()),
            );
        }
        if !relay_rhs.is_empty() {
            self.rule(
                input,
                EvolutionRule::ordinary([(go.clone(), 1)].into_iter().collect(), relay_rhs),
            );
        }

        Ok(Built {
            input,
            stage,
            input_syms,
            go,
            output: own_output,
        })
    }

    /// Minimalization: argument store, compiled resettable f stage,
    /// controller, and mark accumulator.
    #[allow(clippy::too_many_arguments)]
    fn build_min(
        &mut self,
        f: &RecExpr,
        expecteds: &BTreeSet<Vec<u64>>,
        parent: Option<Label>,
        path: &str,
        data_sink: Option<Sink>,
        done_sink: Option<Sink>,
    ) -> Result<Built, CompileError> {
        let k = f.arity() - 1;
        let (stage, store, input_syms, go) = self.stage_header(k, parent, path);
        let sid = stage.0;
        let controller = self.alloc(Some(store), stage);
        let marks = self.alloc(Some(store), stage);

        // probe the oracle: one expected tuple per iteration the runtime
        // will attempt
        let mut f_expecteds: BTreeSet<Vec<u64>> = BTreeSet::new();
        for t in expecteds {
            for y in 0..=MIN_PROBE_CAP {
                let mut probe = t.clone();
                probe.push(y);
                let value = oracle(f, &probe);
                f_expecteds.insert(probe);
                match value {
                    Some(0) | None => break,
                    Some(_) => {}
                }
            }
        }

        let hash = self.sym(format!("s{sid}:#"));
        let f_done = self.sym(format!("s{sid}:df"));
        let f_stage = self.build(
            f,
            &f_expecteds,
            Some(store),
            &format!("{path}.f"),
            Some(Sink {
                target: controller,
                tag: hash.clone(),
            }),
            Some(Sink {
                target: controller,
                tag: f_done.clone(),
            }),
        )?;

        let search = self.sym(format!("s{sid}:b"));
        let plus: Vec<Symbol> = (1..=k).map(|j| self.sym(format!("s{sid}:⊕{j}"))).collect();
        let otimes = self.sym(format!("s{sid}:⊗"));
        let pilot = self.sym(format!("s{sid}:p"));
        let pilot2 = self.sym(format!("s{sid}:p'"));
        let mark = self.sym(format!("s{sid}:¶"));

        // argument store: forward everything to f, mirroring counts into
        // the controller for recycling
        for (j, s) in input_syms.iter().enumerate() {
            let to_f = self.route(store, f_stage.input);
            let to_ctrl = self.route(store, controller);
            self.rule(
                store,
                EvolutionRule::ordinary(
                    [(s.clone(), 1)].into_iter().collect(),
                    vec![
                        (f_stage.input_syms[j].clone(), to_f),
                        (plus[j].clone(), to_ctrl),
                    ],
                )
                .with_promoter(go.clone()),
            );
        }
        let to_f = self.route(store, f_stage.input);
        let to_ctrl = self.route(store, controller);
        self.rule(
            store,
            EvolutionRule::ordinary(
                [(search.clone(), 1)].into_iter().collect(),
                vec![
                    (f_stage.input_syms[k].clone(), to_f),
                    (otimes.clone(), to_ctrl),
                ],
            )
            .with_promoter(go.clone()),
        );
        let go_target = self.route(store, f_stage.input);
        self.rule(
            store,
            EvolutionRule::ordinary(
                [(go.clone(), 1)].into_iter().collect(),
                vec![(f_stage.go.clone(), go_target)],
            ),
        );

        // controller program
        let to_marks = self.route(controller, marks);
        let to_store = self.route(controller, store);
        self.rule(
            controller,
            EvolutionRule::ordinary(
                [(pilot.clone(), 1), (f_done.clone(), 1), (hash.clone(), 1)]
                    .into_iter()
                    .collect(),
                vec![
                    (mark.clone(), to_marks),
                    (search.clone(), to_store),
                    (pilot2.clone(), Target::Here),
                ],
            )
            .with_priority(2),
        );
        if let Some(done) = &done_sink {
            let target = self.route(controller, done.target);
            self.alphabet.insert(done.tag.clone());
            self.rule(
                controller,
                EvolutionRule::ordinary(
                    [(pilot.clone(), 1), (f_done.clone(), 1)]
                        .into_iter()
                        .collect(),
                    vec![(done.tag.clone(), target)],
                )
                .with_priority(1),
            );
        }
        self.rule(
            controller,
            EvolutionRule::catharsis([(hash.clone(), 1)].into_iter().collect())
                .with_priority(1)
                .with_promoter(pilot2.clone()),
        );
        for (j, s) in input_syms.iter().enumerate() {
            let target = self.route(controller, store);
            self.rule(
                controller,
                EvolutionRule::ordinary(
                    [(plus[j].clone(), 1)].into_iter().collect(),
                    vec![(s.clone(), target)],
                )
                .with_priority(1)
                .with_promoter(pilot2.clone()),
            );
        }
        let target = self.route(controller, store);
        self.rule(
            controller,
            EvolutionRule::ordinary(
                [(otimes.clone(), 1)].into_iter().collect(),
                vec![(search.clone(), target)],
            )
            .with_priority(1)
            .with_promoter(pilot2.clone()),
        );
        let q_target = self.route(controller, store);
        self.rule(
            controller,
            EvolutionRule::ordinary(
                [(pilot2.clone(), 1)].into_iter().collect(),
                vec![(pilot.clone(), Target::Here), (go.clone(), q_target)],
            )
            .with_reset(f_stage.stage),
        );
        self.preload(controller, &pilot, 1);

        // mark accumulator doubles as the output compartment
        if let Some(sink) = &data_sink {
            self.channel(marks, stage, &mark, sink);
        }

        Ok(Built {
            input: store,
            stage,
            input_syms,
            go,
            output: data_sink.is_none().then_some(marks),
        })
    }
}

/// Oracle evaluation used for sizing; `None` when it diverges at the
/// sizing fuel.
fn oracle(expr: &RecExpr, args: &[u64]) -> Option<u64> {
    match eval(expr, args, SIZING_FUEL) {
        Ok(EvalResult::Value(v)) => Some(v),
        _ => None,
    }
}


#[cfg(test)]
mod fan_mode_tests {
    use super::*;
    use crate::engine::{run_seeded, Outcome};
    use crate::recfun::parse;

    /// A recursion whose first argument is derived from the enclosing
    /// search variable cannot be pre-seeded; the runtime fan-in must
    /// deliver it instead. Here f(x,y) = add(2-y, 0) so the least zero
    /// of f is at y = 2 whatever x is.
    #[test]
    fn runtime_fed_recursion_inside_minimalization() {
        let two = "C(S; C(S; Z[2]))";
        let monus2 = format!("C(P(U[1,1], C(P(Z[0], U[2,1]); U[3,3])); {two}, U[2,2])");
        let add_shifted = format!("C(P(U[1,1], C(S; U[3,3])); {monus2}, Z[2])");
        let expr = parse(&format!("M({add_shifted})")).unwrap();
        let unit = compile(&expr, &[5]).unwrap();
        assert_eq!(unit.system.validate(), vec![]);
        for seed in 0..3 {
            let trace = run_seeded(&unit.system, seed, 100_000).unwrap();
            assert_eq!(trace.outcome, Outcome::Halted { output: 2 }, "seed {seed}");
        }
    }

    /// Divergent variant: f(x,y) = S(y - y) = 1 for every y, with the
    /// inner recursion's first argument tracking y itself.
    #[test]
    fn runtime_fed_recursion_divergent() {
        let monus = "P(U[1,1], C(P(Z[0], U[2,1]); U[3,3]))";
        let expr = parse(&format!("M(C(S; C({monus}; U[2,2], U[2,2])))")).unwrap();
        let unit = compile(&expr, &[0]).unwrap();
        let trace = run_seeded(&unit.system, 0, 2000).unwrap();
        assert_eq!(trace.outcome, Outcome::StepLimitExceeded);
    }
}
