//! Shared generators and helpers for the integration suites.

use std::collections::BTreeSet;

use psys::{
    Compartment, Edge, EvolutionRule, Label, Multiset, PSystem, RecExpr, SplitMix64, Symbol, Target,
};

#[allow(dead_code)]
pub fn sym(name: &str) -> Symbol {
    Symbol::new(name).unwrap()
}

/// Random well-formed expression over all six constructors. Minimalization
/// bodies are shaped so searches have a chance of terminating quickly.
#[allow(dead_code)]
pub fn random_expr(rng: &mut SplitMix64, arity: usize, depth: usize) -> RecExpr {
    let leaf = |rng: &mut SplitMix64| match rng.below(3) {
        0 => RecExpr::Zero(arity),
        1 if arity >= 1 => RecExpr::Proj(arity, 1 + rng.below(arity)),
        _ if arity == 1 => RecExpr::Succ,
        _ => RecExpr::Zero(arity),
    };
    if depth == 0 || rng.below(5) == 0 {
        return leaf(rng);
    }
    match rng.below(8) {
        0..=2 => {
            let m = 1 + rng.below(2);
            let f = random_expr(rng, m, depth - 1);
            let gs = (0..m).map(|_| random_expr(rng, arity, depth - 1)).collect();
            RecExpr::Comp(Box::new(f), gs)
        }
        3 | 4 if arity >= 1 => {
            let f = random_expr(rng, arity - 1, depth - 1);
            let g = random_expr(rng, arity + 1, depth - 1);
            RecExpr::PrimRec(Box::new(f), Box::new(g))
        }
        5 => {
            let f = random_expr(rng, arity + 1, depth - 1);
            RecExpr::Min(Box::new(f))
        }
        _ => leaf(rng),
    }
}

/// Random structurally valid small system exercising every engine
/// feature: cooperation, catharsis, one-shot rules, priorities,
/// promoters, gates and resets.
#[allow(dead_code)]
pub fn random_system(rng: &mut SplitMix64) -> PSystem {
    let names = ["a", "b", "c", "d"];
    let alphabet: BTreeSet<Symbol> = names.iter().map(|n| sym(n)).collect();
    let m = 1 + rng.below(3) as u32;

    let mut compartments = Vec::new();
    for label in 1..=m {
        let parent = if label == 1 {
            None
        } else {
            Some(Label(1 + rng.below(label as usize - 1) as u32))
        };
        let mut initial = Multiset::new();
        let budget = rng.below(7) as u64;
        for _ in 0..budget {
            initial.insert(sym(names[rng.below(names.len())]), 1);
        }
        compartments.push(Compartment {
            label: Label(label),
            parent,
            stage: None,
            initial,
            rules: Vec::new(),
        });
    }
    let mut edges = BTreeSet::new();
    if m >= 2 {
        for _ in 0..rng.below(3) {
            let a = Label(1 + rng.below(m as usize) as u32);
            let b = Label(1 + rng.below(m as usize) as u32);
            if a != b {
                edges.insert(Edge::new(a, b));
            }
        }
    }

    let sys_skeleton = PSystem {
        alphabet: alphabet.clone(),
        compartments: compartments.clone(),
        edges: edges.clone(),
        output: Label(1),
    };
    let children = |label: Label| -> Vec<Label> { sys_skeleton.children_of(label).collect() };
    let neighbors = |label: Label| -> Vec<Label> {
        edges
            .iter()
            .filter_map(|e| {
                let (a, b) = e.endpoints();
                if a == label {
                    Some(b)
                } else if b == label {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    };

    let total_rules = 1 + rng.below(5);
    for _ in 0..total_rules {
        let at = Label(1 + rng.below(m as usize) as u32);
        let random_target = |rng: &mut SplitMix64| -> Target {
            let kids = children(at);
            let links = neighbors(at);
            loop {
                match rng.below(4) {
                    0 => return Target::Here,
                    1 => return Target::Out,
                    2 if !kids.is_empty() => return Target::In(kids[rng.below(kids.len())]),
                    3 if !links.is_empty() => return Target::To(links[rng.below(links.len())]),
                    _ => {}
                }
            }
        };
        let mut rule = match rng.below(6) {
            0 => {
                // one-shot
                let count = 1 + rng.below(2);
                let rhs = (0..count)
                    .map(|_| (sym(names[rng.below(names.len())]), random_target(rng)))
                    .collect();
                EvolutionRule::one_shot(rhs)
            }
            1 => {
                // catharsis
                let mut lhs = Multiset::new();
                for _ in 0..1 + rng.below(2) {
                    lhs.insert(sym(names[rng.below(names.len())]), 1);
                }
                EvolutionRule::catharsis(lhs)
            }
            _ => {
                let mut lhs = Multiset::new();
                for _ in 0..1 + rng.below(2) {
                    lhs.insert(sym(names[rng.below(names.len())]), 1);
                }
                let count = rng.below(3);
                let rhs = (0..count)
                    .map(|_| (sym(names[rng.below(names.len())]), random_target(rng)))
                    .collect();
                EvolutionRule::ordinary(lhs, rhs)
            }
        };
        if rng.below(3) == 0 {
            rule = rule.with_priority(rng.below(3) as u32);
        }
        if rng.below(4) == 0 {
            rule = rule.with_promoter(sym(names[rng.below(names.len())]));
        }
        if rng.below(4) == 0 {
            rule = rule.with_gate(psys::Stage(1 + rng.below(m as usize) as u32));
        }
        if rng.below(6) == 0 {
            rule = rule.with_reset(psys::Stage(1 + rng.below(m as usize) as u32));
        }
        compartments[(at.0 - 1) as usize].rules.push(rule);
    }

    // output must be elementary: pick a childless compartment
    let output = (1..=m)
        .map(Label)
        .find(|&l| children(l).is_empty())
        .expect("the deepest compartment has no children");
    let sys = PSystem {
        alphabet,
        compartments,
        edges,
        output,
    };
    assert_eq!(
        sys.validate(),
        vec![],
        "generator produced an invalid system"
    );
    sys
}

/// Parses the bundled corpus: (expression text, args, expected value or
/// None for step_limit).
#[allow(dead_code)]
pub fn corpus_entries() -> Vec<(String, Vec<u64>, Option<u64>)> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../cli/corpus.txt");
    let text = std::fs::read_to_string(path).expect("corpus.txt is bundled");
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            assert_eq!(fields.len(), 3, "bad corpus line: {line}");
            let args = if fields[1].is_empty() {
                Vec::new()
            } else {
                fields[1]
                    .split(',')
                    .map(|p| p.trim().parse().expect("corpus argument"))
                    .collect()
            };
            let expected = if fields[2] == "step_limit" {
                None
            } else {
                Some(fields[2].parse().expect("corpus expected value"))
            };
            (fields[0].to_string(), args, expected)
        })
        .collect()
}
