//! Brute-force oracles and fixtures shared by the integration targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use inld_core::catms::{Environment, NodeId, NodeKind, Tms};
use inld_core::gde::{minimal_diagnoses, minimal_diagnoses_bounded, Conflict, Diagnosis, Verdict};
use inld_core::modelgen::{build_model, choice_element, expression_element};
use inld_core::parsekit::{
    Choice, ChoiceKind, ChoicePayload, ChoiceSet, ChoiceTarget, KnowledgeBase, ParseTrace, SemanticExpression, Token,
};
use inld_core::session::{ingest_answer, DiagnosisReport, GoldInterpretation, OracleAgent, UserAgent};
use inld_core::strategies::{Diagnoser, Step};
use rand::Rng;

pub const GOLDEN_FIG1: &str = include_str!("../golden/fig1.txt");

// ---------------------------------------------------------------- CATMS

/// A random justification network. Nodes are numbered assumptions first,
/// then ordinary nodes, then contradictions.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub assumptions: usize,
    pub ordinary: usize,
    pub contradictions: usize,
    /// (antecedents, consequent)
    pub justifications: Vec<(Vec<usize>, usize)>,
}

impl NetworkSpec {
    pub fn len(&self) -> usize {
        self.assumptions + self.ordinary + self.contradictions
    }

    pub fn kind(&self, n: usize) -> NodeKind {
        if n < self.assumptions {
            NodeKind::Assumption
        } else if n < self.assumptions + self.ordinary {
            NodeKind::Ordinary
        } else {
            NodeKind::Contradiction
        }
    }

    /// Ordinary node `k` only depends on assumptions and ordinary nodes
    /// numbered below it, so no cycle runs through ordinary nodes.
    /// Assumptions may be justified by anything.
    pub fn random(
        rng: &mut impl Rng,
        max_assumptions: usize,
        max_justifications: usize,
        max_contradictions: usize,
    ) -> NetworkSpec {
        let assumptions = rng.random_range(1..=max_assumptions);
        let ordinary = rng.random_range(0..=10);
        let contradictions = rng.random_range(0..=max_contradictions);
        let mut spec = NetworkSpec { assumptions, ordinary, contradictions, justifications: vec![] };
        let n_just = rng.random_range(0..=max_justifications);
        let non_contradiction = assumptions + ordinary;
        for _ in 0..n_just {
            let consequent = rng.random_range(0..spec.len());
            let pool = match spec.kind(consequent) {
                NodeKind::Ordinary => consequent,
                _ => non_contradiction,
            };
            if pool == 0 {
                continue;
            }
            let k = rng.random_range(1..=3usize);
            let ants: Vec<usize> = (0..k).map(|_| rng.random_range(0..pool)).collect();
            if spec.kind(consequent) == NodeKind::Assumption && ants.contains(&consequent) {
                continue;
            }
            spec.justifications.push((ants, consequent));
        }
        spec
    }

    pub fn build(&self) -> (Tms, Vec<NodeId>) {
        let mut tms = Tms::new();
        let ids: Vec<NodeId> = (0..self.len()).map(|n| tms.create_node(format!("n{n}"), self.kind(n))).collect();
        for (ants, c) in &self.justifications {
            let a: Vec<NodeId> = ants.iter().map(|i| ids[*i]).collect();
            tms.add_justification(&a, ids[*c], "random")
                .expect("generated networks are acyclic through ordinary nodes");
        }
        (tms, ids)
    }

    /// Forward chaining from the assumptions in `mask`. With `expand` the
    /// justifications into assumptions fire too; without it assumptions are
    /// true exactly when listed.
    pub fn chain(&self, mask: u32, expand: bool) -> Vec<bool> {
        let mut on: Vec<bool> = (0..self.len()).map(|n| n < self.assumptions && mask & (1 << n) != 0).collect();
        loop {
            let mut changed = false;
            for (ants, c) in &self.justifications {
                if on[*c] || (!expand && self.kind(*c) == NodeKind::Assumption) {
                    continue;
                }
                if ants.iter().all(|a| on[*a]) {
                    on[*c] = true;
                    changed = true;
                }
            }
            if !changed {
                return on;
            }
        }
    }

    fn env(&self, ids: &[NodeId], mask: u32) -> Environment {
        Environment::new((0..self.assumptions).filter(|i| mask & (1 << i) != 0).map(|i| ids[i]))
    }
}

fn minimal_masks(masks: Vec<u32>) -> BTreeSet<u32> {
    let mut sorted = masks;
    sorted.sort_by_key(|m| (m.count_ones(), *m));
    let mut out: Vec<u32> = Vec::new();
    for m in sorted {
        if !out.iter().any(|o| o & m == *o) {
            out.push(m);
        }
    }
    out.into_iter().collect()
}

fn mask_of(env: &Environment, ids: &[NodeId]) -> u32 {
    env.assumptions()
        .iter()
        .map(|a| 1u32 << ids.iter().position(|i| i == a).expect("label mentions a known assumption"))
        .fold(0, |acc, b| acc | b)
}

/// Checks a network against exhaustive forward chaining over every
/// environment: nogoods, labels, `holds_in` and `env_consistent`.
pub fn check_network(spec: &NetworkSpec) -> Result<(), String> {
    let (tms, ids) = spec.build();
    let envs = 1u32 << spec.assumptions;
    let local: Vec<Vec<bool>> = (0..envs).map(|m| spec.chain(m, false)).collect();
    let contradictory = |on: &Vec<bool>| (0..spec.len()).any(|n| spec.kind(n) == NodeKind::Contradiction && on[n]);

    let expected_nogoods = minimal_masks((0..envs).filter(|m| contradictory(&local[*m as usize])).collect());
    let got_nogoods: BTreeSet<u32> = tms.nogoods().iter().map(|e| mask_of(e, &ids)).collect();
    if got_nogoods != expected_nogoods {
        return Err(format!("nogoods {got_nogoods:?} != expected {expected_nogoods:?} for {spec:?}"));
    }
    let inconsistent = |m: u32| expected_nogoods.iter().any(|g| g & m == *g);

    for n in 0..spec.len() {
        let label = tms.label(ids[n]);
        match spec.kind(n) {
            NodeKind::Assumption => {
                if label != [Environment::singleton(ids[n])] {
                    return Err(format!("assumption n{n} has label {label:?}"));
                }
            }
            NodeKind::Contradiction => {
                if !label.is_empty() {
                    return Err(format!("contradiction n{n} has label {label:?}"));
                }
            }
            NodeKind::Ordinary => {
                let expected =
                    minimal_masks((0..envs).filter(|m| local[*m as usize][n] && !inconsistent(*m)).collect());
                let got: Vec<u32> = label.iter().map(|e| mask_of(e, &ids)).collect();
                for (i, a) in got.iter().enumerate() {
                    for (j, b) in got.iter().enumerate() {
                        if i != j && a & b == *a {
                            return Err(format!("label of n{n} is not minimal: {label:?}"));
                        }
                    }
                    if inconsistent(*a) {
                        return Err(format!("label of n{n} holds a nogood environment"));
                    }
                    if !spec.chain(*a, true)[n] {
                        return Err(format!("label environment {a:b} of n{n} does not derive it"));
                    }
                }
                let got: BTreeSet<u32> = got.into_iter().collect();
                if got != expected {
                    return Err(format!("label of n{n}: {got:?} != expected {expected:?} for {spec:?}"));
                }
            }
        }
    }

    for m in 0..envs {
        let full = spec.chain(m, true);
        let env = spec.env(&ids, m);
        let consistent = !contradictory(&full);
        if tms.env_consistent(&env) != consistent {
            return Err(format!("env_consistent({m:b}) should be {consistent} for {spec:?}"));
        }
        if !consistent {
            continue;
        }
        for n in 0..spec.len() {
            if spec.kind(n) == NodeKind::Contradiction {
                continue;
            }
            let got = tms.holds_in(ids[n], &env).map_err(|e| e.to_string())?;
            if got != full[n] {
                return Err(format!("holds_in(n{n}, {m:b}) = {got}, closure says {} for {spec:?}", full[n]));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------- hitting sets

pub fn random_family(rng: &mut impl Rng, max_defaults: usize) -> (usize, Vec<BTreeSet<u32>>) {
    let universe = rng.random_range(1..=max_defaults);
    let n = rng.random_range(0..=8usize);
    let family = (0..n)
        .map(|_| {
            let size = rng.random_range(1..=universe.min(4));
            (0..size).map(|_| rng.random_range(0..universe as u32)).collect()
        })
        .collect();
    (universe, family)
}

/// Every subset of the universe that hits all conflicts, then the minimal ones.
pub fn brute_hitting_sets(universe: usize, family: &[BTreeSet<u32>]) -> BTreeSet<BTreeSet<u32>> {
    let hits: Vec<u32> =
        (0..1u32 << universe).filter(|m| family.iter().all(|c| c.iter().any(|d| m & (1 << d) != 0))).collect();
    minimal_masks(hits).into_iter().map(|m| (0..universe as u32).filter(|d| m & (1 << d) != 0).collect()).collect()
}

fn as_sets(ds: &[Diagnosis]) -> BTreeSet<BTreeSet<u32>> {
    ds.iter().map(|d| d.0.iter().map(|n| n.0).collect()).collect()
}

pub fn check_family(universe: usize, family: &[BTreeSet<u32>]) -> Result<(), String> {
    let conflicts: Vec<Conflict> = family.iter().map(|c| Conflict(c.iter().map(|d| NodeId(*d)).collect())).collect();
    let expected = brute_hitting_sets(universe, family);
    let got = as_sets(&minimal_diagnoses(&conflicts));
    if got != expected {
        return Err(format!("{family:?}: got {got:?}, expected {expected:?}"));
    }
    for cap in 0..=3 {
        let small: BTreeSet<_> = expected.iter().filter(|d| d.len() <= cap).cloned().collect();
        match minimal_diagnoses_bounded(&conflicts, cap) {
            Ok(ds) if as_sets(&ds) == small => {}
            Err(_) if small.is_empty() => {}
            other => return Err(format!("{family:?} cap {cap}: got {other:?}, expected {small:?}")),
        }
    }
    Ok(())
}

// ------------------------------------------------- factored interpretations

#[derive(Debug, Clone)]
pub struct SynthChoice {
    /// Indices into the parent set's choices; empty for trees.
    pub enablers: Vec<usize>,
    /// Indices into the shared expression pool.
    pub exprs: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SynthSet {
    pub parent: Option<usize>,
    pub choices: Vec<SynthChoice>,
}

/// Choice sets form a forest rooted at the parse-tree set; each choice is
/// enabled by some choices of its set's parent.
#[derive(Debug, Clone)]
pub struct SynthTrace {
    pub sets: Vec<SynthSet>,
    pub expressions: usize,
}

impl SynthTrace {
    pub fn random(rng: &mut impl Rng) -> SynthTrace {
        let n_sets = rng.random_range(1..=4usize);
        let expressions = rng.random_range(0..=3usize);
        let mut sets: Vec<SynthSet> = Vec::new();
        for k in 0..n_sets {
            let parent = (k > 0).then(|| rng.random_range(0..k));
            let n = rng.random_range(1..=3usize);
            let parent_len = parent.map(|p| sets[p].choices.len()).unwrap_or(0);
            let choices = (0..n)
                .map(|_| {
                    let mut enablers: Vec<usize> = (0..parent_len).filter(|_| rng.random_bool(0.5)).collect();
                    if parent_len > 0 && enablers.is_empty() {
                        enablers.push(rng.random_range(0..parent_len));
                    }
                    let exprs = if k > 0 && expressions > 0 {
                        let mut e: Vec<usize> = (0..expressions).filter(|_| rng.random_bool(0.4)).collect();
                        e.dedup();
                        e
                    } else {
                        vec![]
                    };
                    SynthChoice { enablers, exprs }
                })
                .collect();
            sets.push(SynthSet { parent, choices });
        }
        SynthTrace { sets, expressions }
    }

    pub fn choice_id(&self, set: usize, i: usize) -> String {
        if set == 0 {
            format!("tree{}", i + 1)
        } else {
            format!("w{set}:{i}")
        }
    }

    pub fn expression(e: usize) -> SemanticExpression {
        SemanticExpression { functor: format!("rel{e}"), args: vec!["?x".into(), format!("?y{e}")] }
    }

    pub fn trace(&self) -> ParseTrace {
        let mut tokens = Vec::new();
        let mut choice_sets = Vec::new();
        let mut choices = Vec::new();
        for (k, set) in self.sets.iter().enumerate() {
            let ids: Vec<String> = (0..set.choices.len()).map(|i| self.choice_id(k, i)).collect();
            let target = if k == 0 {
                ChoiceTarget::ParseTrees
            } else {
                let surface = format!("w{k}");
                tokens.push(Token {
                    index: k - 1,
                    surface: surface.clone(),
                    entries: vec![],
                    pos_options: vec!["noun".into()],
                    root: Some(surface.clone()),
                    var: Some(format!("{surface}1")),
                });
                ChoiceTarget::Word { token: k - 1, surface: surface.clone(), root: surface }
            };
            for (i, c) in set.choices.iter().enumerate() {
                let enabled_by = c.enablers.iter().map(|e| self.choice_id(set.parent.unwrap(), *e)).collect();
                let (kind, payload) = if k == 0 {
                    (
                        ChoiceKind::ParseTree,
                        ChoicePayload::Tree { constituent: i, bracketed: String::new(), pos: BTreeMap::new() },
                    )
                } else {
                    (
                        ChoiceKind::WordSense,
                        ChoicePayload::Sense {
                            semtrans: format!("w{k}-C{i}"),
                            concept: format!("C{i}"),
                            var: format!("w{k}1"),
                            expressions: c.exprs.iter().map(|e| Self::expression(*e)).collect(),
                            bound_roles: BTreeMap::new(),
                        },
                    )
                };
                choices.push(Choice {
                    id: ids[i].clone(),
                    kind,
                    choice_set: k,
                    token: (k > 0).then(|| k - 1),
                    payload,
                    enabled_by,
                });
            }
            choice_sets.push(ChoiceSet { id: k, target, choices: ids });
        }
        ParseTrace {
            sentence: "synthetic".into(),
            tokens,
            constituents: vec![],
            choice_sets,
            choices,
            dropped: vec![],
            fragmented: false,
        }
    }

    pub fn total_choices(&self) -> usize {
        self.sets.iter().map(|s| s.choices.len()).sum()
    }

    /// Judgments to enumerate: acceptable for every choice and expression,
    /// unacceptable for a few choices, capped at twelve.
    pub fn judgments(&self, rng: &mut impl Rng) -> Vec<(String, Verdict)> {
        let mut out: Vec<(String, Verdict)> = Vec::new();
        for (k, s) in self.sets.iter().enumerate() {
            for i in 0..s.choices.len() {
                out.push((choice_element(&self.choice_id(k, i)), Verdict::Acceptable));
            }
        }
        for e in 0..self.expressions {
            if self.sets.iter().any(|s| s.choices.iter().any(|c| c.exprs.contains(&e))) {
                out.push((expression_element(&Self::expression(e)), Verdict::Acceptable));
            }
        }
        for (k, s) in self.sets.iter().enumerate() {
            for i in 0..s.choices.len() {
                if rng.random_bool(0.2) {
                    out.push((choice_element(&self.choice_id(k, i)), Verdict::Unacceptable));
                }
            }
        }
        while out.len() > 12 {
            let i = rng.random_range(0..out.len());
            out.remove(i);
        }
        out
    }

    /// Whether the choice's acceptable node should hold given the judged
    /// acceptable elements.
    fn acceptable(&self, set: usize, i: usize, judged: &BTreeSet<String>) -> bool {
        let c = &self.sets[set].choices[i];
        judged.contains(&choice_element(&self.choice_id(set, i)))
            || (!c.exprs.is_empty()
                && c.exprs.iter().all(|e| judged.contains(&expression_element(&Self::expression(*e)))))
    }

    /// Enumerates every full selection (one choice per set) and accepts when
    /// one of them, restricted to the sets it reaches, is enabled and
    /// acceptable throughout.
    pub fn oracle(&self, judged: &BTreeSet<String>) -> bool {
        let n = self.sets.len();
        let mut pick = vec![0usize; n];
        loop {
            let mut reached = vec![false; n];
            reached[0] = true;
            let mut ok = true;
            for k in 0..n {
                if let Some(p) = self.sets[k].parent {
                    let enabled_any = self.sets[k].choices.iter().any(|c| c.enablers.contains(&pick[p]));
                    reached[k] = reached[p] && enabled_any;
                    if reached[k] && !self.sets[k].choices[pick[k]].enablers.contains(&pick[p]) {
                        ok = false;
                    }
                }
                if reached[k] && !self.acceptable(k, pick[k], judged) {
                    ok = false;
                }
            }
            if ok {
                return true;
            }
            let mut k = 0;
            loop {
                if k == n {
                    return false;
                }
                pick[k] += 1;
                if pick[k] < self.sets[k].choices.len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }
}

/// Largest TMS nodes per (choice + expression + subset) allowed before
/// judgments are installed, plus a fixed allowance for the root, premise,
/// symptom and bottom.
pub const NODES_PER_ELEMENT: usize = 8;
pub const FIXED_NODES: usize = 8;

pub fn check_factorization(synth: &SynthTrace, rng: &mut impl Rng) -> Result<(), String> {
    let trace = synth.trace();
    let mut model = build_model(&trace).map_err(|e| e.to_string())?;
    let stats = model.stats();
    if stats.interpretations != synth.total_choices() {
        return Err(format!(
            "{} factored interpretations for {} choices",
            stats.interpretations,
            synth.total_choices()
        ));
    }
    let exprs = (0..synth.expressions)
        .filter(|e| synth.sets.iter().any(|s| s.choices.iter().any(|c| c.exprs.contains(e))))
        .count();
    let size = synth.total_choices() + exprs + stats.subsets;
    if stats.tms.nodes > NODES_PER_ELEMENT * size + FIXED_NODES {
        return Err(format!("{} nodes for model size {size}", stats.tms.nodes));
    }
    let judgments = synth.judgments(rng);
    let mut nodes = Vec::new();
    for (el, v) in &judgments {
        nodes.push(model.probe(el, *v).map_err(|e| e.to_string())?.judgment);
    }
    for mask in 0..1u32 << judgments.len() {
        let env = Environment::new((0..judgments.len()).filter(|i| mask & (1 << i) != 0).map(|i| nodes[i]));
        if !model.tms.env_consistent(&env) {
            continue;
        }
        let judged: BTreeSet<String> = (0..judgments.len())
            .filter(|i| mask & (1 << i) != 0 && judgments[*i].1 == Verdict::Acceptable)
            .map(|i| judgments[i].0.clone())
            .collect();
        let got = model.root_acceptability(&env);
        let want = synth.oracle(&judged);
        if got != want {
            return Err(format!("root acceptability {got} but oracle says {want} with {judged:?} on {synth:?}"));
        }
    }
    Ok(())
}

// ------------------------------------------------------------- sessions

pub fn gold(pairs: &[(&str, &str)]) -> GoldInterpretation {
    let mut g = GoldInterpretation::default();
    for (w, c) in pairs {
        g.senses.entry(w.to_string()).or_default().push(c.to_string());
    }
    g
}

pub fn joe_ate_the_apple() -> GoldInterpretation {
    gold(&[("joe", "MalePerson"), ("ate", "EatingEvent"), ("apple", "Apple")])
}

/// Outcome of one question-economy replay.
pub struct EconomyRun {
    pub report: DiagnosisReport,
    /// Questions whose answer was already fixed by earlier measurements.
    pub redundant: Vec<String>,
}

/// Runs a session with `agent`, and before each answer checks that at
/// least two of the question's possible answers are logically consistent
/// with the measurements so far under some setting of every completeness
/// pair.
pub fn economy_run(
    sentence: &str,
    kb: &KnowledgeBase,
    agent: &mut OracleAgent,
    max_steps: usize,
) -> Result<EconomyRun, String> {
    let mut engine = Diagnoser::start(sentence, kb.clone());
    let mut redundant = Vec::new();
    for _ in 0..max_steps {
        let q = match engine.advance() {
            Step::Done(r) => {
                let report = r.clone();
                if let Some(e) = report.transcript.iter().find(|e| e.entailed) {
                    redundant.push(format!("engine flagged entailed answer to {}", e.question.prompt));
                }
                return Ok(EconomyRun { report, redundant });
            }
            Step::Failed(m) => return Err(m.to_string()),
            Step::Ask(q) => q.clone(),
        };
        let model = engine.model().expect("questions imply a model");
        let measured = model.measured();
        let pairs = model.default_pairs();
        let possible = q
            .possible_answers()
            .iter()
            .filter(|a| {
                let probes: Vec<NodeId> = ingest_answer(&q, a)
                    .unwrap()
                    .iter()
                    .map(|j| {
                        model
                            .measurements
                            .installed(&j.element, j.verdict)
                            .expect("the engine installs judgment nodes for every candidate")
                    })
                    .collect();
                (0..1u32 << pairs.len()).any(|sigma| {
                    let chosen =
                        pairs
                            .iter()
                            .enumerate()
                            .map(|(i, p)| if sigma & (1 << i) != 0 { p.incomplete } else { p.complete });
                    let env = Environment::new(measured.iter().copied().chain(probes.iter().copied()).chain(chosen));
                    model.tms.env_consistent(&env)
                })
            })
            .count();
        if possible < 2 {
            redundant.push(format!("{} ({possible} consistent answers)", q.prompt));
        }
        let text = agent.respond(&q).map_err(|e| e.to_string())?;
        engine.answer(&text).map_err(|e| e.to_string())?;
    }
    Err(format!("no termination within {max_steps} steps"))
}

pub struct SuiteCase {
    pub sentence: &'static str,
    pub gold: GoldInterpretation,
    /// Whether the unablated KB can produce the gold reading.
    pub producible: bool,
}

/// Sentences the demo lexicon and grammar cover, with gold readings.
pub fn synthetic_suite() -> Vec<SuiteCase> {
    let case = |sentence, gold, producible| SuiteCase { sentence, gold, producible };
    vec![
        case("Joe ate the apple.", joe_ate_the_apple(), true),
        case("Joe ate the apple.", gold(&[("joe", "MalePerson"), ("ate", "HavingAMeal"), ("apple", "Apple")]), true),
        case(
            "Bob ate the wedge.",
            gold(&[("bob", "MalePerson"), ("ate", "EatingEvent"), ("wedge", "Wedge-Sandwich")]),
            true,
        ),
        case(
            "Bob ate the wedge.",
            gold(&[("bob", "MalePerson"), ("ate", "EatingEvent"), ("wedge", "Wedge-GolfClub")]),
            false,
        ),
        case(
            "Bob ate the sandwich.",
            gold(&[("bob", "MalePerson"), ("ate", "EatingEvent"), ("sandwich", "Sandwich")]),
            true,
        ),
        case("Joe eats apples.", gold(&[("joe", "MalePerson"), ("eats", "EatingEvent"), ("apples", "Apple")]), false),
        case("Joe eats the apple.", gold(&[("joe", "MalePerson"), ("eats", "EatingEvent"), ("apple", "Apple")]), true),
        case("Joe ate.", gold(&[("joe", "MalePerson"), ("ate", "HavingAMeal")]), true),
        case("Bob ate a wedge.", gold(&[("bob", "Hairstyle"), ("ate", "EatingEvent"), ("wedge", "Wedge")]), false),
    ]
}

pub fn economy_kbs() -> Vec<&'static str> {
    inld_core::parsekit::NAMED_KBS.iter().map(|(n, _)| *n).collect()
}

pub fn describe(report: &DiagnosisReport) -> String {
    format!("{:?}\n{}", report.taxonomy_ids(), report.transcript_text)
}
