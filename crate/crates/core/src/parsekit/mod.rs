//! A small CNLU-style parser: lexicon lookup, chart parsing, and semtrans
//! application producing a [`ParseTrace`] of choice sets, enablement and
//! dropped candidates.

mod chart;
mod kb;
mod ontology;
mod valence;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use chart::{parse_chart, tokenize, Chart, Constituent};
pub use kb::{
    Edit, ExprTemplate, FeatureConstraint, GrammarRule, KbError, KnowledgeBase, LexiconEntry, Semtrans, ValenceBinding,
    ValencePattern, DEMO_KB_JSON, NAMED_KBS, OPEN_CLASSES,
};
pub use ontology::{Ontology, RoleSignature, TypeCheck, TypeError};
pub use valence::{match_valence, RoleFiller, ValenceFailure, ValenceMatch};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SemanticExpression {
    pub functor: String,
    pub args: Vec<String>,
}

impl fmt::Display for SemanticExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.functor)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    /// Lexicon indices, in lexicon order.
    pub entries: Vec<usize>,
    /// Distinct parts of speech offered by the lexicon, in lexicon order.
    pub pos_options: Vec<String>,
    /// Root of the first open-class entry; `None` for function words and
    /// unknown tokens.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    /// Discourse variable: root plus per-sentence occurrence index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
}

impl Token {
    pub fn is_content(&self) -> bool {
        self.root.is_some()
    }

    pub fn pos_ambiguous(&self) -> bool {
        self.pos_options.len() > 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceKind {
    ParseTree,
    WordSense,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChoicePayload {
    Tree {
        constituent: usize,
        bracketed: String,
        /// Part of speech the tree gives each token.
        pos: BTreeMap<usize, String>,
    },
    Sense {
        semtrans: String,
        concept: String,
        var: String,
        expressions: Vec<SemanticExpression>,
        bound_roles: BTreeMap<String, RoleFiller>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Choice {
    pub id: String,
    pub kind: ChoiceKind,
    pub choice_set: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token: Option<usize>,
    pub payload: ChoicePayload,
    pub enabled_by: Vec<String>,
}

impl Choice {
    pub fn expressions(&self) -> &[SemanticExpression] {
        match &self.payload {
            ChoicePayload::Sense { expressions, .. } => expressions,
            ChoicePayload::Tree { .. } => &[],
        }
    }

    pub fn semtrans(&self) -> Option<&str> {
        match &self.payload {
            ChoicePayload::Sense { semtrans, .. } => Some(semtrans),
            ChoicePayload::Tree { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChoiceTarget {
    ParseTrees,
    Word { token: usize, surface: String, root: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChoiceSet {
    pub id: usize,
    pub target: ChoiceTarget,
    pub choices: Vec<String>,
}

impl ChoiceSet {
    pub fn label(&self) -> &str {
        match &self.target {
            ChoiceTarget::ParseTrees => "parse trees",
            ChoiceTarget::Word { surface, .. } => surface,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropStage {
    Lexicon,
    Grammar,
    Valence,
    Typecheck,
}

impl fmt::Display for DropStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DropStage::Lexicon => "lexicon",
            DropStage::Grammar => "grammar",
            DropStage::Valence => "valence",
            DropStage::Typecheck => "typecheck",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DropReason {
    UnknownToken,
    NoTreeWithPos {
        pos: String,
    },
    UnhandledRoles {
        roles: Vec<String>,
        bound_roles: BTreeMap<String, RoleFiller>,
    },
    TypeClash {
        relation: String,
        argument: String,
        concept: String,
        required: String,
        bound_roles: BTreeMap<String, RoleFiller>,
    },
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::UnknownToken => f.write_str("no lexicon entry"),
            DropReason::NoTreeWithPos { pos } => write!(f, "no complete parse uses it as a {pos}"),
            DropReason::UnhandledRoles { roles, .. } => {
                write!(f, "unhandled role: {}", roles.join(", "))
            }
            DropReason::TypeClash { relation, argument, concept, required, .. } => {
                write!(f, "type clash: {relation} needs {required}, {argument} is {concept}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedCandidate {
    /// Semtrans id, or the surface form for lexicon-stage drops.
    pub candidate: String,
    pub token: usize,
    pub surface: String,
    pub stage: DropStage,
    pub reason: DropReason,
}

impl DroppedCandidate {
    pub fn bound_roles(&self) -> Option<&BTreeMap<String, RoleFiller>> {
        match &self.reason {
            DropReason::UnhandledRoles { bound_roles, .. } | DropReason::TypeClash { bound_roles, .. } => {
                Some(bound_roles)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseTrace {
    pub sentence: String,
    pub tokens: Vec<Token>,
    pub constituents: Vec<Constituent>,
    /// Set 0 holds the parse trees; word sets follow in token order.
    pub choice_sets: Vec<ChoiceSet>,
    pub choices: Vec<Choice>,
    pub dropped: Vec<DroppedCandidate>,
    pub fragmented: bool,
}

impl ParseTrace {
    pub fn choice(&self, id: &str) -> Option<&Choice> {
        self.choices.iter().find(|c| c.id == id)
    }

    pub fn set_for_token(&self, token: usize) -> Option<&ChoiceSet> {
        self.choice_sets.iter().find(|s| matches!(s.target, ChoiceTarget::Word { token: t, .. } if t == token))
    }

    pub fn unknown_tokens(&self) -> Vec<&Token> {
        self.tokens.iter().filter(|t| t.entries.is_empty()).collect()
    }

    pub fn dropped_for_token(&self, token: usize) -> impl Iterator<Item = &DroppedCandidate> {
        self.dropped.iter().filter(move |d| d.token == token)
    }

    /// Inspection export: choice sets with their choices, the enablement
    /// edges, the dropped candidates and the fragmentation flag.
    pub fn to_json(&self) -> serde_json::Value {
        let sets: Vec<serde_json::Value> = self
            .choice_sets
            .iter()
            .map(|s| {
                let choices: Vec<&Choice> = s.choices.iter().filter_map(|c| self.choice(c)).collect();
                serde_json::json!({
                    "id": s.id,
                    "label": s.label(),
                    "target": s.target,
                    "choices": choices,
                })
            })
            .collect();
        let enablement: BTreeMap<&str, &Vec<String>> =
            self.choices.iter().map(|c| (c.id.as_str(), &c.enabled_by)).collect();
        serde_json::json!({
            "sentence": self.sentence,
            "tokens": self.tokens,
            "choice_sets": sets,
            "enablement": enablement,
            "dropped": self.dropped,
            "fragmented": self.fragmented,
        })
    }
}

struct SenseOutcome {
    enablers: Vec<String>,
    expressions: Vec<SemanticExpression>,
    bound_roles: BTreeMap<String, RoleFiller>,
    failure: Option<(DropStage, DropReason)>,
}

fn build_tokens(words: &[String], kb: &KnowledgeBase) -> Vec<Token> {
    let mut occurrences: BTreeMap<String, usize> = BTreeMap::new();
    words
        .iter()
        .enumerate()
        .map(|(index, surface)| {
            let entries = kb.entries_for(surface);
            let mut pos_options: Vec<String> = Vec::new();
            for e in &entries {
                let pos = &kb.lexicon[*e].pos;
                if !pos_options.contains(pos) {
                    pos_options.push(pos.clone());
                }
            }
            let root = entries
                .iter()
                .map(|e| &kb.lexicon[*e])
                .find(|e| OPEN_CLASSES.contains(&e.pos.as_str()))
                .map(|e| e.root.clone());
            let var = root.as_ref().map(|r| {
                let n = occurrences.entry(r.clone()).or_default();
                *n += 1;
                format!("{r}{n}")
            });
            Token { index, surface: surface.clone(), entries, pos_options, root, var }
        })
        .collect()
}

/// Role fillers bound to each head token by the rules used in a tree.
fn bound_roles(
    chart: &Chart,
    tree: usize,
    tokens: &[Token],
    kb: &KnowledgeBase,
) -> BTreeMap<usize, BTreeMap<String, RoleFiller>> {
    let mut out: BTreeMap<usize, BTreeMap<String, RoleFiller>> = BTreeMap::new();
    let mut stack = vec![tree];
    while let Some(id) = stack.pop() {
        let c = &chart.constituents[id];
        stack.extend(c.children.iter().copied());
        let Some(rule) = c.rule.as_ref().and_then(|r| kb.grammar.iter().find(|g| &g.id == r)) else {
            continue;
        };
        for (role, pos) in &rule.role_bindings {
            let filler = chart.constituents[c.children[*pos]].head_token;
            out.entry(c.head_token).or_default().insert(
                role.clone(),
                RoleFiller { token: filler, surface: tokens[filler].surface.clone(), rule: rule.id.clone() },
            );
        }
    }
    out
}

/// Instantiates the template against the word's own variable and the
/// matched role assignment. Conjuncts with unfilled slots are omitted.
fn instantiate(
    s: &Semtrans,
    var: &str,
    assignment: &BTreeMap<String, String>,
    roles: &BTreeMap<String, RoleFiller>,
    tokens: &[Token],
) -> Vec<SemanticExpression> {
    let by_relation: BTreeMap<&str, &RoleFiller> =
        assignment.iter().map(|(role, rel)| (rel.as_str(), &roles[role])).collect();
    let mut out = Vec::new();
    'templates: for t in &s.template {
        let mut args = Vec::new();
        for a in &t.args {
            match a.strip_prefix('?') {
                Some("self") => args.push(var.to_string()),
                Some(slot) => match by_relation.get(slot).and_then(|f| tokens[f.token].var.clone()) {
                    Some(v) => args.push(v),
                    None => continue 'templates,
                },
                None => args.push(a.clone()),
            }
        }
        out.push(SemanticExpression { functor: t.functor.clone(), args });
    }
    out
}

/// Evaluates one semtrans for one token in one tree: valence matching, then
/// type checking of each role conjunct. A conjunct is rejected only when
/// every candidate sense of its filler clashes with the required type.
#[allow(clippy::result_large_err)]
fn evaluate_sense(
    s: &Semtrans,
    token: &Token,
    roles: &BTreeMap<String, RoleFiller>,
    tree_pos: &BTreeMap<usize, String>,
    tokens: &[Token],
    kb: &KnowledgeBase,
) -> Result<Vec<SemanticExpression>, (DropStage, DropReason)> {
    let var = token.var.clone().unwrap_or_default();
    let matches = match_valence(s, roles).map_err(|f| {
        (DropStage::Valence, DropReason::UnhandledRoles { roles: f.unhandled, bound_roles: roles.clone() })
    })?;
    let m = &matches[0];
    let expressions = instantiate(s, &var, &m.assignment, roles, tokens);
    for (role, relation) in &m.assignment {
        let filler = &roles[role];
        let filler_token = &tokens[filler.token];
        let (Some(fvar), Some(froot), Some(fpos)) =
            (filler_token.var.as_ref(), filler_token.root.as_ref(), tree_pos.get(&filler.token))
        else {
            continue;
        };
        let expr = SemanticExpression { functor: relation.clone(), args: vec![var.clone(), fvar.clone()] };
        let mut clash = None;
        let mut any_ok = false;
        for fs in kb.semtranses_for(froot, fpos) {
            let types = BTreeMap::from([(var.clone(), s.concept.clone()), (fvar.clone(), fs.concept.clone())]);
            match kb.ontology.type_check(&expr, &types) {
                Ok(TypeCheck::Clash { argument, concept, required }) => {
                    clash.get_or_insert((argument, concept, required));
                }
                _ => any_ok = true,
            }
        }
        if let (Some((argument, concept, required)), false) = (clash, any_ok) {
            return Err((
                DropStage::Typecheck,
                DropReason::TypeClash {
                    relation: relation.clone(),
                    argument,
                    concept,
                    required,
                    bound_roles: roles.clone(),
                },
            ));
        }
    }
    Ok(expressions)
}

/// Parses `sentence` against `kb`.
///
/// Every semtrans matching a token's root and one of its parts of speech
/// ends up either as a word-sense choice (enabled by the parse trees in which
/// it survives) or as a dropped candidate recording the stage that rejected
/// it. Unknown tokens are recorded as lexicon-stage drops and leave the
/// parse fragmented.
pub fn parse(sentence: &str, kb: &KnowledgeBase) -> ParseTrace {
    let words = tokenize(sentence);
    let tokens = build_tokens(&words, kb);
    let chart = parse_chart(&words, kb);
    let trees = if words.is_empty() { vec![] } else { chart.spanning("S", words.len()) };
    let mut trace = ParseTrace {
        sentence: sentence.to_string(),
        tokens: tokens.clone(),
        constituents: chart.constituents.clone(),
        choice_sets: vec![],
        choices: vec![],
        dropped: vec![],
        fragmented: trees.is_empty(),
    };
    for t in &tokens {
        if t.entries.is_empty() {
            trace.dropped.push(DroppedCandidate {
                candidate: t.surface.clone(),
                token: t.index,
                surface: t.surface.clone(),
                stage: DropStage::Lexicon,
                reason: DropReason::UnknownToken,
            });
        }
    }
    if trace.fragmented {
        return trace;
    }

    let mut tree_ids = Vec::new();
    let mut tree_pos_maps = Vec::new();
    for (i, tree) in trees.iter().enumerate() {
        let id = format!("tree{}", i + 1);
        let pos: BTreeMap<usize, String> =
            chart.leaves(*tree).into_iter().map(|(tok, e)| (tok, kb.lexicon[e].pos.clone())).collect();
        trace.choices.push(Choice {
            id: id.clone(),
            kind: ChoiceKind::ParseTree,
            choice_set: 0,
            token: None,
            payload: ChoicePayload::Tree {
                constituent: *tree,
                bracketed: chart.bracketed(*tree, &words),
                pos: pos.clone(),
            },
            enabled_by: vec![],
        });
        tree_ids.push(id);
        tree_pos_maps.push(pos);
    }
    trace.choice_sets.push(ChoiceSet { id: 0, target: ChoiceTarget::ParseTrees, choices: tree_ids.clone() });

    for token in tokens.iter().filter(|t| t.is_content()) {
        let root = token.root.as_deref().unwrap_or_default();
        // candidates in KB order for each open-class part of speech the
        // lexicon offers this token
        let mut outcomes: Vec<(&Semtrans, SenseOutcome)> = Vec::new();
        let mut seen = BTreeSet::new();
        for pos in token.pos_options.iter().filter(|p| OPEN_CLASSES.contains(&p.as_str())) {
            for s in kb.semtranses_for(root, pos) {
                if seen.insert(&s.id) {
                    outcomes.push((
                        s,
                        SenseOutcome {
                            enablers: vec![],
                            expressions: vec![],
                            bound_roles: BTreeMap::new(),
                            failure: None,
                        },
                    ));
                }
            }
        }
        for (ti, tree) in trees.iter().enumerate() {
            let tree_pos = &tree_pos_maps[ti];
            let roles_by_head = bound_roles(&chart, *tree, &tokens, kb);
            let empty = BTreeMap::new();
            let roles = roles_by_head.get(&token.index).unwrap_or(&empty);
            for (s, out) in outcomes.iter_mut() {
                if tree_pos.get(&token.index) != Some(&s.pos) {
                    continue;
                }
                match evaluate_sense(s, token, roles, tree_pos, &tokens, kb) {
                    Ok(exprs) => {
                        if out.enablers.is_empty() {
                            out.expressions = exprs;
                            out.bound_roles = roles.clone();
                        }
                        out.enablers.push(tree_ids[ti].clone());
                    }
                    Err(f) => {
                        out.failure.get_or_insert(f);
                    }
                }
            }
        }
        let set_id = trace.choice_sets.len();
        let had_candidates = !outcomes.is_empty();
        let mut members = Vec::new();
        let var = token.var.clone().unwrap_or_default();
        for (s, out) in outcomes {
            if out.enablers.is_empty() {
                let (stage, reason) =
                    out.failure.unwrap_or((DropStage::Grammar, DropReason::NoTreeWithPos { pos: s.pos.clone() }));
                trace.dropped.push(DroppedCandidate {
                    candidate: s.id.clone(),
                    token: token.index,
                    surface: token.surface.clone(),
                    stage,
                    reason,
                });
                continue;
            }
            let id = format!("{var}:{}", s.concept);
            let id = if trace.choice(&id).is_some() { format!("{var}:{}", s.id) } else { id };
            members.push(id.clone());
            trace.choices.push(Choice {
                id,
                kind: ChoiceKind::WordSense,
                choice_set: set_id,
                token: Some(token.index),
                payload: ChoicePayload::Sense {
                    semtrans: s.id.clone(),
                    concept: s.concept.clone(),
                    var: var.clone(),
                    expressions: out.expressions,
                    bound_roles: out.bound_roles,
                },
                enabled_by: out.enablers,
            });
        }
        // a word whose every candidate was dropped keeps an empty set so
        // the model can fault it without asking anything
        if !members.is_empty() || had_candidates {
            trace.choice_sets.push(ChoiceSet {
                id: set_id,
                target: ChoiceTarget::Word {
                    token: token.index,
                    surface: token.surface.clone(),
                    root: root.to_string(),
                },
                choices: members,
            });
        }
    }
    trace
}
