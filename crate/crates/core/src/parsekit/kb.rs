use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ontology::Ontology;

/// The bundled demo knowledge base.
pub const DEMO_KB_JSON: &str = include_str!("../../../../kb/demo.json");

/// Parts of speech that carry word senses. Other categories (determiners)
/// are function words and never get a sense choice set.
pub const OPEN_CLASSES: &[&str] = &["noun", "proper_noun", "verb"];

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed knowledge base: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid knowledge base: {0}")]
    Invalid(String),
    #[error("ablation target not found: {0}")]
    NotFound(String),
    #[error("malformed edit `{0}`")]
    BadEdit(String),
    #[error("unknown knowledge base `{0}`")]
    UnknownName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub surface: String,
    pub root: String,
    pub pos: String,
    #[serde(default)]
    pub features: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConstraint {
    pub feature: String,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarRule {
    pub id: String,
    pub lhs: String,
    pub rhs: Vec<String>,
    /// The rhs position whose head word heads the whole constituent.
    #[serde(default)]
    pub head: usize,
    #[serde(default)]
    pub feature_constraints: Vec<FeatureConstraint>,
    /// Grammatical role to the rhs position that fills it. The filler's head
    /// word is bound to the role of the constituent's head word.
    #[serde(default)]
    pub role_bindings: BTreeMap<String, usize>,
}

/// A template conjunct such as `(performedBy ?self ?performedBy)`. Arguments
/// starting with `?` are slots: `?self` is the word's own discourse
/// variable, any other slot names the role relation that fills it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ExprTemplate {
    pub functor: String,
    pub args: Vec<String>,
}

impl TryFrom<Vec<String>> for ExprTemplate {
    type Error = String;

    fn try_from(mut v: Vec<String>) -> Result<Self, String> {
        if v.is_empty() {
            return Err("empty expression template".into());
        }
        let functor = v.remove(0);
        Ok(ExprTemplate { functor, args: v })
    }
}

impl From<ExprTemplate> for Vec<String> {
    fn from(t: ExprTemplate) -> Self {
        std::iter::once(t.functor).chain(t.args).collect()
    }
}

impl ExprTemplate {
    pub fn role_slots(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|a| a.strip_prefix('?')).filter(|s| *s != "self")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValenceBinding {
    pub relation: String,
    /// Overrides the role relation's declared argument type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValencePattern {
    pub bindings: BTreeMap<String, ValenceBinding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Semtrans {
    pub id: String,
    pub root: String,
    pub pos: String,
    #[serde(default)]
    pub frame: String,
    pub concept: String,
    #[serde(default)]
    pub template: Vec<ExprTemplate>,
    #[serde(default)]
    pub valence_patterns: Vec<ValencePattern>,
    #[serde(default)]
    pub gloss: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    #[serde(default)]
    pub name: String,
    pub lexicon: Vec<LexiconEntry>,
    pub grammar: Vec<GrammarRule>,
    pub semtrans: Vec<Semtrans>,
    pub ontology: Ontology,
    #[serde(default)]
    pub glosses: BTreeMap<String, String>,
    /// Edits applied to derive this KB, oldest first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    RemoveSemtrans { word: String, concept: String },
    RemoveValencePatterns { word: String, concept: String },
    RemoveLexiconEntry { surface: String },
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edit::RemoveSemtrans { word, concept } => write!(f, "remove_semtrans:{word}:{concept}"),
            Edit::RemoveValencePatterns { word, concept } => {
                write!(f, "remove_valence_patterns:{word}:{concept}")
            }
            Edit::RemoveLexiconEntry { surface } => write!(f, "remove_lexicon_entry:{surface}"),
        }
    }
}

impl FromStr for Edit {
    type Err = KbError;

    /// Parses `remove_semtrans:<word>:<Concept>`,
    /// `remove_valence_patterns:<word>:<Concept>` or
    /// `remove_lexicon_entry:<surface>`.
    fn from_str(s: &str) -> Result<Self, KbError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || KbError::BadEdit(s.to_string());
        match parts.as_slice() {
            ["remove_semtrans", w, c] if !w.is_empty() && !c.is_empty() => {
                Ok(Edit::RemoveSemtrans { word: w.to_string(), concept: c.to_string() })
            }
            ["remove_valence_patterns", w, c] if !w.is_empty() && !c.is_empty() => {
                Ok(Edit::RemoveValencePatterns { word: w.to_string(), concept: c.to_string() })
            }
            ["remove_lexicon_entry", w] if !w.is_empty() => Ok(Edit::RemoveLexiconEntry { surface: w.to_string() }),
            _ => Err(bad()),
        }
    }
}

/// Named variants of the demo KB used by the synthetic-error suite.
pub const NAMED_KBS: &[(&str, &[&str])] = &[
    ("demo", &[]),
    ("demo-missing-sandwich", &["remove_semtrans:wedge:Wedge-Sandwich"]),
    ("demo-no-apple-sense", &["remove_semtrans:apple:Apple"]),
    ("demo-no-eating-sense", &["remove_semtrans:ate:EatingEvent"]),
    ("demo-no-eating-valence", &["remove_valence_patterns:ate:EatingEvent"]),
];

impl KnowledgeBase {
    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let kb: KnowledgeBase = serde_json::from_str(text)?;
        kb.validate()?;
        Ok(kb)
    }

    pub fn demo() -> Self {
        Self::from_json(DEMO_KB_JSON).expect("bundled demo KB is valid")
    }

    /// Resolves one of [`NAMED_KBS`].
    pub fn named(name: &str) -> Result<Self, KbError> {
        let (_, edits) =
            NAMED_KBS.iter().find(|(n, _)| *n == name).ok_or_else(|| KbError::UnknownName(name.to_string()))?;
        let mut kb = Self::demo();
        for e in *edits {
            kb = kb.ablate(&e.parse()?)?;
        }
        kb.name = name.to_string();
        Ok(kb)
    }

    pub fn validate(&self) -> Result<(), KbError> {
        let invalid = |m: String| Err(KbError::Invalid(m));
        let mut seen = BTreeSet::new();
        for e in &self.lexicon {
            if !seen.insert((&e.surface, &e.pos, &e.root, &e.features)) {
                return invalid(format!("duplicate lexicon entry for `{}` ({})", e.surface, e.pos));
            }
        }
        for r in &self.grammar {
            if r.rhs.is_empty() {
                return invalid(format!("rule `{}` has an empty right-hand side", r.id));
            }
            if r.head >= r.rhs.len() {
                return invalid(format!("rule `{}` has head position {} out of range", r.id, r.head));
            }
            for (role, pos) in &r.role_bindings {
                if *pos >= r.rhs.len() {
                    return invalid(format!("rule `{}` binds `{role}` to position {pos} out of range", r.id));
                }
            }
            for c in &r.feature_constraints {
                if c.positions.iter().any(|p| *p >= r.rhs.len()) {
                    return invalid(format!("rule `{}` constrains a position out of range", r.id));
                }
            }
        }
        self.ontology.validate().map_err(KbError::Invalid)?;
        let mut ids = BTreeSet::new();
        for s in &self.semtrans {
            if !ids.insert(&s.id) {
                return invalid(format!("duplicate semtrans id `{}`", s.id));
            }
            let covered: BTreeSet<&str> =
                s.valence_patterns.iter().flat_map(|p| p.bindings.values().map(|b| b.relation.as_str())).collect();
            for p in &s.valence_patterns {
                for b in p.bindings.values() {
                    if !self.ontology.roles.contains_key(&b.relation) {
                        return invalid(format!("semtrans `{}` uses undeclared role `{}`", s.id, b.relation));
                    }
                }
            }
            // Slots are only checked while patterns exist: an ablated
            // semtrans legitimately keeps its template.
            if !s.valence_patterns.is_empty() {
                for t in &s.template {
                    for slot in t.role_slots() {
                        if !covered.contains(slot) {
                            return invalid(format!(
                                "semtrans `{}` slot `?{slot}` is covered by no valence pattern",
                                s.id
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn entries_for(&self, surface: &str) -> Vec<usize> {
        self.lexicon.iter().enumerate().filter(|(_, e)| e.surface == surface).map(|(i, _)| i).collect()
    }

    pub fn semtranses_for<'a>(&'a self, root: &'a str, pos: &'a str) -> impl Iterator<Item = &'a Semtrans> + 'a {
        self.semtrans.iter().filter(move |s| s.root == root && s.pos == pos)
    }

    pub fn has_any_semtrans(&self, root: &str) -> bool {
        self.semtrans.iter().any(|s| s.root == root)
    }

    pub fn semtrans(&self, id: &str) -> Option<&Semtrans> {
        self.semtrans.iter().find(|s| s.id == id)
    }

    /// A word in an edit names a surface form when the lexicon knows it,
    /// otherwise a root.
    fn resolve_root(&self, word: &str) -> String {
        self.lexicon.iter().find(|e| e.surface == word).map(|e| e.root.clone()).unwrap_or_else(|| word.to_string())
    }

    /// Returns a copy with `edit` applied and recorded in the provenance.
    pub fn ablate(&self, edit: &Edit) -> Result<KnowledgeBase, KbError> {
        let mut kb = self.clone();
        match edit {
            Edit::RemoveSemtrans { word, concept } => {
                let root = self.resolve_root(word);
                let before = kb.semtrans.len();
                kb.semtrans.retain(|s| !(s.root == root && &s.concept == concept));
                if kb.semtrans.len() == before {
                    return Err(KbError::NotFound(format!("semtrans {concept} for `{word}`")));
                }
            }
            Edit::RemoveValencePatterns { word, concept } => {
                let root = self.resolve_root(word);
                let mut hit = false;
                for s in kb.semtrans.iter_mut().filter(|s| s.root == root && &s.concept == concept) {
                    s.valence_patterns.clear();
                    hit = true;
                }
                if !hit {
                    return Err(KbError::NotFound(format!("semtrans {concept} for `{word}`")));
                }
            }
            Edit::RemoveLexiconEntry { surface } => {
                let before = kb.lexicon.len();
                kb.lexicon.retain(|e| &e.surface != surface);
                if kb.lexicon.len() == before {
                    return Err(KbError::NotFound(format!("lexicon entry `{surface}`")));
                }
            }
        }
        kb.provenance.push(edit.to_string());
        Ok(kb)
    }

    /// The gloss shown for a sense: the semtrans's own, then the KB-wide
    /// gloss for its concept. `None` when neither exists.
    pub fn gloss_for(&self, semtrans: &Semtrans) -> Option<String> {
        if !semtrans.gloss.is_empty() {
            return Some(semtrans.gloss.clone());
        }
        self.glosses.get(&semtrans.concept).cloned()
    }
}
