use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SemanticExpression;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSignature {
    pub domain: String,
    pub range: String,
    /// Yes/no question template; `{event}` is the event word's root and
    /// `{arg}` the filler's surface form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Ontology {
    #[serde(default)]
    pub isa: Vec<(String, String)>,
    #[serde(default)]
    pub disjoint: Vec<(String, String)>,
    #[serde(default)]
    pub roles: BTreeMap<String, RoleSignature>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown role relation `{0}`")]
    UnknownRole(String),
    #[error("`{0}` has no known type")]
    UntypedArgument(String),
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("`{functor}` expects {expected} arguments")]
    Arity { functor: String, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TypeCheck {
    Ok,
    /// Not provably a subtype, but not provably incompatible either.
    Unknown {
        argument: String,
        concept: String,
        required: String,
    },
    Clash {
        argument: String,
        concept: String,
        required: String,
    },
}

impl TypeCheck {
    pub fn holds(&self) -> bool {
        matches!(self, TypeCheck::Ok)
    }

    pub fn is_clash(&self) -> bool {
        matches!(self, TypeCheck::Clash { .. })
    }
}

impl Ontology {
    pub fn validate(&self) -> Result<(), String> {
        for c in self.concepts() {
            if self.ancestors_strict(c).contains(c) {
                return Err(format!("isa cycle through `{c}`"));
            }
        }
        for (a, b) in &self.disjoint {
            if a == b {
                return Err(format!("`{a}` declared disjoint from itself"));
            }
        }
        Ok(())
    }

    pub fn concepts(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for (a, b) in self.isa.iter().chain(&self.disjoint) {
            out.insert(a.as_str());
            out.insert(b.as_str());
        }
        for s in self.roles.values() {
            out.insert(s.domain.as_str());
            out.insert(s.range.as_str());
        }
        out
    }

    pub fn knows(&self, concept: &str) -> bool {
        self.concepts().contains(concept)
    }

    fn ancestors_strict<'a>(&'a self, concept: &'a str) -> BTreeSet<&'a str> {
        let mut out = BTreeSet::new();
        let mut stack = vec![concept];
        while let Some(c) = stack.pop() {
            for (sub, sup) in &self.isa {
                if sub == c && out.insert(sup.as_str()) {
                    stack.push(sup.as_str());
                }
            }
        }
        out
    }

    /// `concept` and everything above it.
    pub fn ancestors<'a>(&'a self, concept: &'a str) -> BTreeSet<&'a str> {
        let mut out = self.ancestors_strict(concept);
        out.insert(concept);
        out
    }

    pub fn is_subtype(&self, concept: &str, of: &str) -> bool {
        self.ancestors(concept).contains(of)
    }

    /// Disjointness is inherited downwards and symmetric.
    pub fn are_disjoint(&self, a: &str, b: &str) -> bool {
        let up_a = self.ancestors(a);
        let up_b = self.ancestors(b);
        self.disjoint.iter().any(|(x, y)| {
            (up_a.contains(x.as_str()) && up_b.contains(y.as_str()))
                || (up_a.contains(y.as_str()) && up_b.contains(x.as_str()))
        })
    }

    fn check_arg(&self, argument: &str, concept: &str, required: &str) -> TypeCheck {
        let report = || (argument.to_string(), concept.to_string(), required.to_string());
        if self.is_subtype(concept, required) {
            TypeCheck::Ok
        } else if self.are_disjoint(concept, required) {
            let (argument, concept, required) = report();
            TypeCheck::Clash { argument, concept, required }
        } else {
            let (argument, concept, required) = report();
            TypeCheck::Unknown { argument, concept, required }
        }
    }

    /// Checks a role expression `(relation event filler)` against the
    /// relation's signature, given each discourse variable's concept. `isa`
    /// expressions only need their concept to exist.
    pub fn type_check(
        &self,
        expr: &SemanticExpression,
        types: &BTreeMap<String, String>,
    ) -> Result<TypeCheck, TypeError> {
        if expr.functor == "isa" {
            let [_, concept] = expr.args.as_slice() else {
                return Err(TypeError::Arity { functor: "isa".into(), expected: 2 });
            };
            return if self.knows(concept) {
                Ok(TypeCheck::Ok)
            } else {
                Err(TypeError::UnknownConcept(concept.clone()))
            };
        }
        let sig = self.roles.get(&expr.functor).ok_or_else(|| TypeError::UnknownRole(expr.functor.clone()))?;
        let [event, filler] = expr.args.as_slice() else {
            return Err(TypeError::Arity { functor: expr.functor.clone(), expected: 2 });
        };
        let mut worst = TypeCheck::Ok;
        for (arg, required) in [(event, &sig.domain), (filler, &sig.range)] {
            let concept = types.get(arg).ok_or_else(|| TypeError::UntypedArgument(arg.clone()))?;
            match self.check_arg(arg, concept, required) {
                TypeCheck::Ok => {}
                c @ TypeCheck::Clash { .. } => return Ok(c),
                u => worst = u,
            }
        }
        Ok(worst)
    }
}
