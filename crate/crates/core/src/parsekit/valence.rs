use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::kb::Semtrans;

/// The constituent bound to a grammatical role by a grammar rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RoleFiller {
    pub token: usize,
    pub surface: String,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValenceMatch {
    /// Index into the semtrans's patterns; `None` for the vacuous match of a
    /// word with no bound roles.
    pub pattern: Option<usize>,
    /// Grammatical role to role relation.
    pub assignment: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValenceFailure {
    pub unhandled: Vec<String>,
}

/// Every pattern that covers all bound roles, tightest first (fewest roles
/// left unbound, then declaration order). On failure, reports the roles the
/// closest pattern leaves uncovered.
pub fn match_valence(
    semtrans: &Semtrans,
    bound_roles: &BTreeMap<String, RoleFiller>,
) -> Result<Vec<ValenceMatch>, ValenceFailure> {
    if bound_roles.is_empty() {
        return Ok(vec![ValenceMatch { pattern: None, assignment: BTreeMap::new() }]);
    }
    let bound: BTreeSet<&String> = bound_roles.keys().collect();
    let mut matches: Vec<(usize, ValenceMatch)> = Vec::new();
    let mut best_failure: Option<Vec<String>> = None;
    for (i, p) in semtrans.valence_patterns.iter().enumerate() {
        let uncovered: Vec<String> =
            bound.iter().filter(|r| !p.bindings.contains_key(r.as_str())).map(|r| r.to_string()).collect();
        if uncovered.is_empty() {
            let assignment = bound.iter().map(|r| (r.to_string(), p.bindings[r.as_str()].relation.clone())).collect();
            matches.push((p.bindings.len() - bound.len(), ValenceMatch { pattern: Some(i), assignment }));
        } else if best_failure.as_ref().is_none_or(|b| uncovered.len() < b.len()) {
            best_failure = Some(uncovered);
        }
    }
    if matches.is_empty() {
        let unhandled = best_failure.unwrap_or_else(|| bound.iter().map(|r| r.to_string()).collect());
        return Err(ValenceFailure { unhandled });
    }
    matches.sort_by_key(|(extra, m)| (*extra, m.pattern));
    Ok(matches.into_iter().map(|(_, m)| m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsekit::KnowledgeBase;

    fn filler(token: usize, surface: &str) -> RoleFiller {
        RoleFiller { token, surface: surface.into(), rule: "test".into() }
    }

    fn roles(rs: &[(&str, usize, &str)]) -> BTreeMap<String, RoleFiller> {
        rs.iter().map(|(r, t, s)| (r.to_string(), filler(*t, s))).collect()
    }

    #[test]
    fn transitive_pattern_matches() {
        let kb = KnowledgeBase::demo();
        let eat = kb.semtrans("eat-EatingEvent").unwrap();
        let got = match_valence(eat, &roles(&[("subject", 0, "joe"), ("object", 3, "apple")])).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].pattern, Some(1));
        assert_eq!(got[0].assignment["object"], "consumedObject");
        assert_eq!(got[0].assignment["subject"], "performedBy");
    }

    #[test]
    fn intransitive_prefers_the_tighter_pattern() {
        let kb = KnowledgeBase::demo();
        let eat = kb.semtrans("eat-EatingEvent").unwrap();
        let got = match_valence(eat, &roles(&[("subject", 0, "joe")])).unwrap();
        assert_eq!(got.iter().map(|m| m.pattern).collect::<Vec<_>>(), vec![Some(0), Some(1)]);
    }

    #[test]
    fn missing_object_mapping_fails() {
        let kb = KnowledgeBase::demo();
        let mut eat = kb.semtrans("eat-EatingEvent").unwrap().clone();
        eat.valence_patterns.truncate(1);
        let err = match_valence(&eat, &roles(&[("subject", 0, "joe"), ("object", 3, "apple")])).unwrap_err();
        assert_eq!(err.unhandled, vec!["object"]);
    }

    #[test]
    fn no_patterns_leaves_every_role_unhandled() {
        let kb = KnowledgeBase::named("demo-no-eating-valence").unwrap();
        let eat = kb.semtrans("eat-EatingEvent").unwrap();
        let err = match_valence(eat, &roles(&[("subject", 0, "joe"), ("object", 3, "apple")])).unwrap_err();
        assert_eq!(err.unhandled, vec!["object", "subject"]);
    }

    #[test]
    fn role_free_noun_matches_vacuously() {
        let kb = KnowledgeBase::demo();
        let apple = kb.semtrans("apple-Apple").unwrap();
        let got = match_valence(apple, &BTreeMap::new()).unwrap();
        assert_eq!(got, vec![ValenceMatch { pattern: None, assignment: BTreeMap::new() }]);
    }
}
