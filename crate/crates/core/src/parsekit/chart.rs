//! Tokenizer and bottom-up chart parser with feature unification.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::kb::{GrammarRule, KnowledgeBase};

/// Whitespace split, case-folded, with surrounding punctuation stripped.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constituent {
    pub id: usize,
    pub category: String,
    pub start: usize,
    pub end: usize,
    pub features: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<usize>,
    /// Token index of the head word.
    pub head_token: usize,
    /// Lexicon index, for single-word constituents.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexical_entry: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Chart {
    pub constituents: Vec<Constituent>,
    spans: BTreeMap<(usize, usize), Vec<usize>>,
}

impl Chart {
    pub fn at(&self, start: usize, end: usize) -> &[usize] {
        self.spans.get(&(start, end)).map(Vec::as_slice).unwrap_or(&[])
    }

    fn push(&mut self, mut c: Constituent) -> usize {
        let id = self.constituents.len();
        c.id = id;
        self.spans.entry((c.start, c.end)).or_default().push(id);
        self.constituents.push(c);
        id
    }

    /// Every complete constituent of `category` spanning all `n` tokens.
    pub fn spanning(&self, category: &str, n: usize) -> Vec<usize> {
        self.at(0, n).iter().copied().filter(|id| self.constituents[*id].category == category).collect()
    }

    /// (token, lexicon entry) for each leaf under `id`, in token order.
    pub fn leaves(&self, id: usize) -> Vec<(usize, usize)> {
        let c = &self.constituents[id];
        match c.lexical_entry {
            Some(e) => vec![(c.start, e)],
            None => c.children.iter().flat_map(|ch| self.leaves(*ch)).collect(),
        }
    }

    pub fn bracketed(&self, id: usize, tokens: &[String]) -> String {
        let c = &self.constituents[id];
        if c.lexical_entry.is_some() {
            format!("({} {})", c.category, tokens[c.start])
        } else {
            let inner: Vec<String> = c.children.iter().map(|ch| self.bracketed(*ch, tokens)).collect();
            format!("({} {})", c.category, inner.join(" "))
        }
    }
}

/// Builds the chart: one lexical constituent per lexicon entry of each token,
/// then every rule application over increasing span lengths. Unary rules are
/// closed within a span.
pub fn parse_chart(tokens: &[String], kb: &KnowledgeBase) -> Chart {
    let mut chart = Chart::default();
    for (i, t) in tokens.iter().enumerate() {
        for e in kb.entries_for(t) {
            let entry = &kb.lexicon[e];
            chart.push(Constituent {
                id: 0,
                category: entry.pos.clone(),
                start: i,
                end: i + 1,
                features: entry.features.clone(),
                rule: None,
                children: vec![],
                head_token: i,
                lexical_entry: Some(e),
            });
        }
    }
    let n = tokens.len();
    let mut built: BTreeSet<(String, Vec<usize>)> = BTreeSet::new();
    for len in 1..=n {
        for start in 0..=n - len {
            let end = start + len;
            loop {
                let mut added = false;
                for rule in &kb.grammar {
                    for children in sequences(&chart, rule, start, end) {
                        let key = (rule.id.clone(), children.clone());
                        if built.contains(&key) {
                            continue;
                        }
                        built.insert(key);
                        if let Some(features) = unify(&chart, rule, &children) {
                            let head = children[rule.head];
                            chart.push(Constituent {
                                id: 0,
                                category: rule.lhs.clone(),
                                start,
                                end,
                                features,
                                rule: Some(rule.id.clone()),
                                head_token: chart.constituents[head].head_token,
                                children,
                                lexical_entry: None,
                            });
                            added = true;
                        }
                    }
                }
                if !added {
                    break;
                }
            }
        }
    }
    chart
}

/// All ways to cover [start, end) with constituents matching `rule.rhs`.
fn sequences(chart: &Chart, rule: &GrammarRule, start: usize, end: usize) -> Vec<Vec<usize>> {
    fn go(chart: &Chart, rhs: &[String], pos: usize, end: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some((cat, rest)) = rhs.split_first() else {
            if pos == end {
                out.push(acc.clone());
            }
            return;
        };
        // each remaining category needs at least one token
        let max_end = end - rest.len();
        for mid in pos + 1..=max_end {
            for id in chart.at(pos, mid) {
                if &chart.constituents[*id].category == cat {
                    acc.push(*id);
                    go(chart, rest, mid, end, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    if end - start >= rule.rhs.len() {
        go(chart, &rule.rhs, start, end, &mut Vec::new(), &mut out);
    }
    out
}

/// Checks every equality constraint and returns the head's features with
/// the constrained features filled in from whichever child fixes them.
fn unify(chart: &Chart, rule: &GrammarRule, children: &[usize]) -> Option<BTreeMap<String, String>> {
    let mut features = chart.constituents[children[rule.head]].features.clone();
    for c in &rule.feature_constraints {
        let mut value: Option<&String> = None;
        for p in &c.positions {
            if let Some(v) = chart.constituents[children[*p]].features.get(&c.feature) {
                match value {
                    Some(prev) if prev != v => return None,
                    _ => value = Some(v),
                }
            }
        }
        if let Some(v) = value {
            features.insert(c.feature.clone(), v.clone());
        }
    }
    Some(features)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn tokenizer_folds_case_and_strips_punctuation() {
        assert_eq!(toks("Bob ate the wedge."), vec!["bob", "ate", "the", "wedge"]);
        assert_eq!(toks("  Joe   ATE, apples! "), vec!["joe", "ate", "apples"]);
        assert!(toks("...").is_empty());
    }

    #[test]
    fn single_tree_for_bob_sentence() {
        let kb = KnowledgeBase::demo();
        let t = toks("Bob ate the wedge.");
        let chart = parse_chart(&t, &kb);
        let trees = chart.spanning("S", t.len());
        assert_eq!(trees.len(), 1);
        assert_eq!(
            chart.bracketed(trees[0], &t),
            "(S (NP (proper_noun bob)) (VP (verb ate) (NP (determiner the) (noun wedge))))"
        );
        assert_eq!(chart.constituents[trees[0]].head_token, 1);
    }

    #[test]
    fn number_agreement_blocks_mismatch() {
        let kb = KnowledgeBase::demo();
        let bad = toks("a apples");
        let chart = parse_chart(&bad, &kb);
        assert!(chart.spanning("NP", 2).is_empty());
        let t = toks("Joe eat the apple");
        assert!(parse_chart(&t, &kb).spanning("S", t.len()).is_empty());
        let t = toks("Joe eats the apple");
        assert_eq!(parse_chart(&t, &kb).spanning("S", t.len()).len(), 1);
    }

    #[test]
    fn intransitive_clause() {
        let kb = KnowledgeBase::demo();
        let t = toks("Joe ate");
        let chart = parse_chart(&t, &kb);
        assert_eq!(chart.spanning("S", 2).len(), 1);
    }

    #[test]
    fn unknown_word_leaves_no_spanning_tree() {
        let kb = KnowledgeBase::demo();
        let t = toks("Joe ate the zebra");
        assert!(parse_chart(&t, &kb).spanning("S", t.len()).is_empty());
    }
}
