//! Turns a parse trace into a diagnosis model inside the CATMS.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::catms::{Environment, NodeId, NodeKind, Tms, TmsError, TmsStats};
use crate::gde::{
    AcceptabilityJudgment, DefaultAssumption, DefaultPair, GdeError, MeasurementRecord, Measurements, Probe, Verdict,
};
use crate::parsekit::{ChoiceKind, ChoicePayload, ChoiceTarget, ParseTrace};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("the parse is fragmented; no model can be built")]
    Fragmented,
    #[error("enablement cycle through `{0}`")]
    EnablementCycle(String),
    #[error("unknown parse element `{0}`")]
    UnknownElement(String),
    #[error("duplicate parse element `{0}`")]
    DuplicateElement(String),
    #[error(transparent)]
    Tms(#[from] TmsError),
    #[error(transparent)]
    Gde(#[from] GdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Root,
    Choice,
    ChoiceSubset,
    FactoredInterpretation,
    Expression,
    PosOfWord,
    RecoveredSense,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseElement {
    pub id: String,
    pub kind: ElementKind,
    pub acceptable: NodeId,
    pub unacceptable: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChoiceSubset {
    pub id: String,
    pub enabler: String,
    pub choice_set: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactoredInterpretation {
    pub id: String,
    pub root_choice: String,
    pub subsets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PairReferent {
    ChoiceSet { set: usize, label: String, root: Option<String> },
    SemtransSet { word: String },
    ValencePatterns { semtrans: String, concept: String },
    TypeConstraints { semtrans: String, concept: String },
}

impl fmt::Display for PairReferent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairReferent::ChoiceSet { set, root: None, .. } => write!(f, "Choice Set #{set} (parse trees)"),
            PairReferent::ChoiceSet { set, label, .. } => write!(f, "Choice Set #{set} (\"{label}\")"),
            PairReferent::SemtransSet { word } => write!(f, "Semtrans Set for \"{word}\""),
            PairReferent::ValencePatterns { concept, .. } => write!(f, "Valence Patterns for {concept}"),
            PairReferent::TypeConstraints { concept, .. } => write!(f, "Type Constraints for {concept}"),
        }
    }
}

impl PairReferent {
    /// The closed-world claim this pair's completeness assumption makes.
    pub fn complete_statement(&self) -> String {
        let verb = match self {
            PairReferent::ValencePatterns { .. } | PairReferent::TypeConstraints { .. } => "are",
            _ => "is",
        };
        format!("{self} {verb} complete.")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletenessPair {
    pub id: String,
    pub referent: PairReferent,
    pub complete: NodeId,
    pub incomplete: NodeId,
}

impl CompletenessPair {
    pub fn as_default_pair(&self) -> DefaultPair {
        DefaultPair { complete: self.complete, incomplete: self.incomplete }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    #[serde(flatten)]
    pub tms: TmsStats,
    pub elements: usize,
    pub subsets: usize,
    pub interpretations: usize,
    pub completeness_pairs: usize,
}

/// Parse elements, factored interpretations and completeness pairs wired
/// into one TMS, plus the judgments measured so far.
#[derive(Debug)]
pub struct DiagnosisModel {
    pub tms: Tms,
    elements: Vec<ParseElement>,
    index: BTreeMap<String, usize>,
    pub subsets: Vec<ChoiceSubset>,
    pub interpretations: BTreeMap<String, FactoredInterpretation>,
    pub pairs: Vec<CompletenessPair>,
    /// "A desired interpretation exists."
    pub premise: NodeId,
    /// Holds when the premise meets an unacceptable root.
    pub symptom: NodeId,
    bottom: NodeId,
    pub measurements: Measurements,
}

pub fn choice_element(choice: &str) -> String {
    format!("choice:{choice}")
}

pub fn fi_element(choice: &str) -> String {
    format!("fi:{choice}")
}

pub fn expression_element(expr: &impl fmt::Display) -> String {
    format!("expr:{expr}")
}

pub fn pos_element(token: usize, pos: &str) -> String {
    format!("pos:{token}:{pos}")
}

pub const ROOT_ELEMENT: &str = "root";

impl DiagnosisModel {
    fn empty() -> Self {
        let mut tms = Tms::new();
        let premise = tms.create_node("premise: a desired interpretation exists", NodeKind::Assumption);
        let symptom = tms.create_node("symptom: no acceptable interpretation", NodeKind::Ordinary);
        let bottom = tms.create_node("contradiction", NodeKind::Contradiction);
        DiagnosisModel {
            tms,
            elements: vec![],
            index: BTreeMap::new(),
            subsets: vec![],
            interpretations: BTreeMap::new(),
            pairs: vec![],
            premise,
            symptom,
            bottom,
            measurements: Measurements::default(),
        }
    }

    pub fn elements(&self) -> &[ParseElement] {
        &self.elements
    }

    pub fn element(&self, id: &str) -> Option<&ParseElement> {
        self.index.get(id).map(|i| &self.elements[*i])
    }

    fn require(&self, id: &str) -> Result<&ParseElement, ModelError> {
        self.element(id).ok_or_else(|| ModelError::UnknownElement(id.to_string()))
    }

    /// Creates an acceptable/unacceptable node pair registered as
    /// mutually contradictory.
    pub fn add_element(&mut self, id: &str, kind: ElementKind) -> Result<&ParseElement, ModelError> {
        if self.index.contains_key(id) {
            return Err(ModelError::DuplicateElement(id.to_string()));
        }
        let acceptable = self.tms.create_node(format!("acceptable({id})"), NodeKind::Ordinary);
        let unacceptable = self.tms.create_node(format!("unacceptable({id})"), NodeKind::Ordinary);
        let bot = self.tms.create_node(format!("contradiction({id})"), NodeKind::Contradiction);
        self.tms.add_justification(&[acceptable, unacceptable], bot, "element-pair")?;
        self.index.insert(id.to_string(), self.elements.len());
        self.elements.push(ParseElement { id: id.to_string(), kind, acceptable, unacceptable });
        Ok(self.elements.last().expect("just pushed"))
    }

    fn ensure_element(&mut self, id: &str, kind: ElementKind) -> Result<ParseElement, ModelError> {
        match self.element(id) {
            Some(e) => Ok(e.clone()),
            None => self.add_element(id, kind).cloned(),
        }
    }

    /// Creates a completeness/incompleteness assumption pair.
    pub fn add_pair(&mut self, id: &str, referent: PairReferent) -> Result<CompletenessPair, ModelError> {
        let complete = self.tms.create_node(format!("complete({id})"), NodeKind::Assumption);
        let incomplete = self.tms.create_node(format!("incomplete({id})"), NodeKind::Assumption);
        let bot = self.tms.create_node(format!("contradiction({id})"), NodeKind::Contradiction);
        self.tms.add_justification(&[complete, incomplete], bot, "completeness-pair")?;
        let pair = CompletenessPair { id: id.to_string(), referent, complete, incomplete };
        self.pairs.push(pair.clone());
        Ok(pair)
    }

    pub fn pair(&self, id: &str) -> Option<&CompletenessPair> {
        self.pairs.iter().find(|p| p.id == id)
    }

    pub fn pair_by_complete(&self, node: NodeId) -> Option<&CompletenessPair> {
        self.pairs.iter().find(|p| p.complete == node)
    }

    pub fn pair_index(&self, node: NodeId) -> Option<usize> {
        self.pairs.iter().position(|p| p.complete == node)
    }

    /// Records that `antecedents` jointly entail a contradiction.
    pub fn forbid(&mut self, antecedents: &[NodeId], informant: &str) -> Result<(), ModelError> {
        self.tms.add_justification(antecedents, self.bottom, informant)?;
        Ok(())
    }

    fn justify(&mut self, antecedents: &[NodeId], consequent: NodeId, informant: &str) -> Result<(), ModelError> {
        // an empty antecedent list would make the consequent a premise
        if !antecedents.is_empty() {
            self.tms.add_justification(antecedents, consequent, informant)?;
        }
        Ok(())
    }

    pub fn defaults(&self) -> Vec<DefaultAssumption> {
        self.pairs
            .iter()
            .flat_map(|p| {
                [
                    DefaultAssumption { node: p.complete, fault_eligible: true, referent: p.referent.to_string() },
                    DefaultAssumption { node: p.incomplete, fault_eligible: false, referent: p.referent.to_string() },
                ]
            })
            .collect()
    }

    pub fn default_pairs(&self) -> Vec<DefaultPair> {
        self.pairs.iter().map(CompletenessPair::as_default_pair).collect()
    }

    /// The premise and every measured judgment.
    pub fn measured(&self) -> Vec<NodeId> {
        std::iter::once(self.premise).chain(self.measurements.measured()).collect()
    }

    fn verdict_target(&self, element: &str, verdict: Verdict) -> Result<NodeId, ModelError> {
        let e = self.require(element)?;
        Ok(match verdict {
            Verdict::Acceptable => e.acceptable,
            Verdict::Unacceptable => e.unacceptable,
        })
    }

    /// The judgment assumption a question would install, created on first use.
    pub fn probe(&mut self, element: &str, verdict: Verdict) -> Result<Probe, ModelError> {
        let target = self.verdict_target(element, verdict)?;
        let judgment = self.measurements.judgment_node(&mut self.tms, element, target, verdict)?;
        Ok(Probe { judgment, target })
    }

    pub fn record_judgment(&mut self, judgment: &AcceptabilityJudgment) -> Result<MeasurementRecord, ModelError> {
        let target = self.verdict_target(&judgment.element, judgment.verdict)?;
        Ok(self.measurements.record(&mut self.tms, judgment, target)?)
    }

    pub fn root(&self) -> &ParseElement {
        self.element(ROOT_ELEMENT).expect("models always have a root")
    }

    /// Whether some acceptable interpretation exists under `env`.
    pub fn root_acceptability(&self, env: &Environment) -> bool {
        self.tms.holds_in(self.root().acceptable, env).unwrap_or(false)
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            tms: self.tms.stats(),
            elements: self.elements.len(),
            subsets: self.subsets.len(),
            interpretations: self.interpretations.len(),
            completeness_pairs: self.pairs.len(),
        }
    }

    /// Builds (once per choice) the factored interpretation rooted at
    /// `choice`: the choice itself plus one acceptable continuation for each
    /// choice set it enables.
    pub fn install_factored_interpretation(
        &mut self,
        trace: &ParseTrace,
        choice: &str,
    ) -> Result<FactoredInterpretation, ModelError> {
        let mut visiting = BTreeSet::new();
        self.install_fi(trace, choice, &mut visiting)
    }

    fn install_fi(
        &mut self,
        trace: &ParseTrace,
        choice: &str,
        visiting: &mut BTreeSet<String>,
    ) -> Result<FactoredInterpretation, ModelError> {
        if let Some(fi) = self.interpretations.get(choice) {
            return Ok(fi.clone());
        }
        if !visiting.insert(choice.to_string()) {
            return Err(ModelError::EnablementCycle(choice.to_string()));
        }
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for c in trace.choices.iter().filter(|c| c.enabled_by.iter().any(|e| e == choice)) {
            groups.entry(c.choice_set).or_default().push(c.id.clone());
        }
        let choice_el = self.require(&choice_element(choice))?.clone();
        let mut subset_ids = Vec::new();
        let mut fi_acceptable = vec![choice_el.acceptable];
        let mut subset_unacceptable = Vec::new();
        for (set, members) in groups {
            let mut member_fis = Vec::new();
            for m in &members {
                self.install_fi(trace, m, visiting)?;
                member_fis.push(self.require(&fi_element(m))?.clone());
            }
            let id = format!("subset:{choice}/{set}");
            let el = self.add_element(&id, ElementKind::ChoiceSubset)?.clone();
            for m in &member_fis {
                self.justify(&[m.acceptable], el.acceptable, "subset-satisfied")?;
            }
            let all_bad: Vec<NodeId> = member_fis.iter().map(|m| m.unacceptable).collect();
            self.justify(&all_bad, el.unacceptable, "subset-unsatisfiable")?;
            fi_acceptable.push(el.acceptable);
            subset_unacceptable.push(el.unacceptable);
            self.subsets.push(ChoiceSubset { id: id.clone(), enabler: choice.to_string(), choice_set: set, members });
            subset_ids.push(id);
        }
        let fi = self.add_element(&fi_element(choice), ElementKind::FactoredInterpretation)?.clone();
        self.justify(&fi_acceptable, fi.acceptable, "fi-acceptable")?;
        self.justify(&[choice_el.unacceptable], fi.unacceptable, "fi-choice-unacceptable")?;
        for u in subset_unacceptable {
            self.justify(&[u], fi.unacceptable, "fi-subset-unacceptable")?;
        }
        visiting.remove(choice);
        let out =
            FactoredInterpretation { id: fi_element(choice), root_choice: choice.to_string(), subsets: subset_ids };
        self.interpretations.insert(choice.to_string(), out.clone());
        Ok(out)
    }

    /// Graph export: elements, completeness pairs, nodes, justifications
    /// and nogoods.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .tms
            .nodes()
            .iter()
            .map(|n| serde_json::json!({ "id": n.id, "datum": n.datum, "kind": n.kind }))
            .collect();
        let justifications: Vec<serde_json::Value> = self
            .tms
            .justifications()
            .iter()
            .map(|j| {
                serde_json::json!({
                    "informant": j.informant,
                    "antecedents": j.antecedents,
                    "consequent": j.consequent,
                })
            })
            .collect();
        let nogoods: Vec<&[NodeId]> = self.tms.nogoods().iter().map(|e| e.assumptions()).collect();
        let assumptions: Vec<NodeId> =
            self.tms.nodes().iter().filter(|n| n.kind == NodeKind::Assumption).map(|n| n.id).collect();
        serde_json::json!({
            "elements": self.elements,
            "subsets": self.subsets,
            "interpretations": self.interpretations.values().collect::<Vec<_>>(),
            "completeness_pairs": self.pairs,
            "premise": self.premise,
            "nodes": nodes,
            "assumptions": assumptions,
            "justifications": justifications,
            "nogoods": nogoods,
            "measurements": self.measurements.records(),
            "stats": self.stats(),
        })
    }
}

/// Builds the diagnosis model for a non-fragmented trace.
///
/// Choices are justified from their expressions, parse trees from the
/// part-of-speech elements of lexically ambiguous tokens, and factored
/// interpretations are installed from each parse tree downward. Each choice
/// set gets a completeness pair: an acceptable member contradicts
/// incompleteness, and all members unacceptable contradicts completeness.
/// The premise plus an unacceptable root raises the symptom, which
/// contradicts every choice set being complete at once.
pub fn build_model(trace: &ParseTrace) -> Result<DiagnosisModel, ModelError> {
    if trace.fragmented {
        return Err(ModelError::Fragmented);
    }
    let mut m = DiagnosisModel::empty();
    for c in &trace.choices {
        m.add_element(&choice_element(&c.id), ElementKind::Choice)?;
    }
    for c in &trace.choices {
        let exprs = c.expressions();
        if exprs.is_empty() {
            continue;
        }
        let ce = m.require(&choice_element(&c.id))?.clone();
        let mut conj = Vec::new();
        for e in exprs {
            let ee = m.ensure_element(&expression_element(e), ElementKind::Expression)?;
            conj.push(ee.acceptable);
            m.justify(&[ee.unacceptable], ce.unacceptable, "choice-expression-unacceptable")?;
        }
        m.justify(&conj, ce.acceptable, "choice-expressions-acceptable")?;
    }
    for t in trace.tokens.iter().filter(|t| t.pos_ambiguous()) {
        for pos in &t.pos_options {
            m.add_element(&pos_element(t.index, pos), ElementKind::PosOfWord)?;
        }
    }
    for c in trace.choices.iter().filter(|c| c.kind == ChoiceKind::ParseTree) {
        let ChoicePayload::Tree { pos, .. } = &c.payload else { continue };
        let ce = m.require(&choice_element(&c.id))?.clone();
        let mut conj = Vec::new();
        for (tok, p) in pos {
            if !trace.tokens[*tok].pos_ambiguous() {
                continue;
            }
            let pe = m.require(&pos_element(*tok, p))?.clone();
            conj.push(pe.acceptable);
            m.justify(&[pe.unacceptable], ce.unacceptable, "tree-pos-unacceptable")?;
        }
        m.justify(&conj, ce.acceptable, "tree-pos-acceptable")?;
    }
    let trees: Vec<String> = trace.choice_sets[0].choices.clone();
    let mut tree_fis = Vec::new();
    for t in &trees {
        m.install_factored_interpretation(trace, t)?;
        tree_fis.push(m.require(&fi_element(t))?.clone());
    }
    let root = m.add_element(ROOT_ELEMENT, ElementKind::Root)?.clone();
    for fi in &tree_fis {
        m.justify(&[fi.acceptable], root.acceptable, "root-acceptable")?;
    }
    let all_bad: Vec<NodeId> = tree_fis.iter().map(|f| f.unacceptable).collect();
    m.justify(&all_bad, root.unacceptable, "root-unacceptable")?;

    let mut completes = Vec::new();
    for set in &trace.choice_sets {
        let (label, root_word) = match &set.target {
            ChoiceTarget::ParseTrees => ("parse trees".to_string(), None),
            ChoiceTarget::Word { surface, root, .. } => (surface.clone(), Some(root.clone())),
        };
        let pair =
            m.add_pair(&format!("set:{}", set.id), PairReferent::ChoiceSet { set: set.id, label, root: root_word })?;
        completes.push(pair.complete);
        let members: Vec<ParseElement> =
            set.choices.iter().map(|c| m.require(&choice_element(c)).cloned()).collect::<Result<_, _>>()?;
        for e in &members {
            m.forbid(&[e.acceptable, pair.incomplete], "acceptable-member-of-incomplete-set")?;
        }
        let mut all_bad: Vec<NodeId> = members.iter().map(|e| e.unacceptable).collect();
        all_bad.push(pair.complete);
        m.forbid(&all_bad, "complete-set-without-acceptable-member")?;
        let set_subsets: Vec<ChoiceSubset> = m.subsets.iter().filter(|s| s.choice_set == set.id).cloned().collect();
        for s in set_subsets {
            let enabler = m.require(&choice_element(&s.enabler))?.acceptable;
            let mut ants = vec![enabler, pair.complete];
            for c in &s.members {
                ants.push(m.require(&choice_element(c))?.unacceptable);
            }
            m.forbid(&ants, "complete-subset-without-acceptable-member")?;
        }
    }
    let (premise, symptom) = (m.premise, m.symptom);
    m.tms.add_justification(&[premise, root.unacceptable], symptom, "premise-violated")?;
    let mut ants = vec![symptom];
    ants.extend(completes);
    m.forbid(&ants, "symptom-with-complete-knowledge")?;
    Ok(m)
}

/// Shorthand for [`DiagnosisModel::root_acceptability`].
pub fn root_acceptability(model: &DiagnosisModel, env: &Environment) -> bool {
    model.root_acceptability(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gde::project_conflicts;
    use crate::parsekit::{parse, KnowledgeBase};

    fn model(sentence: &str, kb: &str) -> (ParseTrace, DiagnosisModel) {
        let kb = KnowledgeBase::named(kb).unwrap();
        let t = parse(sentence, &kb);
        let m = build_model(&t).unwrap();
        (t, m)
    }

    fn judge(m: &mut DiagnosisModel, element: &str, verdict: Verdict) -> NodeId {
        m.record_judgment(&AcceptabilityJudgment { element: element.into(), verdict }).unwrap().assumption
    }

    #[test]
    fn bob_wedge_elements() {
        let (_, m) = model("Bob ate the wedge.", "demo-missing-sandwich");
        for id in [
            "choice:wedge1:Wedge-GolfClub",
            "choice:wedge1:Wedge",
            "choice:eat1:EatingEvent",
            "choice:eat1:HavingAMeal",
            "expr:(performedBy eat1 bob1)",
            "expr:(consumedObject eat1 wedge1)",
            "pos:0:noun",
            "pos:0:proper_noun",
            "fi:tree1",
            "root",
        ] {
            assert!(m.element(id).is_some(), "{id}");
        }
        // one pair per choice set: trees, bob, ate, wedge
        assert_eq!(m.pairs.len(), 4);
        assert_eq!(m.pairs[3].referent.complete_statement(), "Choice Set #3 (\"wedge\") is complete.");
    }

    #[test]
    fn rejecting_every_wedge_sense_faults_its_set() {
        let (_, mut m) = model("Bob ate the wedge.", "demo-missing-sandwich");
        let a = judge(&mut m, "choice:wedge1:Wedge-GolfClub", Verdict::Unacceptable);
        let b = judge(&mut m, "choice:wedge1:Wedge", Verdict::Unacceptable);
        let complete = m.pair("set:3").unwrap().complete;
        assert!(m.tms.nogoods().iter().any(|n| n.contains(complete) && n.contains(a) && n.contains(b)));
        let conflicts = project_conflicts(&m.tms, &m.defaults(), &m.measured());
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].0, BTreeSet::from([complete]));
    }

    #[test]
    fn all_acceptable_single_choices_are_consistent() {
        let (t, mut m) = model("Joe ate the apple.", "demo-no-eating-sense");
        let mut env = vec![m.premise];
        for c in &t.choices {
            env.push(judge(&mut m, &choice_element(&c.id), Verdict::Acceptable));
        }
        env.extend(m.pairs.iter().map(|p| p.complete));
        let env = Environment::new(env);
        assert!(m.tms.env_consistent(&env));
        assert!(m.root_acceptability(&env));
        assert!(project_conflicts(&m.tms, &m.defaults(), &m.measured()).is_empty());
    }

    #[test]
    fn mixed_wedge_judgments_keep_root_acceptable() {
        let (_, mut m) = model("Bob ate the wedge.", "demo-missing-sandwich");
        let mut env = vec![
            judge(&mut m, "choice:wedge1:Wedge-GolfClub", Verdict::Acceptable),
            judge(&mut m, "choice:wedge1:Wedge", Verdict::Unacceptable),
            judge(&mut m, "choice:tree1", Verdict::Acceptable),
            judge(&mut m, "choice:bob1:MalePerson", Verdict::Acceptable),
            judge(&mut m, "choice:eat1:EatingEvent", Verdict::Acceptable),
        ];
        assert!(m.root_acceptability(&Environment::new(env.clone())));
        env.pop();
        assert!(!m.root_acceptability(&Environment::new(env)));
    }

    #[test]
    fn rejecting_the_only_sense_makes_root_unacceptable() {
        let (_, mut m) = model("Joe ate the apple.", "demo");
        let u = judge(&mut m, "choice:apple1:Apple", Verdict::Unacceptable);
        let env = Environment::new([u]);
        assert!(!m.root_acceptability(&env));
        assert!(m.tms.holds_in(m.root().unacceptable, &env).unwrap());
    }

    #[test]
    fn pos_judgments_reach_the_tree() {
        let (_, mut m) = model("Bob ate the wedge.", "demo");
        let j = judge(&mut m, "pos:0:proper_noun", Verdict::Acceptable);
        let tree = m.element("choice:tree1").unwrap().acceptable;
        assert!(m.tms.holds_in(tree, &Environment::new([j])).unwrap());
    }

    #[test]
    fn shared_expression_reaches_both_senses() {
        let (_, mut m) = model("Bob ate the wedge.", "demo");
        let j = judge(&mut m, "expr:(performedBy eat1 bob1)", Verdict::Unacceptable);
        let env = Environment::new([j]);
        for c in ["choice:eat1:EatingEvent", "choice:eat1:HavingAMeal"] {
            let u = m.element(c).unwrap().unacceptable;
            assert!(m.tms.holds_in(u, &env).unwrap(), "{c}");
        }
    }

    #[test]
    fn fragmented_traces_have_no_model() {
        let kb = KnowledgeBase::demo();
        let t = parse("Joe ate the zebra.", &kb);
        assert!(matches!(build_model(&t), Err(ModelError::Fragmented)));
    }

    #[test]
    fn export_lists_pairs_and_nogoods() {
        let (_, m) = model("Joe ate the apple.", "demo");
        let v = m.to_json();
        assert_eq!(v["completeness_pairs"].as_array().unwrap().len(), 4);
        assert!(v["nodes"].as_array().unwrap().len() > 10);
        assert!(v["nogoods"].is_array());
    }
}
