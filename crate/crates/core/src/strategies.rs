//! The outer loop: runs the inner GDE loop, decomposes faulted choice sets
//! by recovering dropped candidates, and reduces faults to primitive errors.
//!
//! [`Diagnoser`] is a resumable state machine so the console, the scripted
//! runner and the HTTP service all drive the same code.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::catms::NodeId;
use crate::gde::{
    minimal_diagnoses, project_conflicts, select_measurement, surviving_diagnoses, Diagnosis, GdeError,
    HypothesisSpace, MeasurementCandidate, Probe, DEFAULT_FAULT_CAP,
};
use crate::modelgen::{build_model, CompletenessPair, DiagnosisModel, ElementKind, PairReferent};
use crate::parsekit::{parse, DropStage, DroppedCandidate, KnowledgeBase, ParseTrace, Token};
use crate::session::{
    confirmation_prompt, generate_questions, ingest_answer, question_id, render_transcript, sense_gloss, Answer,
    AnswerError, DiagnosisReport, OracleProbe, Question, QuestionKind, QuestionOption, ReportStatus, TranscriptEntry,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FaultKind {
    ChoiceSetIncomplete { word: String },
    SemtransSetIncomplete { word: String },
    ValenceMissing { semtrans: String, concept: String, roles: Vec<String> },
    LexiconMissing { surface: String },
    UnresolvedGrammar,
    Unresolved { note: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub kind: FaultKind,
    pub taxonomy_id: Option<String>,
    pub description: String,
    pub decomposable: bool,
    pub evidence: Vec<String>,
}

impl Fault {
    pub fn missing_semtrans(word: &str, evidence: Vec<String>) -> Fault {
        Fault {
            kind: FaultKind::SemtransSetIncomplete { word: word.to_string() },
            taxonomy_id: Some("C3".into()),
            description: format!("Missing semtrans for \"{word}\""),
            decomposable: false,
            evidence,
        }
    }

    pub fn missing_valence(semtrans: &str, concept: &str, roles: Vec<String>, evidence: Vec<String>) -> Fault {
        Fault {
            description: format!("Missing valence pattern for {concept} (roles: {})", roles.join(", ")),
            kind: FaultKind::ValenceMissing { semtrans: semtrans.to_string(), concept: concept.to_string(), roles },
            taxonomy_id: Some("C2".into()),
            decomposable: false,
            evidence,
        }
    }

    pub fn missing_lexicon(surface: &str) -> Fault {
        Fault {
            kind: FaultKind::LexiconMissing { surface: surface.to_string() },
            taxonomy_id: Some("A1".into()),
            description: format!("Missing lexicon entry for \"{surface}\""),
            decomposable: false,
            evidence: vec![format!("token \"{surface}\": no lexicon entry")],
        }
    }

    pub fn unresolved_grammar(evidence: Vec<String>) -> Fault {
        Fault {
            kind: FaultKind::UnresolvedGrammar,
            taxonomy_id: Some("B1".into()),
            description: "No grammar rule yields the intended parse".into(),
            decomposable: false,
            evidence,
        }
    }

    pub fn unresolved(note: &str, taxonomy_id: Option<&str>, evidence: Vec<String>) -> Fault {
        Fault {
            kind: FaultKind::Unresolved { note: note.to_string() },
            taxonomy_id: taxonomy_id.map(str::to_string),
            description: format!("Unresolved: {note}"),
            decomposable: false,
            evidence,
        }
    }
}

/// A sense the parser dropped, brought back into the model as a judgeable
/// element with a completeness pair for the knowledge that rejected it.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveredSense {
    pub element: String,
    pub dropped: DroppedCandidate,
    pub concept: String,
    pub gloss: String,
    pub pair: CompletenessPair,
}

/// Structure installed by [`decompose_no_acceptable_semtrans`] for the inner
/// loop to explore.
#[derive(Debug, Clone, Serialize)]
pub struct ModelExtension {
    pub token: usize,
    pub surface: String,
    pub word: String,
    pub semtrans_pair: CompletenessPair,
    pub recovered: Vec<RecoveredSense>,
}

impl ModelExtension {
    pub fn focus(&self) -> Vec<NodeId> {
        std::iter::once(self.semtrans_pair.complete).chain(self.recovered.iter().map(|r| r.pair.complete)).collect()
    }

    pub fn questions(&self) -> Vec<Question> {
        self.recovered
            .iter()
            .map(|r| Question {
                id: question_id(2, "verb", self.token, &format!("recovered.{}", r.element)),
                kind: QuestionKind::YesNo,
                prompt: confirmation_prompt(&self.surface, &r.gloss),
                options: vec![QuestionOption {
                    label: r.gloss.clone(),
                    targets: vec![r.element.clone()],
                    probe: OracleProbe::Sense { surface: self.surface.clone(), concept: r.concept.clone() },
                }],
                allow_none: false,
            })
            .collect()
    }
}

#[derive(Debug)]
pub enum Decomposition {
    Primitive(Fault),
    Extension(ModelExtension),
}

fn content_tokens(trace: &ParseTrace) -> impl Iterator<Item = &Token> {
    trace.tokens.iter().filter(|t| t.is_content())
}

/// Words with no semtrans at all: each gets a semtrans-set pair whose
/// completeness is contradicted outright, so the fault follows with no
/// questions.
pub fn trigger_no_known_semtrans(
    trace: &ParseTrace,
    model: &mut DiagnosisModel,
    kb: &KnowledgeBase,
) -> Result<Vec<(NodeId, Fault)>, GdeError> {
    let mut installed = Vec::new();
    for t in content_tokens(trace) {
        let root = t.root.as_deref().unwrap_or_default();
        if kb.has_any_semtrans(root) || model.pair(&format!("semtrans:{root}")).is_some() {
            continue;
        }
        let pair = model
            .add_pair(&format!("semtrans:{root}"), PairReferent::SemtransSet { word: root.to_string() })
            .map_err(|e| match e {
                crate::modelgen::ModelError::Tms(t) => GdeError::Tms(t),
                crate::modelgen::ModelError::Gde(g) => g,
                other => unreachable!("adding a pair cannot fail with {other}"),
            })?;
        model.forbid(&[pair.complete], "no-known-semtrans").map_err(|e| match e {
            crate::modelgen::ModelError::Tms(t) => GdeError::Tms(t),
            other => unreachable!("forbidding cannot fail with {other}"),
        })?;
        installed.push((pair.complete, root.to_string(), t.surface.clone()));
    }
    if installed.is_empty() {
        return Ok(vec![]);
    }
    let own: Vec<NodeId> = installed.iter().map(|(n, _, _)| *n).collect();
    let conflicts: Vec<_> = project_conflicts(&model.tms, &model.defaults(), &model.measured())
        .into_iter()
        .filter(|c| c.0.iter().all(|m| own.contains(m)))
        .collect();
    let diagnoses = minimal_diagnoses(&conflicts);
    let faulted: BTreeSet<NodeId> = diagnoses.first().map(|d| d.0.clone()).unwrap_or_default();
    Ok(installed
        .into_iter()
        .filter(|(n, _, _)| faulted.contains(n))
        .map(|(n, root, surface)| {
            (
                n,
                Fault::missing_semtrans(
                    &root,
                    vec![format!("token \"{surface}\": the knowledge base has no semtrans for \"{root}\"")],
                ),
            )
        })
        .collect())
}

/// A faulted word choice set: with no recoverable drops the word is missing
/// a sense; otherwise the dropped senses come back as an extension.
pub fn decompose_no_acceptable_semtrans(
    token: &Token,
    trace: &ParseTrace,
    model: &mut DiagnosisModel,
    kb: &KnowledgeBase,
    warnings: &mut Vec<String>,
) -> Result<Decomposition, crate::modelgen::ModelError> {
    let root = token.root.clone().unwrap_or_else(|| token.surface.clone());
    let drops: Vec<&DroppedCandidate> = trace
        .dropped_for_token(token.index)
        .filter(|d| matches!(d.stage, DropStage::Valence | DropStage::Typecheck))
        .collect();
    if drops.is_empty() {
        let members = trace.set_for_token(token.index).map(|s| s.choices.join(", ")).unwrap_or_default();
        let mut evidence = vec![format!("choice set for \"{}\": no acceptable sense among [{members}]", token.surface)];
        evidence.extend(
            trace
                .dropped_for_token(token.index)
                .map(|d| format!("dropped {} at {} stage: {}", d.candidate, d.stage, d.reason)),
        );
        return Ok(Decomposition::Primitive(Fault::missing_semtrans(&root, evidence)));
    }
    let semtrans_pair =
        model.add_pair(&format!("semtrans:{root}"), PairReferent::SemtransSet { word: root.clone() })?;
    let var = token.var.clone().unwrap_or_default();
    let mut recovered = Vec::new();
    for d in drops {
        let Some(s) = kb.semtrans(&d.candidate) else { continue };
        let element = format!("recovered:{var}:{}", s.concept);
        let el = model.add_element(&element, ElementKind::RecoveredSense)?.clone();
        let (id, referent) = match d.stage {
            DropStage::Valence => (
                format!("valence:{}", s.id),
                PairReferent::ValencePatterns { semtrans: s.id.clone(), concept: s.concept.clone() },
            ),
            _ => (
                format!("types:{}", s.id),
                PairReferent::TypeConstraints { semtrans: s.id.clone(), concept: s.concept.clone() },
            ),
        };
        let pair = model.add_pair(&id, referent)?;
        // an acceptable recovered sense means the knowledge that dropped it
        // is incomplete; an unacceptable one means it was right to
        model.forbid(&[el.acceptable, pair.complete], "recovered-sense-acceptable")?;
        model.forbid(&[el.unacceptable, pair.incomplete], "recovered-sense-unacceptable")?;
        model.forbid(&[el.acceptable, semtrans_pair.incomplete], "acceptable-recovered-sense")?;
        recovered.push(RecoveredSense {
            element,
            dropped: d.clone(),
            concept: s.concept.clone(),
            gloss: sense_gloss(kb, &s.id, &s.concept, warnings),
            pair,
        });
    }
    let existing: Vec<String> = trace.set_for_token(token.index).map(|s| s.choices.clone()).unwrap_or_default();
    let mut all_bad = vec![semtrans_pair.complete];
    for c in &existing {
        let Some(e) = model.element(&crate::modelgen::choice_element(c)).cloned() else { continue };
        all_bad.push(e.unacceptable);
        model.forbid(&[e.acceptable, semtrans_pair.incomplete], "acceptable-known-sense")?;
    }
    for r in &recovered {
        if let Some(e) = model.element(&r.element) {
            all_bad.push(e.unacceptable);
        }
    }
    model.forbid(&all_bad, "complete-semtrans-set-without-acceptable-sense")?;
    Ok(Decomposition::Extension(ModelExtension {
        token: token.index,
        surface: token.surface.clone(),
        word: root,
        semtrans_pair,
        recovered,
    }))
}

/// A recovered sense the user accepted: the semtrans lacks a valence
/// pattern for the roles the grammar bound.
pub fn decompose_missing_valence(recovered: &RecoveredSense) -> Fault {
    let roles: Vec<String> = recovered.dropped.bound_roles().map(|b| b.keys().cloned().collect()).unwrap_or_default();
    let mut evidence = vec![format!(
        "{} dropped at {} stage: {}",
        recovered.dropped.candidate, recovered.dropped.stage, recovered.dropped.reason
    )];
    if let Some(b) = recovered.dropped.bound_roles() {
        for (role, f) in b {
            evidence.push(format!("{role} bound to \"{}\" by rule {}", f.surface, f.rule));
        }
    }
    evidence.push(format!("user accepted \"{}\"", recovered.gloss));
    Fault::missing_valence(&recovered.dropped.candidate, &recovered.concept, roles, evidence)
}

#[derive(Debug, Clone)]
enum Phase {
    Top,
    Extension(ModelExtension),
    Decompose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineState {
    AwaitingAnswer,
    Decomposing,
    Done,
    Error,
}

pub enum Step<'a> {
    Ask(&'a Question),
    Done(&'a DiagnosisReport),
    Failed(&'a str),
}

struct Pending {
    question: Question,
    survivors: Vec<Diagnosis>,
}

/// Resumable diagnosis session: call [`Diagnoser::advance`] to get the
/// next question (or the final report) and [`Diagnoser::answer`] to supply
/// an answer.
pub struct Diagnoser {
    kb: KnowledgeBase,
    trace: ParseTrace,
    model: Option<DiagnosisModel>,
    phase: Phase,
    established: Vec<NodeId>,
    queue: VecDeque<NodeId>,
    faults: Vec<Fault>,
    transcript: Vec<TranscriptEntry>,
    warnings: Vec<String>,
    pending: Option<Pending>,
    report: Option<DiagnosisReport>,
    error: Option<String>,
    fault_cap: usize,
}

impl Diagnoser {
    pub fn start(sentence: &str, kb: KnowledgeBase) -> Diagnoser {
        let trace = parse(sentence, &kb);
        let mut d = Diagnoser {
            kb,
            trace,
            model: None,
            phase: Phase::Top,
            established: vec![],
            queue: VecDeque::new(),
            faults: vec![],
            transcript: vec![],
            warnings: vec![],
            pending: None,
            report: None,
            error: None,
            fault_cap: DEFAULT_FAULT_CAP,
        };
        if d.trace.fragmented {
            d.faults = fragment_faults(&d.trace);
            d.finish();
            return d;
        }
        match build_model(&d.trace) {
            Ok(m) => d.model = Some(m),
            Err(e) => {
                d.error = Some(e.to_string());
                return d;
            }
        }
        let model = d.model.as_mut().expect("just built");
        match trigger_no_known_semtrans(&d.trace, model, &d.kb) {
            Ok(faults) if !faults.is_empty() => {
                for (node, f) in faults {
                    d.established.push(node);
                    d.faults.push(f);
                }
                d.finish();
            }
            Ok(_) => {}
            Err(e) => d.error = Some(e.to_string()),
        }
        d
    }

    pub fn trace(&self) -> &ParseTrace {
        &self.trace
    }

    pub fn model(&self) -> Option<&DiagnosisModel> {
        self.model.as_ref()
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Index the next answer must carry.
    pub fn question_index(&self) -> usize {
        self.transcript.len()
    }

    pub fn pending(&self) -> Option<&Question> {
        self.pending.as_ref().map(|p| &p.question)
    }

    pub fn report(&self) -> Option<&DiagnosisReport> {
        self.report.as_ref()
    }

    pub fn state(&self) -> EngineState {
        if self.error.is_some() {
            EngineState::Error
        } else if self.report.is_some() {
            EngineState::Done
        } else if self.pending.is_some() {
            EngineState::AwaitingAnswer
        } else {
            EngineState::Decomposing
        }
    }

    /// Runs until a question needs answering or the diagnosis is complete.
    pub fn advance(&mut self) -> Step<'_> {
        // every pass either asks, finishes, or consumes a queued fault or
        // a phase, so this bound is never reached in practice
        for _ in 0..10_000 {
            if self.error.is_some() || self.report.is_some() || self.pending.is_some() {
                break;
            }
            if let Err(e) = self.step() {
                self.error = Some(e);
            }
        }
        if self.error.is_none() && self.pending.is_none() && self.report.is_none() {
            self.error = Some("diagnosis did not terminate".into());
        }
        if let Some(e) = &self.error {
            return Step::Failed(e);
        }
        if let Some(p) = &self.pending {
            return Step::Ask(&p.question);
        }
        Step::Done(self.report.as_ref().expect("checked above"))
    }

    fn space(&self) -> HypothesisSpace {
        let model = self.model.as_ref().expect("model present while diagnosing");
        HypothesisSpace {
            pairs: model.default_pairs(),
            base: model.measured(),
            established: self.established.iter().copied().collect(),
        }
    }

    fn step(&mut self) -> Result<(), String> {
        match self.phase.clone() {
            Phase::Top | Phase::Extension(_) => self.inner_loop(),
            Phase::Decompose => self.decompose_next(),
        }
    }

    fn focus(&self) -> (Vec<NodeId>, bool) {
        let model = self.model.as_ref().expect("model present");
        match &self.phase {
            Phase::Top => (
                model
                    .pairs
                    .iter()
                    .filter(|p| matches!(p.referent, PairReferent::ChoiceSet { .. }))
                    .map(|p| p.complete)
                    .collect(),
                true,
            ),
            Phase::Extension(ext) => (ext.focus(), false),
            Phase::Decompose => (vec![], true),
        }
    }

    fn inner_loop(&mut self) -> Result<(), String> {
        let (focus, allow_none) = self.focus();
        let space = self.space();
        let model = self.model.as_mut().expect("model present");
        let conflicts = project_conflicts(&model.tms, &model.defaults(), &space.base);
        let survivors = match surviving_diagnoses(&model.tms, &space, &focus, allow_none, &conflicts, self.fault_cap) {
            Ok(s) => s,
            Err(GdeError::TooManyFaults { cap }) => {
                self.faults.push(Fault::unresolved(
                    &format!("too many simultaneous faults (more than {cap})"),
                    None,
                    conflicts.iter().map(|c| format!("conflict {:?}", c.0)).collect(),
                ));
                self.finish();
                return Ok(());
            }
            Err(e) => return Err(e.to_string()),
        };
        let (mut questions, warnings) = generate_questions(model, &self.trace, &self.kb);
        for w in warnings {
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
        if let Phase::Extension(ext) = &self.phase {
            questions.extend(ext.questions());
        }
        questions.sort_by(|a, b| a.id.cmp(&b.id));
        let mut candidates = Vec::with_capacity(questions.len());
        for q in &questions {
            candidates.push(candidate(model, q).map_err(|e| e.to_string())?);
        }
        // judgment nodes may have been installed; refresh the base
        let space = HypothesisSpace { base: model.measured(), ..space };
        match select_measurement(&model.tms, &space, &candidates, &survivors) {
            Some(sel) => {
                self.pending = Some(Pending { question: questions[sel.index].clone(), survivors });
                Ok(())
            }
            None => {
                self.conclude(survivors);
                Ok(())
            }
        }
    }

    fn describe(&self, d: &Diagnosis) -> String {
        let model = self.model.as_ref().expect("model present");
        if d.is_empty() {
            return "no fault".into();
        }
        d.faults()
            .filter_map(|n| model.pair_by_complete(n))
            .map(|p| p.referent.to_string())
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn conclude(&mut self, survivors: Vec<Diagnosis>) {
        let phase = std::mem::replace(&mut self.phase, Phase::Decompose);
        match phase {
            Phase::Top => {
                if survivors.iter().any(Diagnosis::is_empty) {
                    self.finish();
                } else if survivors.len() == 1 {
                    let mut faults: Vec<NodeId> = survivors[0].faults().collect();
                    let model = self.model.as_ref().expect("model present");
                    faults.sort_by_key(|n| model.pair_index(*n));
                    self.established.extend(faults.iter().copied());
                    self.queue.extend(faults);
                } else {
                    let note = if survivors.is_empty() {
                        "the answers are inconsistent with every hypothesis".to_string()
                    } else {
                        "several diagnoses remain and no question separates them".to_string()
                    };
                    let evidence = survivors.iter().map(|d| format!("candidate: {}", self.describe(d))).collect();
                    self.faults.push(Fault::unresolved(&note, None, evidence));
                    self.finish();
                }
            }
            Phase::Extension(ext) => self.resolve_extension(&ext, survivors),
            Phase::Decompose => {}
        }
    }

    fn resolve_extension(&mut self, ext: &ModelExtension, survivors: Vec<Diagnosis>) {
        if survivors.len() != 1 {
            if survivors.is_empty() {
                self.established.push(ext.semtrans_pair.complete);
                self.faults.push(Fault::missing_semtrans(
                    &ext.word,
                    vec![format!("no recovered sense of \"{}\" is consistent with the answers", ext.surface)],
                ));
            } else {
                let evidence = survivors.iter().map(|d| format!("candidate: {}", self.describe(d))).collect();
                self.faults.push(Fault::unresolved(
                    &format!("could not tell which knowledge about \"{}\" is missing", ext.word),
                    None,
                    evidence,
                ));
            }
            return;
        }
        let mut faults: Vec<NodeId> = survivors[0].faults().collect();
        let model = self.model.as_ref().expect("model present");
        faults.sort_by_key(|n| model.pair_index(*n));
        for f in faults {
            self.established.push(f);
            if f == ext.semtrans_pair.complete {
                let mut evidence = vec![format!("no known sense of \"{}\" is acceptable", ext.surface)];
                evidence.extend(ext.recovered.iter().map(|r| format!("user rejected recovered sense \"{}\"", r.gloss)));
                self.faults.push(Fault::missing_semtrans(&ext.word, evidence));
            } else if let Some(r) = ext.recovered.iter().find(|r| r.pair.complete == f) {
                match r.dropped.stage {
                    DropStage::Valence => self.faults.push(decompose_missing_valence(r)),
                    _ => self.faults.push(Fault::unresolved(
                        &format!("type checking ruled out {} for \"{}\"", r.concept, ext.surface),
                        Some("C1/D1"),
                        vec![
                            format!(
                                "{} dropped at {} stage: {}",
                                r.dropped.candidate, r.dropped.stage, r.dropped.reason
                            ),
                            format!("user accepted \"{}\"", r.gloss),
                        ],
                    )),
                }
            }
        }
    }

    fn decompose_next(&mut self) -> Result<(), String> {
        let Some(node) = self.queue.pop_front() else {
            self.finish();
            return Ok(());
        };
        let model = self.model.as_mut().expect("model present");
        let Some(pair) = model.pair_by_complete(node).cloned() else {
            return Ok(());
        };
        match &pair.referent {
            PairReferent::ChoiceSet { root: None, .. } => {
                let trees = self.trace.choice_sets[0].choices.join(", ");
                self.faults.push(Fault::unresolved_grammar(vec![format!("no acceptable parse tree among [{trees}]")]));
            }
            PairReferent::ChoiceSet { set, .. } => {
                let token = match &self.trace.choice_sets[*set].target {
                    crate::parsekit::ChoiceTarget::Word { token, .. } => self.trace.tokens[*token].clone(),
                    crate::parsekit::ChoiceTarget::ParseTrees => unreachable!("handled above"),
                };
                match decompose_no_acceptable_semtrans(&token, &self.trace, model, &self.kb, &mut self.warnings)
                    .map_err(|e| e.to_string())?
                {
                    Decomposition::Primitive(f) => self.faults.push(f),
                    Decomposition::Extension(ext) => self.phase = Phase::Extension(ext),
                }
            }
            other => self.faults.push(Fault::unresolved(
                &format!("{other} is incomplete"),
                None,
                vec![pair.referent.complete_statement()],
            )),
        }
        Ok(())
    }

    fn faulted_assumptions(&self) -> Vec<String> {
        let Some(model) = &self.model else { return vec![] };
        let mut nodes = self.established.clone();
        nodes.sort_by_key(|n| model.pair_index(*n));
        nodes.dedup();
        nodes.into_iter().filter_map(|n| model.pair_by_complete(n)).map(|p| p.referent.complete_statement()).collect()
    }

    fn build_report(&self, status: ReportStatus) -> DiagnosisReport {
        let faulted = self.faulted_assumptions();
        DiagnosisReport {
            sentence: self.trace.sentence.clone(),
            kb: self.kb.name.clone(),
            status,
            fragmented: self.trace.fragmented,
            faults: self.faults.clone(),
            transcript_text: render_transcript(
                &self.transcript,
                (status != ReportStatus::Partial).then_some(faulted.as_slice()),
            ),
            faulted_assumptions: faulted,
            transcript: self.transcript.clone(),
            question_count: self.transcript.len(),
            model_stats: self.model.as_ref().map(DiagnosisModel::stats),
            warnings: self.warnings.clone(),
            error: self.error.clone(),
        }
    }

    fn finish(&mut self) {
        let status = if self.faults.is_empty() { ReportStatus::NoError } else { ReportStatus::Faults };
        self.pending = None;
        self.report = Some(self.build_report(status));
    }

    /// The final report, or a partial one for a session that has not
    /// finished.
    pub fn snapshot(&self) -> DiagnosisReport {
        match &self.report {
            Some(r) => r.clone(),
            None => self.build_report(ReportStatus::Partial),
        }
    }

    /// Validates and applies an answer to the pending question.
    pub fn answer(&mut self, text: &str) -> Result<&TranscriptEntry, AnswerError> {
        let pending = self.pending.as_ref().ok_or(AnswerError::NoPendingQuestion)?;
        let answer = Answer::parse(text, &pending.question)?;
        let judgments = ingest_answer(&pending.question, &answer)?;
        let model = self.model.as_mut().expect("questions imply a model");
        for j in &judgments {
            if let Some(prev) = model.measurements.verdict_of(&j.element) {
                if prev != j.verdict {
                    return Err(AnswerError::Contradictory(format!("{} was already judged {prev}", j.element)));
                }
            }
        }
        let mut probes = Vec::new();
        for j in &judgments {
            probes.push(model.probe(&j.element, j.verdict).map_err(|e| AnswerError::Contradictory(e.to_string()))?);
        }
        let pending = self.pending.take().expect("checked above");
        let space = self.space();
        let entailed = probes_entailed(self.model.as_ref().expect("model"), &space, &probes, &pending.survivors);
        let model = self.model.as_mut().expect("model");
        for j in &judgments {
            model.record_judgment(j).map_err(|e| AnswerError::Contradictory(e.to_string()))?;
        }
        self.transcript.push(TranscriptEntry {
            index: self.transcript.len(),
            question: pending.question,
            answer: answer.render(),
            judgments,
            entailed,
        });
        Ok(self.transcript.last().expect("just pushed"))
    }
}

fn probes_entailed(model: &DiagnosisModel, space: &HypothesisSpace, probes: &[Probe], survivors: &[Diagnosis]) -> bool {
    probes.iter().all(|p| {
        space.base.contains(&p.judgment)
            || survivors.iter().all(|d| model.tms.holds_in(p.target, &space.environment(d, &[])).unwrap_or(false))
    })
}

/// The judgments each possible answer to `q` would install.
fn candidate(model: &mut DiagnosisModel, q: &Question) -> Result<MeasurementCandidate, crate::modelgen::ModelError> {
    let mut outcomes = Vec::new();
    for a in q.possible_answers() {
        let judgments = ingest_answer(q, &a).expect("enumerated answers are valid");
        let mut probes = Vec::with_capacity(judgments.len());
        for j in judgments {
            probes.push(model.probe(&j.element, j.verdict)?);
        }
        outcomes.push(probes);
    }
    Ok(MeasurementCandidate { id: q.id.clone(), outcomes })
}

fn fragment_faults(trace: &ParseTrace) -> Vec<Fault> {
    let unknown = trace.unknown_tokens();
    if unknown.is_empty() {
        vec![Fault::unresolved_grammar(vec![format!(
            "no complete sentence constituent spans \"{}\"",
            trace.sentence.trim()
        )])]
    } else {
        unknown.iter().map(|t| Fault::missing_lexicon(&t.surface)).collect()
    }
}

/// Runs the full outer loop against `user`.
pub fn outer_loop(
    sentence: &str,
    kb: &KnowledgeBase,
    user: &mut dyn crate::session::UserAgent,
) -> Result<DiagnosisReport, crate::session::SessionError> {
    crate::session::run_session(sentence, kb, user)
}
