//! Questions, answers, user agents, transcripts and reports.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gde::{AcceptabilityJudgment, Verdict};
use crate::modelgen::{choice_element, expression_element, pos_element, DiagnosisModel, ModelStats};
use crate::parsekit::{ChoicePayload, ChoiceTarget, KnowledgeBase, ParseTrace, SemanticExpression};
use crate::strategies::{Diagnoser, Fault, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    MultipleChoice,
    YesNo,
}

/// What an option asks about, in terms a gold interpretation can answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OracleProbe {
    Sense { surface: String, concept: String },
    Pos { surface: String, pos: String },
    Expression { functor: String, args: Vec<String> },
}

/// Selecting the option (or answering yes) judges every target acceptable;
/// leaving it unselected (or answering no) judges them unacceptable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionOption {
    pub label: String,
    pub targets: Vec<String>,
    pub probe: OracleProbe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub kind: QuestionKind,
    pub prompt: String,
    pub options: Vec<QuestionOption>,
    pub allow_none: bool,
}

/// Above this many options only "none", single picks and "all" are
/// considered when scoring a question.
const MAX_ENUMERATED_OPTIONS: usize = 6;

impl Question {
    pub fn instruction(&self) -> String {
        match self.kind {
            QuestionKind::YesNo => "(Please enter \"yes\" or \"no\".)".to_string(),
            QuestionKind::MultipleChoice if self.allow_none => {
                format!("(Please enter a list of numbers between 1 and {}, or \"none\".)", self.options.len())
            }
            QuestionKind::MultipleChoice => {
                format!("(Please enter a list of numbers between 1 and {}.)", self.options.len())
            }
        }
    }

    /// Prompt, numbered options, a blank line and the input instruction.
    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.prompt);
        if self.kind == QuestionKind::MultipleChoice {
            for (i, o) in self.options.iter().enumerate() {
                let _ = writeln!(out, "{}) {}", i + 1, o.label);
            }
        }
        let _ = write!(out, "\n{}\n", self.instruction());
        out
    }

    /// Every answer the question admits, for scoring.
    pub fn possible_answers(&self) -> Vec<Answer> {
        match self.kind {
            QuestionKind::YesNo => vec![Answer::Yes, Answer::No],
            QuestionKind::MultipleChoice => {
                let n = self.options.len();
                let mut out = Vec::new();
                if self.allow_none {
                    out.push(Answer::None);
                }
                if n <= MAX_ENUMERATED_OPTIONS {
                    for mask in 1u32..(1 << n) {
                        let sel = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
                        out.push(Answer::Selection(sel));
                    }
                } else {
                    out.extend((1..=n).map(|i| Answer::Selection(vec![i])));
                    out.push(Answer::Selection((1..=n).collect()));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    /// One-based option indices, ascending.
    Selection(Vec<usize>),
    None,
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnswerError {
    #[error("please answer \"yes\" or \"no\"")]
    ExpectedYesNo,
    #[error("option {index} is out of range (1 to {max})")]
    OutOfRange { index: usize, max: usize },
    #[error("option {0} was given twice")]
    Duplicate(usize),
    #[error("\"none\" is not allowed here")]
    NoneNotAllowed,
    #[error("could not read `{0}` as a list of numbers")]
    Malformed(String),
    #[error("no question is waiting for an answer")]
    NoPendingQuestion,
    #[error("answer contradicts an earlier one: {0}")]
    Contradictory(String),
}

impl Answer {
    /// Reads a typed answer: `yes`/`no`, `none`, or option numbers separated
    /// by spaces or commas.
    pub fn parse(text: &str, question: &Question) -> Result<Answer, AnswerError> {
        let t = text.trim().to_lowercase();
        match question.kind {
            QuestionKind::YesNo => match t.as_str() {
                "yes" | "y" => Ok(Answer::Yes),
                "no" | "n" => Ok(Answer::No),
                _ => Err(AnswerError::ExpectedYesNo),
            },
            QuestionKind::MultipleChoice => {
                if t == "none" {
                    return if question.allow_none { Ok(Answer::None) } else { Err(AnswerError::NoneNotAllowed) };
                }
                let mut sel = Vec::new();
                for part in t.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()) {
                    let i: usize = part.parse().map_err(|_| AnswerError::Malformed(text.trim().to_string()))?;
                    if i == 0 || i > question.options.len() {
                        return Err(AnswerError::OutOfRange { index: i, max: question.options.len() });
                    }
                    if sel.contains(&i) {
                        return Err(AnswerError::Duplicate(i));
                    }
                    sel.push(i);
                }
                if sel.is_empty() {
                    return Err(AnswerError::Malformed(text.trim().to_string()));
                }
                sel.sort_unstable();
                Ok(Answer::Selection(sel))
            }
        }
    }

    /// Canonical echo used in transcripts.
    pub fn render(&self) -> String {
        match self {
            Answer::Selection(s) => s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "),
            Answer::None => "none".into(),
            Answer::Yes => "yes".into(),
            Answer::No => "no".into(),
        }
    }
}

/// Maps an answer onto acceptability judgments through the question's
/// verdict mapping.
pub fn ingest_answer(question: &Question, answer: &Answer) -> Result<Vec<AcceptabilityJudgment>, AnswerError> {
    let selected: Vec<bool> = match (question.kind, answer) {
        (QuestionKind::YesNo, Answer::Yes) => vec![true; question.options.len()],
        (QuestionKind::YesNo, Answer::No) => vec![false; question.options.len()],
        (QuestionKind::YesNo, _) => return Err(AnswerError::ExpectedYesNo),
        (QuestionKind::MultipleChoice, Answer::None) if question.allow_none => vec![false; question.options.len()],
        (QuestionKind::MultipleChoice, Answer::None) => return Err(AnswerError::NoneNotAllowed),
        (QuestionKind::MultipleChoice, Answer::Selection(sel)) => {
            let mut v = vec![false; question.options.len()];
            for i in sel {
                let slot = v
                    .get_mut(i.wrapping_sub(1))
                    .ok_or(AnswerError::OutOfRange { index: *i, max: question.options.len() })?;
                if *slot {
                    return Err(AnswerError::Duplicate(*i));
                }
                *slot = true;
            }
            v
        }
        (QuestionKind::MultipleChoice, _) => {
            return Err(AnswerError::Malformed(answer.render()));
        }
    };
    Ok(question
        .options
        .iter()
        .zip(selected)
        .flat_map(|(o, sel)| {
            let verdict = if sel { Verdict::Acceptable } else { Verdict::Unacceptable };
            o.targets.iter().map(move |t| AcceptabilityJudgment { element: t.clone(), verdict })
        })
        .collect())
}

fn pos_label(pos: &str) -> String {
    pos.replace('_', " ")
}

fn word_class(pos: &str) -> u8 {
    match pos {
        "noun" | "proper_noun" => 0,
        "verb" => 1,
        _ => 2,
    }
}

/// Sort key for questions: parts of speech before meanings, meanings
/// before yes/no confirmations, nouns before verbs, then token order.
pub fn question_id(rank: u8, pos: &str, token: usize, detail: &str) -> String {
    format!("{rank}.{}.{token:03}.{detail}", word_class(pos))
}

pub fn sense_gloss(kb: &KnowledgeBase, semtrans: &str, concept: &str, warnings: &mut Vec<String>) -> String {
    match kb.semtrans(semtrans).and_then(|s| kb.gloss_for(s)) {
        Some(g) => g,
        None => {
            let w = format!("no gloss for concept {concept}; showing the raw symbol");
            if !warnings.contains(&w) {
                warnings.push(w);
            }
            concept.to_string()
        }
    }
}

pub fn confirmation_prompt(surface: &str, gloss: &str) -> String {
    format!("Does \"{surface}\" mean \"{gloss}\" here?")
}

/// Questions about the current model: meaning questions for ambiguous
/// words, confirmations for single-sense words, part-of-speech questions for
/// lexically ambiguous tokens, and yes/no questions on role conjuncts shared
/// by several senses. Also returns gloss warnings.
pub fn generate_questions(
    model: &DiagnosisModel,
    trace: &ParseTrace,
    kb: &KnowledgeBase,
) -> (Vec<Question>, Vec<String>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for t in trace.tokens.iter().filter(|t| t.pos_ambiguous()) {
        if model.element(&pos_element(t.index, &t.pos_options[0])).is_none() {
            continue;
        }
        out.push(Question {
            id: question_id(0, &t.pos_options[0], t.index, &format!("pos.{}", t.surface)),
            kind: QuestionKind::MultipleChoice,
            prompt: format!("What part of speech is \"{}\"?", t.surface),
            options: t
                .pos_options
                .iter()
                .map(|p| QuestionOption {
                    label: pos_label(p),
                    targets: vec![pos_element(t.index, p)],
                    probe: OracleProbe::Pos { surface: t.surface.clone(), pos: p.clone() },
                })
                .collect(),
            allow_none: true,
        });
    }
    for set in &trace.choice_sets {
        let ChoiceTarget::Word { token, surface, .. } = &set.target else { continue };
        let mut options = Vec::new();
        let mut pos = String::new();
        for cid in &set.choices {
            let Some(c) = trace.choice(cid) else { continue };
            let ChoicePayload::Sense { semtrans, concept, .. } = &c.payload else { continue };
            if let Some(s) = kb.semtrans(semtrans) {
                pos = s.pos.clone();
            }
            options.push(QuestionOption {
                label: sense_gloss(kb, semtrans, concept, &mut warnings),
                targets: vec![choice_element(cid)],
                probe: OracleProbe::Sense { surface: surface.clone(), concept: concept.clone() },
            });
        }
        match options.len() {
            0 => {}
            1 => {
                let o = options.remove(0);
                out.push(Question {
                    id: question_id(2, &pos, *token, &format!("confirm.{}", o.targets[0])),
                    kind: QuestionKind::YesNo,
                    prompt: confirmation_prompt(surface, &o.label),
                    options: vec![o],
                    allow_none: false,
                });
            }
            _ => out.push(Question {
                id: question_id(1, &pos, *token, &format!("meaning.{surface}")),
                kind: QuestionKind::MultipleChoice,
                prompt: format!("What does \"{surface}\" mean?"),
                options,
                allow_none: true,
            }),
        }
    }
    let mut sharing: BTreeMap<&SemanticExpression, usize> = BTreeMap::new();
    for c in &trace.choices {
        for e in c.expressions() {
            *sharing.entry(e).or_default() += 1;
        }
    }
    for (expr, n) in sharing {
        if n < 2 || expr.args.len() != 2 {
            continue;
        }
        let Some(template) = kb.ontology.roles.get(&expr.functor).and_then(|r| r.question.as_ref()) else {
            continue;
        };
        let by_var = |v: &str| trace.tokens.iter().find(|t| t.var.as_deref() == Some(v));
        let (Some(event), Some(arg)) = (by_var(&expr.args[0]), by_var(&expr.args[1])) else {
            continue;
        };
        let element = expression_element(expr);
        if model.element(&element).is_none() {
            continue;
        }
        let prompt =
            template.replace("{event}", event.root.as_deref().unwrap_or(&event.surface)).replace("{arg}", &arg.surface);
        out.push(Question {
            id: question_id(3, "verb", event.index, &format!("expr.{expr}")),
            kind: QuestionKind::YesNo,
            prompt,
            options: vec![QuestionOption {
                label: expr.to_string(),
                targets: vec![element],
                probe: OracleProbe::Expression { functor: expr.functor.clone(), args: expr.args.clone() },
            }],
            allow_none: false,
        });
    }
    (out, warnings)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub index: usize,
    pub question: Question,
    pub answer: String,
    pub judgments: Vec<AcceptabilityJudgment>,
    /// Whether every judgment was already measured or entailed under each
    /// surviving diagnosis when the question was asked.
    pub entailed: bool,
}

/// The text rendering of a session: each question with its `> answer`
/// echo, then the faulted-assumption block once the diagnosis is finished.
pub fn render_transcript(entries: &[TranscriptEntry], faulted: Option<&[String]>) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.question.render());
        let _ = write!(out, "> {}\n\n", e.answer);
    }
    let Some(faulted) = faulted else { return out };
    if faulted.is_empty() {
        out.push_str("No assumptions are faulted.\n");
    } else {
        out.push_str("These assumptions are faulted:\n");
        for f in faulted {
            let _ = writeln!(out, "-{f}");
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    NoError,
    Faults,
    /// The session stopped early (agent exhausted or session error).
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosisReport {
    pub sentence: String,
    pub kb: String,
    pub status: ReportStatus,
    pub fragmented: bool,
    pub faults: Vec<Fault>,
    pub faulted_assumptions: Vec<String>,
    pub transcript: Vec<TranscriptEntry>,
    pub transcript_text: String,
    pub question_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_stats: Option<ModelStats>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DiagnosisReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            ReportStatus::NoError => 0,
            ReportStatus::Faults => 1,
            ReportStatus::Partial => 2,
        }
    }

    pub fn taxonomy_ids(&self) -> Vec<&str> {
        self.faults.iter().filter_map(|f| f.taxonomy_id.as_deref()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("the scripted answers ran out")]
    Exhausted,
    #[error("input closed")]
    Closed,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub trait UserAgent {
    fn respond(&mut self, question: &Question) -> Result<String, AgentError>;

    /// Called when an answer fails validation. Returning `true` asks the
    /// same question again; otherwise the session ends with an error.
    fn rejected(&mut self, _error: &AnswerError) -> bool {
        false
    }
}

/// Replays a fixed list of typed answers.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAgent {
    answers: VecDeque<String>,
}

impl ScriptedAgent {
    pub fn new<S: Into<String>>(answers: impl IntoIterator<Item = S>) -> Self {
        ScriptedAgent { answers: answers.into_iter().map(Into::into).collect() }
    }

    /// One answer per non-empty line.
    pub fn from_lines(text: &str) -> Self {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }
}

impl UserAgent for ScriptedAgent {
    fn respond(&mut self, _question: &Question) -> Result<String, AgentError> {
        self.answers.pop_front().ok_or(AgentError::Exhausted)
    }
}

/// The interpretation a cooperative user has in mind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldInterpretation {
    /// Surface form to the concepts it means here.
    #[serde(default)]
    pub senses: BTreeMap<String, Vec<String>>,
    /// Surface form to its part of speech here.
    #[serde(default)]
    pub pos: BTreeMap<String, String>,
    /// Role conjuncts as `[functor, arg, ...]`. When absent every conjunct
    /// is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expressions: Option<Vec<Vec<String>>>,
}

impl GoldInterpretation {
    /// Words the gold does not mention are treated as fine.
    pub fn accepts(&self, probe: &OracleProbe) -> bool {
        match probe {
            OracleProbe::Sense { surface, concept } => self.senses.get(surface).is_none_or(|cs| cs.contains(concept)),
            OracleProbe::Pos { surface, pos } => self.pos.get(surface).is_none_or(|p| p == pos),
            OracleProbe::Expression { functor, args } => self
                .expressions
                .as_ref()
                .is_none_or(|es| es.iter().any(|e| e.first() == Some(functor) && e[1..] == args[..])),
        }
    }
}

/// Answers every question as a pure function of the gold interpretation.
#[derive(Debug, Clone)]
pub struct OracleAgent {
    pub gold: GoldInterpretation,
}

impl OracleAgent {
    pub fn new(gold: GoldInterpretation) -> Self {
        OracleAgent { gold }
    }

    pub fn answer(&self, q: &Question) -> Answer {
        let picks: Vec<usize> =
            q.options.iter().enumerate().filter(|(_, o)| self.gold.accepts(&o.probe)).map(|(i, _)| i + 1).collect();
        match q.kind {
            QuestionKind::YesNo if picks.len() == q.options.len() => Answer::Yes,
            QuestionKind::YesNo => Answer::No,
            QuestionKind::MultipleChoice if picks.is_empty() => Answer::None,
            QuestionKind::MultipleChoice => Answer::Selection(picks),
        }
    }
}

impl UserAgent for OracleAgent {
    fn respond(&mut self, question: &Question) -> Result<String, AgentError> {
        Ok(self.answer(question).render())
    }
}

/// Console agent: prints each question and reads one line per answer,
/// re-prompting on invalid input.
pub struct InteractiveAgent<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> InteractiveAgent<R, W> {
    pub fn new(input: R, output: W) -> Self {
        InteractiveAgent { input, output }
    }
}

impl<R: BufRead, W: Write> UserAgent for InteractiveAgent<R, W> {
    fn respond(&mut self, question: &Question) -> Result<String, AgentError> {
        write!(self.output, "{}> ", question.render())?;
        self.output.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Err(AgentError::Closed);
        }
        writeln!(self.output)?;
        Ok(line.trim().to_string())
    }

    fn rejected(&mut self, error: &AnswerError) -> bool {
        let _ = writeln!(self.output, "{error}\n");
        true
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct SessionError {
    pub message: String,
    pub partial: Box<DiagnosisReport>,
}

/// Parses, diagnoses and asks `user` until the diagnosis is complete.
pub fn run_session(
    sentence: &str,
    kb: &KnowledgeBase,
    user: &mut dyn UserAgent,
) -> Result<DiagnosisReport, SessionError> {
    let mut engine = Diagnoser::start(sentence, kb.clone());
    drive(&mut engine, user)
}

/// Runs an already started engine to completion with `user`.
pub fn drive(engine: &mut Diagnoser, user: &mut dyn UserAgent) -> Result<DiagnosisReport, SessionError> {
    loop {
        let question = match engine.advance() {
            Step::Done(report) => return Ok(report.clone()),
            Step::Failed(message) => {
                let message = message.to_string();
                return Err(SessionError { message, partial: Box::new(engine.snapshot()) });
            }
            Step::Ask(q) => q.clone(),
        };
        let text = user
            .respond(&question)
            .map_err(|e| SessionError { message: e.to_string(), partial: Box::new(engine.snapshot()) })?;
        if let Err(e) = engine.answer(&text) {
            if !user.rejected(&e) {
                return Err(SessionError {
                    message: format!("invalid answer `{text}`: {e}"),
                    partial: Box::new(engine.snapshot()),
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(n: usize) -> Question {
        Question {
            id: "q".into(),
            kind: QuestionKind::MultipleChoice,
            prompt: "What does \"wedge\" mean?".into(),
            options: (0..n)
                .map(|i| QuestionOption {
                    label: format!("option {i}"),
                    targets: vec![format!("choice:{i}")],
                    probe: OracleProbe::Sense { surface: "wedge".into(), concept: format!("C{i}") },
                })
                .collect(),
            allow_none: true,
        }
    }

    #[test]
    fn none_rejects_every_option() {
        let q = mc(2);
        let js = ingest_answer(&q, &Answer::parse("none", &q).unwrap()).unwrap();
        assert_eq!(js.len(), 2);
        assert!(js.iter().all(|j| j.verdict == Verdict::Unacceptable));
    }

    #[test]
    fn selection_splits_verdicts() {
        let q = mc(2);
        let js = ingest_answer(&q, &Answer::parse("2", &q).unwrap()).unwrap();
        assert_eq!(js[0].verdict, Verdict::Unacceptable);
        assert_eq!(js[1].verdict, Verdict::Acceptable);
        assert_eq!(js[1].element, "choice:1");
    }

    #[test]
    fn answer_validation() {
        let q = mc(3);
        assert_eq!(Answer::parse(" 3, 1 ", &q), Ok(Answer::Selection(vec![1, 3])));
        assert_eq!(Answer::parse("4", &q), Err(AnswerError::OutOfRange { index: 4, max: 3 }));
        assert_eq!(Answer::parse("0", &q), Err(AnswerError::OutOfRange { index: 0, max: 3 }));
        assert_eq!(Answer::parse("1 1", &q), Err(AnswerError::Duplicate(1)));
        assert!(matches!(Answer::parse("one", &q), Err(AnswerError::Malformed(_))));
        assert!(matches!(Answer::parse("", &q), Err(AnswerError::Malformed(_))));
        assert_eq!(Answer::parse("yes", &q).unwrap_err(), AnswerError::Malformed("yes".into()));
    }

    #[test]
    fn yes_no_questions() {
        let mut q = mc(1);
        q.kind = QuestionKind::YesNo;
        q.allow_none = false;
        assert_eq!(Answer::parse("Yes", &q), Ok(Answer::Yes));
        assert_eq!(Answer::parse("2", &q), Err(AnswerError::ExpectedYesNo));
        let js = ingest_answer(&q, &Answer::Yes).unwrap();
        assert_eq!(js, vec![AcceptabilityJudgment { element: "choice:0".into(), verdict: Verdict::Acceptable }]);
        assert_eq!(q.instruction(), "(Please enter \"yes\" or \"no\".)");
    }

    #[test]
    fn possible_answers_cover_every_subset() {
        let q = mc(2);
        let all = q.possible_answers();
        assert_eq!(all.len(), 4);
        assert!(all.contains(&Answer::None));
        assert!(all.contains(&Answer::Selection(vec![1, 2])));
    }

    #[test]
    fn render_matches_console_layout() {
        let q = mc(2);
        assert_eq!(
            q.render(),
            "What does \"wedge\" mean?\n1) option 0\n2) option 1\n\n(Please enter a list of numbers between 1 and 2, or \"none\".)\n"
        );
    }

    #[test]
    fn oracle_is_a_function_of_the_gold() {
        let q = mc(3);
        let gold = GoldInterpretation {
            senses: BTreeMap::from([("wedge".to_string(), vec!["C2".to_string()])]),
            ..Default::default()
        };
        let oracle = OracleAgent::new(gold);
        assert_eq!(oracle.answer(&q), Answer::Selection(vec![3]));
        let none = OracleAgent::new(GoldInterpretation {
            senses: BTreeMap::from([("wedge".to_string(), vec![])]),
            ..Default::default()
        });
        assert_eq!(none.answer(&q), Answer::None);
    }

    #[test]
    fn scripted_agent_runs_out() {
        let mut a = ScriptedAgent::from_lines("2\n\nnone\n");
        let q = mc(2);
        assert_eq!(a.respond(&q).unwrap(), "2");
        assert_eq!(a.respond(&q).unwrap(), "none");
        assert!(matches!(a.respond(&q), Err(AgentError::Exhausted)));
    }

    #[test]
    fn interactive_agent_reprompts() {
        let q = mc(2);
        let mut out = Vec::new();
        let mut a = InteractiveAgent::new(&b"7\n2\n"[..], &mut out);
        assert_eq!(a.respond(&q).unwrap(), "7");
        assert!(a.rejected(&AnswerError::OutOfRange { index: 7, max: 2 }));
        assert_eq!(a.respond(&q).unwrap(), "2");
        let shown = String::from_utf8(out).unwrap();
        assert!(shown.contains("option 7 is out of range"));
        assert_eq!(shown.matches("What does").count(), 2);
    }

    #[test]
    fn transcript_footer() {
        assert_eq!(render_transcript(&[], Some(&[])), "No assumptions are faulted.\n");
        assert_eq!(
            render_transcript(&[], Some(&["X is complete.".into()])),
            "These assumptions are faulted:\n-X is complete.\n"
        );
    }
}
