//! The synthetic-error suite: ablate one piece of the demo knowledge,
//! diagnose "Joe ate the apple." with an oracle user, and compare the
//! reported fault with the one the ablation introduced.

use std::time::{Duration, Instant};

use inld_core::parsekit::{Edit, KnowledgeBase};
use inld_core::session::{run_session, GoldInterpretation, OracleAgent};
use serde::Serialize;

pub const TABLE2_SENTENCE: &str = "Joe ate the apple.";

pub struct BenchRow {
    pub edit: &'static str,
    pub expected_id: &'static str,
    pub expected: &'static str,
}

pub const TABLE2: [BenchRow; 3] = [
    BenchRow { edit: "remove_semtrans:apple:Apple", expected_id: "C3", expected: "Missing semtrans for \"apple\"" },
    BenchRow { edit: "remove_semtrans:ate:EatingEvent", expected_id: "C3", expected: "Missing semtrans for \"eat\"" },
    BenchRow {
        edit: "remove_valence_patterns:ate:EatingEvent",
        expected_id: "C2",
        expected: "Missing valence pattern for EatingEvent (roles: object, subject)",
    },
];

pub fn table2_gold() -> GoldInterpretation {
    let mut g = GoldInterpretation::default();
    for (w, c) in [("joe", "MalePerson"), ("ate", "EatingEvent"), ("apple", "Apple")] {
        g.senses.insert(w.into(), vec![c.into()]);
    }
    g
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub edit: String,
    pub expected_id: String,
    pub expected: String,
    pub taxonomy_ids: Vec<String>,
    pub descriptions: Vec<String>,
    pub questions: usize,
    #[serde(serialize_with = "millis")]
    pub elapsed: Duration,
    pub error: Option<String>,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

impl BenchResult {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.taxonomy_ids == [self.expected_id.clone()]
            && self.descriptions == [self.expected.clone()]
    }
}

pub fn run_table2(base: &KnowledgeBase) -> Vec<BenchResult> {
    TABLE2
        .iter()
        .map(|row| {
            let mut result = BenchResult {
                edit: row.edit.into(),
                expected_id: row.expected_id.into(),
                expected: row.expected.into(),
                taxonomy_ids: vec![],
                descriptions: vec![],
                questions: 0,
                elapsed: Duration::ZERO,
                error: None,
            };
            let kb = match row.edit.parse::<Edit>().and_then(|e| base.ablate(&e)) {
                Ok(kb) => kb,
                Err(e) => {
                    result.error = Some(e.to_string());
                    return result;
                }
            };
            let start = Instant::now();
            let outcome = run_session(TABLE2_SENTENCE, &kb, &mut OracleAgent::new(table2_gold()));
            result.elapsed = start.elapsed();
            let report = match outcome {
                Ok(r) => r,
                Err(e) => {
                    result.error = Some(e.message);
                    *e.partial
                }
            };
            result.taxonomy_ids = report.taxonomy_ids().into_iter().map(String::from).collect();
            result.descriptions = report.faults.iter().map(|f| f.description.clone()).collect();
            result.questions = report.question_count;
            result
        })
        .collect()
}

pub fn render_table(results: &[BenchResult]) -> String {
    let mut out =
        format!("{:<42} {:<8} {:<8} {:>9} {:>9}  {}\n", "edit", "expected", "got", "questions", "ms", "result");
    for r in results {
        out.push_str(&format!(
            "{:<42} {:<8} {:<8} {:>9} {:>9.2}  {}\n",
            r.edit,
            r.expected_id,
            if r.taxonomy_ids.is_empty() { "-".to_string() } else { r.taxonomy_ids.join(",") },
            r.questions,
            r.elapsed.as_secs_f64() * 1000.0,
            if r.passed() { "PASS" } else { "FAIL" },
        ));
        if let Some(e) = &r.error {
            out.push_str(&format!("    error: {e}\n"));
        }
    }
    out
}
