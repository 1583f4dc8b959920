mod common;

use common::{describe, economy_kbs, economy_run, joe_ate_the_apple, synthetic_suite, GOLDEN_FIG1};
use inld_core::parsekit::KnowledgeBase;
use inld_core::session::{run_session, GoldInterpretation, OracleAgent, ScriptedAgent};
use inld_core::strategies::FaultKind;

#[test]
fn fig1_transcript_matches_golden_file() {
    let kb = KnowledgeBase::named("demo-missing-sandwich").unwrap();
    let answers = include_str!("fixtures/fig1.answers");
    let r = run_session("Bob ate the wedge.", &kb, &mut ScriptedAgent::from_lines(answers)).unwrap();
    assert_eq!(r.transcript_text, GOLDEN_FIG1);
    assert_eq!(r.faulted_assumptions, vec!["Choice Set #3 (\"wedge\") is complete."]);
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn transcripts_are_deterministic() {
    let kb = KnowledgeBase::named("demo-no-eating-valence").unwrap();
    let runs: Vec<String> = (0..3)
        .map(|_| run_session("Joe ate the apple.", &kb, &mut OracleAgent::new(joe_ate_the_apple())).unwrap().to_json())
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn gold_fixture_parses_and_drives_the_valence_row() {
    let gold: GoldInterpretation = serde_json::from_str(include_str!("fixtures/joe-ate-the-apple.gold.json")).unwrap();
    assert_eq!(gold, joe_ate_the_apple());
    let kb = KnowledgeBase::named("demo-no-eating-valence").unwrap();
    let r = run_session("Joe ate the apple.", &kb, &mut OracleAgent::new(gold)).unwrap();
    let FaultKind::ValenceMissing { roles, .. } = &r.faults[0].kind else { panic!("{}", describe(&r)) };
    assert_eq!(roles.iter().map(String::as_str).collect::<Vec<_>>(), ["object", "subject"]);
}

#[test]
fn every_judgment_traces_to_one_answer() {
    let kb = KnowledgeBase::named("demo-no-eating-valence").unwrap();
    let r = run_session("Joe ate the apple.", &kb, &mut OracleAgent::new(joe_ate_the_apple())).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for e in &r.transcript {
        for j in &e.judgments {
            assert!(seen.insert(j.element.clone()), "{} judged twice", j.element);
        }
    }
}

#[test]
fn synthetic_suite_asks_no_redundant_questions_and_terminates() {
    for kb_name in economy_kbs() {
        let kb = KnowledgeBase::named(kb_name).unwrap();
        for case in synthetic_suite() {
            let (sentence, gold) = (case.sentence, case.gold);
            let run = economy_run(sentence, &kb, &mut OracleAgent::new(gold), 40)
                .unwrap_or_else(|e| panic!("{kb_name} / {sentence}: {e}"));
            assert!(run.redundant.is_empty(), "{kb_name} / {sentence}: {:?}\n{}", run.redundant, describe(&run.report));
        }
    }
}

#[test]
fn clean_sentences_with_gold_readings_report_no_faults() {
    let kb = KnowledgeBase::demo();
    for case in synthetic_suite().into_iter().filter(|c| c.producible) {
        let (sentence, gold) = (case.sentence, case.gold);
        let r = run_session(sentence, &kb, &mut OracleAgent::new(gold)).unwrap();
        assert!(r.faults.is_empty(), "{sentence}: {}", describe(&r));
    }
}
