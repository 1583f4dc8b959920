//! Inner-loop diagnosis over the CATMS: conflicts, minimal diagnoses and
//! measurement selection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catms::{Environment, NodeId, NodeKind, Tms, TmsError};

/// Hitting-set search stops at this many simultaneous faults.
pub const DEFAULT_FAULT_CAP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Acceptable,
    Unacceptable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Acceptable => "acceptable",
            Verdict::Unacceptable => "unacceptable",
        })
    }
}

#[derive(Debug, Error)]
pub enum GdeError {
    #[error("element `{element}` was already judged {previous}")]
    ContradictoryJudgment { element: String, previous: Verdict },
    #[error("no diagnosis with at most {cap} simultaneous faults")]
    TooManyFaults { cap: usize },
    #[error(transparent)]
    Tms(#[from] TmsError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefaultAssumption {
    pub node: NodeId,
    pub fault_eligible: bool,
    pub referent: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Conflict(pub BTreeSet<NodeId>);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Diagnosis(pub BTreeSet<NodeId>);

impl Diagnosis {
    pub fn empty() -> Self {
        Diagnosis(BTreeSet::new())
    }

    pub fn single(node: NodeId) -> Self {
        Diagnosis(BTreeSet::from([node]))
    }

    pub fn faults(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn hits(&self, conflict: &Conflict) -> bool {
        conflict.0.iter().any(|c| self.0.contains(c))
    }
}

fn diagnosis_order(a: &Diagnosis, b: &Diagnosis) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Emits the fault-eligible part of every nogood that is built only from
/// fault-eligible defaults and measured (always-true) assumptions. A nogood
/// that mentions a non-eligible default is resolved by retracting that
/// default and so implies no fault.
pub fn project_conflicts(tms: &Tms, defaults: &[DefaultAssumption], measured: &[NodeId]) -> Vec<Conflict> {
    let by_node: BTreeMap<NodeId, bool> = defaults.iter().map(|d| (d.node, d.fault_eligible)).collect();
    let measured: BTreeSet<NodeId> = measured.iter().copied().collect();
    let mut out: Vec<Conflict> = Vec::new();
    'nogoods: for nogood in tms.nogoods().iter() {
        let mut members = BTreeSet::new();
        for a in nogood.assumptions() {
            match by_node.get(a) {
                Some(true) => {
                    members.insert(*a);
                }
                Some(false) => continue 'nogoods,
                None if measured.contains(a) => {}
                None => continue 'nogoods,
            }
        }
        if !members.is_empty() {
            out.push(Conflict(members));
        }
    }
    minimal_conflicts(out)
}

fn minimal_conflicts(mut conflicts: Vec<Conflict>) -> Vec<Conflict> {
    conflicts.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.cmp(b)));
    conflicts.dedup();
    let mut out: Vec<Conflict> = Vec::new();
    for c in conflicts {
        if !out.iter().any(|o| o.0.is_subset(&c.0)) {
            out.push(c);
        }
    }
    out
}

/// All minimal hitting sets of `conflicts`, without a cardinality bound.
pub fn minimal_diagnoses(conflicts: &[Conflict]) -> Vec<Diagnosis> {
    let universe: BTreeSet<NodeId> = conflicts.iter().flat_map(|c| c.0.iter().copied()).collect();
    hitting_sets(conflicts, universe.len())
}

/// Minimal hitting sets with at most `cap` faults. Fails when no hitting set
/// that small exists.
pub fn minimal_diagnoses_bounded(conflicts: &[Conflict], cap: usize) -> Result<Vec<Diagnosis>, GdeError> {
    let found = hitting_sets(conflicts, cap);
    if found.is_empty() {
        Err(GdeError::TooManyFaults { cap })
    } else {
        Ok(found)
    }
}

/// Breadth-first over cardinality: level k extends the non-hitting sets of
/// level k-1 with larger elements, skipping supersets of sets already found.
fn hitting_sets(conflicts: &[Conflict], cap: usize) -> Vec<Diagnosis> {
    if conflicts.is_empty() {
        return vec![Diagnosis::empty()];
    }
    let universe: Vec<NodeId> =
        conflicts.iter().flat_map(|c| c.0.iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let hits_all = |set: &[NodeId]| conflicts.iter().all(|c| set.iter().any(|e| c.0.contains(e)));
    let mut found: Vec<Vec<NodeId>> = Vec::new();
    let mut frontier: Vec<Vec<NodeId>> = vec![Vec::new()];
    for _ in 0..cap.min(universe.len()) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = match set.last() {
                Some(last) => universe.partition_point(|u| u <= last),
                None => 0,
            };
            for e in &universe[start..] {
                let mut cand = set.clone();
                cand.push(*e);
                if found.iter().any(|f| f.iter().all(|x| cand.binary_search(x).is_ok())) {
                    continue;
                }
                if hits_all(&cand) {
                    found.push(cand);
                } else {
                    next.push(cand);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let mut out: Vec<Diagnosis> = found.into_iter().map(|v| Diagnosis(v.into_iter().collect())).collect();
    out.sort_by(diagnosis_order);
    out
}

/// A completeness default and its paired incompleteness default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DefaultPair {
    pub complete: NodeId,
    pub incomplete: NodeId,
}

/// What a diagnosis asserts, as an environment: the always-true base
/// (premises and measurements), plus one default from every pair.
#[derive(Debug, Clone, Default)]
pub struct HypothesisSpace {
    pub pairs: Vec<DefaultPair>,
    pub base: Vec<NodeId>,
    /// Faults already established by earlier rounds.
    pub established: BTreeSet<NodeId>,
}

impl HypothesisSpace {
    pub fn environment(&self, diagnosis: &Diagnosis, extra: &[NodeId]) -> Environment {
        let defaults = self.pairs.iter().map(|p| {
            if diagnosis.0.contains(&p.complete) || self.established.contains(&p.complete) {
                p.incomplete
            } else {
                p.complete
            }
        });
        Environment::new(self.base.iter().copied().chain(defaults).chain(extra.iter().copied()))
    }

    pub fn consistent(&self, tms: &Tms, diagnosis: &Diagnosis, extra: &[NodeId]) -> bool {
        tms.env_consistent(&self.environment(diagnosis, extra))
    }
}

/// The diagnoses still in play for a focus set of completeness defaults.
///
/// With conflicts inside the focus these are the bounded minimal hitting
/// sets. Without any, the hypotheses are "nothing is wrong" (when
/// `allow_none`) and each single focus fault. Either way only hypotheses
/// consistent with the measurements survive.
pub fn surviving_diagnoses(
    tms: &Tms,
    space: &HypothesisSpace,
    focus: &[NodeId],
    allow_none: bool,
    conflicts: &[Conflict],
    cap: usize,
) -> Result<Vec<Diagnosis>, GdeError> {
    let relevant: Vec<Conflict> = conflicts.iter().filter(|c| c.0.iter().all(|m| focus.contains(m))).cloned().collect();
    let candidates = if relevant.is_empty() {
        let mut v = Vec::new();
        if allow_none {
            v.push(Diagnosis::empty());
        }
        let mut singles: Vec<NodeId> = focus.to_vec();
        singles.sort();
        singles.dedup();
        v.extend(singles.into_iter().map(Diagnosis::single));
        v
    } else {
        minimal_diagnoses_bounded(&relevant, cap)?
    };
    Ok(candidates.into_iter().filter(|d| space.consistent(tms, d, &[])).collect())
}

/// One judgment an answer would install: the judgment assumption and the
/// acceptable/unacceptable node it supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub judgment: NodeId,
    pub target: NodeId,
}

/// A question seen from the diagnosis side: each possible answer maps to
/// the judgments it installs.
#[derive(Debug, Clone)]
pub struct MeasurementCandidate {
    pub id: String,
    pub outcomes: Vec<Vec<Probe>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub index: usize,
    /// Surviving diagnoses consistent with each outcome.
    pub cells: Vec<usize>,
    pub worst_cell: usize,
}

/// Partition of `diagnoses` induced by each outcome of `candidate`.
pub fn partition(
    tms: &Tms,
    space: &HypothesisSpace,
    candidate: &MeasurementCandidate,
    diagnoses: &[Diagnosis],
) -> Vec<usize> {
    candidate
        .outcomes
        .iter()
        .map(|probes| {
            let extra: Vec<NodeId> = probes.iter().map(|p| p.judgment).collect();
            diagnoses.iter().filter(|d| space.consistent(tms, d, &extra)).count()
        })
        .collect()
}

fn uninformative_outcome(tms: &Tms, space: &HypothesisSpace, probes: &[Probe], diagnoses: &[Diagnosis]) -> bool {
    probes.iter().all(|p| {
        space.base.contains(&p.judgment)
            || diagnoses.iter().all(|d| tms.holds_in(p.target, &space.environment(d, &[])).unwrap_or(false))
    })
}

/// Picks the candidate whose answers split the surviving diagnoses most
/// evenly (smallest worst-case cell), ties broken by candidate id. Returns
/// `None` when at most one diagnosis survives or nothing is informative.
pub fn select_measurement(
    tms: &Tms,
    space: &HypothesisSpace,
    candidates: &[MeasurementCandidate],
    diagnoses: &[Diagnosis],
) -> Option<Selection> {
    if diagnoses.len() <= 1 {
        return None;
    }
    let mut best: Option<(Selection, &str)> = None;
    for (index, cand) in candidates.iter().enumerate() {
        if cand.outcomes.iter().all(|o| uninformative_outcome(tms, space, o, diagnoses)) {
            continue;
        }
        let cells = partition(tms, space, cand, diagnoses);
        let possible: Vec<usize> = cells.iter().copied().filter(|c| *c > 0).collect();
        if !possible.iter().any(|c| *c < diagnoses.len()) {
            continue;
        }
        let worst_cell = possible.iter().copied().max().unwrap_or(0);
        let better = match &best {
            None => true,
            Some((b, id)) => worst_cell < b.worst_cell || (worst_cell == b.worst_cell && cand.id.as_str() < *id),
        };
        if better {
            best = Some((Selection { index, cells, worst_cell }, cand.id.as_str()));
        }
    }
    best.map(|(s, _)| s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptabilityJudgment {
    pub element: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurementRecord {
    pub judgment: AcceptabilityJudgment,
    pub assumption: NodeId,
}

/// Judgment assumptions installed so far and the ones actually measured.
#[derive(Debug, Clone, Default)]
pub struct Measurements {
    nodes: BTreeMap<(String, Verdict), NodeId>,
    records: Vec<MeasurementRecord>,
}

impl Measurements {
    /// Installs (once) the assumption for judging `element` with `verdict`
    /// and the justification from it to `target`.
    pub fn judgment_node(
        &mut self,
        tms: &mut Tms,
        element: &str,
        target: NodeId,
        verdict: Verdict,
    ) -> Result<NodeId, GdeError> {
        let key = (element.to_string(), verdict);
        if let Some(n) = self.nodes.get(&key) {
            return Ok(*n);
        }
        let node = tms.create_node(format!("judge({element}={verdict})"), NodeKind::Assumption);
        tms.add_justification(&[node], target, "judgment")?;
        self.nodes.insert(key, node);
        Ok(node)
    }

    pub fn record(
        &mut self,
        tms: &mut Tms,
        judgment: &AcceptabilityJudgment,
        target: NodeId,
    ) -> Result<MeasurementRecord, GdeError> {
        if let Some(prev) = self.records.iter().find(|r| r.judgment.element == judgment.element) {
            if prev.judgment.verdict == judgment.verdict {
                return Ok(prev.clone());
            }
            return Err(GdeError::ContradictoryJudgment {
                element: judgment.element.clone(),
                previous: prev.judgment.verdict,
            });
        }
        let assumption = self.judgment_node(tms, &judgment.element, target, judgment.verdict)?;
        let record = MeasurementRecord { judgment: judgment.clone(), assumption };
        self.records.push(record.clone());
        Ok(record)
    }

    /// The judgment assumption for `element` and `verdict`, if installed.
    pub fn installed(&self, element: &str, verdict: Verdict) -> Option<NodeId> {
        self.nodes.get(&(element.to_string(), verdict)).copied()
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn measured(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.records.iter().map(|r| r.assumption)
    }

    pub fn verdict_of(&self, element: &str) -> Option<Verdict> {
        self.records.iter().find(|r| r.judgment.element == element).map(|r| r.judgment.verdict)
    }
}
