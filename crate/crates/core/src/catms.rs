//! Compressed assumption-based truth maintenance.
//!
//! Labels are ordinary ATMS labels (minimal, consistent sets of environments)
//! except that propagation stops at assumption nodes: an assumption's label is
//! always the singleton environment containing itself. Justifications whose
//! consequent is an assumption are kept and expanded at query time by
//! [`Tms::holds_in`], which computes the set of assumptions derivable from a
//! query environment as a least fixpoint.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct JustificationId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Ordinary,
    Assumption,
    Contradiction,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Ordinary => "ordinary",
            NodeKind::Assumption => "assumption",
            NodeKind::Contradiction => "contradiction",
        })
    }
}

/// A sorted, duplicate-free set of assumption ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Environment(Vec<NodeId>);

impl Environment {
    pub fn empty() -> Self {
        Environment(Vec::new())
    }

    pub fn new(ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut v: Vec<NodeId> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Environment(v)
    }

    pub fn singleton(id: NodeId) -> Self {
        Environment(vec![id])
    }

    pub fn assumptions(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    /// True when `self ⊆ other`, i.e. `self` subsumes `other`.
    pub fn subsumes(&self, other: &Environment) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for a in &self.0 {
            for b in it.by_ref() {
                if b == a {
                    continue 'outer;
                }
                if b > a {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Environment) -> Environment {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Environment(out)
    }

    pub fn with(&self, id: NodeId) -> Environment {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&id) {
            v.insert(pos, id);
        }
        Environment(v)
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write!(f, "{}", a.0)?;
        }
        f.write_char('}')
    }
}

impl FromIterator<NodeId> for Environment {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        Environment::new(iter)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Node {
    pub id: NodeId,
    pub datum: String,
    pub kind: NodeKind,
    pub label: Vec<Environment>,
    /// Incoming justifications.
    pub justifications: Vec<JustificationId>,
    #[serde(skip)]
    consequences: Vec<JustificationId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Justification {
    pub id: JustificationId,
    pub informant: String,
    pub antecedents: Vec<NodeId>,
    pub consequent: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmsError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("justification `{informant}` for {consequent} would close a cycle through ordinary nodes")]
    Cycle { informant: String, consequent: NodeId },
    #[error("{0} is not an assumption")]
    NotAssumption(NodeId),
}

/// Minimal set of environments known to entail a contradiction.
#[derive(Debug, Clone, Default, Serialize)]
#[serde(transparent)]
pub struct NogoodStore {
    nogoods: Vec<Environment>,
}

impl NogoodStore {
    pub fn iter(&self) -> impl Iterator<Item = &Environment> {
        self.nogoods.iter()
    }

    pub fn len(&self) -> usize {
        self.nogoods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nogoods.is_empty()
    }

    /// True when `env` is a superset of some stored nogood.
    pub fn covers(&self, env: &Environment) -> bool {
        self.nogoods.iter().any(|n| n.subsumes(env))
    }

    /// Returns false when an existing nogood already subsumes `env`.
    fn insert(&mut self, env: Environment) -> bool {
        if self.covers(&env) {
            return false;
        }
        self.nogoods.retain(|n| !env.subsumes(n));
        self.nogoods.push(env);
        self.nogoods.sort_by(env_order);
        true
    }
}

/// Assumptions derivable from a query environment.
#[derive(Debug)]
struct Closure {
    derived: Vec<bool>,
}

impl Closure {
    fn has(&self, id: NodeId) -> bool {
        self.derived.get(id.index()).copied().unwrap_or(false)
    }

    fn covers(&self, env: &Environment) -> bool {
        env.0.iter().all(|a| self.has(*a))
    }
}

/// A justification to re-run, optionally restricted to the environments
/// newly added to one antecedent.
type Pending = (JustificationId, Option<(NodeId, Vec<Environment>)>);

#[derive(Debug, Default)]
pub struct Tms {
    nodes: Vec<Node>,
    justifications: Vec<Justification>,
    nogoods: NogoodStore,
    closures: RefCell<HashMap<Environment, Arc<Closure>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TmsStats {
    pub nodes: usize,
    pub assumptions: usize,
    pub justifications: usize,
    pub nogoods: usize,
}

impl Tms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_node(&mut self, datum: impl Into<String>, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let label = match kind {
            NodeKind::Assumption => vec![Environment::singleton(id)],
            _ => Vec::new(),
        };
        self.nodes.push(Node {
            id,
            datum: datum.into(),
            kind,
            label,
            justifications: Vec::new(),
            consequences: Vec::new(),
        });
        self.invalidate();
        id
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, TmsError> {
        self.nodes.get(id.index()).ok_or(TmsError::UnknownNode(id))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn justifications(&self) -> &[Justification] {
        &self.justifications
    }

    pub fn justification(&self, id: JustificationId) -> &Justification {
        &self.justifications[id.0 as usize]
    }

    pub fn label(&self, id: NodeId) -> &[Environment] {
        &self.nodes[id.index()].label
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn nogoods(&self) -> &NogoodStore {
        &self.nogoods
    }

    pub fn stats(&self) -> TmsStats {
        TmsStats {
            nodes: self.nodes.len(),
            assumptions: self.nodes.iter().filter(|n| n.kind == NodeKind::Assumption).count(),
            justifications: self.justifications.len(),
            nogoods: self.nogoods.len(),
        }
    }

    fn check(&self, id: NodeId) -> Result<(), TmsError> {
        self.node(id).map(|_| ())
    }

    fn invalidate(&self) {
        self.closures.borrow_mut().clear();
    }

    pub fn add_justification(
        &mut self,
        antecedents: &[NodeId],
        consequent: NodeId,
        informant: impl Into<String>,
    ) -> Result<JustificationId, TmsError> {
        let informant = informant.into();
        self.check(consequent)?;
        for a in antecedents {
            self.check(*a)?;
        }
        if self.kind(consequent) != NodeKind::Assumption && self.closes_cycle(antecedents, consequent) {
            return Err(TmsError::Cycle { informant, consequent });
        }

        let id = JustificationId(self.justifications.len() as u32);
        self.justifications.push(Justification { id, informant, antecedents: antecedents.to_vec(), consequent });
        self.nodes[consequent.index()].justifications.push(id);
        let mut seen = Vec::with_capacity(antecedents.len());
        for a in antecedents {
            if !seen.contains(a) {
                seen.push(*a);
                self.nodes[a.index()].consequences.push(id);
            }
        }
        self.invalidate();
        self.propagate(VecDeque::from([(id, None)]));
        Ok(id)
    }

    /// Forward reachability from `consequent` through non-assumption
    /// consequents; reaching any antecedent means the new edge closes a loop.
    fn closes_cycle(&self, antecedents: &[NodeId], consequent: NodeId) -> bool {
        if antecedents.contains(&consequent) {
            return true;
        }
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = vec![consequent];
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut visited[n.index()], true) {
                continue;
            }
            for j in &self.nodes[n.index()].consequences {
                let next = self.justifications[j.0 as usize].consequent;
                if self.kind(next) == NodeKind::Assumption {
                    continue;
                }
                if antecedents.contains(&next) {
                    return true;
                }
                stack.push(next);
            }
        }
        false
    }

    /// Minimal unions of one environment per antecedent label. When `fresh`
    /// is set, that antecedent contributes only its newly added environments.
    fn combine(&self, antecedents: &[NodeId], fresh: Option<(NodeId, &[Environment])>) -> Vec<Environment> {
        let mut acc = vec![Environment::empty()];
        let mut seen: Vec<NodeId> = Vec::with_capacity(antecedents.len());
        let mut fresh = fresh;
        for a in antecedents {
            if seen.contains(a) {
                continue;
            }
            seen.push(*a);
            let envs: &[Environment] = match fresh {
                Some((n, new)) if n == *a => {
                    fresh = None;
                    new
                }
                _ => &self.nodes[a.index()].label,
            };
            if envs.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::with_capacity(acc.len() * envs.len());
            for e1 in &acc {
                for e2 in envs {
                    let u = e1.union(e2);
                    if !self.nogoods.covers(&u) {
                        next.push(u);
                    }
                }
            }
            acc = minimize(next);
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    fn propagate(&mut self, mut queue: VecDeque<Pending>) {
        while let Some((jid, fresh)) = queue.pop_front() {
            let j = &self.justifications[jid.0 as usize];
            let consequent = j.consequent;
            let kind = self.kind(consequent);
            if kind == NodeKind::Assumption {
                continue;
            }
            let antecedents = j.antecedents.clone();
            let envs = self.combine(&antecedents, fresh.as_ref().map(|(n, e)| (*n, e.as_slice())));
            if envs.is_empty() {
                continue;
            }
            if kind == NodeKind::Contradiction {
                for env in envs {
                    self.add_nogood(env);
                }
                continue;
            }
            let added = self.update_label(consequent, envs);
            if added.is_empty() {
                continue;
            }
            for c in self.nodes[consequent.index()].consequences.clone() {
                queue.push_back((c, Some((consequent, added.clone()))));
            }
        }
    }

    fn update_label(&mut self, id: NodeId, envs: Vec<Environment>) -> Vec<Environment> {
        let node = &mut self.nodes[id.index()];
        let mut added = Vec::new();
        for env in envs {
            if node.label.iter().any(|e| e.subsumes(&env)) {
                continue;
            }
            node.label.retain(|e| !env.subsumes(e));
            added.retain(|e: &Environment| !env.subsumes(e));
            node.label.push(env.clone());
            added.push(env);
        }
        node.label.sort_by(env_order);
        added
    }

    fn add_nogood(&mut self, env: Environment) {
        if !self.nogoods.insert(env.clone()) {
            return;
        }
        for node in &mut self.nodes {
            if node.kind == NodeKind::Ordinary {
                node.label.retain(|e| !env.subsumes(e));
            }
        }
        self.invalidate();
    }

    fn closure(&self, env: &Environment) -> Arc<Closure> {
        if let Some(c) = self.closures.borrow().get(env) {
            return c.clone();
        }
        let mut derived = vec![false; self.nodes.len()];
        for a in env.assumptions() {
            if let Some(slot) = derived.get_mut(a.index()) {
                *slot = self.nodes[a.index()].kind == NodeKind::Assumption;
            }
        }
        let justified: Vec<&Node> =
            self.nodes.iter().filter(|n| n.kind == NodeKind::Assumption && !n.justifications.is_empty()).collect();
        let mut closure = Closure { derived };
        loop {
            let mut changed = false;
            for n in &justified {
                if closure.has(n.id) {
                    continue;
                }
                let fires = n.justifications.iter().any(|j| {
                    self.justifications[j.0 as usize].antecedents.iter().all(|a| self.holds_given(*a, &closure))
                });
                if fires {
                    closure.derived[n.id.index()] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let closure = Arc::new(closure);
        self.closures.borrow_mut().insert(env.clone(), closure.clone());
        closure
    }

    fn holds_given(&self, id: NodeId, closure: &Closure) -> bool {
        let node = &self.nodes[id.index()];
        match node.kind {
            NodeKind::Assumption => closure.has(id),
            _ => node.label.iter().any(|e| closure.covers(e)),
        }
    }

    /// True iff `node` is derivable when exactly the assumptions in `env` are
    /// assumed. Compressed label environments are expanded through the
    /// recorded justifications of their assumptions.
    pub fn holds_in(&self, node: NodeId, env: &Environment) -> Result<bool, TmsError> {
        self.check(node)?;
        for a in env.assumptions() {
            if self.node(*a)?.kind != NodeKind::Assumption {
                return Err(TmsError::NotAssumption(*a));
            }
        }
        let closure = self.closure(env);
        Ok(self.holds_given(node, &closure))
    }

    /// False iff some stored nogood holds in `env` (its members are all in
    /// `env` or derivable from it).
    pub fn env_consistent(&self, env: &Environment) -> bool {
        if self.nogoods.is_empty() {
            return true;
        }
        let closure = self.closure(env);
        !self.nogoods.iter().any(|n| closure.covers(n))
    }

    /// One line per node, then one line per nogood.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let label: Vec<String> = n.label.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "{}\t{}\t{}\t{{{}}}", n.id.0, n.kind, n.datum, label.join(","));
        }
        for g in self.nogoods.iter() {
            let _ = writeln!(out, "nogood\t{g}");
        }
        out
    }
}

/// Smaller environments first, then lexicographic.
pub fn env_order(a: &Environment, b: &Environment) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Drops duplicates and every environment subsumed by another.
pub fn minimize(mut envs: Vec<Environment>) -> Vec<Environment> {
    envs.sort_by(env_order);
    envs.dedup();
    let mut out: Vec<Environment> = Vec::with_capacity(envs.len());
    for e in envs {
        if !out.iter().any(|o| o.subsumes(&e)) {
            out.push(e);
        }
    }
    out
}
