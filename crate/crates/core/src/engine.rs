//! Explanation-recording propagation and dynamic constraint retraction.
//!
//! Binary constraints are revised AC-3 style. A value `a` of `x` that lost
//! all support in `y` through constraint `c` is removed with the explanation
//! `{c} ∪ main(y≠b)` over every removed value `b` that used to support `a`.
//! Unary constraints and assignments filter directly with `{c}`.
//!
//! Revisions also justify values that are already gone; those secondary
//! explanations go to the store without touching the domain. They are never
//! used to build further explanations.
//!
//! On contradiction the engine freezes: the revisions still pending only
//! record explanations for values already removed, and no further
//! propagation is accepted until a relaxation brings a value back to the
//! empty domain.
//!
//! Arc consistency alone does not decide satisfiability. [`Engine::solve`]
//! completes it with a dynamic-backtracking search in which every choice is
//! an assignment posted as a decision constraint. On failure the newest
//! decision of the conflict is retracted (relaxed) and its value removed with
//! the rest of the conflict as explanation. A conflict without decisions
//! proves the active constraints infeasible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{ConstraintId, ConstraintKind, ConstraintSpec, ModelError, Problem, Relation, VariableId};
use crate::xstore::{Explanation, RemovalKey, Store, StoreError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("engine is in a contradictory state")]
    Contradictory,
    #[error("engine is consistent")]
    Consistent,
    #[error("unknown constraint {0}")]
    UnknownConstraint(ConstraintId),
    #[error("constraint {0} is relaxed")]
    ConstraintRelaxed(ConstraintId),
    #[error("domain of {0} is not empty")]
    DomainNotEmpty(VariableId),
    #[error("no valid explanation stored for removal {0:?}")]
    MissingExplanation(RemovalKey),
    #[error("value {value} is not in the initial domain of {variable}")]
    UnknownValue { variable: VariableId, value: i32 },
    #[error("search gave up after {0} decisions")]
    SearchLimit(usize),
}

/// One value removal emitted by the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovalEvent {
    pub key: RemovalKey,
    pub explanation: Explanation,
    pub cause: ConstraintId,
}

/// Valid explanations for every value of the variable whose domain emptied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContradictionReport {
    pub variable: VariableId,
    pub per_value: Vec<(i32, Vec<Explanation>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Consistent,
    Contradictory(ContradictionReport),
}

impl Status {
    pub fn is_contradictory(&self) -> bool {
        matches!(self, Status::Contradictory(_))
    }

    pub fn contradiction_variable(&self) -> Option<VariableId> {
        match self {
            Status::Consistent => None,
            Status::Contradictory(r) => Some(r.variable),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxOutcome {
    pub constraint: ConstraintId,
    /// Values put back because no valid explanation survived.
    pub restored: Vec<RemovalKey>,
    /// Removals whose main was replaced by another valid explanation.
    pub reassigned: Vec<RemovalKey>,
    /// Number of explanations that fell out of the k-relevant window.
    pub forgotten: usize,
    /// Removals performed by the repropagation that followed.
    pub removed: Vec<RemovalKey>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReactivateOutcome {
    pub constraint: ConstraintId,
    /// Present values that a stored explanation made valid again.
    pub forced: Vec<(RemovalKey, Explanation)>,
    /// Every removal caused by the reactivation, forced ones first.
    pub removed: Vec<RemovalKey>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// One value per variable satisfying every active constraint.
    Solution(BTreeMap<VariableId, i32>),
    /// The empty domain of this variable is justified without decisions.
    Infeasible(VariableId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    pub decisions: usize,
    pub backtracks: usize,
}

/// Default bound on the number of decisions of one search.
pub const SEARCH_LIMIT: usize = 100_000;

#[derive(Clone, Debug)]
pub struct Engine {
    problem: Problem,
    store: Store,
    status: Status,
    trace: Vec<RemovalEvent>,
    /// Set while pending revisions only collect explanations.
    frozen: bool,
}

enum Revision {
    Done,
    Wipeout(VariableId),
}

impl Engine {
    pub fn new(problem: Problem) -> Self {
        let store = Store::new(problem.k());
        Engine {
            problem,
            store,
            status: Status::Consistent,
            trace: Vec::new(),
            frozen: false,
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn is_contradictory(&self) -> bool {
        self.status.is_contradictory()
    }

    /// Every removal event emitted so far, in order.
    pub fn trace(&self) -> &[RemovalEvent] {
        &self.trace
    }

    /// Posts a constraint as active without propagating it.
    pub fn post(&mut self, spec: ConstraintSpec) -> Result<ConstraintId, EngineError> {
        Ok(self.problem.post(spec)?)
    }

    pub fn add(&mut self, name: impl Into<String>, relation: Relation) -> Result<ConstraintId, EngineError> {
        Ok(self.problem.add(name, relation)?)
    }

    /// Runs propagation of every active constraint to a fixpoint.
    pub fn propagate(&mut self) -> Result<&Status, EngineError> {
        if self.is_contradictory() {
            return Err(EngineError::Contradictory);
        }
        self.run_to_fixpoint();
        Ok(&self.status)
    }

    /// Moves `c` to the relaxed set, restores every value left without a
    /// valid explanation and repropagates when the state is consistent.
    pub fn relax(&mut self, c: ConstraintId) -> Result<RelaxOutcome, EngineError> {
        let mut out = self.retract(c)?;
        if !self.is_contradictory() {
            out.removed = self.run_to_fixpoint();
        }
        out.status = self.status.clone();
        Ok(out)
    }

    /// Relaxation bookkeeping without the repropagation.
    fn retract(&mut self, c: ConstraintId) -> Result<RelaxOutcome, EngineError> {
        self.known(c)?;
        let delta = self.store.on_relax(c, &self.problem.config().relaxed)?;
        let config = self.problem.config_mut();
        config.active.remove(&c);
        config.relaxed.insert(c);

        let mut restored = Vec::new();
        for key in delta.emptied {
            if self.problem.domain_mut(key.variable).restore(key.value) {
                restored.push(key);
            }
        }
        if let Status::Contradictory(report) = &self.status {
            let v = report.variable;
            self.status = if self.problem.domain(v).is_empty() {
                Status::Contradictory(self.report(v))
            } else {
                Status::Consistent
            };
        }
        Ok(RelaxOutcome {
            constraint: c,
            restored,
            reassigned: delta.reassigned.into_iter().map(|(k, _)| k).collect(),
            forgotten: delta.forgotten.len(),
            removed: Vec::new(),
            status: self.status.clone(),
        })
    }

    /// Searches for a solution of the active constraints, posting at most
    /// `limit` decisions. Decisions stay posted: active along the solution,
    /// relaxed once retracted.
    pub fn solve(&mut self, limit: usize) -> Result<SolveReport, EngineError> {
        let mut decisions = 0;
        let mut backtracks = 0;
        // only assignments posted by this search are retracted
        let floor = self.problem.next_constraint_id();
        if !self.is_contradictory() {
            self.run_to_fixpoint();
        }
        loop {
            let Some(v) = self.status.contradiction_variable() else {
                let open = self
                    .problem
                    .variables()
                    .iter()
                    .filter(|d| d.size() > 1)
                    .min_by_key(|d| (d.size(), d.variable));
                let Some(d) = open else {
                    let solution = self
                        .problem
                        .variables()
                        .iter()
                        .map(|d| (d.variable, d.present_values().next().expect("non-empty domain")))
                        .collect();
                    return Ok(SolveReport {
                        outcome: SolveOutcome::Solution(solution),
                        decisions,
                        backtracks,
                    });
                };
                if decisions == limit {
                    return Err(EngineError::SearchLimit(limit));
                }
                decisions += 1;
                let (x, a) = (d.variable, d.present_values().next().expect("open domain"));
                let name = format!("{}={}#{}", d.name, a, self.problem.next_constraint_id().0);
                self.problem.add(name, Relation::Assign(x, a))?;
                self.run_to_fixpoint();
                continue;
            };
            let conflict = self.backtrack_conflict(v, floor);
            let d = conflict.iter().filter(|&c| self.is_search_choice(c, floor)).max();
            let Some(d) = d else {
                return Ok(SolveReport {
                    outcome: SolveOutcome::Infeasible(v),
                    decisions,
                    backtracks,
                });
            };
            backtracks += 1;
            let Some(Relation::Assign(x, a)) = self.problem.constraint(d).map(|s| s.relation.clone()) else {
                unreachable!("culprit is an assignment");
            };
            self.retract(d)?;
            let learned = Explanation::new(conflict.iter().filter(|&c| c != d));
            let mut queue = BTreeSet::new();
            if let Revision::Wipeout(w) = self.justify(d, RemovalKey::new(x, a), learned, &mut queue) {
                self.status = Status::Contradictory(self.report(w));
            } else if !self.is_contradictory() {
                self.run_to_fixpoint();
            }
        }
    }

    /// Decides whether the active constraints admit a solution. Infeasibility
    /// is adopted: the engine ends contradictory with every search decision
    /// retracted. When a solution exists the engine is left untouched.
    pub fn check_feasibility(&mut self, limit: usize) -> Result<SolveOutcome, EngineError> {
        let mut trial = self.clone();
        let report = trial.solve(limit)?;
        if let SolveOutcome::Infeasible(_) = report.outcome {
            let decisions: Vec<ConstraintId> = trial
                .problem
                .constraints()
                .filter(|s| {
                    s.decision && trial.problem.config().is_active(s.id) && s.id >= self.problem.next_constraint_id()
                })
                .map(|s| s.id)
                .collect();
            for d in decisions.into_iter().rev() {
                trial.retract(d)?;
            }
            let v = trial.status.contradiction_variable().expect("still contradictory");
            *self = trial;
            return Ok(SolveOutcome::Infeasible(v));
        }
        Ok(report.outcome)
    }

    fn is_search_choice(&self, c: ConstraintId, floor: ConstraintId) -> bool {
        c >= floor
            && self
                .problem
                .constraint(c)
                .is_some_and(|s| s.kind() == ConstraintKind::Assign)
    }

    /// The conflict of the empty domain of `v` that backtracking learns
    /// from: among the enumerated conflicts, the one whose newest decision is
    /// oldest (a decision-free one first), then the smallest.
    fn backtrack_conflict(&self, v: VariableId, floor: ConstraintId) -> Explanation {
        let per_value: Vec<Vec<Explanation>> = self
            .problem
            .domain(v)
            .initial()
            .iter()
            .map(|&a| self.store.valid_explanations(RemovalKey::new(v, a)))
            .collect();
        let combos = crate::conflict::combine(&per_value, crate::conflict::DEFAULT_CAP);
        crate::conflict::minimize(combos.unions)
            .into_iter()
            .min_by_key(|e| (e.iter().filter(|&c| self.is_search_choice(c, floor)).max(), e.len()))
            .unwrap_or_default()
    }

    /// Moves `c` back to the active set. Stored explanations that become
    /// valid remove their (present) values before propagation resumes.
    pub fn reactivate(&mut self, c: ConstraintId) -> Result<ReactivateOutcome, EngineError> {
        if self.problem.constraint(c).is_none() {
            return Err(EngineError::UnknownConstraint(c));
        }
        if !self.problem.config().is_relaxed(c) {
            return Err(StoreError::NotRelaxed(c).into());
        }
        if self.is_contradictory() {
            return Err(EngineError::Contradictory);
        }
        let problem = &self.problem;
        let delta = self.store.on_reactivate(c, &problem.config().relaxed, |key| {
            problem.domain(key.variable).is_present(key.value)
        })?;
        let config = self.problem.config_mut();
        config.relaxed.remove(&c);
        config.active.insert(c);

        let mut removed = Vec::new();
        for (key, e) in &delta.forced {
            self.problem.domain_mut(key.variable).remove(key.value);
            self.store.designate_main(*key, e.clone());
            self.trace.push(RemovalEvent {
                key: *key,
                explanation: e.clone(),
                cause: c,
            });
            removed.push(*key);
        }
        let wiped = self
            .problem
            .variables()
            .iter()
            .find(|d| d.is_empty())
            .map(|d| d.variable);
        match wiped {
            Some(v) => self.status = Status::Contradictory(self.report(v)),
            None => removed.extend(self.run_to_fixpoint()),
        }
        Ok(ReactivateOutcome {
            constraint: c,
            forced: delta.forced,
            removed,
            status: self.status.clone(),
        })
    }

    fn known(&self, c: ConstraintId) -> Result<(), EngineError> {
        if self.problem.constraint(c).is_none() {
            return Err(EngineError::UnknownConstraint(c));
        }
        if self.problem.config().is_relaxed(c) {
            return Err(StoreError::AlreadyRelaxed(c).into());
        }
        Ok(())
    }

    fn report(&self, v: VariableId) -> ContradictionReport {
        let per_value = self
            .problem
            .domain(v)
            .initial()
            .iter()
            .map(|&a| (a, self.store.valid_explanations(RemovalKey::new(v, a))))
            .collect();
        ContradictionReport { variable: v, per_value }
    }

    /// Worklist loop: smallest pending constraint id first. Returns the keys
    /// removed during this run.
    fn run_to_fixpoint(&mut self) -> Vec<RemovalKey> {
        let first = self.trace.len();
        let mut queue: BTreeSet<ConstraintId> = self.problem.config().active.clone();
        while let Some(c) = queue.pop_first() {
            if let Revision::Wipeout(v) = self.revise(c, &mut queue) {
                // domains stay as they are; the pending revisions still
                // justify values that are already gone
                queue.insert(c);
                self.frozen = true;
                while let Some(c) = queue.pop_first() {
                    self.revise(c, &mut queue);
                }
                self.frozen = false;
                self.status = Status::Contradictory(self.report(v));
                break;
            }
        }
        self.trace[first..].iter().map(|e| e.key).collect()
    }

    fn revise(&mut self, c: ConstraintId, queue: &mut BTreeSet<ConstraintId>) -> Revision {
        let relation = self.problem.constraint(c).expect("active constraint").relation.clone();
        match relation {
            Relation::UnaryNeq(v, val) => self.filter_unary(c, v, |a| a != val, queue),
            Relation::Assign(v, val) => self.filter_unary(c, v, |a| a == val, queue),
            Relation::Neq(x, y) | Relation::Gt(x, y) | Relation::Lt(x, y) | Relation::Table(x, y, _) => {
                let holds = |a: i32, b: i32| relation.holds(a, b);
                let (first, second) = if x <= y { (x, y) } else { (y, x) };
                for target in [first, second] {
                    let step = if target == x {
                        self.revise_arc(c, x, y, &holds, queue)
                    } else {
                        self.revise_arc(c, y, x, &|b, a| holds(a, b), queue)
                    };
                    if let Revision::Wipeout(v) = step {
                        return Revision::Wipeout(v);
                    }
                }
                Revision::Done
            }
        }
    }

    fn filter_unary(
        &mut self,
        c: ConstraintId,
        v: VariableId,
        allowed: impl Fn(i32) -> bool,
        queue: &mut BTreeSet<ConstraintId>,
    ) -> Revision {
        let values: Vec<i32> = self.problem.domain(v).initial().to_vec();
        for a in values.into_iter().filter(|&a| !allowed(a)) {
            if let Revision::Wipeout(w) = self.justify(c, RemovalKey::new(v, a), Explanation::new([c]), queue) {
                return Revision::Wipeout(w);
            }
        }
        Revision::Done
    }

    /// Revises `target` against `other`; `holds(a, b)` takes a target value
    /// first.
    fn revise_arc(
        &mut self,
        c: ConstraintId,
        target: VariableId,
        other: VariableId,
        holds: &dyn Fn(i32, i32) -> bool,
        queue: &mut BTreeSet<ConstraintId>,
    ) -> Revision {
        let values: Vec<i32> = self.problem.domain(target).initial().to_vec();
        'values: for a in values {
            let mut ids: Vec<ConstraintId> = vec![c];
            let other_dom = self.problem.domain(other);
            for &b in other_dom.initial() {
                if !holds(a, b) {
                    continue;
                }
                if other_dom.is_present(b) {
                    continue 'values;
                }
                let main = self
                    .store
                    .main(RemovalKey::new(other, b))
                    .expect("removed value has a main explanation");
                ids.extend(main.iter());
            }
            let key = RemovalKey::new(target, a);
            if let Revision::Wipeout(w) = self.justify(c, key, Explanation::new(ids), queue) {
                return Revision::Wipeout(w);
            }
        }
        Revision::Done
    }

    /// Removes `key` with explanation `e`, or records `e` as a secondary
    /// explanation when the value is already gone.
    fn justify(
        &mut self,
        c: ConstraintId,
        key: RemovalKey,
        e: Explanation,
        queue: &mut BTreeSet<ConstraintId>,
    ) -> Revision {
        let relaxed = &self.problem.config().relaxed;
        if !self.problem.domain(key.variable).is_present(key.value) {
            self.store.record_explanation(key, e, relaxed, false);
            return Revision::Done;
        }
        if self.frozen {
            return Revision::Done;
        }
        self.store.record_explanation(key, e.clone(), relaxed, true);
        self.problem.domain_mut(key.variable).remove(key.value);
        self.trace.push(RemovalEvent {
            key,
            explanation: e,
            cause: c,
        });
        if self.problem.domain(key.variable).is_empty() {
            return Revision::Wipeout(key.variable);
        }
        queue.extend(self.problem.active_constraints_on(key.variable));
        Revision::Done
    }

    /// Checks configuration, domain/store agreement, main validity and the
    /// store's own invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        let config = self.problem.config();
        if !config.active.is_disjoint(&config.relaxed) {
            return Err("active and relaxed sets overlap".into());
        }
        let posted: BTreeSet<ConstraintId> = self.problem.constraints().map(|c| c.id).collect();
        let union: BTreeSet<ConstraintId> = config.active.union(&config.relaxed).copied().collect();
        if posted != union {
            return Err("configuration does not cover the posted constraints".into());
        }
        self.store.check_invariants(&config.relaxed)?;
        for d in self.problem.variables() {
            for &a in d.initial() {
                let key = RemovalKey::new(d.variable, a);
                let valid = self.store.record(key).is_some_and(|r| !r.valid().is_empty());
                let main = self.store.main(key);
                if d.is_present(a) {
                    if valid || main.is_some() {
                        return Err(format!("{key:?} is present but justified"));
                    }
                } else if !valid || main.is_none() {
                    return Err(format!("{key:?} is removed without a valid main"));
                }
            }
        }
        let empty = self
            .problem
            .variables()
            .iter()
            .find(|d| d.is_empty())
            .map(|d| d.variable);
        match (&self.status, empty) {
            (Status::Consistent, None) => Ok(()),
            (Status::Contradictory(r), Some(_)) if self.problem.domain(r.variable).is_empty() => Ok(()),
            _ => Err("status disagrees with domains".into()),
        }
    }

    /// Canonical text rendering of configuration, domains, store and status.
    pub fn canonical_state(&self) -> String {
        let mut out = String::new();
        let config = self.problem.config();
        let ids = |s: &BTreeSet<ConstraintId>| s.iter().map(|c| c.0.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "active {}", ids(&config.active));
        let _ = writeln!(out, "relaxed {}", ids(&config.relaxed));
        for d in self.problem.variables() {
            let vals: Vec<String> = d.present_values().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "domain {} {}", d.variable.0, vals.join(","));
        }
        for r in self.store.records() {
            let key = r.key();
            let main = r.main().map_or_else(|| "-".to_string(), |m| m.to_string());
            let buckets: Vec<String> = r
                .buckets()
                .iter()
                .map(|b| b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "))
                .collect();
            let _ = writeln!(
                out,
                "record {} {} main {} | {}",
                key.variable.0,
                key.value,
                main,
                buckets.join(" | ")
            );
        }
        let _ = match self.status.contradiction_variable() {
            Some(v) => writeln!(out, "status contradictory {}", v.0),
            None => writeln!(out, "status consistent"),
        };
        out
    }

    /// SHA-256 of [`Engine::canonical_state`], hex encoded.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_state().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Present values of every variable, keyed by variable.
    pub fn domains(&self) -> BTreeMap<VariableId, Vec<i32>> {
        self.problem
            .variables()
            .iter()
            .map(|d| (d.variable, d.present_values().collect()))
            .collect()
    }
}
