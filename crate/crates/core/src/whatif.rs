//! Propagation-free simulations and diagnosis queries.
//!
//! Everything here reads the explanation store only and never evaluates
//! constraint semantics. Predictions are therefore one-sided: a simulated
//! relaxation never claims a restoration that the real one would not make,
//! and a simulated addition never predicts a removal that the real one would
//! not make, but propagation may find more in both cases.

use crate::conflict::{combine, minimize};
use crate::engine::{Engine, EngineError};
use crate::hierarchy::{Hierarchy, HierarchyError, UserView};
use crate::model::{ConstraintId, VariableId};
use crate::xstore::{Explanation, RemovalKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelaxEffect {
    /// Every valid explanation mentions the constraint.
    WouldRestore,
    /// These valid explanations survive the relaxation.
    StaysRemoved(Vec<Explanation>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelaxSimReport {
    pub constraint: ConstraintId,
    /// Removals with at least one valid explanation containing the constraint.
    pub outcomes: Vec<(RemovalKey, RelaxEffect)>,
    /// The current failure would be immediately back after the relaxation.
    pub failure_persists: bool,
}

impl RelaxSimReport {
    pub fn would_restore(&self) -> impl Iterator<Item = RemovalKey> + '_ {
        self.outcomes
            .iter()
            .filter(|(_, o)| *o == RelaxEffect::WouldRestore)
            .map(|(k, _)| *k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddSimReport {
    pub constraint: ConstraintId,
    /// Present values that a stored explanation would remove, with that
    /// explanation.
    pub predictions: Vec<(RemovalKey, Explanation)>,
    pub predicted_failure: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub constraint: ConstraintId,
    pub member: bool,
    /// Distinct raw conflicts containing the constraint, subsumption-minimized
    /// among themselves.
    pub conflicts: Vec<Explanation>,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnosis {
    pub key: RemovalKey,
    /// Valid explanations, empty when the value is available.
    pub explanations: Vec<Explanation>,
    pub main: Option<Explanation>,
    pub projected: Option<Vec<Vec<String>>>,
}

impl Diagnosis {
    pub fn is_available(&self) -> bool {
        self.explanations.is_empty()
    }

    pub fn is_main(&self, e: &Explanation) -> bool {
        self.main.as_ref() == Some(e)
    }

    /// Attaches the projection of each explanation onto `view`.
    pub fn project(mut self, h: &Hierarchy, view: &UserView) -> Result<Self, HierarchyError> {
        let projected = self
            .explanations
            .iter()
            .map(|e| h.project(view, e.iter()))
            .collect::<Result<Vec<_>, _>>()?;
        self.projected = Some(projected);
        Ok(self)
    }
}

fn require_active(engine: &Engine, c: ConstraintId) -> Result<(), EngineError> {
    if engine.problem().constraint(c).is_none() {
        return Err(EngineError::UnknownConstraint(c));
    }
    if engine.problem().config().is_relaxed(c) {
        return Err(EngineError::ConstraintRelaxed(c));
    }
    Ok(())
}

/// What relaxing `c` would do to the current removals, without propagating.
pub fn simulate_relax(engine: &Engine, c: ConstraintId) -> Result<RelaxSimReport, EngineError> {
    require_active(engine, c)?;
    let mut outcomes = Vec::new();
    for record in engine.store().records() {
        let valid = record.valid();
        if !valid.iter().any(|e| e.contains(c)) {
            continue;
        }
        let survivors: Vec<Explanation> = valid.iter().filter(|e| !e.contains(c)).cloned().collect();
        let effect = if survivors.is_empty() {
            RelaxEffect::WouldRestore
        } else {
            RelaxEffect::StaysRemoved(survivors)
        };
        outcomes.push((record.key(), effect));
    }
    let failure_persists = match engine.status().contradiction_variable() {
        None => false,
        Some(v) => engine.problem().domain(v).initial().iter().all(|&a| {
            engine
                .store()
                .valid_explanations(RemovalKey::new(v, a))
                .iter()
                .any(|e| !e.contains(c))
        }),
    };
    Ok(RelaxSimReport {
        constraint: c,
        outcomes,
        failure_persists,
    })
}

/// What reactivating the relaxed `c` would remove, without propagating.
pub fn simulate_add(engine: &Engine, c: ConstraintId) -> Result<AddSimReport, EngineError> {
    let problem = engine.problem();
    if problem.constraint(c).is_none() {
        return Err(EngineError::UnknownConstraint(c));
    }
    if !problem.config().is_relaxed(c) {
        return Err(crate::xstore::StoreError::NotRelaxed(c).into());
    }
    if engine.is_contradictory() {
        return Err(EngineError::Contradictory);
    }
    let mut predictions = Vec::new();
    for record in engine.store().records() {
        let key = record.key();
        if !problem.domain(key.variable).is_present(key.value) {
            continue;
        }
        // bucket 1 holds exactly the explanations whose only relaxed
        // constraint could be `c`
        if let Some(e) = record.bucket(1).iter().find(|e| e.contains(c)) {
            predictions.push((key, e.clone()));
        }
    }
    let predicted_failure = problem.variables().iter().any(|d| {
        let lost = predictions.iter().filter(|(k, _)| k.variable == d.variable).count();
        d.size() <= lost
    });
    Ok(AddSimReport {
        constraint: c,
        predictions,
        predicted_failure,
    })
}

/// Does `c` take part in some conflict of the current failure?
pub fn in_conflict(engine: &Engine, c: ConstraintId, cap: usize) -> Result<Membership, EngineError> {
    let v = engine
        .status()
        .contradiction_variable()
        .ok_or(EngineError::Consistent)?;
    if engine.problem().constraint(c).is_none() {
        return Err(EngineError::UnknownConstraint(c));
    }
    let per_value: Vec<Vec<Explanation>> = engine
        .problem()
        .domain(v)
        .initial()
        .iter()
        .map(|&a| engine.store().valid_explanations(RemovalKey::new(v, a)))
        .collect();
    let combos = combine(&per_value, cap);
    let conflicts = minimize(combos.unions.into_iter().filter(|u| u.contains(c)));
    Ok(Membership {
        constraint: c,
        member: !conflicts.is_empty(),
        conflicts,
        truncated: combos.truncated,
    })
}

/// Why is `value` not available for `v`?
pub fn why_not(engine: &Engine, v: VariableId, value: i32) -> Result<Diagnosis, EngineError> {
    let domain = engine.problem().domain(v);
    if !domain.contains_initial(value) {
        return Err(EngineError::UnknownValue { variable: v, value });
    }
    let key = RemovalKey::new(v, value);
    if domain.is_present(value) {
        return Ok(Diagnosis {
            key,
            explanations: Vec::new(),
            main: None,
            projected: None,
        });
    }
    Ok(Diagnosis {
        key,
        explanations: engine.store().valid_explanations(key),
        main: engine.store().main(key).cloned(),
        projected: None,
    })
}
