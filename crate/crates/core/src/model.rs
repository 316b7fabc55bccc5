//! Problem definition: variables with finite integer domains, constraints and
//! the active/relaxed configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Index of a variable inside its [`Problem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub u32);

/// Identifier of a posted constraint. Identifiers are totally ordered and the
/// order drives every deterministic tie-break in the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub u32);

impl VariableId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("relevance bound k must be at least 1 (got {0})")]
    InvalidK(usize),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("duplicate constraint id {0}")]
    DuplicateConstraint(ConstraintId),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraintName(String),
    #[error("unknown constraint {0}")]
    UnknownConstraint(String),
    #[error("{kind} expects {expected} variable(s) in its scope, got {got}")]
    ArityMismatch {
        kind: ConstraintKind,
        expected: usize,
        got: usize,
    },
    #[error("{0} requires a payload that was not supplied")]
    MissingPayload(ConstraintKind),
    #[error("table pair ({0}, {1}) is outside the initial domains")]
    TablePairOutOfDomain(i32, i32),
    #[error("assignment does not cover variable {0}")]
    MissingAssignment(VariableId),
}

/// The constraint kinds understood by the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Neq,
    Gt,
    Lt,
    Table,
    UnaryNeq,
    Assign,
}

impl ConstraintKind {
    pub fn arity(self) -> usize {
        match self {
            ConstraintKind::UnaryNeq | ConstraintKind::Assign => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Neq => "neq",
            ConstraintKind::Gt => "gt",
            ConstraintKind::Lt => "lt",
            ConstraintKind::Table => "table",
            ConstraintKind::UnaryNeq => "unary-neq",
            ConstraintKind::Assign => "assign",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "neq" | "binary-neq" => ConstraintKind::Neq,
            "gt" | "binary-gt" => ConstraintKind::Gt,
            "lt" | "binary-lt" => ConstraintKind::Lt,
            "table" | "binary-table" => ConstraintKind::Table,
            "unary-neq" => ConstraintKind::UnaryNeq,
            "assign" => ConstraintKind::Assign,
            _ => return None,
        })
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A constraint relation together with its scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `x != y`
    Neq(VariableId, VariableId),
    /// `x > y`
    Gt(VariableId, VariableId),
    /// `x < y`
    Lt(VariableId, VariableId),
    /// `(x, y)` must be one of the listed pairs.
    Table(VariableId, VariableId, Vec<(i32, i32)>),
    /// `x != value`
    UnaryNeq(VariableId, i32),
    /// `x = value`; always a decision constraint.
    Assign(VariableId, i32),
}

impl Relation {
    /// Builds a relation from a kind tag, a scope and an optional payload
    /// (a comparison value for unary kinds, allowed pairs for tables).
    pub fn from_parts(
        kind: ConstraintKind,
        scope: &[VariableId],
        value: Option<i32>,
        pairs: Option<Vec<(i32, i32)>>,
    ) -> Result<Self, ModelError> {
        if scope.len() != kind.arity() {
            return Err(ModelError::ArityMismatch {
                kind,
                expected: kind.arity(),
                got: scope.len(),
            });
        }
        let value = || value.ok_or(ModelError::MissingPayload(kind));
        Ok(match kind {
            ConstraintKind::Neq => Relation::Neq(scope[0], scope[1]),
            ConstraintKind::Gt => Relation::Gt(scope[0], scope[1]),
            ConstraintKind::Lt => Relation::Lt(scope[0], scope[1]),
            ConstraintKind::Table => {
                Relation::Table(scope[0], scope[1], pairs.ok_or(ModelError::MissingPayload(kind))?)
            }
            ConstraintKind::UnaryNeq => Relation::UnaryNeq(scope[0], value()?),
            ConstraintKind::Assign => Relation::Assign(scope[0], value()?),
        })
    }

    pub fn kind(&self) -> ConstraintKind {
        match self {
            Relation::Neq(..) => ConstraintKind::Neq,
            Relation::Gt(..) => ConstraintKind::Gt,
            Relation::Lt(..) => ConstraintKind::Lt,
            Relation::Table(..) => ConstraintKind::Table,
            Relation::UnaryNeq(..) => ConstraintKind::UnaryNeq,
            Relation::Assign(..) => ConstraintKind::Assign,
        }
    }

    pub fn scope(&self) -> Vec<VariableId> {
        match *self {
            Relation::Neq(x, y) | Relation::Gt(x, y) | Relation::Lt(x, y) => vec![x, y],
            Relation::Table(x, y, _) => vec![x, y],
            Relation::UnaryNeq(x, _) | Relation::Assign(x, _) => vec![x],
        }
    }

    pub fn involves(&self, v: VariableId) -> bool {
        self.scope().contains(&v)
    }

    /// Checks a binary relation on `(first scope var, second scope var)`.
    /// Unary relations ignore `b`.
    pub fn holds(&self, a: i32, b: i32) -> bool {
        match self {
            Relation::Neq(..) => a != b,
            Relation::Gt(..) => a > b,
            Relation::Lt(..) => a < b,
            Relation::Table(_, _, pairs) => pairs.contains(&(a, b)),
            Relation::UnaryNeq(_, v) => a != *v,
            Relation::Assign(_, v) => a == *v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub id: ConstraintId,
    pub name: String,
    pub relation: Relation,
    pub decision: bool,
}

impl ConstraintSpec {
    /// Assignments are flagged as decisions; everything else starts as a
    /// problem constraint.
    pub fn new(id: ConstraintId, name: impl Into<String>, relation: Relation) -> Self {
        let decision = matches!(relation, Relation::Assign(..));
        ConstraintSpec {
            id,
            name: name.into(),
            relation,
            decision,
        }
    }

    pub fn as_decision(mut self) -> Self {
        self.decision = true;
        self
    }

    pub fn kind(&self) -> ConstraintKind {
        self.relation.kind()
    }
}

/// Evaluates a constraint on a (partial) assignment covering its scope.
pub fn eval_constraint(spec: &ConstraintSpec, assignment: &BTreeMap<VariableId, i32>) -> Result<bool, ModelError> {
    let value_of = |v: VariableId| assignment.get(&v).copied().ok_or(ModelError::MissingAssignment(v));
    let scope = spec.relation.scope();
    let a = value_of(scope[0])?;
    let b = match scope.get(1) {
        Some(&y) => value_of(y)?,
        None => 0,
    };
    Ok(spec.relation.holds(a, b))
}

/// Initial and current domain of one variable. Values are kept ascending;
/// `present[i]` tells whether `initial[i]` is still in the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainState {
    pub variable: VariableId,
    pub name: String,
    initial: Vec<i32>,
    present: Vec<bool>,
}

impl DomainState {
    pub fn initial(&self) -> &[i32] {
        &self.initial
    }

    pub fn position(&self, value: i32) -> Option<usize> {
        self.initial.binary_search(&value).ok()
    }

    pub fn contains_initial(&self, value: i32) -> bool {
        self.position(value).is_some()
    }

    pub fn is_present(&self, value: i32) -> bool {
        self.position(value).is_some_and(|i| self.present[i])
    }

    pub fn present_values(&self) -> impl Iterator<Item = i32> + '_ {
        self.initial
            .iter()
            .zip(&self.present)
            .filter(|(_, &p)| p)
            .map(|(&v, _)| v)
    }

    pub fn removed_values(&self) -> impl Iterator<Item = i32> + '_ {
        self.initial
            .iter()
            .zip(&self.present)
            .filter(|(_, &p)| !p)
            .map(|(&v, _)| v)
    }

    pub fn size(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// Returns whether the value was present.
    pub(crate) fn remove(&mut self, value: i32) -> bool {
        match self.position(value) {
            Some(i) => std::mem::replace(&mut self.present[i], false),
            None => false,
        }
    }

    /// Returns whether the value was absent.
    pub(crate) fn restore(&mut self, value: i32) -> bool {
        match self.position(value) {
            Some(i) => !std::mem::replace(&mut self.present[i], true),
            None => false,
        }
    }
}

/// The partition of posted constraints into active and relaxed ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Configuration {
    pub active: BTreeSet<ConstraintId>,
    pub relaxed: BTreeSet<ConstraintId>,
}

impl Configuration {
    pub fn is_active(&self, c: ConstraintId) -> bool {
        self.active.contains(&c)
    }

    pub fn is_relaxed(&self, c: ConstraintId) -> bool {
        self.relaxed.contains(&c)
    }
}

#[derive(Clone, Debug)]
pub struct Problem {
    variables: Vec<DomainState>,
    constraints: BTreeMap<ConstraintId, ConstraintSpec>,
    config: Configuration,
    k: usize,
}

impl Problem {
    /// Creates a problem with the given variables and no constraints.
    pub fn build<S: Into<String>>(vars: impl IntoIterator<Item = (S, Vec<i32>)>, k: usize) -> Result<Self, ModelError> {
        if k < 1 {
            return Err(ModelError::InvalidK(k));
        }
        let mut variables: Vec<DomainState> = Vec::new();
        for (i, (name, mut values)) in vars.into_iter().enumerate() {
            let name = name.into();
            if values.is_empty() {
                return Err(ModelError::EmptyDomain(name));
            }
            if variables.iter().any(|d| d.name == name) {
                return Err(ModelError::DuplicateVariable(name));
            }
            values.sort_unstable();
            values.dedup();
            variables.push(DomainState {
                variable: VariableId(i as u32),
                name,
                present: vec![true; values.len()],
                initial: values,
            });
        }
        Ok(Problem {
            variables,
            constraints: BTreeMap::new(),
            config: Configuration::default(),
            k,
        })
    }

    /// Appends a constraint as active. Nothing is propagated.
    pub fn post(&mut self, spec: ConstraintSpec) -> Result<ConstraintId, ModelError> {
        if self.constraints.contains_key(&spec.id) {
            return Err(ModelError::DuplicateConstraint(spec.id));
        }
        if self.constraints.values().any(|c| c.name == spec.name) {
            return Err(ModelError::DuplicateConstraintName(spec.name));
        }
        for v in spec.relation.scope() {
            if v.index() >= self.variables.len() {
                return Err(ModelError::UnknownVariable(v.to_string()));
            }
        }
        if let Relation::Table(x, y, pairs) = &spec.relation {
            for &(a, b) in pairs {
                if !self.domain(*x).contains_initial(a) || !self.domain(*y).contains_initial(b) {
                    return Err(ModelError::TablePairOutOfDomain(a, b));
                }
            }
        }
        let mut spec = spec;
        if matches!(spec.relation, Relation::Assign(..)) {
            spec.decision = true;
        }
        let id = spec.id;
        self.constraints.insert(id, spec);
        self.config.active.insert(id);
        Ok(id)
    }

    /// Posts a constraint under the next free identifier.
    pub fn add(&mut self, name: impl Into<String>, relation: Relation) -> Result<ConstraintId, ModelError> {
        let id = self.next_constraint_id();
        self.post(ConstraintSpec::new(id, name, relation))
    }

    pub fn next_constraint_id(&self) -> ConstraintId {
        self.constraints
            .keys()
            .next_back()
            .map_or(ConstraintId(1), |c| ConstraintId(c.0 + 1))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn variables(&self) -> &[DomainState] {
        &self.variables
    }

    pub fn domain(&self, v: VariableId) -> &DomainState {
        &self.variables[v.index()]
    }

    pub(crate) fn domain_mut(&mut self, v: VariableId) -> &mut DomainState {
        &mut self.variables[v.index()]
    }

    pub fn variable(&self, name: &str) -> Result<VariableId, ModelError> {
        self.variables
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.variable)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn variable_name(&self, v: VariableId) -> &str {
        &self.variables[v.index()].name
    }

    pub fn constraints(&self) -> impl Iterator<Item = &ConstraintSpec> {
        self.constraints.values()
    }

    pub fn constraint(&self, c: ConstraintId) -> Option<&ConstraintSpec> {
        self.constraints.get(&c)
    }

    pub fn constraint_by_name(&self, name: &str) -> Result<ConstraintId, ModelError> {
        self.constraints
            .values()
            .find(|c| c.name == name)
            .map(|c| c.id)
            .ok_or_else(|| ModelError::UnknownConstraint(name.to_string()))
    }

    pub fn constraint_name(&self, c: ConstraintId) -> String {
        self.constraints
            .get(&c)
            .map_or_else(|| c.to_string(), |s| s.name.clone())
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub(crate) fn config_mut(&mut self) -> &mut Configuration {
        &mut self.config
    }

    /// Active constraints whose scope contains `v`, ascending by id.
    pub fn active_constraints_on(&self, v: VariableId) -> impl Iterator<Item = ConstraintId> + '_ {
        self.config
            .active
            .iter()
            .copied()
            .filter(move |c| self.constraints[c].relation.involves(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conference_vars() -> Vec<(&'static str, Vec<i32>)> {
        ["Ma", "Mp", "Am", "Pm"]
            .into_iter()
            .map(|n| (n, vec![1, 2, 3, 4]))
            .collect()
    }

    #[test]
    fn build_single_variable() {
        let p = Problem::build([("x", vec![1, 2])], 1).unwrap();
        assert_eq!(p.variables().len(), 1);
        assert_eq!(p.domain(VariableId(0)).size(), 2);
        assert!(p.config().active.is_empty() && p.config().relaxed.is_empty());
    }

    #[test]
    fn build_conference_variables() {
        let p = Problem::build(conference_vars(), 1).unwrap();
        assert_eq!(p.variables().len(), 4);
        assert!(p.variables().iter().all(|d| d.size() == 4));
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            Problem::build([("x", vec![])], 1).unwrap_err(),
            ModelError::EmptyDomain("x".into())
        );
        assert_eq!(
            Problem::build([("x", vec![1])], 0).unwrap_err(),
            ModelError::InvalidK(0)
        );
        assert_eq!(
            Problem::build([("x", vec![1]), ("x", vec![2])], 1).unwrap_err(),
            ModelError::DuplicateVariable("x".into())
        );
    }

    #[test]
    fn post_constraints() {
        let mut p = Problem::build(conference_vars(), 1).unwrap();
        let ma = p.variable("Ma").unwrap();
        let am = p.variable("Am").unwrap();
        let c1 = p
            .post(ConstraintSpec::new(ConstraintId(1), "c1", Relation::Neq(ma, am)))
            .unwrap();
        assert!(p.config().is_active(c1));
        let c10 = p
            .post(ConstraintSpec::new(ConstraintId(10), "c10", Relation::UnaryNeq(ma, 4)))
            .unwrap();
        assert!(p.config().is_active(c10));
        // posting does not touch domains
        assert_eq!(p.domain(ma).size(), 4);

        let dc = p.add("pick", Relation::Assign(ma, 1)).unwrap();
        assert_eq!(dc, ConstraintId(11));
        assert!(p.constraint(dc).unwrap().decision);
    }

    #[test]
    fn post_errors() {
        let mut p = Problem::build([("x", vec![1, 2]), ("y", vec![1, 2])], 1).unwrap();
        let x = VariableId(0);
        p.post(ConstraintSpec::new(ConstraintId(1), "a", Relation::UnaryNeq(x, 1)))
            .unwrap();
        assert_eq!(
            p.post(ConstraintSpec::new(ConstraintId(1), "b", Relation::UnaryNeq(x, 2))),
            Err(ModelError::DuplicateConstraint(ConstraintId(1)))
        );
        assert!(matches!(
            p.post(ConstraintSpec::new(
                ConstraintId(2),
                "b",
                Relation::Neq(x, VariableId(7))
            )),
            Err(ModelError::UnknownVariable(_))
        ));
        assert_eq!(
            p.post(ConstraintSpec::new(
                ConstraintId(3),
                "t",
                Relation::Table(x, VariableId(1), vec![(1, 5)])
            )),
            Err(ModelError::TablePairOutOfDomain(1, 5))
        );
        assert!(matches!(
            Relation::from_parts(ConstraintKind::Neq, &[x], None, None),
            Err(ModelError::ArityMismatch {
                expected: 2,
                got: 1,
                ..
            })
        ));
    }

    #[test]
    fn eval_examples() {
        let (ma, am, pm) = (VariableId(0), VariableId(2), VariableId(3));
        let gt = ConstraintSpec::new(ConstraintId(6), "c6", Relation::Gt(ma, am));
        let neq = ConstraintSpec::new(ConstraintId(5), "c5", Relation::Neq(am, pm));
        let un = ConstraintSpec::new(ConstraintId(13), "c13", Relation::UnaryNeq(pm, 4));
        let asg = |pairs: &[(VariableId, i32)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();
        assert!(eval_constraint(&gt, &asg(&[(ma, 3), (am, 1)])).unwrap());
        assert!(!eval_constraint(&neq, &asg(&[(am, 2), (pm, 2)])).unwrap());
        assert!(!eval_constraint(&un, &asg(&[(pm, 4)])).unwrap());
        assert_eq!(
            eval_constraint(&neq, &asg(&[(am, 2)])),
            Err(ModelError::MissingAssignment(pm))
        );
    }
}
