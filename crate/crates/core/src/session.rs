//! Interactive sessions: one engine, its hierarchy and views, driven by
//! newline-delimited JSON commands.
//!
//! A request is a JSON object with an `op` field, e.g.
//! `{"op":"why-not","variable":"Mp","value":1}`. Plain words are accepted as
//! well (`why-not Mp 1`). Every request yields exactly one reply line:
//! `{"ok":true,"result":...}` or `{"ok":false,"error":{"code":..,"message":..}}`.
//!
//! Every request line is appended to the session log. Replaying the log
//! against the same scenario reproduces the reply stream byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conflict::{self, DEFAULT_CAP};
use crate::engine::{Engine, EngineError, SolveOutcome, Status, SEARCH_LIMIT};
use crate::hierarchy::{Hierarchy, HierarchyError, NodeId, UserView};
use crate::model::{ConstraintId, ModelError, VariableId};
use crate::scenario::Scenario;
use crate::whatif::{self, RelaxEffect};
use crate::xstore::{Explanation, RemovalKey, StoreError};

/// Names of every operation understood by [`Session::dispatch`].
pub const OPS: &[&str] = &[
    "domains",
    "explain",
    "conflicts",
    "classical-conflict",
    "relax",
    "reactivate",
    "simulate-relax",
    "simulate-add",
    "in-conflict",
    "why-not",
    "set-view",
    "project-explanation",
    "project-conflicts",
    "relax-node",
    "solve",
    "stats",
    "snapshot",
    "digest",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Command {
    Domains,
    Explain {
        variable: String,
        value: i32,
    },
    Conflicts {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    ClassicalConflict,
    Relax {
        constraint: String,
    },
    Reactivate {
        constraint: String,
    },
    SimulateRelax {
        constraint: String,
    },
    SimulateAdd {
        constraint: String,
    },
    InConflict {
        constraint: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    WhyNot {
        variable: String,
        value: i32,
    },
    SetView {
        name: String,
    },
    ProjectExplanation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variable: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<i32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constraints: Option<Vec<String>>,
    },
    ProjectConflicts {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    RelaxNode {
        node: String,
    },
    /// Searches for a solution; adopts the state when none exists.
    Solve,
    Stats,
    Snapshot,
    Digest,
}

impl Command {
    /// Queries never change the engine state.
    pub fn is_query(&self) -> bool {
        !matches!(
            self,
            Command::Relax { .. }
                | Command::Reactivate { .. }
                | Command::RelaxNode { .. }
                | Command::SetView { .. }
                | Command::Solve
        )
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("commands serialize")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reply {
    Ok(Value),
    Error { code: String, message: String },
}

impl Reply {
    pub fn error(code: &str, message: impl Into<String>) -> Self {
        Reply::Error {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Reply::Ok(_))
    }

    pub fn result(&self) -> Option<&Value> {
        match self {
            Reply::Ok(v) => Some(v),
            Reply::Error { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Reply::Ok(v) => json!({ "ok": true, "result": v }),
            Reply::Error { code, message } => {
                json!({ "ok": false, "error": { "code": code, "message": message } })
            }
        }
    }

    pub fn to_line(&self) -> String {
        self.to_json().to_string()
    }
}

impl From<EngineError> for Reply {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::Model(ModelError::UnknownVariable(_)) => "unknown-variable",
            EngineError::Model(ModelError::UnknownConstraint(_)) | EngineError::UnknownConstraint(_) => {
                "unknown-constraint"
            }
            EngineError::Model(_) => "model",
            EngineError::Store(StoreError::AlreadyRelaxed(_)) => "already-relaxed",
            EngineError::Store(StoreError::NotRelaxed(_)) => "not-relaxed",
            EngineError::Contradictory => "contradictory",
            EngineError::Consistent => "consistent",
            EngineError::ConstraintRelaxed(_) => "relaxed",
            EngineError::DomainNotEmpty(_) => "domain-not-empty",
            EngineError::MissingExplanation(_) => "store",
            EngineError::UnknownValue { .. } => "unknown-value",
            EngineError::SearchLimit(_) => "search-limit",
        };
        Reply::error(code, e.to_string())
    }
}

impl From<ModelError> for Reply {
    fn from(e: ModelError) -> Self {
        EngineError::from(e).into()
    }
}

impl From<HierarchyError> for Reply {
    fn from(e: HierarchyError) -> Self {
        let code = match e {
            HierarchyError::UnknownNode(_) => "unknown-node",
            _ => "hierarchy",
        };
        Reply::error(code, e.to_string())
    }
}

/// Turns a request line into a command. JSON objects are read as is; plain
/// words are read as `op arg...`.
pub fn parse_request(line: &str) -> Result<Command, Reply> {
    let trimmed = line.trim();
    let value: Value = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| Reply::error("bad-request", e.to_string()))?
    } else {
        words_to_json(trimmed)?
    };
    command_from_value(value)
}

/// Checks the `op` tag before deserializing so that an unknown operation is
/// told apart from malformed arguments.
pub fn command_from_value(mut value: Value) -> Result<Command, Reply> {
    let op = match value.get("op") {
        Some(Value::String(op)) => op.clone(),
        _ => return Err(Reply::error("bad-request", "request has no `op` string")),
    };
    if !OPS.contains(&op.as_str()) {
        return Err(Reply::error("unknown-op", format!("unknown op `{op}`")));
    }
    if let Some(obj) = value.as_object_mut() {
        obj.remove("session");
    }
    serde_json::from_value(value).map_err(|e| Reply::error("bad-request", format!("{op}: {e}")))
}

fn words_to_json(line: &str) -> Result<Value, Reply> {
    let mut words = line.split_whitespace();
    let op = words
        .next()
        .ok_or_else(|| Reply::error("bad-request", "empty request"))?;
    let args: Vec<&str> = words.collect();
    let names: &[&str] = match op {
        "explain" | "why-not" => &["variable", "value"],
        "conflicts" | "project-conflicts" => &["cap"],
        "relax" | "reactivate" | "simulate-relax" | "simulate-add" => &["constraint"],
        "in-conflict" => &["constraint", "cap"],
        "set-view" => &["name"],
        "project-explanation" => &["variable", "value"],
        "relax-node" => &["node"],
        _ => &[],
    };
    if args.len() > names.len() {
        return Err(Reply::error("bad-request", format!("too many arguments for `{op}`")));
    }
    let mut obj = serde_json::Map::new();
    obj.insert("op".into(), Value::from(op));
    for (name, arg) in names.iter().zip(args) {
        let v = match *name {
            "value" | "cap" => arg
                .parse::<i64>()
                .map(Value::from)
                .map_err(|_| Reply::error("bad-request", format!("`{name}` must be an integer")))?,
            _ => Value::from(arg),
        };
        obj.insert((*name).into(), v);
    }
    Ok(Value::Object(obj))
}

#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    scenario: Scenario,
    engine: Engine,
    views: BTreeMap<String, UserView>,
    active_view: String,
    log: Vec<String>,
}

impl Session {
    /// Builds the engine from the scenario, propagates, and searches when
    /// propagation alone does not expose a failure.
    pub fn new(id: impl Into<String>, scenario: Scenario) -> Self {
        let mut engine = Engine::new(scenario.problem.clone());
        engine.propagate().expect("fresh engine is consistent");
        if !engine.is_contradictory() {
            // a search that gives up leaves the engine as propagated
            let _ = engine.check_feasibility(SEARCH_LIMIT);
        }
        let mut views = scenario.views.clone();
        views
            .entry("all".into())
            .or_insert_with(|| UserView::everything(&scenario.hierarchy));
        views.entry("root".into()).or_insert_with(UserView::root_only);
        Session {
            id: id.into(),
            scenario,
            engine,
            views,
            active_view: "all".into(),
            log: Vec::new(),
        }
    }

    pub fn load(path: impl AsRef<std::path::Path>, k: Option<usize>) -> Result<Self, crate::scenario::ScenarioError> {
        Ok(Session::new("s0", Scenario::load(path, k)?))
    }

    /// Rebuilds a session from a scenario and a request log.
    pub fn replay(id: impl Into<String>, scenario: Scenario, log: &[String]) -> (Self, Vec<String>) {
        let mut session = Session::new(id, scenario);
        let replies = log.iter().map(|line| session.handle_line(line)).collect();
        (session, replies)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.scenario.hierarchy
    }

    pub fn log(&self) -> &[String] {
        &self.log
    }

    pub fn active_view(&self) -> &str {
        &self.active_view
    }

    pub fn digest(&self) -> String {
        self.engine.digest()
    }

    /// Handles one request line and returns the reply line.
    pub fn handle_line(&mut self, line: &str) -> String {
        self.log.push(line.trim().to_string());
        let reply = match parse_request(line) {
            Ok(cmd) => self.apply(cmd),
            Err(reply) => reply,
        };
        reply.to_line()
    }

    /// Applies a command, logging it in its canonical form.
    pub fn dispatch(&mut self, cmd: Command) -> Reply {
        self.log.push(cmd.to_line());
        self.apply(cmd)
    }

    fn apply(&mut self, cmd: Command) -> Reply {
        match self.run(cmd) {
            Ok(v) => Reply::Ok(v),
            Err(r) => r,
        }
    }

    fn view(&self) -> &UserView {
        &self.views[&self.active_view]
    }

    fn var(&self, name: &str) -> Result<VariableId, Reply> {
        Ok(self.engine.problem().variable(name)?)
    }

    fn constraint(&self, name: &str) -> Result<ConstraintId, Reply> {
        Ok(self.engine.problem().constraint_by_name(name)?)
    }

    fn names(&self, e: &Explanation) -> Vec<String> {
        e.iter().map(|c| self.engine.problem().constraint_name(c)).collect()
    }

    fn key_json(&self, key: RemovalKey) -> Value {
        json!({ "variable": self.engine.problem().variable_name(key.variable), "value": key.value })
    }

    fn status_json(&self, status: &Status) -> Value {
        match status.contradiction_variable() {
            None => json!({ "state": "consistent" }),
            Some(v) => json!({ "state": "contradictory", "variable": self.engine.problem().variable_name(v) }),
        }
    }

    fn contradiction_var(&self) -> Result<VariableId, Reply> {
        self.engine
            .status()
            .contradiction_variable()
            .ok_or_else(|| EngineError::Consistent.into())
    }

    fn run(&mut self, cmd: Command) -> Result<Value, Reply> {
        let problem = self.engine.problem();
        Ok(match cmd {
            Command::Domains => {
                let vars: Vec<Value> = problem
                    .variables()
                    .iter()
                    .map(|d| {
                        json!({
                            "name": d.name,
                            "present": d.present_values().collect::<Vec<_>>(),
                            "removed": d.removed_values().collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({ "status": self.status_json(self.engine.status()), "variables": vars })
            }
            Command::Explain { variable, value } => {
                let v = self.var(&variable)?;
                if !problem.domain(v).contains_initial(value) {
                    return Err(EngineError::UnknownValue { variable: v, value }.into());
                }
                let key = RemovalKey::new(v, value);
                let record = self.engine.store().record(key);
                let buckets: Vec<Vec<Vec<String>>> = (0..problem.k())
                    .map(|i| {
                        record
                            .map(|r| r.bucket(i).iter().map(|e| self.names(e)).collect())
                            .unwrap_or_default()
                    })
                    .collect();
                json!({
                    "variable": variable,
                    "value": value,
                    "present": problem.domain(v).is_present(value),
                    "main": self.engine.store().main(key).map(|m| self.names(m)),
                    "buckets": buckets,
                })
            }
            Command::Conflicts { cap } => {
                let v = self.contradiction_var()?;
                let set = conflict::enumerate_conflicts(&self.engine, v, cap.unwrap_or(DEFAULT_CAP))?;
                json!({
                    "variable": problem.variable_name(v),
                    "raw_count": set.raw_count,
                    "truncated": set.truncated,
                    "cap": set.cap,
                    "raw": set.raw.iter().map(|e| self.names(e)).collect::<Vec<_>>(),
                    "conflicts": set.conflicts.iter().map(|c| self.names(&c.constraints)).collect::<Vec<_>>(),
                })
            }
            Command::ClassicalConflict => {
                let v = self.contradiction_var()?;
                let c = conflict::classical_conflict(&self.engine, v)?;
                json!({ "variable": problem.variable_name(v), "conflict": self.names(&c.constraints) })
            }
            Command::Relax { constraint } => {
                let c = self.constraint(&constraint)?;
                let out = self.engine.relax(c)?;
                json!({
                    "constraint": constraint,
                    "restored": out.restored.iter().map(|&k| self.key_json(k)).collect::<Vec<_>>(),
                    "reassigned": out.reassigned.iter().map(|&k| self.key_json(k)).collect::<Vec<_>>(),
                    "forgotten": out.forgotten,
                    "removed": out.removed.iter().map(|&k| self.key_json(k)).collect::<Vec<_>>(),
                    "status": self.status_json(&out.status),
                })
            }
            Command::Reactivate { constraint } => {
                let c = self.constraint(&constraint)?;
                let out = self.engine.reactivate(c)?;
                json!({
                    "constraint": constraint,
                    "forced": out.forced.iter().map(|(k, e)| {
                        let mut j = self.key_json(*k);
                        j["explanation"] = json!(self.names(e));
                        j
                    }).collect::<Vec<_>>(),
                    "removed": out.removed.iter().map(|&k| self.key_json(k)).collect::<Vec<_>>(),
                    "status": self.status_json(&out.status),
                })
            }
            Command::SimulateRelax { constraint } => {
                let c = self.constraint(&constraint)?;
                let report = whatif::simulate_relax(&self.engine, c)?;
                let outcomes: Vec<Value> = report
                    .outcomes
                    .iter()
                    .map(|(k, effect)| {
                        let mut j = self.key_json(*k);
                        match effect {
                            RelaxEffect::WouldRestore => {
                                j["would_restore"] = json!(true);
                                j["survivors"] = json!([]);
                            }
                            RelaxEffect::StaysRemoved(s) => {
                                j["would_restore"] = json!(false);
                                j["survivors"] = json!(s.iter().map(|e| self.names(e)).collect::<Vec<_>>());
                            }
                        }
                        j
                    })
                    .collect();
                json!({ "constraint": constraint, "outcomes": outcomes, "failure_persists": report.failure_persists })
            }
            Command::SimulateAdd { constraint } => {
                let c = self.constraint(&constraint)?;
                let report = whatif::simulate_add(&self.engine, c)?;
                let predictions: Vec<Value> = report
                    .predictions
                    .iter()
                    .map(|(k, e)| {
                        let mut j = self.key_json(*k);
                        j["explanation"] = json!(self.names(e));
                        j
                    })
                    .collect();
                json!({ "constraint": constraint, "predictions": predictions, "predicted_failure": report.predicted_failure })
            }
            Command::InConflict { constraint, cap } => {
                let c = self.constraint(&constraint)?;
                let m = whatif::in_conflict(&self.engine, c, cap.unwrap_or(DEFAULT_CAP))?;
                json!({
                    "constraint": constraint,
                    "member": m.member,
                    "conflicts": m.conflicts.iter().map(|e| self.names(e)).collect::<Vec<_>>(),
                    "truncated": m.truncated,
                })
            }
            Command::WhyNot { variable, value } => {
                let v = self.var(&variable)?;
                let d = whatif::why_not(&self.engine, v, value)?.project(self.hierarchy(), self.view())?;
                let projected = d.projected.clone().unwrap_or_default();
                let explanations: Vec<Value> = d
                    .explanations
                    .iter()
                    .zip(projected)
                    .map(|(e, p)| json!({ "constraints": self.names(e), "main": d.is_main(e), "projected": p }))
                    .collect();
                json!({
                    "variable": variable,
                    "value": value,
                    "available": d.is_available(),
                    "main": d.main.as_ref().map(|m| self.names(m)),
                    "explanations": explanations,
                    "view": self.active_view,
                })
            }
            Command::SetView { name } => {
                if !self.views.contains_key(&name) {
                    return Err(Reply::error("unknown-view", format!("unknown view `{name}`")));
                }
                self.active_view = name.clone();
                json!({ "view": name })
            }
            Command::ProjectExplanation {
                variable,
                value,
                constraints,
            } => {
                let sets: Vec<Vec<ConstraintId>> = match (constraints, variable, value) {
                    (Some(cs), _, _) => vec![cs.iter().map(|n| self.constraint(n)).collect::<Result<_, _>>()?],
                    (None, Some(var), Some(val)) => {
                        let v = self.var(&var)?;
                        let d = whatif::why_not(&self.engine, v, val)?;
                        d.explanations.iter().map(|e| e.iter().collect()).collect()
                    }
                    _ => {
                        return Err(Reply::error(
                            "bad-request",
                            "project-explanation needs `constraints` or `variable` and `value`",
                        ))
                    }
                };
                let projections = sets
                    .into_iter()
                    .map(|cs| self.hierarchy().project(self.view(), cs))
                    .collect::<Result<Vec<_>, _>>()?;
                json!({ "view": self.active_view, "projections": projections })
            }
            Command::ProjectConflicts { cap } => {
                let v = self.contradiction_var()?;
                let set = conflict::enumerate_conflicts(&self.engine, v, cap.unwrap_or(DEFAULT_CAP))?;
                let merged = self
                    .hierarchy()
                    .project_conflicts(self.view(), set.conflicts.iter().map(|c| &c.constraints))?;
                let projections: Vec<Value> = merged
                    .into_iter()
                    .map(|(labels, n)| json!({ "labels": labels, "multiplicity": n }))
                    .collect();
                json!({ "view": self.active_view, "variable": problem.variable_name(v), "projections": projections })
            }
            Command::RelaxNode { node } => {
                let covered = self.hierarchy().constraints_under(&NodeId::new(node.clone()))?;
                if let Some(d) = covered
                    .iter()
                    .find(|&&c| problem.constraint(c).is_some_and(|s| s.decision))
                {
                    return Err(Reply::error(
                        "decision-constraint",
                        format!(
                            "node `{node}` covers decision constraint `{}`",
                            problem.constraint_name(*d)
                        ),
                    ));
                }
                let targets: Vec<ConstraintId> =
                    covered.into_iter().filter(|&c| problem.config().is_active(c)).collect();
                let mut relaxed = Vec::new();
                let mut restored = Vec::new();
                let mut removed = Vec::new();
                for c in targets {
                    let out = self.engine.relax(c)?;
                    relaxed.push(self.engine.problem().constraint_name(c));
                    restored.extend(out.restored.iter().map(|&k| self.key_json(k)));
                    removed.extend(out.removed.iter().map(|&k| self.key_json(k)));
                }
                json!({
                    "node": node,
                    "relaxed": relaxed,
                    "restored": restored,
                    "removed": removed,
                    "status": self.status_json(self.engine.status()),
                })
            }
            Command::Solve => {
                if self.engine.is_contradictory() {
                    return Err(EngineError::Contradictory.into());
                }
                match self.engine.check_feasibility(SEARCH_LIMIT)? {
                    SolveOutcome::Solution(sol) => {
                        let problem = self.engine.problem();
                        let assignment: serde_json::Map<String, Value> = sol
                            .iter()
                            .map(|(&v, &a)| (problem.variable_name(v).to_string(), Value::from(a)))
                            .collect();
                        json!({ "outcome": "solution", "assignment": assignment })
                    }
                    SolveOutcome::Infeasible(_) => {
                        json!({ "outcome": "infeasible", "status": self.status_json(self.engine.status()) })
                    }
                }
            }
            Command::Stats => {
                let st = self.engine.store().stats();
                json!({
                    "k": problem.k(),
                    "records": st.records,
                    "explanations": st.explanations,
                    "per_bucket": st.per_bucket,
                    "max_explanation_size": st.max_explanation_size,
                    "active": problem.config().active.len(),
                    "relaxed": problem.config().relaxed.len(),
                    "removal_events": self.engine.trace().len(),
                })
            }
            Command::Snapshot => self.snapshot(),
            Command::Digest => json!({ "digest": self.digest() }),
        })
    }

    /// Domains and explanations as a table: one row per (variable, value).
    pub fn snapshot(&self) -> Value {
        let problem = self.engine.problem();
        let store = self.engine.store();
        let mut rows = Vec::new();
        for d in problem.variables() {
            for &a in d.initial() {
                let key = RemovalKey::new(d.variable, a);
                rows.push(json!({
                    "variable": d.name,
                    "value": a,
                    "present": d.is_present(a),
                    "explanation": store.main(key).map(|m| self.names(m)),
                    "valid": store.valid_explanations(key).iter().map(|e| self.names(e)).collect::<Vec<_>>(),
                }));
            }
        }
        let relaxed: Vec<String> = problem
            .config()
            .relaxed
            .iter()
            .map(|&c| problem.constraint_name(c))
            .collect();
        json!({
            "digest": self.digest(),
            "k": problem.k(),
            "status": self.status_json(self.engine.status()),
            "relaxed": relaxed,
            "view": self.active_view,
            "rows": rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conference() -> Session {
        Session::new("t", Scenario::conference())
    }

    #[test]
    fn loads_contradictory() {
        let s = conference();
        assert!(s.engine().is_contradictory());
    }

    #[test]
    fn unknown_op_leaves_state() {
        let mut s = conference();
        let before = s.digest();
        let reply: Value = serde_json::from_str(&s.handle_line(r#"{"op":"explode"}"#)).unwrap();
        assert_eq!(reply["ok"], json!(false));
        assert_eq!(reply["error"]["code"], json!("unknown-op"));
        assert_eq!(s.digest(), before);
    }

    #[test]
    fn text_and_json_requests_agree() {
        let mut a = conference();
        let mut b = conference();
        assert_eq!(
            a.handle_line("why-not Mp 1"),
            b.handle_line(r#"{"op":"why-not","variable":"Mp","value":1}"#)
        );
        assert_eq!(
            a.handle_line("relax c3"),
            b.handle_line(r#"{"op":"relax","constraint":"c3"}"#)
        );
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn bad_arguments() {
        let mut s = conference();
        let r: Value = serde_json::from_str(&s.handle_line(r#"{"op":"relax"}"#)).unwrap();
        assert_eq!(r["error"]["code"], json!("bad-request"));
        let r: Value = serde_json::from_str(&s.handle_line("relax nope")).unwrap();
        assert_eq!(r["error"]["code"], json!("unknown-constraint"));
        let r: Value = serde_json::from_str(&s.handle_line("set-view nobody")).unwrap();
        assert_eq!(r["error"]["code"], json!("unknown-view"));
        let r: Value = serde_json::from_str(&s.handle_line("why-not Mp 9")).unwrap();
        assert_eq!(r["error"]["code"], json!("unknown-value"));
    }

    #[test]
    fn queries_keep_digest() {
        let mut s = conference();
        let before = s.digest();
        for line in [
            "domains",
            "explain Pm 1",
            "conflicts",
            "classical-conflict",
            "simulate-relax c3",
            "in-conflict c5",
            "why-not Mp 1",
            "project-conflicts",
            "stats",
            "snapshot",
        ] {
            let r: Value = serde_json::from_str(&s.handle_line(line)).unwrap();
            assert_eq!(r["ok"], json!(true), "{line}: {r}");
        }
        assert_eq!(s.digest(), before);
    }

    #[test]
    fn relax_node_refuses_decisions() {
        let text = "schema = \"coins-scenario/1\"\n\
            [[variables]]\nname = \"x\"\ndomain = [1, 2]\n\
            [[constraints]]\nname = \"pick\"\nkind = \"assign\"\nscope = [\"x\"]\nvalue = 1\n";
        let mut s = Session::new("d", Scenario::parse(text, None).unwrap());
        let r: Value = serde_json::from_str(&s.handle_line("relax-node root")).unwrap();
        assert_eq!(r["error"]["code"], json!("decision-constraint"));
    }

    #[test]
    fn replay_reproduces() {
        let mut s = conference();
        let replies: Vec<String> = ["relax c3", "simulate-add c3", "bogus", "relax c5", "snapshot"]
            .iter()
            .map(|l| s.handle_line(l))
            .collect();
        let (r, replayed) = Session::replay("t", Scenario::conference(), s.log());
        assert_eq!(replies, replayed);
        assert_eq!(r.digest(), s.digest());
    }
}
