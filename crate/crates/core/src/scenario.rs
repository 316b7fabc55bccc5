//! Scenario files: variables, constraints, relevance bound, hierarchy and
//! named user views in one TOML document.
//!
//! ```toml
//! schema = "coins-scenario/1"
//! k = 1
//!
//! [[variables]]
//! name = "x"
//! domain = [1, 2, 3]
//!
//! [[constraints]]
//! id = 1                # optional, defaults to position + 1
//! name = "x-not-3"
//! kind = "unary-neq"    # neq | gt | lt | table | unary-neq | assign
//! scope = ["x"]
//! value = 3             # unary kinds; tables use `pairs = [[1, 2], ...]`
//! decision = false
//!
//! [[hierarchy.nodes]]
//! id = "root"
//! label = "My problem"  # no parent: the root
//!
//! [hierarchy.leaves]
//! x-not-3 = "root"      # constraint name -> node id
//!
//! [[views]]
//! name = "me"
//! nodes = ["root"]
//! ```
//!
//! Without a `[hierarchy]` table every constraint gets its own leaf under a
//! single root.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::hierarchy::{Hierarchy, HierarchyError, HierarchyNode, NodeId, UserView};
use crate::model::{ConstraintId, ConstraintKind, ConstraintSpec, ModelError, Problem, Relation};

pub const SCHEMA: &str = "coins-scenario/1";

/// The reconstructed conference scenario shipped with the crate.
pub const CONFERENCE: &str = include_str!("../scenarios/conference.toml");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("unsupported schema `{0}` (expected `{SCHEMA}`)")]
    Schema(String),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default = "default_k")]
    k: usize,
    variables: Vec<RawVariable>,
    #[serde(default)]
    constraints: Vec<RawConstraint>,
    #[serde(default)]
    hierarchy: Option<RawHierarchy>,
    #[serde(default)]
    views: Vec<RawView>,
}

fn default_k() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    name: Spanned<String>,
    domain: Vec<i32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    #[serde(default)]
    id: Option<u32>,
    name: Spanned<String>,
    kind: String,
    scope: Vec<String>,
    #[serde(default)]
    value: Option<i32>,
    #[serde(default)]
    pairs: Option<Vec<[i32; 2]>>,
    #[serde(default)]
    decision: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHierarchy {
    nodes: Vec<RawNode>,
    #[serde(default)]
    leaves: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    label: String,
    #[serde(default)]
    parent: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawView {
    name: Spanned<String>,
    nodes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: Option<String>,
    pub problem: Problem,
    pub hierarchy: Hierarchy,
    pub views: BTreeMap<String, UserView>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>, k: Option<usize>) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, k)
    }

    pub fn conference() -> Self {
        Self::parse(CONFERENCE, None).expect("bundled scenario is valid")
    }

    /// Parses and validates a scenario. `k` overrides the file's bound.
    pub fn parse(text: &str, k: Option<usize>) -> Result<Self, ScenarioError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if raw.schema != SCHEMA {
            return Err(ScenarioError::Schema(raw.schema));
        }
        let line_of = |span: std::ops::Range<usize>| text[..span.start].matches('\n').count() + 1;
        let invalid = |span, err: &dyn std::fmt::Display| ScenarioError::Invalid {
            line: line_of(span),
            message: err.to_string(),
        };

        let vars = raw
            .variables
            .iter()
            .map(|v| (v.name.get_ref().clone(), v.domain.clone()));
        let mut problem = Problem::build(vars, k.unwrap_or(raw.k)).map_err(|e| match &e {
            ModelError::EmptyDomain(n) | ModelError::DuplicateVariable(n) => {
                let span = raw
                    .variables
                    .iter()
                    .rev()
                    .find(|v| v.name.get_ref() == n)
                    .map_or(0..0, |v| v.name.span());
                invalid(span, &e)
            }
            _ => ScenarioError::Model(e),
        })?;

        for (pos, c) in raw.constraints.iter().enumerate() {
            let span = c.name.span();
            let kind = ConstraintKind::parse(&c.kind)
                .ok_or_else(|| invalid(span.clone(), &format!("unknown constraint kind `{}`", c.kind)))?;
            let scope = c
                .scope
                .iter()
                .map(|n| problem.variable(n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(span.clone(), &e))?;
            let pairs = c.pairs.as_ref().map(|ps| ps.iter().map(|&[a, b]| (a, b)).collect());
            let relation = Relation::from_parts(kind, &scope, c.value, pairs).map_err(|e| invalid(span.clone(), &e))?;
            let id = ConstraintId(c.id.unwrap_or(pos as u32 + 1));
            let mut spec = ConstraintSpec::new(id, c.name.get_ref().clone(), relation);
            if c.decision {
                spec = spec.as_decision();
            }
            problem.post(spec).map_err(|e| invalid(span, &e))?;
        }

        let hierarchy = match raw.hierarchy {
            None => Hierarchy::flat(&problem),
            Some(h) => {
                let nodes = h
                    .nodes
                    .iter()
                    .map(|n| HierarchyNode {
                        id: NodeId(n.id.clone()),
                        label: n.label.clone(),
                        parent: n.parent.clone().map(NodeId),
                    })
                    .collect();
                let mut leaf_of = BTreeMap::new();
                for (cname, node) in h.leaves {
                    let c = problem.constraint_by_name(&cname)?;
                    leaf_of.insert(c, NodeId(node));
                }
                Hierarchy::new(nodes, leaf_of)
            }
        };
        hierarchy.validate(&problem)?;

        let mut views = BTreeMap::new();
        for v in raw.views {
            for n in &v.nodes {
                if hierarchy.node(&NodeId(n.clone())).is_none() {
                    return Err(invalid(v.name.span(), &format!("view refers to unknown node `{n}`")));
                }
            }
            views.insert(v.name.into_inner(), UserView::new(v.nodes));
        }

        Ok(Scenario {
            name: raw.name,
            problem,
            hierarchy,
            views,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conference_loads() {
        let s = Scenario::conference();
        assert_eq!(s.problem.variables().len(), 4);
        assert_eq!(s.problem.constraints().count(), 14);
        assert!(s.views.contains_key("michael"));
        assert_eq!(s.problem.k(), 1);
    }

    #[test]
    fn k_override() {
        let s = Scenario::parse(CONFERENCE, Some(3)).unwrap();
        assert_eq!(s.problem.k(), 3);
    }

    #[test]
    fn empty_constraint_list() {
        let s = Scenario::parse(
            "schema = \"coins-scenario/1\"\n[[variables]]\nname = \"x\"\ndomain = [1, 2]\n",
            None,
        )
        .unwrap();
        assert_eq!(s.problem.constraints().count(), 0);
        assert_eq!(s.hierarchy.nodes().len(), 1);
    }

    #[test]
    fn structured_errors() {
        assert!(matches!(
            Scenario::parse("schema = ", None),
            Err(ScenarioError::Parse(_))
        ));
        assert!(matches!(
            Scenario::parse("schema = \"other/2\"\nvariables = []\n", None),
            Err(ScenarioError::Schema(_))
        ));
        let text = "schema = \"coins-scenario/1\"\n\
                    [[variables]]\nname = \"x\"\ndomain = [1]\n\
                    [[constraints]]\nname = \"bad\"\nkind = \"neq\"\nscope = [\"x\", \"nope\"]\n";
        match Scenario::parse(text, None) {
            Err(ScenarioError::Invalid { line, message }) => {
                assert_eq!(line, 6);
                assert!(message.contains("nope"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "schema = \"coins-scenario/1\"\n[[variables]]\nname = \"x\"\ndomain = []\n";
        assert!(matches!(
            Scenario::parse(text, None),
            Err(ScenarioError::Invalid { line: 3, .. })
        ));
    }
}
