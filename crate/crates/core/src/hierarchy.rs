//! Hierarchical description of a problem and projection of low-level
//! constraint sets onto the boxes a given user understands.
//!
//! A hierarchy is a tree of labeled boxes; every constraint hangs under
//! exactly one leaf box. A user view is the set of boxes the user can read.
//! Projection walks each constraint upward until it meets a box of the view.
//! The root is implicitly part of every view, so the walk always ends.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{ConstraintId, Problem};
use crate::xstore::Explanation;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(s: impl Into<String>) -> Self {
        NodeId(s.into())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchyNode {
    pub id: NodeId,
    pub label: String,
    pub parent: Option<NodeId>,
}

impl HierarchyNode {
    pub fn new(id: &str, label: &str, parent: Option<&str>) -> Self {
        HierarchyNode {
            id: NodeId::new(id),
            label: label.to_string(),
            parent: parent.map(NodeId::new),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoRoot,
    MultipleRoots(Vec<NodeId>),
    DuplicateNode(NodeId),
    UnknownParent { node: NodeId, parent: NodeId },
    Cycle(NodeId),
    Unreachable(NodeId),
    UnmappedConstraint(ConstraintId),
    UnknownConstraint(ConstraintId),
    UnknownLeafNode { constraint: ConstraintId, node: NodeId },
    NotALeaf { constraint: ConstraintId, node: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoRoot => write!(f, "hierarchy has no root"),
            Violation::MultipleRoots(r) => {
                let ids: Vec<&str> = r.iter().map(|n| n.0.as_str()).collect();
                write!(f, "hierarchy has several roots: {}", ids.join(", "))
            }
            Violation::DuplicateNode(n) => write!(f, "duplicate node `{n}`"),
            Violation::UnknownParent { node, parent } => {
                write!(f, "node `{node}` has unknown parent `{parent}`")
            }
            Violation::Cycle(n) => write!(f, "node `{n}` lies on a parent cycle"),
            Violation::Unreachable(n) => write!(f, "node `{n}` is not reachable from the root"),
            Violation::UnmappedConstraint(c) => write!(f, "constraint {c} is not mapped to a node"),
            Violation::UnknownConstraint(c) => write!(f, "mapping for unknown constraint {c}"),
            Violation::UnknownLeafNode { constraint, node } => {
                write!(f, "constraint {constraint} is mapped to unknown node `{node}`")
            }
            Violation::NotALeaf { constraint, node } => {
                write!(f, "constraint {constraint} is mapped to inner node `{node}`")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("invalid hierarchy: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("constraint {0} is not mapped to a node")]
    Unmapped(ConstraintId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("parent chain of `{0}` does not reach the root")]
    BrokenChain(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    nodes: Vec<HierarchyNode>,
    index: BTreeMap<NodeId, usize>,
    leaf_of: BTreeMap<ConstraintId, NodeId>,
}

/// The boxes one user understands. The root is always understood.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UserView {
    pub understandable: BTreeSet<NodeId>,
}

impl UserView {
    pub fn new<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Self {
        UserView {
            understandable: nodes.into_iter().map(|s| NodeId(s.into())).collect(),
        }
    }

    /// A view in which every box is understood.
    pub fn everything(h: &Hierarchy) -> Self {
        UserView {
            understandable: h.nodes.iter().map(|n| n.id.clone()).collect(),
        }
    }

    pub fn root_only() -> Self {
        UserView::default()
    }

    pub fn contains(&self, n: &NodeId) -> bool {
        self.understandable.contains(n)
    }
}

impl Hierarchy {
    pub fn new(nodes: Vec<HierarchyNode>, leaf_of: BTreeMap<ConstraintId, NodeId>) -> Self {
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            index.entry(n.id.clone()).or_insert(i);
        }
        Hierarchy { nodes, index, leaf_of }
    }

    /// A root box with one leaf per constraint, labeled with the constraint
    /// name.
    pub fn flat(problem: &Problem) -> Self {
        let mut nodes = vec![HierarchyNode::new("root", "problem", None)];
        let mut leaf_of = BTreeMap::new();
        for c in problem.constraints() {
            let id = format!("leaf-{}", c.name);
            nodes.push(HierarchyNode::new(&id, &c.name, Some("root")));
            leaf_of.insert(c.id, NodeId(id));
        }
        Hierarchy::new(nodes, leaf_of)
    }

    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    pub fn node(&self, id: &NodeId) -> Option<&HierarchyNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn leaf_of(&self, c: ConstraintId) -> Option<&NodeId> {
        self.leaf_of.get(&c)
    }

    pub fn mapping(&self) -> &BTreeMap<ConstraintId, NodeId> {
        &self.leaf_of
    }

    pub fn root(&self) -> Option<&HierarchyNode> {
        self.nodes.iter().find(|n| n.parent.is_none())
    }

    fn has_children(&self, id: &NodeId) -> bool {
        self.nodes.iter().any(|n| n.parent.as_ref() == Some(id))
    }

    /// Checks the tree shape and the constraint mapping against `problem`,
    /// reporting every violation found.
    pub fn validate(&self, problem: &Problem) -> Result<(), HierarchyError> {
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(&n.id) {
                violations.push(Violation::DuplicateNode(n.id.clone()));
            }
        }
        let roots: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.parent.is_none())
            .map(|n| n.id.clone())
            .collect();
        match roots.len() {
            0 => violations.push(Violation::NoRoot),
            1 => {}
            _ => violations.push(Violation::MultipleRoots(roots.clone())),
        }
        for n in &self.nodes {
            if let Some(p) = &n.parent {
                if !self.index.contains_key(p) {
                    violations.push(Violation::UnknownParent {
                        node: n.id.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }
        for n in &self.nodes {
            match self.chain_end(&n.id) {
                ChainEnd::Root(r) if roots.len() > 1 && r != roots[0] => {
                    violations.push(Violation::Unreachable(n.id.clone()))
                }
                ChainEnd::Cycle => violations.push(Violation::Cycle(n.id.clone())),
                _ => {}
            }
        }
        for c in problem.constraints() {
            match self.leaf_of.get(&c.id) {
                None => violations.push(Violation::UnmappedConstraint(c.id)),
                Some(node) if !self.index.contains_key(node) => violations.push(Violation::UnknownLeafNode {
                    constraint: c.id,
                    node: node.clone(),
                }),
                Some(node) if self.has_children(node) => violations.push(Violation::NotALeaf {
                    constraint: c.id,
                    node: node.clone(),
                }),
                Some(_) => {}
            }
        }
        for &c in self.leaf_of.keys() {
            if problem.constraint(c).is_none() {
                violations.push(Violation::UnknownConstraint(c));
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(HierarchyError::Invalid(violations))
        }
    }

    fn chain_end(&self, start: &NodeId) -> ChainEnd {
        let mut current = start.clone();
        for _ in 0..=self.nodes.len() {
            match self.node(&current).map(|n| n.parent.clone()) {
                None => return ChainEnd::Dangling,
                Some(None) => return ChainEnd::Root(current),
                Some(Some(p)) => current = p,
            }
        }
        ChainEnd::Cycle
    }

    /// The first box on the way up from `c` that the view understands (the
    /// root when none is).
    pub fn project_one(&self, view: &UserView, c: ConstraintId) -> Result<&HierarchyNode, HierarchyError> {
        let mut current = self.leaf_of.get(&c).ok_or(HierarchyError::Unmapped(c))?;
        for _ in 0..=self.nodes.len() {
            let node = self
                .node(current)
                .ok_or_else(|| HierarchyError::UnknownNode(current.clone()))?;
            match &node.parent {
                None => return Ok(node),
                Some(_) if view.contains(&node.id) => return Ok(node),
                Some(p) => current = p,
            }
        }
        Err(HierarchyError::BrokenChain(current.clone()))
    }

    /// Sorted, deduplicated labels of the projections of `cs`.
    pub fn project(
        &self,
        view: &UserView,
        cs: impl IntoIterator<Item = ConstraintId>,
    ) -> Result<Vec<String>, HierarchyError> {
        let mut labels = BTreeSet::new();
        for c in cs {
            labels.insert(self.project_one(view, c)?.label.clone());
        }
        Ok(labels.into_iter().collect())
    }

    /// Projects every conflict and merges those that become identical,
    /// keeping how many were merged. Sorted by label set.
    pub fn project_conflicts<'a>(
        &self,
        view: &UserView,
        conflicts: impl IntoIterator<Item = &'a Explanation>,
    ) -> Result<Vec<(Vec<String>, usize)>, HierarchyError> {
        let mut merged: BTreeMap<Vec<String>, usize> = BTreeMap::new();
        for c in conflicts {
            *merged.entry(self.project(view, c.iter())?).or_default() += 1;
        }
        Ok(merged.into_iter().collect())
    }

    /// Constraints mapped to `node` or to any box below it.
    pub fn constraints_under(&self, node: &NodeId) -> Result<Vec<ConstraintId>, HierarchyError> {
        if !self.index.contains_key(node) {
            return Err(HierarchyError::UnknownNode(node.clone()));
        }
        Ok(self
            .leaf_of
            .iter()
            .filter(|(_, leaf)| self.is_under(leaf, node))
            .map(|(&c, _)| c)
            .collect())
    }

    fn is_under(&self, start: &NodeId, ancestor: &NodeId) -> bool {
        let mut current = Some(start.clone());
        for _ in 0..=self.nodes.len() {
            match current {
                None => return false,
                Some(ref n) if n == ancestor => return true,
                Some(n) => current = self.node(&n).and_then(|n| n.parent.clone()),
            }
        }
        false
    }
}

enum ChainEnd {
    Root(NodeId),
    Dangling,
    Cycle,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Problem, Relation, VariableId};

    /// Conference tree as described in prose; c1..c14 have ids 1..14.
    fn conference() -> (Problem, Hierarchy) {
        let mut p = Problem::build([("x", vec![1, 2])], 1).unwrap();
        for i in 1..=14 {
            p.add(format!("c{i}"), Relation::UnaryNeq(VariableId(0), 9)).unwrap();
        }
        let nodes = vec![
            HierarchyNode::new("root", "The conf. problem", None),
            HierarchyNode::new("implicit", "Implicit constraints", Some("root")),
            HierarchyNode::new("sva", "Speaker vs. Auditor", Some("implicit")),
            HierarchyNode::new("a2p", "Auditor vs. 2 pers.", Some("implicit")),
            HierarchyNode::new("before", "P&A before", Some("root")),
            HierarchyNode::new("not4", "Not 4th 1/2 day", Some("root")),
            HierarchyNode::new("notsame", "P&A not same time", Some("root")),
        ];
        let mut leaf_of = BTreeMap::new();
        for i in 1..=14u32 {
            let node = match i {
                1..=4 => "sva",
                5 => "a2p",
                6..=9 => "before",
                10..=13 => "not4",
                _ => "notsame",
            };
            leaf_of.insert(ConstraintId(i), NodeId::new(node));
        }
        (p, Hierarchy::new(nodes, leaf_of))
    }

    fn michael() -> UserView {
        UserView::new(["root", "before", "not4", "notsame"])
    }

    fn cs(ids: &[u32]) -> Vec<ConstraintId> {
        ids.iter().map(|&i| ConstraintId(i)).collect()
    }

    #[test]
    fn conference_hierarchy_is_valid() {
        let (p, h) = conference();
        h.validate(&p).unwrap();
    }

    #[test]
    fn michael_projection() {
        let (_, h) = conference();
        assert_eq!(
            h.project(&michael(), cs(&[1, 2, 3, 4, 5, 6])).unwrap(),
            vec!["P&A before".to_string(), "The conf. problem".to_string()]
        );
        assert_eq!(h.project(&michael(), cs(&[])).unwrap(), Vec::<String>::new());
    }

    #[test]
    fn own_leaf_in_view() {
        let (_, h) = conference();
        let view = UserView::new(["sva"]);
        assert_eq!(
            h.project(&view, cs(&[2])).unwrap(),
            vec!["Speaker vs. Auditor".to_string()]
        );
        assert_eq!(
            h.project(&UserView::root_only(), cs(&[2, 7, 14])).unwrap(),
            vec!["The conf. problem".to_string()]
        );
    }

    #[test]
    fn conflict_projection_multiplicity() {
        let (_, h) = conference();
        let conflicts = [Explanation::of(&[1, 6]), Explanation::of(&[2, 7])];
        assert_eq!(
            h.project_conflicts(&michael(), &conflicts).unwrap(),
            vec![(vec!["P&A before".to_string(), "The conf. problem".to_string()], 2)]
        );
    }

    #[test]
    fn validation_errors() {
        let (p, h) = conference();
        let mut mapping = h.mapping().clone();
        mapping.remove(&ConstraintId(3));
        let broken = Hierarchy::new(h.nodes().to_vec(), mapping);
        assert_eq!(
            broken.validate(&p),
            Err(HierarchyError::Invalid(vec![Violation::UnmappedConstraint(
                ConstraintId(3)
            )]))
        );

        let mut nodes = h.nodes().to_vec();
        nodes.push(HierarchyNode::new("other", "Another root", None));
        let two_roots = Hierarchy::new(nodes, h.mapping().clone());
        match two_roots.validate(&p) {
            Err(HierarchyError::Invalid(v)) => assert!(matches!(v[0], Violation::MultipleRoots(_))),
            other => panic!("expected violation, got {other:?}"),
        }

        let mut mapping = h.mapping().clone();
        mapping.insert(ConstraintId(1), NodeId::new("implicit"));
        let inner = Hierarchy::new(h.nodes().to_vec(), mapping);
        assert!(matches!(
            inner.validate(&p),
            Err(HierarchyError::Invalid(v)) if v == vec![Violation::NotALeaf { constraint: ConstraintId(1), node: NodeId::new("implicit") }]
        ));

        let cyc = Hierarchy::new(
            vec![
                HierarchyNode::new("root", "r", None),
                HierarchyNode::new("a", "a", Some("b")),
                HierarchyNode::new("b", "b", Some("a")),
            ],
            BTreeMap::new(),
        );
        let empty = Problem::build([("x", vec![1])], 1).unwrap();
        assert!(matches!(cyc.validate(&empty), Err(HierarchyError::Invalid(v)) if v.len() == 2));
    }

    #[test]
    fn subtree_constraints() {
        let (_, h) = conference();
        assert_eq!(
            h.constraints_under(&NodeId::new("implicit")).unwrap(),
            cs(&[1, 2, 3, 4, 5])
        );
        assert_eq!(h.constraints_under(&NodeId::new("notsame")).unwrap(), cs(&[14]));
        assert!(h.constraints_under(&NodeId::new("nope")).is_err());
    }

    #[test]
    fn unmapped_projection_errors() {
        let (_, h) = conference();
        assert_eq!(
            h.project(&michael(), cs(&[99])),
            Err(HierarchyError::Unmapped(ConstraintId(99)))
        );
    }
}
