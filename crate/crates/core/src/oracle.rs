//! Exhaustive solution enumeration over initial domains.
//!
//! Every claim the engine makes (an explanation forbids a value, a conflict
//! admits no solution) can be checked here by walking all total assignments.
//! Nothing in this module touches propagation state.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{eval_constraint, ConstraintId, ConstraintSpec, Problem, VariableId};

/// Walks every assignment of `vars` (over their initial domains) with the
/// values in `fixed` pinned, and calls `visit` on those satisfying all of
/// `constraints`. Stops early when `visit` returns `false`.
fn walk(
    problem: &Problem,
    vars: &[VariableId],
    fixed: &BTreeMap<VariableId, i32>,
    constraints: &[&ConstraintSpec],
    mut visit: impl FnMut(&BTreeMap<VariableId, i32>) -> bool,
) {
    let free: Vec<VariableId> = vars.iter().copied().filter(|v| !fixed.contains_key(v)).collect();
    let domains: Vec<&[i32]> = free.iter().map(|&v| problem.domain(v).initial()).collect();
    let mut digits = vec![0usize; free.len()];
    let mut assignment = fixed.clone();
    loop {
        for (i, &v) in free.iter().enumerate() {
            assignment.insert(v, domains[i][digits[i]]);
        }
        let ok = constraints
            .iter()
            .all(|c| eval_constraint(c, &assignment).expect("scope covered"));
        if ok && !visit(&assignment) {
            return;
        }
        // odometer, last digit fastest
        let mut pos = free.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < domains[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn specs<'a>(problem: &'a Problem, constraints: &[ConstraintId]) -> Vec<&'a ConstraintSpec> {
    constraints
        .iter()
        .map(|&c| problem.constraint(c).expect("constraint posted"))
        .collect()
}

fn scope_of(specs: &[&ConstraintSpec]) -> BTreeSet<VariableId> {
    specs.iter().flat_map(|c| c.relation.scope()).collect()
}

/// Number of total assignments of all variables satisfying `constraints`.
pub fn count_solutions(problem: &Problem, constraints: &[ConstraintId]) -> u64 {
    let specs = specs(problem, constraints);
    let vars: Vec<VariableId> = problem.variables().iter().map(|d| d.variable).collect();
    let mut count = 0u64;
    walk(problem, &vars, &BTreeMap::new(), &specs, |_| {
        count += 1;
        true
    });
    count
}

/// All solutions of every posted constraint, as value vectors in variable order.
pub fn all_solutions(problem: &Problem) -> Vec<Vec<i32>> {
    let ids: Vec<ConstraintId> = problem.constraints().map(|c| c.id).collect();
    let specs = specs(problem, &ids);
    let vars: Vec<VariableId> = problem.variables().iter().map(|d| d.variable).collect();
    let mut out = Vec::new();
    walk(problem, &vars, &BTreeMap::new(), &specs, |a| {
        out.push(a.values().copied().collect());
        true
    });
    out
}

/// `true` iff `constraints` alone admit no solution.
///
/// Variables outside the constraints' scope are unconstrained with non-empty
/// domains, so it is enough to enumerate the variables in scope.
pub fn is_nogood(problem: &Problem, constraints: &[ConstraintId]) -> bool {
    let specs = specs(problem, constraints);
    let vars: Vec<VariableId> = scope_of(&specs).into_iter().collect();
    let mut found = false;
    walk(problem, &vars, &BTreeMap::new(), &specs, |_| {
        found = true;
        false
    });
    !found
}

/// `true` iff `constraints` admit no solution where `v = value`, i.e. the set
/// is a sound eliminating explanation for removing `value` from `v`.
pub fn forbids(problem: &Problem, constraints: &[ConstraintId], v: VariableId, value: i32) -> bool {
    let specs = specs(problem, constraints);
    let mut vars = scope_of(&specs);
    vars.insert(v);
    let vars: Vec<VariableId> = vars.into_iter().collect();
    let fixed = BTreeMap::from([(v, value)]);
    let mut found = false;
    walk(problem, &vars, &fixed, &specs, |_| {
        found = true;
        false
    });
    !found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Relation;

    #[test]
    fn counts_simple_problem() {
        let mut p = Problem::build([("x", vec![1, 2, 3]), ("y", vec![1, 2, 3])], 1).unwrap();
        let (x, y) = (VariableId(0), VariableId(1));
        let c = p.add("lt", Relation::Lt(x, y)).unwrap();
        assert_eq!(count_solutions(&p, &[]), 9);
        assert_eq!(count_solutions(&p, &[c]), 3);
        assert_eq!(all_solutions(&p), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn nogood_and_forbids() {
        let mut p = Problem::build([("x", vec![1, 2]), ("y", vec![1, 2])], 1).unwrap();
        let (x, y) = (VariableId(0), VariableId(1));
        let gt = p.add("gt", Relation::Gt(x, y)).unwrap();
        let lt = p.add("lt", Relation::Lt(x, y)).unwrap();
        assert!(is_nogood(&p, &[gt, lt]));
        assert!(!is_nogood(&p, &[gt]));
        assert!(!is_nogood(&p, &[]));
        assert!(forbids(&p, &[gt], x, 1));
        assert!(!forbids(&p, &[gt], x, 2));
        assert!(forbids(&p, &[gt], y, 2));
    }
}
