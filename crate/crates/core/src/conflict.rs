//! Conflicts derived from an empty domain.
//!
//! Every value of the wiped-out variable contributes one of its valid
//! explanations; the union of one choice per value is a nogood. The number
//! of raw combinations is the product of the per-value explanation counts,
//! so enumeration is capped.

use std::collections::BTreeSet;

use crate::engine::{Engine, EngineError};
use crate::model::VariableId;
use crate::xstore::{Explanation, RemovalKey};

pub const DEFAULT_CAP: usize = 64;

/// A nogood: the constraint set alone admits no solution.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Conflict {
    pub constraints: Explanation,
    pub source: VariableId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictSet {
    pub source: VariableId,
    /// Subsumption-minimized conflicts, sorted by size then ids.
    pub conflicts: Vec<Conflict>,
    /// Distinct unions among the generated combinations, sorted.
    pub raw: Vec<Explanation>,
    /// Size of the full product (saturating).
    pub raw_count: u64,
    pub truncated: bool,
    pub cap: usize,
}

/// Result of walking the product of per-value explanation lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combinations {
    /// Unions in generation order, duplicates included.
    pub unions: Vec<Explanation>,
    pub raw_count: u64,
    pub truncated: bool,
}

/// Walks the product odometer style (last list fastest), generating at most
/// `cap` unions.
pub fn combine(per_value: &[Vec<Explanation>], cap: usize) -> Combinations {
    let raw_count = per_value.iter().fold(1u64, |acc, l| acc.saturating_mul(l.len() as u64));
    let mut unions = Vec::new();
    if per_value.iter().all(|l| !l.is_empty()) {
        let mut digits = vec![0usize; per_value.len()];
        'walk: while unions.len() < cap {
            let union: Explanation = per_value.iter().zip(&digits).flat_map(|(l, &d)| l[d].iter()).collect();
            unions.push(union);
            let mut pos = digits.len();
            loop {
                if pos == 0 {
                    break 'walk;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < per_value[pos].len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }
    Combinations {
        truncated: raw_count > cap as u64,
        unions,
        raw_count,
    }
}

/// Keeps the members of `sets` that have no proper subset among them,
/// deduplicated and sorted.
pub fn minimize(sets: impl IntoIterator<Item = Explanation>) -> Vec<Explanation> {
    let distinct: BTreeSet<Explanation> = sets.into_iter().collect();
    let mut kept: Vec<Explanation> = Vec::new();
    // ascending size: any subset of a set is visited before it
    for s in distinct {
        if !kept.iter().any(|k| k.is_subset(&s)) {
            kept.push(s);
        }
    }
    kept
}

fn wiped_out(engine: &Engine, v: VariableId) -> Result<(), EngineError> {
    if engine.problem().domain(v).is_empty() {
        Ok(())
    } else {
        Err(EngineError::DomainNotEmpty(v))
    }
}

fn valid_per_value(engine: &Engine, v: VariableId) -> Result<Vec<Vec<Explanation>>, EngineError> {
    engine
        .problem()
        .domain(v)
        .initial()
        .iter()
        .map(|&a| {
            let key = RemovalKey::new(v, a);
            let valid = engine.store().valid_explanations(key);
            if valid.is_empty() {
                Err(EngineError::MissingExplanation(key))
            } else {
                Ok(valid)
            }
        })
        .collect()
}

/// Enumerates the conflicts obtainable from the empty domain of `v`.
pub fn enumerate_conflicts(engine: &Engine, v: VariableId, cap: usize) -> Result<ConflictSet, EngineError> {
    wiped_out(engine, v)?;
    let per_value = valid_per_value(engine, v)?;
    let combos = combine(&per_value, cap);
    let raw: Vec<Explanation> = combos
        .unions
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let conflicts = minimize(raw.iter().cloned())
        .into_iter()
        .map(|constraints| Conflict { constraints, source: v })
        .collect();
    Ok(ConflictSet {
        source: v,
        conflicts,
        raw,
        raw_count: combos.raw_count,
        truncated: combos.truncated,
        cap,
    })
}

/// The single conflict a one-explanation-per-removal solver would report:
/// the union of the main explanations.
pub fn classical_conflict(engine: &Engine, v: VariableId) -> Result<Conflict, EngineError> {
    wiped_out(engine, v)?;
    let mut ids = Vec::new();
    for &a in engine.problem().domain(v).initial() {
        let key = RemovalKey::new(v, a);
        let main = engine.store().main(key).ok_or(EngineError::MissingExplanation(key))?;
        ids.extend(main.iter());
    }
    Ok(Conflict {
        constraints: Explanation::new(ids),
        source: v,
    })
}

/// `e1` is more precise than `e2` when it is a proper subset.
pub fn more_precise(e1: &Explanation, e2: &Explanation) -> bool {
    e1.is_proper_subset(e2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Problem, Relation};

    fn ex(ids: &[u32]) -> Explanation {
        Explanation::of(ids)
    }

    #[test]
    fn product_of_two_by_two() {
        // c is id 0
        let per_value = vec![vec![ex(&[2, 4]), ex(&[0, 1, 2])], vec![ex(&[1, 5]), ex(&[2, 5])]];
        let combos = combine(&per_value, DEFAULT_CAP);
        assert_eq!(combos.raw_count, 4);
        assert!(!combos.truncated);
        let got: BTreeSet<_> = combos.unions.iter().cloned().collect();
        let want: BTreeSet<_> = [
            ex(&[0, 1, 2]).union(&ex(&[1, 5])),
            ex(&[0, 1, 2]).union(&ex(&[2, 5])),
            ex(&[2, 4]).union(&ex(&[1, 5])),
            ex(&[2, 4]).union(&ex(&[2, 5])),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
        assert_eq!(combos.unions.len(), 4);
        assert_eq!(minimize(combos.unions), vec![ex(&[2, 4, 5]), ex(&[0, 1, 2, 5])]);
    }

    #[test]
    fn single_choice() {
        let combos = combine(&[vec![ex(&[1])]], 8);
        assert_eq!(combos.unions, vec![ex(&[1])]);
        assert_eq!(combos.raw_count, 1);
    }

    #[test]
    fn cap_truncates() {
        let l = vec![ex(&[1]), ex(&[2]), ex(&[3])];
        let combos = combine(&[l.clone(), l.clone(), l], 5);
        assert_eq!(combos.raw_count, 27);
        assert!(combos.truncated);
        assert_eq!(combos.unions.len(), 5);
    }

    #[test]
    fn precision_order() {
        assert!(more_precise(&ex(&[1, 4, 6]), &ex(&[1, 2, 4, 6])));
        assert!(!more_precise(&ex(&[1, 4]), &ex(&[1, 4])));
        assert!(!more_precise(&ex(&[1]), &ex(&[2])));
    }

    #[test]
    fn engine_level_queries() {
        let p = Problem::build([("x", vec![1])], 1).unwrap();
        let mut e = Engine::new(p);
        let x = VariableId(0);
        let c = e.add("no", Relation::UnaryNeq(x, 1)).unwrap();
        e.propagate().unwrap();
        let set = enumerate_conflicts(&e, x, DEFAULT_CAP).unwrap();
        assert_eq!(
            set.conflicts,
            vec![Conflict {
                constraints: Explanation::new([c]),
                source: x
            }]
        );
        assert_eq!(classical_conflict(&e, x).unwrap().constraints, Explanation::new([c]));

        let p = Problem::build([("y", vec![1, 2])], 1).unwrap();
        let e = Engine::new(p);
        assert_eq!(
            enumerate_conflicts(&e, VariableId(0), 4),
            Err(EngineError::DomainNotEmpty(VariableId(0)))
        );
        assert_eq!(
            classical_conflict(&e, VariableId(0)),
            Err(EngineError::DomainNotEmpty(VariableId(0)))
        );
    }
}
