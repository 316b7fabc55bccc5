//! k-relevant eliminating explanations, one record per value removal.
//!
//! Each record partitions its explanations into `k` buckets by the number of
//! relaxed constraints they contain. Bucket 0 holds the valid explanations;
//! anything that would need a bucket `>= k` is forgotten for good.
//!
//! The record also designates a *main* explanation: the one computed when the
//! value was removed. Later explanations in the engine are built from mains
//! only. The main is kept even when a strictly smaller explanation for the
//! same removal arrives afterwards (the buckets then hold the smaller one and
//! the main sits outside them as a superset of it). When the main stops being
//! valid it is replaced by the smallest valid explanation.
//!
//! Subsumption is applied eagerly on insertion across all buckets of a
//! record: an explanation is refused when a subset is already stored, and
//! stored supersets are dropped. A dropped superset is not brought back if
//! its subsumer is forgotten later.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{ConstraintId, VariableId};

/// A canonical (ascending, duplicate-free) set of constraint identifiers.
///
/// Explanations order by size first, then lexicographically by id sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Explanation(Vec<ConstraintId>);

impl Explanation {
    pub fn new(ids: impl IntoIterator<Item = ConstraintId>) -> Self {
        let mut v: Vec<ConstraintId> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Explanation(v)
    }

    /// Shorthand for tests and examples: `Explanation::of(&[1, 2])`.
    pub fn of(ids: &[u32]) -> Self {
        Self::new(ids.iter().map(|&i| ConstraintId(i)))
    }

    pub fn constraints(&self) -> &[ConstraintId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = ConstraintId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: ConstraintId) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn is_subset(&self, other: &Explanation) -> bool {
        if self.len() > other.len() {
            return false;
        }
        // both sides sorted: merge walk
        let mut it = other.0.iter();
        'outer: for c in &self.0 {
            for d in it.by_ref() {
                match d.cmp(c) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn is_proper_subset(&self, other: &Explanation) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn union(&self, other: &Explanation) -> Explanation {
        Explanation::new(self.iter().chain(other.iter()))
    }

    pub fn relaxed_count(&self, relaxed: &BTreeSet<ConstraintId>) -> usize {
        self.0.iter().filter(|c| relaxed.contains(c)).count()
    }
}

impl Ord for Explanation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Explanation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<ConstraintId> for Explanation {
    fn from_iter<T: IntoIterator<Item = ConstraintId>>(iter: T) -> Self {
        Explanation::new(iter)
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// Identifies one value removal `variable != value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RemovalKey {
    pub variable: VariableId,
    pub value: i32,
}

impl RemovalKey {
    pub fn new(variable: VariableId, value: i32) -> Self {
        RemovalKey { variable, value }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovalRecord {
    key: RemovalKey,
    main: Option<Explanation>,
    buckets: Vec<Vec<Explanation>>,
}

impl RemovalRecord {
    fn new(key: RemovalKey, k: usize) -> Self {
        RemovalRecord {
            key,
            main: None,
            buckets: vec![Vec::new(); k],
        }
    }

    pub fn key(&self) -> RemovalKey {
        self.key
    }

    pub fn main(&self) -> Option<&Explanation> {
        self.main.as_ref()
    }

    /// Explanations with exactly `i` relaxed constraints, sorted.
    pub fn bucket(&self, i: usize) -> &[Explanation] {
        self.buckets.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn buckets(&self) -> &[Vec<Explanation>] {
        &self.buckets
    }

    pub fn valid(&self) -> &[Explanation] {
        self.bucket(0)
    }

    pub fn explanations(&self) -> impl Iterator<Item = &Explanation> {
        self.buckets.iter().flatten()
    }

    fn insert_sorted(bucket: &mut Vec<Explanation>, e: Explanation) {
        if let Err(pos) = bucket.binary_search(&e) {
            bucket.insert(pos, e);
        }
    }

    fn is_empty(&self) -> bool {
        self.main.is_none() && self.buckets.iter().all(Vec::is_empty)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("constraint {0} is already relaxed")]
    AlreadyRelaxed(ConstraintId),
    #[error("constraint {0} is not relaxed")]
    NotRelaxed(ConstraintId),
}

/// Effect of relaxing one constraint on the store.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelaxDelta {
    /// Keys whose bucket 0 went from non-empty to empty; their values may be
    /// restored.
    pub emptied: Vec<RemovalKey>,
    /// Keys whose main became invalid while another valid explanation
    /// survived; paired with the new main.
    pub reassigned: Vec<(RemovalKey, Explanation)>,
    /// Explanations that left the k-relevant window.
    pub forgotten: Vec<(RemovalKey, Explanation)>,
}

impl RelaxDelta {
    pub fn is_empty(&self) -> bool {
        self.emptied.is_empty() && self.reassigned.is_empty() && self.forgotten.is_empty()
    }
}

/// Effect of reactivating one constraint on the store.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReactivateDelta {
    /// Present values that gained a valid explanation, with the smallest such
    /// explanation. The engine removes these values.
    pub forced: Vec<(RemovalKey, Explanation)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StoreStats {
    pub records: usize,
    pub explanations: usize,
    pub per_bucket: Vec<usize>,
    pub max_explanation_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Store {
    k: usize,
    records: BTreeMap<RemovalKey, RemovalRecord>,
}

impl Store {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "relevance bound must be at least 1");
        Store {
            k,
            records: BTreeMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn record(&self, key: RemovalKey) -> Option<&RemovalRecord> {
        self.records.get(&key)
    }

    pub fn records(&self) -> impl Iterator<Item = &RemovalRecord> {
        self.records.values()
    }

    pub fn main(&self, key: RemovalKey) -> Option<&Explanation> {
        self.records.get(&key).and_then(|r| r.main.as_ref())
    }

    /// Stores `e` for `key` if it is k-relevant and not subsumed.
    ///
    /// `relaxed` is the current relaxed set. When `is_removal_event` is set
    /// and the record has no main yet, `e` becomes the main.
    pub fn record_explanation(
        &mut self,
        key: RemovalKey,
        e: Explanation,
        relaxed: &BTreeSet<ConstraintId>,
        is_removal_event: bool,
    ) -> bool {
        let i = e.relaxed_count(relaxed);
        if i >= self.k {
            return false;
        }
        let k = self.k;
        let record = self.records.entry(key).or_insert_with(|| RemovalRecord::new(key, k));
        if is_removal_event && i == 0 && record.main.is_none() {
            record.main = Some(e.clone());
        }
        if record.explanations().any(|old| old.is_subset(&e)) {
            return false;
        }
        for bucket in &mut record.buckets {
            bucket.retain(|old| !e.is_proper_subset(old));
        }
        RemovalRecord::insert_sorted(&mut record.buckets[i], e);
        true
    }

    /// Sets the main explanation of a removal that is happening now. The
    /// explanation must already be stored in bucket 0.
    pub fn designate_main(&mut self, key: RemovalKey, e: Explanation) {
        let record = self.records.get_mut(&key).expect("designated key has a record");
        debug_assert!(record.buckets[0].contains(&e));
        record.main = Some(e);
    }

    /// Moves every explanation containing `c` one bucket up. `relaxed` is the
    /// relaxed set before `c` joins it.
    pub fn on_relax(&mut self, c: ConstraintId, relaxed: &BTreeSet<ConstraintId>) -> Result<RelaxDelta, StoreError> {
        if relaxed.contains(&c) {
            return Err(StoreError::AlreadyRelaxed(c));
        }
        let k = self.k;
        let mut delta = RelaxDelta::default();
        for record in self.records.values_mut() {
            let had_valid = !record.buckets[0].is_empty();
            let mut touched = false;
            // walk top-down so an explanation moves at most once
            for i in (0..k).rev() {
                let (moving, staying): (Vec<_>, Vec<_>) = std::mem::take(&mut record.buckets[i])
                    .into_iter()
                    .partition(|e| e.contains(c));
                record.buckets[i] = staying;
                for e in moving {
                    touched = true;
                    if i + 1 < k {
                        RemovalRecord::insert_sorted(&mut record.buckets[i + 1], e);
                    } else {
                        delta.forgotten.push((record.key, e));
                    }
                }
            }
            let main_invalid = record.main.as_ref().is_some_and(|m| m.contains(c));
            if main_invalid {
                record.main = record.buckets[0].first().cloned();
                if let Some(m) = &record.main {
                    delta.reassigned.push((record.key, m.clone()));
                }
            }
            if touched && had_valid && record.buckets[0].is_empty() {
                record.main = None;
                delta.emptied.push(record.key);
            }
        }
        self.records.retain(|_, r| !r.is_empty());
        Ok(delta)
    }

    /// Moves every explanation containing `c` one bucket down. `relaxed` is
    /// the relaxed set before `c` leaves it; `is_present` tells which values
    /// are currently in their domain.
    pub fn on_reactivate(
        &mut self,
        c: ConstraintId,
        relaxed: &BTreeSet<ConstraintId>,
        is_present: impl Fn(RemovalKey) -> bool,
    ) -> Result<ReactivateDelta, StoreError> {
        if !relaxed.contains(&c) {
            return Err(StoreError::NotRelaxed(c));
        }
        let mut delta = ReactivateDelta::default();
        for record in self.records.values_mut() {
            let mut gained: Option<Explanation> = None;
            for i in 1..self.k {
                let (moving, staying): (Vec<_>, Vec<_>) = std::mem::take(&mut record.buckets[i])
                    .into_iter()
                    .partition(|e| e.contains(c));
                record.buckets[i] = staying;
                for e in moving {
                    if i == 1 && gained.as_ref().is_none_or(|g| e < *g) {
                        gained = Some(e.clone());
                    }
                    RemovalRecord::insert_sorted(&mut record.buckets[i - 1], e);
                }
            }
            if let Some(e) = gained {
                if is_present(record.key) {
                    delta.forced.push((record.key, e));
                }
            }
        }
        Ok(delta)
    }

    /// Valid explanations for `key`, sorted by size then ids.
    pub fn valid_explanations(&self, key: RemovalKey) -> Vec<Explanation> {
        self.records.get(&key).map(|r| r.buckets[0].clone()).unwrap_or_default()
    }

    pub fn stats(&self) -> StoreStats {
        let mut stats = StoreStats {
            per_bucket: vec![0; self.k],
            ..StoreStats::default()
        };
        for record in self.records.values() {
            stats.records += 1;
            for (i, bucket) in record.buckets.iter().enumerate() {
                stats.per_bucket[i] += bucket.len();
                stats.explanations += bucket.len();
                for e in bucket {
                    stats.max_explanation_size = stats.max_explanation_size.max(e.len());
                }
            }
        }
        stats
    }

    /// Checks the bucket and subsumption invariants against `relaxed`, and
    /// that every main is valid and backed by a stored explanation.
    pub fn check_invariants(&self, relaxed: &BTreeSet<ConstraintId>) -> Result<(), String> {
        for record in self.records.values() {
            let key = record.key;
            if record.buckets.len() != self.k {
                return Err(format!("{key:?}: {} buckets for k={}", record.buckets.len(), self.k));
            }
            for (i, bucket) in record.buckets.iter().enumerate() {
                for e in bucket {
                    let n = e.relaxed_count(relaxed);
                    if n != i {
                        return Err(format!("{key:?}: {e} in bucket {i} has {n} relaxed"));
                    }
                }
                if bucket.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(format!("{key:?}: bucket {i} not sorted"));
                }
            }
            let all: Vec<&Explanation> = record.explanations().collect();
            for a in &all {
                for b in &all {
                    if a.is_proper_subset(b) {
                        return Err(format!("{key:?}: {a} subsumes stored {b}"));
                    }
                }
            }
            if let Some(main) = &record.main {
                if main.relaxed_count(relaxed) != 0 {
                    return Err(format!("{key:?}: main {main} is not valid"));
                }
                if !record.buckets[0].iter().any(|e| e.is_subset(main)) {
                    return Err(format!("{key:?}: main {main} not backed by bucket 0"));
                }
            }
        }
        Ok(())
    }
}
