//! Shared test support: a seeded random CSP generator and a reference
//! engine that keeps a single explanation per removal.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use coins::conflict::{self, DEFAULT_CAP};
use coins::engine::SEARCH_LIMIT;
use coins::xstore::RemovalKey;
use coins::{oracle, whatif, ConstraintId, Engine, Problem, Relation, VariableId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// At most 5 variables over at most 5 values, at most 12 constraints of
/// mixed kinds. Assignments are rare so that most instances stay open.
pub fn random_problem(rng: &mut ChaCha8Rng, k: usize) -> Problem {
    let n = rng.gen_range(2..=5);
    let vars: Vec<(String, Vec<i32>)> = (0..n)
        .map(|i| {
            let size = rng.gen_range(2..=5);
            let mut pool: Vec<i32> = (1..=5).collect();
            pool.shuffle(rng);
            pool.truncate(size);
            (format!("v{i}"), pool)
        })
        .collect();
    let mut p = Problem::build(vars, k).unwrap();
    let m = rng.gen_range(1..=12);
    for i in 0..m {
        let x = VariableId(rng.gen_range(0..n) as u32);
        let mut y = VariableId(rng.gen_range(0..n) as u32);
        while y == x {
            y = VariableId(rng.gen_range(0..n) as u32);
        }
        let pick = |rng: &mut ChaCha8Rng, v: VariableId| *p.domain(v).initial().choose(rng).unwrap();
        let relation = match rng.gen_range(0..20) {
            0..=4 => Relation::Neq(x, y),
            5..=7 => Relation::Gt(x, y),
            8..=10 => Relation::Lt(x, y),
            11..=14 => {
                let mut pairs = Vec::new();
                for &a in p.domain(x).initial() {
                    for &b in p.domain(y).initial() {
                        if rng.gen_bool(0.45) {
                            pairs.push((a, b));
                        }
                    }
                }
                Relation::Table(x, y, pairs)
            }
            15..=18 => Relation::UnaryNeq(x, pick(rng, x)),
            _ => Relation::Assign(x, pick(rng, x)),
        };
        p.add(format!("k{i}"), relation).unwrap();
    }
    p
}

/// Ids of every posted constraint.
pub fn all_ids(p: &Problem) -> Vec<ConstraintId> {
    p.constraints().map(|c| c.id).collect()
}

type Key = (usize, i32);
pub type Trace = Vec<(Key, Vec<u32>)>;

/// A propagation engine that remembers exactly one explanation per removed
/// value and stops at the first empty domain. Same revision order as the
/// engine under test: smallest pending constraint first, lower variable
/// first for binary constraints, values ascending.
pub struct Reference {
    initial: Vec<Vec<i32>>,
    present: Vec<BTreeSet<i32>>,
    constraints: BTreeMap<u32, Relation>,
    explanation: BTreeMap<Key, BTreeSet<u32>>,
    pub trace: Vec<(Key, Vec<u32>)>,
    pub failed: Option<usize>,
}

fn admits(r: &Relation, a: i32, b: i32) -> bool {
    match r {
        Relation::Neq(..) => a != b,
        Relation::Gt(..) => a > b,
        Relation::Lt(..) => a < b,
        Relation::Table(_, _, pairs) => pairs.iter().any(|&(p, q)| p == a && q == b),
        Relation::UnaryNeq(_, v) => a != *v,
        Relation::Assign(_, v) => a == *v,
    }
}

impl Reference {
    pub fn new(p: &Problem) -> Self {
        let initial: Vec<Vec<i32>> = p.variables().iter().map(|d| d.initial().to_vec()).collect();
        Reference {
            present: initial.iter().map(|d| d.iter().copied().collect()).collect(),
            initial,
            constraints: BTreeMap::new(),
            explanation: BTreeMap::new(),
            trace: Vec::new(),
            failed: None,
        }
    }

    pub fn post(&mut self, id: ConstraintId, r: Relation) {
        self.constraints.insert(id.0, r);
    }

    fn on(&self, v: usize) -> Vec<u32> {
        self.constraints
            .iter()
            .filter(|(_, r)| r.scope().iter().any(|x| x.index() == v))
            .map(|(&c, _)| c)
            .collect()
    }

    fn remove(&mut self, key: Key, e: BTreeSet<u32>, queue: &mut BTreeSet<u32>) -> bool {
        self.present[key.0].remove(&key.1);
        self.trace.push((key, e.iter().copied().collect()));
        self.explanation.insert(key, e);
        if self.present[key.0].is_empty() {
            self.failed = Some(key.0);
            return false;
        }
        queue.extend(self.on(key.0));
        true
    }

    pub fn propagate(&mut self) {
        if self.failed.is_some() {
            return;
        }
        let mut queue: BTreeSet<u32> = self.constraints.keys().copied().collect();
        while let Some(c) = queue.pop_first() {
            let r = self.constraints[&c].clone();
            let scope = r.scope();
            if scope.len() == 1 {
                let x = scope[0].index();
                for a in self.initial[x].clone() {
                    if self.present[x].contains(&a)
                        && !admits(&r, a, a)
                        && !self.remove((x, a), BTreeSet::from([c]), &mut queue)
                    {
                        return;
                    }
                }
                continue;
            }
            let (x, y) = (scope[0].index(), scope[1].index());
            let order = if x <= y {
                [(x, y, false), (y, x, true)]
            } else {
                [(y, x, true), (x, y, false)]
            };
            for (t, o, flipped) in order {
                for a in self.initial[t].clone() {
                    if !self.present[t].contains(&a) {
                        continue;
                    }
                    let compatible: Vec<i32> = self.initial[o]
                        .iter()
                        .copied()
                        .filter(|&b| if flipped { admits(&r, b, a) } else { admits(&r, a, b) })
                        .collect();
                    if compatible.iter().any(|b| self.present[o].contains(b)) {
                        continue;
                    }
                    let mut e = BTreeSet::from([c]);
                    for b in compatible {
                        e.extend(self.explanation[&(o, b)].iter().copied());
                    }
                    if !self.remove((t, a), e, &mut queue) {
                        return;
                    }
                }
            }
        }
    }
}

/// Every stored valid explanation and every enumerated conflict checked by
/// exhaustive enumeration. Returns the violations found.
pub fn soundness_violations(e: &Engine) -> Vec<String> {
    let p = e.problem();
    let mut bad = Vec::new();
    for r in e.store().records() {
        let key = r.key();
        for ex in r.bucket(0).iter().chain(r.main()) {
            if !oracle::forbids(p, ex.constraints(), key.variable, key.value) {
                bad.push(format!(
                    "{ex} does not forbid {}={}",
                    p.variable_name(key.variable),
                    key.value
                ));
            }
        }
    }
    if let Some(v) = e.status().contradiction_variable() {
        let set = conflict::enumerate_conflicts(e, v, DEFAULT_CAP).unwrap();
        for c in set.raw.iter().chain(set.conflicts.iter().map(|c| &c.constraints)) {
            if !oracle::is_nogood(p, c.constraints()) {
                bad.push(format!("conflict {c} has a solution"));
            }
        }
        let classical = conflict::classical_conflict(e, v).unwrap().constraints;
        if !oracle::is_nogood(p, classical.constraints()) {
            bad.push(format!("classical conflict {classical} has a solution"));
        }
    }
    bad
}

/// One random step: relax an active constraint, or reactivate a relaxed one
/// when the engine is consistent. Returns `false` when nothing applies.
pub fn random_step(e: &mut Engine, rng: &mut ChaCha8Rng) -> bool {
    let config = e.problem().config();
    let active: Vec<ConstraintId> = config.active.iter().copied().collect();
    let relaxed: Vec<ConstraintId> = config.relaxed.iter().copied().collect();
    let can_reactivate = !relaxed.is_empty() && !e.is_contradictory();
    if active.is_empty() && !can_reactivate {
        return false;
    }
    if can_reactivate && (active.is_empty() || rng.gen_bool(0.4)) {
        let c = *relaxed.choose(rng).unwrap();
        e.reactivate(c).unwrap();
    } else {
        let c = *active.choose(rng).unwrap();
        e.relax(c).unwrap();
    }
    true
}

/// Random relax/reactivate steps comparing every simulation with the real
/// operation. Returns the number of compared operations.
pub fn simulation_episode(seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=3);
    let mut e = Engine::new(random_problem(&mut rng, k));
    e.propagate().unwrap();
    if rng.gen_bool(0.5) && !e.is_contradictory() {
        e.check_feasibility(SEARCH_LIMIT).unwrap();
    }
    let mut compared = 0;
    for _ in 0..rng.gen_range(4..=12) {
        let config = e.problem().config();
        let active: Vec<ConstraintId> = config.active.iter().copied().collect();
        let relaxed: Vec<ConstraintId> = config.relaxed.iter().copied().collect();
        let reactivate = !relaxed.is_empty() && !e.is_contradictory() && (active.is_empty() || rng.gen_bool(0.5));
        if reactivate {
            let c = *relaxed.choose(&mut rng).unwrap();
            let sim = whatif::simulate_add(&e, c).unwrap();
            let out = e.reactivate(c).unwrap();
            let actual: BTreeSet<RemovalKey> = out.removed.iter().copied().collect();
            for (key, _) in &sim.predictions {
                if !actual.contains(key) {
                    return Err(format!("seed {seed}: predicted removal {key:?} did not happen"));
                }
            }
            if sim.predicted_failure && !out.status.is_contradictory() {
                return Err(format!("seed {seed}: predicted failure did not happen"));
            }
        } else if !active.is_empty() {
            let c = *active.choose(&mut rng).unwrap();
            let sim = whatif::simulate_relax(&e, c).unwrap();
            let out = e.relax(c).unwrap();
            let actual: BTreeSet<RemovalKey> = out.restored.iter().copied().collect();
            for key in sim.would_restore() {
                if !actual.contains(&key) {
                    return Err(format!("seed {seed}: predicted restoration {key:?} did not happen"));
                }
            }
            if sim.failure_persists && !out.status.is_contradictory() {
                return Err(format!("seed {seed}: failure was predicted to persist"));
            }
        } else {
            break;
        }
        compared += 1;
    }
    Ok(compared)
}

/// Engine and reference removal traces on the same instance.
pub fn traces(p: &Problem) -> (Trace, Trace) {
    let mut e = Engine::new(p.clone());
    e.propagate().unwrap();
    let mut r = Reference::new(p);
    for c in p.constraints() {
        r.post(c.id, c.relation.clone());
    }
    r.propagate();
    let got = e
        .trace()
        .iter()
        .map(|ev| {
            (
                (ev.key.variable.index(), ev.key.value),
                ev.explanation.iter().map(|c| c.0).collect(),
            )
        })
        .collect();
    (got, r.trace)
}

/// Random command sequence checking every engine invariant after each step.
pub fn invariant_sequence(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=4);
    let mut e = Engine::new(random_problem(&mut rng, k));
    e.propagate().unwrap();
    e.check_invariants()
        .map_err(|m| format!("seed {seed} after propagate: {m}"))?;
    for step in 0..rng.gen_range(1..=15) {
        if rng.gen_bool(0.1) && !e.is_contradictory() {
            e.check_feasibility(SEARCH_LIMIT).unwrap();
        } else if !random_step(&mut e, &mut rng) {
            break;
        }
        e.check_invariants()
            .map_err(|m| format!("seed {seed} step {step}: {m}"))?;
    }
    Ok(())
}

/// Mostly disequalities over small domains: often arc consistent yet
/// infeasible, so only search decides them.
pub fn random_coloring(rng: &mut ChaCha8Rng, k: usize) -> Problem {
    let n = rng.gen_range(3..=5);
    let colors = rng.gen_range(2..=3);
    let vars: Vec<(String, Vec<i32>)> = (0..n).map(|i| (format!("n{i}"), (1..=colors).collect())).collect();
    let mut p = Problem::build(vars, k).unwrap();
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen_bool(0.7) {
                p.add(
                    format!("e{x}{y}"),
                    Relation::Neq(VariableId(x as u32), VariableId(y as u32)),
                )
                .unwrap();
            }
        }
    }
    if rng.gen_bool(0.3) {
        let x = VariableId(rng.gen_range(0..n) as u32);
        p.add("pin", Relation::UnaryNeq(x, 1)).unwrap();
    }
    p
}
