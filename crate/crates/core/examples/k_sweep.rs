//! Store size and query latency as k grows, on random problems. Prints a
//! table; there is nothing to pass or fail.
//!
//! cargo run --release --example k_sweep [-- INSTANCES]

use std::time::Instant;

use coins::conflict::{self, DEFAULT_CAP};
use coins::engine::SEARCH_LIMIT;
use coins::{whatif, Engine, Problem, Relation, VariableId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(rng: &mut ChaCha8Rng, k: usize) -> Problem {
    let n = rng.gen_range(4..=7);
    let vars: Vec<(String, Vec<i32>)> = (0..n)
        .map(|i| (format!("x{i}"), (1..=rng.gen_range(3..=5)).collect()))
        .collect();
    let mut p = Problem::build(vars, k).unwrap();
    for i in 0..rng.gen_range(6..=18) {
        let x = VariableId(rng.gen_range(0..n));
        let mut y = VariableId(rng.gen_range(0..n));
        while y == x {
            y = VariableId(rng.gen_range(0..n));
        }
        let r = match rng.gen_range(0..10) {
            0..=4 => Relation::Neq(x, y),
            5..=6 => Relation::Lt(x, y),
            7..=8 => Relation::Gt(x, y),
            _ => Relation::UnaryNeq(x, rng.gen_range(1..=3)),
        };
        p.add(format!("c{i}"), r).unwrap();
    }
    p
}

fn main() {
    let instances: u64 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(300);
    println!(
        "{:>2} {:>9} {:>12} {:>10} {:>12} {:>12}",
        "k", "failures", "explanations", "max size", "build us", "conflicts us"
    );
    for k in 1..=4 {
        let (mut failures, mut explanations, mut max_size) = (0, 0, 0);
        let (mut load, mut query) = (0u128, 0u128);
        for seed in 0..instances {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, k);
            let t = Instant::now();
            let mut e = Engine::new(p);
            e.propagate().unwrap();
            if !e.is_contradictory() {
                e.check_feasibility(SEARCH_LIMIT).unwrap();
            }
            // relax and reactivate a few constraints so that explanations
            // mentioning relaxed constraints accumulate
            for _ in 0..3 {
                let active: Vec<_> = e
                    .problem()
                    .constraints()
                    .filter(|c| e.problem().config().is_active(c.id) && !c.decision)
                    .map(|c| c.id)
                    .collect();
                let c = active[rng.gen_range(0..active.len())];
                e.relax(c).unwrap();
                if !e.is_contradictory() && rng.gen_bool(0.5) {
                    e.reactivate(c).unwrap();
                }
            }
            load += t.elapsed().as_micros();
            let stats = e.store().stats();
            explanations += stats.explanations;
            max_size = max_size.max(stats.max_explanation_size);
            if let Some(v) = e.status().contradiction_variable() {
                failures += 1;
                let t = Instant::now();
                conflict::enumerate_conflicts(&e, v, DEFAULT_CAP).unwrap();
                if let Some(c) = e.problem().active_constraints_on(v).next() {
                    whatif::simulate_relax(&e, c).unwrap();
                }
                query += t.elapsed().as_micros();
            }
        }
        println!(
            "{k:>2} {failures:>9} {:>12.1} {max_size:>10} {:>12.1} {:>12.1}",
            explanations as f64 / instances as f64,
            load as f64 / instances as f64,
            query as f64 / failures.max(1) as f64
        );
    }
}
