//! Load the seminar scheduling problem, find out that it has no solution and
//! list the conflicts behind the empty domain.
//!
//! cargo run --example conference [-- K]

use coins::conflict::{self, DEFAULT_CAP};
use coins::scenario::CONFERENCE;
use coins::{Explanation, Problem, Scenario, Session};

fn names(p: &Problem, e: &Explanation) -> String {
    let v: Vec<String> = e.iter().map(|c| p.constraint_name(c)).collect();
    format!("{{{}}}", v.join(", "))
}

fn main() {
    let k = std::env::args().nth(1).map(|s| s.parse().expect("k must be a number"));
    let session = Session::new("demo", Scenario::parse(CONFERENCE, k).unwrap());
    let e = session.engine();
    let p = e.problem();

    println!("k = {}", p.k());
    for (v, values) in e.domains() {
        println!("  {:<3} {:?}", p.variable_name(v), values);
    }
    let decisions: Vec<String> = p
        .constraints()
        .filter(|c| p.config().is_relaxed(c.id))
        .map(|c| c.name.clone())
        .collect();
    println!("retracted search decisions: {decisions:?}");

    let Some(v) = e.status().contradiction_variable() else {
        println!("consistent");
        return;
    };
    println!("\nno solution: domain of {} is empty", p.variable_name(v));
    let set = conflict::enumerate_conflicts(e, v, DEFAULT_CAP).unwrap();
    println!("{} combinations, {} distinct", set.raw_count, set.raw.len());
    for c in &set.conflicts {
        println!("  minimal   {}", names(p, &c.constraints));
    }
    let classical = conflict::classical_conflict(e, v).unwrap();
    println!("  classical {}", names(p, &classical.constraints));
    for r in &set.raw {
        if conflict::more_precise(r, &classical.constraints) {
            println!("  strictly inside the classical one: {}", names(p, r));
        }
    }
}
