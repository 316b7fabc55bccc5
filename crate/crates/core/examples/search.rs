//! Dynamic backtracking over an arc consistent colouring problem. The graph
//! is a 4-clique with 3 colours, so propagation alone proves nothing; the
//! search retracts decisions one at a time and ends with a conflict that
//! mentions no decision.

use coins::engine::{SolveOutcome, SEARCH_LIMIT};
use coins::{conflict, Engine, Problem, Relation, VariableId};

fn clique(n: u32, colours: i32) -> Problem {
    let mut p = Problem::build((0..n).map(|i| (format!("n{i}"), (1..=colours).collect())), 2).unwrap();
    for x in 0..n {
        for y in x + 1..n {
            p.add(format!("e{x}{y}"), Relation::Neq(VariableId(x), VariableId(y)))
                .unwrap();
        }
    }
    p
}

fn main() {
    for (n, colours) in [(4, 4), (4, 3), (5, 4)] {
        let mut e = Engine::new(clique(n, colours));
        e.propagate().unwrap();
        let report = e.solve(SEARCH_LIMIT).unwrap();
        print!(
            "K{n} with {colours} colours: {} decisions, {} backtracks, ",
            report.decisions, report.backtracks
        );
        match report.outcome {
            SolveOutcome::Solution(sol) => {
                let shown: Vec<String> = sol
                    .iter()
                    .map(|(v, a)| format!("{}={a}", e.problem().variable_name(*v)))
                    .collect();
                println!("solution {}", shown.join(" "));
            }
            SolveOutcome::Infeasible(v) => {
                let set = conflict::enumerate_conflicts(&e, v, conflict::DEFAULT_CAP).unwrap();
                let c = &set.conflicts[0].constraints;
                let names: Vec<String> = c.iter().map(|c| e.problem().constraint_name(c)).collect();
                println!("infeasible, conflict {names:?}");
            }
        }
    }
}
