//! How the number of conflicts found at the empty domain grows with k.
//! Every reported conflict is checked against brute force.

use coins::conflict::{self, DEFAULT_CAP};
use coins::scenario::CONFERENCE;
use coins::{oracle, Scenario, Session};

fn main() {
    for k in 1..=4 {
        let session = Session::new("k", Scenario::parse(CONFERENCE, Some(k)).unwrap());
        let e = session.engine();
        let Some(v) = e.status().contradiction_variable() else {
            println!("k={k}: consistent");
            continue;
        };
        let set = conflict::enumerate_conflicts(e, v, DEFAULT_CAP).unwrap();
        let classical = conflict::classical_conflict(e, v).unwrap().constraints;
        let sound = set.raw.iter().all(|c| oracle::is_nogood(e.problem(), c.constraints()));
        let sizes: Vec<usize> = set.conflicts.iter().map(|c| c.constraints.len()).collect();
        println!(
            "k={k}: {} combinations{}, {} distinct, {} minimal (sizes {sizes:?}), classical size {}, all nogoods: {sound}",
            set.raw_count,
            if set.truncated { " (truncated)" } else { "" },
            set.raw.len(),
            set.conflicts.len(),
            classical.len(),
        );
    }
}
