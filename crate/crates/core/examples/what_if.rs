//! Ask what relaxing each constraint would do, then actually relax it on a
//! copy and compare. Predictions never propagate, so they can only
//! under-approximate what comes back.

use std::collections::BTreeSet;

use coins::scenario::CONFERENCE;
use coins::whatif::{self, RelaxEffect};
use coins::xstore::RemovalKey;
use coins::{Engine, Scenario, Session};

fn key(e: &Engine, k: RemovalKey) -> String {
    format!("{}={}", e.problem().variable_name(k.variable), k.value)
}

fn main() {
    let session = Session::new("w", Scenario::parse(CONFERENCE, Some(2)).unwrap());
    let e = session.engine();
    let active: Vec<_> = e
        .problem()
        .constraints()
        .filter(|c| e.problem().config().is_active(c.id))
        .map(|c| c.id)
        .collect();

    for c in active {
        let name = e.problem().constraint_name(c);
        let sim = whatif::simulate_relax(e, c).unwrap();
        let predicted: BTreeSet<RemovalKey> = sim.would_restore().collect();
        let kept = sim
            .outcomes
            .iter()
            .filter(|(_, o)| matches!(o, RelaxEffect::StaysRemoved(_)))
            .count();

        let mut real = e.clone();
        let out = real.relax(c).unwrap();
        let restored: BTreeSet<RemovalKey> = out.restored.iter().copied().collect();
        assert!(predicted.is_subset(&restored));

        let shown: Vec<String> = predicted.iter().map(|k| key(e, *k)).collect();
        println!(
            "relax {name:<4} predicted back {shown:?}, {kept} stay removed, failure persists: {} | actual: {} back, contradictory after: {}",
            sim.failure_persists,
            restored.len(),
            real.is_contradictory()
        );
        if sim.failure_persists {
            assert!(real.is_contradictory());
        }
    }

    println!();
    let relaxed: Vec<_> = e
        .problem()
        .constraints()
        .filter(|c| e.problem().config().is_relaxed(c.id))
        .map(|c| c.id)
        .collect();
    for c in relaxed {
        if e.is_contradictory() {
            println!(
                "reactivate {} is refused while the engine is contradictory",
                e.problem().constraint_name(c)
            );
            continue;
        }
        let sim = whatif::simulate_add(e, c).unwrap();
        println!(
            "reactivate {}: {} predicted removals",
            e.problem().constraint_name(c),
            sim.predictions.len()
        );
    }
    for c in e.problem().constraints().map(|c| c.id).take(14) {
        if let Ok(m) = whatif::in_conflict(e, c, coins::conflict::DEFAULT_CAP) {
            println!(
                "{:<4} in a conflict: {:<5} ({} conflicts)",
                e.problem().constraint_name(c),
                m.member,
                m.conflicts.len()
            );
        }
    }
}
