//! The explanation store on its own: record explanations for one removal,
//! then watch them move between buckets as constraints are relaxed and
//! reactivated.

use std::collections::BTreeSet;

use coins::xstore::{Explanation, RemovalKey, Store};
use coins::{ConstraintId, VariableId};

fn show(store: &Store, key: RemovalKey, relaxed: &BTreeSet<ConstraintId>) {
    let r = store.record(key).unwrap();
    println!("  relaxed {relaxed:?}");
    println!("  main    {}", r.main().map(|e| e.to_string()).unwrap_or("-".into()));
    for (i, b) in r.buckets().iter().enumerate() {
        let v: Vec<String> = b.iter().map(|e| e.to_string()).collect();
        println!("  bucket{i} {}", v.join(" "));
    }
}

fn main() {
    let key = RemovalKey::new(VariableId(0), 1);
    let mut relaxed: BTreeSet<ConstraintId> = [ConstraintId(3)].into();
    let mut store = Store::new(2);

    for (ids, first) in [
        (&[0, 1, 2][..], true),
        (&[2, 4], false),
        (&[1, 3], false),
        (&[2, 3], false),
        (&[0, 1, 2, 4], false),
    ] {
        let kept = store.record_explanation(key, Explanation::of(ids), &relaxed, first);
        println!("record {:<14} kept: {kept}", Explanation::of(ids).to_string());
    }
    show(&store, key, &relaxed);

    println!("\nrelax c1");
    let delta = store.on_relax(ConstraintId(1), &relaxed).unwrap();
    relaxed.insert(ConstraintId(1));
    for (_, e) in &delta.forgotten {
        println!("  forgotten {e}");
    }
    show(&store, key, &relaxed);

    println!("\nreactivate c3");
    store.on_reactivate(ConstraintId(3), &relaxed, |_| false).unwrap();
    relaxed.remove(&ConstraintId(3));
    show(&store, key, &relaxed);
    store.check_invariants(&relaxed).unwrap();
}
