//! The same conflicts seen at different levels of understanding.

use coins::conflict::{self, DEFAULT_CAP};
use coins::hierarchy::UserView;
use coins::{Scenario, Session};

fn main() {
    let scenario = Scenario::conference();
    let session = Session::new("p", scenario.clone());
    let e = session.engine();
    let v = e.status().contradiction_variable().expect("contradictory");
    let set = conflict::enumerate_conflicts(e, v, DEFAULT_CAP).unwrap();
    let raw: Vec<_> = set.conflicts.iter().map(|c| c.constraints.clone()).collect();

    println!("hierarchy:");
    for n in scenario.hierarchy.nodes() {
        let under = scenario.hierarchy.constraints_under(&n.id).unwrap();
        println!("  {:<10} {:<28} {} constraints", n.id.0, n.label, under.len());
    }

    let mut views: Vec<(String, UserView)> = scenario.views.clone().into_iter().collect();
    views.push(("root only".into(), UserView::root_only()));
    views.push(("everything".into(), UserView::everything(&scenario.hierarchy)));
    for (name, view) in views {
        println!("\nview {name}:");
        for (labels, merged) in scenario.hierarchy.project_conflicts(&view, &raw).unwrap() {
            println!("  {labels:?} (from {merged})");
        }
    }
}
