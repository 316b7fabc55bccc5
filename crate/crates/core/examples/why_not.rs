//! Why is a value not available? Lists every valid explanation for each
//! removed value, raw and projected onto a user view.
//!
//! cargo run --example why_not [-- VIEW]

use coins::{whatif, Scenario, Session};

fn main() {
    let view_name = std::env::args().nth(1).unwrap_or_else(|| "michael".into());
    let scenario = Scenario::conference();
    let view = scenario
        .views
        .get(&view_name)
        .unwrap_or_else(|| panic!("no view `{view_name}`"))
        .clone();
    let session = Session::new("y", scenario.clone());
    let e = session.engine();
    let p = e.problem();

    for (v, d) in p.variables().iter().enumerate() {
        let v = coins::VariableId(v as u32);
        for value in d.initial() {
            let diag = whatif::why_not(e, v, *value).unwrap();
            if diag.is_available() {
                println!("{}={value}: available", p.variable_name(v));
                continue;
            }
            let diag = diag.project(&scenario.hierarchy, &view).unwrap();
            println!("{}={value}:", p.variable_name(v));
            for (x, labels) in diag.explanations.iter().zip(diag.projected.as_ref().unwrap()) {
                let names: Vec<String> = x.iter().map(|c| p.constraint_name(c)).collect();
                let tag = if diag.is_main(x) { " (main)" } else { "" };
                println!("    {:?}{tag} -> {labels:?}", names);
            }
        }
    }
}
