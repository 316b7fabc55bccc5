//! Drive a session with protocol lines, then rebuild it from its log and
//! check that the digests agree. Also shows the multi-session host.

use coins::host::SessionHost;
use coins::{Scenario, Session};

const SCRIPT: &[&str] = &[
    "domains",
    "why-not Mp 1",
    r#"{"op":"simulate-relax","constraint":"c5"}"#,
    "relax c5",
    "digest",
    "frobnicate",
    "set-view michael",
    "project-explanation Ma 1",
];

fn main() {
    let mut live = Session::new("demo", Scenario::conference());
    for line in SCRIPT {
        println!("> {line}\n< {}", live.handle_line(line));
    }

    let (replayed, _) = Session::replay("demo", Scenario::conference(), live.log());
    println!("\nlog has {} lines", live.log().len());
    println!("live     {}", live.digest());
    println!("replayed {}", replayed.digest());
    assert_eq!(live.digest(), replayed.digest());

    let host = SessionHost::new(Scenario::conference());
    println!("\n< {}", host.handle_line(r#"{"op":"open"}"#));
    println!(
        "< {}",
        host.handle_line(r#"{"op":"relax","constraint":"c3","session":"s1"}"#)
    );
    println!("sessions {:?}", host.session_ids());
}
