//! Runs the bundled wall follower on W1 and prints a sparse replay.
//!
//! ```text
//! cargo run -p virtlab --example simulate_episode [trace.json]
//! ```

use virtlab::bundled::{w1, Controller};
use virtlab::sim::{replay_frames, run_episode};

fn main() {
    let a = w1();
    let trace = run_episode(&a.world, &Controller::BugFollower.program(), &a.sim);
    println!(
        "{} after {} ticks, path {:.3} m, digest {}",
        trace.termination,
        trace.last().tick,
        trace.path_length,
        &trace.digest()[..16]
    );
    for f in replay_frames(&trace, 25) {
        println!(
            "tick {:>4}  x {:>6.2}  y {:>6.2}  heading {:>6.2}  {:?}",
            f.tick, f.pose.position.x, f.pose.position.y, f.pose.heading, f.events
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, trace.to_json_pretty()).unwrap();
        println!("wrote {path}");
    }
}
