//! Loads a world from TOML, validates it and casts the start pose's sensor rays.
//!
//! ```text
//! cargo run -p virtlab --example load_world [world.toml]
//! ```

use virtlab::world::{load_world, raycast_hit};

const DEFAULT: &str = r#"
arena = { min = [-1, -3], max = [11, 3] }
start = { pos = [0, 0], heading = 0 }
goal = { pos = [10, 0], radius = 0.3 }

[[obstacle]]
vertices = [[4, -1], [6, -1], [6, 1], [4, 1]]
"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => DEFAULT.to_string(),
    };
    let world = match load_world(&text) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("invalid world: {e}");
            std::process::exit(1);
        }
    };
    println!(
        "arena {}x{} m, {} obstacle(s), robot radius {}",
        world.arena.width(),
        world.arena.height(),
        world.obstacles.len(),
        world.robot_radius
    );
    let p = world.start.position;
    for (i, offset) in world.sensor_layout.iter().enumerate() {
        let hit = raycast_hit(&world, p, world.start.heading + offset, world.sensor_max_range);
        println!("sensor {i} at {:+.3} rad: {:.3} m ({:?})", offset, hit.distance, hit.hit);
    }

    // a start pose inside the obstacle is rejected with the violated rule
    let bad = text.replace("pos = [0, 0]", "pos = [5, 0]");
    if let Err(e) = load_world(&bad) {
        println!("moved start: {e}");
    }
}
