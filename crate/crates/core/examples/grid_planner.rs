//! A* and Dijkstra on an occupancy grid built from a bundled world, drawn as ASCII.
//!
//! ```text
//! cargo run -p virtlab --example grid_planner [resolution]
//! ```

use std::collections::HashSet;

use virtlab::bundled::assignment;
use virtlab::reference::{grid_shortest_path, Algorithm, Connectivity, OccupancyGrid};

fn main() {
    let resolution: f64 = std::env::args().nth(1).map_or(0.25, |s| s.parse().expect("resolution"));
    let world = assignment("w3-slant").unwrap().world;

    for conn in [Connectivity::Four, Connectivity::Eight] {
        for alg in [Algorithm::Dijkstra, Algorithm::AStar] {
            let plan = grid_shortest_path(&world, resolution, conn, alg).expect("goal reachable");
            println!("{conn:?} {alg:?}: {:.3} m, {} cells expanded", plan.length, plan.expanded);
        }
    }

    let grid = OccupancyGrid::from_world(&world, resolution).unwrap();
    let plan = grid_shortest_path(&world, resolution, Connectivity::Eight, Algorithm::AStar).unwrap();
    let on_path: HashSet<_> = plan.path.iter().copied().collect();
    for y in (0..grid.height()).rev() {
        let row: String = (0..grid.width())
            .map(|x| match (grid.is_blocked((x, y)), on_path.contains(&(x, y))) {
                (true, _) => '#',
                (false, true) => '*',
                _ => '.',
            })
            .collect();
        println!("{row}");
    }
}
