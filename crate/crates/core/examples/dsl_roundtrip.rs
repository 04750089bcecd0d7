//! Parses, pretty-prints and steps a controller by hand; shows how errors are reported.

use virtlab::dsl::{init_state, parse, pretty_print, run_tick, TickInputs};
use virtlab::world::{Pose, Vec2};

const SOURCE: &str = "
state { turning = false; n = 0; }
tick {
  n = n + 1;
  if sensor(0) < 0.8 { turning = true; } else if sensor(0) > 1.5 { turning = false; }
  if turning { drive(0.3, -1.0); } else { drive(1.0, 0.0); }
}";

fn main() {
    let program = parse(SOURCE).expect("valid program");
    let text = pretty_print(&program);
    println!("{text}");
    assert_eq!(parse(&text).unwrap(), program);

    let mut inputs = TickInputs {
        sensors: vec![2.0, 2.0, 2.0],
        pose: Pose::new(0.0, 0.0, 0.0),
        goal: Vec2::new(10.0, 0.0),
        robot_radius: 0.2,
        tick: 1,
    };
    let mut state = init_state(&program, &inputs, 10_000).unwrap();
    for (tick, front) in [(1, 2.0), (2, 0.7), (3, 1.0), (4, 1.8)] {
        inputs.tick = tick;
        inputs.sensors[0] = front;
        let out = run_tick(&program, &mut state, &inputs, 10_000);
        let c = out.command.unwrap();
        println!("tick {tick}: front {front} -> drive({}, {}) in {} steps", c.v, c.omega, out.steps_used);
    }

    for bad in ["tick { drive(1.0 0.0); }", "tick { x = 1; }", "state { a = 1; }"] {
        match parse(bad) {
            Ok(_) => println!("{bad:?} parsed"),
            Err(e) => println!("{bad:?}\n  {e}"),
        }
    }
}
