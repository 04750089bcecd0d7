//! Assignments, controllers and DSL programs shipped with the crate.
//!
//! The same files live under `assets/` so the service and CLI can load them
//! from disk as well.

use crate::dsl::{parse, Program};
use crate::grading::AssignmentSpec;

/// `(file name, contents)` of every bundled assignment, by id.
pub const ASSIGNMENTS: &[(&str, &str)] = &[
    ("w1-square.toml", include_str!("../assets/assignments/w1-square.toml")),
    ("w2-wall.toml", include_str!("../assets/assignments/w2-wall.toml")),
    ("w3-slant.toml", include_str!("../assets/assignments/w3-slant.toml")),
];

/// Bundled controllers: the Bug follower, the starter and the mutants.
pub const CONTROLLERS: &[(&str, &str)] = &[
    ("starter.rbt", include_str!("../assets/controllers/starter.rbt")),
    ("bug_follower.rbt", include_str!("../assets/controllers/bug_follower.rbt")),
    ("left_turn.rbt", include_str!("../assets/controllers/left_turn.rbt")),
    ("no_avoid.rbt", include_str!("../assets/controllers/no_avoid.rbt")),
    ("freeze.rbt", include_str!("../assets/controllers/freeze.rbt")),
    ("bang_bang.rbt", include_str!("../assets/controllers/bang_bang.rbt")),
    ("wanderer.rbt", include_str!("../assets/controllers/wanderer.rbt")),
];

/// Round-trip corpus; includes every controller as well.
pub const CORPUS: &[(&str, &str)] = &[
    ("01_idle.rbt", include_str!("../assets/corpus/01_idle.rbt")),
    ("02_straight.rbt", include_str!("../assets/corpus/02_straight.rbt")),
    ("03_spin.rbt", include_str!("../assets/corpus/03_spin.rbt")),
    ("04_counter.rbt", include_str!("../assets/corpus/04_counter.rbt")),
    ("05_go_to_goal.rbt", include_str!("../assets/corpus/05_go_to_goal.rbt")),
    ("06_precedence.rbt", include_str!("../assets/corpus/06_precedence.rbt")),
    ("07_logic.rbt", include_str!("../assets/corpus/07_logic.rbt")),
    ("08_else_if.rbt", include_str!("../assets/corpus/08_else_if.rbt")),
    ("09_while_sum.rbt", include_str!("../assets/corpus/09_while_sum.rbt")),
    ("10_nested.rbt", include_str!("../assets/corpus/10_nested.rbt")),
    ("11_unary.rbt", include_str!("../assets/corpus/11_unary.rbt")),
    ("12_math.rbt", include_str!("../assets/corpus/12_math.rbt")),
    ("13_ticks.rbt", include_str!("../assets/corpus/13_ticks.rbt")),
    ("14_radius.rbt", include_str!("../assets/corpus/14_radius.rbt")),
    ("15_state_init.rbt", include_str!("../assets/corpus/15_state_init.rbt")),
    ("16_comparisons.rbt", include_str!("../assets/corpus/16_comparisons.rbt")),
    ("17_numbers.rbt", include_str!("../assets/corpus/17_numbers.rbt")),
    ("18_loop_break_flag.rbt", include_str!("../assets/corpus/18_loop_break_flag.rbt")),
    ("19_scoped_lets.rbt", include_str!("../assets/corpus/19_scoped_lets.rbt")),
    ("20_empty_branches.rbt", include_str!("../assets/corpus/20_empty_branches.rbt")),
    ("21_mod_patterns.rbt", include_str!("../assets/corpus/21_mod_patterns.rbt")),
    ("22_parenthesized.rbt", include_str!("../assets/corpus/22_parenthesized.rbt")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Controller {
    Starter,
    BugFollower,
    LeftTurn,
    NoAvoid,
    Freeze,
    BangBang,
    Wanderer,
}

impl Controller {
    pub const MUTANTS: [Controller; 5] = [
        Controller::LeftTurn,
        Controller::NoAvoid,
        Controller::Freeze,
        Controller::BangBang,
        Controller::Wanderer,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Controller::Starter => "starter.rbt",
            Controller::BugFollower => "bug_follower.rbt",
            Controller::LeftTurn => "left_turn.rbt",
            Controller::NoAvoid => "no_avoid.rbt",
            Controller::Freeze => "freeze.rbt",
            Controller::BangBang => "bang_bang.rbt",
            Controller::Wanderer => "wanderer.rbt",
        }
    }

    pub fn source(self) -> &'static str {
        controller_source(self.file_name()).expect("every controller is bundled")
    }

    pub fn program(self) -> Program {
        parse(self.source()).expect("bundled controllers parse")
    }
}

pub fn controller_source(file_name: &str) -> Option<&'static str> {
    CONTROLLERS.iter().find(|(n, _)| *n == file_name).map(|(_, s)| *s)
}

/// Parses every bundled assignment, in id order.
pub fn assignments() -> Vec<AssignmentSpec> {
    ASSIGNMENTS
        .iter()
        .map(|(name, text)| {
            AssignmentSpec::parse(text, |rel| {
                let file = rel.rsplit('/').next().unwrap_or(rel);
                controller_source(file)
                    .map(str::to_string)
                    .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, rel.to_string()))
            })
            .unwrap_or_else(|e| panic!("bundled assignment {name}: {e}"))
        })
        .collect()
}

pub fn assignment(id: &str) -> Option<AssignmentSpec> {
    assignments().into_iter().find(|a| a.id == id)
}

/// The square-obstacle assignment used in most examples.
pub fn w1() -> AssignmentSpec {
    assignment("w1-square").expect("w1-square is bundled")
}
