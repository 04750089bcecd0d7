//! A deterministic virtual robotics lab.
//!
//! Students write controllers in a small language ([`dsl`]); the [`sim`]
//! module drives a disc robot through a 2D [`world`] with range sensors;
//! [`testkit`] checks the recorded trace against behavioral tests and
//! [`grading`] turns the verdicts into a weighted score with feedback.
//! [`reference`] computes the ideal Bug path that the path-length test
//! compares against, plus grid planners.
//!
//! ```
//! use virtlab::bundled::{w1, Controller};
//! use virtlab::grading::evaluate_program;
//!
//! let eval = evaluate_program(&w1(), &Controller::BugFollower.program()).unwrap();
//! assert!(eval.report.all_passed());
//! ```

pub mod bundled;
pub mod dsl;
pub mod grading;
pub mod reference;
pub mod sim;
pub mod testkit;
pub mod world;
