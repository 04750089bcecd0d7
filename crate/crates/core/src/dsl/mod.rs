//! The robot-control language.
//!
//! ```text
//! state { turning = false; }
//! tick {
//!     if sensor(0) < 0.8 { turning = true; }
//!     if turning { drive(0.3, -1.0); } else { drive(1.0, 0.0); }
//! }
//! ```
//!
//! A program declares persistent `state` variables and a `tick` block that
//! runs once per simulation step. The last `drive(v, omega)` executed in a
//! tick is the command for that tick; positive `omega` turns
//! counter-clockwise, so a right turn has `omega < 0`. There are no arrays,
//! functions or strings. Source files use the `.rbt` extension and `#` line
//! comments.

mod ast;
mod interp;
mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use ast::*;
pub use interp::{
    init_state, run_tick, Command, RuntimeError, RuntimeErrorKind, StateStore, TickInputs, TickOutcome, Value,
    DEFAULT_STEP_BUDGET,
};
pub use parser::parse;
pub use printer::{expr_to_string, pretty_print};

/// Parsing stops after this many errors.
pub const MAX_PARSE_ERRORS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(span: Span, message: impl Into<String>) -> Self {
        Self {
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// One or more parse errors, rendered one `line:col: message` per line.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl ParseErrors {
    pub fn first(&self) -> Option<&ParseError> {
        self.0.first()
    }
}
