//! Grades a program file (or the starter code) on a bundled assignment.
//!
//! ```text
//! cargo run -p virtlab --example grade_submission [program.rbt] [assignment-id] [--json]
//! ```

use virtlab::bundled::assignment;
use virtlab::dsl::parse;
use virtlab::grading::{evaluate_program, render_report, ReportFormat};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let json = args.iter().any(|a| a == "--json");
    let mut pos = args.iter().filter(|a| !a.starts_with("--"));
    let program_path = pos.next();
    let id = pos.next().map_or("w1-square", String::as_str);

    let a = assignment(id).unwrap_or_else(|| panic!("no bundled assignment {id}"));
    let source = match program_path {
        Some(p) => std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{p}: {e}")),
        None => a.starter_code.clone(),
    };
    let program = match parse(&source) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let eval = evaluate_program(&a, &program).unwrap();
    let format = if json { ReportFormat::Json } else { ReportFormat::Text };
    print!("{}", String::from_utf8_lossy(&render_report(&eval.report, format)));
}
