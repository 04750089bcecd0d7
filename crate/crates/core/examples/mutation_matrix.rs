//! Every bundled controller against every test on every bundled world.

use virtlab::bundled::{assignments, Controller};
use virtlab::grading::evaluate_program;
use virtlab::testkit::TestKind;

fn main() {
    let controllers: Vec<Controller> = [Controller::Starter, Controller::BugFollower]
        .into_iter()
        .chain(Controller::MUTANTS)
        .collect();
    for a in assignments() {
        println!("{}", a.id);
        let header: String = TestKind::ALL.iter().map(|k| format!(" {:>9.9}", k.name())).collect();
        println!("  {:<14}{header}   score", "");
        for c in &controllers {
            let eval = evaluate_program(&a, &c.program()).unwrap();
            let cells: String = eval
                .results
                .iter()
                .map(|r| format!("{:>10}", if r.passed { "ok" } else { "FAIL" }))
                .collect();
            println!("  {:<14}{cells}  {:>6.2}", format!("{c:?}"), eval.report.rounded_score());
        }
    }
}
