//! Runs the geometry and interpolation property suite.

use rh_interp::verify::{run_suite, Geometry, Tolerances};

fn main() {
    let report = run_suite(Geometry::All, &Tolerances::default());
    for r in &report.results {
        println!("{r}");
    }
    match report.first_failure() {
        Some(f) => println!("first failure: {}", f.name),
        None => println!("all {} properties passed", report.results.len()),
    }
}
