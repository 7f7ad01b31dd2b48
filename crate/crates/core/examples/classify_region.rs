//! Type of a Monge-Ampère equation over a grid of points.
//!
//! `u_{x1x1} + u·u_{x2x2} = 0` is elliptic where `u > 0`, hyperbolic where
//! `u < 0` and parabolic on `u = 0`.

use contact_ma::monge_ampere::{self, GridSpec, MAEquation};

fn main() {
    let eq = MAEquation::parse(["0", "1", "0", "u", "0"]).expect("coefficients parse");
    let grid = GridSpec::parse("u=-1:1:9").expect("grid parses");
    let report = monge_ampere::classify_region(&eq, &grid, 1e-9);
    for cell in &report.cells {
        println!("u = {:>5.2}  Δ = {:>6.2}  {}", cell.point[2], cell.delta.unwrap_or(f64::NAN), cell.kind);
    }
    println!(
        "{} elliptic, {} hyperbolic, {} parabolic",
        report.count("elliptic"),
        report.count("hyperbolic"),
        report.count("parabolic")
    );
}
