//! A function solves the equation exactly when the operator `𝔄` maps the
//! tangent plane of its 2-jet graph into itself. The transverse part of
//! `𝔄Z₁, 𝔄Z₂` is `|2E|`, where `E` is the equation residual.

use contact_ma::monge_ampere::{self, CandidateSolution, MAEquation};

fn report(name: &str, eq: &MAEquation, f: &str) {
    let sol = CandidateSolution::parse(f).expect("function parses");
    println!("{name}: f = {f}");
    for base in [[0.3, -0.2], [1.0, 0.5], [-0.7, 0.9]] {
        let r = monge_ampere::invariance_defect(eq, &sol, base).expect("defect");
        println!("  at {base:?}: E = {:+.3e}, defect = {:.3e}", r.residual, r.defect);
    }
}

fn main() {
    let laplace = MAEquation::laplace();
    report("laplace", &laplace, "exp(x1)*cos(x2)");
    report("laplace", &laplace, "x1^2 + x2");

    // u_{x1x1}u_{x2x2} - u_{x1x2}² = 1
    let ma = MAEquation::parse(["1", "0", "0", "0", "1"]).expect("coefficients parse");
    report("hessian", &ma, "x1*x2");
    report("hessian", &ma, "(x1^2 + x2^2)/2");
}
