//! Contact vector fields from generating functions and the Lagrange bracket.

use contact_ma::contact::{contact_form_value, ContactChart, DarbouxPoint};
use contact_ma::expr::{Expr, DARBOUX_VARS};

fn parse(s: &str) -> Expr {
    Expr::parse(s, &DARBOUX_VARS).expect("expression parses")
}

fn main() {
    let chart = ContactChart;
    let pt = DarbouxPoint::new(0.5, -0.25, 1.0, 0.75, -1.5);

    for nu in ["1", "u", "p1", "x1*p2 - x2*p1", "u^2 + x1*p1*p2"] {
        let e = parse(nu);
        let x = chart.contact_field(&e, &pt).expect("field");
        println!(
            "X[{nu}] = {:?}  ω(X) = {:.6}  defect {:.1e}",
            x.components,
            contact_form_value(&pt, &x),
            chart.contact_field_defect(&e, &pt).expect("defect")
        );
    }

    let (x1, p1, u) = (parse("x1"), parse("p1"), parse("u"));
    println!("{{x1, p1}} = {}", chart.lagrange_bracket(&x1, &p1, &pt).expect("bracket"));
    println!("{{u, p1}}  = {}", chart.lagrange_bracket(&u, &p1, &pt).expect("bracket"));
    let (a, b, c) = (parse("u*p1"), parse("x2^2 + p2"), parse("x1*u - p1^3"));
    println!("Jacobi defect = {:.1e}", chart.jacobi_defect(&a, &b, &c, &pt).expect("jacobi"));
}
