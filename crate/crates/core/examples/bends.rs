//! Two-dimensional spaces of homogeneous polynomials that are the fiber of
//! a rank-2 integral element ("bends"), their normal forms and prolongations.

use contact_ma::bends::{self, HomPoly};
use contact_ma::expr::Expr;
use contact_ma::zeta::ZetaKind;

fn poly(s: &str, k: usize) -> HomPoly {
    HomPoly::from_expr(&Expr::parse(s, &["x", "y"]).expect("parses"), k).expect("homogeneous")
}

fn main() {
    for (k, q1, q2) in [(2, "x^2", "x*y"), (2, "x^2 - y^2", "x*y"), (3, "x^3", "x*y^2"), (3, "x^3 - 3*x*y^2", "3*x^2*y - y^3")] {
        let b = bends::analyze(k, &poly(q1, k), &poly(q2, k), 1e-9).expect("valid span");
        match (&b.kind, &b.matrix) {
            (Some(kind), Some(m)) => println!("span{{{q1}, {q2}}}: bend, ζ² = {}, matrix {:?}", kind.square(), m.to_array()),
            _ => println!("span{{{q1}, {q2}}}: not a bend"),
        }
    }

    for kind in ZetaKind::ALL {
        let mut b = bends::normal_form(2, kind).expect("normal form");
        print!("{kind}:");
        for _ in 0..3 {
            print!("  {{{}, {}}}", b.span[0], b.span[1]);
            b = bends::prolong_bend(&b, 1e-9).expect("prolongs");
        }
        println!();
    }
}
