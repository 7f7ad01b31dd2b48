//! The integral surfaces `L_{k,l}` in the jet space `J^k(ℝ², ℝ)`: points,
//! tangency to the Cartan distribution and the singular point at the origin.

use contact_ma::rmanifold::{self, RManifoldSpec};
use contact_ma::zeta::ZetaKind;

fn main() {
    for kind in [ZetaKind::Minus, ZetaKind::Plus] {
        let spec = RManifoldSpec::new(3, 2, kind).expect("valid spec");
        let pt = rmanifold::lkl_point(&spec, (0.4, 0.2)).expect("point");
        println!("{kind}, k = 3, l = 2, (a, b) = (0.4, 0.2): x = {:.6}, y = {:.6}", pt.x, pt.y);

        for h in [1e-2, 1e-3] {
            let c = rmanifold::tangency_convergence(&spec, (0.4, 0.2), h).expect("convergence");
            println!("  tangency defect {:.2e} at h, {:.2e} at h/2 (ratio {:.3})", c.defect_h, c.defect_half, c.ratio);
        }

        let rep = rmanifold::singular_point_report(&spec, 0.1, 16).expect("report");
        println!(
            "  rank at origin {}, {} of {} probes singular, bend = {{{}, {}}}",
            rep.origin_rank,
            rep.failures.len(),
            rep.sampled,
            rep.bend[0],
            rep.bend[1]
        );
    }

    let nu = rmanifold::nu_vectors(3, ZetaKind::Minus).expect("ν-vectors");
    println!("ν-vectors at k = 3 span the normal form to within {:.1e}", nu.normal_form_distance);
}
