//! Self-adjoint operators on a 4-dimensional symplectic space fall into
//! three classes, each with its own invariant geometry.

use contact_ma::symplectic::{self, ClassifyOptions, EigenData, Operator, OperatorType};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn describe(label: &str, a: &Operator) {
    let sp = symplectic::standard_space(2);
    let res = symplectic::classify_dim4(&sp, a, ClassifyOptions::default()).expect("self-adjoint");
    print!("{label}: {} (minimal polynomial {:?})", res.kind, res.min_poly);
    match &res.eigen {
        EigenData::Hyperbolic { lambdas, planes } => {
            let cross = sp.pairing(&planes[0], &planes[1]).amax();
            println!(", eigenvalues {lambdas:?}, ⟨V₁, V₂⟩ = {cross:.1e}");
        }
        EigenData::Elliptic { re, im, complex_structure } => {
            let j2 = (complex_structure * complex_structure + DMatrix::identity(4, 4)).amax();
            println!(", eigenvalues {re:.3} ± {im:.3}i, |B² + I| = {j2:.1e}");
        }
        EigenData::Parabolic { lambda, kernel, .. } => {
            let lag = symplectic::is_lagrangian(&sp, kernel).expect("plane");
            println!(", eigenvalue {lambda:.3}, Lagrangian kernel: {lag}");
        }
        EigenData::Scalar { .. } => println!(),
    }
}

fn main() {
    for kind in [OperatorType::Elliptic, OperatorType::Hyperbolic, OperatorType::Parabolic] {
        describe(&format!("model {kind}"), &symplectic::model_generator(kind));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..4 {
        let a = symplectic::random_self_adjoint(&mut rng, 2, false);
        describe(&format!("random #{i}"), &a);
    }
}
