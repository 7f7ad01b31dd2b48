//! The contact structure `ω = du - p₁dx₁ - p₂dx₂` on the 5-dimensional
//! space with coordinates `(x₁, x₂, u, p₁, p₂)`.
//!
//! Vector fields are handled as 5-tuples of jets, so commutators and the
//! Lagrange bracket come out of jet arithmetic rather than symbolic
//! differentiation. Generating functions are scalars in the trivialization
//! of `TM/𝒟` by `∂u`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError, Jet, DARBOUX_VARS};

pub const X1: usize = 0;
pub const X2: usize = 1;
pub const U: usize = 2;
pub const P1: usize = 3;
pub const P2: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContactError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("expression must be over the variables (x1, x2, u, p1, p2), found {0:?}")]
    Variables(Vec<String>),
    #[error("non-finite coordinate in point")]
    NonFinite,
}

/// A point `(x₁, x₂, u, p₁, p₂)` of the Darboux chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxPoint {
    pub x1: f64,
    pub x2: f64,
    pub u: f64,
    pub p1: f64,
    pub p2: f64,
}

impl DarbouxPoint {
    pub fn new(x1: f64, x2: f64, u: f64, p1: f64, p2: f64) -> Self {
        DarbouxPoint { x1, x2, u, p1, p2 }
    }

    pub fn origin() -> Self {
        DarbouxPoint::new(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        DarbouxPoint::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x1, self.x2, self.u, self.p1, self.p2]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Tangent vector in the coordinate frame `(∂x₁, ∂x₂, ∂u, ∂p₁, ∂p₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldValue {
    pub point: DarbouxPoint,
    pub components: [f64; 5],
}

impl VectorFieldValue {
    pub fn new(point: DarbouxPoint, components: [f64; 5]) -> Self {
        VectorFieldValue { point, components }
    }

    pub fn sub(&self, other: &VectorFieldValue) -> VectorFieldValue {
        let mut c = self.components;
        for (a, b) in c.iter_mut().zip(other.components) {
            *a -= b;
        }
        VectorFieldValue::new(self.point, c)
    }

    pub fn scale(&self, s: f64) -> VectorFieldValue {
        VectorFieldValue::new(self.point, self.components.map(|c| c * s))
    }
}

/// `ω(Z) = Z_u - p₁ Z_{x₁} - p₂ Z_{x₂}`.
pub fn contact_form_value(pt: &DarbouxPoint, z: &VectorFieldValue) -> f64 {
    let c = &z.components;
    c[U] - pt.p1 * c[X1] - pt.p2 * c[X2]
}

/// A vector field whose five components are jets at a common base point.
pub type JetField = [Jet; 5];

fn base_of(pt: &DarbouxPoint) -> Result<Arc<[f64]>, ContactError> {
    if !pt.is_finite() {
        return Err(ContactError::NonFinite);
    }
    Ok(Arc::from(pt.to_array().as_slice()))
}

/// `[X, Y]ⁱ = Xʲ ∂ⱼ Yⁱ - Yʲ ∂ⱼ Xⁱ`, one order lower than the inputs.
pub fn commutator(x: &JetField, y: &JetField) -> JetField {
    std::array::from_fn(|i| {
        let mut acc = x[i].partial(0).scale(0.0);
        for j in 0..5 {
            acc = acc + &x[j] * &y[i].partial(j) - &y[j] * &x[i].partial(j);
        }
        acc
    })
}

/// `ω(X)` as a jet.
pub fn contact_form_jet(x: &JetField) -> Jet {
    let base: Arc<[f64]> = Arc::from(x[U].base());
    let order = x[U].order();
    let p1 = Jet::variable(base.clone(), order, P1);
    let p2 = Jet::variable(base, order, P2);
    &x[U] - &(&p1 * &x[X1]) - &p2 * &x[X2]
}

/// Contact field `X_ν` of a generating-function jet of order `K`, as jets of order `K - 1`.
pub fn contact_field_jet(nu: &Jet) -> JetField {
    let order = nu.order() - 1;
    let base: Arc<[f64]> = Arc::from(nu.base());
    let p1 = Jet::variable(base.clone(), order, P1);
    let p2 = Jet::variable(base, order, P2);
    let n = nu.truncate(order);
    let n_u = nu.partial(U);
    let n_p1 = nu.partial(P1);
    let n_p2 = nu.partial(P2);
    [
        -&n_p1,
        -&n_p2,
        n - &p1 * &n_p1 - &p2 * &n_p2,
        nu.partial(X1) + &p1 * &n_u,
        nu.partial(X2) + &p2 * &n_u,
    ]
}

/// `{μ, ν} = ω([X_μ, X_ν])` as a jet, two orders below the inputs.
pub fn lagrange_bracket_jet(mu: &Jet, nu: &Jet) -> Jet {
    contact_form_jet(&commutator(&contact_field_jet(mu), &contact_field_jet(nu)))
}

/// The Darboux chart for two independent variables, with the frame
/// `e₁ = ∂x₁ + p₁∂u, e₂ = ∂x₂ + p₂∂u, e₃ = ∂p₁, e₄ = ∂p₂` of `𝒟 = Ker ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContactChart;

impl ContactChart {
    pub fn n(&self) -> usize {
        2
    }

    pub fn variables(&self) -> [&'static str; 5] {
        DARBOUX_VARS
    }

    /// The frame `e₁..e₄` as jets of order `order` at `pt`.
    pub fn frame_jets(&self, pt: &DarbouxPoint, order: usize) -> Result<[JetField; 4], ContactError> {
        let base = base_of(pt)?;
        let c = |v: f64| Jet::constant(base.clone(), order, v);
        let var = |i: usize| Jet::variable(base.clone(), order, i);
        Ok([
            [c(1.0), c(0.0), var(P1), c(0.0), c(0.0)],
            [c(0.0), c(1.0), var(P2), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(0.0), c(1.0), c(0.0)],
            [c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)],
        ])
    }

    /// Coordinate components of the frame vectors at `pt`.
    pub fn frame(&self, pt: &DarbouxPoint) -> [VectorFieldValue; 4] {
        let f = |c: [f64; 5]| VectorFieldValue::new(*pt, c);
        [
            f([1.0, 0.0, pt.p1, 0.0, 0.0]),
            f([0.0, 1.0, pt.p2, 0.0, 0.0]),
            f([0.0, 0.0, 0.0, 1.0, 0.0]),
            f([0.0, 0.0, 0.0, 0.0, 1.0]),
        ]
    }

    /// `R(eᵢ, eⱼ) = ω([eᵢ, eⱼ])` on the frame.
    pub fn curvature_gram(&self, pt: &DarbouxPoint) -> Result<DMatrix<f64>, ContactError> {
        let frame = self.frame_jets(pt, 1)?;
        Ok(DMatrix::from_fn(4, 4, |i, j| {
            contact_form_jet(&commutator(&frame[i], &frame[j])).value()
        }))
    }

    fn check_vars(&self, e: &Expr) -> Result<(), ContactError> {
        if e.vars().iter().map(String::as_str).ne(DARBOUX_VARS) {
            return Err(ContactError::Variables(e.vars().to_vec()));
        }
        Ok(())
    }

    fn jet(&self, e: &Expr, pt: &DarbouxPoint, order: usize) -> Result<Jet, ContactError> {
        self.check_vars(e)?;
        let base = base_of(pt)?;
        Ok(e.eval_jet(&base, order)?)
    }

    /// `X_ν = (-ν_{p₁}, -ν_{p₂}, ν - p₁ν_{p₁} - p₂ν_{p₂}, ν_{x₁} + p₁ν_u, ν_{x₂} + p₂ν_u)`.
    pub fn contact_field(&self, nu: &Expr, pt: &DarbouxPoint) -> Result<VectorFieldValue, ContactError> {
        let x = contact_field_jet(&self.jet(nu, pt, 1)?);
        Ok(VectorFieldValue::new(*pt, x.map(|c| c.value())))
    }

    /// `max_i |ω([eᵢ, X_ν])|` at `pt`.
    pub fn contact_field_defect(&self, nu: &Expr, pt: &DarbouxPoint) -> Result<f64, ContactError> {
        let x = contact_field_jet(&self.jet(nu, pt, 2)?);
        self.bracket_defect(&x, pt)
    }

    fn bracket_defect(&self, z: &JetField, pt: &DarbouxPoint) -> Result<f64, ContactError> {
        let frame = self.frame_jets(pt, 1)?;
        Ok(frame
            .iter()
            .map(|e| contact_form_jet(&commutator(e, z)).value().abs())
            .fold(0.0, f64::max))
    }

    /// Whether `[eᵢ, Z] ∈ 𝒟` for every frame field and every sample point.
    pub fn is_contact_field(&self, z: &[Expr; 5], pts: &[DarbouxPoint], tol: f64) -> Result<bool, ContactError> {
        for pt in pts {
            let mut field = Vec::with_capacity(5);
            for c in z {
                field.push(self.jet(c, pt, 1)?);
            }
            let field: JetField = field.try_into().expect("five components");
            if self.bracket_defect(&field, pt)? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `{μ, ν}(pt) = ω([X_μ, X_ν])(pt)`.
    pub fn lagrange_bracket(&self, mu: &Expr, nu: &Expr, pt: &DarbouxPoint) -> Result<f64, ContactError> {
        let m = self.jet(mu, pt, 2)?;
        let n = self.jet(nu, pt, 2)?;
        Ok(lagrange_bracket_jet(&m, &n).value())
    }

    /// `{λ, {μ, ν}} + {μ, {ν, λ}} + {ν, {λ, μ}}` at `pt`.
    pub fn jacobi_defect(&self, l: &Expr, m: &Expr, n: &Expr, pt: &DarbouxPoint) -> Result<f64, ContactError> {
        let (jl, jm, jn) = (self.jet(l, pt, 4)?, self.jet(m, pt, 4)?, self.jet(n, pt, 4)?);
        let term = |a: &Jet, b: &Jet, c: &Jet| lagrange_bracket_jet(&a.truncate(2), &lagrange_bracket_jet(b, c)).value();
        Ok(term(&jl, &jm, &jn) + term(&jm, &jn, &jl) + term(&jn, &jl, &jm))
    }
}
