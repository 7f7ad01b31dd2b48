//! Classical Monge-Ampère equations
//!
//! ```text
//! N (u_xx u_yy - u_xy²) + A u_xx + B u_xy + C u_yy + D = 0
//! ```
//!
//! with coefficients depending on `(x₁, x₂, u, p₁, p₂)`. At each point the
//! equation defines an operator `𝔄` on the contact plane `𝒟`, self-adjoint
//! for the curvature form, with `𝔄² = ΔI`, `Δ = B² - 4AC + 4ND`. A graph
//! `u = f(x)` solves the equation exactly when its tangent planes are
//! `𝔄`-invariant.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact::{ContactChart, ContactError, DarbouxPoint, VectorFieldValue};
use crate::expr::{Expr, ExprError, DARBOUX_VARS, PLANE_VARS};
use crate::linalg;
use crate::symplectic::{self, ClassificationResult, ClassifyOptions, Operator, SymplecticError, SymplecticSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error("coefficient {name}: {source}")]
    Coefficient { name: &'static str, source: ExprError },
    #[error("the operator is scalar at this point (all coefficients vanish)")]
    ScalarOperator,
    #[error("bad grid specification: {0}")]
    Grid(String),
}

pub const COEFFICIENT_NAMES: [&str; 5] = ["N", "A", "B", "C", "D"];

/// Coefficient values `(N, A, B, C, D)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub n: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Coefficients {
    pub fn new(n: f64, a: f64, b: f64, c: f64, d: f64) -> Self {
        Coefficients { n, a, b, c, d }
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Coefficients::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.n, self.a, self.b, self.c, self.d]
    }

    /// `Δ = B² - 4AC + 4ND`.
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c + 4.0 * self.n * self.d
    }

    /// The matrix of `𝔄` in the frame `(∂x₁+p₁∂u, ∂x₂+p₂∂u, ∂p₁, ∂p₂)`.
    pub fn frak_a(&self) -> DMatrix<f64> {
        let Coefficients { n, a, b, c, d } = *self;
        DMatrix::from_row_slice(
            4,
            4,
            &[
                b, -2.0 * a, 0.0, -2.0 * n, //
                2.0 * c, -b, 2.0 * n, 0.0, //
                0.0, 2.0 * d, b, 2.0 * c, //
                -2.0 * d, 0.0, -2.0 * a, -b,
            ],
        )
    }

    /// Reads coefficients back from a matrix of the `𝔄` shape, returning them
    /// with the max deviation of `m` from `frak_a` of the result.
    pub fn from_frak_a(m: &DMatrix<f64>) -> (Coefficients, f64) {
        let c = Coefficients::new(
            -m[(0, 3)] / 2.0,
            -m[(0, 1)] / 2.0,
            m[(0, 0)],
            m[(1, 0)] / 2.0,
            m[(2, 1)] / 2.0,
        );
        let dev = linalg::max_abs(&(m - c.frak_a()));
        (c, dev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationType {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl EquationType {
    pub fn name(self) -> &'static str {
        match self {
            EquationType::Elliptic => "elliptic",
            EquationType::Parabolic => "parabolic",
            EquationType::Hyperbolic => "hyperbolic",
        }
    }

    /// Sign rule: `Δ < -tol` elliptic, `Δ > tol` hyperbolic, otherwise parabolic.
    pub fn from_discriminant(delta: f64, tol: f64) -> Self {
        if delta < -tol {
            EquationType::Elliptic
        } else if delta > tol {
            EquationType::Hyperbolic
        } else {
            EquationType::Parabolic
        }
    }
}

impl fmt::Display for EquationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Five coefficient expressions over `(x1, x2, u, p1, p2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MAEquation {
    coeffs: [Expr; 5],
}

impl MAEquation {
    pub fn new(coeffs: [Expr; 5]) -> Result<Self, MaError> {
        for (c, name) in coeffs.iter().zip(COEFFICIENT_NAMES) {
            if c.vars().iter().map(String::as_str).ne(DARBOUX_VARS) {
                return Err(MaError::Coefficient {
                    name,
                    source: ExprError::Arity {
                        expected: 5,
                        got: c.nvars(),
                    },
                });
            }
        }
        Ok(MAEquation { coeffs })
    }

    /// Parses `N, A, B, C, D` in that order.
    pub fn parse(texts: [&str; 5]) -> Result<Self, MaError> {
        let mut out = Vec::with_capacity(5);
        for (t, name) in texts.iter().zip(COEFFICIENT_NAMES) {
            out.push(Expr::parse(t, &DARBOUX_VARS).map_err(|source| MaError::Coefficient { name, source })?);
        }
        Ok(MAEquation {
            coeffs: out.try_into().expect("five coefficients"),
        })
    }

    pub fn constant(c: Coefficients) -> Self {
        MAEquation {
            coeffs: c.to_array().map(|v| Expr::constant(v, &DARBOUX_VARS)),
        }
    }

    /// `u_xx + u_yy = 0`.
    pub fn laplace() -> Self {
        MAEquation::constant(Coefficients::new(0.0, 1.0, 0.0, 1.0, 0.0))
    }

    /// `u_xx - u_yy = 0`.
    pub fn wave() -> Self {
        MAEquation::constant(Coefficients::new(0.0, 1.0, 0.0, -1.0, 0.0))
    }

    /// `u_xx u_yy - u_xy² = 0`.
    pub fn homogeneous() -> Self {
        MAEquation::constant(Coefficients::new(1.0, 0.0, 0.0, 0.0, 0.0))
    }

    pub fn coefficient_exprs(&self) -> &[Expr; 5] {
        &self.coeffs
    }

    pub fn coefficients(&self, pt: &DarbouxPoint) -> Result<Coefficients, MaError> {
        let p = pt.to_array();
        let mut v = [0.0; 5];
        for ((slot, c), name) in v.iter_mut().zip(&self.coeffs).zip(COEFFICIENT_NAMES) {
            *slot = c.eval(&p).map_err(|source| MaError::Coefficient { name, source })?;
        }
        Ok(Coefficients::from_array(v))
    }
}

/// A candidate solution `u = f(x₁, x₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSolution {
    f: Expr,
}

impl CandidateSolution {
    pub fn parse(text: &str) -> Result<Self, MaError> {
        Ok(CandidateSolution {
            f: Expr::parse(text, &PLANE_VARS)?,
        })
    }

    pub fn new(f: Expr) -> Result<Self, MaError> {
        if f.vars().iter().map(String::as_str).ne(PLANE_VARS) {
            return Err(ExprError::Arity {
                expected: 2,
                got: f.nvars(),
            }
            .into());
        }
        Ok(CandidateSolution { f })
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    /// `(f, f₁, f₂, f₁₁, f₁₂, f₂₂)` at `base`.
    pub fn derivatives(&self, base: [f64; 2]) -> Result<[f64; 6], MaError> {
        let j = self.f.eval_jet(&base, 2)?;
        Ok([j.value(), j.d(0), j.d(1), j.d2(0, 0), j.d2(0, 1), j.d2(1, 1)])
    }
}

/// `(x₁, x₂, f, f_{x₁}, f_{x₂})` at `base`.
pub fn lift_point(f: &CandidateSolution, base: [f64; 2]) -> Result<DarbouxPoint, MaError> {
    let j = f.f.eval_jet(&base, 1)?;
    Ok(DarbouxPoint::new(base[0], base[1], j.value(), j.d(0), j.d(1)))
}

pub fn discriminant(eq: &MAEquation, pt: &DarbouxPoint) -> Result<f64, MaError> {
    Ok(eq.coefficients(pt)?.discriminant())
}

pub fn classify(eq: &MAEquation, pt: &DarbouxPoint, tol: f64) -> Result<EquationType, MaError> {
    Ok(EquationType::from_discriminant(discriminant(eq, pt)?, tol))
}

#[allow(non_snake_case)]
pub fn frak_A(eq: &MAEquation, pt: &DarbouxPoint) -> Result<Operator, MaError> {
    Ok(Operator::new(eq.coefficients(pt)?.frak_a()))
}

/// `E = N(f₁₁f₂₂ - f₁₂²) + Af₁₁ + Bf₁₂ + Cf₂₂ + D` with coefficients taken at the lifted point.
pub fn residual(eq: &MAEquation, f: &CandidateSolution, base: [f64; 2]) -> Result<f64, MaError> {
    let [u, f1, f2, f11, f12, f22] = f.derivatives(base)?;
    let c = eq.coefficients(&DarbouxPoint::new(base[0], base[1], u, f1, f2))?;
    Ok(residual_from(&c, f11, f12, f22))
}

fn residual_from(c: &Coefficients, f11: f64, f12: f64, f22: f64) -> f64 {
    c.n * (f11 * f22 - f12 * f12) + c.a * f11 + c.b * f12 + c.c * f22 + c.d
}

/// `Z₁ = ∂x₁ + p₁∂u + f₁₁∂p₁ + f₁₂∂p₂`, `Z₂ = ∂x₂ + p₂∂u + f₁₂∂p₁ + f₂₂∂p₂` on the graph of `f`.
pub fn tangent_frame(f: &CandidateSolution, base: [f64; 2]) -> Result<[VectorFieldValue; 2], MaError> {
    let [u, f1, f2, f11, f12, f22] = f.derivatives(base)?;
    let pt = DarbouxPoint::new(base[0], base[1], u, f1, f2);
    Ok([
        VectorFieldValue::new(pt, [1.0, 0.0, f1, f11, f12]),
        VectorFieldValue::new(pt, [0.0, 1.0, f2, f12, f22]),
    ])
}

/// Outcome of testing `𝔄`-invariance of the tangent plane of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub point: DarbouxPoint,
    /// The PDE residual `E`.
    pub residual: f64,
    /// Max-norm of the components of `𝔄Z₁, 𝔄Z₂` transverse to `span{Z₁, Z₂}`
    /// (along `∂p₁, ∂p₂`); equals `|2E|`.
    pub defect: f64,
    /// `(∂p₁, ∂p₂)` parts of `𝔄Z₁` and `𝔄Z₂`.
    pub transverse: [[f64; 2]; 2],
    /// Max deviation of `𝔄Z₁` from `(B - 2f₁₂N)Z₁ + 2(C + f₁₁N)Z₂ - 2E∂p₂`.
    pub z1_identity: f64,
    /// Max deviation of `𝔄Z₂` from `-2(A + f₂₂N)Z₁ + (2f₁₂N - B)Z₂ + 2E∂p₁`.
    pub z2_identity: f64,
}

impl InvarianceReport {
    pub fn identity_deviation(&self) -> f64 {
        self.z1_identity.max(self.z2_identity)
    }
}

pub fn invariance_defect(eq: &MAEquation, f: &CandidateSolution, base: [f64; 2]) -> Result<InvarianceReport, MaError> {
    let [u, f1, f2, f11, f12, f22] = f.derivatives(base)?;
    let point = DarbouxPoint::new(base[0], base[1], u, f1, f2);
    let c = eq.coefficients(&point)?;
    let m = c.frak_a();
    let e = residual_from(&c, f11, f12, f22);
    // Z₁, Z₂ in the 𝒟-frame.
    let z1 = DVector::from_vec(vec![1.0, 0.0, f11, f12]);
    let z2 = DVector::from_vec(vec![0.0, 1.0, f12, f22]);
    let dp1 = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
    let dp2 = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);

    // w = w₁Z₁ + w₂Z₂ + (w₃ - w₁f₁₁ - w₂f₁₂)∂p₁ + (w₄ - w₁f₁₂ - w₂f₂₂)∂p₂
    let transverse = |w: &DVector<f64>| [w[2] - w[0] * f11 - w[1] * f12, w[3] - w[0] * f12 - w[1] * f22];
    let a1 = &m * &z1;
    let a2 = &m * &z2;
    let t = [transverse(&a1), transverse(&a2)];
    let defect = t.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let id1 = &z1 * (c.b - 2.0 * f12 * c.n) + &z2 * (2.0 * (c.c + f11 * c.n)) - &dp2 * (2.0 * e);
    let id2 = &z1 * (-2.0 * (c.a + f22 * c.n)) + &z2 * (2.0 * f12 * c.n - c.b) + &dp1 * (2.0 * e);
    Ok(InvarianceReport {
        point,
        residual: e,
        defect,
        transverse: t,
        z1_identity: (a1 - id1).amax(),
        z2_identity: (a2 - id2).amax(),
    })
}

/// The algebra `span{I, 𝔄}` at a point, with its class.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicAlgebra {
    pub identity: Operator,
    pub generator: Operator,
    pub classification: ClassificationResult,
    /// Distance of `𝔄 * 𝔄` from `span{I, 𝔄}` (Frobenius).
    pub jordan_residual: f64,
}

/// The symplectic space `(𝒟_pt, R)` in the frame of [`ContactChart`].
pub fn contact_plane(pt: &DarbouxPoint) -> Result<SymplecticSpace, MaError> {
    Ok(SymplecticSpace::new(ContactChart.curvature_gram(pt)?)?)
}

pub fn basic_algebra(eq: &MAEquation, pt: &DarbouxPoint, opts: ClassifyOptions) -> Result<BasicAlgebra, MaError> {
    let c = eq.coefficients(pt)?;
    if c.to_array().iter().all(|&v| v == 0.0) {
        return Err(MaError::ScalarOperator);
    }
    let sp = contact_plane(pt)?;
    let gen = Operator::new(c.frak_a());
    let classification = symplectic::classify_dim4(&sp, &gen, opts)?;
    let sq = symplectic::jordan_product(&gen, &gen)?;
    // 𝔄 is trace-free, so the projection of 𝔄² on span{I, 𝔄} is (tr 𝔄²/4) I + (⟨𝔄², 𝔄⟩/‖𝔄‖²) 𝔄.
    let m = gen.matrix();
    let s = sq.matrix();
    let alpha = s.trace() / 4.0;
    let beta = s.dot(m) / m.dot(m);
    let jordan_residual = (s - DMatrix::identity(4, 4) * alpha - m * beta).norm();
    Ok(BasicAlgebra {
        identity: Operator::identity(4),
        generator: gen,
        classification,
        jordan_residual,
    })
}

/// One axis of a sampling grid: `count` equally spaced values of `var` on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub var: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.lo;
        }
        let t = i as f64 / (self.count - 1) as f64;
        self.lo * (1.0 - t) + self.hi * t
    }
}

/// A rectangular grid over some of the Darboux coordinates; the others are held at `fixed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
    pub fixed: [f64; 5],
}

impl GridSpec {
    /// `x1 ∈ [-1, 1]`, `x2 ∈ [-1, 1]`, 5 points each, other coordinates 0.
    pub fn default_plane() -> Self {
        GridSpec::parse("x1=-1:1:5,x2=-1:1:5").expect("valid literal")
    }

    /// Parses `var=lo:hi:count` items separated by commas, e.g. `"u=-1:1:21"`.
    pub fn parse(text: &str) -> Result<Self, MaError> {
        let mut axes = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (var, range) = item
                .split_once('=')
                .ok_or_else(|| MaError::Grid(format!("expected var=lo:hi:count, got `{item}`")))?;
            let var = var.trim();
            if !DARBOUX_VARS.contains(&var) {
                return Err(MaError::Grid(format!("unknown variable `{var}`")));
            }
            if axes.iter().any(|a: &GridAxis| a.var == var) {
                return Err(MaError::Grid(format!("variable `{var}` given twice")));
            }
            let parts: Vec<&str> = range.split(':').collect();
            if parts.len() != 3 {
                return Err(MaError::Grid(format!("expected lo:hi:count, got `{range}`")));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MaError::Grid(format!("bad number `{s}`")))
            };
            let count = parts[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| MaError::Grid(format!("bad count `{}`", parts[2])))?;
            axes.push(GridAxis {
                var: var.to_string(),
                lo: num(parts[0])?,
                hi: num(parts[1])?,
                count,
            });
        }
        Ok(GridSpec { axes, fixed: [0.0; 5] })
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|a| a.count).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major enumeration (last axis fastest) of `(index, point)`.
    pub fn cells(&self) -> Vec<(Vec<usize>, DarbouxPoint)> {
        let total = self.len();
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut index = vec![0; self.axes.len()];
            for (k, axis) in self.axes.iter().enumerate().rev() {
                index[k] = rem % axis.count;
                rem /= axis.count;
            }
            let mut p = self.fixed;
            for (axis, &i) in self.axes.iter().zip(&index) {
                let slot = DARBOUX_VARS.iter().position(|v| *v == axis.var).expect("validated");
                p[slot] = axis.value(i);
            }
            out.push((index, DarbouxPoint::from_array(p)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub index: Vec<usize>,
    pub point: [f64; 5],
    pub delta: Option<f64>,
    /// `elliptic`, `hyperbolic`, `parabolic` (Δ exactly 0), `band`
    /// (`0 < |Δ| ≤ tol`) or `error`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub grid: GridSpec,
    pub tol: f64,
    pub cells: Vec<RegionCell>,
}

impl RegionReport {
    pub fn error_count(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn count(&self, kind: &str) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }
}

pub fn classify_cell(eq: &MAEquation, pt: &DarbouxPoint, tol: f64) -> (Option<f64>, String, Option<String>) {
    match discriminant(eq, pt) {
        Ok(delta) if !delta.is_finite() => (None, "error".into(), Some("non-finite discriminant".into())),
        Ok(delta) => {
            let kind = if delta == 0.0 {
                "parabolic"
            } else if delta.abs() <= tol {
                "band"
            } else {
                EquationType::from_discriminant(delta, tol).name()
            };
            (Some(delta), kind.into(), None)
        }
        Err(e) => (None, "error".into(), Some(e.to_string())),
    }
}

/// Pointwise type over a grid, in row-major order; evaluation failures are recorded per cell.
pub fn classify_region(eq: &MAEquation, grid: &GridSpec, tol: f64) -> RegionReport {
    let cells = grid
        .cells()
        .into_iter()
        .map(|(index, pt)| {
            let (delta, kind, error) = classify_cell(eq, &pt, tol);
            RegionCell {
                index,
                point: pt.to_array(),
                delta,
                kind,
                error,
            }
        })
        .collect();
    RegionReport {
        grid: grid.clone(),
        tol,
        cells,
    }
}

/// The partial Legendre transformation
/// `(x₁, x₂, u, p₁, p₂) ↦ (p₁, x₂, u - x₁p₁, -x₁, p₂)`, which preserves `ω`.
pub fn partial_legendre_point(pt: &DarbouxPoint) -> DarbouxPoint {
    DarbouxPoint::new(pt.p1, pt.x2, pt.u - pt.x1 * pt.p1, -pt.x1, pt.p2)
}

/// Its differential on `𝒟` in the frames at source and image:
/// `e₁ ↦ -e₃, e₂ ↦ e₂, e₃ ↦ e₁, e₄ ↦ e₄`.
pub fn partial_legendre_frame_map() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
}

/// Coefficients of the transformed equation at the image point, read off
/// from `T 𝔄 T⁻¹`, together with the deviation of that matrix from the `𝔄` shape.
pub fn partial_legendre_coefficients(c: &Coefficients) -> (Coefficients, f64) {
    let t = partial_legendre_frame_map();
    let t_inv = t.transpose(); // T is a signed permutation
    Coefficients::from_frak_a(&(&t * c.frak_a() * t_inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(s: &str) -> CandidateSolution {
        CandidateSolution::parse(s).unwrap()
    }

    #[test]
    fn lifts() {
        assert_eq!(lift_point(&sol("x1^2 - x2^2"), [1.0, 1.0]).unwrap().to_array(), [1.0, 1.0, 0.0, 2.0, -2.0]);
        assert_eq!(lift_point(&sol("0"), [0.4, -3.0]).unwrap().to_array(), [0.4, -3.0, 0.0, 0.0, 0.0]);
        assert_eq!(lift_point(&sol("x1*x2"), [2.0, 3.0]).unwrap().to_array(), [2.0, 3.0, 6.0, 3.0, 2.0]);
    }

    #[test]
    fn discriminants_and_types() {
        let o = DarbouxPoint::origin();
        let cases = [
            (MAEquation::laplace(), -4.0, EquationType::Elliptic),
            (MAEquation::wave(), 4.0, EquationType::Hyperbolic),
            (MAEquation::homogeneous(), 0.0, EquationType::Parabolic),
        ];
        for (eq, delta, kind) in cases {
            assert_eq!(discriminant(&eq, &o).unwrap(), delta);
            assert_eq!(classify(&eq, &o, 1e-9).unwrap(), kind);
        }
    }

    #[test]
    fn laplace_matrix() {
        let m = frak_A(&MAEquation::laplace(), &DarbouxPoint::origin()).unwrap();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, -2.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, -2.0, 0.0],
        );
        assert_eq!(m.matrix(), &expect);
        let sq = m.matrix() * m.matrix();
        assert_eq!(sq, DMatrix::identity(4, 4) * -4.0);
    }

    #[test]
    fn residual_examples() {
        let lap = MAEquation::laplace();
        assert!(residual(&lap, &sol("x1^2 - x2^2"), [0.3, 0.8]).unwrap().abs() < 1e-12);
        assert!((residual(&lap, &sol("x1^2"), [0.3, 0.8]).unwrap() - 2.0).abs() < 1e-12);
        let ma = MAEquation::constant(Coefficients::new(1.0, 0.0, 0.0, 0.0, 1.0));
        assert!(residual(&ma, &sol("x1*x2"), [1.1, -0.4]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn frames() {
        let [z1, z2] = tangent_frame(&sol("0"), [0.5, 0.5]).unwrap();
        assert_eq!(z1.components, [1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(z2.components, [0.0, 1.0, 0.0, 0.0, 0.0]);
        let [z1, _] = tangent_frame(&sol("x1^2"), [1.5, 0.5]).unwrap();
        assert_eq!(z1.components, [1.0, 0.0, 3.0, 2.0, 0.0]);
        for z in tangent_frame(&sol("sin(x1)*x2 + x2^3"), [0.2, -0.7]).unwrap() {
            assert!(crate::contact::contact_form_value(&z.point, &z).abs() < 1e-15);
        }
    }

    #[test]
    fn invariance_examples() {
        let lap = MAEquation::laplace();
        let r = invariance_defect(&lap, &sol("x1^2 - x2^2"), [0.3, -0.2]).unwrap();
        assert!(r.defect <= 1e-10);
        let r = invariance_defect(&lap, &sol("x1^2"), [0.3, -0.2]).unwrap();
        assert!((r.residual - 2.0).abs() < 1e-12);
        assert!((r.defect - 4.0).abs() < 1e-12);
        assert!(r.identity_deviation() < 1e-12);
        let no_d = MAEquation::constant(Coefficients::new(0.5, 1.0, -2.0, 3.0, 0.0));
        assert_eq!(invariance_defect(&no_d, &sol("0"), [1.0, 2.0]).unwrap().defect, 0.0);
    }

    #[test]
    fn basic_algebras() {
        use crate::symplectic::OperatorType;
        let o = DarbouxPoint::origin();
        let cases = [
            (MAEquation::laplace(), OperatorType::Elliptic),
            (MAEquation::homogeneous(), OperatorType::Parabolic),
            (MAEquation::wave(), OperatorType::Hyperbolic),
        ];
        for (eq, kind) in cases {
            let b = basic_algebra(&eq, &o, Default::default()).unwrap();
            assert_eq!(b.classification.kind, kind);
            assert!(b.jordan_residual < 1e-10);
        }
        let zero = MAEquation::constant(Coefficients::new(0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(basic_algebra(&zero, &o, Default::default()), Err(MaError::ScalarOperator));
    }

    #[test]
    fn regions() {
        let lap = MAEquation::laplace();
        let r = classify_region(&lap, &GridSpec::default_plane(), 1e-9);
        assert_eq!(r.cells.len(), 25);
        assert_eq!(r.count("elliptic"), 25);
        assert_eq!(r.cells[7].index, vec![1, 2]);

        let eq = MAEquation::parse(["0", "1", "0", "u", "0"]).unwrap();
        let r = classify_region(&eq, &GridSpec::parse("u=-1:1:21").unwrap(), 1e-9);
        for c in &r.cells {
            let u = c.point[2];
            assert_eq!(c.delta.unwrap(), -4.0 * u);
        }
        assert_eq!(r.count("hyperbolic"), 10);
        assert_eq!(r.count("elliptic"), 10);
        assert_eq!(r.count("parabolic"), 1);
        let r = classify_region(&eq, &GridSpec::parse("u=-1:1:20").unwrap(), 0.5);
        assert_eq!(r.count("band"), 2);

        let empty = GridSpec::parse("").unwrap();
        assert!(classify_region(&lap, &empty, 1e-9).cells.is_empty());

        let eq = MAEquation::parse(["0", "ln(x1)", "0", "1", "0"]).unwrap();
        let r = classify_region(&eq, &GridSpec::parse("x1=0:1:3").unwrap(), 1e-9);
        assert_eq!(r.error_count(), 1);
        assert_eq!(r.cells[0].kind, "error");
    }

    #[test]
    fn grid_errors() {
        assert!(GridSpec::parse("q=0:1:3").is_err());
        assert!(GridSpec::parse("x1=0:1").is_err());
        assert!(GridSpec::parse("x1=0:1:3,x1=0:1:2").is_err());
        assert!(GridSpec::parse("x1=a:1:3").is_err());
    }

    #[test]
    fn legendre_chart_change() {
        let t = partial_legendre_frame_map();
        let j = ContactChart.curvature_gram(&DarbouxPoint::origin()).unwrap();
        assert_eq!(t.transpose() * &j * &t, j);
        let c = Coefficients::new(0.3, 1.0, 0.2, 2.0, -0.4);
        let (c2, dev) = partial_legendre_coefficients(&c);
        assert_eq!(dev, 0.0);
        assert!((c2.discriminant() - c.discriminant()).abs() < 1e-12);
        let p = DarbouxPoint::new(1.0, 2.0, 3.0, 4.0, 5.0);
        assert_eq!(partial_legendre_point(&p).to_array(), [4.0, 2.0, -1.0, -1.0, 5.0]);
    }

    #[test]
    fn coefficient_errors() {
        let err = MAEquation::parse(["0", "1+", "0", "1", "0"]).unwrap_err();
        assert!(matches!(err, MaError::Coefficient { name: "A", .. }));
    }
}
