//! Two-dimensional bends in the space `P_{k,2}` of homogeneous polynomials
//! of degree `k` in `x, y`.
//!
//! A 2-dimensional subspace `ℷ ⊂ P_{k,2}` is a bend when its prolongation
//! `{h ∈ P_{k+1,2} : h_x, h_y ∈ ℷ}` contains some `f` with `f_x, f_y` a basis
//! of `ℷ` and some `g` not proportional to `f`. The matrix of
//! `g_x = αf_x + βf_y, g_y = γf_x + δf_y` generates one of the three
//! basic algebras, which fixes the ζ-kind of the bend.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::linalg::{self, RANK_TOL};
use crate::zeta::ZetaKind;

/// Tolerance of the structure-matrix fit and of the compatibility gate.
pub const GATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BendError {
    #[error("degree mismatch: expected {expected}, got {got}")]
    Degree { expected: usize, got: usize },
    #[error("missing fiber component ({0}, {1})")]
    MissingComponent(u32, u32),
    #[error("polynomials are linearly dependent")]
    Dependent,
    #[error("degree must be at least {0}")]
    DegreeTooSmall(usize),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("compatibility condition violated (residual {0:e})")]
    Compatibility(f64),
    #[error("structure matrix is scalar")]
    ScalarMatrix,
    #[error("prolonged space has dimension {0}, expected 2")]
    ProlongationDimension(usize),
    #[error("not a bend")]
    NotBend,
    #[error("expression is not a homogeneous polynomial of degree {0}")]
    NotHomogeneous(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// A homogeneous polynomial `Σ c_r x^r y^{k-r}`, stored as `[c_0, ..., c_k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomPoly {
    coeffs: Vec<f64>,
}

impl HomPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a homogeneous polynomial needs at least one coefficient");
        HomPoly { coeffs }
    }

    pub fn zero(k: usize) -> Self {
        HomPoly::new(vec![0.0; k + 1])
    }

    /// `x^r y^{k-r}`.
    pub fn monomial(k: usize, r: usize) -> Self {
        let mut p = HomPoly::zero(k);
        p.coeffs[r] = 1.0;
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        HomPoly::new(v.iter().copied().collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let k = self.degree() as i32;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(r, c)| c * x.powi(r as i32) * y.powi(k - r as i32))
            .sum()
    }

    /// `∂/∂x`; the derivative of a degree-0 polynomial is the degree-0 zero.
    pub fn dx(&self) -> HomPoly {
        if self.degree() == 0 {
            return HomPoly::zero(0);
        }
        HomPoly::new((1..=self.degree()).map(|r| r as f64 * self.coeffs[r]).collect())
    }

    /// `∂/∂y`.
    pub fn dy(&self) -> HomPoly {
        let k = self.degree();
        if k == 0 {
            return HomPoly::zero(0);
        }
        HomPoly::new((0..k).map(|r| (k - r) as f64 * self.coeffs[r]).collect())
    }

    pub fn add(&self, other: &HomPoly) -> HomPoly {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        HomPoly::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> HomPoly {
        HomPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &HomPoly) -> HomPoly {
        let mut out = vec![0.0; self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        HomPoly::new(out)
    }

    /// Exchanges `x` and `y`.
    pub fn swap_xy(&self) -> HomPoly {
        HomPoly::new(self.coeffs.iter().rev().copied().collect())
    }

    /// Reads a homogeneous polynomial of degree `k` from an expression in two variables.
    pub fn from_expr(e: &Expr, k: usize) -> Result<HomPoly, BendError> {
        if e.nvars() != 2 {
            return Err(ExprError::Arity {
                expected: 2,
                got: e.nvars(),
            }
            .into());
        }
        let jet = e.eval_jet(&[0.0, 0.0], k)?;
        let p = HomPoly::new((0..=k).map(|r| jet.coefficient(&[r as u32, (k - r) as u32])).collect());
        let scale = 1.0 + p.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let lower = jet
            .multi_indices()
            .iter()
            .zip(jet.coefficients())
            .filter(|(a, _)| (a[0] + a[1]) as usize != k)
            .any(|(_, c)| c.abs() > 1e-12 * scale);
        if lower {
            return Err(BendError::NotHomogeneous(k));
        }
        for (x, y) in [(0.7, -1.3), (1.9, 0.4), (-2.2, 1.1)] {
            let v = e.eval(&[x, y])?;
            if (v - p.eval(x, y)).abs() > 1e-9 * (1.0 + v.abs()) {
                return Err(BendError::NotHomogeneous(k));
            }
        }
        Ok(p)
    }

    /// Canonical text in the variables `x, y` (zero terms omitted).
    pub fn to_expr_string(&self, x: &str, y: &str) -> String {
        let k = self.degree();
        let mono = |name: &str, e: usize| match e {
            0 => None,
            1 => Some(name.to_string()),
            _ => Some(format!("{name}^{e}")),
        };
        let mut terms = Vec::new();
        for (r, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let factors: Vec<String> = [mono(x, r), mono(y, k - r)].into_iter().flatten().collect();
            let body = factors.join("*");
            let text = if body.is_empty() {
                format!("{c:?}")
            } else if c == 1.0 {
                body
            } else if c == -1.0 {
                format!("-{body}")
            } else {
                format!("{c:?}*{body}")
            };
            terms.push(text);
        }
        if terms.is_empty() {
            return "0".into();
        }
        let mut out = terms[0].clone();
        for t in &terms[1..] {
            match t.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(t);
                }
            }
        }
        out
    }
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string("x", "y"))
    }
}

/// `Σ v(r,s) x^r y^s / (r! s!)`, the polynomial identified with the fiber
/// vector `Σ v(r,s) ∂/∂u_{r,s}`.
pub fn poly_from_fiber_vector(k: usize, components: &BTreeMap<(u32, u32), f64>) -> Result<HomPoly, BendError> {
    let mut p = HomPoly::zero(k);
    for r in 0..=k as u32 {
        let s = k as u32 - r;
        let v = components.get(&(r, s)).ok_or(BendError::MissingComponent(r, s))?;
        p.coeffs[r as usize] = v / (factorial(r) * factorial(s));
    }
    Ok(p)
}

fn check_degree(p: &HomPoly, k: usize) -> Result<(), BendError> {
    if p.degree() != k {
        return Err(BendError::Degree {
            expected: k,
            got: p.degree(),
        });
    }
    Ok(())
}

/// Matrix of `∂/∂x` (or `∂/∂y`) from `P_{k+1}` to `P_k` in the monomial basis.
fn derivative_matrix(k: usize, wrt_x: bool) -> DMatrix<f64> {
    DMatrix::from_fn(k + 1, k + 2, |i, j| {
        let e = HomPoly::monomial(k + 1, j);
        let d = if wrt_x { e.dx() } else { e.dy() };
        d.coeffs[i]
    })
}

/// Reduced row echelon form of the rows of `m`, with pivots scaled to 1.
fn rref_rows(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows {
            break;
        }
        let (best, val) = (pivot_row..rows)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap_rows(pivot_row, best);
        let p = a[(pivot_row, col)];
        for c in 0..cols {
            a[(pivot_row, c)] /= p;
        }
        for r in 0..rows {
            if r != pivot_row {
                let factor = a[(r, col)];
                if factor != 0.0 {
                    for c in 0..cols {
                        a[(r, c)] -= factor * a[(pivot_row, c)];
                    }
                }
            }
        }
        pivot_row += 1;
    }
    a.rows(0, pivot_row).into_owned()
}

/// Orthonormal basis (columns) of the span of `q₁, q₂`.
fn span_basis(q1: &HomPoly, q2: &HomPoly) -> Result<DMatrix<f64>, BendError> {
    let m = linalg::columns(q1.degree() + 1, &[q1.to_vector(), q2.to_vector()]);
    let q = linalg::range(&m, RANK_TOL);
    if q.ncols() < 2 {
        return Err(BendError::Dependent);
    }
    Ok(q)
}

/// `{h ∈ P_{k+1,2} : h_x, h_y ∈ span(q)}` for an orthonormal basis `q` of a
/// subspace of `P_{k,2}`, as a basis in reduced echelon form.
fn prolongation(q: &DMatrix<f64>) -> Vec<HomPoly> {
    let k = q.nrows() - 1;
    let proj = DMatrix::identity(k + 1, k + 1) - q * q.transpose();
    let dx = &proj * derivative_matrix(k, true);
    let dy = &proj * derivative_matrix(k, false);
    let mut stacked = DMatrix::zeros(2 * (k + 1), k + 2);
    stacked.view_mut((0, 0), (k + 1, k + 2)).copy_from(&dx);
    stacked.view_mut((k + 1, 0), (k + 1, k + 2)).copy_from(&dy);
    let ns = linalg::null_space(&stacked, 1e-9);
    if ns.ncols() == 0 {
        return Vec::new();
    }
    let mut basis = rref_rows(&ns.transpose(), 1e-9);
    basis.iter_mut().for_each(|v| {
        if v.abs() < 1e-14 {
            *v = 0.0;
        }
    });
    basis.row_iter().map(|r| HomPoly::new(r.iter().copied().collect())).collect()
}

fn derivative_rank(f: &HomPoly) -> usize {
    let m = linalg::columns(f.degree(), &[f.dx().to_vector(), f.dy().to_vector()]);
    linalg::rank(&m, 1e-8)
}

/// `(α, β, γ, δ)` with `g_x = αf_x + βf_y`, `g_y = γf_x + δf_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureMatrix {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Residual of the least-squares fit.
    pub fit_residual: f64,
    /// See [`compatibility_residual`].
    pub compatibility_residual: f64,
}

impl StructureMatrix {
    pub fn to_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }
}

/// Max coefficient of `γf_xx + (δ-α)f_xy - βf_yy`, the condition
/// `(αf_x + βf_y)_y = (γf_x + δf_y)_x`, divided by the largest coefficient of `f`.
pub fn compatibility_residual(f: &HomPoly, m: [f64; 4]) -> f64 {
    let [a, b, c, d] = m;
    let (fxx, fxy, fyy) = (f.dx().dx(), f.dx().dy(), f.dy().dy());
    let scale = f.coeffs.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    fxx.scale(c)
        .add(&fxy.scale(d - a))
        .add(&fyy.scale(-b))
        .coeffs
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
        / scale
}

/// The same combination with `+βf_yy`, for comparison with the form in
/// which the condition is sometimes quoted.
pub fn compatibility_residual_plus(f: &HomPoly, m: [f64; 4]) -> f64 {
    let [a, b, c, d] = m;
    compatibility_residual(f, [a, -b, c, d])
}

pub fn structure_matrix(f: &HomPoly, g: &HomPoly) -> Result<StructureMatrix, BendError> {
    check_degree(g, f.degree())?;
    if f.degree() < 1 {
        return Err(BendError::DegreeTooSmall(1));
    }
    if linalg::rank(&linalg::columns(f.degree() + 1, &[f.to_vector(), g.to_vector()]), 1e-9) < 2 {
        return Err(BendError::InvalidWitness("g is proportional to f".into()));
    }
    if derivative_rank(f) < 2 {
        return Err(BendError::InvalidWitness("f_x, f_y are dependent".into()));
    }
    let k = f.degree() - 1;
    let basis = linalg::columns(k + 1, &[f.dx().to_vector(), f.dy().to_vector()]);
    let svd = basis.clone().svd(true, true);
    let solve = |rhs: DVector<f64>| -> (DVector<f64>, f64) {
        let x = svd.solve(&rhs, 1e-14).expect("svd solve");
        let r = (&basis * &x - &rhs).norm();
        (x, r)
    };
    let (ab, r1) = solve(g.dx().to_vector());
    let (cd, r2) = solve(g.dy().to_vector());
    let scale = 1.0 + g.to_vector().amax();
    let fit_residual = r1.max(r2);
    if fit_residual > GATE_TOL * scale {
        return Err(BendError::InvalidWitness(format!(
            "derivatives of g leave span(f_x, f_y) (residual {fit_residual:e})"
        )));
    }
    let m = [ab[0], ab[1], cd[0], cd[1]];
    let compat = compatibility_residual(f, m);
    let fscale = 1.0 + f.to_vector().amax() * m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if compat > GATE_TOL * fscale {
        return Err(BendError::Compatibility(compat));
    }
    Ok(StructureMatrix {
        alpha: m[0],
        beta: m[1],
        gamma: m[2],
        delta: m[3],
        fit_residual,
        compatibility_residual: compat,
    })
}

/// Kind of a structure matrix, with the generator normalized to `B² ∈ {-I, 0, I}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BendKind {
    pub kind: ZetaKind,
    /// `c` in `B² = cI` for the trace-free part `B`.
    pub invariant: f64,
    /// `B / sqrt|c|` (or `B` itself when `c` is in the zero band), row-major.
    pub generator: [f64; 4],
}

/// `c = ((α-δ)/2)² + βγ`; `c < -tol` gives ζ² = -1, `|c| ≤ tol` ζ² = 0, `c > tol` ζ² = 1,
/// with `tol` relative to the squared size of the trace-free part.
pub fn classify_bend(m: [f64; 4], tol: f64) -> Result<BendKind, BendError> {
    let [a, b, c, d] = m;
    let h = (a - d) / 2.0;
    let size2 = h * h + b * b + c * c;
    if size2.sqrt() <= tol * (1.0 + a.abs().max(d.abs())) {
        return Err(BendError::ScalarMatrix);
    }
    let inv = h * h + b * c;
    let band = tol * size2;
    let gen = [h, b, c, -h];
    let (kind, generator) = if inv < -band {
        (ZetaKind::Minus, gen.map(|v| v / (-inv).sqrt()))
    } else if inv > band {
        (ZetaKind::Plus, gen.map(|v| v / inv.sqrt()))
    } else {
        (ZetaKind::Zero, gen)
    };
    Ok(BendKind {
        kind,
        invariant: inv,
        generator,
    })
}

/// A 2-dimensional subspace of `P_{k,2}` with whatever bend data was established for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendSubspace {
    pub k: usize,
    pub span: [HomPoly; 2],
    pub witness: Option<[HomPoly; 2]>,
    pub matrix: Option<StructureMatrix>,
    pub kind: Option<ZetaKind>,
}

impl BendSubspace {
    /// Columns are the coefficient vectors of the spanning polynomials.
    pub fn span_matrix(&self) -> DMatrix<f64> {
        linalg::columns(self.k + 1, &[self.span[0].to_vector(), self.span[1].to_vector()])
    }

    /// Largest principal-angle sine between the spans.
    pub fn distance(&self, other: &BendSubspace) -> f64 {
        if self.k != other.k {
            return 1.0;
        }
        linalg::subspace_distance(&self.span_matrix(), &other.span_matrix())
    }
}

/// Result of the bend test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendCheck {
    pub is_bend: bool,
    /// Dimension of `{h ∈ P_{k+1,2} : h_x, h_y ∈ ℷ}`.
    pub prolongation_dim: usize,
    pub witness: Option<[HomPoly; 2]>,
}

fn choose_witness(s: &[HomPoly]) -> Option<[HomPoly; 2]> {
    if s.len() < 2 {
        return None;
    }
    let mut candidates: Vec<HomPoly> = s.to_vec();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            for w in [1.0, -1.0, 2.0, 0.5, -3.0] {
                candidates.push(s[i].add(&s[j].scale(w)));
            }
        }
    }
    let f = candidates.into_iter().find(|f| derivative_rank(f) == 2)?;
    let fv = f.to_vector();
    let g = s
        .iter()
        .find(|h| linalg::rank(&linalg::columns(fv.len(), &[fv.clone(), h.to_vector()]), 1e-9) == 2)?
        .clone();
    Some([f, g])
}

/// Whether `span{q₁, q₂}` is a bend; on success returns a witness `(f, g)`.
pub fn is_bend(k: usize, q1: &HomPoly, q2: &HomPoly) -> Result<BendCheck, BendError> {
    check_degree(q1, k)?;
    check_degree(q2, k)?;
    if k < 1 {
        return Err(BendError::DegreeTooSmall(1));
    }
    let q = span_basis(q1, q2)?;
    let s = prolongation(&q);
    let witness = choose_witness(&s);
    Ok(BendCheck {
        is_bend: witness.is_some(),
        prolongation_dim: s.len(),
        witness,
    })
}

/// Runs the bend test and, for a bend, the structure matrix and its kind.
pub fn analyze(k: usize, q1: &HomPoly, q2: &HomPoly, tol: f64) -> Result<BendSubspace, BendError> {
    let check = is_bend(k, q1, q2)?;
    let mut out = BendSubspace {
        k,
        span: [q1.clone(), q2.clone()],
        witness: None,
        matrix: None,
        kind: None,
    };
    if let Some([f, g]) = check.witness {
        let m = structure_matrix(&f, &g)?;
        out.kind = Some(classify_bend(m.to_array(), tol)?.kind);
        out.matrix = Some(m);
        out.witness = Some([f, g]);
    }
    Ok(out)
}

/// `Span(Re z^k, Im z^k)`, `z = x + ζy`.
pub fn normal_form(k: usize, kind: ZetaKind) -> Result<BendSubspace, BendError> {
    if k < 2 {
        return Err(BendError::DegreeTooSmall(2));
    }
    let (re, im) = zeta_power(k, kind);
    Ok(BendSubspace {
        k,
        span: [re, im],
        witness: None,
        matrix: None,
        kind: Some(kind),
    })
}

/// Real and imaginary parts of `(x + ζy)^k` as polynomials.
pub fn zeta_power(k: usize, kind: ZetaKind) -> (HomPoly, HomPoly) {
    let z2 = kind.square();
    let x = HomPoly::monomial(1, 1);
    let y = HomPoly::monomial(1, 0);
    let mut re = HomPoly::new(vec![1.0]);
    let mut im = HomPoly::new(vec![0.0]);
    for _ in 0..k {
        // (re + ζ im)(x + ζ y)
        let new_re = re.mul(&x).add(&im.mul(&y).scale(z2));
        let new_im = re.mul(&y).add(&im.mul(&x));
        re = new_re;
        im = new_im;
    }
    (re, im)
}

/// The bend `{h ∈ P_{k+1,2} : h_x, h_y ∈ ℷ}` one degree up, with its witness and kind.
pub fn prolong_bend(b: &BendSubspace, tol: f64) -> Result<BendSubspace, BendError> {
    let check = is_bend(b.k, &b.span[0], &b.span[1])?;
    if !check.is_bend {
        return Err(BendError::NotBend);
    }
    let q = span_basis(&b.span[0], &b.span[1])?;
    let s = prolongation(&q);
    if s.len() != 2 {
        return Err(BendError::ProlongationDimension(s.len()));
    }
    let out = analyze(b.k + 1, &s[0], &s[1], tol)?;
    if out.witness.is_none() {
        return Err(BendError::NotBend);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::PLANE_VARS;

    fn poly(s: &str, k: usize) -> HomPoly {
        HomPoly::from_expr(&Expr::parse(s, &["x", "y"]).unwrap(), k).unwrap()
    }

    #[test]
    fn derivatives_and_parsing() {
        let p = poly("x^2*y - 3*y^3", 3);
        assert_eq!(p.coeffs(), &[-3.0, 0.0, 1.0, 0.0]);
        assert_eq!(p.dx(), poly("2*x*y", 2));
        assert_eq!(p.dy(), poly("x^2 - 9*y^2", 2));
        assert!(HomPoly::from_expr(&Expr::parse("x^2 + y", &["x", "y"]).unwrap(), 2).is_err());
        assert!(HomPoly::from_expr(&Expr::parse("x^3", &["x", "y"]).unwrap(), 2).is_err());
        assert!(HomPoly::from_expr(&Expr::parse("x1", &PLANE_VARS).unwrap(), 1).is_ok());
        assert_eq!(p.to_expr_string("x", "y"), "x^2*y - 3.0*y^3");
        let back = poly(&p.to_string(), 3);
        assert_eq!(back, p);
    }

    #[test]
    fn fiber_identification() {
        let unit = |k: usize, at: (u32, u32)| {
            (0..=k as u32)
                .map(|r| ((r, k as u32 - r), if (r, k as u32 - r) == at { 1.0 } else { 0.0 }))
                .collect::<BTreeMap<_, _>>()
        };
        assert_eq!(poly_from_fiber_vector(2, &unit(2, (1, 1))).unwrap(), poly("x*y", 2));
        assert_eq!(poly_from_fiber_vector(2, &unit(2, (2, 0))).unwrap(), poly("x^2/2", 2));
        let mut nu = unit(3, (0, 3));
        nu.insert((2, 1), -1.0);
        assert_eq!(poly_from_fiber_vector(3, &nu).unwrap(), poly("y^3/6 - x^2*y/2", 3));
        let mut partial = unit(2, (1, 1));
        partial.remove(&(0, 2));
        assert_eq!(poly_from_fiber_vector(2, &partial), Err(BendError::MissingComponent(0, 2)));
    }

    #[test]
    fn bend_examples() {
        let c = is_bend(2, &poly("x^2 - y^2", 2), &poly("x*y", 2)).unwrap();
        assert!(c.is_bend);
        let c = is_bend(3, &poly("x^3", 3), &poly("x^2*y", 3)).unwrap();
        assert!(c.is_bend);
        let m = structure_matrix(&c.witness.as_ref().unwrap()[0], &c.witness.as_ref().unwrap()[1]).unwrap();
        assert_eq!(classify_bend(m.to_array(), 1e-9).unwrap().kind, ZetaKind::Zero);
        let c = is_bend(3, &poly("x^3", 3), &poly("x*y^2", 3)).unwrap();
        assert!(!c.is_bend);
        assert_eq!(is_bend(2, &poly("x^2", 2), &poly("2*x^2", 2)), Err(BendError::Dependent));
    }

    #[test]
    fn witness_for_parabolic_quadratics() {
        let c = is_bend(2, &poly("x^2", 2), &poly("x*y", 2)).unwrap();
        let [f, g] = c.witness.unwrap();
        assert_eq!(f, poly("x^2*y", 3));
        assert_eq!(g, poly("x^3", 3));
        let m = structure_matrix(&f, &g).unwrap();
        for (a, b) in m.to_array().iter().zip([0.0, 3.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn structure_matrices() {
        let f = poly("x^2*y", 3);
        let m = structure_matrix(&f, &poly("x^3", 3)).unwrap();
        assert!((m.beta - 3.0).abs() < 1e-12 && m.alpha.abs() < 1e-12 && m.gamma.abs() < 1e-12 && m.delta.abs() < 1e-12);
        assert!(matches!(structure_matrix(&f, &f), Err(BendError::InvalidWitness(_))));
        let m = structure_matrix(&poly("x^4/4 + y^4/4", 4), &poly("x^4/4 - y^4/4", 4)).unwrap();
        let expect = [1.0, 0.0, 0.0, -1.0];
        for (a, b) in m.to_array().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            structure_matrix(&poly("x^3", 3), &poly("y^3", 3)),
            Err(BendError::InvalidWitness(_))
        ));
    }

    #[test]
    fn compatibility_sign() {
        // f = Re z³/3, g = Im z³/3 for ζ² = -1: g_x = -f_y, g_y = f_x.
        let f = poly("x^3/3 - x*y^2", 3);
        let m = [0.0, -1.0, 1.0, 0.0];
        assert!(compatibility_residual(&f, m) < 1e-14);
        assert!((compatibility_residual_plus(&f, m) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn bend_kinds() {
        assert_eq!(classify_bend([0.0, 3.0, 0.0, 0.0], 1e-9).unwrap().kind, ZetaKind::Zero);
        let p = classify_bend([1.0, 0.0, 0.0, -1.0], 1e-9).unwrap();
        assert_eq!(p.kind, ZetaKind::Plus);
        assert_eq!(p.generator, [1.0, 0.0, 0.0, -1.0]);
        let m = classify_bend([0.0, -1.0, 1.0, 0.0], 1e-9).unwrap();
        assert_eq!(m.kind, ZetaKind::Minus);
        assert_eq!(classify_bend([2.0, 0.0, 0.0, 2.0], 1e-9), Err(BendError::ScalarMatrix));
    }

    #[test]
    fn normal_forms() {
        let n = normal_form(2, ZetaKind::Minus).unwrap();
        assert_eq!(n.span, [poly("x^2 - y^2", 2), poly("2*x*y", 2)]);
        let n = normal_form(2, ZetaKind::Zero).unwrap();
        assert_eq!(n.span, [poly("x^2", 2), poly("2*x*y", 2)]);
        let n = normal_form(3, ZetaKind::Plus).unwrap();
        assert_eq!(n.span, [poly("x^3 + 3*x*y^2", 3), poly("3*x^2*y + y^3", 3)]);
        assert!(normal_form(1, ZetaKind::Plus).is_err());
    }

    #[test]
    fn prolongations() {
        for kind in ZetaKind::ALL {
            for k in 2..=5 {
                let b = normal_form(k, kind).unwrap();
                let p = prolong_bend(&b, 1e-9).unwrap();
                assert!(p.distance(&normal_form(k + 1, kind).unwrap()) <= 1e-9, "{kind} {k}");
                assert_eq!(p.kind, Some(kind));
            }
        }
        let non = BendSubspace {
            k: 3,
            span: [poly("x^3", 3), poly("x*y^2", 3)],
            witness: None,
            matrix: None,
            kind: None,
        };
        assert_eq!(prolong_bend(&non, 1e-9), Err(BendError::NotBend));
    }
}
