//! Symplectic vector spaces and their self-adjoint operators.
//!
//! An operator `A` is self-adjoint when `⟨Av, w⟩ = ⟨v, Aw⟩`, i.e. `AᵀJ = JA`
//! for the Gram matrix `J`. In dimension 4 a non-scalar self-adjoint operator
//! has a quadratic minimal polynomial, and its discriminant splits such
//! operators into three classes (complex structure, two symplectic
//! eigenplanes, or a Lagrangian kernel).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, RANK_TOL};

/// Tolerance for isotropy checks (`⟨v, w⟩ = 0`) on normalized vectors.
pub const ISOTROPY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram matrix must be square with positive even size, got {0}x{1}")]
    BadShape(usize, usize),
    #[error("Gram matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("Gram matrix is degenerate")]
    Degenerate,
    #[error("operator is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),
    #[error("A^2 is not in span{{I, A}} (residual {0:e})")]
    NotQuadratic(f64),
    #[error("zero vector")]
    ZeroVector,
    #[error("vectors are linearly dependent")]
    DependentVectors,
    #[error("plane is not Lagrangian")]
    NotLagrangian,
    #[error("planes are not complementary")]
    NotComplementary,
    #[error("complementary plane is Lagrangian, so the construction degenerates")]
    LagrangianComplement,
}

/// A real vector space with the form `⟨v, w⟩ = vᵀ J w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    gram: DMatrix<f64>,
}

impl SymplecticSpace {
    pub fn new(gram: DMatrix<f64>) -> Result<Self, SymplecticError> {
        let (r, c) = gram.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(SymplecticError::BadShape(r, c));
        }
        if gram.transpose() != -&gram {
            return Err(SymplecticError::NotAntisymmetric);
        }
        let scale = linalg::max_abs(&gram);
        if scale == 0.0 || (&gram / scale).determinant().abs() <= 1e-12 {
            return Err(SymplecticError::Degenerate);
        }
        Ok(SymplecticSpace { gram })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn form(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.gram * w)[(0, 0)]
    }

    /// The matrix of pairings `⟨aᵢ, bⱼ⟩` between the columns of `a` and `b`.
    pub fn pairing(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a.transpose() * &self.gram * b
    }

    fn check_dim(&self, n: usize) -> Result<(), SymplecticError> {
        if n != self.dim() {
            return Err(SymplecticError::DimensionMismatch {
                expected: self.dim(),
                got: n,
            });
        }
        Ok(())
    }
}

/// `J[i, n+i] = 1`, `J[n+i, i] = -1`.
pub fn standard_space(n: usize) -> SymplecticSpace {
    assert!(n >= 1, "n must be positive");
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    SymplecticSpace { gram: j }
}

/// A linear endomorphism given by its matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(DMatrix<f64>);

impl Operator {
    pub fn new(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "operator matrix must be square");
        Operator(m)
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Self {
        Operator(DMatrix::from_row_slice(n, n, data))
    }

    pub fn identity(n: usize) -> Self {
        Operator(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }
}

impl From<DMatrix<f64>> for Operator {
    fn from(m: DMatrix<f64>) -> Self {
        Operator::new(m)
    }
}

/// Max-norm of `AᵀJ - JA`.
pub fn self_adjoint_defect(sp: &SymplecticSpace, a: &Operator) -> Result<f64, SymplecticError> {
    sp.check_dim(a.dim())?;
    let m = a.matrix();
    Ok(linalg::max_abs(&(m.transpose() * sp.gram() - sp.gram() * m)))
}

pub fn is_self_adjoint(sp: &SymplecticSpace, a: &Operator, tol: f64) -> Result<bool, SymplecticError> {
    Ok(self_adjoint_defect(sp, a)? <= tol)
}

/// `A * B = (AB + BA) / 2`.
pub fn jordan_product(a: &Operator, b: &Operator) -> Result<Operator, SymplecticError> {
    if a.dim() != b.dim() {
        return Err(SymplecticError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let (ma, mb) = (a.matrix(), b.matrix());
    Ok(Operator((ma * mb + mb * ma) * 0.5))
}

/// Relative cutoff for new Krylov directions.
pub const CYCLIC_TOL: f64 = 1e-8;

/// Orthonormal basis (columns) of `Span{v, Av, A²v, ...}`.
pub fn cyclic_subspace(
    sp: &SymplecticSpace,
    a: &Operator,
    v: &DVector<f64>,
) -> Result<DMatrix<f64>, SymplecticError> {
    sp.check_dim(a.dim())?;
    sp.check_dim(v.len())?;
    let norm = v.norm();
    if norm == 0.0 {
        return Err(SymplecticError::ZeroVector);
    }
    // Arnoldi with one re-orthogonalization pass; a power-iteration basis
    // keeps roundoff directions when A is badly conditioned.
    let scale = a.matrix().norm();
    let mut basis: Vec<DVector<f64>> = vec![v / norm];
    while basis.len() < sp.dim() {
        let mut w = a.matrix() * basis.last().expect("nonempty");
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        let n = w.norm();
        if n <= CYCLIC_TOL * scale {
            break;
        }
        basis.push(w / n);
    }
    Ok(linalg::columns(sp.dim(), &basis))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorType {
    Scalar,
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl OperatorType {
    pub fn name(self) -> &'static str {
        match self {
            OperatorType::Scalar => "scalar",
            OperatorType::Elliptic => "elliptic",
            OperatorType::Hyperbolic => "hyperbolic",
            OperatorType::Parabolic => "parabolic",
        }
    }
}

impl fmt::Display for OperatorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EigenData {
    Scalar {
        lambda: f64,
    },
    /// Eigenvalues `re ± i·im`; `complex_structure` is `(A - re·I)/im`, squaring to `-I`.
    Elliptic {
        re: f64,
        im: f64,
        complex_structure: DMatrix<f64>,
    },
    /// `lambdas[0] > lambdas[1]`; `planes[i]` holds an orthonormal basis of `Ker(A - λᵢI)`.
    Hyperbolic {
        lambdas: [f64; 2],
        planes: [DMatrix<f64>; 2],
    },
    /// `kernel` spans `Ker(A - λI)`, `image` spans `Im(A - λI)`; both orthonormal.
    Parabolic {
        lambda: f64,
        kernel: DMatrix<f64>,
        image: DMatrix<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub kind: OperatorType,
    /// Monic minimal polynomial, highest degree first: `[1, -λ]` or `[1, p, q]`.
    pub min_poly: Vec<f64>,
    /// `p² - 4q` (zero for scalar operators).
    pub discriminant: f64,
    /// Residual of the least-squares fit of `A²` in `span{I, A}`.
    pub fit_residual: f64,
    pub eigen: EigenData,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Relative tolerance for the self-adjointness, scalar and minimal-polynomial checks.
    pub tol: f64,
    /// Half-width of the parabolic band, relative to `‖A₀‖_F²` where
    /// `A₀ = A - (trA/4)I`.
    pub band: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol: 1e-9, band: 1e-9 }
    }
}

impl ClassifyOptions {
    pub fn with_tol(tol: f64) -> Self {
        ClassifyOptions { tol, band: tol }
    }
}

/// Classify a self-adjoint operator on a 4-dimensional symplectic space.
pub fn classify_dim4(
    sp: &SymplecticSpace,
    a: &Operator,
    opts: ClassifyOptions,
) -> Result<ClassificationResult, SymplecticError> {
    sp.check_dim(4)?;
    sp.check_dim(a.dim())?;
    let m = a.matrix();
    let scale = 1.0 + m.norm();
    let sad = self_adjoint_defect(sp, a)?;
    if sad > opts.tol * scale {
        return Err(SymplecticError::NotSelfAdjoint(sad));
    }
    let id = DMatrix::<f64>::identity(4, 4);
    let center = m.trace() / 4.0;
    let a0 = m - &id * center;
    let a0_norm = a0.norm();
    if a0_norm <= opts.tol * scale {
        return Ok(ClassificationResult {
            kind: OperatorType::Scalar,
            min_poly: vec![1.0, -center],
            discriminant: 0.0,
            fit_residual: 0.0,
            eigen: EigenData::Scalar { lambda: center },
        });
    }

    // A₀² = e·A₀ + c·I in the least-squares sense.
    let a0sq = &a0 * &a0;
    let design = DMatrix::from_fn(16, 2, |r, j| {
        let (i, k) = (r % 4, r / 4);
        if j == 0 {
            a0[(i, k)]
        } else {
            id[(i, k)]
        }
    });
    let rhs = DVector::from_fn(16, |r, _| a0sq[(r % 4, r / 4)]);
    let sol = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("svd solve");
    let (e, c) = (sol[0], sol[1]);
    let fit_residual = (&design * &sol - &rhs).norm();
    if fit_residual > opts.tol * (1.0 + a0sq.norm()) {
        return Err(SymplecticError::NotQuadratic(fit_residual));
    }
    // A = center·I + A₀ satisfies t² + p t + q with roots center + roots(t² - e t - c).
    let p = -(2.0 * center + e);
    let q = center * center + e * center - c;
    let d = e * e + 4.0 * c;
    let band = opts.band * a0_norm * a0_norm;
    let min_poly = vec![1.0, p, q];
    let mid = -p / 2.0;

    let (kind, eigen) = if d < -band {
        let im = (-d).sqrt() / 2.0;
        let b = (m - &id * mid) / im;
        (
            OperatorType::Elliptic,
            EigenData::Elliptic {
                re: mid,
                im,
                complex_structure: b,
            },
        )
    } else if d > band {
        let half = d.sqrt() / 2.0;
        let lambdas = [mid + half, mid - half];
        let planes = lambdas.map(|l| {
            let mut w = linalg::smallest_right_singular(&(m - &id * l), 2);
            linalg::orient_columns(&mut w, 1e-12);
            w
        });
        (OperatorType::Hyperbolic, EigenData::Hyperbolic { lambdas, planes })
    } else {
        let shifted = m - &id * mid;
        let mut kernel = linalg::smallest_right_singular(&shifted, 2);
        let mut image = linalg::largest_left_singular(&shifted, 2);
        linalg::orient_columns(&mut kernel, 1e-12);
        linalg::orient_columns(&mut image, 1e-12);
        (
            OperatorType::Parabolic,
            EigenData::Parabolic {
                lambda: mid,
                kernel,
                image,
            },
        )
    };
    Ok(ClassificationResult {
        kind,
        min_poly,
        discriminant: d,
        fit_residual,
        eigen,
    })
}

/// Whether the span of the two columns of `plane` is Lagrangian.
pub fn is_lagrangian(sp: &SymplecticSpace, plane: &DMatrix<f64>) -> Result<bool, SymplecticError> {
    sp.check_dim(plane.nrows())?;
    if plane.ncols() != 2 || linalg::rank(plane, RANK_TOL) < 2 {
        return Err(SymplecticError::DependentVectors);
    }
    if sp.dim() != 4 {
        return Ok(false);
    }
    let q = linalg::range(plane, RANK_TOL);
    let pair = sp.pairing(&q, &q);
    Ok(pair[(0, 1)].abs() <= ISOTROPY_TOL)
}

/// A self-adjoint `B` with `B² = 0` and `Ker B = Im B = W`, built from a
/// Lagrangian plane `W` and a non-Lagrangian complement `U`.
///
/// `B` vanishes on `W` and sends `u ∈ U` to the unique `h(u) ∈ W` with
/// `⟨u', h(u)⟩ = ⟨u', u⟩` for all `u' ∈ U`; in particular `h(u)` lies in
/// the line `u^⊥ ∩ W`.
pub fn nilpotent_from_lagrangian(
    sp: &SymplecticSpace,
    w: &DMatrix<f64>,
    u: &DMatrix<f64>,
) -> Result<Operator, SymplecticError> {
    sp.check_dim(4)?;
    if !is_lagrangian(sp, w)? {
        return Err(SymplecticError::NotLagrangian);
    }
    if u.nrows() != 4 || u.ncols() != 2 || linalg::rank(u, RANK_TOL) < 2 {
        return Err(SymplecticError::DependentVectors);
    }
    let t = DMatrix::from_fn(4, 4, |i, j| if j < 2 { u[(i, j)] } else { w[(i, j - 2)] });
    if linalg::rank(&t, RANK_TOL) < 4 {
        return Err(SymplecticError::NotComplementary);
    }
    if is_lagrangian(sp, u)? {
        return Err(SymplecticError::LagrangianComplement);
    }
    let g = sp.pairing(u, w);
    let s = sp.pairing(u, u);
    let c = g.lu().solve(&s).ok_or(SymplecticError::NotComplementary)?;
    let mut bc = DMatrix::zeros(4, 4);
    bc.view_mut((2, 0), (2, 2)).copy_from(&c);
    let t_inv = t.clone().try_inverse().ok_or(SymplecticError::NotComplementary)?;
    Ok(Operator(&t * bc * t_inv))
}

/// `F ⊕ Fᵀ` on the standard space of dimension `2n`.
pub fn direct_sum_operator(f: &DMatrix<f64>) -> Operator {
    assert!(f.is_square(), "F must be square");
    let n = f.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(f);
    m.view_mut((n, n), (n, n)).copy_from(&f.transpose());
    Operator(m)
}

/// A representative of each non-scalar class on the standard 4-dimensional
/// space, normalized so that `B² ∈ {-I, 0, I}`.
pub fn model_generator(kind: OperatorType) -> Operator {
    let f = match kind {
        OperatorType::Scalar => DMatrix::identity(2, 2),
        OperatorType::Elliptic => DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        OperatorType::Hyperbolic => DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        OperatorType::Parabolic => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
    };
    direct_sum_operator(&f)
}

fn uniform_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

/// A random element of Sp(2n) for the standard form, as a product of
/// shears and a block-diagonal `G ⊕ G⁻ᵀ`.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let sym = |rng: &mut R| {
        let s = uniform_matrix(rng, n, n);
        (&s + s.transpose()) * 0.5
    };
    let mut upper = DMatrix::identity(2 * n, 2 * n);
    upper.view_mut((0, n), (n, n)).copy_from(&sym(rng));
    let mut lower = DMatrix::identity(2 * n, 2 * n);
    lower.view_mut((n, 0), (n, n)).copy_from(&sym(rng));
    let g = loop {
        let g = uniform_matrix(rng, n, n) + DMatrix::identity(n, n) * 1.5;
        if g.determinant().abs() > 0.1 {
            break g;
        }
    };
    let g_inv_t = g.clone().try_inverse().expect("checked determinant").transpose();
    let mut diag = DMatrix::zeros(2 * n, 2 * n);
    diag.view_mut((0, 0), (n, n)).copy_from(&g);
    diag.view_mut((n, n), (n, n)).copy_from(&g_inv_t);
    upper * diag * lower
}

/// `S (F ⊕ Fᵀ) S⁻¹` for random `F` and random symplectic `S`; self-adjoint
/// for the standard form. With `singular = true`, `F` has rank `n - 1`.
pub fn random_self_adjoint<R: Rng + ?Sized>(rng: &mut R, n: usize, singular: bool) -> Operator {
    let mut f = uniform_matrix(rng, n, n);
    if singular {
        let v = uniform_matrix(rng, n, 1);
        let v = &v / v.norm();
        f = &f - &f * &v * v.transpose();
    }
    let s = random_symplectic(rng, n);
    let s_inv = s.clone().try_inverse().expect("symplectic matrices are invertible");
    Operator(s * direct_sum_operator(&f).into_matrix() * s_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize) -> DVector<f64> {
        DVector::from_fn(4, |j, _| if i == j { 1.0 } else { 0.0 })
    }

    fn plane(a: DVector<f64>, b: DVector<f64>) -> DMatrix<f64> {
        linalg::columns(4, &[a, b])
    }

    #[test]
    fn standard_forms() {
        let j1 = standard_space(1);
        assert_eq!(j1.gram(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        for n in 1..4 {
            let j = standard_space(n);
            let g = j.gram();
            assert_eq!(g.transpose() + g, DMatrix::zeros(2 * n, 2 * n));
            assert_eq!(g * g, -DMatrix::identity(2 * n, 2 * n));
        }
        assert!(SymplecticSpace::new(DMatrix::identity(2, 2)).is_err());
        assert!(SymplecticSpace::new(DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn self_adjoint_examples() {
        let sp = standard_space(2);
        for c in [-2.0, 0.0, 3.5] {
            let a = Operator::new(DMatrix::identity(4, 4) * c);
            assert!(is_self_adjoint(&sp, &a, 0.0).unwrap());
        }
        let j = Operator::new(sp.gram().clone());
        // JᵀJ - JJ = -J² - J² = 2I
        assert_eq!(self_adjoint_defect(&sp, &j).unwrap(), 2.0);
        assert!(is_self_adjoint(&standard_space(1), &j, 1.0).is_err());
    }

    #[test]
    fn jordan_unit_and_square() {
        let a = Operator::from_row_slice(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(jordan_product(&a, &Operator::identity(2)).unwrap(), a);
        let sq = jordan_product(&a, &a).unwrap();
        assert_eq!(sq.matrix(), &(a.matrix() * a.matrix()));
        assert!(jordan_product(&a, &Operator::identity(4)).is_err());
    }

    #[test]
    fn cyclic_examples() {
        let sp = standard_space(2);
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        assert_eq!(cyclic_subspace(&sp, &Operator::identity(4), &v).unwrap().ncols(), 1);
        let par = model_generator(OperatorType::Parabolic);
        let c = cyclic_subspace(&sp, &par, &v).unwrap();
        assert_eq!(c.ncols(), 2);
        assert!(linalg::max_abs(&sp.pairing(&c, &c)) < 1e-10);
        assert_eq!(
            cyclic_subspace(&sp, &par, &DVector::zeros(4)),
            Err(SymplecticError::ZeroVector)
        );
    }

    #[test]
    fn models_square_to_unit_classes() {
        let id = DMatrix::<f64>::identity(4, 4);
        let sq = |k| {
            let m = model_generator(k).into_matrix();
            &m * &m
        };
        assert_eq!(sq(OperatorType::Elliptic), -&id);
        assert_eq!(sq(OperatorType::Hyperbolic), id);
        assert_eq!(sq(OperatorType::Parabolic), DMatrix::zeros(4, 4));
    }

    #[test]
    fn classify_scalar_and_models() {
        let sp = standard_space(2);
        let r = classify_dim4(&sp, &Operator::new(DMatrix::identity(4, 4) * 2.0), Default::default()).unwrap();
        assert_eq!(r.kind, OperatorType::Scalar);
        assert_eq!(r.eigen, EigenData::Scalar { lambda: 2.0 });
        for kind in [OperatorType::Elliptic, OperatorType::Hyperbolic, OperatorType::Parabolic] {
            let r = classify_dim4(&sp, &model_generator(kind), Default::default()).unwrap();
            assert_eq!(r.kind, kind);
        }
        let j = Operator::new(sp.gram().clone());
        assert!(matches!(
            classify_dim4(&sp, &j, Default::default()),
            Err(SymplecticError::NotSelfAdjoint(_))
        ));
    }

    #[test]
    fn elliptic_complex_structure() {
        let sp = standard_space(2);
        let a = Operator::new(model_generator(OperatorType::Elliptic).into_matrix() * 3.0 + DMatrix::identity(4, 4));
        let r = classify_dim4(&sp, &a, Default::default()).unwrap();
        match r.eigen {
            EigenData::Elliptic { re, im, complex_structure } => {
                assert!((re - 1.0).abs() < 1e-12 && (im - 3.0).abs() < 1e-12);
                let b2 = &complex_structure * &complex_structure;
                assert!(linalg::max_abs(&(b2 + DMatrix::identity(4, 4))) < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lagrangian_examples() {
        let sp = standard_space(2);
        assert!(is_lagrangian(&sp, &plane(e(0), e(1))).unwrap());
        assert!(!is_lagrangian(&sp, &plane(e(0), e(2))).unwrap());
        assert_eq!(
            is_lagrangian(&sp, &plane(e(0), e(0) * 2.0)),
            Err(SymplecticError::DependentVectors)
        );
    }

    #[test]
    fn nilpotent_construction() {
        let sp = standard_space(2);
        let w = plane(e(0), e(1));
        let u = plane(e(2), e(3));
        // {e3, e4} is Lagrangian as well, so it cannot serve as U.
        assert_eq!(
            nilpotent_from_lagrangian(&sp, &w, &u),
            Err(SymplecticError::LagrangianComplement)
        );
        let u = plane(e(2) + e(1), e(3) - e(0));
        let b = nilpotent_from_lagrangian(&sp, &w, &u).unwrap();
        let m = b.matrix();
        assert!(linalg::max_abs(m) > 0.5);
        assert!(linalg::max_abs(&(m * m)) < 1e-12);
        assert!(self_adjoint_defect(&sp, &b).unwrap() < 1e-12);
        let shifted = Operator::new(m + DMatrix::identity(4, 4));
        let r = classify_dim4(&sp, &shifted, Default::default()).unwrap();
        assert_eq!(r.kind, OperatorType::Parabolic);
        match r.eigen {
            EigenData::Parabolic { lambda, kernel, image } => {
                assert!((lambda - 1.0).abs() < 1e-12);
                assert!(linalg::subspace_distance(&kernel, &w) < 1e-9);
                assert!(linalg::subspace_distance(&image, &w) < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            nilpotent_from_lagrangian(&sp, &plane(e(0), e(2)), &u),
            Err(SymplecticError::NotLagrangian)
        );
        assert_eq!(
            nilpotent_from_lagrangian(&sp, &w, &plane(e(0) + e(2), e(1))),
            Err(SymplecticError::NotComplementary)
        );
    }

    #[test]
    fn direct_sums() {
        let sp = standard_space(2);
        assert_eq!(direct_sum_operator(&DMatrix::identity(2, 2)), Operator::identity(4));
        let f = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(self_adjoint_defect(&sp, &direct_sum_operator(&f)).unwrap() <= 1e-14);
    }

    #[test]
    fn random_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sp = standard_space(2);
        for _ in 0..50 {
            let s = random_symplectic(&mut rng, 2);
            let dev = s.transpose() * sp.gram() * &s - sp.gram();
            assert!(linalg::max_abs(&dev) < 1e-10);
            let a = random_self_adjoint(&mut rng, 2, true);
            assert!(self_adjoint_defect(&sp, &a).unwrap() < 1e-9);
            assert!(a.matrix().determinant().abs() < 1e-8);
        }
    }
}
