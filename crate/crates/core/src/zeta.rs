//! The three two-dimensional unital real algebras `x + ζy` with
//! `ζ² = -1` (complex), `ζ² = 0` (dual) and `ζ² = +1` (double numbers),
//! plus the ζ-Laplace and ζ-Cauchy-Riemann residuals in a ζ-complex chart.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZetaKind {
    /// ζ² = -1, the algebra ℂ₋ (ordinary complex numbers).
    Minus,
    /// ζ² = 0, the algebra ℂ₀ (dual numbers).
    Zero,
    /// ζ² = +1, the algebra ℂ₊ (double / split-complex numbers).
    Plus,
}

impl ZetaKind {
    pub const ALL: [ZetaKind; 3] = [ZetaKind::Minus, ZetaKind::Zero, ZetaKind::Plus];

    /// The value of ζ².
    pub fn square(self) -> f64 {
        match self {
            ZetaKind::Minus => -1.0,
            ZetaKind::Zero => 0.0,
            ZetaKind::Plus => 1.0,
        }
    }

    /// `(ζ²)^r` with the convention `0^0 = 1`.
    pub fn square_pow(self, r: u32) -> f64 {
        if r == 0 {
            1.0
        } else {
            self.square().powi(r as i32)
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ZetaKind::Minus => "minus",
            ZetaKind::Zero => "zero",
            ZetaKind::Plus => "plus",
        }
    }
}

impl fmt::Display for ZetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ZetaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "minus" | "-1" | "elliptic" | "complex" => Ok(ZetaKind::Minus),
            "zero" | "0" | "parabolic" | "dual" => Ok(ZetaKind::Zero),
            "plus" | "1" | "+1" | "hyperbolic" | "double" => Ok(ZetaKind::Plus),
            _ => Err(format!("unknown zeta kind `{s}` (expected minus, zero or plus)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZetaError {
    #[error("cannot combine a {0} number with a {1} number")]
    KindMismatch(ZetaKind, ZetaKind),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// An element `re + ζ·im` of the algebra selected by `kind`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaNum {
    pub re: f64,
    pub im: f64,
    pub kind: ZetaKind,
}

impl ZetaNum {
    pub fn new(re: f64, im: f64, kind: ZetaKind) -> Self {
        ZetaNum { re, im, kind }
    }

    pub fn one(kind: ZetaKind) -> Self {
        ZetaNum::new(1.0, 0.0, kind)
    }

    fn same_kind(&self, other: &ZetaNum) -> Result<(), ZetaError> {
        if self.kind != other.kind {
            return Err(ZetaError::KindMismatch(self.kind, other.kind));
        }
        Ok(())
    }

    pub fn add(&self, other: &ZetaNum) -> Result<ZetaNum, ZetaError> {
        self.same_kind(other)?;
        Ok(ZetaNum::new(self.re + other.re, self.im + other.im, self.kind))
    }

    pub fn mul(&self, other: &ZetaNum) -> Result<ZetaNum, ZetaError> {
        self.same_kind(other)?;
        let z2 = self.kind.square();
        Ok(ZetaNum::new(
            self.re * other.re + z2 * self.im * other.im,
            self.re * other.im + self.im * other.re,
            self.kind,
        ))
    }

    pub fn pow(&self, k: u32) -> ZetaNum {
        (0..k).fold(ZetaNum::one(self.kind), |acc, _| {
            acc.mul(self).expect("same kind by construction")
        })
    }

    pub fn scale(&self, s: f64) -> ZetaNum {
        ZetaNum::new(self.re * s, self.im * s, self.kind)
    }
}

/// `(s + 1/l)! := (1 + 1/l)(2 + 1/l)···(s + 1/l)`; the empty product for `s = 0` is 1.
pub fn frac_factorial(s: u32, l: u32) -> f64 {
    assert!(l >= 2, "l must be at least 2");
    let frac = 1.0 / f64::from(l);
    (1..=s).map(|j| f64::from(j) + frac).product()
}

fn plane_point(f: &Expr, point: [f64; 2]) -> Result<(), ZetaError> {
    if f.nvars() != 2 {
        return Err(ExprError::Arity {
            expected: 2,
            got: f.nvars(),
        }
        .into());
    }
    let _ = point;
    Ok(())
}

/// `f_xx - ζ² f_yy` at `point`, for `f` over two variables.
pub fn zeta_laplace_residual(f: &Expr, point: [f64; 2], kind: ZetaKind) -> Result<f64, ZetaError> {
    plane_point(f, point)?;
    let jet = f.eval_jet(&point, 2)?;
    Ok(jet.d2(0, 0) - kind.square() * jet.d2(1, 1))
}

/// Residuals `(u_x + ζ² v_y, u_y - ζ² v_x)` of the ζ-Cauchy-Riemann system
/// `u_x = -ζ² v_y, u_y = ζ² v_x`.
///
/// For ζ² = -1 this is the usual `u_x = v_y, u_y = -v_x`. The more common
/// convention for a general ζ (`u_x = v_y, u_y = ζ² v_x`, i.e. `u + ζv`
/// holomorphic in `x + ζy`) differs by the sign of the first equation when
/// ζ² = +1; under the convention implemented here a solution pair has
/// `u_xx + u_yy = 0` for every kind, which agrees with the ζ-Laplace
/// equation only for ζ² = -1 and (trivially) ζ² = 0.
pub fn cauchy_riemann_residual(
    u: &Expr,
    v: &Expr,
    point: [f64; 2],
    kind: ZetaKind,
) -> Result<(f64, f64), ZetaError> {
    plane_point(u, point)?;
    plane_point(v, point)?;
    let ju = u.eval_jet(&point, 1)?;
    let jv = v.eval_jet(&point, 1)?;
    let z2 = kind.square();
    Ok((ju.d(0) + z2 * jv.d(1), ju.d(1) - z2 * jv.d(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::PLANE_VARS;

    fn z(re: f64, im: f64, kind: ZetaKind) -> ZetaNum {
        ZetaNum::new(re, im, kind)
    }

    fn expr(s: &str) -> Expr {
        Expr::parse(s, &PLANE_VARS).unwrap()
    }

    #[test]
    fn squares_and_cubes() {
        let a = z(1.0, 2.0, ZetaKind::Zero);
        assert_eq!(a.mul(&a).unwrap(), z(1.0, 4.0, ZetaKind::Zero));
        let i = z(0.0, 1.0, ZetaKind::Minus);
        assert_eq!(i.mul(&i).unwrap(), z(-1.0, 0.0, ZetaKind::Minus));
        assert_eq!(z(1.0, 1.0, ZetaKind::Plus).pow(3), z(4.0, 4.0, ZetaKind::Plus));
    }

    #[test]
    fn kind_mismatch() {
        let a = z(1.0, 0.0, ZetaKind::Zero);
        let b = z(1.0, 0.0, ZetaKind::Plus);
        assert_eq!(a.mul(&b), Err(ZetaError::KindMismatch(ZetaKind::Zero, ZetaKind::Plus)));
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn powers() {
        // Re z³ = x³ - 3xy², Im z³ = 3x²y - y³ at (1,1)
        assert_eq!(z(1.0, 1.0, ZetaKind::Minus).pow(3), z(-2.0, 2.0, ZetaKind::Minus));
        assert_eq!(z(1.0, 1.0, ZetaKind::Zero).pow(3), z(1.0, 3.0, ZetaKind::Zero));
        for kind in ZetaKind::ALL {
            assert_eq!(z(2.0, 0.0, kind).pow(5), z(32.0, 0.0, kind));
            assert_eq!(z(0.7, -0.3, kind).pow(0), ZetaNum::one(kind));
        }
        assert_eq!(z(0.0, 1.0, ZetaKind::Zero).pow(2), z(0.0, 0.0, ZetaKind::Zero));
    }

    #[test]
    fn fractional_factorial() {
        assert_eq!(frac_factorial(0, 2), 1.0);
        assert_eq!(frac_factorial(0, 7), 1.0);
        assert_eq!(frac_factorial(2, 2), 3.75);
        assert!((frac_factorial(1, 3) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn laplace_residuals() {
        let h = expr("x1^2 - x2^2");
        assert!(zeta_laplace_residual(&h, [0.4, -1.3], ZetaKind::Minus).unwrap().abs() < 1e-12);
        assert!((zeta_laplace_residual(&expr("x1^2"), [0.4, 2.0], ZetaKind::Zero).unwrap() - 2.0).abs() < 1e-12);
        for kind in ZetaKind::ALL {
            assert!(zeta_laplace_residual(&expr("x1*x2"), [1.5, -0.5], kind).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn cauchy_riemann_examples() {
        let (r1, r2) =
            cauchy_riemann_residual(&expr("x1^2 - x2^2"), &expr("2*x1*x2"), [1.0, 2.0], ZetaKind::Minus).unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        for kind in ZetaKind::ALL {
            let (r1, r2) = cauchy_riemann_residual(&expr("3"), &expr("-1.5"), [0.2, 0.1], kind).unwrap();
            assert_eq!((r1, r2), (0.0, 0.0));
        }
        let (r1, r2) = cauchy_riemann_residual(&expr("x1"), &expr("0"), [0.3, 0.3], ZetaKind::Zero).unwrap();
        assert_eq!((r1, r2), (1.0, 0.0));
    }

    #[test]
    fn plus_convention_yields_ordinary_laplace() {
        // u = x² - y², v = -2xy solves u_x = -v_y, u_y = v_x (ζ² = 1) but u_xx - u_yy = 4.
        let (u, v) = (expr("x1^2 - x2^2"), expr("-2*x1*x2"));
        let (r1, r2) = cauchy_riemann_residual(&u, &v, [0.7, -0.2], ZetaKind::Plus).unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        let lap = zeta_laplace_residual(&u, [0.7, -0.2], ZetaKind::Plus).unwrap();
        assert!((lap - 4.0).abs() < 1e-12);
    }

    #[test]
    fn arity_mismatch() {
        let e = Expr::parse("x", &["x"]).unwrap();
        assert!(zeta_laplace_residual(&e, [0.0, 0.0], ZetaKind::Minus).is_err());
    }
}
