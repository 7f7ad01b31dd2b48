use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use super::ExprError;

/// Multi-indices `α` with `|α| <= order` in graded lexicographic order:
/// by total degree, then lexicographically descending within a degree,
/// e.g. for two variables `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn multi_indices(nvars: usize, order: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for degree in 0..=order {
        let mut cur = vec![0u32; nvars];
        fill_degree(&mut cur, 0, degree as u32, &mut out);
    }
    out
}

fn fill_degree(cur: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(cur.to_vec());
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for first in (0..=remaining).rev() {
        cur[pos] = first;
        fill_degree(cur, pos + 1, remaining - first, out);
    }
    cur[pos] = 0;
}

/// Shared coefficient-table layout for jets with a given variable count and order.
#[derive(Debug)]
struct Layout {
    nvars: usize,
    order: usize,
    indices: Vec<Vec<u32>>,
    degrees: Vec<usize>,
    lookup: HashMap<Vec<u32>, usize>,
    products: OnceLock<Vec<(u32, u32, u32)>>,
}

type LayoutCache = Mutex<HashMap<(usize, usize), Arc<Layout>>>;

impl Layout {
    fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<LayoutCache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard
            .entry((nvars, order))
            .or_insert_with(|| {
                let indices = multi_indices(nvars, order);
                let degrees = indices.iter().map(|a| a.iter().sum::<u32>() as usize).collect();
                let lookup = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
                Arc::new(Layout {
                    nvars,
                    order,
                    indices,
                    degrees,
                    lookup,
                    products: OnceLock::new(),
                })
            })
            .clone()
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    /// `(i, j, k)` triples with `α_i + α_j = α_k` and `|α_k| <= order`.
    fn products(&self) -> &[(u32, u32, u32)] {
        self.products.get_or_init(|| {
            let mut out = Vec::new();
            let mut sum = vec![0u32; self.nvars];
            for (i, a) in self.indices.iter().enumerate() {
                for (j, b) in self.indices.iter().enumerate() {
                    if self.degrees[i] + self.degrees[j] > self.order {
                        // indices are sorted by degree
                        break;
                    }
                    for (s, (x, y)) in sum.iter_mut().zip(a.iter().zip(b)) {
                        *s = x + y;
                    }
                    out.push((i as u32, j as u32, self.lookup[&sum] as u32));
                }
            }
            out
        })
    }
}

/// Truncated Taylor expansion of a function of `n` variables at a base point.
///
/// The coefficient of a multi-index `α` is `∂^α f(base) / α!`. Products are
/// truncated at the jet's order; operations between jets of different order
/// truncate to the smaller one.
#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    base: Arc<[f64]>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.layout.nvars == other.layout.nvars
            && self.layout.order == other.layout.order
            && self.base == other.base
            && self.coeffs == other.coeffs
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl Jet {
    pub fn constant(base: Arc<[f64]>, order: usize, value: f64) -> Jet {
        let layout = Layout::get(base.len(), order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, base, coeffs }
    }

    /// The coordinate function `x_var`, expanded at `base`.
    pub fn variable(base: Arc<[f64]>, order: usize, var: usize) -> Jet {
        assert!(var < base.len(), "variable index out of range");
        let mut jet = Jet::constant(base.clone(), order, base[var]);
        if order >= 1 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    /// Builds a jet from a coefficient table laid out as [`multi_indices`].
    pub fn from_coefficients(base: Arc<[f64]>, order: usize, coeffs: Vec<f64>) -> Jet {
        let layout = Layout::get(base.len(), order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient table size");
        Jet { layout, base, coeffs }
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn multi_indices(&self) -> &[Vec<u32>] {
        &self.layout.indices
    }

    /// Taylor coefficient for `alpha`; zero if `|alpha|` exceeds the order.
    pub fn coefficient(&self, alpha: &[u32]) -> f64 {
        assert_eq!(alpha.len(), self.nvars(), "multi-index length");
        self.layout.lookup.get(alpha).map_or(0.0, |&i| self.coeffs[i])
    }

    /// Partial derivative `∂^α f(base)`. Panics if `|alpha|` exceeds the order,
    /// since the jet carries no information about it.
    pub fn derivative(&self, alpha: &[u32]) -> f64 {
        let i = *self
            .layout
            .lookup
            .get(alpha)
            .unwrap_or_else(|| panic!("multi-index {alpha:?} exceeds jet order {}", self.order()));
        self.coeffs[i] * alpha.iter().map(|&a| factorial(a)).product::<f64>()
    }

    /// First partial derivative with respect to `var`.
    pub fn d(&self, var: usize) -> f64 {
        let mut alpha = vec![0; self.nvars()];
        alpha[var] = 1;
        self.derivative(&alpha)
    }

    /// Second partial derivative `∂²f / ∂x_i ∂x_j`.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        let mut alpha = vec![0; self.nvars()];
        alpha[i] += 1;
        alpha[j] += 1;
        self.derivative(&alpha)
    }

    /// Jet of `∂f/∂x_var`, one order lower. Panics on an order-0 jet.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let layout = Layout::get(self.nvars(), self.order() - 1);
        let mut coeffs = vec![0.0; layout.len()];
        let mut shifted = vec![0u32; self.nvars()];
        for (k, alpha) in layout.indices.iter().enumerate() {
            shifted.copy_from_slice(alpha);
            shifted[var] += 1;
            coeffs[k] = self.coeffs[self.layout.lookup[&shifted]] * f64::from(shifted[var]);
        }
        Jet {
            layout,
            base: self.base.clone(),
            coeffs,
        }
    }

    /// Drops all terms of degree above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.nvars(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet {
            layout,
            base: self.base.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    fn aligned<'a>(&'a self, other: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(self.nvars(), other.nvars(), "jets over different variable counts");
        debug_assert!(self.base == other.base, "jets at different base points");
        match self.order().cmp(&other.order()) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(self), Cow::Borrowed(other)),
            std::cmp::Ordering::Less => (Cow::Borrowed(self), Cow::Owned(other.truncate(self.order()))),
            std::cmp::Ordering::Greater => (Cow::Owned(self.truncate(other.order())), Cow::Borrowed(other)),
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (a, b) = self.aligned(other);
        Jet {
            layout: a.layout.clone(),
            base: a.base.clone(),
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect(),
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut coeffs = vec![0.0; a.layout.len()];
        for &(i, j, k) in a.layout.products() {
            coeffs[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet {
            layout: a.layout.clone(),
            base: a.base.clone(),
            coeffs,
        }
    }

    /// Composes a univariate Taylor series `Σ g_m t^m` (expanded around this
    /// jet's value) with the jet.
    fn compose(&self, series: &[f64]) -> Jet {
        debug_assert_eq!(series.len(), self.order() + 1);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.base.clone(), self.order(), series[self.order()]);
        for m in (0..self.order()).rev() {
            acc = acc.product(&h).add_scalar(series[m]);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order()).map(|m| e / factorial(m as u32)).collect();
        self.compose(&series)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let series: Vec<f64> = (0..=self.order()).map(|m| cycle[m % 4] / factorial(m as u32)).collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let series: Vec<f64> = (0..=self.order()).map(|m| cycle[m % 4] / factorial(m as u32)).collect();
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet, ExprError> {
        let c = self.value();
        if c <= 0.0 {
            return Err(ExprError::Domain(format!("ln of nonpositive value {c}")));
        }
        let series: Vec<f64> = (0..=self.order())
            .map(|m| {
                if m == 0 {
                    c.ln()
                } else {
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (m as f64 * c.powi(m as i32))
                }
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet, ExprError> {
        let c = self.value();
        if c < 0.0 || (c == 0.0 && self.order() > 0) {
            return Err(ExprError::Domain(format!("sqrt is not expandable at {c}")));
        }
        // binom(1/2, m) * c^(1/2 - m)
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for m in 0..=self.order() {
            if m > 0 {
                binom *= (0.5 - (m as f64 - 1.0)) / m as f64;
            }
            series.push(binom * c.sqrt() / c.powi(m as i32));
        }
        Ok(self.compose(&series))
    }

    /// `1 / f`. A zero constant term is a pole and is reported as an error.
    pub fn recip(&self) -> Result<Jet, ExprError> {
        let c = self.value();
        if c == 0.0 {
            return Err(ExprError::Domain("division by a jet with zero constant term".into()));
        }
        let series: Vec<f64> = (0..=self.order())
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign / c.powi(m as i32 + 1)
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, ExprError> {
        Ok(self.product(&other.recip()?))
    }

    pub fn powi(&self, n: i32) -> Result<Jet, ExprError> {
        if n < 0 {
            if self.value() == 0.0 {
                return Err(ExprError::Domain(format!("zero raised to negative power {n}")));
            }
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(self.base.clone(), self.order(), 1.0);
        let mut square = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.product(&square);
            }
            e >>= 1;
            if e > 0 {
                square = square.product(&square);
            }
        }
        Ok(result)
    }

    /// Fails if any coefficient is NaN or infinite.
    pub(crate) fn check_finite(self) -> Result<Jet, ExprError> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(ExprError::Domain("non-finite Taylor coefficient".into()))
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Expr, PLANE_VARS};

    #[test]
    fn graded_lex_layout() {
        let idx = multi_indices(2, 2);
        let want: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(idx, want);
        assert_eq!(multi_indices(5, 3).len(), 56);
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn quadratic_jet() {
        let e = Expr::parse("x1^2 - x2^2", &PLANE_VARS).unwrap();
        let j = e.eval_jet(&[0.0, 0.0], 2).unwrap();
        for alpha in multi_indices(2, 2) {
            let want = match alpha.as_slice() {
                [2, 0] => 1.0,
                [0, 2] => -1.0,
                _ => 0.0,
            };
            assert_eq!(j.coefficient(&alpha), want, "{alpha:?}");
        }
    }

    #[test]
    fn order_zero_is_value() {
        let e = Expr::parse("sin(x1)*exp(x2) / (1 + x1^2)", &PLANE_VARS).unwrap();
        let j = e.eval_jet(&[0.3, -1.2], 0).unwrap();
        assert_eq!(j.coefficients().len(), 1);
        assert_eq!(j.value(), e.eval(&[0.3, -1.2]).unwrap());
    }

    #[test]
    fn exp_coefficients_against_finite_differences() {
        let e = Expr::parse("exp(x1)", &["x1"]).unwrap();
        let j = e.eval_jet(&[0.0], 3).unwrap();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (m, w) in want.iter().enumerate() {
            assert!((j.coefficient(&[m as u32]) - w).abs() <= 1e-14);
        }
        // central differences with step 1e-5; their own truncation and
        // rounding error bounds how closely they can agree
        let h = 1e-5;
        let f = |x: f64| e.eval(&[x]).unwrap();
        let d1 = (f(h) - f(-h)) / (2.0 * h);
        let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let d3 = (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h.powi(3));
        assert!((j.derivative(&[1]) - d1).abs() <= 1e-9);
        assert!((j.derivative(&[2]) - d2).abs() <= 1e-5);
        assert!((j.derivative(&[3]) - d3).abs() <= 1e-1);
    }

    #[test]
    fn partial_lowers_order() {
        let e = Expr::parse("x1^3*x2 + x2^2", &PLANE_VARS).unwrap();
        let j = e.eval_jet(&[1.0, 2.0], 3).unwrap();
        let dx = j.partial(0);
        assert_eq!(dx.order(), 2);
        // ∂x = 3 x1^2 x2 -> 6 at (1,2); ∂x∂x = 6 x1 x2 -> 12
        assert!((dx.value() - 6.0).abs() < 1e-12);
        assert!((dx.d(0) - 12.0).abs() < 1e-12);
        assert!((j.d2(0, 1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pole_is_error() {
        let e = Expr::parse("1 / x1", &PLANE_VARS).unwrap();
        assert!(matches!(e.eval_jet(&[0.0, 1.0], 2), Err(ExprError::Domain(_))));
        let e = Expr::parse("sqrt(x1)", &PLANE_VARS).unwrap();
        assert!(e.eval_jet(&[0.0, 1.0], 0).is_ok());
        assert!(e.eval_jet(&[0.0, 1.0], 1).is_err());
    }
}
