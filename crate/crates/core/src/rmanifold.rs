//! The prolonged ζ-Laplace equation on `J^k(ℝ², ℝ)` and the singular
//! R-manifolds `L_{k,l}` built from the multivalued function `z^{k+1/l}`.
//!
//! Jet coordinates are `(x, y, u_{p,q})` for `p + q ≤ k`; `u_{p,q}` stands for
//! `∂^{p+q}u/∂x^p∂y^q`. Indices are stored in graded-lex order: by total
//! degree, and within a degree by decreasing `p`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bends::{self, BendError, BendSubspace, HomPoly};
use crate::output;
use crate::zeta::{frac_factorial, ZetaKind, ZetaNum};

/// Largest prolonged-equation residual accepted by [`lkl_point`].
pub const CONSISTENCY_TOL: f64 = 1e-9;
/// Default finite-difference step in the parameters.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Relative singular-value threshold for the projection Jacobian rank.
pub const RANK_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RManifoldError {
    #[error("jet order k must be at least 2, got {0}")]
    Order(usize),
    #[error("root index l must be at least 2, got {0}")]
    RootIndex(u32),
    #[error("parameters must be finite")]
    NonFinite,
    #[error("the parabolic kind is disabled; set allow_parabolic to generate it")]
    ParabolicDisabled,
    #[error("prolonged equation violated at (r,s)=({r},{s}): residual {residual:e}")]
    Inconsistent { r: u32, s: u32, residual: f64 },
    #[error("parameters at distance {distance:e} from the singular point; need at least {min:e}")]
    NearSingular { distance: f64, min: f64 },
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("radius must be positive and finite, got {0}")]
    Radius(f64),
    #[error("point order {got} does not match {expected}")]
    PointOrder { expected: usize, got: usize },
    #[error(transparent)]
    Bend(#[from] BendError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Number of jet indices `(p,q)` with `p + q ≤ k`.
pub fn index_count(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Position of `u_{p,q}` in graded-lex order.
pub fn index_of(p: u32, q: u32) -> usize {
    let d = (p + q) as usize;
    d * (d + 1) / 2 + (d - p as usize)
}

/// All `(p,q)` with `p + q ≤ k`, in graded-lex order.
pub fn jet_indices(k: usize) -> Vec<(u32, u32)> {
    (0..=k as u32)
        .flat_map(|d| (0..=d).rev().map(move |p| (p, d - p)))
        .collect()
}

/// A point of `J^k(ℝ², ℝ)` in the standard chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetChartPoint {
    pub k: usize,
    pub x: f64,
    pub y: f64,
    /// `u_{p,q}` in graded-lex order.
    pub u: Vec<f64>,
}

impl JetChartPoint {
    pub fn zero(k: usize) -> Self {
        JetChartPoint { k, x: 0.0, y: 0.0, u: vec![0.0; index_count(k)] }
    }

    pub fn get(&self, p: u32, q: u32) -> f64 {
        self.u[index_of(p, q)]
    }

    pub fn set(&mut self, p: u32, q: u32, v: f64) {
        self.u[index_of(p, q)] = v;
    }

    /// `(x, y, u_{0,0}, u_{1,0}, u_{0,1}, …)`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + self.u.len());
        v.push(self.x);
        v.push(self.y);
        v.extend_from_slice(&self.u);
        v
    }

    pub fn from_vector(k: usize, v: &[f64]) -> Result<Self, RManifoldError> {
        if v.len() != 2 + index_count(k) {
            return Err(RManifoldError::PointOrder { expected: k, got: v.len() });
        }
        Ok(JetChartPoint { k, x: v[0], y: v[1], u: v[2..].to_vec() })
    }

    /// `u_{p,q}` keyed by index.
    pub fn to_map(&self) -> BTreeMap<(u32, u32), f64> {
        jet_indices(self.k).into_iter().zip(self.u.iter().copied()).collect()
    }
}

/// Column names `x, y, u_{p,q}…` matching [`JetChartPoint::to_vector`].
pub fn coordinate_names(k: usize) -> Vec<String> {
    let mut names = vec!["x".to_string(), "y".to_string()];
    names.extend(jet_indices(k).into_iter().map(|(p, q)| format!("u_{{{p},{q}}}")));
    names
}

/// `u_{2+r,s} - ζ² u_{r,s+2}` for every `r + s ≤ k-2`, in graded-lex order of `(r,s)`.
pub fn prolonged_residuals(pt: &JetChartPoint, kind: ZetaKind) -> Vec<f64> {
    if pt.k < 2 {
        return Vec::new();
    }
    let z2 = kind.square();
    jet_indices(pt.k - 2)
        .into_iter()
        .map(|(r, s)| pt.get(2 + r, s) - z2 * pt.get(r, s + 2))
        .collect()
}

/// `ν₁`, `ν₂` as fiber vectors at order `k` together with their polynomial images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuVectors {
    pub k: usize,
    pub kind: ZetaKind,
    #[serde(with = "fiber_triples")]
    pub nu1: BTreeMap<(u32, u32), f64>,
    #[serde(with = "fiber_triples")]
    pub nu2: BTreeMap<(u32, u32), f64>,
    pub images: [HomPoly; 2],
    /// Principal-angle distance between the image span and the normal form.
    pub normal_form_distance: f64,
    /// Same distance after exchanging `x` and `y` in the images.
    pub swapped_normal_form_distance: f64,
}

/// Fiber vectors serialize as `[p, q, value]` triples.
mod fiber_triples {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<(u32, u32), f64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(u32, u32, f64)> = m.iter().map(|(&(p, q), &x)| (p, q, x)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(u32, u32), f64>, D::Error> {
        let v: Vec<(u32, u32, f64)> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|(p, q, x)| ((p, q), x)).collect())
    }
}

/// `ν₁ = Σ ζ^{2r} ∂/∂u_{2r,k-2r}` and `ν₂ = Σ ζ^{2r} ∂/∂u_{2r+1,k-2r-1}`.
pub fn nu_vectors(k: usize, kind: ZetaKind) -> Result<NuVectors, RManifoldError> {
    if k < 2 {
        return Err(RManifoldError::Order(k));
    }
    let ku = k as u32;
    let fiber = |odd: u32| -> BTreeMap<(u32, u32), f64> {
        let mut m: BTreeMap<(u32, u32), f64> = (0..=ku).map(|p| ((p, ku - p), 0.0)).collect();
        let mut r = 0;
        while 2 * r + odd <= ku {
            m.insert((2 * r + odd, ku - 2 * r - odd), kind.square_pow(r));
            r += 1;
        }
        m
    };
    let nu1 = fiber(0);
    let nu2 = fiber(1);
    let images = [bends::poly_from_fiber_vector(k, &nu1)?, bends::poly_from_fiber_vector(k, &nu2)?];
    let nf = bends::normal_form(k, kind)?;
    let span = |span: [HomPoly; 2]| BendSubspace { k, span, witness: None, matrix: None, kind: None };
    let normal_form_distance = span(images.clone()).distance(&nf);
    let swapped_normal_form_distance = span([images[0].swap_xy(), images[1].swap_xy()]).distance(&nf);
    Ok(NuVectors { k, kind, nu1, nu2, images, normal_form_distance, swapped_normal_form_distance })
}

/// Which closed form generates the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LklVariant {
    /// `x + ζy` is the `l`-th power of the top-order ζ-number, so that the
    /// surface is the k-jet graph of the real part of `z^{k+1/l}`.
    #[default]
    JetOfRoot,
    /// `x + ζy = (u_{k,0} + ζu_{k-1,1})^k / (k+1/l)!` with the `u`-families
    /// taken without the `ζ²` factor. Not Cartan-integral; kept for comparison.
    AsPrinted,
}

/// Parameters of `L_{k,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RManifoldSpec {
    pub k: usize,
    pub l: u32,
    pub kind: ZetaKind,
    #[serde(default)]
    pub variant: LklVariant,
    /// The parabolic kind is generated only when set; its consistency is
    /// reported rather than asserted.
    #[serde(default)]
    pub allow_parabolic: bool,
}

impl RManifoldSpec {
    pub fn new(k: usize, l: u32, kind: ZetaKind) -> Result<Self, RManifoldError> {
        let spec = RManifoldSpec { k, l, kind, variant: LklVariant::default(), allow_parabolic: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_variant(mut self, variant: LklVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_parabolic(mut self, allow: bool) -> Self {
        self.allow_parabolic = allow;
        self
    }

    pub fn validate(&self) -> Result<(), RManifoldError> {
        if self.k < 2 {
            return Err(RManifoldError::Order(self.k));
        }
        if self.l < 2 {
            return Err(RManifoldError::RootIndex(self.l));
        }
        Ok(())
    }
}

/// The point of `L_{k,l}` with `u_{k,0} = a`, `u_{k-1,1} = b`, without any
/// consistency check.
pub fn lkl_point_unchecked(spec: &RManifoldSpec, (a, b): (f64, f64)) -> Result<JetChartPoint, RManifoldError> {
    spec.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(RManifoldError::NonFinite);
    }
    let (k, l, kind) = (spec.k, spec.l, spec.kind);
    let z2 = kind.square();
    let big_f = frac_factorial(k as u32, l);
    let mut pt = JetChartPoint::zero(k);

    // sigma = ζ² turns u_{k-1,1} = ζ²·Im(w) back into b for the nondegenerate kinds.
    let sigma = match (spec.variant, kind) {
        (LklVariant::AsPrinted, _) | (_, ZetaKind::Zero) => 1.0,
        _ => z2,
    };
    let w = ZetaNum::new(a, sigma * b, kind);

    let base = match spec.variant {
        LklVariant::JetOfRoot => w.pow(l).scale(big_f.powi(-(l as i32))),
        LklVariant::AsPrinted => w.pow(k as u32).scale(1.0 / big_f),
    };
    pt.x = base.re;
    pt.y = base.im;

    for r in 0..=k as u32 {
        let c = 1.0 / (frac_factorial(r, l) * big_f.powi((l * r) as i32));
        let e = w.pow(l * r + 1).scale(c);
        let p = k as u32 - r;
        pt.set(p, 0, e.re);
        if p >= 1 {
            pt.set(p - 1, 1, sigma * e.im);
        }
    }
    // u_{p,q} = ζ² u_{p+2,q-2} along increasing total degree, then q.
    for d in 2..=k as u32 {
        for q in 2..=d {
            let p = d - q;
            let v = z2 * pt.get(p + 2, q - 2);
            pt.set(p, q, v);
        }
    }
    Ok(pt)
}

/// Largest prolonged-equation residual and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub max_residual: f64,
    /// `(r, s)` of the largest residual.
    pub worst: (u32, u32),
    pub consistent: bool,
}

pub fn consistency(pt: &JetChartPoint, kind: ZetaKind) -> Consistency {
    let res = prolonged_residuals(pt, kind);
    let idx = jet_indices(pt.k.saturating_sub(2));
    let (worst, max_residual) = idx
        .into_iter()
        .zip(res.iter().map(|r| r.abs()))
        .fold(((0, 0), 0.0), |acc, (i, r)| if r > acc.1 || r.is_nan() { (i, r) } else { acc });
    Consistency { max_residual, worst, consistent: max_residual <= CONSISTENCY_TOL }
}

/// Point of `L_{k,l}` at parameters `(a, b) = (u_{k,0}, u_{k-1,1})`.
///
/// For the elliptic and hyperbolic kinds the prolonged equation is checked
/// and a violation is an error. The parabolic kind requires
/// `allow_parabolic`; its consistency is available through [`consistency`].
pub fn lkl_point(spec: &RManifoldSpec, params: (f64, f64)) -> Result<JetChartPoint, RManifoldError> {
    if spec.kind == ZetaKind::Zero && !spec.allow_parabolic {
        return Err(RManifoldError::ParabolicDisabled);
    }
    let pt = lkl_point_unchecked(spec, params)?;
    if spec.kind != ZetaKind::Zero {
        let c = consistency(&pt, spec.kind);
        if !c.consistent {
            return Err(RManifoldError::Inconsistent { r: c.worst.0, s: c.worst.1, residual: c.max_residual });
        }
    }
    Ok(pt)
}

fn check_step(h: f64) -> Result<(), RManifoldError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(RManifoldError::Step(h));
    }
    Ok(())
}

/// Central differences of the parametrization in `a` and `b`, unnormalized.
pub fn parameter_derivatives(spec: &RManifoldSpec, (a, b): (f64, f64), h: f64) -> Result<[Vec<f64>; 2], RManifoldError> {
    check_step(h)?;
    let at = |a, b| lkl_point_unchecked(spec, (a, b)).map(|p| p.to_vector());
    let diff = |plus: Vec<f64>, minus: Vec<f64>| -> Vec<f64> {
        plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect()
    };
    Ok([diff(at(a + h, b)?, at(a - h, b)?), diff(at(a, b + h)?, at(a, b - h)?)])
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return v;
    }
    v.into_iter().map(|x| x / n).collect()
}

/// Unit tangent vectors along `a` and `b`, laid out as [`JetChartPoint::to_vector`].
pub fn tangent_vectors(spec: &RManifoldSpec, params: (f64, f64), h: f64) -> Result<[Vec<f64>; 2], RManifoldError> {
    let [ta, tb] = parameter_derivatives(spec, params, h)?;
    Ok([normalized(ta), normalized(tb)])
}

/// `max |t[u_{p,q}] - u_{p+1,q} t[x] - u_{p,q+1} t[y]|` over `p + q ≤ k-1` and the given tangents.
pub fn tangency_defect(pt: &JetChartPoint, tangents: &[Vec<f64>]) -> f64 {
    let k = pt.k;
    let mut worst = 0.0_f64;
    for t in tangents {
        let (tx, ty) = (t[0], t[1]);
        for (p, q) in jet_indices(k - 1) {
            let tu = t[2 + index_of(p, q)];
            let d = (tu - pt.get(p + 1, q) * tx - pt.get(p, q + 1) * ty).abs();
            worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
        }
    }
    worst
}

/// Cartan tangency defect of `L_{k,l}` at `params`, using unit tangents from step `h`.
pub fn cartan_tangency_defect(spec: &RManifoldSpec, params: (f64, f64), h: f64) -> Result<f64, RManifoldError> {
    check_step(h)?;
    let distance = params.0.hypot(params.1);
    if distance < 10.0 * h {
        return Err(RManifoldError::NearSingular { distance, min: 10.0 * h });
    }
    let pt = lkl_point_unchecked(spec, params)?;
    let t = tangent_vectors(spec, params, h)?;
    Ok(tangency_defect(&pt, &t))
}

/// Defects at steps `h` and `h/2` and their ratio (about 1/4 for a second-order scheme).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub h: f64,
    pub defect_h: f64,
    pub defect_half: f64,
    pub ratio: f64,
}

pub fn tangency_convergence(spec: &RManifoldSpec, params: (f64, f64), h: f64) -> Result<Convergence, RManifoldError> {
    let defect_h = cartan_tangency_defect(spec, params, h)?;
    let defect_half = cartan_tangency_defect(spec, params, h / 2.0)?;
    Ok(Convergence { h, defect_h, defect_half, ratio: defect_half / defect_h })
}

/// Singular values (descending) of the `(x, y)`-Jacobian in `(a, b)`.
pub fn projection_singular_values(spec: &RManifoldSpec, params: (f64, f64), h: f64) -> Result<[f64; 2], RManifoldError> {
    let [ta, tb] = parameter_derivatives(spec, params, h)?;
    let j = DMatrix::from_row_slice(2, 2, &[ta[0], tb[0], ta[1], tb[1]]);
    let sv = j.singular_values();
    let (s0, s1) = (sv[0].max(sv[1]), sv[0].min(sv[1]));
    Ok([s0, s1])
}

/// Numerical rank of a 2×2 Jacobian from its singular values.
fn jacobian_rank(sv: [f64; 2], abs_tol: f64) -> usize {
    if sv[0] <= abs_tol {
        0
    } else if sv[1] <= RANK_TOL * sv[0] {
        1
    } else {
        2
    }
}

/// Fiber parts of the two parameter derivatives at the origin, as polynomials.
pub fn bend_at_origin(spec: &RManifoldSpec, h: f64) -> Result<BendSubspace, RManifoldError> {
    let k = spec.k;
    let ds = parameter_derivatives(spec, (0.0, 0.0), h)?;
    let top: Vec<(u32, u32)> = (0..=k as u32).rev().map(|p| (p, k as u32 - p)).collect();
    let mut span = Vec::new();
    for d in &ds {
        let fiber: BTreeMap<(u32, u32), f64> =
            top.iter().map(|&(p, q)| ((p, q), d[2 + index_of(p, q)])).collect();
        span.push(bends::poly_from_fiber_vector(k, &fiber)?);
    }
    let span: [HomPoly; 2] = span.try_into().expect("two derivatives");
    Ok(BendSubspace { k, span, witness: None, matrix: None, kind: Some(spec.kind) })
}

/// A sampled parameter where the projection rank is not 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankFailure {
    pub a: f64,
    pub b: f64,
    pub rank: usize,
    pub singular_values: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularReport {
    pub spec: RManifoldSpec,
    pub radius: f64,
    pub step: f64,
    /// Parameters probed away from the origin.
    pub sampled: usize,
    pub failures: Vec<RankFailure>,
    /// Rank of the differential of `π_{k,k-1}` at the origin, counting
    /// singular values above [`RANK_TOL`] in absolute terms.
    pub origin_rank: usize,
    /// Largest lower-order derivative at the origin.
    pub origin_max_derivative: f64,
    pub bend: [HomPoly; 2],
    pub normal_form_distance: f64,
    /// Distance after exchanging `x` and `y`; informative for the parabolic kind.
    pub swapped_normal_form_distance: f64,
    pub bend_matches_normal_form: bool,
    pub unique_singular_point: bool,
}

/// Probe parameters: `samples` points on circles of radius `radius` and `1`,
/// plus the eight points on the axes and diagonals at both radii.
pub fn probe_params(radius: f64, samples: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let radii: Vec<f64> = if radius < 1.0 { vec![radius, 1.0] } else { vec![radius] };
    for &rho in &radii {
        for j in 0..samples {
            let theta = std::f64::consts::TAU * (j as f64 + 0.5) / samples as f64;
            out.push((rho * theta.cos(), rho * theta.sin()));
        }
        for j in 0..8 {
            let theta = std::f64::consts::FRAC_PI_4 * j as f64;
            out.push((rho * theta.cos(), rho * theta.sin()));
        }
    }
    out
}

/// Checks that the origin is the only singular point of the projection on
/// the probed parameters and extracts the bend there.
pub fn singular_point_report(spec: &RManifoldSpec, radius: f64, samples: usize) -> Result<SingularReport, RManifoldError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RManifoldError::Radius(radius));
    }
    spec.validate()?;
    let h = DEFAULT_STEP * radius.min(1.0);
    let probes = probe_params(radius, samples);
    let mut failures = Vec::new();
    for &(a, b) in &probes {
        let sv = projection_singular_values(spec, (a, b), h)?;
        let rank = jacobian_rank(sv, 0.0);
        if rank != 2 {
            failures.push(RankFailure { a, b, rank, singular_values: sv });
        }
    }

    // Full lower-order projection differential at the origin.
    let ds = parameter_derivatives(spec, (0.0, 0.0), h)?;
    let lower = 2 + index_count(spec.k - 1);
    let origin_max_derivative = ds
        .iter()
        .flat_map(|d| d[..lower].iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let jac = DMatrix::from_fn(lower, 2, |i, j| ds[j][i]);
    let origin_rank = jac.singular_values().iter().filter(|&&v| v > RANK_TOL).count();

    let bend = bend_at_origin(spec, h)?;
    let nf = bends::normal_form(spec.k, spec.kind)?;
    let normal_form_distance = bend.distance(&nf);
    let swapped = BendSubspace {
        span: [bend.span[0].swap_xy(), bend.span[1].swap_xy()],
        ..bend.clone()
    };
    let swapped_normal_form_distance = swapped.distance(&nf);
    let bend_matches_normal_form = normal_form_distance <= 1e-8;
    Ok(SingularReport {
        spec: *spec,
        radius,
        step: h,
        sampled: probes.len(),
        unique_singular_point: failures.is_empty() && origin_rank == 0,
        failures,
        origin_rank,
        origin_max_derivative,
        bend: bend.span,
        normal_form_distance,
        swapped_normal_form_distance,
        bend_matches_normal_form,
    })
}

/// Rows `a, b, x, y, u_{p,q}…` for each parameter pair.
pub fn point_cloud(spec: &RManifoldSpec, params: &[(f64, f64)]) -> Result<(Vec<String>, Vec<Vec<f64>>), RManifoldError> {
    let mut header = vec!["a".to_string(), "b".to_string()];
    header.extend(coordinate_names(spec.k));
    let rows = params
        .iter()
        .map(|&(a, b)| {
            let pt = lkl_point(spec, (a, b))?;
            let mut row = vec![a, b];
            row.extend(pt.to_vector());
            Ok(row)
        })
        .collect::<Result<Vec<_>, RManifoldError>>()?;
    Ok((header, rows))
}

pub fn point_cloud_csv(spec: &RManifoldSpec, params: &[(f64, f64)]) -> Result<String, RManifoldError> {
    let (header, rows) = point_cloud(spec, params)?;
    Ok(output::to_csv(&header, &rows)?)
}

/// A `count × count` grid over `[-extent, extent]²`.
pub fn parameter_grid(extent: f64, count: usize) -> Vec<(f64, f64)> {
    let at = |i: usize| {
        if count <= 1 {
            0.0
        } else {
            -extent + 2.0 * extent * i as f64 / (count - 1) as f64
        }
    };
    (0..count).flat_map(|i| (0..count).map(move |j| (at(i), at(j)))).collect()
}
