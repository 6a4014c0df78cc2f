//! Counting approximates `N_{T,c}(alpha)`, membership in the regions
//! `E_{T,c}` and `F_{T,c}`, the direction map and the sandwich inclusions.
//!
//! A solution `(p, q)` of `||alpha - p/q|| < c/q, 1 <= q < cosh T` is found
//! directly (localized scan around `q alpha`) and then re-tested as the cone
//! point `k (p, q)` against `E_{T,c}`, where `k ∈ K` rotates `alpha` to the
//! pole `u_{n+1}`. The two verdicts must agree outside the rounding bands.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use crate::cone::{embed_k, ConeVector, Dim, GroupElement, Matrix, GROUP_TOL};
use crate::error::{invalid, Error, Result};
use crate::numeric::{cmp_int_f64, cmp_int_square, dot2, largest_int_below};
use crate::rational_points::{
    enumerate_box, enumerate_in_region, within_distance, BoxPoint, LatticeDescriptor,
    RationalApproximate, MAX_HEIGHT,
};

/// Counting window: flow time `T` (denominators `q < cosh T`) and quality `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    t: f64,
    c: f64,
}

impl Window {
    pub fn new(t: f64, c: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 700.0) {
            return Err(invalid(format!("T = {t} must lie in (0, 700]")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid(format!("c = {c} must be positive")));
        }
        Ok(Window { t, c })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn cosh_t(&self) -> f64 {
        self.t.cosh()
    }

    pub fn exp_t(&self) -> f64 {
        self.t.exp()
    }

    /// Largest admissible denominator, i.e. the largest integer `< cosh T`.
    pub fn q_max(&self) -> i64 {
        largest_int_below(self.cosh_t()).clamp(0, i64::MAX as i128) as i64
    }
}

/// Target set `A ⊆ S^{n-1}` for directional counting, with its normalized measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    n: usize,
    kind: DirectionKind,
    measure: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DirectionKind {
    Full,
    /// Open hemisphere `{v : v . axis > 0}`.
    Hemisphere { axis: Vec<f64> },
    /// Open cap `{v : angle(v, center) < radius}`.
    Cap { center: Vec<f64>, radius: f64 },
    /// Open orthant: every coordinate has the given sign.
    Orthant { signs: Vec<i8> },
    Complement(Box<DirectionSet>),
    /// Union of pairwise disjoint sets.
    Union(Vec<DirectionSet>),
}

fn unit(v: &[f64], n: usize) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(invalid("direction vector must be non-zero"));
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

impl DirectionSet {
    pub fn full(dim: Dim) -> Self {
        DirectionSet { n: dim.n(), kind: DirectionKind::Full, measure: 1.0 }
    }

    pub fn hemisphere(dim: Dim, axis: &[f64]) -> Result<Self> {
        let axis = unit(axis, dim.n())?;
        Ok(DirectionSet { n: dim.n(), kind: DirectionKind::Hemisphere { axis }, measure: 0.5 })
    }

    pub fn cap(dim: Dim, center: &[f64], radius: f64) -> Result<Self> {
        let center = unit(center, dim.n())?;
        if !(radius > 0.0 && radius <= std::f64::consts::PI) {
            return Err(invalid("cap radius must lie in (0, pi]"));
        }
        let measure = match dim.n() {
            // S^0 = {-1, +1}; only the center is within an angle < pi
            1 => 0.5,
            2 => radius / std::f64::consts::PI,
            _ => (1.0 - radius.cos()) / 2.0,
        };
        Ok(DirectionSet { n: dim.n(), kind: DirectionKind::Cap { center, radius }, measure })
    }

    pub fn orthant(dim: Dim, signs: &[i8]) -> Result<Self> {
        if signs.len() != dim.n() {
            return Err(Error::Dimension { expected: dim.n(), got: signs.len() });
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(invalid("orthant signs must be +1 or -1"));
        }
        Ok(DirectionSet {
            n: dim.n(),
            kind: DirectionKind::Orthant { signs: signs.to_vec() },
            measure: 0.5f64.powi(dim.n() as i32),
        })
    }

    pub fn complement(set: DirectionSet) -> Self {
        DirectionSet { n: set.n, measure: 1.0 - set.measure, kind: DirectionKind::Complement(Box::new(set)) }
    }

    /// Disjoint union; the measure is the sum of the parts.
    pub fn union(parts: Vec<DirectionSet>) -> Result<Self> {
        let n = parts.first().map(|p| p.n).ok_or_else(|| invalid("empty union"))?;
        if parts.iter().any(|p| p.n != n) {
            return Err(invalid("union of sets on different spheres"));
        }
        let measure: f64 = parts.iter().map(|p| p.measure).sum();
        if measure > 1.0 + 1e-12 {
            return Err(invalid("union parts overlap: total measure exceeds 1"));
        }
        Ok(DirectionSet { n, kind: DirectionKind::Union(parts), measure })
    }

    /// The four open quadrants of `S^1` (or the `2^n` orthants in general).
    pub fn orthant_cells(dim: Dim) -> Vec<DirectionSet> {
        let n = dim.n();
        (0..1u32 << n)
            .map(|bits| {
                let signs: Vec<i8> = (0..n).map(|i| if bits >> i & 1 == 0 { 1 } else { -1 }).collect();
                DirectionSet::orthant(dim, &signs).expect("valid signs")
            })
            .collect()
    }

    /// `vol(A)` for the normalized measure on `S^{n-1}`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// `n` for a set on `S^{n-1}`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &DirectionKind {
        &self.kind
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        let dot = |a: &[f64]| a.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
        match &self.kind {
            DirectionKind::Full => true,
            DirectionKind::Hemisphere { axis } => dot(axis) > 0.0,
            DirectionKind::Cap { center, radius } => dot(center) > radius.cos(),
            DirectionKind::Orthant { signs } => {
                signs.iter().zip(v).all(|(&s, &x)| if s > 0 { x > 0.0 } else { x < 0.0 })
            }
            DirectionKind::Complement(inner) => !inner.contains(v),
            DirectionKind::Union(parts) => parts.iter().any(|p| p.contains(v)),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DirectionKind::Full => "full".into(),
            DirectionKind::Hemisphere { axis } => format!("hemisphere{}", fmt_vec(axis)),
            DirectionKind::Cap { center, radius } => format!("cap{}r{radius}", fmt_vec(center)),
            DirectionKind::Orthant { signs } => {
                let s: String = signs.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
                format!("orthant{s}")
            }
            DirectionKind::Complement(inner) => format!("not-{}", inner.label()),
            DirectionKind::Union(parts) => {
                parts.iter().map(DirectionSet::label).collect::<Vec<_>>().join("|")
            }
        }
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let inner: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", inner.join(" "))
}

impl fmt::Display for DirectionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Constants of the inclusions `F_{T-r0,c_l} \ C_l ⊆ E_{T,c} \ C_0 ⊆ F_{T+r0,c}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SandwichConstants {
    pub c: f64,
    pub ell: u32,
    pub r0: f64,
    pub c_ell: f64,
    /// Height of `C_0`.
    pub c0_height: f64,
    /// Height of `C_l`.
    pub cl_height: f64,
    /// Smallest `T` with `2 cosh(T - r0) + c^2 <= 2 cosh T`.
    pub t_min: f64,
}

impl SandwichConstants {
    /// `r0 = ln 2 + c^2`; `ell` must exceed `c^2 + 1`.
    pub fn new(c: f64, ell: u32) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c must be positive"));
        }
        if f64::from(ell) <= c * c + 1.0 {
            return Err(invalid(format!("ell = {ell} must exceed c^2 + 1 = {}", c * c + 1.0)));
        }
        let r0 = std::f64::consts::LN_2 + c * c;
        let c_ell = shrunk_quality(c, ell);
        // 2 cosh T - 2 cosh(T - r0) - c^2 is strictly increasing in T
        let phi = |t: f64| 2.0 * t.cosh() - 2.0 * (t - r0).cosh() - c * c;
        let (mut lo, mut hi) = (-1.0, 1.0);
        while phi(lo) > 0.0 {
            lo *= 2.0;
        }
        while phi(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(SandwichConstants {
            c,
            ell,
            r0,
            c_ell,
            c0_height: c * c + 1.0,
            cl_height: f64::from(ell),
            t_min: hi,
        })
    }

    /// Smallest `T` for which the inclusions are asserted: `T > r0` and `T >= t_min`.
    pub fn t_threshold(&self) -> f64 {
        self.r0.max(self.t_min)
    }
}

/// `c (1 - c^2 / 2l)^{1/2}`; NaN when `2l < c^2`.
pub fn shrunk_quality(c: f64, ell: u32) -> f64 {
    c * (1.0 - c * c / (2.0 * f64::from(ell))).sqrt()
}

/// Rotation `k ∈ K` with `k (alpha, 1) = e_1`: the rotation by the geodesic
/// angle in `span{alpha, u_{n+1}}`, identity on the orthogonal complement.
pub fn rotation_to_pole(alpha: &[f64]) -> Result<GroupElement<f64>> {
    let m = alpha.len();
    let dim = Dim::new(m.saturating_sub(1))?;
    let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("alpha is not a unit vector (norm {norm})")));
    }
    let pole = m - 1;
    let cos = alpha[pole];
    let sin = alpha[..pole].iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut r = Matrix::identity(m);
    if sin == 0.0 {
        if cos < 0.0 {
            r.set(0, 0, -1.0);
            r.set(pole, pole, -1.0);
        }
        return embed_k(dim, &r);
    }
    // w: unit vector of alpha's component orthogonal to the pole
    let w: Vec<f64> = (0..m).map(|i| if i == pole { 0.0 } else { alpha[i] / sin }).collect();
    let e = |i: usize| if i == pole { 1.0 } else { 0.0 };
    for i in 0..m {
        for j in 0..m {
            let delta = if i == j { 1.0 } else { 0.0 };
            let v = delta + sin * (e(i) * w[j] - w[i] * e(j)) + (cos - 1.0) * (w[i] * w[j] + e(i) * e(j));
            r.set(i, j, v);
        }
    }
    embed_k(dim, &r)
}

/// Verdict of a region membership test; `boundary` is set when the decisive
/// quantity fell inside the rounding band of a threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub inside: bool,
    pub boundary: bool,
}

/// Quantities of a cone point computed without catastrophic cancellation.
struct Stable {
    trunc_sq: f64,
    /// `x_{n+2} - x_{n+1}`.
    gap: f64,
    bracket: f64,
    height: f64,
}

fn stable(x: &ConeVector<f64>) -> Stable {
    let trunc_sq: f64 = x.truncation().iter().map(|v| v * v).sum();
    let (h, a) = (*x.height(), *x.axis());
    // on the cone (h - a)(h + a) = |x~|^2, so one factor is always stable
    let (gap, bracket) = if a > 0.0 {
        let b = h + a;
        (trunc_sq / b, b)
    } else {
        let g = h - a;
        (g, if g > 0.0 { trunc_sq / g } else { 0.0 })
    };
    Stable { trunc_sq, gap, bracket, height: h }
}

fn integer_coords(x: &ConeVector<f64>) -> Option<Vec<i128>> {
    x.is_integer().then(|| x.coords().iter().map(|&v| v as i128).collect())
}

fn float_lt(value: f64, threshold: f64, band: f64) -> Verdict {
    Verdict { inside: value < threshold, boundary: (value - threshold).abs() <= band }
}

fn float_ge(value: f64, threshold: f64, band: f64) -> Verdict {
    Verdict { inside: value >= threshold, boundary: (value - threshold).abs() <= band }
}

fn all(vs: &[Verdict]) -> Verdict {
    Verdict {
        inside: vs.iter().all(|v| v.inside),
        boundary: vs.iter().any(|v| v.boundary),
    }
}

fn rel_band(scale: f64) -> f64 {
    64.0 * f64::EPSILON * scale.abs().max(1.0)
}

/// `x ∈ E_{T,c}`: `2 x_{n+2}(x_{n+2} - x_{n+1}) < c^2`, `1 <= x_{n+2} < cosh T`.
pub fn classify_e(x: &ConeVector<f64>, w: &Window) -> Verdict {
    let c = w.c();
    if let Some(v) = integer_coords(x) {
        let n = x.dim().n();
        let (a, h) = (v[n], v[n + 1]);
        let inside = cmp_int_square(2 * h * (h - a), c) == Ordering::Less
            && h >= 1
            && cmp_int_f64(h, w.cosh_t()) == Ordering::Less;
        return Verdict { inside, boundary: false };
    }
    let s = stable(x);
    let c2 = c * c;
    let value = s.trunc_sq + s.gap * s.gap;
    all(&[
        float_lt(value, c2, 1e-9 * c2 + rel_band(s.height) * (1.0 + c)),
        float_ge(s.height, 1.0, rel_band(s.height)),
        float_lt(s.height, w.cosh_t(), rel_band(s.height)),
    ])
}

/// [`classify_e`] for a point whose height is known to be the integer `h`,
/// e.g. the image under `k ∈ K` of a point of `Λ_0`.
fn classify_e_at_height(x: &ConeVector<f64>, h: i64, w: &Window) -> Verdict {
    if x.is_integer() {
        return classify_e(x, w);
    }
    if h < 1 || cmp_int_f64(i128::from(h), w.cosh_t()) != Ordering::Less {
        return Verdict { inside: false, boundary: false };
    }
    let s = stable(x);
    let c2 = w.c() * w.c();
    float_lt(s.trunc_sq + s.gap * s.gap, c2, 1e-9 * c2 + rel_band(s.height) * (1.0 + w.c()))
}

/// `x ∈ F_{T,c}`: `x_{n+2}^2 - x_{n+1}^2 < c^2`, `1 <= [x] < e^T`.
pub fn classify_f(x: &ConeVector<f64>, w: &Window) -> Verdict {
    let c = w.c();
    if let Some(v) = integer_coords(x) {
        let n = x.dim().n();
        let (a, h) = (v[n], v[n + 1]);
        let b = h + a;
        let inside = cmp_int_square(h * h - a * a, c) == Ordering::Less
            && b >= 1
            && cmp_int_f64(b, w.exp_t()) == Ordering::Less;
        return Verdict { inside, boundary: false };
    }
    let s = stable(x);
    let c2 = c * c;
    all(&[
        float_lt(s.trunc_sq, c2, 1e-9 * c2 + rel_band(s.height) * (1.0 + c)),
        float_ge(s.bracket, 1.0, rel_band(s.height)),
        float_lt(s.bracket, w.exp_t(), rel_band(s.height)),
    ])
}

pub fn in_e(x: &ConeVector<f64>, w: &Window) -> bool {
    classify_e(x, w).inside
}

pub fn in_f(x: &ConeVector<f64>, w: &Window) -> bool {
    classify_f(x, w).inside
}

/// Direction `pi(x) = (x_1..x_n) / ||(x_1..x_n)||`; undefined at polar points
/// `|x_{n+1}| = x_{n+2}`.
pub fn direction(x: &ConeVector<f64>) -> Result<Vec<f64>> {
    let t = x.truncation();
    let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::PolarPoint);
    }
    Ok(t.iter().map(|v| v / norm).collect())
}

fn in_direction(x: &ConeVector<f64>, a: Option<&DirectionSet>) -> bool {
    match a {
        None => true,
        Some(set) => direction(x).is_ok_and(|d| set.contains(&d)),
    }
}

/// Result of `count_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountReport {
    pub alpha: Vec<f64>,
    pub window: Window,
    pub direction: Option<DirectionSet>,
    pub lattice: LatticeDescriptor,
    pub total: usize,
    pub primitive_total: usize,
    /// Solutions whose rotated image is polar (direction undefined).
    pub polar: usize,
    pub boundary_hits: usize,
    /// Counted solutions, as points of `Λ_0` (preimages under the lattice transform).
    pub points: Vec<RationalApproximate>,
    pub elapsed: Duration,
}

impl CountReport {
    pub fn csv_header(dim: Dim) -> String {
        let mut h = String::from("n,c,T");
        for i in 1..=dim.sphere_ambient() {
            write!(h, ",alpha_{i}").unwrap();
        }
        h.push_str(",total,primitive_total,polar,boundary_hits,elapsed_ms");
        h
    }

    /// One CSV row; `elapsed_ms` is written only when `timing` is set (0
    /// otherwise) so that repeated runs are byte-identical.
    pub fn csv_row(&self, timing: bool) -> String {
        let mut r = format!("{},{},{}", self.lattice.dim(), self.window.c(), self.window.t());
        for a in &self.alpha {
            write!(r, ",{a}").unwrap();
        }
        let ms = if timing { self.elapsed.as_secs_f64() * 1e3 } else { 0.0 };
        write!(
            r,
            ",{},{},{},{},{ms:.3}",
            self.total, self.primitive_total, self.polar, self.boundary_hits
        )
        .unwrap();
        r
    }
}

fn check_alpha(alpha: &[f64], dim: Dim) -> Result<()> {
    if alpha.len() != dim.sphere_ambient() {
        return Err(Error::Dimension { expected: dim.sphere_ambient(), got: alpha.len() });
    }
    let norm = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("alpha is not a unit vector (norm {norm})")));
    }
    Ok(())
}

/// Checks that `k ∈ K` and `k (alpha, 1) = e_1`.
fn check_pole_rotation(k: &GroupElement<f64>, alpha: &[f64]) -> Result<()> {
    let dim = k.dim();
    k.rotation_block(GROUP_TOL).ok_or_else(|| invalid("k is not in K"))?;
    let mut v = alpha.to_vec();
    v.push(1.0);
    let img = k.apply(&v)?;
    let n = dim.n();
    let off = img[..n].iter().map(|x| x.abs()).fold(0.0, f64::max);
    if off > GROUP_TOL || (img[n] - 1.0).abs() > GROUP_TOL {
        return Err(invalid("k does not rotate alpha to the pole"));
    }
    Ok(())
}

/// `k^{-1} u_{n+1}` pulled back through a rotation lattice: `R^T alpha`.
fn pulled_back_target(rotation: &Matrix<f64>, alpha: &[f64]) -> Vec<f64> {
    let m = alpha.len();
    (0..m)
        .map(|j| {
            let col: Vec<f64> = (0..m).map(|i| *rotation.get(i, j)).collect();
            dot2(&col, alpha)
        })
        .collect()
}

struct Candidate {
    preimage: RationalApproximate,
    image: ConeVector<f64>,
    direct: Verdict,
}

fn direct_candidates(alpha: &[f64], w: &Window, lattice: &LatticeDescriptor, q_max: i64) -> Result<Vec<Candidate>> {
    let c = w.c();
    if let Some(rot) = lattice.rotation() {
        let target = if lattice.is_standard() { alpha.to_vec() } else { pulled_back_target(&rot, alpha) };
        let boxed = enumerate_box(&target, c, 1, q_max)?;
        return Ok(boxed
            .into_iter()
            .map(|BoxPoint { point, dist_sq }| {
                let (inside, boundary) = within_distance(&target, &point.p, point.q, dist_sq, c);
                Candidate { image: lattice.image(&point), preimage: point, direct: Verdict { inside, boundary } }
            })
            .collect());
    }
    let cosh = w.cosh_t();
    let n = lattice.dim().n();
    let dist_sq = |x: &ConeVector<f64>| -> f64 {
        let h = *x.height();
        x.coords()[..=n].iter().zip(alpha).map(|(xi, ai)| (h * ai - xi).powi(2)).sum()
    };
    let loose = (c * (1.0 + 1e-6) + 1e-9).powi(2);
    let pts = enumerate_in_region(
        lattice,
        |x| *x.height() < cosh * (1.0 + 1e-12) && *x.height() > 1.0 - 1e-9 && dist_sq(x) < loose,
        cosh,
    )?;
    let c2 = c * c;
    Ok(pts
        .into_iter()
        .map(|lp| {
            let h = *lp.x.height();
            let d = dist_sq(&lp.x);
            let band = 1e-9 * c2 + rel_band(h) * (1.0 + c);
            let direct = all(&[
                float_lt(d, c2, band),
                float_ge(h, 1.0, rel_band(h)),
                float_lt(h, cosh, rel_band(h)),
            ]);
            Candidate { preimage: lp.preimage, image: lp.x, direct }
        })
        .collect())
}

/// `N_{T,c}(alpha; Δ)`, optionally restricted to directions `pi(k(p,q)) ∈ A`.
///
/// `k` defaults to [`rotation_to_pole`]. The solutions found by the direct
/// inequalities are cross-checked against `E_{T,c}`-membership of their
/// rotated images; a disagreement outside the rounding bands is an
/// [`Error::Consistency`].
pub fn count_n(
    alpha: &[f64],
    w: &Window,
    lattice: &LatticeDescriptor,
    a: Option<&DirectionSet>,
    k: Option<&GroupElement<f64>>,
) -> Result<CountReport> {
    let start = Instant::now();
    let dim = lattice.dim();
    check_alpha(alpha, dim)?;
    if let Some(set) = a {
        if set.n != dim.n() {
            return Err(invalid("direction set lives on a different sphere"));
        }
    }
    let k = match k {
        Some(k) => {
            check_pole_rotation(k, alpha)?;
            k.clone()
        }
        None => rotation_to_pole(alpha)?,
    };
    let q_max = w.q_max();
    if q_max > MAX_HEIGHT {
        return Err(Error::Range(format!("cosh T exceeds the height limit {MAX_HEIGHT}")));
    }
    let candidates = if q_max >= 1 { direct_candidates(alpha, w, lattice, q_max)? } else { Vec::new() };

    let mut report = CountReport {
        alpha: alpha.to_vec(),
        window: *w,
        direction: a.cloned(),
        lattice: lattice.clone(),
        total: 0,
        primitive_total: 0,
        polar: 0,
        boundary_hits: 0,
        points: Vec::new(),
        elapsed: Duration::ZERO,
    };
    for cand in candidates {
        let coords = k.apply_compensated(cand.image.coords())?;
        let exact = cand.image.is_integer() && k == GroupElement::identity(dim);
        let rotated = ConeVector::from_parts_unchecked(dim, coords, exact);
        let via_e = match lattice.rotation() {
            Some(_) => classify_e_at_height(&rotated, cand.preimage.q, w),
            None => classify_e(&rotated, w),
        };
        if cand.direct.boundary || via_e.boundary {
            report.boundary_hits += 1;
        } else if cand.direct.inside != via_e.inside {
            return Err(Error::Consistency(format!(
                "point {} is {} by the direct test but {} by E-membership",
                cand.preimage,
                if cand.direct.inside { "a solution" } else { "not a solution" },
                if via_e.inside { "inside" } else { "outside" },
            )));
        }
        if !cand.direct.inside {
            continue;
        }
        let polar = direction(&rotated).is_err();
        report.polar += usize::from(polar);
        if !in_direction(&rotated, a) {
            continue;
        }
        report.total += 1;
        report.primitive_total += usize::from(cand.preimage.primitive);
        report.points.push(cand.preimage);
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// `#(E_{T,c}(k Δ))` by global enumeration of `Δ` and membership of the
/// rotated points; the independent route of the correspondence between
/// solutions and `E`-points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotatedCount {
    pub total: usize,
    pub boundary_hits: usize,
}

pub fn count_rotated_e(w: &Window, lattice: &LatticeDescriptor, k: &GroupElement<f64>) -> Result<RotatedCount> {
    let dim = lattice.dim();
    let cosh = w.cosh_t();
    let pts = enumerate_in_region(lattice, |x| *x.height() < cosh * (1.0 + 1e-12), cosh)?;
    let mut out = RotatedCount { total: 0, boundary_hits: 0 };
    let k_lattice = lattice.rotation().is_some();
    for lp in pts {
        let y = ConeVector::from_parts_unchecked(dim, k.apply_compensated(lp.x.coords())?, false);
        let v = if k_lattice { classify_e_at_height(&y, lp.preimage.q, w) } else { classify_e(&y, w) };
        out.total += usize::from(v.inside);
        out.boundary_hits += usize::from(v.boundary);
    }
    Ok(out)
}

/// One scan of the candidate boxes for `c <= c_max` and `q <= cosh T_max`,
/// from which `N_{T,c}(alpha)` is read off for any smaller window.
#[derive(Clone, Debug)]
pub struct ApproximationProfile {
    target: Vec<f64>,
    c_max: f64,
    q_max: i64,
    candidates: Vec<BoxPoint>,
}

impl ApproximationProfile {
    pub fn scan(alpha: &[f64], lattice: &LatticeDescriptor, c_max: f64, t_max: f64) -> Result<Self> {
        let dim = lattice.dim();
        check_alpha(alpha, dim)?;
        let rot = lattice
            .rotation()
            .ok_or_else(|| invalid("profiles need a lattice of the form k Λ_0 with k ∈ K"))?;
        let target = if lattice.is_standard() { alpha.to_vec() } else { pulled_back_target(&rot, alpha) };
        let q_max = Window::new(t_max, c_max)?.q_max();
        if q_max > MAX_HEIGHT {
            return Err(Error::Range(format!("cosh T exceeds the height limit {MAX_HEIGHT}")));
        }
        let candidates = if q_max >= 1 { enumerate_box(&target, c_max, 1, q_max)? } else { Vec::new() };
        Ok(ApproximationProfile { target, c_max, q_max, candidates })
    }

    /// `(total, primitive_total, boundary_hits)` for the window.
    pub fn count(&self, w: &Window) -> Result<(usize, usize, usize)> {
        if w.c() > self.c_max {
            return Err(invalid("window c exceeds the scanned c_max"));
        }
        let q_max = w.q_max();
        if q_max > self.q_max {
            return Err(invalid("window T exceeds the scanned T_max"));
        }
        let mut out = (0, 0, 0);
        for bp in self.candidates.iter().take_while(|bp| bp.point.q <= q_max) {
            let (inside, boundary) = within_distance(&self.target, &bp.point.p, bp.point.q, bp.dist_sq, w.c());
            out.2 += usize::from(boundary);
            if inside {
                out.0 += 1;
                out.1 += usize::from(bp.point.primitive);
            }
        }
        Ok(out)
    }

    /// Denominators `q` of all solutions for quality `c`, ascending.
    pub fn solution_heights(&self, c: f64) -> Vec<i64> {
        self.candidates
            .iter()
            .filter(|bp| within_distance(&self.target, &bp.point.p, bp.point.q, bp.dist_sq, c).0)
            .map(|bp| bp.point.q)
            .collect()
    }
}

/// Which inclusion of the sandwich a point violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inclusion {
    /// `F_{T-r0,c_l,A} \ C_l ⊆ E_{T,c,A} \ C_0`
    Inner,
    /// `E_{T,c,A} \ C_0 ⊆ F_{T+r0,c,A}`
    Outer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichViolation {
    pub point: ConeVector<f64>,
    pub inclusion: Inclusion,
}

fn above_height(x: &ConeVector<f64>, level: f64) -> bool {
    match integer_coords(x) {
        Some(v) => cmp_int_f64(v[x.dim().n() + 1], level) == Ordering::Greater,
        None => *x.height() > level,
    }
}

/// Tests both sandwich inclusions on every supplied point.
pub fn sandwich_check(
    points: &[ConeVector<f64>],
    w: &Window,
    consts: &SandwichConstants,
    a: Option<&DirectionSet>,
) -> Result<Vec<SandwichViolation>> {
    if w.t() <= consts.r0 {
        return Err(invalid(format!("T = {} must exceed r0 = {}", w.t(), consts.r0)));
    }
    if (w.c() - consts.c).abs() > 0.0 {
        return Err(invalid("window c differs from the sandwich constants"));
    }
    let inner_f = Window::new(w.t() - consts.r0, consts.c_ell)?;
    let outer_f = Window::new(w.t() + consts.r0, consts.c)?;
    let mut out = Vec::new();
    for x in points {
        let dir_ok = in_direction(x, a);
        let in_e_minus_c0 = dir_ok && in_e(x, w) && above_height(x, consts.c0_height);
        let in_inner = dir_ok && in_f(x, &inner_f) && above_height(x, consts.cl_height);
        if in_inner && !in_e_minus_c0 {
            out.push(SandwichViolation { point: x.clone(), inclusion: Inclusion::Inner });
        }
        if in_e_minus_c0 && !(dir_ok && in_f(x, &outer_f)) {
            out.push(SandwichViolation { point: x.clone(), inclusion: Inclusion::Outer });
        }
    }
    Ok(out)
}
