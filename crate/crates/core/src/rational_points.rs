//! Exact enumeration of integer points `(p, q)` on the light cone, `||p|| = q`.
//!
//! Two enumerators are provided: a global one (every point up to a height,
//! by sum-of-squares descent) and a localized one that only inspects the
//! integer box of half-width `c` around `q * alpha` for each height `q`.
//! The norm condition is always decided in integer arithmetic; the distance
//! condition `||q alpha - p|| < c` is decided in compensated floating point,
//! with an exact rational re-test inside a `1e-9` relative band around `c^2`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::cone::{ConeVector, Dim, GroupElement, Matrix};
use crate::error::{invalid, Error, Result};
use crate::numeric::{exact_sqrt, isqrt, two_prod};
use crate::scalar::{rational_from_f64, rational_from_int};

/// Largest supported height; `q^2` must fit comfortably in 64 bits.
pub const MAX_HEIGHT: i64 = 3_000_000_000;

/// Relative half-width of the band around `c^2` inside which the distance test
/// is repeated in exact arithmetic.
pub const BOUNDARY_BAND: f64 = 1e-9;

const UNIT_TOL: f64 = 1e-12;

/// A cone point `(p, q)`, i.e. the rational point `p / q` of `S^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalApproximate {
    pub q: i64,
    pub p: Vec<i64>,
    pub primitive: bool,
}

impl RationalApproximate {
    pub fn new(p: Vec<i64>, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(invalid("q must be positive"));
        }
        if q > MAX_HEIGHT {
            return Err(Error::Range(format!("q = {q} exceeds {MAX_HEIGHT}")));
        }
        let norm: i128 = p.iter().map(|&v| i128::from(v) * i128::from(v)).sum();
        if norm != i128::from(q) * i128::from(q) {
            return Err(invalid(format!("||p||^2 = {norm} differs from q^2")));
        }
        let primitive = gcd_all(&p, q) == 1;
        Ok(RationalApproximate { q, p, primitive })
    }

    fn from_valid(p: Vec<i64>, q: i64) -> Self {
        let primitive = gcd_all(&p, q) == 1;
        RationalApproximate { q, p, primitive }
    }

    pub fn dim(&self) -> Dim {
        Dim::new(self.p.len() - 1).expect("constructed with a valid dimension")
    }

    pub fn to_cone(&self) -> ConeVector<f64> {
        let coords = self.p.iter().chain(std::iter::once(&self.q)).map(|&v| v as f64).collect();
        ConeVector::from_parts_unchecked(self.dim(), coords, true)
    }

    /// Squared distance `||q alpha - p||^2` in compensated arithmetic.
    pub fn distance_sq(&self, alpha: &[f64]) -> f64 {
        distance_sq(alpha, &self.p, self.q)
    }
}

/// Primitivity: `gcd(p_1, ..., p_{n+1}, q) = 1`.
pub fn is_primitive(a: &RationalApproximate) -> bool {
    gcd_all(&a.p, a.q) == 1
}

fn gcd_all(p: &[i64], q: i64) -> i64 {
    p.iter().fold(q, |g, &v| g.gcd(&v))
}

/// Point dump format: `q,p_1,...,p_{n+1},primitive`.
impl fmt::Display for RationalApproximate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)?;
        for v in &self.p {
            write!(f, ",{v}")?;
        }
        write!(f, ",{}", u8::from(self.primitive))
    }
}

impl FromStr for RationalApproximate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.trim().split(',').collect();
        if !(4..=6).contains(&fields.len()) {
            return Err(invalid(format!("point line has {} fields", fields.len())));
        }
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| invalid(format!("{t:?}: {e}")));
        let q = parse(fields[0])?;
        let p = fields[1..fields.len() - 1].iter().map(|t| parse(t)).collect::<Result<Vec<_>>>()?;
        let flag = match fields[fields.len() - 1].trim() {
            "0" => false,
            "1" => true,
            other => return Err(invalid(format!("primitive flag {other:?}"))),
        };
        Dim::new(p.len() - 1)?;
        let a = RationalApproximate::new(p, q)?;
        if a.primitive != flag {
            return Err(invalid("primitive flag disagrees with gcd"));
        }
        Ok(a)
    }
}

/// A lattice `g Λ_0` in the cone; the identity transform means `Λ_0` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDescriptor {
    transform: GroupElement<f64>,
}

impl LatticeDescriptor {
    pub fn standard(dim: Dim) -> Self {
        LatticeDescriptor { transform: GroupElement::identity(dim) }
    }

    pub fn new(transform: GroupElement<f64>) -> Result<Self> {
        transform.check()?;
        Ok(LatticeDescriptor { transform })
    }

    pub fn dim(&self) -> Dim {
        self.transform.dim()
    }

    pub fn transform(&self) -> &GroupElement<f64> {
        &self.transform
    }

    pub fn is_standard(&self) -> bool {
        self.transform == GroupElement::identity(self.dim())
    }

    /// Rotation block when the transform lies in `K`.
    pub fn rotation(&self) -> Option<Matrix<f64>> {
        self.transform.rotation_block(UNIT_TOL)
    }

    /// Image `g v` of a point of `Λ_0`.
    pub fn image(&self, v: &RationalApproximate) -> ConeVector<f64> {
        if self.is_standard() {
            return v.to_cone();
        }
        let coords: Vec<f64> = v.p.iter().chain(std::iter::once(&v.q)).map(|&c| c as f64).collect();
        let x = self.transform.apply_compensated(&coords).expect("dimensions agree");
        ConeVector::from_parts_unchecked(self.dim(), x, false)
    }
}

/// A cone point of `Λ_0` inside the candidate box around `q alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxPoint {
    pub point: RationalApproximate,
    /// `||q alpha - p||^2` (compensated).
    pub dist_sq: f64,
}

/// Outcome of a localized enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct NearEnumeration {
    pub points: Vec<RationalApproximate>,
    /// Points whose distance fell in the `1e-9` band around `c` and were
    /// decided by the exact re-test.
    pub boundary_hits: usize,
    /// `c >= q_lo`: the candidate box may reach antipodal or degenerate points.
    pub wide_box: bool,
}

fn check_unit(alpha: &[f64]) -> Result<Dim> {
    let dim = Dim::new(alpha.len().checked_sub(1).ok_or(Error::UnsupportedDimension(0))?)?;
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(invalid("alpha has non-finite entries"));
    }
    let norm: f64 = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(invalid(format!("alpha is not a unit vector (norm {norm})")));
    }
    Ok(dim)
}

fn check_heights(q_lo: i64, q_hi: i64) -> Result<()> {
    if q_lo < 1 {
        return Err(invalid("q_lo must be at least 1"));
    }
    if q_hi > MAX_HEIGHT {
        return Err(Error::Range(format!("q_hi = {q_hi} exceeds {MAX_HEIGHT}")));
    }
    Ok(())
}

/// Compensated `||q alpha - p||^2`.
pub fn distance_sq(alpha: &[f64], p: &[i64], q: i64) -> f64 {
    let qf = q as f64;
    alpha
        .iter()
        .zip(p)
        .map(|(&a, &pi)| {
            let (prod, err) = two_prod(qf, a);
            let d = (prod - pi as f64) + err;
            d * d
        })
        .sum()
}

/// Exact `||q alpha - p||^2` versus `c^2`, with `alpha` and `c` taken at their
/// exact binary values.
pub fn exact_distance_cmp(alpha: &[f64], p: &[i64], q: i64, c: f64) -> Ordering {
    let qr = rational_from_int(q);
    let d2 = alpha.iter().zip(p).fold(BigRational::from_integer(0.into()), |acc, (&a, &pi)| {
        let diff = &qr * rational_from_f64(a) - rational_from_int(pi);
        acc + &diff * &diff
    });
    let cr = rational_from_f64(c);
    d2.cmp(&(&cr * &cr))
}

/// Decides `||q alpha - p|| < c`; the second value reports a boundary re-test.
pub fn within_distance(alpha: &[f64], p: &[i64], q: i64, dist_sq: f64, c: f64) -> (bool, bool) {
    let c2 = c * c;
    if (dist_sq - c2).abs() <= BOUNDARY_BAND * c2 {
        (exact_distance_cmp(alpha, p, q, c) == Ordering::Less, true)
    } else {
        (dist_sq < c2, false)
    }
}

/// Every cone point `(p, q)` with `q_lo <= q <= q_hi` whose numerator lies in
/// the open box `|p_i - q alpha_i| < half_width` (widened by a rounding
/// slack, never narrowed). Ordered by `(q, p)`.
pub fn enumerate_box(alpha: &[f64], half_width: f64, q_lo: i64, q_hi: i64) -> Result<Vec<BoxPoint>> {
    check_heights(q_lo, q_hi)?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(invalid("box half-width must be positive and finite"));
    }
    Dim::new(alpha.len().saturating_sub(1))?;
    if q_lo > q_hi {
        return Ok(Vec::new());
    }
    const CHUNK: i64 = 1 << 22;
    let chunks: Vec<(i64, i64)> = (0..)
        .map(|i| q_lo + i * CHUNK)
        .take_while(|&lo| lo <= q_hi)
        .map(|lo| (lo, (lo + CHUNK - 1).min(q_hi)))
        .collect();
    let parts: Vec<Vec<BoxPoint>> = chunks
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut out = Vec::new();
            scan_box(alpha, half_width, lo, hi, &mut |p, q| {
                out.push(BoxPoint {
                    dist_sq: distance_sq(alpha, p, q),
                    point: RationalApproximate::from_valid(p.to_vec(), q),
                });
            });
            out.sort_by(|a, b| a.point.cmp(&b.point));
            out
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

fn scan_box(alpha: &[f64], h: f64, q_lo: i64, q_hi: i64, visit: &mut dyn FnMut(&[i64], i64)) {
    let m = alpha.len();
    let pivot = (0..m)
        .max_by(|&i, &j| alpha[i].abs().total_cmp(&alpha[j].abs()))
        .expect("non-empty alpha");
    let free: Vec<usize> = (0..m).filter(|&i| i != pivot).collect();
    let mut p = [0i64; 4];
    if m == 2 {
        let f = free[0];
        let (af, ap) = (alpha[f], alpha[pivot]);
        for q in q_lo..=q_hi {
            let qf = q as f64;
            let slack = 1e-9 + 8.0 * f64::EPSILON * qf;
            let hs = h + slack;
            let c = qf * af;
            let lo = (c - hs).ceil() as i64;
            let hi = (c + hs).floor() as i64;
            let q2 = (q as u64) * (q as u64);
            let cp = qf * ap;
            for v in lo..=hi {
                let sq = v.unsigned_abs() * v.unsigned_abs();
                if sq > q2 {
                    continue;
                }
                if let Some(r) = exact_sqrt(q2 - sq) {
                    p[f] = v;
                    for sign in [1i64, -1] {
                        let w = sign * r as i64;
                        if (w as f64 - cp).abs() < hs {
                            p[pivot] = w;
                            visit(&p[..2], q);
                        }
                        if r == 0 {
                            break;
                        }
                    }
                }
            }
        }
        return;
    }
    let k = free.len();
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for q in q_lo..=q_hi {
        let qf = q as f64;
        let slack = 1e-9 + 8.0 * f64::EPSILON * qf;
        let hs = h + slack;
        let h2 = hs * hs;
        for (s, &f) in free.iter().enumerate() {
            let c = qf * alpha[f];
            lo[s] = (c - hs).ceil() as i64;
            hi[s] = (c + hs).floor() as i64;
        }
        if (0..k).any(|s| lo[s] > hi[s]) {
            continue;
        }
        let q2 = (q as u64) * (q as u64);
        let cp = qf * alpha[pivot];
        let mut cur = lo;
        'odometer: loop {
            let mut sq: u64 = 0;
            let mut d2 = 0.0;
            let mut fits = true;
            for s in 0..k {
                let v = cur[s];
                sq = sq.saturating_add(v.unsigned_abs() * v.unsigned_abs());
                let d = v as f64 - qf * alpha[free[s]];
                d2 += d * d;
                p[free[s]] = v;
            }
            if d2 >= h2 * (1.0 + 1e-9) {
                fits = false;
            }
            if fits && sq <= q2 {
                if let Some(r) = exact_sqrt(q2 - sq) {
                    for sign in [1i64, -1] {
                        let w = sign * r as i64;
                        if (w as f64 - cp).abs() < hs {
                            p[pivot] = w;
                            visit(&p[..m], q);
                        }
                        if r == 0 {
                            break;
                        }
                    }
                }
            }
            let mut s = 0;
            loop {
                if s == k {
                    break 'odometer;
                }
                if cur[s] < hi[s] {
                    cur[s] += 1;
                    break;
                }
                cur[s] = lo[s];
                s += 1;
            }
        }
    }
}

/// All `(p, q)` with `q_lo <= q <= q_hi`, `||p|| = q` and `||q alpha - p|| < c`.
pub fn enumerate_near(alpha: &[f64], c: f64, q_lo: i64, q_hi: i64) -> Result<NearEnumeration> {
    check_unit(alpha)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("c must be positive and finite"));
    }
    check_heights(q_lo, q_hi)?;
    let mut boundary_hits = 0;
    let mut points = Vec::new();
    for bp in enumerate_box(alpha, c, q_lo, q_hi)? {
        let (inside, boundary) = within_distance(alpha, &bp.point.p, bp.point.q, bp.dist_sq, c);
        boundary_hits += usize::from(boundary);
        if inside {
            points.push(bp.point);
        }
    }
    Ok(NearEnumeration { points, boundary_hits, wide_box: c >= q_lo as f64 })
}

fn points_at_height(m: usize, q: i64, out: &mut Vec<RationalApproximate>) {
    fn descend(p: &mut Vec<i64>, m: usize, rem: u64, q: i64, out: &mut Vec<RationalApproximate>) {
        if p.len() + 1 == m {
            if let Some(r) = exact_sqrt(rem) {
                let r = r as i64;
                for v in if r == 0 { vec![0] } else { vec![-r, r] } {
                    p.push(v);
                    out.push(RationalApproximate::from_valid(p.clone(), q));
                    p.pop();
                }
            }
            return;
        }
        let b = isqrt(rem) as i64;
        for v in -b..=b {
            p.push(v);
            descend(p, m, rem - v.unsigned_abs() * v.unsigned_abs(), q, out);
            p.pop();
        }
    }
    let mut p = Vec::with_capacity(m);
    descend(&mut p, m, (q as u64) * (q as u64), q, out);
}

/// Every cone point with `1 <= q <= q_max`, ordered by `(q, p)`.
pub fn enumerate_all(dim: Dim, q_max: i64) -> Result<Vec<RationalApproximate>> {
    enumerate_heights(dim, 1, q_max)
}

/// Every cone point with `q_lo <= q <= q_hi`, ordered by `(q, p)`.
pub fn enumerate_heights(dim: Dim, q_lo: i64, q_hi: i64) -> Result<Vec<RationalApproximate>> {
    check_heights(q_lo, q_hi)?;
    let m = dim.sphere_ambient();
    let per_q: Vec<Vec<RationalApproximate>> = (q_lo..=q_hi)
        .into_par_iter()
        .map(|q| {
            let mut out = Vec::new();
            points_at_height(m, q, &mut out);
            out
        })
        .collect();
    Ok(per_q.into_iter().flatten().collect())
}

/// A point of `g Λ_0` together with its preimage in `Λ_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub preimage: RationalApproximate,
    pub x: ConeVector<f64>,
}

/// Points `g v` (`v ∈ Λ_0`) lying in `region`, found by enumerating `Λ_0` up to
/// height `||g^{-1}||_op * support_bound`. `region` must vanish outside
/// `{x_{n+2} <= support_bound}`.
pub fn enumerate_in_region<F>(
    lattice: &LatticeDescriptor,
    region: F,
    support_bound: f64,
) -> Result<Vec<LatticePoint>>
where
    F: Fn(&ConeVector<f64>) -> bool + Sync,
{
    if !(support_bound.is_finite()) || support_bound < 0.0 {
        return Err(invalid("support bound must be finite and non-negative"));
    }
    let inflation = if lattice.is_standard() {
        1.0
    } else {
        lattice.transform().inverse().operator_norm() * (1.0 + 1e-9)
    };
    let height = (inflation * support_bound + 1e-9).floor();
    if height > MAX_HEIGHT as f64 {
        return Err(Error::Range(format!("enumeration height {height:e} exceeds {MAX_HEIGHT}")));
    }
    let height = height as i64;
    if height < 1 {
        return Ok(Vec::new());
    }
    let m = lattice.dim().sphere_ambient();
    let per_q: Vec<Vec<LatticePoint>> = (1..=height)
        .into_par_iter()
        .map(|q| {
            let mut pts = Vec::new();
            points_at_height(m, q, &mut pts);
            pts.into_iter()
                .filter_map(|v| {
                    let x = lattice.image(&v);
                    region(&x).then_some(LatticePoint { preimage: v, x })
                })
                .collect()
        })
        .collect();
    Ok(per_q.into_iter().flatten().collect())
}

/// Superset of the lattice points with `||x~|| < radius` and
/// `1 <= [x] < bracket_max`. For lattices `k Λ_0` with `k ∈ K` this is a
/// localized box scan around `k^{-1} u_{n+1}`; otherwise a global enumeration.
pub fn enumerate_near_axis(
    lattice: &LatticeDescriptor,
    radius: f64,
    bracket_max: f64,
) -> Result<Vec<LatticePoint>> {
    let dim = lattice.dim();
    let n = dim.n();
    // x_{n+2} = ([x] + |x~|^2/[x]) / 2 < (bracket_max + radius^2) / 2 when [x] >= 1
    let height_bound = 0.5 * (bracket_max + radius * radius);
    if bracket_max <= 1.0 {
        return Ok(Vec::new());
    }
    match lattice.rotation() {
        Some(r) => {
            let axis: Vec<f64> = r.row(n).to_vec();
            let q_hi = height_bound.floor();
            if q_hi > MAX_HEIGHT as f64 {
                return Err(Error::Range(format!("height {q_hi:e} exceeds {MAX_HEIGHT}")));
            }
            // |q alpha - p|^2 = |x~|^2 + (x_{n+2} - x_{n+1})^2 < r^2 (1 + r^2) for [x] >= 1
            let h = radius * (1.0 + radius * radius).sqrt() * (1.0 + 1e-9) + 1e-9;
            let pts = enumerate_box(&axis, h, 1, q_hi as i64)?;
            Ok(pts
                .into_iter()
                .map(|bp| LatticePoint { x: lattice.image(&bp.point), preimage: bp.point })
                .collect())
        }
        None => {
            let r2 = radius * radius * (1.0 + 1e-6) + 1e-9;
            enumerate_in_region(
                lattice,
                |x| {
                    let t: f64 = x.truncation().iter().map(|v| v * v).sum();
                    t < r2 && *x.axis() > -1e-9
                },
                height_bound,
            )
        }
    }
}
