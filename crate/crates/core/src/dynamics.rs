//! Geodesic flow on lattices of the cone: the Siegel transform of the
//! indicator of `F_{r,c,A}`, closed-form orbit integrals and the inequality
//! chains relating them to lattice point counts.
//!
//! `g_t x ∈ F_{r,c}` iff `e^t <= [x] < e^{t+r}` (the truncation is fixed by the
//! flow), so a point contributes the length of `[0,T] ∩ (ln[x] - r, ln[x]]`.

use std::cmp::Ordering;

use crate::cone::ConeVector;
use crate::counting::{direction, DirectionSet, Window};
use crate::error::{invalid, Error, Result};
use crate::numeric::{cmp_int_f64, cmp_int_square};
use crate::rational_points::{enumerate_near_axis, LatticeDescriptor};

/// Shell width `r`, window `(T, c)`, direction filter and lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitConfig {
    r: f64,
    window: Window,
    direction: Option<DirectionSet>,
    lattice: LatticeDescriptor,
}

impl OrbitConfig {
    pub fn new(r: f64, window: Window, direction: Option<DirectionSet>, lattice: LatticeDescriptor) -> Result<Self> {
        if !(r > 0.0 && r < window.t()) {
            return Err(invalid(format!("need T > r > 0, got T = {}, r = {r}", window.t())));
        }
        if let Some(a) = &direction {
            if a.n() != lattice.dim().n() {
                return Err(invalid("direction set lives on a different sphere"));
            }
        }
        Ok(OrbitConfig { r, window, direction, lattice })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn direction(&self) -> Option<&DirectionSet> {
        self.direction.as_ref()
    }

    pub fn lattice(&self) -> &LatticeDescriptor {
        &self.lattice
    }
}

/// Bracket `[x]`, exact for integral points.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Bracket {
    Int(i128),
    Real(f64),
}

impl Bracket {
    fn of(x: &ConeVector<f64>) -> Self {
        let n = x.dim().n();
        if x.is_integer() {
            let c = x.coords();
            return Bracket::Int(c[n] as i128 + c[n + 1] as i128);
        }
        let (a, h) = (*x.axis(), *x.height());
        if a >= 0.0 {
            Bracket::Real(h + a)
        } else {
            let t: f64 = x.truncation().iter().map(|v| v * v).sum();
            Bracket::Real(t / (h - a))
        }
    }

    /// Compares `[x]` with `e^s`, where `e^s` is given as a float.
    fn cmp(&self, threshold: f64) -> Ordering {
        match *self {
            Bracket::Int(b) => cmp_int_f64(b, threshold),
            Bracket::Real(b) => b.partial_cmp(&threshold).unwrap_or(Ordering::Less),
        }
    }

    fn ln(&self) -> f64 {
        match *self {
            Bracket::Int(b) => (b as f64).ln(),
            Bracket::Real(b) => b.ln(),
        }
    }

    fn sort_key(&self) -> f64 {
        match *self {
            Bracket::Int(b) => b as f64,
            Bracket::Real(b) => b,
        }
    }
}

/// A lattice point with `||x~|| < c` and direction in `A`.
#[derive(Clone, Debug)]
struct OrbitPoint {
    coords: Vec<f64>,
    bracket: Bracket,
}

fn truncation_below(x: &ConeVector<f64>, c: f64) -> bool {
    let n = x.dim().n();
    if x.is_integer() {
        let v = x.coords();
        let (a, h) = (v[n] as i128, v[n + 1] as i128);
        return cmp_int_square(h * h - a * a, c) == Ordering::Less;
    }
    x.truncation().iter().map(|v| v * v).sum::<f64>() < c * c
}

fn in_direction(x: &ConeVector<f64>, a: Option<&DirectionSet>) -> bool {
    a.is_none_or(|set| direction(x).is_ok_and(|d| set.contains(&d)))
}

/// Points of the lattice with `||x~|| < c`, direction in `A` and
/// `1 <= [x] < bracket_max`, sorted by bracket then coordinates.
fn orbit_points(lattice: &LatticeDescriptor, c: f64, a: Option<&DirectionSet>, bracket_max: f64) -> Result<Vec<OrbitPoint>> {
    let mut pts: Vec<OrbitPoint> = enumerate_near_axis(lattice, c, bracket_max)?
        .into_iter()
        .filter(|lp| truncation_below(&lp.x, c) && in_direction(&lp.x, a))
        .map(|lp| OrbitPoint { bracket: Bracket::of(&lp.x), coords: lp.x.into_coords() })
        .filter(|p| p.bracket.cmp(1.0) != Ordering::Less && p.bracket.cmp(bracket_max) == Ordering::Less)
        .collect();
    pts.sort_by(|p, q| {
        p.bracket
            .sort_key()
            .total_cmp(&q.bracket.sort_key())
            .then_with(|| p.coords.iter().zip(&q.coords).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal))
    });
    Ok(pts)
}

/// `#(Λ ∩ F_{r,c,A})`.
pub fn siegel_transform_at(lattice: &LatticeDescriptor, r: f64, c: f64, a: Option<&DirectionSet>) -> Result<usize> {
    let w = Window::new(r, c)?;
    Ok(orbit_points(lattice, c, a, w.exp_t())?.len())
}

/// `∫_0^S f̂_{r,c,A}(g_t Λ) dt = r * full + partial`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitIntegral {
    pub horizon: f64,
    /// Points whose whole shell passage `(ln[x] - r, ln[x]]` lies in `[0, S]`.
    pub full: usize,
    /// Sum of the remaining, clipped contributions (each in `[0, r]`).
    pub partial: f64,
    /// Number of points with a clipped, non-zero contribution.
    pub partial_points: usize,
    pub r: f64,
}

impl OrbitIntegral {
    pub fn value(&self) -> f64 {
        self.r * self.full as f64 + self.partial
    }

    /// `value / r`.
    pub fn normalized(&self) -> f64 {
        self.full as f64 + self.partial / self.r
    }
}

fn integrate(points: &[OrbitPoint], r: f64, horizon: f64) -> OrbitIntegral {
    let (e_r, e_s) = (r.exp(), horizon.exp());
    let mut out = OrbitIntegral { horizon, full: 0, partial: 0.0, partial_points: 0, r };
    for p in points {
        let b = p.bracket;
        if b.cmp(1.0) != Ordering::Greater {
            continue;
        }
        if b.cmp(e_r) != Ordering::Less && b.cmp(e_s) != Ordering::Greater {
            out.full += 1;
            continue;
        }
        let l = b.ln();
        let len = (l.min(horizon) - (l - r).max(0.0)).clamp(0.0, r);
        if len > 0.0 {
            out.partial += len;
            out.partial_points += 1;
        }
    }
    out
}

/// `∫_0^T f̂_{r,c,A}(g_t Λ) dt` in closed form.
pub fn exact_orbit_integral(cfg: &OrbitConfig) -> Result<OrbitIntegral> {
    let (t, r, c) = (cfg.window.t(), cfg.r, cfg.window.c());
    let pts = orbit_points(&cfg.lattice, c, cfg.direction(), (t + r).exp())?;
    Ok(integrate(&pts, r, t))
}

/// The quantities of both inequality chains.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitChain {
    /// `#(Λ ∩ (F_{T,c,A} \ F_{r,c,A}))`
    pub count_inner: usize,
    /// `∫_0^T f̂_{r,c,A}(g_t Λ) dt`
    pub integral: OrbitIntegral,
    /// `#(Λ ∩ F_{T+r,c,A})`
    pub count_outer: usize,
    /// `∫_0^{T-r} f̂_{r,c,A}(g_t Λ) dt`
    pub integral_short: OrbitIntegral,
    /// `#(Λ ∩ F_{T,c,A})`
    pub count_f_t: usize,
    /// `#(Λ ∩ F_{r,c,A})`
    pub count_f_r: usize,
    pub violations: Vec<String>,
}

impl OrbitChain {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Slack for comparing a sum of `m` clipped floating contributions with an integer.
fn sum_slack(m: usize) -> f64 {
    1e-12 * (1.0 + m as f64)
}

/// Computes and checks
/// `#(F_T \ F_r) <= (1/r)∫_0^T <= #F_{T+r}` and
/// `(1/r)∫_0^{T-r} <= #F_T <= (1/r)∫_0^T + #F_r`.
pub fn orbit_chain_check(cfg: &OrbitConfig) -> Result<OrbitChain> {
    let (t, r, c) = (cfg.window.t(), cfg.r, cfg.window.c());
    let pts = orbit_points(&cfg.lattice, c, cfg.direction(), (t + r).exp())?;
    let below = |s: f64| {
        let e = s.exp();
        pts.iter().filter(|p| p.bracket.cmp(e) == Ordering::Less).count()
    };
    let count_outer = pts.len();
    let count_f_t = below(t);
    let count_f_r = below(r);
    let count_inner = count_f_t - count_f_r;
    let integral = integrate(&pts, r, t);
    let integral_short = integrate(&pts, r, t - r);

    let mut violations = Vec::new();
    let mut le = |lhs: f64, rhs: f64, slack: f64, what: &str| {
        if lhs > rhs + slack {
            violations.push(format!("{what}: {lhs} > {rhs}"));
        }
    };
    let (i, is) = (integral.normalized(), integral_short.normalized());
    let si = sum_slack(integral.partial_points);
    let ss = sum_slack(integral_short.partial_points);
    le(count_inner as f64, i, si, "count_inner <= integral/r");
    le(i, count_outer as f64, si, "integral/r <= count_outer");
    le(is, count_f_t as f64, ss, "short integral/r <= #F_T");
    le(count_f_t as f64, i + count_f_r as f64, si, "#F_T <= integral/r + #F_r");
    Ok(OrbitChain { count_inner, integral, count_outer, integral_short, count_f_t, count_f_r, violations })
}

/// `(1/(T r)) ∫_0^T f̂_{r,c,A}(g_t Λ) dt`.
pub fn birkhoff_slope(cfg: &OrbitConfig) -> Result<f64> {
    let integral = exact_orbit_integral(cfg)?;
    Ok(integral.value() / (cfg.window.t() * cfg.r))
}

pub const ORBIT_CSV_HEADER: &str = "n,c,r,T,lattice_desc,A_kind,count_inner,integral,count_outer,slope";

/// One orbit CSV row; `lattice_desc` must not contain commas.
pub fn orbit_csv_row(cfg: &OrbitConfig, lattice_desc: &str, chain: &OrbitChain) -> Result<String> {
    if lattice_desc.contains(',') {
        return Err(Error::Validation("lattice description must not contain commas".into()));
    }
    let a = cfg.direction().map_or_else(|| "full".to_string(), DirectionSet::label);
    let t = cfg.window.t();
    Ok(format!(
        "{},{},{},{t},{lattice_desc},{a},{},{},{},{}",
        cfg.lattice.dim(),
        cfg.window.c(),
        cfg.r,
        chain.count_inner,
        chain.integral.value(),
        chain.count_outer,
        chain.integral.value() / (t * cfg.r)
    ))
}
