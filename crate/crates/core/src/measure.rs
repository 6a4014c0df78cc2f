//! The invariant measure `λ` on the light cone and the volumes of the
//! counting regions.
//!
//! Chart: `(x~, x_{n+1}) ∈ R^{n+1}`, `x_{n+2} = ||(x~, x_{n+1})||`, density
//! `1 / x_{n+2}`. In the coordinates `(x~, u = [x])` the density is `du/u dx~`.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::cone::{ConeVector, Dim, GroupElement};
use crate::counting::{classify_e, classify_f, count_n, direction, DirectionSet, Window};
use crate::error::{invalid, Error, Result};
use crate::rational_points::LatticeDescriptor;
use crate::sampling::{random_alpha, substream, Stream};

/// Normalization and sampling budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeMeasureConfig {
    kappa: f64,
    mc_samples: u64,
    seed: u64,
}

impl ConeMeasureConfig {
    pub const MIN_SAMPLES: u64 = 1_000;

    pub fn new(kappa: f64, mc_samples: u64, seed: u64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid(format!("kappa = {kappa} must be positive")));
        }
        if mc_samples < Self::MIN_SAMPLES {
            return Err(invalid(format!("mc_samples = {mc_samples} is below {}", Self::MIN_SAMPLES)));
        }
        Ok(ConeMeasureConfig { kappa, mc_samples, seed })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mc_samples(&self) -> u64 {
        self.mc_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_kappa(self, kappa: f64) -> Result<Self> {
        Self::new(kappa, self.mc_samples, self.seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ConeMeasureConfig { seed, ..self }
    }
}

impl Default for ConeMeasureConfig {
    fn default() -> Self {
        ConeMeasureConfig { kappa: 1.0, mc_samples: 1_000_000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    MonteCarlo,
    Quadrature,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
            Method::Quadrature => "quadrature",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeResult {
    pub value: f64,
    /// Zero for deterministic methods.
    pub stderr: f64,
    pub method: Method,
}

/// Which counting region a volume refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    E,
    F,
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionKind::E => "E",
            RegionKind::F => "F",
        })
    }
}

pub const VOLUME_CSV_HEADER: &str = "region,n,c,T,A_kind,value,stderr,method,seed";

/// One row of the volume CSV.
pub fn volume_csv_row(
    region: RegionKind,
    dim: Dim,
    w: &Window,
    a: Option<&DirectionSet>,
    result: &VolumeResult,
    seed: u64,
) -> String {
    let label = a.map_or_else(|| "full".to_string(), DirectionSet::label);
    format!(
        "{region},{},{},{},{label},{},{},{},{seed}",
        dim.n(),
        w.c(),
        w.t(),
        result.value,
        result.stderr,
        result.method
    )
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(dim: Dim) -> f64 {
    use std::f64::consts::PI;
    match dim.n() {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => unreachable!("Dim is 1..=3"),
    }
}

fn check_direction(dim: Dim, a: Option<&DirectionSet>) -> Result<()> {
    match a {
        Some(set) if set.n() != dim.n() => Err(invalid("direction set lives on a different sphere")),
        _ => Ok(()),
    }
}

/// `|F_{T,c,A}| = κ ω_n c^n T vol(A)`.
pub fn volume_f(dim: Dim, w: &Window, a: Option<&DirectionSet>, cfg: &ConeMeasureConfig) -> Result<VolumeResult> {
    check_direction(dim, a)?;
    let vol_a = a.map_or(1.0, DirectionSet::measure);
    Ok(VolumeResult {
        value: cfg.kappa * unit_ball_volume(dim) * w.c().powi(dim.n() as i32) * w.t() * vol_a,
        stderr: 0.0,
        method: Method::ClosedForm,
    })
}

/// Samples per independent substream chunk.
const CHUNK: u64 = 1 << 16;

/// Mean and standard error of `f` over `samples` draws, split into seeded
/// chunks that are merged in chunk order.
fn mc_mean<F>(seed: u64, samples: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha20Rng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Stream::MonteCarlo, i);
            let len = CHUNK.min(samples - i * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let v = f(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let m = samples as f64;
    let mean = s / m;
    let var = (s2 / m - mean * mean).max(0.0);
    (mean, (var / m).sqrt())
}

/// Uniform point of the `c`-ball by rejection from the enclosing cube.
fn ball_point(rng: &mut ChaCha20Rng, n: usize, c: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| c * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < c * c {
            return v;
        }
    }
}

/// Cone point with truncation `x~` and bracket `u`.
fn cone_from_bracket(dim: Dim, trunc: &[f64], u: f64) -> ConeVector<f64> {
    let rho2: f64 = trunc.iter().map(|v| v * v).sum();
    let gap = rho2 / u;
    let mut coords = trunc.to_vec();
    coords.push(0.5 * (u - gap));
    coords.push(0.5 * (u + gap));
    ConeVector::from_parts_unchecked(dim, coords, false)
}

fn in_set(x: &ConeVector<f64>, a: Option<&DirectionSet>) -> bool {
    a.is_none_or(|set| direction(x).is_ok_and(|d| set.contains(&d)))
}

/// Monte Carlo `|F_{T,c,A}|` in the chart `(x~, x_{n+1})`, where the cone
/// measure has density `1 / x_{n+2}`: uniform samples in the box
/// `[-c, c]^n x [(1 - c^2)/2, e^T/2]`, which contains `F_{T,c}`.
pub fn volume_f_mc(dim: Dim, w: &Window, a: Option<&DirectionSet>, cfg: &ConeMeasureConfig) -> Result<VolumeResult> {
    check_direction(dim, a)?;
    let (n, c) = (dim.n(), w.c());
    let (a_lo, a_hi) = (0.5 * (1.0 - c * c), 0.5 * w.exp_t());
    let box_volume = (2.0 * c).powi(n as i32) * (a_hi - a_lo);
    let (mean, se) = mc_mean(cfg.seed, cfg.mc_samples, |rng| {
        let mut coords: Vec<f64> = (0..n).map(|_| c * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let axis = a_lo + (a_hi - a_lo) * rng.random::<f64>();
        let h = (coords.iter().map(|v| v * v).sum::<f64>() + axis * axis).sqrt();
        coords.push(axis);
        coords.push(h);
        let x = ConeVector::from_parts_unchecked(dim, coords, false);
        if classify_f(&x, w).inside && in_set(&x, a) {
            box_volume / h
        } else {
            0.0
        }
    });
    Ok(VolumeResult { value: cfg.kappa * mean, stderr: cfg.kappa * se, method: Method::MonteCarlo })
}

/// Log-length of `{u > 0 : x(ρ, u) ∈ E_{T,c}}` at truncation radius `ρ`.
fn e_slice(rho: f64, c: f64, cosh_t: f64) -> f64 {
    if rho >= c || rho >= cosh_t {
        return 0.0;
    }
    // the slice has a finite limit at ρ = 0 but the formulas below degenerate
    let rho = rho.max(1e-9 * c);
    let rho2 = rho * rho;
    // 2h(h - x_{n+1}) = ρ^2 + ρ^4/u^2 < c^2
    let lo = rho2 / (c * c - rho2).sqrt();
    // h < cosh T  <=>  u in (C - s, C + s)
    let s = (cosh_t * cosh_t - rho2).sqrt();
    let (in_lo, in_hi) = (lo.max(rho2 / (cosh_t + s)), cosh_t + s);
    if in_lo >= in_hi {
        return 0.0;
    }
    // h >= 1  <=>  u outside (1 - v, 1 + v) when ρ < 1
    let mut gaps = Vec::with_capacity(2);
    if rho < 1.0 {
        let v = (1.0 - rho2).sqrt();
        gaps.push((rho2 / (1.0 + v), 1.0 + v));
    }
    let log_len = |a: f64, b: f64| if b > a { (b / a).ln() } else { 0.0 };
    match gaps.first() {
        None => log_len(in_lo, in_hi),
        Some(&(g_lo, g_hi)) => log_len(in_lo, in_hi.min(g_lo)) + log_len(in_lo.max(g_hi), in_hi),
    }
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 40)
}

/// `|E_{T,c,A}|` by one-dimensional quadrature over `ρ = ||x~||`. The
/// constraints depend on `ρ` only, so the direction set contributes `vol(A)`.
pub fn volume_e(dim: Dim, w: &Window, a: Option<&DirectionSet>, cfg: &ConeMeasureConfig) -> Result<VolumeResult> {
    check_direction(dim, a)?;
    let n = dim.n();
    let (c, cosh_t) = (w.c(), w.cosh_t());
    let sphere = n as f64 * unit_ball_volume(dim);
    let f = |rho: f64| sphere * rho.powi(n as i32 - 1) * e_slice(rho, c, cosh_t);
    let mut cuts = vec![0.0, c];
    if c > 1.0 {
        cuts.push(1.0);
    }
    cuts.sort_by(f64::total_cmp);
    let eps = 1e-11 * (1.0 + c.powi(n as i32) * w.t());
    let raw: f64 = cuts.windows(2).map(|p| adaptive_simpson(&f, p[0], p[1], eps)).sum();
    let vol_a = a.map_or(1.0, DirectionSet::measure);
    Ok(VolumeResult { value: cfg.kappa * raw * vol_a, stderr: 0.0, method: Method::Quadrature })
}

/// Smallest bracket of a point of `E_{T,c}` when `c < 2`.
fn e_bracket_floor(c: f64) -> f64 {
    let mut floor = 1.0f64.min(1.0 / c);
    if c * c > 2.0 {
        let v = 0.5 * (c * c - 2.0);
        floor = floor.min((1.0 - v * v) / c);
    }
    floor * (1.0 - 1e-12)
}

/// Monte Carlo `|E_{T,c,A}|` with `x~` uniform in the `c`-ball and `ln u`
/// uniform between bracket bounds of `E`. Needs `c < 2`: for larger `c` the
/// region reaches brackets arbitrarily close to 0.
pub fn volume_e_mc(dim: Dim, w: &Window, a: Option<&DirectionSet>, cfg: &ConeMeasureConfig) -> Result<VolumeResult> {
    check_direction(dim, a)?;
    let (n, c) = (dim.n(), w.c());
    if c >= 2.0 {
        return Err(invalid("Monte Carlo volume of E needs c < 2; use quadrature"));
    }
    let lo = e_bracket_floor(c).ln();
    let hi = (2.0 * w.cosh_t()).ln();
    let scale = cfg.kappa * unit_ball_volume(dim) * c.powi(n as i32) * (hi - lo);
    let (mean, se) = mc_mean(cfg.seed, cfg.mc_samples, |rng| {
        let trunc = ball_point(rng, n, c);
        let u = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let x = cone_from_bracket(dim, &trunc, u);
        f64::from(u8::from(classify_e(&x, w).inside && in_set(&x, a)))
    });
    Ok(VolumeResult { value: scale * mean, stderr: scale * se, method: Method::MonteCarlo })
}

/// `η(c) = |F_{1,c}|`.
pub fn eta(dim: Dim, c: f64, cfg: &ConeMeasureConfig) -> Result<f64> {
    Ok(volume_f(dim, &Window::new(1.0, c)?, None, cfg)?.value)
}

/// Outcome of [`calibrate_kappa`].
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub kappa: f64,
    /// `N_{T,c}(α)/T` per drawn target.
    pub slopes: Vec<f64>,
}

/// `κ̂ = mean_α(N_{T,c}(α)/T) / (ω_n c^n)` over `samples` uniform targets drawn
/// from the seed's target stream.
pub fn calibrate_kappa(dim: Dim, samples: usize, w: &Window, cfg: &ConeMeasureConfig) -> Result<Calibration> {
    if samples < 5 {
        return Err(invalid("calibration needs at least 5 targets"));
    }
    let mut rng = substream(cfg.seed, Stream::Targets, 0);
    let alphas: Vec<Vec<f64>> = (0..samples).map(|_| random_alpha(&mut rng, dim)).collect();
    let lattice = LatticeDescriptor::standard(dim);
    let slopes = alphas
        .iter()
        .map(|alpha| Ok(count_n(alpha, w, &lattice, None, None)?.total as f64 / w.t()))
        .collect::<Result<Vec<f64>>>()?;
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    if mean == 0.0 {
        return Err(Error::Calibration("all counts are zero; enlarge T or c".into()));
    }
    Ok(Calibration { kappa: mean / (unit_ball_volume(dim) * w.c().powi(dim.n() as i32)), slopes })
}

/// Bounded region for [`invariance_test`].
#[derive(Clone, Debug, PartialEq)]
pub enum RegionSpec {
    F { window: Window, direction: Option<DirectionSet> },
    E { window: Window, direction: Option<DirectionSet> },
}

impl RegionSpec {
    fn contains(&self, x: &ConeVector<f64>) -> bool {
        match self {
            RegionSpec::F { window, direction } => classify_f(x, window).inside && in_set(x, direction.as_ref()),
            RegionSpec::E { window, direction } => classify_e(x, window).inside && in_set(x, direction.as_ref()),
        }
    }

    /// Upper bound of `x_{n+2}` on the region.
    fn height_bound(&self) -> f64 {
        match self {
            RegionSpec::F { window, .. } => 0.5 * (window.exp_t() + window.c() * window.c()),
            RegionSpec::E { window, .. } => window.cosh_t(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceReport {
    pub mass: f64,
    pub mass_stderr: f64,
    pub image_mass: f64,
    pub image_stderr: f64,
    /// Standard error of the paired difference (common samples).
    pub diff_stderr: f64,
    pub pass: bool,
}

/// Monte Carlo `λ(R)` versus `λ(gR)` from common samples, uniform in the chart
/// cube that holds both. Passes iff the difference is within three standard
/// errors of the paired difference.
pub fn invariance_test(g: &GroupElement<f64>, region: &RegionSpec, cfg: &ConeMeasureConfig) -> Result<InvarianceReport> {
    g.check()?;
    let dim = g.dim();
    let dir = match region {
        RegionSpec::F { direction, .. } | RegionSpec::E { direction, .. } => direction.as_ref(),
    };
    check_direction(dim, dir)?;
    let half = g.operator_norm() * region.height_bound() * (1.0 + 1e-9);
    if !half.is_finite() || half > 1e12 {
        return Err(invalid("region image is not contained in a bounded chart"));
    }
    let ginv = g.inverse();
    let m = dim.sphere_ambient();
    let cube = (2.0 * half).powi(m as i32);
    let samples = cfg.mc_samples;
    // per sample: (w 1_R(x), w 1_R(g^{-1} x))
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<[f64; 5]> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, Stream::MonteCarlo, i);
            let len = CHUNK.min(samples - i * CHUNK);
            let mut acc = [0.0; 5];
            let mut coords = vec![0.0; m + 1];
            for _ in 0..len {
                for v in coords.iter_mut().take(m) {
                    *v = half * (2.0 * rng.random::<f64>() - 1.0);
                }
                let h = coords[..m].iter().map(|v| v * v).sum::<f64>().sqrt();
                coords[m] = h;
                let weight = cube / h;
                let x = ConeVector::from_parts_unchecked(dim, coords.clone(), false);
                let a = if region.contains(&x) { weight } else { 0.0 };
                let y = ginv.apply_compensated(&coords).expect("dimensions agree");
                let y = ConeVector::from_parts_unchecked(dim, y, false);
                let b = if region.contains(&y) { weight } else { 0.0 };
                acc[0] += a;
                acc[1] += a * a;
                acc[2] += b;
                acc[3] += b * b;
                acc[4] += (a - b) * (a - b);
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 5];
    for p in &parts {
        for (t, v) in tot.iter_mut().zip(p) {
            *t += v;
        }
    }
    let s = samples as f64;
    let se = |sum: f64, sq: f64| ((sq / s - (sum / s).powi(2)).max(0.0) / s).sqrt();
    let (mass, image_mass) = (tot[0] / s, tot[2] / s);
    let diff = mass - image_mass;
    let diff_stderr = se(tot[0] - tot[2], tot[4]);
    let k = cfg.kappa;
    Ok(InvarianceReport {
        mass: k * mass,
        mass_stderr: k * se(tot[0], tot[1]),
        image_mass: k * image_mass,
        image_stderr: k * se(tot[2], tot[3]),
        diff_stderr: k * diff_stderr,
        pass: diff.abs() <= 3.0 * diff_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{embed_k, make_g_t, make_u_y};
    use crate::sampling::haar_rotation;

    fn d(n: usize) -> Dim {
        Dim::new(n).unwrap()
    }

    fn cfg(samples: u64) -> ConeMeasureConfig {
        ConeMeasureConfig::new(1.0, samples, 11).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ConeMeasureConfig::new(0.0, 1000, 0).is_err());
        assert!(ConeMeasureConfig::new(1.0, 999, 0).is_err());
    }

    #[test]
    fn closed_form_values() {
        let w = Window::new(1.0, 1.0).unwrap();
        assert_eq!(volume_f(d(1), &w, None, &cfg(1000)).unwrap().value, 2.0);
        let w2 = Window::new(2.0, 1.0).unwrap();
        assert_eq!(volume_f(d(1), &w2, None, &cfg(1000)).unwrap().value, 4.0);
        let h = DirectionSet::hemisphere(d(2), &[1.0, 0.0]).unwrap();
        let full = volume_f(d(2), &w, None, &cfg(1000)).unwrap().value;
        assert_eq!(volume_f(d(2), &w, Some(&h), &cfg(1000)).unwrap().value, full / 2.0);
        for n in 1..=3 {
            let r = eta(d(n), 2.0, &cfg(1000)).unwrap() / eta(d(n), 1.0, &cfg(1000)).unwrap();
            assert_eq!(r, 2f64.powi(n as i32));
        }
    }

    #[test]
    fn f_monte_carlo_matches_closed_form() {
        let w = Window::new(1.0, 1.0).unwrap();
        for n in 1..=3 {
            let mc = volume_f_mc(d(n), &w, None, &cfg(200_000)).unwrap();
            let exact = volume_f(d(n), &w, None, &cfg(1000)).unwrap().value;
            assert!((mc.value - exact).abs() <= 4.0 * mc.stderr + 1e-12, "{n}: {mc:?} vs {exact}");
        }
        let half = DirectionSet::hemisphere(d(2), &[1.0, 1.0]).unwrap();
        let mc = volume_f_mc(d(2), &w, Some(&half), &cfg(200_000)).unwrap();
        let exact = volume_f(d(2), &w, Some(&half), &cfg(1000)).unwrap().value;
        assert!((mc.value - exact).abs() <= 4.0 * mc.stderr, "{mc:?} vs {exact}");
    }

    #[test]
    fn e_quadrature_matches_monte_carlo() {
        for (n, c, t) in [(1, 1.0, 3.0), (2, 1.5, 2.0), (3, 0.7, 4.0), (1, 1.9, 2.5)] {
            let w = Window::new(t, c).unwrap();
            let q = volume_e(d(n), &w, None, &cfg(1000)).unwrap().value;
            let mc = volume_e_mc(d(n), &w, None, &cfg(200_000)).unwrap();
            assert!((mc.value - q).abs() <= 4.0 * mc.stderr, "{n} {c} {t}: {mc:?} vs {q}");
        }
    }

    #[test]
    fn e_is_close_to_f_for_large_t() {
        let mut prev = 0.0;
        for t in [5.0, 10.0, 20.0] {
            let w = Window::new(t, 1.0).unwrap();
            let r = volume_e(d(1), &w, None, &cfg(1000)).unwrap().value / volume_f(d(1), &w, None, &cfg(1000)).unwrap().value;
            assert!(r > prev);
            prev = r;
        }
        assert!((0.9..=1.02).contains(&prev), "{prev}");
    }

    #[test]
    fn e_volume_vanishes_for_tiny_windows() {
        let w = Window::new(1e-9, 1.0).unwrap();
        assert!(volume_e(d(1), &w, None, &cfg(1000)).unwrap().value < 1e-6);
    }

    #[test]
    fn invariance_identity_is_exact() {
        let w = Window::new(1.0, 1.0).unwrap();
        let region = RegionSpec::F { window: w, direction: None };
        let r = invariance_test(&GroupElement::identity(d(1)), &region, &cfg(20_000)).unwrap();
        assert_eq!(r.mass, r.image_mass);
        assert!(r.pass);
    }

    #[test]
    fn invariance_under_generators() {
        let w = Window::new(1.0, 1.0).unwrap();
        let region = RegionSpec::F { window: w, direction: None };
        let mut rng = substream(3, Stream::Lattices, 0);
        let gs = [
            make_g_t(d(2), 0.4),
            make_u_y(d(2), &[0.3, -0.2]).unwrap(),
            embed_k(d(2), &haar_rotation(&mut rng, 3)).unwrap(),
        ];
        for g in &gs {
            let r = invariance_test(g, &region, &cfg(400_000)).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn csv_row_layout() {
        let w = Window::new(1.0, 1.0).unwrap();
        let r = volume_f(d(1), &w, None, &cfg(1000)).unwrap();
        assert_eq!(volume_csv_row(RegionKind::F, d(1), &w, None, &r, 7), "F,1,1,1,full,2,0,closed_form,7");
    }
}
