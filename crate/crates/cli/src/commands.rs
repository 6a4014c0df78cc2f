//! Subcommand bodies. Each returns its report and whether a check was violated.

use rand::Rng;
use rayon::prelude::*;
use sphere_approx::sampling::{haar_rotation, random_alpha, substream, uniform_ball, Stream};
use sphere_approx::{
    calibrate_kappa, count_n, count_rotated_e, embed_k, enumerate_all, enumerate_near, eval_q, iwasawa_decompose,
    linear_fit, make_g_t, make_u_y, mean_sd, orbit_chain_check, orbit_csv_row, rotation_to_pole, sandwich_check,
    volume_csv_row, volume_e, volume_e_mc, volume_f, volume_f_mc, ApproximationProfile, ConeMeasureConfig, CountReport,
    Dim, DirectionSet, Error, Group, LatticeDescriptor, OrbitConfig, RegionKind, SandwichConstants, Window,
    ORBIT_CSV_HEADER, VOLUME_CSV_HEADER,
};
use thiserror::Error as ThisError;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::Report;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Library(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(Error::Consistency(_)) => 1,
            _ => 2,
        }
    }
}

pub struct Outcome {
    pub report: Report,
    pub violation: bool,
}

fn clean(report: Report) -> Outcome {
    Outcome { report, violation: false }
}

fn windows(cfg: &ExperimentConfig, c: f64) -> Result<Vec<Window>, CliError> {
    cfg.t_grid.iter().map(|&t| Window::new(t, c).map_err(CliError::from)).collect()
}

pub fn count(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut report = Report::new("count", CountReport::csv_header(cfg.dim));
    let targets = cfg.targets();
    let cells: Vec<(&Vec<f64>, f64)> =
        targets.iter().flat_map(|a| cfg.c_list.iter().map(move |&c| (a, c))).collect();
    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .map(|&(alpha, c)| {
            windows(cfg, c)?
                .iter()
                .map(|w| Ok(count_n(alpha, w, &cfg.lattice, None, None)?.csv_row(cfg.timing)))
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    rows.into_iter().flatten().for_each(|r| report.push(r));
    Ok(clean(report))
}

/// `(total, primitive)` counts of one target over the grid for every `c`.
fn grid_counts(cfg: &ExperimentConfig, alpha: &[f64]) -> Result<Vec<Vec<usize>>, CliError> {
    let c_max = cfg.c_list.iter().copied().fold(0.0, f64::max);
    let t_max = cfg.t_grid.last().copied().unwrap_or(1.0);
    if cfg.lattice.rotation().is_some() {
        let profile = ApproximationProfile::scan(alpha, &cfg.lattice, c_max, t_max)?;
        return cfg
            .c_list
            .iter()
            .map(|&c| windows(cfg, c)?.iter().map(|w| Ok(profile.count(w)?.0)).collect())
            .collect();
    }
    cfg.c_list
        .iter()
        .map(|&c| windows(cfg, c)?.iter().map(|w| Ok(count_n(alpha, w, &cfg.lattice, None, None)?.total)).collect())
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut report = Report::new("sweep", "scope,n,c,target,points,slope,intercept,r2,rel_sd,ratio_to_first_c,flag");
    let targets = cfg.targets();
    let counts: Vec<Vec<Vec<usize>>> =
        targets.par_iter().map(|a| grid_counts(cfg, a)).collect::<Result<_, _>>()?;
    let enough = cfg.t_grid.len() >= 3;
    let n = cfg.dim.n();
    let mut first_mean: Option<f64> = None;
    for (ci, &c) in cfg.c_list.iter().enumerate() {
        let mut slopes = Vec::new();
        let mut fits = Vec::new();
        for (ti, per_c) in counts.iter().enumerate() {
            let ys: Vec<f64> = per_c[ci].iter().map(|&k| k as f64).collect();
            let fit = if enough { linear_fit(&cfg.t_grid, &ys) } else { None };
            let flag = match fit {
                None => "undefined_slope",
                Some(_) if ys.iter().all(|&y| y == 0.0) => "all_zero",
                Some(_) => "ok",
            };
            report.push(format!(
                "target,{n},{c},{ti},{},{},{},{},,,{flag}",
                cfg.t_grid.len(),
                fmt_opt(fit.map(|f| f.slope)),
                fmt_opt(fit.map(|f| f.intercept)),
                fmt_opt(fit.map(|f| f.r2)),
            ));
            if let Some(f) = fit {
                slopes.push(f.slope);
                fits.push(f);
            }
        }
        let all_zero = counts.iter().all(|per_c| per_c[ci].iter().all(|&k| k == 0));
        if fits.is_empty() {
            report.push(format!("aggregate,{n},{c},all,{},,,,,,undefined_slope", cfg.t_grid.len()));
            continue;
        }
        let (mean, sd) = mean_sd(&slopes);
        let intercept = fits.iter().map(|f| f.intercept).sum::<f64>() / fits.len() as f64;
        let min_r2 = fits.iter().map(|f| f.r2).fold(f64::INFINITY, f64::min);
        let first = *first_mean.get_or_insert(mean);
        let rel_sd = if targets.len() > 1 && mean != 0.0 { Some(sd / mean) } else { None };
        report.push(format!(
            "aggregate,{n},{c},all,{},{mean},{intercept},{min_r2},{},{},{}",
            cfg.t_grid.len(),
            fmt_opt(rel_sd),
            fmt_opt((first != 0.0).then(|| mean / first)),
            if all_zero { "all_zero" } else { "ok" }
        ));
    }
    Ok(clean(report))
}

pub fn spiral(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let sets: Vec<DirectionSet> =
        if cfg.directions.is_empty() { DirectionSet::orthant_cells(cfg.dim) } else { cfg.directions.clone() };
    let mut report = Report::new("spiral", "n,c,T,A_kind,measure,count,non_polar,fraction");
    let targets = cfg.targets();
    for &c in &cfg.c_list {
        for w in windows(cfg, c)? {
            let per_target: Vec<(usize, Vec<usize>)> = targets
                .par_iter()
                .map(|alpha| {
                    let full = count_n(alpha, &w, &cfg.lattice, None, None)?;
                    let per_set = sets
                        .iter()
                        .map(|a| Ok(count_n(alpha, &w, &cfg.lattice, Some(a), None)?.total))
                        .collect::<Result<Vec<_>, Error>>()?;
                    Ok((full.total - full.polar, per_set))
                })
                .collect::<Result<_, Error>>()?;
            let non_polar: usize = per_target.iter().map(|p| p.0).sum();
            for (i, a) in sets.iter().enumerate() {
                let k: usize = per_target.iter().map(|p| p.1[i]).sum();
                let fraction = if non_polar == 0 { String::new() } else { format!("{}", k as f64 / non_polar as f64) };
                report.push(format!(
                    "{},{c},{},{},{},{k},{non_polar},{fraction}",
                    cfg.dim.n(),
                    w.t(),
                    a.label().replace(',', " "),
                    a.measure()
                ));
            }
        }
    }
    Ok(clean(report))
}

fn measure_config(cfg: &ExperimentConfig) -> Result<ConeMeasureConfig, CliError> {
    Ok(ConeMeasureConfig::new(cfg.kappa.unwrap_or(1.0), cfg.mc_samples, cfg.seed)?)
}

pub fn volume(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mcfg = measure_config(cfg)?;
    let mut report = Report::new("volume", VOLUME_CSV_HEADER);
    for region in &cfg.regions {
        let kind = if region == "E" { RegionKind::E } else { RegionKind::F };
        for &c in &cfg.c_list {
            for w in windows(cfg, c)? {
                for a in cfg.direction_options() {
                    let exact = match kind {
                        RegionKind::E => volume_e(cfg.dim, &w, a, &mcfg)?,
                        RegionKind::F => volume_f(cfg.dim, &w, a, &mcfg)?,
                    };
                    report.push(volume_csv_row(kind, cfg.dim, &w, a, &exact, cfg.seed));
                    if !cfg.monte_carlo {
                        continue;
                    }
                    let mc = match kind {
                        RegionKind::E if c >= 2.0 => {
                            report.note(format!("skipped Monte Carlo for E at c={c}: sampler needs c < 2"));
                            continue;
                        }
                        RegionKind::E => volume_e_mc(cfg.dim, &w, a, &mcfg)?,
                        RegionKind::F => volume_f_mc(cfg.dim, &w, a, &mcfg)?,
                    };
                    report.push(volume_csv_row(kind, cfg.dim, &w, a, &mc, cfg.seed));
                }
            }
        }
    }
    Ok(clean(report))
}

pub fn orbit(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut report = Report::new("orbit", ORBIT_CSV_HEADER);
    let desc = cfg.lattice_spec.replace(',', " ");
    let mut violation = false;
    for &c in &cfg.c_list {
        for w in windows(cfg, c)? {
            for a in cfg.direction_options() {
                let oc = OrbitConfig::new(cfg.r, w, a.cloned(), cfg.lattice.clone())?;
                let chain = orbit_chain_check(&oc)?;
                if !chain.holds() {
                    violation = true;
                    report.note(format!("violation at c={c} T={}: {:?}", w.t(), chain.violations));
                }
                report.push(orbit_csv_row(&oc, &desc, &chain)?);
            }
        }
    }
    Ok(Outcome { report, violation })
}

pub fn calibrate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let t = *cfg.t_grid.last().ok_or_else(|| ConfigError::Value { key: "T".into(), msg: "calibration needs a T".into() })?;
    let mcfg = ConeMeasureConfig::new(1.0, 1000, cfg.seed)?;
    let mut report = Report::new("calibrate", "n,c,T,samples,kappa,mean_slope,delta_vs_first");
    let mut first = None;
    for &c in &cfg.c_list {
        let cal = calibrate_kappa(cfg.dim, cfg.samples, &Window::new(t, c)?, &mcfg)?;
        let mean = cal.slopes.iter().sum::<f64>() / cal.slopes.len() as f64;
        let k0 = *first.get_or_insert(cal.kappa);
        report.push(format!(
            "{},{c},{t},{},{},{mean},{}",
            cfg.dim.n(),
            cfg.samples,
            cal.kappa,
            (cal.kappa - k0) / k0
        ));
    }
    Ok(clean(report))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, failures: usize, total: usize) -> Check {
    Check { name, pass: failures == 0, detail: format!("{failures} failures in {total} checks") }
}

fn dims() -> Vec<Dim> {
    (1..=3).map(|n| Dim::new(n).expect("1..=3")).collect()
}

fn rel_diff(a: &Group, b: &Group) -> f64 {
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut worst = 0.0f64;
    for i in 0..ma.rows() {
        for j in 0..ma.cols() {
            worst = worst.max((ma.get(i, j) - mb.get(i, j)).abs() / mb.get(i, j).abs().max(1.0));
        }
    }
    worst
}

fn check_group_laws(seed: u64) -> Result<Check, CliError> {
    let mut rng = substream(seed, Stream::Lattices, 1);
    let (mut fails, mut total) = (0, 0);
    for d in dims() {
        for _ in 0..20 {
            let (s, t) = (rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            fails += usize::from(rel_diff(&make_g_t(d, s).compose(&make_g_t(d, t)), &make_g_t(d, s + t)) > 1e-12);
            let (y, z) = (uniform_ball(&mut rng, d.n(), 3.0), uniform_ball(&mut rng, d.n(), 3.0));
            let yz: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
            let lhs = make_u_y(d, &y)?.compose(&make_u_y(d, &z)?);
            fails += usize::from(rel_diff(&lhs, &make_u_y(d, &yz)?) > 1e-12);
            let g = make_u_y(d, &y)?.compose(&make_g_t(d, s)).compose(&embed_k(d, &haar_rotation(&mut rng, d.n() + 1))?);
            let x: Vec<f64> = (0..d.ambient()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
            fails += usize::from((eval_q(d, &g.apply(&x)?)? - eval_q(d, &x)?).abs() > 1e-9 * scale);
            let f = iwasawa_decompose(&g)?;
            fails += usize::from(f.reconstruct()?.matrix().max_abs_diff(g.matrix()) > 1e-9);
            total += 4;
        }
    }
    Ok(check("group_laws", fails, total))
}

fn check_enumeration(seed: u64) -> Result<Check, CliError> {
    let mut rng = substream(seed, Stream::Targets, 1);
    let (mut fails, mut total) = (0, 0);
    for (n, q_max) in [(1usize, 200i64), (2, 30)] {
        let d = Dim::new(n)?;
        let all = enumerate_all(d, q_max)?;
        for _ in 0..5 {
            let alpha = random_alpha(&mut rng, d);
            let c = rng.random_range(0.2..2.5);
            let mut local: Vec<(i64, Vec<i64>)> =
                enumerate_near(&alpha, c, 1, q_max)?.points.into_iter().map(|v| (v.q, v.p)).collect();
            let mut brute: Vec<(i64, Vec<i64>)> = all
                .iter()
                .filter(|v| {
                    let d2: f64 = v.p.iter().zip(&alpha).map(|(&p, a)| (v.q as f64 * a - p as f64).powi(2)).sum();
                    d2 < c * c
                })
                .map(|v| (v.q, v.p.clone()))
                .collect();
            local.sort();
            brute.sort();
            fails += usize::from(local != brute);
            total += 1;
        }
    }
    Ok(check("enumeration_oracle", fails, total))
}

fn check_count_routes(seed: u64) -> Result<Check, CliError> {
    let mut rng = substream(seed, Stream::Targets, 2);
    let (mut fails, mut total) = (0, 0);
    for i in 0..15 {
        let d = Dim::new(1 + i % 3)?;
        let alpha = random_alpha(&mut rng, d);
        let w = Window::new(rng.random_range(2.0..4.5), rng.random_range(0.3..2.0))?;
        let lattice = LatticeDescriptor::standard(d);
        let direct = count_n(&alpha, &w, &lattice, None, None)?;
        let rotated = count_rotated_e(&w, &lattice, &rotation_to_pole(&alpha)?)?;
        if direct.boundary_hits == 0 && rotated.boundary_hits == 0 {
            fails += usize::from(direct.total != rotated.total);
            total += 1;
        }
    }
    Ok(check("count_routes", fails, total))
}

fn check_sandwich() -> Result<Check, CliError> {
    let (mut fails, mut total) = (0, 0);
    for (n, q_max) in [(1usize, 2000i64), (2, 120)] {
        let d = Dim::new(n)?;
        let pts: Vec<_> = enumerate_all(d, q_max)?.iter().map(|v| v.to_cone()).collect();
        for c in [0.5f64, 1.0, 2.0] {
            let consts = SandwichConstants::new(c, 2 * (c * c).ceil() as u32 + 2)?;
            let lo = consts.t_threshold() + 1e-9;
            let hi = (q_max as f64).acosh();
            for j in 0..4 {
                let w = Window::new(lo + (hi - lo) * j as f64 / 3.0, c)?;
                fails += sandwich_check(&pts, &w, &consts, None)?.len();
                total += pts.len();
            }
        }
    }
    Ok(check("sandwich", fails, total))
}

fn check_orbits(seed: u64) -> Result<Check, CliError> {
    let mut rng = substream(seed, Stream::Lattices, 2);
    let (mut fails, mut total) = (0, 0);
    for i in 0..6 {
        let d = Dim::new(1 + i % 2)?;
        let g = make_u_y(d, &uniform_ball(&mut rng, d.n(), 0.5))?
            .compose(&make_g_t(d, rng.random_range(-0.5..0.5)))
            .compose(&embed_k(d, &haar_rotation(&mut rng, d.n() + 1))?);
        let lattice = if i < 2 { LatticeDescriptor::standard(d) } else { LatticeDescriptor::new(g)? };
        let t = rng.random_range(2.5..4.5);
        let oc = OrbitConfig::new(rng.random_range(0.3..1.5), Window::new(t, rng.random_range(0.5..1.5))?, None, lattice)?;
        fails += usize::from(!orbit_chain_check(&oc)?.holds());
        total += 1;
    }
    Ok(check("orbit_chains", fails, total))
}

fn check_volumes(seed: u64) -> Result<Check, CliError> {
    let mcfg = ConeMeasureConfig::new(1.0, 200_000, seed)?;
    let (mut fails, mut total) = (0, 0);
    for d in dims() {
        let w = Window::new(1.5, 1.0)?;
        let exact = volume_f(d, &w, None, &mcfg)?.value;
        let mc = volume_f_mc(d, &w, None, &mcfg)?;
        fails += usize::from((exact - mc.value).abs() > 5.0 * mc.stderr + 1e-12 * exact);
        let quad = volume_e(d, &w, None, &mcfg)?.value;
        let emc = volume_e_mc(d, &w, None, &mcfg)?;
        fails += usize::from((quad - emc.value).abs() > 5.0 * emc.stderr);
        total += 2;
    }
    Ok(check("volumes", fails, total))
}

pub fn selftest(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let checks = [
        check_group_laws(cfg.seed)?,
        check_enumeration(cfg.seed)?,
        check_count_routes(cfg.seed)?,
        check_sandwich()?,
        check_orbits(cfg.seed)?,
        check_volumes(cfg.seed)?,
    ];
    let mut report = Report::new("selftest", "check,status,detail");
    let mut violation = false;
    for c in checks {
        violation |= !c.pass;
        report.push(format!("{},{},{}", c.name, if c.pass { "pass" } else { "fail" }, c.detail));
    }
    Ok(Outcome { report, violation })
}
