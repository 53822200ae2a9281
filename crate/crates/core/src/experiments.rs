//! Packaged studies: interface localization under Dobrushin boundaries,
//! wetting next to a frozen minus interval, and the gap between one-sided
//! conditionings on two pasts that agree near the origin.
//!
//! Each run returns an [`ExperimentReport`] whose verdicts name the checks.
//! Reports carry no timing information so reruns are byte-identical.

use crate::analytics::alpha_plus;
use crate::contour::{interface_analysis, Engine, InterfaceHistogram};
use crate::error::{Error, Result};
use crate::exact::SiteSums;
use crate::lattice::{BoundaryCondition, CouplingModel, Spin, Volume};
use crate::mc::{magnetization_on, Estimate, McParams};
use crate::report::{Cell, ExperimentReport, Table, Verdict};
use crate::system::{Constraint, PreparedSystem};

/// Default boundary cutoff of the experiments.
pub const DEFAULT_CUTOFF: u64 = 1000;

fn engine_params(report: &mut ExperimentReport, engine: &Engine) {
    report.param("engine", engine.name());
    if let Engine::Mc(p) = engine {
        report.param("sweeps", p.sweeps);
        report.param("burnin", p.burnin);
        report.param("chains", p.chains);
        report.param("thin", p.thin);
        report.param("seed", p.seed);
    }
}

fn model_params(report: &mut ExperimentReport, model: &CouplingModel, cutoff: u64) {
    report.param("alpha", model.alpha);
    report.param("beta", model.beta);
    report.param("j1", model.j1);
    report.param("cutoff", cutoff);
}

/// Homogeneous or Dobrushin boundary with the continuum tail correction.
fn corrected(bc: Result<BoundaryCondition>) -> Result<BoundaryCondition> {
    Ok(bc?.with_tail_correction(true))
}

/// `<s_i>` for every site of the volume. Exact results carry zero error and
/// the number of enumerated configurations as sample count.
pub fn measure(sys: &PreparedSystem, engine: &Engine) -> Result<Vec<Estimate>> {
    let v = sys.volume();
    match engine {
        Engine::Exact(ex) => {
            let e = ex.enumerate(sys, || SiteSums(vec![0.0; v.len()]))?;
            let n = 1u64 << sys.n_free();
            Ok(e.observer.0.iter().map(|s| Estimate { mean: s / e.total, std_error: 0.0, n_samples: n }).collect())
        }
        Engine::Mc(p) => {
            if p.chains < 2 {
                return Err(Error::params("error bars need at least 2 chains"));
            }
            let sites: Vec<i64> = v.sites().collect();
            let m = magnetization_on(sys, &sites, p)?;
            Ok(sites.iter().map(|s| m[s]).collect())
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalizationConfig {
    pub model: CouplingModel,
    pub l_list: Vec<u64>,
    pub cutoff: u64,
    pub epsilons: Vec<f64>,
    pub engine: Engine,
}

impl LocalizationConfig {
    /// `beta = 5`, `alpha = 1.5`, `j1 = 3`, `L = 3..=8`, exact.
    pub fn preset() -> Self {
        LocalizationConfig {
            model: CouplingModel::new(1.5, 5.0, 3.0).expect("valid preset"),
            l_list: (3..=8).collect(),
            cutoff: DEFAULT_CUTOFF,
            epsilons: vec![0.25, 0.5],
            engine: Engine::exact(),
        }
    }
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Interface histograms on `[-L, L]` under the minus-plus boundary.
pub fn run_localization(cfg: &LocalizationConfig) -> Result<(ExperimentReport, Vec<(u64, InterfaceHistogram)>)> {
    let a = cfg.model.alpha;
    if !(a > alpha_plus() && a < 2.0) {
        return Err(Error::params(format!("localization needs {} < alpha < 2, got {a}", alpha_plus())));
    }
    if cfg.l_list.is_empty() || cfg.l_list.contains(&0) {
        return Err(Error::params("L list must be non-empty and positive"));
    }
    let bc = corrected(BoundaryCondition::dobrushin_minus_plus(cfg.cutoff))?;

    let mut report = ExperimentReport::new("localization");
    model_params(&mut report, &cfg.model, cfg.cutoff);
    engine_params(&mut report, &cfg.engine);
    report.param("L_list", cfg.l_list.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "));

    let mut hist = Table::new("histogram", &["L", "theta", "probability", "std_error"]);
    let mut escape = Table::new("escape", &["L", "epsilon", "probability"]);
    let mut results = Vec::new();
    let mut mode_margin = f64::INFINITY;
    for &l in &cfg.l_list {
        let v = Volume::centered(l as i64)?;
        let h = interface_analysis(v, &cfg.model, &bc, &cfg.engine)?.histogram;
        for k in 0..h.grid.len() {
            let se = h.std_errors.as_ref().map_or(0.0, |e| e[k]);
            hist.push(vec![l.into(), h.grid.value(k).into(), h.probabilities[k].into(), se.into()]);
        }
        for &eps in &cfg.epsilons {
            escape.push(vec![l.into(), eps.into(), h.escape_probability(eps).into()]);
        }
        // within one grid step of the two central values
        let step = 1.0 / l as f64;
        mode_margin = mode_margin.min(1.5 * step + 1e-12 - h.grid.value(h.mode()).abs());
        results.push((l, h));
    }

    let mut fit = Table::new("fit", &["epsilon", "slope", "intercept", "points"]);
    for &eps in &cfg.epsilons {
        let pts: Vec<(f64, f64)> = results
            .iter()
            .filter_map(|(l, h)| {
                let p = h.escape_probability(eps);
                (p > 0.0).then(|| ((*l as f64).powf(2.0 - a), -p.ln()))
            })
            .collect();
        let (slope, icpt) = linear_fit(&pts).unwrap_or((f64::NAN, f64::NAN));
        fit.push(vec![eps.into(), slope.into(), icpt.into(), pts.len().into()]);
    }

    let half: Vec<f64> = results.iter().map(|(_, h)| h.escape_probability(0.5)).collect();
    let decrease = half.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let last = *half.last().expect("non-empty");
    report.verdicts.push(Verdict::positive("escape_strictly_decreasing", decrease));
    report.verdicts.push(Verdict::positive("escape_below_0.05_at_largest_L", 0.05 - last));
    report.verdicts.push(Verdict::non_negative("mode_within_one_step_of_centre", mode_margin));
    report.tables.extend([hist, escape, fit]);
    Ok((report, results))
}

#[derive(Clone, Debug)]
pub struct WettingConfig {
    pub model: CouplingModel,
    /// Block length `L`; sets the wet-window width.
    pub l: u64,
    /// The frozen interval is `[-N, -1]`.
    pub n: u64,
    /// Free sites left of the frozen interval.
    pub left_margin: u64,
    /// Free sites from 0 rightwards.
    pub right_margin: u64,
    pub epsilon: f64,
    pub cutoff: u64,
    pub engine: Engine,
}

impl WettingConfig {
    /// Volume `[-6, 3]`, `[-4, -1]` frozen, `alpha = 1.5`, `beta = 2`, exact.
    pub fn exact_preset() -> Self {
        WettingConfig {
            model: CouplingModel::power_law(1.5, 2.0).expect("valid preset"),
            l: 2,
            n: 4,
            left_margin: 2,
            right_margin: 4,
            epsilon: 0.5,
            cutoff: DEFAULT_CUTOFF,
            engine: Engine::exact(),
        }
    }

    /// `L = 32`, `N = 256`, margins `2L`, `alpha = 1.5`, `beta = 2`, MC.
    pub fn mc_preset(params: McParams) -> Self {
        WettingConfig {
            model: CouplingModel::power_law(1.5, 2.0).expect("valid preset"),
            l: 32,
            n: 256,
            left_margin: 64,
            right_margin: 64,
            epsilon: 0.5,
            cutoff: DEFAULT_CUTOFF,
            engine: Engine::Mc(params),
        }
    }

    pub fn volume(&self) -> Result<Volume> {
        Volume::new(-(self.n as i64) - self.left_margin as i64, self.right_margin as i64 - 1)
    }

    /// `floor((1 - eps) L / 2)`: sites per wet window.
    pub fn window(&self) -> u64 {
        ((1.0 - self.epsilon) * self.l as f64 / 2.0).floor() as u64
    }
}

/// Conditional profile with `[-N, -1]` frozen minus under a plus boundary,
/// against the unconditioned plus profile on the same volume.
pub fn run_wetting(cfg: &WettingConfig) -> Result<ExperimentReport> {
    if cfg.n <= cfg.l {
        return Err(Error::params(format!("need N > L, got N={}, L={}", cfg.n, cfg.l)));
    }
    if cfg.right_margin == 0 {
        return Err(Error::params("right margin must leave site 0 free"));
    }
    if !(0.0..1.0).contains(&cfg.epsilon) {
        return Err(Error::params("epsilon must lie in [0, 1)"));
    }
    let v = cfg.volume()?;
    let n = cfg.n as i64;
    let bc = corrected(BoundaryCondition::plus(cfg.cutoff))?;
    let constraint = Constraint::new().freeze_range(-n, -1, Spin::Down);
    let cond = measure(&PreparedSystem::new(v, &bc, &cfg.model, Some(&constraint))?, &cfg.engine)?;
    let free = measure(&PreparedSystem::new(v, &bc, &cfg.model, None)?, &cfg.engine)?;

    let mut report = ExperimentReport::new("wetting");
    model_params(&mut report, &cfg.model, cfg.cutoff);
    engine_params(&mut report, &cfg.engine);
    report.param("L", cfg.l);
    report.param("N", cfg.n);
    report.param("left_margin", cfg.left_margin);
    report.param("right_margin", cfg.right_margin);
    report.param("epsilon", cfg.epsilon);
    let smallness = cfg.l as f64 * (cfg.n as f64).powf(1.0 - cfg.model.alpha);
    report.param("L_N_pow_1_minus_alpha", smallness);

    let k0 = v.index_of(0).expect("site 0 in volume");
    let m = free[k0];
    let w = cfg.window() as i64;
    let in_window = |i: i64| (0..w).contains(&i) || (-n - w..-n).contains(&i);

    let mut profile = Table::new(
        "profile",
        &["site", "conditional", "conditional_std_error", "unconditioned", "unconditioned_std_error", "frozen", "wet_window", "below_minus_half_m"],
    );
    let mut window_margin = f64::INFINITY;
    for (k, i) in v.sites().enumerate() {
        let frozen = (-n..0).contains(&i);
        let c = cond[k];
        let wet = in_window(i);
        if wet && i >= 0 {
            window_margin = window_margin.min(-(c.mean + 3.0 * c.std_error));
        }
        profile.push(vec![
            i.into(),
            c.mean.into(),
            c.std_error.into(),
            free[k].mean.into(),
            free[k].std_error.into(),
            frozen.into(),
            wet.into(),
            (!frozen && c.mean <= -m.mean / 2.0).into(),
        ]);
    }
    report.param("m", m.mean);
    report.param("m_std_error", m.std_error);

    let c0 = cond[k0];
    report.verdicts.push(Verdict::positive("sigma0_conditioned_negative", -(c0.mean + 3.0 * c0.std_error)));
    if w > 0 {
        report.verdicts.push(Verdict::positive("right_wet_window_negative", window_margin));
    }
    report.verdicts.push(Verdict::positive("unconditioned_sigma0_positive", m.mean - 3.0 * m.std_error));
    if cfg.left_margin == cfg.right_margin && cfg.left_margin > 0 {
        // site i mirrors to -N-1-i
        let mut worst = f64::INFINITY;
        for (k, i) in v.sites().enumerate() {
            let j = -n - 1 - i;
            let kj = v.index_of(j).expect("symmetric volume");
            let (a, b) = (cond[k], cond[kj]);
            let tol = 4.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt() + 1e-10;
            worst = worst.min(tol - (a.mean - b.mean).abs());
        }
        report.verdicts.push(Verdict::non_negative("mirror_symmetry", worst));
    }
    report.verdicts.push(Verdict::non_negative("smallness_at_most_0.1", 0.1 - smallness));
    report.tables.push(profile);
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct DiscontinuityConfig {
    pub model: CouplingModel,
    /// Alternating block `[-L, -1]`.
    pub l: u64,
    /// The homogeneous annulus is `[-N-L, -L-1]`.
    pub n_annulus: u64,
    /// Future volumes `[0, n]`, ascending.
    pub n_list: Vec<u64>,
    pub cutoff: u64,
    pub engine: Engine,
}

impl DiscontinuityConfig {
    /// `L = 2`, `N = 6`, `n in {8, 10, 12}`, `alpha = 1.5`, `beta = 2`, exact.
    pub fn preset() -> Self {
        DiscontinuityConfig {
            model: CouplingModel::power_law(1.5, 2.0).expect("valid preset"),
            l: 2,
            n_annulus: 6,
            n_list: vec![8, 10, 12],
            cutoff: DEFAULT_CUTOFF,
            engine: Engine::exact(),
        }
    }
}

/// Frozen past: alternating on `[-L, -1]`, `annulus` on `[-N-L, -L-1]`,
/// plus further left down to `lo`.
pub fn discontinuity_past(l: u64, n_annulus: u64, annulus: Spin, lo: i64) -> Constraint {
    let (l, n) = (l as i64, n_annulus as i64);
    let mut c = Constraint::new();
    for i in lo..0 {
        let s = if i >= -l {
            Spin::alternating(i)
        } else if i >= -n - l {
            annulus
        } else {
            Spin::Up
        };
        c.insert(i, s);
    }
    c
}

/// `<s_0>` with the future `[0, n]` free under the two pasts.
pub fn run_discontinuity(cfg: &DiscontinuityConfig) -> Result<ExperimentReport> {
    if cfg.l >= cfg.n_annulus {
        return Err(Error::params(format!("need L < N, got L={}, N={}", cfg.l, cfg.n_annulus)));
    }
    if cfg.n_list.is_empty() {
        return Err(Error::params("n list must be non-empty"));
    }
    if cfg.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NotNested { index: cfg.n_list.windows(2).position(|w| w[1] <= w[0]).unwrap() + 1 });
    }
    let bc = corrected(BoundaryCondition::plus(cfg.cutoff))?;

    let mut report = ExperimentReport::new("discontinuity");
    model_params(&mut report, &cfg.model, cfg.cutoff);
    engine_params(&mut report, &cfg.engine);
    report.param("L", cfg.l);
    report.param("N", cfg.n_annulus);
    report.param("n_list", cfg.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));

    let mut gaps = Table::new("gap", &["n", "plus_past", "plus_std_error", "minus_past", "minus_std_error", "gap"]);
    let mut probes = Table::new("probe", &["n", "site", "plus_past", "minus_past", "difference"]);
    let mut gap_seq = Vec::new();
    let mut plus_seq = Vec::new();
    let mut dominance = f64::INFINITY;
    for &n in &cfg.n_list {
        let lo = -((n.max(cfg.n_annulus + cfg.l)) as i64);
        let v = Volume::new(lo, n as i64)?;
        let run = |annulus: Spin| -> Result<Vec<Estimate>> {
            let c = discontinuity_past(cfg.l, cfg.n_annulus, annulus, lo);
            measure(&PreparedSystem::new(v, &bc, &cfg.model, Some(&c))?, &cfg.engine)
        };
        let plus = run(Spin::Up)?;
        let minus = run(Spin::Down)?;
        let k0 = v.index_of(0).expect("site 0");
        let gap = plus[k0].mean - minus[k0].mean;
        gaps.push(vec![
            n.into(),
            plus[k0].mean.into(),
            plus[k0].std_error.into(),
            minus[k0].mean.into(),
            minus[k0].std_error.into(),
            gap.into(),
        ]);
        for i in 0..=n as i64 {
            let k = v.index_of(i).expect("future site");
            let d = plus[k].mean - minus[k].mean;
            let tol = 3.0 * (plus[k].std_error.powi(2) + minus[k].std_error.powi(2)).sqrt();
            dominance = dominance.min(d + tol);
            probes.push(vec![n.into(), i.into(), plus[k].mean.into(), minus[k].mean.into(), d.into()]);
        }
        gap_seq.push(gap);
        plus_seq.push(plus[k0]);
    }
    let min_gap = gap_seq.iter().copied().fold(f64::INFINITY, f64::min);
    report.param("gap_at_largest_n", *gap_seq.last().expect("non-empty"));
    report.verdicts.push(Verdict::positive("gap_positive_all_n", min_gap));
    report.verdicts.push(Verdict::non_negative("gap_persistent", min_gap - 0.5 * gap_seq[0]));
    report.verdicts.push(Verdict::non_negative("fkg_dominance", dominance));
    let monotone = plus_seq
        .windows(2)
        .map(|w| w[0].mean - w[1].mean + 3.0 * (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt() + 1e-12)
        .fold(f64::INFINITY, f64::min);
    if plus_seq.len() > 1 {
        report.verdicts.push(Verdict::non_negative("plus_past_nonincreasing", monotone));
    }
    report.tables.extend([gaps, probes]);
    Ok(report)
}

/// Cell value of a table by row index and column name.
pub fn cell(report: &ExperimentReport, table: &str, row: usize, column: &str) -> Option<Cell> {
    let t = report.table(table)?;
    Some(t.rows.get(row)?[t.column(column)?].clone())
}
