use std::path::PathBuf;

use dyson_core::analytics::{alpha_plus, b_uniform_bound};
use dyson_core::{
    b_max, boundary_tail_bound, boundary_tail_exact, decoupling_energy, emit_outputs, exact_gibbs, field_profile,
    g_coefficient, interface_analysis, mc_magnetization, run_discontinuity, run_localization, run_wetting,
    BoundaryCondition, CouplingModel, DiscontinuityConfig, Engine, ExperimentReport, FieldProfileSpec,
    LocalizationConfig, McParams, Table, Verdict, Volume, WettingConfig,
};
use serde_json::{json, Value};

use crate::config::{BcKind, EngineKind, RunConfig};
use crate::{Command, Failure};

const DEFAULT_CUTOFF: u64 = 1000;
/// Error-rate constant used by `bounds` for the g coefficient.
const C1: f64 = 1.0;

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Value, Failure> {
    let (report, mut summary) = match cmd {
        Command::Exact(_) => exact(cfg)?,
        Command::Mc(_) => mc(cfg)?,
        Command::Interface(_) => interface(cfg)?,
        Command::Localization(_) => localization(cfg)?,
        Command::Wetting(_) => wetting(cfg)?,
        Command::Discontinuity(_) => discontinuity(cfg)?,
        Command::Bounds(_) => bounds(cfg)?,
        Command::Fields(_) => fields(cfg)?,
    };
    let out = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("runs"));
    let dir = emit_outputs(&report, &out)?;
    let verdicts: serde_json::Map<String, Value> =
        report.verdicts.iter().map(|v| (v.check.clone(), json!(v.passed))).collect();
    summary["command"] = json!(cmd.name());
    summary["run_dir"] = json!(dir.display().to_string());
    summary["verdicts"] = Value::Object(verdicts);
    Ok(summary)
}

type Output = Result<(ExperimentReport, Value), Failure>;

fn model(cfg: &RunConfig, alpha: f64, beta: f64, j1: f64) -> Result<CouplingModel, Failure> {
    Ok(CouplingModel::new(cfg.alpha.unwrap_or(alpha), cfg.beta.unwrap_or(beta), cfg.j1.unwrap_or(j1))?)
}

fn mc_params(cfg: &RunConfig) -> Result<McParams, Failure> {
    let p = McParams::new(
        cfg.sweeps.unwrap_or(10_000),
        cfg.burnin.unwrap_or(1_000),
        cfg.chains.unwrap_or(8) as usize,
        cfg.seed.unwrap_or(0),
    )
    .with_thin(cfg.thin.unwrap_or(1));
    p.validate()?;
    Ok(p)
}

fn engine(cfg: &RunConfig) -> Result<Engine, Failure> {
    match cfg.engine.unwrap_or(EngineKind::Exact) {
        EngineKind::Exact => Ok(Engine::exact()),
        EngineKind::Mc => Ok(Engine::Mc(mc_params(cfg)?)),
    }
}

fn boundary(kind: BcKind, cutoff: u64) -> Result<BoundaryCondition, Failure> {
    let bc = match kind {
        BcKind::Plus => BoundaryCondition::plus(cutoff),
        BcKind::Minus => BoundaryCondition::minus(cutoff),
        BcKind::Free => return Ok(BoundaryCondition::free()),
        BcKind::DobrushinMp => BoundaryCondition::dobrushin_minus_plus(cutoff),
        BcKind::DobrushinPm => BoundaryCondition::dobrushin_plus_minus(cutoff),
    }?;
    Ok(bc.with_tail_correction(true))
}

fn bc_name(kind: BcKind) -> &'static str {
    match kind {
        BcKind::Plus => "plus",
        BcKind::Minus => "minus",
        BcKind::Free => "free",
        BcKind::DobrushinMp => "dobrushin-mp",
        BcKind::DobrushinPm => "dobrushin-pm",
    }
}

fn centered(l: u64) -> Result<Volume, Failure> {
    let l = i64::try_from(l).map_err(|_| Failure::precondition(format!("L: too large, got {l}")))?;
    Ok(Volume::centered(l)?)
}

fn common_params(report: &mut ExperimentReport, m: &CouplingModel, cutoff: u64, l: u64, bc: BcKind) {
    report.param("alpha", m.alpha);
    report.param("beta", m.beta);
    report.param("j1", m.j1);
    report.param("cutoff", cutoff);
    report.param("L", l);
    report.param("bc", bc_name(bc));
}

fn exact(cfg: &RunConfig) -> Output {
    let m = model(cfg, 1.5, 1.0, 1.0)?;
    let (l, cutoff, kind) = (cfg.l.unwrap_or(3), cfg.cutoff.unwrap_or(DEFAULT_CUTOFF), cfg.bc.unwrap_or(BcKind::Plus));
    let v = centered(l)?;
    let r = exact_gibbs(v, &boundary(kind, cutoff)?, &m, None)?;
    let mut report = ExperimentReport::new("exact");
    common_params(&mut report, &m, cutoff, l, kind);
    report.param("log_partition", r.log_partition);
    let mut t = Table::new("magnetization", &["site", "magnetization"]);
    for (&i, &s) in &r.magnetization {
        t.push(vec![i.into(), s.into()]);
    }
    report.tables.push(t);
    Ok((report, r.to_json()))
}

fn mc(cfg: &RunConfig) -> Output {
    let m = model(cfg, 1.5, 1.0, 1.0)?;
    let (l, cutoff, kind) = (cfg.l.unwrap_or(3), cfg.cutoff.unwrap_or(DEFAULT_CUTOFF), cfg.bc.unwrap_or(BcKind::Plus));
    let p = mc_params(cfg)?;
    let v = centered(l)?;
    let sites: Vec<i64> = v.sites().collect();
    let est = mc_magnetization(v, &boundary(kind, cutoff)?, &m, None, &sites, &p)?;
    let mut report = ExperimentReport::new("mc");
    common_params(&mut report, &m, cutoff, l, kind);
    for (k, val) in [("sweeps", p.sweeps), ("burnin", p.burnin), ("chains", p.chains as u64), ("thin", p.thin), ("seed", p.seed)] {
        report.param(k, val);
    }
    let mut t = Table::new("magnetization", &["site", "mean", "std_error", "n_samples"]);
    for (&i, e) in &est {
        t.push(vec![i.into(), e.mean.into(), e.std_error.into(), e.n_samples.into()]);
    }
    report.tables.push(t);
    let mags: serde_json::Map<String, Value> =
        est.iter().map(|(i, e)| (i.to_string(), json!({"mean": e.mean, "std_error": e.std_error}))).collect();
    Ok((report, json!({ "magnetization": mags })))
}

fn interface(cfg: &RunConfig) -> Output {
    let m = model(cfg, 1.5, 5.0, 3.0)?;
    let (l, cutoff) = (cfg.l.unwrap_or(4), cfg.cutoff.unwrap_or(DEFAULT_CUTOFF));
    let kind = cfg.bc.unwrap_or(BcKind::DobrushinMp);
    let eng = engine(cfg)?;
    let v = centered(l)?;
    let a = interface_analysis(v, &m, &boundary(kind, cutoff)?, &eng)?;
    let mut report = ExperimentReport::new("interface");
    common_params(&mut report, &m, cutoff, l, kind);
    report.param("engine", eng.name());
    if let Engine::Mc(p) = eng {
        report.param("seed", p.seed);
        report.param("sweeps", p.sweeps);
        report.param("chains", p.chains as u64);
    }
    let h = &a.histogram;
    let mut hist = Table::new("histogram", &["theta", "probability", "std_error"]);
    let mut prof = Table::new("profile", &["theta", "site", "conditional"]);
    for k in 0..h.grid.len() {
        let se = h.std_errors.as_ref().map_or(0.0, |e| e[k]);
        hist.push(vec![h.grid.value(k).into(), h.probabilities[k].into(), se.into()]);
        if let Some(p) = &a.profiles[k] {
            for (i, s) in v.sites().zip(p) {
                prof.push(vec![h.grid.value(k).into(), i.into(), (*s).into()]);
            }
        }
    }
    let eps = cfg.epsilon.unwrap_or(0.5);
    report.param("epsilon", eps);
    report.param("escape_probability", h.escape_probability(eps));
    report.tables.extend([hist, prof]);
    Ok((report, json!({ "escape_probability": h.escape_probability(eps), "mode_theta": h.grid.value(h.mode()) })))
}

fn localization(cfg: &RunConfig) -> Output {
    let preset = LocalizationConfig::preset();
    let mut c = LocalizationConfig {
        model: model(cfg, preset.model.alpha, preset.model.beta, preset.model.j1)?,
        cutoff: cfg.cutoff.unwrap_or(preset.cutoff),
        engine: engine(cfg)?,
        ..preset
    };
    if let Some(l) = cfg.l {
        c.l_list = (3.min(l)..=l).collect();
    }
    if let Some(e) = cfg.epsilon {
        c.epsilons = vec![e];
    }
    if !(c.model.alpha > alpha_plus()) {
        return Err(Failure::precondition(format!("alpha: localization needs alpha > {:.6}, got {}", alpha_plus(), c.model.alpha)));
    }
    let (report, hists) = run_localization(&c)?;
    let escapes: Vec<Value> = hists
        .iter()
        .map(|(l, h)| json!({ "L": l, "escape": c.epsilons.iter().map(|e| h.escape_probability(*e)).collect::<Vec<_>>() }))
        .collect();
    Ok((report, json!({ "epsilons": c.epsilons, "escape": escapes })))
}

fn wetting(cfg: &RunConfig) -> Output {
    let mut c = match cfg.engine.unwrap_or(EngineKind::Exact) {
        EngineKind::Exact => WettingConfig::exact_preset(),
        EngineKind::Mc => {
            let mut c = WettingConfig::mc_preset(mc_params(cfg)?);
            if let Some(l) = cfg.l {
                c.left_margin = 2 * l;
                c.right_margin = 2 * l;
            }
            c
        }
    };
    c.model = model(cfg, c.model.alpha, c.model.beta, c.model.j1)?;
    c.l = cfg.l.unwrap_or(c.l);
    c.n = cfg.big_n.unwrap_or(c.n);
    c.epsilon = cfg.epsilon.unwrap_or(c.epsilon);
    c.cutoff = cfg.cutoff.unwrap_or(c.cutoff);
    let report = run_wetting(&c)?;
    let m = report.parameters["m"].as_f64();
    Ok((report, json!({ "m": m })))
}

fn discontinuity(cfg: &RunConfig) -> Output {
    let preset = DiscontinuityConfig::preset();
    let mut c = DiscontinuityConfig {
        model: model(cfg, preset.model.alpha, preset.model.beta, preset.model.j1)?,
        l: cfg.l.unwrap_or(preset.l),
        n_annulus: cfg.big_n.unwrap_or(preset.n_annulus),
        cutoff: cfg.cutoff.unwrap_or(preset.cutoff),
        engine: engine(cfg)?,
        ..preset
    };
    if cfg.l.is_some() || cfg.big_n.is_some() || cfg.n.is_some() {
        let first = c.l + c.n_annulus;
        let last = cfg.n.unwrap_or(first + 4);
        if last < first {
            return Err(Failure::precondition(format!("n: n must be at least L + N = {first}, got {last}")));
        }
        c.n_list = (first..=last).step_by(2).collect();
    }
    let report = run_discontinuity(&c)?;
    let gap = report.parameters["gap_at_largest_n"].as_f64();
    Ok((report, json!({ "n_list": c.n_list, "gap_at_largest_n": gap })))
}

fn bounds(cfg: &RunConfig) -> Output {
    let alpha = cfg.alpha.unwrap_or(1.5);
    let l1 = cfg.l1.unwrap_or(16);
    let (l, big_n) = (cfg.l.unwrap_or(4), cfg.big_n.unwrap_or(64));
    let mut report = ExperimentReport::new("bounds");
    report.param("alpha", alpha);
    report.param("L1", l1);
    report.param("L", l);
    report.param("N", big_n);

    let uniform = b_uniform_bound(alpha);
    let mut bt = Table::new("b_max", &["L1", "value", "limit", "tail_allowance", "bound", "satisfied"]);
    let mut worst_uniform = f64::INFINITY;
    let mut all_bounded = true;
    for k in 1..=l1 {
        let b = b_max(k, alpha)?;
        worst_uniform = worst_uniform.min(uniform - b.value);
        all_bounded &= b.report.satisfied;
        bt.push(vec![
            k.into(),
            b.value.into(),
            b.limit.into(),
            b.tail_allowance.into(),
            b.report.analytic_bound.into(),
            b.report.satisfied.into(),
        ]);
    }
    report.param("b_uniform_bound", uniform);
    report.verdicts.push(Verdict::new("b_max_within_bound", all_bounded, worst_uniform));
    report.verdicts.push(Verdict::non_negative("b_max_uniform", worst_uniform));

    let mut dt = Table::new("decoupling", &["L1", "energy", "bound", "satisfied"]);
    let mut dec_ok = true;
    if alpha < 2.0 {
        for k in 1..=l1 {
            let d = decoupling_energy(k, alpha)?;
            dec_ok &= d.report.satisfied;
            dt.push(vec![k.into(), d.report.computed_value.into(), d.report.analytic_bound.into(), d.report.satisfied.into()]);
        }
        report.verdicts.push(Verdict::new("decoupling_within_bound", dec_ok, 0.0));
        report.tables.push(dt);
    }

    let exact = boundary_tail_exact(l, big_n, alpha);
    let bound = boundary_tail_bound(l, big_n, alpha);
    let mut tt = Table::new("boundary_tail", &["L", "N", "exact", "bound"]);
    tt.push(vec![l.into(), big_n.into(), exact.into(), bound.into()]);
    report.verdicts.push(Verdict::non_negative("boundary_tail_within_bound", bound - exact));

    let (beta, eps, j1) = (cfg.beta.unwrap_or(5.0), cfg.epsilon.unwrap_or(0.5), cfg.j1.unwrap_or(3.0));
    let g = g_coefficient(alpha, beta, eps, j1, C1)?;
    report.param("beta", beta);
    report.param("epsilon", eps);
    report.param("j1", j1);
    report.param("c1", C1);
    let mut gt = Table::new("g_coefficient", &["prefactor", "f_half", "m_alpha", "x", "bracket", "value"]);
    gt.push(vec![g.prefactor.into(), g.f_half.into(), g.m_alpha.into(), g.x.into(), g.bracket.into(), g.value.into()]);
    report.tables.extend([bt, tt, gt]);
    Ok((report, json!({ "b_max": b_max(l1, alpha)?.value, "g_coefficient": g.value })))
}

fn fields(cfg: &RunConfig) -> Output {
    let alpha = cfg.alpha.unwrap_or(1.5);
    let (l, big_n, n) = (cfg.l.unwrap_or(2), cfg.big_n.unwrap_or(1600), cfg.n.unwrap_or(6400));
    let plus = FieldProfileSpec::new(l, big_n, n, 1, alpha)?;
    let minus = FieldProfileSpec::new(l, big_n, n, -1, alpha)?;
    let mut report = ExperimentReport::new("fields");
    report.param("alpha", alpha);
    report.param("L", l);
    report.param("N", big_n);
    report.param("n", n);
    report.param("L_N_pow_1_minus_alpha", plus.smallness());
    let mut t = Table::new("profile", &["x", "plus_annulus", "minus_annulus"]);
    let (mut plus_min, mut hm) = (f64::INFINITY, Vec::new());
    for x in 0..=2 * n {
        let (hp, hn) = (field_profile(&plus, x)?, field_profile(&minus, x)?);
        plus_min = plus_min.min(hp);
        hm.push(hn);
        t.push(vec![x.into(), hp.into(), hn.into()]);
    }
    // smallest x0 with the minus-annulus field positive on [x0, 2n]
    let x0 = (0..hm.len()).rev().take_while(|&x| hm[x] > 0.0).last().unwrap_or(hm.len()) as u64;
    report.param("minus_annulus_sign_change", x0);
    report.verdicts.push(Verdict::positive("plus_annulus_positive", plus_min));
    report.verdicts.push(Verdict::positive("minus_annulus_negative_at_0", -hm[0]));
    report.verdicts.push(Verdict::positive("minus_annulus_recovers_before_n", n as f64 - x0 as f64));
    report.verdicts.push(Verdict::non_negative("smallness_at_most_0.1", 0.1 - plus.smallness()));
    report.tables.push(t);
    Ok((report, json!({ "plus_min": plus_min, "minus_h0": hm[0], "minus_sign_change": x0 })))
}
