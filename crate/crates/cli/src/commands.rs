use std::path::Path;

use cookiezeta::dynamics::birkhoff_sum;
use cookiezeta::levels::LevelTable;
use cookiezeta::multifractal::{delta_alpha_of_xi, spectrum_curve, tau_curve, SpectrumProblem};
use cookiezeta::oracle::BernoulliZeta;
use cookiezeta::thermo::{gibbs_weights, normalize, periodic_sums, pressure, solve_bowen};
use cookiezeta::zeta::{
    abscissa_estimate, growth_exponent_fit, hit_counts, zeta_from_table, ZetaEvaluation,
};
use cookiezeta::{CookieCutterMap, Error, Potential, Word};
use serde_json::{json, Value};

use crate::cache::{self, CacheKey, CacheStatus};
use crate::config::RunConfig;
use crate::table::{recorded_hash, ResultTable};
use crate::{CliError, Paths};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Dim,
    Pressure,
    Tau,
    Spectrum,
    Zeta,
    Growth,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dim => "dim",
            Command::Pressure => "pressure",
            Command::Tau => "tau",
            Command::Spectrum => "spectrum",
            Command::Zeta => "zeta",
            Command::Growth => "growth",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<ResultTable>,
    pub summary: Value,
}

/// Offsets `σ - δ_α` used by `growth` when the config gives none.
pub const DEFAULT_GROWTH_OFFSETS: [f64; 10] =
    [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1];

/// σ bracket searched by the abscissa estimate.
pub const ABSCISSA_BRACKET: (f64, f64) = (0.0, 1.5);

/// Names of the `verify` checks, indexed by the `check` column.
pub const VERIFY_CHECKS: [&str; 9] = [
    "csv_config_hash",
    "pressure_shift",
    "pressure_monotone",
    "bowen_root",
    "gibbs_normalization",
    "variational_inequality",
    "birkhoff_additivity",
    "depth_truncation",
    "zeta_monotonicity",
];

pub fn run(command: Command, config: &RunConfig, paths: &Paths) -> Result<RunOutput, CliError> {
    let map = config.build_map()?;
    let psi = config.build_potential(&map)?;
    match command {
        Command::Dim => dim(config, &map),
        Command::Pressure => pressure_table(config, &map, &psi),
        Command::Tau => tau(config, &map, &psi),
        Command::Spectrum => spectrum(config, &map, &psi),
        Command::Zeta => zeta(config, &map, &psi, paths),
        Command::Growth => growth(config, &map, &psi, paths),
        Command::Verify => verify(config, &map, &psi, paths),
    }
}

fn depth_note(table: &mut ResultTable, config: &RunConfig) {
    table.note("depth", config.depth);
}

fn dim(config: &RunConfig, map: &CookieCutterMap) -> Result<RunOutput, CliError> {
    let mut t = ResultTable::new("dim", &["depth", "delta"]);
    let mut deltas = Vec::new();
    for m in 1..=config.depth {
        let d = solve_bowen(map, m)?;
        deltas.push(d);
        t.push(vec![m as f64, d]);
    }
    depth_note(&mut t, config);
    let last = *deltas.last().unwrap();
    let change = if deltas.len() > 1 {
        (last - deltas[deltas.len() - 2]).abs()
    } else {
        0.0
    };
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "delta": last, "last_depth_change": change }),
    })
}

fn pressure_table(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
) -> Result<RunOutput, CliError> {
    let mut t = ResultTable::new(
        "pressure",
        &[
            "depth",
            "pressure",
            "lambda",
            "residual",
            "truncation_error",
        ],
    );
    let mut last = None;
    for m in 1..=config.depth {
        let p = pressure(map, psi, m)?;
        t.push(vec![
            m as f64,
            p.value,
            p.lambda,
            p.residual,
            p.truncation_error,
        ]);
        last = Some(p);
    }
    depth_note(&mut t, config);
    let p = last.unwrap();
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "pressure": p.value, "effective_depth": p.depth, "truncation_error": p.truncation_error }),
    })
}

/// `ψ - P(ψ)`, so that its equilibrium state is its Gibbs measure with
/// `P = 0`.
fn normalized(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
) -> Result<Potential, CliError> {
    Ok(normalize(map, psi, config.depth)?)
}

fn tau(config: &RunConfig, map: &CookieCutterMap, psi: &Potential) -> Result<RunOutput, CliError> {
    if config.q_grid.is_empty() {
        return Err(CliError::Config("q_grid is required".into()));
    }
    let psi = normalized(config, map, psi)?;
    let levels = if config.tau_levels.is_empty() {
        (config.levels.saturating_sub(4).max(1)..=config.levels).collect()
    } else {
        config.tau_levels.clone()
    };
    let curve = tau_curve(map, &psi, &config.q_grid, &levels, config.depth)?;
    let mut t = ResultTable::new(
        "tau",
        &["q", "tau_pressure", "tau_partition", "duality_sum"],
    );
    for i in 0..curve.q.len() {
        t.push(vec![
            curve.q[i],
            curve.pressure[i],
            curve.partition[i],
            curve.pressure[i] + curve.partition[i],
        ]);
    }
    depth_note(&mut t, config);
    t.note("levels", format!("{levels:?}"));
    let worst = (0..curve.q.len())
        .map(|i| (curve.pressure[i] + curve.partition[i]).abs())
        .fold(0.0, f64::max);
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({ "max_abs_duality_sum": worst, "min_second_difference": curve.min_second_difference() }),
    })
}

fn spectrum(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
) -> Result<RunOutput, CliError> {
    if config.alpha_grid.is_empty() {
        return Err(CliError::Config("alpha_grid is required".into()));
    }
    let psi = normalized(config, map, psi)?;
    let curve = spectrum_curve(map, &psi, &config.alpha_grid, config.depth)?;
    let mut t = ResultTable::new("spectrum", &["alpha", "xi", "delta", "derivative"]);
    let mut failures = Vec::new();
    for (alpha, point) in &curve.points {
        match point {
            Ok(p) => t.push(vec![p.alpha, p.xi, p.delta, p.derivative]),
            Err(e) => failures
                .push(json!({ "alpha": alpha, "error": e.kind(), "message": e.to_string() })),
        }
    }
    depth_note(&mut t, config);
    let bowen = solve_bowen(map, config.depth)?;
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({
            "solved": curve.solved().count(),
            "failures": failures,
            "concave": curve.is_concave(1e-9),
            "max_delta": curve.max().map(|p| p.delta),
            "bowen_delta": bowen,
        }),
    })
}

fn level_table(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
    paths: &Paths,
) -> Result<(LevelTable, CacheStatus), CliError> {
    let key = CacheKey {
        map: &config.map,
        potential: &config.potential,
        depth: config.depth,
        levels: config.levels,
    };
    cache::load_or_build(paths.cache.as_deref(), &key.digest(), || {
        let psi = normalized(config, map, psi)?;
        Ok(LevelTable::build(map, &psi, config.levels, config.depth)?)
    })
}

fn zeta(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
    paths: &Paths,
) -> Result<RunOutput, CliError> {
    let cfg = config.zeta_config()?;
    if config.sigma_grid.is_empty() {
        return Err(CliError::Config("sigma_grid is required".into()));
    }
    let (table, status) = level_table(config, map, psi, paths)?;
    let n = config.levels;
    let mut t = ResultTable::new("zeta", &["sigma", "partial", "tail", "total"]);
    for &sigma in &config.sigma_grid {
        let e = zeta_from_table(&table, &cfg, sigma, n)?;
        t.push(vec![sigma, e.partial, e.tail, e.total()]);
    }
    let hits = hit_counts(&table, &cfg, n)?;
    let mut h = ResultTable::new("zeta_hits", &["level", "hits"]);
    for (i, c) in hits.iter().enumerate() {
        h.push(vec![(i + 1) as f64, *c]);
    }
    for tab in [&mut t, &mut h] {
        depth_note(tab, config);
        tab.note("levels", n);
    }
    let abscissa = abscissa_estimate(
        |s| Ok(zeta_from_table(&table, &cfg, s, n)?.log_terms),
        ABSCISSA_BRACKET,
    );
    let last_hit = hits.iter().rposition(|&c| c > 0.0);
    let regime = if hits[n - 1] == 0.0 {
        "entire"
    } else {
        "divergent"
    };
    let abscissa_json = match abscissa {
        Ok(s) => json!(s),
        Err(Error::NoSignChange { .. }) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(RunOutput {
        tables: vec![t, h],
        summary: json!({
            "regime": regime,
            "last_level_with_hits": last_hit.map(|i| i + 1),
            "abscissa": abscissa_json,
            "layout": format!("{:?}", table.layout()),
            "cache": status,
        }),
    })
}

fn growth(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
    paths: &Paths,
) -> Result<RunOutput, CliError> {
    let cfg = config.zeta_config()?;
    let psi_n = normalized(config, map, psi)?;
    let problem = SpectrumProblem::new(map, &psi_n, config.depth)?;
    let (delta_alpha, condition_a) = match problem.xi_alpha(cfg.alpha) {
        Ok(p) => (p.delta, true),
        Err(Error::ConditionAViolated { .. }) => (
            delta_alpha_of_xi(map, &psi_n, cfg.alpha, 0.0, config.depth)?,
            false,
        ),
        Err(e) => return Err(e.into()),
    };
    let offsets: Vec<f64> = if config.growth_offsets.is_empty() {
        DEFAULT_GROWTH_OFFSETS.to_vec()
    } else {
        config.growth_offsets.clone()
    };
    let sigmas: Vec<f64> = offsets.iter().map(|o| delta_alpha + o).collect();
    let mut evaluations: Vec<ZetaEvaluation> = Vec::new();
    let (fit, source, status) = match (config.cantor_bernoulli(map), config.oracle_levels) {
        (Some(p), Some(levels)) => {
            let oracle = BernoulliZeta::new(p, cfg.alpha, cfg.a, cfg.b, levels)?;
            let hits: Vec<f64> = oracle.log_counts.iter().map(|c| c.exp()).collect();
            let fit = growth_exponent_fit(
                |s| {
                    let e = ZetaEvaluation::from_log_terms(s, oracle.log_terms(s), hits.clone());
                    evaluations.push(e.clone());
                    Ok(e)
                },
                delta_alpha,
                &sigmas,
            )?;
            (fit, "oracle", CacheStatus::Disabled)
        }
        _ => {
            let (table, status) = level_table(config, map, psi, paths)?;
            let fit = growth_exponent_fit(
                |s| {
                    let e = zeta_from_table(&table, &cfg, s, config.levels)?;
                    evaluations.push(e.clone());
                    Ok(e)
                },
                delta_alpha,
                &sigmas,
            )?;
            (fit, "levels", status)
        }
    };
    let mut t = ResultTable::new("growth", &["sigma", "offset", "zeta", "partial", "tail"]);
    for (e, o) in evaluations.iter().zip(&offsets) {
        t.push(vec![e.sigma, *o, e.total(), e.partial, e.tail]);
    }
    depth_note(&mut t, config);
    t.note("source", source);
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({
            "kappa": fit.kappa,
            "c": fit.c,
            "residual": fit.residual,
            "delta_alpha": delta_alpha,
            "condition_a": condition_a,
            "source": source,
            "cache": status,
        }),
    })
}

/// CSVs in `dir` whose recorded hash differs from `hash`.
fn hash_mismatches(dir: &Path, hash: &str) -> Result<(usize, Vec<String>), CliError> {
    let mut checked = 0;
    let mut bad = Vec::new();
    let Ok(entries) = std::fs::read_dir(dir) else {
        return Ok((0, bad));
    };
    let mut names: Vec<_> = entries.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    names.sort();
    for path in names {
        if path.extension().is_none_or(|e| e != "csv")
            || path.file_stem().is_some_and(|s| s == "verify")
        {
            continue;
        }
        let text = std::fs::read_to_string(&path)?;
        checked += 1;
        if recorded_hash(&text) != Some(hash) {
            bad.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    Ok((checked, bad))
}

fn verify(
    config: &RunConfig,
    map: &CookieCutterMap,
    psi: &Potential,
    paths: &Paths,
) -> Result<RunOutput, CliError> {
    let m = config.depth;
    let mut rows: Vec<(f64, f64, bool)> = Vec::new();

    let (checked, bad) = hash_mismatches(&paths.out, &config.hash())?;
    rows.push((bad.len() as f64, 0.0, bad.is_empty()));

    let p = pressure(map, psi, m)?;
    let shifted = pressure(map, &psi.shifted(1.0), m)?.value;
    let e = (shifted - p.value - 1.0).abs();
    rows.push((e, 1e-10, e <= 1e-10));

    let scaled = |s: f64| {
        Potential::combination(
            s,
            Potential::LogDerivative,
            0.0,
            Potential::constant(0.0),
            0.0,
        )
    };
    let gap = pressure(map, &scaled(1.0), m)?.value - pressure(map, &scaled(1.1), m)?.value;
    rows.push((gap, 0.0, gap > 0.0));

    let delta = solve_bowen(map, m)?;
    let root = pressure(map, &scaled(delta), m)?.value.abs();
    rows.push((root, 1e-10, root <= 1e-10));

    let psi_n = normalized(config, map, psi)?;
    let level = config.levels.min(12);
    let defect = gibbs_weights(map, &psi_n, level, m)?.normalization_defect;
    rows.push((defect, 1e-12, defect <= 1e-12));

    let period = config.levels.min(12);
    let excess = periodic_sums(map, &[psi], period)?
        .iter()
        .map(|r| r.sums[0] / r.period() as f64 - p.value)
        .fold(f64::NEG_INFINITY, f64::max);
    rows.push((excess, 1e-8, excess <= 1e-8));

    let combo = Potential::combination(0.7, psi.clone(), -1.3, Potential::LogDerivative, 0.0);
    let n = config.levels.min(6);
    let k = map.k();
    let mut additivity: f64 = 0.0;
    for i in 0..k.pow(n as u32) {
        let w = Word::from_index(i, n, k);
        let lhs = birkhoff_sum(map, &combo, &w)?;
        let rhs = 0.7 * birkhoff_sum(map, psi, &w)?
            - 1.3 * birkhoff_sum(map, &Potential::LogDerivative, &w)?;
        additivity = additivity.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    rows.push((additivity, 1e-12, additivity <= 1e-12));

    rows.push((p.truncation_error, 1e-6, p.truncation_error <= 1e-6));

    let zeta_violations = match config.zeta_config() {
        Ok(cfg) => {
            let (table, _) = level_table(config, map, psi, paths)?;
            let n = config.levels;
            let mut violations = 0usize;
            let mut previous: Option<f64> = None;
            for sigma in [0.5, 0.75, 1.0, 1.25] {
                let e = zeta_from_table(&table, &cfg, sigma, n)?;
                let partials: Vec<f64> = e
                    .terms
                    .iter()
                    .scan(0.0, |acc, t| {
                        *acc += t;
                        Some(*acc)
                    })
                    .collect();
                violations += partials.windows(2).filter(|w| w[1] < w[0]).count();
                if previous.is_some_and(|p| e.partial > p) {
                    violations += 1;
                }
                previous = Some(e.partial);
            }
            Some(violations)
        }
        Err(_) => None,
    };
    let v = zeta_violations.unwrap_or(0);
    rows.push((v as f64, 0.0, v == 0));

    let mut t = ResultTable::new("verify", &["check", "value", "bound", "passed"]);
    for (i, (value, bound, ok)) in rows.iter().enumerate() {
        t.push(vec![i as f64, *value, *bound, if *ok { 1.0 } else { 0.0 }]);
    }
    depth_note(&mut t, config);
    let checks: Vec<Value> = rows
        .iter()
        .zip(VERIFY_CHECKS)
        .map(|((value, bound, ok), name)| json!({ "name": name, "value": value, "bound": bound, "passed": ok }))
        .collect();
    let all = rows.iter().all(|r| r.2);
    Ok(RunOutput {
        tables: vec![t],
        summary: json!({
            "all_passed": all,
            "checks": checks,
            "csv_files_checked": checked,
            "csv_hash_mismatches": bad,
            "zeta_checked": zeta_violations.is_some(),
        }),
    })
}
