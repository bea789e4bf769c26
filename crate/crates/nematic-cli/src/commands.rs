use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;

use nematic::equilibria::{critical_point, eta_of_rho, rho_of_eta, ModelParams};
use nematic::gci::{constant_c_lambda0, gamma_tildes, solve_h, DEFAULT_BASIS};
use nematic::kinetic::{
    free_energy, gci_residual, moments, q_tensor, shear_gradient, simulate_with, Integrator, OrientationState,
    SimConfig,
};
use nematic::leslie::{assemble_leslie, leslie_coefficients, leslie_coefficients_at_eta, LeslieCoefficients};
use nematic::verify::{run_check, Bound, CheckReport, VerifyOptions, CHECK_NAMES};

use crate::config::Settings;
use crate::table::{self, Cell, Format, Table};
use crate::{BranchArgs, CliError, CoeffsArgs, GciArgs, GridArgs, ModelArgs, OutputArgs, SimulateArgs, VerifyArgs};

struct ModelDefaults {
    n: usize,
    alpha: f64,
}

fn model(s: &Settings, m: &ModelArgs, d: ModelDefaults) -> Result<ModelParams, CliError> {
    let p = ModelParams::new(
        s.get(m.n, "n", d.n)?,
        s.get(m.alpha, "alpha", d.alpha)?,
        s.get(m.lambda, "Lambda", 1.0)?,
        s.get(m.zeta, "zeta", 0.5)?,
        s.get(m.beta, "beta", 0.1)?,
    )?;
    Ok(p)
}

struct Output {
    path: Option<std::path::PathBuf>,
    format: Format,
    seed: u64,
}

fn output(s: &Settings, o: &OutputArgs) -> Result<Output, CliError> {
    let path = s.opt(o.out.clone(), "out")?;
    let format = match o.format {
        Some(f) => f,
        None => s
            .opt::<String>(None, "format")?
            .map(|v| v.parse::<Format>().map_err(CliError::Usage))
            .transpose()?
            .unwrap_or(Format::Csv),
    };
    Ok(Output {
        path,
        format,
        seed: s.get(o.seed, "seed", 0)?,
    })
}

/// `points` values log-spaced on `[lo, hi]`.
fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || points == 0 {
        return Err(CliError::Usage(format!(
            "grid needs 0 < min <= max and at least one point (got [{lo}, {hi}], {points} points)"
        )));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

fn eta_grid(s: &Settings, g: &GridArgs, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    log_grid(
        s.get(g.eta_min, "eta-min", lo)?,
        s.get(g.eta_max, "eta-max", hi)?,
        s.get(g.points, "points", points)?,
    )
}

fn with_context<T>(r: nematic::Result<T>, what: String) -> Result<T, CliError> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
        CliError::Numeric(m) => CliError::Numeric(format!("{what}: {m}")),
        other => other,
    })
}

/// Collects row results in grid order and stops at the first failure.
fn gather<T>(rows: Vec<Result<T, CliError>>) -> Result<Vec<T>, CliError> {
    rows.into_iter().collect()
}

const COEFF_COLUMNS: &[&str] = &[
    "n", "alpha", "Lambda", "zeta", "rho", "eta", "S2", "S4", "c", "a1", "a2", "a3", "a4", "a5", "a6", "gamma1", "gamma2",
];
const COEFF_COMMENT: &str = "model parameters (n..zeta) | branch state (rho, eta, S2, S4) | mobility c | Leslie viscosities a1..a6 | rotational viscosities gamma1, gamma2";

fn coeff_row(l: &LeslieCoefficients) -> Vec<Cell> {
    let p = &l.params;
    let mut row = vec![
        Cell::Int(p.n as i64),
        Cell::Real(p.alpha),
        Cell::Real(p.lambda),
        Cell::Real(p.zeta),
        Cell::Real(l.rho),
        Cell::Real(l.eta),
        Cell::Real(l.s2),
        Cell::Real(l.s4),
        Cell::Real(l.c),
    ];
    row.extend(l.alpha.iter().map(|&a| Cell::Real(a)));
    row.push(Cell::Real(l.gamma1));
    row.push(Cell::Real(l.gamma2));
    row
}

/// Parodi defect of a row as it reads back from its CSV text.
fn parodi_from_text(row: &[Cell]) -> f64 {
    let v: Vec<f64> = row[9..15].iter().map(|c| c.csv().parse::<f64>().unwrap_or(f64::NAN)).collect();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    ((v[5] - v[4]) - (v[1] + v[2])).abs() / scale
}

pub fn coeffs(a: &CoeffsArgs, cfg: Option<&Path>) -> Result<(), CliError> {
    let s = Settings::load(cfg, "coeffs")?;
    let p = model(&s, &a.model, ModelDefaults { n: 3, alpha: 10.0 })?;
    let out = output(&s, &a.output)?;
    let isotropic = s.flag(a.isotropic, "isotropic")?;
    let points = s.get(a.grid.points, "points", 21)?;
    let rho_range = (s.opt(a.rho_min, "rho-min")?, s.opt(a.rho_max, "rho-max")?);

    let rows: Vec<Result<LeslieCoefficients, CliError>> = match rho_range {
        (Some(lo), Some(hi)) => {
            if !(lo > 0.0 && hi >= lo) || points == 0 {
                return Err(CliError::Usage(format!("density range [{lo}, {hi}] is invalid")));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| if points == 1 { lo } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
                .collect();
            grid.par_iter()
                .enumerate()
                .map(|(i, &rho)| with_context(leslie_coefficients(&p, rho), format!("row {i} (rho = {rho})")))
                .collect()
        }
        (None, None) => eta_grid(&s, &a.grid, 0.25, 40.0, points)?
            .par_iter()
            .enumerate()
            .map(|(i, &eta)| with_context(leslie_coefficients_at_eta(&p, eta), format!("row {i} (eta = {eta})")))
            .collect(),
        _ => return Err(CliError::Usage("rho-min and rho-max must be given together".into())),
    };
    let mut table = Table::new(COEFF_COMMENT, COEFF_COLUMNS);
    for l in gather(rows)? {
        let l = if isotropic {
            let mut iso = assemble_leslie(&p, l.rho, l.eta, 0.0, 0.0, l.c);
            iso.s2 = 0.0;
            iso.s4 = 0.0;
            iso
        } else {
            l
        };
        table.rows.push(coeff_row(&l));
    }

    let text = match out.format {
        Format::Csv => table.to_csv(),
        Format::Json => table::json_text(&table.to_json()),
    };
    let mut w = table::open(out.path.as_deref())?;
    table::write_all(&mut w, &text)?;
    w.flush().map_err(table::io_error)?;

    let worst = table.rows.iter().map(|r| parodi_from_text(r)).fold(0.0, f64::max);
    if !(worst <= 1e-12) {
        return Err(CliError::Verification(format!("Parodi relation off by {worst:e} in the written rows")));
    }
    Ok(())
}

const BRANCH_COLUMNS: &[&str] = &["n", "alpha", "lambda", "eta", "rho", "stable_flag"];
const BRANCH_COMMENT: &str = "model parameters (n, alpha) | leading Q eigenvalue lambda | branch point (eta, rho) | 1 on the largest-root branch";

pub fn branch(a: &BranchArgs, cfg: Option<&Path>) -> Result<(), CliError> {
    let s = Settings::load(cfg, "branch")?;
    let p = model(&s, &a.model, ModelDefaults { n: 3, alpha: 10.0 })?;
    let out = output(&s, &a.output)?;
    let grid = eta_grid(&s, &a.grid, 0.01, 40.0, 200)?;
    let cp = critical_point(&p)?;
    let nf = p.n as f64;
    let rows: Vec<Result<Vec<Cell>, CliError>> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &eta)| {
            let rho = with_context(rho_of_eta(eta, &p), format!("row {i} (eta = {eta})"))?;
            Ok(vec![
                Cell::Int(p.n as i64),
                Cell::Real(p.alpha),
                Cell::Real((nf - 1.0) * eta / (nf * p.alpha * rho)),
                Cell::Real(eta),
                Cell::Real(rho),
                Cell::Int(i64::from(eta >= cp.eta_star)),
            ])
        })
        .collect();
    let mut table = Table::new(BRANCH_COMMENT, BRANCH_COLUMNS);
    table.rows = gather(rows)?;
    let summary = json!({
        "n": p.n,
        "alpha": p.alpha,
        "rho_star": cp.rho_star,
        "eta_star": cp.eta_star,
        "lambda_star": cp.lambda_star,
    });
    emit_with_summary(&out, a.summary.as_deref(), &s, &table, Summary::Json(summary))
}

enum Summary {
    Json(serde_json::Value),
    Table(Table),
}

fn emit_with_summary(
    out: &Output,
    summary_flag: Option<&Path>,
    s: &Settings,
    table: &Table,
    summary: Summary,
) -> Result<(), CliError> {
    let summary_path = s.opt(summary_flag.map(Path::to_path_buf), "summary")?;
    let (main_text, summary_text, ext) = match (out.format, &summary) {
        (Format::Csv, Summary::Json(v)) => (table.to_csv(), table::json_text(v), "json"),
        (Format::Csv, Summary::Table(t)) => (table.to_csv(), t.to_csv(), "csv"),
        (Format::Json, Summary::Json(v)) => (table::json_text(&table.to_json()), table::json_text(v), "json"),
        (Format::Json, Summary::Table(t)) => (table::json_text(&table.to_json()), table::json_text(&t.to_json()), "json"),
    };
    let summary_path = summary_path.or_else(|| out.path.as_deref().map(|p| table::sidecar(p, ext)));
    let mut w = table::open(out.path.as_deref())?;
    table::write_all(&mut w, &main_text)?;
    match summary_path {
        Some(sp) => {
            w.flush().map_err(table::io_error)?;
            let mut sw = table::open(Some(&sp))?;
            table::write_all(&mut sw, &summary_text)?;
            sw.flush().map_err(table::io_error)?;
        }
        None => {
            table::write_all(&mut w, "\n")?;
            table::write_all(&mut w, &summary_text)?;
        }
    }
    w.flush().map_err(table::io_error)
}

const GCI_COLUMNS: &[&str] = &["n", "eta", "r", "h"];
const GCI_COMMENT: &str = "dimension n | concentration eta | profile h(r) of the generalized collision invariant on [-1, 1]";
const GCI_SUMMARY_COLUMNS: &[&str] = &["n", "eta", "c_over_Lambda", "gamma1t", "gamma2t", "gamma3t", "residual"];
const GCI_SUMMARY_COMMENT: &str = "dimension n | concentration eta | mobility c/Lambda | auxiliary coefficients at the branch density | relative strong residual";

pub fn gci(a: &GciArgs, cfg: Option<&Path>) -> Result<(), CliError> {
    let s = Settings::load(cfg, "gci")?;
    let p = model(&s, &a.model, ModelDefaults { n: 3, alpha: 10.0 })?;
    let out = output(&s, &a.output)?;
    let etas = match s.list(a.eta.clone(), "eta")? {
        Some(v) => v,
        None => eta_grid(&s, &a.grid, 0.5, 20.0, 4)?,
    };
    if let Some(bad) = etas.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(CliError::Usage(format!("eta = {bad} must be positive")));
    }
    let r_points = s.get(a.r_points, "r-points", 41)?;
    if r_points < 2 {
        return Err(CliError::Usage("r-points must be at least 2".into()));
    }
    let basis = s.get(a.basis, "basis", DEFAULT_BASIS)?;
    let n = p.n;

    let results: Vec<Result<(Vec<Vec<Cell>>, Vec<Cell>), CliError>> = etas
        .par_iter()
        .map(|&eta| {
            let ctx = || format!("eta = {eta}");
            let h = with_context(solve_h(eta, n, basis), ctx())?;
            let rho = with_context(rho_of_eta(eta, &p), ctx())?;
            let ct = with_context(constant_c_lambda0(eta, n, &h), ctx())?;
            let gt = with_context(gamma_tildes(eta, n, rho, &h), ctx())?;
            let profile = (0..r_points)
                .map(|j| {
                    // symmetric grid so that r and -r are both sampled exactly
                    let r = (2.0 * j as f64 - (r_points - 1) as f64) / (r_points - 1) as f64;
                    vec![Cell::Int(n as i64), Cell::Real(eta), Cell::Real(r), Cell::Real(h.h(r))]
                })
                .collect();
            let summary = vec![
                Cell::Int(n as i64),
                Cell::Real(eta),
                Cell::Real(ct),
                Cell::Real(gt.gamma1),
                Cell::Real(gt.gamma2),
                Cell::Real(gt.gamma3),
                Cell::Real(h.residual()),
            ];
            Ok((profile, summary))
        })
        .collect();
    let mut table = Table::new(GCI_COMMENT, GCI_COLUMNS);
    let mut summary = Table::new(GCI_SUMMARY_COMMENT, GCI_SUMMARY_COLUMNS);
    for (profile, row) in gather(results)? {
        table.rows.extend(profile);
        summary.rows.push(row);
    }
    emit_with_summary(&out, a.summary.as_deref(), &s, &table, Summary::Table(summary))
}

const SIM_COLUMNS: &[&str] = &[
    "t", "rho", "Qxx", "Qxy", "lambda", "theta", "S2_f", "A0", "dissipation", "gci_residual",
];
const SIM_COMMENT: &str = "time t | density rho | Q-tensor entries | leading eigenvalue and director angle | order parameter 2 lambda | free energy and its dissipation | relative GCI orthogonality residual";

fn sim_row(state: &OrientationState, alpha: f64, positivity_failures: &mut usize) -> Vec<Cell> {
    let q = q_tensor(state);
    let (lambda, theta, s2f, gres) = match moments(state, alpha) {
        Ok(m) => {
            let g = gci_residual(state, alpha).map(|r| r.relative).unwrap_or(f64::NAN);
            (m.lambda, m.theta, m.s2, g)
        }
        Err(_) => (0.0, f64::NAN, 0.0, f64::NAN),
    };
    let (a0, diss) = match free_energy(state, alpha) {
        Ok(fe) => (fe.a0, fe.dissipation),
        Err(_) => {
            *positivity_failures += 1;
            (f64::NAN, f64::NAN)
        }
    };
    vec![
        Cell::Real(state.time()),
        Cell::Real(state.mass()),
        Cell::Real(q[(0, 0)]),
        Cell::Real(q[(0, 1)]),
        Cell::Real(lambda),
        Cell::Real(theta),
        Cell::Real(s2f),
        Cell::Real(a0),
        Cell::Real(diss),
        Cell::Real(gres),
    ]
}

pub fn simulate(a: &SimulateArgs, cfg: Option<&Path>) -> Result<(), CliError> {
    let s = Settings::load(cfg, "simulate")?;
    let p = model(&s, &a.model, ModelDefaults { n: 2, alpha: 8.0 })?;
    if p.n != 2 {
        return Err(CliError::Usage("simulate runs in dimension n = 2".into()));
    }
    let out = output(&s, &a.output)?;
    let eps = s.get(a.eps, "eps", 0.1)?;
    let shear = s.get(a.shear, "shear", 0.0)?;
    let mut config = SimConfig::new(p, eps, shear_gradient(shear))?;
    config.dt = s.get(a.dt, "dt", config.dt)?;
    config.t_max = s.get(a.tmax, "tmax", 1.0)?;
    config.output_interval = s.get(a.interval, "interval", config.t_max / 100.0)?;
    config.integrator = match s.get(a.integrator.clone(), "integrator", "etd2".to_string())?.as_str() {
        "etd2" => Integrator::Etd2,
        "etd4" => Integrator::Etd4,
        other => return Err(CliError::Usage(format!("unknown integrator {other:?} (expected etd2 or etd4)"))),
    };
    config.validate()?;
    let order = s.get(a.k, "K", 32)?;
    if order == 0 {
        return Err(CliError::Usage("K must be positive".into()));
    }
    let rho = s.get(a.rho, "rho", 1.0)?;
    let initial = match s.get(a.init.clone(), "init", "random".to_string())?.as_str() {
        "random" => OrientationState::random(rho, order, out.seed)?,
        "uniform" => OrientationState::uniform(rho, order)?,
        "gibbs" => {
            let eta = eta_of_rho(rho, &p)?;
            OrientationState::gibbs(rho, eta, s.get(a.theta0, "theta0", 0.0)?, order)?
        }
        other => return Err(CliError::Usage(format!("unknown initial state {other:?}"))),
    };

    let mut w = table::open(out.path.as_deref())?;
    let mut rows = Vec::new();
    let mut write_error = None;
    let mut last_t = f64::NAN;
    let mut failures = 0usize;
    if out.format == Format::Csv {
        table::write_all(&mut w, &Table::csv_header(SIM_COMMENT, SIM_COLUMNS))?;
    }
    let run = simulate_with(&initial, &config, |state| {
        let row = sim_row(state, p.alpha, &mut failures);
        last_t = state.time();
        match out.format {
            Format::Csv => {
                if let Err(e) = w.write_all(Table::csv_row(&row).as_bytes()) {
                    write_error = Some(e);
                    return Err(nematic::Error::Integrator {
                        t: state.time(),
                        reason: "output write failed".into(),
                    });
                }
            }
            Format::Json => rows.push(row),
        }
        Ok(())
    });
    if let Some(e) = write_error {
        return Err(table::io_error(e));
    }
    if out.format == Format::Json {
        let mut t = Table::new(SIM_COMMENT, SIM_COLUMNS);
        t.rows = rows;
        table::write_all(&mut w, &table::json_text(&t.to_json()))?;
    }
    w.flush().map_err(table::io_error)?;
    if failures > 0 {
        eprintln!("nematic: warning: density was not positive at {failures} output times (A0 and dissipation written as nan)");
    }
    match run {
        Ok(_) => Ok(()),
        Err(e) => Err(CliError::Numeric(format!("{e} (last good output at t = {last_t})"))),
    }
}

fn report_json(r: &CheckReport) -> serde_json::Value {
    let items: Vec<_> = r
        .items
        .iter()
        .map(|m| {
            json!({
                "label": m.label,
                "measured": if m.measured.is_finite() { json!(m.measured) } else { json!(m.measured.to_string()) },
                "tolerance": m.tolerance,
                "bound": match m.bound { Bound::AtMost => "at_most", Bound::AtLeast => "at_least" },
                "passed": m.passed,
                "informational": m.informational,
            })
        })
        .collect();
    json!({
        "id": r.id,
        "name": r.name,
        "passed": r.passed(),
        "seconds": r.seconds,
        "error": r.error,
        "items": items,
    })
}

pub fn verify(a: &VerifyArgs, cfg: Option<&Path>) -> Result<(), CliError> {
    let s = Settings::load(cfg, "verify")?;
    let out = output(&s, &a.output)?;
    if out.format != Format::Json {
        if a.output.format.is_some() || s.opt::<String>(None, "format")?.is_some() {
            return Err(CliError::Usage("verify writes JSON only".into()));
        }
    }
    let opts = VerifyOptions {
        seed: s.get(a.output.seed, "seed", VerifyOptions::default().seed)?,
        parodi_perturbation: s.get(a.parodi_perturbation, "parodi-perturbation", 0.0)?,
    };
    let reports: Vec<CheckReport> = (1..=CHECK_NAMES.len())
        .into_par_iter()
        .map(|id| run_check(id, &opts))
        .collect();
    let passed = reports.iter().all(CheckReport::passed);
    let doc = json!({
        "passed": passed,
        "seed": opts.seed,
        "parodi_perturbation": opts.parodi_perturbation,
        "checks": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    let mut w = table::open(out.path.as_deref())?;
    table::write_all(&mut w, &table::json_text(&doc))?;
    w.flush().map_err(table::io_error)?;
    for r in &reports {
        eprintln!(
            "check {:>2} {:<42} {} ({:.1}s)",
            r.id,
            r.name,
            if r.passed() { "pass" } else { "FAIL" },
            r.seconds
        );
    }
    if passed {
        Ok(())
    } else {
        let failed: Vec<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.id.to_string()).collect();
        Err(CliError::Verification(format!("checks {} failed", failed.join(", "))))
    }
}
