use std::f64::consts::PI;

use qphase::oracle::numerov_eigenvalue;
use qphase::qlm::{amplitude_derivative, milne_residual};
use qphase::semiclassical::{airy_quantize, airy_uniform_phase, dunham_quantize, wkb_quantize, Contour};
use qphase::spectrum::{eigenvalue, oscillation_number_sweep, solve_phase, SpectrumTable};
use qphase::{Error, SymmetricPotential};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, Method, Resolved};
use crate::output::{Cell, Document};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(e) if !is_input_error(e) => 3,
            _ => 2,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let kind = match self {
            CliError::Solver(e) if !is_input_error(e) => "solver",
            _ => "config",
        };
        json!({ "error": kind, "message": self.to_string() }).to_string()
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(e, Error::InvalidPotential(_) | Error::InvalidArgument(_) | Error::NonPositiveEnergy(_))
}

/// Level `n` by a single method.
fn level(cfg: &Resolved, method: Method, n: usize) -> qphase::Result<f64> {
    let v = &cfg.potential;
    match method {
        Method::Qlm => eigenvalue(v, n, eigen_tol(cfg), &cfg.settings),
        Method::Wkb => wkb_quantize(v, n),
        Method::Dunham => dunham_quantize(v, n, cfg.kmax, cfg.terminant.into(), &Contour::default()),
        Method::Airy => airy_quantize(v, n),
        Method::Oracle => numerov_eigenvalue(v, n),
    }
}

fn eigen_tol(cfg: &Resolved) -> f64 {
    (10.0 * cfg.settings.tol).max(1e-13)
}

#[derive(Serialize)]
struct LevelRecord {
    n: usize,
    #[serde(rename = "E")]
    energy: f64,
}

pub fn quantize(cfg: &Resolved) -> Result<Document, CliError> {
    let energies = cfg
        .levels
        .par_iter()
        .map(|&n| level(cfg, cfg.method, n))
        .collect::<qphase::Result<Vec<f64>>>()?;
    let mut doc = Document::with_columns(&["n", "E"]);
    doc.meta("method", format!("{:?}", cfg.method).to_lowercase());
    let records: Vec<LevelRecord> = cfg.levels.iter().zip(&energies).map(|(&n, &energy)| LevelRecord { n, energy }).collect();
    for r in &records {
        doc.rows.push(vec![r.n.into(), r.energy.into()]);
    }
    doc.field("method", cfg.method);
    doc.field("eigenvalues", records);
    Ok(doc)
}

pub fn phase(cfg: &Resolved) -> Result<Document, CliError> {
    let v = &cfg.potential;
    let energy = cfg
        .energy
        .ok_or_else(|| ConfigError::Invalid("phase needs --energy".into()))?;
    let sol = solve_phase(v, energy, &cfg.settings, None)?;
    let ntilde = sol.oscillation_number()?;
    let residual = milne_residual(&sol, v);

    let mut columns = vec!["x", "sigma", "dsigma", "alpha", "re_M", "im_M"];
    let mut data: Vec<Vec<f64>> = vec![
        sol.grid.clone(),
        sol.sigma.clone(),
        sol.dsigma.clone(),
        sol.alpha.clone(),
        sol.field.values.iter().map(|m| m.re).collect(),
        sol.field.values.iter().map(|m| m.im).collect(),
    ];
    if cfg.with_semiclassical {
        let (s, ds) = first_order_phase(v, energy, &sol.grid)?;
        let airy = airy_uniform_phase(v, energy, &sol.grid)?;
        columns.extend(["sigma_wkb", "dsigma_wkb", "sigma_airy", "dsigma_airy"]);
        data.extend([s, ds, airy.sigma_sc, airy.dsigma_sc]);
    }
    let mut rows = sol.grid.len();
    if cfg.alpha_derivatives {
        // stencils about 0.01 wide
        let h = sol.grid[1] - sol.grid[0];
        let stride = ((0.01 / h).round() as usize).max(1);
        let d5 = amplitude_derivative(&sol, 5, stride)?;
        let d6 = amplitude_derivative(&sol, 6, stride)?;
        rows = d5.len().min(d6.len());
        columns.extend(["d5_alpha", "d6_alpha"]);
        data.push(d5.iter().map(|p| p.1).collect());
        data.push(d6.iter().map(|p| p.1).collect());
    }

    let mut doc = Document::with_columns(&columns);
    for i in 0..rows {
        doc.rows.push(data.iter().map(|c| Cell::Num(c[i])).collect());
    }
    doc.meta("energy", format!("{energy:.16e}"));
    doc.meta("bc", format!("{:.16e}", sol.bc.value));
    doc.meta("oscillation_number", format!("{ntilde:.16e}"));
    doc.meta("iterations", sol.iterations);
    doc.meta("milne_residual", format!("{residual:.3e}"));
    doc.field("energy", energy);
    doc.field("bc", &sol.bc);
    doc.field("oscillation_number", ntilde);
    doc.field("iterations", sol.iterations);
    doc.field("update_norms", &sol.update_norms);
    doc.field("milne_residual", residual);
    let table: serde_json::Map<String, serde_json::Value> = columns
        .iter()
        .zip(&data)
        .map(|(c, d)| (c.to_string(), json!(&d[..rows])))
        .collect();
    doc.field("columns", table);
    Ok(doc)
}

/// `S(x)/hbar + pi/4` with `S` measured from the left turning point, frozen
/// at its turning-point value beyond `t2`, and `p/hbar` (zero beyond `t2`).
fn first_order_phase(v: &SymmetricPotential, energy: f64, grid: &[f64]) -> qphase::Result<(Vec<f64>, Vec<f64>)> {
    let t2 = v.turning_point(energy)?.t2;
    let at_t2 = v.action_difference(energy)? / v.hbar() + PI / 4.0;
    let mut s = Vec::with_capacity(grid.len());
    let mut ds = Vec::with_capacity(grid.len());
    for &x in grid {
        if x < t2 {
            s.push(v.classical_action(energy, x)? / v.hbar() + PI / 4.0);
            ds.push(v.momentum_sq(energy, x).max(0.0).sqrt() / v.hbar());
        } else {
            s.push(at_t2);
            ds.push(0.0);
        }
    }
    Ok((s, ds))
}

pub fn sweep(cfg: &Resolved) -> Result<Document, CliError> {
    let (emin, emax) = match (cfg.emin, cfg.emax) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(ConfigError::Invalid("sweep needs --emin and --emax".into()).into()),
    };
    let family: Vec<(Option<f64>, SymmetricPotential)> = match &cfg.lambdas {
        Some(ls) => ls
            .iter()
            .map(|&l| {
                let v = SymmetricPotential::decadic(l)?.with_hbar(cfg.hbar)?;
                Ok((Some(l), v))
            })
            .collect::<qphase::Result<_>>()?,
        None => vec![(None, cfg.potential.clone())],
    };
    let mut tables: Vec<SpectrumTable> = Vec::new();
    for (lambda, v) in &family {
        let mut t = oscillation_number_sweep(v, emin, emax, cfg.samples, &cfg.settings, cfg.mode.into())?;
        t.lambda = *lambda;
        if cfg.with_semiclassical {
            t = t.with_semiclassical(v)?;
        }
        tables.push(t);
    }

    let mut columns = vec!["E", "ntilde"];
    if cfg.lambdas.is_some() {
        columns.insert(0, "lambda");
    }
    if cfg.with_semiclassical {
        columns.push("nsc");
    }
    let mut doc = Document::with_columns(&columns);
    for t in &tables {
        for l in &t.eigenvalues {
            let tag = t.lambda.map_or(String::new(), |x| format!(" lambda={x}"));
            doc.meta("eigenvalue", format!("n={}{tag} E={:.16e}", l.n, l.energy));
        }
        for f in &t.diagnostics.failed {
            doc.meta("failed", format!("E={:.16e} {}", f.energy, f.error));
        }
        for i in 0..t.energies.len() {
            let mut row: Vec<Cell> = Vec::new();
            if let Some(l) = t.lambda {
                row.push(l.into());
            }
            row.push(t.energies[i].into());
            row.push(t.ntilde[i].into());
            if let Some(nsc) = &t.nsc {
                row.push(nsc[i].into());
            }
            doc.rows.push(row);
        }
    }
    doc.field("tables", &tables);
    Ok(doc)
}

pub fn oracle(cfg: &Resolved) -> Result<Document, CliError> {
    let v = &cfg.potential;
    let levels = cfg
        .levels
        .par_iter()
        .map(|&n| numerov_eigenvalue(v, n))
        .collect::<qphase::Result<Vec<f64>>>()?;
    // closed form when the well is purely quadratic
    let omega = match (v.harmonic_coefficient(), v.max_power()) {
        (Some(c), 2) => Some((2.0 * c).sqrt()),
        _ => None,
    };
    let mut doc = Document::with_columns(&["n", "E", "exact"]);
    let mut records = Vec::new();
    for (&n, &e) in cfg.levels.iter().zip(&levels) {
        let exact = omega.map(|w| v.hbar() * w * (n as f64 + 0.5));
        doc.rows.push(vec![n.into(), e.into(), exact.into()]);
        records.push(json!({ "n": n, "E": e, "exact": exact }));
    }
    doc.field("eigenvalues", records);
    Ok(doc)
}

pub fn compare(cfg: &Resolved) -> Result<Document, CliError> {
    const METHODS: [(Method, &str); 5] = [
        (Method::Wkb, "wkb"),
        (Method::Airy, "airy"),
        (Method::Dunham, "dunham"),
        (Method::Qlm, "qlm"),
        (Method::Oracle, "oracle"),
    ];
    let results: Vec<Vec<qphase::Result<f64>>> = cfg
        .levels
        .par_iter()
        .map(|&n| METHODS.iter().map(|(m, _)| level(cfg, *m, n)).collect())
        .collect();
    let mut columns = vec!["n"];
    columns.extend(METHODS.iter().map(|(_, name)| *name));
    let mut doc = Document::with_columns(&columns);
    let mut records = Vec::new();
    for (&n, row) in cfg.levels.iter().zip(&results) {
        let mut cells = vec![Cell::Int(n)];
        let mut record = serde_json::Map::new();
        record.insert("n".into(), json!(n));
        for ((_, name), r) in METHODS.iter().zip(row) {
            match r {
                Ok(e) => {
                    cells.push(Cell::Num(*e));
                    record.insert(name.to_string(), json!(e));
                }
                Err(err) => {
                    cells.push(Cell::Empty);
                    record.insert(name.to_string(), json!(null));
                    doc.meta.push(("failed".into(), format!("n={n} {name}: {err}")));
                    record.insert(format!("{name}_error"), json!(err.to_string()));
                }
            }
        }
        doc.rows.push(cells);
        records.push(serde_json::Value::Object(record));
    }
    doc.field("levels", records);
    Ok(doc)
}
