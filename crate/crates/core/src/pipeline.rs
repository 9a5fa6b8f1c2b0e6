//! Subcommand drivers: each reads a [`RunConfig`], writes its files into the
//! output directory and returns the process exit code.
//!
//! Tabular outputs are CSV, or with `format = json` an object
//! `{"columns": [...], "rows": [[...], ...]}` holding the same table.
//! Reports are always JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::boundary_control::{control_to_kernel, fdtd_oracle_with, support_report, SupportReport, WaveSystem};
use crate::config::{OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::grid::fmt_f64;
use crate::model_operator::{assemble_coefficients, recover_potential, ModelCoefficients, RecoveryReport};
use crate::sl_solver::{check_lower_bound, dirichlet_eigensystem, kernel_basis};
use crate::verify::run_suite;
use crate::wave_model::GaugeData;

/// Exit code when every verification check passes, or a command succeeds.
pub const EXIT_OK: i32 = 0;
/// Exit code when a verification check fails.
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Files written by a command and its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

struct Writer {
    dir: PathBuf,
    format: OutputFormat,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(cfg: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.output.dir)?;
        Ok(Self { dir: cfg.output.dir.clone(), format: cfg.output.format, files: Vec::new() })
    }

    /// Writes a table produced as CSV by `fill`.
    fn table(&mut self, stem: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        match self.format {
            OutputFormat::Csv => self.raw(&format!("{stem}.csv"), &buf),
            OutputFormat::Json => {
                let json = csv_to_json(&buf)?;
                self.raw(&format!("{stem}.json"), json.as_bytes())
            }
        }
    }

    fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.raw(name, text.as_bytes())
    }

    fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, exit_code: i32) -> Outcome {
        Outcome { files: self.files, exit_code }
    }
}

#[derive(Serialize)]
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn csv_to_json(bytes: &[u8]) -> Result<String> {
    let mut r = csv::Reader::from_reader(bytes);
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let row = rec?
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Internal(format!("non-numeric table cell {s:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let mut text = serde_json::to_string(&Table { columns, rows })?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct EigsSummary {
    l: f64,
    grid_n: usize,
    modes: usize,
    kappa: Option<f64>,
}

/// `eigenvalues`, `eigenfunctions` (first `numerics.eigenfunctions` modes)
/// and `eigs_summary.json` with `κ = λ_1`. A non-positive `λ_1` is reported
/// after the tables are written.
pub fn run_eigs(cfg: &RunConfig) -> Result<Outcome> {
    let q = cfg.potential()?;
    let es = dirichlet_eigensystem(&q, cfg.numerics.modes)?;
    let mut w = Writer::new(cfg)?;
    w.table("eigenvalues", |buf| es.write_eigenvalues_csv(buf))?;
    let k = cfg.numerics.eigenfunctions.min(es.len());
    w.table("eigenfunctions", |buf| {
        let mut cw = csv::Writer::from_writer(buf);
        let mut header = vec!["x".to_string()];
        header.extend((1..=k).map(|i| format!("phi_{i}")));
        cw.write_record(&header)?;
        for j in 0..es.grid().len() {
            let mut row = vec![fmt_f64(es.grid().x(j))];
            row.extend((0..k).map(|i| fmt_f64(es.function_samples(i)[j])));
            cw.write_record(&row)?;
        }
        cw.flush()?;
        Ok(())
    })?;
    let kappa = check_lower_bound(&es);
    w.report(
        "eigs_summary.json",
        &EigsSummary {
            l: cfg.problem.l,
            grid_n: cfg.problem.grid_n,
            modes: es.len(),
            kappa: kappa.as_ref().ok().copied(),
        },
    )?;
    kappa?;
    Ok(w.finish(EXIT_OK))
}

#[derive(Serialize)]
struct OracleAgreement {
    cfl: f64,
    times: Vec<f64>,
    l2_diff: Vec<f64>,
    max_l2_diff: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SimulateReport {
    horizon: f64,
    support: Vec<SupportReport>,
    oracle: OracleAgreement,
}

/// Spectral `u^h` at `frames + 1` equally spaced times on `[0, horizon]`,
/// its support reports for `t <= l/2` and the leapfrog agreement.
pub fn run_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let q = cfg.potential()?;
    let c = cfg.control()?;
    let n = &cfg.numerics;
    let fdtd = fdtd_oracle_with(&c, n.horizon, &q, n.cfl, n.frames)?;
    let sys = WaveSystem::build(&q, n.modes)?.with_method(n.wave_method);
    let h = control_to_kernel(&c, sys.kernel_basis());
    let mut frames = Vec::with_capacity(fdtd.times().len());
    let mut support = Vec::new();
    let mut l2_diff = Vec::new();
    for (t, oracle) in fdtd.times().iter().zip(fdtd.frames()) {
        let u = sys.smooth_wave(&h, *t)?;
        if *t > 0.0 && *t <= 0.5 * cfg.problem.l {
            support.push(support_report(&u, *t, cfg.tolerances.support)?);
        }
        l2_diff.push((&u - oracle).norm());
        frames.push(u);
    }
    let field = crate::boundary_control::WaveField::new(sys.grid(), fdtd.times().to_vec(), frames)?;
    let max_l2_diff = l2_diff.iter().copied().fold(0.0, f64::max);
    let mut w = Writer::new(cfg)?;
    w.table("field", |buf| field.write_csv(buf))?;
    w.report(
        "simulate_report.json",
        &SimulateReport {
            horizon: n.horizon,
            support,
            oracle: OracleAgreement {
                cfl: n.cfl,
                times: fdtd.times().to_vec(),
                l2_diff,
                max_l2_diff,
                tolerance: cfg.tolerances.fdtd_l2,
                pass: max_l2_diff <= cfg.tolerances.fdtd_l2,
            },
        },
    )?;
    Ok(w.finish(EXIT_OK))
}

fn gauge(cfg: &RunConfig) -> Result<(crate::potential::Potential, GaugeData)> {
    let q = cfg.potential()?;
    let kb = kernel_basis(&q)?;
    let mut gd = GaugeData::new(&q, &kb, &cfg.gauge.spec()?)?;
    if let Some(eps) = cfg.numerics.fault_perturb_t {
        gd = gd.with_perturbed_transform(eps);
    }
    Ok((q, gd))
}

/// `gauge` (`x`, `T`, `G`, `ρ`, `G - ρTT*` residual) and `coefficients`
/// (`x`, `P̂`, `Q̂`, `P̂'`, `q(x)`, `q(l-x)`) on the admissible half grid.
pub fn run_model(cfg: &RunConfig) -> Result<Outcome> {
    let (q, gd) = gauge(cfg)?;
    let mc = assemble_coefficients(&gd, &q)?;
    let mut w = Writer::new(cfg)?;
    w.table("gauge", |buf| gd.write_csv(buf))?;
    w.table("coefficients", |buf| mc.write_csv(buf))?;
    Ok(w.finish(EXIT_OK))
}

#[derive(Serialize)]
struct Comparison {
    reference: String,
    interval: [f64; 2],
    max_error: f64,
}

#[derive(Serialize)]
struct RecoverOutput<'a> {
    #[serde(flatten)]
    report: &'a RecoveryReport,
    comparison: Comparison,
}

/// Branches of the recovered potential from `problem.coefficients_file`, or
/// from coefficients assembled for the configured potential. The configured
/// potential also serves as the reference for the error on `[3h, l/2 - 3h]`.
pub fn run_recover(cfg: &RunConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let q = cfg.potential()?;
    let mc = match &cfg.problem.coefficients_file {
        Some(path) => {
            let file = fs::File::open(path)
                .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
            ModelCoefficients::read_csv(file, grid)?
        }
        None => {
            let (q, gd) = gauge(cfg)?;
            assemble_coefficients(&gd, &q)?
        }
    };
    let report = recover_potential(&mc, cfg.numerics.recovery_path, cfg.tolerances.collision)?;
    let (a, b) = (3.0 * grid.h(), 0.5 * grid.l() - 3.0 * grid.h());
    let comparison = Comparison {
        reference: match &cfg.problem.potential_file {
            Some(p) => p.display().to_string(),
            None => cfg.problem.potential.clone(),
        },
        interval: [a, b],
        max_error: report.max_error(|x| q.eval(x), grid.l(), a, b),
    };
    let mut w = Writer::new(cfg)?;
    w.table("branches", |buf| report.write_csv(buf))?;
    w.report("recovery.json", &RecoverOutput { report: &report, comparison })?;
    Ok(w.finish(EXIT_OK))
}

/// Writes `verification.json`; exit code 4 when any check fails.
pub fn run_verify(cfg: &RunConfig) -> Result<Outcome> {
    let report = run_suite(cfg)?;
    let mut w = Writer::new(cfg)?;
    let mut text = report.to_json()?;
    text.push('\n');
    w.raw("verification.json", text.as_bytes())?;
    Ok(w.finish(if report.all_pass() { EXIT_OK } else { EXIT_VERIFY_FAILED }))
}

/// Exit code for a command result.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code,
        Err(e) => e.exit_code(),
    }
}

/// Path of a named output file.
pub fn output_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.output.dir).join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path, extra: &str) -> RunConfig {
        let mut c = RunConfig::from_toml(extra).unwrap();
        c.output.dir = dir.to_path_buf();
        c
    }

    #[test]
    fn eigs_for_free_string_on_pi() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path(), "[problem]\nl = 3.141592653589793\ngrid_n = 400\n[numerics]\nmodes = 4");
        let out = run_eigs(&c).unwrap();
        assert_eq!(out.exit_code, 0);
        let text = fs::read_to_string(output_path(&c, "eigenvalues.csv")).unwrap();
        let lams: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        for (k, lam) in lams.iter().enumerate() {
            assert!((lam - ((k + 1) * (k + 1)) as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn eigs_rejects_negative_potential() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path(), "[problem]\ngrid_n = 200\npotential = \"-15\"\n[numerics]\nmodes = 2");
        let r = run_eigs(&c);
        assert!(matches!(r, Err(Error::NotAdmissible(_))));
        assert_eq!(exit_code(&r), 3);
    }

    #[test]
    fn json_tables() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(dir.path(), "[problem]\ngrid_n = 100\n[output]\nformat = \"json\"");
        run_model(&c).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(output_path(&c, "coefficients.json")).unwrap()).unwrap();
        assert_eq!(v["columns"][1], "re(P11)");
        assert_eq!(v["rows"].as_array().unwrap().len(), 48);
    }
}
