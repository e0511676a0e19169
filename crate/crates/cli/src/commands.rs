use std::path::PathBuf;

use chronos_core::oracle::{covariance_error, max_shift, run_suite};
use chronos_core::{
    amplitudes, build_operators, mean_and_variance, povm_element, sigma, TimeDistribution, TimeQuadrature,
};
use serde::Serialize;

use crate::config::{MatrixFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{create_dir, write_json, OutFile};

/// Largest grid for which `povm-matrix` writes the dense `2n × 2n` matrix.
pub const MAX_MATRIX_SAMPLES: usize = 1024;

/// Covariance tolerance used by `covariance-scan`.
pub const COVARIANCE_TOLERANCE: f64 = 1e-8;

#[derive(Serialize)]
struct DistributionSummary {
    total_mass: f64,
    mean: f64,
    variance: f64,
    #[serde(rename = "sigma_T")]
    sigma_t: f64,
    #[serde(rename = "sigma_H")]
    sigma_h: f64,
    uncertainty_product: f64,
}

pub fn distribution(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let tg = cfg.time_grid()?;
    let phi = cfg.state(&grid)?;
    let amps = amplitudes(&phi, &tg);
    let dist = TimeDistribution::from_amplitudes(&amps);
    let moments = mean_and_variance(&dist)?;
    let ops = build_operators(&grid);
    let sigma_t = sigma(&ops.t_mat, &phi)?;
    let sigma_h = sigma(&ops.h_mat, &phi)?;

    create_dir(&cfg.out_dir)?;
    let mut csv = OutFile::create(&cfg.out_dir, "distribution.csv")?;
    csv.line("t,rho,re_a_plus,im_a_plus,re_a_minus,im_a_minus")?;
    for (j, &t) in tg.samples().iter().enumerate() {
        let (ap, am) = (amps.a_plus[j], amps.a_minus[j]);
        csv.row([t, dist.density[j], ap.re, ap.im, am.re, am.im])?;
    }
    let summary = DistributionSummary {
        total_mass: dist.total_mass,
        mean: moments.mean,
        variance: moments.variance,
        sigma_t,
        sigma_h,
        uncertainty_product: sigma_t * sigma_h,
    };
    Ok(vec![csv.finish()?, write_json(&cfg.out_dir, "distribution.json", &summary)?])
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    name: &'a str,
    value: f64,
    tolerance: f64,
    bound: &'static str,
    passed: bool,
    context: &'a str,
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    all_passed: bool,
    seed: u64,
    checks: Vec<CheckRecord<'a>>,
}

/// Writes the report, then fails with exit code 3 if any check failed.
pub fn verify(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let report = run_suite(&cfg.suite()?)?;
    let record = ReportRecord {
        all_passed: report.all_passed(),
        seed: cfg.seed,
        checks: report
            .checks
            .iter()
            .map(|c| CheckRecord {
                name: &c.name,
                value: c.value,
                tolerance: c.tolerance,
                bound: c.bound.name(),
                passed: c.passed,
                context: &c.context,
            })
            .collect(),
    };
    create_dir(&cfg.out_dir)?;
    let path = write_json(&cfg.out_dir, "verification.json", &record)?;
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(vec![path])
    } else {
        Err(CliError::Verification(format!(
            "{} check(s) failed: {} (report in {})",
            failed.len(),
            failed.join(", "),
            path.display()
        )))
    }
}

#[derive(Serialize)]
struct MatrixHeader {
    p_min: f64,
    p_max: f64,
    n: usize,
    a: f64,
    b: f64,
    dim: usize,
    quadrature: String,
    layout: &'static str,
}

#[derive(Serialize)]
struct MatrixDocument {
    #[serde(flatten)]
    header: MatrixHeader,
    data: Vec<f64>,
}

pub fn povm_matrix(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let x = cfg.interval()?;
    if cfg.n > MAX_MATRIX_SAMPLES {
        return Err(CliError::Validation(format!(
            "povm-matrix writes a dense matrix; n = {} exceeds {MAX_MATRIX_SAMPLES}",
            cfg.n
        )));
    }
    let grid = cfg.grid()?;
    let element = povm_element(&x, &grid, cfg.quadrature)?;
    let quadrature = match (cfg.quadrature, element.time_nodes()) {
        (TimeQuadrature::Exact, _) => "exact".to_string(),
        (_, Some(nodes)) => format!("trapezoid:{}", nodes.len()),
        (_, None) => unreachable!("trapezoid rules always record their nodes"),
    };
    let matrix = element.matrix();
    let eigenvalues = matrix.eigenvalues()?;
    let dim = matrix.dim();
    let header = MatrixHeader {
        p_min: cfg.p_min,
        p_max: cfg.p_max,
        n: cfg.n,
        a: cfg.a,
        b: cfg.b,
        dim,
        quadrature,
        layout: "row-major, interleaved re,im",
    };

    create_dir(&cfg.out_dir)?;
    let entries = matrix.to_dense();
    let matrix_path = match cfg.format {
        MatrixFormat::Csv => {
            let mut out = OutFile::create(&cfg.out_dir, "povm_matrix.csv")?;
            out.line(&format!("# {}", crate::output::to_json(&header)))?;
            for row in entries.chunks(dim) {
                out.row(row.iter().flat_map(|z| [z.re, z.im]))?;
            }
            out.finish()?
        }
        MatrixFormat::Json => {
            let data = entries.iter().flat_map(|z| [z.re, z.im]).collect();
            write_json(&cfg.out_dir, "povm_matrix.json", &MatrixDocument { header, data })?
        }
    };
    let mut eig = OutFile::create(&cfg.out_dir, "povm_eigenvalues.csv")?;
    eig.line("index,eigenvalue")?;
    for (i, mu) in eigenvalues.iter().enumerate() {
        eig.line(&format!("{i},{}", crate::output::fmt17(*mu)))?;
    }
    Ok(vec![matrix_path, eig.finish()?])
}

/// Writes the scan, then fails with exit code 3 if any shift misses the tolerance.
pub fn covariance_scan(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    if cfg.k_min > cfg.k_max {
        return Err(CliError::Validation(format!("k_min = {} exceeds k_max = {}", cfg.k_min, cfg.k_max)));
    }
    let grid = cfg.grid()?;
    let tg = cfg.time_grid()?;
    let margin = max_shift(&tg) as i64;
    if cfg.k_min < -margin || cfg.k_max > margin {
        return Err(CliError::Validation(format!(
            "time window truncates the shifted density: shifts must satisfy |k| <= {margin}, got [{}, {}]",
            cfg.k_min, cfg.k_max
        )));
    }
    let phi = cfg.state(&grid)?;
    let base = chronos_core::time_distribution(&phi, &tg);

    create_dir(&cfg.out_dir)?;
    let mut csv = OutFile::create(&cfg.out_dir, "covariance_scan.csv")?;
    csv.line("lambda,max_abs_error")?;
    let mut worst = (0i64, 0.0f64);
    for k in cfg.k_min..=cfg.k_max {
        let err = covariance_error(&base, &phi, k)?;
        if err > worst.1 {
            worst = (k, err);
        }
        csv.row([k as f64 * tg.dt(), err])?;
    }
    let path = csv.finish()?;
    if worst.1 < COVARIANCE_TOLERANCE {
        Ok(vec![path])
    } else {
        Err(CliError::Verification(format!(
            "covariance error {:.3e} at k = {} exceeds {COVARIANCE_TOLERANCE:e} (scan in {})",
            worst.1,
            worst.0,
            path.display()
        )))
    }
}
