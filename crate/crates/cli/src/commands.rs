//! Subcommand implementations. Every output is a pure function of the
//! resolved configuration; sidecars embed that configuration so artifacts
//! can be reproduced from them alone.

use crate::config::{ExperimentConfig, OutputFormat, SimulateMode, SpectralMode};
use aggfield::analysis::{
    estimate_memory, mean_periodogram, radial_average, MemoryReport,
};
use aggfield::battery::run_battery;
use aggfield::field::{
    aggregate_field, simulate_ar_field, synthesize_limit_from_grid, FieldRealization, LatticeSpec,
};
use aggfield::io::{self, GridKind, GridSidecar};
use aggfield::spectral::{Frequency, SpectralModel};
use aggfield::theta::ThetaLaw;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Failure modes mapped to exit codes: validation problems exit 2,
/// verification/analysis failures exit 1.
#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Analysis(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 2,
            CmdError::Analysis(_) => 1,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Validation(m) => write!(f, "error: {m}"),
            CmdError::Analysis(m) => write!(f, "analysis failure: {m}"),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> CmdError {
    CmdError::Validation(format!("{e}"))
}

fn resolved_config_json(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn build_model(cfg: &ExperimentConfig) -> Result<(ThetaLaw, SpectralModel), CmdError> {
    let law = cfg
        .build_law()
        .map_err(|e| CmdError::Validation(e.to_string()))?;
    let model = SpectralModel::new(law.clone(), cfg.sigma2_eps)
        .map_err(|e| CmdError::Validation(e.to_string()))?;
    Ok((law, model))
}

/// `spectral`: tabulate `f` on the lattice's Fourier grid, or along the
/// diagonal line `lambda = (t, t)`, with optional asymptote/ratio columns in
/// the long-memory regimes.
pub fn cmd_spectral(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CmdError> {
    let (_, model) = build_model(cfg)?;
    let quad = &cfg.quadrature;
    fs::create_dir_all(out_dir).map_err(io_err)?;
    let mut written = Vec::new();

    match cfg.spectral.mode {
        SpectralMode::Grid => {
            let grid = model
                .f_grid(cfg.lattice.n1, cfg.lattice.n2, quad)
                .map_err(|e| CmdError::Analysis(e.to_string()))?;
            let asym_col = if cfg.spectral.with_asymptote {
                let mut col = vec![f64::NAN; grid.values.len()];
                for k1 in 0..grid.n1 {
                    for k2 in 0..grid.n2 {
                        let fr = grid.frequency(k1, k2);
                        // NaN at the singular bin
                        col[k1 * grid.n2 + k2] = model.asymptote(fr, quad).unwrap_or(f64::NAN);
                    }
                }
                Some(col)
            } else {
                None
            };
            match cfg.spectral.format {
                OutputFormat::Csv => {
                    let path = out_dir.join("spectrum.csv");
                    let f = fs::File::create(&path).map_err(io_err)?;
                    io::write_spectrum_csv(f, &grid, asym_col.as_deref()).map_err(io_err)?;
                    written.push(path);
                }
                OutputFormat::Raw => {
                    let path = out_dir.join("spectrum.f64");
                    let mut sc = GridSidecar::for_spectrum(
                        &grid,
                        cfg.law.alpha,
                        &cfg.law.phi,
                        cfg.law.support,
                        cfg.sigma2_eps,
                    );
                    sc.config = Some(resolved_config_json(cfg));
                    io::write_raw_grid(&path, &grid.values, &sc).map_err(io_err)?;
                    written.push(path.clone());
                    written.push(io::sidecar_path(&path));
                }
            }
        }
        SpectralMode::Line => {
            let path = out_dir.join("spectrum-line.csv");
            let mut w = csv::Writer::from_path(&path).map_err(io_err)?;
            let with_asym = cfg.spectral.with_asymptote;
            if with_asym {
                w.write_record(["t", "lambda1", "lambda2", "f", "asymptote", "ratio"])
                    .map_err(io_err)?;
            } else {
                w.write_record(["t", "lambda1", "lambda2", "f"]).map_err(io_err)?;
            }
            let (t0, t1, pts) = (
                cfg.spectral.t_start,
                cfg.spectral.t_stop,
                cfg.spectral.points,
            );
            for k in 0..pts {
                let frac = k as f64 / (pts - 1) as f64;
                let t = t0 * (t1 / t0).powf(frac);
                let fr = Frequency::new(t, t);
                let f = model
                    .f(fr, quad)
                    .map_err(|e| CmdError::Analysis(e.to_string()))?;
                if with_asym {
                    let a = model
                        .asymptote(fr, quad)
                        .map_err(|e| CmdError::Analysis(e.to_string()))?;
                    w.write_record(
                        [t, t, t, f, a, f / a].map(|v| v.to_string()),
                    )
                    .map_err(io_err)?;
                } else {
                    w.write_record([t, t, t, f].map(|v| v.to_string()))
                        .map_err(io_err)?;
                }
            }
            w.flush().map_err(io_err)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `simulate`: write one or more realizations. Replicate `r` runs with
/// master seed `seed + r`; its sidecar embeds a config with that seed and
/// `replicates = 1`, so re-running from the sidecar reproduces the file
/// byte for byte.
pub fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CmdError> {
    let (law, model) = build_model(cfg)?;
    let lattice = LatticeSpec::new(cfg.lattice.n1, cfg.lattice.n2)
        .map_err(|e| CmdError::Validation(e.to_string()))?;
    fs::create_dir_all(out_dir).map_err(io_err)?;
    let mut written = Vec::new();

    // limit mode shares one spectral grid across replicates
    let grid = if cfg.simulate.mode == SimulateMode::Limit {
        Some(
            model
                .f_grid(lattice.n1, lattice.n2, &cfg.quadrature)
                .map_err(|e| CmdError::Analysis(e.to_string()))?,
        )
    } else {
        None
    };

    for r in 0..cfg.simulate.replicates {
        let seed = cfg.seed.wrapping_add(r);
        let field: FieldRealization = match cfg.simulate.mode {
            SimulateMode::Single => {
                let theta = cfg.simulate.theta.expect("validated");
                simulate_ar_field(theta, lattice, cfg.sigma2_eps, seed)
                    .map_err(|e| CmdError::Validation(e.to_string()))?
            }
            SimulateMode::Aggregate => {
                let n = cfg.simulate.n_fields.expect("validated");
                let out = aggregate_field(&law, n, lattice, cfg.sigma2_eps, seed)
                    .map_err(|e| CmdError::Validation(e.to_string()))?;
                if let Some(w) = &out.warning {
                    eprintln!("warning: {w}");
                }
                out.field
            }
            SimulateMode::Limit => {
                synthesize_limit_from_grid(grid.as_ref().unwrap(), &law, cfg.sigma2_eps, seed)
            }
        };

        let stem = format!("field-{r:04}");
        match cfg.simulate.format {
            OutputFormat::Raw => {
                let path = out_dir.join(format!("{stem}.f64"));
                let mut sc = GridSidecar::for_field(&field);
                let mut rerun = cfg.clone();
                rerun.seed = seed;
                rerun.simulate.replicates = 1;
                sc.config = Some(resolved_config_json(&rerun));
                io::write_raw_grid(&path, &field.values, &sc).map_err(io_err)?;
                written.push(path.clone());
                written.push(io::sidecar_path(&path));
            }
            OutputFormat::Csv => {
                let path = out_dir.join(format!("{stem}.csv"));
                let f = fs::File::create(&path).map_err(io_err)?;
                io::write_field_csv(f, &field).map_err(io_err)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    n_fields: usize,
    lattice: [usize; 2],
    memory: &'a MemoryReport,
}

/// `analyze`: averaged periodogram, radial spectrum CSV, memory report JSON.
pub fn cmd_analyze(
    cfg: &ExperimentConfig,
    inputs: &[PathBuf],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CmdError> {
    let mut paths: Vec<PathBuf> = inputs.to_vec();
    if paths.is_empty() {
        paths = cfg.analyze.inputs.iter().map(PathBuf::from).collect();
    }
    if paths.is_empty() {
        return Err(CmdError::Validation(
            "no input field files: pass them as arguments or set analyze.inputs".into(),
        ));
    }
    let mut fields = Vec::with_capacity(paths.len());
    for p in &paths {
        let f = io::read_field(p)
            .map_err(|e| CmdError::Validation(format!("{}: {e}", p.display())))?;
        fields.push(f);
    }

    fs::create_dir_all(out_dir).map_err(io_err)?;
    let pgram = mean_periodogram(&fields).map_err(|e| CmdError::Analysis(e.to_string()))?;
    let rad = radial_average(&pgram, cfg.analyze.n_bins);
    let n_max = pgram.lattice.n1.max(pgram.lattice.n2) as f64;
    let fit_range = [
        cfg.analyze
            .fit_min
            .unwrap_or(4.0 * 2.0 * std::f64::consts::PI / n_max),
        cfg.analyze.fit_max.unwrap_or(0.5),
    ];
    if fit_range[0] >= fit_range[1] {
        return Err(CmdError::Validation(format!(
            "fit range [{:.4}, {:.4}] is empty; the default lower edge is four \
             fundamental frequencies (8 pi / n), so lattices below ~64 need an \
             explicit analyze.fit_min/fit_max",
            fit_range[0], fit_range[1]
        )));
    }
    let report = estimate_memory(&rad, fit_range).map_err(|e| CmdError::Analysis(e.to_string()))?;

    let mut written = Vec::new();
    let pgram_path = out_dir.join("mean-periodogram.f64");
    let sc = GridSidecar {
        kind: GridKind::Periodogram,
        n1: pgram.lattice.n1,
        n2: pgram.lattice.n2,
        dtype: "f64le".into(),
        provenance: None,
        seed: None,
        sigma2: None,
        alpha: None,
        phi: None,
        support: None,
        dc_policy: None,
        config: Some(resolved_config_json(cfg)),
    };
    io::write_raw_grid(&pgram_path, &pgram.ordinates, &sc).map_err(io_err)?;
    written.push(pgram_path.clone());
    written.push(io::sidecar_path(&pgram_path));

    let rad_path = out_dir.join("radial-spectrum.csv");
    let f = fs::File::create(&rad_path).map_err(io_err)?;
    io::write_radial_csv(f, &rad).map_err(io_err)?;
    written.push(rad_path);

    let rep_path = out_dir.join("memory-report.json");
    let rep = AnalyzeReport {
        n_fields: fields.len(),
        lattice: [pgram.lattice.n1, pgram.lattice.n2],
        memory: &report,
    };
    fs::write(
        &rep_path,
        serde_json::to_vec_pretty(&rep).expect("report serializes"),
    )
    .map_err(io_err)?;
    written.push(rep_path);
    Ok(written)
}

/// `verify`: run the built-in battery and print one line per check.
/// Returns Err(Analysis) when any check fails, mapping to exit code 1.
pub fn cmd_verify(cfg: &ExperimentConfig, seed: u64) -> Result<(), CmdError> {
    let results = run_battery(&cfg.verify.alphas, seed, &cfg.quadrature);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(10);
    let mut failures = 0;
    for r in &results {
        println!(
            "{:<width$}  {}  {}",
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail,
            width = width
        );
        if !r.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        Err(CmdError::Analysis(format!(
            "{failures} of {} verification checks failed",
            results.len()
        )))
    } else {
        println!("all {} checks passed", results.len());
        Ok(())
    }
}
