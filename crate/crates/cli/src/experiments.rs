//! One function per experiment, each turning a validated config into
//! in-memory output files. Sweeps run in parallel and are collected in
//! sweep order, so the bytes never depend on the worker count.

use std::collections::BTreeMap;

use cavom::dynamics::quantum_potential;
use cavom::full_jc::{validity_sweep_detuning, validity_sweep_sideband, ValidityRow};
use cavom::model::{
    resonant_drive_at_atom_detuning, resonant_positions, solve_resonant_drive,
    zero_point_resolution, DerivedQuantities, DriveFrequency, SystemParams,
};
use cavom::motional::{ground_state, MotionalWavefunction, PositionGrid};
use cavom::scattering::{
    conditional_transmission, log_log_fit, scatter_photon, EffectiveSMatrix, ResolutionFamily,
    SweepRow,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentId};
use crate::error::{CliError, Result};

/// A file produced by an experiment, not yet written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
    /// Data rows for CSV files (header excluded).
    pub rows: Option<usize>,
}

impl OutputFile {
    fn csv(name: impl Into<String>, header: &str, lines: Vec<String>) -> Self {
        let rows = lines.len();
        let mut contents = String::with_capacity(64 * (rows + 1));
        contents.push_str(header);
        contents.push('\n');
        for line in lines {
            contents.push_str(&line);
            contents.push('\n');
        }
        Self {
            name: name.into(),
            contents,
            rows: Some(rows),
        }
    }

    fn json(name: impl Into<String>, value: &impl Serialize) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("serializable");
        contents.push('\n');
        Self {
            name: name.into(),
            contents,
            rows: None,
        }
    }
}

fn csv_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.12e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Evaluates `f` over the sweep in parallel. The first failing point in
/// sweep order is reported, whatever order the workers finish in.
fn sweep<T: Send>(
    variable: &str,
    values: &[f64],
    f: impl Fn(f64) -> cavom::Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let results: Vec<cavom::Result<T>> = values.par_iter().map(|&v| f(v)).collect();
    results
        .into_iter()
        .zip(values)
        .map(|(r, v)| {
            r.map_err(|source| CliError::Compute {
                point: format!("{variable} = {v}"),
                source,
            })
        })
        .collect()
}

fn setup_error(what: &str) -> impl FnOnce(cavom::Error) -> CliError + '_ {
    move |source| CliError::Compute {
        point: what.to_string(),
        source,
    }
}

/// Ground state on a grid fine enough for the spatial resolution at `drive`.
fn ground_for(params: &SystemParams, drive: &DriveFrequency) -> cavom::Result<MotionalWavefunction> {
    let derived = DerivedQuantities::compute(params, drive)?;
    let grid = PositionGrid::auto(params.x0, derived.eta_ld, derived.resolution_r)?;
    ground_state(grid, params.x0, derived.eta_ld)
}

/// Resonant drive at `x0`, optionally at a pinned laser–atom detuning.
fn resonant_point(
    params: &SystemParams,
    delta_0: Option<f64>,
) -> cavom::Result<(SystemParams, DriveFrequency)> {
    match delta_0 {
        Some(d0) => resonant_drive_at_atom_detuning(params, d0, params.x0),
        None => Ok((*params, solve_resonant_drive(params, params.x0)?)),
    }
}

/// Computes every output file of the experiment described by `config`.
pub fn compute(config: &ExperimentConfig) -> Result<Vec<OutputFile>> {
    config.validate()?;
    let values = config.sweep.values();
    match config.id()? {
        ExperimentId::Fig2 => potentials(config, &values),
        id @ (ExperimentId::Fig3a | ExperimentId::Fig3b) => reflection_spectrum(config, id, &values),
        ExperimentId::Fig4c => resolution_curve(config, &values),
        ExperimentId::Fig5 => photon_statistics(config, &values),
        ExperimentId::Fig6 => added_phonons(config, &values),
        ExperimentId::Fig9 => validity(config, &values, validity_sweep_detuning),
        ExperimentId::Fig10 => validity(config, &values, validity_sweep_sideband),
        ExperimentId::Fig11 => design_curves(config, &values),
        ExperimentId::CustomSweep => custom_sweep(config, &values),
    }
}

#[derive(Serialize)]
struct PotentialSummary {
    delta_c: f64,
    g_om: f64,
    kappa: f64,
    drive_amplitude: f64,
    resonant_positions: Vec<f64>,
}

fn potentials(config: &ExperimentConfig, xs: &[f64]) -> Result<Vec<OutputFile>> {
    let base = config.base_params()?[0];
    let (params, drive) =
        resonant_point(&base, config.options.delta_0).map_err(setup_error("resonance"))?;
    // periodic grid whose points are exactly the inclusive sweep
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let grid = PositionGrid::new(xs[0], xs[xs.len() - 1] + step, xs.len())
        .map_err(setup_error("position grid"))?;
    let v = quantum_potential(&params, &drive, &grid).map_err(setup_error("potential"))?;
    let mut csv = Vec::new();
    v.write_csv(&mut csv).expect("in-memory write");
    let derived = DerivedQuantities::compute(&params, &drive).map_err(setup_error("couplings"))?;
    let summary = PotentialSummary {
        delta_c: drive.delta_c,
        g_om: derived.g_om,
        kappa: params.kappa(),
        drive_amplitude: params.drive_amplitude,
        resonant_positions: resonant_positions(&params, &drive).map_err(setup_error("roots"))?,
    };
    Ok(vec![
        OutputFile {
            name: "fig2.csv".into(),
            contents: String::from_utf8(csv).expect("ascii"),
            rows: Some(xs.len()),
        },
        OutputFile::json("fig2_summary.json", &summary),
    ])
}

fn reflection_spectrum(
    config: &ExperimentConfig,
    id: ExperimentId,
    deltas: &[f64],
) -> Result<Vec<OutputFile>> {
    let family = ResolutionFamily::new(config.options.eta_ld.expect("validated"));
    let r_zp = config.options.r_zp.expect("validated");
    let (params, drive) = family.point(r_zp).map_err(setup_error("resolution family"))?;
    let psi0 = family.ground_state(r_zp).map_err(setup_error("ground state"))?;
    // the laser–atom detuning stays fixed so g_om does not drift with δ_c
    let delta_0 = drive.delta_0(&params);
    let mut empty = params;
    empty.g0 = 0.0;
    let lines = sweep("delta_c", deltas, |delta_c| {
        let mut p = params;
        p.atom_cavity_detuning = delta_c - delta_0;
        let d = DriveFrequency::new(delta_c);
        let p_r = scatter_photon(&psi0, &p, &d)?.probabilities.reflection;
        let p_empty = EffectiveSMatrix::new(&empty, &d)?.at(0.0).reflection.norm_sqr();
        Ok(csv_row(&[delta_c, p_r, p_empty]))
    })?;
    Ok(vec![OutputFile::csv(
        format!("{}.csv", id.name()),
        "delta_c,p_r,p_r_empty",
        lines,
    )])
}

fn resolution_curve(config: &ExperimentConfig, rs: &[f64]) -> Result<Vec<OutputFile>> {
    let family = ResolutionFamily::new(config.options.eta_ld.expect("validated"));
    let lines = sweep("r_zp", rs, |r| {
        let p = family.outcome(r)?.probabilities;
        Ok(csv_row(&[r, p.reflection, p.transmission]))
    })?;
    Ok(vec![OutputFile::csv("fig4c.csv", "r_zp,p_r,p_t", lines)])
}

fn photon_statistics(config: &ExperimentConfig, deltas: &[f64]) -> Result<Vec<OutputFile>> {
    let params = config.base_params()?[0];
    let kappa = params.kappa();
    let lines = sweep("delta_c", deltas, |delta_c| {
        let drive = DriveFrequency::new(delta_c);
        let psi0 = ground_for(&params, &drive)?;
        let outcome = scatter_photon(&psi0, &params, &drive)?;
        let g2 = outcome.g2()?;
        let p_tt = conditional_transmission(&psi0, &params, &drive)?;
        let p = outcome.probabilities;
        Ok(csv_row(&[
            delta_c,
            2.0 * delta_c / kappa,
            p.reflection,
            p.transmission,
            p.atomic_emission,
            p_tt,
            g2.g2_tt,
            g2.g2_rt,
        ]))
    })?;
    Ok(vec![OutputFile::csv(
        "fig5.csv",
        "delta_c,two_delta_c_over_kappa,p_r,p_t,p_at,p_tt,g2_tt,g2_rt",
        lines,
    )])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub column: String,
    pub window: [f64; 2],
    pub samples: usize,
    pub slope: f64,
    /// `ln` of the prefactor.
    pub intercept: f64,
}

fn added_phonons(config: &ExperimentConfig, rs: &[f64]) -> Result<Vec<OutputFile>> {
    let family = ResolutionFamily::new(config.options.eta_ld.expect("validated"));
    let rows = sweep("r_zp", rs, |r| {
        let n = family.outcome(r)?.phonons()?;
        Ok([
            r,
            n.n_r.unwrap_or(f64::NAN),
            n.n_t.unwrap_or(f64::NAN),
            n.n_total,
        ])
    })?;

    let columns = ["r_zp", "n_r", "n_t", "n_total"];
    let mut fits = BTreeMap::new();
    for (name, spec) in &config.options.fits {
        let col = columns
            .iter()
            .position(|c| *c == spec.column)
            .filter(|&c| c > 0)
            .ok_or_else(|| CliError::Config(format!("fit `{name}`: no column `{}`", spec.column)))?;
        let [lo, hi] = spec.window;
        let slack = 1e-9;
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|row| row[0] >= lo * (1.0 - slack) && row[0] <= hi * (1.0 + slack))
            .map(|row| (row[0], row[col]))
            .unzip();
        if xs.len() < 2 {
            return Err(CliError::InvalidRange(format!(
                "fit `{name}` window [{lo}, {hi}] holds {} sweep points, need 2",
                xs.len()
            )));
        }
        let (slope, intercept) = log_log_fit(&xs, &ys).map_err(setup_error(name))?;
        fits.insert(
            name.clone(),
            PowerLawFit {
                column: spec.column.clone(),
                window: spec.window,
                samples: xs.len(),
                slope,
                intercept,
            },
        );
    }

    Ok(vec![
        OutputFile::csv(
            "fig6.csv",
            &columns.join(","),
            rows.iter().map(|r| csv_row(r)).collect(),
        ),
        OutputFile::json("fig6_fits.json", &fits),
    ])
}

fn validity(
    config: &ExperimentConfig,
    ratios: &[f64],
    run: fn(&SystemParams, &[f64], usize) -> cavom::Result<Vec<ValidityRow>>,
) -> Result<Vec<OutputFile>> {
    let params = config.base_params()?[0];
    let cutoff = config.options.cutoff.expect("validated");
    let id = config.id()?;
    let rows = sweep(id.sweep_variable().expect("fixed"), ratios, |ratio| {
        Ok(run(&params, &[ratio], cutoff)?.remove(0))
    })?;
    let deviations: Vec<String> = rows
        .iter()
        .map(|row| {
            let d = row.deviation();
            csv_row(&[row.ratio, d.p_r, d.p_t, d.p_at, d.n_r, row.full_total_probability])
        })
        .collect();
    Ok(vec![
        OutputFile::csv(
            format!("{id}.csv"),
            ValidityRow::CSV_HEADER,
            rows.iter().map(ValidityRow::csv_line).collect(),
        ),
        OutputFile::csv(
            format!("{id}_deviation.csv"),
            "ratio,dev_p_r,dev_p_t,dev_p_at,dev_n_r,full_total_probability",
            deviations,
        ),
    ])
}

fn design_curves(config: &ExperimentConfig, ratios: &[f64]) -> Result<Vec<OutputFile>> {
    let mut files = Vec::new();
    for (name, params) in config.base_names().into_iter().zip(config.base_params()?) {
        let kappa = params.kappa();
        let lines = sweep("detuning_over_g0", ratios, |ratio| {
            let mut p = params;
            p.atom_cavity_detuning = ratio * p.g0;
            let drive = solve_resonant_drive(&p, p.x0)?;
            let r_zp = zero_point_resolution(&p, &drive)?;
            Ok(csv_row(&[
                ratio,
                p.atom_cavity_detuning,
                drive.delta_c,
                2.0 * drive.delta_c / kappa,
                r_zp,
            ]))
        })?;
        files.push(OutputFile::csv(
            format!("fig11_{name}.csv"),
            "detuning_over_g0,atom_cavity_detuning,delta_c,two_delta_c_over_kappa,r_zp",
            lines,
        ));
    }
    Ok(files)
}

fn custom_sweep(config: &ExperimentConfig, values: &[f64]) -> Result<Vec<OutputFile>> {
    let base = config.base_params()?[0];
    let variable = config.sweep.variable.as_str();
    let delta_0 = config.options.delta_0;
    let lines = sweep(variable, values, |v| {
        let (params, drive) = if variable == "delta_c" {
            (base, DriveFrequency::new(v))
        } else {
            let mut p = base;
            p.set_field(variable, v)?;
            p.validate()?;
            resonant_point(&p, delta_0)?
        };
        let outcome = scatter_photon(&ground_for(&params, &drive)?, &params, &drive)?;
        Ok(SweepRow::from_outcome(v, &outcome)?.csv_line())
    })?;
    Ok(vec![OutputFile::csv("custom-sweep.csv", SweepRow::CSV_HEADER, lines)])
}
