use ncbt_core::invariants::{chern_range, kspace_chern_oracle, winding_oracle, ChernResult, MultiIndex};
use ncbt_core::lattice::{materialize, Boundary, Window};
use ncbt_core::models::{bloch_matrix, build_hamiltonian, hofstadter, magnetic_cell, ModelSpec};
use ncbt_core::pipeline::{
    chern_odd_samples, even_samples, fermi_level_in, sample_configs, EvenOptions, FermiChoice, Projector,
};
use ncbt_core::spectral::{eigh, gaps_of, residual_bounds, Gap};
use ncbt_core::NcError;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{gcd, Flux, ModelConfig, ProjectorConfig, RunConfig};
use crate::error::CliError;
use crate::output::{num, OutDir};
use crate::Run;

const IMAG_TOL: f64 = 1e-6;
const CLEAN_CHERN_TOL: f64 = 1e-2;
const CLEAN_WINDING_TOL: f64 = 1e-3;
const DISORDERED_TOL: f64 = 5e-2;
const GAP_LABEL_TOL: f64 = 1e-3;
/// Search box `|n_J| ≤ RANGE_BOUND` for range-membership witnesses.
const RANGE_BOUND: i64 = 64;
const DEFAULT_GRID_2D: usize = 64;
const DEFAULT_GRID_1D: usize = 256;

fn setup(run: &Run) -> Result<(ModelSpec, Window), CliError> {
    let model = run.config.build_model(run.seed)?;
    let window = run.config.window(model.dim, model.orbital_dim)?;
    check_window(&model, &window, run.config.margin())?;
    Ok((model, window))
}

/// Rejects windows that `materialize` would refuse, as configuration errors.
fn check_window(model: &ModelSpec, window: &Window, margin: usize) -> Result<(), CliError> {
    window
        .check_commensurate(&model.twist, false)
        .map_err(|e| CliError::Config(format!("window: {e}")))?;
    let range = model.hopping_range().unsigned_abs() as usize;
    if let Some(n) = window.sizes().iter().find(|&&n| n <= range) {
        return Err(CliError::Config(format!("window size {n} does not exceed the hopping range {range}")));
    }
    if window.interior(margin).is_empty() {
        return Err(CliError::Config(format!("margin {margin} leaves no interior sites")));
    }
    Ok(())
}

fn window_json(window: &Window, margin: usize) -> Value {
    let boundary = match window.boundary() {
        Boundary::Periodic => "periodic",
        Boundary::Open => "open",
    };
    json!({ "sizes": window.sizes(), "boundary": boundary, "margin": margin })
}

fn estimate(value: f64, tolerance: f64) -> Value {
    json!({ "value": value, "tolerance": tolerance })
}

/// Samples actually evaluated for an invariant: one when the model is clean.
fn invariant_samples(config: &RunConfig, model: &ModelSpec) -> usize {
    if model.is_clean() {
        1
    } else {
        config.invariant.samples
    }
}

#[derive(Clone)]
struct SampleSpectrum {
    eigenvalues: Vec<f64>,
    /// `‖Hv − λv‖` per eigenpair: bounds the eigenvalue error.
    residuals: Vec<f64>,
}

fn sample_spectra(model: &ModelSpec, window: &Window, count: usize) -> Result<Vec<SampleSpectrum>, CliError> {
    let h = build_hamiltonian(model)?;
    let distinct = if model.is_clean() { 1 } else { count };
    let spectra = sample_configs(model, distinct)
        .par_iter()
        .enumerate()
        .map(|(i, omega)| {
            let m = materialize(&h, omega, window).map_err(|e| e.in_sample(i))?;
            let s = eigh(&m).map_err(|e| e.in_sample(i))?;
            let residuals = residual_bounds(&m, &s).map_err(|e| e.in_sample(i))?;
            Ok(SampleSpectrum { eigenvalues: s.eigenvalues().to_vec(), residuals })
        })
        .collect::<Result<Vec<_>, NcError>>()?;
    Ok((0..count).map(|i| spectra[i % distinct].clone()).collect())
}

fn max_residual(spectra: &[SampleSpectrum]) -> f64 {
    spectra.iter().flat_map(|s| &s.residuals).fold(0.0, |acc, &r| acc.max(r))
}

fn union(spectra: &[SampleSpectrum]) -> Vec<f64> {
    spectra.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect()
}

fn gap_json(g: &Gap, tolerance: f64) -> Value {
    json!({
        "lower": estimate(g.lower, tolerance),
        "upper": estimate(g.upper, tolerance),
        "width": estimate(g.width(), 2.0 * tolerance),
        "midpoint": estimate(g.midpoint(), tolerance),
    })
}

pub fn spectrum(run: &Run) -> Result<(), CliError> {
    let (model, window) = setup(run)?;
    let count = run.config.invariant.samples;
    let spectra = sample_spectra(&model, &window, count)?;
    let tol = max_residual(&spectra);
    let min_width = run.config.spectral.gap_min_width;
    let gaps = gaps_of(&union(&spectra), min_width);
    let asymmetry = spectra
        .iter()
        .flat_map(|s| s.eigenvalues.iter().zip(s.eigenvalues.iter().rev()).map(|(a, b)| (a + b).abs()))
        .fold(0.0, f64::max);

    let out = OutDir::create(run.out.clone())?;
    let mut csv = out.csv("spectrum.csv")?;
    let mut header = vec!["index".to_string()];
    for s in 0..count {
        header.push(format!("eigenvalue_{s}"));
        header.push(format!("tolerance_{s}"));
    }
    csv.write_record(&header)?;
    for k in 0..window.matrix_dim() {
        let mut row = vec![k.to_string()];
        for s in &spectra {
            row.push(num(s.eigenvalues[k]));
            row.push(num(s.residuals[k]));
        }
        csv.write_record(&row)?;
    }
    csv.flush()?;

    let mut csv = out.csv("gaps.csv")?;
    csv.write_record(["index", "lower", "upper", "width", "midpoint", "tolerance"])?;
    for (i, g) in gaps.iter().enumerate() {
        csv.write_record([i.to_string(), num(g.lower), num(g.upper), num(g.width()), num(g.midpoint()), num(tol)])?;
    }
    csv.flush()?;

    out.json(
        "spectrum.json",
        &json!({
            "command": "spectrum",
            "seed": run.seed,
            "config": run.config,
            "window": window_json(&window, run.config.margin()),
            "samples": count,
            "matrix_dim": window.matrix_dim(),
            "gap_min_width": min_width,
            "max_residual": tol,
            "gaps": gaps.iter().map(|g| gap_json(g, tol)).collect::<Vec<_>>(),
            "spectral_asymmetry": estimate(asymmetry, 2.0 * tol),
        }),
    )
}

pub fn butterfly(run: &Run) -> Result<(), CliError> {
    let ModelConfig::Hofstadter { disorder, .. } = run.config.model else {
        return Err(CliError::Config("butterfly needs model.kind = \"hofstadter\"".into()));
    };
    let sweep = run.config.butterfly.as_ref().ok_or_else(|| CliError::Config("missing [butterfly] section".into()))?;
    let fluxes: Vec<Flux> = match (&sweep.fluxes, sweep.q_max) {
        (Some(list), _) => list.clone(),
        (None, Some(q_max)) => (1..=q_max)
            .flat_map(|q| (0..q).filter(move |&p| gcd(p, q) == 1).map(move |p| Flux { p, q }))
            .collect(),
        (None, None) => unreachable!("checked when the config is parsed"),
    };
    let window = run.config.window(2, 1)?;
    let count = if disorder > 0.0 { run.config.invariant.samples } else { 1 };

    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for flux in fluxes {
        let model =
            hofstadter(flux.p, flux.q, disorder, run.seed).map_err(|e| CliError::Config(format!("model: {e}")))?;
        match check_window(&model, &window, run.config.margin()) {
            Ok(()) => kept.push((flux, model)),
            Err(CliError::Config(reason)) => {
                eprintln!("ncbt: skipping flux {flux}: {reason}");
                skipped.push(json!({ "flux": flux, "reason": reason }));
            }
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(CliError::Config("no flux in the sweep is commensurate with the window".into()));
    }
    let results = kept
        .par_iter()
        .map(|(_, model)| sample_spectra(model, &window, count))
        .collect::<Result<Vec<_>, _>>()?;

    let out = OutDir::create(run.out.clone())?;
    let mut csv = out.csv("butterfly.csv")?;
    csv.write_record(["sample", "p", "q", "flux", "eigenvalue", "tolerance"])?;
    let mut rows = 0usize;
    for ((flux, _), spectra) in kept.iter().zip(&results) {
        for (s, spectrum) in spectra.iter().enumerate() {
            for (e, r) in spectrum.eigenvalues.iter().zip(&spectrum.residuals) {
                let record =
                    [s.to_string(), flux.p.to_string(), flux.q.to_string(), num(flux.value()), num(*e), num(*r)];
                csv.write_record(&record)?;
                rows += 1;
            }
        }
    }
    csv.flush()?;
    out.json(
        "butterfly.json",
        &json!({
            "command": "butterfly",
            "seed": run.seed,
            "config": run.config,
            "window": window_json(&window, run.config.margin()),
            "samples": count,
            "fluxes": kept.iter().map(|(f, _)| *f).collect::<Vec<_>>(),
            "skipped": skipped,
            "rows": rows,
            "max_residual": results.iter().map(|s| max_residual(s)).fold(0.0, f64::max),
        }),
    )
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Outcome of a Bloch-space cross-check.
struct Oracle {
    json: Value,
    /// `None` when the oracle does not apply.
    agrees: Option<bool>,
}

impl Oracle {
    fn skipped(reason: impl Into<String>) -> Self {
        Oracle { json: json!({ "status": "skipped", "reason": reason.into() }), agrees: None }
    }
}

/// Runs an oracle (returning a value and its rounding residual) at `grid`
/// and `2·grid`. It agrees when both runs round to the same integer and that
/// integer is within `tol` of `value`.
fn cross_check<F>(grid: usize, value: f64, tol: f64, extra: Value, oracle: F) -> Oracle
where
    F: Fn(usize) -> Result<(f64, f64), NcError>,
{
    match (oracle(grid), oracle(2 * grid)) {
        (Ok((coarse, coarse_residual)), Ok((fine, fine_residual))) => {
            let integer = fine.round();
            let stable = coarse.round() == integer;
            let agrees = stable && (value - integer).abs() <= tol;
            let mut json = json!({
                "status": "computed",
                "grid": grid,
                "value": estimate(coarse, coarse_residual),
                "refined_grid": 2 * grid,
                "refined_value": estimate(fine, fine_residual),
                "integer": integer as i64,
                "stable": stable,
                "agrees": agrees,
            });
            if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
                map.extend(more);
            }
            Oracle { json, agrees: Some(agrees) }
        }
        (Err(e), _) | (_, Err(e)) => Oracle::skipped(format!("oracle failed: {e}")),
    }
}

fn even_oracle(
    run: &Run,
    model: &ModelSpec,
    window: &Window,
    axes: &MultiIndex,
    spectrum: &SampleSpectrum,
    fermi_level: f64,
    value: f64,
    tol: f64,
) -> Result<Oracle, CliError> {
    if !model.is_clean() {
        return Ok(Oracle::skipped("the model is disordered"));
    }
    if model.dim != 2 || axes.len() != 2 {
        return Ok(Oracle::skipped("the Bloch oracle covers two-dimensional models with two axes"));
    }
    let h = build_hamiltonian(model)?;
    let cell = magnetic_cell(&model.twist)?;
    let cell_sites: usize = cell.iter().product();
    let filled = spectrum.eigenvalues.partition_point(|&e| e <= fermi_level);
    if (filled * cell_sites) % window.site_count() != 0 {
        return Ok(Oracle::skipped(format!("{filled} filled states do not fill whole bands of the cell {cell:?}")));
    }
    let bands = filled * cell_sites / window.site_count();
    if bands == 0 || bands >= cell_sites * model.orbital_dim {
        return Ok(Oracle::skipped("the Fermi level lies outside the band range"));
    }
    let orientation = if axes.axes()[0] < axes.axes()[1] { 1.0 } else { -1.0 };
    let grid = run.config.invariant.oracle_grid.unwrap_or(DEFAULT_GRID_2D);
    Ok(cross_check(grid, value, tol, json!({ "cell": cell, "band_count": bands }), |g| {
        let v = orientation * kspace_chern_oracle(|k| bloch_matrix(&h, &cell, &k), bands, g)?;
        Ok((v, (v - v.round()).abs()))
    }))
}

/// JSON fields shared by `chern` and `winding`.
fn invariant_json(result: &ChernResult, tol: f64) -> Value {
    let per_sample: Vec<Value> = result.per_sample.iter().map(|z| json!({ "re": z.re, "im": z.im })).collect();
    json!({
        "value": result.value,
        "stderr": result.stderr,
        "imag_residual": estimate(result.imag_residual, IMAG_TOL),
        "per_sample": per_sample,
        "per_sample_tolerance": tol,
        "nearest_integer": result.nearest_integer(),
        "integer_deviation": estimate(result.integer_deviation(), tol),
    })
}

/// Quantization verdict: deviation within `tol`, every sample rounding to the
/// same integer, and (on clean periodic windows) a negligible imaginary part.
fn quantized(result: &ChernResult, tol: f64, gate_imag: bool) -> bool {
    let n = result.nearest_integer();
    result.integer_deviation() <= tol
        && result.per_sample.iter().all(|z| z.re.round() as i64 == n)
        && (!gate_imag || result.imag_residual <= IMAG_TOL)
}

fn finish(out: &OutDir, file: &str, body: &Value, passed: bool, what: &str) -> Result<(), CliError> {
    out.json(file, body)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Check(format!("{what} is not quantized or disagrees with its checks; see {}", out.path().join(file).display())))
    }
}

pub fn chern(run: &Run) -> Result<(), CliError> {
    let cfg = &run.config;
    let (model, window) = setup(run)?;
    let axes = cfg.axes(model.dim)?;
    if axes.is_empty() || axes.len() % 2 != 0 {
        return Err(CliError::Config(format!(
            "chern needs a nonempty even number of axes, got {}; use winding for odd ones",
            axes.len()
        )));
    }
    let margin = cfg.margin();
    let count = invariant_samples(cfg, &model);
    let spectra = sample_spectra(&model, &window, count)?;
    let eig_tol = max_residual(&spectra);
    let choice = match cfg.spectral.fermi_energy {
        Some(e) => FermiChoice::Energy(e),
        None => FermiChoice::GapIndex {
            index: cfg.spectral.gap_index.unwrap_or(0),
            min_width: cfg.spectral.gap_min_width,
        },
    };
    let (fermi_level, gap) = fermi_level_in(&union(&spectra), choice)?;
    let projector = match cfg.spectral.projector {
        ProjectorConfig::Eigen => Projector::Eigen,
        ProjectorConfig::Riesz => {
            Projector::Riesz { points_per_edge: cfg.spectral.contour_points, rule: cfg.spectral.quadrature }
        }
    };
    let options = EvenOptions { projector, prefactor: None };
    let report = even_samples(&model, &window, count, fermi_level, &axes, margin, &options)?;
    let result = &report.chern;

    let tol = cfg.invariant.tolerance.unwrap_or(if model.is_clean() { CLEAN_CHERN_TOL } else { DISORDERED_TOL });
    let is_quantized =
        quantized(result, tol, model.is_clean() && window.boundary() == Boundary::Periodic);
    let range = chern_range(&model.twist, &axes)?;
    let in_range = range.contains(result.nearest_integer() as f64, 1e-9, RANGE_BOUND);
    let (trace, trace_stderr) = mean_stderr(&report.traces);
    let labels = chern_range(&model.twist, &MultiIndex::empty())?;
    let witness = labels.membership(trace, GAP_LABEL_TOL, RANGE_BOUND);
    let oracle = even_oracle(run, &model, &window, &axes, &spectra[0], fermi_level, result.value, tol)?;
    let passed = is_quantized && in_range && oracle.agrees != Some(false);

    let body = json!({
        "command": "chern",
        "seed": run.seed,
        "config": cfg,
        "window": window_json(&window, margin),
        "axes": axes.axes().iter().map(|a| a + 1).collect::<Vec<_>>(),
        "samples": count,
        "fermi_level": estimate(fermi_level, eig_tol),
        "gap": gap_json(&gap, eig_tol),
        "chern": invariant_json(result, tol),
        "quantized": is_quantized,
        "chern_range": { "generators": range.generators, "contains_integer": in_range },
        "fermi_trace": {
            "value": trace,
            "stderr": trace_stderr,
            "gap_labelling": { "generators": labels.generators, "witness": witness, "tolerance": GAP_LABEL_TOL },
        },
        "idempotency": estimate(report.idempotency, eig_tol),
        "oracle": oracle.json,
        "passed": passed,
    });
    let out = OutDir::create(run.out.clone())?;
    finish(&out, "chern.json", &body, passed, "the Chern number")
}

pub fn winding(run: &Run) -> Result<(), CliError> {
    let cfg = &run.config;
    let (model, window) = setup(run)?;
    let Some((plus, minus)) = model.chiral_split else {
        return Err(CliError::Config("winding needs a chiral model (ssh, or custom with chiral_split)".into()));
    };
    let axes = cfg.axes(model.dim)?;
    if axes.len() % 2 != 1 {
        return Err(CliError::Config(format!("winding needs an odd number of axes, got {}", axes.len())));
    }
    let margin = cfg.margin();
    let count = invariant_samples(cfg, &model);
    let result = chern_odd_samples(&model, &window, count, &axes, margin)?;

    let tol = cfg.invariant.tolerance.unwrap_or(if model.is_clean() { CLEAN_WINDING_TOL } else { DISORDERED_TOL });
    let is_quantized =
        quantized(&result, tol, model.is_clean() && window.boundary() == Boundary::Periodic);
    let range = chern_range(&model.twist, &axes)?;
    let in_range = range.contains(result.nearest_integer() as f64, 1e-9, RANGE_BOUND);

    let oracle = if !model.is_clean() {
        Oracle::skipped("the model is disordered")
    } else if model.dim != 1 {
        Oracle::skipped("the winding oracle covers one-dimensional models")
    } else if plus != minus {
        Oracle::skipped(format!("chiral split ({plus}, {minus}) is not balanced"))
    } else {
        let h = build_hamiltonian(&model)?;
        let grid = cfg.invariant.oracle_grid.unwrap_or(DEFAULT_GRID_1D);
        cross_check(grid, result.value, tol, json!({}), |g| {
            let w = winding_oracle(|k| Ok(bloch_matrix(&h, &[1], &[k])?.view((plus, 0), (minus, plus)).into_owned()), g)?;
            Ok((w.winding as f64, w.residual))
        })
    };
    let passed = is_quantized && in_range && oracle.agrees != Some(false);

    let body = json!({
        "command": "winding",
        "seed": run.seed,
        "config": cfg,
        "window": window_json(&window, margin),
        "axes": axes.axes().iter().map(|a| a + 1).collect::<Vec<_>>(),
        "samples": count,
        "chern_odd": invariant_json(&result, tol),
        "quantized": is_quantized,
        "chern_range": { "generators": range.generators, "contains_integer": in_range },
        "oracle": oracle.json,
        "passed": passed,
    });
    let out = OutDir::create(run.out.clone())?;
    finish(&out, "winding.json", &body, passed, "the winding number")
}
