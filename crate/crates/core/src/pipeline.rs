//! Per-sample pipelines (materialize → diagonalize → project → invariant)
//! run in parallel over disorder samples, results kept in sample order.

use rayon::prelude::*;

use crate::disorder::{sample_config, DisorderConfig};
use crate::error::{NcError, Result};
use crate::invariants::{
    chern_even_with, chern_odd, disorder_average, lambda_const, ChernMetadata, ChernResult, MultiIndex,
    EVEN_ORIENTATION,
};
use crate::lattice::{materialize, volume_trace, LatticeOperator, Window};
use crate::models::{build_hamiltonian, ModelSpec};
use crate::spectral::{
    chiral_unitary, eigh, fermi_projection, gaps_of, idempotency_residual, riesz_projection, Contour, Gap,
    QuadratureRule, SpectralData,
};
use crate::C64;

/// Configurations `0..count` of the model's disorder; a clean model yields
/// `count` copies of the single clean configuration.
pub fn sample_configs(model: &ModelSpec, count: usize) -> Vec<DisorderConfig> {
    if model.disorder.is_clean() {
        vec![DisorderConfig::clean(model.dim); count]
    } else {
        (0..count as u64).map(|i| sample_config(&model.disorder, i)).collect()
    }
}

fn per_sample<T, F>(model: &ModelSpec, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&DisorderConfig) -> Result<T> + Sync,
{
    if count == 0 {
        return Err(NcError::EmptySamples);
    }
    sample_configs(model, count)
        .par_iter()
        .enumerate()
        .map(|(i, omega)| f(omega).map_err(|e| e.in_sample(i)))
        .collect()
}

/// Spectra of `count` sampled Hamiltonians on `window`.
pub fn diagonalize_samples(model: &ModelSpec, window: &Window, count: usize) -> Result<Vec<SpectralData>> {
    let h = build_hamiltonian(model)?;
    per_sample(model, count, |omega| eigh(&materialize(&h, omega, window)?))
}

/// Where to put the Fermi level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FermiChoice {
    Energy(f64),
    /// Midpoint of the `i`-th (zero-based, ascending) gap of the sampled
    /// spectral union that is at least `min_width` wide.
    GapIndex { index: usize, min_width: f64 },
}

/// Resolves the Fermi level against the union of the sampled spectra and
/// returns it with the enclosing gap.
pub fn resolve_fermi_level(spectra: &[SpectralData], choice: FermiChoice) -> Result<(f64, Gap)> {
    let union: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues().iter().copied()).collect();
    fermi_level_in(&union, choice)
}

/// [`resolve_fermi_level`] on a plain list of eigenvalues (any order).
pub fn fermi_level_in(union: &[f64], choice: FermiChoice) -> Result<(f64, Gap)> {
    match choice {
        FermiChoice::GapIndex { index, min_width } => {
            let gaps = gaps_of(union, min_width);
            gaps.get(index).map(|g| (g.midpoint(), *g)).ok_or_else(|| {
                NcError::InvalidParameter(format!(
                    "gap index {index} requested but only {} gaps of width ≥ {min_width} found",
                    gaps.len()
                ))
            })
        }
        FermiChoice::Energy(e) => {
            let below = union.iter().copied().filter(|&v| v <= e).fold(f64::NEG_INFINITY, f64::max);
            let above = union.iter().copied().filter(|&v| v > e).fold(f64::INFINITY, f64::min);
            let distance = (e - below).min(above - e);
            if !below.is_finite() || !above.is_finite() || distance <= crate::spectral::GAPLESS_TOL {
                let eigenvalue = if (e - below) < (above - e) { below } else { above };
                return Err(NcError::Gapless { energy: e, eigenvalue, distance });
            }
            Ok((e, Gap { lower: below, upper: above }))
        }
    }
}

fn metadata(window: &Window, margin: usize, axes: &MultiIndex) -> ChernMetadata {
    ChernMetadata {
        sizes: window.sizes().to_vec(),
        boundary: window.boundary(),
        margin,
        axes: axes.axes().to_vec(),
    }
}

/// How each sample's Fermi projection is formed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Projector {
    #[default]
    Eigen,
    /// Contour quadrature around `[λ_min − g/2, E_F]` with half-height `g`,
    /// `g` being the sample's gap width at `E_F`.
    Riesz { points_per_edge: usize, rule: QuadratureRule },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvenOptions {
    pub projector: Projector,
    /// Replaces `σΛ_n` when set.
    pub prefactor: Option<C64>,
}

/// Even Chern numbers together with the per-sample traces `T(P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenReport {
    pub chern: ChernResult,
    pub traces: Vec<f64>,
    /// Largest `‖P² − P‖` over the samples.
    pub idempotency: f64,
}

/// Even Chern number of the Fermi projection, averaged over samples.
pub fn chern_even_samples(
    model: &ModelSpec,
    window: &Window,
    count: usize,
    fermi_level: f64,
    axes: &MultiIndex,
    margin: usize,
) -> Result<ChernResult> {
    Ok(even_samples(model, window, count, fermi_level, axes, margin, &EvenOptions::default())?.chern)
}

fn sample_projection(m: &LatticeOperator, fermi_level: f64, projector: Projector) -> Result<LatticeOperator> {
    let spec = eigh(m)?;
    match projector {
        Projector::Eigen => fermi_projection(&spec, fermi_level),
        Projector::Riesz { points_per_edge, rule } => {
            let e = spec.eigenvalues();
            let k = spec.count_below(fermi_level);
            if k == 0 || k == e.len() {
                return Err(NcError::InvalidParameter(format!(
                    "Fermi level {fermi_level} lies outside the spectrum [{}, {}]",
                    e[0],
                    e[e.len() - 1]
                )));
            }
            let gap = e[k] - e[k - 1];
            let contour = Contour::enclosing_below(e[0], fermi_level, gap, points_per_edge).with_rule(rule);
            riesz_projection(m, &contour)
        }
    }
}

/// Even Chern numbers, traces and idempotency residuals of the sampled
/// Fermi projections.
pub fn even_samples(
    model: &ModelSpec,
    window: &Window,
    count: usize,
    fermi_level: f64,
    axes: &MultiIndex,
    margin: usize,
    options: &EvenOptions,
) -> Result<EvenReport> {
    let prefactor = match options.prefactor {
        Some(z) => z,
        None => lambda_const(axes.len().max(1))? * EVEN_ORIENTATION,
    };
    let h = build_hamiltonian(model)?;
    let rows = per_sample(model, count, |omega| {
        let p = sample_projection(&materialize(&h, omega, window)?, fermi_level, options.projector)?;
        let chern = chern_even_with(&p, axes, margin, prefactor)?;
        Ok((chern, volume_trace(&p, margin)?.re, idempotency_residual(&p)))
    })?;
    let values: Vec<C64> = rows.iter().map(|r| r.0).collect();
    let mut chern = disorder_average(&values)?;
    chern.metadata = Some(metadata(window, margin, axes));
    Ok(EvenReport {
        chern,
        traces: rows.iter().map(|r| r.1).collect(),
        idempotency: rows.iter().fold(0.0, |acc, r| acc.max(r.2)),
    })
}

/// Odd Chern number of the chiral unitary, averaged over samples.
pub fn chern_odd_samples(
    model: &ModelSpec,
    window: &Window,
    count: usize,
    axes: &MultiIndex,
    margin: usize,
) -> Result<ChernResult> {
    let split = model
        .chiral_split
        .ok_or_else(|| NcError::InvalidParameter("model declares no chiral split".into()))?;
    let h = build_hamiltonian(model)?;
    let values = per_sample(model, count, |omega| {
        let u = chiral_unitary(&materialize(&h, omega, window)?, split)?;
        chern_odd(&u, axes, margin)
    })?;
    let mut result = disorder_average(&values)?;
    result.metadata = Some(metadata(window, margin, axes));
    Ok(result)
}

/// Per-site trace `T(P)` of the Fermi projection, one value per sample.
pub fn fermi_trace_samples(model: &ModelSpec, window: &Window, count: usize, fermi_level: f64, margin: usize) -> Result<Vec<f64>> {
    let h = build_hamiltonian(model)?;
    per_sample(model, count, |omega| {
        let spec = eigh(&materialize(&h, omega, window)?)?;
        Ok(volume_trace(&fermi_projection(&spec, fermi_level)?, margin)?.re)
    })
}
