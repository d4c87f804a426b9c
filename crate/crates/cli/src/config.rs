//! Run configuration: TOML, or JSON when the file name ends in `.json`.
//! Unknown keys are rejected at every level.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ncbt_core::disorder::{DisorderSpec, SiteDistribution};
use ncbt_core::lattice::{Boundary, Window};
use ncbt_core::models::{from_hoppings, hofstadter, ssh, ModelSpec, DEFAULT_DISORDER_RADIUS};
use ncbt_core::spectral::QuadratureRule;
use ncbt_core::twist::{rational_angle, Coefficient, TwistMatrix};
use ncbt_core::{CMat, Point, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A rational flux `p/q`, meaning the angle `2πp/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Flux {
    pub p: i64,
    pub q: i64,
}

impl Flux {
    pub fn angle(self) -> f64 {
        rational_angle(self.p, self.q).expect("validated on parse")
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl FromStr for Flux {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = s.split_once('/').ok_or_else(|| format!("flux {s:?} is not of the form \"p/q\""))?;
        let p: i64 = p.trim().parse().map_err(|_| format!("flux numerator in {s:?} is not an integer"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("flux denominator in {s:?} is not an integer"))?;
        rational_angle(p, q).map_err(|e| e.to_string())?;
        if gcd(p, q) != 1 {
            return Err(format!("flux {s:?} is not in lowest terms"));
        }
        Ok(Flux { p, q })
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl TryFrom<String> for Flux {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Flux> for String {
    fn from(f: Flux) -> String {
        f.to_string()
    }
}

impl fmt::Display for Flux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub invariant: InvariantConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub butterfly: Option<ButterflyConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Hofstadter {
        /// Required except for `butterfly`, which sweeps its own fluxes.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flux: Option<Flux>,
        #[serde(default)]
        disorder: f64,
    },
    Ssh {
        t_intra: f64,
        t_inter: f64,
        #[serde(default)]
        disorder: f64,
    },
    Custom {
        dim: usize,
        orbital_dim: usize,
        #[serde(default)]
        twist: Vec<TwistEntry>,
        hoppings: Vec<HoppingConfig>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chiral_split: Option<[usize; 2]>,
        /// Strength of i.i.d. on-site disorder `s(2ω − 1)` on each orbital.
        #[serde(default)]
        onsite_disorder: f64,
    },
}

/// `Θ_{row,col} = 2π·flux` with one-based `row > col`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistEntry {
    pub row: usize,
    pub col: usize,
    pub flux: Flux,
}

/// Hopping matrix `W_y = re + i·im` (row-major nested lists).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingConfig {
    pub shift: Vec<i64>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryConfig {
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub sizes: Vec<usize>,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub margin: usize,
}

fn default_boundary() -> BoundaryConfig {
    BoundaryConfig::Periodic
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorConfig {
    Eigen,
    Riesz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermi_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_index: Option<usize>,
    #[serde(default = "default_gap_width")]
    pub gap_min_width: f64,
    #[serde(default = "default_projector")]
    pub projector: ProjectorConfig,
    #[serde(default = "default_contour_points")]
    pub contour_points: usize,
    #[serde(default)]
    pub quadrature: QuadratureRule,
}

fn default_gap_width() -> f64 {
    0.25
}

fn default_projector() -> ProjectorConfig {
    ProjectorConfig::Eigen
}

fn default_contour_points() -> usize {
    ncbt_core::spectral::DEFAULT_CONTOUR_POINTS
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            fermi_energy: None,
            gap_index: None,
            gap_min_width: default_gap_width(),
            projector: default_projector(),
            contour_points: default_contour_points(),
            quadrature: QuadratureRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantConfig {
    /// One-based axes; all axes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<usize>>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Quantization tolerance; defaults depend on the command and disorder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// k-grid per axis for the Bloch oracles; 64 in 2D and 256 in 1D when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_grid: Option<usize>,
}

fn default_samples() -> usize {
    8
}

impl Default for InvariantConfig {
    fn default() -> Self {
        InvariantConfig {
            axes: None,
            samples: default_samples(),
            seed: 0,
            tolerance: None,
            oracle_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ButterflyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluxes: Option<Vec<Flux>>,
    /// All reduced `p/q` with `0 ≤ p < q ≤ q_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, is_json).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, String> {
        let config: RunConfig = if json {
            serde_json::from_str(text).map_err(|e| e.to_string())?
        } else {
            toml::from_str(text).map_err(|e| e.to_string())?
        };
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<(), String> {
        let s = &self.spectral;
        if s.fermi_energy.is_some() && s.gap_index.is_some() {
            return Err("spectral: give either fermi_energy or gap_index, not both".into());
        }
        if !(s.gap_min_width.is_finite() && s.gap_min_width >= 0.0) {
            return Err("spectral.gap_min_width must be a nonnegative number".into());
        }
        if s.contour_points == 0 {
            return Err("spectral.contour_points must be positive".into());
        }
        if self.invariant.samples == 0 {
            return Err("invariant.samples must be positive".into());
        }
        if self.invariant.oracle_grid.is_some_and(|g| g < 2) {
            return Err("invariant.oracle_grid must be at least 2".into());
        }
        if let Some(t) = self.invariant.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err("invariant.tolerance must be positive".into());
            }
        }
        if let Some(b) = &self.butterfly {
            if b.fluxes.is_some() == b.q_max.is_some() {
                return Err("butterfly: give exactly one of fluxes or q_max".into());
            }
            if b.q_max.is_some_and(|q| q < 1) {
                return Err("butterfly.q_max must be at least 1".into());
            }
        }
        Ok(())
    }

    pub fn disorder_strength(&self) -> f64 {
        match &self.model {
            ModelConfig::Hofstadter { disorder, .. } | ModelConfig::Ssh { disorder, .. } => *disorder,
            ModelConfig::Custom { onsite_disorder, .. } => *onsite_disorder,
        }
    }

    /// The model with its disorder seeded by `seed`.
    pub fn build_model(&self, seed: u64) -> Result<ModelSpec, CliError> {
        let model = match &self.model {
            ModelConfig::Hofstadter { flux, disorder } => {
                let flux = flux.ok_or_else(|| CliError::Config("model.flux is required".into()))?;
                hofstadter(flux.p, flux.q, *disorder, seed)
            }
            ModelConfig::Ssh { t_intra, t_inter, disorder } => ssh(*t_intra, *t_inter, *disorder, seed),
            ModelConfig::Custom { dim, orbital_dim, twist, hoppings, chiral_split, onsite_disorder } => {
                return build_custom(*dim, *orbital_dim, twist, hoppings, *chiral_split, *onsite_disorder, seed);
            }
        };
        model.map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn window(&self, dim: usize, orbital_dim: usize) -> Result<Window, CliError> {
        let w = self.window.as_ref().ok_or_else(|| CliError::Config("missing [window] section".into()))?;
        if w.sizes.len() != dim {
            return Err(CliError::Config(format!("window.sizes has {} entries, the model needs {dim}", w.sizes.len())));
        }
        let boundary = match w.boundary {
            BoundaryConfig::Periodic => Boundary::Periodic,
            BoundaryConfig::Open => Boundary::Open,
        };
        Window::new(w.sizes.clone(), boundary, orbital_dim).map_err(|e| CliError::Config(format!("window: {e}")))
    }

    pub fn margin(&self) -> usize {
        self.window.as_ref().map_or(0, |w| w.margin)
    }

    /// Zero-based axes, defaulting to all of `0..dim`.
    pub fn axes(&self, dim: usize) -> Result<ncbt_core::MultiIndex, CliError> {
        let labels: Vec<usize> = self.invariant.axes.clone().unwrap_or_else(|| (1..=dim).collect());
        ncbt_core::MultiIndex::from_one_based(&labels, dim).map_err(|e| CliError::Config(format!("invariant.axes: {e}")))
    }
}

fn matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{what} must be a {n}×{n} matrix")));
    }
    Ok(rows.iter().flatten().copied().collect())
}

fn build_custom(
    dim: usize,
    n: usize,
    twist: &[TwistEntry],
    hoppings: &[HoppingConfig],
    chiral_split: Option<[usize; 2]>,
    onsite: f64,
    seed: u64,
) -> Result<ModelSpec, CliError> {
    let config_err = |e: ncbt_core::NcError| CliError::Config(format!("model: {e}"));
    if dim == 0 || n == 0 {
        return Err(CliError::Config("model.dim and model.orbital_dim must be positive".into()));
    }
    let mut angles = Vec::with_capacity(twist.len());
    for t in twist {
        if t.col == 0 || t.row <= t.col || t.row > dim {
            return Err(CliError::Config(format!(
                "twist entry ({}, {}) must satisfy 1 ≤ col < row ≤ {dim}",
                t.row, t.col
            )));
        }
        angles.push((t.row - 1, t.col - 1, t.flux.angle()));
    }
    let theta = TwistMatrix::from_lower(dim, &angles).map_err(config_err)?;
    let mut pairs: Vec<(Point, Coefficient)> = Vec::with_capacity(hoppings.len() + 1);
    for h in hoppings {
        let re = matrix(&h.re, n, "hopping re")?;
        let im = match &h.im {
            Some(im) => matrix(im, n, "hopping im")?,
            None => vec![0.0; n * n],
        };
        let values: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        pairs.push((h.shift.clone(), Coefficient::constant(CMat::from_row_slice(n, n, &values))));
    }
    if !(onsite.is_finite() && onsite >= 0.0) {
        return Err(CliError::Config("model.onsite_disorder must be a nonnegative number".into()));
    }
    let disorder = if onsite > 0.0 {
        let origin = vec![0i64; dim];
        let mut spec = DisorderSpec::new(dim, n, DEFAULT_DISORDER_RADIUS, seed).map_err(config_err)?;
        spec.distribution = SiteDistribution::Uniform { low: 0.0, high: 1.0 };
        let site = Coefficient::site_fn(n, move |w| {
            let v = w.value(&origin)?;
            Ok(CMat::from_fn(n, n, |r, c| {
                if r == c {
                    C64::new(onsite * (2.0 * v[r] - 1.0), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }))
        });
        match pairs.iter().position(|(y, _)| y.iter().all(|&c| c == 0)) {
            Some(k) => pairs[k].1 = pairs[k].1.add(&site),
            None => pairs.push((vec![0; dim], site)),
        }
        Some(spec)
    } else {
        None
    };
    let mut spec = from_hoppings(dim, n, theta, pairs, disorder).map_err(config_err)?;
    if let Some([plus, minus]) = chiral_split {
        if plus + minus != n {
            return Err(CliError::Config(format!("chiral_split {plus}+{minus} does not equal orbital_dim {n}")));
        }
        spec.chiral_split = Some((plus, minus));
        spec.validate().map_err(config_err)?;
    }
    Ok(spec)
}
