//! Experiment configuration for the `sphmult` runner.
//!
//! A config is one self-contained TOML or JSON document (chosen by file
//! extension). Every field has a default, so an empty document is valid and
//! `print-config` shows the complete effective configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::kernels::{power_law_zonal, CoefficientKernel, KernelDocument, LoadedKernel, ZonalKernel};
use crate::multipliers::{MultiplierFamily, MultiplierTable, QuadPolicy, FAMILY_NAMES};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base seed; campaign `i` uses `seed + i`.
    pub seed: u64,
    pub family: FamilySpec,
    pub kernel: KernelSpec,
    pub lattice: LatticeSpec,
    pub tolerances: Tolerances,
    pub output: OutputSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            family: FamilySpec::default(),
            kernel: KernelSpec::default(),
            lattice: LatticeSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySpec {
    /// One of `shifting`, `combo`, `cap`, `steklov`, `custom`.
    pub name: String,
    /// Sphere dimension.
    pub m: usize,
    /// Order of the `combo` family.
    pub l: usize,
    /// Fixed Gauss node count for `cap` and `steklov`; 0 selects the
    /// degree-bucketed default.
    pub quadrature_nodes: usize,
    /// `(k, t, η)` rows of the `custom` family.
    pub table: Vec<(usize, f64, f64)>,
    /// Declared smoothness order of the `custom` family.
    pub declared_s: Option<f64>,
    /// Declared uniform bound of the `custom` family.
    pub declared_uniform_bound: f64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self {
            name: "shifting".into(),
            m: 2,
            l: 2,
            quadrature_nodes: 0,
            table: Vec::new(),
            declared_s: None,
            declared_uniform_bound: 1.0,
        }
    }
}

impl FamilySpec {
    pub fn build(&self) -> Result<MultiplierFamily<f64>> {
        let fam = if self.name == "custom" {
            if self.table.is_empty() {
                return Err(Error::Config("the custom family needs a non-empty `table`".into()));
            }
            let table: MultiplierTable<f64> = self.table.iter().copied().collect();
            MultiplierFamily::custom(self.m, table, self.declared_s, self.declared_uniform_bound)
        } else {
            MultiplierFamily::by_name(&self.name, self.m, self.l)?
        };
        Ok(match self.quadrature_nodes {
            0 => fam,
            n => fam.with_quadrature(QuadPolicy::Fixed(n)),
        })
    }
}

/// Where the kernel comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Zonal `a_k = (1+k)^{-γ}` on `S^m` with `m` taken from the family.
    PowerLaw {
        #[serde(default = "default_kernel_k_max")]
        k_max: usize,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    /// Zonal kernel with the given per-degree coefficients.
    Zonal { a: Vec<f64> },
    /// General kernel with coefficient blocks `a_{k,j}`.
    Blocks { blocks: Vec<Vec<f64>> },
    /// Seeded random general kernel `a_{k,j} = U(0,1] (1+k)^{-γ}`.
    Random {
        #[serde(default = "default_kernel_k_max")]
        k_max: usize,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    /// Kernel document on disk.
    File { path: PathBuf },
}

fn default_kernel_k_max() -> usize {
    256
}

fn default_gamma() -> f64 {
    3.5
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::PowerLaw {
            k_max: default_kernel_k_max(),
            gamma: default_gamma(),
        }
    }
}

impl KernelSpec {
    pub fn build(&self, m: usize, seed: u64) -> Result<LoadedKernel> {
        let kern = match self {
            Self::PowerLaw { k_max, gamma } => LoadedKernel::Zonal(power_law_zonal(m, *k_max, *gamma)?),
            Self::Zonal { a } => LoadedKernel::Zonal(ZonalKernel::new(m, a.clone())?),
            Self::Blocks { blocks } => LoadedKernel::General(CoefficientKernel::new(m, blocks.clone())?),
            Self::Random { k_max, gamma } => LoadedKernel::General(CoefficientKernel::random(m, *k_max, *gamma, seed)?),
            Self::File { path } => KernelDocument::read(path)
                .map_err(|e| Error::Config(format!("kernel file {}: {e}", path.display())))?
                .into_kernel()?,
        };
        if kern.m() != m {
            return Err(Error::Config(format!(
                "kernel lives on S^{} but the family on S^{m}",
                kern.m()
            )));
        }
        Ok(kern)
    }

    fn set_k_max(&mut self, k: usize) {
        if let Self::PowerLaw { k_max, .. } | Self::Random { k_max, .. } = self {
            *k_max = k;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    /// Degree range of the `multipliers` table.
    pub k_min: usize,
    pub k_max: usize,
    /// `t` values of the `multipliers` table and the identity checks.
    pub t_values: Vec<f64>,
    /// Band limit of the random test functions.
    pub function_k_max: usize,
    /// Number of seeded random test functions.
    pub n_functions: usize,
    /// Exponents of the Hausdorff–Young check.
    pub p_values: Vec<f64>,
    /// Log-spaced fit grid `[lo, hi]` with `fit_points` points.
    pub fit_window: (f64, f64),
    pub fit_points: usize,
    /// Fit window of the pipeline's Hölder stage. Below `t ≈ 1/K_max` every
    /// `kt < 1` and a band-limited `g(t)` behaves like `t^s`, so the lower end
    /// should sit well above `1/K_max`.
    pub pipeline_window: (f64, f64),
    /// Hölder exponent for the `keyabst` and `decay` checks.
    pub beta: f64,
    /// First `n` of the dyadic decay windows.
    pub decay_lo: usize,
    /// Half-bounded diagnostic ranges `K` and `N`.
    pub half_k: usize,
    pub half_n: usize,
    /// Quadrature exactness (0 selects `2 K_max`) and random pairs of the
    /// reproducing check.
    pub grid_degree: usize,
    pub n_pairs: usize,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            k_min: 0,
            k_max: 32,
            t_values: vec![0.1, 0.5, 1.0],
            function_k_max: 32,
            n_functions: 100,
            p_values: vec![1.25, 1.5, 1.75],
            fit_window: (1e-3, 1e-1),
            fit_points: 21,
            pipeline_window: (1e-2, 1e-1),
            beta: 1.5,
            decay_lo: 16,
            half_k: 200,
            half_n: 100,
            grid_degree: 0,
            n_pairs: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub parseval: f64,
    /// Smallest admissible margin is `-hy_margin`.
    pub hy_margin: f64,
    /// `stated` (`ω^{(p-2)/2p}`) or `normalized` (`1`).
    pub hy_constant: String,
    pub kernel_identity_grid: f64,
    pub kernel_identity_zonal: f64,
    pub lemma23: f64,
    pub reproducing: f64,
    /// Largest admissible ratio between dyadic window suprema.
    pub decay_growth: f64,
    /// `keyabst` passes when `sup S(t)/t^β` stays below this.
    pub keyabst_ratio: f64,
    /// The pipeline's half-bounded stage passes when `M_lower` exceeds this.
    pub m_lower_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            parseval: 1e-9,
            hy_margin: 1e-6,
            hy_constant: "stated".into(),
            kernel_identity_grid: 1e-9,
            kernel_identity_zonal: 1e-12,
            lemma23: 1e-12,
            reproducing: 1e-9,
            decay_growth: 2.0,
            keyabst_ratio: 1e6,
            m_lower_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Command-line overrides applied on top of a config document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub family: Option<String>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub k_max: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads a `.toml` or `.json` document.
    pub fn read(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            Some("json") => {
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            _ => {
                return Err(Error::Config(format!(
                    "{}: config must have a .toml or .json extension",
                    path.display()
                )))
            }
        };
        // relative kernel paths resolve against the config's directory
        let mut cfg = cfg;
        if let KernelSpec::File { path: kp } = &mut cfg.kernel {
            if kp.is_relative() {
                if let Some(dir) = path.parent() {
                    *kp = dir.join(&*kp);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(f) = &o.family {
            self.family.name = f.clone();
        }
        if let Some(m) = o.m {
            self.family.m = m;
        }
        if let Some(l) = o.l {
            self.family.l = l;
        }
        if let Some(k) = o.k_max {
            self.lattice.k_max = k;
            self.lattice.function_k_max = k;
            self.kernel.set_k_max(k);
        }
        if let Some(d) = &o.out {
            self.output.dir = d.clone();
        }
    }

    /// Checks ranges and tolerances.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !FAMILY_NAMES.contains(&self.family.name.as_str()) {
            return bad(format!(
                "unknown family `{}`; valid names: {}",
                self.family.name,
                FAMILY_NAMES.join(", ")
            ));
        }
        if self.family.m < 1 {
            return bad("family.m must be at least 1".into());
        }
        let l = &self.lattice;
        if l.k_min > l.k_max {
            return bad(format!("empty degree range [{}, {}]", l.k_min, l.k_max));
        }
        if l.t_values.is_empty() {
            return bad("empty t grid".into());
        }
        if l.t_values.iter().any(|t| !t.is_finite()) {
            return bad("t grid contains a non-finite value".into());
        }
        if l.n_functions == 0 {
            return bad("lattice.n_functions must be positive".into());
        }
        if l.p_values.is_empty() {
            return bad("empty p grid".into());
        }
        for (lo, hi) in [l.fit_window, l.pipeline_window] {
            if !(lo > 0.0 && hi > lo) {
                return bad(format!("fit window [{lo}, {hi}] must satisfy 0 < lo < hi"));
            }
        }
        if l.fit_points == 0 {
            return bad("lattice.fit_points must be positive".into());
        }
        if l.decay_lo == 0 {
            return bad("lattice.decay_lo must be positive".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("parseval", t.parseval),
            ("hy_margin", t.hy_margin),
            ("kernel_identity_grid", t.kernel_identity_grid),
            ("kernel_identity_zonal", t.kernel_identity_zonal),
            ("lemma23", t.lemma23),
            ("reproducing", t.reproducing),
            ("decay_growth", t.decay_growth),
            ("keyabst_ratio", t.keyabst_ratio),
            ("m_lower_floor", t.m_lower_floor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        self.hy_constant()?;
        if let KernelSpec::File { path } = &self.kernel {
            if !path.exists() {
                return bad(format!("kernel file {} does not exist", path.display()));
            }
        }
        Ok(())
    }

    pub fn hy_constant(&self) -> Result<crate::analysis::HyConstant> {
        use crate::analysis::HyConstant;
        match self.tolerances.hy_constant.as_str() {
            "stated" => Ok(HyConstant::Stated),
            "normalized" => Ok(HyConstant::Normalized),
            other => Err(Error::Config(format!(
                "hy_constant must be `stated` or `normalized`, got `{other}`"
            ))),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
