//! Band-limited `L²`-positive definite kernels on `S^m`, stored by their
//! spherical-harmonic coefficients `a_{k,j}`.
//!
//! Spatial values are synthesized on demand. General (non-zonal) kernels are
//! meaningful spatially only on `S^2`, where [`crate::analysis::HarmonicBasis`]
//! provides a concrete basis; zonal kernels work for every `m ≥ 2`.

use std::cmp::Ordering;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::multipliers::MultiplierFamily;
use crate::quadrature::{sphere_grid, zonal_integral};
use crate::specialfns::{cumulative_dim, gegenbauer_all, gegenbauer_at_one_all, harmonic_dim_usize, surface_area};
use crate::summation::csum;
use crate::{Error, Result, Scalar};

/// Coefficients `c_{k,j}`, `j < d_k^m`, for degrees `k = 0..=K_max`.
///
/// On `S^2` the index `j` follows [`crate::analysis::HarmonicBasis`]: `j = 0`
/// is the zonal harmonic, `j = 2q - 1` and `j = 2q` the `cos qφ` and `sin qφ`
/// harmonics of order `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable<T> {
    m: usize,
    blocks: Vec<Vec<T>>,
}

impl<T: Scalar> CoeffTable<T> {
    pub fn new(m: usize, blocks: Vec<Vec<T>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Shape("coefficient table needs at least degree 0".into()));
        }
        for (k, block) in blocks.iter().enumerate() {
            let d = harmonic_dim_usize(k, m)?;
            if block.len() != d {
                return Err(Error::Shape(format!(
                    "degree {k} block has {} entries, expected d_{k}^{m} = {d}",
                    block.len()
                )));
            }
        }
        Ok(Self { m, blocks })
    }

    pub fn zeros(m: usize, k_max: usize) -> Result<Self> {
        let blocks = (0..=k_max)
            .map(|k| Ok(vec![T::zero(); harmonic_dim_usize(k, m)?]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, blocks })
    }

    /// Table with a single 1 at `(k, j)`.
    pub fn unit(m: usize, k_max: usize, k: usize, j: usize) -> Result<Self> {
        let mut t = Self::zeros(m, k_max)?;
        let slot = t
            .blocks
            .get_mut(k)
            .and_then(|b| b.get_mut(j))
            .ok_or_else(|| Error::Shape(format!("no harmonic ({k}, {j}) below K_max = {k_max}")))?;
        *slot = T::one();
        Ok(t)
    }

    /// I.i.d. standard normal coefficients from a seeded generator.
    pub fn random_normal(m: usize, k_max: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Self::zeros(m, k_max)?;
        for block in &mut t.blocks {
            for c in block.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c = T::of(z);
            }
        }
        Ok(t)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &[T] {
        &self.blocks[k]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [T] {
        &mut self.blocks[k]
    }

    /// `Σ_j |c_{k,j}|²`.
    pub fn degree_energy(&self, k: usize) -> T {
        csum(self.blocks[k].iter().map(|&c| c * c))
    }

    /// `Σ_k Σ_j |c_{k,j}|²`, the squared `L²` norm by Parseval.
    pub fn energy(&self) -> T {
        csum((0..=self.k_max()).map(|k| self.degree_energy(k)))
    }

    /// Multiplies every degree-`k` coefficient by `factors[k]`.
    pub fn scale_degrees(&self, factors: &[T]) -> Result<Self> {
        if factors.len() <= self.k_max() {
            return Err(Error::Shape(format!(
                "need {} degree factors, got {}",
                self.k_max() + 1,
                factors.len()
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(factors)
            .map(|(b, &f)| b.iter().map(|&c| c * f).collect())
            .collect();
        Ok(Self { m: self.m, blocks })
    }

    /// Number of coefficients.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A kernel `K(x, y) = Σ_k Σ_j a_{k,j} Y_{k,j}(x) Y_{k,j}(y)` with
/// `a_{k,j} ≥ 0`, each degree block sorted nonincreasingly.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientKernel<T> {
    table: CoeffTable<T>,
}

impl<T: Scalar> CoefficientKernel<T> {
    /// Validates shape and positivity and sorts each block nonincreasingly.
    pub fn new(m: usize, mut blocks: Vec<Vec<T>>) -> Result<Self> {
        for (k, block) in blocks.iter().enumerate() {
            for (j, &a) in block.iter().enumerate() {
                if !(a >= T::zero()) {
                    return Err(Error::Positivity {
                        k,
                        j,
                        value: a.as_f64(),
                    });
                }
            }
        }
        for block in &mut blocks {
            block.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        }
        Ok(Self {
            table: CoeffTable::new(m, blocks)?,
        })
    }

    /// Seeded random positive kernel: `a_{k,j} = U_{k,j} (1 + k)^{-gamma}`,
    /// `U` uniform on `(0, 1]`.
    pub fn random(m: usize, k_max: usize, gamma: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = (0..=k_max)
            .map(|k| {
                let scale = (1.0 + k as f64).powf(-gamma);
                let d = harmonic_dim_usize(k, m)?;
                Ok((0..d).map(|_| T::of((1.0 - rng.random::<f64>()) * scale)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, blocks)
    }

    pub fn table(&self) -> &CoeffTable<T> {
        &self.table
    }

    pub fn m(&self) -> usize {
        self.table.m
    }

    pub fn k_max(&self) -> usize {
        self.table.k_max()
    }

    pub fn block(&self, k: usize) -> &[T] {
        self.table.block(k)
    }

    /// Kernel with coefficients `a_{k,j}^{1/2}`.
    pub fn sqrt(&self) -> Self {
        let blocks = self
            .table
            .blocks
            .iter()
            .map(|b| b.iter().map(|a| a.sqrt()).collect())
            .collect();
        Self {
            table: CoeffTable { m: self.m(), blocks },
        }
    }

    /// `{η_k^t a_{k,j}}`: the coefficients of `y ↦ M_t(K^y)` relative to
    /// `Y_{k,j}(x) Y_{k,j}(y)`.
    pub fn apply_multiplier_section(&self, family: &MultiplierFamily<T>, t: T) -> Result<CoeffTable<T>> {
        check_family_dim(family, self.m())?;
        let eta = family.eval_upto(self.k_max(), t)?;
        self.table.scale_degrees(&eta)
    }

    /// Coefficients of `𝒦 f` for `f` given by its coefficients; `𝒦` acts
    /// diagonally, `𝒦 Y_{k,j} = a_{k,j} Y_{k,j}`.
    pub fn operator_apply(&self, f: &CoeffTable<T>) -> Result<CoeffTable<T>> {
        if f.m() != self.m() || f.k_max() > self.k_max() {
            return Err(Error::Shape(format!(
                "input band limit {} on S^{} does not fit kernel band limit {} on S^{}",
                f.k_max(),
                f.m(),
                self.k_max(),
                self.m()
            )));
        }
        let blocks = f
            .blocks
            .iter()
            .zip(&self.table.blocks)
            .map(|(fb, kb)| fb.iter().zip(kb).map(|(&c, &a)| a * c).collect())
            .collect();
        Ok(CoeffTable { m: f.m, blocks })
    }

    /// Whether no coefficient of a degree exceeds any coefficient of an
    /// earlier degree (`a_{n,j} ≤ a_{k,l}` for `n ≥ k`).
    pub fn is_degreewise_dominated(&self) -> bool {
        let blocks = &self.table.blocks;
        let mut later_max = T::neg_infinity();
        for k in (0..blocks.len()).rev() {
            let (lo, hi) = block_range(&blocks[k]);
            if blocks[k].is_empty() {
                continue;
            }
            if lo < later_max {
                return false;
            }
            later_max = later_max.max(hi);
        }
        true
    }
}

fn block_range<T: Scalar>(block: &[T]) -> (T, T) {
    block.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &a| {
        (lo.min(a), hi.max(a))
    })
}

fn check_family_dim<T: Scalar>(family: &MultiplierFamily<T>, m: usize) -> Result<()> {
    if family.m() != m {
        return Err(Error::Shape(format!(
            "family {} is defined on S^{}, kernel on S^{m}",
            family.name(),
            family.m()
        )));
    }
    Ok(())
}

/// A zonal kernel `K(x, y) = Σ_k a_k d_k^m C_k(x·y) / C_k(1)`, i.e.
/// `a_{k,j} = a_k` for every `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalKernel<T> {
    m: usize,
    a: Vec<T>,
    dims: Vec<T>,
}

impl<T: Scalar> ZonalKernel<T> {
    pub fn new(m: usize, a: Vec<T>) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("zonal kernels need m >= 2, got {m}")));
        }
        if a.is_empty() {
            return Err(Error::Shape("zonal kernel needs at least a_0".into()));
        }
        for (k, &v) in a.iter().enumerate() {
            if !(v >= T::zero()) {
                return Err(Error::Positivity {
                    k,
                    j: 0,
                    value: v.as_f64(),
                });
            }
        }
        let dims = (0..a.len())
            .map(|k| Ok(T::of(crate::specialfns::harmonic_dim(k, m)? as f64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, a, dims })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_max(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coefficients(&self) -> &[T] {
        &self.a
    }

    /// `d_k^m` as scalars.
    pub fn dims(&self) -> &[T] {
        &self.dims
    }

    /// `A_k = d_k^m a_k`, the trace carried by degree `k`.
    pub fn block_sums(&self) -> Vec<T> {
        self.a.iter().zip(&self.dims).map(|(&a, &d)| a * d).collect()
    }

    pub fn sqrt(&self) -> Self {
        Self {
            m: self.m,
            a: self.a.iter().map(|a| a.sqrt()).collect(),
            dims: self.dims.clone(),
        }
    }

    /// Expands to the general coefficient representation.
    pub fn to_coefficient_kernel(&self) -> Result<CoefficientKernel<T>> {
        let blocks = self
            .a
            .iter()
            .enumerate()
            .map(|(k, &a)| Ok(vec![a; harmonic_dim_usize(k, self.m)?]))
            .collect::<Result<Vec<_>>>()?;
        CoefficientKernel::new(self.m, blocks)
    }

    /// `K(x, y)` as a function of `u = x·y`.
    pub fn synthesize(&self, u: T) -> T {
        let mut buf = Vec::new();
        synthesize_profile(&self.block_sums(), self.m, u, &mut buf)
    }

    /// `{η_k^t a_k}` as a zonal coefficient list.
    pub fn apply_multiplier_section(&self, family: &MultiplierFamily<T>, t: T) -> Result<Vec<T>> {
        check_family_dim(family, self.m)?;
        let eta = family.eval_upto(self.k_max(), t)?;
        Ok(self.a.iter().zip(eta.iter()).map(|(&a, &e)| a * e).collect())
    }
}

/// `Σ_k c_k C_k(u) / C_k(1)` with `λ = (m - 1)/2`; `c_k` already carries
/// any `d_k^m` factor. `buf` is scratch space for the recurrence.
pub fn synthesize_profile<T: Scalar>(c: &[T], m: usize, u: T, buf: &mut Vec<T>) -> T {
    if c.is_empty() {
        return T::zero();
    }
    let lambda = T::of((m as f64 - 1.0) / 2.0);
    let k_max = c.len() - 1;
    gegenbauer_all(k_max, lambda, u, buf);
    let at_one = gegenbauer_at_one_all::<T>(k_max, lambda);
    csum(
        c.iter()
            .zip(buf.iter())
            .zip(&at_one)
            .map(|((&ck, &g), &g1)| ck * g / g1),
    )
}

/// Test kernel `a_k = (1 + k)^{-gamma}`.
///
/// The eigenvalue sum `Σ a_k d_k^m` of the untruncated kernel converges only
/// for `gamma > m`; smaller exponents are accepted (the kernel is band-limited)
/// but logged.
pub fn power_law_zonal<T: Scalar>(m: usize, k_max: usize, gamma: f64) -> Result<ZonalKernel<T>> {
    if !(gamma > m as f64) {
        log::warn!("power_law_zonal: gamma = {gamma} <= m = {m}; untruncated trace would diverge");
    }
    let a = (0..=k_max).map(|k| T::of((1.0 + k as f64).powf(-gamma))).collect();
    ZonalKernel::new(m, a)
}

/// Coefficient access shared by zonal and general kernels.
pub trait KernelSpectrum<T: Scalar> {
    fn sphere_dim(&self) -> usize;
    fn band_limit(&self) -> usize;
    /// `Σ_j a_{k,j}`.
    fn degree_sum(&self, k: usize) -> T;
    /// `Σ_j a_{k,j}²`.
    fn degree_sq_sum(&self, k: usize) -> T;
    fn eigenvalue_sequence(&self) -> Result<EigenvalueSequence<T>>;
}

impl<T: Scalar> KernelSpectrum<T> for CoefficientKernel<T> {
    fn sphere_dim(&self) -> usize {
        self.m()
    }

    fn band_limit(&self) -> usize {
        self.k_max()
    }

    fn degree_sum(&self, k: usize) -> T {
        csum(self.block(k).iter().copied())
    }

    fn degree_sq_sum(&self, k: usize) -> T {
        self.table.degree_energy(k)
    }

    fn eigenvalue_sequence(&self) -> Result<EigenvalueSequence<T>> {
        let entries = self
            .table
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(k, b)| b.iter().enumerate().map(move |(j, &a)| (a, k, j)));
        EigenvalueSequence::from_entries(entries.collect(), self.m(), self.k_max())
    }
}

impl<T: Scalar> KernelSpectrum<T> for ZonalKernel<T> {
    fn sphere_dim(&self) -> usize {
        self.m
    }

    fn band_limit(&self) -> usize {
        self.k_max()
    }

    fn degree_sum(&self, k: usize) -> T {
        self.a[k] * self.dims[k]
    }

    fn degree_sq_sum(&self, k: usize) -> T {
        self.a[k] * self.a[k] * self.dims[k]
    }

    fn eigenvalue_sequence(&self) -> Result<EigenvalueSequence<T>> {
        let mut entries = Vec::new();
        for (k, &a) in self.a.iter().enumerate() {
            for j in 0..harmonic_dim_usize(k, self.m)? {
                entries.push((a, k, j));
            }
        }
        EigenvalueSequence::from_entries(entries, self.m, self.k_max())
    }
}

/// Eigenvalues `λ_1 ≥ λ_2 ≥ …` of the integral operator, with multiplicity,
/// and the `(k, j)` coefficient each one came from (`j` zero-based).
///
/// Ties are broken by `(k, j)` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueSequence<T> {
    lambdas: Vec<T>,
    provenance: Vec<(usize, usize)>,
}

impl<T: Scalar> EigenvalueSequence<T> {
    fn from_entries(mut entries: Vec<(T, usize, usize)>, m: usize, k_max: usize) -> Result<Self> {
        let expected = cumulative_dim(k_max, m)?;
        debug_assert_eq!(entries.len() as u128, expected);
        // entries arrive in (k, j) order; a stable sort keeps it among ties
        entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        Ok(Self {
            lambdas: entries.iter().map(|e| e.0).collect(),
            provenance: entries.iter().map(|e| (e.1, e.2)).collect(),
        })
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn provenance(&self) -> &[(usize, usize)] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `λ_n` with the usual 1-based index.
    pub fn lambda(&self, n: usize) -> Option<T> {
        n.checked_sub(1).and_then(|i| self.lambdas.get(i).copied())
    }
}

/// Outcome of checking `(1/ω_m) ∫ K_{1/2}(x, y) K_{1/2}(w, x) dσ(x) = K(w, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproducingReport {
    pub max_residual: f64,
    pub pairs_checked: usize,
    pub exact_degree: usize,
}

/// Checks the square-root reproducing identity for a zonal kernel.
///
/// On `S^2` the `x`-integral runs over a product grid exact to degree
/// `grid_degree` at `n_pairs` seeded random pairs `(w, y)` plus the diagonal.
/// For `m > 2` only diagonal pairs are checked, through the zonal reduction
/// `zonal_integral(K_{1/2}(u)², m) = K(1)`.
pub fn reproducing_check<T: Scalar>(
    kern: &ZonalKernel<T>,
    grid_degree: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<ReproducingReport> {
    let half = kern.sqrt();
    let k_max = kern.k_max();
    if grid_degree < 2 * k_max {
        return Err(Error::Domain(format!(
            "quadrature exact to degree {grid_degree} cannot resolve band limit {k_max}"
        )));
    }
    let half_sums = half.block_sums();
    let full_sums = kern.block_sums();
    let mut buf = Vec::new();
    if kern.m() != 2 {
        let lhs = zonal_integral(
            |u| {
                let mut b = Vec::new();
                let v = synthesize_profile(&half_sums, kern.m(), u, &mut b);
                v * v
            },
            kern.m(),
            grid_degree / 2 + 1,
        )?;
        let rhs = synthesize_profile(&full_sums, kern.m(), T::one(), &mut buf);
        return Ok(ReproducingReport {
            max_residual: (lhs - rhs).abs().as_f64(),
            pairs_checked: 1,
            exact_degree: grid_degree,
        });
    }

    let grid = sphere_grid::<T>(grid_degree.div_ceil(2))?;
    let points = grid.points();
    let omega = surface_area::<T>(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_point = || -> [T; 3] {
        loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if r > 1e-8 {
                return [T::of(v[0] / r), T::of(v[1] / r), T::of(v[2] / r)];
            }
        }
    };
    let mut pairs: Vec<([T; 3], [T; 3])> = Vec::with_capacity(n_pairs + 1);
    let pole = [T::zero(), T::zero(), T::one()];
    pairs.push((pole, pole));
    for _ in 0..n_pairs {
        let w = random_point();
        let y = random_point();
        pairs.push((w, y));
    }
    let dot = |a: &[T; 3], b: &[T; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let n_phi = grid.n_phi();
    let mut max_residual = T::zero();
    for (w, y) in &pairs {
        let values: Vec<T> = points
            .par_iter()
            .map_init(Vec::new, |b, x| {
                let ky = synthesize_profile(&half_sums, 2, dot(x, y), b);
                let kw = synthesize_profile(&half_sums, 2, dot(w, x), b);
                ky * kw
            })
            .collect();
        debug_assert_eq!(values.len(), grid.n_theta() * n_phi);
        let lhs = grid.integrate(&values)? / omega;
        let rhs = synthesize_profile(&full_sums, 2, dot(w, y), &mut buf);
        max_residual = max_residual.max((lhs - rhs).abs());
    }
    Ok(ReproducingReport {
        max_residual: max_residual.as_f64(),
        pairs_checked: pairs.len(),
        exact_degree: grid.exact_degree(),
    })
}

/// Current kernel file format version.
pub const KERNEL_FORMAT_VERSION: u32 = 1;

/// On-disk kernel document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub version: u32,
    pub m: usize,
    #[serde(rename = "K_max")]
    pub k_max: usize,
    pub zonal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
}

/// A kernel read from a document.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedKernel {
    Zonal(ZonalKernel<f64>),
    General(CoefficientKernel<f64>),
}

impl LoadedKernel {
    pub fn m(&self) -> usize {
        match self {
            Self::Zonal(z) => z.m(),
            Self::General(g) => g.m(),
        }
    }

    pub fn k_max(&self) -> usize {
        match self {
            Self::Zonal(z) => z.k_max(),
            Self::General(g) => g.k_max(),
        }
    }

    pub fn spectrum(&self) -> &dyn KernelSpectrum<f64> {
        match self {
            Self::Zonal(z) => z,
            Self::General(g) => g,
        }
    }
}

impl KernelDocument {
    pub fn from_zonal(k: &ZonalKernel<f64>) -> Self {
        Self {
            version: KERNEL_FORMAT_VERSION,
            m: k.m(),
            k_max: k.k_max(),
            zonal: true,
            blocks: None,
            a: Some(k.coefficients().to_vec()),
        }
    }

    pub fn from_general(k: &CoefficientKernel<f64>) -> Self {
        Self {
            version: KERNEL_FORMAT_VERSION,
            m: k.m(),
            k_max: k.k_max(),
            zonal: false,
            blocks: Some(k.table().blocks().to_vec()),
            a: None,
        }
    }

    pub fn into_kernel(self) -> Result<LoadedKernel> {
        if self.version != KERNEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported kernel format version {} (expected {KERNEL_FORMAT_VERSION})",
                self.version
            )));
        }
        let kernel = match (self.zonal, self.a, self.blocks) {
            (true, Some(a), _) => LoadedKernel::Zonal(ZonalKernel::new(self.m, a)?),
            (false, _, Some(blocks)) => LoadedKernel::General(CoefficientKernel::new(self.m, blocks)?),
            (true, None, _) => return Err(Error::Config("zonal kernel document lacks `a`".into())),
            (false, _, None) => return Err(Error::Config("kernel document lacks `blocks`".into())),
        };
        if kernel.k_max() != self.k_max {
            return Err(Error::Shape(format!(
                "document declares K_max = {} but carries degrees up to {}",
                self.k_max,
                kernel.k_max()
            )));
        }
        Ok(kernel)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
