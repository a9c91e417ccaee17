//! Fourier-sum identities and inequalities for `M f - f` and for kernel
//! sections `M(K^y) - K^y`.

use rayon::prelude::*;
use serde::Serialize;

use crate::kernels::{synthesize_profile, CoeffTable, CoefficientKernel, ZonalKernel};
use crate::multipliers::MultiplierFamily;
use crate::quadrature::zonal_integral;
use crate::specialfns::{harmonic_dim, surface_area};
use crate::summation::csum;
use crate::{Error, Result, Scalar};

use super::HarmonicBasis;

/// Two independently computed sides of an identity or inequality and the
/// residual (identities) or margin `rhs - lhs` (inequalities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub value: f64,
}

impl Comparison {
    fn residual(lhs: f64, rhs: f64) -> Self {
        let diff = (lhs - rhs).abs();
        let value = if diff == 0.0 {
            0.0
        } else {
            diff / lhs.abs().max(f64::MIN_POSITIVE)
        };
        Self { lhs, rhs, value }
    }

    fn margin(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            value: rhs - lhs,
        }
    }
}

/// Constant in front of `‖Mf - f‖_p` on the right of the Hausdorff–Young-type
/// bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HyConstant {
    /// `ω_m^{(p-2)/2p}` (`ω_m^{-1/2}` for `p = 1`).
    Stated,
    /// `1`, the sharp constant for normalized norms and coefficients.
    Normalized,
}

impl HyConstant {
    pub fn factor(self, m: usize, p: f64) -> Result<f64> {
        Ok(match self {
            Self::Stated => surface_area::<f64>(m)?.powf((p - 2.0) / (2.0 * p)),
            Self::Normalized => 1.0,
        })
    }
}

fn dims(m: usize, k_max: usize) -> Result<Vec<f64>> {
    (0..=k_max).map(|k| Ok(harmonic_dim(k, m)? as f64)).collect()
}

/// `(deviations 1 - η_k, Σ_j |f̂(k, j)|²)` and the values of `M f - f` on the grid.
fn deviation_field<T: Scalar>(
    basis: &HarmonicBasis<T>,
    f: &CoeffTable<T>,
    family: &MultiplierFamily<T>,
    t: T,
) -> Result<(Vec<f64>, Vec<f64>, Vec<T>)> {
    let dev = family.deviations_upto(f.k_max(), t)?;
    let energies: Vec<f64> = (0..=f.k_max()).map(|k| f.degree_energy(k).as_f64()).collect();
    let factors: Vec<T> = dev.iter().map(|&d| -d).collect();
    let g = basis.synthesize(&f.scale_degrees(&factors)?)?;
    Ok((dev.iter().map(|d| d.as_f64()).collect(), energies, g))
}

/// `Σ_k |η_k - 1|² Σ_j |f̂(k, j)|²` against `‖M f - f‖_2²` synthesized on the
/// grid; `value` is the relative residual.
pub fn parseval_equality_check<T: Scalar>(
    basis: &HarmonicBasis<T>,
    f: &CoeffTable<T>,
    family: &MultiplierFamily<T>,
    t: T,
) -> Result<Comparison> {
    let (dev, energies, g) = deviation_field(basis, f, family, t)?;
    let lhs = csum(dev.iter().zip(&energies).map(|(d, e)| d * d * e));
    let norm = basis.lp_norm(&g, T::of(2.0))?.as_f64();
    Ok(Comparison::residual(lhs, norm * norm))
}

/// `{Σ_k d_k^{(2-q)/2q} |η_k - 1|^q [Σ_j |f̂(k, j)|²]^{q/2}}^{1/q}` against
/// `c ‖M f - f‖_p`, `1 < p ≤ 2`, `q = p/(p-1)`; `value` is the margin.
pub fn hausdorff_young_check<T: Scalar>(
    basis: &HarmonicBasis<T>,
    f: &CoeffTable<T>,
    family: &MultiplierFamily<T>,
    t: T,
    p: f64,
    constant: HyConstant,
) -> Result<Comparison> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::Domain(format!(
            "Hausdorff–Young check needs p in (1, 2], got {p}"
        )));
    }
    let q = p / (p - 1.0);
    let (dev, energies, g) = deviation_field(basis, f, family, t)?;
    let d = dims(2, f.k_max())?;
    let sum = csum(
        dev.iter()
            .zip(&energies)
            .zip(&d)
            .map(|((dv, e), dk)| dk.powf((2.0 - q) / (2.0 * q)) * dv.abs().powf(q) * e.powf(q / 2.0)),
    );
    let lhs = sum.powf(1.0 / q);
    let rhs = constant.factor(2, p)? * basis.lp_norm(&g, T::of(p))?.as_f64();
    Ok(Comparison::margin(lhs, rhs))
}

/// `sup_k d_k^{-1/2} |η_k - 1| [Σ_j |f̂(k, j)|²]^{1/2}` against `c ‖M f - f‖_1`;
/// `value` is the margin.
pub fn l1_sup_check<T: Scalar>(
    basis: &HarmonicBasis<T>,
    f: &CoeffTable<T>,
    family: &MultiplierFamily<T>,
    t: T,
    constant: HyConstant,
) -> Result<Comparison> {
    let (dev, energies, g) = deviation_field(basis, f, family, t)?;
    let d = dims(2, f.k_max())?;
    let lhs = dev
        .iter()
        .zip(&energies)
        .zip(&d)
        .map(|((dv, e), dk)| dv.abs() * e.sqrt() / dk.sqrt())
        .fold(0.0, f64::max);
    let rhs = constant.factor(2, 1.0)? * basis.lp_norm(&g, T::one())?.as_f64();
    Ok(Comparison::margin(lhs, rhs))
}

/// Zonal path of the kernel identity:
/// `Σ_k |η_k - 1|² a_k² d_k` against `‖M(K^y) - K^y‖_2²` computed as the
/// normalized `S^m` integral of the squared zonal profile
/// `u ↦ Σ_k (η_k - 1) a_k d_k C_k(u)/C_k(1)`.
pub fn kernel_identity_zonal<T: Scalar>(
    kern: &ZonalKernel<T>,
    family: &MultiplierFamily<T>,
    t: T,
) -> Result<Comparison> {
    let dev = family.deviations_upto(kern.k_max(), t)?;
    let a = kern.coefficients();
    let d = kern.dims();
    let lhs = csum((0..=kern.k_max()).map(|k| dev[k] * dev[k] * a[k] * a[k] * d[k]));
    let profile: Vec<T> = (0..=kern.k_max()).map(|k| -dev[k] * a[k] * d[k]).collect();
    let rhs = zonal_integral(
        |u| {
            let mut buf = Vec::new();
            let g = synthesize_profile(&profile, kern.m(), u, &mut buf);
            g * g
        },
        kern.m(),
        kern.k_max() + 1,
    )?;
    Ok(Comparison::residual(lhs.as_f64(), rhs.as_f64()))
}

/// Grid path of the kernel identity on `S^2`:
/// `Σ_k |η_k - 1|² Σ_j a_{k,j}²` against
/// `(1/ω_2) ∫ ‖M(K^y) - K^y‖_2² dσ(y)`, with both the inner norm and the outer
/// integral taken by grid quadrature.
pub fn kernel_identity_grid<T: Scalar>(
    basis: &HarmonicBasis<T>,
    kern: &CoefficientKernel<T>,
    family: &MultiplierFamily<T>,
    t: T,
) -> Result<Comparison> {
    let dev = family.deviations_upto(kern.k_max(), t)?;
    let lhs = csum((0..=kern.k_max()).map(|k| dev[k] * dev[k] * kern.table().degree_energy(k)));
    let factors: Vec<T> = dev.iter().map(|&d| -d).collect();
    let scaled = kern.table().scale_degrees(&factors)?;
    let grid = basis.grid();
    let nodes: Vec<(usize, usize)> = (0..grid.n_theta())
        .flat_map(|r| (0..grid.n_phi()).map(move |l| (r, l)))
        .collect();
    let inner: Vec<T> = nodes
        .par_iter()
        .map(|&(r, l)| {
            let section = basis.section(&scaled, r, l)?;
            let values = basis.synthesize(&section)?;
            let norm = basis.lp_norm(&values, T::of(2.0))?;
            Ok(norm * norm)
        })
        .collect::<Result<_>>()?;
    let rhs = grid.integrate(&inner)? / surface_area::<T>(2)?;
    Ok(Comparison::residual(lhs.as_f64(), rhs.as_f64()))
}

/// Outcome of the square-root deviation identity
/// `‖M(K_{1/2}^y) - K_{1/2}^y‖_2² = M(M(K^y) - K^y)(y) - (M(K^y) - K^y)(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtIdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `(|η_0^t| + 1) g(t)` with `g` the integrated diagonal deviation.
    pub bound: f64,
    pub bound_holds: bool,
}

/// Checks the identity on a zonal kernel. The left side comes from the
/// coefficients of `K_{1/2}`; the right side synthesizes the zonal profile of
/// `M(M(K^y) - K^y) - (M(K^y) - K^y)` at `u = 1`.
pub fn sqrt_deviation_identity_check<T: Scalar>(
    kern: &ZonalKernel<T>,
    family: &MultiplierFamily<T>,
    t: T,
) -> Result<SqrtIdentityReport> {
    let k_max = kern.k_max();
    let dev = family.deviations_upto(k_max, t)?;
    let eta = family.eval_upto(k_max, t)?;
    let half = kern.sqrt();
    let d = kern.dims();
    let lhs = csum((0..=k_max).map(|k| {
        let c = -dev[k] * half.coefficients()[k];
        c * c * d[k]
    }));
    let profile: Vec<T> = (0..=k_max)
        .map(|k| {
            let dm1 = -dev[k];
            (eta[k] * dm1 - dm1) * kern.coefficients()[k] * d[k]
        })
        .collect();
    let mut buf = Vec::new();
    let rhs = synthesize_profile(&profile, kern.m(), T::one(), &mut buf);
    let g = super::holder::holder_integral(kern, family, t)?;
    let bound = (eta[0].abs() + T::one()).as_f64() * g;
    let cmp = Comparison::residual(lhs.as_f64(), rhs.as_f64());
    Ok(SqrtIdentityReport {
        lhs: cmp.lhs,
        rhs: cmp.rhs,
        residual: cmp.value,
        bound,
        bound_holds: cmp.lhs <= bound * (1.0 + 1e-12),
    })
}
