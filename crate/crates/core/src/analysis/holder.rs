//! The integrated diagonal deviation `g(t)`, log-log exponent fits, and the
//! key sum `S(t) = Σ_k |η_k^t - 1|² A_k`.
//!
//! `g(t)` is normalized by `1/ω_m` like every other integral here; this
//! rescales the Hölder constant, not the exponent.

use rayon::prelude::*;
use serde::Serialize;

use crate::kernels::{CoefficientKernel, KernelSpectrum};
use crate::multipliers::MultiplierFamily;
use crate::specialfns::surface_area;
use crate::summation::csum;
use crate::{Error, Result, Scalar};

use super::HarmonicBasis;

/// Values of `g` at or below this are excluded from log-log fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// `g(t) = (1/ω_m) ∫ |M_t(K^y)(y) - K^y(y)| dσ(y)` through the degree sums:
/// `|Σ_k (η_k^t - 1) A_k|`, `A_k = Σ_j a_{k,j}`.
///
/// Exact for zonal kernels (the diagonal deviation is constant in `y`) and
/// for any kernel when the deviations `1 - η_k^t` share one sign, since then
/// the integrand does not change sign.
pub fn holder_integral<T: Scalar>(kern: &dyn KernelSpectrum<T>, family: &MultiplierFamily<T>, t: T) -> Result<f64> {
    let dev = family.deviations_upto(kern.band_limit(), t)?;
    let s = csum((0..=kern.band_limit()).map(|k| dev[k] * kern.degree_sum(k)));
    Ok(s.abs().as_f64())
}

/// `g(t)` for a general kernel on `S^2` by grid quadrature of the diagonal.
pub fn holder_integral_grid<T: Scalar>(
    basis: &HarmonicBasis<T>,
    kern: &CoefficientKernel<T>,
    family: &MultiplierFamily<T>,
    t: T,
) -> Result<f64> {
    let dev = family.deviations_upto(kern.k_max(), t)?;
    let factors: Vec<T> = dev.iter().map(|&d| -d).collect();
    let diag = basis.diagonal(&kern.table().scale_degrees(&factors)?)?;
    let abs: Vec<T> = diag.iter().map(|v| v.abs()).collect();
    Ok((basis.grid().integrate(&abs)? / surface_area::<T>(2)?).as_f64())
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    /// Smallest and largest abscissa used.
    pub window: (f64, f64),
    pub points_used: usize,
    /// Abscissae dropped because the ordinate was `≤ FIT_FLOOR` or not finite.
    pub excluded: Vec<f64>,
}

/// Ordinary least squares on the log-log points with `y > FIT_FLOOR`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitReport> {
    type Points<'a> = Vec<&'a (f64, f64)>;
    let (used, excluded): (Points, Points) = points
        .iter()
        .partition(|(x, y)| *x > 0.0 && y.is_finite() && *y > FIT_FLOOR);
    if used.len() < 3 {
        return Err(Error::Fit(format!(
            "{} usable points (need at least 3; {} excluded)",
            used.len(),
            excluded.len()
        )));
    }
    let n = used.len() as f64;
    let lx: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let mx = csum(lx.iter().copied()) / n;
    let my = csum(ly.iter().copied()) / n;
    let sxx = csum(lx.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy = csum(lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = csum(lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)));
    Ok(FitReport {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
        window: used
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0))),
        points_used: used.len(),
        excluded: excluded.iter().map(|p| p.0).collect(),
    })
}

/// `(t, g(t))` over a grid of `t` values.
pub fn holder_trace<T: Scalar>(
    kern: &(dyn KernelSpectrum<T> + Sync),
    family: &MultiplierFamily<T>,
    ts: &[T],
) -> Result<Vec<(f64, f64)>> {
    ts.par_iter()
        .map(|&t| Ok((t.as_f64(), holder_integral(kern, family, t)?)))
        .collect()
}

/// Estimates the Hölder exponent `β` as the slope of `log g` against `log t`.
///
/// The slope is reported raw, with no projection onto `(0, 2]`.
pub fn holder_exponent_fit<T: Scalar>(
    kern: &(dyn KernelSpectrum<T> + Sync),
    family: &MultiplierFamily<T>,
    ts: &[T],
) -> Result<FitReport> {
    loglog_fit(&holder_trace(kern, family, ts)?)
}

/// `S(t) = Σ_k |η_k^t - 1|² A_k`.
pub fn keyabst_sum<T: Scalar>(kern: &dyn KernelSpectrum<T>, family: &MultiplierFamily<T>, t: T) -> Result<f64> {
    let dev = family.deviations_upto(kern.band_limit(), t)?;
    Ok(csum((0..=kern.band_limit()).map(|k| dev[k] * dev[k] * kern.degree_sum(k))).as_f64())
}

/// `sup_t S(t) / t^β` and the `t` attaining it.
pub fn keyabst_ratio_sup<T: Scalar>(
    kern: &(dyn KernelSpectrum<T> + Sync),
    family: &MultiplierFamily<T>,
    ts: &[T],
    beta: f64,
) -> Result<(f64, f64)> {
    let ratios: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| Ok((keyabst_sum(kern, family, t)? / t.as_f64().powf(beta), t.as_f64())))
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(
        (f64::NEG_INFINITY, f64::NAN),
        |best, r| if r.0 > best.0 { r } else { best },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{power_law_zonal, ZonalKernel};
    use crate::multipliers::log_spaced;

    #[test]
    fn identity_family_gives_zero() {
        let kern = power_law_zonal::<f64>(2, 32, 3.0).unwrap();
        let id = MultiplierFamily::identity(2);
        assert_eq!(holder_integral(&kern, &id, 0.1).unwrap(), 0.0);
        assert_eq!(keyabst_sum(&kern, &id, 0.1).unwrap(), 0.0);
        let ts = log_spaced(1e-3, 0.1, 9);
        assert!(matches!(holder_exponent_fit(&kern, &id, &ts), Err(Error::Fit(_))));
    }

    #[test]
    fn single_degree_closed_forms() {
        let mut a = vec![0.0; 8];
        a[5] = 0.3;
        let kern = ZonalKernel::new(2, a).unwrap();
        let s = MultiplierFamily::shifting(2).unwrap();
        let eta = s.eval(5, 0.2).unwrap();
        let g = holder_integral(&kern, &s, 0.2).unwrap();
        assert!((g - (1.0 - eta) * 0.3 * 11.0).abs() < 1e-15);
        let sk = keyabst_sum(&kern, &s, 0.2).unwrap();
        assert!((sk - (1.0 - eta).powi(2) * 0.3 * 11.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_slope_is_two() {
        let mut a = vec![0.0; 4];
        a[3] = 1.0;
        let kern = ZonalKernel::new(2, a).unwrap();
        let s = MultiplierFamily::shifting(2).unwrap();
        let fit = holder_exponent_fit(&kern, &s, &log_spaced(1e-4, 1e-2, 9)).unwrap();
        assert!((fit.slope - 2.0).abs() < 0.01, "{fit:?}");
    }

    #[test]
    fn fit_needs_three_points() {
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 4.0)]).is_err());
        let fit = loglog_fit(&[(1.0, 3.0), (2.0, 12.0), (4.0, 48.0), (8.0, 0.0)]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert_eq!(fit.excluded, vec![8.0]);
        assert_eq!(fit.window, (1.0, 4.0));
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn grid_path_matches_degree_sums() {
        let basis = HarmonicBasis::<f64>::new(12).unwrap();
        let kern = CoefficientKernel::random(2, 12, 2.5, 8).unwrap();
        for fam in [
            MultiplierFamily::shifting(2).unwrap(),
            MultiplierFamily::cap(2).unwrap(),
        ] {
            for &t in &[0.05, 0.4, 1.3] {
                let a = holder_integral(&kern, &fam, t).unwrap();
                let b = holder_integral_grid(&basis, &kern, &fam, t).unwrap();
                assert!((a - b).abs() <= 1e-11 * a, "{} t={t}: {a} {b}", fam.name());
            }
        }
    }
}
