//! Multiplier sequences of the built-in families.

use crate::quadrature::{gauss_legendre, integrate_profile};
use crate::specialfns::{binomial, gegenbauer_deviation_all, surface_area};
use crate::summation::CompensatedSum;
use crate::{Error, Result, Scalar};

use super::QuadPolicy;

/// Gauss–Legendre nodes per panel for the inner cap integrals of the
/// Steklov family.
pub const STEKLOV_PANEL_NODES: usize = 20;

pub(super) fn check_t<T: Scalar>(t: T) -> Result<()> {
    if !(t > T::zero() && t < T::PI()) {
        return Err(Error::Domain(format!("t = {t} is outside (0, π)")));
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("multiplier families need m >= 2, got {m}")));
    }
    Ok(())
}

fn lambda<T: Scalar>(m: usize) -> T {
    T::of((m as f64 - 1.0) / 2.0)
}

pub(super) fn shifting_deviations<T: Scalar>(k_max: usize, t: T, m: usize) -> Vec<T> {
    let mut out = Vec::new();
    gegenbauer_deviation_all(k_max, lambda::<T>(m), t, &mut out);
    out
}

/// Weights `c_j = -2 (-1)^j binom(2l, l-j) / binom(2l, l)`, `j = 1..=l`, of
/// the combination of shiftings; they sum to 1.
pub fn combo_coefficients(l: usize) -> Result<Vec<f64>> {
    let two_l = 2 * l as u64;
    let central = binomial(two_l, l as u64)? as f64;
    (1..=l)
        .map(|j| {
            let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
            Ok(2.0 * sign * binomial(two_l, (l - j) as u64)? as f64 / central)
        })
        .collect()
}

pub(super) fn combo_deviations<T: Scalar>(k_max: usize, t: T, l: usize, m: usize) -> Result<Vec<T>> {
    let coeffs = combo_coefficients(l)?;
    let mut sums = vec![CompensatedSum::<T>::new(); k_max + 1];
    let mut dev = Vec::new();
    for (j, &c) in coeffs.iter().enumerate() {
        gegenbauer_deviation_all(k_max, lambda::<T>(m), T::of_usize(j + 1) * t, &mut dev);
        for (acc, &d) in sums.iter_mut().zip(&dev) {
            acc.add(T::of(c) * d);
        }
    }
    Ok(sums.iter().map(CompensatedSum::value).collect())
}

/// Splits `0..=k_max` into runs sharing a node count and evaluates each run
/// with `eval(run_end, nodes)`.
pub(super) fn bucketed<T: Scalar, F>(k_max: usize, policy: QuadPolicy, mut eval: F) -> Result<Vec<T>>
where
    F: FnMut(usize, usize) -> Result<Vec<T>>,
{
    let mut out = Vec::with_capacity(k_max + 1);
    let mut lo = 0;
    while lo <= k_max {
        let n = policy.nodes_for(lo);
        let mut hi = lo;
        while hi < k_max && policy.nodes_for(hi + 1) == n {
            hi += 1;
        }
        let values = eval(hi, n)?;
        out.extend_from_slice(&values[lo..=hi]);
        lo = hi + 1;
    }
    Ok(out)
}

/// `1 - ρ_k^t` for `k ≤ k_max` with an `n`-node rule on `[0, t]`.
///
/// Numerator and denominator share the nodes, so `ρ_0^t = 1` exactly.
pub(super) fn cap_deviations<T: Scalar>(k_max: usize, t: T, m: usize, n: usize) -> Result<Vec<T>> {
    let rule = gauss_legendre::<T>(n)?;
    let mut mass = CompensatedSum::<T>::new();
    let mut sums = vec![CompensatedSum::<T>::new(); k_max + 1];
    let mut dev = Vec::new();
    for (h, w) in rule.mapped(T::zero(), t) {
        let weight = w * h.sin().powi(m as i32 - 1);
        mass.add(weight);
        gegenbauer_deviation_all(k_max, lambda::<T>(m), h, &mut dev);
        for (acc, &d) in sums.iter_mut().zip(&dev) {
            acc.add(weight * d);
        }
    }
    let mass = mass.value();
    Ok(sums.iter().map(|s| s.value() / mass).collect())
}

/// `(D, [1 - φ_k^t])` with `D = ∫_0^t C_m(s)/R_m(s) ds` taken without the
/// `ω_{m-1}` factors, which cancel.
///
/// The outer integral uses an `n`-node rule on `[0, t]`. The inner cap
/// integrals `∫_0^s` are accumulated panel by panel between consecutive outer
/// nodes. The integrand `C_m(s)/R_m(s) ~ s/m` vanishes at `s = 0`, and the
/// Gauss nodes never touch that endpoint.
fn steklov_parts<T: Scalar>(k_max: usize, t: T, m: usize, n: usize) -> Result<(T, Vec<T>)> {
    let outer = gauss_legendre::<T>(n)?;
    let panel = gauss_legendre::<T>(STEKLOV_PANEL_NODES)?;
    let lam = lambda::<T>(m);
    let mut cap_mass = CompensatedSum::<T>::new();
    let mut cap_dev = vec![CompensatedSum::<T>::new(); k_max + 1];
    let mut normalizer = CompensatedSum::<T>::new();
    let mut outer_dev = vec![CompensatedSum::<T>::new(); k_max + 1];
    let mut dev = Vec::new();
    let mut prev = T::zero();
    for (s, w) in outer.mapped(T::zero(), t) {
        for (h, v) in panel.mapped(prev, s) {
            let weight = v * h.sin().powi(m as i32 - 1);
            cap_mass.add(weight);
            gegenbauer_deviation_all(k_max, lam, h, &mut dev);
            for (acc, &d) in cap_dev.iter_mut().zip(&dev) {
                acc.add(weight * d);
            }
        }
        prev = s;
        let scale = w / s.sin().powi(m as i32 - 1);
        normalizer.add(scale * cap_mass.value());
        for (acc, inner) in outer_dev.iter_mut().zip(&cap_dev) {
            acc.add(scale * inner.value());
        }
    }
    let d = normalizer.value();
    Ok((d, outer_dev.iter().map(|a| a.value() / d).collect()))
}

pub(super) fn steklov_deviations<T: Scalar>(k_max: usize, t: T, m: usize, n: usize) -> Result<Vec<T>> {
    Ok(steklov_parts(k_max, t, m, n)?.1)
}

/// `C_k(cos t) / C_k(1)` with `λ = (m - 1)/2`.
pub fn shifting_multiplier<T: Scalar>(k: usize, t: T, m: usize) -> Result<T> {
    check_m(m)?;
    check_t(t)?;
    Ok(T::one() - shifting_deviations(k, t, m)[k])
}

/// Combination of `l` shiftings, `1 ≤ l ≤ 10`.
pub fn combo_multiplier<T: Scalar>(k: usize, t: T, l: usize, m: usize) -> Result<T> {
    check_m(m)?;
    check_t(t)?;
    if !(1..=10).contains(&l) {
        return Err(Error::Domain(format!("combination order l must be in 1..=10, got {l}")));
    }
    Ok(T::one() - combo_deviations(k, t, l, m)?[k])
}

/// `C_m(t) = ω_{m-1} ∫_0^t sin^{m-1} h dh`, the volume of a cap of radius `t`.
pub fn cap_volume<T: Scalar>(t: T, m: usize, n_quad: usize) -> Result<T> {
    check_m(m)?;
    if !(t > T::zero() && t <= T::PI()) {
        return Err(Error::Domain(format!("t = {t} is outside (0, π]")));
    }
    let integral = integrate_profile(|h: T| h.sin().powi(m as i32 - 1), T::zero(), t, n_quad)?;
    Ok(surface_area::<T>(m - 1)? * integral)
}

/// `ρ_k^t = ω_{m-1} / (C_k(1) C_m(t)) ∫_0^t C_k(cos h) sin^{m-1} h dh`.
pub fn cap_multiplier<T: Scalar>(k: usize, t: T, m: usize, n_quad: usize) -> Result<T> {
    check_m(m)?;
    check_t(t)?;
    Ok(T::one() - cap_deviations(k, t, m, n_quad)?[k])
}

/// `D_m(t) = ∫_0^t C_m(s) / R_m(s) ds`, `R_m(s) = ω_{m-1} sin^{m-1} s`.
pub fn steklov_normalizer<T: Scalar>(t: T, m: usize, n_quad: usize) -> Result<T> {
    check_m(m)?;
    check_t(t)?;
    Ok(steklov_parts(0, t, m, n_quad)?.0)
}

/// `φ_k^t = D_m(t)^{-1} ∫_0^t C_m(s) ρ_k^s / R_m(s) ds`.
pub fn steklov_multiplier<T: Scalar>(k: usize, t: T, m: usize, n_quad: usize) -> Result<T> {
    check_m(m)?;
    check_t(t)?;
    Ok(T::one() - steklov_parts(k, t, m, n_quad)?.1[k])
}
