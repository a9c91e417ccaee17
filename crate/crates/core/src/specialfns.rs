//! Surface areas, dimensions of spherical-harmonic spaces and Gegenbauer
//! polynomials.

use crate::{Error, Result, Scalar};

/// Dimension `m` of the sphere `S^m ⊂ ℝ^{m+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SphereDim(usize);

impl SphereDim {
    pub fn new(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain("sphere dimension must be at least 1".into()));
        }
        Ok(Self(m))
    }

    /// Dimension for which harmonic analysis is set up (`m ≥ 2`).
    pub fn harmonic(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("harmonic analysis needs m >= 2, got m = {m}")));
        }
        Ok(Self(m))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Gegenbauer index `(m - 1) / 2` attached to `S^m`.
    pub fn lambda<T: Scalar>(self) -> T {
        T::of((self.0 as f64 - 1.0) / 2.0)
    }
}

/// Degree and index of a Gegenbauer polynomial `C_k^λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerIndex<T> {
    pub k: usize,
    pub lambda: T,
}

impl<T: Scalar> GegenbauerIndex<T> {
    pub fn new(k: usize, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::Domain(format!(
                "Gegenbauer index must be positive, got {lambda}"
            )));
        }
        Ok(Self { k, lambda })
    }

    pub fn eval(&self, x: T) -> T {
        gegenbauer_eval(self.k, self.lambda, x)
    }

    pub fn at_one(&self) -> T {
        gegenbauer_at_one(self.k, self.lambda)
    }
}

/// Surface area `ω_m = 2π^{(m+1)/2} / Γ((m+1)/2)` of the unit sphere `S^m`.
pub fn surface_area<T: Scalar>(m: usize) -> Result<T> {
    if m < 1 {
        return Err(Error::Domain("surface_area needs m >= 1".into()));
    }
    let half = (m as f64 + 1.0) / 2.0;
    let log_area = std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - libm::lgamma(half);
    Ok(T::of(log_area.exp()))
}

/// Exact binomial coefficient, or an overflow error.
pub fn binomial(n: u64, r: u64) -> Result<u128> {
    if r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(u128::from(n - i)).ok_or_else(|| Error::Overflow {
            what: format!("binomial({n}, {r})"),
        })? / u128::from(i + 1);
    }
    Ok(acc)
}

/// Dimension `d_k^m` of the space of spherical harmonics of degree `k` on `S^m`.
pub fn harmonic_dim(k: usize, m: usize) -> Result<u128> {
    if m < 2 {
        return Err(Error::Domain(format!("harmonic_dim needs m >= 2, got m = {m}")));
    }
    let (k, m) = (k as u64, m as u64);
    // d_k^m = binom(k+m, m) - binom(k+m-2, m)
    Ok(binomial(k + m, m)? - binomial(k + m - 2, m)?)
}

/// `d_k^m` as a `usize`, for sizing coefficient blocks.
pub fn harmonic_dim_usize(k: usize, m: usize) -> Result<usize> {
    usize::try_from(harmonic_dim(k, m)?).map_err(|_| Error::Overflow {
        what: format!("harmonic_dim({k}, {m}) as usize"),
    })
}

/// `Σ_{k=0}^n d_k^m`, the number of eigenvalues carried by degrees `0..=n`.
///
/// Equals `harmonic_dim(n, m + 1)`.
pub fn cumulative_dim(n: usize, m: usize) -> Result<u128> {
    let mut total: u128 = 0;
    for k in 0..=n {
        total = total.checked_add(harmonic_dim(k, m)?).ok_or_else(|| Error::Overflow {
            what: format!("cumulative_dim({n}, {m})"),
        })?;
    }
    Ok(total)
}

#[inline]
fn clamp_unit<T: Scalar>(x: T) -> T {
    debug_assert!(
        x.abs() <= T::one() + T::of(1e-12),
        "Gegenbauer argument outside [-1, 1]: {x}"
    );
    x.max(-T::one()).min(T::one())
}

/// `C_k^λ(x)` by the three-term forward recurrence.
///
/// Arguments within `1e-12` of `[-1, 1]` are clamped onto the interval.
pub fn gegenbauer_eval<T: Scalar>(k: usize, lambda: T, x: T) -> T {
    let x = clamp_unit(x);
    let two = T::of(2.0);
    let mut prev = T::one();
    if k == 0 {
        return prev;
    }
    let mut cur = two * lambda * x;
    for n in 2..=k {
        let nf = T::of_usize(n);
        let next = (two * (nf + lambda - T::one()) * x * cur - (nf + two * lambda - two) * prev) / nf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_0^λ(x), …, C_{k_max}^λ(x)` in one recurrence sweep, written into `out`.
pub fn gegenbauer_all<T: Scalar>(k_max: usize, lambda: T, x: T, out: &mut Vec<T>) {
    let x = clamp_unit(x);
    let two = T::of(2.0);
    out.clear();
    out.reserve(k_max + 1);
    out.push(T::one());
    if k_max == 0 {
        return;
    }
    out.push(two * lambda * x);
    for n in 2..=k_max {
        let nf = T::of_usize(n);
        let next = (two * (nf + lambda - T::one()) * x * out[n - 1] - (nf + two * lambda - two) * out[n - 2]) / nf;
        out.push(next);
    }
}

/// `C_k^λ(1) = Γ(k + 2λ) / (Γ(2λ) k!)`.
///
/// When `2λ` is an integer (every sphere dimension) and the binomial
/// `binom(k + 2λ - 1, k)` fits in 128 bits it is computed exactly; otherwise
/// through log-Gamma.
pub fn gegenbauer_at_one<T: Scalar>(k: usize, lambda: T) -> T {
    if k == 0 {
        return T::one();
    }
    let two_lambda = 2.0 * lambda.as_f64();
    if two_lambda.fract() == 0.0 && (1.0..1e9).contains(&two_lambda) {
        let n = k as u64 + two_lambda as u64 - 1;
        if let Ok(b) = binomial(n, k as u64) {
            return T::of(b as f64);
        }
    }
    let kf = k as f64;
    let log_value = libm::lgamma(kf + two_lambda) - libm::lgamma(two_lambda) - libm::lgamma(kf + 1.0);
    T::of(log_value.exp())
}

/// `C_k^λ(1)` for `k = 0..=k_max`.
pub fn gegenbauer_at_one_all<T: Scalar>(k_max: usize, lambda: T) -> Vec<T> {
    (0..=k_max).map(|k| gegenbauer_at_one(k, lambda)).collect()
}

/// `1 - C_k^λ(cos h) / C_k^λ(1)` for `k = 0..=k_max`, written into `out`.
///
/// Runs the normalized recurrence `R_k = α_k x R_{k-1} - β_k R_{k-2}`
/// (`α_k - β_k = 1`) on the deviations `D_k = 1 - R_k`, driven by
/// `1 - cos h = 2 sin²(h/2)`. Small deviations keep full relative accuracy,
/// which `1 - ratio` loses once `k h` is small.
pub fn gegenbauer_deviation_all<T: Scalar>(k_max: usize, lambda: T, h: T, out: &mut Vec<T>) {
    let two = T::of(2.0);
    let half_sin = (h / two).sin();
    let one_minus_x = two * half_sin * half_sin;
    let x = T::one() - one_minus_x;
    out.clear();
    out.reserve(k_max + 1);
    out.push(T::zero());
    if k_max == 0 {
        return;
    }
    out.push(one_minus_x);
    for k in 2..=k_max {
        let kf = T::of_usize(k);
        let denom = kf + two * lambda - T::one();
        let alpha = two * (kf + lambda - T::one()) / denom;
        let beta = (kf - T::one()) / denom;
        let next = alpha * one_minus_x + alpha * x * out[k - 1] - beta * out[k - 2];
        out.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn surface_areas() {
        assert_relative_eq!(surface_area::<f64>(1).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(surface_area::<f64>(2).unwrap(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(surface_area::<f64>(3).unwrap(), 2.0 * PI * PI, max_relative = 1e-15);
        assert!(surface_area::<f64>(0).is_err());
    }

    #[test]
    fn surface_area_recurrence() {
        // ω_m = 2π ω_{m-2} / (m - 1)
        for m in 3..30 {
            let lhs: f64 = surface_area(m).unwrap();
            let rhs = 2.0 * PI * surface_area::<f64>(m - 2).unwrap() / (m as f64 - 1.0);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        }
    }

    /// Dimension of harmonic polynomials of degree k in 3 variables, by
    /// counting monomials: dim P_k - dim P_{k-2}.
    fn brute_force_dim_s2(k: usize) -> u128 {
        let count = |deg: isize| -> u128 {
            if deg < 0 {
                return 0;
            }
            // exponents (a, b, deg - a - b)
            (0..=deg).map(|a| (deg - a + 1) as u128).sum()
        };
        count(k as isize) - count(k as isize - 2)
    }

    #[test]
    fn harmonic_dims() {
        for m in 2..9 {
            assert_eq!(harmonic_dim(0, m).unwrap(), 1);
        }
        for k in 0..=6 {
            assert_eq!(harmonic_dim(k, 2).unwrap(), 2 * k as u128 + 1);
            assert_eq!(harmonic_dim(k, 2).unwrap(), brute_force_dim_s2(k));
        }
        assert_eq!(harmonic_dim(3, 3).unwrap(), 16);
        for n in 0..20 {
            assert_eq!(harmonic_dim(n, 3).unwrap(), ((n + 1) * (n + 1)) as u128);
        }
        assert!(harmonic_dim(2, 1).is_err());
    }

    #[test]
    fn harmonic_dim_matches_ratio_formula() {
        // d_k^m = (2k+m-1)/(k+m-1) · binom(k+m-1, k)
        for m in 2..10u64 {
            for k in 1..60u64 {
                let b = binomial(k + m - 1, k).unwrap();
                let expected = (2 * k + m - 1) as u128 * b / (k + m - 1) as u128;
                assert_eq!(harmonic_dim(k as usize, m as usize).unwrap(), expected);
            }
        }
    }

    #[test]
    fn harmonic_dim_overflow_is_reported() {
        let err = harmonic_dim(1_000_000, 40).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
        // exact near the top of the supported range
        let k = 999_000u128;
        assert_eq!(harmonic_dim(999_000, 3).unwrap(), (k + 1) * (k + 1));
        assert!(harmonic_dim(999_000, 6).is_ok());
    }

    #[test]
    fn cumulative_dims() {
        assert_eq!(cumulative_dim(0, 5).unwrap(), 1);
        for n in 0..=10 {
            assert_eq!(cumulative_dim(n, 2).unwrap(), ((n + 1) * (n + 1)) as u128);
        }
        // 1 + 4 + 9 + 16
        assert_eq!(cumulative_dim(3, 3).unwrap(), 30);
    }

    #[test]
    fn cumulative_dim_is_next_dimension() {
        for m in 2..=8 {
            for n in 0..=50 {
                assert_eq!(cumulative_dim(n, m).unwrap(), harmonic_dim(n, m + 1).unwrap());
            }
        }
    }

    #[test]
    fn dimension_growth_bracket() {
        // d_n^m / n^{m-1} stays within a fixed bracket
        for m in 2..=6 {
            let ratios: Vec<f64> = (10..=1000)
                .map(|n| harmonic_dim(n, m).unwrap() as f64 / (n as f64).powi(m as i32 - 1))
                .collect();
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(0.0, f64::max);
            assert!(lo > 0.0 && hi / lo < 4.0, "m = {m}: [{lo}, {hi}]");
        }
    }

    #[test]
    fn gegenbauer_small_cases() {
        for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert_eq!(gegenbauer_eval(0, 1.3, x), 1.0);
            assert_relative_eq!(gegenbauer_eval(2, 0.5, x), (3.0 * x * x - 1.0) / 2.0, epsilon = 1e-15);
            assert_relative_eq!(gegenbauer_eval(1, 2.5, x), 5.0 * x, epsilon = 1e-15);
        }
        assert_relative_eq!(
            gegenbauer_eval(5, 1.5, 1.0),
            gegenbauer_at_one(5, 1.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn gegenbauer_at_one_values() {
        for k in 0..50 {
            assert_relative_eq!(gegenbauer_at_one(k, 0.5), 1.0, max_relative = 1e-14);
        }
        for &l in &[0.25, 0.5, 1.0, 1.5, 2.7] {
            assert_relative_eq!(gegenbauer_at_one(1, l), 2.0 * l, max_relative = 1e-14);
        }
        assert_relative_eq!(gegenbauer_at_one(4, 1.0), 5.0, max_relative = 1e-14);
        // non-integer 2λ goes through log-Gamma
        assert_relative_eq!(
            gegenbauer_at_one(6, 0.3),
            gegenbauer_eval(6, 0.3, 1.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn recurrence_matches_at_one_for_large_degrees() {
        for &l in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            for k in [10, 57, 200] {
                assert_relative_eq!(
                    gegenbauer_eval(k, l, 1.0),
                    gegenbauer_at_one(k, l),
                    max_relative = 1e-11
                );
            }
        }
    }

    #[test]
    fn gegenbauer_all_matches_single() {
        let mut buf = Vec::new();
        gegenbauer_all(40, 1.5, 0.37, &mut buf);
        for (k, v) in buf.iter().enumerate() {
            assert_eq!(*v, gegenbauer_eval(k, 1.5, 0.37));
        }
    }

    #[test]
    fn bounded_by_value_at_one() {
        for &l in &[0.5f64, 1.0, 1.5, 2.5] {
            let mut buf = Vec::new();
            for i in 0..=2000 {
                let x = -1.0 + 2.0 * i as f64 / 2000.0;
                gegenbauer_all(200, l, x, &mut buf);
                for (k, v) in buf.iter().enumerate() {
                    let bound = gegenbauer_at_one(k, l);
                    assert!(v.abs() <= bound * (1.0 + 1e-12), "k={k} l={l} x={x}");
                }
            }
        }
    }

    #[test]
    fn parity() {
        for &l in &[0.5f64, 1.0, 2.5] {
            for k in 0..60 {
                for &x in &[0.1, 0.45, 0.9] {
                    let a = gegenbauer_eval(k, l, -x);
                    let b = if k % 2 == 0 { 1.0 } else { -1.0 } * gegenbauer_eval(k, l, x);
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                }
            }
        }
    }

    #[test]
    fn single_precision_agrees_loosely() {
        let a = gegenbauer_eval(20, 1.0f32, 0.3f32);
        let b = gegenbauer_eval(20, 1.0f64, 0.3f64);
        assert!((a as f64 - b).abs() < 1e-4 * (1.0 + b.abs()));
    }

    #[test]
    fn index_types() {
        assert!(SphereDim::new(0).is_err());
        assert!(SphereDim::harmonic(1).is_err());
        assert_eq!(SphereDim::harmonic(3).unwrap().lambda::<f64>(), 1.0);
        assert!(GegenbauerIndex::new(3, 0.0f64).is_err());
        let g = GegenbauerIndex::new(3, 1.0f64).unwrap();
        assert_relative_eq!(g.at_one(), 4.0);
        assert_relative_eq!(g.eval(1.0), 4.0);
    }

    #[test]
    fn deviation_matches_ratio() {
        let mut dev = Vec::new();
        for &l in &[0.5f64, 1.0, 1.5, 2.5] {
            for &h in &[0.05f64, 0.7, 1.9, 3.0] {
                gegenbauer_deviation_all(120, l, h, &mut dev);
                for (k, &d) in dev.iter().enumerate() {
                    let ratio = gegenbauer_eval(k, l, h.cos()) / gegenbauer_at_one(k, l);
                    assert!((d - (1.0 - ratio)).abs() < 1e-12, "l={l} h={h} k={k}");
                }
            }
        }
    }

    #[test]
    fn deviation_small_angle_relative_accuracy() {
        // 1 - C_k(cos h)/C_k(1) ≈ k(k+2λ) h² / (2(2λ+1)) for small h
        let mut dev = Vec::new();
        for &l in &[0.5, 1.0, 2.0] {
            let h = 1e-6;
            gegenbauer_deviation_all(50, l, h, &mut dev);
            for (k, d) in dev.iter().enumerate().skip(1) {
                let kf = k as f64;
                let lead = kf * (kf + 2.0 * l) * h * h / (2.0 * (2.0 * l + 1.0));
                assert_relative_eq!(*d, lead, max_relative = 1e-8);
            }
        }
    }
}
