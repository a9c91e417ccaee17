//! Lattice diagnostics for the hypotheses on multiplier families: uniform
//! bounds, equivalence `1 - η_k^t ≍ min{1, kt}^s`, and half-boundedness.

use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result, Scalar};

use super::MultiplierFamily;

/// `n` points from `a` to `b` (inclusive), equally spaced in `log t`.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i == n - 1 {
                        b
                    } else {
                        (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `sup |η_k^t|` over `k ≤ k_max` and the given `t` values.
pub fn uniform_bound<T: Scalar>(family: &MultiplierFamily<T>, k_max: usize, ts: &[T]) -> Result<f64> {
    let rows: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let eta = family.eval_upto(k_max, t)?;
            Ok(eta.iter().fold(0.0f64, |acc, e| acc.max(e.abs().as_f64())))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Extremes of `(1 - η_k^t) / min{1, kt}^s` over a `(k, t)` lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub c_low: f64,
    pub c_high: f64,
    pub s: f64,
    pub k_range: (usize, usize),
    pub t_range: (f64, f64),
    pub argmin: (usize, f64),
    pub argmax: (usize, f64),
    /// Lattice points with `1 - η_k^t < 0`.
    pub sign_violations: Vec<(usize, f64)>,
    /// Every deviation was zero.
    pub degenerate: bool,
}

impl EquivalenceReport {
    /// `c_low > 0`, no sign violations, and `c_high / c_low ≤ max_ratio`.
    pub fn certifies(&self, max_ratio: f64) -> bool {
        !self.degenerate && self.sign_violations.is_empty() && self.c_low > 0.0 && self.c_high / self.c_low <= max_ratio
    }
}

/// Computes [`EquivalenceReport`] for `k ∈ k_lo..=k_hi` and `t ∈ ts`.
///
/// Requires `k_lo ≥ 1` and `ts ⊂ (0, π/2]`.
pub fn equivalence_constants<T: Scalar>(
    family: &MultiplierFamily<T>,
    s: f64,
    k_lo: usize,
    k_hi: usize,
    ts: &[T],
) -> Result<EquivalenceReport> {
    if k_lo < 1 || k_hi < k_lo {
        return Err(Error::Domain(format!(
            "degree range [{k_lo}, {k_hi}] must be nonempty with k >= 1"
        )));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("exponent s = {s} must be positive")));
    }
    if ts.is_empty() {
        return Err(Error::Domain("empty t grid".into()));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    if let Some(t) = ts.iter().find(|t| !(t.as_f64() > 0.0 && t.as_f64() <= half_pi)) {
        return Err(Error::Domain(format!("t = {t} is outside (0, π/2]")));
    }
    let rows: Vec<Vec<f64>> = ts
        .par_iter()
        .map(|&t| {
            let dev = family.deviations_upto(k_hi, t)?;
            let tf = t.as_f64();
            Ok((k_lo..=k_hi)
                .map(|k| dev[k].as_f64() / (k as f64 * tf).min(1.0).powf(s))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut report = EquivalenceReport {
        c_low: f64::INFINITY,
        c_high: f64::NEG_INFINITY,
        s,
        k_range: (k_lo, k_hi),
        t_range: ts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
            (a.min(t.as_f64()), b.max(t.as_f64()))
        }),
        argmin: (k_lo, ts[0].as_f64()),
        argmax: (k_lo, ts[0].as_f64()),
        sign_violations: Vec::new(),
        degenerate: true,
    };
    for (row, t) in rows.iter().zip(ts) {
        let t = t.as_f64();
        for (i, &r) in row.iter().enumerate() {
            let k = k_lo + i;
            if r != 0.0 {
                report.degenerate = false;
            }
            if r < 0.0 {
                report.sign_violations.push((k, t));
            }
            if r < report.c_low {
                report.c_low = r;
                report.argmin = (k, t);
            }
            if r > report.c_high {
                report.c_high = r;
                report.argmax = (k, t);
            }
        }
    }
    if report.degenerate {
        report.c_low = 0.0;
        report.c_high = 0.0;
    }
    Ok(report)
}

/// A double sequence `b_{k,n}`, `k ≥ 0`, `n ≥ 1`.
pub trait DoubleSequence: Sync {
    /// `b_{0,n}, …, b_{k_max,n}`.
    fn row(&self, n: usize, k_max: usize) -> Result<Vec<f64>>;
}

/// `b_{k,n} = |η_k^{1/n} - 1|` for a multiplier family.
pub struct FamilyDeviation<'a, T>(pub &'a MultiplierFamily<T>);

impl<T: Scalar> DoubleSequence for FamilyDeviation<'_, T> {
    fn row(&self, n: usize, k_max: usize) -> Result<Vec<f64>> {
        let t = T::one() / T::of_usize(n);
        Ok(self
            .0
            .deviations_upto(k_max, t)?
            .iter()
            .map(|d| d.abs().as_f64())
            .collect())
    }
}

/// A double sequence given by a closure `(k, n) ↦ b_{k,n}`.
pub struct FnSequence<F>(pub F);

impl<F: Fn(usize, usize) -> f64 + Sync> DoubleSequence for FnSequence<F> {
    fn row(&self, n: usize, k_max: usize) -> Result<Vec<f64>> {
        Ok((0..=k_max).map(|k| (self.0)(k, n)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfBoundedOptions {
    /// Degrees whose tails `n ↦ b_{k,n}` are tabulated.
    pub decay_ks: Vec<usize>,
    /// Number of doublings `n = k, 2k, …, 2^depth k` in each tail.
    pub decay_depth: u32,
}

impl Default for HalfBoundedOptions {
    fn default() -> Self {
        Self {
            decay_ks: vec![1, 5, 10],
            decay_depth: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: usize,
    /// `(n, b_{k,n})` for `n = k, 2k, 4k, …`.
    pub values: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfBoundedReport {
    /// `min{b_{k,n} : 1 ≤ n ≤ N, n ≤ k ≤ K}`.
    pub m_lower: f64,
    pub argmin: (usize, usize),
    pub k_max: usize,
    pub n_max: usize,
    pub decay_table: Vec<DecayRow>,
}

impl HalfBoundedReport {
    /// Whether every tabulated tail ends below `tail_tol`.
    pub fn tails_vanish(&self, tail_tol: f64) -> bool {
        self.decay_table
            .iter()
            .all(|row| row.values.last().is_some_and(|&(_, b)| b < tail_tol))
    }
}

/// Lower bound `M` of `b_{k,n}` on `n ≤ k ≤ K`, `n ≤ N`, and tail tables
/// showing `b_{k,n} → 0` for fixed `k`.
pub fn half_bounded_diagnostic(
    seq: &dyn DoubleSequence,
    k_max: usize,
    n_max: usize,
    opts: &HalfBoundedOptions,
) -> Result<HalfBoundedReport> {
    if n_max < 1 || k_max < n_max {
        return Err(Error::Domain(format!("need 1 <= N <= K, got N = {n_max}, K = {k_max}")));
    }
    if k_max > 10_000 || n_max > 10_000 {
        return Err(Error::Domain("K and N are limited to 10^4".into()));
    }
    let mins: Vec<(f64, usize, usize)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let row = seq.row(n, k_max)?;
            let (k, b) =
                row.iter().enumerate().skip(n).fold(
                    (n, f64::INFINITY),
                    |best, (k, &b)| if b < best.1 { (k, b) } else { best },
                );
            Ok((b, k, n))
        })
        .collect::<Result<_>>()?;
    let (m_lower, k_arg, n_arg) = mins.into_iter().fold(
        (f64::INFINITY, 0, 0),
        |best, cur| if cur.0 < best.0 { cur } else { best },
    );

    let decay_table = opts
        .decay_ks
        .iter()
        .filter(|&&k| k >= 1)
        .map(|&k| {
            let values = (0..=opts.decay_depth)
                .map(|i| {
                    let n = k << i;
                    Ok((n, seq.row(n, k)?[k]))
                })
                .collect::<Result<_>>()?;
            Ok(DecayRow { k, values })
        })
        .collect::<Result<_>>()?;

    Ok(HalfBoundedReport {
        m_lower,
        argmin: (k_arg, n_arg),
        k_max,
        n_max,
        decay_table,
    })
}
