//! Windowed suprema of `λ_n n^{1+β/m}` and the combined
//! half-bounded / Hölder / decay pipeline.

use serde::Serialize;

use crate::kernels::{EigenvalueSequence, KernelSpectrum};
use crate::multipliers::{
    half_bounded_diagnostic, log_spaced, FamilyDeviation, HalfBoundedOptions, HalfBoundedReport, MultiplierFamily,
};
use crate::{Error, Result, Scalar};

use super::holder::{holder_exponent_fit, FitReport};

/// `[lo, 2lo-1], [2lo, 4lo-1], …`, the last window truncated at `hi`.
pub fn dyadic_windows(lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut a = lo.max(1);
    while a <= hi {
        let b = (2 * a - 1).min(hi);
        out.push((a, b));
        a *= 2;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSup {
    pub lo: usize,
    pub hi: usize,
    /// `max_{lo ≤ n ≤ hi} λ_n n^{1+β/m}`.
    pub sup: f64,
    pub argmax: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub beta: f64,
    pub m: usize,
    /// `1 + β/m`.
    pub exponent: f64,
    /// Supremum over all windows.
    pub sup_value: f64,
    pub trend: Vec<WindowSup>,
    /// Largest window sup over the smallest.
    pub spread: f64,
    /// Last window sup over the first.
    pub growth: f64,
    /// Largest ratio of a window sup to the sup of any earlier window.
    pub max_growth: f64,
    /// Whether the window sups strictly increase.
    pub monotone_increasing: bool,
}

impl DecayReport {
    /// The window sups stay within a factor `max_spread` of each other.
    pub fn bounded(&self, max_spread: f64) -> bool {
        self.spread <= max_spread
    }

    /// The window sups increase monotonically by more than `factor` overall.
    pub fn explodes(&self, factor: f64) -> bool {
        self.monotone_increasing && self.growth > factor
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        a / b
    }
}

/// Evaluates `λ_n n^{1+β/m}` window by window. Windows use 1-based `n`.
pub fn decay_check<T: Scalar>(
    seq: &EigenvalueSequence<T>,
    beta: f64,
    m: usize,
    windows: &[(usize, usize)],
) -> Result<DecayReport> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 2], got {beta}")));
    }
    if m < 1 {
        return Err(Error::Domain("sphere dimension must be at least 1".into()));
    }
    if windows.is_empty() {
        return Err(Error::Domain("no decay windows".into()));
    }
    let exponent = 1.0 + beta / m as f64;
    let mut trend = Vec::with_capacity(windows.len());
    for &(lo, hi) in windows {
        if lo < 1 || hi < lo {
            return Err(Error::Domain(format!("empty decay window [{lo}, {hi}]")));
        }
        if hi > seq.len() {
            return Err(Error::Shape(format!(
                "window [{lo}, {hi}] exceeds the {} available eigenvalues",
                seq.len()
            )));
        }
        let (argmax, sup) = (lo..=hi)
            .map(|n| (n, seq.lambdas()[n - 1].as_f64() * (n as f64).powf(exponent)))
            .fold(
                (lo, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        trend.push(WindowSup { lo, hi, sup, argmax });
    }
    let sups: Vec<f64> = trend.iter().map(|w| w.sup).collect();
    let max = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    let mut max_growth: f64 = 1.0;
    let mut running_min = sups[0];
    for &s in &sups[1..] {
        max_growth = max_growth.max(ratio(s, running_min));
        running_min = running_min.min(s);
    }
    Ok(DecayReport {
        beta,
        m,
        exponent,
        sup_value: max,
        spread: ratio(max, min),
        growth: ratio(sups[sups.len() - 1], sups[0]),
        max_growth,
        monotone_increasing: sups.len() > 1 && sups.windows(2).all(|w| w[1] > w[0]),
        trend,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// `K` and `N` of the half-bounded stage.
    pub half_k: usize,
    pub half_n: usize,
    /// The stage passes when `M_lower` exceeds this.
    pub m_lower_floor: f64,
    /// Fit grid for the Hölder stage.
    pub ts: Vec<f64>,
    /// First `n` of the dyadic decay windows.
    pub decay_lo: usize,
    /// The decay stage passes when no window sup exceeds an earlier one by more than this.
    pub max_growth: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            half_k: 200,
            half_n: 100,
            m_lower_floor: 1e-12,
            ts: log_spaced(1e-2, 1e-1, 21),
            decay_lo: 16,
            max_growth: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage<R> {
    pub pass: bool,
    pub note: String,
    pub report: Option<R>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub half_bounded: Stage<HalfBoundedReport>,
    pub holder: Stage<FitReport>,
    pub decay: Stage<DecayReport>,
    /// Set when the fitted exponent exceeds 2.
    pub beta_above_two: bool,
}

impl PipelineReport {
    pub fn pass(&self) -> bool {
        self.half_bounded.pass && self.holder.pass && self.decay.pass
    }
}

/// Runs the half-bounded diagnostic on `|η_k^{1/n} - 1|`, fits `β̂` from
/// `g(t)`, then checks `λ_n = O(n^{-1-β̂/m})` over dyadic windows.
///
/// Every stage runs and is reported. A fitted exponent above 2 is flagged and
/// the decay stage uses 2.
pub fn end_to_end_theorem31<T: Scalar>(
    kern: &(dyn KernelSpectrum<T> + Sync),
    family: &MultiplierFamily<T>,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let m = kern.sphere_dim();

    let half_bounded = match half_bounded_diagnostic(
        &FamilyDeviation(family),
        opts.half_k,
        opts.half_n,
        &HalfBoundedOptions::default(),
    ) {
        Ok(r) => Stage {
            pass: r.m_lower > opts.m_lower_floor,
            note: format!("M_lower = {} at (k, n) = {:?}", r.m_lower, r.argmin),
            report: Some(r),
        },
        Err(e) => Stage {
            pass: false,
            note: e.to_string(),
            report: None,
        },
    };

    let ts: Vec<T> = opts.ts.iter().map(|&t| T::of(t)).collect();
    let (holder, beta) = match holder_exponent_fit(kern, family, &ts) {
        Ok(fit) => {
            let b = fit.slope;
            let ok = b.is_finite() && b > 0.0;
            (
                Stage {
                    pass: ok,
                    note: format!("fitted exponent {b}"),
                    report: Some(fit),
                },
                ok.then_some(b),
            )
        }
        Err(e) => (
            Stage {
                pass: false,
                note: e.to_string(),
                report: None,
            },
            None,
        ),
    };
    let beta_above_two = beta.is_some_and(|b| b > 2.0);

    let decay = match beta {
        None => Stage {
            pass: false,
            note: "no positive exponent from the Hölder stage".into(),
            report: None,
        },
        Some(b) => {
            let b = b.min(2.0);
            let seq = kern.eigenvalue_sequence()?;
            let windows = dyadic_windows(opts.decay_lo, seq.len());
            match decay_check(&seq, b, m, &windows) {
                Ok(r) => Stage {
                    pass: r.max_growth <= opts.max_growth,
                    note: format!("exponent {}, max growth {}", r.exponent, r.max_growth),
                    report: Some(r),
                },
                Err(e) => Stage {
                    pass: false,
                    note: e.to_string(),
                    report: None,
                },
            }
        }
    };

    Ok(PipelineReport {
        half_bounded,
        holder,
        decay,
        beta_above_two,
    })
}
