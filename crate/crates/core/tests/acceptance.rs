//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use sphere_multipliers::analysis::{
    decay_check, dyadic_windows, hausdorff_young_check, holder_exponent_fit, kernel_identity_grid,
    kernel_identity_zonal, l1_sup_check, loglog_fit, parseval_equality_check, sqrt_deviation_identity_check,
    HarmonicBasis, HyConstant,
};
use sphere_multipliers::kernels::{
    power_law_zonal, reproducing_check, CoeffTable, CoefficientKernel, KernelSpectrum, ZonalKernel,
};
use sphere_multipliers::multipliers::{
    cap_volume, equivalence_constants, half_bounded_diagnostic, log_spaced, FamilyDeviation, FnSequence,
    HalfBoundedOptions, MultiplierFamily,
};
use sphere_multipliers::specialfns::{cumulative_dim, surface_area};

const SEED: u64 = 20_240_601;

struct Line {
    pass: bool,
    detail: String,
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Line) -> bool {
    let start = Instant::now();
    let line = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = line.pass && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
    println!(
        "[{}] {id:>2} {name}: {} ({:.2}s{budget})",
        if pass { "PASS" } else { "FAIL" },
        line.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn four_families(m: usize) -> Vec<MultiplierFamily<f64>> {
    vec![
        MultiplierFamily::shifting(m).unwrap(),
        MultiplierFamily::combination(m, 2).unwrap(),
        MultiplierFamily::cap(m).unwrap(),
        MultiplierFamily::steklov(m).unwrap(),
    ]
}

fn corpus() -> Vec<CoeffTable<f64>> {
    (0..100)
        .map(|i| CoeffTable::random_normal(2, 32, SEED + i).unwrap())
        .collect()
}

fn c1_parseval() -> Line {
    let basis = HarmonicBasis::new(32).unwrap();
    let s = MultiplierFamily::shifting(2).unwrap();
    let mut worst: f64 = 0.0;
    for f in corpus() {
        for t in [0.1, 0.5, 1.0] {
            worst = worst.max(parseval_equality_check(&basis, &f, &s, t).unwrap().value);
        }
    }
    Line {
        pass: worst <= 1e-9,
        detail: format!("max relative residual {worst:.3e} <= 1e-9"),
    }
}

fn c2_hausdorff_young() -> Line {
    let basis = HarmonicBasis::new(32).unwrap();
    let s = MultiplierFamily::shifting(2).unwrap();
    let mut worst = f64::INFINITY;
    for f in corpus() {
        for t in [0.1, 0.5, 1.0] {
            worst = worst.min(l1_sup_check(&basis, &f, &s, t, HyConstant::Stated).unwrap().value);
            for p in [1.25, 1.5, 1.75] {
                let c = hausdorff_young_check(&basis, &f, &s, t, p, HyConstant::Stated).unwrap();
                worst = worst.min(c.value);
            }
        }
    }
    Line {
        pass: worst >= -1e-6,
        detail: format!("min margin {worst:.4e} >= -1e-6 (p in 1, 1.25, 1.5, 1.75; stated constant)"),
    }
}

fn c3_kernel_identity() -> Line {
    let basis = HarmonicBasis::new(32).unwrap();
    let kern = CoefficientKernel::random(2, 32, 2.5, SEED).unwrap();
    let mut grid_worst: f64 = 0.0;
    for t in [0.05, 0.3, 1.2] {
        for fam in [
            MultiplierFamily::shifting(2).unwrap(),
            MultiplierFamily::cap(2).unwrap(),
        ] {
            grid_worst = grid_worst.max(kernel_identity_grid(&basis, &kern, &fam, t).unwrap().value);
        }
    }
    let ts = log_spaced(1e-2, 3.0, 8);
    let mut zonal_worst: f64 = 0.0;
    for m in 2..=5 {
        let z = power_law_zonal(m, 32, 3.0).unwrap();
        for fam in four_families(m) {
            for &t in &ts {
                zonal_worst = zonal_worst.max(kernel_identity_zonal(&z, &fam, t).unwrap().value);
            }
        }
    }
    Line {
        pass: grid_worst <= 1e-9 && zonal_worst <= 1e-12,
        detail: format!("grid {grid_worst:.3e} <= 1e-9, zonal m=2..5 {zonal_worst:.3e} <= 1e-12"),
    }
}

fn c4_lemma_identity() -> Line {
    let ts = log_spaced(1e-2, 3.0, 8);
    let mut worst: f64 = 0.0;
    let mut bound_misses = Vec::new();
    for m in [2, 3] {
        let z = power_law_zonal(m, 64, 3.0).unwrap();
        for fam in four_families(m) {
            for &t in &ts {
                let r = sqrt_deviation_identity_check(&z, &fam, t).unwrap();
                worst = worst.max(r.residual);
                if !r.bound_holds {
                    bound_misses.push(format!("{} m={m} t={t:.2}", fam.name()));
                }
            }
        }
    }
    Line {
        pass: worst <= 1e-12,
        detail: format!(
            "max residual {worst:.3e} <= 1e-12; (|eta_0|+1) g(t) bound misses: [{}]",
            bound_misses.join(", ")
        ),
    }
}

fn c5_reproducing() -> Line {
    let z = power_law_zonal::<f64>(2, 16, 3.0).unwrap();
    let r = reproducing_check(&z, 32, 32, SEED).unwrap();
    Line {
        pass: r.max_residual <= 1e-9,
        detail: format!(
            "max residual {:.3e} <= 1e-9 over {} pairs, exactness {}",
            r.max_residual, r.pairs_checked, r.exact_degree
        ),
    }
}

fn c6_equivalence() -> Line {
    let ts = log_spaced(1e-3, FRAC_PI_2, 48);
    let mut pass = true;
    let mut parts = Vec::new();
    for (fam, s) in [
        (MultiplierFamily::shifting(2).unwrap(), 2.0),
        (MultiplierFamily::combination(2, 2).unwrap(), 4.0),
        (MultiplierFamily::cap(2).unwrap(), 2.0),
        (MultiplierFamily::steklov(2).unwrap(), 2.0),
    ] {
        let r = equivalence_constants(&fam, s, 1, 200, &ts).unwrap();
        let ok = r.c_low > 0.0 && r.certifies(1e4);
        pass &= ok;
        parts.push(format!(
            "{} {:.3e}/{:.3e}={:.1}",
            fam.name(),
            r.c_high,
            r.c_low,
            r.c_high / r.c_low
        ));
    }
    Line {
        pass,
        detail: format!("c_high/c_low <= 1e4: {}", parts.join(", ")),
    }
}

/// `∫_0^t sin^{m-1}` in closed form for `m = 2, 3, 4`, written without
/// cancellation at small `t`.
fn sin_power_integral(t: f64, m: usize) -> f64 {
    let half = (t / 2.0).sin();
    match m {
        2 => 2.0 * half * half,
        // (2t - sin 2t)/4 as its alternating series
        3 => {
            let x = 2.0 * t;
            let (mut term, mut sum) = (x * x * x / 6.0, 0.0);
            for j in 1..40 {
                sum += term;
                term *= -x * x / ((2 * j + 2) as f64 * (2 * j + 3) as f64);
            }
            sum / 4.0
        }
        4 => 4.0 * half.powi(4) * (2.0 + t.cos()) / 3.0,
        _ => unreachable!(),
    }
}

fn c7_cap_bracket() -> Line {
    let ts: Vec<f64> = (1..=32).map(|i| FRAC_PI_2 * i as f64 / 32.0).collect();
    let mut pass = true;
    let mut worst_quad: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for m in [2usize, 3, 4] {
        let w = surface_area::<f64>(m - 1).unwrap();
        for &t in &ts {
            let c = cap_volume(t, m, 64).unwrap();
            let exact = w * sin_power_integral(t, m);
            worst_quad = worst_quad.max((c - exact).abs() / exact);
            let lower = w / m as f64 * (2.0 / PI).powi(m as i32 - 1) * t.powi(m as i32);
            let upper = w * t.powi(m as i32);
            pass &= lower <= c * (1.0 + 1e-12) && c <= upper * (1.0 + 1e-12);
            min_gap = min_gap.min(((c - lower) / c).min((upper - c) / c));
        }
    }
    Line {
        pass: pass && worst_quad < 1e-12,
        detail: format!(
            "32 t in (0, pi/2], m=2,3,4; min relative gap {min_gap:.3e}, cap volume vs closed form {worst_quad:.1e}"
        ),
    }
}

/// Direct `g(t) = Σ (1 - P_k(cos t)) (2k+1) (1+k)^{-γ}` with a plain Legendre recurrence.
fn g_oracle(t: f64, k_max: usize, gamma: f64) -> f64 {
    let x = t.cos();
    let (mut p0, mut p1) = (1.0, x);
    let mut g = 0.0;
    for k in 1..=k_max {
        if k > 1 {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        g += (1.0 - p1) * (2 * k + 1) as f64 * (1.0 + k as f64).powf(-gamma);
    }
    g
}

fn c8_holder() -> Line {
    let ts = log_spaced(1e-3, 1e-1, 21);
    let s = MultiplierFamily::shifting(2).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (gamma, target) in [(2.5, 1.5), (6.0, 2.0)] {
        let kern = power_law_zonal(2, 256, gamma).unwrap();
        let fit = holder_exponent_fit(&kern, &s, &ts).unwrap();
        let oracle: Vec<(f64, f64)> = ts.iter().map(|&t| (t, g_oracle(t, 256, gamma))).collect();
        let ofit = loglog_fit(&oracle).unwrap();
        let ok = (fit.slope - target).abs() <= 0.1 && (fit.slope - ofit.slope).abs() <= 1e-3;
        pass &= ok;
        parts.push(format!(
            "gamma={gamma}: {:.4} (oracle {:.4}, target {target}±0.1)",
            fit.slope, ofit.slope
        ));
    }
    Line {
        pass,
        detail: parts.join("; "),
    }
}

/// Eigenvalues by expanding the degree multiplicities and sorting.
fn sorted_oracle(a: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = a
        .iter()
        .enumerate()
        .flat_map(|(k, &ak)| std::iter::repeat_n(ak, 2 * k + 1))
        .collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

fn window_sups(lambdas: &[f64], windows: &[(usize, usize)], exponent: f64) -> Vec<f64> {
    windows
        .iter()
        .map(|&(lo, hi)| {
            (lo..=hi)
                .map(|n| lambdas[n - 1] * (n as f64).powf(exponent))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn c9_decay() -> Line {
    let beta = 1.5;
    let n_max = cumulative_dim(128, 2).unwrap() as usize;
    let windows = dyadic_windows(16, n_max);
    let matched = ZonalKernel::new(2, (0..=128).map(|k| (1.0 + k as f64).powf(-2.0 - beta)).collect()).unwrap();
    let slow = ZonalKernel::new(2, (0..=128).map(|k| (1.0 + k as f64).powf(-2.0 - beta / 2.0)).collect()).unwrap();

    let seq = matched.eigenvalue_sequence().unwrap();
    let r = decay_check(&seq, beta, 2, &windows).unwrap();
    let oracle = sorted_oracle(matched.coefficients());
    let osups = window_sups(&oracle, &windows, 1.0 + beta / 2.0);
    let ospread = osups.iter().copied().fold(0.0, f64::max) / osups.iter().copied().fold(f64::INFINITY, f64::min);
    let agree = seq.lambdas() == oracle.as_slice() && (r.spread - ospread).abs() < 1e-12;

    let neg = decay_check(&slow.eigenvalue_sequence().unwrap(), beta, 2, &windows).unwrap();
    let nsups = window_sups(&sorted_oracle(slow.coefficients()), &windows, 1.0 + beta / 2.0);
    let oracle_explodes = nsups.windows(2).all(|w| w[1] > w[0]) && nsups[nsups.len() - 1] / nsups[0] > 4.0;

    Line {
        pass: windows.len() == 11 && r.bounded(2.0) && agree && neg.explodes(4.0) && oracle_explodes,
        detail: format!(
            "{} windows to n={n_max}: spread {:.4} <= 2 (oracle {:.4}); control growth {:.2} > 4, monotone {}",
            windows.len(),
            r.spread,
            ospread,
            neg.growth,
            neg.monotone_increasing
        ),
    }
}

fn c10_half_bounded() -> Line {
    let opts = HalfBoundedOptions::default();
    let example = FnSequence(|k: usize, n: usize| k as f64 / (k + n) as f64);
    let ex = half_bounded_diagnostic(&example, 200, 100, &opts).unwrap();
    let s = MultiplierFamily::<f64>::shifting(2).unwrap();
    let sh = half_bounded_diagnostic(&FamilyDeviation(&s), 200, 100, &opts).unwrap();
    Line {
        pass: ex.m_lower == 0.5 && sh.m_lower > 0.0 && sh.tails_vanish(1e-3),
        detail: format!(
            "k/(k+n): M_lower = {} (exactly 1/2); shifting K=200, N=100: M_lower = {:.4e} at {:?}",
            ex.m_lower, sh.m_lower, sh.argmin
        ),
    }
}

const SUITE_CONFIG: &str = r#"seed = 7
[kernel]
source = "power_law"
k_max = 16
gamma = 3.0
[lattice]
function_k_max = 16
n_functions = 8
k_max = 24
fit_window = [0.01, 0.5]
fit_points = 9
pipeline_window = [0.05, 0.5]
half_k = 60
half_n = 30
decay_lo = 4
"#;

fn run_suite(bin: &Path, cfg: &Path, out: &Path) -> Vec<(String, Vec<u8>)> {
    let mut cmds: Vec<Vec<&str>> = vec![
        vec!["multipliers"],
        vec!["multipliers", "--format", "json", "--family", "steklov"],
        vec!["fit-holder"],
        vec!["eigen"],
        vec!["eigen", "--format", "json"],
    ];
    for c in [
        "parseval",
        "hy",
        "l1sup",
        "kernel-identity",
        "lemma23",
        "keyabst",
        "decay",
        "pipeline",
        "reproducing",
    ] {
        cmds.push(vec!["verify", c]);
    }
    for c in &cmds {
        let status = Command::new(bin)
            .args(c)
            .arg("--config")
            .arg(cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap()
            .status;
        assert!(matches!(status.code(), Some(0 | 1)), "{c:?}: {status}");
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn c11_determinism() -> Line {
    let bin = Path::new(env!("CARGO_BIN_EXE_sphmult"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, SUITE_CONFIG).unwrap();
    let a = run_suite(bin, &cfg, &dir.path().join("a"));
    let b = run_suite(bin, &cfg, &dir.path().join("b"));
    let bytes: usize = a.iter().map(|f| f.1.len()).sum();
    Line {
        pass: !a.is_empty() && a == b,
        detail: format!("{} files, {bytes} bytes, identical: {}", a.len(), a == b),
    }
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        run(1, "Parseval equality", secs(10), c1_parseval),
        run(2, "Hausdorff-Young inequalities", secs(30), c2_hausdorff_young),
        run(3, "kernel Fourier identity", secs(20), c3_kernel_identity),
        run(4, "square-root deviation identity", None, c4_lemma_identity),
        run(5, "square-root reproducing property", None, c5_reproducing),
        run(6, "multiplier equivalence constants", secs(60), c6_equivalence),
        run(7, "cap-volume bracket", None, c7_cap_bracket),
        run(8, "Hoelder exponent recovery", secs(30), c8_holder),
        run(9, "eigenvalue decay", None, c9_decay),
        run(10, "half-boundedness", None, c10_half_bounded),
        run(11, "determinism", None, c11_determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
