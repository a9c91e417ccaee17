//! Gauss rules on `[-1, 1]`, profile integrals, the zonal reduction of
//! integrals over `S^m`, and product grids on `S^2`.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::specialfns::surface_area;
use crate::summation::csum;
use crate::{Error, Result, Scalar};

/// Default node count for profile integrals.
pub const DEFAULT_PROFILE_NODES: usize = 64;
/// Largest supported rule size.
pub const MAX_RULE_NODES: usize = 4096;
/// Largest band limit accepted by [`sphere_grid`].
pub const MAX_GRID_DEGREE: usize = 256;

const MAX_NEWTON_STEPS: usize = 100;

/// A Gauss quadrature rule on `[-1, 1]`.
///
/// Nodes are strictly increasing and exactly symmetric about 0; the rule is
/// exact for polynomials of degree `order` (`2n - 1`) against its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    order: usize,
}

impl<T: Scalar> Rule<T> {
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial exactness degree.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        csum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    /// The rule transplanted to `[a, b]`.
    pub fn integrate_on<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) / T::of(2.0);
        let mid = (a + b) / T::of(2.0);
        half * self.integrate(|x| f(mid + half * x))
    }

    /// Nodes of the rule mapped to `[a, b]`, with correspondingly scaled weights.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::of(2.0);
        let mid = (a + b) / T::of(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKind {
    Legendre,
    Gegenbauer(u64),
}

type RuleCache = RwLock<HashMap<(TypeId, RuleKind, usize), Arc<dyn Any + Send + Sync>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached_rule<T: Scalar>(kind: RuleKind, n: usize, build: impl FnOnce() -> Result<Rule<T>>) -> Result<Arc<Rule<T>>> {
    let key = (TypeId::of::<T>(), kind, n);
    if let Some(hit) = rule_cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(hit.clone().downcast::<Rule<T>>().expect("rule cache type mismatch"));
    }
    let mut table = rule_cache().write().expect("rule cache poisoned");
    // another thread may have built it while we waited for the lock
    if let Some(hit) = table.get(&key) {
        return Ok(hit.clone().downcast::<Rule<T>>().expect("rule cache type mismatch"));
    }
    let rule = Arc::new(build()?);
    table.insert(key, rule.clone());
    Ok(rule)
}

/// `C_n^λ(x)`, `C_{n-1}^λ(x)`.
fn gegenbauer_pair<T: Scalar>(n: usize, lambda: T, x: T) -> (T, T) {
    let two = T::of(2.0);
    let mut prev = T::one();
    let mut cur = two * lambda * x;
    if n == 1 {
        return (cur, prev);
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let next = (two * (kf + lambda - T::one()) * x * cur - (kf + two * lambda - two) * prev) / kf;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Gauss rule for the weight `(1 - x²)^{λ - 1/2}` on `[-1, 1]`, i.e. the
/// zeros of `C_n^λ`. `λ = 1/2` is Gauss–Legendre.
fn build_gauss_gegenbauer<T: Scalar>(n: usize, lambda: T, legendre: bool) -> Result<Rule<T>> {
    if n == 0 || n > MAX_RULE_NODES {
        return Err(Error::Domain(format!(
            "rule size must be in 1..={MAX_RULE_NODES}, got {n}"
        )));
    }
    if !(lambda > T::zero()) {
        return Err(Error::Domain(format!(
            "Gegenbauer weight index must be positive, got {lambda}"
        )));
    }
    let nf = T::of_usize(n);
    let one = T::one();
    let two = T::of(2.0);
    let tol = T::newton_tol();
    // (1 - x²) C_n'(x) = (n + 2λ - 1) C_{n-1}(x) - n x C_n(x)
    let scaled_derivative = |x: T| {
        let (pn, pm1) = gegenbauer_pair(n, lambda, x);
        (pn, (nf + two * lambda - one) * pm1 - nf * x * pn)
    };
    let half_count = n.div_ceil(2);
    let mut positive = Vec::with_capacity(half_count);
    for i in 1..=half_count {
        if n % 2 == 1 && i == half_count {
            positive.push((T::zero(), scaled_derivative(T::zero()).1));
            break;
        }
        // asymptotic location of the i-th largest zero
        let theta = (T::of_usize(i) + lambda / two - T::of(0.5)) * T::PI() / (nf + lambda);
        let mut x = theta.cos();
        let mut last_step = T::infinity();
        let mut converged = false;
        for step in 0..MAX_NEWTON_STEPS {
            let (pn, d) = scaled_derivative(x);
            let dx = pn * (one - x * x) / d;
            x = x - dx;
            let size = dx.abs();
            if size <= tol {
                converged = true;
                break;
            }
            // rounding floor reached
            if step > 3 && size >= last_step && size <= T::of(1e3) * tol {
                converged = true;
                break;
            }
            last_step = size;
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "Newton iteration for zero {i} of the degree-{n} rule did not converge"
            )));
        }
        positive.push((x, scaled_derivative(x).1));
    }

    // weight ∝ (1 - x²) / [(1 - x²) C_n'(x)]²
    let raw = |x: T, d: T| (one - x * x) / (d * d);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for (i, &(x, d)) in positive.iter().enumerate() {
        let w = raw(x, d);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    let total = if legendre {
        // Legendre: w = 2 (1 - x²) / [(1 - x²) P_n']², exact scale
        for w in weights.iter_mut() {
            *w = two * *w;
        }
        None
    } else {
        // scale so the constant is integrated exactly
        let lam = lambda.as_f64();
        let mass = std::f64::consts::PI.sqrt() * (libm::lgamma(lam + 0.5) - libm::lgamma(lam + 1.0)).exp();
        Some(T::of(mass))
    };
    if let Some(mass) = total {
        let s = csum(weights.iter().copied());
        for w in weights.iter_mut() {
            *w = *w * mass / s;
        }
    }
    Ok(Rule {
        nodes,
        weights,
        order: 2 * n - 1,
    })
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]` (cached).
pub fn gauss_legendre<T: Scalar>(n: usize) -> Result<Arc<Rule<T>>> {
    cached_rule(RuleKind::Legendre, n, || build_gauss_gegenbauer(n, T::of(0.5), true))
}

/// Gauss rule for the weight `(1 - x²)^{λ - 1/2}` (cached).
pub fn gauss_gegenbauer<T: Scalar>(n: usize, lambda: T) -> Result<Arc<Rule<T>>> {
    let key = RuleKind::Gegenbauer(lambda.as_f64().to_bits());
    cached_rule(key, n, || build_gauss_gegenbauer(n, lambda, false))
}

/// `∫_a^b g(h) dh` by an `n`-node Gauss–Legendre rule.
///
/// A non-finite value of `g` at a node is reported with that node.
pub fn integrate_profile<T: Scalar, G: FnMut(T) -> T>(mut g: G, a: T, b: T, n: usize) -> Result<T> {
    if !(a < b) {
        return Err(Error::Domain(format!("integration interval [{a}, {b}] is empty")));
    }
    let rule = gauss_legendre::<T>(n)?;
    let mut bad = None;
    let value = rule.integrate_on(a, b, |h| {
        let v = g(h);
        if !v.is_finite() && bad.is_none() {
            bad = Some((h, v));
        }
        v
    });
    match bad {
        Some((h, v)) => Err(Error::Numeric(format!("integrand is {v} at node h = {h}"))),
        None => Ok(value),
    }
}

/// Normalized integral over `S^m` of the zonal function `x ↦ profile(x·e)`:
/// `(ω_{m-1}/ω_m) ∫_{-1}^{1} profile(u) (1 - u²)^{(m-2)/2} du`.
///
/// Uses an `n`-node Gauss–Gegenbauer rule with `λ = (m-1)/2`, exact for
/// polynomial profiles of degree `≤ 2n - 1`.
pub fn zonal_integral<T: Scalar, F: FnMut(T) -> T>(profile: F, m: usize, n: usize) -> Result<T> {
    if m < 2 {
        return Err(Error::Domain(format!("zonal_integral needs m >= 2, got {m}")));
    }
    let lambda = T::of((m as f64 - 1.0) / 2.0);
    let rule = gauss_gegenbauer::<T>(n, lambda)?;
    let ratio = surface_area::<T>(m - 1)? / surface_area::<T>(m)?;
    Ok(ratio * rule.integrate(profile))
}

/// Product quadrature on `S^2`: Gauss–Legendre in `cos θ` times a uniform
/// rule in longitude.
#[derive(Debug, Clone)]
pub struct SphereGrid<T> {
    cos_theta: Vec<T>,
    sin_theta: Vec<T>,
    ring_weights: Vec<T>,
    phi: Vec<T>,
    phi_weight: T,
    exact_degree: usize,
}

impl<T: Scalar> SphereGrid<T> {
    /// Grid with explicit ring and longitude counts.
    pub fn with_sizes(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_phi == 0 {
            return Err(Error::Domain("longitude count must be positive".into()));
        }
        let rule = gauss_legendre::<T>(n_theta)?;
        let cos_theta = rule.nodes().to_vec();
        let sin_theta = cos_theta.iter().map(|&c| (T::one() - c * c).sqrt()).collect();
        let step = T::of(2.0) * T::PI() / T::of_usize(n_phi);
        let phi = (0..n_phi).map(|j| step * T::of_usize(j)).collect();
        Ok(Self {
            cos_theta,
            sin_theta,
            ring_weights: rule.weights().to_vec(),
            phi,
            phi_weight: step,
            exact_degree: (2 * n_theta - 1).min(n_phi - 1),
        })
    }

    pub fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Spherical polynomials of degree up to this value integrate exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn cos_theta(&self) -> &[T] {
        &self.cos_theta
    }

    pub fn sin_theta(&self) -> &[T] {
        &self.sin_theta
    }

    pub fn ring_weights(&self) -> &[T] {
        &self.ring_weights
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn phi_weight(&self) -> T {
        self.phi_weight
    }

    /// Flat index of ring `i`, longitude `j`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_phi() + j
    }

    /// Surface weight of a node; the weights sum to `ω_2 = 4π`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        let _ = j;
        self.ring_weights[i] * self.phi_weight
    }

    /// Cartesian coordinates of a node.
    pub fn point(&self, i: usize, j: usize) -> [T; 3] {
        let s = self.sin_theta[i];
        let (sp, cp) = self.phi[j].sin_cos();
        [s * cp, s * sp, self.cos_theta[i]]
    }

    /// All node coordinates in flat (ring-major) order.
    pub fn points(&self) -> Vec<[T; 3]> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta() {
            for j in 0..self.n_phi() {
                out.push(self.point(i, j));
            }
        }
        out
    }

    /// `∫_{S^2} f dσ` for node values in flat order.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        if values.len() != self.len() {
            return Err(Error::Shape(format!(
                "grid has {} nodes, got {} values",
                self.len(),
                values.len()
            )));
        }
        let n_phi = self.n_phi();
        Ok(csum(self.ring_weights.iter().enumerate().map(|(i, &w)| {
            w * self.phi_weight * csum(values[i * n_phi..(i + 1) * n_phi].iter().copied())
        })))
    }

    /// `∫_{S^2} dσ` as seen by the grid.
    pub fn total_weight(&self) -> T {
        csum(self.ring_weights.iter().copied()) * self.phi_weight * T::of_usize(self.n_phi())
    }
}

/// Grid integrating every spherical polynomial of degree `≤ 2K` exactly:
/// `K + 2` rings and `2K + 2` longitudes.
pub fn sphere_grid<T: Scalar>(k: usize) -> Result<SphereGrid<T>> {
    if k > MAX_GRID_DEGREE {
        return Err(Error::Domain(format!(
            "sphere_grid band limit {k} exceeds {MAX_GRID_DEGREE}"
        )));
    }
    SphereGrid::with_sizes(k + 2, 2 * k + 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfns::gegenbauer_eval;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn monomial_integral(d: usize) -> f64 {
        if d % 2 == 1 {
            0.0
        } else {
            2.0 / (d as f64 + 1.0)
        }
    }

    #[test]
    fn one_point_rule() {
        let r = gauss_legendre::<f64>(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert_eq!(r.weights(), &[2.0]);
        assert_eq!(r.order(), 1);
    }

    #[test]
    fn x4_with_three_points() {
        let r = gauss_legendre::<f64>(3).unwrap();
        assert!((r.integrate(|x| x.powi(4)) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn odd_monomials_vanish() {
        for n in 1..40 {
            let r = gauss_legendre::<f64>(n).unwrap();
            assert!(r.integrate(|x| x.powi(2 * n as i32 - 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_on_polynomials() {
        for n in [1, 2, 3, 5, 8, 13, 20, 32, 64] {
            let r = gauss_legendre::<f64>(n).unwrap();
            for d in 0..=(2 * n - 1) {
                let exact = monomial_integral(d);
                let got = r.integrate(|x| x.powi(d as i32));
                assert!(
                    (got - exact).abs() <= 1e-13 * (1.0 + exact.abs()),
                    "n={n} d={d}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn rule_invariants() {
        for n in [1, 2, 7, 64, 301, 1024, 4096] {
            let r = gauss_legendre::<f64>(n).unwrap();
            let s: f64 = csum(r.weights().iter().copied());
            assert!((s - 2.0).abs() < 1e-13, "n={n}: weight sum {s}");
            for w in r.nodes().windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..n {
                assert!((r.nodes()[i] + r.nodes()[n - 1 - i]).abs() < 1e-13);
                assert!(r.weights()[i] > 0.0);
            }
        }
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_legendre::<f64>(4097).is_err());
    }

    #[test]
    fn single_precision_rule() {
        let r = gauss_legendre::<f32>(10).unwrap();
        assert!((r.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn gegenbauer_rule_is_exact() {
        // ∫ u^{2j} (1-u²)^{1/2} du against the λ = 1 rule, checked against a
        // fine Legendre rule in θ.
        for &lambda in &[1.0, 1.5, 2.0, 2.5] {
            let r = gauss_gegenbauer::<f64>(12, lambda).unwrap();
            let fine = gauss_legendre::<f64>(400).unwrap();
            for d in 0..=23usize {
                let got = r.integrate(|u| u.powi(d as i32));
                let reference =
                    fine.integrate_on(0.0, PI, |th: f64| th.cos().powi(d as i32) * th.sin().powf(2.0 * lambda));
                assert!(
                    (got - reference).abs() < 1e-13,
                    "λ={lambda} d={d}: {got} vs {reference}"
                );
            }
        }
    }

    #[test]
    fn profile_integrals() {
        let t = 0.8;
        assert_relative_eq!(integrate_profile(|_| 1.0, 0.0, t, 5).unwrap(), t, max_relative = 1e-15);
        assert!((integrate_profile(f64::sin, 0.0, PI / 2.0, 20).unwrap() - 1.0).abs() < 1e-13);
        for m in 2..=4usize {
            let mass = integrate_profile(|h: f64| h.sin().powi(m as i32 - 1), 0.0, PI, 64).unwrap();
            let ratio = surface_area::<f64>(m - 1).unwrap() / surface_area::<f64>(m).unwrap();
            assert!((mass * ratio - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn profile_errors() {
        assert!(integrate_profile(|_| 1.0, 1.0, 1.0, 4).is_err());
        let err = integrate_profile(|h: f64| if h > 0.5 { f64::NAN } else { h }, 0.0, 1.0, 8).unwrap_err();
        assert!(err.to_string().contains("node h ="), "{err}");
    }

    #[test]
    fn zonal_integral_basics() {
        for m in 2..=6 {
            assert!((zonal_integral(|_| 1.0f64, m, 16).unwrap() - 1.0).abs() < 1e-14);
            assert!(zonal_integral(|u: f64| u, m, 16).unwrap().abs() < 1e-15);
            for k in 1..20 {
                let l = (m as f64 - 1.0) / 2.0;
                let v = zonal_integral(|u| gegenbauer_eval(k, l, u), m, 64).unwrap();
                assert!(v.abs() < 1e-12, "m={m} k={k}: {v}");
            }
        }
        // orthogonality holds for the index matching the sphere (λ = 1 on S^3);
        // the Legendre P_2 is not orthogonal to constants there: the average is
        // (ω_2/ω_3)·(3π/8 - π/2)/2 = -1/8
        assert!(
            zonal_integral(|u: f64| gegenbauer_eval(2, 1.0, u), 3, 64)
                .unwrap()
                .abs()
                < 1e-12
        );
        let p2 = zonal_integral(|u: f64| gegenbauer_eval(2, 0.5, u), 3, 64).unwrap();
        assert!((p2 + 0.125).abs() < 1e-14, "{p2}");
        assert!(zonal_integral(|u: f64| u, 1, 4).is_err());
    }

    #[test]
    fn grid_total_weight() {
        for k in [0, 1, 8, 32] {
            let g = sphere_grid::<f64>(k).unwrap();
            assert!((g.total_weight() / (4.0 * PI) - 1.0).abs() < 1e-12);
            assert!(g.exact_degree() >= 2 * k);
        }
        assert!(sphere_grid::<f64>(257).is_err());
    }

    #[test]
    fn grid_integrates_monomials() {
        // ∫ x^a y^b z^c over S^2 for a + b + c ≤ 2K
        let g = sphere_grid::<f64>(4).unwrap();
        let pts = g.points();
        let exact = |a: i32, b: i32, c: i32| -> f64 {
            if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
                return 0.0;
            }
            // 2 Γ(α)Γ(β)Γ(γ)/Γ(α+β+γ), α = (a+1)/2 ...
            let (al, be, ga) = ((a as f64 + 1.0) / 2.0, (b as f64 + 1.0) / 2.0, (c as f64 + 1.0) / 2.0);
            2.0 * (libm::lgamma(al) + libm::lgamma(be) + libm::lgamma(ga) - libm::lgamma(al + be + ga)).exp()
        };
        for a in 0..=8 {
            for b in 0..=(8 - a) {
                for c in 0..=(8 - a - b) {
                    let vals: Vec<f64> = pts.iter().map(|p| p[0].powi(a) * p[1].powi(b) * p[2].powi(c)).collect();
                    let got = g.integrate(&vals).unwrap();
                    assert!((got - exact(a, b, c)).abs() < 1e-13, "{a} {b} {c}");
                }
            }
        }
    }
}
