//! Multiplier families `t ↦ {η_k^t}` on `S^m`: shifting, combinations of
//! shiftings, cap averages, Steklov-type means, and user-supplied sequences.
//!
//! Every family evaluates the deviation `1 - η_k^t` directly and derives
//! `η_k^t` from it, so that the small deviations in the approximate-identity
//! regime keep their relative accuracy.

mod diagnostics;
mod families;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

pub use diagnostics::{
    equivalence_constants, half_bounded_diagnostic, log_spaced, uniform_bound, DecayRow, DoubleSequence,
    EquivalenceReport, FamilyDeviation, FnSequence, HalfBoundedOptions, HalfBoundedReport,
};
pub use families::{
    cap_multiplier, cap_volume, combo_coefficients, combo_multiplier, shifting_multiplier, steklov_multiplier,
    steklov_normalizer, STEKLOV_PANEL_NODES,
};

use crate::specialfns::binomial;
use crate::{Error, Result, Scalar};

/// Built-in family names accepted by [`MultiplierFamily::by_name`].
pub const FAMILY_NAMES: [&str; 5] = ["shifting", "combo", "cap", "steklov", "custom"];

/// Node count used for the `[0, t]` integrals of the cap and Steklov families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadPolicy {
    /// Degree `k` uses `max(64, k.next_power_of_two())` nodes, so a value
    /// never depends on how many degrees were requested alongside it.
    Bucketed,
    /// The same node count for every degree.
    Fixed(usize),
}

impl QuadPolicy {
    pub fn nodes_for(self, k: usize) -> usize {
        match self {
            Self::Bucketed => k.next_power_of_two().max(crate::quadrature::DEFAULT_PROFILE_NODES),
            Self::Fixed(n) => n,
        }
    }
}

/// `η_k^t` given at finitely many `(k, t)` lattice points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiplierTable<T> {
    entries: BTreeMap<(u64, usize), T>,
}

impl<T: Scalar> MultiplierTable<T> {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, k: usize, t: T, eta: T) {
        self.entries.insert((t.as_f64().to_bits(), k), eta);
    }

    pub fn get(&self, k: usize, t: T) -> Result<T> {
        self.entries
            .get(&(t.as_f64().to_bits(), k))
            .copied()
            .ok_or(Error::Lookup { k, t: t.as_f64() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: Scalar> FromIterator<(usize, T, T)> for MultiplierTable<T> {
    fn from_iter<I: IntoIterator<Item = (usize, T, T)>>(iter: I) -> Self {
        let mut table = Self::new();
        for (k, t, eta) in iter {
            table.insert(k, t, eta);
        }
        table
    }
}

type EtaFn<T> = Arc<dyn Fn(usize, T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum FamilyKind<T> {
    Shifting,
    Combination {
        l: usize,
    },
    CapAverage,
    Steklov,
    Table(Arc<MultiplierTable<T>>),
    Function(EtaFn<T>),
    /// Closure giving `1 - η_k^t` directly.
    Deviation(EtaFn<T>),
}

impl<T> fmt::Debug for FamilyKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shifting => f.write_str("Shifting"),
            Self::Combination { l } => write!(f, "Combination {{ l: {l} }}"),
            Self::CapAverage => f.write_str("CapAverage"),
            Self::Steklov => f.write_str("Steklov"),
            Self::Table(t) => write!(f, "Table({} entries)", t.entries.len()),
            Self::Function(_) => f.write_str("Function"),
            Self::Deviation(_) => f.write_str("Deviation"),
        }
    }
}

#[derive(Debug)]
struct Row<T> {
    eta: Vec<T>,
    deviation: Vec<T>,
}

type Memo<T> = Arc<RwLock<HashMap<u64, Arc<Row<T>>>>>;

/// A family of multiplier sequences `{η_k^t}` with its declared equivalence
/// exponent `s` and uniform bound on `|η_k^t|`.
///
/// Values are memoized per `t`; clones share the memo.
#[derive(Clone)]
pub struct MultiplierFamily<T> {
    name: String,
    m: usize,
    kind: FamilyKind<T>,
    declared_s: Option<f64>,
    declared_uniform_bound: f64,
    quad: QuadPolicy,
    memo: Memo<T>,
}

impl<T> fmt::Debug for MultiplierFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierFamily")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("kind", &self.kind)
            .field("declared_s", &self.declared_s)
            .field("declared_uniform_bound", &self.declared_uniform_bound)
            .field("quad", &self.quad)
            .finish()
    }
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Domain(format!("multiplier families need m >= 2, got {m}")));
    }
    Ok(())
}

impl<T: Scalar> MultiplierFamily<T> {
    fn build(name: String, m: usize, kind: FamilyKind<T>, s: Option<f64>, bound: f64) -> Self {
        Self {
            name,
            m,
            kind,
            declared_s: s,
            declared_uniform_bound: bound,
            quad: QuadPolicy::Bucketed,
            memo: Arc::default(),
        }
    }

    /// `η_k^t = C_k(cos t) / C_k(1)`.
    pub fn shifting(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self::build("shifting".into(), m, FamilyKind::Shifting, Some(2.0), 1.0))
    }

    /// `η_k^t(l) = -2 binom(2l, l)^{-1} Σ_{j=1}^{l} (-1)^j binom(2l, l-j) C_k(cos jt)/C_k(1)`.
    pub fn combination(m: usize, l: usize) -> Result<Self> {
        check_m(m)?;
        if !(1..=10).contains(&l) {
            return Err(Error::Domain(format!("combination order l must be in 1..=10, got {l}")));
        }
        let central = binomial(2 * l as u64, l as u64)? as f64;
        let bound = 2f64.powi(2 * l as i32) / central - 1.0;
        Ok(Self::build(
            format!("combo{l}"),
            m,
            FamilyKind::Combination { l },
            Some(2.0 * l as f64),
            bound,
        ))
    }

    /// Averages over caps of geodesic radius `t`.
    pub fn cap(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self::build("cap".into(), m, FamilyKind::CapAverage, Some(2.0), 1.0))
    }

    /// Steklov-type means of the cap averages.
    pub fn steklov(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self::build("steklov".into(), m, FamilyKind::Steklov, Some(2.0), 1.0))
    }

    /// `η ≡ 1`.
    pub fn identity(m: usize) -> Self {
        Self::build(
            "identity".into(),
            m,
            FamilyKind::Function(Arc::new(|_, _| T::one())),
            None,
            1.0,
        )
    }

    /// A family defined by a table of `(k, t)` lattice values.
    pub fn custom(m: usize, table: MultiplierTable<T>, declared_s: Option<f64>, declared_uniform_bound: f64) -> Self {
        Self::build(
            "custom".into(),
            m,
            FamilyKind::Table(Arc::new(table)),
            declared_s,
            declared_uniform_bound,
        )
    }

    /// A family defined by a closure `(k, t) ↦ η_k^t`.
    pub fn from_fn<F>(name: &str, m: usize, f: F, declared_s: Option<f64>, declared_uniform_bound: f64) -> Self
    where
        F: Fn(usize, T) -> T + Send + Sync + 'static,
    {
        Self::build(
            name.into(),
            m,
            FamilyKind::Function(Arc::new(f)),
            declared_s,
            declared_uniform_bound,
        )
    }

    /// A family defined by a closure `(k, t) ↦ 1 - η_k^t`, for sequences
    /// whose deviation is known in closed form.
    pub fn from_deviation_fn<F>(
        name: &str,
        m: usize,
        f: F,
        declared_s: Option<f64>,
        declared_uniform_bound: f64,
    ) -> Self
    where
        F: Fn(usize, T) -> T + Send + Sync + 'static,
    {
        Self::build(
            name.into(),
            m,
            FamilyKind::Deviation(Arc::new(f)),
            declared_s,
            declared_uniform_bound,
        )
    }

    /// Built-in family by name; `l` is used by `combo` only.
    pub fn by_name(name: &str, m: usize, l: usize) -> Result<Self> {
        match name {
            "shifting" => Self::shifting(m),
            "combo" => Self::combination(m, l),
            "cap" => Self::cap(m),
            "steklov" => Self::steklov(m),
            "custom" => Err(Error::Config("the custom family needs a table of values".into())),
            other => Err(Error::Config(format!(
                "unknown family `{other}`; valid names: {}",
                FAMILY_NAMES.join(", ")
            ))),
        }
    }

    /// Replaces the quadrature policy (clears the memo).
    pub fn with_quadrature(mut self, quad: QuadPolicy) -> Self {
        self.quad = quad;
        self.memo = Arc::default();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &FamilyKind<T> {
        &self.kind
    }

    pub fn declared_s(&self) -> Option<f64> {
        self.declared_s
    }

    pub fn declared_uniform_bound(&self) -> f64 {
        self.declared_uniform_bound
    }

    pub fn quadrature(&self) -> QuadPolicy {
        self.quad
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(
            self.kind,
            FamilyKind::Table(_) | FamilyKind::Function(_) | FamilyKind::Deviation(_)
        )
    }

    /// `η_k^t`.
    pub fn eval(&self, k: usize, t: T) -> Result<T> {
        Ok(self.row(k, t)?.eta[k])
    }

    /// `η_0^t, …, η_{k_max}^t`.
    pub fn eval_upto(&self, k_max: usize, t: T) -> Result<Vec<T>> {
        Ok(self.row(k_max, t)?.eta[..=k_max].to_vec())
    }

    /// `1 - η_0^t, …, 1 - η_{k_max}^t`, accurate to full relative precision
    /// for the built-in families.
    pub fn deviations_upto(&self, k_max: usize, t: T) -> Result<Vec<T>> {
        Ok(self.row(k_max, t)?.deviation[..=k_max].to_vec())
    }

    fn row(&self, k_max: usize, t: T) -> Result<Arc<Row<T>>> {
        let key = t.as_f64().to_bits();
        if let Some(row) = self.memo.read().expect("memo lock poisoned").get(&key) {
            if row.eta.len() > k_max {
                return Ok(Arc::clone(row));
            }
        }
        let row = Arc::new(self.compute(k_max, t)?);
        let mut memo = self.memo.write().expect("memo lock poisoned");
        let slot = memo.entry(key).or_insert_with(|| Arc::clone(&row));
        if slot.eta.len() < row.eta.len() {
            *slot = Arc::clone(&row);
        }
        Ok(row)
    }

    fn compute(&self, k_max: usize, t: T) -> Result<Row<T>> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("multiplier parameter t = {t} is not finite")));
        }
        let deviation = match &self.kind {
            FamilyKind::Shifting => {
                families::check_t(t)?;
                families::shifting_deviations(k_max, t, self.m)
            }
            FamilyKind::Combination { l } => {
                families::check_t(t)?;
                families::combo_deviations(k_max, t, *l, self.m)?
            }
            FamilyKind::CapAverage => {
                families::check_t(t)?;
                families::bucketed(k_max, self.quad, |hi, n| families::cap_deviations(hi, t, self.m, n))?
            }
            FamilyKind::Steklov => {
                families::check_t(t)?;
                families::bucketed(k_max, self.quad, |hi, n| families::steklov_deviations(hi, t, self.m, n))?
            }
            FamilyKind::Table(table) => {
                let eta = (0..=k_max).map(|k| table.get(k, t)).collect::<Result<Vec<_>>>()?;
                return Ok(Row {
                    deviation: eta.iter().map(|&e| T::one() - e).collect(),
                    eta,
                });
            }
            FamilyKind::Function(f) => {
                let eta: Vec<T> = (0..=k_max).map(|k| f(k, t)).collect();
                return Ok(Row {
                    deviation: eta.iter().map(|&e| T::one() - e).collect(),
                    eta,
                });
            }
            FamilyKind::Deviation(f) => (0..=k_max).map(|k| f(k, t)).collect(),
        };
        Ok(Row {
            eta: deviation.iter().map(|&d| T::one() - d).collect(),
            deviation,
        })
    }
}
