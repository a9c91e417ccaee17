//! Real orthonormal spherical harmonics on `S^2` and transforms on a
//! [`SphereGrid`].
//!
//! `Y_{k,0} = P̄_{k,0}(cos θ)`, `Y_{k,2q-1} = P̄_{k,q}(cos θ) cos qφ`,
//! `Y_{k,2q} = P̄_{k,q}(cos θ) sin qφ`, with `P̄` the 4π-normalized associated
//! Legendre functions, so `(1/4π) ∫ Y_{k,j}² dσ = 1`.

use rayon::prelude::*;

use crate::kernels::CoeffTable;
use crate::quadrature::{sphere_grid, SphereGrid};
use crate::specialfns::surface_area;
use crate::summation::{csum, CompensatedSum};
use crate::{Error, Result, Scalar};

#[inline]
fn tri(n: usize, q: usize) -> usize {
    n * (n + 1) / 2 + q
}

/// `P̄_{n,q}(x)` for `0 ≤ q ≤ n ≤ k_max` at `x = cos θ`, `s = sin θ`, stored
/// at index `n(n+1)/2 + q`.
pub fn normalized_legendre_all<T: Scalar>(k_max: usize, x: T, s: T, out: &mut Vec<T>) {
    out.clear();
    out.resize(tri(k_max, k_max) + 1, T::zero());
    let mut diag = T::one();
    for q in 0..=k_max {
        if q == 1 {
            diag = T::of(3.0).sqrt() * s;
        } else if q >= 2 {
            let qf = T::of_usize(q);
            diag = ((T::of(2.0) * qf + T::one()) / (T::of(2.0) * qf)).sqrt() * s * diag;
        }
        out[tri(q, q)] = diag;
        if q == k_max {
            break;
        }
        let qf = T::of_usize(q);
        out[tri(q + 1, q)] = (T::of(2.0) * qf + T::of(3.0)).sqrt() * x * diag;
        for n in q + 2..=k_max {
            let nf = T::of_usize(n);
            let two = T::of(2.0);
            let nm = nf - qf;
            let np = nf + qf;
            let a = ((two * nf - T::one()) * (two * nf + T::one()) / (nm * np)).sqrt();
            let b = ((two * nf + T::one()) * (np - T::one()) * (nm - T::one()) / (nm * np * (two * nf - T::of(3.0))))
                .sqrt();
            out[tri(n, q)] = a * x * out[tri(n - 1, q)] - b * out[tri(n - 2, q)];
        }
    }
}

/// `Y_{k,j}` at a unit vector.
pub fn harmonic_value<T: Scalar>(k: usize, j: usize, point: [T; 3]) -> T {
    let x = point[2].max(-T::one()).min(T::one());
    let s = (point[0] * point[0] + point[1] * point[1]).sqrt();
    let phi = point[1].atan2(point[0]);
    let mut p = Vec::new();
    normalized_legendre_all(k, x, s, &mut p);
    let q = j.div_ceil(2);
    let leg = p[tri(k, q)];
    match j {
        0 => leg,
        _ if j % 2 == 1 => leg * (T::of_usize(q) * phi).cos(),
        _ => leg * (T::of_usize(q) * phi).sin(),
    }
}

/// Real harmonics up to degree `K_max` tabulated on a grid exact to degree
/// `2 K_max`.
#[derive(Debug, Clone)]
pub struct HarmonicBasis<T> {
    k_max: usize,
    grid: SphereGrid<T>,
    plm: Vec<T>,
    cos_tab: Vec<T>,
    sin_tab: Vec<T>,
    omega: T,
}

impl<T: Scalar> HarmonicBasis<T> {
    /// Basis on the default grid `sphere_grid(K_max)`.
    pub fn new(k_max: usize) -> Result<Self> {
        Self::with_grid(k_max, sphere_grid(k_max)?)
    }

    pub fn with_grid(k_max: usize, grid: SphereGrid<T>) -> Result<Self> {
        if grid.exact_degree() < 2 * k_max {
            return Err(Error::Shape(format!(
                "grid exact to degree {} cannot resolve band limit {k_max}",
                grid.exact_degree()
            )));
        }
        let per_ring = tri(k_max, k_max) + 1;
        let mut plm = Vec::with_capacity(per_ring * grid.n_theta());
        let mut buf = Vec::new();
        for (&x, &s) in grid.cos_theta().iter().zip(grid.sin_theta()) {
            normalized_legendre_all(k_max, x, s, &mut buf);
            plm.extend_from_slice(&buf);
        }
        let n_phi = grid.n_phi();
        let mut cos_tab = Vec::with_capacity(n_phi * (k_max + 1));
        let mut sin_tab = Vec::with_capacity(n_phi * (k_max + 1));
        for &phi in grid.phi() {
            for q in 0..=k_max {
                let a = T::of_usize(q) * phi;
                cos_tab.push(a.cos());
                sin_tab.push(a.sin());
            }
        }
        Ok(Self {
            k_max,
            grid,
            plm,
            cos_tab,
            sin_tab,
            omega: surface_area(2)?,
        })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn grid(&self) -> &SphereGrid<T> {
        &self.grid
    }

    #[inline]
    fn p(&self, ring: usize, n: usize, q: usize) -> T {
        self.plm[ring * (tri(self.k_max, self.k_max) + 1) + tri(n, q)]
    }

    #[inline]
    fn trig(&self, lon: usize, q: usize) -> (T, T) {
        let i = lon * (self.k_max + 1) + q;
        (self.cos_tab[i], self.sin_tab[i])
    }

    /// `Y_{k,j}` at grid node `(ring, lon)`.
    pub fn y_at(&self, k: usize, j: usize, ring: usize, lon: usize) -> T {
        let q = j.div_ceil(2);
        let leg = self.p(ring, k, q);
        let (c, s) = self.trig(lon, q);
        match j {
            0 => leg,
            _ if j % 2 == 1 => leg * c,
            _ => leg * s,
        }
    }

    fn check_table(&self, c: &CoeffTable<T>) -> Result<()> {
        if c.m() != 2 || c.k_max() > self.k_max {
            return Err(Error::Shape(format!(
                "coefficients on S^{} up to degree {} do not fit a basis on S^2 up to degree {}",
                c.m(),
                c.k_max(),
                self.k_max
            )));
        }
        Ok(())
    }

    /// Values `Σ c_{k,j} Y_{k,j}` at the grid nodes, ring-major.
    pub fn synthesize(&self, c: &CoeffTable<T>) -> Result<Vec<T>> {
        self.check_table(c)?;
        let kc = c.k_max();
        let n_phi = self.grid.n_phi();
        let rings: Vec<Vec<T>> = (0..self.grid.n_theta())
            .into_par_iter()
            .map(|ring| {
                let mut fc = vec![T::zero(); kc + 1];
                let mut fs = vec![T::zero(); kc + 1];
                for q in 0..=kc {
                    let mut ac = CompensatedSum::new();
                    let mut as_ = CompensatedSum::new();
                    for n in q..=kc {
                        let p = self.p(ring, n, q);
                        let b = c.block(n);
                        if q == 0 {
                            ac.add(b[0] * p);
                        } else {
                            ac.add(b[2 * q - 1] * p);
                            as_.add(b[2 * q] * p);
                        }
                    }
                    fc[q] = ac.value();
                    fs[q] = as_.value();
                }
                (0..n_phi)
                    .map(|lon| {
                        csum((0..=kc).map(|q| {
                            let (cq, sq) = self.trig(lon, q);
                            fc[q] * cq + fs[q] * sq
                        }))
                    })
                    .collect()
            })
            .collect();
        Ok(rings.concat())
    }

    /// `f̂(k, j) = (1/ω_2) ∫ f Y_{k,j} dσ` by grid quadrature, for `k ≤ k_max`.
    pub fn analyze(&self, values: &[T], k_max: usize) -> Result<CoeffTable<T>> {
        if values.len() != self.grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                self.grid.len()
            )));
        }
        if k_max > self.k_max {
            return Err(Error::Shape(format!(
                "band limit {k_max} exceeds basis limit {}",
                self.k_max
            )));
        }
        let n_phi = self.grid.n_phi();
        let dphi = self.grid.phi_weight();
        // per ring and order: longitude sums of f cos qφ and f sin qφ
        let ring_sums: Vec<(Vec<T>, Vec<T>)> = (0..self.grid.n_theta())
            .into_par_iter()
            .map(|ring| {
                let row = &values[ring * n_phi..(ring + 1) * n_phi];
                (0..=k_max)
                    .map(|q| {
                        let c = csum(row.iter().enumerate().map(|(lon, &f)| f * self.trig(lon, q).0));
                        let s = csum(row.iter().enumerate().map(|(lon, &f)| f * self.trig(lon, q).1));
                        (c * dphi, s * dphi)
                    })
                    .unzip()
            })
            .collect();
        let mut table = CoeffTable::zeros(2, k_max)?;
        let weights = self.grid.ring_weights();
        for n in 0..=k_max {
            let block = table.block_mut(n);
            for q in 0..=n {
                let mut ac = CompensatedSum::new();
                let mut as_ = CompensatedSum::new();
                for (ring, (cs, ss)) in ring_sums.iter().enumerate() {
                    let w = weights[ring] * self.p(ring, n, q);
                    ac.add(w * cs[q]);
                    as_.add(w * ss[q]);
                }
                if q == 0 {
                    block[0] = ac.value() / self.omega;
                } else {
                    block[2 * q - 1] = ac.value() / self.omega;
                    block[2 * q] = as_.value() / self.omega;
                }
            }
        }
        Ok(table)
    }

    /// `Σ c_{k,j} Y_{k,j}(x)` at an arbitrary unit vector.
    pub fn eval_point(&self, c: &CoeffTable<T>, point: [T; 3]) -> Result<T> {
        self.check_table(c)?;
        let kc = c.k_max();
        let x = point[2].max(-T::one()).min(T::one());
        let s = (point[0] * point[0] + point[1] * point[1]).sqrt();
        let phi = point[1].atan2(point[0]);
        let mut p = Vec::new();
        normalized_legendre_all(kc, x, s, &mut p);
        let mut acc = CompensatedSum::new();
        for n in 0..=kc {
            let b = c.block(n);
            acc.add(b[0] * p[tri(n, 0)]);
            for q in 1..=n {
                let a = T::of_usize(q) * phi;
                acc.add(p[tri(n, q)] * (b[2 * q - 1] * a.cos() + b[2 * q] * a.sin()));
            }
        }
        Ok(acc.value())
    }

    /// `((1/ω_2) ∫ |f|^p dσ)^{1/p}` by grid quadrature.
    pub fn lp_norm(&self, values: &[T], p: T) -> Result<T> {
        if !(p >= T::one()) {
            return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
        }
        let powered: Vec<T> = values.iter().map(|v| v.abs().powf(p)).collect();
        Ok((self.grid.integrate(&powered)? / self.omega).powf(T::one() / p))
    }

    /// `Σ_{k,j} c_{k,j} Y_{k,j}(x)²` at every grid node (the diagonal
    /// `x ↦ K(x, x)` of the kernel with coefficients `c`).
    pub fn diagonal(&self, c: &CoeffTable<T>) -> Result<Vec<T>> {
        self.check_table(c)?;
        let n_phi = self.grid.n_phi();
        let out: Vec<Vec<T>> = (0..self.grid.n_theta())
            .into_par_iter()
            .map(|ring| {
                (0..n_phi)
                    .map(|lon| {
                        let mut acc = CompensatedSum::new();
                        for k in 0..=c.k_max() {
                            for (j, &a) in c.block(k).iter().enumerate() {
                                let y = self.y_at(k, j, ring, lon);
                                acc.add(a * y * y);
                            }
                        }
                        acc.value()
                    })
                    .collect()
            })
            .collect();
        Ok(out.concat())
    }

    /// Coefficients of `x ↦ K(x, y)` for the kernel with coefficients `a`:
    /// `a_{k,j} Y_{k,j}(y)`, with `y` the grid node `(ring, lon)`.
    pub fn section(&self, a: &CoeffTable<T>, ring: usize, lon: usize) -> Result<CoeffTable<T>> {
        self.check_table(a)?;
        let blocks = (0..=a.k_max())
            .map(|k| {
                a.block(k)
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| v * self.y_at(k, j, ring, lon))
                    .collect()
            })
            .collect();
        CoeffTable::new(2, blocks)
    }
}
