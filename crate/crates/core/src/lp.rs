//! Littlewood–Paley analysis in x: dyadic shells, projections, Besov norms,
//! Gevrey multipliers, Bony paraproducts and Chemin–Lerner accumulators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{weighted_mode_energies, Field, GridSpec, XProfile, EXP_LIMIT};

/// `G(τ) = e^{-1/τ}` for `τ > 0`, else 0.
pub fn glue(tau: f64) -> f64 {
    if tau > 0.0 {
        (-1.0 / tau).exp()
    } else {
        0.0
    }
}

/// Smooth step from 0 (τ ≤ 0) to 1 (τ ≥ 1).
pub fn transition(tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau >= 1.0 {
        1.0
    } else {
        let a = glue(tau);
        a / (a + glue(1.0 - tau))
    }
}

/// Low-pass profile: 1 on `[0, 3/4]`, 0 on `[4/3, ∞)`.
pub fn chi_lp(tau: f64) -> f64 {
    if tau <= 0.75 {
        1.0
    } else if tau >= 4.0 / 3.0 {
        0.0
    } else {
        1.0 - transition((tau - 0.75) / (4.0 / 3.0 - 0.75))
    }
}

/// Shell profile `φ(τ) = χ(τ/2) − χ(τ)`, supported in `[3/4, 8/3]`.
pub fn phi_lp(tau: f64) -> f64 {
    chi_lp(0.5 * tau) - chi_lp(tau)
}

fn scale(k: i32) -> f64 {
    2f64.powi(-k)
}

/// Dyadic shells with nonempty support on the grid frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicPartition {
    grid: GridSpec,
    shells: Vec<i32>,
    phi: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn build(grid: &GridSpec) -> Self {
        let lo = (3.0 * grid.xi_min() / 8.0).log2().floor() as i32 - 1;
        let hi = (8.0 * grid.xi_max_abs() / 3.0).log2().ceil() as i32 + 1;
        let xis = grid.xis();
        let mut shells = Vec::new();
        let mut phi = Vec::new();
        for k in lo..=hi {
            let row: Vec<f64> = xis
                .iter()
                .map(|&x| if x == 0.0 { 0.0 } else { phi_lp(scale(k) * x.abs()) })
                .collect();
            if row.iter().any(|&v| v != 0.0) {
                shells.push(k);
                phi.push(row);
            }
        }
        Self {
            grid: *grid,
            shells,
            phi,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn shells(&self) -> &[i32] {
        &self.shells
    }

    pub fn k_range(&self) -> (i32, i32) {
        (self.shells[0], *self.shells.last().unwrap())
    }

    /// Table row `φ(2^{-k}|ξ_j|)` for stored shell `k`, or `None` when empty.
    pub fn phi_row(&self, k: i32) -> Option<&[f64]> {
        self.index_of(k).map(|i| self.phi[i].as_slice())
    }

    fn index_of(&self, k: i32) -> Option<usize> {
        self.shells.iter().position(|&s| s == k)
    }

    /// `φ(2^{-k}|ξ_j|)` for any integer `k` (zero rows outside the stored range).
    pub fn phi_values(&self, k: i32) -> Vec<f64> {
        match self.phi_row(k) {
            Some(row) => row.to_vec(),
            None => vec![0.0; self.grid.nx],
        }
    }

    /// `χ(2^{-k}|ξ_j|)`.
    pub fn chi_values(&self, k: i32) -> Vec<f64> {
        self.grid.xis().iter().map(|&x| chi_lp(scale(k) * x.abs())).collect()
    }

    /// `max_j |Σ_k φ(2^{-k}|ξ_j|) − 1|` over nonzero frequencies.
    pub fn unity_defect(&self) -> f64 {
        (0..self.grid.nx)
            .filter(|&s| self.grid.mode_index(s) != 0)
            .map(|s| (self.phi.iter().map(|row| row[s]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Per-shell `‖Δ_k a‖` given per-slot energies (squared norms of each mode).
    pub fn shell_norms(&self, energies: &[f64]) -> Vec<f64> {
        self.phi
            .iter()
            .map(|row| {
                row.iter()
                    .zip(energies)
                    .map(|(p, e)| p * p * e)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// `Σ_k 2^{ks} n_k` over stored shells.
    pub fn besov_sum(&self, shell_norms: &[f64], s: f64) -> f64 {
        self.shells
            .iter()
            .zip(shell_norms)
            .map(|(&k, n)| 2f64.powf(k as f64 * s) * n)
            .sum()
    }
}

pub fn lp_project(partition: &DyadicPartition, field: &Field, k: i32) -> Field {
    field.mul_modes(&partition.phi_values(k))
}

pub fn lowpass(partition: &DyadicPartition, field: &Field, k: i32) -> Field {
    field.mul_modes(&partition.chi_values(k))
}

/// Gevrey factors `e^{r|ξ_j|}` per slot.
pub fn gevrey_factors(grid: &GridSpec, r: f64) -> Result<Vec<f64>> {
    if !r.is_finite() || r < 0.0 || r * grid.xi_max_abs() > EXP_LIMIT {
        return Err(Error::RadiusOverflow {
            radius: r,
            xi_max: grid.xi_max_abs(),
        });
    }
    Ok(grid.xis().iter().map(|x| (r * x.abs()).exp()).collect())
}

/// `e^{r|D_x|} f`.
pub fn gevrey_multiplier(field: &Field, r: f64) -> Result<Field> {
    Ok(field.mul_modes(&gevrey_factors(field.grid(), r)?))
}

/// One component of a vector-valued Besov norm: a field and its weight multiple `a`
/// (the weight is `e^{aΨ(t,y)}`).
#[derive(Clone, Copy, Debug)]
pub struct Weighted<'a> {
    pub field: &'a Field,
    pub a: f64,
}

impl<'a> Weighted<'a> {
    pub fn new(field: &'a Field, a: f64) -> Self {
        Self { field, a }
    }
}

/// Per-slot energies of `(e^{a_i Ψ} f_i)_Φ`, summed over components, with `Φ = r|ξ|`.
pub fn combined_energies(parts: &[Weighted<'_>], t: f64, r: f64) -> Result<Vec<f64>> {
    let grid = *parts
        .first()
        .ok_or_else(|| Error::InvalidParams("empty field list".into()))?
        .field
        .grid();
    let factors = gevrey_factors(&grid, r)?;
    let mut total = vec![0.0; grid.nx];
    for part in parts {
        let e = weighted_mode_energies(part.field, part.a, t)?;
        for (acc, (v, g)) in total.iter_mut().zip(e.iter().zip(&factors)) {
            *acc += v * g * g;
        }
    }
    Ok(total)
}

/// `Σ_k 2^{ks} ‖e^{aΨ(t)} Δ_k f‖_{L²}`.
pub fn besov_norm(partition: &DyadicPartition, field: &Field, s: f64, a: f64, t: f64) -> Result<f64> {
    let e = weighted_mode_energies(field, a, t)?;
    Ok(partition.besov_sum(&partition.shell_norms(&e), s))
}

/// Besov norm of the pair/vector `(e^{a_i Ψ} f_i)_Φ`: per shell the components are
/// combined in ℓ², then summed with weight `2^{ks}`.
pub fn besov_norm_vec(
    partition: &DyadicPartition,
    parts: &[Weighted<'_>],
    s: f64,
    t: f64,
    r: f64,
) -> Result<f64> {
    let e = combined_energies(parts, t, r)?;
    Ok(partition.besov_sum(&partition.shell_norms(&e), s))
}

/// 1-D norm `Σ_k 2^{ks} ‖Δ_k F‖_{L²(ℝ_x)}` of an x-profile.
pub fn besov_h_norm(partition: &DyadicPartition, profile: &XProfile, s: f64) -> f64 {
    partition.besov_sum(&partition.shell_norms(&profile.mode_energies()), s)
}

/// Same as [`besov_h_norm`] for `e^{r|D_x|} F`.
pub fn besov_h_norm_gevrey(partition: &DyadicPartition, profile: &XProfile, s: f64, r: f64) -> Result<f64> {
    let g = gevrey_factors(profile.grid(), r)?;
    let e: Vec<f64> = profile
        .mode_energies()
        .iter()
        .zip(&g)
        .map(|(e, g)| e * g * g)
        .collect();
    Ok(partition.besov_sum(&partition.shell_norms(&e), s))
}

/// Bony decomposition `(T_f g, T_g f, R(f, g))`. Products are formed in physical
/// space and dealiased; the DC·DC interaction is placed in the remainder.
pub fn paraproduct(partition: &DyadicPartition, f: &Field, g: &Field) -> (Field, Field, Field) {
    let shells = partition.shells();
    let dc = |h: &Field| {
        let nx = h.grid().nx;
        let mut m = vec![0.0; nx];
        m[0] = 1.0;
        h.mul_modes(&m)
    };
    let fk: Vec<Field> = shells.iter().map(|&k| lp_project(partition, f, k)).collect();
    let gk: Vec<Field> = shells.iter().map(|&k| lp_project(partition, g, k)).collect();
    let f0 = dc(f);
    let g0 = dc(g);

    let low_high = |low0: &Field, lows: &[Field], highs: &[Field]| {
        let mut acc = Field::zeros(*f.grid(), f.bc());
        for (i, high) in highs.iter().enumerate() {
            let mut s = low0.clone();
            for low in lows.iter().take(i.saturating_sub(1)) {
                s = s.add(low);
            }
            acc = acc.add(&product(&s, high));
        }
        acc
    };
    let tfg = low_high(&f0, &fk, &gk);
    let tgf = low_high(&g0, &gk, &fk);

    let mut rem = product(&f0, &g0);
    for i in 0..shells.len() {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(shells.len() - 1);
        let mut near = Field::zeros(*f.grid(), f.bc());
        for gj in &gk[lo..=hi] {
            near = near.add(gj);
        }
        rem = rem.add(&product(&fk[i], &near));
    }
    (tfg, tgf, rem)
}

/// Dealiased pointwise product.
pub fn product(f: &Field, g: &Field) -> Field {
    let pf = f.to_physical();
    let pg = g.to_physical();
    let mut out = pf.clone();
    for (o, b) in out.values_mut().iter_mut().zip(pg.values()) {
        *o *= b;
    }
    out.forward(f.bc()).dealiased()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeExponent {
    One,
    Two,
    Inf,
}

/// Per-shell time integrals `∫ w(t) ‖Δ_k a(t)‖^p dt` (left-endpoint rule); for
/// `p = ∞` the running maximum of `w(t)‖Δ_k a(t)‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClAccumulator {
    pub s: f64,
    pub p: TimeExponent,
    pub shells: Vec<i32>,
    pub sums: Vec<f64>,
}

impl ClAccumulator {
    pub fn new(partition: &DyadicPartition, s: f64, p: TimeExponent) -> Self {
        Self {
            s,
            p,
            shells: partition.shells().to_vec(),
            sums: vec![0.0; partition.shells().len()],
        }
    }

    /// Adds the contribution of one step given `‖Δ_k a(t_n)‖` per shell.
    pub fn accumulate(&mut self, shell_norms: &[f64], dt: f64, w: f64) {
        for (acc, &n) in self.sums.iter_mut().zip(shell_norms) {
            match self.p {
                TimeExponent::One => *acc += w * n * dt,
                TimeExponent::Two => *acc += w * n * n * dt,
                TimeExponent::Inf => *acc = acc.max(w * n),
            }
        }
    }

    pub fn norm(&self) -> f64 {
        self.shells
            .iter()
            .zip(&self.sums)
            .map(|(&k, &v)| {
                let root = match self.p {
                    TimeExponent::One | TimeExponent::Inf => v,
                    TimeExponent::Two => v.sqrt(),
                };
                2f64.powf(k as f64 * self.s) * root
            })
            .sum()
    }
}

/// Coefficients of a convolution `(f̂ * ĝ)` computed directly over all index
/// pairs, truncated to the grid; the oracle for spectral products.
pub fn direct_convolution(grid: &GridSpec, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let n = grid.nx as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.nx];
    for a in 0..grid.nx {
        let ja = grid.mode_index(a);
        for b in 0..grid.nx {
            let jb = grid.mode_index(b);
            let j = ja + jb;
            if j >= -n / 2 && j < n / 2 {
                out[grid.slot_of(j)] += f[a] * g[b];
            }
        }
    }
    out
}
