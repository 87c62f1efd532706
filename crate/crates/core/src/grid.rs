//! Discretization of the half-plane: periodic in x (length `lx`, `nx` nodes),
//! uniform in y on `[0, ymax]` with `ny` nodes.
//!
//! A [`Field`] stores partial Fourier coefficients `f̂(ξ_j, y_i)` normalized so
//! that `f(x, y_i) = Σ_j f̂(ξ_j, y_i) e^{i ξ_j x}`. Rows are y nodes, columns are
//! x-frequencies in FFT order (`j = 0, 1, …, nx/2-1, -nx/2, …, -1`).

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent we feed to `exp` before treating the result as overflow.
pub(crate) const EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lx: f64,
    pub nx: usize,
    pub ymax: f64,
    pub ny: usize,
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(lx: f64, nx: usize, ymax: f64, ny: usize) -> Result<Self> {
        let grid = Self {
            lx,
            nx,
            ymax,
            ny,
            dealias_fraction: 2.0 / 3.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_dealias(mut self, fraction: f64) -> Result<Self> {
        self.dealias_fraction = fraction;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lx.is_finite() && self.lx > 0.0) {
            return Err(Error::InvalidGrid(format!("lx must be positive, got {}", self.lx)));
        }
        if self.nx < 8 || !self.nx.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "nx must be a power of two >= 8, got {}",
                self.nx
            )));
        }
        if self.ny < 16 {
            return Err(Error::InvalidGrid(format!("ny must be >= 16, got {}", self.ny)));
        }
        if !(self.ymax.is_finite() && self.ymax > 4.0) {
            return Err(Error::InvalidGrid(format!("ymax must exceed 4, got {}", self.ymax)));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dy(&self) -> f64 {
        self.ymax / (self.ny - 1) as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        i as f64 * self.dy()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|i| self.y(i)).collect()
    }

    pub fn x(&self, m: usize) -> f64 {
        m as f64 * self.lx / self.nx as f64
    }

    /// Signed wavenumber index of FFT slot `slot`.
    pub fn mode_index(&self, slot: usize) -> i64 {
        let n = self.nx as i64;
        let s = slot as i64;
        if s < n / 2 {
            s
        } else {
            s - n
        }
    }

    /// FFT slot holding signed wavenumber index `j`.
    pub fn slot_of(&self, j: i64) -> usize {
        let n = self.nx as i64;
        j.rem_euclid(n) as usize
    }

    pub fn xi(&self, slot: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode_index(slot) as f64 / self.lx
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.nx).map(|s| self.xi(s)).collect()
    }

    pub fn xi_min(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lx
    }

    pub fn xi_max_abs(&self) -> f64 {
        std::f64::consts::PI * self.nx as f64 / self.lx
    }

    /// Largest retained |j| after dealiasing.
    pub fn dealias_cutoff(&self) -> usize {
        ((self.dealias_fraction * (self.nx / 2) as f64) + 1e-12).floor() as usize
    }

    pub fn is_nyquist(&self, slot: usize) -> bool {
        slot == self.nx / 2
    }

    /// Slots ordered by ascending |ξ|, positive before negative at equal |ξ|.
    pub fn slots_by_abs_xi(&self) -> Vec<usize> {
        let mut slots: Vec<usize> = (0..self.nx).collect();
        slots.sort_by_key(|&s| {
            let j = self.mode_index(s);
            (j.unsigned_abs(), j < 0)
        });
        slots
    }

    /// Trapezoid weights on the y grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dy = self.dy();
        let mut w = vec![dy; self.ny];
        w[0] = 0.5 * dy;
        w[self.ny - 1] = 0.5 * dy;
        w
    }
}

/// Gaussian y-weight `Ψ(t, y) = y² / (8 ⟨t⟩)`.
pub fn psi(t: f64, y: f64) -> f64 {
    y * y / (8.0 * (1.0 + t))
}

/// `∂_t Ψ` and `∂_y Ψ`.
pub fn psi_derivatives(t: f64, y: f64) -> (f64, f64) {
    let tt = 1.0 + t;
    (-y * y / (8.0 * tt * tt), y / (4.0 * tt))
}

/// Boundary condition carried by a field; selects the y = 0 closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bc {
    /// Homogeneous Dirichlet at both ends (u-type).
    Dirichlet,
    /// Homogeneous Neumann at y = 0, Dirichlet at `ymax` (b-type).
    Neumann,
    Untagged,
}

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, PlanPair>> =
        RefCell::new(HashMap::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// Real samples `f(x_m, y_i)`, row-major in y.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.ny {
            let y = grid.y(i);
            for m in 0..grid.nx {
                values.push(f(grid.x(m), y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, m: usize) -> f64 {
        self.values[i * self.grid.nx + m]
    }

    /// Forward partial Fourier transform in x.
    pub fn forward(&self, bc: Bc) -> Field {
        let nx = self.grid.nx;
        let (fwd, _) = plans(nx);
        let scale = 1.0 / nx as f64;
        let mut coeffs: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        coeffs.par_chunks_mut(nx).for_each(|row| {
            fwd.process(row);
            for c in row.iter_mut() {
                *c *= scale;
            }
        });
        Field {
            grid: self.grid,
            bc,
            coeffs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Transform between physical samples and coefficients, packed in a
/// [`Field`] either way: for [`Direction::Inverse`] the returned field holds the
/// physical samples as purely real "coefficients".
pub fn x_transform(field: &Field, direction: Direction) -> Field {
    match direction {
        Direction::Forward => {
            let values: Vec<f64> = field.coeffs.iter().map(|c| c.re).collect();
            PhysicalField {
                grid: field.grid,
                values,
            }
            .forward(field.bc)
        }
        Direction::Inverse => {
            let phys = field.to_physical();
            Field {
                grid: field.grid,
                bc: field.bc,
                coeffs: phys.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    bc: Bc,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: GridSpec, bc: Bc) -> Self {
        Self {
            grid,
            bc,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, bc: Bc, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(Self { grid, bc, coeffs })
    }

    /// Samples `f(x, y)` on the grid and transforms.
    pub fn from_fn(grid: GridSpec, bc: Bc, f: impl Fn(f64, f64) -> f64) -> Self {
        PhysicalField::from_fn(grid, f).forward(bc)
    }

    /// Separable field `a(x) p(y)` from x-coefficients (FFT order) and a y-profile.
    pub fn separable(grid: GridSpec, bc: Bc, x_coeffs: &[Complex64], profile: impl Fn(f64) -> f64) -> Self {
        let mut field = Self::zeros(grid, bc);
        for i in 0..grid.ny {
            let p = profile(grid.y(i));
            for (s, c) in x_coeffs.iter().enumerate() {
                field.coeffs[i * grid.nx + s] = c * p;
            }
        }
        field
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn with_bc(mut self, bc: Bc) -> Self {
        self.bc = bc;
        self
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn at(&self, i: usize, slot: usize) -> Complex64 {
        self.coeffs[i * self.grid.nx + slot]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let nx = self.grid.nx;
        &self.coeffs[i * nx..(i + 1) * nx]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Inverse partial Fourier transform; imaginary residue is discarded.
    pub fn to_physical(&self) -> PhysicalField {
        let nx = self.grid.nx;
        let (_, inv) = plans(nx);
        let mut buf = self.coeffs.clone();
        buf.par_chunks_mut(nx).for_each(|row| inv.process(row));
        PhysicalField {
            grid: self.grid,
            values: buf.iter().map(|c| c.re).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map_coeffs(|_, _, z| z * c)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip(other, |a, b| a + b * c)
    }

    fn zip(&self, other: &Field, op: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            bc: self.bc,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    /// Applies `op(row, slot, value)` to every coefficient.
    pub fn map_coeffs(&self, op: impl Fn(usize, usize, Complex64) -> Complex64) -> Field {
        let nx = self.grid.nx;
        Field {
            grid: self.grid,
            bc: self.bc,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &z)| op(k / nx, k % nx, z))
                .collect(),
        }
    }

    /// Multiplies row `i` by `profile(y_i)`.
    pub fn mul_profile(&self, profile: impl Fn(f64) -> f64) -> Field {
        let factors: Vec<f64> = self.grid.ys().into_iter().map(profile).collect();
        self.map_coeffs(|i, _, z| z * factors[i])
    }

    /// Per-mode multiplier `m(slot)`.
    pub fn mul_modes(&self, m: &[f64]) -> Field {
        debug_assert_eq!(m.len(), self.grid.nx);
        self.map_coeffs(|_, s, z| z * m[s])
    }

    /// Zeroes modes above the dealiasing cutoff and the Nyquist mode.
    pub fn dealias(&mut self) {
        let cutoff = self.grid.dealias_cutoff() as u64;
        let nx = self.grid.nx;
        let mask: Vec<bool> = (0..nx)
            .map(|s| self.grid.mode_index(s).unsigned_abs() <= cutoff && !self.grid.is_nyquist(s))
            .collect();
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            if !mask[k % nx] {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn dealiased(mut self) -> Field {
        self.dealias();
        self
    }

    /// Largest |Im f̂(ξ) + … | deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let nx = self.grid.nx;
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.ny {
            for s in 0..nx {
                let partner = (nx - s) % nx;
                let d = self.at(i, s) - self.at(i, partner).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// A function of x alone (far-field traces, x-shapes of data), stored as
/// Fourier coefficients in FFT order on the grid's x nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct XProfile {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl XProfile {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.nx],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.nx {
            return Err(Error::SizeMismatch {
                expected: grid.nx,
                actual: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let (fwd, _) = plans(grid.nx);
        let mut coeffs: Vec<Complex64> = (0..grid.nx).map(|m| Complex64::new(f(grid.x(m)), 0.0)).collect();
        fwd.process(&mut coeffs);
        let scale = 1.0 / grid.nx as f64;
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Self { grid, coeffs }
    }

    pub fn from_values(grid: GridSpec, values: &[f64]) -> Result<Self> {
        if values.len() != grid.nx {
            return Err(Error::SizeMismatch {
                expected: grid.nx,
                actual: values.len(),
            });
        }
        Ok(Self::from_fn(grid, |x| {
            let m = (x * grid.nx as f64 / grid.lx).round() as usize;
            values[m % grid.nx]
        }))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn values(&self) -> Vec<f64> {
        let (_, inv) = plans(self.grid.nx);
        let mut buf = self.coeffs.clone();
        inv.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    pub fn scale(&self, c: f64) -> XProfile {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn ddx(&self) -> XProfile {
        let grid = self.grid;
        Self {
            grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(s, z)| {
                    if grid.is_nyquist(s) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        z * Complex64::new(0.0, grid.xi(s))
                    }
                })
                .collect(),
        }
    }

    /// Mode energies `L_x |F̂_j|²`, so that their sum is `‖F‖²_{L²}` over a period.
    pub fn mode_energies(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| self.grid.lx * c.norm_sqr()).collect()
    }
}

/// `∂_x`: multiplication by `i ξ_j`; the Nyquist mode is dropped.
pub fn ddx(field: &Field) -> Field {
    let grid = *field.grid();
    let xis = grid.xis();
    field.map_coeffs(|_, s, z| {
        if grid.is_nyquist(s) {
            Complex64::new(0.0, 0.0)
        } else {
            z * Complex64::new(0.0, xis[s])
        }
    })
}

/// Second-order centered `∂²_y` with the closure selected by the field's tag.
///
/// Dirichlet rows (y = 0 for u-type, y = ymax for both) return 0; the Neumann
/// row at y = 0 uses the mirror ghost `f_{-1} = f_1`.
pub fn d2dy(field: &Field) -> Result<Field> {
    let bc = field.bc();
    if bc == Bc::Untagged {
        return Err(Error::UnknownBoundaryTag);
    }
    let grid = *field.grid();
    let (nx, ny) = (grid.nx, grid.ny);
    let inv = 1.0 / (grid.dy() * grid.dy());
    let src = field.coeffs();
    let mut out = Field::zeros(grid, bc);
    let dst = out.coeffs_mut();
    for i in 1..ny - 1 {
        for s in 0..nx {
            dst[i * nx + s] = (src[(i + 1) * nx + s] - src[i * nx + s] * 2.0 + src[(i - 1) * nx + s]) * inv;
        }
    }
    if bc == Bc::Neumann {
        for s in 0..nx {
            dst[s] = (src[nx + s] - src[s]) * (2.0 * inv);
        }
    }
    Ok(out)
}

/// Second-order `∂_y`: centered inside, one-sided at the ends. A Neumann tag
/// pins the y = 0 row to zero.
pub fn ddy(field: &Field) -> Field {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx, grid.ny);
    let h = grid.dy();
    let src = field.coeffs();
    let mut out = Field::zeros(grid, field.bc());
    let dst = out.coeffs_mut();
    for i in 1..ny - 1 {
        for s in 0..nx {
            dst[i * nx + s] = (src[(i + 1) * nx + s] - src[(i - 1) * nx + s]) / (2.0 * h);
        }
    }
    for s in 0..nx {
        dst[s] = if field.bc() == Bc::Neumann {
            Complex64::new(0.0, 0.0)
        } else {
            (src[s] * -3.0 + src[nx + s] * 4.0 - src[2 * nx + s]) / (2.0 * h)
        };
        let l = ny - 1;
        dst[l * nx + s] = (src[l * nx + s] * 3.0 - src[(l - 1) * nx + s] * 4.0 + src[(l - 2) * nx + s]) / (2.0 * h);
    }
    out
}

/// `∫_0^{y} f dy'` per x-mode: cumulative trapezoid with the Euler–Maclaurin
/// end correction `−Δy²/12 (f'(y) − f'(0))`, fourth order for smooth `f`.
pub fn integrate_y_from0(field: &Field) -> Field {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx, grid.ny);
    let h = grid.dy();
    let half = 0.5 * h;
    let corr = h * h / 12.0;
    let src = field.coeffs();
    let at = |i: usize, s: usize| src[i * nx + s];
    let slope = |i: usize, s: usize| -> Complex64 {
        if i == 0 {
            (at(0, s) * -11.0 + at(1, s) * 18.0 - at(2, s) * 9.0 + at(3, s) * 2.0) / (6.0 * h)
        } else if i == ny - 1 {
            (at(i, s) * 3.0 - at(i - 1, s) * 4.0 + at(i - 2, s)) / (2.0 * h)
        } else {
            (at(i + 1, s) - at(i - 1, s)) / (2.0 * h)
        }
    };
    let d0: Vec<Complex64> = (0..nx).map(|s| slope(0, s)).collect();
    let mut out = Field::zeros(grid, Bc::Untagged);
    let mut trap = vec![Complex64::new(0.0, 0.0); nx];
    let dst = out.coeffs_mut();
    for i in 1..ny {
        for s in 0..nx {
            trap[s] += (at(i - 1, s) + at(i, s)) * half;
            dst[i * nx + s] = trap[s] - (slope(i, s) - d0[s]) * corr;
        }
    }
    out
}

/// `∫_y^{ymax} f dy'` per x-mode, defined as the total minus
/// [`integrate_y_from0`] so the two always add up to the column total.
pub fn integrate_y_tail(field: &Field) -> Field {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx, grid.ny);
    let from0 = integrate_y_from0(field);
    let last = (ny - 1) * nx;
    let totals: Vec<Complex64> = from0.coeffs()[last..].to_vec();
    from0.map_coeffs(|i, s, z| if i == ny - 1 { Complex64::new(0.0, 0.0) } else { totals[s] - z })
}

/// Per-mode column totals `∫_0^{ymax} f̂_j dy`.
pub fn column_totals(field: &Field) -> Vec<Complex64> {
    let grid = *field.grid();
    let from0 = integrate_y_from0(field);
    from0.row(grid.ny - 1).to_vec()
}

/// Per-row log-weights `2 a Ψ(t, y_i)`.
fn log_weights_sq(grid: &GridSpec, a: f64, t: f64) -> Vec<f64> {
    grid.ys().into_iter().map(|y| 2.0 * a * psi(t, y)).collect()
}

/// Multiplies a nonnegative `value` by `exp(log_w)` without spurious overflow.
#[inline]
pub(crate) fn weighted(value: f64, log_w: f64, y: f64) -> Result<f64> {
    if value == 0.0 {
        return Ok(0.0);
    }
    let out = if log_w < EXP_LIMIT {
        value * log_w.exp()
    } else {
        (value.ln() + log_w).exp()
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::TailViolation { y })
    }
}

/// Per-slot weighted energies `L_x ∫ e^{2aΨ} |f̂_j|² dy` (trapezoid in y).
pub fn weighted_mode_energies(field: &Field, a: f64, t: f64) -> Result<Vec<f64>> {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx, grid.ny);
    let w = grid.trapezoid_weights();
    let lw = log_weights_sq(&grid, a, t);
    let mut energies = vec![0.0; nx];
    for i in 0..ny {
        let row = &field.coeffs[i * nx..(i + 1) * nx];
        if lw[i] < EXP_LIMIT {
            let rw = w[i] * lw[i].exp();
            for (e, c) in energies.iter_mut().zip(row) {
                *e += rw * c.norm_sqr();
            }
        } else {
            for (e, c) in energies.iter_mut().zip(row) {
                *e += w[i] * weighted(c.norm_sqr(), lw[i], grid.y(i))?;
            }
        }
    }
    for e in &mut energies {
        *e *= grid.lx;
        if !e.is_finite() {
            return Err(Error::TailViolation { y: grid.ymax });
        }
    }
    Ok(energies)
}

/// `‖e^{aΨ(t,·)} f‖_{L²}` over one period in x and `[0, ymax]` in y.
pub fn weighted_l2(field: &Field, a: f64, t: f64) -> Result<f64> {
    let energies = weighted_mode_energies(field, a, t)?;
    let grid = field.grid();
    let total: f64 = grid.slots_by_abs_xi().into_iter().map(|s| energies[s]).sum();
    Ok(total.sqrt())
}

/// Ratio of the largest Ψ-weighted row magnitude above `fraction·ymax` to the
/// global maximum, in natural-log units (`-inf` for a zero field).
pub fn tail_log_ratio(field: &Field, a: f64, t: f64, fraction: f64) -> f64 {
    let grid = *field.grid();
    let nx = grid.nx;
    let mut global = f64::NEG_INFINITY;
    let mut tail = f64::NEG_INFINITY;
    for i in 0..grid.ny {
        let row = &field.coeffs[i * nx..(i + 1) * nx];
        let mag: f64 = row.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if mag == 0.0 {
            continue;
        }
        let y = grid.y(i);
        let lv = mag.ln() + a * psi(t, y);
        global = global.max(lv);
        if y > fraction * grid.ymax {
            tail = tail.max(lv);
        }
    }
    if global == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        tail - global
    }
}

/// Errors when the weighted tail above `0.8·ymax` exceeds `1e-8` of the peak.
pub fn tail_guard(field: &Field, a: f64, t: f64) -> Result<()> {
    let ratio = tail_log_ratio(field, a, t, 0.8);
    if ratio > (1e-8f64).ln() {
        Err(Error::TailViolation {
            y: 0.8 * field.grid().ymax,
        })
    } else {
        Ok(())
    }
}
