//! Crank–Nicolson diffusion in y: one real tridiagonal factorization shared by
//! every x-mode.

use num_complex::Complex64;

use crate::grid::{Bc, Field, GridSpec};

/// Factorized `(I − θ dt ν D₂)` for one boundary type, with `θ = 1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct CnFactor {
    pub dt: f64,
    pub nu: f64,
    pub bc: Bc,
    first: usize,
    last: usize,
    sub: Vec<f64>,
    cprime: Vec<f64>,
    denom: Vec<f64>,
    r: f64,
}

impl CnFactor {
    pub fn new(grid: &GridSpec, bc: Bc, nu: f64, dt: f64) -> Self {
        let r = 0.5 * dt * nu / (grid.dy() * grid.dy());
        let first = if bc == Bc::Neumann { 0 } else { 1 };
        let last = grid.ny - 2;
        let n = last + 1 - first;
        let mut sub = vec![-r; n];
        let diag = vec![1.0 + 2.0 * r; n];
        let mut sup = vec![-r; n];
        sub[0] = 0.0;
        sup[n - 1] = 0.0;
        if first == 0 {
            // mirror ghost f_{-1} = f_1
            sup[0] = -2.0 * r;
        }
        let mut cprime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        for k in 0..n {
            let prev = if k == 0 { 0.0 } else { cprime[k - 1] };
            denom[k] = diag[k] - sub[k] * prev;
            cprime[k] = sup[k] / denom[k];
        }
        Self {
            dt,
            nu,
            bc,
            first,
            last,
            sub,
            cprime,
            denom,
            r,
        }
    }

    /// Advances `f` by one step: solves `(I − ½dtνD₂) f⁺ = (I + ½dtνD₂) f + dt·n`.
    pub fn step(&self, f: &Field, forcing: &Field) -> Field {
        let grid = *f.grid();
        let nx = grid.nx;
        let src = f.coeffs();
        let frc = forcing.coeffs();
        let mut out = Field::zeros(grid, f.bc());
        let n = self.last + 1 - self.first;
        let mut d = vec![Complex64::new(0.0, 0.0); n * nx];
        for k in 0..n {
            let i = self.first + k;
            let below = if i == 0 { src[nx..2 * nx].as_ref() } else { &src[(i - 1) * nx..i * nx] };
            let here = &src[i * nx..(i + 1) * nx];
            let above = &src[(i + 1) * nx..(i + 2) * nx];
            let fr = &frc[i * nx..(i + 1) * nx];
            for s in 0..nx {
                let lap = below[s] - here[s] * 2.0 + above[s];
                d[k * nx + s] = here[s] + lap * self.r + fr[s] * self.dt;
            }
        }
        for k in 0..n {
            let denom = self.denom[k];
            if k == 0 {
                for s in 0..nx {
                    d[s] /= denom;
                }
            } else {
                let a = self.sub[k];
                let (prev, cur) = d.split_at_mut(k * nx);
                let prev = &prev[(k - 1) * nx..];
                for s in 0..nx {
                    cur[s] = (cur[s] - prev[s] * a) / denom;
                }
            }
        }
        for k in (0..n.saturating_sub(1)).rev() {
            let c = self.cprime[k];
            let (cur, next) = d.split_at_mut((k + 1) * nx);
            let cur = &mut cur[k * nx..];
            for s in 0..nx {
                cur[s] -= next[s] * c;
            }
        }
        let dst = out.coeffs_mut();
        dst[self.first * nx..(self.last + 1) * nx].copy_from_slice(&d);
        out
    }
}
