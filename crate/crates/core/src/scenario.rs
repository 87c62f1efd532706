//! Physical setup: parameters, the wall cutoff χ(y), far fields obeying
//! Bernoulli's law, source terms and compatible initial data.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ddy, integrate_y_tail, Bc, Field, GridSpec, PhysicalField, XProfile};
use crate::lp::{besov_h_norm_gevrey, besov_norm_vec, glue, transition, DyadicPartition, Weighted};
use crate::quad::{adaptive_simpson, integrate_to_infinity};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub kappa: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda: f64,
    /// Diffusivity of the u equation (1 for the boundary-layer system).
    pub nu_u: f64,
    /// Diffusivity of the b equation (κ for the boundary-layer system).
    pub nu_b: f64,
}

impl Params {
    pub fn new(kappa: f64, epsilon: f64, delta: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            kappa,
            epsilon,
            delta,
            lambda,
            nu_u: 1.0,
            nu_b: kappa,
        };
        p.validate()?;
        Ok(p)
    }

    /// Overrides both diffusivities (used for the rescaled conjugate system).
    pub fn with_diffusivities(mut self, nu_u: f64, nu_b: f64) -> Result<Self> {
        self.nu_u = nu_u;
        self.nu_b = nu_b;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("kappa", self.kappa)?;
        positive("epsilon", self.epsilon)?;
        positive("delta", self.delta)?;
        positive("lambda", self.lambda)?;
        positive("nu_u", self.nu_u)?;
        positive("nu_b", self.nu_b)
    }

    /// Background tangential magnetic field: 1 when κ = 1, else 0.
    pub fn bbar(&self) -> f64 {
        if self.kappa == 1.0 {
            1.0
        } else {
            0.0
        }
    }
}

/// Decay-rate gains `l_κ` (κ ∈ (0,2)) and `ℓ_κ` (κ > 1/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub l_kappa: Option<f64>,
    pub ell_kappa: Option<f64>,
}

pub fn derived_exponents(kappa: f64) -> Result<Exponents> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Config {
            key: "params.kappa".into(),
            reason: format!("kappa must be positive, got {kappa}"),
        });
    }
    let l_kappa = (kappa < 2.0).then(|| kappa * (2.0 - kappa) / 4.0);
    let ell_kappa = (kappa > 0.5).then(|| (2.0 * kappa - 1.0) / (4.0 * kappa * kappa));
    Ok(Exponents { l_kappa, ell_kappa })
}

/// Bump `β(τ) = G(τ) G(1−τ)` on `(0,1)` and its first two derivatives.
fn bump(tau: f64) -> [f64; 3] {
    if tau <= 0.0 || tau >= 1.0 {
        return [0.0; 3];
    }
    let (a, b) = (glue_derivs(tau), glue_derivs(1.0 - tau));
    let (b1, b2) = (-b[1], b[2]);
    [a[0] * b[0], a[1] * b[0] + a[0] * b1, a[2] * b[0] + 2.0 * a[1] * b1 + a[0] * b2]
}

/// `G`, `G'`, `G''` for `G(τ) = e^{-1/τ}`.
fn glue_derivs(tau: f64) -> [f64; 3] {
    if tau <= 0.0 {
        return [0.0; 3];
    }
    let g = glue(tau);
    let i = 1.0 / tau;
    [g, g * i * i, g * (i.powi(4) - 2.0 * i.powi(3))]
}

/// Smooth step `T` and its first two derivatives.
fn step_derivs(tau: f64) -> [f64; 3] {
    if tau <= 0.0 {
        return [0.0; 3];
    }
    if tau >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let a = glue_derivs(tau);
    let bb = glue_derivs(1.0 - tau);
    let (b0, b1, b2) = (bb[0], -bb[1], bb[2]);
    let s = a[0] + b0;
    let s1 = a[1] + b1;
    let n = a[1] * b0 - a[0] * b1;
    let n1 = a[2] * b0 - a[0] * b2;
    [transition(tau), n / (s * s), (n1 * s - 2.0 * n * s1) / (s * s * s)]
}

/// Wall cutoff: χ = 0 on `[0,1]`, χ = y on `[2,∞)`, with χ′ = T(y−1) + c β(y−1).
#[derive(Clone, Debug, PartialEq)]
pub struct Cutoff {
    pub c: f64,
    pub chi: Vec<f64>,
    pub chi1: Vec<f64>,
    pub chi2: Vec<f64>,
    pub chi3: Vec<f64>,
}

impl Cutoff {
    /// Bump coefficient making `∫_1^2 χ′ = 2`.
    pub fn bump_coefficient() -> f64 {
        1.5 / adaptive_simpson(|t| bump(t)[0], 0.0, 1.0, 1e-15)
    }

    /// `(χ, χ′, χ″, χ‴)` at `y`.
    pub fn eval(c: f64, y: f64) -> [f64; 4] {
        let mut v = Self::eval_derivatives(c, y);
        if y > 1.0 && y < 2.0 {
            let rho = |s: f64| step_derivs(s - 1.0)[0] + c * bump(s - 1.0)[0];
            v[0] = adaptive_simpson(rho, 1.0, y, 1e-14);
        }
        v
    }

    /// As [`Cutoff::eval`] with χ itself left at 0 inside `(1, 2)`.
    fn eval_derivatives(c: f64, y: f64) -> [f64; 4] {
        if y <= 1.0 {
            return [0.0; 4];
        }
        if y >= 2.0 {
            return [y, 1.0, 0.0, 0.0];
        }
        let t = step_derivs(y - 1.0);
        let b = bump(y - 1.0);
        [
            0.0,
            t[0] + c * b[0],
            t[1] + c * b[1],
            t[2] + c * b[2],
        ]
    }

    pub fn build(grid: &GridSpec) -> Result<Self> {
        let nodes = grid.ys().into_iter().filter(|&y| (1.0..=2.0).contains(&y)).count();
        if nodes < 16 {
            return Err(Error::InsufficientResolution(format!(
                "cutoff needs at least 16 nodes in [1, 2], grid has {nodes}"
            )));
        }
        let c = Self::bump_coefficient();
        let mut out = Self {
            c,
            chi: Vec::with_capacity(grid.ny),
            chi1: Vec::with_capacity(grid.ny),
            chi2: Vec::with_capacity(grid.ny),
            chi3: Vec::with_capacity(grid.ny),
        };
        let rho = |s: f64| step_derivs(s - 1.0)[0] + c * bump(s - 1.0)[0];
        let mut acc = 0.0;
        let mut prev = 1.0;
        for y in grid.ys() {
            let [mut a, b, d, e] = Self::eval_derivatives(c, y);
            if y > 1.0 && y < 2.0 {
                acc += adaptive_simpson(rho, prev, y, 1e-15);
                prev = y;
                a = acc;
            }
            out.chi.push(a);
            out.chi1.push(b);
            out.chi2.push(d);
            out.chi3.push(e);
        }
        Ok(out)
    }
}

/// Far-field tangential traces `(U, B)` with their x- and t-derivatives,
/// sampled on the x nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Traces {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub ut: Vec<f64>,
    pub bt: Vec<f64>,
    pub ux: Vec<f64>,
    pub bx: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FarField {
    Trivial,
    /// `U = ε ⟨t⟩^{-α} g(x)`, `B = 0`.
    Decaying { epsilon: f64, alpha: f64, g: XProfile },
}

impl FarField {
    pub fn trivial() -> Self {
        FarField::Trivial
    }

    pub fn decaying(params: &Params, alpha: f64, g: XProfile) -> Result<Self> {
        if params.bbar() != 0.0 {
            return Err(Error::UnsupportedScenario(
                "a decaying far field with kappa = 1 has no known Bernoulli solution".into(),
            ));
        }
        if !(alpha > 2.25) {
            return Err(Error::InvalidParams(format!("alpha must exceed 9/4, got {alpha}")));
        }
        if g.coeffs()[0].norm() > 1e-14 * (1.0 + g.coeffs().iter().map(|c| c.norm()).sum::<f64>()) {
            return Err(Error::InitialData("far-field shape must have zero mean".into()));
        }
        Ok(FarField::Decaying {
            epsilon: params.epsilon,
            alpha,
            g,
        })
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, FarField::Trivial)
    }

    /// Time factor `ε⟨t⟩^{-α}` of the decaying family, 0 for the trivial one.
    fn amplitude(&self, t: f64) -> (f64, f64) {
        match self {
            FarField::Trivial => (0.0, 0.0),
            FarField::Decaying { epsilon, alpha, .. } => {
                let a = epsilon * (1.0 + t).powf(-alpha);
                (a, -alpha * a / (1.0 + t))
            }
        }
    }

    /// `(U(t), B(t))` as x-profiles.
    pub fn profiles(&self, grid: &GridSpec, t: f64) -> (XProfile, XProfile) {
        match self {
            FarField::Trivial => (XProfile::zeros(*grid), XProfile::zeros(*grid)),
            FarField::Decaying { g, .. } => (g.scale(self.amplitude(t).0), XProfile::zeros(*grid)),
        }
    }

    /// `(∂_t U, ∂_t B)` as x-profiles.
    pub fn time_derivatives(&self, grid: &GridSpec, t: f64) -> (XProfile, XProfile) {
        match self {
            FarField::Trivial => (XProfile::zeros(*grid), XProfile::zeros(*grid)),
            FarField::Decaying { g, .. } => (g.scale(self.amplitude(t).1), XProfile::zeros(*grid)),
        }
    }

    pub fn traces(&self, grid: &GridSpec, t: f64) -> Traces {
        let zero = vec![0.0; grid.nx];
        match self {
            FarField::Trivial => Traces {
                u: zero.clone(),
                b: zero.clone(),
                ut: zero.clone(),
                bt: zero.clone(),
                ux: zero.clone(),
                bx: zero,
            },
            FarField::Decaying { g, .. } => {
                let (a, at) = self.amplitude(t);
                let gv = g.values();
                let gx = g.ddx().values();
                Traces {
                    u: gv.iter().map(|v| a * v).collect(),
                    ut: gv.iter().map(|v| at * v).collect(),
                    ux: gx.iter().map(|v| a * v).collect(),
                    b: zero.clone(),
                    bt: zero.clone(),
                    bx: zero,
                }
            }
        }
    }

    /// Decay exponent α when the family has one.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            FarField::Trivial => None,
            FarField::Decaying { alpha, .. } => Some(*alpha),
        }
    }
}

/// Default analytic shape: `ĝ(ξ) = e^{-ξ²}` on nonzero modes, dealiased.
pub fn default_shape(grid: &GridSpec) -> XProfile {
    let cutoff = grid.dealias_cutoff() as u64;
    let coeffs = (0..grid.nx)
        .map(|s| {
            let j = grid.mode_index(s);
            if j == 0 || grid.is_nyquist(s) || j.unsigned_abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new((-grid.xi(s).powi(2)).exp(), 0.0)
            }
        })
        .collect();
    XProfile::from_coeffs(*grid, coeffs).expect("length matches nx")
}

/// Sizes of the three far-field assumption integrals, with ε factored out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldBudget {
    pub besov_32: f64,
    pub besov_12: f64,
    /// `∫⟨t⟩^{7/2}(α²⟨t⟩^{-2α-2} + ⟨t⟩^{-2α}) dt`.
    pub l2_time: f64,
    /// `∫⟨t⟩^{5/4 − α} dt`.
    pub l1_time: f64,
}

/// Decaying far field of shape [`default_shape`] scaled to 90% of the
/// admissible amplitude for `alpha`.
pub fn default_decaying(params: &Params, grid: &GridSpec, alpha: f64) -> Result<FarField> {
    if !(alpha > 2.25) {
        return Err(Error::InvalidParams(format!("alpha must exceed 9/4, got {alpha}")));
    }
    let partition = DyadicPartition::build(grid);
    let shape = default_shape(grid);
    let b32 = besov_h_norm_gevrey(&partition, &shape, 1.5, params.delta)?;
    let b12 = besov_h_norm_gevrey(&partition, &shape, 0.5, params.delta)?;
    let l2 = (alpha * alpha / (2.0 * alpha - 2.5) + 1.0 / (2.0 * alpha - 4.5)).sqrt();
    let l1 = 1.0 / (alpha - 2.25);
    let first = b32 + b12 * l2;
    let second = b12 * l1;
    let scale = 0.9 / first.max(second);
    FarField::decaying(params, alpha, shape.scale(scale))
}

/// Outcome of the far-field decay assumptions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// `‖⟨t⟩^{9/4} e^{δ|D|}(U,B)‖_{L̃^∞(B^{3/2}_h)}`.
    pub sup_norm: f64,
    /// `‖⟨t⟩^{7/4} e^{δ|D|}(∂_tU, ∂_tB, U, B)‖_{L̃^2(B^{1/2}_h)}`.
    pub l2_norm: f64,
    /// `∫⟨t⟩^{5/4} ‖e^{δ|D|}(U,B)‖_{B^{1/2}_h} dt`.
    pub l1_norm: f64,
    pub decay_pass: bool,
    pub integral_pass: bool,
}

/// Evaluates the three assumption norms on `[0, horizon]` by quadrature,
/// closing the tail `t > horizon` analytically from the decay law.
pub fn assumption_check(farfield: &FarField, grid: &GridSpec, delta: f64, epsilon: f64, horizon: f64) -> Result<AssumptionReport> {
    let partition = DyadicPartition::build(grid);
    let nshell = partition.shells().len();
    let shell_of = |p: &XProfile| -> Result<Vec<f64>> {
        let g = crate::lp::gevrey_factors(grid, delta)?;
        let e: Vec<f64> = p.mode_energies().iter().zip(&g).map(|(e, g)| e * g * g).collect();
        Ok(partition.shell_norms(&e))
    };
    let weights: Vec<f64> = partition.shells().iter().map(|&k| 2f64.powf(k as f64)).collect();

    let (u0, b0) = farfield.profiles(grid, 0.0);
    let (nu, nb) = (shell_of(&u0)?, shell_of(&b0)?);
    let plain0: Vec<f64> = (0..nshell).map(|k| (nu[k].powi(2) + nb[k].powi(2)).sqrt()).collect();
    if plain0.iter().all(|&v| v == 0.0) {
        return Ok(AssumptionReport {
            sup_norm: 0.0,
            l2_norm: 0.0,
            l1_norm: 0.0,
            decay_pass: true,
            integral_pass: true,
        });
    }
    // Every shell follows the same time law, so ‖Δ_k(U,B)(t)‖ = ‖Δ_k(U,B)(0)‖·law(t).
    let alpha = farfield.alpha().unwrap_or(f64::INFINITY);
    let law = |t: f64| (1.0 + t).powf(-alpha);
    let law_t = |t: f64| alpha * (1.0 + t).powf(-alpha - 1.0);
    let tol = 1e-12;
    let tail = |p: f64| {
        if p > 1.0 {
            (1.0 + horizon).powf(1.0 - p) / (p - 1.0)
        } else {
            f64::INFINITY
        }
    };

    let sup_time = if alpha >= 2.25 { 1.0 } else { f64::INFINITY };
    let sup_norm: f64 = (0..nshell).map(|k| weights[k].powf(1.5) * plain0[k] * sup_time).sum();

    let l2_body = adaptive_simpson(|t| (1.0 + t).powf(3.5) * (law(t).powi(2) + law_t(t).powi(2)), 0.0, horizon, tol);
    let l2_time = (l2_body + tail(2.0 * alpha - 3.5) + alpha * alpha * tail(2.0 * alpha - 1.5)).sqrt();
    let l2_norm: f64 = (0..nshell).map(|k| weights[k].sqrt() * plain0[k]).sum::<f64>() * l2_time;

    let l1_body = adaptive_simpson(|t| (1.0 + t).powf(1.25) * law(t), 0.0, horizon, tol);
    let l1_norm: f64 = (0..nshell).map(|k| weights[k].sqrt() * plain0[k]).sum::<f64>() * (l1_body + tail(alpha - 1.25));

    Ok(AssumptionReport {
        sup_norm,
        l2_norm,
        l1_norm,
        decay_pass: sup_norm + l2_norm <= epsilon,
        integral_pass: l1_norm <= epsilon,
    })
}

/// Second Bernoulli equation residual `∂_tB₁ + U₁∂_xB₁ − B₁∂_xU₁` in `B^{1/2}_h`.
pub fn bernoulli_residual(farfield: &FarField, params: &Params, grid: &GridSpec, t: f64) -> f64 {
    let tr = farfield.traces(grid, t);
    let bbar = params.bbar();
    let values: Vec<f64> = (0..grid.nx)
        .map(|m| tr.bt[m] + tr.u[m] * tr.bx[m] - (tr.b[m] + bbar) * tr.ux[m])
        .collect();
    let profile = XProfile::from_values(*grid, &values).expect("nx values");
    let partition = DyadicPartition::build(grid);
    crate::lp::besov_h_norm(&partition, &profile, 0.5)
}

/// Source terms `(m_U, m_B)` and their tail primitives `(M_U, M_B) = −∫_y^∞ m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceTerms {
    pub m_u: Field,
    pub m_b: Field,
    pub big_m_u: Field,
    pub big_m_b: Field,
}

pub fn source_terms(farfield: &FarField, cutoff: Option<&Cutoff>, params: &Params, grid: &GridSpec, t: f64) -> Result<SourceTerms> {
    let zero = || Field::zeros(*grid, Bc::Untagged);
    if farfield.is_trivial() {
        return Ok(SourceTerms {
            m_u: zero(),
            m_b: zero(),
            big_m_u: zero(),
            big_m_b: zero(),
        });
    }
    let cut = cutoff.ok_or_else(|| Error::InsufficientResolution("nontrivial far field needs a cutoff".into()))?;
    let tr = farfield.traces(grid, t);
    let bbar = params.bbar();
    let nx = grid.nx;
    let mut mu = PhysicalField::zeros(*grid);
    let mut mb = PhysicalField::zeros(*grid);
    for i in 0..grid.ny {
        let (c0, c1, c2, c3) = (cut.chi[i], cut.chi1[i], cut.chi2[i], cut.chi3[i]);
        let w1 = 1.0 - c1;
        let wu = 1.0 - c1 * c1 + c0 * c2;
        let wb = 1.0 - c1 * c1 - c0 * c2;
        for m in 0..nx {
            let (u, b, ut, bt, ux, bx) = (tr.u[m], tr.b[m], tr.ut[m], tr.bt[m], tr.ux[m], tr.bx[m]);
            mu.values_mut()[i * nx + m] = w1 * (ut - bbar * bx) + c3 * u + wu * (u * ux - b * bx);
            mb.values_mut()[i * nx + m] = w1 * (bt - bbar * ux) + c3 * b + wb * (u * bx - b * ux);
        }
    }
    let m_u = mu.forward(Bc::Untagged).dealiased();
    let m_b = mb.forward(Bc::Untagged).dealiased();
    let big_m_u = integrate_y_tail(&m_u).scale(-1.0);
    let big_m_b = integrate_y_tail(&m_b).scale(-1.0);
    Ok(SourceTerms {
        m_u,
        m_b,
        big_m_u,
        big_m_b,
    })
}

/// `u₀` profile `(y − y³/2) e^{-y²/2}`.
pub fn u0_profile(y: f64) -> f64 {
    (y - 0.5 * y.powi(3)) * (-0.5 * y * y).exp()
}

/// `b₀` profile `(1 − y²) e^{-y²/2}`.
pub fn b0_profile(y: f64) -> f64 {
    (1.0 - y * y) * (-0.5 * y * y).exp()
}

/// Compatibility and smallness measurements of an initial datum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub u_wall: f64,
    pub dyb_wall: f64,
    /// `∫_0^∞` of the y-profiles by adaptive quadrature, times ε·max|a|.
    pub u_flux: f64,
    pub b_flux: f64,
    /// Largest per-column trapezoid flux on the grid.
    pub u_flux_grid: f64,
    pub b_flux_grid: f64,
    pub data_norm: f64,
    pub gh_norm: f64,
    pub sqrt_epsilon: f64,
    pub pass: bool,
}

/// Standard datum `u₀ = ε a(x)(y − y³/2)e^{-y²/2}`, `b₀ = ε a(x)(1 − y²)e^{-y²/2}`.
/// `weight_a` selects the Gaussian weight `e^{weight_a · y²/8}` in the smallness test.
pub fn initial_data_standard(
    grid: &GridSpec,
    params: &Params,
    a: &XProfile,
    weight_a: f64,
) -> Result<(Field, Field, CompatibilityReport)> {
    let scale = a.coeffs().iter().map(|c| c.norm()).sum::<f64>();
    if a.coeffs()[0].norm() > 1e-14 * (1.0 + scale) {
        return Err(Error::InitialData("x-shape must have zero mean".into()));
    }
    let eps = params.epsilon;
    let coeffs: Vec<Complex64> = a.coeffs().iter().map(|c| c * eps).collect();
    let u0 = Field::separable(*grid, Bc::Dirichlet, &coeffs, u0_profile);
    let b0 = Field::separable(*grid, Bc::Neumann, &coeffs, b0_profile);

    let amax = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let u_wall = u0.row(0).iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let dyb = ddy(&b0.clone().with_bc(Bc::Untagged));
    let dyb_wall = dyb.row(0).iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let u_flux = eps * amax * integrate_to_infinity(u0_profile, 0.0, 1e-14).abs();
    let b_flux = eps * amax * integrate_to_infinity(b0_profile, 0.0, 1e-14).abs();
    let grid_flux = |f: &Field| {
        let totals = crate::grid::column_totals(f);
        let col = XProfile::from_coeffs(*grid, totals).expect("nx values");
        col.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    };
    let (u_flux_grid, b_flux_grid) = (grid_flux(&u0), grid_flux(&b0));

    let phi0 = integrate_y_tail(&u0).scale(-1.0);
    let psi0 = integrate_y_tail(&b0).scale(-1.0);
    let (g0, h0) = gh_from_parts(&u0, &b0, &phi0, &psi0, 0.0, params.kappa);
    let partition = DyadicPartition::build(grid);
    let w = |f| Weighted::new(f, weight_a);
    let data_norm = besov_norm_vec(&partition, &[w(&u0), w(&b0), w(&phi0), w(&psi0)], 0.5, 0.0, params.delta)?;
    let gh_norm = besov_norm_vec(&partition, &[w(&g0), w(&h0)], 0.5, 0.0, params.delta)?;
    let sqrt_epsilon = eps.sqrt();

    let pass = u_wall < 1e-12
        && dyb_wall < 1e-12_f64.max(10.0 * eps * grid.dy().powi(2))
        && u_flux < 1e-8 * eps
        && b_flux < 1e-8 * eps
        && data_norm.is_finite()
        && gh_norm <= sqrt_epsilon;
    let report = CompatibilityReport {
        u_wall,
        dyb_wall,
        u_flux,
        b_flux,
        u_flux_grid,
        b_flux_grid,
        data_norm,
        gh_norm,
        sqrt_epsilon,
        pass,
    };
    if gh_norm > sqrt_epsilon {
        return Err(Error::InitialData(format!(
            "smallness violated: weighted (G0, H0) norm {gh_norm:.6e} exceeds sqrt(eps) = {sqrt_epsilon:.6e}"
        )));
    }
    Ok((u0, b0, report))
}

/// `G = u + yφ/(2⟨t⟩)`, `H = b + yψ/(2κ⟨t⟩)`.
pub fn gh_from_parts(u: &Field, b: &Field, phi: &Field, psi: &Field, t: f64, kappa: f64) -> (Field, Field) {
    let tt = 1.0 + t;
    let g = u.add(&phi.mul_profile(|y| y / (2.0 * tt))).with_bc(Bc::Dirichlet);
    let h = b.add(&psi.mul_profile(|y| y / (2.0 * kappa * tt))).with_bc(Bc::Neumann);
    (g, h)
}

/// x-independent heat datum `u₀ = y e^{-y²/2}`, `b₀ = 0`.
pub fn initial_data_heat(grid: &GridSpec) -> (Field, Field) {
    let u0 = Field::from_fn(*grid, Bc::Dirichlet, |_, y| y * (-0.5 * y * y).exp());
    (u0, Field::zeros(*grid, Bc::Neumann))
}

/// Exact heat solution `(1+2t)^{-3/2} y e^{-y²/(2(1+2t))}` of the heat datum
/// (diffusivity `nu`).
pub fn heat_exact(t: f64, y: f64, nu: f64) -> f64 {
    let s = 1.0 + 2.0 * nu * t;
    s.powf(-1.5) * y * (-y * y / (2.0 * s)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Standard,
    Heat,
    Zero,
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "standard" => Ok(Self::Standard),
            "heat" => Ok(Self::Heat),
            "zero" => Ok(Self::Zero),
            other => Err(format!("unknown scenario `{other}` (expected standard, heat or zero)")),
        }
    }
}
