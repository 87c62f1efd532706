//! Time integration of the transformed boundary-layer system with analytic-band
//! tracking and norm sampling.

pub mod checkpoint;
pub mod diffusion;
pub mod ops;
pub mod rescale;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{d2dy, ddy, psi, tail_guard, weighted, Bc, Field, GridSpec};
use crate::lp::{besov_h_norm_gevrey, combined_energies, ClAccumulator, DyadicPartition, TimeExponent, Weighted};
use crate::scenario::Params;

pub use diffusion::CnFactor;
pub use ops::{compute_gh, max_flux, recover_vh, recover_vh_checked, reconstruct_phipsi, rhs_explicit, Model};
pub use rescale::{eqs2_residual, kappa_rescale_map};

/// Gaussian weight used for every norm: `e^{Ψ}` or `e^{Ψ/κ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightBranch {
    Psi,
    PsiKappa,
}

impl WeightBranch {
    pub fn default_for(kappa: f64) -> Self {
        if kappa < 2.0 {
            WeightBranch::Psi
        } else {
            WeightBranch::PsiKappa
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightBranch::Psi => "psi",
            WeightBranch::PsiKappa => "psi_kappa",
        }
    }

    /// Weight multiple `a` in `e^{aΨ}`.
    pub fn multiple(self, kappa: f64) -> f64 {
        match self {
            WeightBranch::Psi => 1.0,
            WeightBranch::PsiKappa => 1.0 / kappa,
        }
    }
}

impl std::str::FromStr for WeightBranch {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "psi" => Ok(Self::Psi),
            "psi_kappa" => Ok(Self::PsiKappa),
            other => Err(format!("unknown weight `{other}` (expected psi or psi_kappa)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt_max: f64,
    pub cfl: f64,
    pub sample_interval: f64,
    pub weight: WeightBranch,
    /// Run the heat-energy audit every `audit_every` steps (0 disables it).
    pub audit_every: u64,
}

impl SimConfig {
    pub fn new(kappa: f64) -> Self {
        Self {
            dt_max: 1e-2,
            cfl: 0.4,
            sample_interval: 0.5,
            weight: WeightBranch::default_for(kappa),
            audit_every: 0,
        }
    }
}

/// One row of the norm time series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub theta: f64,
    pub radius: f64,
    pub norm_ub: f64,
    pub norm_gh: f64,
    pub norm_dy_gh: f64,
    pub norm_phipsi: f64,
    pub cl_dyub_sq: f64,
    /// `∫_0^t ⟨τ⟩^{1/4} ‖e^Ψ ∂_y(G,H)_Φ‖ dτ`.
    pub gh_integral: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub samples: Vec<Sample>,
}

impl NormSeries {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Values of a CSV column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let get: fn(&Sample) -> f64 = match name {
            "t" => |s| s.t,
            "theta" => |s| s.theta,
            "radius" => |s| s.radius,
            "norm_ub" => |s| s.norm_ub,
            "norm_gh" => |s| s.norm_gh,
            "norm_dy_gh" => |s| s.norm_dy_gh,
            "norm_phipsi" => |s| s.norm_phipsi,
            "cl_dyub_sq" => |s| s.cl_dyub_sq,
            "gh_integral" => |s| s.gh_integral,
            _ => return None,
        };
        Some(self.samples.iter().map(get).collect())
    }
}

/// One heat-energy inequality evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub t: f64,
    pub field: char,
    pub alpha: f64,
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `(lhs − rhs)` divided by the sum of the magnitudes of all terms.
    pub relative_slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub b: Field,
    pub theta: f64,
    pub step: u64,
    pub dt_prev: Option<f64>,
    /// Explicit tendencies of the previous step, for Adams–Bashforth.
    pub n_prev: Option<(Field, Field)>,
    pub gh_integral: f64,
    pub cl_dyub: ClAccumulator,
    pub flux0: Vec<Complex64>,
    pub max_flux_drift: f64,
}

/// Norms of the current state under the phase radius `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub ub: f64,
    pub gh: f64,
    pub dy_gh: f64,
    pub phipsi: f64,
    pub farfield: f64,
}

pub struct Simulation {
    pub model: Model,
    pub config: SimConfig,
    pub partition: DyadicPartition,
    pub state: State,
    pub series: NormSeries,
    pub audit: Vec<AuditRecord>,
    factors: Vec<CnFactor>,
    next_sample: f64,
}

impl Simulation {
    pub fn new(model: Model, config: SimConfig, u0: Field, b0: Field) -> Result<Self> {
        if u0.grid() != &model.grid || b0.grid() != &model.grid {
            return Err(Error::InvalidGrid("initial data grid differs from model grid".into()));
        }
        if !(config.dt_max > 0.0 && config.cfl > 0.0 && config.sample_interval >= config.dt_max) {
            return Err(Error::InvalidParams("need dt_max > 0, cfl > 0 and sample_interval >= dt_max".into()));
        }
        let partition = DyadicPartition::build(&model.grid);
        let u = zero_boundaries(u0.with_bc(Bc::Dirichlet));
        let b = zero_boundaries(b0.with_bc(Bc::Neumann));
        let flux0 = ops::nonzero_fluxes(&u);
        let state = State {
            t: 0.0,
            u,
            b,
            theta: 0.0,
            step: 0,
            dt_prev: None,
            n_prev: None,
            gh_integral: 0.0,
            cl_dyub: ClAccumulator::new(&partition, 0.5, TimeExponent::Two),
            flux0,
            max_flux_drift: 0.0,
        };
        let mut sim = Self {
            model,
            config,
            partition,
            state,
            series: NormSeries::default(),
            audit: Vec::new(),
            factors: Vec::new(),
            next_sample: 0.0,
        };
        sim.record_sample()?;
        Ok(sim)
    }

    /// Rebuilds a simulation from saved pieces (used by checkpoint loading).
    pub fn from_parts(
        model: Model,
        config: SimConfig,
        state: State,
        series: NormSeries,
        audit: Vec<AuditRecord>,
        next_sample: f64,
    ) -> Self {
        let partition = DyadicPartition::build(&model.grid);
        Self {
            model,
            config,
            partition,
            state,
            series,
            audit,
            factors: Vec::new(),
            next_sample,
        }
    }

    pub fn next_sample(&self) -> f64 {
        self.next_sample
    }

    pub fn grid(&self) -> &GridSpec {
        &self.model.grid
    }

    pub fn params(&self) -> &Params {
        &self.model.params
    }

    pub fn radius(&self) -> f64 {
        self.model.params.delta - self.model.params.lambda * self.state.theta
    }

    fn weight_a(&self) -> f64 {
        self.config.weight.multiple(self.model.params.kappa)
    }

    /// Step size from the CFL rule `dt = min(dt_max, C·Δx / (max|u| + max|U| + B̄))`.
    pub fn policy_dt(&self) -> f64 {
        let grid = self.model.grid;
        let dx = grid.lx / grid.nx as f64;
        let umax = self.state.u.to_physical().values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (uf, _) = self.model.farfield.profiles(&grid, self.state.t);
        let ufmax = uf.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let speed = umax + ufmax + self.model.params.bbar();
        if speed > 0.0 {
            self.config.dt_max.min(self.config.cfl * dx / speed)
        } else {
            self.config.dt_max
        }
    }

    fn factor(&mut self, bc: Bc, dt: f64) -> CnFactor {
        let nu = match bc {
            Bc::Neumann => self.model.params.nu_b,
            _ => self.model.params.nu_u,
        };
        if let Some(f) = self.factors.iter().find(|f| f.bc == bc && f.dt == dt && f.nu == nu) {
            return f.clone();
        }
        let f = CnFactor::new(&self.model.grid, bc, nu, dt);
        if self.factors.len() > 8 {
            self.factors.remove(0);
        }
        self.factors.push(f.clone());
        f
    }

    /// Norms of `(u, b)` and derived quantities at time `t` under radius `r`.
    pub fn norms_of(&self, u: &Field, b: &Field, t: f64, r: f64) -> Result<Norms> {
        let a = self.weight_a();
        let p = &self.partition;
        let (phi, psi) = reconstruct_phipsi(u, b);
        let (g, h) = crate::scenario::gh_from_parts(u, b, &phi, &psi, t, self.model.params.kappa);
        let (gy, hy) = (ddy(&g), ddy(&h));
        let norm = |parts: &[Weighted<'_>]| -> Result<f64> {
            let e = combined_energies(parts, t, r)?;
            Ok(p.besov_sum(&p.shell_norms(&e), 0.5))
        };
        let w = |f| Weighted::new(f, a);
        let (uf, bf) = self.model.farfield.profiles(&self.model.grid, t);
        let farfield = (besov_h_norm_gevrey(p, &uf, 0.5, r)?.powi(2) + besov_h_norm_gevrey(p, &bf, 0.5, r)?.powi(2)).sqrt();
        Ok(Norms {
            ub: norm(&[w(u), w(b)])?,
            gh: norm(&[w(&g), w(&h)])?,
            dy_gh: norm(&[w(&gy), w(&hy)])?,
            phipsi: norm(&[w(&phi), w(&psi)])?,
            farfield,
        })
    }

    /// `θ̇` from fields at time `t` under radius `r`, and its `(G,H)` part.
    pub fn theta_rate(&self, u: &Field, b: &Field, t: f64, r: f64) -> Result<(f64, f64)> {
        let a = self.weight_a();
        let p = &self.partition;
        let (g, h) = compute_gh(u, b, t, self.model.params.kappa);
        let (gy, hy) = (ddy(&g), ddy(&h));
        let e = combined_energies(&[Weighted::new(&gy, a), Weighted::new(&hy, a)], t, r)?;
        let gh_part = (1.0 + t).powf(0.25) * p.besov_sum(&p.shell_norms(&e), 0.5);
        let far_part = if self.model.farfield.is_trivial() {
            0.0
        } else {
            let (uf, bf) = self.model.farfield.profiles(&self.model.grid, t);
            let n = (besov_h_norm_gevrey(p, &uf, 0.5, r)?.powi(2) + besov_h_norm_gevrey(p, &bf, 0.5, r)?.powi(2)).sqrt();
            self.model.params.epsilon.powf(-0.5) * (1.0 + t).powf(1.25) * n
        };
        Ok((gh_part + far_part, gh_part))
    }

    /// Per-shell `‖e^{aΨ} ∂_y(u,b)_Φ‖`.
    fn dyub_shells(&self, r: f64) -> Result<Vec<f64>> {
        let a = self.weight_a();
        let (uy, by) = (ddy(&self.state.u), ddy(&self.state.b));
        let e = combined_energies(&[Weighted::new(&uy, a), Weighted::new(&by, a)], self.state.t, r)?;
        Ok(self.partition.shell_norms(&e))
    }

    fn record_sample(&mut self) -> Result<()> {
        let s = &self.state;
        let a = self.weight_a();
        tail_guard(&s.u, a, s.t)?;
        tail_guard(&s.b, a, s.t)?;
        let r = self.radius();
        let n = self.norms_of(&s.u, &s.b, s.t, r)?;
        let sample = Sample {
            t: s.t,
            theta: s.theta,
            radius: r,
            norm_ub: n.ub,
            norm_gh: n.gh,
            norm_dy_gh: n.dy_gh,
            norm_phipsi: n.phipsi,
            cl_dyub_sq: s.cl_dyub.norm().powi(2),
            gh_integral: s.gh_integral,
        };
        let finite = [sample.norm_ub, sample.norm_gh, sample.norm_dy_gh, sample.norm_phipsi, sample.cl_dyub_sq]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Divergence { t: s.t });
        }
        self.series.samples.push(sample);
        self.next_sample = s.t + self.config.sample_interval;
        Ok(())
    }

    /// Advances one step of size `dt` (no sampling).
    pub fn step_dt(&mut self, dt: f64) -> Result<()> {
        let r = self.radius();
        if r <= 0.0 {
            return Err(Error::TStarReached {
                t: self.state.t,
                theta: self.state.theta,
            });
        }
        let t0 = self.state.t;
        let (u0, b0) = (self.state.u.clone(), self.state.b.clone());
        let fu = self.factor(Bc::Dirichlet, dt);
        let fb = self.factor(Bc::Neumann, dt);

        let dyub = self.dyub_shells(r)?;
        let (nu, nb) = rhs_explicit(&self.model, &u0, &b0, t0);
        let (u1, b1) = match (&self.state.n_prev, self.state.dt_prev) {
            (Some((pu, pb)), Some(dtp)) => {
                let w = dt / dtp;
                let su = nu.scale(1.0 + 0.5 * w).axpy(-0.5 * w, pu);
                let sb = nb.scale(1.0 + 0.5 * w).axpy(-0.5 * w, pb);
                (fu.step(&u0, &su), fb.step(&b0, &sb))
            }
            _ => {
                let (up, bp) = (fu.step(&u0, &nu), fb.step(&b0, &nb));
                let (nu2, nb2) = rhs_explicit(&self.model, &up, &bp, t0 + dt);
                let su = nu.add(&nu2).scale(0.5);
                let sb = nb.add(&nb2).scale(0.5);
                (fu.step(&u0, &su), fb.step(&b0, &sb))
            }
        };
        if !(u1.is_finite() && b1.is_finite()) {
            return Err(Error::Divergence { t: t0 + dt });
        }
        let t1 = t0 + dt;
        let (rate, gh_rate) = self.theta_rate(&u1, &b1, t1, r)?;
        if !rate.is_finite() {
            return Err(Error::Divergence { t: t1 });
        }

        let st = &mut self.state;
        st.cl_dyub.accumulate(&dyub, dt, 1.0);
        st.theta += dt * rate;
        st.gh_integral += dt * gh_rate;
        st.u = u1;
        st.b = b1;
        st.t = t1;
        st.step += 1;
        st.dt_prev = Some(dt);
        st.n_prev = Some((nu, nb));
        let flux = ops::nonzero_fluxes(&st.u);
        let drift = flux.iter().zip(&st.flux0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        st.max_flux_drift = st.max_flux_drift.max(drift);

        if self.config.audit_every > 0 && self.state.step.is_multiple_of(self.config.audit_every) {
            let (u1, b1) = (self.state.u.clone(), self.state.b.clone());
            self.run_audit(&u0, &u1, t0, t1, 'u')?;
            self.run_audit(&b0, &b1, t0, t1, 'b')?;
        }
        if self.radius() <= 0.0 {
            return Err(Error::TStarReached {
                t: self.state.t,
                theta: self.state.theta,
            });
        }
        Ok(())
    }

    fn run_audit(&mut self, f0: &Field, f1: &Field, t0: f64, t1: f64, name: char) -> Result<()> {
        let kappa = self.model.params.kappa;
        for (alpha, beta) in [(1.0, 1.0), (1.0, kappa), (1.0 / kappa, 1.0), (1.0 / kappa, kappa)] {
            let (lhs, rhs, rel) = heat_energy_terms(f0, f1, t0, t1, alpha, beta)?;
            self.audit.push(AuditRecord {
                t: t1,
                field: name,
                alpha,
                beta,
                lhs,
                rhs,
                relative_slack: rel,
            });
        }
        Ok(())
    }

    /// Runs to `t_final`, sampling every `sample_interval` and at `t_final`.
    pub fn run_until(&mut self, t_final: f64) -> Result<()> {
        while self.state.t < t_final - 1e-12 * t_final.max(1.0) {
            let target = self.next_sample.min(t_final);
            let mut dt = self.policy_dt();
            let remaining = target - self.state.t;
            let lands = remaining <= dt * (1.0 + 1e-9);
            if lands {
                dt = remaining;
            }
            self.step_dt(dt)?;
            if lands {
                self.state.t = target;
                if (target - self.next_sample).abs() <= 1e-12 * target.max(1.0) || target == t_final {
                    self.record_sample()?;
                }
            }
        }
        Ok(())
    }

    pub fn summary_flux_drift_rate(&self) -> f64 {
        if self.state.t > 0.0 {
            self.state.max_flux_drift / self.state.t
        } else {
            0.0
        }
    }
}

fn zero_boundaries(f: Field) -> Field {
    let ny = f.grid().ny;
    let dirichlet = f.bc() == Bc::Dirichlet;
    f.map_coeffs(|i, _, z| {
        if i == ny - 1 || (dirichlet && i == 0) {
            Complex64::new(0.0, 0.0)
        } else {
            z
        }
    })
}

/// Discrete heat-energy inequality between two time levels:
/// `(∂_t f − β∂²_y f | e^{2αΨ} f)` against
/// `½ d/dt‖e^{αΨ}f‖² + (β − β²α/2)‖e^{αΨ}∂_y f‖²`, with time differences
/// and midpoint values. Returns `(lhs, rhs, relative slack)`.
pub fn heat_energy_terms(f0: &Field, f1: &Field, t0: f64, t1: f64, alpha: f64, beta: f64) -> Result<(f64, f64, f64)> {
    let grid = *f0.grid();
    let dt = t1 - t0;
    let tm = 0.5 * (t0 + t1);
    let mid = f0.add(f1).scale(0.5);
    let ft = f1.sub(f0).scale(1.0 / dt);
    let fyy = d2dy(&mid)?;
    let fy = ddy(&mid);
    let w = grid.trapezoid_weights();
    let mut lhs = 0.0;
    let mut lhs_mag = 0.0;
    let mut grad = 0.0;
    for i in 0..grid.ny {
        let (mut sa, mut sb, mut mag, mut g) = (0.0, 0.0, 0.0, 0.0);
        for s in 0..grid.nx {
            let k = i * grid.nx + s;
            let m = mid.coeffs()[k].conj();
            let a = (ft.coeffs()[k] * m).re;
            let b = (fyy.coeffs()[k] * m).re * beta;
            sa += a;
            sb += b;
            mag += a.abs() + b.abs();
            g += fy.coeffs()[k].norm_sqr();
        }
        let (y, log_w) = (grid.y(i), 2.0 * alpha * psi(tm, grid.y(i)));
        let d = sa - sb;
        lhs += w[i] * d.signum() * weighted(d.abs(), log_w, y)?;
        lhs_mag += w[i] * weighted(mag, log_w, y)?;
        grad += w[i] * weighted(g, log_w, y)?;
    }
    lhs *= grid.lx;
    lhs_mag *= grid.lx;
    grad *= grid.lx;
    let e1 = crate::grid::weighted_l2(f1, alpha, t1)?.powi(2);
    let e0 = crate::grid::weighted_l2(f0, alpha, t0)?.powi(2);
    let ddt = 0.5 * (e1 - e0) / dt;
    let coef = beta - beta * beta * alpha / 2.0;
    let rhs = ddt + coef * grad;
    let scale = lhs_mag + ddt.abs() + (coef * grad).abs();
    let rel = if scale == 0.0 { 0.0 } else { (lhs - rhs) / scale };
    Ok((lhs, rhs, rel))
}
