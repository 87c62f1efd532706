//! Derived quantities and the explicit tendency of the transformed system.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{column_totals, ddx, ddy, integrate_y_from0, integrate_y_tail, Bc, Field, GridSpec, PhysicalField};
use crate::scenario::{gh_from_parts, Cutoff, FarField, Params};

/// Everything the right-hand side needs besides the fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub params: Params,
    pub grid: GridSpec,
    pub farfield: FarField,
    pub cutoff: Option<Cutoff>,
}

impl Model {
    /// Builds the cutoff only when the far field is nontrivial.
    pub fn new(params: Params, grid: GridSpec, farfield: FarField) -> Result<Self> {
        params.validate()?;
        grid.validate()?;
        if params.bbar() != 0.0 && !farfield.is_trivial() {
            return Err(Error::UnsupportedScenario(
                "kappa = 1 runs only support the trivial far field".into(),
            ));
        }
        let cutoff = if farfield.is_trivial() { None } else { Some(Cutoff::build(&grid)?) };
        Ok(Self {
            params,
            grid,
            farfield,
            cutoff,
        })
    }
}

/// `(v, h) = −∂_x ∫_0^y (u, b) dy'`.
pub fn recover_vh(u: &Field, b: &Field) -> (Field, Field) {
    let v = ddx(&integrate_y_from0(u)).scale(-1.0).with_bc(Bc::Dirichlet);
    let h = ddx(&integrate_y_from0(b)).scale(-1.0).with_bc(Bc::Dirichlet);
    (v, h)
}

/// Largest column flux `|∫_0^{ymax} f̂_j dy|` over nonzero modes.
pub fn max_flux(f: &Field) -> f64 {
    let grid = f.grid();
    column_totals(f)
        .iter()
        .enumerate()
        .filter(|(s, _)| grid.mode_index(*s) != 0)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
}

/// [`recover_vh`] after checking that nonzero modes of `u` and `b` carry no
/// net flux beyond `tol`.
pub fn recover_vh_checked(u: &Field, b: &Field, tol: f64) -> Result<(Field, Field)> {
    for (name, f) in [("u", u), ("b", b)] {
        let flux = max_flux(f);
        if flux > tol {
            return Err(Error::Integrity(format!("{name} column flux {flux:.3e} exceeds {tol:.3e}")));
        }
    }
    Ok(recover_vh(u, b))
}

/// `(φ, ψ) = −∫_y^∞ (u, b) dy'`.
pub fn reconstruct_phipsi(u: &Field, b: &Field) -> (Field, Field) {
    (
        integrate_y_tail(u).scale(-1.0).with_bc(Bc::Dirichlet),
        integrate_y_tail(b).scale(-1.0).with_bc(Bc::Dirichlet),
    )
}

/// `(G, H)` at time `t`.
pub fn compute_gh(u: &Field, b: &Field, t: f64, kappa: f64) -> (Field, Field) {
    let (phi, psi) = reconstruct_phipsi(u, b);
    gh_from_parts(u, b, &phi, &psi, t, kappa)
}

/// Explicit tendencies `(N_u, N_b)`: every term of the transformed system
/// except the y-diffusion. Products are formed in physical space and dealiased.
pub fn rhs_explicit(model: &Model, u: &Field, b: &Field, t: f64) -> (Field, Field) {
    let grid = model.grid;
    let nx = grid.nx;
    let bbar = model.params.bbar();
    let (v, h) = recover_vh(u, b);
    let fields = [u.clone(), b.clone(), ddx(u), ddx(b), ddy(u), ddy(b), v, h];
    let phys: Vec<PhysicalField> = fields.iter().map(Field::to_physical).collect();
    let [pu, pb, pux, pbx, puy, pby, pv, ph] = [0, 1, 2, 3, 4, 5, 6, 7].map(|k| phys[k].values());

    let far = match (&model.farfield, &model.cutoff) {
        (FarField::Trivial, _) | (_, None) => None,
        (ff, Some(cut)) => Some((ff.traces(&grid, t), cut)),
    };

    let mut nu = PhysicalField::zeros(grid);
    let mut nb = PhysicalField::zeros(grid);
    {
        let out_u = nu.values_mut();
        let out_b = nb.values_mut();
        for i in 0..grid.ny {
            for m in 0..nx {
                let k = i * nx + m;
                let (u, b, ux, bx, uy, by, v, h) = (pu[k], pb[k], pux[k], pbx[k], puy[k], pby[k], pv[k], ph[k]);
                let mut tu = bbar * bx - (u * ux - b * bx + v * uy - h * by);
                let mut tb = bbar * ux - (u * bx - b * ux + v * by - h * uy);
                if let Some((tr, cut)) = &far {
                    let (c0, c1, c2, c3) = (cut.chi[i], cut.chi1[i], cut.chi2[i], cut.chi3[i]);
                    let (uu, bb, ut, bt, uxx, bxx) = (tr.u[m], tr.b[m], tr.ut[m], tr.bt[m], tr.ux[m], tr.bx[m]);
                    tu -= c1 * (uu * ux - bb * bx);
                    tu -= c1 * (uxx * u - bxx * b);
                    tu -= c0 * (-uxx * uy + bxx * by);
                    tu -= c2 * (uu * v - bb * h);
                    tb -= c1 * (uu * bx - bb * ux);
                    tb -= c1 * (bxx * u - uxx * b);
                    tb -= c0 * (-uxx * by + bxx * uy);
                    tb -= c2 * (bb * v - uu * h);
                    let (mu, mb) = source_values(c0, c1, c2, c3, bbar, uu, bb, ut, bt, uxx, bxx);
                    tu += mu;
                    tb += mb;
                }
                out_u[k] = tu;
                out_b[k] = tb;
            }
        }
    }
    (
        nu.forward(Bc::Dirichlet).dealiased(),
        nb.forward(Bc::Neumann).dealiased(),
    )
}

/// `(m_U, m_B)` at one node from cutoff values and far-field traces.
#[allow(clippy::too_many_arguments)]
pub fn source_values(
    c0: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    bbar: f64,
    u: f64,
    b: f64,
    ut: f64,
    bt: f64,
    ux: f64,
    bx: f64,
) -> (f64, f64) {
    let w1 = 1.0 - c1;
    let wu = 1.0 - c1 * c1 + c0 * c2;
    let wb = 1.0 - c1 * c1 - c0 * c2;
    (
        w1 * (ut - bbar * bx) + c3 * u + wu * (u * ux - b * bx),
        w1 * (bt - bbar * ux) + c3 * b + wb * (u * bx - b * ux),
    )
}

/// Column fluxes of nonzero modes, for drift tracking.
pub fn nonzero_fluxes(f: &Field) -> Vec<Complex64> {
    let grid = f.grid();
    column_totals(f)
        .into_iter()
        .enumerate()
        .map(|(s, c)| if grid.mode_index(s) == 0 { Complex64::new(0.0, 0.0) } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{default_decaying, u0_profile};
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(2.0 * PI, 16, 12.0, 1201).unwrap()
    }

    #[test]
    fn vh_of_zero_and_closed_form() {
        let g = grid();
        let z = Field::zeros(g, Bc::Dirichlet);
        let (v, h) = recover_vh(&z, &Field::zeros(g, Bc::Neumann));
        assert_eq!(v.max_abs() + h.max_abs(), 0.0);

        let xi0 = 2.0;
        let u = Field::from_fn(g, Bc::Dirichlet, |x, y| (xi0 * x).cos() * u0_profile(y));
        let (v, _) = recover_vh(&u, &Field::zeros(g, Bc::Neumann));
        let pv = v.to_physical();
        let mut vmax: f64 = 0.0;
        for i in 0..g.ny {
            let y = g.y(i);
            for m in 0..g.nx {
                let exact = xi0 * (xi0 * g.x(m)).sin() * (y * y / 2.0) * (-y * y / 2.0).exp();
                assert!((pv.at(i, m) - exact).abs() < 1e-6);
                vmax = vmax.max(pv.at(i, m).abs());
            }
        }
        let top = (0..g.nx).map(|m| pv.at(g.ny - 1, m).abs()).fold(0.0, f64::max);
        assert!(top < 1e-8 * vmax, "top {top} vmax {vmax}");
        assert!(recover_vh_checked(&u, &Field::zeros(g, Bc::Neumann), 1e-8).is_ok());
        let leaky = Field::from_fn(g, Bc::Dirichlet, |x, y| x.cos() * y * (-y * y).exp());
        assert!(matches!(
            recover_vh_checked(&leaky, &Field::zeros(g, Bc::Neumann), 1e-8),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn phipsi_closed_form_and_derivative() {
        let g = grid();
        let u = Field::from_fn(g, Bc::Dirichlet, |x, y| x.sin() * u0_profile(y));
        let (phi, psi) = reconstruct_phipsi(&u, &Field::zeros(g, Bc::Neumann));
        assert_eq!(psi.max_abs(), 0.0);
        let p = phi.to_physical();
        let h2 = g.dy().powi(2);
        for i in 0..g.ny {
            let y = g.y(i);
            for m in 0..g.nx {
                let exact = g.x(m).sin() * (y * y / 2.0) * (-y * y / 2.0).exp();
                assert!((p.at(i, m) - exact).abs() < h2);
            }
        }
        let dphi = ddy(&phi);
        assert!(dphi.sub(&u).max_abs() < 10.0 * h2);
    }

    #[test]
    fn gh_limits() {
        let g = grid();
        let u = Field::from_fn(g, Bc::Dirichlet, |x, y| x.sin() * u0_profile(y));
        let b = Field::zeros(g, Bc::Neumann);
        let (gg, hh) = compute_gh(&u, &b, 1e12, 1.0);
        assert!(gg.sub(&u).max_abs() < 1e-10);
        assert_eq!(hh.max_abs(), 0.0);
        let (gz, hz) = compute_gh(&Field::zeros(g, Bc::Dirichlet), &b, 0.0, 1.0);
        assert_eq!(gz.max_abs() + hz.max_abs(), 0.0);
    }

    #[test]
    fn zero_and_x_independent_states_have_no_tendency() {
        let g = GridSpec::new(2.0 * PI, 16, 12.0, 121).unwrap();
        let model = Model::new(Params::new(1.0, 1e-3, 1.0, 10.0).unwrap(), g, FarField::Trivial).unwrap();
        let (nu, nb) = rhs_explicit(&model, &Field::zeros(g, Bc::Dirichlet), &Field::zeros(g, Bc::Neumann), 0.0);
        assert_eq!(nu.max_abs() + nb.max_abs(), 0.0);
        let u = Field::from_fn(g, Bc::Dirichlet, |_, y| y * (-y * y / 2.0).exp());
        let b = Field::from_fn(g, Bc::Neumann, |_, y| (-y * y / 2.0).exp());
        let (nu, nb) = rhs_explicit(&model, &u, &b, 0.0);
        assert!(nu.max_abs() < 1e-15 && nb.max_abs() < 1e-15);
    }

    /// Manufactured single-mode state: u = ε cos x p(y), b = ε sin x q(y).
    struct Manufactured {
        eps: f64,
    }

    impl Manufactured {
        fn p(y: f64) -> [f64; 3] {
            let e = (-y * y / 2.0).exp();
            // p = (y − y³/2) e, p' and ∫_0^y p
            [(y - 0.5 * y.powi(3)) * e, (1.0 - 2.5 * y * y + 0.5 * y.powi(4)) * e, 0.5 * y * y * e]
        }
        fn q(y: f64) -> [f64; 3] {
            let e = (-y * y / 2.0).exp();
            [(1.0 - y * y) * e, (y.powi(3) - 3.0 * y) * e, y * e]
        }
        /// (u, b, ux, bx, uy, by, v, h) at (x, y).
        fn eval(&self, x: f64, y: f64) -> [f64; 8] {
            let (p, q) = (Self::p(y), Self::q(y));
            let e = self.eps;
            [
                e * x.cos() * p[0],
                e * x.sin() * q[0],
                -e * x.sin() * p[0],
                e * x.cos() * q[0],
                e * x.cos() * p[1],
                e * x.sin() * q[1],
                e * x.sin() * p[2],
                -e * x.cos() * q[2],
            ]
        }
    }

    fn check_against_symbolic(model: &Model, t: f64) {
        let g = model.grid;
        let man = Manufactured { eps: 1e-3 };
        let u = Field::from_fn(g, Bc::Dirichlet, |x, y| man.eval(x, y)[0]);
        let b = Field::from_fn(g, Bc::Neumann, |x, y| man.eval(x, y)[1]);
        let (nu, nb) = rhs_explicit(model, &u, &b, t);
        let (pu, pb) = (nu.to_physical(), nb.to_physical());
        let bbar = model.params.bbar();
        let far = model.cutoff.as_ref().map(|c| (model.farfield.traces(&g, t), c));
        let mut worst: f64 = 0.0;
        for i in 0..g.ny {
            let y = g.y(i);
            for m in 0..g.nx {
                let [u, b, ux, bx, uy, by, v, h] = man.eval(g.x(m), y);
                let mut terms_u = vec![bbar * bx, -u * ux, b * bx, -v * uy, h * by];
                let mut terms_b = vec![bbar * ux, -u * bx, b * ux, -v * by, h * uy];
                if let Some((tr, _)) = &far {
                    let c = crate::scenario::Cutoff::eval(model.cutoff.as_ref().unwrap().c, y);
                    let (uu, bb, ut, bt, uxx, bxx) = (tr.u[m], tr.b[m], tr.ut[m], tr.bt[m], tr.ux[m], tr.bx[m]);
                    terms_u.extend([
                        -c[1] * uu * ux,
                        c[1] * bb * bx,
                        -c[1] * uxx * u,
                        c[1] * bxx * b,
                        c[0] * uxx * uy,
                        -c[0] * bxx * by,
                        -c[2] * uu * v,
                        c[2] * bb * h,
                        (1.0 - c[1]) * (ut - bbar * bxx) + c[3] * uu + (1.0 - c[1] * c[1] + c[0] * c[2]) * (uu * uxx - bb * bxx),
                    ]);
                    terms_b.extend([
                        -c[1] * uu * bx,
                        c[1] * bb * ux,
                        -c[1] * bxx * u,
                        c[1] * uxx * b,
                        c[0] * uxx * by,
                        -c[0] * bxx * uy,
                        -c[2] * bb * v,
                        c[2] * uu * h,
                        (1.0 - c[1]) * (bt - bbar * uxx) + c[3] * bb + (1.0 - c[1] * c[1] - c[0] * c[2]) * (uu * bxx - bb * uxx),
                    ]);
                }
                let eu: f64 = terms_u.iter().sum();
                let eb: f64 = terms_b.iter().sum();
                // Wall rows of the Dirichlet field are overwritten by the solve.
                if i > 0 {
                    worst = worst.max((pu.at(i, m) - eu).abs());
                }
                worst = worst.max((pb.at(i, m) - eb).abs());
            }
        }
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn tendency_matches_symbolic_terms_with_background_field() {
        let g = GridSpec::new(2.0 * PI, 16, 12.0, 1201).unwrap();
        let model = Model::new(Params::new(1.0, 1e-3, 1.0, 10.0).unwrap(), g, FarField::Trivial).unwrap();
        check_against_symbolic(&model, 0.0);
    }

    #[test]
    fn tendency_matches_symbolic_terms_with_far_field() {
        let g = GridSpec::new(2.0 * PI, 16, 12.0, 1201).unwrap();
        let params = Params::new(1.5, 1e-3, 1.0, 10.0).unwrap();
        let ff = default_decaying(&params, &g, 2.5).unwrap();
        let model = Model::new(params, g, ff).unwrap();
        check_against_symbolic(&model, 0.7);
    }

    #[test]
    fn kappa_one_rejects_decaying_far_field() {
        let g = GridSpec::new(2.0 * PI, 16, 12.0, 1201).unwrap();
        let p15 = Params::new(1.5, 1e-3, 1.0, 10.0).unwrap();
        let ff = default_decaying(&p15, &g, 2.5).unwrap();
        let p1 = Params::new(1.0, 1e-3, 1.0, 10.0).unwrap();
        assert!(matches!(Model::new(p1, g, ff), Err(Error::UnsupportedScenario(_))));
    }
}
