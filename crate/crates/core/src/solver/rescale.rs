//! The `y/√κ` rescaling between conjugate diffusivity pairs, and the
//! consistency residual of the potential equations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{d2dy, ddx, ddy, integrate_y_tail, Bc, Field, GridSpec, PhysicalField};
use crate::lp::{combined_energies, DyadicPartition, Weighted};
use crate::scenario::source_terms;

use super::ops::{reconstruct_phipsi, Model};

/// Resamples `field` from `(x, y)` to `(x, ȳ)` with `ȳ = y/√κ`, i.e.
/// `f̄(ȳ) = f(√κ ȳ)`, onto `target` by 4-point cubic interpolation. Points
/// beyond the source domain read as zero.
pub fn kappa_rescale_map(field: &Field, kappa: f64, target: &GridSpec) -> Result<Field> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParams(format!("kappa must be positive, got {kappa}")));
    }
    let src = *field.grid();
    if src.nx != target.nx || src.lx != target.lx {
        return Err(Error::InvalidGrid("rescaling keeps the x grid; nx and lx must match".into()));
    }
    let s = kappa.sqrt();
    if target.dy() * s > 2.0 * src.dy() * (1.0 + 1e-12) {
        return Err(Error::InsufficientResolution(format!(
            "target spacing {:.3e} maps to {:.3e}, coarser than twice the source spacing {:.3e}",
            target.dy(),
            target.dy() * s,
            src.dy()
        )));
    }
    let nx = src.nx;
    let h = src.dy();
    let last = src.ny - 1;
    let mut out = Field::zeros(*target, field.bc());
    for j in 0..target.ny {
        let y = target.y(j) * s;
        let pos = y / h;
        let mut row = vec![Complex64::new(0.0, 0.0); nx];
        let near = pos.round();
        if near <= last as f64 && (pos - near).abs() < 1e-9 {
            // node hit up to roundoff
            row.copy_from_slice(field.row(near as usize));
        } else if pos <= last as f64 {
            let base = (pos.floor() as usize).saturating_sub(1).min(last.saturating_sub(3));
            let weights = lagrange4(pos - base as f64);
            for (q, w) in weights.iter().enumerate() {
                for (d, &c) in row.iter_mut().zip(field.row(base + q)) {
                    *d += c * *w;
                }
            }
        }
        out.coeffs_mut()[j * nx..(j + 1) * nx].copy_from_slice(&row);
    }
    Ok(out)
}

/// Cubic Lagrange weights for nodes at 0, 1, 2, 3 evaluated at `x`.
fn lagrange4(x: f64) -> [f64; 4] {
    let (a, b, c, d) = (x, x - 1.0, x - 2.0, x - 3.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

/// Residual norms of the two potential equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eqs2Residual {
    pub phi: f64,
    pub psi: f64,
}

/// Residuals of the `(φ, ψ)` equations with `φ, ψ` rebuilt from `(u, b)` at two
/// consecutive times. The time derivative is a backward difference, all other
/// terms are taken at the later time; norms are the unweighted `B^{1/2,0}`
/// over interior rows.
pub fn eqs2_residual(model: &Model, prev: (&Field, &Field, f64), cur: (&Field, &Field, f64)) -> Result<Eqs2Residual> {
    let grid = model.grid;
    let (u0, b0, t0) = prev;
    let (u, b, t) = cur;
    let dt = t - t0;
    if !(dt > 0.0) {
        return Err(Error::InvalidParams("eqs2 residual needs increasing times".into()));
    }
    let p = &model.params;
    let bbar = p.bbar();
    let (phi0, psi0) = reconstruct_phipsi(u0, b0);
    let (phi, psi) = reconstruct_phipsi(u, b);
    let phit = phi.sub(&phi0).scale(1.0 / dt);
    let psit = psi.sub(&psi0).scale(1.0 / dt);
    let (phiyy, psiyy) = (d2dy(&phi)?, d2dy(&psi)?);
    let (phix, psix) = (ddx(&phi), ddx(&psi));

    let phys = |f: &Field| f.to_physical().values().to_vec();
    let (pu, pb, puy, pby) = (phys(u), phys(b), phys(&ddy(u)), phys(&ddy(b)));
    let (pphi, ppsi, pphix, ppsix) = (phys(&phi), phys(&psi), phys(&phix), phys(&psix));

    let nx = grid.nx;
    let tr = model.farfield.traces(&grid, t);
    let cut = model.cutoff.as_ref();
    let chi = |i: usize| cut.map_or([0.0; 3], |c| [c.chi[i], c.chi1[i], c.chi2[i]]);

    // integrands of the three tail integrals in the φ equation
    let mut a1 = PhysicalField::zeros(grid);
    let mut a2 = PhysicalField::zeros(grid);
    let mut a3 = PhysicalField::zeros(grid);
    let mut local_phi = PhysicalField::zeros(grid);
    let mut local_psi = PhysicalField::zeros(grid);
    for i in 0..grid.ny {
        let [c0, c1, c2] = chi(i);
        for m in 0..nx {
            let k = i * nx + m;
            let (uu, bb, ux, bx) = (tr.u[m], tr.b[m], tr.ux[m], tr.bx[m]);
            a1.values_mut()[k] = pphix[k] * puy[k] - ppsix[k] * pby[k];
            a2.values_mut()[k] = c2 * (uu * pphix[k] - bb * ppsix[k]);
            a3.values_mut()[k] = c2 * (ux * pphi[k] - bx * ppsi[k]);
            local_phi.values_mut()[k] = pu[k] * pphix[k] - pb[k] * ppsix[k]
                + c1 * (uu * pphix[k] - bb * ppsix[k])
                + c0 * (-ux * pu[k] + bx * pb[k])
                + 2.0 * c1 * (ux * pphi[k] - bx * ppsi[k]);
            local_psi.values_mut()[k] = pu[k] * ppsix[k] - pb[k] * pphix[k]
                + c1 * (uu * ppsix[k] - bb * pphix[k])
                + c0 * (-ux * pb[k] + bx * pu[k]);
        }
    }
    let spec = |f: PhysicalField| f.forward(Bc::Untagged).dealiased();
    let tails = integrate_y_tail(&spec(a1).add(&spec(a2)).add(&spec(a3))).scale(2.0);
    let src = source_terms(&model.farfield, cut, p, &grid, t)?;

    let res_phi = phit
        .axpy(-p.nu_u, &phiyy)
        .axpy(-bbar, &psix)
        .add(&spec(local_phi))
        .add(&tails)
        .sub(&src.big_m_u);
    let res_psi = psit
        .axpy(-p.nu_b, &psiyy)
        .axpy(-bbar, &phix)
        .add(&spec(local_psi))
        .sub(&src.big_m_b);

    let partition = DyadicPartition::build(&grid);
    let norm = |f: Field| -> Result<f64> {
        let interior = f.map_coeffs(|i, _, z| if i == 0 || i + 1 == grid.ny { Complex64::new(0.0, 0.0) } else { z });
        let e = combined_energies(&[Weighted::new(&interior, 0.0)], t, 0.0)?;
        Ok(partition.besov_sum(&partition.shell_norms(&e), 0.5))
    };
    Ok(Eqs2Residual {
        phi: norm(res_phi)?,
        psi: norm(res_psi)?,
    })
}
