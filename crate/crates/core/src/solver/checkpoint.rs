//! Binary checkpoints: a versioned header followed by little-endian `f64`
//! arrays in y-major, x-frequency order.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Bc, Field, GridSpec, XProfile};
use crate::lp::{ClAccumulator, TimeExponent};
use crate::scenario::{FarField, Params};

use super::{AuditRecord, Model, NormSeries, Sample, SimConfig, Simulation, State, WeightBranch};

pub const MAGIC: &[u8; 8] = b"MHDBLCKP";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn complexes(&mut self, zs: &[Complex64]) {
        self.u64(zs.len() as u64);
        for z in zs {
            self.f64(z.re);
            self.f64(z.im);
        }
    }
    fn opt_f64(&mut self, v: Option<f64>) {
        match v {
            Some(x) => {
                self.u8(1);
                self.f64(x);
            }
            None => self.u8(0),
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated file at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self, limit: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        if n > limit {
            return Err(Error::Checkpoint(format!("length {n} exceeds the remaining file")));
        }
        Ok(n)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn complexes(&mut self) -> Result<Vec<Complex64>> {
        let n = self.len(self.buf.len() / 16)?;
        (0..n).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect()
    }
    fn opt_f64(&mut self) -> Result<Option<f64>> {
        match self.u8()? {
            0 => Ok(None),
            1 => Ok(Some(self.f64()?)),
            t => Err(Error::Checkpoint(format!("bad option tag {t}"))),
        }
    }
}

fn bc_tag(bc: Bc) -> u8 {
    match bc {
        Bc::Dirichlet => 0,
        Bc::Neumann => 1,
        Bc::Untagged => 2,
    }
}

fn bc_from(tag: u8) -> Result<Bc> {
    match tag {
        0 => Ok(Bc::Dirichlet),
        1 => Ok(Bc::Neumann),
        2 => Ok(Bc::Untagged),
        t => Err(Error::Checkpoint(format!("bad boundary tag {t}"))),
    }
}

/// Serializes the full simulation, plus the originating config text.
pub fn encode(sim: &Simulation, config_text: &str) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.u64(config_text.len() as u64);
    w.0.extend_from_slice(config_text.as_bytes());

    let p = &sim.model.params;
    for v in [p.kappa, p.epsilon, p.delta, p.lambda, p.nu_u, p.nu_b] {
        w.f64(v);
    }
    let g = &sim.model.grid;
    w.f64(g.lx);
    w.u64(g.nx as u64);
    w.f64(g.ymax);
    w.u64(g.ny as u64);
    w.f64(g.dealias_fraction);

    let st = &sim.state;
    w.f64(st.t);
    w.f64(st.theta);
    w.f64(st.gh_integral);
    w.u64(st.step);
    w.opt_f64(st.dt_prev);
    w.f64(sim.next_sample());

    let c = &sim.config;
    w.f64(c.dt_max);
    w.f64(c.cfl);
    w.f64(c.sample_interval);
    w.u8(match c.weight {
        WeightBranch::Psi => 0,
        WeightBranch::PsiKappa => 1,
    });
    w.u64(c.audit_every);

    match &sim.model.farfield {
        FarField::Trivial => w.u8(0),
        FarField::Decaying { epsilon, alpha, g } => {
            w.u8(1);
            w.f64(*epsilon);
            w.f64(*alpha);
            w.complexes(g.coeffs());
        }
    }

    for f in [&st.u, &st.b] {
        w.u8(bc_tag(f.bc()));
        w.complexes(f.coeffs());
    }
    match &st.n_prev {
        Some((nu, nb)) => {
            w.u8(1);
            for f in [nu, nb] {
                w.u8(bc_tag(f.bc()));
                w.complexes(f.coeffs());
            }
        }
        None => w.u8(0),
    }

    let acc = &st.cl_dyub;
    w.f64(acc.s);
    w.u8(match acc.p {
        TimeExponent::One => 0,
        TimeExponent::Two => 1,
        TimeExponent::Inf => 2,
    });
    w.u64(acc.shells.len() as u64);
    for (&k, &v) in acc.shells.iter().zip(&acc.sums) {
        w.f64(k as f64);
        w.f64(v);
    }
    w.complexes(&st.flux0);
    w.f64(st.max_flux_drift);

    w.u64(sim.series.samples.len() as u64);
    for s in &sim.series.samples {
        for v in [s.t, s.theta, s.radius, s.norm_ub, s.norm_gh, s.norm_dy_gh, s.norm_phipsi, s.cl_dyub_sq, s.gh_integral] {
            w.f64(v);
        }
    }
    w.u64(sim.audit.len() as u64);
    for a in &sim.audit {
        w.f64(a.t);
        w.u8(a.field as u8);
        for v in [a.alpha, a.beta, a.lhs, a.rhs, a.relative_slack] {
            w.f64(v);
        }
    }
    w.0
}

/// Inverse of [`encode`]: returns the simulation and the stored config text.
pub fn decode(bytes: &[u8]) -> Result<(Simulation, String)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version} is not supported (expected {FORMAT_VERSION})"
        )));
    }
    let n = r.len(bytes.len())?;
    let config_text = String::from_utf8(r.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("config text is not UTF-8".into()))?;

    let mut pv = [0.0; 6];
    for v in &mut pv {
        *v = r.f64()?;
    }
    let params = Params::new(pv[0], pv[1], pv[2], pv[3])?.with_diffusivities(pv[4], pv[5])?;
    let lx = r.f64()?;
    let nx = r.u64()? as usize;
    let ymax = r.f64()?;
    let ny = r.u64()? as usize;
    let grid = GridSpec::new(lx, nx, ymax, ny)?.with_dealias(r.f64()?)?;

    let t = r.f64()?;
    let theta = r.f64()?;
    let gh_integral = r.f64()?;
    let step = r.u64()?;
    let dt_prev = r.opt_f64()?;
    let next_sample = r.f64()?;

    let dt_max = r.f64()?;
    let cfl = r.f64()?;
    let sample_interval = r.f64()?;
    let weight = match r.u8()? {
        0 => WeightBranch::Psi,
        1 => WeightBranch::PsiKappa,
        t => return Err(Error::Checkpoint(format!("bad weight tag {t}"))),
    };
    let audit_every = r.u64()?;
    let config = SimConfig {
        dt_max,
        cfl,
        sample_interval,
        weight,
        audit_every,
    };

    let farfield = match r.u8()? {
        0 => FarField::Trivial,
        1 => {
            let epsilon = r.f64()?;
            let alpha = r.f64()?;
            let g = XProfile::from_coeffs(grid, r.complexes()?)?;
            FarField::Decaying { epsilon, alpha, g }
        }
        t => return Err(Error::Checkpoint(format!("bad far-field tag {t}"))),
    };

    let field = |r: &mut Reader<'_>| -> Result<Field> {
        let bc = bc_from(r.u8()?)?;
        Field::from_coeffs(grid, bc, r.complexes()?)
    };
    let u = field(&mut r)?;
    let b = field(&mut r)?;
    let n_prev = match r.u8()? {
        0 => None,
        1 => Some((field(&mut r)?, field(&mut r)?)),
        t => return Err(Error::Checkpoint(format!("bad history tag {t}"))),
    };

    let s = r.f64()?;
    let p = match r.u8()? {
        0 => TimeExponent::One,
        1 => TimeExponent::Two,
        2 => TimeExponent::Inf,
        t => return Err(Error::Checkpoint(format!("bad exponent tag {t}"))),
    };
    let nshell = r.len(bytes.len() / 16)?;
    let mut shells = Vec::with_capacity(nshell);
    let mut sums = Vec::with_capacity(nshell);
    for _ in 0..nshell {
        shells.push(r.f64()? as i32);
        sums.push(r.f64()?);
    }
    let cl_dyub = ClAccumulator { s, p, shells, sums };
    let flux0 = r.complexes()?;
    let max_flux_drift = r.f64()?;

    let count = r.len(bytes.len() / 72)?;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = [0.0; 9];
        for x in &mut v {
            *x = r.f64()?;
        }
        samples.push(Sample {
            t: v[0],
            theta: v[1],
            radius: v[2],
            norm_ub: v[3],
            norm_gh: v[4],
            norm_dy_gh: v[5],
            norm_phipsi: v[6],
            cl_dyub_sq: v[7],
            gh_integral: v[8],
        });
    }
    let count = r.len(bytes.len() / 49)?;
    let mut audit = Vec::with_capacity(count);
    for _ in 0..count {
        let t = r.f64()?;
        let field = r.u8()? as char;
        let mut v = [0.0; 5];
        for x in &mut v {
            *x = r.f64()?;
        }
        audit.push(AuditRecord {
            t,
            field,
            alpha: v[0],
            beta: v[1],
            lhs: v[2],
            rhs: v[3],
            relative_slack: v[4],
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }

    let model = Model::new(params, grid, farfield)?;
    let state = State {
        t,
        u,
        b,
        theta,
        step,
        dt_prev,
        n_prev,
        gh_integral,
        cl_dyub,
        flux0,
        max_flux_drift,
    };
    let sim = Simulation::from_parts(model, config, state, NormSeries { samples }, audit, next_sample);
    Ok((sim, config_text))
}

pub fn save(sim: &Simulation, config_text: &str, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&encode(sim, config_text))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(Simulation, String)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
