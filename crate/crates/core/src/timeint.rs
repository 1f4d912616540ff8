//! SSP Runge-Kutta integrators built from MOOD-validated forward-Euler stages.

use crate::error::{Error, Result};
use crate::euler::max_wavespeed;
use crate::mesh::{Cons, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Rk3,
    Rk4,
}

impl Integrator {
    pub fn name(&self) -> &'static str {
        match self {
            Integrator::Rk3 => "rk3",
            Integrator::Rk4 => "rk4",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtReduction {
    None,
    /// dt ≤ Δ^α with Δ = min(dx, dy).
    Power(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeConfig {
    pub integrator: Integrator,
    pub cfl: f64,
    pub dt_reduction: DtReduction,
    pub tmax: f64,
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!("cfl must be positive, got {}", self.cfl)));
        }
        if !(self.tmax > 0.0) {
            return Err(Error::Config(format!("tmax must be positive, got {}", self.tmax)));
        }
        if let DtReduction::Power(a) = self.dt_reduction {
            if !(a > 1.0) {
                return Err(Error::Config(format!("dt power must exceed 1, got {a}")));
            }
        }
        Ok(())
    }
}

/// Time step at time `t` from the current field.
pub fn compute_dt(field: &[Cons], mesh: &Mesh, gamma: f64, cfg: &TimeConfig, t: f64) -> Result<f64> {
    let s = max_wavespeed(field, mesh, gamma)?;
    let mut dt = mesh.dx / s[0];
    if mesh.ndim == 2 {
        dt = dt.min(mesh.dy / s[1]);
    }
    dt *= cfg.cfl;
    if let DtReduction::Power(a) = cfg.dt_reduction {
        let d = if mesh.ndim == 2 { mesh.dx.min(mesh.dy) } else { mesh.dx };
        dt = dt.min(d.powf(a));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Config(format!("non-finite time step {dt}")));
    }
    if t + dt > cfg.tmax {
        dt = cfg.tmax - t;
    }
    Ok(dt)
}

/// One MOOD-validated stage: given the stage state (ghosts filled at `time`
/// by the callee), the base and coef·dt, returns (base − coef·dt·𝔽∇, 𝔽∇).
pub trait StageFn {
    fn stage(&mut self, state: &mut Vec<Cons>, base: &[Cons], coef_dt: f64, time: f64) -> Result<(Vec<Cons>, Vec<Cons>)>;
}

impl<F> StageFn for F
where
    F: FnMut(&mut Vec<Cons>, &[Cons], f64, f64) -> Result<(Vec<Cons>, Vec<Cons>)>,
{
    fn stage(&mut self, state: &mut Vec<Cons>, base: &[Cons], coef_dt: f64, time: f64) -> Result<(Vec<Cons>, Vec<Cons>)> {
        self(state, base, coef_dt, time)
    }
}

/// (1 − b)·x + b·y written as x + b·(y − x), so equal inputs come back unchanged.
fn comb2(x: &[Cons], b: f64, y: &[Cons]) -> Vec<Cons> {
    x.iter()
        .zip(y)
        .map(|(u, v)| {
            [
                u[0] + b * (v[0] - u[0]),
                u[1] + b * (v[1] - u[1]),
                u[2] + b * (v[2] - u[2]),
                u[3] + b * (v[3] - u[3]),
            ]
        })
        .collect()
}

/// Third-order, three-stage SSP-RK.
pub fn ssp_rk3_advance<S: StageFn>(field: &[Cons], t: f64, dt: f64, stage: &mut S) -> Result<Vec<Cons>> {
    let mut u0 = field.to_vec();
    let (u1, _) = stage.stage(&mut u0, field, dt, t)?;
    let (u2, _) = stage.stage(&mut u1.clone(), &u1, dt, t + dt)?;
    let uh = comb2(&u0, 0.25, &u2);
    let (u3, _) = stage.stage(&mut uh.clone(), &uh, dt, t + 0.5 * dt)?;
    Ok(comb2(&u0, 2.0 / 3.0, &u3))
}

/// Five-stage, fourth-order SSP-RK coefficients.
pub mod rk4 {
    pub const C1: f64 = 0.391752226571890;
    pub const A2: (f64, f64) = (0.444370493651235, 0.555629506348765);
    pub const C2: f64 = 0.368410593050371;
    pub const A3: (f64, f64) = (0.620101851488403, 0.379898148511597);
    pub const C3: f64 = 0.251891774271694;
    pub const A4: (f64, f64) = (0.178079954393132, 0.821920045606868);
    pub const C4: f64 = 0.544974750228521;
    /// Final combination weights of U2, U3, U4; the U2 weight enters as
    /// 1 − B.1 − B.2.
    pub const B: (f64, f64, f64) = (0.517231671970585, 0.096059710526147, 0.386708617503269);
    /// dt·𝔽∇ weights of U3 and U4 in the final combination.
    pub const D3: f64 = 0.063692468666290;
    pub const D4: f64 = 0.226007483236906;
}

/// Fourth-order, five-stage SSP-RK; every sub-step is MOOD-validated.
pub fn ssp_rk4_advance<S: StageFn>(field: &[Cons], t: f64, dt: f64, stage: &mut S) -> Result<Vec<Cons>> {
    use rk4::*;
    let u0 = field.to_vec();
    let mut s = u0.clone();
    let (u1, _) = stage.stage(&mut s, &u0, C1 * dt, t)?;
    let t1 = t + C1 * dt;

    let base = comb2(&u0, A2.1, &u1);
    let (u2, _) = stage.stage(&mut u1.clone(), &base, C2 * dt, t1)?;
    let t2 = A2.0 * t + A2.1 * t1 + C2 * dt;

    let base = comb2(&u0, A3.1, &u2);
    let (u3, _) = stage.stage(&mut u2.clone(), &base, C3 * dt, t2)?;
    let t3 = A3.0 * t + A3.1 * t2 + C3 * dt;

    let base = comb2(&u0, A4.1, &u3);
    let (u4, f3) = stage.stage(&mut u3.clone(), &base, C4 * dt, t3)?;
    let t4 = A4.0 * t + A4.1 * t3 + C4 * dt;

    let base: Vec<Cons> = (0..u0.len())
        .map(|k| {
            let mut out = [0.0; 4];
            for c in 0..4 {
                let (a, b, d) = (u2[k][c], u3[k][c], u4[k][c]);
                out[c] = a + B.1 * (b - a) + B.2 * (d - a) - D3 * dt * f3[k][c];
            }
            out
        })
        .collect();
    let (un, _) = stage.stage(&mut u4.clone(), &base, D4 * dt, t4)?;
    Ok(un)
}

pub fn advance<S: StageFn>(integrator: Integrator, field: &[Cons], t: f64, dt: f64, stage: &mut S) -> Result<Vec<Cons>> {
    match integrator {
        Integrator::Rk3 => ssp_rk3_advance(field, t, dt, stage),
        Integrator::Rk4 => ssp_rk4_advance(field, t, dt, stage),
    }
}
