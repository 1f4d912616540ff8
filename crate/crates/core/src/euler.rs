//! Ideal-gas Euler physics: conversions, fluxes, approximate Riemann solvers.
//!
//! The Riemann solvers work in a face-normal frame (ρ, ρu_n, ρu_t, ρE). Their
//! arithmetic is arranged so that swapping and mirroring the two input states
//! mirrors the flux bit-exactly.

use crate::error::{Error, Result};
use crate::mesh::{Cons, Mesh};

pub const GAMMA: f64 = 1.4;

/// Primitive state (ρ, u, v, p).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

#[inline]
pub fn pressure(u: &Cons, gamma: f64) -> f64 {
    (gamma - 1.0) * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0])
}

#[inline]
pub fn cons_to_prim(u: &Cons, gamma: f64) -> Primitive {
    Primitive {
        rho: u[0],
        u: u[1] / u[0],
        v: u[2] / u[0],
        p: pressure(u, gamma),
    }
}

#[inline]
pub fn prim_to_cons(w: &Primitive, gamma: f64) -> Cons {
    [
        w.rho,
        w.rho * w.u,
        w.rho * w.v,
        w.p / (gamma - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v),
    ]
}

pub fn sound_speed(rho: f64, p: f64, gamma: f64) -> f64 {
    (gamma * p / rho).sqrt()
}

/// Physical flux along the first momentum component.
#[inline]
pub fn normal_flux(u: &Cons, p: f64) -> Cons {
    let vn = u[1] / u[0];
    [u[1], u[1] * vn + p, u[2] * vn, (u[3] + p) * vn]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiemannSolver {
    Hll,
    Hllc,
}

impl RiemannSolver {
    /// Flux across a face with normal along `axis` (0 = x, 1 = y), states in
    /// the global frame.
    #[inline]
    pub fn flux(&self, ul: &Cons, ur: &Cons, axis: usize, gamma: f64) -> Cons {
        let rot = |u: &Cons| if axis == 0 { *u } else { [u[0], u[2], u[1], u[3]] };
        let (l, r) = (rot(ul), rot(ur));
        let f = match self {
            RiemannSolver::Hll => hll_normal(&l, &r, gamma),
            RiemannSolver::Hllc => hllc_normal(&l, &r, gamma),
        };
        rot(&f)
    }
}

struct Side {
    f: Cons,
    v: f64,
    p: f64,
    c: f64,
}

#[inline]
fn side(u: &Cons, gamma: f64) -> Side {
    let p = pressure(u, gamma);
    Side {
        f: normal_flux(u, p),
        v: u[1] / u[0],
        p,
        c: (gamma * p / u[0]).sqrt(),
    }
}

/// Davis wave-speed bounds.
#[inline]
fn davis(l: &Side, r: &Side) -> (f64, f64) {
    ((l.v - l.c).min(r.v - r.c), (l.v + l.c).max(r.v + r.c))
}

pub fn hll_normal(ul: &Cons, ur: &Cons, gamma: f64) -> Cons {
    let l = side(ul, gamma);
    let r = side(ur, gamma);
    let (sl, sr) = davis(&l, &r);
    if sl >= 0.0 {
        return l.f;
    }
    if sr <= 0.0 {
        return r.f;
    }
    let ss = sl * sr;
    let den = sr - sl;
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = (sr * l.f[k] - sl * r.f[k] + ss * (ur[k] - ul[k])) / den;
    }
    out
}

pub fn hllc_normal(ul: &Cons, ur: &Cons, gamma: f64) -> Cons {
    let l = side(ul, gamma);
    let r = side(ur, gamma);
    let (sl, sr) = davis(&l, &r);
    if sl >= 0.0 {
        return l.f;
    }
    if sr <= 0.0 {
        return r.f;
    }
    let ml = ul[0] * (sl - l.v);
    let mr = ur[0] * (sr - r.v);
    let sm = ((r.p - l.p) + (ml * l.v - mr * r.v)) / (ml - mr);
    let star = |u: &Cons, s: &Side, sk: f64, m: f64| -> Cons {
        let fac = m / (sk - sm);
        let e = u[3] / u[0] + (sm - s.v) * (sm + s.p / m);
        let us = [fac, fac * sm, fac * (u[2] / u[0]), fac * e];
        let mut f = [0.0; 4];
        for k in 0..4 {
            f[k] = s.f[k] + sk * (us[k] - u[k]);
        }
        f
    };
    if sm > 0.0 {
        star(ul, &l, sl, ml)
    } else if sm < 0.0 {
        star(ur, &r, sr, mr)
    } else {
        let a = star(ul, &l, sl, ml);
        let b = star(ur, &r, sr, mr);
        [
            0.5 * (a[0] + b[0]),
            0.5 * (a[1] + b[1]),
            0.5 * (a[2] + b[2]),
            0.5 * (a[3] + b[3]),
        ]
    }
}

/// Quadrature-weighted face average, summing mirror-image points in pairs.
#[inline]
pub fn face_average(f: &[Cons], w: &[f64]) -> Cons {
    let q = f.len();
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = match q {
            1 => f[0][k],
            2 => w[0] * f[0][k] + w[1] * f[1][k],
            3 => (w[0] * f[0][k] + w[2] * f[2][k]) + w[1] * f[1][k],
            4 => (w[0] * f[0][k] + w[3] * f[3][k]) + (w[1] * f[1][k] + w[2] * f[2][k]),
            _ => panic!("unsupported quadrature size {q}"),
        };
    }
    out
}

/// 𝔽∇ from face-averaged fluxes; the y-terms are skipped when `g` is None.
#[inline]
pub fn flux_divergence(fe: &Cons, fw: &Cons, g: Option<(&Cons, &Cons)>, dx: f64, dy: f64) -> Cons {
    let mut out = [0.0; 4];
    for k in 0..4 {
        let x = (fe[k] - fw[k]) / dx;
        out[k] = match g {
            Some((gn, gs)) => x + (gn[k] - gs[k]) / dy,
            None => x,
        };
    }
    out
}

/// Largest |u_d| + c per direction over interior cells and admissible ghost cells.
pub fn max_wavespeed(field: &[Cons], mesh: &Mesh, gamma: f64) -> Result<[f64; 2]> {
    let mut s = [0.0f64; 2];
    for (i, j) in mesh.interior() {
        let w = cons_to_prim(&field[mesh.idx(i, j)], gamma);
        if !(w.rho > 0.0 && w.p > 0.0) || !w.u.is_finite() || !w.v.is_finite() {
            return Err(Error::State {
                i,
                j,
                rho: w.rho,
                p: w.p,
            });
        }
        let c = sound_speed(w.rho, w.p, gamma);
        s[0] = s[0].max(w.u.abs() + c);
        s[1] = s[1].max(w.v.abs() + c);
    }
    // Filled ghost cells count too, so inflow states enter the CFL limit.
    for u in field {
        let w = cons_to_prim(u, gamma);
        if w.rho > 0.0 && w.p > 0.0 && w.u.is_finite() && w.v.is_finite() {
            let c = sound_speed(w.rho, w.p, gamma);
            s[0] = s[0].max(w.u.abs() + c);
            s[1] = s[1].max(w.v.abs() + c);
        }
    }
    Ok(s)
}
