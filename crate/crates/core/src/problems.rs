//! Benchmark initial and boundary conditions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::euler::{prim_to_cons, Primitive, RiemannSolver, GAMMA};
use crate::gp::LengthScale;
use crate::mesh::{Boundary, BoundarySet, Cons, GhostRule, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Vortex,
    ShuOsher,
    Sedov,
    Dmr,
    Implosion,
    JetSingle,
    JetDouble,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 7] = [
        ProblemKind::Vortex,
        ProblemKind::ShuOsher,
        ProblemKind::Sedov,
        ProblemKind::Dmr,
        ProblemKind::Implosion,
        ProblemKind::JetSingle,
        ProblemKind::JetDouble,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Vortex => "vortex",
            ProblemKind::ShuOsher => "shu_osher",
            ProblemKind::Sedov => "sedov",
            ProblemKind::Dmr => "dmr",
            ProblemKind::Implosion => "implosion",
            ProblemKind::JetSingle => "jet_single",
            ProblemKind::JetDouble => "jet_double",
        }
    }

    pub fn parse(s: &str) -> Result<ProblemKind> {
        ProblemKind::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }

    pub fn spec(&self) -> ProblemSpec {
        let (ndim, nx, ny, xr, yr, tmax) = match self {
            ProblemKind::Vortex => (2, 100, 100, (0.0, 20.0), (0.0, 20.0), 20.0),
            ProblemKind::ShuOsher => (1, 256, 1, (0.0, 9.0), (0.0, 1.0), 1.8),
            ProblemKind::Sedov => (2, 256, 256, (-0.5, 0.5), (-0.5, 0.5), 0.2),
            ProblemKind::Dmr => (2, 800, 200, (0.0, 4.0), (0.0, 1.0), 0.25),
            ProblemKind::Implosion => (2, 400, 400, (0.0, 0.3), (0.0, 0.3), 2.5),
            ProblemKind::JetSingle => (2, 600, 600, (0.0, 1.5), (0.0, 1.5), 0.04),
            ProblemKind::JetDouble => (2, 600, 600, (0.0, 1.5), (0.0, 1.5), 0.005),
        };
        let riemann = match self {
            ProblemKind::JetSingle | ProblemKind::JetDouble => RiemannSolver::Hll,
            _ => RiemannSolver::Hllc,
        };
        let length_scale = match self {
            ProblemKind::Vortex => LengthScale::Absolute(1.0),
            ProblemKind::ShuOsher => LengthScale::Relative(6.0),
            _ => LengthScale::Relative(12.0),
        };
        ProblemSpec {
            kind: *self,
            ndim,
            nx,
            ny,
            xrange: xr,
            yrange: yr,
            tmax,
            riemann,
            length_scale,
            cfl: 0.8,
            sedov: SedovParams::default(),
        }
    }
}

/// Sedov energy deposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SedovParams {
    pub e0: f64,
    /// Deposition radius in units of min(dx, dy).
    pub radius_cells: f64,
    pub p_floor: f64,
}

impl Default for SedovParams {
    fn default() -> Self {
        SedovParams {
            e0: 1.0,
            radius_cells: 3.5,
            p_floor: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub ndim: usize,
    pub nx: usize,
    pub ny: usize,
    pub xrange: (f64, f64),
    pub yrange: (f64, f64),
    pub tmax: f64,
    pub riemann: RiemannSolver,
    pub length_scale: LengthScale,
    pub cfl: f64,
    pub sedov: SedovParams,
}

impl ProblemSpec {
    pub fn mesh(&self, nx: usize, ny: usize, nghost: usize) -> Result<Mesh> {
        Mesh::new(self.ndim, nx, ny, self.xrange, self.yrange, nghost)
    }

    /// Initial field (interior cells) and boundary set.
    pub fn initialize(&self, mesh: &Mesh) -> (Vec<Cons>, BoundarySet) {
        match self.kind {
            ProblemKind::Vortex => (fill(mesh, vortex_state), BoundarySet::uniform(Boundary::Periodic)),
            ProblemKind::ShuOsher => shu_osher(mesh),
            ProblemKind::Sedov => sedov(mesh, &self.sedov),
            ProblemKind::Dmr => dmr(mesh),
            ProblemKind::Implosion => (
                fill(mesh, implosion_state),
                BoundarySet::uniform(Boundary::Reflecting),
            ),
            ProblemKind::JetSingle => jet(mesh, false),
            ProblemKind::JetDouble => jet(mesh, true),
        }
    }
}

const GL5_NODE: [f64; 3] = [
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHT: [f64; 3] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

fn add(a: Cons, b: Cons) -> Cons {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

fn scale(s: f64, a: Cons) -> Cons {
    [s * a[0], s * a[1], s * a[2], s * a[3]]
}

/// Cell average of a pointwise conservative state by 5-point Gauss-Legendre
/// quadrature per dimension. Node contributions are summed over orbits of the
/// cell's symmetry group so mirrored cells average bit-identically.
pub fn pointwise_to_volavg<F: Fn(f64, f64) -> Cons>(f: &F, mesh: &Mesh, i: isize, j: isize) -> Cons {
    let (xc, yc) = mesh.center(i, j);
    let hx = 0.5 * mesh.dx;
    let hy = 0.5 * mesh.dy;
    let x = |a: isize| xc + (a.signum() as f64 * GL5_NODE[a.unsigned_abs()]) * hx;
    let y = |b: isize| yc + (b.signum() as f64 * GL5_NODE[b.unsigned_abs()]) * hy;
    if mesh.ndim == 1 {
        let v = |a: isize| f(x(a), yc);
        let s = add(
            scale(GL5_WEIGHT[2], add(v(-2), v(2))),
            scale(GL5_WEIGHT[1], add(v(-1), v(1))),
        );
        return scale(0.5, add(s, scale(GL5_WEIGHT[0], v(0))));
    }
    let v = |a: isize, b: isize| scale(GL5_WEIGHT[a.unsigned_abs()] * GL5_WEIGHT[b.unsigned_abs()], f(x(a), y(b)));
    let four_axis = |a: isize| add(add(v(a, 0), v(-a, 0)), add(v(0, a), v(0, -a)));
    let four_diag = |a: isize| add(add(v(a, a), v(-a, -a)), add(v(-a, a), v(a, -a)));
    let eight = |a: isize, b: isize| {
        add(
            add(add(v(a, b), v(-a, -b)), add(v(-a, b), v(a, -b))),
            add(add(v(b, a), v(-b, -a)), add(v(-b, a), v(b, -a))),
        )
    };
    let s = add(
        add(add(four_axis(2), four_axis(1)), add(four_diag(2), four_diag(1))),
        add(eight(1, 2), v(0, 0)),
    );
    scale(0.25, s)
}

fn fill<F: Fn(f64, f64) -> Cons>(mesh: &Mesh, f: F) -> Vec<Cons> {
    let mut u = mesh.new_field();
    for (i, j) in mesh.interior() {
        u[mesh.idx(i, j)] = pointwise_to_volavg(&f, mesh, i as isize, j as isize);
    }
    u
}

fn cons(rho: f64, u: f64, v: f64, p: f64) -> Cons {
    prim_to_cons(&Primitive { rho, u, v, p }, GAMMA)
}

pub const VORTEX_BETA: f64 = 5.0;

pub fn vortex_primitive(x: f64, y: f64) -> Primitive {
    let (dx, dy) = (x - 10.0, y - 10.0);
    let r2 = dx * dx + dy * dy;
    let g = GAMMA;
    let rho = (1.0 - (g - 1.0) * VORTEX_BETA * VORTEX_BETA / (8.0 * g * PI * PI) * (1.0 - r2).exp())
        .powf(1.0 / (g - 1.0));
    let a = VORTEX_BETA / (2.0 * PI) * (0.5 * (1.0 - r2)).exp();
    Primitive {
        rho,
        u: 1.0 - a * dy,
        v: 1.0 + a * dx,
        p: rho.powf(g),
    }
}

fn vortex_state(x: f64, y: f64) -> Cons {
    prim_to_cons(&vortex_primitive(x, y), GAMMA)
}

pub fn shu_osher_primitive(x: f64) -> Primitive {
    if x < 0.5 {
        Primitive {
            rho: 3.857143,
            u: 2.629369,
            v: 0.0,
            p: 10.33333,
        }
    } else {
        Primitive {
            rho: 1.0 + 0.2 * (5.0 * (x - 4.5)).sin(),
            u: 0.0,
            v: 0.0,
            p: 1.0,
        }
    }
}

fn shu_osher(mesh: &Mesh) -> (Vec<Cons>, BoundarySet) {
    let f = |x: f64, _y: f64| prim_to_cons(&shu_osher_primitive(x), GAMMA);
    let u = fill(mesh, f);
    let m = mesh.clone();
    let fixed: Arc<dyn Fn(f64, f64, f64) -> GhostRule + Send + Sync> = Arc::new(move |x, _y, _t| {
        let i = ((x - m.xmin) / m.dx).floor() as isize;
        GhostRule::State(pointwise_to_volavg(&f, &m, i, 0))
    });
    let b = Boundary::Custom(fixed);
    (u, BoundarySet::uniform(b))
}

/// Pressure inside the Sedov deposition region.
pub fn sedov_pressure(params: &SedovParams, r_init: f64) -> f64 {
    let nu = 2.0;
    3.0 * (GAMMA - 1.0) * params.e0 / ((nu + 1.0) * PI * r_init.powf(nu))
}

fn sedov(mesh: &Mesh, params: &SedovParams) -> (Vec<Cons>, BoundarySet) {
    let r_init = params.radius_cells * mesh.dx.min(mesh.dy);
    let p_in = sedov_pressure(params, r_init);
    let mut u = mesh.new_field();
    for (i, j) in mesh.interior() {
        let (x, y) = mesh.center_offset(i as isize, j as isize);
        let r = (x * x + y * y).sqrt();
        let p = if r < r_init { p_in } else { params.p_floor };
        u[mesh.idx(i, j)] = cons(1.0, 0.0, 0.0, p);
    }
    (u, BoundarySet::uniform(Boundary::Outflow))
}

/// Post-shock primitive state behind a normal shock of Mach `m` moving into
/// gas at rest with (ρ, p), from the Rankine-Hugoniot relations. Returns the
/// state and the shock speed; the velocity is the normal component.
pub fn normal_shock(m: f64, rho: f64, p: f64) -> (Primitive, f64) {
    let g = GAMMA;
    let c = (g * p / rho).sqrt();
    let s = m * c;
    let m2 = m * m;
    let rho2 = rho * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
    let p2 = p * (2.0 * g * m2 - (g - 1.0)) / (g + 1.0);
    let w = s * (1.0 - rho / rho2);
    (
        Primitive {
            rho: rho2,
            u: w,
            v: 0.0,
            p: p2,
        },
        s,
    )
}

pub const DMR_X0: f64 = 1.0 / 6.0;

/// Pre- and post-shock states of the double Mach reflection, and shock speed.
pub fn dmr_states() -> (Primitive, Primitive, f64) {
    let pre = Primitive {
        rho: 1.4,
        u: 0.0,
        v: 0.0,
        p: 1.0,
    };
    let (n, s) = normal_shock(10.0, pre.rho, pre.p);
    let (sin30, cos30) = (0.5, 0.75f64.sqrt());
    let post = Primitive {
        rho: n.rho,
        u: n.u * cos30,
        v: -n.u * sin30,
        p: n.p,
    };
    (pre, post, s)
}

/// x position of the incident shock at height y and time t.
pub fn dmr_shock_x(y: f64, t: f64, speed: f64) -> f64 {
    let sqrt3 = 3f64.sqrt();
    DMR_X0 + (y + 2.0 * speed * t) / sqrt3
}

fn dmr(mesh: &Mesh) -> (Vec<Cons>, BoundarySet) {
    let (pre, post, s) = dmr_states();
    let upre = prim_to_cons(&pre, GAMMA);
    let upost = prim_to_cons(&post, GAMMA);
    let f = move |x: f64, y: f64| if x < dmr_shock_x(y, 0.0, s) { upost } else { upre };
    let u = fill(mesh, f);
    let ytop = mesh.ymax;
    let bottom: Arc<dyn Fn(f64, f64, f64) -> GhostRule + Send + Sync> = Arc::new(move |x, _y, _t| {
        if x < DMR_X0 {
            GhostRule::State(upost)
        } else {
            GhostRule::Reflect
        }
    });
    let top: Arc<dyn Fn(f64, f64, f64) -> GhostRule + Send + Sync> = Arc::new(move |x, _y, t| {
        if x < dmr_shock_x(ytop, t, s) {
            GhostRule::State(upost)
        } else {
            GhostRule::State(upre)
        }
    });
    let left: Arc<dyn Fn(f64, f64, f64) -> GhostRule + Send + Sync> = Arc::new(move |_x, _y, _t| GhostRule::State(upost));
    let bc = BoundarySet {
        xlo: Boundary::Custom(left),
        xhi: Boundary::Outflow,
        ylo: Boundary::Custom(bottom),
        yhi: Boundary::Custom(top),
    };
    (u, bc)
}

fn implosion_state(x: f64, y: f64) -> Cons {
    if x + y < 0.15 {
        cons(0.125, 0.0, 0.0, 0.14)
    } else {
        cons(1.0, 0.0, 0.0, 1.0)
    }
}

pub const JET_SLIT: (f64, f64) = (0.7, 0.8);

pub fn stratified_density(y: f64) -> f64 {
    -9.24 * y + 14.0
}

fn jet(mesh: &Mesh, double: bool) -> (Vec<Cons>, BoundarySet) {
    let speed = if double { 800.0 } else { 100.0 };
    let u = if double {
        fill(mesh, |_x, y| cons(stratified_density(y), 0.0, 0.0, 1.0))
    } else {
        fill(mesh, |_x, _y| cons(10.0 * GAMMA, 0.0, 0.0, 1.0))
    };
    let mid = 0.5 * (JET_SLIT.0 + JET_SLIT.1);
    let half = 0.5 * (JET_SLIT.1 - JET_SLIT.0);
    let inflow = move |v: f64| -> Arc<dyn Fn(f64, f64, f64) -> GhostRule + Send + Sync> {
        let uj = cons(GAMMA, 0.0, v, 1.0);
        Arc::new(move |x, _y, _t| {
            if (x - mid).abs() <= half {
                GhostRule::State(uj)
            } else {
                GhostRule::Outflow
            }
        })
    };
    let bc = BoundarySet {
        xlo: Boundary::Outflow,
        xhi: Boundary::Outflow,
        ylo: Boundary::Custom(inflow(speed)),
        yhi: if double {
            Boundary::Custom(inflow(-speed))
        } else {
            Boundary::Outflow
        },
    };
    (u, bc)
}
