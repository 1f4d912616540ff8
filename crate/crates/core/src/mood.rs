//! A posteriori MOOD stage update: candidate solution, detection chain,
//! order decrement under the EDP1 face policy, local recomputation.

use crate::error::{Error, Result};
use crate::euler::{cons_to_prim, face_average, flux_divergence, pressure, RiemannSolver};
use crate::gp::{KernelConfig, PredictionVectorSet, Stencil, StencilShape};
use crate::mesh::{fill_ghost_orders, fill_ghosts, BoundarySet, Cons, Mesh};
use crate::reconstruct::{LinScheme, SchemeId, SchemeWeights};
use crate::symmetry::LinDot;

/// Cascade ladders, highest order first, ending with FOG.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    GpMood3,
    GpMood5,
    GpMood7,
    PolMood3,
    Fog,
}

impl Method {
    pub fn ladder(&self) -> Vec<SchemeId> {
        use SchemeId::*;
        match self {
            Method::GpMood3 => vec![GpR1, Fog],
            Method::GpMood5 => vec![GpR2, GpR1, Fog],
            Method::GpMood7 => vec![GpR3, GpR1, Fog],
            Method::PolMood3 => vec![Poly3, Fog],
            Method::Fog => vec![Fog],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::GpMood3 => "gp-mood3",
            Method::GpMood5 => "gp-mood5",
            Method::GpMood7 => "gp-mood7",
            Method::PolMood3 => "pol-mood3",
            Method::Fog => "fog",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Ok(match s {
            "gp-mood3" => Method::GpMood3,
            "gp-mood5" => Method::GpMood5,
            "gp-mood7" => Method::GpMood7,
            "pol-mood3" => Method::PolMood3,
            "fog" => Method::Fog,
            _ => return Err(Error::Config(format!("unknown method '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureMode {
    Gp,
    CenteredDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionConfig {
    pub sigma_v: f64,
    pub sigma_p: f64,
    pub csd_enabled: bool,
    pub delta: f64,
    pub plateau_eps: f64,
    pub curvature: CurvatureMode,
}

impl DetectionConfig {
    pub fn for_mesh(mesh: &Mesh) -> DetectionConfig {
        let d = if mesh.ndim == 1 { mesh.dx } else { mesh.dx.min(mesh.dy) };
        DetectionConfig {
            sigma_v: 5.0,
            sigma_p: 5.0,
            csd_enabled: true,
            delta: d,
            plateau_eps: d * d * d,
            curvature: CurvatureMode::Gp,
        }
    }
}

/// Counters for one stage. Detection counters accumulate over MOOD
/// iterations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MoodStats {
    pub cad_fail: usize,
    pub pad_fail: usize,
    pub csd_accept: usize,
    pub plateau_accept: usize,
    pub dmp_fail: usize,
    pub u2_reinstate: usize,
    pub u2_fail: usize,
    /// Final number of cells per ladder level.
    pub per_order: Vec<usize>,
    pub iterations: usize,
    pub cells: usize,
}

impl MoodStats {
    /// Cells whose order was decremented at least once.
    pub fn decremented(&self) -> usize {
        self.per_order.iter().skip(1).sum()
    }

    pub fn fog(&self) -> usize {
        if self.per_order.len() > 1 {
            *self.per_order.last().unwrap()
        } else {
            0
        }
    }

    pub fn decremented_fraction(&self) -> f64 {
        self.decremented() as f64 / self.cells.max(1) as f64
    }

    pub fn fog_fraction(&self) -> f64 {
        self.fog() as f64 / self.cells.max(1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Csd {
    EarlyAccept,
    Continue,
}

/// Fails if any of the values is NaN or infinite.
pub fn detect_cad(rho: f64, p: f64, face_values: &[f64]) -> bool {
    rho.is_finite() && p.is_finite() && face_values.iter().all(|v| v.is_finite())
}

pub fn detect_pad(rho: f64, p: f64) -> bool {
    rho > 0.0 && p > 0.0
}

/// CSD from stage-begin neighbors: `u`, `v`, `p` as (minus, plus) pairs per
/// direction; y-pairs absent in 1D.
pub fn detect_csd(
    ux: (f64, f64),
    vy: Option<(f64, f64)>,
    px: (f64, f64),
    py: Option<(f64, f64)>,
    dx: f64,
    dy: f64,
    sigma_v: f64,
    sigma_p: f64,
) -> Csd {
    let mut div = (ux.1 - ux.0) / (2.0 * dx);
    if let Some(v) = vy {
        div = div + (v.1 - v.0) / (2.0 * dy);
    }
    let mut grad = (px.1 - px.0).abs() / (2.0 * dx * px.0.min(px.1));
    if let Some(p) = py {
        grad = grad + (p.1 - p.0).abs() / (2.0 * dy * p.0.min(p.1));
    }
    if div >= -sigma_v && grad <= sigma_p {
        Csd::EarlyAccept
    } else {
        Csd::Continue
    }
}

fn min_max(vals: &[f64]) -> (f64, f64) {
    vals.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// True when the neighborhood (self included) is flat to within `eps`.
pub fn detect_plateau(neigh: &[f64], eps: f64) -> bool {
    let (lo, hi) = min_max(neigh);
    hi - lo < eps
}

pub fn detect_dmp(candidate: f64, neigh: &[f64]) -> bool {
    let (lo, hi) = min_max(neigh);
    lo <= candidate && candidate <= hi
}

/// Per-direction smooth-extremum test on (C_min, C_max).
pub fn u2_direction_ok(cmin: f64, cmax: f64, delta: f64) -> bool {
    let prod = cmin * cmax > -delta;
    let a = cmax.abs().max(cmin.abs()) < delta;
    let b = cmin.abs() / cmax.abs() >= 0.5;
    prod && (a || b)
}

/// Reinstates iff every direction passes; `curv[d]` holds the curvatures of
/// self and face neighbors.
pub fn detect_u2(curv: &[Vec<f64>], delta: f64) -> bool {
    curv.iter().all(|c| {
        let (lo, hi) = min_max(c);
        u2_direction_ok(lo, hi, delta)
    })
}

/// Scheme index used on a face under EDP1: the lower of the two orders,
/// i.e. the larger ladder index.
#[inline]
pub fn edp1_face_order(left: u8, right: u8) -> u8 {
    left.max(right)
}

enum Verdict {
    Accept,
    Fail,
}

/// Result of one MOOD-validated stage.
pub struct StageOutput {
    /// Accepted candidate (interior cells valid).
    pub accepted: Vec<Cons>,
    /// Final 𝔽∇ per interior cell.
    pub divergence: Vec<Cons>,
    pub stats: MoodStats,
    /// Final ladder index per cell (ghost-inclusive layout).
    pub orders: Vec<u8>,
}

/// Everything needed to run MOOD stages on one mesh.
pub struct MoodSolver {
    pub mesh: Mesh,
    pub bc: BoundarySet,
    pub gamma: f64,
    pub riemann: RiemannSolver,
    pub ladder: Vec<SchemeId>,
    pub schemes: Vec<LinScheme>,
    pub detection: DetectionConfig,
    curv: Vec<LinDot>,
}

impl MoodSolver {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: Mesh,
        bc: BoundarySet,
        gamma: f64,
        riemann: RiemannSolver,
        method: Method,
        kernel: &KernelConfig,
        shape: StencilShape,
        quadrature: usize,
        detection: DetectionConfig,
    ) -> Result<MoodSolver> {
        bc.validate()?;
        let ladder = method.ladder();
        let square = mesh.square_cells();
        let mut schemes = Vec::new();
        for &s in &ladder {
            // The stencil shape only applies to the top GP scheme.
            let sh = if s == ladder[0] { shape } else { StencilShape::Diamond };
            let w = SchemeWeights::build(s, mesh.ndim, quadrature, kernel, sh, square)?;
            schemes.push(w.linearize(&mesh));
        }
        let r1 = Stencil::new(1, StencilShape::Diamond, mesh.ndim);
        let set = PredictionVectorSet::build(&r1, kernel, 1, square)?;
        let curv = set.second.iter().map(|d| d.linearize(mesh.sx() as isize)).collect();
        Ok(MoodSolver {
            mesh,
            bc,
            gamma,
            riemann,
            ladder,
            schemes,
            detection,
            curv,
        })
    }

    pub fn fill_ghosts(&self, field: &mut [Cons], time: f64) {
        fill_ghosts(field, &self.mesh, &self.bc, time);
    }

    fn fog_index(&self) -> u8 {
        (self.ladder.len() - 1) as u8
    }

    /// Runs one MOOD-validated forward-Euler stage:
    /// accepted = base − coef_dt · 𝔽∇(state). Ghosts of `state` are filled at `time`.
    pub fn stage(&self, state: &mut [Cons], base: &[Cons], coef_dt: f64, time: f64) -> StageOutput {
        let m = &self.mesh;
        self.fill_ghosts(state, time);
        let state: &[Cons] = state;
        let nx = m.nx;
        let ny = m.ny;
        let two_d = m.ndim == 2;
        let len = m.len();

        let mut rho = vec![0.0; len];
        let mut vel = vec![[0.0f64; 3]; len];
        for k in 0..len {
            rho[k] = state[k][0];
        }
        if self.detection.csd_enabled {
            for k in 0..len {
                let w = cons_to_prim(&state[k], self.gamma);
                vel[k] = [w.u, w.v, w.p];
            }
        }

        let fog = self.fog_index();
        let mut orders = vec![0u8; len];
        fill_ghost_orders(&mut orders, m, &self.bc, time, fog);

        let nxf = (nx + 1) * ny;
        let nyf = if two_d { nx * (ny + 1) } else { 0 };
        let mut xflux = vec![[0.0; 4]; nxf];
        let mut yflux = vec![[0.0; 4]; nyf];
        let mut xbad = vec![false; nxf];
        let mut ybad = vec![false; nyf];
        let mut xord = vec![0u8; nxf];
        let mut yord = vec![0u8; nyf];

        let xf = |i: usize, j: usize| j * (nx + 1) + i;
        let yf = |i: usize, j: usize| j * nx + i;

        let face_flux = |axis: usize, i: usize, j: usize, s: u8| -> (Cons, bool) {
            let (l, r, fl, fr) = if axis == 0 {
                (m.gidx(i as isize - 1, j as isize), m.gidx(i as isize, j as isize), 0, 1)
            } else {
                (m.gidx(i as isize, j as isize - 1), m.gidx(i as isize, j as isize), 2, 3)
            };
            let sch = &self.schemes[s as usize];
            let q = sch.q();
            let mut fluxes = [[0.0; 4]; 4];
            let mut bad = false;
            for g in 0..q {
                let ul = sch.face_state(state, l, fl, g);
                let ur = sch.face_state(state, r, fr, g);
                if !(ul[0].is_finite()
                    && ur[0].is_finite()
                    && pressure(&ul, self.gamma).is_finite()
                    && pressure(&ur, self.gamma).is_finite())
                {
                    bad = true;
                }
                fluxes[g] = self.riemann.flux(&ul, &ur, axis, self.gamma);
            }
            (face_average(&fluxes[..q], &sch.weights), bad)
        };

        for j in 0..ny {
            for i in 0..=nx {
                let s = edp1_face_order(
                    orders[m.gidx(i as isize - 1, j as isize)],
                    orders[m.gidx(i as isize, j as isize)],
                );
                let k = xf(i, j);
                xord[k] = s;
                let (f, b) = face_flux(0, i, j, s);
                xflux[k] = f;
                xbad[k] = b;
            }
        }
        if two_d {
            for j in 0..=ny {
                for i in 0..nx {
                    let s = edp1_face_order(
                        orders[m.gidx(i as isize, j as isize - 1)],
                        orders[m.gidx(i as isize, j as isize)],
                    );
                    let k = yf(i, j);
                    yord[k] = s;
                    let (f, b) = face_flux(1, i, j, s);
                    yflux[k] = f;
                    ybad[k] = b;
                }
            }
        }

        let mut accepted = state.to_vec();
        let mut divergence = vec![[0.0; 4]; len];
        let cdt = coef_dt;
        let mut stats = MoodStats {
            cells: m.ncells(),
            ..MoodStats::default()
        };

        let update_cell = |i: usize, j: usize,
                           xflux: &[Cons],
                           yflux: &[Cons],
                           accepted: &mut [Cons],
                           divergence: &mut [Cons]| {
            let g = if two_d {
                Some((&yflux[yf(i, j + 1)], &yflux[yf(i, j)]))
            } else {
                None
            };
            let d = flux_divergence(&xflux[xf(i + 1, j)], &xflux[xf(i, j)], g, m.dx, m.dy);
            let k = m.idx(i, j);
            let b = &base[k];
            accepted[k] = [
                b[0] - cdt * d[0],
                b[1] - cdt * d[1],
                b[2] - cdt * d[2],
                b[3] - cdt * d[3],
            ];
            divergence[k] = d;
        };

        let mut dirty: Vec<(usize, usize)> = m.interior().collect();
        let mut is_dirty = vec![false; len];
        loop {
            stats.iterations += 1;
            let mut failing = Vec::new();
            for &(i, j) in &dirty {
                update_cell(i, j, &xflux, &yflux, &mut accepted, &mut divergence);
            }
            for &(i, j) in &dirty {
                let k = m.idx(i, j);
                is_dirty[k] = false;
                if orders[k] == fog {
                    continue;
                }
                let faces_bad = xbad[xf(i, j)]
                    || xbad[xf(i + 1, j)]
                    || (two_d && (ybad[yf(i, j)] || ybad[yf(i, j + 1)]));
                if let Verdict::Fail = self.detect(i, j, &accepted[k], faces_bad, &rho, &vel, &mut stats) {
                    failing.push((i, j));
                }
            }
            if failing.is_empty() {
                break;
            }
            for &(i, j) in &failing {
                orders[m.idx(i, j)] += 1;
            }
            fill_ghost_orders(&mut orders, m, &self.bc, time, fog);

            let mut next = Vec::new();
            let mark = |i: isize, j: isize, next: &mut Vec<(usize, usize)>, is_dirty: &mut Vec<bool>| {
                if i < 0 || j < 0 || i >= nx as isize || j >= ny as isize {
                    return;
                }
                let k = m.idx(i as usize, j as usize);
                if !is_dirty[k] {
                    is_dirty[k] = true;
                    next.push((i as usize, j as usize));
                }
            };
            let mut xcand: Vec<(usize, usize)> = Vec::new();
            let mut ycand: Vec<(usize, usize)> = Vec::new();
            for &(i, j) in &failing {
                xcand.push((i, j));
                xcand.push((i + 1, j));
                if two_d {
                    ycand.push((i, j));
                    ycand.push((i, j + 1));
                }
            }
            for j in 0..ny {
                xcand.push((0, j));
                xcand.push((nx, j));
            }
            if two_d {
                for i in 0..nx {
                    ycand.push((i, 0));
                    ycand.push((i, ny));
                }
            }
            for (i, j) in xcand {
                let s = edp1_face_order(
                    orders[m.gidx(i as isize - 1, j as isize)],
                    orders[m.gidx(i as isize, j as isize)],
                );
                let k = xf(i, j);
                if s != xord[k] {
                    xord[k] = s;
                    let (f, b) = face_flux(0, i, j, s);
                    xflux[k] = f;
                    xbad[k] = b;
                    mark(i as isize - 1, j as isize, &mut next, &mut is_dirty);
                    mark(i as isize, j as isize, &mut next, &mut is_dirty);
                }
            }
            for (i, j) in ycand {
                let s = edp1_face_order(
                    orders[m.gidx(i as isize, j as isize - 1)],
                    orders[m.gidx(i as isize, j as isize)],
                );
                let k = yf(i, j);
                if s != yord[k] {
                    yord[k] = s;
                    let (f, b) = face_flux(1, i, j, s);
                    yflux[k] = f;
                    ybad[k] = b;
                    mark(i as isize, j as isize - 1, &mut next, &mut is_dirty);
                    mark(i as isize, j as isize, &mut next, &mut is_dirty);
                }
            }
            next.sort_unstable_by_key(|&(i, j)| (j, i));
            dirty = next;
        }

        let mut per_order = vec![0usize; self.ladder.len()];
        for (i, j) in m.interior() {
            per_order[orders[m.idx(i, j)] as usize] += 1;
        }
        stats.per_order = per_order;
        StageOutput {
            accepted,
            divergence,
            stats,
            orders,
        }
    }

    fn curvature(&self, rho: &[f64], k: usize, d: usize) -> f64 {
        match self.detection.curvature {
            CurvatureMode::Gp => self.curv[d].apply1(rho, k),
            CurvatureMode::CenteredDifference => {
                let (s, h) = if d == 0 {
                    (1, self.mesh.dx)
                } else {
                    (self.mesh.sx(), self.mesh.dy)
                };
                ((rho[k + s] + rho[k - s]) - 2.0 * rho[k]) / (h * h)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn detect(
        &self,
        i: usize,
        j: usize,
        cand: &Cons,
        faces_bad: bool,
        rho: &[f64],
        vel: &[[f64; 3]],
        stats: &mut MoodStats,
    ) -> Verdict {
        let m = &self.mesh;
        let det = &self.detection;
        let p = pressure(cand, self.gamma);
        if faces_bad || !detect_cad(cand[0], p, &[]) {
            stats.cad_fail += 1;
            return Verdict::Fail;
        }
        if !detect_pad(cand[0], p) {
            stats.pad_fail += 1;
            return Verdict::Fail;
        }
        let k = m.idx(i, j);
        let sx = m.sx();
        let two_d = m.ndim == 2;
        let (w, e) = (k - 1, k + 1);
        if det.csd_enabled {
            let (vy, py) = if two_d {
                let (s, n) = (k - sx, k + sx);
                (Some((vel[s][1], vel[n][1])), Some((vel[s][2], vel[n][2])))
            } else {
                (None, None)
            };
            let r = detect_csd(
                (vel[w][0], vel[e][0]),
                vy,
                (vel[w][2], vel[e][2]),
                py,
                m.dx,
                m.dy,
                det.sigma_v,
                det.sigma_p,
            );
            if r == Csd::EarlyAccept {
                stats.csd_accept += 1;
                return Verdict::Accept;
            }
        }
        let neigh: Vec<usize> = if two_d {
            vec![k, w, k + sx, e, k - sx]
        } else {
            vec![k, w, e]
        };
        let vals: Vec<f64> = neigh.iter().map(|&n| rho[n]).collect();
        if detect_plateau(&vals, det.plateau_eps) {
            stats.plateau_accept += 1;
            return Verdict::Accept;
        }
        if detect_dmp(cand[0], &vals) {
            return Verdict::Accept;
        }
        stats.dmp_fail += 1;
        let curv: Vec<Vec<f64>> = (0..m.ndim)
            .map(|d| neigh.iter().map(|&n| self.curvature(rho, n, d)).collect())
            .collect();
        if detect_u2(&curv, det.delta) {
            stats.u2_reinstate += 1;
            Verdict::Accept
        } else {
            stats.u2_fail += 1;
            Verdict::Fail
        }
    }
}
