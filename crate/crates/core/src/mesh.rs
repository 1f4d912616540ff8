//! Uniform Cartesian grids with ghost layers and boundary conditions.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Conservative state (ρ, ρu, ρv, ρE); ρv is zero in 1D.
pub type Cons = [f64; 4];

pub const NGHOST: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub ndim: usize,
    pub nx: usize,
    pub ny: usize,
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub dx: f64,
    pub dy: f64,
    pub nghost: usize,
}

impl Mesh {
    /// `ny` and the y-bounds are ignored in 1D.
    pub fn new(
        ndim: usize,
        nx: usize,
        ny: usize,
        (xmin, xmax): (f64, f64),
        (ymin, ymax): (f64, f64),
        nghost: usize,
    ) -> Result<Mesh> {
        if ndim != 1 && ndim != 2 {
            return Err(Error::Mesh(format!("ndim must be 1 or 2, got {ndim}")));
        }
        if nx == 0 || (ndim == 2 && ny == 0) {
            return Err(Error::Mesh("cell counts must be positive".into()));
        }
        if !(xmax > xmin) || (ndim == 2 && !(ymax > ymin)) {
            return Err(Error::Mesh("domain bounds must be increasing".into()));
        }
        if nghost < NGHOST {
            return Err(Error::Mesh(format!("nghost must be at least {NGHOST}")));
        }
        let (ny, ymin, ymax) = if ndim == 1 { (1, 0.0, 1.0) } else { (ny, ymin, ymax) };
        Ok(Mesh {
            ndim,
            nx,
            ny,
            xmin,
            xmax,
            ymin,
            ymax,
            dx: (xmax - xmin) / nx as f64,
            dy: (ymax - ymin) / ny as f64,
            nghost,
        })
    }

    /// Ghost width in y (zero in 1D).
    pub fn gy(&self) -> usize {
        if self.ndim == 1 {
            0
        } else {
            self.nghost
        }
    }

    /// Row stride of the ghost-inclusive array.
    pub fn sx(&self) -> usize {
        self.nx + 2 * self.nghost
    }

    pub fn sy(&self) -> usize {
        self.ny + 2 * self.gy()
    }

    pub fn len(&self) -> usize {
        self.sx() * self.sy()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ncells(&self) -> usize {
        self.nx * self.ny
    }

    /// Linear index of interior cell (i, j), 0-based.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        (j + self.gy()) * self.sx() + i + self.nghost
    }

    /// Linear index of a ghost-inclusive coordinate (may be negative relative
    /// to the interior).
    #[inline]
    pub fn gidx(&self, i: isize, j: isize) -> usize {
        ((j + self.gy() as isize) * self.sx() as isize + i + self.nghost as isize) as usize
    }

    /// Cell center of (possibly ghost) cell (i, j), computed about the domain
    /// midpoint so that mirror-image cells get exactly negated offsets.
    pub fn center(&self, i: isize, j: isize) -> (f64, f64) {
        let (ox, oy) = self.center_offset(i, j);
        (0.5 * (self.xmin + self.xmax) + ox, 0.5 * (self.ymin + self.ymax) + oy)
    }

    /// Displacement of the cell center from the domain midpoint.
    pub fn center_offset(&self, i: isize, j: isize) -> (f64, f64) {
        let kx = i as f64 + 0.5 - 0.5 * self.nx as f64;
        let ky = j as f64 + 0.5 - 0.5 * self.ny as f64;
        (kx * self.dx, if self.ndim == 1 { 0.0 } else { ky * self.dy })
    }

    pub fn cell_volume(&self) -> f64 {
        if self.ndim == 1 {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    pub fn square_cells(&self) -> bool {
        self.ndim == 1 || self.dx == self.dy
    }

    pub fn new_field(&self) -> Vec<Cons> {
        vec![[0.0; 4]; self.len()]
    }

    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }
}

/// Ghost value prescribed by a position- and time-dependent boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GhostRule {
    State(Cons),
    Outflow,
    Reflect,
}

pub type GhostFn = Arc<dyn Fn(f64, f64, f64) -> GhostRule + Send + Sync>;

#[derive(Clone)]
pub enum Boundary {
    Periodic,
    Outflow,
    Reflecting,
    /// Evaluated at each ghost-cell center (x, y) and time t.
    Custom(GhostFn),
}

impl std::fmt::Debug for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "Periodic"),
            Boundary::Outflow => write!(f, "Outflow"),
            Boundary::Reflecting => write!(f, "Reflecting"),
            Boundary::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundarySet {
    pub xlo: Boundary,
    pub xhi: Boundary,
    pub ylo: Boundary,
    pub yhi: Boundary,
}

impl BoundarySet {
    pub fn uniform(b: Boundary) -> BoundarySet {
        BoundarySet {
            xlo: b.clone(),
            xhi: b.clone(),
            ylo: b.clone(),
            yhi: b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = |b: &Boundary| matches!(b, Boundary::Periodic);
        if p(&self.xlo) != p(&self.xhi) || p(&self.ylo) != p(&self.yhi) {
            return Err(Error::Config(
                "periodic boundaries must be paired with the opposite side".into(),
            ));
        }
        Ok(())
    }
}

/// Source of a ghost value along one axis.
enum Src {
    Copy(usize),
    Mirror(usize),
    Set(Cons),
}

fn side_rule(b: &Boundary, x: f64, y: f64, t: f64) -> GhostRule {
    match b {
        Boundary::Periodic => GhostRule::Outflow, // handled by the caller
        Boundary::Outflow => GhostRule::Outflow,
        Boundary::Reflecting => GhostRule::Reflect,
        Boundary::Custom(f) => f(x, y, t),
    }
}

/// Resolves the source of ghost cell `g` (index along the axis, negative or
/// ≥ n) for an axis of `n` interior cells.
fn axis_source(b: &Boundary, g: isize, n: isize, rule: GhostRule) -> Src {
    if let Boundary::Periodic = b {
        return Src::Copy(g.rem_euclid(n) as usize);
    }
    let (mirror, edge) = if g < 0 { (-1 - g, 0) } else { (2 * n - 1 - g, n - 1) };
    match rule {
        GhostRule::Outflow => Src::Copy(edge as usize),
        GhostRule::Reflect => Src::Mirror(mirror as usize),
        GhostRule::State(u) => Src::Set(u),
    }
}

/// Fills all ghost cells: x-sides first over interior rows, then y-sides over
/// full rows (which fills the corners).
pub fn fill_ghosts(field: &mut [Cons], mesh: &Mesh, bc: &BoundarySet, time: f64) {
    let g = mesh.nghost as isize;
    let nx = mesh.nx as isize;
    let ny = mesh.ny as isize;
    for j in 0..ny {
        for (side, range) in [(&bc.xlo, -g..0), (&bc.xhi, nx..nx + g)] {
            for i in range {
                let (x, y) = mesh.center(i, j);
                let src = axis_source(side, i, nx, side_rule(side, x, y, time));
                let dst = mesh.gidx(i, j);
                field[dst] = match src {
                    Src::Copy(s) => field[mesh.gidx(s as isize, j)],
                    Src::Mirror(s) => {
                        let mut u = field[mesh.gidx(s as isize, j)];
                        u[1] = -u[1];
                        u
                    }
                    Src::Set(u) => u,
                };
            }
        }
    }
    if mesh.ndim == 1 {
        return;
    }
    for i in -g..nx + g {
        for (side, range) in [(&bc.ylo, -g..0), (&bc.yhi, ny..ny + g)] {
            for j in range {
                let (x, y) = mesh.center(i, j);
                let src = axis_source(side, j, ny, side_rule(side, x, y, time));
                let dst = mesh.gidx(i, j);
                field[dst] = match src {
                    Src::Copy(s) => field[mesh.gidx(i, s as isize)],
                    Src::Mirror(s) => {
                        let mut u = field[mesh.gidx(i, s as isize)];
                        u[2] = -u[2];
                        u
                    }
                    Src::Set(u) => u,
                };
            }
        }
    }
}

/// Fills ghost entries of a per-cell scheme map with the same sources as the
/// field: periodic images, mirrored or adjacent interior values; prescribed
/// states take `fixed`.
pub fn fill_ghost_orders(orders: &mut [u8], mesh: &Mesh, bc: &BoundarySet, time: f64, fixed: u8) {
    let g = mesh.nghost as isize;
    let nx = mesh.nx as isize;
    let ny = mesh.ny as isize;
    for j in 0..ny {
        for (side, range) in [(&bc.xlo, -g..0), (&bc.xhi, nx..nx + g)] {
            for i in range {
                let (x, y) = mesh.center(i, j);
                orders[mesh.gidx(i, j)] = match axis_source(side, i, nx, side_rule(side, x, y, time)) {
                    _ if matches!(side, Boundary::Custom(_)) => fixed,
                    Src::Copy(s) | Src::Mirror(s) => orders[mesh.gidx(s as isize, j)],
                    Src::Set(_) => fixed,
                };
            }
        }
    }
    if mesh.ndim == 1 {
        return;
    }
    for i in -g..nx + g {
        for (side, range) in [(&bc.ylo, -g..0), (&bc.yhi, ny..ny + g)] {
            for j in range {
                let (x, y) = mesh.center(i, j);
                orders[mesh.gidx(i, j)] = match axis_source(side, j, ny, side_rule(side, x, y, time)) {
                    _ if matches!(side, Boundary::Custom(_)) => fixed,
                    Src::Copy(s) | Src::Mirror(s) => orders[mesh.gidx(i, s as isize)],
                    Src::Set(_) => fixed,
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing() {
        let m = Mesh::new(2, 256, 256, (-0.5, 0.5), (-0.5, 0.5), 4).unwrap();
        assert_eq!(m.dx, 1.0 / 256.0);
        assert_eq!(m.dy, 1.0 / 256.0);
        let m1 = Mesh::new(1, 256, 0, (0.0, 9.0), (0.0, 0.0), 4).unwrap();
        assert_eq!(m1.dx, 9.0 / 256.0);
        assert_eq!(m1.sy(), 1);
        let j = Mesh::new(2, 600, 600, (0.0, 1.5), (0.0, 1.5), 4).unwrap();
        assert_eq!(j.dx, 0.0025);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(Mesh::new(2, 0, 4, (0.0, 1.0), (0.0, 1.0), 4).is_err());
        assert!(Mesh::new(2, 4, 4, (1.0, 0.0), (0.0, 1.0), 4).is_err());
        assert!(Mesh::new(2, 4, 4, (0.0, 1.0), (0.0, 1.0), 2).is_err());
        assert!(Mesh::new(3, 4, 4, (0.0, 1.0), (0.0, 1.0), 4).is_err());
    }

    #[test]
    fn centers_are_mirror_exact() {
        let m = Mesh::new(2, 37, 37, (-0.5, 0.5), (-0.5, 0.5), 4).unwrap();
        for i in -4..41 {
            let (a, _) = m.center(i, 0);
            let (b, _) = m.center(36 - i, 0);
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn periodic_1d() {
        let m = Mesh::new(1, 3, 0, (0.0, 3.0), (0.0, 0.0), 4).unwrap();
        let mut f = m.new_field();
        for i in 0..3 {
            f[m.idx(i, 0)] = [i as f64 + 1.0, 0.0, 0.0, 0.0];
        }
        fill_ghosts(&mut f, &m, &BoundarySet::uniform(Boundary::Periodic), 0.0);
        assert_eq!(f[m.gidx(-1, 0)][0], 3.0);
        assert_eq!(f[m.gidx(3, 0)][0], 1.0);
        assert_eq!(f[m.gidx(-4, 0)][0], 3.0);
    }

    #[test]
    fn reflecting_negates_normal_momentum() {
        let m = Mesh::new(2, 4, 4, (0.0, 1.0), (0.0, 1.0), 4).unwrap();
        let mut f = m.new_field();
        for (i, j) in m.interior() {
            f[m.idx(i, j)] = [1.0 + i as f64, 0.5, 0.25 + j as f64, 3.0];
        }
        fill_ghosts(&mut f, &m, &BoundarySet::uniform(Boundary::Reflecting), 0.0);
        assert_eq!(f[m.gidx(2, -1)], [3.0, 0.5, -0.25, 3.0]);
        assert_eq!(f[m.gidx(-2, 1)], [2.0, -0.5, 1.25, 3.0]);
    }

    #[test]
    fn fill_is_idempotent() {
        let m = Mesh::new(2, 5, 3, (0.0, 1.0), (0.0, 1.0), 4).unwrap();
        let mut f = m.new_field();
        for (i, j) in m.interior() {
            f[m.idx(i, j)] = [(i * 7 + j) as f64, 1.0, 2.0, 3.0];
        }
        let bc = BoundarySet {
            xlo: Boundary::Outflow,
            xhi: Boundary::Reflecting,
            ylo: Boundary::Periodic,
            yhi: Boundary::Periodic,
        };
        fill_ghosts(&mut f, &m, &bc, 0.0);
        let once = f.clone();
        fill_ghosts(&mut f, &m, &bc, 0.0);
        assert_eq!(once, f);
    }

    #[test]
    fn periodic_validation() {
        let bc = BoundarySet {
            xlo: Boundary::Periodic,
            xhi: Boundary::Outflow,
            ylo: Boundary::Outflow,
            yhi: Boundary::Outflow,
        };
        assert!(bc.validate().is_err());
    }
}
