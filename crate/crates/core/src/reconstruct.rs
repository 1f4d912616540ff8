//! Face-point reconstruction of volume-averaged conservative data.

use crate::error::{Error, Result};
use crate::gp::{
    face_point, quadrature_rule, KernelConfig, PredictionVectorSet, QuadratureRule, Stencil,
    StencilShape,
};
use crate::mesh::{Cons, Mesh};
use crate::symmetry::{build_family, grid_group, LinDot, SymDot, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeId {
    Fog,
    GpR1,
    GpR2,
    GpR3,
    Poly3,
}

impl SchemeId {
    pub fn order(&self) -> usize {
        match self {
            SchemeId::Fog => 1,
            SchemeId::GpR1 | SchemeId::Poly3 => 3,
            SchemeId::GpR2 => 5,
            SchemeId::GpR3 => 7,
        }
    }

    /// Face quadrature size paired with the scheme in 2D.
    pub fn quadrature(&self) -> usize {
        match self {
            SchemeId::Fog => 1,
            SchemeId::GpR1 | SchemeId::Poly3 => 2,
            SchemeId::GpR2 => 3,
            SchemeId::GpR3 => 4,
        }
    }

    pub fn gp_radius(&self) -> Option<usize> {
        match self {
            SchemeId::GpR1 => Some(1),
            SchemeId::GpR2 => Some(2),
            SchemeId::GpR3 => Some(3),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::Fog => "FOG",
            SchemeId::GpR1 => "GP-R1",
            SchemeId::GpR2 => "GP-R2",
            SchemeId::GpR3 => "GP-R3",
            SchemeId::Poly3 => "POLY3",
        }
    }
}

/// Data at the stencil offsets of cell (i, j), in stencil order.
pub fn gather_stencil(field: &[Cons], mesh: &Mesh, cell: (usize, usize), stencil: &Stencil) -> Vec<Cons> {
    stencil
        .offsets
        .iter()
        .map(|&(di, dj)| field[mesh.gidx(cell.0 as isize + di as isize, cell.1 as isize + dj as isize)])
        .collect()
}

/// Coefficients (a0..a4) of p3(x, y) = a0 + a1x + a2x² + a3y + a4y² matching
/// the five R = 1 stencil averages (cell-width units).
pub fn poly3_coefficients(q: &[f64; 5]) -> [f64; 5] {
    [
        7.0 / 6.0 * q[0] - (q[1] + q[2] + q[3] + q[4]) / 24.0,
        -0.5 * q[1] + 0.5 * q[3],
        -q[0] + 0.5 * q[1] + 0.5 * q[3],
        0.5 * q[2] - 0.5 * q[4],
        -q[0] + 0.5 * q[2] + 0.5 * q[4],
    ]
}

/// Linear weights of p3 evaluated at a point, over the R = 1 stencil.
pub fn poly3_point_weights(ndim: usize, (x, y): (f64, f64)) -> Vec<f64> {
    if ndim == 1 {
        // Offsets (0, W, E): a0 = 13/12 q0 − (qW + qE)/24, a1, a2 as in 2D.
        return vec![
            13.0 / 12.0 - x * x,
            -1.0 / 24.0 - 0.5 * x + 0.5 * x * x,
            -1.0 / 24.0 + 0.5 * x + 0.5 * x * x,
        ];
    }
    let a: [[f64; 5]; 5] = [
        [7.0 / 6.0, -1.0 / 24.0, -1.0 / 24.0, -1.0 / 24.0, -1.0 / 24.0],
        [0.0, -0.5, 0.0, 0.5, 0.0],
        [-1.0, 0.5, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.5, 0.0, -0.5],
        [-1.0, 0.0, 0.5, 0.0, 0.5],
    ];
    let basis = [1.0, x, x * x, y, y * y];
    (0..5)
        .map(|m| (0..5).map(|k| a[k][m] * basis[k]).sum())
        .collect()
}

/// Face-point weights of one scheme, faces E, W, N, S (E, W in 1D).
#[derive(Clone, Debug)]
pub struct SchemeWeights {
    pub scheme: SchemeId,
    pub quadrature: QuadratureRule,
    pub faces: Vec<Vec<SymDot>>,
}

impl SchemeWeights {
    pub fn build(
        scheme: SchemeId,
        ndim: usize,
        q: usize,
        kernel: &KernelConfig,
        shape: StencilShape,
        square: bool,
    ) -> Result<SchemeWeights> {
        let q = if ndim == 1 || scheme == SchemeId::Fog { 1 } else { q };
        let quad = quadrature_rule(q)?;
        let nfaces = 2 * ndim;
        match scheme {
            SchemeId::Fog => {
                let one = SymDot::new(vec![(0, 0)], vec![1.0], &[crate::symmetry::Sym::IDENTITY]);
                Ok(SchemeWeights {
                    scheme,
                    quadrature: quad,
                    faces: vec![vec![one]; nfaces],
                })
            }
            SchemeId::Poly3 => {
                let stencil = Stencil::new(1, StencilShape::Diamond, ndim);
                let targets: Vec<Target> = (0..nfaces)
                    .flat_map(|f| {
                        quad.points.iter().map(move |&g| {
                            let p = face_point(f, g);
                            Target::point(p.0, p.1)
                        })
                    })
                    .collect();
                let group = grid_group(ndim, square);
                let dots = build_family(&stencil.offsets, &targets, &group, |t| {
                    poly3_point_weights(ndim, t.point)
                });
                Ok(SchemeWeights {
                    scheme,
                    faces: dots.chunks(quad.len()).map(|c| c.to_vec()).collect(),
                    quadrature: quad,
                })
            }
            _ => {
                let r = scheme.gp_radius().unwrap();
                let stencil = Stencil::new(r, shape, ndim);
                let set = PredictionVectorSet::build(&stencil, kernel, q, square)?;
                Ok(SchemeWeights {
                    scheme,
                    quadrature: set.quadrature,
                    faces: set.faces,
                })
            }
        }
    }

    pub fn linearize(&self, mesh: &Mesh) -> LinScheme {
        LinScheme {
            scheme: self.scheme,
            weights: self.quadrature.weights.clone(),
            faces: self
                .faces
                .iter()
                .map(|f| f.iter().map(|d| d.linearize(mesh.sx() as isize)).collect())
                .collect(),
        }
    }
}

/// [`SchemeWeights`] bound to a mesh layout.
#[derive(Clone, Debug)]
pub struct LinScheme {
    pub scheme: SchemeId,
    pub weights: Vec<f64>,
    pub faces: Vec<Vec<LinDot>>,
}

impl LinScheme {
    pub fn q(&self) -> usize {
        self.weights.len()
    }

    /// State on `face` at quadrature point `m` from the cell at linear index `base`.
    #[inline]
    pub fn face_state(&self, field: &[Cons], base: usize, face: usize, m: usize) -> Cons {
        self.faces[face][m].apply4(field, base)
    }
}

/// Per-face, per-quadrature-point states of one cell: `states[face][m]`.
pub type FaceStates = Vec<Vec<Cons>>;

pub fn reconstruct_faces(scheme: &LinScheme, field: &[Cons], mesh: &Mesh, cell: (usize, usize)) -> FaceStates {
    let base = mesh.idx(cell.0, cell.1);
    (0..scheme.faces.len())
        .map(|f| (0..scheme.q()).map(|m| scheme.face_state(field, base, f, m)).collect())
        .collect()
}

/// Required quadrature size for a ladder whose highest scheme is `top`,
/// honoring an explicit override.
pub fn resolve_quadrature(top: SchemeId, override_q: Option<usize>) -> Result<usize> {
    match override_q {
        None => Ok(top.quadrature()),
        Some(q) => {
            if !(1..=4).contains(&q) {
                return Err(Error::Config(format!("quadrature must be 1..=4, got {q}")));
            }
            if top.order() > 3 && q < top.quadrature() {
                return Err(Error::Config(format!(
                    "{} needs at least {}-point face quadrature",
                    top.name(),
                    top.quadrature()
                )));
            }
            Ok(q)
        }
    }
}
