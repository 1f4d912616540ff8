//! Gaussian-process reconstruction weights.
//!
//! Stencils, face quadrature rules, cell-integrated squared-exponential
//! kernels, and the prediction vectors z = C⁻¹t* that turn stencil averages
//! into point values. Kernel systems are assembled and solved in double-double
//! arithmetic and rounded to `f64` once.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::symmetry::{build_family, grid_group, SymDot, Target};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StencilShape {
    Diamond,
    Cross,
}

/// Ordered integer offsets of a GP stencil.
///
/// Canonical order: the center first, then rings of growing radius, each ring
/// traversed clockwise starting from its west-most point. For R = 1 this is
/// center, west, north, east, south.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub radius: usize,
    pub shape: StencilShape,
    pub offsets: Vec<(i32, i32)>,
}

impl Stencil {
    pub fn new(radius: usize, shape: StencilShape, ndim: usize) -> Stencil {
        let r = radius as i32;
        let mut offsets = vec![(0, 0)];
        if ndim == 1 {
            for k in 1..=r {
                offsets.push((-k, 0));
                offsets.push((k, 0));
            }
            return Stencil {
                radius,
                shape,
                offsets,
            };
        }
        for k in 1..=r {
            match shape {
                StencilShape::Cross => {
                    offsets.extend_from_slice(&[(-k, 0), (0, k), (k, 0), (0, -k)]);
                }
                StencilShape::Diamond => {
                    // West to north, north to east, east to south, south to west.
                    for s in 0..k {
                        offsets.push((-k + s, s));
                    }
                    for s in 0..k {
                        offsets.push((s, k - s));
                    }
                    for s in 0..k {
                        offsets.push((k - s, -s));
                    }
                    for s in 0..k {
                        offsets.push((-s, -k + s));
                    }
                }
            }
        }
        Stencil {
            radius,
            shape,
            offsets,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Gauss–Legendre rule on the reference face [−½, ½], abscissae in
/// descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn quadrature_rule(q: usize) -> Result<QuadratureRule> {
    let (points, weights) = match q {
        1 => (vec![0.0], vec![1.0]),
        2 => {
            let g = 1.0 / (2.0 * 3f64.sqrt());
            (vec![g, -g], vec![0.5, 0.5])
        }
        3 => {
            let g = 0.5 * (3.0f64 / 5.0).sqrt();
            (vec![g, 0.0, -g], vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
        }
        4 => {
            let s = (6.0f64 / 5.0).sqrt();
            let g1 = 0.5 * (3.0 / 7.0 + 2.0 / 7.0 * s).sqrt();
            let g2 = 0.5 * (3.0 / 7.0 - 2.0 / 7.0 * s).sqrt();
            let w1 = (18.0 - 30f64.sqrt()) / 72.0;
            let w2 = (18.0 + 30f64.sqrt()) / 72.0;
            (vec![g1, g2, -g2, -g1], vec![w1, w2, w2, w1])
        }
        _ => return Err(Error::Config(format!("unsupported quadrature order {q}"))),
    };
    Ok(QuadratureRule { points, weights })
}

/// Correlation length, absolute or as a multiple of min(dx, dy).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LengthScale {
    Absolute(f64),
    Relative(f64),
}

impl LengthScale {
    pub fn value(&self, dx: f64, dy: f64, ndim: usize) -> f64 {
        match *self {
            LengthScale::Absolute(l) => l,
            LengthScale::Relative(k) => {
                if ndim == 1 {
                    k * dx
                } else {
                    k * dx.min(dy)
                }
            }
        }
    }
}

/// ℓ/Δ_d for each active dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelConfig {
    pub ell: f64,
    pub ratios: Vec<f64>,
}

impl KernelConfig {
    pub fn new(ell: LengthScale, dx: f64, dy: f64, ndim: usize) -> KernelConfig {
        let l = ell.value(dx, dy, ndim);
        let ratios = if ndim == 1 {
            vec![l / dx]
        } else {
            vec![l / dx, l / dy]
        };
        KernelConfig { ell: l, ratios }
    }
}

fn sqrt_half_pi() -> Dd {
    (Dd::PI / Dd::new(2.0)).sqrt()
}

/// One-dimensional factor of t*: (1/Δ)∫_cell exp(−(x−x*)²/2ℓ²) dx with
/// D = (x_cell − x*)/Δ and s = ℓ/Δ.
pub fn pred_factor(d: Dd, s: Dd) -> Dd {
    let w = s * Dd::new(2.0).sqrt();
    let h = Dd::new(0.5);
    sqrt_half_pi() * s * (((d + h) / w).erf() - ((d - h) / w).erf())
}

/// One-dimensional factor of C: (1/Δ²)∫∫ exp(−(x−y)²/2ℓ²) over two cells
/// D apart, via second differences of ψ(t) = (t/λ)erf(t/λ) + e^{−t²/λ²}/√π.
pub fn cov_factor(d: Dd, s: Dd) -> Dd {
    let lam = s * Dd::new(2.0).sqrt();
    let rsp = Dd::PI.sqrt().recip();
    let psi = |t: Dd| {
        let u = t / lam;
        u * u.erf() + (-(u * u)).exp() * rsp
    };
    let one = Dd::ONE;
    let second = psi(d + one) + psi(d - one) - psi(d).mul_f64(2.0);
    Dd::PI.sqrt() * s * s * second
}

/// One-dimensional factor of ∂²t*/∂x*² (units 1/length²).
fn pred_factor_dxx(d: Dd, s: Dd, ell: Dd) -> Dd {
    let h = Dd::new(0.5);
    let two_s2 = s * s * Dd::new(2.0);
    let a = d - h;
    let b = d + h;
    (a * (-(a * a) / two_s2).exp() - b * (-(b * b) / two_s2).exp()) / (ell * ell)
}

/// Cell-integrated covariance between two cells whose centers differ by
/// `delta` cell widths per dimension; `ratios` are ℓ/Δ_d.
pub fn integrated_cov_entry(delta: &[f64], ratios: &[f64]) -> f64 {
    delta
        .iter()
        .zip(ratios)
        .fold(Dd::ONE, |acc, (&d, &s)| acc * cov_factor(Dd::new(d), Dd::new(s)))
        .to_f64()
}

/// Cell-integrated kernel between a cell and a point `delta` cell widths away.
pub fn integrated_pred_entry(delta: &[f64], ratios: &[f64]) -> f64 {
    delta
        .iter()
        .zip(ratios)
        .fold(Dd::ONE, |acc, (&d, &s)| acc * pred_factor(Dd::new(d), Dd::new(s)))
        .to_f64()
}

/// Δ_{mn,d} = (x_n − x_m)/Δ_d in cell-width units.
pub fn delta_mn(xm: (f64, f64), xn: (f64, f64)) -> (f64, f64) {
    (xn.0 - xm.0, xn.1 - xm.1)
}

fn offset_coords(o: (i32, i32), ndim: usize) -> Vec<Dd> {
    if ndim == 1 {
        vec![Dd::new(o.0 as f64)]
    } else {
        vec![Dd::new(o.0 as f64), Dd::new(o.1 as f64)]
    }
}

pub fn build_covariance(stencil: &Stencil, cfg: &KernelConfig) -> Vec<Vec<Dd>> {
    let n = stencil.len();
    let ndim = cfg.ratios.len();
    let s: Vec<Dd> = cfg.ratios.iter().map(|&r| Dd::new(r)).collect();
    let mut c = vec![vec![Dd::ZERO; n]; n];
    for m in 0..n {
        for k in m..n {
            let xm = offset_coords(stencil.offsets[m], ndim);
            let xk = offset_coords(stencil.offsets[k], ndim);
            let mut v = Dd::ONE;
            for d in 0..ndim {
                v = v * cov_factor(xk[d] - xm[d], s[d]);
            }
            c[m][k] = v;
            c[k][m] = v;
        }
    }
    c
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &[Vec<Dd>]) -> Result<Vec<Vec<Dd>>> {
    let n = a.len();
    let mut l = vec![vec![Dd::ZERO; n]; n];
    for j in 0..n {
        let mut diag = a[j][j];
        for k in 0..j {
            diag = diag - l[j][k] * l[j][k];
        }
        if !(diag.hi > 0.0) {
            return Err(Error::NotSpd {
                row: j,
                pivot: diag.to_f64(),
            });
        }
        let ljj = diag.sqrt();
        l[j][j] = ljj;
        for i in (j + 1)..n {
            let mut v = a[i][j];
            for k in 0..j {
                v = v - l[i][k] * l[j][k];
            }
            l[i][j] = v / ljj;
        }
    }
    Ok(l)
}

/// Solves L Lᵀ x = b.
pub fn cholesky_solve(l: &[Vec<Dd>], b: &[Dd]) -> Vec<Dd> {
    let n = l.len();
    let mut y = vec![Dd::ZERO; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v = v - l[i][k] * y[k];
        }
        y[i] = v / l[i][i];
    }
    let mut x = vec![Dd::ZERO; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v = v - l[k][i] * x[k];
        }
        x[i] = v / l[i][i];
    }
    x
}

fn pred_vector(stencil: &Stencil, cfg: &KernelConfig, point: (f64, f64)) -> Vec<Dd> {
    let ndim = cfg.ratios.len();
    let p = [Dd::new(point.0), Dd::new(point.1)];
    stencil
        .offsets
        .iter()
        .map(|&o| {
            let x = offset_coords(o, ndim);
            (0..ndim).fold(Dd::ONE, |acc, d| {
                acc * pred_factor(x[d] - p[d], Dd::new(cfg.ratios[d]))
            })
        })
        .collect()
}

fn dxx_vector(stencil: &Stencil, cfg: &KernelConfig, axis: usize) -> Vec<Dd> {
    let ndim = cfg.ratios.len();
    let ell = Dd::new(cfg.ell);
    stencil
        .offsets
        .iter()
        .map(|&o| {
            let x = offset_coords(o, ndim);
            (0..ndim).fold(Dd::ONE, |acc, d| {
                let s = Dd::new(cfg.ratios[d]);
                if d == axis {
                    acc * pred_factor_dxx(x[d], s, ell)
                } else {
                    acc * pred_factor(x[d], s)
                }
            })
        })
        .collect()
}

/// Normalized prediction vector z = C⁻¹t*/Σ(C⁻¹t*) for the point `point`
/// (cell-width units relative to the stencil center).
pub fn build_prediction_vector(
    stencil: &Stencil,
    cfg: &KernelConfig,
    point: (f64, f64),
) -> Result<Vec<f64>> {
    let l = cholesky(&build_covariance(stencil, cfg))?;
    Ok(normalized(&cholesky_solve(&l, &pred_vector(stencil, cfg, point))))
}

fn normalized(z: &[Dd]) -> Vec<f64> {
    let total = z.iter().fold(Dd::ZERO, |a, &b| a + b);
    z.iter().map(|&v| (v / total).to_f64()).collect()
}

/// Second-derivative weights along `axis` at the stencil center (not normalized).
pub fn build_second_derivative_vector(
    stencil: &Stencil,
    cfg: &KernelConfig,
    axis: usize,
) -> Result<Vec<f64>> {
    let l = cholesky(&build_covariance(stencil, cfg))?;
    Ok(cholesky_solve(&l, &dxx_vector(stencil, cfg, axis))
        .iter()
        .map(|v| v.to_f64())
        .collect())
}

/// Faces of a cell in the order east, west, north, south.
pub const FACES: [(f64, f64); 4] = [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)];

/// Quadrature point m on face f, in cell-width units.
pub fn face_point(face: usize, g: f64) -> (f64, f64) {
    match face {
        0 => (0.5, g),
        1 => (-0.5, g),
        2 => (g, 0.5),
        _ => (g, -0.5),
    }
}

/// Precomputed weights of one stencil: per face and quadrature point, and
/// per direction for the cell-centered second derivative.
#[derive(Clone, Debug)]
pub struct PredictionVectorSet {
    pub stencil: Stencil,
    pub kernel: KernelConfig,
    pub quadrature: QuadratureRule,
    /// `faces[f][m]`, faces ordered E, W, N, S (E, W in 1D).
    pub faces: Vec<Vec<SymDot>>,
    /// `second[d]` for d = x (and y in 2D), units 1/length².
    pub second: Vec<SymDot>,
}

impl PredictionVectorSet {
    pub fn build(
        stencil: &Stencil,
        kernel: &KernelConfig,
        q: usize,
        square_cells: bool,
    ) -> Result<PredictionVectorSet> {
        let ndim = kernel.ratios.len();
        let quad = quadrature_rule(if ndim == 1 { 1 } else { q })?;
        let group = grid_group(ndim, square_cells);
        let l = cholesky(&build_covariance(stencil, kernel))?;
        let nfaces = 2 * ndim;
        let mut targets = Vec::new();
        for f in 0..nfaces {
            for &g in &quad.points {
                let p = face_point(f, g);
                targets.push(Target::point(p.0, p.1));
            }
        }
        let dots = build_family(&stencil.offsets, &targets, &group, |t| {
            normalized(&cholesky_solve(&l, &pred_vector(stencil, kernel, t.point)))
        });
        let faces = dots.chunks(quad.len()).map(|c| c.to_vec()).collect();
        let dtargets: Vec<Target> = (0..ndim)
            .map(|d| Target {
                point: (0.0, 0.0),
                axis: Some(d),
            })
            .collect();
        let second = build_family(&stencil.offsets, &dtargets, &group, |t| {
            cholesky_solve(&l, &dxx_vector(stencil, kernel, t.axis.unwrap()))
                .iter()
                .map(|v| v.to_f64())
                .collect()
        });
        Ok(PredictionVectorSet {
            stencil: stencil.clone(),
            kernel: kernel.clone(),
            quadrature: quad,
            faces,
            second,
        })
    }

    /// Text table: face, quadrature index, offset, weight (17 significant digits).
    pub fn dump(&self) -> String {
        let names = ["E", "W", "N", "S"];
        let mut out = String::from("kind face m di dj weight\n");
        for (f, per_face) in self.faces.iter().enumerate() {
            for (m, dot) in per_face.iter().enumerate() {
                for &o in &self.stencil.offsets {
                    let w = dot.weight_at(o).unwrap_or(0.0);
                    let _ = writeln!(out, "z {} {} {} {} {:.16e}", names[f], m, o.0, o.1, w);
                }
            }
        }
        for (d, dot) in self.second.iter().enumerate() {
            for &o in &self.stencil.offsets {
                let w = dot.weight_at(o).unwrap_or(0.0);
                let _ = writeln!(out, "zxx {} 0 {} {} {:.16e}", ["x", "y"][d], o.0, o.1, w);
            }
        }
        out
    }
}
