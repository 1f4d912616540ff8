//! Run configuration, orchestration, snapshots and error norms.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::euler::{cons_to_prim, RiemannSolver, GAMMA};
use crate::gp::{KernelConfig, LengthScale, StencilShape};
use crate::mesh::{BoundarySet, Cons, Mesh, NGHOST};
use crate::mood::{CurvatureMode, DetectionConfig, Method, MoodSolver, MoodStats};
use crate::problems::{ProblemKind, ProblemSpec};
use crate::reconstruct::resolve_quadrature;
use crate::timeint::{advance, compute_dt, DtReduction, Integrator, TimeConfig};

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "GPMOOD_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Diamond,
    Cross,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Rk3,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RiemannArg {
    Hll,
    Hllc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurvatureArg {
    Gp,
    Cd,
}

#[derive(Parser, Debug, Clone)]
#[command(name = "gpmood", about = "GP-MOOD solver for the 1D/2D Euler equations")]
pub struct Args {
    /// Key = value file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "vortex")]
    pub problem: String,
    #[arg(long, default_value = "gp-mood3")]
    pub method: String,
    #[arg(long, value_enum, default_value = "diamond")]
    pub stencil: ShapeArg,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Absolute GP length scale.
    #[arg(long, conflicts_with = "ell_cells")]
    pub ell: Option<f64>,
    /// GP length scale in units of the cell width.
    #[arg(long)]
    pub ell_cells: Option<f64>,
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,
    /// dt ≤ Δ^α; "none" disables.
    #[arg(long)]
    pub dt_power: Option<String>,
    #[arg(long)]
    pub no_csd: bool,
    #[arg(long, default_value_t = 5.0)]
    pub sigma_v: f64,
    #[arg(long, default_value_t = 5.0)]
    pub sigma_p: f64,
    #[arg(long, value_enum)]
    pub riemann: Option<RiemannArg>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Face quadrature points, overriding the method's pairing.
    #[arg(long)]
    pub quadrature: Option<usize>,
    #[arg(long, value_enum, default_value = "gp")]
    pub curvature: CurvatureArg,
    /// Simulation-time interval between snapshots (final snapshot always).
    #[arg(long)]
    pub output_interval: Option<f64>,
    #[arg(long, default_value = "output")]
    pub output_dir: PathBuf,
    /// Write the prediction-vector table of the top scheme and exit.
    #[arg(long)]
    pub dump_weights: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub method: Method,
    pub shape: StencilShape,
    pub nx: usize,
    pub ny: usize,
    pub length_scale: LengthScale,
    pub time: TimeConfig,
    pub riemann: RiemannSolver,
    pub quadrature: usize,
    pub csd: bool,
    pub sigma_v: f64,
    pub sigma_p: f64,
    pub curvature: CurvatureMode,
    pub output_interval: Option<f64>,
    pub output_dir: PathBuf,
    pub dump_weights: bool,
}

impl RunConfig {
    /// Problem defaults with the method's integrator pairing.
    pub fn new(problem: ProblemKind, method: Method) -> RunConfig {
        let spec = problem.spec();
        let (integrator, dt_reduction) = default_integrator(problem, method);
        let top = method.ladder()[0];
        RunConfig {
            method,
            shape: StencilShape::Diamond,
            nx: spec.nx,
            ny: spec.ny,
            length_scale: spec.length_scale,
            time: TimeConfig {
                integrator,
                cfl: spec.cfl,
                dt_reduction,
                tmax: spec.tmax,
            },
            riemann: spec.riemann,
            quadrature: if spec.ndim == 1 { 1 } else { top.quadrature() },
            csd: true,
            sigma_v: 5.0,
            sigma_p: 5.0,
            curvature: CurvatureMode::Gp,
            output_interval: None,
            output_dir: PathBuf::from("output"),
            dump_weights: false,
            problem: spec,
        }
    }

    pub fn mesh(&self) -> Result<Mesh> {
        self.problem.mesh(self.nx, self.ny, NGHOST)
    }

    pub fn validate(&self) -> Result<()> {
        self.time.validate()?;
        if self.problem.ndim == 2 {
            resolve_quadrature(self.method.ladder()[0], Some(self.quadrature))?;
        }
        let (LengthScale::Absolute(v) | LengthScale::Relative(v)) = self.length_scale;
        if !(v > 0.0) {
            return Err(Error::Config(format!("length scale must be positive, got {v}")));
        }
        Ok(())
    }
}

/// RK4 with dt ≤ Δ^{(2R+1)/4} for high-order GP ladders on the smooth and
/// 1D studies; RK3 otherwise.
pub fn default_integrator(problem: ProblemKind, method: Method) -> (Integrator, DtReduction) {
    let high = matches!(method, Method::GpMood5 | Method::GpMood7);
    let study = matches!(problem, ProblemKind::Vortex | ProblemKind::ShuOsher);
    if high && study {
        let r = method.ladder()[0].gp_radius().unwrap() as f64;
        (Integrator::Rk4, DtReduction::Power((2.0 * r + 1.0) / 4.0))
    } else {
        (Integrator::Rk3, DtReduction::None)
    }
}

/// Reads a key = value file as (flag, value) pairs; boolean `false` entries
/// are dropped.
fn config_file_args(path: &Path) -> Result<Vec<(String, Option<String>)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k == "config" {
            return Err(Error::Parse("nested config files are not supported".into()));
        }
        match v {
            "true" => out.push((k, None)),
            "false" => {}
            _ => out.push((k, Some(v.to_string()))),
        }
    }
    Ok(out)
}

/// Flags that set the same quantity and so override each other.
fn flag_group(key: &str) -> &str {
    match key {
        "ell-cells" => "ell",
        k => k,
    }
}

fn parse_args<I: IntoIterator<Item = String>>(args: I) -> Result<Args> {
    Args::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Error::Help(e.to_string()),
        _ => Error::Parse(e.to_string()),
    })
}

/// Parses command-line arguments (program name first), merging an optional
/// config file underneath them.
pub fn parse_config<I: IntoIterator<Item = String>>(args: I) -> Result<RunConfig> {
    let argv: Vec<String> = args.into_iter().collect();
    let first = parse_args(argv.clone())?;
    let args = match &first.config {
        Some(path) => {
            let given: Vec<String> = argv[1..]
                .iter()
                .filter_map(|a| a.strip_prefix("--"))
                .map(|a| flag_group(a.split('=').next().unwrap()).to_string())
                .collect();
            let mut merged = vec![argv[0].clone()];
            for (k, v) in config_file_args(path)? {
                if given.iter().any(|g| g == flag_group(&k)) {
                    continue;
                }
                merged.push(format!("--{k}"));
                merged.extend(v);
            }
            merged.extend(argv[1..].iter().cloned());
            parse_args(merged)?
        }
        None => first,
    };
    config_from_args(&args)
}

pub fn config_from_args(a: &Args) -> Result<RunConfig> {
    let problem = ProblemKind::parse(&a.problem)?;
    let method = Method::parse(&a.method)?;
    let mut c = RunConfig::new(problem, method);
    c.shape = match a.stencil {
        ShapeArg::Diamond => StencilShape::Diamond,
        ShapeArg::Cross => StencilShape::Cross,
    };
    if let Some(n) = a.nx {
        c.nx = n;
        if a.ny.is_none() && c.problem.ndim == 2 {
            c.ny = n * c.problem.ny / c.problem.nx;
        }
    }
    if let Some(n) = a.ny {
        c.ny = n;
    }
    if let Some(v) = a.cfl {
        c.time.cfl = v;
    }
    if let Some(v) = a.ell {
        c.length_scale = LengthScale::Absolute(v);
    }
    if let Some(v) = a.ell_cells {
        c.length_scale = LengthScale::Relative(v);
    }
    if let Some(i) = a.integrator {
        c.time.integrator = match i {
            IntegratorArg::Rk3 => Integrator::Rk3,
            IntegratorArg::Rk4 => Integrator::Rk4,
        };
    }
    if let Some(p) = &a.dt_power {
        c.time.dt_reduction = if p == "none" {
            DtReduction::None
        } else {
            DtReduction::Power(p.parse().map_err(|_| Error::Parse(format!("bad dt power '{p}'")))?)
        };
    }
    c.csd = !a.no_csd;
    c.sigma_v = a.sigma_v;
    c.sigma_p = a.sigma_p;
    if let Some(r) = a.riemann {
        c.riemann = match r {
            RiemannArg::Hll => RiemannSolver::Hll,
            RiemannArg::Hllc => RiemannSolver::Hllc,
        };
    }
    if let Some(t) = a.tmax {
        c.time.tmax = t;
    }
    if c.problem.ndim == 2 {
        c.quadrature = resolve_quadrature(method.ladder()[0], a.quadrature)?;
    } else if let Some(q) = a.quadrature {
        if q != 1 {
            return Err(Error::Config("1D runs use a single face point".into()));
        }
    }
    c.curvature = match a.curvature {
        CurvatureArg::Gp => CurvatureMode::Gp,
        CurvatureArg::Cd => CurvatureMode::CenteredDifference,
    };
    c.output_interval = a.output_interval;
    c.output_dir = match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) => PathBuf::from(d),
        None => a.output_dir.clone(),
    };
    c.dump_weights = a.dump_weights;
    c.validate()?;
    Ok(c)
}

/// Per-step summary, aggregated over stages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Stage statistics in stage order.
    pub stages: Vec<MoodStats>,
}

impl StepReport {
    pub fn max_fog_fraction(&self) -> f64 {
        self.stages.iter().map(|s| s.fog_fraction()).fold(0.0, f64::max)
    }

    pub fn max_decremented_fraction(&self) -> f64 {
        self.stages.iter().map(|s| s.decremented_fraction()).fold(0.0, f64::max)
    }

    /// One key=value log line; percentages are the maximum over stages.
    pub fn log_line(&self) -> String {
        let cells = self.stages.first().map_or(1, |s| s.cells).max(1) as f64;
        let pct = |f: fn(&MoodStats) -> usize| self.stages.iter().map(f).max().unwrap_or(0) as f64 / cells * 100.0;
        let mut s = format!(
            "step={} t={:.10e} dt={:.6e} cad%={:.4} pad%={:.4} dmp%={:.4} u2_fail%={:.4} csd_accept%={:.4} decremented%={:.4} fog%={:.4} iters={}",
            self.step,
            self.t,
            self.dt,
            pct(|s| s.cad_fail),
            pct(|s| s.pad_fail),
            pct(|s| s.dmp_fail),
            pct(|s| s.u2_fail),
            pct(|s| s.csd_accept),
            self.max_decremented_fraction() * 100.0,
            self.max_fog_fraction() * 100.0,
            self.stages.iter().map(|s| s.iterations).max().unwrap_or(0),
        );
        if let Some(last) = self.stages.last() {
            for (k, n) in last.per_order.iter().enumerate() {
                let _ = write!(s, " level{k}={n}");
            }
        }
        s
    }
}

/// A configured solver together with its evolving state.
pub struct Simulation {
    pub config: RunConfig,
    pub mesh: Mesh,
    pub solver: MoodSolver,
    pub field: Vec<Cons>,
    pub t: f64,
    pub step: usize,
    /// Ladder index per cell from the last stage (ghost-inclusive layout).
    pub orders: Vec<u8>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Simulation> {
        config.validate()?;
        let mesh = config.mesh()?;
        let (field, bc) = config.problem.initialize(&mesh);
        Simulation::with_state(config, mesh, field, bc)
    }

    pub fn with_state(config: RunConfig, mesh: Mesh, field: Vec<Cons>, bc: BoundarySet) -> Result<Simulation> {
        let kernel = KernelConfig::new(config.length_scale, mesh.dx, mesh.dy, mesh.ndim);
        let mut detection = DetectionConfig::for_mesh(&mesh);
        detection.csd_enabled = config.csd;
        detection.sigma_v = config.sigma_v;
        detection.sigma_p = config.sigma_p;
        detection.curvature = config.curvature;
        let solver = MoodSolver::new(
            mesh.clone(),
            bc,
            GAMMA,
            config.riemann,
            config.method,
            &kernel,
            config.shape,
            config.quadrature,
            detection,
        )?;
        Ok(Simulation {
            orders: vec![0; mesh.len()],
            config,
            mesh,
            solver,
            field,
            t: 0.0,
            step: 0,
        })
    }

    pub fn done(&self) -> bool {
        self.t >= self.config.time.tmax
    }

    /// Advances one time step to at most `t_stop`.
    pub fn step_to(&mut self, t_stop: f64) -> Result<StepReport> {
        let mut tc = self.config.time;
        tc.tmax = t_stop.min(tc.tmax);
        self.solver.fill_ghosts(&mut self.field, self.t);
        let dt = compute_dt(&self.field, &self.mesh, GAMMA, &tc, self.t)?;
        let mut stages = Vec::new();
        let mut orders = Vec::new();
        let solver = &self.solver;
        let mesh = &self.mesh;
        let mut stage = |s: &mut Vec<Cons>, base: &[Cons], cdt: f64, time: f64| -> Result<(Vec<Cons>, Vec<Cons>)> {
            let out = solver.stage(s, base, cdt, time);
            check_admissible(&out.accepted, mesh)?;
            stages.push(out.stats);
            orders = out.orders;
            Ok((out.accepted, out.divergence))
        };
        let next = advance(tc.integrator, &self.field, self.t, dt, &mut stage)?;
        check_admissible(&next, mesh)?;
        self.field = next;
        self.orders = orders;
        self.t = if self.t + dt >= tc.tmax { tc.tmax } else { self.t + dt };
        self.step += 1;
        Ok(StepReport {
            step: self.step,
            t: self.t,
            dt,
            stages,
        })
    }

    pub fn step(&mut self) -> Result<StepReport> {
        self.step_to(self.config.time.tmax)
    }

    /// Runs to `tmax`, calling `on_step` after each step.
    pub fn run<F: FnMut(&Simulation, &StepReport)>(&mut self, mut on_step: F) -> Result<()> {
        while !self.done() {
            let r = self.step()?;
            on_step(self, &r);
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::from_field(&self.field, &self.mesh, self.t, Some((&self.orders, &self.solver)))
    }

    /// Density on interior cells, row-major.
    pub fn density(&self) -> Vec<f64> {
        self.mesh.interior().map(|(i, j)| self.field[self.mesh.idx(i, j)][0]).collect()
    }

    /// Sums of conserved quantities times the cell volume.
    pub fn totals(&self) -> [f64; 4] {
        totals(&self.field, &self.mesh)
    }
}

pub fn totals(field: &[Cons], mesh: &Mesh) -> [f64; 4] {
    let mut s = [0.0; 4];
    for (i, j) in mesh.interior() {
        let u = &field[mesh.idx(i, j)];
        for k in 0..4 {
            s[k] += u[k];
        }
    }
    s.map(|v| v * mesh.cell_volume())
}

fn check_admissible(field: &[Cons], mesh: &Mesh) -> Result<()> {
    for (i, j) in mesh.interior() {
        let w = cons_to_prim(&field[mesh.idx(i, j)], GAMMA);
        if !(w.rho > 0.0 && w.p > 0.0 && w.u.is_finite() && w.v.is_finite()) {
            return Err(Error::State {
                i,
                j,
                rho: w.rho,
                p: w.p,
            });
        }
    }
    Ok(())
}

/// Per-cell primitive output.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub ndim: usize,
    pub time: f64,
    /// (x, y, rho, u, v, p, order) per interior cell.
    pub rows: Vec<[f64; 7]>,
}

impl Snapshot {
    pub fn from_field(field: &[Cons], mesh: &Mesh, time: f64, orders: Option<(&[u8], &MoodSolver)>) -> Snapshot {
        let rows = mesh
            .interior()
            .map(|(i, j)| {
                let k = mesh.idx(i, j);
                let (x, y) = mesh.center(i as isize, j as isize);
                let y = if mesh.ndim == 1 { 0.0 } else { y };
                let w = cons_to_prim(&field[k], GAMMA);
                let order = orders.map_or(0.0, |(o, s)| s.ladder[o[k] as usize].order() as f64);
                [x, y, w.rho, w.u, w.v, w.p, order]
            })
            .collect();
        Snapshot {
            ndim: mesh.ndim,
            time,
            rows,
        }
    }

    pub fn header(&self) -> &'static str {
        if self.ndim == 1 {
            "x,rho,u,p,order"
        } else {
            "x,y,rho,u,v,p,order"
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# t={:.16e}\n{}\n", self.time, self.header());
        let cols: &[usize] = if self.ndim == 1 { &[0, 2, 3, 5] } else { &[0, 1, 2, 3, 4, 5] };
        for r in &self.rows {
            for &c in cols {
                let _ = write!(s, "{:.16e},", r[c]);
            }
            let _ = writeln!(s, "{}", r[6] as u32);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Snapshot> {
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?;
        let time = first
            .strip_prefix("# t=")
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| Error::Parse("missing time line".into()))?;
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let ndim = match header {
            "x,rho,u,p,order" => 1,
            "x,y,rho,u,v,p,order" => 2,
            h => return Err(Error::Parse(format!("unknown header '{h}'"))),
        };
        let mut rows = Vec::new();
        for line in lines {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<_>>()?;
            let row = match (ndim, v.len()) {
                (1, 5) => [v[0], 0.0, v[1], v[2], 0.0, v[3], v[4]],
                (2, 7) => [v[0], v[1], v[2], v[3], v[4], v[5], v[6]],
                _ => return Err(Error::Parse(format!("bad row '{line}'"))),
            };
            rows.push(row);
        }
        Ok(Snapshot { ndim, time, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Σ|q − q_ref|·dV over interior cells, per conserved component.
pub fn l1_error(field: &[Cons], reference: &[Cons], mesh: &Mesh) -> [f64; 4] {
    let mut e = [0.0; 4];
    for (i, j) in mesh.interior() {
        let k = mesh.idx(i, j);
        for c in 0..4 {
            e[c] += (field[k][c] - reference[k][c]).abs();
        }
    }
    e.map(|v| v * mesh.cell_volume())
}

/// Experimental order of convergence between a coarse and a refined error.
pub fn eoc(coarse: f64, refined: f64) -> f64 {
    (coarse / refined).ln() / 2f64.ln()
}

/// Share of the density variance held by the local odd-even (checkerboard)
/// mode in a centered window covering `frac` of each axis. The mode is
/// measured on 2×2 blocks as (a − b − c + d)/4, so mirror-symmetric
/// patterns are seen as well.
pub fn checkerboard_fraction(rho: &[f64], nx: usize, ny: usize, frac: f64) -> f64 {
    let wx = ((nx as f64 * frac) as usize / 4 * 2).max(1);
    let wy = ((ny as f64 * frac) as usize / 4 * 2).max(1);
    let (i0, j0) = ((nx / 2).saturating_sub(wx), (ny / 2).saturating_sub(wy));
    let (i1, j1) = ((nx / 2 + wx).min(nx), (ny / 2 + wy).min(ny));
    let at = |i: usize, j: usize| rho[j * nx + i];
    let n = ((i1 - i0) * (j1 - j0)) as f64;
    let mean = (j0..j1).flat_map(|j| (i0..i1).map(move |i| (i, j))).map(|(i, j)| at(i, j)).sum::<f64>() / n;
    let var = (j0..j1)
        .flat_map(|j| (i0..i1).map(move |i| (i, j)))
        .map(|(i, j)| (at(i, j) - mean).powi(2))
        .sum::<f64>()
        / n;
    if var == 0.0 {
        return 0.0;
    }
    let (mut e, mut blocks) = (0.0, 0usize);
    for j in (j0..j1 - 1).step_by(2) {
        for i in (i0..i1 - 1).step_by(2) {
            let q = (at(i, j) - at(i + 1, j) - at(i, j + 1) + at(i + 1, j + 1)) / 4.0;
            e += q * q;
            blocks += 1;
        }
    }
    e / blocks as f64 / var
}

pub const CHECKERBOARD_THRESHOLD: f64 = 0.1;

/// Runs a configuration end to end, writing snapshots and a log to the
/// output directory. Returns the final simulation.
pub fn run(config: RunConfig) -> Result<Simulation> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let stem = format!(
        "{}_{}_{}x{}",
        config.problem.kind.name(),
        config.method.name(),
        config.nx,
        if config.problem.ndim == 1 { 1 } else { config.ny }
    );
    if config.dump_weights {
        let kernel_mesh = config.mesh()?;
        let kernel = KernelConfig::new(config.length_scale, kernel_mesh.dx, kernel_mesh.dy, kernel_mesh.ndim);
        let top = config.method.ladder()[0];
        if let Some(r) = top.gp_radius() {
            let stencil = crate::gp::Stencil::new(r, config.shape, kernel_mesh.ndim);
            let set = crate::gp::PredictionVectorSet::build(&stencil, &kernel, config.quadrature, kernel_mesh.square_cells())?;
            fs::write(dir.join(format!("{stem}_weights.txt")), set.dump())?;
        }
    }
    let start = Instant::now();
    let mut sim = Simulation::new(config)?;
    let mut log = fs::File::create(dir.join(format!("{stem}.log")))?;
    let interval = sim.config.output_interval;
    let mut next_out = interval;
    let mut nout = 0usize;
    let mut max_troubled: f64 = 0.0;
    sim.snapshot().write(&dir.join(format!("{stem}_{nout:04}.csv")))?;
    while !sim.done() {
        let stop = next_out.unwrap_or(sim.config.time.tmax);
        let r = match sim.step_to(stop) {
            Ok(r) => r,
            Err(e) => {
                sim.snapshot().write(&dir.join(format!("{stem}_diagnostic.csv")))?;
                writeln!(log, "error={e}")?;
                return Err(e);
            }
        };
        max_troubled = max_troubled.max(r.max_decremented_fraction());
        writeln!(log, "{}", r.log_line())?;
        if let (Some(ti), Some(t_out)) = (interval, next_out) {
            if sim.t >= t_out && !sim.done() {
                nout += 1;
                sim.snapshot().write(&dir.join(format!("{stem}_{nout:04}.csv")))?;
                next_out = Some(t_out + ti);
            }
        }
    }
    nout += 1;
    sim.snapshot().write(&dir.join(format!("{stem}_{nout:04}.csv")))?;
    writeln!(
        log,
        "summary wall_s={:.3} steps={} t={:.10e} max_troubled%={:.4}",
        start.elapsed().as_secs_f64(),
        sim.step,
        sim.t,
        max_troubled * 100.0
    )?;
    Ok(sim)
}
