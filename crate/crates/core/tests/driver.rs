use gpmood::cli::*;
use gpmood::euler::{prim_to_cons, Primitive, GAMMA};
use gpmood::mesh::{Boundary, BoundarySet};
use gpmood::mood::Method;
use gpmood::problems::ProblemKind;
use gpmood::timeint::Integrator;
use gpmood::Error;
use std::path::PathBuf;

fn args(s: &str) -> Vec<String> {
    std::iter::once("gpmood".to_string())
        .chain(s.split_whitespace().map(String::from))
        .collect()
}

fn tmpdir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("gpmood-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn small_vortex(method: Method, n: usize) -> RunConfig {
    let mut c = RunConfig::new(ProblemKind::Vortex, method);
    c.nx = n;
    c.ny = n;
    c
}

#[test]
fn byte_identical_reruns() {
    let mut outputs = Vec::new();
    for k in 0..2 {
        let mut c = RunConfig::new(ProblemKind::Sedov, Method::GpMood5);
        c.nx = 32;
        c.ny = 32;
        c.time.tmax = 0.02;
        c.output_dir = tmpdir(&format!("det{k}"));
        let sim = run(c.clone()).unwrap();
        let mut files: Vec<_> = std::fs::read_dir(&c.output_dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        assert_eq!(files.len(), 2);
        outputs.push((files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>(), sim.step));
        let log = std::fs::read_to_string(c.output_dir.join("sedov_gp-mood5_32x32.log")).unwrap();
        assert!(log.lines().next().unwrap().starts_with("step=1 t="));
        assert!(log.lines().last().unwrap().starts_with("summary "));
        let _ = std::fs::remove_dir_all(&c.output_dir);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn snapshot_roundtrip() {
    let mut c = RunConfig::new(ProblemKind::Sedov, Method::GpMood3);
    c.nx = 16;
    c.ny = 16;
    c.time.tmax = 0.01;
    let mut sim = Simulation::new(c).unwrap();
    sim.run(|_, _| {}).unwrap();
    let snap = sim.snapshot();
    let back = Snapshot::from_csv(&snap.to_csv()).unwrap();
    assert_eq!(back, snap);
    assert!(snap.rows.iter().any(|r| r[6] == 1.0) || snap.rows.iter().all(|r| r[6] == 3.0));

    let mut c = RunConfig::new(ProblemKind::ShuOsher, Method::GpMood5);
    c.nx = 32;
    c.time.tmax = 0.01;
    let sim = Simulation::new(c).unwrap();
    let snap = sim.snapshot();
    let text = snap.to_csv();
    assert!(text.lines().nth(1) == Some("x,rho,u,p,order"));
    assert_eq!(Snapshot::from_csv(&text).unwrap(), snap);
    assert!(Snapshot::from_csv("# t=0\nx,q\n").is_err());
}

#[test]
fn periodic_conservation() {
    for method in [Method::GpMood3, Method::GpMood7, Method::PolMood3] {
        let mut sim = Simulation::new(small_vortex(method, 24)).unwrap();
        let t0 = sim.totals();
        for _ in 0..100 {
            sim.step().unwrap();
        }
        let t1 = sim.totals();
        for c in 0..4 {
            let scale = t0[c].abs().max(t0[0]);
            assert!((t1[c] - t0[c]).abs() <= 1e-12 * scale, "{method:?} component {c}: {} vs {}", t0[c], t1[c]);
        }
    }
}

#[test]
fn uniform_state_preserved() {
    for integrator in [Integrator::Rk3, Integrator::Rk4] {
        let mut c = small_vortex(Method::GpMood5, 8);
        c.time.integrator = integrator;
        c.time.tmax = 1e9;
        let mesh = c.mesh().unwrap();
        let u = prim_to_cons(&Primitive { rho: 1.3, u: 0.7, v: -0.4, p: 2.1 }, GAMMA);
        let mut field = mesh.new_field();
        for (i, j) in mesh.interior() {
            field[mesh.idx(i, j)] = u;
        }
        let mut sim = Simulation::with_state(c, mesh.clone(), field, BoundarySet::uniform(Boundary::Periodic)).unwrap();
        for _ in 0..1000 {
            let r = sim.step().unwrap();
            assert_eq!(r.max_decremented_fraction(), 0.0);
        }
        for (i, j) in mesh.interior() {
            assert_eq!(sim.field[mesh.idx(i, j)], u, "{integrator:?}");
        }
    }
}

#[test]
fn cli_parsing() {
    let c = parse_config(args("--problem sedov --method gp-mood7 --nx 64 --ny 32 --no-csd --riemann hll")).unwrap();
    assert_eq!((c.nx, c.ny, c.csd, c.quadrature), (64, 32, false, 4));
    assert_eq!(c.riemann, gpmood::euler::RiemannSolver::Hll);
    assert_eq!(c.time.integrator, Integrator::Rk3);

    let c = parse_config(args("--problem implosion --ell-cells 6 --dt-power 1.5 --integrator rk4")).unwrap();
    assert_eq!(c.length_scale, gpmood::gp::LengthScale::Relative(6.0));
    assert_eq!(c.time.dt_reduction, gpmood::timeint::DtReduction::Power(1.5));
    assert_eq!(c.time.integrator, Integrator::Rk4);

    // Invalid combinations and unknown input.
    assert!(parse_config(args("--method gp-mood7 --quadrature 2")).is_err());
    assert!(parse_config(args("--problem nope")).is_err());
    assert!(parse_config(args("--method gp-mood9")).is_err());
    assert!(parse_config(args("--bogus 1")).is_err());
    assert!(parse_config(args("--cfl -1")).is_err());
    assert!(parse_config(args("--ell 1 --ell-cells 2")).is_err());
    assert!(matches!(parse_config(args("--help")), Err(Error::Help(_))));
}

#[test]
fn config_file_merging() {
    let dir = tmpdir("cfg");
    let path = dir.join("run.cfg");
    std::fs::write(&path, "# comment\nproblem = shu_osher\nmethod = pol-mood3\nnx = 128\nno_csd = true\n").unwrap();
    let c = parse_config(args(&format!("--config {} --nx 64", path.display()))).unwrap();
    assert_eq!(c.problem.kind, ProblemKind::ShuOsher);
    assert_eq!(c.method, Method::PolMood3);
    assert_eq!(c.nx, 64);
    assert!(!c.csd);
    std::fs::write(&path, "frobnicate = 3\n").unwrap();
    assert!(parse_config(args(&format!("--config {}", path.display()))).is_err());
    std::fs::write(&path, "just words\n").unwrap();
    assert!(parse_config(args(&format!("--config {}", path.display()))).is_err());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn inadmissible_state_is_fatal() {
    let c = small_vortex(Method::GpMood3, 8);
    let mesh = c.mesh().unwrap();
    let mut field = mesh.new_field();
    for (i, j) in mesh.interior() {
        field[mesh.idx(i, j)] = [1.0, 0.0, 0.0, 1.0];
    }
    field[mesh.idx(3, 3)] = [1.0, 0.0, 0.0, -1.0];
    let mut sim = Simulation::with_state(c, mesh, field, BoundarySet::uniform(Boundary::Periodic)).unwrap();
    assert!(sim.step().is_err());
}

#[test]
fn l1_and_eoc() {
    let c = small_vortex(Method::GpMood3, 10);
    let mesh = c.mesh().unwrap();
    let mut a = mesh.new_field();
    let mut b = mesh.new_field();
    for (i, j) in mesh.interior() {
        a[mesh.idx(i, j)] = [1.0, 2.0, 3.0, 4.0];
        b[mesh.idx(i, j)] = [1.5, 2.0, 3.0, 4.0];
    }
    assert_eq!(l1_error(&a, &a, &mesh), [0.0; 4]);
    let e = l1_error(&a, &b, &mesh);
    assert!((e[0] - 0.5 * 400.0).abs() < 1e-10);
    assert_eq!(&e[1..], &[0.0; 3]);
    assert_eq!(eoc(4.0, 1.0), 2.0);
    assert_eq!(eoc(1.0, 1.0), 0.0);
    assert!((eoc(1.29737576e-02, 6.60244975e-04) - 4.30).abs() < 5e-3);
}

#[test]
fn jets_survive_startup() {
    for (kind, tmax) in [(ProblemKind::JetSingle, 0.002), (ProblemKind::JetDouble, 0.0005)] {
        let mut c = RunConfig::new(kind, Method::GpMood3);
        c.nx = 60;
        c.ny = 60;
        c.time.tmax = tmax;
        let mut sim = Simulation::new(c).unwrap();
        sim.run(|_, _| {}).unwrap();
        let top = sim.field[sim.mesh.idx(30, if kind == ProblemKind::JetSingle { 0 } else { 59 })];
        assert!(top[2].abs() > 1.0, "{kind:?}: no inflow momentum");
    }
}
