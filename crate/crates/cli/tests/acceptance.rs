//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};

use leewave_core::config::{Config, ProfileConfig};
use leewave_core::fd;
use leewave_core::grid::{GridSpec, Node, DEFAULT_SEED};
use leewave_core::kinematics::{LabelPoint, LeeWave, PhysicalPoint};
use leewave_core::thermo::Atmosphere;
use leewave_core::verifier::{self, dispersion_residual, Tolerances};
use leewave_core::vorticity::{self, psi_prime};
use nalgebra::Matrix3;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference_nodes(flow: &LeeWave) -> Vec<Node> {
    GridSpec::default_random(DEFAULT_SEED)
        .nodes(flow)
        .expect("reference grid is admissible")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn dispersion() -> Verdict {
    let cfg = Config::default();
    let site = cfg.site().unwrap();
    let c = verifier::solve_dispersion(cfg.k, cfg.c0, &site, &cfg.constants).map_err(|e| e.to_string())?;
    let residual = dispersion_residual(cfg.k, c, cfg.c0, &site, &cfg.constants).abs() / cfg.constants.g;
    let f = |c: f64| dispersion_residual(cfg.k, c, cfg.c0, &site, &cfg.constants);
    let (mut lo, mut hi) = (0.0, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let bisect = 0.5 * (lo + hi);
    let diff = rel(c, bisect);
    check(
        residual < 1e-12 && diff < 1e-9 && (c - 124.89).abs() < 5e-3,
        format!("c = {c:.12} m/s, residual/g = {residual:.1e}, bisection rel diff = {diff:.1e}"),
    )
}

fn residuals() -> Verdict {
    let exponential = Config::default();
    let affine = Config {
        density_profile: ProfileConfig::Affine {
            a: 0.5,
            b: 1e-4,
            surface_pressure: Some(1e5),
            integration_constant: None,
        },
        ..Config::default()
    };
    let mut details = Vec::new();
    let mut ok = true;
    for (name, cfg) in [("exponential", exponential), ("affine", affine)] {
        let atm = cfg.atmosphere().map_err(|e| e.to_string())?;
        let nodes = reference_nodes(atm.flow());
        let report = verifier::verify_nodes(&atm, &nodes, &Tolerances::default(), "reference", Some(DEFAULT_SEED));
        let worst = |names: &[&str]| {
            names
                .iter()
                .map(|n| report.entry(n).unwrap().max_residual)
                .fold(0.0, f64::max)
        };
        let dynamic = worst(&["euler_x", "euler_y", "euler_z", "mass", "first_law"]);
        let state = worst(&["state"]);
        ok &= nodes.len() == 1000 && report.failed_nodes == 0 && dynamic < 1e-6 && state < 1e-12;
        details.push(format!("{name}: max {dynamic:.1e}, state {state:.1e}"));
    }
    check(ok, format!("1000 nodes, seed {DEFAULT_SEED}; {}", details.join("; ")))
}

fn jacobian() -> Verdict {
    let flow = Config::default().flow().unwrap();
    let nodes = reference_nodes(&flow);
    let (mut det_err, mut inv_err, mut time_err) = (0.0f64, 0.0f64, 0.0f64);
    for (i, n) in nodes.iter().enumerate() {
        let j = flow.jacobian(&n.label, n.t).map_err(|e| e.to_string())?;
        let inv = flow.inverse_jacobian(&n.label, n.t).map_err(|e| e.to_string())?;
        let xi = flow.vertical_phase(n.label.s, n.label.r);
        det_err = det_err.max((j.0.determinant() - (1.0 - (2.0 * xi).exp())).abs());
        // rows of J are labels, rows of the inverse are coordinates
        let prod = inv.0 * j.0;
        inv_err = inv_err.max((prod - Matrix3::identity()).abs().max());
        let other = nodes[(i * 7 + 3) % nodes.len()].t;
        let j2 = flow.jacobian(&n.label, other).map_err(|e| e.to_string())?;
        time_err = time_err.max((j.0.determinant() - j2.0.determinant()).abs());
    }
    check(
        det_err < 1e-13 && inv_err < 1e-12 && time_err < 1e-13,
        format!("|det - (1 - e^2xi)| {det_err:.1e}, |J J^-1 - I| {inv_err:.1e}, det(t1) - det(t2) {time_err:.1e}"),
    )
}

fn monotonicity() -> Verdict {
    let atm = Config::default().atmosphere().map_err(|e| e.to_string())?;
    let flow = atm.flow();
    let nodes = reference_nodes(flow);
    let report = atm.check_monotonicity(&nodes);
    let mut worst = 0.0f64;
    for n in &nodes {
        let p = flow.flow_map(&n.label, n.t).unwrap();
        let h = fd::step(p.z, flow.length_scale());
        let state = |dz: f64| {
            let l = flow
                .invert_flow_map(&PhysicalPoint::new(p.x, p.y, p.z + dz), n.t)
                .map_err(|e| e.to_string())?;
            atm.state(l.s, l.r).map_err(|e| e.to_string())
        };
        let drho = fd::try_central4(|d| state(d).map(|s| s.rho), h)?;
        let dp = fd::try_central4(|d| state(d).map(|s| s.pressure), h)?;
        worst = worst
            .max(rel(drho, atm.density_dz(&n.label, n.t).unwrap()))
            .max(rel(dp, atm.pressure_dz(&n.label, n.t).unwrap()));
    }
    check(
        report.all_decreasing() && worst < 1e-6,
        format!(
            "{} nodes, {} density / {} pressure violations, closed form vs FD rel {worst:.1e}",
            report.nodes, report.density_violations, report.pressure_violations
        ),
    )
}

fn vorticity_check() -> Verdict {
    let flow = Config::default().flow().unwrap();
    let mut worst = 0.0f64;
    for n in &reference_nodes(&flow) {
        let exact = vorticity::vorticity_vec(&flow, &n.label, n.t).unwrap();
        let numeric = vorticity::numeric_vorticity(&flow, &n.label, n.t).map_err(|e| e.to_string())?;
        worst = worst.max((exact.to_vector() - numeric.to_vector()).norm() / exact.magnitude);
    }
    let equator = Config {
        latitude_deg: 0.0,
        ..Config::default()
    }
    .flow()
    .unwrap();
    let w = *equator.wave();
    let mut exact_reduction = true;
    for (q, xi, t) in [(0.0, -0.3, 0.0), (1234.0, -1.0, 17.0), (7e3, -2.5, 60.0)] {
        let label = LabelPoint::new(q, 0.0, equator.trough_m(0.0) + xi / w.k);
        let g = vorticity::vorticity_vec(&equator, &label, t).unwrap();
        let e2 = (2.0 * equator.vertical_phase(0.0, label.r)).exp();
        let gerstner = -2.0 * w.k * w.c * e2 / (1.0 - e2);
        exact_reduction &= g.gamma1 == 0.0 && g.gamma3 == 0.0 && rel(g.gamma2, gerstner) < 4.0 * f64::EPSILON;
    }
    check(
        worst < 1e-6 && exact_reduction,
        format!("numerical curl rel {worst:.1e}; equator s=0 reduces to (0, gamma2, 0): {exact_reduction}"),
    )
}

fn psi_check() -> Verdict {
    let p = vorticity::psi_analysis(3e-4).map_err(|e| e.to_string())?;
    let closed = vorticity::closed_form_check(&p);
    let a_3sf = (p.a / 1e5).round() * 1e5;
    let stationary = psi_prime(p.x1, p.a).abs();
    let magnitude = (p.x1 / 1.5e-8).log10().abs();
    let flow = Config::default().flow().unwrap();
    let (mut checked, mut positive) = (0, 0);
    for n in &reference_nodes(&flow) {
        if flow.site().f_at(n.label.s) == 0.0 {
            continue;
        }
        checked += 1;
        positive += usize::from(vorticity::dgamma_dz(&flow, &n.label, n.t).map_err(|e| e.to_string())? > 0.0);
    }
    check(
        a_3sf == 8.89e7
            && stationary < 1e-12
            && p.psi_min > 0.0
            && closed.relative_difference < 1e-10
            && magnitude < 0.5
            && checked == positive,
        format!(
            "A = {:.6e}, X1 = {:.6e}, Psi'(X1) = {stationary:.1e}, \
             Psi(X1) = {:.13}, closed form rel diff {:.1e}, d|gamma|/dz > 0 at {positive}/{checked}",
            p.a, p.x1, p.psi_min, closed.relative_difference
        ),
    )
}

fn trajectory() -> Verdict {
    let flow = Config::default().flow().unwrap();
    let label = LabelPoint::new(2000.0, 500.0, flow.trough_m(500.0) - 1.0 / flow.wave().k);
    let report = verifier::trajectory_consistency(&flow, &label, flow.period(), 256).map_err(|e| e.to_string())?;
    let relative = report.max_error / report.amplitude;
    let order = verifier::observed_order(&flow, &label, flow.period(), 64).map_err(|e| e.to_string())?;
    check(
        relative < 1e-6 && (3.7..=4.3).contains(&order),
        format!("256 steps: error {relative:.1e} of the orbit radius; observed order {order:.2} (64 -> 128 steps)"),
    )
}

fn perturbation() -> Verdict {
    let base = Config::default();
    let cfg = Config {
        c: Some(1.01 * base.wave_speed().unwrap()),
        ..base
    };
    let atm: Atmosphere = cfg.atmosphere().map_err(|e| e.to_string())?;
    let nodes = reference_nodes(atm.flow());
    let report = verifier::verify_nodes(&atm, &nodes, &Tolerances::default(), "reference", Some(DEFAULT_SEED));
    let euler = ["euler_x", "euler_y", "euler_z"]
        .iter()
        .map(|n| report.entry(n).unwrap().max_residual)
        .fold(0.0, f64::max);
    check(
        euler > 1e-3 && !report.passed,
        format!(
            "c * 1.01: max Euler residual {euler:.2e}, report passed = {}",
            report.passed
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_leewave"))
            .args([
                "field",
                "--seed",
                "7",
                "--grid",
                "q=0:1e4:4,s=-1e4:1e4:4,xi=-3:-0.05:4,tau=0:1:4",
                "--out",
            ])
            .arg(&path)
            .env_remove("LEEWAVE_CONFIG")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("leewave field exited with {status}"));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let (a, b) = (run("a.csv")?, run("b.csv")?);
    let rows = a.iter().filter(|&&c| c == b'\n').count();
    check(
        a == b && !a.is_empty(),
        format!(
            "two runs with seed 7: {} bytes, {rows} lines, identical = {}",
            a.len(),
            a == b
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("dispersion", dispersion),
        ("governing-equation residuals", residuals),
        ("Jacobian identities", jacobian),
        ("monotonicity of density and pressure", monotonicity),
        ("vorticity", vorticity_check),
        ("Psi analysis and growth of |gamma|", psi_check),
        ("trajectory cross-validation", trajectory),
        ("perturbation sensitivity", perturbation),
        ("determinism of field export", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
