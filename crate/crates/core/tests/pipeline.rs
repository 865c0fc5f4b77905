use leewave_core::verifier::{verify_nodes, Tolerances};
use leewave_core::{field_record, Config, GridSpec, ProfileConfig, Sampling, DEFAULT_SEED};

const REFERENCE: &str = include_str!("../../../configs/reference.json");
const AFFINE: &str = include_str!("../../../configs/affine.json");

fn affine() -> Config {
    Config {
        density_profile: ProfileConfig::Affine {
            a: 0.5,
            b: 1e-4,
            surface_pressure: Some(1e5),
            integration_constant: None,
        },
        ..Config::default()
    }
}

#[test]
fn shipped_configs_match_defaults() {
    assert_eq!(Config::from_json(REFERENCE).unwrap(), Config::default());
    assert_eq!(Config::from_json(AFFINE).unwrap(), affine());
}

#[test]
fn config_json_round_trip() {
    for cfg in [Config::default(), affine()] {
        let back = Config::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.wave_speed().unwrap(), cfg.wave_speed().unwrap());
    }
}

#[test]
fn both_families_verify_on_random_nodes() {
    for cfg in [Config::default(), affine()] {
        let atm = cfg.atmosphere().unwrap();
        let grid = GridSpec::default_random(DEFAULT_SEED);
        let nodes = grid.nodes(atm.flow()).unwrap();
        let report = verify_nodes(
            &atm,
            &nodes[..200],
            &Tolerances::default(),
            grid.to_string(),
            grid.seed(),
        );
        assert!(report.passed, "{report}");
        assert_eq!(report.nodes, 200);
        assert!(atm.check_monotonicity(&nodes).all_decreasing());
    }
}

#[test]
fn uniform_grid_covers_every_combination() {
    let cfg = Config::default();
    let flow = cfg.flow().unwrap();
    let grid: GridSpec = "q=0:1e4:3,s=-1e4:1e4:4,xi=-3:-0.05:5,tau=0:1:2".parse().unwrap();
    assert_eq!(grid.sampling, Sampling::Uniform);
    assert_eq!(grid.nodes(&flow).unwrap().len(), 3 * 4 * 5 * 2);
}

#[test]
fn field_records_agree_with_the_flow_map() {
    let atm = Config::default().atmosphere().unwrap();
    let flow = atm.flow();
    let grid = GridSpec::default_random(3);
    for node in grid.nodes(flow).unwrap().iter().take(50) {
        let rec = field_record(&atm, node).unwrap();
        let p = flow.flow_map(&node.label, node.t).unwrap();
        assert_eq!((rec.x, rec.y, rec.z), (p.x, p.y, p.z));
        let back = flow.invert_flow_map(&p, node.t).unwrap();
        assert!((back.r - node.label.r).abs() < 1e-6);
        assert!(rec.rho > 0.0 && rec.pressure > 0.0 && rec.temperature > 0.0);
        assert!(rec.gamma_abs > 0.0);
    }
}
