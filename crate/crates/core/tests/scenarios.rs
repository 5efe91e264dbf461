use beamho_core::{load_scenario, BeamKind};

fn beam_counts(name: &str) -> (usize, Vec<(usize, usize)>) {
    let s = load_scenario(name).unwrap();
    let counts = s
        .deployment
        .stations
        .iter()
        .map(|b| (b.access_beams.len(), b.link_beams.len()))
        .collect();
    (s.deployment.num_stations(), counts)
}

#[test]
fn built_in_layouts_have_the_expected_shape() {
    let (n, c) = beam_counts("env3");
    assert_eq!(n, 21);
    assert!(c.iter().all(|&x| x == (1, 8)));
    let (n, c) = beam_counts("fig4");
    assert_eq!(n, 2);
    assert!(c.iter().all(|&x| x == (1, 4)));
}

#[test]
fn loading_is_deterministic() {
    for name in ["env1", "env2", "env3", "fig4"] {
        let a = load_scenario(name).unwrap();
        let b = load_scenario(name).unwrap();
        assert_eq!(a.deployment.fingerprint(), b.deployment.fingerprint(), "{name}");
        assert_eq!(a.resolved_json().unwrap(), b.resolved_json().unwrap(), "{name}");
    }
}

#[test]
fn env2_only_narrows_the_link_beams() {
    let e1 = load_scenario("env1").unwrap();
    let e2 = load_scenario("env2").unwrap();
    assert_eq!(e1.deployment.num_stations(), e2.deployment.num_stations());
    assert_eq!(e1.deployment.bounds, e2.deployment.bounds);
    assert_eq!(e1.deployment.propagation, e2.deployment.propagation);
    assert_eq!(e1.training, e2.training);
    assert_eq!(e1.evaluation, e2.evaluation);
    assert_eq!(e1.baseline, e2.baseline);
    for (a, b) in e1.deployment.stations.iter().zip(&e2.deployment.stations) {
        assert_eq!(a.position, b.position);
        assert_eq!(a.access_beams, b.access_beams);
        assert_eq!(a.link_beams.len(), b.link_beams.len());
        for (x, y) in a.link_beams.iter().zip(&b.link_beams) {
            assert_eq!(x.kind, BeamKind::Link);
            assert_eq!((x.azimuth_deg, x.max_gain_dbi), (y.azimuth_deg, y.max_gain_dbi));
            assert!(y.beamwidth_deg < x.beamwidth_deg);
        }
    }
}

#[test]
fn fig4_markers_separate_access_and_link_rankings() {
    let s = load_scenario("fig4").unwrap();
    let x2 = s.marker("x2").unwrap();
    let d = &s.deployment;
    assert!(d.best_access_rsrp(1, &x2) > d.best_access_rsrp(0, &x2));
    assert!(d.best_link_rsrp(0, &x2) > d.best_link_rsrp(1, &x2));
    assert!(s.marker("x1").is_ok());
    assert!(s.marker("x9").is_err());
}

#[test]
fn built_in_deployments_cover_their_area() {
    for name in ["env1", "env2", "env3", "fig4"] {
        let s = load_scenario(name).unwrap();
        assert!(s.deployment.validate().is_empty(), "{name}: {:?}", s.deployment.validate());
    }
}
