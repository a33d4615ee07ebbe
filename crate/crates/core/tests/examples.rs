//! Runs every example under `examples/` and checks the headline values.

#[path = "../examples/signature_constants.rs"]
mod signature_constants;
#[path = "../examples/polygons.rs"]
mod polygons;
#[path = "../examples/hn_split_lattice.rs"]
mod hn_split_lattice;
#[path = "../examples/raynaud_schemes.rs"]
mod raynaud_schemes;
#[path = "../examples/period_monomials.rs"]
mod period_monomials;
#[path = "../examples/lt_crystal.rs"]
mod lt_crystal;
#[path = "../examples/canonical_tower.rs"]
mod canonical_tower;
#[path = "../examples/report_bundle.rs"]
mod report_bundle;

#[test]
fn signature_constants_example() {
    let out = signature_constants::run().unwrap();
    assert!(out.contains("τ2: k=1 K=7/48 r=2 n=1"));
    assert!(out.contains("threshold τ2 n=2: 23/2352"));
    assert!(out.contains("factor LT_∅^1"));
}

#[test]
fn polygons_example() {
    let out = polygons::run().unwrap();
    assert!(out.contains("reversed above hodge: true"));
}

#[test]
fn hn_split_lattice_example() {
    let out = hn_split_lattice::run().unwrap();
    assert!(out.contains("equals reversed hodge: true"));
    assert!(!out.contains("false"));
}

#[test]
fn raynaud_example() {
    let out = raynaud_schemes::run().unwrap();
    for line in out.lines().filter(|l| l.contains("oracle")) {
        let (lhs, rhs) = line.split_once(" (oracle ").unwrap();
        assert_eq!(lhs.rsplit(' ').next().unwrap(), rhs.trim_end_matches(')'));
    }
}

#[test]
fn period_example() {
    let out = period_monomials::run().unwrap();
    assert!(out.contains("v(t) at p=7: 1/6"));
    assert!(out.contains("τ2: K = 7/48, transport true, margin 17/48"));
}

#[test]
fn lt_crystal_example() {
    let out = lt_crystal::run().unwrap();
    assert!(out.contains("v = 5/24 < 1/4, #solutions 25"));
    assert!(!out.contains("false"));
}

#[test]
fn canonical_tower_example() {
    let out = canonical_tower::run().unwrap();
    assert!(out.contains("level 2: Deg >= 31/2, Ha(G/C) <= 2401/100"));
    assert!(out.contains("deg D^perp >= 199/100, consistent true"));
    assert!(out.contains("appendix (2,3,1): lhs 9/8 holds false"));
}

#[test]
fn report_bundle_example() {
    let out = report_bundle::run().unwrap();
    assert!(out.contains("round trip true"));
}
