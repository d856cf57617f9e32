use std::collections::BTreeMap;

use nzforge::apoly::{eliminate, EliminationOptions};
use nzforge::catalog;
use nzforge::saddle::{complete_structure, SolveOptions};
use nzforge::triangulation::*;
use nzforge::Error;

fn figure_eight() -> Triangulation {
    Triangulation {
        name: "4_1".into(),
        terms: vec![TetraTerm::new(1, 2, 1, 3, 4), TetraTerm::new(4, 3, -1, 2, 1)],
        meridian: MeridianForm { coeffs: BTreeMap::from([(4, 1), (2, -1), (1, -1), (3, 1)]), u_coeff: -2 },
        notes: String::new(),
    }
}

#[test]
fn figure_eight_validates() {
    let r = figure_eight().validate().unwrap();
    assert_eq!(r.labels, 4);
    assert_eq!(r.tetrahedra, 2);
}

#[test]
fn label_used_twice_is_rejected() {
    let mut t = figure_eight();
    t.terms[1] = TetraTerm::new(4, 3, -1, 2, 2);
    assert!(matches!(t.validate(), Err(Error::Gluing(_))));
}

#[test]
fn degenerate_meridian_is_rejected() {
    let mut t = figure_eight();
    t.meridian.u_coeff = 0;
    assert!(matches!(t.validate(), Err(Error::Meridian(_))));
    let mut t = figure_eight();
    t.meridian.coeffs.insert(9, 1);
    assert!(matches!(t.validate(), Err(Error::Meridian(_))));
}

#[test]
fn json_field_names() {
    let v = serde_json::to_value(TetraTerm::new(1, 5, -1, 4, 3)).unwrap();
    assert_eq!(v["in"], serde_json::json!([1, 5]));
    assert_eq!(v["out"], serde_json::json!([4, 3]));
    assert_eq!(v["eps"], -1);
}

#[test]
fn reduction_keeps_one_free_label_per_tetrahedron() {
    let t = figure_eight();
    let red = t.reduce().unwrap();
    assert_eq!(red.n_free(), 1);
    let pot = t.build_potential().unwrap();
    assert_eq!(pot.n(), 1);
}

#[test]
fn triangulation_potential_gives_the_catalog_volume() {
    for name in ["4_1", "5_2", "K5_13", "K6_22"] {
        let e = catalog::get(name).unwrap();
        let v = e.triangulation.as_ref().unwrap().build_potential().unwrap();
        let (sol, _) = complete_structure(&v, &SolveOptions::default()).unwrap();
        assert!((sol.volume - e.expected_volume).abs() < 1e-4, "{name}: {}", sol.volume);
    }
}

#[test]
fn ptb_words() {
    assert!(matches!(ptb_triangulation("LLL"), Err(Error::NotHyperbolic(_))));
    assert!(matches!(ptb_triangulation("LXR"), Err(Error::NotHyperbolic(_))));
    assert_eq!(ptb_triangulation("LLR").unwrap().terms.len(), 3);
    // conjugate words give the same bundle
    let a = ptb_triangulation("LRR").unwrap().build_potential().unwrap();
    let b = ptb_triangulation("RLR").unwrap().build_potential().unwrap();
    let va = complete_structure(&a, &SolveOptions::default()).unwrap().0.volume;
    let vb = complete_structure(&b, &SolveOptions::default()).unwrap().0.volume;
    assert!((va - vb).abs() < 1e-10);
}

#[test]
fn ptb_lr_is_the_figure_eight() {
    let v = ptb_triangulation("LR").unwrap().build_potential().unwrap();
    let (sol, sys) = complete_structure(&v, &SolveOptions::default()).unwrap();
    assert!((sol.volume - 2.029883212819307).abs() < 1e-10);
    let a = eliminate(&sys, &EliminationOptions::default()).unwrap();
    let e = catalog::get("4_1").unwrap();
    let m = e.newton_matrix.unwrap();
    assert!(a.matrix().unwrap().match_up_to_symmetry(&m).is_some());
}
