use std::path::PathBuf;

use nzforge::catalog::*;
use nzforge::Error;

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nzforge-catalog-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn copy_entry(dir: &PathBuf, file: &str, text: &str) {
    let index = serde_json::json!({"entries": [{"name": file.trim_end_matches(".json"), "file": file, "aliases": []}]});
    std::fs::write(dir.join("index.json"), index.to_string()).unwrap();
    std::fs::write(dir.join(file), text).unwrap();
}

const SRC: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/catalog");

#[test]
fn twenty_four_entries() {
    let all = load().unwrap();
    assert_eq!(all.len(), 24);
    let from_disk = load_from(std::path::Path::new(SRC)).unwrap();
    assert_eq!(from_disk.len(), 24);
    for (a, b) in all.iter().zip(&from_disk) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.potential, b.potential);
    }
}

#[test]
fn aliases_resolve() {
    assert_eq!(get("figure_eight").unwrap().name, "4_1");
    assert_eq!(get("pretzel").unwrap().name, "pretzel_-2_3_7");
    assert_eq!(get("LLR").unwrap().name, "ptb_L2R");
    assert_eq!(get("LRRR").unwrap().name, "ptb_LR3");
    assert_eq!(get("10_132").unwrap().name, "K5_9");
}

#[test]
fn unknown_name_suggests_close_matches() {
    match get("figure8") {
        Err(Error::NotFound { name, close }) => {
            assert_eq!(name, "figure8");
            assert_eq!(close.first().map(|s| s.as_str()), Some("figure_eight"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(get("bogus"), Err(Error::NotFound { .. })));
}

#[test]
fn stored_matrix_orientation() {
    let m = get("6_3").unwrap().newton_matrix.unwrap();
    assert_eq!(m.shape(), (15, 7));
    let m = get("4_1").unwrap().newton_matrix.unwrap();
    assert_eq!(m.shape(), (5, 3));
}

#[test]
fn shape_counts_and_sources() {
    let e = get("pretzel").unwrap();
    assert_eq!(e.n_shapes(), 3);
    assert!(e.explicit_apoly.is_some());
    let k = get("K4_4").unwrap();
    assert!(k.suspect_typo);
    assert!(k.explicit_apoly_corrected.is_some());
    assert_eq!(k.potential_source, PotentialSource::Triangulation);
    assert!(k.start_points().is_empty());
    assert!(!get("5_2").unwrap().start_points().is_empty());
}

#[test]
fn corrections_apply() {
    let e = get("7_3").unwrap();
    let (i, j, v) = e.matrix_corrections[0];
    assert_eq!(e.corrected_matrix().unwrap().rows[i][j], v);
    assert_ne!(e.newton_matrix.as_ref().unwrap().rows[i][j], v);
}

#[test]
fn unsorted_shape_vars_rejected() {
    let dir = scratch("unsorted");
    let text = std::fs::read_to_string(format!("{SRC}/5_2.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["shape_vars"] = serde_json::json!(["y", "x"]);
    copy_entry(&dir, "5_2.json", &v.to_string());
    assert!(matches!(load_from(&dir), Err(Error::Schema { .. })));
}

#[test]
fn bad_volume_rejected() {
    let dir = scratch("volume");
    let text = std::fs::read_to_string(format!("{SRC}/4_1.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["expected_volume"] = serde_json::json!(-1.0);
    copy_entry(&dir, "4_1.json", &v.to_string());
    assert!(matches!(load_from(&dir), Err(Error::Schema { .. })));
}

#[test]
fn malformed_json_rejected() {
    let dir = scratch("malformed");
    copy_entry(&dir, "4_1.json", "{\"name\": ");
    assert!(matches!(load_from(&dir), Err(Error::Schema { .. })));
}

#[test]
fn printed_equations_of_the_figure_eight() {
    let checks = check_printed_equations(&get("4_1").unwrap()).unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c.matched == Some(EquationForm::Direct)));
}

#[test]
fn printed_equations_detect_the_pretzel_longitude() {
    let checks = check_printed_equations(&get("pretzel").unwrap()).unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks[..3].iter().all(|c| c.matched.is_some()));
    assert_eq!(checks[3].label, "longitude");
    assert!(checks[3].matched.is_none());
    assert!(check_printed_equations(&get("6_1").unwrap()).is_err());
}

#[test]
fn locus_check_on_a_small_entry() {
    let chk = locus_check(&get("5_2").unwrap(), 5, true).unwrap();
    assert_eq!(chk.reference, ReferenceKind::NewtonMatrix);
    assert!(chk.report.max_residual < 1e-10);
    assert_eq!(chk.report.samples.len(), 5);
}
