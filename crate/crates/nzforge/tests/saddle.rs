use num_complex::Complex64;
use nzforge::potential::PotentialExpression;
use nzforge::saddle::*;

fn fig8() -> PotentialExpression {
    PotentialExpression::parse("Li(x) - Li(x^-1*m^-2) - 4*log(m)*log(x*m)", &["x"]).unwrap()
}

fn quick() -> SolveOptions {
    SolveOptions { starts_per_var: 40, ..Default::default() }
}

#[test]
fn figure_eight_complete_structure() {
    let v = fig8();
    let (g, sys) = complete_structure(&v, &quick()).unwrap();
    let want = Complex64::new(0.5, 3f64.sqrt() / 2.0);
    assert!((g.x[0] - want).norm() < 1e-10, "{}", g.x[0]);
    assert!((g.volume - 2.029883212819307).abs() < 1e-10);
    assert!((g.ell + 1.0).norm() < 1e-10, "{}", g.ell);
    assert!(g.residual < 1e-10);
    assert!(!sys.equations.is_empty());
}

#[test]
fn figure_eight_saddle_relation() {
    let v = fig8();
    let (g, _) = complete_structure(&v, &quick()).unwrap();
    let chk = volume_at(&g, &v).unwrap();
    assert!((chk.saddle_gap - chk.branch_term).abs() < 1e-10, "{chk:?}");
}

#[test]
fn figure_eight_taylor() {
    let v = fig8();
    let (g, _) = complete_structure(&v, &quick()).unwrap();
    let c = taylor_v(&v, &g, 5).unwrap();
    // finite difference oracle on the continued path
    let h = 1e-3;
    let p = continue_solution(&v, &g.logs, Complex64::new(h, 0.0), &Default::default()).unwrap();
    let q = continue_solution(&v, &g.logs, Complex64::new(-h, 0.0), &Default::default()).unwrap();
    let d = (p.last().two_v - q.last().two_v) / (2.0 * h);
    println!("{c:?} {d}");
    assert!((d - c[1]).norm() < 1e-5);
    assert!((c[0].exp() - 1.0).norm() < 1e-10);
}
