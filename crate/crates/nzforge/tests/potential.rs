use num_complex::Complex64;
use nzforge::catalog;
use nzforge::dilog::li2;
use nzforge::potential::*;
use nzforge::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn figure_eight() -> PotentialExpression {
    PotentialExpression::parse("Li(x) - Li(x^-1*m^-2) - 4*log(m)*log(x*m)", &["x"]).unwrap()
}

fn random_logs(rng: &mut ChaCha8Rng, k: usize) -> Vec<Complex64> {
    (0..k).map(|_| c(rng.gen_range(-0.7..0.7), rng.gen_range(-2.5..2.5))).collect()
}

fn fd_gradient(v: &PotentialExpression, l: &[Complex64], h: f64) -> Vec<Complex64> {
    (0..l.len())
        .map(|i| {
            let mut a = l.to_vec();
            let mut b = l.to_vec();
            a[i] += h;
            b[i] -= h;
            (v.evaluate_logs(&a).unwrap() - v.evaluate_logs(&b).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn direct_evaluation_of_figure_eight() {
    let v = figure_eight();
    let (x, m) = (c(0.3, 0.8), c(1.1, -0.2));
    let l = v.logs(&[x], m);
    let want = li2(x) - li2(1.0 / (x * m * m)) - 4.0 * m.ln() * (x.ln() + m.ln());
    assert!((v.evaluate_logs(&l).unwrap() - want).norm() < 1e-12);
}

#[test]
fn parse_rejects_unknown_variables_and_junk() {
    assert!(PotentialExpression::parse("Li(q)", &["x"]).is_err());
    assert!(PotentialExpression::parse("Li(x) + sin(x)", &["x"]).is_err());
    assert!(PotentialExpression::parse("Li(x)*Li(x)", &["x"]).is_err());
}

#[test]
fn display_roundtrip_on_catalog() {
    for e in catalog::load().unwrap() {
        let vars: Vec<&str> = e.shape_vars.iter().map(|s| s.as_str()).collect();
        let again = PotentialExpression::parse(&e.potential.to_string(), &vars).unwrap();
        assert_eq!(again, e.potential, "{}", e.name);
    }
}

#[test]
fn gradient_matches_finite_differences_on_catalog() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for e in catalog::load().unwrap() {
        let v = e.working_potential().unwrap();
        for _ in 0..4 {
            let l = random_logs(&mut rng, v.vars.len());
            let g = v.gradient_logs(&l).unwrap();
            let fd = fd_gradient(&v, &l, 1e-5);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).norm() <= 1e-6 * a.norm().max(1.0), "{}: {a} vs {b}", e.name);
            }
        }
    }
}

#[test]
fn hessian_matches_finite_differences_of_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in ["5_2", "pretzel", "K5_13"] {
        let v = catalog::get(name).unwrap().working_potential().unwrap();
        let l = random_logs(&mut rng, v.vars.len());
        let h = v.hessian_logs(&l).unwrap();
        let step = 1e-6;
        for j in 0..l.len() {
            let mut a = l.clone();
            let mut b = l.clone();
            a[j] += step;
            b[j] -= step;
            let ga = v.gradient_logs(&a).unwrap();
            let gb = v.gradient_logs(&b).unwrap();
            for i in 0..l.len() {
                let fd = (ga[i] - gb[i]) / (2.0 * step);
                assert!((fd - h[i][j]).norm() <= 1e-5 * h[i][j].norm().max(1.0), "{name} ({i},{j})");
                assert!((h[i][j] - h[j][i]).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn singular_argument_is_reported() {
    let v = figure_eight();
    let l = vec![c(0.0, 0.0), c(0.3, 0.0)];
    assert!(matches!(v.gradient_logs(&l), Err(Error::SingularArgument(_))));
}

#[test]
fn figure_eight_gluing_system() {
    let v = figure_eight();
    let sys = GluingSystem::from_potential(&v).unwrap();
    assert_eq!(sys.equations.len(), 1);
    // at the complete structure x = exp(i pi / 3)
    let x = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    assert!(sys.residual(&[x], c(1.0, 0.0)) < 1e-12);
    assert!(sys.residual(&[c(0.3, 0.1)], c(1.0, 0.0)) > 1e-3);
    let cleared = sys.cleared();
    assert_eq!(cleared.len(), 2);
    assert!(cleared[1].vars().iter().any(|s| s == "l"));
    // longitude: l = -1 at the complete structure
    let pt = [x, c(1.0, 0.0), c(-1.0, 0.0)];
    assert!(cleared[1].eval(&pt).norm() < 1e-12);
}

#[test]
fn validation_catches_asymmetric_form() {
    let mut v = figure_eight();
    v.bilinear[0][1] += num_rational::Rational64::from_integer(1);
    assert!(matches!(v.validate(), Err(Error::Schema { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn figure_eight_gradient(a in -0.6f64..0.6, b in -2.8f64..2.8, u in -0.4f64..0.4, w in -0.8f64..0.8) {
        let v = figure_eight();
        let l = vec![c(a, b), c(u, w)];
        let g = v.gradient_logs(&l).unwrap();
        let fd = fd_gradient(&v, &l, 1e-5);
        for (x, y) in g.iter().zip(&fd) {
            prop_assert!((x - y).norm() <= 1e-6 * x.norm().max(1.0));
        }
    }
}
