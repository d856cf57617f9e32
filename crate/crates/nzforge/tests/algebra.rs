use num_bigint::BigInt;
use num_complex::Complex64;
use nzforge::algebra::*;
use nzforge::Error;
use proptest::prelude::*;

const XY: [&str; 2] = ["x", "y"];

fn p(s: &str, vars: &[&str]) -> MultiPoly {
    MultiPoly::parse(s, vars).unwrap()
}

#[test]
fn parse_expressions() {
    let a = p("(x + 1)^2 - 2*x*y", &XY);
    assert_eq!(a, p("x^2 + 2*x + 1 - 2*x*y", &XY));
    assert_eq!(p("-(x - y)", &XY), p("y - x", &XY));
    assert_eq!(p("3", &XY), MultiPoly::constant(&XY, 3));
    assert!(MultiPoly::parse("x + z", &XY).is_err());
    assert!(MultiPoly::parse("x^-1", &XY).is_err());
    assert!(MultiPoly::parse("(x + 1", &XY).is_err());
}

#[test]
fn display_parses_back() {
    let a = p("-7*x^3*y + 2*y^2 - 1 + x", &XY);
    assert_eq!(MultiPoly::parse(&a.to_string(), &XY).unwrap(), a);
}

#[test]
fn evaluation() {
    let a = p("x^2*y - 3", &XY);
    let v = a.eval(&[Complex64::new(0.0, 1.0), Complex64::new(2.0, 0.0)]);
    assert!((v - Complex64::new(-5.0, 0.0)).norm() < 1e-15);
}

#[test]
fn resultant_of_simple_pair() {
    let a = p("x^2 - 2", &XY);
    let b = p("x - y", &XY);
    let r = resultant(&a, &b, "x").unwrap();
    assert_eq!(r, p("y^2 - 2", &XY));
    assert_eq!(sylvester_resultant(&a, &b, "x").unwrap(), r);
}

#[test]
fn resultant_detects_common_root() {
    let a = p("(x - y)*(x + 1)", &XY);
    let b = p("(x - y)*(x - 3)", &XY);
    assert!(resultant(&a, &b, "x").unwrap().is_zero());
}

#[test]
fn resultant_needs_the_variable() {
    let a = p("y + 1", &XY);
    let b = p("x - y", &XY);
    assert!(matches!(resultant(&a, &b, "x"), Err(Error::DegenerateInput(_))));
}

#[test]
fn resultant_budget() {
    let a = p("(x + y + 1)^6 - x*y", &XY);
    let b = p("(x - 2*y)^5 + y^3 - x", &XY);
    assert!(matches!(resultant_with_budget(&a, &b, "x", 3), Err(Error::SwellLimit(_))));
    assert!(resultant_with_budget(&a, &b, "x", 1 << 20).is_ok());
}

#[test]
fn determinant_of_integer_matrix() {
    let v = ["x"];
    let c = |k: i64| MultiPoly::constant(&v, k);
    let d = bareiss_det(vec![vec![c(2), c(1), c(0)], vec![c(1), c(3), c(1)], vec![c(0), c(1), c(4)]]);
    assert_eq!(d, c(18));
}

#[test]
fn squarefree_part() {
    let a = p("(x + 1)^2*(y - x)*(x*y - 2)^3", &XY);
    let s = squarefree_and_content(&a);
    let want = p("(x + 1)*(y - x)*(x*y - 2)", &XY);
    assert!(s == want || s == want.neg(), "{s}");
    let c = p("6*x^2 - 6", &XY);
    let s = squarefree_and_content(&c);
    assert!(s == p("x^2 - 1", &XY) || s == p("1 - x^2", &XY));
}

#[test]
fn gcd_with_monomial_and_integer_parts() {
    let a = p("6*x^2*y*(x - y)", &XY);
    let b = p("4*x*y^3*(x - y)*(x + 1)", &XY);
    assert_eq!(gcd(&a, &b), p("2*x*y*(x - y)", &XY));
}

#[test]
fn newton_matrix_conventions() {
    // figure-eight A-polynomial
    let a = p("l*m^8 - l*m^6 - 2*l*m^4 - l*m^2 + l - m^4 - l^2*m^4", &["l", "m"]);
    let m = newton_matrix(&a).unwrap();
    assert_eq!(m.shape(), (5, 3));
    assert_eq!(m.rows[0], vec![0, 1, 0]);
    assert_eq!(m.rows[2], vec![-1, -2, -1]);
    assert_eq!(m.to_poly(), a.with_vars(&["l", "m"]).unwrap());
    assert_eq!(m.symmetry_variants().len(), 16);
    assert_eq!(m.reverse_rows().match_up_to_symmetry(&m).as_deref(), Some("identity"));
    let skew = NewtonMatrix::new(vec![vec![1, 2, 0], vec![0, 0, 5]]).unwrap();
    assert_eq!(skew.reverse_cols().negate().match_up_to_symmetry(&skew).as_deref(), Some("reverse cols, negate"));
    assert_eq!(skew.transpose().match_up_to_symmetry(&skew).as_deref(), Some("transpose"));
}

#[test]
fn newton_matrix_rejects_odd_m_powers() {
    let a = p("l*m - 1", &["l", "m"]);
    assert!(newton_matrix(&a).is_err());
}

#[test]
fn newton_matrix_validation() {
    assert!(NewtonMatrix::new(vec![]).is_err());
    assert!(NewtonMatrix::new(vec![vec![1, 0], vec![0]]).is_err());
    assert!(NewtonMatrix::new(vec![vec![0, 0], vec![1, 1]]).is_err());
}

fn small_poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((0u32..4, 0u32..4, -5i64..6), 1..6)
        .prop_map(|terms| MultiPoly::from_terms(&XY, terms.into_iter().map(|(a, b, c)| (vec![a, b], BigInt::from(c)))))
}

fn nonconstant_in_x() -> impl Strategy<Value = MultiPoly> {
    small_poly().prop_filter("positive degree in x", |q| q.degree(0) > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_roundtrip(a in small_poly()) {
        prop_assert_eq!(MultiPoly::parse(&a.to_string(), &XY).unwrap(), a);
    }

    #[test]
    fn exact_division_roundtrip(a in small_poly(), b in small_poly()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(a.mul(&b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn gcd_divides_and_contains_common_factor(g in small_poly(), a in small_poly(), b in small_poly()) {
        prop_assume!(!g.is_zero() && !a.is_zero() && !b.is_zero());
        let (ga, gb) = (g.mul(&a), g.mul(&b));
        let h = gcd(&ga, &gb);
        prop_assert!(ga.exact_div(&h).is_some());
        prop_assert!(gb.exact_div(&h).is_some());
        prop_assert!(h.exact_div(&g).is_some(), "gcd {} misses {}", h, g);
    }

    #[test]
    fn subresultant_matches_sylvester(a in nonconstant_in_x(), b in nonconstant_in_x()) {
        let r = resultant(&a, &b, "x").unwrap();
        let s = sylvester_resultant(&a, &b, "x").unwrap();
        prop_assert_eq!(r, s);
    }

    #[test]
    fn resultant_vanishes_at_common_roots(a in nonconstant_in_x(), y0 in -3i64..4) {
        // b shares the root x = y0 with a(x) - a(y0)
        let y = BigInt::from(y0);
        let shifted = a.sub(&a.substitute_int(0, &y));
        prop_assume!(shifted.degree(0) > 0);
        let b = p(&format!("x - ({y0})"), &XY);
        let r = resultant(&shifted, &b, "x").unwrap();
        prop_assert!(r.is_zero());
    }
}
