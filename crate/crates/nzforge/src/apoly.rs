//! A-polynomials: elimination of the shape variables, canonical form,
//! property checks and numeric zero-locus verification.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Signed;
use serde::Serialize;
use rayon::prelude::*;

use crate::algebra::{gcd, newton_matrix, resultant_with_budget, squarefree_and_content, MultiPoly, NewtonMatrix};
use crate::error::{Error, Result};
use crate::potential::{GluingSystem, PotentialExpression};
use crate::saddle::{continue_solution, ContinuationOptions, SaddleSolution};

#[derive(Clone, Debug, PartialEq)]
pub struct APolynomial {
    /// polynomial in (l, m)
    pub poly: MultiPoly,
    pub canonical: bool,
    pub warning: Option<String>,
}

impl APolynomial {
    pub fn matrix(&self) -> Result<NewtonMatrix> {
        newton_matrix(&self.poly)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub integer_coefficients: bool,
    pub even_m_powers: bool,
    pub reciprocal_symmetry: bool,
    pub corner_coefficients_unit: bool,
    pub details: Vec<String>,
}

impl PropertyReport {
    pub fn all(&self) -> bool {
        self.integer_coefficients && self.even_m_powers && self.reciprocal_symmetry && self.corner_coefficients_unit
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EliminationOptions {
    /// total terms allowed in intermediate polynomials
    pub term_budget: usize,
    /// elimination orders tried; their results are combined by gcd
    pub max_paths: usize,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions { term_budget: 2_000_000, max_paths: 12 }
    }
}

const LM: [&str; 2] = ["l", "m"];

fn has_l(p: &MultiPoly) -> bool {
    p.index_of("l").is_some_and(|i| p.degree(i) > 0)
}

fn uses(p: &MultiPoly, v: &str) -> bool {
    p.index_of(v).is_some_and(|i| p.degree(i) > 0)
}

/// Content removal and square-free reduction after each resultant.
fn clean(r: &MultiPoly) -> MultiPoly {
    let r = r.divide_monomial_content();
    let r = if has_l(&r) {
        let li = r.index_of("l").unwrap();
        let c = r.content_in(li);
        r.exact_div(&c).expect("content divides")
    } else {
        // drop the factors that only involve m
        let mut c: Option<MultiPoly> = None;
        for (i, v) in r.vars().iter().enumerate() {
            if v == "m" || r.degree(i) == 0 {
                continue;
            }
            let ci = r.content_in(i);
            c = Some(match c {
                None => ci,
                Some(prev) => gcd(&prev, &ci),
            });
        }
        match c {
            Some(c) if !c.is_constant() => r.exact_div(&c).expect("content divides"),
            _ => r,
        }
    };
    squarefree_and_content(&r)
}

fn key(p: &MultiPoly, v: &str) -> (bool, u32, usize) {
    (has_l(p), p.degree_in(v), p.nterms())
}

fn run_path(eqs: &[MultiPoly], order: &[String], rule: usize, budget: usize) -> Result<Vec<MultiPoly>> {
    let mut cur: Vec<MultiPoly> = eqs.to_vec();
    for v in order {
        let (mut with, without): (Vec<MultiPoly>, Vec<MultiPoly>) = cur.into_iter().partition(|q| uses(q, v));
        if with.is_empty() {
            cur = without;
            continue;
        }
        with.sort_by_key(|q| key(q, v));
        let pick = rule % with.len();
        let piv_idx = if has_l(&with[pick]) { 0 } else { pick };
        let piv = with[piv_idx].clone();
        let mut next = without;
        for (i, q) in with.iter().enumerate() {
            if i == piv_idx {
                continue;
            }
            let g = gcd(&piv, q);
            let (p1, q1) = if g.is_constant() {
                (piv.clone(), q.clone())
            } else {
                (piv.exact_div(&g).unwrap(), q.exact_div(&g).unwrap())
            };
            if !uses(&p1, v) || !uses(&q1, v) {
                continue;
            }
            let r = resultant_with_budget(&p1, &q1, v, budget)?;
            if r.nterms() > budget {
                return Err(Error::SwellLimit(r.nterms()));
            }
            let r = clean(&r);
            if !r.is_zero() && !r.is_constant() {
                next.push(r);
            }
        }
        cur = next;
    }
    Ok(cur)
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Eliminate the shape variables from the cleared gluing and longitude
/// equations by iterated resultants over several orders.
pub fn eliminate(sys: &GluingSystem, opts: &EliminationOptions) -> Result<APolynomial> {
    let eqs = sys.cleared();
    if !eqs.iter().any(has_l) {
        return Err(Error::NoLongitudeVariable);
    }
    let shapes: Vec<String> = sys.vars.iter().filter(|v| *v != "m").cloned().collect();
    let d = sys.longitude.d;
    let mut paths: Vec<(Vec<String>, usize)> = Vec::new();
    for order in permutations(&shapes) {
        for rule in [0, 1] {
            paths.push((order.clone(), rule));
        }
    }
    paths.truncate(opts.max_paths.max(1));
    let mut acc: Option<MultiPoly> = None;
    let mut last_err = None;
    let results: Vec<Result<Vec<MultiPoly>>> =
        paths.par_iter().map(|(order, rule)| run_path(&eqs, order, *rule, opts.term_budget)).collect();
    for res in results {
        match res {
            Ok(res) => {
                if let Some(p) = res.into_iter().find(has_l) {
                    let p = p.with_vars(&LM)?;
                    acc = Some(match acc {
                        None => p,
                        Some(a) => gcd(&a, &p),
                    });
                }
            }
            Err(e @ Error::SwellLimit(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let p = match (acc, last_err) {
        (Some(p), _) => p,
        (None, Some(e)) => return Err(e),
        (None, None) => return Err(Error::NoLongitudeVariable),
    };
    let mut a = canonicalize(&p)?;
    if d == 2 {
        a.warning = Some("longitude equation fixes l^2 only; polynomial is in l^2".into());
    }
    Ok(a)
}

/// Content, square-free and l-free cleanup, exponent shift and the sign rule:
/// the first nonzero entry in m^2-major, l-minor order is positive.
pub fn canonicalize(p: &MultiPoly) -> Result<APolynomial> {
    if p.is_zero() || !has_l(p) {
        return Err(Error::NoLongitudeVariable);
    }
    let p = p.with_vars(&LM)?;
    let c = p.content_in(0);
    let p = p.exact_div(&c).expect("content divides");
    let p = squarefree_and_content(&p).divide_monomial_content();
    let first = p.terms().min_by_key(|(e, _)| (e[1], e[0])).map(|(_, c)| c.clone()).unwrap();
    let p = if first.is_negative() { p.neg() } else { p };
    Ok(APolynomial { poly: p, canonical: true, warning: None })
}

fn hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn verify_properties(a: &APolynomial) -> PropertyReport {
    let p = match a.poly.with_vars(&LM) {
        Ok(p) => p,
        Err(e) => {
            return PropertyReport {
                integer_coefficients: true,
                even_m_powers: false,
                reciprocal_symmetry: false,
                corner_coefficients_unit: false,
                details: vec![e.to_string()],
            }
        }
    };
    let mut details = Vec::new();
    let odd: Vec<u32> = p.terms().filter(|(e, _)| e[1] % 2 == 1).map(|(e, _)| e[1]).collect::<BTreeSet<_>>().into_iter().collect();
    if !odd.is_empty() {
        details.push(format!("odd m powers {odd:?}"));
    }
    let p = p.divide_monomial_content();
    let (dl, dm) = (p.degree(0), p.degree(1));
    let rev = MultiPoly::from_terms(&LM, p.terms().map(|(e, c)| (vec![dl - e[0], dm - e[1]], c.clone())));
    let symmetric = rev == p || rev == p.neg();
    if !symmetric {
        details.push("not invariant under l -> 1/l, m -> 1/m".into());
    }
    let pts: Vec<(i64, i64)> = p.terms().map(|(e, _)| (e[0] as i64, e[1] as i64)).collect();
    let mut corners_ok = true;
    for (i, j) in hull(&pts) {
        let c = p.coeff(&[i as u32, j as u32]);
        if c.abs() != BigInt::from(1) {
            corners_ok = false;
            details.push(format!("corner l^{i} m^{j} has coefficient {c}"));
        }
    }
    PropertyReport {
        integer_coefficients: true,
        even_m_powers: odd.is_empty(),
        reciprocal_symmetry: symmetric,
        corner_coefficients_unit: corners_ok,
        details,
    }
}

/// |A(l, m)| / sum |c l^i m^j|
pub fn relative_residual(a: &MultiPoly, l: Complex64, m: Complex64) -> f64 {
    let a = a.with_vars(&LM).expect("polynomial in l and m");
    let pt = [l, m];
    let den = a.eval_abs(&pt);
    if den == 0.0 {
        return 0.0;
    }
    a.eval(&pt).norm() / den
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusSample {
    pub u: [f64; 2],
    pub ell: [f64; 2],
    pub m: [f64; 2],
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroLocusReport {
    /// the symmetry image of the matrix that fits best
    pub variant: String,
    pub max_residual: f64,
    pub samples: Vec<LocusSample>,
    /// best residual of each variant, identity first
    pub variants: Vec<(String, f64)>,
}

/// Sample points u_k on the disc |u| <= radius, spread in angle.
pub fn disc_samples(n: usize, radius: f64) -> Vec<Complex64> {
    let golden = 2.399_963_229_728_653;
    (0..n)
        .map(|k| {
            let r = radius * (0.35 + 0.65 * (k + 1) as f64 / n as f64);
            Complex64::from_polar(r, 0.3 + golden * k as f64)
        })
        .collect()
}

/// (l, m) pairs on the geometric branch at the given u values.
pub fn locus_points(v: &PotentialExpression, geo: &SaddleSolution, us: &[Complex64]) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    let opts = ContinuationOptions::default();
    us.iter()
        .map(|&u| {
            let path = continue_solution(v, &geo.logs, geo.u() + u, &opts)?;
            let s = path.last();
            Ok((u, s.ell, s.u.exp()))
        })
        .collect()
}

/// Continue the geometric solution to `samples` points with |u| <= 0.1 and
/// evaluate the matrix polynomial (and its symmetry images) there.
pub fn zero_locus_check(matrix: &NewtonMatrix, v: &PotentialExpression, geo: &SaddleSolution, samples: usize) -> Result<ZeroLocusReport> {
    let pts = locus_points(v, geo, &disc_samples(samples.max(1), 0.1))?;
    zero_locus_at(matrix, &pts)
}

pub fn zero_locus_at(matrix: &NewtonMatrix, pts: &[(Complex64, Complex64, Complex64)]) -> Result<ZeroLocusReport> {
    let mut variants = Vec::new();
    let mut best: Option<(String, f64, Vec<LocusSample>)> = None;
    let mut seen: Vec<Vec<Vec<i64>>> = Vec::new();
    for (tag, m) in matrix.symmetry_variants() {
        // negation does not change the residual
        if tag.contains("negate") || seen.contains(&m.rows) {
            continue;
        }
        seen.push(m.rows.clone());
        let poly = m.to_poly();
        let samples: Vec<LocusSample> = pts
            .iter()
            .map(|&(u, l, mm)| LocusSample { u: [u.re, u.im], ell: [l.re, l.im], m: [mm.re, mm.im], residual: relative_residual(&poly, l, mm) })
            .collect();
        let worst = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
        variants.push((tag.clone(), worst));
        if best.as_ref().map_or(true, |b| worst < b.1) {
            best = Some((tag, worst, samples));
        }
    }
    let (variant, max_residual, samples) = best.ok_or_else(|| Error::MatrixConvention("no variants".into()))?;
    Ok(ZeroLocusReport { variant, max_residual, samples, variants })
}

/// Zero-locus test of an arbitrary polynomial in (l, m) without symmetry search.
pub fn poly_locus_residual(a: &MultiPoly, pts: &[(Complex64, Complex64, Complex64)]) -> f64 {
    pts.iter().map(|&(_, l, m)| relative_residual(a, l, m)).fold(0.0, f64::max)
}
