//! Exact multivariate polynomials over the integers.
//!
//! Terms are stored in a `BTreeMap` keyed by exponent vector, so iteration is
//! lexicographic in the variable order and the last entry is the leading term.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Exps = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Exps, BigInt>,
}

impl MultiPoly {
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        MultiPoly { vars: vars.iter().map(|s| s.as_ref().to_string()).collect(), terms: BTreeMap::new() }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(vec![0; p.vars.len()], c);
        }
        p
    }

    pub fn one<S: AsRef<str>>(vars: &[S]) -> Self {
        Self::constant(vars, 1)
    }

    pub fn monomial<S: AsRef<str>>(vars: &[S], exps: Exps, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        assert_eq!(exps.len(), p.vars.len());
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The single variable `name`; panics if it is not in `vars`.
    pub fn var<S: AsRef<str>>(vars: &[S], name: &str) -> Self {
        let p = Self::zero(vars);
        let i = p.index_of(name).unwrap_or_else(|| panic!("unknown variable {name}"));
        let mut e = vec![0; p.vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, 1)
    }

    pub fn from_terms<S: AsRef<str>>(vars: &[S], terms: impl IntoIterator<Item = (Exps, BigInt)>) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exps, &BigInt)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        if !self.is_constant() {
            return None;
        }
        Some(self.terms.values().next().cloned().unwrap_or_else(BigInt::zero))
    }

    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_else(BigInt::zero)
    }

    fn add_term(&mut self, e: Exps, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn leading(&self) -> Option<(&Exps, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Re-express over `vars`, which must contain every variable in use.
    pub fn with_vars<S: AsRef<str>>(&self, vars: &[S]) -> Result<Self> {
        let names: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        if names == self.vars {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match names.iter().position(|n| n == v) {
                Some(j) => map.push(Some(j)),
                None => {
                    if self.degree(i) > 0 {
                        return Err(Error::DegenerateInput(format!("variable {v} still in use")));
                    }
                    map.push(None)
                }
            }
        }
        let mut out = MultiPoly { vars: names, terms: BTreeMap::new() };
        for (e, c) in &self.terms {
            let mut ne = vec![0; out.vars.len()];
            for (i, &x) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    ne[j] = x;
                }
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    /// Both operands over the union of their variables (self's order first).
    pub fn unify(a: &Self, b: &Self) -> (Self, Self) {
        if a.vars == b.vars {
            return (a.clone(), b.clone());
        }
        let mut vars = a.vars.clone();
        for v in &b.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        (a.with_vars(&vars).unwrap(), b.with_vars(&vars).unwrap())
    }

    /// Drop variables that do not occur.
    pub fn trim_vars(&self) -> Self {
        let used: Vec<String> =
            (0..self.vars.len()).filter(|&i| self.degree(i) > 0).map(|i| self.vars[i].clone()).collect();
        self.with_vars(&used).unwrap()
    }

    pub fn degree(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn min_degree(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).min().unwrap_or(0)
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        self.index_of(name).map(|i| self.degree(i)).unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn max_coeff_abs(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    pub fn neg(&self) -> Self {
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(&self.vars);
        }
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = Self::unify(self, other);
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::unify(self, other);
        if a.is_zero() || b.is_zero() {
            return Self::zero(&a.vars);
        }
        let mut acc: HashMap<Exps, BigInt> = HashMap::with_capacity((a.nterms() * b.nterms()).min(1 << 16));
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exps = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *acc.entry(e).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        MultiPoly { vars: a.vars, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Multiply by the monomial with exponent vector `e`.
    pub fn shift(&self, e: &[u32]) -> Self {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(x, c)| (x.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone())).collect(),
        }
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut ne = e.clone();
                ne[var] -= 1;
                out.add_term(ne, c * BigInt::from(e[var]));
            }
        }
        out
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.vars.len());
        let mut pows: Vec<Vec<Complex64>> = Vec::with_capacity(point.len());
        for (i, z) in point.iter().enumerate() {
            let d = self.degree(i) as usize;
            let mut v = Vec::with_capacity(d + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..=d {
                v.push(acc);
                acc *= z;
            }
            pows.push(v);
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
                for (i, &k) in e.iter().enumerate() {
                    t *= pows[i][k as usize];
                }
                t
            })
            .sum()
    }

    /// Sum of |coefficient * monomial| at `point`, the scale for relative residuals.
    pub fn eval_abs(&self, point: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN).abs();
                for (i, &k) in e.iter().enumerate() {
                    t *= point[i].norm().powi(k as i32);
                }
                t
            })
            .sum()
    }

    /// Substitute `var = value` for an integer value.
    pub fn substitute_int(&self, var: usize, value: &BigInt) -> Self {
        let mut powers = vec![BigInt::one()];
        for k in 1..=self.degree(var) as usize {
            let next = &powers[k - 1] * value;
            powers.push(next);
        }
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            ne[var] = 0;
            out.add_term(ne, c * &powers[e[var] as usize]);
        }
        out
    }

    /// Coefficients with respect to `var`, lowest degree first.
    pub fn coeffs_in(&self, var: usize) -> Vec<Self> {
        let d = self.degree(var) as usize;
        let mut out = vec![Self::zero(&self.vars); d + 1];
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[var] as usize;
            ne[var] = 0;
            out[k].terms.insert(ne, c.clone());
        }
        out
    }

    pub fn from_coeffs(var: usize, coeffs: &[Self]) -> Self {
        let vars = coeffs[0].vars.clone();
        let mut out = Self::zero(&vars);
        for (k, c) in coeffs.iter().enumerate() {
            for (e, x) in &c.terms {
                let mut ne = e.clone();
                ne[var] += k as u32;
                out.terms.insert(ne, x.clone());
            }
        }
        out
    }

    fn lc_in(&self, var: usize) -> Self {
        let d = self.degree(var);
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[var] == d {
                let mut ne = e.clone();
                ne[var] = 0;
                out.terms.insert(ne, c.clone());
            }
        }
        out
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (a, d) = Self::unify(self, d);
        if d.is_zero() {
            return None;
        }
        if a.is_zero() {
            return Some(a);
        }
        if d.nterms() == 1 {
            let (de, dc) = d.leading().unwrap();
            let mut out = Self::zero(&a.vars);
            for (e, c) in &a.terms {
                if e.iter().zip(de).any(|(x, y)| x < y) {
                    return None;
                }
                let (q, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return None;
                }
                out.terms.insert(e.iter().zip(de).map(|(x, y)| x - y).collect(), q);
            }
            return Some(out);
        }
        // quick degree screen
        for i in 0..a.vars.len() {
            if d.degree(i) > a.degree(i) {
                return None;
            }
        }
        let (de, dc) = {
            let (e, c) = d.leading().unwrap();
            (e.clone(), c.clone())
        };
        let mut r = a.clone();
        let mut q = Self::zero(&a.vars);
        while let Some((re, rc)) = r.leading() {
            if re.iter().zip(&de).any(|(x, y)| x < y) {
                return None;
            }
            let (qc, rem) = rc.div_rem(&dc);
            if !rem.is_zero() {
                return None;
            }
            let qe: Exps = re.iter().zip(&de).map(|(x, y)| x - y).collect();
            for (e, c) in &d.terms {
                let ne: Exps = e.iter().zip(&qe).map(|(x, y)| x + y).collect();
                r.add_term(ne, -(c * &qc));
            }
            q.terms.insert(qe, qc);
        }
        Some(q)
    }

    /// gcd of the integer coefficients, positive.
    pub fn integer_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Exponent vector of the largest monomial dividing every term.
    pub fn monomial_content(&self) -> Exps {
        let n = self.vars.len();
        (0..n).map(|i| self.min_degree(i)).collect()
    }

    pub fn divide_monomial_content(&self) -> Self {
        let m = self.monomial_content();
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.iter().zip(&m).map(|(x, y)| x - y).collect(), c.clone())).collect(),
        }
    }

    /// Sign making the leading term (lexicographically largest) positive.
    fn normalize_sign(self) -> Self {
        match self.leading() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self,
        }
    }

    fn exact_div_int(&self, k: &BigInt) -> Self {
        if k.is_one() {
            return self.clone();
        }
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c / k)).collect() }
    }

    pub fn primitive(&self) -> Self {
        let g = self.integer_content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        MultiPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c / &g)).collect() }
    }

    fn used_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.degree(i) > 0).collect()
    }

    /// gcd over the coefficients in `var`.
    pub fn content_in(&self, var: usize) -> Self {
        let mut cs = self.coeffs_in(var).into_iter().filter(|c| !c.is_zero()).collect::<Vec<_>>();
        cs.sort_by_key(|c| c.nterms());
        let mut g = match cs.first() {
            Some(c) => c.clone(),
            None => return Self::zero(&self.vars),
        };
        for c in &cs[1..] {
            if g.is_constant() && g.constant_value().map(|v| v.abs().is_one()).unwrap_or(false) {
                break;
            }
            g = gcd(&g, c);
        }
        g.normalize_sign()
    }

    fn prem(&self, b: &Self, var: usize) -> Self {
        let db = b.degree(var);
        let lb = b.lc_in(var);
        let mut r = self.clone();
        while !r.is_zero() && r.degree(var) >= db {
            let dr = r.degree(var);
            let lr = r.lc_in(var);
            let mut e = vec![0; r.vars.len()];
            e[var] = dr - db;
            r = r.mul(&lb).sub(&lr.mul(b).shift(&e));
        }
        r
    }

    /// lc(b)^(deg a - deg b + 1) a mod b, with respect to `var`.
    fn prem_full(&self, b: &Self, var: usize) -> Self {
        let da = self.degree(var);
        let db = b.degree(var);
        if da < db {
            return self.clone();
        }
        let lb = b.lc_in(var);
        let mut r = self.clone();
        let mut steps = 0;
        while !r.is_zero() && r.degree(var) >= db {
            let dr = r.degree(var);
            let lr = r.lc_in(var);
            let mut e = vec![0; r.vars.len()];
            e[var] = dr - db;
            r = r.mul(&lb).sub(&lr.mul(b).shift(&e));
            steps += 1;
        }
        let missing = da - db + 1 - steps;
        if missing > 0 && !r.is_zero() {
            r = r.mul(&lb.pow(missing));
        }
        r
    }

    /// Remove content in `var` and the integer content.
    fn pp_in(&self, var: usize) -> Self {
        let c = self.content_in(var);
        self.exact_div(&c).expect("content divides").primitive()
    }
}

/// Greatest common divisor, with positive leading coefficient.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let (a, b) = MultiPoly::unify(a, b);
    if a.is_zero() {
        return b.normalize_sign();
    }
    if b.is_zero() {
        return a.normalize_sign();
    }
    // monomial and integer parts split off first
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mono: Exps = ma.iter().zip(&mb).map(|(x, y)| *x.min(y)).collect();
    let a = a.divide_monomial_content();
    let b = b.divide_monomial_content();
    let ic = a.integer_content().gcd(&b.integer_content());
    let a = a.primitive();
    let b = b.primitive();
    let g = heu_gcd(&a, &b, 0).unwrap_or_else(|| gcd_primitive(&a, &b));
    g.scale(&ic).shift(&mono).normalize_sign()
}

fn symmetric_mod(c: &BigInt, x: &BigInt) -> BigInt {
    let r = c.mod_floor(x);
    if &r * 2 > *x {
        r - x
    } else {
        r
    }
}

/// Rebuild a polynomial in `var` from its value at var = x, reading the
/// coefficients as balanced base-x digits.
fn interpolate(h: &MultiPoly, var: usize, x: &BigInt) -> MultiPoly {
    let mut coeffs = Vec::new();
    let mut h = h.clone();
    while !h.is_zero() {
        let g = MultiPoly { vars: h.vars.clone(), terms: h.terms.iter().map(|(e, c)| (e.clone(), symmetric_mod(c, x))).filter(|(_, c)| !c.is_zero()).collect() };
        h = h.sub(&g);
        h = MultiPoly { vars: h.vars.clone(), terms: h.terms.iter().map(|(e, c)| (e.clone(), c / x)).collect() };
        coeffs.push(g);
    }
    if coeffs.is_empty() {
        return h;
    }
    MultiPoly::from_coeffs(var, &coeffs)
}

/// Heuristic gcd of primitive polynomials: evaluate one variable at a large
/// integer, recurse, and lift back. None when the evaluation points fail.
fn heu_gcd(a: &MultiPoly, b: &MultiPoly, depth: usize) -> Option<MultiPoly> {
    let ic = a.integer_content().gcd(&b.integer_content());
    if a.is_constant() || b.is_constant() {
        return Some(MultiPoly::constant(&a.vars, ic));
    }
    if depth > 12 {
        return None;
    }
    let a = &a.exact_div_int(&ic);
    let b = &b.exact_div_int(&ic);
    let used: Vec<usize> = (0..a.vars.len()).filter(|&i| a.degree(i) > 0 || b.degree(i) > 0).collect();
    let var = *used.iter().max_by_key(|&&i| a.degree(i).max(b.degree(i))).unwrap();
    let na = a.max_coeff_abs();
    let nb = b.max_coeff_abs();
    let bound: BigInt = 2 * na.clone().min(nb.clone()) + 29;
    let la = a.lc_in(var).max_coeff_abs().max(BigInt::one());
    let lb = b.lc_in(var).max_coeff_abs().max(BigInt::one());
    let ratio: BigInt = 2 * (&na / &la).min(&nb / &lb) + 2;
    let mut x = bound.clone().min(BigInt::from(99) * bound.sqrt()).max(ratio);
    for _ in 0..6 {
        let ea = a.substitute_int(var, &x);
        let eb = b.substitute_int(var, &x);
        if !ea.is_zero() && !eb.is_zero() {
            if let Some(h) = heu_gcd(&ea, &eb, depth + 1) {
                let h = interpolate(&h, var, &x);
                if !h.is_zero() {
                    let h = h.primitive().normalize_sign();
                    if a.exact_div(&h).is_some() && b.exact_div(&h).is_some() {
                        return Some(h.scale(&ic));
                    }
                }
            }
        }
        x = (&x * 73794 * x.sqrt().sqrt()) / 27011;
    }
    None
}

fn gcd_primitive(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let vars = a.vars.clone();
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(&vars);
    }
    if a == b || *a == b.neg() {
        return a.clone().normalize_sign();
    }
    let (small, big) = if a.nterms() <= b.nterms() { (a, b) } else { (b, a) };
    if big.exact_div(small).is_some() {
        return small.clone().normalize_sign();
    }
    let ua = a.used_vars();
    let ub = b.used_vars();
    // a variable used by only one side: the gcd lives in its content
    for &v in &ua {
        if !ub.contains(&v) {
            return gcd_primitive(&a.content_in(v).primitive(), b);
        }
    }
    for &v in &ub {
        if !ua.contains(&v) {
            return gcd_primitive(a, &b.content_in(v).primitive());
        }
    }
    // main variable: lowest combined degree keeps the remainder sequence short
    let v = *ua.iter().min_by_key(|&&v| a.degree(v) + b.degree(v)).unwrap();
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let c = gcd(&ca, &cb);
    let mut p = a.exact_div(&ca).unwrap().primitive();
    let mut q = b.exact_div(&cb).unwrap().primitive();
    if p.degree(v) < q.degree(v) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() {
        let r = p.prem(&q, v);
        p = q;
        if r.is_zero() {
            break;
        }
        if r.degree(v) == 0 {
            // nonzero remainder free of v: primitive parts are coprime
            return c.normalize_sign();
        }
        q = r.pp_in(v);
    }
    p.pp_in(v).mul(&c).normalize_sign()
}

/// Resultant with respect to `var`.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<MultiPoly> {
    resultant_with_budget(p, q, var, usize::MAX)
}

/// As [`resultant`], failing with `SwellLimit` once an intermediate
/// remainder holds more than `budget` terms. Subresultant PRS.
pub fn resultant_with_budget(p: &MultiPoly, q: &MultiPoly, var: &str, budget: usize) -> Result<MultiPoly> {
    let (p, q) = MultiPoly::unify(p, q);
    if p.is_zero() || q.is_zero() {
        return Err(Error::DegenerateInput("resultant of a zero polynomial".into()));
    }
    let v = p
        .index_of(var)
        .ok_or_else(|| Error::DegenerateInput(format!("variable {var} does not occur")))?;
    if p.degree(v) == 0 || q.degree(v) == 0 {
        return Err(Error::DegenerateInput(format!("resultant needs positive degree in {var}")));
    }
    let vars = p.vars.clone();
    let one = MultiPoly::one(&vars);
    let ca = p.content_in(v);
    let cb = q.content_in(v);
    let mut a = p.exact_div(&ca).expect("content divides");
    let mut b = q.exact_div(&cb).expect("content divides");
    let t = ca.pow(q.degree(v)).mul(&cb.pow(p.degree(v)));
    let mut s = 1i32;
    if a.degree(v) < b.degree(v) {
        if a.degree(v) % 2 == 1 && b.degree(v) % 2 == 1 {
            s = -1;
        }
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = one.clone();
    let mut h = one.clone();
    loop {
        let (da, db) = (a.degree(v), b.degree(v));
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = a.prem_full(&b, v);
        if r.is_zero() {
            return Ok(MultiPoly::zero(&vars));
        }
        if r.nterms() > budget {
            return Err(Error::SwellLimit(r.nterms()));
        }
        a = b;
        b = r.exact_div(&g.mul(&h.pow(delta))).expect("subresultant division is exact");
        g = a.lc_in(v);
        h = if delta == 0 {
            h
        } else {
            g.pow(delta).exact_div(&h.pow(delta - 1)).expect("subresultant division is exact")
        };
        if b.nterms().max(h.nterms()) > budget {
            return Err(Error::SwellLimit(b.nterms().max(h.nterms())));
        }
        if b.degree(v) == 0 {
            let da = a.degree(v);
            let lb = b.lc_in(v);
            let hh = if da == 0 { h } else { lb.pow(da).exact_div(&h.pow(da - 1)).expect("subresultant division is exact") };
            let out = t.mul(&hh);
            return Ok(if s < 0 { out.neg() } else { out });
        }
    }
}

/// Resultant from the Sylvester determinant; slow, kept as a cross-check.
pub fn sylvester_resultant(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<MultiPoly> {
    let (p, q) = MultiPoly::unify(p, q);
    if p.is_zero() || q.is_zero() {
        return Err(Error::DegenerateInput("resultant of a zero polynomial".into()));
    }
    let v = p
        .index_of(var)
        .ok_or_else(|| Error::DegenerateInput(format!("variable {var} does not occur")))?;
    let m = p.degree(v) as usize;
    let n = q.degree(v) as usize;
    if m == 0 || n == 0 {
        return Err(Error::DegenerateInput(format!("resultant needs positive degree in {var}")));
    }
    let pc = p.coeffs_in(v);
    let qc = q.coeffs_in(v);
    let size = m + n;
    let zero = MultiPoly::zero(p.vars());
    let mut mat = vec![vec![zero.clone(); size]; size];
    for i in 0..n {
        for k in 0..=m {
            mat[i][i + k] = pc[m - k].clone();
        }
    }
    for i in 0..m {
        for k in 0..=n {
            mat[n + i][i + k] = qc[n - k].clone();
        }
    }
    Ok(bareiss_det(mat))
}

/// Determinant of a square polynomial matrix, fraction-free.
pub fn bareiss_det(mat: Vec<Vec<MultiPoly>>) -> MultiPoly {
    bareiss_det_with_budget(mat, usize::MAX).expect("no budget")
}

pub fn bareiss_det_with_budget(mut mat: Vec<Vec<MultiPoly>>, budget: usize) -> Result<MultiPoly> {
    let size = mat.len();
    let vars = mat[0][0].vars.clone();
    let mut negate = false;
    let mut prev = MultiPoly::one(&vars);
    for k in 0..size {
        if mat[k][k].is_zero() {
            match (k + 1..size).find(|&i| !mat[i][k].is_zero()) {
                Some(i) => {
                    mat.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(MultiPoly::zero(&vars)),
            }
        }
        if k + 1 == size {
            break;
        }
        let pivot = mat[k][k].clone();
        let row_k = mat[k].clone();
        let prev_ref = &prev;
        let rows: Vec<Vec<MultiPoly>> = mat[k + 1..]
            .iter()
            .map(|row| {
                let lead = &row[k];
                let mut out = row.clone();
                for j in k + 1..size {
                    let mut t = row[j].mul(&pivot);
                    if !lead.is_zero() && !row_k[j].is_zero() {
                        t = t.sub(&lead.mul(&row_k[j]));
                    }
                    out[j] = t.exact_div(prev_ref).expect("Bareiss division is exact");
                }
                out[k] = MultiPoly::zero(&vars);
                out
            })
            .collect();
        for (i, r) in rows.into_iter().enumerate() {
            mat[k + 1 + i] = r;
        }
        let total: usize = mat[k + 1..].iter().flat_map(|r| r.iter().map(|e| e.nterms())).sum();
        if total > budget {
            return Err(Error::SwellLimit(total));
        }
        prev = pivot;
    }
    let d = mat[size - 1][size - 1].clone();
    Ok(if negate { d.neg() } else { d })
}

/// Integer content removed and repeated factors reduced to multiplicity one.
pub fn squarefree_and_content(p: &MultiPoly) -> MultiPoly {
    let p = p.primitive();
    // gcd with all partials is the product of f^(e-1) over the factors f^e
    let mut g = p.clone();
    for v in 0..p.vars.len() {
        if p.degree(v) == 0 {
            continue;
        }
        g = gcd(&g, &p.derivative(v));
        if g.is_constant() {
            break;
        }
    }
    let out = if g.is_constant() { p } else { p.exact_div(&g).expect("gcd divides").primitive() };
    out.normalize_sign()
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}", c.abs())?;
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => write!(f, "*{}", self.vars[i])?,
                    _ => write!(f, "*{}^{}", self.vars[i], x)?,
                }
            }
        }
        Ok(())
    }
}

impl MultiPoly {
    /// Parse an integer polynomial expression with `+ - * ^` and parentheses.
    pub fn parse<S: AsRef<str>>(text: &str, vars: &[S]) -> Result<Self> {
        let toks: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let mut p = ExprParser { toks: &toks, pos: 0, vars: &names, text };
        let out = p.sum()?;
        if p.pos != toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(out)
    }
}

struct ExprParser<'a> {
    toks: &'a [char],
    pos: usize,
    vars: &'a [String],
    text: &'a str,
}

impl ExprParser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at {} in {}", self.pos, self.text))
    }

    fn peek(&self) -> Option<char> {
        self.toks.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<MultiPoly> {
        let mut acc = MultiPoly::zero(self.vars);
        let mut first = true;
        loop {
            let neg = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    false
                }
                Some('-') => {
                    self.pos += 1;
                    true
                }
                _ if first => false,
                _ => return Ok(acc),
            };
            first = false;
            let t = self.product()?;
            acc = if neg { acc.sub(&t) } else { acc.add(&t) };
        }
    }

    fn product(&mut self) -> Result<MultiPoly> {
        let mut acc = self.power()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let e = self.integer()?;
        let e: u32 = e.try_into().map_err(|_| self.err("bad exponent"))?;
        Ok(base.pow(e))
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s: String = self.toks[start..self.pos].iter().collect();
        Ok(s.parse().unwrap())
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected )"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('-') => {
                self.pos += 1;
                Ok(self.power()?.neg())
            }
            Some(c) if c.is_ascii_digit() => Ok(MultiPoly::constant(self.vars, self.integer()?)),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name: String = self.toks[start..self.pos].iter().collect();
                if !self.vars.contains(&name) {
                    return Err(self.err(&format!("unknown variable {name}")));
                }
                Ok(MultiPoly::var(self.vars, &name))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

/// Coefficient matrix of a polynomial in (l, m): rows ascending powers of
/// m^2, columns ascending powers of l.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonMatrix {
    pub rows: Vec<Vec<i64>>,
    #[serde(default = "row_semantics")]
    pub row_semantics: String,
    #[serde(default = "col_semantics")]
    pub col_semantics: String,
}

fn row_semantics() -> String {
    "m^2 ascending".into()
}

fn col_semantics() -> String {
    "l ascending".into()
}

impl NewtonMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::MatrixConvention("empty matrix".into()));
        }
        let w = rows[0].len();
        if rows.iter().any(|r| r.len() != w) {
            return Err(Error::MatrixConvention("ragged rows".into()));
        }
        let nz_row = |r: &Vec<i64>| r.iter().any(|&x| x != 0);
        if !nz_row(&rows[0]) || !nz_row(rows.last().unwrap()) {
            return Err(Error::MatrixConvention("first and last rows must be nonzero".into()));
        }
        if rows.iter().all(|r| r[0] == 0) || rows.iter().all(|r| r[w - 1] == 0) {
            return Err(Error::MatrixConvention("first and last columns must be nonzero".into()));
        }
        Ok(NewtonMatrix { rows, row_semantics: row_semantics(), col_semantics: col_semantics() })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows[0].len())
    }

    pub fn to_poly(&self) -> MultiPoly {
        let vars = ["l", "m"];
        let mut p = MultiPoly::zero(&vars);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    p.add_term(vec![j as u32, 2 * i as u32], BigInt::from(c));
                }
            }
        }
        p
    }

    pub fn reverse_rows(&self) -> Self {
        let mut r = self.rows.clone();
        r.reverse();
        NewtonMatrix { rows: r, ..self.clone() }
    }

    pub fn reverse_cols(&self) -> Self {
        let r = self.rows.iter().map(|row| row.iter().rev().cloned().collect()).collect();
        NewtonMatrix { rows: r, ..self.clone() }
    }

    pub fn negate(&self) -> Self {
        let r = self.rows.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
        NewtonMatrix { rows: r, ..self.clone() }
    }

    pub fn transpose(&self) -> Self {
        let (h, w) = self.shape();
        let r = (0..w).map(|j| (0..h).map(|i| self.rows[i][j]).collect()).collect();
        NewtonMatrix { rows: r, ..self.clone() }
    }

    /// All images under row reversal, column reversal, sign and transpose,
    /// each with a short description.
    pub fn symmetry_variants(&self) -> Vec<(String, NewtonMatrix)> {
        let mut out = Vec::new();
        for t in [false, true] {
            for rr in [false, true] {
                for rc in [false, true] {
                    for neg in [false, true] {
                        let mut m = if t { self.transpose() } else { self.clone() };
                        if rr {
                            m = m.reverse_rows();
                        }
                        if rc {
                            m = m.reverse_cols();
                        }
                        if neg {
                            m = m.negate();
                        }
                        let mut tag = Vec::new();
                        if t {
                            tag.push("transpose");
                        }
                        if rr {
                            tag.push("reverse rows");
                        }
                        if rc {
                            tag.push("reverse cols");
                        }
                        if neg {
                            tag.push("negate");
                        }
                        let tag = if tag.is_empty() { "identity".to_string() } else { tag.join(", ") };
                        out.push((tag, m));
                    }
                }
            }
        }
        out
    }

    /// Which symmetry maps `self` onto `other`, if any.
    pub fn match_up_to_symmetry(&self, other: &NewtonMatrix) -> Option<String> {
        self.symmetry_variants().into_iter().find(|(_, m)| m.rows == other.rows).map(|(t, _)| t)
    }
}

/// Newton matrix of a polynomial in `l` and `m` (any variable order), after
/// removing the monomial content.
pub fn newton_matrix(a: &MultiPoly) -> Result<NewtonMatrix> {
    if a.is_zero() {
        return Err(Error::MatrixConvention("zero polynomial".into()));
    }
    for (i, v) in a.vars().iter().enumerate() {
        if v != "l" && v != "m" && a.degree(i) > 0 {
            return Err(Error::MatrixConvention(format!("unexpected variable {v}")));
        }
    }
    let li = a.index_of("l");
    let mi = a.index_of("m");
    if let Some(mi) = mi {
        if a.terms().any(|(e, _)| e[mi] % 2 == 1) {
            return Err(Error::MatrixConvention("odd power of m".into()));
        }
    }
    let a = a.divide_monomial_content();
    let dl = li.map(|i| a.degree(i)).unwrap_or(0) as usize;
    let dm = mi.map(|i| a.degree(i)).unwrap_or(0) as usize / 2;
    let mut rows = vec![vec![0i64; dl + 1]; dm + 1];
    for (e, c) in a.terms() {
        let j = li.map(|i| e[i]).unwrap_or(0) as usize;
        let r = mi.map(|i| e[i]).unwrap_or(0) as usize / 2;
        rows[r][j] = c.to_i64().ok_or_else(|| Error::MatrixConvention(format!("coefficient {c} exceeds i64")))?;
    }
    NewtonMatrix::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, vars: &[&str]) -> MultiPoly {
        MultiPoly::parse(s, vars).unwrap()
    }

    #[test]
    fn division_roundtrip() {
        let v = ["x", "y"];
        let a = p("1 + 2*x*y - 3*y^2", &v);
        let b = p("x - y + 4", &v);
        let ab = a.mul(&b);
        assert_eq!(ab.exact_div(&b).unwrap(), a);
        assert!(ab.add(&MultiPoly::one(&v)).exact_div(&b).is_none());
    }

    #[test]
    fn gcd_simple() {
        let v = ["x", "y"];
        let g = p("x*y - 2", &v);
        let a = g.mul(&p("x + y^3", &v));
        let b = g.mul(&p("x^2 - 7", &v)).scale(&BigInt::from(-6));
        assert_eq!(gcd(&a, &b), g);
    }
}
