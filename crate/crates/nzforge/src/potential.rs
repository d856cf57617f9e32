//! Neumann-Zagier potentials
//!
//! Phi(L) = c pi^2 + sum_j eps_j Li2(exp(a_j . L)) + L^T B L + i pi (lin . L)
//!
//! with L = (log x_1, ..., log x_n, log m).

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::MultiPoly;
use crate::dilog::{bloch_wigner, li2};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `eps * Li2(prod v^exps)`; exponents run over all variables, m last.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DilogTerm {
    pub eps: i32,
    pub exps: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialExpression {
    /// shape variables followed by `m`
    pub vars: Vec<String>,
    pub const_pi2: Rational64,
    pub dilog: Vec<DilogTerm>,
    pub bilinear: Vec<Vec<Rational64>>,
    pub linear_ipi: Vec<Rational64>,
    /// signed moduli; the volume is sum eps * D(z)
    pub moduli: Vec<DilogTerm>,
}

fn rat_f64(r: &Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl PotentialExpression {
    pub fn empty(shape_vars: &[&str]) -> Self {
        let mut vars: Vec<String> = shape_vars.iter().map(|s| s.to_string()).collect();
        vars.push("m".into());
        let n = vars.len();
        PotentialExpression {
            vars,
            const_pi2: Rational64::zero(),
            dilog: Vec::new(),
            bilinear: vec![vec![Rational64::zero(); n]; n],
            linear_ipi: vec![Rational64::zero(); n],
            moduli: Vec::new(),
        }
    }

    /// Number of shape variables.
    pub fn n(&self) -> usize {
        self.vars.len() - 1
    }

    pub fn shape_vars(&self) -> &[String] {
        &self.vars[..self.n()]
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.vars.len();
        let bad = |m: String| Err(Error::Schema { entry: "potential".into(), msg: m });
        if k < 2 || self.vars.last().map(|s| s.as_str()) != Some("m") {
            return bad("variables must end with m and include a shape variable".into());
        }
        if self.bilinear.len() != k || self.bilinear.iter().any(|r| r.len() != k) {
            return bad("bilinear form has the wrong size".into());
        }
        for i in 0..k {
            for j in 0..i {
                if self.bilinear[i][j] != self.bilinear[j][i] {
                    return bad("bilinear form is not symmetric".into());
                }
            }
        }
        if self.linear_ipi.len() != k {
            return bad("linear_ipi has the wrong size".into());
        }
        for t in self.dilog.iter().chain(&self.moduli) {
            if t.exps.len() != k || t.eps.abs() != 1 {
                return bad(format!("malformed dilogarithm term {:?}", t));
            }
        }
        Ok(())
    }

    /// L = (log x, log m) with principal logarithms.
    pub fn logs(&self, x: &[Complex64], m: Complex64) -> Vec<Complex64> {
        let mut l: Vec<Complex64> = x.iter().map(|z| z.ln()).collect();
        l.push(m.ln());
        l
    }

    fn monomial_at(exps: &[i64], l: &[Complex64]) -> Complex64 {
        exps.iter().zip(l).map(|(&a, z)| *z * a as f64).sum::<Complex64>().exp()
    }

    /// Values of the dilogarithm arguments at log-coordinates `l`.
    pub fn dilog_args(&self, l: &[Complex64]) -> Vec<Complex64> {
        self.dilog.iter().map(|t| Self::monomial_at(&t.exps, l)).collect()
    }

    pub fn moduli_values(&self, l: &[Complex64]) -> Vec<Complex64> {
        self.moduli.iter().map(|t| Self::monomial_at(&t.exps, l)).collect()
    }

    fn check_args(&self, args: &[Complex64]) -> Result<()> {
        for (j, z) in args.iter().enumerate() {
            if z.norm() < 1e-300 || (z - 1.0).norm() < 1e-14 || !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::SingularArgument(format!("dilogarithm term {j} at {z}")));
            }
        }
        Ok(())
    }

    fn bl(&self, l: &[Complex64]) -> Vec<Complex64> {
        self.bilinear.iter().map(|row| row.iter().zip(l).map(|(b, z)| *z * rat_f64(b)).sum()).collect()
    }

    /// Principal-branch value at log-coordinates.
    pub fn evaluate_logs(&self, l: &[Complex64]) -> Result<Complex64> {
        let args = self.dilog_args(l);
        self.check_args(&args)?;
        let mut v = Complex64::new(rat_f64(&self.const_pi2) * PI * PI, 0.0);
        for (t, z) in self.dilog.iter().zip(&args) {
            v += li2(*z) * t.eps as f64;
        }
        let bl = self.bl(l);
        v += l.iter().zip(&bl).map(|(a, b)| a * b).sum::<Complex64>();
        v += I * PI * l.iter().zip(&self.linear_ipi).map(|(z, c)| *z * rat_f64(c)).sum::<Complex64>();
        Ok(v)
    }

    pub fn evaluate(&self, x: &[Complex64], m: Complex64) -> Result<Complex64> {
        self.evaluate_logs(&self.logs(x, m))
    }

    /// Gradient with respect to every log-coordinate, m last.
    pub fn gradient_logs(&self, l: &[Complex64]) -> Result<Vec<Complex64>> {
        let args = self.dilog_args(l);
        self.check_args(&args)?;
        let bl = self.bl(l);
        let mut g: Vec<Complex64> =
            bl.iter().zip(&self.linear_ipi).map(|(b, c)| 2.0 * b + I * PI * rat_f64(c)).collect();
        for (t, z) in self.dilog.iter().zip(&args) {
            let lg = (1.0 - z).ln();
            for (i, &a) in t.exps.iter().enumerate() {
                if a != 0 {
                    g[i] -= lg * (t.eps as f64 * a as f64);
                }
            }
        }
        Ok(g)
    }

    pub fn gradient(&self, x: &[Complex64], m: Complex64) -> Result<Vec<Complex64>> {
        self.gradient_logs(&self.logs(x, m))
    }

    /// Full Hessian in log-coordinates.
    pub fn hessian_logs(&self, l: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let args = self.dilog_args(l);
        self.check_args(&args)?;
        let k = l.len();
        let mut h: Vec<Vec<Complex64>> =
            self.bilinear.iter().map(|r| r.iter().map(|b| Complex64::new(2.0 * rat_f64(b), 0.0)).collect()).collect();
        for (t, z) in self.dilog.iter().zip(&args) {
            let w = z / (1.0 - z) * t.eps as f64;
            for i in 0..k {
                if t.exps[i] == 0 {
                    continue;
                }
                for j in 0..k {
                    if t.exps[j] != 0 {
                        h[i][j] += w * (t.exps[i] * t.exps[j]) as f64;
                    }
                }
            }
        }
        Ok(h)
    }

    /// sum eps D(z) over the moduli.
    pub fn dsum(&self, l: &[Complex64]) -> Result<f64> {
        let mut v = 0.0;
        for (t, z) in self.moduli.iter().zip(self.moduli_values(l)) {
            v += t.eps as f64 * bloch_wigner(z).map_err(|_| Error::SingularArgument(format!("modulus {z}")))?;
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// exponentiated saddle equations

/// `sign * prod_j (1 - M_j)^{k_j} * prod v^{e} = 1` (gluing) or `= l^d` (longitude).
#[derive(Clone, Debug, PartialEq)]
pub struct ExpEquation {
    pub factors: Vec<(usize, i64)>,
    pub monomial: Vec<i64>,
    pub sign: i32,
    /// the equation is the `root`-th root of the raw exponentiated derivative
    pub root: u32,
    pub num: MultiPoly,
    pub den: MultiPoly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LongitudeEquation {
    pub d: u32,
    pub eq: ExpEquation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluingSystem {
    pub vars: Vec<String>,
    pub equations: Vec<ExpEquation>,
    pub longitude: LongitudeEquation,
}

fn int_of(r: &Rational64, what: &str) -> Result<i64> {
    if r.is_integer() {
        Ok(*r.numer())
    } else {
        Err(Error::NonIntegerExponent(format!("{what}: {r}")))
    }
}

fn split_monomial(vars: &[String], e: &[i64]) -> (MultiPoly, MultiPoly) {
    let pos: Vec<u32> = e.iter().map(|&a| a.max(0) as u32).collect();
    let neg: Vec<u32> = e.iter().map(|&a| (-a).max(0) as u32).collect();
    (MultiPoly::monomial(vars, pos, 1), MultiPoly::monomial(vars, neg, 1))
}

impl ExpEquation {
    fn build(v: &PotentialExpression, factors: Vec<(usize, i64)>, monomial: Vec<i64>, sign: i32, root: u32) -> Self {
        let vars = &v.vars;
        let mut num = MultiPoly::constant(vars, sign);
        let mut den = MultiPoly::one(vars);
        for &(j, k) in &factors {
            // 1 - x^{a+}/x^{a-} = (x^{a-} - x^{a+}) / x^{a-}
            let (pos, neg) = split_monomial(vars, &v.dilog[j].exps);
            let f = neg.sub(&pos);
            if k > 0 {
                num = num.mul(&f.pow(k as u32));
                den = den.mul(&neg.pow(k as u32));
            } else if k < 0 {
                den = den.mul(&f.pow((-k) as u32));
                num = num.mul(&neg.pow((-k) as u32));
            }
        }
        let (pos, neg) = split_monomial(vars, &monomial);
        num = num.mul(&pos);
        den = den.mul(&neg);
        // cancel the common monomial
        let cn = num.monomial_content();
        let cd = den.monomial_content();
        let common: Vec<u32> = cn.iter().zip(&cd).map(|(a, b)| *a.min(b)).collect();
        let c = MultiPoly::monomial(vars, common, 1);
        num = num.exact_div(&c).unwrap();
        den = den.exact_div(&c).unwrap();
        ExpEquation { factors, monomial, sign, root, num, den }
    }

    /// The rational function `num / den` at a point.
    pub fn value(&self, x: &[Complex64], m: Complex64) -> Complex64 {
        let mut p: Vec<Complex64> = x.to_vec();
        p.push(m);
        self.num.eval(&p) / self.den.eval(&p)
    }

    /// Sum over factors of k log(1 - M) plus the monomial part, as a log.
    pub fn log_value(&self, v: &PotentialExpression, l: &[Complex64]) -> Complex64 {
        let args = v.dilog_args(l);
        let mut s: Complex64 = self.factors.iter().map(|&(j, k)| (1.0 - args[j]).ln() * k as f64).sum();
        s += self.monomial.iter().zip(l).map(|(&a, z)| *z * a as f64).sum::<Complex64>();
        if self.sign < 0 {
            s += I * PI;
        }
        s
    }

    /// Cleared form `num - den` (gluing).
    pub fn cleared(&self) -> MultiPoly {
        self.num.sub(&self.den)
    }
}

fn raw_equation(v: &PotentialExpression, i: usize, half: bool) -> Result<(Vec<(usize, i64)>, Vec<i64>, i32, bool)> {
    // exp(d Phi / d L_i), or exp(d Phi / d L_i / 2)
    let what = &v.vars[i];
    let div = if half { 2 } else { 1 };
    let mut ok = true;
    let mut factors = Vec::new();
    for (j, t) in v.dilog.iter().enumerate() {
        let a = t.exps[i] * t.eps as i64;
        if a == 0 {
            continue;
        }
        if a % div != 0 {
            ok = false;
        }
        factors.push((j, -a / div));
    }
    let mut monomial = Vec::with_capacity(v.vars.len());
    for k in 0..v.vars.len() {
        let e = v.bilinear[i][k] * Rational64::from_integer(2) / Rational64::from_integer(div);
        if !e.is_integer() {
            if half {
                ok = false;
                monomial.push(0);
                continue;
            }
            return Err(Error::NonIntegerExponent(format!("bilinear coefficient in d/d log {what}")));
        }
        monomial.push(int_of(&e, what)?);
    }
    let c = v.linear_ipi[i] / Rational64::from_integer(div);
    let sign = if c.is_integer() {
        if c.numer().is_odd() { -1 } else { 1 }
    } else {
        if !half {
            return Err(Error::NonIntegerExponent(format!("i pi coefficient in d/d log {what}")));
        }
        ok = false;
        1
    };
    Ok((factors, monomial, sign, ok))
}

/// exp(d Phi / d log x_i) = 1 for each shape variable.
pub fn gluing_equations(v: &PotentialExpression) -> Result<Vec<ExpEquation>> {
    (0..v.n())
        .map(|i| {
            let (f, mo, s, _) = raw_equation(v, i, false)?;
            Ok(ExpEquation::build(v, f, mo, s, 1))
        })
        .collect()
}

/// l = exp(d Phi / d u / 2), or its square when half-exponents do not
/// come out integral.
pub fn longitude_equation(v: &PotentialExpression) -> Result<LongitudeEquation> {
    let i = v.n();
    let (f, mo, s, ok) = raw_equation(v, i, true)?;
    if ok {
        return Ok(LongitudeEquation { d: 1, eq: ExpEquation::build(v, f, mo, s, 1) });
    }
    let (f, mo, s, _) = raw_equation(v, i, false)?;
    Ok(LongitudeEquation { d: 2, eq: ExpEquation::build(v, f, mo, s, 1) })
}

impl LongitudeEquation {
    /// Cleared form `l^d den - num` over the system variables plus `l`.
    pub fn cleared(&self) -> MultiPoly {
        let mut vars = self.eq.num.vars().to_vec();
        vars.push("l".into());
        let num = self.eq.num.with_vars(&vars).unwrap();
        let den = self.eq.den.with_vars(&vars).unwrap();
        let mut e = vec![0; vars.len()];
        e[vars.len() - 1] = self.d;
        den.shift(&e).sub(&num)
    }
}

impl GluingSystem {
    pub fn from_potential(v: &PotentialExpression) -> Result<Self> {
        Ok(GluingSystem { vars: v.vars.clone(), equations: gluing_equations(v)?, longitude: longitude_equation(v)? })
    }

    /// Replace each equation whose exponents share a factor g by its g-th
    /// root, when that root is +1 or -1 at the reference point.
    pub fn reduce_roots(&self, v: &PotentialExpression, l: &[Complex64]) -> GluingSystem {
        let mut out = self.clone();
        for eq in out.equations.iter_mut() {
            let g = eq.factors.iter().map(|(_, k)| *k).chain(eq.monomial.iter().cloned()).fold(0i64, |a, b| a.gcd(&b));
            if g <= 1 {
                continue;
            }
            let base = ExpEquation::build(
                v,
                eq.factors.iter().map(|&(j, k)| (j, k / g)).collect(),
                eq.monomial.iter().map(|a| a / g).collect(),
                1,
                g as u32,
            );
            let w = base.log_value(v, l).exp();
            let sign = if (w - 1.0).norm() < 1e-6 {
                1
            } else if (w + 1.0).norm() < 1e-6 {
                -1
            } else {
                continue;
            };
            // base = sign, i.e. (sign * base) = 1
            *eq = ExpEquation::build(v, base.factors, base.monomial, sign, g as u32);
        }
        out
    }

    /// Polynomials whose common zeros (with den != 0) are the solutions:
    /// gluing `num - den`, then the longitude `l^d den - num`.
    pub fn cleared(&self) -> Vec<MultiPoly> {
        let mut vars = self.vars.clone();
        vars.push("l".into());
        let mut out: Vec<MultiPoly> = self.equations.iter().map(|e| e.cleared().with_vars(&vars).unwrap()).collect();
        out.push(self.longitude.cleared());
        out
    }

    /// max |num - den| over the gluing equations at a point.
    pub fn residual(&self, x: &[Complex64], m: Complex64) -> f64 {
        let mut p = x.to_vec();
        p.push(m);
        self.equations.iter().map(|e| e.cleared().eval(&p).norm()).fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.equations
            .iter()
            .map(|e| e.num.max_coeff_abs().max(e.den.max_coeff_abs()).to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// text form: `1/2*pi^2 - Li(x^-1*y*m^-2) + log(x*m)*log(y) + 2*log(m)^2 + i*pi*log(x)`

fn split_top(s: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    let mut prev = ' ';
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') && prev != '^' {
            if !cur.is_empty() {
                out.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
            } else {
                neg ^= ch == '-';
            }
        } else {
            cur.push(ch);
        }
        prev = ch;
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {s}")));
    }
    if !cur.is_empty() {
        out.push((neg, cur));
    }
    Ok(out)
}

fn split_factors(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == '*' && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    out.push(cur);
    out
}

fn parse_rat(s: &str) -> Option<Rational64> {
    match s.split_once('/') {
        Some((a, b)) => Some(Rational64::new(a.parse().ok()?, b.parse().ok()?)),
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

fn parse_monomial(s: &str, vars: &[String]) -> Result<Vec<i64>> {
    let mut e = vec![0i64; vars.len()];
    for f in s.split('*') {
        let (name, k) = match f.split_once('^') {
            Some((n, k)) => (n, k.parse::<i64>().map_err(|_| Error::Parse(format!("bad exponent in {f}")))?),
            None => (f, 1),
        };
        let i = vars.iter().position(|v| v == name).ok_or_else(|| Error::Parse(format!("unknown variable {name}")))?;
        e[i] += k;
    }
    Ok(e)
}

fn inner<'a>(f: &'a str, head: &str) -> Option<(&'a str, &'a str)> {
    let rest = f.strip_prefix(head)?.strip_prefix('(')?;
    let close = rest.rfind(')')?;
    Some((&rest[..close], &rest[close + 1..]))
}

impl PotentialExpression {
    /// Parse the text form over the given shape variables (m is appended).
    pub fn parse(text: &str, shape_vars: &[&str]) -> Result<Self> {
        let mut v = Self::empty(shape_vars);
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let k = v.vars.len();
        for (neg, term) in split_top(&s)? {
            let mut coef = Rational64::from_integer(if neg { -1 } else { 1 });
            let mut pi_pow = 0;
            let mut has_i = false;
            let mut li: Option<Vec<i64>> = None;
            let mut logs: Vec<Vec<i64>> = Vec::new();
            for f in split_factors(&term) {
                if let Some(r) = parse_rat(&f) {
                    coef *= r;
                } else if f == "pi^2" {
                    pi_pow += 2;
                } else if f == "pi" {
                    pi_pow += 1;
                } else if f == "i" || f == "I" {
                    has_i = true;
                } else if let Some((arg, tail)) = inner(&f, "Li") {
                    if !tail.is_empty() || li.is_some() {
                        return Err(Error::Parse(format!("bad dilogarithm factor {f}")));
                    }
                    li = Some(parse_monomial(arg, &v.vars)?);
                } else if let Some((arg, tail)) = inner(&f, "log") {
                    let e = parse_monomial(arg, &v.vars)?;
                    match tail {
                        "" => logs.push(e),
                        "^2" => {
                            logs.push(e.clone());
                            logs.push(e);
                        }
                        _ => return Err(Error::Parse(format!("bad log factor {f}"))),
                    }
                } else {
                    return Err(Error::Parse(format!("unrecognized factor {f}")));
                }
            }
            match (li, logs.len(), pi_pow, has_i) {
                (None, 0, 2, false) => v.const_pi2 += coef,
                (Some(e), 0, 0, false) => {
                    if !coef.is_integer() || coef.numer().abs() != 1 {
                        return Err(Error::Parse(format!("dilogarithm coefficient must be +-1 in {term}")));
                    }
                    v.dilog.push(DilogTerm { eps: *coef.numer() as i32, exps: e });
                }
                (None, 2, 0, false) => {
                    let (a, b) = (&logs[0], &logs[1]);
                    let half = coef / Rational64::from_integer(2);
                    for i in 0..k {
                        for j in 0..k {
                            v.bilinear[i][j] += half * Rational64::from_integer(a[i] * b[j] + a[j] * b[i]);
                        }
                    }
                }
                (None, 1, 1, true) => {
                    for i in 0..k {
                        v.linear_ipi[i] += coef * Rational64::from_integer(logs[0][i]);
                    }
                }
                _ => return Err(Error::Parse(format!("unsupported term {term}"))),
            }
        }
        v.moduli = v.dilog.clone();
        v.validate()?;
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    vars: Vec<String>,
    const_pi2: Value,
    dilog: Vec<DilogTerm>,
    bilinear: Vec<Vec<Value>>,
    linear_ipi: Vec<Value>,
    #[serde(default)]
    moduli: Option<Vec<DilogTerm>>,
}

fn rat_from_json(v: &Value) -> Result<Rational64> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(Rational64::from_integer)
            .ok_or_else(|| Error::Parse(format!("rational must be an integer or a string, got {n}"))),
        Value::String(s) => parse_rat(s).ok_or_else(|| Error::Parse(format!("bad rational {s}"))),
        _ => Err(Error::Parse(format!("bad rational {v}"))),
    }
}

fn rat_to_json(r: &Rational64) -> Value {
    if r.is_integer() {
        Value::from(*r.numer())
    } else {
        Value::from(r.to_string())
    }
}

impl PotentialExpression {
    pub fn from_json(v: &Value) -> Result<Self> {
        let p: PotentialJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let moduli = p.moduli.unwrap_or_else(|| p.dilog.clone());
        let out = PotentialExpression {
            vars: p.vars,
            const_pi2: rat_from_json(&p.const_pi2)?,
            dilog: p.dilog,
            bilinear: p.bilinear.iter().map(|r| r.iter().map(rat_from_json).collect()).collect::<Result<_>>()?,
            linear_ipi: p.linear_ipi.iter().map(rat_from_json).collect::<Result<_>>()?,
            moduli,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(PotentialJson {
            vars: self.vars.clone(),
            const_pi2: rat_to_json(&self.const_pi2),
            dilog: self.dilog.clone(),
            bilinear: self.bilinear.iter().map(|r| r.iter().map(rat_to_json).collect()).collect(),
            linear_ipi: self.linear_ipi.iter().map(rat_to_json).collect(),
            moduli: Some(self.moduli.clone()),
        })
        .unwrap()
    }
}

impl std::fmt::Display for PotentialExpression {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mono = |e: &[i64]| -> String {
            let parts: Vec<String> = e
                .iter()
                .zip(&self.vars)
                .filter(|(a, _)| **a != 0)
                .map(|(a, v)| if *a == 1 { v.clone() } else { format!("{v}^{a}") })
                .collect();
            if parts.is_empty() { "1".into() } else { parts.join("*") }
        };
        let mut terms: Vec<String> = Vec::new();
        if !self.const_pi2.is_zero() {
            terms.push(format!("{}*pi^2", self.const_pi2));
        }
        for t in &self.dilog {
            terms.push(format!("{}Li({})", if t.eps < 0 { "-" } else { "" }, mono(&t.exps)));
        }
        let k = self.vars.len();
        for i in 0..k {
            for j in i..k {
                let c = if i == j { self.bilinear[i][i] } else { self.bilinear[i][j] * Rational64::from_integer(2) };
                if c.is_zero() {
                    continue;
                }
                let (a, b) = (&self.vars[i], &self.vars[j]);
                if i == j {
                    terms.push(format!("{c}*log({a})^2"));
                } else {
                    terms.push(format!("{c}*log({a})*log({b})"));
                }
            }
        }
        for (c, v) in self.linear_ipi.iter().zip(&self.vars) {
            if !c.is_zero() {
                terms.push(format!("{c}*i*pi*log({v})"));
            }
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        let s = terms.join(" + ").replace("+ -", "- ");
        write!(f, "{s}")
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_figure_eight() {
        let v = PotentialExpression::parse("Li(x) - Li(x^-1*m^-2) - 4*log(m)*log(x*m)", &["x"]).unwrap();
        assert_eq!(v.dilog.len(), 2);
        assert_eq!(v.bilinear[0][1], Rational64::from_integer(-2));
        assert_eq!(v.bilinear[1][1], Rational64::from_integer(-4));
        let again = PotentialExpression::parse(&v.to_string(), &["x"]).unwrap();
        assert_eq!(again, v);
    }
}
