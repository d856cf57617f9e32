//! Oriented ideal triangulations as words in S and S^-1.
//!
//! A term `<a, b | S^eps | c, d>` carries in-labels (a, b) and out-labels
//! (c, d). Its linear constraint is `c = a + b` for S and `a = c + d` for
//! S^-1, and the tetrahedron modulus is `exp(d - b)` in both cases.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{DilogTerm, PotentialExpression};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetraTerm {
    pub eps: i32,
    #[serde(rename = "in")]
    pub in_labels: [u32; 2],
    #[serde(rename = "out")]
    pub out_labels: [u32; 2],
}

/// `sum coeffs[p] * p = u_coeff * u`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeridianForm {
    pub coeffs: BTreeMap<u32, i64>,
    pub u_coeff: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangulation {
    #[serde(default)]
    pub name: String,
    pub terms: Vec<TetraTerm>,
    pub meridian: MeridianForm,
    #[serde(default)]
    pub notes: String,
}

impl TetraTerm {
    pub fn new(a: u32, b: u32, eps: i32, c: u32, d: u32) -> Self {
        TetraTerm { eps, in_labels: [a, b], out_labels: [c, d] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub labels: usize,
    pub tetrahedra: usize,
}

/// Choice of free labels when solving the linear constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotOrder {
    /// pivots taken from the highest labels, free variables are low labels
    HighLabels,
    /// pivots taken from the lowest labels
    LowLabels,
}

/// Every label as a rational combination of the free labels and u.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearReduction {
    pub labels: Vec<u32>,
    pub free: Vec<u32>,
    /// label -> coefficients over (free..., u)
    pub exprs: BTreeMap<u32, Vec<BigRational>>,
}

impl Triangulation {
    pub fn validate(&self) -> Result<ValidationReport> {
        if self.terms.is_empty() {
            return Err(Error::Gluing("no tetrahedra".into()));
        }
        let mut ins: BTreeMap<u32, usize> = BTreeMap::new();
        let mut outs: BTreeMap<u32, usize> = BTreeMap::new();
        for (k, t) in self.terms.iter().enumerate() {
            if t.eps != 1 && t.eps != -1 {
                return Err(Error::Gluing(format!("term {k}: orientation must be +1 or -1")));
            }
            for l in t.in_labels {
                *ins.entry(l).or_default() += 1;
            }
            for l in t.out_labels {
                *outs.entry(l).or_default() += 1;
            }
        }
        let all: BTreeSet<u32> = ins.keys().chain(outs.keys()).cloned().collect();
        for l in &all {
            let i = ins.get(l).cloned().unwrap_or(0);
            let o = outs.get(l).cloned().unwrap_or(0);
            if i != 1 || o != 1 {
                return Err(Error::Gluing(format!("label p{l} appears {i} times as in-label and {o} times as out-label")));
            }
        }
        if self.meridian.u_coeff == 0 || self.meridian.coeffs.values().all(|&c| c == 0) {
            return Err(Error::Meridian("meridian form is degenerate".into()));
        }
        for l in self.meridian.coeffs.keys() {
            if !all.contains(l) {
                return Err(Error::Meridian(format!("meridian refers to unknown label p{l}")));
            }
        }
        Ok(ValidationReport { labels: all.len(), tetrahedra: self.terms.len() })
    }

    pub fn labels(&self) -> Vec<u32> {
        let s: BTreeSet<u32> = self.terms.iter().flat_map(|t| t.in_labels.iter().chain(&t.out_labels).cloned()).collect();
        s.into_iter().collect()
    }

    pub fn reduce(&self) -> Result<LinearReduction> {
        self.reduce_with(PivotOrder::HighLabels)
    }

    pub fn reduce_with(&self, order: PivotOrder) -> Result<LinearReduction> {
        if self.terms.is_empty() {
            return Err(Error::Rank("empty triangulation".into()));
        }
        self.validate()?;
        let labels = self.labels();
        let k = labels.len();
        let ix: BTreeMap<u32, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let q = |x: i64| BigRational::from_integer(BigInt::from(x));
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for t in &self.terms {
            let mut r = vec![BigRational::zero(); k + 1];
            let [a, b] = t.in_labels;
            let [c, d] = t.out_labels;
            if t.eps == 1 {
                r[ix[&c]] += q(1);
                r[ix[&a]] -= q(1);
                r[ix[&b]] -= q(1);
            } else {
                r[ix[&a]] += q(1);
                r[ix[&c]] -= q(1);
                r[ix[&d]] -= q(1);
            }
            rows.push(r);
        }
        let mut r = vec![BigRational::zero(); k + 1];
        for (l, c) in &self.meridian.coeffs {
            r[ix[l]] += q(*c);
        }
        r[k] = -q(self.meridian.u_coeff);
        rows.push(r);

        let cols: Vec<usize> = match order {
            PivotOrder::HighLabels => (0..k).rev().collect(),
            PivotOrder::LowLabels => (0..k).collect(),
        };
        let (rref, pivots) = rref(rows, &cols);
        for row in &rref {
            if row[..k].iter().all(|x| x.is_zero()) && !row[k].is_zero() {
                return Err(Error::Rank("constraints force u = 0".into()));
            }
        }
        let free_cols: Vec<usize> = (0..k).filter(|c| !pivots.contains(c)).collect();
        let nf = free_cols.len();
        let mut exprs = BTreeMap::new();
        for (j, &c) in free_cols.iter().enumerate() {
            let mut v = vec![BigRational::zero(); nf + 1];
            v[j] = BigRational::one();
            exprs.insert(labels[c], v);
        }
        for (row, &c) in rref.iter().zip(&pivots) {
            let mut v = vec![BigRational::zero(); nf + 1];
            for (j, &fc) in free_cols.iter().enumerate() {
                v[j] = -row[fc].clone();
            }
            v[nf] = -row[k].clone();
            exprs.insert(labels[c], v);
        }
        Ok(LinearReduction { labels: labels.clone(), free: free_cols.iter().map(|&c| labels[c]).collect(), exprs })
    }

    pub fn build_potential(&self) -> Result<PotentialExpression> {
        self.build_potential_with(PivotOrder::HighLabels)
    }

    /// Potential in the free labels (named `p<k>`) and m.
    pub fn build_potential_with(&self, order: PivotOrder) -> Result<PotentialExpression> {
        let red = self.reduce_with(order)?;
        let red = red.pin_flat_directions(self);
        let names: Vec<String> = red.free.iter().map(|l| format!("p{l}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut v = PotentialExpression::empty(&refs);
        let n = v.vars.len();
        let mut bil = vec![vec![BigRational::zero(); n]; n];
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        for t in &self.terms {
            let [a, b] = t.in_labels;
            let [c, d] = t.out_labels;
            let z: Vec<BigRational> = red.exprs[&d].iter().zip(&red.exprs[&b]).map(|(x, y)| x - y).collect();
            let other = if t.eps == 1 { &red.exprs[&a] } else { &red.exprs[&c] };
            for i in 0..n {
                for j in 0..n {
                    bil[i][j] += (&z[i] * &other[j] + &z[j] * &other[i]) * &half;
                }
            }
            let ze = to_int_vec(&z)?;
            if t.eps == 1 {
                v.const_pi2 -= Rational64::new(1, 6);
                v.dilog.push(DilogTerm { eps: 1, exps: ze.clone() });
            } else {
                v.const_pi2 += Rational64::new(1, 6);
                v.dilog.push(DilogTerm { eps: -1, exps: ze.iter().map(|x| -x).collect() });
            }
            v.moduli.push(DilogTerm { eps: 1, exps: ze });
        }
        v.bilinear = bil
            .iter()
            .map(|r| r.iter().map(to_rat64).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        v.validate()?;
        Ok(v)
    }
}

fn to_int_vec(v: &[BigRational]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            if x.is_integer() {
                x.to_integer().to_i64().ok_or_else(|| Error::NonIntegerExponent(format!("{x} overflows")))
            } else {
                Err(Error::NonIntegerExponent(format!("modulus exponent {x}")))
            }
        })
        .collect()
}

fn to_rat64(x: &BigRational) -> Result<Rational64> {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(a), Some(b)) => Ok(Rational64::new(a, b)),
        _ => Err(Error::NonIntegerExponent(format!("{x} overflows"))),
    }
}

fn rref(mut rows: Vec<Vec<BigRational>>, cols: &[usize]) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pv = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x / &pv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

impl LinearReduction {
    /// Free directions that no tetrahedron sees leave the potential flat;
    /// pin the lowest such free labels to zero.
    fn pin_flat_directions(mut self, t: &Triangulation) -> Self {
        let nf = self.free.len();
        // rows: modulus exponents and the other factor of each bilinear term
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for term in &t.terms {
            let [a, b] = term.in_labels;
            let [c, d] = term.out_labels;
            let z: Vec<BigRational> = self.exprs[&d].iter().zip(&self.exprs[&b]).map(|(x, y)| x - y).collect();
            rows.push(z[..nf].to_vec());
            let o = if term.eps == 1 { &self.exprs[&a] } else { &self.exprs[&c] };
            rows.push(o[..nf].to_vec());
        }
        let cols: Vec<usize> = (0..nf).rev().collect();
        let (_, pivots) = rref(rows, &cols);
        if pivots.len() == nf {
            return self;
        }
        let mut keep: Vec<usize> = pivots.clone();
        keep.sort();
        for e in self.exprs.values_mut() {
            let mut v: Vec<BigRational> = keep.iter().map(|&j| e[j].clone()).collect();
            v.push(e[nf].clone());
            *e = v;
        }
        self.free = keep.iter().map(|&j| self.free[j]).collect();
        self
    }
}

/// Split a word into blocks L^s R^t after rotating it to start with L and
/// end with R.
fn lr_blocks(word: &str) -> Result<Vec<(usize, usize)>> {
    let w: Vec<char> = word.trim().chars().collect();
    if w.is_empty() || w.iter().any(|c| *c != 'L' && *c != 'R') {
        return Err(Error::NotHyperbolic(format!("{word:?} is not a word in L and R")));
    }
    if !w.contains(&'L') || !w.contains(&'R') {
        return Err(Error::NotHyperbolic(format!("{word} is a power of a single letter")));
    }
    // rotate so that the word starts right after an R-to-L boundary
    let n = w.len();
    let start = (0..n).find(|&i| w[i] == 'L' && w[(i + n - 1) % n] == 'R').unwrap();
    let rot: Vec<char> = (0..n).map(|i| w[(start + i) % n]).collect();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        let s0 = i;
        while i < n && rot[i] == 'L' {
            i += 1;
        }
        let s = i - s0;
        let t0 = i;
        while i < n && rot[i] == 'R' {
            i += 1;
        }
        blocks.push((s, i - t0));
    }
    Ok(blocks)
}

/// Layered triangulation of the once-punctured torus bundle with monodromy
/// `word`, one tetrahedron per letter.
pub fn ptb_triangulation(word: &str) -> Result<Triangulation> {
    let blocks = lr_blocks(word)?;
    let nb = blocks.len();
    // raw labels: (kind, block, index), kind in a b c d
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
    struct Raw(char, usize, usize);
    let mut parent: BTreeMap<Raw, Raw> = BTreeMap::new();
    fn find(p: &mut BTreeMap<Raw, Raw>, x: Raw) -> Raw {
        let mut r = x;
        while let Some(&q) = p.get(&r) {
            if q == r {
                break;
            }
            r = q;
        }
        p.insert(x, r);
        r
    }
    let union = |p: &mut BTreeMap<Raw, Raw>, x: Raw, y: Raw| {
        let (a, b) = (find(p, x), find(p, y));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            p.insert(hi, lo);
        }
    };
    for (k, &(s, t)) in blocks.iter().enumerate() {
        let next = (k + 1) % nb;
        union(&mut parent, Raw('b', k, 0), Raw('c', next, 0));
        union(&mut parent, Raw('a', k, 0), Raw('d', next, 0));
        union(&mut parent, Raw('b', k, t), Raw('c', k, s));
        union(&mut parent, Raw('a', k, t), Raw('d', k, s));
    }
    let mut raw_terms: Vec<(Raw, Raw, i32, Raw, Raw)> = Vec::new();
    for (k, &(s, t)) in blocks.iter().enumerate() {
        for i in 0..s {
            raw_terms.push((Raw('d', k, i), Raw('c', k, i + 1), -1, Raw('d', k, i + 1), Raw('c', k, i)));
        }
        for j in 0..t {
            raw_terms.push((Raw('b', k, j), Raw('a', k, j + 1), 1, Raw('b', k, j + 1), Raw('a', k, j)));
        }
    }
    let mut ids: BTreeMap<Raw, u32> = BTreeMap::new();
    let mut id_of = |p: &mut BTreeMap<Raw, Raw>, x: Raw| -> u32 {
        let r = find(p, x);
        let next = ids.len() as u32 + 1;
        *ids.entry(r).or_insert(next)
    };
    let mut terms = Vec::new();
    for &(a, b, eps, c, d) in &raw_terms {
        let a = id_of(&mut parent, a);
        let b = id_of(&mut parent, b);
        let c = id_of(&mut parent, c);
        let d = id_of(&mut parent, d);
        terms.push(TetraTerm::new(a, b, eps, c, d));
    }
    let mut coeffs: BTreeMap<u32, i64> = BTreeMap::new();
    for (k, &(s, t)) in blocks.iter().enumerate() {
        for (raw, c) in [(Raw('c', k, 0), 1), (Raw('c', k, s), -1), (Raw('a', k, 0), -1), (Raw('a', k, t), 1)] {
            *coeffs.entry(id_of(&mut parent, raw)).or_default() += c;
        }
    }
    coeffs.retain(|_, c| *c != 0);
    let tri = Triangulation {
        name: format!("ptb_{word}"),
        terms,
        meridian: MeridianForm { coeffs, u_coeff: 2 },
        notes: format!("punctured torus bundle with monodromy {word}"),
    };
    tri.validate()?;
    Ok(tri)
}

impl LinearReduction {
    /// Rank of the solution: number of free labels.
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Value of a label for given free values and u.
    pub fn eval(&self, label: u32, free: &[f64], u: f64) -> f64 {
        let e = &self.exprs[&label];
        let mut s = e[free.len()].to_f64().unwrap_or(f64::NAN) * u;
        for (c, x) in e.iter().zip(free) {
            s += c.to_f64().unwrap_or(f64::NAN) * x;
        }
        s
    }

    /// Whether every expression has integer coefficients.
    pub fn is_integral(&self) -> bool {
        self.exprs.values().all(|e| e.iter().all(|x| x.is_integer()))
    }
}
