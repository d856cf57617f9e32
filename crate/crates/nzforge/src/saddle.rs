//! Saddle points of a potential: multistart Newton at the complete
//! structure, geometric selection, continuation in u and the series of v(u).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{GluingSystem, PotentialExpression};

const I: Complex64 = Complex64::new(0.0, 1.0);
const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionTag {
    Geometric,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleSolution {
    pub x: Vec<Complex64>,
    pub m: Complex64,
    pub ell: Complex64,
    pub moduli: Vec<Complex64>,
    pub volume: f64,
    pub residual: f64,
    pub tag: SolutionTag,
    /// log-coordinates (log x, u) on the branch used by the solver
    pub logs: Vec<Complex64>,
}

#[derive(Serialize)]
struct SolutionJson {
    x: Vec<[f64; 2]>,
    m: [f64; 2],
    ell: [f64; 2],
    volume: f64,
    residual: f64,
    tag: SolutionTag,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

impl SaddleSolution {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SolutionJson {
            x: self.x.iter().map(|z| pair(*z)).collect(),
            m: pair(self.m),
            ell: pair(self.ell),
            volume: self.volume,
            residual: self.residual,
            tag: self.tag,
        })
        .unwrap()
    }

    pub fn u(&self) -> Complex64 {
        *self.logs.last().unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub starts_per_var: usize,
    pub seed: u64,
    /// deterministic starts, e.g. printed solutions, as x values
    pub extra_starts: Vec<Vec<Complex64>>,
    pub max_iter: usize,
    pub dedup_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { starts_per_var: 200, seed: 0, extra_starts: Vec::new(), max_iter: 80, dedup_tol: 1e-8 }
    }
}

pub(crate) fn wrap(z: Complex64) -> Complex64 {
    Complex64::new(z.re, z.im - TWO_PI * (z.im / TWO_PI).round())
}

pub(crate) fn solve_linear(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = b.len();
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let rhs = DVector::from_column_slice(b);
    let sol = m.lu().solve(&rhs)?;
    if sol.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(sol.iter().cloned().collect())
}

pub(crate) fn sub_block(h: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    h[..n].iter().map(|r| r[..n].to_vec()).collect()
}

pub(crate) fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Shape-gradient reduced mod 2 pi i.
pub(crate) fn shape_residual(v: &PotentialExpression, l: &[Complex64]) -> Result<Vec<Complex64>> {
    let g = v.gradient_logs(l)?;
    Ok(g[..v.n()].iter().map(|z| wrap(*z)).collect())
}

/// Newton in log-coordinates with u = l[n] held fixed.
pub fn newton(v: &PotentialExpression, l0: &[Complex64], max_iter: usize) -> Option<Vec<Complex64>> {
    let n = v.n();
    let mut l = l0.to_vec();
    let mut small = 0;
    for _ in 0..max_iter {
        let r = shape_residual(v, &l).ok()?;
        let rn = max_norm(&r);
        if rn < 1e-13 {
            small += 1;
            if small > 1 {
                return Some(l);
            }
        }
        let h = v.hessian_logs(&l).ok()?;
        let neg: Vec<Complex64> = r.iter().map(|z| -z).collect();
        let mut dl = solve_linear(&sub_block(&h, n), &neg)?;
        let step = max_norm(&dl);
        if step > 1.0 {
            for z in dl.iter_mut() {
                *z /= step;
            }
        }
        for i in 0..n {
            l[i] += dl[i];
        }
        if step < 1e-15 && rn < 1e-11 {
            return Some(l);
        }
    }
    let r = shape_residual(v, &l).ok()?;
    if max_norm(&r) < 1e-11 {
        Some(l)
    } else {
        None
    }
}

pub(crate) fn degenerate(v: &PotentialExpression, l: &[Complex64]) -> bool {
    let n = v.n();
    if l[..n].iter().any(|z| z.re.abs() > 8.0 * std::f64::consts::LN_10) {
        return true;
    }
    v.dilog_args(l).iter().chain(v.moduli_values(l).iter()).any(|z| z.norm() < 1e-8 || z.norm() > 1e8 || (z - 1.0).norm() < 1e-8)
}

/// ell = exp(dPhi/du / 2) on the branch of `l`.
pub fn two_v(v: &PotentialExpression, l: &[Complex64]) -> Result<Complex64> {
    Ok(v.gradient_logs(l)?[v.n()])
}

/// Package a converged point; logs are normalized to principal values.
pub fn make_solution(v: &PotentialExpression, sys: &GluingSystem, l: &[Complex64]) -> Result<SaddleSolution> {
    let n = v.n();
    let x: Vec<Complex64> = l[..n].iter().map(|z| z.exp()).collect();
    let m = l[n].exp();
    let mut lp: Vec<Complex64> = x.iter().map(|z| z.ln()).collect();
    lp.push(l[n]);
    let ell = (0.5 * two_v(v, &lp)?).exp();
    let volume = v.dsum(&lp)?;
    Ok(SaddleSolution {
        x: x.clone(),
        m,
        ell,
        moduli: v.moduli_values(&lp),
        volume,
        residual: sys.residual(&x, m),
        tag: SolutionTag::Other,
        logs: lp,
    })
}

fn random_start(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let r: f64 = rng.gen_range((0.1f64).ln()..(10.0f64).ln());
            let t: f64 = rng.gen_range(-PI..PI);
            Complex64::new(r, t)
        })
        .collect()
}

fn same(a: &SaddleSolution, b: &SaddleSolution, tol: f64) -> bool {
    a.x.iter().zip(&b.x).all(|(p, q)| (p - q).norm() <= tol * (1.0 + p.norm()))
}

/// All distinct nondegenerate roots at m = 1 from the start set.
pub fn solve_complete(v: &PotentialExpression, sys: &GluingSystem, opts: &SolveOptions) -> Result<Vec<SaddleSolution>> {
    solve_at(v, sys, Complex64::new(0.0, 0.0), opts)
}

/// As [`solve_complete`] at a given u.
pub fn solve_at(v: &PotentialExpression, sys: &GluingSystem, u: Complex64, opts: &SolveOptions) -> Result<Vec<SaddleSolution>> {
    let n = v.n();
    let mut starts: Vec<Vec<Complex64>> = opts
        .extra_starts
        .iter()
        .filter(|s| s.len() == n && s.iter().all(|z| z.norm() > 0.0))
        .map(|s| s.iter().map(|z| z.ln()).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.starts_per_var * n {
        starts.push(random_start(&mut rng, n));
    }
    let found: Vec<Option<SaddleSolution>> = starts
        .par_iter()
        .map(|s| {
            let mut l = s.clone();
            l.push(u);
            let l = newton(v, &l, opts.max_iter)?;
            if degenerate(v, &l) {
                return None;
            }
            make_solution(v, sys, &l).ok()
        })
        .collect();
    let mut out: Vec<SaddleSolution> = Vec::new();
    for s in found.into_iter().flatten() {
        if !out.iter().any(|o| same(o, &s, opts.dedup_tol)) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(Error::NoConvergence(format!("no root from {} starts", starts.len())));
    }
    out.sort_by(|a, b| {
        b.volume.total_cmp(&a.volume).then_with(|| {
            let ka: Vec<f64> = a.x.iter().flat_map(|z| [z.re, z.im]).collect();
            let kb: Vec<f64> = b.x.iter().flat_map(|z| [z.re, z.im]).collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(out)
}

/// The root with the largest signed Bloch-Wigner sum.
pub fn geometric_solution(roots: &[SaddleSolution]) -> Result<SaddleSolution> {
    let best = roots
        .iter()
        .max_by(|a, b| {
            a.volume.total_cmp(&b.volume).then_with(|| {
                // deterministic tie break on coordinates
                let ka: Vec<f64> = a.x.iter().flat_map(|z| [z.re, z.im]).collect();
                let kb: Vec<f64> = b.x.iter().flat_map(|z| [z.re, z.im]).collect();
                kb.partial_cmp(&ka).unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .ok_or_else(|| Error::NoConvergence("empty root list".into()))?;
    let mut g = best.clone();
    g.tag = SolutionTag::Geometric;
    Ok(g)
}

/// Solve, pick the geometric root and reduce the gluing equations by roots
/// of unity fixed at that point.
pub fn complete_structure(v: &PotentialExpression, opts: &SolveOptions) -> Result<(SaddleSolution, GluingSystem)> {
    let sys = GluingSystem::from_potential(v)?;
    let roots = solve_complete(v, &sys, opts)?;
    let geo = geometric_solution(&roots)?;
    let reduced = sys.reduce_roots(v, &geo.logs);
    let mut geo = geo;
    geo.residual = reduced.residual(&geo.x, geo.m);
    Ok((geo, reduced))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeCheck {
    pub dsum: f64,
    /// Im V minus the D-sum
    pub saddle_gap: f64,
    /// 2 pi sum_i n_i log|x_i| where the gradient equals 2 pi i n
    pub branch_term: f64,
}

/// D-sum at a solution, cross-checked against Im V at |m| = 1.
pub fn volume_at(sol: &SaddleSolution, v: &PotentialExpression) -> Result<VolumeCheck> {
    let l = &sol.logs;
    let dsum = v.dsum(l)?;
    let im_v = v.evaluate_logs(l)?.im;
    let g = v.gradient_logs(l)?;
    let n = v.n();
    let mut branch = 0.0;
    for i in 0..n {
        let k = (g[i].im / TWO_PI).round();
        branch += TWO_PI * k * l[i].re;
    }
    Ok(VolumeCheck { dsum, saddle_gap: im_v - dsum, branch_term: branch })
}

// ---------------------------------------------------------------------------
// continuation

#[derive(Clone, Debug)]
pub struct PathSample {
    pub u: Complex64,
    pub logs: Vec<Complex64>,
    /// continuous branch of 2v = dPhi/du
    pub two_v: Complex64,
    pub ell: Complex64,
}

#[derive(Clone, Debug)]
pub struct ContinuationPath {
    pub samples: Vec<PathSample>,
    /// integral of 2v du from the first sample
    pub phi_accumulated: Complex64,
}

impl ContinuationPath {
    pub fn last(&self) -> &PathSample {
        self.samples.last().unwrap()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ContinuationOptions {
    pub max_step: f64,
    pub min_step: f64,
    pub max_halvings: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { max_step: 0.02, min_step: 1e-6, max_halvings: 10 }
    }
}

fn corrector(v: &PotentialExpression, l0: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = v.n();
    let mut l = l0.to_vec();
    for it in 0..12 {
        let r = shape_residual(v, &l).ok()?;
        let h = v.hessian_logs(&l).ok()?;
        let neg: Vec<Complex64> = r.iter().map(|z| -z).collect();
        let dl = solve_linear(&sub_block(&h, n), &neg)?;
        let s = max_norm(&dl);
        if s > 0.2 {
            return None;
        }
        for i in 0..n {
            l[i] += dl[i];
        }
        if s < 1e-14 || (it > 1 && s < 1e-12) {
            return Some(l);
        }
    }
    let r = shape_residual(v, &l).ok()?;
    if max_norm(&r) < 1e-11 {
        Some(l)
    } else {
        None
    }
}

fn tangent(v: &PotentialExpression, l: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = v.n();
    let h = v.hessian_logs(l).ok()?;
    let rhs: Vec<Complex64> = (0..n).map(|i| -h[i][n]).collect();
    solve_linear(&sub_block(&h, n), &rhs)
}

pub(crate) fn nearest_branch(z: Complex64, reference: Complex64) -> Complex64 {
    let k = ((z.im - reference.im) / TWO_PI).round();
    z - I * (TWO_PI * k)
}

/// Follow a solution along u(t) = u0 + t (u_target - u0).
pub fn continue_solution(
    v: &PotentialExpression,
    start_logs: &[Complex64],
    u_target: Complex64,
    opts: &ContinuationOptions,
) -> Result<ContinuationPath> {
    let n = v.n();
    let u0 = start_logs[n];
    let mut l = start_logs.to_vec();
    let tv0 = two_v(v, &l)?;
    let mut samples = vec![PathSample { u: u0, logs: l.clone(), two_v: tv0, ell: (0.5 * tv0).exp() }];
    let total = u_target - u0;
    let len = total.norm();
    if len == 0.0 {
        return Ok(ContinuationPath { samples, phi_accumulated: Complex64::new(0.0, 0.0) });
    }
    let mut t = 0.0;
    let mut h = (opts.max_step / len).min(1.0);
    let mut halvings = 0;
    let mut phi = Complex64::new(0.0, 0.0);
    while t < 1.0 {
        let dt = h.min(1.0 - t);
        let du = total * dt;
        let tan = tangent(v, &l).ok_or_else(|| Error::PathCollision(format!("singular Jacobian at t={t}")))?;
        let mut pred = l.clone();
        for i in 0..n {
            pred[i] += tan[i] * du;
        }
        pred[n] = u0 + total * (t + dt);
        match corrector(v, &pred) {
            Some(nl) if !degenerate(v, &nl) => {
                let prev = samples.last().unwrap().two_v;
                let tv = nearest_branch(two_v(v, &nl)?, prev);
                phi += 0.5 * (prev + tv) * du;
                samples.push(PathSample { u: nl[n], logs: nl.clone(), two_v: tv, ell: (0.5 * tv).exp() });
                l = nl;
                t += dt;
                halvings = 0;
                h = (h * 1.5).min(opts.max_step / len);
            }
            _ => {
                halvings += 1;
                h /= 2.0;
                if halvings > opts.max_halvings || h * len < opts.min_step * 1e-3 {
                    return Err(Error::PathCollision(format!("step halving failed at t={t:.6}")));
                }
            }
        }
    }
    Ok(ContinuationPath { samples, phi_accumulated: phi })
}

// ---------------------------------------------------------------------------
// power series

type Series = Vec<Complex64>;

fn s_mul(a: &Series, b: &Series) -> Series {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        if a[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..n - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// exp(a) for a with a[0] = 0.
fn s_exp0(a: &Series) -> Series {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[0] = Complex64::new(1.0, 0.0);
    // e' = a' e
    for k in 1..n {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            s += a[j] * out[k - j] * j as f64;
        }
        out[k] = s / k as f64;
    }
    out
}

/// log(1 + w) for w with w[0] = 0.
fn s_log1p(w: &Series) -> Series {
    let n = w.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut p = w.clone();
    for k in 1..n {
        let c = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        for i in 0..n {
            out[i] += p[i] * c;
        }
        p = s_mul(&p, w);
    }
    out
}

/// Coefficients c_0..c_order of 2v(u) around a solution at u = 0.
pub fn taylor_v(v: &PotentialExpression, sol: &SaddleSolution, order: usize) -> Result<Vec<Complex64>> {
    if order > 9 {
        return Err(Error::Domain(format!("order {order} above 9")));
    }
    let n = v.n();
    let len = order + 1;
    let l0 = &sol.logs;
    let h0 = v.hessian_logs(l0)?;
    let hxx = sub_block(&h0, n);
    let g0 = v.gradient_logs(l0)?;
    // branch integers so that the shape gradient vanishes exactly
    let shifts: Vec<Complex64> = (0..n).map(|i| I * (TWO_PI * (g0[i].im / TWO_PI).round())).collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut xs: Vec<Series> = (0..n)
        .map(|i| {
            let mut s = vec![zero; len];
            s[0] = l0[i];
            s
        })
        .collect();
    let mut useries = vec![zero; len];
    useries[0] = l0[n];
    if len > 1 {
        useries[1] = Complex64::new(1.0, 0.0);
    }
    let args0 = v.dilog_args(l0);
    let log_terms = |xs: &Vec<Series>| -> Vec<Series> {
        v.dilog
            .iter()
            .zip(&args0)
            .map(|(t, m0)| {
                let mut s = vec![zero; len];
                for (i, x) in xs.iter().enumerate() {
                    for k in 1..len {
                        s[k] += x[k] * t.exps[i] as f64;
                    }
                }
                for k in 1..len {
                    s[k] += useries[k] * t.exps[n] as f64;
                }
                // log(1 - M) = log(1 - M0) + log(1 - M0 (e^s - 1)/(1 - M0))
                let e = s_exp0(&s);
                let f = -*m0 / (1.0 - m0);
                let w: Series = (0..len).map(|k| if k == 0 { zero } else { e[k] * f }).collect();
                let mut out = s_log1p(&w);
                out[0] += (1.0 - m0).ln();
                out
            })
            .collect()
    };
    let all_series = |xs: &Vec<Series>| -> Vec<Series> {
        let mut a = xs.clone();
        a.push(useries.clone());
        a
    };
    let grad_series = |xs: &Vec<Series>, i: usize| -> Series {
        let logs = log_terms(xs);
        let a = all_series(xs);
        let mut g = vec![zero; len];
        for (t, lg) in v.dilog.iter().zip(&logs) {
            let c = -(t.eps as f64) * t.exps[i] as f64;
            if c != 0.0 {
                for k in 0..len {
                    g[k] += lg[k] * c;
                }
            }
        }
        for (kk, s) in a.iter().enumerate() {
            let b = v.bilinear[i][kk];
            let b = 2.0 * (*b.numer() as f64) / (*b.denom() as f64);
            if b != 0.0 {
                for k in 0..len {
                    g[k] += s[k] * b;
                }
            }
        }
        let c = v.linear_ipi[i];
        g[0] += I * PI * (*c.numer() as f64 / *c.denom() as f64);
        g
    };
    for _ in 0..len + 1 {
        let f: Vec<Series> = (0..n)
            .map(|i| {
                let mut g = grad_series(&xs, i);
                g[0] -= shifts[i];
                g
            })
            .collect();
        for k in 0..len {
            let rhs: Vec<Complex64> = (0..n).map(|i| -f[i][k]).collect();
            let d = solve_linear(&hxx, &rhs).ok_or_else(|| Error::NoConvergence("singular Hessian".into()))?;
            for i in 0..n {
                xs[i][k] += d[i];
            }
        }
    }
    Ok(grad_series(&xs, n))
}
