//! Hyperbolic Dehn filling by continuation of the surgery constraint
//! p u + q v = pi i from the complete structure.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialExpression;
use crate::saddle::{degenerate, max_norm, nearest_branch, shape_residual, solve_linear, SaddleSolution};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, Serialize)]
pub struct FillingResult {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
    #[serde(serialize_with = "ser_c")]
    pub u: Complex64,
    /// v measured from its value at the complete structure
    #[serde(serialize_with = "ser_c")]
    pub v: Complex64,
    pub core_length: f64,
    pub core_torsion: f64,
    pub filled_volume: f64,
    /// Bloch-Wigner sum at the filled shapes, an independent check
    pub dsum_volume: f64,
    pub constraint_residual: f64,
    pub steps: usize,
}

fn ser_c<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Clone, Copy, Debug)]
pub struct FillingOptions {
    /// initial number of equal steps in t
    pub steps: usize,
    pub max_halvings: usize,
}

impl Default for FillingOptions {
    fn default() -> Self {
        FillingOptions { steps: 800, max_halvings: 12 }
    }
}

/// (r, s) with p s - q r = 1 and |r| minimal.
pub fn frame(p: i64, q: i64) -> Result<(i64, i64)> {
    let (g, x, y) = egcd(p, q);
    if g.abs() != 1 {
        return Err(Error::NotCoprime(p, q));
    }
    // p x + q y = g
    let (mut s, mut r) = (x * g, -y * g);
    if p != 0 {
        let k = (-(r as f64) / p as f64).round() as i64;
        r += k * p;
        s += k * q;
    }
    debug_assert_eq!(p * s - q * r, 1);
    Ok((r, s))
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Length and torsion of the core curve from -2(r u + s v).
pub fn core_geometry(u: Complex64, v: Complex64, r: i64, s: i64) -> Result<(f64, f64)> {
    let z = -2.0 * (r as f64 * u + s as f64 * v);
    let length = z.re;
    let other = -(2.0 / PI) * (u * v.conj()).im;
    if (length - other).abs() > 1e-6 * (1.0 + length.abs()) {
        return Err(Error::InconsistentFrame(length, other));
    }
    let z = if length < 0.0 { -z } else { z };
    let mut t = z.im.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    Ok((z.re, t))
}

struct Point {
    l: Vec<Complex64>,
    vn: Complex64,
}

fn corrector(
    pot: &PotentialExpression,
    guess: &[Complex64],
    p: f64,
    q: f64,
    v0: Complex64,
    target: Complex64,
) -> Option<Point> {
    let n = pot.n();
    let mut l = guess.to_vec();
    for it in 0..40 {
        let g = pot.gradient_logs(&l).ok()?;
        let h = pot.hessian_logs(&l).ok()?;
        let mut res = shape_residual(pot, &l).ok()?;
        let vn = nearest_branch(0.5 * g[n], v0) - v0;
        res.push(p * l[n] + q * vn - target);
        let mut jac: Vec<Vec<Complex64>> = h[..n].to_vec();
        let mut last: Vec<Complex64> = h[n].iter().map(|z| 0.5 * q * z).collect();
        last[n] += p;
        jac.push(last);
        let neg: Vec<Complex64> = res.iter().map(|z| -z).collect();
        let dl = solve_linear(&jac, &neg)?;
        let step = max_norm(&dl);
        if step > 0.3 {
            return None;
        }
        for (a, d) in l.iter_mut().zip(&dl) {
            *a += d;
        }
        if step < 1e-14 || (it > 2 && step < 1e-12) {
            break;
        }
    }
    if degenerate(pot, &l) {
        return None;
    }
    let g = pot.gradient_logs(&l).ok()?;
    let vn = nearest_branch(0.5 * g[n], v0) - v0;
    let mut res = shape_residual(pot, &l).ok()?;
    res.push(p * l[n] + q * vn - target);
    if max_norm(&res) > 1e-10 {
        return None;
    }
    Some(Point { l, vn })
}

/// Continue from the complete structure `geo` (u = 0) along
/// p u + q (v - v_complete) = t pi i, t from 0 to 1.
pub fn dehn_fill(pot: &PotentialExpression, geo: &SaddleSolution, p: i64, q: i64, opts: &FillingOptions) -> Result<FillingResult> {
    let (r, s) = frame(p, q)?;
    let n = pot.n();
    if geo.logs.len() != n + 1 || geo.logs[n].norm() > 1e-12 {
        return Err(Error::Domain("filling starts from a complete structure at u = 0".into()));
    }
    let v0 = 0.5 * pot.gradient_logs(&geo.logs)?[n];
    let (pf, qf) = (p as f64, q as f64);
    let mut cur = Point { l: geo.logs.clone(), vn: Complex64::new(0.0, 0.0) };
    let mut prev: Option<(f64, Vec<Complex64>)> = None;
    let mut t = 0.0;
    let base = 1.0 / opts.steps.max(1) as f64;
    let mut h = base;
    let mut halvings = 0;
    let mut phi = Complex64::new(0.0, 0.0);
    let mut steps = 0;
    while t < 1.0 {
        let dt = h.min(1.0 - t);
        // secant predictor from the previous accepted point
        let guess: Vec<Complex64> = match &prev {
            Some((tp, lp)) => cur.l.iter().zip(lp).map(|(a, b)| a + (a - b) * (dt / (t - tp))).collect(),
            None => cur.l.clone(),
        };
        let target = I * (PI * (t + dt));
        match corrector(pot, &guess, pf, qf, v0, target) {
            Some(next) => {
                let du = next.l[n] - cur.l[n];
                phi += (cur.vn + next.vn) * du;
                prev = Some((t, std::mem::replace(&mut cur.l, next.l)));
                cur.vn = next.vn;
                t += dt;
                steps += 1;
                halvings = 0;
                h = (h * 1.5).min(base);
            }
            None => {
                halvings += 1;
                h /= 2.0;
                if halvings > opts.max_halvings {
                    return Err(Error::PathCollision(format!("({p},{q}) filling stalled at t={t:.6}")));
                }
            }
        }
    }
    let u = cur.l[n];
    let vn = cur.vn;
    let (core_length, core_torsion) = core_geometry(u, vn, r, s)?;
    let filled_volume = geo.volume + phi.im - (u * vn).im - 0.5 * PI * core_length;
    let dsum_volume = pot.dsum(&cur.l)?;
    if dsum_volume <= 1e-6 || (filled_volume - dsum_volume).abs() > 1e-5 {
        return Err(Error::NotHyperbolic(format!(
            "({p},{q}) filling ends at volume {filled_volume:.6} with shape sum {dsum_volume:.6}"
        )));
    }
    Ok(FillingResult {
        p,
        q,
        r,
        s,
        u,
        v: vn,
        core_length,
        core_torsion,
        filled_volume,
        dsum_volume,
        constraint_residual: (pf * u + qf * vn - I * PI).norm(),
        steps,
    })
}
