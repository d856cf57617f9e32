//! Dilogarithms and Faddeev's quantum dilogarithm.
//!
//! Branch conventions: principal logarithms throughout, `li2` has its cut on
//! `[1, inf)` and real inputs on the cut are evaluated as the limit from the
//! upper half plane.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const PI2_6: f64 = PI * PI / 6.0;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// B_n / (n+1)! for n = 0..=40, used by the series in w = -log(1-z).
fn bernoulli_coeffs() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let n_max = 40usize;
        let mut b: Vec<BigRational> = Vec::with_capacity(n_max + 1);
        b.push(BigRational::from_integer(1.into()));
        for n in 1..=n_max {
            // sum_{k<=n} C(n+1, k) B_k = 0
            let mut acc = BigRational::zero();
            let mut binom = BigInt::from(1);
            for (k, bk) in b.iter().enumerate() {
                acc += bk * BigRational::from_integer(binom.clone());
                binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        let mut fact = BigInt::from(1);
        b.iter()
            .enumerate()
            .map(|(n, bn)| {
                fact *= BigInt::from(n + 1);
                (bn / BigRational::from_integer(fact.clone())).to_f64().unwrap()
            })
            .collect()
    })
}

fn li2_series(z: Complex64) -> Complex64 {
    let mut sum = Complex64::zero();
    let mut zk = z;
    for k in 1..400 {
        let term = zk / (k * k) as f64;
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() {
            break;
        }
        zk *= z;
    }
    sum
}

fn li2_bernoulli(z: Complex64) -> Complex64 {
    let w = -(Complex64::new(1.0, 0.0) - z).ln();
    let c = bernoulli_coeffs();
    let mut sum = Complex64::zero();
    let mut wk = w;
    for (n, cn) in c.iter().enumerate() {
        if n > 1 && n % 2 == 1 {
            wk *= w;
            continue;
        }
        let term = wk * *cn;
        sum += term;
        if n > 4 && term.norm() <= 1e-18 * sum.norm() {
            break;
        }
        wk *= w;
    }
    sum
}

/// Principal branch of the Euler dilogarithm.
pub fn li2(z: Complex64) -> Complex64 {
    li2_flagged(z).0
}

/// Like [`li2`] but also reports whether `z` was treated as lying on the cut.
pub fn li2_flagged(z: Complex64) -> (Complex64, bool) {
    if z == Complex64::zero() {
        return (z, false);
    }
    if z.im.abs() <= 1e-14 * z.re.abs().max(1.0) && z.re >= 1.0 {
        let x = z.re;
        if x == 1.0 {
            return (Complex64::new(PI2_6, 0.0), false);
        }
        // limit from above: log(-x) = ln x - i pi
        let lx = Complex64::new(x.ln(), -PI);
        let v = -li2_unit(Complex64::new(1.0 / x, 0.0)) - PI2_6 - 0.5 * lx * lx;
        return (Complex64::new(v.re, PI * x.ln()), true);
    }
    (li2_unit_or_invert(z), false)
}

fn li2_unit_or_invert(z: Complex64) -> Complex64 {
    if z.norm() > 1.0 {
        let lz = (-z).ln();
        -li2_unit(z.inv()) - PI2_6 - 0.5 * lz * lz
    } else {
        li2_unit(z)
    }
}

fn li2_unit(z: Complex64) -> Complex64 {
    if z.norm() <= 0.5 {
        return li2_series(z);
    }
    if z.re > 0.5 {
        let one = Complex64::new(1.0, 0.0);
        if z == one {
            return Complex64::new(PI2_6, 0.0);
        }
        return PI2_6 - z.ln() * (one - z).ln() - li2_bernoulli(one - z);
    }
    li2_bernoulli(z)
}

fn check_regular(z: Complex64, what: &str) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("{what}: non-finite argument")));
    }
    if z.norm() < 1e-300 || (z - 1.0).norm() < 1e-300 {
        return Err(Error::Domain(format!("{what}({z}) at a logarithmic singularity")));
    }
    Ok(())
}

/// Rogers dilogarithm L(z) = Li2(z) + log(z) log(1-z)/2.
pub fn rogers_l(z: Complex64) -> Result<Complex64> {
    check_regular(z, "rogers_l")?;
    Ok(li2(z) + 0.5 * z.ln() * (1.0 - z).ln())
}

/// Bloch-Wigner function D(z) = Im Li2(z) + arg(1-z) log|z|.
pub fn bloch_wigner(z: Complex64) -> Result<f64> {
    check_regular(z, "bloch_wigner")?;
    if z.im == 0.0 {
        return Ok(0.0);
    }
    // evaluate in the upper half plane so both terms see the same side of the cut
    if z.im < 0.0 {
        return Ok(-bloch_wigner(z.conj())?);
    }
    Ok(li2(z).im + (1.0 - z).arg() * z.norm().ln())
}

/// Lobachevsky function, half the Clausen function at 2 theta.
pub fn lobachevsky(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t == 0.0 {
        return 0.0;
    }
    0.5 * li2(Complex64::from_polar(1.0, 2.0 * t)).im
}

/// The three moduli z, 1 - 1/z, 1/(1 - z) of an ideal tetrahedron.
pub fn moduli_triple(z: Complex64) -> [Complex64; 3] {
    [z, 1.0 - z.inv(), (1.0 - z).inv()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QDilogParams {
    pub gamma: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl QDilogParams {
    pub fn new(gamma: f64) -> Self {
        QDilogParams { gamma, abs_tol: 1e-10, max_panels: 1 << 20 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol <= 1e-6) {
            return Err(Error::Domain(format!("abs_tol must lie in (0, 1e-6], got {}", self.abs_tol)));
        }
        Ok(())
    }
}

// log sinh(z) up to a multiple of 2 pi i, stable for large |Re z|
fn log_sinh(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        z - LN_2 + (1.0 - (-2.0 * z).exp()).ln()
    } else {
        I * PI + log_sinh(-z)
    }
}

fn integrand(gamma: f64, phi: Complex64, x: Complex64) -> Complex64 {
    let log_den = log_sinh(gamma * x) + log_sinh(PI * x) + x.ln() + 2.0 * LN_2;
    (-I * phi * x - log_den).exp()
}

fn log_phi_strip(p: &QDilogParams, phi: Complex64) -> Result<Complex64> {
    let g = p.gamma;
    let delta = 0.5 * f64::min(1.0, PI / g);
    let gap = g + PI - phi.im.abs();
    let x_max = f64::max(1.0, (10.0 / p.abs_tol).ln() / gap + phi.re.abs() * delta / gap);
    let mut h = delta / 2.0;
    let mut n = (2.0 * x_max / h).ceil() as usize;
    if n > p.max_panels {
        return Err(Error::QuadratureFailure { tol: p.abs_tol, panels: p.max_panels });
    }
    let node = |t: f64| integrand(g, phi, Complex64::new(t, delta));
    let mut sum: Complex64 = (0..=n).map(|k| node(-x_max + k as f64 * h)).sum();
    let mut prev = sum * h;
    loop {
        // refine: add midpoints
        let mids: Complex64 = (0..n).map(|k| node(-x_max + (k as f64 + 0.5) * h)).sum();
        sum += mids;
        h /= 2.0;
        n *= 2;
        let cur = sum * h;
        if (cur - prev).norm() <= p.abs_tol {
            return Ok(cur);
        }
        if n > p.max_panels {
            return Err(Error::QuadratureFailure { tol: p.abs_tol, panels: p.max_panels });
        }
        prev = cur;
    }
}

fn check_pole(p: &QDilogParams, phi: Complex64) -> Result<()> {
    let scale = 1e-12 * (1.0 + phi.norm());
    if phi.re.abs() > scale {
        return Ok(());
    }
    let t = phi.im.abs();
    let g = p.gamma;
    // t = (2a+1) g + (2b+1) pi with a, b >= 0
    let mut b = 0.0;
    while (2.0 * b + 1.0) * PI + g <= t + scale {
        let rest = t - (2.0 * b + 1.0) * PI;
        let a = (rest / g - 1.0) / 2.0;
        if a >= -1e-9 && ((2.0 * a.round() + 1.0) * g - rest).abs() <= scale {
            return Err(Error::PoleHit(format!("{phi}")));
        }
        b += 1.0;
    }
    Ok(())
}

/// log of Faddeev's quantum dilogarithm, continued outside the strip
/// |Im phi| < pi + gamma with the difference equations.
pub fn log_phi_gamma(p: &QDilogParams, phi: Complex64) -> Result<Complex64> {
    p.validate()?;
    check_pole(p, phi)?;
    let g = p.gamma;
    let width = PI + g;
    if phi.im.abs() < width {
        return log_phi_strip(p, phi);
    }
    // shift by 2i*max(pi, gamma), which is narrower than the strip
    let big_pi = PI >= g;
    let step = 2.0 * f64::max(PI, g);
    let factor = |psi: Complex64| -> Complex64 {
        // log(1 + e^psi) or log(1 + e^{pi psi / gamma}) at the midpoint psi
        if big_pi {
            (1.0 + (PI * psi / g).exp()).ln()
        } else {
            (1.0 + psi.exp()).ln()
        }
    };
    let mut psi = phi;
    let mut acc = Complex64::zero();
    while psi.im >= width {
        let mid = psi - I * (step / 2.0);
        acc -= factor(mid);
        psi -= I * step;
    }
    while psi.im <= -width {
        let mid = psi + I * (step / 2.0);
        acc += factor(mid);
        psi += I * step;
    }
    Ok(log_phi_strip(p, psi)? + acc)
}

/// Faddeev's quantum dilogarithm.
pub fn phi_gamma(p: &QDilogParams, phi: Complex64) -> Result<Complex64> {
    let l = log_phi_gamma(p, phi)?;
    let v = l.exp();
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Domain(format!("phi_gamma overflow at {phi}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalReport {
    pub gammas: Vec<f64>,
    pub errors: Vec<f64>,
    /// errors strictly decrease along decreasing gamma
    pub decreasing: bool,
}

/// err(gamma) = |2 i gamma log Phi_gamma(phi) - Li2(-e^phi)| for each gamma.
pub fn phi_gamma_classical_check(gammas: &[f64], phi: Complex64) -> Result<ClassicalReport> {
    if phi.im.abs() >= PI {
        return Err(Error::Domain(format!("|Im phi| must be below pi, got {phi}")));
    }
    let mut errors = Vec::with_capacity(gammas.len());
    for &g in gammas {
        if !(g > 0.0 && g <= 0.5) {
            return Err(Error::Domain(format!("gamma {g} outside (0, 0.5]")));
        }
        let p = QDilogParams { gamma: g, abs_tol: 1e-12, max_panels: 1 << 22 };
        let l = log_phi_gamma(&p, phi)?;
        errors.push((2.0 * I * g * l - li2(-phi.exp())).norm());
    }
    let mut order: Vec<usize> = (0..gammas.len()).collect();
    order.sort_by(|&a, &b| gammas[b].total_cmp(&gammas[a]));
    let decreasing = order.windows(2).all(|w| errors[w[1]] < errors[w[0]]);
    Ok(ClassicalReport { gammas: gammas.to_vec(), errors, decreasing })
}

// ---------------------------------------------------------------------------
// identity suite

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

fn check(name: &str, residuals: &[f64], tol: f64) -> IdentityCheck {
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let pass = residuals.iter().all(|r| r.is_finite()) && max_residual <= tol;
    IdentityCheck { name: name.into(), samples: residuals.len(), max_residual, tol, pass }
}

/// Functional identities of the classical and quantum dilogarithms at
/// seeded random points.
pub fn identity_suite(seed: u64) -> Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = Complex64::new(1.0, 0.0);
    let upper = |rng: &mut ChaCha8Rng| Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
    let mut out = Vec::new();

    let mut sym = Vec::new();
    while sym.len() < 1000 {
        let z = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        if z.norm() < 1e-3 || (z - 1.0).norm() < 1e-3 {
            continue;
        }
        let d = bloch_wigner(z)?;
        sym.push((bloch_wigner(z.conj())? + d).abs().max((bloch_wigner(z.inv())? + d).abs()));
    }
    out.push(check("bloch-wigner conjugation and inversion", &sym, 1e-12));

    let mut rog = Vec::new();
    while rog.len() < 100 {
        let (a, b): (f64, f64) = (rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99));
        let (w, z) = (a.min(b), a.max(b));
        if z - w < 1e-4 {
            continue;
        }
        let (z, w) = (Complex64::new(z, 0.0), Complex64::new(w, 0.0));
        let s = rogers_l(z)? - rogers_l(w)? + rogers_l(w / z)? - rogers_l((one - z.inv()) / (one - w.inv()))?
            + rogers_l((one - z) / (one - w))?;
        rog.push((s - PI * PI / 6.0).norm());
    }
    out.push(check("rogers pentagon", &rog, 1e-10));

    let mut pent = Vec::new();
    let mut lob = Vec::new();
    while pent.len() < 100 {
        let (z, w) = (upper(&mut rng), upper(&mut rng));
        let args = [z, w, w / z, (one - z.inv()) / (one - w.inv()), (one - z) / (one - w)];
        if args.iter().any(|a| a.norm() < 1e-6 || (a - 1.0).norm() < 1e-6) {
            continue;
        }
        let d = args.iter().map(|a| bloch_wigner(*a)).collect::<Result<Vec<f64>>>()?;
        pent.push((d[0] - d[1] + d[2] - d[3] + d[4]).abs());
        let [z1, z2, z3] = moduli_triple(z);
        lob.push((d[0] - lobachevsky(z1.arg()) - lobachevsky(z2.arg()) - lobachevsky(z3.arg())).abs());
    }
    out.push(check("bloch-wigner pentagon", &pent, 1e-10));
    out.push(check("bloch-wigner as lobachevsky sum", &lob, 1e-10));

    let inv: Vec<f64> = (0..200)
        .map(|_| {
            let x = Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-3.1..3.1));
            (li2(-x.exp()) + li2(-(-x).exp()) + x * x / 2.0 + PI * PI / 6.0).norm() / (1.0 + x.norm_sqr())
        })
        .collect();
    out.push(check("dilogarithm inversion", &inv, 1e-11));

    let prod: Vec<f64> = (0..200)
        .map(|_| {
            let z = upper(&mut rng);
            let [a, b, c] = moduli_triple(z);
            (a * b * c + 1.0).norm()
        })
        .collect();
    out.push(check("modulus triple product", &prod, 1e-12));

    let gammas = [0.2, 0.45, 0.9, 1.6, 2.5];
    let phis = [
        Complex64::new(-0.8, -0.6),
        Complex64::new(-0.3, 0.2),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.4, 0.5),
        Complex64::new(0.9, -0.3),
    ];
    let (mut qinv, mut qdual, mut qdiff) = (Vec::new(), Vec::new(), Vec::new());
    for &g in &gammas {
        let p = QDilogParams::new(g);
        let dual = QDilogParams::new(PI * PI / g);
        for &phi in &phis {
            let lhs = phi_gamma(&p, phi)? * phi_gamma(&p, -phi)?;
            let rhs = (-(phi * phi / 2.0 + (PI * PI + g * g) / 6.0) / (2.0 * I * g)).exp();
            qinv.push((lhs - rhs).norm() / rhs.norm().max(1.0));
            let a = phi_gamma(&dual, phi)?;
            let b = phi_gamma(&p, g * phi / PI)?;
            qdual.push((a - b).norm() / a.norm().max(1.0));
            let r1 = phi_gamma(&p, phi + I * g)? / phi_gamma(&p, phi - I * g)?;
            let r2 = phi_gamma(&p, phi + I * PI)? / phi_gamma(&p, phi - I * PI)?;
            qdiff.push((r1 - 1.0 / (1.0 + phi.exp())).norm().max((r2 - 1.0 / (1.0 + (PI * phi / g).exp())).norm()));
        }
    }
    out.push(check("quantum dilogarithm inversion", &qinv, 1e-8));
    out.push(check("quantum dilogarithm duality", &qdual, 1e-8));
    out.push(check("quantum dilogarithm difference equations", &qdiff, 1e-8));

    let rep = phi_gamma_classical_check(&[0.2, 0.1], Complex64::new(0.3, 0.0))?;
    let ratio = rep.errors[1] / rep.errors[0];
    out.push(check("classical limit error ratio", &[ratio], 0.6));
    Ok(out)
}
