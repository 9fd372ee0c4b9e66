use crate::arith::factor;
use crate::error::{Error, Result};
use crate::C64;

// B_{2k}/(2k)! for k = 1..=15
const B2K_OVER_FACT: [f64; 15] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2.43290200817664e18,
    854513.0 / 138.0 / 1.1240007277776077e21,
    -236364091.0 / 2730.0 / 6.204484017332394e23,
    8553103.0 / 6.0 / 4.0329146112660565e26,
    -23749461029.0 / 870.0 / 3.0488834461171387e29,
    8615841276005.0 / 14322.0 / 2.652528598121911e32,
];

/// (exp(u) - 1)/u, stable near u = 0.
fn expm1_over(u: C64) -> C64 {
    if u.norm() < 1e-3 {
        let mut term = C64::new(1.0, 0.0);
        let mut acc = term;
        for k in 2..10 {
            term *= u / k as f64;
            acc += term;
        }
        acc
    } else {
        (u.exp() - 1.0) / u
    }
}

/// Euler–Maclaurin core. With `regular` the pole part 1/(s-1) is removed.
fn em(s: C64, a: f64, regular: bool) -> (C64, f64) {
    let n_shift = 15usize.max(s.norm().ceil() as usize + 10);
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..n_shift {
        acc += (-s * (n as f64 + a).ln()).exp();
    }
    let x = n_shift as f64 + a;
    let lx = x.ln();
    let x_s = (-s * lx).exp();
    let one_minus = C64::new(1.0, 0.0) - s;
    if regular {
        // ((x^{1-s}) - 1)/(s-1) = -ln x * expm1(u)/u with u = (1-s) ln x
        acc += -lx * expm1_over(one_minus * lx);
    } else {
        acc += x_s * x / (s - 1.0);
    }
    acc += x_s * 0.5;
    // Σ B_{2k}/(2k)! (s)_{2k-1} x^{1-s-2k}
    let inv_x2 = 1.0 / (x * x);
    let mut poch = s; // (s)_{1}
    let mut pw = x_s / x; // x^{-s-1}
    let mut err = 0.0;
    for (k, b) in B2K_OVER_FACT.iter().enumerate() {
        let term = poch * pw * *b;
        acc += term;
        err = term.norm();
        if err <= 1e-17 * acc.norm() {
            break;
        }
        let kk = (2 * k + 1) as f64;
        poch *= (s + kk) * (s + kk + 1.0);
        pw *= inv_x2;
    }
    (acc, err)
}

/// ζ(s, a) with an error estimate.
pub fn hurwitz_zeta_err(s: C64, a: f64) -> Result<(C64, f64)> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("hurwitz_zeta needs a > 0, got {a}")));
    }
    if s == C64::new(1.0, 0.0) {
        return Err(Error::Pole("hurwitz_zeta at s = 1".into()));
    }
    Ok(em(s, a, false))
}

/// ζ(s, a) = Σ_{n≥0} (n+a)^{-s}, continued.
pub fn hurwitz_zeta(s: C64, a: f64) -> Result<C64> {
    hurwitz_zeta_err(s, a).map(|v| v.0)
}

/// ζ(s, a) - 1/(s-1); entire in s, so finite at s = 1 where it equals -ψ(a).
pub fn hurwitz_zeta_regular(s: C64, a: f64) -> Result<C64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("hurwitz_zeta needs a > 0, got {a}")));
    }
    Ok(em(s, a, true).0)
}

pub fn zeta(s: C64) -> Result<C64> {
    hurwitz_zeta(s, 1.0)
}

/// ζ(s) with the Euler factors at p | q removed.
pub fn zeta_q(s: C64, q: u64) -> Result<C64> {
    let mut z = zeta(s)?;
    for (p, _) in factor(q) {
        z *= C64::new(1.0, 0.0) - (-s * (p as f64).ln()).exp();
    }
    Ok(z)
}
