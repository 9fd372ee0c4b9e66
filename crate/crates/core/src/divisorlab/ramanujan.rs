use crate::arith::{divisor_sigma, divisors, euler_phi, gcd, int_pow, lcm, mobius, mobius_phi_tables, phi_star};
use crate::error::{precondition, Error, Result};
use crate::specfun::{vertical_line_integral, zeta, LineKernel, LineValue, QuadratureSpec};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// ζ(1-λ+w) e^{w²}/w.
fn varpi_integrand(lambda: C64, w: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    zeta(one - lambda + w).unwrap_or(C64::new(f64::NAN, f64::NAN)) * (w * w).exp() / w
}

/// ϖ_λ(x) = (1/2πi) ∫_{(a)} x^{-w} ζ(1-λ+w) G(w)/w dw with G(w) = e^{w²}.
pub fn varpi(lambda: C64, x: f64, a: f64) -> Result<LineValue> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("varpi needs x > 0, got {x}")));
    }
    if !(a > lambda.re.abs()) {
        return precondition(format!("line Re w = {a} must lie right of |Re λ| = {}", lambda.re.abs()));
    }
    let lx = x.ln();
    // the integrand scales like x^{-a}, so the tail tolerance does too
    let mut spec = QuadratureSpec::for_gaussian_kernel(a, 1e-13);
    spec.tol = (1e-13 * (-a * lx).exp().max(1.0)).min(1e-4);
    vertical_line_integral(|w| varpi_integrand(lambda, w) * (-w * lx).exp(), &spec)
}

/// ϖ_λ on many points through a trapezoid kernel on the line Re w = |Re λ| + ½.
pub struct VarpiKernel {
    pub lambda: C64,
    kernel: LineKernel,
}

impl VarpiKernel {
    pub fn new(lambda: C64) -> Self {
        let a = lambda.re.abs() + 0.5;
        // poles at w = 0 and w = λ sit at least ½ left of the line
        let kernel = LineKernel::new(|w| varpi_integrand(lambda, w), a, 0.05, 7.0);
        VarpiKernel { lambda, kernel }
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.kernel.eval(x)
    }
}

/// Upper bound for |ϖ_μ(x)| from the line Re w = A: x^{-A} e^{A²} ζ(1-Re μ+A) √π/(2πA).
fn varpi_bound(mu_re: f64, x: f64) -> f64 {
    let a = (0.5 * x.ln()).max(mu_re.abs() + 0.5);
    let s = 1.0 - mu_re + a;
    let zeta_bound = s / (s - 1.0);
    (-a * x.ln() + a * a).exp() * zeta_bound * PI.sqrt() / (2.0 * PI * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorAfeReport {
    pub n: u64,
    pub lambda: C64,
    pub sigma: C64,
    pub expansion: C64,
    /// |σ - expansion| / |σ|
    pub residual: f64,
    pub l_max: u64,
    pub tail_bound: f64,
}

/// Bound on the l > l_max part of both expansion sums.
fn afe_tail(n: u64, lambda: C64, l_max: u64) -> f64 {
    let sq = (n as f64).sqrt();
    let dn = divisors(n).len() as f64;
    let sig1 = divisors(n).iter().sum::<u64>() as f64;
    let lr = lambda.re;
    let mut total = 0.0;
    let mut start = l_max as f64;
    for _ in 0..200 {
        let len = start;
        let x = start / sq;
        // terms decrease in l beyond the saddle, so the block start dominates
        let term = start.powf(lr - 1.0) * varpi_bound(lr, x)
            + (n as f64).powf(lr) * start.powf(-1.0 - lr) * varpi_bound(-lr, x);
        let block = term * (dn * len + sig1);
        total += block;
        if block < 1e-30 * total.max(1e-300) || block < 1e-300 {
            break;
        }
        start *= 2.0;
    }
    total
}

/// σ_λ(n) against Σ_l c_l(n) l^{λ-1} ϖ_λ(l/√n) + n^λ Σ_l c_l(n) l^{-1-λ} ϖ_{-λ}(l/√n).
/// `None` picks the smallest power-of-two multiple of 20√n with tail bound
/// below 1e-9 |σ_λ(n)|.
pub fn divisor_afe_residual(n: u64, lambda: C64, l_max: Option<u64>) -> Result<DivisorAfeReport> {
    if n == 0 {
        return precondition("n must be positive");
    }
    let sigma = divisor_sigma(n, lambda)?;
    let base = (20.0 * (n as f64).sqrt()).ceil() as u64;
    let l_max = match l_max {
        Some(l) => {
            if l < base {
                return precondition(format!("l_max = {l} below 20√n = {base}"));
            }
            l
        }
        None => {
            let mut l = base;
            while afe_tail(n, lambda, l) > 1e-9 * sigma.norm() {
                l *= 2;
                if l > 50_000_000 {
                    return Err(Error::TooLarge("divisor AFE needs l_max beyond 5e7".into()));
                }
            }
            l
        }
    };
    let tail_bound = afe_tail(n, lambda, l_max);
    let kp = VarpiKernel::new(lambda);
    let km = VarpiKernel::new(-lambda);
    let sq = (n as f64).sqrt();
    let (mu, phi) = mobius_phi_tables(l_max as usize);
    let nl = int_pow(n, lambda);
    let mut acc = C64::new(0.0, 0.0);
    for l in 1..=l_max {
        // c_l(n) = μ(l/g) φ(l)/φ(l/g), g = (l, n)
        let g = gcd(l, n);
        let r = (l / g) as usize;
        if mu[r] == 0 {
            continue;
        }
        let c = mu[r] as f64 * phi[l as usize] as f64 / phi[r] as f64;
        let x = l as f64 / sq;
        let first = int_pow(l, lambda - 1.0) * kp.eval(x);
        let second = nl * int_pow(l, -1.0 - lambda) * km.eval(x);
        acc += (first + second) * c;
    }
    let residual = (sigma - acc).norm() / sigma.norm();
    if tail_bound > 1e-6 * sigma.norm() {
        return Err(Error::Truncation { estimate: tail_bound, tol: 1e-6 * sigma.norm() });
    }
    Ok(DivisorAfeReport { n, lambda, sigma, expansion: acc, residual, l_max, tail_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub value: C64,
    pub target: C64,
    pub residual: f64,
    /// |partial(l_max) - partial(l_max/2)|, a pace estimate for the remainder.
    pub tail_estimate: f64,
}

/// σ_α(n) against ζ(1-α) Σ_{l ≤ l_max} c_l(n) l^{α-1}, for Re α ≤ -0.2.
pub fn ramanujan_expansion_residual(n: u64, alpha: C64, l_max: u64) -> Result<ExpansionReport> {
    if alpha.re > -0.2 {
        return precondition(format!("Re α = {} > -0.2: the expansion converges too slowly", alpha.re));
    }
    if l_max < 10_000 {
        return precondition("l_max must be at least 10^4");
    }
    if n == 0 {
        return precondition("n must be positive");
    }
    let (mu, phi) = mobius_phi_tables(l_max as usize);
    let mut acc = C64::new(0.0, 0.0);
    let mut half = C64::new(0.0, 0.0);
    for l in 1..=l_max {
        let g = gcd(l, n);
        let r = (l / g) as usize;
        if mu[r] != 0 {
            let c = mu[r] as f64 * phi[l as usize] as f64 / phi[r] as f64;
            acc += int_pow(l, alpha - 1.0) * c;
        }
        if l == l_max / 2 {
            half = acc;
        }
    }
    let z = zeta(C64::new(1.0, 0.0) - alpha)?;
    let value = z * acc;
    let target = divisor_sigma(n, alpha)?;
    Ok(ExpansionReport {
        value,
        target,
        residual: (value - target).norm(),
        tail_estimate: (z * (acc - half)).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma53Report {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub tail_bound: f64,
}

/// Σ_l l^{-2-λ} Σ_{(h,l)=1} Σ_{d|f} e(hf/l) f^{-s} against
/// ζ(s)ζ(1+λ+s) d^{-s} ζ(2+λ)^{-1} (1 + d^{-1-λ} - d^{-1-λ-s}).
///
/// The h-sum is c_l(f), and with c_l(f) = Σ_{e|(l,f)} e μ(l/e) the f-sum
/// closes: Σ_{d|f} c_l(f) f^{-s} = d^{-s} ζ(s) Σ_{e|l} e μ(l/e) (e/(e,d))^{-s}.
/// Only the l-sum is truncated.
pub fn lemma53_residual(s: C64, lambda: C64, d: u64, l_max: u64) -> Result<Lemma53Report> {
    if s.re < 1.3 {
        return precondition("closed inner sum needs Re s >= 1.3");
    }
    if lambda.re < -0.5 {
        return precondition("closed inner sum needs Re λ >= -0.5");
    }
    if d != 1 && !crate::arith::is_prime(d) {
        return precondition(format!("d = {d} must be 1 or prime"));
    }
    let lm = l_max as usize;
    let (mu, _) = mobius_phi_tables(lm);
    // g(l) = Σ_{e|l} e^{1-s} (e,d)^s μ(l/e), by a Dirichlet-convolution sieve
    let mut g = vec![C64::new(0.0, 0.0); lm + 1];
    for e in 1..=lm {
        let f = int_pow(e as u64, C64::new(1.0, 0.0) - s) * int_pow(gcd(e as u64, d), s);
        let mut k = e;
        let mut m = 1;
        while k <= lm {
            if mu[m] != 0 {
                g[k] += f * mu[m] as f64;
            }
            k += e;
            m += 1;
        }
    }
    let mut acc = C64::new(0.0, 0.0);
    for l in 1..=lm {
        acc += int_pow(l as u64, -2.0 - lambda) * g[l];
    }
    let one = C64::new(1.0, 0.0);
    let zs = zeta(s)?;
    let ds = int_pow(d, -s);
    let lhs = ds * zs * acc;
    let rhs = zs * zeta(one + lambda + s)? * ds / zeta(2.0 * one + lambda)?
        * (one + int_pow(d, -one - lambda) - int_pow(d, -one - lambda - s));
    // |d^{-s} e (e/(e,d))^{-s}| ≤ e^{1-σ}; Σ_{l>L} l^{-a} σ_{1-σ}(l) ≤ L^{1-a}(ζ(σ)/(a-1) + ζ(a+σ-1))
    let a = 2.0 + lambda.re;
    let sig = s.re;
    let zr = |x: f64| zeta(C64::new(x, 0.0)).map(|z| z.re);
    let tail_bound =
        zs.norm() * (l_max as f64).powf(1.0 - a) * (zr(sig)? / (a - 1.0) + zr(a + sig - 1.0)?);
    Ok(Lemma53Report { lhs, rhs, residual: (lhs - rhs).norm(), tail_bound })
}

/// Both sides of
/// Σ_{d|q} φ(d)μ(q/d) Σ_{d1,d2|q} μ(d1)μ(d2)/([d1,d2] Δ^s) = φ*(q) q^{-s} ∏_{p|q}(1 - p^{s-1}),
/// Δ = [d, (d1,d2)].
pub fn lemma31_sides(q: u64, s: C64) -> Result<(C64, C64)> {
    if q < 2 {
        return precondition("twisted Gauss-sum identity needs q >= 2");
    }
    let divs = divisors(q);
    let mut lhs = C64::new(0.0, 0.0);
    for &d in &divs {
        let outer = euler_phi(d) as f64 * mobius(q / d) as f64;
        if outer == 0.0 {
            continue;
        }
        let mut inner = C64::new(0.0, 0.0);
        for &d1 in &divs {
            let m1 = mobius(d1);
            if m1 == 0 {
                continue;
            }
            for &d2 in &divs {
                let m2 = mobius(d2);
                if m2 == 0 {
                    continue;
                }
                let delta = lcm(d, gcd(d1, d2))?;
                inner += int_pow(delta, -s) * ((m1 * m2) as f64 / lcm(d1, d2)? as f64);
            }
        }
        lhs += inner * outer;
    }
    let one = C64::new(1.0, 0.0);
    let mut rhs = int_pow(q, -s) * phi_star(q) as f64;
    for (p, _) in crate::arith::factor(q) {
        rhs *= one - int_pow(p, s - one);
    }
    Ok((lhs, rhs))
}

/// |LHS - RHS| / max(1, |RHS|).
pub fn lemma31_residual(q: u64, s: C64) -> Result<f64> {
    let (l, r) = lemma31_sides(q, s)?;
    Ok((l - r).norm() / r.norm().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_upto;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn varpi_small_x() {
        for lam in [c(0.3, 0.0), c(-0.4, 0.0), c(0.3, 0.2)] {
            let x = 1e-8;
            let v = varpi(lam, x, lam.re.abs() + 0.5).unwrap();
            let one = c(1.0, 0.0);
            let want = zeta(one - lam).unwrap() + (-lam * x.ln()).exp() * (lam * lam).exp() / lam;
            assert!((v.value - want).norm() <= 1e-5 * want.norm(), "{lam}: {} vs {want}", v.value);
        }
    }

    #[test]
    fn varpi_large_x_and_lines() {
        // decay is log-normal, e^{-(ln x)²/4} up to slowly varying factors
        let v = varpi(c(0.3, 0.0), 1e3, 0.8).unwrap();
        assert!(v.value.norm() <= varpi_bound(0.3, 1e3), "{}", v.value);
        assert!((v.value.re - 5.468477134e-7).abs() < 1e-15 && v.value.im.abs() < 1e-15, "{}", v.value);
        let v = varpi(c(0.3, 0.0), 1e5, 0.8).unwrap();
        assert!(v.value.norm() <= 1e-8, "{}", v.value);
        let a = varpi(c(0.3, 0.0), 2.0, 0.5).unwrap();
        let b = varpi(c(0.3, 0.0), 2.0, 1.5).unwrap();
        assert!((a.value - b.value).norm() <= a.err + b.err + 1e-12);
        let k = VarpiKernel::new(c(0.3, 0.0));
        for x in [0.05, 0.7, 2.0, 30.0] {
            let direct = varpi(c(0.3, 0.0), x, 0.8).unwrap();
            assert!((k.eval(x) - direct.value).norm() <= 1e-11 * direct.value.norm().max(1e-3), "{x}");
        }
    }

    #[test]
    fn divisor_afe_examples() {
        let r = divisor_afe_residual(1, c(0.3, 0.0), None).unwrap();
        assert!((r.expansion - 1.0).norm() <= 1e-7);
        for n in [12u64, 97] {
            let r = divisor_afe_residual(n, c(0.3, 0.0), None).unwrap();
            assert!(r.residual <= 1e-6, "{r:?}");
        }
        assert!(divisor_afe_residual(12, c(0.3, 0.0), Some(10)).is_err());
    }

    #[test]
    fn ramanujan_examples() {
        let r = ramanujan_expansion_residual(1, c(-0.5, 0.0), 100_000).unwrap();
        assert!(r.residual <= 1e-4, "{r:?}");
        let r = ramanujan_expansion_residual(6, c(-0.5, 0.0), 100_000).unwrap();
        assert!(r.residual <= 1e-3, "{r:?}");
        let r = ramanujan_expansion_residual(2, c(-1.0, 0.0), 100_000).unwrap();
        assert!((r.target.re - 1.5).abs() < 1e-15 && r.residual <= 1e-4, "{r:?}");
        assert!(ramanujan_expansion_residual(2, c(-0.1, 0.0), 100_000).is_err());
    }

    #[test]
    fn lemma53_examples() {
        let r = lemma53_residual(c(2.0, 0.0), c(0.0, 0.0), 1, 200_000).unwrap();
        assert!(r.residual <= 1e-4 && r.tail_bound <= 1e-4, "{r:?}");
        let r = lemma53_residual(c(2.5, 0.0), c(0.3, 0.0), 3, 200_000).unwrap();
        assert!(r.residual <= 1e-4 && r.tail_bound <= 1e-4, "{r:?}");
        // d = 1: the bracket is 1 + 1 - 1
        let s = c(2.0, 0.5);
        let lam = c(0.1, 0.0);
        let r = lemma53_residual(s, lam, 1, 1000).unwrap();
        let one = c(1.0, 0.0);
        let want = zeta(s).unwrap() * zeta(one + lam + s).unwrap() / zeta(2.0 * one + lam).unwrap();
        assert!((r.rhs - want).norm() < 1e-14 * want.norm());
        assert!(lemma53_residual(s, lam, 4, 1000).is_err());
    }

    #[test]
    fn lemma31_examples() {
        for p in primes_upto(50) {
            let (l, r) = lemma31_sides(p, c(0.0, 0.0)).unwrap();
            let want = (p as f64 - 2.0) * (1.0 - 1.0 / p as f64);
            assert!((l.re - want).abs() < 1e-12 * want.max(1.0) && (r.re - want).abs() < 1e-12 * want.max(1.0));
        }
        assert!(lemma31_residual(9, c(0.7, 0.3)).unwrap() <= 1e-12);
    }

    proptest! {
        #[test]
        fn lemma31_random(sr in -2.0f64..2.0, si in -5.0f64..5.0, q in prop::sample::select(vec![4u64, 8, 9, 12, 25, 27, 30, 7, 11])) {
            prop_assert!(lemma31_residual(q, c(sr, si)).unwrap() <= 1e-12);
        }
    }
}
