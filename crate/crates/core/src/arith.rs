//! Integer and multiplicative kernels.

use crate::error::{precondition, Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn gcd_i(a: i64, b: i64) -> u64 {
    gcd(a.unsigned_abs(), b.unsigned_abs())
}

pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::Overflow("lcm"))
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Reduce an integer into `[0, m)`.
pub fn rem(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m` via extended Euclid, or `None` if not a unit.
pub fn mod_inv(a: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, rem(a, m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn of(n: u64) -> Result<Self> {
        if n == 0 {
            return precondition("cannot factor 0");
        }
        let mut factors = Vec::new();
        let mut m = n;
        let mut p = 2u64;
        while p * p <= m {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if m > 1 {
            factors.push((m, 1));
        }
        Ok(Factorization { n, factors })
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// The radical q* = product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

pub fn factor(n: u64) -> Vec<(u64, u32)> {
    Factorization::of(n.max(1)).map(|f| f.factors).unwrap_or_default()
}

pub fn divisors(n: u64) -> Vec<u64> {
    Factorization::of(n.max(1)).map(|f| f.divisors()).unwrap_or_default()
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

pub fn mobius(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factor(n)
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

pub fn radical(n: u64) -> u64 {
    factor(n).iter().map(|&(p, _)| p).product()
}

/// Tables of μ and φ on `0..=n` by a linear sieve.
pub fn mobius_phi_tables(n: usize) -> (Vec<i8>, Vec<u32>) {
    let mut mu = vec![0i8; n + 1];
    let mut phi = vec![0u32; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    let mut composite = vec![false; n + 1];
    if n >= 1 {
        mu[1] = 1;
        phi[1] = 1;
    }
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
            phi[i] = (i - 1) as u32;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                phi[ip] = phi[i] * p as u32;
                break;
            }
            mu[ip] = -mu[i];
            phi[ip] = phi[i] * (p as u32 - 1);
        }
    }
    (mu, phi)
}

/// Divisor-count table d(k) on `0..=n`.
pub fn divisor_count_table(n: usize) -> Vec<u32> {
    let mut d = vec![0u32; n + 1];
    for a in 1..=n {
        let mut k = a;
        while k <= n {
            d[k] += 1;
            k += a;
        }
    }
    d
}

/// d^λ for a positive integer d with the real logarithm.
#[inline]
pub fn int_pow(d: u64, lambda: C64) -> C64 {
    if d == 1 {
        return C64::new(1.0, 0.0);
    }
    (lambda * (d as f64).ln()).exp()
}

/// σ_λ(n) = Σ_{d|n} d^λ.
pub fn divisor_sigma(n: u64, lambda: C64) -> Result<C64> {
    if n == 0 {
        return precondition("divisor_sigma needs n >= 1");
    }
    let divs = divisors(n);
    if lambda.im == 0.0 && lambda.re.fract() == 0.0 && lambda.re >= 0.0 && lambda.re <= 3.0 {
        // exact integer arithmetic for small nonnegative integer exponents
        let k = lambda.re as u32;
        let mut acc: u128 = 0;
        for d in divs {
            acc += (d as u128).pow(k);
        }
        return Ok(C64::new(acc as f64, 0.0));
    }
    let mut acc = C64::new(0.0, 0.0);
    for d in divs {
        acc += int_pow(d, lambda);
    }
    Ok(acc)
}

/// σ_{α,β}(n) = Σ_{d1 d2 = n} d1^α d2^β.
pub fn shifted_sigma(n: u64, alpha: C64, beta: C64) -> Result<C64> {
    if n == 0 {
        return precondition("shifted_sigma needs n >= 1");
    }
    let mut acc = C64::new(0.0, 0.0);
    // pair d with n/d so that the sum is symmetric in (α, β) term by term
    for d in divisors(n) {
        let e = n / d;
        if d > e {
            break;
        }
        if d == e {
            acc += int_pow(d, alpha) * int_pow(e, beta);
        } else {
            acc += int_pow(d, alpha) * int_pow(e, beta) + int_pow(d, beta) * int_pow(e, alpha);
        }
    }
    Ok(acc)
}

/// c_l(n) = μ(l/g) φ(l) / φ(l/g) with g = (n, l).
pub fn ramanujan_sum(l: u64, n: i64) -> Result<i64> {
    if l == 0 {
        return precondition("ramanujan_sum needs l >= 1");
    }
    let g = gcd(l, n.unsigned_abs());
    let g = if n == 0 { l } else { g };
    let r = l / g;
    Ok(mobius(r) * (euler_phi(l) / euler_phi(r)) as i64)
}

/// Σ_{(h,l)=1} e(hn/l) by direct summation.
pub fn ramanujan_sum_direct(l: u64, n: i64) -> f64 {
    let nl = rem(n, l);
    let mut acc = C64::new(0.0, 0.0);
    for h in 1..=l {
        if gcd(h, l) == 1 {
            acc += e_frac(mul_mod(h, nl, l), l);
        }
    }
    acc.re
}

/// e(a/m) = exp(2πi a/m) for 0 ≤ a < m.
#[inline]
pub fn e_frac(a: u64, m: u64) -> C64 {
    let th = 2.0 * PI * (a % m) as f64 / m as f64;
    C64::new(th.cos(), th.sin())
}

/// Kloosterman sum S(a, b; c).
pub fn kloosterman(a: i64, b: i64, c: u64) -> f64 {
    assert!(c >= 1, "kloosterman needs c >= 1");
    let (ar, br) = (rem(a, c), rem(b, c));
    let mut acc = C64::new(0.0, 0.0);
    for d in 1..=c {
        if let Some(dbar) = mod_inv(d as i64, c) {
            if gcd(d, c) != 1 {
                continue;
            }
            let ph = (mul_mod(ar, d % c, c) + mul_mod(br, dbar, c)) % c;
            acc += e_frac(ph, c);
        }
    }
    debug_assert!(acc.im.abs() <= 1e-10 * (c as f64).max(1.0));
    acc.re
}

/// Kl_2(a; c) = S(a, 1; c) / √c.
pub fn kl2(a: i64, c: u64) -> f64 {
    kloosterman(a, 1, c) / (c as f64).sqrt()
}

/// Number of primitive characters modulo q.
pub fn phi_star(q: u64) -> u64 {
    factor(q.max(1))
        .iter()
        .map(|&(p, m)| {
            if m == 1 {
                p - 2
            } else {
                p.pow(m - 2) * (p - 1) * (p - 1)
            }
        })
        .product()
}

/// Largest divisor of the radical of q strictly below its square root.
pub fn q0_of(q: u64) -> u64 {
    let r = radical(q.max(1));
    divisors(r)
        .into_iter()
        .filter(|&d| (d as u128) * (d as u128) < r as u128)
        .max()
        .unwrap_or(1)
}

/// The four shifts (α, β, γ, δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftTuple {
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
    pub separation: f64,
}

impl ShiftTuple {
    /// Build a tuple; shifts must satisfy |·| ≤ 0.25.
    pub fn new(alpha: C64, beta: C64, gamma: C64, delta: C64) -> Result<Self> {
        let t = Self::unchecked(alpha, beta, gamma, delta);
        if [alpha, beta, gamma, delta].iter().any(|z| z.norm() > 0.25) {
            return precondition("shifts must have modulus at most 0.25");
        }
        Ok(t)
    }

    /// Build a tuple without the small-shift check.
    pub fn unchecked(alpha: C64, beta: C64, gamma: C64, delta: C64) -> Self {
        let separation = Self::separation_of(alpha, beta, gamma, delta);
        ShiftTuple { alpha, beta, gamma, delta, separation }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self::unchecked(z, z, z, z)
    }

    pub fn from_array(v: [C64; 4]) -> Self {
        Self::unchecked(v[0], v[1], v[2], v[3])
    }

    pub fn as_array(&self) -> [C64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn separation_of(a: C64, b: C64, g: C64, d: C64) -> f64 {
        [a - b, a + b, g - d, g + d, a + g, a + d, b + g, b + d]
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, eps: C64) -> Self {
        Self::unchecked(self.alpha * eps, self.beta * eps, self.gamma * eps, self.delta * eps)
    }

    /// (α, β, γ, δ) → (β, α, γ, δ).
    pub fn swap_ab(&self) -> Self {
        Self::unchecked(self.beta, self.alpha, self.gamma, self.delta)
    }

    /// (α, β, γ, δ) → (α, β, δ, γ).
    pub fn swap_gd(&self) -> Self {
        Self::unchecked(self.alpha, self.beta, self.delta, self.gamma)
    }

    /// (α, β, γ, δ) → (−γ, −δ, −α, −β).
    pub fn reflect(&self) -> Self {
        Self::unchecked(-self.gamma, -self.delta, -self.alpha, -self.beta)
    }

    pub fn sum(&self) -> C64 {
        self.alpha + self.beta + self.gamma + self.delta
    }

    pub fn is_generic(&self, min_sep: f64) -> bool {
        self.separation >= min_sep
    }
}
