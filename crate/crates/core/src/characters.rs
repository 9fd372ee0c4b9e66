//! Dirichlet character groups.

use crate::arith::{divisors, e_frac, euler_phi, factor, gcd, gcd_i, mobius, pow_mod, rem};
use crate::error::{precondition, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCharacter {
    pub q: u64,
    pub index: usize,
    pub parity: u8,
    pub conductor: u64,
    pub values: Vec<C64>,
}

impl DirichletCharacter {
    #[inline]
    pub fn value(&self, n: i64) -> C64 {
        self.values[rem(n, self.q) as usize]
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.q
    }

    pub fn is_principal(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.norm() == 0.0 || (v - C64::new(1.0, 0.0)).norm() < 1e-12)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() < 1e-12)
    }

    pub fn conj(&self) -> DirichletCharacter {
        DirichletCharacter {
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..self.clone()
        }
    }
}

/// One cyclic factor of (Z/qZ)^*: generator g of order `order` modulo the
/// prime power `pk`, plus the discrete-log table on residues mod pk.
#[derive(Debug, Clone)]
struct CyclicFactor {
    pk: u64,
    order: u64,
    log: Vec<Option<u64>>,
}

impl CyclicFactor {
    fn new(pk: u64, gen: u64, order: u64, mask: impl Fn(u64) -> bool) -> Self {
        let mut log = vec![None; pk as usize];
        let mut x = 1 % pk;
        for k in 0..order {
            log[x as usize] = Some(k);
            x = x * gen % pk;
        }
        // residues outside this subgroup (only the 2-power case) carry no log
        for (r, l) in log.iter_mut().enumerate() {
            if !mask(r as u64) {
                *l = None;
            }
        }
        CyclicFactor { pk, order, log }
    }
}

fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let phi = p - 1;
    let qs: Vec<u64> = factor(phi).iter().map(|&(r, _)| r).collect();
    (2..p).find(|&g| qs.iter().all(|&r| pow_mod(g, phi / r, p) != 1)).unwrap()
}

fn prime_power_root(p: u64, k: u32) -> u64 {
    let g = primitive_root(p);
    if k == 1 {
        return g;
    }
    if pow_mod(g, p - 1, p * p) != 1 {
        g
    } else {
        g + p
    }
}

/// Component of a residue `a` (mod q) in each cyclic factor, as exponents.
struct Decomposition {
    factors: Vec<CyclicFactor>,
    // for 2^k with k ≥ 3 the residue splits as ±5^j; sign handled as its own factor
    two_sign_slot: Option<usize>,
}

impl Decomposition {
    fn new(q: u64) -> Self {
        let mut factors = Vec::new();
        let mut two_sign_slot = None;
        for (p, k) in factor(q) {
            let pk = p.pow(k);
            if p == 2 {
                match k {
                    1 => {}
                    2 => factors.push(CyclicFactor::new(4, 3, 2, |_| true)),
                    _ => {
                        two_sign_slot = Some(factors.len());
                        factors.push(CyclicFactor::new(pk, pk - 1, 2, |_| true));
                        factors.push(CyclicFactor::new(pk, 5, pk / 4, |r| r % 4 == 1));
                    }
                }
            } else {
                let g = prime_power_root(p, k);
                factors.push(CyclicFactor::new(pk, g, euler_phi(pk), |_| true));
            }
        }
        Decomposition { factors, two_sign_slot }
    }

    /// Exponent of `a` in each factor.
    fn logs(&self, a: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut i = 0;
        while i < self.factors.len() {
            let f = &self.factors[i];
            let r = a % f.pk;
            if Some(i) == self.two_sign_slot {
                let (sign, unit) = if r % 4 == 1 { (0, r) } else { (1, f.pk - r) };
                out.push(sign);
                out.push(self.factors[i + 1].log[unit as usize].unwrap());
                i += 2;
            } else {
                out.push(f.log[r as usize].unwrap());
                i += 1;
            }
        }
        out
    }

    fn orders(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.order).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterGroup {
    pub q: u64,
    pub characters: Vec<DirichletCharacter>,
    pub primitive_indices: Vec<usize>,
}

impl CharacterGroup {
    pub fn primitive(&self) -> impl Iterator<Item = &DirichletCharacter> {
        self.primitive_indices.iter().map(move |&i| &self.characters[i])
    }

    /// Index of the character whose table equals `values`, if any.
    pub fn find(&self, values: &[C64]) -> Option<usize> {
        self.characters.iter().position(|c| {
            c.values.iter().zip(values).all(|(a, b)| (a - b).norm() < 1e-9)
        })
    }
}

/// All characters mod q, indexed lexicographically by their exponent tuples.
pub fn character_group(q: u64) -> Result<CharacterGroup> {
    if q == 0 {
        return precondition("modulus must be positive");
    }
    let dec = Decomposition::new(q);
    let orders = dec.orders();
    let qs = q as usize;
    // logs of each unit residue
    let logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|a| if gcd(a, q) == 1 { Some(dec.logs(a)) } else { None })
        .collect();
    let total: u64 = orders.iter().product();
    debug_assert_eq!(total, euler_phi(q));
    let mut characters = Vec::with_capacity(total as usize);
    let mut exps = vec![0u64; orders.len()];
    for index in 0..total as usize {
        let mut values = vec![C64::new(0.0, 0.0); qs];
        for a in 0..qs {
            if let Some(l) = &logs[a] {
                // phase as an exact fraction over the group exponent
                let mut frac = 0.0;
                for ((j, k), o) in exps.iter().zip(l).zip(&orders) {
                    frac += ((j * k) % o) as f64 / *o as f64;
                }
                let th = 2.0 * PI * frac.fract();
                values[a] = C64::new(th.cos(), th.sin());
            }
        }
        if q == 1 {
            values[0] = C64::new(1.0, 0.0);
        }
        let minus_one = values[(q - 1) as usize];
        let parity = if q <= 2 || minus_one.re > 0.0 { 0 } else { 1 };
        let mut chi = DirichletCharacter { q, index, parity, conductor: 0, values };
        chi.conductor = conductor(&chi);
        characters.push(chi);
        // advance the exponent tuple, last coordinate fastest
        for pos in (0..exps.len()).rev() {
            exps[pos] += 1;
            if exps[pos] < orders[pos] {
                break;
            }
            exps[pos] = 0;
        }
    }
    let primitive_indices = characters
        .iter()
        .filter(|c| c.is_primitive())
        .map(|c| c.index)
        .collect();
    Ok(CharacterGroup { q, characters, primitive_indices })
}

/// Smallest f | q such that χ(a) = 1 whenever a ≡ 1 mod f and (a, q) = 1.
pub fn conductor(chi: &DirichletCharacter) -> u64 {
    let q = chi.q;
    for f in divisors(q) {
        let induced = (0..q / f).all(|k| {
            let a = 1 + k * f;
            gcd(a, q) != 1 || (chi.values[(a % q) as usize] - C64::new(1.0, 0.0)).norm() < 1e-9
        });
        if induced {
            return f;
        }
    }
    q
}

/// τ(χ) = Σ_n χ(n) e(n/q).
pub fn gauss_sum(chi: &DirichletCharacter) -> C64 {
    let q = chi.q;
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..q {
        acc += chi.values[n as usize] * e_frac(n, q);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub lhs: C64,
    pub rhs: f64,
    pub residual_full: f64,
    pub residual_parity: f64,
}

fn divisor_side(q: u64, diff: i64) -> f64 {
    let g = if diff == 0 { q } else { gcd_i(q as i64, diff) };
    divisors(g)
        .into_iter()
        .map(|d| (euler_phi(d) as i64 * mobius(q / d)) as f64)
        .sum()
}

/// Residuals of both orthogonality identities over primitive characters.
pub fn orthogonality_residual(group: &CharacterGroup, m: i64, n: i64) -> Result<OrthogonalityReport> {
    let q = group.q;
    if gcd_i(m * n, q as i64) != 1 && q > 1 {
        return precondition("orthogonality needs (mn, q) = 1");
    }
    let mut lhs = C64::new(0.0, 0.0);
    let mut by_parity = [C64::new(0.0, 0.0); 2];
    for chi in group.primitive() {
        let v = chi.value(m) * chi.value(n).conj();
        lhs += v;
        by_parity[chi.parity as usize] += v;
    }
    let plus = divisor_side(q, m - n);
    let minus = divisor_side(q, m + n);
    let residual_full = (lhs - plus).norm();
    let mut residual_parity: f64 = 0.0;
    for a in 0..2 {
        let sign = if a == 0 { 1.0 } else { -1.0 };
        let rhs = 0.5 * plus + 0.5 * sign * minus;
        residual_parity = residual_parity.max((by_parity[a] - rhs).norm());
    }
    Ok(OrthogonalityReport { lhs, rhs: plus, residual_full, residual_parity })
}
