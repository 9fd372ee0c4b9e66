use super::empirical::check_modulus;
use super::mainterm::{main_term_thm14_with, thm13_parts, MainTerm, ZetaKind};
use super::weight::WeightSpec;
use super::CompensatedSum;
use crate::arith::{Factorization, ShiftTuple};
use crate::error::{Error, Result};
use crate::specfun::digamma;
use crate::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Where a main term is evaluated: a single height t or a weight Φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentTarget {
    Pointwise { t: f64 },
    Weighted(WeightSpec),
}

pub const DIRECTION_A: [C64; 4] =
    [C64::new(1.0, 0.0), C64::new(0.0, -1.3), C64::new(0.7, 0.0), C64::new(0.0, 2.6)];
pub const DIRECTION_B: [C64; 4] =
    [C64::new(0.6, 0.5), C64::new(0.0, -0.9), C64::new(1.2, 0.0), C64::new(0.4, -0.7)];

/// Four points drawn uniformly from the unit disk, reproducible from `seed`.
pub fn seeded_direction(seed: u64) -> [C64; 4] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| loop {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm_sqr() <= 1.0 {
            break z;
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroShiftOptions {
    /// Normalized to unit length before use.
    pub direction: [C64; 4],
    pub radii: [f64; 2],
    /// Points on each circle.
    pub points: usize,
    pub zeta: ZetaKind,
    pub tol: f64,
}

impl Default for ZeroShiftOptions {
    fn default() -> Self {
        ZeroShiftOptions { direction: DIRECTION_A, radii: [0.08, 0.04], points: 16, zeta: ZetaKind::Local, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroShiftValue {
    pub value: C64,
    /// Constant Laurent coefficient of each of the six terms; they sum to `value`.
    pub components: [C64; 6],
    /// Values at the two radii.
    pub levels: [C64; 2],
    pub rel_gap: f64,
}

fn unit(v: [C64; 4]) -> Result<[C64; 4]> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return Err(Error::Precondition("zero direction".into()));
    }
    Ok(v.map(|z| z / n))
}

fn eval_at(q: u64, target: &MomentTarget, s: &ShiftTuple, kind: ZetaKind) -> Result<MainTerm> {
    match target {
        MomentTarget::Pointwise { t } => main_term_thm14_with(q, *t, s, true, kind),
        MomentTarget::Weighted(w) => Ok(thm13_parts(q, w, s, kind)?.main_term()),
    }
}

/// Mean of the main term over K points z·v, |z| = ε, offset by half a step.
/// Each term is meromorphic in z with poles of order ≤ 4 at 0, so for K > 4
/// the mean is its constant Laurent coefficient up to O(ε^K).
fn circle_mean(q: u64, target: &MomentTarget, v: &[C64; 4], eps: f64, k: usize, kind: ZetaKind) -> Result<[C64; 6]> {
    let mut acc: [CompensatedSum; 6] = Default::default();
    for j in 0..k {
        let z = C64::from_polar(eps, 2.0 * PI * (j as f64 + 0.5) / k as f64);
        let s = ShiftTuple::from_array(v.map(|c| c * z));
        let m = eval_at(q, target, &s, kind)?;
        for (a, c) in acc.iter_mut().zip(m.components) {
            a.add(c);
        }
    }
    Ok(acc.map(|a| a.value() / k as f64))
}

/// Limit of the main term as all shifts tend to 0.
pub fn zero_shift_main_term(q: u64, target: &MomentTarget) -> Result<C64> {
    Ok(zero_shift_with(q, target, &ZeroShiftOptions::default())?.value)
}

pub fn zero_shift_with(q: u64, target: &MomentTarget, opts: &ZeroShiftOptions) -> Result<ZeroShiftValue> {
    check_modulus(q)?;
    if opts.points <= 4 {
        return Err(Error::Precondition("circle mean needs more than 4 points".into()));
    }
    let v = unit(opts.direction)?;
    let sum6 = |c: &[C64; 6]| {
        let mut s = CompensatedSum::new();
        for z in c {
            s.add(*z);
        }
        s.value()
    };
    let outer = circle_mean(q, target, &v, opts.radii[0], opts.points, opts.zeta)?;
    let inner = circle_mean(q, target, &v, opts.radii[1], opts.points, opts.zeta)?;
    let levels = [sum6(&outer), sum6(&inner)];
    let rel_gap = (levels[0] - levels[1]).norm() / levels[1].norm();
    if !(rel_gap <= opts.tol) {
        return Err(Error::Cancellation(format!(
            "zero-shift levels {} and {} disagree by {rel_gap:e} relative",
            levels[0], levels[1]
        )));
    }
    Ok(ZeroShiftValue { value: levels[1], components: inner, levels, rel_gap })
}

/// B(q,t,𝔞) = log(q/π) + ½ψ((½-it+𝔞)/2) + ½ψ((½+it+𝔞)/2).
pub fn bracket(q: u64, t: f64, parity: u8) -> Result<f64> {
    let p = 0.5 + parity as f64;
    let a = digamma(C64::new(p, -t) / 2.0)?;
    let b = digamma(C64::new(p, t) / 2.0)?;
    Ok((q as f64 / PI).ln() + 0.5 * (a + b).re)
}

/// ∏_{p|q} (1-1/p)³/(1+1/p).
pub fn local_prefactor(q: u64) -> Result<f64> {
    let f = Factorization::of(q)?;
    Ok(f.primes().map(|p| (1.0 - 1.0 / p as f64).powi(3) / (1.0 + 1.0 / p as f64)).product())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CjFit {
    pub q: u64,
    pub t_grid: Vec<f64>,
    pub c: [f64; 5],
    /// max_i |fit_i - value_i| / |value_i|
    pub residual: f64,
    pub condition: f64,
    pub values: Vec<f64>,
}

/// Least-squares c_0..c_4 in
/// zero_shift_main_term(q,t) = prefactor · Σ_j c_j ½Σ_𝔞 B(q,t,𝔞)^j.
pub fn extract_cj(q: u64, t_grid: &[f64]) -> Result<CjFit> {
    if t_grid.len() < 6 {
        return Err(Error::Precondition(format!("need at least 6 grid points, got {}", t_grid.len())));
    }
    let pre = local_prefactor(q)?;
    let n = t_grid.len();
    let mut a = DMatrix::<f64>::zeros(n, 5);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut values = Vec::with_capacity(n);
    for (i, &t) in t_grid.iter().enumerate() {
        let b = [bracket(q, t, 0)?, bracket(q, t, 1)?];
        for j in 0..5 {
            a[(i, j)] = pre * 0.5 * (b[0].powi(j as i32) + b[1].powi(j as i32));
        }
        let v = zero_shift_main_term(q, &MomentTarget::Pointwise { t })?;
        rhs[i] = v.re;
        values.push(v.re);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    if !(condition <= 1e10) {
        return Err(Error::IllConditioned(condition));
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|e| Error::Domain(e.to_string()))?;
    let fit = &a * &sol;
    let residual = (0..n).map(|i| (fit[i] - rhs[i]).abs() / rhs[i].abs()).fold(0.0, f64::max);
    Ok(CjFit {
        q,
        t_grid: t_grid.to_vec(),
        c: [sol[0], sol[1], sol[2], sol[3], sol[4]],
        residual,
        condition,
        values,
    })
}
