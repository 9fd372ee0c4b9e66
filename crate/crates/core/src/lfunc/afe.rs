use super::kernel::{x_factor4, GammaKernelSpec, KernelVariant, VKernel};
use super::lvalue::l_value;
use crate::arith::ShiftTuple;
use crate::characters::DirichletCharacter;
use crate::error::{precondition, Error, Result};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfeReport {
    pub first: C64,
    pub second: C64,
    pub product: C64,
    pub abs_residual: f64,
    /// |first + second - product| / |product|
    pub residual: f64,
    pub cutoff: u64,
    pub tail_estimate: f64,
}

const MAX_CUTOFF: u64 = 60_000_000;
const TAIL_TARGET: f64 = 1e-10;

/// σ_{a,b}(k) = Σ_{de=k} d^a e^b for k ≤ n (index 0 unused).
fn sigma_table(n: usize, a: C64, b: C64) -> Vec<C64> {
    let pb: Vec<C64> = (0..=n).map(|e| if e == 0 { C64::new(0.0, 0.0) } else { (b * (e as f64).ln()).exp() }).collect();
    let mut out = vec![C64::new(0.0, 0.0); n + 1];
    for d in 1..=n {
        let pa = (a * (d as f64).ln()).exp();
        let mut k = d;
        let mut e = 1;
        while k <= n {
            out[k] += pa * pb[e];
            k += d;
            e += 1;
        }
    }
    out
}

struct ParityTables {
    // V(k/q²)/√k and Ṽ(k/q²)/√k with the index pattern of the second part
    w1: Vec<C64>,
    w2: Vec<C64>,
}

/// Evaluates both halves of the approximate functional equation for every
/// character mod q at fixed t and shifts, sharing the weight tables.
pub struct AfeEvaluator {
    pub q: u64,
    pub t: f64,
    pub shifts: ShiftTuple,
    pub variant: KernelVariant,
    pub cutoff: u64,
    pub tail_estimate: f64,
    s_ab: Vec<C64>,
    s_gd: Vec<C64>,
    s_mgd: Vec<C64>,
    s_mab: Vec<C64>,
    twist: Vec<C64>,
    tables: [ParityTables; 2],
}

fn kernels(q: u64, t: f64, shifts: ShiftTuple, variant: KernelVariant, parity: u8) -> Result<(VKernel, VKernel, C64)> {
    let spec = GammaKernelSpec::new(shifts, t, parity, variant)?;
    let k1 = VKernel::new(&spec)?;
    let k2 = VKernel::new(&spec.reflected()?)?;
    // Ṽ_{-γ,-δ,-α,-β} = X_{α,β,γ,δ} V_{-γ,-δ,-α,-β}
    let xf = x_factor4(q, t, parity, &shifts)?;
    Ok((k1, k2, xf))
}

fn tail_bound(ks: &[(VKernel, VKernel, C64)], q: u64, k: f64) -> f64 {
    let q2 = (q * q) as f64;
    let mut mag: f64 = 0.0;
    for (k1, k2, xf) in ks {
        for f in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let x = f * k / q2;
            mag = mag.max(k1.eval(x).norm()).max((k2.eval(x) * xf).norm());
        }
    }
    let l = k.ln().max(1.0);
    2.0 * mag * l.powi(3) / 6.0 * 2.0 * k.sqrt()
}

impl AfeEvaluator {
    /// `cutoff` bounds mn; `None` picks the smallest power-of-two multiple of
    /// q² whose tail estimate is below 1e-10.
    pub fn new(q: u64, t: f64, shifts: ShiftTuple, variant: KernelVariant, cutoff: Option<u64>) -> Result<Self> {
        if q < 3 {
            return precondition("AFE evaluator needs q >= 3");
        }
        let ks = [kernels(q, t, shifts, variant, 0)?, kernels(q, t, shifts, variant, 1)?];
        let q2 = q * q;
        let cutoff = match cutoff {
            Some(c) => c,
            None => {
                let mut k = 4 * q2;
                while tail_bound(&ks, q, k as f64) > TAIL_TARGET {
                    k *= 2;
                    if k > MAX_CUTOFF {
                        return Err(Error::TooLarge(format!("AFE cutoff beyond {MAX_CUTOFF}")));
                    }
                }
                k
            }
        };
        if cutoff > MAX_CUTOFF {
            return Err(Error::TooLarge(format!("AFE cutoff {cutoff} beyond {MAX_CUTOFF}")));
        }
        let tail_estimate = tail_bound(&ks, q, cutoff as f64);
        let n = cutoff as usize;
        let ShiftTuple { alpha, beta, gamma, delta, .. } = shifts;
        // coefficients of L(½+α)L(½+β) are Σ_{d1d2=m} d1^{-α} d2^{-β}
        let s_ab = sigma_table(n, -alpha, -beta);
        let s_gd = sigma_table(n, -gamma, -delta);
        let s_mgd = sigma_table(n, gamma, delta);
        let s_mab = sigma_table(n, alpha, beta);
        let twist: Vec<C64> = (0..=n)
            .map(|m| if m == 0 { C64::new(0.0, 0.0) } else { C64::from_polar(1.0, -t * (m as f64).ln()) })
            .collect();
        let qf = q2 as f64;
        let build = |(k1, k2, xf): &(VKernel, VKernel, C64)| {
            let row = |k: usize, ker: &VKernel, f: C64| {
                if k == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    ker.eval(k as f64 / qf) * f / (k as f64).sqrt()
                }
            };
            let w1: Vec<C64> = (0..=n).into_par_iter().map(|k| row(k, k1, C64::new(1.0, 0.0))).collect();
            let w2: Vec<C64> = (0..=n).into_par_iter().map(|k| row(k, k2, *xf)).collect();
            ParityTables { w1, w2 }
        };
        let tables = [build(&ks[0]), build(&ks[1])];
        Ok(AfeEvaluator { q, t, shifts, variant, cutoff, tail_estimate, s_ab, s_gd, s_mgd, s_mab, twist, tables })
    }

    fn part(&self, chi: &DirichletCharacter, sa: &[C64], sb: &[C64], w: &[C64]) -> C64 {
        let n = self.cutoff as usize;
        let q = self.q as usize;
        let b: Vec<C64> = (0..=n)
            .map(|k| if k == 0 { C64::new(0.0, 0.0) } else { sb[k] * chi.values[k % q].conj() * self.twist[k].conj() })
            .collect();
        let mut total = C64::new(0.0, 0.0);
        for m in 1..=n {
            let cm = chi.values[m % q];
            if cm.re == 0.0 && cm.im == 0.0 {
                continue;
            }
            let mut inner = C64::new(0.0, 0.0);
            let top = n / m;
            let mut k = m;
            for bn in &b[1..=top] {
                inner += bn * w[k];
                k += m;
            }
            total += sa[m] * cm * self.twist[m] * inner;
        }
        total
    }

    /// The two truncated sums for one character.
    pub fn halves(&self, chi: &DirichletCharacter) -> Result<(C64, C64)> {
        if chi.q != self.q {
            return precondition("character modulus does not match evaluator");
        }
        let tb = &self.tables[chi.parity as usize];
        let first = self.part(chi, &self.s_ab, &self.s_gd, &tb.w1);
        let second = self.part(chi, &self.s_mgd, &self.s_mab, &tb.w2);
        Ok((first, second))
    }

    pub fn residual(&self, chi: &DirichletCharacter) -> Result<AfeReport> {
        if !chi.is_primitive() {
            return precondition("approximate functional equation needs a primitive character");
        }
        let (first, second) = self.halves(chi)?;
        let product = four_l_product(chi, self.t, &self.shifts)?;
        let abs_residual = (first + second - product).norm();
        Ok(AfeReport {
            first,
            second,
            product,
            abs_residual,
            residual: abs_residual / product.norm(),
            cutoff: self.cutoff,
            tail_estimate: self.tail_estimate,
        })
    }
}

/// L(½+it+α,χ) L(½+it+β,χ) L(½-it+γ,χ̄) L(½-it+δ,χ̄).
pub fn four_l_product(chi: &DirichletCharacter, t: f64, s: &ShiftTuple) -> Result<C64> {
    let up = C64::new(0.5, t);
    let down = C64::new(0.5, -t);
    let cb = chi.conj();
    Ok(l_value(up + s.alpha, chi)?
        * l_value(up + s.beta, chi)?
        * l_value(down + s.gamma, &cb)?
        * l_value(down + s.delta, &cb)?)
}

/// Residual of the approximate functional equation for one character.
/// The kernel's parity must match χ(-1).
pub fn afe_residual(chi: &DirichletCharacter, spec: &GammaKernelSpec, cutoff: Option<u64>) -> Result<AfeReport> {
    if chi.parity != spec.parity {
        return precondition(format!("character parity {} does not match kernel parity {}", chi.parity, spec.parity));
    }
    let ev = AfeEvaluator::new(chi.q, spec.t, spec.shifts, spec.variant, cutoff)?;
    let rep = ev.residual(chi)?;
    if rep.tail_estimate > 1e-6 * rep.product.norm() {
        return Err(Error::Truncation { estimate: rep.tail_estimate, tol: 1e-6 * rep.product.norm() });
    }
    Ok(rep)
}
