use super::weight::WeightSpec;
use super::CompensatedSum;
use crate::arith::ShiftTuple;
use crate::error::{Error, Result};
use crate::lfunc::x_factor;
use crate::specfun::{zeta, zeta_q};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which zeta goes into Z: ζ_q (Euler factors at p | q removed) or plain ζ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaKind {
    #[default]
    Local,
    Full,
}

/// A main term together with its six Z-terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub total: C64,
    pub components: [C64; 6],
}

impl MainTerm {
    fn from_components(components: [C64; 6]) -> Self {
        let mut acc = CompensatedSum::new();
        for c in components {
            acc.add(c);
        }
        MainTerm { total: acc.value(), components }
    }
}

fn zeta_kind(s: C64, q: u64, kind: ZetaKind) -> Result<C64> {
    match kind {
        ZetaKind::Local => zeta_q(s, q),
        ZetaKind::Full => zeta(s),
    }
}

pub fn z_with(shifts: &ShiftTuple, q: u64, kind: ZetaKind) -> Result<C64> {
    let ShiftTuple { alpha, beta, gamma, delta, .. } = *shifts;
    let one = C64::new(1.0, 0.0);
    let pairs = [alpha + gamma, alpha + delta, beta + gamma, beta + delta];
    if let Some(p) = pairs.iter().find(|p| p.norm() == 0.0) {
        return Err(Error::Pole(format!("Z argument 1 + {p} hits the pole of zeta")));
    }
    let mut num = one;
    for p in pairs {
        num *= zeta_kind(one + p, q, kind)?;
    }
    Ok(num / zeta_kind(2.0 * one + shifts.sum(), q, kind)?)
}

/// Z_q(α,β,γ,δ) = ζ_q(1+α+γ)ζ_q(1+α+δ)ζ_q(1+β+γ)ζ_q(1+β+δ)/ζ_q(2+α+β+γ+δ).
pub fn z_q(shifts: &ShiftTuple, q: u64) -> Result<C64> {
    z_with(shifts, q, ZetaKind::Local)
}

/// The six Z-arguments of the main term, in display order, paired with the
/// shifts (a, c) whose X-factors multiply them. The second term carries
/// X_{α,γ}X_{β,δ}; the first carries nothing.
fn z_arguments(s: &ShiftTuple) -> [ShiftTuple; 6] {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d, .. } = *s;
    [
        ShiftTuple::unchecked(a, b, g, d),
        ShiftTuple::unchecked(-g, -d, -a, -b),
        ShiftTuple::unchecked(b, -g, d, -a),
        ShiftTuple::unchecked(a, -g, d, -b),
        ShiftTuple::unchecked(b, -d, g, -a),
        ShiftTuple::unchecked(a, -d, g, -b),
    ]
}

/// Exponents e_k of (tq/2π)^{e_k} in the weighted main term.
fn exponents(s: &ShiftTuple) -> [C64; 6] {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d, .. } = *s;
    [C64::new(0.0, 0.0), -(a + b + g + d), -a - g, -b - g, -a - d, -b - d]
}

fn z_coefficients(q: u64, s: &ShiftTuple, kind: ZetaKind) -> Result<[C64; 6]> {
    let args = z_arguments(s);
    let mut z = [C64::new(0.0, 0.0); 6];
    for (k, a) in args.iter().enumerate() {
        z[k] = z_with(a, q, kind)?;
    }
    Ok(z)
}

fn x_coefficients(q: u64, t: f64, s: &ShiftTuple, parity: u8) -> Result<[C64; 6]> {
    let ShiftTuple { alpha: a, beta: b, gamma: g, delta: d, .. } = *s;
    let xag = x_factor(q, t, parity, a, g)?;
    let xbd = x_factor(q, t, parity, b, d)?;
    Ok([
        C64::new(1.0, 0.0),
        xag * xbd,
        xag,
        x_factor(q, t, parity, b, g)?,
        x_factor(q, t, parity, a, d)?,
        xbd,
    ])
}

/// Six-term pointwise main term. With `parity_avg` each X is averaged over
/// 𝔞 ∈ {0, 1}; without it only 𝔞 = 0 (even characters) is used.
pub fn main_term_thm14(q: u64, t: f64, shifts: &ShiftTuple, parity_avg: bool) -> Result<MainTerm> {
    main_term_thm14_with(q, t, shifts, parity_avg, ZetaKind::Local)
}

pub fn main_term_thm14_with(
    q: u64,
    t: f64,
    shifts: &ShiftTuple,
    parity_avg: bool,
    kind: ZetaKind,
) -> Result<MainTerm> {
    if !(t >= 0.0) {
        return Err(Error::Precondition(format!("main term needs t >= 0, got {t}")));
    }
    let z = z_coefficients(q, shifts, kind)?;
    let x = if parity_avg {
        let x0 = x_coefficients(q, t, shifts, 0)?;
        let x1 = x_coefficients(q, t, shifts, 1)?;
        std::array::from_fn(|k| 0.5 * (x0[k] + x1[k]))
    } else {
        x_coefficients(q, t, shifts, 0)?
    };
    Ok(MainTerm::from_components(std::array::from_fn(|k| z[k] * x[k])))
}

/// The pointwise integrand of the weighted main term: every X replaced by
/// its Stirling form (tq/2π)^{e}.
pub fn main_term_stirling(q: u64, t: f64, shifts: &ShiftTuple) -> Result<MainTerm> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("Stirling form needs t > 0, got {t}")));
    }
    let z = z_coefficients(q, shifts, ZetaKind::Local)?;
    let e = exponents(shifts);
    let l = (t * q as f64 / (2.0 * PI)).ln();
    Ok(MainTerm::from_components(std::array::from_fn(|k| z[k] * (e[k] * l).exp())))
}

/// Z-coefficients and Φ-weighted power integrals of the weighted main term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm13Parts {
    pub z: [C64; 6],
    pub integrals: [C64; 6],
    /// Largest panel-refinement gap over the six integrals.
    pub quad_err: f64,
}

impl Thm13Parts {
    pub fn main_term(&self) -> MainTerm {
        MainTerm::from_components(std::array::from_fn(|k| self.z[k] * self.integrals[k]))
    }
}

fn power_integrals(q: u64, weight: &WeightSpec, e: &[C64; 6]) -> ([C64; 6], f64) {
    let nodes = weight.nodes(false);
    let coarse = weight.nodes(true);
    let scale = q as f64 / (2.0 * PI);
    let run = |nodes: &[(f64, f64)], k: usize| -> C64 {
        let mut acc = CompensatedSum::new();
        for &(t, w) in nodes {
            acc.add((e[k] * (t * scale).ln()).exp() * w);
        }
        acc.value()
    };
    let mut out = [C64::new(0.0, 0.0); 6];
    let mut gap: f64 = 0.0;
    for k in 0..6 {
        out[k] = run(&nodes, k);
        gap = gap.max((out[k] - run(&coarse, k)).norm());
    }
    (out, gap)
}

pub fn thm13_parts(q: u64, weight: &WeightSpec, shifts: &ShiftTuple, kind: ZetaKind) -> Result<Thm13Parts> {
    let (lo, _) = weight.support();
    if lo < 0.0 {
        return Err(Error::Precondition("weight support must lie in t >= 0".into()));
    }
    let z = z_coefficients(q, shifts, kind)?;
    let (integrals, quad_err) = power_integrals(q, weight, &exponents(shifts));
    Ok(Thm13Parts { z, integrals, quad_err })
}

/// Six-term weighted main term Σ Z_k ∫ Φ(t) (tq/2π)^{e_k} dt.
pub fn main_term_thm13(q: u64, weight: &WeightSpec, shifts: &ShiftTuple) -> Result<MainTerm> {
    Ok(thm13_parts(q, weight, shifts, ZetaKind::Local)?.main_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::zeta;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn generic() -> ShiftTuple {
        let v = [c(1.0, 0.0), c(0.0, -1.3), c(0.7, 0.0), c(0.0, 1.9)];
        ShiftTuple::from_array(v.map(|z| z * 1e-2))
    }

    #[test]
    fn z_examples() {
        let s = ShiftTuple::unchecked(c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0), c(0.4, 0.0));
        let z = |x: f64| zeta(c(x, 0.0)).unwrap();
        let want = z(1.4) * z(1.5) * z(1.5) * z(1.6) / z(2.0 + 1.0);
        // 1+α+γ = 1.4, 1+α+δ = 1.5, 1+β+γ = 1.5, 1+β+δ = 1.6
        assert!((z_q(&s, 1).unwrap() - want).norm() < 1e-13 * want.norm());
        let g = generic();
        assert!((z_q(&g, 7).unwrap() - z_q(&g.swap_ab(), 7).unwrap()).norm() < 1e-14 * z_q(&g, 7).unwrap().norm());
        // q = 6 against q = 1, Euler factor by Euler factor
        let mut ratio = c(1.0, 0.0);
        for p in [2.0f64, 3.0] {
            let f = |x: C64| c(1.0, 0.0) - (-x * p.ln()).exp();
            let one = c(1.0, 0.0);
            ratio *= f(one + s.alpha + s.gamma) * f(one + s.alpha + s.delta) * f(one + s.beta + s.gamma)
                * f(one + s.beta + s.delta)
                / f(2.0 * one + s.sum());
        }
        let r = z_q(&s, 6).unwrap() / z_q(&s, 1).unwrap();
        assert!((r - ratio).norm() < 1e-12);
        assert!(matches!(z_q(&ShiftTuple::zero(), 5), Err(Error::Pole(_))));
    }

    #[test]
    fn six_terms_swap_invariant() {
        let s = generic();
        for t in [0.0, 3.0] {
            let m = main_term_thm14(101, t, &s, true).unwrap();
            for other in [s.swap_ab(), s.swap_gd()] {
                let o = main_term_thm14(101, t, &other, true).unwrap();
                assert!((m.total - o.total).norm() <= 1e-12 * m.components.iter().map(|z| z.norm()).sum::<f64>());
            }
            let sum: C64 = m.components.iter().sum();
            assert!((sum - m.total).norm() <= 1e-12 * m.components.iter().map(|z| z.norm()).sum::<f64>());
        }
    }

    #[test]
    fn terms_finite_at_small_separation() {
        let s = generic().scaled(c(0.2, 0.0));
        assert!(s.separation >= 1e-3);
        let m = main_term_thm14(13, 1.0, &s, true).unwrap();
        assert!(m.components.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn stirling_form_at_hundred() {
        let s = generic();
        let t = 100.0;
        let a = main_term_thm14(101, t, &s, true).unwrap();
        let b = main_term_stirling(101, t, &s).unwrap();
        let rel = (a.total - b.total).norm() / b.total.norm();
        assert!(rel * t <= 20.0, "C = {}", rel * t);
    }

    #[test]
    fn thm13_structure() {
        let s = generic();
        let zw = WeightSpec::zero(10.0);
        assert_eq!(main_term_thm13(13, &zw, &s).unwrap().total, c(0.0, 0.0));
        let w = WeightSpec::smooth(8.0, 8f64.powf(0.75)).unwrap();
        let z = z_coefficients(13, &s, ZetaKind::Local).unwrap();
        let (ints, _) = power_integrals(13, &w, &[c(0.0, 0.0); 6]);
        let forced: C64 = (0..6).map(|k| z[k] * ints[k]).sum();
        let want: C64 = z.iter().sum::<C64>() * w.mass();
        assert!((forced - want).norm() <= 1e-12 * z.iter().map(|v| v.norm()).sum::<f64>() * w.mass());
    }

    #[test]
    fn thm13_matches_integrated_thm14() {
        let s = generic();
        let big = 200.0;
        let w = WeightSpec::smooth(big, big.powf(0.75)).unwrap();
        let m13 = main_term_thm13(101, &w, &s).unwrap().total;
        let (m14, _) = w.integrate(|t| main_term_thm14(101, t, &s, true).unwrap().total);
        // Stirling band: the X-factors differ from their power form by O(1/t), t ≥ T/2
        let rel = (m13 - m14).norm() / m13.norm();
        assert!(rel <= 20.0 / big, "{rel}");
    }
}
