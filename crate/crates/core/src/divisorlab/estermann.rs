use crate::arith::{e_frac, gcd, int_pow, mod_inv, mul_mod, rem};
use crate::error::{precondition, Error, Result};
use crate::specfun::{gamma, hurwitz_zeta, zeta};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A reduced fraction h/l with 0 ≤ h < l and (h, l) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalPoint {
    pub h: u64,
    pub l: u64,
}

impl RationalPoint {
    pub fn new(h: i64, l: u64) -> Result<Self> {
        if l == 0 {
            return precondition("denominator must be positive");
        }
        let h = rem(h, l);
        if gcd(h, l) != 1 {
            return precondition(format!("{h}/{l} is not in lowest terms"));
        }
        Ok(RationalPoint { h, l })
    }

    /// h̄/l with h h̄ ≡ 1 (mod l).
    pub fn inverse(&self) -> Self {
        let hb = mod_inv(self.h as i64, self.l).unwrap_or(0);
        RationalPoint { h: hb, l: self.l }
    }

    /// (-h)/l.
    pub fn negate(&self) -> Self {
        RationalPoint { h: rem(-(self.h as i64), self.l), l: self.l }
    }
}

const MAX_TERMS: usize = 20_000_000;

/// Σ_{b ≤ B} b^{-s} e(br/l) for every r mod l, in one pass.
fn twisted_partials(s: C64, l: u64, b_max: usize) -> Vec<C64> {
    let mut by_class = vec![C64::new(0.0, 0.0); l as usize];
    for b in 1..=b_max {
        by_class[b % l as usize] += (-s * (b as f64).ln()).exp();
    }
    (0..l)
        .map(|r| {
            let mut acc = C64::new(0.0, 0.0);
            for (c, v) in by_class.iter().enumerate() {
                acc += v * e_frac(mul_mod(r, c as u64, l), l);
            }
            acc
        })
        .collect()
}

/// Number of terms N with C·N^{-σ} ≤ tol.
fn terms_for(c: f64, sigma: f64, tol: f64) -> Result<usize> {
    let n = (c / tol).powf(1.0 / sigma).ceil().max(16.0);
    if n > MAX_TERMS as f64 {
        return Err(Error::TooLarge(format!("Estermann series needs {n:e} terms")));
    }
    Ok(n as usize)
}

/// Value of D(s, λ, h/l) = Σ σ_λ(n) n^{-s} e(nh/l) by direct summation with
/// Abel-summation tail bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: C64,
    pub tail_bound: f64,
}

/// Direct evaluation for Re s ≥ 1.25 and Re(s - λ) ≥ 1.25.
///
/// Write n = ab with a carrying a^λ. With S(r) = Σ_b b^{-s} e(br/l) and
/// S̄ its mean over r (= l^{-s}ζ(s)),
/// D = Σ_a a^{λ-s}(S(ah) - S̄) + S̄ ζ(s-λ), and both inner and outer tails
/// are bounded by partial summation against bounded periodic sums.
pub fn estermann_series(s: C64, lambda: C64, pt: RationalPoint, tol: f64) -> Result<SeriesValue> {
    if s.re < 1.25 || (s - lambda).re < 1.25 {
        return Err(Error::Domain(format!("series route needs Re s, Re(s-λ) >= 1.25 (s = {s}, λ = {lambda})")));
    }
    let l = pt.l;
    let sl = s - lambda;
    let sig = s.re;
    let sig_a = sl.re;
    let budget = tol / 4.0;
    let zs = zeta(s)?;
    // inner sums, r ≠ 0
    let min_sin = if l > 1 { (PI / l as f64).sin() } else { 1.0 };
    let zeta_a = zeta(C64::new(sig_a, 0.0))?.re;
    // an error ε in every S(r) costs at most ε ζ(Re(s-λ)) in D
    let b_max = terms_for((1.0 + s.norm() / sig) / min_sin * zeta_a, sig, budget)?;
    let mut sr = twisted_partials(s, l, b_max);
    sr[0] = zs;
    // the identity below holds for any values S(r) as long as S̄ is their exact mean
    let s_bar = sr.iter().sum::<C64>() / l as f64;
    let inner_tail = (1.0 + s.norm() / sig) / min_sin * (b_max as f64).powf(-sig) * zeta_a;
    // outer sum: partial sums of the mean-zero periodic sequence S(ah) - S̄
    let dev: Vec<C64> = (0..l).map(|a| sr[mul_mod(a, pt.h, l) as usize] - s_bar).collect();
    let mut prefix = C64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    for v in &dev {
        prefix += v;
        peak = peak.max(prefix.norm());
    }
    let period_bound = 2.0 * peak + 1e-300;
    let a_max = if l == 1 { 1 } else { terms_for(period_bound * (1.0 + sl.norm() / sig_a), sig_a, budget)? };
    let mut acc = C64::new(0.0, 0.0);
    for a in 1..=a_max {
        acc += int_pow(a as u64, -sl) * dev[a % l as usize];
    }
    let outer_tail = if l == 1 { 0.0 } else { period_bound * (1.0 + sl.norm() / sig_a) * (a_max as f64).powf(-sig_a) };
    let value = acc + s_bar * zeta(sl)?;
    Ok(SeriesValue { value, tail_bound: inner_tail + outer_tail })
}

/// D(s, λ, h/l) = Σ_{u,r mod l} e(urh/l) l^{λ-2s} ζ(s-λ, u/l) ζ(s, r/l), valid
/// off the poles s = 1 and s = 1 + λ.
pub fn estermann_hurwitz(s: C64, lambda: C64, pt: RationalPoint) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    if s == one {
        return Err(Error::Pole("Estermann D at s = 1".into()));
    }
    if s == one + lambda {
        return Err(Error::Pole("Estermann D at s = 1 + λ".into()));
    }
    let l = pt.l;
    let lf = l as f64;
    let za: Vec<C64> = (1..=l).map(|u| hurwitz_zeta(s - lambda, u as f64 / lf)).collect::<Result<_>>()?;
    let zb: Vec<C64> = (1..=l).map(|r| hurwitz_zeta(s, r as f64 / lf)).collect::<Result<_>>()?;
    let mut acc = C64::new(0.0, 0.0);
    for (iu, a) in za.iter().enumerate() {
        let u = (iu as u64 + 1) % l;
        let mut inner = C64::new(0.0, 0.0);
        for (ir, b) in zb.iter().enumerate() {
            let r = (ir as u64 + 1) % l;
            inner += b * e_frac(mul_mod(mul_mod(u, r, l), pt.h, l), l);
        }
        acc += a * inner;
    }
    Ok(acc * ((lambda - 2.0 * s) * lf.ln()).exp())
}

/// Both sides of the functional equation relating D(½+s, λ, h/l) to
/// D(½-s, -λ, ±h̄/l).
pub fn estermann_fe_sides(s: C64, lambda: C64, pt: RationalPoint) -> Result<(C64, C64)> {
    let half = C64::new(0.5, 0.0);
    let lhs = estermann_hurwitz(half + s, lambda, pt)?;
    let inv = pt.inverse();
    let d_plus = estermann_hurwitz(half - s, -lambda, inv)?;
    let d_minus = estermann_hurwitz(half - s, -lambda, inv.negate())?;
    let two_pi = 2.0 * PI;
    let pre = 2.0
        * ((-1.0 - lambda + 2.0 * s) * two_pi.ln()).exp()
        * gamma(half - s)?
        * gamma(half + lambda - s)?
        * ((lambda - 2.0 * s) * (pt.l as f64).ln()).exp();
    let rhs = pre * ((PI * lambda / 2.0).cos() * d_plus + (PI * (s - lambda / 2.0)).sin() * d_minus);
    Ok((lhs, rhs))
}

/// |LHS - RHS| / (1 + |LHS|) for the Estermann functional equation.
pub fn estermann_fe_residual(s: C64, lambda: C64, pt: RationalPoint) -> Result<f64> {
    let (lhs, rhs) = estermann_fe_sides(s, lambda, pt)?;
    Ok((lhs - rhs).norm() / (1.0 + lhs.norm()))
}

/// Residues at s = 1 and s = 1 + λ: (numerical, predicted) pairs. The
/// numerical value is δ(D(s0+δ) - D(s0-δ))/2, exact up to O(δ²).
pub fn estermann_residues(lambda: C64, pt: RationalPoint) -> Result<[(C64, C64); 2]> {
    let one = C64::new(1.0, 0.0);
    let delta = 1e-5;
    let lf = pt.l as f64;
    let res = |s0: C64| -> Result<C64> {
        let d = C64::new(delta, 0.0);
        Ok((estermann_hurwitz(s0 + d, lambda, pt)? - estermann_hurwitz(s0 - d, lambda, pt)?) * (delta / 2.0))
    };
    let want1 = ((-1.0 + lambda) * lf.ln()).exp() * zeta(one - lambda)?;
    let want2 = ((-1.0 - lambda) * lf.ln()).exp() * zeta(one + lambda)?;
    Ok([(res(one)?, want1), (res(one + lambda)?, want2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::divisor_sigma;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pt(h: i64, l: u64) -> RationalPoint {
        RationalPoint::new(h, l).unwrap()
    }

    #[test]
    fn rational_point_reduction() {
        assert_eq!(pt(-1, 5), pt(4, 5));
        assert!(RationalPoint::new(2, 4).is_err());
        assert_eq!(pt(3, 7).inverse().h, 5);
        assert_eq!(pt(0, 1).inverse(), pt(0, 1));
    }

    #[test]
    fn series_reductions() {
        let s = c(2.5, 0.0);
        let d = estermann_series(s, c(0.0, 0.0), pt(0, 1), 1e-10).unwrap();
        let z = zeta(s).unwrap();
        assert!((d.value - z * z).norm() < 1e-10 && d.tail_bound <= 1e-10);
        let lam = c(0.3, 0.2);
        let s = c(2.0, 1.0);
        let d = estermann_series(s, lam, pt(0, 1), 1e-10).unwrap();
        assert!((d.value - zeta(s).unwrap() * zeta(s - lam).unwrap()).norm() < 1e-10);
        assert!(estermann_series(c(1.2, 0.0), c(0.0, 0.0), pt(0, 1), 1e-10).is_err());
    }

    #[test]
    fn series_against_brute_force() {
        // D(3, 0.3, 1/2) from 20000 terms of the defining series; tail < 1e-7
        let s = c(3.0, 0.0);
        let lam = c(0.3, 0.0);
        let mut direct = c(0.0, 0.0);
        for n in 1..=20000u64 {
            let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
            direct += divisor_sigma(n, lam).unwrap() * (n as f64).powf(-3.0) * sign;
        }
        let d = estermann_series(s, lam, pt(1, 2), 1e-12).unwrap();
        assert!((d.value - direct).norm() < 1e-7);
    }

    #[test]
    fn hurwitz_route_agrees_with_series() {
        let s = c(2.5, 0.0);
        let lam = c(0.3, 0.0);
        for l in 1..=8u64 {
            for h in 0..l {
                if gcd(h, l) != 1 {
                    continue;
                }
                let p = pt(h as i64, l);
                let a = estermann_series(s, lam, p, 1e-11).unwrap();
                let b = estermann_hurwitz(s, lam, p).unwrap();
                assert!((a.value - b).norm() <= 1e-9, "{h}/{l}: {} vs {b}", a.value);
            }
        }
    }

    #[test]
    fn l_one_is_zeta_product() {
        for (s, lam) in [(c(0.3, 2.0), c(0.2, 0.1)), (c(-1.5, 0.5), c(-0.4, 0.0)), (c(2.0, -3.0), c(0.3, 0.0))] {
            let d = estermann_hurwitz(s, lam, pt(0, 1)).unwrap();
            let want = zeta(s).unwrap() * zeta(s - lam).unwrap();
            assert!((d - want).norm() <= 1e-10 * want.norm().max(1.0));
        }
    }

    #[test]
    fn poles_and_residues() {
        assert!(matches!(estermann_hurwitz(c(1.0, 0.0), c(0.3, 0.0), pt(1, 3)), Err(Error::Pole(_))));
        assert!(matches!(estermann_hurwitz(c(1.3, 0.0), c(0.3, 0.0), pt(1, 3)), Err(Error::Pole(_))));
        // (s - 1) D at s = 1 + 1e-6
        let lam = c(0.3, 0.0);
        let p = pt(2, 7);
        let e = 1e-6;
        let v = estermann_hurwitz(c(1.0 + e, 0.0), lam, p).unwrap() * e;
        let want = (7f64).powf(-0.7) * zeta(c(0.7, 0.0)).unwrap();
        assert!((v - want).norm() <= 1e-4 * want.norm());
        for [(a, b), (x, y)] in [estermann_residues(c(0.25, 0.4), pt(3, 10)).unwrap()] {
            assert!((a - b).norm() <= 1e-6 * b.norm());
            assert!((x - y).norm() <= 1e-6 * y.norm());
        }
    }

    #[test]
    fn functional_equation() {
        let r = estermann_fe_residual(c(0.2, 1.5), c(0.3, 0.0), pt(1, 3)).unwrap();
        assert!(r <= 1e-7, "{r}");
        let r = estermann_fe_residual(c(0.1, 0.7), c(0.2, 0.1), pt(0, 1)).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]
        #[test]
        fn fe_sweep(sr in -0.4f64..0.4, si in -3.0f64..3.0, lr in -0.4f64..0.4, li in -0.3f64..0.3, hi in 1u64..12, l in 2u64..12) {
            let h = (1..l).cycle().skip(hi as usize).find(|h| gcd(*h, l) == 1).unwrap();
            let p = pt(h as i64, l);
            for lam in [c(lr, li), c(-lr, -li)] {
                let r = estermann_fe_residual(c(sr, si), lam, p).unwrap();
                prop_assert!(r <= 1e-7, "{}", r);
            }
        }

        #[test]
        fn periodic_and_conjugate(sr in -1.0f64..2.0, si in -4.0f64..4.0, lr in -0.4f64..0.4, li in -0.3f64..0.3, h in 0i64..40, l in 1u64..10) {
            prop_assume!(gcd(rem(h, l), l) == 1);
            let s = c(sr, si);
            let lam = c(lr, li);
            let a = estermann_hurwitz(s, lam, RationalPoint::new(h, l).unwrap()).unwrap();
            let b = estermann_hurwitz(s, lam, RationalPoint::new(h + 7 * l as i64, l).unwrap()).unwrap();
            prop_assert_eq!(a, b);
            let cj = estermann_hurwitz(s.conj(), lam.conj(), RationalPoint::new(l as i64 - h, l).unwrap()).unwrap();
            prop_assert!((a - cj.conj()).norm() <= 1e-9 * a.norm().max(1.0));
        }
    }
}
