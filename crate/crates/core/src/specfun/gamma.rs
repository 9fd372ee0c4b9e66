use crate::error::{Error, Result};
use crate::C64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos coefficients, g = 671/128 - 1/2 family, 14 terms plus the constant.
const LANCZOS_C0: f64 = 0.999_999_999_999_997_092;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn lanczos_right(z: C64) -> C64 {
    let tmp = z + 5.242_187_5;
    let head = (z + 0.5) * tmp.ln() - tmp;
    let mut ser = C64::new(LANCZOS_C0, 0.0);
    for (j, c) in LANCZOS.iter().enumerate() {
        ser += c / (z + (j + 1) as f64);
    }
    head + LN_SQRT_2PI + ser.ln() - z.ln()
}

fn is_pole(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal branch of log Γ without a pole check.
pub fn lgamma(z: C64) -> C64 {
    if z.re >= 0.5 {
        return lanczos_right(z);
    }
    // Γ(z) = Γ(z+n) / (z (z+1) ... (z+n-1)); each log has its cut on the
    // negative axis, so the sum stays on the principal branch.
    let n = (0.5 - z.re).ceil() as usize;
    let mut acc = lanczos_right(z + n as f64);
    for k in 0..n {
        acc -= (z + k as f64).ln();
    }
    acc
}

/// Principal branch of log Γ(z).
pub fn log_gamma(z: C64) -> Result<C64> {
    if is_pole(z) {
        return Err(Error::Pole(format!("log_gamma({z})")));
    }
    Ok(lgamma(z))
}

pub fn gamma(z: C64) -> Result<C64> {
    Ok(log_gamma(z)?.exp())
}

const B2K: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

pub(crate) fn psi(mut z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    while z.re < 10.0 {
        acc -= z.inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    let mut pw = w2;
    let mut tail = C64::new(0.0, 0.0);
    for (k, b) in B2K.iter().enumerate() {
        tail += pw * (b / (2 * (k + 1)) as f64);
        pw *= w2;
    }
    acc + z.ln() - w * 0.5 - tail
}

/// ψ(z) = Γ'(z)/Γ(z).
pub fn digamma(z: C64) -> Result<C64> {
    if is_pole(z) {
        return Err(Error::Pole(format!("digamma({z})")));
    }
    Ok(psi(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // Stirling series after shifting |z| past 40.
    fn stirling_oracle(z: C64) -> C64 {
        let mut w = z;
        let mut acc = C64::new(0.0, 0.0);
        while w.norm() < 40.0 || w.re < 1.0 {
            acc -= w.ln();
            w += 1.0;
        }
        let inv = w.inv();
        let inv2 = inv * inv;
        let series = inv * (1.0 / 12.0) - inv * inv2 * (1.0 / 360.0)
            + inv * inv2 * inv2 * (1.0 / 1260.0)
            - inv * inv2 * inv2 * inv2 * (1.0 / 1680.0);
        acc + (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series
    }

    #[test]
    fn known_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((log_gamma(c(0.5, 0.0)).unwrap().re - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((gamma(c(5.0, 0.0)).unwrap().re - 24.0).abs() < 1e-12);
        assert!((gamma(c(-0.5, 0.0)).unwrap().re + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!(log_gamma(c(0.0, 0.0)).is_err());
        assert!(log_gamma(c(-3.0, 0.0)).is_err());
        assert!(digamma(c(-2.0, 0.0)).is_err());
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(c(1.0, 0.0)).unwrap().re + EULER_GAMMA).abs() < 1e-14);
        let half = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((digamma(c(0.5, 0.0)).unwrap().re - half).abs() < 1e-14);
    }

    #[test]
    fn digamma_series_oracle() {
        // ψ(z) = -γ + Σ_{n≥0} (1/(n+1) - 1/(n+z)), tail by Euler–Maclaurin
        let z = c(0.3, 1.7);
        let big = 200_000usize;
        let mut acc = C64::new(-EULER_GAMMA, 0.0);
        for n in 0..big {
            acc += 1.0 / (n as f64 + 1.0) - (z + n as f64).inv();
        }
        let nn = big as f64;
        acc += (z - 1.0) / nn - (z - 1.0) * (z) / (2.0 * nn * nn);
        assert!((acc - digamma(z).unwrap()).norm() < 1e-9);
    }

    #[test]
    fn lanczos_vs_stirling() {
        for &(re, im) in &[
            (0.5, 0.0),
            (0.7, 3.0),
            (2.5, -7.0),
            (10.0, 50.0),
            (0.25, 99.0),
            (60.0, 70.0),
            (-3.5, 2.0),
            (-40.2, 0.3),
            (3.0, -95.0),
        ] {
            let z = c(re, im);
            let a = log_gamma(z).unwrap();
            let b = stirling_oracle(z);
            assert!((a - b).norm() < 2e-13 * b.norm().max(1.0), "z={z} {a} {b}");
        }
    }

    #[test]
    fn continuous_across_real_axis_off_cut() {
        for &x in &[0.3, 2.0, 7.5] {
            let up = log_gamma(c(x, 1e-12)).unwrap();
            let dn = log_gamma(c(x, -1e-12)).unwrap();
            assert!((up - dn).norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn recurrence(re in -20.0f64..30.0, im in -60.0f64..60.0) {
            let z = c(re, im);
            prop_assume!(z.norm() > 0.05);
            let lhs = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
            // equal modulo 2πi on the negative side, exactly equal elsewhere
            let k = (lhs.im / (2.0 * PI)).round();
            prop_assert!((lhs - c(0.0, 2.0 * PI * k)).norm() < 1e-12 * (1.0 + z.norm()));
            if re > 0.0 { prop_assert!(k == 0.0); }
        }

        #[test]
        fn digamma_recurrence_and_fd(re in -10.0f64..20.0, im in -30.0f64..30.0) {
            let z = c(re, im);
            prop_assume!(z.norm() > 0.1 && (z + 1.0).norm() > 0.1);
            let d = digamma(z + 1.0).unwrap() - digamma(z).unwrap() - z.inv();
            prop_assert!(d.norm() < 1e-11 * (1.0 + z.inv().norm()));
            let h = 1e-5;
            let fd = (log_gamma(z + h).unwrap() - log_gamma(z - h).unwrap()) / (2.0 * h);
            let jump = ((fd.im * 2.0 * h) / (2.0 * PI)).round();
            let fd = fd - c(0.0, jump * 2.0 * PI / (2.0 * h));
            prop_assert!((fd - digamma(z).unwrap()).norm() < 1e-7 * (1.0 + digamma(z).unwrap().norm()));
        }
    }
}
