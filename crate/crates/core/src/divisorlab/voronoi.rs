use super::qdp::SmoothWindow;
use crate::arith::{divisor_count_table, e_frac, gcd, is_prime, kl2, mod_inv, rem};
use crate::error::{precondition, Error, Result};
use crate::specfun::{bessel_k0, bessel_y0, gauss_legendre, EULER_GAMMA};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const NODES: usize = 16;

/// ∫_1^2 f(v) dv with panels sized to the oscillation of f.
fn panel_integral(f: impl Fn(f64) -> f64, panels: usize, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let width = 1.0 / panels as f64;
    let half = 0.5 * width;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = 1.0 + p as f64 * width + half;
        for (x, w) in gl.0.iter().zip(&gl.1) {
            acc += w * f(mid + half * x);
        }
    }
    acc * half
}

/// r̃_+(y) = -2π ∫ r(u) Y0(4π√(uy)) du and r̃_-(y) = 4 ∫ r(u) K0(4π√(uy)) du for r(u) = W(u/N).
pub struct BesselTransforms {
    pub n_scale: f64,
    window: SmoothWindow,
    gl: (Vec<f64>, Vec<f64>),
}

impl BesselTransforms {
    pub fn new(window: SmoothWindow, n_scale: f64) -> Self {
        BesselTransforms { n_scale, window, gl: gauss_legendre(NODES) }
    }

    fn panels(&self, y: f64) -> usize {
        // phase 4π√(Nvy) moves by 4π√(Ny)(√2 - 1) across [1, 2]
        let span = 4.0 * PI * (self.n_scale * y).sqrt() * (2f64.sqrt() - 1.0);
        8 + (span / PI).ceil() as usize
    }

    pub fn plus(&self, y: f64) -> f64 {
        let n = self.n_scale;
        let k = 4.0 * PI * (n * y).sqrt();
        -2.0 * PI * n * panel_integral(|v| self.window.eval(v) * bessel_y0(k * v.sqrt()), self.panels(y), &self.gl)
    }

    pub fn minus(&self, y: f64) -> f64 {
        let n = self.n_scale;
        let k = 4.0 * PI * (n * y).sqrt();
        if k > 700.0 {
            return 0.0;
        }
        4.0 * n * panel_integral(|v| self.window.eval(v) * bessel_k0(k * v.sqrt()), 8, &self.gl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronoiReport {
    pub a: i64,
    pub c: u64,
    pub n_scale: f64,
    pub lhs: C64,
    pub main: f64,
    pub dual: C64,
    /// |lhs - main - dual| / scale
    pub residual: f64,
    /// Σ d(n)|r(n)|
    pub scale: f64,
    /// last dual index summed
    pub dual_terms: u64,
    /// Σ |dual terms| over n > 50c²/N, relative to scale
    pub tail_past_50: f64,
    /// max |r̃_±(n/c²)| / N over the dual sum
    pub transform_constant: f64,
}

/// Σ d(n) r(n) e(an/c) against main term plus the two dual sums, r(x) = W(x/N).
pub fn voronoi_residual(a: i64, c: u64, window: SmoothWindow, n_scale: f64) -> Result<VoronoiReport> {
    if c == 0 || c > 12 {
        return precondition(format!("c = {c} outside 1..=12"));
    }
    if gcd(rem(a, c), c) != 1 {
        return precondition(format!("a = {a} not coprime to c = {c}"));
    }
    if !(n_scale >= 10.0 && n_scale <= 2e4) {
        return precondition(format!("N = {n_scale} outside [10, 2e4]"));
    }
    window.validate()?;
    let abar = mod_inv(a, c).ok_or_else(|| Error::Domain("a has no inverse mod c".into()))?;
    let ar = rem(a, c);
    let hi = (2.0 * n_scale).ceil() as usize;
    let dtab = divisor_count_table(hi);
    let mut lhs = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in (n_scale.floor() as usize + 1)..hi {
        let r = window.eval(n as f64 / n_scale);
        lhs += e_frac(ar * n as u64 % c, c) * (dtab[n] as f64 * r);
        scale += dtab[n] as f64 * r.abs();
    }
    let cf = c as f64;
    let gl = gauss_legendre(20);
    let main = n_scale / cf
        * panel_integral(
            |v| ((n_scale * v).ln() + 2.0 * EULER_GAMMA - 2.0 * cf.ln()) * window.eval(v),
            8,
            &gl,
        );
    let tr = BesselTransforms::new(window, n_scale);
    let cut50 = 50.0 * cf * cf * window.q_const().powi(2) / n_scale;
    let mut dual = C64::new(0.0, 0.0);
    let mut tail_past_50 = 0.0;
    let mut transform_constant = 0.0f64;
    const BLOCK: u64 = 32;
    let mut quiet = 0;
    let mut n = 1u64;
    let mut dtab = divisor_count_table(4096);
    while quiet < 3 {
        if n as usize + BLOCK as usize >= dtab.len() {
            dtab = divisor_count_table(dtab.len() * 4);
        }
        if n > 5_000_000 {
            return Err(Error::Truncation { estimate: f64::NAN, tol: 1e-10 * scale });
        }
        let mut block_max = 0.0f64;
        for m in n..n + BLOCK {
            let y = m as f64 / (cf * cf);
            let (p, q) = (tr.plus(y), tr.minus(y));
            transform_constant = transform_constant.max(p.abs().max(q.abs()) / n_scale);
            let dm = dtab[m as usize] as f64;
            // r̃_+ pairs with e(-ā n/c), r̃_- with e(ā n/c)
            let pos = abar * m % c;
            let term = (e_frac((c - pos) % c, c) * p + e_frac(pos, c) * q) * (dm / cf);
            dual += term;
            block_max = block_max.max(term.norm());
            if m as f64 > cut50 {
                tail_past_50 += term.norm();
            }
        }
        n += BLOCK;
        if block_max < 1e-12 * scale {
            quiet += 1;
        } else {
            quiet = 0;
        }
    }
    let residual = (lhs - main - dual).norm() / scale;
    Ok(VoronoiReport {
        a,
        c,
        n_scale,
        lhs,
        main,
        dual,
        residual,
        scale,
        dual_terms: n - 1,
        tail_past_50: tail_past_50 / scale,
        transform_constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearReport {
    pub q: u64,
    pub m_scale: f64,
    pub n_scale: f64,
    pub value: C64,
    /// Q²(√q + MN/√q)
    pub bound: f64,
    pub ratio: f64,
}

/// Σ_{m,n} W(m/M) W(n/N) Kl2(amn; q) by residue classes.
pub fn bilinear_kl_sum(q: u64, m_scale: f64, n_scale: f64, a: i64, window: SmoothWindow) -> Result<BilinearReport> {
    if !is_prime(q) || q > 500 {
        return precondition(format!("q = {q} must be a prime <= 500"));
    }
    if rem(a, q) == 0 {
        return precondition(format!("a = {a} divisible by q = {q}"));
    }
    if !(m_scale >= 1.0 && n_scale >= 1.0) {
        return precondition("M and N must be >= 1");
    }
    if m_scale * n_scale > 1e7 {
        return Err(Error::TooLarge(format!("MN = {} beyond 1e7", m_scale * n_scale)));
    }
    window.validate()?;
    let qs = q as usize;
    let classes = |scale: f64| {
        let mut out = vec![0.0; qs];
        for m in (scale.floor() as u64 + 1)..=(2.0 * scale).ceil() as u64 {
            out[(m % q) as usize] += window.eval(m as f64 / scale);
        }
        out
    };
    let wm = classes(m_scale);
    let wn = classes(n_scale);
    let ar = rem(a, q);
    let kl: Vec<f64> = (0..q).map(|r| kl2((ar * r % q) as i64, q)).collect();
    let mut value = 0.0;
    for (r, &x) in wm.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (s, &y) in wn.iter().enumerate() {
            inner += y * kl[r * s % qs];
        }
        value += x * inner;
    }
    let qc = window.q_const();
    let sq = (q as f64).sqrt();
    let bound = qc * qc * (sq + m_scale * n_scale / sq);
    Ok(BilinearReport {
        q,
        m_scale,
        n_scale,
        value: C64::new(value, 0.0),
        bound,
        ratio: value.abs() / bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn voronoi_examples() {
        let r = voronoi_residual(1, 1, SmoothWindow::Bump, 500.0).unwrap();
        assert!(r.residual <= 1e-5, "{r:?}");
        let r = voronoi_residual(1, 3, SmoothWindow::Bump, 1000.0).unwrap();
        assert!(r.residual <= 1e-5, "{r:?}");
        assert!(r.transform_constant <= 10.0, "{r:?}");
        assert!(voronoi_residual(2, 4, SmoothWindow::Bump, 1000.0).is_err());
        assert!(voronoi_residual(1, 13, SmoothWindow::Bump, 1000.0).is_err());
    }

    #[test]
    fn dual_tail_past_fifty_is_not_negligible() {
        // the bump's transform decays like exp(-c (Ny)^{1/4}), so 50c²/N cuts far too early
        let r = voronoi_residual(1, 3, SmoothWindow::Bump, 1000.0).unwrap();
        assert!(r.tail_past_50 > 1e-6 && r.tail_past_50 < 1e-3, "{r:?}");
        assert!(r.dual_terms as f64 > 10.0 * 50.0 * 9.0 / 1000.0);
    }

    #[test]
    fn voronoi_negative_a() {
        let r = voronoi_residual(-2, 7, SmoothWindow::Bump, 2000.0).unwrap();
        assert!(r.residual <= 1e-5, "{r:?}");
    }

    #[test]
    fn transforms_small_at_large_y() {
        let t = BesselTransforms::new(SmoothWindow::Bump, 1000.0);
        assert!(t.minus(1.0).abs() < 1e-100);
        assert!(t.plus(50.0).abs() < 1e-6 * 1000.0, "{}", t.plus(50.0));
    }

    #[test]
    fn bilinear_examples() {
        let r = bilinear_kl_sum(101, 50.0, 50.0, 1, SmoothWindow::Bump).unwrap();
        assert!(r.value.norm() <= 20.0 * r.bound, "{r:?}");
        assert_eq!(r.value.im, 0.0);
        let z = bilinear_kl_sum(101, 50.0, 50.0, 1, SmoothWindow::Zero).unwrap();
        assert_eq!(z.value.norm(), 0.0);
        assert!(bilinear_kl_sum(100, 50.0, 50.0, 1, SmoothWindow::Bump).is_err());
        assert!(bilinear_kl_sum(101, 50.0, 50.0, 101, SmoothWindow::Bump).is_err());
    }

    #[test]
    fn bilinear_matches_direct_sum() {
        let w = SmoothWindow::Bump;
        let (q, m, n, a) = (13u64, 9.0, 11.0, 5i64);
        let mut want = 0.0;
        for x in 10..18u64 {
            for y in 12..22u64 {
                want += w.eval(x as f64 / m) * w.eval(y as f64 / n) * kl2(a * (x * y) as i64, q);
            }
        }
        let got = bilinear_kl_sum(q, m, n, a, w).unwrap().value.re;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}
