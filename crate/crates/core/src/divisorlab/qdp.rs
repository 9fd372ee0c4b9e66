use crate::arith::{divisors, gcd, lcm, mobius, q0_of};
use crate::error::{precondition, Error, Result};
use crate::moments::smooth_step;
use crate::specfun::gauss_legendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Smooth weight supported on [1, 2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothWindow {
    /// exp(-1/(1-(2x-3)²)), normalized to 1 at x = 3/2.
    Bump,
    /// Flat top with smooth ramps of width 1/q at both ends.
    Plateau { q: f64 },
    Zero,
}

impl SmoothWindow {
    pub fn eval(&self, x: f64) -> f64 {
        if !(x > 1.0 && x < 2.0) {
            return 0.0;
        }
        match *self {
            SmoothWindow::Bump => {
                let y = 2.0 * x - 3.0;
                (1.0 - 1.0 / (1.0 - y * y)).exp()
            }
            SmoothWindow::Plateau { q } => smooth_step(q * (x - 1.0)) * smooth_step(q * (2.0 - x)),
            SmoothWindow::Zero => 0.0,
        }
    }

    /// The derivative scale Q: W^{(j)} ≪ Q^j.
    pub fn q_const(&self) -> f64 {
        match *self {
            SmoothWindow::Plateau { q } => q,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SmoothWindow::Plateau { q } = *self {
            if !(q >= 2.0 && q.is_finite()) {
                return precondition(format!("plateau needs Q >= 2, got {q}"));
            }
        }
        Ok(())
    }

    /// max |W^{(j)}| / Q^j for j = 0..=jmax, by central differences on a grid.
    pub fn derivative_constants(&self, jmax: usize) -> Vec<f64> {
        let q = self.q_const();
        let h = 2e-3 / q;
        let grid = 4000;
        let mut out = vec![0.0f64; jmax + 1];
        for i in 0..=grid {
            let x = 1.0 + i as f64 / grid as f64;
            for (j, slot) in out.iter_mut().enumerate() {
                // j-th central difference: Σ_k (-1)^k C(j,k) W(x + (j/2 - k)h) / h^j
                let mut acc = 0.0;
                let mut binom = 1.0;
                for k in 0..=j {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * binom * self.eval(x + (j as f64 / 2.0 - k as f64) * h);
                    binom = binom * (j - k) as f64 / (k + 1) as f64;
                }
                let d = (acc / h.powi(j as i32)).abs() / q.powi(j as i32);
                *slot = slot.max(d);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// S_d^± with F the product of one window on each of the five axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdpInstance {
    pub h: f64,
    pub m1: f64,
    pub m2: f64,
    pub n1: f64,
    pub n2: f64,
    pub d: u64,
    pub q: u64,
    pub sign: Sign,
    pub window: SmoothWindow,
}

/// Allowed M1/M2 and N1/N2.
pub const SCALE_SLACK: f64 = 4.0;
const MAX_PRODUCT: f64 = 1e7;

fn support(scale: f64) -> std::ops::RangeInclusive<u64> {
    let lo = scale.floor() as u64 + 1;
    let hi = (2.0 * scale).ceil() as u64 - 1;
    lo..=hi
}

impl QdpInstance {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("H", self.h), ("M1", self.m1), ("M2", self.m2), ("N1", self.n1), ("N2", self.n2)] {
            if !(v >= 1.0 && v.is_finite()) {
                return precondition(format!("{name} = {v} must be >= 1"));
            }
        }
        if self.q == 0 || self.d == 0 || self.q % self.d != 0 {
            return precondition(format!("d = {} must divide q = {}", self.d, self.q));
        }
        if self.m1 * self.m2 > MAX_PRODUCT || self.n1 * self.n2 > MAX_PRODUCT {
            return Err(Error::TooLarge(format!(
                "M1M2 = {} or N1N2 = {} beyond the enumeration budget 1e7",
                self.m1 * self.m2,
                self.n1 * self.n2
            )));
        }
        self.window.validate()
    }

    /// M1 ≤ slack·M2, N1 ≤ slack·N2 and H ≤ 0.1 √(M1M2N1N2).
    pub fn check_hypotheses(&self) -> Result<()> {
        self.validate()?;
        if self.m1 > SCALE_SLACK * self.m2 || self.n1 > SCALE_SLACK * self.n2 {
            return precondition("need M1 <= 4 M2 and N1 <= 4 N2");
        }
        let cap = 0.1 * (self.m1 * self.m2 * self.n1 * self.n2).sqrt();
        if self.h > cap {
            return precondition(format!("H = {} above 0.1 sqrt(M1 M2 N1 N2) = {cap}", self.h));
        }
        Ok(())
    }

    /// (H/d) N1^{1/2} q0^{1/2} (M1 + N1)
    pub fn error_scale(&self) -> f64 {
        self.h / self.d as f64 * self.n1.sqrt() * (q0_of(self.q) as f64).sqrt() * (self.m1 + self.n1)
    }

    pub fn mirrored(&self) -> Self {
        let sign = match self.sign {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        QdpInstance { m1: self.n1, m2: self.n2, n1: self.m1, n2: self.m2, sign, ..*self }
    }
}

/// Σ_{a b = P, (P, q) = 1} W(a/A) W(b/B), indexed from the returned offset.
fn product_weights(a: f64, b: f64, q: u64, w: &SmoothWindow) -> (u64, Vec<f64>) {
    let ra = support(a);
    let rb = support(b);
    let lo = ra.start() * rb.start();
    let hi = ra.end() * rb.end();
    if hi < lo {
        return (0, Vec::new());
    }
    let mut out = vec![0.0; (hi - lo + 1) as usize];
    let wb: Vec<(u64, f64)> = rb.filter(|&y| gcd(y, q) == 1).map(|y| (y, w.eval(y as f64 / b))).collect();
    for x in ra {
        if gcd(x, q) != 1 {
            continue;
        }
        let wx = w.eval(x as f64 / a);
        if wx == 0.0 {
            continue;
        }
        for &(y, wy) in &wb {
            out[(x * y - lo) as usize] += wx * wy;
        }
    }
    (lo, out)
}

/// Direct weighted count of m1 m2 - n1 n2 = ±h.
pub fn qdp_bruteforce(inst: &QdpInstance) -> Result<f64> {
    inst.validate()?;
    let w = inst.window;
    let (ao, a) = product_weights(inst.m1, inst.m2, inst.q, &w);
    let (bo, b) = product_weights(inst.n1, inst.n2, inst.q, &w);
    // plus: P = Q + h, Σ B[Q] A[Q + h]; minus: Q = P + h
    let (xo, x, yo, y) = match inst.sign {
        Sign::Plus => (bo, &b, ao, &a),
        Sign::Minus => (ao, &a, bo, &b),
    };
    let hs: Vec<u64> = support(inst.h).filter(|h| h % inst.d == 0).collect();
    let parts: Vec<f64> = hs
        .par_iter()
        .map(|&h| {
            let wh = w.eval(h as f64 / inst.h);
            if wh == 0.0 || x.is_empty() || y.is_empty() {
                return 0.0;
            }
            // x index i ↔ value xo + i; partner value xo + i + h ↔ y index xo + i + h - yo
            let shift = xo as i64 + h as i64 - yo as i64;
            let mut acc = 0.0;
            for (i, &xv) in x.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                let j = i as i64 + shift;
                if j >= 0 && (j as usize) < y.len() {
                    acc += xv * y[j as usize];
                }
            }
            wh * acc
        })
        .collect();
    Ok(parts.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdpMainTerm {
    pub value: f64,
    pub quad_err: f64,
    /// (d1, d2, m1, n1, h) tuples with nonzero outer weight.
    pub terms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Direct,
    ShiftedMinus,
}

const GL_NODES: usize = 20;

fn gl_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(GL_NODES))
}

fn composite(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (xs, ws) = gl_nodes();
    let width = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        for (x, w) in xs.iter().zip(ws) {
            acc += w * f(mid + half * x);
        }
    }
    acc * 0.5 * width
}

/// ∫ f over [a, b] with 8 panels, error from the 4-panel rule.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    if !(b > a) {
        return (0.0, 0.0);
    }
    let fine = composite(&f, a, b, 8);
    let coarse = composite(&f, a, b, 4);
    (fine, (fine - coarse).abs())
}

fn mainterm_impl(inst: &QdpInstance, form: Form) -> Result<QdpMainTerm> {
    inst.validate()?;
    let w = inst.window;
    let q = inst.q;
    let sq: Vec<u64> = divisors(q).into_iter().filter(|&e| mobius(e) != 0).collect();
    let mut outer = Vec::new();
    for &d1 in &sq {
        for &d2 in &sq {
            let coef = (mobius(d1) * mobius(d2)) as f64 / lcm(d1, d2)? as f64;
            let delta = lcm(inst.d, gcd(d1, d2))?;
            outer.push((coef, delta));
        }
    }
    let m1s: Vec<u64> = support(inst.m1).filter(|&m| gcd(m, q) == 1).collect();
    let n1s: Vec<u64> = support(inst.n1).filter(|&n| gcd(n, q) == 1).collect();
    let (big_m2, big_n2, big_h) = (inst.m2, inst.n2, inst.h);
    let parts: Vec<(f64, f64, u64)> = m1s
        .par_iter()
        .map(|&m1| {
            let wm = w.eval(m1 as f64 / inst.m1);
            let mut acc = 0.0;
            let mut err = 0.0;
            let mut terms = 0u64;
            for &n1 in &n1s {
                let wn = w.eval(n1 as f64 / inst.n1);
                if wm * wn == 0.0 {
                    continue;
                }
                let k = gcd(m1, n1);
                let am = m1 as f64 * big_m2;
                let bn = n1 as f64 * big_n2;
                for &(coef, delta) in &outer {
                    let step = k * delta;
                    let hmin = (big_h / step as f64).floor() as u64 + 1;
                    let mut h = hmin;
                    loop {
                        let kk = (step * h) as f64;
                        if kk >= 2.0 * big_h {
                            break;
                        }
                        let wh = w.eval(kk / big_h);
                        h += 1;
                        if wh == 0.0 {
                            continue;
                        }
                        terms += 1;
                        // x ranges where both window arguments lie in (1, 2)
                        let (val, e) = match (inst.sign, form) {
                            (Sign::Plus, _) => {
                                let a = (bn / kk).max(am / kk - 1.0).max(0.0);
                                let b = (2.0 * bn / kk).min(2.0 * am / kk - 1.0);
                                integrate(|x| w.eval(kk * (x + 1.0) / am) * w.eval(kk * x / bn), a, b)
                            }
                            (Sign::Minus, Form::Direct) => {
                                let a = (bn / kk).max(am / kk + 1.0);
                                let b = (2.0 * bn / kk).min(2.0 * am / kk + 1.0);
                                integrate(|x| w.eval(kk * (x - 1.0) / am) * w.eval(kk * x / bn), a, b)
                            }
                            (Sign::Minus, Form::ShiftedMinus) => {
                                let a = (am / kk).max(bn / kk - 1.0).max(-1.0);
                                let b = (2.0 * am / kk).min(2.0 * bn / kk - 1.0);
                                integrate(|x| w.eval(kk * x / am) * w.eval(kk * (x + 1.0) / bn), a, b)
                            }
                        };
                        let pre = coef * wh * wm * wn * (k as f64 * kk) / (m1 * n1) as f64;
                        acc += pre * val;
                        err += (pre * e).abs();
                    }
                }
            }
            (acc, err, terms)
        })
        .collect();
    let mut out = QdpMainTerm { value: 0.0, quad_err: 0.0, terms: 0 };
    for (v, e, t) in parts {
        out.value += v;
        out.quad_err += e;
        out.terms += t;
    }
    Ok(out)
}

/// Σ_{d1,d2|q} μ(d1)μ(d2)/[d1,d2] Σ_{m1,n1,h} (k²hΔ/m1n1) ∫ F dx, k = (m1, n1), Δ = [d, (d1, d2)].
pub fn qdp_mainterm(inst: &QdpInstance) -> Result<QdpMainTerm> {
    mainterm_impl(inst, Form::Direct)
}

/// The minus-sign main term after x → x + 1, an independent evaluation path.
pub fn qdp_mainterm_shifted(inst: &QdpInstance) -> Result<QdpMainTerm> {
    if inst.sign != Sign::Minus {
        return precondition("the shifted form applies to the minus sign only");
    }
    mainterm_impl(inst, Form::ShiftedMinus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QdpRow {
    pub instance: QdpInstance,
    pub brute: f64,
    pub main: f64,
    pub quad_err: f64,
    pub error_scale: f64,
    /// |brute - main| / error_scale
    pub constant: f64,
    /// main / brute
    pub ratio: f64,
}

pub fn qdp_compare(inst: &QdpInstance) -> Result<QdpRow> {
    inst.check_hypotheses()?;
    let brute = qdp_bruteforce(inst)?;
    let main = qdp_mainterm(inst)?;
    let error_scale = inst.error_scale();
    Ok(QdpRow {
        instance: *inst,
        brute,
        main: main.value,
        quad_err: main.quad_err,
        error_scale,
        constant: (brute - main.value).abs() / error_scale,
        ratio: main.value / brute,
    })
}

/// The default sweep: q ∈ {3, 5, 7}, d ∈ {1, q}, both signs, five scale shapes.
pub fn qdp_default_sweep() -> Vec<QdpInstance> {
    let shapes = [
        (60.0, 12.0, 900.0, 12.0, 900.0),
        (80.0, 10.0, 1500.0, 15.0, 1000.0),
        (120.0, 20.0, 800.0, 16.0, 1000.0),
        (40.0, 30.0, 120.0, 25.0, 150.0),
        (35.0, 45.0, 60.0, 40.0, 70.0),
    ];
    let mut out = Vec::new();
    for q in [3u64, 5, 7] {
        for d in [1, q] {
            for &(h, m1, m2, n1, n2) in &shapes {
                for sign in [Sign::Plus, Sign::Minus] {
                    out.push(QdpInstance { h: h * d as f64, m1, m2, n1, n2, d, q, sign, window: SmoothWindow::Bump });
                }
            }
        }
    }
    out
}
