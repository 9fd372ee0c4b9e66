use crate::error::{precondition, Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
pub fn integrate_interval<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    nodes: usize,
) -> C64 {
    let (x, w) = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut part = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            part += f(mid + 0.5 * h * xi) * *wi;
        }
        acc += part * (0.5 * h);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abscissa: f64,
    pub height_cut: f64,
    pub panel: f64,
    pub nodes_per_panel: usize,
    pub tol: f64,
}

impl QuadratureSpec {
    /// Panel 0.5, 16 nodes, cut where exp(c² - y²) drops below tol/100.
    pub fn for_gaussian_kernel(abscissa: f64, tol: f64) -> Self {
        let height_cut = (abscissa * abscissa + (100.0 / tol).ln() + 4.0).sqrt();
        let height_cut = (height_cut / 0.5).ceil() * 0.5;
        QuadratureSpec { abscissa, height_cut, panel: 0.5, nodes_per_panel: 16, tol }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.height_cut > 0.0 && self.panel > 0.0) {
            return precondition("height_cut and panel must be positive");
        }
        if self.height_cut < self.panel {
            return precondition("height_cut must be at least one panel");
        }
        if self.nodes_per_panel < 4 {
            return precondition("need at least 4 nodes per panel");
        }
        if !(self.tol > 1e-15 && self.tol < 1e-3) {
            return precondition("tol must lie in (1e-15, 1e-3)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineValue {
    pub value: C64,
    pub err: f64,
}

fn line_sum<F: Fn(C64) -> C64>(f: &F, spec: &QuadratureSpec, nodes: usize) -> (C64, f64) {
    let (x, w) = gauss_legendre(nodes);
    let panels = (2.0 * spec.height_cut / spec.panel).round().max(1.0) as usize;
    let h = 2.0 * spec.height_cut / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    let mut edge = 0.0;
    for p in 0..panels {
        let mid = -spec.height_cut + (p as f64 + 0.5) * h;
        let mut part = C64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let y = mid + 0.5 * h * xi;
            part += f(C64::new(spec.abscissa, y)) * *wi;
        }
        part *= 0.5 * h;
        if p == 0 || p + 1 == panels {
            edge += part.norm();
        }
        acc += part;
    }
    (acc / (2.0 * PI), edge / (2.0 * PI))
}

/// (1/2πi) ∫_{(c)} f(s) ds truncated to |Im s| ≤ height_cut.
pub fn vertical_line_integral<F: Fn(C64) -> C64>(f: F, spec: &QuadratureSpec) -> Result<LineValue> {
    spec.validate()?;
    let (coarse, _) = line_sum(&f, spec, spec.nodes_per_panel);
    let (fine, edge) = line_sum(&f, spec, 2 * spec.nodes_per_panel);
    if edge > 0.1 * spec.tol * fine.norm().max(1.0) {
        return Err(Error::TailDominance { tail: edge, tol: spec.tol });
    }
    Ok(LineValue { value: fine, err: (fine - coarse).norm() + edge })
}

/// Trapezoid rule on a vertical line for many evaluations of
/// (1/2πi) ∫_{(c)} φ(s) x^{-s} ds with φ fixed. The integrand is analytic in a
/// strip around the line so the equispaced rule converges geometrically, and
/// the x-dependence reduces to a rotation recurrence.
#[derive(Debug, Clone)]
pub struct LineKernel {
    pub abscissa: f64,
    pub step: f64,
    // φ(c + i k h) for k = -K..=K
    coefs: Vec<C64>,
}

impl LineKernel {
    pub fn new<F: Fn(C64) -> C64>(phi: F, abscissa: f64, step: f64, height_cut: f64) -> Self {
        let kmax = (height_cut / step).ceil() as i64;
        let coefs = (-kmax..=kmax)
            .map(|k| phi(C64::new(abscissa, k as f64 * step)))
            .collect();
        LineKernel { abscissa, step, coefs }
    }

    pub fn half_width(&self) -> usize {
        (self.coefs.len() - 1) / 2
    }

    /// Magnitude of the outermost coefficients, a proxy for truncation.
    pub fn edge_magnitude(&self) -> f64 {
        self.coefs[0].norm().max(self.coefs[self.coefs.len() - 1].norm())
    }

    /// Value at x with an error estimate from the step-doubled rule.
    pub fn eval_err(&self, x: f64) -> (C64, f64) {
        let u = x.ln();
        let kmax = self.half_width() as f64;
        let rot = C64::from_polar(1.0, -self.step * u);
        let mut ph = C64::from_polar(1.0, kmax * self.step * u);
        let mut all = C64::new(0.0, 0.0);
        let mut even = C64::new(0.0, 0.0);
        let kmax_i = self.half_width() as i64;
        for (i, c) in self.coefs.iter().enumerate() {
            let term = c * ph;
            all += term;
            if (i as i64 - kmax_i) % 2 == 0 {
                even += term;
            }
            ph *= rot;
        }
        let scale = self.step / (2.0 * PI) * (-self.abscissa * u).exp();
        let v = all * scale;
        (v, (v - even * (2.0 * scale)).norm())
    }

    pub fn eval(&self, x: f64) -> C64 {
        let u = x.ln();
        let kmax = self.half_width() as f64;
        let rot = C64::from_polar(1.0, -self.step * u);
        let mut ph = C64::from_polar(1.0, kmax * self.step * u);
        let mut all = C64::new(0.0, 0.0);
        for c in &self.coefs {
            all += c * ph;
            ph *= rot;
        }
        all * (self.step / (2.0 * PI) * (-self.abscissa * u).exp())
    }
}
