use crate::error::{precondition, Result};
use crate::specfun::gauss_legendre;
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProfile {
    /// C^∞ plateau rising on [T/2, T/2 + T0] and falling on [4T - T0, 4T].
    Smooth,
    /// Indicator of [0, T].
    Sharp,
    /// Φ ≡ 0.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub t_scale: f64,
    pub t0: f64,
    pub profile: WeightProfile,
}

// e^{-1/u} for u > 0
fn flat(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth step: 0 for u ≤ 0, 1 for u ≥ 1.
pub fn smooth_step(u: f64) -> f64 {
    let a = flat(u);
    let b = flat(1.0 - u);
    if a + b == 0.0 {
        return 0.0;
    }
    a / (a + b)
}

impl WeightSpec {
    /// Requires √T ≤ T0 ≤ T.
    pub fn smooth(t_scale: f64, t0: f64) -> Result<Self> {
        if !(t_scale > 0.0) {
            return precondition("T must be positive");
        }
        if !(t0 >= t_scale.sqrt() && t0 <= t_scale) {
            return precondition(format!("T0 = {t0} must lie in [sqrt(T), T] for T = {t_scale}"));
        }
        Ok(WeightSpec { t_scale, t0, profile: WeightProfile::Smooth })
    }

    pub fn sharp(t_scale: f64) -> Result<Self> {
        if !(t_scale > 0.0) {
            return precondition("T must be positive");
        }
        Ok(WeightSpec { t_scale, t0: 0.0, profile: WeightProfile::Sharp })
    }

    pub fn zero(t_scale: f64) -> Self {
        WeightSpec { t_scale, t0: 0.0, profile: WeightProfile::Zero }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let big = self.t_scale;
        match self.profile {
            WeightProfile::Zero => 0.0,
            WeightProfile::Sharp => {
                if (0.0..=big).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            WeightProfile::Smooth => {
                smooth_step((t - 0.5 * big) / self.t0) * smooth_step((4.0 * big - t) / self.t0)
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self.profile {
            WeightProfile::Smooth => (0.5 * self.t_scale, 4.0 * self.t_scale),
            _ => (0.0, self.t_scale),
        }
    }

    fn panel_len(&self) -> f64 {
        match self.profile {
            WeightProfile::Sharp => (self.t_scale / 32.0).min(0.25),
            _ => 0.25,
        }
    }

    /// Nodes and weights (already multiplied by Φ) for ∫ f(t) Φ(t) dt.
    /// 64 nodes per unit length, or half that with `coarse` for the
    /// refinement error estimate.
    pub fn nodes(&self, coarse: bool) -> Vec<(f64, f64)> {
        if self.profile == WeightProfile::Zero {
            return Vec::new();
        }
        let (a, b) = self.support();
        let h0 = if coarse { 2.0 * self.panel_len() } else { self.panel_len() };
        let panels = ((b - a) / h0).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let (x, w) = gauss_legendre(16);
        let mut out = Vec::with_capacity(panels * 16);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                let t = mid + 0.5 * h * xi;
                let phi = self.eval(t);
                if phi != 0.0 {
                    out.push((t, 0.5 * h * wi * phi));
                }
            }
        }
        out
    }

    /// ∫ f(t) Φ(t) dt and the gap to the half-density rule.
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> (C64, f64) {
        let fine: C64 = self.nodes(false).into_iter().map(|(t, w)| f(t) * w).sum();
        let coarse: C64 = self.nodes(true).into_iter().map(|(t, w)| f(t) * w).sum();
        (fine, (fine - coarse).norm())
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_| C64::new(1.0, 0.0)).0.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_profile_shape() {
        let w = WeightSpec::smooth(8.0, 8f64.powf(0.75)).unwrap();
        assert_eq!(w.eval(3.99), 0.0);
        assert_eq!(w.eval(32.01), 0.0);
        for i in 0..=400 {
            let t = 3.0 + i as f64 * 0.08;
            let v = w.eval(t);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!((w.eval(16.0) - 1.0).abs() < 1e-15);
        assert!(WeightSpec::smooth(100.0, 5.0).is_err());
        assert!(WeightSpec::smooth(100.0, 200.0).is_err());
    }

    #[test]
    fn derivative_bounds() {
        // j-th finite differences scale like T0^{-j}
        for (big, t0) in [(8.0f64, 8f64.powf(0.75)), (200.0, 60.0)] {
            let w = WeightSpec::smooth(big, t0).unwrap();
            let h = 1e-2 * t0;
            let mut worst = [0.0f64; 3];
            let n = 2000;
            for i in 0..=n {
                let t = 0.5 * big + (3.5 * big) * i as f64 / n as f64;
                let f = |k: f64| w.eval(t + k * h);
                let d1 = (f(1.0) - f(-1.0)) / (2.0 * h);
                let d2 = (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h);
                let d3 = (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h * h * h);
                worst[0] = worst[0].max(d1.abs() * t0);
                worst[1] = worst[1].max(d2.abs() * t0 * t0);
                worst[2] = worst[2].max(d3.abs() * t0.powi(3));
            }
            assert!(worst[0] < 5.0 && worst[1] < 50.0 && worst[2] < 1000.0, "{worst:?}");
        }
    }

    #[test]
    fn sharp_mass_and_zero() {
        let s = WeightSpec::sharp(2.0).unwrap();
        assert!((s.mass() - 2.0).abs() < 1e-13);
        let (v, e) = s.integrate(|t| C64::new(t * t, 0.0));
        assert!((v.re - 8.0 / 3.0).abs() < 1e-13 && e < 1e-12);
        assert_eq!(WeightSpec::zero(5.0).integrate(|_| C64::new(1.0, 0.0)).0, C64::new(0.0, 0.0));
    }
}
