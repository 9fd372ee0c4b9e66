use crate::arith::ShiftTuple;
use crate::error::{domain, precondition, Error, Result};
use crate::specfun::{lgamma, vertical_line_integral, LineKernel, LineValue, QuadratureSpec};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which zero set the even polynomial P in G(s) = P(s) e^{s²} carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum KernelVariant {
    /// P ≡ 1 and G(s) = e^{s²/4}. Admissible for the approximate functional
    /// equation itself and free of the huge dynamic range P has when its
    /// zeros are tiny.
    Gaussian,
    Thm13,
    Thm14,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaKernelSpec {
    pub shifts: ShiftTuple,
    pub t: f64,
    pub parity: u8,
    pub variant: KernelVariant,
    /// Every point where G vanishes, closed under negation.
    pub zero_set: Vec<C64>,
    #[serde(skip)]
    reps: Vec<C64>,
}

const MIN_ZERO: f64 = 1e-6;
const MERGE: f64 = 1e-12;

fn push_pair(reps: &mut Vec<C64>, z: C64) {
    if reps.iter().any(|r| (r - z).norm() < MERGE || (r + z).norm() < MERGE) {
        return;
    }
    reps.push(z);
}

impl GammaKernelSpec {
    pub fn new(shifts: ShiftTuple, t: f64, parity: u8, variant: KernelVariant) -> Result<Self> {
        if parity > 1 {
            return precondition("parity must be 0 or 1");
        }
        if !t.is_finite() {
            return precondition("t must be finite");
        }
        let ShiftTuple { alpha, beta, gamma, delta, .. } = shifts;
        let mut reps = Vec::new();
        if variant != KernelVariant::Gaussian {
            for s in [alpha, beta] {
                for u in [gamma, delta] {
                    push_pair(&mut reps, (s + u) / 2.0);
                }
            }
        }
        if variant == KernelVariant::Thm14 {
            for s in [alpha, beta, gamma, delta] {
                for it in [C64::new(0.0, t), C64::new(0.0, -t)] {
                    push_pair(&mut reps, 0.5 + s + it);
                    push_pair(&mut reps, 0.5 - s + it);
                }
            }
        }
        if let Some(z) = reps.iter().find(|z| z.norm() < MIN_ZERO) {
            return Err(Error::Degenerate(format!("kernel zero {z} too close to the origin")));
        }
        let mut zero_set = Vec::with_capacity(2 * reps.len());
        for z in &reps {
            zero_set.push(*z);
            zero_set.push(-*z);
        }
        Ok(GammaKernelSpec { shifts, t, parity, variant, zero_set, reps })
    }

    /// Same t, parity and variant with new shifts.
    pub fn with_shifts(&self, shifts: ShiftTuple) -> Result<Self> {
        Self::new(shifts, self.t, self.parity, self.variant)
    }

    pub fn with_parity(&self, parity: u8) -> Result<Self> {
        Self::new(self.shifts, self.t, parity, self.variant)
    }

    /// Kernel for the second half of the approximate functional equation.
    pub fn reflected(&self) -> Result<Self> {
        self.with_shifts(self.shifts.reflect())
    }

    pub fn p_poly(&self, s: C64) -> C64 {
        let s2 = s * s;
        self.reps.iter().fold(C64::new(1.0, 0.0), |acc, z| acc * (1.0 - s2 / (z * z)))
    }

    /// G(s) = P(s) e^{s²}, or e^{s²/4} for the Gaussian variant. The narrower
    /// real-axis growth makes V decay like e^{-(log x/t²)²} rather than a
    /// quarter of that exponent, which shortens the sums considerably.
    pub fn g_kernel(&self, s: C64) -> C64 {
        match self.variant {
            KernelVariant::Gaussian => (s * s / 4.0).exp(),
            _ => self.p_poly(s) * (s * s).exp(),
        }
    }

    fn gamma_args(&self) -> [C64; 4] {
        let a = 0.5 + self.parity as f64;
        let it = C64::new(0.0, self.t);
        let ShiftTuple { alpha, beta, gamma, delta, .. } = self.shifts;
        [a + alpha + it, a + beta + it, a + gamma - it, a + delta - it]
    }

    /// Poles of g in Re s < 0 that P does not cancel, first few per factor.
    fn first_pole_re(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for w in self.gamma_args() {
            for j in 0..4 {
                let p = -w - 2.0 * j as f64;
                if self.zero_set.iter().any(|z| (z - p).norm() < 1e-9) {
                    continue;
                }
                best = best.max(p.re);
                break;
            }
        }
        best
    }

    /// log g(s), without pole checks.
    fn log_g(&self, s: C64) -> C64 {
        let mut acc = -2.0 * s * PI.ln();
        for w in self.gamma_args() {
            acc += lgamma((w + s) / 2.0) - lgamma(w / 2.0);
        }
        acc
    }

    /// φ(s) = G(s) g(s) / s, the V integrand without x^{-s}.
    fn phi(&self, s: C64) -> C64 {
        self.g_kernel(s) * self.log_g(s).exp() / s
    }
}

fn near_pole(w: C64) -> bool {
    w.re <= 1e-12 && (w.re - w.re.round()).abs() < 1e-12 && w.im.abs() < 1e-12
}

/// g(s) = π^{-2s} ∏ Γ((½+σ+s±it+𝔞)/2) / Γ((½+σ±it+𝔞)/2), with +it on α, β.
pub fn g_factor(s: C64, spec: &GammaKernelSpec) -> Result<C64> {
    for w in spec.gamma_args() {
        if near_pole((w + s) / 2.0) || near_pole(w / 2.0) {
            return Err(Error::Pole(format!("g_factor at s = {s}")));
        }
    }
    Ok(spec.log_g(s).exp())
}

fn line_spec(abscissa: f64, phi: &dyn Fn(C64) -> C64, x: f64, tol: f64) -> QuadratureSpec {
    // walk up until the integrand is negligible against tol
    let lx = x.ln();
    let size = |y: f64| {
        let a = phi(C64::new(abscissa, y)).norm();
        let b = phi(C64::new(abscissa, -y)).norm();
        a.max(b) * (-abscissa * lx).exp()
    };
    let mut cut = 4.0;
    while cut < 40.0 && (size(cut) > 1e-3 * tol || size(cut + 0.5) > 1e-3 * tol) {
        cut += 1.0;
    }
    // keep the x^{-s} phase to a few radians per panel
    let panel = (4.0 / lx.abs().max(1e-9)).min(0.5);
    let cut = (cut / panel).ceil() * panel;
    QuadratureSpec { abscissa, height_cut: cut, panel, nodes_per_panel: 16, tol }
}

fn check_generic(spec: &GammaKernelSpec) -> Result<()> {
    if spec.variant != KernelVariant::Gaussian && spec.shifts.separation < 1e-6 {
        return precondition("shifts are not generic (separation < 1e-6)");
    }
    Ok(())
}

/// V(x) on a chosen line Re s = c > 0.
pub fn v_weight_on(x: f64, spec: &GammaKernelSpec, abscissa: f64) -> Result<LineValue> {
    if !(x > 0.0) {
        return domain(format!("v_weight needs x > 0, got {x}"));
    }
    if abscissa <= 0.0 {
        return precondition("the V line must lie right of s = 0");
    }
    check_generic(spec)?;
    let phi = |s: C64| spec.phi(s);
    let qs = line_spec(abscissa, &phi, x, 1e-13);
    let lx = x.ln();
    vertical_line_integral(|s| phi(s) * (-s * lx).exp(), &qs)
}

/// Line left of 0 used for small x, together with the residue 1 at s = 0.
fn left_abscissa(spec: &GammaKernelSpec) -> f64 {
    0.5 * spec.first_pole_re().max(-6.0)
}

/// V_{α,β,γ,δ}(x, t, 𝔞) = (1/2πi) ∫_{(1)} G(s) g(s) x^{-s} ds / s.
///
/// For x < 1 the line is moved left past s = 0, picking up G(0) g(0) = 1.
pub fn v_weight(x: f64, spec: &GammaKernelSpec) -> Result<LineValue> {
    if !(x > 0.0) {
        return domain(format!("v_weight needs x > 0, got {x}"));
    }
    check_generic(spec)?;
    if x >= 1.0 {
        let c = if x > 1e3 { 2.0 } else { 1.0 };
        return v_weight_on(x, spec, c);
    }
    let c = left_abscissa(spec);
    let phi = |s: C64| spec.phi(s);
    let qs = line_spec(c, &phi, x, 1e-13);
    let lx = x.ln();
    let v = vertical_line_integral(|s| phi(s) * (-s * lx).exp(), &qs)?;
    Ok(LineValue { value: v.value + 1.0, err: v.err })
}

/// X_{a,c}(q,t,𝔞) = (q/π)^{-a-c} Γ((½-a-it+𝔞)/2)/Γ((½+a+it+𝔞)/2) · Γ((½-c+it+𝔞)/2)/Γ((½+c-it+𝔞)/2).
pub fn x_factor(q: u64, t: f64, parity: u8, a: C64, c: C64) -> Result<C64> {
    if a == C64::new(0.0, 0.0) && c == a {
        return Ok(C64::new(1.0, 0.0));
    }
    let p = 0.5 + parity as f64;
    let it = C64::new(0.0, t);
    let args = [(p - a - it) / 2.0, (p + a + it) / 2.0, (p - c + it) / 2.0, (p + c - it) / 2.0];
    if args.iter().any(|w| near_pole(*w)) {
        return Err(Error::Pole(format!("x_factor Γ argument at a pole (a={a}, c={c})")));
    }
    let log = -(a + c) * (q as f64 / PI).ln() + lgamma(args[0]) - lgamma(args[1]) + lgamma(args[2])
        - lgamma(args[3]);
    Ok(log.exp())
}

/// X_{α,β,γ,δ} = X_{α,γ} X_{β,δ}.
pub fn x_factor4(q: u64, t: f64, parity: u8, s: &ShiftTuple) -> Result<C64> {
    Ok(x_factor(q, t, parity, s.alpha, s.gamma)? * x_factor(q, t, parity, s.beta, s.delta)?)
}

/// Ṽ_{α,β,γ,δ}(x) = X_{-γ,-δ,-α,-β} V_{α,β,γ,δ}(x).
pub fn v_tilde(x: f64, q: u64, spec: &GammaKernelSpec) -> Result<LineValue> {
    let v = v_weight(x, spec)?;
    let xf = x_factor4(q, spec.t, spec.parity, &spec.shifts.reflect())?;
    Ok(LineValue { value: v.value * xf, err: v.err * xf.norm() })
}

/// Bulk V evaluator: trapezoid kernels on a right line and, for x < 1, a
/// left line plus the residue at 0.
#[derive(Debug, Clone)]
pub struct VKernel {
    right: LineKernel,
    left: LineKernel,
}

impl VKernel {
    pub fn new(spec: &GammaKernelSpec) -> Result<Self> {
        check_generic(spec)?;
        let phi = |s: C64| spec.phi(s);
        let build = |c: f64| {
            let mut cut = 6.0;
            let peak = (0..=40).map(|k| phi(C64::new(c, k as f64 * 0.25)).norm()).fold(0.0, f64::max);
            while cut < 40.0 {
                let edge = phi(C64::new(c, cut)).norm().max(phi(C64::new(c, -cut)).norm());
                if edge < 1e-18 * peak {
                    break;
                }
                cut += 1.0;
            }
            // trapezoid aliasing ~ exp(-2π d/h), d the distance to the nearest singularity
            let d = c.abs();
            LineKernel::new(phi, c, (0.16 * d).min(0.1), cut)
        };
        Ok(VKernel { right: build(1.0), left: build(left_abscissa(spec)) })
    }

    pub fn eval(&self, x: f64) -> C64 {
        if x >= 1.0 {
            self.right.eval(x)
        } else {
            self.left.eval(x) + 1.0
        }
    }

    pub fn eval_err(&self, x: f64) -> (C64, f64) {
        if x >= 1.0 {
            self.right.eval_err(x)
        } else {
            let (v, e) = self.left.eval_err(x);
            (v + 1.0, e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn shifts(scale: f64) -> ShiftTuple {
        ShiftTuple::new(c(scale, 0.0), c(0.0, -1.3 * scale), c(0.7 * scale, 0.0), c(0.0, 1.9 * scale)).unwrap()
    }

    #[test]
    fn kernel_shape() {
        for variant in [KernelVariant::Gaussian, KernelVariant::Thm13, KernelVariant::Thm14] {
            let spec = GammaKernelSpec::new(shifts(0.1), 3.0, 0, variant).unwrap();
            assert!((spec.g_kernel(c(0.0, 0.0)) - 1.0).norm() < 1e-15);
            for s in [c(0.3, 0.2), c(1.0, -2.0), c(-0.7, 1.1)] {
                let a = spec.g_kernel(s);
                let b = spec.g_kernel(-s);
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
            let scale = spec.g_kernel(c(1.0, 0.0)).norm().max(1.0);
            for z in &spec.zero_set {
                assert!(spec.g_kernel(*z).norm() <= 1e-10 * scale);
            }
        }
        let sh = shifts(0.1);
        let s13 = GammaKernelSpec::new(sh, 3.0, 0, KernelVariant::Thm13).unwrap();
        for z in [(sh.alpha + sh.gamma) / 2.0, (sh.beta + sh.delta) / 2.0, -(sh.alpha + sh.delta) / 2.0] {
            assert!(s13.zero_set.iter().any(|w| (w - z).norm() < 1e-15));
        }
        let s14 = GammaKernelSpec::new(sh, 3.0, 0, KernelVariant::Thm14).unwrap();
        assert!(s14.zero_set.len() > s13.zero_set.len());
        assert!(s14.zero_set.iter().any(|w| (w - (0.5 - sh.beta + c(0.0, 3.0))).norm() < 1e-15));
        let flat = ShiftTuple::unchecked(c(1e-8, 0.0), c(0.1, 0.0), c(-1e-8, 0.0), c(0.2, 0.0));
        assert!(matches!(
            GammaKernelSpec::new(flat, 0.0, 0, KernelVariant::Thm13),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn g_factor_basics() {
        let spec = GammaKernelSpec::new(shifts(0.1), 2.0, 1, KernelVariant::Thm13).unwrap();
        assert!((g_factor(c(0.0, 0.0), &spec).unwrap() - 1.0).norm() < 1e-15);
        let swapped = spec.with_shifts(spec.shifts.swap_ab()).unwrap();
        let swapped2 = spec.with_shifts(spec.shifts.swap_gd()).unwrap();
        for s in [c(0.5, 0.0), c(1.0, 3.0), c(2.0, -1.0)] {
            let a = g_factor(s, &spec).unwrap();
            assert!((a - g_factor(s, &swapped).unwrap()).norm() <= 1e-12 * a.norm());
            assert!((a - g_factor(s, &swapped2).unwrap()).norm() <= 1e-12 * a.norm());
        }
        // Γ((½ + s + 𝔞)/2) at s = -½ with 𝔞 = 0, zero shifts and t = 0
        let z = GammaKernelSpec::new(ShiftTuple::zero(), 0.0, 0, KernelVariant::Gaussian).unwrap();
        assert!(matches!(g_factor(c(-0.5, 0.0), &z), Err(Error::Pole(_))));
    }

    #[test]
    fn g_stirling_at_fifty() {
        let t = 50.0;
        let spec = GammaKernelSpec::new(shifts(0.01), t, 0, KernelVariant::Gaussian).unwrap();
        let s = c(0.5, 0.0);
        let g = g_factor(s, &spec).unwrap();
        let main = (2.0 * s * (t / (2.0 * PI)).ln()).exp();
        assert!((g / main - 1.0).norm() * t <= 10.0);
    }

    #[test]
    fn x_factor_examples() {
        assert_eq!(x_factor(7, 3.0, 1, c(0.0, 0.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let sh = shifts(0.01);
        let want = x_factor(7, 3.0, 1, sh.alpha, sh.gamma).unwrap() * x_factor(7, 3.0, 1, sh.beta, sh.delta).unwrap();
        assert!((x_factor4(7, 3.0, 1, &sh).unwrap() - want).norm() < 1e-14);
        let t = 100.0;
        for parity in [0, 1] {
            let xf = x_factor(13, t, parity, sh.alpha, sh.gamma).unwrap();
            let main = (-(sh.alpha + sh.gamma) * (t * 13.0 / (2.0 * PI)).ln()).exp();
            assert!((xf / main - 1.0).norm() * t <= 10.0);
        }
        // X_{a,c} X_{-a,-c} = 1 at t = 0
        let a = c(0.1, 0.05);
        let b = c(-0.02, 0.2);
        let p = x_factor(5, 0.0, 0, a, b).unwrap() * x_factor(5, 0.0, 0, -a, -b).unwrap();
        assert!((p - 1.0).norm() < 1e-13);
    }

    #[test]
    fn v_residue_for_small_x() {
        let g = GammaKernelSpec::new(shifts(0.01), 1.0, 0, KernelVariant::Gaussian).unwrap();
        // the next singularities sit near s = -1/2, so V - 1 = O(x^{1/2} log x)
        for &x in &[1e-10f64, 1e-16, 1e-20, 1e-30] {
            let d = (v_weight(x, &g).unwrap().value - 1.0).norm();
            assert!(d <= 10.0 * x.sqrt() * x.ln().abs(), "x={x} d={d}");
        }
    }

    #[test]
    fn v_decays() {
        let t = 5.0;
        let spec = GammaKernelSpec::new(shifts(0.01), t, 0, KernelVariant::Gaussian).unwrap();
        let v = v_weight(1e6 * (t * t + 1.0), &spec).unwrap();
        assert!(v.value.norm() <= 1e-6);
    }

    #[test]
    fn v_contour_independent() {
        let spec = GammaKernelSpec::new(shifts(0.1), 2.0, 1, KernelVariant::Thm13).unwrap();
        for &x in &[0.3, 1.0, 5.0, 40.0] {
            let a = v_weight_on(x, &spec, 1.0).unwrap();
            let b = v_weight_on(x, &spec, 2.0).unwrap();
            let scale = a.value.norm().max(1.0);
            assert!((a.value - b.value).norm() <= a.err + b.err + 1e-11 * scale, "x={x}");
        }
        // left and right routes agree at the switch
        let lv = v_weight(0.999, &spec).unwrap();
        let rv = v_weight_on(0.999, &spec, 1.0).unwrap();
        assert!((lv.value - rv.value).norm() < 1e-12 * rv.value.norm().max(1.0));
    }

    #[test]
    fn v_parity_gap_at_fifty() {
        let t: f64 = 50.0;
        let s0 = GammaKernelSpec::new(shifts(0.01), t, 0, KernelVariant::Gaussian).unwrap();
        let s1 = s0.with_parity(1).unwrap();
        for &x in &[1.0, 10.0, 100.0, 1000.0, t * t] {
            let gap = (v_weight(x, &s0).unwrap().value - v_weight(x, &s1).unwrap().value).norm();
            assert!(gap <= 10.0 / t, "x={x} gap={gap}");
            let gt = (v_tilde(x, 7, &s0).unwrap().value - v_tilde(x, 7, &s1).unwrap().value).norm();
            assert!(gt <= 20.0 / t, "x={x} gap={gt}");
        }
    }

    #[test]
    fn v_tilde_index_pattern() {
        let spec = GammaKernelSpec::new(shifts(0.02), 1.5, 1, KernelVariant::Gaussian).unwrap();
        let sh = spec.shifts;
        let x = 0.7;
        let want = x_factor(11, 1.5, 1, -sh.gamma, -sh.alpha).unwrap()
            * x_factor(11, 1.5, 1, -sh.delta, -sh.beta).unwrap()
            * v_weight(x, &spec).unwrap().value;
        assert!((v_tilde(x, 11, &spec).unwrap().value - want).norm() < 1e-12);
    }

    #[test]
    fn bulk_kernel_matches_quadrature() {
        for (variant, parity, t) in [(KernelVariant::Gaussian, 0, 0.0), (KernelVariant::Thm13, 1, 5.0)] {
            let spec = GammaKernelSpec::new(shifts(0.1), t, parity, variant).unwrap();
            let k = VKernel::new(&spec).unwrap();
            for &x in &[1e-4, 0.02, 0.5, 0.999, 1.0, 3.0, 200.0, 1e4] {
                let a = v_weight(x, &spec).unwrap();
                let (b, e) = k.eval_err(x);
                let scale = a.value.norm().max(1.0);
                assert!((a.value - b).norm() <= 1e-11 * scale, "x={x} {} {}", a.value, b);
                // gap to the step-doubled rule, a loose upper bound
                assert!(e <= 1e-6 * scale);
            }
        }
    }

    #[test]
    fn ab_swap_symmetry() {
        let spec = GammaKernelSpec::new(shifts(0.1), 1.0, 0, KernelVariant::Thm13).unwrap();
        let sw = spec.with_shifts(spec.shifts.swap_ab()).unwrap();
        for &x in &[0.1, 2.0] {
            let a = v_weight(x, &spec).unwrap().value;
            let b = v_weight(x, &sw).unwrap().value;
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }
}
