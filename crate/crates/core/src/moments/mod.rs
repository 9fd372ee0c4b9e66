//! Fourth moments over primitive characters and their main terms.

mod empirical;
mod limit;
mod mainterm;
mod report;
mod weight;

pub use empirical::{
    check_modulus, empirical_moment, empirical_moment_integral, mean_abs_fourth, moment_with_cache, moment_with_group,
};
pub use limit::{
    bracket, extract_cj, local_prefactor, seeded_direction, zero_shift_main_term, zero_shift_with, CjFit, MomentTarget,
    ZeroShiftOptions, ZeroShiftValue, DIRECTION_A, DIRECTION_B,
};
pub use mainterm::{
    main_term_stirling, main_term_thm13, main_term_thm14, main_term_thm14_with, thm13_parts, z_q, z_with, MainTerm,
    Thm13Parts, ZetaKind,
};
pub use report::{moment_report, moment_report_with, MomentReport};
pub use weight::{smooth_step, WeightProfile, WeightSpec};

use crate::C64;

/// Neumaier summation for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: C64,
    comp: C64,
}

fn two_sum(s: f64, x: f64) -> (f64, f64) {
    let t = s + x;
    let c = if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
    (t, c)
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: C64) {
        let (re, cr) = two_sum(self.sum.re, x.re);
        let (im, ci) = two_sum(self.sum.im, x.im);
        self.sum = C64::new(re, im);
        self.comp += C64::new(cr, ci);
    }

    pub fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive() {
        let mut acc = CompensatedSum::new();
        let mut naive = C64::new(0.0, 0.0);
        for x in [1e16, 1.0, -1e16, 1.0] {
            acc.add(C64::new(x, -x));
            naive += C64::new(x, -x);
        }
        assert_eq!(acc.value(), C64::new(2.0, -2.0));
        assert_ne!(naive, acc.value());
    }
}
