use super::empirical::{check_modulus, empirical_moment_integral, moment_with_cache, moment_with_group};
use super::limit::{zero_shift_with, MomentTarget, ZeroShiftOptions};
use super::mainterm::{main_term_thm13, main_term_thm14};
use crate::arith::{is_prime, ShiftTuple};
use crate::characters::{character_group, CharacterGroup};
use crate::lfunc::LValueCache;
use crate::error::{precondition, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Empirical moment against its main term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub q: u64,
    #[serde(rename = "t_or_range")]
    pub target: MomentTarget,
    /// `None` means the zero-shift limit.
    pub shifts: Option<ShiftTuple>,
    pub empirical: C64,
    pub empirical_err: f64,
    pub main_term: C64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub n_characters: u64,
    /// Seconds. Excluded from determinism checks.
    pub wall_time: f64,
    pub component_breakdown: [C64; 6],
}

/// Pointwise targets need q an odd prime; weighted ones only q ≢ 2 (mod 4).
pub fn moment_report(q: u64, target: &MomentTarget, shifts: Option<&ShiftTuple>) -> Result<MomentReport> {
    check_modulus(q)?;
    let group = character_group(q)?;
    moment_report_with(&group, target, shifts, None)
}

/// [`moment_report`] on a prebuilt group; pointwise targets read and fill
/// `cache` when given.
pub fn moment_report_with(
    group: &CharacterGroup,
    target: &MomentTarget,
    shifts: Option<&ShiftTuple>,
    cache: Option<&LValueCache>,
) -> Result<MomentReport> {
    let q = group.q;
    check_modulus(q)?;
    let start = Instant::now();
    let zero = ShiftTuple::zero();
    let sh = shifts.unwrap_or(&zero);
    let (empirical, empirical_err, main) = match target {
        MomentTarget::Pointwise { t } => {
            if !is_prime(q) || q == 2 {
                return precondition(format!("pointwise main term needs an odd prime modulus, got {q}"));
            }
            let (e, err) = match cache {
                Some(c) => moment_with_cache(group, *t, sh, c)?,
                None => moment_with_group(group, *t, sh)?,
            };
            let m = match shifts {
                Some(s) => main_term_thm14(q, *t, s, true)?,
                None => main_of(q, target)?,
            };
            (e, err, m)
        }
        MomentTarget::Weighted(w) => {
            let (e, err) = empirical_moment_integral(q, w, sh)?;
            let m = match shifts {
                Some(s) => main_term_thm13(q, w, s)?,
                None => main_of(q, target)?,
            };
            (e, err, m)
        }
    };
    let abs_err = (empirical - main.total).norm();
    Ok(MomentReport {
        q,
        target: *target,
        shifts: shifts.copied(),
        empirical,
        empirical_err,
        main_term: main.total,
        abs_err,
        rel_err: abs_err / main.total.norm(),
        n_characters: group.primitive_indices.len() as u64,
        wall_time: start.elapsed().as_secs_f64(),
        component_breakdown: main.components,
    })
}

fn main_of(q: u64, target: &MomentTarget) -> Result<super::mainterm::MainTerm> {
    let z = zero_shift_with(q, target, &ZeroShiftOptions::default())?;
    Ok(super::mainterm::MainTerm { total: z.value, components: z.components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::phi_star;

    #[test]
    fn small_prime_report() {
        let r = moment_report(13, &MomentTarget::Pointwise { t: 0.0 }, None).unwrap();
        assert_eq!(r.n_characters, phi_star(13));
        assert!((r.abs_err - (r.empirical - r.main_term).norm()).abs() < 1e-15 * r.abs_err.max(1.0));
        let sum: C64 = r.component_breakdown.iter().sum();
        assert!((sum - r.main_term).norm() <= 1e-12 * r.component_breakdown.iter().map(|z| z.norm()).sum::<f64>());
    }

    #[test]
    fn cached_report_matches() {
        let group = character_group(11).unwrap();
        let sh = ShiftTuple::from_array(crate::moments::DIRECTION_A.map(|z| z * 0.05));
        let target = MomentTarget::Pointwise { t: 1.5 };
        let plain = moment_report_with(&group, &target, Some(&sh), None).unwrap();
        let cache = LValueCache::new();
        let cold = moment_report_with(&group, &target, Some(&sh), Some(&cache)).unwrap();
        assert_eq!(cache.len(), 4 * group.primitive_indices.len());
        let warm = moment_report_with(&group, &target, Some(&sh), Some(&cache)).unwrap();
        assert_eq!(cold.empirical, warm.empirical);
        assert!((plain.empirical - cold.empirical).norm() <= 1e-12 * plain.empirical.norm());
    }

    #[test]
    fn pointwise_needs_prime() {
        assert!(moment_report(9, &MomentTarget::Pointwise { t: 0.0 }, None).is_err());
        assert!(moment_report(6, &MomentTarget::Pointwise { t: 0.0 }, None).is_err());
    }
}
