use super::weight::WeightSpec;
use crate::arith::{phi_star, ShiftTuple};
use crate::characters::{character_group, CharacterGroup};
use crate::error::{precondition, Result};
use crate::lfunc::{HurwitzTable, LValueCache};
use crate::C64;
use rayon::prelude::*;

/// Moments need q ≥ 3 with at least one primitive character.
pub fn check_modulus(q: u64) -> Result<()> {
    if q < 3 {
        return precondition(format!("q = {q}: moments need q >= 3"));
    }
    if q % 4 == 2 {
        return precondition(format!("q = {q} ≡ 2 (mod 4) has no primitive characters"));
    }
    if phi_star(q) == 0 {
        return precondition(format!("q = {q} has no primitive characters"));
    }
    Ok(())
}

/// Average over primitive χ of L(½+it+α,χ)L(½+it+β,χ)L(½-it+γ,χ̄)L(½-it+δ,χ̄)
/// with a propagated error estimate.
pub fn moment_with_group(group: &CharacterGroup, t: f64, shifts: &ShiftTuple) -> Result<(C64, f64)> {
    let q = group.q;
    check_modulus(q)?;
    let up = C64::new(0.5, t);
    let down = C64::new(0.5, -t);
    let args = [up + shifts.alpha, up + shifts.beta, down + shifts.gamma, down + shifts.delta];
    let mut tables: Vec<HurwitzTable> = Vec::with_capacity(4);
    let mut slot = [0usize; 4];
    for (i, s) in args.iter().enumerate() {
        match tables.iter().position(|tb| tb.s == *s) {
            Some(j) => slot[i] = j,
            None => {
                slot[i] = tables.len();
                tables.push(HurwitzTable::new(q, *s)?);
            }
        }
    }
    let rows: Vec<Result<(C64, f64)>> = group
        .primitive_indices
        .par_iter()
        .map(|&i| {
            let chi = &group.characters[i];
            let cb = chi.conj();
            let mut prod = C64::new(1.0, 0.0);
            let mut rel = 0.0;
            for k in 0..4 {
                let (v, e) = tables[slot[k]].l_value(if k < 2 { chi } else { &cb })?;
                prod *= v;
                rel += e / v.norm().max(1e-300);
            }
            Ok((prod, rel * prod.norm()))
        })
        .collect();
    // ordered reduction
    let mut acc = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for r in rows {
        let (v, e) = r?;
        acc += v;
        err += e;
    }
    let n = group.primitive_indices.len() as f64;
    Ok((acc / n, err / n))
}

/// [`moment_with_group`] reading and filling an L-value cache. Values at
/// χ̄ come from L(s, χ̄) = conj L(s̄, χ), so every record is keyed by χ itself.
pub fn moment_with_cache(
    group: &CharacterGroup,
    t: f64,
    shifts: &ShiftTuple,
    cache: &LValueCache,
) -> Result<(C64, f64)> {
    let q = group.q;
    check_modulus(q)?;
    let up = C64::new(0.5, t);
    let args = [up + shifts.alpha, up + shifts.beta, up + shifts.gamma.conj(), up + shifts.delta.conj()];
    for (k, s) in args.iter().enumerate() {
        if !args[..k].contains(s) {
            cache.fill(group, &group.primitive_indices, *s)?;
        }
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for &i in &group.primitive_indices {
        let mut prod = C64::new(1.0, 0.0);
        let mut rel = 0.0;
        for (k, s) in args.iter().enumerate() {
            let r = cache.get(q, i, *s).expect("filled above");
            let v = if k < 2 { r.value } else { r.value.conj() };
            prod *= v;
            rel += r.err_estimate / v.norm().max(1e-300);
        }
        acc += prod;
        err += rel * prod.norm();
    }
    let n = group.primitive_indices.len() as f64;
    Ok((acc / n, err / n))
}

pub fn empirical_moment(q: u64, t: f64, shifts: &ShiftTuple) -> Result<C64> {
    check_modulus(q)?;
    let group = character_group(q)?;
    Ok(moment_with_group(&group, t, shifts)?.0)
}

/// (1/φ*(q)) Σ* |L(½+it, χ)|⁴ straight from cached L-values.
pub fn mean_abs_fourth(group: &CharacterGroup, t: f64, cache: &LValueCache) -> Result<f64> {
    check_modulus(group.q)?;
    let s = C64::new(0.5, t);
    let mut acc = 0.0;
    for chi in group.primitive() {
        acc += cache.get_or_compute(s, chi)?.value.norm().powi(4);
    }
    Ok(acc / group.primitive_indices.len() as f64)
}

/// ∫ M(α,β,γ,δ,t) Φ(t) dt with the panel-refinement error estimate added
/// to the propagated L-value error.
pub fn empirical_moment_integral(q: u64, weight: &WeightSpec, shifts: &ShiftTuple) -> Result<(C64, f64)> {
    check_modulus(q)?;
    let group = character_group(q)?;
    let eval = |nodes: Vec<(f64, f64)>| -> Result<(C64, f64)> {
        let vals: Vec<Result<(C64, f64)>> = nodes
            .par_iter()
            .map(|&(t, w)| moment_with_group(&group, t, shifts).map(|(v, e)| (v * w, e * w.abs())))
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        let mut err = 0.0;
        for v in vals {
            let (a, b) = v?;
            acc += a;
            err += b;
        }
        Ok((acc, err))
    };
    let (fine, e1) = eval(weight.nodes(false))?;
    let (coarse, _) = eval(weight.nodes(true))?;
    Ok((fine, e1 + (fine - coarse).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::l_value;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn q3_single_character() {
        let m = empirical_moment(3, 0.0, &ShiftTuple::zero()).unwrap();
        let g = character_group(3).unwrap();
        let chi = g.primitive().next().unwrap();
        let l = l_value(c(0.5, 0.0), chi).unwrap();
        assert!((m - l.norm().powi(4)).norm() < 1e-13);
        assert!(m.im.abs() < 1e-14 && m.re > 0.0);
    }

    #[test]
    fn no_primitive_characters() {
        let err = empirical_moment(6, 0.0, &ShiftTuple::zero()).unwrap_err();
        assert!(err.to_string().contains("2 (mod 4)"));
        assert!(empirical_moment(2, 0.0, &ShiftTuple::zero()).is_err());
    }

    #[test]
    fn relabelling_symmetries() {
        let sh = ShiftTuple::new(c(0.05, 0.01), c(-0.02, 0.03), c(0.04, -0.02), c(0.01, 0.06)).unwrap();
        let swapped = ShiftTuple::unchecked(sh.gamma, sh.delta, sh.alpha, sh.beta);
        let conj_swapped = ShiftTuple::unchecked(sh.gamma.conj(), sh.delta.conj(), sh.alpha.conj(), sh.beta.conj());
        for q in [5u64, 7, 9, 12, 13, 20] {
            let a = empirical_moment(q, 1.7, &sh).unwrap();
            // χ ↔ χ̄
            let b = empirical_moment(q, -1.7, &swapped).unwrap();
            // complex conjugation of every factor
            let c2 = empirical_moment(q, 1.7, &conj_swapped).unwrap().conj();
            assert!((a - b).norm() < 1e-11 * a.norm().max(1.0), "q={q}");
            assert!((a - c2).norm() < 1e-11 * a.norm().max(1.0), "q={q}");
        }
    }

    #[test]
    fn separate_path_at_zero_shift() {
        let g = character_group(13).unwrap();
        let cache = LValueCache::new();
        for t in [0.0, 2.5] {
            let (m, _) = moment_with_group(&g, t, &ShiftTuple::zero()).unwrap();
            let d = mean_abs_fourth(&g, t, &cache).unwrap();
            assert!((m.re - d).abs() <= 1e-10 * d && m.im.abs() < 1e-10 * d);
        }
    }

    #[test]
    fn integral_behaviour() {
        let z = ShiftTuple::zero();
        let (v, _) = empirical_moment_integral(5, &WeightSpec::zero(3.0), &z).unwrap();
        assert_eq!(v, c(0.0, 0.0));
        let (a, ea) = empirical_moment_integral(5, &WeightSpec::sharp(2.0).unwrap(), &z).unwrap();
        let (b, _) = empirical_moment_integral(5, &WeightSpec::sharp(4.0).unwrap(), &z).unwrap();
        assert!(b.re > a.re);
        // trapezoid oracle on a grid 10x finer than 64 nodes per unit
        let g = character_group(5).unwrap();
        let n = 1280;
        let h = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * moment_with_group(&g, i as f64 * h, &z).unwrap().0.re;
        }
        acc *= h;
        // trapezoid error ~ h²/12 · |f'(2) - f'(0)|
        assert!((a.re - acc).abs() <= ea + 1e-5 * acc, "{} {}", a.re, acc);
    }
}
