use crate::characters::{gauss_sum, CharacterGroup, DirichletCharacter};
use crate::error::{precondition, Error, Result};
use crate::specfun::{hurwitz_zeta_err, hurwitz_zeta_regular, zeta};
use crate::C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LValueMethod {
    Hurwitz,
    Afe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LValueRecord {
    pub q: u64,
    pub index: usize,
    pub s: C64,
    pub value: C64,
    pub method: LValueMethod,
    pub err_estimate: f64,
}

/// Hurwitz values ζ(s, a/q), a = 1..q-1, shared by every character mod q.
/// Near s = 1 the pole part is removed, which is exact for non-principal
/// characters since Σ χ(a) = 0.
#[derive(Debug, Clone)]
pub struct HurwitzTable {
    pub q: u64,
    pub s: C64,
    pub regular: bool,
    vals: Vec<C64>,
    errs: Vec<f64>,
    q_pow: C64,
}

const REGULAR_RADIUS: f64 = 0.05;

impl HurwitzTable {
    pub fn new(q: u64, s: C64) -> Result<Self> {
        if q == 0 {
            return precondition("modulus must be positive");
        }
        let regular = (s - 1.0).norm() < REGULAR_RADIUS;
        let top = if q == 1 { 1 } else { q - 1 };
        let rows: Vec<Result<(C64, f64)>> = (1..=top)
            .into_par_iter()
            .map(|a| {
                let x = a as f64 / q as f64;
                if regular {
                    hurwitz_zeta_regular(s, x).map(|v| (v, 1e-16 * v.norm()))
                } else {
                    hurwitz_zeta_err(s, x)
                }
            })
            .collect();
        let mut vals = Vec::with_capacity(rows.len());
        let mut errs = Vec::with_capacity(rows.len());
        for r in rows {
            let (v, e) = r?;
            vals.push(v);
            errs.push(e);
        }
        let q_pow = (-s * (q as f64).ln()).exp();
        Ok(HurwitzTable { q, s, regular, vals, errs, q_pow })
    }

    /// L(s, χ) and an error estimate.
    pub fn l_value(&self, chi: &DirichletCharacter) -> Result<(C64, f64)> {
        if chi.q != self.q {
            return precondition("character modulus does not match table");
        }
        let q = self.q;
        if q == 1 {
            if self.regular {
                return zeta(self.s).map(|v| (v, 1e-15 * v.norm()));
            }
            return Ok((self.vals[0], self.errs[0]));
        }
        if self.regular && chi.is_principal() {
            if self.s == C64::new(1.0, 0.0) {
                return Err(Error::Pole("L(s, principal) at s = 1".into()));
            }
            // fall back to the plain expansion for the principal character
            return HurwitzTable::new_plain(q, self.s)?.l_value(chi);
        }
        let mut acc = C64::new(0.0, 0.0);
        let mut mag = 0.0;
        let mut err = 0.0;
        for a in 1..q as usize {
            let c = chi.values[a];
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let t = c * self.vals[a - 1];
            acc += t;
            mag += t.norm();
            err += self.errs[a - 1];
        }
        let scale = self.q_pow.norm();
        let v = acc * self.q_pow;
        Ok((v, (err + 4e-16 * mag) * scale))
    }

    fn new_plain(q: u64, s: C64) -> Result<Self> {
        let top = q - 1;
        let mut vals = Vec::with_capacity(top as usize);
        let mut errs = Vec::with_capacity(top as usize);
        for a in 1..=top {
            let (v, e) = hurwitz_zeta_err(s, a as f64 / q as f64)?;
            vals.push(v);
            errs.push(e);
        }
        Ok(HurwitzTable { q, s, regular: false, vals, errs, q_pow: (-s * (q as f64).ln()).exp() })
    }
}

/// L(s, χ) = q^{-s} Σ_{a=1}^{q} χ(a) ζ(s, a/q).
pub fn l_value(s: C64, chi: &DirichletCharacter) -> Result<C64> {
    l_value_err(s, chi).map(|v| v.0)
}

pub fn l_value_err(s: C64, chi: &DirichletCharacter) -> Result<(C64, f64)> {
    if chi.q == 1 {
        let (v, e) = hurwitz_zeta_err(s, 1.0)?;
        return Ok((v, e));
    }
    HurwitzTable::new(chi.q, s)?.l_value(chi)
}

/// Λ(s, χ) = (q/π)^{s/2} Γ((s+𝔞)/2) L(s, χ) for primitive χ.
pub fn completed_lambda(s: C64, chi: &DirichletCharacter) -> Result<C64> {
    if !chi.is_primitive() {
        return precondition("completed L-function needs a primitive character");
    }
    let q = chi.q as f64;
    let w = (s + chi.parity as f64) / 2.0;
    let lg = crate::specfun::log_gamma(w)?;
    Ok((s / 2.0 * (q / PI).ln() + lg).exp() * l_value(s, chi)?)
}

/// |Λ(s, χ) - i^{-𝔞} q^{-1/2} τ(χ) Λ(1-s, χ̄)|.
pub fn fe_residual(s: C64, chi: &DirichletCharacter) -> Result<f64> {
    let lhs = completed_lambda(s, chi)?;
    let rhs = root_number(chi)? * completed_lambda(C64::new(1.0, 0.0) - s, &chi.conj())?;
    Ok((lhs - rhs).norm())
}

/// i^{-𝔞} q^{-1/2} τ(χ).
pub fn root_number(chi: &DirichletCharacter) -> Result<C64> {
    if !chi.is_primitive() {
        return precondition("root number needs a primitive character");
    }
    let i_pow = if chi.parity == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, -1.0) };
    Ok(i_pow * gauss_sum(chi) / (chi.q as f64).sqrt())
}

type CacheKey = (u64, usize, i64, i64);

fn key(q: u64, index: usize, s: C64) -> CacheKey {
    (q, index, (s.re * 1e12).round() as i64, (s.im * 1e12).round() as i64)
}

/// Concurrent L-value cache keyed by (q, index, s rounded to 1e-12).
#[derive(Debug, Default)]
pub struct LValueCache {
    map: RwLock<HashMap<CacheKey, LValueRecord>>,
}

impl LValueCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, q: u64, index: usize, s: C64) -> Option<LValueRecord> {
        self.map.read().unwrap().get(&key(q, index, s)).copied()
    }

    pub fn insert(&self, rec: LValueRecord) {
        self.map.write().unwrap().insert(key(rec.q, rec.index, rec.s), rec);
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records in a fixed order.
    pub fn records(&self) -> Vec<LValueRecord> {
        let map = self.map.read().unwrap();
        let mut keys: Vec<&CacheKey> = map.keys().collect();
        keys.sort();
        keys.into_iter().map(|k| map[k]).collect()
    }

    /// Compute L(s, χ) for the listed characters of `group` not yet cached,
    /// sharing one Hurwitz table.
    pub fn fill(&self, group: &CharacterGroup, indices: &[usize], s: C64) -> Result<()> {
        let q = group.q;
        let missing: Vec<usize> = indices.iter().copied().filter(|&i| self.get(q, i, s).is_none()).collect();
        if missing.is_empty() {
            return Ok(());
        }
        let table = HurwitzTable::new(q, s)?;
        let recs: Vec<Result<LValueRecord>> = missing
            .par_iter()
            .map(|&i| {
                let (value, err_estimate) = table.l_value(&group.characters[i])?;
                Ok(LValueRecord { q, index: i, s, value, method: LValueMethod::Hurwitz, err_estimate })
            })
            .collect();
        for r in recs {
            self.insert(r?);
        }
        Ok(())
    }

    pub fn get_or_compute(&self, s: C64, chi: &DirichletCharacter) -> Result<LValueRecord> {
        if let Some(r) = self.get(chi.q, chi.index, s) {
            return Ok(r);
        }
        let (value, err_estimate) = l_value_err(s, chi)?;
        let rec = LValueRecord {
            q: chi.q,
            index: chi.index,
            s,
            value,
            method: LValueMethod::Hurwitz,
            err_estimate,
        };
        self.insert(rec);
        Ok(rec)
    }
}
