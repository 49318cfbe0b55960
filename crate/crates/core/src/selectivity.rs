//! Optimal spinor selectivity: the group of spinor genera, membership of a CM
//! field in the spinor genus field of an Eichler genus, the genus character
//! of `Q(√p)`, and the symbol `Δ(B, O)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd_u64, is_squarefree, kronecker, require_prime};
use crate::cm::{qsqrtp_b_tables, PrimeId, O_K1};
use crate::error::{Error, Result};

/// A genus of orders: the ramification of `D` and the local shape of `O`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenusDescriptor {
    /// Number of real places of `F`.
    pub real_places: u32,
    /// Indices of the real places where `D` ramifies.
    pub ramified_infinite: BTreeSet<u32>,
    /// `Ram_f(D)`.
    pub ramified_finite: BTreeSet<PrimeId>,
    /// `ν_𝔭(𝔫)`.
    pub level_valuations: BTreeMap<PrimeId, u32>,
    pub eichler_invariants: BTreeMap<PrimeId, i8>,
}

impl GenusDescriptor {
    /// Maximal orders of `D_{∞1,∞2}` over `Q(√p)`.
    pub fn maximal_qsqrtp() -> Self {
        Self {
            real_places: 2,
            ramified_infinite: [0, 1].into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.ramified_infinite.iter().find(|&&v| v >= self.real_places) {
            return Err(Error::InvalidArgument(format!("real place {v} does not exist")));
        }
        if !(self.ramified_infinite.len() + self.ramified_finite.len()).is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "the set of ramified places of D must have even cardinality".into(),
            ));
        }
        if let Some(p) = self
            .level_valuations
            .iter()
            .find(|(p, &v)| v > 0 && self.ramified_finite.contains(*p))
            .map(|(p, _)| p)
        {
            return Err(Error::InvalidArgument(format!(
                "level and discriminant of D share the prime {p}"
            )));
        }
        Ok(())
    }
}

/// A quadratic extension `K/F` with its ramification and Artin symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CmExtension {
    pub ramified_infinite: BTreeSet<u32>,
    pub ramified_finite: BTreeSet<PrimeId>,
    pub artin: BTreeMap<PrimeId, i8>,
}

impl CmExtension {
    /// `K = F(√-m)` over `F = Q(√p)` for squarefree `m ≥ 1`.
    ///
    /// A prime `𝔭 | ℓ` of `F` ramifies in `K` exactly when the ramification
    /// index of `ℓ` in the biquadratic field `Q(√p, √-m)` is twice that in
    /// `F`. For `ℓ` odd that index is 2 when `ℓ` ramifies in any quadratic
    /// subfield; for `ℓ = 2` it is 4 when 2 ramifies in all three.
    pub fn over_qsqrtp(p: u64, m: u64) -> Result<Self> {
        require_prime(p)?;
        if m == 0 || !is_squarefree(m) {
            return Err(Error::NotSquarefree(-(m as i64)));
        }
        // F(√-m) = F(√-m/p) when p | m
        let m = if m.is_multiple_of(p) { m / p } else { m };
        let mp = (m * p) / gcd_u64(m, p).pow(2);
        let discs = [
            crate::quad::real_discriminant(p) as i64,
            field_discriminant(-(m as i64)),
            field_discriminant(-(mp as i64)),
        ];
        let mut candidates: BTreeSet<u64> = [2, p].into();
        candidates.extend(factorize(m)?.primes());
        let mut ramified_finite = BTreeSet::new();
        let mut artin = BTreeMap::new();
        for ell in candidates {
            let divides = |d: i64| d.unsigned_abs().is_multiple_of(ell);
            let count = discs.iter().filter(|&&d| divides(d)).count();
            let e_l = match (ell, count) {
                (_, 0) => 1,
                (2, 3) => 4,
                _ => 2,
            };
            let e_f = if divides(discs[0]) { 2 } else { 1 };
            if e_l == 2 * e_f {
                for id in primes_above(p, ell) {
                    ramified_finite.insert(id.clone());
                    artin.insert(id, 0);
                }
            }
        }
        Ok(Self {
            ramified_infinite: [0, 1].into(),
            ramified_finite,
            artin,
        })
    }
}

fn field_discriminant(d: i64) -> i64 {
    if d.rem_euclid(4) == 1 {
        d
    } else {
        4 * d
    }
}

/// Prime ids of `Q(√p)` above the rational prime `ℓ`.
pub fn primes_above(p: u64, ell: u64) -> Vec<PrimeId> {
    let disc = crate::quad::real_discriminant(p) as i64;
    if disc % ell as i64 == 0 {
        let id = if ell == 2 { PrimeId::dyadic() } else { PrimeId::sqrt_p() };
        return vec![id];
    }
    match kronecker(disc, ell as i64) {
        1 => vec![PrimeId::new(format!("{ell}.1")), PrimeId::new(format!("{ell}.2"))],
        _ => vec![PrimeId::new(ell.to_string())],
    }
}

/// `|𝔊_sg|` for maximal orders of `D_{∞1,∞2}` over `Q(√p)`.
pub fn spinor_genus_group_order_qsqrtp(p: u64) -> Result<u32> {
    require_prime(p)?;
    Ok(if p % 4 == 3 { 2 } else { 1 })
}

/// Whether `K ⊆ Σ_𝒢` for an Eichler genus: (a) `K` and `D` are unramified at
/// every finite prime and ramify at the same real places, and (b) every prime
/// of odd level valuation splits in `K`.
pub fn k_in_sigma_eichler(genus: &GenusDescriptor, k: &CmExtension) -> Result<bool> {
    if let Some((p, _)) = genus.eichler_invariants.iter().find(|(_, &e)| e == 0) {
        return Err(Error::ZeroEichlerInvariant(p.to_string()));
    }
    let condition_a = genus.ramified_finite.is_empty()
        && k.ramified_finite.is_empty()
        && genus.ramified_infinite == k.ramified_infinite;
    if !condition_a {
        return Ok(false);
    }
    for (p, v) in &genus.level_valuations {
        if v % 2 == 1 {
            match k.artin.get(p) {
                Some(1) => {}
                Some(_) => return Ok(false),
                None => {
                    return Err(Error::UnknownPrime {
                        label: "K".into(),
                        prime: p.to_string(),
                    })
                }
            }
        }
    }
    Ok(true)
}

/// `χ(𝔞) = (-p | Nm 𝔞)` on ideals of norm prime to `p`, for `p ≡ 3 (mod 4)`.
pub fn genus_character_qsqrtp(p: u64, ideal_norm: u64) -> Result<i32> {
    require_prime(p)?;
    if p % 4 != 3 {
        return Err(Error::RegimeMismatch(format!(
            "the genus character is defined for p ≡ 3 mod 4, got {p}"
        )));
    }
    if ideal_norm == 0 {
        return Err(Error::ZeroArgument);
    }
    if ideal_norm.is_multiple_of(p) {
        return Err(Error::InvalidArgument(format!("norm {ideal_norm} is not prime to {p}")));
    }
    Ok(kronecker(-(p as i64), ideal_norm as i64))
}

/// `χ` on a prime of `Q(√p)`, `p ≡ 3 (mod 4)`. The prime `√p O_F` has only
/// generators of negative norm, so its narrow class is that of an ideal with
/// a generator of negative norm prime to `p`, where `χ = -1`.
pub fn genus_character_of_prime(p: u64, prime: &PrimeId) -> Result<i32> {
    let bad = || Error::InvalidArgument(format!("{prime} is not a prime id of Q(√{p})"));
    match prime.as_str() {
        PrimeId::SQRT_P => {
            genus_character_qsqrtp(p, 1)?;
            Ok(-1)
        }
        PrimeId::DYADIC => genus_character_qsqrtp(p, 2),
        id => {
            let (ell, split) = match id.split_once('.') {
                Some((ell, "1" | "2")) => (ell, true),
                Some(_) => return Err(bad()),
                None => (id, false),
            };
            let ell: u64 = ell.parse().map_err(|_| bad())?;
            if !primes_above(p, ell).contains(prime) {
                return Err(bad());
            }
            let norm = if split { ell } else { ell * ell };
            genus_character_qsqrtp(p, norm)
        }
    }
}

/// `Δ` after a shift by an ideal class with character value `chi`.
pub fn delta_shift(delta_base: u8, chi: i32) -> u8 {
    if chi == 1 {
        delta_base
    } else {
        1 - delta_base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinorGenusTag {
    Principal,
    Nonprincipal,
}

impl SpinorGenusTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SpinorGenusTag::Principal => "principal",
            SpinorGenusTag::Nonprincipal => "nonprincipal",
        }
    }
}

impl fmt::Display for SpinorGenusTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpinorGenusTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "principal" => Ok(SpinorGenusTag::Principal),
            "nonprincipal" => Ok(SpinorGenusTag::Nonprincipal),
            _ => Err(Error::InvalidArgument(format!(
                "unknown spinor genus {s:?}; expected principal or nonprincipal"
            ))),
        }
    }
}

/// `Δ(B, O)` for a CM order `B` of the `Q(√p)` tables and a maximal order `O`
/// in the given spinor genus.
///
/// Non-selective orders have `Δ = 1`. A selective `B` lies in `K₁ = Σ`;
/// starting from `Δ(O_{K₁}, O) = 1` for the principal genus, `Δ` is shifted by
/// `χ(𝔣(B))` and, for the nonprincipal genus, by the nontrivial class.
pub fn delta_qsqrtp(p: u64, label: &str, tag: SpinorGenusTag) -> Result<u8> {
    let table = qsqrtp_b_tables(p)?;
    let row = table
        .row(label)
        .ok_or_else(|| Error::RegimeMismatch(format!("{label} is not in the table for p = {p} ({})", table.regime)))?;
    if tag == SpinorGenusTag::Nonprincipal && !table.regime.has_two_spinor_genera() {
        return Err(Error::RegimeMismatch(format!(
            "p = {p} has a single spinor genus of maximal orders"
        )));
    }
    let genus = GenusDescriptor::maximal_qsqrtp();
    let ext = match row.cm_radicand {
        Some(m) => CmExtension::over_qsqrtp(p, m)?,
        None => return Ok(1),
    };
    if !k_in_sigma_eichler(&genus, &ext)? {
        return Ok(1);
    }
    if table.row(O_K1).and_then(|r| r.cm_radicand) != row.cm_radicand {
        return Err(Error::Inconsistent(format!(
            "{label} is selective but does not lie in K₁"
        )));
    }
    let mut chi = 1;
    for (prime, &v) in &row.conductor_valuations {
        chi *= genus_character_of_prime(p, prime)?.pow(v);
    }
    if tag == SpinorGenusTag::Nonprincipal {
        chi = -chi;
    }
    Ok(delta_shift(1, chi))
}
