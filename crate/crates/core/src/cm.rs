//! CM orders `B` over a totally real field and the tables of CM orders for
//! `F = Q(√p)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{kronecker, require_prime, Rational};
use crate::error::{Error, Result};
use crate::mass::OrderLocalProfile;
use crate::selectivity::{CmExtension, SpinorGenusTag};

/// Opaque key for a finite prime of `F`.
///
/// Over `Q(√p)`: `q` is the dyadic prime, `sqrt_p` the prime above `p`,
/// `ℓ` an inert rational prime and `ℓ.1`, `ℓ.2` the two primes above a
/// split one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrimeId(String);

impl PrimeId {
    pub const DYADIC: &'static str = "q";
    pub const SQRT_P: &'static str = "sqrt_p";

    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn dyadic() -> Self {
        Self::new(Self::DYADIC)
    }

    pub fn sqrt_p() -> Self {
        Self::new(Self::SQRT_P)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PrimeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PrimeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// The imaginary quadratic class numbers `h(-p)`, `h(-2p)`, `h(-3p)` and
/// `(2|p)` that the symbolic table entries are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuxClassNumbers {
    pub h_minus_p: u64,
    pub h_minus_2p: u64,
    pub h_minus_3p: u64,
    /// `(2|p)`; 0 for `p = 2`.
    pub kron2p: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioBase {
    One,
    HMinusP,
    HMinus2P,
    HMinus3P,
}

/// `(constant + kron_coeff·(2|p)) / denominator · base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassRatio {
    pub constant: i64,
    pub kron_coeff: i64,
    pub denominator: i64,
    pub base: RatioBase,
}

impl ClassRatio {
    pub const ONE: ClassRatio = ClassRatio::of(RatioBase::One, 1);

    pub const fn of(base: RatioBase, denominator: i64) -> Self {
        Self {
            constant: 1,
            kron_coeff: 0,
            denominator,
            base,
        }
    }

    pub fn resolve(&self, aux: &AuxClassNumbers) -> Rational {
        let base = match self.base {
            RatioBase::One => 1,
            RatioBase::HMinusP => aux.h_minus_p,
            RatioBase::HMinus2P => aux.h_minus_2p,
            RatioBase::HMinus3P => aux.h_minus_3p,
        };
        let coeff = self.constant + self.kron_coeff * aux.kron2p as i64;
        Rational::ratio(coeff, self.denominator) * Rational::from(base)
    }
}

impl fmt::Display for ClassRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.base {
            RatioBase::One => "",
            RatioBase::HMinusP => "h(-p)",
            RatioBase::HMinus2P => "h(-2p)",
            RatioBase::HMinus3P => "h(-3p)",
        };
        let coeff = match (self.constant, self.kron_coeff) {
            (c, 0) if c == 1 && !base.is_empty() => String::new(),
            (c, 0) => c.to_string(),
            (c, k) => {
                let sign = if k < 0 { '-' } else { '+' };
                let k = k.abs();
                let term = if k == 1 {
                    "(2|p)".to_string()
                } else {
                    format!("{k}(2|p)")
                };
                format!("({c}{sign}{term})")
            }
        };
        write!(f, "{coeff}{base}")?;
        if self.denominator != 1 {
            write!(f, "/{}", self.denominator)?;
        }
        Ok(())
    }
}

/// What is known about `h(B)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassDatum {
    /// `h(B)` itself.
    Explicit(u64),
    /// `h(B)/h(F)` as an exact number.
    Ratio(Rational),
    /// `h(B)/h(F)` as printed in the `Q(√p)` tables.
    Symbolic(ClassRatio),
}

impl fmt::Display for ClassDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassDatum::Explicit(h) => write!(f, "h(B) = {h}"),
            ClassDatum::Ratio(r) => write!(f, "{r}"),
            ClassDatum::Symbolic(s) => write!(f, "{s}"),
        }
    }
}

/// A CM `O_F`-order `B` with everything the class number formulas need.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmOrderSpec {
    pub label: String,
    /// `m` with `K = F(√-m)`, when `K` has that shape.
    pub cm_radicand: Option<u64>,
    /// `|μ(B)|`.
    pub mu_order: u32,
    /// `w(B) = [B^× : O_F^×]`.
    pub unit_index: u32,
    pub class_datum: ClassDatum,
    pub conductor_valuations: BTreeMap<PrimeId, u32>,
    /// `(K/𝔭) ∈ {-1, 0, 1}`.
    pub artin_symbols: BTreeMap<PrimeId, i8>,
    /// `s(𝒢, K)`: whether `K ⊆ Σ_𝒢`.
    pub in_spinor_genus_field: bool,
    pub delta_principal: u8,
    pub delta_nonprincipal: u8,
}

impl CmOrderSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(format!("{}: {msg}", self.label)));
        if self.mu_order < 2 || !self.mu_order.is_multiple_of(2) {
            return fail(format!("|μ(B)| = {} must be even and at least 2", self.mu_order));
        }
        if self.unit_index == 0 {
            return fail("w(B) must be positive".into());
        }
        if self.delta_principal > 1 || self.delta_nonprincipal > 1 {
            return fail("Δ values must be 0 or 1".into());
        }
        if let Some((p, v)) = self.artin_symbols.iter().find(|(_, v)| !(-1..=1).contains(*v)) {
            return fail(format!("Artin symbol {v} at {p} is not in {{-1, 0, 1}}"));
        }
        let sum = self.delta_principal + self.delta_nonprincipal;
        if self.in_spinor_genus_field && sum != 1 {
            return fail("a selective order is optimally embedded in exactly one of two spinor genera".into());
        }
        if !self.in_spinor_genus_field && sum != 2 {
            return fail("a non-selective order has Δ = 1 in every spinor genus".into());
        }
        Ok(())
    }

    pub fn s(&self) -> u8 {
        self.in_spinor_genus_field as u8
    }

    pub fn delta(&self, tag: SpinorGenusTag) -> u8 {
        match tag {
            SpinorGenusTag::Principal => self.delta_principal,
            SpinorGenusTag::Nonprincipal => self.delta_nonprincipal,
        }
    }

    /// Replaces a symbolic class datum by its value.
    pub fn resolve(&self, aux: &AuxClassNumbers) -> CmOrderSpec {
        let mut out = self.clone();
        if let ClassDatum::Symbolic(s) = &self.class_datum {
            out.class_datum = ClassDatum::Ratio(s.resolve(aux));
        }
        out
    }

    /// `h(B)`, which must come out a positive integer.
    pub fn class_number(&self, h_f: u64) -> Result<u64> {
        let value = match &self.class_datum {
            ClassDatum::Explicit(h) => Rational::from(*h),
            ClassDatum::Ratio(r) => r * &Rational::from(h_f),
            ClassDatum::Symbolic(_) => return Err(Error::UnresolvedClassDatum(self.label.clone())),
        };
        crate::arith::expect_integer(&format!("h({})", self.label), &value, || {
            format!("  class datum: {}\n  h(F) = {h_f}", self.class_datum)
        })
    }
}

impl Serialize for CmOrderSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CmOrderSpec", 7)?;
        s.serialize_field("label", &self.label)?;
        s.serialize_field("mu", &self.mu_order)?;
        s.serialize_field("w", &self.unit_index)?;
        s.serialize_field("h_ratio", &self.class_datum.to_string())?;
        s.serialize_field("s", &self.s())?;
        s.serialize_field("delta_principal", &self.delta_principal)?;
        s.serialize_field("delta_nonprincipal", &self.delta_nonprincipal)?;
        s.end()
    }
}

/// `(B/𝔭)`: 1 if `𝔭 | 𝔣(B)`, otherwise the Artin symbol `(K/𝔭)`.
pub fn eichler_symbol(b: &CmOrderSpec, prime: &PrimeId) -> Result<i8> {
    if b.conductor_valuations.get(prime).copied().unwrap_or(0) > 0 {
        return Ok(1);
    }
    b.artin_symbols.get(prime).copied().ok_or_else(|| Error::UnknownPrime {
        label: b.label.clone(),
        prime: prime.to_string(),
    })
}

/// `m_𝔭(B)` for an Eichler order of squarefree level: `1 - (B/𝔭)` at primes
/// of `𝔡(D)`, `1 + (B/𝔭)` at primes of the level, 1 elsewhere. Any other
/// local shape needs `override_value`.
pub fn m_p(b: &CmOrderSpec, local: &OrderLocalProfile, override_value: Option<u32>) -> Result<u32> {
    if let Some(v) = override_value {
        return Ok(v);
    }
    match (local.eichler_invariant, local.discriminant_valuation) {
        (2, 0) => Ok(1),
        (-1, 1) => Ok((1 - eichler_symbol(b, &local.prime)? as i32) as u32),
        (1, 1) => Ok((1 + eichler_symbol(b, &local.prime)? as i32) as u32),
        _ => Err(Error::MissingOverride(local.prime.to_string())),
    }
}

/// `Π_𝔭 m_𝔭(B)` over the listed local profiles.
pub fn m_product(b: &CmOrderSpec, locals: &[OrderLocalProfile], overrides: &BTreeMap<PrimeId, u32>) -> Result<u64> {
    locals
        .iter()
        .map(|l| m_p(b, l, overrides.get(&l.prime).copied()).map(u64::from))
        .product()
}

/// `M(B) = h(B)/w(B) · Π_𝔭 m_𝔭(B)`.
pub fn big_m(b: &CmOrderSpec, h_f: u64, m_product: &Rational) -> Result<Rational> {
    let h = b.class_number(h_f)?;
    Ok(Rational::from(h) / Rational::from(b.unit_index as u64) * m_product)
}

/// Case split of the `Q(√p)` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    P2,
    P3,
    P5,
    OneModFour,
    ThreeModFour,
}

impl Regime {
    pub fn of(p: u64) -> Result<Self> {
        require_prime(p)?;
        Ok(match p {
            2 => Regime::P2,
            3 => Regime::P3,
            5 => Regime::P5,
            _ if p % 4 == 1 => Regime::OneModFour,
            _ => Regime::ThreeModFour,
        })
    }

    pub fn has_two_spinor_genera(self) -> bool {
        matches!(self, Regime::P3 | Regime::ThreeModFour)
    }

    pub fn genus_tags(self) -> &'static [SpinorGenusTag] {
        if self.has_two_spinor_genera() {
            &[SpinorGenusTag::Principal, SpinorGenusTag::Nonprincipal]
        } else {
            &[SpinorGenusTag::Principal]
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::P2 => "p = 2",
            Regime::P3 => "p = 3",
            Regime::P5 => "p = 5",
            Regime::OneModFour => "p ≡ 1 mod 4, p ≥ 13",
            Regime::ThreeModFour => "p ≡ 3 mod 4, p ≥ 7",
        })
    }
}

/// The CM orders over `Q(√p)` entering the class number formulas for maximal
/// orders of `D_{∞1,∞2}`: `b1` is `ℬ¹` (`|μ(B)| > 2`) and `b` is `ℬ`
/// (`w(B) > 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QSqrtPBTable {
    pub p: u64,
    pub regime: Regime,
    pub b1: Vec<CmOrderSpec>,
    pub b: Vec<CmOrderSpec>,
}

impl QSqrtPBTable {
    pub fn row(&self, label: &str) -> Option<&CmOrderSpec> {
        self.b.iter().chain(&self.b1).find(|r| r.label == label)
    }
}

pub const O_K1: &str = "O_K1";
pub const O_K2: &str = "O_K2";
pub const O_K3: &str = "O_K3";
pub const O_F_SQRT_MINUS_1: &str = "O_F[√-1]";
pub const B_1_2: &str = "B_{1,2}";
pub const B_1_3: &str = "B_{1,3}";
pub const Z_SQRT2_SQRT_MINUS_1: &str = "Z[√2,√-1]";
pub const Z_ZETA10: &str = "Z[ζ10]";

struct Row {
    label: &'static str,
    m: Option<u64>,
    mu: u32,
    w: u32,
    ratio: ClassRatio,
    conductor: &'static [(&'static str, u32)],
    s: bool,
    delta: (u8, u8),
}

impl Row {
    fn build(self, p: u64) -> CmOrderSpec {
        let conductor_valuations = self.conductor.iter().map(|&(id, v)| (PrimeId::new(id), v)).collect();
        let artin_symbols = self.m.map(|m| artin_symbols_qsqrtp(p, m)).unwrap_or_default();
        CmOrderSpec {
            label: self.label.to_string(),
            cm_radicand: self.m,
            mu_order: self.mu,
            unit_index: self.w,
            class_datum: ClassDatum::Symbolic(self.ratio),
            conductor_valuations,
            artin_symbols,
            in_spinor_genus_field: self.s,
            delta_principal: self.delta.0,
            delta_nonprincipal: self.delta.1,
        }
    }
}

/// Artin symbols of `F(√-m)/F` at `q` and `sqrt_p`: 0 where ramified, and for
/// the unramified `K₁` with `p ≡ 3 (mod 4)` the genus character values.
fn artin_symbols_qsqrtp(p: u64, m: u64) -> BTreeMap<PrimeId, i8> {
    let mut out = BTreeMap::new();
    let ext = match CmExtension::over_qsqrtp(p, m) {
        Ok(ext) => ext,
        Err(_) => return out,
    };
    let mut ids = vec![PrimeId::dyadic()];
    if p != 2 {
        ids.push(PrimeId::sqrt_p());
    }
    for id in ids {
        if ext.ramified_finite.contains(&id) {
            out.insert(id, 0);
        } else if p % 4 == 3 && ext.ramified_finite.is_empty() {
            let chi = crate::selectivity::genus_character_of_prime(p, &id).unwrap_or(0);
            out.insert(id, chi as i8);
        }
    }
    out
}

/// The `ℬ¹` and `ℬ` tables of CM orders over `Q(√p)`.
///
/// Columns are as printed, with `h(B)/h(F)` kept symbolic. For `p ≢ 3 (mod 4)`
/// the fundamental unit has norm `-1`, every totally positive unit is a
/// square, and `w(B) > 1` forces `|μ(B)| > 2`; so `ℬ = ℬ¹` there.
pub fn qsqrtp_b_tables(p: u64) -> Result<QSqrtPBTable> {
    use RatioBase::*;
    let regime = Regime::of(p)?;
    let one = ClassRatio::ONE;
    let row = |label, m, mu, w, ratio, conductor, s, delta| Row {
        label,
        m,
        mu,
        w,
        ratio,
        conductor,
        s,
        delta,
    };
    let o_k2 = |ratio| row(O_K2, Some(2), 2, 2, ratio, &[], false, (1, 1));
    let (b1, extra): (Vec<Row>, Vec<Row>) = match regime {
        Regime::P2 => (
            vec![
                row(O_K1, Some(1), 8, 4, one, &[], false, (1, 1)),
                row(Z_SQRT2_SQRT_MINUS_1, Some(1), 4, 2, one, &[("q", 1)], false, (1, 1)),
                row(O_K3, Some(3), 6, 3, one, &[], false, (1, 1)),
            ],
            vec![],
        ),
        Regime::P5 => (
            vec![
                row(O_K1, Some(1), 4, 2, one, &[], false, (1, 1)),
                row(O_K3, Some(3), 6, 3, one, &[], false, (1, 1)),
                row(Z_ZETA10, None, 10, 5, one, &[], false, (1, 1)),
            ],
            vec![],
        ),
        Regime::OneModFour => (
            vec![
                row(O_K1, Some(1), 4, 2, ClassRatio::of(HMinusP, 2), &[], false, (1, 1)),
                row(O_K3, Some(3), 6, 3, ClassRatio::of(HMinus3P, 2), &[], false, (1, 1)),
            ],
            vec![],
        ),
        Regime::P3 => (
            vec![
                row(O_F_SQRT_MINUS_1, Some(1), 4, 2, one, &[("q", 2)], true, (1, 0)),
                row(B_1_2, Some(1), 4, 4, one, &[("q", 1)], true, (0, 1)),
                row(B_1_3, Some(1), 6, 3, one, &[("sqrt_p", 1)], true, (0, 1)),
                row(O_K1, Some(1), 12, 12, one, &[], true, (1, 0)),
            ],
            vec![o_k2(ClassRatio::of(HMinus2P, 1))],
        ),
        Regime::ThreeModFour => {
            let sigma = kronecker(2, p as i64) as u8;
            let two_minus_sigma = ClassRatio {
                constant: 2,
                kron_coeff: -1,
                denominator: 1,
                base: HMinusP,
            };
            // Δ(B_{1,2}, ·) = ((1 + σ)/2, (1 - σ)/2)
            let b12 = if sigma == 1 { (1, 0) } else { (0, 1) };
            (
                vec![
                    row(
                        O_F_SQRT_MINUS_1,
                        Some(1),
                        4,
                        2,
                        two_minus_sigma,
                        &[("q", 2)],
                        true,
                        (1, 0),
                    ),
                    row(B_1_2, Some(1), 4, 4, two_minus_sigma, &[("q", 1)], true, b12),
                    row(O_K1, Some(1), 4, 4, ClassRatio::of(HMinusP, 1), &[], true, (1, 0)),
                    row(O_K3, Some(3), 6, 3, ClassRatio::of(HMinus3P, 2), &[], false, (1, 1)),
                ],
                vec![o_k2(ClassRatio::of(HMinus2P, 1))],
            )
        }
    };
    let b1: Vec<CmOrderSpec> = b1.into_iter().map(|r| r.build(p)).collect();
    let b = b1
        .iter()
        .cloned()
        .chain(extra.into_iter().map(|r| r.build(p)))
        .collect();
    let table = QSqrtPBTable { p, regime, b1, b };
    for row in &table.b {
        row.validate()?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aux(p: u64) -> AuxClassNumbers {
        use crate::quad::h_imag_nonsquare;
        let p = p as i64;
        AuxClassNumbers {
            h_minus_p: h_imag_nonsquare(-p).unwrap(),
            h_minus_2p: h_imag_nonsquare(-2 * p).unwrap(),
            h_minus_3p: h_imag_nonsquare(-3 * p).unwrap(),
            kron2p: kronecker(2, p),
        }
    }

    fn spec(conductor: u32, artin: i8) -> CmOrderSpec {
        let mut b = CmOrderSpec {
            label: "B".into(),
            cm_radicand: None,
            mu_order: 4,
            unit_index: 2,
            class_datum: ClassDatum::Explicit(4),
            conductor_valuations: BTreeMap::new(),
            artin_symbols: BTreeMap::new(),
            in_spinor_genus_field: false,
            delta_principal: 1,
            delta_nonprincipal: 1,
        };
        b.conductor_valuations.insert("P".into(), conductor);
        b.artin_symbols.insert("P".into(), artin);
        b
    }

    #[test]
    fn eichler_symbol_cases() {
        let p = PrimeId::new("P");
        assert_eq!(eichler_symbol(&spec(2, -1), &p).unwrap(), 1);
        assert_eq!(eichler_symbol(&spec(0, 0), &p).unwrap(), 0);
        assert_eq!(eichler_symbol(&spec(0, 1), &p).unwrap(), 1);
        assert!(matches!(
            eichler_symbol(&spec(0, 1), &PrimeId::new("Q")),
            Err(Error::UnknownPrime { .. })
        ));
    }

    #[test]
    fn local_embedding_numbers() {
        let b = spec(0, -1);
        let ram = OrderLocalProfile::new("P".into(), 4, -1, 1).unwrap();
        let level = OrderLocalProfile::new("P".into(), 4, 1, 1).unwrap();
        let other = OrderLocalProfile::new("P".into(), 4, 2, 0).unwrap();
        let deep = OrderLocalProfile::new("P".into(), 4, 1, 2).unwrap();
        assert_eq!(m_p(&b, &ram, None).unwrap(), 2);
        assert_eq!(m_p(&b, &level, None).unwrap(), 0);
        assert_eq!(m_p(&b, &other, None).unwrap(), 1);
        assert!(matches!(m_p(&b, &deep, None), Err(Error::MissingOverride(_))));
        assert_eq!(m_p(&b, &deep, Some(3)).unwrap(), 3);
    }

    #[test]
    fn big_m_values() {
        let b = spec(0, 1);
        assert_eq!(big_m(&b, 1, &Rational::one()).unwrap(), Rational::from(2u64));
        let mut k3 = spec(0, 1);
        k3.unit_index = 3;
        assert_eq!(big_m(&k3, 1, &Rational::one()).unwrap(), Rational::ratio(4, 3));
        assert!(big_m(&b, 1, &Rational::zero()).unwrap().is_zero());
        let mut sym = spec(0, 1);
        sym.class_datum = ClassDatum::Symbolic(ClassRatio::of(RatioBase::HMinusP, 2));
        assert!(matches!(
            big_m(&sym, 1, &Rational::one()),
            Err(Error::UnresolvedClassDatum(_))
        ));
    }

    #[test]
    fn table_p13() {
        let t = qsqrtp_b_tables(13).unwrap();
        assert_eq!(t.regime, Regime::OneModFour);
        let labels: Vec<_> = t.b1.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, [O_K1, O_K3]);
        let k1 = &t.b1[0];
        assert_eq!((k1.mu_order, k1.unit_index, k1.s()), (4, 2, 0));
        assert_eq!(k1.class_datum.to_string(), "h(-p)/2");
        let a = aux(13);
        assert_eq!(k1.resolve(&a).class_number(1).unwrap(), 1);
        assert_eq!(t.b1[1].resolve(&a).class_number(1).unwrap(), 2);
    }

    #[test]
    fn table_p2_and_p7() {
        let t = qsqrtp_b_tables(2).unwrap();
        assert_eq!(t.b1.len(), 3);
        assert!(t.b1.iter().all(|r| r.class_datum.to_string() == "1"));
        assert!(t.row(Z_SQRT2_SQRT_MINUS_1).is_some());

        let t = qsqrtp_b_tables(7).unwrap();
        let b12 = t.row(B_1_2).unwrap();
        assert_eq!((b12.delta_principal, b12.delta_nonprincipal), (1, 0));
        assert_eq!(b12.class_datum.to_string(), "(2-(2|p))h(-p)");
        assert_eq!(t.b.len(), 5);
        assert_eq!(t.row(O_K1).unwrap().artin_symbols[&PrimeId::dyadic()], 1);
        let t = qsqrtp_b_tables(11).unwrap();
        let b12 = t.row(B_1_2).unwrap();
        assert_eq!((b12.delta_principal, b12.delta_nonprincipal), (0, 1));
        assert_eq!(b12.resolve(&aux(11)).class_number(1).unwrap(), 3);
    }

    #[test]
    fn delta_columns_for_all_tables() {
        for p in (2..3000).filter(|&p| crate::arith::is_prime(p)) {
            let t = qsqrtp_b_tables(p).unwrap();
            for r in &t.b {
                let sum = r.delta_principal + r.delta_nonprincipal;
                assert_eq!(sum, if r.in_spinor_genus_field { 1 } else { 2 }, "p = {p}, {}", r.label);
            }
            if t.regime == Regime::ThreeModFour {
                let s = kronecker(2, p as i64);
                assert_eq!(t.row(O_F_SQRT_MINUS_1).unwrap().delta_principal, 1);
                assert_eq!(t.row(O_K1).unwrap().delta_principal, 1);
                let b12 = t.row(B_1_2).unwrap();
                assert_eq!(b12.delta_principal as i32 * 2, 1 + s);
                assert_eq!(b12.delta_nonprincipal as i32 * 2, 1 - s);
            }
        }
    }

    #[test]
    fn table_rows_serialize_table_columns() {
        let t = qsqrtp_b_tables(13).unwrap();
        let v = serde_json::to_value(&t.b1[1]).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "label": "O_K3", "mu": 6, "w": 3, "h_ratio": "h(-3p)/2",
                "s": 0, "delta_principal": 1, "delta_nonprincipal": 1
            })
        );
    }
}
