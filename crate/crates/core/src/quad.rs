//! Invariants of quadratic fields: class numbers of imaginary and real
//! quadratic fields by reduction theory of binary quadratic forms, the
//! fundamental unit of `Q(√p)` by continued fractions, and `ζ_F(-1)` of a
//! real quadratic field by Siegel's divisor sum.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd_u64, isqrt, kronecker, require_prime, sigma1, Rational};
use crate::error::{Error, Result};

/// `Q(√d)` for a squarefree radicand `d ∉ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadField {
    radicand: i64,
    discriminant: i64,
}

impl QuadField {
    pub fn new(radicand: i64) -> Result<Self> {
        if radicand == 0 || radicand == 1 || !crate::arith::is_squarefree(radicand.unsigned_abs()) {
            return Err(Error::NotSquarefree(radicand));
        }
        let discriminant = if radicand.rem_euclid(4) == 1 {
            radicand
        } else {
            4 * radicand
        };
        Ok(Self { radicand, discriminant })
    }

    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    /// The field discriminant: `d` if `d ≡ 1 (mod 4)`, else `4d`.
    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn is_imaginary(&self) -> bool {
        self.radicand < 0
    }
}

/// Exact invariants of a totally real field that the class number formulas
/// consume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInvariants {
    degree: u32,
    zeta_minus_one: Rational,
    #[serde(rename = "h")]
    class_number: u64,
    #[serde(rename = "h_plus")]
    narrow_class_number: u64,
}

impl FieldInvariants {
    /// Checks that `h | h⁺` with a power-of-two quotient and that
    /// `ζ_F(-1)` is nonzero with sign `(-1)^degree`.
    pub fn new(degree: u32, zeta_minus_one: Rational, class_number: u64, narrow_class_number: u64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("field degree must be positive".into()));
        }
        if class_number == 0 || narrow_class_number == 0 {
            return Err(Error::InvalidArgument("class numbers must be positive".into()));
        }
        if !narrow_class_number.is_multiple_of(class_number) || !(narrow_class_number / class_number).is_power_of_two()
        {
            return Err(Error::InvalidArgument(format!(
                "h⁺ = {narrow_class_number} is not a power-of-two multiple of h = {class_number}"
            )));
        }
        let expected_negative = degree % 2 == 1;
        if zeta_minus_one.is_zero() || zeta_minus_one.is_negative() != expected_negative {
            return Err(Error::InvalidArgument(format!(
                "ζ_F(-1) = {zeta_minus_one} must be nonzero with sign (-1)^{degree}"
            )));
        }
        Ok(Self {
            degree,
            zeta_minus_one,
            class_number,
            narrow_class_number,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Signed `ζ_F(-1)`.
    pub fn zeta_minus_one(&self) -> &Rational {
        &self.zeta_minus_one
    }

    pub fn abs_zeta(&self) -> Rational {
        self.zeta_minus_one.abs()
    }

    pub fn class_number(&self) -> u64 {
        self.class_number
    }

    pub fn narrow_class_number(&self) -> u64 {
        self.narrow_class_number
    }
}

fn require_negative_squarefree(d: i64) -> Result<QuadField> {
    if d >= 0 {
        return Err(Error::NotImaginary(d));
    }
    QuadField::new(d)
}

/// Reduced primitive positive definite forms `(a, b, c)` of a negative
/// discriminant: `|b| ≤ a ≤ c`, with `b ≥ 0` when `|b| = a` or `a = c`.
pub fn reduced_forms_definite(disc: i64) -> Vec<(i64, i64, i64)> {
    assert!(disc < 0 && disc.rem_euclid(4) <= 1, "bad discriminant {disc}");
    let n = -disc;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            if (b - disc).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            let g = gcd_u64(gcd_u64(a as u64, b.unsigned_abs()), c as u64);
            if g == 1 {
                out.push((a, b, c));
            }
        }
        a += 1;
    }
    out
}

/// Class number of `Q(√d)` for squarefree `d < 0`, counting reduced forms
/// of the field discriminant.
pub fn h_imag(d: i64) -> Result<u64> {
    let field = require_negative_squarefree(d)?;
    Ok(reduced_forms_definite(field.discriminant()).len() as u64)
}

/// Class number of `Q(√d)` for squarefree `d < 0` from the finite form of
/// Dirichlet's class number formula,
/// `h = -(w / 2|D|) Σ_{0<a<|D|} (D|a)·a`.
pub fn h_imag_dirichlet(d: i64) -> Result<u64> {
    let field = require_negative_squarefree(d)?;
    let disc = field.discriminant();
    let n = -disc;
    let w: i128 = match disc {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let sum: i128 = (1..n).map(|a| kronecker(disc, a) as i128 * a as i128).sum();
    let num = -w * sum;
    let den = 2 * n as i128;
    if num <= 0 || num % den != 0 {
        return Err(Error::Inconsistent(format!(
            "Dirichlet sum for D = {disc} gave {num}/{den}"
        )));
    }
    Ok((num / den) as u64)
}

/// Class number of `Q(√d)` for any negative non-square `d`, i.e. of the
/// field generated by its squarefree part.
pub fn h_imag_nonsquare(d: i64) -> Result<u64> {
    if d >= 0 {
        return Err(Error::NotImaginary(d));
    }
    let f = factorize(d.unsigned_abs())?;
    let kernel: i64 = f
        .factors()
        .iter()
        .filter(|&&(_, e)| e % 2 == 1)
        .map(|&(q, _)| q as i64)
        .product();
    h_imag(-kernel)
}

/// Fundamental unit `ε = (x + y√p) / denominator > 1` of `Q(√p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FundamentalUnit {
    pub p: u64,
    pub x: BigInt,
    pub y: BigInt,
    /// 1, or 2 for the half-integral form available when `p ≡ 1 (mod 4)`.
    pub denominator: u32,
    pub norm_sign: i32,
}

impl FundamentalUnit {
    /// `(x² - p·y²) / denominator²`, exactly.
    pub fn norm(&self) -> BigInt {
        let n = &self.x * &self.x - BigInt::from(self.p) * &self.y * &self.y;
        n / BigInt::from(self.denominator * self.denominator)
    }

    pub fn is_totally_positive(&self) -> bool {
        self.norm_sign == 1
    }
}

impl fmt::Display for FundamentalUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.norm_sign > 0 { "+1" } else { "-1" };
        if self.denominator == 1 {
            write!(f, "{}+{}·√{}, norm {sign}", self.x, self.y, self.p)
        } else {
            write!(
                f,
                "({}+{}·√{})/{}, norm {sign}",
                self.x, self.y, self.p, self.denominator
            )
        }
    }
}

/// Fundamental unit of `Q(√p)` from the continued fraction of `√p`, or of
/// `(1+√p)/2` when `p ≡ 1 (mod 4)`. The first convergent whose complete
/// quotient returns to the starting denominator yields the unit.
pub fn fundamental_unit(p: u64) -> Result<FundamentalUnit> {
    require_prime(p)?;
    let half = p % 4 == 1;
    let root = isqrt(p) as i64;
    let radicand = p as i64;
    let (mut pp, mut q) = if half { (1i64, 2i64) } else { (0, 1) };
    let q0 = q;
    let (mut h1, mut h2) = (BigInt::one(), BigInt::from(0));
    let (mut k1, mut k2) = (BigInt::from(0), BigInt::one());
    loop {
        debug_assert!(q > 0);
        let a = (pp + root).div_euclid(q);
        let h = BigInt::from(a) * &h1 + &h2;
        let k = BigInt::from(a) * &k1 + &k2;
        h2 = std::mem::replace(&mut h1, h);
        k2 = std::mem::replace(&mut k1, k);
        pp = a * q - pp;
        q = (radicand - pp * pp) / q;
        if q != q0 {
            continue;
        }
        let (mut x, mut y, mut den) = if half {
            (BigInt::from(2) * &h1 - &k1, k1.clone(), 2u32)
        } else {
            (h1.clone(), k1.clone(), 1u32)
        };
        if den == 2 && (&x % 2u32) == BigInt::from(0) && (&y % 2u32) == BigInt::from(0) {
            x /= 2;
            y /= 2;
            den = 1;
        }
        let unit = FundamentalUnit {
            p,
            x,
            y,
            denominator: den,
            norm_sign: 0,
        };
        let norm = unit.norm();
        if norm.abs().is_one() {
            let norm_sign = if norm.is_positive() { 1 } else { -1 };
            return Ok(FundamentalUnit { norm_sign, ..unit });
        }
    }
}

/// Discriminant of `Q(√p)`: `p` if `p ≡ 1 (mod 4)`, else `4p`.
pub fn real_discriminant(p: u64) -> u64 {
    if p % 4 == 1 {
        p
    } else {
        4 * p
    }
}

/// Reduced indefinite forms of a positive non-square discriminant:
/// `0 < b < √D` and `√D - b < 2|a| < √D + b`.
pub fn reduced_forms_indefinite(disc: u64) -> Vec<(i64, i64, i64)> {
    let s = isqrt(disc) as i64;
    assert!((s * s) as u64 != disc, "discriminant {disc} is a square");
    let d = disc as i64;
    let mut out = Vec::new();
    for b in 1..=s {
        if (d - b * b).rem_euclid(4) != 0 {
            continue;
        }
        let n = (d - b * b) / 4;
        for a in 1..=n {
            if 2 * a - b > s {
                break;
            }
            if n % a != 0 || 2 * a + b <= s {
                continue;
            }
            let c = n / a;
            let g = gcd_u64(gcd_u64(a as u64, b as u64), c as u64);
            if g == 1 {
                out.push((a, b, -c));
                out.push((-a, b, c));
            }
        }
    }
    out
}

/// One step of the reduction cycle: `(a, b, c) ↦ (c, b', a')` with
/// `b' ≡ -b (mod 2|c|)` and `√D - 2|c| < b' < √D`.
fn rho(form: (i64, i64, i64), disc: i64, s: i64) -> (i64, i64, i64) {
    let (_, b, c) = form;
    let m = 2 * c.abs();
    let b2 = s - (s + b).rem_euclid(m);
    let a2 = (b2 * b2 - disc) / (4 * c);
    (c, b2, a2)
}

/// Number of proper equivalence classes of primitive forms of discriminant
/// `disc`, i.e. the number of reduction cycles. For a fundamental
/// discriminant this is the narrow class number.
pub fn narrow_form_class_number(disc: u64) -> u64 {
    let s = isqrt(disc) as i64;
    let d = disc as i64;
    let mut unseen: BTreeSet<(i64, i64, i64)> = reduced_forms_indefinite(disc).into_iter().collect();
    let mut cycles = 0;
    while let Some(&start) = unseen.iter().next() {
        cycles += 1;
        let mut f = start;
        loop {
            unseen.remove(&f);
            f = rho(f, d, s);
            if f == start {
                break;
            }
        }
    }
    cycles
}

/// Class number of `Q(√p)`: the number of form cycles, halved when the
/// fundamental unit has norm `+1`.
pub fn h_real(p: u64) -> Result<u64> {
    let unit = fundamental_unit(p)?;
    let narrow = narrow_form_class_number(real_discriminant(p));
    if unit.is_totally_positive() {
        if !narrow.is_multiple_of(2) {
            return Err(Error::Inconsistent(format!(
                "odd form class number {narrow} with a totally positive unit at p = {p}"
            )));
        }
        Ok(narrow / 2)
    } else {
        Ok(narrow)
    }
}

/// Narrow class number of `Q(√p)`: `2·h` if `p ≡ 3 (mod 4)`, else `h`.
pub fn narrow_class_number(p: u64) -> Result<u64> {
    let h = h_real(p)?;
    Ok(if p % 4 == 3 { 2 * h } else { h })
}

/// `ζ_F(-1)` for `F = Q(√p)` by Siegel's formula
/// `(1/60) Σ_{b² < D, b ≡ D (2)} σ₁((D - b²)/4)`. Always positive.
pub fn zeta_minus_one_real_quadratic(p: u64) -> Result<Rational> {
    require_prime(p)?;
    siegel_zeta(real_discriminant(p))
}

/// Siegel's divisor sum for an arbitrary positive non-square discriminant.
pub fn siegel_zeta(disc: u64) -> Result<Rational> {
    let s = isqrt(disc);
    if s * s == disc || disc % 4 > 1 {
        return Err(Error::InvalidArgument(format!(
            "{disc} is not a real quadratic discriminant"
        )));
    }
    let mut total: u64 = 0;
    for b in (disc % 2..=s).step_by(2) {
        if b * b >= disc {
            break;
        }
        let term = sigma1((disc - b * b) / 4)?;
        total += if b == 0 { term } else { 2 * term };
    }
    Rational::new(total, 60u32)
}

/// All invariants of `Q(√p)` the formulas need.
pub fn real_quadratic_invariants(p: u64) -> Result<FieldInvariants> {
    let zeta = zeta_minus_one_real_quadratic(p)?;
    let unit = fundamental_unit(p)?;
    let forms = narrow_form_class_number(real_discriminant(p));
    let h = h_real(p)?;
    let h_plus = narrow_class_number(p)?;
    // Two routes to h⁺: unit norm (p mod 4) and the raw cycle count.
    if forms != h_plus || unit.is_totally_positive() != (p % 4 == 3) {
        return Err(Error::Inconsistent(format!(
            "narrow class number mismatch at p = {p}: {forms} form cycles, h⁺ = {h_plus}, unit {unit}"
        )));
    }
    FieldInvariants::new(2, zeta, h, h_plus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_unit(p: u64) -> (u64, u64, u32) {
        // smallest y > 0 with x² - p y² = ±4 (half form) or ±1
        let target: &[i128] = if p % 4 == 1 { &[-4, 4] } else { &[-1, 1] };
        for y in 1u64.. {
            let py2 = p as i128 * (y as i128) * (y as i128);
            for &t in target {
                let x2 = py2 + t;
                if x2 <= 0 {
                    continue;
                }
                let x = isqrt(x2 as u64);
                if (x as i128) * (x as i128) == x2 {
                    return if p % 4 == 1 { (x, y, 2) } else { (x, y, 1) };
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn quad_field_discriminants() {
        assert_eq!(QuadField::new(-7).unwrap().discriminant(), -7);
        assert_eq!(QuadField::new(-14).unwrap().discriminant(), -56);
        assert_eq!(QuadField::new(2).unwrap().discriminant(), 8);
        assert!(QuadField::new(-4).is_err());
        assert!(QuadField::new(1).is_err());
        assert!(QuadField::new(0).is_err());
        assert!(QuadField::new(-1).unwrap().is_imaginary());
    }

    #[test]
    fn h_imag_examples() {
        assert_eq!(h_imag(-7).unwrap(), 1);
        assert_eq!(h_imag(-1).unwrap(), 1);
        assert_eq!(h_imag(-14).unwrap(), 4);
        assert_eq!(h_imag(-39).unwrap(), 4);
        assert_eq!(h_imag(-3).unwrap(), 1);
        assert_eq!(h_imag(-163).unwrap(), 1);
        assert!(matches!(h_imag(-12), Err(Error::NotSquarefree(-12))));
        assert!(matches!(h_imag(5), Err(Error::NotImaginary(5))));
    }

    #[test]
    fn reduced_forms_of_minus_56() {
        let forms = reduced_forms_definite(-56);
        assert_eq!(forms, vec![(1, 0, 14), (2, 0, 7), (3, -2, 5), (3, 2, 5)]);
    }

    #[test]
    fn h_imag_dirichlet_examples() {
        assert_eq!(h_imag_dirichlet(-7).unwrap(), 1);
        assert_eq!(h_imag_dirichlet(-3).unwrap(), 1);
        assert_eq!(h_imag_dirichlet(-21).unwrap(), 4);
        assert_eq!(h_imag_dirichlet(-1).unwrap(), 1);
    }

    #[test]
    fn h_imag_nonsquare_uses_squarefree_part() {
        assert_eq!(h_imag_nonsquare(-9).unwrap(), 1);
        assert_eq!(h_imag_nonsquare(-4).unwrap(), 1);
        assert_eq!(h_imag_nonsquare(-56).unwrap(), h_imag(-14).unwrap());
    }

    #[test]
    fn fundamental_unit_examples() {
        let u = fundamental_unit(2).unwrap();
        assert_eq!(
            (u.x.clone(), u.y.clone(), u.denominator, u.norm_sign),
            (1.into(), 1.into(), 1, -1)
        );
        let u = fundamental_unit(3).unwrap();
        assert_eq!(
            (u.x.clone(), u.y.clone(), u.denominator, u.norm_sign),
            (2.into(), 1.into(), 1, 1)
        );
        assert_eq!(u.to_string(), "2+1·√3, norm +1");
        let u = fundamental_unit(5).unwrap();
        assert_eq!(
            (u.x.clone(), u.y.clone(), u.denominator, u.norm_sign),
            (1.into(), 1.into(), 2, -1)
        );
        assert!(fundamental_unit(15).is_err());
    }

    #[test]
    fn fundamental_unit_matches_brute_force() {
        for p in (2..100u64).filter(|&p| crate::arith::is_prime(p)) {
            let u = fundamental_unit(p).unwrap();
            let (x, y, den) = brute_force_unit(p);
            // reduce the brute-force half form the same way
            let (x, y, den) = if den == 2 && x % 2 == 0 && y % 2 == 0 {
                (x / 2, y / 2, 1)
            } else {
                (x, y, den)
            };
            assert_eq!((u.x, u.y, u.denominator), (x.into(), y.into(), den), "p = {p}");
        }
    }

    #[test]
    fn h_real_examples() {
        assert_eq!(h_real(2).unwrap(), 1);
        assert_eq!(h_real(5).unwrap(), 1);
        assert_eq!(h_real(79).unwrap(), 3);
        assert_eq!(h_real(229).unwrap(), 3);
        assert_eq!(h_real(401).unwrap(), 5);
        assert!(h_real(21).is_err());
    }

    #[test]
    fn narrow_class_number_examples() {
        assert_eq!(narrow_class_number(5).unwrap(), 1);
        assert_eq!(narrow_class_number(3).unwrap(), 2);
        assert_eq!(narrow_class_number(7).unwrap(), 2);
        assert_eq!(narrow_class_number(79).unwrap(), 6);
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta_minus_one_real_quadratic(2).unwrap(), Rational::ratio(1, 12));
        assert_eq!(zeta_minus_one_real_quadratic(5).unwrap(), Rational::ratio(1, 30));
        assert_eq!(zeta_minus_one_real_quadratic(3).unwrap(), Rational::ratio(1, 6));
        assert_eq!(zeta_minus_one_real_quadratic(13).unwrap(), Rational::ratio(1, 6));
        assert_eq!(zeta_minus_one_real_quadratic(7).unwrap(), Rational::ratio(2, 3));
        assert!(zeta_minus_one_real_quadratic(9).is_err());
    }

    #[test]
    fn field_invariants_validation() {
        assert!(FieldInvariants::new(2, Rational::ratio(1, 6), 1, 2).is_ok());
        assert!(FieldInvariants::new(2, Rational::ratio(-1, 6), 1, 2).is_err());
        assert!(FieldInvariants::new(3, Rational::ratio(-1, 6), 1, 1).is_ok());
        assert!(FieldInvariants::new(2, Rational::ratio(1, 6), 2, 3).is_err());
        assert!(FieldInvariants::new(2, Rational::ratio(1, 6), 2, 6).is_err());
        assert!(FieldInvariants::new(2, Rational::zero(), 1, 1).is_err());
    }

    #[test]
    fn real_invariants_p7() {
        let f = real_quadratic_invariants(7).unwrap();
        assert_eq!(f.zeta_minus_one(), &Rational::ratio(2, 3));
        assert_eq!((f.class_number(), f.narrow_class_number()), (1, 2));
    }
}
