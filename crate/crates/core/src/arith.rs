//! Exact rationals and the elementary integer kernels used throughout the
//! crate: the Kronecker symbol, divisor sums, trial-division factorization
//! and a deterministic primality test.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact rational number, always kept in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `numer / denom` for small operands; panics on a zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InvalidArgument("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    /// The value as an integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.to_integer())
    }

    /// The value as a `u64`, if it is a nonnegative integer in range.
    pub fn to_u64(&self) -> Option<u64> {
        self.to_integer().and_then(|n| n.to_u64())
    }

    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Parses `"a"` or `"a/b"` with decimal integers. Anything else,
    /// including decimal points and exponents, is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not an exact rational: {s:?}"));
        let parse_int = |t: &str| -> Result<BigInt> {
            let t = t.trim();
            let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<BigInt>().map_err(|_| bad())
        };
        match s.split_once('/') {
            None => Ok(Rational::from_integer(parse_int(s)?)),
            Some((n, d)) => Rational::new(parse_int(n)?, parse_int(d)?),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

// JSON shape: {"num": "<digits>", "den": "<digits>"}.
impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Rational", 2)?;
        st.serialize_field("num", &self.0.numer().to_string())?;
        st.serialize_field("den", &self.0.denom().to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            num: String,
            den: String,
        }
        let w = Wire::deserialize(deserializer)?;
        Rational::from_str(&format!("{}/{}", w.num, w.den)).map_err(de::Error::custom)
    }
}

/// Kronecker symbol `(a | n)` with the standard extension to every integer
/// `n`: `(a | 2)` is `0` for even `a` and otherwise depends on `a mod 8`,
/// `(a | -1)` is the sign of `a`, and `(a | 0)` is `1` exactly for `a = ±1`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let mut a = a as i128;
    let mut n = n as i128;
    if n == 0 {
        return i32::from(a == 1 || a == -1);
    }
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    let mut sign = 1;
    let tz = n.trailing_zeros();
    n >>= tz;
    if tz % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
        sign = -sign;
    }
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    // n is now odd and positive: Jacobi symbol with reciprocity.
    a = a.rem_euclid(n);
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && matches!(n % 8, 3 | 5) {
            sign = -sign;
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Prime factorization, primes strictly increasing with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(q, _)| q)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The product of all `q^e`.
    pub fn value(&self) -> u128 {
        self.0.iter().map(|&(q, e)| (q as u128).pow(e)).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.iter().all(|&(_, e)| e == 1)
    }
}

/// Trial division with a 2-3-5 wheel; intended for `n < 10^12`.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let mut n = n;
    let mut out = Vec::new();
    let take = |n: &mut u64, q: u64, out: &mut Vec<(u64, u32)>| {
        let mut e = 0;
        while (*n).is_multiple_of(q) {
            *n /= q;
            e += 1;
        }
        if e > 0 {
            out.push((q, e));
        }
    };
    for q in [2, 3, 5] {
        take(&mut n, q, &mut out);
    }
    const GAPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut q = 7u64;
    let mut i = 0;
    while q.saturating_mul(q) <= n {
        take(&mut n, q, &mut out);
        q += GAPS[i];
        i = (i + 1) % GAPS.len();
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(Factorization(out))
}

/// Sum of the positive divisors of `n`.
pub fn sigma1(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(f.factors().iter().map(|&(q, e)| (q.pow(e + 1) - 1) / (q - 1)).product())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases are a proven
/// witness set for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &BASES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `⌊√n⌋` for any `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).map(|f| f.is_squarefree()).unwrap_or(false)
}

pub(crate) fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Legendre symbol for an odd prime `q` by Euler's criterion.
pub fn euler_criterion(a: i64, q: u64) -> i32 {
    let r = a.rem_euclid(q as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    }
}

/// The integer value of `r` if it is integral, otherwise a
/// [`Error::NonIntegral`] carrying `dump`.
pub(crate) fn expect_integer(quantity: &str, r: &Rational, dump: impl FnOnce() -> String) -> Result<u64> {
    match r.to_integer() {
        Some(n) if n.is_positive() => n
            .to_u64()
            .ok_or_else(|| Error::Inconsistent(format!("{quantity} = {n} does not fit in 64 bits"))),
        _ => Err(Error::NonIntegral {
            quantity: quantity.to_string(),
            value: r.to_string(),
            dump: dump(),
        }),
    }
}

pub(crate) fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(12345, 1), 1);
        assert_eq!(kronecker(-5, 1), 1);
    }

    #[test]
    fn kronecker_extended_arguments() {
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(2, 0), 0);
        assert_eq!(kronecker(-3, -1), -1);
        assert_eq!(kronecker(3, -1), 1);
        assert_eq!(kronecker(4, 2), 0);
        assert_eq!(kronecker(5, 4), 1);
        assert_eq!(kronecker(3, 8), -1);
        assert_eq!(kronecker(2, 15), 1);
        assert_eq!(kronecker(6, 9), 0);
    }

    #[test]
    fn sigma1_examples() {
        assert_eq!(sigma1(1).unwrap(), 1);
        assert_eq!(sigma1(6).unwrap(), 12);
        assert_eq!(sigma1(7).unwrap(), 8);
        assert!(matches!(sigma1(0), Err(Error::ZeroArgument)));
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().is_empty());
        assert_eq!(factorize(84).unwrap().factors(), &[(2, 2), (3, 1), (7, 1)]);
        assert_eq!(factorize(7919).unwrap().factors(), &[(7919, 1)]);
        assert!(factorize(0).is_err());
        assert_eq!(factorize(999_999_999_989).unwrap().factors(), &[(999_999_999_989, 1)]);
    }

    #[test]
    fn is_prime_examples() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(7917));
        assert!(is_prime(7919));
        assert!(is_prime(18_446_744_073_709_551_557));
        // strong pseudoprime to bases 2..=23
        assert!(!is_prime(3_825_123_056_546_413_051));
    }

    #[test]
    fn is_prime_matches_sieve() {
        let n = 20_000usize;
        let mut sieve = vec![true; n];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..n {
            if sieve[i] {
                for j in (i * i..n).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (i, &s) in sieve.iter().enumerate() {
            assert_eq!(is_prime(i as u64), s, "n = {i}");
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!("1/12".parse::<Rational>().unwrap(), Rational::ratio(1, 12));
        assert_eq!("-4/6".parse::<Rational>().unwrap(), Rational::ratio(-2, 3));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::from(7i64));
        assert!("0.5".parse::<Rational>().is_err());
        assert!("1e3".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_display_and_json() {
        assert_eq!(Rational::ratio(2, 3).to_string(), "2/3");
        assert_eq!(Rational::ratio(6, 3).to_string(), "2");
        let v = serde_json::to_string(&Rational::ratio(-1, 12)).unwrap();
        assert_eq!(v, r#"{"num":"-1","den":"12"}"#);
        let back: Rational = serde_json::from_str(&v).unwrap();
        assert_eq!(back, Rational::ratio(-1, 12));
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-10_000i64..10_000, 1i64..10_000).prop_map(|(n, d)| Rational::ratio(n, d))
    }

    proptest! {
        #[test]
        fn kronecker_multiplicative_in_top(a in -500i64..500, b in -500i64..500, n in -2000i64..2000) {
            prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
        }

        #[test]
        fn kronecker_multiplicative_in_bottom(a in -500i64..500, m in -300i64..300, n in -300i64..300) {
            prop_assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
        }

        #[test]
        fn kronecker_matches_euler_criterion(a in -10_000i64..10_000, idx in 1usize..200) {
            let q = (3u64..).filter(|&q| is_prime(q)).nth(idx).unwrap();
            prop_assert_eq!(kronecker(a, q as i64), euler_criterion(a, q));
        }

        #[test]
        fn sigma1_multiplicative(m in 1u64..5000, n in 1u64..5000) {
            prop_assume!(gcd_u64(m, n) == 1);
            prop_assert_eq!(sigma1(m * n).unwrap(), sigma1(m).unwrap() * sigma1(n).unwrap());
        }

        #[test]
        fn sigma1_matches_enumeration(n in 1u64..3000) {
            let brute: u64 = (1..=n).filter(|d| n % d == 0).sum();
            prop_assert_eq!(sigma1(n).unwrap(), brute);
        }

        #[test]
        fn factorization_reconstructs(n in 1u64..10_000_000) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.value(), n as u128);
            prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
            prop_assert!(f.primes().all(is_prime));
        }

        #[test]
        fn rational_add_sub_roundtrip(x in small_rational(), y in small_rational()) {
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert!(x.denom() > &BigInt::zero());
        }
    }
}
