//! Independent oracles used only by tests. None of them calls the
//! reduction-theory or Siegel-sum code they are checked against.

#![allow(dead_code)]

use num_bigint::BigInt;
use quatclass::arith::Rational;
use quatclass::quad::fundamental_unit;

pub fn primes_upto(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// `(D|a)` for a fundamental discriminant `D` and `a ≥ 1`, multiplicatively
/// from Euler's criterion at odd primes and the residue of `D` mod 8 at 2.
pub fn kron_oracle(d: i64, a: u64) -> i32 {
    let mut a = a;
    let mut out = 1;
    let mut q = 2u64;
    while a > 1 {
        if q * q > a {
            q = a;
        }
        while a.is_multiple_of(q) {
            a /= q;
            let chi = if q == 2 {
                match d.rem_euclid(8) {
                    1 | 7 => 1,
                    3 | 5 => -1,
                    _ => 0,
                }
            } else {
                let r = d.rem_euclid(q as i64) as u64;
                if r == 0 {
                    0
                } else if pow_mod(r, (q - 1) / 2, q) == 1 {
                    1
                } else {
                    -1
                }
            };
            out *= chi;
        }
        q += 1;
    }
    out
}

fn field_disc(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        4 * p as i64
    }
}

/// `ζ_F(-1) = B_{2,χ}/24` for `F = Q(√p)`, where
/// `B_{2,χ} = D Σ_{a=1}^{D} χ(a) (a²/D² - a/D + 1/6)`.
pub fn zeta_oracle(p: u64) -> Rational {
    let d = field_disc(p);
    let mut s2 = 0i128;
    let mut s1 = 0i128;
    let mut s0 = 0i128;
    for a in 1..=d {
        let chi = kron_oracle(d, a as u64) as i128;
        s2 += chi * (a as i128) * (a as i128);
        s1 += chi * a as i128;
        s0 += chi;
    }
    // D·(s2/D² - s1/D + s0/6) = s2/D - s1 + D·s0/6
    let d = d as i128;
    let b2 = Rational::new(s2, d).unwrap() - Rational::from_integer(s1) + Rational::new(d * s0, 6).unwrap();
    b2 / Rational::from_integer(24)
}

/// Natural log of a positive big integer.
fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 60 {
        let v: u64 = x.try_into().unwrap();
        return (v as f64).ln();
    }
    let shift = bits - 60;
    let top: u64 = (x >> shift).try_into().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log ε` from `ε = x/d + √(x²/d² - N)`, `N = ±1`.
fn ln_epsilon(p: u64) -> f64 {
    let u = fundamental_unit(p).unwrap();
    let ln_t = ln_big(&u.x) - (u.denominator as f64).ln();
    let t = ln_t.exp();
    let n = u.norm_sign as f64;
    // ln(t + √(t² - n)) = ln t + ln(1 + √(1 - n/t²))
    ln_t + (1.0 + (1.0 - n / (t * t)).sqrt()).ln()
}

/// `h(Q(√p))` from Dirichlet's formula for real quadratic fields,
/// `h log ε = -½ Σ_{0<a<D} χ(a) log sin(πa/D)`. The sum is evaluated in
/// floating point and the result must be within 1e-6 of an integer.
pub fn h_real_oracle(p: u64) -> u64 {
    let d = field_disc(p);
    let mut s = 0.0f64;
    for a in 1..d {
        let chi = kron_oracle(d, a as u64);
        if chi != 0 {
            s += chi as f64 * (std::f64::consts::PI * a as f64 / d as f64).sin().ln();
        }
    }
    let h = -0.5 * s / ln_epsilon(p);
    let r = h.round();
    assert!(
        (h - r).abs() < 1e-6 && r >= 1.0,
        "analytic class number for p = {p} is {h}"
    );
    r as u64
}
