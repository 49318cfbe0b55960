//! Mass formulas for orders in a totally definite quaternion algebra and the
//! size of the spinor class group.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::{require_prime, Rational};
use crate::cm::PrimeId;
use crate::error::{Error, Result};
use crate::quad::FieldInvariants;

/// Local data of an order `O` at one prime `𝔭` dividing `𝔡(O)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderLocalProfile {
    pub prime: PrimeId,
    pub residue_norm: u64,
    pub eichler_invariant: i8,
    pub discriminant_valuation: u32,
}

impl OrderLocalProfile {
    /// Accepts `e_𝔭 = 0`; [`OrderProfile::new`] is where that case is refused.
    pub fn new(prime: PrimeId, residue_norm: u64, eichler_invariant: i8, discriminant_valuation: u32) -> Result<Self> {
        let local = Self {
            prime,
            residue_norm,
            eichler_invariant,
            discriminant_valuation,
        };
        local.check()?;
        Ok(local)
    }

    fn check(&self) -> Result<()> {
        if self.residue_norm < 2 {
            return Err(Error::InvalidArgument(format!(
                "residue norm at {} must be at least 2",
                self.prime
            )));
        }
        if !(-1..=2).contains(&self.eichler_invariant) {
            return Err(Error::InvalidArgument(format!(
                "Eichler invariant at {} must lie in {{-1, 0, 1, 2}}",
                self.prime
            )));
        }
        if (self.eichler_invariant == 2) != (self.discriminant_valuation == 0) {
            return Err(Error::InvalidArgument(format!(
                "at {}: e = 2 exactly when the discriminant valuation is 0",
                self.prime
            )));
        }
        Ok(())
    }

    /// `(1 - N⁻²) / (1 - e N⁻¹)`.
    pub fn local_factor(&self) -> Rational {
        let n = Rational::from(self.residue_norm);
        let inv = n.recip().expect("residue norm is nonzero");
        let e = Rational::from(self.eichler_invariant as i64);
        (Rational::one() - &inv * &inv) / (Rational::one() - e * inv)
    }
}

/// A quaternion order described by its field, its local profiles at the
/// primes dividing `𝔡(O)`, and the two unit indices entering `|SCl(O)|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderProfile {
    field: FieldInvariants,
    locals: Vec<OrderLocalProfile>,
    norm_unit_index: u64,
    u_value: u64,
}

impl OrderProfile {
    pub fn new(
        field: FieldInvariants,
        locals: Vec<OrderLocalProfile>,
        norm_unit_index: u64,
        u_value: u64,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for local in &locals {
            local.check()?;
            if !seen.insert(&local.prime) {
                return Err(Error::InvalidArgument(format!("prime {} listed twice", local.prime)));
            }
            if local.eichler_invariant == 0 {
                return Err(Error::ZeroEichlerInvariant(local.prime.to_string()));
            }
            if local.discriminant_valuation == 0 {
                return Err(Error::InvalidArgument(format!(
                    "{} does not divide the discriminant and must not be listed",
                    local.prime
                )));
            }
        }
        if norm_unit_index == 0 || u_value == 0 {
            return Err(Error::InvalidArgument("unit indices must be positive".into()));
        }
        if norm_unit_index != 1 {
            return Err(Error::Inconsistent(format!(
                "norm unit index {norm_unit_index} must be 1 when every Eichler invariant is nonzero"
            )));
        }
        let profile = Self {
            field,
            locals,
            norm_unit_index,
            u_value,
        };
        let scl = profile.scl_size_unchecked();
        if scl != profile.field.narrow_class_number() {
            return Err(Error::Inconsistent(format!(
                "|SCl(O)| = h·[Ô_F^×:Nr(Ô^×)]·u = {scl} differs from h⁺ = {}",
                profile.field.narrow_class_number()
            )));
        }
        Ok(profile)
    }

    /// The maximal order of `D_{∞1,∞2}` over `Q(√p)`.
    pub fn maximal_qsqrtp(field: FieldInvariants, p: u64) -> Result<Self> {
        Self::new(field, Vec::new(), 1, u_of_order_qsqrtp(p)?)
    }

    pub fn field(&self) -> &FieldInvariants {
        &self.field
    }

    pub fn locals(&self) -> &[OrderLocalProfile] {
        &self.locals
    }

    pub fn norm_unit_index(&self) -> u64 {
        self.norm_unit_index
    }

    pub fn u_value(&self) -> u64 {
        self.u_value
    }

    /// `Nm(𝔡(O))`.
    pub fn discriminant_norm(&self) -> BigInt {
        self.locals
            .iter()
            .map(|l| BigInt::from(l.residue_norm).pow(l.discriminant_valuation))
            .product()
    }

    fn local_product(&self) -> Rational {
        self.locals.iter().map(OrderLocalProfile::local_factor).product()
    }

    /// `|ζ_F(-1)|·Nm(𝔡(O))·Π_𝔭 (1 - N⁻²)/(1 - eN⁻¹)`, the common core of the
    /// three masses.
    fn mass_core(&self) -> Rational {
        self.field.abs_zeta() * Rational::from(self.discriminant_norm()) * self.local_product()
    }

    fn scl_size_unchecked(&self) -> u64 {
        self.field.class_number() * self.norm_unit_index * self.u_value
    }
}

fn two_pow(k: u32) -> Rational {
    Rational::from(BigInt::from(2u32).pow(k))
}

/// `Mass¹(O) = |ζ_F(-1)| Nm(𝔡(O)) / (2ⁿ [Ô_F^×:Nr(Ô^×)]) · Π_𝔭 (1 - N⁻²)/(1 - eN⁻¹)`.
pub fn mass1(order: &OrderProfile) -> Rational {
    order.mass_core() / (two_pow(order.field.degree()) * Rational::from(order.norm_unit_index))
}

/// `Mass(O) = h(F) |ζ_F(-1)| Nm(𝔡(O)) / 2^(n-1) · Π_𝔭 (…)`.
pub fn mass_total(order: &OrderProfile) -> Rational {
    Rational::from(order.field.class_number()) * order.mass_core() / two_pow(order.field.degree() - 1)
}

/// `Mass_sc(O) = Mass(O) / |SCl(O)|`, written out with `u(O)`.
pub fn mass_sc(order: &OrderProfile) -> Rational {
    order.mass_core()
        / (two_pow(order.field.degree() - 1) * Rational::from(order.norm_unit_index) * Rational::from(order.u_value))
}

/// `|SCl(O)| = h(F)·[Ô_F^×:Nr(Ô^×)]·u(O)`, which equals `h⁺(F)` for every
/// order the profile accepts.
pub fn scl_size(order: &OrderProfile) -> u64 {
    order.scl_size_unchecked()
}

/// `u(O) = [O_{F,+}^× : O_F^{×2}]` for a maximal order over `Q(√p)`: 2 exactly
/// when the fundamental unit is totally positive, i.e. `p ≡ 3 (mod 4)`.
pub fn u_of_order_qsqrtp(p: u64) -> Result<u64> {
    require_prime(p)?;
    Ok(if p % 4 == 3 { 2 } else { 1 })
}
