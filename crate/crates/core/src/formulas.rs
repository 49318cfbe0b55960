//! The class number formulas for `h¹(O)` and `h_sc(O)`, together with the
//! spinor and classical trace formula values they are assembled from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::arith::{expect_integer, Rational};
use crate::cm::CmOrderSpec;
use crate::error::{Error, Result};
use crate::mass::{mass1, mass_sc, scl_size, OrderProfile};
use crate::selectivity::SpinorGenusTag;

/// A CM order with every datum reduced to a number, for one target genus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolvedCmOrder {
    pub label: String,
    pub mu_order: u32,
    pub unit_index: u32,
    /// `h(B)`.
    pub class_number: u64,
    /// `Π_𝔭 m_𝔭(B)`.
    pub m_product: Rational,
    /// `s(𝒢, K)`.
    pub selective: bool,
    /// `Δ(B, O)`.
    pub delta: u8,
}

impl ResolvedCmOrder {
    /// Resolves a spec whose class datum is explicit or an exact ratio.
    pub fn from_spec(spec: &CmOrderSpec, h_f: u64, m_product: Rational, tag: SpinorGenusTag) -> Result<Self> {
        Ok(Self {
            label: spec.label.clone(),
            mu_order: spec.mu_order,
            unit_index: spec.unit_index,
            class_number: spec.class_number(h_f)?,
            m_product,
            selective: spec.in_spinor_genus_field,
            delta: spec.delta(tag),
        })
    }

    pub fn s(&self) -> u32 {
        self.selective as u32
    }

    /// `M(B) = h(B)/w(B) · Π_𝔭 m_𝔭(B)`.
    pub fn big_m(&self) -> Rational {
        Rational::from(self.class_number) / Rational::from(self.unit_index as u64) * &self.m_product
    }

    /// `2^s · Δ`.
    fn weight(&self) -> Rational {
        Rational::from((self.delta as u64) << self.s())
    }
}

/// Everything the formulas sum over: `ℬ¹` for `h¹`, and `ℬ` for `h_sc`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaInput {
    pub order: OrderProfile,
    pub b1: Vec<ResolvedCmOrder>,
    pub b: Option<Vec<ResolvedCmOrder>>,
}

impl FormulaInput {
    pub fn new(order: OrderProfile, b1: Vec<ResolvedCmOrder>, b: Option<Vec<ResolvedCmOrder>>) -> Result<Self> {
        for r in b1.iter().chain(b.iter().flatten()) {
            if r.mu_order < 2 || r.mu_order % 2 != 0 || r.unit_index == 0 || r.delta > 1 {
                return Err(Error::InvalidArgument(format!(
                    "{}: |μ(B)| must be even and at least 2, w(B) positive, Δ in {{0, 1}}",
                    r.label
                )));
            }
        }
        if let Some(r) = b1.iter().find(|r| r.mu_order <= 2) {
            return Err(Error::Inconsistent(format!(
                "{} has |μ(B)| = 2 and is not in ℬ¹",
                r.label
            )));
        }
        if let Some(b) = &b {
            if let Some(r) = b.iter().find(|r| r.unit_index <= 1) {
                return Err(Error::Inconsistent(format!("{} has w(B) = 1 and is not in ℬ", r.label)));
            }
            let labels: BTreeSet<&str> = b.iter().map(|r| r.label.as_str()).collect();
            if let Some(r) = b1.iter().find(|r| !labels.contains(r.label.as_str())) {
                return Err(Error::Inconsistent(format!("{} is in ℬ¹ but not in ℬ", r.label)));
            }
        }
        Ok(Self { order, b1, b })
    }
}

/// One summand of a class number formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub label: String,
    /// `2^s·Δ·(|μ(B)| - 2)` or `2^s·Δ·(w(B) - 1)`.
    pub coefficient: Rational,
    pub big_m: Rational,
    /// `prefactor · coefficient · M(B)`.
    pub contribution: Rational,
}

/// A class number formula written out term by term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Breakdown {
    pub quantity: String,
    pub mass_term: Rational,
    pub prefactor: Rational,
    pub terms: Vec<Term>,
    pub total: Rational,
}

impl Breakdown {
    fn assemble(
        quantity: &str,
        mass_term: Rational,
        prefactor: Rational,
        rows: &[ResolvedCmOrder],
        coefficient: impl Fn(&ResolvedCmOrder) -> Rational,
    ) -> Self {
        let terms: Vec<Term> = rows
            .iter()
            .map(|r| {
                let c = coefficient(r);
                let big_m = r.big_m();
                let contribution = &prefactor * &c * &big_m;
                Term {
                    label: r.label.clone(),
                    coefficient: c,
                    big_m,
                    contribution,
                }
            })
            .collect();
        let total = terms.iter().fold(mass_term.clone(), |acc, t| acc + &t.contribution);
        Self {
            quantity: quantity.to_string(),
            mass_term,
            prefactor,
            terms,
            total,
        }
    }

    /// The total as a positive integer.
    pub fn integer(&self) -> Result<u64> {
        expect_integer(&self.quantity, &self.total, || self.to_string())
    }
}

impl fmt::Display for Breakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  {} breakdown:", self.quantity)?;
        writeln!(f, "    mass term = {}", self.mass_term)?;
        writeln!(f, "    prefactor = {}", self.prefactor)?;
        for t in &self.terms {
            writeln!(
                f,
                "    {}: coefficient {}, M(B) = {}, contribution {}",
                t.label, t.coefficient, t.big_m, t.contribution
            )?;
        }
        write!(f, "    total = {}", self.total)
    }
}

/// `h¹(O) = 2 Mass¹(O) + 1/(4h(F)) Σ_{ℬ¹} 2^s Δ (|μ(B)| - 2) M(B)`.
pub fn h1_breakdown(input: &FormulaInput) -> Breakdown {
    let h = input.order.field().class_number();
    Breakdown::assemble(
        "h1",
        Rational::from(2u64) * mass1(&input.order),
        Rational::ratio(1, 4 * h as i64),
        &input.b1,
        |r| r.weight() * Rational::from(r.mu_order as i64 - 2),
    )
}

pub fn h1(input: &FormulaInput) -> Result<u64> {
    h1_breakdown(input).integer()
}

/// `h_sc(O) = Mass_sc(O) + 1/(2h⁺(F)) Σ_ℬ 2^s Δ (w(B) - 1) M(B)`.
pub fn h_sc_breakdown(input: &FormulaInput) -> Result<Breakdown> {
    let b = input
        .b
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("h_sc needs the list ℬ of CM orders with w(B) > 1".into()))?;
    let h_plus = input.order.field().narrow_class_number();
    Ok(Breakdown::assemble(
        "h_sc",
        mass_sc(&input.order),
        Rational::ratio(1, 2 * h_plus as i64),
        b,
        |r| r.weight() * Rational::from(r.unit_index as i64 - 1),
    ))
}

pub fn h_sc(input: &FormulaInput) -> Result<u64> {
    h_sc_breakdown(input)?.integer()
}

/// `Σ_{[I] ∈ Cl(O, [J]_sc)} m(B, O_l(I), O_l(I)^×) = 2^s Δ h(B) / |SCl(O)| · Π_𝔭 m_𝔭(B)`.
pub fn spinor_trace_sum(b: &ResolvedCmOrder, scl_size: u64, delta: u8, s: u8) -> Rational {
    let weight = Rational::from((delta as u64) << s);
    weight * Rational::from(b.class_number) * &b.m_product / Rational::from(scl_size)
}

/// `Σ_{[I] ∈ Cl(O)} m(B, O_l(I), O_l(I)^×) = h(B) Π_𝔭 m_𝔭(B)`.
pub fn classical_trace_rhs(b: &ResolvedCmOrder) -> Rational {
    Rational::from(b.class_number) * &b.m_product
}

/// Summing the spinor trace formula over all spinor classes gives the
/// classical one. A selective `B` has `Δ = 1` on exactly half of them.
pub fn trace_aggregation_holds(b: &ResolvedCmOrder, scl_size: u64) -> bool {
    let s = b.selective as u8;
    if s == 1 && !scl_size.is_multiple_of(2) {
        return false;
    }
    let selected = scl_size >> s;
    let per_class = spinor_trace_sum(b, scl_size, 1, s);
    let unselected = spinor_trace_sum(b, scl_size, 0, s);
    per_class * Rational::from(selected) + unselected * Rational::from(scl_size - selected) == classical_trace_rhs(b)
}

/// The inner sums of the general formula for `h¹(O)` over the spinor class
/// of `O`, evaluated by the spinor trace formula.
pub fn spinor_trace_inner_sums(input: &FormulaInput) -> BTreeMap<String, Rational> {
    let scl = scl_size(&input.order);
    input
        .b1
        .iter()
        .map(|r| (r.label.clone(), spinor_trace_sum(r, scl, r.delta, r.selective as u8)))
        .collect()
}

/// `h¹(O) = 2 Mass¹(O) + u(O)/4 Σ_{ℬ¹} (|μ(B)| - 2)/w(B) · inner(B)` with
/// caller-supplied inner sums. Integrality is asserted only when `complete`.
pub fn h1_general_thm(
    order: &OrderProfile,
    b1: &[ResolvedCmOrder],
    inner_sums: &BTreeMap<String, Rational>,
    complete: bool,
) -> Result<Rational> {
    let mut total = Rational::from(2u64) * mass1(order);
    let u = Rational::ratio(order.u_value() as i64, 4);
    for r in b1 {
        let inner = inner_sums
            .get(&r.label)
            .ok_or_else(|| Error::InvalidArgument(format!("no embedding sum supplied for {}", r.label)))?;
        let ratio = Rational::ratio(r.mu_order as i64 - 2, r.unit_index as i64);
        total += &(&u * &ratio * inner);
    }
    if complete {
        expect_integer("h1", &total, || format!("  general formula total = {total}"))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::real_quadratic_invariants;

    fn order(p: u64) -> OrderProfile {
        OrderProfile::maximal_qsqrtp(real_quadratic_invariants(p).unwrap(), p).unwrap()
    }

    fn cm(label: &str, mu: u32, w: u32, h: u64, s: bool, delta: u8) -> ResolvedCmOrder {
        ResolvedCmOrder {
            label: label.into(),
            mu_order: mu,
            unit_index: w,
            class_number: h,
            m_product: Rational::one(),
            selective: s,
            delta,
        }
    }

    /// p = 13: O_K1 with h(-13)/2 = 1, O_K3 with h(-39)/2 = 2.
    fn input13() -> FormulaInput {
        let rows = vec![cm("O_K1", 4, 2, 1, false, 1), cm("O_K3", 6, 3, 2, false, 1)];
        FormulaInput::new(order(13), rows.clone(), Some(rows)).unwrap()
    }

    #[test]
    fn p13_values() {
        let input = input13();
        assert_eq!(h1(&input).unwrap(), 1);
        assert_eq!(h_sc(&input).unwrap(), 1);
        let inner = spinor_trace_inner_sums(&input);
        let general = h1_general_thm(&input.order, &input.b1, &inner, true).unwrap();
        assert_eq!(general, Rational::one());
    }

    #[test]
    fn p7_values() {
        // σ = 1, h(-7) = 1, h(-14) = 4, h(-21) = 4, h(F) = 1
        for (tag, expected) in [
            (SpinorGenusTag::Principal, (2, 2)),
            (SpinorGenusTag::Nonprincipal, (1, 1)),
        ] {
            let d = |p: u8, n: u8| if tag == SpinorGenusTag::Principal { p } else { n };
            let b1 = vec![
                cm("O_F[√-1]", 4, 2, 1, true, d(1, 0)),
                cm("B_{1,2}", 4, 4, 1, true, d(1, 0)),
                cm("O_K1", 4, 4, 1, true, d(1, 0)),
                cm("O_K3", 6, 3, 2, false, 1),
            ];
            let mut b = b1.clone();
            b.push(cm("O_K2", 2, 2, 4, false, 1));
            let input = FormulaInput::new(order(7), b1, Some(b)).unwrap();
            assert_eq!((h1(&input).unwrap(), h_sc(&input).unwrap()), expected, "{tag}");
        }
    }

    #[test]
    fn non_integral_is_an_error_with_dump() {
        let rows = vec![cm("O_K1", 4, 2, 1, false, 1)];
        let input = FormulaInput::new(order(13), rows, None).unwrap();
        match h1(&input) {
            Err(Error::NonIntegral { quantity, dump, .. }) => {
                assert_eq!(quantity, "h1");
                assert!(dump.contains("O_K1"));
            }
            other => panic!("expected NonIntegral, got {other:?}"),
        }
        assert!(h_sc(&input).is_err());
    }

    #[test]
    fn input_validation() {
        let small = vec![cm("O_K2", 2, 2, 1, false, 1)];
        assert!(FormulaInput::new(order(13), small, None).is_err());
        let b1 = vec![cm("O_K1", 4, 2, 1, false, 1)];
        let b = vec![cm("O_K3", 6, 3, 2, false, 1)];
        assert!(FormulaInput::new(order(13), b1, Some(b)).is_err());
    }

    #[test]
    fn trace_sums() {
        let b = cm("B", 4, 2, 4, false, 1);
        assert!(spinor_trace_sum(&b, 2, 0, 1).is_zero());
        assert_eq!(spinor_trace_sum(&b, 2, 1, 0), Rational::from(2u64));
        let k1 = cm("O_K1", 4, 4, 1, true, 1);
        assert_eq!(spinor_trace_sum(&k1, 2, 1, 1), Rational::one());
        assert_eq!(classical_trace_rhs(&cm("B", 4, 2, 1, false, 1)), Rational::one());
        let mut two = cm("B", 4, 2, 4, false, 1);
        two.m_product = Rational::from(2u64);
        assert_eq!(classical_trace_rhs(&two), Rational::from(8u64));
        two.m_product = Rational::zero();
        assert!(classical_trace_rhs(&two).is_zero());
        assert!(trace_aggregation_holds(&k1, 2));
        assert!(trace_aggregation_holds(&b, 2));
        assert!(!trace_aggregation_holds(&k1, 1));
    }

    #[test]
    fn general_theorem_direct() {
        let o = order(13);
        let empty = h1_general_thm(&o, &[], &BTreeMap::new(), false).unwrap();
        assert_eq!(empty, Rational::from(2u64) * mass1(&o));
        let o7 = order(7);
        let b = cm("B", 6, 4, 1, false, 1);
        let inner = BTreeMap::from([("B".to_string(), Rational::from(2u64))]);
        let v = h1_general_thm(&o7, std::slice::from_ref(&b), &inner, false).unwrap();
        assert_eq!(v, Rational::from(2u64) * mass1(&o7) + Rational::one());
        assert!(h1_general_thm(&o7, &[b], &BTreeMap::new(), false).is_err());
    }
}
