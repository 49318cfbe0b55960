//! Class numbers of maximal orders in `D_{∞1,∞2}` over `F = Q(√p)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{expect_integer, is_prime, kronecker, require_prime, Rational};
use crate::cm::{qsqrtp_b_tables, AuxClassNumbers, CmOrderSpec, QSqrtPBTable, Regime};
use crate::error::{Error, Result};
use crate::formulas::{
    h1_breakdown, h1_general_thm, h_sc_breakdown, spinor_trace_inner_sums, trace_aggregation_holds, FormulaInput,
    ResolvedCmOrder,
};
use crate::mass::{mass1, mass_sc, mass_total, scl_size, OrderProfile};
use crate::quad::{fundamental_unit, h_imag_nonsquare, real_quadratic_invariants, FieldInvariants};
use crate::selectivity::{
    delta_qsqrtp, k_in_sigma_eichler, spinor_genus_group_order_qsqrtp, CmExtension, GenusDescriptor, SpinorGenusTag,
};

/// Largest `p` accepted unless the caller raises the bound.
pub const DEFAULT_PMAX_CEILING: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Masses {
    pub mass1: Rational,
    pub mass_total: Rational,
    pub mass_sc: Rational,
}

impl Masses {
    pub fn of(order: &OrderProfile) -> Self {
        Self {
            mass1: mass1(order),
            mass_total: mass_total(order),
            mass_sc: mass_sc(order),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenusNumbers {
    pub h1: u64,
    pub h_sc: u64,
    pub type_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl IdentityCheck {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassNumberReport {
    pub p: u64,
    pub regime: Regime,
    pub field: FieldInvariants,
    pub fundamental_unit: String,
    pub auxiliary_class_numbers: AuxClassNumbers,
    /// `(2|p)`, reported for `p ≡ 3 (mod 4)`.
    pub kron2p: Option<i32>,
    pub masses: Masses,
    pub spinor_class_group_order: u64,
    pub spinor_genus_count: u32,
    pub per_genus: BTreeMap<SpinorGenusTag, GenusNumbers>,
    pub type_number_total: u64,
    pub b_tables: QSqrtPBTable,
    pub identities_checked: Vec<IdentityCheck>,
}

impl ClassNumberReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.identities_checked.iter().filter(|c| !c.passed)
    }

    pub fn all_checks_passed(&self) -> bool {
        self.failed_checks().next().is_none()
    }

    pub fn genus(&self, tag: SpinorGenusTag) -> Option<&GenusNumbers> {
        self.per_genus.get(&tag)
    }
}

/// `h(-p)`, `h(-2p)`, `h(-3p)` and `(2|p)`.
pub fn aux_class_numbers(p: u64) -> Result<AuxClassNumbers> {
    require_prime(p)?;
    let p = p as i64;
    Ok(AuxClassNumbers {
        h_minus_p: h_imag_nonsquare(-p)?,
        h_minus_2p: h_imag_nonsquare(-2 * p)?,
        h_minus_3p: h_imag_nonsquare(-3 * p)?,
        kron2p: kronecker(2, p),
    })
}

/// The maximal order of `D_{∞1,∞2}` over `Q(√p)`.
pub fn maximal_order(p: u64) -> Result<OrderProfile> {
    OrderProfile::maximal_qsqrtp(real_quadratic_invariants(p)?, p)
}

fn resolve_rows(
    rows: &[CmOrderSpec],
    aux: &AuxClassNumbers,
    h_f: u64,
    tag: SpinorGenusTag,
) -> Result<Vec<ResolvedCmOrder>> {
    // maximal orders: 𝔡(O) = O_F, so every m_𝔭(B) is 1
    rows.iter()
        .map(|r| ResolvedCmOrder::from_spec(&r.resolve(aux), h_f, Rational::one(), tag))
        .collect()
}

/// The formula input for the maximal orders in one spinor genus.
pub fn formula_input(p: u64, tag: SpinorGenusTag) -> Result<FormulaInput> {
    let order = maximal_order(p)?;
    let table = qsqrtp_b_tables(p)?;
    if !table.regime.genus_tags().contains(&tag) {
        return Err(Error::RegimeMismatch(format!("p = {p} has a single spinor genus")));
    }
    formula_input_from(order, &table, &aux_class_numbers(p)?, tag)
}

fn formula_input_from(
    order: OrderProfile,
    table: &QSqrtPBTable,
    aux: &AuxClassNumbers,
    tag: SpinorGenusTag,
) -> Result<FormulaInput> {
    let h_f = order.field().class_number();
    let b1 = resolve_rows(&table.b1, aux, h_f, tag)?;
    let b = resolve_rows(&table.b, aux, h_f, tag)?;
    FormulaInput::new(order, b1, Some(b))
}

fn sigma(aux: &AuxClassNumbers) -> i64 {
    aux.kron2p as i64
}

fn hq(n: u64, d: i64) -> Rational {
    Rational::from(n) / Rational::from(d)
}

/// `h¹` from the closed forms: `ζ/2 + h(-p)/8 + h(-3p)/6` for `p ≡ 1 (mod 4)`,
/// `ζ/2 + (11 - 3σ)h(-p)/8 + h(-3p)/6` and `ζ/2 + (3 - 3σ)h(-p)/8 + h(-3p)/6`
/// for the two genera when `p ≡ 3 (mod 4)`, and 1 for `p = 2, 3, 5`.
pub fn h1_closed_form(p: u64, tag: SpinorGenusTag) -> Result<Rational> {
    let regime = Regime::of(p)?;
    if !regime.genus_tags().contains(&tag) {
        return Err(Error::RegimeMismatch(format!("p = {p} has a single spinor genus")));
    }
    let zeta = real_quadratic_invariants(p)?.abs_zeta();
    let aux = aux_class_numbers(p)?;
    let half_zeta = zeta / Rational::from(2u64);
    Ok(match regime {
        Regime::P2 | Regime::P3 | Regime::P5 => Rational::one(),
        Regime::OneModFour => half_zeta + hq(aux.h_minus_p, 8) + hq(aux.h_minus_3p, 6),
        Regime::ThreeModFour => {
            let c = match tag {
                SpinorGenusTag::Principal => 11 - 3 * sigma(&aux),
                SpinorGenusTag::Nonprincipal => 3 - 3 * sigma(&aux),
            };
            half_zeta + Rational::from(c) * hq(aux.h_minus_p, 8) + hq(aux.h_minus_3p, 6)
        }
    })
}

fn require_three_mod_four(p: u64) -> Result<AuxClassNumbers> {
    if Regime::of(p)? != Regime::ThreeModFour {
        return Err(Error::RegimeMismatch(format!(
            "expected p ≡ 3 mod 4 and p ≥ 7, got {p}"
        )));
    }
    aux_class_numbers(p)
}

/// `|Tp^±(D)| = ζ/4 + c·h(-p)/16 + h(-2p)/8 + h(-3p)/12` with `c = 17 - σ`
/// for the principal genus and `c = 9 - 9σ` for the other.
pub fn spinor_type_number_closed_form(p: u64, tag: SpinorGenusTag) -> Result<Rational> {
    let aux = require_three_mod_four(p)?;
    let zeta = real_quadratic_invariants(p)?.abs_zeta();
    let c = match tag {
        SpinorGenusTag::Principal => 17 - sigma(&aux),
        SpinorGenusTag::Nonprincipal => 9 - 9 * sigma(&aux),
    };
    Ok(zeta / Rational::from(4u64)
        + Rational::from(c) * hq(aux.h_minus_p, 16)
        + hq(aux.h_minus_2p, 8)
        + hq(aux.h_minus_3p, 12))
}

/// `|Tp(D)| = ζ/2 + (13 - 5σ)h(-p)/8 + h(-2p)/4 + h(-3p)/6` as a rational.
pub fn type_number_total_closed_form(p: u64) -> Result<Rational> {
    let aux = require_three_mod_four(p)?;
    let zeta = real_quadratic_invariants(p)?.abs_zeta();
    Ok(zeta / Rational::from(2u64)
        + Rational::from(13 - 5 * sigma(&aux)) * hq(aux.h_minus_p, 8)
        + hq(aux.h_minus_2p, 4)
        + hq(aux.h_minus_3p, 6))
}

/// `|Tp(D)|` for `p ≡ 3 (mod 4)`, `p ≥ 7`.
pub fn type_number_total(p: u64) -> Result<u64> {
    let v = type_number_total_closed_form(p)?;
    expect_integer("|Tp|", &v, || format!("  p = {p}, |Tp| = {v}"))
}

/// `(17 - σ) + (9 - 9σ) = 2(13 - 5σ)` for `σ = ±1`.
pub fn coefficient_identity_holds() -> bool {
    [-1i64, 1].iter().all(|&s| (17 - s) + (9 - 9 * s) == 2 * (13 - 5 * s))
}

pub fn report(p: u64) -> Result<ClassNumberReport> {
    report_with_ceiling(p, DEFAULT_PMAX_CEILING)
}

pub fn report_with_ceiling(p: u64, ceiling: u64) -> Result<ClassNumberReport> {
    if p > ceiling {
        return Err(Error::AboveCeiling { p, ceiling });
    }
    require_prime(p)?;
    let regime = Regime::of(p)?;
    let field = real_quadratic_invariants(p)?;
    let unit = fundamental_unit(p)?;
    let aux = aux_class_numbers(p)?;
    let order = OrderProfile::maximal_qsqrtp(field.clone(), p)?;
    let table = qsqrtp_b_tables(p)?;
    let masses = Masses::of(&order);
    let zeta = field.abs_zeta();
    let mut checks = Vec::new();
    let mut per_genus = BTreeMap::new();
    let mut h1_values = BTreeMap::new();

    for &tag in regime.genus_tags() {
        let input = formula_input_from(order.clone(), &table, &aux, tag)?;
        let h1_b = h1_breakdown(&input);
        let hsc_b = h_sc_breakdown(&input)?;
        let h1 = h1_b.integer()?;
        let h_sc = hsc_b.integer()?;

        let closed = h1_closed_form(p, tag)?;
        checks.push(IdentityCheck::new(
            &format!("h1_closed_form[{tag}]"),
            closed == h1_b.total,
            format!("formula {} vs closed form {closed}", h1_b.total),
        ));
        let inner = spinor_trace_inner_sums(&input);
        let general = h1_general_thm(&order, &input.b1, &inner, true)?;
        checks.push(IdentityCheck::new(
            &format!("h1_general_theorem[{tag}]"),
            general == h1_b.total,
            format!("general formula with spinor trace sums gives {general}"),
        ));
        checks.push(IdentityCheck::new(
            &format!("h1_ge_h_sc[{tag}]"),
            h1 >= h_sc,
            format!("h1 = {h1}, h_sc = {h_sc}"),
        ));

        let type_count = match regime {
            Regime::ThreeModFour => {
                let v = spinor_type_number_closed_form(p, tag)?;
                expect_integer(&format!("|Tp^{tag}|"), &v, || format!("  p = {p}, value {v}"))?
            }
            Regime::P3 => 1,
            // one spinor genus: Tp_sg(O) = Tp(D), in bijection with Cl_sc(O)
            _ => h_sc,
        };
        checks.push(IdentityCheck::new(
            &format!("h_sc_equals_type_count[{tag}]"),
            h_sc == type_count,
            format!("h_sc = {h_sc}, type count = {type_count}"),
        ));
        h1_values.insert(tag, h1);
        per_genus.insert(tag, GenusNumbers { h1, h_sc, type_count });
    }

    let type_sum: u64 = per_genus.values().map(|g| g.type_count).sum();
    let type_number_total = match regime {
        Regime::ThreeModFour => {
            let total = type_number_total(p)?;
            checks.push(IdentityCheck::new(
                "type_number_aggregation",
                type_sum == total,
                format!("|Tp+| + |Tp-| = {type_sum}, |Tp| = {total}"),
            ));
            let diff = h1_values[&SpinorGenusTag::Principal] as i128 - h1_values[&SpinorGenusTag::Nonprincipal] as i128;
            checks.push(IdentityCheck::new(
                "h1_difference",
                diff == aux.h_minus_p as i128,
                format!("h1(principal) - h1(nonprincipal) = {diff}, h(-p) = {}", aux.h_minus_p),
            ));
            total
        }
        Regime::P3 => {
            checks.push(IdentityCheck::new(
                "type_number_total_p3",
                type_sum == 2,
                format!("|Tp| = {type_sum}"),
            ));
            type_sum
        }
        _ => {
            let g = per_genus[&SpinorGenusTag::Principal];
            checks.push(IdentityCheck::new(
                "h_sc_equals_h1",
                g.h1 == g.h_sc,
                format!("h1 = {}, h_sc = {}", g.h1, g.h_sc),
            ));
            type_sum
        }
    };

    let printed_zeta = match p {
        2 => Some(Rational::ratio(1, 12)),
        3 => Some(Rational::ratio(1, 6)),
        5 => Some(Rational::ratio(1, 30)),
        _ => None,
    };
    if let Some(expected) = printed_zeta {
        checks.push(IdentityCheck::new(
            "zeta_printed_value",
            zeta == expected,
            format!("ζ_F(-1) = {zeta}, printed {expected}"),
        ));
    }
    if regime.has_two_spinor_genera() {
        let expected = &zeta / Rational::from(4u64);
        checks.push(IdentityCheck::new(
            "mass_sc_is_quarter_zeta",
            masses.mass_sc == expected,
            format!("Mass_sc = {}, ζ_F(-1)/4 = {expected}", masses.mass_sc),
        ));
    }
    let scl = scl_size(&order);
    checks.push(IdentityCheck::new(
        "mass_relations",
        &masses.mass_sc * &Rational::from(scl) == masses.mass_total
            && &masses.mass_total / &masses.mass1 == Rational::from(2 * field.class_number())
            && &masses.mass1 * &Rational::from(2u64) == &zeta / Rational::from(2u64),
        format!(
            "Mass¹ = {}, Mass = {}, Mass_sc = {}, |SCl| = {scl}",
            masses.mass1, masses.mass_total, masses.mass_sc
        ),
    ));
    checks.push(IdentityCheck::new(
        "unit_norm_law",
        unit.is_totally_positive() == (p % 4 == 3),
        format!("ε = {unit}"),
    ));
    checks.push(delta_check(p, &table)?);
    checks.push(selectivity_check(p, &table)?);
    let trace_ok = table
        .b
        .iter()
        .map(|r| {
            ResolvedCmOrder::from_spec(
                &r.resolve(&aux),
                field.class_number(),
                Rational::one(),
                SpinorGenusTag::Principal,
            )
        })
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|r| trace_aggregation_holds(r, scl));
    checks.push(IdentityCheck::new(
        "trace_aggregation",
        trace_ok,
        "spinor trace sums over SCl(O) add up to the classical trace",
    ));
    checks.push(IdentityCheck::new(
        "coefficient_identity",
        coefficient_identity_holds(),
        "(17-σ) + (9-9σ) = 2(13-5σ)",
    ));

    Ok(ClassNumberReport {
        p,
        regime,
        fundamental_unit: unit.to_string(),
        kron2p: (p % 4 == 3).then_some(aux.kron2p),
        auxiliary_class_numbers: aux,
        masses,
        spinor_class_group_order: scl,
        spinor_genus_count: spinor_genus_group_order_qsqrtp(p)?,
        per_genus,
        type_number_total,
        b_tables: table,
        identities_checked: checks,
        field,
    })
}

/// The Δ columns against the values propagated from `Δ(O_{K₁}, O) = 1`.
fn delta_check(p: u64, table: &QSqrtPBTable) -> Result<IdentityCheck> {
    let mut mismatches = Vec::new();
    for row in &table.b {
        for &tag in table.regime.genus_tags() {
            let derived = delta_qsqrtp(p, &row.label, tag)?;
            if derived != row.delta(tag) {
                mismatches.push(format!(
                    "{} {tag}: table {} derived {derived}",
                    row.label,
                    row.delta(tag)
                ));
            }
        }
    }
    Ok(IdentityCheck::new(
        "delta_propagation",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "Δ columns agree with propagation from O_K1".to_string()
        } else {
            mismatches.join("; ")
        },
    ))
}

/// The `s` column against the spinor genus field criterion.
fn selectivity_check(p: u64, table: &QSqrtPBTable) -> Result<IdentityCheck> {
    let genus = GenusDescriptor::maximal_qsqrtp();
    let mut mismatches = Vec::new();
    for row in &table.b {
        if let Some(m) = row.cm_radicand {
            let s = k_in_sigma_eichler(&genus, &CmExtension::over_qsqrtp(p, m)?)?;
            if s != row.in_spinor_genus_field {
                mismatches.push(format!("{}: table s = {}, criterion {}", row.label, row.s(), s as u8));
            }
        }
    }
    Ok(IdentityCheck::new(
        "selectivity_flags",
        mismatches.is_empty(),
        mismatches.join("; "),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckSelection {
    All,
    Identities,
    Integrality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchRow {
    pub p: u64,
    pub regime: Regime,
    pub zeta_minus_one: Rational,
    pub h: u64,
    pub h_plus: u64,
    pub per_genus: BTreeMap<SpinorGenusTag, GenusNumbers>,
    pub type_number_total: u64,
    pub passed: bool,
    pub failed_checks: Vec<IdentityCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchSummary {
    pub rows: Vec<BatchRow>,
    /// The smallest `p` with a failed identity.
    pub first_failure: Option<BatchRow>,
}

impl BatchSummary {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Reports for every prime in `[p_min, p_max]`, computed in parallel and
/// returned in increasing order. An integrality failure anywhere is returned
/// as the error for the smallest offending `p`.
pub fn batch(p_min: u64, p_max: u64, checks: CheckSelection, ceiling: u64) -> Result<BatchSummary> {
    if p_max > ceiling {
        return Err(Error::AboveCeiling { p: p_max, ceiling });
    }
    let primes: Vec<u64> = (p_min.max(2)..=p_max).filter(|&p| is_prime(p)).collect();
    let reports: Vec<Result<ClassNumberReport>> = primes.par_iter().map(|&p| report_with_ceiling(p, ceiling)).collect();
    let mut rows = Vec::with_capacity(reports.len());
    for (p, r) in primes.iter().zip(reports) {
        let r = r.map_err(|e| match e {
            Error::NonIntegral { quantity, value, dump } => Error::NonIntegral {
                quantity: format!("{quantity} at p = {p}"),
                value,
                dump,
            },
            Error::Inconsistent(msg) => Error::Inconsistent(format!("p = {p}: {msg}")),
            other => other,
        })?;
        let failed_checks: Vec<IdentityCheck> = match checks {
            CheckSelection::Integrality => Vec::new(),
            _ => r.failed_checks().cloned().collect(),
        };
        rows.push(BatchRow {
            p: r.p,
            regime: r.regime,
            zeta_minus_one: r.field.zeta_minus_one().clone(),
            h: r.field.class_number(),
            h_plus: r.field.narrow_class_number(),
            per_genus: r.per_genus,
            type_number_total: r.type_number_total,
            passed: failed_checks.is_empty(),
            failed_checks,
        });
    }
    let first_failure = rows.iter().find(|r| !r.passed).cloned();
    Ok(BatchSummary { rows, first_failure })
}
