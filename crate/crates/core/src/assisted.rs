//! Assisted mode: the class number formulas for a user-described field,
//! order and list of CM orders.
//!
//! Nothing here can verify the supplied invariants. `ζ_F(-1)`, `h`, `h⁺`,
//! `u(O)` and every CM datum are taken on trust; only their mutual
//! consistency is checked.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::Rational;
use crate::cm::{qsqrtp_b_tables, PrimeId};
use crate::error::{Error, Result, ValidationIssue};
use crate::formulas::{h1_breakdown, h_sc_breakdown, Breakdown, FormulaInput, ResolvedCmOrder};
use crate::mass::{scl_size, OrderLocalProfile, OrderProfile};
use crate::qsqrtp::{aux_class_numbers, maximal_order, Masses};
use crate::selectivity::SpinorGenusTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    H1,
    HSc,
    Both,
}

impl Which {
    pub fn wants_h1(self) -> bool {
        matches!(self, Which::H1 | Which::Both)
    }

    pub fn wants_h_sc(self) -> bool {
        matches!(self, Which::HSc | Which::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssistedConfig {
    pub which: Which,
    pub target_genus: String,
    pub field: FieldConfig,
    pub order: OrderConfig,
    #[serde(default)]
    pub cm_orders: Vec<CmOrderConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub degree: u32,
    /// Signed, as `"a"` or `"a/b"`.
    pub zeta_minus_one: String,
    pub h: u64,
    pub h_plus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConfig {
    /// `[Ô_F^× : Nr(Ô^×)]`.
    pub norm_unit_index: u64,
    /// `u(O)`.
    pub u: u64,
    /// One entry per prime dividing `𝔡(O)`.
    #[serde(default)]
    pub locals: Vec<LocalConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalConfig {
    pub prime: String,
    pub residue_norm: u64,
    pub eichler_invariant: i8,
    pub discriminant_valuation: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmOrderConfig {
    pub label: String,
    /// `|μ(B)|`; required when `h¹` is requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<u32>,
    /// `w(B)`.
    pub w: u32,
    /// `h(B)`.
    pub class_number: u64,
    /// `s(𝒢, K)`.
    pub selective: bool,
    /// `Δ(B, O)` for the target spinor genus.
    pub delta: u8,
    /// `Π_𝔭 m_𝔭(B)` as `"a"` or `"a/b"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_product: Option<String>,
    /// `m_𝔭(B)` per prime of `𝔡(O)`, as an alternative to `m_product`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub m: BTreeMap<String, u32>,
}

/// Parses a TOML config; type and shape errors carry the path of the field.
pub fn parse_config(text: &str) -> Result<AssistedConfig> {
    let de = toml::Deserializer::parse(text)
        .map_err(|e| Error::Validation(vec![ValidationIssue::new("<document>", e.to_string().trim())]))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<document>".to_string() } else { path };
        Error::Validation(vec![ValidationIssue::new(path, e.into_inner().to_string().trim())])
    })
}

pub fn to_toml(config: &AssistedConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Inconsistent(format!("cannot serialize config: {e}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssistedReport {
    pub target_genus: String,
    pub masses: Masses,
    pub spinor_class_group_order: u64,
    pub h1: Option<u64>,
    pub h_sc: Option<u64>,
    pub h1_breakdown: Option<Breakdown>,
    pub h_sc_breakdown: Option<Breakdown>,
}

struct Validated {
    order: OrderProfile,
    rows: Vec<ResolvedCmOrder>,
}

fn validate(config: &AssistedConfig) -> Result<Validated> {
    let mut issues = Vec::new();
    let mut issue = |path: String, msg: String| issues.push(ValidationIssue::new(path, msg));

    if config.target_genus.trim().is_empty() {
        issue("target_genus".into(), "must not be empty".into());
    }

    let f = &config.field;
    let field = match Rational::from_str(&f.zeta_minus_one) {
        Err(e) => {
            issue("field.zeta_minus_one".into(), e.to_string());
            None
        }
        Ok(zeta) => match crate::quad::FieldInvariants::new(f.degree, zeta, f.h, f.h_plus) {
            Ok(fi) => Some(fi),
            Err(e) => {
                issue("field".into(), e.to_string());
                None
            }
        },
    };

    let mut locals = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, l) in config.order.locals.iter().enumerate() {
        let path = format!("order.locals[{i}]");
        if !seen.insert(l.prime.as_str()) {
            issue(format!("{path}.prime"), format!("prime {} listed twice", l.prime));
        }
        if l.eichler_invariant == 0 {
            issue(
                format!("{path}.eichler_invariant"),
                "e_p = 0 is not supported: the class number formulas require every Eichler invariant to be nonzero"
                    .into(),
            );
            continue;
        }
        if l.discriminant_valuation == 0 {
            issue(
                format!("{path}.discriminant_valuation"),
                "list only primes dividing the discriminant of O".into(),
            );
            continue;
        }
        match OrderLocalProfile::new(
            PrimeId::new(l.prime.clone()),
            l.residue_norm,
            l.eichler_invariant,
            l.discriminant_valuation,
        ) {
            Ok(local) => locals.push(local),
            Err(e) => issue(path, e.to_string()),
        }
    }
    let o = &config.order;
    if o.norm_unit_index == 0 {
        issue("order.norm_unit_index".into(), "must be positive".into());
    }
    if o.u == 0 {
        issue("order.u".into(), "must be positive".into());
    }

    let local_primes: BTreeSet<&str> = config.order.locals.iter().map(|l| l.prime.as_str()).collect();
    let mut labels = BTreeSet::new();
    let mut rows = Vec::new();
    for (i, c) in config.cm_orders.iter().enumerate() {
        let path = format!("cm_orders[{i}]");
        let before = issues.len();
        let mut issue = |field: &str, msg: String| issues.push(ValidationIssue::new(format!("{path}.{field}"), msg));
        if !labels.insert(c.label.as_str()) {
            issue("label", format!("label {} used twice", c.label));
        }
        match c.mu {
            None if config.which.wants_h1() => issue("mu", "|μ(B)| is required to evaluate h1".into()),
            Some(mu) if mu < 2 || mu % 2 != 0 => issue("mu", format!("|μ(B)| = {mu} must be even and at least 2")),
            Some(mu) if mu > 2 && c.w < 2 => issue("w", "|μ(B)| > 2 forces w(B) > 1".into()),
            _ => {}
        }
        if c.w == 0 {
            issue("w", "must be positive".into());
        }
        if c.class_number == 0 {
            issue("class_number", "must be positive".into());
        }
        if c.delta > 1 {
            issue("delta", "must be 0 or 1".into());
        } else if !c.selective && c.delta != 1 {
            issue("delta", "a non-selective order has Δ = 1".into());
        }
        let m_product = match (&c.m_product, c.m.is_empty()) {
            (Some(_), false) => {
                issue("m", "give either m_product or m, not both".into());
                None
            }
            (Some(s), true) => match Rational::from_str(s) {
                Ok(r) if !r.is_negative() => Some(r),
                Ok(_) => {
                    issue("m_product", "must be nonnegative".into());
                    None
                }
                Err(e) => {
                    issue("m_product", e.to_string());
                    None
                }
            },
            (None, false) => {
                for key in c.m.keys().filter(|k| !local_primes.contains(k.as_str())) {
                    issue(&format!("m.{key}"), "not a prime of order.locals".into());
                }
                for p in local_primes.iter().filter(|p| !c.m.contains_key(**p)) {
                    issue("m", format!("missing m_p at {p}"));
                }
                Some(c.m.values().map(|&v| Rational::from(v as u64)).product())
            }
            (None, true) if local_primes.is_empty() => Some(Rational::one()),
            (None, true) => {
                issue("m_product", "required when order.locals is nonempty".into());
                None
            }
        };
        if issues.len() == before {
            rows.push(ResolvedCmOrder {
                label: c.label.clone(),
                mu_order: c.mu.unwrap_or(2),
                unit_index: c.w,
                class_number: c.class_number,
                m_product: m_product.expect("checked above"),
                selective: c.selective,
                delta: c.delta,
            });
        }
    }

    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    let order = OrderProfile::new(field.expect("checked above"), locals, o.norm_unit_index, o.u)
        .map_err(|e| Error::Validation(vec![ValidationIssue::new("order", e.to_string())]))?;
    Ok(Validated { order, rows })
}

/// Masses always, then `h¹` and/or `h_sc` as requested, each asserted to be
/// a positive integer.
pub fn evaluate(config: &AssistedConfig) -> Result<AssistedReport> {
    let Validated { order, rows } = validate(config)?;
    let b1: Vec<ResolvedCmOrder> = if config.which.wants_h1() {
        rows.iter().filter(|r| r.mu_order > 2).cloned().collect()
    } else {
        Vec::new()
    };
    let b = config
        .which
        .wants_h_sc()
        .then(|| rows.iter().filter(|r| r.unit_index > 1).cloned().collect());
    let input = FormulaInput::new(order, b1, b)?;
    let h1_b = config.which.wants_h1().then(|| h1_breakdown(&input));
    let h_sc_b = if config.which.wants_h_sc() {
        Some(h_sc_breakdown(&input)?)
    } else {
        None
    };
    Ok(AssistedReport {
        target_genus: config.target_genus.clone(),
        masses: Masses::of(&input.order),
        spinor_class_group_order: scl_size(&input.order),
        h1: h1_b.as_ref().map(Breakdown::integer).transpose()?,
        h_sc: h_sc_b.as_ref().map(Breakdown::integer).transpose()?,
        h1_breakdown: h1_b,
        h_sc_breakdown: h_sc_b,
    })
}

/// The config that describes the maximal orders over `Q(√p)` in one spinor
/// genus, with every table entry resolved to an explicit number.
pub fn export_qsqrtp_config(p: u64, tag: SpinorGenusTag) -> Result<AssistedConfig> {
    let table = qsqrtp_b_tables(p)?;
    if !table.regime.genus_tags().contains(&tag) {
        return Err(Error::RegimeMismatch(format!("p = {p} has a single spinor genus")));
    }
    let order = maximal_order(p)?;
    let field = order.field();
    let aux = aux_class_numbers(p)?;
    let cm_orders = table
        .b
        .iter()
        .map(|spec| {
            Ok(CmOrderConfig {
                label: spec.label.clone(),
                mu: Some(spec.mu_order),
                w: spec.unit_index,
                class_number: spec.resolve(&aux).class_number(field.class_number())?,
                selective: spec.in_spinor_genus_field,
                delta: spec.delta(tag),
                m_product: Some("1".into()),
                m: BTreeMap::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AssistedConfig {
        which: Which::Both,
        target_genus: tag.to_string(),
        field: FieldConfig {
            degree: field.degree(),
            zeta_minus_one: field.zeta_minus_one().to_string(),
            h: field.class_number(),
            h_plus: field.narrow_class_number(),
        },
        order: OrderConfig {
            norm_unit_index: order.norm_unit_index(),
            u: order.u_value(),
            locals: Vec::new(),
        },
        cm_orders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P13: &str = r#"
which = "both"
target_genus = "principal"

[field]
degree = 2
zeta_minus_one = "1/6"
h = 1
h_plus = 1

[order]
norm_unit_index = 1
u = 1

[[cm_orders]]
label = "O_K1"
mu = 4
w = 2
class_number = 1
selective = false
delta = 1

[[cm_orders]]
label = "O_K3"
mu = 6
w = 3
class_number = 2
selective = false
delta = 1
"#;

    fn issues(e: Error) -> Vec<ValidationIssue> {
        match e {
            Error::Validation(v) => v,
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn p13_by_hand() {
        let r = evaluate(&parse_config(P13).unwrap()).unwrap();
        assert_eq!((r.h1, r.h_sc), (Some(1), Some(1)));
        assert_eq!(r.masses.mass1, Rational::ratio(1, 24));
    }

    #[test]
    fn round_trip_through_toml() {
        for (p, tag) in [
            (13, SpinorGenusTag::Principal),
            (7, SpinorGenusTag::Nonprincipal),
            (3, SpinorGenusTag::Nonprincipal),
        ] {
            let cfg = export_qsqrtp_config(p, tag).unwrap();
            let text = to_toml(&cfg).unwrap();
            assert_eq!(parse_config(&text).unwrap(), cfg, "{text}");
            let r = evaluate(&cfg).unwrap();
            let g = crate::qsqrtp::report(p).unwrap().per_genus[&tag];
            assert_eq!((r.h1, r.h_sc), (Some(g.h1), Some(g.h_sc)));
        }
    }

    #[test]
    fn missing_field_has_path() {
        let text = P13.replace("h_plus = 1\n", "");
        let v = issues(parse_config(&text).unwrap_err());
        assert_eq!(v[0].path, "field");
        assert!(v[0].message.contains("h_plus"), "{}", v[0].message);
        let text = P13.replace("mu = 6", "mu = \"six\"");
        assert_eq!(issues(parse_config(&text).unwrap_err())[0].path, "cm_orders[1].mu");
    }

    #[test]
    fn zero_eichler_invariant_rejected() {
        let text = P13.replace(
            "u = 1\n",
            "u = 1\n\n[[order.locals]]\nprime = \"3.1\"\nresidue_norm = 3\neichler_invariant = 0\ndiscriminant_valuation = 2\n",
        );
        let v = issues(evaluate(&parse_config(&text).unwrap()).unwrap_err());
        assert!(v
            .iter()
            .any(|i| i.path == "order.locals[0].eichler_invariant" && i.message.contains("not supported")));
    }

    #[test]
    fn all_issues_reported() {
        let text = P13
            .replace("zeta_minus_one = \"1/6\"", "zeta_minus_one = \"0.16\"")
            .replace("mu = 4\n", "")
            .replace("delta = 1\n\n[[cm_orders]]", "delta = 0\n\n[[cm_orders]]");
        let v = issues(evaluate(&parse_config(&text).unwrap()).unwrap_err());
        let paths: Vec<_> = v.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["field.zeta_minus_one", "cm_orders[0].mu", "cm_orders[0].delta"]);
    }

    #[test]
    fn degenerate_inputs() {
        let mut cfg = parse_config(P13).unwrap();
        cfg.cm_orders.clear();
        // 2·Mass¹ = 1/12 is not an integer
        assert!(matches!(evaluate(&cfg), Err(Error::NonIntegral { .. })));
        let mut cfg = export_qsqrtp_config(7, SpinorGenusTag::Principal).unwrap();
        for c in cfg.cm_orders.iter_mut().filter(|c| c.selective) {
            c.delta = 0;
        }
        cfg.which = Which::H1;
        // 1/3 + (8/3)/4
        let r = evaluate(&cfg).unwrap();
        assert_eq!(r.h1, Some(1));
        assert!(r
            .h1_breakdown
            .unwrap()
            .terms
            .iter()
            .filter(|t| t.label != "O_K3")
            .all(|t| t.contribution.is_zero()));
    }

    #[test]
    fn m_values() {
        let text = P13.replace(
            "u = 1\n",
            "u = 1\n\n[[order.locals]]\nprime = \"3.1\"\nresidue_norm = 3\neichler_invariant = 1\ndiscriminant_valuation = 1\n",
        );
        let v = issues(evaluate(&parse_config(&text).unwrap()).unwrap_err());
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|i| i.path.ends_with("m_product")));
        let text = text.replace("delta = 1\n", "delta = 1\n\n[cm_orders.m]\n\"3.1\" = 2\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.cm_orders[0].m["3.1"], 2);
        let r = evaluate(&cfg);
        assert!(!matches!(r, Err(Error::Validation(_))), "{r:?}");
    }
}
