//! Plain-text rendering of reports.

use std::fmt::Write;

use quatclass::assisted::AssistedReport;
use quatclass::cm::{CmOrderSpec, Regime};
use quatclass::formulas::Breakdown;
use quatclass::qsqrtp::{BatchSummary, ClassNumberReport};

/// Left-aligned columns, padded by character count.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::from("  ");
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            s.push_str(cell);
            if i + 1 < cells.len() {
                s.push_str(&" ".repeat(w - cell.chars().count() + 2));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn cm_rows(rows: &[CmOrderSpec], two_genera: bool) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let delta = if two_genera {
                format!("{}/{}", r.delta_principal, r.delta_nonprincipal)
            } else {
                r.delta_principal.to_string()
            };
            vec![
                r.label.clone(),
                r.mu_order.to_string(),
                r.unit_index.to_string(),
                r.class_datum.to_string(),
                r.s().to_string(),
                delta,
            ]
        })
        .collect()
}

const CM_HEADER: [&str; 6] = ["B", "|μ(B)|", "w(B)", "h(B)/h(F)", "s", "Δ"];

pub fn report(r: &ClassNumberReport) -> String {
    let mut s = String::new();
    let two = r.regime.has_two_spinor_genera();
    let f = &r.field;
    let a = &r.auxiliary_class_numbers;
    let _ = writeln!(s, "F = Q(√{}), D = D_{{∞1,∞2}}, maximal orders ({})", r.p, r.regime);
    let _ = writeln!(
        s,
        "  ζ_F(-1) = {}   h(F) = {}   h⁺(F) = {}   ε = {}",
        f.zeta_minus_one(),
        f.class_number(),
        f.narrow_class_number(),
        r.fundamental_unit
    );
    let _ = write!(
        s,
        "  h(-p) = {}   h(-2p) = {}   h(-3p) = {}",
        a.h_minus_p, a.h_minus_2p, a.h_minus_3p
    );
    if let Some(k) = r.kron2p {
        let _ = write!(s, "   (2|p) = {k}");
    }
    s.push('\n');
    let m = &r.masses;
    let _ = writeln!(
        s,
        "  Mass¹ = {}   Mass = {}   Mass_sc = {}   |SCl(O)| = {}   spinor genera: {}",
        m.mass1, m.mass_total, m.mass_sc, r.spinor_class_group_order, r.spinor_genus_count
    );
    s.push('\n');
    if two {
        s.push_str("Δ column: principal/nonprincipal\n");
    }
    s.push_str("ℬ¹ (|μ(B)| > 2)\n");
    s.push_str(&table(&CM_HEADER, &cm_rows(&r.b_tables.b1, two)));
    let extra: Vec<CmOrderSpec> = r
        .b_tables
        .b
        .iter()
        .filter(|b| !r.b_tables.b1.iter().any(|x| x.label == b.label))
        .cloned()
        .collect();
    if !extra.is_empty() {
        s.push_str("ℬ \\ ℬ¹ (w(B) > 1, |μ(B)| = 2)\n");
        s.push_str(&table(&CM_HEADER, &cm_rows(&extra, two)));
    }
    s.push('\n');
    let genus_rows: Vec<Vec<String>> = r
        .per_genus
        .iter()
        .map(|(tag, g)| {
            vec![
                tag.to_string(),
                g.h1.to_string(),
                g.h_sc.to_string(),
                g.type_count.to_string(),
            ]
        })
        .collect();
    s.push_str(&table(&["spinor genus", "h1", "h_sc", "types"], &genus_rows));
    let _ = writeln!(s, "  |Tp(D)| = {}", r.type_number_total);
    s.push('\n');
    let failed: Vec<_> = r.failed_checks().collect();
    let _ = writeln!(
        s,
        "checks: {} passed, {} failed",
        r.identities_checked.len() - failed.len(),
        failed.len()
    );
    for c in failed {
        let _ = writeln!(s, "  FAIL {}: {}", c.name, c.detail);
    }
    s
}

pub fn batch(summary: &BatchSummary) -> String {
    let rows: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| {
            let join = |f: &dyn Fn(&quatclass::qsqrtp::GenusNumbers) -> u64| {
                r.per_genus
                    .values()
                    .map(|g| f(g).to_string())
                    .collect::<Vec<_>>()
                    .join("/")
            };
            vec![
                r.p.to_string(),
                r.zeta_minus_one.to_string(),
                r.h.to_string(),
                r.h_plus.to_string(),
                join(&|g| g.h1),
                join(&|g| g.h_sc),
                r.type_number_total.to_string(),
                if r.passed { "ok".into() } else { "FAIL".into() },
            ]
        })
        .collect();
    let mut s = table(&["p", "ζ_F(-1)", "h", "h⁺", "h1", "h_sc", "|Tp|", "checks"], &rows);
    if summary
        .rows
        .iter()
        .any(|r| matches!(r.regime, Regime::P3 | Regime::ThreeModFour))
    {
        s.push_str("  two spinor genera are shown as principal/nonprincipal\n");
    }
    match &summary.first_failure {
        None => {
            let _ = writeln!(s, "{} primes, all checks passed", summary.rows.len());
        }
        Some(row) => {
            let _ = writeln!(s, "first failure at p = {}", row.p);
            for c in &row.failed_checks {
                let _ = writeln!(s, "  FAIL {}: {}", c.name, c.detail);
            }
        }
    }
    s
}

fn breakdown(s: &mut String, b: &Breakdown) {
    let _ = writeln!(s, "{}:", b.quantity);
    let _ = writeln!(s, "  mass term {}   prefactor {}", b.mass_term, b.prefactor);
    let rows: Vec<Vec<String>> = b
        .terms
        .iter()
        .map(|t| {
            vec![
                t.label.clone(),
                t.coefficient.to_string(),
                t.big_m.to_string(),
                t.contribution.to_string(),
            ]
        })
        .collect();
    if !rows.is_empty() {
        s.push_str(&table(&["B", "coefficient", "M(B)", "contribution"], &rows));
    }
    let _ = writeln!(s, "  total {}", b.total);
}

pub fn assisted(r: &AssistedReport) -> String {
    let mut s = String::new();
    let m = &r.masses;
    let _ = writeln!(s, "target spinor genus: {}", r.target_genus);
    let _ = writeln!(
        s,
        "  Mass¹ = {}   Mass = {}   Mass_sc = {}   |SCl(O)| = {}",
        m.mass1, m.mass_total, m.mass_sc, r.spinor_class_group_order
    );
    if let Some(b) = &r.h1_breakdown {
        breakdown(&mut s, b);
    }
    if let Some(b) = &r.h_sc_breakdown {
        breakdown(&mut s, b);
    }
    if let Some(h) = r.h1 {
        let _ = writeln!(s, "h1 = {h}");
    }
    if let Some(h) = r.h_sc {
        let _ = writeln!(s, "h_sc = {h}");
    }
    s
}
