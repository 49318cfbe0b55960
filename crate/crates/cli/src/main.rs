mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use quatclass::assisted::{self, AssistedConfig};
use quatclass::error::Error;
use quatclass::qsqrtp::{self, CheckSelection, DEFAULT_PMAX_CEILING};
use quatclass::quad;
use quatclass::selectivity::SpinorGenusTag;

const SCHEMA_VERSION: &str = "1";
const CEILING_VAR: &str = "QUATCLASS_PMAX_CEILING";

#[derive(Parser)]
#[command(
    name = "quatclass",
    version,
    about = "Exact spinor class numbers of totally definite quaternion orders"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Checks {
    All,
    Identities,
    Integrality,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Zeta,
    HImag,
    HReal,
    HPlus,
    Unit,
}

#[derive(Clone, Copy, ValueEnum)]
enum Genus {
    Principal,
    Nonprincipal,
}

#[derive(Subcommand)]
enum Command {
    /// Full report for the maximal orders of D_{∞1,∞2} over Q(√p).
    Report {
        #[arg(long)]
        p: u64,
    },
    /// Reports for every prime up to --p-max, with identity checks.
    Batch {
        #[arg(long, default_value_t = 2)]
        p_min: u64,
        #[arg(long)]
        p_max: u64,
        #[arg(long, value_enum, default_value_t = Checks::All)]
        checks: Checks,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A single quadratic field invariant.
    Invariant {
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, allow_negative_numbers = true)]
        arg: i64,
    },
    /// Evaluate a TOML config describing field, order and CM orders.
    Assisted {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the assisted-mode config equivalent to `report --p`.
    ExportConfig {
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value_t = Genus::Principal)]
        genus: Genus,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status: 0 success, 1 failed check, 2 invalid input, 3 non-integral
/// class number.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonIntegral { .. } => 3,
        e if e.is_input_error() => 2,
        _ => 1,
    }
}

struct Output {
    command: &'static str,
    inputs: Value,
    result: Value,
    checks: Vec<Value>,
    text: String,
    ok: bool,
}

fn check(name: &str, passed: bool, detail: &str) -> Value {
    json!({ "name": name, "status": if passed { "pass" } else { "fail" }, "detail": detail })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

fn ceiling() -> Result<u64, Error> {
    match std::env::var(CEILING_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{CEILING_VAR} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_PMAX_CEILING),
    }
}

fn tag_of(g: Genus) -> SpinorGenusTag {
    match g {
        Genus::Principal => SpinorGenusTag::Principal,
        Genus::Nonprincipal => SpinorGenusTag::Nonprincipal,
    }
}

fn run(command: &Command, format: Format) -> Result<Output, Error> {
    match command {
        Command::Report { p } => {
            let report = qsqrtp::report_with_ceiling(*p, ceiling()?)?;
            let checks = report
                .identities_checked
                .iter()
                .map(|c| check(&c.name, c.passed, &c.detail))
                .collect();
            Ok(Output {
                command: "report",
                inputs: json!({ "p": p }),
                result: to_value(&report),
                checks,
                text: render::report(&report),
                ok: report.all_checks_passed(),
            })
        }
        Command::Batch {
            p_min,
            p_max,
            checks,
            out,
        } => {
            let selection = match checks {
                Checks::All => CheckSelection::All,
                Checks::Identities => CheckSelection::Identities,
                Checks::Integrality => CheckSelection::Integrality,
            };
            let summary = qsqrtp::batch(*p_min, *p_max, selection, ceiling()?)?;
            let mut check_values = vec![check(
                "batch",
                summary.passed(),
                &format!("{} primes", summary.rows.len()),
            )];
            if let Some(row) = &summary.first_failure {
                for c in &row.failed_checks {
                    check_values.push(check(&format!("p={}:{}", row.p, c.name), false, &c.detail));
                }
            }
            let mut output = Output {
                command: "batch",
                inputs: json!({ "p_min": p_min, "p_max": p_max, "checks": to_value(&selection) }),
                result: to_value(&summary),
                checks: check_values,
                text: render::batch(&summary),
                ok: summary.passed(),
            };
            if let Some(path) = out {
                let body = render_output(&output, format);
                fs::write(path, body)
                    .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
                output.text = format!(
                    "{} primes written to {}, {}\n",
                    summary.rows.len(),
                    path.display(),
                    if summary.passed() {
                        "all checks passed"
                    } else {
                        "checks FAILED"
                    }
                );
                output.result = json!({ "out": path.display().to_string(), "rows": summary.rows.len(), "first_failure": to_value(&summary.first_failure) });
            }
            Ok(output)
        }
        Command::Invariant { what, arg } => {
            let as_prime =
                || u64::try_from(*arg).map_err(|_| Error::InvalidArgument(format!("expected a prime, got {arg}")));
            let (name, result, text) = match what {
                What::Zeta => {
                    let z = quad::zeta_minus_one_real_quadratic(as_prime()?)?;
                    ("zeta", to_value(&z), z.to_string())
                }
                What::HImag => {
                    let h = quad::h_imag(*arg)?;
                    ("h-imag", json!(h), h.to_string())
                }
                What::HReal => {
                    let h = quad::h_real(as_prime()?)?;
                    ("h-real", json!(h), h.to_string())
                }
                What::HPlus => {
                    let h = quad::narrow_class_number(as_prime()?)?;
                    ("h-plus", json!(h), h.to_string())
                }
                What::Unit => {
                    let u = quad::fundamental_unit(as_prime()?)?;
                    let value = json!({
                        "x": u.x.to_string(),
                        "y": u.y.to_string(),
                        "denominator": u.denominator,
                        "norm_sign": u.norm_sign,
                        "display": u.to_string(),
                    });
                    ("unit", value, u.to_string())
                }
            };
            Ok(Output {
                command: "invariant",
                inputs: json!({ "what": name, "arg": arg }),
                result,
                checks: Vec::new(),
                text: format!("{text}\n"),
                ok: true,
            })
        }
        Command::Assisted { config } => {
            let text = fs::read_to_string(config)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", config.display())))?;
            let cfg: AssistedConfig = assisted::parse_config(&text)?;
            let report = assisted::evaluate(&cfg)?;
            let mut checks = Vec::new();
            if let Some(h) = report.h1 {
                checks.push(check("h1_integral", true, &h.to_string()));
            }
            if let Some(h) = report.h_sc {
                checks.push(check("h_sc_integral", true, &h.to_string()));
            }
            Ok(Output {
                command: "assisted",
                inputs: json!({ "config": config.display().to_string() }),
                result: to_value(&report),
                checks,
                text: render::assisted(&report),
                ok: true,
            })
        }
        Command::ExportConfig { p, genus, out } => {
            let tag = tag_of(*genus);
            let cfg = assisted::export_qsqrtp_config(*p, tag)?;
            let toml = assisted::to_toml(&cfg)?;
            let text = match out {
                Some(path) => {
                    fs::write(path, &toml)
                        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
                    format!("config written to {}\n", path.display())
                }
                None => toml.clone(),
            };
            Ok(Output {
                command: "export-config",
                inputs: json!({ "p": p, "genus": tag.as_str() }),
                result: json!({ "toml": toml, "config": to_value(&cfg) }),
                checks: Vec::new(),
                text,
                ok: true,
            })
        }
    }
}

fn render_output(out: &Output, format: Format) -> String {
    match format {
        Format::Text => out.text.clone(),
        Format::Json => {
            let envelope = json!({
                "schema_version": SCHEMA_VERSION,
                "command": out.command,
                "inputs": out.inputs,
                "result": out.result,
                "checks": out.checks,
            });
            let mut s = serde_json::to_string_pretty(&envelope).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command, cli.format) {
        Ok(out) => {
            print!("{}", render_output(&out, cli.format));
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
