//! The `siplab` command line.
//!
//! Exit codes: 0 on success, 2 when a reported value misses its tolerance
//! (or no counterexample exists for the input), 1 on usage or configuration
//! errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use super::config::{parse_norm, parse_subspace, parse_vector, Format, RunConfig};
use super::report::{Check, Comparison, Report};
use super::suites::{
    finite_dim_sl_probe, hanner_suite, isometry_invariance_check, lp_sl_coordinate_case, signed_permutation,
};
use super::thm2::{thm2_forward_harness, HSection, NormScramble, Thm2Options};
use crate::counterexample::{
    replay, run_pipeline, Certificate, CounterexampleInstance, Evidence, PipelineConfig, ReplayMode, SearchOptions,
    DEFAULT_DIRECTIONS, DEFAULT_P, DEFAULT_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::norms::{NormKind, NormModel, Vector};
use crate::ortho::{birkhoff_report, orthogonal_decompose, sip_orthogonal, SubspaceBasis};
use crate::quotient::{quotient_norm, quotient_sip, section_map, verify_section_sip, QuotientElement, QuotientSpace};
use crate::sip::{axioms_check, sip_eval};

#[derive(Parser, Debug)]
#[command(name = "siplab", version, about = "Semi-inner products on smooth normed spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Norm spec: lp:P[:DIM], mixed, mixed:P:SIZE@Q,..., inline JSON or file:PATH
    #[arg(long)]
    norm: Option<String>,
    /// Exponent of the sequence sum (counterexample) or of the suite
    #[arg(long)]
    p: Option<f64>,
    /// Subspace basis, vectors separated by ';'
    #[arg(long, allow_hyphen_values = true)]
    subspace: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON or TOML file with the same keys as the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let flags = RunConfig {
            norm: self.norm.clone(),
            p: self.p,
            subspace: self.subspace.clone(),
            x: self.x.clone(),
            y: self.y.clone(),
            seed: self.seed,
            samples: self.samples,
            tol: self.tol,
            out: self.out.clone(),
            format: self.format,
        };
        let cfg = match &self.config {
            Some(path) => RunConfig::load(path)?.overlay(flags),
            None => flags,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Axioms,
    Section,
    Isometry,
    Hanner,
    CoordinateSl,
    Thm2,
    Thm2Control,
    FiniteDim,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate [x|y]
    Sip(Common),
    /// Compare Birkhoff and semi-inner-product orthogonality of x to y
    Orth(Common),
    /// Best approximation of x in the subspace and the decomposition x = y + z
    Project(Common),
    /// Quotient norm, section and (with --y) quotient semi-inner product
    Quotient(Common),
    /// Run the shift-map pipeline and emit its certificates
    Counterexample {
        #[command(flatten)]
        common: Common,
        /// Directions in the complement sweep
        #[arg(long)]
        dirs: Option<usize>,
        /// Lower bound for non-linearity residuals
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Run a verification suite
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Re-verify stored certificates
    Replay {
        file: PathBuf,
        /// Compare within 1e-6 instead of bit for bit
        #[arg(long)]
        portable: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoNonlinearComplement { .. } | Error::NoConvergence { .. } | Error::ZeroSupport => 2,
        _ => 1,
    }
}

fn emit(report: &Report, cfg: &RunConfig) -> Result<i32> {
    let text = match cfg.format.unwrap_or_default() {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if report.passed { 0 } else { 2 })
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
}

fn vector(v: &Option<String>, flag: &str) -> Result<Vector> {
    parse_vector(need(v, flag)?)
}

fn norm(cfg: &RunConfig, default: &str, dim_hint: Option<usize>) -> Result<NormModel> {
    parse_norm(cfg.norm.as_deref().unwrap_or(default), dim_hint)
}

fn subspace(cfg: &RunConfig, m: &NormModel, default: Option<&str>) -> Result<SubspaceBasis> {
    let spec = match (&cfg.subspace, default) {
        (Some(s), _) => s.as_str(),
        (None, Some(d)) => d,
        (None, None) => return Err(Error::InvalidArgument("--subspace is required".into())),
    };
    SubspaceBasis::new(parse_subspace(spec)?, m.clone())
}

fn config_json(cfg: &RunConfig, extra: Value) -> Value {
    let mut v = serde_json::to_value(cfg).expect("configs serialize");
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    v
}

fn run(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Sip(c) => {
            let cfg = c.resolve()?;
            let x = vector(&cfg.x, "x")?;
            let y = vector(&cfg.y, "y")?;
            let m = norm(&cfg, "default", Some(x.dim()))?;
            let value = sip_eval(&x, &y, &m)?;
            let result = json!({
                "value": value,
                "path": m.path(),
                "model": m.to_string(),
                "norm_x": m.norm(&x)?,
                "norm_y": m.norm(&y)?,
            });
            emit(&Report::new("sip", config_json(&cfg, json!({})), result, vec![]), &cfg)
        }
        Command::Orth(c) => {
            let cfg = c.resolve()?;
            let x = vector(&cfg.x, "x")?;
            let y = vector(&cfg.y, "y")?;
            let m = norm(&cfg, "default", Some(x.dim()))?;
            let tol = cfg.tol.unwrap_or(1e-7);
            let b = birkhoff_report(&x, &y, &m, tol)?;
            let s = sip_orthogonal(&x, &y, &m, tol)?;
            let result = json!({
                "birkhoff": b.orthogonal,
                "sip_orthogonal": s,
                "sip_y_x": sip_eval(&y, &x, &m)?,
                "alpha": b.alpha,
                "min_norm": b.min_value,
                "norm_x": b.norm_x,
            });
            let checks = vec![Check::flag("birkhoff_agrees_with_sip", b.orthogonal == s)];
            emit(&Report::new("orth", config_json(&cfg, json!({ "tol": tol })), result, checks), &cfg)
        }
        Command::Project(c) => {
            let cfg = c.resolve()?;
            let x = vector(&cfg.x, "x")?;
            let m = norm(&cfg, "default", Some(x.dim()))?;
            let sub = subspace(&cfg, &m, None)?;
            let tol = cfg.tol.unwrap_or(1e-9);
            let d = orthogonal_decompose(&x, &sub, tol)?;
            let result = json!({
                "y": d.y,
                "z": d.z,
                "distance": m.norm(&d.z)?,
                "residual_orth": d.residual_orth,
            });
            let checks = vec![Check::at_most("birkhoff_residual", d.residual_orth, tol)];
            emit(&Report::new("project", config_json(&cfg, json!({ "tol": tol })), result, checks), &cfg)
        }
        Command::Quotient(c) => {
            let cfg = c.resolve()?;
            let x = vector(&cfg.x, "x")?;
            let m = norm(&cfg, "default", Some(x.dim()))?;
            let q = QuotientSpace::new(subspace(&cfg, &m, None)?)?;
            let tol = cfg.tol.unwrap_or(1e-9);
            let qx = QuotientElement::new(x.clone());
            let qn = quotient_norm(&qx, &q, 1e-12)?;
            let s = section_map(&qx, &q, 1e-12)?;
            let sn = m.norm(&s)?;
            let mut result = json!({
                "quotient_norm": qn,
                "section": s,
                "coordinates": q.coords_of(&x)?,
                "slice": q.slice(),
            });
            if cfg.y.is_some() {
                let qy = QuotientElement::new(vector(&cfg.y, "y")?);
                result["quotient_sip"] = json!(quotient_sip(&qx, &qy, &q, 1e-12)?);
            }
            let checks = vec![
                Check::at_most("section_norm_residual", (sn - qn).abs(), tol),
                Check::flag("section_in_coset", q.same_coset(&QuotientElement::new(s), &qx)?),
            ];
            emit(&Report::new("quotient", config_json(&cfg, json!({ "tol": tol })), result, checks), &cfg)
        }
        Command::Counterexample {
            common,
            dirs,
            threshold,
        } => {
            let cfg = common.resolve()?;
            let seed = cfg.seed.unwrap_or(42);
            let mut pc = PipelineConfig::new(norm(&cfg, "default", Some(3))?, cfg.p.unwrap_or(DEFAULT_P), seed);
            pc.search = SearchOptions::new(
                dirs.unwrap_or(DEFAULT_DIRECTIONS),
                seed,
                threshold.unwrap_or(DEFAULT_THRESHOLD),
            );
            pc.n_pairs = cfg.samples.unwrap_or(1000);
            pc.tol = cfg.tol.unwrap_or(1e-6);
            let r = run_pipeline(&pc)?;
            let mut checks = Vec::new();
            for cert in r.certificates() {
                let cmp = match cert.evidence {
                    Evidence::Complement { .. } => Comparison::Above,
                    Evidence::Preservation { .. } => Comparison::AtMost,
                    Evidence::Nonlinearity { .. } => Comparison::AtLeast,
                };
                for (name, v) in cert.evidence.measured() {
                    let kind = serde_json::to_value(cert.kind()).expect("kinds serialize");
                    let kind = kind.as_str().unwrap_or_default();
                    checks.push(Check::new(format!("{kind}.{name}"), v, cmp, cert.tol));
                }
            }
            let result = json!({
                "direction": r.instance.direction,
                "w_norm_consistency": r.instance.w_norm_consistency(32, seed)?,
                "certificates": r.certificates(),
            });
            let extra = json!({ "p": pc.p, "seed": seed, "samples": pc.n_pairs, "tol": pc.tol, "search": pc.search });
            emit(&Report::new("counterexample", config_json(&cfg, extra), result, checks), &cfg)
        }
        Command::Verify { suite, common } => {
            let cfg = common.resolve()?;
            let report = verify(suite, &cfg)?;
            emit(&report, &cfg)
        }
        Command::Replay { file, portable, common } => {
            let cfg = common.resolve()?;
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", file.display())))?;
            let certs = load_certificates(&text)?;
            let mode = if portable { ReplayMode::Portable } else { ReplayMode::Exact };
            let mut outcomes = Vec::with_capacity(certs.len());
            let mut checks = Vec::new();
            for (i, cert) in certs.iter().enumerate() {
                let o = replay(cert, mode)?;
                let kind = serde_json::to_value(o.kind).expect("kinds serialize");
                checks.push(Check::flag(format!("{i}.{}", kind.as_str().unwrap_or_default()), o.ok()));
                outcomes.push(o);
            }
            let result = json!({ "file": file, "outcomes": outcomes });
            emit(&Report::new("replay", config_json(&cfg, json!({ "mode": mode })), result, checks), &cfg)
        }
    }
}

/// Accepts a `counterexample` report, an array of certificates or one certificate.
pub fn load_certificates(text: &str) -> Result<Vec<Certificate>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("malformed JSON: {e}")))?;
    let list = match v {
        Value::Object(ref o) if o.contains_key("result") => v["result"]["certificates"].clone(),
        Value::Array(_) => v,
        other => Value::Array(vec![other]),
    };
    serde_json::from_value(list).map_err(|e| Error::InvalidArgument(format!("malformed certificate: {e}")))
}

/// Coordinates of a subspace given by unit coordinate vectors.
fn coordinate_indices(basis: &[Vector]) -> Result<Vec<usize>> {
    basis
        .iter()
        .map(|b| {
            let nz: Vec<usize> = (0..b.dim()).filter(|&i| b[i] != 0.0).collect();
            match nz.as_slice() {
                [i] => Ok(*i),
                _ => Err(Error::InvalidArgument(format!("{:?} is not a coordinate vector", b.as_slice()))),
            }
        })
        .collect()
}

fn verify(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    let seed = cfg.seed.unwrap_or(42);
    let name = serde_json::to_value(suite.to_possible_value().map(|v| v.get_name().to_string()))
        .expect("names serialize");
    let (result, checks, extra) = match suite {
        Suite::Axioms => {
            let m = norm(cfg, "default", None)?;
            let tol = cfg.tol.unwrap_or(m.path().default_tolerance());
            let n = cfg.samples.unwrap_or(1000);
            let r = axioms_check(&m, n, seed, tol)?;
            let checks = r.axioms.iter().map(|a| Check::at_most(a.axiom.clone(), a.worst_residual, tol)).collect();
            (serde_json::to_value(&r).expect("reports serialize"), checks, json!({ "tol": tol, "samples": n }))
        }
        Suite::Section => {
            let m = norm(cfg, "default", None)?;
            let default_sub = if m.dim() == 3 { Some("1,1,0") } else { None };
            let q = QuotientSpace::new(subspace(cfg, &m, default_sub)?)?;
            let tol = cfg.tol.unwrap_or(1e-7);
            let n = cfg.samples.unwrap_or(200);
            let c = verify_section_sip(&q, n, seed, tol)?;
            let checks = vec![
                Check::at_most("section_sip_residual", c.max_residual, tol),
                Check::at_most("section_norm_residual", c.max_norm_residual, tol),
            ];
            (serde_json::to_value(&c).expect("reports serialize"), checks, json!({ "tol": tol, "samples": n }))
        }
        Suite::Isometry => {
            let m = norm(cfg, &format!("lp:{}", cfg.p.unwrap_or(3.0)), None)?;
            let t = if m.is_euclidean() {
                super::suites::plane_rotation(m.dim(), 0, 1, 0.7)
            } else {
                signed_permutation(m.dim(), seed)
            };
            let tol = cfg.tol.unwrap_or(1e-9);
            let n = cfg.samples.unwrap_or(1000);
            let r = isometry_invariance_check(&t, &m, &m, n, seed, tol)?;
            let mut checks = vec![Check::at_most("isometry_gate", r.gate_residual, tol)];
            if let Some(s) = r.sip_residual {
                checks.push(Check::at_most("sip_residual", s, tol));
            }
            (serde_json::to_value(&r).expect("reports serialize"), checks, json!({ "tol": tol, "samples": n }))
        }
        Suite::Hanner => {
            let p = cfg.p.unwrap_or(3.0);
            let n = cfg.samples.unwrap_or(10_000);
            let r = hanner_suite(p, 4, n, seed)?;
            let checks = vec![Check::at_most("violations", r.violations as f64, 0.0)];
            (serde_json::to_value(&r).expect("reports serialize"), checks, json!({ "samples": n }))
        }
        Suite::CoordinateSl => {
            let m = norm(cfg, &format!("lp:{}:4", cfg.p.unwrap_or(3.0)), None)?;
            let NormKind::Lp { p } = *m.kind() else {
                return Err(Error::InvalidArgument("coordinate-sl needs an lp norm".into()));
            };
            let coords = match &cfg.subspace {
                Some(s) => coordinate_indices(&parse_subspace(s)?)?,
                None => vec![0],
            };
            let tol = cfg.tol.unwrap_or(1e-9);
            let r = lp_sl_coordinate_case(m.dim(), p, &coords, seed, tol)?;
            let checks = vec![Check::at_most("worst_residual", r.worst, tol)];
            (serde_json::to_value(&r).expect("reports serialize"), checks, json!({ "tol": tol }))
        }
        Suite::Thm2 | Suite::Thm2Control => {
            let tol = cfg.tol.unwrap_or(1e-6);
            let n = cfg.samples.unwrap_or(64);
            let r = if suite == Suite::Thm2 {
                let x3 = norm(cfg, "default", Some(3))?;
                let inst = pipeline_instance(x3, cfg.p.unwrap_or(DEFAULT_P), seed)?;
                thm2_forward_harness(&HSection::new(&inst, 2, 1)?, &Thm2Options::new(n, seed, tol))?
            } else {
                thm2_forward_harness(&NormScramble::new(3)?, &Thm2Options::new(n, seed, tol))?
            };
            let checks = if suite == Suite::Thm2 {
                vec![
                    Check::flag("rank_conclusive", r.conclusive),
                    Check::at_most("sip_gate", r.gate_residual, tol),
                    Check::at_most("membership_residual", r.membership_residual, tol),
                    Check::at_most("quotient_isometry_residual", r.isometry_residual, tol),
                ]
            } else {
                vec![Check::at_least("control_membership_residual", r.membership_residual, 1e-2)]
            };
            (serde_json::to_value(&r).expect("reports serialize"), checks, json!({ "tol": tol, "samples": n }))
        }
        Suite::FiniteDim => {
            let m = norm(cfg, "lp:3:4", None)?;
            let n = cfg.samples.unwrap_or(10);
            let r = finite_dim_sl_probe(&m, n, seed)?;
            let checks = vec![Check::flag("dimension_deficit", r.passed)];
            (serde_json::to_value(&r).expect("reports serialize"), checks, json!({ "samples": n }))
        }
    };
    let extra = config_json(cfg, extra);
    let mut report = Report::new("verify", extra, result, checks);
    report.config["suite"] = name;
    Ok(report)
}

/// Instance from the pipeline's search with the given seed.
fn pipeline_instance(x3: NormModel, p: f64, seed: u64) -> Result<CounterexampleInstance> {
    let opts = SearchOptions::new(DEFAULT_DIRECTIONS, seed, DEFAULT_THRESHOLD);
    let (y, _) = crate::counterexample::search_nonlinear_complement(&x3, &opts)?;
    CounterexampleInstance::new(x3, y.vectors()[0].clone(), p)
}
