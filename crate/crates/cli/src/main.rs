use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use cfcert_core::catalog::{self, Params};
use cfcert_core::certify::{self, CertificationReport, Estimate, EtaEstimator, SigmaPolicy, Verdict};
use cfcert_core::document::{self, format_probability as fmt};
use cfcert_core::fractions::{self, Decomposition};
use cfcert_core::hvm;
use cfcert_core::lp::Scalar;
use cfcert_core::{EmpiricalModel, ErrorKind, Normalization};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use rayon::prelude::*;
use serde_json::{json, Value};

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_SOLVER: u8 = 4;
const EXIT_ESTIMATOR: u8 = 5;
const EXIT_NOT_CERTIFIED: u8 = 10;
const EXIT_CONDITION_FAILED: u8 = 11;

/// Contextual and signalling fractions of probability tables, and
/// certification of genuine contextuality under noisy hidden variables.
#[derive(Parser)]
#[command(name = "cfcert", version)]
struct Cli {
    /// Emit a JSON document on stdout; the human-readable report moves to stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct LoadOpts {
    /// Rescale contexts that do not sum to 1 instead of rejecting them.
    #[arg(long)]
    renormalize: bool,
}

impl LoadOpts {
    fn mode(self) -> Normalization {
        if self.renormalize {
            Normalization::Renormalize
        } else {
            Normalization::Strict
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// CF, NCF, SF, NSF, MIM, the non-signalling verdict and η* of model files.
    Analyze {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        load: LoadOpts,
        /// Also solve CF and SF with exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Process the documents concurrently.
        #[arg(long)]
        batch: bool,
    },
    /// Compare CF with η under the condition 2η + σ < 1.
    Certify(CertifyArgs),
    /// Write a catalog model as a document.
    Generate {
        /// Catalog entry; omit with --list.
        #[arg(required_unless_present = "list")]
        name: Option<String>,
        #[arg(long)]
        list: bool,
        /// Cycle length for n-cycle entries.
        #[arg(long)]
        n: Option<usize>,
        /// Mixing weight for parametrised entries.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Mix every context with seeded Dirichlet noise of weight ε.
    Perturb {
        path: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        load: LoadOpts,
    },
    /// Split a model into its largest noncontextual (or non-signalling) part and a residual.
    Decompose {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = DecompositionKind::Nc)]
        kind: DecompositionKind,
        /// Directory for part_a.toml and part_b.toml.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        load: LoadOpts,
    },
    /// Bell inequality from the dual of the noncontextual-fraction program.
    Bell {
        path: PathBuf,
        #[command(flatten)]
        load: LoadOpts,
    },
    /// η, σ and realized CF of a hidden-variable model document.
    Audit { path: PathBuf },
    /// Boundary hidden-variable model α·S1 + (1−α)·S2 on the n-cycle.
    Boundary {
        #[arg(long)]
        n: usize,
        /// α in [1/2, 1], as a fraction (3/4) or decimal (0.75).
        #[arg(long)]
        alpha: String,
        /// Write the hidden-variable model document here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Criterion for deterministic hidden variables with prior weight σ′ on signalling ones.
    Deterministic {
        path: PathBuf,
        #[arg(long)]
        sigma_prime: f64,
        #[command(flatten)]
        load: LoadOpts,
    },
    /// Compare CF ≤ ε with the Σω(k−1)/(β_max−β_cl)·ε bound.
    Winter {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
        #[arg(long, allow_negative_numbers = true)]
        beta_cl: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta_max: f64,
        #[arg(long)]
        epsilon: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecompositionKind {
    Nc,
    Ns,
}

#[derive(Clone, Copy, ValueEnum)]
enum SigmaSource {
    Zero,
    Sf,
    Mim,
    Manual,
}

#[derive(Args)]
struct CertifyArgs {
    /// Model document; omit to certify a reported --cf or --observed value.
    #[arg(conflicts_with_all = ["cf", "observed"])]
    path: Option<PathBuf>,
    #[command(flatten)]
    load: LoadOpts,
    /// Reported contextual fraction.
    #[arg(long, conflicts_with = "observed")]
    cf: Option<f64>,
    /// Observed inequality value; needs --beta-cl and --beta-max.
    #[arg(long, allow_negative_numbers = true, requires_all = ["beta_cl", "beta_max"])]
    observed: Option<f64>,
    /// Classical bound of the inequality, for the corrected bound.
    #[arg(long, allow_negative_numbers = true, requires = "beta_max")]
    beta_cl: Option<f64>,
    /// Algebraic maximum of the inequality.
    #[arg(long, allow_negative_numbers = true, requires = "beta_cl")]
    beta_max: Option<f64>,

    #[arg(long, group = "eta_source")]
    eta: Option<f64>,
    /// Per-context flip probabilities of repeated measurements.
    #[arg(long, value_delimiter = ',', group = "eta_source")]
    flip_probability: Option<Vec<f64>>,
    /// Observed probabilities of ideally forbidden events.
    #[arg(long, value_delimiter = ',', group = "eta_source")]
    hardy_zero: Option<Vec<f64>>,
    /// Single-measurement error rate ε; η = 2ε − ε².
    #[arg(long, group = "eta_source")]
    repeatability: Option<f64>,
    /// Theoretical probabilities, paired with --experiment.
    #[arg(long, value_delimiter = ',', group = "eta_source")]
    theory: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    experiment: Option<Vec<f64>>,
    /// Conditionals p(A = o | A′ = −o) of a measurement repeated across contexts.
    #[arg(long, value_delimiter = ',', group = "eta_source")]
    outcome_mismatch: Option<Vec<f64>>,

    /// Manual σ.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, value_enum, default_value_t = SigmaSource::Manual)]
    sigma_policy: SigmaSource,
}

/// Human text plus the machine-readable value of one command.
struct Report {
    text: String,
    json: Value,
    code: u8,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, code: 0 }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<cfcert_core::Error>() {
            return match e.kind() {
                ErrorKind::Parse => EXIT_PARSE,
                ErrorKind::Validation => EXIT_VALIDATION,
                ErrorKind::Solver => EXIT_SOLVER,
                ErrorKind::Estimator => EXIT_ESTIMATOR,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_PARSE;
        }
    }
    EXIT_VALIDATION
}

fn load_model(path: &Path, mode: Normalization) -> anyhow::Result<EmpiricalModel> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc = document::parse_model(&text, mode).with_context(|| format!("in {}", path.display()))?;
    for w in doc.warnings.iter().chain(doc.model.scenario().warnings()) {
        eprintln!("warning: {}: {w}", path.display());
    }
    let s = doc.model.scenario();
    for (k, a) in doc.model.adjustments().iter().enumerate() {
        if *a != 0.0 {
            eprintln!(
                "warning: {}: context {} renormalized (1 - sum = {a:e})",
                path.display(),
                s.context_key(k)
            );
        }
    }
    Ok(doc.model)
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn analyze_one(path: &Path, load: LoadOpts, exact: bool) -> anyhow::Result<Report> {
    let model = load_model(path, load.mode())?;
    let a = certify::analyze(&model)?;
    let mut text = format!(
        "{}\n  CF   {}\n  NCF  {}\n  SF   {}\n  NSF  {}\n  MIM  {}\n  non-signalling  {}\n  eta* {}\n",
        path.display(),
        fmt(a.cf),
        fmt(a.ncf),
        fmt(a.sf),
        fmt(a.nsf),
        fmt(a.mim),
        if a.nonsignalling { "yes" } else { "no" },
        fmt(a.eta_star),
    );
    let mut json = json!({ "path": path.display().to_string(), "analysis": a });
    if exact {
        let s = model.scenario();
        let v = fractions::exact_vector(&model);
        let cf = fractions::contextual_fraction_exact(s, &v)?;
        let nsf = fractions::nonsignalling_fraction_exact(s, &v)?.value;
        let sf = num_rational::BigRational::from_integer(1.into()) - nsf;
        text.push_str(&format!("  exact CF = {cf}\n  exact SF = {sf}\n"));
        json["exact"] = json!({
            "cf": cf.to_string(),
            "sf": sf.to_string(),
            "cf_f64": cf.to_f64(),
            "sf_f64": sf.to_f64(),
        });
    }
    Ok(Report::ok(text, json))
}

fn cmd_analyze(paths: &[PathBuf], load: LoadOpts, exact: bool, batch: bool) -> Vec<(PathBuf, anyhow::Result<Report>)> {
    let run = |p: &PathBuf| (p.clone(), analyze_one(p, load, exact));
    if batch {
        paths.par_iter().map(run).collect()
    } else {
        paths.iter().map(run).collect()
    }
}

fn eta_estimator(args: &CertifyArgs) -> anyhow::Result<EtaEstimator> {
    let e = if let Some(v) = args.eta {
        EtaEstimator::Manual(v)
    } else if let Some(p) = &args.flip_probability {
        EtaEstimator::FlipProbability(p.clone())
    } else if let Some(p) = &args.hardy_zero {
        EtaEstimator::HardyZero(p.clone())
    } else if let Some(eps) = args.repeatability {
        EtaEstimator::Repeatability(eps)
    } else if let Some(theory) = &args.theory {
        EtaEstimator::MaxDeviation { theory: theory.clone(), experiment: args.experiment.clone().unwrap_or_default() }
    } else if let Some(p) = &args.outcome_mismatch {
        EtaEstimator::OutcomeMismatch(p.clone())
    } else {
        return Err(cfcert_core::Error::MissingField("eta").into());
    };
    Ok(e)
}

fn sigma_policy(args: &CertifyArgs) -> SigmaPolicy {
    match (args.sigma, args.sigma_policy) {
        (Some(v), _) => SigmaPolicy::Manual(Some(v)),
        (None, SigmaSource::Zero) => SigmaPolicy::Zero,
        (None, SigmaSource::Sf) => SigmaPolicy::SfOfModel,
        (None, SigmaSource::Mim) => SigmaPolicy::MimOfModel,
        (None, SigmaSource::Manual) => SigmaPolicy::Manual(None),
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::GenuineContextuality => 0,
        Verdict::NotCertified => EXIT_NOT_CERTIFIED,
        Verdict::ConditionFailed => EXIT_CONDITION_FAILED,
    }
}

fn certification_text(r: &CertificationReport) -> String {
    let mut t = format!("CF   {}\n", fmt(r.cf));
    if let Some(sf) = r.sf {
        t.push_str(&format!("SF   {}\n", fmt(sf)));
    }
    if let Some(mim) = r.mim {
        t.push_str(&format!("MIM  {}\n", fmt(mim)));
    }
    t.push_str(&format!("eta  {}  ({})\n", fmt(r.eta.value), r.eta.provenance));
    t.push_str(&format!("sigma {}  ({})\n", fmt(r.sigma.value), r.sigma.provenance));
    t.push_str(&format!(
        "2*eta + sigma = {} ({})\n",
        fmt(r.condition_value),
        if r.condition_holds { "< 1" } else { ">= 1" }
    ));
    if let Some(c) = &r.corrected_inequality {
        t.push_str(&format!(
            "corrected bound {} (beta_cl {}, beta_max {})",
            fmt(c.bound),
            c.beta_cl,
            c.beta_max
        ));
        if let Some(o) = c.observed {
            t.push_str(&format!(", observed {o}"));
        }
        t.push('\n');
    }
    t.push_str(&format!("verdict: {:?}\n", r.verdict));
    t
}

fn cmd_certify(args: &CertifyArgs) -> anyhow::Result<Report> {
    let model = args.path.as_deref().map(|p| load_model(p, args.load.mode())).transpose()?;
    let eta = certify::estimate_eta(&eta_estimator(args)?)?;
    let sigma = certify::estimate_sigma(sigma_policy(args), model.as_ref())?;
    let report = match (&model, args.cf, args.observed) {
        (Some(m), _, _) => certify::certify(m, eta, sigma)?,
        (None, Some(cf), _) => certify::certify_value(cf, eta, sigma)?,
        (None, None, Some(obs)) => {
            let (cl, max) = (args.beta_cl.unwrap_or_default(), args.beta_max.unwrap_or_default());
            certify::certify_inequality(obs, cl, max, eta, sigma)?
        }
        (None, None, None) => return bound_only(eta, sigma),
    };
    let report = match (args.beta_cl, args.beta_max, args.observed) {
        (Some(cl), Some(max), None) => report.with_inequality(cl, max)?,
        _ => report,
    };
    Ok(Report { text: certification_text(&report), code: verdict_code(report.verdict), json: json!(report) })
}

/// No CF available: report the CF ceiling of admissible hidden-variable models.
fn bound_only(eta: Estimate, sigma: Estimate) -> anyhow::Result<Report> {
    let bound = certify::cf_bound(&eta, &sigma)?;
    let condition = 2.0 * eta.value + sigma.value;
    let text = match bound {
        Some(b) => format!(
            "2*eta + sigma = {} < 1\nadmissible hidden-variable models reach CF <= {}\n",
            fmt(condition),
            fmt(b)
        ),
        None => format!("2*eta + sigma = {} >= 1\nverdict: ConditionFailed\n", fmt(condition)),
    };
    let verdict = if bound.is_some() { None } else { Some(Verdict::ConditionFailed) };
    Ok(Report {
        text,
        code: verdict.map_or(0, verdict_code),
        json: json!({ "eta": eta, "sigma": sigma, "condition_value": condition, "cf_bound": bound, "verdict": verdict }),
    })
}

fn cmd_generate(
    name: Option<&str>,
    list: bool,
    params: Params,
    out: Option<&Path>,
    json_mode: bool,
) -> anyhow::Result<Report> {
    if list {
        let text: String =
            catalog::entries().iter().map(|e| format!("{:<20} {}\n", e.name, e.description)).collect();
        let names: Vec<&str> = catalog::entries().iter().map(|e| e.name).collect();
        return Ok(Report::ok(text, json!(names)));
    }
    let name = name.ok_or_else(|| anyhow!("missing catalog entry name"))?;
    let model = catalog::entry(name)?.build(&params)?;
    let doc = document::write_model(&model);
    match out {
        Some(p) => {
            write_output(Some(p), &doc)?;
            Ok(Report::ok(format!("wrote {name} to {}\n", p.display()), json!({ "entry": name, "path": p })))
        }
        None if json_mode => Ok(Report::ok(String::new(), json!({ "entry": name, "document": doc }))),
        None => Ok(Report::ok(doc, Value::Null)),
    }
}

fn cmd_perturb(
    path: &Path,
    epsilon: f64,
    seed: u64,
    out: Option<&Path>,
    load: LoadOpts,
    json_mode: bool,
) -> anyhow::Result<Report> {
    let model = load_model(path, load.mode())?;
    let p = model.perturb(epsilon, seed)?;
    let v = model.total_variation(&p)?;
    let doc = document::write_model(&p);
    let json = json!({ "epsilon": epsilon, "seed": seed, "total_variation": v });
    match out {
        Some(o) => {
            write_output(Some(o), &doc)?;
            Ok(Report::ok(format!("wrote {} (V = {})\n", o.display(), fmt(v)), json))
        }
        None if json_mode => {
            let mut json = json;
            json["document"] = json!(doc);
            Ok(Report::ok(String::new(), json))
        }
        None => Ok(Report::ok(doc, json)),
    }
}

fn cmd_decompose(
    path: &Path,
    kind: DecompositionKind,
    out_dir: Option<&Path>,
    load: LoadOpts,
) -> anyhow::Result<Report> {
    let model = load_model(path, load.mode())?;
    let Decomposition { weight, part_a, part_b } = match kind {
        DecompositionKind::Nc => fractions::nc_decomposition(&model)?,
        DecompositionKind::Ns => fractions::ns_decomposition(&model)?,
    };
    let label = match kind {
        DecompositionKind::Nc => "noncontextual",
        DecompositionKind::Ns => "non-signalling",
    };
    let mut text = format!("{label} weight {}\n", fmt(weight));
    let mut json = json!({ "kind": label, "weight": weight });
    for (name, part) in [("part_a", &part_a), ("part_b", &part_b)] {
        let Some(part) = part else {
            text.push_str(&format!("{name}: absent\n"));
            json[name] = Value::Null;
            continue;
        };
        let doc = document::write_model(part);
        match out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
                let file = dir.join(format!("{name}.toml"));
                write_output(Some(&file), &doc)?;
                text.push_str(&format!("{name}: {}\n", file.display()));
                json[name] = json!(file);
            }
            None => {
                text.push_str(&format!("# {name}\n{doc}"));
                json[name] = json!(doc);
            }
        }
    }
    Ok(Report::ok(text, json))
}

fn cmd_bell(path: &Path, load: LoadOpts) -> anyhow::Result<Report> {
    let model = load_model(path, load.mode())?;
    let bell = fractions::bell_inequality(&model)?;
    let s = model.scenario();
    let mut text = String::from("coefficients:\n");
    let mut index = 0;
    let mut by_context = serde_json::Map::new();
    for k in 0..s.context_count() {
        let mut row = serde_json::Map::new();
        for j in 0..s.context_size(k) {
            let a = bell.coefficients[index];
            text.push_str(&format!("  [{}] {} = {}\n", s.context_key(k), s.joint_outcome_key(k, j), fmt(a)));
            row.insert(s.joint_outcome_key(k, j), json!(a));
            index += 1;
        }
        by_context.insert(s.context_key(k), Value::Object(row));
    }
    text.push_str(&format!(
        "classical bound {}\nviolation {}\n",
        fmt(bell.classical_bound),
        fmt(bell.normalized_violation)
    ));
    let mut json = json!(bell);
    json["by_context"] = Value::Object(by_context);
    Ok(Report::ok(text, json))
}

fn cmd_audit(path: &Path) -> anyhow::Result<Report> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let h = document::parse_hvm(&text).with_context(|| format!("in {}", path.display()))?;
    let audit = h.audit()?;
    let mut out = String::new();
    for d in &audit.per_lambda {
        out.push_str(&format!("  {}: eta {} sigma {}\n", d.lambda, fmt(d.eta), fmt(d.sigma)));
    }
    out.push_str(&format!(
        "eta {}\nsigma {}\n2*eta + sigma < 1: {}\nrealized CF {}\n",
        fmt(audit.eta),
        fmt(audit.sigma),
        audit.condition_ok,
        fmt(audit.realized_cf)
    ));
    Ok(Report::ok(out, json!(audit)))
}

fn parse_alpha(s: &str) -> anyhow::Result<Rational64> {
    Rational64::from_str(s)
        .ok()
        .or_else(|| s.parse::<f64>().ok().and_then(Rational64::approximate_float))
        .ok_or_else(|| anyhow!(cfcert_core::Error::AlphaOutOfRange(s.to_string())))
}

fn cmd_boundary(n: usize, alpha: &str, out: Option<&Path>) -> anyhow::Result<Report> {
    let b = hvm::boundary_hvm(n, parse_alpha(alpha)?)?;
    let text = format!(
        "{n}-cycle, alpha = {}\n  eta* = {}\n  sigma* = {}\n  sigma* + 2 eta* = {}\n  CF = {}\n",
        b.alpha,
        b.eta_star,
        b.sigma_star,
        b.sigma_star + Rational64::from_integer(2) * b.eta_star,
        fmt(b.cf)
    );
    if let Some(p) = out {
        write_output(Some(p), &document::write_hvm(&b.model))?;
    }
    Ok(Report::ok(
        text,
        json!({
            "n": n,
            "alpha": b.alpha.to_string(),
            "eta_star": b.eta_star.to_string(),
            "sigma_star": b.sigma_star.to_string(),
            "cf": b.cf,
        }),
    ))
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    match &cli.command {
        Command::Analyze { .. } => unreachable!("handled in main"),
        Command::Certify(args) => cmd_certify(args),
        Command::Generate { name, list, n, lambda, out } => {
            cmd_generate(name.as_deref(), *list, Params { n: *n, lambda: *lambda }, out.as_deref(), cli.json)
        }
        Command::Perturb { path, epsilon, seed, out, load } => {
            cmd_perturb(path, *epsilon, *seed, out.as_deref(), *load, cli.json)
        }
        Command::Decompose { path, kind, out_dir, load } => cmd_decompose(path, *kind, out_dir.as_deref(), *load),
        Command::Bell { path, load } => cmd_bell(path, *load),
        Command::Audit { path } => cmd_audit(path),
        Command::Boundary { n, alpha, out } => cmd_boundary(*n, alpha, out.as_deref()),
        Command::Deterministic { path, sigma_prime, load } => {
            let model = load_model(path, load.mode())?;
            let v = hvm::deterministic_count_decomposition(&model, *sigma_prime)?;
            let text = format!(
                "CF {}\nsigma' {}\ngenuine: {}\n",
                fmt(v.cf),
                fmt(v.sigma_prime),
                v.genuine
            );
            Ok(Report { text, json: json!(v), code: if v.genuine { 0 } else { EXIT_NOT_CERTIFIED } })
        }
        Command::Winter { weights, degrees, beta_cl, beta_max, epsilon } => {
            let w = certify::compare_winter_bound(weights, degrees, *beta_cl, *beta_max, *epsilon)?;
            let text = format!(
                "CF <= {} (this criterion)\nCF <= {} (weighted-degree bound)\nweighted-degree bound saturates at epsilon = {}\n",
                fmt(w.our_bound),
                fmt(w.winter_bound),
                fmt(w.winter_saturation)
            );
            Ok(Report::ok(text, json!(w)))
        }
    }
}

fn emit(report: &Report, json_mode: bool) {
    if json_mode {
        eprint!("{}", report.text);
        println!("{}", serde_json::to_string_pretty(&report.json).unwrap_or_default());
    } else {
        print!("{}", report.text);
    }
    let _ = std::io::stdout().flush();
}

fn fail(err: &anyhow::Error) -> u8 {
    eprintln!("error: {err:#}");
    exit_code(err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Analyze { paths, load, exact, batch } = &cli.command {
        let results = cmd_analyze(paths, *load, *exact, *batch);
        let mut code = 0;
        let mut docs = Vec::new();
        for (path, result) in &results {
            match result {
                Ok(r) => {
                    if cli.json {
                        eprint!("{}", r.text);
                    } else {
                        print!("{}", r.text);
                    }
                    docs.push(r.json.clone());
                }
                Err(e) => {
                    let c = fail(e);
                    docs.push(json!({ "path": path, "error": format!("{e:#}"), "exit_code": c }));
                    if code == 0 {
                        code = c;
                    }
                }
            }
        }
        if cli.json {
            let out = if docs.len() == 1 { docs.remove(0) } else { Value::Array(docs) };
            println!("{}", serde_json::to_string_pretty(&out).unwrap_or_default());
        }
        return ExitCode::from(code);
    }
    match run(&cli) {
        Ok(report) => {
            emit(&report, cli.json);
            ExitCode::from(report.code)
        }
        Err(e) => ExitCode::from(fail(&e)),
    }
}
