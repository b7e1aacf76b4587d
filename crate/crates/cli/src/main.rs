//! `cqid` — command-line experiment runner for identification over
//! classical-quantum channels: loads channel documents, dispatches to the
//! solvers and code constructors, and emits deterministic reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cqid_cli::{emit, OutputFormat, Report, RowValue};
use cqid_core::channel::{ChannelSemantics, IndexedChannelFamily, WiretapFlavour};
use cqid_core::document::{
    parse_channel_document, parse_code_bundle, parse_wiretap_code_bundle,
    serialize_channel_document, serialize_code_bundle, ChannelDocument, CodeBundle, DocumentError,
};
use cqid_core::id::{
    assemble_id_code, build_transmission_code, evaluate_id_errors, gilbert_family,
    sequential_identification, EvaluationMode, IdError, TransmissionCodeOptions,
};
use cqid_core::info::{
    avc_transmission_capacity, avwc_secrecy_lower_bound, compound_capacity,
    compound_secrecy_lower_bound, holevo_capacity, secrecy_lower_bound_single_letter,
    symmetrizability_check, CapacityReport, InfoError,
};
use cqid_core::linalg::{LinalgError, Tolerances};
use cqid_core::secrecy::{
    build_wiretap_id_code, collision_statistics, dichotomy_avwc, dichotomy_compound,
    dichotomy_point, discontinuity_probe, superactivation_check, DichotomyOptions, DichotomyReport,
    SecrecyError, WiretapIdOptions,
};
use cqid_core::Guards;

const EXIT_PRECONDITION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cqid",
    version,
    about = "Identification over classical-quantum channels: capacities, codes, dichotomies"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed for all randomized constructions and searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Capacity / positivity tolerance in bits.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Symmetrizability residual threshold.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_symm: f64,
    /// Largest total output dimension an operation may materialize.
    #[arg(long, global = true, default_value_t = 4096)]
    dim_guard: usize,
    /// Largest adversary sequence count enumerated exactly.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    enum_guard: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Holevo capacity of a point cq-channel.
    Capacity { input: PathBuf },
    /// Max-min capacity of a compound family.
    CompoundCapacity { input: PathBuf },
    /// AVC transmission capacity (symmetrizability-gated random coding).
    AvcCapacity { input: PathBuf },
    /// Symmetrizability decision with certificate.
    Symmetrizable { input: PathBuf },
    /// Single-letter secrecy lower-bound proxy of a wiretap pair.
    SecrecyLb {
        input: PathBuf,
        /// Auxiliary alphabet size (default: input alphabet).
        #[arg(long)]
        u_size: Option<usize>,
    },
    /// Build a transmission code plus set family and assemble an ID code.
    IdBuild {
        input: PathBuf,
        #[arg(long)]
        block_length: usize,
        /// Transmission code size M.
        #[arg(long)]
        size: usize,
        /// Number of ID messages N.
        #[arg(long)]
        messages: usize,
        /// Subset fraction: subsets have floor(epsilon * M) elements.
        #[arg(long)]
        epsilon: f64,
        /// Intersection fraction bound of the set family.
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 8)]
        attempts: usize,
        /// Fail unless some attempt reaches this worst-case error.
        #[arg(long)]
        lambda_target: Option<f64>,
        /// Also write the code bundle here.
        #[arg(long)]
        bundle_out: Option<PathBuf>,
    },
    /// Exact (or sampled beyond the guard) ID error evaluation of a bundle.
    IdEval {
        input: PathBuf,
        bundle: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Compound)]
        mode: Mode,
        #[arg(long, default_value_t = 4096)]
        sample_budget: usize,
    },
    /// Sequential identification simulation on an ID-code bundle.
    SeqId {
        input: PathBuf,
        bundle: PathBuf,
        #[arg(long)]
        message: usize,
        /// Comma-separated query messages, asked in order.
        #[arg(long)]
        queries: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Build the concatenated wiretap ID code.
    WiretapIdBuild {
        input: PathBuf,
        #[arg(long)]
        block_length: usize,
        #[arg(long)]
        outer_size: usize,
        #[arg(long)]
        inner_size: usize,
        #[arg(long)]
        messages: usize,
        #[arg(long, default_value_t = 4)]
        attempts: usize,
        /// Error level plugged into the collision existence inequality.
        #[arg(long, default_value_t = 0.5)]
        collision_lambda: f64,
        #[arg(long)]
        bundle_out: Option<PathBuf>,
    },
    /// Dichotomy evaluation: transmission capacity, secrecy positivity,
    /// secure ID capacity.
    Dichotomy {
        input: PathBuf,
        #[arg(long)]
        u_size: Option<usize>,
    },
    /// Distance between two channel documents of the same kind.
    Distance { a: PathBuf, b: PathBuf },
    /// Probe the discontinuity characterization at a wiretap pair.
    DiscontinuityProbe {
        input: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[arg(long)]
        u_size: Option<usize>,
        /// Write the found witness pair as a channel document.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Super-activation condition evaluation for two AVC wiretap pairs.
    Superactivation {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        u_size: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Compound,
    Avc,
}

// ---------------------------------------------------------------------------
// Error classification: exit 2 for precondition problems, 3 for solver
// failures.
// ---------------------------------------------------------------------------

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn precondition(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }

    fn solver(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_SOLVER,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::precondition(format!("io: {e}"))
    }
}

impl From<LinalgError> for Failure {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NumericalFailure(_) => Failure::solver(e.to_string()),
            _ => Failure::precondition(e.to_string()),
        }
    }
}

impl From<cqid_core::channel::ChannelError> for Failure {
    fn from(e: cqid_core::channel::ChannelError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<InfoError> for Failure {
    fn from(e: InfoError) -> Self {
        match e {
            InfoError::ConvergenceFailure { .. } | InfoError::SolverFailure(_) => {
                Failure::solver(e.to_string())
            }
            InfoError::Channel(inner) => inner.into(),
            InfoError::Linalg(inner) => inner.into(),
        }
    }
}

impl From<IdError> for Failure {
    fn from(e: IdError) -> Self {
        match e {
            IdError::NoCodeFound { .. } | IdError::ConstructionExhausted { .. } => {
                Failure::solver(e.to_string())
            }
            IdError::Channel(inner) => inner.into(),
            IdError::Linalg(inner) => inner.into(),
            IdError::Info(inner) => inner.into(),
            _ => Failure::precondition(e.to_string()),
        }
    }
}

impl From<SecrecyError> for Failure {
    fn from(e: SecrecyError) -> Self {
        match e {
            SecrecyError::ComponentCodeFailure(_) => Failure::solver(e.to_string()),
            SecrecyError::NotCommuting { .. } => Failure::precondition(e.to_string()),
            SecrecyError::Channel(inner) => inner.into(),
            SecrecyError::Linalg(inner) => inner.into(),
            SecrecyError::Info(inner) => inner.into(),
            SecrecyError::Id(inner) => inner.into(),
        }
    }
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let format = match cli.common.format {
                Format::Text => OutputFormat::Text,
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let rendered = emit(&report, format);
            if let Some(path) = &cli.common.out {
                if let Err(e) = std::fs::write(path, rendered) {
                    eprintln!("cqid: cannot write report: {e}");
                    return ExitCode::from(EXIT_PRECONDITION);
                }
            } else {
                print!("{rendered}");
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("cqid: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn guards_from(common: &Common) -> Guards {
    let threads = std::env::var("CQID_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1)
        .max(1);
    Guards {
        dim_guard: common.dim_guard,
        enumeration_guard: common.enum_guard,
        threads,
    }
}

fn load_document(path: &Path) -> Result<ChannelDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::precondition(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_channel_document(&text)?)
}

fn any_family(
    doc: ChannelDocument,
    semantics: ChannelSemantics,
) -> Result<IndexedChannelFamily, Failure> {
    match doc {
        ChannelDocument::Cq(c) => Ok(IndexedChannelFamily::singleton(semantics, c)),
        ChannelDocument::Family(f) => Ok(f.with_semantics(semantics)),
        ChannelDocument::Wiretap(_) => Err(Failure::precondition(
            "expected a channel document, got a wiretap pair",
        )),
    }
}

fn capacity_rows(report: &mut Report, prefix: &str, cap: &CapacityReport) {
    report.number(prefix, cap.value);
    report.number("gap", cap.gap_estimate);
    report.integer("iterations", cap.iterations as u64);
    for (x, w) in cap.optimizer.weights().iter().enumerate() {
        report.push(&format!("p_opt[{x}]"), RowValue::Number(*w), "");
    }
    if let Some(q) = &cap.index_optimizer {
        for (t, w) in q.weights().iter().enumerate() {
            report.push(&format!("q_opt[{t}]"), RowValue::Number(*w), "");
        }
    }
    if !cap.active_indices.is_empty() {
        let active = cap
            .active_indices
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        report.push("active_indices", RowValue::Text(active), "");
    }
}

fn dichotomy_rows(report: &mut Report, r: &DichotomyReport) {
    report.number("C", r.transmission_capacity);
    report.number("secrecy_proxy", r.secrecy_proxy);
    report.text("secrecy_positive", r.secrecy_positive.label());
    report.number("C_SID", r.sid_capacity);
    for line in &r.rationale {
        report.text("rationale", line);
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let common = &cli.common;
    let guards = guards_from(common);
    let tol = common.tol;
    if tol <= 0.0 {
        return Err(Failure::precondition("--tol must be positive"));
    }

    match &cli.command {
        Command::Capacity { input } => {
            let ch = load_document(input)?.expect_cq()?;
            let mut report = report_for(cli, "capacity", &[input])?;
            let cap = holevo_capacity(&ch, tol)?;
            capacity_rows(&mut report, "C", &cap);
            Ok(report)
        }
        Command::CompoundCapacity { input } => {
            let fam = any_family(load_document(input)?, ChannelSemantics::Compound)?;
            let mut report = report_for(cli, "compound-capacity", &[input])?;
            let cap = compound_capacity(&fam, tol)?;
            capacity_rows(&mut report, "C_compound", &cap);
            Ok(report)
        }
        Command::AvcCapacity { input } => {
            let fam = any_family(load_document(input)?, ChannelSemantics::Avc)?;
            let mut report = report_for(cli, "avc-capacity", &[input])?;
            let (cap, cert) = avc_transmission_capacity(&fam, tol, common.tol_symm)?;
            report.number("C_avc", cap.value);
            report.boolean("symmetrizable", cert.symmetrizable);
            report.number("residual", cert.residual);
            if !cert.symmetrizable {
                capacity_rows(&mut report, "C_ran", &cap);
            }
            Ok(report)
        }
        Command::Symmetrizable { input } => {
            let fam = any_family(load_document(input)?, ChannelSemantics::Avc)?;
            let mut report = report_for(cli, "symmetrizable", &[input])?;
            let cert = symmetrizability_check(&fam, common.tol_symm)?;
            report.boolean("symmetrizable", cert.symmetrizable);
            report.number("residual", cert.residual);
            report.number("tolerance", cert.tolerance);
            if let Some(tau) = &cert.tau {
                for (x, row) in tau.iter().enumerate() {
                    for (t, w) in row.weights().iter().enumerate() {
                        report.push(&format!("tau[{t}|{x}]"), RowValue::Number(*w), "");
                    }
                }
            }
            Ok(report)
        }
        Command::SecrecyLb { input, u_size } => {
            let wp = load_document(input)?.expect_wiretap()?;
            let mut report = report_for(cli, "secrecy-lb", &[input])?;
            let u = u_size.unwrap_or_else(|| wp.alphabet_size());
            let bound = match wp.flavour() {
                WiretapFlavour::Point => {
                    secrecy_lower_bound_single_letter(&wp, u, tol, common.seed)?
                }
                WiretapFlavour::Compound => compound_secrecy_lower_bound(&wp, u, tol, common.seed)?,
                WiretapFlavour::Avc => avwc_secrecy_lower_bound(&wp, u, tol, common.seed)?,
            };
            report.number("secrecy_lb", bound.value);
            report.integer("u_size", u as u64);
            report.integer("starts", bound.starts as u64);
            report.integer("iterations", bound.iterations as u64);
            Ok(report)
        }
        Command::IdBuild {
            input,
            block_length,
            size,
            messages,
            epsilon,
            lambda,
            attempts,
            lambda_target,
            bundle_out,
        } => {
            let fam = any_family(load_document(input)?, ChannelSemantics::Compound)?;
            let mut report = report_for(cli, "id-build", &[input])?;
            let mut options = TransmissionCodeOptions::new(*block_length, *size, common.seed);
            options.attempts = *attempts;
            options.lambda_target = *lambda_target;
            let tc = build_transmission_code(&fam, &options, &guards)?;
            let sets = gilbert_family(
                *size,
                *epsilon,
                *lambda,
                *messages,
                common.seed.wrapping_add(1),
            )?;
            let code = assemble_id_code(&tc, &sets, &fam, &guards)?;
            report.number("lambda", tc.max_error());
            report.number("lambda1", code.lambda1());
            report.number("lambda2", code.lambda2());
            report.integer("M", tc.size() as u64);
            report.integer("N", code.len() as u64);
            report.integer("subset_size", sets.subset_size() as u64);
            report.number("rate_loglogN_over_n", code.rate());
            if let Some(path) = bundle_out {
                let bundle = CodeBundle::Id {
                    code,
                    transmission: tc,
                    sets,
                };
                std::fs::write(path, serialize_code_bundle(&bundle))?;
                report.text("bundle", &path.display().to_string());
            }
            Ok(report)
        }
        Command::IdEval {
            input,
            bundle,
            mode,
            sample_budget,
        } => {
            let semantics = match mode {
                Mode::Compound => ChannelSemantics::Compound,
                Mode::Avc => ChannelSemantics::Avc,
            };
            let doc = load_document(input)?;
            let text = std::fs::read_to_string(bundle)?;
            // A wiretap input evaluates a wiretap ID bundle (legal-side
            // errors plus Eve's mu); a channel input evaluates a plain ID
            // bundle under the requested adversary mode.
            if let ChannelDocument::Wiretap(wp) = &doc {
                let parsed = parse_wiretap_code_bundle(&text, wp, &guards)?;
                let CodeBundle::WiretapId(code) = parsed else {
                    return Err(Failure::precondition("expected a wiretap-id-code bundle"));
                };
                let mut report = report_for(cli, "id-eval", &[input, bundle])?;
                report.number("lambda1", code.lambda1());
                report.number("lambda2", code.lambda2());
                report.number("mu", code.mu());
                report.number("mu_inner", code.mu_inner());
                report.boolean("mu_exact", code.mu_exact());
                return Ok(report);
            }
            let fam = any_family(doc, semantics)?;
            let parsed = parse_code_bundle(&text, &fam, &guards)?;
            let code = match &parsed {
                CodeBundle::Id { code, .. } => code,
                CodeBundle::Transmission(_) | CodeBundle::WiretapId(_) => {
                    return Err(Failure::precondition("id-eval needs an id-code bundle"))
                }
            };
            let mut report = report_for(cli, "id-eval", &[input, bundle])?;
            let eval_mode = match mode {
                Mode::Compound => EvaluationMode::Compound,
                Mode::Avc => EvaluationMode::Avc,
            };
            let errors =
                evaluate_id_errors(code, &fam, eval_mode, &guards, *sample_budget, common.seed)?;
            report.number("lambda1", errors.lambda1);
            report.number("lambda2", errors.lambda2);
            report.boolean("exact", errors.exact);
            let (i, seq) = &errors.witness1;
            report.push(
                "witness1",
                RowValue::Text(format!("i={i} t={}", format_seq(seq))),
                if errors.exact { "exact" } else { "lower-bound" },
            );
            let (i, j, seq) = &errors.witness2;
            report.push(
                "witness2",
                RowValue::Text(format!("i={i} j={j} t={}", format_seq(seq))),
                if errors.exact { "exact" } else { "lower-bound" },
            );
            Ok(report)
        }
        Command::SeqId {
            input,
            bundle,
            message,
            queries,
            trials,
        } => {
            let ch = load_document(input)?.expect_cq()?;
            let fam = IndexedChannelFamily::singleton(ChannelSemantics::Compound, ch.clone());
            let text = std::fs::read_to_string(bundle)?;
            let parsed = parse_code_bundle(&text, &fam, &guards)?;
            let code = match &parsed {
                CodeBundle::Id { code, .. } => code,
                _ => return Err(Failure::precondition("seq-id needs an id-code bundle")),
            };
            let query_list: Vec<usize> = queries
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Failure::precondition(format!("bad --queries: {e}")))?;
            let mut report = report_for(cli, "seq-id", &[input, bundle])?;
            let sim = sequential_identification(
                code,
                &ch,
                *message,
                &query_list,
                *trials,
                common.seed,
                &guards,
            )?;
            report.number("all_correct", sim.all_correct_frequency);
            report.number("lambda", sim.lambda);
            report.number("epsilon_for_k", sim.epsilon_for_k);
            report.boolean("bound_satisfied", sim.bound_satisfied);
            report.integer("trials", sim.trials);
            for (pos, err) in sim.per_query_error.iter().enumerate() {
                report.push(
                    &format!("query_error[{pos}]"),
                    RowValue::Number(*err),
                    &format!("message {}", query_list[pos]),
                );
            }
            Ok(report)
        }
        Command::WiretapIdBuild {
            input,
            block_length,
            outer_size,
            inner_size,
            messages,
            attempts,
            collision_lambda,
            bundle_out,
        } => {
            let wp = load_document(input)?.expect_wiretap()?;
            let mut report = report_for(cli, "wiretap-id-build", &[input])?;
            let mut opts = WiretapIdOptions::new(
                *block_length,
                *outer_size,
                *inner_size,
                *messages,
                common.seed,
            );
            opts.attempts = *attempts;
            let code = build_wiretap_id_code(&wp, &opts, &guards)?;
            report.number("lambda_outer", code.outer().max_error());
            report.number("lambda_inner", code.inner().max_error());
            report.number("lambda1", code.lambda1());
            report.number("lambda2", code.lambda2());
            report.number("mu", code.mu());
            report.number("mu_inner", code.mu_inner());
            report.boolean("mu_exact", code.mu_exact());
            report.integer("inner_block_length", code.inner().block_length() as u64);
            report.number("implied_capacity", code.implied().capacity);
            report.number("implied_epsilon", code.implied().epsilon);
            if let Some(b) = code.implied().loglog_bound {
                report.number("implied_loglogN_rate", b);
            }
            if *messages >= 2 {
                let col = collision_statistics(&code, 0, 1, *collision_lambda)?;
                report.integer("collisions_0_1", col.collisions as u64);
                report.number("collision_mean", col.empirical_mean);
                report.number("collision_expected", col.expected_mean);
                report.number("collision_tail", col.tail_probability);
                report.boolean("existence_check", col.existence_check);
            }
            if let Some(path) = bundle_out {
                std::fs::write(path, serialize_code_bundle(&CodeBundle::WiretapId(code)))?;
                report.text("bundle", &path.display().to_string());
            }
            Ok(report)
        }
        Command::Dichotomy { input, u_size } => {
            let wp = load_document(input)?.expect_wiretap()?;
            let mut report = report_for(cli, "dichotomy", &[input])?;
            let opts = DichotomyOptions {
                tol,
                u_size: *u_size,
                seed: common.seed,
                tol_symm: common.tol_symm,
                certified_positive: false,
            };
            let r = match wp.flavour() {
                WiretapFlavour::Point => dichotomy_point(&wp, &opts)?,
                WiretapFlavour::Compound => dichotomy_compound(&wp, &opts)?,
                WiretapFlavour::Avc => dichotomy_avwc(&wp, &opts)?,
            };
            dichotomy_rows(&mut report, &r);
            Ok(report)
        }
        Command::Distance { a, b } => {
            let tols = Tolerances::default();
            let doc_a = load_document(a)?;
            let doc_b = load_document(b)?;
            let mut report = report_for(cli, "distance", &[a, b])?;
            match (doc_a, doc_b) {
                (ChannelDocument::Cq(x), ChannelDocument::Cq(y)) => {
                    report.number("d", cqid_core::channel::channel_distance(&x, &y, &tols)?);
                }
                (ChannelDocument::Family(x), ChannelDocument::Family(y)) => {
                    report.number("D", cqid_core::channel::family_distance(&x, &y, &tols)?);
                }
                (ChannelDocument::Wiretap(x), ChannelDocument::Wiretap(y)) => {
                    if x.flavour() == WiretapFlavour::Point && y.flavour() == WiretapFlavour::Point
                    {
                        report.number(
                            "d_S",
                            cqid_core::channel::wiretap_distance_point(&x, &y, &tols)?,
                        );
                    } else {
                        report.number("D_S", cqid_core::channel::wiretap_distance(&x, &y, &tols)?);
                    }
                }
                _ => {
                    return Err(Failure::precondition(
                        "distance requires two documents of the same kind",
                    ))
                }
            }
            Ok(report)
        }
        Command::DiscontinuityProbe {
            input,
            epsilon,
            budget,
            u_size,
            witness_out,
        } => {
            let wp = load_document(input)?.expect_wiretap()?;
            let mut report = report_for(cli, "discontinuity-probe", &[input])?;
            let opts = DichotomyOptions {
                tol,
                u_size: *u_size,
                seed: common.seed,
                tol_symm: common.tol_symm,
                certified_positive: false,
            };
            let r = discontinuity_probe(&wp, *epsilon, *budget, &opts)?;
            report.boolean("transmission_positive", r.transmission_positive);
            report.number("C", r.transmission_capacity);
            report.boolean("proxy_zero", r.proxy_zero);
            report.number("secrecy_proxy", r.proxy_value);
            match &r.witness {
                Some((pair, dist, proxy)) => {
                    report.push("witness", RowValue::Text("FOUND".into()), "");
                    report.number("witness_distance", *dist);
                    report.number("witness_proxy", *proxy);
                    if let Some(path) = witness_out {
                        std::fs::write(
                            path,
                            serialize_channel_document(&ChannelDocument::Wiretap(pair.clone())),
                        )?;
                        report.text("witness_document", &path.display().to_string());
                    }
                }
                None => {
                    report.push(
                        "witness",
                        RowValue::Text("NOT_FOUND_WITHIN_BUDGET".into()),
                        "not a disproof",
                    );
                }
            }
            report.boolean("discontinuity", r.discontinuity);
            Ok(report)
        }
        Command::Superactivation { a, b, u_size } => {
            let wp_a = load_document(a)?.expect_wiretap()?;
            let wp_b = load_document(b)?.expect_wiretap()?;
            let mut report = report_for(cli, "superactivation", &[a, b])?;
            let opts = DichotomyOptions {
                tol,
                u_size: *u_size,
                seed: common.seed,
                tol_symm: common.tol_symm,
                certified_positive: false,
            };
            let r = superactivation_check(&wp_a, &wp_b, &opts, &guards)?;
            report.boolean("symmetrizable_1", r.symmetrizable[0]);
            report.boolean("symmetrizable_2", r.symmetrizable[1]);
            report.boolean("symmetrizable_tensor", r.tensor_symmetrizable);
            report.number("proxy_1", r.proxies[0]);
            report.number("proxy_2", r.proxies[1]);
            report.number("proxy_tensor", r.tensor_proxy);
            report.text("sid_status_1", r.sid_status[0].label());
            report.text("sid_status_2", r.sid_status[1].label());
            report.text("sid_status_tensor", r.tensor_sid_status.label());
            report.text("verdict", r.verdict.label());
            report.text("superadditivity", r.superadditivity.label());
            for line in &r.rationale {
                report.text("rationale", line);
            }
            Ok(report)
        }
    }
}

fn report_for(cli: &Cli, command: &str, inputs: &[&PathBuf]) -> Result<Report, Failure> {
    let guards = guards_from(&cli.common);
    let inputs: Vec<String> = inputs.iter().map(|p| p.display().to_string()).collect();
    Ok(Report::new(
        command,
        &inputs,
        cli.common.seed,
        cli.common.tol,
        &guards,
    ))
}

fn format_seq(seq: &[usize]) -> String {
    seq.iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join("")
}
