//! Command-line interface: key-length tables, design verification, the
//! same-key pad attack demo, broadcast simulation, and the subsampled
//! symmetric-design study.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 verification failed
//! where exactness was required, 3 resource budget exceeded.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use qpb_core::designs::{
    approx_design_epsilon, clifford_1q_ensemble, subsample_ensemble, verify_exact_design,
    UnitaryEnsemble,
};
use qpb_core::error::QpbError;
use qpb_core::keylen;
use qpb_core::linalg::{fidelity, mat_from_pairs, mat_to_pairs, DensityMatrix};
use qpb_core::pauli::{dqotp_attack_report, independent_qotp_ensemble, pauli_ensemble};
use qpb_core::qpb::{symmetric_design_epsilon, QpbScheme};
use qpb_core::symspace::{project_symmetric, SymOutcome};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const EXACT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "qpb",
    version,
    about = "Quantum private broadcasting: key-length tables, design verification, and broadcast simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the key-length comparison table (one-time pads vs designs)
    Keylen(KeylenArgs),
    /// Verify an ensemble as an exact/approximate (symmetric) unitary t-design
    Verify(VerifyArgs),
    /// Run the same-key pad distinguishing attack on t copies
    AttackDqotp(AttackArgs),
    /// Simulate one broadcast: project, encrypt, split, decrypt per recipient
    Broadcast(BroadcastArgs),
    /// Measure symmetric-design quality of subsampled ensembles across n
    SampleSymdesign(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// RNG seed; falls back to QPB_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Write output here instead of stdout
    #[arg(long)]
    output: Option<String>,
    /// Refuse computations with d^t above this fence
    #[arg(long, default_value_t = 4096)]
    max_dim: usize,
}

#[derive(Args)]
struct KeylenArgs {
    /// Local (qudit) dimension
    #[arg(long, default_value_t = 2)]
    d: u64,
    /// Largest recipient count t
    #[arg(long = "t-max", default_value_t = 20)]
    t_max: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Emit full-precision values instead of the 2-decimal display
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Builtin name (pauli1q, clifford1q, qotp-indep) or ensemble JSON path
    #[arg(long)]
    ensemble: String,
    /// Design order to test
    #[arg(long)]
    t: usize,
    /// Local dimension for the qotp-indep builtin
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Qudits per message for the qotp-indep builtin
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Copies for the qotp-indep builtin
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Evaluation cap for the 1→1 lower-bound search
    #[arg(long = "search-budget", default_value_t = 64)]
    search_budget: usize,
    /// Exactness tolerance on the moment-operator distance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Exit 2 unless the ensemble is an exact t-design
    #[arg(long = "require-exact")]
    require_exact: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AttackArgs {
    /// Number of recipients (copies under one key)
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Use an independent key per copy (the attack then fails)
    #[arg(long = "independent-keys")]
    independent_keys: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BroadcastArgs {
    /// Builtin name or ensemble JSON path
    #[arg(long, default_value = "clifford1q")]
    ensemble: String,
    /// Number of recipients
    #[arg(long)]
    t: usize,
    /// Local dimension for the qotp-indep builtin
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Qudits per message for the qotp-indep builtin
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Copies for the qotp-indep builtin
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Plaintext density matrix JSON ({"dim": n, "matrix": [[re,im],...]});
    /// a random symmetric pure state is drawn when absent
    #[arg(long)]
    state: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Source ensemble: builtin name or JSON path (must be an exact t-design)
    #[arg(long, default_value = "clifford1q")]
    ensemble: String,
    /// Design order
    #[arg(long, default_value_t = 3)]
    t: usize,
    /// Comma-separated subsample sizes
    #[arg(long = "n-list", default_value = "8,32,128", value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Trials per subsample size
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long = "search-budget", default_value_t = 24)]
    search_budget: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    common: CommonArgs,
}

enum CliError {
    Usage(String),
    VerificationFailed(String),
    Budget(String),
}

impl From<QpbError> for CliError {
    fn from(e: QpbError) -> Self {
        match e {
            QpbError::ResourceLimit(msg) => CliError::Budget(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, anything else is usage
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match cli.command {
        Command::Keylen(args) => cmd_keylen(args),
        Command::Verify(args) => cmd_verify(args),
        Command::AttackDqotp(args) => cmd_attack(args),
        Command::Broadcast(args) => cmd_broadcast(args),
        Command::SampleSymdesign(args) => cmd_sample(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::VerificationFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Budget(msg)) => {
            eprintln!("resource budget exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}

fn resolve_seed(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var("QPB_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn emit(output: &Option<String>, payload: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, payload)
            .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(payload.as_bytes())
                .map_err(|e| CliError::Usage(format!("cannot write stdout: {e}")))
        }
    }
}

fn check_dim_fence(d: usize, t: usize, max_dim: usize) -> Result<(), CliError> {
    let mut acc: usize = 1;
    for _ in 0..t {
        acc = acc
            .checked_mul(d)
            .ok_or_else(|| CliError::Budget(format!("{d}^{t} overflows")))?;
        if acc > max_dim {
            return Err(CliError::Budget(format!("{d}^{t} exceeds --max-dim {max_dim}")));
        }
    }
    Ok(())
}

fn load_ensemble(
    source: &str,
    d: usize,
    n: usize,
    copies: usize,
) -> Result<UnitaryEnsemble, CliError> {
    match source {
        "pauli1q" => Ok(pauli_ensemble(2, 1)?),
        "clifford1q" => Ok(clifford_1q_ensemble()),
        "qotp-indep" => Ok(independent_qotp_ensemble(d, n, copies)?),
        path => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!(
                    "'{path}' is not a builtin ensemble (pauli1q, clifford1q, qotp-indep) \
                     and cannot be read as a file: {e}"
                ))
            })?;
            Ok(UnitaryEnsemble::from_json_str(&text)?)
        }
    }
}

fn meta(command: &str, seed: u64, flags: serde_json::Value) -> serde_json::Value {
    json!({ "version": VERSION, "command": command, "seed": seed, "flags": flags })
}

fn cmd_keylen(args: KeylenArgs) -> Result<(), CliError> {
    if args.d < 2 {
        return Err(CliError::Usage(format!("--d must be at least 2, got {}", args.d)));
    }
    if args.t_max < 1 {
        return Err(CliError::Usage("--t-max must be at least 1".into()));
    }
    let seed = resolve_seed(args.common.seed);
    let rows = keylen::emit_table(args.d, args.t_max)?;
    let payload = match args.format {
        Format::Csv => {
            let mut out = String::from("t,qotp_bits,weighted_bits,symmetric_bits\n");
            for r in &rows {
                if args.exact {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        r.t, r.qotp_bits, r.weighted_design_bits, r.symmetric_weighted_bits
                    )
                    .unwrap();
                } else {
                    writeln!(
                        out,
                        "{},{:.2},{:.2},{:.2}",
                        r.t, r.qotp_bits, r.weighted_design_bits, r.symmetric_weighted_bits
                    )
                    .unwrap();
                }
            }
            out
        }
        Format::Json => {
            let report = json!({
                "meta": meta("keylen", seed, json!({
                    "d": args.d, "t_max": args.t_max, "exact": args.exact,
                })),
                "rows": rows,
            });
            format!("{}\n", serde_json::to_string_pretty(&report).unwrap())
        }
    };
    emit(&args.common.output, &payload)
}

#[derive(Serialize)]
struct SymmetricReport {
    exact: bool,
    d_sym: usize,
    epsilon_lower: f64,
    epsilon_choi: f64,
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.t < 1 {
        return Err(CliError::Usage("--t must be at least 1".into()));
    }
    let seed = resolve_seed(args.common.seed);
    let ensemble = load_ensemble(&args.ensemble, args.d, args.n, args.copies)?;
    check_dim_fence(ensemble.dim(), args.t, args.common.max_dim)?;

    let verdict = verify_exact_design(&ensemble, args.t, args.tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = approx_design_epsilon(&ensemble, args.t, args.search_budget, &mut rng)?;

    let scheme = QpbScheme::new(ensemble.clone(), args.t)?;
    let sym_bounds = symmetric_design_epsilon(&scheme, args.search_budget, &mut rng)?;
    let symmetric = SymmetricReport {
        exact: sym_bounds.choi_distance <= EXACT_TOL,
        d_sym: scheme.space().d_sym(),
        epsilon_lower: sym_bounds.lower_bound,
        epsilon_choi: sym_bounds.choi_distance,
    };

    let report = json!({
        "meta": meta("verify", seed, json!({
            "ensemble": args.ensemble, "t": args.t, "d": args.d, "n": args.n,
            "copies": args.copies, "search_budget": args.search_budget,
            "tol": args.tol, "require_exact": args.require_exact,
        })),
        "ensemble": {
            "dim": ensemble.dim(),
            "members": ensemble.len(),
            "support": ensemble.support_size(),
            "key_bits": ensemble.key_bits(),
        },
        "t": args.t,
        "exact": verdict.exact,
        "moment_distance": verdict.moment_distance,
        "frame_potential": verdict.frame_potential,
        "haar_value": verdict.haar_frame_potential,
        "epsilon_lower": bounds.lower_bound,
        "epsilon_choi": bounds.choi_distance,
        "symmetric": symmetric,
    });
    emit(
        &args.common.output,
        &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
    )?;
    if args.require_exact && !verdict.exact {
        return Err(CliError::VerificationFailed(format!(
            "ensemble is not an exact {}-design (moment distance {:.3e})",
            args.t, verdict.moment_distance
        )));
    }
    Ok(())
}

fn cmd_attack(args: AttackArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.common.seed);
    check_dim_fence(2, args.t, args.common.max_dim)?;
    let report = dqotp_attack_report(args.t, args.independent_keys)?;
    let pass = report.statistic >= 0.5 - 1e-9;
    let out = json!({
        "meta": meta("attack-dqotp", seed, json!({
            "t": args.t, "independent_keys": args.independent_keys,
        })),
        "t": report.t,
        "independent_keys": report.independent_keys,
        "avg_cipher0": mat_to_pairs(&report.avg_cipher0),
        "avg_cipher1": mat_to_pairs(&report.avg_cipher1),
        "statistic": report.statistic,
        "threshold": 0.5,
        "pass": pass,
        "verdict": if pass {
            "PASS: same-key broadcasting is distinguishable"
        } else {
            "statistic below threshold: no distinguishing advantage"
        },
    });
    emit(
        &args.common.output,
        &format!("{}\n", serde_json::to_string_pretty(&out).unwrap()),
    )
}

fn load_state(path: &str) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read state file {path}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("state file {path} is not JSON: {e}")))?;
    let dim = value
        .get("dim")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CliError::Usage("state file needs an integer \"dim\"".into()))?
        as usize;
    let pairs: Vec<[f64; 2]> = serde_json::from_value(
        value
            .get("matrix")
            .cloned()
            .ok_or_else(|| CliError::Usage("state file needs a \"matrix\" array".into()))?,
    )
    .map_err(|e| CliError::Usage(format!("state matrix entries must be [re, im] pairs: {e}")))?;
    Ok(DensityMatrix::new(mat_from_pairs(dim, dim, &pairs)?)?)
}

fn cmd_broadcast(args: BroadcastArgs) -> Result<(), CliError> {
    if args.t < 1 {
        return Err(CliError::Usage("--t must be at least 1".into()));
    }
    let seed = resolve_seed(args.common.seed);
    let ensemble = load_ensemble(&args.ensemble, args.d, args.n, args.copies)?;
    check_dim_fence(ensemble.dim(), args.t, args.common.max_dim)?;
    let scheme = QpbScheme::new(ensemble, args.t)?;
    let space = scheme.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let plaintext = match &args.state {
        Some(path) => {
            let state = load_state(path)?;
            if state.dim() != space.dim() {
                return Err(CliError::Usage(format!(
                    "state has dimension {}, scheme needs {}",
                    state.dim(),
                    space.dim()
                )));
            }
            state
        }
        None => DensityMatrix::pure(&space.random_symmetric_ket(&mut rng))?,
    };

    let flags = json!({
        "ensemble": args.ensemble, "t": args.t, "state": args.state,
    });

    // pre-broadcast projective measurement; abort on the rejected branch
    let projection = project_symmetric(&plaintext, space)?;
    let (outcome, post_state, outcome_prob) = projection.sample(&mut rng);
    if outcome == SymOutcome::Rejected {
        let transcript = json!({
            "meta": meta("broadcast", seed, flags),
            "projection": {
                "symmetric_probability": projection.prob_symmetric,
                "outcome": "rejected",
                "outcome_probability": outcome_prob,
            },
            "aborted": true,
        });
        return emit(
            &args.common.output,
            &format!("{}\n", serde_json::to_string_pretty(&transcript).unwrap()),
        );
    }
    let plaintext = post_state.clone();

    let key_index = scheme.sample_key(&mut rng);
    let cipher = scheme.encrypt(key_index, &plaintext)?;
    let dims = vec![scheme.d(); args.t];
    let mut fidelities = Vec::with_capacity(args.t);
    for recipient in 0..args.t {
        let share = cipher.partial_trace(&dims, &[recipient])?;
        let recovered = scheme.decrypt_local(key_index, &share)?;
        let target = plaintext.partial_trace(&dims, &[recipient])?;
        fidelities.push(fidelity(&recovered, &target));
    }

    let transcript = json!({
        "meta": meta("broadcast", seed, flags),
        "projection": {
            "symmetric_probability": projection.prob_symmetric,
            "outcome": "symmetric",
            "outcome_probability": outcome_prob,
        },
        "aborted": false,
        "key_index": key_index,
        "key_bits": scheme.key_bits(),
        "recipients": args.t,
        "fidelities": fidelities,
    });
    emit(
        &args.common.output,
        &format!("{}\n", serde_json::to_string_pretty(&transcript).unwrap()),
    )
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    if args.trials < 1 || args.n_list.is_empty() {
        return Err(CliError::Usage("need at least one trial and one subsample size".into()));
    }
    if args.n_list.contains(&0) {
        return Err(CliError::Usage("subsample sizes must be at least 1".into()));
    }
    let seed = resolve_seed(args.common.seed);
    let source = load_ensemble(&args.ensemble, 2, 1, 1)?;
    check_dim_fence(source.dim(), args.t, args.common.max_dim)?;

    let verdict = verify_exact_design(&source, args.t, EXACT_TOL)?;
    if !verdict.exact {
        return Err(CliError::VerificationFailed(format!(
            "source ensemble is not an exact {}-design (moment distance {:.3e}); \
             the sampling construction requires one",
            args.t, verdict.moment_distance
        )));
    }

    let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
    for &n in &args.n_list {
        for trial in 0..args.trials {
            let trial_seed = seed ^ ((n as u64) << 32) ^ trial as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
            let sub = subsample_ensemble(&source, n, &mut rng)?;
            let scheme = QpbScheme::new(sub, args.t)?;
            let bounds = symmetric_design_epsilon(&scheme, args.search_budget, &mut rng)?;
            rows.push((n, trial, bounds.lower_bound, bounds.choi_distance));
        }
    }

    let medians: Vec<(usize, f64, f64)> = args
        .n_list
        .iter()
        .map(|&n| {
            let mut lows: Vec<f64> = rows.iter().filter(|r| r.0 == n).map(|r| r.2).collect();
            let mut chois: Vec<f64> = rows.iter().filter(|r| r.0 == n).map(|r| r.3).collect();
            (n, median(&mut lows), median(&mut chois))
        })
        .collect();

    let payload = match args.format {
        Format::Csv => {
            let mut out = String::from("n,trial,eps_lower,eps_choi\n");
            for (n, trial, lo, choi) in &rows {
                writeln!(out, "{n},{trial},{lo},{choi}").unwrap();
            }
            out
        }
        Format::Json => {
            let report = json!({
                "meta": meta("sample-symdesign", seed, json!({
                    "ensemble": args.ensemble, "t": args.t, "n_list": args.n_list,
                    "trials": args.trials, "search_budget": args.search_budget,
                })),
                "rows": rows.iter().map(|(n, trial, lo, choi)| json!({
                    "n": n, "trial": trial, "eps_lower": lo, "eps_choi": choi,
                })).collect::<Vec<_>>(),
                "medians": medians.iter().map(|(n, lo, choi)| json!({
                    "n": n, "median_eps_lower": lo, "median_eps_choi": choi,
                })).collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&report).unwrap())
        }
    };
    emit(&args.common.output, &payload)
}
