use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use certrev::demo::{demo_crt, demo_hcrs, parse_revoked};
use certrev::model::{CaId, Serial, Tick};
use certrev::sim::run::{compare_csv, deploy};
use certrev::sim::schemes::{decode_parts, encode_parts};
use certrev::sim::{compare, cost_report, run, Scenario, SchemeKind, ValidityProof, Verdict};

/// Certificate revocation schemes: simulation, worked examples and proofs.
#[derive(Parser)]
#[command(name = "certrev", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report traffic and cost.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the per-tick ledger as CSV.
        #[arg(long, value_name = "PATH")]
        ledger: Option<PathBuf>,
    },
    /// Run one scenario under several schemes and tabulate them as CSV.
    Compare {
        #[arg(long, value_name = "PATH")]
        scenario: PathBuf,
        /// Schemes to compare (repeatable or comma separated; default all).
        #[arg(long, value_name = "NAME", value_delimiter = ',')]
        scheme: Vec<String>,
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Three-CA revocation tree example with the (CA_1, 600) lookup.
    DemoCrt {
        /// Extra revocation as CA_N:SERIAL, e.g. CA_2:500 (repeatable).
        #[arg(long, value_name = "CA_N:SERIAL")]
        revoke: Vec<String>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// 16-leaf hierarchical chain tree cover example.
    DemoHcrs {
        /// Revoked leaves (comma separated 4-bit strings), "" or "all".
        #[arg(long, default_value = "0100,0101,1111")]
        revoked: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Write the status evidence for one certificate to a file.
    Prove {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
    },
    /// Check a proof file written by `prove`.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: Target,
        #[arg(long, value_name = "PATH")]
        proof: PathBuf,
    },
    /// Describe a proof file or a scenario file.
    Inspect {
        file: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Overrides the scenario seed (scenario default 1).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the scenario scheme.
    #[arg(long, value_name = "NAME")]
    scheme: Option<String>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Target {
    /// CA index within the scenario.
    #[arg(long, default_value_t = 0)]
    ca: CaId,
    #[arg(long)]
    serial: Serial,
    /// Tick (hours since issuance of the population).
    #[arg(long, default_value_t = 25)]
    at: Tick,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

enum Failure {
    Usage(String),
    Config(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Verification(m) => m,
        }
    }
}

fn config(e: impl std::fmt::Display) -> Failure {
    Failure::Config(e.to_string())
}

fn load_scenario(path: &Path, seed: Option<u64>, scheme: Option<&str>) -> Result<Scenario, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut sc = Scenario::from_toml(&src).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let Some(name) = scheme {
        sc.scheme = SchemeKind::parse(name).map_err(config)?;
    }
    sc.validate().map_err(config)?;
    Ok(sc)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Rebuilds the deployment and publishes up to `target.at` for one CA.
fn scheme_at(
    sc: &Scenario,
    target: &Target,
) -> Result<Box<dyn certrev::sim::RevocationScheme>, Failure> {
    let (states, schemes) = deploy(sc).map_err(config)?;
    let ca = target.ca as usize;
    let (state, mut scheme) = match states.into_iter().zip(schemes).nth(ca) {
        Some(x) => x,
        None => return Err(Failure::Usage(format!("scenario has no CA {ca}"))),
    };
    if state.cert(target.serial).is_none() {
        return Err(Failure::Usage(format!("CA {ca} has no certificate {}", target.serial)));
    }
    for t in 0..=target.at {
        scheme.publish(&state, t).map_err(config)?;
    }
    Ok(scheme)
}

fn simulate(common: &Common, format: Format, ledger: Option<&Path>) -> Result<(), Failure> {
    let sc = load_scenario(&common.scenario, common.seed, common.scheme.as_deref())?;
    let r = run(&sc).map_err(config)?;
    let report = cost_report(&r.ledger, &sc);
    let mut text = match format {
        Format::Csv => report.to_csv(&sc),
        Format::Text => report.to_text(&sc),
    };
    if let Format::Text = format {
        text.push_str(&format!(
            "validations: {} (answers fetched {}, skipped {})\naudit: {} checked, {} incorrect\n",
            r.validations, r.answers, r.skipped, r.audit.checked, r.audit.incorrect
        ));
    }
    emit(common.out.as_deref(), &text)?;
    if let Some(p) = ledger {
        emit(Some(p), &r.ledger.to_csv())?;
    }
    if r.audit.incorrect > 0 {
        return Err(Failure::Verification(format!(
            "{} verdicts disagree with the authoritative state",
            r.audit.incorrect
        )));
    }
    Ok(())
}

fn compare_cmd(scenario: &Path, schemes: &[String], seed: Option<u64>, out: Option<&Path>) -> Result<(), Failure> {
    let base = load_scenario(scenario, seed, None)?;
    let kinds: Vec<SchemeKind> = if schemes.is_empty() {
        SchemeKind::ALL.to_vec()
    } else {
        schemes
            .iter()
            .map(|s| SchemeKind::parse(s.trim()).map_err(config))
            .collect::<Result<_, _>>()?
    };
    let scenarios: Vec<Scenario> = kinds
        .into_iter()
        .map(|k| Scenario {
            scheme: k,
            ..base.clone()
        })
        .collect();
    for s in &scenarios {
        s.validate().map_err(config)?;
    }
    let rows = compare(&scenarios).map_err(config)?;
    emit(out, &compare_csv(&rows))
}

fn parse_injection(s: &str) -> Result<(usize, u64), Failure> {
    let bad = || Failure::Usage(format!("expected CA_N:SERIAL, found `{s}`"));
    let (ca, serial) = s.split_once(':').ok_or_else(bad)?;
    let n = ca.strip_prefix("CA_").unwrap_or(ca).parse().map_err(|_| bad())?;
    Ok((n, serial.parse().map_err(|_| bad())?))
}

fn demo_crt_cmd(revoke: &[String], out: Option<&Path>) -> Result<(), Failure> {
    let extra = revoke.iter().map(|s| parse_injection(s)).collect::<Result<Vec<_>, _>>()?;
    let d = demo_crt(&extra).map_err(|e| Failure::Usage(e.to_string()))?;
    emit(out, &d.text)?;
    if d.ok() {
        Ok(())
    } else {
        Err(Failure::Verification("proof does not reproduce the published root".into()))
    }
}

fn demo_hcrs_cmd(revoked: &str, out: Option<&Path>) -> Result<(), Failure> {
    let set = parse_revoked(revoked).map_err(|e| Failure::Usage(e.to_string()))?;
    let d = demo_hcrs(set);
    emit(out, &d.text)?;
    if d.ok() {
        Ok(())
    } else {
        Err(Failure::Verification("cover fails a verification-node condition".into()))
    }
}

fn prove(common: &Common, target: &Target) -> Result<(), Failure> {
    let sc = load_scenario(&common.scenario, common.seed, common.scheme.as_deref())?;
    let mut scheme = scheme_at(&sc, target)?;
    let ans = scheme.answer(target.serial, target.at).map_err(config)?;
    let parts: Vec<&ValidityProof> = ans.parts.iter().map(|p| p.proof.as_ref()).collect();
    let bytes = encode_parts(&parts);
    let path = common
        .out
        .as_deref()
        .ok_or_else(|| Failure::Usage("prove needs --out".into()))?;
    fs::write(path, &bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let verdict = scheme.verify(target.serial, &parts, target.at);
    println!(
        "wrote {} octets ({}) for CA {} serial {} at tick {}: {}",
        bytes.len(),
        parts.iter().map(|p| p.kind_name()).collect::<Vec<_>>().join("+"),
        target.ca,
        target.serial,
        target.at,
        verdict.name()
    );
    Ok(())
}

fn verify(common: &Common, target: &Target, proof: &Path) -> Result<(), Failure> {
    let sc = load_scenario(&common.scenario, common.seed, common.scheme.as_deref())?;
    let bytes = fs::read(proof).map_err(|e| Failure::Usage(format!("{}: {e}", proof.display())))?;
    let parts = decode_parts(&bytes).map_err(|e| Failure::Verification(format!("malformed proof: {e}")))?;
    let mut scheme = scheme_at(&sc, target)?;
    let refs: Vec<&ValidityProof> = parts.iter().collect();
    let verdict = scheme.verify(target.serial, &refs, target.at);
    let line = format!(
        "CA {} serial {} at tick {}: {}\n",
        target.ca,
        target.serial,
        target.at,
        verdict.name()
    );
    emit(common.out.as_deref(), &line)?;
    if verdict == Verdict::Invalid {
        Err(Failure::Verification("proof rejected".into()))
    } else {
        Ok(())
    }
}

fn inspect(file: &Path) -> Result<(), Failure> {
    let bytes = fs::read(file).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
    if let Ok(parts) = decode_parts(&bytes) {
        println!("proof file: {} octets, {} part(s)", bytes.len(), parts.len());
        for (i, p) in parts.iter().enumerate() {
            println!("  part {i}: {} ({} octets)", p.kind_name(), p.encode().len());
        }
        return Ok(());
    }
    let src = String::from_utf8(bytes).map_err(|_| Failure::Config("neither a proof nor a scenario file".into()))?;
    let sc = Scenario::from_toml(&src).map_err(|e| Failure::Config(format!("{}: {e}", file.display())))?;
    println!("{sc:#?}");
    println!("CAs: {}", sc.ca_count());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, format, ledger } => simulate(&common, format, ledger.as_deref()),
        Command::Compare {
            scenario,
            scheme,
            seed,
            out,
        } => compare_cmd(&scenario, &scheme, seed, out.as_deref()),
        Command::DemoCrt { revoke, out } => demo_crt_cmd(&revoke, out.as_deref()),
        Command::DemoHcrs { revoked, out } => demo_hcrs_cmd(&revoked, out.as_deref()),
        Command::Prove { common, target } => prove(&common, &target),
        Command::Verify { common, target, proof } => verify(&common, &target, &proof),
        Command::Inspect { file } => inspect(&file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
