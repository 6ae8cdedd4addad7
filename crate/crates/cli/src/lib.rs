//! Command implementations behind the `crtlattice` binary.
//!
//! Every command writes its primary output (spec JSON, reports, curves) to
//! the given writer and human-oriented notes to stderr, so output can be
//! piped straight into files or plotting tools.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crt_lattice::codespec::CodeSpecFile;
use crt_lattice::designer::{
    certify_subset_products, design_canonical, design_canonical_with, design_sos, design_sos_from, lift_cartesian,
    SosOutcome, UniformDesign,
};
use crt_lattice::index_code::UNIFORM_TOLERANCE_DB;
use crt_lattice::ring_arith::centered_residue;
use crt_lattice::sim::{monte_carlo, NoiseGrid};
use crt_lattice::{ChannelConfig, CrtIndexCode, DesignKind, GainReport, Limits, PrimeSet, SerCurve, Subset};

/// Domain failure: bad design, failed check, exceeded cap. Exit code 1.
#[derive(Debug)]
pub struct Failure(pub String);

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

/// Malformed invocation that clap cannot catch (e.g. bad `--snr`). Exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        2
    } else {
        1
    }
}

#[derive(Debug, Parser)]
#[command(name = "crtlattice", version, about = "CRT lattice index codes: design, analyze, verify, simulate")]
pub struct Cli {
    #[command(flatten)]
    pub caps: CapArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CapArgs {
    /// Largest target accepted by the sum-of-squares search.
    #[arg(long, global = true, default_value_t = Limits::default().sum_of_squares_max)]
    pub max_sos_target: i64,
    /// Largest modulus scanned for collinear witnesses.
    #[arg(long, global = true, default_value_t = Limits::default().collinear_max)]
    pub max_collinear_modulus: i64,
    /// Largest codebook enumerated for distances and decoding.
    #[arg(long, global = true, default_value_t = Limits::default().codebook_max)]
    pub max_codebook: u64,
    /// Node budget for lattice and square searches.
    #[arg(long, global = true, default_value_t = Limits::default().search_nodes)]
    pub max_search_nodes: u64,
    /// Codes up to this size are checked exhaustively rather than sampled.
    #[arg(long, global = true, default_value_t = Limits::default().exhaustive_check_max)]
    pub exhaustive_max: u64,
}

impl CapArgs {
    pub fn limits(&self) -> Limits {
        Limits {
            sum_of_squares_max: self.max_sos_target,
            collinear_max: self.max_collinear_modulus,
            codebook_max: self.max_codebook,
            search_nodes: self.max_search_nodes,
            exhaustive_check_max: self.exhaustive_max,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a uniform-gain design and write its code spec.
    Design {
        #[command(subcommand)]
        family: DesignFamily,
    },
    /// Side-information gain table of a code spec.
    Analyze {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the consistency checks on a code spec; exit 1 if any fails.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo symbol error rates over an AWGN channel.
    Simulate(SimulateArgs),
}

#[derive(Debug, Subcommand)]
pub enum DesignFamily {
    /// Levels spanned by unit vectors sharing one index.
    Canonical {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<i64>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// 1-based index shared by every level.
        #[arg(long)]
        shared: usize,
        /// Per-level index sets, e.g. `1,2;1,3`. Defaults to the shared index
        /// plus the smallest others.
        #[arg(long)]
        index_sets: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-1 designs from a decomposition of q into N squares.
    Sos {
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<i64>,
        #[arg(long = "N", alias = "squares")]
        squares: usize,
        /// Cartesian copies of the chosen design.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Print the collinear witness for every subset product of the primes.
        #[arg(long, alias = "certify-theorem1")]
        certify: bool,
        /// Use this decomposition instead of the first accepted one.
        #[arg(long, value_delimiter = ',')]
        decomposition: Option<Vec<i64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Inclusive SNR grid `start:stop:step` in dB.
    #[arg(long, default_value = "0:40:2")]
    pub snr: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Side-information sets: `all` (default), `none`, or 1-based lists like
    /// `1,2`. Repeatable.
    #[arg(long, num_args = 1..)]
    pub subsets: Vec<String>,
    /// Include the union-bound approximation column.
    #[arg(long)]
    pub emit_theory: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let limits = cli.caps.limits();
    match cli.command {
        Command::Design { family } => match family {
            DesignFamily::Canonical {
                primes,
                n,
                k,
                shared,
                index_sets,
                out: path,
            } => {
                let primes = prime_set(primes)?;
                let design = match index_sets {
                    Some(text) => design_canonical_with(&primes, n, k, shared, parse_index_sets(&text)?),
                    None => design_canonical(&primes, n, k, shared),
                }
                .map_err(domain)?;
                eprintln!("{}", design_summary(&design));
                emit_spec(&CodeSpecFile::from_design(&design), path, out)
            }
            DesignFamily::Sos {
                primes,
                squares,
                m,
                certify,
                decomposition,
                out: path,
            } => {
                let primes = prime_set(primes)?;
                let design = cmd_design_sos(&primes, squares, m, decomposition.as_deref(), &limits)?;
                eprintln!("{}", design_summary(&design));
                if certify {
                    if let Some(cert) = &design.certificate {
                        for p in &cert.products {
                            let w = p.witnesses.first().map_or("none".to_string(), |w| {
                                format!("lambda={} b={:?}", w.lambda, w.witness)
                            });
                            eprintln!("  P={:<8} {:<10} {w}", p.product, p.subset.to_string());
                        }
                    }
                }
                emit_spec(&CodeSpecFile::from_design(&design), path, out)
            }
        },
        Command::Analyze { spec, format } => {
            let code = load_code(&spec, limits)?;
            let report = code.gain_report().map_err(domain)?;
            if code.num_levels() < 2 {
                eprintln!("warning: a single level has no side-information subsets; only rates are reported");
            }
            match format {
                Format::Csv => write_gain_csv(&report, out)?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
            }
            Ok(())
        }
        Command::Verify { spec, format } => {
            let file = CodeSpecFile::load(&spec).map_err(domain)?;
            let suite = verify_suite(&file, limits)?;
            match format {
                Format::Csv => {
                    for c in &suite {
                        writeln!(out, "{},{},{}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail)?;
                    }
                }
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&suite)?)?,
            }
            let failed: Vec<&str> = suite.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            if !failed.is_empty() {
                return Err(Failure(format!("checks failed: {}", failed.join(", "))).into());
            }
            Ok(())
        }
        Command::Simulate(args) => {
            let code = load_code(&args.spec, limits)?;
            let curves = cmd_simulate(&code, &args)?;
            match args.format {
                Format::Csv => write_curves_csv(&curves, args.emit_theory, out)?,
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&curves)?)?,
            }
            Ok(())
        }
    }
}

fn domain(err: crt_lattice::Error) -> anyhow::Error {
    match err {
        crt_lattice::Error::InvalidArgument(m) => Usage(m).into(),
        other => Failure(other.to_string()).into(),
    }
}

fn prime_set(primes: Vec<i64>) -> anyhow::Result<PrimeSet> {
    PrimeSet::new(primes).map_err(|e| Usage(e.to_string()).into())
}

fn parse_index_sets(text: &str) -> anyhow::Result<Vec<Vec<usize>>> {
    text.split(';')
        .map(|set| {
            set.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|e| anyhow!(Usage(format!("index set {set:?}: {e}")))))
                .collect()
        })
        .collect()
}

pub fn cmd_design_sos(
    primes: &PrimeSet,
    squares: usize,
    copies: usize,
    decomposition: Option<&[i64]>,
    limits: &Limits,
) -> anyhow::Result<UniformDesign> {
    let base = match decomposition {
        Some(x) => design_sos_from(primes, x, limits).map_err(domain)?,
        None => {
            let search = design_sos(primes, squares, limits).map_err(domain)?;
            for c in &search.candidates {
                let note = match &c.outcome {
                    SosOutcome::Accepted(_) => "accepted".to_string(),
                    SosOutcome::Rejected { failing_levels } => {
                        let ps: Vec<i64> = failing_levels.iter().map(|&j| primes.primes()[j - 1]).collect();
                        format!("rejected: no collinear witness at p = {ps:?}")
                    }
                    SosOutcome::NotCertified { certificate } => format!(
                        "not certified: no witness for products {:?}",
                        certificate.failing_products()
                    ),
                };
                eprintln!("decomposition {:?}: {note}", c.decomposition.coords);
            }
            let chosen = search.preferred().cloned();
            match chosen {
                Some(d) => d,
                None => bail!(Failure(search.diagnostic().unwrap_or_default())),
            }
        }
    };
    if copies == 1 {
        Ok(base)
    } else {
        lift_cartesian(&base, copies).map_err(domain)
    }
}

fn design_summary(design: &UniformDesign) -> String {
    let mut s = format!(
        "{} design over primes {:?}, n = {}: predicted uniform gain {:.4} dB/bit/dim (confirmed)",
        match &design.kind {
            DesignKind::Canonical { .. } => "canonical",
            DesignKind::SumOfSquares { .. } => "sum-of-squares",
            DesignKind::CartesianLift { .. } => "Cartesian-lifted sum-of-squares",
        },
        design.code.primes().primes(),
        design.code.length(),
        design.predicted_gain_db
    );
    for (j, level) in design.code.levels().iter().enumerate() {
        let centered: Vec<Vec<i64>> = level
            .generators()
            .iter()
            .map(|g| crt_lattice::codes::centered(g, level.modulus()))
            .collect();
        s.push_str(&format!("\n  level {} over Z_{}: {:?}", j + 1, level.modulus(), centered));
    }
    s
}

fn emit_spec(spec: &CodeSpecFile, path: Option<PathBuf>, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            spec.save(&p).map_err(domain)?;
            eprintln!("wrote {}", p.display());
        }
        None => writeln!(out, "{}", spec.to_json())?,
    }
    Ok(())
}

fn load_code(path: &std::path::Path, limits: Limits) -> anyhow::Result<CrtIndexCode> {
    let spec = CodeSpecFile::load(path).map_err(domain)?;
    spec.to_code(limits).map_err(domain)
}

/// Table-shaped CSV: index set, exact and decimal distance, rate, gain.
pub fn write_gain_csv(report: &GainReport, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index_set", "d_s", "d_s_value", "d_s_sq", "rate_bits_per_dim", "gain_db"])?;
    for row in &report.rows {
        w.write_record([
            row.subset.to_string(),
            row.distance.clone(),
            format!("{:.6}", row.distance_value),
            row.distance_sq.to_string(),
            format!("{:.10}", row.rate),
            row.gain_db.map_or(String::new(), |g| format!("{g:.10}")),
        ])?;
    }
    w.flush()?;
    drop(w);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

/// Volume and distance identities, the gain bound, CRT bijectivity, and —
/// when the spec carries design metadata — consistency with the design.
pub fn verify_suite(file: &CodeSpecFile, limits: Limits) -> anyhow::Result<Vec<Check>> {
    let code = file.to_code(limits).map_err(domain)?;
    let mut checks = Vec::new();

    let identities = code.verify_volume_distance().map_err(domain)?;
    let bad: Vec<String> = identities
        .rows
        .iter()
        .filter(|r| !(r.volume_ok && r.distance_ok))
        .map(|r| r.subset.to_string())
        .collect();
    checks.push(check(
        "volume-and-distance",
        identities.passed,
        if bad.is_empty() {
            format!("{} subsets", identities.rows.len())
        } else {
            format!("violated at {}", bad.join(" "))
        },
    ));

    let report = code.gain_report().map_err(domain)?;
    match (report.gain_bound_db, report.overall_gain_db) {
        (Some(bound), Some(gain)) => checks.push(check(
            "gain-bound",
            gain <= bound + UNIFORM_TOLERANCE_DB,
            format!("overall {gain:.6} dB <= bound {bound:.6} dB"),
        )),
        _ => checks.push(check("gain-bound", true, "not applicable (unequal ranks or one level)")),
    }

    let bij = code.check_bijectivity(10_000, 0).map_err(domain)?;
    checks.push(check(
        "crt-bijectivity",
        bij.passed(),
        format!(
            "{} {} tuples, {} mismatches, {} distinct images",
            if bij.exhaustive { "all" } else { "sampled" },
            bij.checked,
            bij.mismatches,
            bij.distinct_images
        ),
    ));

    if let Some(meta) = &file.design {
        let q = code.modulus();
        match &meta.kind {
            DesignKind::SumOfSquares { decomposition } | DesignKind::CartesianLift { decomposition, .. } => {
                let norm: i128 = decomposition.iter().map(|&x| x as i128 * x as i128).sum();
                checks.push(check(
                    "sum-of-squares-distance",
                    norm == q as i128 && code.d0_sq() == q as u64,
                    format!("d_0^2 = {}, q = {q}, decomposition norm {norm}", code.d0_sq()),
                ));
                let primes = code.primes().clone();
                let cert = certify_subset_products(&primes, decomposition, &limits).map_err(domain)?;
                checks.push(check(
                    "subset-product-witnesses",
                    cert.passed(),
                    if cert.passed() {
                        format!("{} products", cert.products.len())
                    } else {
                        format!("missing for {:?}", cert.failing_products())
                    },
                ));
                if let Some(stored) = &meta.certificate {
                    let ok = stored.products.iter().all(|p| {
                        !p.witnesses.is_empty()
                            && p.witnesses.iter().all(|w| {
                                w.witness.iter().map(|&b| b * b).sum::<i64>() == p.product
                                    && w.witness.iter().zip(decomposition).all(|(&b, &x)| {
                                        centered_residue((w.lambda as i128 * b as i128).rem_euclid(p.product as i128) as i64, p.product)
                                            == centered_residue(x.rem_euclid(p.product), p.product)
                                    })
                            })
                    });
                    checks.push(check("stored-witnesses", ok, format!("{} products", stored.products.len())));
                }
            }
            DesignKind::Canonical {
                shared_index,
                index_sets,
            } => {
                let ok = index_sets.len() == code.num_levels()
                    && code.levels().iter().zip(index_sets).all(|(level, set)| {
                        level.generators().len() == set.len()
                            && level.generators().iter().all(|g| {
                                g.iter().filter(|&&v| v != 0).count() == 1
                                    && g.iter().enumerate().any(|(i, &v)| v == 1 && set.contains(&(i + 1)))
                            })
                            && set.contains(shared_index)
                    });
                checks.push(check(
                    "canonical-structure",
                    ok,
                    format!("unit-vector levels sharing index {shared_index}"),
                ));
            }
        }
        let confirmed = report.uniform
            && report
                .overall_gain_db
                .is_some_and(|g| (g - meta.predicted_gain_db).abs() <= UNIFORM_TOLERANCE_DB);
        checks.push(check(
            "predicted-gain",
            confirmed,
            format!(
                "predicted {:.10} dB, report {:?} (uniform = {})",
                meta.predicted_gain_db, report.overall_gain_db, report.uniform
            ),
        ));
    }
    Ok(checks)
}

pub fn parse_snr_grid(text: &str) -> anyhow::Result<NoiseGrid<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Usage(format!("--snr {text:?}: {e}")))?;
    match nums.as_slice() {
        [start, stop, step] => Ok(NoiseGrid::SnrDb {
            start: *start,
            stop: *stop,
            step: *step,
        }),
        [single] => Ok(NoiseGrid::SnrDb {
            start: *single,
            stop: *single,
            step: 1.0,
        }),
        _ => bail!(Usage(format!("--snr expects start:stop:step, got {text:?}"))),
    }
}

pub fn parse_subsets(values: &[String], levels: usize) -> anyhow::Result<Option<Vec<Subset>>> {
    if values.is_empty() || values.iter().any(|v| v == "all") {
        return Ok(None);
    }
    let mut out = Vec::new();
    for v in values {
        for item in v.split(';') {
            let item = item.trim();
            let subset = if matches!(item, "none" | "{}" | "0" | "") {
                Subset::EMPTY
            } else {
                let idx = item
                    .trim_matches(|c| c == '{' || c == '}')
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| Usage(format!("subset {item:?}: {e}")))?;
                Subset::from_levels(&idx).map_err(|e| Usage(e.to_string()))?
            };
            if subset == Subset::full(levels) || !subset.is_subset_of(Subset::full(levels)) {
                bail!(Usage(format!("subset {item} must be a proper subset of 1..={levels}")));
            }
            out.push(subset);
        }
    }
    Ok(Some(out))
}

pub fn cmd_simulate(code: &CrtIndexCode, args: &SimulateArgs) -> anyhow::Result<Vec<SerCurve>> {
    if args.trials == 0 {
        bail!(Usage("--trials must be at least 1".into()));
    }
    let grid = parse_snr_grid(&args.snr)?;
    let mut cfg = ChannelConfig::new(grid, args.trials, args.seed).map_err(domain)?;
    if let Some(subsets) = parse_subsets(&args.subsets, code.num_levels())? {
        cfg = cfg.with_subsets(subsets);
    }
    monte_carlo(code, &cfg).map_err(domain).context("simulation")
}

/// Long-format curves: one row per (subset, SNR point).
pub fn write_curves_csv(curves: &[SerCurve], with_theory: bool, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["subset", "snr_db", "sigma2", "trials", "errors", "ser", "stderr"];
    if with_theory {
        header.push("theory");
    }
    w.write_record(&header)?;
    for c in curves {
        for p in &c.points {
            let mut rec = vec![
                c.subset.to_string(),
                format!("{:.4}", p.snr_db),
                format!("{:.6e}", p.sigma2),
                p.trials.to_string(),
                p.errors.to_string(),
                format!("{:.6e}", p.ser),
                format!("{:.6e}", p.stderr),
            ];
            if with_theory {
                rec.push(format!("{:.6e}", p.theory));
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
