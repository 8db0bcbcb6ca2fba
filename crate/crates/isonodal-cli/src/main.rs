//! Command-line front end for the isonodal toolkit.
//!
//! Five subcommands cover the library's workflows: `spectrum` and
//! `qspectrum` emit eigenvalues and count-profile tables for discrete and
//! metric graphs, `verify` runs one of the six verification harnesses,
//! `search` hunts for non-isospectral pairs with matching count
//! sequences, and `oracle` cross-checks the secular solver against the
//! finite-difference discretization.  Inputs are the JSON documents of
//! the library's `io` module; outputs are JSON or aligned CSV with all
//! numbers rounded to 12 significant digits at format time, so a fixed
//! command line reproduces its output byte for byte.
//!
//! Exit status: 0 when every assertion of the requested run passed,
//! 1 on a failed assertion or any runtime error, 2 on a usage error.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use isonodal::io::{self, fmt12, GraphDoc, MetricDoc};
use isonodal::metric::MetricGraph;
use isonodal::qnodal;
use isonodal::qspectra::{self, SecularConfig};
use isonodal::report::{Verdict, VerificationReport};
use isonodal::theorems::{self, SearchLimits};
use isonodal::{nodal, spectra};
use isonodal::{DiscreteGraph, LeafPairSpec};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "isonodal",
    version,
    about = "Spectra, flip counts, and nodal counts of discrete and metric graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Laplacian spectrum and count profiles of a discrete graph
    Spectrum(SpectrumArgs),
    /// Eigenvalues, count profiles, and scan trace of a metric graph
    Qspectrum(QspectrumArgs),
    /// Run one verification harness and report its assertions
    Verify(VerifyArgs),
    /// Search trees for non-isospectral pairs with equal count sequences
    Search(SearchArgs),
    /// Cross-check the secular solver against the finite-difference oracle
    Oracle(OracleArgs),
}

#[derive(Args)]
struct CommonOpts {
    /// Input graph JSON (repeat for harnesses that take two graphs)
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Output file for the JSON artifact
    #[arg(long)]
    output: Option<PathBuf>,
    /// Upper end of the wavenumber scan
    #[arg(long)]
    kmax: Option<f64>,
    /// Scan resolution: grid points per π / total length
    #[arg(long, default_value_t = 20)]
    grid_density: usize,
    /// Width under which eigenvalues count as one degenerate cluster
    #[arg(long, default_value_t = 1e-9)]
    tol_degeneracy: f64,
    /// Size under which an eigenvector or vertex value counts as zero
    #[arg(long)]
    tol_zero: Option<f64>,
    /// Tolerance for calling two spectra equal
    #[arg(long, default_value_t = 1e-9)]
    tol_iso: f64,
    /// Seed recorded in the run configuration; every computation is
    /// deterministic, so this never changes a result
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// How many eigenvalues truncated statements cover
    #[arg(long)]
    nmax: Option<usize>,
}

impl CommonOpts {
    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("--tol-degeneracy", Some(self.tol_degeneracy)),
            ("--tol-zero", self.tol_zero),
            ("--tol-iso", Some(self.tol_iso)),
            ("--kmax", self.kmax),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{name} must be positive, got {v}");
                }
            }
        }
        if self.grid_density == 0 {
            bail!("--grid-density must be positive");
        }
        Ok(())
    }

    fn one_input(&self) -> Result<Option<&Path>> {
        match self.input.len() {
            0 => Ok(None),
            1 => Ok(Some(&self.input[0])),
            n => bail!("expected at most one --input, got {n}"),
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct QspectrumArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which claim to check
    #[arg(value_enum)]
    case: VerifyCase,
    #[command(flatten)]
    common: CommonOpts,
    /// Arm depth of the inserted edge (discrete harnesses)
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Pair-arm length for the built-in metric instances
    #[arg(long, default_value_t = 1.0)]
    leaf_len: f64,
    /// Glue distance as a fraction of the pair-arm length
    #[arg(long, default_value_t = 0.4142)]
    glue_at: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyCase {
    Lemma1,
    Thm1,
    Thm2,
    Cor1,
    Thm3,
    Interlacing,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Finite-difference resolution per unit length
    #[arg(long, default_value_t = 2000)]
    points_per_unit: usize,
    /// Largest accepted relative eigenvalue disagreement
    #[arg(long, default_value_t = 1e-3)]
    tol_oracle: f64,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Qspectrum(args) => cmd_qspectrum(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Search(args) => cmd_search(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

// ---------------------------------------------------------------------------
// loading helpers

fn load_graph_doc(path: &Path) -> Result<(DiscreteGraph, Vec<LeafPairSpec>)> {
    let doc: GraphDoc = io::read_json_file(path)
        .with_context(|| format!("reading graph document {}", path.display()))?;
    Ok(io::doc_to_graph(&doc)?)
}

fn load_metric_doc(path: &Path) -> Result<io::MetricLoad> {
    let doc: MetricDoc = io::read_json_file(path)
        .with_context(|| format!("reading metric document {}", path.display()))?;
    Ok(io::doc_to_metric(&doc)?)
}

/// The discrete harnesses compare a pair on one graph with a pair on
/// another.  No input: the built-in decorated-spine instance.  One input:
/// its first two pairs, or its only pair against itself.  Two inputs:
/// the first pair of each.
fn discrete_pair_instance(
    common: &CommonOpts,
) -> Result<(DiscreteGraph, LeafPairSpec, DiscreteGraph, LeafPairSpec)> {
    match common.input.len() {
        0 => {
            let (g, pa, pb) = theorems::decorated_spine_instance(4, 2, 1)?;
            Ok((g.clone(), pa, g, pb))
        }
        1 => {
            let (g, pairs) = load_graph_doc(&common.input[0])?;
            match pairs.len() {
                0 => bail!("{} declares no leaf pairs", common.input[0].display()),
                1 => Ok((g.clone(), pairs[0].clone(), g, pairs[0].clone())),
                _ => Ok((g.clone(), pairs[0].clone(), g, pairs[1].clone())),
            }
        }
        2 => {
            let (g1, p1) = load_graph_doc(&common.input[0])?;
            let (g2, p2) = load_graph_doc(&common.input[1])?;
            let first = |path: &Path, mut pairs: Vec<LeafPairSpec>| {
                if pairs.is_empty() {
                    bail!("{} declares no leaf pairs", path.display())
                } else {
                    Ok(pairs.remove(0))
                }
            };
            let p1 = first(&common.input[0], p1)?;
            let p2 = first(&common.input[1], p2)?;
            Ok((g1, p1, g2, p2))
        }
        n => bail!("expected at most two --input files, got {n}"),
    }
}

// ---------------------------------------------------------------------------
// spectrum

fn cmd_spectrum(args: SpectrumArgs) -> Result<i32> {
    args.common.validate()?;
    let (g, _pairs) = match args.common.one_input()? {
        Some(path) => load_graph_doc(path)?,
        None => bail!("spectrum needs an --input graph document"),
    };
    let mut s = spectra::laplacian_spectrum(&g)?;
    s.degeneracy_tol = args.common.tol_degeneracy;
    if let Some(z) = args.common.tol_zero {
        s.zero_tol = z;
    }
    let profiles = nodal::nodal_profiles(&g, &s)?;
    let rows = io::profile_rows(&profiles);
    print!("{}", io::profiles_to_csv(&rows));
    if let Some(out) = &args.common.output {
        let doc = json!({
            "spectrum": io::spectrum_to_doc(&s, false),
            "profiles": rows,
        });
        io::write_text_file(out, &io::to_json_pretty(&doc)?)?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// qspectrum

fn secular_config(common: &CommonOpts, g: &MetricGraph) -> SecularConfig {
    let n = common.nmax.unwrap_or(12) as f64;
    let k_max = common
        .kmax
        .unwrap_or((n + 6.0) * std::f64::consts::PI / g.total_length());
    let mut cfg = SecularConfig::new(k_max);
    cfg.grid_density = common.grid_density;
    if let Some(z) = common.tol_zero {
        cfg.zero_tol = z;
    }
    cfg
}

fn trace_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().unwrap_or_default().to_string_lossy();
    output.with_file_name(format!("{stem}.trace.csv"))
}

fn cmd_qspectrum(args: QspectrumArgs) -> Result<i32> {
    args.common.validate()?;
    let load = match args.common.one_input()? {
        Some(path) => load_metric_doc(path)?,
        None => bail!("qspectrum needs an --input metric document"),
    };
    let g = &load.graph;
    let cfg = secular_config(&args.common, g);
    let pairs = qspectra::secular_spectrum(g, &cfg)?;
    let profiles = qnodal::q_nodal_profiles(g, &pairs)?;
    let rows = io::q_profile_rows(&profiles);
    print!("{}", io::profiles_to_csv(&rows));
    if let Some(out) = &args.common.output {
        let doc = json!({
            "spectrum": io::qspectrum_to_doc(&pairs),
            "profiles": rows,
        });
        io::write_text_file(out, &io::to_json_pretty(&doc)?)?;
        println!("wrote {}", out.display());
        let trace = qspectra::secular_trace(g, &cfg)?;
        let tp = trace_path(out);
        io::write_text_file(&tp, &io::trace_to_csv(&trace))?;
        println!("wrote {}", tp.display());
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify

fn print_report(r: &VerificationReport) {
    println!("claim: {}", r.claim);
    println!("inputs: {}", r.inputs);
    for a in &r.assertions {
        let status = if a.pass { "pass" } else { "FAIL" };
        match (a.measured, a.bound) {
            (Some(m), Some(b)) => {
                println!("  [{status}] {}  measured {} bound {}", a.name, fmt12(m), fmt12(b))
            }
            _ => println!("  [{status}] {}", a.name),
        }
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
    let verdict = match r.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    };
    println!("verdict: {verdict}");
}

fn finish_report(r: &VerificationReport, output: Option<&Path>) -> Result<i32> {
    print_report(r);
    if let Some(out) = output {
        io::write_text_file(out, &io::to_json_pretty(&io::rounded_report(r))?)?;
        println!("wrote {}", out.display());
    }
    Ok(if r.verdict == Verdict::Pass { 0 } else { 1 })
}

/// The metric harness wants two graphs with a pair index on each; the
/// same input conventions as the discrete case, with the built-in
/// double-pair spine as the default instance.
fn metric_pair_instance(
    args: &VerifyArgs,
) -> Result<(MetricGraph, MetricGraph, usize, usize)> {
    match args.common.input.len() {
        0 => {
            let g = qnodal::double_pair_graph(1.3, args.leaf_len);
            Ok((g.clone(), g, 0, 1))
        }
        1 => {
            let g = load_metric_doc(&args.common.input[0])?.graph;
            match g.leaf_pairs().len() {
                0 => bail!("{} declares no leaf pairs", args.common.input[0].display()),
                1 => Ok((g.clone(), g, 0, 0)),
                _ => Ok((g.clone(), g, 0, 1)),
            }
        }
        2 => {
            let g1 = load_metric_doc(&args.common.input[0])?.graph;
            let g2 = load_metric_doc(&args.common.input[1])?.graph;
            for (g, path) in [(&g1, &args.common.input[0]), (&g2, &args.common.input[1])] {
                if g.leaf_pairs().is_empty() {
                    bail!("{} declares no leaf pairs", path.display());
                }
            }
            Ok((g1, g2, 0, 0))
        }
        n => bail!("expected at most two --input files, got {n}"),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    args.common.validate()?;
    if !(args.glue_at > 0.0 && args.glue_at < 1.0) {
        bail!("--glue-at must lie strictly between 0 and 1");
    }
    if args.depth == 0 {
        bail!("--depth counts arm vertices from 1");
    }
    let report = match args.case {
        VerifyCase::Lemma1 => {
            let (g1, p1, g2, p2) = discrete_pair_instance(&args.common)?;
            theorems::verify_lemma1(&g1, &p1, &g2, &p2, args.depth)?
        }
        VerifyCase::Thm1 => {
            let (g1, p1, g2, p2) = discrete_pair_instance(&args.common)?;
            theorems::verify_theorem1(&g1, &p1, &g2, &p2, args.depth)?
        }
        VerifyCase::Thm2 => {
            let (g, pair) = match args.common.one_input()? {
                Some(path) => {
                    let (g, mut pairs) = load_graph_doc(path)?;
                    if pairs.is_empty() {
                        bail!("{} declares no leaf pairs", path.display());
                    }
                    (g, pairs.remove(0))
                }
                None => {
                    let g = DiscreteGraph::new(4, &[(0, 1), (0, 2), (0, 3)])?;
                    let pair = LeafPairSpec::new(0, vec![1], vec![2])?;
                    (g, pair)
                }
            };
            theorems::verify_theorem2(&g, &pair)?
        }
        VerifyCase::Cor1 => {
            let (g1, p1, g2, p2) = discrete_pair_instance(&args.common)?;
            theorems::verify_corollary1(&g1, &p1, &g2, &p2)?
        }
        VerifyCase::Thm3 => {
            let (g1, g2, pair1, pair2) = metric_pair_instance(&args)?;
            let l = g1.edges()[g1.leaf_pairs()[pair1].edge_plus].length;
            let n_max = args.common.nmax.unwrap_or(20);
            qnodal::verify_theorem3(&g1, &g2, pair1, pair2, args.glue_at * l, n_max)?
        }
        VerifyCase::Interlacing => {
            let k_max = args.common.kmax.unwrap_or(30.0);
            qnodal::interlacing_check(args.leaf_len, args.glue_at * args.leaf_len, k_max)?
        }
    };
    finish_report(&report, args.common.output.as_deref())
}

// ---------------------------------------------------------------------------
// search

fn cmd_search(args: SearchArgs) -> Result<i32> {
    args.common.validate()?;
    if !args.common.input.is_empty() {
        bail!("search enumerates trees itself and takes no --input");
    }
    let mut limits = SearchLimits::default();
    if let Some(n) = args.common.nmax {
        if n < limits.min_vertices {
            bail!("--nmax below the smallest searched size {}", limits.min_vertices);
        }
        limits.max_vertices = n;
    }
    let outcome = theorems::search_noniso_pairs(&limits)?;
    println!(
        "scanned {} trees in {} hypothesis groups, verified {} candidates, kept {} pairs",
        outcome.trees_scanned,
        outcome.groups,
        outcome.candidates_checked,
        outcome.hits.len()
    );
    for h in &outcome.hits {
        println!(
            "  {} vertices: seed gap {}, closure gap {}, verdict {:?}",
            h.vertices,
            fmt12(h.seed_spectrum_gap),
            fmt12(h.closure_spectrum_gap),
            h.report.verdict
        );
    }
    if let Some(out) = &args.common.output {
        io::write_text_file(out, &io::to_json_pretty(&io::catalog_doc(&outcome))?)?;
        println!("wrote {}", out.display());
    }
    Ok(if outcome.hits.iter().all(|h| h.report.verdict == Verdict::Pass) { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// oracle

fn cmd_oracle(args: OracleArgs) -> Result<i32> {
    args.common.validate()?;
    if !(args.tol_oracle > 0.0 && args.tol_oracle.is_finite()) {
        bail!("--tol-oracle must be positive");
    }
    let g = match args.common.one_input()? {
        Some(path) => load_metric_doc(path)?.graph,
        None => isonodal::metric::build_metric(
            4,
            &[(0, 1), (0, 2), (0, 3)],
            &[1.0, 1.0, 1.0],
            &[],
        )?,
    };
    let want = args.common.nmax.unwrap_or(10);
    let n = want as f64;
    let k_max = args
        .common
        .kmax
        .unwrap_or((n + 6.0) * std::f64::consts::PI / g.total_length());
    let mut cfg = SecularConfig::new(k_max);
    cfg.grid_density = args.common.grid_density;
    let secular = qspectra::secular_spectrum(&g, &cfg)?;
    if secular.len() < want + 1 {
        bail!(
            "only {} eigenvalues below k_max = {k_max}; raise --kmax or lower --nmax",
            secular.len()
        );
    }
    let fd = qspectra::fd_lowest(&g, args.points_per_unit, want + 1)?;
    println!("n,k_secular,lambda_secular,lambda_fd,rel_err");
    let mut worst = 0.0f64;
    for i in 1..=want {
        let ls = secular[i].lambda();
        let lf = fd[i];
        let rel = (ls - lf).abs() / ls.max(1e-300);
        worst = worst.max(rel);
        println!(
            "{i},{},{},{},{}",
            fmt12(secular[i].k),
            fmt12(ls),
            fmt12(lf),
            fmt12(rel)
        );
    }
    let pass = worst <= args.tol_oracle;
    println!(
        "worst relative disagreement {} against bound {}: {}",
        fmt12(worst),
        fmt12(args.tol_oracle),
        if pass { "pass" } else { "FAIL" }
    );
    if let Some(out) = &args.common.output {
        let rows: Vec<serde_json::Value> = (1..=want)
            .map(|i| {
                let ls = secular[i].lambda();
                json!({
                    "n": i,
                    "k_secular": io::sig12(secular[i].k),
                    "lambda_secular": io::sig12(ls),
                    "lambda_fd": io::sig12(fd[i]),
                    "rel_err": io::sig12((ls - fd[i]).abs() / ls.max(1e-300)),
                })
            })
            .collect();
        let doc = json!({
            "points_per_unit": args.points_per_unit,
            "bound": io::sig12(args.tol_oracle),
            "worst_rel_err": io::sig12(worst),
            "pass": pass,
            "rows": rows,
        });
        io::write_text_file(out, &io::to_json_pretty(&doc)?)?;
        println!("wrote {}", out.display());
    }
    Ok(if pass { 0 } else { 1 })
}
