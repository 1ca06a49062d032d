//! Command line surface: model files, builtin walk models, and the
//! `check`, `spectrum`, `trajectory`, and `export` subcommands.
//!
//! Exit codes encode the three-valued verdict for scripting: 0 for True,
//! 1 for False, 2 for Unknown, 3 for any error.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::automata::{lasso_to_nba, ltl_to_nba, LassoWord};
use crate::checker::{trajectory, Analyzer, CheckOptions, Verdict, VerdictValue};
use crate::linalg::{C64, ComplexMatrix, DensityMatrix, MeasurementOperator, Qmc, SuperOperator, Tolerances};
use crate::mltl::{measure, parse, AtomicProp, Formula, ProbInterval};
use crate::models::{classical_walk, position_projector, quantum_walk, Direction, WalkSpec};
use crate::neighborhood::RangeMode;
use crate::spectral::{check_stability_with, decompose, Stability, DEFAULT_Q_MAX};

const EXIT_TRUE: i32 = 0;
const EXIT_FALSE: i32 = 1;
const EXIT_UNKNOWN: i32 = 2;
const EXIT_ERROR: i32 = 3;

/// Parses arguments, runs the selected subcommand, and returns the process
/// exit code. Errors are printed to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_ERROR
        }
    }
}

#[derive(Parser)]
#[command(name = "qmcheck", version, about = "Approximate model checking of quantum Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a temporal formula against a model.
    Check(CheckArgs),
    /// Print the channel spectrum and the stability classification.
    Spectrum(SpectrumArgs),
    /// Print measurement probabilities along the trajectory.
    Trajectory(TrajectoryArgs),
    /// Write a model (builtin or loaded) as a model file.
    Export(ExportArgs),
}

/// Builtin model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// Hadamard walk on a cycle with absorbing boundaries at s0 and sd.
    Qwalk,
    /// The classical simple random walk with the same boundaries.
    Cwalk,
}

#[derive(Args)]
struct ModelArgs {
    /// Path to a JSON model file.
    #[arg(long, value_name = "FILE", conflicts_with = "builtin", required_unless_present = "builtin")]
    model: Option<PathBuf>,
    /// Builtin model family instead of a file.
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Boundary parameter d for builtin walks (positions 0..=d).
    #[arg(long, default_value_t = 20)]
    d: usize,
    /// Start position for builtin walks.
    #[arg(long, default_value_t = 1)]
    start: usize,
    /// Start coin direction for builtin walks: L or R.
    #[arg(long, default_value = "R")]
    dir: String,
}

#[derive(Args)]
struct TolArgs {
    /// Override the Hermitian-symmetry tolerance.
    #[arg(long, value_name = "EPS")]
    tol_herm: Option<f64>,
    /// Override the trace tolerance.
    #[arg(long, value_name = "EPS")]
    tol_trace: Option<f64>,
    /// Override the positive semi-definiteness tolerance.
    #[arg(long, value_name = "EPS")]
    tol_psd: Option<f64>,
    /// Override the Kraus completeness tolerance.
    #[arg(long, value_name = "EPS")]
    tol_kraus: Option<f64>,
    /// Override the peripheral-modulus tolerance.
    #[arg(long, value_name = "EPS")]
    tol_unit: Option<f64>,
    /// Override the phase rationalization tolerance.
    #[arg(long, value_name = "EPS")]
    tol_phase: Option<f64>,
    /// Override the eigenvalue clustering tolerance.
    #[arg(long, value_name = "EPS")]
    tol_cluster: Option<f64>,
    /// Override the reconstruction residual tolerance.
    #[arg(long, value_name = "EPS")]
    tol_recon: Option<f64>,
    /// Override the eigencomponent coefficient cutoff.
    #[arg(long, value_name = "EPS")]
    tol_coeff: Option<f64>,
}

impl TolArgs {
    fn apply(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_herm {
            t.herm = v;
        }
        if let Some(v) = self.tol_trace {
            t.trace = v;
        }
        if let Some(v) = self.tol_psd {
            t.psd = v;
        }
        if let Some(v) = self.tol_kraus {
            t.kraus = v;
        }
        if let Some(v) = self.tol_unit {
            t.unit = v;
        }
        if let Some(v) = self.tol_phase {
            t.phase = v;
        }
        if let Some(v) = self.tol_cluster {
            t.cluster = v;
        }
        if let Some(v) = self.tol_recon {
            t.recon = v;
        }
        if let Some(v) = self.tol_coeff {
            t.coeff = v;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NeighborhoodArg {
    Cheap,
    Refined,
}

impl From<NeighborhoodArg> for RangeMode {
    fn from(a: NeighborhoodArg) -> RangeMode {
        match a {
            NeighborhoodArg::Cheap => RangeMode::Cheap,
            NeighborhoodArg::Refined => RangeMode::Refined,
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Temporal formula over the declared propositions, e.g. "F G ap(abs0)".
    #[arg(long)]
    formula: String,
    /// Neighborhood radius for the cycle abstraction.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Halve epsilon up to this many times while the verdict stays Unknown.
    #[arg(long, default_value_t = 0)]
    max_halvings: u32,
    /// Denominator bound when rationalizing peripheral phases.
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    qmax: u64,
    /// Range estimation mode for neighborhoods.
    #[arg(long, value_enum, default_value_t = NeighborhoodArg::Cheap)]
    neighborhood: NeighborhoodArg,
    /// Write the trajectory and formula automata as HOA files into DIR.
    #[arg(long, value_name = "DIR")]
    export_automata: Option<PathBuf>,
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Denominator bound when rationalizing peripheral phases.
    #[arg(long, default_value_t = DEFAULT_Q_MAX)]
    qmax: u64,
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of steps to emit (rows 0..n).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Comma-separated proposition names to report; all when omitted.
    #[arg(long, value_delimiter = ',')]
    observables: Vec<String>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Output path; prints to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Trajectory(args) => cmd_trajectory(args),
        Command::Export(args) => cmd_export(args),
    }
}

/// The proposition set shipped with the builtin walks: absorption at s0
/// near the quantum limit 1/sqrt(2), and the position-mass comparisons at
/// the far boundary and next to it.
pub fn builtin_walk_aps(family: Builtin, d: usize) -> Vec<AtomicProp> {
    let proj = |k: usize| match family {
        Builtin::Qwalk => position_projector(d, k),
        Builtin::Cwalk => MeasurementOperator::basis_projector(d + 1, k),
    };
    vec![
        AtomicProp::new(
            "abs0",
            proj(0),
            ProbInterval::closed(FRAC_1_SQRT_2 - 0.1, FRAC_1_SQRT_2 + 0.1).unwrap(),
        ),
        AtomicProp::new("p20lt", proj(d), ProbInterval::new(0.0, 0.5, true, false).unwrap()),
        AtomicProp::new("p19gt", proj(d - 1), ProbInterval::new(0.4, 1.0, false, true).unwrap()),
        AtomicProp::new("p1gt", proj(1), ProbInterval::new(0.4, 1.0, false, true).unwrap()),
    ]
}

/// Builds the builtin model selected by the flags.
pub fn builtin_model(family: Builtin, d: usize, start: usize, dir: Direction) -> Result<(Qmc, Vec<AtomicProp>)> {
    let spec = WalkSpec::new(d, start, dir)?;
    let g = match family {
        Builtin::Qwalk => quantum_walk(&spec)?,
        Builtin::Cwalk => classical_walk(&spec)?,
    };
    Ok((g, builtin_walk_aps(family, d)))
}

fn resolve_model(args: &ModelArgs, tol: &Tolerances) -> Result<(Qmc, Vec<AtomicProp>)> {
    if let Some(family) = args.builtin {
        let dir: Direction = args.dir.parse().map_err(|_| {
            anyhow::anyhow!("--dir must be L or R, got {:?}", args.dir)
        })?;
        builtin_model(family, args.d, args.start, dir)
    } else {
        let path = args.model.as_ref().expect("clap enforces --model or --builtin");
        let file = ModelFile::load(path)?;
        file.into_parts(tol).with_context(|| format!("invalid model in {}", path.display()))
    }
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let tol = args.tol.apply();
    let (g, aps) = resolve_model(&args.model, &tol)?;
    let declared: BTreeSet<String> = aps.iter().map(|a| a.name.clone()).collect();
    let phi = parse(&args.formula, &declared)?;
    let opts = CheckOptions {
        q_max: args.qmax,
        mode: args.neighborhood.into(),
        tol,
        ..CheckOptions::default()
    };
    let analyzer = Analyzer::new(&g, &aps, opts)?;
    let verdict = analyzer.check_refined(&phi, args.epsilon, args.max_halvings)?;

    if let Some(dir) = &args.export_automata {
        export_automata(dir, &analyzer, &phi, &declared, verdict.epsilon_used)?;
    }

    if args.json {
        println!("{}", serde_json::to_string_pretty(&verdict_json(&verdict))?);
    } else {
        print_verdict(&verdict);
    }
    Ok(match verdict.value {
        VerdictValue::True => EXIT_TRUE,
        VerdictValue::False => EXIT_FALSE,
        VerdictValue::Unknown => EXIT_UNKNOWN,
    })
}

fn export_automata(
    dir: &Path,
    analyzer: &Analyzer,
    phi: &Formula,
    declared: &BTreeSet<String>,
    eps: f64,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (lang, _, _) = analyzer.abstraction(eps)?;
    let a_g = lasso_to_nba(&lang, declared);
    let a_phi = ltl_to_nba(phi, declared);
    fs::write(dir.join("trajectory.hoa"), a_g.to_hoa("trajectory abstraction"))?;
    fs::write(dir.join("formula.hoa"), a_phi.to_hoa(&format!("{phi}")))?;
    Ok(())
}

fn lasso_json(w: &LassoWord) -> serde_json::Value {
    let names = |letters: &[crate::mltl::Letter]| -> Vec<Vec<String>> {
        letters
            .iter()
            .map(|l| l.iter().map(str::to_string).collect())
            .collect()
    };
    json!({ "stem": names(&w.stem), "cycle": names(&w.cycle) })
}

fn verdict_json(v: &Verdict) -> serde_json::Value {
    let mut out = json!({
        "verdict": v.value.to_string(),
        "epsilon": v.epsilon_used,
        "period": v.period,
        "k_eps": v.k_eps,
    });
    if let Some(cex) = &v.counterexample {
        out["counterexample"] = lasso_json(cex);
    }
    out
}

fn print_verdict(v: &Verdict) {
    println!("verdict: {}", v.value);
    println!("epsilon: {}", v.epsilon_used);
    println!("period: {}", v.period);
    println!("k_eps: {} ({} bound)", v.k_eps, v.bound_source);
    let cycle = v.cycle_symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
    println!("cycle symbols: {cycle}");
    if let Some(cex) = &v.counterexample {
        println!("counterexample: {cex}");
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<i32> {
    let tol = args.tol.apply();
    let (g, _) = resolve_model(&args.model, &tol)?;
    let sd = decompose(&g.transition, &tol)?;
    let report = check_stability_with(&sd, &g.initial, args.qmax)?;

    if args.json {
        let eigs: Vec<[f64; 2]> = sd.eigenvalues().iter().map(|z| [z.re, z.im]).collect();
        let moduli: Vec<f64> = sd.eigenvalues().iter().map(|z| z.norm()).collect();
        let peripheral: Vec<serde_json::Value> = report
            .contributing_phases
            .iter()
            .map(|p| {
                json!({
                    "eigen_index": p.eigen_index,
                    "phase": p.phase,
                    "rational": p.rational.map(|(num, den)| json!([num, den])),
                    "coefficient": p.coefficient,
                })
            })
            .collect();
        let out = json!({
            "dimension": sd.dim(),
            "superop_dimension": sd.superop_dim(),
            "eigenvalues": eigs,
            "moduli": moduli,
            "omega": sd.omega(),
            "d_omega": sd.d_omega(),
            "condition_number": sd.cond_number(),
            "peripheral_count": sd.peripheral_indices().len(),
            "contributing_phases": peripheral,
            "stability": {
                "stable": report.is_stable(),
                "period": report.period,
                "witness": report.witness,
            },
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(EXIT_TRUE);
    }

    println!("dimension: {} (superoperator {})", sd.dim(), sd.superop_dim());
    println!("peripheral eigenvalues: {}", sd.peripheral_indices().len());
    println!("omega: {:.9}", sd.omega());
    println!("d_omega: {}", sd.d_omega());
    println!("condition number: {:.3e}", sd.cond_number());
    println!("eigenvalue moduli: {}", moduli_summary(sd.eigenvalues()));
    println!("contributing phases:");
    for p in &report.contributing_phases {
        let approx = match p.rational {
            Some((num, den)) => format!("{num}/{den}"),
            None => "no rational approximant".to_string(),
        };
        println!(
            "  eigenvalue {}: phase {:.9} ~ {} (coefficient {:.3e})",
            p.eigen_index, p.phase, approx, p.coefficient
        );
    }
    match report.stable {
        Stability::Stable => {
            println!("stability: stable, period {}", report.period.unwrap_or(1))
        }
        Stability::Undetermined => {
            println!(
                "stability: undetermined ({})",
                report.witness.as_deref().unwrap_or("unknown cause")
            );
        }
    }
    Ok(EXIT_TRUE)
}

/// Distinct moduli with multiplicities, largest first, capped for brevity.
fn moduli_summary(eigs: &[C64]) -> String {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for z in eigs {
        *counts.entry(format!("{:.6}", z.norm())).or_default() += 1;
    }
    let mut parts: Vec<(String, usize)> = counts.into_iter().collect();
    parts.reverse();
    let total = parts.len();
    let shown: Vec<String> =
        parts.iter().take(8).map(|(m, c)| format!("{m} x{c}")).collect();
    if total > 8 {
        format!("{} (+{} more distinct)", shown.join(", "), total - 8)
    } else {
        shown.join(", ")
    }
}

fn cmd_trajectory(args: TrajectoryArgs) -> Result<i32> {
    let tol = args.tol.apply();
    let (g, aps) = resolve_model(&args.model, &tol)?;
    let chosen: Vec<AtomicProp> = if args.observables.is_empty() {
        aps
    } else {
        let by_name: BTreeMap<&str, &AtomicProp> =
            aps.iter().map(|a| (a.name.as_str(), a)).collect();
        let mut picked = Vec::with_capacity(args.observables.len());
        for name in &args.observables {
            match by_name.get(name.as_str()) {
                Some(ap) => picked.push((*ap).clone()),
                None => bail!("unknown observable {name:?}; declared: {:?}",
                    by_name.keys().collect::<Vec<_>>()),
            }
        }
        picked
    };

    let states = trajectory(&g, args.n)?;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(states.len());
    for rho in &states {
        let mut row = Vec::with_capacity(chosen.len());
        for ap in &chosen {
            row.push(measure(rho, ap, &tol)?);
        }
        rows.push(row);
    }

    let names: Vec<&str> = chosen.iter().map(|a| a.name.as_str()).collect();
    if args.json {
        let mut columns = vec!["step".to_string()];
        columns.extend(names.iter().map(|n| n.to_string()));
        let json_rows: Vec<serde_json::Value> = rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let mut cells = vec![json!(k)];
                cells.extend(row.iter().map(|v| json!(v)));
                json!(cells)
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&json!({ "columns": columns, "rows": json_rows }))?);
    } else {
        println!("step,{}", names.join(","));
        for (k, row) in rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            println!("{k},{}", cells.join(","));
        }
    }
    Ok(EXIT_TRUE)
}

fn cmd_export(args: ExportArgs) -> Result<i32> {
    let tol = args.tol.apply();
    let (g, aps) = resolve_model(&args.model, &tol)?;
    let file = ModelFile::from_parts(&g, &aps);
    let text = serde_json::to_string_pretty(&file)?;
    match &args.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(EXIT_TRUE)
}

/// On-disk model format. Complex entries are [re, im] pairs of decimal
/// numbers so fixtures stay diffable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub dimension: usize,
    pub kraus: Vec<Vec<Vec<[f64; 2]>>>,
    pub initial_state: Vec<Vec<[f64; 2]>>,
    pub atomic_props: BTreeMap<String, ApEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApEntry {
    pub operator: Vec<Vec<[f64; 2]>>,
    pub interval: IntervalEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalEntry {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

fn matrix_to_entries(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect()
}

fn entries_to_matrix(entries: &[Vec<[f64; 2]>], dim: usize, what: &str) -> Result<ComplexMatrix> {
    if entries.len() != dim || entries.iter().any(|row| row.len() != dim) {
        bail!("{what} must be a {dim}x{dim} matrix");
    }
    let rows = entries
        .iter()
        .map(|row| row.iter().map(|[re, im]| C64::new(*re, *im)).collect())
        .collect();
    Ok(ComplexMatrix::from_rows(rows))
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let file: ModelFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn from_parts(g: &Qmc, aps: &[AtomicProp]) -> Self {
        ModelFile {
            dimension: g.dim(),
            kraus: g.transition.kraus().iter().map(matrix_to_entries).collect(),
            initial_state: matrix_to_entries(g.initial.matrix()),
            atomic_props: aps
                .iter()
                .map(|ap| {
                    let entry = ApEntry {
                        operator: matrix_to_entries(ap.operator.matrix()),
                        interval: IntervalEntry {
                            lo: ap.interval.lo,
                            hi: ap.interval.hi,
                            lo_closed: ap.interval.lo_closed,
                            hi_closed: ap.interval.hi_closed,
                        },
                    };
                    (ap.name.clone(), entry)
                })
                .collect(),
        }
    }

    /// Validates every matrix and interval and assembles the model.
    pub fn into_parts(&self, tol: &Tolerances) -> Result<(Qmc, Vec<AtomicProp>)> {
        let d = self.dimension;
        if d == 0 {
            bail!("dimension must be positive");
        }
        if self.kraus.is_empty() {
            bail!("at least one Kraus operator is required");
        }
        let kraus = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, entries)| entries_to_matrix(entries, d, &format!("kraus[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let transition = SuperOperator::new(kraus, tol).context("invalid Kraus set")?;
        let initial = DensityMatrix::new(entries_to_matrix(&self.initial_state, d, "initial_state")?, tol)
            .context("invalid initial state")?;
        let g = Qmc::new(transition, initial)?;
        let mut aps = Vec::with_capacity(self.atomic_props.len());
        for (name, entry) in &self.atomic_props {
            let operator =
                MeasurementOperator::new(entries_to_matrix(&entry.operator, d, &format!("operator of {name:?}"))?, tol)
                    .with_context(|| format!("invalid operator for {name:?}"))?;
            let interval = ProbInterval::new(
                entry.interval.lo,
                entry.interval.hi,
                entry.interval.lo_closed,
                entry.interval.hi_closed,
            )
            .with_context(|| format!("invalid interval for {name:?}"))?;
            aps.push(AtomicProp::new(name.clone(), operator, interval));
        }
        Ok((g, aps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_file_round_trips_the_builtin_walk() {
        let (g, aps) = builtin_model(Builtin::Qwalk, 4, 1, Direction::Right).unwrap();
        let file = ModelFile::from_parts(&g, &aps);
        let text = serde_json::to_string(&file).unwrap();
        let back: ModelFile = serde_json::from_str(&text).unwrap();
        let tol = Tolerances::default();
        let (g2, aps2) = back.into_parts(&tol).unwrap();
        assert_eq!(g2.dim(), g.dim());
        assert!(g2.initial.matrix().hs_distance(g.initial.matrix()) < 1e-15);
        assert_eq!(aps2.len(), aps.len());
        // The map is name-keyed, so loaded props come back name-sorted.
        for a in &aps {
            let b = aps2.iter().find(|b| b.name == a.name).expect("name survives");
            assert!(a.operator.matrix().hs_distance(b.operator.matrix()) < 1e-15);
            assert_eq!(a.interval.lo, b.interval.lo);
            assert_eq!(a.interval.hi_closed, b.interval.hi_closed);
        }
    }

    #[test]
    fn model_file_rejects_shape_and_validity_errors() {
        let (g, aps) = builtin_model(Builtin::Cwalk, 3, 1, Direction::Right).unwrap();
        let mut file = ModelFile::from_parts(&g, &aps);
        file.dimension = 5;
        assert!(file.into_parts(&Tolerances::default()).is_err());

        let (g, aps) = builtin_model(Builtin::Cwalk, 3, 1, Direction::Right).unwrap();
        let mut file = ModelFile::from_parts(&g, &aps);
        // Breaking trace preservation must be caught on load.
        file.kraus[0][0][0] = [2.0, 0.0];
        assert!(file.into_parts(&Tolerances::default()).is_err());
    }

    #[test]
    fn builtin_props_cover_both_walk_dimensions() {
        for (family, dim) in [(Builtin::Qwalk, 10), (Builtin::Cwalk, 5)] {
            let aps = builtin_walk_aps(family, 4);
            assert_eq!(aps.len(), 4);
            for ap in &aps {
                assert_eq!(ap.operator.dim(), dim, "{:?} {}", family, ap.name);
            }
            let names: Vec<&str> = aps.iter().map(|a| a.name.as_str()).collect();
            assert_eq!(names, ["abs0", "p20lt", "p19gt", "p1gt"]);
        }
    }

    #[test]
    fn exit_codes_follow_the_verdict() {
        // Period-2 classical swap from s0: "always high" fails, "eventually
        // high" holds, and a grazing interval stays unknown.
        let dir = tempfile::tempdir().unwrap();
        let tol = Tolerances::default();
        let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let g = crate::models::classical_mc_to_qmc(&p, &[1.0, 0.0], &tol).unwrap();
        let aps = [AtomicProp::new(
            "high",
            MeasurementOperator::basis_projector(2, 0),
            ProbInterval::closed(0.8, 1.0).unwrap(),
        )];
        let path = dir.path().join("swap.json");
        ModelFile::from_parts(&g, &aps).save(&path).unwrap();
        let model = path.to_str().unwrap();

        let run_check = |formula: &str| {
            run([
                "qmcheck", "check", "--model", model, "--formula", formula, "--epsilon", "0.1",
            ])
        };
        assert_eq!(run_check("F ap(high)"), EXIT_TRUE);
        assert_eq!(run_check("G ap(high)"), EXIT_FALSE);
        assert_eq!(run(["qmcheck", "check", "--model", model, "--formula", "G ap(high)",
            "--epsilon", "1.9"]), EXIT_UNKNOWN);
        assert_eq!(run(["qmcheck", "check", "--model", model, "--formula", "G ap(nope)",
            "--epsilon", "0.1"]), EXIT_ERROR);
        assert_eq!(run(["qmcheck", "--help"]), 0);
        assert_eq!(run(["qmcheck", "check", "--bogus-flag"]), EXIT_ERROR);
    }
}
