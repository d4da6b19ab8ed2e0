//! Command-line interface: solve cnf-xor files, generate charged-graph
//! instances, and print their analytic refutations.
//!
//! Exit codes follow solver conventions: 10 for satisfiable, 20 for
//! unsatisfiable (including completed refutations), 0 for any other
//! success, 1 for errors.

use std::error::Error;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xorsat::derivation::CutPolicy;
use xorsat::engine::{ModuleChoice, SolveOutcome, Solver, SolverConfig};
use xorsat::formula::{parse_cnfxor, write_cnfxor};
use xorsat::oracle::{enumerate_models, ENUM_VAR_LIMIT};
use xorsat::paritygraph::ParityGraph;
use xorsat::xr::ExplanationMode;
use xorsat::{Assignment, CnfXorFormula, Lit, Var};

#[derive(Parser)]
#[command(version, about = "A CDCL solver for cnf-xor formulas with parity reasoning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a cnf-xor file and print the s/v result lines.
    Solve(SolveArgs),
    /// Generate a charged-graph instance and print it as cnf-xor.
    Gen(GenArgs),
    /// Print the spanning-tree refutation of an oddly charged graph.
    Refute(RefuteArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Input file in cnf-xor format; stdin when omitted.
    file: Option<PathBuf>,
    /// Xor reasoning module.
    #[arg(long, value_enum, default_value_t = ModuleArg::Up)]
    module: ModuleArg,
    /// How implying or-clauses are assembled from derivation cuts.
    #[arg(long, value_enum, default_value_t = ExplainArg::Implicative)]
    explain: ExplainArg,
    /// Cut policy for explanations used as reasons.
    #[arg(long, value_enum, default_value_t = CutArg::Closest)]
    cut: CutArg,
    /// Cut policy for explanations fetched during clause minimization.
    #[arg(long, value_enum, default_value_t = CutArg::Furthest)]
    min_cut: CutArg,
    /// Learn xor-clauses from parity explanations (needs --explain parity).
    #[arg(long)]
    learn_xor: bool,
    /// Materialize implying clauses eagerly at implication time.
    #[arg(long)]
    eager: bool,
    /// Seed for the branching polarities; XORSAT_SEED is the fallback.
    #[arg(long)]
    seed: Option<u64>,
    /// Give up with UNKNOWN after this many conflicts.
    #[arg(long)]
    max_conflicts: Option<u64>,
    /// Print solver counters as comment lines.
    #[arg(long)]
    stats: bool,
    /// Re-check the outcome: models directly, refutations by enumeration.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Args)]
struct RefuteArgs {
    /// Cnf-xor file to read the graph from (every variable in exactly two
    /// xor-clauses); a generated graph when omitted.
    file: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    /// Also print the derivation graph as comment lines.
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct GraphArgs {
    /// Random graph: number of nodes.
    #[arg(long, conflicts_with = "grid")]
    nodes: Option<usize>,
    /// Random graph: target average degree.
    #[arg(long, default_value_t = 4, conflicts_with = "grid")]
    degree: usize,
    /// Random graph: parity of the total charge (odd is unsatisfiable).
    #[arg(long, value_enum, default_value_t = ChargeArg::Odd, conflicts_with = "grid")]
    charge: ChargeArg,
    /// Seed for the random graph; XORSAT_SEED is the fallback.
    #[arg(long, conflicts_with = "grid")]
    seed: Option<u64>,
    /// Toroidal M×M grid with one charged node instead of a random graph.
    #[arg(long, value_name = "M")]
    grid: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModuleArg {
    None,
    Up,
    UpSkip,
    Subst,
    Ec,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExplainArg {
    Implicative,
    Parity,
}

#[derive(Clone, Copy, ValueEnum)]
enum CutArg {
    Closest,
    FirstUip,
    Furthest,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChargeArg {
    Odd,
    Even,
}

impl From<ModuleArg> for ModuleChoice {
    fn from(m: ModuleArg) -> ModuleChoice {
        match m {
            ModuleArg::None => ModuleChoice::None,
            ModuleArg::Up => ModuleChoice::Up,
            ModuleArg::UpSkip => ModuleChoice::UpSkip,
            ModuleArg::Subst => ModuleChoice::Subst,
            ModuleArg::Ec => ModuleChoice::Ec,
        }
    }
}

impl From<ExplainArg> for ExplanationMode {
    fn from(e: ExplainArg) -> ExplanationMode {
        match e {
            ExplainArg::Implicative => ExplanationMode::Implicative,
            ExplainArg::Parity => ExplanationMode::Parity,
        }
    }
}

impl From<CutArg> for CutPolicy {
    fn from(c: CutArg) -> CutPolicy {
        match c {
            CutArg::Closest => CutPolicy::Closest,
            CutArg::FirstUip => CutPolicy::FirstUip,
            CutArg::Furthest => CutPolicy::Furthest,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Gen(args) => run_gen(args),
        Command::Refute(args) => run_refute(args),
    };
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// The seed to use: the flag, else the XORSAT_SEED variable, else zero.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Box<dyn Error>> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("XORSAT_SEED") {
        Ok(v) => v.parse().map_err(|_| format!("XORSAT_SEED is not a number: '{v}'").into()),
        Err(_) => Ok(0),
    }
}

fn read_input(path: Option<&Path>) -> Result<String, Box<dyn Error>> {
    match path {
        Some(p) => Ok(fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<u8, Box<dyn Error>> {
    let text = read_input(args.file.as_deref())?;
    let formula = parse_cnfxor(&text)?;
    let cfg = SolverConfig {
        module: args.module.into(),
        explanation: args.explain.into(),
        cut_primary: args.cut.into(),
        cut_minimization: args.min_cut.into(),
        learn_xor: args.learn_xor,
        eager_explanations: args.eager,
        seed: resolve_seed(args.seed)?,
        max_conflicts: args.max_conflicts,
        ..SolverConfig::default()
    };
    let result = Solver::new(&formula, cfg)?.solve();
    if args.stats {
        for (key, value) in &result.stats {
            println!("c {key} = {value}");
        }
    }
    match result.outcome {
        SolveOutcome::Sat(model) => {
            if args.verify {
                verify_model(&formula, &model)?;
                println!("c verify: model satisfies every clause");
            }
            println!("s SATISFIABLE");
            println!("{}", model_line(&model));
            Ok(10)
        }
        SolveOutcome::Unsat => {
            if args.verify {
                verify_unsat(&formula)?;
            }
            println!("s UNSATISFIABLE");
            Ok(20)
        }
        SolveOutcome::Unknown => {
            println!("s UNKNOWN");
            Ok(0)
        }
    }
}

fn verify_model(f: &CnfXorFormula, model: &Assignment) -> Result<(), Box<dyn Error>> {
    for c in f.or_clauses() {
        if !c.lits.iter().any(|&l| model.lit_value(l) == Some(true)) {
            return Err(format!("model violates or-clause {c}").into());
        }
    }
    for x in f.xor_clauses() {
        if x.evaluate(model) != Some(true) {
            return Err(format!("model violates xor-clause {x}").into());
        }
    }
    Ok(())
}

fn verify_unsat(f: &CnfXorFormula) -> Result<(), Box<dyn Error>> {
    if f.num_vars() > ENUM_VAR_LIMIT {
        println!("c verify: skipped, {} variables exceed the enumeration limit", f.num_vars());
        return Ok(());
    }
    match enumerate_models(f)?.count {
        0 => {
            println!("c verify: enumeration confirms no model");
            Ok(())
        }
        n => Err(format!("claimed unsatisfiable, but enumeration found {n} models").into()),
    }
}

fn model_line(model: &Assignment) -> String {
    let mut out = String::from("v");
    for id in 1..=model.num_vars() {
        let v = Var::new(id);
        let l = Lit::new(v, model.get(v).unwrap_or(false));
        out.push(' ');
        out.push_str(&l.to_dimacs().to_string());
    }
    out.push_str(" 0");
    out
}

fn build_graph(args: &GraphArgs) -> Result<ParityGraph, Box<dyn Error>> {
    if let Some(m) = args.grid {
        if m < 2 {
            return Err("a toroidal grid needs at least two rows".into());
        }
        return Ok(ParityGraph::grid(m));
    }
    let nodes = args.nodes.ok_or("choose --nodes N or --grid M")?;
    if nodes < 2 {
        return Err("a random graph needs at least two nodes".into());
    }
    let charge = matches!(args.charge, ChargeArg::Odd);
    Ok(ParityGraph::random(nodes, args.degree, charge, resolve_seed(args.seed)?))
}

fn run_gen(args: GenArgs) -> Result<u8, Box<dyn Error>> {
    let g = build_graph(&args.graph)?;
    println!(
        "c charged graph: {} nodes, {} edges, total charge {}",
        g.num_nodes(),
        g.num_edges(),
        if g.total_charge() { "odd" } else { "even" }
    );
    print!("{}", write_cnfxor(&g.to_formula()));
    Ok(0)
}

fn run_refute(args: RefuteArgs) -> Result<u8, Box<dyn Error>> {
    let g = match &args.file {
        Some(path) => {
            if args.graph.nodes.is_some() || args.graph.grid.is_some() {
                return Err("give either a file or graph options, not both".into());
            }
            let f = parse_cnfxor(&fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?)?;
            ParityGraph::from_xor_formula(&f)?
        }
        None => build_graph(&args.graph)?,
    };
    let r = g.spanning_tree_refutation()?;
    println!(
        "c {} nodes, {} edges: {} cycle edges assumed, {} tree edges derived",
        g.num_nodes(),
        g.num_edges(),
        r.assumptions.len(),
        r.derived.len()
    );
    println!("c learned the empty xor-clause {}", r.learned);
    if args.dump {
        for line in r.dump.lines() {
            println!("c {line}");
        }
    }
    println!("s UNSATISFIABLE");
    Ok(20)
}
