use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use unicon::automata::AutomataError;
use unicon::baseline::standard_synthesis;
use unicon::bench::{gen_plant, gen_spec, grid_arch, GridWorld};
use unicon::logic::{parse_ltl, safety_nnf, Architecture, LogicError};
use unicon::machines::{parallel, read_mm, write_mm, MooreMachine};
use unicon::synthesis::{
    compose, extract_controller, read_uc, universal_controller, write_uc, ComposeOptions,
    ComposeResult, SynthesisError, TieBreak,
};
use unicon::verify::verify;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_UNREALIZABLE: u8 = 10;

#[derive(Parser)]
#[command(
    name = "unicon",
    about = "Universal safety controller synthesis and on-the-fly plant composition"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ArchFlags {
    /// Environment output propositions (space-separated).
    #[arg(long, value_name = "PROPS")]
    arch_env: String,
    /// Controller output propositions (space-separated).
    #[arg(long, value_name = "PROPS")]
    arch_ctrl: String,
    /// Plant output propositions (space-separated).
    #[arg(long, value_name = "PROPS")]
    arch_plant: String,
}

impl ArchFlags {
    fn build(&self) -> Result<Architecture, LogicError> {
        let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
        Architecture::new(split(&self.arch_env), split(&self.arch_ctrl), split(&self.arch_plant))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    Min,
    Max,
}

impl From<TieBreakArg> for TieBreak {
    fn from(t: TieBreakArg) -> TieBreak {
        match t {
            TieBreakArg::Min => TieBreak::LexMin,
            TieBreakArg::Max => TieBreak::LexMax,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Unicon,
    Standard,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Walls {
    None,
    Maze,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a universal controller from a safety LTL specification.
    Universal {
        /// File containing the LTL specification.
        spec: PathBuf,
        #[command(flatten)]
        arch: ArchFlags,
        /// Write the universal controller here (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also emit the skeleton automaton in DOT format to this file.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Adapt a universal controller to a concrete plant.
    Compose {
        /// Universal controller file (from `universal`).
        uc: PathBuf,
        /// Plant Moore machine file.
        plant: PathBuf,
        #[arg(long, value_enum, default_value = "min")]
        tie_break: TieBreakArg,
        /// Disable the early-termination and ordering heuristics.
        #[arg(long)]
        no_heuristics: bool,
        /// Enable the terminal-sink shortcut in membership games.
        #[arg(long)]
        terminal_sink_shortcut: bool,
        /// Write the controller here (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also emit the controller in DOT format to this file.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
    },
    /// Standard game-based synthesis directly on specification × plant.
    Standard {
        /// File containing the LTL specification.
        spec: PathBuf,
        /// Plant Moore machine file.
        plant: PathBuf,
        #[command(flatten)]
        arch: ArchFlags,
        #[arg(long, value_enum, default_value = "min")]
        tie_break: TieBreakArg,
        /// Write the controller here (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Model-check controller ∥ plant against a specification.
    Verify {
        /// Controller Moore machine file.
        controller: PathBuf,
        /// Plant Moore machine file.
        plant: PathBuf,
        /// File containing the LTL specification.
        spec: PathBuf,
        #[command(flatten)]
        arch: ArchFlags,
    },
    /// Generate and run a grid benchmark, appending statistics as CSV.
    Bench {
        /// Grid side length.
        #[arg(long)]
        size: usize,
        /// Specification type (1, 2 or 3).
        #[arg(long)]
        spec_type: u8,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// CSV file to append one row per method to.
        #[arg(long, value_name = "FILE")]
        stats: Option<PathBuf>,
        /// Per-method timeout in seconds.
        #[arg(long, value_name = "SECONDS")]
        timeout: Option<u64>,
        #[arg(long, value_enum, default_value = "none")]
        walls: Walls,
        /// Seed for the maze layout (with --walls maze).
        #[arg(long, default_value_t = 0)]
        maze_seed: u64,
        #[arg(long, value_enum, default_value = "min")]
        tie_break: TieBreakArg,
        #[arg(long)]
        no_heuristics: bool,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<LogicError> for Failure {
    fn from(e: LogicError) -> Failure {
        Failure::usage(e.to_string())
    }
}

impl From<AutomataError> for Failure {
    fn from(e: AutomataError) -> Failure {
        let code = match e {
            AutomataError::ResourceCap { .. } => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<SynthesisError> for Failure {
    fn from(e: SynthesisError) -> Failure {
        let code = match &e {
            SynthesisError::Automata(AutomataError::ResourceCap { .. }) => EXIT_RESOURCE,
            SynthesisError::InternalInvariant(_) => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_spec(path: &Path, arch: &Architecture) -> Result<unicon::logic::Ltl, Failure> {
    let text = read_file(path)?;
    let f = parse_ltl(text.trim(), arch)?;
    safety_nnf(&f)?;
    Ok(f)
}

fn load_plant(path: &Path) -> Result<MooreMachine, Failure> {
    let text = read_file(path)?;
    read_mm(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn describe_lasso(w: &unicon::logic::LassoWord, arch: &Architecture) -> String {
    let fmt = |vs: &[unicon::logic::Valuation]| {
        vs.iter().map(|v| v.describe(arch)).collect::<Vec<_>>().join(" ")
    };
    format!("{} ({})^w", fmt(&w.prefix), fmt(&w.cycle))
}

fn cmd_universal(
    spec: &Path,
    arch: &ArchFlags,
    output: Option<&PathBuf>,
    dot: Option<&PathBuf>,
) -> Result<u8, Failure> {
    let arch = arch.build()?;
    let f = load_spec(spec, &arch)?;
    let u = universal_controller(&f, &arch)?;
    eprintln!("universal controller: {} states", u.state_count());
    if let Some(path) = dot {
        emit(Some(path), &unicon::automata::dsa_to_dot(&u.skeleton))?;
    }
    emit(output, &write_uc(&u))?;
    Ok(EXIT_OK)
}

fn cmd_compose(
    uc_path: &Path,
    plant_path: &Path,
    tie_break: TieBreak,
    no_heuristics: bool,
    terminal_sink_shortcut: bool,
    output: Option<&PathBuf>,
    dot: Option<&PathBuf>,
) -> Result<u8, Failure> {
    let u = read_uc(&read_file(uc_path)?)?;
    let plant = load_plant(plant_path)?;
    let opts = ComposeOptions {
        heuristics: !no_heuristics,
        tie_break,
        terminal_sink_shortcut,
    };
    match compose(&u, &plant, opts)? {
        ComposeResult::Unrealizable => {
            println!("UNREALIZABLE");
            Ok(EXIT_UNREALIZABLE)
        }
        ComposeResult::Realizable(comp) => {
            let ctrl = extract_controller(&comp, tie_break);
            eprintln!(
                "composition: {} states, controller: {} states, games solved: {}, cache hits: {}",
                comp.states.len(),
                ctrl.state_count(),
                comp.stats.games_solved,
                comp.stats.cache_hits
            );
            if let Some(path) = dot {
                emit(Some(path), &machine_to_dot(&ctrl))?;
            }
            emit(output, &write_mm(&ctrl))?;
            Ok(EXIT_OK)
        }
    }
}

fn machine_to_dot(m: &MooreMachine) -> String {
    use std::fmt::Write as _;
    let mut s = String::from("digraph mm {\n  rankdir=LR;\n  node [shape=circle];\n");
    let _ = writeln!(s, "  init [shape=point];");
    let _ = writeln!(s, "  init -> \"{}\";", m.state_name(m.init));
    for st in 0..m.state_count() {
        let outs: Vec<&str> = m
            .outputs
            .iter()
            .enumerate()
            .filter(|(i, _)| m.output(st).contains(*i))
            .map(|(_, n)| n.as_str())
            .collect();
        let _ = writeln!(
            s,
            "  \"{}\" [label=\"{}\\n{{{}}}\"];",
            m.state_name(st),
            m.state_name(st),
            outs.join(" ")
        );
        let mut groups: Vec<(usize, Vec<u32>)> = Vec::new();
        for v in 0..m.input_letter_count() {
            let t = m.step(st, unicon::logic::Valuation(v as u32));
            match groups.iter_mut().find(|(g, _)| *g == t) {
                Some((_, vs)) => vs.push(v as u32),
                None => groups.push((t, vec![v as u32])),
            }
        }
        for (t, vs) in groups {
            let pred = unicon::machines::predicate_text(&vs, m.inputs.len(), &m.inputs);
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                m.state_name(st),
                m.state_name(t),
                pred
            );
        }
    }
    s.push_str("}\n");
    s
}

fn cmd_standard(
    spec: &Path,
    plant_path: &Path,
    arch: &ArchFlags,
    tie_break: TieBreak,
    output: Option<&PathBuf>,
) -> Result<u8, Failure> {
    let arch = arch.build()?;
    let f = load_spec(spec, &arch)?;
    let plant = load_plant(plant_path)?;
    let r = standard_synthesis(&f, &arch, &plant, tie_break)?;
    match r.controller {
        None => {
            println!("UNREALIZABLE");
            Ok(EXIT_UNREALIZABLE)
        }
        Some(ctrl) => {
            eprintln!(
                "game: {} nodes, controller: {} states",
                r.game_nodes,
                ctrl.state_count()
            );
            emit(output, &write_mm(&ctrl))?;
            Ok(EXIT_OK)
        }
    }
}

fn cmd_verify(
    controller: &Path,
    plant_path: &Path,
    spec: &Path,
    arch: &ArchFlags,
) -> Result<u8, Failure> {
    let arch = arch.build()?;
    let f = load_spec(spec, &arch)?;
    let plant = load_plant(plant_path)?;
    let ctrl = load_plant(controller)?;
    let system = parallel(&plant, &ctrl)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let r = verify(&system, &f, &arch)?;
    if r.ok {
        println!("OK");
        Ok(EXIT_OK)
    } else {
        let w = r.counterexample.expect("failed verification carries a witness");
        println!("FAIL {}", describe_lasso(&w, &arch));
        Ok(EXIT_FAIL)
    }
}

struct BenchRow {
    method: &'static str,
    time_ms: u128,
    dsa_states: Option<usize>,
    uc_states: Option<usize>,
    composition_states: Option<usize>,
    controller_states: Option<usize>,
    games_solved: Option<u64>,
    cache_hits: Option<u64>,
    verdict: String,
}

fn run_with_timeout<T: Send + 'static>(
    timeout: Option<u64>,
    job: impl FnOnce() -> T + Send + 'static,
) -> Option<T> {
    match timeout {
        None => Some(job()),
        Some(secs) => {
            let (tx, rx) = mpsc::channel();
            std::thread::spawn(move || {
                let _ = tx.send(job());
            });
            rx.recv_timeout(Duration::from_secs(secs)).ok()
        }
    }
}

fn bench_unicon(
    f: &unicon::logic::Ltl,
    arch: &Architecture,
    plant: &MooreMachine,
    opts: ComposeOptions,
    timeout: Option<u64>,
) -> BenchRow {
    let f = f.clone();
    let arch = arch.clone();
    let plant = plant.clone();
    let started = Instant::now();
    let result = run_with_timeout(timeout, move || {
        let t0 = Instant::now();
        let u = universal_controller(&f, &arch)?;
        let composed = compose(&u, &plant, opts)?;
        Ok::<_, SynthesisError>((t0.elapsed(), u, composed, opts.tie_break))
    });
    match result {
        None => BenchRow {
            method: "unicon",
            time_ms: started.elapsed().as_millis(),
            dsa_states: None,
            uc_states: None,
            composition_states: None,
            controller_states: None,
            games_solved: None,
            cache_hits: None,
            verdict: "TIMEOUT".into(),
        },
        Some(Err(e)) => BenchRow {
            method: "unicon",
            time_ms: started.elapsed().as_millis(),
            dsa_states: None,
            uc_states: None,
            composition_states: None,
            controller_states: None,
            games_solved: None,
            cache_hits: None,
            verdict: format!("ERROR({e})"),
        },
        Some(Ok((elapsed, u, composed, tie_break))) => match composed {
            ComposeResult::Unrealizable => BenchRow {
                method: "unicon",
                time_ms: elapsed.as_millis(),
                dsa_states: Some(u.skeleton.state_count()),
                uc_states: Some(u.state_count()),
                composition_states: None,
                controller_states: None,
                games_solved: None,
                cache_hits: None,
                verdict: "UNREALIZABLE".into(),
            },
            ComposeResult::Realizable(comp) => {
                let ctrl = extract_controller(&comp, tie_break);
                BenchRow {
                    method: "unicon",
                    time_ms: elapsed.as_millis(),
                    dsa_states: Some(u.skeleton.state_count()),
                    uc_states: Some(u.state_count()),
                    composition_states: Some(comp.states.len()),
                    controller_states: Some(ctrl.state_count()),
                    games_solved: Some(comp.stats.games_solved),
                    cache_hits: Some(comp.stats.cache_hits),
                    verdict: "REALIZABLE".into(),
                }
            }
        },
    }
}

fn bench_standard(
    f: &unicon::logic::Ltl,
    arch: &Architecture,
    plant: &MooreMachine,
    tie_break: TieBreak,
    timeout: Option<u64>,
) -> BenchRow {
    let f = f.clone();
    let arch = arch.clone();
    let plant = plant.clone();
    let started = Instant::now();
    let result = run_with_timeout(timeout, move || {
        let t0 = Instant::now();
        let r = standard_synthesis(&f, &arch, &plant, tie_break)?;
        Ok::<_, SynthesisError>((t0.elapsed(), r))
    });
    match result {
        None => BenchRow {
            method: "standard",
            time_ms: started.elapsed().as_millis(),
            dsa_states: None,
            uc_states: None,
            composition_states: None,
            controller_states: None,
            games_solved: None,
            cache_hits: None,
            verdict: "TIMEOUT".into(),
        },
        Some(Err(e)) => BenchRow {
            method: "standard",
            time_ms: started.elapsed().as_millis(),
            dsa_states: None,
            uc_states: None,
            composition_states: None,
            controller_states: None,
            games_solved: None,
            cache_hits: None,
            verdict: format!("ERROR({e})"),
        },
        Some(Ok((elapsed, r))) => BenchRow {
            method: "standard",
            time_ms: elapsed.as_millis(),
            dsa_states: Some(r.dsa_states),
            uc_states: None,
            composition_states: None,
            controller_states: r.controller.as_ref().map(|c| c.state_count()),
            games_solved: None,
            cache_hits: None,
            verdict: if r.controller.is_some() {
                "REALIZABLE".into()
            } else {
                "UNREALIZABLE".into()
            },
        },
    }
}

const CSV_HEADER: &str = "timestamp,benchmark,grid_size,spec_type,method,time_ms,\
dsa_states,uc_states,composition_states,controller_states,games_solved,cache_hits,verdict";

fn append_csv(path: &Path, rows: &[String]) -> Result<(), Failure> {
    let new = !path.exists();
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))?;
    let mut text = String::new();
    if new {
        text.push_str(CSV_HEADER);
        text.push('\n');
    }
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    file.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    size: usize,
    spec_type: u8,
    method: Method,
    stats: Option<&PathBuf>,
    timeout: Option<u64>,
    walls: Walls,
    maze_seed: u64,
    tie_break: TieBreak,
    no_heuristics: bool,
) -> Result<u8, Failure> {
    let grid = match walls {
        Walls::None => GridWorld::open(size),
        Walls::Maze => GridWorld::maze(size, maze_seed),
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let f = gen_spec(spec_type).map_err(|e| Failure::usage(e.to_string()))?;
    let arch = grid_arch();
    let plant = gen_plant(&grid).map_err(|e| Failure::usage(e.to_string()))?;
    eprintln!("plant: {} states", plant.state_count());

    let opts = ComposeOptions {
        heuristics: !no_heuristics,
        tie_break,
        terminal_sink_shortcut: false,
    };
    let mut rows = Vec::new();
    if matches!(method, Method::Unicon | Method::Both) {
        rows.push(bench_unicon(&f, &arch, &plant, opts, timeout));
    }
    if matches!(method, Method::Standard | Method::Both) {
        rows.push(bench_standard(&f, &arch, &plant, tie_break, timeout));
    }

    let timestamp =
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let wall_tag = match walls {
        Walls::None => "open".to_string(),
        Walls::Maze => format!("maze{maze_seed}"),
    };
    let benchmark = format!("grid-{wall_tag}");
    let mut csv_rows = Vec::new();
    for row in &rows {
        println!(
            "{} size={} type={} verdict={} time_ms={}",
            row.method, size, spec_type, row.verdict, row.time_ms
        );
        csv_rows.push(format!(
            "{timestamp},{benchmark},{size},{spec_type},{},{},{},{},{},{},{},{},{}",
            row.method,
            row.time_ms,
            opt(&row.dsa_states),
            opt(&row.uc_states),
            opt(&row.composition_states),
            opt(&row.controller_states),
            opt(&row.games_solved),
            opt(&row.cache_hits),
            row.verdict
        ));
    }
    if let Some(path) = stats {
        append_csv(path, &csv_rows)?;
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.cmd {
        Cmd::Universal { spec, arch, output, dot } => {
            cmd_universal(&spec, &arch, output.as_ref(), dot.as_ref())
        }
        Cmd::Compose {
            uc,
            plant,
            tie_break,
            no_heuristics,
            terminal_sink_shortcut,
            output,
            dot,
        } => cmd_compose(
            &uc,
            &plant,
            tie_break.into(),
            no_heuristics,
            terminal_sink_shortcut,
            output.as_ref(),
            dot.as_ref(),
        ),
        Cmd::Standard { spec, plant, arch, tie_break, output } => {
            cmd_standard(&spec, &plant, &arch, tie_break.into(), output.as_ref())
        }
        Cmd::Verify { controller, plant, spec, arch } => {
            cmd_verify(&controller, &plant, &spec, &arch)
        }
        Cmd::Bench {
            size,
            spec_type,
            method,
            stats,
            timeout,
            walls,
            maze_seed,
            tie_break,
            no_heuristics,
        } => cmd_bench(
            size,
            spec_type,
            method,
            stats.as_ref(),
            timeout,
            walls,
            maze_seed,
            tie_break.into(),
            no_heuristics,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
