//! Command-line surface: synthesis, benchmark generation, the differential
//! harness, and MSO export.
//!
//! Exit codes: 0 = success (for `synth`: realizable), 1 = unrealizable (for
//! `synth`) or contract violations (for `bench`), 2 = any error. The legacy
//! third positional argument of `synth` is accepted and ignored for
//! compatibility with older tooling invocations.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    cross_check, discover_instances, gen_hiker, gen_sheep, gen_trap, named_trap_instance,
    parse_trap_graph, read_instance, render_csv, write_instance, CrossCheckReport, Expected,
    InstanceDescriptor,
};
use crate::error::Limits;
use crate::logic::{parse_ltlf_file, parse_partition};
use crate::mso::mso_export;
use crate::synth::{synth, Mode, StageLog, SynthInstance};
use crate::verify::{verify_strategy, Verdict};

pub const EXIT_REALIZABLE: i32 = 0;
pub const EXIT_UNREALIZABLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ltlf-synth",
    about = "Reactive synthesis for LTLf goals with a guaranteed backup goal under unreliable inputs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide realizability of a two-line .ltlf specification and extract a
    /// strategy.
    Synth(SynthArgs),
    /// Generate benchmark instances (<name>.ltlf, <name>.part, expected).
    Gen(GenArgs),
    /// Run the differential harness over a directory of instances and emit a
    /// timing CSV.
    Bench(BenchArgs),
    /// Print the MONA program for the quantified reduction of an instance.
    ExportMso(ExportMsoArgs),
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Specification file: line 1 main formula, line 2 backup formula.
    pub ltlf: PathBuf,
    /// Partition file (.inputs/.outputs/.unobservables).
    pub part: PathBuf,
    /// Ignored legacy positional argument.
    pub legacy: Option<String>,
    /// Pipeline: direct, belief, or qltlf.
    #[arg(long, value_parser = parse_mode, default_value = "direct")]
    pub mode: Mode,
    /// Verify the extracted strategy up to this horizon ("auto" = winning-set
    /// size); verification failure is a hard error.
    #[arg(long)]
    pub verify: Option<String>,
    /// Write the extracted strategy as DOT.
    #[arg(long)]
    pub strategy_dot: Option<PathBuf>,
    /// Dump every pipeline stage as DOT into this directory.
    #[arg(long)]
    pub emit: Option<PathBuf>,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Hard cap on the alphabet width (propositions).
    #[arg(long)]
    pub width_cap: Option<usize>,
    /// State bound for the formula-to-DFA construction.
    #[arg(long)]
    pub state_limit: Option<usize>,
    /// Subset bound for determinization and belief construction.
    #[arg(long)]
    pub subset_limit: Option<usize>,
    /// Abort after this many seconds.
    #[arg(long)]
    pub timeout_secs: Option<u64>,
}

impl CapArgs {
    fn limits(&self) -> Limits {
        let mut limits = Limits::default();
        if let Some(w) = self.width_cap {
            limits.width_cap = w;
        }
        if let Some(s) = self.state_limit {
            limits.state_limit = s;
        }
        if let Some(s) = self.subset_limit {
            limits.subset_limit = s;
        }
        if let Some(t) = self.timeout_secs {
            limits.deadline = Some(Instant::now() + Duration::from_secs(t));
        }
        limits
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: GenFamily,
}

#[derive(Debug, Subcommand)]
pub enum GenFamily {
    /// River crossing: n sheep, moved two at a time, with unreliable
    /// compatibility readings.
    Sheep {
        #[arg(long)]
        n: u32,
        /// Pairs that truly dislike each other, e.g. "1-2,3-4".
        #[arg(long, default_value = "")]
        disliked: String,
        /// Pairs believed to like each other, e.g. "2-3".
        #[arg(long, default_value = "")]
        liked: String,
        /// The favorite sheep the backup goal must move, e.g. "1,2".
        #[arg(long, default_value = "1")]
        favorites: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Graph navigation with trap-diverted edges and unreliable trap
    /// readings.
    Trap {
        /// One of the bundled instances: line4, detour, blocked, maze8.
        #[arg(long, conflicts_with_all = ["graph", "start", "main", "backup"])]
        named: Option<String>,
        /// Graph file, one edge per line: "src dst [trap_id alt_dst]".
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        start: u32,
        /// Main-goal vertices, e.g. "3,4".
        #[arg(long, default_value = "")]
        main: String,
        /// Backup-goal vertices.
        #[arg(long, default_value = "")]
        backup: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Trail walk with unreliable poison readings; herbs make the backup
    /// achievable.
    Hiker {
        /// Trail length (>= 4); the end of the trail is reached at instant
        /// k + 1.
        #[arg(long)]
        k: u32,
        /// Do not force herbs along the trail (makes the instance
        /// unrealizable).
        #[arg(long)]
        no_herbs: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of instance subdirectories.
    pub instances: PathBuf,
    /// Comma-separated pipelines to run.
    #[arg(long, default_value = "direct,belief,qltlf")]
    pub modes: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Resource caps; --timeout-secs applies per instance (default 60).
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Debug, Args)]
pub struct ExportMsoArgs {
    pub ltlf: PathBuf,
    pub part: PathBuf,
    /// Write the program here instead of stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Synth(args) => run_synth(&args),
        Command::Gen(args) => run_gen(&args.family),
        Command::Bench(args) => run_bench(&args),
        Command::ExportMso(args) => run_export_mso(&args),
    }
    .unwrap_or_else(|message| {
        eprintln!("error: {message}");
        EXIT_ERROR
    })
}

type CmdResult = Result<i32, String>;

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_instance(ltlf: &Path, part: &Path) -> Result<SynthInstance, String> {
    let (main, backup) = parse_ltlf_file(&read_file(ltlf)?)
        .map_err(|e| format!("{}: {e}", ltlf.display()))?;
    let partition = parse_partition(&read_file(part)?)
        .map_err(|e| format!("{}: {e}", part.display()))?;
    SynthInstance::new(main, backup, partition).map_err(|e| e.to_string())
}

fn run_synth(args: &SynthArgs) -> CmdResult {
    let inst = load_instance(&args.ltlf, &args.part)?;
    let limits = args.caps.limits();
    let mut log = StageLog::new(args.emit.is_some());
    let report = synth(&inst, args.mode, &limits, Some(&mut log)).map_err(|e| e.to_string())?;

    if let Some(dir) = &args.emit {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for (i, record) in log.records.iter().enumerate() {
            if let Some(dot) = &record.dot {
                let path = dir.join(format!("{i:02}-{}.dot", record.name));
                std::fs::write(&path, dot).map_err(|e| format!("{}: {e}", path.display()))?;
            }
        }
    }

    if let Some(path) = &args.strategy_dot {
        if let Some(strategy) = &report.strategy {
            std::fs::write(path, strategy.to_dot(inst.partition()))
                .map_err(|e| format!("{}: {e}", path.display()))?;
        } else {
            eprintln!("note: no strategy to export (unrealizable)");
        }
    }

    if let Some(spec) = &args.verify {
        if let Some(strategy) = &report.strategy {
            let horizon = match spec.as_str() {
                "auto" => report.winning_size.max(1),
                n => n
                    .parse::<usize>()
                    .map_err(|_| format!("--verify takes a number or `auto`, got `{n}`"))?,
            };
            let verdict = verify_strategy(
                strategy,
                inst.main(),
                inst.backup(),
                inst.partition(),
                horizon,
                &limits,
            )
            .map_err(|e| e.to_string())?;
            match verdict {
                Verdict::Pass => eprintln!("verification passed (horizon {horizon})"),
                Verdict::Fail(f) => {
                    return Err(format!(
                        "strategy verification failed: {:?} on environment inputs {:?}",
                        f.kind, f.inputs
                    ))
                }
            }
        }
    }

    if report.realizable {
        println!("REALIZABLE");
        Ok(EXIT_REALIZABLE)
    } else {
        println!("UNREALIZABLE");
        Ok(EXIT_UNREALIZABLE)
    }
}

fn parse_u32_list(text: &str, what: &str) -> Result<Vec<u32>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| format!("bad {what} entry `{s}`"))
        })
        .collect()
}

fn parse_pair_list(text: &str, what: &str) -> Result<Vec<(u32, u32)>, String> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let (a, b) = s
                .trim()
                .split_once('-')
                .ok_or_else(|| format!("bad {what} pair `{s}` (expected i-j)"))?;
            let a = a.parse::<u32>().map_err(|_| format!("bad {what} pair `{s}`"))?;
            let b = b.parse::<u32>().map_err(|_| format!("bad {what} pair `{s}`"))?;
            Ok((a, b))
        })
        .collect()
}

fn run_gen(family: &GenFamily) -> CmdResult {
    let desc = match family {
        GenFamily::Sheep {
            n,
            disliked,
            liked,
            favorites,
            out: _,
            name,
        } => {
            let disliked = parse_pair_list(disliked, "disliked")?;
            let liked = parse_pair_list(liked, "liked")?;
            let favorites = parse_u32_list(favorites, "favorites")?;
            let instance =
                gen_sheep(*n, &disliked, &liked, &favorites).map_err(|e| e.to_string())?;
            // The parity law pins the verdict only for ungated instances.
            let expected = if disliked.is_empty() && liked.is_empty() {
                Expected::from_verdict(n % 2 == 0)
            } else {
                Expected::Unknown
            };
            let name = name.clone().unwrap_or_else(|| {
                let mut n = format!("sheep_n{n}");
                for (i, j) in &disliked {
                    n.push_str(&format!("_d{i}_{j}"));
                }
                for (i, j) in &liked {
                    n.push_str(&format!("_l{i}_{j}"));
                }
                n
            });
            InstanceDescriptor {
                name,
                expected,
                instance,
            }
        }
        GenFamily::Trap {
            named,
            graph,
            start,
            main,
            backup,
            out: _,
            name,
        } => match named {
            Some(named_name) => {
                let (g, start, main, backup, expected) = named_trap_instance(named_name)
                    .ok_or_else(|| format!("unknown named trap instance `{named_name}`"))?;
                let instance =
                    gen_trap(&g, start, &main, &backup).map_err(|e| e.to_string())?;
                InstanceDescriptor {
                    name: name.clone().unwrap_or_else(|| format!("trap_{named_name}")),
                    expected,
                    instance,
                }
            }
            None => {
                let graph_path = graph
                    .as_ref()
                    .ok_or_else(|| "trap needs --named or --graph".to_string())?;
                let g = parse_trap_graph(&read_file(graph_path)?)
                    .map_err(|e| format!("{}: {e}", graph_path.display()))?;
                let main = parse_u32_list(main, "main region")?;
                let backup = parse_u32_list(backup, "backup region")?;
                let instance =
                    gen_trap(&g, *start, &main, &backup).map_err(|e| e.to_string())?;
                let default = graph_path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .map(|s| format!("trap_{s}"))
                    .unwrap_or_else(|| "trap".to_string());
                InstanceDescriptor {
                    name: name.clone().unwrap_or(default),
                    expected: Expected::Unknown,
                    instance,
                }
            }
        },
        GenFamily::Hiker {
            k,
            no_herbs,
            out: _,
            name,
        } => {
            let instance = gen_hiker(*k, !no_herbs).map_err(|e| e.to_string())?;
            let expected = Expected::from_verdict(!no_herbs);
            let suffix = if *no_herbs { "noherbs" } else { "herbs" };
            InstanceDescriptor {
                name: name.clone().unwrap_or_else(|| format!("hiker_k{k}_{suffix}")),
                expected,
                instance,
            }
        }
    };
    let out = match family {
        GenFamily::Sheep { out, .. }
        | GenFamily::Trap { out, .. }
        | GenFamily::Hiker { out, .. } => out,
    };
    let dir = out.join(&desc.name);
    write_instance(&dir, &desc).map_err(|e| format!("{}: {e}", dir.display()))?;
    println!("{}", dir.display());
    Ok(0)
}

fn run_bench(args: &BenchArgs) -> CmdResult {
    let dirs = discover_instances(&args.instances)
        .map_err(|e| format!("{}: {e}", args.instances.display()))?;
    if dirs.is_empty() {
        return Err(format!(
            "no instance subdirectories under {}",
            args.instances.display()
        ));
    }
    let modes: Vec<Mode> = args
        .modes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_mode(s.trim()))
        .collect::<Result<_, _>>()?;
    if modes.is_empty() {
        return Err("no modes selected".into());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| e.to_string())?;
    let timeout = Duration::from_secs(args.caps.timeout_secs.unwrap_or(60));
    let caps = &args.caps;
    let reports: Result<Vec<CrossCheckReport>, String> = pool.install(|| {
        use rayon::prelude::*;
        dirs.par_iter()
            .map(|dir| {
                let desc =
                    read_instance(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                let mut limits = caps.limits();
                limits.deadline = Some(Instant::now() + timeout);
                Ok(cross_check(&desc, &modes, &limits))
            })
            .collect()
    });
    let reports = reports?;

    let csv = render_csv(&reports);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => print!("{csv}"),
    }

    let problems: Vec<String> = reports.iter().flat_map(|r| r.problems()).collect();
    if problems.is_empty() {
        Ok(0)
    } else {
        for p in &problems {
            eprintln!("FAIL {p}");
        }
        Ok(1)
    }
}

fn run_export_mso(args: &ExportMsoArgs) -> CmdResult {
    let inst = load_instance(&args.ltlf, &args.part)?;
    let qf = inst.qltlf_reduction().map_err(|e| e.to_string())?;
    let text = mso_export(&qf, &inst.props());
    match &args.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(0)
}
