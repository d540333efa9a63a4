//! Benchmark families, instance files, and the differential cross-check
//! harness.
//!
//! Three parameterized generators produce synthesis instances whose
//! realizability is controlled by their parameters, plus a seeded random
//! family for differential testing. The harness runs every pipeline on an
//! instance, demands identical verdicts, verifies extracted strategies, and
//! reports per-stage state counts and timings.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Limits, Result};
use crate::logic::{parse_ltlf_file, parse_partition, Formula, Partition};
use crate::synth::{
    build_direct_arena_with_main, build_belief_arena_with_main, build_qltlf_arena, main_dfa,
    synth, Mode, StageLog, SynthInstance, SynthReport,
};
use crate::verify::{verify_strategy, Verdict};

// ---------------------------------------------------------------------------
// Sheep: move n sheep across a river two at a time; pairs that dislike each
// other may be blocked, and the farmer's reading of the blocks is unreliable.
// ---------------------------------------------------------------------------

fn move_var(i: u32) -> String {
    format!("move_{i}")
}

fn left_var(i: u32) -> String {
    format!("left_{i}")
}

fn disallow_var(i: u32, j: u32) -> String {
    format!("disallow_{i}_{j}")
}

fn normalize_pairs(pairs: &[(u32, u32)], n: u32) -> Result<BTreeSet<(u32, u32)>> {
    let mut out = BTreeSet::new();
    for &(i, j) in pairs {
        if i == 0 || j == 0 || i > n || j > n || i == j {
            return Err(Error::InvalidInstance(format!(
                "invalid sheep pair ({i}, {j}) for n={n}"
            )));
        }
        out.insert((i.min(j), i.max(j)));
    }
    Ok(out)
}

/// Exactly two of the given atoms hold: the quadratic pairwise encoding
/// (one disjunct per unordered pair, negating the rest).
fn exactly_two(vars: &[String]) -> Formula {
    let mut disjuncts = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let mut terms = vec![Formula::atom(&vars[i]), Formula::atom(&vars[j])];
            for (k, v) in vars.iter().enumerate() {
                if k != i && k != j {
                    terms.push(Formula::not(Formula::atom(v)));
                }
            }
            disjuncts.push(Formula::big_and(terms));
        }
    }
    Formula::big_or(disjuncts)
}

/// Sheep-crossing instance.
///
/// `disliked` pairs are truly blocked and `liked` pairs truly unblocked; the
/// main environment pins the corresponding `disallow` variables to those
/// values, the backup environment does not (the reading may be wrong either
/// way). The main goal moves every sheep, the backup goal only `favorites`.
pub fn gen_sheep(
    n: u32,
    disliked: &[(u32, u32)],
    liked: &[(u32, u32)],
    favorites: &[u32],
) -> Result<SynthInstance> {
    if n < 2 {
        return Err(Error::InvalidInstance("sheep needs n >= 2".into()));
    }
    if let Some(&s) = favorites.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::InvalidInstance(format!(
            "favorite sheep {s} out of range 1..={n}"
        )));
    }
    let disliked = normalize_pairs(disliked, n)?;
    let liked = normalize_pairs(liked, n)?;
    let gated: BTreeSet<(u32, u32)> = disliked.union(&liked).copied().collect();

    let moves: Vec<String> = (1..=n).map(move_var).collect();
    let lefts: Vec<String> = (1..=n).map(left_var).collect();
    let disallows: Vec<String> = gated.iter().map(|&(i, j)| disallow_var(i, j)).collect();
    let partition = Partition::new(moves.clone(), lefts.clone(), disallows)?;

    let mut env = Vec::new();
    // Initially every sheep is on the left bank.
    env.push(Formula::big_and(lefts.iter().map(Formula::atom)));
    // Frame axioms: an unmoved sheep stays where it is.
    for s in 1..=n {
        let m = Formula::atom(move_var(s));
        let l = Formula::atom(left_var(s));
        env.push(Formula::always(Formula::implies(
            Formula::and(
                Formula::strong_next(Formula::not(m.clone())),
                Formula::not(l.clone()),
            ),
            Formula::strong_next(Formula::not(l.clone())),
        )));
        env.push(Formula::always(Formula::implies(
            Formula::and(Formula::strong_next(Formula::not(m)), l.clone()),
            Formula::strong_next(l),
        )));
    }
    // Movement: a requested pair of left-bank sheep crosses, unless the pair
    // is gated and currently disallowed.
    for i in 1..=n {
        for j in i + 1..=n {
            let request = Formula::and(
                Formula::atom(move_var(i)),
                Formula::atom(move_var(j)),
            );
            let both_left = Formula::and(
                Formula::atom(left_var(i)),
                Formula::atom(left_var(j)),
            );
            let crossed = Formula::strong_next(Formula::and(
                Formula::not(Formula::atom(left_var(i))),
                Formula::not(Formula::atom(left_var(j))),
            ));
            if gated.contains(&(i, j)) {
                let blocked = Formula::atom(disallow_var(i, j));
                env.push(Formula::always(Formula::implies(
                    Formula::and(
                        Formula::strong_next(Formula::and(
                            request.clone(),
                            Formula::not(blocked.clone()),
                        )),
                        both_left.clone(),
                    ),
                    crossed,
                )));
                let stay = Formula::strong_next(Formula::and(
                    Formula::atom(left_var(i)),
                    Formula::atom(left_var(j)),
                ));
                env.push(Formula::always(Formula::implies(
                    Formula::and(
                        Formula::strong_next(Formula::and(request, blocked)),
                        both_left,
                    ),
                    stay,
                )));
            } else {
                env.push(Formula::always(Formula::implies(
                    Formula::and(Formula::strong_next(request), both_left),
                    crossed,
                )));
            }
        }
    }
    let env_backup = Formula::big_and(env.clone());
    // The main environment additionally pins the blocked-pair readings to
    // the truth; the backup environment leaves them unconstrained.
    for &(i, j) in &gated {
        let d = Formula::atom(disallow_var(i, j));
        if liked.contains(&(i, j)) {
            env.push(Formula::always(Formula::not(d.clone())));
        }
        if disliked.contains(&(i, j)) {
            env.push(Formula::always(d));
        }
    }
    let env_main = Formula::big_and(env);

    let agent = Formula::always(exactly_two(&moves));
    let goal_main = Formula::eventually(Formula::big_and(
        lefts.iter().map(|l| Formula::not(Formula::atom(l))),
    ));
    let goal_backup = Formula::eventually(Formula::big_and(
        favorites
            .iter()
            .map(|&s| Formula::not(Formula::atom(left_var(s)))),
    ));

    SynthInstance::new(
        Formula::and(agent.clone(), Formula::implies(env_main, goal_main)),
        Formula::and(agent, Formula::implies(env_backup, goal_backup)),
        partition,
    )
}

// ---------------------------------------------------------------------------
// Trap: reach a region of a graph while the environment may divert trapped
// edges; trap readings are unreliable.
// ---------------------------------------------------------------------------

/// One directed edge; a trapped edge is diverted to `alt_dst` while its trap
/// variable reads true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapEdge {
    pub src: u32,
    pub dst: u32,
    pub trap: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapGraph {
    pub vertices: u32,
    pub edges: Vec<TrapEdge>,
}

impl TrapGraph {
    pub fn validate(&self) -> Result<()> {
        if self.vertices == 0 {
            return Err(Error::InvalidInstance("trap graph has no vertices".into()));
        }
        for e in &self.edges {
            if e.src >= self.vertices || e.dst >= self.vertices {
                return Err(Error::InvalidInstance(format!(
                    "edge {} -> {} out of range",
                    e.src, e.dst
                )));
            }
            if let Some((_, alt)) = e.trap {
                if alt >= self.vertices {
                    return Err(Error::InvalidInstance(format!(
                        "trap target {alt} out of range"
                    )));
                }
            }
        }
        for v in 0..self.vertices {
            let out = self.edges.iter().filter(|e| e.src == v).count();
            if out > 2 {
                return Err(Error::InvalidInstance(format!(
                    "vertex {v} has {out} outgoing edges (at most 2 allowed)"
                )));
            }
        }
        Ok(())
    }
}

/// Parses the text graph format: one edge per line, `src dst [trap_id
/// alt_dst]`, `#` comments. The vertex count is one past the largest vertex
/// mentioned.
pub fn parse_trap_graph(text: &str) -> Result<TrapGraph> {
    let mut edges = Vec::new();
    let mut max_vertex = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| -> Result<u32> {
            s.parse().map_err(|_| Error::Syntax {
                column: lineno + 1,
                message: format!("bad graph line {}: `{line}`", lineno + 1),
            })
        };
        let edge = match fields.len() {
            2 => TrapEdge {
                src: parse(fields[0])?,
                dst: parse(fields[1])?,
                trap: None,
            },
            4 => TrapEdge {
                src: parse(fields[0])?,
                dst: parse(fields[1])?,
                trap: Some((parse(fields[2])?, parse(fields[3])?)),
            },
            _ => {
                return Err(Error::Syntax {
                    column: lineno + 1,
                    message: format!(
                        "bad graph line {}: expected `src dst [trap_id alt_dst]`",
                        lineno + 1
                    ),
                })
            }
        };
        max_vertex = max_vertex
            .max(edge.src)
            .max(edge.dst)
            .max(edge.trap.map(|(_, alt)| alt).unwrap_or(0));
        edges.push(edge);
    }
    let g = TrapGraph {
        vertices: max_vertex + 1,
        edges,
    };
    g.validate()?;
    Ok(g)
}

fn pos_bits(vertices: u32) -> usize {
    (32 - (vertices.max(2) - 1).leading_zeros()) as usize
}

fn pos_var(b: usize) -> String {
    format!("pos_{b}")
}

fn trap_var(t: u32) -> String {
    format!("trap_{t}")
}

/// The propositional encoding of "the robot is at vertex v".
fn at_vertex(v: u32, bits: usize) -> Formula {
    Formula::big_and((0..bits).map(|b| {
        let p = Formula::atom(pos_var(b));
        if v >> b & 1 == 1 {
            p
        } else {
            Formula::not(p)
        }
    }))
}

/// Trap-graph instance: from `start`, force a visit to `main_region`
/// (reading traps as they are) while guaranteeing `backup_region` under every
/// rewriting of the trap readings.
pub fn gen_trap(
    graph: &TrapGraph,
    start: u32,
    main_region: &[u32],
    backup_region: &[u32],
) -> Result<SynthInstance> {
    graph.validate()?;
    if start >= graph.vertices {
        return Err(Error::InvalidInstance(format!(
            "start vertex {start} out of range"
        )));
    }
    for &v in main_region.iter().chain(backup_region) {
        if v >= graph.vertices {
            return Err(Error::InvalidInstance(format!(
                "region vertex {v} out of range"
            )));
        }
    }
    let bits = pos_bits(graph.vertices);
    let traps: BTreeSet<u32> = graph.edges.iter().filter_map(|e| e.trap.map(|(t, _)| t)).collect();

    let partition = Partition::new(
        vec!["left".into()],
        (0..bits).map(pos_var).collect(),
        traps.iter().map(|&t| trap_var(t)).collect(),
    )?;

    let left = Formula::atom("left");
    let mut env = vec![at_vertex(start, bits)];
    for v in 0..graph.vertices {
        let out: Vec<&TrapEdge> = graph.edges.iter().filter(|e| e.src == v).collect();
        // The output chooses between the two outgoing edges; with one edge,
        // declining it means staying put, and a vertex without edges is
        // absorbing.
        let mut moves: Vec<(Formula, &TrapEdge)> = Vec::new();
        match out.len() {
            0 => {
                env.push(Formula::always(Formula::implies(
                    at_vertex(v, bits),
                    Formula::weak_next(at_vertex(v, bits)),
                )));
            }
            1 => {
                moves.push((left.clone(), out[0]));
                env.push(Formula::always(Formula::implies(
                    Formula::and(
                        at_vertex(v, bits),
                        Formula::weak_next(Formula::not(left.clone())),
                    ),
                    Formula::weak_next(at_vertex(v, bits)),
                )));
            }
            _ => {
                moves.push((left.clone(), out[0]));
                moves.push((Formula::not(left.clone()), out[1]));
            }
        }
        for (choice, edge) in moves {
            match edge.trap {
                None => env.push(Formula::always(Formula::implies(
                    Formula::and(at_vertex(v, bits), Formula::weak_next(choice)),
                    Formula::weak_next(at_vertex(edge.dst, bits)),
                ))),
                Some((t, alt)) => {
                    let tv = Formula::atom(trap_var(t));
                    env.push(Formula::always(Formula::implies(
                        Formula::big_and([
                            at_vertex(v, bits),
                            Formula::not(tv.clone()),
                            Formula::weak_next(choice.clone()),
                        ]),
                        Formula::weak_next(at_vertex(edge.dst, bits)),
                    )));
                    env.push(Formula::always(Formula::implies(
                        Formula::big_and([
                            at_vertex(v, bits),
                            tv,
                            Formula::weak_next(choice),
                        ]),
                        Formula::weak_next(at_vertex(alt, bits)),
                    )));
                }
            }
        }
    }
    // Trap states never change.
    for &t in &traps {
        let tv = Formula::atom(trap_var(t));
        env.push(Formula::implies(
            tv.clone(),
            Formula::always(tv.clone()),
        ));
        env.push(Formula::implies(
            Formula::not(tv.clone()),
            Formula::always(Formula::not(tv)),
        ));
    }
    let env = Formula::big_and(env);

    let region_goal = |region: &[u32]| {
        Formula::big_or(
            region
                .iter()
                .map(|&v| Formula::eventually(at_vertex(v, bits))),
        )
    };
    SynthInstance::new(
        Formula::implies(env.clone(), region_goal(main_region)),
        Formula::implies(env, region_goal(backup_region)),
        partition,
    )
}

// ---------------------------------------------------------------------------
// Hiker: eat the safe berries along a trail of known length; the poison
// reading is unreliable, and herbs (when present) cure sickness.
// ---------------------------------------------------------------------------

/// Hiker instance with trail length `k` (end of trail at instant `k + 1`).
/// With `herb_forced`, herbs grow at instant `k - 2`, which makes the backup
/// guarantee achievable.
pub fn gen_hiker(k: u32, herb_forced: bool) -> Result<SynthInstance> {
    if k < 4 {
        return Err(Error::InvalidInstance("hiker needs trail length k >= 4".into()));
    }
    let k = k as usize;
    let partition = Partition::new(
        vec![
            "eat".into(),
            "takeMedication".into(),
            "collectMedication".into(),
        ],
        vec![
            "berry".into(),
            "herbs".into(),
            "sick".into(),
            "eot".into(),
            "inbag".into(),
        ],
        vec!["poison".into()],
    )?;
    let atom = Formula::atom;

    let mut env = Vec::new();
    // Start healthy and not at the end of the trail.
    env.push(Formula::and(
        Formula::not(atom("sick")),
        Formula::not(atom("eot")),
    ));
    env.push(Formula::always(Formula::implies(
        atom("berry"),
        Formula::not(atom("herbs")),
    )));
    env.push(Formula::always(Formula::implies(
        atom("poison"),
        atom("berry"),
    )));
    // Successor-state axiom for sickness: eating a poisonous berry makes the
    // hiker sick; taking carried medication cures.
    env.push(Formula::always(Formula::iff(
        Formula::strong_next(atom("sick")),
        Formula::and(
            Formula::strong_next(Formula::True),
            Formula::or(
                Formula::big_and([
                    Formula::strong_next(atom("eat")),
                    atom("berry"),
                    atom("poison"),
                ]),
                Formula::and(
                    atom("sick"),
                    Formula::not(Formula::and(atom("inbag"), atom("takeMedication"))),
                ),
            ),
        ),
    )));
    // Successor-state axiom for the bag: collecting herbs fills it, taking
    // the medication empties it.
    env.push(Formula::always(Formula::iff(
        Formula::strong_next(atom("inbag")),
        Formula::and(
            Formula::strong_next(Formula::True),
            Formula::or(
                Formula::and(
                    atom("herbs"),
                    Formula::strong_next(atom("collectMedication")),
                ),
                Formula::and(atom("inbag"), Formula::not(atom("takeMedication"))),
            ),
        ),
    )));
    // End-of-trail schedule: eot first holds at instant k+1.
    for step in 1..k {
        env.push(Formula::weak_next_n(Formula::not(atom("eot")), step));
    }
    env.push(Formula::weak_next_n(atom("eot"), k));
    env.push(Formula::always(Formula::implies(
        atom("eot"),
        Formula::weak_next(atom("eot")),
    )));
    env.push(Formula::always(Formula::implies(
        atom("eot"),
        Formula::not(atom("berry")),
    )));
    if herb_forced {
        env.push(Formula::weak_next_n(atom("herbs"), k - 3));
    }
    let env = Formula::big_and(env);

    let goal_main = Formula::and(
        Formula::eventually(atom("eot")),
        Formula::always(Formula::implies(
            Formula::and(atom("berry"), Formula::not(atom("poison"))),
            Formula::weak_next(atom("eat")),
        )),
    );
    let goal_backup = Formula::eventually(Formula::and(atom("eot"), Formula::not(atom("sick"))));

    SynthInstance::new(
        Formula::implies(env.clone(), goal_main),
        Formula::implies(env, goal_backup),
        partition,
    )
}

// ---------------------------------------------------------------------------
// Instance descriptors, files, and the random family
// ---------------------------------------------------------------------------

/// What the generator knows about an instance's verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Realizable,
    Unrealizable,
    Unknown,
}

impl Expected {
    pub fn from_verdict(realizable: bool) -> Expected {
        if realizable {
            Expected::Realizable
        } else {
            Expected::Unrealizable
        }
    }

    pub fn parse(text: &str) -> Result<Expected> {
        match text.trim() {
            "1" => Ok(Expected::Realizable),
            "0" => Ok(Expected::Unrealizable),
            "unknown" => Ok(Expected::Unknown),
            other => Err(Error::InvalidInstance(format!(
                "expected file must contain 0, 1, or unknown, found `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expected::Realizable => "1",
            Expected::Unrealizable => "0",
            Expected::Unknown => "unknown",
        })
    }
}

/// A named instance with its expected verdict.
#[derive(Debug, Clone)]
pub struct InstanceDescriptor {
    pub name: String,
    pub expected: Expected,
    pub instance: SynthInstance,
}

/// Writes `<name>.ltlf`, `<name>.part`, and `expected` into `dir`.
/// Identical parameters produce byte-identical files.
pub fn write_instance(dir: &Path, desc: &InstanceDescriptor) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let ltlf = format!("{}\n{}\n", desc.instance.main(), desc.instance.backup());
    std::fs::write(dir.join(format!("{}.ltlf", desc.name)), ltlf)?;
    std::fs::write(
        dir.join(format!("{}.part", desc.name)),
        desc.instance.partition().to_string(),
    )?;
    std::fs::write(dir.join("expected"), format!("{}\n", desc.expected))?;
    Ok(())
}

/// Reads an instance directory written by [`write_instance`] (a `.ltlf`
/// file, a `.part` file, and optionally `expected`).
pub fn read_instance(dir: &Path) -> Result<InstanceDescriptor> {
    let mut ltlf_path = None;
    let mut part_path = None;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ltlf") if ltlf_path.is_none() => ltlf_path = Some(path),
            Some("part") if part_path.is_none() => part_path = Some(path),
            _ => {}
        }
    }
    let ltlf_path = ltlf_path.ok_or_else(|| {
        Error::InvalidInstance(format!("no .ltlf file in {}", dir.display()))
    })?;
    let part_path = part_path.ok_or_else(|| {
        Error::InvalidInstance(format!("no .part file in {}", dir.display()))
    })?;
    let (main, backup) = parse_ltlf_file(&std::fs::read_to_string(&ltlf_path)?)?;
    let partition = parse_partition(&std::fs::read_to_string(&part_path)?)?;
    let expected = match std::fs::read_to_string(dir.join("expected")) {
        Ok(text) => Expected::parse(&text)?,
        Err(_) => Expected::Unknown,
    };
    let name = ltlf_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    Ok(InstanceDescriptor {
        name,
        expected,
        instance: SynthInstance::new(main, backup, partition)?,
    })
}

/// Subdirectories of `root` that contain a `.ltlf` file, sorted by name.
pub fn discover_instances(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let path = entry?.path();
        if !path.is_dir() {
            continue;
        }
        let has_ltlf = std::fs::read_dir(&path)?
            .filter_map(|e| e.ok())
            .any(|e| e.path().extension().is_some_and(|x| x == "ltlf"));
        if has_ltlf {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Seeded random formula over the given atoms (plus the constants), for
/// differential corpora.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: u32, atoms: &[&str]) -> Formula {
    random_formula_from(rng, depth, atoms, true)
}

fn random_formula_from(
    rng: &mut ChaCha8Rng,
    depth: u32,
    atoms: &[&str],
    constants: bool,
) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 5) {
        let extra = if constants { 2 } else { 0 };
        return match rng.gen_range(0..atoms.len() + extra) {
            0 if constants => Formula::True,
            1 if constants => Formula::False,
            i => Formula::atom(atoms[i - extra]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula_from(rng, depth - 1, atoms, constants);
    match rng.gen_range(0..10) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::strong_next(sub(rng)),
        5 => Formula::weak_next(sub(rng)),
        6 => Formula::until(sub(rng), sub(rng)),
        7 => Formula::release(sub(rng), sub(rng)),
        8 => Formula::eventually(sub(rng)),
        _ => Formula::always(sub(rng)),
    }
}

/// Seeded random small instances over one output, one reliable input, and
/// one unreliable input. The main goal may mention the unreliable input.
pub fn random_instances(count: usize, seed: u64) -> Vec<InstanceDescriptor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        // Atom-only leaves: constant subformulas collapse too many instances
        // into trivially (un)realizable ones.
        let main = random_formula_from(&mut rng, 3, &["y", "a", "u"], false);
        let backup = random_formula_from(&mut rng, 3, &["y", "a", "u"], false);
        let partition = Partition::new(
            vec!["y".into()],
            vec!["a".into()],
            vec!["u".into()],
        )
        .expect("fixed partition is valid");
        let instance = SynthInstance::new(main, backup, partition).expect("atoms are declared");
        out.push(InstanceDescriptor {
            name: format!("random_{:02}", out.len()),
            expected: Expected::Unknown,
            instance,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Cross-check harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Timeout,
    Error(String),
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::Timeout => f.write_str("timeout"),
            RunStatus::Error(_) => f.write_str("error"),
        }
    }
}

/// One pipeline's run on one instance.
#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub mode: Mode,
    pub status: RunStatus,
    pub realizable: Option<bool>,
    pub arena_states: usize,
    pub winning_size: usize,
    pub stage_states: Vec<(String, usize)>,
    pub construct_ms: u128,
    pub game_ms: u128,
    pub verify_ms: u128,
    pub wall_ms: u128,
    /// Strategy verification result, when a strategy was extracted.
    pub verified: Option<bool>,
}

/// Differential report for one instance.
#[derive(Debug, Clone)]
pub struct CrossCheckReport {
    pub instance: String,
    pub expected: Expected,
    pub outcomes: Vec<ModeOutcome>,
    /// All successfully completed modes returned the same verdict.
    pub agree: bool,
    /// Verdict matches the expected one (None when expected is unknown or
    /// nothing completed).
    pub matches_expected: Option<bool>,
    /// Every extracted strategy passed verification.
    pub strategies_verified: bool,
}

impl CrossCheckReport {
    /// No disagreement, no verification failure, no expected-verdict
    /// mismatch. Timeouts are recorded but not fatal.
    pub fn ok(&self) -> bool {
        self.agree && self.strategies_verified && self.matches_expected != Some(false)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.agree {
            let verdicts: Vec<String> = self
                .outcomes
                .iter()
                .map(|o| format!("{}={:?}", o.mode, o.realizable))
                .collect();
            out.push(format!(
                "{}: pipelines disagree ({})",
                self.instance,
                verdicts.join(", ")
            ));
        }
        if !self.strategies_verified {
            for o in &self.outcomes {
                if o.verified == Some(false) {
                    out.push(format!(
                        "{}: {} strategy failed verification",
                        self.instance, o.mode
                    ));
                }
            }
        }
        if self.matches_expected == Some(false) {
            out.push(format!(
                "{}: verdict contradicts expected={}",
                self.instance, self.expected
            ));
        }
        for o in &self.outcomes {
            if let RunStatus::Error(e) = &o.status {
                out.push(format!("{}: {} failed: {e}", self.instance, o.mode));
            }
        }
        out
    }
}

/// Runs the selected pipelines on one instance, checks verdict agreement and
/// (for realizable verdicts) verifies each extracted strategy at
/// `horizon = winning-set size`, and records per-stage state counts and
/// timings.
pub fn cross_check(
    desc: &InstanceDescriptor,
    modes: &[Mode],
    limits: &Limits,
) -> CrossCheckReport {
    let inst = &desc.instance;
    // The main-goal DFA is identical in the direct and belief pipelines;
    // compute it once.
    let mut main_log = StageLog::new(false);
    let shared_main = main_dfa(inst, limits, &mut main_log);

    let mut outcomes = Vec::new();
    for &mode in modes {
        let started = Instant::now();
        let mut log = StageLog::new(false);
        let report: Result<SynthReport> = (|| {
            let arena = match (&shared_main, mode) {
                (Ok(main), Mode::Direct) => {
                    log.records.extend(main_log.records.iter().cloned());
                    build_direct_arena_with_main(inst, main, limits, &mut log)?
                }
                (Ok(main), Mode::Belief) => {
                    log.records.extend(main_log.records.iter().cloned());
                    build_belief_arena_with_main(inst, main, limits, &mut log)?
                }
                (Err(_), Mode::Direct | Mode::Belief) => {
                    // Re-run to surface the main-DFA error per mode.
                    return synth(inst, mode, limits, Some(&mut log));
                }
                (_, Mode::Qltlf) => build_qltlf_arena(inst, limits, &mut log)?,
            };
            let game_started = Instant::now();
            let result = crate::error::in_stage(
                crate::error::Stage::Game,
                crate::game::solve_game(&arena, inst.partition()),
            )?;
            let strategy = if result.realizable {
                Some(crate::error::in_stage(
                    crate::error::Stage::Game,
                    crate::game::extract_strategy(&arena, &result, inst.partition()),
                )?)
            } else {
                None
            };
            log.records.push(crate::synth::StageRecord {
                name: "game".into(),
                states: result.winning_size(),
                millis: game_started.elapsed().as_millis(),
                dot: None,
            });
            Ok(SynthReport {
                mode,
                realizable: result.realizable,
                strategy,
                arena_states: arena.state_count(),
                winning_size: result.winning_size(),
            })
        })();

        let construct_ms: u128 = log
            .records
            .iter()
            .filter(|r| r.name != "game")
            .map(|r| r.millis)
            .sum();
        let game_ms: u128 = log
            .records
            .iter()
            .filter(|r| r.name == "game")
            .map(|r| r.millis)
            .sum();
        let stage_states: Vec<(String, usize)> = log
            .records
            .iter()
            .map(|r| (r.name.clone(), r.states))
            .collect();

        let outcome = match report {
            Ok(report) => {
                let verify_started = Instant::now();
                let verified = report.strategy.as_ref().map(|s| {
                    verify_strategy(
                        s,
                        inst.main(),
                        inst.backup(),
                        inst.partition(),
                        report.winning_size.max(1),
                        limits,
                    )
                    .map(|v| matches!(v, Verdict::Pass))
                    .unwrap_or(false)
                });
                let verify_ms = verify_started.elapsed().as_millis();
                ModeOutcome {
                    mode,
                    status: RunStatus::Ok,
                    realizable: Some(report.realizable),
                    arena_states: report.arena_states,
                    winning_size: report.winning_size,
                    stage_states,
                    construct_ms,
                    game_ms,
                    verify_ms,
                    // Accounted total: stage times are measured once even for
                    // stages shared across pipelines, so sum them instead of
                    // reading this mode's wall clock.
                    wall_ms: construct_ms + game_ms + verify_ms,
                    verified,
                }
            }
            Err(e) => ModeOutcome {
                mode,
                status: if e.is_timeout() {
                    RunStatus::Timeout
                } else {
                    RunStatus::Error(e.to_string())
                },
                realizable: None,
                arena_states: 0,
                winning_size: 0,
                stage_states,
                construct_ms,
                game_ms,
                verify_ms: 0,
                wall_ms: started.elapsed().as_millis(),
                verified: None,
            },
        };
        outcomes.push(outcome);
    }

    let verdicts: Vec<bool> = outcomes.iter().filter_map(|o| o.realizable).collect();
    let agree = verdicts.windows(2).all(|w| w[0] == w[1]);
    let matches_expected = match (desc.expected, verdicts.first()) {
        (Expected::Unknown, _) | (_, None) => None,
        (Expected::Realizable, Some(&v)) => Some(v),
        (Expected::Unrealizable, Some(&v)) => Some(!v),
    };
    let strategies_verified = outcomes.iter().all(|o| o.verified != Some(false));
    CrossCheckReport {
        instance: desc.name.clone(),
        expected: desc.expected,
        outcomes,
        agree,
        matches_expected,
        strategies_verified,
    }
}

/// CSV rendering of cross-check reports (schema 1). One row per
/// instance/mode pair; stage states are `name=count` pairs joined by `;`.
pub fn render_csv(reports: &[CrossCheckReport]) -> String {
    let mut out = String::new();
    out.push_str("# schema=1\n");
    out.push_str(
        "instance,mode,status,verdict,expected,arena_states,winning_size,stage_states,construct_ms,game_ms,verify_ms,wall_ms,verified\n",
    );
    for report in reports {
        for o in &report.outcomes {
            let verdict = match o.realizable {
                Some(true) => "realizable",
                Some(false) => "unrealizable",
                None => "",
            };
            let verified = match o.verified {
                Some(true) => "yes",
                Some(false) => "no",
                None => "",
            };
            let stages = o
                .stage_states
                .iter()
                .map(|(n, s)| format!("{n}={s}"))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                report.instance,
                o.mode,
                o.status,
                verdict,
                report.expected,
                o.arena_states,
                o.winning_size,
                stages,
                o.construct_ms,
                o.game_ms,
                o.verify_ms,
                o.wall_ms,
                verified,
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Named trap instances
// ---------------------------------------------------------------------------

/// The bundled trap instances: a plain corridor, a detour where the trap
/// diverts the main-goal edge into the backup region, an unreachable main
/// region, and an 8-vertex maze with two traps.
pub fn named_trap_instance(name: &str) -> Option<(TrapGraph, u32, Vec<u32>, Vec<u32>, Expected)> {
    match name {
        "line4" => Some((
            TrapGraph {
                vertices: 4,
                edges: vec![
                    TrapEdge { src: 0, dst: 1, trap: None },
                    TrapEdge { src: 1, dst: 2, trap: None },
                    TrapEdge { src: 2, dst: 3, trap: None },
                ],
            },
            0,
            vec![3],
            vec![3],
            Expected::Realizable,
        )),
        "detour" => Some((
            TrapGraph {
                vertices: 4,
                edges: vec![
                    TrapEdge { src: 0, dst: 1, trap: Some((0, 2)) },
                    TrapEdge { src: 0, dst: 0, trap: None },
                    TrapEdge { src: 2, dst: 1, trap: None },
                ],
            },
            0,
            vec![1],
            vec![1, 2],
            Expected::Realizable,
        )),
        "blocked" => Some((
            TrapGraph {
                vertices: 3,
                edges: vec![TrapEdge { src: 0, dst: 1, trap: None }],
            },
            0,
            vec![2],
            vec![1],
            Expected::Unrealizable,
        )),
        "maze8" => Some((
            TrapGraph {
                vertices: 8,
                edges: vec![
                    TrapEdge { src: 0, dst: 1, trap: Some((0, 2)) },
                    TrapEdge { src: 0, dst: 3, trap: None },
                    TrapEdge { src: 1, dst: 4, trap: None },
                    TrapEdge { src: 2, dst: 4, trap: Some((1, 5)) },
                    TrapEdge { src: 3, dst: 3, trap: None },
                    TrapEdge { src: 5, dst: 4, trap: None },
                    TrapEdge { src: 6, dst: 6, trap: None },
                    TrapEdge { src: 7, dst: 7, trap: None },
                ],
            },
            0,
            vec![4],
            vec![4, 5],
            Expected::Realizable,
        )),
        _ => None,
    }
}

pub const NAMED_TRAP_INSTANCES: [&str; 4] = ["line4", "detour", "blocked", "maze8"];

/// The bundled desk-scale suite: sheep for 2..=4 (plus gated variants whose
/// verdicts were frozen from the harness), the named trap instances, and
/// hiker trails 4..=8 with and without herbs.
pub fn bundled_instances() -> Vec<InstanceDescriptor> {
    let mut out = Vec::new();
    for n in [2u32, 3, 4] {
        out.push(InstanceDescriptor {
            name: format!("sheep_n{n}"),
            expected: Expected::from_verdict(n % 2 == 0),
            instance: gen_sheep(n, &[], &[], &[1]).expect("valid parameters"),
        });
    }
    // Gated variants: blocking the only pair kills n=2; n=4 routes around it.
    out.push(InstanceDescriptor {
        name: "sheep_n2_d1_2".into(),
        expected: Expected::Unrealizable,
        instance: gen_sheep(2, &[(1, 2)], &[], &[1]).expect("valid parameters"),
    });
    out.push(InstanceDescriptor {
        name: "sheep_n4_d1_2".into(),
        expected: Expected::Realizable,
        instance: gen_sheep(4, &[(1, 2)], &[], &[1]).expect("valid parameters"),
    });
    for name in NAMED_TRAP_INSTANCES {
        let (g, start, main, backup, expected) =
            named_trap_instance(name).expect("bundled name");
        out.push(InstanceDescriptor {
            name: format!("trap_{name}"),
            expected,
            instance: gen_trap(&g, start, &main, &backup).expect("valid parameters"),
        });
    }
    for k in 4..=8u32 {
        for herbs in [true, false] {
            let suffix = if herbs { "herbs" } else { "noherbs" };
            out.push(InstanceDescriptor {
                name: format!("hiker_k{k}_{suffix}"),
                expected: Expected::from_verdict(herbs),
                instance: gen_hiker(k, herbs).expect("valid parameters"),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sheep_rejects_bad_pairs() {
        assert!(gen_sheep(2, &[(1, 3)], &[], &[1]).is_err());
        assert!(gen_sheep(2, &[(1, 1)], &[], &[1]).is_err());
        assert!(gen_sheep(1, &[], &[], &[1]).is_err());
        assert!(gen_sheep(2, &[], &[], &[3]).is_err());
    }

    #[test]
    fn sheep_without_gated_pairs_has_no_unreliable_inputs() {
        let inst = gen_sheep(2, &[], &[], &[1]).unwrap();
        assert!(inst.partition().unreliable_inputs().is_empty());
        assert_eq!(inst.partition().outputs().len(), 2);
    }

    #[test]
    fn sheep_gated_pairs_become_unreliable_inputs() {
        let inst = gen_sheep(3, &[(1, 2)], &[(2, 3)], &[1]).unwrap();
        assert_eq!(
            inst.partition().unreliable_inputs(),
            ["disallow_1_2".to_string(), "disallow_2_3".to_string()]
        );
    }

    #[test]
    fn hiker_requires_a_minimum_trail() {
        assert!(gen_hiker(3, true).is_err());
        assert!(gen_hiker(4, true).is_ok());
    }

    #[test]
    fn trap_graph_parsing_and_validation() {
        let g = parse_trap_graph("0 1\n1 2 0 3\n# comment\n").unwrap();
        assert_eq!(g.vertices, 4);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.edges[1].trap, Some((0, 3)));

        assert!(parse_trap_graph("0 1 2\n").is_err());
        assert!(parse_trap_graph("0 x\n").is_err());
        // out-degree 3
        assert!(parse_trap_graph("0 1\n0 2\n0 3\n").is_err());
    }

    #[test]
    fn named_traps_are_well_formed() {
        for name in NAMED_TRAP_INSTANCES {
            let (g, start, main, backup, _) = named_trap_instance(name).unwrap();
            gen_trap(&g, start, &main, &backup).unwrap();
        }
    }

    #[test]
    fn generator_files_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let desc = InstanceDescriptor {
            name: "hiker_k4".into(),
            expected: Expected::Realizable,
            instance: gen_hiker(4, true).unwrap(),
        };
        write_instance(&dir.path().join("a"), &desc).unwrap();
        write_instance(&dir.path().join("b"), &desc).unwrap();
        for file in ["hiker_k4.ltlf", "hiker_k4.part", "expected"] {
            let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between runs");
        }
        let back = read_instance(&dir.path().join("a")).unwrap();
        assert_eq!(back.name, "hiker_k4");
        assert_eq!(back.expected, Expected::Realizable);
        assert_eq!(back.instance.main(), desc.instance.main());
        assert_eq!(back.instance.backup(), desc.instance.backup());
        assert_eq!(back.instance.partition(), desc.instance.partition());
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_instances(5, 7);
        let b = random_instances(5, 7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.instance.main(), y.instance.main());
            assert_eq!(x.instance.backup(), y.instance.backup());
        }
    }

    #[test]
    fn cross_check_flags_expected_mismatch() {
        // y is realizable; claim it is not.
        let desc = InstanceDescriptor {
            name: "control".into(),
            expected: Expected::Unrealizable,
            instance: SynthInstance::new(
                Formula::atom("y"),
                Formula::True,
                Partition::new(vec!["y".into()], vec!["x".into()], vec![]).unwrap(),
            )
            .unwrap(),
        };
        let report = cross_check(&desc, &Mode::ALL, &Limits::default());
        assert!(report.agree);
        assert_eq!(report.matches_expected, Some(false));
        assert!(!report.ok());
        assert!(!report.problems().is_empty());
    }

    #[test]
    fn csv_has_schema_header_and_rows() {
        let desc = InstanceDescriptor {
            name: "control".into(),
            expected: Expected::Realizable,
            instance: SynthInstance::new(
                Formula::atom("y"),
                Formula::True,
                Partition::new(vec!["y".into()], vec!["x".into()], vec![]).unwrap(),
            )
            .unwrap(),
        };
        let report = cross_check(&desc, &Mode::ALL, &Limits::default());
        assert!(report.ok());
        let csv = render_csv(&[report]);
        assert!(csv.starts_with("# schema=1\n"));
        assert!(csv.lines().nth(1).unwrap().starts_with("instance,mode,"));
        assert_eq!(csv.lines().count(), 2 + 3);
        assert!(csv.contains("control,direct,ok,realizable"));
        assert!(csv.contains("game="));
    }
}
