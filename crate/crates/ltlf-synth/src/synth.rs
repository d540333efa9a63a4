//! The three arena constructions and the top-level synthesis entry point.
//!
//! All three pipelines produce a DFA over the global proposition order whose
//! language is exactly the set of traces that satisfy the main goal and whose
//! every unreliable-input rewriting satisfies the backup goal. Solving the
//! reachability game on any of them answers realizability; the cross-check
//! harness runs them against each other.

use std::time::Instant;

use crate::automata::{complement, determinize, dfa_to_dot, exist_abstract, product, Dfa};
use crate::compile::ltlf_to_dfa;
use crate::error::{in_stage, Error, Limits, Result, Stage};
use crate::game::{extract_strategy, solve_game, Strategy};
use crate::logic::{to_pnf, Formula, Letter, Partition, Props, QFormula, Qltlf};
use crate::qltlf::qltlf_to_dfa;

/// A synthesis problem: main goal, backup goal, and the variable partition.
#[derive(Debug, Clone)]
pub struct SynthInstance {
    main: Formula,
    backup: Formula,
    partition: Partition,
}

impl SynthInstance {
    pub fn new(main: Formula, backup: Formula, partition: Partition) -> Result<SynthInstance> {
        let props = partition.props()?;
        for atom in main.atoms().union(&backup.atoms()) {
            if !props.contains(atom) {
                return Err(Error::InvalidInstance(format!(
                    "formula atom `{atom}` is not declared in the partition"
                )));
            }
        }
        Ok(SynthInstance {
            main,
            backup,
            partition,
        })
    }

    pub fn main(&self) -> &Formula {
        &self.main
    }

    pub fn backup(&self) -> &Formula {
        &self.backup
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn props(&self) -> Props {
        self.partition.props().expect("validated at construction")
    }

    /// The quantified reduction `main ∧ ∀U1...∀Un. backup` in prenex form.
    /// Quantified variables that also occur in the main goal are renamed
    /// apart, so the prefix may bind fresh copies of unreliable inputs.
    pub fn qltlf_reduction(&self) -> Result<QFormula> {
        let mut backup: Qltlf = self.backup.clone().into();
        for u in self.partition.unreliable_inputs().iter().rev() {
            backup = Qltlf::forall(u.clone(), backup);
        }
        let nested = Qltlf::and(self.main.clone().into(), backup);
        to_pnf(&nested)
    }
}

/// Pipeline selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Direct,
    Belief,
    Qltlf,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Direct, Mode::Belief, Mode::Qltlf];
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Direct => "direct",
            Mode::Belief => "belief",
            Mode::Qltlf => "qltlf",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "direct" => Ok(Mode::Direct),
            "belief" => Ok(Mode::Belief),
            "qltlf" => Ok(Mode::Qltlf),
            other => Err(Error::InvalidInstance(format!(
                "unknown mode `{other}` (expected direct, belief, or qltlf)"
            ))),
        }
    }
}

/// One pipeline stage, for diagnostics and the benchmark CSV.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub name: String,
    pub states: usize,
    pub millis: u128,
    /// DOT rendering of the stage output when dumps are enabled.
    pub dot: Option<String>,
}

/// Collects per-stage state counts, wall times, and optional DOT dumps.
#[derive(Debug, Default)]
pub struct StageLog {
    pub emit_dot: bool,
    pub records: Vec<StageRecord>,
}

impl StageLog {
    pub fn new(emit_dot: bool) -> StageLog {
        StageLog {
            emit_dot,
            records: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, states: usize, started: Instant, dot: Option<String>) {
        self.records.push(StageRecord {
            name: name.to_string(),
            states,
            millis: started.elapsed().as_millis(),
            dot,
        });
    }

    fn push_dfa(&mut self, name: &str, d: &Dfa, props: &Props, started: Instant) {
        let dot = self.emit_dot.then(|| dfa_to_dot(d, props));
        self.push(name, d.state_count(), started, dot);
    }
}

/// DFA for the main goal (shared by the direct and belief pipelines).
pub fn main_dfa(inst: &SynthInstance, limits: &Limits, log: &mut StageLog) -> Result<Dfa> {
    let props = inst.props();
    let started = Instant::now();
    let d = in_stage(Stage::DfaMain, ltlf_to_dfa(&inst.main, &props, limits))?;
    log.push_dfa("dfa-main", &d, &props, started);
    Ok(d)
}

/// The backup factor of the direct pipeline: complement of the determinized
/// existential abstraction of the automaton for the negated backup goal.
/// Accepts a trace iff all rewritings of its unreliable inputs satisfy the
/// backup goal.
pub fn backup_factor_direct(
    inst: &SynthInstance,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let props = inst.props();
    let p = &inst.partition;

    let started = Instant::now();
    let negated = in_stage(
        Stage::DfaBackup,
        ltlf_to_dfa(&Formula::not(inst.backup.clone()), &props, limits),
    )?;
    log.push_dfa("dfa-backup-negated", &negated, &props, started);

    let started = Instant::now();
    let abstracted = in_stage(
        Stage::Abstraction,
        exist_abstract(&negated.to_nfa(), p.unreliable_mask(), limits),
    )?;
    log.push(
        "abstraction",
        abstracted.state_count(),
        started,
        self::nfa_dot_if(log.emit_dot, &abstracted, &props),
    );

    let started = Instant::now();
    let det = in_stage(Stage::Determinize, determinize(&abstracted, limits))?;
    let factor = complement(&det);
    log.push_dfa("determinize-complement", &factor, &props, started);
    Ok(factor)
}

fn nfa_dot_if(emit: bool, n: &crate::automata::Nfa, props: &Props) -> Option<String> {
    emit.then(|| crate::automata::nfa_to_dot(n, props))
}

/// Belief-state construction over a backup DFA: states are the sets of
/// automaton states consistent with the reliable inputs read so far; a belief
/// is final iff all members are final. Accepts a trace iff all rewritings of
/// its unreliable inputs are accepted by `d`.
pub fn belief_construct(d: &Dfa, p: &Partition, limits: &Limits) -> Result<Dfa> {
    if d.width() != p.width() {
        return Err(Error::WidthMismatch {
            left: d.width(),
            right: p.width(),
        });
    }
    let letters = d.letter_count();
    let unr = p.unreliable_mask();
    let blocks = d.state_count().div_ceil(64);

    let mut ids: std::collections::HashMap<Vec<u64>, u32> = std::collections::HashMap::new();
    let mut beliefs: Vec<Vec<u64>> = Vec::new();
    let mut start = vec![0u64; blocks];
    start[(d.initial() / 64) as usize] |= 1u64 << (d.initial() % 64);
    ids.insert(start.clone(), 0);
    beliefs.push(start);

    let all_final = |set: &[u64]| -> bool {
        for (b, word) in set.iter().enumerate() {
            let mut w = *word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                if !d.is_final((b * 64 + bit) as u32) {
                    return false;
                }
            }
        }
        true
    };

    let mut trans: Vec<Vec<u32>> = Vec::new();
    let mut finals: Vec<bool> = Vec::new();
    let mut i = 0;
    while i < beliefs.len() {
        limits.check_deadline()?;
        let current = beliefs[i].clone();
        finals.push(all_final(&current));
        let mut row = Vec::with_capacity(letters);
        for a in 0..letters as u32 {
            let mut next = vec![0u64; blocks];
            for (b, word) in current.iter().enumerate() {
                let mut w = *word;
                while w != 0 {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    let s = (b * 64 + bit) as u32;
                    // Step under every rewriting of the unreliable bits.
                    let base = a & !unr;
                    let mut sub = unr;
                    loop {
                        let succ = d.step(s, Letter(base | sub));
                        next[(succ / 64) as usize] |= 1u64 << (succ % 64);
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & unr;
                    }
                }
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if beliefs.len() >= limits.subset_limit {
                        return Err(Error::StateLimit {
                            limit: limits.subset_limit,
                        });
                    }
                    let id = beliefs.len() as u32;
                    ids.insert(next.clone(), id);
                    beliefs.push(next);
                    id
                }
            };
            row.push(id);
        }
        trans.push(row);
        i += 1;
    }
    Dfa::new(d.width(), 0, finals, trans)
}

/// Belief-pipeline backup factor.
pub fn backup_factor_belief(
    inst: &SynthInstance,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let props = inst.props();
    let started = Instant::now();
    let backup = in_stage(
        Stage::DfaBackup,
        ltlf_to_dfa(&inst.backup, &props, limits),
    )?;
    log.push_dfa("dfa-backup", &backup, &props, started);

    let started = Instant::now();
    let belief = in_stage(
        Stage::Belief,
        belief_construct(&backup, &inst.partition, limits),
    )?;
    log.push_dfa("belief", &belief, &props, started);
    Ok(belief)
}

fn arena_product(
    main: &Dfa,
    factor: &Dfa,
    props: &Props,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let started = Instant::now();
    let arena = in_stage(Stage::Product, product(main, factor, limits))?;
    log.push_dfa("arena", &arena, props, started);
    Ok(arena)
}

/// Direct pipeline arena.
pub fn build_direct_arena(
    inst: &SynthInstance,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let main = main_dfa(inst, limits, log)?;
    build_direct_arena_with_main(inst, &main, limits, log)
}

/// Direct pipeline arena with a precomputed main DFA (the main factor is
/// shared across pipelines by the cross-check harness).
pub fn build_direct_arena_with_main(
    inst: &SynthInstance,
    main: &Dfa,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let factor = backup_factor_direct(inst, limits, log)?;
    arena_product(main, &factor, &inst.props(), limits, log)
}

/// Belief pipeline arena.
pub fn build_belief_arena(
    inst: &SynthInstance,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let main = main_dfa(inst, limits, log)?;
    build_belief_arena_with_main(inst, &main, limits, log)
}

/// Belief pipeline arena with a precomputed main DFA.
pub fn build_belief_arena_with_main(
    inst: &SynthInstance,
    main: &Dfa,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let factor = backup_factor_belief(inst, limits, log)?;
    arena_product(main, &factor, &inst.props(), limits, log)
}

/// Quantified pipeline arena: compiles the prenex reduction
/// `main ∧ ∀U1...∀Un. backup` and drops any renamed-apart quantified copies
/// from the alphabet afterwards (their bits do not affect the language).
pub fn build_qltlf_arena(
    inst: &SynthInstance,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    let props = inst.props();
    let qf = inst.qltlf_reduction()?;
    let extra: Vec<String> = qf
        .prefix()
        .iter()
        .map(|(_, v)| v.clone())
        .filter(|v| !props.contains(v))
        .collect();
    let ext_props = props.extended(extra.clone())?;
    in_stage(Stage::Qltlf, limits.check_width(ext_props.width()))?;

    let started = Instant::now();
    let wide = in_stage(Stage::Qltlf, qltlf_to_dfa(&qf, &ext_props, limits))?;
    log.push_dfa("qltlf", &wide, &ext_props, started);

    if extra.is_empty() {
        return Ok(wide);
    }
    let started = Instant::now();
    let arena = in_stage(Stage::Qltlf, wide.restrict_width(props.width()))?;
    log.push_dfa("arena", &arena, &props, started);
    Ok(arena)
}

/// Builds the arena for the selected pipeline.
pub fn build_arena(
    inst: &SynthInstance,
    mode: Mode,
    limits: &Limits,
    log: &mut StageLog,
) -> Result<Dfa> {
    match mode {
        Mode::Direct => build_direct_arena(inst, limits, log),
        Mode::Belief => build_belief_arena(inst, limits, log),
        Mode::Qltlf => build_qltlf_arena(inst, limits, log),
    }
}

/// Outcome of one synthesis run.
#[derive(Debug, Clone)]
pub struct SynthReport {
    pub mode: Mode,
    pub realizable: bool,
    pub strategy: Option<Strategy>,
    pub arena_states: usize,
    /// Size of the winning set (used as the default verification horizon).
    pub winning_size: usize,
}

/// Decides realizability with the chosen pipeline and extracts a winning
/// strategy when the instance is realizable.
pub fn synth(
    inst: &SynthInstance,
    mode: Mode,
    limits: &Limits,
    log: Option<&mut StageLog>,
) -> Result<SynthReport> {
    let mut scratch = StageLog::new(false);
    let log = log.unwrap_or(&mut scratch);
    let arena = build_arena(inst, mode, limits, log)?;
    let started = Instant::now();
    let result = in_stage(Stage::Game, solve_game(&arena, &inst.partition))?;
    let strategy = if result.realizable {
        Some(in_stage(
            Stage::Game,
            extract_strategy(&arena, &result, &inst.partition),
        )?)
    } else {
        None
    };
    log.push("game", result.winning_size(), started, None);
    Ok(SynthReport {
        mode,
        realizable: result.realizable,
        strategy,
        arena_states: arena.state_count(),
        winning_size: result.winning_size(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{all_traces, parse_ltlf, parse_partition};

    fn instance(main: &str, backup: &str, part: &str) -> SynthInstance {
        SynthInstance::new(
            parse_ltlf(main).unwrap(),
            parse_ltlf(backup).unwrap(),
            parse_partition(part).unwrap(),
        )
        .unwrap()
    }

    fn languages_equal(a: &Dfa, b: &Dfa, width: usize, max_len: usize) -> bool {
        for len in 1..=max_len {
            for t in all_traces(width, len) {
                if a.accepts(&t).unwrap() != b.accepts(&t).unwrap() {
                    return false;
                }
            }
        }
        true
    }

    const PART_YU: &str = ".inputs: u\n.outputs: y\n.unobservables: u";

    #[test]
    fn direct_arena_of_trivial_goals_is_universal() {
        let inst = instance("true", "true", PART_YU);
        let limits = Limits::default();
        let arena = build_direct_arena(&inst, &limits, &mut StageLog::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert!(arena.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn direct_arena_of_contradictory_backup_is_empty() {
        let inst = instance("true", "y <-> u", PART_YU);
        let limits = Limits::default();
        let arena = build_direct_arena(&inst, &limits, &mut StageLog::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert!(!arena.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn direct_arena_checks_first_letter_outputs() {
        let inst = instance("y", "y", PART_YU);
        let limits = Limits::default();
        let arena = build_direct_arena(&inst, &limits, &mut StageLog::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert_eq!(arena.accepts(&t).unwrap(), t.letters()[0].contains(0));
            }
        }
    }

    #[test]
    fn belief_with_no_unreliable_inputs_tracks_the_dfa() {
        let p = parse_partition(".inputs: u\n.outputs: y").unwrap();
        let props = p.props().unwrap();
        let limits = Limits::default();
        let d = ltlf_to_dfa(&parse_ltlf("y U u").unwrap(), &props, &limits).unwrap();
        let b = belief_construct(&d, &p, &limits).unwrap();
        assert!(languages_equal(&d, &b, 2, 3));
    }

    #[test]
    fn belief_of_contradiction_rejects_everything() {
        let p = parse_partition(PART_YU).unwrap();
        let props = p.props().unwrap();
        let limits = Limits::default();
        let d = ltlf_to_dfa(&parse_ltlf("y <-> u").unwrap(), &props, &limits).unwrap();
        let b = belief_construct(&d, &p, &limits).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert!(!b.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn belief_of_universal_dfa_is_universal() {
        let p = parse_partition(PART_YU).unwrap();
        let props = p.props().unwrap();
        let limits = Limits::default();
        let d = ltlf_to_dfa(&parse_ltlf("true").unwrap(), &props, &limits).unwrap();
        let b = belief_construct(&d, &p, &limits).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert!(b.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn the_three_arenas_agree_on_small_instances() {
        let limits = Limits::default();
        let cases = [
            ("true", "y <-> u", PART_YU),
            ("y", "y", PART_YU),
            ("F y", "G (u -> y)", PART_YU),
            // main mentions the unreliable input: exercises the renaming in
            // the quantified reduction
            ("(u -> X y) & (!u -> X !y)", "true", PART_YU),
            ("F u", "y U u", PART_YU),
        ];
        for (main, backup, part) in cases {
            let inst = instance(main, backup, part);
            let direct = build_direct_arena(&inst, &limits, &mut StageLog::default()).unwrap();
            let belief = build_belief_arena(&inst, &limits, &mut StageLog::default()).unwrap();
            let quant = build_qltlf_arena(&inst, &limits, &mut StageLog::default()).unwrap();
            assert!(
                languages_equal(&direct, &belief, 2, 3),
                "direct vs belief on {main} / {backup}"
            );
            assert!(
                languages_equal(&direct, &quant, 2, 3),
                "direct vs qltlf on {main} / {backup}"
            );
        }
    }

    #[test]
    fn qltlf_arena_without_unreliable_inputs_is_the_conjunction() {
        let inst = instance("F y", "G y", ".inputs: u\n.outputs: y");
        let limits = Limits::default();
        let arena = build_qltlf_arena(&inst, &limits, &mut StageLog::default()).unwrap();
        let both = ltlf_to_dfa(
            &Formula::and(inst.main.clone(), inst.backup.clone()),
            &inst.props(),
            &limits,
        )
        .unwrap();
        assert!(languages_equal(&arena, &both, 2, 3));
    }

    #[test]
    fn qltlf_arena_of_unavoidable_violation_is_empty() {
        let inst = instance("true", "G !u", PART_YU);
        let limits = Limits::default();
        let arena = build_qltlf_arena(&inst, &limits, &mut StageLog::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert!(!arena.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn synth_degenerates_to_plain_synthesis() {
        let limits = Limits::default();
        // backup = true and no unreliable inputs: plain synthesis of main.
        let realizable = instance("F y", "true", ".inputs: x\n.outputs: y");
        let unrealizable = instance("F x", "true", ".inputs: x\n.outputs: y");
        for mode in Mode::ALL {
            assert!(synth(&realizable, mode, &limits, None).unwrap().realizable);
            assert!(!synth(&unrealizable, mode, &limits, None).unwrap().realizable);
        }
    }

    #[test]
    fn synth_names_the_failing_stage() {
        let inst = instance("F y", "G (u -> y)", PART_YU);
        let limits = Limits {
            state_limit: 1,
            ..Limits::default()
        };
        let err = synth(&inst, Mode::Direct, &limits, None).unwrap_err();
        assert_eq!(err.stage(), Some(Stage::DfaMain));
    }

    #[test]
    fn instance_atoms_must_be_declared() {
        let r = SynthInstance::new(
            parse_ltlf("q").unwrap(),
            Formula::True,
            parse_partition(".inputs: u\n.outputs: y").unwrap(),
        );
        assert!(matches!(r, Err(Error::InvalidInstance(_))));
    }
}
