//! DFA reachability games with output-first move order, and strategy
//! extraction.
//!
//! In every round the agent commits its outputs before the environment
//! reveals its inputs, so the controllable predecessor is the EXISTS-outputs
//! FORALL-inputs step. A play is won when the arena reaches a final state
//! after at least one round; the initial state being final does not help,
//! because traces are nonempty.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automata::Dfa;
use crate::error::{Error, Result};
use crate::logic::{Letter, Partition};

pub const NO_RANK: u32 = u32::MAX;

/// Result of solving a reachability game.
#[derive(Debug, Clone)]
pub struct GameResult {
    /// Winning arena states (the least fixpoint of the controllable
    /// predecessor over the final states).
    pub winning: Vec<bool>,
    /// Fixpoint round at which each state entered the winning set; final
    /// states have rank 0, non-winning states [`NO_RANK`].
    pub rank: Vec<u32>,
    /// Whether the agent can force a win from the initial state in at least
    /// one round.
    pub realizable: bool,
}

impl GameResult {
    pub fn winning_size(&self) -> usize {
        self.winning.iter().filter(|w| **w).count()
    }
}

fn check_arena(arena: &Dfa, p: &Partition) -> Result<()> {
    if arena.width() != p.width() {
        return Err(Error::WidthMismatch {
            left: arena.width(),
            right: p.width(),
        });
    }
    Ok(())
}

/// Does `s` have an output assignment that moves into `target` for every
/// input assignment?
fn forced_into(arena: &Dfa, p: &Partition, target: &[bool], s: u32) -> bool {
    witness_output(arena, p, target, s).is_some()
}

/// The lexicographically smallest output assignment from `s` whose successors
/// all lie in `target`, if any.
fn witness_output(arena: &Dfa, p: &Partition, target: &[bool], s: u32) -> Option<u32> {
    let outputs = 1u32 << p.output_width();
    let inputs = 1u32 << p.input_width();
    (0..outputs).find(|&y| {
        (0..inputs).all(|x| target[arena.step(s, Letter(p.combine(y, x))) as usize])
    })
}

/// Solves the reachability game on `arena`: least fixpoint of the
/// exists-output/forall-input predecessor over the final states.
pub fn solve_game(arena: &Dfa, p: &Partition) -> Result<GameResult> {
    check_arena(arena, p)?;
    let n = arena.state_count();
    let mut winning: Vec<bool> = arena.finals().to_vec();
    let mut rank: Vec<u32> = arena
        .finals()
        .iter()
        .map(|&f| if f { 0 } else { NO_RANK })
        .collect();

    let mut round = 0u32;
    loop {
        round += 1;
        let snapshot = winning.clone();
        let mut changed = false;
        for s in 0..n as u32 {
            if !winning[s as usize] && forced_into(arena, p, &snapshot, s) {
                winning[s as usize] = true;
                rank[s as usize] = round;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Nonempty traces: the agent must win in at least one round, so the
    // initial state must be a controllable predecessor of the winning set.
    let realizable = forced_into(arena, p, &winning, arena.initial());
    Ok(GameResult {
        winning,
        rank,
        realizable,
    })
}

/// A finite-state strategy machine.
///
/// State 0 is the initial machine state. Each round the machine emits
/// `output(m)` (bits in output order), the environment answers with an input
/// assignment `x`, and the machine moves to `step(m, x)`. `stop(m)` reports
/// that every play reaching `m` has already satisfied the objective, at which
/// point the agent declares the trace complete.
#[derive(Debug, Clone)]
pub struct Strategy {
    output_width: usize,
    input_width: usize,
    outputs: Vec<u32>,
    stops: Vec<bool>,
    /// next[m][x] -> machine state
    next: Vec<Vec<u32>>,
}

impl Strategy {
    /// Builds a strategy machine from explicit tables (state 0 is initial).
    /// `next` rows must cover every input assignment.
    pub fn from_parts(
        output_width: usize,
        input_width: usize,
        outputs: Vec<u32>,
        stops: Vec<bool>,
        next: Vec<Vec<u32>>,
    ) -> Result<Strategy> {
        let n = outputs.len();
        if stops.len() != n || next.len() != n || n == 0 {
            return Err(Error::InvalidInstance(
                "strategy tables have inconsistent lengths".into(),
            ));
        }
        for row in &next {
            if row.len() != 1 << input_width || row.iter().any(|&m| m as usize >= n) {
                return Err(Error::InvalidInstance(
                    "strategy transition rows must cover every input assignment".into(),
                ));
            }
        }
        if outputs.iter().any(|&y| y as u64 >= 1u64 << output_width) {
            return Err(Error::InvalidInstance(
                "strategy output out of range".into(),
            ));
        }
        Ok(Strategy {
            output_width,
            input_width,
            outputs,
            stops,
            next,
        })
    }

    pub fn state_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn output_width(&self) -> usize {
        self.output_width
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn initial(&self) -> u32 {
        0
    }

    /// Output assignment emitted in machine state `m`.
    pub fn output(&self, m: u32) -> u32 {
        self.outputs[m as usize]
    }

    pub fn stop(&self, m: u32) -> bool {
        self.stops[m as usize]
    }

    pub fn step(&self, m: u32, inputs: u32) -> u32 {
        self.next[m as usize][inputs as usize]
    }

    /// Graphviz rendering: outputs on nodes, input assignments on edges, stop
    /// states double-circled.
    pub fn to_dot(&self, p: &Partition) -> String {
        let mut out = String::new();
        writeln!(out, "digraph strategy {{").unwrap();
        writeln!(out, "  rankdir=LR;").unwrap();
        writeln!(out, "  init [shape=point];").unwrap();
        for m in 0..self.state_count() {
            let shape = if self.stops[m] { "doublecircle" } else { "box" };
            let label: Vec<String> = p
                .outputs()
                .iter()
                .enumerate()
                .map(|(i, name)| format!("{name}={}", self.outputs[m] >> i & 1))
                .collect();
            writeln!(
                out,
                "  m{m} [shape={shape},label=\"m{m}\\n{}\"];",
                label.join(" ")
            )
            .unwrap();
        }
        writeln!(out, "  init -> m0;").unwrap();
        let input_names: Vec<&str> = p.inputs().collect();
        for m in 0..self.state_count() {
            if self.stops[m] {
                continue;
            }
            let mut by_target: HashMap<u32, Vec<String>> = HashMap::new();
            for x in 0..(1u32 << self.input_width) {
                let label: Vec<String> = input_names
                    .iter()
                    .enumerate()
                    .map(|(i, name)| format!("{name}={}", x >> i & 1))
                    .collect();
                by_target
                    .entry(self.next[m][x as usize])
                    .or_default()
                    .push(label.join(" "));
            }
            let mut targets: Vec<(u32, Vec<String>)> = by_target.into_iter().collect();
            targets.sort_by_key(|(t, _)| *t);
            for (t, labels) in targets {
                let label = if labels.len() == 1usize << self.input_width {
                    "*".to_string()
                } else {
                    labels.join("\\n")
                };
                writeln!(out, "  m{m} -> m{t} [label=\"{label}\"];").unwrap();
            }
        }
        writeln!(out, "}}").unwrap();
        out
    }
}

/// Extracts a winning strategy from a solved game.
///
/// Machine states correspond to winning arena states (plus a distinguished
/// start state); the chosen output minimizes the worst-case successor rank,
/// ties broken by the lexicographically smallest output bit pattern. Plays
/// stop exactly when the arena state is final, which every play reaches
/// within `winning-set size` rounds.
pub fn extract_strategy(arena: &Dfa, r: &GameResult, p: &Partition) -> Result<Strategy> {
    check_arena(arena, p)?;
    if !r.realizable {
        return Err(Error::NotRealizable);
    }
    let outputs_n = 1u32 << p.output_width();
    let inputs_n = 1u32 << p.input_width();

    // Best output for an arena state: minimize the maximal successor rank,
    // then the output bits. Successor ranks of NO_RANK only survive for
    // stop states, which never step.
    let best_output = |s: u32| -> (u32, u32) {
        let mut best: Option<(u32, u32)> = None;
        for y in 0..outputs_n {
            let worst = (0..inputs_n)
                .map(|x| r.rank[arena.step(s, Letter(p.combine(y, x))) as usize])
                .max()
                .unwrap_or(0);
            if best.map_or(true, |(w, _)| worst < w) {
                best = Some((worst, y));
            }
        }
        let (worst, y) = best.expect("at least one output assignment exists");
        (y, worst)
    };

    // Machine states: (arena state, started). The start state is separate so
    // that an initial arena state that happens to be final does not stop the
    // play before the first round.
    let mut ids: HashMap<(u32, bool), u32> = HashMap::new();
    let mut states: Vec<(u32, bool)> = vec![(arena.initial(), false)];
    ids.insert(states[0], 0);
    let mut outputs = Vec::new();
    let mut stops = Vec::new();
    let mut next = Vec::new();

    let mut i = 0;
    while i < states.len() {
        let (s, started) = states[i];
        let stop = started && arena.is_final(s);
        let (y, worst) = best_output(s);
        if !stop {
            // Rank decrease: the chosen output forces a strictly smaller rank
            // for every input reply (final states count as rank 0). A start
            // state that is itself final only needs to stay in the winning set.
            let here = r.rank[s as usize];
            if here == 0 {
                assert!(worst != NO_RANK, "start output leaves the winning set");
            } else {
                assert!(
                    worst < here,
                    "chosen output does not decrease rank at state {s}"
                );
            }
        }
        outputs.push(y);
        stops.push(stop);
        let row: Vec<u32> = if stop {
            // Stop states end the play; keep the machine total with self loops.
            vec![i as u32; inputs_n as usize]
        } else {
            (0..inputs_n)
                .map(|x| {
                    let succ = arena.step(s, Letter(p.combine(y, x)));
                    let key = (succ, true);
                    *ids.entry(key).or_insert_with(|| {
                        states.push(key);
                        (states.len() - 1) as u32
                    })
                })
                .collect()
        };
        next.push(row);
        i += 1;
    }

    Ok(Strategy {
        output_width: p.output_width(),
        input_width: p.input_width(),
        outputs,
        stops,
        next,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::ltlf_to_dfa;
    use crate::error::Limits;
    use crate::logic::{parse_ltlf, parse_partition};

    fn solve(main: &str, part: &str) -> (Dfa, GameResult, Partition) {
        let p = parse_partition(part).unwrap();
        let f = parse_ltlf(main).unwrap();
        let arena = ltlf_to_dfa(&f, &p.props().unwrap(), &Limits::default()).unwrap();
        let r = solve_game(&arena, &p).unwrap();
        (arena, r, p)
    }

    #[test]
    fn agent_controlled_atom_is_realizable() {
        let (arena, r, p) = solve("y", ".inputs: x\n.outputs: y");
        assert!(r.realizable);
        let s = extract_strategy(&arena, &r, &p).unwrap();
        // Round 1 outputs y=1 and stops right after.
        assert_eq!(s.output(0) & 1, 1);
        for x in 0..2 {
            assert!(s.stop(s.step(0, x)));
        }
    }

    #[test]
    fn environment_controlled_eventuality_is_unrealizable() {
        let (_, r, _) = solve("F x", ".inputs: x\n.outputs: y");
        assert!(!r.realizable);
    }

    #[test]
    fn trivial_goal_is_realizable_in_one_round() {
        let (arena, r, p) = solve("true", ".inputs: x\n.outputs: y");
        assert!(r.realizable);
        let s = extract_strategy(&arena, &r, &p).unwrap();
        for x in 0..2 {
            assert!(s.stop(s.step(0, x)));
        }
    }

    #[test]
    fn strong_next_forces_a_second_round() {
        let (arena, r, p) = solve("N y", ".inputs: x\n.outputs: y");
        assert!(r.realizable);
        let s = extract_strategy(&arena, &r, &p).unwrap();
        for x1 in 0..2 {
            let m1 = s.step(0, x1);
            assert!(!s.stop(m1), "stopped after one round");
            for x2 in 0..2 {
                assert!(s.stop(s.step(m1, x2)), "not stopped after two rounds");
            }
        }
    }

    #[test]
    fn initial_final_state_does_not_make_empty_play_win() {
        // G !y from an arena standpoint: the initial state may be "final"
        // for the empty word in spirit, but a round must still be played.
        let (_, r, _) = solve("G !x", ".inputs: x\n.outputs: y");
        // The environment can set x in round one, so this is unrealizable.
        assert!(!r.realizable);
    }

    #[test]
    fn tie_break_picks_smallest_output() {
        // Both outputs win immediately; the strategy must pick y=0 pattern
        // lexicographically (all bits 0).
        let (arena, r, p) = solve("y | !y", ".inputs: x\n.outputs: y");
        let s = extract_strategy(&arena, &r, &p).unwrap();
        assert_eq!(s.output(0), 0);
    }

    #[test]
    fn unrealizable_extraction_is_an_error() {
        let (arena, r, p) = solve("F x", ".inputs: x\n.outputs: y");
        assert!(matches!(
            extract_strategy(&arena, &r, &p),
            Err(Error::NotRealizable)
        ));
    }

    #[test]
    fn ranks_are_zero_exactly_on_finals() {
        let (arena, r, _) = solve("N y", ".inputs: x\n.outputs: y");
        for s in 0..arena.state_count() {
            assert_eq!(r.rank[s] == 0, arena.is_final(s as u32));
        }
    }

    #[test]
    fn strategy_dot_mentions_outputs_and_stops() {
        let (arena, r, p) = solve("y", ".inputs: x\n.outputs: y");
        let s = extract_strategy(&arena, &r, &p).unwrap();
        let dot = s.to_dot(&p);
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("y=1"));
    }
}
