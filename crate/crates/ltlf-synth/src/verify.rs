//! Exhaustive strategy verification against the problem definition: for every
//! environment behavior, the play the strategy induces must stop at some
//! round `k` such that the trace so far satisfies the main goal and every
//! rewriting of its unreliable inputs satisfies the backup goal (both at the
//! same `k`).
//!
//! Two implementations are provided. [`verify_strategy_enumerative`] walks
//! every environment sequence explicitly and checks the stopped prefix with
//! the trace evaluator and `expand_unreliable`; it is the definition
//! transcribed into code, and exponential in `inputs x horizon`.
//! [`verify_strategy`] explores the same play tree but merges plays that
//! agree on (machine state, main residual, set of backup residuals across
//! all rewritings); progression soundness makes the two verdicts equal,
//! which the tests check, and the quotient stays polynomial in the number of
//! distinct residual combinations.

use std::collections::HashMap;

use crate::compile::Arena;
use crate::error::{Error, Limits, Result};
use crate::game::Strategy;
use crate::logic::trace::expand_unreliable_mask;
use crate::logic::{Evaluator, Formula, Letter, Partition, Trace};

/// Why verification failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureKind {
    /// The stopped prefix does not satisfy the main goal.
    MainViolated,
    /// Some rewriting of the unreliable inputs of the stopped prefix does not
    /// satisfy the backup goal.
    BackupViolated,
    /// Some play does not stop within the horizon.
    NoStopWithinHorizon,
}

/// A counterexample: the lexicographically first offending environment input
/// sequence (one input assignment per round).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub kind: FailureKind,
    pub inputs: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(VerifyFailure),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

fn check_strategy_shape(s: &Strategy, p: &Partition) -> Result<()> {
    if s.output_width() != p.output_width() || s.input_width() != p.input_width() {
        return Err(Error::WidthMismatch {
            left: s.output_width() + s.input_width(),
            right: p.width(),
        });
    }
    Ok(())
}

/// Spec-by-the-letter verifier: enumerates all environment sequences up to
/// `horizon`, runs the strategy, and checks the two conditions on the stopped
/// prefix with the trace evaluator and the expansion of unreliable inputs.
///
/// Requires `input_width * horizon` to fit in the enumeration cap.
pub fn verify_strategy_enumerative(
    s: &Strategy,
    main: &Formula,
    backup: &Formula,
    p: &Partition,
    horizon: usize,
    limits: &Limits,
) -> Result<Verdict> {
    check_strategy_shape(s, p)?;
    let need = (p.input_width() * horizon) as u32;
    limits.check_enum_bits(need)?;
    let props = p.props()?;
    let main_eval = Evaluator::new(&props, main)?;
    let backup_eval = Evaluator::new(&props, backup)?;
    let unr_mask = p.unreliable_mask();
    let inputs_n = 1u32 << p.input_width();

    struct Ctx<'a> {
        s: &'a Strategy,
        p: &'a Partition,
        main_eval: &'a Evaluator,
        backup_eval: &'a Evaluator,
        unr_mask: u32,
        inputs_n: u32,
        horizon: usize,
        limits: &'a Limits,
    }

    fn rec(
        ctx: &Ctx,
        m: u32,
        letters: &mut Vec<Letter>,
        inputs: &mut Vec<u32>,
    ) -> Result<Option<VerifyFailure>> {
        ctx.limits.check_deadline()?;
        for x in 0..ctx.inputs_n {
            let letter = Letter(ctx.p.combine(ctx.s.output(m), x));
            let m2 = ctx.s.step(m, x);
            letters.push(letter);
            inputs.push(x);
            let fail = if ctx.s.stop(m2) {
                if letters.len() > ctx.horizon {
                    Some(FailureKind::NoStopWithinHorizon)
                } else {
                    let t = Trace::new(letters.clone())?;
                    if !ctx.main_eval.eval(&t, 1)? {
                        Some(FailureKind::MainViolated)
                    } else {
                        let mut bad = false;
                        for t2 in
                            expand_unreliable_mask(&t, ctx.unr_mask, ctx.limits.enum_cap_bits)?
                        {
                            if !ctx.backup_eval.eval(&t2, 1)? {
                                bad = true;
                                break;
                            }
                        }
                        bad.then_some(FailureKind::BackupViolated)
                    }
                }
            } else if letters.len() >= ctx.horizon {
                Some(FailureKind::NoStopWithinHorizon)
            } else if let Some(failure) = rec(ctx, m2, letters, inputs)? {
                letters.pop();
                inputs.pop();
                return Ok(Some(failure));
            } else {
                None
            };
            if let Some(kind) = fail {
                let failure = VerifyFailure {
                    kind,
                    inputs: inputs.clone(),
                };
                letters.pop();
                inputs.pop();
                return Ok(Some(failure));
            }
            letters.pop();
            inputs.pop();
        }
        Ok(None)
    }

    let ctx = Ctx {
        s,
        p,
        main_eval: &main_eval,
        backup_eval: &backup_eval,
        unr_mask,
        inputs_n,
        horizon,
        limits,
    };
    let mut letters = Vec::new();
    let mut inputs = Vec::new();
    Ok(match rec(&ctx, s.initial(), &mut letters, &mut inputs)? {
        Some(f) => Verdict::Fail(f),
        None => Verdict::Pass,
    })
}

type NodeKey = (u32, u32, u32); // (machine state, main residual, backup set id)

struct Quotient<'a> {
    arena: Arena,
    strategy: &'a Strategy,
    partition: &'a Partition,
    inputs_n: u32,
    unr_mask: u32,
    sets: Vec<Vec<u32>>,
    set_ids: HashMap<Vec<u32>, u32>,
    step_memo: HashMap<(u32, u32), u32>,
    stop_memo: HashMap<(u32, u32), bool>,
}

enum StepOutcome {
    Stop { main_ok: bool, backup_ok: bool },
    Go(NodeKey),
}

impl<'a> Quotient<'a> {
    fn intern_set(&mut self, mut set: Vec<u32>) -> u32 {
        set.sort_unstable();
        set.dedup();
        if let Some(&id) = self.set_ids.get(&set) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.set_ids.insert(set.clone(), id);
        self.sets.push(set);
        id
    }

    /// All rewritings of the unreliable bits of `letter`.
    fn rewritten_letters(&self, letter: u32) -> Vec<u32> {
        let base = letter & !self.unr_mask;
        let mut out = Vec::new();
        let mut sub = self.unr_mask;
        loop {
            out.push(base | sub);
            if sub == 0 {
                break;
            }
            sub = (sub.wrapping_sub(1)) & self.unr_mask;
        }
        out
    }

    fn step_set(&mut self, set_id: u32, letter: u32) -> u32 {
        if let Some(&id) = self.step_memo.get(&(set_id, letter)) {
            return id;
        }
        let mut next = Vec::new();
        let members = self.sets[set_id as usize].clone();
        for rewritten in self.rewritten_letters(letter) {
            for &res in &members {
                next.push(self.arena.progress_more(res, rewritten));
            }
        }
        let id = self.intern_set(next);
        self.step_memo.insert((set_id, letter), id);
        id
    }

    /// Do all backup residuals hold if the play ends with `letter` (under
    /// every rewriting of its unreliable bits)?
    fn stop_ok(&mut self, set_id: u32, letter: u32) -> bool {
        if let Some(&ok) = self.stop_memo.get(&(set_id, letter)) {
            return ok;
        }
        let members = self.sets[set_id as usize].clone();
        let ok = self.rewritten_letters(letter).into_iter().all(|rw| {
            members
                .iter()
                .all(|&res| self.arena.progress_last(res, rw))
        });
        self.stop_memo.insert((set_id, letter), ok);
        ok
    }

    fn step(&mut self, node: NodeKey, x: u32) -> StepOutcome {
        let (m, main_res, set_id) = node;
        let letter = self.partition.combine(self.strategy.output(m), x);
        let m2 = self.strategy.step(m, x);
        if self.strategy.stop(m2) {
            StepOutcome::Stop {
                main_ok: self.arena.progress_last(main_res, letter),
                backup_ok: self.stop_ok(set_id, letter),
            }
        } else {
            let main2 = self.arena.progress_more(main_res, letter);
            let set2 = self.step_set(set_id, letter);
            StepOutcome::Go((m2, main2, set2))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Color {
    Gray,
    Black,
}

/// Exhaustive verification over the quotient of plays by
/// (machine state, main residual, backup residual set).
///
/// Produces the same verdict as [`verify_strategy_enumerative`] but scales to
/// the bundled benchmarks: the number of explored nodes is bounded by the
/// number of distinct residual combinations instead of the number of
/// environment sequences. The first counterexample in lexicographic input
/// order is reported.
pub fn verify_strategy(
    s: &Strategy,
    main: &Formula,
    backup: &Formula,
    p: &Partition,
    horizon: usize,
    limits: &Limits,
) -> Result<Verdict> {
    check_strategy_shape(s, p)?;
    let props = p.props()?;
    let mut arena = Arena::new();
    let main0 = arena.import(main, &props)?;
    let backup0 = arena.import(backup, &props)?;

    let mut q = Quotient {
        arena,
        strategy: s,
        partition: p,
        inputs_n: 1u32 << p.input_width(),
        unr_mask: p.unreliable_mask(),
        sets: Vec::new(),
        set_ids: HashMap::new(),
        step_memo: HashMap::new(),
        stop_memo: HashMap::new(),
    };
    let set0 = q.intern_set(vec![backup0]);
    let root: NodeKey = (s.initial(), main0, set0);

    struct Frame {
        node: NodeKey,
        next_x: u32,
        /// Rounds until the deepest stop among the branches seen so far.
        rounds: usize,
    }

    let mut colors: HashMap<NodeKey, Color> = HashMap::new();
    let mut depth_to_stop: HashMap<NodeKey, usize> = HashMap::new();
    let mut stack = vec![Frame {
        node: root,
        next_x: 0,
        rounds: 0,
    }];
    let mut path: Vec<u32> = Vec::new();
    colors.insert(root, Color::Gray);

    let fail = |kind: FailureKind, inputs: Vec<u32>| -> Result<Verdict> {
        Ok(Verdict::Fail(VerifyFailure { kind, inputs }))
    };

    while let Some(frame) = stack.last_mut() {
        limits.check_deadline()?;
        if frame.next_x as u32 == q.inputs_n {
            // Node fully explored.
            let node = frame.node;
            let rounds = frame.rounds;
            colors.insert(node, Color::Black);
            depth_to_stop.insert(node, rounds);
            stack.pop();
            if let Some(parent) = stack.last_mut() {
                parent.rounds = parent.rounds.max(1 + rounds);
                path.pop();
            }
            continue;
        }
        let x = frame.next_x;
        frame.next_x += 1;
        let node = frame.node;
        let depth = path.len();
        match q.step(node, x) {
            StepOutcome::Stop { main_ok, backup_ok } => {
                let mut inputs = path.clone();
                inputs.push(x);
                if depth + 1 > horizon {
                    return fail(FailureKind::NoStopWithinHorizon, inputs);
                }
                if !main_ok {
                    return fail(FailureKind::MainViolated, inputs);
                }
                if !backup_ok {
                    return fail(FailureKind::BackupViolated, inputs);
                }
                let frame = stack.last_mut().expect("frame exists");
                frame.rounds = frame.rounds.max(1);
            }
            StepOutcome::Go(child) => {
                let mut inputs = path.clone();
                inputs.push(x);
                if depth + 1 >= horizon {
                    // The play through this child cannot stop within the
                    // horizon any more.
                    return fail(FailureKind::NoStopWithinHorizon, inputs);
                }
                match colors.get(&child) {
                    Some(Color::Gray) => {
                        // A lasso: some play never stops.
                        return fail(FailureKind::NoStopWithinHorizon, inputs);
                    }
                    Some(Color::Black) => {
                        let dts = depth_to_stop[&child];
                        if depth + 1 + dts > horizon {
                            let seq =
                                reconstruct_deep_path(&mut q, &depth_to_stop, child, inputs);
                            return fail(FailureKind::NoStopWithinHorizon, seq);
                        }
                        let frame = stack.last_mut().expect("frame exists");
                        frame.rounds = frame.rounds.max(1 + dts);
                    }
                    None => {
                        if colors.len() >= limits.verify_node_limit {
                            return Err(Error::StateLimit {
                                limit: limits.verify_node_limit,
                            });
                        }
                        colors.insert(child, Color::Gray);
                        path.push(x);
                        stack.push(Frame {
                            node: child,
                            next_x: 0,
                            rounds: 0,
                        });
                    }
                }
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Extends `prefix` with the lexicographically smallest input choices that
/// realize the deepest stop below `node` (used to witness horizon failures
/// through already-explored subtrees).
fn reconstruct_deep_path(
    q: &mut Quotient<'_>,
    depth_to_stop: &HashMap<NodeKey, usize>,
    mut node: NodeKey,
    mut prefix: Vec<u32>,
) -> Vec<u32> {
    let mut want = depth_to_stop[&node];
    'outer: while want > 0 {
        for x in 0..q.inputs_n {
            match q.step(node, x) {
                StepOutcome::Stop { .. } => {
                    if want == 1 {
                        prefix.push(x);
                        return prefix;
                    }
                }
                StepOutcome::Go(child) => {
                    if 1 + depth_to_stop[&child] == want {
                        prefix.push(x);
                        node = child;
                        want -= 1;
                        continue 'outer;
                    }
                }
            }
        }
        unreachable!("depth bookkeeping is consistent");
    }
    prefix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_ltlf, parse_partition};

    /// y-then-stop strategy for partitions with one output and one input.
    fn stop_after_one(output: u32) -> Strategy {
        Strategy::from_parts(
            1,
            1,
            vec![output, 0],
            vec![false, true],
            vec![vec![1, 1], vec![1, 1]],
        )
        .unwrap()
    }

    #[test]
    fn trivial_goals_pass() {
        let p = parse_partition(".inputs: u\n.outputs: y\n.unobservables: u").unwrap();
        let s = stop_after_one(1);
        let main = Formula::True;
        let backup = Formula::True;
        for verdict in [
            verify_strategy(&s, &main, &backup, &p, 4, &Limits::default()).unwrap(),
            verify_strategy_enumerative(&s, &main, &backup, &p, 4, &Limits::default()).unwrap(),
        ] {
            assert!(verdict.passed());
        }
    }

    #[test]
    fn contradictory_backup_fails_with_a_counterexample() {
        let p = parse_partition(".inputs: u\n.outputs: y\n.unobservables: u").unwrap();
        let s = stop_after_one(1);
        let main = parse_ltlf("y").unwrap();
        let backup = parse_ltlf("y <-> u").unwrap();
        let quotient = verify_strategy(&s, &main, &backup, &p, 4, &Limits::default()).unwrap();
        let enumerated =
            verify_strategy_enumerative(&s, &main, &backup, &p, 4, &Limits::default()).unwrap();
        assert_eq!(quotient, enumerated);
        match quotient {
            Verdict::Fail(f) => {
                assert_eq!(f.kind, FailureKind::BackupViolated);
                assert_eq!(f.inputs, vec![0]);
            }
            Verdict::Pass => panic!("expected a failure"),
        }
    }

    #[test]
    fn main_violation_is_detected() {
        let p = parse_partition(".inputs: u\n.outputs: y").unwrap();
        let s = stop_after_one(0); // outputs y=0, but main wants y
        let main = parse_ltlf("y").unwrap();
        let verdict =
            verify_strategy(&s, &main, &Formula::True, &p, 4, &Limits::default()).unwrap();
        assert_eq!(
            verdict,
            Verdict::Fail(VerifyFailure {
                kind: FailureKind::MainViolated,
                inputs: vec![0]
            })
        );
    }

    #[test]
    fn non_stopping_strategy_fails_on_horizon() {
        let p = parse_partition(".inputs: u\n.outputs: y").unwrap();
        let s = Strategy::from_parts(1, 1, vec![0], vec![false], vec![vec![0, 0]]).unwrap();
        let verdict =
            verify_strategy(&s, &Formula::True, &Formula::True, &p, 3, &Limits::default())
                .unwrap();
        match verdict {
            Verdict::Fail(f) => assert_eq!(f.kind, FailureKind::NoStopWithinHorizon),
            Verdict::Pass => panic!("expected a failure"),
        }
        let enumerated =
            verify_strategy_enumerative(&s, &Formula::True, &Formula::True, &p, 3, &Limits::default())
                .unwrap();
        match enumerated {
            Verdict::Fail(f) => assert_eq!(f.kind, FailureKind::NoStopWithinHorizon),
            Verdict::Pass => panic!("expected a failure"),
        }
    }

    #[test]
    fn enumerative_respects_the_cap() {
        let p = parse_partition(".inputs: a b c\n.outputs: y").unwrap();
        let s = Strategy::from_parts(
            1,
            3,
            vec![0, 0],
            vec![false, true],
            vec![vec![1; 8], vec![1; 8]],
        )
        .unwrap();
        let r = verify_strategy_enumerative(
            &s,
            &Formula::True,
            &Formula::True,
            &p,
            10,
            &Limits::default(),
        );
        assert!(matches!(r, Err(Error::EnumerationCap { .. })));
    }
}
