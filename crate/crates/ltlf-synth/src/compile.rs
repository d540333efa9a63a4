//! LTLf-to-DFA compilation by memoized formula progression.
//!
//! A state is a canonicalized residual formula plus an "accepted" flag saying
//! whether the prefix consumed so far satisfies the original formula. Reading
//! a letter rewrites the residual under the assumption that more letters
//! follow (`progress_more`) and records what would hold if the trace ended
//! here (`progress_last`).
//!
//! Residuals are kept canonical up to propositional equivalence: the boolean
//! structure is a reduced ordered BDD whose variables are hash-consed
//! temporal subterms (atoms, nexts, untils, ...). Plain
//! flatten/sort/deduplicate normal forms are not enough here; without the
//! propositional canonicalization, progression of nested until/release
//! formulas keeps growing syntactically and the state space diverges on
//! small random formulas.

use std::collections::HashMap;

use crate::automata::Dfa;
use crate::error::{Error, Limits, Result};
use crate::logic::{Formula, Letter, Props};

/// A boolean function over temporal subterms. 0 is false, 1 is true.
type BddId = u32;

const FF: BddId = 0;
const TT: BddId = 1;

/// A temporal "variable" of the boolean layer. Arguments of temporal
/// operators are again boolean functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Term {
    Atom(u16),
    StrongNext(BddId),
    WeakNext(BddId),
    Until(BddId, BddId),
    Release(BddId, BddId),
    Eventually(BddId),
    Always(BddId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: BddId,
    hi: BddId,
}

pub(crate) struct Arena {
    terms: Vec<Term>,
    term_ids: HashMap<Term, u32>,
    nodes: Vec<Node>,
    node_ids: HashMap<Node, BddId>,
    ite_memo: HashMap<(BddId, BddId, BddId), BddId>,
    pm_memo: HashMap<(BddId, u32), BddId>,
    pm_var_memo: HashMap<(u32, u32), BddId>,
    pl_memo: HashMap<(BddId, u32), bool>,
}

const NO_VAR: u32 = u32::MAX;

impl Arena {
    pub(crate) fn new() -> Arena {
        Arena {
            terms: Vec::new(),
            term_ids: HashMap::new(),
            // Slots for the two terminals; var NO_VAR sorts below every
            // real variable.
            nodes: vec![
                Node { var: NO_VAR, lo: FF, hi: FF },
                Node { var: NO_VAR, lo: TT, hi: TT },
            ],
            node_ids: HashMap::new(),
            ite_memo: HashMap::new(),
            pm_memo: HashMap::new(),
            pm_var_memo: HashMap::new(),
            pl_memo: HashMap::new(),
        }
    }

    fn term(&mut self, t: Term) -> u32 {
        if let Some(&id) = self.term_ids.get(&t) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(t);
        self.term_ids.insert(t, id);
        id
    }

    fn var(&mut self, t: Term) -> BddId {
        let v = self.term(t);
        self.mk_node(v, FF, TT)
    }

    fn mk_node(&mut self, var: u32, lo: BddId, hi: BddId) -> BddId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.node_ids.get(&node) {
            return id;
        }
        let id = self.nodes.len() as BddId;
        self.nodes.push(node);
        self.node_ids.insert(node, id);
        id
    }

    fn top_var(&self, f: BddId) -> u32 {
        self.nodes[f as usize].var
    }

    fn cofactor(&self, f: BddId, var: u32, high: bool) -> BddId {
        let node = self.nodes[f as usize];
        if node.var != var {
            return f;
        }
        if high {
            node.hi
        } else {
            node.lo
        }
    }

    fn ite(&mut self, f: BddId, g: BddId, h: BddId) -> BddId {
        if f == TT {
            return g;
        }
        if f == FF {
            return h;
        }
        if g == h {
            return g;
        }
        if g == TT && h == FF {
            return f;
        }
        if let Some(&r) = self.ite_memo.get(&(f, g, h)) {
            return r;
        }
        let var = self
            .top_var(f)
            .min(self.top_var(g))
            .min(self.top_var(h));
        let hi = {
            let (f1, g1, h1) = (
                self.cofactor(f, var, true),
                self.cofactor(g, var, true),
                self.cofactor(h, var, true),
            );
            self.ite(f1, g1, h1)
        };
        let lo = {
            let (f0, g0, h0) = (
                self.cofactor(f, var, false),
                self.cofactor(g, var, false),
                self.cofactor(h, var, false),
            );
            self.ite(f0, g0, h0)
        };
        let r = self.mk_node(var, lo, hi);
        self.ite_memo.insert((f, g, h), r);
        r
    }

    fn and(&mut self, f: BddId, g: BddId) -> BddId {
        self.ite(f, g, FF)
    }

    fn or(&mut self, f: BddId, g: BddId) -> BddId {
        self.ite(f, TT, g)
    }

    fn not(&mut self, f: BddId) -> BddId {
        self.ite(f, FF, TT)
    }

    pub(crate) fn import(&mut self, f: &Formula, props: &Props) -> Result<BddId> {
        Ok(match f {
            Formula::True => TT,
            Formula::False => FF,
            Formula::Atom(a) => {
                let idx = props.index_of(a)?;
                self.var(Term::Atom(idx as u16))
            }
            Formula::Not(x) => {
                let x = self.import(x, props)?;
                self.not(x)
            }
            Formula::And(l, r) => {
                let l = self.import(l, props)?;
                let r = self.import(r, props)?;
                self.and(l, r)
            }
            Formula::Or(l, r) => {
                let l = self.import(l, props)?;
                let r = self.import(r, props)?;
                self.or(l, r)
            }
            Formula::StrongNext(x) => {
                let x = self.import(x, props)?;
                // N false == false; everything else is a fresh obligation.
                if x == FF {
                    FF
                } else {
                    self.var(Term::StrongNext(x))
                }
            }
            Formula::WeakNext(x) => {
                let x = self.import(x, props)?;
                if x == TT {
                    TT
                } else {
                    self.var(Term::WeakNext(x))
                }
            }
            Formula::Until(l, r) => {
                let l = self.import(l, props)?;
                let r = self.import(r, props)?;
                if r == TT || r == FF {
                    r
                } else if l == FF {
                    r
                } else {
                    self.var(Term::Until(l, r))
                }
            }
            Formula::Release(l, r) => {
                let l = self.import(l, props)?;
                let r = self.import(r, props)?;
                if r == TT || r == FF {
                    r
                } else if l == TT {
                    r
                } else {
                    self.var(Term::Release(l, r))
                }
            }
            Formula::Eventually(x) => {
                let x = self.import(x, props)?;
                if x == TT || x == FF {
                    x
                } else {
                    self.var(Term::Eventually(x))
                }
            }
            Formula::Always(x) => {
                let x = self.import(x, props)?;
                if x == TT || x == FF {
                    x
                } else {
                    self.var(Term::Always(x))
                }
            }
        })
    }

    /// Residual after reading `letter` assuming at least one more letter
    /// follows: for every trace `t` with `t(1) = letter` and length >= 2,
    /// `t,1 |= f` iff `tail(t),1 |= progress_more(f, letter)`.
    pub(crate) fn progress_more(&mut self, f: BddId, letter: u32) -> BddId {
        if f == TT || f == FF {
            return f;
        }
        if let Some(&r) = self.pm_memo.get(&(f, letter)) {
            return r;
        }
        let node = self.nodes[f as usize];
        let pv = self.progress_var(node.var, letter);
        let phi = self.progress_more(node.hi, letter);
        let plo = self.progress_more(node.lo, letter);
        let r = self.ite(pv, phi, plo);
        self.pm_memo.insert((f, letter), r);
        r
    }

    fn progress_var(&mut self, var: u32, letter: u32) -> BddId {
        if let Some(&r) = self.pm_var_memo.get(&(var, letter)) {
            return r;
        }
        let r = match self.terms[var as usize] {
            Term::Atom(i) => {
                if letter >> i & 1 == 1 {
                    TT
                } else {
                    FF
                }
            }
            // With more letters ahead, strong and weak next both defer to
            // the next instant.
            Term::StrongNext(x) | Term::WeakNext(x) => x,
            Term::Until(l, r) => {
                let keep = self.mk_node(var, FF, TT);
                let pl = self.progress_more(l, letter);
                let pr = self.progress_more(r, letter);
                let cont = self.and(pl, keep);
                self.or(pr, cont)
            }
            Term::Release(l, r) => {
                let keep = self.mk_node(var, FF, TT);
                let pl = self.progress_more(l, letter);
                let pr = self.progress_more(r, letter);
                let cont = self.or(pl, keep);
                self.and(pr, cont)
            }
            Term::Eventually(x) => {
                let keep = self.mk_node(var, FF, TT);
                let px = self.progress_more(x, letter);
                self.or(px, keep)
            }
            Term::Always(x) => {
                let keep = self.mk_node(var, FF, TT);
                let px = self.progress_more(x, letter);
                self.and(px, keep)
            }
        };
        self.pm_var_memo.insert((var, letter), r);
        r
    }

    /// Truth of `f` on the single-letter trace `[letter]`.
    pub(crate) fn progress_last(&mut self, f: BddId, letter: u32) -> bool {
        if f == TT {
            return true;
        }
        if f == FF {
            return false;
        }
        if let Some(&r) = self.pl_memo.get(&(f, letter)) {
            return r;
        }
        let node = self.nodes[f as usize];
        let value = match self.terms[node.var as usize] {
            Term::Atom(i) => letter >> i & 1 == 1,
            Term::StrongNext(_) => false,
            Term::WeakNext(_) => true,
            Term::Until(_, r) => self.progress_last(r, letter),
            Term::Release(_, r) => self.progress_last(r, letter),
            Term::Eventually(x) => self.progress_last(x, letter),
            Term::Always(x) => self.progress_last(x, letter),
        };
        let r = if value {
            self.progress_last(node.hi, letter)
        } else {
            self.progress_last(node.lo, letter)
        };
        self.pl_memo.insert((f, letter), r);
        r
    }

    pub(crate) fn export_with(&self, f: BddId, props: &Props) -> Formula {
        if f == TT {
            return Formula::True;
        }
        if f == FF {
            return Formula::False;
        }
        let node = self.nodes[f as usize];
        let var = self.export_term(node.var, props);
        match (node.lo, node.hi) {
            (FF, TT) => var,
            (TT, FF) => Formula::not(var),
            (FF, hi) => Formula::and(var, self.export_with(hi, props)),
            (TT, hi) => Formula::or(Formula::not(var), self.export_with(hi, props)),
            (lo, TT) => Formula::or(var, self.export_with(lo, props)),
            (lo, FF) => Formula::and(Formula::not(var), self.export_with(lo, props)),
            (lo, hi) => Formula::or(
                Formula::and(var.clone(), self.export_with(hi, props)),
                Formula::and(Formula::not(var), self.export_with(lo, props)),
            ),
        }
    }

    fn export_term(&self, var: u32, props: &Props) -> Formula {
        match self.terms[var as usize] {
            Term::Atom(i) => Formula::atom(props.name(i as usize)),
            Term::StrongNext(x) => Formula::strong_next(self.export_with(x, props)),
            Term::WeakNext(x) => Formula::weak_next(self.export_with(x, props)),
            Term::Until(l, r) => {
                Formula::until(self.export_with(l, props), self.export_with(r, props))
            }
            Term::Release(l, r) => {
                Formula::release(self.export_with(l, props), self.export_with(r, props))
            }
            Term::Eventually(x) => Formula::eventually(self.export_with(x, props)),
            Term::Always(x) => Formula::always(self.export_with(x, props)),
        }
    }
}

/// One-letter derivative of `f` under `letter`, assuming more letters follow.
/// The result is canonicalized.
pub fn progress_more(f: &Formula, props: &Props, letter: Letter) -> Result<Formula> {
    let mut arena = Arena::new();
    let id = arena.import(f, props)?;
    let out = arena.progress_more(id, letter.0);
    Ok(arena.export_with(out, props))
}

/// Truth of `f` on the single-letter trace `[letter]`.
pub fn progress_last(f: &Formula, props: &Props, letter: Letter) -> Result<bool> {
    let mut arena = Arena::new();
    let id = arena.import(f, props)?;
    Ok(arena.progress_last(id, letter.0))
}

/// Canonical form of `f` (the normal form used for progression states).
pub fn canonicalize(f: &Formula, props: &Props) -> Result<Formula> {
    let mut arena = Arena::new();
    let id = arena.import(f, props)?;
    Ok(arena.export_with(id, props))
}

/// Compiles an LTLf formula into a DFA over the given proposition order.
///
/// States are the reachable (residual, accepted) pairs starting from
/// `(f, false)`; a state is final iff its accepted flag is set. The initial
/// state is never final, so the empty trace is rejected. For every nonempty
/// trace `t`, the DFA accepts `t` iff `t ⊨ f`.
pub fn ltlf_to_dfa(f: &Formula, props: &Props, limits: &Limits) -> Result<Dfa> {
    limits.check_width(props.width())?;
    let mut arena = Arena::new();
    let t0 = arena.import(f, props)?;
    let letters = 1usize << props.width();

    let mut ids: HashMap<(BddId, bool), u32> = HashMap::new();
    let mut states: Vec<(BddId, bool)> = vec![(t0, false)];
    ids.insert((t0, false), 0);
    let mut trans: Vec<Vec<u32>> = Vec::new();

    let mut i = 0;
    while i < states.len() {
        limits.check_deadline()?;
        let (term, _) = states[i];
        let mut row = Vec::with_capacity(letters);
        for a in 0..letters as u32 {
            let next = (arena.progress_more(term, a), arena.progress_last(term, a));
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= limits.state_limit {
                        return Err(Error::StateLimit {
                            limit: limits.state_limit,
                        });
                    }
                    let id = states.len() as u32;
                    ids.insert(next, id);
                    states.push(next);
                    id
                }
            };
            row.push(id);
        }
        trans.push(row);
        i += 1;
    }
    let finals = states.iter().map(|&(_, accepted)| accepted).collect();
    Dfa::new(props.width(), 0, finals, trans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{all_traces, eval_trace, parse_ltlf, Trace};

    fn props_ab() -> Props {
        Props::from_names(["a", "b"]).unwrap()
    }

    #[test]
    fn progression_keeps_untouched_until() {
        let props = props_ab();
        let f = parse_ltlf("a U b").unwrap();
        let g = progress_more(&f, &props, Letter(0b01)).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn strong_next_obligation_survives_one_letter() {
        let props = props_ab();
        let f = Formula::strong_next(Formula::atom("a"));
        assert_eq!(
            progress_more(&f, &props, Letter(0)).unwrap(),
            Formula::atom("a")
        );
        assert_eq!(
            progress_more(&Formula::True, &props, Letter(0b11)).unwrap(),
            Formula::True
        );
    }

    #[test]
    fn last_instant_semantics() {
        let props = props_ab();
        assert!(!progress_last(
            &Formula::strong_next(Formula::atom("a")),
            &props,
            Letter(0b01)
        )
        .unwrap());
        assert!(progress_last(
            &Formula::weak_next(Formula::False),
            &props,
            Letter(0)
        )
        .unwrap());
        assert!(progress_last(&parse_ltlf("a U b").unwrap(), &props, Letter(0b10)).unwrap());
    }

    #[test]
    fn canonicalization_identifies_propositional_equivalents() {
        let props = props_ab();
        // f | (f & g) == f for a temporal f
        let f = parse_ltlf("(a U b) | ((a U b) & G a)").unwrap();
        assert_eq!(
            canonicalize(&f, &props).unwrap(),
            parse_ltlf("a U b").unwrap()
        );
        let g = parse_ltlf("!(!(G b))").unwrap();
        assert_eq!(canonicalize(&g, &props).unwrap(), parse_ltlf("G b").unwrap());
    }

    #[test]
    fn eventually_dfa_matches_examples() {
        let props = Props::from_names(["a"]).unwrap();
        let d = ltlf_to_dfa(
            &Formula::eventually(Formula::atom("a")),
            &props,
            &Limits::default(),
        )
        .unwrap();
        let yes = Trace::new(vec![Letter(0), Letter(1)]).unwrap();
        let no = Trace::new(vec![Letter(0), Letter(0)]).unwrap();
        assert!(d.accepts(&yes).unwrap());
        assert!(!d.accepts(&no).unwrap());
    }

    #[test]
    fn false_compiles_to_the_empty_language() {
        let props = Props::from_names(["a"]).unwrap();
        let d = ltlf_to_dfa(&Formula::False, &props, &Limits::default()).unwrap();
        assert!(d.finals().iter().all(|f| !f));
    }

    #[test]
    fn bare_atom_checks_the_first_letter() {
        let props = Props::from_names(["a"]).unwrap();
        let d = ltlf_to_dfa(&Formula::atom("a"), &props, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert_eq!(d.accepts(&t).unwrap(), t.letters()[0].contains(0));
            }
        }
    }

    #[test]
    fn initial_state_is_never_final() {
        for text in ["true", "a", "!a", "G a", "X false"] {
            let props = Props::from_names(["a"]).unwrap();
            let f = parse_ltlf(text).unwrap();
            let d = ltlf_to_dfa(&f, &props, &Limits::default()).unwrap();
            assert!(!d.is_final(d.initial()), "initial final for {text}");
        }
    }

    #[test]
    fn progression_soundness_on_a_small_corpus() {
        let props = props_ab();
        let corpus = [
            "a U b",
            "G (a -> X b)",
            "F (a & b)",
            "a R b",
            "N N a",
            "(a U b) | G !b",
            "X (a <-> b)",
            "(G a U F b) R N (!a | b)",
        ];
        for text in corpus {
            let f = parse_ltlf(text).unwrap();
            for a in 0..4u32 {
                let g = progress_more(&f, &props, Letter(a)).unwrap();
                for len in 1..=3 {
                    for tail in all_traces(2, len) {
                        let mut letters = vec![Letter(a)];
                        letters.extend_from_slice(tail.letters());
                        let full = Trace::new(letters).unwrap();
                        assert_eq!(
                            eval_trace(&props, &full, 1, &f).unwrap(),
                            eval_trace(&props, &tail, 1, &g).unwrap(),
                            "formula {text}, letter {a:#b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dfa_agrees_with_the_evaluator_on_a_small_corpus() {
        let props = props_ab();
        let corpus = [
            "a U b",
            "G (a -> X b)",
            "F (a & b)",
            "a R b",
            "N N a",
            "(a U b) | G !b",
            "true",
            "false",
            "X false",
            "N true",
            // nested release/until mix that diverges without propositional
            // canonicalization of the residuals
            "(G a U F b) R N (!a | b)",
        ];
        let limits = Limits::default();
        for text in corpus {
            let f = parse_ltlf(text).unwrap();
            let d = ltlf_to_dfa(&f, &props, &limits).unwrap();
            for len in 1..=4 {
                for t in all_traces(2, len) {
                    assert_eq!(
                        d.accepts(&t).unwrap(),
                        eval_trace(&props, &t, 1, &f).unwrap(),
                        "formula {text}, trace {t:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn state_limit_fails_loudly() {
        let props = Props::from_names(["a"]).unwrap();
        let f = parse_ltlf("F (a & N a & N N a & N N N a)").unwrap();
        let limits = Limits {
            state_limit: 2,
            ..Limits::default()
        };
        assert!(matches!(
            ltlf_to_dfa(&f, &props, &limits),
            Err(Error::StateLimit { limit: 2 })
        ));
    }
}
