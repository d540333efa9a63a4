//! Explicit finite-word automata over total-assignment alphabets.
//!
//! Letters are bit vectors in the global proposition order; transitions are
//! stored densely, indexed by letter, so the alphabet width is capped (see
//! [`Limits`]). All constructions materialize reachable states only.

mod dot;
mod minimize;

pub use dot::{dfa_to_dot, nfa_to_dot};
pub use minimize::minimize;

use std::collections::HashMap;

use crate::error::{Error, Limits, Result};
use crate::logic::{Letter, Trace};

/// A nondeterministic finite automaton. Per state and letter the successor
/// set may be empty.
#[derive(Debug, Clone)]
pub struct Nfa {
    width: usize,
    initial: u32,
    finals: Vec<bool>,
    /// trans[state][letter] -> successor states
    trans: Vec<Vec<Vec<u32>>>,
}

/// A deterministic finite automaton with a total transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    width: usize,
    initial: u32,
    finals: Vec<bool>,
    /// trans[state][letter] -> the unique successor
    trans: Vec<Vec<u32>>,
}

fn check_width(width: usize) -> Result<()> {
    if width > 16 {
        return Err(Error::WidthCap {
            width,
            cap: 16,
        });
    }
    Ok(())
}

impl Nfa {
    pub fn new(
        width: usize,
        initial: u32,
        finals: Vec<bool>,
        trans: Vec<Vec<Vec<u32>>>,
    ) -> Result<Nfa> {
        check_width(width)?;
        let n = finals.len();
        if trans.len() != n || (initial as usize) >= n {
            return Err(Error::InvalidInstance(
                "automaton shape is inconsistent".into(),
            ));
        }
        for row in &trans {
            if row.len() != 1 << width {
                return Err(Error::InvalidInstance(
                    "transition rows must cover every letter".into(),
                ));
            }
            for succs in row {
                if succs.iter().any(|&s| s as usize >= n) {
                    return Err(Error::InvalidInstance(
                        "transition target out of range".into(),
                    ));
                }
            }
        }
        Ok(Nfa {
            width,
            initial,
            finals,
            trans,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn letter_count(&self) -> usize {
        1 << self.width
    }

    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn is_final(&self, s: u32) -> bool {
        self.finals[s as usize]
    }

    pub fn successors(&self, s: u32, letter: Letter) -> &[u32] {
        &self.trans[s as usize][letter.0 as usize]
    }

    /// Standard run over the trace; accepts iff some run ends in a final
    /// state. The empty trace is always rejected.
    pub fn accepts(&self, t: &Trace) -> Result<bool> {
        for l in t.letters() {
            if l.0 as usize >= self.letter_count() {
                return Err(Error::WidthMismatch {
                    left: self.width,
                    right: 32 - l.0.leading_zeros() as usize,
                });
            }
        }
        let mut current = vec![false; self.state_count()];
        current[self.initial as usize] = true;
        for l in t.letters() {
            let mut next = vec![false; self.state_count()];
            for (s, active) in current.iter().enumerate() {
                if *active {
                    for &s2 in &self.trans[s][l.0 as usize] {
                        next[s2 as usize] = true;
                    }
                }
            }
            current = next;
        }
        // A trace is nonempty, so at least one letter was consumed.
        Ok(current
            .iter()
            .zip(&self.finals)
            .any(|(active, fin)| *active && *fin))
    }
}

impl Dfa {
    pub fn new(width: usize, initial: u32, finals: Vec<bool>, trans: Vec<Vec<u32>>) -> Result<Dfa> {
        check_width(width)?;
        let n = finals.len();
        if trans.len() != n || (initial as usize) >= n {
            return Err(Error::InvalidInstance(
                "automaton shape is inconsistent".into(),
            ));
        }
        for row in &trans {
            // Totality: exactly one successor per letter.
            if row.len() != 1 << width {
                return Err(Error::InvalidInstance(
                    "transition rows must cover every letter".into(),
                ));
            }
            if row.iter().any(|&s| s as usize >= n) {
                return Err(Error::InvalidInstance(
                    "transition target out of range".into(),
                ));
            }
        }
        Ok(Dfa {
            width,
            initial,
            finals,
            trans,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn letter_count(&self) -> usize {
        1 << self.width
    }

    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> u32 {
        self.initial
    }

    pub fn is_final(&self, s: u32) -> bool {
        self.finals[s as usize]
    }

    pub fn finals(&self) -> &[bool] {
        &self.finals
    }

    pub fn step(&self, s: u32, letter: Letter) -> u32 {
        self.trans[s as usize][letter.0 as usize]
    }

    /// The state reached from the initial state after consuming `t`.
    pub fn run(&self, t: &Trace) -> Result<u32> {
        let mut s = self.initial;
        for l in t.letters() {
            if l.0 as usize >= self.letter_count() {
                return Err(Error::WidthMismatch {
                    left: self.width,
                    right: 32 - l.0.leading_zeros() as usize,
                });
            }
            s = self.step(s, *l);
        }
        Ok(s)
    }

    /// Acceptance of a (nonempty) trace.
    pub fn accepts(&self, t: &Trace) -> Result<bool> {
        Ok(self.finals[self.run(t)? as usize])
    }

    /// Views the DFA as an NFA (a DFA is an NFA whose successor sets are
    /// singletons).
    pub fn to_nfa(&self) -> Nfa {
        Nfa {
            width: self.width,
            initial: self.initial,
            finals: self.finals.clone(),
            trans: self
                .trans
                .iter()
                .map(|row| row.iter().map(|&s| vec![s]).collect())
                .collect(),
        }
    }

    /// Restricts the automaton to the low `new_width` proposition bits by
    /// fixing all higher bits to 0, then trims to reachable states.
    ///
    /// Only meaningful when the language is invariant under the dropped
    /// bits, as for quantified variables after abstraction.
    pub fn restrict_width(&self, new_width: usize) -> Result<Dfa> {
        if new_width > self.width {
            return Err(Error::WidthMismatch {
                left: self.width,
                right: new_width,
            });
        }
        let letters = 1usize << new_width;
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut order: Vec<u32> = Vec::new();
        map.insert(self.initial, 0);
        order.push(self.initial);
        let mut trans = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let s = order[i];
            i += 1;
            finals.push(self.finals[s as usize]);
            let mut row = Vec::with_capacity(letters);
            for a in 0..letters {
                let succ = self.trans[s as usize][a];
                let id = *map.entry(succ).or_insert_with(|| {
                    order.push(succ);
                    (order.len() - 1) as u32
                });
                row.push(id);
            }
            trans.push(row);
        }
        Dfa::new(new_width, 0, finals, trans)
    }
}

/// Subset construction over reachable subsets only. The empty subset, when
/// reachable, becomes a non-final sink. `L(result) = L(n)`.
pub fn determinize(n: &Nfa, limits: &Limits) -> Result<Dfa> {
    let letters = n.letter_count();
    let blocks = n.state_count().div_ceil(64);
    let as_key = |set: &[u64]| -> Vec<u64> { set.to_vec() };

    // Precompute successor bitsets per (state, letter).
    let mut succ_sets: Vec<Vec<u64>> = vec![vec![0u64; blocks]; n.state_count() * letters];
    for s in 0..n.state_count() {
        for a in 0..letters {
            let set = &mut succ_sets[s * letters + a];
            for &s2 in &n.trans[s][a] {
                set[(s2 / 64) as usize] |= 1u64 << (s2 % 64);
            }
        }
    }

    let mut ids: HashMap<Vec<u64>, u32> = HashMap::new();
    let mut subsets: Vec<Vec<u64>> = Vec::new();
    let mut start = vec![0u64; blocks];
    start[(n.initial / 64) as usize] |= 1u64 << (n.initial % 64);
    ids.insert(as_key(&start), 0);
    subsets.push(start);

    let mut trans: Vec<Vec<u32>> = Vec::new();
    let mut finals: Vec<bool> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        limits.check_deadline()?;
        let current = subsets[i].clone();
        finals.push(is_final_subset(&current, &n.finals));
        let mut row = Vec::with_capacity(letters);
        for a in 0..letters {
            let mut next = vec![0u64; blocks];
            for (b, word) in current.iter().enumerate() {
                let mut w = *word;
                while w != 0 {
                    let bit = w.trailing_zeros() as usize;
                    w &= w - 1;
                    let s = b * 64 + bit;
                    for (nb, nw) in succ_sets[s * letters + a].iter().enumerate() {
                        next[nb] |= nw;
                    }
                }
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = subsets.len() as u32;
                    if subsets.len() >= limits.subset_limit {
                        return Err(Error::StateLimit {
                            limit: limits.subset_limit,
                        });
                    }
                    ids.insert(as_key(&next), id);
                    subsets.push(next);
                    id
                }
            };
            row.push(id);
        }
        trans.push(row);
        i += 1;
    }
    Dfa::new(n.width, 0, finals, trans)
}

fn is_final_subset(set: &[u64], finals: &[bool]) -> bool {
    for (b, word) in set.iter().enumerate() {
        let mut w = *word;
        while w != 0 {
            let bit = w.trailing_zeros() as usize;
            w &= w - 1;
            if finals[b * 64 + bit] {
                return true;
            }
        }
    }
    false
}

/// Complement: same structure, final states flipped. Accepts exactly the
/// nonempty traces `d` rejects.
pub fn complement(d: &Dfa) -> Dfa {
    Dfa {
        width: d.width,
        initial: d.initial,
        finals: d.finals.iter().map(|f| !f).collect(),
        trans: d.trans.clone(),
    }
}

/// Synchronous product over reachable state pairs;
/// `L(product) = L(d1) ∩ L(d2)`.
pub fn product(d1: &Dfa, d2: &Dfa, limits: &Limits) -> Result<Dfa> {
    if d1.width != d2.width {
        return Err(Error::WidthMismatch {
            left: d1.width,
            right: d2.width,
        });
    }
    let letters = d1.letter_count();
    let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
    let mut pairs: Vec<(u32, u32)> = vec![(d1.initial, d2.initial)];
    ids.insert(pairs[0], 0);
    let mut trans = Vec::new();
    let mut finals = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        limits.check_deadline()?;
        let (s1, s2) = pairs[i];
        finals.push(d1.finals[s1 as usize] && d2.finals[s2 as usize]);
        let mut row = Vec::with_capacity(letters);
        for a in 0..letters {
            let next = (d1.trans[s1 as usize][a], d2.trans[s2 as usize][a]);
            let id = *ids.entry(next).or_insert_with(|| {
                pairs.push(next);
                (pairs.len() - 1) as u32
            });
            row.push(id);
        }
        trans.push(row);
        i += 1;
    }
    Dfa::new(d1.width, 0, finals, trans)
}

/// Existential abstraction over the propositions in `mask`: a transition may
/// fire under any rewriting of the masked bits of its letter. States, the
/// initial state, and the final states are unchanged.
///
/// The result accepts `t` iff some `t'` agreeing with `t` outside `mask` is
/// accepted by `n`.
pub fn exist_abstract(n: &Nfa, mask: u32, limits: &Limits) -> Result<Nfa> {
    if mask as u64 >= 1u64 << n.width {
        return Err(Error::InvalidInstance(format!(
            "abstraction mask {mask:#x} has bits outside the alphabet width {}",
            n.width
        )));
    }
    let letters = n.letter_count();
    let mut trans = Vec::with_capacity(n.state_count());
    for s in 0..n.state_count() {
        limits.check_deadline()?;
        let mut row: Vec<Vec<u32>> = Vec::with_capacity(letters);
        for a in 0..letters as u32 {
            let base = a & !mask;
            let mut succs: Vec<u32> = Vec::new();
            // Enumerate all subsets of `mask` to visit every rewriting.
            let mut sub = mask;
            loop {
                succs.extend_from_slice(&n.trans[s][(base | sub) as usize]);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            succs.sort_unstable();
            succs.dedup();
            row.push(succs);
        }
        trans.push(row);
    }
    Ok(Nfa {
        width: n.width,
        initial: n.initial,
        finals: n.finals.clone(),
        trans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::all_traces;

    /// 2-state NFA accepting traces in which some letter contains `a`
    /// (bit 0), width 1.
    fn nfa_some_a() -> Nfa {
        Nfa::new(
            1,
            0,
            vec![false, true],
            vec![
                vec![vec![0], vec![0, 1]], // from 0: on {}, stay; on {a}, maybe accept
                vec![vec![1], vec![1]],
            ],
        )
        .unwrap()
    }

    fn trace(bits: &[u32]) -> Trace {
        Trace::new(bits.iter().map(|&b| Letter(b)).collect()).unwrap()
    }

    #[test]
    fn determinize_preserves_membership() {
        let n = nfa_some_a();
        let d = determinize(&n, &Limits::default()).unwrap();
        assert_eq!(d.state_count(), 2);
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert_eq!(n.accepts(&t).unwrap(), d.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn determinize_of_empty_language_rejects_everything() {
        let n = Nfa::new(1, 0, vec![false, true], vec![vec![vec![], vec![]]; 2]).unwrap();
        let d = determinize(&n, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert!(!d.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn complement_is_an_involution() {
        let d = determinize(&nfa_some_a(), &Limits::default()).unwrap();
        assert_eq!(complement(&complement(&d)), d);
        // "contains a": rejects [{a}] after complement, accepts [{}]
        let c = complement(&d);
        assert!(c.accepts(&trace(&[0])).unwrap());
        assert!(!c.accepts(&trace(&[1])).unwrap());
    }

    #[test]
    fn empty_trace_is_always_rejected() {
        assert!(Trace::new(vec![]).is_err());
    }

    #[test]
    fn product_intersects_languages() {
        let limits = Limits::default();
        let d = determinize(&nfa_some_a(), &limits).unwrap();
        // all-accepting DFA of the same width
        let top = Dfa::new(1, 0, vec![true], vec![vec![0, 0]]).unwrap();
        let p = product(&d, &top, &limits).unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert_eq!(p.accepts(&t).unwrap(), d.accepts(&t).unwrap());
            }
        }
        let empty = product(&d, &complement(&d), &limits).unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert!(!empty.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn product_requires_matching_widths() {
        let limits = Limits::default();
        let d1 = Dfa::new(1, 0, vec![true], vec![vec![0, 0]]).unwrap();
        let d2 = Dfa::new(2, 0, vec![true], vec![vec![0, 0, 0, 0]]).unwrap();
        assert!(matches!(
            product(&d1, &d2, &limits),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn abstraction_opens_transitions_under_rewriting() {
        // width 2: bit 0 = u, bit 1 = y. One transition s0 --{u,y}--> s1.
        let mut trans = vec![vec![vec![]; 4], vec![vec![]; 4]];
        trans[0][0b11] = vec![1];
        let n = Nfa::new(2, 0, vec![false, true], trans).unwrap();
        let abs = exist_abstract(&n, 0b01, &Limits::default()).unwrap();
        // Both {y} and {u,y} now reach s1; letters without y still do not.
        assert!(abs.accepts(&trace(&[0b10])).unwrap());
        assert!(abs.accepts(&trace(&[0b11])).unwrap());
        assert!(!abs.accepts(&trace(&[0b00])).unwrap());
        assert!(!abs.accepts(&trace(&[0b01])).unwrap());
    }

    #[test]
    fn abstraction_over_nothing_is_identity() {
        let n = nfa_some_a();
        let abs = exist_abstract(&n, 0, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert_eq!(n.accepts(&t).unwrap(), abs.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn unreachable_finals_accept_nothing() {
        let n = Nfa::new(
            1,
            0,
            vec![false, true],
            vec![vec![vec![0], vec![0]], vec![vec![1], vec![1]]],
        )
        .unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert!(!n.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn restrict_width_drops_irrelevant_bits() {
        // width 2 automaton whose language ignores bit 1.
        let d = determinize(&nfa_some_a(), &Limits::default()).unwrap();
        let mut wide_trans = Vec::new();
        for s in 0..d.state_count() {
            let mut row = Vec::new();
            for a in 0..4u32 {
                row.push(d.trans[s][(a & 1) as usize]);
            }
            wide_trans.push(row);
        }
        let wide = Dfa::new(2, d.initial(), d.finals.clone(), wide_trans).unwrap();
        let narrow = wide.restrict_width(1).unwrap();
        for len in 1..=3 {
            for t in all_traces(1, len) {
                assert_eq!(narrow.accepts(&t).unwrap(), d.accepts(&t).unwrap());
            }
        }
    }
}
