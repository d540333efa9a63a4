//! Propositions, bit-packed letters, finite traces, and the trace evaluator.
//!
//! The evaluator implements the finite-trace satisfaction relation clause by
//! clause and is the semantic ground truth everything else in the crate is
//! tested against.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::logic::Formula;

/// An ordered set of proposition names. The position of a name defines its
/// bit in every [`Letter`]; this order is fixed across all automata and
/// traces built from the same `Props`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Props {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Props {
    pub fn new(names: Vec<String>) -> Result<Props> {
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Partition(format!("duplicate proposition `{n}`")));
            }
        }
        Ok(Props { names, index })
    }

    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Props> {
        Props::new(names.into_iter().map(Into::into).collect())
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownProp(name.to_string()))
    }

    /// Bit mask covering the given proposition names.
    pub fn mask_of<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<u32> {
        let mut mask = 0u32;
        for n in names {
            mask |= 1 << self.index_of(n)?;
        }
        Ok(mask)
    }

    pub fn letter_from_names<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Letter> {
        Ok(Letter(self.mask_of(names)?))
    }

    /// Renders a letter as `a=1 b=0 ...` in proposition order.
    pub fn letter_label(&self, letter: Letter) -> String {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{n}={}", u32::from(letter.contains(i))))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Extends the order with fresh names, keeping existing bits stable.
    pub fn extended(&self, extra: impl IntoIterator<Item = String>) -> Result<Props> {
        let mut names = self.names.clone();
        names.extend(extra);
        Props::new(names)
    }
}

/// A letter: the set of propositions true at one instant, packed into bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(pub u32);

impl Letter {
    pub const EMPTY: Letter = Letter(0);

    pub fn contains(self, bit: usize) -> bool {
        self.0 >> bit & 1 == 1
    }

    pub fn with(self, bit: usize, value: bool) -> Letter {
        if value {
            Letter(self.0 | 1 << bit)
        } else {
            Letter(self.0 & !(1 << bit))
        }
    }
}

/// A finite, nonempty trace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    letters: Vec<Letter>,
}

impl Trace {
    pub fn new(letters: Vec<Letter>) -> Result<Trace> {
        if letters.is_empty() {
            return Err(Error::InvalidInstance("traces must be nonempty".into()));
        }
        Ok(Trace { letters })
    }

    /// Builds a trace from per-instant sets of proposition names.
    pub fn from_sets(props: &Props, sets: &[&[&str]]) -> Result<Trace> {
        let letters = sets
            .iter()
            .map(|s| props.letter_from_names(s.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        Trace::new(letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Letter at 1-based position `i`.
    pub fn letter(&self, i: usize) -> Result<Letter> {
        if i == 0 || i > self.len() {
            return Err(Error::PositionOutOfRange {
                position: i,
                length: self.len(),
            });
        }
        Ok(self.letters[i - 1])
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    True,
    False,
    Atom(usize),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    StrongNext(u32),
    WeakNext(u32),
    Until(u32, u32),
    Release(u32, u32),
    Eventually(u32),
    Always(u32),
}

/// A formula compiled for repeated evaluation over traces.
///
/// Atoms are resolved to bit positions once; `eval` then fills a
/// subformula-by-position table using the satisfaction clauses directly.
#[derive(Debug, Clone)]
pub struct Evaluator {
    nodes: Vec<Node>,
}

impl Evaluator {
    pub fn new(props: &Props, f: &Formula) -> Result<Evaluator> {
        let mut nodes = Vec::new();
        Self::add(props, f, &mut nodes)?;
        Ok(Evaluator { nodes })
    }

    fn add(props: &Props, f: &Formula, nodes: &mut Vec<Node>) -> Result<u32> {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom(a) => Node::Atom(props.index_of(a)?),
            Formula::Not(x) => Node::Not(Self::add(props, x, nodes)?),
            Formula::And(l, r) => {
                Node::And(Self::add(props, l, nodes)?, Self::add(props, r, nodes)?)
            }
            Formula::Or(l, r) => {
                Node::Or(Self::add(props, l, nodes)?, Self::add(props, r, nodes)?)
            }
            Formula::StrongNext(x) => Node::StrongNext(Self::add(props, x, nodes)?),
            Formula::WeakNext(x) => Node::WeakNext(Self::add(props, x, nodes)?),
            Formula::Until(l, r) => {
                Node::Until(Self::add(props, l, nodes)?, Self::add(props, r, nodes)?)
            }
            Formula::Release(l, r) => {
                Node::Release(Self::add(props, l, nodes)?, Self::add(props, r, nodes)?)
            }
            Formula::Eventually(x) => Node::Eventually(Self::add(props, x, nodes)?),
            Formula::Always(x) => Node::Always(Self::add(props, x, nodes)?),
        };
        nodes.push(node);
        Ok((nodes.len() - 1) as u32)
    }

    /// Satisfaction at 1-based position `i` of `t`.
    pub fn eval(&self, t: &Trace, i: usize) -> Result<bool> {
        if i == 0 || i > t.len() {
            return Err(Error::PositionOutOfRange {
                position: i,
                length: t.len(),
            });
        }
        let len = t.len();
        let n = self.nodes.len();
        // vals[node * len + (pos-1)]
        let mut vals = vec![false; n * len];
        let at = |vals: &[bool], node: u32, pos: usize| vals[node as usize * len + pos - 1];
        for (id, node) in self.nodes.iter().enumerate() {
            for pos in 1..=len {
                let v = match *node {
                    Node::True => true,
                    Node::False => false,
                    Node::Atom(bit) => t.letters[pos - 1].contains(bit),
                    Node::Not(x) => !at(&vals, x, pos),
                    Node::And(l, r) => at(&vals, l, pos) && at(&vals, r, pos),
                    Node::Or(l, r) => at(&vals, l, pos) || at(&vals, r, pos),
                    Node::StrongNext(x) => pos < len && at(&vals, x, pos + 1),
                    Node::WeakNext(x) => pos == len || at(&vals, x, pos + 1),
                    Node::Until(l, r) => (pos..=len).any(|j| {
                        at(&vals, r, j) && (pos..j).all(|k| at(&vals, l, k))
                    }),
                    Node::Release(l, r) => (pos..=len).all(|j| {
                        at(&vals, r, j) || (pos..j).any(|k| at(&vals, l, k))
                    }),
                    Node::Eventually(x) => (pos..=len).any(|j| at(&vals, x, j)),
                    Node::Always(x) => (pos..=len).all(|j| at(&vals, x, j)),
                };
                vals[id * len + pos - 1] = v;
            }
        }
        Ok(vals[(n - 1) * len + i - 1])
    }
}

/// Satisfaction of `f` at 1-based position `i` of trace `t`.
///
/// `t ⊨ f` is `eval_trace(props, t, 1, f)`. For evaluating one formula on
/// many traces, build an [`Evaluator`] once instead.
pub fn eval_trace(props: &Props, t: &Trace, i: usize, f: &Formula) -> Result<bool> {
    Evaluator::new(props, f)?.eval(t, i)
}

/// All traces that agree with `t` outside the propositions in `mask`,
/// i.e. every rewriting of the masked bits at every instant. The result has
/// exactly `2^(|mask| * len)` traces, which must fit in `cap_bits`.
pub fn expand_unreliable_mask(t: &Trace, mask: u32, cap_bits: u32) -> Result<Vec<Trace>> {
    let bits: Vec<usize> = (0..32).filter(|b| mask >> b & 1 == 1).collect();
    let slots = (bits.len() * t.len()) as u32;
    if slots > cap_bits {
        return Err(Error::EnumerationCap {
            need: slots,
            cap: cap_bits,
        });
    }
    let mut out = Vec::with_capacity(1usize << slots);
    for assignment in 0u64..(1u64 << slots) {
        let mut letters = t.letters().to_vec();
        let mut slot = 0;
        for letter in letters.iter_mut() {
            for &b in &bits {
                *letter = letter.with(b, assignment >> slot & 1 == 1);
                slot += 1;
            }
        }
        out.push(Trace { letters });
    }
    Ok(out)
}

/// Name-based wrapper around [`expand_unreliable_mask`].
pub fn expand_unreliable<'a>(
    props: &Props,
    t: &Trace,
    vars: impl IntoIterator<Item = &'a str>,
    cap_bits: u32,
) -> Result<Vec<Trace>> {
    expand_unreliable_mask(t, props.mask_of(vars)?, cap_bits)
}

/// Iterates every trace of the given length over `width` propositions.
/// Intended for exhaustive desk-scale checks only.
pub fn all_traces(width: usize, len: usize) -> impl Iterator<Item = Trace> {
    let letters = 1u32 << width;
    let total = (letters as u64).pow(len as u32);
    (0..total).map(move |mut code| {
        let mut ls = Vec::with_capacity(len);
        for _ in 0..len {
            ls.push(Letter((code % letters as u64) as u32));
            code /= letters as u64;
        }
        Trace { letters: ls }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props_ab() -> Props {
        Props::from_names(["a", "b"]).unwrap()
    }

    #[test]
    fn strong_next_fails_at_last_instant() {
        let props = props_ab();
        let t = Trace::from_sets(&props, &[&["a"]]).unwrap();
        let f = Formula::strong_next(Formula::atom("a"));
        assert!(!eval_trace(&props, &t, 1, &f).unwrap());
        let f = Formula::weak_next(Formula::atom("a"));
        assert!(eval_trace(&props, &t, 1, &f).unwrap());
    }

    #[test]
    fn until_finds_a_witness() {
        let props = props_ab();
        let t = Trace::from_sets(&props, &[&["a"], &["b"]]).unwrap();
        let f = Formula::until(Formula::atom("a"), Formula::atom("b"));
        assert!(eval_trace(&props, &t, 1, &f).unwrap());
    }

    #[test]
    fn always_not_on_empty_letters() {
        let props = props_ab();
        let t = Trace::from_sets(&props, &[&[], &[]]).unwrap();
        let f = Formula::always(Formula::not(Formula::atom("a")));
        assert!(eval_trace(&props, &t, 1, &f).unwrap());
    }

    #[test]
    fn position_out_of_range_is_an_error() {
        let props = props_ab();
        let t = Trace::from_sets(&props, &[&["a"]]).unwrap();
        assert!(matches!(
            eval_trace(&props, &t, 2, &Formula::True),
            Err(Error::PositionOutOfRange { .. })
        ));
        assert!(matches!(
            eval_trace(&props, &t, 0, &Formula::True),
            Err(Error::PositionOutOfRange { .. })
        ));
    }

    #[test]
    fn expansion_counts_rewritings() {
        let props = Props::from_names(["u", "a"]).unwrap();
        let t = Trace::from_sets(&props, &[&["u", "a"]]).unwrap();
        let exp = expand_unreliable(&props, &t, ["u"], 20).unwrap();
        assert_eq!(exp.len(), 2);
        assert!(exp.contains(&Trace::from_sets(&props, &[&["a"]]).unwrap()));
        assert!(exp.contains(&t));

        let id = expand_unreliable(&props, &t, [], 20).unwrap();
        assert_eq!(id, vec![t.clone()]);

        let two = Trace::from_sets(&props, &[&[], &[]]).unwrap();
        assert_eq!(expand_unreliable(&props, &two, ["u"], 20).unwrap().len(), 4);
    }

    #[test]
    fn expansion_respects_the_cap() {
        let props = Props::from_names(["u"]).unwrap();
        let t = Trace::new(vec![Letter::EMPTY; 21]).unwrap();
        assert!(matches!(
            expand_unreliable(&props, &t, ["u"], 20),
            Err(Error::EnumerationCap { need: 21, cap: 20 })
        ));
    }

    #[test]
    fn empty_traces_are_rejected() {
        assert!(Trace::new(vec![]).is_err());
    }
}
