//! LTLf abstract syntax over finite, nonempty traces.

use std::collections::BTreeSet;
use std::fmt;

/// An LTLf formula.
///
/// `->` and `<->` from the surface syntax are desugared at parse time, so the
/// tree only ever contains the nodes below. The derived operators (weak next,
/// eventually, always, release) are kept as distinct nodes; the evaluator
/// treats them exactly as their definitional expansions
/// (`X f = !N !f`, `F f = true U f`, `G f = !F !f`, `f R g = !(!f U !g)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    StrongNext(Box<Formula>),
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn strong_next(f: Formula) -> Formula {
        Formula::StrongNext(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Formula {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Formula {
        Formula::Until(Box::new(l), Box::new(r))
    }

    pub fn release(l: Formula, r: Formula) -> Formula {
        Formula::Release(Box::new(l), Box::new(r))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    /// `l -> r`, desugared to `!l | r`.
    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::or(Formula::not(l), r)
    }

    /// `l <-> r`, desugared to `(!l | r) & (!r | l)`.
    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::and(
            Formula::or(Formula::not(l.clone()), r.clone()),
            Formula::or(Formula::not(r), l),
        )
    }

    /// Conjunction of all formulas in the iterator; `true` when empty.
    pub fn big_and(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = items.into_iter().collect();
        match items.len() {
            0 => Formula::True,
            1 => items.pop().unwrap(),
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(f) = items.pop() {
                    acc = Formula::and(f, acc);
                }
                acc
            }
        }
    }

    /// Disjunction of all formulas in the iterator; `false` when empty.
    pub fn big_or(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = items.into_iter().collect();
        match items.len() {
            0 => Formula::False,
            1 => items.pop().unwrap(),
            _ => {
                let mut acc = items.pop().unwrap();
                while let Some(f) = items.pop() {
                    acc = Formula::or(f, acc);
                }
                acc
            }
        }
    }

    /// `N^k f` (k nested strong nexts).
    pub fn strong_next_n(f: Formula, k: usize) -> Formula {
        (0..k).fold(f, |acc, _| Formula::strong_next(acc))
    }

    /// `X^k f` (k nested weak nexts).
    pub fn weak_next_n(f: Formula, k: usize) -> Formula {
        (0..k).fold(f, |acc, _| Formula::weak_next(acc))
    }

    /// The set of atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f)
            | Formula::StrongNext(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Always(f) => f.collect_atoms(out),
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Until(l, r)
            | Formula::Release(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Rewrites every derived operator into the core fragment
    /// (atoms, boolean connectives, strong next, until).
    pub fn expand_derived(&self) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Not(f) => Formula::not(f.expand_derived()),
            Formula::And(l, r) => Formula::and(l.expand_derived(), r.expand_derived()),
            Formula::Or(l, r) => Formula::or(l.expand_derived(), r.expand_derived()),
            Formula::StrongNext(f) => Formula::strong_next(f.expand_derived()),
            Formula::WeakNext(f) => Formula::not(Formula::strong_next(Formula::not(
                f.expand_derived(),
            ))),
            Formula::Until(l, r) => Formula::until(l.expand_derived(), r.expand_derived()),
            Formula::Release(l, r) => Formula::not(Formula::until(
                Formula::not(l.expand_derived()),
                Formula::not(r.expand_derived()),
            )),
            Formula::Eventually(f) => Formula::until(Formula::True, f.expand_derived()),
            Formula::Always(f) => Formula::not(Formula::until(
                Formula::True,
                Formula::not(f.expand_derived()),
            )),
        }
    }

    /// Renames every occurrence of atom `from` to `to`.
    pub fn rename_atom(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => {
                if a == from {
                    Formula::atom(to)
                } else {
                    self.clone()
                }
            }
            Formula::Not(f) => Formula::not(f.rename_atom(from, to)),
            Formula::And(l, r) => {
                Formula::and(l.rename_atom(from, to), r.rename_atom(from, to))
            }
            Formula::Or(l, r) => Formula::or(l.rename_atom(from, to), r.rename_atom(from, to)),
            Formula::StrongNext(f) => Formula::strong_next(f.rename_atom(from, to)),
            Formula::WeakNext(f) => Formula::weak_next(f.rename_atom(from, to)),
            Formula::Until(l, r) => {
                Formula::until(l.rename_atom(from, to), r.rename_atom(from, to))
            }
            Formula::Release(l, r) => {
                Formula::release(l.rename_atom(from, to), r.rename_atom(from, to))
            }
            Formula::Eventually(f) => Formula::eventually(f.rename_atom(from, to)),
            Formula::Always(f) => Formula::always(f.rename_atom(from, to)),
        }
    }

}

/// Prints in the parseable surface syntax: binary operators are always
/// parenthesized and unary operands need no extra wrapping, so
/// `parse(print(f)) == f` holds structurally.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!{x}"),
            Formula::StrongNext(x) => write!(f, "N {x}"),
            Formula::WeakNext(x) => write!(f, "X {x}"),
            Formula::Eventually(x) => write!(f, "F {x}"),
            Formula::Always(x) => write!(f, "G {x}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Until(l, r) => write!(f, "({l} U {r})"),
            Formula::Release(l, r) => write!(f, "({l} R {r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trip_shape() {
        let f = Formula::always(Formula::implies(
            Formula::atom("a"),
            Formula::strong_next(Formula::atom("b")),
        ));
        assert_eq!(f.to_string(), "G (!a | N b)");
    }

    #[test]
    fn atoms_collects_all_names() {
        let f = Formula::until(
            Formula::atom("a"),
            Formula::and(Formula::atom("b"), Formula::not(Formula::atom("a"))),
        );
        let atoms = f.atoms();
        assert_eq!(
            atoms.into_iter().collect::<Vec<_>>(),
            vec!["a".to_string(), "b".to_string()]
        );
    }

    #[test]
    fn big_and_of_nothing_is_true() {
        assert_eq!(Formula::big_and([]), Formula::True);
        assert_eq!(Formula::big_or([]), Formula::False);
    }
}
