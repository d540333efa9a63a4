//! Second-order quantified LTLf: nested syntax, prenex normal form, and the
//! brute-force semantics used as an oracle.
//!
//! A quantifier ranges over all rewritings of one proposition across the
//! whole trace, so the enumeration oracle is exponential in
//! `trace length x quantifier count` and guarded by a bit cap.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::logic::trace::{Props, Trace};
use crate::logic::{eval_trace, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// Quantified LTLf with arbitrary nesting.
///
/// Quantifiers may appear under boolean connectives; prenexing under temporal
/// operators is not supported and rejected by [`to_pnf`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Qltlf {
    True,
    False,
    Atom(String),
    Not(Box<Qltlf>),
    And(Box<Qltlf>, Box<Qltlf>),
    Or(Box<Qltlf>, Box<Qltlf>),
    StrongNext(Box<Qltlf>),
    WeakNext(Box<Qltlf>),
    Until(Box<Qltlf>, Box<Qltlf>),
    Release(Box<Qltlf>, Box<Qltlf>),
    Eventually(Box<Qltlf>),
    Always(Box<Qltlf>),
    Exists(String, Box<Qltlf>),
    Forall(String, Box<Qltlf>),
}

impl From<Formula> for Qltlf {
    fn from(f: Formula) -> Qltlf {
        match f {
            Formula::True => Qltlf::True,
            Formula::False => Qltlf::False,
            Formula::Atom(a) => Qltlf::Atom(a),
            Formula::Not(x) => Qltlf::Not(Box::new((*x).into())),
            Formula::And(l, r) => Qltlf::And(Box::new((*l).into()), Box::new((*r).into())),
            Formula::Or(l, r) => Qltlf::Or(Box::new((*l).into()), Box::new((*r).into())),
            Formula::StrongNext(x) => Qltlf::StrongNext(Box::new((*x).into())),
            Formula::WeakNext(x) => Qltlf::WeakNext(Box::new((*x).into())),
            Formula::Until(l, r) => Qltlf::Until(Box::new((*l).into()), Box::new((*r).into())),
            Formula::Release(l, r) => {
                Qltlf::Release(Box::new((*l).into()), Box::new((*r).into()))
            }
            Formula::Eventually(x) => Qltlf::Eventually(Box::new((*x).into())),
            Formula::Always(x) => Qltlf::Always(Box::new((*x).into())),
        }
    }
}

impl Qltlf {
    pub fn not(f: Qltlf) -> Qltlf {
        Qltlf::Not(Box::new(f))
    }

    pub fn and(l: Qltlf, r: Qltlf) -> Qltlf {
        Qltlf::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Qltlf, r: Qltlf) -> Qltlf {
        Qltlf::Or(Box::new(l), Box::new(r))
    }

    pub fn exists(var: impl Into<String>, f: Qltlf) -> Qltlf {
        Qltlf::Exists(var.into(), Box::new(f))
    }

    pub fn forall(var: impl Into<String>, f: Qltlf) -> Qltlf {
        Qltlf::Forall(var.into(), Box::new(f))
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Qltlf::True | Qltlf::False | Qltlf::Atom(_) => false,
            Qltlf::Not(f)
            | Qltlf::StrongNext(f)
            | Qltlf::WeakNext(f)
            | Qltlf::Eventually(f)
            | Qltlf::Always(f) => f.has_quantifier(),
            Qltlf::And(l, r) | Qltlf::Or(l, r) | Qltlf::Until(l, r) | Qltlf::Release(l, r) => {
                l.has_quantifier() || r.has_quantifier()
            }
            Qltlf::Exists(_, _) | Qltlf::Forall(_, _) => true,
        }
    }

    fn quantifier_count(&self) -> usize {
        match self {
            Qltlf::True | Qltlf::False | Qltlf::Atom(_) => 0,
            Qltlf::Not(f)
            | Qltlf::StrongNext(f)
            | Qltlf::WeakNext(f)
            | Qltlf::Eventually(f)
            | Qltlf::Always(f) => f.quantifier_count(),
            Qltlf::And(l, r) | Qltlf::Or(l, r) | Qltlf::Until(l, r) | Qltlf::Release(l, r) => {
                l.quantifier_count() + r.quantifier_count()
            }
            Qltlf::Exists(_, f) | Qltlf::Forall(_, f) => 1 + f.quantifier_count(),
        }
    }

    /// Converts a quantifier-free tree back to a plain formula.
    pub fn to_formula(&self) -> Option<Formula> {
        Some(match self {
            Qltlf::True => Formula::True,
            Qltlf::False => Formula::False,
            Qltlf::Atom(a) => Formula::Atom(a.clone()),
            Qltlf::Not(f) => Formula::not(f.to_formula()?),
            Qltlf::And(l, r) => Formula::and(l.to_formula()?, r.to_formula()?),
            Qltlf::Or(l, r) => Formula::or(l.to_formula()?, r.to_formula()?),
            Qltlf::StrongNext(f) => Formula::strong_next(f.to_formula()?),
            Qltlf::WeakNext(f) => Formula::weak_next(f.to_formula()?),
            Qltlf::Until(l, r) => Formula::until(l.to_formula()?, r.to_formula()?),
            Qltlf::Release(l, r) => Formula::release(l.to_formula()?, r.to_formula()?),
            Qltlf::Eventually(f) => Formula::eventually(f.to_formula()?),
            Qltlf::Always(f) => Formula::always(f.to_formula()?),
            Qltlf::Exists(_, _) | Qltlf::Forall(_, _) => return None,
        })
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Qltlf::True | Qltlf::False => {}
            Qltlf::Atom(a) => {
                out.insert(a.clone());
            }
            Qltlf::Not(f)
            | Qltlf::StrongNext(f)
            | Qltlf::WeakNext(f)
            | Qltlf::Eventually(f)
            | Qltlf::Always(f) => f.collect_names(out),
            Qltlf::And(l, r) | Qltlf::Or(l, r) | Qltlf::Until(l, r) | Qltlf::Release(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
            Qltlf::Exists(v, f) | Qltlf::Forall(v, f) => {
                out.insert(v.clone());
                f.collect_names(out);
            }
        }
    }

    /// Brute-force satisfaction at position `i`, enumerating all rewritings
    /// at every quantifier. Desk-scale oracle only.
    pub fn eval(&self, props: &Props, t: &Trace, i: usize, cap_bits: u32) -> Result<bool> {
        let need = (self.quantifier_count() * t.len()) as u32;
        if need > cap_bits {
            return Err(Error::EnumerationCap {
                need,
                cap: cap_bits,
            });
        }
        self.eval_inner(props, t, i)
    }

    fn eval_inner(&self, props: &Props, t: &Trace, i: usize) -> Result<bool> {
        Ok(match self {
            Qltlf::Exists(v, f) => {
                let bit = props.index_of(v)?;
                rewritings(t, bit).try_fold(false, |acc, t2| -> Result<bool> {
                    Ok(acc || f.eval_inner(props, &t2, i)?)
                })?
            }
            // forall X. f  ==  !exists X. !f
            Qltlf::Forall(v, f) => !Qltlf::exists(v.clone(), Qltlf::not((**f).clone()))
                .eval_inner(props, t, i)?,
            Qltlf::True => true,
            Qltlf::False => false,
            Qltlf::Atom(a) => t.letter(i)?.contains(props.index_of(a)?),
            Qltlf::Not(f) => !f.eval_inner(props, t, i)?,
            Qltlf::And(l, r) => l.eval_inner(props, t, i)? && r.eval_inner(props, t, i)?,
            Qltlf::Or(l, r) => l.eval_inner(props, t, i)? || r.eval_inner(props, t, i)?,
            Qltlf::StrongNext(f) => i < t.len() && f.eval_inner(props, t, i + 1)?,
            Qltlf::WeakNext(f) => i == t.len() || f.eval_inner(props, t, i + 1)?,
            Qltlf::Until(l, r) => {
                let mut holds = false;
                for j in i..=t.len() {
                    if r.eval_inner(props, t, j)? {
                        let mut guard = true;
                        for k in i..j {
                            guard &= l.eval_inner(props, t, k)?;
                        }
                        if guard {
                            holds = true;
                            break;
                        }
                    }
                }
                // Position checks still apply even when the scan short-circuits.
                t.letter(i)?;
                holds
            }
            Qltlf::Release(l, r) => !Qltlf::until(
                Qltlf::not((**l).clone()),
                Qltlf::not((**r).clone()),
            )
            .eval_inner(props, t, i)?,
            Qltlf::Eventually(f) => {
                Qltlf::until(Qltlf::True, (**f).clone()).eval_inner(props, t, i)?
            }
            Qltlf::Always(f) => !Qltlf::eventually_not(f).eval_inner(props, t, i)?,
        })
    }

    fn until(l: Qltlf, r: Qltlf) -> Qltlf {
        Qltlf::Until(Box::new(l), Box::new(r))
    }

    fn eventually_not(f: &Qltlf) -> Qltlf {
        Qltlf::Eventually(Box::new(Qltlf::not(f.clone())))
    }
}

/// All rewritings of one proposition column of the trace.
fn rewritings(t: &Trace, bit: usize) -> impl Iterator<Item = Trace> + '_ {
    let len = t.len();
    (0u64..(1u64 << len)).map(move |assignment| {
        let letters = t
            .letters()
            .iter()
            .enumerate()
            .map(|(p, l)| l.with(bit, assignment >> p & 1 == 1))
            .collect();
        Trace::new(letters).expect("nonempty by construction")
    })
}

/// A quantified formula in prenex normal form: a quantifier prefix over a
/// plain LTLf matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QFormula {
    prefix: Vec<(Quantifier, String)>,
    matrix: Formula,
}

impl QFormula {
    pub fn new(prefix: Vec<(Quantifier, String)>, matrix: Formula) -> Result<QFormula> {
        let mut seen = BTreeSet::new();
        for (_, v) in &prefix {
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidInstance(format!(
                    "duplicate quantified variable `{v}` in prefix"
                )));
            }
        }
        Ok(QFormula { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Formula {
        &self.matrix
    }

    /// Number of quantifier-kind switches in the prefix.
    pub fn alternations(&self) -> usize {
        self.prefix
            .windows(2)
            .filter(|w| w[0].0 != w[1].0)
            .count()
    }

    /// The nested formula this prenex form denotes.
    pub fn to_nested(&self) -> Qltlf {
        let mut f: Qltlf = self.matrix.clone().into();
        for (q, v) in self.prefix.iter().rev() {
            f = match q {
                Quantifier::Exists => Qltlf::exists(v.clone(), f),
                Quantifier::Forall => Qltlf::forall(v.clone(), f),
            };
        }
        f
    }
}

/// Brute-force satisfaction of a prenex formula at position `i`.
pub fn eval_qltlf(
    props: &Props,
    t: &Trace,
    i: usize,
    qf: &QFormula,
    cap_bits: u32,
) -> Result<bool> {
    let need = (qf.prefix.len() * t.len()) as u32;
    if need > cap_bits {
        return Err(Error::EnumerationCap {
            need,
            cap: cap_bits,
        });
    }
    eval_prefix(props, t, i, &qf.prefix, &qf.matrix)
}

fn eval_prefix(
    props: &Props,
    t: &Trace,
    i: usize,
    prefix: &[(Quantifier, String)],
    matrix: &Formula,
) -> Result<bool> {
    match prefix.split_first() {
        None => eval_trace(props, t, i, matrix),
        Some(((q, v), rest)) => {
            let bit = props.index_of(v)?;
            for t2 in rewritings(t, bit) {
                let sub = eval_prefix(props, &t2, i, rest, matrix)?;
                match q {
                    Quantifier::Exists if sub => return Ok(true),
                    Quantifier::Forall if !sub => return Ok(false),
                    _ => {}
                }
            }
            Ok(*q == Quantifier::Forall)
        }
    }
}

/// Pulls all quantifiers into a prefix, renaming captured variables with
/// fresh names where needed. Quantifiers under temporal operators are
/// rejected.
pub fn to_pnf(f: &Qltlf) -> Result<QFormula> {
    let mut used = BTreeSet::new();
    f.collect_names(&mut used);
    let (prefix, matrix) = pnf(f, &mut used)?;
    QFormula::new(prefix, matrix)
}

type Prefix = Vec<(Quantifier, String)>;

fn fresh(base: &str, used: &mut BTreeSet<String>) -> String {
    for k in 1.. {
        let candidate = format!("{base}_{k}");
        if used.insert(candidate.clone()) {
            return candidate;
        }
    }
    unreachable!()
}

/// Renames prefix entry `var` (and its bound occurrences in `matrix`) to a
/// fresh name.
fn rename_entry(
    prefix: &mut Prefix,
    matrix: &mut Formula,
    var: &str,
    used: &mut BTreeSet<String>,
) {
    let new = fresh(var, used);
    for (_, v) in prefix.iter_mut() {
        if v == var {
            *v = new.clone();
            break;
        }
    }
    *matrix = matrix.rename_atom(var, &new);
}

fn pnf(f: &Qltlf, used: &mut BTreeSet<String>) -> Result<(Prefix, Formula)> {
    if !f.has_quantifier() {
        return Ok((Vec::new(), f.to_formula().expect("quantifier-free")));
    }
    match f {
        Qltlf::Not(inner) => {
            let (mut prefix, matrix) = pnf(inner, used)?;
            for (q, _) in prefix.iter_mut() {
                *q = q.dual();
            }
            Ok((prefix, Formula::not(matrix)))
        }
        Qltlf::And(l, r) | Qltlf::Or(l, r) => {
            let (mut p1, mut m1) = pnf(l, used)?;
            let (mut p2, mut m2) = pnf(r, used)?;
            // A variable bound on one side must not capture free occurrences
            // on the other, and the two prefixes must stay disjoint.
            let vars1: Vec<String> = p1.iter().map(|(_, v)| v.clone()).collect();
            for v in &vars1 {
                let clashes =
                    m2.atoms().contains(v) || p2.iter().any(|(_, w)| w == v);
                if clashes {
                    rename_entry(&mut p1, &mut m1, v, used);
                }
            }
            let vars2: Vec<String> = p2.iter().map(|(_, v)| v.clone()).collect();
            for v in &vars2 {
                if m1.atoms().contains(v) {
                    rename_entry(&mut p2, &mut m2, v, used);
                }
            }
            p1.extend(p2);
            let matrix = match f {
                Qltlf::And(_, _) => Formula::and(m1, m2),
                _ => Formula::or(m1, m2),
            };
            Ok((p1, matrix))
        }
        Qltlf::Exists(v, inner) | Qltlf::Forall(v, inner) => {
            let (mut prefix, mut matrix) = pnf(inner, used)?;
            // An inner binder of the same name shadows this one; rename the
            // inner occurrence so the prefix stays duplicate-free.
            if prefix.iter().any(|(_, w)| w == v) {
                rename_entry(&mut prefix, &mut matrix, v, used);
            }
            let q = match f {
                Qltlf::Exists(_, _) => Quantifier::Exists,
                _ => Quantifier::Forall,
            };
            let mut full = vec![(q, v.clone())];
            full.extend(prefix);
            Ok((full, matrix))
        }
        // has_quantifier() is true here, so a quantifier sits under a
        // temporal operator.
        Qltlf::StrongNext(_)
        | Qltlf::WeakNext(_)
        | Qltlf::Until(_, _)
        | Qltlf::Release(_, _)
        | Qltlf::Eventually(_)
        | Qltlf::Always(_) => Err(Error::QuantifierUnderTemporal),
        Qltlf::True | Qltlf::False | Qltlf::Atom(_) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props_u() -> Props {
        Props::from_names(["u", "a"]).unwrap()
    }

    #[test]
    fn exists_finds_a_witness() {
        let props = props_u();
        let t = Trace::from_sets(&props, &[&[]]).unwrap();
        let qf = QFormula::new(
            vec![(Quantifier::Exists, "u".into())],
            Formula::atom("u"),
        )
        .unwrap();
        assert!(eval_qltlf(&props, &t, 1, &qf, 20).unwrap());
    }

    #[test]
    fn forall_finds_a_counterexample() {
        let props = props_u();
        let t = Trace::from_sets(&props, &[&[]]).unwrap();
        let qf = QFormula::new(
            vec![(Quantifier::Forall, "u".into())],
            Formula::atom("u"),
        )
        .unwrap();
        assert!(!eval_qltlf(&props, &t, 1, &qf, 20).unwrap());
    }

    #[test]
    fn irrelevant_quantifier_is_transparent() {
        let props = props_u();
        let t = Trace::from_sets(&props, &[&["a"]]).unwrap();
        let qf = QFormula::new(
            vec![(Quantifier::Forall, "u".into())],
            Formula::atom("a"),
        )
        .unwrap();
        assert!(eval_qltlf(&props, &t, 1, &qf, 20).unwrap());
    }

    #[test]
    fn eval_rejects_oversized_enumeration() {
        let props = props_u();
        let t = Trace::new(vec![crate::logic::trace::Letter::EMPTY; 21]).unwrap();
        let qf = QFormula::new(
            vec![(Quantifier::Forall, "u".into())],
            Formula::atom("a"),
        )
        .unwrap();
        assert!(matches!(
            eval_qltlf(&props, &t, 1, &qf, 20),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn pnf_pulls_a_forall_block_over_a_conjunction() {
        // phi_m & forall u1. forall u2. phi_b, with u1,u2 not free in phi_m
        let f = Qltlf::and(
            Qltlf::Atom("a".into()),
            Qltlf::forall(
                "u1",
                Qltlf::forall("u2", Qltlf::Atom("u1".into())),
            ),
        );
        let qf = to_pnf(&f).unwrap();
        assert_eq!(
            qf.prefix(),
            &[
                (Quantifier::Forall, "u1".to_string()),
                (Quantifier::Forall, "u2".to_string())
            ]
        );
        assert_eq!(
            qf.matrix(),
            &Formula::and(Formula::atom("a"), Formula::atom("u1"))
        );
        assert_eq!(qf.alternations(), 0);
    }

    #[test]
    fn pnf_renames_when_the_bound_name_is_free_on_the_other_side() {
        // u & forall u. u   ==>   forall u_1. (u & u_1)
        let f = Qltlf::and(
            Qltlf::Atom("u".into()),
            Qltlf::forall("u", Qltlf::Atom("u".into())),
        );
        let qf = to_pnf(&f).unwrap();
        assert_eq!(qf.prefix(), &[(Quantifier::Forall, "u_1".to_string())]);
        assert_eq!(
            qf.matrix(),
            &Formula::and(Formula::atom("u"), Formula::atom("u_1"))
        );
    }

    #[test]
    fn pnf_is_identity_on_prenex_input() {
        let qf = QFormula::new(
            vec![
                (Quantifier::Forall, "u".into()),
                (Quantifier::Exists, "v".into()),
            ],
            Formula::or(Formula::atom("u"), Formula::atom("v")),
        )
        .unwrap();
        let again = to_pnf(&qf.to_nested()).unwrap();
        assert_eq!(again, qf);
        assert_eq!(again.alternations(), 1);
    }

    #[test]
    fn pnf_dualizes_negated_quantifiers() {
        let f = Qltlf::not(Qltlf::exists("u", Qltlf::Atom("u".into())));
        let qf = to_pnf(&f).unwrap();
        assert_eq!(qf.prefix(), &[(Quantifier::Forall, "u".to_string())]);
        assert_eq!(qf.matrix(), &Formula::not(Formula::atom("u")));
    }

    #[test]
    fn pnf_rejects_quantifiers_under_temporal_operators() {
        let f = Qltlf::Always(Box::new(Qltlf::exists("u", Qltlf::Atom("u".into()))));
        assert!(matches!(
            to_pnf(&f),
            Err(Error::QuantifierUnderTemporal)
        ));
    }

    #[test]
    fn prefix_names_must_be_distinct() {
        assert!(QFormula::new(
            vec![
                (Quantifier::Forall, "u".into()),
                (Quantifier::Exists, "u".into())
            ],
            Formula::True
        )
        .is_err());
    }
}
