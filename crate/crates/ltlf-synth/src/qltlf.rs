//! DFA construction for prenex quantified LTLf.
//!
//! Quantifier blocks are processed innermost first. An existential block is
//! existential abstraction over the block variables followed by
//! determinization; a universal block runs the same step between two
//! complementations. Quantified variables stay in the alphabet; the resulting
//! language is invariant under rewriting them.

use crate::automata::{complement, determinize, exist_abstract, Dfa};
use crate::compile::ltlf_to_dfa;
use crate::error::{in_stage, Limits, Result, Stage};
use crate::logic::{Props, QFormula, Quantifier};

/// One maximal run of equally-kinded quantifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantifierBlock {
    pub kind: Quantifier,
    pub variables: Vec<String>,
}

/// Splits a prefix into maximal blocks of one quantifier kind, outermost
/// first.
pub fn quantifier_blocks(qf: &QFormula) -> Vec<QuantifierBlock> {
    let mut blocks: Vec<QuantifierBlock> = Vec::new();
    for (kind, var) in qf.prefix() {
        match blocks.last_mut() {
            Some(block) if block.kind == *kind => block.variables.push(var.clone()),
            _ => blocks.push(QuantifierBlock {
                kind: *kind,
                variables: vec![var.clone()],
            }),
        }
    }
    blocks
}

/// Compiles a prenex quantified formula into a DFA over `props`.
///
/// All matrix atoms and all quantified variables must be in `props`. The
/// accepted language does not depend on the quantified variables' bits.
pub fn qltlf_to_dfa(qf: &QFormula, props: &Props, limits: &Limits) -> Result<Dfa> {
    for (_, v) in qf.prefix() {
        props.index_of(v)?;
    }
    let mut dfa = ltlf_to_dfa(qf.matrix(), props, limits)?;
    for block in quantifier_blocks(qf).iter().rev() {
        let mask = props.mask_of(block.variables.iter().map(String::as_str))?;
        dfa = in_stage(
            Stage::Qltlf,
            match block.kind {
                Quantifier::Exists => {
                    let abstracted = exist_abstract(&dfa.to_nfa(), mask, limits)?;
                    determinize(&abstracted, limits)
                }
                // forall X. f  ==  !exists X. !f
                Quantifier::Forall => {
                    let negated = complement(&dfa);
                    let abstracted = exist_abstract(&negated.to_nfa(), mask, limits)?;
                    Ok(complement(&determinize(&abstracted, limits)?))
                }
            },
        )?;
    }
    Ok(dfa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{all_traces, eval_qltlf, eval_trace, parse_ltlf, Formula};

    fn props_ua() -> Props {
        Props::from_names(["a", "u"]).unwrap()
    }

    #[test]
    fn empty_prefix_is_the_plain_compilation() {
        let props = props_ua();
        let matrix = parse_ltlf("a U u").unwrap();
        let qf = QFormula::new(vec![], matrix.clone()).unwrap();
        let d = qltlf_to_dfa(&qf, &props, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert_eq!(
                    d.accepts(&t).unwrap(),
                    eval_trace(&props, &t, 1, &matrix).unwrap()
                );
            }
        }
    }

    #[test]
    fn vacuous_forall_keeps_the_language() {
        let props = props_ua();
        let matrix = Formula::atom("a");
        let qf = QFormula::new(vec![(Quantifier::Forall, "u".into())], matrix.clone()).unwrap();
        let d = qltlf_to_dfa(&qf, &props, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert_eq!(
                    d.accepts(&t).unwrap(),
                    eval_trace(&props, &t, 1, &matrix).unwrap()
                );
            }
        }
    }

    #[test]
    fn exists_can_copy_another_variable() {
        // exists u. G (u <-> a) accepts every trace: set u to mirror a.
        let props = props_ua();
        let matrix = parse_ltlf("G (u <-> a)").unwrap();
        let qf = QFormula::new(vec![(Quantifier::Exists, "u".into())], matrix).unwrap();
        let d = qltlf_to_dfa(&qf, &props, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert!(d.accepts(&t).unwrap());
            }
        }
    }

    #[test]
    fn agrees_with_the_enumeration_oracle() {
        let props = props_ua();
        let corpus = [
            ("F u", vec![(Quantifier::Exists, "u".to_string())]),
            ("F u", vec![(Quantifier::Forall, "u".to_string())]),
            ("G (u -> a)", vec![(Quantifier::Forall, "u".to_string())]),
            ("a U u", vec![(Quantifier::Exists, "u".to_string())]),
            ("X (u <-> a)", vec![(Quantifier::Forall, "u".to_string())]),
        ];
        for (text, prefix) in corpus {
            let matrix = parse_ltlf(text).unwrap();
            let qf = QFormula::new(prefix, matrix).unwrap();
            let d = qltlf_to_dfa(&qf, &props, &Limits::default()).unwrap();
            for len in 1..=3 {
                for t in all_traces(2, len) {
                    assert_eq!(
                        d.accepts(&t).unwrap(),
                        eval_qltlf(&props, &t, 1, &qf, 20).unwrap(),
                        "{text} on {t:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn quantified_bits_are_irrelevant() {
        let props = props_ua();
        let matrix = parse_ltlf("(a U u) | G u").unwrap();
        let qf = QFormula::new(vec![(Quantifier::Forall, "u".into())], matrix).unwrap();
        let d = qltlf_to_dfa(&qf, &props, &Limits::default()).unwrap();
        for len in 1..=3 {
            for t in all_traces(2, len) {
                for t2 in crate::logic::expand_unreliable(&props, &t, ["u"], 20).unwrap() {
                    assert_eq!(d.accepts(&t).unwrap(), d.accepts(&t2).unwrap());
                }
            }
        }
    }
}
