//! Graphviz DOT export for automata.
//!
//! Final states are double-circled; edges between the same pair of states are
//! merged, with one letter bit-pattern per label line in the global
//! proposition order. A state whose letters all lead to the same successor
//! gets a single `*` edge.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Dfa, Nfa};
use crate::logic::{Letter, Props};

fn edge_label(props: &Props, letters: &[u32], letter_count: usize) -> String {
    if letters.len() == letter_count {
        return "*".to_string();
    }
    letters
        .iter()
        .map(|&a| props.letter_label(Letter(a)))
        .collect::<Vec<_>>()
        .join("\\n")
}

fn render(
    name: &str,
    initial: u32,
    finals: &[bool],
    edges: BTreeMap<(u32, u32), Vec<u32>>,
    letter_count: usize,
    props: &Props,
) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {name} {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  init [shape=point];").unwrap();
    for (s, fin) in finals.iter().enumerate() {
        let shape = if *fin { "doublecircle" } else { "circle" };
        writeln!(out, "  s{s} [shape={shape}];").unwrap();
    }
    writeln!(out, "  init -> s{initial};").unwrap();
    for ((src, dst), letters) in edges {
        writeln!(
            out,
            "  s{src} -> s{dst} [label=\"{}\"];",
            edge_label(props, &letters, letter_count)
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

pub fn dfa_to_dot(d: &Dfa, props: &Props) -> String {
    let mut edges: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
    for s in 0..d.state_count() as u32 {
        for a in 0..d.letter_count() as u32 {
            edges
                .entry((s, d.step(s, Letter(a))))
                .or_default()
                .push(a);
        }
    }
    render("dfa", d.initial(), d.finals(), edges, d.letter_count(), props)
}

pub fn nfa_to_dot(n: &Nfa, props: &Props) -> String {
    let mut edges: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
    let mut finals = Vec::with_capacity(n.state_count());
    for s in 0..n.state_count() as u32 {
        finals.push(n.is_final(s));
        for a in 0..n.letter_count() as u32 {
            for &dst in n.successors(s, Letter(a)) {
                edges.entry((s, dst)).or_default().push(a);
            }
        }
    }
    render("nfa", n.initial(), &finals, edges, n.letter_count(), props)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Props;

    #[test]
    fn dot_marks_finals_and_labels_bits() {
        let props = Props::from_names(["y", "u"]).unwrap();
        let d = Dfa::new(
            2,
            0,
            vec![false, true],
            vec![vec![0, 1, 0, 1], vec![1, 1, 1, 1]],
        )
        .unwrap();
        let dot = dfa_to_dot(&d, &props);
        assert!(dot.contains("s1 [shape=doublecircle]"));
        assert!(dot.contains("y=1 u=0"));
        assert!(dot.contains("label=\"*\""));
    }
}
