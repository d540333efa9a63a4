//! Export of prenex quantified LTLf to MONA's monadic second-order syntax.
//!
//! The translation maps each operator to its first-order characterization
//! over positions: an atom at position `x` is set membership, strong next
//! introduces an existential successor position, until introduces a witness
//! position with a universally guarded prefix, and the quantifier prefix
//! becomes second-order `ex2`/`all2` quantifiers. `last` names the final
//! position and the top level is instantiated at the first position.
//!
//! The output is deterministic: position variables are named `y1, y2, ...`
//! and guard variables `z1, z2, ...` in order of emission. The program is
//! never executed here; golden-file tests pin the exact bytes.

use std::fmt::Write;

use crate::logic::{Formula, Props, QFormula, Quantifier};

struct Emitter {
    next_y: usize,
    next_z: usize,
}

impl Emitter {
    fn fresh_y(&mut self) -> String {
        self.next_y += 1;
        format!("y{}", self.next_y)
    }

    fn fresh_z(&mut self) -> String {
        self.next_z += 1;
        format!("z{}", self.next_z)
    }

    fn emit(&mut self, f: &Formula, x: &str, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Atom(a) => {
                write!(out, "{x} in {}", a.to_ascii_uppercase()).unwrap();
            }
            Formula::Not(g) => {
                out.push_str("~(");
                self.emit(g, x, out);
                out.push(')');
            }
            Formula::And(l, r) => {
                out.push('(');
                self.emit(l, x, out);
                out.push_str(" & ");
                self.emit(r, x, out);
                out.push(')');
            }
            Formula::Or(l, r) => {
                out.push('(');
                self.emit(l, x, out);
                out.push_str(" | ");
                self.emit(r, x, out);
                out.push(')');
            }
            Formula::StrongNext(g) => {
                let y = self.fresh_y();
                write!(out, "(ex1 {y}: {y} = {x} + 1 & {y} <= last & ").unwrap();
                self.emit(g, &y, out);
                out.push(')');
            }
            Formula::WeakNext(g) => {
                let y = self.fresh_y();
                write!(out, "(all1 {y}: ({y} = {x} + 1 & {y} <= last) => ").unwrap();
                self.emit(g, &y, out);
                out.push(')');
            }
            Formula::Until(l, r) => {
                let y = self.fresh_y();
                let z = self.fresh_z();
                write!(out, "(ex1 {y}: {x} <= {y} & {y} <= last & ").unwrap();
                self.emit(r, &y, out);
                write!(out, " & (all1 {z}: ({x} <= {z} & {z} < {y}) => ").unwrap();
                self.emit(l, &z, out);
                out.push_str("))");
            }
            // f R g  ==  !(!f U !g)
            Formula::Release(l, r) => {
                let rewritten = Formula::not(Formula::until(
                    Formula::not((**l).clone()),
                    Formula::not((**r).clone()),
                ));
                self.emit(&rewritten, x, out);
            }
            Formula::Eventually(g) => {
                let y = self.fresh_y();
                write!(out, "(ex1 {y}: {x} <= {y} & {y} <= last & ").unwrap();
                self.emit(g, &y, out);
                out.push(')');
            }
            Formula::Always(g) => {
                let y = self.fresh_y();
                write!(out, "(all1 {y}: ({x} <= {y} & {y} <= last) => ").unwrap();
                self.emit(g, &y, out);
                out.push(')');
            }
        }
    }
}

/// Renders a prenex quantified formula as a MONA program.
///
/// Free propositions (every name in `props` that is not bound by the prefix)
/// are declared `var2` in the global order; `last` is pinned to the final
/// position; the matrix is instantiated at position 0.
pub fn mso_export(qf: &QFormula, props: &Props) -> String {
    let mut out = String::new();
    out.push_str("m2l-str;\n");
    out.push_str("var1 last;\n");
    out.push_str("all1 p: p <= last;\n");

    let bound: Vec<&str> = qf.prefix().iter().map(|(_, v)| v.as_str()).collect();
    let free: Vec<String> = props
        .names()
        .iter()
        .filter(|n| !bound.contains(&n.as_str()))
        .map(|n| n.to_ascii_uppercase())
        .collect();
    if !free.is_empty() {
        writeln!(out, "var2 {};", free.join(", ")).unwrap();
    }

    let mut emitter = Emitter {
        next_y: 0,
        next_z: 0,
    };
    let mut body = String::new();
    for (q, v) in qf.prefix() {
        let keyword = match q {
            Quantifier::Exists => "ex2",
            Quantifier::Forall => "all2",
        };
        write!(body, "({keyword} {}: ", v.to_ascii_uppercase()).unwrap();
    }
    emitter.emit(qf.matrix(), "0", &mut body);
    for _ in qf.prefix() {
        body.push(')');
    }
    out.push_str(&body);
    out.push_str(";\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_ltlf;

    fn props_ab() -> Props {
        Props::from_names(["a", "b"]).unwrap()
    }

    fn export(text: &str, prefix: Vec<(Quantifier, String)>) -> String {
        let qf = QFormula::new(prefix, parse_ltlf(text).unwrap()).unwrap();
        mso_export(&qf, &props_ab())
    }

    #[test]
    fn atom_is_set_membership_at_the_first_position() {
        let program = export("a", vec![]);
        assert!(program.contains("0 in A"));
        assert!(program.contains("var2 A, B;"));
    }

    #[test]
    fn strong_next_introduces_a_successor_witness() {
        let program = export("N a", vec![]);
        assert!(program.contains("ex1 y1: y1 = 0 + 1 & y1 <= last"));
        assert!(program.contains("y1 in A"));
    }

    #[test]
    fn until_has_a_witness_and_a_guard() {
        let program = export("a U b", vec![]);
        assert!(program.contains("ex1 y1: 0 <= y1 & y1 <= last & y1 in B"));
        assert!(program.contains("all1 z1: (0 <= z1 & z1 < y1) => z1 in A"));
    }

    #[test]
    fn quantifiers_become_second_order() {
        let program = export("a", vec![(Quantifier::Forall, "b".into())]);
        assert!(program.contains("(all2 B: 0 in A)"));
        // bound variables are not declared
        assert!(program.contains("var2 A;"));
        let program = export("a", vec![(Quantifier::Exists, "b".into())]);
        assert!(program.contains("(ex2 B: 0 in A)"));
    }

    #[test]
    fn output_is_deterministic() {
        let a = export("G (a -> F b)", vec![(Quantifier::Forall, "b".into())]);
        let b = export("G (a -> F b)", vec![(Quantifier::Forall, "b".into())]);
        assert_eq!(a, b);
    }
}
