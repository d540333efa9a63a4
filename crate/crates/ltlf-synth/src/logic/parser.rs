//! Parser for the Syft-style LTLf surface syntax.
//!
//! Beware the operator letters: `N` is *strong* next and `X` is *weak* next.
//! This matches the input format of the synthesis tooling the `.ltlf` files
//! come from, even though it is the opposite of the usual LTL convention.
//!
//! Grammar, loosest to tightest binding:
//! `<->`, `->` (right associative), `|`, `&`, `U`/`R` (right associative),
//! unary `! N X G F`, then atoms, `true`, `false`, and parentheses.

use crate::error::{Error, Result};
use crate::logic::Formula;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Until,
    Release,
    StrongNext,
    WeakNext,
    Always,
    Eventually,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Until => "`U`".into(),
            Tok::Release => "`R`".into(),
            Tok::StrongNext => "`N`".into(),
            Tok::WeakNext => "`X`".into(),
            Tok::Always => "`G`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Not, col));
                i += 1;
            }
            '&' => {
                toks.push((Tok::And, col));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Or, col));
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    toks.push((Tok::Implies, col));
                    i += 2;
                } else {
                    return Err(err(col, "unknown token `-` (expected `->`)"));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    toks.push((Tok::Iff, col));
                    i += 3;
                } else {
                    return Err(err(col, "unknown token `<` (expected `<->`)"));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "U" => Tok::Until,
                    "R" => Tok::Release,
                    "N" => Tok::StrongNext,
                    "X" => Tok::WeakNext,
                    "G" => Tok::Always,
                    "F" => Tok::Eventually,
                    _ => Tok::Ident(word),
                };
                toks.push((tok, col));
            }
            other => return Err(err(col, format!("unknown token `{other}`"))),
        }
    }
    toks.push((Tok::Eof, chars.len() + 1));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn parse_iff(&mut self) -> Result<Formula> {
        let lhs = self.parse_implies()?;
        if *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.parse_iff()?;
            Ok(Formula::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_implies(&mut self) -> Result<Formula> {
        let lhs = self.parse_or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.parse_implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_or(&mut self) -> Result<Formula> {
        let mut lhs = self.parse_and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Formula> {
        let mut lhs = self.parse_until()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.parse_until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn parse_until(&mut self) -> Result<Formula> {
        let lhs = self.parse_unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                let rhs = self.parse_until()?;
                Ok(Formula::until(lhs, rhs))
            }
            Tok::Release => {
                self.bump();
                let rhs = self.parse_until()?;
                Ok(Formula::release(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn parse_unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.parse_unary()?))
            }
            Tok::StrongNext => {
                self.bump();
                Ok(Formula::strong_next(self.parse_unary()?))
            }
            Tok::WeakNext => {
                self.bump();
                Ok(Formula::weak_next(self.parse_unary()?))
            }
            Tok::Always => {
                self.bump();
                Ok(Formula::always(self.parse_unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.parse_unary()?))
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Formula> {
        let col = self.col();
        match self.bump() {
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Ident(name) => Ok(Formula::Atom(name)),
            Tok::LParen => {
                let inner = self.parse_iff()?;
                let col = self.col();
                match self.bump() {
                    Tok::RParen => Ok(inner),
                    t => Err(err(col, format!("expected `)`, found {}", t.describe()))),
                }
            }
            t => Err(err(col, format!("expected a formula, found {}", t.describe()))),
        }
    }
}

/// Parses a single LTLf formula.
pub fn parse_ltlf(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(err(1, "empty input"));
    }
    let mut p = Parser { toks, pos: 0 };
    let f = p.parse_iff()?;
    if *p.peek() != Tok::Eof {
        return Err(err(
            p.col(),
            format!("unexpected {} after formula", p.peek().describe()),
        ));
    }
    Ok(f)
}

/// Parses a `.ltlf` specification file: exactly two nonempty lines, the main
/// formula followed by the backup formula.
pub fn parse_ltlf_file(text: &str) -> Result<(Formula, Formula)> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty())
        .collect();
    if lines.len() != 2 {
        return Err(Error::Syntax {
            column: 1,
            message: format!(
                "a .ltlf file must contain exactly two nonempty lines (main and backup formula), found {}",
                lines.len()
            ),
        });
    }
    Ok((parse_ltlf(lines[0])?, parse_ltlf(lines[1])?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_implication_under_always() {
        let f = parse_ltlf("G(a -> N(b))").unwrap();
        let expected = Formula::always(Formula::or(
            Formula::not(Formula::atom("a")),
            Formula::strong_next(Formula::atom("b")),
        ));
        assert_eq!(f, expected);
    }

    #[test]
    fn parses_until() {
        let f = parse_ltlf("a U b").unwrap();
        assert_eq!(f, Formula::until(Formula::atom("a"), Formula::atom("b")));
    }

    #[test]
    fn unbalanced_paren_reports_column() {
        let e = parse_ltlf("F(").unwrap_err();
        match e {
            Error::Syntax { column, .. } => assert_eq!(column, 3),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(parse_ltlf("   "), Err(Error::Syntax { .. })));
    }

    #[test]
    fn unknown_token_is_rejected() {
        let e = parse_ltlf("a % b").unwrap_err();
        match e {
            Error::Syntax { column, message } => {
                assert_eq!(column, 3);
                assert!(message.contains('%'));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn precedence_binds_until_tighter_than_and() {
        // a U b & c  ==  (a U b) & c
        let f = parse_ltlf("a U b & c").unwrap();
        assert_eq!(
            f,
            Formula::and(
                Formula::until(Formula::atom("a"), Formula::atom("b")),
                Formula::atom("c")
            )
        );
    }

    #[test]
    fn implies_is_right_associative() {
        let f = parse_ltlf("a -> b -> c").unwrap();
        assert_eq!(
            f,
            Formula::implies(
                Formula::atom("a"),
                Formula::implies(Formula::atom("b"), Formula::atom("c"))
            )
        );
    }

    #[test]
    fn ltlf_file_requires_two_lines() {
        assert!(parse_ltlf_file("a\nb\n").is_ok());
        assert!(parse_ltlf_file("a\r\nb\r\n").is_ok());
        assert!(parse_ltlf_file("a\n").is_err());
        assert!(parse_ltlf_file("a\nb\nc\n").is_err());
    }
}
