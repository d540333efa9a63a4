//! Variable partitions: agent outputs, reliable inputs, unreliable inputs.

use std::fmt;

use crate::error::{Error, Result};
use crate::logic::trace::Props;

/// The split of the propositions into agent outputs `Y`, reliable inputs
/// `X_rel`, and unreliable inputs `X_unr`.
///
/// The global proposition order is `Y`, then `X_rel`, then `X_unr`, each in
/// declaration order. This order defines the bit positions used by every
/// letter, automaton, and trace downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    outputs: Vec<String>,
    reliable: Vec<String>,
    unreliable: Vec<String>,
}

impl Partition {
    pub fn new(
        outputs: Vec<String>,
        reliable: Vec<String>,
        unreliable: Vec<String>,
    ) -> Result<Partition> {
        if outputs.is_empty() && reliable.is_empty() && unreliable.is_empty() {
            return Err(Error::Partition(
                "at least one variable must be declared".into(),
            ));
        }
        let p = Partition {
            outputs,
            reliable,
            unreliable,
        };
        // Props::new rejects duplicates across and within the three lists.
        p.props()?;
        Ok(p)
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn reliable_inputs(&self) -> &[String] {
        &self.reliable
    }

    pub fn unreliable_inputs(&self) -> &[String] {
        &self.unreliable
    }

    /// All inputs, reliable first, matching the `.part` file layout.
    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.reliable
            .iter()
            .chain(self.unreliable.iter())
            .map(String::as_str)
    }

    /// The global proposition order.
    pub fn props(&self) -> Result<Props> {
        Props::new(
            self.outputs
                .iter()
                .chain(self.reliable.iter())
                .chain(self.unreliable.iter())
                .cloned()
                .collect(),
        )
    }

    pub fn output_width(&self) -> usize {
        self.outputs.len()
    }

    pub fn input_width(&self) -> usize {
        self.reliable.len() + self.unreliable.len()
    }

    pub fn width(&self) -> usize {
        self.output_width() + self.input_width()
    }

    /// Bit mask of the unreliable inputs in the global order.
    pub fn unreliable_mask(&self) -> u32 {
        let lo = self.output_width() + self.reliable.len();
        let mut mask = 0;
        for i in 0..self.unreliable.len() {
            mask |= 1 << (lo + i);
        }
        mask
    }

    /// Bit mask of all inputs in the global order.
    pub fn input_mask(&self) -> u32 {
        let mut mask = 0;
        for i in 0..self.input_width() {
            mask |= 1 << (self.output_width() + i);
        }
        mask
    }

    /// Combines an output assignment and an input assignment into a letter
    /// index in the global order.
    pub fn combine(&self, output_bits: u32, input_bits: u32) -> u32 {
        output_bits | input_bits << self.output_width()
    }
}

/// Parses a `.part` file.
///
/// The file lists `.inputs:`, `.outputs:` and optionally `.unobservables:`;
/// every unobservable must also be listed under the inputs (it is an input
/// whose reading cannot be trusted, not a hidden variable).
pub fn parse_partition(text: &str) -> Result<Partition> {
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut unobservables: Option<Vec<String>> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = match line.split_once(':') {
            Some(kv) => kv,
            None => {
                return Err(Error::Partition(format!(
                    "malformed line `{line}` (expected `.section: names...`)"
                )))
            }
        };
        let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        let slot = match key.trim() {
            ".inputs" => &mut inputs,
            ".outputs" => &mut outputs,
            ".unobservables" => &mut unobservables,
            other => {
                return Err(Error::Partition(format!("unknown section `{other}`")));
            }
        };
        if slot.is_some() {
            return Err(Error::Partition(format!("duplicate section `{key}`")));
        }
        *slot = Some(names);
    }
    let inputs = inputs.ok_or_else(|| Error::Partition("missing `.inputs:` section".into()))?;
    let outputs = outputs.ok_or_else(|| Error::Partition("missing `.outputs:` section".into()))?;
    let unobservables = unobservables.unwrap_or_default();

    for u in &unobservables {
        if !inputs.contains(u) {
            return Err(Error::Partition(format!(
                "unobservable `{u}` is not listed under .inputs (unreliable inputs must be listed twice)"
            )));
        }
    }
    for o in &outputs {
        if inputs.contains(o) {
            return Err(Error::Partition(format!(
                "`{o}` is listed as both an input and an output"
            )));
        }
    }
    let reliable: Vec<String> = inputs
        .iter()
        .filter(|i| !unobservables.contains(i))
        .cloned()
        .collect();
    Partition::new(outputs, reliable, unobservables)
}

/// Renders the partition in the `.part` file format; `parse_partition` of the
/// output reconstructs the partition exactly.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            ".inputs: {}",
            self.inputs().collect::<Vec<_>>().join(" ")
        )?;
        writeln!(f, ".outputs: {}", self.outputs.join(" "))?;
        if !self.unreliable.is_empty() {
            writeln!(f, ".unobservables: {}", self.unreliable.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_inputs_by_unobservables() {
        let p = parse_partition(".inputs: a b c\n.outputs: x\n.unobservables: b c").unwrap();
        assert_eq!(p.outputs(), ["x".to_string()]);
        assert_eq!(p.reliable_inputs(), ["a".to_string()]);
        assert_eq!(
            p.unreliable_inputs(),
            ["b".to_string(), "c".to_string()]
        );
        let props = p.props().unwrap();
        assert_eq!(props.names(), ["x", "a", "b", "c"]);
        assert_eq!(p.unreliable_mask(), 0b1100);
    }

    #[test]
    fn unobservables_section_is_optional() {
        let p = parse_partition(".inputs: a\n.outputs: x").unwrap();
        assert!(p.unreliable_inputs().is_empty());
    }

    #[test]
    fn unobservable_must_be_an_input() {
        let e = parse_partition(".inputs: a\n.outputs: x\n.unobservables: q").unwrap_err();
        assert!(matches!(e, Error::Partition(_)));
    }

    #[test]
    fn input_output_overlap_is_rejected() {
        assert!(parse_partition(".inputs: a\n.outputs: a").is_err());
    }

    #[test]
    fn missing_sections_are_rejected() {
        assert!(parse_partition(".inputs: a").is_err());
        assert!(parse_partition(".outputs: a").is_err());
    }

    #[test]
    fn display_round_trips() {
        let p = parse_partition(".inputs: a b c\n.outputs: x y\n.unobservables: c").unwrap();
        let again = parse_partition(&p.to_string()).unwrap();
        assert_eq!(p, again);
    }
}
