//! A practical subset of SMILES.
//!
//! Supported: organic-subset atoms (and their aromatic lowercase forms),
//! bracket atoms reduced to their element, `-` `=` `#` bonds, branches and
//! ring closures (`1`-`9`, `%nn`). Hydrogens are never materialized. `/`
//! and `\` are read as plain single bonds. Multi-fragment input is rejected.

use std::collections::BTreeMap;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::graph::{Label, LabeledMultigraph};

/// Element symbol to node label. Aromatic atoms share their element's label.
#[derive(Debug, Clone)]
pub struct AtomAlphabet {
    table: IndexMap<String, Label>,
}

impl Default for AtomAlphabet {
    fn default() -> Self {
        Self::new(["C", "N", "O", "S", "F", "Cl", "Br", "I", "P", "B"])
    }
}

impl AtomAlphabet {
    /// Labels are assigned 1, 2, ... in the given order.
    pub fn new<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = IndexMap::new();
        for symbol in symbols {
            let next = table.len() as Label + 1;
            table.entry(symbol.into()).or_insert(next);
        }
        Self { table }
    }

    pub fn label(&self, symbol: &str) -> Option<Label> {
        self.table.get(symbol).copied()
    }

    pub fn symbol(&self, label: Label) -> Option<&str> {
        self.table
            .get_index(label.checked_sub(1)? as usize)
            .map(|(s, _)| s.as_str())
    }

    pub fn len(&self) -> u32 {
        self.table.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    alphabet: &'a AtomAlphabet,
    labels: Vec<Label>,
    edges: Vec<(usize, usize)>,
    orders: Vec<u8>,
}

impl Parser<'_> {
    fn atom_label(&self, element: &str, position: usize) -> Result<Label> {
        let canonical = match element {
            "c" | "n" | "o" | "s" | "p" | "b" => element.to_ascii_uppercase(),
            "se" => "Se".to_string(),
            "as" => "As".to_string(),
            other => other.to_string(),
        };
        self.alphabet
            .label(&canonical)
            .ok_or_else(|| Error::UnknownAtom {
                symbol: element.to_string(),
                position,
            })
    }

    /// Organic-subset atom at the cursor, if any.
    fn organic_atom(&mut self) -> Option<&'static str> {
        let rest = &self.bytes[self.pos..];
        const TWO: [&str; 2] = ["Cl", "Br"];
        for sym in TWO {
            if rest.starts_with(sym.as_bytes()) {
                self.pos += 2;
                return Some(sym);
            }
        }
        let one = match rest.first()? {
            b'B' => "B",
            b'C' => "C",
            b'N' => "N",
            b'O' => "O",
            b'S' => "S",
            b'P' => "P",
            b'F' => "F",
            b'I' => "I",
            b'b' => "b",
            b'c' => "c",
            b'n' => "n",
            b'o' => "o",
            b's' => "s",
            b'p' => "p",
            _ => return None,
        };
        self.pos += 1;
        Some(one)
    }

    /// Parses `[...]` starting at `[` and returns the element symbol.
    fn bracket_atom(&mut self) -> Result<String> {
        let open = self.pos;
        let close = self.bytes[open..]
            .iter()
            .position(|&b| b == b']')
            .map(|off| open + off)
            .ok_or(Error::UnexpectedCharacter {
                ch: '[',
                position: open,
            })?;
        let inner = &self.bytes[open + 1..close];
        self.pos = close + 1;
        let mut i = 0;
        while i < inner.len() && inner[i].is_ascii_digit() {
            i += 1;
        }
        let start = i;
        match inner.get(i) {
            Some(b) if b.is_ascii_uppercase() => {
                i += 1;
                if inner.get(i).is_some_and(|b| b.is_ascii_lowercase()) {
                    let two = std::str::from_utf8(&inner[start..i + 1]).unwrap_or("");
                    if self.alphabet.label(two).is_some() || !matches!(inner[i], b'h' | b'@') {
                        i += 1;
                    }
                }
            }
            Some(b) if b.is_ascii_lowercase() => {
                i += 1;
                if inner[start..].starts_with(b"se") || inner[start..].starts_with(b"as") {
                    i += 1;
                }
            }
            _ => {
                return Err(Error::UnknownAtom {
                    symbol: String::from_utf8_lossy(inner).into_owned(),
                    position: open,
                })
            }
        }
        Ok(String::from_utf8_lossy(&inner[start..i]).into_owned())
    }

    fn add_edge(&mut self, a: usize, b: usize, order: u8) -> Result<()> {
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        self.edges.push((a, b));
        self.orders.push(order);
        Ok(())
    }

    fn run(mut self) -> Result<LabeledMultigraph> {
        if self.bytes.iter().all(|b| b.is_ascii_whitespace()) {
            return Err(Error::EmptyInput);
        }
        let mut branch_stack: Vec<(usize, usize)> = Vec::new();
        let mut previous: Option<usize> = None;
        let mut pending_bond: Option<u8> = None;
        let mut open_rings: BTreeMap<u32, (usize, Option<u8>)> = BTreeMap::new();

        while self.pos < self.bytes.len() {
            let position = self.pos;
            let c = self.bytes[position];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    // trailing whitespace ends the string; anything after is an error
                    if self.bytes[position..]
                        .iter()
                        .all(|b| b.is_ascii_whitespace())
                    {
                        break;
                    }
                    return Err(Error::UnexpectedCharacter {
                        ch: c as char,
                        position,
                    });
                }
                b'-' | b'/' | b'\\' => {
                    pending_bond = Some(1);
                    self.pos += 1;
                }
                b'=' => {
                    pending_bond = Some(2);
                    self.pos += 1;
                }
                b'#' => {
                    pending_bond = Some(3);
                    self.pos += 1;
                }
                b'(' => {
                    let anchor = previous.ok_or(Error::UnbalancedParenthesis(position))?;
                    branch_stack.push((anchor, position));
                    self.pos += 1;
                }
                b')' => {
                    let (anchor, _) = branch_stack
                        .pop()
                        .ok_or(Error::UnbalancedParenthesis(position))?;
                    previous = Some(anchor);
                    self.pos += 1;
                }
                b'.' => return Err(Error::MultipleFragments),
                b'0'..=b'9' | b'%' => {
                    let ring = if c == b'%' {
                        let digits = self
                            .bytes
                            .get(position + 1..position + 3)
                            .ok_or(Error::UnexpectedCharacter { ch: '%', position })?;
                        if !digits.iter().all(u8::is_ascii_digit) {
                            return Err(Error::UnexpectedCharacter { ch: '%', position });
                        }
                        self.pos += 3;
                        ((digits[0] - b'0') * 10 + (digits[1] - b'0')) as u32
                    } else {
                        self.pos += 1;
                        (c - b'0') as u32
                    };
                    let atom = previous.ok_or(Error::UnexpectedCharacter {
                        ch: c as char,
                        position,
                    })?;
                    let bond = pending_bond.take();
                    match open_rings.remove(&ring) {
                        Some((partner, opening_bond)) => {
                            let order = bond.or(opening_bond).unwrap_or(1);
                            self.add_edge(partner, atom, order)?;
                        }
                        None => {
                            open_rings.insert(ring, (atom, bond));
                        }
                    }
                }
                _ => {
                    let element = if c == b'[' {
                        self.bracket_atom()?
                    } else if let Some(sym) = self.organic_atom() {
                        sym.to_string()
                    } else if c.is_ascii_alphabetic() {
                        let end = if self
                            .bytes
                            .get(position + 1)
                            .is_some_and(u8::is_ascii_lowercase)
                        {
                            position + 2
                        } else {
                            position + 1
                        };
                        return Err(Error::UnknownAtom {
                            symbol: String::from_utf8_lossy(&self.bytes[position..end])
                                .into_owned(),
                            position,
                        });
                    } else {
                        return Err(Error::UnexpectedCharacter {
                            ch: c as char,
                            position,
                        });
                    };
                    let label = self.atom_label(&element, position)?;
                    let index = self.labels.len();
                    self.labels.push(label);
                    if let Some(prev) = previous {
                        let order = pending_bond.take().unwrap_or(1);
                        self.add_edge(prev, index, order)?;
                    } else if pending_bond.is_some() {
                        return Err(Error::UnexpectedCharacter {
                            ch: self.bytes[position - 1] as char,
                            position: position - 1,
                        });
                    }
                    previous = Some(index);
                }
            }
        }

        if let Some(&(_, position)) = branch_stack.last() {
            return Err(Error::UnbalancedParenthesis(position));
        }
        if let Some((&ring, _)) = open_rings.iter().next() {
            return Err(Error::DanglingRingClosure(ring));
        }
        if self.labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        if pending_bond.is_some() {
            return Err(Error::UnexpectedCharacter {
                ch: self.bytes[self.bytes.len() - 1] as char,
                position: self.bytes.len() - 1,
            });
        }
        let n = self.labels.len();
        LabeledMultigraph::with_bond_orders(
            n,
            self.labels,
            self.edges,
            self.orders,
            self.alphabet.len(),
        )
    }
}

/// Parses one molecule. Nodes appear in reading order.
pub fn parse_smiles(text: &str, alphabet: &AtomAlphabet) -> Result<LabeledMultigraph> {
    if !text.is_ascii() {
        let (position, ch) = text
            .char_indices()
            .find(|(_, c)| !c.is_ascii())
            .expect("non-ascii text has a non-ascii char");
        return Err(Error::UnexpectedCharacter { ch, position });
    }
    Parser {
        bytes: text.trim_start().as_bytes(),
        pos: 0,
        alphabet,
        labels: Vec::new(),
        edges: Vec::new(),
        orders: Vec::new(),
    }
    .run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<LabeledMultigraph> {
        parse_smiles(s, &AtomAlphabet::default())
    }

    #[test]
    fn methane() {
        let g = parse("C").unwrap();
        assert_eq!(g.num_nodes(), 1);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn ethanol() {
        let g = parse("CCO").unwrap();
        assert_eq!(g.labels(), &[1, 1, 3]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn cyclopropane_closes_ring() {
        let g = parse("C1CC1").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.edges().len(), 3);
        assert!(g.edges().contains(&(0, 2)));
    }

    #[test]
    fn benzene() {
        let g = parse("c1ccccc1").unwrap();
        assert_eq!(g.num_nodes(), 6);
        assert_eq!(g.edges().len(), 6);
        assert!(g.labels().iter().all(|&l| l == 1));
        assert!((0..6).all(|i| g.degree(i).unwrap() == 2));
    }

    #[test]
    fn branches_and_bond_orders() {
        // acetic acid: C-C(=O)-O
        let g = parse("CC(=O)O").unwrap();
        assert_eq!(g.labels(), &[1, 1, 3, 3]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (1, 3)]);
        assert_eq!(g.bond_orders(), &[1, 2, 1]);
        let g = parse("C#N").unwrap();
        assert_eq!(g.bond_orders(), &[3]);
    }

    #[test]
    fn bracket_atoms_keep_element_only() {
        let g = parse("[NH4+]").unwrap();
        assert_eq!(g.labels(), &[2]);
        let g = parse("C[C@@H](N)[13CH3]").unwrap();
        assert_eq!(g.labels(), &[1, 1, 2, 1]);
        let g = parse("c1cc[nH]c1").unwrap();
        assert_eq!(g.labels(), &[1, 1, 1, 2, 1]);
        let g = parse("[Cl-]").unwrap();
        assert_eq!(g.labels(), &[6]);
        assert!(matches!(parse("[Na+]"), Err(Error::UnknownAtom { .. })));
    }

    #[test]
    fn two_letter_halogens() {
        let g = parse("ClCBr").unwrap();
        assert_eq!(g.labels(), &[6, 1, 7]);
    }

    #[test]
    fn percent_ring_labels() {
        let g = parse("C%10CC%10").unwrap();
        assert_eq!(g.edges().len(), 3);
        assert!(g.is_connected());
    }

    #[test]
    fn fused_rings() {
        // naphthalene: 10 atoms, 11 bonds
        let g = parse("c1ccc2ccccc2c1").unwrap();
        assert_eq!(g.num_nodes(), 10);
        assert_eq!(g.edges().len(), 11);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse(""), Err(Error::EmptyInput)));
        assert!(matches!(parse("   "), Err(Error::EmptyInput)));
        assert!(matches!(parse("CXC"), Err(Error::UnknownAtom { .. })));
        assert!(matches!(parse("Zn"), Err(Error::UnknownAtom { .. })));
        assert!(matches!(
            parse("CC(O"),
            Err(Error::UnbalancedParenthesis(2))
        ));
        assert!(matches!(
            parse("CC)O"),
            Err(Error::UnbalancedParenthesis(2))
        ));
        assert!(matches!(parse("(C)"), Err(Error::UnbalancedParenthesis(0))));
        assert!(matches!(parse("C1CC"), Err(Error::DanglingRingClosure(1))));
        assert!(matches!(parse("CC.O"), Err(Error::MultipleFragments)));
        assert!(matches!(parse("C11"), Err(Error::SelfLoop(0))));
    }

    #[test]
    fn deterministic() {
        let a = parse("CC(C)c1ccc(O)cc1").unwrap();
        let b = parse("CC(C)c1ccc(O)cc1").unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
    }
}
