//! SMILES reader producing heavy-atom [`MolecularGraph`]s.
//!
//! Supports the organic subset, bracket atoms (isotope, chirality, H count,
//! charge and atom class are parsed and discarded), explicit bonds, branches,
//! ring closures (`0-9` and `%nn`) and `.` separated components. Aromaticity
//! is syntactic: an implicit bond between two aromatic atoms is aromatic when
//! it lies on a ring, otherwise single.
//!
//! Explicit hydrogens are folded away the same way common toolkits do it: a
//! non-isotopic `[H]` bonded to exactly one heavy atom is dropped. Isotopic
//! hydrogens, free hydrogens and H-H bonded hydrogens stay as nodes.

use std::collections::HashMap;
use std::ops::Range;

use thiserror::Error;

use crate::elements;
use crate::graph::{BondType, GraphError, MolecularGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unknown element symbol {0:?}")]
    UnknownElement(String),
    #[error("unclosed bracket atom")]
    UnclosedBracket,
    #[error("unbalanced parentheses")]
    UnbalancedParentheses,
    #[error("empty branch")]
    EmptyBranch,
    #[error("branch without a preceding atom")]
    BranchWithoutAtom,
    #[error("bond symbol not followed by an atom")]
    DanglingBond,
    #[error("ring closure {0} is never closed")]
    UnmatchedRingClosure(u32),
    #[error("ring closure {0} bonds an atom to itself")]
    RingSelfBond(u32),
    #[error("ring closure {0} has conflicting bond symbols")]
    ConflictingRingBond(u32),
    #[error("bond duplicates an existing bond")]
    DuplicateBond,
    #[error("invalid ring closure number")]
    BadRingNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES parse error at byte {offset}: {kind}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    fn new(offset: usize, kind: SmilesErrorKind) -> Self {
        Self { offset, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondSymbol {
    Single,
    Double,
    Triple,
    Quadruple,
    Aromatic,
    Up,
    Down,
}

impl BondSymbol {
    fn bond_type(self) -> BondType {
        match self {
            BondSymbol::Single | BondSymbol::Up | BondSymbol::Down => BondType::Single,
            BondSymbol::Double => BondType::Double,
            BondSymbol::Triple => BondType::Triple,
            BondSymbol::Aromatic => BondType::Aromatic,
            BondSymbol::Quadruple => BondType::Misc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    OrganicAtom { atomic_number: u32, aromatic: bool },
    BracketAtom {
        atomic_number: u32,
        aromatic: bool,
        isotope: Option<u32>,
        hydrogens: u32,
        charge: i32,
    },
    Bond(BondSymbol),
    RingClosure(u32),
    BranchOpen,
    BranchClose,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesToken {
    pub kind: TokenKind,
    pub span: Range<usize>,
}

/// Splits a SMILES string into tokens with byte spans.
pub fn tokenize(s: &str) -> Result<Vec<SmilesToken>, SmilesError> {
    let bytes = s.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let c = bytes[i];
        let kind = match c {
            b'(' => {
                i += 1;
                TokenKind::BranchOpen
            }
            b')' => {
                i += 1;
                TokenKind::BranchClose
            }
            b'.' => {
                i += 1;
                TokenKind::Dot
            }
            b'-' | b'=' | b'#' | b'$' | b':' | b'/' | b'\\' => {
                i += 1;
                TokenKind::Bond(match c {
                    b'-' => BondSymbol::Single,
                    b'=' => BondSymbol::Double,
                    b'#' => BondSymbol::Triple,
                    b'$' => BondSymbol::Quadruple,
                    b':' => BondSymbol::Aromatic,
                    b'/' => BondSymbol::Up,
                    _ => BondSymbol::Down,
                })
            }
            b'0'..=b'9' => {
                i += 1;
                TokenKind::RingClosure(u32::from(c - b'0'))
            }
            b'%' => {
                let digits = bytes.get(i + 1..i + 3).filter(|d| d.iter().all(u8::is_ascii_digit));
                let Some(d) = digits else {
                    return Err(SmilesError::new(start, SmilesErrorKind::BadRingNumber));
                };
                i += 3;
                TokenKind::RingClosure(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
            }
            b'[' => {
                let (kind, end) = bracket_atom(s, i)?;
                i = end;
                kind
            }
            _ => {
                let (kind, len) = organic_atom(bytes, i)?;
                i += len;
                kind
            }
        };
        tokens.push(SmilesToken { kind, span: start..i });
    }
    Ok(tokens)
}

fn organic_atom(bytes: &[u8], i: usize) -> Result<(TokenKind, usize), SmilesError> {
    let c = bytes[i];
    let next = bytes.get(i + 1).copied();
    let (z, aromatic, len) = match (c, next) {
        (b'C', Some(b'l')) => (17, false, 2),
        (b'B', Some(b'r')) => (35, false, 2),
        (b'B', _) => (5, false, 1),
        (b'C', _) => (6, false, 1),
        (b'N', _) => (7, false, 1),
        (b'O', _) => (8, false, 1),
        (b'P', _) => (15, false, 1),
        (b'S', _) => (16, false, 1),
        (b'F', _) => (9, false, 1),
        (b'I', _) => (53, false, 1),
        (b'*', _) => (0, false, 1),
        (b'b', _) => (5, true, 1),
        (b'c', _) => (6, true, 1),
        (b'n', _) => (7, true, 1),
        (b'o', _) => (8, true, 1),
        (b'p', _) => (15, true, 1),
        (b's', _) => (16, true, 1),
        _ if c.is_ascii_alphabetic() => {
            let end = if next.is_some_and(|n| n.is_ascii_lowercase()) { i + 2 } else { i + 1 };
            let sym = String::from_utf8_lossy(&bytes[i..end]).into_owned();
            return Err(SmilesError::new(i, SmilesErrorKind::UnknownElement(sym)));
        }
        _ => {
            let ch = std::str::from_utf8(&bytes[i..])
                .ok()
                .and_then(|t| t.chars().next())
                .unwrap_or(char::REPLACEMENT_CHARACTER);
            return Err(SmilesError::new(i, SmilesErrorKind::UnexpectedChar(ch)));
        }
    };
    Ok((
        TokenKind::OrganicAtom {
            atomic_number: z,
            aromatic,
        },
        len,
    ))
}

fn read_number(bytes: &[u8], i: &mut usize) -> Option<u32> {
    let start = *i;
    while *i < bytes.len() && bytes[*i].is_ascii_digit() {
        *i += 1;
    }
    if *i == start {
        return None;
    }
    std::str::from_utf8(&bytes[start..*i]).ok()?.parse().ok()
}

fn bracket_atom(s: &str, open: usize) -> Result<(TokenKind, usize), SmilesError> {
    let bytes = s.as_bytes();
    let Some(close_rel) = s[open..].find(']') else {
        return Err(SmilesError::new(open, SmilesErrorKind::UnclosedBracket));
    };
    let close = open + close_rel;
    let body = &bytes[..close];
    let mut i = open + 1;

    let isotope = read_number(body, &mut i);

    // element symbol
    let sym_start = i;
    let (atomic_number, aromatic) = {
        let c = *body
            .get(i)
            .ok_or(SmilesError::new(i, SmilesErrorKind::UnclosedBracket))?;
        if c == b'*' {
            i += 1;
            (0, false)
        } else if c.is_ascii_lowercase() {
            // aromatic symbols: two-letter ones first
            let two = body.get(i..i + 2);
            match two {
                Some(b"se") => {
                    i += 2;
                    (34, true)
                }
                Some(b"as") => {
                    i += 2;
                    (33, true)
                }
                Some(b"te") => {
                    i += 2;
                    (52, true)
                }
                _ => {
                    let z = match c {
                        b'b' => 5,
                        b'c' => 6,
                        b'n' => 7,
                        b'o' => 8,
                        b'p' => 15,
                        b's' => 16,
                        _ => {
                            return Err(SmilesError::new(
                                i,
                                SmilesErrorKind::UnknownElement((c as char).to_string()),
                            ))
                        }
                    };
                    i += 1;
                    (z, true)
                }
            }
        } else if c.is_ascii_uppercase() {
            let two = body
                .get(i + 1)
                .filter(|n| n.is_ascii_lowercase())
                .and_then(|_| std::str::from_utf8(&body[i..i + 2]).ok())
                .and_then(elements::atomic_number);
            if let Some(z) = two {
                i += 2;
                (z, false)
            } else {
                let one = std::str::from_utf8(&body[i..i + 1]).ok().and_then(elements::atomic_number);
                match one {
                    Some(z) => {
                        i += 1;
                        (z, false)
                    }
                    None => {
                        let end = if body.get(i + 1).is_some_and(u8::is_ascii_lowercase) { i + 2 } else { i + 1 };
                        return Err(SmilesError::new(
                            sym_start,
                            SmilesErrorKind::UnknownElement(s[i..end].to_string()),
                        ));
                    }
                }
            }
        } else {
            return Err(SmilesError::new(i, SmilesErrorKind::UnexpectedChar(c as char)));
        }
    };

    // chirality
    if body.get(i) == Some(&b'@') {
        i += 1;
        if body.get(i) == Some(&b'@') {
            i += 1;
        } else if let Some(two) = body.get(i..i + 2) {
            if matches!(two, b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                i += 2;
                read_number(body, &mut i);
            }
        }
    }

    // hydrogen count
    let mut hydrogens = 0;
    if body.get(i) == Some(&b'H') {
        i += 1;
        hydrogens = read_number(body, &mut i).unwrap_or(1);
    }

    // charge
    let mut charge = 0i32;
    if let Some(&sign @ (b'+' | b'-')) = body.get(i) {
        let unit = if sign == b'+' { 1 } else { -1 };
        i += 1;
        if let Some(n) = read_number(body, &mut i) {
            charge = unit * n as i32;
        } else {
            charge = unit;
            while body.get(i) == Some(&sign) {
                charge += unit;
                i += 1;
            }
        }
    }

    // atom class
    if body.get(i) == Some(&b':') {
        i += 1;
        if read_number(body, &mut i).is_none() {
            return Err(SmilesError::new(i, SmilesErrorKind::UnexpectedChar(':')));
        }
    }

    if i != close {
        let ch = s[i..].chars().next().unwrap_or(']');
        return Err(SmilesError::new(i, SmilesErrorKind::UnexpectedChar(ch)));
    }
    Ok((
        TokenKind::BracketAtom {
            atomic_number,
            aromatic,
            isotope,
            hydrogens,
            charge,
        },
        close + 1,
    ))
}

struct Atom {
    atomic_number: u32,
    aromatic: bool,
    isotope: Option<u32>,
}

struct RawBond {
    a: usize,
    b: usize,
    symbol: Option<BondSymbol>,
    offset: usize,
}

/// Parses a SMILES string into a heavy-atom graph.
pub fn parse_smiles(s: &str) -> Result<MolecularGraph, SmilesError> {
    if s.is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::Empty));
    }
    let tokens = tokenize(s)?;

    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<RawBond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondSymbol, usize)> = None;
    // (atom the branch hangs from, offset of '(', whether the branch got an atom)
    let mut branches: Vec<(usize, usize, bool)> = Vec::new();
    let mut rings: HashMap<u32, (usize, Option<BondSymbol>, usize)> = HashMap::new();

    for tok in &tokens {
        let at = tok.span.start;
        match tok.kind {
            TokenKind::OrganicAtom {
                atomic_number,
                aromatic,
            } => {
                push_atom(&mut atoms, &mut bonds, &mut prev, &mut pending, &mut branches, at, Atom {
                    atomic_number,
                    aromatic,
                    isotope: None,
                });
            }
            TokenKind::BracketAtom {
                atomic_number,
                aromatic,
                isotope,
                ..
            } => {
                push_atom(&mut atoms, &mut bonds, &mut prev, &mut pending, &mut branches, at, Atom {
                    atomic_number,
                    aromatic,
                    isotope,
                });
            }
            TokenKind::Bond(sym) => {
                if prev.is_none() || pending.is_some() {
                    return Err(SmilesError::new(at, SmilesErrorKind::DanglingBond));
                }
                pending = Some((sym, at));
            }
            TokenKind::RingClosure(num) => {
                let Some(cur) = prev else {
                    return Err(SmilesError::new(at, SmilesErrorKind::UnexpectedChar(
                        s[at..].chars().next().unwrap_or('?'),
                    )));
                };
                let sym = pending.take().map(|(b, _)| b);
                match rings.remove(&num) {
                    None => {
                        rings.insert(num, (cur, sym, at));
                    }
                    Some((other, other_sym, _)) => {
                        if other == cur {
                            return Err(SmilesError::new(at, SmilesErrorKind::RingSelfBond(num)));
                        }
                        let symbol = match (other_sym, sym) {
                            (Some(x), Some(y)) if x.bond_type() != y.bond_type() => {
                                return Err(SmilesError::new(
                                    at,
                                    SmilesErrorKind::ConflictingRingBond(num),
                                ))
                            }
                            (x, y) => x.or(y),
                        };
                        bonds.push(RawBond {
                            a: other,
                            b: cur,
                            symbol,
                            offset: at,
                        });
                    }
                }
            }
            TokenKind::BranchOpen => {
                let Some(cur) = prev else {
                    return Err(SmilesError::new(at, SmilesErrorKind::BranchWithoutAtom));
                };
                if pending.is_some() {
                    return Err(SmilesError::new(at, SmilesErrorKind::DanglingBond));
                }
                branches.push((cur, at, false));
            }
            TokenKind::BranchClose => {
                if let Some((_, off)) = pending {
                    return Err(SmilesError::new(off, SmilesErrorKind::DanglingBond));
                }
                let Some((anchor, _, filled)) = branches.pop() else {
                    return Err(SmilesError::new(at, SmilesErrorKind::UnbalancedParentheses));
                };
                if !filled {
                    return Err(SmilesError::new(at, SmilesErrorKind::EmptyBranch));
                }
                prev = Some(anchor);
            }
            TokenKind::Dot => {
                if let Some((_, off)) = pending {
                    return Err(SmilesError::new(off, SmilesErrorKind::DanglingBond));
                }
                if prev.is_none() {
                    return Err(SmilesError::new(at, SmilesErrorKind::UnexpectedChar('.')));
                }
                prev = None;
            }
        }
    }

    if let Some((_, off)) = pending {
        return Err(SmilesError::new(off, SmilesErrorKind::DanglingBond));
    }
    if let Some(&(_, off, _)) = branches.last() {
        return Err(SmilesError::new(off, SmilesErrorKind::UnbalancedParentheses));
    }
    if let Some((&num, &(_, _, off))) = rings.iter().min_by_key(|(_, v)| v.2) {
        return Err(SmilesError::new(off, SmilesErrorKind::UnmatchedRingClosure(num)));
    }
    if prev.is_none() && atoms.is_empty() {
        return Err(SmilesError::new(0, SmilesErrorKind::Empty));
    }
    if prev.is_none() {
        // trailing '.'
        return Err(SmilesError::new(s.len() - 1, SmilesErrorKind::UnexpectedChar('.')));
    }

    build(atoms, bonds)
}

#[allow(clippy::too_many_arguments)]
fn push_atom(
    atoms: &mut Vec<Atom>,
    bonds: &mut Vec<RawBond>,
    prev: &mut Option<usize>,
    pending: &mut Option<(BondSymbol, usize)>,
    branches: &mut [(usize, usize, bool)],
    at: usize,
    atom: Atom,
) {
    let idx = atoms.len();
    atoms.push(atom);
    if let Some(p) = *prev {
        let symbol = pending.take().map(|(b, _)| b);
        bonds.push(RawBond {
            a: p,
            b: idx,
            symbol,
            offset: at,
        });
    }
    if let Some(top) = branches.last_mut() {
        top.2 = true;
    }
    *prev = Some(idx);
}

fn build(atoms: Vec<Atom>, bonds: Vec<RawBond>) -> Result<MolecularGraph, SmilesError> {
    let n = atoms.len();
    let mut seen = std::collections::HashSet::new();
    for b in &bonds {
        if !seen.insert((b.a.min(b.b), b.a.max(b.b))) {
            return Err(SmilesError::new(b.offset, SmilesErrorKind::DuplicateBond));
        }
    }

    let pairs: Vec<(usize, usize)> = bonds.iter().map(|b| (b.a, b.b)).collect();
    let on_ring = ring_bond_mask(n, &pairs);

    let typed: Vec<(usize, usize, BondType)> = bonds
        .iter()
        .zip(&on_ring)
        .map(|(b, &ring)| {
            let ty = match b.symbol {
                Some(sym) => sym.bond_type(),
                None if atoms[b.a].aromatic && atoms[b.b].aromatic && ring => BondType::Aromatic,
                None => BondType::Single,
            };
            (b.a, b.b, ty)
        })
        .collect();

    // Fold away hydrogens bonded to exactly one heavy atom.
    let mut degree = vec![0usize; n];
    for &(a, b, _) in &typed {
        degree[a] += 1;
        degree[b] += 1;
    }
    let heavy = |i: usize| atoms[i].atomic_number != 1;
    let mut drop = vec![false; n];
    for &(a, b, _) in &typed {
        for (h, other) in [(a, b), (b, a)] {
            if !heavy(h) && atoms[h].isotope.is_none() && degree[h] == 1 && heavy(other) {
                drop[h] = true;
            }
        }
    }

    let mut remap = vec![usize::MAX; n];
    let mut numbers = Vec::with_capacity(n);
    for (i, atom) in atoms.iter().enumerate() {
        if !drop[i] {
            remap[i] = numbers.len();
            numbers.push(atom.atomic_number);
        }
    }
    let edges: Vec<_> = typed
        .iter()
        .filter(|&&(a, b, _)| !drop[a] && !drop[b])
        .map(|&(a, b, t)| (remap[a], remap[b], t))
        .collect();

    MolecularGraph::new(numbers.len(), &numbers, &edges).map_err(|e| match e {
        GraphError::DuplicateEdge { .. } => SmilesError::new(0, SmilesErrorKind::DuplicateBond),
        other => unreachable!("parser produced an invalid graph: {other}"),
    })
}

/// Marks edges that lie on a cycle (i.e. are not bridges).
fn ring_bond_mask(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_ring = vec![true; edges.len()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (node, parent edge id, next neighbor position)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent_edge, ref mut pos)) = stack.last_mut() {
            if *pos < adj[v].len() {
                let (w, id) = adj[v][*pos];
                *pos += 1;
                if id == parent_edge {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, id, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        on_ring[parent_edge] = false;
                    }
                }
            }
        }
    }
    on_ring
}
