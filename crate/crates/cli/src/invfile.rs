//! `ffinv v1` text format for invariant tuples.
//!
//! ```text
//! ffinv v1
//! k 2
//! order 3
//! series s0
//! coeff 0 1 1/1 0/1
//! series g 0 1
//! coeff 0 1 2/1 0/1
//! ```
//!
//! Each `coeff i j a b` line contributes `(a + bπ)·XⁱYʲ`. A file holds one of three
//! layouts: minimal (`series s0` plus every `series g j j+1`), full (`series s j` for
//! all `j` and `series g j l` for all `j ≠ l`), or minimal with the action written in
//! the other normalization (`series S` instead of `series s0`).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use focusfocus::moduli::{expand, reduce_to_minimal};
use focusfocus::powerseries::multi_indices;
use focusfocus::{ActionSeries, InvariantTupleFull, InvariantTupleMinimal, PiRational, TransitionSeries, TruncatedSeries};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::CliError;

pub const MAGIC: &str = "ffinv v1";

#[derive(Clone, Debug, PartialEq)]
pub enum InvariantFile {
    Minimal(InvariantTupleMinimal),
    Full(InvariantTupleFull),
    VuNgoc { big_s: TruncatedSeries, g_consec: Vec<TransitionSeries> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Block {
    S(usize),
    BigS,
    G(usize, usize),
}

fn parse_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

fn parse_rational(tok: &str, line: usize) -> Result<BigRational, CliError> {
    let (n, d) = tok.split_once('/').unwrap_or((tok, "1"));
    let n: BigInt = n.parse().map_err(|_| parse_err(line, format!("bad numerator in {tok:?}")))?;
    let d: BigInt = d.parse().map_err(|_| parse_err(line, format!("bad denominator in {tok:?}")))?;
    if d.is_zero() {
        return Err(parse_err(line, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T, CliError> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(line, format!("expected {what}")))
}

impl InvariantFile {
    pub fn k(&self) -> usize {
        match self {
            Self::Minimal(m) => m.k(),
            Self::Full(f) => f.k(),
            Self::VuNgoc { g_consec, .. } => g_consec.len() + 1,
        }
    }

    pub fn order(&self) -> u32 {
        match self {
            Self::Minimal(m) => m.order(),
            Self::Full(f) => f.order(),
            Self::VuNgoc { big_s, .. } => big_s.order(),
        }
    }

    /// The full tuple; minimal data is expanded.
    pub fn full(&self) -> Result<InvariantTupleFull, CliError> {
        match self {
            Self::Minimal(m) => Ok(expand(m)),
            Self::Full(f) => Ok(f.clone()),
            Self::VuNgoc { .. } => Err(CliError::Usage("file uses the S normalization; convert it first".into())),
        }
    }

    pub fn minimal(&self) -> Result<InvariantTupleMinimal, CliError> {
        match self {
            Self::Minimal(m) => Ok(m.clone()),
            Self::Full(f) => Ok(reduce_to_minimal(f)?),
            Self::VuNgoc { .. } => Err(CliError::Usage("file uses the S normalization; convert it first".into())),
        }
    }

    /// Wraps `full` in the same layout as `self`.
    pub fn same_layout(&self, full: InvariantTupleFull) -> Result<Self, CliError> {
        match self {
            Self::Full(_) => Ok(Self::Full(full)),
            _ => Ok(Self::Minimal(reduce_to_minimal(&full)?)),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, l)) if l == MAGIC => {}
            Some((n, _)) => return Err(parse_err(n, format!("expected {MAGIC:?}"))),
            None => return Err(parse_err(0, "empty file")),
        }
        let mut k: Option<usize> = None;
        let mut order: Option<u32> = None;
        let mut blocks: BTreeMap<Block, TruncatedSeries> = BTreeMap::new();
        let mut current: Option<Block> = None;
        for (n, line) in lines {
            let mut toks = line.split_whitespace();
            match toks.next() {
                Some("k") if blocks.is_empty() && k.is_none() => {
                    let v: usize = parse_num(toks.next(), "k", n)?;
                    if v == 0 {
                        return Err(parse_err(n, "k must be positive"));
                    }
                    k = Some(v);
                }
                Some("order") if blocks.is_empty() && order.is_none() => {
                    let v: u32 = parse_num(toks.next(), "order", n)?;
                    if v == 0 {
                        return Err(parse_err(n, "order must be positive"));
                    }
                    order = Some(v);
                }
                Some("series") => {
                    let (k, order) = match (k, order) {
                        (Some(k), Some(o)) => (k, o),
                        _ => return Err(parse_err(n, "series block before k and order")),
                    };
                    let block = match toks.next() {
                        Some("s0") => Block::S(0),
                        Some("S") => Block::BigS,
                        Some("s") => Block::S(parse_num(toks.next(), "chart index", n)?),
                        Some("g") => {
                            let j = parse_num(toks.next(), "chart index", n)?;
                            Block::G(j, parse_num(toks.next(), "chart index", n)?)
                        }
                        _ => return Err(parse_err(n, "unknown series kind")),
                    };
                    let in_range = match block {
                        Block::S(j) => j < k,
                        Block::BigS => true,
                        Block::G(j, l) => j < k && l < k,
                    };
                    if !in_range {
                        return Err(parse_err(n, format!("chart index out of range for k = {k}")));
                    }
                    if blocks.insert(block, TruncatedSeries::zero(order)).is_some() {
                        return Err(parse_err(n, "duplicate series block"));
                    }
                    current = Some(block);
                }
                Some("coeff") => {
                    let block = current.ok_or_else(|| parse_err(n, "coeff outside a series block"))?;
                    let i: u32 = parse_num(toks.next(), "exponent", n)?;
                    let j: u32 = parse_num(toks.next(), "exponent", n)?;
                    let a = parse_rational(toks.next().ok_or_else(|| parse_err(n, "missing coefficient"))?, n)?;
                    let b = parse_rational(toks.next().ok_or_else(|| parse_err(n, "missing π-coefficient"))?, n)?;
                    if matches!(block, Block::G(..)) && !b.is_zero() {
                        return Err(parse_err(n, "transition coefficients must be rational"));
                    }
                    let s = blocks.get_mut(&block).expect("block was inserted");
                    if i + j == 0 || i + j > s.order() {
                        return Err(parse_err(n, format!("monomial ({i}, {j}) outside degrees 1..={}", s.order())));
                    }
                    if !s.coeff(i, j).is_zero() {
                        return Err(parse_err(n, format!("duplicate coefficient ({i}, {j})")));
                    }
                    s.set_coeff(i, j, PiRational::new(a, b)).map_err(|e| parse_err(n, e.to_string()))?;
                }
                _ => return Err(parse_err(n, format!("unexpected line {line:?}"))),
            }
            if toks.next().is_some() {
                return Err(parse_err(n, "trailing tokens"));
            }
        }
        let k = k.ok_or_else(|| parse_err(0, "missing k"))?;
        let order = order.ok_or_else(|| parse_err(0, "missing order"))?;
        Self::assemble(k, order, blocks)
    }

    fn assemble(k: usize, order: u32, mut blocks: BTreeMap<Block, TruncatedSeries>) -> Result<Self, CliError> {
        let transition = |s: TruncatedSeries, j: usize, l: usize| {
            TransitionSeries::new(s).map_err(|e| parse_err(0, format!("g {j} {l}: {e}")))
        };
        let consecutive = (0..k.saturating_sub(1)).all(|j| blocks.contains_key(&Block::G(j, j + 1)));
        let only_consecutive = blocks.keys().all(|b| match *b {
            Block::G(j, l) => l == j + 1,
            Block::S(j) => j == 0,
            Block::BigS => true,
        });
        let take_consec = |blocks: &mut BTreeMap<Block, TruncatedSeries>| {
            (0..k - 1)
                .map(|j| transition(blocks.remove(&Block::G(j, j + 1)).expect("checked"), j, j + 1))
                .collect::<Result<Vec<_>, _>>()
        };
        if let Some(big_s) = blocks.remove(&Block::BigS) {
            if !consecutive || !only_consecutive || blocks.contains_key(&Block::S(0)) {
                return Err(parse_err(0, "series S needs exactly the consecutive transitions g j j+1"));
            }
            let g_consec = take_consec(&mut blocks)?;
            return Ok(Self::VuNgoc { big_s, g_consec });
        }
        if blocks.len() == k && consecutive && only_consecutive && blocks.contains_key(&Block::S(0)) {
            let s0 = ActionSeries::new(blocks.remove(&Block::S(0)).expect("checked"));
            let g = take_consec(&mut blocks)?;
            return Ok(Self::Minimal(InvariantTupleMinimal::new(k, s0, g)?));
        }
        let mut s = Vec::with_capacity(k);
        for j in 0..k {
            let series = blocks.remove(&Block::S(j)).ok_or_else(|| parse_err(0, format!("missing series s {j}")))?;
            s.push(ActionSeries::new(series));
        }
        let mut g = Vec::with_capacity(k);
        for j in 0..k {
            let mut row = Vec::with_capacity(k);
            for l in 0..k {
                let entry = match blocks.remove(&Block::G(j, l)) {
                    Some(series) => transition(series, j, l)?,
                    None if j == l => TransitionSeries::identity(order),
                    None => return Err(parse_err(0, format!("missing series g {j} {l}"))),
                };
                row.push(entry);
            }
            g.push(row);
        }
        Ok(Self::Full(InvariantTupleFull::new(s, g)?))
    }

    pub fn print(&self) -> String {
        let mut out = format!("{MAGIC}\nk {}\norder {}\n", self.k(), self.order());
        match self {
            Self::Minimal(m) => {
                write_block(&mut out, "s0", m.s0().as_series());
                for (j, g) in m.g_consec().iter().enumerate() {
                    write_block(&mut out, &format!("g {j} {}", j + 1), g.as_series());
                }
            }
            Self::Full(f) => {
                for j in 0..f.k() {
                    write_block(&mut out, &format!("s {j}"), f.s(j).as_series());
                }
                for j in 0..f.k() {
                    for l in (0..f.k()).filter(|&l| l != j) {
                        write_block(&mut out, &format!("g {j} {l}"), f.g(j, l).as_series());
                    }
                }
            }
            Self::VuNgoc { big_s, g_consec } => {
                write_block(&mut out, "S", big_s);
                for (j, g) in g_consec.iter().enumerate() {
                    write_block(&mut out, &format!("g {j} {}", j + 1), g.as_series());
                }
            }
        }
        out
    }
}

fn write_block(out: &mut String, name: &str, s: &TruncatedSeries) {
    let _ = writeln!(out, "series {name}");
    for (i, j) in multi_indices(s.order()) {
        let c = s.coeff(i, j);
        if !c.is_zero() {
            let _ = writeln!(out, "coeff {i} {j} {} {}", fraction(&c.a), fraction(&c.b));
        }
    }
}

fn fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
