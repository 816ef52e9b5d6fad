//! `ffmodel v1` text format for glued models.
//!
//! Header lines `k`, `order`, `delta`, `u0_radius`, then `poly s0` and `poly g <j>`
//! blocks of `term <i> <j> <value>` lines; `poly g j` is `G̃_{0,j}`. Floats carry 17
//! significant digits, so reloading reproduces the model bit for bit.

use std::fmt::Write as _;

use focusfocus::{FloatPoly, GluedSystem};

use crate::CliError;

pub const MAGIC: &str = "ffmodel v1";

pub fn print(sys: &GluedSystem) -> String {
    let mut out = format!(
        "{MAGIC}\nk {}\norder {}\ndelta {:.16e}\nu0_radius {:.16e}\n",
        sys.k(),
        sys.order(),
        sys.delta(),
        sys.u0_radius()
    );
    write_poly(&mut out, "s0", sys.s0_poly());
    for j in 0..sys.k() {
        write_poly(&mut out, &format!("g {j}"), sys.chart(j).poly());
    }
    out
}

fn write_poly(out: &mut String, name: &str, p: &FloatPoly) {
    let _ = writeln!(out, "poly {name}");
    for &(i, j, v) in p.terms() {
        let _ = writeln!(out, "term {i} {j} {v:.16e}");
    }
}

fn err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T, CliError> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| err(line, format!("expected {what}")))
}

pub fn parse(text: &str) -> Result<GluedSystem, CliError> {
    let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((n, _)) => return Err(err(n, format!("expected {MAGIC:?}"))),
        None => return Err(err(0, "empty file")),
    }
    let (mut k, mut order, mut delta, mut u0) = (None, None, None, None);
    let mut s0: Option<Vec<(u32, u32, f64)>> = None;
    let mut charts: Vec<Option<Vec<(u32, u32, f64)>>> = Vec::new();
    // `None` selects `s0`, `Some(j)` chart `j`.
    let mut current: Option<Option<usize>> = None;
    for (n, line) in lines {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("k") if k.is_none() => {
                let v: usize = field(toks.next(), "k", n)?;
                if v == 0 {
                    return Err(err(n, "k must be positive"));
                }
                charts = vec![None; v];
                k = Some(v);
            }
            Some("order") if order.is_none() => order = Some(field::<u32>(toks.next(), "order", n)?),
            Some("delta") if delta.is_none() => delta = Some(field::<f64>(toks.next(), "delta", n)?),
            Some("u0_radius") if u0.is_none() => u0 = Some(field::<f64>(toks.next(), "u0_radius", n)?),
            Some("poly") => {
                if k.is_none() {
                    return Err(err(n, "poly block before k"));
                }
                let which = match toks.next() {
                    Some("s0") => None,
                    Some("g") => {
                        let j: usize = field(toks.next(), "chart index", n)?;
                        if j >= charts.len() {
                            return Err(err(n, "chart index out of range"));
                        }
                        Some(j)
                    }
                    _ => return Err(err(n, "unknown poly kind")),
                };
                let slot = match which {
                    None => &mut s0,
                    Some(j) => &mut charts[j],
                };
                if slot.replace(Vec::new()).is_some() {
                    return Err(err(n, "duplicate poly block"));
                }
                current = Some(which);
            }
            Some("term") => {
                let which = current.ok_or_else(|| err(n, "term outside a poly block"))?;
                let terms = match which {
                    None => s0.as_mut(),
                    Some(j) => charts[j].as_mut(),
                }
                .expect("block was opened");
                let i = field(toks.next(), "exponent", n)?;
                let j = field(toks.next(), "exponent", n)?;
                terms.push((i, j, field(toks.next(), "value", n)?));
            }
            _ => return Err(err(n, format!("unexpected line {line:?}"))),
        }
        if toks.next().is_some() {
            return Err(err(n, "trailing tokens"));
        }
    }
    let missing = |what: &str| err(0, format!("missing {what}"));
    let order = order.ok_or_else(|| missing("order"))?;
    let delta = delta.ok_or_else(|| missing("delta"))?;
    let u0 = u0.ok_or_else(|| missing("u0_radius"))?;
    let s0 = FloatPoly::from_terms(s0.ok_or_else(|| missing("poly s0"))?);
    let gpolys = charts
        .into_iter()
        .enumerate()
        .map(|(j, t)| t.map(FloatPoly::from_terms).ok_or_else(|| missing(&format!("poly g {j}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GluedSystem::from_parts(order, delta, s0, gpolys, u0)?)
}
