//! Line-oriented text format for layout specifications.
//!
//! ```text
//! # three buttons in a 300px row
//! vars 3
//! name 0 w1
//! c H x0*1 x1*1 x2*1 EQ 300
//! c S:1 x0*1 EQ 120
//! ```
//!
//! The first non-comment line is `vars <n>`. `name <i> <label>` lines are
//! optional. Constraint lines are
//! `c <H|S:<penalty>> <idx>*<coeff> [<idx>*<coeff> ...] <EQ|LE|GE> <rhs>`
//! where `<idx>` is written `x<i>`. Everything after `#` is a comment.
//! Numbers are serialized with the shortest representation that parses back
//! to the same `f64`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{default_name, Constraint, LayoutSpec, Priority, Relation};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_number(line: usize, tok: &str, what: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} `{tok}` is not finite")));
    }
    Ok(v)
}

fn parse_var(line: usize, tok: &str, var_count: usize) -> Result<usize> {
    let idx: usize = tok
        .strip_prefix('x')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(line, format!("invalid variable `{tok}`")))?;
    if idx >= var_count {
        return Err(parse_err(
            line,
            format!("variable index {idx} out of range (vars {var_count})"),
        ));
    }
    Ok(idx)
}

pub fn parse_spec(text: &str) -> Result<LayoutSpec> {
    let mut var_count: Option<usize> = None;
    let mut names: Vec<String> = Vec::new();
    let mut constraints = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let Some(n) = var_count else {
            if toks[0] != "vars" || toks.len() != 2 {
                return Err(parse_err(line_no, "expected `vars <n>` header"));
            }
            let n: usize = toks[1]
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid variable count `{}`", toks[1])))?;
            var_count = Some(n);
            names = (0..n).map(default_name).collect();
            continue;
        };
        match toks[0] {
            "vars" => return Err(parse_err(line_no, "duplicate `vars` header")),
            "name" => {
                if toks.len() != 3 {
                    return Err(parse_err(line_no, "expected `name <i> <label>`"));
                }
                let idx: usize = toks[1]
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("invalid index `{}`", toks[1])))?;
                if idx >= n {
                    return Err(parse_err(
                        line_no,
                        format!("variable index {idx} out of range (vars {n})"),
                    ));
                }
                names[idx] = toks[2].to_string();
            }
            "c" => constraints.push(parse_constraint(line_no, &toks[1..], n)?),
            other => return Err(parse_err(line_no, format!("unknown directive `{other}`"))),
        }
    }

    let var_count = var_count.ok_or_else(|| parse_err(0, "missing `vars <n>` header"))?;
    let spec = LayoutSpec {
        var_count,
        var_names: names,
        constraints,
    };
    spec.validate().map_err(|e| match e {
        Error::InvalidParameter(m) => parse_err(0, m),
        other => other,
    })?;
    Ok(spec)
}

fn parse_constraint(line: usize, toks: &[&str], var_count: usize) -> Result<Constraint> {
    if toks.len() < 4 {
        return Err(parse_err(line, "constraint needs priority, terms, relation and rhs"));
    }
    let priority = match toks[0] {
        "H" => Priority::Hard,
        p => {
            let pen = p
                .strip_prefix("S:")
                .ok_or_else(|| parse_err(line, format!("invalid priority `{p}`")))?;
            let pen = parse_number(line, pen, "penalty")?;
            if pen <= 0.0 {
                return Err(parse_err(line, format!("penalty must be positive, got {pen}")));
            }
            Priority::Soft(pen)
        }
    };
    let rel_tok = toks[toks.len() - 2];
    let relation = Relation::from_token(rel_tok)
        .ok_or_else(|| parse_err(line, format!("unknown relation `{rel_tok}`")))?;
    let rhs = parse_number(line, toks[toks.len() - 1], "right-hand side")?;

    let mut terms = Vec::with_capacity(toks.len() - 3);
    for t in &toks[1..toks.len() - 2] {
        let (v, a) = t
            .split_once('*')
            .ok_or_else(|| parse_err(line, format!("invalid term `{t}`")))?;
        let idx = parse_var(line, v, var_count)?;
        if terms.iter().any(|&(j, _)| j == idx) {
            return Err(parse_err(line, format!("variable x{idx} appears twice")));
        }
        terms.push((idx, parse_number(line, a, "coefficient")?));
    }
    Ok(Constraint::new(terms, relation, rhs, priority))
}

pub fn serialize_spec(spec: &LayoutSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", spec.var_count);
    for (i, name) in spec.var_names.iter().enumerate() {
        if *name != default_name(i) {
            let _ = writeln!(out, "name {i} {name}");
        }
    }
    for c in &spec.constraints {
        out.push_str("c ");
        match c.priority {
            Priority::Hard => out.push('H'),
            Priority::Soft(p) => {
                let _ = write!(out, "S:{p}");
            }
        }
        for &(j, a) in &c.terms {
            let _ = write!(out, " x{j}*{a}");
        }
        let _ = writeln!(out, " {} {}", c.relation, c.rhs);
    }
    out
}
