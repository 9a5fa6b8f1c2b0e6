//! Tiny term syntax shared by potentials and control signals:
//! `term (+ term)*`, where a term is `[scale*]name(arg, ...)` or a bare number.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Term {
    pub scale: f64,
    pub name: String,
    pub args: Vec<f64>,
}

pub(crate) fn parse_terms(src: &str) -> Result<Vec<Term>> {
    let src = src.trim();
    if src.is_empty() {
        return Ok(Vec::new());
    }
    let mut pieces = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    let bytes = src.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            // '+' inside an exponent such as 1e+3 is not a separator
            b'+' if depth == 0 && i > 0 && !matches!(bytes[i - 1], b'e' | b'E') => {
                pieces.push(&src[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Config(format!("unbalanced parentheses in {src:?}")));
        }
    }
    if depth != 0 {
        return Err(Error::Config(format!("unbalanced parentheses in {src:?}")));
    }
    pieces.push(&src[start..]);
    pieces.into_iter().map(parse_term).collect()
}

fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "pi" => Ok(std::f64::consts::PI),
        "-pi" => Ok(-std::f64::consts::PI),
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("expected a number, got {s:?}"))),
    }
}

fn parse_term(raw: &str) -> Result<Term> {
    let t = raw.trim();
    if t.is_empty() {
        return Err(Error::Config("empty term".into()));
    }
    let Some(open) = t.find('(') else {
        return Ok(Term {
            scale: 1.0,
            name: "const".into(),
            args: vec![parse_number(t)?],
        });
    };
    if !t.ends_with(')') {
        return Err(Error::Config(format!("malformed term {t:?}")));
    }
    let head = t[..open].trim();
    let (scale, name) = match head.rfind('*') {
        Some(star) => (parse_number(&head[..star])?, head[star + 1..].trim()),
        None => match head.strip_prefix('-') {
            Some(rest) => (-1.0, rest.trim()),
            None => (1.0, head),
        },
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Config(format!("bad function name in {t:?}")));
    }
    let inner = &t[open + 1..t.len() - 1];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(parse_number).collect::<Result<Vec<_>>>()?
    };
    Ok(Term {
        scale,
        name: name.to_string(),
        args,
    })
}
