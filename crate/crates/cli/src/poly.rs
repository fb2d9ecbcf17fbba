use std::fs;

use anyhow::{anyhow, Context, Result};
use polyergo::PolynomialMap;

/// Parses a polynomial mapping given as inline JSON, a `.json` path, or
/// univariate shorthand such as `5n^2+3n`. Components of a vector-valued
/// mapping are separated by `;`, as in `n;n^2`.
pub fn parse_poly(spec: &str) -> Result<PolynomialMap> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        return Ok(PolynomialMap::from_json(spec)?);
    }
    if spec.ends_with(".json") {
        let text = fs::read_to_string(spec).with_context(|| format!("reading polynomial file {spec}"))?;
        return Ok(PolynomialMap::from_json(&text)?);
    }
    let components = spec
        .split(';')
        .map(parse_component)
        .collect::<Result<Vec<_>>>()?;
    Ok(PolynomialMap::new(1, components)?)
}

fn parse_component(text: &str) -> Result<Vec<(Vec<u32>, i64)>> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(anyhow!("empty polynomial component"));
    }
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..=bytes.len() {
        if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^') {
            terms.push(parse_term(&s[start..i]).with_context(|| format!("in polynomial {text:?}"))?);
            start = i;
        }
    }
    Ok(terms)
}

fn parse_term(t: &str) -> Result<(Vec<u32>, i64)> {
    let (sign, body) = match t.as_bytes().first() {
        Some(b'-') => (-1, &t[1..]),
        Some(b'+') => (1, &t[1..]),
        _ => (1, t),
    };
    let (coeff, power) = match body.find('n') {
        None => (body, 0u32),
        Some(pos) => {
            let rest = &body[pos + 1..];
            let power = if rest.is_empty() {
                1
            } else {
                rest.strip_prefix('^')
                    .ok_or_else(|| anyhow!("expected '^' after n in term {t:?}"))?
                    .parse()
                    .map_err(|_| anyhow!("bad exponent in term {t:?}"))?
            };
            (body[..pos].trim_end_matches('*'), power)
        }
    };
    let c: i64 = if coeff.is_empty() {
        1
    } else {
        coeff.parse().map_err(|_| anyhow!("bad coefficient in term {t:?}"))?
    };
    Ok((vec![power], sign * c))
}
