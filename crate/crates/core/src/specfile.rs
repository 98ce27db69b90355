//! Text formats for structure equations and forms.
//!
//! ```text
//! # comment
//! name: efv8
//! dimension: 4
//! d phi3 = phi1^phi2 + phi1^bar1 + phi2^bar2
//! d phi4 = phi1^phi2
//! ```
//!
//! A term is an optional coefficient followed by a wedge of factors `phi<k>`
//! and `bar<k>`. Coefficients are Gaussian-rational literals such as `3`,
//! `-1/2`, `i`, `(1/2 - 3/4 i)`; a bare `-` negates. Omitted equations are
//! `d phi<k> = 0`. A form file carries `dimension:` and a single `form = ...`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exterior::ExactForm;
use crate::nilmanifold::ManifoldSpec;
use crate::scalar::GaussianRational;

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Splits at top-level `+`/`-` signs that start a new term; signs inside
/// parentheses or directly after `/` belong to the coefficient.
fn split_terms(expr: &str) -> Vec<String> {
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut prev_sig: Option<char> = None;
    for ch in expr.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let starts_term = depth == 0
            && (ch == '+' || ch == '-')
            && prev_sig.is_some_and(|p| p != '/' && p != '(' && p != '^')
            && !cur.trim().is_empty();
        if starts_term {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
        if !ch.is_whitespace() {
            prev_sig = Some(ch);
        }
    }
    if !cur.trim().is_empty() {
        terms.push(cur);
    }
    terms
}

fn parse_factor(n: usize, tok: &str) -> std::result::Result<ExactForm, String> {
    let (bar, digits) = if let Some(d) = tok.strip_prefix("phi") {
        (false, d)
    } else if let Some(d) = tok.strip_prefix("bar") {
        (true, d)
    } else {
        return Err(format!("unknown factor `{tok}`"));
    };
    let k: usize = digits.parse().map_err(|_| format!("bad index in `{tok}`"))?;
    if k == 0 || k > n {
        return Err(format!("`{tok}` is outside the frame 1..{n}"));
    }
    Ok(if bar { ExactForm::phi_bar(n, k - 1) } else { ExactForm::phi(n, k - 1) })
}

fn parse_term(n: usize, term: &str) -> std::result::Result<ExactForm, String> {
    let t = term.trim();
    let (sign, rest) = match t.strip_prefix('+') {
        Some(r) => (1, r.trim()),
        None => match t.strip_prefix('-') {
            Some(r) => (-1, r.trim()),
            None => (1, t),
        },
    };
    // The monomial is the trailing run of `phi`/`bar` factors.
    let start = ["phi", "bar"].iter().filter_map(|p| rest.find(p)).min();
    let (coeff_str, mono_str) = match start {
        Some(s) => (rest[..s].trim(), rest[s..].trim()),
        None => (rest, ""),
    };
    let mut coeff = if coeff_str.is_empty() {
        GaussianRational::from_ints(1, 0)
    } else {
        coeff_str.parse::<GaussianRational>().map_err(|e| e.to_string())?
    };
    if sign < 0 {
        coeff = -coeff;
    }
    let mut form = ExactForm::constant(n, coeff);
    if mono_str.is_empty() || mono_str == "1" {
        return Ok(form);
    }
    for tok in mono_str.split('^') {
        form = form.wedge(&parse_factor(n, tok.trim())?);
    }
    Ok(form)
}

/// A sum of terms on a frame of dimension `n`; `0` is the zero form.
pub fn parse_form(n: usize, expr: &str) -> Result<ExactForm> {
    parse_form_at(n, expr, 1)
}

fn parse_form_at(n: usize, expr: &str, line: usize) -> Result<ExactForm> {
    let expr = expr.trim();
    if expr.is_empty() {
        return Err(parse_err(line, "empty expression"));
    }
    if expr == "0" {
        return Ok(ExactForm::zero(n));
    }
    let mut acc = ExactForm::zero(n);
    for term in split_terms(expr) {
        acc = acc.add(&parse_term(n, &term).map_err(|e| parse_err(line, format!("{e} in `{}`", term.trim())))?);
    }
    Ok(acc)
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix(':')).map(str::trim)
}

/// Parses structure equations. The result is not validated.
pub fn parse_spec(text: &str) -> Result<ManifoldSpec> {
    let mut name = None;
    let mut n = None;
    let mut eqs: Vec<(usize, usize, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(v) = header_value(line, "name") {
            name = Some(v.to_string());
        } else if let Some(v) = header_value(line, "dimension") {
            let d: usize = v.parse().map_err(|_| parse_err(line_no, format!("bad dimension `{v}`")))?;
            if d == 0 || d > 16 {
                return Err(parse_err(line_no, "dimension must be 1..16"));
            }
            n = Some(d);
        } else if let Some(rest) = line.strip_prefix('d') {
            let (lhs, rhs) = rest.split_once('=').ok_or_else(|| parse_err(line_no, "expected `d phi<k> = ...`"))?;
            let k: usize = lhs
                .trim()
                .strip_prefix("phi")
                .and_then(|d| d.trim().parse().ok())
                .ok_or_else(|| parse_err(line_no, format!("bad left-hand side `d{lhs}`")))?;
            eqs.push((line_no, k, rhs.to_string()));
        } else {
            return Err(parse_err(line_no, format!("unrecognized line `{line}`")));
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing `dimension:` header".into()))?;
    let mut d_phi = vec![ExactForm::zero(n); n];
    let mut seen = vec![false; n];
    for (line_no, k, rhs) in eqs {
        if k == 0 || k > n {
            return Err(parse_err(line_no, format!("phi{k} is outside the frame 1..{n}")));
        }
        if std::mem::replace(&mut seen[k - 1], true) {
            return Err(parse_err(line_no, format!("second equation for phi{k}")));
        }
        d_phi[k - 1] = parse_form_at(n, &rhs, line_no)?;
    }
    Ok(ManifoldSpec::new(name.unwrap_or_else(|| "unnamed".into()), n, d_phi))
}

/// Canonical text; `parse_spec(print_spec(s)) == s`.
pub fn print_spec(spec: &ManifoldSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name: {}", spec.name);
    let _ = writeln!(out, "dimension: {}", spec.n);
    for (k, f) in spec.d_phi.iter().enumerate() {
        if !f.is_zero() {
            let _ = writeln!(out, "d phi{} = {}", k + 1, f);
        }
    }
    out
}

/// `dimension: n` followed by `form = ...`.
pub fn parse_form_file(text: &str) -> Result<ExactForm> {
    let mut n = None;
    let mut form = None;
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(v) = header_value(line, "dimension") {
            let d: usize = v.parse().map_err(|_| parse_err(line_no, format!("bad dimension `{v}`")))?;
            if d == 0 || d > 16 {
                return Err(parse_err(line_no, "dimension must be 1..16"));
            }
            n = Some(d);
        } else if let Some(rest) = line.strip_prefix("form") {
            let rhs = rest.trim_start().strip_prefix('=').ok_or_else(|| parse_err(line_no, "expected `form = ...`"))?;
            let n = n.ok_or_else(|| parse_err(line_no, "`dimension:` must come first"))?;
            if form.is_some() {
                return Err(parse_err(line_no, "second `form =` line"));
            }
            form = Some(parse_form_at(n, rhs, line_no)?);
        } else {
            return Err(parse_err(line_no, format!("unrecognized line `{line}`")));
        }
    }
    form.ok_or_else(|| Error::Parse("missing `form =` line".into()))
}

pub fn print_form_file(form: &ExactForm) -> String {
    format!("dimension: {}\nform = {}\n", form.n(), form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exterior::MultiIndex;

    #[test]
    fn catalog_round_trips() {
        for spec in [catalog::efv8(), catalog::i3_1(), catalog::eta_beta(3), catalog::torus(2), catalog::i3_t("1/10 - 2 i".parse().unwrap())] {
            let text = print_spec(&spec);
            let back = parse_spec(&text).unwrap();
            assert_eq!(back, spec, "{text}");
            assert_eq!(print_spec(&back), text);
        }
    }

    #[test]
    fn hand_written_spec() {
        let text = "# efv8\nname: efv8\ndimension: 4\nd phi3 = phi1^phi2 + phi1^bar1 + phi2^bar2\nd phi4 = phi1^phi2\n";
        assert_eq!(parse_spec(text).unwrap(), catalog::efv8());
        let text = "dimension: 3\nd phi3 = phi1^phi2 + (1/2 i) phi1^bar1 + i phi2^bar2\n";
        assert_eq!(parse_spec(text).unwrap().d_phi, catalog::i3_1().d_phi);
    }

    #[test]
    fn signs_and_reordering() {
        let f = parse_form(3, "- phi2^phi1 - 1/2 bar1^phi3").unwrap();
        let one = GaussianRational::from_ints(1, 0);
        let mut want = ExactForm::monomial(3, MultiIndex::from_one_based(&[1, 2]), MultiIndex::from_one_based(&[]), one);
        want.add_term(MultiIndex::from_one_based(&[3]), MultiIndex::from_one_based(&[1]), GaussianRational::from_frac(1, 2));
        assert_eq!(f, want);
        assert!(parse_form(3, "0").unwrap().is_zero());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_spec("d phi1 = phi1^phi2\n").is_err());
        assert!(parse_spec("dimension: 2\nd phi3 = phi1^phi2\n").is_err());
        assert!(parse_spec("dimension: 2\nd phi2 = phi1^psi2\n").is_err());
        assert!(parse_spec("dimension: 2\nd phi2 = phi1\nd phi2 = 0\n").is_err());
        // A (0,2)-part parses and is then named by validation.
        let spec = parse_spec("dimension: 3\nd phi3 = bar1^bar2\n").unwrap();
        let msg = spec.validate().unwrap_err().to_string();
        assert!(msg.contains("bar1^bar2"), "{msg}");
    }

    #[test]
    fn form_file_round_trip() {
        let f = parse_form(3, "(1/2 i) phi1^bar1 + (3 - i) phi1^bar2 + (3 + i) phi2^bar1").unwrap();
        assert_eq!(parse_form_file(&print_form_file(&f)).unwrap(), f);
    }
}
