//! JSON reports (`pkahler-report/1`) and their independent re-verification.
//!
//! Maps are `BTreeMap`-backed and carry no timestamps, so identical inputs give
//! byte-identical output. Every form is stored as exact coefficient lists.

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::classifier::{
    check_closure, verify_certificate, Cell, CellSource, CertificateCase, ClassificationTable, ClosureClass,
    CurrentCertificate, Status,
};
use crate::error::{Error, Result};
use crate::exterior::{ExactForm, MultiIndex};
use crate::grassmann::OptimizerOptions;
use crate::nilmanifold::ManifoldSpec;
use crate::positivity::{check_transverse, Membership};
use crate::scalar::GaussianRational;
use crate::specfile::{parse_spec, print_spec};

pub const SCHEMA: &str = "pkahler-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn spec_digest(spec: &ManifoldSpec) -> String {
    let digest = Sha256::digest(print_spec(spec).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn spec_json(spec: &ManifoldSpec) -> Value {
    json!({
        "name": spec.name,
        "dimension": spec.n,
        "text": print_spec(spec),
        "sha256": spec_digest(spec),
    })
}

fn rational_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let g: GaussianRational = s.parse()?;
    if !g.im.is_zero() {
        return Err(Error::Parse(format!("`{s}` is not real")));
    }
    Ok(g.re)
}

/// `{"n", "terms": [[hol, anti, re, im], ...], "text"}` with 1-based indices.
pub fn form_json(f: &ExactForm) -> Value {
    let terms: Vec<Value> = f
        .ordered_terms()
        .into_iter()
        .map(|((i, j), c)| {
            let one_based = |m: MultiIndex| m.indices().iter().map(|k| k + 1).collect::<Vec<_>>();
            json!([one_based(i), one_based(j), rational_str(&c.re), rational_str(&c.im)])
        })
        .collect();
    json!({ "n": f.n(), "terms": terms, "text": f.to_string() })
}

pub fn form_from_json(v: &Value) -> Result<ExactForm> {
    let bad = |what: &str| Error::Parse(format!("malformed form: {what}"));
    let n = v["n"].as_u64().ok_or_else(|| bad("missing n"))? as usize;
    if n == 0 || n > 16 {
        return Err(bad("dimension out of range"));
    }
    let mut f = ExactForm::zero(n);
    for t in v["terms"].as_array().ok_or_else(|| bad("missing terms"))? {
        let idx = |k: usize| -> Result<MultiIndex> {
            let list = t[k].as_array().ok_or_else(|| bad("index list"))?;
            let mut out = Vec::new();
            for x in list {
                let x = x.as_u64().ok_or_else(|| bad("index"))? as usize;
                if x == 0 || x > n {
                    return Err(bad("index out of range"));
                }
                out.push(x);
            }
            Ok(MultiIndex::from_one_based(&out))
        };
        let part = |k: usize| -> Result<BigRational> { parse_rational(t[k].as_str().ok_or_else(|| bad("coefficient"))?) };
        f.add_term(idx(0)?, idx(1)?, GaussianRational::new(part(2)?, part(3)?));
    }
    Ok(f)
}

fn case_name(case: CertificateCase) -> &'static str {
    match case {
        CertificateCase::BoundaryComponent => "boundary-component",
        CertificateCase::ClosedBoundaryComponent => "closed-boundary-component",
        CertificateCase::Boundary => "boundary",
        CertificateCase::DdbarExact => "ddbar-exact",
        CertificateCase::SimpleExactHolomorphic => "simple-exact-holomorphic",
    }
}

fn case_from_name(s: &str) -> Result<CertificateCase> {
    Ok(match s {
        "boundary-component" => CertificateCase::BoundaryComponent,
        "closed-boundary-component" => CertificateCase::ClosedBoundaryComponent,
        "boundary" => CertificateCase::Boundary,
        "ddbar-exact" => CertificateCase::DdbarExact,
        "simple-exact-holomorphic" => CertificateCase::SimpleExactHolomorphic,
        _ => return Err(Error::Parse(format!("unknown certificate case `{s}`"))),
    })
}

pub fn certificate_json(c: &CurrentCertificate) -> Value {
    let gens: Vec<Value> = c.generators.iter().map(|(w, e)| json!({ "weight": rational_str(w), "eta": form_json(e) })).collect();
    json!({
        "case": case_name(c.case),
        "k": c.k,
        "t": form_json(&c.t),
        "generators": gens,
        "potential": form_json(&c.potential),
        "alpha": c.alpha.as_ref().map(form_json),
    })
}

pub fn certificate_from_json(v: &Value) -> Result<CurrentCertificate> {
    let bad = |what: &str| Error::Parse(format!("malformed certificate: {what}"));
    let mut generators = Vec::new();
    for g in v["generators"].as_array().ok_or_else(|| bad("generators"))? {
        let w = parse_rational(g["weight"].as_str().ok_or_else(|| bad("weight"))?)?;
        generators.push((w, form_from_json(&g["eta"])?));
    }
    Ok(CurrentCertificate {
        case: case_from_name(v["case"].as_str().ok_or_else(|| bad("case"))?)?,
        k: v["k"].as_u64().ok_or_else(|| bad("k"))? as usize,
        t: form_from_json(&v["t"])?,
        generators,
        potential: form_from_json(&v["potential"])?,
        alpha: if v["alpha"].is_null() { None } else { Some(form_from_json(&v["alpha"])?) },
    })
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Yes => "yes",
        Status::No => "no",
        Status::Unknown => "unknown",
    }
}

fn source_json(s: &CellSource) -> Value {
    match s {
        CellSource::Decided => json!({ "kind": "decided" }),
        CellSource::Implied(from) => json!({ "kind": "implied", "from": from }),
        CellSource::Automatic => json!({ "kind": "automatic" }),
        CellSource::Factor(what) => json!({ "kind": "factor", "detail": what }),
        CellSource::Construction(what) => json!({ "kind": "construction", "detail": what }),
    }
}

pub fn cell_json(c: &Cell) -> Value {
    json!({
        "label": c.label(),
        "p": c.p,
        "class": c.class.name(),
        "status": status_name(c.status),
        "source": source_json(&c.source),
        "reason": c.reason,
        "witness": c.witness.as_ref().map(|w| json!({
            "omega": form_json(&w.omega),
            "aux": form_json(&w.aux),
            "min_value": w.min_value,
            "normalized_min": w.normalized_min,
            "certified": w.certified,
        })),
        "certificate": c.certificate.as_ref().map(certificate_json),
        "trace": {
            "rounds": c.trace.slack.len(),
            "slack": c.trace.slack,
            "witness_planes": c.trace.witnesses,
            "plane_minima": c.trace.plane_minima,
        },
    })
}

/// Plain-text grid of a table followed by the source of each settled cell.
pub fn render_table(t: &ClassificationTable) -> String {
    let mut out = format!("{} (n = {})\n", t.name, t.n);
    out.push_str(&format!("{:<4}", "p"));
    for c in ClosureClass::ALL {
        out.push_str(&format!("{:<9}", c.name()));
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for p in 1..t.n {
        out.push_str(&format!("{:<4}", p));
        for c in ClosureClass::ALL {
            let s = t.status(p, c).map_or("-", status_name);
            out.push_str(&format!("{:<9}", s));
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
    }
    for cell in &t.cells {
        let how = match &cell.source {
            CellSource::Decided => match cell.status {
                Status::Yes => "positive form found".to_string(),
                Status::No => format!("certificate ({})", cell.certificate.as_ref().map_or("?", |c| case_name(c.case))),
                Status::Unknown => cell.reason.clone().unwrap_or_default(),
            },
            CellSource::Implied(from) => format!("implied by {from}"),
            CellSource::Automatic => "top degree".to_string(),
            CellSource::Factor(what) | CellSource::Construction(what) => what.clone(),
        };
        out.push_str(&format!("  {}: {} ({})\n", cell.label(), status_name(cell.status), how));
    }
    if t.invariant_level_only {
        out.push_str("  positive answers concern invariant forms only\n");
    }
    out
}

pub fn table_json(t: &ClassificationTable) -> Value {
    json!({
        "name": t.name,
        "n": t.n,
        "invariant_level_only": t.invariant_level_only,
        "cells": t.cells.iter().map(cell_json).collect::<Vec<_>>(),
    })
}

/// Top-level envelope shared by every command.
pub fn envelope(command: &str, seed: u64, spec: Option<&ManifoldSpec>, body: Value, rendering: String) -> Value {
    json!({
        "schema": SCHEMA,
        "tool_version": TOOL_VERSION,
        "command": command,
        "seeds": { "base": seed },
        "spec": spec.map(spec_json),
        "result": body,
        "rendering": rendering,
    })
}

pub fn to_text(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("values serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Default)]
pub struct VerifySummary {
    pub checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn class_from(v: &Value) -> Result<ClosureClass> {
    v.as_str().ok_or_else(|| Error::Parse("missing class".into()))?.parse()
}

/// Re-checks every settled cell from the report alone: certificates by their
/// exact equations, witnesses by exact closure plus a transversality check
/// seeded from the report, implied cells against the cell they cite.
pub fn verify_report(report: &Value) -> Result<VerifySummary> {
    if report["schema"] != SCHEMA {
        return Err(Error::Parse(format!("expected schema {SCHEMA}")));
    }
    let cells = report["result"]["table"]["cells"].as_array().cloned().unwrap_or_default();
    if report["spec"].is_null() {
        return Ok(VerifySummary::default());
    }
    let text = report["spec"]["text"].as_str().ok_or_else(|| Error::Parse("missing spec text".into()))?;
    let spec = parse_spec(text)?;
    spec.validate()?;
    let mut summary = VerifySummary::default();
    if report["spec"]["sha256"].as_str() != Some(spec_digest(&spec).as_str()) {
        summary.failures.push("spec digest mismatch".into());
    }
    let seed = report["seeds"]["base"].as_u64().unwrap_or(42);
    let opts = OptimizerOptions::default().with_seed(seed);
    let status_of = |label: &str| cells.iter().find(|c| c["label"] == label).map(|c| c["status"].clone());
    for c in &cells {
        let label = c["label"].as_str().unwrap_or("?").to_string();
        let p = c["p"].as_u64().ok_or_else(|| Error::Parse("missing p".into()))? as usize;
        let class = class_from(&c["class"])?;
        let status = c["status"].as_str().unwrap_or("");
        let mut fail = |m: String| summary.failures.push(format!("{label}: {m}"));
        match (status, c["source"]["kind"].as_str()) {
            ("no", Some("implied")) | ("yes", Some("implied")) => {
                let from = c["source"]["from"].as_str().unwrap_or("");
                if status_of(from).as_ref().and_then(Value::as_str) != Some(status) {
                    fail(format!("cited cell {from} does not have status {status}"));
                }
            }
            ("yes", Some("automatic")) => {
                if p + 1 != spec.n || class != ClosureClass::PL {
                    fail("only the top PL cell is automatic".into());
                }
            }
            ("no", _) => {
                let cert = certificate_from_json(&c["certificate"])?;
                if ClosureClass::ALL.iter().position(|&x| x == class) > ClosureClass::ALL.iter().position(|&x| x == cert.case.excludes()) {
                    fail("certificate excludes a stronger class only".into());
                } else if cert.k + p != spec.n {
                    fail("certificate degree does not match".into());
                } else if let Err(e) = verify_certificate(&spec, &cert) {
                    fail(e);
                }
            }
            ("yes", _) => {
                let w = &c["witness"];
                let omega = form_from_json(&w["omega"])?;
                let aux = form_from_json(&w["aux"])?;
                if let Err(e) = check_closure(&spec, p, class, &omega, &aux) {
                    fail(e);
                } else if check_transverse(&omega, &opts)?.status != Membership::StrictlyIn {
                    fail("witness is not transverse".into());
                }
            }
            _ => {
                summary.skipped += 1;
                continue;
            }
        }
        summary.checked += 1;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::classifier::{classification_table, Budget};

    #[test]
    fn forms_round_trip() {
        let f = crate::specfile::parse_form(4, "(1/2 - 3 i) phi1^phi2^bar3 + 7 phi4^bar4").unwrap();
        assert_eq!(form_from_json(&form_json(&f)).unwrap(), f);
    }

    #[test]
    fn table_report_verifies_and_is_stable() {
        let spec = catalog::efv8();
        let budget = Budget::default();
        let build = || {
            let t = classification_table(&spec, &budget).unwrap();
            to_text(&envelope("classify", 42, Some(&spec), json!({ "table": table_json(&t) }), render_table(&t)))
        };
        let a = build();
        assert_eq!(a, build());
        let v: Value = serde_json::from_str(&a).unwrap();
        let s = verify_report(&v).unwrap();
        assert!(s.passed(), "{:?}", s.failures);
        assert_eq!(s.checked, 12);

        // Tampering with a potential is caught.
        let mut bad = v.clone();
        let cells = bad["result"]["table"]["cells"].as_array_mut().unwrap();
        let cell = cells.iter_mut().find(|c| c["label"] == "2PL").unwrap();
        cell["certificate"]["potential"] = form_json(&ExactForm::zero(4));
        assert!(!verify_report(&bad).unwrap().passed());
    }
}
