//! Built-in structure equations.

use crate::error::{Error, Result};
use crate::exterior::{ExactForm, MultiIndex};
use crate::nilmanifold::ManifoldSpec;
use crate::scalar::GaussianRational;

fn phi(n: usize, v: &[usize]) -> ExactForm {
    ExactForm::holomorphic(n, MultiIndex::from_one_based(v))
}

fn mixed(n: usize, i: usize, j: usize, c: GaussianRational) -> ExactForm {
    ExactForm::monomial(n, MultiIndex::from_one_based(&[i]), MultiIndex::from_one_based(&[j]), c)
}

/// The complex torus: every `φ_k` closed.
pub fn torus(n: usize) -> ManifoldSpec {
    ManifoldSpec::new(format!("torus {n}"), n, vec![ExactForm::zero(n); n])
}

/// Iwasawa manifold: `dφ3 = φ1∧φ2`.
pub fn iwasawa() -> ManifoldSpec {
    eta_beta_named("iwasawa", 1)
}

/// Dimension `2m+1`, `dφ_{2m+1} = Σ φ_{2i-1}∧φ_{2i}`.
pub fn eta_beta(m: usize) -> ManifoldSpec {
    eta_beta_named(&format!("eta_beta {m}"), m)
}

fn eta_beta_named(name: &str, m: usize) -> ManifoldSpec {
    let n = 2 * m + 1;
    let mut d = vec![ExactForm::zero(n); n];
    d[n - 1] = (1..=m).fold(ExactForm::zero(n), |acc, i| acc.add(&phi(n, &[2 * i - 1, 2 * i])));
    ManifoldSpec::new(name, n, d)
}

/// `∂φ3 = φ1∧φ2`, `∂̄φ3 = −t φ2∧φ̄2`.
pub fn i3_t(t: GaussianRational) -> ManifoldSpec {
    let n = 3;
    let mut d = vec![ExactForm::zero(n); n];
    d[2] = phi(n, &[1, 2]).add(&mixed(n, 2, 2, -t.clone()));
    ManifoldSpec::new(format!("i3_t {t}"), n, d)
}

/// `∂φ3 = φ1∧φ2`, `∂̄φ3 = (i/2)(φ1∧φ̄1 + 2 φ2∧φ̄2)`.
pub fn i3_1() -> ManifoldSpec {
    let n = 3;
    let half_i = GaussianRational::new(crate::scalar::rat(0, 1), crate::scalar::rat(1, 2));
    let mut d = vec![ExactForm::zero(n); n];
    d[2] = phi(n, &[1, 2])
        .add(&mixed(n, 1, 1, half_i.clone()))
        .add(&mixed(n, 2, 2, &half_i * &GaussianRational::from_ints(2, 0)));
    ManifoldSpec::new("i3_1", n, d)
}

/// Four-dimensional nilmanifold with `∂φ3 = ∂φ4 = φ1∧φ2`,
/// `∂̄φ3 = φ1∧φ̄1 + φ2∧φ̄2`, `∂̄φ4 = 0`.
pub fn efv8() -> ManifoldSpec {
    let n = 4;
    let one = GaussianRational::from_ints(1, 0);
    let mut d = vec![ExactForm::zero(n); n];
    d[2] = phi(n, &[1, 2]).add(&mixed(n, 1, 1, one.clone())).add(&mixed(n, 2, 2, one));
    d[3] = phi(n, &[1, 2]);
    ManifoldSpec::new("efv8", n, d)
}

pub const NAMES: &[&str] = &["torus <n>", "iwasawa", "eta_beta <m>", "i3_t <t>", "i3_1", "efv8"];

/// Parses `torus 3`, `torus:3`, `eta_beta 2`, `i3_t 1/10`, `iwasawa`, ...
pub fn lookup(name: &str) -> Result<ManifoldSpec> {
    let trimmed = name.trim();
    let (head, arg) = match trimmed.split_once(|c: char| c == ' ' || c == ':' || c == '=') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (trimmed, None),
    };
    let count = |a: Option<&str>| -> Result<usize> {
        a.ok_or_else(|| Error::UnknownCatalog(format!("{trimmed}: missing size argument")))?
            .parse::<usize>()
            .map_err(|_| Error::UnknownCatalog(trimmed.to_string()))
    };
    let spec = match (head, arg) {
        ("torus", a) => {
            let n = count(a)?;
            if n == 0 || n > 16 {
                return Err(Error::UnknownCatalog(format!("{trimmed}: dimension must be 1..16")));
            }
            torus(n)
        }
        ("iwasawa" | "i3", None) => iwasawa(),
        ("eta_beta", a) => {
            let m = count(a)?;
            if m == 0 || m > 7 {
                return Err(Error::UnknownCatalog(format!("{trimmed}: size must be 1..7")));
            }
            eta_beta(m)
        }
        ("i3_t", Some(a)) => i3_t(a.parse()?),
        ("i3_1", None) => i3_1(),
        ("efv8", None) => efv8(),
        _ => return Err(Error::UnknownCatalog(trimmed.to_string())),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(lookup("eta_beta 2").unwrap().n, 5);
        assert_eq!(lookup("eta_beta:3").unwrap().n, 7);
        assert_eq!(lookup("torus 2").unwrap(), torus(2));
        assert_eq!(lookup("iwasawa").unwrap().n, 3);
        assert!(lookup("i3_t 1/10").unwrap().validate().is_ok());
        assert!(lookup("klein").is_err());
        assert!(lookup("torus").is_err());
    }
}
