//! Model sources: the inline mini-grammar and the JSON model file.
//!
//! Inline forms:
//!
//! ```text
//! poly: c0 c1 ... / d0 d1 ...      ascending coefficients; `/ ...` optional
//! factors: kind(re,im)^m ...       kind: linear | scaled | exp | const
//! linear: z                        W(s) = s - z
//! exp: c                           W(s) = exp(c s)
//! gamma: n=N
//! xi: file=PATH n=N sigma=X        file optional (bundled table)
//! ```
//!
//! Coefficient tokens are real (`-3`, `2.5e-1`) or complex (`1+2i`,
//! `-0.5i`, `i`).

use crate::error::{Error, Result};
use crate::model::{Factor, FactorBase, FactoredFunction, Meromorphic, RationalFunction};
use crate::special::{build_gamma, build_xi, ingest_zeta_zeros, GammaModel, XiModel, ZetaZeroTable};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// A parsed, not yet built, model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelFile {
    Rational(RationalFunction),
    Factored { factors: FactoredFunction },
    Gamma { n: usize },
    Xi {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        n: usize,
        #[serde(default = "half")]
        sigma: f64,
    },
}

fn half() -> f64 {
    0.5
}

/// A built model.
#[derive(Debug, Clone)]
pub enum Model {
    Rational(RationalFunction),
    Factored(FactoredFunction),
    Gamma(GammaModel),
    Xi(XiModel),
}

impl Model {
    pub fn as_meromorphic(&self) -> &dyn Meromorphic {
        match self {
            Model::Rational(m) => m,
            Model::Factored(m) => m,
            Model::Gamma(m) => m,
            Model::Xi(m) => m,
        }
    }

    pub fn factored(&self) -> Option<&FactoredFunction> {
        self.as_meromorphic().factored_form()
    }
}

impl ModelFile {
    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            ModelFile::Rational(r) => Model::Rational(r.clone()),
            ModelFile::Factored { factors } => Model::Factored(factors.clone()),
            ModelFile::Gamma { n } => Model::Gamma(build_gamma(*n)?),
            ModelFile::Xi { file, n, sigma } => Model::Xi(build_xi(&load_table(file.as_deref())?, *n, *sigma)?),
        })
    }
}

pub fn load_table(file: Option<&Path>) -> Result<ZetaZeroTable> {
    match file {
        None => Ok(ZetaZeroTable::bundled()),
        Some(p) => {
            let f = std::fs::File::open(p)
                .map_err(|e| Error::Parse { line: 0, message: format!("{}: {e}", p.display()) })?;
            ingest_zeta_zeros(std::io::BufReader::new(f))
        }
    }
}

pub fn read_model_file(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { line: 0, message: format!("{}: {e}", path.display()) })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse { line: 1, message: message.into() }
}

/// Parses a real or complex token such as `-3`, `1.5e-2`, `2-0.5i`, `i`.
pub fn parse_complex(token: &str) -> Result<Complex64> {
    let tok = token.trim();
    if let Ok(v) = tok.parse::<f64>() {
        return Ok(Complex64::new(v, 0.0));
    }
    let body = tok.strip_suffix('i').ok_or_else(|| parse_err(format!("bad number {tok:?}")))?;
    // split before the last sign that is not an exponent sign or leading
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("", body),
    };
    let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().map_err(|_| parse_err(format!("bad number {tok:?}")))? };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| parse_err(format!("bad number {tok:?}")))?,
    };
    let z = Complex64::new(re, im);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(parse_err(format!("non-finite number {tok:?}")))
    }
}

fn key_values(body: &str) -> Result<Vec<(&str, &str)>> {
    body.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| parse_err(format!("expected key=value, got {kv:?}"))))
        .collect()
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| parse_err(format!("{key} must be a non-negative integer, got {v:?}")))
}

/// Parses the inline grammar.
pub fn parse_inline(spec: &str) -> Result<ModelFile> {
    let (kind, body) = spec.split_once(':').ok_or_else(|| parse_err("expected `kind: ...`"))?;
    let body = body.trim();
    match kind.trim() {
        "poly" => {
            let (num, den) = match body.split_once('/') {
                Some((n, d)) => (n, d),
                None => (body, "1"),
            };
            let coeffs = |s: &str| s.split_whitespace().map(parse_complex).collect::<Result<Vec<_>>>();
            let (num, den) = (coeffs(num)?, coeffs(den)?);
            if num.is_empty() || den.is_empty() {
                return Err(parse_err("poly needs at least one coefficient on each side"));
            }
            Ok(ModelFile::Rational(RationalFunction::new(num, den)?))
        }
        "factors" => {
            let mut factors = Vec::new();
            for tok in body.split_whitespace() {
                factors.push(parse_factor(tok)?);
            }
            if factors.is_empty() {
                return Err(parse_err("factors needs at least one factor"));
            }
            Ok(ModelFile::Factored { factors: FactoredFunction::new(factors)? })
        }
        "linear" => Ok(ModelFile::Factored { factors: FactoredFunction::new(vec![Factor::linear(parse_complex(body)?, 1)])? }),
        "exp" => Ok(ModelFile::Factored { factors: FactoredFunction::new(vec![Factor::exponential(parse_complex(body)?, 1)])? }),
        "gamma" => {
            let mut n = None;
            for (k, v) in key_values(body)? {
                match k {
                    "n" => n = Some(parse_usize(k, v)?),
                    _ => return Err(parse_err(format!("unknown gamma key {k:?}"))),
                }
            }
            Ok(ModelFile::Gamma { n: n.ok_or_else(|| parse_err("gamma needs n=<N>"))? })
        }
        "xi" => {
            let (mut file, mut n, mut sigma) = (None, None, 0.5);
            for (k, v) in key_values(body)? {
                match k {
                    "file" => file = Some(PathBuf::from(v)),
                    "n" => n = Some(parse_usize(k, v)?),
                    "sigma" => sigma = v.parse().map_err(|_| parse_err(format!("bad sigma {v:?}")))?,
                    _ => return Err(parse_err(format!("unknown xi key {k:?}"))),
                }
            }
            Ok(ModelFile::Xi { file, n: n.ok_or_else(|| parse_err("xi needs n=<N>"))?, sigma })
        }
        other => Err(parse_err(format!("unknown model kind {other:?}"))),
    }
}

/// `kind(re,im)^m` with `^m` optional.
fn parse_factor(tok: &str) -> Result<Factor> {
    let (head, m) = match tok.rsplit_once('^') {
        Some((h, m)) if h.ends_with(')') => {
            (h, m.parse::<i32>().map_err(|_| parse_err(format!("bad multiplicity in {tok:?}")))?)
        }
        _ => (tok, 1),
    };
    let open = head.find('(').ok_or_else(|| parse_err(format!("expected kind(re,im) in {tok:?}")))?;
    let args = head[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| parse_err(format!("missing ')' in {tok:?}")))?;
    let (re, im) = args.split_once(',').ok_or_else(|| parse_err(format!("expected (re,im) in {tok:?}")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| parse_err(format!("bad number in {tok:?}")));
    let v = Complex64::new(num(re)?, num(im)?);
    let base = match &head[..open] {
        "linear" => FactorBase::Linear(v),
        "scaled" => FactorBase::Scaled(v),
        "exp" | "exponential" => FactorBase::Exponential(v),
        "const" | "constant" => FactorBase::Constant(v),
        k => return Err(parse_err(format!("unknown factor kind {k:?}"))),
    };
    Factor::new(base, m)
}
