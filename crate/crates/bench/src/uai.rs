//! Reading and writing pairwise Markov networks in the UAI `MARKOV` format.
//!
//! Tables hold potentials; the model stores their logarithms. Zero entries
//! are clamped to `1e-300` before taking the log. Several factors over the
//! same scope are multiplied together.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;
use trwfw_core::MarkovRandomField;

/// Smallest potential value before taking logarithms.
pub const MIN_POTENTIAL: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum UaiError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("expected a MARKOV network, found `{0}`")]
    Kind(String),
    #[error("unexpected end of input while reading {0}")]
    Eof(&'static str),
    #[error("token {index} (`{token}`): expected {expected}")]
    Token { index: usize, token: String, expected: &'static str },
    #[error("factor {factor}: {message}")]
    Factor { factor: usize, message: String },
    #[error("trailing data after the last table: `{0}`")]
    Trailing(String),
    #[error(transparent)]
    Model(#[from] trwfw_core::Error),
}

struct Tokens<'a> {
    iter: std::iter::Enumerate<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self { iter: text.split_whitespace().enumerate() }
    }

    fn next_raw(&mut self, what: &'static str) -> Result<(usize, &'a str), UaiError> {
        self.iter.next().ok_or(UaiError::Eof(what))
    }

    fn usize(&mut self, what: &'static str) -> Result<usize, UaiError> {
        let (index, tok) = self.next_raw(what)?;
        tok.parse().map_err(|_| UaiError::Token { index, token: tok.into(), expected: what })
    }

    fn f64(&mut self, what: &'static str) -> Result<f64, UaiError> {
        let (index, tok) = self.next_raw(what)?;
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            _ => Err(UaiError::Token { index, token: tok.into(), expected: what }),
        }
    }
}

/// Parses a pairwise `MARKOV` network.
pub fn parse_uai(text: &str) -> Result<MarkovRandomField, UaiError> {
    let mut t = Tokens::new(text);
    let (_, kind) = t.next_raw("network type")?;
    if kind != "MARKOV" {
        return Err(UaiError::Kind(kind.into()));
    }
    let n = t.usize("number of variables")?;
    let cards: Vec<usize> = (0..n).map(|_| t.usize("cardinality")).collect::<Result<_, _>>()?;
    let num_factors = t.usize("number of factors")?;
    let mut scopes = Vec::with_capacity(num_factors);
    for f in 0..num_factors {
        let arity = t.usize("factor arity")?;
        if arity == 0 || arity > 2 {
            return Err(UaiError::Factor { factor: f, message: format!("arity {arity}, only unary and pairwise factors are supported") });
        }
        let scope: Vec<usize> = (0..arity).map(|_| t.usize("variable index")).collect::<Result<_, _>>()?;
        if let Some(&v) = scope.iter().find(|&&v| v >= n) {
            return Err(UaiError::Factor { factor: f, message: format!("variable {v} out of range") });
        }
        if arity == 2 && scope[0] == scope[1] {
            return Err(UaiError::Factor { factor: f, message: format!("repeated variable {}", scope[0]) });
        }
        scopes.push(scope);
    }

    let mut node_pots: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut edge_pots: Vec<Vec<f64>> = Vec::new();
    let mut edge_lookup = std::collections::HashMap::new();
    for (f, scope) in scopes.iter().enumerate() {
        let expected: usize = scope.iter().map(|&v| cards[v]).product();
        let count = t.usize("table size")?;
        if count != expected {
            return Err(UaiError::Factor { factor: f, message: format!("table has {count} entries, scope needs {expected}") });
        }
        let values: Vec<f64> = (0..count)
            .map(|_| t.f64("nonnegative potential").map(|v| v.max(MIN_POTENTIAL).ln()))
            .collect::<Result<_, _>>()?;
        if let [v] = scope[..] {
            for (p, x) in node_pots[v].iter_mut().zip(&values) {
                *p += x;
            }
            continue;
        }
        let (a, b) = (scope[0], scope[1]);
        let key = (a.min(b), a.max(b));
        let e = *edge_lookup.entry(key).or_insert_with(|| {
            edges.push((a, b));
            edge_pots.push(vec![0.0; expected]);
            edges.len() - 1
        });
        let (ea, eb) = edges[e];
        let cb = cards[eb];
        for xa in 0..cards[a] {
            for xb in 0..cards[b] {
                let v = values[xa * cards[b] + xb];
                // store in the orientation the edge was first seen with
                let idx = if (ea, eb) == (a, b) { xa * cb + xb } else { xb * cb + xa };
                edge_pots[e][idx] += v;
            }
        }
    }
    if let Some((_, tok)) = t.iter.next() {
        return Err(UaiError::Trailing(tok.into()));
    }
    Ok(MarkovRandomField::new(cards, edges, node_pots, edge_pots)?)
}

pub fn read_uai(path: &Path) -> Result<MarkovRandomField, UaiError> {
    let text = std::fs::read_to_string(path).map_err(|source| UaiError::Io { path: path.display().to_string(), source })?;
    parse_uai(&text)
}

/// Serialises `mrf` with one unary factor per variable followed by one
/// pairwise factor per edge.
pub fn write_uai(mrf: &MarkovRandomField) -> String {
    let mut out = String::from("MARKOV\n");
    let n = mrf.num_vars();
    let _ = writeln!(out, "{n}");
    let cards: Vec<String> = mrf.cardinalities().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "{}", cards.join(" "));
    let _ = writeln!(out, "{}", n + mrf.num_edges());
    for v in 0..n {
        let _ = writeln!(out, "1 {v}");
    }
    for &(a, b) in mrf.edges() {
        let _ = writeln!(out, "2 {a} {b}");
    }
    let mut table = |pots: &[f64]| {
        out.push('\n');
        let _ = writeln!(out, "{}", pots.len());
        let vals: Vec<String> = pots.iter().map(|p| format!("{:e}", p.exp())).collect();
        let _ = writeln!(out, " {}", vals.join(" "));
    };
    for v in 0..n {
        table(mrf.node_potential(v));
    }
    for e in 0..mrf.num_edges() {
        table(mrf.edge_potential(e));
    }
    out
}

pub fn save_uai(mrf: &MarkovRandomField, path: &Path) -> Result<(), UaiError> {
    std::fs::write(path, write_uai(mrf)).map_err(|source| UaiError::Io { path: path.display().to_string(), source })
}
