//! TOML codebook documents.
//!
//! ```toml
//! format_version = 1
//! K = 4
//! J = 6
//! M = 4
//! design_med = 1.0e0          # optional
//! graph = [[1, 1, 1, 0, 0, 0], ...]
//!
//! [[users]]
//! user = 1                    # 1-based
//! support = [1, 2]            # 1-based resource indices
//! codewords = [[...], ...]    # K rows of M values
//!
//! [users.symmetric]           # optional, all users or none
//! magnitudes = [...]
//! column_order = [1, 3, 4, 2] # Hadamard columns, 1-based
//! ```
//!
//! Floats are written with 17 significant digits so a save/load cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use scma_core::symmetric::{hadamard_level, hadamard_sign, symmetric_codebook, SignMatrix, SymmetricProfile};
use scma_core::{Codebook, FactorGraph, Matrix};
use serde::Deserialize;

use crate::{Result, SimError};

pub const FORMAT_VERSION: u32 = 1;

/// Largest tolerated gap between stored codewords and their symmetric profile.
pub const PROFILE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookDocument {
    pub graph: FactorGraph,
    pub codebooks: Vec<Codebook>,
    pub profiles: Option<Vec<SymmetricProfile>>,
    pub design_med: Option<f64>,
}

impl CodebookDocument {
    pub fn new(graph: FactorGraph, codebooks: Vec<Codebook>) -> Self {
        CodebookDocument { graph, codebooks, profiles: None, design_med: None }
    }

    pub fn with_profiles(mut self, profiles: Vec<SymmetricProfile>) -> Self {
        self.profiles = Some(profiles);
        self
    }

    pub fn with_med(mut self, med: f64) -> Self {
        self.design_med = Some(med);
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: i64,
    #[serde(rename = "K")]
    k: i64,
    #[serde(rename = "J")]
    j: i64,
    #[serde(rename = "M")]
    m: i64,
    design_med: Option<f64>,
    graph: Vec<Vec<i64>>,
    #[serde(default)]
    users: Vec<RawUser>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUser {
    user: i64,
    support: Vec<i64>,
    codewords: Vec<Vec<f64>>,
    symmetric: Option<RawSymmetric>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymmetric {
    magnitudes: Vec<f64>,
    column_order: Vec<i64>,
}

/// Which Hadamard column sits at each position of `sign`, if it is a column permutation.
pub fn column_order_of(sign: &SignMatrix) -> Option<Vec<usize>> {
    let level = hadamard_level(sign.cols()).ok()?;
    let h = hadamard_sign(level);
    if h.rows() != sign.rows() {
        return None;
    }
    let mut used = vec![false; h.cols()];
    let mut order = Vec::with_capacity(sign.cols());
    for c in 0..sign.cols() {
        let col = sign.column(c);
        let hit = (0..h.cols()).find(|&hc| !used[hc] && h.column(hc) == col)?;
        used[hit] = true;
        order.push(hit);
    }
    Some(order)
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn list<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    let parts: Vec<String> = items.into_iter().map(f).collect();
    format!("[{}]", parts.join(", "))
}

/// Serializes a document; fails on non-finite values or non-Hadamard sign patterns.
pub fn to_string(doc: &CodebookDocument) -> Result<String> {
    let (k, j) = (doc.graph.resources(), doc.graph.users());
    let m = doc.codebooks.first().map_or(0, Codebook::size);
    if doc.codebooks.len() != j {
        return Err(SimError::format("users", format!("{} codebooks for J = {j}", doc.codebooks.len())));
    }
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "K = {k}\nJ = {j}\nM = {m}");
    if let Some(med) = doc.design_med {
        if !med.is_finite() {
            return Err(SimError::format("design_med", "not finite"));
        }
        let _ = writeln!(out, "design_med = {}", float(med));
    }
    out.push_str("graph = [\n");
    for row in doc.graph.incidence_rows() {
        let _ = writeln!(out, "  {},", list(row, |v| v.to_string()));
    }
    out.push_str("]\n");

    for (u, cb) in doc.codebooks.iter().enumerate() {
        let at = format!("users[{u}]");
        if cb.resources() != k || cb.size() != m {
            return Err(SimError::format(at, "codebook shape differs from the document"));
        }
        if cb.matrix().as_slice().iter().any(|v| !v.is_finite()) {
            return Err(SimError::format(at, "codebook holds a non-finite value"));
        }
        let _ = writeln!(out, "\n[[users]]\nuser = {}", u + 1);
        let _ = writeln!(out, "support = {}", list(cb.support(), |r| (r + 1).to_string()));
        out.push_str("codewords = [\n");
        for r in 0..k {
            let _ = writeln!(out, "  {},", list(0..m, |c| float(cb.value(r, c))));
        }
        out.push_str("]\n");
        if let Some(p) = doc.profiles.as_ref().and_then(|ps| ps.get(u)) {
            let order = column_order_of(p.sign())
                .ok_or_else(|| SimError::format(format!("{at}.symmetric"), "sign pattern is not a Hadamard column order"))?;
            if p.magnitudes().iter().any(|v| !v.is_finite()) {
                return Err(SimError::format(format!("{at}.symmetric"), "non-finite magnitude"));
            }
            out.push_str("\n[users.symmetric]\n");
            let _ = writeln!(out, "magnitudes = {}", list(p.magnitudes(), |&v| float(v)));
            let _ = writeln!(out, "column_order = {}", list(order, |c| (c + 1).to_string()));
        }
    }
    Ok(out)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

fn positive(value: i64, name: &str) -> Result<usize> {
    usize::try_from(value)
        .ok()
        .filter(|&v| v > 0)
        .ok_or_else(|| SimError::format(name, format!("{value} is not a positive integer")))
}

/// Parses and validates a document.
pub fn from_str(text: &str) -> Result<CodebookDocument> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| {
        let at = e.span().map_or_else(|| "document".to_string(), |s| format!("line {}", line_of(text, s.start)));
        SimError::format(at, e.message().to_string())
    })?;
    if raw.format_version != i64::from(FORMAT_VERSION) {
        return Err(SimError::format(
            "format_version",
            format!("unsupported version {}, expected {FORMAT_VERSION}", raw.format_version),
        ));
    }
    let k = positive(raw.k, "K")?;
    let j = positive(raw.j, "J")?;
    let m = positive(raw.m, "M")?;
    if m < 2 {
        return Err(SimError::format("M", "codebooks need at least two codewords"));
    }
    if raw.graph.len() != k {
        return Err(SimError::format("graph", format!("{} rows, expected K = {k}", raw.graph.len())));
    }
    let mut rows = Vec::with_capacity(k);
    for (r, row) in raw.graph.iter().enumerate() {
        if row.len() != j {
            return Err(SimError::format(format!("graph[{r}]"), format!("{} entries, expected J = {j}", row.len())));
        }
        let bits = row
            .iter()
            .enumerate()
            .map(|(c, &v)| match v {
                0 | 1 => Ok(v as u8),
                _ => Err(SimError::format(format!("graph[{r}][{c}]"), format!("{v} is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(bits);
    }
    let graph = FactorGraph::new(&rows).map_err(|e| SimError::format("graph", e.to_string()))?;
    if raw.users.len() != j {
        return Err(SimError::format("users", format!("{} entries, expected J = {j}", raw.users.len())));
    }
    if let Some(med) = raw.design_med {
        if !med.is_finite() || med < 0.0 {
            return Err(SimError::format("design_med", format!("{med} is not a nonnegative number")));
        }
    }

    let with_profile = raw.users.iter().filter(|u| u.symmetric.is_some()).count();
    if with_profile != 0 && with_profile != j {
        return Err(SimError::format("users", "symmetric profiles must be given for all users or none"));
    }

    let mut codebooks = Vec::with_capacity(j);
    let mut profiles = Vec::with_capacity(with_profile);
    for (u, ru) in raw.users.iter().enumerate() {
        let at = format!("users[{u}]");
        if ru.user != u as i64 + 1 {
            return Err(SimError::format(format!("{at}.user"), format!("{} out of order, expected {}", ru.user, u + 1)));
        }
        let expected: Vec<i64> = graph.resources_of(u).iter().map(|&r| r as i64 + 1).collect();
        if ru.support != expected {
            return Err(SimError::format(
                format!("{at}.support"),
                format!("{:?} disagrees with the graph column {:?}", ru.support, expected),
            ));
        }
        if ru.codewords.len() != k {
            return Err(SimError::format(
                format!("{at}.codewords"),
                format!("{} rows, expected K = {k}", ru.codewords.len()),
            ));
        }
        for (r, row) in ru.codewords.iter().enumerate() {
            if row.len() != m {
                return Err(SimError::format(
                    format!("{at}.codewords[{r}]"),
                    format!("{} values, expected M = {m}", row.len()),
                ));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SimError::format(format!("{at}.codewords[{r}][{c}]"), "not finite"));
                }
                if v != 0.0 && !graph.is_connected(r, u) {
                    return Err(SimError::format(
                        format!("{at}.codewords[{r}][{c}]"),
                        format!("{v} on resource {} outside the support", r + 1),
                    ));
                }
            }
        }
        let matrix = Matrix::from_rows(&ru.codewords).map_err(|e| SimError::format(format!("{at}.codewords"), e.to_string()))?;
        let cb = Codebook::new(u, matrix, graph.resources_of(u).to_vec())
            .map_err(|e| SimError::format(format!("{at}.codewords"), e.to_string()))?;

        if let Some(sym) = &ru.symmetric {
            let sat = format!("{at}.symmetric");
            let level = hadamard_level(m).map_err(|e| SimError::format(&sat, e.to_string()))?;
            let order = sym
                .column_order
                .iter()
                .map(|&c| {
                    usize::try_from(c - 1)
                        .ok()
                        .filter(|&c| c < m)
                        .ok_or_else(|| SimError::format(format!("{sat}.column_order"), format!("{c} is not in 1..={m}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let sign = hadamard_sign(level)
                .with_column_order(&order)
                .map_err(|e| SimError::format(format!("{sat}.column_order"), e.to_string()))?;
            let mapping = graph.mapping_matrix(u)?;
            let profile = SymmetricProfile::new(sym.magnitudes.clone(), sign, mapping)
                .map_err(|e| SimError::format(&sat, e.to_string()))?;
            let rebuilt = symmetric_codebook(&profile).map_err(|e| SimError::format(&sat, e.to_string()))?;
            let gap = rebuilt.matrix().max_abs_diff(cb.matrix());
            if !(gap <= PROFILE_TOLERANCE) {
                return Err(SimError::format(&sat, format!("profile differs from codewords by {gap:e}")));
            }
            profiles.push(profile);
        }
        codebooks.push(cb);
    }

    Ok(CodebookDocument {
        graph,
        codebooks,
        profiles: (with_profile != 0).then_some(profiles),
        design_med: raw.design_med,
    })
}

pub fn save_codebook(doc: &CodebookDocument, path: &Path) -> Result<()> {
    let text = to_string(doc)?;
    std::fs::write(path, text).map_err(|e| SimError::io(path, e))
}

pub fn load_codebook(path: &Path) -> Result<CodebookDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    from_str(&text)
}
