//! Factor-graph text files: one row per resource, 0/1 entries separated by spaces or
//! commas, `#` starts a comment. `builtin:canonical` names the canonical 4x6 graph.

use std::path::Path;

use scma_core::FactorGraph;

use crate::{Result, SimError};

pub const BUILTIN_CANONICAL: &str = "builtin:canonical";
/// Older name accepted for the same graph.
pub const BUILTIN_CANONICAL_ALIAS: &str = "builtin:eq1";

pub fn parse_graph(text: &str) -> Result<FactorGraph> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let row = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(SimError::format(format!("line {}", n + 1), format!("'{other}' is not 0 or 1"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(SimError::format("graph", "no rows"));
    }
    FactorGraph::new(&rows).map_err(|e| SimError::format("graph", e.to_string()))
}

/// Loads a graph file, or the built-in graph when given [`BUILTIN_CANONICAL`].
pub fn load_graph(source: &str) -> Result<FactorGraph> {
    if source == BUILTIN_CANONICAL || source == BUILTIN_CANONICAL_ALIAS {
        return Ok(FactorGraph::canonical());
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_graph(&text)
}

pub fn graph_to_string(graph: &FactorGraph) -> String {
    graph
        .incidence_rows()
        .iter()
        .map(|r| r.iter().map(u8::to_string).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}
