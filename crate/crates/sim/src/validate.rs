//! Structural and distance checks on a loaded codebook document.

use scma_core::complexity::symmetric_difference_count;
use scma_core::designer::med;
use scma_core::symmetric::{difference_set, validate_symmetric};

use crate::codebook_file::CodebookDocument;
use crate::Result;

/// Tolerance for the two-value check and difference-set merging.
pub const STRUCTURE_TOLERANCE: f64 = 1e-6;

/// Allowed relative gap between a recorded and a recomputed MED.
pub const MED_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub med: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every check. Symmetric checks apply when the document carries profiles.
pub fn validate_document(doc: &CodebookDocument) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| checks.push(Check { name, passed, detail });

    for (u, cb) in doc.codebooks.iter().enumerate() {
        let n = u + 1;
        push(
            format!("user {n} support"),
            cb.matches_graph(&doc.graph),
            format!("resources {:?}", cb.support().iter().map(|r| r + 1).collect::<Vec<_>>()),
        );
        push(format!("user {n} distinct codewords"), cb.has_distinct_codewords(0.0), String::new());
    }

    if doc.profiles.is_some() {
        let m = doc.codebooks[0].size();
        let expected = symmetric_difference_count(m)? as usize;
        for (u, cb) in doc.codebooks.iter().enumerate() {
            let n = u + 1;
            let sym = validate_symmetric(cb, STRUCTURE_TOLERANCE);
            push(format!("user {n} two-value"), sym.two_value, sym.failures.join("; "));
            let order = sym.column_order.as_ref().map(|o| o.iter().map(|c| c + 1).collect::<Vec<_>>());
            push(format!("user {n} Hadamard signs"), sym.sign_pattern, format!("column order {order:?}"));
            let p = difference_set(cb, STRUCTURE_TOLERANCE).len();
            push(format!("user {n} difference set"), p == expected, format!("{p} distinct columns, expected {expected}"));
        }
    }

    let d = med(&doc.codebooks)?;
    push("superimposed points distinct".into(), d > 0.0, format!("MED {d:.10e}"));
    if let Some(recorded) = doc.design_med {
        let gap = (d - recorded).abs() / recorded.abs().max(1.0);
        push("recorded MED".into(), gap <= MED_TOLERANCE, format!("recorded {recorded:.10e}, computed {d:.10e}"));
    }
    Ok(ValidationReport { checks, med: d })
}
