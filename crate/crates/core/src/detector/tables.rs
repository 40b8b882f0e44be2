use alloc::format;
use alloc::vec::Vec;

use crate::codebook::check_set;
use crate::{Codebook, Error, FactorGraph, Gains, Result};

/// Values closer than this are merged into one table entry.
pub const VALUE_TOLERANCE: f64 = 1e-12;

/// Distinct values one user places on one resource, with the codeword-to-value map.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    resource: usize,
    user: usize,
    values: Vec<f64>,
    index: Vec<usize>,
}

impl ValueTable {
    pub fn resource(&self) -> usize {
        self.resource
    }

    pub fn user(&self) -> usize {
        self.user
    }

    /// Distinct values in order of first appearance.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value index of each codeword.
    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Enumeration cost of one resource node: codeword tuples versus distinct-value tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceCost {
    pub resource: usize,
    pub generic: u64,
    pub reduced: u64,
}

/// Value tables for every edge, resource-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables {
    tables: Vec<ValueTable>,
    costs: Vec<ResourceCost>,
}

impl ValueTables {
    pub fn tables(&self) -> &[ValueTable] {
        &self.tables
    }

    pub fn get(&self, resource: usize, user: usize) -> Option<&ValueTable> {
        self.tables.iter().find(|t| t.resource == resource && t.user == user)
    }

    pub fn costs(&self) -> &[ResourceCost] {
        &self.costs
    }

    /// Scales each table's values by the edge gain; grouping is unchanged.
    pub fn with_gains(mut self, gains: &Gains) -> Self {
        for t in &mut self.tables {
            let h = gains.get(t.resource, t.user);
            for v in &mut t.values {
                *v *= h;
            }
        }
        self
    }
}

pub fn build_value_tables(codebooks: &[Codebook], graph: &FactorGraph) -> Result<ValueTables> {
    let (_, m) = check_set(codebooks)?;
    if codebooks.len() != graph.users() {
        return Err(Error::DimensionMismatch(format!(
            "{} codebooks for {} users",
            codebooks.len(),
            graph.users()
        )));
    }
    let mut tables = Vec::new();
    let mut costs = Vec::with_capacity(graph.resources());
    for k in 0..graph.resources() {
        let mut reduced = 1u64;
        for &j in graph.users_on(k) {
            let mut values: Vec<f64> = Vec::new();
            let mut index = Vec::with_capacity(m);
            for c in 0..m {
                let v = codebooks[j].value(k, c);
                let slot = match values.iter().position(|&u| (u - v).abs() <= VALUE_TOLERANCE) {
                    Some(p) => p,
                    None => {
                        values.push(v);
                        values.len() - 1
                    }
                };
                index.push(slot);
            }
            reduced = reduced.saturating_mul(values.len() as u64);
            tables.push(ValueTable { resource: k, user: j, values, index });
        }
        let generic = (m as u64).saturating_pow(graph.resource_degree(k) as u32);
        costs.push(ResourceCost { resource: k, generic, reduced });
    }
    Ok(ValueTables { tables, costs })
}
