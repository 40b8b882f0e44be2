//! Multiuser detection: message passing on the factor graph and an exhaustive MAP oracle.
//!
//! Messages live in the probability domain and are renormalized after every update.
//! The Gaussian kernel is `exp(-(y_k - Σ h x)² / (2σ²))`; any constant prefactor
//! cancels under normalization. Each resource shifts its exponents by the smallest
//! squared residual so at least one kernel value is exactly 1.

mod map;
mod tables;

pub use map::{map_detect, MapDecision, MapDetector};
pub use tables::{build_value_tables, ResourceCost, ValueTable, ValueTables, VALUE_TOLERANCE};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::codebook::check_set;
use crate::math::exp;
use crate::{Codebook, Error, FactorGraph, Gains, Result};

/// Messages summing below this are replaced by the uniform distribution.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FastPath {
    /// Distinct-value enumeration whenever it is cheaper than the generic one.
    #[default]
    Auto,
    Generic,
    /// Distinct-value enumeration; every table must hold at most two values.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub t_max: usize,
    /// Noise variance per real resource dimension.
    pub sigma2: f64,
    pub fast_path: FastPath,
}

impl DetectorConfig {
    pub fn new(sigma2: f64) -> Self {
        DetectorConfig { t_max: 5, sigma2, fast_path: FastPath::Auto }
    }

    fn check(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidNoiseVariance(self.sigma2));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidOption("t_max must be at least 1"));
        }
        Ok(())
    }
}

/// Messages on every edge of the factor graph. Edges are numbered resource-major:
/// all neighbors of resource 0 in increasing user order, then resource 1, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    m: usize,
    rn: Vec<f64>,
    vn: Vec<f64>,
    pub iteration: usize,
    /// Set when any update fell back to uniform because of underflow.
    pub underflow: bool,
}

impl MessageState {
    pub fn rn_to_vn(&self, edge: usize) -> &[f64] {
        &self.rn[edge * self.m..(edge + 1) * self.m]
    }

    pub fn vn_to_rn(&self, edge: usize) -> &[f64] {
        &self.vn[edge * self.m..(edge + 1) * self.m]
    }

    pub fn rn_to_vn_mut(&mut self, edge: usize) -> &mut [f64] {
        &mut self.rn[edge * self.m..(edge + 1) * self.m]
    }

    pub fn vn_to_rn_mut(&mut self, edge: usize) -> &mut [f64] {
        &mut self.vn[edge * self.m..(edge + 1) * self.m]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub hard: Vec<usize>,
    pub marginals: Vec<Vec<f64>>,
    /// Per user: the argmax was not unique and the lowest index was taken.
    pub tie_broken: Vec<bool>,
    pub underflow: bool,
}

/// Normalizes in place; falls back to uniform and returns `true` on underflow.
fn normalize(v: &mut [f64]) -> bool {
    let s: f64 = v.iter().sum();
    if !(s >= UNDERFLOW_FLOOR) || !s.is_finite() {
        let u = 1.0 / v.len() as f64;
        v.fill(u);
        return true;
    }
    let inv = 1.0 / s;
    for x in v {
        *x *= inv;
    }
    false
}

/// First index of the maximum and whether it was tied.
fn argmax(v: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    let tied = v.iter().enumerate().any(|(i, &x)| i != best && x == v[best]);
    (best, tied)
}

/// Advances a mixed-radix counter; returns `false` after the last state.
#[inline]
fn advance(counter: &mut [usize], radix: &[usize]) -> bool {
    for i in (0..counter.len()).rev() {
        counter[i] += 1;
        if counter[i] < radix[i] {
            return true;
        }
        counter[i] = 0;
    }
    false
}

/// Message-passing detector bound to one graph, codebook set and gain set.
#[derive(Debug, Clone)]
pub struct MpaDetector {
    m: usize,
    users: usize,
    config: DetectorConfig,
    /// Per resource, the range of its edges.
    resource_edges: Vec<(usize, usize)>,
    edge_resource: Vec<usize>,
    edge_user: Vec<usize>,
    user_edges: Vec<Vec<usize>>,
    /// `h_{k,j} C_j[k, m]` per edge, `M` values each.
    values: Vec<f64>,
    tables: Option<ValueTables>,
}

impl MpaDetector {
    pub fn new(graph: &FactorGraph, codebooks: &[Codebook], gains: &Gains, config: DetectorConfig) -> Result<Self> {
        config.check()?;
        let (k, m) = check_set(codebooks)?;
        if k != graph.resources() || codebooks.len() != graph.users() {
            return Err(Error::DimensionMismatch(format!(
                "{} codebooks on {k} resources for a {}x{} graph",
                codebooks.len(),
                graph.resources(),
                graph.users()
            )));
        }
        if let Some(cb) = codebooks.iter().find(|cb| !cb.matches_graph(graph)) {
            return Err(Error::DimensionMismatch(format!("codebook of user {} does not fit the graph", cb.user())));
        }
        gains.check(graph.users(), k)?;

        let mut resource_edges = Vec::with_capacity(k);
        let mut edge_resource = Vec::new();
        let mut edge_user = Vec::new();
        let mut user_edges = vec![Vec::new(); graph.users()];
        let mut values = Vec::new();
        for r in 0..k {
            let start = edge_user.len();
            for &j in graph.users_on(r) {
                user_edges[j].push(edge_user.len());
                edge_resource.push(r);
                edge_user.push(j);
                let h = gains.get(r, j);
                values.extend((0..m).map(|c| h * codebooks[j].value(r, c)));
            }
            resource_edges.push((start, edge_user.len()));
        }

        let tables = build_value_tables(codebooks, graph)?.with_gains(gains);
        let tables = match config.fast_path {
            FastPath::Generic => None,
            FastPath::Symmetric => {
                if tables.tables().iter().any(|t| t.len() > 2) {
                    return Err(Error::InvalidOption("symmetric fast path needs at most two values per edge"));
                }
                Some(tables)
            }
            FastPath::Auto => {
                let cheaper = tables.costs().iter().any(|c| c.reduced < c.generic);
                cheaper.then_some(tables)
            }
        };

        Ok(MpaDetector {
            m,
            users: graph.users(),
            config,
            resource_edges,
            edge_resource,
            edge_user,
            user_edges,
            values,
            tables,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    /// True when resource updates enumerate distinct values instead of codewords.
    pub fn uses_value_tables(&self) -> bool {
        self.tables.is_some()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_user.len()
    }

    /// Edge connecting `resource` and `user`, if any.
    pub fn edge(&self, resource: usize, user: usize) -> Option<usize> {
        let (a, b) = *self.resource_edges.get(resource)?;
        (a..b).find(|&e| self.edge_user[e] == user)
    }

    pub fn edge_endpoints(&self, edge: usize) -> (usize, usize) {
        (self.edge_resource[edge], self.edge_user[edge])
    }

    /// Uniform messages in both directions.
    pub fn init_state(&self) -> MessageState {
        let n = self.edge_count() * self.m;
        let u = 1.0 / self.m as f64;
        MessageState { m: self.m, rn: vec![u; n], vn: vec![u; n], iteration: 0, underflow: false }
    }

    fn check_y(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.resource_edges.len() {
            return Err(Error::DimensionMismatch(format!(
                "received vector has {} entries, expected {}",
                y.len(),
                self.resource_edges.len()
            )));
        }
        Ok(())
    }

    /// Resource-node half-iteration.
    pub fn rn_update(&self, state: &mut MessageState, y: &[f64]) -> Result<()> {
        self.check_y(y)?;
        let inv = 1.0 / (2.0 * self.config.sigma2);
        for (k, &(a, b)) in self.resource_edges.iter().enumerate() {
            let underflow = match &self.tables {
                Some(t) => self.rn_resource_tables(state, t, y[k], a, b, inv),
                None => self.rn_resource_generic(state, y[k], a, b, inv),
            };
            state.underflow |= underflow;
        }
        state.iteration += 1;
        Ok(())
    }

    fn rn_resource_generic(&self, state: &mut MessageState, y: f64, a: usize, b: usize, inv: f64) -> bool {
        let m = self.m;
        let d = b - a;
        let vals = |e: usize, c: usize| self.values[e * m + c];
        let radix = vec![m; d];

        let mut shift = f64::INFINITY;
        let mut counter = vec![0; d];
        loop {
            let s: f64 = (0..d).map(|l| vals(a + l, counter[l])).sum();
            shift = shift.min((y - s) * (y - s));
            if !advance(&mut counter, &radix) {
                break;
            }
        }

        let mut underflow = false;
        let mut out = vec![0.0; m];
        let others = vec![m; d - 1];
        let mut combo = vec![0; d - 1];
        for i in 0..d {
            for (ci, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                combo.fill(0);
                loop {
                    let mut s = vals(a + i, ci);
                    let mut w = 1.0;
                    for (slot, l) in (0..d).filter(|&l| l != i).enumerate() {
                        s += vals(a + l, combo[slot]);
                        w *= state.vn[(a + l) * m + combo[slot]];
                    }
                    acc += w * exp(-((y - s) * (y - s) - shift) * inv);
                    if !advance(&mut combo, &others) {
                        break;
                    }
                }
                *o = acc;
            }
            underflow |= normalize(&mut out);
            state.rn[(a + i) * m..(a + i + 1) * m].copy_from_slice(&out);
        }
        underflow
    }

    fn rn_resource_tables(
        &self,
        state: &mut MessageState,
        tables: &ValueTables,
        y: f64,
        a: usize,
        b: usize,
        inv: f64,
    ) -> bool {
        let m = self.m;
        let d = b - a;
        let edge_tables: Vec<&ValueTable> = (a..b).map(|e| &tables.tables()[e]).collect();
        let radix: Vec<usize> = edge_tables.iter().map(|t| t.len()).collect();

        // Incoming weight of each distinct value.
        let agg: Vec<Vec<f64>> = edge_tables
            .iter()
            .enumerate()
            .map(|(l, t)| {
                let mut w = vec![0.0; t.len()];
                for c in 0..m {
                    w[t.index()[c]] += state.vn[(a + l) * m + c];
                }
                w
            })
            .collect();

        let mut counter = vec![0; d];
        let mut shift = f64::INFINITY;
        loop {
            let s: f64 = (0..d).map(|l| edge_tables[l].values()[counter[l]]).sum();
            shift = shift.min((y - s) * (y - s));
            if !advance(&mut counter, &radix) {
                break;
            }
        }

        let mut outv: Vec<Vec<f64>> = radix.iter().map(|&n| vec![0.0; n]).collect();
        counter.fill(0);
        loop {
            let s: f64 = (0..d).map(|l| edge_tables[l].values()[counter[l]]).sum();
            let g = exp(-((y - s) * (y - s) - shift) * inv);
            for i in 0..d {
                let mut w = g;
                for l in (0..d).filter(|&l| l != i) {
                    w *= agg[l][counter[l]];
                }
                outv[i][counter[i]] += w;
            }
            if !advance(&mut counter, &radix) {
                break;
            }
        }

        let mut underflow = false;
        let mut out = vec![0.0; m];
        for i in 0..d {
            for (c, o) in out.iter_mut().enumerate() {
                *o = outv[i][edge_tables[i].index()[c]];
            }
            underflow |= normalize(&mut out);
            state.rn[(a + i) * m..(a + i + 1) * m].copy_from_slice(&out);
        }
        underflow
    }

    /// Variable-node half-iteration.
    pub fn vn_update(&self, state: &mut MessageState) {
        let m = self.m;
        let mut out = vec![0.0; m];
        for edges in &self.user_edges {
            for &e in edges {
                out.fill(1.0);
                for &f in edges.iter().filter(|&&f| f != e) {
                    for (c, o) in out.iter_mut().enumerate() {
                        *o *= state.rn[f * m + c];
                    }
                }
                state.underflow |= normalize(&mut out);
                state.vn[e * m..(e + 1) * m].copy_from_slice(&out);
            }
        }
    }

    /// Per-user product of all incoming resource messages, with hard decisions.
    pub fn marginals(&self, state: &MessageState) -> Decision {
        let m = self.m;
        let mut underflow = state.underflow;
        let mut hard = Vec::with_capacity(self.users);
        let mut tie_broken = Vec::with_capacity(self.users);
        let marginals: Vec<Vec<f64>> = self
            .user_edges
            .iter()
            .map(|edges| {
                let mut p = vec![1.0; m];
                for &e in edges {
                    for (c, v) in p.iter_mut().enumerate() {
                        *v *= state.rn[e * m + c];
                    }
                }
                underflow |= normalize(&mut p);
                let (h, t) = argmax(&p);
                hard.push(h);
                tie_broken.push(t);
                p
            })
            .collect();
        Decision { hard, marginals, tie_broken, underflow }
    }

    /// `t_max` flooding iterations from uniform messages.
    pub fn detect(&self, y: &[f64]) -> Result<Decision> {
        let mut state = self.init_state();
        for t in 0..self.config.t_max {
            self.rn_update(&mut state, y)?;
            if t + 1 < self.config.t_max {
                self.vn_update(&mut state);
            }
        }
        Ok(self.marginals(&state))
    }
}

/// One-shot message-passing detection.
pub fn mpa_detect(
    y: &[f64],
    codebooks: &[Codebook],
    gains: &Gains,
    config: DetectorConfig,
    graph: &FactorGraph,
) -> Result<Decision> {
    MpaDetector::new(graph, codebooks, gains, config)?.detect(y)
}
