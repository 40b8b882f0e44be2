use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::symmetric::{hadamard_level, hadamard_sign, symmetric_codebook, SignMatrix, SymmetricProfile};
use crate::{Codebook, Error, FactorGraph, Matrix, Result, Scheme};

/// Options that shape the constraint set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Merge constraints whose difference maps are negatives of each other.
    pub antipodal_dedup: bool,
    /// Refuse instances with more constraints than this.
    pub constraint_cap: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { antipodal_dedup: true, constraint_cap: 10_000_000 }
    }
}

/// Column order of the default Hadamard pattern for `M = 4`; matches the reference
/// codebooks, where codeword bits split across the two real copies of a resource.
pub const DEFAULT_COLUMN_ORDER_M4: [usize; 4] = [0, 2, 3, 1];

/// Default sign structure for codebook size `m`.
pub fn default_sign_structure(m: usize) -> Result<SignMatrix> {
    let h = hadamard_sign(hadamard_level(m)?);
    if m == 4 {
        h.with_column_order(&DEFAULT_COLUMN_ORDER_M4)
    } else {
        Ok(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Term {
    pub resource: usize,
    pub var: usize,
    pub coef: f64,
}

/// A linear map from the design vector to one user's contribution to a
/// superimposed codeword difference.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffMap {
    pub(crate) terms: Vec<Term>,
}

impl DiffMap {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds the image of `r` into `out` (length `K`).
    #[inline]
    pub fn apply_add(&self, r: &[f64], out: &mut [f64]) {
        for t in &self.terms {
            out[t.resource] += t.coef * r[t.var];
        }
    }

    fn is_negation_of(&self, other: &DiffMap) -> bool {
        self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|(a, b)| {
                a.resource == b.resource && a.var == b.var && a.coef == -b.coef
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Orientation {
    Zero,
    Positive,
    Negative,
}

#[derive(Debug, Clone)]
pub(crate) struct UserLabels {
    pub maps: Vec<DiffMap>,
    pub orientation: Vec<Orientation>,
}

impl UserLabels {
    fn zero_count(&self) -> u128 {
        self.orientation.iter().filter(|o| **o == Orientation::Zero).count() as u128
    }
}

/// The slice of the design vector that belongs to one user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableBlock {
    pub user: usize,
    pub offset: usize,
    pub len: usize,
    pub support: Vec<usize>,
}

/// Per-user, per-label images of a design vector, each of length `K`.
pub type LabelTable = Vec<Vec<f64>>;

/// The minimum-distance constrained power minimization over one factor graph.
///
/// The design vector `r` stacks per-user blocks: all `M·N_j` active codebook entries
/// (codeword-major) for the full and conventional schemes, or the `N_j` magnitudes
/// for the symmetric scheme. Each constraint is a linear map `A_c` from `r` to a
/// superimposed codeword difference and reads `‖A_c r‖² ≥ 1`. A constraint is a tuple
/// of per-user labels, each label one user's difference map.
#[derive(Debug, Clone)]
pub struct DesignInstance {
    graph: FactorGraph,
    scheme: Scheme,
    m: usize,
    blocks: Vec<VariableBlock>,
    num_variables: usize,
    labels: Vec<UserLabels>,
    oriented: bool,
    count: u64,
    sign_structures: Option<Vec<SignMatrix>>,
}

impl DesignInstance {
    pub fn build(
        graph: FactorGraph,
        scheme: Scheme,
        m: usize,
        sign_structures: Option<Vec<SignMatrix>>,
        options: &BuildOptions,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidOption("codebook size must be at least 2"));
        }
        let users = graph.users();
        let signs = match scheme {
            Scheme::Symmetric => {
                let signs = match sign_structures {
                    Some(s) => s,
                    None => vec![default_sign_structure(m)?; users],
                };
                if signs.len() != users {
                    return Err(Error::DimensionMismatch(format!(
                        "{} sign structures for {users} users",
                        signs.len()
                    )));
                }
                for (j, s) in signs.iter().enumerate() {
                    hadamard_level(s.cols())?;
                    if s.rows() != graph.user_degree(j) || s.cols() != m {
                        return Err(Error::DimensionMismatch(format!(
                            "user {j}: sign structure is {}x{}, expected {}x{m}",
                            s.rows(),
                            s.cols(),
                            graph.user_degree(j)
                        )));
                    }
                }
                Some(signs)
            }
            _ => None,
        };

        let mut blocks = Vec::with_capacity(users);
        let mut offset = 0;
        for j in 0..users {
            let support = graph.resources_of(j).to_vec();
            let len = match scheme {
                Scheme::Symmetric => support.len(),
                _ => m * support.len(),
            };
            blocks.push(VariableBlock { user: j, offset, len, support });
            offset += len;
        }

        let dedup = options.antipodal_dedup;
        let labels: Vec<UserLabels> = blocks
            .iter()
            .map(|b| user_labels(b, scheme, m, signs.as_ref().map(|s| &s[b.user]), dedup))
            .collect();
        let oriented = dedup || scheme == Scheme::Full;
        let all: u128 = labels.iter().map(|l| l.maps.len() as u128).product();
        let zeros: u128 = labels.iter().map(UserLabels::zero_count).product();
        let count = if oriented { (all - zeros) / 2 } else { all - zeros };
        if count > u128::from(options.constraint_cap) {
            return Err(Error::TooManyConstraints { count, cap: options.constraint_cap });
        }
        if all > u128::from(u64::MAX / 2) {
            return Err(Error::TooManyConstraints { count, cap: options.constraint_cap });
        }

        Ok(DesignInstance {
            graph,
            scheme,
            m,
            blocks,
            num_variables: offset,
            labels,
            oriented,
            count: count as u64,
            sign_structures: signs,
        })
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn codebook_size(&self) -> usize {
        self.m
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn num_constraints(&self) -> u64 {
        self.count
    }

    pub fn blocks(&self) -> &[VariableBlock] {
        &self.blocks
    }

    pub fn sign_structures(&self) -> Option<&[SignMatrix]> {
        self.sign_structures.as_deref()
    }

    /// Number of difference labels per user.
    pub fn label_counts(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.maps.len()).collect()
    }

    /// Size of the label-tuple identifier space.
    pub(crate) fn id_space(&self) -> u64 {
        self.labels.iter().map(|l| l.maps.len() as u64).product()
    }

    pub(crate) fn map(&self, user: usize, label: usize) -> &DiffMap {
        &self.labels[user].maps[label]
    }

    /// Symmetric designs keep magnitudes nonnegative.
    pub fn nonnegative(&self) -> bool {
        self.scheme == Scheme::Symmetric
    }

    pub fn constraint_id(&self, labels: &[u16]) -> u64 {
        labels
            .iter()
            .zip(&self.labels)
            .fold(0u64, |acc, (&p, l)| acc * l.maps.len() as u64 + u64::from(p))
    }

    pub fn constraint_labels(&self, mut id: u64) -> Vec<u16> {
        let mut out = vec![0u16; self.labels.len()];
        for (slot, l) in out.iter_mut().zip(&self.labels).rev() {
            *slot = (id % l.maps.len() as u64) as u16;
            id /= l.maps.len() as u64;
        }
        out
    }

    /// Images of `r` under every label of every user.
    pub fn label_table(&self, r: &[f64]) -> LabelTable {
        let k = self.graph.resources();
        self.labels
            .iter()
            .map(|l| {
                let mut flat = vec![0.0; l.maps.len() * k];
                for (p, map) in l.maps.iter().enumerate() {
                    map.apply_add(r, &mut flat[p * k..(p + 1) * k]);
                }
                flat
            })
            .collect()
    }

    /// The superimposed difference `A_c r` of one constraint.
    pub fn constraint_image(&self, labels: &[u16], r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.graph.resources()];
        for (j, &p) in labels.iter().enumerate() {
            self.map(j, usize::from(p)).apply_add(r, &mut out);
        }
        out
    }

    /// Dense `K x n` matrix `A_c` of one constraint.
    pub fn constraint_matrix(&self, labels: &[u16]) -> Matrix {
        let mut a = Matrix::zeros(self.graph.resources(), self.num_variables);
        for (j, &p) in labels.iter().enumerate() {
            for t in &self.map(j, usize::from(p)).terms {
                a[(t.resource, t.var)] += t.coef;
            }
        }
        a
    }

    /// Visits every constraint's label tuple.
    pub fn for_each_constraint(&self, mut visit: impl FnMut(&[u16])) {
        self.scan(&[], |labels, _| visit(labels));
    }

    /// Depth-first walk over all constraints, accumulating per-user rows of `tables`.
    /// `visit` receives the label tuple and the concatenated `K`-vector sums, one per table.
    pub(crate) fn scan<F: FnMut(&[u16], &[f64])>(&self, tables: &[&LabelTable], mut visit: F) {
        let k = self.graph.resources();
        let width = tables.len() * k;
        let depth = self.labels.len();
        let mut labels = vec![0u16; depth];
        let mut sums = vec![0.0; (depth + 1) * width];
        self.descend(0, false, tables, k, &mut labels, &mut sums, &mut visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn descend<F: FnMut(&[u16], &[f64])>(
        &self,
        depth: usize,
        decided: bool,
        tables: &[&LabelTable],
        k: usize,
        labels: &mut [u16],
        sums: &mut [f64],
        visit: &mut F,
    ) {
        let width = tables.len() * k;
        if depth == self.labels.len() {
            if decided {
                visit(labels, &sums[depth * width..(depth + 1) * width]);
            }
            return;
        }
        let user = &self.labels[depth];
        for (p, orientation) in user.orientation.iter().enumerate() {
            let next = match (decided, orientation) {
                (true, _) => true,
                (false, Orientation::Zero) => false,
                (false, Orientation::Negative) if self.oriented => continue,
                (false, _) => true,
            };
            labels[depth] = p as u16;
            let (head, tail) = sums.split_at_mut((depth + 1) * width);
            let parent = &head[depth * width..];
            let child = &mut tail[..width];
            for (t, table) in tables.iter().enumerate() {
                let row = &table[depth][p * k..(p + 1) * k];
                for i in 0..k {
                    child[t * k + i] = parent[t * k + i] + row[i];
                }
            }
            self.descend(depth + 1, next, tables, k, labels, sums, visit);
        }
    }

    /// Smallest squared superimposed distance `min_c ‖A_c r‖²`.
    pub fn min_quadratic(&self, r: &[f64]) -> f64 {
        let table = self.label_table(r);
        let mut min = f64::INFINITY;
        self.scan(&[&table], |_, v| {
            let q: f64 = v.iter().map(|x| x * x).sum();
            if q < min {
                min = q;
            }
        });
        min
    }

    /// Per-user codebooks encoded by a design vector.
    pub fn codebooks(&self, r: &[f64]) -> Result<Vec<Codebook>> {
        self.check_len(r)?;
        match self.scheme {
            Scheme::Symmetric => self
                .profiles(r)?
                .iter()
                .map(symmetric_codebook)
                .collect(),
            _ => self
                .blocks
                .iter()
                .map(|b| {
                    let n = b.support.len();
                    let active = Matrix::from_fn(n, self.m, |row, m| r[b.offset + m * n + row]);
                    Codebook::from_active(&self.graph.mapping_matrix(b.user)?, &active)
                })
                .collect(),
        }
    }

    /// Symmetric profiles encoded by a design vector (symmetric scheme only).
    pub fn profiles(&self, r: &[f64]) -> Result<Vec<SymmetricProfile>> {
        self.check_len(r)?;
        let signs = self
            .sign_structures
            .as_ref()
            .ok_or(Error::InvalidOption("profiles exist only for the symmetric scheme"))?;
        self.blocks
            .iter()
            .map(|b| {
                SymmetricProfile::new(
                    r[b.offset..b.offset + b.len].to_vec(),
                    signs[b.user].clone(),
                    self.graph.mapping_matrix(b.user)?,
                )
            })
            .collect()
    }

    /// Inverse of [`DesignInstance::codebooks`] for codebooks on this graph.
    pub fn variables_from_codebooks(&self, codebooks: &[Codebook]) -> Result<Vec<f64>> {
        if codebooks.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} codebooks for {} users",
                codebooks.len(),
                self.blocks.len()
            )));
        }
        let mut r = vec![0.0; self.num_variables];
        for (b, cb) in self.blocks.iter().zip(codebooks) {
            if cb.support() != b.support.as_slice() || cb.size() != self.m {
                return Err(Error::DimensionMismatch(format!("codebook of user {} does not fit", b.user)));
            }
            let n = b.support.len();
            for (row, &k) in b.support.iter().enumerate() {
                match self.scheme {
                    Scheme::Symmetric => {
                        r[b.offset + row] =
                            (0..self.m).map(|m| cb.value(k, m).abs()).sum::<f64>() / self.m as f64
                    }
                    _ => {
                        for m in 0..self.m {
                            r[b.offset + m * n + row] = cb.value(k, m);
                        }
                    }
                }
            }
        }
        Ok(r)
    }

    fn check_len(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.num_variables {
            return Err(Error::DimensionMismatch(format!(
                "design vector has {} entries, expected {}",
                r.len(),
                self.num_variables
            )));
        }
        Ok(())
    }
}

fn pair_map(block: &VariableBlock, scheme: Scheme, sign: Option<&SignMatrix>, a: usize, b: usize) -> DiffMap {
    let n = block.support.len();
    let mut terms = Vec::new();
    for (row, &resource) in block.support.iter().enumerate() {
        match (scheme, sign) {
            (Scheme::Symmetric, Some(s)) => {
                let coef = f64::from(s.get(row, a) - s.get(row, b));
                if coef != 0.0 {
                    terms.push(Term { resource, var: block.offset + row, coef });
                }
            }
            _ if a != b => {
                terms.push(Term { resource, var: block.offset + a * n + row, coef: 1.0 });
                terms.push(Term { resource, var: block.offset + b * n + row, coef: -1.0 });
            }
            _ => {}
        }
    }
    DiffMap { terms }
}

fn user_labels(
    block: &VariableBlock,
    scheme: Scheme,
    m: usize,
    sign: Option<&SignMatrix>,
    dedup: bool,
) -> UserLabels {
    if scheme == Scheme::Full && !dedup {
        // Every ordered codeword pair, index a·M + b; pairs with a == b are zero maps.
        let mut maps = Vec::with_capacity(m * m);
        let mut orientation = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                maps.push(pair_map(block, scheme, sign, a, b));
                orientation.push(match a.cmp(&b) {
                    core::cmp::Ordering::Equal => Orientation::Zero,
                    core::cmp::Ordering::Less => Orientation::Positive,
                    core::cmp::Ordering::Greater => Orientation::Negative,
                });
            }
        }
        return UserLabels { maps, orientation };
    }

    let mut maps: Vec<DiffMap> = Vec::new();
    for a in 0..m {
        for b in 0..m {
            let map = pair_map(block, scheme, sign, a, b);
            if !maps.contains(&map) {
                maps.push(map);
            }
        }
    }
    let orientation = (0..maps.len())
        .map(|p| {
            if maps[p].is_zero() {
                return Orientation::Zero;
            }
            let neg = maps.iter().position(|q| q.is_negation_of(&maps[p]));
            match neg {
                Some(q) if q < p => Orientation::Negative,
                _ => Orientation::Positive,
            }
        })
        .collect();
    UserLabels { maps, orientation }
}
