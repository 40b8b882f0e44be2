//! Factor graphs between resources and users, and the per-user mapping matrices.

use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Matrix, Result};

/// Users per resource, `J/K`, kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overload {
    numerator: usize,
    denominator: usize,
}

impl Overload {
    pub fn new(users: usize, resources: usize) -> Self {
        let g = gcd(users, resources).max(1);
        Overload { numerator: users / g, denominator: resources / g }
    }

    pub fn numerator(&self) -> usize {
        self.numerator
    }

    pub fn denominator(&self) -> usize {
        self.denominator
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for Overload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Binary incidence structure between `K` resources (rows) and `J` users (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    resources: usize,
    users: usize,
    incidence: Vec<bool>,
    users_on: Vec<Vec<usize>>,
    resources_of: Vec<Vec<usize>>,
}

impl FactorGraph {
    /// Builds a graph from its `K x J` incidence rows.
    pub fn new<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        let j = rows.first().map_or(0, |r| r.as_ref().len());
        if k == 0 || j == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut incidence = Vec::with_capacity(k * j);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != j {
                return Err(Error::RaggedGraph { row: r, len: row.len(), expected: j });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => incidence.push(false),
                    1 => incidence.push(true),
                    value => return Err(Error::NonBinaryEntry { row: r, col: c, value }),
                }
            }
        }
        let users_on = (0..k)
            .map(|r| (0..j).filter(|&c| incidence[r * j + c]).collect::<Vec<_>>())
            .collect();
        let resources_of: Vec<Vec<usize>> = (0..j)
            .map(|c| (0..k).filter(|&r| incidence[r * j + c]).collect::<Vec<_>>())
            .collect();
        if let Some(user) = resources_of.iter().position(Vec::is_empty) {
            return Err(Error::UserWithoutResource { user });
        }
        Ok(FactorGraph { resources: k, users: j, incidence, users_on, resources_of })
    }

    /// The regular 4-resource, 6-user graph with two resources per user and three
    /// users per resource (150% overload).
    pub fn canonical() -> Self {
        FactorGraph::new(&[
            [1u8, 1, 1, 0, 0, 0],
            [1, 0, 0, 1, 1, 0],
            [0, 1, 0, 1, 0, 1],
            [0, 0, 1, 0, 1, 1],
        ])
        .expect("canonical graph is valid")
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn is_connected(&self, resource: usize, user: usize) -> bool {
        self.incidence[resource * self.users + user]
    }

    /// Users sharing a resource, `V(k)`, in increasing order.
    pub fn users_on(&self, resource: usize) -> &[usize] {
        &self.users_on[resource]
    }

    /// Resources occupied by a user, `R(j)`, in increasing order.
    pub fn resources_of(&self, user: usize) -> &[usize] {
        &self.resources_of[user]
    }

    /// Number of resources a user occupies (`N_j`).
    pub fn user_degree(&self, user: usize) -> usize {
        self.resources_of[user].len()
    }

    /// Number of users superimposed on a resource (`d_f`).
    pub fn resource_degree(&self, resource: usize) -> usize {
        self.users_on[resource].len()
    }

    pub fn overload(&self) -> Overload {
        Overload::new(self.users, self.resources)
    }

    pub fn incidence_rows(&self) -> Vec<Vec<u8>> {
        (0..self.resources)
            .map(|r| (0..self.users).map(|c| u8::from(self.is_connected(r, c))).collect())
            .collect()
    }

    /// Stacks the incidence matrix on top of itself, as needed when every complex
    /// resource is split into two real ones.
    pub fn doubled(&self) -> Self {
        let mut rows = self.incidence_rows();
        rows.extend(self.incidence_rows());
        FactorGraph::new(&rows).expect("stacking preserves validity")
    }

    pub fn mapping_matrix(&self, user: usize) -> Result<MappingMatrix> {
        if user >= self.users {
            return Err(Error::UserOutOfRange { index: user, count: self.users });
        }
        Ok(MappingMatrix {
            user,
            resources: self.resources,
            support: self.resources_of[user].clone(),
        })
    }
}

/// `diag(F_j)` with its zero columns removed: places an `N_j`-dimensional codeword
/// onto the user's resources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingMatrix {
    user: usize,
    resources: usize,
    support: Vec<usize>,
}

impl MappingMatrix {
    /// Builds a mapping from a strictly increasing list of resource indices.
    pub fn new(user: usize, resources: usize, support: Vec<usize>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::UserWithoutResource { user });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || support.iter().any(|&k| k >= resources) {
            return Err(Error::DimensionMismatch(alloc::format!(
                "support {support:?} is not an increasing subset of 0..{resources}"
            )));
        }
        Ok(MappingMatrix { user, resources, support })
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    /// Number of active resources (`N_j`).
    pub fn active(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// The dense binary `K x N_j` matrix.
    pub fn dense(&self) -> Matrix {
        let mut v = Matrix::zeros(self.resources, self.support.len());
        for (col, &k) in self.support.iter().enumerate() {
            v[(k, col)] = 1.0;
        }
        v
    }

    /// `V c`: places the entries of `c` on the support.
    pub fn expand(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.support.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "codeword has {} entries, mapping has {} columns",
                c.len(),
                self.support.len()
            )));
        }
        let mut x = alloc::vec![0.0; self.resources];
        for (&k, &v) in self.support.iter().zip(c) {
            x[k] = v;
        }
        Ok(x)
    }

    /// Restricts a `K`-vector to the support.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.support.iter().map(|&k| x[k]).collect()
    }
}
