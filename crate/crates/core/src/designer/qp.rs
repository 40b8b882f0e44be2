//! Minimum-norm point of a polyhedron `{x : a_iᵀx ≥ b_i}`.
//!
//! The inner solver is the Goldfarb–Idnani dual active-set method specialised to the
//! identity Hessian, so the factorization `Jᵀ N_A = [R; 0]` starts from `J = I`.
//! Large constraint families are handled by cutting planes: only a working set of
//! halfspaces is passed to the inner solver, and an oracle reports the most violated
//! members of the full family after each solve.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{dot, hypot, norm_sq, sqrt};

/// One violated halfspace of an oracle's family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub id: u64,
    /// Slack `aᵀx − b` divided by `‖a‖`; negative.
    pub score: f64,
}

/// A family of halfspaces `aᵀx ≥ b` indexed by `u64` ids.
pub trait HalfspaceOracle {
    fn dim(&self) -> usize;
    /// Appends every halfspace with `aᵀx − b < −tol` to `out`.
    fn violations(&self, x: &[f64], tol: f64, out: &mut Vec<Violation>);
    /// Writes `a` into `normal` and returns `b`.
    fn halfspace(&self, id: u64, normal: &mut [f64]) -> f64;
}

/// An explicit list of halfspaces.
#[derive(Debug, Clone, Default)]
pub struct Halfspaces {
    dim: usize,
    normals: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl Halfspaces {
    pub fn new(dim: usize) -> Self {
        Halfspaces { dim, normals: Vec::new(), rhs: Vec::new() }
    }

    pub fn push(&mut self, normal: Vec<f64>, rhs: f64) {
        assert_eq!(normal.len(), self.dim, "normal has wrong dimension");
        self.normals.push(normal);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }
}

impl HalfspaceOracle for Halfspaces {
    fn dim(&self) -> usize {
        self.dim
    }

    fn violations(&self, x: &[f64], tol: f64, out: &mut Vec<Violation>) {
        for (i, (a, &b)) in self.normals.iter().zip(&self.rhs).enumerate() {
            let s = dot(a, x) - b;
            if s < -tol {
                out.push(Violation { id: i as u64, score: s / sqrt(norm_sq(a)).max(f64::MIN_POSITIVE) });
            }
        }
    }

    fn halfspace(&self, id: u64, normal: &mut [f64]) -> f64 {
        normal.copy_from_slice(&self.normals[id as usize]);
        self.rhs[id as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    /// Absolute slack tolerance on the full family.
    pub tolerance: f64,
    /// Halfspaces added to the working set per cutting-plane round.
    pub batch: usize,
    pub max_rounds: usize,
    /// Active-set changes allowed per inner solve.
    pub max_steps: usize,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions { tolerance: 1e-10, batch: 64, max_rounds: 500, max_steps: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub status: QpStatus,
    /// Ids of the halfspaces active at `x`.
    pub active: Vec<u64>,
    pub rounds: usize,
    pub working_set: usize,
}

/// Minimizes `½‖x‖²` over the oracle's halfspaces, seeding the working set with `warm`.
pub fn min_norm_point<O: HalfspaceOracle + ?Sized>(
    oracle: &O,
    warm: &[u64],
    options: &QpOptions,
) -> QpSolution {
    let n = oracle.dim();
    let mut ids: Vec<u64> = Vec::new();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let add = |id: u64, ids: &mut Vec<u64>, rows: &mut Vec<(Vec<f64>, f64)>| {
        if !ids.contains(&id) {
            let mut a = vec![0.0; n];
            let b = oracle.halfspace(id, &mut a);
            ids.push(id);
            rows.push((a, b));
        }
    };
    for &id in warm {
        add(id, &mut ids, &mut rows);
    }
    let inner_tol = options.tolerance * 0.01;
    let mut violated = Vec::new();
    let mut last = vec![0.0; n];
    for round in 1..=options.max_rounds {
        let (x, active) = match solve_dense(n, &rows, inner_tol, options.max_steps) {
            Ok(v) => v,
            Err(status) => {
                return QpSolution { x: last, status, active: Vec::new(), rounds: round, working_set: ids.len() }
            }
        };
        violated.clear();
        oracle.violations(&x, options.tolerance, &mut violated);
        violated.retain(|v| !ids.contains(&v.id));
        if violated.is_empty() {
            return QpSolution {
                x,
                status: QpStatus::Optimal,
                active: active.iter().map(|&i| ids[i]).collect(),
                rounds: round,
                working_set: ids.len(),
            };
        }
        violated.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.id.cmp(&b.id)));
        for v in violated.iter().take(options.batch.max(1)) {
            add(v.id, &mut ids, &mut rows);
        }
        last = x;
    }
    QpSolution {
        x: last,
        status: QpStatus::IterationLimit,
        active: Vec::new(),
        rounds: options.max_rounds,
        working_set: ids.len(),
    }
}

// Relative size below which a normal is treated as lying in the span of the active set.
const DEPENDENCE: f64 = 1e-14;

struct Factorization {
    n: usize,
    /// Column-major `n x n`.
    j: Vec<f64>,
    /// Row-major `n x n`, upper triangular in the first `q` columns.
    r: Vec<f64>,
    q: usize,
}

impl Factorization {
    fn new(n: usize) -> Self {
        let mut j = vec![0.0; n * n];
        for i in 0..n {
            j[i * n + i] = 1.0;
        }
        Factorization { n, j, r: vec![0.0; n * n], q: 0 }
    }

    fn project(&self, a: &[f64], d: &mut [f64]) {
        for (i, di) in d.iter_mut().enumerate() {
            *di = dot(&self.j[i * self.n..(i + 1) * self.n], a);
        }
    }

    fn rotate_j(&mut self, c1: usize, c2: usize, c: f64, s: f64) {
        let n = self.n;
        for k in 0..n {
            let (x, y) = (self.j[c1 * n + k], self.j[c2 * n + k]);
            self.j[c1 * n + k] = c * x + s * y;
            self.j[c2 * n + k] = -s * x + c * y;
        }
    }

    /// Appends a normal whose projection is `d`; `d[q..]` must be nonzero.
    fn add(&mut self, d: &mut [f64]) {
        let n = self.n;
        for i in (self.q + 1..n).rev() {
            let (a, b) = (d[i - 1], d[i]);
            if b == 0.0 {
                continue;
            }
            let h = hypot(a, b);
            let (c, s) = (a / h, b / h);
            d[i - 1] = h;
            d[i] = 0.0;
            self.rotate_j(i - 1, i, c, s);
        }
        for row in 0..=self.q {
            self.r[row * n + self.q] = d[row];
        }
        self.q += 1;
    }

    fn drop(&mut self, k: usize) {
        let n = self.n;
        let q = self.q;
        for col in k..q - 1 {
            for row in 0..=col + 1 {
                self.r[row * n + col] = self.r[row * n + col + 1];
            }
        }
        for row in 0..n {
            self.r[row * n + q - 1] = 0.0;
        }
        for i in k..q - 1 {
            let (a, b) = (self.r[i * n + i], self.r[(i + 1) * n + i]);
            if b == 0.0 {
                continue;
            }
            let h = hypot(a, b);
            let (c, s) = (a / h, b / h);
            for col in i..q - 1 {
                let (x, y) = (self.r[i * n + col], self.r[(i + 1) * n + col]);
                self.r[i * n + col] = c * x + s * y;
                self.r[(i + 1) * n + col] = -s * x + c * y;
            }
            self.r[(i + 1) * n + i] = 0.0;
            self.rotate_j(i, i + 1, c, s);
        }
        self.q -= 1;
    }

    /// Solves `R[..q, ..q] out = d[..q]`.
    fn back_substitute(&self, d: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in (0..self.q).rev() {
            let mut v = d[i];
            for k in i + 1..self.q {
                v -= self.r[i * n + k] * out[k];
            }
            out[i] = v / self.r[i * n + i];
        }
    }
}

/// Dual active-set solve of `min ½‖x‖²` subject to `aᵀx ≥ b` for every row.
/// Returns the minimizer and the indices of the active rows.
fn solve_dense(
    n: usize,
    rows: &[(Vec<f64>, f64)],
    tol: f64,
    max_steps: usize,
) -> Result<(Vec<f64>, Vec<usize>), QpStatus> {
    let mut x = vec![0.0; n];
    let mut f = Factorization::new(n);
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut d = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut rv = vec![0.0; n];
    let norms: Vec<f64> = rows.iter().map(|(a, _)| sqrt(norm_sq(a))).collect();
    let mut steps = 0;
    if rows.iter().zip(&norms).any(|((_, b), &nm)| nm == 0.0 && *b > tol) {
        return Err(QpStatus::Infeasible);
    }

    loop {
        let mut pick = None;
        let mut worst = 0.0;
        for (i, (a, b)) in rows.iter().enumerate() {
            if norms[i] == 0.0 || active.contains(&i) {
                continue;
            }
            let s = dot(a, &x) - b;
            if s < -tol * (1.0 + b.abs()) {
                let score = s / norms[i];
                if score < worst {
                    worst = score;
                    pick = Some(i);
                }
            }
        }
        let Some(p) = pick else {
            return Ok((x, active));
        };
        let (a, b) = (&rows[p].0, rows[p].1);
        let a_sq = norms[p] * norms[p];
        let mut up = 0.0;
        loop {
            steps += 1;
            if steps > max_steps {
                return Err(QpStatus::IterationLimit);
            }
            f.project(a, &mut d);
            let q = f.q;
            z.fill(0.0);
            for i in q..n {
                let col = &f.j[i * n..(i + 1) * n];
                for k in 0..n {
                    z[k] += d[i] * col[k];
                }
            }
            f.back_substitute(&d, &mut rv);
            let mut t1 = f64::INFINITY;
            let mut drop_at = 0;
            for i in 0..q {
                if rv[i] > 0.0 {
                    let ratio = u[i] / rv[i];
                    if ratio < t1 {
                        t1 = ratio;
                        drop_at = i;
                    }
                }
            }
            let zn = dot(&z, a);
            let t2 = if zn > DEPENDENCE * a_sq { -(dot(a, &x) - b) / zn } else { f64::INFINITY };
            if t1.is_infinite() && t2.is_infinite() {
                return Err(QpStatus::Infeasible);
            }
            if t2.is_infinite() {
                for i in 0..q {
                    u[i] -= t1 * rv[i];
                }
                up += t1;
                f.drop(drop_at);
                active.remove(drop_at);
                u.remove(drop_at);
                continue;
            }
            let t = t1.min(t2);
            for k in 0..n {
                x[k] += t * z[k];
            }
            for i in 0..q {
                u[i] -= t * rv[i];
            }
            up += t;
            if t2 <= t1 {
                f.add(&mut d);
                active.push(p);
                u.push(up);
                break;
            }
            f.drop(drop_at);
            active.remove(drop_at);
            u.remove(drop_at);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(h: &Halfspaces) -> QpSolution {
        min_norm_point(h, &[], &QpOptions::default())
    }

    #[test]
    fn single_halfspace_projection() {
        let mut h = Halfspaces::new(2);
        h.push(vec![1.0, 1.0], 2.0);
        let s = solve(&h);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn inactive_constraints_stay_out() {
        let mut h = Halfspaces::new(3);
        h.push(vec![1.0, 0.0, 0.0], 1.0);
        h.push(vec![0.0, 1.0, 0.0], -5.0);
        h.push(vec![1.0, 1.0, 0.0], 0.5);
        let s = solve(&h);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12 && s.x[2].abs() < 1e-12);
        assert_eq!(s.active, vec![0]);
    }

    #[test]
    fn drops_constraint_when_needed() {
        // Adding the second halfspace makes the first one inactive.
        let mut h = Halfspaces::new(2);
        h.push(vec![1.0, 0.0], 1.0);
        h.push(vec![1.0, 1.0], 4.0);
        let s = solve(&h);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 2.0).abs() < 1e-12);
        assert_eq!(s.active, vec![1]);
    }

    #[test]
    fn vertex_of_three_halfspaces() {
        let mut h = Halfspaces::new(3);
        h.push(vec![1.0, 0.0, 0.0], 1.0);
        h.push(vec![0.0, 1.0, 0.0], 2.0);
        h.push(vec![0.0, 0.0, -1.0], 3.0);
        h.push(vec![1.0, 1.0, 1.0], -10.0);
        let s = solve(&h);
        assert!(s.x.iter().zip([1.0, 2.0, -3.0]).all(|(a, b)| (a - b).abs() < 1e-12));
        let mut act = s.active.clone();
        act.sort();
        assert_eq!(act, vec![0, 1, 2]);
    }

    #[test]
    fn infeasible_detected() {
        let mut h = Halfspaces::new(1);
        h.push(vec![1.0], 1.0);
        h.push(vec![-1.0], 1.0);
        assert_eq!(solve(&h).status, QpStatus::Infeasible);
    }

    #[test]
    fn dependent_duplicate_rows() {
        let mut h = Halfspaces::new(2);
        h.push(vec![1.0, 0.0], 1.0);
        h.push(vec![2.0, 0.0], 2.0);
        h.push(vec![0.0, 1.0], 1.0);
        let s = solve(&h);
        assert_eq!(s.status, QpStatus::Optimal);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    // Brute-force oracle: the optimum is the projection onto some subset's affine
    // intersection; the feasible one of least norm is the answer.
    fn brute_force(normals: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
        let n = normals[0].len();
        let m = normals.len();
        let mut best: Option<Vec<f64>> = None;
        for mask in 0u32..(1 << m) {
            let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            if idx.len() > n {
                continue;
            }
            // Solve (A Aᵀ) λ = b, x = Aᵀ λ via Gaussian elimination.
            let q = idx.len();
            let mut g = vec![vec![0.0; q + 1]; q];
            for (r, &i) in idx.iter().enumerate() {
                for (c, &k) in idx.iter().enumerate() {
                    g[r][c] = dot(&normals[i], &normals[k]);
                }
                g[r][q] = rhs[i];
            }
            let mut ok = true;
            for col in 0..q {
                let piv = (col..q).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs())).unwrap();
                if g[piv][col].abs() < 1e-10 {
                    ok = false;
                    break;
                }
                g.swap(col, piv);
                for r in 0..q {
                    if r != col {
                        let f = g[r][col] / g[col][col];
                        for c in col..=q {
                            g[r][c] -= f * g[col][c];
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut x = vec![0.0; n];
            for (r, &i) in idx.iter().enumerate() {
                let lam = g[r][q] / g[r][r];
                for k in 0..n {
                    x[k] += lam * normals[i][k];
                }
            }
            let feasible = normals.iter().zip(rhs).all(|(a, &b)| dot(a, &x) >= b - 1e-9);
            if feasible && best.as_ref().is_none_or(|bx| norm_sq(&x) < norm_sq(bx)) {
                best = Some(x);
            }
        }
        best
    }

    #[test]
    fn matches_brute_force_on_pseudo_random_instances() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let n = 3;
            let m = 6;
            let normals: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| next()).collect()).collect();
            let rhs: Vec<f64> = (0..m).map(|_| next()).collect();
            let mut h = Halfspaces::new(n);
            for (a, &b) in normals.iter().zip(&rhs) {
                h.push(a.clone(), b);
            }
            let s = min_norm_point(&h, &[], &QpOptions { batch: 1, ..QpOptions::default() });
            match brute_force(&normals, &rhs) {
                Some(x) => {
                    assert_eq!(s.status, QpStatus::Optimal);
                    // Near-parallel normals give large, ill-conditioned optima; compare relatively.
                    assert!((norm_sq(&s.x) - norm_sq(&x)).abs() <= 1e-6 * (1.0 + norm_sq(&x)), "{:?} vs {:?}", s.x, x);
                    let scale = 1.0 + sqrt(norm_sq(&s.x));
                    assert!(normals.iter().zip(&rhs).all(|(a, &b)| dot(a, &s.x) - b >= -1e-9 * scale));
                }
                None => assert_eq!(s.status, QpStatus::Infeasible),
            }
        }
    }
}
