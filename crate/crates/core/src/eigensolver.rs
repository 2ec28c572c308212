//! Flux-conservative discretization of `H = -d/dx (1/2m) d/dx + V` on a
//! uniform Dirichlet grid and a symmetric tridiagonal eigensolver
//! (Sturm-sequence bisection for eigenvalues, inverse iteration for vectors).

use rayon::prelude::*;

use crate::error::{GsipError, Result};
use crate::grid::{Grid, GridFunction};

const MAX_INVERSE_ITERATIONS: usize = 50;

/// Symmetric tridiagonal matrix. `weight` is the quadrature weight used to
/// normalize eigenvectors (the grid spacing for discretized operators).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    weight: f64,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        Self::with_weight(diag, offdiag, 1.0)
    }

    pub fn with_weight(diag: Vec<f64>, offdiag: Vec<f64>, weight: f64) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(GsipError::Grid(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
                diag.len(),
                offdiag.len()
            )));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(GsipError::Grid(format!("invalid weight {weight}")));
        }
        Ok(TridiagonalOperator {
            diag,
            offdiag,
            weight,
        })
    }

    /// Builds the operator from `κ = 1/(2m)` on the `n + 1` half nodes and
    /// `V` on the `n` nodes:
    /// `diag[i] = (κ[i] + κ[i+1])/h² + V[i]`, `offdiag[i] = -κ[i+1]/h²`.
    pub fn from_coefficients(spacing: f64, kappa_half: &[f64], potential: &[f64]) -> Result<Self> {
        let n = potential.len();
        if kappa_half.len() != n + 1 {
            return Err(GsipError::Grid(format!(
                "expected {} half-node coefficients, got {}",
                n + 1,
                kappa_half.len()
            )));
        }
        let inv_h2 = 1.0 / (spacing * spacing);
        let diag = (0..n)
            .map(|i| (kappa_half[i] + kappa_half[i + 1]) * inv_h2 + potential[i])
            .collect();
        let offdiag = (1..n).map(|i| -kappa_half[i] * inv_h2).collect();
        Self::with_weight(diag, offdiag, spacing)
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.offdiag[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        let hv = self.apply(v);
        let num: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        num / den
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 {
                self.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.offdiag[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivot_floor(&self) -> f64 {
        let max_e2 = self.offdiag.iter().fold(1.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * max_e2
    }

    /// Number of eigenvalues strictly below `lambda` (negative pivots of the
    /// `LDLᵀ` factorization of `T - λI`).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        self.sturm_count_with(lambda, self.pivot_floor())
    }

    fn sturm_count_with(&self, lambda: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - lambda;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.offdiag[i - 1];
                q = self.diag[i] - lambda - e * e / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Bisection for the eigenvalue with 0-based index `level`, run until
    /// the bracket can no longer be split in floating point.
    fn bisect_level(&self, level: usize, bounds: (f64, f64), pivmin: f64) -> f64 {
        let (mut lo, mut hi) = bounds;
        loop {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                return mid;
            }
            if self.sturm_count_with(mid, pivmin) > level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    /// Normalized so that `weight · Σ v² = 1`, first significant entry positive.
    pub vector: Vec<f64>,
}

impl Eigenpair {
    pub fn grid_function(&self, grid: Grid) -> Result<GridFunction> {
        GridFunction::new(grid, self.vector.clone())
    }
}

/// Discretizes `-d/dx (1/2m) d/dx + V` with `1/(2m)` sampled at half nodes.
pub fn discretize<M, P>(mass: M, potential: P, grid: &Grid) -> Result<TridiagonalOperator>
where
    M: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    let n = grid.len();
    let kappa = (0..=n)
        .map(|i| {
            let x = grid.half_node(i);
            let m = mass(x);
            if m > 0.0 && m.is_finite() {
                Ok(0.5 / m)
            } else {
                Err(GsipError::Mass { x, value: m })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let v = grid
        .nodes()
        .map(|x| {
            let value = potential(x);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(GsipError::Potential { x, value })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    TridiagonalOperator::from_coefficients(grid.spacing(), &kappa, &v)
}

/// The `k` smallest eigenvalues in ascending order, without vectors.
pub fn lowest_eigenvalues(op: &TridiagonalOperator, k: usize) -> Result<Vec<f64>> {
    if k > op.len() {
        return Err(GsipError::Grid(format!(
            "requested {k} eigenvalues from a {}-node operator",
            op.len()
        )));
    }
    let (lo, hi) = op.gershgorin();
    let pad = 1e-12 * op.norm_bound().max(1.0);
    let bounds = (lo - pad, hi + pad);
    let pivmin = op.pivot_floor();
    Ok((0..k)
        .into_par_iter()
        .map(|level| op.bisect_level(level, bounds, pivmin))
        .collect())
}

/// The `k` smallest eigenpairs, eigenvalues ascending.
pub fn lowest_eigenpairs(op: &TridiagonalOperator, k: usize) -> Result<Vec<Eigenpair>> {
    let energies = lowest_eigenvalues(op, k)?;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (level, &energy) in energies.iter().enumerate() {
        let v = inverse_iteration(op, energy, &vectors, level)?;
        vectors.push(v);
    }
    let scale = op.weight().sqrt();
    Ok(energies
        .into_iter()
        .zip(vectors)
        .map(|(energy, v)| Eigenpair {
            energy,
            vector: fix_sign(v.into_iter().map(|x| x / scale).collect()),
        })
        .collect())
}

fn fix_sign(mut v: Vec<f64>) -> Vec<f64> {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-6 * peak) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    v
}

/// LU factors of a shifted tridiagonal matrix with partial pivoting.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(op: &TridiagonalOperator, shift: f64) -> Self {
        let n = op.len();
        let mut dl = op.offdiag.clone();
        let mut du = op.offdiag.clone();
        let mut d: Vec<f64> = op.diag.iter().map(|x| x - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        // Exactly singular pivots are nudged; inverse iteration only needs a
        // very large (not infinite) amplification.
        let tiny = f64::EPSILON * op.norm_bound().max(f64::MIN_POSITIVE);
        for p in &mut d {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        ShiftedLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn euclid_normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for u in against {
            let c: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
    }
}

/// Inverse iteration at a converged eigenvalue. Returns a Euclidean unit
/// vector orthogonal to `previous`.
fn inverse_iteration(
    op: &TridiagonalOperator,
    energy: f64,
    previous: &[Vec<f64>],
    level: usize,
) -> Result<Vec<f64>> {
    let n = op.len();
    let lu = ShiftedLu::factor(op, energy);
    // Deterministic start vector with no special structure.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    orthogonalize(&mut v, previous);
    euclid_normalize(&mut v);
    for _ in 0..MAX_INVERSE_ITERATIONS {
        let mut next = v.clone();
        lu.solve(&mut next);
        orthogonalize(&mut next, previous);
        let norm = euclid_normalize(&mut next);
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        let dot: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            next.iter_mut().for_each(|x| *x = -*x);
        }
        let change = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        v = next;
        if change < 1e-10 {
            return Ok(v);
        }
    }
    Err(GsipError::Numerics {
        message: format!("inverse iteration did not converge for level {level} (E = {energy})"),
        level: Some(level),
    })
}

/// Richardson-extrapolated eigenvalues `(4 E_{h/2} - E_h)/3` from the grid
/// and its refinement (`2n + 1` nodes, spacing exactly halved).
pub fn richardson_refine<B>(build: B, grid: &Grid, k: usize) -> Result<Vec<f64>>
where
    B: Fn(&Grid) -> Result<TridiagonalOperator>,
{
    let coarse = lowest_eigenvalues(&build(grid)?, k)?;
    let fine = lowest_eigenvalues(&build(&grid.refined())?, k)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}
