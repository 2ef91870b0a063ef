//! Lattice and dual-lattice geometry.
//!
//! A periodicity lattice `Ω` is given by `d` generator vectors `a_1..a_d`.
//! Its dual `Γ` has generators `b_1..b_d` fixed by the 2π-biorthogonality
//! `⟨b_i, a_j⟩ = 2π δ_ij`, so that `e^{i⟨γ,x⟩}` is Ω-periodic exactly for
//! `γ ∈ Γ`.  Quasimomenta live in the centered half-open fundamental domain
//! of the dual lattice,
//!
//! ```text
//! F* = { Σ c_i b_i : c_i ∈ [-1/2, 1/2) },
//! ```
//!
//! which tiles ℝ^d under Γ-translates and contains exactly one representative
//! of every coset.  This module also owns multi-indices (used by operator
//! symbols) and sampled quasimomentum paths.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::Result;

/// Tolerance for the biorthogonality check `⟨b_i, a_j⟩ = 2π δ_ij`.
const BIORTHOGONALITY_TOL: f64 = 1e-12;

/// A periodicity lattice together with its dual.
///
/// Both bases are stored row-wise: `basis[i]` is the primal generator `a_i`,
/// `dual_basis[i]` the dual generator `b_i`.  Instances are immutable once
/// built, so they can be shared freely across parallel workers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lattice {
    pub dimension: usize,
    pub basis: Vec<Vec<f64>>,
    pub dual_basis: Vec<Vec<f64>>,
    pub cell_volume: f64,
}

/// A multi-index `α = (α_1, …, α_d)` of partial-derivative orders.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// The order `|α| = α_1 + … + α_d`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Dimension the index applies to.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The monomial `ξ^α = ξ_1^{α_1} ⋯ ξ_d^{α_d}`.
    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(xi)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }

    /// Partial derivative of the monomial with respect to `ξ_i`.
    pub fn monomial_derivative(&self, xi: &[f64], i: usize) -> f64 {
        let ai = self.0[i];
        if ai == 0 {
            return 0.0;
        }
        let mut value = ai as f64 * xi[i].powi(ai as i32 - 1);
        for (j, (&a, &x)) in self.0.iter().zip(xi).enumerate() {
            if j != i {
                value *= x.powi(a as i32);
            }
        }
        value
    }
}

/// All multi-indices in `d` variables with `|α| ≤ max_order`, in lexicographic
/// order.  Used both for symbol enumeration and for the Cauchy–Schwarz count
/// in the coercivity chain.
pub fn multi_indices_up_to(d: usize, max_order: u32) -> Vec<MultiIndex> {
    fn rec(d: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if d == 0 {
            out.push(MultiIndex(prefix.clone()));
            return;
        }
        for a in 0..=budget {
            prefix.push(a);
            rec(d - 1, budget - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, max_order, &mut Vec::with_capacity(d), &mut out);
    out.sort();
    out
}

/// A point of the dual lattice `Γ`, kept both as integer coordinates in the
/// dual basis and as a Cartesian vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub coords: Vec<i64>,
    pub cartesian: Vec<f64>,
}

impl DualPoint {
    pub fn norm(&self) -> f64 {
        self.cartesian.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// An ordered list of quasimomentum samples with waypoint bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasimomentumPath {
    pub samples: Vec<Vec<f64>>,
    /// Indices into `samples` where the original waypoints sit.
    pub waypoint_indices: Vec<usize>,
    /// One label per waypoint (defaults to "w0", "w1", …).
    pub waypoint_labels: Vec<String>,
    /// Whether samples were reduced to the fundamental domain.
    pub reduced: bool,
}

impl QuasimomentumPath {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// A path consisting of explicitly given samples (no interpolation).
    pub fn from_samples(samples: Vec<Vec<f64>>) -> Self {
        let last = samples.len().saturating_sub(1);
        QuasimomentumPath {
            samples,
            waypoint_indices: vec![0, last],
            waypoint_labels: vec!["start".into(), "end".into()],
            reduced: false,
        }
    }
}

/// Build a lattice from primal generators, deriving the dual basis from the
/// 2π-biorthogonality condition.
pub fn build_lattice(generators: &[Vec<f64>]) -> Result<Lattice> {
    let d = generators.len();
    if d == 0 {
        return Err(SpectralError::InvalidInput(
            "lattice needs at least one generator".into(),
        ));
    }
    if generators.iter().any(|g| g.len() != d) {
        return Err(SpectralError::InvalidInput(format!(
            "expected {d} generators of length {d}"
        )));
    }

    // Rows of `a` are the primal generators.
    let a = DMatrix::from_fn(d, d, |i, j| generators[i][j]);
    let det = a.determinant();
    if det.abs() < 1e-12 {
        return Err(SpectralError::DegenerateLattice { determinant: det });
    }

    // ⟨b_i, a_j⟩ = 2π δ_ij  ⇔  B A^T = 2π I with b_i the rows of B.
    let b = a
        .transpose()
        .try_inverse()
        .ok_or(SpectralError::DegenerateLattice { determinant: det })?
        * (2.0 * std::f64::consts::PI);

    let dual_basis: Vec<Vec<f64>> = (0..d).map(|i| b.row(i).iter().copied().collect()).collect();

    // The construction is exact up to roundoff; verify the invariant anyway
    // so ill-conditioned generator sets are rejected here, not downstream.
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| dual_basis[i][k] * generators[j][k]).sum();
            let expect = if i == j { 2.0 * std::f64::consts::PI } else { 0.0 };
            if (dot - expect).abs() > BIORTHOGONALITY_TOL * (1.0 + dot.abs()) {
                return Err(SpectralError::DegenerateLattice { determinant: det });
            }
        }
    }

    Ok(Lattice {
        dimension: d,
        basis: generators.to_vec(),
        dual_basis,
        cell_volume: det.abs(),
    })
}

impl Lattice {
    /// Cartesian vector of the dual-lattice point with integer coordinates `n`.
    pub fn dual_point(&self, n: &[i64]) -> Vec<f64> {
        let d = self.dimension;
        let mut v = vec![0.0; d];
        for (ni, bi) in n.iter().zip(&self.dual_basis) {
            for k in 0..d {
                v[k] += *ni as f64 * bi[k];
            }
        }
        v
    }

    /// Coordinates of a Cartesian point `t` in the dual basis:
    /// `t = Σ c_i b_i` with `c_i = ⟨t, a_i⟩ / 2π`.
    pub fn dual_coordinates(&self, t: &[f64]) -> Vec<f64> {
        self.basis
            .iter()
            .map(|a| {
                t.iter().zip(a).map(|(ti, ai)| ti * ai).sum::<f64>() / (2.0 * std::f64::consts::PI)
            })
            .collect()
    }
}

/// Enumerate `{ γ ∈ Γ : |γ| ≤ cutoff }` in lexicographic order of the integer
/// coordinates.
///
/// The Euclidean ball (rather than a coordinate box) matches the `|γ|^{2s}`
/// growth estimates used by the coercivity chain.  The ordering makes every
/// downstream matrix, CSV, and report bitwise reproducible.
pub fn enumerate_dual_points(lattice: &Lattice, cutoff: f64) -> Result<Vec<DualPoint>> {
    if !(cutoff > 0.0) {
        return Err(SpectralError::InvalidInput(format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    let d = lattice.dimension;

    // |n_i| = |⟨γ, a_i⟩| / 2π ≤ |γ| |a_i| / 2π bounds the search box.
    let bounds: Vec<i64> = lattice
        .basis
        .iter()
        .map(|a| {
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            (cutoff * norm / (2.0 * std::f64::consts::PI) + 1e-9).floor() as i64
        })
        .collect();

    let radius = cutoff * (1.0 + 1e-12) + 1e-12;
    let mut out = Vec::new();
    let mut n = vec![0i64; d];
    // Odometer over the box in lexicographic order.
    for i in 0..d {
        n[i] = -bounds[i];
    }
    loop {
        let cartesian = lattice.dual_point(&n);
        let norm = cartesian.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= radius {
            out.push(DualPoint {
                coords: n.clone(),
                cartesian,
            });
        }
        // Advance the least-significant (last) coordinate first so the overall
        // order is lexicographic on (n_1, …, n_d).
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if n[k] < bounds[k] {
                n[k] += 1;
                for j in k + 1..d {
                    n[j] = -bounds[j];
                }
                break;
            }
        }
    }
}

/// Reduce a quasimomentum to the centered half-open fundamental domain `F*`.
///
/// Iterates `t ← t − Σ round(c_i) b_i` (with round-half-up so the boundary
/// maps `+1/2 ↦ −1/2`) until the integer part vanishes, which makes the
/// operation exactly idempotent: once the computed shift is zero the input is
/// returned unchanged.
pub fn reduce_to_fundamental(lattice: &Lattice, t: &[f64]) -> Vec<f64> {
    let mut current = t.to_vec();
    for _ in 0..16 {
        let c = lattice.dual_coordinates(&current);
        let n: Vec<i64> = c.iter().map(|&ci| (ci + 0.5).floor() as i64).collect();
        if n.iter().all(|&ni| ni == 0) {
            return current;
        }
        let shift = lattice.dual_point(&n);
        for (cur, s) in current.iter_mut().zip(&shift) {
            *cur -= s;
        }
    }
    // Pathological roundoff ping-pong on the boundary; the last iterate is
    // within one ulp of the domain and further loops cannot improve it.
    current
}

/// Linearly interpolate a path through the given waypoints.
///
/// Each segment contributes `steps_per_segment` new samples; the very first
/// waypoint opens the path, and interior waypoints are not duplicated.  With
/// `reduce` set, every sample is pulled back to `F*` (refinement studies want
/// unreduced straight paths, so it is optional).
pub fn sample_path(
    lattice: &Lattice,
    waypoints: &[Vec<f64>],
    steps_per_segment: usize,
    reduce: bool,
    labels: Option<Vec<String>>,
) -> Result<QuasimomentumPath> {
    let d = lattice.dimension;
    if waypoints.len() < 2 {
        return Err(SpectralError::InvalidInput(
            "a path needs at least two waypoints".into(),
        ));
    }
    if steps_per_segment == 0 {
        return Err(SpectralError::InvalidInput(
            "steps_per_segment must be at least 1".into(),
        ));
    }
    if waypoints.iter().any(|w| w.len() != d) {
        return Err(SpectralError::InvalidInput(format!(
            "waypoints must have dimension {d}"
        )));
    }
    let waypoint_labels = match labels {
        Some(ls) => {
            if ls.len() != waypoints.len() {
                return Err(SpectralError::InvalidInput(format!(
                    "expected {} labels, got {}",
                    waypoints.len(),
                    ls.len()
                )));
            }
            ls
        }
        None => (0..waypoints.len()).map(|i| format!("w{i}")).collect(),
    };

    let mut samples = Vec::with_capacity(1 + (waypoints.len() - 1) * steps_per_segment);
    let mut waypoint_indices = Vec::with_capacity(waypoints.len());

    let push = |samples: &mut Vec<Vec<f64>>, point: Vec<f64>| {
        if reduce {
            samples.push(reduce_to_fundamental(lattice, &point));
        } else {
            samples.push(point);
        }
    };

    waypoint_indices.push(0);
    push(&mut samples, waypoints[0].clone());
    for seg in 0..waypoints.len() - 1 {
        let (from, to) = (&waypoints[seg], &waypoints[seg + 1]);
        for step in 1..=steps_per_segment {
            let s = step as f64 / steps_per_segment as f64;
            let point: Vec<f64> = from
                .iter()
                .zip(to)
                .map(|(f, t)| f + s * (t - f))
                .collect();
            push(&mut samples, point);
        }
        waypoint_indices.push(samples.len() - 1);
    }

    Ok(QuasimomentumPath {
        samples,
        waypoint_indices,
        waypoint_labels,
        reduced: reduce,
    })
}

/// Axis-aligned cubic lattice with the given edge length.
///
/// The edge `2π` gives the integer dual lattice `Γ = ℤ^d`, the setting of
/// every bundled reference problem.
pub fn cubic_lattice(d: usize, edge: f64) -> Result<Lattice> {
    let mut gens = vec![vec![0.0; d]; d];
    for (i, g) in gens.iter_mut().enumerate() {
        g[i] = edge;
    }
    build_lattice(&gens)
}

/// Euclidean distance between two quasimomenta.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
