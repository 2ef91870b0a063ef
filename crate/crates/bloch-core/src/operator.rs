//! Assembly of truncated fiber operators in the plane-wave basis.
//!
//! The operators handled here act on m-component functions u that are
//! quasiperiodic with quasimomentum t: `u(x+ω) = e^{i⟨t,ω⟩} u(x)` for every
//! lattice vector ω.  In the orthonormal basis `{e^{i⟨γ+t,x⟩} e_k}` (γ over
//! the dual lattice, e_k the coordinate unit vectors) such an operator
//!
//! ```text
//! Tated = Σ_{|α|=2s} q_α D^α  +  Σ_{|α|≤2s−1} Q_α(x) D^α  +  B
//! ```
//!
//! becomes an infinite Hermitian matrix; truncating the basis to `|γ| ≤ R`
//! gives the finite section assembled by [`assemble`].  The entry between row
//! `(γ,k)` and column `(γ′,k′)` is
//!
//! ```text
//! M[(γ,k),(γ′,k′)] = Σ_{|α|=2s} q_α (γ′+t)^α δ_{γγ′} δ_{kk′}
//!                  + Σ_{|α|≤2s−1} [Q̂_α(γ−γ′)]_{k,k′} (γ′+t)^α
//!                  + [b(γ)]_{k,k′} δ_{γγ′}
//! ```
//!
//! where `Q̂_α` are the (finitely many) Fourier coefficients of `Q_α` and `b`
//! is the Hermitian symbol of the bounded multiplier `B`.  Everything is a
//! finite exact expression — no quadrature enters the assembly.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;

use crate::error::SpectralError;
use crate::lattice::{
    distance, enumerate_dual_points, multi_indices_up_to, DualPoint, Lattice, MultiIndex,
};
use crate::linalg::{hermiticity_defect, operator_norm, symmetrize, CMatrix, CVector};
use crate::Result;

/// Hermiticity gate for assembled matrices: larger defects indicate a
/// coefficient file that is not formally self-adjoint.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// One Fourier coefficient `Q̂_α(γ)` of a periodic matrix coefficient.
///
/// The frequency is given in integer coordinates of the dual basis.
#[derive(Debug, Clone)]
pub struct FourierCoefficient {
    pub frequency: Vec<i64>,
    pub matrix: CMatrix,
}

/// Symbolic description of an operator `L + P + B`:
/// a scalar constant-coefficient principal part of order `2s`, lower-order
/// terms with finite Fourier-series coefficients, and a bounded Hermitian
/// Fourier multiplier.
#[derive(Debug, Clone, Default)]
pub struct OperatorSpec {
    pub dimension: usize,
    pub m: usize,
    pub order_s: u32,
    /// `α ↦ q_α` for `|α| = 2s`; each term acts as `q_α·I_m`.
    pub principal: BTreeMap<MultiIndex, f64>,
    /// `α ↦ Fourier series of Q_α` for `|α| ≤ 2s−1`.
    pub lower: BTreeMap<MultiIndex, Vec<FourierCoefficient>>,
    /// `γ ↦ b(γ)`, the symbol of the multiplier B (each value Hermitian).
    pub multiplier: BTreeMap<Vec<i64>, CMatrix>,
}

impl OperatorSpec {
    /// Free scalar Laplacian `−Δ` in `d` dimensions (s = 1, m = 1, no lower
    /// part, no multiplier).
    pub fn free_laplacian(d: usize) -> Self {
        let mut principal = BTreeMap::new();
        for i in 0..d {
            let mut alpha = vec![0u32; d];
            alpha[i] = 2;
            principal.insert(MultiIndex(alpha), 1.0);
        }
        OperatorSpec {
            dimension: d,
            m: 1,
            order_s: 1,
            principal,
            lower: BTreeMap::new(),
            multiplier: BTreeMap::new(),
        }
    }

    /// Mathieu operator `−u″ + 2q·cos(x)·u` on the 2π-periodic line:
    /// the cosine contributes the order-0 Fourier coefficients
    /// `Q̂_0(±1) = q`.
    pub fn mathieu(q: f64) -> Self {
        let mut spec = Self::free_laplacian(1);
        let coeff = |f: i64| FourierCoefficient {
            frequency: vec![f],
            matrix: CMatrix::from_element(1, 1, Complex::new(q, 0.0)),
        };
        spec.lower
            .insert(MultiIndex(vec![0]), vec![coeff(1), coeff(-1)]);
        spec
    }

    /// Structural validation: shapes, orders, and Hermitian multiplier values.
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 || self.m == 0 || self.order_s == 0 {
            return Err(SpectralError::InvalidInput(
                "dimension, m, and order_s must all be positive".into(),
            ));
        }
        if self.principal.is_empty() {
            return Err(SpectralError::InvalidInput(
                "principal part must contain at least one term".into(),
            ));
        }
        for (alpha, q) in &self.principal {
            if alpha.len() != d {
                return Err(SpectralError::InvalidInput(format!(
                    "principal multi-index {:?} has wrong dimension",
                    alpha.0
                )));
            }
            if alpha.order() != 2 * self.order_s {
                return Err(SpectralError::InvalidInput(format!(
                    "principal multi-index {:?} must have order {}",
                    alpha.0,
                    2 * self.order_s
                )));
            }
            if !q.is_finite() {
                return Err(SpectralError::InvalidInput(format!(
                    "principal coefficient for {:?} is not finite",
                    alpha.0
                )));
            }
        }
        for (alpha, coeffs) in &self.lower {
            if alpha.len() != d {
                return Err(SpectralError::InvalidInput(format!(
                    "lower-order multi-index {:?} has wrong dimension",
                    alpha.0
                )));
            }
            if alpha.order() > 2 * self.order_s - 1 {
                return Err(SpectralError::InvalidInput(format!(
                    "lower-order multi-index {:?} exceeds order {}",
                    alpha.0,
                    2 * self.order_s - 1
                )));
            }
            for c in coeffs {
                if c.frequency.len() != d {
                    return Err(SpectralError::InvalidInput(format!(
                        "Fourier frequency {:?} has wrong dimension",
                        c.frequency
                    )));
                }
                if c.matrix.nrows() != self.m || c.matrix.ncols() != self.m {
                    return Err(SpectralError::InvalidInput(format!(
                        "Fourier coefficient at {:?} must be {m}x{m}",
                        c.frequency,
                        m = self.m
                    )));
                }
            }
        }
        for (gamma, b) in &self.multiplier {
            if gamma.len() != d {
                return Err(SpectralError::InvalidInput(format!(
                    "multiplier frequency {:?} has wrong dimension",
                    gamma
                )));
            }
            if b.nrows() != self.m || b.ncols() != self.m {
                return Err(SpectralError::InvalidInput(format!(
                    "multiplier value at {:?} must be {m}x{m}",
                    gamma,
                    m = self.m
                )));
            }
            let defect = hermiticity_defect(b);
            if defect > HERMITICITY_TOL {
                return Err(SpectralError::NonSelfAdjointSpec {
                    defect,
                    tolerance: HERMITICITY_TOL,
                });
            }
        }
        Ok(())
    }

    /// Value of the homogeneous principal symbol `Σ_{|α|=2s} q_α ξ^α`.
    pub fn principal_symbol(&self, xi: &[f64]) -> f64 {
        self.principal
            .iter()
            .map(|(alpha, q)| q * alpha.monomial(xi))
            .sum()
    }

    /// Largest Euclidean norm among lower-order and multiplier frequencies.
    pub fn max_frequency_norm(&self, lattice: &Lattice) -> f64 {
        let mut worst = 0.0_f64;
        for coeffs in self.lower.values() {
            for c in coeffs {
                let v = lattice.dual_point(&c.frequency);
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                worst = worst.max(norm);
            }
        }
        worst
    }
}

/// A finite section of the fiber operator at quasimomentum `t`.
///
/// The basis is the list of pairs `(γ, k)` with `γ` running over
/// [`enumerate_dual_points`]`(lattice, cutoff)` (outer, lexicographic) and
/// `k = 0..m` (inner), so the flat index of `(γ_j, k)` is `j·m + k`.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub t: Vec<f64>,
    pub cutoff: f64,
    pub m: usize,
    pub points: Vec<DualPoint>,
    pub matrix: CMatrix,
}

impl TruncatedOperator {
    /// Matrix dimension `N = m · |{γ}|`.
    pub fn size(&self) -> usize {
        self.points.len() * self.m
    }

    /// Flat basis index of the pair `(γ_j, k)`.
    pub fn basis_index(&self, point_index: usize, k: usize) -> usize {
        point_index * self.m + k
    }

    /// The ordered `(γ, k)` basis as explicit pairs.
    pub fn basis_pairs(&self) -> Vec<(&DualPoint, usize)> {
        let mut pairs = Vec::with_capacity(self.size());
        for p in &self.points {
            for k in 0..self.m {
                pairs.push((p, k));
            }
        }
        pairs
    }

    /// Index of the basis point `γ = 0`, present for every valid cutoff.
    pub fn zero_point_index(&self) -> Option<usize> {
        self.points.iter().position(|p| p.coords.iter().all(|&c| c == 0))
    }
}

fn assemble_unchecked(
    spec: &OperatorSpec,
    lattice: &Lattice,
    t: &[f64],
    cutoff: f64,
) -> Result<TruncatedOperator> {
    spec.validate()?;
    if t.len() != spec.dimension || lattice.dimension != spec.dimension {
        return Err(SpectralError::InvalidInput(format!(
            "dimension mismatch: spec is {}-dimensional, t has length {}, lattice is {}-dimensional",
            spec.dimension,
            t.len(),
            lattice.dimension
        )));
    }
    let max_freq = spec.max_frequency_norm(lattice);
    if max_freq > 2.0 * cutoff {
        return Err(SpectralError::CutoffTooSmall {
            required: max_freq / 2.0,
            cutoff,
        });
    }

    let points = enumerate_dual_points(lattice, cutoff)?;
    let m = spec.m;
    let n = points.len() * m;
    let index_of: HashMap<&[i64], usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.coords.as_slice(), i))
        .collect();

    let mut matrix = CMatrix::zeros(n, n);
    let mut shifted = vec![0.0; spec.dimension];
    let mut target = vec![0i64; spec.dimension];
    for (j, gp) in points.iter().enumerate() {
        for (i, s) in shifted.iter_mut().enumerate() {
            *s = gp.cartesian[i] + t[i];
        }

        // Principal part: scalar q_α (γ′+t)^α on the diagonal block.
        let principal = spec.principal_symbol(&shifted);
        for k in 0..m {
            matrix[(j * m + k, j * m + k)] += Complex::new(principal, 0.0);
        }

        // Lower-order terms couple γ′ → γ′ + frequency.
        for (alpha, coeffs) in &spec.lower {
            let factor = alpha.monomial(&shifted);
            for c in coeffs {
                for (tg, (gc, fc)) in target
                    .iter_mut()
                    .zip(gp.coords.iter().zip(&c.frequency))
                {
                    *tg = gc + fc;
                }
                if let Some(&i) = index_of.get(target.as_slice()) {
                    for k in 0..m {
                        for k2 in 0..m {
                            matrix[(i * m + k, j * m + k2)] +=
                                c.matrix[(k, k2)] * Complex::new(factor, 0.0);
                        }
                    }
                }
            }
        }

        // Multiplier symbol b(γ′) on the diagonal block.
        if let Some(b) = spec.multiplier.get(&gp.coords) {
            for k in 0..m {
                for k2 in 0..m {
                    matrix[(j * m + k, j * m + k2)] += b[(k, k2)];
                }
            }
        }
    }

    Ok(TruncatedOperator {
        t: t.to_vec(),
        cutoff,
        m,
        points,
        matrix,
    })
}

/// Assemble the truncated operator at quasimomentum `t`, enforcing the
/// Hermiticity gate.
///
/// The matrix is symmetrized after passing the gate (perturbation at most
/// half the accepted defect) so that downstream eigensolves always see an
/// exactly Hermitian input.
pub fn assemble(
    spec: &OperatorSpec,
    lattice: &Lattice,
    t: &[f64],
    cutoff: f64,
) -> Result<TruncatedOperator> {
    let mut op = assemble_unchecked(spec, lattice, t, cutoff)?;
    let defect = hermiticity_defect(&op.matrix);
    if defect > HERMITICITY_TOL {
        return Err(SpectralError::NonSelfAdjointSpec {
            defect,
            tolerance: HERMITICITY_TOL,
        });
    }
    symmetrize(&mut op.matrix);
    Ok(op)
}

/// Outcome of probing the Hermiticity of assembled matrices over trial
/// quasimomenta.
#[derive(Debug, Clone)]
pub struct SelfAdjointnessReport {
    pub defects: Vec<f64>,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Assemble (without the gate) at each trial `t` and report the worst
/// Hermiticity defect.
///
/// A defect above tolerance means the coefficient data does not describe a
/// formally self-adjoint expression — e.g. a complex potential, or a
/// first-order term missing its compensating zero-order part.
pub fn check_self_adjointness(
    spec: &OperatorSpec,
    lattice: &Lattice,
    trial_ts: &[Vec<f64>],
    cutoff: f64,
) -> Result<SelfAdjointnessReport> {
    if trial_ts.is_empty() {
        return Err(SpectralError::InvalidInput(
            "need at least one trial quasimomentum".into(),
        ));
    }
    let mut defects = Vec::with_capacity(trial_ts.len());
    for t in trial_ts {
        let op = assemble_unchecked(spec, lattice, t, cutoff)?;
        defects.push(hermiticity_defect(&op.matrix));
    }
    let max_defect = defects.iter().cloned().fold(0.0, f64::max);
    Ok(SelfAdjointnessReport {
        defects,
        max_defect,
        tolerance: HERMITICITY_TOL,
        pass: max_defect <= HERMITICITY_TOL,
    })
}

/// Verify that modulation by `e^{i⟨δγ,x⟩}` (δγ ∈ Γ) intertwines the fiber
/// operators at `t0` and `t1 = t0 + δγ` exactly.
///
/// In coefficient space the modulation is the index shift
/// `(shift u)_{γ−δγ} = u_γ`, and the identity `A_{t1}(shift u) = shift(A_{t0} u)`
/// holds exactly in the full basis.  The returned residual is the truncated
/// version `‖A_{t1}(shift u) − shift(A_{t0} u)‖`; for u supported far enough
/// inside the truncation ball it vanishes to roundoff.
pub fn verify_modulation_identity(
    spec: &OperatorSpec,
    lattice: &Lattice,
    t0: &[f64],
    delta_gamma: &[i64],
    u: &CVector,
    cutoff: f64,
) -> Result<f64> {
    if delta_gamma.len() != spec.dimension {
        return Err(SpectralError::InvalidInput(format!(
            "shift vector {:?} has wrong dimension",
            delta_gamma
        )));
    }
    let op0 = assemble(spec, lattice, t0, cutoff)?;
    if u.len() != op0.size() {
        return Err(SpectralError::InvalidInput(format!(
            "coefficient vector has length {}, basis has {}",
            u.len(),
            op0.size()
        )));
    }

    let shift_cart = lattice.dual_point(delta_gamma);
    let shift_norm = shift_cart.iter().map(|x| x * x).sum::<f64>().sqrt();
    let margin = cutoff - shift_norm;

    // Support must sit at distance ≥ |δγ| from the cutoff boundary.
    for (j, p) in op0.points.iter().enumerate() {
        for k in 0..op0.m {
            if u[op0.basis_index(j, k)].norm() > 0.0 && p.norm() > margin + 1e-12 {
                return Err(SpectralError::UnsupportedShift {
                    shift_norm,
                    required_margin: shift_norm,
                });
            }
        }
    }

    let t1: Vec<f64> = t0.iter().zip(&shift_cart).map(|(a, b)| a + b).collect();
    let op1 = assemble(spec, lattice, &t1, cutoff)?;

    let index_of: HashMap<&[i64], usize> = op0
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.coords.as_slice(), i))
        .collect();
    let shift_vec = |v: &CVector| -> CVector {
        let mut out = CVector::zeros(v.len());
        let mut target = vec![0i64; spec.dimension];
        for (j, p) in op0.points.iter().enumerate() {
            for (tg, (pc, dg)) in target.iter_mut().zip(p.coords.iter().zip(delta_gamma)) {
                *tg = pc - dg;
            }
            if let Some(&i) = index_of.get(target.as_slice()) {
                for k in 0..op0.m {
                    out[i * op0.m + k] = v[j * op0.m + k];
                }
            }
        }
        out
    };

    let lhs = &op1.matrix * shift_vec(u);
    let rhs = shift_vec(&(&op0.matrix * u));
    Ok((lhs - rhs).norm())
}

/// Empirical Lipschitz constant of the assembly map `t ↦ M(t)`:
/// `max ‖M(t)−M(t′)‖_op / |t−t′|` over the given pairs.
///
/// Coincident pairs are skipped; entries are polynomials in `t`, so the
/// constant is finite on any compact region.
pub fn operator_lipschitz_constant(
    spec: &OperatorSpec,
    lattice: &Lattice,
    t_pairs: &[(Vec<f64>, Vec<f64>)],
    cutoff: f64,
) -> Result<f64> {
    if t_pairs.is_empty() {
        return Err(SpectralError::InvalidInput(
            "need at least one pair of quasimomenta".into(),
        ));
    }
    let mut best: Option<f64> = None;
    for (ta, tb) in t_pairs {
        let dist = distance(ta, tb);
        if dist == 0.0 {
            continue;
        }
        let ma = assemble(spec, lattice, ta, cutoff)?;
        let mb = assemble(spec, lattice, tb, cutoff)?;
        let ratio = operator_norm(&(ma.matrix - mb.matrix))? / dist;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or_else(|| {
        SpectralError::InvalidInput("all quasimomentum pairs were coincident".into())
    })
}

/// Analytic derivative of the assembled matrix with respect to `t_i`,
/// obtained by differentiating the symbol factors entry by entry.
///
/// Used to validate the polynomial dependence of `M(t)` on `t` against finite
/// differences; exported for tests and diagnostics rather than hot paths.
pub fn assemble_t_derivative(
    spec: &OperatorSpec,
    lattice: &Lattice,
    t: &[f64],
    cutoff: f64,
    i: usize,
) -> Result<CMatrix> {
    spec.validate()?;
    if i >= spec.dimension {
        return Err(SpectralError::InvalidInput(format!(
            "derivative direction {i} out of range for dimension {}",
            spec.dimension
        )));
    }
    let points = enumerate_dual_points(lattice, cutoff)?;
    let m = spec.m;
    let n = points.len() * m;
    let index_of: HashMap<&[i64], usize> = points
        .iter()
        .enumerate()
        .map(|(idx, p)| (p.coords.as_slice(), idx))
        .collect();

    let mut matrix = CMatrix::zeros(n, n);
    for (j, gp) in points.iter().enumerate() {
        let shifted: Vec<f64> = gp.cartesian.iter().zip(t).map(|(g, ti)| g + ti).collect();
        let dprincipal: f64 = spec
            .principal
            .iter()
            .map(|(alpha, q)| q * alpha.monomial_derivative(&shifted, i))
            .sum();
        for k in 0..m {
            matrix[(j * m + k, j * m + k)] += Complex::new(dprincipal, 0.0);
        }
        for (alpha, coeffs) in &spec.lower {
            let dfactor = alpha.monomial_derivative(&shifted, i);
            if dfactor == 0.0 {
                continue;
            }
            for c in coeffs {
                let target: Vec<i64> = gp
                    .coords
                    .iter()
                    .zip(&c.frequency)
                    .map(|(gc, fc)| gc + fc)
                    .collect();
                if let Some(&row) = index_of.get(target.as_slice()) {
                    for k in 0..m {
                        for k2 in 0..m {
                            matrix[(row * m + k, j * m + k2)] +=
                                c.matrix[(k, k2)] * Complex::new(dfactor, 0.0);
                        }
                    }
                }
            }
        }
        // The multiplier symbol does not depend on t.
    }
    Ok(matrix)
}

/// Number of multi-indices `|α| ≤ max_order` in `d` variables; the
/// Cauchy–Schwarz count used by the coercivity chain.
pub fn multi_index_count(d: usize, max_order: u32) -> usize {
    multi_indices_up_to(d, max_order).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::cubic_lattice;
    use crate::linalg::C64;
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn free_laplacian_is_diagonal_symbol() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let spec = OperatorSpec::free_laplacian(1);
        let op = assemble(&spec, &lat, &[0.0], 1.5).unwrap();
        // Basis order γ = −1, 0, 1.
        assert_eq!(op.size(), 3);
        for (i, expect) in [1.0, 0.0, 1.0].iter().enumerate() {
            assert_relative_eq!(op.matrix[(i, i)].re, expect, epsilon = 1e-15);
        }
        assert_eq!(op.matrix[(0, 1)], c(0.0, 0.0));

        let op = assemble(&spec, &lat, &[0.25], 1.5).unwrap();
        for (i, expect) in [0.5625, 0.0625, 1.5625].iter().enumerate() {
            assert_relative_eq!(op.matrix[(i, i)].re, expect, epsilon = 1e-15);
        }
    }

    #[test]
    fn mathieu_is_tridiagonal_with_unit_coupling() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let spec = OperatorSpec::mathieu(1.0);
        let op = assemble(&spec, &lat, &[0.0], 1.5).unwrap();
        let m = &op.matrix;
        for (i, expect) in [1.0, 0.0, 1.0].iter().enumerate() {
            assert_relative_eq!(m[(i, i)].re, expect, epsilon = 1e-15);
        }
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_relative_eq!(m[(i, j)].re, 1.0, epsilon = 1e-15);
            assert_eq!(m[(i, j)].im, 0.0);
        }
        for (i, j) in [(0, 2), (2, 0)] {
            assert_eq!(m[(i, j)], c(0.0, 0.0));
        }
    }

    #[test]
    fn self_adjointness_report_pass_and_fail() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let trials = vec![vec![0.1], vec![0.37], vec![-0.25]];

        let good = check_self_adjointness(&OperatorSpec::mathieu(1.0), &lat, &trials, 4.0).unwrap();
        assert!(good.pass);
        assert_eq!(good.max_defect, 0.0);

        // One-sided Fourier data: a complex-valued potential e^{ix}.
        let mut bad = OperatorSpec::free_laplacian(1);
        bad.lower.insert(
            MultiIndex(vec![0]),
            vec![FourierCoefficient {
                frequency: vec![1],
                matrix: CMatrix::from_element(1, 1, c(1.0, 0.0)),
            }],
        );
        let report = check_self_adjointness(&bad, &lat, &trials, 4.0).unwrap();
        assert!(!report.pass);
        assert!(report.max_defect > 0.5);

        // Hermitian multiplier on a two-component system is fine.
        let mut twocomp = OperatorSpec::free_laplacian(1);
        twocomp.m = 2;
        twocomp.multiplier.insert(
            vec![0],
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
        );
        let report = check_self_adjointness(&twocomp, &lat, &trials, 4.0).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn assemble_rejects_non_self_adjoint_spec() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let mut bad = OperatorSpec::free_laplacian(1);
        bad.lower.insert(
            MultiIndex(vec![0]),
            vec![FourierCoefficient {
                frequency: vec![1],
                matrix: CMatrix::from_element(1, 1, c(1.0, 0.0)),
            }],
        );
        let err = assemble(&bad, &lat, &[0.0], 4.0).unwrap_err();
        assert!(matches!(err, SpectralError::NonSelfAdjointSpec { .. }));
    }

    #[test]
    fn modulation_identity_free_and_mathieu() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();

        let free = OperatorSpec::free_laplacian(1);
        let op = assemble(&free, &lat, &[0.3], 8.0).unwrap();
        let mut u = CVector::zeros(op.size());
        u[op.zero_point_index().unwrap()] = c(1.0, 0.0);
        let residual = verify_modulation_identity(&free, &lat, &[0.3], &[1], &u, 8.0).unwrap();
        assert!(residual < 1e-12, "free residual {residual}");

        let mathieu = OperatorSpec::mathieu(1.0);
        let residual = verify_modulation_identity(&mathieu, &lat, &[0.3], &[1], &u, 8.0).unwrap();
        assert!(residual < 1e-12, "mathieu residual {residual}");

        // Mixed support away from the boundary also works.
        let op = assemble(&mathieu, &lat, &[0.1], 8.0).unwrap();
        let mut u = CVector::zeros(op.size());
        for (j, p) in op.points.iter().enumerate() {
            if p.norm() <= 3.0 {
                u[j] = c(0.3 + p.coords[0] as f64 * 0.1, 0.05);
            }
        }
        let residual = verify_modulation_identity(&mathieu, &lat, &[0.1], &[1], &u, 8.0).unwrap();
        assert!(residual < 1e-12, "interior-support residual {residual}");
    }

    #[test]
    fn modulation_rejects_boundary_support() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let spec = OperatorSpec::mathieu(1.0);
        let op = assemble(&spec, &lat, &[0.0], 8.0).unwrap();
        let mut u = CVector::zeros(op.size());
        let boundary = op
            .points
            .iter()
            .position(|p| p.coords[0] == 8)
            .expect("cutoff point present");
        u[boundary] = c(1.0, 0.0);
        let err = verify_modulation_identity(&spec, &lat, &[0.0], &[1], &u, 8.0).unwrap_err();
        assert!(matches!(err, SpectralError::UnsupportedShift { .. }));
    }

    #[test]
    fn lipschitz_constant_of_free_symbol_stays_below_derivative_bound() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let spec = OperatorSpec::free_laplacian(1);
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..10)
            .map(|i| {
                let a = 0.05 * i as f64;
                (vec![a], vec![a + 0.05])
            })
            .collect();
        let c_emp = operator_lipschitz_constant(&spec, &lat, &pairs, 1.5).unwrap();
        // |d/dt (γ+t)²| = |2(γ+t)| ≤ 3 for γ ∈ {−1,0,1}, t ∈ [0, 0.5].
        assert!(c_emp <= 3.0 + 1e-9, "C = {c_emp}");
        assert!(c_emp > 1.0, "C = {c_emp}");
    }

    #[test]
    fn lipschitz_skips_coincident_pairs() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let spec = OperatorSpec::free_laplacian(1);
        let pairs = vec![
            (vec![0.2], vec![0.2]),
            (vec![0.0], vec![0.1]),
        ];
        let c_emp = operator_lipschitz_constant(&spec, &lat, &pairs, 1.5).unwrap();
        assert!(c_emp > 0.0);

        let only_coincident = vec![(vec![0.2], vec![0.2])];
        assert!(operator_lipschitz_constant(&spec, &lat, &only_coincident, 1.5).is_err());
    }

    #[test]
    fn entries_depend_polynomially_on_t() {
        // Central finite difference of every entry matches the analytic
        // symbol derivative.
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let spec = OperatorSpec::mathieu(0.7);
        let t = [0.21];
        let h = 1e-5;
        let plus = assemble(&spec, &lat, &[t[0] + h], 3.0).unwrap().matrix;
        let minus = assemble(&spec, &lat, &[t[0] - h], 3.0).unwrap().matrix;
        let fd = (plus - minus).scale(1.0 / (2.0 * h));
        let analytic = assemble_t_derivative(&spec, &lat, &t, 3.0, 0).unwrap();
        let worst = (fd - analytic).camax();
        assert!(worst < 1e-6, "finite-difference mismatch {worst}");
    }

    #[test]
    fn cutoff_must_cover_coupling_frequencies() {
        let lat = cubic_lattice(1, TWO_PI).unwrap();
        let mut spec = OperatorSpec::free_laplacian(1);
        let q = |f: i64| FourierCoefficient {
            frequency: vec![f],
            matrix: CMatrix::from_element(1, 1, c(1.0, 0.0)),
        };
        spec.lower.insert(MultiIndex(vec![0]), vec![q(5), q(-5)]);
        let err = assemble(&spec, &lat, &[0.0], 2.0).unwrap_err();
        assert!(matches!(err, SpectralError::CutoffTooSmall { .. }));
        assert!(assemble(&spec, &lat, &[0.0], 2.5).is_ok());
    }

    #[test]
    fn multi_index_count_matches_binomial() {
        // d=1: orders 0..=1 → 2 indices; d=2, ≤1 → 3; d=2, ≤3 → 10.
        assert_eq!(multi_index_count(1, 1), 2);
        assert_eq!(multi_index_count(2, 1), 3);
        assert_eq!(multi_index_count(2, 3), 10);
    }
}
