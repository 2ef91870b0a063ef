//! Spectra of truncated operators: nondecreasing eigenvalue numeration,
//! multiplicity clustering, band functions over quasimomentum paths, and the
//! interval-counting certificate for eigenvalue continuity.
//!
//! Band functions are always numerated in nondecreasing order
//! `λ_1(t) ≤ λ_2(t) ≤ …`; no analytic re-labeling happens at band crossings,
//! so individual bands are continuous but possibly non-smooth where they
//! touch.  Clustering groups numerically coincident eigenvalues into distinct
//! values `μ_1 < … < μ_p` with multiplicities `k_j`, the bookkeeping on which
//! both the counting certificate and the Riesz projectors rest.

use rayon::prelude::*;

use crate::error::SpectralError;
use crate::lattice::{distance, Lattice, QuasimomentumPath};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::operator::{assemble, OperatorSpec, TruncatedOperator};
use crate::Result;

/// Relative clustering tolerance: eigenvalues within `1e-8·(1+|λ|)` of each
/// other are treated as one cluster (eigensolver backward error scales with
/// magnitude).
pub const DEFAULT_CLUSTER_REL_TOL: f64 = 1e-8;

/// Eigenvalue residual gate `‖M v_n − λ_n v_n‖ ≤ 1e-9·(1+|λ_n|)`.
const RESIDUAL_TOL: f64 = 1e-9;

/// Orthonormality gate for the eigenvector set.
const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Fractions of the minimal cluster gap used as the radius ladder in
/// [`theorem1_certificate`]; all strictly below 1 so every radius isolates
/// the clusters it is applied to.
pub const RADIUS_LADDER: [f64; 3] = [0.75, 0.5, 0.25];

/// Spectrum of one truncated operator: sorted eigenvalues with aligned
/// orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectrumAtT {
    pub t: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectrumAtT {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// The n-th eigenvector (0-based), as an owned column.
    pub fn eigenvector(&self, n: usize) -> CVector {
        self.eigenvectors.column(n).clone_owned()
    }
}

/// Distinct eigenvalues and their multiplicities.
#[derive(Debug, Clone)]
pub struct ClusterDecomposition {
    /// Distinct values μ_1 < μ_2 < … < μ_p (cluster means).
    pub values: Vec<f64>,
    /// Multiplicities k_1..k_p.
    pub multiplicities: Vec<usize>,
    /// Partial sums s_j = k_1 + … + k_j.
    pub partial_sums: Vec<usize>,
    /// Tolerance used by the greedy pass (absolute, or relative base).
    pub tolerance: f64,
    /// Whether `tolerance` was applied relative to `1+|λ|`.
    pub relative: bool,
}

impl ClusterDecomposition {
    /// Number of distinct clusters p.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// 0-based range of eigenvalue indices belonging to cluster `j` (0-based).
    pub fn member_range(&self, j: usize) -> std::ops::Range<usize> {
        let start = if j == 0 { 0 } else { self.partial_sums[j - 1] };
        start..self.partial_sums[j]
    }
}

/// Band functions tabulated over a path: `values[i][n]` is `λ_{n+1}(t_i)`.
#[derive(Debug, Clone)]
pub struct BandStructure {
    pub path: QuasimomentumPath,
    pub n_bands: usize,
    pub values: Vec<Vec<f64>>,
}

impl BandStructure {
    /// Column of the table: band `n` (0-based) over all samples.
    pub fn band(&self, n: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[n]).collect()
    }

    /// CSV rendering: header `t_1,…,t_d,band_1,…,band_n`, one row per sample,
    /// every float at 17 significant digits so the file round-trips exactly.
    pub fn to_csv(&self) -> String {
        let d = self.path.samples.first().map_or(0, |s| s.len());
        let mut out = String::new();
        for i in 0..d {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("t_{}", i + 1));
        }
        for n in 0..self.n_bands {
            out.push(',');
            out.push_str(&format!("band_{}", n + 1));
        }
        out.push('\n');
        for (t, row) in self.path.samples.iter().zip(&self.values) {
            let mut first = true;
            for x in t.iter().chain(row.iter()) {
                if !first {
                    out.push(',');
                }
                out.push_str(&format_g17(*x));
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Fixed 17-significant-digit float rendering used by every CSV writer.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Eigendecomposition of a truncated operator with invariant enforcement:
/// nondecreasing order, per-pair residuals, and orthonormality.
pub fn eigen_decompose(op: &TruncatedOperator) -> Result<SpectrumAtT> {
    let (values, vectors) = hermitian_eigen(&op.matrix)?;
    let n = values.len();

    // Residual gate ‖M v − λ v‖ ≤ tol·(1+|λ|), all columns at once.
    let mv = &op.matrix * &vectors;
    for k in 0..n {
        let residual = (mv.column(k) - vectors.column(k).scale(values[k])).norm();
        if residual > RESIDUAL_TOL * (1.0 + values[k].abs()) {
            return Err(SpectralError::NumericalFailure(format!(
                "eigenpair {k} residual {residual:.3e} exceeds tolerance"
            )));
        }
    }
    let gram_defect = (vectors.adjoint() * &vectors - CMatrix::identity(n, n)).camax();
    if gram_defect > ORTHONORMALITY_TOL {
        return Err(SpectralError::NumericalFailure(format!(
            "eigenvector set not orthonormal: defect {gram_defect:.3e}"
        )));
    }

    Ok(SpectrumAtT {
        t: op.t.clone(),
        eigenvalues: values.iter().copied().collect(),
        eigenvectors: vectors,
    })
}

fn cluster_greedy(spectrum: &SpectrumAtT, tol: f64, relative: bool) -> ClusterDecomposition {
    let lambda = &spectrum.eigenvalues;
    let mut multiplicities = Vec::new();
    let mut sums = Vec::new();
    let mut start = 0usize;
    for n in 0..lambda.len() {
        let boundary = if n + 1 == lambda.len() {
            true
        } else {
            let threshold = if relative {
                tol * (1.0 + lambda[n].abs())
            } else {
                tol
            };
            lambda[n + 1] - lambda[n] > threshold
        };
        if boundary {
            multiplicities.push(n + 1 - start);
            sums.push(n + 1);
            start = n + 1;
        }
    }
    let mut values = Vec::with_capacity(multiplicities.len());
    let mut lo = 0usize;
    for &hi in &sums {
        let mean = lambda[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        values.push(mean);
        lo = hi;
    }
    ClusterDecomposition {
        values,
        multiplicities,
        partial_sums: sums,
        tolerance: tol,
        relative,
    }
}

/// Greedy left-to-right clustering with an absolute gap tolerance: a new
/// cluster starts whenever `λ_{n+1} − λ_n > tol`.  Chains of closely spaced
/// eigenvalues therefore merge into one cluster even if their total spread
/// exceeds `tol` — deliberate, documented greedy behavior.
pub fn cluster_multiplicities(spectrum: &SpectrumAtT, tol: f64) -> Result<ClusterDecomposition> {
    if !(tol > 0.0) {
        return Err(SpectralError::InvalidInput(format!(
            "cluster tolerance must be positive, got {tol}"
        )));
    }
    if spectrum.is_empty() {
        return Err(SpectralError::InvalidInput(
            "cannot cluster an empty spectrum".into(),
        ));
    }
    Ok(cluster_greedy(spectrum, tol, false))
}

/// Clustering with the default magnitude-relative tolerance
/// [`DEFAULT_CLUSTER_REL_TOL`]`·(1+|λ|)`.
pub fn cluster_multiplicities_default(spectrum: &SpectrumAtT) -> Result<ClusterDecomposition> {
    if spectrum.is_empty() {
        return Err(SpectralError::InvalidInput(
            "cannot cluster an empty spectrum".into(),
        ));
    }
    Ok(cluster_greedy(spectrum, DEFAULT_CLUSTER_REL_TOL, true))
}

/// Half the minimal spacing between the first `p_limit + 1` cluster values:
/// any radius strictly below the returned value isolates each of the first
/// `p_limit` clusters from its neighbours.
pub fn min_cluster_gap(clusters: &ClusterDecomposition, p_limit: usize) -> Result<f64> {
    let p = clusters.len();
    if p < 2 {
        return Err(SpectralError::UndefinedGap);
    }
    if p_limit == 0 || p_limit > p - 1 {
        return Err(SpectralError::InvalidInput(format!(
            "p_limit must be in 1..={} (got {p_limit})",
            p - 1
        )));
    }
    let min_spacing = (0..p_limit)
        .map(|j| clusters.values[j + 1] - clusters.values[j])
        .fold(f64::INFINITY, f64::min);
    Ok(0.5 * min_spacing)
}

/// Number of eigenvalues (with multiplicity) in the open interval
/// `(center − r, center + r)`.
pub fn count_in_interval(spectrum: &SpectrumAtT, center: f64, r: f64) -> usize {
    spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l > center - r && l < center + r)
        .count()
}

/// Compute the lowest `n_bands` band functions along a path.
///
/// Samples are independent eigensolves and run in parallel; results are
/// merged in path order, so the output is deterministic regardless of the
/// worker count.  `n_bands` is capped at half the matrix dimension because
/// plane-wave truncation pollutes the top of the computed spectrum.
pub fn compute_bands(
    spec: &OperatorSpec,
    lattice: &Lattice,
    path: &QuasimomentumPath,
    cutoff: f64,
    n_bands: usize,
) -> Result<BandStructure> {
    if path.is_empty() {
        return Err(SpectralError::InvalidInput("empty path".into()));
    }
    if n_bands == 0 {
        return Err(SpectralError::InvalidInput(
            "n_bands must be at least 1".into(),
        ));
    }
    // Probe one assembly to learn N and fail fast on structural errors.
    let probe = assemble(spec, lattice, &path.samples[0], cutoff)?;
    let n = probe.size();
    if 2 * n_bands > n {
        return Err(SpectralError::InvalidInput(format!(
            "truncation-trust rule: n_bands = {n_bands} exceeds N/2 = {} (raise the cutoff)",
            n / 2
        )));
    }

    let values: Vec<Vec<f64>> = path
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, t)| -> Result<Vec<f64>> {
            let op = assemble(spec, lattice, t, cutoff).map_err(|e| annotate(e, i))?;
            let spectrum = eigen_decompose(&op).map_err(|e| annotate(e, i))?;
            Ok(spectrum.eigenvalues[..n_bands].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BandStructure {
        path: path.clone(),
        n_bands,
        values,
    })
}

/// Attach the failing sample index to message-carrying errors; structured
/// variants pass through so callers can still classify them.
fn annotate(e: SpectralError, sample: usize) -> SpectralError {
    match e {
        SpectralError::NumericalFailure(msg) => {
            SpectralError::NumericalFailure(format!("sample {sample}: {msg}"))
        }
        other => other,
    }
}

/// Result of the interval-counting certificate along a sequence `t_k → t_0`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CountingCertificate {
    pub t0: Vec<f64>,
    /// Cluster values μ_j at t0, truncated to the certified prefix.
    pub cluster_values: Vec<f64>,
    /// Multiplicities k_j of those clusters.
    pub multiplicities: Vec<usize>,
    pub p_limit: usize,
    /// Half the minimal cluster spacing; ladder radii are fractions of it.
    pub min_gap: f64,
    /// The radii actually certified (descending).
    pub radii: Vec<f64>,
    /// Per radius: the smallest sequence index from which every later sample
    /// has exactly k_j eigenvalues — and precisely the right ones — in each
    /// interval (μ_j − r, μ_j + r).
    pub empirical_index: Vec<usize>,
    pub pass: bool,
}

/// Certify eigenvalue counting along a sequence approaching `t0`.
///
/// For each radius `r` in the ladder below the minimal cluster gap, finds
/// the earliest sequence suffix on which every sample's spectrum has exactly
/// `k_j` eigenvalues in `(μ_j(t0) − r, μ_j(t0) + r)` for every `j ≤ p_limit`,
/// those eigenvalues being precisely `λ_n` for `n ∈ (s_{j−1}, s_j]`.  Errors
/// with a counterexample if even the final sample violates the count for the
/// smallest radius.
///
/// `tol` is the clustering tolerance at `t0` (`None` → the default
/// magnitude-relative rule).
pub fn theorem1_certificate(
    spec: &OperatorSpec,
    lattice: &Lattice,
    t0: &[f64],
    sequence: &[Vec<f64>],
    cutoff: f64,
    tol: Option<f64>,
    p_limit: usize,
) -> Result<CountingCertificate> {
    if sequence.is_empty() {
        return Err(SpectralError::InvalidInput(
            "counting certificate needs a nonempty sequence".into(),
        ));
    }
    // The sequence must approach t0 monotonically.
    let dists: Vec<f64> = sequence.iter().map(|t| distance(t, t0)).collect();
    if dists.windows(2).any(|w| w[1] > w[0] + 1e-15) {
        return Err(SpectralError::InvalidInput(
            "sequence must approach t0 with nonincreasing |t - t0|".into(),
        ));
    }

    let op0 = assemble(spec, lattice, t0, cutoff)?;
    let spectrum0 = eigen_decompose(&op0)?;
    let clusters = match tol {
        Some(tol) => cluster_multiplicities(&spectrum0, tol)?,
        None => cluster_multiplicities_default(&spectrum0)?,
    };
    let min_gap = min_cluster_gap(&clusters, p_limit)?;

    let spectra: Vec<SpectrumAtT> = sequence
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let op = assemble(spec, lattice, t, cutoff).map_err(|e| annotate(e, i))?;
            eigen_decompose(&op).map_err(|e| annotate(e, i))
        })
        .collect::<Result<Vec<_>>>()?;

    // predicate(sample, r): all j ≤ p_limit intervals hold exactly the right
    // eigenvalues.  Returns the first violation for error reporting.
    let check = |spectrum: &SpectrumAtT, r: f64| -> std::result::Result<(), (usize, usize, usize)> {
        for j in 0..p_limit {
            let mu = clusters.values[j];
            let expected = clusters.multiplicities[j];
            let range = clusters.member_range(j);
            let found = count_in_interval(spectrum, mu, r);
            if found != expected {
                return Err((j, expected, found));
            }
            // The members must be exactly λ_n for n in the cluster's range.
            let inside: Vec<usize> = spectrum
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > mu - r && l < mu + r)
                .map(|(n, _)| n)
                .collect();
            if inside.first() != Some(&range.start) || inside.len() != range.len() {
                return Err((j, expected, found));
            }
        }
        Ok(())
    };

    let radii: Vec<f64> = RADIUS_LADDER.iter().map(|f| f * min_gap).collect();
    let mut empirical_index = Vec::with_capacity(radii.len());
    for &r in &radii {
        // Find the smallest suffix start: scan from the end.
        let mut first_good = spectra.len();
        for (i, spectrum) in spectra.iter().enumerate().rev() {
            if check(spectrum, r).is_ok() {
                first_good = i;
            } else {
                break;
            }
        }
        if first_good == spectra.len() {
            // Even the last sample fails: report the counterexample.
            let last = spectra.len() - 1;
            let (j, expected, found) =
                check(&spectra[last], r).expect_err("suffix scan found no good sample");
            return Err(SpectralError::CountingViolation {
                sample: last,
                cluster: j + 1,
                expected,
                found,
            });
        }
        empirical_index.push(first_good);
    }

    Ok(CountingCertificate {
        t0: t0.to_vec(),
        cluster_values: clusters.values[..p_limit].to_vec(),
        multiplicities: clusters.multiplicities[..p_limit].to_vec(),
        p_limit,
        min_gap,
        radii,
        empirical_index,
        pass: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{cubic_lattice, sample_path};
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn line() -> Lattice {
        cubic_lattice(1, TWO_PI).unwrap()
    }

    fn spectrum_from(values: &[f64]) -> SpectrumAtT {
        SpectrumAtT {
            t: vec![0.0],
            eigenvalues: values.to_vec(),
            eigenvectors: CMatrix::identity(values.len(), values.len()),
        }
    }

    #[test]
    fn free_spectrum_matches_symbol_values() {
        let lat = line();
        let spec = OperatorSpec::free_laplacian(1);
        let s = eigen_decompose(&assemble(&spec, &lat, &[0.0], 1.5).unwrap()).unwrap();
        assert_relative_eq!(s.eigenvalues[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.eigenvalues[2], 1.0, epsilon = 1e-14);

        let s = eigen_decompose(&assemble(&spec, &lat, &[0.5], 1.5).unwrap()).unwrap();
        assert_relative_eq!(s.eigenvalues[0], 0.25, epsilon = 1e-14);
        assert_relative_eq!(s.eigenvalues[1], 0.25, epsilon = 1e-14);
        assert_relative_eq!(s.eigenvalues[2], 2.25, epsilon = 1e-14);
    }

    #[test]
    fn mathieu_ground_eigenvalue_is_cutoff_stable() {
        let lat = line();
        let spec = OperatorSpec::mathieu(1.0);
        let coarse = eigen_decompose(&assemble(&spec, &lat, &[0.0], 32.0).unwrap()).unwrap();
        let fine = eigen_decompose(&assemble(&spec, &lat, &[0.0], 64.0).unwrap()).unwrap();
        assert!((coarse.eigenvalues[0] - fine.eigenvalues[0]).abs() < 1e-8);
        // The ground state of −u″ + 2cos(x)u sits below zero.
        assert!(coarse.eigenvalues[0] < 0.0);
    }

    #[test]
    fn clustering_examples() {
        let c = cluster_multiplicities(&spectrum_from(&[0.0, 1.0, 1.0, 4.0, 4.0]), 1e-8).unwrap();
        assert_eq!(c.values, vec![0.0, 1.0, 4.0]);
        assert_eq!(c.multiplicities, vec![1, 2, 2]);
        assert_eq!(c.partial_sums, vec![1, 3, 5]);

        let c = cluster_multiplicities(&spectrum_from(&[0.0, 1e-12]), 1e-8).unwrap();
        assert_eq!(c.multiplicities, vec![2]);

        // Greedy chaining: pairwise gaps 2e-8 ≤ 3e-8 merge everything even
        // though the total spread is 4e-8.
        let c = cluster_multiplicities(&spectrum_from(&[0.0, 2e-8, 4e-8]), 3e-8).unwrap();
        assert_eq!(c.multiplicities, vec![3]);
        // Cluster value is the member mean, so every member is within tol.
        assert_relative_eq!(c.values[0], 2e-8, epsilon = 1e-20);
    }

    #[test]
    fn min_cluster_gap_examples() {
        let spectrum = spectrum_from(&[0.0, 1.0, 1.0, 4.0, 4.0]);
        let c = cluster_multiplicities(&spectrum, 1e-8).unwrap();
        assert_relative_eq!(min_cluster_gap(&c, 2).unwrap(), 0.5);
        assert_relative_eq!(min_cluster_gap(&c, 1).unwrap(), 0.5);

        let single = cluster_multiplicities(&spectrum_from(&[0.0, 1e-12]), 1e-8).unwrap();
        assert!(matches!(
            min_cluster_gap(&single, 1).unwrap_err(),
            SpectralError::UndefinedGap
        ));

        // p_limit beyond p−1 is a caller bug.
        assert!(min_cluster_gap(&c, 3).is_err());
    }

    #[test]
    fn interval_counts() {
        let s = spectrum_from(&[0.0, 1.0, 1.0, 4.0]);
        assert_eq!(count_in_interval(&s, 1.0, 0.5), 2);
        assert_eq!(count_in_interval(&s, 2.5, 0.5), 0);
        assert_eq!(count_in_interval(&s, 0.0, 0.5), 1);
    }

    #[test]
    fn free_bands_along_path_match_symbol() {
        let lat = line();
        let spec = OperatorSpec::free_laplacian(1);
        let path = sample_path(&lat, &[vec![0.0], vec![0.5]], 2, false, None).unwrap();
        let bands = compute_bands(&spec, &lat, &path, 4.0, 2).unwrap();
        let band1 = bands.band(0);
        let band2 = bands.band(1);
        for (got, expect) in band1.iter().zip([0.0, 0.0625, 0.25]) {
            assert_relative_eq!(*got, expect, epsilon = 1e-14);
        }
        for (got, expect) in band2.iter().zip([1.0, 0.5625, 0.25]) {
            assert_relative_eq!(*got, expect, epsilon = 1e-14);
        }
        // Columns nondecreasing in n at every sample.
        for row in &bands.values {
            assert!(row.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn truncation_trust_rule_rejects_greedy_band_counts() {
        let lat = line();
        let spec = OperatorSpec::free_laplacian(1);
        let path = sample_path(&lat, &[vec![0.0], vec![0.5]], 1, false, None).unwrap();
        // cutoff 1.5 → N = 3, so 1 band is allowed but not 2.
        assert!(compute_bands(&spec, &lat, &path, 1.5, 1).is_ok());
        let err = compute_bands(&spec, &lat, &path, 1.5, 2).unwrap_err();
        assert!(matches!(err, SpectralError::InvalidInput(_)));
    }

    #[test]
    fn mathieu_lowest_band_is_even_in_t() {
        let lat = line();
        let spec = OperatorSpec::mathieu(1.0);
        let path = sample_path(&lat, &[vec![-0.5], vec![0.5]], 8, false, None).unwrap();
        let bands = compute_bands(&spec, &lat, &path, 32.0, 1).unwrap();
        let band1 = bands.band(0);
        let m = band1.len();
        for i in 0..m / 2 {
            assert!(
                (band1[i] - band1[m - 1 - i]).abs() < 1e-10,
                "asymmetry at sample {i}: {} vs {}",
                band1[i],
                band1[m - 1 - i]
            );
        }
    }

    #[test]
    fn csv_has_full_precision_and_stable_layout() {
        let lat = line();
        let spec = OperatorSpec::free_laplacian(1);
        let path = sample_path(&lat, &[vec![0.0], vec![0.5]], 1, false, None).unwrap();
        let bands = compute_bands(&spec, &lat, &path, 1.5, 1).unwrap();
        let csv = bands.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t_1,band_1"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn counting_certificate_free_cluster_splitting() {
        let lat = line();
        let spec = OperatorSpec::free_laplacian(1);
        // At t0 = 0 the spectrum clusters as μ = (0, 1, 4, …) with k = (1, 2, 2, …).
        let sequence: Vec<Vec<f64>> = (1..=10).map(|i| vec![0.5_f64.powi(i)]).collect();
        let cert =
            theorem1_certificate(&spec, &lat, &[0.0], &sequence, 8.0, None, 2).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.multiplicities, vec![1, 2]);
        assert_relative_eq!(cert.min_gap, 0.5, epsilon = 1e-12);
        // Larger radii certify earlier (or equally early).
        for w in cert.empirical_index.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn counting_certificate_trivial_sequence() {
        let lat = line();
        let spec = OperatorSpec::mathieu(1.0);
        let cert =
            theorem1_certificate(&spec, &lat, &[0.25], &[vec![0.25]], 8.0, None, 3).unwrap();
        assert_eq!(cert.empirical_index, vec![0, 0, 0]);
    }

    #[test]
    fn counting_certificate_rejects_wandering_sequences() {
        let lat = line();
        let spec = OperatorSpec::free_laplacian(1);
        let err = theorem1_certificate(
            &spec,
            &lat,
            &[0.0],
            &[vec![0.1], vec![0.3]],
            4.0,
            None,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, SpectralError::InvalidInput(_)));
    }

    #[test]
    fn counting_consistency_partition_of_spectrum() {
        let lat = line();
        let spec = OperatorSpec::mathieu(1.0);
        let s = eigen_decompose(&assemble(&spec, &lat, &[0.17], 6.0).unwrap()).unwrap();
        let clusters = cluster_multiplicities_default(&s).unwrap();
        let p = clusters.len();
        let r = 0.9 * min_cluster_gap(&clusters, p - 1).unwrap();
        let total: usize = clusters
            .values
            .iter()
            .map(|&mu| count_in_interval(&s, mu, r))
            .sum();
        assert_eq!(total, s.len());
    }

    #[test]
    fn two_component_direct_sum_has_union_spectrum() {
        use crate::lattice::MultiIndex;
        use crate::operator::FourierCoefficient;
        use num_complex::Complex;

        let lat = line();
        // Component 1: Mathieu q=1. Component 2: free.
        let mut spec = OperatorSpec::free_laplacian(1);
        spec.m = 2;
        let coeff = |f: i64| FourierCoefficient {
            frequency: vec![f],
            matrix: CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex::new(1.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::new(0.0, 0.0),
                ],
            ),
        };
        spec.lower
            .insert(MultiIndex(vec![0]), vec![coeff(1), coeff(-1)]);

        let t = [0.3];
        let joint = eigen_decompose(&assemble(&spec, &lat, &t, 8.0).unwrap()).unwrap();
        let mathieu =
            eigen_decompose(&assemble(&OperatorSpec::mathieu(1.0), &lat, &t, 8.0).unwrap())
                .unwrap();
        let free =
            eigen_decompose(&assemble(&OperatorSpec::free_laplacian(1), &lat, &t, 8.0).unwrap())
                .unwrap();
        let mut union: Vec<f64> = mathieu
            .eigenvalues
            .iter()
            .chain(free.eigenvalues.iter())
            .copied()
            .collect();
        union.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(joint.len(), union.len());
        for (a, b) in joint.eigenvalues.iter().zip(&union) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn spectrum_is_invariant_under_dual_lattice_shifts() {
        let lat = line();
        for spec in [OperatorSpec::free_laplacian(1), OperatorSpec::mathieu(1.0)] {
            let t = [0.21];
            let shifted = [t[0] + 1.0];
            let a = eigen_decompose(&assemble(&spec, &lat, &t, 16.0).unwrap()).unwrap();
            let b = eigen_decompose(&assemble(&spec, &lat, &shifted, 16.0).unwrap()).unwrap();
            let keep = a.len() / 2;
            for n in 0..keep {
                assert!(
                    (a.eigenvalues[n] - b.eigenvalues[n]).abs() < 1e-8,
                    "band {n}: {} vs {}",
                    a.eigenvalues[n],
                    b.eigenvalues[n]
                );
            }
        }
    }
}
