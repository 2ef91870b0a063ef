//! JSON problem-spec ingestion.
//!
//! A problem spec bundles the lattice generators with the three coefficient
//! families of the operator: the scalar principal part (`{alpha, q}`
//! entries, orders exactly 2s), the lower-order matrix Fourier coefficients
//! (orders ≤ 2s−1, one `{gamma, re, im}` matrix per frequency), and the
//! Fourier-multiplier blocks.  `re`/`im` are m×m row-major nested arrays.
//!
//! Loading is eager and strict: JSON syntax problems surface as parse
//! errors, structural problems (wrong matrix shapes, bad orders) as
//! validation errors naming the offending coefficient, and a formally
//! non-self-adjoint coefficient set is rejected by assembling the operator
//! at three deterministic quasimomenta and measuring the Hermiticity defect.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::lattice::{build_lattice, reduce_to_fundamental, Lattice, MultiIndex};
use crate::linalg::CMatrix;
use crate::operator::{check_self_adjointness, FourierCoefficient, OperatorSpec, HERMITICITY_TOL};
use crate::Result;

/// One principal-part term `q_α ξ^α`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrincipalEntry {
    pub alpha: Vec<u32>,
    pub q: f64,
}

/// One complex m×m matrix attached to a dual-lattice frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub gamma: Vec<i64>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Fourier series of one lower-order coefficient `Q_α`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerEntry {
    pub alpha: Vec<u32>,
    pub terms: Vec<MatrixEntry>,
}

/// On-disk problem spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpecFile {
    pub dimension: usize,
    pub m: usize,
    pub order_s: u32,
    pub lattice_generators: Vec<Vec<f64>>,
    pub principal: Vec<PrincipalEntry>,
    #[serde(default)]
    pub lower: Vec<LowerEntry>,
    #[serde(default)]
    pub multiplier: Vec<MatrixEntry>,
}

fn matrix_from_entry(entry: &MatrixEntry, m: usize, context: &str) -> Result<CMatrix> {
    let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == m && rows.iter().all(|r| r.len() == m);
    if !shape_ok(&entry.re) || !shape_ok(&entry.im) {
        return Err(SpectralError::InvalidInput(format!(
            "{context} gamma={:?}: re/im must be {m}×{m} row-major arrays",
            entry.gamma
        )));
    }
    Ok(CMatrix::from_fn(m, m, |i, j| {
        Complex::new(entry.re[i][j], entry.im[i][j])
    }))
}

/// Convert the on-disk form into the validated in-memory pair.
pub fn convert_spec(file: &ProblemSpecFile) -> Result<(OperatorSpec, Lattice)> {
    let lattice = build_lattice(&file.lattice_generators)?;
    if lattice.dimension != file.dimension {
        return Err(SpectralError::InvalidInput(format!(
            "dimension {} does not match {} lattice generators of that length",
            file.dimension, lattice.dimension
        )));
    }

    let mut principal = BTreeMap::new();
    for entry in &file.principal {
        if entry.alpha.len() != file.dimension {
            return Err(SpectralError::InvalidInput(format!(
                "principal coefficient alpha={:?}: expected {} components",
                entry.alpha, file.dimension
            )));
        }
        if principal
            .insert(MultiIndex(entry.alpha.clone()), entry.q)
            .is_some()
        {
            return Err(SpectralError::InvalidInput(format!(
                "principal coefficient alpha={:?} appears twice",
                entry.alpha
            )));
        }
    }

    let mut lower = BTreeMap::new();
    for entry in &file.lower {
        if entry.alpha.len() != file.dimension {
            return Err(SpectralError::InvalidInput(format!(
                "lower coefficient alpha={:?}: expected {} components",
                entry.alpha, file.dimension
            )));
        }
        let mut coefficients = Vec::with_capacity(entry.terms.len());
        let mut seen = std::collections::BTreeSet::new();
        for term in &entry.terms {
            if term.gamma.len() != file.dimension {
                return Err(SpectralError::InvalidInput(format!(
                    "lower coefficient alpha={:?} gamma={:?}: expected {} components",
                    entry.alpha, term.gamma, file.dimension
                )));
            }
            if !seen.insert(term.gamma.clone()) {
                return Err(SpectralError::InvalidInput(format!(
                    "lower coefficient alpha={:?} gamma={:?} appears twice",
                    entry.alpha, term.gamma
                )));
            }
            coefficients.push(FourierCoefficient {
                frequency: term.gamma.clone(),
                matrix: matrix_from_entry(
                    term,
                    file.m,
                    &format!("lower coefficient alpha={:?}", entry.alpha),
                )?,
            });
        }
        if lower
            .insert(MultiIndex(entry.alpha.clone()), coefficients)
            .is_some()
        {
            return Err(SpectralError::InvalidInput(format!(
                "lower coefficient alpha={:?} appears twice",
                entry.alpha
            )));
        }
    }

    let mut multiplier = BTreeMap::new();
    for entry in &file.multiplier {
        if entry.gamma.len() != file.dimension {
            return Err(SpectralError::InvalidInput(format!(
                "multiplier block gamma={:?}: expected {} components",
                entry.gamma, file.dimension
            )));
        }
        if multiplier
            .insert(
                entry.gamma.clone(),
                matrix_from_entry(entry, file.m, "multiplier block")?,
            )
            .is_some()
        {
            return Err(SpectralError::InvalidInput(format!(
                "multiplier block gamma={:?} appears twice",
                entry.gamma
            )));
        }
    }

    let spec = OperatorSpec {
        dimension: file.dimension,
        m: file.m,
        order_s: file.order_s,
        principal,
        lower,
        multiplier,
    };
    spec.validate()?;

    // Eager self-adjointness probe at three deterministic quasimomenta:
    // an asymmetric Fourier series would pass structural validation but
    // assemble to a non-Hermitian matrix at generic t.
    let mut rng = ChaCha8Rng::seed_from_u64(0xB10C);
    let trial_ts: Vec<Vec<f64>> = (0..3)
        .map(|_| {
            let raw: Vec<f64> = (0..file.dimension)
                .map(|_| (rng.random::<f64>() - 0.5) * 2.0)
                .collect();
            reduce_to_fundamental(&lattice, &raw)
        })
        .collect();
    let probe_cutoff = spec.max_frequency_norm(&lattice) + 1.0;
    let report = check_self_adjointness(&spec, &lattice, &trial_ts, probe_cutoff)?;
    if !report.pass {
        return Err(SpectralError::NonSelfAdjointSpec {
            defect: report.max_defect,
            tolerance: HERMITICITY_TOL,
        });
    }

    Ok((spec, lattice))
}

/// Parse a problem spec from JSON text.
pub fn parse_spec(text: &str) -> Result<(OperatorSpec, Lattice)> {
    let file: ProblemSpecFile =
        serde_json::from_str(text).map_err(|e| SpectralError::ParseError(e.to_string()))?;
    convert_spec(&file)
}

/// Load a problem spec from disk.
pub fn load_spec(path: &Path) -> Result<(OperatorSpec, Lattice)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpectralError::Io(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}
