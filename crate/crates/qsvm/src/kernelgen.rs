//! Kernel-matrix generation without tomography, the regularized system
//! matrix F = K + γ⁻¹I, and the classical least-squares SVM oracle.
//!
//! The kernel readout is classical: amplitudes are taken as nonnegative
//! square roots of measured probabilities. That is valid here because the
//! Ry-only data encoding produces real nonnegative amplitudes for angles in
//! [0, π/2]; outside that range counts cannot recover signs and the readout
//! is a documented approximation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::UnitPoint;
use crate::qcore::{C64, Counts, DensityMatrix2};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("counts table is empty")]
    ZeroCounts,
    #[error("kernel readout needs a 2-qubit record, got {0} qubits")]
    WrongQubitCount(usize),
    #[error("probabilities must be nonnegative and sum to 1 (deviation {0:.3e})")]
    BadProbabilities(f64),
    #[error("input vector {index} has norm {norm:.6}, expected 1")]
    NonUnitInput { index: usize, norm: f64 },
    #[error("need at least one training vector")]
    Empty,
    #[error("gamma must be positive and finite")]
    BadGamma,
    #[error("matrix is not symmetric (deviation {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("matrix is singular or ill-conditioned (pivot ratio {0:.3e})")]
    Singular(f64),
    #[error("dimension mismatch: matrix is {n}×{n} but y has length {len}")]
    DimensionMismatch { n: usize, len: usize },
    #[error(transparent)]
    Density(#[from] crate::qcore::DensityError),
}

// ---------------------------------------------------------------------------
// Symmetric matrices
// ---------------------------------------------------------------------------

/// A real symmetric M×M kernel-style matrix, stored row-major. Holds either
/// the Gram matrix K (unit diagonal for unit data) or its trace-normalized
/// form K̂ = K/tr(K).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    /// Validates symmetry (1e-9) and positive semidefiniteness (−1e-8).
    pub fn new(size: usize, entries: Vec<f64>) -> Result<Self, KernelError> {
        assert_eq!(entries.len(), size * size);
        let mut sym_dev = 0.0f64;
        for r in 0..size {
            for c in 0..r {
                sym_dev = sym_dev.max((entries[r * size + c] - entries[c * size + r]).abs());
            }
        }
        if sym_dev > 1e-9 {
            return Err(KernelError::NotSymmetric(sym_dev));
        }
        let m = Self { size, entries };
        let min_eig = m.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-8 {
            return Err(KernelError::NotPsd(min_eig));
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.size + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.size).map(|i| self.entry(i, i)).sum()
    }

    /// Real parts of a single-qubit density matrix as a 2×2 kernel matrix.
    pub fn from_density(rho: &DensityMatrix2) -> Result<Self, KernelError> {
        let worst_imag = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| rho.entry(r, c).im.abs())
            .fold(0.0, f64::max);
        if worst_imag > 1e-9 {
            return Err(KernelError::NotSymmetric(worst_imag));
        }
        Self::new(
            2,
            vec![rho.entry(0, 0).re, rho.entry(0, 1).re, rho.entry(1, 0).re, rho.entry(1, 1).re],
        )
    }

    /// Eigenvalues by cyclic Jacobi rotations; exact enough for the small
    /// matrices used here.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.entries, self.size)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn sym_eigenvalues(entries: &[f64], n: usize) -> Vec<f64> {
    let mut a = entries.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off += a[r * n + c] * a[r * n + c];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let theta = 0.5 * (a[q * n + q] - a[p * n + p]) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Eigenvalues of a symmetric 2×2 matrix in ascending order (closed form).
pub fn sym2_eigenvalues(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

// ---------------------------------------------------------------------------
// Kernel readout
// ---------------------------------------------------------------------------

/// Recovers the first-qubit density matrix of a two-qubit state from exact
/// Born probabilities (p₀₀, p₀₁, p₁₀, p₁₁): amplitudes are nonnegative
/// square roots, grouped by the second qubit into branch states with weights
/// p₀ = p₀₀+p₁₀ and p₁ = p₀₁+p₁₁, and ρ = p₀ψ₀ψ₀ᵀ + p₁ψ₁ψ₁ᵀ.
pub fn khat_from_probabilities(probs: &[f64; 4]) -> Result<DensityMatrix2, KernelError> {
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|p| *p < -1e-12) || (sum - 1.0).abs() > 1e-9 {
        return Err(KernelError::BadProbabilities((sum - 1.0).abs()));
    }
    let a: Vec<f64> = probs.iter().map(|p| p.max(0.0).sqrt()).collect();
    // Amplitude layout on |q₁q₂⟩: a[0] ↔ |00⟩, a[1] ↔ |01⟩, a[2] ↔ |10⟩,
    // a[3] ↔ |11⟩. Branch 0 collects the second-qubit-zero amplitudes.
    let p0 = probs[0] + probs[2];
    let p1 = probs[1] + probs[3];
    let mut rho = [[0.0f64; 2]; 2];
    if p0 > 0.0 {
        let psi = [a[0] / p0.sqrt(), a[2] / p0.sqrt()];
        for r in 0..2 {
            for c in 0..2 {
                rho[r][c] += p0 * psi[r] * psi[c];
            }
        }
    }
    if p1 > 0.0 {
        let psi = [a[1] / p1.sqrt(), a[3] / p1.sqrt()];
        for r in 0..2 {
            for c in 0..2 {
                rho[r][c] += p1 * psi[r] * psi[c];
            }
        }
    }
    let entries = [
        [C64::new(rho[0][0], 0.0), C64::new(rho[0][1], 0.0)],
        [C64::new(rho[1][0], 0.0), C64::new(rho[1][1], 0.0)],
    ];
    Ok(DensityMatrix2::new(entries)?)
}

/// Same readout from raw measurement counts of the 2-qubit oracle.
pub fn khat_from_counts(counts: &Counts) -> Result<DensityMatrix2, KernelError> {
    if counts.num_qubits != 2 {
        return Err(KernelError::WrongQubitCount(counts.num_qubits));
    }
    let total = counts.total();
    if total == 0 {
        return Err(KernelError::ZeroCounts);
    }
    let f = |bits: &str| counts.get(bits) as f64 / total as f64;
    khat_from_probabilities(&[f("00"), f("01"), f("10"), f("11")])
}

/// Builds the normalized kernel K̂ from per-qubit measurement results of the
/// shallow oracle. The M unit vectors are stacked into the 2M-component
/// state Σᵢ |i−1⟩⊗|xᵢ⟩ (scaled by 1/√M so it is normalized), and the data
/// slot is traced out: entry (j, k) of K̂ is (x⃗ⱼ·x⃗ₖ)/M.
pub fn khat_from_product_states(per_qubit: &[UnitPoint]) -> Result<KernelMatrix, KernelError> {
    if per_qubit.is_empty() {
        return Err(KernelError::Empty);
    }
    for (index, x) in per_qubit.iter().enumerate() {
        let norm = (x.x1 * x.x1 + x.x2 * x.x2).sqrt();
        if (norm - 1.0).abs() > 5e-3 {
            return Err(KernelError::NonUnitInput { index, norm });
        }
    }
    let m = per_qubit.len();
    let scale = 1.0 / (m as f64).sqrt();
    let mut phi = Vec::with_capacity(2 * m);
    for x in per_qubit {
        phi.push(scale * x.x1);
        phi.push(scale * x.x2);
    }
    let mut entries = vec![0.0; m * m];
    for j in 0..m {
        for k in 0..m {
            entries[j * m + k] = phi[2 * j] * phi[2 * k] + phi[2 * j + 1] * phi[2 * k + 1];
        }
    }
    KernelMatrix::new(m, entries)
}

// ---------------------------------------------------------------------------
// F matrix
// ---------------------------------------------------------------------------

/// F = K + γ⁻¹I with K recovered from K̂ as tr(K)·K̂. For unit training
/// data tr(K) equals the data count M, which is asserted rather than
/// estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FMatrix {
    pub size: usize,
    pub entries: Vec<f64>,
    pub gamma: f64,
}

impl FMatrix {
    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.size + c]
    }

    /// Eigenvalues (ascending) for the 2×2 case.
    pub fn eigenvalues2(&self) -> Option<(f64, f64)> {
        (self.size == 2).then(|| {
            sym2_eigenvalues(&[
                [self.entry(0, 0), self.entry(0, 1)],
                [self.entry(1, 0), self.entry(1, 1)],
            ])
        })
    }

    /// The published approximate form: K rounded to one decimal with the
    /// γ⁻¹ shift dropped. Available only when the exact F stays within 0.15
    /// of it; the solver circuit is hard-wired to this form's eigenvalues
    /// 0.5 and 1.5.
    pub fn paper_form(&self) -> Option<[[f64; 2]; 2]> {
        if self.size != 2 {
            return None;
        }
        let k = |r: usize, c: usize| {
            let kv = self.entry(r, c) - if r == c { 1.0 / self.gamma } else { 0.0 };
            (kv * 10.0).round() / 10.0
        };
        let rounded = [[k(0, 0), k(0, 1)], [k(1, 0), k(1, 1)]];
        let mut dev = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                dev = dev.max((self.entry(r, c) - rounded[r][c]).abs());
            }
        }
        (dev <= 0.15).then_some(rounded)
    }
}

/// Forms F = tr(K)·K̂ + γ⁻¹I from a normalized kernel (tr(K) = M).
pub fn build_f(khat: &KernelMatrix, gamma: f64) -> Result<FMatrix, KernelError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(KernelError::BadGamma);
    }
    let m = khat.size();
    let tr_k = m as f64;
    let mut entries = vec![0.0; m * m];
    for r in 0..m {
        for c in 0..m {
            entries[r * m + c] = tr_k * khat.entry(r, c) + if r == c { 1.0 / gamma } else { 0.0 };
        }
    }
    Ok(FMatrix { size: m, entries, gamma })
}

/// Forms F from the 2×2 density-matrix readout.
pub fn build_f_from_density(rho: &DensityMatrix2, gamma: f64) -> Result<FMatrix, KernelError> {
    build_f(&KernelMatrix::from_density(rho)?, gamma)
}

/// The paper's regularization default, γ = 2³.
pub const DEFAULT_GAMMA: f64 = 8.0;

// ---------------------------------------------------------------------------
// Classical LS-SVM oracle
// ---------------------------------------------------------------------------

/// Solves F·α = y by Gaussian elimination with partial pivoting. This is
/// the brute-force reference for every quantum readout in the pipeline.
pub fn solve_ls_svm_classical(f: &FMatrix, y: &[f64]) -> Result<Vec<f64>, KernelError> {
    let n = f.size;
    if y.len() != n {
        return Err(KernelError::DimensionMismatch { n, len: y.len() });
    }
    let mut a = f.entries.clone();
    let mut rhs = y.to_vec();
    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot == 0.0 {
            return Err(KernelError::Singular(f64::INFINITY));
        }
        max_pivot = max_pivot.max(pivot);
        min_pivot = min_pivot.min(pivot);
        if pivot_row != col {
            for c in 0..n {
                a.swap(col * n + c, pivot_row * n + c);
            }
            rhs.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let factor = a[r * n + col] / a[col * n + col];
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let cond = max_pivot / min_pivot;
    if cond > 1e12 {
        return Err(KernelError::Singular(cond));
    }
    let mut alpha = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in (r + 1)..n {
            acc -= a[r * n + c] * alpha[c];
        }
        alpha[r] = acc / a[r * n + r];
    }
    Ok(alpha)
}
