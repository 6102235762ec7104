//! Dense complex matrix kernel: Pauli operators, tensor products, Hermitian
//! square roots, expectations, and density-matrix validation.
//!
//! Everything is sized for n ≤ 12 qubits (4096×4096 dense matrices); storage
//! is row-major with no sparsity, since the Lüders channel densifies states
//! anyway. Party i occupies the i-th tensor factor from the left, so party 1
//! is the most significant qubit of a basis index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

use crate::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = Complex<f64>;

/// Tolerance for Hermiticity checks: max |m[i][j] − conj(m[j][i])|.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance for density-matrix trace deviation |Tr ρ − 1|.
pub const TRACE_TOL: f64 = 1e-12;
/// Most-negative admissible eigenvalue of a density matrix or POVM effect.
pub const PSD_TOL: f64 = 1e-10;
/// Slack admitted on observable spectra beyond the ideal [−1, 1].
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Tolerance for the imaginary residue of an expectation value.
pub const IMAG_TOL: f64 = 1e-10;

const ZERO: C64 = Complex::new(0.0, 0.0);
const ONE: C64 = Complex::new(1.0, 0.0);

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    /// Zero matrix of side length `dim` (≥ 1).
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        ComplexMatrix {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    /// Identity matrix of side length `dim` (≥ 1).
    pub fn identity(dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    /// Build from row-major entries; `entries.len()` must equal `dim²`.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimension must be at least 1, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(ComplexMatrix { dim, entries })
    }

    /// Side length.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Entry at (row, col).
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    /// Set entry at (row, col).
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[row * self.dim + col] = value;
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self.entries[i * d + k];
                if aik == ZERO {
                    continue;
                }
                let row = &rhs.entries[k * d..(k + 1) * d];
                let dst = &mut out.entries[i * d..(i + 1) * d];
                for (o, &b) in dst.iter_mut().zip(row) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ComplexMatrix {
            dim: self.dim,
            entries,
        })
    }

    /// Entrywise difference.
    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ComplexMatrix {
            dim: self.dim,
            entries,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
        }
    }

    /// Real scalar multiple.
    pub fn scale_re(&self, factor: f64) -> ComplexMatrix {
        self.scale(Complex::new(factor, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        out
    }

    /// Trace Σ m[i][i].
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// Largest entrywise deviation from Hermiticity, max |m[i][j] − conj(m[j][i])|.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                let dev = (self.entries[r * d + c] - self.entries[c * d + r].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// Hermitian part (m + m†)/2, used to absorb floating-point drift after
    /// channel applications.
    pub fn symmetrize(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                let v = (self.entries[r * d + c] + self.entries[c * d + r].conj()) * 0.5;
                out.entries[r * d + c] = v;
            }
        }
        out
    }

    /// Largest entrywise absolute difference to another matrix of equal dim.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff requires equal dims");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Pauli matrix σ_index for index ∈ {1, 2, 3}.
///
/// σ_1 = [[0,1],[1,0]], σ_2 = [[0,−i],[i,0]], σ_3 = [[1,0],[0,−1]].
pub fn pauli(index: usize) -> Result<ComplexMatrix> {
    let i = Complex::new(0.0, 1.0);
    let entries = match index {
        1 => vec![ZERO, ONE, ONE, ZERO],
        2 => vec![ZERO, -i, i, ZERO],
        3 => vec![ONE, ZERO, ZERO, -ONE],
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Pauli index must be 1, 2, or 3, got {index}"
            )))
        }
    };
    ComplexMatrix::from_entries(2, entries)
}

/// Tensor (Kronecker) product a ⊗ b.
///
/// `(a ⊗ b)[i·d_b + k][j·d_b + l] = a[i][j]·b[k][l]`, so the left factor is
/// the more significant block index — party 1 leftmost.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..da {
        for j in 0..da {
            let aij = a.entries[i * da + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.entries[(i * db + k) * d + (j * db + l)] = aij * b.entries[k * db + l];
                }
            }
        }
    }
    out
}

/// Sign selector for the two POVM effects (I ± γσ)/2 of a dichotomic observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// Outcome +1 effect, (I + γσ)/2.
    Plus,
    /// Outcome −1 effect, (I − γσ)/2.
    Minus,
}

impl Sign {
    /// The sign as ±1.0.
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Closed-form Hermitian square root of the unsharp-measurement effect
/// (I + sign·γ·σ)/2:
///
/// √((I ± γσ)/2) = [(√(1+γ) + √(1−γ)) I ± (√(1+γ) − √(1−γ)) σ] / (2√2).
///
/// Exact for every γ ∈ [0, 1]; at γ = 1 it degenerates to the projector
/// (I ± σ)/2 itself.
pub fn sqrt_effect(gamma: f64, pauli_index: usize, sign: Sign) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "sharpness must lie in [0, 1], got {gamma}"
        )));
    }
    let sigma = pauli(pauli_index)?;
    let sp = libm::sqrt(1.0 + gamma);
    let sm = libm::sqrt(1.0 - gamma);
    let denom = 2.0 * libm::sqrt(2.0);
    let id_coeff = (sp + sm) / denom;
    let sigma_coeff = sign.as_f64() * (sp - sm) / denom;
    ComplexMatrix::identity(2)
        .scale_re(id_coeff)
        .add(&sigma.scale_re(sigma_coeff))
}

/// Hermitian square root of a positive semidefinite matrix via
/// eigendecomposition; eigenvalues in [−PSD_TOL, 0) are clamped to zero.
///
/// General fallback behind [`sqrt_effect`]; also handles projective effects
/// and arbitrary PSD test matrices.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let residual = m.hermiticity_residual();
    if residual > HERMITICITY_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let (eigenvalues, vectors) = hermitian_eigen(m)?;
    let d = m.dim;
    let mut sqrt_vals = Vec::with_capacity(d);
    for &lambda in &eigenvalues {
        if lambda < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: lambda,
            });
        }
        sqrt_vals.push(libm::sqrt(lambda.max(0.0)));
    }
    // V · diag(√λ) · V†
    let mut out = ComplexMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = ZERO;
            for (k, &sv) in sqrt_vals.iter().enumerate() {
                acc += vectors.at(r, k) * sv * vectors.at(c, k).conj();
            }
            out.entries[r * d + c] = acc;
        }
    }
    Ok(out.symmetrize())
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order paired with a unitary whose k-th
/// column is the k-th eigenvector. Intended for the small dimensions used
/// here (≤ 2^12); convergence is quadratic once off-diagonal mass is small.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let residual = m.hermiticity_residual();
    if residual > HERMITICITY_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let d = m.dim;
    let mut a = m.symmetrize();
    let mut v = ComplexMatrix::identity(d);

    let fro: f64 = libm::sqrt(a.entries.iter().map(|e| e.norm_sqr()).sum::<f64>());
    let tol = 1e-15 * fro.max(1e-300);

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a.at(p, q).norm_sqr();
            }
        }
        if libm::sqrt(2.0 * off) <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.at(p, q);
                let beta = apq.norm();
                if beta == 0.0 {
                    continue;
                }
                let phase = apq / beta;
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                // Real Jacobi angle on the phase-stripped 2×2 block.
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // Columns: [p, q] ← [c·p − s·conj(phase)·q ... ] via U with
                // U[p][p]=c, U[p][q]=s·phase, U[q][p]=−s·conj(phase), U[q][q]=c.
                let upq = phase * s;
                let uqp = -phase.conj() * s;
                // A ← U† A U: update rows p,q then columns p,q.
                for j in 0..d {
                    let ap = a.at(p, j);
                    let aq = a.at(q, j);
                    a.set(p, j, ap * c + aq * uqp.conj());
                    a.set(q, j, ap * upq.conj() + aq * c);
                }
                for i in 0..d {
                    let ap = a.at(i, p);
                    let aq = a.at(i, q);
                    a.set(i, p, ap * c + aq * uqp);
                    a.set(i, q, ap * upq + aq * c);
                    let vp = v.at(i, p);
                    let vq = v.at(i, q);
                    v.set(i, p, vp * c + vq * uqp);
                    v.set(i, q, vp * upq + vq * c);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a.at(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut sorted_v = ComplexMatrix::zeros(d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..d {
            sorted_v.set(r, new_col, v.at(r, old_col));
        }
    }
    Ok((eigenvalues, sorted_v))
}

/// Smallest eigenvalue of a Hermitian matrix (full Jacobi decomposition).
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let (eigenvalues, _) = hermitian_eigen(m)?;
    Ok(eigenvalues[0])
}

/// Cheap positive-semidefiniteness certificate: attempts a Cholesky
/// factorization of `m + shift·I`. Success proves min eigenvalue > −shift.
pub(crate) fn psd_certificate(m: &ComplexMatrix, shift: f64) -> bool {
    let d = m.dim;
    let mut l = vec![ZERO; d * d];
    for j in 0..d {
        let mut diag = m.entries[j * d + j].re + shift;
        for k in 0..j {
            diag -= l[j * d + k].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let ljj = libm::sqrt(diag);
        l[j * d + j] = Complex::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut acc = m.entries[i * d + j];
            for k in 0..j {
                acc -= l[i * d + k] * l[j * d + k].conj();
            }
            l[i * d + j] = acc / ljj;
        }
    }
    true
}

/// Conjugate a single tensor slot: returns (I ⊗ … ⊗ op ⊗ … ⊗ I) · m · (same)†
/// with the 2×2 `op` acting on 1-indexed `slot` out of `n_parties`.
///
/// Runs in O(4·dim²) instead of forming the dense Kronecker factor.
pub(crate) fn conjugate_slot(
    m: &ComplexMatrix,
    op: &ComplexMatrix,
    slot: usize,
    n_parties: usize,
) -> ComplexMatrix {
    debug_assert_eq!(op.dim, 2);
    debug_assert!(slot >= 1 && slot <= n_parties);
    let d = m.dim;
    debug_assert_eq!(d, 1usize << n_parties);
    let shift = n_parties - slot;
    let bit = 1usize << shift;
    let o = [
        [op.entries[0], op.entries[1]],
        [op.entries[2], op.entries[3]],
    ];
    let oc = [
        [op.entries[0].conj(), op.entries[1].conj()],
        [op.entries[2].conj(), op.entries[3].conj()],
    ];
    let mut out = ComplexMatrix::zeros(d);
    for r in 0..d {
        let rb = (r >> shift) & 1;
        let r0 = r & !bit;
        for c in 0..d {
            let cb = (c >> shift) & 1;
            let c0 = c & !bit;
            let mut acc = ZERO;
            for a in 0..2 {
                let left = o[rb][a];
                if left == ZERO {
                    continue;
                }
                let ra = r0 | (a << shift);
                for b in 0..2 {
                    let right = oc[cb][b];
                    if right == ZERO {
                        continue;
                    }
                    acc += left * right * m.entries[ra * d + (c0 | (b << shift))];
                }
            }
            out.entries[r * d + c] = acc;
        }
    }
    out
}

/// A single party's dichotomic measurement setting: a validated 2×2 Hermitian
/// matrix with spectrum inside [−1 − SPECTRUM_TOL, 1 + SPECTRUM_TOL].
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(ComplexMatrix);

impl Observable {
    /// Validate an arbitrary 2×2 matrix as an observable.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::InvalidArgument(format!(
                "observables are 2×2, got dim {}",
                m.dim()
            )));
        }
        let residual = m.hermiticity_residual();
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let (lo, hi) = two_by_two_spectrum(&m);
        if lo < -1.0 - SPECTRUM_TOL || hi > 1.0 + SPECTRUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "observable spectrum [{lo}, {hi}] exceeds [-1, 1]"
            )));
        }
        Ok(Observable(m))
    }

    /// The observable γ·σ_index for |γ| ≤ 1 (γ may be negative).
    pub fn pauli_multiple(gamma: f64, index: usize) -> Result<Self> {
        Observable::new(pauli(index)?.scale_re(gamma))
    }

    /// The observable x·σ_1 + y·σ_2 + z·σ_3 with √(x²+y²+z²) ≤ 1.
    pub fn pauli_combination(x: f64, y: f64, z: f64) -> Result<Self> {
        let m = pauli(1)?
            .scale_re(x)
            .add(&pauli(2)?.scale_re(y))?
            .add(&pauli(3)?.scale_re(z))?;
        Observable::new(m)
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// Detect the exact form γ·σ_p (including γ = 0 as γ·σ_1): returns
    /// (γ, p) with γ possibly negative, or None for any other Hermitian form.
    pub fn as_pauli_multiple(&self) -> Option<(f64, usize)> {
        const FORM_TOL: f64 = 1e-14;
        let m = &self.0;
        let delta = (m.at(0, 0) + m.at(1, 1)).re * 0.5;
        let x = m.at(0, 1).re;
        let y = -m.at(0, 1).im;
        let z = (m.at(0, 0) - m.at(1, 1)).re * 0.5;
        if delta.abs() > FORM_TOL {
            return None;
        }
        let mags = [x.abs(), y.abs(), z.abs()];
        let nonzero: Vec<usize> = (0..3).filter(|&i| mags[i] > FORM_TOL).collect();
        match nonzero.len() {
            0 => Some((0.0, 1)),
            1 => {
                let p = nonzero[0] + 1;
                let gamma = [x, y, z][nonzero[0]];
                Some((gamma, p))
            }
            _ => None,
        }
    }

    /// The two eigenvalues, ascending.
    pub fn spectrum(&self) -> (f64, f64) {
        two_by_two_spectrum(&self.0)
    }
}

/// Closed-form spectrum of a 2×2 Hermitian matrix, ascending.
fn two_by_two_spectrum(m: &ComplexMatrix) -> (f64, f64) {
    let mean = (m.at(0, 0) + m.at(1, 1)).re * 0.5;
    let half_diff = (m.at(0, 0) - m.at(1, 1)).re * 0.5;
    let radius = libm::sqrt(half_diff * half_diff + m.at(0, 1).norm_sqr());
    (mean - radius, mean + radius)
}

/// Validated n-qubit density matrix: Hermitian, unit trace, positive
/// semidefinite within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_parties: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validate a 2^n × 2^n matrix as an n-party state.
    ///
    /// Checks |Tr − 1| ≤ TRACE_TOL, Hermiticity ≤ HERMITICITY_TOL, and
    /// min eigenvalue ≥ −PSD_TOL. Positivity is certified by a Cholesky
    /// factorization of ρ + PSD_TOL·I; only if that fails is a full
    /// eigendecomposition consulted for the exact minimum.
    pub fn new(n_parties: usize, matrix: ComplexMatrix) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::InvalidArgument(
                "a state needs at least one party".into(),
            ));
        }
        let expected = 1usize << n_parties;
        if matrix.dim() != expected {
            return Err(Error::DimensionMismatch {
                left: expected,
                right: matrix.dim(),
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::TraceDeviation { trace: trace.re });
        }
        let residual = matrix.hermiticity_residual();
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian { residual });
        }
        if !psd_certificate(&matrix, PSD_TOL) {
            let min = min_eigenvalue(&matrix)?;
            if min < -PSD_TOL {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(DensityMatrix { n_parties, matrix })
    }

    /// Pure state ρ = |ψ⟩⟨ψ| from amplitudes of length 2^n (must be normalized).
    pub fn from_pure(n_parties: usize, amplitudes: &[C64]) -> Result<Self> {
        let dim = 1usize << n_parties;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: amplitudes.len(),
            });
        }
        let mut m = ComplexMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, amplitudes[r] * amplitudes[c].conj());
            }
        }
        DensityMatrix::new(n_parties, m)
    }

    /// The GHZ state (|0…0⟩ + |1…1⟩)/√2 on n parties.
    pub fn ghz(n_parties: usize) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::InvalidArgument(
                "a state needs at least one party".into(),
            ));
        }
        let dim = 1usize << n_parties;
        let mut amps = vec![ZERO; dim];
        let a = Complex::new(1.0 / libm::sqrt(2.0), 0.0);
        amps[0] = a;
        amps[dim - 1] = a;
        DensityMatrix::from_pure(n_parties, &amps)
    }

    /// The W state: equal superposition of the n single-excitation basis
    /// states, (|10…0⟩ + |010…0⟩ + … + |0…01⟩)/√n.
    pub fn w(n_parties: usize) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::InvalidArgument(
                "a state needs at least one party".into(),
            ));
        }
        let dim = 1usize << n_parties;
        let mut amps = vec![ZERO; dim];
        let a = Complex::new(1.0 / libm::sqrt(n_parties as f64), 0.0);
        for party in 0..n_parties {
            amps[1usize << (n_parties - 1 - party)] = a;
        }
        DensityMatrix::from_pure(n_parties, &amps)
    }

    /// Party count.
    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    /// Side length 2^n.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Expectation value Re(Tr[ρ·op]) of a Hermitian operator.
///
/// The imaginary residue of the trace must stay below IMAG_TOL; it is checked,
/// not discarded.
pub fn expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<f64> {
    let d = rho.dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: op.dim(),
        });
    }
    let residual = op.hermiticity_residual();
    if residual > HERMITICITY_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let mut acc = ZERO;
    let rm = rho.matrix();
    for r in 0..d {
        for c in 0..d {
            acc += rm.at(r, c) * op.at(c, r);
        }
    }
    if acc.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidual { residual: acc.im });
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn pauli_definitions() {
        let s1 = pauli(1).unwrap();
        assert_eq!(s1.at(0, 1), c(1.0, 0.0));
        assert_eq!(s1.at(0, 0), c(0.0, 0.0));
        let s3 = pauli(3).unwrap();
        assert_eq!(s3.at(0, 0), c(1.0, 0.0));
        assert_eq!(s3.at(1, 1), c(-1.0, 0.0));
        assert!(pauli(0).is_err());
        assert!(pauli(4).is_err());
    }

    #[test]
    fn pauli_squares_to_identity() {
        for idx in 1..=3 {
            let s = pauli(idx).unwrap();
            let sq = s.matmul(&s).unwrap();
            assert!(sq.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn kron_identity_blocks() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = kron(&i2, &i2);
        assert!(i4.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let a = pauli(3).unwrap().add(&ComplexMatrix::identity(2)).unwrap();
        let b = pauli(1)
            .unwrap()
            .add(&ComplexMatrix::identity(2).scale_re(3.0))
            .unwrap();
        let t = kron(&a, &b).trace();
        let expected = a.trace() * b.trace();
        assert!((t - expected).norm() < 1e-12);
    }

    #[test]
    fn kron_ordering_puts_left_factor_most_significant() {
        // σ_3 ⊗ I acting on |00⟩ (index 0): eigenvalue +1; on |10⟩ (index 2): −1.
        let m = kron(&pauli(3).unwrap(), &ComplexMatrix::identity(2));
        assert_eq!(m.at(0, 0), c(1.0, 0.0));
        assert_eq!(m.at(2, 2), c(-1.0, 0.0));
    }

    #[test]
    fn sqrt_effect_squares_back() {
        for index in 1..=3 {
            for sign in [Sign::Plus, Sign::Minus] {
                for step in 0..=10 {
                    let gamma = step as f64 / 10.0;
                    let root = sqrt_effect(gamma, index, sign).unwrap();
                    let squared = root.matmul(&root).unwrap();
                    let effect = ComplexMatrix::identity(2)
                        .add(&pauli(index).unwrap().scale_re(sign.as_f64() * gamma))
                        .unwrap()
                        .scale_re(0.5);
                    assert!(
                        squared.max_abs_diff(&effect) < 1e-12,
                        "γ={gamma} σ_{index} {sign:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sqrt_effect_gamma_zero_is_scaled_identity() {
        let root = sqrt_effect(0.0, 2, Sign::Plus).unwrap();
        let expected = ComplexMatrix::identity(2).scale_re(1.0 / libm::sqrt(2.0));
        assert!(root.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn sqrt_effect_sharp_limit_is_projector() {
        let root = sqrt_effect(1.0, 1, Sign::Plus).unwrap();
        let projector = ComplexMatrix::identity(2)
            .add(&pauli(1).unwrap())
            .unwrap()
            .scale_re(0.5);
        assert!(root.max_abs_diff(&projector) < 1e-15);
    }

    #[test]
    fn sqrt_effect_rejects_out_of_range() {
        assert!(sqrt_effect(-0.1, 1, Sign::Plus).is_err());
        assert!(sqrt_effect(1.1, 1, Sign::Plus).is_err());
    }

    #[test]
    fn sqrt_psd_diagonal() {
        let m = ComplexMatrix::from_entries(2, vec![c(4.0, 0.0), ZERO, ZERO, c(9.0, 0.0)]).unwrap();
        let root = sqrt_psd(&m).unwrap();
        assert_abs_diff_eq!(root.at(0, 0).re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(root.at(1, 1).re, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_psd_matches_sqrt_effect() {
        let effect = ComplexMatrix::identity(2)
            .add(&pauli(1).unwrap().scale_re(0.3))
            .unwrap()
            .scale_re(0.5);
        let a = sqrt_psd(&effect).unwrap();
        let b = sqrt_effect(0.3, 1, Sign::Plus).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn sqrt_psd_rejects_indefinite() {
        let m = pauli(3).unwrap(); // eigenvalues ±1
        assert!(matches!(
            sqrt_psd(&m),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn jacobi_recovers_pauli_spectrum() {
        for idx in 1..=3 {
            let (vals, vecs) = hermitian_eigen(&pauli(idx).unwrap()).unwrap();
            assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-13);
            // Columns should be orthonormal.
            let gram = vecs.adjoint().matmul(&vecs).unwrap();
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        // A fixed 4×4 Hermitian test matrix with complex off-diagonals.
        let mut m = ComplexMatrix::zeros(4);
        let vals = [
            (0, 0, 1.5, 0.0),
            (1, 1, -0.25, 0.0),
            (2, 2, 0.75, 0.0),
            (3, 3, 2.0, 0.0),
            (0, 1, 0.3, 0.4),
            (0, 2, -0.2, 0.1),
            (1, 3, 0.6, -0.5),
            (2, 3, 0.05, 0.15),
        ];
        for &(r, col, re, im) in &vals {
            m.set(r, col, c(re, im));
            if r != col {
                m.set(col, r, c(re, -im));
            }
        }
        let (eigs, v) = hermitian_eigen(&m).unwrap();
        // V diag V† == m
        let mut rebuilt = ComplexMatrix::zeros(4);
        for r in 0..4 {
            for col in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    acc += v.at(r, k) * eigs[k] * v.at(col, k).conj();
                }
                rebuilt.set(r, col, acc);
            }
        }
        assert!(rebuilt.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn cholesky_certificate_detects_signs() {
        assert!(psd_certificate(&ComplexMatrix::identity(3), 0.0));
        let neg = ComplexMatrix::identity(2).scale_re(-1.0);
        assert!(!psd_certificate(&neg, 1e-10));
        // A shifted indefinite matrix passes once the shift covers the deficit.
        assert!(psd_certificate(&pauli(3).unwrap(), 1.0 + 1e-12));
    }

    #[test]
    fn conjugate_slot_matches_dense_kron() {
        // Random-ish fixed state on 3 qubits, op = σ_2 at slot 2.
        let rho = DensityMatrix::ghz(3).unwrap();
        let op = pauli(2).unwrap();
        let fast = conjugate_slot(rho.matrix(), &op, 2, 3);
        let dense = kron(
            &kron(&ComplexMatrix::identity(2), &op),
            &ComplexMatrix::identity(2),
        );
        let slow = dense
            .matmul(rho.matrix())
            .unwrap()
            .matmul(&dense.adjoint())
            .unwrap();
        assert!(fast.max_abs_diff(&slow) < 1e-13);
    }

    #[test]
    fn observable_validation() {
        assert!(Observable::pauli_multiple(0.5, 2).is_ok());
        assert!(Observable::pauli_multiple(-1.0, 2).is_ok());
        assert!(Observable::pauli_multiple(1.2, 1).is_err());
        // sinθσ_1 + cosθσ_3 has unit spectrum radius for every θ.
        let (s, co) = (libm::sin(0.7), libm::cos(0.7));
        let obs = Observable::pauli_combination(s, 0.0, co).unwrap();
        let (lo, hi) = obs.spectrum();
        assert_abs_diff_eq!(lo, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn observable_pauli_form_detection() {
        let o = Observable::pauli_multiple(-0.4, 2).unwrap();
        let (gamma, p) = o.as_pauli_multiple().unwrap();
        assert_abs_diff_eq!(gamma, -0.4, epsilon = 1e-15);
        assert_eq!(p, 2);
        let mixed = Observable::pauli_combination(0.5, 0.0, 0.5).unwrap();
        assert!(mixed.as_pauli_multiple().is_none());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::ghz(3).is_ok());
        // Trace ≠ 1 rejected.
        let bad = ComplexMatrix::identity(2);
        assert!(matches!(
            DensityMatrix::new(1, bad),
            Err(Error::TraceDeviation { .. })
        ));
        // Indefinite Hermitian with unit trace rejected.
        let m = ComplexMatrix::from_entries(
            2,
            vec![c(1.5, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-0.5, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            DensityMatrix::new(1, m),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn expectation_basics() {
        // |0⟩⟨0| against σ_3 → 1.
        let rho = DensityMatrix::from_pure(1, &[ONE, ZERO]).unwrap();
        assert_abs_diff_eq!(
            expectation(&rho, &pauli(3).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        // Maximally mixed against σ_1 → 0.
        let mixed = DensityMatrix::new(1, ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        assert_abs_diff_eq!(
            expectation(&mixed, &pauli(1).unwrap()).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn expectation_ghz_sigma_x_string() {
        let rho = DensityMatrix::ghz(3).unwrap();
        let s1 = pauli(1).unwrap();
        let op = kron(&kron(&s1, &s1), &s1);
        assert_abs_diff_eq!(expectation(&rho, &op).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn w_state_matches_known_correlators() {
        let rho = DensityMatrix::w(3).unwrap();
        let s3 = pauli(3).unwrap();
        let i2 = ComplexMatrix::identity(2);
        // ⟨σ_3 σ_3 σ_3⟩ = −1 for the W state.
        let zzz = kron(&kron(&s3, &s3), &s3);
        assert_abs_diff_eq!(expectation(&rho, &zzz).unwrap(), -1.0, epsilon = 1e-13);
        // Two-site ⟨σ_3 σ_3⟩ = −1/3.
        let zzi = kron(&kron(&s3, &s3), &i2);
        assert_abs_diff_eq!(
            expectation(&rho, &zzi).unwrap(),
            -1.0 / 3.0,
            epsilon = 1e-13
        );
        // Two-site ⟨σ_1 σ_1⟩ = 2/3.
        let s1 = pauli(1).unwrap();
        let xxi = kron(&kron(&s1, &s1), &i2);
        assert_abs_diff_eq!(
            expectation(&rho, &xxi).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-13
        );
    }
}
