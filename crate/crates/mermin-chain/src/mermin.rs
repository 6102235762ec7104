//! Mermin–Klyshko polynomials: the operator recursion, the closed-form
//! coefficient table, Mermin values, and the classical deterministic bound.
//!
//! The polynomials are defined by the recursion
//!
//! ```text
//! M_j  = ½ M_{j−1} ⊗ (M_0^{(j)} + M_1^{(j)}) + ½ M'_{j−1} ⊗ (M_0^{(j)} − M_1^{(j)}),
//! M'_j = ½ M_{j−1} ⊗ (M_1^{(j)} − M_0^{(j)}) + ½ M'_{j−1} ⊗ (M_0^{(j)} + M_1^{(j)}),
//! ```
//!
//! with base M_1 = M_0^{(1)}, M'_1 = M_1^{(1)}. Expanding the products gives
//! M_n = Σ_v c_v ⊗_i M_{v_i}^{(i)} over input bitstrings v ∈ {0,1}^n, and the
//! coefficients admit a closed form through the eigenvalues λ_{1,2} = e^{±iπ/4}
//! of the recursion's transfer matrix:
//!
//! ```text
//! c_v = ½ ( (λ_2/√2)^{n−1} λ_1^{2|v|} + (λ_1/√2)^{n−1} λ_2^{2|v|} ).
//! ```
//!
//! A state is certified multipartite-nonlocal when ⟨M_n⟩ > 1; deterministic
//! local strategies reach exactly 1 (checked here by enumeration).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

use crate::linalg::{
    kron, ComplexMatrix, DensityMatrix, Observable, C64, IMAG_TOL,
};
use crate::{Error, Result};

/// Largest supported party count for coefficient tables (2^n entries each).
pub const MAX_COEFFICIENT_PARTIES: usize = 20;

/// Tolerance on the imaginary residue of the complex coefficient closed form.
pub const COEFF_IMAG_TOL: f64 = 1e-12;

/// Coefficient table of the pair (M_n, M'_n): maps each input bitstring
/// v ∈ {0,1}^n, encoded as an n-bit integer with party 1 as the most
/// significant bit, to the real pair (c_v, c'_v).
#[derive(Debug, Clone, PartialEq)]
pub struct MerminCoefficients {
    n: usize,
    c: Vec<f64>,
    c_prime: Vec<f64>,
}

impl MerminCoefficients {
    /// Party count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// c_v for the bit-encoded assignment v.
    pub fn c(&self, v: usize) -> f64 {
        self.c[v]
    }

    /// c'_v for the bit-encoded assignment v.
    pub fn c_prime(&self, v: usize) -> f64 {
        self.c_prime[v]
    }

    /// All c_v in ascending v order.
    pub fn c_table(&self) -> &[f64] {
        &self.c
    }

    /// All c'_v in ascending v order.
    pub fn c_prime_table(&self) -> &[f64] {
        &self.c_prime
    }
}

/// One dichotomic observable pair (M_0^{(i)}, M_1^{(i)}) per party.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableAssignment {
    pairs: Vec<(Observable, Observable)>,
}

impl ObservableAssignment {
    /// Build from per-party pairs; needs at least one party.
    pub fn new(pairs: Vec<(Observable, Observable)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidArgument(
                "an assignment needs at least one party".into(),
            ));
        }
        Ok(ObservableAssignment { pairs })
    }

    /// Party count.
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// The pair (M_0^{(i)}, M_1^{(i)}) for 1-indexed party i.
    pub fn party(&self, i: usize) -> &(Observable, Observable) {
        &self.pairs[i - 1]
    }

    /// All pairs, party 1 first.
    pub fn pairs(&self) -> &[(Observable, Observable)] {
        &self.pairs
    }
}

/// Build the operator pair (M_n, M'_n) by the defining recursion.
///
/// Result dimension is 2^n; intended for n small enough that the dense
/// operator is convenient (the coefficient expansion in [`mermin_value`]
/// scales better and is preferred for evaluation).
pub fn mermin_recursion(assignment: &ObservableAssignment) -> (ComplexMatrix, ComplexMatrix) {
    let (m0, m1) = &assignment.pairs[0];
    let mut m = m0.matrix().clone();
    let mut m_prime = m1.matrix().clone();
    for (m0j, m1j) in &assignment.pairs[1..] {
        let sum = m0j
            .matrix()
            .add(m1j.matrix())
            .expect("observables are 2×2");
        let diff = m0j
            .matrix()
            .sub(m1j.matrix())
            .expect("observables are 2×2");
        let next = kron(&m, &sum)
            .add(&kron(&m_prime, &diff))
            .expect("dims agree by construction")
            .scale_re(0.5);
        let next_prime = kron(&m, &diff.scale_re(-1.0))
            .add(&kron(&m_prime, &sum))
            .expect("dims agree by construction")
            .scale_re(0.5);
        m = next;
        m_prime = next_prime;
    }
    (m, m_prime)
}

/// Coefficient tables for (M_n, M'_n) from the complex closed form.
///
/// Each value is computed in complex arithmetic and truncated to its real
/// part only after asserting the imaginary residue stays below
/// [`COEFF_IMAG_TOL`]; the cancellation is a free correctness check.
pub fn closed_form_coefficients(n: usize) -> Result<MerminCoefficients> {
    if n == 0 || n > MAX_COEFFICIENT_PARTIES {
        return Err(Error::InvalidArgument(format!(
            "party count must lie in 1..={MAX_COEFFICIENT_PARTIES}, got {n}"
        )));
    }
    let size = 1usize << n;
    let half = Complex::new(0.5, 0.0);
    let i = Complex::new(0.0, 1.0);
    let sqrt2 = libm::sqrt(2.0);
    let lambda1 = Complex::from_polar(1.0, core::f64::consts::FRAC_PI_4);
    let lambda2 = lambda1.conj();
    // (λ_2/√2)^{n−1} and (λ_1/√2)^{n−1}
    let base2 = (lambda2 / sqrt2).powu((n - 1) as u32);
    let base1 = (lambda1 / sqrt2).powu((n - 1) as u32);

    let mut c = vec![0.0f64; size];
    let mut c_prime = vec![0.0f64; size];
    // The value depends on v only through |v|; evaluate once per weight class.
    let mut by_weight = Vec::with_capacity(n + 1);
    for weight in 0..=n {
        let l1 = lambda1.powu(2 * weight as u32);
        let l2 = lambda2.powu(2 * weight as u32);
        let cv = half * (base2 * l1 + base1 * l2);
        // The primed component carries an extra λ_2² = −i phase on the first
        // branch (and its conjugate on the second), pairing it with c_v under
        // the per-party update rule.
        let cpv = half * (-i * base2 * l1 + i * base1 * l2);
        if cv.im.abs() > COEFF_IMAG_TOL || cpv.im.abs() > COEFF_IMAG_TOL {
            return Err(Error::ImaginaryResidual {
                residual: cv.im.abs().max(cpv.im.abs()),
            });
        }
        by_weight.push((cv.re, cpv.re));
    }
    for v in 0..size {
        let weight = (v as u32).count_ones() as usize;
        c[v] = by_weight[weight].0;
        c_prime[v] = by_weight[weight].1;
    }
    Ok(MerminCoefficients { n, c, c_prime })
}

/// Coefficient tables built by expanding the operator recursion symbolically
/// over the coefficient vectors (appending one party per step).
///
/// Independent of [`closed_form_coefficients`]; kept public as the oracle the
/// closed form is tested against.
pub fn recursion_coefficients(n: usize) -> Result<MerminCoefficients> {
    if n == 0 || n > MAX_COEFFICIENT_PARTIES {
        return Err(Error::InvalidArgument(format!(
            "party count must lie in 1..={MAX_COEFFICIENT_PARTIES}, got {n}"
        )));
    }
    let mut c = vec![1.0, 0.0];
    let mut c_prime = vec![0.0, 1.0];
    for _ in 2..=n {
        let size = c.len();
        let mut nc = vec![0.0; 2 * size];
        let mut ncp = vec![0.0; 2 * size];
        for v in 0..size {
            // Appending party j as the new least significant bit: the ⊗(M_0±M_1)
            // products distribute c_v and c'_v onto (v,0) and (v,1).
            nc[2 * v] = 0.5 * (c[v] + c_prime[v]);
            nc[2 * v + 1] = 0.5 * (c[v] - c_prime[v]);
            ncp[2 * v] = 0.5 * (-c[v] + c_prime[v]);
            ncp[2 * v + 1] = 0.5 * (c[v] + c_prime[v]);
        }
        c = nc;
        c_prime = ncp;
    }
    Ok(MerminCoefficients { n, c, c_prime })
}

/// All 2^n setting expectations Tr[ρ · ⊗_i M_{v_i}^{(i)}], indexed by v.
///
/// Computed by peeling one party at a time: contracting the most significant
/// qubit of ρ against M_x^{(1)} leaves a half-sized matrix whose remaining
/// trace is the rest of the product. The full depth-first sweep costs O(4^n)
/// arithmetic for all 2^n values together, versus O(8^n) for independent
/// dense traces.
pub fn setting_expectations(
    rho: &DensityMatrix,
    assignment: &ObservableAssignment,
) -> Result<Vec<C64>> {
    if rho.n_parties() != assignment.n() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 1usize << assignment.n(),
        });
    }
    let mut values = Vec::with_capacity(1usize << assignment.n());
    peel(rho.matrix(), assignment.pairs(), &mut values);
    Ok(values)
}

/// Contract the most significant qubit of `mat` against the 2×2 `obs`:
/// out[r][c] = Σ_{a,b} obs[b][a] · mat[a·h + r][b·h + c], h = dim/2.
fn reduce_msb(mat: &ComplexMatrix, obs: &ComplexMatrix) -> ComplexMatrix {
    let d = mat.dim();
    let h = d / 2;
    let mut out = ComplexMatrix::zeros(h);
    for a in 0..2 {
        for b in 0..2 {
            let w = obs.at(b, a);
            if w == Complex::new(0.0, 0.0) {
                continue;
            }
            for r in 0..h {
                for c_col in 0..h {
                    let v = out.at(r, c_col) + w * mat.at(a * h + r, b * h + c_col);
                    out.set(r, c_col, v);
                }
            }
        }
    }
    out
}

fn peel(mat: &ComplexMatrix, parties: &[(Observable, Observable)], out: &mut Vec<C64>) {
    match parties {
        [] => out.push(mat.at(0, 0)),
        [(m0, m1), rest @ ..] => {
            let r0 = reduce_msb(mat, m0.matrix());
            peel(&r0, rest, out);
            let r1 = reduce_msb(mat, m1.matrix());
            peel(&r1, rest, out);
        }
    }
}

/// The Mermin value I_n = ⟨M_n⟩ = Σ_v c_v Tr[ρ · ⊗_i M_{v_i}^{(i)}].
///
/// Evaluated through the coefficient expansion; agrees with
/// `expectation(ρ, mermin_recursion(assignment).0)` within 1e−10 (a tested
/// invariant). Each contributing setting expectation must be real within
/// [`IMAG_TOL`]; terms with |c_v| < 1e−14 are skipped.
pub fn mermin_value(rho: &DensityMatrix, assignment: &ObservableAssignment) -> Result<f64> {
    let coefficients = closed_form_coefficients(assignment.n())?;
    let expectations = setting_expectations(rho, assignment)?;
    let mut total = 0.0;
    for (v, value) in expectations.iter().enumerate() {
        let cv = coefficients.c(v);
        if cv.abs() < 1e-14 {
            continue;
        }
        if value.im.abs() > IMAG_TOL {
            return Err(Error::ImaginaryResidual { residual: value.im });
        }
        total += cv * value.re;
    }
    Ok(total)
}

/// Maximum of Σ_v c_v ∏_i a_i(v_i) over all deterministic local strategies
/// a_i(x_i) ∈ {±1}, by full enumeration of the 4^n sign tables.
///
/// This is the fully-local bound of the Mermin inequality; it equals 1 for
/// every n (a tested invariant for n = 2..6).
pub fn classical_deterministic_max(n: usize) -> Result<f64> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "enumeration is 4^n; supported range is 2..=6, got {n}"
        )));
    }
    let coefficients = closed_form_coefficients(n)?;
    let size = 1usize << n;
    let mut best = f64::NEG_INFINITY;
    // Strategy encoding: two bits per party; bit 2i is a_i(0), bit 2i+1 is a_i(1).
    for strategy in 0u64..(1u64 << (2 * n)) {
        let mut value = 0.0;
        for v in 0..size {
            let cv = coefficients.c(v);
            if cv.abs() < 1e-14 {
                continue;
            }
            let mut product = cv;
            for party in 0..n {
                // Party `party` is the (n−1−party)-th bit of v from the LSB.
                let input = (v >> (n - 1 - party)) & 1;
                let sign_bit = (strategy >> (2 * party + input)) & 1;
                if sign_bit == 1 {
                    product = -product;
                }
            }
            value += product;
        }
        best = best.max(value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expectation, pauli};
    use approx::assert_abs_diff_eq;

    fn xy_assignment(n: usize) -> ObservableAssignment {
        let pairs = (0..n)
            .map(|_| {
                (
                    Observable::pauli_multiple(1.0, 1).unwrap(),
                    Observable::pauli_multiple(1.0, 2).unwrap(),
                )
            })
            .collect();
        ObservableAssignment::new(pairs).unwrap()
    }

    #[test]
    fn closed_form_base_case() {
        let t = closed_form_coefficients(1).unwrap();
        assert_abs_diff_eq!(t.c(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.c(1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.c_prime(0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.c_prime(1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_two_parties() {
        let t = closed_form_coefficients(2).unwrap();
        for v in [0b00, 0b01, 0b10] {
            assert_abs_diff_eq!(t.c(v), 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(t.c(0b11), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_three_parties_ground_truth() {
        let t = closed_form_coefficients(3).unwrap();
        for v in [0b100, 0b010, 0b001] {
            assert_abs_diff_eq!(t.c(v), 0.5, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(t.c(0b111), -0.5, epsilon = 1e-13);
        for v in [0b000, 0b110, 0b101, 0b011] {
            assert_abs_diff_eq!(t.c(v), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn closed_form_matches_recursion_up_to_eight() {
        for n in 1..=8 {
            let closed = closed_form_coefficients(n).unwrap();
            let recursive = recursion_coefficients(n).unwrap();
            for v in 0..(1usize << n) {
                assert_abs_diff_eq!(closed.c(v), recursive.c(v), epsilon = 1e-12);
                assert_abs_diff_eq!(closed.c_prime(v), recursive.c_prime(v), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn coefficients_depend_only_on_weight() {
        let t = closed_form_coefficients(6).unwrap();
        for v in 0..(1usize << 6) {
            let class = (v as u32).count_ones() as usize;
            let rep = (1usize << class) - 1; // lowest index of that weight
            assert_abs_diff_eq!(t.c(v), t.c(rep), epsilon = 1e-15);
            assert_abs_diff_eq!(t.c_prime(v), t.c_prime(rep), epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range_party_counts() {
        assert!(closed_form_coefficients(0).is_err());
        assert!(closed_form_coefficients(21).is_err());
        assert!(closed_form_coefficients(20).is_ok());
    }

    #[test]
    fn recursion_n1_returns_inputs() {
        let assignment = xy_assignment(1);
        let (m, mp) = mermin_recursion(&assignment);
        assert!(m.max_abs_diff(&pauli(1).unwrap()) < 1e-15);
        assert!(mp.max_abs_diff(&pauli(2).unwrap()) < 1e-15);
    }

    #[test]
    fn recursion_n2_matches_hand_expansion() {
        let assignment = xy_assignment(2);
        let (m, _) = mermin_recursion(&assignment);
        let s1 = pauli(1).unwrap();
        let s2 = pauli(2).unwrap();
        // ½(σ_1σ_1 + σ_1σ_2 + σ_2σ_1 − σ_2σ_2)
        let expected = kron(&s1, &s1)
            .add(&kron(&s1, &s2))
            .unwrap()
            .add(&kron(&s2, &s1))
            .unwrap()
            .sub(&kron(&s2, &s2))
            .unwrap()
            .scale_re(0.5);
        assert!(m.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn setting_expectations_match_dense_traces() {
        let rho = DensityMatrix::ghz(3).unwrap();
        let assignment = xy_assignment(3);
        let fast = setting_expectations(&rho, &assignment).unwrap();
        for v in 0..8usize {
            let mut op = ComplexMatrix::identity(1);
            for party in 0..3 {
                let bit = (v >> (2 - party)) & 1;
                let pair = assignment.party(party + 1);
                let obs = if bit == 0 { &pair.0 } else { &pair.1 };
                op = kron(&op, obs.matrix());
            }
            let slow = rho
                .matrix()
                .matmul(&op)
                .unwrap()
                .trace();
            assert!((fast[v] - slow).norm() < 1e-13, "v = {v:03b}");
        }
    }

    #[test]
    fn mermin_value_vanishes_for_maximally_mixed() {
        let mixed = DensityMatrix::new(
            2,
            ComplexMatrix::identity(4).scale_re(0.25),
        )
        .unwrap();
        let value = mermin_value(&mixed, &xy_assignment(2)).unwrap();
        assert_abs_diff_eq!(value, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn plain_xy_assignment_vanishes_on_ghz3() {
        // Every nonzero-coefficient string carries an odd number of σ_2
        // factors, whose GHZ cross terms are imaginary — this vanishing is
        // what motivates the per-n observable variants in `strategy`.
        let rho = DensityMatrix::ghz(3).unwrap();
        let value = mermin_value(&rho, &xy_assignment(3)).unwrap();
        assert_abs_diff_eq!(value, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn swapped_assignment_reaches_two_on_ghz3() {
        // Parties 1 and 3 keep (σ_1, σ_2); party 2 takes (−σ_2, σ_1).
        let pairs = vec![
            (
                Observable::pauli_multiple(1.0, 1).unwrap(),
                Observable::pauli_multiple(1.0, 2).unwrap(),
            ),
            (
                Observable::pauli_multiple(-1.0, 2).unwrap(),
                Observable::pauli_multiple(1.0, 1).unwrap(),
            ),
            (
                Observable::pauli_multiple(1.0, 1).unwrap(),
                Observable::pauli_multiple(1.0, 2).unwrap(),
            ),
        ];
        let assignment = ObservableAssignment::new(pairs).unwrap();
        let rho = DensityMatrix::ghz(3).unwrap();
        let value = mermin_value(&rho, &assignment).unwrap();
        assert_abs_diff_eq!(value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn mermin_value_agrees_with_operator_recursion() {
        let rho = DensityMatrix::w(3).unwrap();
        let pairs = vec![
            (
                Observable::pauli_combination(0.6, 0.0, 0.8).unwrap(),
                Observable::pauli_combination(0.6, 0.0, -0.8).unwrap(),
            ),
            (
                Observable::pauli_combination(0.0, 0.28, 0.96).unwrap(),
                Observable::pauli_multiple(0.5, 1).unwrap(),
            ),
            (
                Observable::pauli_multiple(1.0, 3).unwrap(),
                Observable::pauli_multiple(0.7, 1).unwrap(),
            ),
        ];
        let assignment = ObservableAssignment::new(pairs).unwrap();
        let via_coefficients = mermin_value(&rho, &assignment).unwrap();
        let (m, _) = mermin_recursion(&assignment);
        let via_operator = expectation(&rho, &m.symmetrize()).unwrap();
        assert_abs_diff_eq!(via_coefficients, via_operator, epsilon = 1e-10);
    }

    #[test]
    fn classical_bound_small_cases() {
        assert_abs_diff_eq!(classical_deterministic_max(2).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(classical_deterministic_max(3).unwrap(), 1.0, epsilon = 1e-12);
        assert!(classical_deterministic_max(1).is_err());
        assert!(classical_deterministic_max(7).is_err());
    }
}
