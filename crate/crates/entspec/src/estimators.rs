//! Classical post-processing: parity evaluation over paired qubits, Rényi
//! estimates with their statistical errors, and eigenvalue reconstruction
//! from integer power sums via the Newton-Girard recursion.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::roots::durand_kerner;
use crate::statevector::StateVector;

/// A batch of measured bitstrings with post-selection flags and the
/// post-processing metadata inherited from the circuit that produced them.
#[derive(Clone, Debug)]
pub struct ShotSet {
    pub bits: Vec<Bits>,
    pub accepted: Vec<bool>,
    pub pairing: Vec<(usize, usize)>,
    pub ancilla: Option<usize>,
    pub renyi_order: usize,
    /// When false, estimates average over all shots and the accept flags are
    /// only reported.
    pub postselect: bool,
}

impl ShotSet {
    pub fn for_circuit(circuit: &Circuit, postselect: bool) -> Self {
        ShotSet {
            bits: Vec::new(),
            accepted: Vec::new(),
            pairing: circuit.pairing.clone(),
            ancilla: circuit.ancilla,
            renyi_order: circuit.renyi_order,
            postselect,
        }
    }

    pub fn push(&mut self, bits: Bits, accepted: bool) {
        self.bits.push(bits);
        self.accepted.push(accepted);
    }

    pub fn total(&self) -> usize {
        self.bits.len()
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted.iter().filter(|&&a| a).count()
    }

    pub fn accepted_fraction(&self) -> f64 {
        if self.bits.is_empty() {
            return 0.0;
        }
        self.accepted_count() as f64 / self.total() as f64
    }

    fn used_shots(&self) -> impl Iterator<Item = &Bits> {
        self.bits
            .iter()
            .zip(self.accepted.iter())
            .filter(move |(_, &a)| a || !self.postselect)
            .map(|(b, _)| b)
    }

    fn used_count(&self) -> usize {
        if self.postselect {
            self.accepted_count()
        } else {
            self.total()
        }
    }
}

/// A single Rényi-order estimate. `sigma` is the statistical standard
/// deviation formula for the estimator; `s_n` is the entropy
/// `ln(r_n) / (1 - n)` when `r_n` is positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenyiEstimate {
    pub n: usize,
    pub r_n: f64,
    pub sigma: f64,
    pub s_n: Option<f64>,
    /// Shots entering the average (accepted shots under post-selection).
    pub shots: usize,
    pub accepted_fraction: f64,
    /// Set when a negative sampled mean was clamped to zero before the
    /// square root.
    pub clamped: bool,
    /// Raw per-shot mean prior to any square root, for diagnostics.
    pub raw_mean: f64,
}

/// Parity sign `(-1)^(sum over pairs of bit_control * bit_target)`.
pub fn parity_sign(bits: &Bits, pairing: &[(usize, usize)]) -> Result<i32> {
    let mut acc = 0u8;
    for &(c, t) in pairing {
        acc ^= bits.checked_bit(c)? & bits.checked_bit(t)?;
    }
    Ok(1 - 2 * i32::from(acc))
}

fn entropy_of(r_n: f64, n: usize) -> Option<f64> {
    (r_n > 0.0 && n >= 2).then(|| r_n.ln() / (1.0 - n as f64))
}

/// Estimate from the overlap-test circuit: the mean pair parity estimates
/// the square of Tr(rho_A^n); negative means are clamped to zero before the
/// square root and flagged. The reported precision on `r_n` is
/// `sqrt(1 - r_n^2) / (2 sqrt(M))`, valid when `M >> 1 / r_n^2`.
pub fn estimate_two_copy(shots: &ShotSet) -> Result<RenyiEstimate> {
    let m = shots.used_count();
    if m == 0 {
        return Err(Error::NoAcceptedShots);
    }
    let mut sum = 0i64;
    for b in shots.used_shots() {
        sum += i64::from(parity_sign(b, &shots.pairing)?);
    }
    let raw_mean = sum as f64 / m as f64;
    let clamped = raw_mean < 0.0;
    let r_n = raw_mean.clamp(0.0, 1.0).sqrt();
    let sigma = (1.0 - r_n * r_n).max(0.0).sqrt() / (2.0 * (m as f64).sqrt());
    Ok(RenyiEstimate {
        n: shots.renyi_order,
        r_n,
        sigma,
        s_n: entropy_of(r_n, shots.renyi_order),
        shots: m,
        accepted_fraction: shots.accepted_fraction(),
        clamped,
        raw_mean,
    })
}

/// Estimate from the ancilla-test circuit: the mean ancilla Z value (+1 for
/// outcome 0) estimates Tr(rho_A^n) with precision
/// `sqrt(r_n (1 - r_n) / M)`.
pub fn estimate_jst(shots: &ShotSet) -> Result<RenyiEstimate> {
    let ancilla = shots.ancilla.ok_or_else(|| {
        Error::InvalidConfig("ancilla-test estimate requires an ancilla index".into())
    })?;
    let m = shots.used_count();
    if m == 0 {
        return Err(Error::NoAcceptedShots);
    }
    let mut sum = 0i64;
    for b in shots.used_shots() {
        sum += if b.checked_bit(ancilla)? == 0 { 1 } else { -1 };
    }
    let r_n = sum as f64 / m as f64;
    let sigma = (r_n.clamp(0.0, 1.0) * (1.0 - r_n.clamp(0.0, 1.0))).sqrt() / (m as f64).sqrt();
    Ok(RenyiEstimate {
        n: shots.renyi_order,
        r_n,
        sigma,
        s_n: entropy_of(r_n, shots.renyi_order),
        shots: m,
        accepted_fraction: shots.accepted_fraction(),
        clamped: false,
        raw_mean: r_n,
    })
}

/// Estimate from the Bell-basis purity circuit: the mean parity over the
/// subsystem-A pairs estimates Tr(rho_A^2) directly (no square root).
pub fn estimate_bell_purity(shots: &ShotSet) -> Result<RenyiEstimate> {
    let m = shots.used_count();
    if m == 0 {
        return Err(Error::NoAcceptedShots);
    }
    let mut sum = 0i64;
    for b in shots.used_shots() {
        sum += i64::from(parity_sign(b, &shots.pairing)?);
    }
    let r_n = sum as f64 / m as f64;
    let sigma = (r_n.clamp(0.0, 1.0) * (1.0 - r_n.clamp(0.0, 1.0))).sqrt() / (m as f64).sqrt();
    Ok(RenyiEstimate {
        n: 2,
        r_n,
        sigma,
        s_n: entropy_of(r_n, 2),
        shots: m,
        accepted_fraction: shots.accepted_fraction(),
        clamped: false,
        raw_mean: r_n,
    })
}

/// Exact expectation of the pair parity over a final state: the dot product
/// of the +-1 coefficient vector with the outcome distribution, evaluated in
/// one pass over the raw amplitudes.
pub fn exact_pair_parity(state: &StateVector, pairing: &[(usize, usize)]) -> Result<f64> {
    // Group pairs by the distance between their physical bit positions so
    // each group contributes one shift-and-popcount per amplitude.
    let mut groups: Vec<(u32, u64)> = Vec::new();
    for &(c, t) in pairing {
        if c >= state.num_qubits() || t >= state.num_qubits() {
            return Err(Error::QubitOutOfRange {
                index: c.max(t),
                num_qubits: state.num_qubits(),
            });
        }
        let sc = state.bit_shift(c) as u32;
        let st = state.bit_shift(t) as u32;
        let (lo, hi) = if sc < st { (sc, st) } else { (st, sc) };
        let delta = hi - lo;
        let mask = 1u64 << lo;
        match groups.iter_mut().find(|(d, _)| *d == delta) {
            Some((_, m)) => *m |= mask,
            None => groups.push((delta, mask)),
        }
    }
    let mut value = 0.0f64;
    for (i, a) in state.raw_amps().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let i = i as u64;
        let mut ones = 0u32;
        for &(delta, mask) in &groups {
            ones += ((i >> delta) & i & mask).count_ones();
        }
        value += if ones & 1 == 0 { p } else { -p };
    }
    Ok(value)
}

/// Exact ancilla Z expectation over a final state.
pub fn exact_ancilla_z(state: &StateVector, ancilla: usize) -> Result<f64> {
    if ancilla >= state.num_qubits() {
        return Err(Error::QubitOutOfRange {
            index: ancilla,
            num_qubits: state.num_qubits(),
        });
    }
    let mask = 1u64 << state.bit_shift(ancilla);
    let mut value = 0.0f64;
    for (i, a) in state.raw_amps().iter().enumerate() {
        let p = a.norm_sqr();
        value += if (i as u64) & mask == 0 { p } else { -p };
    }
    Ok(value)
}

/// Elementary symmetric polynomials `e_0..=e_m` from power sums `R_1..=R_m`
/// via `e_j = (1/j) * sum_{i=1..j} (-1)^(i-1) e_{j-i} R_i`.
pub fn newton_girard_coeffs(power_sums: &[f64]) -> Result<Vec<f64>> {
    if power_sums.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = power_sums.len();
    let mut e = vec![0.0f64; m + 1];
    e[0] = 1.0;
    for j in 1..=m {
        let mut acc = 0.0;
        for i in 1..=j {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[j - i] * power_sums[i - 1];
        }
        e[j] = acc / j as f64;
    }
    Ok(e)
}

/// Reconstructed leading eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Retained eigenvalue estimates, descending.
    pub eigenvalues: Vec<f64>,
    pub n_max: usize,
    /// Roots discarded for a large imaginary part or for lying outside
    /// [-0.05, 1.05]; truncation error can push roots off the real axis.
    pub discarded: usize,
}

const IMAG_TOL: f64 = 1e-6;
const REAL_RANGE: (f64, f64) = (-0.05, 1.05);

/// Roots of the degree-`n_max` characteristic polynomial built from the
/// truncated Newton-Girard coefficients: approximations to the `n_max`
/// largest eigenvalues.
pub fn spectrum_from_renyi(power_sums: &[f64], n_max: usize) -> Result<Spectrum> {
    if n_max < 1 {
        return Err(Error::EmptyInput);
    }
    if power_sums.len() < n_max {
        return Err(Error::DimensionMismatch {
            expected: n_max,
            got: power_sums.len(),
        });
    }
    let e = newton_girard_coeffs(&power_sums[..n_max])?;
    // p(x) = sum_m (-1)^(n_max - m) e_{n_max - m} x^m, monic by e_0 = 1.
    let mut coeffs = vec![0.0f64; n_max + 1];
    for (m, c) in coeffs.iter_mut().enumerate() {
        let sign = if (n_max - m) % 2 == 0 { 1.0 } else { -1.0 };
        *c = sign * e[n_max - m];
    }
    let roots = durand_kerner(&coeffs)?;
    let mut eigenvalues: Vec<f64> = roots
        .iter()
        .filter(|r| r.im.abs() < IMAG_TOL && r.re >= REAL_RANGE.0 && r.re <= REAL_RANGE.1)
        .map(|r| r.re)
        .collect();
    let discarded = roots.len() - eigenvalues.len();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(Spectrum {
        eigenvalues,
        n_max,
        discarded,
    })
}

/// Rényi entropy `ln(r_n) / (1 - n)` for integer order n >= 2.
pub fn renyi_entropy(r_n: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain {
            what: "renyi order",
            value: n as f64,
        });
    }
    if r_n <= 0.0 {
        return Err(Error::Domain {
            what: "renyi power sum",
            value: r_n,
        });
    }
    Ok(r_n.ln() / (1.0 - n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_two_copy_circuit;

    fn shot_set(pairs: &[(usize, usize)], order: usize) -> ShotSet {
        ShotSet {
            bits: Vec::new(),
            accepted: Vec::new(),
            pairing: pairs.to_vec(),
            ancilla: None,
            renyi_order: order,
            postselect: false,
        }
    }

    #[test]
    fn parity_sign_examples() {
        let pairing = [(0usize, 6usize), (1, 5), (2, 4), (3, 7)];
        let zeros = Bits::zeros(8);
        assert_eq!(parity_sign(&zeros, &pairing).unwrap(), 1);

        // Only the pair (0, 6) has both bits set.
        let b: Bits = "10000010".parse().unwrap();
        assert_eq!(parity_sign(&b, &pairing).unwrap(), -1);

        // Two fully set pairs cancel.
        let b: Bits = "11000110".parse().unwrap();
        assert_eq!(parity_sign(&b, &pairing).unwrap(), 1);

        assert!(parity_sign(&zeros, &[(0, 8)]).is_err());
    }

    #[test]
    fn parity_matches_tensor_coefficient_vector() {
        // With pairs on adjacent qubits, the parity reproduces the
        // coefficient vector {1,1,1,-1}^(x4) indexed by the outcome.
        let pairing = [(0usize, 1usize), (2, 3), (4, 5), (6, 7)];
        let mut c = vec![1.0f64];
        for _ in 0..4 {
            let mut next = Vec::with_capacity(c.len() * 4);
            for &v in &c {
                next.extend_from_slice(&[v, v, v, -v]);
            }
            c = next;
        }
        for idx in 0..256u64 {
            let bits = Bits::from_index(idx, 8);
            let sign = parity_sign(&bits, &pairing).unwrap();
            assert_eq!(sign as f64, c[idx as usize], "index {idx}");
        }
    }

    #[test]
    fn parity_matches_explicit_exponent_form() {
        // (-1)^(j1 j7 + j2 j6 + j3 j5 + j4 j8) with 1-indexed bit labels.
        let pairing = [(0usize, 6usize), (1, 5), (2, 4), (3, 7)];
        for idx in 0..256u64 {
            let bits = Bits::from_index(idx, 8);
            let j = |q: usize| bits.bit(q - 1) as u32;
            let exponent = j(1) * j(7) + j(2) * j(6) + j(3) * j(5) + j(4) * j(8);
            let expected = if exponent % 2 == 0 { 1 } else { -1 };
            assert_eq!(parity_sign(&bits, &pairing).unwrap(), expected);
        }
    }

    #[test]
    fn two_copy_estimate_from_unanimous_shots() {
        let mut shots = shot_set(&[(0, 1)], 2);
        for _ in 0..100 {
            shots.push(Bits::zeros(2), true);
        }
        let est = estimate_two_copy(&shots).unwrap();
        assert_eq!(est.r_n, 1.0);
        assert_eq!(est.s_n, Some(0.0));
        assert_eq!(est.shots, 100);
        assert!(!est.clamped);
    }

    #[test]
    fn two_copy_estimate_clamps_negative_means() {
        let mut shots = shot_set(&[(0, 1)], 2);
        for _ in 0..3 {
            shots.push("11".parse().unwrap(), true);
        }
        shots.push(Bits::zeros(2), true);
        let est = estimate_two_copy(&shots).unwrap();
        assert!(est.clamped);
        assert_eq!(est.r_n, 0.0);
        assert!(est.s_n.is_none());
        assert_eq!(est.raw_mean, -0.5);
    }

    #[test]
    fn empty_shot_sets_are_an_error() {
        let shots = shot_set(&[(0, 1)], 2);
        assert!(matches!(
            estimate_two_copy(&shots),
            Err(Error::NoAcceptedShots)
        ));
    }

    #[test]
    fn postselection_changes_only_the_shot_pool() {
        let mut shots = shot_set(&[(0, 1)], 2);
        shots.postselect = true;
        shots.push(Bits::zeros(2), true);
        shots.push("11".parse().unwrap(), false);
        shots.push(Bits::zeros(2), true);
        let est = estimate_two_copy(&shots).unwrap();
        assert_eq!(est.shots, 2);
        assert_eq!(est.r_n, 1.0);
        assert!((est.accepted_fraction - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn jst_estimate_examples() {
        let mut shots = shot_set(&[], 3);
        shots.ancilla = Some(0);
        for _ in 0..50 {
            shots.push(Bits::zeros(3), true);
        }
        let est = estimate_jst(&shots).unwrap();
        assert_eq!(est.r_n, 1.0);
        assert_eq!(est.s_n, Some(0.0));

        // r = 0.5 with M = 10^4 gives sigma = 0.005.
        let mut shots = shot_set(&[], 2);
        shots.ancilla = Some(0);
        for i in 0..10_000u64 {
            let bits = if i % 4 == 0 {
                Bits::from_index(0b100, 3)
            } else {
                Bits::zeros(3)
            };
            shots.push(bits, true);
        }
        let est = estimate_jst(&shots).unwrap();
        assert!((est.r_n - 0.5).abs() < 1e-12);
        assert!((est.sigma - 0.005).abs() < 1e-12);
    }

    #[test]
    fn exact_parity_agrees_with_distribution_dot_product() {
        let id = crate::gate::Mat2::identity();
        let prep = crate::circuits::prepare_state_gates(0.8, &id, &id).unwrap();
        let circuit = build_two_copy_circuit(2, 1, 1, &prep).unwrap();
        let state = crate::oracle::final_state(&circuit, None).unwrap();

        let streamed = exact_pair_parity(&state, &circuit.pairing).unwrap();

        let probs = state.probabilities();
        let mut dot = 0.0;
        for (idx, p) in probs.iter().enumerate() {
            let bits = Bits::from_index(idx as u64, circuit.num_qubits());
            dot += *p * parity_sign(&bits, &circuit.pairing).unwrap() as f64;
        }
        assert!((streamed - dot).abs() < 1e-12);
    }

    #[test]
    fn newton_girard_examples() {
        assert_eq!(newton_girard_coeffs(&[1.0]).unwrap(), vec![1.0, 1.0]);

        // Pure state: e2 = (1*1 - 1)/2 = 0.
        let e = newton_girard_coeffs(&[1.0, 1.0]).unwrap();
        assert!((e[2] - 0.0).abs() < 1e-15);

        // Maximally mixed qubit: e2 = (1 - 0.5)/2 = 0.25.
        let e = newton_girard_coeffs(&[1.0, 0.5]).unwrap();
        assert!((e[2] - 0.25).abs() < 1e-15);

        assert!(newton_girard_coeffs(&[]).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum_from_renyi(&[1.0, 1.0], 2).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-8);
        assert!(s.eigenvalues[1].abs() < 1e-8);

        let s = spectrum_from_renyi(&[1.0, 0.5], 2).unwrap();
        assert!((s.eigenvalues[0] - 0.5).abs() < 1e-5);
        assert!((s.eigenvalues[1] - 0.5).abs() < 1e-5);

        assert!(spectrum_from_renyi(&[1.0], 2).is_err());
    }

    #[test]
    fn renyi_entropy_examples() {
        for n in 2..=4 {
            assert_eq!(renyi_entropy(1.0, n).unwrap(), 0.0);
        }
        assert!((renyi_entropy(0.5, 2).unwrap() - 2.0f64.ln()).abs() < 1e-15);
        // Maximally mixed single qubit at any order.
        for n in 2..=5usize {
            let r = 2.0f64.powi(1 - n as i32);
            assert!((renyi_entropy(r, n).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        }
        assert!(renyi_entropy(0.0, 2).is_err());
        assert!(renyi_entropy(-0.3, 2).is_err());
        assert!(renyi_entropy(0.5, 1).is_err());
    }

    #[test]
    fn power_sum_monotonicity_on_exact_values() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let prep = crate::circuits::random_prep_circuit(2, 2, 2, &mut rng).unwrap();
            let rho = crate::oracle::reduced_state(&prep, 2, 2).unwrap();
            let mut prev = 1.0;
            for n in 2..=6 {
                let r = rho.power_trace(n).unwrap();
                assert!(r <= prev + 1e-12, "power sums must be non-increasing");
                prev = r;
            }
        }
    }
}
