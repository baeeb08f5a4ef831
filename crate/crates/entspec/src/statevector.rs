use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::gate::{Gate, Mat2};

/// Soft cap on system size; 2^26 amplitudes is ~1 GiB and past the point
/// where a dense simulation is reasonable on a desk machine.
pub const MAX_QUBITS: usize = 26;

/// Dense statevector over `num_qubits` qubits with a logical-to-physical
/// qubit relabeling layer.
///
/// Amplitudes are stored for *physical* basis indices. Each logical qubit `q`
/// is assigned a physical slot by `order`; slot 0 is the most significant bit
/// of the physical index. With the identity order, logical qubit 0 is the
/// most significant bit of the amplitude index, so the amplitude of |01⟩ on
/// two qubits sits at index 1.
///
/// Relabeling qubits (`relabel`) only rewrites `order` and never moves
/// amplitude data, so a layer of swap gates that merely reorders qubits costs
/// nothing and adds no circuit depth. All gate application and measurement
/// goes through the relabeling layer transparently.
#[derive(Clone, Debug)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
    order: Vec<usize>,
}

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

impl StateVector {
    /// |0...0⟩ on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            num_qubits,
            amps,
            order: (0..num_qubits).collect(),
        })
    }

    /// Computational basis state given by `bits`; bit `q` is the value of
    /// logical qubit `q`.
    pub fn basis_state(num_qubits: usize, bits: &Bits) -> Result<Self> {
        if bits.len() != num_qubits {
            return Err(Error::LengthMismatch {
                expected: num_qubits,
                got: bits.len(),
            });
        }
        let mut state = Self::zero_state(num_qubits)?;
        state.amps[0] = Complex64::new(0.0, 0.0);
        state.amps[bits.index() as usize] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Builds a state from a raw amplitude vector (length must be a power of
    /// two, norm must be 1 within 1e-10). Qubit order is the identity.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: n.next_power_of_two().max(2),
                got: n,
            });
        }
        let num_qubits = n.trailing_zeros() as usize;
        check_qubit_count(num_qubits)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain {
                what: "state norm",
                value: norm,
            });
        }
        Ok(StateVector {
            num_qubits,
            amps,
            order: (0..num_qubits).collect(),
        })
    }

    /// Tensor product of `factors` in slot order (first factor occupies the
    /// most significant slots). All factors must carry the identity order.
    pub fn product_state(factors: &[&StateVector]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyInput);
        }
        let num_qubits: usize = factors.iter().map(|f| f.num_qubits).sum();
        check_qubit_count(num_qubits)?;
        for f in factors {
            if !f.order_is_identity() {
                return Err(Error::InvalidConfig(
                    "product_state factors must have identity qubit order".into(),
                ));
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        let mut len = 1usize;
        for f in factors {
            kron_in_place(&mut amps, &mut len, &f.amps);
        }
        debug_assert_eq!(len, 1 << num_qubits);
        Ok(StateVector {
            num_qubits,
            amps,
            order: (0..num_qubits).collect(),
        })
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Physical bit position (from the least significant bit of the raw
    /// amplitude index) that logical qubit `q` currently occupies.
    #[inline]
    pub fn bit_shift(&self, q: usize) -> usize {
        self.num_qubits - 1 - self.order[q]
    }

    pub(crate) fn raw_amps(&self) -> &[Complex64] {
        &self.amps
    }

    fn order_is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(q, &s)| q == s)
    }

    /// Replaces the logical-to-slot assignment wholesale. `order[q]` is the
    /// physical slot of logical qubit `q`.
    pub fn set_qubit_order(&mut self, order: Vec<usize>) -> Result<()> {
        validate_permutation(&order, self.num_qubits)?;
        self.order = order;
        Ok(())
    }

    /// Amplitude of the logical basis state `index`.
    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[self.physical_index(index)]
    }

    /// Resets to |0...0> with the identity qubit order, reusing the buffer.
    pub(crate) fn reset_to_zero(&mut self) {
        self.amps.fill(Complex64::new(0.0, 0.0));
        self.amps[0] = Complex64::new(1.0, 0.0);
        for (q, s) in self.order.iter_mut().enumerate() {
            *s = q;
        }
    }

    /// Rebuilds this state in place as the tensor product of `factors`
    /// (first factor in the most significant slots) under the given
    /// logical-to-slot assignment. Factor qubit counts must sum to
    /// `num_qubits`; factors must carry the identity order.
    pub(crate) fn refill_from_factors(
        &mut self,
        factors: &[&StateVector],
        order: &[usize],
    ) -> Result<()> {
        let total: usize = factors.iter().map(|f| f.num_qubits).sum();
        if total != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: total,
            });
        }
        debug_assert!(factors.iter().all(|f| f.order_is_identity()));
        self.amps[0] = Complex64::new(1.0, 0.0);
        let mut len = 1usize;
        for f in factors {
            kron_in_place(&mut self.amps, &mut len, &f.amps);
        }
        debug_assert_eq!(len, self.amps.len());
        self.order.copy_from_slice(order);
        Ok(())
    }

    fn physical_index(&self, logical: u64) -> usize {
        let mut phys = 0usize;
        for q in 0..self.num_qubits {
            let bit = (logical >> (self.num_qubits - 1 - q)) & 1;
            phys |= (bit as usize) << self.bit_shift(q);
        }
        phys
    }

    pub(crate) fn logical_index(&self, phys: usize) -> u64 {
        let mut logical = 0u64;
        for q in 0..self.num_qubits {
            let bit = (phys >> self.bit_shift(q)) & 1;
            logical |= (bit as u64) << (self.num_qubits - 1 - q);
        }
        logical
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies a gate. Norm is preserved to machine precision.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let (a, b) = gate.qubits();
        self.check_qubit(a)?;
        if let Some(b) = b {
            self.check_qubit(b)?;
            if a == b {
                return Err(Error::InvalidConfig(
                    "two-qubit gate requires distinct qubits".into(),
                ));
            }
        }
        match *gate {
            Gate::H { q } => self.kernel_h(self.bit_shift(q)),
            Gate::X { q } => self.kernel_x(self.bit_shift(q)),
            Gate::Z { q } => self.kernel_phase_flip(self.bit_shift(q)),
            Gate::Cnot { control, target } => {
                self.kernel_cnot(self.bit_shift(control), self.bit_shift(target));
            }
            _ => {
                let m = gate.matrix().expect("single-qubit gate");
                self.kernel_mat2(self.bit_shift(a), &m);
            }
        }
        Ok(())
    }

    /// Applies an arbitrary single-qubit unitary to logical qubit `q`.
    pub fn apply_mat2(&mut self, q: usize, m: &Mat2) -> Result<()> {
        self.check_qubit(q)?;
        self.kernel_mat2(self.bit_shift(q), m);
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    /// Composes a relabeling permutation: the role held by logical qubit `q`
    /// moves to logical qubit `perm[q]`. No amplitude data moves.
    pub fn relabel(&mut self, perm: &[usize]) -> Result<()> {
        validate_permutation(perm, self.num_qubits)?;
        let mut new_order = vec![0usize; self.num_qubits];
        for q in 0..self.num_qubits {
            new_order[perm[q]] = self.order[q];
        }
        self.order = new_order;
        Ok(())
    }

    /// Outcome probabilities indexed by logical basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0f64; self.amps.len()];
        if self.order_is_identity() {
            for (p, a) in probs.iter_mut().zip(self.amps.iter()) {
                *p = a.norm_sqr();
            }
        } else {
            for (i, a) in self.amps.iter().enumerate() {
                probs[self.logical_index(i) as usize] = a.norm_sqr();
            }
        }
        probs
    }

    /// Streams `(logical_index, probability)` without materializing the
    /// permuted vector.
    pub fn for_each_probability(&self, mut f: impl FnMut(u64, f64)) {
        for (i, a) in self.amps.iter().enumerate() {
            f(self.logical_index(i), a.norm_sqr());
        }
    }

    /// Draws one measurement outcome over all qubits. The state is not
    /// collapsed.
    pub fn sample_one(&self, rng: &mut impl Rng) -> Bits {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut hit = self.amps.len() - 1;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                hit = i;
                break;
            }
        }
        Bits::from_index(self.logical_index(hit), self.num_qubits)
    }

    /// Draws `count` i.i.d. outcomes; deterministic given the rng state.
    pub fn sample(&self, rng: &mut impl Rng, count: usize) -> Vec<Bits> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }

    /// Projectively measures logical qubit `q` in the Z basis, collapses and
    /// renormalizes, and returns the outcome.
    pub fn collapse_qubit(&mut self, q: usize, rng: &mut impl Rng) -> Result<u8> {
        self.check_qubit(q)?;
        let shift = self.bit_shift(q);
        let mask = 1usize << shift;
        let mut p_one = 0.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            if i & mask != 0 {
                p_one += a.norm_sqr();
            }
        }
        let outcome = u8::from(rng.random::<f64>() < p_one);
        let keep = if outcome == 1 { mask } else { 0 };
        let kept_norm = if outcome == 1 { p_one } else { 1.0 - p_one };
        let scale = Complex64::new(1.0 / kept_norm.sqrt(), 0.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == keep {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }

    /// Measures qubit `q` and flips it if needed so it ends in |target⟩.
    pub fn reset_qubit(&mut self, q: usize, target: u8, rng: &mut impl Rng) -> Result<()> {
        let outcome = self.collapse_qubit(q, rng)?;
        if outcome != target {
            self.apply_gate(&Gate::X { q })?;
        }
        Ok(())
    }

    // --- kernels; `shift` is a physical bit position ---

    pub(crate) fn kernel_mat2(&mut self, shift: usize, m: &Mat2) {
        let mask = 1usize << shift;
        let [[u00, u01], [u10, u11]] = m.0;
        // Hand-rolled complex arithmetic; the split/zip structure keeps the
        // inner loop free of bounds checks and lets it vectorize.
        let (r00, i00) = (u00.re, u00.im);
        let (r01, i01) = (u01.re, u01.im);
        let (r10, i10) = (u10.re, u10.im);
        let (r11, i11) = (u11.re, u11.im);
        for chunk in self.amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = chunk.split_at_mut(mask);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (xr, xi) = (a.re, a.im);
                let (yr, yi) = (b.re, b.im);
                a.re = r00 * xr - i00 * xi + r01 * yr - i01 * yi;
                a.im = r00 * xi + i00 * xr + r01 * yi + i01 * yr;
                b.re = r10 * xr - i10 * xi + r11 * yr - i11 * yi;
                b.im = r10 * xi + i10 * xr + r11 * yi + i11 * yr;
            }
        }
    }

    fn kernel_h(&mut self, shift: usize) {
        let mask = 1usize << shift;
        let s = FRAC_1_SQRT_2;
        for chunk in self.amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = chunk.split_at_mut(mask);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let x = *a;
                let y = *b;
                *a = (x + y) * s;
                *b = (x - y) * s;
            }
        }
    }

    fn kernel_x(&mut self, shift: usize) {
        let mask = 1usize << shift;
        for chunk in self.amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = chunk.split_at_mut(mask);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                std::mem::swap(a, b);
            }
        }
    }

    fn kernel_phase_flip(&mut self, shift: usize) {
        let mask = 1usize << shift;
        for chunk in self.amps.chunks_exact_mut(2 * mask) {
            let (_, hi) = chunk.split_at_mut(mask);
            for b in hi.iter_mut() {
                *b = -*b;
            }
        }
    }

    pub(crate) fn kernel_cnot(&mut self, control_shift: usize, target_shift: usize) {
        let cm = 1usize << control_shift;
        let tm = 1usize << target_shift;
        let amps = &mut self.amps;
        // Enumerate only indices with control = 1, target = 0 by splicing a
        // counter around the two fixed bit positions.
        let (lo_shift, hi_shift) = if control_shift < target_shift {
            (control_shift, target_shift)
        } else {
            (target_shift, control_shift)
        };
        let lo_mask = (1usize << lo_shift) - 1;
        let mid_mask = (1usize << (hi_shift - 1)) - 1 - lo_mask;
        let quarter = amps.len() >> 2;
        for j in 0..quarter {
            let base = (j & lo_mask)
                | ((j & mid_mask) << 1)
                | ((j & !(lo_mask | mid_mask)) << 2);
            let i = base | cm;
            amps.swap(i, i | tm);
        }
    }
}

/// In-place Kronecker extension: the leading `len` amplitudes of `buf` are
/// replaced by their tensor product with `factor`, growing `len` by
/// `factor.len()`. Iterating blocks back to front keeps reads ahead of
/// writes, so no scratch buffer is needed.
pub(crate) fn kron_in_place(buf: &mut [Complex64], len: &mut usize, factor: &[Complex64]) {
    let m = factor.len();
    let old_len = *len;
    debug_assert!(old_len * m <= buf.len());
    for i in (0..old_len).rev() {
        let v = buf[i];
        let block = i * m;
        for (j, f) in factor.iter().enumerate() {
            buf[block + j] = v * f;
        }
    }
    *len = old_len * m;
}

fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotAPermutation {
            expected: n,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::NotAPermutation {
                expected: n,
                got: perm.len(),
            });
        }
        seen[p] = true;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    fn assert_close(a: Complex64, b: Complex64) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    /// Equality up to a global phase.
    fn assert_states_equal_up_to_phase(s1: &StateVector, s2: &StateVector) {
        let dim = 1u64 << s1.num_qubits();
        let mut phase = None;
        for i in 0..dim {
            let (a, b) = (s1.amplitude(i), s2.amplitude(i));
            if a.norm() > 1e-10 && b.norm() > 1e-10 {
                phase = Some(b / a);
                break;
            }
        }
        let phase = phase.expect("states share no support");
        for i in 0..dim {
            assert_close(s1.amplitude(i) * phase, s2.amplitude(i));
        }
    }

    #[test]
    fn basis_state_examples() {
        let s = StateVector::basis_state(1, &bits("0")).unwrap();
        assert_close(s.amplitude(0), Complex64::new(1.0, 0.0));
        assert_close(s.amplitude(1), Complex64::new(0.0, 0.0));

        let s = StateVector::basis_state(2, &bits("10")).unwrap();
        assert_close(s.amplitude(0b10), Complex64::new(1.0, 0.0));
        assert_eq!(s.probabilities(), vec![0.0, 0.0, 1.0, 0.0]);

        assert!(matches!(
            StateVector::basis_state(3, &bits("0110")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_gate(&Gate::H { q: 0 }).unwrap();
        assert_close(s.amplitude(0), Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_close(s.amplitude(1), Complex64::new(FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let mut s = StateVector::basis_state(2, &bits("10")).unwrap();
        s.apply_gate(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert_close(s.amplitude(0b11), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn x90_on_zero() {
        let mut s = StateVector::zero_state(1).unwrap();
        s.apply_gate(&Gate::X90 { q: 0 }).unwrap();
        assert_close(s.amplitude(0), Complex64::new(FRAC_1_SQRT_2, 0.0));
        assert_close(s.amplitude(1), Complex64::new(0.0, -FRAC_1_SQRT_2));
    }

    #[test]
    fn gate_on_missing_qubit_is_an_error() {
        let mut s = StateVector::zero_state(2).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::H { q: 2 }),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn relabel_identity_is_a_no_op() {
        let mut s = StateVector::basis_state(2, &bits("01")).unwrap();
        s.relabel(&[0, 1]).unwrap();
        assert_eq!(s.probabilities(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn relabel_swap_reads_as_swapped() {
        let mut s = StateVector::basis_state(2, &bits("01")).unwrap();
        s.relabel(&[1, 0]).unwrap();
        assert_eq!(s.probabilities(), vec![0.0, 0.0, 1.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(s.sample_one(&mut rng).to_string(), "10");
    }

    #[test]
    fn three_cycle_applied_three_times_is_identity() {
        let mut s = StateVector::basis_state(3, &bits("011")).unwrap();
        s.apply_gate(&Gate::H { q: 2 }).unwrap();
        let reference = s.probabilities();
        let cycle = [1usize, 2, 0];
        for _ in 0..3 {
            s.relabel(&cycle).unwrap();
        }
        let back = s.probabilities();
        for (p, q) in reference.iter().zip(back.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn relabel_rejects_non_bijections() {
        let mut s = StateVector::zero_state(2).unwrap();
        assert!(s.relabel(&[0, 0]).is_err());
        assert!(s.relabel(&[0]).is_err());
    }

    #[test]
    fn gates_act_through_relabeling() {
        // X on relabeled qubit 1 must hit the slot that moved there.
        let mut s = StateVector::zero_state(2).unwrap();
        s.relabel(&[1, 0]).unwrap();
        s.apply_gate(&Gate::X { q: 1 }).unwrap();
        // Logical outcome: qubit 1 set.
        assert_eq!(s.probabilities(), vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn probability_examples() {
        let s = StateVector::zero_state(1).unwrap();
        assert_eq!(s.probabilities(), vec![1.0, 0.0]);

        let mut plus = StateVector::zero_state(1).unwrap();
        plus.apply_gate(&Gate::H { q: 0 }).unwrap();
        let p = plus.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);

        let mut bell = StateVector::zero_state(2).unwrap();
        bell.apply_gate(&Gate::H { q: 0 }).unwrap();
        bell.apply_gate(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let p = bell.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!(p[1].abs() < 1e-12 && p[2].abs() < 1e-12);
        assert!((p[3] - 0.5).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampling_zero_state_always_returns_zero() {
        let s = StateVector::zero_state(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for b in s.sample(&mut rng, 5) {
            assert_eq!(b.to_string(), "0");
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let mut bell = StateVector::zero_state(2).unwrap();
        bell.apply_gate(&Gate::H { q: 0 }).unwrap();
        bell.apply_gate(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(99);
        let mut r2 = ChaCha8Rng::seed_from_u64(99);
        assert_eq!(bell.sample(&mut r1, 100), bell.sample(&mut r2, 100));
    }

    #[test]
    fn bell_sampling_frequency_within_four_sigma() {
        let mut bell = StateVector::zero_state(2).unwrap();
        bell.apply_gate(&Gate::H { q: 0 }).unwrap();
        bell.apply_gate(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let count = 10_000;
        let zeros = bell
            .sample(&mut rng, count)
            .iter()
            .filter(|b| b.to_string() == "00")
            .count();
        let freq = zeros as f64 / count as f64;
        let sigma = (0.25f64 / count as f64).sqrt();
        assert!(
            (freq - 0.5).abs() < 4.0 * sigma,
            "freq {freq} deviates from 0.5"
        );
    }

    #[test]
    fn involutions_return_to_start() {
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_gate(&Gate::Ry { q: 0, theta: 0.7 }).unwrap();
        s.apply_gate(&Gate::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let reference = s.clone();

        let mut t = s.clone();
        t.apply_gate(&Gate::H { q: 1 }).unwrap();
        t.apply_gate(&Gate::H { q: 1 }).unwrap();
        for i in 0..4 {
            assert_close(t.amplitude(i), reference.amplitude(i));
        }

        let mut t = s.clone();
        for _ in 0..2 {
            t.apply_gate(&Gate::Cnot {
                control: 1,
                target: 0,
            })
            .unwrap();
        }
        for i in 0..4 {
            assert_close(t.amplitude(i), reference.amplitude(i));
        }

        // X90^4 = -1, a pure global phase; X90^8 is the identity elementwise.
        let mut t = s.clone();
        for _ in 0..4 {
            t.apply_gate(&Gate::X90 { q: 0 }).unwrap();
        }
        assert_states_equal_up_to_phase(&t, &reference);
        for i in 0..4 {
            assert_close(t.amplitude(i), -reference.amplitude(i));
        }
        for _ in 0..4 {
            t.apply_gate(&Gate::X90 { q: 0 }).unwrap();
        }
        for i in 0..4 {
            assert_close(t.amplitude(i), reference.amplitude(i));
        }
    }

    #[test]
    fn collapse_follows_born_rule_on_deterministic_states() {
        let mut s = StateVector::basis_state(2, &bits("10")).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(s.collapse_qubit(0, &mut rng).unwrap(), 1);
        assert_eq!(s.collapse_qubit(1, &mut rng).unwrap(), 0);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reset_forces_target_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for target in [0u8, 1u8] {
            let mut s = StateVector::zero_state(1).unwrap();
            s.apply_gate(&Gate::H { q: 0 }).unwrap();
            s.reset_qubit(0, target, &mut rng).unwrap();
            let p = s.probabilities();
            assert!((p[target as usize] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_matches_gate_construction() {
        let mut a = StateVector::zero_state(1).unwrap();
        a.apply_gate(&Gate::Ry { q: 0, theta: 1.1 }).unwrap();
        let mut b = StateVector::zero_state(1).unwrap();
        b.apply_gate(&Gate::X { q: 0 }).unwrap();

        let prod = StateVector::product_state(&[&a, &b]).unwrap();

        let mut direct = StateVector::zero_state(2).unwrap();
        direct.apply_gate(&Gate::Ry { q: 0, theta: 1.1 }).unwrap();
        direct.apply_gate(&Gate::X { q: 1 }).unwrap();
        for i in 0..4 {
            assert_close(prod.amplitude(i), direct.amplitude(i));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn norm_is_preserved_by_random_gate_sequences(seed in 0u64..1024) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 4;
            let mut s = StateVector::zero_state(n).unwrap();
            for _ in 0..40 {
                let q = rng.random_range(0..n);
                let gate = match rng.random_range(0..8) {
                    0 => Gate::H { q },
                    1 => Gate::X90 { q },
                    2 => Gate::Rz { q, theta: rng.random_range(-3.0..3.0) },
                    3 => Gate::Ry { q, theta: rng.random_range(-3.0..3.0) },
                    4 => Gate::X { q },
                    5 => Gate::Y { q },
                    6 => Gate::Z { q },
                    _ => {
                        let mut t = rng.random_range(0..n);
                        if t == q { t = (t + 1) % n; }
                        Gate::Cnot { control: q, target: t }
                    }
                };
                s.apply_gate(&gate).unwrap();
            }
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn relabel_then_inverse_preserves_probabilities(seed in 0u64..1024) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 4;
            let mut s = StateVector::zero_state(n).unwrap();
            for q in 0..n {
                s.apply_gate(&Gate::Ry { q, theta: rng.random_range(0.0..3.0) }).unwrap();
            }
            s.apply_gate(&Gate::Cnot { control: 0, target: 2 }).unwrap();
            let reference = s.probabilities();

            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let mut inverse = vec![0usize; n];
            for (q, &p) in perm.iter().enumerate() {
                inverse[p] = q;
            }
            s.relabel(&perm).unwrap();
            s.relabel(&inverse).unwrap();
            let back = s.probabilities();
            for (p, q) in reference.iter().zip(back.iter()) {
                prop_assert!((p - q).abs() < 1e-12);
            }
        }
    }
}
