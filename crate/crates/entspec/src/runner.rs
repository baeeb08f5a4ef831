//! Shot execution: exact sampling for noiseless runs and stochastic
//! trajectory simulation for noisy runs.
//!
//! Noisy execution compiles everything to the native gate set, prepares each
//! copy on its own small statevector (preparation gates and their noise
//! never couple copies, so this is exact), tensors the copies into the full
//! register, and then runs the estimation layer with per-gate noise events.
//! Runs of ideal single-qubit rotations between noise events are accumulated
//! into one 2x2 matrix before touching the full register, which keeps the
//! per-shot cost at a handful of passes over the amplitudes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::circuits::{Circuit, Layout};
use crate::compile::to_native;
use crate::error::{Error, Result};
use crate::estimators::ShotSet;
use crate::gate::{Gate, Mat2};
use crate::noise::{apply_readout_noise, relaxation_prob, NoiseParams, TWO_QUBIT_PAULIS};
use crate::postselect::{JstChecker, TwoCopyChecker};
use crate::statevector::StateVector;

/// RNG stream tags; every random decision in an experiment hangs off
/// (master_seed, stream, a, b) so results are independent of scheduling.
pub const STREAM_STATE_PREP: u64 = 1;
pub const STREAM_SHOT: u64 = 2;

/// An independent ChaCha stream derived from the master seed and up to two
/// indices. Deterministic and platform-independent.
pub fn derived_rng(master_seed: u64, stream: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&a.to_le_bytes());
    seed[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// Tensors per-copy states into a full-register state laid out per the
/// circuit convention (the ancilla, when present, is a leading |0⟩ factor
/// supplied by the caller via `copies` order: ancilla first).
pub fn embed_copies(copies: &[StateVector], layout: &Layout) -> Result<StateVector> {
    let refs: Vec<&StateVector> = copies.iter().collect();
    let mut state = StateVector::product_state(&refs)?;
    if state.num_qubits() != layout.total_qubits() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_qubits(),
            got: state.num_qubits(),
        });
    }
    state.set_qubit_order(layout.copy_major_order())?;
    Ok(state)
}

/// Prepares the full-register product state for a circuit from one shared
/// per-copy state (plus the ancilla when the layout has one).
pub fn embed_identical_copies(copy: &StateVector, layout: &Layout) -> Result<StateVector> {
    let mut factors = Vec::new();
    if layout.has_ancilla {
        factors.push(StateVector::zero_state(1)?);
    }
    for _ in 0..layout.registers * layout.n_copies {
        factors.push(copy.clone());
    }
    embed_copies(&factors, layout)
}

enum Accepter {
    TwoCopy(TwoCopyChecker),
    Jst(JstChecker),
}

impl Accepter {
    fn accept(&self, bits: &Bits) -> Result<bool> {
        match self {
            Accepter::TwoCopy(c) => c.accept(bits),
            Accepter::Jst(c) => c.accept(bits),
        }
    }
}

/// Reusable shot executor for one circuit and one noise setting.
pub struct ShotRunner {
    circuit: Circuit,
    params: NoiseParams,
    noisy: bool,
    force_trajectory: bool,
    prep_native: Vec<Gate>,
    algo_native: Vec<Gate>,
    copy_major: Vec<usize>,
    accepter: Accepter,
    // Trajectory scratch, allocated once.
    big: StateVector,
    copy_factors: Vec<StateVector>,
    ancilla_factor: Option<StateVector>,
    pending_big: Vec<Option<Mat2>>,
    pending_copy: Vec<Option<Mat2>>,
    p_relax_1q: f64,
    p_relax_cnot: f64,
    // Noiseless fast path: cumulative probabilities in raw amplitude order.
    cdf: Option<(StateVector, Vec<f64>)>,
}

impl ShotRunner {
    pub fn new(circuit: &Circuit, noise: Option<&NoiseParams>) -> Result<Self> {
        let params = match noise {
            Some(p) => {
                p.validate()?;
                p.clone()
            }
            None => NoiseParams::none(),
        };
        let noisy = !params.is_noiseless();
        let layout = &circuit.layout;
        let accepter = if layout.has_ancilla {
            Accepter::Jst(JstChecker::new(layout)?)
        } else {
            Accepter::TwoCopy(TwoCopyChecker::new(layout)?)
        };
        let copy_qubits = layout.copy_qubits();
        let copy_factors = (0..layout.registers * layout.n_copies)
            .map(|_| StateVector::zero_state(copy_qubits))
            .collect::<Result<Vec<_>>>()?;
        let ancilla_factor = if layout.has_ancilla {
            Some(StateVector::zero_state(1)?)
        } else {
            None
        };
        let p_relax_1q = relaxation_prob(params.x90_duration, params.relax_rate)?;
        let p_relax_cnot = relaxation_prob(params.cnot_duration, params.relax_rate)?;
        Ok(ShotRunner {
            params,
            noisy,
            force_trajectory: false,
            prep_native: to_native(&circuit.prep_per_copy)?,
            algo_native: to_native(&circuit.algo_gates)?,
            copy_major: layout.copy_major_order(),
            accepter,
            big: StateVector::zero_state(layout.total_qubits())?,
            copy_factors,
            ancilla_factor,
            pending_big: vec![None; layout.total_qubits()],
            pending_copy: vec![None; copy_qubits],
            p_relax_1q,
            p_relax_cnot,
            cdf: None,
            circuit: circuit.clone(),
        })
    }

    /// Forces noiseless runs through the trajectory path instead of the
    /// precomputed-distribution path; the two must agree bit for bit.
    pub fn force_trajectory(mut self) -> Self {
        self.force_trajectory = true;
        self
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Runs one shot: trajectory (or exact sampling when noiseless), then
    /// readout noise, then the post-selection classification.
    pub fn run_shot(&mut self, rng: &mut ChaCha8Rng) -> Result<(Bits, bool)> {
        let bits = if self.noisy || self.force_trajectory {
            self.trajectory_shot(rng)?
        } else {
            self.exact_shot(rng)?
        };
        let bits = apply_readout_noise(bits, self.params.readout_flip_prob, rng)?;
        let accepted = self.accepter.accept(&bits)?;
        Ok((bits, accepted))
    }

    /// Runs `count` shots with per-shot derived RNG streams and collects
    /// them into a `ShotSet`.
    pub fn run_shots(
        &mut self,
        master_seed: u64,
        state_index: u64,
        count: usize,
        postselect: bool,
    ) -> Result<ShotSet> {
        let mut shots = ShotSet::for_circuit(&self.circuit, postselect);
        for shot in 0..count {
            let mut rng = derived_rng(master_seed, STREAM_SHOT, state_index, shot as u64);
            let (bits, accepted) = self.run_shot(&mut rng)?;
            shots.push(bits, accepted);
        }
        Ok(shots)
    }

    fn exact_shot(&mut self, rng: &mut ChaCha8Rng) -> Result<Bits> {
        if self.cdf.is_none() {
            // Build the final state through the same zero-noise trajectory
            // code path, so exact sampling and trajectory sampling agree bit
            // for bit (same amplitude values in the same physical order).
            let mut unused = derived_rng(0, 0, 0, 0);
            self.prepare_final_state(&mut unused)?;
            let state = self.big.clone();
            let mut acc = 0.0f64;
            let cdf: Vec<f64> = state
                .raw_amps()
                .iter()
                .map(|a| {
                    acc += a.norm_sqr();
                    acc
                })
                .collect();
            self.cdf = Some((state, cdf));
        }
        let (state, cdf) = self.cdf.as_ref().unwrap();
        let u: f64 = rng.random();
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        Ok(Bits::from_index(
            state.logical_index(idx),
            state.num_qubits(),
        ))
    }

    fn trajectory_shot(&mut self, rng: &mut ChaCha8Rng) -> Result<Bits> {
        self.prepare_final_state(rng)?;
        Ok(self.big.sample_one(rng))
    }

    /// Runs preparation, embedding, relabeling and the estimation layer,
    /// leaving the pre-measurement state in `self.big`.
    fn prepare_final_state(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        // Preparation is copy-local, so each copy runs on its own small
        // statevector.
        for factor in self.copy_factors.iter_mut() {
            factor.reset_to_zero();
            apply_native_noisy(
                factor,
                &self.prep_native,
                &self.params,
                self.p_relax_1q,
                self.p_relax_cnot,
                rng,
                &mut self.pending_copy,
            )?;
        }
        let mut factors: Vec<&StateVector> = Vec::with_capacity(self.copy_factors.len() + 1);
        if let Some(anc) = &self.ancilla_factor {
            factors.push(anc);
        }
        factors.extend(self.copy_factors.iter());
        self.big.refill_from_factors(&factors, &self.copy_major)?;
        self.big.relabel(&self.circuit.relabeling)?;
        apply_native_noisy(
            &mut self.big,
            &self.algo_native,
            &self.params,
            self.p_relax_1q,
            self.p_relax_cnot,
            rng,
            &mut self.pending_big,
        )?;
        Ok(())
    }
}

const PAULI_MATS: [Mat2; 3] = {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let ni = Complex64::new(0.0, -1.0);
    let none = Complex64::new(-1.0, 0.0);
    [
        Mat2::new(zero, one, one, zero),
        Mat2::new(zero, ni, i, zero),
        Mat2::new(one, zero, zero, none),
    ]
};

#[inline]
fn fuse(pending: &mut [Option<Mat2>], q: usize, m: &Mat2) {
    pending[q] = Some(match &pending[q] {
        Some(acc) => m.mul(acc),
        None => *m,
    });
}

#[inline]
fn flush(state: &mut StateVector, pending: &mut [Option<Mat2>], q: usize) -> Result<()> {
    if let Some(m) = pending[q].take() {
        state.apply_mat2(q, &m)?;
    }
    Ok(())
}

/// Applies a native gate sequence with stochastic noise. Unitary segments
/// (ideal rotations, X90 pulses, and Pauli noise events) accumulate per
/// qubit and are applied in one pass when a CNOT, a relaxation reset, or the
/// end of the sequence forces them out.
#[allow(clippy::too_many_arguments)]
fn apply_native_noisy(
    state: &mut StateVector,
    gates: &[Gate],
    params: &NoiseParams,
    p_relax_1q: f64,
    p_relax_cnot: f64,
    rng: &mut ChaCha8Rng,
    pending: &mut [Option<Mat2>],
) -> Result<()> {
    debug_assert!(pending.iter().all(|p| p.is_none()));
    for gate in gates {
        match *gate {
            Gate::Rz { q, .. } => fuse(pending, q, &gate.matrix().unwrap()),
            Gate::X90 { q } => {
                fuse(pending, q, &gate.matrix().unwrap());
                if params.depol_1q > 0.0 && rng.random::<f64>() < params.depol_1q {
                    let w = rng.random_range(0..4usize);
                    if w > 0 {
                        fuse(pending, q, &PAULI_MATS[w - 1]);
                    }
                }
                if let Some(w) = sample_channel_inline(&params.pauli_1q, rng) {
                    fuse(pending, q, &PAULI_MATS[w]);
                }
                if p_relax_1q > 0.0 && rng.random::<f64>() < p_relax_1q {
                    flush(state, pending, q)?;
                    let target = u8::from(rng.random::<f64>() < params.reset_to_one_prob);
                    state.reset_qubit(q, target, rng)?;
                }
            }
            Gate::Cnot { control, target } => {
                flush(state, pending, control)?;
                flush(state, pending, target)?;
                state.apply_gate(gate)?;
                if params.depol_cnot > 0.0 && rng.random::<f64>() < params.depol_cnot {
                    let w = rng.random_range(0..=TWO_QUBIT_PAULIS);
                    fuse_pauli_word(pending, control, target, w);
                }
                if let Some(w) = sample_channel_inline(&params.pauli_cnot, rng) {
                    fuse_pauli_word(pending, control, target, w + 1);
                }
                for q in [control, target] {
                    if p_relax_cnot > 0.0 && rng.random::<f64>() < p_relax_cnot {
                        flush(state, pending, q)?;
                        let target_bit = u8::from(rng.random::<f64>() < params.reset_to_one_prob);
                        state.reset_qubit(q, target_bit, rng)?;
                    }
                }
            }
            _ => {
                // Non-native gates only appear in noiseless sequences fed
                // through the trajectory path; treat them as ideal.
                let (q, _) = gate.qubits();
                fuse(pending, q, &gate.matrix().unwrap());
            }
        }
    }
    for q in 0..pending.len() {
        flush(state, pending, q)?;
    }
    Ok(())
}

#[inline]
fn fuse_pauli_word(pending: &mut [Option<Mat2>], control: usize, target: usize, w: usize) {
    debug_assert!(w <= TWO_QUBIT_PAULIS);
    let (pc, pt) = (w / 4, w % 4);
    if pc > 0 {
        fuse(pending, control, &PAULI_MATS[pc - 1]);
    }
    if pt > 0 {
        fuse(pending, target, &PAULI_MATS[pt - 1]);
    }
}

/// Sub-normalized channel draw that consumes randomness only when the
/// channel is active, keeping zero-noise trajectories bit-identical to
/// noiseless runs.
#[inline]
fn sample_channel_inline(probs: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let u: f64 = rng.random();
    if u >= total {
        return None;
    }
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Some(i);
        }
    }
    Some(probs.len() - 1)
}
