//! Stochastic (trajectory-per-shot) hardware noise: depolarizing and Pauli
//! channels on gates, relaxation resets, and readout bit flips.
//!
//! The native noisy gates are X90 and CNOT; Z rotations are ideal. Circuits
//! executed in noisy mode are first compiled so that every other single-qubit
//! gate becomes an RZ/X90 sequence (see [`crate::compile`]).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::statevector::StateVector;

/// Number of non-identity two-qubit Pauli words.
pub const TWO_QUBIT_PAULIS: usize = 15;

/// Noise parameter bundle. Defaults model a device where readout flips with
/// probability 0.02, relaxation proceeds at rate 0.005 per single-qubit gate
/// time (resetting to |1⟩ with probability 1e-7, else |0⟩), X90 gates carry a
/// 0.001 depolarizing probability and 0.001 per-Pauli error probabilities,
/// and CNOT gates carry 0.005 for the depolarizing channel and for each of
/// the 15 two-qubit Pauli words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    pub readout_flip_prob: f64,
    /// Relaxation rate `r`, in inverse single-qubit gate times.
    pub relax_rate: f64,
    /// Probability that a relaxation event resets to |1⟩ rather than |0⟩.
    pub reset_to_one_prob: f64,
    pub depol_1q: f64,
    pub depol_cnot: f64,
    /// Probabilities for X, Y, Z errors after a noisy single-qubit gate.
    pub pauli_1q: [f64; 3],
    /// Probabilities for the 15 non-identity two-qubit Pauli words after a
    /// CNOT, ordered as (I,X,Y,Z)⊗(I,X,Y,Z) minus I⊗I.
    pub pauli_cnot: [f64; TWO_QUBIT_PAULIS],
    /// CNOT duration in single-qubit gate times.
    pub cnot_duration: f64,
    pub x90_duration: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            readout_flip_prob: 0.02,
            relax_rate: 0.005,
            reset_to_one_prob: 1e-7,
            depol_1q: 0.001,
            depol_cnot: 0.005,
            pauli_1q: [0.001; 3],
            pauli_cnot: [0.005; TWO_QUBIT_PAULIS],
            cnot_duration: 5.0,
            x90_duration: 1.0,
        }
    }
}

impl NoiseParams {
    /// All channels off; useful as a base for partial noise configurations.
    pub fn none() -> Self {
        NoiseParams {
            readout_flip_prob: 0.0,
            relax_rate: 0.0,
            reset_to_one_prob: 0.0,
            depol_1q: 0.0,
            depol_cnot: 0.0,
            pauli_1q: [0.0; 3],
            pauli_cnot: [0.0; TWO_QUBIT_PAULIS],
            cnot_duration: 5.0,
            x90_duration: 1.0,
        }
    }

    /// Keeps the gate channels (depolarizing + Pauli) and turns off readout
    /// error and relaxation.
    pub fn gates_only(&self) -> Self {
        NoiseParams {
            readout_flip_prob: 0.0,
            relax_rate: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let probs: [(&'static str, f64); 5] = [
            ("readout_flip_prob", self.readout_flip_prob),
            ("reset_to_one_prob", self.reset_to_one_prob),
            ("depol_1q", self.depol_1q),
            ("depol_cnot", self.depol_cnot),
            ("pauli sum", 0.0),
        ];
        for (what, value) in probs.iter().take(4) {
            if !(0.0..=1.0).contains(value) {
                return Err(Error::InvalidProbability { what, value: *value });
            }
        }
        for p in self.pauli_1q.iter().chain(self.pauli_cnot.iter()) {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidProbability {
                    what: "pauli probability",
                    value: *p,
                });
            }
        }
        if self.pauli_1q.iter().sum::<f64>() > 1.0 {
            return Err(Error::InvalidProbability {
                what: "pauli_1q sum",
                value: self.pauli_1q.iter().sum(),
            });
        }
        if self.pauli_cnot.iter().sum::<f64>() > 1.0 {
            return Err(Error::InvalidProbability {
                what: "pauli_cnot sum",
                value: self.pauli_cnot.iter().sum(),
            });
        }
        if self.relax_rate < 0.0 {
            return Err(Error::NegativeInput {
                what: "relax_rate",
                value: self.relax_rate,
            });
        }
        if self.cnot_duration < 0.0 || self.x90_duration < 0.0 {
            return Err(Error::NegativeInput {
                what: "gate duration",
                value: self.cnot_duration.min(self.x90_duration),
            });
        }
        Ok(())
    }

    pub fn gate_duration(&self, gate: &Gate) -> f64 {
        if gate.is_two_qubit() {
            self.cnot_duration
        } else {
            self.x90_duration
        }
    }

    /// True when every channel is off, letting executors skip noise work.
    pub fn is_noiseless(&self) -> bool {
        self.readout_flip_prob == 0.0
            && self.relax_rate == 0.0
            && self.depol_1q == 0.0
            && self.depol_cnot == 0.0
            && self.pauli_1q.iter().all(|&p| p == 0.0)
            && self.pauli_cnot.iter().all(|&p| p == 0.0)
    }
}

/// Probability `1 - exp(-duration * rate)` of a relaxation event during a
/// gate of the given duration.
pub fn relaxation_prob(duration: f64, rate: f64) -> Result<f64> {
    if duration < 0.0 {
        return Err(Error::NegativeInput {
            what: "duration",
            value: duration,
        });
    }
    if rate < 0.0 {
        return Err(Error::NegativeInput {
            what: "rate",
            value: rate,
        });
    }
    Ok(1.0 - (-duration * rate).exp())
}

/// One-qubit Pauli index: 0 = X, 1 = Y, 2 = Z.
fn apply_pauli(state: &mut StateVector, q: usize, pauli: usize) -> Result<()> {
    let gate = match pauli {
        0 => Gate::X { q },
        1 => Gate::Y { q },
        _ => Gate::Z { q },
    };
    state.apply_gate(&gate)
}

/// Applies word index `w` in 1..=15 interpreted base 4 over (control, target).
fn apply_pauli_word(state: &mut StateVector, control: usize, target: usize, w: usize) -> Result<()> {
    debug_assert!((1..=TWO_QUBIT_PAULIS).contains(&w));
    let (pc, pt) = (w / 4, w % 4);
    if pc > 0 {
        apply_pauli(state, control, pc - 1)?;
    }
    if pt > 0 {
        apply_pauli(state, target, pt - 1)?;
    }
    Ok(())
}

/// Stochastic noise events attached to one already-applied gate, in a fixed
/// order: depolarizing, then the Pauli channel, then per-qubit relaxation.
///
/// A depolarizing event replaces the qubit(s) by the maximally mixed state:
/// on a trajectory this is a Pauli drawn uniformly over all words including
/// the identity, so `depol = 1` fully depolarizes in a single event. The
/// Pauli channel draws from the non-identity words with the configured
/// per-word probabilities. For a CNOT both channels act as one two-qubit
/// event. Ideal RZ gates receive no noise.
pub fn apply_gate_noise(
    state: &mut StateVector,
    gate: &Gate,
    params: &NoiseParams,
    rng: &mut impl Rng,
) -> Result<()> {
    if matches!(gate, Gate::Rz { .. }) {
        return Ok(());
    }
    match *gate {
        Gate::Cnot { control, target } => {
            if params.depol_cnot > 0.0 && rng.random::<f64>() < params.depol_cnot {
                let w = rng.random_range(0..=TWO_QUBIT_PAULIS);
                if w > 0 {
                    apply_pauli_word(state, control, target, w)?;
                }
            }
            if let Some(w) = sample_channel(&params.pauli_cnot, rng) {
                apply_pauli_word(state, control, target, w + 1)?;
            }
            let p_relax = relaxation_prob(params.cnot_duration, params.relax_rate)?;
            for q in [control, target] {
                maybe_relax(state, q, p_relax, params, rng)?;
            }
        }
        _ => {
            let q = gate.qubits().0;
            if params.depol_1q > 0.0 && rng.random::<f64>() < params.depol_1q {
                let pauli = rng.random_range(0..4);
                if pauli > 0 {
                    apply_pauli(state, q, pauli - 1)?;
                }
            }
            if let Some(pauli) = sample_channel(&params.pauli_1q, rng) {
                apply_pauli(state, q, pauli)?;
            }
            let p_relax = relaxation_prob(params.x90_duration, params.relax_rate)?;
            maybe_relax(state, q, p_relax, params, rng)?;
        }
    }
    Ok(())
}

fn maybe_relax(
    state: &mut StateVector,
    q: usize,
    p_relax: f64,
    params: &NoiseParams,
    rng: &mut impl Rng,
) -> Result<()> {
    if p_relax > 0.0 && rng.random::<f64>() < p_relax {
        let target = u8::from(rng.random::<f64>() < params.reset_to_one_prob);
        state.reset_qubit(q, target, rng)?;
    }
    Ok(())
}

/// Draws from a sub-normalized discrete distribution; `None` means no event.
fn sample_channel(probs: &[f64], rng: &mut impl Rng) -> Option<usize> {
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

/// Flips each bit independently with probability `p`.
pub fn apply_readout_noise(bits: Bits, p: f64, rng: &mut impl Rng) -> Result<Bits> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            what: "readout_flip_prob",
            value: p,
        });
    }
    let mut out = bits;
    if p > 0.0 {
        for q in 0..bits.len() {
            if rng.random::<f64>() < p {
                out.flip(q);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn relaxation_prob_matches_exponential_form() {
        assert_eq!(relaxation_prob(0.0, 0.005).unwrap(), 0.0);
        // 1 - exp(-0.005) and 1 - exp(-0.025)
        assert!((relaxation_prob(1.0, 0.005).unwrap() - 4.987520807317687e-3).abs() < 1e-15);
        assert!((relaxation_prob(5.0, 0.005).unwrap() - 2.4690087971667385e-2).abs() < 1e-15);
        assert!(relaxation_prob(-1.0, 0.005).is_err());
        assert!(relaxation_prob(1.0, -0.005).is_err());
    }

    #[test]
    fn zero_noise_leaves_state_untouched() {
        let mut s = StateVector::zero_state(2).unwrap();
        s.apply_gate(&Gate::H { q: 0 }).unwrap();
        let reference: Vec<_> = (0..4).map(|i| s.amplitude(i)).collect();
        let params = NoiseParams::none();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        apply_gate_noise(&mut s, &Gate::H { q: 0 }, &params, &mut rng).unwrap();
        apply_gate_noise(
            &mut s,
            &Gate::Cnot {
                control: 0,
                target: 1,
            },
            &params,
            &mut rng,
        )
        .unwrap();
        for (i, r) in reference.iter().enumerate() {
            assert!((s.amplitude(i as u64) - r).norm() < 1e-15);
        }
    }

    #[test]
    fn full_depolarizing_drives_z_expectation_to_zero() {
        // depol = 1 replaces the qubit by the maximally mixed state, so the
        // trajectory average of Z on |0> is 0.
        let params = NoiseParams {
            depol_1q: 1.0,
            ..NoiseParams::none()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let trials = 20_000;
        let mut z_sum = 0.0;
        for _ in 0..trials {
            let mut s = StateVector::zero_state(1).unwrap();
            apply_gate_noise(&mut s, &Gate::X90 { q: 0 }, &params, &mut rng).unwrap();
            let p = s.probabilities();
            z_sum += p[0] - p[1];
        }
        let z = z_sum / trials as f64;
        let sigma = (1.0f64 / trials as f64).sqrt();
        assert!(z.abs() < 4.0 * sigma, "Z expectation {z}");
    }

    #[test]
    fn saturated_relaxation_forces_ground_state() {
        // relax probability -> 1 via a huge rate; reset_to_one_prob = 0.
        let params = NoiseParams {
            relax_rate: 1e9,
            ..NoiseParams::none()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut s = StateVector::zero_state(1).unwrap();
            s.apply_gate(&Gate::H { q: 0 }).unwrap();
            apply_gate_noise(&mut s, &Gate::X90 { q: 0 }, &params, &mut rng).unwrap();
            let p = s.probabilities();
            assert!((p[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn readout_noise_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b: Bits = "0101".parse().unwrap();
        assert_eq!(apply_readout_noise(b, 0.0, &mut rng).unwrap(), b);
        assert_eq!(
            apply_readout_noise(b, 1.0, &mut rng).unwrap(),
            b.complement()
        );
        assert!(apply_readout_noise(b, 1.5, &mut rng).is_err());
    }

    #[test]
    fn readout_flip_fraction_matches_probability() {
        let p = 0.02;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let total_bits = 100_000usize;
        let word = 20;
        let mut flips = 0usize;
        for _ in 0..total_bits / word {
            let b = Bits::zeros(word);
            let noisy = apply_readout_noise(b, p, &mut rng).unwrap();
            flips += noisy.iter().filter(|&x| x == 1).count();
        }
        let frac = flips as f64 / total_bits as f64;
        let sigma = (p * (1.0 - p) / total_bits as f64).sqrt();
        assert!((frac - p).abs() < 4.0 * sigma, "flip fraction {frac}");
    }

    #[test]
    fn trajectories_stay_normalized() {
        let params = NoiseParams {
            depol_cnot: 0.5,
            pauli_cnot: [0.02; TWO_QUBIT_PAULIS],
            relax_rate: 0.3,
            reset_to_one_prob: 0.4,
            ..NoiseParams::default()
        };
        params.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let mut s = StateVector::zero_state(3).unwrap();
            s.apply_gate(&Gate::H { q: 0 }).unwrap();
            s.apply_gate(&Gate::Cnot {
                control: 0,
                target: 2,
            })
            .unwrap();
            apply_gate_noise(
                &mut s,
                &Gate::Cnot {
                    control: 0,
                    target: 2,
                },
                &params,
                &mut rng,
            )
            .unwrap();
            apply_gate_noise(&mut s, &Gate::X90 { q: 1 }, &params, &mut rng).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_sums_above_one_are_rejected() {
        let params = NoiseParams {
            pauli_1q: [0.4, 0.4, 0.4],
            ..NoiseParams::default()
        };
        assert!(params.validate().is_err());
    }

    #[test]
    fn defaults_deserialize_from_empty_config() {
        let p: NoiseParams = serde_json::from_str("{}").unwrap();
        assert_eq!(p, NoiseParams::default());
        let p: NoiseParams = serde_json::from_str(r#"{"readout_flip_prob": 0.1}"#).unwrap();
        assert_eq!(p.readout_flip_prob, 0.1);
        assert_eq!(p.depol_cnot, 0.005);
    }
}
