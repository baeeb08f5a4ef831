//! Exact classical reference computations used to verify the simulator:
//! reduced density matrices, trace powers, eigenvalues, and noiseless output
//! distributions.

use num_complex::Complex64;

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::statevector::StateVector;

/// A density matrix on `k` qubits, stored dense row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(DensityMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Checks Hermiticity, unit trace, and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        for r in 0..self.dim {
            for c in 0..self.dim {
                if (self.entry(r, c) - self.entry(c, r).conj()).norm() > 1e-12 {
                    return Err(Error::InvalidConfig("density matrix not Hermitian".into()));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::Domain {
                what: "density matrix trace",
                value: tr.re,
            });
        }
        if self.eigenvalues()?.iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidConfig(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(())
    }

    fn matmul(&self, other: &DensityMatrix) -> DensityMatrix {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    out[r * d + c] += a * other.entries[k * d + c];
                }
            }
        }
        DensityMatrix {
            dim: d,
            entries: out,
        }
    }

    /// `Tr(rho^n)`; the imaginary part must vanish for Hermitian input.
    pub fn power_trace(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(self.dim as f64);
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.matmul(self);
        }
        let tr = acc.trace();
        if tr.im.abs() > 1e-12 {
            return Err(Error::Domain {
                what: "power trace imaginary part",
                value: tr.im,
            });
        }
        Ok(tr.re)
    }

    /// Eigenvalues in descending order, via cyclic Jacobi rotations on the
    /// Hermitian matrix. Converges when the off-diagonal Frobenius norm
    /// drops below 1e-12.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.dim;
        let mut a = self.entries.clone();
        let max_sweeps = 60;
        let mut off = off_diag_norm(&a, d);
        let mut sweeps = 0;
        while off > 1e-12 {
            if sweeps >= max_sweeps {
                return Err(Error::EigensolverDidNotConverge {
                    sweeps,
                    off_norm: off,
                });
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    jacobi_rotate(&mut a, d, p, q);
                }
            }
            off = off_diag_norm(&a, d);
            sweeps += 1;
        }
        let mut eigs: Vec<f64> = (0..d).map(|i| a[i * d + i].re).collect();
        eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(eigs)
    }
}

fn off_diag_norm(a: &[Complex64], d: usize) -> f64 {
    let mut s = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                s += a[r * d + c].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One two-sided Jacobi rotation zeroing the (p, q) entry of the Hermitian
/// matrix `a`. The complex phase of a[p][q] is absorbed first so the
/// remaining rotation is real.
fn jacobi_rotate(a: &mut [Complex64], d: usize, p: usize, q: usize) {
    let apq = a[p * d + q];
    let b = apq.norm();
    if b < 1e-300 {
        return;
    }
    let phase = apq / b;
    let app = a[p * d + p].re;
    let aqq = a[q * d + q].re;

    let tau = (app - aqq) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Columns of the unitary: G[:,p] = c e_p + s phase* e_q,
    //                         G[:,q] = -s phase e_p + c e_q.
    let gp = (Complex64::new(c, 0.0), phase.conj() * s);
    let gq = (-phase * s, Complex64::new(c, 0.0));

    // A <- G^dagger A G, touching only rows/cols p and q.
    for r in 0..d {
        let arp = a[r * d + p];
        let arq = a[r * d + q];
        a[r * d + p] = arp * gp.0 + arq * gp.1;
        a[r * d + q] = arp * gq.0 + arq * gq.1;
    }
    for col in 0..d {
        let apc = a[p * d + col];
        let aqc = a[q * d + col];
        a[p * d + col] = gp.0.conj() * apc + gp.1.conj() * aqc;
        a[q * d + col] = gq.0.conj() * apc + gq.1.conj() * aqc;
    }
    // Clean up rounding on the eliminated entries.
    a[p * d + q] = Complex64::new(0.0, 0.0);
    a[q * d + p] = Complex64::new(0.0, 0.0);
    a[p * d + p] = Complex64::new(a[p * d + p].re, 0.0);
    a[q * d + q] = Complex64::new(a[q * d + q].re, 0.0);
}

/// Reduced state of subsystem A (the first `k_a` qubits) after tracing out
/// the trailing `k_b` qubits.
pub fn partial_trace_b(state: &StateVector, k_a: usize, k_b: usize) -> Result<DensityMatrix> {
    if state.num_qubits() != k_a + k_b {
        return Err(Error::DimensionMismatch {
            expected: k_a + k_b,
            got: state.num_qubits(),
        });
    }
    let da = 1usize << k_a;
    let db = 1u64 << k_b;
    let mut entries = vec![Complex64::new(0.0, 0.0); da * da];
    for i in 0..da {
        for j in 0..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..db {
                let psi_i = state.amplitude(((i as u64) << k_b) | b);
                let psi_j = state.amplitude(((j as u64) << k_b) | b);
                acc += psi_i * psi_j.conj();
            }
            entries[i * da + j] = acc;
        }
    }
    DensityMatrix::from_entries(da, entries)
}

/// Runs one copy's preparation gates on |0...0> and returns the reduced
/// state of subsystem A.
pub fn reduced_state(prep: &[crate::gate::Gate], k_a: usize, k_b: usize) -> Result<DensityMatrix> {
    let mut state = StateVector::zero_state(k_a + k_b)?;
    for g in prep {
        state.apply_gate(g)?;
    }
    partial_trace_b(&state, k_a, k_b)
}

/// Noiseless final state of a circuit: preparation (or the supplied
/// already-prepared state), the relabeling, then the estimation layer.
pub fn final_state(circuit: &Circuit, prep_state: Option<&StateVector>) -> Result<StateVector> {
    let mut state = match prep_state {
        Some(s) => {
            if s.num_qubits() != circuit.num_qubits() {
                return Err(Error::DimensionMismatch {
                    expected: circuit.num_qubits(),
                    got: s.num_qubits(),
                });
            }
            s.clone()
        }
        None => {
            let mut s = StateVector::zero_state(circuit.num_qubits())?;
            for g in &circuit.prep_gates {
                s.apply_gate(g)?;
            }
            s
        }
    };
    state.relabel(&circuit.relabeling)?;
    for g in &circuit.algo_gates {
        state.apply_gate(g)?;
    }
    Ok(state)
}

/// Exact noiseless output distribution over all measured bitstrings, in
/// logical qubit order.
pub fn exact_distribution(circuit: &Circuit, prep_state: Option<&StateVector>) -> Result<Vec<f64>> {
    Ok(final_state(circuit, prep_state)?.probabilities())
}
