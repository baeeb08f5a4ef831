//! Builders for the three Rényi-estimation circuits and their qubit layouts.
//!
//! A circuit acts on one or two registers, each holding `n` copies of a
//! bipartite state on `k_a + k_b` qubits. Within a register, qubits are
//! ordered position-major: all copies' subsystem-A qubit 0, then all copies'
//! A qubit 1, ..., then the B positions likewise. Under this ordering the
//! cyclic copy shift on subsystem A factors into one independent cycle per
//! qubit position, which is what lets it be absorbed into a relabeling.

use serde::{Deserialize, Serialize};

use crate::compile::compile_1q;
use crate::error::{Error, Result};
use crate::gate::{Gate, Mat2};
use crate::statevector::MAX_QUBITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Qubit layout shared by the circuit builders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    /// Copies of the state per register.
    pub n_copies: usize,
    /// Qubits in subsystem A of one copy.
    pub k_a: usize,
    /// Qubits in subsystem B of one copy.
    pub k_b: usize,
    /// One register (ancilla-test style) or two (overlap-test style).
    pub registers: usize,
    /// When set, qubit 0 is an ancilla and registers start at qubit 1.
    pub has_ancilla: bool,
}

impl Layout {
    pub fn copy_qubits(&self) -> usize {
        self.k_a + self.k_b
    }

    pub fn register_qubits(&self) -> usize {
        self.n_copies * self.copy_qubits()
    }

    pub fn total_qubits(&self) -> usize {
        self.registers * self.register_qubits() + usize::from(self.has_ancilla)
    }

    /// Global index of a qubit in the position-major ordering.
    pub fn idx(&self, register: usize, copy: usize, sub: Subsystem, pos: usize) -> usize {
        debug_assert!(register < self.registers);
        debug_assert!(copy < self.n_copies);
        let sub_offset = match sub {
            Subsystem::A => {
                debug_assert!(pos < self.k_a);
                0
            }
            Subsystem::B => {
                debug_assert!(pos < self.k_b);
                self.k_a
            }
        };
        usize::from(self.has_ancilla)
            + register * self.register_qubits()
            + (sub_offset + pos) * self.n_copies
            + copy
    }

    /// Local index within one copy: A positions first, then B.
    pub fn local_idx(&self, sub: Subsystem, pos: usize) -> usize {
        match sub {
            Subsystem::A => pos,
            Subsystem::B => self.k_a + pos,
        }
    }

    /// Maps a copy-local qubit index to the global index.
    pub fn globalize(&self, register: usize, copy: usize, local: usize) -> usize {
        if local < self.k_a {
            self.idx(register, copy, Subsystem::A, local)
        } else {
            self.idx(register, copy, Subsystem::B, local - self.k_a)
        }
    }

    /// Assignment of logical qubits to copy-major physical slots (ancilla
    /// first, then registers copy by copy, A before B within a copy). Used to
    /// build multi-copy product states without interleaving amplitude data.
    pub fn copy_major_order(&self) -> Vec<usize> {
        let total = self.total_qubits();
        let mut order = vec![0usize; total];
        let mut slot = 0usize;
        if self.has_ancilla {
            order[0] = slot;
            slot += 1;
        }
        for register in 0..self.registers {
            for copy in 0..self.n_copies {
                for local in 0..self.copy_qubits() {
                    order[self.globalize(register, copy, local)] = slot;
                    slot += 1;
                }
            }
        }
        order
    }
}

/// An executable circuit description: state preparation, an optional
/// relabeling standing in for a permutation gate, the measurement layer
/// gates, and the post-processing metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub layout: Layout,
    /// State preparation, replicated per copy; noise-eligible.
    pub prep_gates: Vec<Gate>,
    /// The copy-local template `prep_gates` was replicated from.
    pub prep_per_copy: Vec<Gate>,
    /// Qubit relabeling applied between preparation and the measurement
    /// layer; the identity when unused. Costs no gates and no depth.
    pub relabeling: Vec<usize>,
    /// Gates of the estimation layer proper.
    pub algo_gates: Vec<Gate>,
    /// Qubits read out at the end (always all of them here).
    pub measured: Vec<usize>,
    /// (control, target) qubit pairs whose products feed the parity
    /// post-processing; empty for the ancilla-test circuit.
    pub pairing: Vec<(usize, usize)>,
    pub ancilla: Option<usize>,
    /// Rényi order this circuit estimates.
    pub renyi_order: usize,
}

impl Circuit {
    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn cnot_count(&self) -> usize {
        self.algo_gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn h_count(&self) -> usize {
        self.algo_gates
            .iter()
            .filter(|g| matches!(g, Gate::H { .. }))
            .count()
    }

    /// Depth of the estimation layer: longest chain of gates sharing qubits,
    /// with the relabeling costing nothing.
    pub fn algorithmic_depth(&self) -> usize {
        let mut qubit_depth = vec![0usize; self.num_qubits()];
        let mut depth = 0;
        for g in &self.algo_gates {
            let (a, b) = g.qubits();
            let layer = match b {
                Some(b) => qubit_depth[a].max(qubit_depth[b]) + 1,
                None => qubit_depth[a] + 1,
            };
            qubit_depth[a] = layer;
            if let Some(b) = b {
                qubit_depth[b] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }
}

fn check_sizes(n: usize, k_a: usize, k_b: usize, layout: &Layout) -> Result<()> {
    if n < 2 {
        return Err(Error::OrderTooSmall { n });
    }
    if k_a == 0 {
        return Err(Error::InvalidConfig("k_a must be at least 1".into()));
    }
    let _ = k_b;
    let total = layout.total_qubits();
    if total > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: total,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

fn validate_prep(prep: &[Gate], copy_qubits: usize) -> Result<()> {
    for g in prep {
        let (a, b) = g.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= copy_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: copy_qubits,
                });
            }
        }
    }
    Ok(())
}

fn replicate_prep(prep: &[Gate], layout: &Layout) -> Vec<Gate> {
    let mut out = Vec::with_capacity(prep.len() * layout.registers * layout.n_copies);
    for register in 0..layout.registers {
        for copy in 0..layout.n_copies {
            for g in prep {
                out.push(g.map_qubits(|q| layout.globalize(register, copy, q)));
            }
        }
    }
    out
}

/// Permutation cyclically shifting copy `s` to copy `s + 1 (mod n)` on the
/// subsystem-A qubits of register 0, identity elsewhere. Factorizes into one
/// independent `n`-cycle per A position.
pub fn cyclic_permutation_a(layout: &Layout) -> Vec<usize> {
    let n = layout.n_copies;
    let mut perm: Vec<usize> = (0..layout.total_qubits()).collect();
    for pos in 0..layout.k_a {
        for copy in 0..n {
            perm[layout.idx(0, copy, Subsystem::A, pos)] =
                layout.idx(0, (copy + 1) % n, Subsystem::A, pos);
        }
    }
    perm
}

/// The depth-two overlap circuit on `2n` copies: the copy shift on subsystem
/// A becomes a relabeling of register 0, then one transversal CNOT layer from
/// register 0 onto register 1 and one Hadamard layer on register 0. The
/// parity of each (control, target) pair over all `n (k_a + k_b)` pairs
/// estimates the square of Tr(rho_A^n).
pub fn build_two_copy_circuit(
    n: usize,
    k_a: usize,
    k_b: usize,
    prep: &[Gate],
) -> Result<Circuit> {
    let layout = Layout {
        n_copies: n,
        k_a,
        k_b,
        registers: 2,
        has_ancilla: false,
    };
    check_sizes(n, k_a, k_b, &layout)?;
    validate_prep(prep, layout.copy_qubits())?;

    let mut cnots = Vec::new();
    let mut hs = Vec::new();
    let mut pairing = Vec::new();
    for local in 0..layout.copy_qubits() {
        for copy in 0..n {
            let control = layout.globalize(0, copy, local);
            let target = layout.globalize(1, copy, local);
            cnots.push(Gate::Cnot { control, target });
            pairing.push((control, target));
        }
    }
    for local in 0..layout.copy_qubits() {
        for copy in 0..n {
            hs.push(Gate::H {
                q: layout.globalize(0, copy, local),
            });
        }
    }
    let mut algo_gates = cnots;
    algo_gates.extend(hs);

    Ok(Circuit {
        prep_gates: replicate_prep(prep, &layout),
        prep_per_copy: prep.to_vec(),
        relabeling: cyclic_permutation_a(&layout),
        algo_gates,
        measured: (0..layout.total_qubits()).collect(),
        pairing,
        ancilla: None,
        renyi_order: n,
        layout,
    })
}

/// The ancilla-test circuit on `n` copies plus one ancilla: a Hadamard, a
/// controlled cyclic shift of the subsystem-A qubits built from
/// `k_a (n - 1)` controlled swaps (8 CNOTs each), and a closing Hadamard.
/// The ancilla Z expectation estimates Tr(rho_A^n). All qubits are measured
/// so outcomes can be screened by post-selection.
pub fn build_jst_circuit(n: usize, k_a: usize, k_b: usize, prep: &[Gate]) -> Result<Circuit> {
    let layout = Layout {
        n_copies: n,
        k_a,
        k_b,
        registers: 1,
        has_ancilla: true,
    };
    check_sizes(n, k_a, k_b, &layout)?;
    validate_prep(prep, layout.copy_qubits())?;

    let ancilla = 0usize;
    let mut algo_gates = vec![Gate::H { q: ancilla }];
    // The cycle factorizes per A position into adjacent transpositions
    // applied from the high copy pair down, moving copy s to copy s + 1.
    for pos in 0..k_a {
        for s in (0..n - 1).rev() {
            let a = layout.idx(0, s, Subsystem::A, pos);
            let b = layout.idx(0, s + 1, Subsystem::A, pos);
            controlled_swap(&mut algo_gates, ancilla, a, b);
        }
    }
    algo_gates.push(Gate::H { q: ancilla });

    Ok(Circuit {
        prep_gates: replicate_prep(prep, &layout),
        prep_per_copy: prep.to_vec(),
        relabeling: (0..layout.total_qubits()).collect(),
        algo_gates,
        measured: (0..layout.total_qubits()).collect(),
        pairing: Vec::new(),
        ancilla: Some(ancilla),
        renyi_order: n,
        layout,
    })
}

/// The Bell-basis purity circuit: two copies of the state, a transversal
/// CNOT + Hadamard overlap measurement, and parity post-processing over the
/// subsystem-A pairs only, yielding Tr(rho_A^2) directly.
pub fn build_bell_purity_circuit(k_a: usize, k_b: usize, prep: &[Gate]) -> Result<Circuit> {
    let layout = Layout {
        n_copies: 1,
        k_a,
        k_b,
        registers: 2,
        has_ancilla: false,
    };
    // n_copies = 1 here; the order-2 structure lives in the two registers.
    check_sizes(2, k_a, k_b, &layout)?;
    validate_prep(prep, layout.copy_qubits())?;

    let mut algo_gates = Vec::new();
    let mut pairing = Vec::new();
    for local in 0..layout.copy_qubits() {
        let control = layout.globalize(0, 0, local);
        let target = layout.globalize(1, 0, local);
        algo_gates.push(Gate::Cnot { control, target });
    }
    for local in 0..layout.copy_qubits() {
        algo_gates.push(Gate::H {
            q: layout.globalize(0, 0, local),
        });
    }
    for pos in 0..k_a {
        pairing.push((
            layout.idx(0, 0, Subsystem::A, pos),
            layout.idx(1, 0, Subsystem::A, pos),
        ));
    }

    Ok(Circuit {
        prep_gates: replicate_prep(prep, &layout),
        prep_per_copy: prep.to_vec(),
        relabeling: (0..layout.total_qubits()).collect(),
        algo_gates,
        measured: (0..layout.total_qubits()).collect(),
        pairing,
        ancilla: None,
        renyi_order: 2,
        layout,
    })
}

/// Controlled swap of `a` and `b` under control `c`, decomposed as
/// CNOT(b,a) · Toffoli(c,a,b) · CNOT(b,a) with the Toffoli expanded into six
/// CNOTs plus single-qubit gates: eight CNOTs in total.
fn controlled_swap(out: &mut Vec<Gate>, c: usize, a: usize, b: usize) {
    out.push(Gate::Cnot {
        control: b,
        target: a,
    });
    toffoli(out, c, a, b);
    out.push(Gate::Cnot {
        control: b,
        target: a,
    });
}

const T_ANGLE: f64 = std::f64::consts::FRAC_PI_4;

/// Standard six-CNOT Toffoli with controls `c1`, `c2` and target `t`,
/// using T = Rz(pi/4) up to global phase.
fn toffoli(out: &mut Vec<Gate>, c1: usize, c2: usize, t: usize) {
    let tg = |q: usize| Gate::Rz { q, theta: T_ANGLE };
    let tdg = |q: usize| Gate::Rz { q, theta: -T_ANGLE };
    out.push(Gate::H { q: t });
    out.push(Gate::Cnot {
        control: c2,
        target: t,
    });
    out.push(tdg(t));
    out.push(Gate::Cnot {
        control: c1,
        target: t,
    });
    out.push(tg(t));
    out.push(Gate::Cnot {
        control: c2,
        target: t,
    });
    out.push(tdg(t));
    out.push(Gate::Cnot {
        control: c1,
        target: t,
    });
    out.push(tg(c2));
    out.push(tg(t));
    out.push(Gate::H { q: t });
    out.push(Gate::Cnot {
        control: c1,
        target: c2,
    });
    out.push(tg(c1));
    out.push(tdg(c2));
    out.push(Gate::Cnot {
        control: c1,
        target: c2,
    });
}

/// Preparation gates for the one-parameter entangled family on one copy
/// (A = qubit 0, B = qubit 1): a Y rotation by `theta` on A, a CNOT from A
/// to B, then arbitrary local unitaries on A and B compiled to the native
/// RZ/X90 set. The reduced spectrum is {cos^2(theta/2), sin^2(theta/2)}
/// regardless of the local unitaries.
pub fn prepare_state_gates(theta: f64, v_a: &Mat2, v_b: &Mat2) -> Result<Vec<Gate>> {
    let mut gates = vec![
        Gate::Ry { q: 0, theta },
        Gate::Cnot {
            control: 0,
            target: 1,
        },
    ];
    gates.extend(compile_1q(v_a, 0)?);
    gates.extend(compile_1q(v_b, 1)?);
    Ok(gates)
}

/// A generic random preparation circuit on one copy: alternating layers of
/// Haar single-qubit unitaries and a CNOT chain. Suitable for producing
/// full-rank reduced states at any bipartition size.
pub fn random_prep_circuit(
    k_a: usize,
    k_b: usize,
    layers: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<Gate>> {
    let m = k_a + k_b;
    let mut gates = Vec::new();
    for _ in 0..layers {
        for q in 0..m {
            gates.extend(compile_1q(&crate::compile::haar_random_1q(rng), q)?);
        }
        for q in 0..m.saturating_sub(1) {
            gates.push(Gate::Cnot {
                control: q,
                target: q + 1,
            });
        }
    }
    for q in 0..m {
        gates.extend(compile_1q(&crate::compile::haar_random_1q(rng), q)?);
    }
    Ok(gates)
}
