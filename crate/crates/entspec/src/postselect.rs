//! Symmetry-based post-selection: classifying measured bitstrings as
//! forbidden (zero amplitude in the ideal circuit, hence error-indicating)
//! or accepted.
//!
//! For the ancilla test, an outcome with ancilla 1 is forbidden when the
//! multiset of per-copy words is invariant under the inverse copy shift on
//! subsystem A; the check sorts the two word lists, costing
//! O(k n log n) comparisons. For the overlap test, an outcome (alpha, beta)
//! is forbidden when some copy permutation T commuting with the shift as
//! P^-1 T = T P fixes beta, maps P^-1(alpha) back to alpha, beta is
//! shift-invariant, and the pairwise dot product alpha . beta is odd. Only
//! n such T exist, so the check costs O(k n^2).

use crate::bits::Bits;
use crate::circuits::{Layout, Subsystem};
use crate::error::{Error, Result};

const MAX_COPIES: usize = 32;

fn check_layout_bits(bits: &Bits, layout: &Layout) -> Result<()> {
    if bits.len() != layout.total_qubits() {
        return Err(Error::LengthMismatch {
            expected: layout.total_qubits(),
            got: bits.len(),
        });
    }
    Ok(())
}

/// Reusable accept predicate for ancilla-test outcomes.
pub struct JstChecker {
    layout: Layout,
}

impl JstChecker {
    pub fn new(layout: &Layout) -> Result<Self> {
        if !layout.has_ancilla || layout.registers != 1 {
            return Err(Error::InvalidConfig(
                "ancilla-test post-selection requires a single register with ancilla".into(),
            ));
        }
        if layout.n_copies > MAX_COPIES || layout.copy_qubits() > 32 {
            return Err(Error::InvalidConfig("layout too large".into()));
        }
        Ok(JstChecker {
            layout: layout.clone(),
        })
    }

    /// Accepts when the ancilla reads 0, or when it reads 1 and the copy-word
    /// multiset is *not* invariant under the inverse shift (a symmetry
    /// violation that the ideal circuit cannot produce).
    pub fn accept(&self, bits: &Bits) -> Result<bool> {
        check_layout_bits(bits, &self.layout)?;
        if bits.bit(0) == 0 {
            return Ok(true);
        }
        let layout = &self.layout;
        let n = layout.n_copies;
        let mut words = [0u32; MAX_COPIES];
        let mut shifted = [0u32; MAX_COPIES];
        for s in 0..n {
            // Word layout: A bits then B bits, most significant first.
            let mut w = 0u32;
            let mut w_star = 0u32;
            for pos in 0..layout.k_a {
                let own = bits.bit(layout.idx(0, s, Subsystem::A, pos)) as u32;
                let next = bits.bit(layout.idx(0, (s + 1) % n, Subsystem::A, pos)) as u32;
                w = (w << 1) | own;
                w_star = (w_star << 1) | next;
            }
            for pos in 0..layout.k_b {
                let own = bits.bit(layout.idx(0, s, Subsystem::B, pos)) as u32;
                w = (w << 1) | own;
                w_star = (w_star << 1) | own;
            }
            words[s] = w;
            shifted[s] = w_star;
        }
        words[..n].sort_unstable();
        shifted[..n].sort_unstable();
        Ok(words[..n] != shifted[..n])
    }
}

/// The `n` copy permutations satisfying `P^-1 T = T P` for the cyclic shift
/// `P(s) = s + 1 (mod n)`: fixing `T(0)` forces `T(s) = T(0) - s (mod n)`.
pub fn candidate_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(n);
    for t0 in 0..n {
        let mut t = vec![0usize; n];
        t[0] = t0;
        for s in 1..n {
            t[s] = (t[s - 1] + n - 1) % n;
        }
        out.push(t);
    }
    out
}

/// Reusable accept predicate for overlap-test outcomes. Bit vectors are
/// packed copy-major (copy, then A positions, then B positions) so the
/// pairwise dot product is a single masked popcount.
pub struct TwoCopyChecker {
    layout: Layout,
    /// Packed-bit source qubit for each register: extract[r][packed] = qubit.
    extract: [Vec<usize>; 2],
    /// Qubit-level inverse shift on packed bits (A bits move, B bits stay).
    perm_p_inv: Vec<usize>,
    perm_p: Vec<usize>,
    /// Qubit-level candidate copy permutations on packed bits.
    perm_ts: Vec<Vec<usize>>,
}

impl TwoCopyChecker {
    pub fn new(layout: &Layout) -> Result<Self> {
        if layout.registers != 2 || layout.has_ancilla {
            return Err(Error::InvalidConfig(
                "overlap-test post-selection requires two registers and no ancilla".into(),
            ));
        }
        let n = layout.n_copies;
        let ck = layout.copy_qubits();
        if n * ck > 63 {
            return Err(Error::InvalidConfig("layout too large".into()));
        }
        let packed = |copy: usize, local: usize| copy * ck + local;
        let mut extract = [vec![0usize; n * ck], vec![0usize; n * ck]];
        for (r, ext) in extract.iter_mut().enumerate() {
            for copy in 0..n {
                for local in 0..ck {
                    ext[packed(copy, local)] = layout.globalize(r, copy, local);
                }
            }
        }
        // Content of copy s moves to copy s+1 on A, stays on B.
        let mut perm_p: Vec<usize> = (0..n * ck).collect();
        for copy in 0..n {
            for local in 0..layout.k_a {
                perm_p[packed(copy, local)] = packed((copy + 1) % n, local);
            }
        }
        let perm_p_inv = invert(&perm_p);
        let perm_ts = candidate_permutations(n)
            .iter()
            .map(|t| {
                let mut p: Vec<usize> = (0..n * ck).collect();
                for copy in 0..n {
                    for local in 0..ck {
                        p[packed(copy, local)] = packed(t[copy], local);
                    }
                }
                p
            })
            .collect();
        Ok(TwoCopyChecker {
            layout: layout.clone(),
            extract,
            perm_p_inv,
            perm_p,
            perm_ts,
        })
    }

    fn pack(&self, bits: &Bits, register: usize) -> u64 {
        let mut v = 0u64;
        for (packed_idx, &qubit) in self.extract[register].iter().enumerate() {
            v |= (bits.bit(qubit) as u64) << packed_idx;
        }
        v
    }

    /// Accepts unless some candidate permutation certifies that the ideal
    /// amplitude of this outcome cancels.
    pub fn accept(&self, bits: &Bits) -> Result<bool> {
        check_layout_bits(bits, &self.layout)?;
        let alpha = self.pack(bits, 0);
        let beta = self.pack(bits, 1);
        if (alpha & beta).count_ones() % 2 == 0 {
            return Ok(true);
        }
        if apply_bit_perm(beta, &self.perm_p) != beta {
            return Ok(true);
        }
        let alpha_star = apply_bit_perm(alpha, &self.perm_p_inv);
        for t in &self.perm_ts {
            if apply_bit_perm(beta, t) == beta && apply_bit_perm(alpha_star, t) == alpha {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Moves bit `i` of `x` to position `perm[i]`.
fn apply_bit_perm(x: u64, perm: &[usize]) -> u64 {
    let mut y = 0u64;
    let mut rest = x;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        y |= 1 << perm[i];
        rest &= rest - 1;
    }
    y
}

/// One-shot convenience wrappers over the reusable checkers.
pub fn jst_accept(bits: &Bits, layout: &Layout) -> Result<bool> {
    JstChecker::new(layout)?.accept(bits)
}

pub fn two_copy_accept(bits: &Bits, layout: &Layout) -> Result<bool> {
    TwoCopyChecker::new(layout)?.accept(bits)
}

/// Exhaustive reference implementations used to validate the fast
/// predicates.
pub mod reference {
    use super::*;

    /// All permutations of {0..n-1} by Heap's algorithm.
    pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        let mut items: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        heap(&mut items, n, &mut out);
        out
    }

    fn heap(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(items, k - 1, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }

    /// Multiset comparison by trying all n! matchings.
    pub fn jst_accept_bruteforce(bits: &Bits, layout: &Layout) -> Result<bool> {
        check_layout_bits(bits, layout)?;
        if bits.bit(0) == 0 {
            return Ok(true);
        }
        let n = layout.n_copies;
        let word = |copy: usize, a_from: usize| -> u64 {
            let mut w = 0u64;
            for pos in 0..layout.k_a {
                w = (w << 1) | bits.bit(layout.idx(0, a_from, Subsystem::A, pos)) as u64;
            }
            for pos in 0..layout.k_b {
                w = (w << 1) | bits.bit(layout.idx(0, copy, Subsystem::B, pos)) as u64;
            }
            w
        };
        let words: Vec<u64> = (0..n).map(|s| word(s, s)).collect();
        let starred: Vec<u64> = (0..n).map(|s| word(s, (s + 1) % n)).collect();
        let multisets_equal = all_permutations(n)
            .iter()
            .any(|tau| (0..n).all(|s| starred[tau[s]] == words[s]));
        Ok(!multisets_equal)
    }

    /// Enumerates every copy permutation and tests the full cancellation
    /// condition set, including the commutation constraint.
    pub fn two_copy_accept_bruteforce(bits: &Bits, layout: &Layout) -> Result<bool> {
        check_layout_bits(bits, layout)?;
        let checker = TwoCopyChecker::new(layout)?;
        let n = layout.n_copies;
        let ck = layout.copy_qubits();
        let packed = |copy: usize, local: usize| copy * ck + local;
        let alpha = checker.pack(bits, 0);
        let beta = checker.pack(bits, 1);

        if (alpha & beta).count_ones() % 2 == 0 {
            return Ok(true);
        }
        let alpha_star = apply_bit_perm(alpha, &checker.perm_p_inv);
        for t in all_permutations(n) {
            // Commutation P^-1 T = T P on copy indices.
            let commutes = (0..n).all(|s| (t[s] + n - 1) % n == t[(s + 1) % n]);
            if !commutes {
                continue;
            }
            let mut perm_t: Vec<usize> = (0..n * ck).collect();
            for copy in 0..n {
                for local in 0..ck {
                    perm_t[packed(copy, local)] = packed(t[copy], local);
                }
            }
            if apply_bit_perm(beta, &checker.perm_p) == beta
                && apply_bit_perm(beta, &perm_t) == beta
                && apply_bit_perm(alpha_star, &perm_t) == alpha
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
