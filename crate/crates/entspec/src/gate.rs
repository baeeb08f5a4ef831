use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// A 2x2 complex matrix, used for single-qubit unitaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(u00: Complex64, u01: Complex64, u10: Complex64, u11: Complex64) -> Self {
        Mat2([[u00, u01], [u10, u11]])
    }

    pub fn identity() -> Self {
        Mat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn dagger(&self) -> Mat2 {
        let a = &self.0;
        Mat2([
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ])
    }

    /// Frobenius deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.dagger().mul(self);
        let mut dev = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                dev += (p.0[r][c] - target).norm_sqr();
            }
        }
        dev.sqrt()
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// Largest elementwise distance to `other` after aligning global phase.
    pub fn phase_distance(&self, other: &Mat2) -> f64 {
        // Align on the largest entry of self.
        let mut best = (0, 0);
        let mut mag = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                if self.0[r][c].norm() > mag {
                    mag = self.0[r][c].norm();
                    best = (r, c);
                }
            }
        }
        let ratio = other.0[best.0][best.1] / self.0[best.0][best.1];
        let phase = if ratio.norm() > 0.0 {
            ratio / ratio.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut dist = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                dist = dist.max((self.0[r][c] * phase - other.0[r][c]).norm());
            }
        }
        dist
    }
}

/// A circuit gate. `X90` is the 90-degree X rotation
/// `(1/sqrt(2)) [[1, -i], [-i, 1]]`; every other single-qubit kind is the
/// conventional matrix. Durations are measured in single-qubit gate times:
/// 1 for single-qubit kinds and 5 for `Cnot`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    H { q: usize },
    X90 { q: usize },
    Rz { q: usize, theta: f64 },
    Ry { q: usize, theta: f64 },
    X { q: usize },
    Y { q: usize },
    Z { q: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H { q }
            | Gate::X90 { q }
            | Gate::Rz { q, .. }
            | Gate::Ry { q, .. }
            | Gate::X { q }
            | Gate::Y { q }
            | Gate::Z { q } => (q, None),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    /// Duration in single-qubit gate-time units.
    pub fn duration(&self) -> f64 {
        if self.is_two_qubit() {
            5.0
        } else {
            1.0
        }
    }

    /// Remaps qubit indices, e.g. from copy-local to circuit-global labels.
    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H { q } => Gate::H { q: f(q) },
            Gate::X90 { q } => Gate::X90 { q: f(q) },
            Gate::Rz { q, theta } => Gate::Rz { q: f(q), theta },
            Gate::Ry { q, theta } => Gate::Ry { q: f(q), theta },
            Gate::X { q } => Gate::X { q: f(q) },
            Gate::Y { q } => Gate::Y { q: f(q) },
            Gate::Z { q } => Gate::Z { q: f(q) },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(control),
                target: f(target),
            },
        }
    }

    /// Matrix of a single-qubit gate; `None` for `Cnot`.
    pub fn matrix(&self) -> Option<Mat2> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Some(match *self {
            Gate::H { .. } => Mat2::new(s, s, s, -s),
            Gate::X90 { .. } => Mat2::new(s, -i * s, -i * s, s),
            Gate::Rz { theta, .. } => Mat2::new(
                Complex64::from_polar(1.0, -theta / 2.0),
                zero,
                zero,
                Complex64::from_polar(1.0, theta / 2.0),
            ),
            Gate::Ry { theta, .. } => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let sn = Complex64::new((theta / 2.0).sin(), 0.0);
                Mat2::new(c, -sn, sn, c)
            }
            Gate::X { .. } => Mat2::new(zero, one, one, zero),
            Gate::Y { .. } => Mat2::new(zero, -i, i, zero),
            Gate::Z { .. } => Mat2::new(one, zero, zero, -one),
            Gate::Cnot { .. } => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x90_matches_its_defining_matrix() {
        let m = Gate::X90 { q: 0 }.matrix().unwrap();
        let s = FRAC_1_SQRT_2;
        assert!((m.0[0][0] - Complex64::new(s, 0.0)).norm() < 1e-15);
        assert!((m.0[0][1] - Complex64::new(0.0, -s)).norm() < 1e-15);
        assert!((m.0[1][0] - Complex64::new(0.0, -s)).norm() < 1e-15);
        assert!((m.0[1][1] - Complex64::new(s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn all_single_qubit_gates_are_unitary() {
        let gates = [
            Gate::H { q: 0 },
            Gate::X90 { q: 0 },
            Gate::Rz { q: 0, theta: 0.37 },
            Gate::Ry { q: 0, theta: -1.2 },
            Gate::X { q: 0 },
            Gate::Y { q: 0 },
            Gate::Z { q: 0 },
        ];
        for g in gates {
            g.matrix().unwrap().check_unitary(1e-12).unwrap();
        }
    }

    #[test]
    fn durations_follow_gate_kind() {
        assert_eq!(Gate::X90 { q: 0 }.duration(), 1.0);
        assert_eq!(
            Gate::Cnot {
                control: 0,
                target: 1
            }
            .duration(),
            5.0
        );
    }

    #[test]
    fn gate_serializes_to_tagged_json() {
        let g = Gate::Cnot {
            control: 2,
            target: 5,
        };
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"kind":"cnot","control":2,"target":5}"#);
        let back: Gate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
