//! Compilation of arbitrary single-qubit unitaries into the native gate set:
//! ideal Z rotations and X90 pulses.
//!
//! Any U in U(2) factors, up to a global phase, as
//! `Rz(a) · X90 · Rz(b) · X90 · Rz(c)` (operator order; `Rz(c)` acts first).
//! The middle product evaluates to
//! `X90 · Rz(b) · X90 = -i [[sin(b/2), cos(b/2)], [cos(b/2), -sin(b/2)]]`,
//! so `b` is fixed by the magnitudes of the first row of U and the outer
//! rotations supply the phases.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gate::{Gate, Mat2};

const UNITARY_TOL: f64 = 1e-10;

/// Angles `(a, b, c)` with `U ~ Rz(a) X90 Rz(b) X90 Rz(c)` up to phase.
pub fn zxzxz_angles(u: &Mat2) -> Result<(f64, f64, f64)> {
    u.check_unitary(UNITARY_TOL)?;
    let m = &u.0;
    let s = m[0][0].norm();
    let c = m[0][1].norm();
    let b = 2.0 * f64::atan2(s, c);

    let (sigma, delta);
    if c < 1e-12 {
        // Diagonal: phases of u00 and u11 fix a + c, split evenly.
        sigma = m[1][1].arg() - m[0][0].arg() - std::f64::consts::PI;
        delta = 0.0;
    } else if s < 1e-12 {
        // Antidiagonal: phases of u01 and u10 fix a - c.
        delta = m[1][0].arg() - m[0][1].arg();
        sigma = 0.0;
    } else {
        let arg00 = m[0][0].arg();
        let arg01 = m[0][1].arg();
        let arg10 = m[1][0].arg();
        delta = arg10 - arg01;
        sigma = arg01 + arg10 - 2.0 * arg00;
    }
    Ok(((sigma + delta) / 2.0, b, (sigma - delta) / 2.0))
}

/// Product `Rz(a) X90 Rz(b) X90 Rz(c)` as a matrix.
pub fn zxzxz_matrix(a: f64, b: f64, c: f64) -> Mat2 {
    let x90 = Gate::X90 { q: 0 }.matrix().unwrap();
    let rz = |t: f64| Gate::Rz { q: 0, theta: t }.matrix().unwrap();
    rz(a).mul(&x90).mul(&rz(b)).mul(&x90).mul(&rz(c))
}

/// Compiles `u` acting on qubit `q` into the native sequence
/// `[Rz(c), X90, Rz(b), X90, Rz(a)]` (list order is application order).
pub fn compile_1q(u: &Mat2, q: usize) -> Result<Vec<Gate>> {
    let (a, b, c) = zxzxz_angles(u)?;
    Ok(vec![
        Gate::Rz { q, theta: c },
        Gate::X90 { q },
        Gate::Rz { q, theta: b },
        Gate::X90 { q },
        Gate::Rz { q, theta: a },
    ])
}

/// Rewrites a gate list so only native gates remain: `Rz`, `X90` and `Cnot`
/// pass through, every other single-qubit gate is compiled.
pub fn to_native(gates: &[Gate]) -> Result<Vec<Gate>> {
    let mut out = Vec::with_capacity(gates.len() * 3);
    for g in gates {
        match g {
            Gate::Rz { .. } | Gate::X90 { .. } | Gate::Cnot { .. } => out.push(*g),
            _ => {
                let (q, _) = g.qubits();
                let m = g.matrix().expect("single-qubit gate");
                out.extend(compile_1q(&m, q)?);
            }
        }
    }
    Ok(out)
}

/// Draws a Haar-distributed 2x2 unitary: a Gaussian first column, its
/// orthogonal completion, and a uniform relative phase.
pub fn haar_random_1q(rng: &mut impl Rng) -> Mat2 {
    let mut z = [Complex64::new(0.0, 0.0); 2];
    for zi in z.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *zi = Complex64::new(re, im);
    }
    let norm = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
    let a = z[0] / norm;
    let b = z[1] / norm;
    let chi = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    Mat2::new(a, -b.conj() * chi, b, a.conj() * chi)
}
