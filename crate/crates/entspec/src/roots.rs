//! Durand-Kerner simultaneous root iteration for small monic polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1000;

/// Roots of the monic polynomial with the given coefficients, low order
/// first; `coeffs[deg]` must be 1. Initial guesses sit on a circle of radius
/// 0.4 with an angular offset to avoid real-axis symmetry traps.
pub fn durand_kerner(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    if coeffs.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let deg = coeffs.len() - 1;
    if (coeffs[deg] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig(
            "durand_kerner expects a monic polynomial".into(),
        ));
    }
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(coeffs[deg], 0.0);
        for &c in coeffs[..deg].iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    let mut z: Vec<Complex64> = (0..deg)
        .map(|j| {
            Complex64::from_polar(
                0.4,
                std::f64::consts::TAU * j as f64 / deg as f64 + 0.4,
            )
        })
        .collect();

    for _iteration in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        for j in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for k in 0..deg {
                if k != j {
                    denom *= z[j] - z[k];
                }
            }
            if denom.norm() < 1e-300 {
                // Coincident approximants; nudge apart and retry next pass.
                z[j] += Complex64::new(1e-8, 1e-8);
                max_step = f64::MAX;
                continue;
            }
            let step = eval(z[j]) / denom;
            z[j] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < TOL {
            return Ok(z);
        }
    }
    let residual = z.iter().map(|&zj| eval(zj).norm()).fold(0.0, f64::max);
    // Multiple roots converge in value long before the step criterion fires;
    // accept when the polynomial itself vanishes at all approximants.
    if residual < 1e-10 {
        return Ok(z);
    }
    Err(Error::RootsDidNotConverge {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_real(mut roots: Vec<Complex64>) -> Vec<f64> {
        roots.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
        roots.iter().map(|r| r.re).collect()
    }

    #[test]
    fn linear_and_quadratic_roots() {
        // x - 0.3
        let r = durand_kerner(&[-0.3, 1.0]).unwrap();
        assert!((r[0].re - 0.3).abs() < 1e-12 && r[0].im.abs() < 1e-12);

        // (x - 1)(x - 0) = x^2 - x
        let r = sorted_real(durand_kerner(&[0.0, -1.0, 1.0]).unwrap());
        assert!((r[0] - 1.0).abs() < 1e-10);
        assert!(r[1].abs() < 1e-10);
    }

    #[test]
    fn double_root_converges_in_value() {
        // (x - 0.5)^2 = x^2 - x + 0.25
        let r = sorted_real(durand_kerner(&[0.25, -1.0, 1.0]).unwrap());
        assert!((r[0] - 0.5).abs() < 1e-5);
        assert!((r[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn quartic_with_known_roots() {
        // (x-0.4)(x-0.3)(x-0.2)(x-0.1)
        let roots = [0.4, 0.3, 0.2, 0.1];
        let mut coeffs = vec![0.0; 5];
        coeffs[0] = roots.iter().product::<f64>();
        // expand via repeated multiplication
        let mut poly = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            poly = next;
        }
        let found = sorted_real(durand_kerner(&poly).unwrap());
        for (f, e) in found.iter().zip([0.4, 0.3, 0.2, 0.1]) {
            assert!((f - e).abs() < 1e-10, "{f} vs {e}");
        }
    }

    #[test]
    fn non_monic_input_is_rejected() {
        assert!(durand_kerner(&[1.0, 2.0]).is_err());
        assert!(durand_kerner(&[1.0]).is_err());
    }
}
