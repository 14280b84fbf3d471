//! Two-mode passive linear networks in the Heisenberg picture.
//!
//! A [`NetworkUnitary`] `U` maps the input ladder operators onto the output
//! ones, `(a_out, b_out)^T = U (a_in, b_in)^T`. Composition follows the
//! optical path: the element met first is the rightmost factor.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};

/// Unitarity tolerance enforced on construction.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkUnitary {
    matrix: Matrix2<C64>,
}

/// ZYZ decomposition `U = e^{i global} Rz(alpha) Ry(2 half_angle) Rz(beta)` with
/// `Rz(x) = diag(e^{-ix/2}, e^{ix/2})` and
/// `Ry(2t) = [[cos t, -sin t], [sin t, cos t]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub global: f64,
    pub alpha: f64,
    pub half_angle: f64,
    pub beta: f64,
}

impl NetworkUnitary {
    pub fn new(matrix: Matrix2<C64>) -> Result<Self> {
        let err = unitarity_error(&matrix);
        if !(err <= UNITARITY_TOLERANCE) {
            return Err(MetroError::InvalidNetwork(err));
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self {
            matrix: Matrix2::identity(),
        }
    }

    /// 50:50 beam splitter with `a -> (a + b)/sqrt2`, `b -> (b - a)/sqrt2`.
    pub fn beam_splitter() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            matrix: Matrix2::new(h, h, -h, h),
        }
    }

    /// Phase shift `exp(i phi a^dag a)` on mode `a`: `a -> e^{i phi} a`.
    pub fn phase_shift(phi: f64) -> Self {
        Self {
            matrix: Matrix2::new(
                C64::from_polar(1.0, phi),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ),
        }
    }

    /// Diagonal network `a -> u_a a`, `b -> u_b b` with unit-modulus entries.
    pub fn diagonal(phase_a: f64, phase_b: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self {
            matrix: Matrix2::new(
                C64::from_polar(1.0, phase_a),
                zero,
                zero,
                C64::from_polar(1.0, phase_b),
            ),
        }
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// `self` applied after `first`: the returned network is `self * first`.
    pub fn after(&self, first: &NetworkUnitary) -> NetworkUnitary {
        NetworkUnitary {
            matrix: self.matrix * first.matrix,
        }
    }

    pub fn euler_angles(&self) -> EulerAngles {
        let det = self.matrix.determinant();
        let global = 0.5 * det.arg();
        let unphase = C64::from_polar(1.0, -global);
        let x = self.matrix[(0, 0)] * unphase;
        let y = self.matrix[(1, 0)] * unphase;
        let half_angle = y.norm().atan2(x.norm());
        let sum = if x.norm() > 0.0 { -2.0 * x.arg() } else { 0.0 };
        let diff = if y.norm() > 0.0 { 2.0 * y.arg() } else { 0.0 };
        EulerAngles {
            global,
            alpha: 0.5 * (sum + diff),
            half_angle,
            beta: 0.5 * (sum - diff),
        }
    }
}

impl EulerAngles {
    pub fn to_matrix(&self) -> Matrix2<C64> {
        let rz = |x: f64| {
            Matrix2::new(
                C64::from_polar(1.0, -0.5 * x),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, 0.5 * x),
            )
        };
        let (s, c) = self.half_angle.sin_cos();
        let ry = Matrix2::new(
            C64::new(c, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
            C64::new(c, 0.0),
        );
        rz(self.alpha) * ry * rz(self.beta) * C64::from_polar(1.0, self.global)
    }
}

/// Largest entry of `|U^dag U - 1|`.
pub fn unitarity_error(matrix: &Matrix2<C64>) -> f64 {
    let gram = matrix.adjoint() * matrix - Matrix2::<C64>::identity();
    gram.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &Matrix2<C64>, b: &Matrix2<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn rejects_non_unitary() {
        let m = Matrix2::new(
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        );
        assert!(matches!(
            NetworkUnitary::new(m),
            Err(MetroError::InvalidNetwork(_))
        ));
    }

    #[test]
    fn beam_splitter_convention() {
        let bs = NetworkUnitary::beam_splitter();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(bs.entry(0, 0).re, h);
        assert_eq!(bs.entry(0, 1).re, h);
        assert_eq!(bs.entry(1, 0).re, -h);
        assert_eq!(bs.entry(1, 1).re, h);
        assert!(unitarity_error(bs.matrix()) < 1e-15);
    }

    #[test]
    fn euler_degenerate_cases() {
        for u in [
            NetworkUnitary::identity(),
            NetworkUnitary::phase_shift(0.7),
            NetworkUnitary::beam_splitter(),
            NetworkUnitary::beam_splitter().after(&NetworkUnitary::beam_splitter()),
        ] {
            let rebuilt = u.euler_angles().to_matrix();
            assert!(close(&rebuilt, u.matrix(), 1e-14), "{u:?}");
        }
    }

    proptest! {
        #[test]
        fn euler_reconstructs(g in -3.0..3.0f64, a in -3.0..3.0f64, t in 0.0..1.5f64, b in -3.0..3.0f64) {
            let m = EulerAngles { global: g, alpha: a, half_angle: t, beta: b }.to_matrix();
            let u = NetworkUnitary::new(m).unwrap();
            let rebuilt = u.euler_angles().to_matrix();
            prop_assert!(close(&rebuilt, &m, 1e-12));
        }
    }
}
