//! Closed-form intersection of three circles `|z + v_j| = n_j`.
//!
//! Subtracting the first equation from the other two leaves a 2×2 real linear
//! system in `(Re z, Im z)`; it is uniquely solvable exactly when the centers
//! are not collinear, i.e. `Im((v₁−v₂)/(v₁−v₃)) ≠ 0`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CircleError {
    #[error("centers v1 and v3 coincide")]
    CoincidentCenters,
    #[error("centers are (nearly) collinear: Im ratio {im_ratio:e}")]
    DegenerateGeometry { im_ratio: f64 },
    #[error("the three circles have no common point (residual {residual:e})")]
    NoCommonPoint { residual: f64 },
}

/// Three circles `|z + v_j| = n_j`. Centers are stored as `v_j`, so the
/// geometric centers sit at `−v_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSystem {
    pub centers: [Complex64; 3],
    pub radii: [f64; 3],
}

impl CircleSystem {
    pub fn new(centers: [Complex64; 3], radii: [f64; 3]) -> Self {
        Self { centers, radii }
    }

    /// System whose unique solution is `z`.
    pub fn planted(z: Complex64, centers: [Complex64; 3]) -> Self {
        Self { centers, radii: centers.map(|v| (z + v).norm()) }
    }

    /// Magnitude used to make tolerances relative.
    pub fn scale(&self) -> f64 {
        let s = self
            .radii
            .iter()
            .copied()
            .chain(self.centers.iter().map(|v| v.norm()))
            .fold(0.0, f64::max);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn im_ratio(&self) -> Result<f64, CircleError> {
        im_ratio(self.centers[0], self.centers[1], self.centers[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleTolerance {
    /// Minimum `|Im((v₁−v₂)/(v₁−v₃))|`.
    pub degenerate: f64,
    /// Maximum residual, relative to [`CircleSystem::scale`].
    pub residual: f64,
}

impl Default for CircleTolerance {
    fn default() -> Self {
        Self { degenerate: 1e-9, residual: 1e-6 }
    }
}

/// `Im((v₁−v₂)/(v₁−v₃))`.
pub fn im_ratio(v1: Complex64, v2: Complex64, v3: Complex64) -> Result<f64, CircleError> {
    let d13 = v1 - v3;
    let scale = v1.norm().max(v3.norm());
    if d13.norm() <= f64::EPSILON * scale || d13.norm() == 0.0 {
        return Err(CircleError::CoincidentCenters);
    }
    Ok(((v1 - v2) / d13).im)
}

/// `max_j | |z + v_j| − n_j |`.
pub fn residual(z: Complex64, sys: &CircleSystem) -> f64 {
    sys.centers
        .iter()
        .zip(sys.radii)
        .map(|(v, n)| ((z + v).norm() - n).abs())
        .fold(0.0, f64::max)
}

/// Solve the three-circle system in closed form and verify the result.
///
/// The linear system is formed after translating `v₁` to the origin, which
/// leaves the solution unchanged but avoids cancellation when `|v_j|` is
/// large compared with the spread of the centers.
pub fn solve_three_circles(sys: &CircleSystem, tol: &CircleTolerance) -> Result<Complex64, CircleError> {
    let ratio = match sys.im_ratio() {
        Ok(r) => r,
        Err(CircleError::CoincidentCenters) => {
            return Err(CircleError::DegenerateGeometry { im_ratio: 0.0 })
        }
        Err(e) => return Err(e),
    };
    if !(ratio.abs() > tol.degenerate) {
        return Err(CircleError::DegenerateGeometry { im_ratio: ratio });
    }

    let [v1, v2, v3] = sys.centers;
    let [n1, n2, n3] = sys.radii;
    let d2 = v2 - v1;
    let d3 = v3 - v1;
    // rows (c, d) and (e, f) of the 2×2 system for centers (0, d2, d3)
    let (c, d) = (-d2.re, -d2.im);
    let (e, f) = (-d3.re, -d3.im);
    let r1 = n1 * n1 - n2 * n2 + d2.norm_sqr();
    let r2 = n1 * n1 - n3 * n3 + d3.norm_sqr();
    let det = c * f - d * e;
    if det == 0.0 {
        return Err(CircleError::DegenerateGeometry { im_ratio: ratio });
    }
    let a = 0.5 * (f * r1 - d * r2) / det;
    let b = 0.5 * (-e * r1 + c * r2) / det;
    let z = Complex64::new(a, b) - v1;

    let res = residual(z, sys);
    if !(res <= tol.residual * sys.scale()) {
        return Err(CircleError::NoCommonPoint { residual: res });
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn im_ratio_hand_values() {
        // (0 - 1) / (0 - i) = -i
        assert!((im_ratio(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(im_ratio(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).unwrap(), 0.0);
        assert_eq!(im_ratio(c(1.0, 1.0), c(2.0, 0.0), c(1.0, 1.0)), Err(CircleError::CoincidentCenters));
    }

    #[test]
    fn im_ratio_is_scale_free() {
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let base = im_ratio(c(1.0, 0.0), w, w * w).unwrap();
        let s = c(-2.5, 0.75);
        let scaled = im_ratio(s, s * w, s * w * w).unwrap();
        assert!((base - scaled).abs() < 1e-14);
    }

    #[test]
    fn planted_origin() {
        let sys = CircleSystem::new([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], [0.0, 1.0, 1.0]);
        let z = solve_three_circles(&sys, &CircleTolerance::default()).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn planted_one_plus_i() {
        let sys = CircleSystem::new(
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            [2f64.sqrt(), 5f64.sqrt(), 5f64.sqrt()],
        );
        let z = solve_three_circles(&sys, &CircleTolerance::default()).unwrap();
        assert!((z - c(1.0, 1.0)).norm() < 1e-14);
        assert!(residual(z, &sys) < 1e-14);
    }

    #[test]
    fn collinear_centers_are_degenerate() {
        let sys = CircleSystem::new([c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)], [1.0, 1.0, 1.0]);
        assert!(matches!(
            solve_three_circles(&sys, &CircleTolerance::default()),
            Err(CircleError::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn inconsistent_radii_rejected() {
        let sys = CircleSystem::new([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)], [1.0, 1.0, 3.0]);
        assert!(matches!(
            solve_three_circles(&sys, &CircleTolerance::default()),
            Err(CircleError::NoCommonPoint { .. })
        ));
    }

    #[test]
    fn perturbed_residual_is_lipschitz() {
        let centers = [c(0.3, -1.0), c(2.0, 0.5), c(-1.0, 1.5)];
        let z = c(0.7, 0.2);
        let sys = CircleSystem::planted(z, centers);
        assert!(residual(z, &sys) < 1e-12);
        let delta = c(1e-4, -2e-4);
        let r = residual(z + delta, &sys);
        assert!(r > 0.0 && r <= delta.norm() * (1.0 + 1e-9));
    }

    #[test]
    fn translation_moves_solution() {
        let centers = [c(0.3, -1.0), c(2.0, 0.5), c(-1.0, 1.5)];
        let z = c(0.7, 0.2);
        let shift = c(3.0, -4.0);
        let moved = CircleSystem::planted(z - shift, centers.map(|v| v + shift));
        let got = solve_three_circles(&moved, &CircleTolerance::default()).unwrap();
        assert!((got - (z - shift)).norm() < 1e-13);
    }
}
