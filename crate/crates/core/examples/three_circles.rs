//! The closed-form intersection of three circles with non-collinear centers.

use analytic_pr::circle::{im_ratio, residual, solve_three_circles, CircleSystem, CircleTolerance};
use num_complex::Complex64;

fn main() {
    let z = Complex64::new(0.7, -1.3);
    let centers = [Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.8), Complex64::new(0.2, -2.0)];
    let sys = CircleSystem::planted(z, centers);
    let tol = CircleTolerance::default();

    let found = solve_three_circles(&sys, &tol).expect("non-collinear centers");
    println!("planted {z}, found {found}, residual {:.2e}", residual(found, &sys));

    let omega = |m: f64| Complex64::from_polar(1.0, std::f64::consts::TAU * m / 8.0);
    println!("im_ratio(w^0, w^1, w^2) = {:.6}", im_ratio(omega(0.0), omega(1.0), omega(2.0)).unwrap());

    let collinear = CircleSystem::planted(z, [Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(2.0, 2.0)]);
    match solve_three_circles(&collinear, &tol) {
        Ok(p) => println!("unexpected solution {p}"),
        Err(e) => println!("collinear centers: {e}"),
    }
}
