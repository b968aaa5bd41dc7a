//! Independent analytic oracles shared by the integration tests.
#![allow(dead_code)]

/// `J_n(x)` for n = 0, 1 by its power series (accurate for |x| < 12).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..80 {
        let k = k as f64;
        term *= -half * half / (k * (k + n as f64));
        sum += term;
    }
    sum
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First zero of J0, j_{0,1} ≈ 2.404826.
pub fn j01() -> f64 {
    bisect(|x| bessel_j(0, x), 2.0, 3.0)
}

/// First zero of J1, j_{1,1} ≈ 3.831706.
pub fn j11() -> f64 {
    bisect(|x| bessel_j(1, x), 3.0, 4.5)
}

/// Optimal objective of λ1 + |Ω| over disks: min_R j01²/R² + πR².
pub fn ball_optimum() -> f64 {
    2.0 * j01() * std::f64::consts::PI.sqrt()
}

/// Optimal radius of the λ1 + |Ω| ball, R⁴ = j01²/π.
pub fn ball_radius() -> f64 {
    (j01().powi(2) / std::f64::consts::PI).powf(0.25)
}

/// Optimal objective of λ2 + |Ω| over pairs of equal disks.
pub fn two_ball_optimum() -> f64 {
    2.0 * (2.0 * std::f64::consts::PI).sqrt() * j01()
}

/// Radius of each ball in the λ2 + |Ω| optimum, R⁴ = j01²/(2π).
pub fn two_ball_radius() -> f64 {
    (j01().powi(2) / (2.0 * std::f64::consts::PI)).powf(0.25)
}

/// |∂u/∂ν| of the L²-normalized first eigenfunction of a disk of radius R:
/// u = J0(j r/R) / (√π R |J1(j)|), so |u_ν| = j / (√π R²).
pub fn disk_first_mode_normal_derivative(r: f64) -> f64 {
    j01() / (std::f64::consts::PI.sqrt() * r * r)
}

#[test]
fn oracles_match_tabulated_zeros() {
    assert!((j01() - 2.404825557695773).abs() < 1e-12);
    assert!((j11() - 3.831705970207512).abs() < 1e-12);
    assert!((ball_optimum() - 8.5250).abs() < 1e-3);
    assert!((two_ball_optimum() - 12.0561).abs() < 2e-3);
}
