//! Gauss-Legendre nodes/weights and classical polynomial evaluations.

/// Legendre polynomial P_k(t) by the three-term recurrence.
pub fn legendre_p(k: usize, t: f64) -> f64 {
    debug_assert!(t.abs() <= 1.0 + 1e-12);
    if k == 0 {
        return 1.0;
    }
    let mut pm1 = 1.0;
    let mut p = t;
    for n in 1..k {
        let next = ((2 * n + 1) as f64 * t * p - n as f64 * pm1) / (n + 1) as f64;
        pm1 = p;
        p = next;
    }
    p
}

/// P_k(t) together with its derivative.
fn legendre_p_dp(k: usize, t: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let mut pm1 = 1.0;
    let mut p = t;
    for n in 1..k {
        let next = ((2 * n + 1) as f64 * t * p - n as f64 * pm1) / (n + 1) as f64;
        pm1 = p;
        p = next;
    }
    let dp = k as f64 * (t * p - pm1) / (t * t - 1.0);
    (p, dp)
}

/// Chebyshev polynomial of the second kind U_k(t).
pub fn chebyshev_u(k: usize, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut um1 = 1.0;
    let mut u = 2.0 * t;
    for _ in 1..k {
        let next = 2.0 * t * u - um1;
        um1 = u;
        u = next;
    }
    u
}

/// Gauss-Legendre nodes (roots of P_n, ascending) and weights summing to 2,
/// exact for polynomials of degree <= 2n-1 on [-1,1]. Newton iteration with
/// asymptotic initial guesses, tolerance 1e-15.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi-style initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p_dp(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_p_dp(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_p_dp(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert!((legendre_p(2, 0.0) + 0.5).abs() < 1e-15);
        assert!((legendre_p(3, 1.0) - 1.0).abs() < 1e-15);
        assert!((legendre_p(5, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn gl_midpoint() {
        let (x, w) = gauss_legendre(1);
        assert!(x[0].abs() < 1e-15);
        assert!((w[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gl_two_nodes() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3.0_f64.sqrt();
        assert!((x[0] + r).abs() < 1e-14 && (x[1] - r).abs() < 1e-14);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gl_degree_five_exactness() {
        // integral of x^4 over [-1,1] is 2/5
        let (x, w) = gauss_legendre(3);
        let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(4)).sum();
        assert!((quad - 0.4).abs() < 1e-14);
    }

    #[test]
    fn gl_high_order_polynomial_exactness() {
        for n in [5, 9, 16, 33, 64] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // exact for degree 2n-1
            let deg = 2 * n - 1;
            let quad: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            assert!(quad.abs() < 1e-12, "odd power integrates to zero");
            let deg2 = 2 * n - 2;
            let quad2: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * xi.powi(deg2 as i32))
                .sum();
            let exact = 2.0 / (deg2 as f64 + 1.0);
            assert!((quad2 - exact).abs() < 1e-12, "n={n}: {quad2} vs {exact}");
        }
    }

    #[test]
    fn chebyshev_u_sin_ratio() {
        for k in 0..20 {
            let theta: f64 = 0.7;
            let expected = ((k as f64 + 1.0) * theta).sin() / theta.sin();
            assert!((chebyshev_u(k, theta.cos()) - expected).abs() < 1e-11);
        }
    }
}
