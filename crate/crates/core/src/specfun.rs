//! Polygamma functions, the limit-shape free energy, and the constants
//! derived from the characteristic tilt.
//!
//! Everything here is deterministic scalar math; the rest of the library
//! treats these values as ground truth.

use crate::error::{CoreError, Result};

/// Tilt solving psi_1(theta) = t/n together with the free energy it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    pub theta: f64,
    pub ratio: f64,
    pub f_value: f64,
}

impl ShapeParams {
    /// Characteristic parameters for endpoint (t, n).
    pub fn characteristic(t: f64, n: f64) -> Result<Self> {
        let theta = solve_theta(t / n)?;
        Ok(ShapeParams {
            theta,
            ratio: t / n,
            f_value: free_energy(t, n, Some(theta))?,
        })
    }
}

/// The constants mu = f_{1,1} and the anti-diagonal slope of the limit shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeConstants {
    pub mu: f64,
    pub a_slope: f64,
    pub theta_star: f64,
}

// Bernoulli numbers B_2, B_4, ..., B_14.
const B2K: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

// Asymptotic series are accurate to ~1e-16 relative once the argument is
// shifted at least this far to the right.
const ASYMPTOTIC_MIN: f64 = 10.0;

const HALF_LN_TWO_PI: f64 = 0.918938533204672741780329736406;

fn ln_gamma_asym(x: f64) -> f64 {
    let mut s = (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI;
    let x2 = x * x;
    let mut xp = x;
    for (j, b) in B2K.iter().enumerate() {
        let k = 2 * (j + 1) as i32;
        s += b / ((k * (k - 1)) as f64 * xp);
        xp *= x2;
    }
    s
}

fn psi0_asym(x: f64) -> f64 {
    let mut s = x.ln() - 0.5 / x;
    let x2 = x * x;
    let mut xp = x2;
    for (j, b) in B2K.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        s -= b / (k * xp);
        xp *= x2;
    }
    s
}

fn psi1_asym(x: f64) -> f64 {
    let x2 = x * x;
    let mut s = 1.0 / x + 0.5 / x2;
    let mut xp = x2 * x;
    for b in B2K.iter() {
        s += b / xp;
        xp *= x2;
    }
    s
}

fn psi2_asym(x: f64) -> f64 {
    let x2 = x * x;
    let mut s = -1.0 / x2 - 1.0 / (x2 * x);
    let mut xp = x2 * x2;
    for (j, b) in B2K.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        s -= b * (k + 1.0) / xp;
        xp *= x2;
    }
    s
}

/// Polygamma psi_k(theta) for k in {-1, 0, 1, 2}, with psi_{-1} = log Gamma.
pub fn psi(k: i32, theta: f64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(CoreError::Domain(format!(
            "psi requires theta > 0, got {theta}"
        )));
    }
    if !(-1..=2).contains(&k) {
        return Err(CoreError::Unsupported(format!(
            "psi order {k} not in {{-1, 0, 1, 2}}"
        )));
    }
    let shift = if theta < ASYMPTOTIC_MIN {
        (ASYMPTOTIC_MIN - theta).ceil() as usize
    } else {
        0
    };
    let xs = theta + shift as f64;
    let val = match k {
        -1 => {
            let mut s = ln_gamma_asym(xs);
            for i in 0..shift {
                s -= (theta + i as f64).ln();
            }
            s
        }
        0 => {
            let mut s = psi0_asym(xs);
            for i in 0..shift {
                s -= 1.0 / (theta + i as f64);
            }
            s
        }
        1 => {
            let mut s = psi1_asym(xs);
            for i in 0..shift {
                let u = theta + i as f64;
                s += 1.0 / (u * u);
            }
            s
        }
        2 => {
            let mut s = psi2_asym(xs);
            for i in 0..shift {
                let u = theta + i as f64;
                s -= 2.0 / (u * u * u);
            }
            s
        }
        _ => unreachable!(),
    };
    Ok(val)
}

/// Unique theta > 0 with psi_1(theta) = ratio. Bisection bracket then Newton
/// refinement with psi_2; psi_1 is strictly decreasing so both are safe.
pub fn solve_theta(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(CoreError::Domain(format!(
            "solve_theta requires ratio > 0, got {ratio}"
        )));
    }
    let mut lo = 1e-6;
    let mut hi = 1e3;
    // psi_1 decreasing: value at lo is huge, at hi tiny. Extend if needed.
    while psi(1, lo)? < ratio {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(CoreError::Domain(format!("ratio {ratio} out of range")));
        }
    }
    while psi(1, hi)? > ratio {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(CoreError::Domain(format!("ratio {ratio} out of range")));
        }
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if psi(1, mid)? > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let r = psi(1, x)? - ratio;
        let step = r / psi(2, x)?;
        let next = x - step;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= 1e-16 * x.abs() {
            break;
        }
    }
    Ok(x)
}

/// Free energy f^theta_{t,n} = t*theta - n*psi_0(theta). When theta is
/// omitted the characteristic tilt for t/n is used, giving f_{t,n}.
pub fn free_energy(t: f64, n: f64, theta: Option<f64>) -> Result<f64> {
    if !(t > 0.0) || !(n > 0.0) {
        return Err(CoreError::Domain(format!(
            "free_energy requires t, n > 0, got ({t}, {n})"
        )));
    }
    let th = match theta {
        Some(th) => th,
        None => solve_theta(t / n)?,
    };
    Ok(t * th - n * psi(0, th)?)
}

fn f_antidiag(w: f64) -> f64 {
    // f_{1-w,1+w}; arguments stay positive for |w| < 1.
    free_energy(1.0 - w, 1.0 + w, None).expect("antidiagonal free energy in range")
}

/// mu, the anti-diagonal slope, and the characteristic tilt at ratio 1.
///
/// The slope is the analytic -(theta* + psi_0(theta*)); a central finite
/// difference of w -> f_{1-w,1+w} cross-checks it on every call.
pub fn shape_constants() -> ShapeConstants {
    let theta_star = solve_theta(1.0).expect("ratio 1 is in range");
    let psi0_star = psi(0, theta_star).expect("theta* > 0");
    let mu = theta_star - psi0_star;
    let a_slope = -(theta_star + psi0_star);
    let h = 1e-5;
    let fd = (f_antidiag(h) - f_antidiag(-h)) / (2.0 * h);
    assert!(
        (fd - a_slope).abs() <= 1e-6,
        "analytic slope {a_slope} vs finite difference {fd}"
    );
    ShapeConstants {
        mu,
        a_slope,
        theta_star,
    }
}

/// Empirical extremes of -(f_{1-w,1+w} - mu - a*w) / w^2 over the grid.
/// Concavity of the limit shape makes both ends strictly positive.
pub fn shape_bounds_check(w_grid: &[f64]) -> Result<(f64, f64)> {
    if w_grid.is_empty() {
        return Err(CoreError::Domain("empty w grid".into()));
    }
    let sc = shape_constants();
    let mut c_hat = f64::INFINITY;
    let mut big_c_hat = f64::NEG_INFINITY;
    for &w in w_grid {
        if w == 0.0 || w.abs() >= 0.95 {
            return Err(CoreError::Domain(format!(
                "w must be nonzero and inside (-0.95, 0.95), got {w}"
            )));
        }
        let ratio = -(f_antidiag(w) - sc.mu - sc.a_slope * w) / (w * w);
        c_hat = c_hat.min(ratio);
        big_c_hat = big_c_hat.max(ratio);
    }
    Ok((c_hat, big_c_hat))
}

/// Hessian of (x, y) -> f_{x,y} at x, y > 0:
/// (1 / (y^3 psi_2(theta))) [[y^2, -x y], [-x y, x^2]] with psi_1(theta) = x/y.
pub fn shape_hessian(x: f64, y: f64) -> Result<[[f64; 2]; 2]> {
    if !(x > 0.0) || !(y > 0.0) {
        return Err(CoreError::Domain(format!(
            "hessian requires x, y > 0, got ({x}, {y})"
        )));
    }
    let theta = solve_theta(x / y)?;
    let d = 1.0 / (y * y * y * psi(2, theta)?);
    Ok([[d * y * y, -d * x * y], [-d * x * y, d * x * x]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // mpmath oracle, 22 digits, evaluated at exact f64 arguments.
    // Rows: (theta, lngamma, psi0, psi1, psi2).
    const ORACLE: [(f64, f64, f64, f64, f64); 14] = [
        (0.05, 2.968879201051730768, -20.49784499129986926, 401.5323573421150749, -16002.10815802194277),
        (0.1, 2.252712651734205902, -10.4237549404110762, 101.4332991507927477, -2001.861457378343673),
        (0.25, 1.288022524698077457, -4.227453533376265408, 17.19732915450711074, -129.3277399375369203),
        (0.5, 0.5723649429247000871, -1.963510026021423479, 4.934802200544679309, -16.8287966442343200),
        (0.8, 0.1520596783998375459, -0.9650085667061383573, 2.299474137501700042, -4.430115708421633927),
        (1.0, 0.0, -0.5772156649015328606, 1.644934066848226436, -2.404113806319188571),
        (1.2, -0.08537409000331583688, -0.2890398965921883518, 1.267377205423779189, -1.478036114435933203),
        (1.4456, -0.1213613178211650469, -0.01562874114881611138, 0.9820711967380875866, -0.9109068610853402544),
        (2.5, 0.2846828704729191596, 0.7031566406452431872, 0.4903577561002348650, -0.2362040516417274030),
        (5.0, 3.178053830347945620, 1.506117668431800473, 0.2213229557371153254, -0.04878973224511449673),
        (10.0, 12.80182748008146961, 2.251752589066721108, 0.1051663356816857461, -0.01104983497080206746),
        (17.33, 31.60029673278128866, 2.823310020146752960, 0.05940024701178302329, -0.003527354191569237353),
        (30.0, 71.25703896716800901, 3.384438132685524877, 0.03389506035773994421, -0.001148765203728599844),
        (50.0, 144.5657439463448860, 3.901989673427892197, 0.02020133322669712581, -0.0004080799893375969314),
    ];

    const THETA_STAR: f64 = 1.426255120215078990;
    const MU: f64 = 1.461054326429454537;
    const A_SLOPE: f64 = -1.391455914000703443;

    fn tol(v: f64) -> f64 {
        // 1e-12 absolute except where f64 cannot represent that (large psi2).
        (4e-16 * v.abs()).max(1e-12)
    }

    #[test]
    fn matches_high_precision_oracle() {
        for &(th, lg, p0, p1, p2) in ORACLE.iter() {
            assert!((psi(-1, th).unwrap() - lg).abs() <= tol(lg), "lngamma({th})");
            assert!((psi(0, th).unwrap() - p0).abs() <= tol(p0), "psi0({th})");
            assert!((psi(1, th).unwrap() - p1).abs() <= tol(p1), "psi1({th})");
            assert!((psi(2, th).unwrap() - p2).abs() <= tol(p2), "psi2({th})");
        }
    }

    #[test]
    fn classical_values_at_one() {
        assert!((psi(1, 1.0).unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() <= 1e-12);
        assert!((psi(0, 1.0).unwrap() + 0.5772156649015329).abs() <= 1e-12);
        assert!(psi(-1, 1.0).unwrap().abs() <= 1e-12);
        assert!((psi(2, 1.0).unwrap() + 2.404113806319188571).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(psi(0, 0.0), Err(CoreError::Domain(_))));
        assert!(matches!(psi(0, -2.0), Err(CoreError::Domain(_))));
        assert!(matches!(psi(3, 1.0), Err(CoreError::Unsupported(_))));
        assert!(matches!(psi(-2, 1.0), Err(CoreError::Unsupported(_))));
        assert!(matches!(solve_theta(0.0), Err(CoreError::Domain(_))));
        assert!(matches!(solve_theta(-1.0), Err(CoreError::Domain(_))));
        assert!(matches!(free_energy(0.0, 1.0, None), Err(CoreError::Domain(_))));
    }

    #[test]
    fn characteristic_tilt_at_ratio_one() {
        let th = solve_theta(1.0).unwrap();
        assert!((th - THETA_STAR).abs() <= 1e-12);
        assert!((psi(1, th).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn solve_theta_inverts_psi1() {
        let r = std::f64::consts::PI.powi(2) / 6.0;
        assert!((solve_theta(r).unwrap() - 1.0).abs() <= 1e-10);
        let r25 = psi(1, 2.5).unwrap();
        assert!((solve_theta(r25).unwrap() - 2.5).abs() <= 1e-10);
    }

    #[test]
    fn free_energy_closed_values() {
        let n = 3.0;
        let t = n * std::f64::consts::PI.powi(2) / 6.0;
        let expect = n * (std::f64::consts::PI.powi(2) / 6.0 + 0.5772156649015329);
        assert!((free_energy(t, n, Some(1.0)).unwrap() - expect).abs() <= 1e-10);
        // Homogeneity through the characteristic point: f_{2,2} = 2 mu.
        assert!((free_energy(2.0, 2.0, None).unwrap() - 2.0 * MU).abs() <= 1e-10);
        assert!((free_energy(1.0, 1.0, None).unwrap() - MU).abs() <= 1e-12);
    }

    #[test]
    fn shape_constants_match_oracle() {
        let sc = shape_constants();
        assert!((sc.theta_star - THETA_STAR).abs() <= 1e-12);
        assert!((sc.mu - MU).abs() <= 1e-12);
        assert!((sc.a_slope - A_SLOPE).abs() <= 1e-12);
    }

    #[test]
    fn antidiagonal_second_difference_is_negative() {
        let sc = shape_constants();
        let h = 0.01;
        let second = f_antidiag(h) - 2.0 * sc.mu + f_antidiag(-h);
        assert!(second < 0.0, "second difference {second}");
    }

    #[test]
    fn shape_bounds_on_coarse_and_fine_grids() {
        let (c, big_c) = shape_bounds_check(&[-0.5, 0.5]).unwrap();
        assert!(c > 0.0 && big_c >= c && big_c.is_finite());
        // At w -> 0 the ratio approaches -(1/2) (1,-1) H (1,-1)^T = -2/psi2(theta*).
        let (c0, big_c0) = shape_bounds_check(&[-1e-4, 1e-4]).unwrap();
        let expect = 2.120987039045156;
        assert!((c0 - expect).abs() <= 1e-3, "ratio {c0} vs {expect}");
        assert!((big_c0 - expect).abs() <= 1e-3);
        assert!(matches!(shape_bounds_check(&[0.0]), Err(CoreError::Domain(_))));
        assert!(matches!(shape_bounds_check(&[0.96]), Err(CoreError::Domain(_))));
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let h = 1e-4;
        for &(x, y) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 0.4), (4.5, 4.5), (0.2, 0.7)] {
            let a = shape_hessian(x, y).unwrap();
            let f = |x: f64, y: f64| free_energy(x, y, None).unwrap();
            let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
            let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
            let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h)
                + f(x - h, y - h))
                / (4.0 * h * h);
            for (num, ana) in [(fxx, a[0][0]), (fxy, a[0][1]), (fxy, a[1][0]), (fyy, a[1][1])] {
                assert!(
                    (num - ana).abs() <= 1e-4 * ana.abs().max(1e-3),
                    "({x},{y}): numeric {num} vs analytic {ana}"
                );
            }
        }
    }

    #[test]
    fn transverse_direction_is_concave() {
        let mut v = 0.2;
        while v <= 5.0 {
            let mut w = 0.2;
            while w <= 5.0 {
                let a = shape_hessian(v, w).unwrap();
                let q = a[0][0] - 2.0 * a[0][1] + a[1][1];
                assert!(q < 0.0, "quadratic form at ({v},{w}) = {q}");
                w += 0.6;
            }
            v += 0.6;
        }
    }

    proptest! {
        #[test]
        fn psi1_strictly_decreasing(a in 0.05f64..50.0, b in 0.05f64..50.0) {
            prop_assume!(a < b);
            prop_assert!(psi(1, a).unwrap() > psi(1, b).unwrap());
        }

        #[test]
        fn solve_theta_roundtrip(theta in 0.1f64..20.0) {
            let r = psi(1, theta).unwrap();
            let back = solve_theta(r).unwrap();
            prop_assert!((back - theta).abs() <= 1e-10);
        }

        #[test]
        fn free_energy_homogeneous(t in 0.2f64..5.0, n in 0.2f64..5.0, kidx in 0usize..3) {
            let kappa = [0.5, 2.0, 7.0][kidx];
            let lhs = free_energy(kappa * t, kappa * n, None).unwrap();
            let rhs = kappa * free_energy(t, n, None).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
        }
    }
}
