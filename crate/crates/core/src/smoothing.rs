//! Scalar building blocks of the self-scaled regularizer.
//!
//! `S` is a quadratic cap of `|x|` on `(-√δ, √δ)`; it is C¹ and never drops
//! below `√δ/2`, so `|z| / S(r)` is always well defined. The proximal map of
//! `½(r − z)² + δ|z|/S(r)` in `z` has the closed form implemented by [`prox_z`].

/// `S(x)`: `x²/(2√δ) + √δ/2` for `|x| < √δ`, else `|x|`.
#[inline]
pub fn smooth_s(x: f64, delta: f64) -> f64 {
    debug_assert!(delta > 0.0);
    let sd = delta.sqrt();
    if x.abs() < sd {
        x * x / (2.0 * sd) + 0.5 * sd
    } else {
        x.abs()
    }
}

/// `S'(x)`: `x/√δ` inside the cap, `sign(x)` outside.
#[inline]
pub fn smooth_s_deriv(x: f64, delta: f64) -> f64 {
    let sd = delta.sqrt();
    if x.abs() < sd {
        x / sd
    } else {
        x.signum()
    }
}

/// Closed-form minimizer of `½(r − z)² + δ|z|/S(r)` over `z`.
///
/// Zero on the dead zone `|r| ≤ √δ` (ties included), `r − δ/r` outside.
#[inline]
pub fn prox_z(r: f64, delta: f64) -> f64 {
    if r.abs() <= delta.sqrt() {
        0.0
    } else {
        r - delta / r
    }
}

/// `T(x)`, the odd dead-zone map behind the z-update. Identical to [`prox_z`];
/// kept separate because the step-bound analysis is phrased in terms of it.
#[inline]
pub fn t_fn(x: f64, delta: f64) -> f64 {
    prox_z(x, delta)
}

/// `γ(x) = S'(x) / S(x)²`.
#[inline]
pub fn gamma_fn(x: f64, delta: f64) -> f64 {
    let sd = delta.sqrt();
    if x.abs() < sd {
        let d = x * x + delta;
        4.0 * sd * x / (d * d)
    } else {
        x.signum() / (x * x)
    }
}

/// `κ(x) = S'(x) / S(x)`.
#[inline]
pub fn kappa_fn(x: f64, delta: f64) -> f64 {
    if x.abs() < delta.sqrt() {
        2.0 * x / (x * x + delta)
    } else {
        1.0 / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Per-coordinate z objective for a fixed residual.
    fn prox_objective(z: f64, r: f64, delta: f64) -> f64 {
        0.5 * (r - z) * (r - z) + delta * z.abs() / smooth_s(r, delta)
    }

    /// Golden-section search on a convex scalar function.
    fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if f(a) <= f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn smooth_s_examples() {
        assert_eq!(smooth_s(0.0, 1.0), 0.5);
        assert_eq!(smooth_s(1.0, 1.0), 1.0);
        assert_eq!(smooth_s(2.0, 1.0), 2.0);
        assert_eq!(smooth_s(0.5, 1.0), 0.625);
        // continuity at the branch point
        let below = smooth_s(1.0 - 1e-9, 1.0);
        assert!((below - 1.0).abs() < 1e-8);
    }

    #[test]
    fn prox_examples_match_scalar_minimization() {
        assert_eq!(prox_z(0.5, 1.0), 0.0);
        assert_eq!(prox_z(2.0, 1.0), 1.5);
        assert!((prox_z(-3.0, 4.0) + 5.0 / 3.0).abs() < 1e-15);
        for &(r, delta) in &[(2.0, 1.0), (-3.0, 4.0), (0.5, 1.0), (7.3, 2.2)] {
            let oracle = golden_min(
                |z| prox_objective(z, r, delta),
                -3.0 * f64::abs(r),
                3.0 * f64::abs(r),
            );
            assert!((prox_z(r, delta) - oracle).abs() <= 1e-6, "r={r} δ={delta}");
        }
    }

    #[test]
    fn prox_tie_at_threshold_is_zero() {
        assert_eq!(prox_z(2.0, 4.0), 0.0);
        assert_eq!(prox_z(-2.0, 4.0), 0.0);
    }

    #[test]
    fn t_fn_examples() {
        assert_eq!(t_fn(0.9, 1.0), 0.0);
        assert_eq!(t_fn(2.0, 1.0), 1.5);
        assert_eq!(t_fn(-2.0, 1.0), -1.5);
    }

    #[test]
    fn gamma_kappa_examples() {
        assert_eq!(gamma_fn(0.0, 3.0), 0.0);
        assert_eq!(kappa_fn(0.0, 3.0), 0.0);
        assert_eq!(gamma_fn(2.0, 1.0), 0.25);
        assert_eq!(kappa_fn(2.0, 1.0), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn s_lower_bounds(x in -1e3f64..1e3, delta in 1e-4f64..1e3) {
            let s = smooth_s(x, delta);
            prop_assert!(s >= x.abs());
            prop_assert!(s >= 0.5 * delta.sqrt());
        }

        #[test]
        fn t_over_s_bounded(x in -1e3f64..1e3, delta in 1e-4f64..1e3) {
            prop_assert!(t_fn(x, delta).abs() <= smooth_s(x, delta));
        }

        #[test]
        fn prox_shrinks_and_keeps_sign(r in -1e3f64..1e3, delta in 1e-4f64..1e3) {
            let z = prox_z(r, delta);
            prop_assert!(z == 0.0 || z.signum() == r.signum());
            prop_assert!(z.abs() < r.abs() || r == 0.0);
        }

        #[test]
        fn t_is_two_lipschitz(a in -50.0f64..50.0, b in -50.0f64..50.0, delta in 1e-3f64..100.0) {
            let lhs = (t_fn(a, delta) - t_fn(b, delta)).abs();
            prop_assert!(lhs <= 2.0 * (a - b).abs() + 1e-12);
        }

        #[test]
        fn gamma_kappa_match_derivative_ratios(x in -20.0f64..20.0, delta in 1e-2f64..50.0) {
            let s = smooth_s(x, delta);
            let ds = smooth_s_deriv(x, delta);
            let g = gamma_fn(x, delta);
            let k = kappa_fn(x, delta);
            prop_assert!((g - ds / (s * s)).abs() <= 1e-12 * (1.0 + g.abs()));
            prop_assert!((k - ds / s).abs() <= 1e-12 * (1.0 + k.abs()));
        }

        #[test]
        fn s_derivative_matches_finite_difference(x in -20.0f64..20.0, delta in 1e-2f64..50.0) {
            let h = 1e-6;
            let fd = (smooth_s(x + h, delta) - smooth_s(x - h, delta)) / (2.0 * h);
            prop_assert!((fd - smooth_s_deriv(x, delta)).abs() <= 1e-5);
        }
    }

    #[test]
    fn prox_beats_dense_grid() {
        // Deterministic sweep of (r, δ); the grid never improves on the closed form.
        let mut worst = f64::NEG_INFINITY;
        for i in 0..60 {
            let r = -15.0 + 0.517 * i as f64;
            for &delta in &[0.01, 0.3, 1.0, 4.0, 25.0] {
                let z = prox_z(r, delta);
                let best = prox_objective(z, r, delta);
                let lo = -3.0 * r.abs() - 1.0;
                let hi = 3.0 * r.abs() + 1.0;
                let grid_min = (0..=10_000)
                    .map(|k| lo + (hi - lo) * k as f64 / 10_000.0)
                    .map(|g| prox_objective(g, r, delta))
                    .fold(f64::INFINITY, f64::min);
                worst = worst.max(best - grid_min);
            }
        }
        assert!(worst <= 1e-9, "grid beat prox by {worst}");
    }
}
