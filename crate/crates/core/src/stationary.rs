//! Stationary law of the state reflected inside a band.
//!
//! Between reflections the state is the mean-reverting diffusion
//! `dX = -delta X dt + sigma dW`, so the stationary density on a band
//! `[a_plus, a_minus]` is the truncated Gaussian
//!
//! ```text
//! p(x) = exp(-beta x^2) / i0,    beta = delta / sigma^2,
//! ```
//!
//! with `i0` the Gaussian mass of the band. Means, tail weights, push
//! rates, and the long-run cost of an arbitrary band all reduce to erfc
//! differences and are evaluated here in closed form.

use crate::free_boundary::Boundaries;
use crate::model::ModelParams;
use crate::special;
use std::f64::consts::PI;

/// `erfc(u) - erfc(v)` for `u <= v`, evaluated without cancellation
/// against the level 2 when both arguments are negative.
fn erfc_diff(u: f64, v: f64) -> f64 {
    debug_assert!(u <= v);
    if u >= 0.0 {
        special::erfc(u) - special::erfc(v)
    } else if v <= 0.0 {
        special::erfc(-v) - special::erfc(-u)
    } else {
        2.0 - special::erfc(-u) - special::erfc(v)
    }
}

/// Unnormalized stationary density `(2 / sigma^2) exp(-delta x^2 / sigma^2)`
/// of the free diffusion: strictly positive and even in `x`. Restricting it
/// to a band and normalizing gives the reflected law.
pub fn speed_density(p: &ModelParams, x: f64) -> f64 {
    let sigma2 = p.sigma() * p.sigma();
    2.0 / sigma2 * (-p.delta() * x * x / sigma2).exp()
}

/// Closed-form stationary law of the reflected state on one band.
#[derive(Debug, Clone, Copy)]
pub struct StationaryStats {
    a_plus: f64,
    a_minus: f64,
    beta: f64,
    scale: f64,
    sigma2: f64,
    /// Gaussian weight difference `erfc(s a_plus) - erfc(s a_minus)`.
    weight: f64,
    /// `i0 = integral of exp(-beta x^2)` over the band.
    mass: f64,
    /// Integral of [`speed_density`] over the band, `(2 / sigma^2) i0`.
    norm: f64,
    mean: f64,
    second_moment: f64,
}

impl StationaryStats {
    /// Law of the diffusion reflected at `a_plus < a_minus`.
    pub fn new(p: &ModelParams, a_plus: f64, a_minus: f64) -> Self {
        assert!(
            a_plus < a_minus,
            "band must have positive width, got [{a_plus}, {a_minus}]"
        );
        let sigma2 = p.sigma() * p.sigma();
        let beta = p.delta() / sigma2;
        let scale = beta.sqrt();
        let weight = erfc_diff(scale * a_plus, scale * a_minus);
        let mass = PI.sqrt() / (2.0 * scale) * weight;
        let e_lo = (-beta * a_plus * a_plus).exp();
        let e_hi = (-beta * a_minus * a_minus).exp();
        let mean = (e_lo - e_hi) / (2.0 * beta * mass);
        let second_moment = 0.5 / beta + (a_plus * e_lo - a_minus * e_hi) / (2.0 * beta * mass);
        Self {
            a_plus,
            a_minus,
            beta,
            scale,
            sigma2,
            weight,
            mass,
            norm: 2.0 / sigma2 * mass,
            mean,
            second_moment,
        }
    }

    /// Law of the band carried by a smooth-fit solution.
    pub fn for_band(p: &ModelParams, b: &Boundaries) -> Self {
        Self::new(p, b.a_plus, b.a_minus)
    }

    #[inline]
    pub fn a_plus(&self) -> f64 {
        self.a_plus
    }
    #[inline]
    pub fn a_minus(&self) -> f64 {
        self.a_minus
    }

    /// Integral of [`speed_density`] over the band; the constant that
    /// normalizes it into the stationary density.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Stationary mean of the reflected state.
    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Stationary second moment.
    #[inline]
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Stationary variance.
    #[inline]
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }

    /// Stationary density; zero outside the band.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.a_plus || x > self.a_minus {
            return 0.0;
        }
        (-self.beta * x * x).exp() / self.mass
    }

    /// Stationary distribution function; 0 below the band, 1 above it.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a_plus {
            return 0.0;
        }
        if x >= self.a_minus {
            return 1.0;
        }
        (erfc_diff(self.scale * self.a_plus, self.scale * x) / self.weight).min(1.0)
    }

    /// Long-run rates at which the two reflections push, `(up, down)`:
    /// `sigma^2/2` times the stationary density at each endpoint.
    pub fn push_rates(&self) -> (f64, f64) {
        (
            0.5 * self.sigma2 * self.pdf(self.a_plus),
            0.5 * self.sigma2 * self.pdf(self.a_minus),
        )
    }
}

/// Stationary mean of the band solved for `(theta, lambda)`.
pub fn stationary_mean(p: &ModelParams, b: &Boundaries) -> f64 {
    StationaryStats::for_band(p, b).mean()
}

/// Density and distribution function of the band's stationary law at `x`.
pub fn stationary_pdf_cdf(p: &ModelParams, b: &Boundaries, x: f64) -> (f64, f64) {
    let stats = StationaryStats::for_band(p, b);
    (stats.pdf(x), stats.cdf(x))
}

/// How far a band is from being self-consistent, `(r_theta, r_lambda)`:
///
/// * `r_theta`: stationary mean minus the mean the band was solved for;
/// * `r_lambda`: the price that clears the mean constraint minus the price
///   the band was solved for.
pub fn consistency_residuals(p: &ModelParams, b: &Boundaries) -> (f64, f64) {
    let mean = stationary_mean(p, b);
    let r_theta = mean - b.theta;
    let r_lambda = -(p.phi() * (b.theta - mean) + p.psi() * (b.theta - p.theta_bar())) - b.lambda;
    (r_theta, r_lambda)
}

/// Long-run average cost of reflecting at an arbitrary band `[a_plus,
/// a_minus]` under the `(theta, lambda)` objective: occupation cost plus
/// price term plus both push costs.
///
/// At a smooth-fit band this agrees with
/// [`crate::free_boundary::ergodic_value`]; at any other band it is larger.
pub fn band_cost(p: &ModelParams, theta: f64, lambda: f64, a_plus: f64, a_minus: f64) -> f64 {
    let law = StationaryStats::new(p, a_plus, a_minus);
    let e1 = law.mean();
    let e2 = law.second_moment();
    let d_bar = theta - p.theta_bar();
    let occupation = 0.5 * (p.rho() + p.phi()) * e2 - (p.rho() * p.x_bar() + p.phi() * theta) * e1
        + 0.5 * (p.rho() * p.x_bar() * p.x_bar() + p.phi() * theta * theta)
        + 0.5 * p.psi() * d_bar * d_bar;
    let (rate_up, rate_down) = law.push_rates();
    occupation + lambda * (theta - e1) + p.k_plus() * rate_up + p.k_minus() * rate_down
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_boundary::{ergodic_value, solve_boundaries, DEFAULT_TOL};
    use crate::test_support;
    use proptest::prelude::*;

    /// Adaptive Simpson quadrature with relative tolerance.
    pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn recurse<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let refined = left + right;
            if depth > 48 || (refined - whole).abs() <= 15.0 * tol * refined.abs().max(1e-300) {
                refined + (refined - whole) / 15.0
            } else {
                recurse(f, a, m, fa, flm, fm, left, tol, depth + 1)
                    + recurse(f, m, b, fm, frm, fb, right, tol, depth + 1)
            }
        }
        let m = 0.5 * (a + b);
        let fa = f(a);
        let fm = f(m);
        let fb = f(b);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        recurse(f, a, b, fa, fm, fb, whole, tol, 0)
    }

    fn quadrature_mean(p: &ModelParams, a: f64, b: f64) -> f64 {
        let beta = p.delta() / (p.sigma() * p.sigma());
        let w = |x: f64| (-beta * x * x).exp();
        let i0 = integrate(&w, a, b, 1e-14);
        let i1 = integrate(&|x| x * w(x), a, b, 1e-14);
        i1 / i0
    }

    #[test]
    fn moments_match_quadrature_on_assorted_bands() {
        let p = test_support::benchmark();
        let beta = 1.0;
        let bands = [
            (-2.0, 3.0),
            (0.10542743634118805, 2.614772626470331),
            (5.0, 7.0),
            (-7.0, -5.0),
            (-0.3, 0.2),
        ];
        for (a, b) in bands {
            let law = StationaryStats::new(&p, a, b);
            let w = |x: f64| (-beta * x * x).exp();
            let i0 = integrate(&w, a, b, 1e-14);
            let i1 = integrate(&|x| x * w(x), a, b, 1e-14);
            let i2 = integrate(&|x| x * x * w(x), a, b, 1e-14);
            assert!(
                (law.mean() - i1 / i0).abs() < 1e-12,
                "mean on [{a},{b}]: {} vs {}",
                law.mean(),
                i1 / i0
            );
            assert!(
                (law.second_moment() - i2 / i0).abs() < 1e-11,
                "second moment on [{a},{b}]: {} vs {}",
                law.second_moment(),
                i2 / i0
            );
        }
    }

    #[test]
    fn far_negative_band_keeps_full_precision() {
        // both erfc arguments negative: the naive difference of values near 2
        // would lose ten digits here
        let p = test_support::benchmark();
        let law = StationaryStats::new(&p, -7.0, -5.0);
        let expected = quadrature_mean(&p, -7.0, -5.0);
        assert!(
            (law.mean() - expected).abs() < 1e-12,
            "{} vs {expected}",
            law.mean()
        );
        assert!(law.mean() > -7.0 && law.mean() < -5.0);
    }

    #[test]
    fn pdf_is_a_probability_density() {
        let p = test_support::benchmark();
        let law = StationaryStats::new(&p, -1.3, 2.2);
        let total = integrate(&|x| law.pdf(x), -1.3, 2.2, 1e-13);
        assert!((total - 1.0).abs() < 1e-10, "pdf mass {total}");
        assert_eq!(law.pdf(-1.4), 0.0);
        assert_eq!(law.pdf(2.3), 0.0);
        assert!(law.pdf(0.0) > 0.0);
    }

    #[test]
    fn cdf_matches_integrated_density() {
        let p = test_support::benchmark();
        let law = StationaryStats::new(&p, -1.3, 2.2);
        assert_eq!(law.cdf(-1.3), 0.0);
        assert_eq!(law.cdf(2.2), 1.0);
        assert_eq!(law.cdf(-5.0), 0.0);
        assert_eq!(law.cdf(5.0), 1.0);
        for i in 1..10 {
            let x = -1.3 + 3.5 * i as f64 / 10.0;
            let expected = integrate(&|y| law.pdf(y), -1.3, x, 1e-13);
            assert!(
                (law.cdf(x) - expected).abs() < 1e-10,
                "cdf({x}): {} vs {expected}",
                law.cdf(x)
            );
        }
    }

    #[test]
    fn speed_density_closed_form_and_symmetry() {
        let p = test_support::benchmark(); // delta = sigma = 1
        assert_eq!(speed_density(&p, 0.0), 2.0);
        assert_eq!(speed_density(&p, 1.0), 2.0 * (-1.0f64).exp());
        for x in [0.3, 1.7, 4.2] {
            assert_eq!(speed_density(&p, x), speed_density(&p, -x));
            assert!(speed_density(&p, x) > 0.0);
        }
    }

    #[test]
    fn normalizer_scales_the_speed_density_into_the_pdf() {
        let p = test_support::benchmark();
        let stats = StationaryStats::new(&p, -0.8, 1.9);
        assert!(stats.norm() > 0.0);
        let quad = integrate(&|x| speed_density(&p, x), -0.8, 1.9, 1e-13);
        assert!(
            (stats.norm() - quad).abs() < 1e-12 * quad,
            "norm {} vs quadrature {quad}",
            stats.norm()
        );
        for x in [-0.5, 0.0, 1.2] {
            let expected = speed_density(&p, x) / stats.norm();
            assert!((stats.pdf(x) - expected).abs() < 1e-14 * expected);
        }
    }

    #[test]
    fn pdf_cdf_pairs_track_the_band() {
        let p = test_support::symmetric();
        let b = solve_boundaries(&p, 0.0, 0.0, DEFAULT_TOL).unwrap();
        let below = stationary_pdf_cdf(&p, &b, b.a_plus - 1.0);
        assert_eq!(below, (0.0, 0.0));
        let (pdf_top, cdf_top) = stationary_pdf_cdf(&p, &b, b.a_minus);
        assert!(pdf_top > 0.0);
        assert_eq!(cdf_top, 1.0);
        // symmetric band: half the mass sits left of the midpoint
        let (_, cdf_mid) = stationary_pdf_cdf(&p, &b, 0.5 * (b.a_plus + b.a_minus));
        assert!((cdf_mid - 0.5).abs() < 1e-12, "midpoint cdf {cdf_mid}");
    }

    #[test]
    fn push_rates_balance_the_drift() {
        // reflecting the drift -delta x in equilibrium forces
        // rate_up - rate_down = delta * mean
        let p = test_support::benchmark();
        for (a, b) in [(-2.0, 3.0), (-0.5, 0.5), (1.0, 4.0)] {
            let law = StationaryStats::new(&p, a, b);
            let (up, down) = law.push_rates();
            let balance = up - down - p.delta() * law.mean();
            assert!(
                balance.abs() < 1e-13 * (up.abs() + down.abs()).max(1.0),
                "[{a},{b}]: imbalance {balance}"
            );
        }
    }

    #[test]
    fn band_cost_agrees_with_the_endpoint_cost_at_smooth_fit_bands() {
        let p = test_support::benchmark();
        for &(theta, lambda) in &[
            (0.0, 0.0),
            (0.632444463844932, 0.183777768077534),
            (-2.0, -2.0),
        ] {
            let b = solve_boundaries(&p, theta, lambda, DEFAULT_TOL).unwrap();
            let endpoint = ergodic_value(&p, &b).unwrap();
            let occupation = band_cost(&p, theta, lambda, b.a_plus, b.a_minus);
            assert!(
                (endpoint - occupation).abs() < 1e-8 * endpoint.abs().max(1.0),
                "({theta},{lambda}): {endpoint} vs {occupation}"
            );
        }
    }

    #[test]
    fn smooth_fit_band_is_the_cheapest_band() {
        let p = test_support::benchmark();
        let (theta, lambda) = (0.632444463844932, 0.183777768077534);
        let b = solve_boundaries(&p, theta, lambda, DEFAULT_TOL).unwrap();
        let best = band_cost(&p, theta, lambda, b.a_plus, b.a_minus);
        for eps in [-0.1, -0.05, 0.05, 0.1] {
            let shifted_lo = band_cost(&p, theta, lambda, b.a_plus + eps, b.a_minus);
            let shifted_hi = band_cost(&p, theta, lambda, b.a_plus, b.a_minus + eps);
            assert!(
                shifted_lo > best + 1e-9,
                "lower endpoint {eps}: {shifted_lo} vs {best}"
            );
            assert!(
                shifted_hi > best + 1e-9,
                "upper endpoint {eps}: {shifted_hi} vs {best}"
            );
        }
    }

    #[test]
    fn equilibrium_band_reproduces_its_own_mean() {
        let p = test_support::benchmark();
        let b = solve_boundaries(&p, 0.632444463844932, 0.183777768077534, DEFAULT_TOL).unwrap();
        let (r_theta, r_lambda) = consistency_residuals(&p, &b);
        assert!(r_theta.abs() < 1e-9, "mean residual {r_theta}");
        assert!(r_lambda.abs() < 1e-9, "price residual {r_lambda}");
    }

    #[test]
    fn price_residual_is_proportional_to_mean_residual_on_the_price_rule() {
        // with lambda = psi (theta_bar - theta) the two residuals satisfy
        // r_lambda = phi r_theta identically
        let p = test_support::benchmark();
        for &theta in &[-1.0, 0.0, 0.3, 1.5] {
            let lambda = p.psi() * (p.theta_bar() - theta);
            let b = solve_boundaries(&p, theta, lambda, DEFAULT_TOL).unwrap();
            let (r_theta, r_lambda) = consistency_residuals(&p, &b);
            assert!(
                (r_lambda - p.phi() * r_theta).abs() < 1e-12 * (1.0 + r_theta.abs()),
                "theta {theta}: {r_lambda} vs {}",
                p.phi() * r_theta
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn law_invariants_on_random_bands(
            a in -3.0f64..2.5,
            width in 0.05f64..4.0,
            x in -4.0f64..4.0,
        ) {
            let p = test_support::benchmark();
            let law = StationaryStats::new(&p, a, a + width);
            prop_assert!(law.mean() > a && law.mean() < a + width);
            prop_assert!(law.variance() > 0.0);
            prop_assert!(law.variance() <= 0.25 * width * width);
            prop_assert!(law.pdf(x) >= 0.0);
            let c = law.cdf(x);
            prop_assert!((0.0..=1.0).contains(&c));
            // cdf is nondecreasing
            prop_assert!(law.cdf(x + 0.1) >= c);
        }
    }
}
