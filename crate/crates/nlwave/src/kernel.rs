//! The convolution kernel: a normalized Gaussian, optionally truncated to a
//! finite radius or periodized by summing translated images.
//!
//! Canonical form sqrt(s/pi) exp(-s x^2) with s > 0; the equivalent width
//! delta satisfies s = 1 / (2 delta^2), so the kernel is the Gaussian density
//! with standard deviation delta and unit integral over the real line.

use std::f64::consts::PI;

use crate::basis::QuadratureRule;
use crate::error::{Error, Result};

/// Supported kernel families. Only the Gaussian is implemented; the
/// enumeration leaves room for compactly supported kernels later.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
}

/// Periodization of the kernel over period `period`: the evaluation sums the
/// images J(x - r*period) for r in -wrap_radius..=wrap_radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodization {
    pub period: f64,
    pub wrap_radius: usize,
}

/// Immutable kernel description. All evaluation goes through `eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    scale: f64,
    periodic: Option<Periodization>,
}

impl KernelSpec {
    /// Gaussian kernel sqrt(s/pi) exp(-s x^2).
    pub fn gaussian(scale: f64) -> Self {
        assert!(scale > 0.0, "kernel scale must be positive");
        KernelSpec { family: KernelFamily::Gaussian, scale, periodic: None }
    }

    /// Gaussian kernel given as a density of width delta (s = 1/(2 delta^2)).
    pub fn gaussian_width(delta: f64) -> Self {
        assert!(delta > 0.0, "kernel width must be positive");
        Self::gaussian(1.0 / (2.0 * delta * delta))
    }

    /// Periodize over `period`, choosing the smallest image count whose tail
    /// bound 2*J(R*period - period/2) falls below 1e-14.
    pub fn periodized(mut self, period: f64) -> Self {
        assert!(period > 0.0, "period must be positive");
        let mut wrap_radius = 1usize;
        while 2.0 * self.eval_nonperiodic(wrap_radius as f64 * period - 0.5 * period) >= 1e-14 {
            wrap_radius += 1;
            if wrap_radius > 10_000 {
                break;
            }
        }
        self.periodic = Some(Periodization { period, wrap_radius });
        self
    }

    /// Periodize with an explicit image count.
    pub fn periodized_with_radius(mut self, period: f64, wrap_radius: usize) -> Self {
        assert!(period > 0.0, "period must be positive");
        self.periodic = Some(Periodization { period, wrap_radius });
        self
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Equivalent Gaussian width delta = 1/sqrt(2s).
    pub fn width(&self) -> f64 {
        1.0 / (2.0 * self.scale).sqrt()
    }

    pub fn periodization(&self) -> Option<Periodization> {
        self.periodic
    }

    /// Peak value J(0) (after periodization images, if any).
    pub fn peak(&self) -> f64 {
        self.eval(0.0)
    }

    fn eval_nonperiodic(&self, x: f64) -> f64 {
        (self.scale / PI).sqrt() * (-self.scale * x * x).exp()
    }

    /// Kernel value at x. Even in x by construction (only x^2 enters).
    pub fn eval(&self, x: f64) -> f64 {
        match self.periodic {
            None => self.eval_nonperiodic(x),
            Some(Periodization { period, wrap_radius }) => {
                let mut sum = self.eval_nonperiodic(x);
                for r in 1..=wrap_radius as i64 {
                    sum += self.eval_nonperiodic(x - r as f64 * period);
                    sum += self.eval_nonperiodic(x + r as f64 * period);
                }
                sum
            }
        }
    }

    /// Quadrature value of the kernel mass integral of J(x - y) dy over
    /// [lo, hi], using the given rule's point layout remapped onto [lo, hi].
    /// For x well inside a domain that is wide relative to the kernel width,
    /// the result is 1 up to quadrature error.
    pub fn mass(&self, x: f64, lo: f64, hi: f64, rule: &QuadratureRule) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let mapped = rule.remapped(lo, hi);
        mapped.integrate(|y| self.eval(x - y))
    }
}

/// Half-width A at which the Gaussian density of width `delta` drops to
/// `eps`: A = sqrt(-2 delta^2 ln(delta eps sqrt(2 pi))).
///
/// Fails with `NoTruncation` when the peak value 1/(delta sqrt(2 pi)) is
/// already below eps. eps equal to the peak returns 0.
pub fn truncation_radius(delta: f64, eps: f64) -> Result<f64> {
    assert!(delta > 0.0 && eps > 0.0);
    let arg = delta * eps * (2.0 * PI).sqrt();
    if arg > 1.0 {
        return Err(Error::NoTruncation);
    }
    Ok((-2.0 * delta * delta * arg.ln()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{composite_gauss_rule, gauss_rule};

    #[test]
    fn peak_value_matches_closed_form() {
        let k = KernelSpec::gaussian(400.0);
        assert!((k.eval(0.0) - (400.0 / PI).sqrt()).abs() < 1e-12);
        assert!((k.eval(0.0) - 11.283791670955126).abs() < 1e-10);
    }

    #[test]
    fn even_symmetry_is_exact() {
        let k = KernelSpec::gaussian(400.0);
        for &x in &[0.3, 0.017, 1.4, 12.0] {
            assert_eq!(k.eval(x), k.eval(-x));
        }
    }

    #[test]
    fn nonnegative_everywhere_sampled() {
        let k = KernelSpec::gaussian(250.0).periodized(1.0);
        for i in 0..=1000 {
            let x = -2.0 + 4.0 * i as f64 / 1000.0;
            assert!(k.eval(x) >= 0.0);
        }
    }

    #[test]
    fn width_and_scale_are_consistent() {
        let k = KernelSpec::gaussian_width(0.1);
        assert!((k.scale() - 50.0).abs() < 1e-12);
        let k2 = KernelSpec::gaussian(400.0);
        let d = k2.width();
        assert!((1.0 / (2.0 * d * d) - 400.0).abs() / 400.0 < 1e-14);
    }

    #[test]
    fn periodic_eval_matches_direct_image_sum() {
        let k = KernelSpec::gaussian(400.0).periodized_with_radius(1.0, 4);
        let x = 0.999;
        let plain = KernelSpec::gaussian(400.0);
        let mut want = 0.0;
        for r in -4i64..=4 {
            want += plain.eval(x - r as f64);
        }
        assert!((k.eval(x) - want).abs() <= 1e-15 * want.max(1.0));
        // the wrapped point dominates: image at r = 1 is J(-0.001)
        assert!((k.eval(x) - plain.eval(-0.001)).abs() < 1e-3 * k.eval(x));
    }

    #[test]
    fn default_wrap_radius_has_negligible_tail() {
        let k = KernelSpec::gaussian(400.0).periodized(1.0);
        let p = k.periodization().unwrap();
        // tail bound of the next omitted image pair
        let plain = KernelSpec::gaussian(400.0);
        assert!(2.0 * plain.eval(p.wrap_radius as f64 - 0.5) < 1e-14);
        // and one more image changes nothing measurable
        let k_more = KernelSpec::gaussian(400.0).periodized_with_radius(1.0, p.wrap_radius + 1);
        for &x in &[0.0, 0.25, 0.5, 0.99] {
            assert!((k.eval(x) - k_more.eval(x)).abs() <= 2.0 * plain.eval(p.wrap_radius as f64 - 0.5));
        }
    }

    #[test]
    fn truncation_radius_examples() {
        // closed-form value, frozen from evaluating the formula directly
        let a = truncation_radius(0.1, 1e-8).unwrap();
        assert!((a - 0.6294).abs() < 5e-4, "a = {a}");
        // residual check: the density actually equals eps at A
        let g = |x: f64, d: f64| (-(x * x) / (2.0 * d * d)).exp() / (d * (2.0 * PI).sqrt());
        assert!((g(a, 0.1) - 1e-8).abs() / 1e-8 < 1e-12);

        // the Figure-scale kernel width; oracle value from the closed form,
        // confirmed by the residual below
        let d = 1.0 / 800f64.sqrt();
        let a = truncation_radius(d, 1e-10).unwrap();
        assert!((a - 0.252235).abs() < 5e-5, "a = {a}");
        assert!((g(a, d) - 1e-10).abs() / 1e-10 < 1e-12);
    }

    #[test]
    fn truncation_radius_at_peak_is_zero() {
        let d = 0.05;
        let peak = 1.0 / (d * (2.0 * PI).sqrt());
        let a = truncation_radius(d, peak).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn truncation_radius_rejects_unreachable_threshold() {
        let d = 0.05;
        let peak = 1.0 / (d * (2.0 * PI).sqrt());
        match truncation_radius(d, peak * 2.0) {
            Err(Error::NoTruncation) => {}
            other => panic!("expected NoTruncation, got {other:?}"),
        }
    }

    #[test]
    fn mass_centered_is_one() {
        let k = KernelSpec::gaussian(400.0);
        let rule = composite_gauss_rule(16, 8, -1.0, 1.0).unwrap();
        assert!((k.mass(0.0, -1.0, 1.0, &rule) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mass_of_empty_interval_is_zero() {
        let k = KernelSpec::gaussian(400.0);
        let rule = gauss_rule(8, -1.0, 1.0).unwrap();
        assert_eq!(k.mass(0.3, 0.5, 0.5, &rule), 0.0);
    }

    #[test]
    fn mass_at_boundary_is_half() {
        // erf oracle: integral of J(1 - y) over [-1, 1] is erf(2 sqrt(s))/2
        let k = KernelSpec::gaussian(400.0);
        let rule = composite_gauss_rule(16, 16, -1.0, 1.0).unwrap();
        let got = k.mass(1.0, -1.0, 1.0, &rule);
        let want = 0.5 * statrs::function::erf::erf(2.0 * 400f64.sqrt());
        assert!((got - want).abs() < 1e-10, "got {got} want {want}");
        assert!((got - 0.5).abs() < 1e-10);
    }

    #[test]
    fn mass_matches_erf_oracle_at_interior_points() {
        let s = 400.0;
        let k = KernelSpec::gaussian(s);
        let rule = composite_gauss_rule(16, 16, -1.0, 1.0).unwrap();
        let rs = s.sqrt();
        for &x in &[-0.97, -0.5, 0.0, 0.33, 0.9] {
            let want = 0.5 * (statrs::function::erf::erf((x + 1.0) * rs)
                + statrs::function::erf::erf((1.0 - x) * rs));
            let got = k.mass(x, -1.0, 1.0, &rule);
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn mass_over_truncation_interval_captures_nearly_all() {
        let k = KernelSpec::gaussian(400.0);
        let a = truncation_radius(k.width(), 1e-14).unwrap();
        let rule = composite_gauss_rule(16, 8, -a, a).unwrap();
        assert!(k.mass(0.0, -a, a, &rule) >= 1.0 - 1e-10);
    }
}
