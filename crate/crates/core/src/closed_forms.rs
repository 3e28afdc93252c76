//! Exact values: sphere eigenvalues, spherical-harmonic multiplicities and
//! the mixed Steklov eigenvalues of the Euclidean annulus `B_L \ B_1`.

use crate::error::SolveError;

/// Eigenvalue `k (n - 2 + k)` of the round sphere `S^{n-1}` for degree-`k`
/// harmonics.
pub fn lambda_k(n: usize, k: usize) -> f64 {
    (k * (n - 2 + k)) as f64
}

/// The limiting value `k + n - 2` approached by the mode-`k` eigenvalue.
pub fn sharp_bound(n: usize, k: usize) -> f64 {
    (k + n - 2) as f64
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-`k` spherical harmonics on `S^{n-1}`:
/// `C(n+k-1, k) - C(n+k-3, k-2)`.
pub fn multiplicity(n: usize, k: usize) -> u64 {
    assert!(n >= 2, "dimension must be at least 2");
    let (n, k) = (n as u64, k as u64);
    let all = binomial(n + k - 1, k);
    let lower = if k >= 2 { binomial(n + k - 3, k - 2) } else { 0 };
    (all - lower) as u64
}

/// The Euclidean annulus between radii 1 and `outer_radius` in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSpec {
    dimension: usize,
    outer_radius: f64,
}

impl AnnulusSpec {
    pub fn new(dimension: usize, outer_radius: f64) -> Result<Self, SolveError> {
        if dimension < 3 {
            return Err(SolveError::Domain(format!(
                "annulus formulas need n >= 3, got n = {dimension}"
            )));
        }
        if !(outer_radius > 1.0) || !outer_radius.is_finite() {
            return Err(SolveError::Domain(format!(
                "annulus outer radius must exceed 1, got {outer_radius}"
            )));
        }
        Ok(Self {
            dimension,
            outer_radius,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    /// `x = L^{-(n + 2k - 2)}`, the small parameter both formulas are
    /// written in.
    fn decay(&self, k: usize) -> f64 {
        let p = (self.dimension + 2 * k - 2) as f64;
        (-p * self.outer_radius.ln()).exp()
    }
}

/// Steklov eigenvalue on the inner sphere with `f = 0` on the outer sphere.
pub fn annulus_sigma_d(spec: AnnulusSpec, k: usize) -> f64 {
    let m = sharp_bound(spec.dimension, k);
    let x = spec.decay(k);
    (m + k as f64 * x) / (1.0 - x)
}

/// Steklov eigenvalue on the inner sphere with zero normal derivative on
/// the outer sphere.
pub fn annulus_sigma_n(spec: AnnulusSpec, k: usize) -> f64 {
    let m = sharp_bound(spec.dimension, k);
    let kf = k as f64;
    let x = spec.decay(k);
    kf * m * (1.0 - x) / (kf + m * x)
}

/// `k + n - 2 - annulus_sigma_n`, evaluated without cancellation.
pub fn annulus_sigma_n_deficit(spec: AnnulusSpec, k: usize) -> f64 {
    let m = sharp_bound(spec.dimension, k);
    let kf = k as f64;
    let x = spec.decay(k);
    m * x * (m + kf) / (kf + m * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus(n: usize, l: f64) -> AnnulusSpec {
        AnnulusSpec::new(n, l).unwrap()
    }

    // the formulas exactly as printed, in rational-friendly form
    fn printed_d(n: usize, k: usize, l: f64) -> f64 {
        let p = (2 * k + n - 2) as i32;
        let lp = l.powi(p);
        k as f64 / (lp - 1.0) + (k + n - 2) as f64 * lp / (lp - 1.0)
    }

    fn printed_n(n: usize, k: usize, l: f64) -> f64 {
        let p = (n + 2 * k - 2) as i32;
        let lp = l.powi(p);
        let kf = k as f64;
        kf * ((n + k - 2) as f64 * (lp - 1.0)) / (kf * lp + (n + k - 2) as f64)
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_k(3, 1), 2.0);
        assert_eq!(lambda_k(7, 0), 0.0);
        assert_eq!(lambda_k(4, 2), 8.0);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(3, 0), 1);
        assert_eq!(multiplicity(3, 1), 3);
        assert_eq!(multiplicity(3, 2), 5);
        for k in 0..20 {
            assert_eq!(multiplicity(3, k), 2 * k as u64 + 1);
        }
        assert_eq!(multiplicity(2, 0), 1);
        for k in 1..20 {
            assert_eq!(multiplicity(2, k), 2);
        }
        for n in 2..10 {
            assert_eq!(multiplicity(n, 1), n as u64);
        }
        // harmonic quadratics on S^3: 10 quadratics minus |x|^2
        assert_eq!(multiplicity(4, 2), 9);
    }

    #[test]
    fn dirichlet_examples() {
        assert!((annulus_sigma_d(annulus(3, 2.0), 1) - 17.0 / 7.0).abs() < 1e-14);
        assert!((annulus_sigma_d(annulus(3, 2.0), 0) - 2.0).abs() < 1e-14);
        assert!((annulus_sigma_d(annulus(3, 2.0), 2) - 98.0 / 31.0).abs() < 1e-14);
        assert!((annulus_sigma_d(annulus(3, 1e6), 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn neumann_examples() {
        assert!((annulus_sigma_n(annulus(3, 2.0), 1) - 1.4).abs() < 1e-14);
        assert_eq!(annulus_sigma_n(annulus(5, 3.0), 0), 0.0);
        assert!((annulus_sigma_n(annulus(3, 11.0), 1) - 2660.0 / 1333.0).abs() < 1e-14);
        assert!((annulus_sigma_d(annulus(3, 11.0), 1) - 2663.0 / 1330.0).abs() < 1e-14);
    }

    #[test]
    fn stable_forms_match_printed_forms() {
        for n in 3..7 {
            for k in 0..6 {
                for l in [1.5, 2.0, 5.0, 10.0] {
                    let a = annulus(n, l);
                    let d = annulus_sigma_d(a, k);
                    let nn = annulus_sigma_n(a, k);
                    assert!((d - printed_d(n, k, l)).abs() <= 1e-13 * d);
                    assert!((nn - printed_n(n, k, l)).abs() <= 1e-13 * nn.max(1.0));
                    let deficit = sharp_bound(n, k) - nn;
                    assert!((annulus_sigma_n_deficit(a, k) - deficit).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn huge_exponents_do_not_overflow() {
        let a = annulus(5, 1e3);
        let d = annulus_sigma_d(a, 200);
        assert!(d.is_finite());
        assert_eq!(d, sharp_bound(5, 200));
    }

    #[test]
    fn rejects_bad_annuli() {
        assert!(AnnulusSpec::new(2, 2.0).is_err());
        assert!(AnnulusSpec::new(3, 1.0).is_err());
        assert!(AnnulusSpec::new(3, 0.5).is_err());
    }
}
