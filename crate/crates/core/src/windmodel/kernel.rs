//! Anisotropic squared-exponential covariance over site locations.

use nalgebra::DMatrix;

use super::ModelHyperparams;
use crate::geo::{chord_distance_nm, GeoPoint};

/// Squared scaled distance between two sites: horizontal chord distance over
/// the horizontal lengthscale plus altitude difference over the vertical one.
pub fn scaled_sq_distance(a: &GeoPoint, b: &GeoPoint, h: &ModelHyperparams) -> f64 {
    let dh = chord_distance_nm(a, b) / h.lengthscale_h_nm;
    let dv = (a.alt_ft - b.alt_ft) / h.lengthscale_v_ft;
    dh * dh + dv * dv
}

/// Prior covariance (kt^2) between the same wind component at two sites.
pub fn kernel_eval(a: &GeoPoint, b: &GeoPoint, h: &ModelHyperparams) -> f64 {
    h.signal_variance() * (-0.5 * scaled_sq_distance(a, b, h)).exp()
}

/// Gram matrix over `sites`, without jitter or noise.
pub fn gram(sites: &[GeoPoint], h: &ModelHyperparams) -> DMatrix<f64> {
    let n = sites.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = h.signal_variance();
        for j in 0..i {
            let v = kernel_eval(&sites[i], &sites[j], h);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Cross-covariance with rows indexed by `rows` and columns by `cols`.
pub fn cross(rows: &[GeoPoint], cols: &[GeoPoint], h: &ModelHyperparams) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| kernel_eval(&rows[i], &cols[j], h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{project_nm, GeoPoint, EARTH_RADIUS_NM};
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_distance_is_signal_variance() {
        let h = ModelHyperparams::default();
        let p = GeoPoint::new(40.0, -100.0, 30000.0).unwrap();
        assert_eq!(kernel_eval(&p, &p, &h), 900.0);
    }

    #[test]
    fn one_lengthscale_apart() {
        let h = ModelHyperparams::default();
        let a = GeoPoint::new(0.0, 0.0, 30000.0).unwrap();
        // Chord of exactly one lengthscale: arc = 2R asin(L / 2R).
        let arc = 2.0 * EARTH_RADIUS_NM * (h.lengthscale_h_nm / (2.0 * EARTH_RADIUS_NM)).asin();
        let b = project_nm(&a, 90.0, arc);
        let k = kernel_eval(&a, &b, &h);
        assert!((k - 900.0 * (-0.5f64).exp()).abs() < 1e-9, "{k}");
        assert!((k / 900.0 - 0.6065).abs() < 1e-4);
        // Arc separation of one lengthscale differs only at the 1e-4 level.
        let c = project_nm(&a, 90.0, h.lengthscale_h_nm);
        assert!((kernel_eval(&a, &c, &h) / 900.0 - 0.6065).abs() < 1e-3);
        // Vertical separation of one lengthscale gives the same value.
        let d = a.with_alt(30000.0 + h.lengthscale_v_ft);
        assert!((kernel_eval(&a, &d, &h) - 900.0 * (-0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn decays_and_is_symmetric() {
        let h = ModelHyperparams::default();
        let a = GeoPoint::surface(35.0, -100.0);
        let b = GeoPoint::surface(45.0, -60.0);
        assert_eq!(kernel_eval(&a, &b, &h), kernel_eval(&b, &a, &h));
        assert!(kernel_eval(&a, &b, &h) < 1e-6);
    }

    #[test]
    fn gram_is_psd() {
        let h = ModelHyperparams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let sites: Vec<GeoPoint> = (0..20)
                .map(|_| {
                    GeoPoint::new(rng.random_range(30.0..45.0), rng.random_range(-120.0..-100.0), rng.random_range(20000.0..40000.0))
                        .unwrap()
                })
                .collect();
            let k = gram(&sites, &h);
            let eig = k.symmetric_eigenvalues();
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8, "min eigenvalue {min}");
        }
    }
}
