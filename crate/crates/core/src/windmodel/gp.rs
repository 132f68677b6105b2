//! Closed-form GP conditioning shared by plain regression and the Laplace
//! predictive step.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::kernel::{cross, gram};
use super::{ModelError, ModelHyperparams, StationObservation, WindField, WindPosterior, WindVector};
use crate::geo::GeoPoint;

/// Optional prior mean field; `None` means a zero-mean prior.
pub type PriorMean = Option<Arc<dyn WindField>>;

pub(crate) fn prior_mean_at(prior: &PriorMean, p: &GeoPoint) -> WindVector {
    prior.as_ref().map_or(WindVector::CALM, |m| m.wind_at(p))
}

/// Averages observations that share an identical location, keeping the
/// order of first appearance.
pub fn merge_duplicate_stations(stations: &[StationObservation]) -> Vec<StationObservation> {
    let mut merged: Vec<(StationObservation, usize)> = Vec::with_capacity(stations.len());
    for s in stations {
        match merged.iter_mut().find(|(m, _)| m.site == s.site) {
            Some((m, count)) => {
                m.wind = m.wind + s.wind;
                *count += 1;
            }
            None => merged.push((*s, 1)),
        }
    }
    merged
        .into_iter()
        .map(|(mut m, count)| {
            m.wind = m.wind * (1.0 / count as f64);
            m
        })
        .collect()
}

fn most_correlated_pair(sites: &[GeoPoint], h: &ModelHyperparams) -> (usize, usize) {
    let k = gram(sites, h);
    let mut best = (0, 0, f64::NEG_INFINITY);
    for i in 0..sites.len() {
        for j in 0..i {
            let r = k[(i, j)] / (k[(i, i)] * k[(j, j)]).sqrt();
            if r > best.2 {
                best = (j, i, r);
            }
        }
    }
    (best.0, best.1)
}

pub(crate) fn ill_conditioned(sites: &[GeoPoint], h: &ModelHyperparams) -> ModelError {
    let (i, j) = most_correlated_pair(sites, h);
    ModelError::IllConditioned {
        first_index: i,
        second_index: j,
        first: sites[i],
        second: sites[j],
    }
}

/// Lower Cholesky factor of `K + jitter I + diag(noise)`.
fn factor(
    base: &DMatrix<f64>,
    noise: &[f64],
    sites: &[GeoPoint],
    h: &ModelHyperparams,
) -> Result<DMatrix<f64>, ModelError> {
    let mut a = base.clone();
    for (i, n) in noise.iter().enumerate() {
        a[(i, i)] += h.jitter + n;
    }
    nalgebra::Cholesky::new(a)
        .map(|c| c.l())
        .ok_or_else(|| ill_conditioned(sites, h))
}

fn solve_spd(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let y = l.solve_lower_triangular(b).expect("non-singular factor");
    l.tr_solve_lower_triangular(&y).expect("non-singular factor")
}

/// A GP per wind component conditioned on targets with per-site,
/// per-component Gaussian noise. Both components share the kernel.
#[derive(Clone)]
pub(crate) struct ConditionedGp {
    sites: Vec<GeoPoint>,
    h: ModelHyperparams,
    prior: PriorMean,
    /// Cholesky factor per component; identical when the noise is.
    factors: [Arc<DMatrix<f64>>; 2],
    alpha: [DVector<f64>; 2],
}

impl ConditionedGp {
    /// `targets` are residuals against the prior mean.
    pub(crate) fn new(
        sites: Vec<GeoPoint>,
        targets: [Vec<f64>; 2],
        noise: [Vec<f64>; 2],
        h: ModelHyperparams,
        prior: PriorMean,
    ) -> Result<Self, ModelError> {
        let base = gram(&sites, &h);
        let lu = Arc::new(factor(&base, &noise[0], &sites, &h)?);
        let lv = if noise[0] == noise[1] {
            Arc::clone(&lu)
        } else {
            Arc::new(factor(&base, &noise[1], &sites, &h)?)
        };
        let alpha_u = solve_spd(&lu, &DVector::from_vec(targets[0].clone()));
        let alpha_v = solve_spd(&lv, &DVector::from_vec(targets[1].clone()));
        Ok(Self {
            sites,
            h,
            prior,
            factors: [lu, lv],
            alpha: [alpha_u, alpha_v],
        })
    }

    pub(crate) fn predict(&self, queries: &[GeoPoint]) -> WindPosterior {
        let kq = cross(queries, &self.sites, &self.h);
        let prior_var = self.h.signal_variance();
        let mut var = [vec![prior_var; queries.len()], vec![prior_var; queries.len()]];
        let kq_t = kq.transpose();
        for c in 0..2 {
            if c == 1 && Arc::ptr_eq(&self.factors[0], &self.factors[1]) {
                var[1] = var[0].clone();
                break;
            }
            let v = self.factors[c].solve_lower_triangular(&kq_t).expect("non-singular factor");
            for (q, var_q) in var[c].iter_mut().enumerate() {
                *var_q = (prior_var - v.column(q).norm_squared()).max(0.0);
            }
        }
        let mu = kq.clone() * &self.alpha[0];
        let mv = kq * &self.alpha[1];
        let mean = queries
            .iter()
            .enumerate()
            .map(|(q, p)| prior_mean_at(&self.prior, p) + WindVector::new(mu[q], mv[q]))
            .collect();
        WindPosterior {
            sites: queries.to_vec(),
            mean,
            sd: (0..queries.len()).map(|q| [var[0][q].sqrt(), var[1][q].sqrt()]).collect(),
        }
    }

    pub(crate) fn mean_at(&self, p: &GeoPoint) -> WindVector {
        let mut u = 0.0;
        let mut v = 0.0;
        for (i, s) in self.sites.iter().enumerate() {
            let k = super::kernel::kernel_eval(p, s, &self.h);
            u += k * self.alpha[0][i];
            v += k * self.alpha[1][i];
        }
        prior_mean_at(&self.prior, p) + WindVector::new(u, v)
    }
}

/// Station-only GP regression, fitted once and queried many times.
#[derive(Clone)]
pub struct GpRegression {
    inner: ConditionedGp,
}

impl GpRegression {
    pub fn fit(stations: &[StationObservation], h: &ModelHyperparams) -> Result<Self, ModelError> {
        Self::fit_with_prior(stations, h, None)
    }

    pub fn fit_with_prior(
        stations: &[StationObservation],
        h: &ModelHyperparams,
        prior: PriorMean,
    ) -> Result<Self, ModelError> {
        h.validate()?;
        if stations.is_empty() {
            return Err(ModelError::NoStations);
        }
        let merged = merge_duplicate_stations(stations);
        if let Some(bad) = merged.iter().find(|s| !s.wind.is_valid()) {
            return Err(ModelError::InvalidInput(format!("station wind {:?} out of range", bad.wind)));
        }
        let sites: Vec<GeoPoint> = merged.iter().map(|s| s.site).collect();
        let residual: Vec<WindVector> = merged
            .iter()
            .map(|s| s.wind - prior_mean_at(&prior, &s.site))
            .collect();
        let targets = [
            residual.iter().map(|w| w.u_kt).collect(),
            residual.iter().map(|w| w.v_kt).collect(),
        ];
        let noise = vec![h.station_noise_variance(); sites.len()];
        let inner = ConditionedGp::new(sites, targets, [noise.clone(), noise], *h, prior)?;
        Ok(Self { inner })
    }

    /// Fits observations that each carry their own noise variance (kt^2).
    /// Sites are not merged; coincident sites are kept apart by their noise.
    pub fn fit_with_noise(
        observations: &[StationObservation],
        noise_var: &[f64],
        h: &ModelHyperparams,
        prior: PriorMean,
    ) -> Result<Self, ModelError> {
        h.validate()?;
        if observations.is_empty() {
            return Err(ModelError::NoStations);
        }
        if noise_var.len() != observations.len() || noise_var.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(ModelError::InvalidInput("need one positive noise variance per observation".into()));
        }
        let sites: Vec<GeoPoint> = observations.iter().map(|s| s.site).collect();
        let residual: Vec<WindVector> = observations
            .iter()
            .map(|s| s.wind - prior_mean_at(&prior, &s.site))
            .collect();
        let targets = [
            residual.iter().map(|w| w.u_kt).collect(),
            residual.iter().map(|w| w.v_kt).collect(),
        ];
        let inner = ConditionedGp::new(sites, targets, [noise_var.to_vec(), noise_var.to_vec()], *h, prior)?;
        Ok(Self { inner })
    }

    pub fn predict(&self, queries: &[GeoPoint]) -> WindPosterior {
        self.inner.predict(queries)
    }
}

impl WindField for GpRegression {
    fn wind_at(&self, p: &GeoPoint) -> WindVector {
        self.inner.mean_at(p)
    }
}

/// Closed-form GP posterior of the wind at `queries` given station reports,
/// each component independently with noise variance `station_noise_sd^2`.
pub fn gp_regress(
    stations: &[StationObservation],
    queries: &[GeoPoint],
    h: &ModelHyperparams,
) -> Result<WindPosterior, ModelError> {
    Ok(GpRegression::fit(stations, h)?.predict(queries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::project_nm;
    use crate::windmodel::kernel::kernel_eval;

    fn site(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon, 30000.0).unwrap()
    }

    #[test]
    fn interpolates_datum_as_noise_vanishes() {
        let s = site(40.0, -100.0);
        let obs = [StationObservation::new(s, WindVector::new(35.0, -12.0))];
        let h = ModelHyperparams {
            station_noise_sd_kt: 1e-4,
            jitter: 1e-9,
            ..Default::default()
        };
        let post = gp_regress(&obs, &[s], &h).unwrap();
        assert!((post.mean[0].u_kt - 35.0).abs() < 1e-6);
        assert!((post.mean[0].v_kt + 12.0).abs() < 1e-6);
        assert!(post.sd[0][0] < 1e-3 && post.sd[0][1] < 1e-3);
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let h = ModelHyperparams::default();
        let s = site(40.0, -100.0);
        let far = project_nm(&s, 45.0, 10.0 * h.lengthscale_h_nm);
        let post = gp_regress(&[StationObservation::new(s, WindVector::new(60.0, 20.0))], &[far], &h).unwrap();
        assert!(post.mean[0].speed() < 1e-6);
        assert!((post.sd[0][0] - h.signal_sd_kt).abs() < 1e-6);
    }

    #[test]
    fn scalar_closed_form() {
        let h = ModelHyperparams::default();
        let s = site(40.0, -100.0);
        let q = project_nm(&s, 200.0, 180.0);
        let t = WindVector::new(42.0, -7.5);
        let post = gp_regress(&[StationObservation::new(s, t)], &[q], &h).unwrap();
        let kss = h.signal_variance() + h.jitter + h.station_noise_variance();
        let kqs = kernel_eval(&q, &s, &h);
        assert!((post.mean[0].u_kt - kqs / kss * t.u_kt).abs() < 1e-10);
        assert!((post.mean[0].v_kt - kqs / kss * t.v_kt).abs() < 1e-10);
        let var = h.signal_variance() - kqs * kqs / kss;
        assert!((post.sd[0][0] - var.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn duplicates_are_averaged() {
        let s = site(40.0, -100.0);
        let merged = merge_duplicate_stations(&[
            StationObservation::new(s, WindVector::new(10.0, 0.0)),
            StationObservation::new(site(41.0, -100.0), WindVector::new(5.0, 5.0)),
            StationObservation::new(s, WindVector::new(20.0, 4.0)),
        ]);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].wind, WindVector::new(15.0, 2.0));
    }

    #[test]
    fn ill_conditioned_names_pair() {
        // Noise and jitter tiny enough that two nearly co-located stations
        // make the Gram numerically singular.
        let h = ModelHyperparams {
            station_noise_sd_kt: 1e-12,
            jitter: 1e-30,
            ..Default::default()
        };
        let a = site(40.0, -100.0);
        let b = project_nm(&a, 10.0, 1e-9);
        let c = site(43.0, -95.0);
        let obs = [
            StationObservation::new(c, WindVector::new(1.0, 1.0)),
            StationObservation::new(a, WindVector::new(1.0, 1.0)),
            StationObservation::new(b, WindVector::new(-1.0, 1.0)),
        ];
        match gp_regress(&obs, &[c], &h) {
            Err(ModelError::IllConditioned { first_index, second_index, .. }) => {
                assert_eq!((first_index, second_index), (1, 2));
            }
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn sd_never_exceeds_prior() {
        let h = ModelHyperparams::default();
        let obs: Vec<_> = (0..8)
            .map(|i| StationObservation::new(site(35.0 + i as f64, -110.0 + 2.0 * i as f64), WindVector::new(i as f64, 3.0)))
            .collect();
        let queries: Vec<_> = (0..50).map(|i| site(30.0 + 0.3 * i as f64, -115.0 + 0.5 * i as f64)).collect();
        let post = gp_regress(&obs, &queries, &h).unwrap();
        assert!(post.sd.iter().all(|s| s[0] <= h.signal_sd_kt + 1e-9 && s[1] <= h.signal_sd_kt + 1e-9));
    }
}
