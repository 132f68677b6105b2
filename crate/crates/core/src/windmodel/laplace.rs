//! Fusion of station winds and aircraft ground-velocity reports.
//!
//! The latent state is the true wind `W` at every distinct site plus the
//! wind `t_j` each aircraft actually flew through. Stations tie their site's
//! `W` to the reported wind with a Gaussian likelihood; aircraft tie `t_j`
//! to their site's `W` the same way, and tie `t_j` to the reported ground
//! velocity `v_j` through the wind-triangle potential
//! `exp(-beta (|v_j - t_j| - a_j)^2)`: the air velocity `v_j - t_j` must
//! have the reported airspeed `a_j`, in any direction.
//!
//! The potential is ring-shaped and non-convex, so the mode is found with a
//! damped Newton iteration and the posterior is approximated by a Gaussian
//! there.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::gp::{prior_mean_at, ConditionedGp, GpRegression, PriorMean};
use super::kernel::{cross, gram};
use super::{AircraftReport, ModelError, ModelHyperparams, StationObservation, WindPosterior, WindVector};
use crate::geo::GeoPoint;

/// How query-site variances are derived from the Laplace approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosteriorVariance {
    /// Condition the GP on the mode with one effective noise variance per
    /// site and component (the likelihood curvature with each aircraft's
    /// `t_j` marginalized out, cross-component terms dropped).
    #[default]
    EffectiveNoise,
    /// Propagate the full inverse Hessian of the latent state.
    FullCovariance,
}

#[derive(Clone)]
pub struct LaplaceOptions {
    /// Gradient-norm tolerance at the mode.
    pub tol: f64,
    pub max_newton_iter: usize,
    pub backtrack: f64,
    pub armijo: f64,
    pub gradient_fallback_steps: usize,
    /// Also start from the wind implied by assuming heading equals track.
    pub track_aligned_start: bool,
    pub variance: PosteriorVariance,
    /// Report the marginal of a fresh noisy observation instead of the latent wind.
    pub include_observation_noise: bool,
    pub prior_mean: PriorMean,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_newton_iter: 100,
            backtrack: 0.5,
            armijo: 1e-4,
            gradient_fallback_steps: 500,
            track_aligned_start: true,
            variance: PosteriorVariance::EffectiveNoise,
            include_observation_noise: false,
            prior_mean: None,
        }
    }
}

impl fmt::Debug for LaplaceOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceOptions")
            .field("tol", &self.tol)
            .field("max_newton_iter", &self.max_newton_iter)
            .field("backtrack", &self.backtrack)
            .field("armijo", &self.armijo)
            .field("gradient_fallback_steps", &self.gradient_fallback_steps)
            .field("track_aligned_start", &self.track_aligned_start)
            .field("variance", &self.variance)
            .field("include_observation_noise", &self.include_observation_noise)
            .field("prior_mean", &self.prior_mean.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Copy)]
struct AircraftTerm {
    site: usize,
    ground_velocity: WindVector,
    airspeed: f64,
}

/// Indexing of the stacked latent vector
/// `[W_u (sites); W_v (sites); T_u (aircraft); T_v (aircraft)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentLayout {
    pub n_sites: usize,
    pub n_aircraft: usize,
}

impl LatentLayout {
    pub fn len(&self) -> usize {
        2 * self.n_sites + 2 * self.n_aircraft
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn w(&self, site: usize, component: usize) -> usize {
        component * self.n_sites + site
    }

    pub fn t(&self, aircraft: usize, component: usize) -> usize {
        2 * self.n_sites + component * self.n_aircraft + aircraft
    }
}

/// The negative log joint density of latent winds and observations, up to
/// constants, with its derivatives.
pub struct FusionProblem {
    h: ModelHyperparams,
    sites: Vec<GeoPoint>,
    prior_at_sites: Vec<WindVector>,
    prior_mean: PriorMean,
    /// `(K + jitter I)^-1` over `sites`.
    k_inv: DMatrix<f64>,
    stations: Vec<(usize, WindVector)>,
    aircraft: Vec<AircraftTerm>,
    layout: LatentLayout,
}

impl FusionProblem {
    pub fn new(
        stations: &[StationObservation],
        aircraft: &[AircraftReport],
        h: &ModelHyperparams,
        prior_mean: PriorMean,
    ) -> Result<Self, ModelError> {
        h.validate()?;
        if stations.is_empty() {
            return Err(ModelError::NoStations);
        }
        let merged = super::gp::merge_duplicate_stations(stations);
        let mut sites: Vec<GeoPoint> = Vec::new();
        let site_index = |p: &GeoPoint, sites: &mut Vec<GeoPoint>| -> usize {
            match sites.iter().position(|s| s == p) {
                Some(i) => i,
                None => {
                    sites.push(*p);
                    sites.len() - 1
                }
            }
        };
        let mut station_terms = Vec::with_capacity(merged.len());
        for s in &merged {
            if !s.wind.is_valid() {
                return Err(ModelError::InvalidInput(format!("station wind {:?} out of range", s.wind)));
            }
            station_terms.push((site_index(&s.site, &mut sites), s.wind));
        }
        let mut aircraft_terms = Vec::with_capacity(aircraft.len());
        for a in aircraft {
            if !(a.airspeed_kt > 0.0) || !a.ground_velocity.is_valid() {
                return Err(ModelError::InvalidInput(format!("aircraft report {} out of range", a.aircraft_id)));
            }
            aircraft_terms.push(AircraftTerm {
                site: site_index(&a.site, &mut sites),
                ground_velocity: a.ground_velocity,
                airspeed: a.airspeed_kt,
            });
        }
        let mut k = gram(&sites, h);
        for i in 0..sites.len() {
            k[(i, i)] += h.jitter;
        }
        let k_inv = nalgebra::Cholesky::new(k)
            .ok_or_else(|| super::gp::ill_conditioned(&sites, h))?
            .inverse();
        // The computed inverse drifts from symmetry when K is ill-conditioned;
        // the gradient and the Cholesky-based Newton solve must see one matrix.
        let k_inv = (&k_inv + k_inv.transpose()) * 0.5;
        let prior_at_sites = sites.iter().map(|p| prior_mean_at(&prior_mean, p)).collect();
        let layout = LatentLayout {
            n_sites: sites.len(),
            n_aircraft: aircraft_terms.len(),
        };
        Ok(Self {
            h: *h,
            sites,
            prior_at_sites,
            prior_mean,
            k_inv,
            stations: station_terms,
            aircraft: aircraft_terms,
            layout,
        })
    }

    pub fn layout(&self) -> LatentLayout {
        self.layout
    }

    /// Distinct sites: merged stations first, then new aircraft locations.
    pub fn sites(&self) -> &[GeoPoint] {
        &self.sites
    }

    pub fn aircraft_site(&self, j: usize) -> usize {
        self.aircraft[j].site
    }

    fn inv_var(&self) -> f64 {
        1.0 / self.h.station_noise_variance()
    }

    fn prior_residual(&self, x: &DVector<f64>, c: usize) -> DVector<f64> {
        let n = self.layout.n_sites;
        DVector::from_fn(n, |i, _| x[self.layout.w(i, c)] - self.prior_at_sites[i].component(c))
    }

    fn t_of(&self, x: &DVector<f64>, j: usize) -> WindVector {
        WindVector::new(x[self.layout.t(j, 0)], x[self.layout.t(j, 1)])
    }

    fn w_of(&self, x: &DVector<f64>, i: usize) -> WindVector {
        WindVector::new(x[self.layout.w(i, 0)], x[self.layout.w(i, 1)])
    }

    /// Energy; lower is more probable.
    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.layout.len(), "latent length");
        let mut e = 0.0;
        for c in 0..2 {
            let r = self.prior_residual(x, c);
            e += 0.5 * r.dot(&(&self.k_inv * &r));
        }
        let half_prec = 0.5 * self.inv_var();
        for &(i, t) in &self.stations {
            let d = t - self.w_of(x, i);
            e += half_prec * (d.u_kt * d.u_kt + d.v_kt * d.v_kt);
        }
        for (j, a) in self.aircraft.iter().enumerate() {
            let t = self.t_of(x, j);
            let d = t - self.w_of(x, a.site);
            e += half_prec * (d.u_kt * d.u_kt + d.v_kt * d.v_kt);
            let ring = (a.ground_velocity - t).speed() - a.airspeed;
            e += self.h.aircraft_beta * ring * ring;
        }
        e
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let l = self.layout;
        let mut g = DVector::zeros(l.len());
        for c in 0..2 {
            let r = self.prior_residual(x, c);
            let kr = &self.k_inv * &r;
            for i in 0..l.n_sites {
                g[l.w(i, c)] += kr[i];
            }
        }
        let prec = self.inv_var();
        for &(i, t) in &self.stations {
            let d = self.w_of(x, i) - t;
            g[l.w(i, 0)] += prec * d.u_kt;
            g[l.w(i, 1)] += prec * d.v_kt;
        }
        for (j, a) in self.aircraft.iter().enumerate() {
            let t = self.t_of(x, j);
            let d = t - self.w_of(x, a.site);
            g[l.t(j, 0)] += prec * d.u_kt;
            g[l.t(j, 1)] += prec * d.v_kt;
            g[l.w(a.site, 0)] -= prec * d.u_kt;
            g[l.w(a.site, 1)] -= prec * d.v_kt;
            let air = a.ground_velocity - t;
            let r = air.speed();
            if r > 1e-12 {
                let coef = -2.0 * self.h.aircraft_beta * (r - a.airspeed) / r;
                g[l.t(j, 0)] += coef * air.u_kt;
                g[l.t(j, 1)] += coef * air.v_kt;
            }
        }
        g
    }

    /// Hessian of the wind-triangle term with respect to one aircraft's `t`.
    fn ring_hessian(&self, a: &AircraftTerm, t: WindVector) -> [[f64; 2]; 2] {
        let air = a.ground_velocity - t;
        let r = air.speed().max(1e-12);
        let d = [air.u_kt / r, air.v_kt / r];
        let tangential = (r - a.airspeed) / r;
        let two_beta = 2.0 * self.h.aircraft_beta;
        let mut hm = [[0.0; 2]; 2];
        for p in 0..2 {
            for q in 0..2 {
                let delta = if p == q { 1.0 } else { 0.0 };
                hm[p][q] = two_beta * (d[p] * d[q] + tangential * (delta - d[p] * d[q]));
            }
        }
        hm
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let l = self.layout;
        let n = l.n_sites;
        let mut hm = DMatrix::zeros(l.len(), l.len());
        for c in 0..2 {
            hm.view_mut((c * n, c * n), (n, n)).copy_from(&self.k_inv);
        }
        let prec = self.inv_var();
        for &(i, _) in &self.stations {
            for c in 0..2 {
                hm[(l.w(i, c), l.w(i, c))] += prec;
            }
        }
        for (j, a) in self.aircraft.iter().enumerate() {
            for c in 0..2 {
                let (wi, ti) = (l.w(a.site, c), l.t(j, c));
                hm[(wi, wi)] += prec;
                hm[(ti, ti)] += prec;
                hm[(wi, ti)] -= prec;
                hm[(ti, wi)] -= prec;
            }
            let rh = self.ring_hessian(a, self.t_of(x, j));
            for p in 0..2 {
                for q in 0..2 {
                    hm[(l.t(j, p), l.t(j, q))] += rh[p][q];
                }
            }
        }
        hm
    }

    /// Latent vector from winds at the sites and at the aircraft.
    pub fn pack(&self, site_winds: &[WindVector], aircraft_winds: &[WindVector]) -> DVector<f64> {
        let l = self.layout;
        let mut x = DVector::zeros(l.len());
        for (i, w) in site_winds.iter().enumerate() {
            x[l.w(i, 0)] = w.u_kt;
            x[l.w(i, 1)] = w.v_kt;
        }
        for (j, t) in aircraft_winds.iter().enumerate() {
            x[l.t(j, 0)] = t.u_kt;
            x[l.t(j, 1)] = t.v_kt;
        }
        x
    }

    pub fn unpack(&self, x: &DVector<f64>) -> (Vec<WindVector>, Vec<WindVector>) {
        (
            (0..self.layout.n_sites).map(|i| self.w_of(x, i)).collect(),
            (0..self.layout.n_aircraft).map(|j| self.t_of(x, j)).collect(),
        )
    }

    /// Initial state from station-only regression: `W` at its posterior mean,
    /// each aircraft's wind equal to the `W` at its site.
    fn station_start(&self, stations: &[StationObservation]) -> Result<DVector<f64>, ModelError> {
        let gp = GpRegression::fit_with_prior(stations, &self.h, self.prior_mean.clone())?;
        let w = gp.predict(&self.sites).mean;
        let t: Vec<WindVector> = self.aircraft.iter().map(|a| w[a.site]).collect();
        Ok(self.pack(&w, &t))
    }

    /// Alternative start: each aircraft flew with heading equal to its track.
    fn track_aligned_start(&self, base: &DVector<f64>) -> DVector<f64> {
        let (mut w, _) = self.unpack(base);
        let t: Vec<WindVector> = self
            .aircraft
            .iter()
            .map(|a| {
                let v = a.ground_velocity;
                v - v * (a.airspeed / v.speed())
            })
            .collect();
        let station_sites: Vec<usize> = self.stations.iter().map(|s| s.0).collect();
        for (a, tj) in self.aircraft.iter().zip(&t) {
            if !station_sites.contains(&a.site) {
                w[a.site] = *tj;
            }
        }
        self.pack(&w, &t)
    }
}

/// Energy of a latent state; see [`FusionProblem::energy`].
pub fn neg_log_posterior(problem: &FusionProblem, latent: &DVector<f64>) -> f64 {
    problem.energy(latent)
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub energy: f64,
    pub grad_norm: f64,
    pub newton_iterations: usize,
    pub used_gradient_fallback: bool,
}

fn line_search(
    problem: &FusionProblem,
    x: &DVector<f64>,
    e0: f64,
    g: &DVector<f64>,
    dir: &DVector<f64>,
    opts: &LaplaceOptions,
) -> Option<(DVector<f64>, f64)> {
    let slope = g.dot(dir);
    if slope >= 0.0 {
        return None;
    }
    // Slack for rounding in the energy once the decrease is below machine precision.
    let slack = 1e-12 * (1.0 + e0.abs());
    let mut step = 1.0;
    while step > 1e-12 {
        let cand = x + dir * step;
        let e = problem.energy(&cand);
        if e.is_finite() && e <= e0 + opts.armijo * step * slope + slack {
            return Some((cand, e));
        }
        step *= opts.backtrack;
    }
    None
}

fn newton_direction(hm: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = hm.diagonal().amax().max(1e-300);
    let mut shift = 0.0;
    for _ in 0..30 {
        let mut m = hm.clone();
        if shift > 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] += shift;
            }
        }
        if let Some(ch) = nalgebra::Cholesky::new(m) {
            return Some(-ch.solve(g));
        }
        shift = if shift == 0.0 { 1e-8 * scale } else { shift * 10.0 };
    }
    None
}

fn newton_phase(
    problem: &FusionProblem,
    x: &mut DVector<f64>,
    opts: &LaplaceOptions,
    iterations: &mut usize,
) -> bool {
    let mut e = problem.energy(x);
    for _ in 0..opts.max_newton_iter {
        let g = problem.gradient(x);
        if g.norm() < opts.tol {
            return true;
        }
        *iterations += 1;
        let Some(dir) = newton_direction(problem.hessian(x), &g) else {
            return false;
        };
        match line_search(problem, x, e, &g, &dir, opts) {
            Some((nx, ne)) => {
                *x = nx;
                e = ne;
            }
            None => return false,
        }
    }
    problem.gradient(x).norm() < opts.tol
}

fn gradient_phase(problem: &FusionProblem, x: &mut DVector<f64>, opts: &LaplaceOptions) {
    let mut e = problem.energy(x);
    let mut step = 1.0 / problem.hessian(x).diagonal().amax().max(1e-12);
    for _ in 0..opts.gradient_fallback_steps {
        let g = problem.gradient(x);
        if g.norm() < opts.tol {
            return;
        }
        let dir = -&g;
        // Grow the trial step a little each iteration; backtracking trims it.
        step *= 2.0;
        let slope = g.dot(&dir);
        loop {
            let cand = &*x + &dir * step;
            let ne = problem.energy(&cand);
            if ne <= e + opts.armijo * step * slope {
                *x = cand;
                e = ne;
                break;
            }
            step *= opts.backtrack;
            if step < 1e-300 {
                return;
            }
        }
    }
}

/// Finds a local minimum of the energy from `start`.
pub fn minimize(
    problem: &FusionProblem,
    start: DVector<f64>,
    opts: &LaplaceOptions,
) -> Result<(DVector<f64>, SolveStats), ModelError> {
    let mut x = start;
    let mut iterations = 0;
    let mut fallback = false;
    if !newton_phase(problem, &mut x, opts, &mut iterations) {
        fallback = true;
        gradient_phase(problem, &mut x, opts);
        newton_phase(problem, &mut x, opts, &mut iterations);
    }
    let grad_norm = problem.gradient(&x).norm();
    if !(grad_norm < opts.tol) {
        return Err(ModelError::NotConverged { grad_norm, iterations });
    }
    Ok((
        x.clone(),
        SolveStats {
            energy: problem.energy(&x),
            grad_norm,
            newton_iterations: iterations,
            used_gradient_fallback: fallback,
        },
    ))
}

/// A converged Laplace approximation, ready to predict at arbitrary sites.
pub struct LaplaceFit {
    problem: FusionProblem,
    mode: DVector<f64>,
    stats: SolveStats,
    gp: ConditionedGp,
    /// `(K + jitter I)^-1` Sigma_W `(K + jitter I)^-1` per component, for the
    /// full-covariance variant.
    full: Option<[DMatrix<f64>; 2]>,
    observation_noise: bool,
}

impl LaplaceFit {
    pub fn mode(&self) -> &DVector<f64> {
        &self.mode
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn problem(&self) -> &FusionProblem {
        &self.problem
    }

    /// Mode of the wind each aircraft flew through.
    pub fn aircraft_winds(&self) -> Vec<WindVector> {
        self.problem.unpack(&self.mode).1
    }

    pub fn site_winds(&self) -> Vec<WindVector> {
        self.problem.unpack(&self.mode).0
    }

    pub fn predict(&self, queries: &[GeoPoint]) -> WindPosterior {
        let mut post = self.gp.predict(queries);
        if let Some(full) = &self.full {
            let h = &self.problem.h;
            let kq = cross(queries, &self.problem.sites, h);
            for (q, sd) in post.sd.iter_mut().enumerate() {
                let kqq = kq.row(q).transpose();
                let a = &self.problem.k_inv * &kqq;
                for c in 0..2 {
                    let var = h.signal_variance() - kqq.dot(&a) + kqq.dot(&(&full[c] * &kqq));
                    sd[c] = var.max(0.0).sqrt();
                }
            }
        }
        if self.observation_noise {
            let nv = self.problem.h.station_noise_variance();
            for sd in post.sd.iter_mut() {
                for s in sd.iter_mut() {
                    *s = (*s * *s + nv).sqrt();
                }
            }
        }
        post
    }
}

/// Runs the mode search from every configured start, keeps the lowest-energy
/// converged mode, checks it is a minimum, and builds the predictive GP.
pub fn laplace_fit(
    stations: &[StationObservation],
    aircraft: &[AircraftReport],
    h: &ModelHyperparams,
    opts: &LaplaceOptions,
) -> Result<LaplaceFit, ModelError> {
    let problem = FusionProblem::new(stations, aircraft, h, opts.prior_mean.clone())?;
    let first = problem.station_start(stations)?;
    let mut starts = vec![first.clone()];
    if opts.track_aligned_start && !aircraft.is_empty() {
        starts.push(problem.track_aligned_start(&first));
    }
    let mut best: Option<(DVector<f64>, SolveStats)> = None;
    let mut first_err = None;
    for s in starts {
        match minimize(&problem, s, opts) {
            Ok((x, st)) => {
                if best.as_ref().is_none_or(|(_, b)| st.energy < b.energy) {
                    best = Some((x, st));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((mode, stats)) = best else {
        return Err(first_err.expect("at least one start"));
    };

    let hess = problem.hessian(&mode);
    let chol = match nalgebra::Cholesky::new(hess.clone()) {
        Some(c) => c,
        None => {
            let mut shifted = hess.clone();
            let eps = 1e-10 * hess.diagonal().amax();
            for i in 0..shifted.nrows() {
                shifted[(i, i)] += eps;
            }
            nalgebra::Cholesky::new(shifted).ok_or_else(|| ModelError::SaddlePoint {
                min_eigenvalue: hess.clone().symmetric_eigenvalues().min(),
            })?
        }
    };

    let gp = effective_noise_gp(&problem, &mode)?;
    let full = match opts.variance {
        PosteriorVariance::EffectiveNoise => None,
        PosteriorVariance::FullCovariance => {
            let sigma = chol.inverse();
            let n = problem.layout.n_sites;
            let block = |c: usize| {
                let s = sigma.view((c * n, c * n), (n, n)).into_owned();
                &problem.k_inv * s * &problem.k_inv
            };
            Some([block(0), block(1)])
        }
    };
    Ok(LaplaceFit {
        problem,
        mode,
        stats,
        gp,
        full,
        observation_noise: opts.include_observation_noise,
    })
}

/// Pseudo-observations `y = (W - m) + g / lambda` with noise `1 / lambda`,
/// where `g` is the likelihood gradient with respect to `W` at the mode and
/// `lambda` its curvature. At a stationary point `(K + N)^-1 y = K^-1 (W - m)`
/// for any positive `N`, so the predictive mean is exact and only the
/// variance depends on the diagonal curvature approximation.
fn effective_noise_gp(problem: &FusionProblem, mode: &DVector<f64>) -> Result<ConditionedGp, ModelError> {
    let n = problem.layout.n_sites;
    let prec = problem.inv_var();
    let floor = 1e-6 * prec;
    let mut grad = vec![[0.0f64; 2]; n];
    let mut curv = vec![[0.0f64; 2]; n];
    for &(i, t) in &problem.stations {
        let d = t - problem.w_of(mode, i);
        for c in 0..2 {
            grad[i][c] += prec * d.component(c);
            curv[i][c] += prec;
        }
    }
    for (j, a) in problem.aircraft.iter().enumerate() {
        let t = problem.t_of(mode, j);
        let d = t - problem.w_of(mode, a.site);
        let rh = problem.ring_hessian(a, t);
        // Schur complement of the t block: prec I - prec^2 (prec I + H_ring)^-1
        let m = [[prec + rh[0][0], rh[0][1]], [rh[1][0], prec + rh[1][1]]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let inv_diag = if det > 0.0 {
            [m[1][1] / det, m[0][0] / det]
        } else {
            [1.0 / prec, 1.0 / prec]
        };
        for c in 0..2 {
            grad[a.site][c] += prec * d.component(c);
            curv[a.site][c] += prec - prec * prec * inv_diag[c];
        }
    }
    let mut targets = [Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut noise = [Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let w = problem.w_of(mode, i) - problem.prior_at_sites[i];
        for c in 0..2 {
            let lambda = curv[i][c].max(floor);
            targets[c].push(w.component(c) + grad[i][c] / lambda);
            noise[c].push(1.0 / lambda);
        }
    }
    ConditionedGp::new(problem.sites.clone(), targets, noise, problem.h, problem.prior_mean.clone())
}

/// Laplace-approximate posterior of the wind at `queries` given station
/// winds and aircraft ground-velocity reports.
pub fn laplace_fuse(
    stations: &[StationObservation],
    aircraft: &[AircraftReport],
    queries: &[GeoPoint],
    h: &ModelHyperparams,
    opts: &LaplaceOptions,
) -> Result<WindPosterior, ModelError> {
    Ok(laplace_fit(stations, aircraft, h, opts)?.predict(queries))
}
