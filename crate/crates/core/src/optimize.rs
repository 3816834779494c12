//! Random states and unitaries, measurement parameterizations, and a
//! multi-start Nelder-Mead maximizer.
//!
//! Every restart draws from its own ChaCha stream derived from the
//! configured seed, so results do not depend on scheduling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::Povm;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::state::{DensityMatrix, SubsystemLayout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_evals: usize,
    /// Simplex-diameter convergence threshold.
    pub tol: f64,
    /// Outcome count for general POVM searches; `None` means `d^2`.
    pub outcome_count: Option<usize>,
    pub projective_only: bool,
    /// Stinespring ancilla dimension for channel searches; `None` means the
    /// local dimension.
    pub ancilla_dim: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            restarts: 16,
            max_evals: 5000,
            tol: 1e-8,
            outcome_count: None,
            projective_only: false,
            ancilla_dim: None,
        }
    }
}

impl OptimizerConfig {
    /// Budget used by the local-broadcast search.
    pub fn broadcast_default() -> Self {
        Self {
            restarts: 32,
            max_evals: 2000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_evals == 0 {
            return Err(Error::InvalidArgument("restarts and max_evals must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.outcome_count == Some(0) || self.ancilla_dim == Some(0) {
            return Err(Error::InvalidArgument("outcome count and ancilla dimension must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartAbort {
    pub restart: usize,
    pub n_evals: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// Best objective value seen; equals the maximum of `restart_values`.
    pub value: f64,
    pub params: Vec<f64>,
    pub n_evals: usize,
    /// Best value of every completed restart, seeded starts first.
    pub restart_values: Vec<f64>,
    pub seed: u64,
    pub best_restart: usize,
    pub seeded_starts: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aborted: Vec<RestartAbort>,
    /// The search stopped early because a start reached the known upper bound.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reached_ceiling: bool,
}

/// Independent RNG stream `stream` of the master `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fixing).
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMat> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let z = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { linalg::ONE };
        for i in 0..d {
            u[(i, k)] *= phase;
        }
    }
    Ok(u)
}

/// Random state of the given rank, induced by a `dim x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let layout = SubsystemLayout::new(dims.to_vec())?;
    let n = layout.total_dim();
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!("rank {rank} outside 1..={n}")));
    }
    let g = DMatrix::from_fn(n, rank, |_, _| complex_gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityMatrix::from_trusted(layout, m / c(tr, 0.0)))
}

/// Haar-random pure state vector.
pub fn random_pure_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Number of real parameters of a Hermitian generator on dimension `n`.
pub fn generator_len(n: usize) -> usize {
    n * n
}

/// Hermitian matrix from `n^2` reals: the diagonal, then `(re, im)` of each
/// strictly upper entry in row-major order.
pub fn hermitian_from_params(params: &[f64], n: usize) -> Result<CMat> {
    if params.len() != n * n {
        return Err(Error::ParamLength {
            expected: n * n,
            found: params.len(),
        });
    }
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = c(params[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = c(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    Ok(h)
}

pub fn params_from_hermitian(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let mut p = Vec::with_capacity(n * n);
    for i in 0..n {
        p.push(h[(i, i)].re);
    }
    for i in 0..n {
        for j in i + 1..n {
            p.push(h[(i, j)].re);
            p.push(h[(i, j)].im);
        }
    }
    p
}

/// Unitary `exp(i H(params))`.
pub fn unitary_from_params(params: &[f64], n: usize) -> Result<CMat> {
    Ok(linalg::expi_hermitian(&hermitian_from_params(params, n)?))
}

/// Rank-1 projectors onto the columns of `exp(i H(params))`; `d^2` params.
/// Zero parameters give the computational basis.
pub fn projective_povm(params: &[f64], d: usize) -> Result<Povm> {
    let u = unitary_from_params(params, d)?;
    Ok(Povm::from_basis_unchecked(&u))
}

/// `n_outcomes` rank-1 elements `M_i = v_i v_i^dagger` with `v_i` the conjugated
/// `i`-th row of the first `d` columns of `exp(i H(params))` (an
/// `n_outcomes x d` isometry, Naimark style); `n_outcomes^2` params.
pub fn general_povm(params: &[f64], d: usize, n_outcomes: usize) -> Result<Povm> {
    if n_outcomes < d {
        return Err(Error::InvalidArgument(format!(
            "{n_outcomes} rank-1 outcomes cannot resolve the identity in dimension {d}"
        )));
    }
    let w = unitary_from_params(params, n_outcomes)?;
    Ok(Povm::from_isometry_rows_unchecked(&w.columns(0, d).into_owned()))
}

/// Parameters of [`projective_povm`] reproducing the basis given by the
/// columns of `basis`.
pub fn projective_params_for_basis(basis: &CMat) -> Option<Vec<f64>> {
    linalg::unitary_log(basis).map(|h| params_from_hermitian(&h))
}

/// Parameters of [`general_povm`] with `n_outcomes` outcomes reproducing the
/// projective measurement onto the columns of `basis` (extra outcomes are zero).
pub fn general_params_for_basis(basis: &CMat, n_outcomes: usize) -> Option<Vec<f64>> {
    let d = basis.nrows();
    if n_outcomes < d {
        return None;
    }
    let mut w = linalg::identity(n_outcomes);
    w.view_mut((0, 0), (d, d)).copy_from(&basis.adjoint());
    linalg::unitary_log(&w).map(|h| params_from_hermitian(&h))
}

struct NmOutcome {
    x: Vec<f64>,
    f: f64,
    evals: usize,
    aborted: Option<String>,
}

/// Nelder-Mead minimization of `g`, re-expanding the simplex around the
/// incumbent after each convergence while evaluations remain.
fn nelder_mead(g: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize, tol: f64) -> NmOutcome {
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        g(x)
    };
    let f0 = eval(x0, &mut evals);
    if !f0.is_finite() {
        return NmOutcome {
            x: x0.to_vec(),
            f: f64::INFINITY,
            evals,
            aborted: Some(format!("non-finite objective {f0} at start point")),
        };
    }
    let mut best_x = x0.to_vec();
    let mut best_f = f0;
    if n == 0 {
        return NmOutcome { x: best_x, f: best_f, evals, aborted: None };
    }
    let ftol = 1e-14;
    let mut scale = step;
    loop {
        // simplex around the incumbent
        let mut simplex: Vec<Vec<f64>> = vec![best_x.clone()];
        let mut fs: Vec<f64> = vec![best_f];
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += scale;
            let fx = eval(&x, &mut evals);
            if !fx.is_finite() {
                return NmOutcome {
                    x: best_x,
                    f: best_f,
                    evals,
                    aborted: Some(format!("non-finite objective {fx} after {evals} evaluations")),
                };
            }
            simplex.push(x);
            fs.push(fx);
        }
        let start_best = best_f;
        let mut order: Vec<usize> = (0..=n).collect();
        while evals < max_evals {
            order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]).then(a.cmp(&b)));
            let (lo, hi, nh) = (order[0], order[n], order[n - 1]);
            let diameter = simplex
                .iter()
                .map(|x| {
                    x.iter()
                        .zip(&simplex[lo])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter <= tol || (fs[hi] - fs[lo]).abs() <= ftol * (1.0 + fs[lo].abs()) {
                break;
            }
            let mut centroid = vec![0.0; n];
            for &k in &order[..n] {
                for (cj, xj) in centroid.iter_mut().zip(&simplex[k]) {
                    *cj += xj / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[hi])
                    .map(|(cj, hj)| cj + t * (hj - cj))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = eval(&xr, &mut evals);
            if !fr.is_finite() {
                return NmOutcome {
                    x: simplex[lo].clone(),
                    f: fs[lo].min(best_f),
                    evals,
                    aborted: Some(format!("non-finite objective {fr} after {evals} evaluations")),
                };
            }
            if fr < fs[lo] {
                let xe = along(-2.0);
                let fe = eval(&xe, &mut evals);
                if fe.is_finite() && fe < fr {
                    simplex[hi] = xe;
                    fs[hi] = fe;
                } else {
                    simplex[hi] = xr;
                    fs[hi] = fr;
                }
            } else if fr < fs[nh] {
                simplex[hi] = xr;
                fs[hi] = fr;
            } else {
                let (xc, fc) = if fr < fs[hi] {
                    let xc = along(-0.5);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = along(0.5);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc.is_finite() && fc < fs[hi].min(fr) {
                    simplex[hi] = xc;
                    fs[hi] = fc;
                } else {
                    // shrink towards the best vertex
                    let xl = simplex[lo].clone();
                    for k in 0..=n {
                        if k == lo {
                            continue;
                        }
                        for (xj, lj) in simplex[k].iter_mut().zip(&xl) {
                            *xj = lj + 0.5 * (*xj - lj);
                        }
                        fs[k] = eval(&simplex[k], &mut evals);
                        if !fs[k].is_finite() {
                            return NmOutcome {
                                x: xl,
                                f: fs[lo].min(best_f),
                                evals,
                                aborted: Some(format!("non-finite objective after {evals} evaluations")),
                            };
                        }
                    }
                }
            }
        }
        let lo = (0..=n)
            .min_by(|&a, &b| fs[a].total_cmp(&fs[b]).then(a.cmp(&b)))
            .unwrap();
        if fs[lo] < best_f {
            best_f = fs[lo];
            best_x = simplex[lo].clone();
        }
        let improved = start_best - best_f > ftol * (1.0 + best_f.abs());
        if evals >= max_evals || !improved || scale < tol {
            break;
        }
        scale *= 0.5;
    }
    NmOutcome {
        x: best_x,
        f: best_f,
        evals,
        aborted: None,
    }
}

/// Initial simplex edge length.
const SIMPLEX_STEP: f64 = 0.5;

/// Multi-start derivative-free maximization.
///
/// Every entry of `seeds` is used as a start point, followed by
/// `cfg.restarts` starts drawn uniformly from `[-pi, pi]^param_dim`. The
/// returned value is never below the objective at any seed point.
pub fn maximize<F>(objective: F, param_dim: usize, cfg: &OptimizerConfig, seeds: &[Vec<f64>]) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    maximize_below(objective, param_dim, cfg, seeds, None)
}

/// Gap to a known upper bound below which a search counts as finished.
pub const CEILING_SLACK: f64 = 1e-12;

/// [`maximize`] for an objective known to be at most `ceiling`.
///
/// Seed points are evaluated first, then refined, then the random starts
/// run; the search returns after the first of these phases that comes
/// within [`CEILING_SLACK`] of the ceiling.
pub fn maximize_below<F>(
    objective: F,
    param_dim: usize,
    cfg: &OptimizerConfig,
    seeds: &[Vec<f64>],
    ceiling: Option<f64>,
) -> Result<OptimizationResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    for s in seeds {
        if s.len() != param_dim {
            return Err(Error::ParamLength {
                expected: param_dim,
                found: s.len(),
            });
        }
    }
    let at_ceiling = |v: f64| ceiling.is_some_and(|c| v >= c - CEILING_SLACK);

    let points: Vec<f64> = seeds.iter().map(|s| objective(s)).collect();
    if let Some((r, &v)) = points
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
    {
        if at_ceiling(v) {
            return Ok(OptimizationResult {
                value: v,
                params: seeds[r].clone(),
                n_evals: seeds.len(),
                restart_values: points.into_iter().filter(|v| v.is_finite()).collect(),
                seed: cfg.seed,
                best_restart: r,
                seeded_starts: seeds.len(),
                aborted: Vec::new(),
                reached_ceiling: true,
            });
        }
    }

    let neg = |x: &[f64]| -objective(x);
    let run = |r: usize| -> NmOutcome {
        let start = if r < seeds.len() {
            seeds[r].clone()
        } else {
            let mut rng = rng_for(cfg.seed, r as u64);
            (0..param_dim)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        };
        nelder_mead(&neg, &start, SIMPLEX_STEP, cfg.max_evals, cfg.tol)
    };
    let mut outcomes: Vec<NmOutcome> = (0..seeds.len()).into_par_iter().map(run).collect();
    let reached_ceiling = outcomes.iter().any(|o| o.f.is_finite() && at_ceiling(-o.f));
    if !reached_ceiling {
        let random: Vec<NmOutcome> = (seeds.len()..seeds.len() + cfg.restarts)
            .into_par_iter()
            .map(run)
            .collect();
        outcomes.extend(random);
    }
    let total = outcomes.len();

    let mut restart_values = Vec::with_capacity(total);
    let mut aborted = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut n_evals = seeds.len();
    for (r, o) in outcomes.iter().enumerate() {
        n_evals += o.evals;
        if let Some(reason) = &o.aborted {
            aborted.push(RestartAbort {
                restart: r,
                n_evals: o.evals,
                reason: reason.clone(),
            });
            if !o.f.is_finite() {
                continue;
            }
        }
        let v = -o.f;
        restart_values.push(v);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((r, v));
        }
    }
    let (best_restart, value) = best.ok_or_else(|| {
        Error::Optimizer(format!("all {total} restarts aborted: {}", aborted[0].reason))
    })?;
    Ok(OptimizationResult {
        value,
        params: outcomes[best_restart].x.clone(),
        n_evals,
        restart_values,
        seed: cfg.seed,
        best_restart,
        seeded_starts: seeds.len(),
        aborted,
        reached_ceiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::von_neumann_entropy;

    #[test]
    fn haar_in_dimension_one_is_a_phase() {
        let mut rng = rng_for(1, 0);
        let u = haar_unitary(1, &mut rng).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(haar_unitary(0, &mut rng).is_err());
    }

    #[test]
    fn haar_columns_are_orthonormal() {
        let mut rng = rng_for(2, 0);
        for d in 1..6 {
            let u = haar_unitary(d, &mut rng).unwrap();
            assert!(linalg::unitarity_defect(&u) <= 1e-12);
        }
    }

    #[test]
    fn haar_first_moment() {
        // E |<0|U|0>|^2 = 1/d, checked within a 3 sigma band
        let d = 3;
        let n = 10_000;
        let mut rng = rng_for(3, 0);
        let mean: f64 = (0..n)
            .map(|_| haar_unitary(d, &mut rng).unwrap()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        // E |U00|^4 = 2/(d(d+1)) for Haar unitaries
        let var = 2.0 / (d * (d + 1)) as f64 - 1.0 / (d * d) as f64;
        let band = 3.0 * (var / n as f64).sqrt();
        assert!((mean - 1.0 / d as f64).abs() <= band, "mean {mean}, band {band}");
    }

    #[test]
    fn haar_left_invariance_statistic() {
        // |<0|V U|0>|^2 must have the same mean as |<0|U|0>|^2 for fixed V
        let d = 2;
        let n = 10_000;
        let mut rng = rng_for(4, 0);
        let v = unitary_from_params(&[0.3, -0.2, 0.7, 0.4], 2).unwrap();
        let mean: f64 = (0..n)
            .map(|_| (&v * haar_unitary(d, &mut rng).unwrap())[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        let var = 1.0 / 3.0 - 0.25;
        let band = 3.0 * (var / n as f64).sqrt();
        assert!((mean - 0.5).abs() <= band, "mean {mean}, band {band}");
    }

    #[test]
    fn random_density_ranks() {
        let mut rng = rng_for(5, 0);
        let pure = random_density(&[2, 2], 1, &mut rng).unwrap();
        assert!(von_neumann_entropy(&pure).abs() <= 1e-10);
        let full = random_density(&[2, 3], 6, &mut rng).unwrap();
        assert!(full.eigenvalues()[0] > 0.0);
        for _ in 0..100 {
            let r = random_density(&[3], 2, &mut rng).unwrap();
            assert!((r.matrix().trace().re - 1.0).abs() <= 1e-12);
        }
        assert!(random_density(&[2], 3, &mut rng).is_err());
        assert!(random_density(&[2], 0, &mut rng).is_err());
    }

    #[test]
    fn zero_params_give_computational_basis() {
        let p = projective_povm(&[0.0; 9], 3).unwrap();
        for (k, m) in p.elements().iter().enumerate() {
            let mut e = CMat::zeros(3, 3);
            e[(k, k)] = linalg::ONE;
            assert!(linalg::max_abs_diff(m, &e) < 1e-15);
        }
    }

    #[test]
    fn pi_over_four_generator_gives_x_basis() {
        // H = (pi/4) sigma_y, whose (0,1) entry is -i pi/4
        let theta = std::f64::consts::FRAC_PI_4;
        let p = projective_povm(&[0.0, 0.0, 0.0, -theta], 2).unwrap();
        let plus = crate::state::qubit('+');
        let minus = crate::state::qubit('-');
        let e = p.elements();
        assert!(linalg::max_abs_diff(&e[0], minus.matrix()) < 1e-12);
        assert!(linalg::max_abs_diff(&e[1], plus.matrix()) < 1e-12);
    }

    #[test]
    fn povm_completeness_for_any_params() {
        let mut rng = rng_for(6, 0);
        for _ in 0..20 {
            let p: Vec<f64> = (0..16).map(|_| rng.random_range(-3.0..3.0)).collect();
            let proj = projective_povm(&p, 4).unwrap();
            assert!(proj.completeness_defect() <= 1e-10);
            let gen = general_povm(&p, 2, 4).unwrap();
            assert!(gen.completeness_defect() <= 1e-10);
            assert_eq!(gen.outcome_count(), 4);
        }
        assert!(matches!(projective_povm(&[0.0; 3], 2), Err(Error::ParamLength { .. })));
        assert!(general_povm(&[0.0; 1], 2, 1).is_err());
    }

    #[test]
    fn basis_seed_params_reproduce_the_basis() {
        let mut rng = rng_for(7, 0);
        let u = haar_unitary(3, &mut rng).unwrap();
        let p = projective_params_for_basis(&u).unwrap();
        let povm = projective_povm(&p, 3).unwrap();
        let target = Povm::from_basis_unchecked(&u);
        for (a, b) in povm.elements().iter().zip(target.elements()) {
            assert!(linalg::max_abs_diff(a, b) < 1e-10);
        }
        let g = general_params_for_basis(&u, 5).unwrap();
        let gp = general_povm(&g, 3, 5).unwrap();
        for (a, b) in gp.elements().iter().zip(target.elements()) {
            assert!(linalg::max_abs_diff(a, b) < 1e-10);
        }
        assert!(linalg::frobenius(&gp.elements()[3]) < 1e-10);
    }

    #[test]
    fn constant_objective() {
        let cfg = OptimizerConfig {
            restarts: 1,
            ..Default::default()
        };
        let r = maximize(|_| 3.5, 4, &cfg, &[]).unwrap();
        assert_eq!(r.value, 3.5);
        assert_eq!(r.restart_values.len(), 1);
    }

    #[test]
    fn concave_quadratic_maximum() {
        let cfg = OptimizerConfig {
            restarts: 3,
            ..Default::default()
        };
        let r = maximize(|x| 2.0 - x.iter().map(|v| v * v).sum::<f64>(), 3, &cfg, &[]).unwrap();
        assert!((r.value - 2.0).abs() <= 1e-6);
        assert_eq!(r.value, r.restart_values.iter().copied().fold(f64::MIN, f64::max));
    }

    #[test]
    fn seed_point_dominance() {
        // multimodal objective whose best peak sits exactly on the seed
        let f = |x: &[f64]| -> f64 {
            let d2 = (x[0] - 10.0).powi(2) + (x[1] + 10.0).powi(2);
            if d2 < 1e-30 { 5.0 } else { (x[0].sin() * x[1].cos()).min(1.0) }
        };
        let cfg = OptimizerConfig { restarts: 2, max_evals: 200, ..Default::default() };
        let r = maximize(f, 2, &cfg, &[vec![10.0, -10.0]]).unwrap();
        assert_eq!(r.value, 5.0);
        assert_eq!(r.best_restart, 0);
    }

    #[test]
    fn non_finite_objective_aborts_restart() {
        let cfg = OptimizerConfig { restarts: 2, max_evals: 100, ..Default::default() };
        let r = maximize(|x| if x[0] > 0.0 { f64::NAN } else { -x[0] * x[0] }, 1, &cfg, &[vec![-1.0]]);
        let r = r.unwrap();
        assert!(r.value.is_finite());
        assert!(!r.aborted.is_empty() || r.restart_values.len() == 3);
        let all_nan = maximize(|_| f64::NAN, 1, &cfg, &[]);
        assert!(matches!(all_nan, Err(Error::Optimizer(_))));
    }

    #[test]
    fn ceiling_stops_at_seed() {
        let cfg = OptimizerConfig::default();
        let f = |x: &[f64]| 1.0 - x.iter().map(|v| v * v).sum::<f64>();
        let r = maximize_below(f, 3, &cfg, &[vec![0.5; 3], vec![0.0; 3]], Some(1.0)).unwrap();
        assert!(r.reached_ceiling);
        assert_eq!(r.n_evals, 2);
        assert_eq!(r.best_restart, 1);
        assert_eq!(r.value, 1.0);

        let r = maximize_below(f, 3, &cfg, &[vec![0.5; 3]], Some(1.0)).unwrap();
        assert!(r.reached_ceiling);
        assert_eq!(r.restart_values.len(), 1);

        let r = maximize_below(f, 3, &cfg, &[vec![0.5; 3]], Some(2.0)).unwrap();
        assert!(!r.reached_ceiling);
        assert_eq!(r.restart_values.len(), 1 + cfg.restarts);
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let f = |x: &[f64]| (x[0] * 1.3).sin() + (x[1] - 0.2).cos() * x[0].cos();
        let cfg = OptimizerConfig { restarts: 5, max_evals: 300, ..Default::default() };
        let a = maximize(f, 2, &cfg, &[]).unwrap();
        let b = maximize(f, 2, &cfg, &[]).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| maximize(f, 2, &cfg, &[]).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn config_validation() {
        let mut cfg = OptimizerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.restarts = 0;
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig { tol: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
