//! Broadcast states on the layout `[A, A', B, B']`: checks, the classical
//! cloning construction, one-sided cloning of CQ structure, the CQ embedding
//! of an ensemble, and a local-channel search.

use serde::{Deserialize, Serialize};

use crate::channels::{petz_recovery, tensor_channels, KrausChannel};
use crate::classify;
use crate::correlations::{mutual_information, Bipartition, Ensemble, Side};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::optimize::{maximize_below, OptimizerConfig};
use crate::state::{self, permute_subsystems, tensor, trace_distance_matrix, DensityMatrix, SubsystemLayout};
use crate::tol;

/// Converts between the construction order `[A, B, A', B']` and the broadcast
/// order `[A, A', B, B']` (the map is its own inverse).
pub fn regroup(sigma: &DensityMatrix) -> Result<DensityMatrix> {
    if sigma.dims().len() != 4 {
        return Err(Error::InvalidLayout(format!(
            "four subsystems required, found {}",
            sigma.dims().len()
        )));
    }
    permute_subsystems(sigma, &[0, 2, 1, 3])
}

/// `rho (x) rho` on `[A, A', B, B']`.
pub fn two_copy_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_bipartite(rho)?;
    regroup(&tensor(rho, rho))
}

fn check_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidSubsystems(format!(
            "bipartite state required, found {} subsystems",
            rho.dims().len()
        )));
    }
    Ok(())
}

fn check_layout(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<()> {
    check_bipartite(rho)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    if sigma.dims() != [da, da, db, db] {
        return Err(Error::InvalidLayout(format!(
            "broadcast state on {:?} does not match [{da}, {da}, {db}, {db}]",
            sigma.dims()
        )));
    }
    Ok(())
}

/// Mutual information across the party cut `AA' : BB'`.
pub fn party_mutual_information(sigma: &DensityMatrix) -> Result<f64> {
    mutual_information(sigma, &Bipartition::new(vec![0, 1], vec![2, 3])?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastCheck {
    pub valid: bool,
    /// Trace distance of `sigma_{AB}` from `rho`.
    pub residual_ab: f64,
    /// Trace distance of `sigma_{A'B'}` from `rho`.
    pub residual_copy: f64,
    pub tol: f64,
}

/// Checks `sigma_{AB} = sigma_{A'B'} = rho` within `BROADCAST` in trace distance.
pub fn verify_broadcast(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<BroadcastCheck> {
    check_layout(sigma, rho)?;
    let ab = sigma.reduce(&[0, 2])?;
    let copy = sigma.reduce(&[1, 3])?;
    let residual_ab = trace_distance_matrix(ab.matrix(), rho.matrix());
    let residual_copy = trace_distance_matrix(copy.matrix(), rho.matrix());
    Ok(BroadcastCheck {
        valid: residual_ab <= tol::BROADCAST && residual_copy <= tol::BROADCAST,
        residual_ab,
        residual_copy,
        tol: tol::BROADCAST,
    })
}

fn check_basis(b: &CMat) -> Result<()> {
    let defect = linalg::unitarity_defect(b);
    if b.nrows() != b.ncols() || defect > tol::NUM {
        return Err(Error::NotOrthonormal(defect));
    }
    Ok(())
}

/// Classical cloner `|i><i'| -> delta_{ii'} |ii><ii|` in the columns of `basis`,
/// as a channel `X -> X X'`.
pub fn cloner(basis: &CMat) -> Result<KrausChannel> {
    check_basis(basis)?;
    let d = basis.nrows();
    let kraus = (0..d)
        .map(|i| {
            let u = basis.columns(i, 1).into_owned();
            linalg::kron(&u, &u) * u.adjoint()
        })
        .collect();
    Ok(KrausChannel::from_trusted(kraus, vec![d, d]))
}

/// Local cloners for a state that is diagonal in `basis_a (x) basis_b`.
pub fn cc_broadcast_channels(basis_a: &CMat, basis_b: &CMat) -> Result<(KrausChannel, KrausChannel)> {
    Ok((cloner(basis_a)?, cloner(basis_b)?))
}

/// `(theta_a (x) theta_b)[rho]` with channels `A -> A A'` and `B -> B B'`.
pub fn local_broadcast(rho: &DensityMatrix, theta_a: &KrausChannel, theta_b: &KrausChannel) -> Result<DensityMatrix> {
    check_bipartite(rho)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    if theta_a.d_in() != da || theta_b.d_in() != db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: theta_a.d_in() * theta_b.d_in(),
        });
    }
    if theta_a.out_dims().len() != 2 || theta_b.out_dims().len() != 2 {
        return Err(Error::InvalidLayout("local broadcast channels must output two subsystems".into()));
    }
    tensor_channels(theta_a, theta_b).apply(rho)
}

/// Broadcast state of a state classical on `side` in `basis`: the classical
/// index is copied and each conditional state is duplicated, e.g. for side A
/// `sum_i p_i |ii><ii| (x) sigma_i (x) sigma_i`. Not locally generated in
/// general.
pub fn one_sided_clone_state(rho: &DensityMatrix, basis: &CMat, side: Side) -> Result<DensityMatrix> {
    check_bipartite(rho)?;
    check_basis(basis)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let d = rho.dims()[side.index()];
    if basis.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.nrows(),
        });
    }
    let oriented = match side {
        Side::A => rho.clone(),
        Side::B => permute_subsystems(rho, &[1, 0])?,
    };
    let other = oriented.dims()[1];
    let mut total = CMat::zeros(da * da * db * db, da * da * db * db);
    for i in 0..d {
        let u = basis.columns(i, 1).into_owned();
        let proj = linalg::kron(&u, &linalg::identity(other));
        let cond = linalg::hermitize(&(proj.adjoint() * oriented.matrix() * &proj));
        let p = cond.trace().re;
        if p <= 0.0 {
            continue;
        }
        let copies = linalg::kron(&cond, &cond) / c(p, 0.0);
        let clone = linalg::outer(&linalg::kron(&u, &u), &linalg::kron(&u, &u));
        total += match side {
            Side::A => linalg::kron(&clone, &copies),
            Side::B => linalg::kron(&copies, &clone),
        };
    }
    let layout = SubsystemLayout::new(vec![da, da, db, db])?;
    Ok(DensityMatrix::from_trusted(layout, total))
}

/// CQ embedding `sum_i p_i |i><i| (x) sigma_i` of an ensemble with positive
/// weights.
pub fn embed_ensemble(e: &Ensemble) -> Result<DensityMatrix> {
    if let Some(p) = e.probs().iter().find(|&&p| p <= 0.0) {
        return Err(Error::InvalidDistribution(format!("ensemble weight {p} is not positive")));
    }
    let parts: Vec<DensityMatrix> = (0..e.len())
        .map(|i| tensor(&DensityMatrix::basis(&[e.len()], &[i]).expect("index"), &e.states()[i]))
        .collect();
    DensityMatrix::mixture(e.probs(), &parts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualInformationCheck {
    /// `|I(sigma_{AA':BB'}) - I(rho)| <= NUM`.
    pub holds: bool,
    pub mi_deficit: f64,
    /// Local maps reconstructed from `sigma` when `holds`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_maps: Option<(KrausChannel, KrausChannel)>,
    /// Trace distance between `sigma` and the local maps applied to `rho`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproduction_error: Option<f64>,
}

/// Petz recoveries of the partial traces `AA' -> A` and `BB' -> B`, with the
/// marginals `sigma_{AA'}` and `sigma_{BB'}` as references, as channels
/// `A -> AA'` and `B -> BB'`.
pub fn recovered_local_maps(sigma: &DensityMatrix) -> Result<(KrausChannel, KrausChannel)> {
    if sigma.dims().len() != 4 {
        return Err(Error::InvalidLayout("four subsystems required".into()));
    }
    let dims = sigma.dims();
    let side = |keep: [usize; 2]| -> Result<KrausChannel> {
        let reference = sigma.reduce(&keep)?;
        let tr = KrausChannel::partial_trace(&[dims[keep[0]], dims[keep[1]]], &[0])?;
        let out = petz_recovery(&tr, &reference)?.to_channel();
        out.with_out_dims(vec![dims[keep[0]], dims[keep[1]]])
    };
    Ok((side([0, 1])?, side([2, 3])?))
}

/// Mutual-information test for a broadcast state: the deficit
/// `I(sigma_{AA':BB'}) - I(rho)` vanishes exactly when `sigma` is reachable
/// from `rho` by local maps, which are then reconstructed and checked.
pub fn equal_information_check(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<EqualInformationCheck> {
    let check = verify_broadcast(sigma, rho)?;
    if !check.valid {
        return Err(Error::NotBroadcast(check.residual_ab, check.residual_copy));
    }
    let mi_deficit = party_mutual_information(sigma)? - mutual_information(rho, &Bipartition::pair())?;
    let holds = mi_deficit.abs() <= tol::NUM;
    let (local_maps, reproduction_error) = if holds {
        let (ta, tb) = recovered_local_maps(sigma)?;
        let rebuilt = local_broadcast(rho, &ta, &tb)?;
        let err = state::trace_distance(&rebuilt, sigma)?;
        (Some((ta, tb)), Some(err))
    } else {
        (None, None)
    };
    Ok(EqualInformationCheck {
        holds,
        mi_deficit,
        local_maps,
        reproduction_error,
    })
}

/// Result of a broadcast construction or search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastCandidate {
    /// State on `[A, A', B, B']`.
    pub sigma: DensityMatrix,
    pub theta_a: KrausChannel,
    pub theta_b: KrausChannel,
    /// Trace distances of `sigma_{AB}` and `sigma_{A'B'}` from the source.
    pub marginal_residuals: (f64, f64),
    pub marginal_fidelities: (f64, f64),
    /// `I(sigma_{AA':BB'}) - I(rho)`.
    pub mi_deficit: f64,
    /// `I(sigma_{AB})` and `I(sigma_{A'B'})`.
    pub copy_mutual_information: (f64, f64),
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchMeta>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchMeta {
    pub seed: u64,
    pub restarts: usize,
    pub max_evals: usize,
    pub ancilla: (usize, usize),
    pub seeded_starts: usize,
    pub best_restart: usize,
    pub n_evals: usize,
    pub merit: f64,
}

impl BroadcastCandidate {
    /// Evaluates the local channels on `rho`.
    pub fn from_channels(rho: &DensityMatrix, theta_a: KrausChannel, theta_b: KrausChannel) -> Result<Self> {
        let sigma = local_broadcast(rho, &theta_a, &theta_b)?;
        let check = verify_broadcast(&sigma, rho)?;
        let ab = sigma.reduce(&[0, 2])?;
        let copy = sigma.reduce(&[1, 3])?;
        let pair = Bipartition::pair();
        let i = mutual_information(rho, &pair)?;
        Ok(Self {
            marginal_residuals: (check.residual_ab, check.residual_copy),
            marginal_fidelities: (state::fidelity(&ab, rho)?, state::fidelity(&copy, rho)?),
            mi_deficit: party_mutual_information(&sigma)? - i,
            copy_mutual_information: (mutual_information(&ab, &pair)?, mutual_information(&copy, &pair)?),
            valid: check.valid,
            sigma,
            theta_a,
            theta_b,
            search: None,
        })
    }

    /// Larger of the two marginal residuals.
    pub fn residual(&self) -> f64 {
        self.marginal_residuals.0.max(self.marginal_residuals.1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("candidate serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Parameter block of one side: real and imaginary parts of an unconstrained
/// `(d^2 * ancilla) x d` matrix whose polar isometry is the Stinespring
/// dilation of `A -> A A'`.
struct SideParam {
    d: usize,
    ancilla: usize,
}

impl SideParam {
    fn rows(&self) -> usize {
        self.d * self.d * self.ancilla
    }

    fn len(&self) -> usize {
        2 * self.rows() * self.d
    }

    fn matrix(&self, x: &[f64]) -> CMat {
        CMat::from_fn(self.rows(), self.d, |r, s| {
            let k = 2 * (r * self.d + s);
            c(x[k], x[k + 1])
        })
    }

    fn params(&self, v: &CMat) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.rows() {
            for s in 0..self.d {
                out.push(v[(r, s)].re);
                out.push(v[(r, s)].im);
            }
        }
        out
    }

    fn isometry(&self, x: &[f64]) -> Option<CMat> {
        linalg::polar_isometry(&self.matrix(x), 1e-12)
    }

    fn channel(&self, v: &CMat) -> KrausChannel {
        KrausChannel::from_stinespring_unchecked(v, self.d * self.d, self.ancilla)
            .with_out_dims(vec![self.d, self.d])
            .expect("output split")
    }

    /// Kraus operators of `X -> Tr_{copy}` and `X -> Tr_{orig}` composed with the
    /// dilation `v`.
    fn marginal_kraus(&self, v: &CMat) -> (Vec<CMat>, Vec<CMat>) {
        let d = self.d;
        let anc = self.ancilla;
        let mut keep_orig = Vec::with_capacity(d * anc);
        let mut keep_copy = Vec::with_capacity(d * anc);
        for other in 0..d {
            for m in 0..anc {
                keep_orig.push(CMat::from_fn(d, d, |a, i| v[((a * d + other) * anc + m, i)]));
                keep_copy.push(CMat::from_fn(d, d, |a, i| v[((other * d + a) * anc + m, i)]));
            }
        }
        (keep_orig, keep_copy)
    }

    /// Dilation of the cloner in the columns of `basis`; with `ancilla < d` the
    /// copies are partly coherent.
    fn cloning_dilation(&self, basis: &CMat) -> CMat {
        let d = self.d;
        let mut v = CMat::zeros(self.rows(), d);
        for i in 0..d {
            let u = basis.columns(i, 1).into_owned();
            let uu = linalg::kron(&u, &u);
            let k = uu * u.adjoint();
            let slot = i % self.ancilla;
            for out in 0..d * d {
                for col in 0..d {
                    v[(out * self.ancilla + slot, col)] += k[(out, col)];
                }
            }
        }
        v
    }

    /// Dilation of `X -> X (x) tau` (needs `ancilla >= rank(tau)`).
    fn attachment_dilation(&self, tau: &CMat) -> Option<CMat> {
        let d = self.d;
        let e = linalg::herm_eigen(tau);
        let mut v = CMat::zeros(self.rows(), d);
        let mut slot = 0;
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= tol::SUPPORT {
                continue;
            }
            if slot >= self.ancilla {
                return None;
            }
            for i in 0..d {
                for b in 0..d {
                    v[((i * d + b) * self.ancilla + slot, i)] = e.vectors[(b, k)] * lam.sqrt();
                }
            }
            slot += 1;
        }
        Some(v)
    }
}

fn apply_pair(ka: &[CMat], kb: &[CMat], rho: &CMat) -> CMat {
    let n = rho.nrows();
    let mut out = CMat::zeros(n, n);
    for a in ka {
        for b in kb {
            let k = linalg::kron(a, b);
            out += &k * rho * k.adjoint();
        }
    }
    out
}

/// Searches local channels `A -> AA'`, `B -> BB'` (Stinespring form with
/// ancilla dimension `cfg.ancilla_dim`, default the local dimension) for a
/// broadcast state of `rho`, maximizing `-(residual_AB + residual_A'B')`.
///
/// Start points include classical cloning in the classifier's bases and the
/// attachment of fresh copies of the marginals.
pub fn broadcast_search(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<BroadcastCandidate> {
    check_bipartite(rho)?;
    cfg.validate()?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let sa = SideParam {
        d: da,
        ancilla: cfg.ancilla_dim.unwrap_or(da),
    };
    let sb = SideParam {
        d: db,
        ancilla: cfg.ancilla_dim.unwrap_or(db),
    };
    let (la, lb) = (sa.len(), sb.len());
    let target = rho.matrix().clone();

    let merit_of = |va: &CMat, vb: &CMat| -> f64 {
        let (a0, a1) = sa.marginal_kraus(va);
        let (b0, b1) = sb.marginal_kraus(vb);
        let ab = apply_pair(&a0, &b0, &target);
        let copy = apply_pair(&a1, &b1, &target);
        -(trace_distance_matrix(&ab, &target) + trace_distance_matrix(&copy, &target))
    };
    let objective = |x: &[f64]| -> f64 {
        match (sa.isometry(&x[..la]), sb.isometry(&x[la..])) {
            (Some(va), Some(vb)) => merit_of(&va, &vb),
            _ => -4.0,
        }
    };

    let verdict = classify::is_cc(rho, tol::CLASSICAL)?;
    let mut side_seeds_a = Vec::new();
    let mut side_seeds_b = Vec::new();
    if let Some(u) = &verdict.basis_a {
        side_seeds_a.push(sa.cloning_dilation(u));
    }
    if let Some(v) = &verdict.basis_b {
        side_seeds_b.push(sb.cloning_dilation(v));
    }
    if let Some(v) = sa.attachment_dilation(rho.reduce(&[0])?.matrix()) {
        side_seeds_a.push(v);
    }
    if let Some(v) = sb.attachment_dilation(rho.reduce(&[1])?.matrix()) {
        side_seeds_b.push(v);
    }
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for va in &side_seeds_a {
        for vb in &side_seeds_b {
            let s = [sa.params(va), sb.params(vb)].concat();
            if !seeds.contains(&s) {
                seeds.push(s);
            }
        }
    }

    let res = maximize_below(objective, la + lb, cfg, &seeds, Some(0.0))?;
    let va = sa.isometry(&res.params[..la]).ok_or_else(|| Error::Optimizer("degenerate dilation".into()))?;
    let vb = sb.isometry(&res.params[la..]).ok_or_else(|| Error::Optimizer("degenerate dilation".into()))?;
    let mut cand = BroadcastCandidate::from_channels(rho, sa.channel(&va), sb.channel(&vb))?;
    cand.search = Some(SearchMeta {
        seed: cfg.seed,
        restarts: cfg.restarts,
        max_evals: cfg.max_evals,
        ancilla: (sa.ancilla, sb.ancilla),
        seeded_starts: res.seeded_starts,
        best_restart: res.best_restart,
        n_evals: res.n_evals,
        merit: res.value,
    });
    Ok(cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{commute_residual, is_cc, Kind};
    use crate::optimize::{haar_unitary, random_density, rng_for};
    use crate::state::{phi_plus, qubit};
    use proptest::prelude::*;

    fn small_budget() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            max_evals: 600,
            ..OptimizerConfig::broadcast_default()
        }
    }

    fn zero_plus_cq() -> DensityMatrix {
        let a = tensor(&qubit('0'), &qubit('0'));
        let b = tensor(&qubit('1'), &qubit('+'));
        DensityMatrix::mixture(&[0.5, 0.5], &[a, b]).unwrap()
    }

    #[test]
    fn cloning_of_classical_state() {
        let p = [0.1, 0.2, 0.3, 0.15, 0.05, 0.2];
        let rho = DensityMatrix::diagonal(&[2, 3], &p).unwrap();
        let (ta, tb) = cc_broadcast_channels(&linalg::identity(2), &linalg::identity(3)).unwrap();
        assert!(ta.trace_preservation_defect() <= 1e-12);
        assert!(tb.trace_preservation_defect() <= 1e-12);
        let cand = BroadcastCandidate::from_channels(&rho, ta, tb).unwrap();
        assert!(cand.valid);
        assert!(cand.residual() <= 1e-12);
        assert!(cand.mi_deficit.abs() <= 1e-9);
        // index oracle: sigma = sum p_ij |i i j j><i i j j|
        let mut expect = vec![0.0; 36];
        for i in 0..2 {
            for j in 0..3 {
                expect[((i * 2 + i) * 3 + j) * 3 + j] = p[i * 3 + j];
            }
        }
        let oracle = DensityMatrix::diagonal(&[2, 2, 3, 3], &expect).unwrap();
        assert!(linalg::max_abs_diff(cand.sigma.matrix(), oracle.matrix()) <= 1e-15);
    }

    #[test]
    fn cloner_rejects_non_orthonormal_basis() {
        let bad = CMat::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(cloner(&bad), Err(Error::NotOrthonormal(_))));
    }

    #[test]
    fn two_copy_state_is_broadcast_with_doubled_information() {
        let rho = random_density(&[2, 2], 2, &mut rng_for(1, 0)).unwrap();
        let sigma = two_copy_state(&rho).unwrap();
        let check = verify_broadcast(&sigma, &rho).unwrap();
        assert!(check.valid);
        let i = mutual_information(&rho, &Bipartition::pair()).unwrap();
        assert!((party_mutual_information(&sigma).unwrap() - 2.0 * i).abs() <= 1e-9);
        let t2 = equal_information_check(&sigma, &rho).unwrap();
        assert!(!t2.holds);
        assert!((t2.mi_deficit - i).abs() <= 1e-9);
    }

    #[test]
    fn replaced_copy_marginal_fails() {
        let rho = phi_plus();
        let sigma = regroup(&tensor(&rho, &DensityMatrix::maximally_mixed(&[2, 2]).unwrap())).unwrap();
        let check = verify_broadcast(&sigma, &rho).unwrap();
        assert!(!check.valid);
        assert!(check.residual_ab <= 1e-12);
        assert!(matches!(equal_information_check(&sigma, &rho), Err(Error::NotBroadcast(_, _))));
        assert!(matches!(verify_broadcast(&rho, &rho), Err(Error::InvalidLayout(_))));
    }

    #[test]
    fn equal_information_reconstructs_cloning_maps() {
        let u = haar_unitary(2, &mut rng_for(2, 0)).unwrap();
        let v = haar_unitary(2, &mut rng_for(3, 0)).unwrap();
        let rho = DensityMatrix::diagonal(&[2, 2], &[0.4, 0.1, 0.2, 0.3])
            .unwrap()
            .conjugate(&linalg::kron(&u, &v))
            .unwrap();
        let (ta, tb) = cc_broadcast_channels(&u, &v).unwrap();
        let sigma = local_broadcast(&rho, &ta, &tb).unwrap();
        let t2 = equal_information_check(&sigma, &rho).unwrap();
        assert!(t2.holds);
        assert!(t2.mi_deficit.abs() <= 1e-9);
        assert!(t2.reproduction_error.unwrap() <= 1e-8);
    }

    #[test]
    fn regroup_is_an_involution() {
        let sigma = random_density(&[2, 3, 2, 3], 3, &mut rng_for(4, 0)).unwrap();
        let twice = regroup(&regroup(&sigma).unwrap()).unwrap();
        assert_eq!(twice.matrix(), sigma.matrix());
        assert_eq!(twice.dims(), sigma.dims());
    }

    #[test]
    fn ensemble_embedding() {
        let comm = Ensemble::new(
            vec![0.5, 0.5],
            vec![
                DensityMatrix::diagonal(&[2], &[0.7, 0.3]).unwrap(),
                DensityMatrix::diagonal(&[2], &[0.2, 0.8]).unwrap(),
            ],
        )
        .unwrap();
        let emb = embed_ensemble(&comm).unwrap();
        let v = is_cc(&emb, tol::CLASSICAL).unwrap();
        assert_eq!(v.kind, Kind::CC);
        let (ta, tb) = cc_broadcast_channels(v.basis_a.as_ref().unwrap(), v.basis_b.as_ref().unwrap()).unwrap();
        let cand = BroadcastCandidate::from_channels(&emb, ta, tb).unwrap();
        assert!(cand.valid && cand.mi_deficit.abs() <= 1e-9);

        let noncomm = Ensemble::new(vec![0.5, 0.5], vec![qubit('0'), qubit('+')]).unwrap();
        let ops: Vec<CMat> = noncomm.states().iter().map(|s| s.matrix().clone()).collect();
        assert!(commute_residual(&ops).unwrap() > 1e-3);
        assert_eq!(is_cc(&embed_ensemble(&noncomm).unwrap(), tol::CLASSICAL).unwrap().kind, Kind::CQ);

        let zero = Ensemble::new(vec![1.0, 0.0], vec![qubit('0'), qubit('1')]).unwrap();
        assert!(matches!(embed_ensemble(&zero), Err(Error::InvalidDistribution(_))));
    }

    #[test]
    fn one_sided_cloning_is_a_broadcast_state() {
        let rho = zero_plus_cq();
        let sigma = one_sided_clone_state(&rho, &linalg::identity(2), Side::A).unwrap();
        assert!(verify_broadcast(&sigma, &rho).unwrap().valid);
        let deficit = party_mutual_information(&sigma).unwrap() - mutual_information(&rho, &Bipartition::pair()).unwrap();
        assert!(deficit > 1e-3);
        let qc = permute_subsystems(&rho, &[1, 0]).unwrap();
        let sigma_b = one_sided_clone_state(&qc, &linalg::identity(2), Side::B).unwrap();
        assert!(verify_broadcast(&sigma_b, &qc).unwrap().valid);
    }

    #[test]
    fn search_on_classical_state_is_exact() {
        let rho = DensityMatrix::diagonal(&[2, 2], &[0.4, 0.1, 0.2, 0.3]).unwrap();
        let cand = broadcast_search(&rho, &small_budget()).unwrap();
        assert!(cand.residual() <= 1e-9);
        assert!(cand.mi_deficit.abs() <= 1e-9);
    }

    #[test]
    fn search_on_product_state_is_exact() {
        let mut rng = rng_for(5, 0);
        let rho = tensor(&random_density(&[2], 2, &mut rng).unwrap(), &random_density(&[2], 2, &mut rng).unwrap());
        let cand = broadcast_search(&rho, &small_budget()).unwrap();
        assert!(cand.residual() <= 1e-9, "{:?}", cand.marginal_residuals);
        assert!(cand.valid);
    }

    #[test]
    fn search_on_bell_state_stays_away() {
        let cand = broadcast_search(&phi_plus(), &small_budget()).unwrap();
        assert!(cand.residual() > 1e-6);
        assert!(!cand.valid);
    }

    #[test]
    fn dilation_parameters_roundtrip() {
        let s = SideParam { d: 2, ancilla: 2 };
        let v = s.cloning_dilation(&linalg::identity(2));
        assert!(linalg::unitarity_defect(&v) <= 1e-15);
        let back = s.isometry(&s.params(&v)).unwrap();
        assert!(linalg::max_abs_diff(&back, &v) <= 1e-12);
        let ch = s.channel(&v);
        let direct = cloner(&linalg::identity(2)).unwrap();
        let x = random_density(&[2], 2, &mut rng_for(6, 0)).unwrap();
        assert!(linalg::max_abs_diff(&ch.apply_matrix(x.matrix()), &direct.apply_matrix(x.matrix())) <= 1e-12);
    }

    #[test]
    fn candidate_json_roundtrip() {
        let rho = DensityMatrix::diagonal(&[2, 2], &[0.4, 0.1, 0.2, 0.3]).unwrap();
        let (ta, tb) = cc_broadcast_channels(&linalg::identity(2), &linalg::identity(2)).unwrap();
        let cand = BroadcastCandidate::from_channels(&rho, ta, tb).unwrap();
        assert_eq!(BroadcastCandidate::from_json(&cand.to_json()).unwrap(), cand);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn local_maps_never_create_information(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[2, 2], 3, &mut rng).unwrap();
            let ta = KrausChannel::random(2, 4, 2, &mut rng).unwrap().with_out_dims(vec![2, 2]).unwrap();
            let tb = KrausChannel::random(2, 4, 2, &mut rng).unwrap().with_out_dims(vec![2, 2]).unwrap();
            let cand = BroadcastCandidate::from_channels(&rho, ta, tb).unwrap();
            prop_assert!(cand.mi_deficit <= 1e-9);
        }

        #[test]
        fn rotated_cc_states_clone_exactly(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let u = haar_unitary(2, &mut rng).unwrap();
            let v = haar_unitary(3, &mut rng).unwrap();
            let d = random_density(&[2, 3], 6, &mut rng).unwrap();
            let diag: Vec<f64> = (0..6).map(|k| d.matrix()[(k, k)].re).collect();
            let rho = DensityMatrix::diagonal(&[2, 3], &diag).unwrap().conjugate(&linalg::kron(&u, &v)).unwrap();
            let (ta, tb) = cc_broadcast_channels(&u, &v).unwrap();
            let cand = BroadcastCandidate::from_channels(&rho, ta, tb).unwrap();
            prop_assert!(cand.residual() <= 1e-12);
            prop_assert!(cand.mi_deficit.abs() <= 1e-9);
        }
    }
}
