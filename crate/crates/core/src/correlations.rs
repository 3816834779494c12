//! Correlation functionals: quantum and classical mutual information, the
//! Holevo quantity, measured (CQ / CC) states and their optimized mutual
//! information, the CC gap, discord, and a heuristic broadcast gap.
//!
//! Optimized quantities are values of the best measurement found, hence
//! lower bounds on the true maxima; gaps built from them are upper bounds.

use serde::{Deserialize, Serialize};

use crate::broadcast;
use crate::channels::{KrausChannel, Povm};
use crate::classify;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::optimize::{
    general_params_for_basis, general_povm, maximize_below, projective_params_for_basis, projective_povm,
    unitary_from_params, OptimizationResult, OptimizerConfig,
};
use crate::state::{
    self, permute_subsystems, shannon_entropy, spectrum_entropy, ClassicalJoint,
    DensityMatrix, ProbVector, SubsystemLayout,
};
use crate::tol;

/// Which party of a bipartite state is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Side {
    #[default]
    A,
    B,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Output units for information quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Bits,
    Nats,
}

impl Units {
    /// Factor converting a value in bits to these units.
    pub fn from_bits(self) -> f64 {
        match self {
            Units::Bits => 1.0,
            Units::Nats => std::f64::consts::LN_2,
        }
    }
}

/// Split of subsystem positions into two nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>) -> Result<Self> {
        a.sort_unstable();
        b.sort_unstable();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidSubsystems("both sides of a cut must be nonempty".into()));
        }
        if a.windows(2).any(|w| w[0] == w[1]) || b.windows(2).any(|w| w[0] == w[1]) || a.iter().any(|x| b.contains(x)) {
            return Err(Error::InvalidSubsystems(format!("cut {a:?} | {b:?} repeats a position")));
        }
        Ok(Self { a, b })
    }

    /// `{0} | {1}`.
    pub fn pair() -> Self {
        Self { a: vec![0], b: vec![1] }
    }

    pub fn side_a(&self) -> &[usize] {
        &self.a
    }

    pub fn side_b(&self) -> &[usize] {
        &self.b
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.a.len() + self.b.len() != n || self.a.iter().chain(&self.b).any(|&p| p >= n) {
            return Err(Error::InvalidSubsystems(format!(
                "cut {:?} | {:?} does not partition {n} subsystems",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// `S(A) + S(B) - S(AB)` in bits across `cut`.
pub fn mutual_information(rho: &DensityMatrix, cut: &Bipartition) -> Result<f64> {
    cut.check(rho.dims().len())?;
    let sa = state::von_neumann_entropy(&rho.reduce(&cut.a)?);
    let sb = state::von_neumann_entropy(&rho.reduce(&cut.b)?);
    let sab = state::von_neumann_entropy(rho);
    Ok((sa + sb - sab).max(0.0))
}

/// `sum_k S(A_k) - S(A_1 ... A_n)` in bits.
pub fn multipartite_mutual_information(rho: &DensityMatrix) -> Result<f64> {
    let n = rho.dims().len();
    if n < 2 {
        return Err(Error::InvalidSubsystems("at least two subsystems required".into()));
    }
    let mut total = 0.0;
    for k in 0..n {
        total += state::von_neumann_entropy(&rho.reduce(&[k])?);
    }
    Ok((total - state::von_neumann_entropy(rho)).max(0.0))
}

/// Shannon mutual information `H(A) + H(B) - H(AB)` of a bipartite joint
/// distribution, in bits.
pub fn classical_mutual_information(p: &ClassicalJoint) -> Result<f64> {
    if p.shape().len() != 2 {
        return Err(Error::InvalidDistribution(format!(
            "bipartite joint required, shape {:?}",
            p.shape()
        )));
    }
    let ha = shannon_entropy(&p.marginal(0));
    let hb = shannon_entropy(&p.marginal(1));
    Ok((ha + hb - p.entropy()).max(0.0))
}

fn table_mutual_information(table: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = table.iter().map(|r| r.iter().map(|x| x.max(0.0)).sum()).collect();
    let ncol = table.first().map_or(0, |r| r.len());
    let cols: Vec<f64> = (0..ncol)
        .map(|j| table.iter().map(|r| r[j].max(0.0)).sum())
        .collect();
    let joint: Vec<f64> = table.iter().flatten().map(|x| x.max(0.0)).collect();
    (shannon_entropy(&rows) + shannon_entropy(&cols) - shannon_entropy(&joint)).max(0.0)
}

/// Finite ensemble `{p_i, sigma_i}` of states of equal dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    probs: ProbVector,
    states: Vec<DensityMatrix>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        Ok(Self {
            probs: ProbVector::new(probs)?,
            states,
        })
    }

    pub fn probs(&self) -> &[f64] {
        self.probs.as_slice()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `sum_i p_i sigma_i`.
    pub fn average(&self) -> DensityMatrix {
        let d = self.states[0].dim();
        let mut m = CMat::zeros(d, d);
        for (p, s) in self.probs().iter().zip(&self.states) {
            m += s.matrix() * c(*p, 0.0);
        }
        DensityMatrix::from_trusted(self.states[0].layout().clone(), m)
    }
}

/// `S(sum p_i sigma_i) - sum p_i S(sigma_i)` in bits.
pub fn holevo_chi(e: &Ensemble) -> f64 {
    let avg = state::von_neumann_entropy(&e.average());
    let mean: f64 = e
        .probs()
        .iter()
        .zip(e.states())
        .map(|(p, s)| p * state::von_neumann_entropy(s))
        .sum();
    (avg - mean).max(0.0)
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

fn check_povm(povm: &Povm, d: usize) -> Result<()> {
    if povm.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: povm.dim(),
        });
    }
    Ok(())
}

/// The state viewed with the measured party first.
fn oriented(rho: &DensityMatrix, side: Side) -> DensityMatrix {
    match side {
        Side::A => rho.clone(),
        Side::B => permute_subsystems(rho, &[1, 0]).expect("valid swap"),
    }
}

/// Unnormalized conditional states `Tr_1((M (x) I) rho)` of the second party
/// of a bipartite state.
pub(crate) struct Conditionals {
    d1: usize,
    d2: usize,
    // blocks[b * d1 + a] = <b| rho |a> as a d2 x d2 operator
    blocks: Vec<CMat>,
    s2: f64,
}

impl Conditionals {
    pub(crate) fn new(rho: &DensityMatrix) -> Self {
        let (d1, d2) = (rho.dims()[0], rho.dims()[1]);
        let m = rho.matrix();
        let mut blocks = Vec::with_capacity(d1 * d1);
        for b in 0..d1 {
            for a in 0..d1 {
                blocks.push(m.view((b * d2, a * d2), (d2, d2)).into_owned());
            }
        }
        let rho2 = rho.reduce(&[1]).expect("bipartite");
        Self {
            d1,
            d2,
            blocks,
            s2: state::von_neumann_entropy(&rho2),
        }
    }

    pub(crate) fn conditional(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d2, self.d2);
        for a in 0..self.d1 {
            for b in 0..self.d1 {
                let w = m[(a, b)];
                if w.norm_sqr() > 0.0 {
                    out += &self.blocks[b * self.d1 + a] * w;
                }
            }
        }
        linalg::hermitize(&out)
    }

    /// Mutual information of the CQ state produced by measuring the first
    /// party.
    pub(crate) fn cq_value(&self, povm: &Povm) -> f64 {
        let mut cond = 0.0;
        for m in povm.elements() {
            let s = self.conditional(m);
            let ev = linalg::herm_eigenvalues(&s);
            let p: f64 = ev.iter().filter(|&&x| x > 0.0).sum();
            if p > 0.0 {
                cond += p * spectrum_entropy(&ev);
            }
        }
        (self.s2 - cond).max(0.0)
    }

    pub(crate) fn joint(&self, p1: &Povm, p2: &Povm) -> Vec<Vec<f64>> {
        p1.elements()
            .iter()
            .map(|m| {
                let s = self.conditional(m);
                p2.elements().iter().map(|n| (n * &s).trace().re).collect()
            })
            .collect()
    }

    pub(crate) fn cc_value(&self, p1: &Povm, p2: &Povm) -> f64 {
        table_mutual_information(&self.joint(p1, p2))
    }
}

/// `(M_A (x) id)[rho]`: block-diagonal state `sum_i |i><i| (x) Tr_A((M_i (x) I) rho)`
/// on layout `[n_outcomes, d_B]`.
pub fn cq_state(rho: &DensityMatrix, povm_a: &Povm) -> Result<DensityMatrix> {
    cq_state_on(rho, povm_a, Side::A)
}

/// Measured state with the register in place of the measured party.
pub fn cq_state_on(rho: &DensityMatrix, povm: &Povm, side: Side) -> Result<DensityMatrix> {
    check_bipartite(rho)?;
    check_povm(povm, rho.dims()[side.index()])?;
    let o = oriented(rho, side);
    let cond = Conditionals::new(&o);
    let n = povm.outcome_count();
    let d2 = cond.d2;
    let mut m = CMat::zeros(n * d2, n * d2);
    for (i, e) in povm.elements().iter().enumerate() {
        m.view_mut((i * d2, i * d2), (d2, d2)).copy_from(&cond.conditional(e));
    }
    let out = DensityMatrix::from_trusted(SubsystemLayout::new(vec![n, d2])?, m);
    Ok(match side {
        Side::A => out,
        Side::B => permute_subsystems(&out, &[1, 0])?,
    })
}

/// `(M_A (x) N_B)[rho]` as a diagonal state on `[n_A, n_B]`, together with
/// `p_ij = Tr((M_i (x) N_j) rho)`.
pub fn cc_state(rho: &DensityMatrix, povm_a: &Povm, povm_b: &Povm) -> Result<(DensityMatrix, ClassicalJoint)> {
    check_bipartite(rho)?;
    check_povm(povm_a, rho.dims()[0])?;
    check_povm(povm_b, rho.dims()[1])?;
    let table = Conditionals::new(rho).joint(povm_a, povm_b);
    let (na, nb) = (povm_a.outcome_count(), povm_b.outcome_count());
    let flat: Vec<f64> = table.iter().flatten().map(|x| x.max(0.0)).collect();
    let total: f64 = flat.iter().sum();
    let flat: Vec<f64> = flat.iter().map(|x| x / total).collect();
    let joint = ClassicalJoint::new(vec![na, nb], flat.clone())?;
    let sigma = DensityMatrix::diagonal(&[na, nb], &flat)?;
    Ok((sigma, joint))
}

/// Pulls a POVM on a channel's output back to its input: `M_i -> ch^T[M_i]`.
pub fn pullback_povm(povm: &Povm, ch: &KrausChannel) -> Result<Povm> {
    check_povm(povm, ch.d_out())?;
    let t = ch.as_cp_map().transpose();
    Povm::new(povm.elements().iter().map(|m| t.apply_matrix(m)).collect())
}

/// One stage of a measurement search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: String,
    pub outcomes: Vec<usize>,
    pub result: OptimizationResult,
}

/// Best one-sided measurement found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqSearch {
    /// Mutual information of the best measured state (a lower bound).
    pub value: f64,
    /// Best value restricted to complete rank-1 projective measurements.
    pub projective_value: f64,
    pub povm: Povm,
    pub side: Side,
    pub stages: Vec<StageResult>,
    /// Whether a directly supplied candidate beat the searches.
    pub from_candidate: bool,
}

/// Best pair of local measurements found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcSearch {
    pub value: f64,
    pub povm_a: Povm,
    pub povm_b: Povm,
    pub stages: Vec<StageResult>,
    pub from_candidate: bool,
}

fn eigenbasis(rho: &DensityMatrix) -> CMat {
    linalg::herm_eigen(rho.matrix()).vectors
}

fn outcome_count(cfg: &OptimizerConfig, d: usize) -> Result<usize> {
    let n = cfg.outcome_count.unwrap_or(d * d);
    if n < d {
        return Err(Error::InvalidArgument(format!(
            "outcome count {n} is below the local dimension {d}"
        )));
    }
    Ok(n)
}

fn push_unique(v: &mut Vec<Vec<f64>>, x: Vec<f64>) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Maximizes the mutual information of `(M_A (x) id)[rho]` over POVMs on A.
pub fn optimize_icq(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<CqSearch> {
    optimize_icq_on(rho, cfg, Side::A, &[])
}

/// One-sided search on `side`. Seeds are the eigenbasis of the measured
/// marginal and the classifier's classical basis; every POVM in
/// `candidates` is also evaluated and can win.
pub fn optimize_icq_on(rho: &DensityMatrix, cfg: &OptimizerConfig, side: Side, candidates: &[Povm]) -> Result<CqSearch> {
    check_bipartite(rho)?;
    cfg.validate()?;
    let d = rho.dims()[side.index()];
    for p in candidates {
        check_povm(p, d)?;
    }
    let o = oriented(rho, side);
    let cond = Conditionals::new(&o);
    let ceiling = Some(mutual_information(rho, &Bipartition::pair())?);

    let mut bases = vec![eigenbasis(&o.reduce(&[0])?)];
    let verdict = classify::is_cq(rho, tol::CLASSICAL, side)?;
    let classical = match side {
        Side::A => verdict.basis_a.clone(),
        Side::B => verdict.basis_b.clone(),
    };
    bases.extend(classical);

    let mut seeds = Vec::new();
    for b in &bases {
        match projective_params_for_basis(b) {
            Some(p) => push_unique(&mut seeds, p),
            None => log::debug!("basis seed without a unitary logarithm skipped"),
        }
    }
    let proj = maximize_below(
        |x| cond.cq_value(&projective_povm(x, d).expect("parameter length")),
        d * d,
        cfg,
        &seeds,
        ceiling,
    )?;
    let proj_povm = projective_povm(&proj.params, d)?;
    let projective_value = proj.value;
    let mut stages = vec![StageResult {
        stage: "projective".into(),
        outcomes: vec![d],
        result: proj.clone(),
    }];
    let mut best = (proj.value, proj_povm);

    if !cfg.projective_only {
        let n = outcome_count(cfg, d)?;
        let best_basis = unitary_from_params(&proj.params, d)?;
        let mut gseeds = Vec::new();
        for b in std::iter::once(&best_basis).chain(&bases) {
            if let Some(p) = general_params_for_basis(b, n) {
                push_unique(&mut gseeds, p);
            }
        }
        let gen = maximize_below(
            |x| cond.cq_value(&general_povm(x, d, n).expect("parameter length")),
            n * n,
            cfg,
            &gseeds,
            ceiling,
        )?;
        if gen.value > best.0 {
            best = (gen.value, general_povm(&gen.params, d, n)?);
        }
        stages.push(StageResult {
            stage: "general".into(),
            outcomes: vec![n],
            result: gen,
        });
    }

    let mut from_candidate = false;
    for p in candidates {
        let v = cond.cq_value(p);
        if v > best.0 {
            best = (v, p.clone());
            from_candidate = true;
        }
    }
    Ok(CqSearch {
        value: best.0,
        projective_value,
        povm: best.1,
        side,
        stages,
        from_candidate,
    })
}

/// Maximizes the classical mutual information of `(M_A (x) N_B)[rho]`.
pub fn optimize_icc(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<CcSearch> {
    let cq = optimize_icq(rho, cfg)?;
    optimize_icc_with(rho, cfg, &cq, &[])
}

/// Two-sided search. Seeds: marginal eigenbases, classifier bases, and the
/// one-sided optimum `cq` paired with the other marginal's eigenbasis; that
/// pairing and every pair in `candidates` are also evaluated directly, so the
/// result never falls below them.
pub fn optimize_icc_with(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
    cq: &CqSearch,
    candidates: &[(Povm, Povm)],
) -> Result<CcSearch> {
    check_bipartite(rho)?;
    cfg.validate()?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    for (pa, pb) in candidates {
        check_povm(pa, da)?;
        check_povm(pb, db)?;
    }
    let cond = Conditionals::new(rho);
    let eig_a = eigenbasis(&rho.reduce(&[0])?);
    let eig_b = eigenbasis(&rho.reduce(&[1])?);

    let mut pairs = vec![(eig_a.clone(), eig_b.clone())];
    let verdict = classify::is_cc(rho, tol::CLASSICAL)?;
    if let (Some(a), Some(b)) = (&verdict.basis_a, &verdict.basis_b) {
        pairs.push((a.clone(), b.clone()));
    }
    // projective one-sided optimum, paired with the other eigenbasis
    let cq_proj = cq
        .stages
        .iter()
        .find(|s| s.stage == "projective")
        .map(|s| unitary_from_params(&s.result.params, cq.povm.dim()))
        .transpose()?;
    if let Some(u) = &cq_proj {
        pairs.push(match cq.side {
            Side::A => (u.clone(), eig_b.clone()),
            Side::B => (eig_a.clone(), u.clone()),
        });
    }

    let split_proj = |x: &[f64]| -> (Povm, Povm) {
        (
            projective_povm(&x[..da * da], da).expect("parameter length"),
            projective_povm(&x[da * da..], db).expect("parameter length"),
        )
    };
    let mut seeds = Vec::new();
    for (a, b) in &pairs {
        if let (Some(mut pa), Some(pb)) = (projective_params_for_basis(a), projective_params_for_basis(b)) {
            pa.extend(pb);
            push_unique(&mut seeds, pa);
        }
    }
    let ceiling = Some(mutual_information(rho, &Bipartition::pair())?);
    let proj = maximize_below(
        |x| {
            let (pa, pb) = split_proj(x);
            cond.cc_value(&pa, &pb)
        },
        da * da + db * db,
        cfg,
        &seeds,
        ceiling,
    )?;
    let mut best = {
        let (pa, pb) = split_proj(&proj.params);
        (proj.value, pa, pb)
    };
    let mut stages = vec![StageResult {
        stage: "projective".into(),
        outcomes: vec![da, db],
        result: proj.clone(),
    }];

    if !cfg.projective_only {
        let (na, nb) = (outcome_count(cfg, da)?, outcome_count(cfg, db)?);
        let split_gen = |x: &[f64]| -> (Povm, Povm) {
            (
                general_povm(&x[..na * na], da, na).expect("parameter length"),
                general_povm(&x[na * na..], db, nb).expect("parameter length"),
            )
        };
        let mut gpairs = vec![(
            unitary_from_params(&proj.params[..da * da], da)?,
            unitary_from_params(&proj.params[da * da..], db)?,
        )];
        gpairs.extend(pairs.iter().cloned());
        let mut gseeds = Vec::new();
        for (a, b) in &gpairs {
            if let (Some(mut pa), Some(pb)) = (general_params_for_basis(a, na), general_params_for_basis(b, nb)) {
                pa.extend(pb);
                push_unique(&mut gseeds, pa);
            }
        }
        // general one-sided optimum, when it has the same outcome count
        if let Some(g) = cq.stages.iter().find(|s| s.stage == "general") {
            let other = match cq.side {
                Side::A => general_params_for_basis(&eig_b, nb),
                Side::B => general_params_for_basis(&eig_a, na),
            };
            if let Some(o) = other {
                let seed = match cq.side {
                    Side::A if g.outcomes == [na] => Some([g.result.params.clone(), o].concat()),
                    Side::B if g.outcomes == [nb] => Some([o, g.result.params.clone()].concat()),
                    _ => None,
                };
                if let Some(s) = seed {
                    push_unique(&mut gseeds, s);
                }
            }
        }
        let gen = maximize_below(
            |x| {
                let (pa, pb) = split_gen(x);
                cond.cc_value(&pa, &pb)
            },
            na * na + nb * nb,
            cfg,
            &gseeds,
            ceiling,
        )?;
        if gen.value > best.0 {
            let (pa, pb) = split_gen(&gen.params);
            best = (gen.value, pa, pb);
        }
        stages.push(StageResult {
            stage: "general".into(),
            outcomes: vec![na, nb],
            result: gen,
        });
    }

    let paired = match cq.side {
        Side::A => (cq.povm.clone(), Povm::from_basis_unchecked(&eig_b)),
        Side::B => (Povm::from_basis_unchecked(&eig_a), cq.povm.clone()),
    };
    let mut from_candidate = false;
    for (pa, pb) in std::iter::once(&paired).chain(candidates) {
        let v = cond.cc_value(pa, pb);
        if v > best.0 {
            best = (v, pa.clone(), pb.clone());
            from_candidate = true;
        }
    }
    Ok(CcSearch {
        value: best.0,
        povm_a: best.1,
        povm_b: best.2,
        stages,
        from_candidate,
    })
}

/// `I - I_CC` with the best pair of measurements found: an upper bound on the
/// CC gap.
pub fn delta_cc(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(CorrelationReport::compute(rho, cfg, Side::A)?.delta_cc_upper)
}

/// `I` minus the best mutual information after a complete rank-1 projective
/// measurement of `side`.
pub fn discord(rho: &DensityMatrix, cfg: &OptimizerConfig, side: Side) -> Result<f64> {
    let cfg = OptimizerConfig {
        projective_only: true,
        ..cfg.clone()
    };
    let i = mutual_information(rho, &Bipartition::pair())?;
    let s = optimize_icq_on(rho, &cfg, side, &[])?;
    Ok((i - s.projective_value).max(0.0))
}

/// Broadcast gap estimate: smallest `I(sigma_{AA':BB'}) - I(rho)` over the
/// broadcast states this library can construct or find by local search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaB {
    /// Raw difference; an upper bound on the minimum over all broadcast states.
    pub value: f64,
    pub mutual_information: f64,
    /// Which construction attained `value`.
    pub source: String,
    /// Every valid broadcast state considered, as `(source, deficit)`.
    pub considered: Vec<(String, f64)>,
}

/// Heuristic broadcast gap. Considers the two-copy state, classical cloning
/// of a CC state, the one-sided cloning of CQ / QC structure, and the best
/// candidate of [`broadcast::broadcast_search`] when it is a valid broadcast
/// state.
pub fn delta_b_heuristic(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<DeltaB> {
    check_bipartite(rho)?;
    let i = mutual_information(rho, &Bipartition::pair())?;
    let mut considered = Vec::new();
    let mut consider = |name: &str, sigma: &DensityMatrix| -> Result<()> {
        let check = broadcast::verify_broadcast(sigma, rho)?;
        if check.valid {
            considered.push((name.to_string(), broadcast::party_mutual_information(sigma)? - i));
        }
        Ok(())
    };
    consider("two-copy", &broadcast::two_copy_state(rho)?)?;
    let cc = classify::is_cc(rho, tol::CLASSICAL)?;
    if cc.kind == classify::Kind::CC {
        let (a, b) = (cc.basis_a.as_ref().expect("CC basis"), cc.basis_b.as_ref().expect("CC basis"));
        let (ta, tb) = broadcast::cc_broadcast_channels(a, b)?;
        consider("cc-cloning", &broadcast::local_broadcast(rho, &ta, &tb)?)?;
    }
    for side in [Side::A, Side::B] {
        let v = classify::is_cq(rho, tol::CLASSICAL, side)?;
        if v.kind != classify::Kind::Neither {
            let basis = match side {
                Side::A => v.basis_a.as_ref(),
                Side::B => v.basis_b.as_ref(),
            }
            .expect("classical basis");
            let name = match side {
                Side::A => "cq-cloning",
                Side::B => "qc-cloning",
            };
            consider(name, &broadcast::one_sided_clone_state(rho, basis, side)?)?;
        }
    }
    let found = broadcast::broadcast_search(rho, cfg)?;
    if found.valid {
        consider("local-search", &found.sigma)?;
    }
    let (source, value) = considered
        .iter()
        .fold(None::<&(String, f64)>, |acc, x| match acc {
            Some(a) if a.1 <= x.1 => Some(a),
            _ => Some(x),
        })
        .cloned()
        .expect("the two-copy state is always a broadcast state");
    Ok(DeltaB {
        value,
        mutual_information: i,
        source,
        considered,
    })
}

/// Tolerances used when producing a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub psd: f64,
    pub trace: f64,
    pub support: f64,
    pub numeric: f64,
    pub classical: f64,
    pub degeneracy_gap: f64,
    pub broadcast: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: tol::HERMITIAN,
            psd: tol::PSD,
            trace: tol::TRACE,
            support: tol::SUPPORT,
            numeric: tol::NUM,
            classical: tol::CLASSICAL,
            degeneracy_gap: tol::DEGENERACY_GAP,
            broadcast: tol::BROADCAST,
        }
    }
}

/// Summary of one optimizer run inside a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSummary {
    pub search: String,
    pub stage: String,
    pub outcomes: Vec<usize>,
    pub value: f64,
    pub n_evals: usize,
    pub best_restart: usize,
    pub seeded_starts: usize,
    pub restart_values: Vec<f64>,
    pub aborted: usize,
    #[serde(default)]
    pub reached_ceiling: bool,
}

/// All correlation measures of a bipartite state.
///
/// `i_cq_lower` and `i_cc_lower` are values of measurements actually found;
/// `delta_cc_upper` and `discord_upper` are the corresponding gaps.
/// `I >= i_cq_lower >= i_cc_lower >= 0` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub units: Units,
    #[serde(rename = "I")]
    pub mutual_information: f64,
    #[serde(rename = "I_cq_lower")]
    pub i_cq_lower: f64,
    #[serde(rename = "I_cc_lower")]
    pub i_cc_lower: f64,
    pub delta_cc_upper: f64,
    pub discord_upper: f64,
    pub measured_side: Side,
    pub best_povm_cq: Povm,
    #[serde(rename = "best_povm_A")]
    pub best_povm_a: Povm,
    #[serde(rename = "best_povm_B")]
    pub best_povm_b: Povm,
    /// Notes on adjustments made to keep the ordering chain.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjustments: Vec<String>,
    pub optimizer: Vec<OptimizerSummary>,
    pub config: OptimizerConfig,
    pub tolerances: Tolerances,
}

fn summaries(search: &str, stages: &[StageResult]) -> Vec<OptimizerSummary> {
    stages
        .iter()
        .map(|s| OptimizerSummary {
            search: search.into(),
            stage: s.stage.clone(),
            outcomes: s.outcomes.clone(),
            value: s.result.value,
            n_evals: s.result.n_evals,
            best_restart: s.result.best_restart,
            seeded_starts: s.result.seeded_starts,
            restart_values: s.result.restart_values.clone(),
            aborted: s.result.aborted.len(),
            reached_ceiling: s.result.reached_ceiling,
        })
        .collect()
}

impl CorrelationReport {
    pub fn compute(rho: &DensityMatrix, cfg: &OptimizerConfig, side: Side) -> Result<Self> {
        Self::compute_with(rho, cfg, side, &[], &[])
    }

    /// Like [`CorrelationReport::compute`], also evaluating the supplied
    /// candidate measurements.
    pub fn compute_with(
        rho: &DensityMatrix,
        cfg: &OptimizerConfig,
        side: Side,
        cq_candidates: &[Povm],
        cc_candidates: &[(Povm, Povm)],
    ) -> Result<Self> {
        check_bipartite(rho)?;
        let i = mutual_information(rho, &Bipartition::pair())?;
        let mut cq = optimize_icq_on(rho, cfg, side, cq_candidates)?;
        let cc = optimize_icc_with(rho, cfg, &cq, cc_candidates)?;
        let mut adjustments = Vec::new();

        let mut i_cq = cq.value;
        if cc.value > i_cq {
            let measured = match side {
                Side::A => &cc.povm_a,
                Side::B => &cc.povm_b,
            };
            let v = Conditionals::new(&oriented(rho, side)).cq_value(measured);
            if v > i_cq {
                adjustments.push(format!(
                    "one-sided value raised from {i_cq:e} to {v:e} by the two-sided optimum"
                ));
                i_cq = v;
                cq.povm = measured.clone();
            }
        }
        if i_cq > i {
            if i_cq - i > tol::NUM {
                adjustments.push(format!("one-sided value {i_cq:e} clipped to I = {i:e}"));
            }
            i_cq = i;
        }
        let mut i_cc = cc.value.max(0.0);
        if i_cc > i_cq {
            if i_cc - i_cq > tol::NUM {
                adjustments.push(format!("two-sided value {i_cc:e} clipped to {i_cq:e}"));
            }
            i_cc = i_cq;
        }
        let discord_upper = (i - cq.projective_value.min(i)).max(0.0);

        let mut optimizer = summaries("cq", &cq.stages);
        optimizer.extend(summaries("cc", &cc.stages));
        Ok(Self {
            units: Units::Bits,
            mutual_information: i,
            i_cq_lower: i_cq,
            i_cc_lower: i_cc,
            delta_cc_upper: i - i_cc,
            discord_upper,
            measured_side: side,
            best_povm_cq: cq.povm,
            best_povm_a: cc.povm_a,
            best_povm_b: cc.povm_b,
            adjustments,
            optimizer,
            config: cfg.clone(),
            tolerances: Tolerances::default(),
        })
    }

    /// Ordering chain `I >= I_cq >= I_cc >= 0` and `delta = I - I_cc`.
    pub fn chain_holds(&self) -> bool {
        self.mutual_information >= self.i_cq_lower
            && self.i_cq_lower >= self.i_cc_lower
            && self.i_cc_lower >= 0.0
            && self.delta_cc_upper == self.mutual_information - self.i_cc_lower
    }

    /// Same report with all information values expressed in `units`.
    pub fn in_units(&self, units: Units) -> Self {
        let f = units.from_bits() / self.units.from_bits();
        let mut out = self.clone();
        out.units = units;
        out.mutual_information *= f;
        out.i_cq_lower *= f;
        out.i_cc_lower *= f;
        out.delta_cc_upper *= f;
        out.discord_upper *= f;
        for s in &mut out.optimizer {
            s.value *= f;
            for v in &mut s.restart_values {
                *v *= f;
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Mutual information of a CQ embedding `sum_i p_i |i><i| (x) sigma_i`.
#[cfg(test)]
fn embedding_mutual_information(e: &Ensemble) -> f64 {
    let n = e.len();
    let d = e.states()[0].dim();
    let mut m = CMat::zeros(n * d, n * d);
    for (i, (p, s)) in e.probs().iter().zip(e.states()).enumerate() {
        m.view_mut((i * d, i * d), (d, d)).copy_from(&(s.matrix() * c(*p, 0.0)));
    }
    let rho = DensityMatrix::from_trusted(SubsystemLayout::new(vec![n, d]).expect("dims"), m);
    let sa = shannon_entropy(e.probs());
    let sb = crate::state::entropy_unchecked(e.average().matrix());
    (sa + sb - state::von_neumann_entropy(&rho)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_local, measurement_channel};
    use crate::optimize::{haar_unitary, random_density, rng_for};
    use crate::state::{ghz, phi_plus, qubit, tensor};
    use proptest::prelude::*;
    use rand::Rng;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            restarts: 4,
            max_evals: 1500,
            ..OptimizerConfig::default()
        }
    }

    fn zero_plus_cq() -> DensityMatrix {
        let a = tensor(&qubit('0'), &qubit('0'));
        let b = tensor(&qubit('1'), &qubit('+'));
        DensityMatrix::mixture(&[0.5, 0.5], &[a, b]).unwrap()
    }

    fn classical_bit() -> DensityMatrix {
        DensityMatrix::diagonal(&[2, 2], &[0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn bell_state_mutual_information() {
        assert!((mutual_information(&phi_plus(), &Bipartition::pair()).unwrap() - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn classical_bit_mutual_information() {
        assert!((mutual_information(&classical_bit(), &Bipartition::pair()).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn product_state_has_no_mutual_information() {
        let mut rng = rng_for(1, 0);
        let a = random_density(&[2], 2, &mut rng).unwrap();
        let b = random_density(&[3], 3, &mut rng).unwrap();
        assert!(mutual_information(&tensor(&a, &b), &Bipartition::pair()).unwrap() <= 1e-12);
    }

    #[test]
    fn ghz_multipartite_information() {
        assert!((multipartite_mutual_information(&ghz(3)).unwrap() - 3.0).abs() <= 1e-9);
        let mut rng = rng_for(2, 0);
        let parts: Vec<_> = (0..3).map(|_| random_density(&[2], 2, &mut rng).unwrap()).collect();
        let prod = state::tensor_all(&parts).unwrap();
        assert!(multipartite_mutual_information(&prod).unwrap() <= 1e-12);
        assert!(multipartite_mutual_information(&parts[0]).is_err());
    }

    #[test]
    fn invalid_cuts_are_rejected() {
        let rho = ghz(3);
        assert!(mutual_information(&rho, &Bipartition::new(vec![0], vec![1]).unwrap()).is_err());
        assert!(Bipartition::new(vec![0], vec![0, 1]).is_err());
        assert!(Bipartition::new(vec![], vec![0]).is_err());
        let cut = Bipartition::new(vec![0], vec![1, 2]).unwrap();
        assert!((mutual_information(&rho, &cut).unwrap() - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn classical_mutual_information_examples() {
        let diag = ClassicalJoint::from_table(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((classical_mutual_information(&diag).unwrap() - 1.0).abs() <= 1e-12);
        let prod = ClassicalJoint::from_table(&[vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
        assert!(classical_mutual_information(&prod).unwrap() <= 1e-12);
        // direct Shannon sums: marginals uniform, joint entropy of (.4,.1,.1,.4)
        let p = ClassicalJoint::from_table(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let hj = -2.0 * 0.4 * 0.4f64.log2() - 2.0 * 0.1 * 0.1f64.log2();
        let expect = 1.0 + 1.0 - hj;
        assert!((expect - 0.2780719).abs() < 1e-7);
        assert!((classical_mutual_information(&p).unwrap() - expect).abs() <= 1e-12);
    }

    #[test]
    fn holevo_examples() {
        let orth = Ensemble::new(vec![0.5, 0.5], vec![qubit('0'), qubit('1')]).unwrap();
        assert!((holevo_chi(&orth) - 1.0).abs() <= 1e-12);
        let same = Ensemble::new(vec![0.3, 0.7], vec![qubit('+'), qubit('+')]).unwrap();
        assert!(holevo_chi(&same) <= 1e-12);
        // average state has eigenvalues (1 +- 1/sqrt 2)/2
        let e = Ensemble::new(vec![0.5, 0.5], vec![qubit('0'), qubit('+')]).unwrap();
        let expect = h2((1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0);
        assert!((expect - 0.6009).abs() < 1e-4);
        assert!((holevo_chi(&e) - expect).abs() <= 1e-12);
        assert!((embedding_mutual_information(&e) - expect).abs() <= 1e-12);
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::new(vec![1.0], vec![]).is_err());
        assert!(Ensemble::new(vec![0.5, 0.5], vec![qubit('0'), phi_plus()]).is_err());
        assert!(Ensemble::new(vec![0.6, 0.6], vec![qubit('0'), qubit('1')]).is_err());
    }

    #[test]
    fn measured_states() {
        let mut rng = rng_for(3, 0);
        let p: Vec<f64> = {
            let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        };
        let cc = DensityMatrix::diagonal(&[2, 3], &p).unwrap();
        let (sigma, joint) = cc_state(&cc, &Povm::computational(2), &Povm::computational(3)).unwrap();
        assert!(linalg::max_abs_diff(sigma.matrix(), cc.matrix()) <= 1e-12);
        assert!(linalg::max_abs_diff(cq_state(&cc, &Povm::computational(2)).unwrap().matrix(), cc.matrix()) <= 1e-12);
        for (a, b) in joint.probabilities().iter().zip(&p) {
            assert!((a - b).abs() <= 1e-12);
        }

        let (bell, _) = cc_state(&phi_plus(), &Povm::computational(2), &Povm::computational(2)).unwrap();
        assert!(linalg::max_abs_diff(bell.matrix(), classical_bit().matrix()) <= 1e-12);
    }

    #[test]
    fn measurement_in_two_steps_equals_joint_measurement() {
        let mut rng = rng_for(4, 0);
        let rho = random_density(&[2, 3], 6, &mut rng).unwrap();
        let ma = Povm::from_basis(&haar_unitary(2, &mut rng).unwrap()).unwrap();
        let nb = Povm::from_basis(&haar_unitary(3, &mut rng).unwrap()).unwrap();
        let (joint, _) = cc_state(&rho, &ma, &nb).unwrap();
        let step = apply_local(&measurement_channel(&nb), 1, &cq_state(&rho, &ma).unwrap()).unwrap();
        let other = apply_local(&measurement_channel(&ma), 0, &cq_state_on(&rho, &nb, Side::B).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(joint.matrix(), step.matrix()) <= 1e-12);
        assert!(linalg::max_abs_diff(joint.matrix(), other.matrix()) <= 1e-12);
    }

    #[test]
    fn cq_state_matches_measurement_channel() {
        let mut rng = rng_for(5, 0);
        let rho = random_density(&[3, 2], 4, &mut rng).unwrap();
        let povm = general_povm(&vec![0.3; 81], 3, 9).unwrap();
        let fast = cq_state(&rho, &povm).unwrap();
        let slow = apply_local(&measurement_channel(&povm), 0, &rho).unwrap();
        assert!(linalg::max_abs_diff(fast.matrix(), slow.matrix()) <= 1e-12);
        let cond = Conditionals::new(&rho);
        let direct = mutual_information(&fast, &Bipartition::pair()).unwrap();
        assert!((cond.cq_value(&povm) - direct).abs() <= 1e-10);
        assert!(cq_state(&rho, &Povm::computational(2)).is_err());
    }

    #[test]
    fn cq_state_has_exact_icq() {
        let s = optimize_icq(&zero_plus_cq(), &quick()).unwrap();
        let i = mutual_information(&zero_plus_cq(), &Bipartition::pair()).unwrap();
        assert!((s.value - i).abs() <= 1e-9);
    }

    #[test]
    fn zero_plus_ensemble_icc_is_accessible_information() {
        // accessible information of {1/2 |0>, 1/2 |+>}: 1 - h((1 + 1/sqrt 2)/2)
        let expect = 1.0 - h2((1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0);
        let r = CorrelationReport::compute(&zero_plus_cq(), &quick(), Side::A).unwrap();
        assert!((r.i_cc_lower - expect).abs() <= 1e-6, "{} vs {expect}", r.i_cc_lower);
        assert!(r.delta_cc_upper > 0.2);
        assert!(r.chain_holds());
    }

    #[test]
    fn bell_state_measures() {
        let r = CorrelationReport::compute(&phi_plus(), &OptimizerConfig::default(), Side::A).unwrap();
        assert!((r.mutual_information - 2.0).abs() <= 1e-9);
        assert!(r.i_cc_lower >= 0.999 && r.i_cc_lower <= 1.0 + 1e-9);
        assert!((r.delta_cc_upper - 1.0).abs() <= 1e-3);
        assert!(r.chain_holds());
    }

    #[test]
    fn cc_state_has_no_gap() {
        let rho = DensityMatrix::diagonal(&[2, 2], &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let r = CorrelationReport::compute(&rho, &quick(), Side::A).unwrap();
        assert!(r.delta_cc_upper.abs() <= 1e-9);
        assert!(r.discord_upper.abs() <= 1e-9);
        assert!(discord(&rho, &quick(), Side::B).unwrap() <= 1e-9);
    }

    #[test]
    fn product_state_measures_vanish() {
        let mut rng = rng_for(6, 0);
        let rho = tensor(&random_density(&[2], 2, &mut rng).unwrap(), &random_density(&[2], 2, &mut rng).unwrap());
        let r = CorrelationReport::compute(&rho, &quick(), Side::A).unwrap();
        assert!(r.mutual_information <= 1e-9 && r.i_cq_lower <= 1e-9 && r.i_cc_lower <= 1e-9);
    }

    #[test]
    fn discord_dominates_one_sided_gap() {
        let mut rng = rng_for(7, 0);
        for _ in 0..3 {
            let rho = random_density(&[2, 2], 2, &mut rng).unwrap();
            let cfg = quick();
            let r = CorrelationReport::compute(&rho, &cfg, Side::A).unwrap();
            let d = discord(&rho, &cfg, Side::A).unwrap();
            assert!(d >= r.mutual_information - r.i_cq_lower - 1e-9);
        }
    }

    #[test]
    fn report_json_roundtrip_and_units() {
        let r = CorrelationReport::compute(&classical_bit(), &quick(), Side::A).unwrap();
        let back = CorrelationReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let n = r.in_units(Units::Nats);
        assert!((n.mutual_information - std::f64::consts::LN_2).abs() <= 1e-12);
        assert!(r.to_json().contains("\"I_cc_lower\""));
    }

    #[test]
    fn pullback_preserves_measured_statistics() {
        let mut rng = rng_for(8, 0);
        let rho = random_density(&[2, 2], 4, &mut rng).unwrap();
        let ch = KrausChannel::random(2, 3, 2, &mut rng).unwrap();
        let after = apply_local(&ch, 0, &rho).unwrap();
        let m = general_povm(&vec![0.2; 81], 3, 9).unwrap();
        let back = pullback_povm(&m, &ch).unwrap();
        let a = Conditionals::new(&after).cq_value(&m);
        let b = Conditionals::new(&rho).cq_value(&back);
        assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn non_bipartite_inputs_are_rejected() {
        assert!(optimize_icq(&ghz(3), &quick()).is_err());
        assert!(cc_state(&ghz(3), &Povm::computational(2), &Povm::computational(2)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn two_party_multipartite_matches_bipartite(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[da, db], da * db, &mut rng).unwrap();
            let a = multipartite_mutual_information(&rho).unwrap();
            let b = mutual_information(&rho, &Bipartition::pair()).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn mutual_information_is_relative_entropy_to_product(seed in any::<u64>(), rank in 1usize..5) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[2, 2], rank, &mut rng).unwrap();
            let prod = tensor(&rho.reduce(&[0]).unwrap(), &rho.reduce(&[1]).unwrap());
            let rel = state::relative_entropy(&rho, &prod).unwrap();
            let i = mutual_information(&rho, &Bipartition::pair()).unwrap();
            prop_assert!((rel - i).abs() <= 1e-9);
        }

        #[test]
        fn local_channels_do_not_increase_mutual_information(seed in any::<u64>(), side in 0usize..2) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[2, 3], 3, &mut rng).unwrap();
            let din = rho.dims()[side];
            let ch = KrausChannel::random(din, 2, 3, &mut rng).unwrap();
            let after = apply_local(&ch, side, &rho).unwrap();
            let cut = Bipartition::pair();
            prop_assert!(mutual_information(&after, &cut).unwrap() <= mutual_information(&rho, &cut).unwrap() + 1e-9);
        }

        #[test]
        fn holevo_equals_embedding_information(seed in any::<u64>(), n in 1usize..4, d in 1usize..4) {
            let mut rng = rng_for(seed, 0);
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = raw.iter().sum();
            let states = (0..n).map(|_| random_density(&[d], d, &mut rng).unwrap()).collect();
            let e = Ensemble::new(raw.iter().map(|x| x / s).collect(), states).unwrap();
            prop_assert!(holevo_chi(&e) >= 0.0);
            prop_assert!((holevo_chi(&e) - embedding_mutual_information(&e)).abs() <= 1e-9);
        }

        #[test]
        fn measured_information_is_bounded_by_mutual_information(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[2, 2], 3, &mut rng).unwrap();
            let p: Vec<f64> = (0..16).map(|_| rng.random_range(-3.0..3.0)).collect();
            let q: Vec<f64> = (0..16).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ma = general_povm(&p, 2, 4).unwrap();
            let nb = general_povm(&q, 2, 4).unwrap();
            let cond = Conditionals::new(&rho);
            let i = mutual_information(&rho, &Bipartition::pair()).unwrap();
            let icq = cond.cq_value(&ma);
            prop_assert!(icq <= i + 1e-9);
            prop_assert!(cond.cc_value(&ma, &nb) <= icq + 1e-9);
        }
    }
}
