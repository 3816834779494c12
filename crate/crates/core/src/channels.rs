//! Quantum channels in Kraus form, measurement maps, and the Petz recovery
//! channel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::optimize::haar_unitary;
use crate::state::{self, flatten_matrix, unflatten_matrix, DensityMatrix, SubsystemLayout};
use crate::tol;

/// Positive operator-valued measure on one subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmFile", into = "PovmFile")]
pub struct Povm {
    elements: Vec<CMat>,
    dim: usize,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = first.nrows();
        let mut sum = CMat::zeros(d, d);
        for (i, m) in elements.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::InvalidPovm(format!("element {i} has the wrong shape")));
            }
            let herm = linalg::hermiticity_defect(m);
            if herm > tol::HERMITIAN {
                return Err(Error::InvalidPovm(format!("element {i} is not Hermitian ({herm:e})")));
            }
            let min = linalg::herm_eigenvalues(m)[0];
            if min < -tol::PSD {
                return Err(Error::InvalidPovm(format!("element {i} has eigenvalue {min:e}")));
            }
            sum += m;
        }
        let defect = linalg::max_abs_diff(&sum, &linalg::identity(d));
        if defect > tol::NUM {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {defect:e}")));
        }
        Ok(Self {
            elements: elements.iter().map(linalg::hermitize).collect(),
            dim: d,
        })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(basis: &CMat) -> Result<Self> {
        let defect = linalg::unitarity_defect(basis);
        if basis.nrows() != basis.ncols() || defect > tol::NUM {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self::from_basis_unchecked(basis))
    }

    pub(crate) fn from_basis_unchecked(basis: &CMat) -> Self {
        let d = basis.nrows();
        let elements = (0..basis.ncols())
            .map(|k| {
                let v = basis.column(k);
                &v * v.adjoint()
            })
            .collect();
        Self { elements, dim: d }
    }

    /// Rank-1 elements `v_i v_i^dagger` with `v_i` the conjugate of row `i` of
    /// an `n x d` isometry.
    pub(crate) fn from_isometry_rows_unchecked(v: &CMat) -> Self {
        let d = v.ncols();
        let elements = (0..v.nrows())
            .map(|i| CMat::from_fn(d, d, |a, b| v[(i, a)].conj() * v[(i, b)]))
            .collect();
        Self { elements, dim: d }
    }

    pub fn computational(d: usize) -> Self {
        Self::from_basis_unchecked(&linalg::identity(d))
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn outcome_count(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn completeness_defect(&self) -> f64 {
        let mut sum = CMat::zeros(self.dim, self.dim);
        for m in &self.elements {
            sum += m;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(self.dim))
    }

    /// Born probabilities `Tr(M_i rho)` for a state on this subsystem.
    pub fn probabilities(&self, rho: &CMat) -> Vec<f64> {
        self.elements
            .iter()
            .map(|m| (m * rho).trace().re)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmFile {
    pub dim: usize,
    pub elements: Vec<Vec<[f64; 2]>>,
}

impl From<Povm> for PovmFile {
    fn from(p: Povm) -> Self {
        PovmFile {
            dim: p.dim,
            elements: p.elements.iter().map(flatten_matrix).collect(),
        }
    }
}

impl TryFrom<PovmFile> for Povm {
    type Error = Error;
    fn try_from(f: PovmFile) -> Result<Self> {
        let elements = f
            .elements
            .iter()
            .map(|e| unflatten_matrix(f.dim, f.dim, e))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(elements)
    }
}

/// Completely positive map `Y -> sum K Y K^dagger`, not necessarily trace
/// preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
}

impl CpMap {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::DimensionMismatch {
                expected: d_out * d_in,
                found: bad.len(),
            });
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn apply_matrix(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// `sum K^dagger K`; the identity exactly when trace preserving.
    pub fn gram(&self) -> CMat {
        let mut g = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            g += k.adjoint() * k;
        }
        g
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        linalg::max_abs_diff(&self.gram(), &linalg::identity(self.d_in))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect() <= tol
    }

    /// `Y -> sum K^dagger Y K`.
    pub fn transpose(&self) -> CpMap {
        CpMap {
            kraus: self.kraus.iter().map(|k| k.adjoint()).collect(),
            d_in: self.d_out,
            d_out: self.d_in,
        }
    }
}

/// Completely positive trace-preserving map, with the subsystem split of its
/// output (a map `A -> A A'` declares `out_dims = [d_A, d_A']`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct KrausChannel {
    map: CpMap,
    out_dims: Vec<usize>,
}

impl KrausChannel {
    /// Validates `sum K^dagger K = I` within `NUM`.
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let map = CpMap::new(kraus)?;
        let defect = map.trace_preservation_defect();
        if defect > tol::NUM {
            return Err(Error::NotTracePreserving(defect));
        }
        let out_dims = vec![map.d_out];
        Ok(Self { map, out_dims })
    }

    pub(crate) fn from_trusted(kraus: Vec<CMat>, out_dims: Vec<usize>) -> Self {
        let map = CpMap::new(kraus).expect("trusted Kraus family");
        debug_assert_eq!(out_dims.iter().product::<usize>(), map.d_out);
        Self { map, out_dims }
    }

    /// Declares how the output splits into subsystems.
    pub fn with_out_dims(mut self, out_dims: Vec<usize>) -> Result<Self> {
        if out_dims.is_empty() || out_dims.contains(&0) || out_dims.iter().product::<usize>() != self.map.d_out {
            return Err(Error::InvalidLayout(format!(
                "output split {out_dims:?} does not multiply to {}",
                self.map.d_out
            )));
        }
        self.out_dims = out_dims;
        Ok(self)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_trusted(vec![linalg::identity(d)], vec![d])
    }

    pub fn unitary(u: &CMat) -> Result<Self> {
        let defect = linalg::unitarity_defect(u);
        if u.nrows() != u.ncols() || defect > tol::NUM {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self::from_trusted(vec![u.clone()], vec![u.nrows()]))
    }

    /// `X -> V X V^dagger` for an isometry `V` (`d_out x d_in`).
    pub fn isometry(v: &CMat) -> Result<Self> {
        let defect = linalg::unitarity_defect(v);
        if defect > tol::NUM {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self::from_trusted(vec![v.clone()], vec![v.nrows()]))
    }

    /// Stinespring form: isometry `V: C^{d_in} -> C^{d_out} (x) C^{ancilla}` followed
    /// by tracing out the ancilla (the fast index).
    pub fn from_stinespring(v: &CMat, d_out: usize, ancilla: usize) -> Result<Self> {
        if v.nrows() != d_out * ancilla {
            return Err(Error::DimensionMismatch {
                expected: d_out * ancilla,
                found: v.nrows(),
            });
        }
        let defect = linalg::unitarity_defect(v);
        if defect > tol::NUM {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self::from_stinespring_unchecked(v, d_out, ancilla))
    }

    pub(crate) fn from_stinespring_unchecked(v: &CMat, d_out: usize, ancilla: usize) -> Self {
        let d_in = v.ncols();
        let kraus = (0..ancilla)
            .map(|m| CMat::from_fn(d_out, d_in, |a, i| v[(a * ancilla + m, i)]))
            .collect();
        Self::from_trusted(kraus, vec![d_out])
    }

    /// `X -> Tr(X) I/d`.
    pub fn fully_depolarizing(d: usize) -> Self {
        let s = c(1.0 / (d as f64).sqrt(), 0.0);
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let mut k = CMat::zeros(d, d);
                k[(a, b)] = s;
                kraus.push(k);
            }
        }
        Self::from_trusted(kraus, vec![d])
    }

    /// `X -> X (x) tau`: attaches a fixed state as a new trailing subsystem.
    pub fn append_state(d: usize, tau: &DensityMatrix) -> Self {
        let e = linalg::herm_eigen(tau.matrix());
        let dt = tau.dim();
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let v = e.vectors.columns(k, 1).into_owned() * c(lam.sqrt(), 0.0);
            kraus.push(linalg::kron(&linalg::identity(d), &v));
        }
        let mut out_dims = vec![d];
        out_dims.extend_from_slice(tau.dims());
        Self::from_trusted(kraus, out_dims).renormalized_onto(d * dt)
    }

    // guards the Kraus family of `append_state` against eigenvalue clipping
    fn renormalized_onto(self, d_out: usize) -> Self {
        debug_assert_eq!(self.map.d_out, d_out);
        let g = self.map.gram();
        let fix = linalg::pinv_sqrt(&g, 0.0);
        let kraus = self.map.kraus.iter().map(|k| k * &fix).collect();
        Self::from_trusted(kraus, self.out_dims)
    }

    /// Partial trace over the subsystems of `dims` not listed in `keep`.
    pub fn partial_trace(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let layout = SubsystemLayout::new(dims.to_vec())?;
        let n = dims.len();
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() || keep.iter().any(|&p| p >= n) {
            return Err(Error::InvalidSubsystems(format!("bad keep set {keep:?}")));
        }
        let traced: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
        let dk: usize = keep.iter().map(|&p| dims[p]).product();
        let dt: usize = traced.iter().map(|&p| dims[p]).product();
        let total = layout.total_dim();
        let mut kraus = vec![CMat::zeros(dk, total); dt];
        let mut digits = vec![0usize; n];
        for x in 0..total {
            let mut rem = x;
            for s in (0..n).rev() {
                digits[s] = rem % dims[s];
                rem /= dims[s];
            }
            let k = keep.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let t = traced.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            kraus[t][(k, x)] = linalg::ONE;
        }
        Ok(Self::from_trusted(kraus, keep.iter().map(|&p| dims[p]).collect()))
    }

    /// Random channel from a Haar-random Stinespring isometry.
    pub fn random<R: Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> Result<Self> {
        let big = d_out * n_kraus;
        if big < d_in {
            return Err(Error::InvalidArgument(format!(
                "{n_kraus} Kraus operators of shape {d_out}x{d_in} cannot be trace preserving"
            )));
        }
        let u = haar_unitary(big, rng)?;
        Ok(Self::from_stinespring_unchecked(&u.columns(0, d_in).into_owned(), d_out, n_kraus))
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.map.kraus
    }

    pub fn d_in(&self) -> usize {
        self.map.d_in
    }

    pub fn d_out(&self) -> usize {
        self.map.d_out
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn as_cp_map(&self) -> &CpMap {
        &self.map
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        self.map.trace_preservation_defect()
    }

    pub fn apply_matrix(&self, x: &CMat) -> CMat {
        self.map.apply_matrix(x)
    }

    /// Applies the channel to the whole state; the output layout is
    /// `out_dims`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        apply_channel(self, rho)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dims: Option<Vec<usize>>,
}

impl From<KrausChannel> for ChannelFile {
    fn from(ch: KrausChannel) -> Self {
        let out_dims = (ch.out_dims.len() > 1).then(|| ch.out_dims.clone());
        ChannelFile {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus: ch.kraus().iter().map(flatten_matrix).collect(),
            out_dims,
        }
    }
}

impl TryFrom<ChannelFile> for KrausChannel {
    type Error = Error;
    fn try_from(f: ChannelFile) -> Result<Self> {
        if f.kraus.is_empty() {
            return Err(Error::Parse("channel has no Kraus operators".into()));
        }
        let kraus = f
            .kraus
            .iter()
            .map(|k| unflatten_matrix(f.d_out, f.d_in, k))
            .collect::<Result<Vec<_>>>()?;
        let ch = KrausChannel::new(kraus)?;
        match f.out_dims {
            Some(dims) => ch.with_out_dims(dims),
            None => Ok(ch),
        }
    }
}

impl KrausChannel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ChannelFile = serde_json::from_str(s)?;
        KrausChannel::try_from(f)
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Quantum-to-classical map `X -> sum_i Tr(M_i X) |i><i|`, with Kraus
/// operators `|i><psi_ik|` from the spectral decompositions of the elements.
pub fn measurement_channel(povm: &Povm) -> KrausChannel {
    let n = povm.outcome_count();
    let d = povm.dim();
    let mut kraus = Vec::new();
    for (i, m) in povm.elements().iter().enumerate() {
        let e = linalg::herm_eigen(m);
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let psi = e.vectors.column(k);
            let mut op = CMat::zeros(n, d);
            for b in 0..d {
                op[(i, b)] = psi[b].conj() * lam.sqrt();
            }
            kraus.push(op);
        }
    }
    if kraus.is_empty() {
        kraus.push(CMat::zeros(n, d));
    }
    KrausChannel::from_trusted(kraus, vec![n])
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.d_in() {
        return Err(Error::DimensionMismatch {
            expected: ch.d_in(),
            found: rho.dim(),
        });
    }
    let layout = SubsystemLayout::new(ch.out_dims.clone())?;
    Ok(DensityMatrix::from_trusted(layout, ch.apply_matrix(rho.matrix())))
}

/// `ch (x) id` with `ch` acting on subsystem `position`; the target subsystem
/// is replaced by the channel's `out_dims`.
pub fn apply_local(ch: &KrausChannel, position: usize, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if position >= dims.len() {
        return Err(Error::InvalidSubsystems(format!(
            "position {position} out of range for {} subsystems",
            dims.len()
        )));
    }
    if dims[position] != ch.d_in() {
        return Err(Error::DimensionMismatch {
            expected: ch.d_in(),
            found: dims[position],
        });
    }
    let out = apply_local_matrix(ch.as_cp_map(), dims, position, rho.matrix());
    let mut new_dims = dims[..position].to_vec();
    new_dims.extend_from_slice(&ch.out_dims);
    new_dims.extend_from_slice(&dims[position + 1..]);
    Ok(DensityMatrix::from_trusted(SubsystemLayout::new(new_dims)?, out))
}

pub(crate) fn apply_local_matrix(map: &CpMap, dims: &[usize], position: usize, m: &CMat) -> CMat {
    let mut out: Option<CMat> = None;
    for k in map.kraus() {
        let full = linalg::embed_operator(k, dims, position);
        let term = &full * m * full.adjoint();
        out = Some(match out {
            Some(acc) => acc + term,
            None => term,
        });
    }
    out.expect("non-empty Kraus family")
}

/// `Y -> sum K^dagger Y K`: completely positive and unital, generally not
/// trace preserving.
pub fn transpose_channel(ch: &KrausChannel) -> CpMap {
    ch.map.transpose()
}

/// `ch2 o ch1`.
pub fn compose(ch2: &KrausChannel, ch1: &KrausChannel) -> Result<KrausChannel> {
    if ch2.d_in() != ch1.d_out() {
        return Err(Error::DimensionMismatch {
            expected: ch1.d_out(),
            found: ch2.d_in(),
        });
    }
    let mut kraus = Vec::with_capacity(ch1.kraus().len() * ch2.kraus().len());
    for k2 in ch2.kraus() {
        for k1 in ch1.kraus() {
            kraus.push(k2 * k1);
        }
    }
    Ok(KrausChannel::from_trusted(kraus, ch2.out_dims.clone()))
}

/// `chA (x) chB` acting on a two-block input `A B`.
pub fn tensor_channels(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(a.kraus().len() * b.kraus().len());
    for ka in a.kraus() {
        for kb in b.kraus() {
            kraus.push(linalg::kron(ka, kb));
        }
    }
    let mut out_dims = a.out_dims.clone();
    out_dims.extend_from_slice(&b.out_dims);
    KrausChannel::from_trusted(kraus, out_dims)
}

/// Petz recovery map of a channel with respect to a reference state,
/// represented by its action.
///
/// Off the support of `ch(sigma)` the action is zero; [`PetzRecovery::to_channel`]
/// completes it to a trace-preserving map.
#[derive(Debug, Clone)]
pub struct PetzRecovery {
    sigma_sqrt: CMat,
    out_inv_sqrt: CMat,
    support: CMat,
    transpose: CpMap,
    reference: DensityMatrix,
    input_dim: usize,
    full_rank: bool,
}

/// Result of applying a recovery map to a state.
#[derive(Debug, Clone)]
pub struct Recovered {
    pub state: DensityMatrix,
    /// `|Tr(output) - 1|` before renormalization.
    pub trace_drift: f64,
    pub renormalized: bool,
}

/// `X -> sigma^{1/2} ch^T[ ch(sigma)^{-1/2} X ch(sigma)^{-1/2} ] sigma^{1/2}`,
/// with the inverse square root taken on the support of `ch(sigma)`.
pub fn petz_recovery(ch: &KrausChannel, sigma: &DensityMatrix) -> Result<PetzRecovery> {
    if sigma.dim() != ch.d_in() {
        return Err(Error::DimensionMismatch {
            expected: ch.d_in(),
            found: sigma.dim(),
        });
    }
    let image = ch.apply_matrix(sigma.matrix());
    let eig = linalg::herm_eigen(&image);
    let rank = eig.values.iter().filter(|&&x| x > tol::SUPPORT).count();
    let full_rank = rank == ch.d_out();
    if !full_rank {
        log::warn!(
            "Petz recovery: reference image has rank {rank} < {}; recovery is trace preserving only on its support",
            ch.d_out()
        );
    }
    Ok(PetzRecovery {
        sigma_sqrt: linalg::psd_sqrt(sigma.matrix()),
        out_inv_sqrt: eig.map(|x| if x > tol::SUPPORT { 1.0 / x.sqrt() } else { 0.0 }),
        support: eig.map(|x| if x > tol::SUPPORT { 1.0 } else { 0.0 }),
        transpose: transpose_channel(ch),
        reference: sigma.clone(),
        input_dim: ch.d_out(),
        full_rank,
    })
}

impl PetzRecovery {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dims(&self) -> &[usize] {
        self.reference.dims()
    }

    /// Whether the reference image `ch(sigma)` has full rank.
    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    /// Projector onto the support of `ch(sigma)`.
    pub fn support(&self) -> &CMat {
        &self.support
    }

    /// Linear action on an arbitrary operator of the input space.
    pub fn apply_matrix(&self, x: &CMat) -> CMat {
        let inner = &self.out_inv_sqrt * x * &self.out_inv_sqrt;
        &self.sigma_sqrt * self.transpose.apply_matrix(&inner) * &self.sigma_sqrt
    }

    /// Applies the recovery to a state, renormalizing if the trace drifts by
    /// more than `TRACE` (input weight outside the support is lost).
    pub fn apply(&self, x: &DensityMatrix) -> Result<Recovered> {
        if x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                found: x.dim(),
            });
        }
        let mut out = self.apply_matrix(x.matrix());
        let tr = out.trace().re;
        let trace_drift = (tr - 1.0).abs();
        let renormalized = trace_drift > tol::TRACE && tr > 0.0;
        if renormalized {
            out /= c(tr, 0.0);
        }
        Ok(Recovered {
            state: DensityMatrix::from_trusted(self.reference.layout().clone(), out),
            trace_drift,
            renormalized,
        })
    }

    /// Choi matrix `sum_ij |i><j| (x) R(|i><j|)` of the action.
    pub fn choi(&self) -> CMat {
        let din = self.input_dim;
        let dout = self.reference.dim();
        let mut j = CMat::zeros(din * dout, din * dout);
        for a in 0..din {
            for b in 0..din {
                let mut e = CMat::zeros(din, din);
                e[(a, b)] = linalg::ONE;
                let block = self.apply_matrix(&e);
                j.view_mut((a * dout, b * dout), (dout, dout)).copy_from(&block);
            }
        }
        j
    }

    /// Kraus form extracted from the Choi matrix; on the kernel of
    /// `ch(sigma)` the channel prepares the reference state, so the result is
    /// trace preserving everywhere and agrees with the action on the support.
    pub fn to_channel(&self) -> KrausChannel {
        let din = self.input_dim;
        let dout = self.reference.dim();
        let e = linalg::herm_eigen(&self.choi());
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= tol::SUPPORT * 1e-3 {
                continue;
            }
            let v = e.vectors.column(k);
            let s = lam.sqrt();
            kraus.push(CMat::from_fn(dout, din, |a, i| v[i * dout + a] * s));
        }
        let kernel = linalg::identity(din) - &self.support;
        let ker = linalg::herm_eigen(&kernel);
        let refe = linalg::herm_eigen(self.reference.matrix());
        for (k, &kv) in ker.values.iter().enumerate() {
            if kv < 0.5 {
                continue;
            }
            let kappa = ker.vectors.columns(k, 1).into_owned();
            for (l, &sl) in refe.values.iter().enumerate() {
                if sl <= 0.0 {
                    continue;
                }
                let s = refe.vectors.columns(l, 1).into_owned();
                kraus.push(linalg::outer(&s, &kappa) * c(sl.sqrt(), 0.0));
            }
        }
        KrausChannel::from_trusted(kraus, self.reference.dims().to_vec())
    }
}

/// Recovery quality for `rho` under `ch (x) id` on one party, using the product
/// of marginals as reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryDiagnostics {
    pub mutual_information_before: f64,
    pub mutual_information_after: f64,
    pub trace_distance: f64,
    pub fidelity: f64,
    pub trace_drift: f64,
    pub reference_full_rank: bool,
    pub trace_preserving_on_support: f64,
}

/// Applies `ch` to subsystem `position` of a bipartite `rho`, builds the Petz
/// recovery of `ch (x) id` with reference `rho_A (x) rho_B`, and measures how
/// well it undoes the channel.
pub fn recovery_diagnostics(rho: &DensityMatrix, ch: &KrausChannel, position: usize) -> Result<RecoveryDiagnostics> {
    if rho.dims().len() != 2 || position > 1 {
        return Err(Error::InvalidSubsystems("bipartite state and position 0 or 1 required".into()));
    }
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let global = if position == 0 {
        tensor_channels(ch, &KrausChannel::identity(db))
    } else {
        tensor_channels(&KrausChannel::identity(da), ch)
    };
    let global = global.with_out_dims(
        [
            if position == 0 { ch.out_dims().to_vec() } else { vec![da] },
            if position == 1 { ch.out_dims().to_vec() } else { vec![db] },
        ]
        .concat(),
    )?;
    let reference = state::tensor(&rho.reduce(&[0])?, &rho.reduce(&[1])?);
    let processed = apply_channel(&global, rho)?;
    let petz = petz_recovery(&global, &reference)?;
    let recovered = petz.apply(&processed)?;
    let tp = {
        let k = petz.to_channel();
        k.trace_preservation_defect()
    };
    let cut_after = crate::correlations::Bipartition::new(
        (0..(if position == 0 { ch.out_dims().len() } else { 1 })).collect(),
        ((if position == 0 { ch.out_dims().len() } else { 1 })..processed.dims().len()).collect(),
    )?;
    Ok(RecoveryDiagnostics {
        mutual_information_before: crate::correlations::mutual_information(rho, &crate::correlations::Bipartition::pair())?,
        mutual_information_after: crate::correlations::mutual_information(&processed, &cut_after)?,
        trace_distance: state::trace_distance(&recovered.state, rho)?,
        fidelity: state::fidelity(&recovered.state, rho)?,
        trace_drift: recovered.trace_drift,
        reference_full_rank: petz.is_full_rank(),
        trace_preserving_on_support: tp,
    })
}
