//! Multipartite density matrices: construction, composition, reduction,
//! entropies and distances.
//!
//! Subsystems are ordered row-major: the first subsystem is the slowest
//! index of the joint basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::tol;

/// Local Hilbert-space dimensions of an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidLayout("no subsystems".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!("subsystem {pos} has dimension 0")));
        }
        Ok(Self { dims, labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::InvalidLayout(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &SubsystemLayout) -> SubsystemLayout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        SubsystemLayout { dims, labels }
    }

    fn select(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout {
            dims: positions.iter().map(|&p| self.dims[p]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| positions.iter().map(|&p| l[p].clone()).collect()),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix over a subsystem layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    matrix: CMat,
}

impl DensityMatrix {
    /// Validates every invariant and reports the first one violated, in the
    /// order: shape, Hermiticity, trace, positivity.
    pub fn new(layout: SubsystemLayout, matrix: CMat) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > tol::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidTrace(tr));
        }
        let matrix = linalg::hermitize(&matrix);
        let min = linalg::herm_eigenvalues(&matrix)[0];
        if min < -tol::PSD {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { layout, matrix })
    }

    /// Wraps a matrix produced by a trusted computation; only Hermitizes.
    pub(crate) fn from_trusted(layout: SubsystemLayout, matrix: CMat) -> Self {
        debug_assert_eq!(layout.total_dim(), matrix.nrows());
        Self {
            layout,
            matrix: linalg::hermitize(&matrix),
        }
    }

    /// Pure state `|psi><psi|`; the amplitudes are normalized.
    pub fn pure(dims: &[usize], amplitudes: &[Complex64]) -> Result<Self> {
        let layout = SubsystemLayout::new(dims.to_vec())?;
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("zero or non-finite state vector".into()));
        }
        let v = CMat::from_iterator(amplitudes.len(), 1, amplitudes.iter().map(|a| a / norm));
        Ok(Self::from_trusted(layout, linalg::outer(&v, &v)))
    }

    /// Computational basis product state `|i_1 i_2 ... i_n>`.
    pub fn basis(dims: &[usize], indices: &[usize]) -> Result<Self> {
        if dims.len() != indices.len() {
            return Err(Error::InvalidSubsystems("one index per subsystem required".into()));
        }
        let mut flat = 0;
        for (&d, &i) in dims.iter().zip(indices) {
            if i >= d {
                return Err(Error::InvalidSubsystems(format!("index {i} out of range for dimension {d}")));
            }
            flat = flat * d + i;
        }
        let layout = SubsystemLayout::new(dims.to_vec())?;
        let n = layout.total_dim();
        let mut m = CMat::zeros(n, n);
        m[(flat, flat)] = linalg::ONE;
        Ok(Self { layout, matrix: m })
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let layout = SubsystemLayout::new(dims.to_vec())?;
        let n = layout.total_dim();
        Ok(Self {
            layout,
            matrix: linalg::identity(n) * c(1.0 / n as f64, 0.0),
        })
    }

    /// Diagonal state with the given probabilities on the joint computational basis.
    pub fn diagonal(dims: &[usize], probs: &[f64]) -> Result<Self> {
        let layout = SubsystemLayout::new(dims.to_vec())?;
        let p = ProbVector::new(probs.to_vec())?;
        if p.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                found: p.len(),
            });
        }
        let n = p.len();
        let mut m = CMat::zeros(n, n);
        for (i, &pi) in p.as_slice().iter().enumerate() {
            m[(i, i)] = c(pi, 0.0);
        }
        Ok(Self { layout, matrix: m })
    }

    /// Convex combination `sum_k w_k rho_k` of states sharing a layout.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        let w = ProbVector::new(weights.to_vec())?;
        if states.is_empty() || states.len() != w.len() {
            return Err(Error::InvalidArgument("one weight per state required".into()));
        }
        let layout = states[0].layout.clone();
        let n = layout.total_dim();
        let mut m = CMat::zeros(n, n);
        for (wk, s) in w.as_slice().iter().zip(states) {
            if s.layout.dims != layout.dims {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.dim(),
                });
            }
            m += &s.matrix * c(*wk, 0.0);
        }
        Ok(Self::from_trusted(layout, m))
    }

    /// `U rho U^dagger` for a unitary on the full space.
    pub fn conjugate(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_trusted(self.layout.clone(), u * &self.matrix * u.adjoint()))
    }

    /// Same matrix with a different factorization of the total dimension.
    pub fn relabel(&self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: layout.total_dim(),
            });
        }
        Ok(Self {
            layout,
            matrix: self.matrix.clone(),
        })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dims(&self) -> &[usize] {
        &self.layout.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn rank(&self, cut: f64) -> usize {
        self.eigenvalues().iter().filter(|&&x| x > cut).count()
    }

    /// Convenience wrapper for [`partial_trace`].
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

/// Probability vector; entries in `[-PSD, 0)` are clipped to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        let mut p = p;
        for x in p.iter_mut() {
            if !x.is_finite() || *x < -tol::PSD || *x > 1.0 + tol::TRACE {
                return Err(Error::InvalidDistribution(format!("entry {x} outside [0, 1]")));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
        }
        Ok(Self(p))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.0)
    }
}

/// Joint distribution over one outcome index per measured party, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalJoint {
    shape: Vec<usize>,
    p: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(shape: Vec<usize>, p: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidDistribution(format!("bad shape {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if n != p.len() {
            return Err(Error::InvalidDistribution(format!(
                "shape {shape:?} needs {n} entries, got {}",
                p.len()
            )));
        }
        let p = ProbVector::new(p)?.0;
        Ok(Self { shape, p })
    }

    /// Bipartite joint from a row-major `rows x cols` table.
    pub fn from_table(table: &[Vec<f64>]) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged table".into()));
        }
        Self::new(vec![rows, cols], table.concat())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let mut flat = 0;
        for (&d, &i) in self.shape.iter().zip(index) {
            flat = flat * d + i;
        }
        self.p[flat]
    }

    /// Marginal distribution of one party.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.shape[axis]];
        let inner: usize = self.shape[axis + 1..].iter().product();
        for (flat, &x) in self.p.iter().enumerate() {
            out[(flat / inner) % self.shape[axis]] += x;
        }
        out
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.p)
    }
}

/// Kronecker product with concatenated layouts.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix {
        layout: a.layout.concat(&b.layout),
        matrix: linalg::kron(&a.matrix, &b.matrix),
    }
}

/// Tensor product of several states, left to right.
pub fn tensor_all(states: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("no states".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, s| tensor(&acc, s)))
}

fn normalize_positions(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("empty keep set".into()));
    }
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if let Some(&bad) = k.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidSubsystems(format!(
            "position {bad} out of range for {n} subsystems"
        )));
    }
    Ok(k)
}

/// Reduced matrix on the (sorted) positions `keep` of a register with local
/// dimensions `dims`. No validation; used in hot loops.
pub(crate) fn partial_trace_matrix(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let mut kept = vec![false; n];
    for &p in keep {
        kept[p] = true;
    }
    let dk: usize = keep.iter().map(|&p| dims[p]).product();
    let dt = total / dk;
    // split every joint index into (kept, traced) parts
    let mut kidx = vec![0usize; total];
    let mut tidx = vec![0usize; total];
    for x in 0..total {
        let mut rem = x;
        let mut digits = vec![0usize; n];
        for s in (0..n).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let (mut k, mut t) = (0usize, 0usize);
        for s in 0..n {
            if kept[s] {
                k = k * dims[s] + digits[s];
            } else {
                t = t * dims[s] + digits[s];
            }
        }
        kidx[x] = k;
        tidx[x] = t;
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); dt];
    for x in 0..total {
        groups[tidx[x]].push(x);
    }
    let mut out = CMat::zeros(dk, dk);
    for g in &groups {
        for &x in g {
            for &y in g {
                out[(kidx[x], kidx[y])] += m[(x, y)];
            }
        }
    }
    out
}

/// Reduced state on the subsystems in `keep` (order follows the layout).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = normalize_positions(keep, rho.layout.len())?;
    let m = partial_trace_matrix(&rho.matrix, &rho.layout.dims, &keep);
    Ok(DensityMatrix::from_trusted(rho.layout.select(&keep), m))
}

/// Index map for reordering subsystems: output subsystem `j` is input
/// subsystem `perm[j]`.
pub(crate) fn permutation_indices(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for (y, slot) in map.iter_mut().enumerate() {
        // digits of y in the new order
        let mut rem = y;
        for j in (0..n).rev() {
            digits[perm[j]] = rem % new_dims[j];
            rem /= new_dims[j];
        }
        let mut x = 0;
        for s in 0..n {
            x = x * dims[s] + digits[s];
        }
        *slot = x;
    }
    map
}

/// Reorders subsystems: output subsystem `j` is input subsystem `perm[j]`.
pub fn permute_subsystems(rho: &DensityMatrix, perm: &[usize]) -> Result<DensityMatrix> {
    let n = rho.layout.len();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidSubsystems(format!("permutation of length {} for {n} subsystems", perm.len())));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidSubsystems(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let map = permutation_indices(&rho.layout.dims, perm);
    let d = rho.dim();
    let m = CMat::from_fn(d, d, |i, j| rho.matrix[(map[i], map[j])]);
    Ok(DensityMatrix {
        layout: rho.layout.select(perm),
        matrix: m,
    })
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}

/// Entropy in bits of a spectrum: negatives are clipped, the rest renormalized.
pub(crate) fn spectrum_entropy(values: &[f64]) -> f64 {
    let total: f64 = values.iter().filter(|&&x| x > 0.0).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = values
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| {
            let p = x / total;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Entropy in bits of a raw (unnormalized-trace allowed) PSD matrix; checks
/// Hermiticity and the eigenvalue floor.
pub fn matrix_entropy(m: &CMat) -> Result<f64> {
    let herm = linalg::hermiticity_defect(m);
    if herm > tol::HERMITIAN {
        return Err(Error::NotHermitian(herm));
    }
    let ev = linalg::herm_eigenvalues(m);
    if ev[0] < -tol::PSD {
        return Err(Error::NotPsd(ev[0]));
    }
    Ok(spectrum_entropy(&ev))
}

/// Entropy of a matrix known to be a state (internal fast path).
pub(crate) fn entropy_unchecked(m: &CMat) -> f64 {
    spectrum_entropy(&linalg::herm_eigenvalues(m))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_unchecked(&rho.matrix)
}

fn check_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `S(rho || sigma)` in bits; `+inf` when the support of `rho` is not
/// contained in the support of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let r = linalg::herm_eigen(&rho.matrix);
    let s = linalg::herm_eigen(&sigma.matrix);
    // weight of rho on the kernel of sigma
    let mut leak = 0.0;
    for (k, &mu) in s.values.iter().enumerate() {
        if mu <= tol::SUPPORT {
            let v = s.vectors.column(k);
            leak += (v.adjoint() * &rho.matrix * v)[(0, 0)].re;
        }
    }
    if leak > tol::SUPPORT {
        return Ok(f64::INFINITY);
    }
    let neg_entropy: f64 = r
        .values
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum();
    let log_sigma = s.map(|x| if x > tol::SUPPORT { x.log2() } else { 0.0 });
    let cross = (&rho.matrix * log_sigma).trace().re;
    Ok((neg_entropy - cross).max(0.0))
}

/// `1/2 || rho - sigma ||_1`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    Ok(trace_distance_matrix(&rho.matrix, &sigma.matrix))
}

pub(crate) fn trace_distance_matrix(a: &CMat, b: &CMat) -> f64 {
    0.5 * linalg::herm_eigenvalues(&(a - b))
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`, in `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    Ok(fidelity_matrix(&rho.matrix, &sigma.matrix))
}

pub(crate) fn fidelity_matrix(a: &CMat, b: &CMat) -> f64 {
    let sa = linalg::psd_sqrt(a);
    let inner = &sa * b * &sa;
    let root: f64 = linalg::herm_eigenvalues(&inner)
        .iter()
        .map(|&x| if x > 0.0 { x.sqrt() } else { 0.0 })
        .sum();
    (root * root).clamp(0.0, 1.0)
}

/// On-disk state format: `{"dims":[...], "matrix":[[re,im],...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

pub(crate) fn flatten_matrix(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub(crate) fn unflatten_matrix(rows: usize, cols: usize, data: &[[f64; 2]]) -> Result<CMat> {
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} matrix entries, found {}",
            rows * cols,
            data.len()
        )));
    }
    if data.iter().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(Error::Parse("non-finite matrix entry".into()));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| {
        let z = data[i * cols + j];
        c(z[0], z[1])
    }))
}

/// Dense complex matrix as `{"rows", "cols", "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat) -> Self {
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            entries: flatten_matrix(m),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        unflatten_matrix(self.rows, self.cols, &self.entries)
    }
}

/// `serde(with)` adapter for optional matrices.
pub(crate) mod opt_matrix {
    use super::{CMat, MatrixFile};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixFile::from_matrix).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMat>, D::Error> {
        Option::<MatrixFile>::deserialize(d)?
            .map(|f| f.to_matrix().map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl From<DensityMatrix> for StateFile {
    fn from(rho: DensityMatrix) -> Self {
        StateFile {
            dims: rho.layout.dims.clone(),
            matrix: flatten_matrix(&rho.matrix),
            labels: rho.layout.labels.clone(),
        }
    }
}

impl TryFrom<StateFile> for DensityMatrix {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        let mut layout = SubsystemLayout::new(f.dims)?;
        if let Some(labels) = f.labels {
            layout = layout.with_labels(labels)?;
        }
        let d = layout.total_dim();
        if f.matrix.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: f.matrix.len(),
            });
        }
        let m = unflatten_matrix(d, d, &f.matrix)?;
        DensityMatrix::new(layout, m)
    }
}

impl DensityMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(s)?;
        DensityMatrix::try_from(file)
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Bell state `(|00> + |11>)/sqrt 2`.
pub fn phi_plus() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DensityMatrix::pure(&[2, 2], &[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]).unwrap()
}

/// `n`-qubit GHZ state.
pub fn ghz(n: usize) -> DensityMatrix {
    let dim = 1usize << n;
    let mut amp = vec![c(0., 0.); dim];
    amp[0] = c(1., 0.);
    amp[dim - 1] = c(1., 0.);
    DensityMatrix::pure(&vec![2; n], &amp).unwrap()
}

/// Qubit states `|0>`, `|1>`, `|+>`, `|->` as density matrices.
pub fn qubit(label: char) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amp = match label {
        '0' => [c(1., 0.), c(0., 0.)],
        '1' => [c(0., 0.), c(1., 0.)],
        '+' => [c(s, 0.), c(s, 0.)],
        '-' => [c(s, 0.), c(-s, 0.)],
        _ => panic!("unknown qubit label {label}"),
    };
    DensityMatrix::pure(&[2], &amp).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::{haar_unitary, random_density, rng_for};
    use proptest::prelude::*;

    // index-by-index Kronecker oracle
    fn kron_oracle(a: &CMat, b: &CMat) -> CMat {
        let (m, n) = (a.nrows(), b.nrows());
        let mut out = CMat::zeros(m * n, m * n);
        for i in 0..m {
            for j in 0..m {
                for k in 0..n {
                    for l in 0..n {
                        out[(i * n + k, j * n + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    // explicit sum over the traced index of a d_a x d_b state
    fn trace_b_oracle(m: &CMat, da: usize, db: usize) -> CMat {
        let mut out = CMat::zeros(da, da);
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    out[(i, j)] += m[(i * db + k, j * db + k)];
                }
            }
        }
        out
    }

    fn trace_a_oracle(m: &CMat, da: usize, db: usize) -> CMat {
        let mut out = CMat::zeros(db, db);
        for k in 0..db {
            for l in 0..db {
                for i in 0..da {
                    out[(k, l)] += m[(i * db + k, i * db + l)];
                }
            }
        }
        out
    }

    #[test]
    fn tensor_of_maximally_mixed_qubits() {
        let h = DensityMatrix::maximally_mixed(&[2]).unwrap();
        let t = tensor(&h, &h);
        assert_eq!(t.dims(), &[2, 2]);
        assert!(linalg::max_abs_diff(t.matrix(), &(linalg::identity(4) * c(0.25, 0.))) < 1e-15);
    }

    #[test]
    fn tensor_of_basis_states() {
        let t = tensor(&qubit('0'), &qubit('1'));
        let expect = DensityMatrix::basis(&[2, 2], &[0, 1]).unwrap();
        assert!(linalg::max_abs_diff(t.matrix(), expect.matrix()) < 1e-15);
    }

    #[test]
    fn tensor_matches_index_oracle() {
        let mut rng = rng_for(7, 0);
        for _ in 0..10 {
            let a = random_density(&[2], 2, &mut rng).unwrap();
            let b = random_density(&[2], 2, &mut rng).unwrap();
            let t = tensor(&a, &b);
            assert!(linalg::max_abs_diff(t.matrix(), &kron_oracle(a.matrix(), b.matrix())) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let r = partial_trace(&phi_plus(), &[0]).unwrap();
        assert!(linalg::max_abs_diff(r.matrix(), &(linalg::identity(2) * c(0.5, 0.))) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_oracle() {
        let mut rng = rng_for(8, 0);
        for _ in 0..10 {
            let rho = random_density(&[2, 3], 6, &mut rng).unwrap();
            let a = partial_trace(&rho, &[0]).unwrap();
            let b = partial_trace(&rho, &[1]).unwrap();
            assert!(linalg::max_abs_diff(a.matrix(), &trace_b_oracle(rho.matrix(), 2, 3)) <= 1e-12);
            assert!(linalg::max_abs_diff(b.matrix(), &trace_a_oracle(rho.matrix(), 2, 3)) <= 1e-12);
            assert_eq!(b.dims(), &[3]);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let rho = phi_plus();
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::InvalidSubsystems(_))));
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidSubsystems(_))));
    }

    #[test]
    fn entropy_examples() {
        let h = DensityMatrix::maximally_mixed(&[2]).unwrap();
        assert!((von_neumann_entropy(&h) - 1.0).abs() < 1e-14);
        assert!(von_neumann_entropy(&phi_plus()).abs() < 1e-12);
        let d = DensityMatrix::diagonal(&[2], &[0.75, 0.25]).unwrap();
        // h(1/4) evaluated directly
        let h14 = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((von_neumann_entropy(&d) - h14).abs() < 1e-14);
        assert!((h14 - 0.811_278_1).abs() < 1e-7);
    }

    #[test]
    fn matrix_entropy_rejects_non_hermitian() {
        let mut m = linalg::identity(2) * c(0.5, 0.);
        m[(0, 1)] = c(0.1, 0.);
        assert!(matches!(matrix_entropy(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = phi_plus();
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);
        let inf = relative_entropy(&qubit('0'), &qubit('1')).unwrap();
        assert!(inf.is_infinite());
        let marg = tensor(&rho.reduce(&[0]).unwrap(), &rho.reduce(&[1]).unwrap());
        assert!((relative_entropy(&rho, &marg).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            relative_entropy(&rho, &qubit('0')),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let rho = phi_plus();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        assert!((trace_distance(&qubit('0'), &qubit('1')).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&qubit('0'), &qubit('1')).unwrap() < 1e-14);
        let td = trace_distance(&qubit('0'), &qubit('+')).unwrap();
        assert!((td - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((fidelity(&qubit('0'), &qubit('+')).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn file_reader_reports_first_violation() {
        let bad_len = r#"{"dims":[2],"matrix":[[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(DensityMatrix::from_json(bad_len), Err(Error::DimensionMismatch { .. })));
        let non_herm = r#"{"dims":[2],"matrix":[[0.5,0],[0.1,0],[0,0],[0.5,0]]}"#;
        assert!(matches!(DensityMatrix::from_json(non_herm), Err(Error::NotHermitian(_))));
        let bad_tr = r#"{"dims":[2],"matrix":[[0.5,0],[0,0],[0,0],[0.6,0]]}"#;
        assert!(matches!(DensityMatrix::from_json(bad_tr), Err(Error::InvalidTrace(_))));
        let not_psd = r#"{"dims":[2],"matrix":[[1.5,0],[0,0],[0,0],[-0.5,0]]}"#;
        assert!(matches!(DensityMatrix::from_json(not_psd), Err(Error::NotPsd(_))));
        let zero_dim = r#"{"dims":[0],"matrix":[]}"#;
        assert!(matches!(DensityMatrix::from_json(zero_dim), Err(Error::InvalidLayout(_))));
        assert!(matches!(DensityMatrix::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn file_roundtrip_is_exact() {
        let mut rng = rng_for(3, 1);
        let rho = random_density(&[2, 3], 4, &mut rng).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn permutation_is_an_involution_for_swaps() {
        let mut rng = rng_for(5, 0);
        let rho = random_density(&[2, 3, 2, 3], 3, &mut rng).unwrap();
        let p = permute_subsystems(&rho, &[0, 2, 1, 3]).unwrap();
        assert_eq!(p.dims(), &[2, 2, 3, 3]);
        let back = permute_subsystems(&p, &[0, 2, 1, 3]).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        // permuting then tracing equals tracing the matching positions
        let a = partial_trace(&p, &[0, 2]).unwrap();
        let b = partial_trace(&rho, &[0, 1]).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), b.matrix()) < 1e-14);
    }

    #[test]
    fn classical_joint_marginals() {
        let j = ClassicalJoint::from_table(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert_eq!(j.marginal(0), vec![0.5, 0.5]);
        assert_eq!(j.marginal(1), vec![0.5, 0.5]);
        assert!(ClassicalJoint::from_table(&[vec![0.4, 0.1], vec![0.1]]).is_err());
        assert!(ClassicalJoint::from_table(&[vec![0.5, 0.6]]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn entropy_is_unitarily_invariant(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[3], 2, &mut rng).unwrap();
            let u = haar_unitary(3, &mut rng).unwrap();
            let rotated = rho.conjugate(&u).unwrap();
            prop_assert!((von_neumann_entropy(&rho) - von_neumann_entropy(&rotated)).abs() <= 1e-10);
        }

        #[test]
        fn subadditivity(seed in any::<u64>(), rank in 1usize..=6) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[2, 3], rank, &mut rng).unwrap();
            let sa = von_neumann_entropy(&rho.reduce(&[0]).unwrap());
            let sb = von_neumann_entropy(&rho.reduce(&[1]).unwrap());
            prop_assert!(von_neumann_entropy(&rho) <= sa + sb + 1e-10);
        }

        #[test]
        fn trace_of_tensor_recovers_factor(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let a = random_density(&[3], 2, &mut rng).unwrap();
            let b = random_density(&[2], 2, &mut rng).unwrap();
            let back = partial_trace(&tensor(&a, &b), &[0]).unwrap();
            prop_assert!(linalg::max_abs_diff(back.matrix(), a.matrix()) <= 1e-12);
        }

        #[test]
        fn relative_entropy_nonnegative_and_faithful(seed in any::<u64>()) {
            let mut rng = rng_for(seed, 0);
            let rho = random_density(&[2, 2], 2, &mut rng).unwrap();
            let sigma = random_density(&[2, 2], 4, &mut rng).unwrap();
            let d = relative_entropy(&rho, &sigma).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!(d > 1e-12 || trace_distance(&rho, &sigma).unwrap() <= 1e-8);
            let full = random_density(&[2, 2], 4, &mut rng).unwrap();
            prop_assert!(relative_entropy(&full, &full).unwrap() <= 1e-10);
        }
    }
}
