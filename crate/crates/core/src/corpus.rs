//! Labeled test states: classical-classical, classical-quantum,
//! separable states that are not classical on either side, and entangled
//! states.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::Kind;
use crate::error::{Error, Result};
use crate::linalg;
use crate::optimize::{haar_unitary, random_density, random_pure_vector, rng_for};
use crate::state::{phi_plus, tensor, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Cc,
    Cq,
    Separable,
    Entangled,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Cc, Label::Cq, Label::Separable, Label::Entangled];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Cc => "cc",
            Label::Cq => "cq",
            Label::Separable => "separable",
            Label::Entangled => "entangled",
        }
    }

    /// Classifier verdict expected for states with this label.
    pub fn expected_kind(self) -> Kind {
        match self {
            Label::Cc => Kind::CC,
            Label::Cq => Kind::CQ,
            Label::Separable | Label::Entangled => Kind::Neither,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown label {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub label: Label,
    /// Pure states have `min(S(A), S(B))` as an analytic ceiling on the
    /// two-sided measured information.
    pub pure: bool,
    pub state: DensityMatrix,
}

const DIMS: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];

fn probs<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + floor).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

fn pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::pure(&[d], &random_pure_vector(d, rng)).expect("normalized")
}

fn cc_state<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DensityMatrix {
    let (da, db) = DIMS[k % DIMS.len()];
    let mut p = probs(da * db, 0.02, rng);
    if k % 5 == 4 {
        // identical conditional rows on A
        for j in 0..db {
            p[db + j] = p[j];
        }
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
    }
    let u = haar_unitary(da, rng).expect("d >= 1");
    let v = haar_unitary(db, rng).expect("d >= 1");
    DensityMatrix::diagonal(&[da, db], &p)
        .expect("distribution")
        .conjugate(&linalg::kron(&u, &v))
        .expect("unitary")
}

fn cq_state<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DensityMatrix {
    if k == 0 {
        let a = tensor(&DensityMatrix::basis(&[2], &[0]).unwrap(), &pure_state_label('0'));
        let b = tensor(&DensityMatrix::basis(&[2], &[1]).unwrap(), &pure_state_label('+'));
        return DensityMatrix::mixture(&[0.5, 0.5], &[a, b]).unwrap();
    }
    let (da, db) = DIMS[k % DIMS.len()];
    let p = probs(da, 0.1, rng);
    let u = haar_unitary(da, rng).expect("d >= 1");
    let parts: Vec<DensityMatrix> = (0..da)
        .map(|i| {
            let a = DensityMatrix::basis(&[da], &[i]).unwrap().conjugate(&u).unwrap();
            let rank = 1 + (i + k) % db;
            tensor(&a, &random_density(&[db], rank, rng).expect("rank"))
        })
        .collect();
    DensityMatrix::mixture(&p, &parts).expect("mixture")
}

fn pure_state_label(l: char) -> DensityMatrix {
    crate::state::qubit(l)
}

fn separable_state<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DensityMatrix {
    if k == 0 {
        let a = tensor(&pure_state_label('0'), &pure_state_label('0'));
        let b = tensor(&pure_state_label('+'), &pure_state_label('+'));
        return DensityMatrix::mixture(&[0.5, 0.5], &[a, b]).unwrap();
    }
    let (da, db) = DIMS[k % DIMS.len()];
    let terms = 3;
    let p = probs(terms, 0.2, rng);
    let parts: Vec<DensityMatrix> = (0..terms)
        .map(|_| tensor(&pure_state(da, rng), &pure_state(db, rng)))
        .collect();
    DensityMatrix::mixture(&p, &parts).expect("mixture")
}

fn entangled_state<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (DensityMatrix, bool) {
    match k % 3 {
        0 => {
            // Bell state in random local bases
            let u = haar_unitary(2, rng).expect("d >= 1");
            let v = haar_unitary(2, rng).expect("d >= 1");
            (phi_plus().conjugate(&linalg::kron(&u, &v)).unwrap(), true)
        }
        1 => {
            // Werner-type mixture above the separability threshold 1/3
            let w = 0.55 + 0.4 * rng.random::<f64>();
            let noise = DensityMatrix::maximally_mixed(&[2, 2]).unwrap();
            (DensityMatrix::mixture(&[w, 1.0 - w], &[phi_plus(), noise]).unwrap(), false)
        }
        _ => {
            let (da, db) = DIMS[k % DIMS.len()];
            let amp = random_pure_vector(da * db, rng);
            (DensityMatrix::pure(&[da, db], &amp).unwrap(), true)
        }
    }
}

/// `per_label` states of each label, reproducible from `seed`.
pub fn generate(per_label: usize, seed: u64) -> Vec<CorpusEntry> {
    let mut out = Vec::with_capacity(4 * per_label);
    for (li, label) in Label::ALL.into_iter().enumerate() {
        for k in 0..per_label {
            let mut rng = rng_for(seed, (li * 1_000_000 + k) as u64);
            let (state, pure) = match label {
                Label::Cc => (cc_state(k, &mut rng), false),
                Label::Cq => (cq_state(k, &mut rng), false),
                Label::Separable => (separable_state(k, &mut rng), false),
                Label::Entangled => entangled_state(k, &mut rng),
            };
            out.push(CorpusEntry {
                id: format!("{}-{:02}", label, k),
                label,
                pure,
                state,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub label: Label,
    pub pure: bool,
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST: &str = "corpus.json";

/// Writes one state file per entry plus `corpus.json`.
pub fn write(dir: impl AsRef<Path>, entries: &[CorpusEntry], seed: u64) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        seed,
        entries: Vec::new(),
    };
    for e in entries {
        let file = format!("{}.json", e.id);
        e.state.write(dir.join(&file))?;
        manifest.entries.push(ManifestEntry {
            id: e.id.clone(),
            label: e.label,
            pure: e.pure,
            file,
        });
    }
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    std::fs::write(dir.join(MANIFEST), text)?;
    Ok(())
}

pub fn read(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let dir = dir.as_ref();
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST))?)?;
    manifest
        .entries
        .into_iter()
        .map(|m| {
            Ok(CorpusEntry {
                state: DensityMatrix::read(dir.join(&m.file))?,
                id: m.id,
                label: m.label,
                pure: m.pure,
            })
        })
        .collect()
}
