use rayon::prelude::*;

use super::matrix::ConsensusMatrix;
use crate::cluster::{run_algorithm, Algorithm, AlgorithmOptions, ClusterInput, SimilarityMatrix};
use crate::data_model::{Clustering, DataMatrix, Ensemble, Provenance};
use crate::dimred::{reduce, ReducedMatrix, ReductionMethod};
use crate::error::{IccError, Result};

/// One matrix the ensemble clusters, with an optional similarity matrix
/// over the same objects for the graph algorithms.
#[derive(Debug, Clone)]
pub struct EnsembleInput {
    pub id: String,
    pub data: DataMatrix,
    pub similarity: Option<SimilarityMatrix>,
    pub reduction: Option<ReductionMethod>,
    pub rank: Option<usize>,
}

impl EnsembleInput {
    pub fn raw(id: impl Into<String>, data: DataMatrix) -> Self {
        Self {
            id: id.into(),
            data,
            similarity: None,
            reduction: None,
            rank: None,
        }
    }

    pub fn reduced(r: &ReducedMatrix) -> Result<Self> {
        Ok(Self {
            id: r.id(),
            data: r.to_data()?,
            similarity: None,
            reduction: Some(r.method),
            rank: Some(r.rank),
        })
    }

    /// A consensus matrix serves both as feature rows and as the affinity.
    pub fn consensus(id: impl Into<String>, cm: &ConsensusMatrix) -> Result<Self> {
        Ok(Self {
            id: id.into(),
            data: cm.as_data()?,
            similarity: Some(cm.to_similarity()?),
            reduction: None,
            rank: None,
        })
    }

    pub fn with_similarity(mut self, s: SimilarityMatrix) -> Self {
        self.similarity = Some(s);
        self
    }

    /// Attaches the cosine similarity of the data rows.
    pub fn with_cosine(self) -> Result<Self> {
        let s = SimilarityMatrix::cosine(&self.data)?;
        Ok(self.with_similarity(s))
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }
}

/// The configured reductions of `x`, plus `x` itself when `include_raw`
/// (listed first). With `graph`, each input carries the cosine similarity
/// of its rows. Reduction seeds derive from `seed`, the method and the rank.
pub fn reduction_inputs(
    x: &DataMatrix,
    reductions: &[(ReductionMethod, usize)],
    include_raw: bool,
    graph: bool,
    seed: u64,
) -> Result<Vec<EnsembleInput>> {
    let mut inputs = Vec::new();
    if include_raw {
        inputs.push(EnsembleInput::raw("raw", x.clone()));
    }
    for &(method, rank) in reductions {
        let r = reduce(x, method, rank, derive_seed(seed, "reduce", method.id(), rank))?;
        inputs.push(EnsembleInput::reduced(&r)?);
    }
    if graph {
        inputs = inputs
            .into_iter()
            .map(EnsembleInput::with_cosine)
            .collect::<Result<_>>()?;
    }
    Ok(inputs)
}

/// Seed for one (input, algorithm, k̃) run: FNV-1a over the master seed and
/// the triple, finished with a splitmix64 mix.
pub fn derive_seed(master: u64, input_id: &str, algorithm_id: &str, k: usize) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&master.to_le_bytes());
    eat(input_id.as_bytes());
    eat(&[0xff]);
    eat(algorithm_id.as_bytes());
    eat(&[0xff]);
    eat(&(k as u64).to_le_bytes());
    splitmix64(h)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub ensemble: Ensemble,
    /// One line per skipped triple.
    pub warnings: Vec<String>,
}

/// Runs every (input, algorithm, k̃) triple, in parallel on the current
/// rayon pool. Members are ordered by input, then algorithm, then k̃
/// regardless of scheduling. Triples whose algorithm rejects its input are
/// skipped with a warning.
pub fn run_ensemble(
    inputs: &[EnsembleInput],
    algos: &[Algorithm],
    ks: &[usize],
    seed: u64,
    opts: &AlgorithmOptions,
) -> Result<EnsembleRun> {
    let first = inputs.first().ok_or(IccError::Empty("ensemble inputs"))?;
    if algos.is_empty() {
        return Err(IccError::Empty("algorithm list"));
    }
    if ks.is_empty() {
        return Err(IccError::Empty("k list"));
    }
    let n = first.n();
    for input in inputs {
        if input.n() != n {
            return Err(IccError::LengthMismatch {
                expected: n,
                found: input.n(),
            });
        }
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(IccError::InvalidK { k, n });
    }

    let triples: Vec<(&EnsembleInput, Algorithm, usize)> = inputs
        .iter()
        .flat_map(|i| algos.iter().flat_map(move |&a| ks.iter().map(move |&k| (i, a, k))))
        .collect();
    let results: Vec<(Provenance, Result<Clustering>)> = triples
        .par_iter()
        .map(|&(input, algo, k)| {
            let s = derive_seed(seed, &input.id, algo.id(), k);
            let cluster_input = ClusterInput {
                data: &input.data,
                similarity: input.similarity.as_ref(),
            };
            let provenance = Provenance {
                algorithm: algo,
                input: input.id.clone(),
                reduction: input.reduction,
                rank: input.rank,
                k_requested: k,
                seed: s,
            };
            (provenance, run_algorithm(algo, cluster_input, k, s, opts))
        })
        .collect();

    let mut ensemble = Ensemble::new(n);
    let mut warnings = Vec::new();
    for (p, r) in results {
        match r {
            Ok(c) => ensemble.push(c, p)?,
            Err(e) => warnings.push(format!(
                "skipped {} on {} with k={}: {e}",
                p.algorithm, p.input, p.k_requested
            )),
        }
    }
    if ensemble.is_empty() {
        return Err(IccError::NoClusterings(format!(
            "all {} runs failed; first: {}",
            triples.len(),
            warnings.first().map(String::as_str).unwrap_or("none")
        )));
    }
    Ok(EnsembleRun { ensemble, warnings })
}
