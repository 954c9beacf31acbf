//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal.
//!
//! The optional corpus check reads `ICC_MCC_PATH` / `ICC_NG6_PATH`
//! (term-document matrix-market files) and is reported but never gating.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use icc_cli::config::{Mode, RunConfig};
use icc_cli::io::{load_matrix, save_matrix, InputFormat};
use icc_cli::pipeline::run_full;
use icc_core::cluster::{Algorithm, AlgorithmOptions};
use icc_core::consensus::{
    apply_intolerance, build_consensus, icc_part2, reduction_inputs, run_ensemble, ConsensusMatrix, Part2Config,
    Part2Start,
};
use icc_core::data_model::{accuracy, Clustering, Ensemble};
use icc_core::dimred::ReductionMethod;
use icc_core::perron::{deviation_from_reducibility, icc_part1, spectrum, BlockPartition, Part1Config, TransitionView};
use icc_core::synth::{gaussian_blobs, noisy_block_matrix, BlobSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Clustering {
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Clustering::from_labels(&raw).unwrap()
}

fn random_ensemble(rng: &mut ChaCha8Rng, max_n: usize, max_t: usize) -> Ensemble {
    let n = rng.random_range(2..=max_n);
    let t = rng.random_range(1..=max_t);
    let members = (0..t)
        .map(|_| {
            let k = rng.random_range(1..=n.min(6));
            random_labels(rng, n, k)
        })
        .collect();
    Ensemble::from_clusterings(members).unwrap()
}

fn consensus_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..200 {
        let e = random_ensemble(&mut rng, 30, 10);
        let cm = build_consensus(&e).unwrap();
        let n = e.n();
        let t = e.len() as u32;
        for i in 0..n {
            for j in 0..n {
                let brute = e
                    .clusterings()
                    .iter()
                    .filter(|c| c.labels()[i] == c.labels()[j])
                    .count() as u32;
                let got = cm.counts()[(i, j)];
                if got != brute || got != cm.counts()[(j, i)] || (i == j && got != t) {
                    return outcome(false, format!("trial {trial} entry ({i}, {j}): {got} vs {brute}"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(secs < 5.0, format!("200 ensembles exact, {secs:.2} s"))
}

fn block_ones(sizes: &[usize]) -> ConsensusMatrix {
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = labels.len();
    let counts = DMatrix::from_fn(n, n, |r, c| u32::from(labels[r] == labels[c]));
    ConsensusMatrix::from_counts(counts, 1).unwrap()
}

fn spectral_oracle() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for k in 2..=6 {
        let mut layouts: Vec<Vec<usize>> = (2..=6).map(|s| vec![s; k]).collect();
        layouts.push((0..k).map(|b| 2 + b % 5).collect());
        for sizes in layouts {
            let cm = block_ones(&sizes);
            let s = spectrum(&cm, 20.min(cm.n())).unwrap();
            let ones = s.eigenvalues.iter().filter(|v| (*v - 1.0).abs() < 1e-8).count();
            if ones != k || s.k_estimate != k {
                return outcome(
                    false,
                    format!("sizes {sizes:?}: {ones} unit eigenvalues, estimate {}", s.k_estimate),
                );
            }
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(secs < 5.0, format!("{cases} block layouts, {secs:.2} s"))
}

fn uncoupling_monotonicity() -> Outcome {
    let mut gaps = Vec::new();
    let mut estimates = Vec::new();
    for eps in [0.3, 0.1, 0.03, 0.01] {
        let (s, _) = noisy_block_matrix(&[5, 5, 5], eps, 7).unwrap();
        let r = spectrum(&s, 15).unwrap();
        gaps.push(r.eigenvalues[2] - r.eigenvalues[3]);
        estimates.push(r.k_estimate);
    }
    let increasing = gaps.windows(2).all(|w| w[1] > w[0]);
    let pass = increasing && estimates[2] == 3 && estimates[3] == 3;
    let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.4}")).collect();
    outcome(pass, format!("gaps [{}], estimates {estimates:?}", shown.join(", ")))
}

fn similarity_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let cm = build_consensus(&random_ensemble(&mut rng, 50, 10)).unwrap();
        let n = cm.n();
        let counts = cm.to_f64();
        let p = DMatrix::from_fn(n, n, |r, c| counts[(r, c)] / counts.row(r).sum());
        let mut dense: Vec<f64> = p.complex_eigenvalues().iter().map(|z| z.re).collect();
        dense.sort_by(|a, b| b.total_cmp(a));
        let symmetric = spectrum(&cm, n).unwrap().eigenvalues;
        for (a, b) in symmetric.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
        if worst >= 1e-8 {
            return outcome(false, format!("trial {trial}: deviation {worst:.2e}"));
        }
    }
    outcome(true, format!("50 matrices, max deviation {worst:.2e}"))
}

struct BlobRun {
    k_estimate: usize,
    final_accuracy: f64,
    mean_accuracy: f64,
}

fn blob_run(seed: u64) -> BlobRun {
    let (x, truth) = gaussian_blobs(&BlobSpec::uniform(3, 100, 10, 12.0, seed)).unwrap();
    let algos = vec![Algorithm::Kmeans, Algorithm::Pddp, Algorithm::PddpKmeans];
    let reductions = vec![(ReductionMethod::Svd, 10), (ReductionMethod::Pca, 10)];
    let p1 = Part1Config::new(reductions.clone(), algos.clone(), (4..=10).collect());
    let est = icc_part1(&x, &p1, seed).unwrap();

    let p2 = Part2Config::new(3, algos.clone());
    let vote = icc_part2(Part2Start::Consensus(est.final_cm.clone()), &p2, seed).unwrap();
    let final_accuracy = accuracy(&vote.final_clustering, &truth).unwrap();

    // each algorithm on its own at the true k
    let inputs = reduction_inputs(&x, &reductions, false, false, seed).unwrap();
    let solo = run_ensemble(&inputs, &algos, &[3], seed, &AlgorithmOptions::default()).unwrap();
    let accs: Vec<f64> = solo
        .ensemble
        .clusterings()
        .iter()
        .map(|c| accuracy(c, &truth).unwrap())
        .collect();
    BlobRun {
        k_estimate: est.k_estimate,
        final_accuracy,
        mean_accuracy: accs.iter().sum::<f64>() / accs.len() as f64,
    }
}

fn blob_criteria() -> (Outcome, Outcome) {
    let start = Instant::now();
    let runs: Vec<BlobRun> = (0..10).map(blob_run).collect();
    let secs = start.elapsed().as_secs_f64();
    let recovered = runs.iter().filter(|r| r.k_estimate == 3).count();
    let estimates: Vec<usize> = runs.iter().map(|r| r.k_estimate).collect();
    let k_recovery = outcome(
        recovered >= 9 && secs < 60.0,
        format!("k = 3 on {recovered}/10 seeds {estimates:?}, {secs:.1} s"),
    );
    let better = runs
        .iter()
        .filter(|r| r.final_accuracy >= r.mean_accuracy.max(0.95))
        .count();
    let worst_final = runs.iter().map(|r| r.final_accuracy).fold(1.0, f64::min);
    let mean_solo = runs.iter().map(|r| r.mean_accuracy).sum::<f64>() / runs.len() as f64;
    let beats = outcome(
        better >= 9,
        format!("{better}/10 seeds; lowest consensus accuracy {worst_final:.3}, mean individual {mean_solo:.3}"),
    );
    (k_recovery, beats)
}

fn intolerance_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let taus: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    for trial in 0..100 {
        let cm = build_consensus(&random_ensemble(&mut rng, 25, 10)).unwrap();
        let mut previous: Option<ConsensusMatrix> = None;
        for &tau in &taus {
            let cut = apply_intolerance(&cm, tau).unwrap();
            let again = apply_intolerance(&cut, tau).unwrap();
            let n = cm.n();
            let diag_kept = (0..n).all(|i| cut.counts()[(i, i)] == cm.total());
            let monotone = previous
                .as_ref()
                .is_none_or(|p| p.counts().iter().zip(cut.counts().iter()).all(|(a, b)| b <= a));
            if again.counts() != cut.counts() || !diag_kept || !monotone {
                return outcome(false, format!("trial {trial}, tau {tau}"));
            }
            previous = Some(cut);
        }
    }
    outcome(true, "100 matrices x 11 thresholds")
}

/// Best matched count over every injective pairing of predicted clusters
/// with true classes.
fn brute_force_matches(pred: &Clustering, truth: &Clustering) -> usize {
    let (kp, kt) = (pred.k(), truth.k());
    let mut confusion = vec![vec![0usize; kt]; kp];
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        confusion[p][t] += 1;
    }
    fn search(p: usize, used: &mut Vec<bool>, confusion: &[Vec<usize>]) -> usize {
        if p == confusion.len() {
            return 0;
        }
        // leave cluster p unmatched
        let mut best = search(p + 1, used, confusion);
        for t in 0..used.len() {
            if !used[t] {
                used[t] = true;
                best = best.max(confusion[p][t] + search(p + 1, used, confusion));
                used[t] = false;
            }
        }
        best
    }
    search(0, &mut vec![false; kt], &confusion)
}

fn accuracy_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for trial in 0..500 {
        let n = rng.random_range(1..=12);
        let (kp, kt) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let pred = random_labels(&mut rng, n, kp);
        let truth = random_labels(&mut rng, n, kt);
        let expected = brute_force_matches(&pred, &truth) as f64 / n as f64;
        let got = accuracy(&pred, &truth).unwrap();
        if got != expected {
            return outcome(false, format!("trial {trial}: {got} vs {expected}"));
        }
    }
    outcome(true, "500 label pairs exact")
}

fn deviation_measure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for trial in 0..50 {
        let sizes: Vec<usize> = (0..rng.random_range(1..=4)).map(|_| rng.random_range(1..=5)).collect();
        let labels: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect();
        let n = labels.len();
        let mut p = DMatrix::from_fn(n, n, |r, c| {
            if labels[r] == labels[c] {
                rng.random_range(0.1..1.0)
            } else {
                0.0
            }
        });
        for r in 0..n {
            let s = p.row(r).sum();
            p.row_mut(r).iter_mut().for_each(|v| *v /= s);
        }
        let tv = TransitionView::from_stochastic(p).unwrap();
        let d = deviation_from_reducibility(&tv, &BlockPartition::new(&labels).unwrap()).unwrap();
        if d != 0.0 {
            return outcome(false, format!("trial {trial}: block-diagonal gives {d}"));
        }
    }
    let tv = TransitionView::from_stochastic(DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.1, 0.9])).unwrap();
    let d = deviation_from_reducibility(&tv, &BlockPartition::new(&[0, 1]).unwrap()).unwrap();
    outcome(
        d == 0.2,
        format!("50 block-diagonal matrices give 0; 2x2 example gives {d}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("blobs.csv");
    let (x, truth) = gaussian_blobs(&BlobSpec::uniform(3, 40, 8, 10.0, 5)).unwrap();
    save_matrix(&input, &x, InputFormat::LabeledCsv, Some(&truth)).unwrap();
    let run = |name: &str| -> PathBuf {
        let mut c = RunConfig::new(Mode::Run, &input);
        c.format = InputFormat::LabeledCsv;
        c.seed = 2024;
        c.output = dir.path().join(name);
        run_full(&c).unwrap();
        c.output
    };
    let (a, b) = (run("first"), run("second"));
    for f in ["results.json", "eigenvalues.csv"] {
        if std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap() {
            return outcome(false, format!("{f} differs between runs"));
        }
    }
    outcome(true, "results.json and eigenvalues.csv byte-identical")
}

/// Not gating: needs the corpora on disk. MCC: every reduction at ranks
/// 5, 10 and 20 plus the raw matrix, three algorithms, k̃ = 2..10, tau 0.1.
/// NG6: the three reductions at rank 10 plus the raw matrix, k-means only,
/// k̃ = 10..20, one refinement round.
fn corpus_recipe() -> Option<Outcome> {
    let every = |ranks: &[usize]| -> Vec<(ReductionMethod, usize)> {
        ReductionMethod::ALL
            .iter()
            .flat_map(|&m| ranks.iter().map(move |&r| (m, r)))
            .collect()
    };
    let mut mcc = Part1Config::new(
        every(&[5, 10, 20]),
        vec![Algorithm::Kmeans, Algorithm::Pddp, Algorithm::PddpKmeans],
        (2..=10).collect(),
    );
    mcc.tau = 0.1;
    let mut ng6 = Part1Config::new(every(&[10]), vec![Algorithm::Kmeans], (10..=20).collect());
    ng6.max_refinements = 1;
    let mut details = Vec::new();
    let mut pass = true;
    for (var, expected, mut config) in [("ICC_MCC_PATH", 3usize, mcc), ("ICC_NG6_PATH", 6, ng6)] {
        let Ok(path) = std::env::var(var) else { continue };
        config.include_raw = true;
        let estimate = load_matrix(path.as_ref(), InputFormat::MatrixMarket, false)
            .map_err(|e| e.to_string())
            .and_then(|l| icc_part1(&l.data, &config, 0).map_err(|e| e.to_string()));
        match estimate {
            Ok(out) => {
                pass &= out.k_estimate == expected;
                details.push(format!("{var}: k = {} (expected {expected})", out.k_estimate));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{var}: {e}"));
            }
        }
    }
    (!details.is_empty()).then(|| outcome(pass, details.join("; ")))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag}  {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    };
    report("1", "consensus identity", consensus_identity());
    report("2", "spectral oracle", spectral_oracle());
    report("3", "uncoupling monotonicity", uncoupling_monotonicity());
    report("4", "similarity check", similarity_check());
    let (k_recovery, beats_average) = blob_criteria();
    report("5", "end-to-end k recovery", k_recovery);
    report("6", "consensus beats the average", beats_average);
    report("7", "intolerance monotonicity", intolerance_monotonicity());
    report("8", "accuracy oracle", accuracy_oracle());
    report("9", "deviation measure", deviation_measure());
    report("10", "determinism", determinism());
    match corpus_recipe() {
        Some(o) => println!(
            "criterion 11 {}  corpus recipe (optional): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        ),
        None => println!("criterion 11 SKIP  corpus recipe (optional): set ICC_MCC_PATH / ICC_NG6_PATH"),
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} gating criteria failed");
        ExitCode::FAILURE
    }
}
