//! The 16-bit toy SPN and its best-differential estimators.
//!
//! A round applies the 4-bit s-box to each nibble (nibble 1 is the most
//! significant), multiplies by `lambda` and adds the round key. Keys are
//! long: one independent 16-bit key per round.
//!
//! Two estimators of the best differential probability from a fixed input
//! difference are provided, each for xor differences (`plus`) and for
//! differences under the parallel `b = (0, 1)` operation (`circ`):
//!
//! * Monte Carlo: for each sampled long key, tally the output differences of
//!   all `2^16` pairs and average the tallies over keys;
//! * Markov: propagate the full difference distribution through per-round
//!   transition matrices (s-box DDTs, the permutation induced by `lambda`,
//!   and for `circ` the key-averaged transition through xor).

use std::fmt;

use rand::Rng;

use crate::altop::{build_operation, catalog, AltOperation, CircTable, ParallelOperation};
use crate::ddt::{ddt_circ, ddt_plus, key_transition_matrix, DDTable, KeyTransition, Sbox};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::homega::{is_member, sample_parallel};
use crate::par::{task_rng, Exec};
use crate::sboxclass::corpus;

pub const STATE_BITS: usize = 16;
const STATE_SIZE: usize = 1 << STATE_BITS;

/// S-box layer followed by `lambda`, as two byte-indexed tables.
#[derive(Clone)]
pub struct RoundFunction {
    hi: Vec<u16>,
    lo: Vec<u16>,
}

impl RoundFunction {
    pub fn new(sbox: &Sbox, lambda: &BitMatrix) -> Result<Self> {
        if sbox.width() != 4 {
            return Err(Error::WidthMismatch {
                expected: 4,
                found: sbox.width(),
            });
        }
        if lambda.rows() != STATE_BITS || lambda.cols() != STATE_BITS {
            return Err(Error::WidthMismatch {
                expected: STATE_BITS,
                found: lambda.rows(),
            });
        }
        let layer = |byte: u64| (sbox.apply(byte >> 4) << 4) | sbox.apply(byte & 0xf);
        let hi = (0..256u64)
            .map(|b| lambda.mul_vec(layer(b) << 8) as u16)
            .collect();
        let lo = (0..256u64)
            .map(|b| lambda.mul_vec(layer(b)) as u16)
            .collect();
        Ok(RoundFunction { hi, lo })
    }

    #[inline(always)]
    pub fn apply(&self, x: u16) -> u16 {
        self.hi[(x >> 8) as usize] ^ self.lo[(x & 0xff) as usize]
    }

    /// `E_k(x)` for every `x`.
    pub fn encryption_table(&self, keys: &[u16]) -> Vec<u16> {
        let mut table: Vec<u16> = (0..STATE_SIZE as u32).map(|x| x as u16).collect();
        for &k in keys {
            for v in table.iter_mut() {
                *v = self.apply(*v) ^ k;
            }
        }
        table
    }
}

#[derive(Clone)]
pub struct ToySpn {
    sbox: Sbox,
    lambda: BitMatrix,
    keys: Vec<u16>,
    round: RoundFunction,
}

impl ToySpn {
    pub fn new(sbox: Sbox, lambda: BitMatrix, keys: Vec<u16>) -> Result<Self> {
        let round = RoundFunction::new(&sbox, &lambda)?;
        Ok(ToySpn {
            sbox,
            lambda,
            keys,
            round,
        })
    }

    pub fn rounds(&self) -> usize {
        self.keys.len()
    }

    pub fn sbox(&self) -> &Sbox {
        &self.sbox
    }

    pub fn lambda(&self) -> &BitMatrix {
        &self.lambda
    }

    pub fn encrypt(&self, x: u16) -> u16 {
        self.keys.iter().fold(x, |v, &k| self.round.apply(v) ^ k)
    }

    pub fn encryption_table(&self) -> Vec<u16> {
        self.round.encryption_table(&self.keys)
    }
}

impl fmt::Debug for ToySpn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ToySpn(rounds={}, sbox={:?})", self.rounds(), self.sbox)
    }
}

/// The parallel operation of four `b = (0, 1)` blocks on 16 bits.
pub fn spn_operation() -> ParallelOperation {
    let block = build_operation(&catalog::b01()).expect("static spec");
    ParallelOperation::uniform(&block, 4).expect("four equal blocks")
}

fn block_operation() -> AltOperation {
    build_operation(&catalog::b01()).expect("static spec")
}

/// `x o y` on 16 bits through a byte-level table.
#[derive(Clone)]
pub struct Circ16 {
    bytes: Vec<u8>,
}

impl Circ16 {
    pub fn new(block: &AltOperation) -> Result<Self> {
        if block.n() != 4 {
            return Err(Error::WidthMismatch {
                expected: 4,
                found: block.n(),
            });
        }
        let t = CircTable::build(block)?;
        let bytes = (0..1usize << 16)
            .map(|i| {
                let (x, y) = (i >> 8, i & 0xff);
                ((t.get(x >> 4, y >> 4) << 4) | t.get(x & 0xf, y & 0xf)) as u8
            })
            .collect();
        Ok(Circ16 { bytes })
    }

    #[inline(always)]
    pub fn circ(&self, x: u16, y: u16) -> u16 {
        let hi = self.bytes[((x & 0xff00) | (y >> 8)) as usize] as u16;
        let lo = self.bytes[(((x & 0xff) << 8) | (y & 0xff)) as usize] as u16;
        (hi << 8) | lo
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiffFlavor {
    Plus,
    Circ,
}

impl DiffFlavor {
    pub const BOTH: [DiffFlavor; 2] = [DiffFlavor::Plus, DiffFlavor::Circ];

    pub fn name(self) -> &'static str {
        match self {
            DiffFlavor::Plus => "plus",
            DiffFlavor::Circ => "circ",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Markov,
    MonteCarlo,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Markov => "markov",
            Estimator::MonteCarlo => "montecarlo",
        }
    }
}

/// The sixteen input differences of Hamming weight 1, `e_1` first.
pub fn weight_one_differences() -> Vec<u16> {
    (0..16).map(|i| 0x8000u16 >> i).collect()
}

/// Output-difference tallies summed over keys, one table per
/// `(flavor, input difference)`.
pub struct Tallies {
    pub keys: u64,
    pub flavors: Vec<DiffFlavor>,
    pub deltas: Vec<u16>,
    counts: Vec<Vec<u32>>,
}

impl Tallies {
    fn index(&self, flavor: DiffFlavor, delta: u16) -> usize {
        let f = self
            .flavors
            .iter()
            .position(|&x| x == flavor)
            .expect("flavor tallied");
        let d = self
            .deltas
            .iter()
            .position(|&x| x == delta)
            .expect("delta tallied");
        f * self.deltas.len() + d
    }

    pub fn count(&self, flavor: DiffFlavor, delta: u16, out: u16) -> u32 {
        self.counts[self.index(flavor, delta)][out as usize]
    }

    /// `max_b` of the key-averaged probability of `delta -> b`.
    pub fn best(&self, flavor: DiffFlavor, delta: u16) -> f64 {
        let max = *self.counts[self.index(flavor, delta)]
            .iter()
            .max()
            .expect("nonempty");
        max as f64 / (self.keys as f64 * STATE_SIZE as f64)
    }
}

/// Tallies `E_k(x) * E_k(x * delta)` over all `x`, where `*` is `+` or the
/// parallel operation, for every long key in `keys`.
pub fn montecarlo_tallies(
    round: &RoundFunction,
    circ: &Circ16,
    keys: &[Vec<u16>],
    deltas: &[u16],
    flavors: &[DiffFlavor],
) -> Tallies {
    let mut counts = vec![vec![0u32; STATE_SIZE]; flavors.len() * deltas.len()];
    for key in keys {
        let table = round.encryption_table(key);
        for (fi, &flavor) in flavors.iter().enumerate() {
            for (di, &delta) in deltas.iter().enumerate() {
                let tally = &mut counts[fi * deltas.len() + di];
                match flavor {
                    DiffFlavor::Plus => {
                        for x in 0..STATE_SIZE {
                            let out = table[x] ^ table[x ^ delta as usize];
                            tally[out as usize] += 1;
                        }
                    }
                    DiffFlavor::Circ => {
                        for x in 0..STATE_SIZE {
                            let y = circ.circ(x as u16, delta) as usize;
                            let out = circ.circ(table[x], table[y]);
                            tally[out as usize] += 1;
                        }
                    }
                }
            }
        }
    }
    Tallies {
        keys: keys.len() as u64,
        flavors: flavors.to_vec(),
        deltas: deltas.to_vec(),
        counts,
    }
}

/// Per-nibble transition matrices and the `lambda` permutation of
/// differences, for one SPN shape.
pub struct MarkovModel {
    rounds: usize,
    /// `delta -> delta lambda`.
    permutation: Vec<u16>,
    sbox_plus: [[f64; 16]; 16],
    sbox_circ: [[f64; 16]; 16],
    key_circ: [[f64; 16]; 16],
    /// Key step followed by the next s-box layer.
    key_then_sbox: [[f64; 16]; 16],
}

fn ddt_matrix(t: &DDTable) -> [[f64; 16]; 16] {
    let mut m = [[0.0; 16]; 16];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = t.get(a as u64, b as u64) as f64 / 16.0;
        }
    }
    m
}

fn key_matrix(t: &KeyTransition) -> [[f64; 16]; 16] {
    let mut m = [[0.0; 16]; 16];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = t.probability(a as u64, b as u64);
        }
    }
    m
}

fn mat_mul(x: &[[f64; 16]; 16], y: &[[f64; 16]; 16]) -> [[f64; 16]; 16] {
    let mut out = [[0.0; 16]; 16];
    for i in 0..16 {
        for k in 0..16 {
            if x[i][k] == 0.0 {
                continue;
            }
            for j in 0..16 {
                out[i][j] += x[i][k] * y[k][j];
            }
        }
    }
    out
}

/// Applies the same 16x16 row-stochastic matrix to every nibble of the
/// difference.
fn nibble_layer(v: &mut Vec<f64>, scratch: &mut Vec<f64>, m: &[[f64; 16]; 16]) {
    for pos in 0..4 {
        let shift = 4 * pos;
        scratch.iter_mut().for_each(|s| *s = 0.0);
        for (idx, &p) in v.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = (idx >> shift) & 0xf;
            let base = idx & !(0xf << shift);
            for (b, &t) in m[a].iter().enumerate() {
                if t != 0.0 {
                    scratch[base | (b << shift)] += p * t;
                }
            }
        }
        std::mem::swap(v, scratch);
    }
}

impl MarkovModel {
    /// For `circ`, `lambda` must be linear for the parallel operation.
    pub fn new(sbox: &Sbox, lambda: &BitMatrix, rounds: usize) -> Result<Self> {
        let block = block_operation();
        let permutation = (0..STATE_SIZE as u64)
            .map(|d| lambda.mul_vec(d) as u16)
            .collect();
        let sbox_circ = ddt_matrix(&ddt_circ(sbox, &block)?);
        let key_circ = key_matrix(&key_transition_matrix(&block)?);
        Ok(MarkovModel {
            rounds,
            permutation,
            sbox_plus: ddt_matrix(&ddt_plus(sbox)),
            key_then_sbox: mat_mul(&key_circ, &sbox_circ),
            sbox_circ,
            key_circ,
        })
    }

    /// Distribution of the output difference after all rounds.
    pub fn distribution(&self, delta: u16, flavor: DiffFlavor) -> Vec<f64> {
        let mut v = vec![0.0; STATE_SIZE];
        let mut scratch = vec![0.0; STATE_SIZE];
        v[delta as usize] = 1.0;
        if self.rounds == 0 {
            return v;
        }
        let first = match flavor {
            DiffFlavor::Plus => &self.sbox_plus,
            DiffFlavor::Circ => &self.sbox_circ,
        };
        nibble_layer(&mut v, &mut scratch, first);
        for round in 1..=self.rounds {
            scratch.iter_mut().for_each(|s| *s = 0.0);
            for (d, &p) in v.iter().enumerate() {
                scratch[self.permutation[d] as usize] += p;
            }
            std::mem::swap(&mut v, &mut scratch);
            let next = match (flavor, round == self.rounds) {
                (DiffFlavor::Plus, true) => None,
                (DiffFlavor::Plus, false) => Some(&self.sbox_plus),
                (DiffFlavor::Circ, true) => Some(&self.key_circ),
                (DiffFlavor::Circ, false) => Some(&self.key_then_sbox),
            };
            if let Some(m) = next {
                nibble_layer(&mut v, &mut scratch, m);
            }
        }
        v
    }

    pub fn best(&self, delta: u16, flavor: DiffFlavor) -> f64 {
        self.distribution(delta, flavor)
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Markov estimate of the best differential from `delta`. Fails with
/// `NotInHOmega` for `circ` when `lambda` is not linear for the operation.
pub fn best_differential_markov(
    sbox: &Sbox,
    lambda: &BitMatrix,
    rounds: usize,
    delta: u16,
    flavor: DiffFlavor,
) -> Result<f64> {
    if flavor == DiffFlavor::Circ && !is_member(&spn_operation(), lambda)? {
        return Err(Error::NotInHOmega);
    }
    Ok(MarkovModel::new(sbox, lambda, rounds)?.best(delta, flavor))
}

/// Monte Carlo estimate over `key_count` long keys drawn from `seed`.
pub fn best_differential_montecarlo(
    sbox: &Sbox,
    lambda: &BitMatrix,
    rounds: usize,
    delta: u16,
    key_count: usize,
    seed: u64,
    flavor: DiffFlavor,
) -> Result<f64> {
    let round = RoundFunction::new(sbox, lambda)?;
    let circ = Circ16::new(&block_operation())?;
    let keys = long_keys(seed, 0, 0, rounds, key_count);
    Ok(montecarlo_tallies(&round, &circ, &keys, &[delta], &[flavor]).best(flavor, delta))
}

/// `count` long keys of `rounds` uniform round keys each, for key sample
/// `sample` of run `run`.
pub fn long_keys(seed: u64, run: u64, sample: u64, rounds: usize, count: usize) -> Vec<Vec<u16>> {
    (0..count)
        .map(|k| {
            let mut rng = task_rng(seed, (run << 16) | (sample + 1), k as u64);
            (0..rounds).map(|_| rng.gen::<u16>()).collect()
        })
        .collect()
}

/// Seed of the diffusion layer of run `run`.
pub fn lambda_seed(seed: u64, run: u64) -> u64 {
    task_rng(seed, run << 16, 0).gen()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub rounds_lo: usize,
    pub rounds_hi: usize,
    pub keys: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    /// Which independent key sample the Monte Carlo estimator draws.
    pub key_sample: u64,
}

impl ExperimentConfig {
    /// 30 runs over rounds 3..=6 with 2^8 keys.
    pub fn desk(seed: u64) -> Self {
        ExperimentConfig {
            runs: 30,
            rounds_lo: 3,
            rounds_hi: 6,
            keys: 1 << 8,
            seed,
            estimators: vec![Estimator::Markov, Estimator::MonteCarlo],
            key_sample: 0,
        }
    }

    /// 150 runs over rounds 3..=10 with 2^15 keys.
    pub fn paper(seed: u64) -> Self {
        ExperimentConfig {
            runs: 150,
            rounds_lo: 3,
            rounds_hi: 10,
            keys: 1 << 15,
            ..ExperimentConfig::desk(seed)
        }
    }

    /// Rounds of run `run`: the range is cycled through.
    pub fn rounds_of(&self, run: usize) -> usize {
        self.rounds_lo + run % (self.rounds_hi - self.rounds_lo + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.rounds_hi < self.rounds_lo {
            return Err(Error::InvalidSpec(format!(
                "empty round range {}..{}",
                self.rounds_lo, self.rounds_hi
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub run: usize,
    pub rounds: usize,
    pub lambda_seed: u64,
    pub keys: usize,
    pub estimator: Estimator,
    pub flavor: DiffFlavor,
    pub delta_in: u16,
    pub p_best: f64,
    /// Run-level gap for this estimator:
    /// `(-log2 best p_plus) - (-log2 best p_circ)`, both maximized over the
    /// input differences.
    pub gap: f64,
}

impl ExperimentRecord {
    pub fn neglog2_p(&self) -> f64 {
        -self.p_best.log2()
    }
}

pub const CSV_HEADER: &str =
    "run,rounds,lambda_seed,estimator,flavor,delta_in_hex,p_best,neglog2_p,gap";

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{:04x},{:e},{:.6},{:.6}\n",
            r.run,
            r.rounds,
            r.lambda_seed,
            r.estimator.name(),
            r.flavor.name(),
            r.delta_in,
            r.p_best,
            r.neglog2_p(),
            r.gap
        ));
    }
    out
}

/// Per-run best probabilities for one estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub rounds: usize,
    pub estimator: Estimator,
    pub best_plus: f64,
    pub best_circ: f64,
}

impl RunSummary {
    pub fn gap(&self) -> f64 {
        self.best_circ.log2() - self.best_plus.log2()
    }
}

pub fn summarize(records: &[ExperimentRecord]) -> Vec<RunSummary> {
    let mut out: Vec<RunSummary> = Vec::new();
    for r in records {
        let pos = out
            .iter()
            .position(|s| s.run == r.run && s.estimator == r.estimator);
        let entry = match pos {
            Some(p) => &mut out[p],
            None => {
                out.push(RunSummary {
                    run: r.run,
                    rounds: r.rounds,
                    estimator: r.estimator,
                    best_plus: 0.0,
                    best_circ: 0.0,
                });
                out.last_mut().expect("just pushed")
            }
        };
        match r.flavor {
            DiffFlavor::Plus => entry.best_plus = entry.best_plus.max(r.p_best),
            DiffFlavor::Circ => entry.best_circ = entry.best_circ.max(r.p_best),
        }
    }
    out
}

/// Runs the experiment: one sampled `lambda` per run, every weight-one input
/// difference, both flavors and the selected estimators. Records are ordered
/// by run, input difference, estimator and flavor.
pub fn run_experiment(config: &ExperimentConfig, exec: Exec) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let op = spn_operation();
    let sbox = corpus::gamma();
    let circ = Circ16::new(&block_operation())?;
    let deltas = weight_one_differences();
    let per_run = exec.map_range(0..config.runs, |run| -> Result<Vec<ExperimentRecord>> {
        let rounds = config.rounds_of(run);
        let lseed = lambda_seed(config.seed, run as u64);
        let lambda = sample_parallel(&op, lseed)?.matrix;
        let mut best: Vec<(Estimator, DiffFlavor, u16, f64)> = Vec::new();
        for &estimator in &config.estimators {
            match estimator {
                Estimator::Markov => {
                    let model = MarkovModel::new(&sbox, &lambda, rounds)?;
                    for &delta in &deltas {
                        for flavor in DiffFlavor::BOTH {
                            best.push((estimator, flavor, delta, model.best(delta, flavor)));
                        }
                    }
                }
                Estimator::MonteCarlo => {
                    let round = RoundFunction::new(&sbox, &lambda)?;
                    let keys = long_keys(
                        config.seed,
                        run as u64,
                        config.key_sample,
                        rounds,
                        config.keys,
                    );
                    let tallies =
                        montecarlo_tallies(&round, &circ, &keys, &deltas, &DiffFlavor::BOTH);
                    for &delta in &deltas {
                        for flavor in DiffFlavor::BOTH {
                            best.push((estimator, flavor, delta, tallies.best(flavor, delta)));
                        }
                    }
                }
            }
        }
        let gap_of = |estimator: Estimator| {
            let top = |flavor: DiffFlavor| {
                best.iter()
                    .filter(|b| b.0 == estimator && b.1 == flavor)
                    .map(|b| b.3)
                    .fold(0.0, f64::max)
            };
            top(DiffFlavor::Circ).log2() - top(DiffFlavor::Plus).log2()
        };
        let mut records: Vec<ExperimentRecord> = best
            .iter()
            .map(|&(estimator, flavor, delta_in, p_best)| ExperimentRecord {
                run,
                rounds,
                lambda_seed: lseed,
                keys: config.keys,
                estimator,
                flavor,
                delta_in,
                p_best,
                gap: gap_of(estimator),
            })
            .collect();
        records.sort_by_key(|r| (std::cmp::Reverse(r.delta_in), r.estimator, r.flavor));
        Ok(records)
    });
    let mut out = Vec::new();
    for r in per_run {
        out.extend(r?);
    }
    Ok(out)
}
