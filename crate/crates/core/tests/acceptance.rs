//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use altdiff::altop::{
    build_operation, catalog, distinct_conjugates, enumerate_canonical, error_space, weak_space,
    Operation, ParallelOperation, TranslationGroup,
};
use altdiff::ddt::{ddt_circ, ddt_plus};
use altdiff::gf2::{enumerate_gl, random_invertible, BitMatrix};
use altdiff::homega::{
    block_shape, count_parallel, count_parallel_structured, count_s_minus_3, enumerate_s_minus_3,
    enumerate_single_block, fixes_weak_and_error_spaces, is_member, sample_parallel,
};
use altdiff::par::{task_rng, Exec};
use altdiff::sboxclass::{
    all_105_operations, campaign_8bit, classify_against, corpus, random_spec, Histogram,
    REFERENCE_SPECTRA, SPECTRUM_COLUMNS,
};
use altdiff::spnlab::{
    run_experiment, summarize, DiffFlavor, Estimator, ExperimentConfig, ExperimentRecord,
    RunSummary,
};

const SPN_SEED: u64 = 2024;

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

fn hist(pairs: &[(u16, u64)]) -> Histogram {
    pairs.iter().copied().collect()
}

fn criterion_1() -> Outcome {
    let base =
        TranslationGroup::from_operation(&build_operation(&catalog::b01()).unwrap()).unwrap();
    let groups = distinct_conjugates(&base, &enumerate_gl(4).unwrap()).unwrap();
    let regular = groups.iter().all(|g| g.is_elementary_abelian_regular());
    outcome(
        groups.len() == 105 && regular,
        format!(
            "{} distinct groups, all elementary abelian regular: {regular}",
            groups.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let op = build_operation(&catalog::b01()).unwrap();
    let constructive: BTreeSet<BitMatrix> = enumerate_single_block(&op)
        .unwrap()
        .map(|e| e.matrix)
        .collect();
    let brute: BTreeSet<BitMatrix> = enumerate_gl(4)
        .unwrap()
        .into_iter()
        .filter(|m| is_member(&op, m).unwrap())
        .collect();
    outcome(
        constructive.len() == 192 && brute.len() == 192 && constructive == brute,
        format!(
            "constructive {}, filtered from GL(4) {}, equal sets: {}",
            constructive.len(),
            brute.len(),
            constructive == brute
        ),
    )
}

fn criterion_3() -> Outcome {
    let full = build_operation(&catalog::n6_full_error_space()).unwrap();
    let rank2 = build_operation(&catalog::n6_rank2_error_space()).unwrap();
    let (c_full, _) = count_s_minus_3(&full).unwrap();
    let (c_rank2, d_rank2) = count_s_minus_3(&rank2).unwrap();
    let listed_full = enumerate_s_minus_3(&full).unwrap().count();
    let listed_rank2 = enumerate_s_minus_3(&rank2).unwrap().count();
    let pass = c_full.total == 86016u32.into()
        && c_rank2.total == 49152u32.into()
        && d_rank2 == 24
        && listed_full == 86016
        && listed_rank2 == 49152;
    outcome(
        pass,
        format!(
            "dim U = 3: {} ({} listed); dim U = 2: {} ({} listed) with {} choices of D",
            c_full.total, listed_full, c_rank2.total, listed_rank2, d_rank2
        ),
    )
}

fn criterion_4() -> Outcome {
    let counts: Vec<usize> = [(4, 2), (8, 6), (8, 5)]
        .iter()
        .map(|&(n, d)| enumerate_canonical(n, d).unwrap().count())
        .collect();
    outcome(
        counts == [3, 63, 32550],
        format!(
            "(4,2) {}, (8,6) {}, (8,5) {}",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn criterion_5() -> Outcome {
    let gamma = corpus::gamma();
    let op = build_operation(&catalog::b01()).unwrap();
    let plus = ddt_plus(&gamma).uniformity();
    let circ = ddt_circ(&gamma, &op).unwrap().uniformity();
    // direct count as an oracle
    let mut oracle = 0;
    for a in 1..16u64 {
        let mut row = [0u16; 16];
        for x in 0..16u64 {
            let b = op.circ(gamma.apply(x), gamma.apply(op.circ(x, a)));
            row[b as usize] += 1;
        }
        oracle = oracle.max(*row.iter().max().unwrap());
    }
    outcome(
        plus == 4 && circ == 16 && oracle == 16,
        format!("plus {plus}, circ {circ} (direct count {oracle})"),
    )
}

fn campaign_outcome(d: usize, expected: &[(&str, Histogram)]) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, want) in expected {
        let sbox = corpus::by_name(name).unwrap();
        let got = campaign_8bit(name, &sbox, d, Exec::Parallel)
            .unwrap()
            .histogram;
        pass &= &got == want;
        detail.push(format!("{name} {got:?}"));
    }
    outcome(pass, detail.join("; "))
}

fn criterion_6() -> Outcome {
    campaign_outcome(
        6,
        &[
            ("aes", hist(&[(8, 55), (10, 8)])),
            ("camellia", hist(&[(8, 59), (10, 4)])),
            ("kuznyechik", hist(&[(10, 54), (12, 9)])),
        ],
    )
}

fn criterion_7() -> Outcome {
    campaign_outcome(
        5,
        &[
            (
                "aes",
                hist(&[
                    (8, 433),
                    (10, 23858),
                    (12, 7841),
                    (14, 402),
                    (16, 14),
                    (18, 2),
                ]),
            ),
            (
                "camellia",
                hist(&[
                    (8, 470),
                    (10, 24087),
                    (12, 7494),
                    (14, 476),
                    (16, 22),
                    (18, 1),
                ]),
            ),
            (
                "kuznyechik",
                hist(&[
                    (8, 18),
                    (10, 18940),
                    (12, 12425),
                    (14, 1086),
                    (16, 80),
                    (18, 1),
                ]),
            ),
        ],
    )
}

fn criterion_8() -> (Outcome, Vec<String>) {
    let ops = all_105_operations().unwrap();
    let classes: Vec<usize> = (0..16).collect();
    let report = classify_against(&ops, &classes, false, Exec::Parallel).unwrap();

    let no_2_or_14 = report
        .records
        .iter()
        .flatten()
        .all(|r| !r.histogram.contains_key(&2) && !r.histogram.contains_key(&14));
    let reaching_16: BTreeSet<usize> = report
        .records
        .iter()
        .flatten()
        .filter(|r| r.histogram.contains_key(&16))
        .map(|r| r.label[1..].parse().unwrap())
        .collect();
    let capped = [3usize, 4, 5, 6, 11, 12].iter().all(|&c| {
        let reference_12 = REFERENCE_SPECTRA[c][5] > 0;
        report
            .records
            .iter()
            .map(|per_op| per_op[c].max_uniformity)
            .all(|m| m <= 10 || (reference_12 && m <= 12))
    });
    let mismatches = report.support_mismatches();
    let pass = no_2_or_14
        && reaching_16 == BTreeSet::from([0, 1, 2, 8])
        && capped
        && mismatches.is_empty();

    let mut notes = Vec::new();
    for c in &report.classes {
        let computed: Vec<String> = SPECTRUM_COLUMNS
            .iter()
            .map(|u| format!("{}", c.mean.get(u).copied().unwrap_or(0.0)))
            .collect();
        let reference: u64 = REFERENCE_SPECTRA[c.class_index].iter().sum();
        notes.push(format!(
            "G{:<2} computed [{}] sum {}, reference {:?} sum {}, same for all operations: {}",
            c.class_index,
            computed.join(" "),
            report.row_total(c.class_index),
            REFERENCE_SPECTRA[c.class_index],
            reference,
            c.uniform_across_operations
        ));
    }
    notes.push(format!(
        "exact counts differ from the printed table in {} of {} entries (reported, not binding)",
        report.differences().len(),
        16 * SPECTRUM_COLUMNS.len()
    ));
    // the printed rows look like the computed ones rescaled to a row sum of
    // 10818, with rows G3 and G4 exchanged
    let scale = 10818.0 / report.row_total(0);
    let deviation = (0..16)
        .flat_map(|c| {
            let source = match c {
                3 => 4,
                4 => 3,
                _ => c,
            };
            let computed = &report.classes[source];
            SPECTRUM_COLUMNS.iter().enumerate().map(move |(col, u)| {
                (REFERENCE_SPECTRA[c][col] as f64
                    - scale * computed.mean.get(u).copied().unwrap_or(0.0))
                .abs()
            })
        })
        .fold(0.0, f64::max);
    notes.push(format!(
        "with rows G3 and G4 exchanged, every printed entry is within {deviation:.2} of the computed count times 10818/{}",
        report.row_total(0)
    ));
    (
        outcome(
            pass,
            format!(
                "no mass at 2 or 14: {no_2_or_14}; classes reaching 16: {reaching_16:?}; capped classes within bound: {capped}; support mismatches: {}",
                mismatches.len()
            ),
        ),
        notes,
    )
}

fn group_axioms<O: Operation>(op: &O) -> bool {
    let n = op.width();
    let size = 1u64 << n;
    for x in 0..size {
        if op.circ(x, 0) != x || op.circ(x, x) != 0 {
            return false;
        }
        for y in 0..size {
            let xy = op.circ(x, y);
            if xy != op.circ(y, x) {
                return false;
            }
            for z in 0..size {
                if op.circ(xy, z) != op.circ(x, op.circ(y, z)) {
                    return false;
                }
            }
        }
    }
    true
}

fn product_identities<O: Operation>(op: &O) -> bool {
    let size = 1u64 << op.width();
    let weak = weak_space(op);
    let error = error_space(op);
    if !error.basis().iter().all(|&u| weak.contains(u)) {
        return false;
    }
    for x in 0..size {
        for y in 0..size {
            let xy = op.dot(x, y);
            if x ^ y != op.circ(x, y) ^ xy || !error.contains(xy) {
                return false;
            }
            for z in 0..size {
                if op.dot(x ^ y, z) != op.dot(x, z) ^ op.dot(y, z) || op.dot(x, op.dot(y, z)) != 0 {
                    return false;
                }
            }
        }
    }
    true
}

fn criterion_9() -> Outcome {
    let mut rng = task_rng(9, 0, 0);
    let mut ops = vec![
        build_operation(&catalog::b01()).unwrap(),
        build_operation(&catalog::n6_full_error_space()).unwrap(),
        build_operation(&catalog::n6_rank2_error_space()).unwrap(),
    ];
    for &(n, d) in &[
        (5, 1),
        (5, 2),
        (5, 3),
        (7, 1),
        (7, 3),
        (8, 5),
        (8, 6),
        (8, 4),
        (8, 2),
    ] {
        ops.push(build_operation(&random_spec(n, d, &mut rng).unwrap()).unwrap());
    }
    let axioms =
        ops.iter().all(group_axioms) && all_105_operations().unwrap().iter().all(group_axioms);
    let identities = ops.iter().all(product_identities);

    // the bound on d, over every enumerable (n, d) with n <= 8
    let mut bound_ok = true;
    let mut checked = 0;
    for n in 3..=8usize {
        for d in 1..n {
            let allowed = 2 - n % 2 <= d && d + 2 <= n;
            match enumerate_canonical(n, d) {
                Ok(mut specs) => {
                    bound_ok &= specs.next().is_none() || allowed;
                    checked += 1;
                }
                Err(e) if e.is_size_guard() => {}
                Err(_) => {
                    bound_ok &= !allowed;
                    checked += 1;
                }
            }
        }
    }

    let par = ParallelOperation::uniform(&build_operation(&catalog::b01()).unwrap(), 2).unwrap();
    let fixed = (0..1000u64).all(|seed| {
        fixes_weak_and_error_spaces(&par, &sample_parallel(&par, seed).unwrap().matrix)
    });
    let n6 = build_operation(&catalog::n6_full_error_space()).unwrap();
    let fixed6 = enumerate_s_minus_3(&n6)
        .unwrap()
        .step_by(86)
        .all(|e| fixes_weak_and_error_spaces(&n6, &e.matrix));

    outcome(
        axioms && identities && bound_ok && fixed && fixed6,
        format!(
            "group axioms {axioms}; product identities {identities}; bound on d over {checked} (n, d) pairs {bound_ok}; \
             spaces fixed by 1000 samples at n = 8 {fixed} and by 1000 enumerated elements at n = 6 {fixed6}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let par = ParallelOperation::uniform(&build_operation(&catalog::b01()).unwrap(), 2).unwrap();
    let sound = (0..1000u64)
        .all(|seed| is_member(&par, &sample_parallel(&par, seed).unwrap().matrix).unwrap());
    let mut rng = task_rng(10, 0, 0);
    let mut members = 0;
    let mut shaped = 0;
    for _ in 0..100_000 {
        let m = random_invertible(8, &mut rng);
        if is_member(&par, &m).unwrap() {
            members += 1;
            if block_shape(&par, &m).unwrap().is_some() {
                shaped += 1;
            }
        }
    }
    // exhaustive backing: the members with B = 0, found without the block
    // characterization, multiplied out, match the closed form
    let structured = count_parallel_structured(&par).unwrap();
    let closed = count_parallel(4, 2).unwrap().total;
    outcome(
        sound && members == shaped && structured == closed,
        format!(
            "1000 samples pass the oracle: {sound}; random search found {members} members, {shaped} block shaped; \
             structured count {structured} vs closed form {closed}"
        ),
    )
}

fn best_by_run(records: &[ExperimentRecord], estimator: Estimator) -> Vec<RunSummary> {
    summarize(records)
        .into_iter()
        .filter(|s| s.estimator == estimator)
        .collect()
}

fn criterion_11() -> (Outcome, Vec<String>) {
    let config = ExperimentConfig::desk(SPN_SEED);
    let records = run_experiment(&config, Exec::Parallel).unwrap();
    let second = run_experiment(
        &ExperimentConfig {
            key_sample: 1,
            estimators: vec![Estimator::MonteCarlo],
            ..config.clone()
        },
        Exec::Parallel,
    )
    .unwrap();

    // (a) plus estimates from two disjoint key samples
    let plus = |rs: &[ExperimentRecord]| -> BTreeMap<(usize, u16), f64> {
        rs.iter()
            .filter(|r| r.estimator == Estimator::MonteCarlo && r.flavor == DiffFlavor::Plus)
            .map(|r| ((r.run, r.delta_in), r.p_best))
            .collect()
    };
    let (first_plus, second_plus) = (plus(&records), plus(&second));
    let identical = first_plus
        .iter()
        .filter(|(k, v)| second_plus[k] == **v)
        .count();
    let max_ratio = first_plus
        .iter()
        .map(|(k, v)| (v / second_plus[k]).max(second_plus[k] / v))
        .fold(1.0, f64::max);
    let a = identical == first_plus.len();

    // (b) gap
    let mc = best_by_run(&records, Estimator::MonteCarlo);
    let nonnegative = mc.iter().filter(|s| s.gap() >= 0.0).count();
    let early: Vec<f64> = mc
        .iter()
        .filter(|s| s.rounds <= 4)
        .map(|s| s.gap())
        .collect();
    let early_mean = early.iter().sum::<f64>() / early.len() as f64;
    let b = 2 * nonnegative >= mc.len() && early_mean > 0.0;

    // (c) -log2 p_circ per round count
    let mut by_rounds: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in &mc {
        by_rounds
            .entry(s.rounds)
            .or_default()
            .push(-s.best_circ.log2());
    }
    let means: Vec<(usize, f64)> = by_rounds
        .iter()
        .map(|(&r, v)| (r, v.iter().sum::<f64>() / v.len() as f64))
        .collect();
    let increasing = means.windows(2).all(|w| w[1].1 > w[0].1);
    let bounded = mc.iter().all(|s| -s.best_circ.log2() <= 16.0 + 1e-9);
    let c = increasing && bounded && means.last().unwrap().1 > means[0].1;

    // (d) Markov against Monte Carlo, per run and flavor
    let markov = best_by_run(&records, Estimator::Markov);
    let mut agree = 0;
    let mut configs = 0;
    for (m, s) in markov.iter().zip(&mc) {
        assert_eq!(m.run, s.run);
        for (p, q) in [(m.best_plus, s.best_plus), (m.best_circ, s.best_circ)] {
            configs += 1;
            if p / q <= 2.0 && q / p <= 2.0 {
                agree += 1;
            }
        }
    }
    let d = agree * 5 >= configs * 4;

    let mark = |ok: bool| if ok { "pass" } else { "FAIL" };
    let notes = vec![
        format!(
            "(a) {}: plus estimates identical for {identical} of {} (run, input difference) pairs across two key samples; largest ratio {max_ratio:.3}",
            mark(a),
            first_plus.len()
        ),
        format!(
            "(b) {}: gap >= 0 in {nonnegative} of {} runs; mean gap at rounds 3-4 {early_mean:.3}",
            mark(b),
            mc.len()
        ),
        format!(
            "(c) {}: mean -log2 p_circ by rounds {}",
            mark(c),
            means
                .iter()
                .map(|(r, m)| format!("{r}:{m:.3}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
        format!("(d) {}: Markov within a factor 2 of Monte Carlo in {agree} of {configs} configurations", mark(d)),
    ];
    let failed: Vec<&str> = [("a", a), ("b", b), ("c", c), ("d", d)]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect();
    let detail = if failed.is_empty() {
        "all parts hold".to_string()
    } else {
        format!("failing parts: {}", failed.join(", "))
    };
    (outcome(failed.is_empty(), detail), notes)
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; listing must not run the suite
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    type Check = Box<dyn Fn() -> (Outcome, Vec<String>)>;
    let plain = |f: fn() -> Outcome| -> Check { Box::new(move || (f(), Vec::new())) };
    let criteria: Vec<(u32, Duration, Check)> = vec![
        (1, Duration::from_secs(10), plain(criterion_1)),
        (2, Duration::from_secs(5), plain(criterion_2)),
        (3, Duration::from_secs(60), plain(criterion_3)),
        (4, Duration::from_secs(10), plain(criterion_4)),
        (5, Duration::from_secs(1), plain(criterion_5)),
        (6, Duration::from_secs(120), plain(criterion_6)),
        (7, Duration::from_secs(30 * 60), plain(criterion_7)),
        (8, Duration::from_secs(20 * 60), Box::new(criterion_8)),
        (9, Duration::from_secs(20 * 60), plain(criterion_9)),
        (10, Duration::from_secs(20 * 60), plain(criterion_10)),
        (11, Duration::from_secs(30 * 60), Box::new(criterion_11)),
    ];
    let mut failures = 0;
    for (id, limit, check) in criteria {
        let start = Instant::now();
        let (result, notes) = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2}: {} ({:.1} s, limit {} s) {}{}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            result.detail,
            if in_time { "" } else { "; over time limit" }
        );
        for note in notes {
            println!("    {note}");
        }
    }
    println!("acceptance: {} of 11 criteria pass", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
