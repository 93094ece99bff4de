//! Acceptance suite: ten end-to-end criteria, one test each, every test
//! ending in a printed verdict line (visible with `--nocapture`).
//!
//! Criteria 1 and 4 check the implementation against independent oracles
//! written here from the textbook definitions — a dense fixed-point
//! SimRank and an exhaustive itemset enumeration — sharing no code with
//! the library's sparse/level-wise implementations.

use std::collections::BTreeSet;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linkrec::config::RunConfig;
use linkrec::data::{RatingVector, Transaction};
use linkrec::eval::{self, EvaluationReport, MetricPoint, SeriesReport};
use linkrec::graph::CommercialGraph;
use linkrec::items::{self, MiningParams};
use linkrec::scoring::{
    self, category_score, local_category_importance, rating_score, reputation_score,
    CategoryProfile, FusionWeights, ScoredCandidate,
};
use linkrec::seeds::mix;
use linkrec::simrank::{self, SimRankParams};
use linkrec::synth::{self, GeneratorSpec};

// ---------------------------------------------------------------------------
// fixtures

#[allow(clippy::too_many_arguments)]
fn t(id: &str, buyer: &str, seller: &str, item: &str, cat: &str, price: f64, qty: u32, r: f64) -> Transaction {
    Transaction {
        id: id.to_string(),
        buyer: buyer.to_string(),
        seller: seller.to_string(),
        item: item.to_string(),
        category: cat.to_string(),
        price,
        quantity: qty,
        ratings: RatingVector::new([r; 4]).expect("test ratings in range"),
    }
}

fn cat_idx(g: &CommercialGraph, name: &str) -> linkrec::graph::CatIdx {
    (0..g.category_count() as linkrec::graph::CatIdx)
        .find(|&c| g.category_name(c) == name)
        .expect("category present")
}

/// A seeded directed graph on up to `max_nodes` nodes, each ordered pair an
/// edge with probability `p`.
fn random_digraph(seed: u64, max_nodes: usize, p: f64) -> (usize, Vec<(usize, usize)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_nodes);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_range(0.0..1.0) < p {
                edges.push((a, b));
            }
        }
    }
    (n, edges)
}

/// Realizes a digraph as a commercial graph: edge (a,b) becomes one
/// transaction a→b, so b's in-neighbors are exactly its graph predecessors.
fn commercial(n: usize, edges: &[(usize, usize)]) -> (CommercialGraph, Vec<String>) {
    let names: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    let txns: Vec<Transaction> = edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| t(&format!("t{k}"), &names[b], &names[a], "i", "c", 1.0, 1, 0.0))
        .collect();
    (CommercialGraph::build(&txns), names)
}

/// Similarity by node index, covering nodes absent from the transaction
/// graph (isolated nodes have similarity 0 to everyone, 1 to themselves).
fn impl_similarity(
    g: &CommercialGraph,
    table: &simrank::SimilarityTable<f64>,
    names: &[String],
    u: usize,
    v: usize,
) -> f64 {
    if u == v {
        return 1.0;
    }
    match (g.user_idx(&names[u]), g.user_idx(&names[v])) {
        (Some(a), Some(b)) => table.similarity(a, b),
        _ => 0.0,
    }
}

/// Independent oracle: dense n×n SimRank iterated to its fixed point.
fn dense_simrank(n: usize, edges: &[(usize, usize)], c: f64) -> Vec<Vec<f64>> {
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        if !preds[b].contains(&a) {
            preds[b].push(a);
        }
    }
    let identity = |n: usize| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
    };
    let mut s = identity(n);
    for _ in 0..500 {
        let mut next = identity(n);
        let mut delta = 0.0f64;
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                let (pu, pv) = (&preds[u], &preds[v]);
                let prev = &s;
                next[u][v] = if pu.is_empty() || pv.is_empty() {
                    0.0
                } else {
                    let sum: f64 =
                        pu.iter().flat_map(|&a| pv.iter().map(move |&b| prev[a][b])).sum();
                    c * sum / (pu.len() as f64 * pv.len() as f64)
                };
                delta = delta.max((next[u][v] - s[u][v]).abs());
            }
        }
        s = next;
        if delta < 1e-13 {
            break;
        }
    }
    s
}

/// The shared default run behind criteria 5–9: default generator spec,
/// default config (fixed seed), 10 folds, one worker thread.
fn default_run() -> &'static (Vec<Transaction>, RunConfig, EvaluationReport) {
    static RUN: OnceLock<(Vec<Transaction>, RunConfig, EvaluationReport)> = OnceLock::new();
    RUN.get_or_init(|| {
        let config = RunConfig::default();
        let data = synth::generate(&GeneratorSpec::default(), config.seed).expect("default spec");
        let report = eval::run_experiment(&data, &config, 1).expect("default run");
        (data, config, report)
    })
}

fn series<'r>(report: &'r EvaluationReport, name: &str) -> &'r SeriesReport {
    report.series.iter().find(|s| s.name == name).expect("series present")
}

fn f_at(points: &[MetricPoint], size: usize) -> f64 {
    points.iter().find(|p| p.predictions_per_user == size).expect("size present").f_measure
}

// ---------------------------------------------------------------------------
// criteria

#[test]
fn criterion_01_simrank_matches_dense_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let (n, edges) = random_digraph(mix(0xACCE01, &[case]), 8, 0.3);
        let (g, names) = commercial(n, &edges);
        let params = SimRankParams { damping: 0.8, max_iters: 50, tol: 1e-12 };
        let table = simrank::compute(&g, &params);
        let oracle = dense_simrank(n, &edges, 0.8);
        for (u, row) in oracle.iter().enumerate() {
            for (v, &want) in row.iter().enumerate() {
                let got = impl_similarity(&g, &table, &names, u, v);
                worst = worst.max((got - want).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(worst <= 1e-6, "max |implementation − oracle| = {worst:e}");
    assert!(elapsed < Duration::from_secs(5), "oracle comparison took {elapsed:?}");
    println!(
        "criterion 1 (SimRank vs dense fixed-point oracle, 100 graphs): pass — \
         max error {worst:.3e}, {elapsed:.2?}"
    );
}

#[test]
fn criterion_02_simrank_properties_hold_on_1000_graphs() {
    let mut cases = 0usize;
    for case in 0..1000u64 {
        let p = 0.1 + 0.08 * (case % 5) as f64;
        let (n, edges) = random_digraph(mix(0xACCE02, &[case]), 10, p);
        let (g, names) = commercial(n, &edges);
        let table = simrank::compute(&g, &SimRankParams::default());
        let has_pred: Vec<bool> = {
            let mut f = vec![false; n];
            for &(_, b) in &edges {
                f[b] = true;
            }
            f
        };
        for u in 0..n {
            assert_eq!(impl_similarity(&g, &table, &names, u, u), 1.0, "S(u,u) = 1");
            for v in 0..n {
                let s_uv = impl_similarity(&g, &table, &names, u, v);
                let s_vu = impl_similarity(&g, &table, &names, v, u);
                assert_eq!(s_uv, s_vu, "symmetry");
                assert!((0.0..=1.0).contains(&s_uv), "range: S = {s_uv}");
                if u != v && (!has_pred[u] || !has_pred[v]) {
                    assert_eq!(s_uv, 0.0, "empty in-neighborhood forces 0");
                }
            }
        }
        cases += 1;
    }
    assert!(cases >= 1000);
    println!("criterion 2 (SimRank invariants on {cases} seeded graphs): pass");
}

#[test]
fn criterion_03_equation_unit_suite() {
    // Local importance: floor at 1 (foreign category, no co-trading
    // neighbors), and genuine neighbor counts above it.
    let g: CommercialGraph = CommercialGraph::build(&[
        t("t1", "u", "s1", "i1", "a", 10.0, 1, 0.5),
        t("t2", "u", "s2", "i2", "a", 5.0, 2, 0.5),
    ]);
    let u = g.user_idx("u").unwrap();
    let a = cat_idx(&g, "a");
    assert_eq!(local_category_importance(&g, u, a), 2.0, "both sellers co-trade a");
    let floor: CommercialGraph = CommercialGraph::build(&[
        t("t1", "u", "s1", "i1", "a", 10.0, 1, 0.5),
        t("t2", "x", "s9", "i9", "b", 1.0, 1, 0.5),
    ]);
    let fu = floor.user_idx("u").unwrap();
    let fb = cat_idx(&floor, "b");
    assert_eq!(local_category_importance(&floor, fu, fb), 1.0, "foreign category floors at 1");

    // Weight arithmetic: L × Σ price·quantity = 2 × (10·1 + 5·2) = 40.
    assert_eq!(scoring::category_weight(&g, u, a), 40.0);

    // Worked weighted-Jaccard arithmetic: {A:2, B:3} vs {B:5} →
    // (3+5)/(2+3+5) = 0.8.
    let profile = |owner: u32, weights: &[(u32, f64)]| CategoryProfile::<f64> {
        owner,
        weights: weights.iter().copied().collect(),
        local_importance: weights.iter().map(|&(c, _)| (c, 1.0)).collect(),
    };
    let wu = profile(0, &[(0, 2.0), (1, 3.0)]);
    let wv = profile(1, &[(1, 5.0)]);
    assert_eq!(category_score(&wu, &wv), 0.8);

    // Category similarity boundaries and symmetry.
    let pair: CommercialGraph = CommercialGraph::build(&[
        t("t1", "u", "s1", "i1", "a", 10.0, 1, 0.5),
        t("t2", "v", "s2", "i2", "a", 10.0, 1, 0.5),
        t("t3", "w", "s3", "i3", "b", 10.0, 1, 0.5),
    ]);
    let prof = |name: &str| CategoryProfile::build(&pair, pair.user_idx(name).unwrap());
    let (pu, pv, pw) = (prof("u"), prof("v"), prof("w"));
    assert_eq!(category_score(&pu, &pv), 1.0, "identical category sets");
    assert_eq!(category_score(&pu, &pw), 0.0, "disjoint category sets");
    assert_eq!(category_score(&pu, &pw), category_score(&pw, &pu), "symmetry");
    let s = category_score(&pu, &pv);
    assert!((0.0..=1.0).contains(&s));

    // Reputation: a single perfect sale of value 10 in a category foreign
    // to the viewer scores exactly 10; positive and negative ratings on
    // equal volume cancel; an all-zero rating contributes zero.
    let perfect: CommercialGraph = CommercialGraph::build(&[
        t("t0", "u", "x", "i0", "other", 10.0, 1, 0.5),
        t("t1", "z", "v", "i1", "c", 10.0, 1, 1.0),
    ]);
    let (gu, gv) = (perfect.user_idx("u").unwrap(), perfect.user_idx("v").unwrap());
    assert_eq!(reputation_score(&perfect, gu, gv).unwrap(), 10.0);
    let cancel: CommercialGraph = CommercialGraph::build(&[
        t("t1", "u", "v", "i1", "a", 10.0, 1, 0.5),
        t("t2", "w1", "v", "i1", "a", 10.0, 1, 0.5),
        t("t3", "w2", "v", "i1", "a", 10.0, 1, -0.5),
    ]);
    let (cu, cv) = (cancel.user_idx("u").unwrap(), cancel.user_idx("v").unwrap());
    // v's sales: +0.5·10·L + 0.5·10·L − 0.5·10·L over Q=3 with equal L (=1).
    let rep: f64 = reputation_score(&cancel, cu, cv).unwrap();
    assert!((rep - 0.5 * 10.0 / 3.0).abs() < 1e-12, "one surviving sale out of three: {rep}");
    let zero: CommercialGraph = CommercialGraph::build(&[
        t("t1", "u", "v", "i1", "a", 10.0, 1, 0.0),
        t("t2", "w", "v", "i1", "a", 99.0, 3, 0.0),
    ]);
    let (zu, zv) = (zero.user_idx("u").unwrap(), zero.user_idx("v").unwrap());
    assert_eq!(reputation_score(&zero, zu, zv).unwrap(), 0.0, "zero ratings score zero");

    // Rating similarity: identical received-rating vectors → 1, orthogonal
    // component patterns → 0.
    let mk = |r_w: [f64; 4], r_v: [f64; 4]| -> f64 {
        let txns = [
            Transaction { ratings: RatingVector::new(r_w).unwrap(), ..t("t1", "u", "w", "i", "a", 1.0, 1, 0.0) },
            Transaction { ratings: RatingVector::new(r_v).unwrap(), ..t("t2", "x", "v", "i", "a", 1.0, 1, 0.0) },
        ];
        let g: CommercialGraph = CommercialGraph::build(&txns);
        rating_score(&g, g.user_idx("u").unwrap(), g.user_idx("v").unwrap())
    };
    assert_eq!(mk([0.5; 4], [0.5; 4]), 1.0, "identical mean vectors");
    assert_eq!(mk([1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]), 0.0, "orthogonal vectors");
    // Mean over two prior sellers with cosines exactly 1 and 1/2 → 0.75.
    let two_priors: CommercialGraph = CommercialGraph::build(&[
        Transaction {
            ratings: RatingVector::new([1.0, 0.0, 0.0, 0.0]).unwrap(),
            ..t("t1", "u", "w1", "i1", "a", 10.0, 1, 0.0)
        },
        Transaction {
            ratings: RatingVector::new([1.0, 1.0, 1.0, 1.0]).unwrap(),
            ..t("t2", "u", "w2", "i2", "a", 10.0, 1, 0.0)
        },
        Transaction {
            ratings: RatingVector::new([1.0, 0.0, 0.0, 0.0]).unwrap(),
            ..t("t3", "z", "v", "i3", "a", 10.0, 1, 0.0)
        },
    ]);
    let (ru, rv) = (two_priors.user_idx("u").unwrap(), two_priors.user_idx("v").unwrap());
    assert_eq!(rating_score(&two_priors, ru, rv), 0.75);

    // Fusion: basis weights pick out single normalized scores; a convex
    // blend of equal scores reproduces them; the (0.6, 0.3, 0.9) blend at
    // equal thirds gives 0.6 exactly.
    let mut cands: Vec<ScoredCandidate> = vec![
        ScoredCandidate::raw(0, 10.0, 9.0, 0.3),
        ScoredCandidate::raw(1, 0.0, 0.0, 0.0),
        ScoredCandidate::raw(2, 5.0, 4.5, 0.15),
    ];
    scoring::normalize_scores(&mut cands);
    assert_eq!(
        (cands[0].norm_category, cands[1].norm_category, cands[2].norm_category),
        (1.0, 0.0, 0.5),
        "min-max normalization"
    );
    let basis_cat = FusionWeights::new(1.0, 0.0, 0.0).unwrap();
    let basis_rat = FusionWeights::new(0.0, 1.0, 0.0).unwrap();
    let basis_rep = FusionWeights::new(0.0, 0.0, 1.0).unwrap();
    for c in &cands {
        assert_eq!(scoring::total_score(c, &basis_cat), c.norm_category);
        assert_eq!(scoring::total_score(c, &basis_rat), c.norm_rating);
        assert_eq!(scoring::total_score(c, &basis_rep), c.norm_reputation);
    }
    let mut fixed: ScoredCandidate = ScoredCandidate::raw(0, 0.0, 0.0, 0.0);
    (fixed.norm_category, fixed.norm_rating, fixed.norm_reputation) = (0.6, 0.3, 0.9);
    let thirds = FusionWeights::default();
    assert!((scoring::total_score(&fixed, &thirds) - 0.6).abs() < 1e-12);
    (fixed.norm_category, fixed.norm_rating, fixed.norm_reputation) = (0.25, 0.25, 0.25);
    let skew = FusionWeights::new(0.2, 0.5, 0.3).unwrap();
    assert!((scoring::total_score(&fixed, &skew) - 0.25).abs() < 1e-12, "convexity identity");

    println!("criterion 3 (equation unit suite: floor, weight, similarity, reputation, rating, fusion): pass");
}

/// Exhaustive oracle over basket bitmasks: every frequent subset with its
/// count, and every rule meeting the thresholds.
type OracleRules = Vec<(Vec<usize>, usize, f64, f64)>;
fn oracle_mine(baskets: &[u16], n_items: usize, p: &MiningParams) -> (Vec<(Vec<usize>, usize)>, OracleRules) {
    let n = baskets.len();
    let count_of = |mask: u16| baskets.iter().filter(|&&b| b & mask == mask).count();
    let frequent =
        |c: usize| c >= p.min_count && c as f64 / n as f64 >= p.min_support;
    let positions = |mask: u16| -> Vec<usize> { (0..n_items).filter(|i| mask >> i & 1 == 1).collect() };

    let mut sets = Vec::new();
    let mut rules = Vec::new();
    for mask in 1..(1u32 << n_items) {
        let mask = mask as u16;
        let c = count_of(mask);
        if !frequent(c) {
            continue;
        }
        sets.push((positions(mask), c));
        if mask.count_ones() >= 2 {
            for y in 0..n_items {
                if mask >> y & 1 == 0 {
                    continue;
                }
                let antecedent = mask & !(1 << y);
                let confidence = c as f64 / count_of(antecedent) as f64;
                if confidence >= p.min_confidence {
                    rules.push((positions(antecedent), y, c as f64 / n as f64, confidence));
                }
            }
        }
    }
    sets.sort();
    rules.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    (sets, rules)
}

#[test]
fn criterion_04_apriori_matches_exhaustive_enumeration() {
    let item_pos = |name: &str| name[1..].parse::<usize>().expect("i## item names");
    for case in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(0xACCE04, &[case]));
        let n_items = rng.random_range(3..=12usize);
        let n_baskets = rng.random_range(5..=30usize);
        let density = rng.random_range(0.15..0.5);
        let baskets: Vec<u16> = (0..n_baskets)
            .map(|_| {
                (0..n_items).fold(0u16, |m, i| {
                    if rng.random_range(0.0..1.0) < density {
                        m | (1 << i)
                    } else {
                        m
                    }
                })
            })
            .filter(|&m| m != 0)
            .collect();
        let params = MiningParams {
            min_support: rng.random_range(0.05..0.35),
            min_confidence: rng.random_range(0.3..0.8),
            min_count: 2,
        };

        let mut txns = Vec::new();
        for (j, &mask) in baskets.iter().enumerate() {
            for i in 0..n_items {
                if mask >> i & 1 == 1 {
                    txns.push(t(
                        &format!("t{j}x{i}"),
                        &format!("b{j:02}"),
                        "seller",
                        &format!("i{i:02}"),
                        "c",
                        1.0,
                        1,
                        0.0,
                    ));
                }
            }
        }
        let g: CommercialGraph = CommercialGraph::build(&txns);

        let mut got_sets: Vec<(Vec<usize>, usize)> = items::frequent_itemsets(&g, &params)
            .into_iter()
            .map(|(set, c)| (set.into_iter().map(|i| item_pos(g.item_name(i))).collect(), c))
            .collect();
        got_sets.sort();
        let mut got_rules: Vec<(Vec<usize>, usize, f64, f64)> = items::mine_rules(&g, &params)
            .into_iter()
            .map(|r| {
                let ante: Vec<usize> = r.antecedent.iter().map(|a| item_pos(a)).collect();
                (ante, item_pos(&r.consequent), r.support, r.confidence)
            })
            .collect();
        got_rules.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

        let (want_sets, want_rules) = oracle_mine(&baskets, n_items, &params);
        assert_eq!(got_sets, want_sets, "frequent itemsets, case {case}");
        assert_eq!(got_rules.len(), want_rules.len(), "rule count, case {case}");
        for (g_r, w_r) in got_rules.iter().zip(&want_rules) {
            assert_eq!((&g_r.0, g_r.1), (&w_r.0, w_r.1), "rule identity, case {case}");
            assert!((g_r.2 - w_r.2).abs() <= 1e-12, "support, case {case}");
            assert!((g_r.3 - w_r.3).abs() <= 1e-12, "confidence, case {case}");
        }
    }
    println!("criterion 4 (apriori vs exhaustive enumeration, 50 basket collections): pass");
}

#[test]
fn criterion_05_item_level_never_exceeds_user_level() {
    let (_, _, report) = default_run();
    let user = series(report, "m1_user");
    let mut checked = 0usize;
    for name in ["m1_item_best_selling", "m1_item_random", "m1_item_rules"] {
        let item = series(report, name);
        for (uf, itf) in user.per_fold.iter().zip(&item.per_fold) {
            for (u, i) in uf.points.iter().zip(&itf.points) {
                assert!(i.precision <= u.precision && i.recall <= u.recall && i.f_measure <= u.f_measure,
                    "{name} fold {} size {}", uf.fold, u.predictions_per_user);
                checked += 1;
            }
        }
        for (u, i) in user.aggregate.iter().zip(&item.aggregate) {
            assert!(i.precision <= u.precision && i.recall <= u.recall && i.f_measure <= u.f_measure);
            checked += 1;
        }
    }
    // run_experiment itself asserts the same bound on every run; this
    // re-verifies it from the report alone.
    println!("criterion 5 (item-level ≤ user-level at every fold and size, {checked} points): pass");
}

#[test]
fn criterion_06_scored_pipeline_beats_random_baseline() {
    let (_, _, report) = default_run();
    let m1 = series(report, "m1_user");
    let m2 = series(report, "m2_user");
    for size in [1, 5, 10] {
        let (f1, f2) = (f_at(&m1.aggregate, size), f_at(&m2.aggregate, size));
        assert!(f1 >= f2, "M1 F {f1:.4} < M2 F {f2:.4} at size {size}");
    }
    println!(
        "criterion 6 (ablation direction, default spec, seed {}, 10 folds): pass — \
         M1 F {:.4}/{:.4}/{:.4} vs M2 F {:.4}/{:.4}/{:.4} at sizes 1/5/10",
        default_run().1.seed,
        f_at(&m1.aggregate, 1),
        f_at(&m1.aggregate, 5),
        f_at(&m1.aggregate, 10),
        f_at(&m2.aggregate, 1),
        f_at(&m2.aggregate, 5),
        f_at(&m2.aggregate, 10),
    );
}

#[test]
fn criterion_07_f_measure_decays_at_large_list_sizes() {
    let (data, config, _) = default_run();

    // Precondition: every target carries at most 3 held-out links. Capping
    // each buyer at their first 3 distinct sellers makes that true of
    // every fold split, which the audit below re-verifies from the
    // reconstructed plan.
    let mut sellers_seen: std::collections::HashMap<&str, BTreeSet<&str>> =
        std::collections::HashMap::new();
    let capped: Vec<Transaction> = data
        .iter()
        .filter(|t| {
            let set = sellers_seen.entry(t.buyer.as_str()).or_default();
            set.contains(t.seller.as_str()) || set.len() < 3 && set.insert(&t.seller)
        })
        .cloned()
        .collect();

    let plan = eval::make_folds(
        &capped,
        config.eval.k,
        mix(config.seed, &[linkrec::seeds::label("folds")]),
    )
    .unwrap();
    let (mut total_links, mut max_links, mut targets_seen) = (0usize, 0usize, 0usize);
    for fold in 0..plan.k() {
        let validation: Vec<&Transaction> = capped
            .iter()
            .enumerate()
            .filter(|(i, _)| plan.fold_of(*i) == fold as u32)
            .map(|(_, t)| t)
            .collect();
        let (targets, _) = eval::sample_targets(
            &validation,
            config.eval.samples,
            mix(config.seed, &[linkrec::seeds::label("targets"), fold as u64]),
        );
        for target in targets {
            let links: BTreeSet<&str> = validation
                .iter()
                .filter(|t| t.buyer == target)
                .map(|t| t.seller.as_str())
                .collect();
            total_links += links.len();
            max_links = max_links.max(links.len());
            targets_seen += 1;
        }
    }
    let mean_links = total_links as f64 / targets_seen as f64;
    assert!(max_links <= 3, "a target carries {max_links} held-out links");

    let report = eval::run_experiment(&capped, config, 1).expect("capped run");
    let m1 = series(&report, "m1_user");
    let tail = f_at(&m1.aggregate, 25);
    let peak = m1.maxima.f_measure;
    assert!(tail < peak, "F(25) = {tail:.4} should undercut the peak {peak:.4}");
    println!(
        "criterion 7 (F-decay with ≤ 3 held-out links per target, mean {mean_links:.2}: \
         F(25) {tail:.4} < peak {peak:.4}): pass"
    );
}

#[test]
fn criterion_08_best_selling_item_strategy_dominates() {
    let (_, _, report) = default_run();
    assert!(
        GeneratorSpec::default().popularity_skew >= 1.0,
        "criterion requires item-popularity skew at least Zipf(1.0)"
    );
    let best = series(report, "m1_item_best_selling").maxima.f_measure;
    let random = series(report, "m1_item_random").maxima.f_measure;
    let rules = series(report, "m1_item_rules").maxima.f_measure;
    assert!(best > random, "best-selling {best:.4} vs random {random:.4}");
    assert!(best > rules, "best-selling {best:.4} vs rules {rules:.4}");

    let json = serde_json::to_string(report).unwrap();
    assert!(
        json.contains("\"reference_item_maxima_percent\""),
        "reference maxima stay in the report header"
    );
    println!(
        "criterion 8 (best-selling max F {best:.4} > random {random:.4}, rules {rules:.4}; \
         reference block present): pass"
    );
}

#[test]
fn criterion_09_reports_are_byte_identical_across_thread_counts() {
    let (data, config, report) = default_run();
    let one = serde_json::to_string_pretty(report).unwrap();
    let eight =
        serde_json::to_string_pretty(&eval::run_experiment(data, config, 8).unwrap()).unwrap();
    assert_eq!(one, eight, "1-thread and 8-thread reports differ");
    let repeat =
        serde_json::to_string_pretty(&eval::run_experiment(data, config, 1).unwrap()).unwrap();
    assert_eq!(one, repeat, "repeated run differs");
    println!(
        "criterion 9 (byte-identical reports: 1 vs 8 threads and repeated runs, {} bytes): pass",
        one.len()
    );
}

#[test]
fn criterion_10_reference_scale_evaluation_is_fast() {
    let config = RunConfig::default();
    let data = synth::generate(&GeneratorSpec::reference_scale(), config.seed).unwrap();
    assert_eq!(data.len(), 2066);
    let start = Instant::now();
    let report = eval::run_experiment(&data, &config, 0).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(report.series.len(), 5);
    assert!(elapsed < Duration::from_secs(60), "reference evaluation took {elapsed:?}");
    println!(
        "criterion 10 (10-fold evaluation of 2,066 transactions in {elapsed:.2?} < 60 s): pass"
    );
}
