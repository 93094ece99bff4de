//! Cross-validated link-prediction experiments.
//!
//! Transactions are split into k nearly equal folds. Each fold in turn is
//! held out as validation, the other k−1 rebuild the whole training side
//! (graph, similarity table, association rules) from scratch, and sampled
//! validation buyers get prediction lists at every configured size. Two
//! variants run: **M1**, the full scored pipeline, and **M2**, the ablated
//! baseline that picks sellers uniformly from the same stage-1 candidate
//! list. Predicted links are judged at *user level* (seller matches a
//! held-out trade of the target) and, for M1, at *item level* (seller and
//! chosen item both match) under the three item-selection strategies.
//!
//! Metrics are pooled per fold — precision counts true predictions over
//! issued predictions across all sampled targets, recall counts them over
//! the sampled targets' distinct held-out links — then averaged across
//! folds component-wise. Every randomized step seeds its own generator from
//! the run seed plus a stable derivation path, so reports are byte-identical
//! across repeats and thread counts.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EvalMode, RunConfig};
use crate::data::Transaction;
use crate::error::{Error, Result};
use crate::graph::{CommercialGraph, UserIdx};
use crate::items::{self, AssociationRule, ItemMethod};
use crate::num::{round6, Real};
use crate::scoring;
use crate::seeds::{label, mix};
use crate::simrank::{self, SimilarityTable};

/// Metrics for one prediction-list size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricPoint {
    #[serde(rename = "size")]
    pub predictions_per_user: usize,
    pub precision: f64,
    pub recall: f64,
    #[serde(rename = "f")]
    pub f_measure: f64,
}

/// Pooled metrics from raw counts: `hits` true predictions out of `issued`,
/// against `links` distinct held-out links. Zero denominators read as 0.
pub fn metric_point(size: usize, hits: usize, issued: usize, links: usize) -> MetricPoint {
    let precision = if issued > 0 { hits as f64 / issued as f64 } else { 0.0 };
    let recall = if links > 0 { hits as f64 / links as f64 } else { 0.0 };
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    MetricPoint { predictions_per_user: size, precision, recall, f_measure }
}

/// Assignment of every transaction (by input position) to one of `k` folds.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    k: usize,
    assignments: Vec<u32>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold of the transaction at input position `index`.
    pub fn fold_of(&self, index: usize) -> u32 {
        self.assignments[index]
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f as usize] += 1;
        }
        sizes
    }
}

/// Splits transactions into `k` nearly equal folds: a seeded permutation is
/// dealt round-robin, so fold sizes differ by at most one.
pub fn make_folds<F: Real>(
    transactions: &[Transaction<F>],
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    if transactions.len() < k {
        return Err(Error::Config(format!(
            "{} transactions cannot fill {k} folds",
            transactions.len()
        )));
    }
    let mut order: Vec<usize> = (0..transactions.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignments = vec![0u32; transactions.len()];
    for (deal, &position) in order.iter().enumerate() {
        assignments[position] = (deal % k) as u32;
    }
    Ok(FoldPlan { k, assignments })
}

/// Seeded sample (without replacement) of buyers with at least one
/// validation transaction. Returns the targets and the shortfall against
/// `count` when fewer buyers exist.
pub fn sample_targets<'a, F: Real>(
    validation: &[&'a Transaction<F>],
    count: usize,
    seed: u64,
) -> (Vec<&'a str>, usize) {
    let eligible: BTreeSet<&str> = validation.iter().map(|t| t.buyer.as_str()).collect();
    let mut buyers: Vec<&str> = eligible.into_iter().collect();
    buyers.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let shortfall = count.saturating_sub(buyers.len());
    buyers.truncate(count);
    (buyers, shortfall)
}

/// Pipeline variant: full scoring (M1) or the random-from-candidates
/// ablation (M2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    M1,
    M2,
}

/// Granularity at which a predicted link counts as true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    User,
    Item,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub points: Vec<MetricPoint>,
}

/// Per-metric maxima over a series' aggregate curve (the "maximum value"
/// convention used for item-level comparisons).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Maxima {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn maxima_of(points: &[MetricPoint]) -> Maxima {
    let fold_max = |pick: fn(&MetricPoint) -> f64| points.iter().map(pick).fold(0.0, f64::max);
    Maxima {
        precision: fold_max(|p| p.precision),
        recall: fold_max(|p| p.recall),
        f_measure: fold_max(|p| p.f_measure),
    }
}

/// One evaluated curve: a (variant, level, item method) combination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub name: String,
    pub variant: Variant,
    pub level: Level,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item_method: Option<ItemMethod>,
    pub per_fold: Vec<FoldMetrics>,
    /// Component-wise mean over the evaluated folds, per list size.
    pub aggregate: Vec<MetricPoint>,
    pub maxima: Maxima,
}

/// Reference item-level maxima (in percent) from the real-world benchmark
/// this protocol is modeled on, kept in every report for side-by-side
/// comparison; synthetic runs are expected to differ in magnitude, not
/// direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceItemMaxima {
    pub best_selling: Maxima,
    pub rules: Maxima,
    pub random: Maxima,
}

pub const REFERENCE_ITEM_MAXIMA_PERCENT: ReferenceItemMaxima = ReferenceItemMaxima {
    best_selling: Maxima { precision: 10.79, recall: 25.34, f_measure: 10.44 },
    rules: Maxima { precision: 0.15, recall: 0.49, f_measure: 0.21 },
    random: Maxima { precision: 0.29, recall: 0.458, f_measure: 0.33 },
};

/// Full experiment output; serializes to the report JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub reference_item_maxima_percent: ReferenceItemMaxima,
    pub fold_sizes: Vec<usize>,
    pub warnings: Vec<String>,
    pub series: Vec<SeriesReport>,
}

/// Cumulative hit counts along one prediction list: `cum[i]` is the number
/// of true predictions among the first `i`.
struct PrefixHits {
    cum: Vec<usize>,
}

impl PrefixHits {
    fn new(flags: impl Iterator<Item = bool>) -> Self {
        let mut cum = vec![0];
        for flag in flags {
            cum.push(cum.last().unwrap() + usize::from(flag));
        }
        PrefixHits { cum }
    }

    /// Predictions actually issued at list size `s` (shorter lists issue
    /// fewer).
    fn issued(&self, s: usize) -> usize {
        s.min(self.cum.len() - 1)
    }

    fn hits(&self, s: usize) -> usize {
        self.cum[self.issued(s)]
    }
}

const N_ITEM_METHODS: usize = 3;
const ITEM_METHODS: [ItemMethod; N_ITEM_METHODS] =
    [ItemMethod::BestSelling, ItemMethod::Random, ItemMethod::Rules];

/// Everything one target contributes to its fold's pooled counts.
struct TargetTally {
    user_links: usize,
    item_links: usize,
    m1_user: PrefixHits,
    m2_user: PrefixHits,
    /// Item-level hits along the M1 ranking, per item method.
    items: [PrefixHits; N_ITEM_METHODS],
}

/// Held-out links of one target: distinct sellers and (seller, item) pairs.
struct HeldOut<'a> {
    sellers: BTreeSet<&'a str>,
    pairs: BTreeSet<(&'a str, &'a str)>,
}

#[allow(clippy::too_many_arguments)]
fn tally_target<F: Real>(
    g: &CommercialGraph<F>,
    table: &SimilarityTable<F>,
    rules: &[AssociationRule],
    config: &RunConfig,
    fold: usize,
    max_size: usize,
    target: &str,
    held_out: &HeldOut<'_>,
) -> TargetTally {
    let weights = config.fusion_weights().expect("config validated before the run");
    let target_idx = g.user_idx(target);

    // M1: the scored ranking, full depth, trimmed to the largest list size.
    let mut ranked: Vec<UserIdx> = match target_idx {
        Some(t) => {
            scoring::rank_candidates(g, table, t, config.candidates.n, &weights, usize::MAX)
                .into_iter()
                .map(|c| c.seller)
                .collect()
        }
        None => Vec::new(),
    };

    // M2: the same stage-1 candidates in seeded uniform order.
    let mut shuffled: Vec<UserIdx> = match target_idx {
        Some(t) => {
            let similar = table.top_n(t, config.candidates.n);
            simrank::candidate_sellers(g, t, &similar).candidates
        }
        None => Vec::new(),
    };
    let m2_seed = mix(config.seed, &[label("m2"), fold as u64, label(target)]);
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(m2_seed));
    ranked.truncate(max_size);
    shuffled.truncate(max_size);

    let seller_hit = |&v: &UserIdx| held_out.sellers.contains(g.user_name(v));
    let m1_user = PrefixHits::new(ranked.iter().map(seller_hit));
    let m2_user = PrefixHits::new(shuffled.iter().map(seller_hit));

    // Item level rides on the M1 ranking; every ranked seller has sold at
    // least once (that is what made them a candidate), so selection cannot
    // fail and the issued counts match the user level exactly.
    let history: BTreeSet<&str> = target_idx
        .map(|t| g.purchases(t).iter().map(|&e| g.item_name(g.edge(e).item)).collect())
        .unwrap_or_default();
    let item_seed = mix(config.seed, &[label("item"), fold as u64, label(target)]);
    let items = ITEM_METHODS.map(|method| {
        PrefixHits::new(ranked.iter().map(|&v| {
            let seller = g.user_name(v);
            let item = match method {
                ItemMethod::BestSelling => {
                    items::select_best_selling(g, v).expect("ranked sellers have sales")
                }
                ItemMethod::Random => {
                    items::select_random(g, v, item_seed).expect("ranked sellers have sales")
                }
                ItemMethod::Rules => {
                    let inventory: BTreeSet<&str> = items::seller_inventory(g, v)
                        .into_iter()
                        .map(|i| g.item_name(i))
                        .collect();
                    let (name, _) = items::select_by_rules(
                        rules,
                        &history,
                        &inventory,
                        mix(item_seed, &[label(seller)]),
                    )
                    .expect("ranked sellers have nonempty inventories");
                    return held_out.pairs.contains(&(seller, name.as_str()));
                }
            };
            held_out.pairs.contains(&(seller, g.item_name(item)))
        }))
    });

    TargetTally {
        user_links: held_out.sellers.len(),
        item_links: held_out.pairs.len(),
        m1_user,
        m2_user,
        items,
    }
}

/// Pooled fold counts for every series, before division into metrics.
struct FoldTally {
    fold: usize,
    tallies: Vec<TargetTally>,
}

impl FoldTally {
    fn points(&self, sizes: &[usize], series: SeriesKind) -> Vec<MetricPoint> {
        sizes
            .iter()
            .map(|&s| {
                let mut hits = 0;
                let mut issued = 0;
                let mut links = 0;
                for t in &self.tallies {
                    let prefix = match series {
                        SeriesKind::M1User => &t.m1_user,
                        SeriesKind::M2User => &t.m2_user,
                        SeriesKind::Item(m) => &t.items[m],
                    };
                    hits += prefix.hits(s);
                    issued += prefix.issued(s);
                    links += match series {
                        SeriesKind::Item(_) => t.item_links,
                        _ => t.user_links,
                    };
                }
                metric_point(s, hits, issued, links)
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum SeriesKind {
    M1User,
    M2User,
    Item(usize),
}

impl SeriesKind {
    fn describe(self) -> (String, Variant, Level, Option<ItemMethod>) {
        match self {
            SeriesKind::M1User => ("m1_user".to_string(), Variant::M1, Level::User, None),
            SeriesKind::M2User => ("m2_user".to_string(), Variant::M2, Level::User, None),
            SeriesKind::Item(m) => {
                let method = ITEM_METHODS[m];
                let tag = match method {
                    ItemMethod::BestSelling => "best_selling",
                    ItemMethod::Random => "random",
                    ItemMethod::Rules => "rules",
                };
                (format!("m1_item_{tag}"), Variant::M1, Level::Item, Some(method))
            }
        }
    }

    fn selected(mode: EvalMode) -> Vec<SeriesKind> {
        let items = (0..N_ITEM_METHODS).map(SeriesKind::Item);
        match mode {
            EvalMode::Both => {
                [SeriesKind::M1User, SeriesKind::M2User].into_iter().chain(items).collect()
            }
            EvalMode::M1 => [SeriesKind::M1User].into_iter().chain(items).collect(),
            EvalMode::M2 => vec![SeriesKind::M2User],
        }
    }
}

fn mean_points(per_fold: &[FoldMetrics], sizes: &[usize]) -> Vec<MetricPoint> {
    let n = per_fold.len() as f64;
    sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let sum = |pick: fn(&MetricPoint) -> f64| -> f64 {
                per_fold.iter().map(|f| pick(&f.points[i])).sum::<f64>()
            };
            MetricPoint {
                predictions_per_user: s,
                precision: sum(|p| p.precision) / n,
                recall: sum(|p| p.recall) / n,
                f_measure: sum(|p| p.f_measure) / n,
            }
        })
        .collect()
}

/// Item-level metrics can never exceed user-level metrics for the same
/// ranking: the issued counts coincide and an exact (seller, item) hit
/// implies the (seller) hit. Violations would mean a bookkeeping bug, so
/// this asserts unconditionally.
fn assert_dominance(user: &[MetricPoint], item: &[MetricPoint], context: &str) {
    for (u, i) in user.iter().zip(item) {
        assert!(
            i.precision <= u.precision && i.recall <= u.recall && i.f_measure <= u.f_measure,
            "item-level metrics exceed user-level at size {} ({context}): {i:?} vs {u:?}",
            u.predictions_per_user,
        );
    }
}

/// Runs the full k-fold experiment. `threads` caps the worker pool (0 uses
/// all cores); the report is byte-identical at any thread count and is
/// therefore not echoed into it.
pub fn run_experiment<F: Real>(
    transactions: &[Transaction<F>],
    config: &RunConfig,
    threads: usize,
) -> Result<EvaluationReport> {
    config.validate()?;
    let plan = make_folds(transactions, config.eval.k, mix(config.seed, &[label("folds")]))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build a {threads}-thread pool: {e}")))?;
    pool.install(|| run_folds(transactions, config, &plan))
}

fn run_folds<F: Real>(
    transactions: &[Transaction<F>],
    config: &RunConfig,
    plan: &FoldPlan,
) -> Result<EvaluationReport> {
    let sizes = &config.eval.list_sizes;
    let max_size = *sizes.last().expect("validated config has list sizes");
    let mut warnings = Vec::new();
    let mut fold_tallies: Vec<FoldTally> = Vec::new();

    for fold in 0..plan.k() {
        let mut training: Vec<Transaction<F>> = Vec::new();
        let mut validation: Vec<&Transaction<F>> = Vec::new();
        for (i, t) in transactions.iter().enumerate() {
            if plan.fold_of(i) == fold as u32 {
                validation.push(t);
            } else {
                training.push(t.clone());
            }
        }

        let (targets, shortfall) = sample_targets(
            &validation,
            config.eval.samples,
            mix(config.seed, &[label("targets"), fold as u64]),
        );
        if shortfall > 0 {
            warnings.push(format!(
                "fold {fold}: only {} eligible validation buyers of {} requested",
                targets.len(),
                config.eval.samples
            ));
        }
        if targets.is_empty() {
            warnings.push(format!("fold {fold}: no eligible validation buyers; fold skipped"));
            continue;
        }

        let g: CommercialGraph<F> = CommercialGraph::build(&training);
        let table = simrank::compute(&g, &config.simrank_params());
        let rules = items::mine_rules(&g, &config.mining_params());

        let mut held_out: BTreeMap<&str, HeldOut<'_>> = BTreeMap::new();
        for t in &validation {
            let entry = held_out
                .entry(t.buyer.as_str())
                .or_insert_with(|| HeldOut { sellers: BTreeSet::new(), pairs: BTreeSet::new() });
            entry.sellers.insert(t.seller.as_str());
            entry.pairs.insert((t.seller.as_str(), t.item.as_str()));
        }

        let tallies: Vec<TargetTally> = targets
            .par_iter()
            .map(|target| {
                tally_target(
                    &g,
                    &table,
                    &rules,
                    config,
                    fold,
                    max_size,
                    target,
                    &held_out[target],
                )
            })
            .collect();
        fold_tallies.push(FoldTally { fold, tallies });
    }

    let mut series = Vec::new();
    for kind in SeriesKind::selected(config.eval.mode) {
        let (name, variant, level, item_method) = kind.describe();
        let per_fold: Vec<FoldMetrics> = fold_tallies
            .iter()
            .map(|ft| FoldMetrics { fold: ft.fold, points: ft.points(sizes, kind) })
            .collect();
        let aggregate = mean_points(&per_fold, sizes);
        let maxima = maxima_of(&aggregate);
        series.push(SeriesReport { name, variant, level, item_method, per_fold, aggregate, maxima });
    }

    // The §-style dominance guarantee, checked on every fold curve and on
    // the aggregates of every item series against the M1 user series.
    if let Some(user) = series.iter().find(|s| s.variant == Variant::M1 && s.level == Level::User) {
        for item in series.iter().filter(|s| s.level == Level::Item) {
            for (uf, itf) in user.per_fold.iter().zip(&item.per_fold) {
                assert_dominance(&uf.points, &itf.points, &format!("{} fold {}", item.name, uf.fold));
            }
            assert_dominance(&user.aggregate, &item.aggregate, &format!("{} aggregate", item.name));
        }
    }

    Ok(EvaluationReport {
        config: config.clone(),
        reference_item_maxima_percent: REFERENCE_ITEM_MAXIMA_PERCENT,
        fold_sizes: plan.fold_sizes(),
        warnings,
        series,
    })
}

/// Writes the aggregate curves as a flat CSV table
/// (`series,size,precision,recall,f`), rounded to 6 decimals for plotting.
pub fn write_metrics_csv<W: io::Write>(report: &EvaluationReport, mut w: W) -> io::Result<()> {
    writeln!(w, "series,size,precision,recall,f")?;
    for s in &report.series {
        for p in &s.aggregate {
            writeln!(
                w,
                "{},{},{},{},{}",
                s.name,
                p.predictions_per_user,
                round6(p.precision),
                round6(p.recall),
                round6(p.f_measure)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::synth::{generate, GeneratorSpec};
    use crate::testkit::txn;

    fn small_config() -> RunConfig {
        let mut c = RunConfig::default();
        c.eval.k = 4;
        c.eval.samples = 12;
        c.eval.list_sizes = vec![1, 3, 5, 10];
        c
    }

    fn small_data() -> Vec<Transaction> {
        let spec = GeneratorSpec {
            buyers: 60,
            sellers: 30,
            categories: 5,
            transactions: 400,
            ..GeneratorSpec::default()
        };
        generate(&spec, 77).unwrap()
    }

    #[test]
    fn metric_arithmetic_matches_definitions() {
        let p = metric_point(5, 2, 5, 2);
        assert_eq!(p.precision, 0.4);
        assert_eq!(p.recall, 1.0);
        assert!((p.f_measure - 4.0 / 7.0).abs() < 1e-15);

        let zero = metric_point(3, 0, 3, 2);
        assert_eq!((zero.precision, zero.recall, zero.f_measure), (0.0, 0.0, 0.0));
        let nothing_issued = metric_point(3, 0, 0, 2);
        assert_eq!(nothing_issued.precision, 0.0);

        // Perfect single prediction for a single held-out link.
        let perfect = metric_point(1, 1, 1, 1);
        assert_eq!((perfect.precision, perfect.recall, perfect.f_measure), (1.0, 1.0, 1.0));
    }

    #[test]
    fn f_measure_sits_between_precision_and_recall() {
        for (hits, issued, links) in [(1, 4, 2), (3, 5, 7), (2, 2, 9)] {
            let p = metric_point(1, hits, issued, links);
            let (lo, hi) = (p.precision.min(p.recall), p.precision.max(p.recall));
            assert!(lo <= p.f_measure && p.f_measure <= hi, "{p:?}");
        }
    }

    #[test]
    fn folds_partition_evenly_and_deterministically() {
        let txns: Vec<Transaction> =
            (0..10).map(|i| txn(&format!("t{i}"), "b", "s", "i", "c")).collect();
        let plan = make_folds(&txns, 10, 3).unwrap();
        assert_eq!(plan.fold_sizes(), vec![1; 10]);
        assert_eq!(plan, make_folds(&txns, 10, 3).unwrap());
        assert_ne!(plan, make_folds(&txns, 10, 4).unwrap());

        let big = generate(&GeneratorSpec::reference_scale(), 1).unwrap();
        let plan = make_folds(&big, 10, 3).unwrap();
        let sizes = plan.fold_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 2066);
        assert!(sizes.iter().all(|&s| s == 206 || s == 207), "{sizes:?}");
        // Every transaction lands in exactly one fold by construction; the
        // sizes summing to the total confirms none was dropped.
    }

    #[test]
    fn undersized_inputs_cannot_be_folded() {
        let txns: Vec<Transaction> =
            (0..3).map(|i| txn(&format!("t{i}"), "b", "s", "i", "c")).collect();
        assert!(matches!(make_folds(&txns, 4, 0), Err(Error::Config(_))));
        assert!(matches!(make_folds(&txns, 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn target_sampling_reports_shortfall() {
        let txns: Vec<Transaction> = vec![
            txn("t1", "b1", "s1", "i1", "c"),
            txn("t2", "b2", "s1", "i1", "c"),
            txn("t3", "b3", "s2", "i2", "c"),
            txn("t4", "b1", "s2", "i2", "c"),
        ];
        let refs: Vec<&Transaction> = txns.iter().collect();
        let (targets, shortfall) = sample_targets(&refs, 50, 9);
        assert_eq!(shortfall, 47);
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec!["b1", "b2", "b3"]);
        assert_eq!(sample_targets(&refs, 50, 9).0, targets);
        assert_ne!(sample_targets(&refs, 2, 1).0.len(), 3);

        let (none, shortfall) = sample_targets::<f64>(&[], 5, 0);
        assert!(none.is_empty());
        assert_eq!(shortfall, 5);
    }

    #[test]
    fn report_structure_matches_mode() {
        let data = small_data();
        let both = run_experiment(&data, &small_config(), 1).unwrap();
        let names: Vec<&str> = both.series.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            vec!["m1_user", "m2_user", "m1_item_best_selling", "m1_item_random", "m1_item_rules"]
        );
        for s in &both.series {
            assert_eq!(s.per_fold.len(), 4);
            assert_eq!(s.aggregate.len(), 4);
            for f in &s.per_fold {
                assert_eq!(f.points.len(), 4);
            }
        }

        let mut c = small_config();
        c.eval.mode = EvalMode::M1;
        let m1 = run_experiment(&data, &c, 1).unwrap();
        assert_eq!(m1.series.len(), 4);
        assert!(m1.series.iter().all(|s| s.variant == Variant::M1));

        c.eval.mode = EvalMode::M2;
        let m2 = run_experiment(&data, &c, 1).unwrap();
        assert_eq!(m2.series.len(), 1);
        assert_eq!(m2.series[0].name, "m2_user");
    }

    #[test]
    fn aggregates_are_fold_means() {
        let report = run_experiment(&small_data(), &small_config(), 1).unwrap();
        for s in &report.series {
            for (i, agg) in s.aggregate.iter().enumerate() {
                let mean: f64 =
                    s.per_fold.iter().map(|f| f.points[i].f_measure).sum::<f64>() / 4.0;
                assert!((agg.f_measure - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn maxima_cover_the_aggregate_curve() {
        let report = run_experiment(&small_data(), &small_config(), 1).unwrap();
        for s in &report.series {
            let m = maxima_of(&s.aggregate);
            assert_eq!(m, s.maxima);
            assert!(s.aggregate.iter().all(|p| p.f_measure <= m.f_measure));
            assert!(s.aggregate.iter().any(|p| p.f_measure == m.f_measure));
        }
    }

    #[test]
    fn small_sample_pool_is_reported_not_fatal() {
        let mut config = small_config();
        config.eval.samples = 1000;
        let report = run_experiment(&small_data(), &config, 1).unwrap();
        assert_eq!(report.warnings.len(), 4, "every fold runs short: {:?}", report.warnings);
        assert!(report.warnings[0].contains("eligible validation buyers"));
    }

    #[test]
    fn reports_are_identical_across_thread_counts_and_repeats() {
        let data = small_data();
        let config = small_config();
        let one = serde_json::to_string(&run_experiment(&data, &config, 1).unwrap()).unwrap();
        let again = serde_json::to_string(&run_experiment(&data, &config, 1).unwrap()).unwrap();
        let four = serde_json::to_string(&run_experiment(&data, &config, 4).unwrap()).unwrap();
        assert_eq!(one, again);
        assert_eq!(one, four);
    }

    #[test]
    fn validation_transactions_stay_out_of_training() {
        // Hygiene is structural: the training side is rebuilt per fold from
        // the complement. Recompute the partition the run uses and verify
        // it is a disjoint cover; then confirm a buyer who only ever
        // appears in one fold's validation slice is unknown to that fold's
        // training graph.
        let data = small_data();
        let config = small_config();
        let plan =
            make_folds(&data, config.eval.k, mix(config.seed, &[label("folds")])).unwrap();
        for fold in 0..plan.k() {
            let (mut train, mut val) = (Vec::new(), Vec::new());
            for (i, t) in data.iter().enumerate() {
                if plan.fold_of(i) == fold as u32 {
                    val.push(t.clone());
                } else {
                    train.push(t.clone());
                }
            }
            assert_eq!(train.len() + val.len(), data.len());
            let g: CommercialGraph = CommercialGraph::build(&train);
            for t in &val {
                assert!(g.user_idx(&t.id).is_none(), "transaction ids are not users");
            }
            for t in &val {
                let only_here = data
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| u.buyer == t.buyer)
                    .all(|(i, _)| plan.fold_of(i) == fold as u32);
                if only_here {
                    assert!(g.user_idx(&t.buyer).is_none());
                }
            }
        }
    }

    #[test]
    fn invalid_config_aborts_before_computation() {
        let mut config = small_config();
        config.fusion.gamma = 0.5; // sum now exceeds 1
        assert!(matches!(run_experiment(&small_data(), &config, 1), Err(Error::Config(_))));
    }

    #[test]
    fn csv_table_covers_every_series_and_size() {
        let report = run_experiment(&small_data(), &small_config(), 1).unwrap();
        let mut out = Vec::new();
        write_metrics_csv(&report, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "series,size,precision,recall,f");
        assert_eq!(lines.len(), 1 + 5 * 4);
        assert!(lines[1].starts_with("m1_user,1,"));
    }

    #[test]
    fn reference_block_is_present_in_serialized_reports() {
        let report = run_experiment(&small_data(), &small_config(), 1).unwrap();
        let json = serde_json::to_string_pretty(&report).unwrap();
        assert!(json.contains("reference_item_maxima_percent"));
        assert!(json.contains("10.79") && json.contains("25.34") && json.contains("10.44"));
    }
}
