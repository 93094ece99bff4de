//! Item choice for recommended sellers.
//!
//! Ranking produces sellers; the final list pairs each seller with exactly
//! one item from their inventory (the distinct items they have sold, the
//! only inventory signal the transaction log carries). Three strategies:
//!
//! * **best-selling** — the seller's highest-volume item by total quantity;
//! * **random** — a seeded uniform draw, reproducible per (seed, seller);
//! * **rules** — association rules mined from buyer purchase histories with
//!   the apriori algorithm; when no rule connects the target's history to
//!   the seller's inventory, falls back to the seeded random draw.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommercialGraph, ItemIdx, UserIdx};
use crate::num::{round6, Real};
use crate::scoring::ScoredCandidate;
use crate::seeds;

/// How an entry's item was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    BestSelling,
    Random,
    /// An association rule fired.
    Rule,
    /// Rules were requested but none applied; the item is a random draw.
    RuleFallback,
}

/// Item-selection strategy, as named in configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemMethod {
    BestSelling,
    Random,
    Rules,
}

impl std::str::FromStr for ItemMethod {
    type Err = Error;

    /// Accepts the serialized names, with `-` and `_` interchangeable.
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "best_selling" => Ok(ItemMethod::BestSelling),
            "random" => Ok(ItemMethod::Random),
            "rules" => Ok(ItemMethod::Rules),
            other => Err(Error::Config(format!(
                "unknown item method {other:?}; expected best_selling, random, or rules"
            ))),
        }
    }
}

/// An `antecedent → consequent` rule mined from buyer baskets.
///
/// `support` is the fraction of baskets containing antecedent ∪ {consequent};
/// `confidence` is that count over the antecedent's own basket count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationRule {
    /// Item ids, ascending; never contains the consequent.
    pub antecedent: Vec<String>,
    pub consequent: String,
    pub support: f64,
    pub confidence: f64,
}

/// Distinct items `v` has sold, ascending.
pub fn seller_inventory<F: Real>(g: &CommercialGraph<F>, v: UserIdx) -> Vec<ItemIdx> {
    let set: BTreeSet<ItemIdx> = g.sales(v).iter().map(|&e| g.edge(e).item).collect();
    set.into_iter().collect()
}

/// The item `v` has sold the most units of; ties go to the smaller item id.
pub fn select_best_selling<F: Real>(g: &CommercialGraph<F>, v: UserIdx) -> Result<ItemIdx> {
    let mut sold: HashMap<ItemIdx, u64> = HashMap::new();
    for &e in g.sales(v) {
        let edge = g.edge(e);
        *sold.entry(edge.item).or_insert(0) += u64::from(edge.quantity);
    }
    sold.into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(item, _)| item)
        .ok_or_else(|| Error::NoSales(g.user_name(v).to_string()))
}

/// A uniform draw from `v`'s inventory, reproducible from `(seed, v)`: the
/// generator is seeded from the given seed mixed with the seller's id, so
/// every seller gets an independent, stable stream.
pub fn select_random<F: Real>(g: &CommercialGraph<F>, v: UserIdx, seed: u64) -> Result<ItemIdx> {
    let inventory = seller_inventory(g, v);
    if inventory.is_empty() {
        return Err(Error::NoSales(g.user_name(v).to_string()));
    }
    Ok(uniform_draw(&inventory, seeds::mix(seed, &[seeds::label(g.user_name(v))])))
}

fn uniform_draw(inventory: &[ItemIdx], rng_seed: u64) -> ItemIdx {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    inventory[rng.random_range(0..inventory.len())]
}

/// Mining thresholds. `min_count` is an absolute basket-count floor on top
/// of the relative `min_support`, keeping one-off coincidences out of small
/// datasets; set it to 1 to rely on `min_support` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningParams {
    pub min_support: f64,
    pub min_confidence: f64,
    pub min_count: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams { min_support: 0.01, min_confidence: 0.5, min_count: 2 }
    }
}

impl MiningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_support > 0.0 && self.min_support <= 1.0) {
            return Err(Error::Config(format!(
                "min_support must lie in (0,1], got {}",
                self.min_support
            )));
        }
        if !(self.min_confidence > 0.0 && self.min_confidence <= 1.0) {
            return Err(Error::Config(format!(
                "min_confidence must lie in (0,1], got {}",
                self.min_confidence
            )));
        }
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Per-buyer baskets: the distinct items each buyer has purchased,
/// ascending; buyers without purchases contribute nothing.
fn buyer_baskets<F: Real>(g: &CommercialGraph<F>) -> Vec<Vec<ItemIdx>> {
    g.users()
        .filter_map(|u| {
            let basket: BTreeSet<ItemIdx> = g.purchases(u).iter().map(|&e| g.edge(e).item).collect();
            if basket.is_empty() {
                None
            } else {
                Some(basket.into_iter().collect())
            }
        })
        .collect()
}

/// Mines all rules with a single-item consequent meeting the thresholds,
/// level-wise with candidate pruning (an itemset can only be frequent if
/// every subset is). Rules come out ordered by falling confidence, then
/// falling support, then antecedent/consequent ids — the same precedence
/// [`select_by_rules`] applies.
pub fn mine_rules<F: Real>(g: &CommercialGraph<F>, params: &MiningParams) -> Vec<AssociationRule> {
    let baskets = buyer_baskets(g);
    let n = baskets.len();
    if n == 0 {
        return Vec::new();
    }
    let counts = frequent_counts(&baskets, params);

    let mut rules = Vec::new();
    for (itemset, &count) in counts.iter().filter(|(s, _)| s.len() >= 2) {
        for (drop, &consequent) in itemset.iter().enumerate() {
            let mut antecedent = itemset.clone();
            antecedent.remove(drop);
            let confidence = count as f64 / counts[&antecedent] as f64;
            if confidence >= params.min_confidence {
                rules.push(AssociationRule {
                    antecedent: antecedent.iter().map(|&i| g.item_name(i).to_string()).collect(),
                    consequent: g.item_name(consequent).to_string(),
                    support: count as f64 / n as f64,
                    confidence,
                });
            }
        }
    }
    rules.sort_by(|a, b| {
        b.confidence
            .partial_cmp(&a.confidence)
            .expect("confidence is finite")
            .then(b.support.partial_cmp(&a.support).expect("support is finite"))
            .then_with(|| a.antecedent.cmp(&b.antecedent))
            .then_with(|| a.consequent.cmp(&b.consequent))
    });
    rules
}

/// The frequent itemsets behind [`mine_rules`], with their basket counts,
/// sorted ascending. Exposed so rule mining can be audited against the raw
/// support structure.
pub fn frequent_itemsets<F: Real>(
    g: &CommercialGraph<F>,
    params: &MiningParams,
) -> Vec<(Vec<ItemIdx>, usize)> {
    let baskets = buyer_baskets(g);
    if baskets.is_empty() {
        return Vec::new();
    }
    let mut sets: Vec<(Vec<ItemIdx>, usize)> = frequent_counts(&baskets, params).into_iter().collect();
    sets.sort();
    sets
}

/// Apriori core: counts of every frequent itemset over the given baskets.
fn frequent_counts(baskets: &[Vec<ItemIdx>], params: &MiningParams) -> HashMap<Vec<ItemIdx>, usize> {
    let n = baskets.len();
    let frequent = |count: usize| {
        count >= params.min_count && count as f64 / n as f64 >= params.min_support
    };

    // Level 1: frequent single items.
    let mut counts: HashMap<Vec<ItemIdx>, usize> = HashMap::new();
    let mut singles: HashMap<ItemIdx, usize> = HashMap::new();
    for basket in baskets {
        for &item in basket {
            *singles.entry(item).or_insert(0) += 1;
        }
    }
    let mut level: Vec<Vec<ItemIdx>> = singles
        .iter()
        .filter(|&(_, &c)| frequent(c))
        .map(|(&item, _)| vec![item])
        .collect();
    level.sort();
    for set in &level {
        counts.insert(set.clone(), singles[&set[0]]);
    }

    // Level k: join pairs sharing a (k-1)-prefix, prune by the apriori
    // property, then count against the baskets.
    while !level.is_empty() {
        let mut next = Vec::new();
        for i in 0..level.len() {
            for j in i + 1..level.len() {
                let (a, b) = (&level[i], &level[j]);
                let k = a.len();
                if a[..k - 1] != b[..k - 1] {
                    // `level` is sorted, so no later j can share the prefix.
                    break;
                }
                let mut candidate = a.clone();
                candidate.push(b[k - 1]);
                let prunable = (0..candidate.len()).any(|drop| {
                    let mut subset = candidate.clone();
                    subset.remove(drop);
                    !counts.contains_key(&subset)
                });
                if prunable {
                    continue;
                }
                let count = baskets.iter().filter(|b| contains_sorted(b, &candidate)).count();
                if frequent(count) {
                    counts.insert(candidate.clone(), count);
                    next.push(candidate);
                }
            }
        }
        next.sort();
        level = next;
    }
    counts
}

/// Both slices ascending: is `needle` a subset of `haystack`?
fn contains_sorted(haystack: &[ItemIdx], needle: &[ItemIdx]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// The strongest applicable rule: antecedent inside the buyer's history,
/// consequent inside the seller's inventory. Precedence: highest
/// confidence, then highest support, then the smaller consequent id.
pub fn applicable_rule<'r>(
    rules: &'r [AssociationRule],
    history: &BTreeSet<&str>,
    inventory: &BTreeSet<&str>,
) -> Option<&'r AssociationRule> {
    rules
        .iter()
        .filter(|r| {
            inventory.contains(r.consequent.as_str())
                && r.antecedent.iter().all(|a| history.contains(a.as_str()))
        })
        .min_by(|a, b| {
            b.confidence
                .partial_cmp(&a.confidence)
                .expect("confidence is finite")
                .then(b.support.partial_cmp(&a.support).expect("support is finite"))
                .then_with(|| a.consequent.cmp(&b.consequent))
        })
}

/// Rule-guided choice from an inventory, falling back to a uniform draw
/// seeded with `rng_seed` when no rule applies. `None` iff the inventory is
/// empty. Callers wanting the per-seller seed policy pass a seed already
/// mixed with the seller id (see [`build_recommendations`]).
pub fn select_by_rules(
    rules: &[AssociationRule],
    history: &BTreeSet<&str>,
    inventory: &BTreeSet<&str>,
    rng_seed: u64,
) -> Option<(String, SelectionMethod)> {
    if inventory.is_empty() {
        return None;
    }
    if let Some(rule) = applicable_rule(rules, history, inventory) {
        return Some((rule.consequent.clone(), SelectionMethod::Rule));
    }
    let sorted: Vec<&str> = inventory.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Some((sorted[rng.random_range(0..sorted.len())].to_string(), SelectionMethod::RuleFallback))
}

/// One line of the final list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationEntry {
    pub seller: String,
    pub item: String,
    /// Fused score of the seller, rounded to 6 decimals for stable output.
    pub total_score: f64,
    pub method: SelectionMethod,
}

/// The final per-user recommendation: at most one item per seller, sellers
/// in descending score order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub target: String,
    pub entries: Vec<RecommendationEntry>,
    /// Ranked sellers dropped for having an empty inventory.
    pub skipped_sellers: usize,
    /// True when the entries came from the cold-start fallback rather than
    /// the scored pipeline.
    pub cold_start: bool,
}

/// Pairs each ranked seller with one item. Random draws derive their seed
/// from `(seed, seller id)`, so the rules method with no applicable rules
/// reproduces the random method's choices exactly.
pub fn build_recommendations<F: Real>(
    g: &CommercialGraph<F>,
    ranked: &[ScoredCandidate<F>],
    target: UserIdx,
    method: ItemMethod,
    rules: &[AssociationRule],
    seed: u64,
) -> Recommendation {
    let scored: Vec<(UserIdx, f64)> =
        ranked.iter().map(|c| (c.seller, c.total.to_f64().unwrap_or(f64::NAN))).collect();
    let (entries, skipped) = assemble(g, &scored, Some(target), method, rules, seed);
    Recommendation {
        target: g.user_name(target).to_string(),
        entries,
        skipped_sellers: skipped,
        cold_start: false,
    }
}

/// The cold-start variant of [`build_recommendations`]: sellers come from
/// [`crate::scoring::cold_start_candidates`] and carry no meaningful score
/// (reported as 0). The target may be absent from the graph entirely.
pub fn build_cold_recommendations<F: Real>(
    g: &CommercialGraph<F>,
    sellers: &[UserIdx],
    target: &str,
    method: ItemMethod,
    rules: &[AssociationRule],
    seed: u64,
) -> Recommendation {
    let scored: Vec<(UserIdx, f64)> = sellers.iter().map(|&v| (v, 0.0)).collect();
    let (entries, skipped) = assemble(g, &scored, g.user_idx(target), method, rules, seed);
    Recommendation {
        target: target.to_string(),
        entries,
        skipped_sellers: skipped,
        cold_start: true,
    }
}

fn assemble<F: Real>(
    g: &CommercialGraph<F>,
    scored: &[(UserIdx, f64)],
    target: Option<UserIdx>,
    method: ItemMethod,
    rules: &[AssociationRule],
    seed: u64,
) -> (Vec<RecommendationEntry>, usize) {
    let history: BTreeSet<&str> = target
        .map(|u| g.purchases(u).iter().map(|&e| g.item_name(g.edge(e).item)).collect())
        .unwrap_or_default();
    let mut entries = Vec::new();
    let mut skipped = 0usize;
    for &(v, total) in scored {
        let inventory = seller_inventory(g, v);
        if inventory.is_empty() {
            skipped += 1;
            continue;
        }
        let (item, tag) = match method {
            ItemMethod::BestSelling => (
                select_best_selling(g, v).expect("inventory checked nonempty"),
                SelectionMethod::BestSelling,
            ),
            ItemMethod::Random => (
                select_random(g, v, seed).expect("inventory checked nonempty"),
                SelectionMethod::Random,
            ),
            ItemMethod::Rules => {
                let names: BTreeSet<&str> =
                    inventory.iter().map(|&i| g.item_name(i)).collect();
                let sub_seed = seeds::mix(seed, &[seeds::label(g.user_name(v))]);
                let (name, tag) = select_by_rules(rules, &history, &names, sub_seed)
                    .expect("inventory checked nonempty");
                let idx = inventory
                    .iter()
                    .copied()
                    .find(|&i| g.item_name(i) == name)
                    .expect("selected item comes from the inventory");
                (idx, tag)
            }
        };
        entries.push(RecommendationEntry {
            seller: g.user_name(v).to_string(),
            item: g.item_name(item).to_string(),
            total_score: round6(total),
            method: tag,
        });
    }
    (entries, skipped)
}
