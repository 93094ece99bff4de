//! Candidate-seller scoring and ranking.
//!
//! Each candidate seller v is scored against the target user u on three
//! axes, all computed from the immutable training graph:
//!
//! * **category score** — how much u's and v's traded categories overlap,
//!   weighted by how much money moved in each category and by how common the
//!   category is in each user's neighborhood (a weighted Jaccard variant);
//! * **reputation score** — v's sales history averaged from u's point of
//!   view: per-sale mean rating × monetary volume × how much u's
//!   neighborhood cares about that sale's category;
//! * **rating score** — how similar v's received-rating profile is to the
//!   profiles of the sellers u already buys from (mean cosine similarity).
//!
//! The three raw scores live on incompatible scales, so they are min-max
//! normalized across the candidate set and fused by a convex combination
//! `total = α·category + β·rating + γ·reputation` with α+β+γ = 1. Users
//! without usable candidates fall back to the network's highest-volume
//! sellers (cold start).

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::data::RATING_COMPONENTS;
use crate::error::{Error, Result};
use crate::graph::{CatIdx, CommercialGraph, UserIdx};
use crate::num::{real, real_of_usize, Real};
use crate::simrank::{candidate_sellers, SimilarityTable};

/// Per-user summary of traded categories: the money-weighted importance of
/// each category in `A(u)`, the set of categories the user traded in.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryProfile<F: Real = f64> {
    pub owner: UserIdx,
    /// Category → weight: local importance × Σ price·quantity over the
    /// owner's trades in that category. Defined exactly on `A(owner)`.
    pub weights: BTreeMap<CatIdx, F>,
    /// Category → neighborhood importance, each ≥ 1.
    pub local_importance: BTreeMap<CatIdx, F>,
}

/// How prominent category `a` is among `u`'s trading partners: the number of
/// neighbors that traded in `a` too, floored at 1.
///
/// The floor covers both directions of "no signal": a category `u` never
/// traded (the count would be meaningless) and a neighborhood with no
/// overlap. Keeping the floor at 1 stops the downstream products from
/// zeroing out informative price terms.
pub fn local_category_importance<F: Real>(g: &CommercialGraph<F>, u: UserIdx, a: CatIdx) -> F {
    if !g.traded_in(u, a) {
        return F::one();
    }
    let count = g.neighbors(u).iter().filter(|&&v| g.traded_in(v, a)).count();
    real_of_usize(count.max(1))
}

/// Money-weighted importance of category `a` for user `u`: local importance
/// times the summed price·quantity of `u`'s trades (either side) in `a`.
///
/// Only meaningful for `a ∈ A(u)`; asking about a category `u` never traded
/// is a caller bug (the result would be a bare floor value).
pub fn category_weight<F: Real>(g: &CommercialGraph<F>, u: UserIdx, a: CatIdx) -> F {
    debug_assert!(g.traded_in(u, a), "category weight queried outside A(u)");
    let turnover: F = g
        .purchases(u)
        .iter()
        .chain(g.sales(u))
        .map(|&e| g.edge(e))
        .filter(|e| e.category == a)
        .map(|e| e.volume())
        .sum();
    local_category_importance(g, u, a) * turnover
}

impl<F: Real> CategoryProfile<F> {
    pub fn build(g: &CommercialGraph<F>, u: UserIdx) -> Self {
        let mut weights = BTreeMap::new();
        let mut local_importance = BTreeMap::new();
        for &a in g.categories_of(u) {
            weights.insert(a, category_weight(g, u, a));
            local_importance.insert(a, local_category_importance(g, u, a));
        }
        CategoryProfile { owner: u, weights, local_importance }
    }
}

/// Category overlap of two users in `[0, 1]`: shared-category weights from
/// both sides over all weights from both sides. 1 when the category sets
/// coincide, 0 when they are disjoint or both profiles are empty.
pub fn category_score<F: Real>(a: &CategoryProfile<F>, b: &CategoryProfile<F>) -> F {
    let shared: F = a
        .weights
        .iter()
        .filter(|(c, _)| b.weights.contains_key(c))
        .map(|(c, w)| *w + b.weights[c])
        .sum();
    let total = a.weights.values().copied().sum::<F>() + b.weights.values().copied().sum::<F>();
    if total > F::zero() {
        shared / total
    } else {
        F::zero()
    }
}

/// Seller `v`'s reputation as seen by `u`: the mean over `v`'s sales of
/// (mean rating of the sale) × (price·quantity) × (importance of the sale's
/// category in `u`'s neighborhood).
///
/// Ratings live in `[-1, 1]`, so bad sales subtract. Errors if `v` never
/// sold anything — candidate generation guarantees at least one sale, so
/// hitting this signals a bug upstream.
pub fn reputation_score<F: Real>(g: &CommercialGraph<F>, u: UserIdx, v: UserIdx) -> Result<F> {
    let sales = g.sales(v);
    if sales.is_empty() {
        return Err(Error::NoSales(g.user_name(v).to_string()));
    }
    let sum: F = sales
        .iter()
        .map(|&e| {
            let edge = g.edge(e);
            edge.ratings.mean() * edge.volume() * local_category_importance(g, u, edge.category)
        })
        .sum();
    Ok(sum / real_of_usize(sales.len()))
}

/// Component-wise mean of the ratings `x` received across all sales;
/// `None` for users who never sold.
pub fn mean_received_ratings<F: Real>(
    g: &CommercialGraph<F>,
    x: UserIdx,
) -> Option<[F; RATING_COMPONENTS]> {
    let sales = g.sales(x);
    if sales.is_empty() {
        return None;
    }
    let mut acc = [F::zero(); RATING_COMPONENTS];
    for &e in sales {
        for (slot, c) in acc.iter_mut().zip(g.edge(e).ratings.components()) {
            *slot += c;
        }
    }
    let n = real_of_usize(sales.len());
    Some(acc.map(|s| s / n))
}

fn cosine<F: Real>(a: &[F; RATING_COMPONENTS], b: &[F; RATING_COMPONENTS]) -> F {
    let dot: F = a.iter().zip(b).map(|(x, y)| *x * *y).sum();
    let na = a.iter().map(|x| *x * *x).sum::<F>().sqrt();
    let nb = b.iter().map(|x| *x * *x).sum::<F>().sqrt();
    if na > F::zero() && nb > F::zero() {
        dot / (na * nb)
    } else {
        F::zero()
    }
}

/// How much seller `v` "rates like" the sellers `u` already buys from: the
/// mean cosine similarity between `v`'s average received-rating vector and
/// each prior seller's. Falls to 0 when `u` has no purchase history or when
/// a rating vector has zero norm; result lies in `[-1, 1]`.
pub fn rating_score<F: Real>(g: &CommercialGraph<F>, u: UserIdx, v: UserIdx) -> F {
    let priors = g.sellers_of(u);
    if priors.is_empty() {
        return F::zero();
    }
    let zero = [F::zero(); RATING_COMPONENTS];
    let mv = mean_received_ratings(g, v).unwrap_or(zero);
    let sum: F = priors
        .iter()
        .map(|&w| cosine(&mv, &mean_received_ratings(g, w).unwrap_or(zero)))
        .sum();
    sum / real_of_usize(priors.len())
}

/// One candidate seller with raw scores, their normalized forms, and the
/// fused total.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate<F: Real = f64> {
    pub seller: UserIdx,
    pub category_score: F,
    pub reputation_score: F,
    pub rating_score: F,
    /// Min-max normalized scores, each in `[0, 1]`.
    pub norm_category: F,
    pub norm_reputation: F,
    pub norm_rating: F,
    /// `α·norm_category + β·norm_rating + γ·norm_reputation`.
    pub total: F,
}

impl<F: Real> ScoredCandidate<F> {
    /// A candidate carrying raw scores only; normalization and fusion fill
    /// in the rest.
    pub fn raw(seller: UserIdx, category: F, reputation: F, rating: F) -> Self {
        ScoredCandidate {
            seller,
            category_score: category,
            reputation_score: reputation,
            rating_score: rating,
            norm_category: F::zero(),
            norm_reputation: F::zero(),
            norm_rating: F::zero(),
            total: F::zero(),
        }
    }
}

/// Min-max normalizes each of the three raw scores across the candidate
/// set, independently. A degenerate range (all values equal, including the
/// single-candidate case) maps to the neutral 0.5.
pub fn normalize_scores<F: Real>(candidates: &mut [ScoredCandidate<F>]) {
    fn min_max<F: Real>(values: impl Iterator<Item = F>) -> (F, F) {
        values.fold((F::infinity(), F::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
    fn rescale<F: Real>(v: F, lo: F, hi: F) -> F {
        if hi - lo > F::zero() {
            (v - lo) / (hi - lo)
        } else {
            real(0.5)
        }
    }

    let (cat_lo, cat_hi) = min_max(candidates.iter().map(|c| c.category_score));
    let (rep_lo, rep_hi) = min_max(candidates.iter().map(|c| c.reputation_score));
    let (rat_lo, rat_hi) = min_max(candidates.iter().map(|c| c.rating_score));
    for c in candidates.iter_mut() {
        c.norm_category = rescale(c.category_score, cat_lo, cat_hi);
        c.norm_reputation = rescale(c.reputation_score, rep_lo, rep_hi);
        c.norm_rating = rescale(c.rating_score, rat_lo, rat_hi);
    }
}

/// Convex fusion coefficients: α weighs category, β rating, γ reputation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionWeights<F: Real = f64> {
    alpha: F,
    beta: F,
    gamma: F,
}

impl<F: Real> Default for FusionWeights<F> {
    fn default() -> Self {
        let third = F::one() / real(3.0);
        FusionWeights { alpha: third, beta: third, gamma: third }
    }
}

impl<F: Real> FusionWeights<F> {
    /// Validates each coefficient in `[0, 1]` and the sum at 1, within 1e-9
    /// (widened to a few ulps for scalars coarser than `f64`).
    pub fn new(alpha: F, beta: F, gamma: F) -> Result<Self> {
        let ok_range = |x: F| x >= F::zero() && x <= F::one();
        if !(ok_range(alpha) && ok_range(beta) && ok_range(gamma)) {
            return Err(Error::Config(format!(
                "fusion coefficients must lie in [0,1], got alpha={alpha} beta={beta} gamma={gamma}"
            )));
        }
        let tolerance = real::<F>(1e-9).max(F::epsilon() * real(4.0));
        if ((alpha + beta + gamma) - F::one()).abs() > tolerance {
            return Err(Error::Config(format!(
                "fusion coefficients must sum to 1, got alpha={alpha} beta={beta} gamma={gamma}"
            )));
        }
        Ok(FusionWeights { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn beta(&self) -> F {
        self.beta
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }
}

/// The fused total of one normalized candidate.
pub fn total_score<F: Real>(c: &ScoredCandidate<F>, w: &FusionWeights<F>) -> F {
    w.alpha * c.norm_category + w.beta * c.norm_rating + w.gamma * c.norm_reputation
}

/// Runs stages 1–5 for one target: candidate generation from the similarity
/// table's top-`n` lookalikes, raw scoring, normalization, fusion, and the
/// final descending sort (ties toward the smaller seller id), truncated to
/// `k` entries. An empty result means the caller should consider the
/// cold-start fallback.
pub fn rank_candidates<F: Real>(
    g: &CommercialGraph<F>,
    table: &SimilarityTable<F>,
    target: UserIdx,
    n: usize,
    weights: &FusionWeights<F>,
    k: usize,
) -> Vec<ScoredCandidate<F>> {
    let similar = table.top_n(target, n);
    let cset = candidate_sellers(g, target, &similar);
    if cset.candidates.is_empty() {
        return Vec::new();
    }
    let target_profile = CategoryProfile::build(g, target);
    let mut scored: Vec<ScoredCandidate<F>> = cset
        .candidates
        .iter()
        .map(|&v| {
            let cat = category_score(&target_profile, &CategoryProfile::build(g, v));
            let rep = reputation_score(g, target, v)
                .expect("candidate sellers have at least one sale by construction");
            let rat = rating_score(g, target, v);
            ScoredCandidate::raw(v, cat, rep, rat)
        })
        .collect();
    normalize_scores(&mut scored);
    for c in scored.iter_mut() {
        c.total = total_score(c, weights);
    }
    scored.sort_by(|a, b| {
        b.total.partial_cmp(&a.total).expect("totals are finite").then(a.seller.cmp(&b.seller))
    });
    scored.truncate(k);
    scored
}

/// Fallback for targets without candidates: the `k` busiest sellers by
/// sales count, excluding the target and anyone the target already buys
/// from. `target = None` covers users not present in the graph at all.
pub fn cold_start_candidates<F: Real>(
    g: &CommercialGraph<F>,
    target: Option<UserIdx>,
    k: usize,
) -> Vec<UserIdx> {
    let excluded: BTreeSet<UserIdx> = match target {
        Some(u) => g.sellers_of(u).iter().copied().chain([u]).collect(),
        None => BTreeSet::new(),
    };
    let mut sellers: Vec<UserIdx> = g
        .users()
        .filter(|u| g.sales_count(*u) > 0 && !excluded.contains(u))
        .collect();
    sellers.sort_by(|a, b| g.sales_count(*b).cmp(&g.sales_count(*a)).then(a.cmp(b)));
    sellers.truncate(k);
    sellers
}
