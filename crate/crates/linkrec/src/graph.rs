//! The commercial network: a directed multigraph over marketplace users.
//!
//! Every transaction contributes one edge from seller to buyer, matching the
//! flow of goods; repeat purchases keep their own edges. A node's in-edges
//! are therefore its purchases and its out-edges its sales, and one user can
//! be both buyer and seller.
//!
//! Identifiers are interned into dense indices, sorted, so that index order
//! equals lexicographic id order — every "ties broken by ascending id" rule
//! downstream reduces to an ordinary index comparison. All derived views
//! (per-user purchase/sale lists, distinct neighbor sets, traded categories)
//! are built once; the graph is immutable and cheap to share across threads.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::data::{RatingVector, Transaction};
use crate::num::Real;

/// Dense index of an interned user id.
pub type UserIdx = u32;
/// Dense index of an interned item id.
pub type ItemIdx = u32;
/// Dense index of an interned category label.
pub type CatIdx = u32;

/// One transaction re-expressed over interned indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord<F: Real = f64> {
    pub buyer: UserIdx,
    pub seller: UserIdx,
    pub item: ItemIdx,
    pub category: CatIdx,
    pub price: F,
    pub quantity: u32,
    pub ratings: RatingVector<F>,
}

impl<F: Real> EdgeRecord<F> {
    /// Price times quantity: the monetary weight of the sale.
    pub fn volume(&self) -> F {
        self.price * F::from_u32(self.quantity).expect("u32 fits the working scalar")
    }
}

/// Immutable transaction graph with precomputed per-user views.
#[derive(Debug, Clone)]
pub struct CommercialGraph<F: Real = f64> {
    users: Vec<String>,
    items: Vec<String>,
    categories: Vec<String>,
    user_lookup: HashMap<String, UserIdx>,
    edges: Vec<EdgeRecord<F>>,
    txn_ids: Vec<String>,
    /// Edge indices of each user's purchases, in input order.
    purchases: Vec<Vec<u32>>,
    /// Edge indices of each user's sales, in input order.
    sales: Vec<Vec<u32>>,
    /// Distinct users each user bought from, ascending.
    sellers_of: Vec<Vec<UserIdx>>,
    /// Distinct users each user sold to, ascending.
    buyers_of: Vec<Vec<UserIdx>>,
    /// Distinct adjacent users regardless of direction, ascending.
    neighbors_of: Vec<Vec<UserIdx>>,
    /// Distinct categories each user traded in, as buyer or seller, ascending.
    categories_of: Vec<Vec<CatIdx>>,
}

/// Shape summary of a graph, as printed by the `stats` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub users: usize,
    pub transactions: usize,
    /// Distinct (seller, buyer) pairs, i.e. edges of the simple digraph.
    pub distinct_pairs: usize,
    /// `distinct_pairs` over the `users · (users − 1)` possible ordered pairs.
    pub density: f64,
    /// Mean number of distinct neighbors per user, direction ignored.
    pub avg_degree: f64,
    /// Largest number of distinct sellers any user bought from.
    pub max_in_degree: usize,
    /// Largest number of distinct buyers any user sold to.
    pub max_out_degree: usize,
}

impl<F: Real> CommercialGraph<F> {
    /// Builds the graph and all derived views from a transaction list.
    ///
    /// Interning sorts ids first, so two lists with the same records produce
    /// identical indices regardless of record order.
    pub fn build(transactions: &[Transaction<F>]) -> Self {
        let mut user_set = BTreeSet::new();
        let mut item_set = BTreeSet::new();
        let mut category_set = BTreeSet::new();
        for t in transactions {
            user_set.insert(t.buyer.as_str());
            user_set.insert(t.seller.as_str());
            item_set.insert(t.item.as_str());
            category_set.insert(t.category.as_str());
        }
        let users: Vec<String> = user_set.into_iter().map(str::to_string).collect();
        let items: Vec<String> = item_set.into_iter().map(str::to_string).collect();
        let categories: Vec<String> = category_set.into_iter().map(str::to_string).collect();

        let user_lookup: HashMap<String, UserIdx> =
            users.iter().enumerate().map(|(i, u)| (u.clone(), i as UserIdx)).collect();
        let item_lookup: HashMap<&str, ItemIdx> =
            items.iter().enumerate().map(|(i, s)| (s.as_str(), i as ItemIdx)).collect();
        let category_lookup: HashMap<&str, CatIdx> =
            categories.iter().enumerate().map(|(i, s)| (s.as_str(), i as CatIdx)).collect();

        let n = users.len();
        let mut edges = Vec::with_capacity(transactions.len());
        let mut txn_ids = Vec::with_capacity(transactions.len());
        let mut purchases = vec![Vec::new(); n];
        let mut sales = vec![Vec::new(); n];
        let mut seller_sets: Vec<BTreeSet<UserIdx>> = vec![BTreeSet::new(); n];
        let mut buyer_sets: Vec<BTreeSet<UserIdx>> = vec![BTreeSet::new(); n];
        let mut category_sets: Vec<BTreeSet<CatIdx>> = vec![BTreeSet::new(); n];

        for t in transactions {
            let buyer = user_lookup[t.buyer.as_str()];
            let seller = user_lookup[t.seller.as_str()];
            let edge_idx = edges.len() as u32;
            edges.push(EdgeRecord {
                buyer,
                seller,
                item: item_lookup[t.item.as_str()],
                category: category_lookup[t.category.as_str()],
                price: t.price,
                quantity: t.quantity,
                ratings: t.ratings,
            });
            txn_ids.push(t.id.clone());
            purchases[buyer as usize].push(edge_idx);
            sales[seller as usize].push(edge_idx);
            seller_sets[buyer as usize].insert(seller);
            buyer_sets[seller as usize].insert(buyer);
            let cat = category_lookup[t.category.as_str()];
            category_sets[buyer as usize].insert(cat);
            category_sets[seller as usize].insert(cat);
        }

        let sellers_of: Vec<Vec<UserIdx>> =
            seller_sets.iter().map(|s| s.iter().copied().collect()).collect();
        let buyers_of: Vec<Vec<UserIdx>> =
            buyer_sets.iter().map(|s| s.iter().copied().collect()).collect();
        let neighbors_of: Vec<Vec<UserIdx>> = (0..n)
            .map(|u| {
                seller_sets[u].union(&buyer_sets[u]).copied().collect()
            })
            .collect();
        let categories_of: Vec<Vec<CatIdx>> =
            category_sets.into_iter().map(|s| s.into_iter().collect()).collect();

        CommercialGraph {
            users,
            items,
            categories,
            user_lookup,
            edges,
            txn_ids,
            purchases,
            sales,
            sellers_of,
            buyers_of,
            neighbors_of,
            categories_of,
        }
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn transaction_count(&self) -> usize {
        self.edges.len()
    }

    pub fn user_idx(&self, id: &str) -> Option<UserIdx> {
        self.user_lookup.get(id).copied()
    }

    pub fn user_name(&self, u: UserIdx) -> &str {
        &self.users[u as usize]
    }

    pub fn item_name(&self, i: ItemIdx) -> &str {
        &self.items[i as usize]
    }

    pub fn category_name(&self, c: CatIdx) -> &str {
        &self.categories[c as usize]
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    /// All user indices, ascending (= lexicographic id order).
    pub fn users(&self) -> std::ops::Range<UserIdx> {
        0..self.users.len() as UserIdx
    }

    pub fn edge(&self, e: u32) -> &EdgeRecord<F> {
        &self.edges[e as usize]
    }

    pub fn txn_id(&self, e: u32) -> &str {
        &self.txn_ids[e as usize]
    }

    /// Edge indices of `u`'s purchases, in input order.
    pub fn purchases(&self, u: UserIdx) -> &[u32] {
        &self.purchases[u as usize]
    }

    /// Edge indices of `u`'s sales, in input order.
    pub fn sales(&self, u: UserIdx) -> &[u32] {
        &self.sales[u as usize]
    }

    /// Number of transactions `u` completed as the seller.
    pub fn sales_count(&self, u: UserIdx) -> usize {
        self.sales[u as usize].len()
    }

    /// Distinct users `u` bought from, ascending.
    pub fn sellers_of(&self, u: UserIdx) -> &[UserIdx] {
        &self.sellers_of[u as usize]
    }

    /// Distinct users `u` sold to, ascending.
    pub fn buyers_of(&self, u: UserIdx) -> &[UserIdx] {
        &self.buyers_of[u as usize]
    }

    /// Distinct users adjacent to `u` in either direction, ascending.
    pub fn neighbors(&self, u: UserIdx) -> &[UserIdx] {
        &self.neighbors_of[u as usize]
    }

    /// Distinct categories `u` traded in, as buyer or seller, ascending.
    pub fn categories_of(&self, u: UserIdx) -> &[CatIdx] {
        &self.categories_of[u as usize]
    }

    /// Whether `u` ever traded in category `c`, on either side.
    pub fn traded_in(&self, u: UserIdx, c: CatIdx) -> bool {
        self.categories_of[u as usize].binary_search(&c).is_ok()
    }

    pub fn stats(&self) -> GraphStats {
        let users = self.users.len();
        let mut pairs = BTreeSet::new();
        for e in &self.edges {
            pairs.insert((e.seller, e.buyer));
        }
        let distinct_pairs = pairs.len();
        let ordered_slots = users.saturating_mul(users.saturating_sub(1));
        let density =
            if ordered_slots == 0 { 0.0 } else { distinct_pairs as f64 / ordered_slots as f64 };
        let degree_sum: usize = self.neighbors_of.iter().map(Vec::len).sum();
        let avg_degree = if users == 0 { 0.0 } else { degree_sum as f64 / users as f64 };
        GraphStats {
            users,
            transactions: self.edges.len(),
            distinct_pairs,
            density,
            avg_degree,
            max_in_degree: self.sellers_of.iter().map(Vec::len).max().unwrap_or(0),
            max_out_degree: self.buyers_of.iter().map(Vec::len).max().unwrap_or(0),
        }
    }
}
