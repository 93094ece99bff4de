//! Shared fixtures for the unit tests.

use crate::data::{RatingVector, Transaction};

/// A minimal valid transaction: price 10, quantity 1, mid-scale ratings.
pub(crate) fn txn(id: &str, buyer: &str, seller: &str, item: &str, cat: &str) -> Transaction {
    txn_full(id, buyer, seller, item, cat, 10.0, 1, [0.5; 4])
}

/// A fully specified transaction (ratings already normalized to [-1, 1]).
#[allow(clippy::too_many_arguments)]
pub(crate) fn txn_full(
    id: &str,
    buyer: &str,
    seller: &str,
    item: &str,
    cat: &str,
    price: f64,
    quantity: u32,
    ratings: [f64; 4],
) -> Transaction {
    Transaction {
        id: id.to_string(),
        buyer: buyer.to_string(),
        seller: seller.to_string(),
        item: item.to_string(),
        category: cat.to_string(),
        price,
        quantity,
        ratings: RatingVector::new(ratings).expect("test ratings in range"),
    }
}
