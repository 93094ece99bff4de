//! Transaction records, rating normalization, and CSV ingestion.
//!
//! A transaction is one completed purchase: buyer, seller, one item with a
//! category, price, quantity, and the buyer's four-component rating of the
//! seller (overall, quality, delivery, support). Ratings arrive on whatever
//! scale the marketplace uses (stars, 0–10, …) and are normalized to
//! `[-1, 1]` at the door so every downstream formula sees one range.
//!
//! Ingestion is strict about file shape and lenient about individual rows:
//! a missing or misnamed header aborts, while a malformed row is skipped and
//! reported with its line number so a handful of bad records cannot poison a
//! large import.

use std::fmt::Write as _;
use std::fs::File;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real, Real};

/// Number of rating components carried by every transaction.
pub const RATING_COMPONENTS: usize = 4;

/// Column order of the ingest CSV format.
pub const CSV_COLUMNS: [&str; 11] = [
    "txn_id",
    "buyer_id",
    "seller_id",
    "item_id",
    "category",
    "price",
    "quantity",
    "rating_overall",
    "rating_quality",
    "rating_delivery",
    "rating_support",
];

/// Bounds of the raw rating scale, e.g. 1–5 stars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingScale {
    min: f64,
    max: f64,
}

impl Default for RatingScale {
    /// Five-star scale.
    fn default() -> Self {
        RatingScale { min: 1.0, max: 5.0 }
    }
}

impl RatingScale {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || min >= max {
            return Err(Error::Config(format!(
                "rating scale must satisfy min < max, got [{min}, {max}]"
            )));
        }
        Ok(RatingScale { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Maps a raw rating onto `[-1, 1]`; `None` if it falls outside the scale.
    pub fn normalize(&self, raw: f64) -> Option<f64> {
        if raw >= self.min && raw <= self.max {
            Some(2.0 * (raw - self.min) / (self.max - self.min) - 1.0)
        } else {
            None
        }
    }

    /// Inverse of [`RatingScale::normalize`].
    pub fn denormalize(&self, normalized: f64) -> f64 {
        self.min + (normalized + 1.0) * (self.max - self.min) / 2.0
    }
}

/// One normalized rating: overall, quality, delivery, support, each in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatingVector<F: Real = f64>(pub(crate) [F; RATING_COMPONENTS]);

impl<F: Real> RatingVector<F> {
    /// Builds a rating vector, refusing components outside `[-1, 1]`.
    pub fn new(components: [F; RATING_COMPONENTS]) -> Option<Self> {
        let one = F::one();
        if components.iter().all(|c| *c >= -one && *c <= one) {
            Some(RatingVector(components))
        } else {
            None
        }
    }

    pub fn components(&self) -> [F; RATING_COMPONENTS] {
        self.0
    }

    pub fn overall(&self) -> F {
        self.0[0]
    }

    pub fn quality(&self) -> F {
        self.0[1]
    }

    pub fn delivery(&self) -> F {
        self.0[2]
    }

    pub fn support(&self) -> F {
        self.0[3]
    }

    /// Mean of the four components; the scalar seller rating of one sale.
    pub fn mean(&self) -> F {
        self.0.iter().copied().sum::<F>() / real(4.0)
    }
}

/// One completed purchase, with ratings already normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction<F: Real = f64> {
    pub id: String,
    pub buyer: String,
    pub seller: String,
    pub item: String,
    pub category: String,
    pub price: F,
    pub quantity: u32,
    pub ratings: RatingVector<F>,
}

impl<F: Real> Transaction<F> {
    /// Checks the record-level invariants ingestion guarantees: no
    /// self-dealing, finite non-negative price, at least one unit.
    pub fn validate(&self) -> Result<()> {
        if self.buyer == self.seller {
            return Err(Error::Schema(format!(
                "transaction {:?}: buyer and seller are both {:?}",
                self.id, self.buyer
            )));
        }
        if !(self.price >= F::zero() && self.price.is_finite()) {
            return Err(Error::Schema(format!(
                "transaction {:?}: price must be finite and non-negative",
                self.id
            )));
        }
        if self.quantity == 0 {
            return Err(Error::Schema(format!(
                "transaction {:?}: quantity must be at least 1",
                self.id
            )));
        }
        Ok(())
    }

    /// Price times quantity: the monetary weight of the sale.
    pub fn volume(&self) -> F {
        self.price * real_of_u32(self.quantity)
    }
}

fn real_of_u32<F: Real>(n: u32) -> F {
    F::from_u32(n).expect("u32 fits the working scalar")
}

/// A row skipped during ingestion, with enough context to find and fix it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowRejection {
    /// 1-based line in the source file (the header is line 1).
    pub line: u64,
    /// Offending column, when the problem is attributable to one.
    pub column: Option<String>,
    pub reason: String,
}

/// Outcome of an ingestion pass: the rows that parsed, and the ones that did not.
#[derive(Debug)]
pub struct Ingest<F: Real = f64> {
    pub transactions: Vec<Transaction<F>>,
    pub rejected: Vec<RowRejection>,
}

/// Reads a transaction CSV from disk. See [`ingest_reader`] for the format.
pub fn ingest_csv<F: Real>(path: &Path, scale: RatingScale) -> Result<Ingest<F>> {
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    ingest_reader(file, scale, &path.display().to_string())
}

/// Reads transactions from any CSV source.
///
/// The header must match [`CSV_COLUMNS`] exactly, except that the `quantity`
/// column may be absent entirely (then every quantity is 1). A present but
/// blank quantity field also defaults to 1. Rows that fail to parse — bad
/// numbers, ratings off the scale, buyer equal to seller, wrong field count —
/// are collected into [`Ingest::rejected`] instead of aborting the run.
pub fn ingest_reader<F: Real, R: io::Read>(
    reader: R,
    scale: RatingScale,
    origin: &str,
) -> Result<Ingest<F>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| csv_error_to_fatal(e, origin))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    let with_quantity: Vec<&str> = CSV_COLUMNS.to_vec();
    let without_quantity: Vec<&str> =
        CSV_COLUMNS.iter().copied().filter(|c| *c != "quantity").collect();
    let has_quantity = if headers == with_quantity {
        true
    } else if headers == without_quantity {
        false
    } else {
        return Err(Error::Schema(format!(
            "{origin}: expected header {:?} (quantity optional), got {:?}",
            with_quantity.join(","),
            headers.join(",")
        )));
    };

    let mut transactions = Vec::new();
    let mut rejected = Vec::new();
    let mut records = rdr.into_records();
    loop {
        // Track the line ourselves as well: a record that fails to parse may
        // not carry a usable position.
        let line_hint = records.reader().position().line();
        let record = match records.next() {
            None => break,
            Some(Ok(r)) => r,
            Some(Err(e)) => {
                if e.is_io_error() {
                    return Err(csv_error_to_fatal(e, origin));
                }
                rejected.push(RowRejection {
                    line: error_line(&e).unwrap_or(line_hint),
                    column: None,
                    reason: format!("unreadable row: {e}"),
                });
                continue;
            }
        };
        let line = record.position().map_or(line_hint, |p| p.line());
        match parse_record(&record, has_quantity, scale) {
            Ok(txn) => transactions.push(txn),
            Err((column, reason)) => rejected.push(RowRejection { line, column, reason }),
        }
    }

    Ok(Ingest { transactions, rejected })
}

fn csv_error_to_fatal(e: csv::Error, origin: &str) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io_err) => Error::io(origin, io_err),
        other => Error::Schema(format!("{origin}: {other:?}")),
    }
}

fn error_line(e: &csv::Error) -> Option<u64> {
    e.position().map(|p| p.line())
}

type RowError = (Option<String>, String);

fn parse_record<F: Real>(
    record: &csv::StringRecord,
    has_quantity: bool,
    scale: RatingScale,
) -> std::result::Result<Transaction<F>, RowError> {
    let expected = if has_quantity { 11 } else { 10 };
    if record.len() != expected {
        return Err((None, format!("expected {expected} fields, got {}", record.len())));
    }

    let field = |i: usize| record.get(i).unwrap_or("").trim();
    let id_field = |i: usize| -> std::result::Result<String, RowError> {
        let v = field(i);
        if v.is_empty() {
            Err((Some(CSV_COLUMNS[i].to_string()), "empty identifier".to_string()))
        } else {
            Ok(v.to_string())
        }
    };

    let id = id_field(0)?;
    let buyer = id_field(1)?;
    let seller = id_field(2)?;
    let item = id_field(3)?;
    let category = id_field(4)?;
    if buyer == seller {
        return Err((None, format!("buyer and seller are both {buyer:?}")));
    }

    let price: f64 = field(5)
        .parse()
        .map_err(|_| (Some("price".to_string()), format!("not a number: {:?}", field(5))))?;
    if !(price.is_finite() && price >= 0.0) {
        return Err((Some("price".to_string()), format!("price must be non-negative, got {price}")));
    }

    let (quantity, rating_base) = if has_quantity {
        let raw = field(6);
        let q = if raw.is_empty() {
            1
        } else {
            let q: u32 = raw
                .parse()
                .map_err(|_| (Some("quantity".to_string()), format!("not a whole number: {raw:?}")))?;
            if q == 0 {
                return Err((Some("quantity".to_string()), "quantity must be at least 1".to_string()));
            }
            q
        };
        (q, 7)
    } else {
        (1, 6)
    };

    let mut components = [F::zero(); RATING_COMPONENTS];
    for (k, slot) in components.iter_mut().enumerate() {
        let idx = rating_base + k;
        let name = if has_quantity { CSV_COLUMNS[idx] } else { CSV_COLUMNS[idx + 1] };
        let raw: f64 = field(idx)
            .parse()
            .map_err(|_| (Some(name.to_string()), format!("not a number: {:?}", field(idx))))?;
        let normalized = scale.normalize(raw).ok_or_else(|| {
            (
                Some(name.to_string()),
                format!("rating {raw} outside scale [{}, {}]", scale.min, scale.max),
            )
        })?;
        *slot = real(normalized);
    }

    Ok(Transaction {
        id,
        buyer,
        seller,
        item,
        category,
        price: real(price),
        quantity,
        ratings: RatingVector(components),
    })
}

/// Writes transactions back out in the ingest CSV format.
///
/// Ratings are denormalized onto `scale`, so a write/ingest round trip with
/// the same scale reproduces the records exactly (the scale map is affine and
/// invertible). Numbers print in shortest round-trip form: whole stars come
/// out as `4`, not `4.000000000000001`.
pub fn write_csv<F: Real, W: io::Write>(
    transactions: &[Transaction<F>],
    scale: RatingScale,
    mut w: W,
) -> io::Result<()> {
    let mut line = String::new();
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for t in transactions {
        line.clear();
        let price = t.price.to_f64().unwrap_or(f64::NAN);
        write!(
            line,
            "{},{},{},{},{},{},{}",
            t.id, t.buyer, t.seller, t.item, t.category, price, t.quantity
        )
        .expect("string write cannot fail");
        for c in t.ratings.components() {
            let raw = scale.denormalize(c.to_f64().unwrap_or(f64::NAN));
            // Snap to the grid floating-point noise pushed us off of.
            let rounded = (raw * 1e9).round() / 1e9;
            write!(line, ",{rounded}").expect("string write cannot fail");
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
