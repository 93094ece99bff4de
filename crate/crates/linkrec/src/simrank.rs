//! Structural user similarity and candidate-seller generation.
//!
//! SimRank (Jeh & Widom) over the purchase side of the graph: two buyers are
//! similar when the sellers they buy from are themselves similar,
//!
//! ```text
//! S(u,u) = 1
//! S(u,v) = C / (|I(u)|·|I(v)|) · Σ_{a ∈ I(u)} Σ_{b ∈ I(v)} S(a,b)
//! ```
//!
//! where `I(u)` is the set of distinct sellers `u` has purchased from and
//! `C ∈ (0,1)` damps longer dependency chains. Users with an empty `I` —
//! pure sellers, isolated nodes — have similarity 0 to everyone else, so the
//! table only materializes pairs of users with at least one purchase.
//!
//! The fixed point is approached by Jacobi iteration from the identity: each
//! sweep reads only the previous iterate, which makes per-row parallelism
//! safe and the result independent of scheduling.
//!
//! Candidate sellers for a target user are then the sellers its most similar
//! users bought from, minus the sellers the target already knows.

use std::collections::BTreeSet;
use std::io::{self, BufRead};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CommercialGraph, UserIdx};
use crate::num::{real, Real};

/// Knobs of the fixed-point computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRankParams<F: Real = f64> {
    /// Damping factor `C ∈ (0,1)`.
    pub damping: F,
    /// Upper bound on sweeps when the tolerance is not reached first.
    pub max_iters: usize,
    /// Stop once the largest absolute per-pair change falls below this.
    pub tol: F,
}

impl<F: Real> Default for SimRankParams<F> {
    fn default() -> Self {
        SimRankParams { damping: real(0.8), max_iters: 10, tol: real(1e-4) }
    }
}

const NO_SLOT: u32 = u32::MAX;

/// Symmetric similarity values over all users with at least one purchase.
///
/// Stored as the strict upper triangle of the buyer × buyer matrix, one
/// ragged row per buyer; the diagonal is implicitly 1 and pairs involving a
/// purchase-less user are implicitly 0.
#[derive(Debug, Clone)]
pub struct SimilarityTable<F: Real = f64> {
    buyers: Vec<UserIdx>,
    /// User index → position in `buyers`, or `NO_SLOT`.
    slot_of: Vec<u32>,
    /// `rows[i][j - i - 1]` = S(buyers[i], buyers[j]) for j > i.
    rows: Vec<Vec<F>>,
    damping: F,
    iterations_run: usize,
    converged: bool,
}

/// Runs the fixed-point iteration and returns the resulting table.
///
/// Starts from S⁰ = identity and sweeps until the largest absolute change
/// drops below `params.tol` or `params.max_iters` sweeps have run. An empty
/// graph yields an empty table.
///
/// Panics if `params` violates its documented ranges; validate configuration
/// before reaching this point.
pub fn compute<F: Real>(g: &CommercialGraph<F>, params: &SimRankParams<F>) -> SimilarityTable<F> {
    assert!(
        params.damping > F::zero() && params.damping < F::one(),
        "damping must lie strictly between 0 and 1"
    );
    assert!(params.max_iters >= 1, "need at least one iteration");
    assert!(params.tol > F::zero(), "tolerance must be positive");

    let buyers: Vec<UserIdx> = g.users().filter(|&u| !g.sellers_of(u).is_empty()).collect();
    let m = buyers.len();
    let mut slot_of = vec![NO_SLOT; g.user_count()];
    for (slot, &b) in buyers.iter().enumerate() {
        slot_of[b as usize] = slot as u32;
    }
    let in_lists: Vec<&[UserIdx]> = buyers.iter().map(|&b| g.sellers_of(b)).collect();

    let mut rows: Vec<Vec<F>> = (0..m).map(|i| vec![F::zero(); m - i - 1]).collect();
    let mut iterations_run = 0;
    let mut converged = m < 2; // nothing to iterate on — already at the fixed point

    for sweep in 1..=params.max_iters {
        if converged {
            break;
        }
        let prev = &rows;
        let next: Vec<Vec<F>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let li = in_lists[i];
                let scale_i = params.damping / real::<F>(li.len() as f64);
                (i + 1..m)
                    .map(|j| {
                        let lj = in_lists[j];
                        let mut sum = F::zero();
                        for &a in li {
                            for &b in lj {
                                sum += pair_value(prev, &slot_of, a, b);
                            }
                        }
                        scale_i / real::<F>(lj.len() as f64) * sum
                    })
                    .collect()
            })
            .collect();
        // Max-reductions are order-insensitive, so the parallel split cannot
        // change the outcome.
        let delta = next
            .par_iter()
            .zip(prev.par_iter())
            .map(|(nr, pr)| {
                nr.iter()
                    .zip(pr.iter())
                    .map(|(n, p)| (*n - *p).abs())
                    .fold(F::zero(), F::max)
            })
            .reduce(F::zero, F::max);
        rows = next;
        iterations_run = sweep;
        if delta < params.tol {
            converged = true;
        }
    }

    SimilarityTable {
        buyers,
        slot_of,
        rows,
        damping: params.damping,
        iterations_run,
        converged,
    }
}

/// Similarity of two users under the previous iterate, with the base cases
/// (diagonal 1, missing user 0) applied.
fn pair_value<F: Real>(rows: &[Vec<F>], slot_of: &[u32], a: UserIdx, b: UserIdx) -> F {
    if a == b {
        return F::one();
    }
    let (sa, sb) = (slot_of[a as usize], slot_of[b as usize]);
    if sa == NO_SLOT || sb == NO_SLOT {
        return F::zero();
    }
    let (lo, hi) = if sa < sb { (sa, sb) } else { (sb, sa) };
    rows[lo as usize][(hi - lo - 1) as usize]
}

impl<F: Real> SimilarityTable<F> {
    /// S(u,v): 1 on the diagonal, 0 for any pair not materialized.
    pub fn similarity(&self, u: UserIdx, v: UserIdx) -> F {
        pair_value(&self.rows, &self.slot_of, u, v)
    }

    /// Users materialized in the table (those with at least one purchase).
    pub fn buyers(&self) -> &[UserIdx] {
        &self.buyers
    }

    pub fn damping(&self) -> F {
        self.damping
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// The up-to-`n` users most similar to `u`, highest first.
    ///
    /// Excludes `u` itself and anyone with similarity exactly 0; ties break
    /// toward the smaller user index (= lexicographically smaller id). The
    /// list is simply shorter when fewer nonzero neighbors exist.
    pub fn top_n(&self, u: UserIdx, n: usize) -> Vec<(UserIdx, F)> {
        if self.slot_of.get(u as usize).copied().unwrap_or(NO_SLOT) == NO_SLOT {
            return Vec::new();
        }
        let mut scored: Vec<(UserIdx, F)> = self
            .buyers
            .iter()
            .filter(|&&v| v != u)
            .map(|&v| (v, self.similarity(u, v)))
            .filter(|&(_, s)| s > F::zero())
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).expect("similarities are finite").then(a.0.cmp(&b.0))
        });
        scored.truncate(n);
        scored
    }
}

/// Candidate sellers for one target user, with the evidence that produced them.
#[derive(Debug, Clone)]
pub struct CandidateSet<F: Real = f64> {
    pub target: UserIdx,
    /// Output of the top-n similarity query, highest first.
    pub similar: Vec<(UserIdx, F)>,
    /// Sellers of the similar users the target has never bought from,
    /// ascending, target excluded.
    pub candidates: Vec<UserIdx>,
}

/// Sellers that served the target's lookalikes but never the target itself.
pub fn candidate_sellers<F: Real>(
    g: &CommercialGraph<F>,
    target: UserIdx,
    similar: &[(UserIdx, F)],
) -> CandidateSet<F> {
    let known: BTreeSet<UserIdx> = g.sellers_of(target).iter().copied().collect();
    let mut candidates = BTreeSet::new();
    for &(v, _) in similar {
        for &s in g.sellers_of(v) {
            if s != target && !known.contains(&s) {
                candidates.insert(s);
            }
        }
    }
    CandidateSet { target, similar: similar.to_vec(), candidates: candidates.into_iter().collect() }
}

/// Writes the nonzero pairs as `u,v,value` lines (9 significant digits),
/// sorted by id pair, under a `u,v,value` header — the cache format read
/// back by [`read_pairs`].
pub fn write_pairs<F: Real, W: io::Write>(
    table: &SimilarityTable<F>,
    g: &CommercialGraph<F>,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "u,v,value")?;
    for (i, row) in table.rows.iter().enumerate() {
        for (off, &value) in row.iter().enumerate() {
            if value > F::zero() {
                let u = g.user_name(table.buyers[i]);
                let v = g.user_name(table.buyers[i + 1 + off]);
                writeln!(w, "{u},{v},{:.8e}", value.to_f64().unwrap_or(f64::NAN))?;
            }
        }
    }
    Ok(())
}

/// Reads a table produced by [`write_pairs`] against the same graph.
///
/// Pairs absent from the file read as 0. Values are restored to the printed
/// precision (9 significant digits), which is what makes the cache useful;
/// a table rebuilt from scratch is the reference.
pub fn read_pairs<F: Real, R: io::Read>(
    g: &CommercialGraph<F>,
    damping: F,
    reader: R,
) -> Result<SimilarityTable<F>> {
    let buyers: Vec<UserIdx> = g.users().filter(|&u| !g.sellers_of(u).is_empty()).collect();
    let m = buyers.len();
    let mut slot_of = vec![NO_SLOT; g.user_count()];
    for (slot, &b) in buyers.iter().enumerate() {
        slot_of[b as usize] = slot as u32;
    }
    let mut rows: Vec<Vec<F>> = (0..m).map(|i| vec![F::zero(); m - i - 1]).collect();

    let mut lines = io::BufReader::new(reader).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "u,v,value" => {}
        Some(Ok(h)) => {
            return Err(Error::Schema(format!("similarity cache: expected header u,v,value, got {h:?}")))
        }
        Some(Err(e)) => return Err(Error::io("similarity cache", e)),
        None => return Err(Error::Schema("similarity cache: empty file".to_string())),
    }
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io("similarity cache", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, ',');
        let (u, v, raw) = match (fields.next(), fields.next(), fields.next()) {
            (Some(u), Some(v), Some(x)) => (u, v, x),
            _ => {
                return Err(Error::Schema(format!(
                    "similarity cache line {}: expected u,v,value",
                    lineno + 2
                )))
            }
        };
        let resolve = |name: &str| -> Result<u32> {
            let idx = g.user_idx(name).ok_or_else(|| Error::UnknownUser(name.to_string()))?;
            let slot = slot_of[idx as usize];
            if slot == NO_SLOT {
                return Err(Error::Schema(format!(
                    "similarity cache names {name:?}, which has no purchases in this graph"
                )));
            }
            Ok(slot)
        };
        let (su, sv) = (resolve(u)?, resolve(v)?);
        if su == sv {
            return Err(Error::Schema(format!("similarity cache pairs {u:?} with itself")));
        }
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("similarity cache: bad value {raw:?} for ({u},{v})")))?;
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Schema(format!(
                "similarity cache: value {value} for ({u},{v}) outside [0,1]"
            )));
        }
        let (lo, hi) = if su < sv { (su, sv) } else { (sv, su) };
        rows[lo as usize][(hi - lo - 1) as usize] = real(value);
    }

    Ok(SimilarityTable { buyers, slot_of, rows, damping, iterations_run: 0, converged: true })
}
