//! Exact expected precision, recall and F1 over all size-`k` subsets of a
//! pool of `k'` sampled predictions.
//!
//! Each pool entry is the index of the reference key it hit, or `None`. For a
//! subset with `s` positive entries covering `u` distinct keys out of `g`,
//! precision is `s/k`, recall is `u/g` and F1 is `2su/(gs + ku)` (0 when
//! `s = 0`). Two routes compute the expectation:
//!
//! * enumeration of every subset, feasible while `C(k', k)` stays small;
//! * counting subsets per `(s, u)` class. Keys are folded in one at a time:
//!   a key with multiplicity `m` contributes `j` picks in `C(m, j)` ways and
//!   covers one more key when `j > 0`. Misses fill the remaining `k - s`
//!   slots in `C(n0, k - s)` ways.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Subset count above which [`EstimateStrategy::Auto`] stops enumerating.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimateStrategy {
    /// Enumerate when `C(k', k) <= ENUMERATION_LIMIT`, count otherwise.
    #[default]
    Auto,
    Enumerate,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtKEstimate {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtKExact {
    pub precision: BigRational,
    pub recall: BigRational,
    pub f1: BigRational,
}

impl AtKExact {
    pub fn to_f64(&self) -> AtKEstimate {
        AtKEstimate {
            precision: self.precision.to_f64().unwrap_or(f64::NAN),
            recall: self.recall.to_f64().unwrap_or(f64::NAN),
            f1: self.f1.to_f64().unwrap_or(f64::NAN),
        }
    }
}

/// `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(c)
}

fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

fn validate(hits: &[Option<usize>], g: usize, k: usize) -> Result<(), MetricsError> {
    if g == 0 {
        return Err(MetricsError::NoReferenceKeys);
    }
    if k == 0 || k > hits.len() {
        return Err(MetricsError::SubsetSizeOutOfRange { k, pool: hits.len() });
    }
    if let Some(&index) = hits.iter().flatten().find(|&&i| i >= g) {
        return Err(MetricsError::KeyIndexOutOfRange { index, keys: g });
    }
    Ok(())
}

fn f1_of(s: usize, u: usize, g: usize, k: usize) -> f64 {
    if s == 0 || u == 0 {
        0.0
    } else {
        (2 * s * u) as f64 / (g * s + k * u) as f64
    }
}

/// Multiplicity of each key that occurs at least once, and the miss count.
fn multiplicities(hits: &[Option<usize>], g: usize) -> (Vec<usize>, usize) {
    let mut counts = vec![0usize; g];
    let mut misses = 0;
    for h in hits {
        match h {
            Some(i) => counts[*i] += 1,
            None => misses += 1,
        }
    }
    counts.retain(|&m| m > 0);
    (counts, misses)
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn enumerate(hits: &[Option<usize>], g: usize, k: usize, subsets: u128) -> AtKEstimate {
    let n = hits.len();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut seen = vec![0u64; g];
    let mut stamp = 0u64;
    let (mut sum_s, mut sum_u) = (0u128, 0u128);
    let mut sum_f1 = Accumulator::default();

    loop {
        stamp += 1;
        let (mut s, mut u) = (0usize, 0usize);
        for &i in &idx {
            if let Some(key) = hits[i] {
                s += 1;
                if seen[key] != stamp {
                    seen[key] = stamp;
                    u += 1;
                }
            }
        }
        sum_s += s as u128;
        sum_u += u as u128;
        sum_f1.add(f1_of(s, u, g, k));

        // advance to the next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            break;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }

    let denom = subsets as f64;
    AtKEstimate {
        precision: sum_s as f64 / (k as f64 * denom),
        recall: sum_u as f64 / (g as f64 * denom),
        f1: sum_f1.total() / denom,
    }
}

/// Number of subsets for each `(s, u)` class before filling with misses,
/// as a row-major `(k + 1) x (keys + 1)` table.
///
/// Keys are folded in one at a time. Taking `j >= 1` copies of a key moves
/// a class to a strictly larger `s`, so sweeping `s` downwards lets the
/// table update in place.
fn class_table(mults: &[usize], k: usize) -> Option<Vec<u128>> {
    let width = mults.len() + 1;
    let mut table = vec![0u128; (k + 1) * width];
    table[0] = 1;
    let mut choose = Vec::with_capacity(k + 1);
    for (done, &m) in mults.iter().enumerate() {
        choose.clear();
        for j in 0..=m.min(k) {
            choose.push(binomial(m, j)?);
        }
        for s in (0..k).rev() {
            for u in (0..=done).rev() {
                let ways = table[s * width + u];
                if ways == 0 {
                    continue;
                }
                for (j, &c) in choose.iter().enumerate().take(k - s + 1).skip(1) {
                    let cell = &mut table[(s + j) * width + u + 1];
                    *cell = cell.checked_add(ways.checked_mul(c)?)?;
                }
            }
        }
    }
    Some(table)
}

fn count(hits: &[Option<usize>], g: usize, k: usize) -> Result<AtKEstimate, MetricsError> {
    let overflow = || MetricsError::BinomialOverflow { n: hits.len(), k };
    let denom = binomial(hits.len(), k).ok_or_else(overflow)? as f64;
    let (mults, misses) = multiplicities(hits, g);
    let table = class_table(&mults, k).ok_or_else(overflow)?;

    let (mut p, mut r, mut f) = (Accumulator::default(), Accumulator::default(), Accumulator::default());
    for (s, row) in table.chunks(mults.len() + 1).enumerate() {
        if k - s > misses {
            continue;
        }
        let fill = binomial(misses, k - s).ok_or_else(overflow)?;
        for (u, &ways) in row.iter().enumerate() {
            if ways == 0 {
                continue;
            }
            let weight = ways.checked_mul(fill).ok_or_else(overflow)? as f64 / denom;
            p.add(weight * s as f64 / k as f64);
            r.add(weight * u as f64 / g as f64);
            f.add(weight * f1_of(s, u, g, k));
        }
    }
    Ok(AtKEstimate {
        precision: p.total(),
        recall: r.total(),
        f1: f.total(),
    })
}

/// Expected precision/recall/F1 at `k` over a pool of `hits.len()` entries
/// with `g` reference keys.
pub fn estimate_at_k(hits: &[Option<usize>], g: usize, k: usize) -> Result<AtKEstimate, MetricsError> {
    estimate_at_k_with(hits, g, k, EstimateStrategy::Auto)
}

pub fn estimate_at_k_with(
    hits: &[Option<usize>],
    g: usize,
    k: usize,
    strategy: EstimateStrategy,
) -> Result<AtKEstimate, MetricsError> {
    validate(hits, g, k)?;
    let subsets = binomial(hits.len(), k);
    match strategy {
        EstimateStrategy::Count => count(hits, g, k),
        EstimateStrategy::Enumerate => match subsets {
            Some(n) if n <= ENUMERATION_LIMIT => Ok(enumerate(hits, g, k, n)),
            _ => Err(MetricsError::EnumerationTooLarge { n: hits.len(), k }),
        },
        EstimateStrategy::Auto => match subsets {
            Some(n) if n <= ENUMERATION_LIMIT => Ok(enumerate(hits, g, k, n)),
            _ => count(hits, g, k),
        },
    }
}

/// The counting route in exact rational arithmetic. Never overflows.
pub fn estimate_at_k_exact(hits: &[Option<usize>], g: usize, k: usize) -> Result<AtKExact, MetricsError> {
    validate(hits, g, k)?;
    let (mults, misses) = multiplicities(hits, g);
    let keys = mults.len();
    let mut table = vec![vec![BigUint::zero(); keys + 1]; k + 1];
    table[0][0] = BigUint::one();
    for &m in &mults {
        let mut next = table.clone();
        for s in 0..=k {
            for u in 0..keys {
                if table[s][u].is_zero() {
                    continue;
                }
                for j in 1..=m.min(k - s) {
                    next[s + j][u + 1] += &table[s][u] * binomial_big(m, j);
                }
            }
        }
        table = next;
    }

    let int = |n: usize| BigRational::from_integer(n.into());
    let denom = BigRational::from_integer(binomial_big(hits.len(), k).into());
    let (mut p, mut r, mut f) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    for (s, row) in table.iter().enumerate() {
        if k - s > misses {
            continue;
        }
        let fill = binomial_big(misses, k - s);
        for (u, ways) in row.iter().enumerate() {
            if ways.is_zero() {
                continue;
            }
            let weight = BigRational::from_integer((ways * &fill).into()) / &denom;
            p += &weight * int(s) / int(k);
            r += &weight * int(u) / int(g);
            if s > 0 && u > 0 {
                f += &weight * int(2 * s * u) / int(g * s + k * u);
            }
        }
    }
    Ok(AtKExact {
        precision: p,
        recall: r,
        f1: f,
    })
}
