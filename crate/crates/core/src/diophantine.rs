//! Solution counts for `a·n_k − b·n_ℓ = c` over sequence prefixes.
//!
//! [`count_naive`] is the ground truth; every other counter is tested
//! against it. [`difference_spectrum`] materializes the whole map
//! `c ↦ L(N,a,b,c)`, while [`max_count`] finds its maximum with a two-pass
//! residue fingerprint that never holds more than one exact key per
//! candidate.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::format_significant;
use crate::sequence::{ConstructionParams, SequenceSpec, SubBlock};

/// Default cap on enumerated index pairs.
pub const DEFAULT_PAIR_BUDGET: u128 = 100_000_000;

/// Coefficients of `a·n_k − b·n_ℓ = c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationParams {
    pub a: u64,
    pub b: u64,
    pub c: BigUint,
}

impl EquationParams {
    pub fn new(a: u64, b: u64, c: impl Into<BigUint>) -> Self {
        EquationParams { a, b, c: c.into() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a == 0 || self.b == 0 {
            return Err(Error::InvalidParameter("a and b must be positive".into()));
        }
        Ok(())
    }
}

fn scaled(prefix: &[BigUint], factor: u64) -> Vec<BigUint> {
    prefix.iter().map(|n| n * factor).collect()
}

/// `L(N,a,b,c)` by direct enumeration of all `N²` index pairs.
pub fn count_naive(prefix: &[BigUint], eq: &EquationParams) -> u64 {
    let lhs = scaled(prefix, eq.a);
    let rhs: Vec<BigUint> = prefix.iter().map(|n| n * eq.b + &eq.c).collect();
    lhs.par_iter()
        .map(|x| rhs.iter().filter(|y| *y == x).count() as u64)
        .sum()
}

/// `#{(k,ℓ): a·n_k − b·n_ℓ = c}` for a signed right-hand side.
pub fn count_naive_signed(prefix: &[BigUint], a: u64, b: u64, c: &BigInt) -> u64 {
    let lhs: Vec<BigInt> = prefix.iter().map(|n| BigInt::from(n * a)).collect();
    let rhs: Vec<BigInt> = prefix.iter().map(|n| BigInt::from(n * b) + c).collect();
    lhs.iter().map(|x| rhs.iter().filter(|y| *y == x).count() as u64).sum()
}

/// `L(N,a,b,c)` by hash join of `{a·n_k}` against `{b·n_ℓ + c}`.
pub fn count_fast(prefix: &[BigUint], eq: &EquationParams) -> u64 {
    let mut table: HashMap<BigUint, u64> = HashMap::with_capacity(prefix.len());
    for n in prefix {
        *table.entry(n * eq.b + &eq.c).or_insert(0) += 1;
    }
    prefix
        .iter()
        .map(|n| table.get(&(n * eq.a)).copied().unwrap_or(0))
        .sum()
}

/// Map `c ↦ L(N,a,b,c)` over every `c ≥ 0` with at least one solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSpectrum {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub counts: BTreeMap<BigUint, u64>,
}

impl SolutionSpectrum {
    pub fn get(&self, c: &BigUint) -> u64 {
        self.counts.get(c).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Merges a spectrum over a disjoint set of pairs.
    pub fn merge(&mut self, other: SolutionSpectrum) {
        for (c, v) in other.counts {
            *self.counts.entry(c).or_insert(0) += v;
        }
    }

    /// Largest count (smallest `c` on ties), optionally ignoring `c = 0`.
    pub fn argmax(&self, exclude_zero: bool) -> Option<(BigUint, u64)> {
        let mut best: Option<(&BigUint, u64)> = None;
        for (c, &v) in &self.counts {
            if exclude_zero && c.is_zero() {
                continue;
            }
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((c, v));
            }
        }
        best.map(|(c, v)| (c.clone(), v))
    }
}

fn check_budget(n: usize, budget: u128) -> Result<()> {
    let pairs = (n as u128) * (n as u128);
    if pairs > budget {
        return Err(Error::PairBudgetExceeded { pairs, budget });
    }
    Ok(())
}

/// Full difference spectrum of `{a·n_k − b·n_ℓ ≥ 0}`.
pub fn difference_spectrum(prefix: &[BigUint], a: u64, b: u64, budget: u128) -> Result<SolutionSpectrum> {
    check_budget(prefix.len(), budget)?;
    let lhs = scaled(prefix, a);
    let rhs = scaled(prefix, b);
    let partials: Vec<SolutionSpectrum> = lhs
        .par_chunks(64)
        .map(|chunk| {
            let mut counts = BTreeMap::new();
            for x in chunk {
                for y in &rhs {
                    if x >= y {
                        *counts.entry(x - y).or_insert(0u64) += 1;
                    }
                }
            }
            SolutionSpectrum { n: 0, a, b, counts }
        })
        .collect();
    let mut out = SolutionSpectrum {
        n: prefix.len() as u64,
        a,
        b,
        counts: BTreeMap::new(),
    };
    for p in partials {
        out.merge(p);
    }
    Ok(out)
}

/// Maximizer of the spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxCount {
    /// `None` when no pair qualifies.
    pub c: Option<BigUint>,
    pub count: u64,
}

// Two primes below 2^61; a difference is fingerprinted by its residues.
const FP_P1: u64 = 2_305_843_009_213_693_951;
const FP_P2: u64 = 2_305_843_009_213_693_921;

fn residue(n: &BigUint, p: u64) -> u64 {
    (n % p).to_u64().expect("residue below p")
}

fn sub_mod(x: u64, y: u64, p: u64) -> u64 {
    if x >= y {
        x - y
    } else {
        x + (p - y)
    }
}

/// `(c*, L*)`: maximum of the spectrum, smallest `c` on ties.
///
/// Pass one counts residue fingerprints of every non-negative difference.
/// Pass two recomputes the exact differences only for the fingerprints that
/// can still hold the maximum. A fingerprint collision can only inflate a
/// bucket, so the second pass is repeated once with the exact lower bound.
pub fn max_count(prefix: &[BigUint], a: u64, b: u64, exclude_zero: bool, budget: u128) -> Result<MaxCount> {
    check_budget(prefix.len(), budget)?;
    let lhs = scaled(prefix, a);
    let rhs = scaled(prefix, b);
    let res = |v: &[BigUint], p| v.iter().map(|n| residue(n, p)).collect::<Vec<_>>();
    let (l1, l2, r1, r2) = (res(&lhs, FP_P1), res(&lhs, FP_P2), res(&rhs, FP_P1), res(&rhs, FP_P2));

    let fingerprint = |k: usize, l: usize| -> Option<u128> {
        let ord = lhs[k].cmp(&rhs[l]);
        if ord.is_lt() || (exclude_zero && ord.is_eq()) {
            return None;
        }
        let h1 = sub_mod(l1[k], r1[l], FP_P1) as u128;
        let h2 = sub_mod(l2[k], r2[l], FP_P2) as u128;
        Some((h1 << 64) | h2)
    };

    let buckets: HashMap<u128, u64> = (0..lhs.len())
        .into_par_iter()
        .fold(HashMap::new, |mut acc, k| {
            for l in 0..rhs.len() {
                if let Some(h) = fingerprint(k, l) {
                    *acc.entry(h).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut x, y| {
            for (h, v) in y {
                *x.entry(h).or_insert(0) += v;
            }
            x
        });

    let Some(&top) = buckets.values().max() else {
        return Ok(MaxCount { c: None, count: 0 });
    };

    if top == 1 {
        // every bucket holds a single pair, so each count is exactly one
        let mut smallest: Option<BigUint> = None;
        for (k, x) in lhs.iter().enumerate() {
            for (l, y) in rhs.iter().enumerate() {
                if fingerprint(k, l).is_some() {
                    let d = x - y;
                    if smallest.as_ref().is_none_or(|s| d < *s) {
                        smallest = Some(d);
                    }
                }
            }
        }
        return Ok(MaxCount { c: smallest, count: 1 });
    }

    let exact_for = |threshold: u64| -> BTreeMap<BigUint, u64> {
        let wanted: HashSet<u128> = buckets
            .iter()
            .filter(|(_, &v)| v >= threshold)
            .map(|(&h, _)| h)
            .collect();
        let mut exact = BTreeMap::new();
        for (k, x) in lhs.iter().enumerate() {
            for (l, y) in rhs.iter().enumerate() {
                if fingerprint(k, l).is_some_and(|h| wanted.contains(&h)) {
                    *exact.entry(x - y).or_insert(0u64) += 1;
                }
            }
        }
        exact
    };

    let pick = |exact: &BTreeMap<BigUint, u64>| -> (BigUint, u64) {
        let best = *exact.values().max().expect("candidate set is non-empty");
        let c = exact.iter().find(|(_, &v)| v == best).map(|(c, _)| c.clone()).unwrap();
        (c, best)
    };

    let (mut c, mut best) = pick(&exact_for(top));
    if best < top {
        (c, best) = pick(&exact_for(best));
    }
    Ok(MaxCount { c: Some(c), count: best })
}

/// `log2(a/b)` when `a/b` is an integer power of two.
pub fn dyadic_ratio_exponent(a: u64, b: u64) -> Option<i32> {
    let (hi, lo, sign) = if a >= b { (a, b, 1) } else { (b, a, -1) };
    if lo == 0 || hi % lo != 0 {
        return None;
    }
    let q = hi / lo;
    q.is_power_of_two().then(|| sign * q.trailing_zeros() as i32)
}

fn check_subblock_label(i: u32, m: u64, params: &ConstructionParams) -> Result<()> {
    let count = params.subblock_count(i);
    if m == 0 || m > count {
        return Err(Error::InvalidParameter(format!("m = {m} outside 1..={count} for block {i}")));
    }
    Ok(())
}

/// Right-hand side `2^{T(i)}·b·m·(2^r − 1)` of the special family.
///
/// For `r < 0` the value belongs to the equation with the roles of
/// `(k, a)` and `(ℓ, b)` exchanged: `2^{T(i)}·(b/2^{|r|})·m·(2^{|r|} − 1)`,
/// which requires `2^{|r|}` to divide `b`.
pub fn special_rhs(i: u32, m: u64, b: u64, r: i32, params: &ConstructionParams) -> Result<BigUint> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be non-zero".into()));
    }
    check_subblock_label(i, m, params)?;
    let t = params.tower_exponent(i)?;
    let shift = r.unsigned_abs();
    let coeff = if r > 0 {
        BigUint::from(b)
    } else {
        if shift >= 64 || !b.is_multiple_of(1u64 << shift) {
            return Err(Error::InvalidParameter(format!(
                "b = {b} is not divisible by 2^{shift}"
            )));
        }
        BigUint::from(b >> shift)
    };
    let factor = (BigUint::one() << shift) - 1u32;
    Ok((coeff * m * factor) << t)
}

/// Case of the structural counting lemma for a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaCase {
    /// `a/b` is not a power of two: `O(1)` solutions uniformly in `c`.
    NonDyadicRatio,
    /// Pairs from different blocks: `O(1)` in total.
    CrossBlock,
    /// `c` is the special right-hand side of sub-block `m`.
    SpecialFamily { m: u64 },
    /// `a/b = 2^r` but `c` is not special: `O(i²)`.
    Generic,
}

/// Structural prediction for in-block solution counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedCount {
    pub case: LemmaCase,
    /// `log2(a/b)` when it exists.
    pub r: Option<i32>,
    /// Exact count of the `ℓ = k + r` family inside the sub-block.
    pub structural: u64,
    /// Multiplier of the sporadic budget: `i²`, or `1` for `O(1)` cases.
    pub sporadic_scale: u64,
}

impl PredictedCount {
    /// Upper bound on the block count given a calibrated sporadic constant.
    pub fn budget(&self, sporadic_constant: u64) -> u64 {
        self.structural + sporadic_constant * self.sporadic_scale
    }
}

pub fn predicted_count_paper(i: u32, eq: &EquationParams, params: &ConstructionParams) -> Result<PredictedCount> {
    eq.validate()?;
    if eq.a == eq.b {
        return Err(Error::InvalidCase("prediction needs a != b".into()));
    }
    let i_sq = (i as u64) * (i as u64);
    let Some(r) = dyadic_ratio_exponent(eq.a, eq.b) else {
        return Ok(PredictedCount {
            case: LemmaCase::NonDyadicRatio,
            r: None,
            structural: 0,
            sporadic_scale: 1,
        });
    };
    if r > 0 {
        for sub in params.subblocks(i)? {
            if special_rhs(i, sub.m, eq.b, r, params)? == eq.c {
                return Ok(PredictedCount {
                    case: LemmaCase::SpecialFamily { m: sub.m },
                    r: Some(r),
                    structural: sub.len().saturating_sub(r as u64),
                    sporadic_scale: i_sq,
                });
            }
        }
    }
    Ok(PredictedCount {
        case: LemmaCase::Generic,
        r: Some(r),
        structural: 0,
        sporadic_scale: i_sq,
    })
}

/// Solutions split by whether both indices share a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSplit {
    pub in_block: u64,
    pub cross_block: u64,
}

/// Naive count over `prefix` split into same-block and cross-block pairs.
pub fn count_by_block_relation(prefix: &[BigUint], params: &ConstructionParams, eq: &EquationParams) -> Result<BlockSplit> {
    let blocks: Vec<u32> = (1..=prefix.len() as u64)
        .map(|k| params.block_of(k).map(|b| b.i))
        .collect::<Result<_>>()?;
    let rhs: Vec<BigUint> = prefix.iter().map(|n| n * eq.b + &eq.c).collect();
    let mut split = BlockSplit { in_block: 0, cross_block: 0 };
    for (k, n) in prefix.iter().enumerate() {
        let x = n * eq.a;
        for (l, y) in rhs.iter().enumerate() {
            if *y == x {
                if blocks[k] == blocks[l] {
                    split.in_block += 1;
                } else {
                    split.cross_block += 1;
                }
            }
        }
    }
    Ok(split)
}

/// Naive count restricted to `k, ℓ ∈ Δ_i`, on materialized terms.
pub fn count_in_block(spec: &SequenceSpec, i: u32, eq: &EquationParams) -> Result<u64> {
    let params = spec
        .params()
        .ok_or_else(|| Error::InvalidParameter("block counts need the block construction".into()))?;
    let block = params.block(i)?;
    let terms = (block.lo..=block.hi).map(|k| spec.term(k)).collect::<Result<Vec<_>>>()?;
    Ok(count_naive(&terms, eq))
}

fn two_adic(v: &BigInt) -> u64 {
    v.magnitude().trailing_zeros().unwrap_or(0)
}

/// If `v = 2^f − 1` with `f ≥ 1`, returns `f`.
fn mersenne_exponent(v: &BigUint) -> Option<u64> {
    let w = v + 1u32;
    let f = w.bits() - 1;
    (f >= 1 && w == (BigUint::one() << f)).then_some(f)
}

fn overlap(sub_k: &SubBlock, sub_l: &SubBlock, shift: i64) -> u64 {
    // k ∈ sub_k with ℓ = k + shift ∈ sub_l
    let lo = (sub_k.lo as i64).max(sub_l.lo as i64 - shift);
    let hi = (sub_k.hi as i64).min(sub_l.hi as i64 - shift);
    if hi >= lo {
        (hi - lo + 1) as u64
    } else {
        0
    }
}

/// In-block count without materializing tower-sized integers.
///
/// Requires `a/b = 2^r`. Writing `g = min(a, b)`, every in-block difference is
/// `a·n_k − b·n_ℓ = 2^{T(i)}·g·(u·(2^k + m₁) − v·(2^ℓ + m₂))` with
/// `u = a/g`, `v = b/g` powers of two, so the caller passes the reduced
/// right-hand side `c' = c / (2^{T(i)}·g)`. For each sub-block pair the
/// equation `2^{k+s} − 2^{ℓ+t} = D` has at most one solution unless `D = 0`,
/// by uniqueness of binary representations.
pub fn count_in_block_symbolic(params: &ConstructionParams, i: u32, a: u64, b: u64, reduced_c: &BigInt) -> Result<u64> {
    let r = dyadic_ratio_exponent(a, b)
        .ok_or_else(|| Error::InvalidCase(format!("a/b = {a}/{b} is not a power of two")))?;
    let (s, t) = if r >= 0 { (r as u64, 0u64) } else { (0, (-r) as u64) };
    let (u, v) = (BigInt::one() << s, BigInt::one() << t);
    let subs = params.subblocks(i)?;
    let mut total = 0u64;
    for s1 in &subs {
        for s2 in &subs {
            let d: BigInt = reduced_c - &u * s1.m + &v * s2.m;
            match d.sign() {
                Sign::NoSign => {
                    total += overlap(s1, s2, s as i64 - t as i64);
                }
                Sign::Plus => {
                    // D = 2^{ℓ+t}(2^f − 1), k + s = ℓ + t + f
                    let e = two_adic(&d);
                    let Some(f) = mersenne_exponent(&(d.magnitude() >> e)) else { continue };
                    if e < t {
                        continue;
                    }
                    let l = e - t;
                    let Some(k) = (e + f).checked_sub(s) else { continue };
                    if k >= 1 && s1.contains(k) && s2.contains(l) {
                        total += 1;
                    }
                }
                Sign::Minus => {
                    // −D = 2^{k+s}(2^f − 1), ℓ + t = k + s + f
                    let e = two_adic(&d);
                    let Some(f) = mersenne_exponent(&(d.magnitude() >> e)) else { continue };
                    if e < s {
                        continue;
                    }
                    let k = e - s;
                    let Some(l) = (e + f).checked_sub(t) else { continue };
                    if l >= 1 && s1.contains(k) && s2.contains(l) {
                        total += 1;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Reduces `c` to `c / (2^{T(i)}·min(a,b))`, or `None` if not divisible.
pub fn reduce_rhs(c: &BigUint, i: u32, a: u64, b: u64, params: &ConstructionParams) -> Result<Option<BigInt>> {
    let t = params.tower_exponent(i)?;
    let g = BigUint::from(a.min(b)) << t;
    let (q, rem) = c.div_rem(&g);
    Ok(rem.is_zero().then(|| BigInt::from(q)))
}

/// One row of a Diophantine profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub c_star: Option<BigUint>,
    pub l_star: u64,
    pub ratio: f64,
}

/// For each `N`, `max_{c≥1} L(N,a,b,c)` and `L*·(ln N)^{1−ε}/N`.
pub fn diophantine_profile(spec: &SequenceSpec, a: u64, b: u64, ns: &[u64], eps: f64, budget: u128) -> Result<Vec<ProfileRow>> {
    let Some(&largest) = ns.iter().max() else {
        return Ok(Vec::new());
    };
    for &n in ns {
        check_budget(n as usize, budget)?;
    }
    let prefix = spec.prefix(largest)?;
    ns.iter()
        .map(|&n| {
            let best = max_count(&prefix[..n as usize], a, b, true, budget)?;
            let ratio = best.count as f64 * (n as f64).ln().powf(1.0 - eps) / n as f64;
            Ok(ProfileRow {
                n,
                a,
                b,
                c_star: best.c,
                l_star: best.count,
                ratio,
            })
        })
        .collect()
}

/// Block ends `N(i)` for a range of blocks.
pub fn block_ends(params: &ConstructionParams, blocks: std::ops::RangeInclusive<u32>) -> Result<Vec<u64>> {
    blocks.map(|i| params.block_end(i)).collect()
}

pub const PROFILE_CSV_HEADER: &str = "N,a,b,c_star,L_star,ratio";

/// Writes profile rows as CSV; `c_star` is empty when there is no solution.
pub fn write_profile_csv<W: Write>(w: W, rows: &[ProfileRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(PROFILE_CSV_HEADER.split(',')).map_err(io)?;
    for row in rows {
        out.write_record([
            row.n.to_string(),
            row.a.to_string(),
            row.b.to_string(),
            row.c_star.as_ref().map(ToString::to_string).unwrap_or_default(),
            row.l_star.to_string(),
            format_significant(row.ratio, 12),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// `true` if `c` lies in `{2^{T(i)}·m : 1 ≤ m ≤ M(i)}` for some block `i`.
pub fn is_tower_multiple_family(c: &BigUint, params: &ConstructionParams, max_block: u32) -> Result<Option<(u32, u64)>> {
    for i in 1..=max_block {
        let t = params.tower_exponent(i)?;
        let unit = BigUint::one() << t;
        let (q, rem) = c.div_rem(&unit);
        if rem.is_zero() {
            if let Some(m) = q.to_u64() {
                if m >= 1 && m <= params.subblock_count(i) {
                    return Ok(Some((i, m)));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{TowerSpec, SequenceSpec};
    use num_rational::Ratio;

    fn reduced(r: u64) -> ConstructionParams {
        ConstructionParams::new(r, Ratio::new(1, 2), 2, Ratio::from_integer(1), TowerSpec::ReducedTower).unwrap()
    }

    #[test]
    fn naive_examples() {
        let ef = SequenceSpec::ErdosFortet.prefix(10).unwrap();
        assert_eq!(count_naive(&ef, &EquationParams::new(1, 2, 1u32)), 9);
        let g = SequenceSpec::Geometric { q: 3 }.prefix(7).unwrap();
        assert_eq!(count_naive(&g, &EquationParams::new(3, 3, 0u32)), 7);
        let g2 = SequenceSpec::Geometric { q: 2 }.prefix(10).unwrap();
        assert_eq!(count_naive(&g2, &EquationParams::new(1, 2, 0u32)), 9);
    }

    #[test]
    fn fast_matches_examples() {
        let ef = SequenceSpec::ErdosFortet.prefix(10).unwrap();
        assert_eq!(count_fast(&ef, &EquationParams::new(1, 2, 1u32)), 9);
        // n_3 − 2·n_1 = 7 − 2 = 5
        assert_eq!(count_fast(&ef, &EquationParams::new(1, 2, 5u32)), 1);
        assert_eq!(count_naive(&ef, &EquationParams::new(1, 2, 5u32)), 1);
        // 2^k − 2^{ℓ+1} = 5 is impossible: empty intersection
        assert_eq!(count_fast(&ef, &EquationParams::new(1, 2, 6u32)), 0);
        assert_eq!(count_naive(&ef, &EquationParams::new(1, 2, 6u32)), 0);
        let p = reduced(4);
        let spec = SequenceSpec::Paper(p.clone());
        let prefix = spec.prefix(20).unwrap();
        let eq = EquationParams::new(2, 1, special_rhs(2, 1, 1, 1, &p).unwrap());
        assert_eq!(count_fast(&prefix, &eq), count_naive(&prefix, &eq));
    }

    #[test]
    fn spectrum_examples() {
        let ef = SequenceSpec::ErdosFortet.prefix(4).unwrap();
        let s = difference_spectrum(&ef, 1, 2, DEFAULT_PAIR_BUDGET).unwrap();
        assert_eq!(s.get(&1u32.into()), 3);
        let g = SequenceSpec::Geometric { q: 2 }.prefix(3).unwrap();
        let s = difference_spectrum(&g, 1, 1, DEFAULT_PAIR_BUDGET).unwrap();
        let expected: BTreeMap<BigUint, u64> =
            [(0u32, 3u64), (2, 1), (4, 1), (6, 1)].into_iter().map(|(c, v)| (c.into(), v)).collect();
        assert_eq!(s.counts, expected);
        assert!(matches!(
            difference_spectrum(&g, 1, 1, 8),
            Err(Error::PairBudgetExceeded { pairs: 9, budget: 8 })
        ));
    }

    #[test]
    fn max_count_examples() {
        let ef = SequenceSpec::ErdosFortet.prefix(10).unwrap();
        let m = max_count(&ef, 1, 2, true, DEFAULT_PAIR_BUDGET).unwrap();
        assert_eq!(m, MaxCount { c: Some(1u32.into()), count: 9 });
        let g = SequenceSpec::Geometric { q: 2 }.prefix(10).unwrap();
        let m = max_count(&g, 1, 1, false, DEFAULT_PAIR_BUDGET).unwrap();
        assert_eq!(m, MaxCount { c: Some(0u32.into()), count: 10 });
        let single = SequenceSpec::Geometric { q: 2 }.prefix(1).unwrap();
        assert_eq!(max_count(&single, 1, 1, true, 10).unwrap(), MaxCount { c: None, count: 0 });
    }

    #[test]
    fn max_count_agrees_with_spectrum_argmax() {
        let p = reduced(4);
        let prefix = SequenceSpec::Paper(p).prefix(84).unwrap();
        for (a, b) in [(2, 1), (1, 2), (3, 1), (4, 1), (1, 1)] {
            for ez in [true, false] {
                let s = difference_spectrum(&prefix, a, b, DEFAULT_PAIR_BUDGET).unwrap();
                let expect = s.argmax(ez);
                let got = max_count(&prefix, a, b, ez, DEFAULT_PAIR_BUDGET).unwrap();
                assert_eq!(got.c, expect.as_ref().map(|e| e.0.clone()), "a={a} b={b}");
                assert_eq!(got.count, expect.map(|e| e.1).unwrap_or(0));
            }
        }
    }

    #[test]
    fn special_rhs_examples() {
        let table = ConstructionParams::new(
            4,
            Ratio::new(1, 2),
            2,
            Ratio::from_integer(1),
            TowerSpec::ExplicitTable(vec![10, 20]),
        )
        .unwrap();
        assert_eq!(special_rhs(1, 1, 1, 1, &table).unwrap(), BigUint::from(1024u32));
        assert_eq!(special_rhs(1, 1, 1, 2, &table).unwrap(), BigUint::from(3u32 * 1024));
        let paper = ConstructionParams::new(9, Ratio::new(1, 2), 2, Ratio::from_integer(1), TowerSpec::PaperTower).unwrap();
        assert_eq!(special_rhs(2, 2, 3, 1, &paper).unwrap(), BigUint::from(6u32) << 65536u32);
        assert!(special_rhs(2, 3, 3, 1, &paper).is_err());
        assert!(special_rhs(1, 1, 1, 0, &paper).is_err());
        // exchanged roles: b = 4, r = −1 ⇒ a = 2 and the value is 2^T·2·m·1
        assert_eq!(special_rhs(1, 1, 4, -1, &table).unwrap(), BigUint::from(2048u32));
        assert!(special_rhs(1, 1, 3, -1, &table).is_err());
    }

    #[test]
    fn prediction_cases() {
        let p = reduced(4);
        let c = special_rhs(2, 1, 1, 1, &p).unwrap();
        let pred = predicted_count_paper(2, &EquationParams::new(2, 1, c.clone()), &p).unwrap();
        assert_eq!(pred.case, LemmaCase::SpecialFamily { m: 1 });
        assert_eq!(pred.structural, 7);
        let spec = SequenceSpec::Paper(p.clone());
        assert_eq!(count_in_block(&spec, 2, &EquationParams::new(2, 1, c)).unwrap(), 7);

        let pred = predicted_count_paper(2, &EquationParams::new(3, 1, 17u32), &p).unwrap();
        assert_eq!(pred.case, LemmaCase::NonDyadicRatio);
        assert_eq!(pred.sporadic_scale, 1);
        let pred = predicted_count_paper(2, &EquationParams::new(2, 1, 1u32), &p).unwrap();
        assert_eq!(pred.case, LemmaCase::Generic);
        assert_eq!(pred.sporadic_scale, 4);
        assert!(matches!(
            predicted_count_paper(2, &EquationParams::new(2, 2, 1u32), &p),
            Err(Error::InvalidCase(_))
        ));
    }

    #[test]
    fn dyadic_exponents() {
        assert_eq!(dyadic_ratio_exponent(8, 2), Some(2));
        assert_eq!(dyadic_ratio_exponent(2, 8), Some(-2));
        assert_eq!(dyadic_ratio_exponent(3, 1), None);
        assert_eq!(dyadic_ratio_exponent(6, 4), None);
        assert_eq!(dyadic_ratio_exponent(5, 5), Some(0));
    }

    #[test]
    fn symbolic_matches_materialized_in_block_counts() {
        let p = reduced(4);
        let spec = SequenceSpec::Paper(p.clone());
        for i in 1..=4 {
            for (a, b) in [(2u64, 1u64), (1, 2), (4, 1), (1, 4), (6, 3), (3, 12)] {
                let g = a.min(b);
                let t = p.tower_exponent(i).unwrap();
                for reduced_c in [0i64, 1, 2, 3, 5, 7, 31, 33, 64, 96, 1 << 20, (1 << 21) + 1] {
                    let c = (BigUint::from(reduced_c as u64) * g) << t;
                    let want = count_in_block(&spec, i, &EquationParams::new(a, b, c)).unwrap();
                    let got = count_in_block_symbolic(&p, i, a, b, &BigInt::from(reduced_c)).unwrap();
                    assert_eq!(got, want, "i={i} a={a} b={b} c'={reduced_c}");
                }
            }
        }
    }

    #[test]
    fn symbolic_handles_unrepresentable_tower() {
        let p = ConstructionParams::new(4, Ratio::new(1, 2), 2, Ratio::from_integer(1), TowerSpec::PaperTower).unwrap();
        // block 3 has T(3) = 2^81 bits; the reduced rhs m·(2^r−1) is still tiny
        for sub in p.subblocks(3).unwrap() {
            let got = count_in_block_symbolic(&p, 3, 2, 1, &BigInt::from(sub.m)).unwrap();
            assert_eq!(got, sub.len() - 1);
        }
        assert!(count_in_block_symbolic(&p, 3, 3, 1, &BigInt::from(1)).is_err());
    }

    #[test]
    fn reduce_rhs_divisibility() {
        let p = reduced(4);
        let c = special_rhs(2, 2, 1, 1, &p).unwrap();
        assert_eq!(reduce_rhs(&c, 2, 2, 1, &p).unwrap(), Some(BigInt::from(2)));
        assert_eq!(reduce_rhs(&BigUint::from(3u32), 2, 2, 1, &p).unwrap(), None);
    }

    #[test]
    fn profile_csv_format() {
        let rows = diophantine_profile(&SequenceSpec::ErdosFortet, 1, 2, &[10], 0.5, DEFAULT_PAIR_BUDGET).unwrap();
        assert_eq!(rows[0].l_star, 9);
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(PROFILE_CSV_HEADER));
        assert_eq!(lines.next(), Some("10,1,2,1,9,1.36568441645"));
    }
}
