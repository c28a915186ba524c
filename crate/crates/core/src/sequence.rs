//! Lacunary sequences: the classical families and the block / sub-block /
//! tower construction.
//!
//! Indices are 1-based throughout. For the block construction the index set
//! is split into consecutive blocks `Δ_i` with `#Δ_i = R^i`, each block into
//! `M(i) = ⌈i^{1-ε}⌉` contiguous sub-blocks, and the term with index `k` in
//! sub-block `m` of block `i` is `2^{T(i)} · (2^k + m)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact non-negative rational used for `ε` and `K`.
pub type Rational = Ratio<u64>;

/// Default cap on the bit-length of any materialized term.
pub const DEFAULT_BIT_CAP: u64 = 1 << 24;

/// Parses `"1/2"`, `"0.25"` or `"3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse '{s}' as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10u64.pow(frac.len() as u32);
        let num = int
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac.parse::<u64>().ok()?))
            .ok_or_else(bad)?;
        return Ok(Ratio::new(num, den));
    }
    Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?))
}

fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Smallest integer `M` with `M ≥ i^{num/den}`, i.e. `M^den ≥ i^num`.
///
/// The floating estimate is trusted unless it lands within `1e-6` of an
/// integer; then the candidates are settled by exact integer powers.
pub fn ceil_rational_power(i: u64, num: u64, den: u64) -> u64 {
    assert!(den > 0 && i > 0);
    if num == 0 || i == 1 {
        return 1;
    }
    let v = (i as f64).powf(num as f64 / den as f64);
    let nearest = v.round();
    if (v - nearest).abs() > 1e-6 {
        return v.ceil() as u64;
    }
    let target = BigUint::from(i).pow(num as u32);
    let reaches = |m: u64| BigUint::from(m).pow(den as u32) >= target;
    let mut m = (nearest as u64).max(1);
    while m > 1 && reaches(m - 1) {
        m -= 1;
    }
    while !reaches(m) {
        m += 1;
    }
    m
}

/// Tower prefactor rule `T(i)`: every term of block `i` is a multiple of `2^{T(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TowerSpec {
    /// `T(i) = 2^{i^4}`; only representable for `i ≤ 2`.
    PaperTower,
    /// `T(1) = N(1) + 1`, `T(i) = T(i-1) + N(i-1) + i²`.
    ReducedTower,
    /// `T(i) = table[i-1]`, strictly increasing.
    ExplicitTable(Vec<u64>),
}

impl fmt::Display for TowerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerSpec::PaperTower => write!(f, "paper"),
            TowerSpec::ReducedTower => write!(f, "reduced"),
            TowerSpec::ExplicitTable(t) => {
                let parts: Vec<String> = t.iter().map(u64::to_string).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
        }
    }
}

/// One block `Δ_i = {lo, ..., hi}` of the index partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub i: u32,
    pub lo: u64,
    pub hi: u64,
}

impl Block {
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: u64) -> bool {
        self.lo <= k && k <= self.hi
    }
}

/// Sub-block `Δ_i^{(m)} = {lo, ..., hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubBlock {
    pub m: u64,
    pub lo: u64,
    pub hi: u64,
}

impl SubBlock {
    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: u64) -> bool {
        self.lo <= k && k <= self.hi
    }
}

/// Block bounds `((R^i - R)/(R-1) + 1, (R^{i+1} - R)/(R-1))`.
pub fn block_bounds(i: u32, r: u64) -> Result<(u64, u64)> {
    if i == 0 || r < 3 {
        return Err(Error::InvalidParameter(format!(
            "block bounds need i >= 1 and R >= 3 (got i={i}, R={r})"
        )));
    }
    let overflow = || Error::IndexOverflow(format!("block {i} with R={r} exceeds u64 indices"));
    let r128 = r as u128;
    let pow_i = r128.checked_pow(i).ok_or_else(overflow)?;
    let pow_next = pow_i.checked_mul(r128).ok_or_else(overflow)?;
    let lo = (pow_i - r128) / (r128 - 1) + 1;
    let hi = (pow_next - r128) / (r128 - 1);
    Ok((
        u64::try_from(lo).map_err(|_| overflow())?,
        u64::try_from(hi).map_err(|_| overflow())?,
    ))
}

/// Non-fatal parameter conditions that the asymptotic argument relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamWarning {
    /// `R > 8/ε` fails.
    GrowthBaseTooSmall { r: u64, bound: f64 },
    /// `d√ε/4 - 2 > K√d/√2` fails.
    DegreeTooSmall { lhs: f64, rhs: f64 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::GrowthBaseTooSmall { r, bound } => {
                write!(f, "R = {r} does not exceed 8/eps = {bound:.4}")
            }
            ParamWarning::DegreeTooSmall { lhs, rhs } => write!(
                f,
                "degree condition d*sqrt(eps)/4 - 2 = {lhs:.4} does not exceed K*sqrt(d/2) = {rhs:.4}"
            ),
        }
    }
}

/// Parameters of the block construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Block growth base `R ≥ 3`.
    pub r: u64,
    /// `ε ∈ (0,1)`.
    pub eps: Rational,
    /// Degree `d ≥ 1` of the polynomial `Σ_{j<d} cos(2π 2^j x)`.
    pub d: u32,
    /// Target LIL constant `K > 0`.
    pub target_k: Rational,
    pub tower: TowerSpec,
    /// Largest bit-length a materialized term may have.
    pub bit_cap: u64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        let eps = Ratio::new(1, 2);
        ConstructionParams {
            r: 9,
            eps,
            d: default_degree(&eps),
            target_k: Ratio::from_integer(1),
            tower: TowerSpec::ReducedTower,
            bit_cap: DEFAULT_BIT_CAP,
        }
    }
}

/// `21·⌈1/ε⌉`, enough for the degree condition with `K = 1`.
pub fn default_degree(eps: &Rational) -> u32 {
    let inv = eps.recip().ceil().to_integer();
    (21 * inv).min(u32::MAX as u64) as u32
}

impl ConstructionParams {
    pub fn new(r: u64, eps: Rational, d: u32, target_k: Rational, tower: TowerSpec) -> Result<Self> {
        let p = ConstructionParams {
            r,
            eps,
            d,
            target_k,
            tower,
            bit_cap: DEFAULT_BIT_CAP,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_bit_cap(mut self, cap: u64) -> Self {
        self.bit_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 3 {
            return Err(Error::InvalidParameter(format!("R must be >= 3, got {}", self.r)));
        }
        if self.eps.is_zero() || self.eps >= Ratio::one() {
            return Err(Error::InvalidParameter(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        if self.target_k.is_zero() {
            return Err(Error::InvalidParameter("K must be > 0".into()));
        }
        if let TowerSpec::ExplicitTable(t) = &self.tower {
            if t.is_empty() || t.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(
                    "explicit tower table must be non-empty and strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Conditions `R > 8/ε` and `d√ε/4 - 2 > K√d/√2`, reported rather than enforced.
    pub fn warnings(&self) -> Vec<ParamWarning> {
        let eps = rational_to_f64(&self.eps);
        let k = rational_to_f64(&self.target_k);
        let d = self.d as f64;
        let mut out = Vec::new();
        // R > 8/ε  <=>  R·num > 8·den
        if (self.r as u128) * (*self.eps.numer() as u128) <= 8 * (*self.eps.denom() as u128) {
            out.push(ParamWarning::GrowthBaseTooSmall { r: self.r, bound: 8.0 / eps });
        }
        let lhs = d * eps.sqrt() / 4.0 - 2.0;
        let rhs = k * d.sqrt() / std::f64::consts::SQRT_2;
        if lhs <= rhs {
            out.push(ParamWarning::DegreeTooSmall { lhs, rhs });
        }
        out
    }

    pub fn eps_f64(&self) -> f64 {
        rational_to_f64(&self.eps)
    }

    /// `M(i) = ⌈i^{1-ε}⌉`, computed exactly.
    pub fn subblock_count(&self, i: u32) -> u64 {
        let (p, q) = (*self.eps.numer(), *self.eps.denom());
        ceil_rational_power(i as u64, q - p, q)
    }

    pub fn block(&self, i: u32) -> Result<Block> {
        let (lo, hi) = block_bounds(i, self.r)?;
        Ok(Block { i, lo, hi })
    }

    /// `N(i)`, the last index of block `i`.
    pub fn block_end(&self, i: u32) -> Result<u64> {
        Ok(block_bounds(i, self.r)?.1)
    }

    pub fn subblocks(&self, i: u32) -> Result<Vec<SubBlock>> {
        subblock_partition(i, self)
    }

    /// Block containing index `k`.
    pub fn block_of(&self, k: u64) -> Result<Block> {
        if k == 0 {
            return Err(Error::InvalidParameter("indices start at 1".into()));
        }
        let mut i = 1;
        loop {
            let b = self.block(i)?;
            if b.contains(k) {
                return Ok(b);
            }
            i += 1;
        }
    }

    /// Tower exponent `T(i)`.
    pub fn tower_exponent(&self, i: u32) -> Result<u64> {
        if i == 0 {
            return Err(Error::InvalidParameter("block indices start at 1".into()));
        }
        match &self.tower {
            TowerSpec::PaperTower => {
                let e = (i as u64).pow(4);
                if e >= 64 {
                    let k = self.block(i).map(|b| b.lo).unwrap_or(u64::MAX);
                    return Err(Error::TowerOverflow {
                        k,
                        bits: u128::MAX,
                        cap: self.bit_cap,
                    });
                }
                Ok(1u64 << e)
            }
            TowerSpec::ReducedTower => {
                let mut t = self.block_end(1)? + 1;
                for h in 2..=i {
                    t = t
                        .checked_add(self.block_end(h - 1)?)
                        .and_then(|v| v.checked_add((h as u64) * (h as u64)))
                        .ok_or_else(|| Error::IndexOverflow(format!("T({h}) exceeds u64")))?;
                }
                Ok(t)
            }
            TowerSpec::ExplicitTable(t) => t.get(i as usize - 1).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("explicit tower table has no entry for block {i}"))
            }),
        }
    }

    /// Symbolic position `(i, m, k)` of index `k`.
    pub fn locate(&self, k: u64) -> Result<SymbolicTerm> {
        term_symbolic(k, self)
    }
}

/// Splits `Δ_i` into `M(i)` contiguous sub-blocks whose sizes differ by at
/// most one; the first `R^i mod M(i)` sub-blocks take the extra element.
pub fn subblock_partition(i: u32, params: &ConstructionParams) -> Result<Vec<SubBlock>> {
    let block = params.block(i)?;
    let count = params.subblock_count(i);
    let base = block.len() / count;
    let extra = block.len() % count;
    let mut out = Vec::with_capacity(count as usize);
    let mut lo = block.lo;
    for m in 1..=count {
        let size = base + u64::from(m <= extra);
        out.push(SubBlock { m, lo, hi: lo + size - 1 });
        lo += size;
    }
    debug_assert_eq!(lo, block.hi + 1);
    Ok(out)
}

/// Position of an index inside the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicTerm {
    pub i: u32,
    pub m: u64,
    pub k: u64,
}

impl SymbolicTerm {
    /// `ν_k = 2^k + m`, the term with the tower factor removed.
    pub fn reduced_value(&self) -> BigUint {
        (BigUint::one() << self.k) + BigUint::from(self.m)
    }
}

pub fn term_symbolic(k: u64, params: &ConstructionParams) -> Result<SymbolicTerm> {
    let block = params.block_of(k)?;
    let sub = subblock_partition(block.i, params)?
        .into_iter()
        .find(|s| s.contains(k))
        .expect("sub-blocks cover the block");
    Ok(SymbolicTerm { i: block.i, m: sub.m, k })
}

/// Which lacunary sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceSpec {
    /// `n_k = q^k`.
    Geometric { q: u64 },
    /// `n_k = 2^k - 1`.
    ErdosFortet,
    /// The block / sub-block / tower construction.
    Paper(ConstructionParams),
    /// Explicit strictly increasing positive terms.
    Explicit(Vec<BigUint>),
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceSpec::Geometric { q } if *q < 2 => Err(Error::InvalidParameter(format!(
                "geometric base must be >= 2, got {q}"
            ))),
            SequenceSpec::Paper(p) => p.validate(),
            SequenceSpec::Explicit(v) => {
                if v.first().is_some_and(Zero::is_zero) {
                    return Err(Error::InvalidParameter("terms must be positive".into()));
                }
                match v.windows(2).position(|w| w[0] >= w[1]) {
                    Some(idx) => Err(Error::NotIncreasing { index: idx + 1 }),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    pub fn bit_cap(&self) -> u64 {
        match self {
            SequenceSpec::Paper(p) => p.bit_cap,
            _ => DEFAULT_BIT_CAP,
        }
    }

    pub fn params(&self) -> Option<&ConstructionParams> {
        match self {
            SequenceSpec::Paper(p) => Some(p),
            _ => None,
        }
    }

    pub fn term(&self, k: u64) -> Result<BigUint> {
        term_value(k, self)
    }

    pub fn prefix(&self, n: u64) -> Result<Vec<BigUint>> {
        sequence_prefix(n, self)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SequenceSpec::Geometric { .. } => "geometric",
            SequenceSpec::ErdosFortet => "erdos-fortet",
            SequenceSpec::Paper(_) => "paper",
            SequenceSpec::Explicit(_) => "explicit",
        }
    }
}

fn check_bits(k: u64, bits: u128, cap: u64) -> Result<()> {
    if bits > cap as u128 {
        Err(Error::TowerOverflow { k, bits, cap })
    } else {
        Ok(())
    }
}

/// Exact value of `n_k`.
pub fn term_value(k: u64, spec: &SequenceSpec) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidParameter("indices start at 1".into()));
    }
    let cap = spec.bit_cap();
    match spec {
        SequenceSpec::Geometric { q } => {
            let bits = (k as f64 * (*q as f64).log2()).ceil() as u128 + 1;
            check_bits(k, bits, cap)?;
            let exp = u32::try_from(k).map_err(|_| Error::IndexOverflow(format!("k = {k}")))?;
            Ok(BigUint::from(*q).pow(exp))
        }
        SequenceSpec::ErdosFortet => {
            check_bits(k, k as u128, cap)?;
            Ok((BigUint::one() << k) - 1u32)
        }
        SequenceSpec::Paper(params) => {
            let sym = term_symbolic(k, params)?;
            let t = match params.tower_exponent(sym.i) {
                Ok(t) => t,
                Err(Error::TowerOverflow { bits, .. }) => {
                    return Err(Error::TowerOverflow { k, bits, cap })
                }
                Err(e) => return Err(e),
            };
            check_bits(k, t as u128 + k as u128 + 1, cap)?;
            Ok(sym.reduced_value() << t)
        }
        SequenceSpec::Explicit(terms) => terms.get(k as usize - 1).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!("explicit sequence has only {} terms", terms.len()))
        }),
    }
}

/// `[n_1, ..., n_N]`.
pub fn sequence_prefix(n: u64, spec: &SequenceSpec) -> Result<Vec<BigUint>> {
    if n == 0 {
        return Err(Error::InvalidParameter("prefix length must be >= 1".into()));
    }
    (1..=n).map(|k| term_value(k, spec)).collect()
}

/// `min_k n_{k+1} / n_k` as an exact rational.
pub fn hadamard_min_ratio(prefix: &[BigUint]) -> Result<BigRational> {
    if prefix.len() < 2 {
        return Err(Error::InvalidParameter("need at least two terms".into()));
    }
    let mut best: Option<BigRational> = None;
    for (idx, w) in prefix.windows(2).enumerate() {
        if w[1] <= w[0] || w[0].is_zero() {
            return Err(Error::NotIncreasing { index: idx + 1 });
        }
        let ratio = BigRational::new(w[1].clone().into(), w[0].clone().into());
        if best.as_ref().is_none_or(|b| ratio < *b) {
            best = Some(ratio);
        }
    }
    Ok(best.expect("non-empty"))
}

/// Checks `min_{k∈Δ_i} n_k > 2^i · max_{ℓ∈Δ_{i-1}} n_ℓ`.
pub fn tower_separation_holds(params: &ConstructionParams, i: u32) -> Result<bool> {
    if i < 2 {
        return Ok(true);
    }
    let spec = SequenceSpec::Paper(params.clone());
    let lo = term_value(params.block(i)?.lo, &spec)?;
    let prev_hi = term_value(params.block(i - 1)?.hi, &spec)?;
    Ok(lo > (prev_hi << i))
}

/// Writes a prefix as newline-delimited decimal integers.
pub fn write_prefix<W: Write>(mut w: W, prefix: &[BigUint]) -> std::io::Result<()> {
    for n in prefix {
        writeln!(w, "{n}")?;
    }
    Ok(())
}

impl FromStr for TowerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(TowerSpec::PaperTower),
            "reduced" => Ok(TowerSpec::ReducedTower),
            other => {
                let list = other.strip_prefix("explicit:").ok_or_else(|| {
                    Error::InvalidParameter(format!("unknown tower rule '{other}'"))
                })?;
                let table = list
                    .split(',')
                    .map(|v| v.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::InvalidParameter(format!("bad tower table '{list}'")))?;
                Ok(TowerSpec::ExplicitTable(table))
            }
        }
    }
}

/// Approximate `n_{k+1}/n_k` as `f64`, for reporting.
pub fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: u64, eps: (u64, u64), tower: TowerSpec) -> ConstructionParams {
        ConstructionParams::new(r, Ratio::new(eps.0, eps.1), 2, Ratio::from_integer(1), tower).unwrap()
    }

    #[test]
    fn block_bounds_examples() {
        assert_eq!(block_bounds(1, 9).unwrap(), (1, 9));
        assert_eq!(block_bounds(2, 9).unwrap(), (10, 90));
        assert_eq!(block_bounds(3, 4).unwrap(), (21, 84));
        assert!(block_bounds(0, 4).is_err());
        assert!(block_bounds(1, 2).is_err());
        assert!(matches!(block_bounds(60, 9), Err(Error::IndexOverflow(_))));
    }

    #[test]
    fn subblock_examples() {
        let p = params(9, (1, 2), TowerSpec::PaperTower);
        assert_eq!(subblock_partition(1, &p).unwrap(), vec![SubBlock { m: 1, lo: 1, hi: 9 }]);
        let p4 = params(4, (1, 2), TowerSpec::ReducedTower);
        let sizes: Vec<u64> = subblock_partition(4, &p4).unwrap().iter().map(SubBlock::len).collect();
        assert_eq!(sizes, vec![128, 128]);
        let sizes: Vec<u64> = subblock_partition(5, &p4).unwrap().iter().map(SubBlock::len).collect();
        assert_eq!(sizes, vec![342, 341, 341]);
        for s in sizes {
            assert!((s as f64 - 1024.0 / 3.0).abs() <= 1.0);
        }
    }

    #[test]
    fn subblock_count_is_exact_ceiling() {
        let p = params(9, (1, 2), TowerSpec::ReducedTower);
        let expected = [1u64, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 5];
        for (i, &m) in expected.iter().enumerate() {
            assert_eq!(p.subblock_count(i as u32 + 1), m, "i = {}", i + 1);
        }
        // perfect powers sit exactly on the guard branch
        assert_eq!(ceil_rational_power(27, 2, 3), 9);
        assert_eq!(ceil_rational_power(28, 2, 3), 10);
        assert_eq!(ceil_rational_power(16, 1, 2), 4);
        assert_eq!(ceil_rational_power(17, 1, 2), 5);
    }

    #[test]
    fn term_value_examples() {
        let p = params(9, (1, 2), TowerSpec::PaperTower);
        let spec = SequenceSpec::Paper(p);
        assert_eq!(term_value(1, &spec).unwrap(), BigUint::from(12u32));
        let n10 = term_value(10, &spec).unwrap();
        assert_eq!(n10, BigUint::from(1025u32) << 65536u32);
        assert_eq!(n10.bits(), 65536 + 11);
        assert_eq!(term_value(5, &SequenceSpec::ErdosFortet).unwrap(), BigUint::from(31u32));
    }

    #[test]
    fn paper_tower_overflows_at_block_three() {
        let spec = SequenceSpec::Paper(params(9, (1, 2), TowerSpec::PaperTower));
        assert!(matches!(term_value(91, &spec), Err(Error::TowerOverflow { k: 91, .. })));
        let capped = SequenceSpec::Paper(params(9, (1, 2), TowerSpec::PaperTower).with_bit_cap(1000));
        assert!(matches!(term_value(10, &capped), Err(Error::TowerOverflow { .. })));
    }

    #[test]
    fn symbolic_examples() {
        let p = params(9, (1, 2), TowerSpec::PaperTower);
        assert_eq!(term_symbolic(1, &p).unwrap(), SymbolicTerm { i: 1, m: 1, k: 1 });
        assert_eq!(term_symbolic(50, &p).unwrap(), SymbolicTerm { i: 2, m: 1, k: 50 });
        assert_eq!(term_symbolic(51, &p).unwrap(), SymbolicTerm { i: 2, m: 2, k: 51 });
        assert_eq!(term_symbolic(90, &p).unwrap(), SymbolicTerm { i: 2, m: 2, k: 90 });
        assert_eq!(term_symbolic(10, &p).unwrap().m, 1);
    }

    #[test]
    fn prefix_examples() {
        let two = |v: &[u32]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert_eq!(sequence_prefix(4, &SequenceSpec::Geometric { q: 2 }).unwrap(), two(&[2, 4, 8, 16]));
        assert_eq!(sequence_prefix(3, &SequenceSpec::ErdosFortet).unwrap(), two(&[1, 3, 7]));
        let spec = SequenceSpec::Paper(params(9, (1, 2), TowerSpec::PaperTower));
        assert_eq!(
            sequence_prefix(9, &spec).unwrap(),
            two(&[12, 20, 36, 68, 132, 260, 516, 1028, 2052])
        );
    }

    #[test]
    fn hadamard_examples() {
        let two = |v: &[u32]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert_eq!(
            hadamard_min_ratio(&two(&[2, 4, 8, 16])).unwrap(),
            BigRational::from_integer(2.into())
        );
        assert_eq!(
            hadamard_min_ratio(&two(&[1, 3, 7, 15, 31])).unwrap(),
            BigRational::new(31.into(), 15.into())
        );
        assert!(matches!(hadamard_min_ratio(&two(&[1, 3, 3])), Err(Error::NotIncreasing { index: 2 })));
        assert!(hadamard_min_ratio(&two(&[5])).is_err());
    }

    #[test]
    fn reduced_tower_values() {
        let p = params(4, (1, 2), TowerSpec::ReducedTower);
        let t: Vec<u64> = (1..=5).map(|i| p.tower_exponent(i).unwrap()).collect();
        assert_eq!(t, vec![5, 13, 42, 142, 507]);
        for i in 2..=5 {
            assert!(tower_separation_holds(&p, i).unwrap());
        }
    }

    #[test]
    fn explicit_tower_table() {
        let p = params(4, (1, 2), TowerSpec::ExplicitTable(vec![10, 40]));
        assert_eq!(p.tower_exponent(2).unwrap(), 40);
        assert!(p.tower_exponent(3).is_err());
        assert!(ConstructionParams::new(
            4,
            Ratio::new(1, 2),
            2,
            Ratio::from_integer(1),
            TowerSpec::ExplicitTable(vec![3, 3])
        )
        .is_err());
    }

    #[test]
    fn warnings_follow_conditions() {
        let p = ConstructionParams::default();
        assert_eq!(p.d, 42);
        let w = p.warnings();
        assert!(w.iter().any(|w| matches!(w, ParamWarning::GrowthBaseTooSmall { .. })));
        assert!(!w.iter().any(|w| matches!(w, ParamWarning::DegreeTooSmall { .. })));
        let ok = ConstructionParams { r: 17, ..ConstructionParams::default() };
        assert!(ok.warnings().is_empty());
        let small_d = ConstructionParams { r: 17, d: 4, ..ConstructionParams::default() };
        assert_eq!(small_d.warnings().len(), 1);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_rational("3").unwrap(), Ratio::from_integer(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!("explicit:1,5,9".parse::<TowerSpec>().unwrap(), TowerSpec::ExplicitTable(vec![1, 5, 9]));
    }

    #[test]
    fn explicit_sequence_validation() {
        let s = SequenceSpec::Explicit(vec![1u32.into(), 4u32.into(), 4u32.into()]);
        assert!(matches!(s.validate(), Err(Error::NotIncreasing { index: 2 })));
        assert!(SequenceSpec::Geometric { q: 1 }.validate().is_err());
    }
}
