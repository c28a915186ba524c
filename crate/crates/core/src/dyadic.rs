//! Exact dyadic points, trigonometric polynomials and lacunary sums.
//!
//! A point is `x = X / 2^P`. Products `n·x mod 1` are reduced on the integer
//! `n·X` before any floating point is involved, so arbitrarily large
//! frequencies cost no accuracy. Frequencies that are short signed sums of
//! powers of two (`2^k - 1`, `2^{T+k} + m·2^T`, ...) also have a fast path that
//! reads 64-bit windows of `X` directly; it agrees with the exact path up to a
//! few units of `2^-64` in the phase.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{term_value, ConstructionParams, SequenceSpec};

const TWO_POW_M64: f64 = 1.0 / 18_446_744_073_709_551_616.0;

/// Guard bits added on top of the largest frequency when choosing `P`.
pub const GUARD_BITS: u64 = 64;

/// `x = X / 2^P` with `0 <= X < 2^P`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicPoint {
    x: BigUint,
    p: u64,
}

impl DyadicPoint {
    pub fn new(x: BigUint, p: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("precision must be >= 1 bit".into()));
        }
        if x.bits() > p {
            return Err(Error::InvalidParameter(format!("numerator needs {} bits, precision is {p}", x.bits())));
        }
        Ok(DyadicPoint { x, p })
    }

    pub fn zero(p: u64) -> Self {
        DyadicPoint { x: BigUint::zero(), p: p.max(1) }
    }

    /// `⌊2^P · num/den⌋ / 2^P`, the dyadic point just below `num/den mod 1`.
    pub fn from_ratio_floor(num: u64, den: u64, p: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let x = (BigUint::from(num % den) << p) / den;
        DyadicPoint::new(x, p)
    }

    /// The top `p` bits of an `f64` in `[0, 1)`.
    pub fn from_f64(v: f64, p: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{v} is not in [0, 1)")));
        }
        let bits = v.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        if exp == 0 {
            return Ok(DyadicPoint::zero(p));
        }
        // v = mant · 2^(exp - 1075)
        let mant = BigUint::from((bits & ((1u64 << 52) - 1)) | (1u64 << 52));
        let shift = p as i64 + exp - 1075;
        let x = if shift >= 0 { mant << shift as u64 } else { mant >> (-shift) as u64 };
        DyadicPoint::new(x, p)
    }

    /// Uniform on the grid `{0, 1/2^P, ..., 1 - 1/2^P}`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, p: u64) -> Self {
        let p = p.max(1);
        let words = p.div_ceil(32) as usize;
        let digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
        let mut x = BigUint::new(digits);
        let excess = words as u64 * 32 - p;
        if excess > 0 {
            x >>= excess;
        }
        DyadicPoint { x, p }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.x
    }

    pub fn precision(&self) -> u64 {
        self.p
    }

    pub fn to_f64(&self) -> f64 {
        let top = BitWindow::new(self).window(0);
        top as f64 * TWO_POW_M64
    }

    /// Same value at a higher precision.
    pub fn with_precision(&self, p: u64) -> Result<Self> {
        if p < self.p {
            return Err(Error::InvalidParameter(format!("cannot lower precision {} to {p}", self.p)));
        }
        Ok(DyadicPoint { x: &self.x << (p - self.p), p })
    }

    /// `2^s · x mod 1`.
    pub fn shift(&self, s: u64) -> Self {
        if s >= self.p {
            return DyadicPoint::zero(self.p);
        }
        DyadicPoint { x: mask(&self.x << s, self.p), p: self.p }
    }

    /// `x / 2^t`, exact: same numerator, `t` more bits.
    pub fn div_pow2(&self, t: u64) -> Self {
        DyadicPoint { x: self.x.clone(), p: self.p + t }
    }

    /// `x + 2^{-t} mod 1`; needs `t <= P`.
    pub fn add_pow2_neg(&self, t: u64) -> Result<Self> {
        if t == 0 || t > self.p {
            return Err(Error::InvalidParameter(format!("2^-{t} is not on the 2^-{} grid", self.p)));
        }
        let x = mask(&self.x + (BigUint::one() << (self.p - t)), self.p);
        Ok(DyadicPoint { x, p: self.p })
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.x.clone()), BigInt::one() << self.p)
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.x, self.p)
    }
}

fn mask(v: BigUint, p: u64) -> BigUint {
    if v.bits() <= p {
        v
    } else {
        v & ((BigUint::one() << p) - 1u32)
    }
}

/// `(n·X mod 2^P) / 2^P`, exact.
pub fn frac_part_mul(n: &BigUint, x: &DyadicPoint) -> DyadicPoint {
    DyadicPoint { x: mask(n * &x.x, x.p), p: x.p }
}

/// Bit-length of the largest frequency plus [`GUARD_BITS`].
pub fn working_precision(max_frequency: &BigUint) -> u64 {
    max_frequency.bits() + GUARD_BITS
}

/// Limbs of a point's numerator, indexed for cheap 64-bit windows.
#[derive(Debug, Clone)]
pub struct BitWindow {
    limbs: Vec<u64>,
    p: u64,
}

impl BitWindow {
    pub fn new(x: &DyadicPoint) -> Self {
        BitWindow { limbs: x.x.to_u64_digits(), p: x.p }
    }

    fn limb(&self, i: usize) -> u64 {
        self.limbs.get(i).copied().unwrap_or(0)
    }

    fn bits_from(&self, start: i64) -> u64 {
        if start >= 0 {
            let idx = (start / 64) as usize;
            let sh = start % 64;
            let lo = self.limb(idx) >> sh;
            if sh == 0 {
                lo
            } else {
                lo | (self.limb(idx + 1) << (64 - sh))
            }
        } else if start > -64 {
            self.limb(0) << (-start)
        } else {
            0
        }
    }

    /// `⌊2^64 · frac(2^e · x)⌋`; `e` may be negative.
    pub fn window(&self, e: i64) -> u64 {
        let hi = self.p as i64 - e;
        if hi <= 0 {
            return 0;
        }
        self.bits_from(hi - 64)
    }
}

/// A frequency `Σ c·2^e` with small integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SparseFrequency(pub Vec<(i64, i64)>);

impl SparseFrequency {
    pub fn pow2(e: i64) -> Self {
        SparseFrequency(vec![(1, e)])
    }

    pub fn term(c: i64, e: i64) -> Self {
        SparseFrequency(vec![(c, e)])
    }

    /// Binary expansion of `n`.
    pub fn from_biguint(n: &BigUint) -> Self {
        SparseFrequency((0..n.bits()).filter(|&b| n.bit(b)).map(|b| (1, b as i64)).collect())
    }

    pub fn plus(mut self, c: i64, e: i64) -> Self {
        self.0.push((c, e));
        self
    }

    /// Product of the two sums; `None` on coefficient or exponent overflow.
    pub fn mul(&self, other: &SparseFrequency) -> Option<SparseFrequency> {
        let mut out = Vec::with_capacity(self.0.len() * other.0.len());
        for &(c1, e1) in &self.0 {
            for &(c2, e2) in &other.0 {
                out.push((c1.checked_mul(c2)?, e1.checked_add(e2)?));
            }
        }
        Some(SparseFrequency(out))
    }

    /// `⌊2^64 · frac(F·x)⌋` up to `Σ|c|` units.
    pub fn phase(&self, w: &BitWindow) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &(c, e)| acc.wrapping_add((c as u64).wrapping_mul(w.window(e))))
    }

    /// Exact value, `None` when some exponent is negative.
    pub fn to_bigint(&self) -> Option<BigInt> {
        let mut v = BigInt::zero();
        for &(c, e) in &self.0 {
            if e < 0 {
                return None;
            }
            v += BigInt::from(c) << e as u64;
        }
        Some(v)
    }
}

/// `cos(2π·t)` for a phase `t = phase / 2^64`.
pub fn cos_turns(phase: u64) -> f64 {
    (std::f64::consts::TAU * (phase as i64) as f64 * TWO_POW_M64).cos()
}

/// `sin(2π·t)` for a phase `t = phase / 2^64`.
pub fn sin_turns(phase: u64) -> f64 {
    (std::f64::consts::TAU * (phase as i64) as f64 * TWO_POW_M64).sin()
}

fn phase_of(frac: &DyadicPoint) -> u64 {
    BitWindow::new(frac).window(0)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Sum with a fixed pairwise tree over chunks of 64; the result depends only
/// on the slice, never on how it was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        return xs.iter().copied().collect::<CompensatedSum>().value();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: BigRational,
    pub frequency: BigUint,
    pub kind: TrigKind,
}

/// `Σ amplitude · cos/sin(2π · frequency · x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolySpec {
    pub terms: Vec<TrigTerm>,
}

impl TrigPolySpec {
    pub fn new(terms: Vec<TrigTerm>) -> Result<Self> {
        let f = TrigPolySpec { terms };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidParameter("trigonometric polynomial has no terms".into()));
        }
        if self.terms.iter().any(|t| t.frequency.is_zero()) {
            return Err(Error::InvalidParameter("frequencies must be positive".into()));
        }
        Ok(())
    }

    pub fn cosine(freq: u64) -> Self {
        TrigPolySpec {
            terms: vec![TrigTerm { amplitude: BigRational::one(), frequency: freq.into(), kind: TrigKind::Cos }],
        }
    }

    /// `Σ_{j=0}^{d-1} cos(2π 2^j x)`.
    pub fn dyadic_polynomial(d: u32) -> Self {
        TrigPolySpec {
            terms: (0..d.max(1))
                .map(|j| TrigTerm {
                    amplitude: BigRational::one(),
                    frequency: BigUint::one() << j,
                    kind: TrigKind::Cos,
                })
                .collect(),
        }
    }

    /// `cos(2πx) + cos(4πx)`.
    pub fn erdos_fortet() -> Self {
        TrigPolySpec::dyadic_polynomial(2)
    }

    fn amplitudes_f64(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.amplitude.to_f64().unwrap_or(f64::NAN)).collect()
    }

    fn sparse_terms(&self) -> Vec<SparseFrequency> {
        self.terms.iter().map(|t| SparseFrequency::from_biguint(&t.frequency)).collect()
    }

    pub fn max_frequency(&self) -> BigUint {
        self.terms.iter().map(|t| t.frequency.clone()).max().unwrap_or_default()
    }
}

impl fmt::Display for TrigPolySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, t) in self.terms.iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            let kind = match t.kind {
                TrigKind::Cos => "cos",
                TrigKind::Sin => "sin",
            };
            write!(f, "{}·{kind}(2π·{}x)", t.amplitude, t.frequency)?;
        }
        Ok(())
    }
}

/// `"poly:D"`, `"erdos-fortet"`, `"cos:F"` or `"sin:F"`.
impl FromStr for TrigPolySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown function {s:?} (poly:D, erdos-fortet, cos:F, sin:F)"));
        let s = s.trim();
        if s == "erdos-fortet" {
            return Ok(TrigPolySpec::erdos_fortet());
        }
        let (head, arg) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "poly" => {
                let d: u32 = arg.parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(Error::InvalidParameter("degree must be >= 1".into()));
                }
                Ok(TrigPolySpec::dyadic_polynomial(d))
            }
            "cos" | "sin" => {
                let freq: BigUint = arg.parse().map_err(|_| bad())?;
                let kind = if head == "cos" { TrigKind::Cos } else { TrigKind::Sin };
                TrigPolySpec::new(vec![TrigTerm { amplitude: BigRational::one(), frequency: freq, kind }])
            }
            _ => Err(bad()),
        }
    }
}

/// `f(x)`, reducing every `frequency·x` exactly before the transcendental call.
pub fn eval_trig_poly(f: &TrigPolySpec, x: &DyadicPoint) -> f64 {
    let amps = f.amplitudes_f64();
    f.terms
        .iter()
        .zip(amps)
        .map(|(t, a)| {
            let ph = phase_of(&frac_part_mul(&t.frequency, x));
            a * match t.kind {
                TrigKind::Cos => cos_turns(ph),
                TrigKind::Sin => sin_turns(ph),
            }
        })
        .collect::<CompensatedSum>()
        .value()
}

fn eval_sparse(f: &TrigPolySpec, amps: &[f64], fs: &[SparseFrequency], n: &SparseFrequency, w: &BitWindow) -> Option<f64> {
    let mut acc = CompensatedSum::new();
    for ((t, a), g) in f.terms.iter().zip(amps).zip(fs) {
        let ph = g.mul(n)?.phase(w);
        acc.add(
            a * match t.kind {
                TrigKind::Cos => cos_turns(ph),
                TrigKind::Sin => sin_turns(ph),
            },
        );
    }
    Some(acc.value())
}

/// `Σ_k f(n_k x)` over explicit terms, exact reduction on each product.
pub fn lacunary_sum_terms(f: &TrigPolySpec, terms: &[BigUint], x: &DyadicPoint) -> f64 {
    terms
        .iter()
        .map(|n| eval_trig_poly(f, &frac_part_mul(n, x)))
        .collect::<CompensatedSum>()
        .value()
}

/// `n_1, ..., n_N` as sparse frequencies, when the family allows it.
pub fn sparse_prefix(spec: &SequenceSpec, n: u64) -> Result<Option<Vec<SparseFrequency>>> {
    let cap = spec.bit_cap() as u128;
    match spec {
        SequenceSpec::Geometric { q } if q.is_power_of_two() => {
            let s = q.trailing_zeros() as u128;
            if s * n as u128 > cap {
                return Err(Error::TowerOverflow { k: n, bits: s * n as u128 + 1, cap: cap as u64 });
            }
            Ok(Some((1..=n).map(|k| SparseFrequency::pow2((s * k as u128) as i64)).collect()))
        }
        SequenceSpec::ErdosFortet => {
            if n as u128 > cap {
                return Err(Error::TowerOverflow { k: n, bits: n as u128, cap: cap as u64 });
            }
            Ok(Some((1..=n).map(|k| SparseFrequency::pow2(k as i64).plus(-1, 0)).collect()))
        }
        SequenceSpec::Paper(params) => {
            let mut out = Vec::with_capacity(n.min(1 << 24) as usize);
            let mut i = 1u32;
            'blocks: loop {
                let t = params.tower_exponent(i)?;
                for sub in params.subblocks(i)? {
                    for k in sub.lo..=sub.hi {
                        if k > n {
                            break 'blocks;
                        }
                        let bits = t as u128 + k as u128 + 1;
                        if bits > cap {
                            return Err(Error::TowerOverflow { k, bits, cap: cap as u64 });
                        }
                        out.push(paper_term(t, k, sub.m)?);
                    }
                }
                i += 1;
            }
            Ok(Some(out))
        }
        _ => Ok(None),
    }
}

fn paper_term(t: u64, k: u64, m: u64) -> Result<SparseFrequency> {
    let e = t.checked_add(k).filter(|&e| e <= i64::MAX as u64).ok_or_else(|| Error::IndexOverflow(format!("T + k = {t} + {k}")))?;
    let m = i64::try_from(m).map_err(|_| Error::IndexOverflow(format!("m = {m}")))?;
    Ok(SparseFrequency::pow2(e as i64).plus(m, t as i64))
}

/// `S_N(x) = Σ_{k=1}^N f(n_k x)`.
pub fn lacunary_sum(f: &TrigPolySpec, spec: &SequenceSpec, n: u64, x: &DyadicPoint) -> Result<f64> {
    if let Some(terms) = sparse_prefix(spec, n)? {
        let amps = f.amplitudes_f64();
        let fs = f.sparse_terms();
        let w = BitWindow::new(x);
        let mut acc = CompensatedSum::new();
        let mut ok = true;
        for t in &terms {
            match eval_sparse(f, &amps, &fs, t, &w) {
                Some(v) => acc.add(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(acc.value());
        }
    }
    lacunary_sum_exact(f, spec, n, x)
}

/// Like [`lacunary_sum`] but always through the exact big-integer product.
pub fn lacunary_sum_exact(f: &TrigPolySpec, spec: &SequenceSpec, n: u64, x: &DyadicPoint) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for k in 1..=n {
        let nk = term_value(k, spec)?;
        acc.add(eval_trig_poly(f, &frac_part_mul(&nk, x)));
    }
    Ok(acc.value())
}

/// `[S_1(x), ..., S_N(x)]` through the sparse path; `None` if the sequence or
/// `f` has no sparse form.
pub fn running_sums(f: &TrigPolySpec, spec: &SequenceSpec, n: u64, x: &DyadicPoint) -> Result<Option<Vec<f64>>> {
    let Some(terms) = sparse_prefix(spec, n)? else {
        return Ok(None);
    };
    let amps = f.amplitudes_f64();
    let fs = f.sparse_terms();
    let w = BitWindow::new(x);
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(terms.len());
    for t in &terms {
        let Some(v) = eval_sparse(f, &amps, &fs, t, &w) else {
            return Ok(None);
        };
        acc.add(v);
        out.push(acc.value());
    }
    Ok(Some(out))
}

fn block_sum_with(f: &TrigPolySpec, params: &ConstructionParams, i: u32, x: &DyadicPoint, t: u64) -> Result<f64> {
    let amps = f.amplitudes_f64();
    let fs = f.sparse_terms();
    let w = BitWindow::new(x);
    let mut acc = CompensatedSum::new();
    for sub in params.subblocks(i)? {
        for k in sub.lo..=sub.hi {
            let term = paper_term(t, k, sub.m)?;
            let v = eval_sparse(f, &amps, &fs, &term, &w)
                .ok_or_else(|| Error::IndexOverflow("frequency product overflows the sparse form".into()))?;
            acc.add(v);
        }
    }
    Ok(acc.value())
}

/// `Y_i(x) = Σ_{k∈Δ_i} f(n_k x)`.
pub fn block_sum(f: &TrigPolySpec, params: &ConstructionParams, i: u32, x: &DyadicPoint) -> Result<f64> {
    let t = params.tower_exponent(i)?;
    let block = params.block(i)?;
    let bits = t as u128 + block.hi as u128 + 1;
    if bits > params.bit_cap as u128 {
        return Err(Error::TowerOverflow { k: block.hi, bits, cap: params.bit_cap });
    }
    block_sum_with(f, params, i, x, t)
}

/// `Σ_{k∈Δ_i} f(ν_k x)` with `ν_k = 2^k + m`; independent of the tower.
pub fn reduced_block_sum(f: &TrigPolySpec, params: &ConstructionParams, i: u32, x: &DyadicPoint) -> Result<f64> {
    block_sum_with(f, params, i, x, 0)
}

/// Exact terms of block `i`, reduced (`ν_k`) or not (`n_k`).
pub fn block_terms(params: &ConstructionParams, i: u32, reduced: bool) -> Result<Vec<BigUint>> {
    let t = if reduced { 0 } else { params.tower_exponent(i)? };
    let mut out = Vec::new();
    for sub in params.subblocks(i)? {
        for k in sub.lo..=sub.hi {
            out.push(((BigUint::one() << k) + sub.m) << t);
        }
    }
    Ok(out)
}

/// `σ_N² = ∫₀¹ (Σ_{k≤N} f(n_k x))² dx`, exactly.
pub fn sigma_n_squared(f: &TrigPolySpec, spec: &SequenceSpec, n: u64) -> Result<BigRational> {
    f.validate()?;
    let prefix = spec.prefix(n)?;
    let mut cos: HashMap<BigUint, BigRational> = HashMap::new();
    let mut sin: HashMap<BigUint, BigRational> = HashMap::new();
    for nk in &prefix {
        for t in &f.terms {
            let map = match t.kind {
                TrigKind::Cos => &mut cos,
                TrigKind::Sin => &mut sin,
            };
            *map.entry(&t.frequency * nk).or_insert_with(BigRational::zero) += &t.amplitude;
        }
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let total = cos.values().chain(sin.values()).fold(BigRational::zero(), |acc, a| acc + a * a);
    Ok(total * half)
}

/// The pieces of `Σ_{k∈Δ_i} f(ν_k x)` for `f = Σ_{j<d} cos(2π 2^j x)`:
/// `direct = main − drag − sine + error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub i: u32,
    pub d: u32,
    pub direct: f64,
    /// `d Σ_{k∈Δ_i} cos(2π 2^k x)`.
    pub main: f64,
    /// `Σ_m 2 Σ_j sin²(π 2^j m x) Σ_{k∈Δ_i^{(m)}} cos(2π 2^k x)`.
    pub drag: f64,
    /// `Σ_m Σ_j sin(2π 2^j m x) Σ_{k∈Δ_i^{(m)}} sin(2π 2^k x)`.
    pub sine: f64,
    /// `Σ_m E_{i,m}(x)`.
    pub error: f64,
    /// Number of cosines in `Σ_m E_{i,m}`.
    pub error_summands: u64,
    pub error_summands_per_subblock: Vec<u64>,
    /// `d² · i`.
    pub error_bound: f64,
    pub residual: f64,
}

/// `Σ_{j<d} sin²(π 2^j m x)`.
pub fn sin_square_sum(m: u64, d: u32, x: &DyadicPoint) -> Result<f64> {
    let m = i64::try_from(m).map_err(|_| Error::IndexOverflow(format!("m = {m}")))?;
    let w = BitWindow::new(x);
    Ok(sin_square_sum_w(m, d, &w))
}

fn sin_square_sum_w(m: i64, d: u32, w: &BitWindow) -> f64 {
    // sin(π y) = sin(2π · y/2)
    (0..d as i64)
        .map(|j| {
            let s = sin_turns(SparseFrequency::term(m, j - 1).phase(w));
            s * s
        })
        .collect::<CompensatedSum>()
        .value()
}

pub fn decomposition_terms(params: &ConstructionParams, i: u32, x: &DyadicPoint) -> Result<DecompositionReport> {
    let d = params.d;
    let w = BitWindow::new(x);
    let mut direct = CompensatedSum::new();
    let mut main = CompensatedSum::new();
    let mut drag = CompensatedSum::new();
    let mut sine = CompensatedSum::new();
    let mut error = CompensatedSum::new();
    let mut per_sub = Vec::new();
    for sub in params.subblocks(i)? {
        let m = i64::try_from(sub.m).map_err(|_| Error::IndexOverflow(format!("m = {}", sub.m)))?;
        let mut c_sum = CompensatedSum::new();
        let mut s_sum = CompensatedSum::new();
        for k in sub.lo..=sub.hi {
            let ph = w.window(k as i64);
            c_sum.add(cos_turns(ph));
            s_sum.add(sin_turns(ph));
            for j in 0..d as i64 {
                let f = SparseFrequency::pow2(k as i64 + j).plus(m, j);
                direct.add(cos_turns(f.phase(&w)));
            }
        }
        let (c_m, s_m) = (c_sum.value(), s_sum.value());
        main.add(d as f64 * c_m);
        drag.add(2.0 * sin_square_sum_w(m, d, &w) * c_m);
        let g_sin: CompensatedSum = (0..d as i64).map(|j| sin_turns(SparseFrequency::term(m, j).phase(&w))).collect();
        sine.add(g_sin.value() * s_m);

        let mut count = 0u64;
        for k in sub.lo..=sub.hi {
            for j in 0..d as u64 {
                if k + j > sub.hi {
                    let f = SparseFrequency::pow2((k + j) as i64).plus(m, j as i64);
                    error.add(cos_turns(f.phase(&w)));
                    count += 1;
                }
                if k < sub.lo + j {
                    let f = SparseFrequency::pow2(k as i64).plus(m, j as i64);
                    error.add(-cos_turns(f.phase(&w)));
                    count += 1;
                }
            }
        }
        per_sub.push(count);
    }
    let (direct, main, drag, sine, error) = (direct.value(), main.value(), drag.value(), sine.value(), error.value());
    let recomposed = [main, -drag, -sine, error].into_iter().collect::<CompensatedSum>().value();
    Ok(DecompositionReport {
        i,
        d,
        direct,
        main,
        drag,
        sine,
        error,
        error_summands: per_sub.iter().sum(),
        error_summands_per_subblock: per_sub,
        error_bound: (d as f64).powi(2) * i as f64,
        residual: (direct - recomposed).abs(),
    })
}

/// Smallest `h` with `1/(20 d 2^d M(i)) <= 2^{-h} <= 1/(10 d 2^d M(i))`.
pub fn local_window_exponent(i: u32, params: &ConstructionParams) -> u32 {
    let v = (BigUint::from(10u32) * params.d * params.subblock_count(i)) << params.d;
    (&v - 1u32).bits() as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowWeights {
    pub a: u64,
    pub i: u32,
    /// `s_{a,m,i}` for `m = 1..M(i)`.
    pub s: Vec<f64>,
    /// `#Δ_i^{(m)}`.
    pub sizes: Vec<u64>,
    /// `λ_k`, constant on each sub-block.
    pub lambda: Vec<f64>,
    /// `S_{a,i}`.
    pub big_s: f64,
}

impl WindowWeights {
    /// `Σ_{k∈Δ_i} λ_k²`.
    pub fn lambda_square_sum(&self) -> f64 {
        self.lambda
            .iter()
            .zip(&self.sizes)
            .map(|(l, &n)| n as f64 * l * l)
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Left end `a / 2^{R^{i-1}}` of the `a`-th window cell.
pub fn window_cell_point(a: u64, i: u32, params: &ConstructionParams) -> Result<DyadicPoint> {
    let p = params.r.checked_pow(i - 1).ok_or_else(|| Error::IndexOverflow(format!("R^{}", i - 1)))?;
    if a > 0 && 64 - a.leading_zeros() as u64 > p {
        return Err(Error::InvalidParameter(format!("a = {a} is not below 2^{p}")));
    }
    DyadicPoint::new(BigUint::from(a), p)
}

/// Largest `a` with `a / 2^{R^{i-1}} <= 2^{-h_i}`.
pub fn max_window_index(i: u32, params: &ConstructionParams) -> Result<u64> {
    let p = params.r.checked_pow(i - 1).ok_or_else(|| Error::IndexOverflow(format!("R^{}", i - 1)))?;
    let h = local_window_exponent(i, params) as u64;
    if p < h {
        return Ok(0);
    }
    1u64.checked_shl((p - h) as u32)
        .filter(|_| p - h < 64)
        .ok_or_else(|| Error::IndexOverflow(format!("2^{}", p - h)))
}

/// `s_{a,m,i}` for every `m`; all zero at `a = 0`.
pub fn window_s_values(a: u64, i: u32, params: &ConstructionParams) -> Result<Vec<f64>> {
    if let Ok(max) = max_window_index(i, params) {
        if a > max {
            return Err(Error::InvalidParameter(format!("a = {a} lies outside [0, 2^-h_i] (max {max})")));
        }
    }
    let x = window_cell_point(a, i, params)?;
    let w = BitWindow::new(&x);
    (1..=params.subblock_count(i))
        .map(|m| {
            let m = i64::try_from(m).map_err(|_| Error::IndexOverflow(format!("m = {m}")))?;
            Ok(sin_square_sum_w(m, params.d, &w))
        })
        .collect()
}

pub fn window_weights(a: u64, i: u32, params: &ConstructionParams) -> Result<WindowWeights> {
    let s = window_s_values(a, i, params)?;
    if a == 0 {
        return Err(Error::DegenerateWeights);
    }
    let sizes: Vec<u64> = params.subblocks(i)?.iter().map(|b| b.len()).collect();
    let big_s = s
        .iter()
        .zip(&sizes)
        .map(|(v, &n)| n as f64 * v * v)
        .collect::<CompensatedSum>()
        .value()
        .sqrt();
    if big_s == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let lambda = s.iter().map(|v| v / big_s).collect();
    Ok(WindowWeights { a, i, s, sizes, lambda, big_s })
}

/// One row of an evaluation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub x: DyadicPoint,
    pub n: u64,
    pub value: f64,
}

pub const TRACE_CSV_HEADER: [&str; 4] = ["x_numerator", "x_precision", "N", "value"];

pub fn write_trace_csv<W: Write>(w: W, rows: &[TraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.x.numerator().to_string(),
            r.x.precision().to_string(),
            r.n.to_string(),
            format!("{:.17e}", r.value),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
