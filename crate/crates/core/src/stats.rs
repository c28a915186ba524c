//! Distributional experiments over seeded dyadic samples.
//!
//! Every sample point is drawn from its own ChaCha stream `(seed, index)`, so
//! a run does not depend on scheduling or worker count; aggregates go through
//! [`pairwise_sum`] over index-ordered vectors.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dyadic::{
    block_sum, block_terms, cos_turns, frac_part_mul, lacunary_sum, local_window_exponent, pairwise_sum,
    reduced_block_sum, running_sums, sigma_n_squared, BitWindow, CompensatedSum, DyadicPoint, SparseFrequency,
    TrigPolySpec, GUARD_BITS,
};
use crate::error::{Error, Result};
use crate::sequence::{term_value, ConstructionParams, SequenceSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Quadrature nodes for the variance-mixture reference CDF.
pub const MIXTURE_NODES: usize = 10_000;

/// Calibrated bound on `distance / Λ_N^{1/4}` for the weighted dyadic sums.
pub const GAPOSHKIN_CONSTANT: f64 = 0.2;

/// `Φ(t)`.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// `sup_t |F_M(t) − F(t)|` for the empirical CDF `F_M` of `values`.
pub fn kolmogorov_distance<F>(values: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if values.is_empty() {
        return Err(Error::InvalidParameter("no values".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN among values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let gaps: Vec<f64> = sorted
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .collect();
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// `∫₀¹ Φ(t / (scale·|cos πu|)) du` by the midpoint rule on `nodes` points,
/// with `Φ(t/0) = 1[t ≥ 0]`.
pub fn mixture_cdf(t: f64, scale: f64, nodes: usize) -> f64 {
    let nodes = nodes.max(1);
    let vals: Vec<f64> = (0..nodes)
        .map(|j| {
            let u = (j as f64 + 0.5) / nodes as f64;
            let s = scale * (std::f64::consts::PI * u).cos().abs();
            if s == 0.0 {
                if t >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                normal_cdf(t / s)
            }
        })
        .collect();
    pairwise_sum(&vals) / nodes as f64
}

/// Limit law of `S_N/√N` for the Erdős–Fortet example: a centred Gaussian
/// with random variance `2cos²(πu)`.
pub fn erdos_fortet_limit_cdf(t: f64) -> f64 {
    mixture_cdf(t, std::f64::consts::SQRT_2, MIXTURE_NODES)
}

/// The point with index `index` of the batch `(seed, p)`.
pub fn sample_point(seed: u64, index: u64, p: u64) -> DyadicPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    DyadicPoint::random(&mut rng, p)
}

/// A point in `[0, 2^{-h})` with `p` bits of precision.
pub fn sample_point_below(seed: u64, index: u64, p: u64, h: u64) -> Result<DyadicPoint> {
    if h >= p {
        return Ok(DyadicPoint::zero(p));
    }
    let y = sample_point(seed, index, p - h);
    DyadicPoint::new(y.numerator().clone(), p)
}

/// A point whose top bits are those of `prefix` and whose remaining bits up
/// to precision `p` are drawn from `(seed, 0)`.
pub fn refine_point(prefix: &DyadicPoint, p: u64, seed: u64) -> Result<DyadicPoint> {
    let base = prefix.with_precision(p)?;
    let low = sample_point(seed, 0, p - prefix.precision().min(p));
    DyadicPoint::new(base.numerator() | low.numerator(), p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub precision: u64,
    pub points: Vec<DyadicPoint>,
}

impl SampleBatch {
    pub fn new(seed: u64, count: usize, precision: u64) -> Self {
        let points = (0..count as u64).into_par_iter().map(|i| sample_point(seed, i, precision)).collect();
        SampleBatch { seed, precision, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Seeded, parameter-stamped record of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub version: String,
    pub seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub statistics: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<BTreeMap<String, f64>>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: Option<u64>) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            version: VERSION.to_string(),
            seed,
            parameters: BTreeMap::new(),
            statistics: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            checks: BTreeMap::new(),
            table: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.parameters.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn stat(&mut self, key: &str, v: f64) {
        self.statistics.insert(key.into(), v);
    }

    pub fn threshold(&mut self, key: &str, v: f64) {
        self.thresholds.insert(key.into(), v);
    }

    pub fn check(&mut self, key: &str, ok: bool) {
        self.checks.insert(key.into(), ok);
    }

    /// True when every recorded check passed.
    pub fn passed(&self) -> bool {
        self.checks.values().all(|&b| b)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub index: u64,
    pub x: DyadicPoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub samples: Vec<SampleRecord>,
}

pub const SAMPLE_CSV_HEADER: [&str; 4] = ["sample_index", "x_numerator", "x_precision", "value"];

pub fn write_samples_csv<W: Write>(w: W, samples: &[SampleRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(SAMPLE_CSV_HEADER).map_err(err)?;
    for s in samples {
        out.write_record([
            s.index.to_string(),
            s.x.numerator().to_string(),
            s.x.precision().to_string(),
            s.value.to_string(),
        ])
        .map_err(err)?;
    }
    out.flush()?;
    Ok(())
}

fn mean_and_second_moment(values: &[f64]) -> (f64, f64) {
    let n = values.len().max(1) as f64;
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    (pairwise_sum(values) / n, pairwise_sum(&sq) / n)
}

/// Precision covering every product `g·n_k`, `k <= n`, plus guard bits.
fn precision_for(f: &TrigPolySpec, spec: &SequenceSpec, n: u64) -> Result<u64> {
    let top = term_value(n, spec)?;
    Ok(top.bits() + f.max_frequency().bits() + GUARD_BITS)
}

fn is_erdos_fortet(f: &TrigPolySpec, spec: &SequenceSpec) -> bool {
    matches!(spec, SequenceSpec::ErdosFortet) && *f == TrigPolySpec::erdos_fortet()
}

/// `S_N(x)/σ_N` over `m` seeded points, compared with `Φ`. For the
/// Erdős–Fortet pair the distance to the variance-mixture limit is reported
/// as well.
pub fn clt_experiment(f: &TrigPolySpec, spec: &SequenceSpec, n: u64, m: usize, seed: u64) -> Result<ExperimentOutcome> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("N and M must be positive".into()));
    }
    let sigma2 = sigma_n_squared(f, spec, n)?;
    let norm = sigma2.to_f64().unwrap_or(f64::NAN).sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::InvalidParameter("σ_N vanishes; nothing to normalize".into()));
    }
    let p = precision_for(f, spec, n)?;
    let samples: Vec<SampleRecord> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let x = sample_point(seed, i, p);
            let v = lacunary_sum(f, spec, n, &x)?;
            Ok(SampleRecord { index: i, x, value: v / norm })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let mut report = ExperimentReport::new("clt", Some(seed))
        .param("f", f.to_string())
        .param("sequence", spec.name())
        .param("N", n)
        .param("M", m)
        .param("precision", p)
        .param("sigma_N_squared", sigma2.to_string());
    let (mean, second) = mean_and_second_moment(&values);
    report.stat("norm", norm);
    report.stat("mean", mean);
    report.stat("second_moment", second);
    report.stat("kolmogorov_normal", kolmogorov_distance(&values, normal_cdf)?);
    if is_erdos_fortet(f, spec) {
        report.stat("kolmogorov_mixture", kolmogorov_distance(&values, erdos_fortet_limit_cdf)?);
    }
    Ok(ExperimentOutcome { report, samples })
}

/// Kolmogorov distance of `√2 Σ λ_k cos(2π 2^k x)` (`k = 1..N`) to `Φ`.
pub fn gaposhkin_experiment(weights: &[f64], m: usize, seed: u64) -> Result<ExperimentOutcome> {
    if weights.is_empty() || m == 0 {
        return Err(Error::InvalidParameter("weights and M must be non-empty".into()));
    }
    let norm: f64 = weights.iter().map(|w| w * w).collect::<CompensatedSum>().value();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::WeightsNotNormalized(norm));
    }
    let n = weights.len() as u64;
    let p = n + GUARD_BITS;
    let samples: Vec<SampleRecord> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let x = sample_point(seed, i, p);
            let w = BitWindow::new(&x);
            let s: CompensatedSum =
                weights.iter().enumerate().map(|(k, l)| l * cos_turns(w.window(k as i64 + 1))).collect();
            SampleRecord { index: i, x, value: std::f64::consts::SQRT_2 * s.value() }
        })
        .collect();
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let lambda_max = weights.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    let dist = kolmogorov_distance(&values, normal_cdf)?;
    let mut report = ExperimentReport::new("gaposhkin", Some(seed)).param("N", n).param("M", m).param("weights", weights);
    report.stat("kolmogorov_normal", dist);
    report.stat("lambda_max", lambda_max);
    let ratio = dist / lambda_max.powf(0.25);
    report.stat("ratio", ratio);
    report.threshold("constant", GAPOSHKIN_CONSTANT);
    report.check("ratio_within_constant", ratio <= GAPOSHKIN_CONSTANT);
    Ok(ExperimentOutcome { report, samples })
}

/// `√(2N log log N)`.
pub fn lil_normalizer(n: u64) -> f64 {
    (2.0 * n as f64 * (n as f64).ln().ln()).sqrt()
}

/// `|S_N(x)| / √(2N log log N)` for each `N` in `ns` at one point.
pub fn lil_ratio_path(f: &TrigPolySpec, spec: &SequenceSpec, ns: &[u64], x: &DyadicPoint) -> Result<Vec<f64>> {
    let top = *ns.iter().max().ok_or_else(|| Error::InvalidParameter("empty N list".into()))?;
    if let Some(&bad) = ns.iter().find(|&&n| n < 3) {
        return Err(Error::InvalidParameter(format!("N = {bad} < 3: log log N undefined")));
    }
    match running_sums(f, spec, top, x)? {
        Some(sums) => Ok(ns.iter().map(|&n| sums[n as usize - 1].abs() / lil_normalizer(n)).collect()),
        None => ns.iter().map(|&n| Ok(lacunary_sum(f, spec, n, x)?.abs() / lil_normalizer(n))).collect(),
    }
}

/// Ratio table over `m` seeded points; per-`N` max and mean, and the running
/// max over the sorted `N` list.
pub fn lil_ratio_scan(f: &TrigPolySpec, spec: &SequenceSpec, ns: &[u64], m: usize, seed: u64) -> Result<ExperimentReport> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let top = *ns.last().ok_or_else(|| Error::InvalidParameter("empty N list".into()))?;
    let p = precision_for(f, spec, top)?;
    let paths: Vec<Vec<f64>> = (0..m as u64)
        .into_par_iter()
        .map(|i| lil_ratio_path(f, spec, &ns, &sample_point(seed, i, p)))
        .collect::<Result<_>>()?;
    Ok(lil_report(f, spec, &ns, &paths, Some(seed), p))
}

/// As [`lil_ratio_scan`] for a single given point.
pub fn lil_ratio_scan_at(f: &TrigPolySpec, spec: &SequenceSpec, ns: &[u64], x: &DyadicPoint) -> Result<ExperimentReport> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let path = lil_ratio_path(f, spec, &ns, x)?;
    Ok(lil_report(f, spec, &ns, &[path], None, x.precision()).param("x", x.to_string()))
}

fn lil_report(f: &TrigPolySpec, spec: &SequenceSpec, ns: &[u64], paths: &[Vec<f64>], seed: Option<u64>, p: u64) -> ExperimentReport {
    let mut report = ExperimentReport::new("lil", seed)
        .param("f", f.to_string())
        .param("sequence", spec.name())
        .param("Ns", ns)
        .param("M", paths.len())
        .param("precision", p);
    let mut running = 0.0f64;
    let mut finite = true;
    for (j, &n) in ns.iter().enumerate() {
        let col: Vec<f64> = paths.iter().map(|p| p[j]).collect();
        let max = col.iter().copied().fold(0.0, f64::max);
        finite &= col.iter().all(|v| v.is_finite());
        running = running.max(max);
        let mut row = BTreeMap::new();
        row.insert("N".to_string(), n as f64);
        row.insert("max_ratio".to_string(), max);
        row.insert("mean_ratio".to_string(), pairwise_sum(&col) / col.len().max(1) as f64);
        row.insert("running_max".to_string(), running);
        report.table.push(row);
    }
    report.stat("max_ratio", running);
    report.threshold("erdos_gal_constant", std::f64::consts::FRAC_1_SQRT_2);
    report.check("ratios_finite", finite);
    report
}

/// Residual of the Erdős–Fortet factorization at `x`.
pub fn erdos_fortet_identity_check(n: u64, x: &DyadicPoint) -> f64 {
    let w = BitWindow::new(x);
    let mut lhs = CompensatedSum::new();
    let mut inner = CompensatedSum::new();
    for k in 1..=n as i64 {
        lhs.add(cos_turns(SparseFrequency::pow2(k).plus(-1, 0).phase(&w)));
        lhs.add(cos_turns(SparseFrequency::pow2(k + 1).plus(-2, 0).phase(&w)));
        // 2^k − 3/2 = 2^k − 2^0 − 2^{-1}
        inner.add(cos_turns(SparseFrequency::pow2(k).plus(-1, 0).plus(-1, -1).phase(&w)));
    }
    let two_cos = 2.0 * cos_turns(w.window(-1));
    let tail = cos_turns(SparseFrequency::pow2(n as i64 + 1).plus(-2, 0).phase(&w));
    let rhs = [two_cos * inner.value(), tail, -1.0].into_iter().collect::<CompensatedSum>().value();
    (lhs.value() - rhs).abs()
}

pub fn erdos_fortet_identity_trials(n: u64, trials: usize, seed: u64, tol: f64) -> ExperimentReport {
    let p = n + 2 + GUARD_BITS;
    let res: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| erdos_fortet_identity_check(n, &sample_point(seed, i, p)))
        .collect();
    let max = res.iter().copied().fold(0.0, f64::max);
    let mut report = ExperimentReport::new("erdos-fortet-check", Some(seed))
        .param("N", n)
        .param("trials", trials)
        .param("precision", p);
    report.stat("max_residual", max);
    report.threshold("tolerance", tol);
    report.check("residual_within_tolerance", max <= tol);
    report
}

/// Level `(d√ε/2 − 2)·√(2R^i log log R^i) − 2d²i − 2` and the target
/// `i^{−1+ε/2} − 2i^{−2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeValueParams {
    pub i: u32,
    pub d: u32,
    pub eps: f64,
    pub r: u64,
    pub threshold: f64,
    pub target_lower_bound: f64,
}

impl LargeValueParams {
    pub fn new(params: &ConstructionParams, i: u32) -> Self {
        let d = params.d as f64;
        let eps = params.eps_f64();
        let ri = (params.r as f64).powi(i as i32);
        let fi = i as f64;
        let threshold = (d * eps.sqrt() / 2.0 - 2.0) * (2.0 * ri * ri.ln().ln()).sqrt() - 2.0 * d * d * fi - 2.0;
        let target_lower_bound = fi.powf(-1.0 + eps / 2.0) - 2.0 / (fi * fi);
        LargeValueParams { i, d: params.d, eps, r: params.r, threshold, target_lower_bound }
    }
}

fn reduced_precision(params: &ConstructionParams, i: u32) -> Result<u64> {
    let hi = params.block(i)?.hi;
    let m_bits = 64 - params.subblock_count(i).leading_zeros() as u64;
    Ok(hi + params.d as u64 + m_bits + 1 + GUARD_BITS)
}

/// Empirical measure of `{x : |Σ_{k∈Δ_i} f(ν_k x)| ≥ threshold(i)}` with
/// `f = Σ_{j<d} cos(2π 2^j x)`; monitoring output only.
pub fn block_large_value_probability(params: &ConstructionParams, i: u32, m: usize, seed: u64) -> Result<ExperimentOutcome> {
    if i < 2 {
        return Err(Error::InvalidParameter("block index must be >= 2".into()));
    }
    let lv = LargeValueParams::new(params, i);
    let f = TrigPolySpec::dyadic_polynomial(params.d);
    let p = reduced_precision(params, i)?;
    let samples: Vec<SampleRecord> = (0..m as u64)
        .into_par_iter()
        .map(|k| {
            let x = sample_point(seed, k, p);
            let v = reduced_block_sum(&f, params, i, &x)?;
            Ok(SampleRecord { index: k, x, value: v })
        })
        .collect::<Result<_>>()?;
    let hits = samples.iter().filter(|s| s.value.abs() >= lv.threshold).count();
    let measure = hits as f64 / m.max(1) as f64;
    let mut report = ExperimentReport::new("blockprob", Some(seed))
        .param("R", params.r)
        .param("eps", params.eps.to_string())
        .param("d", params.d)
        .param("i", i)
        .param("M", m)
        .param("precision", p);
    report.stat("empirical_measure", measure);
    report.threshold("level", lv.threshold);
    report.threshold("target_lower_bound", lv.target_lower_bound);
    report.check("measure_in_unit_interval", (0.0..=1.0).contains(&measure));
    Ok(ExperimentOutcome { report, samples })
}

/// Second moment of the reduced block sum over `x ∈ [0, 2^{-h_i}]` against
/// the exact global second moment `∫₀¹ (·)² dx`.
pub fn local_variance_amplification(params: &ConstructionParams, i: u32, m: usize, seed: u64) -> Result<ExperimentReport> {
    let f = TrigPolySpec::dyadic_polynomial(params.d);
    let terms = block_terms(params, i, true)?;
    let global = sigma_n_squared(&f, &SequenceSpec::Explicit(terms.clone()), terms.len() as u64)?
        .to_f64()
        .unwrap_or(f64::NAN);
    let h = local_window_exponent(i, params) as u64;
    let p = reduced_precision(params, i)?;
    let values: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|k| reduced_block_sum(&f, params, i, &sample_point_below(seed, k, p, h)?))
        .collect::<Result<_>>()?;
    let (_, windowed) = mean_and_second_moment(&values);
    let ratio = windowed / global;
    let mut report = ExperimentReport::new("local-variance", Some(seed))
        .param("R", params.r)
        .param("eps", params.eps.to_string())
        .param("d", params.d)
        .param("i", i)
        .param("M", m)
        .param("h", h);
    report.stat("windowed_second_moment", windowed);
    report.stat("global_second_moment", global);
    report.stat("ratio", ratio);
    report.threshold("min_ratio", params.d as f64 / 2.0);
    report.check("amplified", ratio >= params.d as f64 / 2.0);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityReport {
    pub i: u32,
    pub tower: u64,
    pub trials: usize,
    /// Max over trials and `k` of `|frac(n_k x) − frac(n_k x')|`, exact.
    pub exact_residual: f64,
    /// Max of `|Y_i(x) − Y_i(x + 2^{-T(i)})|` in double precision.
    pub float_residual: f64,
    /// Same with a shift of half a period.
    pub half_period_residual: f64,
}

pub fn block_periodicity_check(params: &ConstructionParams, i: u32, trials: usize, seed: u64) -> Result<PeriodicityReport> {
    let t = params.tower_exponent(i)?;
    let terms = block_terms(params, i, false)?;
    let bits = terms.last().map(|v| v.bits()).unwrap_or(0);
    if bits as u128 > params.bit_cap as u128 {
        return Err(Error::TowerOverflow { k: params.block(i)?.hi, bits: bits as u128, cap: params.bit_cap });
    }
    let p = bits + GUARD_BITS;
    let f = TrigPolySpec::dyadic_polynomial(params.d);
    let rows: Vec<(f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let x = sample_point(seed, k, p);
            let shifted = x.add_pow2_neg(t)?;
            let half = x.add_pow2_neg(t + 1)?;
            let mut exact = 0.0f64;
            for n in &terms {
                let a = frac_part_mul(n, &x);
                let b = frac_part_mul(n, &shifted);
                if a != b {
                    let diff = (a.to_rational() - b.to_rational()).to_f64().unwrap_or(f64::INFINITY).abs();
                    exact = exact.max(diff);
                }
            }
            let y = block_sum(&f, params, i, &x)?;
            let float = (y - block_sum(&f, params, i, &shifted)?).abs();
            let half = (y - block_sum(&f, params, i, &half)?).abs();
            Ok((exact, float, half))
        })
        .collect::<Result<_>>()?;
    let max = |sel: fn(&(f64, f64, f64)) -> f64| rows.iter().map(sel).fold(0.0, f64::max);
    Ok(PeriodicityReport {
        i,
        tower: t,
        trials,
        exact_residual: max(|r| r.0),
        float_residual: max(|r| r.1),
        half_period_residual: max(|r| r.2),
    })
}

impl PeriodicityReport {
    pub fn to_report(&self, seed: u64, tol: f64) -> ExperimentReport {
        let mut r = ExperimentReport::new("periodicity", Some(seed))
            .param("i", self.i)
            .param("T", self.tower)
            .param("trials", self.trials);
        r.stat("exact_residual", self.exact_residual);
        r.stat("float_residual", self.float_residual);
        r.stat("half_period_residual", self.half_period_residual);
        r.threshold("tolerance", tol);
        r.check("exact_periodic", self.exact_residual == 0.0);
        r.check("float_periodic", self.float_residual <= tol);
        r
    }
}

/// Equal weights `1/√N`.
pub fn equal_weights(n: usize) -> Vec<f64> {
    vec![1.0 / (n as f64).sqrt(); n]
}

/// Expands per-sub-block weights to one weight per index.
pub fn expand_weights(per_block: &[f64], sizes: &[u64]) -> Vec<f64> {
    per_block
        .iter()
        .zip(sizes)
        .flat_map(|(&w, &n)| std::iter::repeat_n(w, n as usize))
        .collect()
}
