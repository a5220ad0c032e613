//! Exponents: `mu` of a codeword subset, `D_m`, `D_min` of a code, the
//! zero-rate value `E_L(0+)`, the Plotkin-averaging upper bound on `D_min`
//! of a nearly exchangeable subcode, and a numerical min-max exchange check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{check_list_zero_error_vanishes, Channel, SimplexPoint, TupleKernel};
use crate::combinatorics::{all_tuples, binomial_f64, combinations, compositions, tuple_count};
use crate::error::{guard, Error, Result};
use crate::par;
use crate::ramsey::delta_bound;
use crate::simplex::{
    ascend_projected, fw_gap, maximize_concave, Objective, GAP_TOLERANCE, MAX_ITERATIONS,
};
use crate::types::{check_subset, joint_counts_dense, joint_type, Code};
use crate::util::{dirichlet, neumaier_sum};

/// Maximum of a function over a simplex with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    /// Nats.
    pub value: f64,
    pub argmax: SimplexPoint,
    pub iterations: usize,
    /// Frank-Wolfe gap at `argmax`. For concave objectives this bounds the
    /// suboptimality; otherwise it certifies stationarity only.
    pub gap: f64,
}

/// `sum_x w_x mu_x(alpha)` over a fixed family of tuples.
pub(crate) struct MuObjective {
    terms: Vec<(f64, TupleKernel)>,
    dim: usize,
}

impl MuObjective {
    pub(crate) fn new(ch: &Channel, weighted: &[(Vec<usize>, f64)], dim: usize) -> Result<Self> {
        let terms = weighted
            .iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(t, w)| Ok((*w, TupleKernel::new(ch, t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MuObjective { terms, dim })
    }

    fn maximize(&self) -> Result<ExponentResult> {
        let start = vec![1.0 / self.dim as f64; self.dim];
        let opt = maximize_concave(self, &start, GAP_TOLERANCE, MAX_ITERATIONS)?;
        Ok(ExponentResult {
            value: opt.value.max(0.0),
            argmax: SimplexPoint::from_raw(opt.point),
            iterations: opt.iterations,
            gap: opt.gap,
        })
    }
}

impl Objective for MuObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut scratch = Vec::new();
        self.terms
            .iter()
            .map(|(w, k)| w * k.value_grad(x, *w, grad, &mut scratch))
            .sum()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(w, k)| w * k.value(x)).sum()
    }
}

fn check_alpha(alpha: &SimplexPoint, subset: &[usize]) -> Result<()> {
    if alpha.dim() != subset.len() {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {} entries for {} codewords",
            alpha.dim(),
            subset.len()
        )));
    }
    Ok(())
}

/// Per-letter weights `q(x)` of the subset as `(tuple, weight)` pairs.
fn subset_weights(code: &Code, subset: &[usize]) -> Result<Vec<(Vec<usize>, f64)>> {
    let q = joint_type(code, subset)?;
    Ok(q.iter().map(|(t, _)| (t.to_vec(), q.prob(t))).collect())
}

/// `mu_m(alpha) = n sum_x q(x) mu_x(alpha)`, per block.
pub fn mu_code(ch: &Channel, code: &Code, subset: &[usize], alpha: &SimplexPoint) -> Result<f64> {
    code.check_channel(ch)?;
    check_alpha(alpha, subset)?;
    let q = joint_type(code, subset)?;
    let mut total = 0.0;
    for (t, count) in q.iter() {
        total += count as f64 * TupleKernel::new(ch, t)?.value(alpha.as_slice()).max(0.0);
    }
    Ok(total)
}

/// `mu_m(alpha)` from its definition as a sum over output sequences in the
/// common support: `-ln sum_y prod_k P_{m_k}(y)^{alpha_k}`.
pub fn mu_code_direct(
    ch: &Channel,
    code: &Code,
    subset: &[usize],
    alpha: &SimplexPoint,
    size_guard: f64,
) -> Result<f64> {
    code.check_channel(ch)?;
    check_subset(code, subset)?;
    check_alpha(alpha, subset)?;
    let n = code.blocklength();
    guard(
        "output sequences",
        (ch.output_size() as f64).powi(n as i32),
        size_guard,
    )?;
    let total = tuple_count(ch.output_size(), n);
    let a = alpha.as_slice();
    let parts = par::map(&par::chunk_ranges(total, 256), |&(lo, hi)| {
        let mut terms = Vec::with_capacity((hi - lo) as usize);
        for idx in lo..hi {
            let y = crate::combinatorics::tuple_from_index(idx as usize, ch.output_size(), n);
            let mut log = 0.0;
            let mut inside = true;
            for (i, &yi) in y.iter().enumerate() {
                for (k, &m) in subset.iter().enumerate() {
                    let lp = ch.log_prob(code.word(m)[i], yi);
                    if lp == f64::NEG_INFINITY {
                        inside = false;
                    }
                    log += a[k] * lp;
                }
            }
            if inside {
                terms.push(log.exp());
            }
        }
        neumaier_sum(terms)
    });
    let sum = neumaier_sum(parts);
    if sum <= 0.0 {
        return Err(Error::EmptySupport(subset.to_vec()));
    }
    Ok(-sum.ln())
}

/// `D_m = max_alpha sum_x q(x) mu_x(alpha)`, per letter.
pub fn d_subset(ch: &Channel, code: &Code, subset: &[usize]) -> Result<ExponentResult> {
    code.check_channel(ch)?;
    let weights = subset_weights(code, subset)?;
    MuObjective::new(ch, &weights, subset.len())?.maximize()
}

/// Minimum of `D_m` over all unordered subsets of `L+1` codewords.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DminReport {
    pub d_min: f64,
    /// Lexicographically first minimizing subset.
    pub witness: Vec<usize>,
    pub optimum: ExponentResult,
    pub subsets: usize,
}

/// Default limit on the number of subsets `d_min` visits.
pub const DEFAULT_SUBSET_GUARD: f64 = 1e6;

pub fn d_min(ch: &Channel, code: &Code, list_size: usize, size_guard: f64) -> Result<DminReport> {
    code.check_channel(ch)?;
    let k = list_size + 1;
    if code.size() < k {
        return Err(Error::TooFewCodewords {
            list_size,
            got: code.size(),
        });
    }
    guard(
        "codeword subsets",
        binomial_f64(code.size() as u64, k as u64),
        size_guard,
    )?;
    let subsets = combinations(code.size(), k);
    let results = par::map(&subsets, |s| d_subset_fast(ch, code, s));
    let mut best: Option<(usize, ExponentResult)> = None;
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        if best.as_ref().is_none_or(|(_, b)| r.value < b.value) {
            best = Some((i, r));
        }
    }
    let (i, optimum) = best.expect("at least one subset");
    Ok(DminReport {
        d_min: optimum.value,
        witness: subsets[i].clone(),
        optimum,
        subsets: subsets.len(),
    })
}

/// `d_subset` on a subset already known to be valid, via dense counts.
fn d_subset_fast(ch: &Channel, code: &Code, subset: &[usize]) -> Result<ExponentResult> {
    let counts = joint_counts_dense(code, subset);
    let n = code.blocklength() as f64;
    let a = code.alphabet_size();
    let weights: Vec<(Vec<usize>, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| {
            (
                crate::combinatorics::tuple_from_index(i, a, subset.len()),
                c as f64 / n,
            )
        })
        .collect();
    MuObjective::new(ch, &weights, subset.len())?.maximize()
}

/// How `zero_rate_exponent` searches the simplex over input distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZeroRateMethod {
    /// Exhaustive grid with the given step; the first best point wins.
    Grid { step: f64 },
    /// Projected gradient from `starts` points (the uniform distribution and
    /// Dirichlet(1) samples drawn with `seed`). When `grid_step` is set and
    /// `|X| <= 3`, a polished grid optimum joins the candidates.
    Multistart {
        starts: usize,
        seed: u64,
        grid_step: Option<f64>,
    },
}

impl Default for ZeroRateMethod {
    fn default() -> Self {
        ZeroRateMethod::Multistart {
            starts: 64,
            seed: 0,
            grid_step: Some(1e-3),
        }
    }
}

/// Default limit on grid points for the zero-rate search.
pub const DEFAULT_GRID_GUARD: f64 = 1e7;

/// `F(Q) = sum_x Q(x_1)...Q(x_K) w_x` over `x` in `X^K`.
struct Multilinear {
    alphabet: usize,
    arity: usize,
    weights: Vec<f64>,
}

impl Multilinear {
    fn new(ch: &Channel, list_size: usize) -> Result<Self> {
        let k = list_size + 1;
        let a = ch.input_size();
        guard("input tuples", (a as f64).powi(k as i32), 1e7)?;
        let uniform = vec![1.0 / k as f64; k];
        let weights = all_tuples(a, k)
            .iter()
            .map(|t| Ok(TupleKernel::new(ch, t)?.value(&uniform).max(0.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Multilinear {
            alphabet: a,
            arity: k,
            weights,
        })
    }
}

impl Objective for Multilinear {
    fn dim(&self) -> usize {
        self.alphabet
    }

    fn value_grad(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let a = self.alphabet;
        let k = self.arity;
        let mut digits = vec![0usize; k];
        let mut value = 0.0;
        for &w in &self.weights {
            if w != 0.0 {
                let prod: f64 = digits.iter().map(|&x| q[x]).product();
                value += w * prod;
                for j in 0..k {
                    let others: f64 = digits
                        .iter()
                        .enumerate()
                        .filter(|&(l, _)| l != j)
                        .map(|(_, &x)| q[x])
                        .product();
                    grad[digits[j]] += w * others;
                }
            }
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < a {
                    break;
                }
                *d = 0;
            }
        }
        value
    }

    fn value(&self, q: &[f64]) -> f64 {
        let a = self.alphabet;
        let mut digits = vec![0usize; self.arity];
        let mut value = 0.0;
        for &w in &self.weights {
            if w != 0.0 {
                value += w * digits.iter().map(|&x| q[x]).product::<f64>();
            }
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < a {
                    break;
                }
                *d = 0;
            }
        }
        value
    }
}

fn grid_best(obj: &Multilinear, step: f64, size_guard: f64) -> Result<(Vec<f64>, f64)> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::NotSimplex(format!("grid step {step}")));
    }
    let a = obj.alphabet;
    let levels = (1.0 / step).round() as usize;
    guard(
        "grid points",
        binomial_f64((levels + a - 1) as u64, (a - 1) as u64),
        size_guard,
    )?;
    if a == 1 {
        return Ok((vec![1.0], obj.value(&[1.0])));
    }
    let scale = levels as f64;
    // Outer loop over the first coordinate, ascending.
    let rows = par::map_range(levels + 1, |first| {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for rest in compositions(levels - first, a - 1) {
            let q: Vec<f64> = std::iter::once(first)
                .chain(rest)
                .map(|c| c as f64 / scale)
                .collect();
            let v = obj.value(&q);
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((q, v));
            }
        }
        best.expect("nonempty grid row")
    });
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (q, v) in rows {
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((q, v));
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// `E_L(0+) = max_Q sum_x Q(x_1)...Q(x_{L+1}) mu_x(uniform alpha)`.
pub fn zero_rate_exponent(
    ch: &Channel,
    list_size: usize,
    method: &ZeroRateMethod,
) -> Result<ExponentResult> {
    if !check_list_zero_error_vanishes(ch, list_size) {
        return Err(Error::ZeroErrorPositive { list_size });
    }
    let obj = Multilinear::new(ch, list_size)?;
    let a = ch.input_size();
    let certify = |q: Vec<f64>, iterations: usize| {
        let mut g = vec![0.0; a];
        let value = obj.value_grad(&q, &mut g);
        ExponentResult {
            value: value.max(0.0),
            gap: fw_gap(&q, &g),
            argmax: SimplexPoint::from_raw(q),
            iterations,
        }
    };
    match *method {
        ZeroRateMethod::Grid { step } => {
            let (q, _) = grid_best(&obj, step, DEFAULT_GRID_GUARD)?;
            Ok(certify(q, 0))
        }
        ZeroRateMethod::Multistart {
            starts,
            seed,
            grid_step,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut points = vec![vec![1.0 / a as f64; a]];
            while points.len() < starts.max(1) {
                points.push(dirichlet(&mut rng, a));
            }
            let mut runs = par::map(&points, |p| ascend_projected(&obj, p, 1e-12, 10_000));
            if let (Some(step), true) = (grid_step, a <= 3) {
                let (q, _) = grid_best(&obj, step, DEFAULT_GRID_GUARD)?;
                runs.push(ascend_projected(&obj, &q, 1e-12, 10_000));
            }
            let mut best = &runs[0];
            for r in &runs[1..] {
                if r.value > best.value {
                    best = r;
                }
            }
            let iterations = runs.iter().map(|r| r.iterations).sum();
            Ok(certify(best.point.clone(), iterations))
        }
    }
}

/// Pieces of the Plotkin-averaging bound on `D_min` of a subcode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub d_min: f64,
    pub plotkin_upper: f64,
    /// `C * Delta(M', t)`.
    pub correction: f64,
    /// `(M' / (M' - L))^{L+1}`.
    pub factor: f64,
    /// `C = max_alpha sum_x (mu_x(alpha) + mu_x(uniform))` over all of `X^{L+1}`.
    pub c_constant: f64,
    pub delta: f64,
    /// The zero-rate value that the factor multiplies.
    pub zero_rate: f64,
    pub witness: Vec<usize>,
}

/// `C` of the bound: finite exactly when every tuple has a nonempty support.
pub fn correction_constant(ch: &Channel, list_size: usize) -> Result<f64> {
    let k = list_size + 1;
    let tuples = all_tuples(ch.input_size(), k);
    if tuples.iter().any(|t| ch.support(t).is_empty()) {
        return Err(Error::ZeroErrorPositive { list_size });
    }
    let uniform = vec![1.0 / k as f64; k];
    let weighted: Vec<(Vec<usize>, f64)> = tuples.into_iter().map(|t| (t, 1.0)).collect();
    let obj = MuObjective::new(ch, &weighted, k)?;
    let at_uniform = obj.value(&uniform);
    Ok(obj.maximize()?.value + at_uniform)
}

/// The right-hand side `C Delta(M', t) + (M'/(M'-L))^{L+1} E_L(0+)`, with
/// `d_min` left at zero.
pub fn plotkin_bound_value(
    ch: &Channel,
    list_size: usize,
    m_prime: usize,
    t: u64,
) -> Result<BoundReport> {
    if m_prime <= list_size {
        return Err(Error::TooFewCodewords {
            list_size,
            got: m_prime,
        });
    }
    let k = list_size + 1;
    let c = correction_constant(ch, list_size)?;
    let delta = delta_bound(m_prime, t, k, ch.input_size());
    let factor = (m_prime as f64 / (m_prime - list_size) as f64).powi(k as i32);
    let zero_rate = zero_rate_exponent(ch, list_size, &ZeroRateMethod::default())?.value;
    Ok(BoundReport {
        d_min: 0.0,
        plotkin_upper: c * delta + factor * zero_rate,
        correction: c * delta,
        factor,
        c_constant: c,
        delta,
        zero_rate,
        witness: Vec::new(),
    })
}

/// The bound for a concrete subcode, checked against its exhaustive `D_min`.
pub fn plotkin_upper_bound(
    ch: &Channel,
    subcode: &Code,
    list_size: usize,
    t: u64,
) -> Result<BoundReport> {
    let mut report = plotkin_bound_value(ch, list_size, subcode.size(), t)?;
    let dm = d_min(ch, subcode, list_size, DEFAULT_SUBSET_GUARD)?;
    report.d_min = dm.d_min;
    report.witness = dm.witness;
    if report.d_min > report.plotkin_upper + 1e-12 {
        return Err(Error::BoundViolation(format!(
            "D_min {} exceeds Plotkin bound {}",
            report.d_min, report.plotkin_upper
        )));
    }
    Ok(report)
}

/// Both sides of the min-max exchange for one subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SionReport {
    /// `max_k sum_x q(x) D(Q*_x || P(.|x_k))` at the maximizing alpha.
    pub primal: f64,
    /// `D_m`.
    pub dual: f64,
    pub difference: f64,
    pub argmax: SimplexPoint,
    /// Smallest `primal(T) - dual` over the random product types tried.
    pub weak_duality_margin: f64,
    pub samples: usize,
}

/// Number of random conditional types tried for weak duality.
pub const SION_SAMPLES: usize = 100;

/// `max_k sum_x q(x) D(T_x || P(.|x_k))` with `T_x` given on the support.
fn primal_value(weights: &[(Vec<usize>, f64)], kernels: &[TupleKernel], types: &[Vec<f64>]) -> f64 {
    let k = kernels.first().map_or(0, |kr| kr.arity);
    let mut best = f64::NEG_INFINITY;
    for j in 0..k {
        let mut total = 0.0;
        for (((_, w), kr), t) in weights.iter().zip(kernels).zip(types) {
            let mut d = 0.0;
            for (row, &ty) in kr.logp.chunks_exact(kr.arity).zip(t) {
                if ty > 0.0 {
                    d += ty * (ty.ln() - row[j]);
                }
            }
            total += w * d;
        }
        best = best.max(total);
    }
    best
}

/// Checks that the primal min-max value equals `D_m` within `tol`, and that
/// random product types never beat it.
pub fn sion_exchange_check(
    ch: &Channel,
    code: &Code,
    subset: &[usize],
    tol: f64,
) -> Result<SionReport> {
    code.check_channel(ch)?;
    let weights = subset_weights(code, subset)?;
    let kernels = weights
        .iter()
        .map(|(t, _)| TupleKernel::new(ch, t))
        .collect::<Result<Vec<_>>>()?;
    let obj = MuObjective::new(ch, &weights, subset.len())?;
    let opt = obj.maximize()?;
    let alpha = opt.argmax.as_slice();
    let tilted: Vec<Vec<f64>> = kernels.iter().map(|k| k.tilted(alpha)).collect();
    let primal = primal_value(&weights, &kernels, &tilted);
    let difference = (primal - opt.value).abs();
    if difference > tol {
        return Err(Error::BoundViolation(format!(
            "primal {primal} and dual {} differ by {difference:e}",
            opt.value
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut margin = f64::INFINITY;
    for _ in 0..SION_SAMPLES {
        let types: Vec<Vec<f64>> = kernels
            .iter()
            .map(|k| dirichlet(&mut rng, k.support.len()))
            .collect();
        margin = margin.min(primal_value(&weights, &kernels, &types) - opt.value);
    }
    if margin < -tol {
        return Err(Error::BoundViolation(format!(
            "a random type undercuts the dual by {:e}",
            -margin
        )));
    }
    Ok(SionReport {
        primal,
        dual: opt.value,
        difference,
        argmax: opt.argmax,
        weak_duality_margin: margin,
        samples: SION_SAMPLES,
    })
}
