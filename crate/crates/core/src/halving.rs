//! Codewords as random variables on a finite probability space, and the
//! sample-space duplicating halving procedure.
//!
//! All arithmetic is exact. Internally the point weights are written over
//! their least common denominator, so joint probabilities are integer sums.

use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::combinatorics::combinations;
use crate::error::{Error, Result};
use crate::par;
use crate::ramsey::{default_exact_limit, monochromatic_search, to_f64, SearchMode};
use crate::types::Code;
use crate::Rational;

/// `M` random variables over weighted sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteEnsemble {
    alphabet: usize,
    weights: Vec<Rational>,
    /// `values[m][i]`: value of variable `m` at point `i`.
    values: Vec<Vec<usize>>,
    /// Weights as integers over `denom`.
    scaled: Vec<i128>,
    denom: i128,
}

impl FiniteEnsemble {
    /// Weights must be positive and sum to exactly one.
    pub fn new(weights: Vec<Rational>, values: Vec<Vec<usize>>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if weights.is_empty() || values.is_empty() {
            return Err(Error::DimensionMismatch("ensemble needs points and variables".into()));
        }
        let zero = Rational::from_integer(0);
        if weights.iter().any(|w| *w <= zero) || weights.iter().sum::<Rational>() != Rational::from_integer(1) {
            return Err(Error::NotSimplex("point weights must be positive and sum to 1".into()));
        }
        for (m, row) in values.iter().enumerate() {
            if row.len() != weights.len() {
                return Err(Error::DimensionMismatch(format!(
                    "variable {m} has {} values for {} points",
                    row.len(),
                    weights.len()
                )));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= alphabet) {
                return Err(Error::SymbolOutOfRange(format!("value {x} of variable {m}")));
            }
        }
        let denom = weights.iter().fold(1i128, |acc, w| acc.lcm(w.denom()));
        let scaled = weights.iter().map(|w| w.numer() * (denom / w.denom())).collect();
        Ok(FiniteEnsemble {
            alphabet,
            weights,
            values,
            scaled,
            denom,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn variable_count(&self) -> usize {
        self.values.len()
    }

    pub fn point_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn values(&self, m: usize) -> &[usize] {
        &self.values[m]
    }

    /// The variables at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<FiniteEnsemble> {
        let mut values = Vec::with_capacity(indices.len());
        for &m in indices {
            if m >= self.variable_count() {
                return Err(Error::BadIndices(m, m));
            }
            values.push(self.values[m].clone());
        }
        FiniteEnsemble::new(self.weights.clone(), values, self.alphabet)
    }

    /// `P(X_m = x, X_m' = x')` numerators over `denom`, indexed `x * |X| + x'`.
    fn joint_scaled(&self, m: usize, mp: usize) -> Vec<i128> {
        let a = self.alphabet;
        let mut q = vec![0i128; a * a];
        for ((&x, &y), &w) in self.values[m].iter().zip(&self.values[mp]).zip(&self.scaled) {
            q[x * a + y] += w;
        }
        q
    }

    /// `P(X_m = x, X_m' = x')`.
    pub fn joint(&self, m: usize, mp: usize, x: usize, xp: usize) -> Result<Rational> {
        self.check_pair(m, mp)?;
        Ok(Rational::new(self.joint_scaled(m, mp)[x * self.alphabet + xp], self.denom))
    }

    fn check_pair(&self, m: usize, mp: usize) -> Result<()> {
        if m >= mp || mp >= self.variable_count() {
            return Err(Error::BadIndices(m, mp));
        }
        Ok(())
    }

    /// Skew numerators over `denom` for `x < x'`, in lexicographic pair order.
    fn skews_scaled(&self, m: usize, mp: usize) -> Vec<i128> {
        let a = self.alphabet;
        let q = self.joint_scaled(m, mp);
        symbol_pairs(a).map(|(x, y)| q[x * a + y] - q[y * a + x]).collect()
    }
}

fn symbol_pairs(a: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..a).flat_map(move |x| (x + 1..a).map(move |y| (x, y)))
}

/// Coordinates as equally weighted points; variable `m` is codeword `m`.
pub fn ensemble_from_code(code: &Code) -> FiniteEnsemble {
    let n = code.blocklength();
    let weights = vec![Rational::new(1, n as i128); n];
    FiniteEnsemble::new(weights, code.words().to_vec(), code.alphabet_size())
        .expect("a valid code gives a valid ensemble")
}

/// `d_{m,m'}(x,x') = q(x,x') - q(x',x)` for `x < x'`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewTable {
    pub pair: (usize, usize),
    pub alphabet: usize,
    /// In lexicographic order of `(x, x')`.
    pub entries: Vec<((usize, usize), Rational)>,
}

impl SkewTable {
    pub fn get(&self, x: usize, xp: usize) -> Option<Rational> {
        self.entries.iter().find(|(k, _)| *k == (x, xp)).map(|(_, d)| *d)
    }
}

pub fn pairwise_skew(ens: &FiniteEnsemble, m: usize, mp: usize) -> Result<SkewTable> {
    ens.check_pair(m, mp)?;
    let entries = symbol_pairs(ens.alphabet)
        .zip(ens.skews_scaled(m, mp))
        .map(|(k, d)| (k, Rational::new(d, ens.denom)))
        .collect();
    Ok(SkewTable {
        pair: (m, mp),
        alphabet: ens.alphabet,
        entries,
    })
}

/// Cell of `d` among `2t` equal cells of `[-1, 1]`: `floor((d + 1) t)`,
/// clamped so that `d = 1` lands in the last cell.
fn skew_cell(d: i128, denom: i128, t: u64) -> u32 {
    let t = t as i128;
    Integer::div_floor(&((d + denom) * t), &denom).clamp(0, 2 * t - 1) as u32
}

fn skew_color(ens: &FiniteEnsemble, m: usize, mp: usize, t: u64) -> Vec<u32> {
    ens.skews_scaled(m, mp)
        .into_iter()
        .map(|d| skew_cell(d, ens.denom, t))
        .collect()
}

/// Pair colors for every `m < m'`, indexed by `pair_index`.
fn color_table(ens: &FiniteEnsemble, t: u64) -> Vec<Vec<u32>> {
    let pairs = combinations(ens.variable_count(), 2);
    par::map(&pairs, |p| skew_color(ens, p[0], p[1], t))
}

fn pair_index(m: usize, mp: usize, total: usize) -> usize {
    // Row-major over m < m'.
    m * (2 * total - m - 1) / 2 + (mp - m - 1)
}

/// A set of variables whose pairs all share the quantized skew vector.
pub fn monochromatic_rv_extract(
    ens: &FiniteEnsemble,
    t: u64,
    mode: SearchMode,
    exact_limit: Option<usize>,
) -> Result<Vec<usize>> {
    if t == 0 {
        return Err(Error::BadSubset("quantization t must be at least 1".into()));
    }
    let total = ens.variable_count();
    if total < 2 {
        return Err(Error::TooSmall { needed: 2, got: total });
    }
    let table = color_table(ens, t);
    let color = |s: &[usize]| table[pair_index(s[0], s[1], total)].clone();
    monochromatic_search(
        total,
        2,
        mode,
        None,
        exact_limit.unwrap_or_else(|| default_exact_limit(2)),
        &color,
    )
}

/// Antisymmetric sign pattern of a monochromatic set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignFunction {
    pub alphabet: usize,
    /// `f(x, x')` at `x * |X| + x'`.
    pub values: Vec<i8>,
}

impl SignFunction {
    pub fn get(&self, x: usize, xp: usize) -> i8 {
        self.values[x * self.alphabet + xp]
    }
}

/// `f(x,x') = +1` when the shared cell of `d(x,x')` lies in `[0, 1]`, `-1`
/// otherwise, for `x < x'`; zero on the diagonal; `f(x',x) = -f(x,x')`.
pub fn build_f(ens: &FiniteEnsemble, indices: &[usize], t: u64) -> Result<SignFunction> {
    if t == 0 {
        return Err(Error::BadSubset("quantization t must be at least 1".into()));
    }
    if indices.len() < 2 {
        return Err(Error::NotMonochromatic("need at least two variables".into()));
    }
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::BadIndices(w[0], w[1]));
        }
    }
    if let Some(&m) = indices.iter().find(|&&m| m >= ens.variable_count()) {
        return Err(Error::BadIndices(m, m));
    }
    let pairs = combinations(indices.len(), 2);
    let colors = par::map(&pairs, |p| skew_color(ens, indices[p[0]], indices[p[1]], t));
    if let Some(i) = colors.iter().position(|c| *c != colors[0]) {
        return Err(Error::NotMonochromatic(format!(
            "pairs ({}, {}) and ({}, {}) differ",
            indices[pairs[0][0]], indices[pairs[0][1]], indices[pairs[i][0]], indices[pairs[i][1]]
        )));
    }
    let a = ens.alphabet;
    let mut values = vec![0i8; a * a];
    for ((x, y), &cell) in symbol_pairs(a).zip(&colors[0]) {
        let s = if cell as u64 >= t { 1 } else { -1 };
        values[x * a + y] = s;
        values[y * a + x] = -s;
    }
    Ok(SignFunction { alphabet: a, values })
}

/// `(sum |d|, sum q f)` as numerators over `ens.denom`.
fn distance_scaled(ens: &FiniteEnsemble, m: usize, mp: usize, f: &SignFunction) -> (i128, i128) {
    let a = ens.alphabet;
    let q = ens.joint_scaled(m, mp);
    let abs: i128 = symbol_pairs(a).map(|(x, y)| (q[x * a + y] - q[y * a + x]).abs()).sum();
    let signed: i128 = (0..a * a).map(|i| q[i] * f.values[i] as i128).sum();
    (abs, signed)
}

/// `d(m, m')` by both formulas; they must agree.
pub fn distance(ens: &FiniteEnsemble, m: usize, mp: usize, f: &SignFunction) -> Result<Rational> {
    ens.check_pair(m, mp)?;
    if f.alphabet != ens.alphabet {
        return Err(Error::DimensionMismatch("sign function alphabet".into()));
    }
    let (abs, signed) = distance_scaled(ens, m, mp, f);
    if abs != signed {
        return Err(Error::SignMismatch(m, mp));
    }
    Ok(Rational::new(abs, ens.denom))
}

/// Duplicates the points at half weight; variable `m` reads old `m` on the
/// first copy and old `m + M/2` on the second.
fn halve(ens: &FiniteEnsemble) -> Result<FiniteEnsemble> {
    let total = ens.variable_count();
    if total % 2 == 1 {
        return Err(Error::OddCount(total));
    }
    let half = total / 2;
    let two = Rational::from_integer(2);
    let weights: Vec<Rational> = ens.weights.iter().chain(&ens.weights).map(|w| w / two).collect();
    let values = (0..half)
        .map(|m| ens.values[m].iter().chain(&ens.values[m + half]).copied().collect())
        .collect();
    FiniteEnsemble::new(weights, values, ens.alphabet)
}

/// Largest `|d_hat - (d_top + d_bottom)/2|` over child pairs and symbol pairs.
fn skew_residual(parent: &FiniteEnsemble, child: &FiniteEnsemble) -> Rational {
    let half = child.variable_count();
    let pairs = combinations(half, 2);
    let worst = par::map(&pairs, |p| {
        let (m, mp) = (p[0], p[1]);
        let c = child.skews_scaled(m, mp);
        let top = parent.skews_scaled(m, mp);
        let bottom = parent.skews_scaled(m + half, mp + half);
        c.iter()
            .zip(top.iter().zip(&bottom))
            .map(|(&c, (&t, &b))| (Rational::new(c, child.denom) - Rational::new(t + b, 2 * parent.denom)).abs())
            .max()
            .unwrap_or_default()
    });
    worst.into_iter().max().unwrap_or_default()
}

/// One halving step. The skew identity is verified exactly.
pub fn halving_step(ens: &FiniteEnsemble) -> Result<FiniteEnsemble> {
    let child = halve(ens)?;
    let residual = skew_residual(ens, &child);
    if residual != Rational::from_integer(0) {
        return Err(Error::BoundViolation(format!("halving skew identity residual {residual}")));
    }
    Ok(child)
}

/// Per-point, per-symbol counts of variables in `range` showing each symbol.
fn symbol_counts(ens: &FiniteEnsemble, range: std::ops::Range<usize>) -> Vec<Vec<i128>> {
    let a = ens.alphabet;
    let mut counts = vec![vec![0i128; a]; ens.point_count()];
    for m in range {
        for (i, &x) in ens.values[m].iter().enumerate() {
            counts[i][x] += 1;
        }
    }
    counts
}

/// `sum_x [ integral (mean indicator)^2 dP - qbar(x)^2 ]`.
pub fn variance(ens: &FiniteEnsemble) -> Rational {
    let total = ens.variable_count() as i128;
    let counts = symbol_counts(ens, 0..ens.variable_count());
    let mut second = 0i128;
    let mut means = vec![0i128; ens.alphabet];
    for (c, &w) in counts.iter().zip(&ens.scaled) {
        for (x, &k) in c.iter().enumerate() {
            second += w * k * k;
            means[x] += w * k;
        }
    }
    let square: i128 = means.iter().map(|v| v * v).sum();
    let scale = total * total;
    Rational::new(second, ens.denom * scale) - Rational::new(square, ens.denom * ens.denom * scale)
}

/// `(1/4) sum_x integral (q^t(x) - q^b(x))^2 dP` for the split into halves.
fn split_difference(ens: &FiniteEnsemble) -> Rational {
    let half = ens.variable_count() / 2;
    let top = symbol_counts(ens, 0..half);
    let bottom = symbol_counts(ens, half..2 * half);
    let mut acc = 0i128;
    for ((t, b), &w) in top.iter().zip(&bottom).zip(&ens.scaled) {
        acc += w * t.iter().zip(b).map(|(t, b)| (t - b) * (t - b)).sum::<i128>();
    }
    Rational::new(acc, 4 * ens.denom * (half as i128).pow(2))
}

/// Minimum pairwise distance, its pair, and the top-by-bottom average.
fn distance_summary(ens: &FiniteEnsemble, f: Option<&SignFunction>) -> Result<(Rational, (usize, usize), Rational)> {
    let total = ens.variable_count();
    let pairs = combinations(total, 2);
    let dists = par::map(&pairs, |p| -> Result<i128> {
        match f {
            Some(f) => {
                let (abs, signed) = distance_scaled(ens, p[0], p[1], f);
                if abs != signed {
                    return Err(Error::SignMismatch(p[0], p[1]));
                }
                Ok(abs)
            }
            None => Ok(ens.skews_scaled(p[0], p[1]).iter().map(|d| d.abs()).sum()),
        }
    });
    let mut best = (i128::MAX, (0, 0));
    let mut cross = 0i128;
    let half = total / 2;
    for (p, d) in pairs.iter().zip(dists) {
        let d = d?;
        if d < best.0 {
            best = (d, (p[0], p[1]));
        }
        if p[0] < half && p[1] >= half {
            cross += d;
        }
    }
    let avg = Rational::new(cross, ens.denom * (half as i128).pow(2));
    Ok((Rational::new(best.0, ens.denom), best.1, avg))
}

/// State of the ensemble before one halving step (or at the end).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingStepRecord {
    pub step: usize,
    pub variables: usize,
    pub variance: f64,
    /// `Var` after this step minus before; absent on the final record.
    pub variance_difference: Option<f64>,
    pub d_min: Option<f64>,
    pub d_min_pair: Option<(usize, usize)>,
    /// Average distance between the first and second halves.
    pub cross_average: Option<f64>,
    /// Largest residual of the per-pair skew identity for this step.
    pub skew_residual: Option<f64>,
    /// Largest residual of the per-pair distance identity for this step.
    pub distance_residual: Option<f64>,
}

/// Full record of the halving procedure on a power-of-two ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingTrace {
    /// Variables kept after truncating to a power of two.
    pub m_prime: usize,
    pub log2_m_prime: u32,
    pub alphabet: usize,
    pub steps: Vec<HalvingStepRecord>,
    /// First step whose variance gain is at most `1/log2 M'`.
    pub pigeonhole_step: usize,
    /// `2 sqrt(|X| / log2 M')`.
    pub d_min_bound: f64,
    /// `d_min` of the starting set.
    pub d_min: f64,
}

/// Halves down to one variable and checks the variance ledger, the
/// pigeonhole step and the resulting minimum-distance bound, all exactly.
/// Extra variables past the largest power of two are dropped from the end.
/// With a sign function the distance identity and the monotonicity of
/// `d_min` are checked too.
pub fn run_halving(ens: &FiniteEnsemble, f: Option<&SignFunction>) -> Result<HalvingTrace> {
    let total = ens.variable_count();
    if total < 2 {
        return Err(Error::TooSmall { needed: 2, got: total });
    }
    let log2 = total.ilog2();
    let m_prime = 1usize << log2;
    let mut current = ens.select(&(0..m_prime).collect::<Vec<_>>())?;
    let a = ens.alphabet;
    let one = Rational::from_integer(1);
    let zero = Rational::from_integer(0);
    let log2_r = Rational::from_integer(log2 as i128);
    // d_min_bound^2 = 4|X| / log2 M'.
    let bound_sq = Rational::new(4 * a as i128, log2 as i128);

    let mut steps = Vec::new();
    let mut pigeonhole: Option<usize> = None;
    let mut previous_dmin: Option<Rational> = None;
    let mut start_dmin = zero;
    for step in 0..=log2 as usize {
        let var = variance(&current);
        if var < zero || var > one {
            return Err(Error::BoundViolation(format!("variance {var} outside [0, 1]")));
        }
        let mut record = HalvingStepRecord {
            step,
            variables: current.variable_count(),
            variance: to_f64(var),
            variance_difference: None,
            d_min: None,
            d_min_pair: None,
            cross_average: None,
            skew_residual: None,
            distance_residual: None,
        };
        if current.variable_count() < 2 {
            steps.push(record);
            break;
        }
        let (dmin, pair, cross) = distance_summary(&current, f)?;
        if step == 0 {
            start_dmin = dmin;
        }
        if let (Some(prev), Some(_)) = (previous_dmin, f) {
            if dmin < prev {
                return Err(Error::BoundViolation(format!(
                    "d_min decreased from {prev} to {dmin} at step {step}"
                )));
            }
        }
        if dmin > cross {
            return Err(Error::BoundViolation("d_min exceeds the cross average".into()));
        }
        previous_dmin = Some(dmin);
        record.d_min = Some(to_f64(dmin));
        record.d_min_pair = Some(pair);
        record.cross_average = Some(to_f64(cross));

        let child = halve(&current)?;
        let skew = skew_residual(&current, &child);
        record.skew_residual = Some(to_f64(skew));
        if skew != zero {
            return Err(Error::BoundViolation(format!("skew identity residual {skew} at step {step}")));
        }
        if let Some(f) = f {
            let dist = distance_residual(&current, &child, f)?;
            record.distance_residual = Some(to_f64(dist));
            if dist != zero {
                return Err(Error::BoundViolation(format!(
                    "distance identity residual {dist} at step {step}"
                )));
            }
        }
        let diff = variance(&child) - var;
        if diff != split_difference(&current) {
            return Err(Error::BoundViolation(format!("variance ledger fails at step {step}")));
        }
        if diff < zero {
            return Err(Error::BoundViolation(format!("variance decreased at step {step}")));
        }
        record.variance_difference = Some(to_f64(diff));
        if pigeonhole.is_none() && diff * log2_r <= one {
            pigeonhole = Some(step);
            // The bound at this step holds for the cross average, hence for d_min.
            if cross * cross > bound_sq {
                return Err(Error::BoundViolation(format!(
                    "cross average {cross} above 2 sqrt(|X|/log2 M') at step {step}"
                )));
            }
        }
        steps.push(record);
        current = child;
    }
    let pigeonhole_step = pigeonhole
        .ok_or_else(|| Error::BoundViolation("no step with variance gain at most 1/log2 M'".into()))?;
    if start_dmin * start_dmin > bound_sq {
        return Err(Error::BoundViolation(format!(
            "starting d_min {start_dmin} above 2 sqrt(|X|/log2 M')"
        )));
    }
    Ok(HalvingTrace {
        m_prime,
        log2_m_prime: log2,
        alphabet: a,
        steps,
        pigeonhole_step,
        d_min_bound: 2.0 * (a as f64 / log2 as f64).sqrt(),
        d_min: to_f64(start_dmin),
    })
}

/// Largest `|d_hat(m,m') - (d(m,m') + d(m+M/2, m'+M/2))/2|`.
fn distance_residual(parent: &FiniteEnsemble, child: &FiniteEnsemble, f: &SignFunction) -> Result<Rational> {
    let half = child.variable_count();
    let pairs = combinations(half, 2);
    let worst = par::map(&pairs, |p| -> Result<Rational> {
        let (m, mp) = (p[0], p[1]);
        let c = distance(child, m, mp, f)?;
        let t = distance(parent, m, mp, f)?;
        let b = distance(parent, m + half, mp + half, f)?;
        Ok((c - (t + b) / Rational::from_integer(2)).abs())
    });
    let mut max = Rational::from_integer(0);
    for w in worst {
        max = max.max(w?);
    }
    Ok(max)
}

/// `2 sqrt(|X| / log2 M') + |X|^2 / (2t)`.
pub fn delta_tilde(m_prime: usize, t: u64, alphabet: usize) -> f64 {
    let a = alphabet as f64;
    2.0 * (a / (m_prime as f64).log2()).sqrt() + a * a / (2.0 * t as f64)
}

/// Result of the full extraction and halving pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// The monochromatic set.
    pub indices: Vec<usize>,
    pub m_prime: usize,
    pub t: u64,
    /// Evaluated at the power-of-two size the halving used.
    pub delta_tilde: f64,
    /// Largest `|q(x,x') - q(x',x)|` over pairs of the set.
    pub max_skew: f64,
    /// Largest `d(m, m')` over pairs of the set.
    pub max_distance: f64,
    pub d_min: f64,
    /// `delta_tilde - max_skew`.
    pub slack: f64,
    pub sign_function: SignFunction,
    pub trace: HalvingTrace,
}

/// Extracts a monochromatic set, halves it, and checks that every pair's
/// skews stay within `Delta~(M', t)`.
pub fn theorem_check(ens: &FiniteEnsemble, t: u64, mode: SearchMode, exact_limit: Option<usize>) -> Result<TheoremReport> {
    let indices = monochromatic_rv_extract(ens, t, mode, exact_limit)?;
    let f = build_f(ens, &indices, t)?;
    let sub = ens.select(&indices)?;
    let trace = run_halving(&sub, Some(&f))?;
    let a = ens.alphabet as i128;
    let log2 = trace.log2_m_prime as i128;
    // Spread of distances inside one color: |X|^2 / (2t).
    let spread = Rational::new(a * a, 2 * t as i128);
    let bound_sq = Rational::new(4 * a, log2);
    let (dmin, _, _) = distance_summary(&sub, Some(&f))?;
    let pairs = combinations(sub.variable_count(), 2);
    let per_pair = par::map(&pairs, |p| {
        let skews = sub.skews_scaled(p[0], p[1]);
        let dist: i128 = skews.iter().map(|d| d.abs()).sum();
        let max = skews.iter().map(|d| d.abs()).max().unwrap_or(0);
        (Rational::new(dist, sub.denom), Rational::new(max, sub.denom))
    });
    let mut max_distance = Rational::from_integer(0);
    let mut max_skew = Rational::from_integer(0);
    for (p, (dist, skew)) in pairs.iter().zip(per_pair) {
        if dist > dmin + spread {
            return Err(Error::BoundViolation(format!(
                "d({}, {}) = {dist} exceeds d_min + |X|^2/(2t)",
                indices[p[0]], indices[p[1]]
            )));
        }
        max_distance = max_distance.max(dist);
        max_skew = max_skew.max(skew);
    }
    // max_skew <= 2 sqrt(|X|/log2 M') + spread, compared by squaring.
    let excess = max_skew - spread;
    if excess > Rational::from_integer(0) && excess * excess > bound_sq {
        return Err(Error::BoundViolation(format!("skew {max_skew} exceeds Delta~")));
    }
    let dt = delta_tilde(trace.m_prime, t, ens.alphabet);
    Ok(TheoremReport {
        m_prime: indices.len(),
        indices,
        t,
        delta_tilde: dt,
        max_skew: to_f64(max_skew),
        max_distance: to_f64(max_distance),
        d_min: to_f64(dmin),
        slack: dt - to_f64(max_skew),
        sign_function: f,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::joint_type;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(words: &[&[usize]]) -> Code {
        Code::from_words(words.iter().map(|w| w.to_vec()).collect()).unwrap()
    }

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    fn random_ensemble(rng: &mut ChaCha8Rng, m: usize, n: usize) -> FiniteEnsemble {
        let words = (0..m).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
        ensemble_from_code(&Code::new(words, 2).unwrap())
    }

    #[test]
    fn ensemble_matches_joint_types() {
        let e = ensemble_from_code(&code(&[&[0, 0], &[0, 1]]));
        assert_eq!(e.point_count(), 2);
        assert_eq!(e.joint(0, 1, 0, 1).unwrap(), r(1, 2));
        let single = ensemble_from_code(&code(&[&[1], &[0], &[1]]));
        assert_eq!(single.weights(), &[r(1, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let words: Vec<Vec<usize>> = (0..5).map(|_| (0..7).map(|_| rng.gen_range(0..3)).collect()).collect();
        let c = Code::new(words, 3).unwrap();
        let e = ensemble_from_code(&c);
        let jt = joint_type(&c, &[1, 3]).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(e.joint(1, 3, x, y).unwrap(), jt.weight(&[x, y]));
            }
        }
    }

    #[test]
    fn skew_examples() {
        let same = ensemble_from_code(&code(&[&[0, 1, 1], &[0, 1, 1]]));
        assert_eq!(pairwise_skew(&same, 0, 1).unwrap().get(0, 1), Some(r(0, 1)));
        let swap = ensemble_from_code(&code(&[&[0, 1], &[1, 0]]));
        assert_eq!(pairwise_skew(&swap, 0, 1).unwrap().get(0, 1), Some(r(0, 1)));
        let skew = ensemble_from_code(&code(&[&[0, 0], &[0, 1]]));
        assert_eq!(pairwise_skew(&skew, 0, 1).unwrap().get(0, 1), Some(r(1, 2)));
        assert_eq!(pairwise_skew(&skew, 1, 0), Err(Error::BadIndices(1, 0)));
        assert_eq!(pairwise_skew(&skew, 0, 2), Err(Error::BadIndices(0, 2)));
    }

    #[test]
    fn cells() {
        // t = 1: cells [-1, 0) and [0, 1].
        assert_eq!(skew_cell(0, 4, 1), 1);
        assert_eq!(skew_cell(-1, 4, 1), 0);
        assert_eq!(skew_cell(4, 4, 1), 1);
        assert_eq!(skew_cell(-4, 4, 1), 0);
        assert_eq!(skew_cell(1, 4, 4), 5);
    }

    #[test]
    fn sign_function_examples() {
        let same = ensemble_from_code(&code(&[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]]));
        let f = build_f(&same, &[0, 1, 2], 1).unwrap();
        assert_eq!(f.values, vec![0, 1, 1, -1, 0, 1, -1, -1, 0]);
        let unary = FiniteEnsemble::new(vec![r(1, 1)], vec![vec![0], vec![0]], 1).unwrap();
        assert_eq!(build_f(&unary, &[0, 1], 3).unwrap().values, vec![0]);
        let mixed = ensemble_from_code(&code(&[&[0, 0], &[0, 1], &[0, 0]]));
        assert!(matches!(build_f(&mixed, &[0, 1, 2], 1), Err(Error::NotMonochromatic(_))));
    }

    #[test]
    fn distance_examples() {
        let e = ensemble_from_code(&code(&[&[0, 0], &[0, 1]]));
        let f = build_f(&e, &[0, 1], 2).unwrap();
        assert_eq!(distance(&e, 0, 1, &f).unwrap(), r(1, 2));
        let flipped = SignFunction {
            alphabet: 2,
            values: vec![0, -1, 1, 0],
        };
        assert_eq!(distance(&e, 0, 1, &flipped), Err(Error::SignMismatch(0, 1)));
    }

    #[test]
    fn halving_examples() {
        let two = ensemble_from_code(&code(&[&[0, 1], &[1, 1]]));
        let one = halving_step(&two).unwrap();
        assert_eq!(one.variable_count(), 1);
        assert_eq!(one.values(0), &[0, 1, 1, 1]);
        let four = ensemble_from_code(&code(&[&[0, 1], &[1, 0], &[0, 0], &[1, 1]]));
        let next = halving_step(&four).unwrap();
        assert_eq!(skew_residual(&four, &next), r(0, 1));
        assert_eq!(next.values(1), &[1, 0, 1, 1]);
        assert_eq!(next.weights(), &[r(1, 4); 4]);
        let odd = ensemble_from_code(&code(&[&[0], &[1], &[0]]));
        assert_eq!(halving_step(&odd), Err(Error::OddCount(3)));
    }

    #[test]
    fn variance_examples() {
        let constant = ensemble_from_code(&code(&[&[1, 1, 1], &[1, 1, 1]]));
        assert_eq!(variance(&constant), r(0, 1));
        let opposite = ensemble_from_code(&code(&[&[0, 1], &[1, 0]]));
        assert_eq!(variance(&opposite), r(0, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let e = random_ensemble(&mut rng, 8, 5);
            let child = halve(&e).unwrap();
            assert_eq!(variance(&child) - variance(&e), split_difference(&e));
        }
    }

    #[test]
    fn halving_on_random_monochromatic_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &m in &[8usize, 16, 32] {
            for _ in 0..3 {
                let e = random_ensemble(&mut rng, 4 * m, 12);
                let idx = monochromatic_rv_extract(&e, 1, SearchMode::Greedy, None).unwrap();
                let f = build_f(&e, &idx, 1).unwrap();
                let trace = run_halving(&e.select(&idx).unwrap(), Some(&f)).unwrap();
                assert!(trace.d_min <= trace.d_min_bound);
                for w in trace.steps.windows(2) {
                    assert!(w[1].variance >= w[0].variance);
                }
            }
        }
    }

    #[test]
    fn exchangeable_ensembles() {
        let same = ensemble_from_code(&Code::new(vec![vec![0, 1, 1, 0, 1]; 8], 2).unwrap());
        let report = theorem_check(&same, 3, SearchMode::Exact, None).unwrap();
        assert_eq!(report.m_prime, 8);
        assert_eq!(report.max_skew, 0.0);
        assert!(report.trace.steps.iter().all(|s| s.d_min.unwrap_or(0.0) == 0.0));
        let two = ensemble_from_code(&code(&[&[0, 1], &[0, 0]]));
        let trace = run_halving(&two, None).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert!(trace.d_min <= 1.0 && trace.d_min_bound >= 1.0);
    }

    #[test]
    fn exact_extraction_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let e = random_ensemble(&mut rng, 14, 6);
            let idx = monochromatic_rv_extract(&e, 1, SearchMode::Exact, None).unwrap();
            let mut best = 0;
            for mask in 0u32..1 << 14 {
                let set: Vec<usize> = (0..14).filter(|&i| mask >> i & 1 == 1).collect();
                if set.len() > best && (set.len() < 2 || build_f(&e, &set, 1).is_ok()) {
                    best = set.len();
                }
            }
            assert_eq!(idx.len(), best);
        }
    }

    #[test]
    fn delta_tilde_example() {
        assert!((delta_tilde(16, 4, 2) - (2f64.sqrt() + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn theorem_on_random_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..5 {
            let e = random_ensemble(&mut rng, 64, 16);
            let report = theorem_check(&e, 4, SearchMode::Greedy, None).unwrap();
            assert!(report.slack >= 0.0);
        }
    }
}
