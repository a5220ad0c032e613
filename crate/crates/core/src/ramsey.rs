//! Ramsey-style extraction of subcodes whose joint types are nearly
//! exchangeable.
//!
//! Ordered `K`-subsets of codewords (always in increasing index order) are
//! colored by their joint types quantized into `t` cells of `[0, 1]`. A set
//! all of whose `K`-subsets share one color is found either exactly, by
//! branch and bound, or greedily, by the pin-and-keep-the-majority recursion
//! from the proof of Ramsey's theorem. The remaining checks verify the
//! averaging conditions and the permutation deviation bound on the result.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_f64, combinations, tuple_count, tuple_from_index};
use crate::error::{guard, Error, Result};
use crate::par;
use crate::types::{check_subset, joint_counts_dense, Code};
use crate::Rational;

/// Quantized joint type of one ordered subset: a cell index in `0..t` per
/// tuple of `X^K`, in lexicographic tuple order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorVector(pub Vec<u32>);

/// How to search for a monochromatic set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Maximum set by branch and bound.
    Exact,
    /// The constructive recursion of Ramsey's theorem.
    Greedy,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(SearchMode::Exact),
            "greedy" => Ok(SearchMode::Greedy),
            other => Err(Error::Parse(format!("unknown search mode {other:?}"))),
        }
    }
}

fn check_t(t: u64) -> Result<()> {
    if t == 0 {
        return Err(Error::BadSubset("quantization t must be at least 1".into()));
    }
    Ok(())
}

/// `floor(t * count / n)` clamped to `t - 1`, exactly.
fn cell(count: u32, n: usize, t: u64) -> u32 {
    ((t as u128 * count as u128 / n as u128) as u64).min(t - 1) as u32
}

pub(crate) fn color_dense(code: &Code, subset: &[usize], t: u64) -> ColorVector {
    let n = code.blocklength();
    ColorVector(
        joint_counts_dense(code, subset)
            .into_iter()
            .map(|c| cell(c, n, t))
            .collect(),
    )
}

/// Quantizes the joint type of `subset` into `t` equal cells per tuple.
/// A boundary value `j/t` belongs to the upper cell; `q = 1` to the last.
pub fn color_edge(code: &Code, subset: &[usize], t: u64) -> Result<ColorVector> {
    check_t(t)?;
    check_subset(code, subset)?;
    Ok(color_dense(code, subset, t))
}

/// Default exact-search limits on the number of vertices, by `K`.
pub fn default_exact_limit(k: usize) -> usize {
    match k {
        0..=2 => 40,
        3 => 16,
        _ => 12,
    }
}

/// Shared best size across parallel branches.
struct Search<'a, C> {
    k: usize,
    color: &'a (dyn Fn(&[usize]) -> C + Sync),
    best: &'a AtomicUsize,
}

impl<C: Eq + Clone> Search<'_, C> {
    fn extend(&self, s: &mut Vec<usize>, c: Option<&C>, cands: &[usize], local: &mut Vec<usize>) {
        if s.len() > local.len() {
            *local = s.clone();
            self.best.fetch_max(s.len(), Ordering::Relaxed);
        }
        let k = self.k;
        let mut scratch = Vec::with_capacity(k);
        for (i, &v) in cands.iter().enumerate() {
            let bound = s.len() + cands.len() - i;
            if bound <= local.len() || bound < self.best.load(Ordering::Relaxed) {
                return;
            }
            let rest = &cands[i + 1..];
            s.push(v);
            match s.len().cmp(&k) {
                std::cmp::Ordering::Less => self.extend(s, None, rest, local),
                std::cmp::Ordering::Equal => {
                    let color = (self.color)(s);
                    let next: Vec<usize> = rest
                        .iter()
                        .copied()
                        .filter(|&w| {
                            (0..k).all(|skip| {
                                scratch.clear();
                                scratch.extend(s.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &u)| u));
                                scratch.push(w);
                                (self.color)(&scratch) == color
                            })
                        })
                        .collect();
                    self.extend(s, Some(&color), &next, local);
                }
                std::cmp::Ordering::Greater => {
                    let color = c.expect("color fixed once an edge exists");
                    let earlier = &s[..s.len() - 1];
                    let subsets = combinations(earlier.len(), k - 2);
                    let next: Vec<usize> = rest
                        .iter()
                        .copied()
                        .filter(|&w| {
                            subsets.iter().all(|a| {
                                scratch.clear();
                                scratch.extend(a.iter().map(|&j| earlier[j]));
                                scratch.push(v);
                                scratch.push(w);
                                (self.color)(&scratch) == *color
                            })
                        })
                        .collect();
                    self.extend(s, Some(color), &next, local);
                }
            }
            s.pop();
        }
    }
}

/// Largest vertex set in `0..m` all of whose increasing `k`-subsets share
/// one color; the lexicographically first among maxima.
pub(crate) fn exact_monochromatic<C>(m: usize, k: usize, color: &(dyn Fn(&[usize]) -> C + Sync)) -> Vec<usize>
where
    C: Eq + Clone + Send,
{
    let best = AtomicUsize::new(0);
    let search = Search {
        k,
        color,
        best: &best,
    };
    let branches = par::map_range(m, |u| {
        let cands: Vec<usize> = (u + 1..m).collect();
        let mut local = Vec::new();
        search.extend(&mut vec![u], None, &cands, &mut local);
        if local.is_empty() {
            local.push(u);
        }
        local
    });
    let mut winner: Vec<usize> = Vec::new();
    for b in branches {
        if b.len() > winner.len() {
            winner = b;
        }
    }
    winner
}

/// Pin the first vertex, keep the largest class of the rest with the same
/// colors toward everything pinned, repeat; then recurse on `k - 1` over the
/// pinned sequence. Ties between classes go to the one with the smallest
/// first vertex.
pub(crate) fn greedy_monochromatic<C>(
    vertices: &[usize],
    k: usize,
    color: &(dyn Fn(&[usize]) -> C + Sync),
) -> Vec<usize>
where
    C: Ord + Clone + Send,
{
    if k <= 1 {
        if k == 0 || vertices.is_empty() {
            return vertices.to_vec();
        }
        let mut classes: BTreeMap<C, Vec<usize>> = BTreeMap::new();
        for &v in vertices {
            classes.entry(color(&[v])).or_default().push(v);
        }
        return largest_class(classes.into_values());
    }
    if vertices.len() < k {
        return vertices.to_vec();
    }
    let mut pinned: Vec<usize> = Vec::new();
    let mut pool: Vec<usize> = vertices.to_vec();
    while !pool.is_empty() {
        let v = pool.remove(0);
        pinned.push(v);
        if pinned.len() >= k - 1 && !pool.is_empty() {
            let earlier = &pinned[..pinned.len() - 1];
            let subsets = combinations(earlier.len(), k - 2);
            let keys = par::map(&pool, |&r| {
                subsets
                    .iter()
                    .map(|a| {
                        let mut s: Vec<usize> = a.iter().map(|&j| earlier[j]).collect();
                        s.push(v);
                        s.push(r);
                        color(&s)
                    })
                    .collect::<Vec<C>>()
            });
            let mut classes: BTreeMap<Vec<C>, Vec<usize>> = BTreeMap::new();
            for (key, &r) in keys.into_iter().zip(&pool) {
                classes.entry(key).or_default().push(r);
            }
            pool = largest_class(classes.into_values());
        }
    }
    if pinned.len() < k {
        return pinned;
    }
    let last = *pinned.last().expect("nonempty");
    let head = &pinned[..pinned.len() - 1];
    let induced = |b: &[usize]| {
        let mut s = b.to_vec();
        s.push(last);
        color(&s)
    };
    let mut set = greedy_monochromatic(head, k - 1, &induced);
    set.push(last);
    set
}

fn largest_class(classes: impl Iterator<Item = Vec<usize>>) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for c in classes {
        if c.len() > best.len() || (c.len() == best.len() && c.first() < best.first()) {
            best = c;
        }
    }
    best
}

/// Searches `0..m` for a monochromatic set, shared by codes and ensembles.
pub(crate) fn monochromatic_search<C>(
    m: usize,
    k: usize,
    mode: SearchMode,
    target: Option<usize>,
    exact_limit: usize,
    color: &(dyn Fn(&[usize]) -> C + Sync),
) -> Result<Vec<usize>>
where
    C: Ord + Clone + Send,
{
    if m < k {
        return Err(Error::TooSmall { needed: k, got: m });
    }
    let set = match mode {
        SearchMode::Exact => {
            guard("vertices for exact search", m as f64, exact_limit as f64)?;
            exact_monochromatic(m, k, color)
        }
        SearchMode::Greedy => {
            let all: Vec<usize> = (0..m).collect();
            greedy_monochromatic(&all, k, color)
        }
    };
    if let Some(target) = target {
        if set.len() < target {
            return Err(Error::NoSubsetOfTargetSize {
                target,
                best: set.len(),
            });
        }
    }
    Ok(set)
}

/// Monochromatic codeword set for the `K`-subset coloring at quantization `t`.
pub fn find_monochromatic_subset(
    code: &Code,
    k: usize,
    t: u64,
    mode: SearchMode,
    target: Option<usize>,
    exact_limit: Option<usize>,
) -> Result<Vec<usize>> {
    check_t(t)?;
    if k < 2 {
        return Err(Error::BadSubset(format!("K must be at least 2, got {k}")));
    }
    let limit = exact_limit.unwrap_or_else(|| default_exact_limit(k));
    let color = |s: &[usize]| color_dense(code, s, t);
    monochromatic_search(code.size(), k, mode, target, limit, &color)
}

/// True when every increasing `k`-subset of `indices` has the same color.
pub fn is_monochromatic(code: &Code, indices: &[usize], k: usize, t: u64) -> Result<bool> {
    check_t(t)?;
    check_subset(code, indices)?;
    if indices.len() < k {
        return Ok(true);
    }
    let subsets = combinations(indices.len(), k);
    let colors = par::map(&subsets, |s| {
        let edge: Vec<usize> = s.iter().map(|&j| indices[j]).collect();
        color_dense(code, &edge, t)
    });
    Ok(colors.windows(2).all(|w| w[0] == w[1]))
}

/// Drops the last `K - 2` indices. The set must keep at least `K` members.
pub fn trim_last(indices: &[usize], k: usize) -> Result<Vec<usize>> {
    let needed = (2 * k).saturating_sub(2).max(k);
    if indices.len() < needed {
        return Err(Error::TooSmall {
            needed,
            got: indices.len(),
        });
    }
    Ok(indices[..indices.len() - k.saturating_sub(2)].to_vec())
}

/// A pair and symbol where `|q_{m,m'}(x,x) - r_x| > epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonWitness {
    pub pair: (usize, usize),
    pub symbol: usize,
    pub deviation: f64,
}

/// A subset and tuple where `|q_m(x) - r_x| > delta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaWitness {
    pub subset: Vec<usize>,
    pub tuple: Vec<usize>,
    pub deviation: f64,
}

/// Outcome of checking both averaging conditions on a trimmed subcode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KomlosCheck {
    pub epsilon_ok: bool,
    pub delta_ok: bool,
    /// `|X|^{K-2} / (2t)`.
    pub epsilon: f64,
    /// `1 / (2t)`.
    pub delta: f64,
    /// Largest observed `|q_{m,m'}(x,x) - r_x|`.
    pub max_epsilon_deviation: f64,
    /// Largest observed `|q_m(x) - r_x|`.
    pub max_delta_deviation: f64,
    pub epsilon_witness: Option<EpsilonWitness>,
    pub delta_witness: Option<DeltaWitness>,
}

/// Verifies both averaging conditions with `r_x` the midpoints of the color
/// of the first `K`-subset, and the pair targets `r_x = sum` of the
/// midpoints over tuples starting with `(x, x)`. Comparisons are exact.
pub fn check_komlos_conditions(code: &Code, trimmed: &[usize], k: usize, t: u64) -> Result<KomlosCheck> {
    check_t(t)?;
    check_subset(code, trimmed)?;
    let a = code.alphabet_size();
    let n = code.blocklength() as i128;
    let t128 = t as i128;
    let eps_scale = (a as i128).pow(k.saturating_sub(2) as u32);
    let mut report = KomlosCheck {
        epsilon_ok: true,
        delta_ok: true,
        epsilon: eps_scale as f64 / (2.0 * t as f64),
        delta: 1.0 / (2.0 * t as f64),
        max_epsilon_deviation: 0.0,
        max_delta_deviation: 0.0,
        epsilon_witness: None,
        delta_witness: None,
    };
    if trimmed.len() < k.max(2) {
        return Ok(report);
    }
    let reference = color_dense(code, &trimmed[..k], t);
    // Midpoints r_x = (2c+1)/(2t); compare 2t*count against (2c+1)*n.
    let subsets = combinations(trimmed.len(), k);
    let worst = par::map(&subsets, |s| {
        let edge: Vec<usize> = s.iter().map(|&j| trimmed[j]).collect();
        let counts = joint_counts_dense(code, &edge);
        let mut worst: (i128, usize) = (-1, 0);
        for (i, (&c, &cell)) in counts.iter().zip(&reference.0).enumerate() {
            let dev = (2 * t128 * c as i128 - (2 * cell as i128 + 1) * n).abs();
            if dev > worst.0 {
                worst = (dev, i);
            }
        }
        worst
    });
    for (s, (dev, i)) in subsets.iter().zip(worst) {
        let value = dev as f64 / (2.0 * t as f64 * n as f64);
        report.max_delta_deviation = report.max_delta_deviation.max(value);
        if dev > n && report.delta_witness.is_none() {
            report.delta_ok = false;
            report.delta_witness = Some(DeltaWitness {
                subset: s.iter().map(|&j| trimmed[j]).collect(),
                tuple: tuple_from_index(i, a, k),
                deviation: value,
            });
        }
    }
    // Pair targets: R_x = sum over tuples (x, x, ...) of (2c+1).
    let tail = tuple_count(a, k - 2) as usize;
    let targets: Vec<i128> = (0..a)
        .map(|x| {
            let base = (x * a + x) * tail;
            (base..base + tail)
                .map(|i| 2 * reference.0[i] as i128 + 1)
                .sum()
        })
        .collect();
    let pairs = combinations(trimmed.len(), 2);
    let worst = par::map(&pairs, |p| {
        let pair = [trimmed[p[0]], trimmed[p[1]]];
        let counts = joint_counts_dense(code, &pair);
        let mut worst: (i128, usize) = (-1, 0);
        for x in 0..a {
            let dev = (2 * t128 * counts[x * a + x] as i128 - targets[x] * n).abs();
            if dev > worst.0 {
                worst = (dev, x);
            }
        }
        worst
    });
    for (p, (dev, x)) in pairs.iter().zip(worst) {
        let value = dev as f64 / (2.0 * t as f64 * n as f64);
        report.max_epsilon_deviation = report.max_epsilon_deviation.max(value);
        if dev > eps_scale * n && report.epsilon_witness.is_none() {
            report.epsilon_ok = false;
            report.epsilon_witness = Some(EpsilonWitness {
                pair: (trimmed[p[0]], trimmed[p[1]]),
                symbol: x,
                deviation: value,
            });
        }
    }
    Ok(report)
}

/// Largest `|q_m(x) - q_m(x')|` over increasing subsets, tuples and
/// permutations, with the exact value `count_difference / n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationDeviation {
    pub value: f64,
    pub count_difference: usize,
    pub blocklength: usize,
    pub subset: Vec<usize>,
    pub tuple: Vec<usize>,
    pub permuted: Vec<usize>,
}

impl PermutationDeviation {
    pub fn exact(&self) -> Rational {
        Rational::new(self.count_difference as i128, self.blocklength as i128)
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    crate::combinatorics::all_tuples(k, k)
        .into_iter()
        .filter(|p| {
            let mut seen = vec![false; k];
            p.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
        })
        .collect()
}

/// Default limit on subsets x tuples x permutations.
pub const DEFAULT_DEVIATION_GUARD: f64 = 1e7;

pub fn permutation_deviation(
    code: &Code,
    indices: &[usize],
    k: usize,
    size_guard: f64,
) -> Result<PermutationDeviation> {
    check_subset(code, indices)?;
    let a = code.alphabet_size();
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    guard(
        "subsets x tuples x permutations",
        binomial_f64(indices.len() as u64, k as u64) * (a as f64).powi(k as i32) * factorial,
        size_guard,
    )?;
    let mut best = PermutationDeviation {
        value: 0.0,
        count_difference: 0,
        blocklength: code.blocklength(),
        subset: Vec::new(),
        tuple: Vec::new(),
        permuted: Vec::new(),
    };
    if indices.len() < k {
        return Ok(best);
    }
    let perms = permutations(k);
    let tuples = crate::combinatorics::all_tuples(a, k);
    let subsets = combinations(indices.len(), k);
    let per_subset = par::map(&subsets, |s| {
        let edge: Vec<usize> = s.iter().map(|&j| indices[j]).collect();
        let counts = joint_counts_dense(code, &edge);
        let mut worst: (usize, usize, usize) = (0, 0, 0);
        for (ti, tuple) in tuples.iter().enumerate() {
            for (pi, p) in perms.iter().enumerate() {
                let permuted: Vec<usize> = p.iter().map(|&j| tuple[j]).collect();
                let pj = crate::combinatorics::tuple_index(&permuted, a);
                let diff = counts[ti].abs_diff(counts[pj]) as usize;
                if diff > worst.0 {
                    worst = (diff, ti, pi);
                }
            }
        }
        worst
    });
    for (s, (diff, ti, pi)) in subsets.iter().zip(per_subset) {
        if diff > best.count_difference {
            let tuple = tuples[ti].clone();
            best.count_difference = diff;
            best.value = diff as f64 / code.blocklength() as f64;
            best.permuted = perms[pi].iter().map(|&j| tuple[j]).collect();
            best.tuple = tuple;
            best.subset = s.iter().map(|&j| indices[j]).collect();
        }
    }
    Ok(best)
}

/// `Delta(M', t) = 2K^3 sqrt(2K/M') + 4K^3 sqrt(|X|^{K-2}/(2t)) + (K^2+2)/(2t)`.
pub fn delta_bound(m_prime: usize, t: u64, k: usize, alphabet: usize) -> f64 {
    let kf = k as f64;
    let t = t as f64;
    2.0 * kf.powi(3) * (2.0 * kf / m_prime as f64).sqrt()
        + 4.0 * kf.powi(3) * ((alphabet as f64).powi(k as i32 - 2) / (2.0 * t)).sqrt()
        + (kf * kf + 2.0) / (2.0 * t)
}

/// The original two-variable constants, `6/sqrt(M') + 4/sqrt(2t) + 1/t`,
/// kept for comparison with [`delta_bound`] at `K = 2`.
pub fn komlos_delta_bound(m_prime: usize, t: u64) -> f64 {
    6.0 / (m_prime as f64).sqrt() + 4.0 / (2.0 * t as f64).sqrt() + 1.0 / t as f64
}

/// Prefix-average check for one symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixAverageReport {
    pub pairs: usize,
    /// Largest `lhs / rhs` over prefix lengths `m < m'`.
    pub max_ratio: f64,
    /// Prefix lengths (1-based) attaining `max_ratio`.
    pub worst: (usize, usize),
}

/// With `chi_bar_m(x)` the fraction of the first `m` codewords showing `x`
/// at a uniformly drawn coordinate, checks
/// `E (chi_bar_m - chi_bar_m')^2 <= 2/m (1 - m/m') + 4 eps (1 - m/m')^2`
/// for every `1 <= m < m' <= M`, after verifying the hypothesis
/// `|q_{m,m'}(x,x) - r_x| <= eps` for every codeword pair.
pub fn komlos_lemma1_check(code: &Code, x: usize, r_x: Rational, epsilon: Rational) -> Result<PrefixAverageReport> {
    if x >= code.alphabet_size() {
        return Err(Error::SymbolOutOfRange(format!(
            "symbol {x} with |X| = {}",
            code.alphabet_size()
        )));
    }
    let m_total = code.size();
    let n = code.blocklength();
    let n_r = Rational::from_integer(n as i128);
    for m in 0..m_total {
        for mp in m + 1..m_total {
            let both = (0..n)
                .filter(|&c| code.word(m)[c] == x && code.word(mp)[c] == x)
                .count();
            let q = Rational::from_integer(both as i128) / n_r;
            let dev = if q > r_x { q - r_x } else { r_x - q };
            if dev > epsilon {
                return Err(Error::HypothesisFails(m, mp));
            }
        }
    }
    // prefix[m][c] = codewords among the first m showing x at coordinate c.
    let mut prefix = vec![vec![0i128; n]];
    for word in code.words() {
        let last = prefix.last().expect("nonempty");
        let next = last.iter().zip(word).map(|(&p, &s)| p + (s == x) as i128).collect();
        prefix.push(next);
    }
    let pairs: Vec<(usize, usize)> = (1..=m_total)
        .flat_map(|m| (m + 1..=m_total).map(move |mp| (m, mp)))
        .collect();
    let ratios = par::map(&pairs, |&(m, mp)| {
        let (mi, mpi) = (m as i128, mp as i128);
        let sq: i128 = (0..n)
            .map(|c| {
                let d = prefix[m][c] * mpi - prefix[mp][c] * mi;
                d * d
            })
            .sum();
        let lhs = Rational::new(sq, (mi * mpi).pow(2) * n as i128);
        let gap = Rational::new(mpi - mi, mpi);
        let rhs = Rational::new(2, mi) * gap + Rational::from_integer(4) * epsilon * gap * gap;
        (lhs, rhs)
    });
    let mut report = PrefixAverageReport {
        pairs: pairs.len(),
        max_ratio: 0.0,
        worst: (0, 0),
    };
    for (&(m, mp), (lhs, rhs)) in pairs.iter().zip(ratios) {
        if lhs > rhs {
            return Err(Error::BoundViolation(format!(
                "prefix averages {m} and {mp}: {lhs} > {rhs}"
            )));
        }
        let ratio = to_f64(lhs) / to_f64(rhs);
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst = (m, mp);
        }
    }
    Ok(report)
}

pub(crate) fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Result of the extraction pipeline on one code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubcodeReport {
    /// The trimmed subcode.
    pub indices: Vec<usize>,
    /// The monochromatic set before trimming.
    pub monochromatic: Vec<usize>,
    pub m_prime: usize,
    pub t: u64,
    pub k: usize,
    pub mode: SearchMode,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_bound: f64,
    /// `None` when the deviation scan exceeds its size guard.
    pub max_deviation: Option<f64>,
    pub conditions: KomlosCheck,
}

/// Search, trim, verify the averaging conditions, and compare the
/// permutation deviation with `Delta(M', t)`.
pub fn extract_subcode(
    code: &Code,
    k: usize,
    t: u64,
    mode: SearchMode,
    target: Option<usize>,
    exact_limit: Option<usize>,
) -> Result<SubcodeReport> {
    let set = find_monochromatic_subset(code, k, t, mode, target, exact_limit)?;
    let trimmed = trim_last(&set, k)?;
    let conditions = check_komlos_conditions(code, &trimmed, k, t)?;
    let bound = delta_bound(trimmed.len(), t, k, code.alphabet_size());
    let max_deviation = match permutation_deviation(code, &trimmed, k, DEFAULT_DEVIATION_GUARD) {
        Ok(d) => Some(d.value),
        Err(Error::SizeGuardExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    if conditions.epsilon_ok && conditions.delta_ok {
        if let Some(d) = max_deviation {
            if d > bound {
                return Err(Error::BoundViolation(format!(
                    "permutation deviation {d} exceeds Delta = {bound}"
                )));
            }
        }
    }
    Ok(SubcodeReport {
        m_prime: trimmed.len(),
        indices: trimmed,
        monochromatic: set,
        t,
        k,
        mode,
        epsilon: conditions.epsilon,
        delta: conditions.delta,
        delta_bound: bound,
        max_deviation,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(words: &[&[usize]]) -> Code {
        Code::from_words(words.iter().map(|w| w.to_vec()).collect()).unwrap()
    }

    fn random_code(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Code {
        let words = (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect())
            .collect();
        Code::new(words, 2).unwrap()
    }

    #[test]
    fn color_examples() {
        let c = code(&[&[0, 0, 1, 1, 0, 1, 0, 1, 1, 0], &[0, 1, 0, 1, 1, 0, 1, 1, 0, 0]]);
        assert!(color_edge(&c, &[0, 1], 1).unwrap().0.iter().all(|&v| v == 0));
        // q(0,0) = 2/10 -> cell 0 of 2; q(0,1) = 3/10; q(1,0) = 3/10; q(1,1) = 2/10.
        assert_eq!(color_edge(&c, &[0, 1], 2).unwrap().0, vec![0, 0, 0, 0]);
        let half = code(&[&[0, 1], &[0, 0]]);
        // q(0,0) = 1/2 goes up to cell 1 of 2.
        assert_eq!(color_edge(&half, &[0, 1], 2).unwrap().0, vec![1, 0, 1, 0]);
        let same = code(&[&[1, 1], &[1, 1]]);
        assert_eq!(color_edge(&same, &[0, 1], 4).unwrap().0, vec![0, 0, 0, 3]);
        assert!(matches!(color_edge(&same, &[0, 0], 4), Err(Error::BadSubset(_))));
        assert!(color_edge(&same, &[0, 1], 0).is_err());
    }

    #[test]
    fn trim_examples() {
        assert_eq!(trim_last(&[3, 5, 9], 2).unwrap(), vec![3, 5, 9]);
        assert_eq!(trim_last(&[0, 1, 2, 3, 4, 5, 6], 3).unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(
            trim_last(&[0, 1, 2], 3),
            Err(Error::TooSmall { needed: 4, got: 3 })
        );
        assert!(trim_last(&[0], 2).is_err());
    }

    #[test]
    fn trivial_searches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_code(&mut rng, 12, 6);
        for mode in [SearchMode::Exact, SearchMode::Greedy] {
            for k in [2, 3] {
                let all = find_monochromatic_subset(&c, k, 1, mode, None, None).unwrap();
                assert_eq!(all, (0..12).collect::<Vec<_>>());
            }
        }
        let same = Code::new(vec![vec![0, 1, 1, 0]; 9], 2).unwrap();
        for mode in [SearchMode::Exact, SearchMode::Greedy] {
            let all = find_monochromatic_subset(&same, 3, 7, mode, None, None).unwrap();
            assert_eq!(all.len(), 9);
        }
    }

    /// Exhaustive oracle: the largest subset of `0..m` (by size, then
    /// lexicographic order) all of whose `k`-subsets share a color.
    fn brute_force(c: &Code, k: usize, t: u64) -> usize {
        let m = c.size();
        let mut best = 0;
        for mask in 0u32..(1 << m) {
            let set: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
            if set.len() > best && is_monochromatic(c, &set, k, t).unwrap() {
                best = set.len();
            }
        }
        best
    }

    #[test]
    fn exact_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..8 {
            let c = random_code(&mut rng, 11, 6);
            for k in [2, 3] {
                let exact = find_monochromatic_subset(&c, k, 2, SearchMode::Exact, None, None).unwrap();
                assert!(is_monochromatic(&c, &exact, k, 2).unwrap());
                assert_eq!(exact.len(), brute_force(&c, k, 2));
                let greedy = find_monochromatic_subset(&c, k, 2, SearchMode::Greedy, None, None).unwrap();
                assert!(is_monochromatic(&c, &greedy, k, 2).unwrap());
                assert!(greedy.len() <= exact.len());
            }
        }
    }

    #[test]
    fn exact_guard_and_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_code(&mut rng, 17, 5);
        assert!(matches!(
            find_monochromatic_subset(&c, 3, 2, SearchMode::Exact, None, None),
            Err(Error::SizeGuardExceeded { .. })
        ));
        assert!(matches!(
            find_monochromatic_subset(&c, 2, 3, SearchMode::Exact, Some(17), None),
            Err(Error::NoSubsetOfTargetSize { target: 17, .. })
        ));
    }

    #[test]
    fn conditions_examples() {
        let same = Code::new(vec![vec![0, 1, 1, 0, 1]; 6], 2).unwrap();
        let r = check_komlos_conditions(&same, &[0, 1, 2, 3, 4], 3, 4).unwrap();
        assert!(r.epsilon_ok && r.delta_ok);
        // Two colors at t = 2: the pair (0, 1) agrees everywhere, (0, 2) nowhere.
        let two = code(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[1, 1, 1, 1]]);
        let r = check_komlos_conditions(&two, &[0, 1, 2], 2, 2).unwrap();
        assert!(!r.epsilon_ok && !r.delta_ok);
        assert_eq!(r.epsilon_witness.unwrap().pair, (0, 2));
        assert_eq!(r.delta_witness.unwrap().subset, vec![0, 2]);
    }

    #[test]
    fn deviation_examples() {
        let constant = code(&[&[0, 1, 1], &[0, 1, 1], &[0, 1, 1]]);
        assert_eq!(permutation_deviation(&constant, &[0, 1, 2], 2, 1e7).unwrap().value, 0.0);
        let swap = code(&[&[0, 1], &[1, 0]]);
        assert_eq!(permutation_deviation(&swap, &[0, 1], 2, 1e7).unwrap().value, 0.0);
        let skew = code(&[&[0, 0], &[0, 1]]);
        let d = permutation_deviation(&skew, &[0, 1], 2, 1e7).unwrap();
        assert_eq!(d.exact(), Rational::new(1, 2));
        assert_eq!(d.tuple, vec![0, 1]);
        assert_eq!(d.permuted, vec![1, 0]);
    }

    #[test]
    fn delta_bound_examples() {
        for (m, t) in [(4usize, 1u64), (100, 7), (10_000, 1000)] {
            let expected = 32.0 / (m as f64).sqrt() + 32.0 / (2.0 * t as f64).sqrt() + 3.0 / t as f64;
            assert!((delta_bound(m, t, 2, 2) - expected).abs() < 1e-12);
        }
        assert!(delta_bound(1 << 40, 1 << 40, 2, 2) < 1e-4);
        assert!(delta_bound(10, 5, 3, 2) > delta_bound(11, 5, 3, 2));
        assert!(delta_bound(10, 5, 3, 2) > delta_bound(10, 6, 3, 2));
        assert!((komlos_delta_bound(4, 2) - (3.0 + 2.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn lemma1_examples() {
        let same = Code::new(vec![vec![0, 1, 0]; 5], 2).unwrap();
        let r = komlos_lemma1_check(&same, 0, Rational::new(2, 3), Rational::from_integer(0)).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        let c = code(&[&[0, 1], &[1, 1], &[0, 0]]);
        assert_eq!(
            komlos_lemma1_check(&c, 0, Rational::from_integer(0), Rational::from_integer(0)),
            Err(Error::HypothesisFails(0, 2))
        );
    }

    #[test]
    fn lemma1_on_random_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let c = random_code(&mut rng, 12, 9);
            for x in 0..2 {
                // Smallest epsilon making the hypothesis true around the midrange.
                let mut lo = Rational::from_integer(1);
                let mut hi = Rational::from_integer(0);
                for m in 0..12 {
                    for mp in m + 1..12 {
                        let both = (0..9).filter(|&i| c.word(m)[i] == x && c.word(mp)[i] == x).count();
                        let q = Rational::new(both as i128, 9);
                        lo = lo.min(q);
                        hi = hi.max(q);
                    }
                }
                let r = (lo + hi) / Rational::from_integer(2);
                let eps = (hi - lo) / Rational::from_integer(2);
                let report = komlos_lemma1_check(&c, x, r, eps).unwrap();
                assert!(report.max_ratio <= 1.0);
            }
        }
    }

    #[test]
    fn extraction_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let c = random_code(&mut rng, 20, 10);
            let r = extract_subcode(&c, 2, 2, SearchMode::Exact, None, None).unwrap();
            assert!(r.conditions.delta_ok && r.conditions.epsilon_ok);
            assert!(r.max_deviation.unwrap() <= r.delta_bound);
            let c3 = random_code(&mut rng, 12, 10);
            let r = extract_subcode(&c3, 3, 2, SearchMode::Exact, None, None).unwrap();
            assert!(r.conditions.delta_ok && r.conditions.epsilon_ok, "{r:?}");
        }
    }
}
