//! Discrete memoryless channels, common output supports, and the tilted
//! functional `mu_x(alpha) = -ln sum_y prod_k P(y|x_k)^alpha_k`.
//!
//! All logarithms are natural, so every exponent is in nats. Input and output
//! symbols are 0-based indices.

use serde::{Deserialize, Serialize};

use crate::combinatorics::multisets;
use crate::error::{Error, Result};

/// Maximum allowed deviation of a row sum from one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Transition probabilities below this are treated as exact zeros.
pub const ZERO_PROBABILITY: f64 = 1e-15;

/// A row-stochastic transition matrix `P(y|x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

/// On-disk form of a channel: `{"matrix": [[...], ...]}`, one row per input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub matrix: Vec<Vec<f64>>,
}

impl Channel {
    /// Validates a raw matrix. Rows off by at most [`ROW_SUM_TOLERANCE`] are
    /// renormalized; entries below [`ZERO_PROBABILITY`] become exact zeros.
    pub fn new(matrix: &[Vec<f64>]) -> Result<Self> {
        let inputs = matrix.len();
        if inputs == 0 || matrix[0].is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let outputs = matrix[0].len();
        let mut probs = Vec::with_capacity(inputs * outputs);
        for (x, row) in matrix.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::DimensionMismatch(format!(
                    "row {x} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
                return Err(Error::NonStochastic(format!("row {x} has entry {bad}")));
            }
            let cleaned: Vec<f64> = row
                .iter()
                .map(|&p| if p < ZERO_PROBABILITY { 0.0 } else { p })
                .collect();
            let raw_sum: f64 = row.iter().sum();
            if (raw_sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochastic(format!("row {x} sums to {raw_sum}")));
            }
            let sum: f64 = cleaned.iter().sum();
            probs.extend(cleaned.iter().map(|p| p / sum));
        }
        let log_probs = probs
            .iter()
            .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
            .collect();
        Ok(Channel {
            inputs,
            outputs,
            probs,
            log_probs,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Channel::new(&[vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `k` symbols.
    pub fn identity(k: usize) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Channel::new(&rows)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Channel::new(&file.matrix)
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            matrix: (0..self.inputs).map(|x| self.row(x).to_vec()).collect(),
        }
    }

    pub fn input_size(&self) -> usize {
        self.inputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.outputs + y]
    }

    /// `ln P(y|x)`, `-inf` for zero transitions.
    #[inline]
    pub fn log_prob(&self, x: usize, y: usize) -> f64 {
        self.log_probs[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.outputs..(x + 1) * self.outputs]
    }

    pub(crate) fn check_tuple(&self, tuple: &[usize]) -> Result<()> {
        match tuple.iter().find(|&&s| s >= self.inputs) {
            Some(s) => Err(Error::SymbolOutOfRange(format!(
                "input symbol {s} with |X| = {}",
                self.inputs
            ))),
            None => Ok(()),
        }
    }

    /// Common output support `{ y : prod_k P(y|x_k) > 0 }`.
    pub fn support(&self, tuple: &[usize]) -> SupportSet {
        SupportSet(
            (0..self.outputs)
                .filter(|&y| tuple.iter().all(|&x| self.prob(x, y) > 0.0))
                .collect(),
        )
    }
}

/// A probability vector, used both for the weights `alpha` over a tuple and
/// for input distributions `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotSimplex("empty vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::NotSimplex(format!("negative entry in {weights:?}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::NotSimplex(format!("entries sum to {sum}")));
        }
        Ok(SimplexPoint(weights))
    }

    /// The barycenter `(1/d, ..., 1/d)`.
    pub fn uniform(dim: usize) -> Self {
        SimplexPoint(vec![1.0 / dim as f64; dim])
    }

    pub fn vertex(dim: usize, k: usize) -> Self {
        let mut w = vec![0.0; dim];
        w[k] = 1.0;
        SimplexPoint(w)
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        SimplexPoint(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Output symbols reachable from every input of a tuple.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn outputs(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, y: usize) -> bool {
        self.0.binary_search(&y).is_ok()
    }
}

/// KL divergence with an explicit marker for absolute-continuity failure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_finite(&self) -> bool {
        matches!(self, Divergence::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }
}

/// Validates a raw matrix into a [`Channel`].
pub fn validate_channel(matrix: &[Vec<f64>]) -> Result<Channel> {
    Channel::new(matrix)
}

/// `Y_x = { y : prod_k P(y|x_k) > 0 }`.
pub fn support_set(ch: &Channel, tuple: &[usize]) -> Result<SupportSet> {
    ch.check_tuple(tuple)?;
    Ok(ch.support(tuple))
}

/// True iff every `(L+1)`-tuple of inputs shares at least one output, i.e. the
/// zero-error capacity with list size `L` is zero.
pub fn check_list_zero_error_vanishes(ch: &Channel, list_size: usize) -> bool {
    // The common support does not depend on order, so multisets suffice.
    multisets(ch.input_size(), list_size + 1)
        .iter()
        .all(|t| !ch.support(t).is_empty())
}

/// Log-domain kernel of `mu_x` for one tuple: the support and the matrix of
/// `ln P(y|x_k)` restricted to it.
#[derive(Clone, Debug)]
pub(crate) struct TupleKernel {
    pub support: Vec<usize>,
    /// Row-major `support.len() x K`.
    pub logp: Vec<f64>,
    pub arity: usize,
}

impl TupleKernel {
    pub fn new(ch: &Channel, tuple: &[usize]) -> Result<Self> {
        let support = ch.support(tuple);
        if support.is_empty() {
            return Err(Error::EmptySupport(tuple.to_vec()));
        }
        let arity = tuple.len();
        let mut logp = Vec::with_capacity(support.len() * arity);
        for &y in support.outputs() {
            logp.extend(tuple.iter().map(|&x| ch.log_prob(x, y)));
        }
        Ok(TupleKernel {
            support: support.0,
            logp,
            arity,
        })
    }

    fn exponents(&self, alpha: &[f64], out: &mut Vec<f64>) -> f64 {
        out.clear();
        let mut max = f64::NEG_INFINITY;
        for row in self.logp.chunks_exact(self.arity) {
            let s: f64 = row.iter().zip(alpha).map(|(l, a)| l * a).sum();
            max = max.max(s);
            out.push(s);
        }
        max
    }

    pub fn value(&self, alpha: &[f64]) -> f64 {
        let mut s = Vec::with_capacity(self.support.len());
        let max = self.exponents(alpha, &mut s);
        let z: f64 = s.iter().map(|v| (v - max).exp()).sum();
        -(max + z.ln())
    }

    /// Adds `weight * grad mu_x(alpha)` into `grad` and returns `mu_x(alpha)`.
    pub fn value_grad(&self, alpha: &[f64], weight: f64, grad: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
        let max = self.exponents(alpha, scratch);
        let mut z = 0.0;
        for v in scratch.iter_mut() {
            *v = (*v - max).exp();
            z += *v;
        }
        for (w, row) in scratch.iter().zip(self.logp.chunks_exact(self.arity)) {
            let q = w / z;
            for (g, l) in grad.iter_mut().zip(row) {
                *g -= weight * q * l;
            }
        }
        -(max + z.ln())
    }

    /// The tilted distribution `Q*_x`, indexed like `support`.
    pub fn tilted(&self, alpha: &[f64]) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.support.len());
        let max = self.exponents(alpha, &mut s);
        let z: f64 = s.iter().map(|v| (v - max).exp()).sum();
        s.iter().map(|v| (v - max).exp() / z).collect()
    }
}

fn check_alpha(tuple: &[usize], alpha: &SimplexPoint) -> Result<()> {
    if alpha.dim() != tuple.len() {
        return Err(Error::DimensionMismatch(format!(
            "alpha has {} entries for a tuple of length {}",
            alpha.dim(),
            tuple.len()
        )));
    }
    Ok(())
}

/// `mu_x(alpha) = -ln sum_{y in Y_x} prod_k P(y|x_k)^alpha_k`, in nats.
pub fn mu_x(ch: &Channel, tuple: &[usize], alpha: &SimplexPoint) -> Result<f64> {
    ch.check_tuple(tuple)?;
    check_alpha(tuple, alpha)?;
    let kernel = TupleKernel::new(ch, tuple)?;
    // Nonnegative by Hoelder; clamp rounding noise.
    Ok(kernel.value(alpha.as_slice()).max(0.0))
}

/// Gradient of `mu_x` with respect to `alpha`: `-sum_y Q*_x(y) ln P(y|x_k)`.
pub fn mu_x_gradient(ch: &Channel, tuple: &[usize], alpha: &SimplexPoint) -> Result<Vec<f64>> {
    ch.check_tuple(tuple)?;
    check_alpha(tuple, alpha)?;
    let kernel = TupleKernel::new(ch, tuple)?;
    let mut grad = vec![0.0; tuple.len()];
    kernel.value_grad(alpha.as_slice(), 1.0, &mut grad, &mut Vec::new());
    Ok(grad)
}

/// The minimizing tilted distribution `Q*_x(y) ~ prod_k P(y|x_k)^alpha_k` on
/// `Y_x`, returned as a dense vector over the whole output alphabet.
pub fn q_star_x(ch: &Channel, tuple: &[usize], alpha: &SimplexPoint) -> Result<Vec<f64>> {
    ch.check_tuple(tuple)?;
    check_alpha(tuple, alpha)?;
    let kernel = TupleKernel::new(ch, tuple)?;
    let mut dense = vec![0.0; ch.output_size()];
    for (&y, q) in kernel.support.iter().zip(kernel.tilted(alpha.as_slice())) {
        dense[y] = q;
    }
    Ok(dense)
}

/// `D(p || q) = sum p ln(p/q)` with `0 ln 0 = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<Divergence> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Ok(Divergence::Infinite);
        }
        total += pi * (pi / qi).ln();
    }
    Ok(Divergence::Finite(total.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z_channel() -> Channel {
        Channel::new(&[vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap()
    }

    fn random_channel(rng: &mut impl Rng, nx: usize, ny: usize) -> Channel {
        let rows: Vec<Vec<f64>> = (0..nx)
            .map(|_| {
                let raw: Vec<f64> = (0..ny).map(|_| -rng.gen::<f64>().ln()).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|v| v / s).collect()
            })
            .collect();
        Channel::new(&rows).unwrap()
    }

    fn random_simplex(rng: &mut impl Rng, d: usize) -> SimplexPoint {
        let raw: Vec<f64> = (0..d).map(|_| -rng.gen::<f64>().ln()).collect();
        let s: f64 = raw.iter().sum();
        SimplexPoint::from_raw(raw.iter().map(|v| v / s).collect())
    }

    #[test]
    fn validate_examples() {
        let bsc = Channel::new(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert_eq!((bsc.input_size(), bsc.output_size()), (2, 2));
        assert!(matches!(
            Channel::new(&[vec![0.5, 0.4]]),
            Err(Error::NonStochastic(_))
        ));
        let one = Channel::new(&[vec![1.0]]).unwrap();
        assert_eq!((one.input_size(), one.output_size()), (1, 1));
        assert_eq!(Channel::new(&[]), Err(Error::EmptyAlphabet));
        assert_eq!(Channel::new(&[vec![]]), Err(Error::EmptyAlphabet));
        assert!(matches!(
            Channel::new(&[vec![1.1, -0.1]]),
            Err(Error::NonStochastic(_))
        ));
        assert!(matches!(
            Channel::new(&[vec![1.0], vec![0.5, 0.5]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn near_stochastic_rows_are_renormalized() {
        let ch = Channel::new(&[vec![0.5 + 4e-13, 0.5]]).unwrap();
        let s: f64 = ch.row(0).iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        let tiny = Channel::new(&[vec![1.0 - 1e-16, 1e-16]]).unwrap();
        assert_eq!(tiny.prob(0, 1), 0.0);
    }

    #[test]
    fn channel_json_round_trip() {
        let ch = Channel::from_json(r#"{"matrix": [[0.9, 0.1], [0.1, 0.9]]}"#).unwrap();
        let text = serde_json::to_string(&ch.to_file()).unwrap();
        assert_eq!(Channel::from_json(&text).unwrap(), ch);
        assert!(matches!(Channel::from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn support_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        assert_eq!(support_set(&bsc, &[0, 1]).unwrap().outputs(), &[0, 1]);
        assert_eq!(support_set(&z_channel(), &[0, 1]).unwrap().outputs(), &[0]);
        assert!(support_set(&Channel::identity(2).unwrap(), &[0, 1])
            .unwrap()
            .is_empty());
        assert!(support_set(&bsc, &[0, 2]).is_err());
    }

    #[test]
    fn zero_error_examples() {
        assert!(check_list_zero_error_vanishes(&Channel::bsc(0.1).unwrap(), 1));
        assert!(!check_list_zero_error_vanishes(&Channel::identity(2).unwrap(), 1));
        let ch = Channel::new(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]).unwrap();
        assert!(!check_list_zero_error_vanishes(&ch, 2));
        // Pairs (0,2) and (1,2) overlap but (0,1) does not.
        assert!(!check_list_zero_error_vanishes(&ch, 1));
    }

    #[test]
    fn mu_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        let half = SimplexPoint::uniform(2);
        assert!(mu_x(&bsc, &[0, 0], &half).unwrap().abs() < 1e-15);
        let v = mu_x(&bsc, &[0, 1], &half).unwrap();
        assert!((v - (-(0.6f64).ln())).abs() < 1e-14);
        assert!((v - 0.51083).abs() < 1e-5);
        assert!(mu_x(&bsc, &[0, 1], &SimplexPoint::vertex(2, 0)).unwrap() < 1e-15);
        assert_eq!(
            mu_x(&Channel::identity(2).unwrap(), &[0, 1], &half),
            Err(Error::EmptySupport(vec![0, 1]))
        );
        assert!(matches!(
            mu_x(&bsc, &[0, 1, 1], &half),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn q_star_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        let q = q_star_x(&bsc, &[0, 1], &SimplexPoint::uniform(2)).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] - 0.5).abs() < 1e-15);
        let q = q_star_x(&bsc, &[0, 1], &SimplexPoint::vertex(2, 0)).unwrap();
        assert!((q[0] - 0.9).abs() < 1e-15 && (q[1] - 0.1).abs() < 1e-15);
        let z = z_channel();
        let q = q_star_x(&z, &[1, 1], &SimplexPoint::uniform(2)).unwrap();
        assert!((q[0] - 0.3).abs() < 1e-15 && (q[1] - 0.7).abs() < 1e-15);
        assert_eq!(
            q_star_x(&Channel::identity(2).unwrap(), &[0, 1], &SimplexPoint::uniform(2)),
            Err(Error::EmptySupport(vec![0, 1]))
        );
    }

    #[test]
    fn kl_examples() {
        assert_eq!(
            kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(),
            Divergence::Finite(0.0)
        );
        let v = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap().finite().unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(
            kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            Divergence::Infinite
        );
        assert!(matches!(
            kl_divergence(&[1.0], &[0.5, 0.5]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn mu_bounds_and_concavity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let nx = rng.gen_range(2..=4);
            let ny = rng.gen_range(2..=4);
            let ch = random_channel(&mut rng, nx, ny);
            let k = rng.gen_range(2..=3);
            let tuple: Vec<usize> = (0..k).map(|_| rng.gen_range(0..nx)).collect();
            let a = random_simplex(&mut rng, k);
            let b = random_simplex(&mut rng, k);
            let mid = SimplexPoint::from_raw(
                a.as_slice().iter().zip(b.as_slice()).map(|(u, v)| 0.5 * (u + v)).collect(),
            );
            let (fa, fb, fm) = (
                mu_x(&ch, &tuple, &a).unwrap(),
                mu_x(&ch, &tuple, &b).unwrap(),
                mu_x(&ch, &tuple, &mid).unwrap(),
            );
            assert!(fm >= 0.5 * (fa + fb) - 1e-10);
            let upper = -(0..ny)
                .map(|y| tuple.iter().map(|&x| ch.prob(x, y)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
                .ln();
            assert!(fa >= 0.0 && fa <= upper + 1e-12);
        }
    }

    #[test]
    fn mu_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let ch = random_channel(&mut rng, 3, 3);
            let tuple = vec![rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(0..3)];
            let a = random_simplex(&mut rng, 3);
            let perm = [2usize, 0, 1];
            let t2: Vec<usize> = perm.iter().map(|&i| tuple[i]).collect();
            let a2 = SimplexPoint::from_raw(perm.iter().map(|&i| a.as_slice()[i]).collect());
            let (u, v) = (mu_x(&ch, &tuple, &a).unwrap(), mu_x(&ch, &t2, &a2).unwrap());
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let ch = random_channel(&mut rng, 3, 4);
            let tuple = vec![rng.gen_range(0..3), rng.gen_range(0..3)];
            let a = random_simplex(&mut rng, 2);
            let g = mu_x_gradient(&ch, &tuple, &a).unwrap();
            let kernel = TupleKernel::new(&ch, &tuple).unwrap();
            let h = 1e-6;
            for k in 0..2 {
                let mut up = a.as_slice().to_vec();
                let mut dn = a.as_slice().to_vec();
                up[k] += h;
                dn[k] -= h;
                let fd = (kernel.value(&up) - kernel.value(&dn)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-6, "{fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn lemma_one_single_letter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let ch = random_channel(&mut rng, 3, 3);
            let tuple = vec![rng.gen_range(0..3), rng.gen_range(0..3)];
            let a = random_simplex(&mut rng, 2);
            let mu = mu_x(&ch, &tuple, &a).unwrap();
            let weighted = |t: &[f64]| -> f64 {
                tuple
                    .iter()
                    .zip(a.as_slice())
                    .map(|(&x, w)| w * kl_divergence(t, ch.row(x)).unwrap().finite().unwrap())
                    .sum()
            };
            let star = q_star_x(&ch, &tuple, &a).unwrap();
            assert!((weighted(&star) - mu).abs() < 1e-9);
            for _ in 0..50 {
                let t = random_simplex(&mut rng, 3).into_inner();
                assert!(weighted(&t) >= mu - 1e-12);
            }
        }
    }
}
