//! Exact maximum-likelihood list decoding at small blocklength.
//!
//! Error probabilities are computed three ways: by enumerating every output
//! sequence, by enumerating conditional type classes of an `L+1` subset, and
//! (for two codewords) by a dynamic program over the log-likelihood ratio.
//!
//! Likelihoods are compared through a canonical form: the integer exponent of
//! each distinct transition probability. Equal likelihoods therefore compare
//! equal bit for bit, and ties always go to the lowest message index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::combinatorics::{tuple_count, tuple_from_index};
use crate::error::{guard, Error, Result};
use crate::exponent::{d_min, DEFAULT_SUBSET_GUARD};
use crate::par;
use crate::types::{check_subset, enumerate_conditional_types, Code, DEFAULT_ENUMERATION_GUARD};
use crate::util::neumaier_sum;

/// Which computation produced a [`DecodingOutcome`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMethod {
    Direct,
    Types,
    Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingOutcome {
    pub per_message_error: Vec<f64>,
    pub average: f64,
    pub maximal: f64,
    pub method: DecodeMethod,
    /// Probability, under each message, of the outputs outside the common
    /// support of all codewords.
    pub outside_support_mass: Vec<f64>,
    /// Part of each error probability coming from those outputs. The type
    /// method counts them as correct, so it reports zeros here.
    pub outside_support_error: Vec<f64>,
}

impl DecodingOutcome {
    fn new(
        per_message_error: Vec<f64>,
        method: DecodeMethod,
        outside_support_mass: Vec<f64>,
        outside_support_error: Vec<f64>,
    ) -> Self {
        let per_message_error: Vec<f64> =
            per_message_error.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let average = neumaier_sum(per_message_error.iter().copied()) / per_message_error.len() as f64;
        let maximal = per_message_error.iter().copied().fold(0.0, f64::max);
        DecodingOutcome {
            per_message_error,
            average,
            maximal,
            method,
            outside_support_mass,
            outside_support_error,
        }
    }
}

/// Canonical log-likelihoods for one channel.
#[derive(Clone, Debug)]
pub(crate) struct LogLikelihood {
    ln_values: Vec<f64>,
    /// Value index of `P(y|x)` at `x * |Y| + y`, or `None` for zeros.
    slot: Vec<Option<usize>>,
    outputs: usize,
}

impl LogLikelihood {
    pub(crate) fn new(ch: &Channel) -> Self {
        let mut values: Vec<f64> = (0..ch.input_size())
            .flat_map(|x| ch.row(x).iter().copied())
            .filter(|&p| p > 0.0)
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let slot = (0..ch.input_size())
            .flat_map(|x| ch.row(x).iter().copied())
            .map(|p| if p > 0.0 { values.iter().position(|&v| v == p) } else { None })
            .collect();
        LogLikelihood {
            ln_values: values.iter().map(|v| v.ln()).collect(),
            slot,
            outputs: ch.output_size(),
        }
    }

    pub(crate) fn value_count(&self) -> usize {
        self.ln_values.len()
    }

    pub(crate) fn slot(&self, x: usize, y: usize) -> Option<usize> {
        self.slot[x * self.outputs + y]
    }

    /// `sum_v e_v ln v` in a fixed order.
    pub(crate) fn evaluate(&self, exponents: &[u32]) -> f64 {
        exponents
            .iter()
            .zip(&self.ln_values)
            .filter(|(&e, _)| e != 0)
            .map(|(&e, l)| e as f64 * l)
            .sum()
    }

    /// `ln P_m(y)`, or `-inf` when some transition is impossible.
    pub(crate) fn of_sequence(&self, word: &[usize], y: &[usize], exps: &mut Vec<u32>) -> f64 {
        exps.clear();
        exps.resize(self.ln_values.len(), 0);
        for (&x, &s) in word.iter().zip(y) {
            match self.slot(x, s) {
                Some(v) => exps[v] += 1,
                None => return f64::NEG_INFINITY,
            }
        }
        self.evaluate(exps)
    }
}

fn check_output(ch: &Channel, code: &Code, y: &[usize]) -> Result<()> {
    code.check_channel(ch)?;
    if y.len() != code.blocklength() {
        return Err(Error::LengthMismatch {
            expected: code.blocklength(),
            got: y.len(),
        });
    }
    if let Some(&s) = y.iter().find(|&&s| s >= ch.output_size()) {
        return Err(Error::SymbolOutOfRange(format!(
            "output symbol {s} with |Y| = {}",
            ch.output_size()
        )));
    }
    Ok(())
}

/// `P_m(y) = prod_i P(y_i | x_{m,i})`.
pub fn likelihood(ch: &Channel, code: &Code, m: usize, y: &[usize]) -> Result<f64> {
    check_output(ch, code, y)?;
    check_subset(code, &[m])?;
    let ll = LogLikelihood::new(ch);
    Ok(ll.of_sequence(code.word(m), y, &mut Vec::new()).exp())
}

/// Indices of the `L` largest entries, ties to the lowest index, ascending.
fn top_list(logliks: &[f64], list_size: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..logliks.len()).collect();
    order.sort_by(|&a, &b| logliks[b].total_cmp(&logliks[a]).then(a.cmp(&b)));
    order.truncate(list_size);
    order.sort_unstable();
    order
}

/// The `L` most likely messages for `y`, ascending. With `L >= M` every
/// message is returned.
pub fn ml_list_decode(ch: &Channel, code: &Code, y: &[usize], list_size: usize) -> Result<Vec<usize>> {
    check_output(ch, code, y)?;
    let ll = LogLikelihood::new(ch);
    let mut exps = Vec::new();
    let logliks: Vec<f64> = code
        .words()
        .iter()
        .map(|w| ll.of_sequence(w, y, &mut exps))
        .collect();
    Ok(top_list(&logliks, list_size))
}

/// Sums `P_m(y) 1[m not in list(y)]` over every `y` in `Y^n`.
pub fn error_probabilities_direct(
    ch: &Channel,
    code: &Code,
    list_size: usize,
    size_guard: f64,
) -> Result<DecodingOutcome> {
    code.check_channel(ch)?;
    let n = code.blocklength();
    let outputs = ch.output_size();
    guard(
        "output sequences",
        (outputs as f64).powi(n as i32),
        size_guard,
    )?;
    let m = code.size();
    let ll = LogLikelihood::new(ch);
    let total = tuple_count(outputs, n);
    let chunks = par::chunk_ranges(total, 1024);
    // Per chunk: error, outside-support mass, outside-support error.
    let parts = par::map(&chunks, |&(lo, hi)| {
        let mut err = vec![Vec::new(); m];
        let mut out_mass = vec![Vec::new(); m];
        let mut out_err = vec![Vec::new(); m];
        let mut exps = Vec::new();
        let mut logliks = vec![0.0; m];
        for idx in lo..hi {
            let y = tuple_from_index(idx as usize, outputs, n);
            for (k, w) in code.words().iter().enumerate() {
                logliks[k] = ll.of_sequence(w, &y, &mut exps);
            }
            let outside = logliks.contains(&f64::NEG_INFINITY);
            let list = top_list(&logliks, list_size);
            for k in 0..m {
                if logliks[k] == f64::NEG_INFINITY {
                    continue;
                }
                let p = logliks[k].exp();
                let wrong = list.binary_search(&k).is_err();
                if wrong {
                    err[k].push(p);
                }
                if outside {
                    out_mass[k].push(p);
                    if wrong {
                        out_err[k].push(p);
                    }
                }
            }
        }
        let fold = |v: Vec<Vec<f64>>| v.into_iter().map(neumaier_sum).collect::<Vec<f64>>();
        (fold(err), fold(out_mass), fold(out_err))
    });
    let mut err = vec![Vec::with_capacity(parts.len()); m];
    let mut out_mass = vec![Vec::with_capacity(parts.len()); m];
    let mut out_err = vec![Vec::with_capacity(parts.len()); m];
    for (e, om, oe) in parts {
        for k in 0..m {
            err[k].push(e[k]);
            out_mass[k].push(om[k]);
            out_err[k].push(oe[k]);
        }
    }
    let fold = |v: Vec<Vec<f64>>| v.into_iter().map(neumaier_sum).collect::<Vec<f64>>();
    Ok(DecodingOutcome::new(
        fold(err),
        DecodeMethod::Direct,
        fold(out_mass),
        fold(out_err),
    ))
}

/// `P_m(Y^n minus the common support)`, per message of `subset`.
fn outside_mass(ch: &Channel, code: &Code, subset: &[usize]) -> Vec<f64> {
    let n = code.blocklength();
    subset
        .iter()
        .map(|&m| {
            let mut inside = 1.0;
            for c in 0..n {
                let tuple = code.column(subset, c);
                let support = ch.support(&tuple);
                inside *= support
                    .outputs()
                    .iter()
                    .map(|&y| ch.prob(code.word(m)[c], y))
                    .sum::<f64>();
            }
            (1.0 - inside).max(0.0)
        })
        .collect()
}

/// Decodes an `L+1` subset on conditional type classes: in each class the
/// message with the largest weighted divergence (the smallest likelihood,
/// latest index on ties) is the one left off the list.
pub fn error_probabilities_via_types(
    ch: &Channel,
    code: &Code,
    subset: &[usize],
    list_size: usize,
    size_guard: f64,
) -> Result<DecodingOutcome> {
    if subset.len() != list_size + 1 {
        return Err(Error::BadSubset(format!(
            "type decoding needs L+1 = {} codewords, got {}",
            list_size + 1,
            subset.len()
        )));
    }
    let classes = enumerate_conditional_types(ch, code, subset, size_guard)?;
    let ll = LogLikelihood::new(ch);
    let k = subset.len();
    let chunks = par::chunk_ranges(classes.total(), 1024);
    let parts = par::map(&chunks, |&(lo, hi)| {
        let mut err = vec![Vec::new(); k];
        let mut exps = vec![0u32; ll.value_count()];
        let mut logliks = vec![0.0; k];
        for idx in lo..hi {
            let hists = classes.histograms_at(idx);
            for (j, slot) in logliks.iter_mut().enumerate() {
                exps.iter_mut().for_each(|e| *e = 0);
                for (tuple, h) in &hists {
                    for (y, &c) in h.iter().enumerate() {
                        if c > 0 {
                            let v = ll.slot(tuple[j], y).expect("class inside the support");
                            exps[v] += c as u32;
                        }
                    }
                }
                *slot = ll.evaluate(&exps);
            }
            let excluded = top_list_complement(&logliks, list_size);
            let size: f64 = hists
                .iter()
                .map(|(_, h)| crate::combinatorics::multinomial(h).map_or(f64::INFINITY, |s| s as f64))
                .product();
            err[excluded].push(size * logliks[excluded].exp());
        }
        err.into_iter().map(neumaier_sum).collect::<Vec<f64>>()
    });
    let mut err = vec![Vec::with_capacity(parts.len()); k];
    for p in parts {
        for j in 0..k {
            err[j].push(p[j]);
        }
    }
    Ok(DecodingOutcome::new(
        err.into_iter().map(neumaier_sum).collect(),
        DecodeMethod::Types,
        outside_mass(ch, code, subset),
        vec![0.0; k],
    ))
}

/// The single index not in `top_list(logliks, len - 1)`.
fn top_list_complement(logliks: &[f64], list_size: usize) -> usize {
    let list = top_list(logliks, list_size);
    (0..logliks.len())
        .find(|i| list.binary_search(i).is_err())
        .expect("one message left off")
}

/// Exact error probabilities of a two-codeword code with `L = 1`, by a
/// dynamic program over the canonical log-likelihood difference. The state
/// count grows polynomially in `n`, so blocklengths in the thousands work for
/// channels with few distinct transition probabilities.
pub fn error_probabilities_pair(ch: &Channel, code: &Code) -> Result<DecodingOutcome> {
    code.check_channel(ch)?;
    if code.size() != 2 {
        return Err(Error::BadSubset(format!(
            "the pairwise method needs exactly 2 codewords, got {}",
            code.size()
        )));
    }
    let ll = LogLikelihood::new(ch);
    let v = ll.value_count();
    // State: (exponent difference e_0 - e_1, P_0 zero, P_1 zero) -> masses under each message.
    type State = (Vec<i32>, bool, bool);
    let mut states: BTreeMap<State, [f64; 2]> = BTreeMap::new();
    states.insert((vec![0; v], false, false), [1.0, 1.0]);
    let (w0, w1) = (code.word(0), code.word(1));
    for c in 0..code.blocklength() {
        let mut next: BTreeMap<State, [f64; 2]> = BTreeMap::new();
        for ((diff, z0, z1), mass) in &states {
            for y in 0..ch.output_size() {
                let (s0, s1) = (ll.slot(w0[c], y), ll.slot(w1[c], y));
                if s0.is_none() && s1.is_none() {
                    continue;
                }
                let mut d = diff.clone();
                if let (Some(a), Some(b)) = (s0, s1) {
                    d[a] += 1;
                    d[b] -= 1;
                }
                let key = (d, *z0 || s0.is_none(), *z1 || s1.is_none());
                let entry = next.entry(key).or_insert([0.0, 0.0]);
                entry[0] += mass[0] * ch.prob(w0[c], y);
                entry[1] += mass[1] * ch.prob(w1[c], y);
            }
        }
        states = next;
    }
    let mut err = [Vec::new(), Vec::new()];
    let mut out_mass = [Vec::new(), Vec::new()];
    let mut out_err = [Vec::new(), Vec::new()];
    for ((diff, z0, z1), mass) in states {
        // Message 0 is listed unless message 1 is strictly more likely.
        let decide_one = match (z0, z1) {
            (true, _) => true,
            (false, true) => false,
            _ => {
                let pos: Vec<u32> = diff.iter().map(|&d| d.max(0) as u32).collect();
                let neg: Vec<u32> = diff.iter().map(|&d| (-d).max(0) as u32).collect();
                ll.evaluate(&neg) > ll.evaluate(&pos)
            }
        };
        let wrong = if decide_one { 0 } else { 1 };
        if !(z0 && z1) {
            err[wrong].push(mass[wrong]);
        }
        if z0 || z1 {
            for k in 0..2 {
                out_mass[k].push(mass[k]);
            }
            out_err[wrong].push(mass[wrong]);
        }
    }
    let fold = |v: [Vec<f64>; 2]| v.into_iter().map(neumaier_sum).collect::<Vec<f64>>();
    Ok(DecodingOutcome::new(
        fold(err),
        DecodeMethod::Pair,
        fold(out_mass),
        fold(out_err),
    ))
}

/// Exact error probabilities by the cheapest applicable method.
pub fn error_probabilities(
    ch: &Channel,
    code: &Code,
    list_size: usize,
    size_guard: f64,
) -> Result<DecodingOutcome> {
    if code.size() == 2 && list_size == 1 {
        error_probabilities_pair(ch, code)
    } else {
        error_probabilities_direct(ch, code, list_size, size_guard)
    }
}

/// Finite-`n` check of the maximal-error lower bound for one code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub p_e_max: f64,
    /// Smallest largest weighted divergence over the realizable types of the
    /// witness subset.
    pub d_prime: f64,
    /// `(L+1)^{-1} (n+1)^{-|X|^{L+1}|Y|} exp(-n D')`.
    pub bound: f64,
    pub ln_bound: f64,
    /// `-ln(P_e,max) / n`.
    pub empirical_exponent: f64,
    pub d_min: f64,
    pub witness: Vec<usize>,
    /// `D' + (|X|^{L+1}|Y| ln(n+1) + ln(L+1)) / n`.
    pub exponent_ceiling: f64,
    pub method: DecodeMethod,
}

/// `max_k sum_x q(x) D(T_x || P(.|x_k))` minimized over every type class of
/// `subset`, in nats per letter.
pub fn lattice_min_max(ch: &Channel, code: &Code, subset: &[usize], size_guard: f64) -> Result<f64> {
    let classes = enumerate_conditional_types(ch, code, subset, size_guard)?;
    let n = code.blocklength() as f64;
    let k = subset.len();
    let chunks = par::chunk_ranges(classes.total(), 1024);
    let parts = par::map(&chunks, |&(lo, hi)| {
        let mut best = f64::INFINITY;
        for idx in lo..hi {
            let hists = classes.histograms_at(idx);
            let mut worst = f64::NEG_INFINITY;
            for j in 0..k {
                let mut d = 0.0;
                for (tuple, h) in &hists {
                    let size: usize = h.iter().sum();
                    for (y, &c) in h.iter().enumerate() {
                        if c > 0 {
                            let c = c as f64;
                            d += c * ((c / size as f64).ln() - ch.log_prob(tuple[j], y));
                        }
                    }
                }
                worst = worst.max(d / n);
            }
            best = best.min(worst);
        }
        best
    });
    Ok(parts.into_iter().fold(f64::INFINITY, f64::min).max(0.0))
}

/// Checks `P_e,max >= (L+1)^{-1} (n+1)^{-|X|^{L+1}|Y|} exp(-n D')` with `D'`
/// taken at the `D_min` witness subset.
pub fn verify_lower_bound(ch: &Channel, code: &Code, list_size: usize) -> Result<LowerBoundReport> {
    let dm = d_min(ch, code, list_size, DEFAULT_SUBSET_GUARD)?;
    let outcome = error_probabilities(ch, code, list_size, DEFAULT_ENUMERATION_GUARD)?;
    let d_prime = lattice_min_max(ch, code, &dm.witness, DEFAULT_ENUMERATION_GUARD)?;
    let n = code.blocklength() as f64;
    let k = list_size + 1;
    let dims = (code.alphabet_size() as f64).powi(k as i32) * ch.output_size() as f64;
    let ln_bound = -(k as f64).ln() - dims * (n + 1.0).ln() - n * d_prime;
    let bound = ln_bound.exp();
    let report = LowerBoundReport {
        p_e_max: outcome.maximal,
        d_prime,
        bound,
        ln_bound,
        empirical_exponent: -outcome.maximal.ln() / n,
        d_min: dm.d_min,
        witness: dm.witness,
        exponent_ceiling: d_prime + (dims * (n + 1.0).ln() + (k as f64).ln()) / n,
        method: outcome.method,
    };
    if outcome.maximal.ln() < ln_bound {
        return Err(Error::BoundViolation(format!(
            "P_e,max = {:e} is below the bound exp({ln_bound})",
            outcome.maximal
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(words: &[&[usize]]) -> Code {
        Code::from_words(words.iter().map(|w| w.to_vec()).collect()).unwrap()
    }

    #[test]
    fn likelihood_examples() {
        let id = Channel::identity(2).unwrap();
        let c = code(&[&[0, 1, 1]]);
        assert_eq!(likelihood(&id, &c, 0, &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(likelihood(&id, &c, 0, &[1, 1, 1]).unwrap(), 0.0);
        let bsc = Channel::bsc(0.1).unwrap();
        let c = code(&[&[0, 0]]);
        assert!((likelihood(&bsc, &c, 0, &[0, 1]).unwrap() - 0.09).abs() < 1e-15);
        assert!(matches!(
            likelihood(&bsc, &c, 0, &[0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn decode_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        let c = code(&[&[0], &[1]]);
        assert_eq!(ml_list_decode(&bsc, &c, &[0], 1).unwrap(), vec![0]);
        assert_eq!(ml_list_decode(&bsc, &c, &[1], 1).unwrap(), vec![1]);
        let twins = code(&[&[0, 1], &[0, 1]]);
        for y in crate::combinatorics::all_tuples(2, 2) {
            assert_eq!(ml_list_decode(&bsc, &twins, &y, 1).unwrap(), vec![0]);
            assert_eq!(ml_list_decode(&bsc, &twins, &y, 2).unwrap(), vec![0, 1]);
        }
    }

    #[test]
    fn canonical_ties_are_exact() {
        let bsc = Channel::bsc(0.1).unwrap();
        let ll = LogLikelihood::new(&bsc);
        let mut e = Vec::new();
        let a = ll.of_sequence(&[0, 1, 0, 1], &[0, 0, 1, 1], &mut e);
        let b = ll.of_sequence(&[1, 0, 1, 0], &[0, 0, 1, 1], &mut e);
        assert_eq!(a, b);
        assert_eq!(ll.value_count(), 2);
    }

    #[test]
    fn direct_examples() {
        for p in [0.1, 0.25, 0.4] {
            let bsc = Channel::bsc(p).unwrap();
            let c = code(&[&[0], &[1]]);
            let r = error_probabilities_direct(&bsc, &c, 1, 1e7).unwrap();
            for e in &r.per_message_error {
                assert!((e - p).abs() < 1e-15);
            }
            assert!((r.average - p).abs() < 1e-15);
        }
        let bsc = Channel::bsc(0.1).unwrap();
        let twins = code(&[&[0, 1, 1], &[0, 1, 1]]);
        let r = error_probabilities_direct(&bsc, &twins, 1, 1e7).unwrap();
        assert_eq!(r.per_message_error, vec![0.0, 1.0]);
        assert_eq!(r.average, 0.5);
        let three = code(&[&[0, 1], &[1, 1], &[1, 0]]);
        let r = error_probabilities_direct(&bsc, &three, 3, 1e7).unwrap();
        assert_eq!(r.per_message_error, vec![0.0; 3]);
        assert!(matches!(
            error_probabilities_direct(&bsc, &three, 1, 3.0),
            Err(Error::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn types_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        let twins = code(&[&[0, 1, 0], &[0, 1, 0], &[0, 1, 0]]);
        let r = error_probabilities_via_types(&bsc, &twins, &[0, 1, 2], 2, 1e7).unwrap();
        assert_eq!(r.per_message_error, vec![0.0, 0.0, 1.0]);
        assert!((r.average - 1.0 / 3.0).abs() < 1e-15);
        let z = Channel::new(&[vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        let single = code(&[&[0], &[1]]);
        let r = error_probabilities_via_types(&z, &single, &[0, 1], 1, 1e7).unwrap();
        assert_eq!(r.per_message_error, vec![0.0, 0.3]);
        assert!((r.outside_support_mass[1] - 0.7).abs() < 1e-15);
        let direct = error_probabilities_direct(&z, &single, 1, 1e7).unwrap();
        for k in 0..2 {
            let reconciled = direct.per_message_error[k] - direct.outside_support_error[k];
            assert!((reconciled - r.per_message_error[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn pair_matches_direct() {
        let ch = Channel::new(&[
            vec![0.5, 0.3, 0.2],
            vec![0.2, 0.0, 0.8],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        let c = code(&[&[0, 1, 2, 2, 1, 0], &[1, 1, 0, 2, 2, 2]]);
        let a = error_probabilities_pair(&ch, &c).unwrap();
        let b = error_probabilities_direct(&ch, &c, 1, 1e7).unwrap();
        for k in 0..2 {
            assert!((a.per_message_error[k] - b.per_message_error[k]).abs() < 1e-14);
            assert!((a.outside_support_mass[k] - b.outside_support_mass[k]).abs() < 1e-14);
            assert!((a.outside_support_error[k] - b.outside_support_error[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        for n in [4, 8, 16] {
            let c = Code::new(vec![vec![0; n], vec![1; n]], 2).unwrap();
            let r = verify_lower_bound(&bsc, &c, 1).unwrap();
            assert!(r.p_e_max >= r.bound);
            assert!(r.empirical_exponent <= r.exponent_ceiling);
        }
        let twins = code(&[&[0, 1, 1], &[0, 1, 1]]);
        let r = verify_lower_bound(&bsc, &twins, 1).unwrap();
        assert_eq!(r.p_e_max, 1.0);
        assert_eq!(r.d_min, 0.0);
        assert!(r.bound <= 1.0);
    }
}
