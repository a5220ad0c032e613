//! Codes and the method-of-types machinery: joint types of codeword subsets,
//! the coordinate regions they induce, conditional output types, exact
//! enumeration of conditional type classes, and per-column symbol counts.
//!
//! Everything here is exact integer or rational arithmetic.

use std::collections::BTreeMap;

use crate::channel::Channel;
use crate::combinatorics::{binomial_f64, compositions, ln_multinomial, multinomial, tuple_index};
use crate::error::{guard, Error, Result};
use crate::Rational;

/// `M` codewords of common length `n` over an input alphabet of size `|X|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code {
    alphabet: usize,
    words: Vec<Vec<usize>>,
}

impl Code {
    pub fn new(words: Vec<Vec<usize>>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if words.is_empty() || words[0].is_empty() {
            return Err(Error::DimensionMismatch("code needs M >= 1 and n >= 1".into()));
        }
        let n = words[0].len();
        for (m, w) in words.iter().enumerate() {
            if w.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "codeword {m} has length {}, expected {n}",
                    w.len()
                )));
            }
            if let Some(s) = w.iter().find(|&&s| s >= alphabet) {
                return Err(Error::SymbolOutOfRange(format!(
                    "codeword {m} has symbol {s} with |X| = {alphabet}"
                )));
            }
        }
        Ok(Code { alphabet, words })
    }

    /// Builds a code whose alphabet is the smallest one containing its symbols.
    pub fn from_words(words: Vec<Vec<usize>>) -> Result<Self> {
        let alphabet = words.iter().flatten().copied().max().map_or(1, |m| m + 1);
        Code::new(words, alphabet)
    }

    /// Parses the text format: one codeword per line, symbols as
    /// whitespace-separated 0-based integers, optional header `# |X|=k`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut alphabet = None;
        let mut words = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest: String = rest.chars().filter(|c| !c.is_whitespace()).collect();
                if let Some(k) = rest.strip_prefix("|X|=") {
                    let k = k
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                    alphabet = Some(k);
                }
                continue;
            }
            let word = line
                .split_whitespace()
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            words.push(word);
        }
        match alphabet {
            Some(k) => Code::new(words, k),
            None => Code::from_words(words),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# |X|={}\n", self.alphabet);
        for w in &self.words {
            let line: Vec<String> = w.iter().map(|s| s.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Number of codewords `M`.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// Blocklength `n`.
    pub fn blocklength(&self) -> usize {
        self.words[0].len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn word(&self, m: usize) -> &[usize] {
        &self.words[m]
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    /// The codewords at `indices`, in that order.
    pub fn subcode(&self, indices: &[usize]) -> Result<Code> {
        check_subset(self, indices)?;
        Ok(Code {
            alphabet: self.alphabet,
            words: indices.iter().map(|&m| self.words[m].clone()).collect(),
        })
    }

    pub(crate) fn check_channel(&self, ch: &Channel) -> Result<()> {
        if self.alphabet > ch.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "code alphabet {} exceeds channel input alphabet {}",
                self.alphabet,
                ch.input_size()
            )));
        }
        Ok(())
    }

    /// Column `c` of the subset, as a tuple.
    pub(crate) fn column(&self, subset: &[usize], c: usize) -> Vec<usize> {
        subset.iter().map(|&m| self.words[m][c]).collect()
    }
}

pub(crate) fn check_subset(code: &Code, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::BadSubset("empty subset".into()));
    }
    for (i, &m) in subset.iter().enumerate() {
        if m >= code.size() {
            return Err(Error::BadSubset(format!(
                "index {m} out of range for M = {}",
                code.size()
            )));
        }
        if subset[..i].contains(&m) {
            return Err(Error::BadSubset(format!("index {m} repeated")));
        }
    }
    Ok(())
}

/// Joint type of an ordered subset of codewords: column-tuple counts over `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointType {
    alphabet: usize,
    blocklength: usize,
    counts: BTreeMap<Vec<usize>, usize>,
}

impl JointType {
    pub fn arity(&self) -> usize {
        self.counts.keys().next().map_or(0, Vec::len)
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Number of columns equal to `tuple`.
    pub fn count(&self, tuple: &[usize]) -> usize {
        self.counts.get(tuple).copied().unwrap_or(0)
    }

    /// `q(x)` as an exact fraction with denominator `n`.
    pub fn weight(&self, tuple: &[usize]) -> Rational {
        Rational::new(self.count(tuple) as i128, self.blocklength as i128)
    }

    pub fn prob(&self, tuple: &[usize]) -> f64 {
        self.count(tuple) as f64 / self.blocklength as f64
    }

    /// Tuples with positive weight and their counts, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], usize)> {
        self.counts.iter().map(|(t, &c)| (t.as_slice(), c))
    }

    /// Counts indexed by lexicographic tuple index over `X^K`.
    pub fn dense_counts(&self) -> Vec<usize> {
        let k = self.arity();
        let mut out = vec![0; self.alphabet.pow(k as u32)];
        for (t, &c) in &self.counts {
            out[tuple_index(t, self.alphabet)] = c;
        }
        out
    }
}

/// `q_m(x) = |{c : column c of the subset equals x}| / n`.
pub fn joint_type(code: &Code, subset: &[usize]) -> Result<JointType> {
    check_subset(code, subset)?;
    let mut counts = BTreeMap::new();
    for c in 0..code.blocklength() {
        *counts.entry(code.column(subset, c)).or_insert(0) += 1;
    }
    Ok(JointType {
        alphabet: code.alphabet_size(),
        blocklength: code.blocklength(),
        counts,
    })
}

/// Dense joint-type counts for a subset known to be valid; the hot path of
/// coloring and pairwise optimization.
pub(crate) fn joint_counts_dense(code: &Code, subset: &[usize]) -> Vec<u32> {
    let a = code.alphabet_size();
    let mut out = vec![0u32; a.pow(subset.len() as u32)];
    for c in 0..code.blocklength() {
        let idx = subset.iter().fold(0, |acc, &m| acc * a + code.words[m][c]);
        out[idx] += 1;
    }
    out
}

/// Coordinates (0-based) where the subset shows each column tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionPartition {
    pub regions: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl RegionPartition {
    pub fn region(&self, tuple: &[usize]) -> &[usize] {
        self.regions.get(tuple).map_or(&[], Vec::as_slice)
    }
}

/// Tuples with zero weight are absent from the partition.
pub fn region_partition(code: &Code, subset: &[usize]) -> Result<RegionPartition> {
    check_subset(code, subset)?;
    let mut regions: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for c in 0..code.blocklength() {
        regions.entry(code.column(subset, c)).or_default().push(c);
    }
    Ok(RegionPartition { regions })
}

/// Output histograms per region: for each column tuple `x`, the counts of each
/// output symbol over `I_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionalType {
    outputs: usize,
    histograms: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl ConditionalType {
    /// Counts over the whole output alphabet for region `tuple`.
    pub fn histogram(&self, tuple: &[usize]) -> Option<&[usize]> {
        self.histograms.get(tuple).map(Vec::as_slice)
    }

    /// `T_x` as a float distribution over the output alphabet.
    pub fn distribution(&self, tuple: &[usize]) -> Option<Vec<f64>> {
        let h = self.histograms.get(tuple)?;
        let total: usize = h.iter().sum();
        Some(h.iter().map(|&c| c as f64 / total as f64).collect())
    }

    /// `T_x(y)` as an exact fraction with denominator `|I_x|`.
    pub fn fraction(&self, tuple: &[usize], y: usize) -> Option<Rational> {
        let h = self.histograms.get(tuple)?;
        let total: usize = h.iter().sum();
        Some(Rational::new(h[y] as i128, total as i128))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &[usize])> {
        self.histograms.iter().map(|(t, h)| (t.as_slice(), h.as_slice()))
    }

    pub fn output_size(&self) -> usize {
        self.outputs
    }
}

/// Conditional type of an output sequence given the subset.
pub fn conditional_type(
    ch: &Channel,
    code: &Code,
    subset: &[usize],
    y: &[usize],
) -> Result<ConditionalType> {
    check_subset(code, subset)?;
    code.check_channel(ch)?;
    if y.len() != code.blocklength() {
        return Err(Error::LengthMismatch {
            expected: code.blocklength(),
            got: y.len(),
        });
    }
    let mut histograms: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for (c, &sym) in y.iter().enumerate() {
        if sym >= ch.output_size() {
            return Err(Error::SymbolOutOfRange(format!(
                "output symbol {sym} with |Y| = {}",
                ch.output_size()
            )));
        }
        let tuple = code.column(subset, c);
        if tuple.iter().any(|&x| ch.prob(x, sym) <= 0.0) {
            return Err(Error::OutOfSupport {
                position: c,
                symbol: sym,
            });
        }
        histograms
            .entry(tuple)
            .or_insert_with(|| vec![0; ch.output_size()])[sym] += 1;
    }
    Ok(ConditionalType {
        outputs: ch.output_size(),
        histograms,
    })
}

/// One conditional type class with its exact size.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeClass {
    pub ctype: ConditionalType,
    /// Number of output sequences in the class.
    pub size: u128,
    pub ln_size: f64,
}

#[derive(Clone, Debug)]
struct RegionLattice {
    tuple: Vec<usize>,
    support: Vec<usize>,
    /// Histograms over `support`, one per class of this region.
    compositions: Vec<Vec<usize>>,
}

/// Indexable enumeration of every conditional type realizable inside the
/// supports `Y_x`. Class `i` decodes as a mixed-radix number over regions.
#[derive(Clone, Debug)]
pub struct ConditionalTypes {
    outputs: usize,
    regions: Vec<RegionLattice>,
    total: u64,
    next: u64,
}

impl ConditionalTypes {
    /// Number of classes.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of regions (distinct column tuples).
    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Per-region histograms (over the full output alphabet) of class `index`.
    pub(crate) fn histograms_at(&self, mut index: u64) -> Vec<(&[usize], Vec<usize>)> {
        let mut out = Vec::with_capacity(self.regions.len());
        for r in self.regions.iter().rev() {
            let radix = r.compositions.len() as u64;
            let comp = &r.compositions[(index % radix) as usize];
            index /= radix;
            let mut h = vec![0; self.outputs];
            for (&y, &c) in r.support.iter().zip(comp) {
                h[y] = c;
            }
            out.push((r.tuple.as_slice(), h));
        }
        out.reverse();
        out
    }

    pub fn class_at(&self, index: u64) -> TypeClass {
        let hists = self.histograms_at(index);
        let mut size: u128 = 1;
        let mut ln_size = 0.0;
        let mut histograms = BTreeMap::new();
        for (t, h) in hists {
            size = size.saturating_mul(multinomial(&h).unwrap_or(u128::MAX));
            ln_size += ln_multinomial(&h);
            histograms.insert(t.to_vec(), h);
        }
        TypeClass {
            ctype: ConditionalType {
                outputs: self.outputs,
                histograms,
            },
            size,
            ln_size,
        }
    }
}

impl Iterator for ConditionalTypes {
    type Item = TypeClass;

    fn next(&mut self) -> Option<TypeClass> {
        if self.next >= self.total {
            return None;
        }
        let class = self.class_at(self.next);
        self.next += 1;
        Some(class)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

/// Default limit on the number of enumerated classes or sequences.
pub const DEFAULT_ENUMERATION_GUARD: f64 = 1e7;

/// Enumerates every conditional type class given the subset, each exactly
/// once, with its multinomial size. Regions with empty support admit no
/// sequences, so the stream is then empty.
pub fn enumerate_conditional_types(
    ch: &Channel,
    code: &Code,
    subset: &[usize],
    size_guard: f64,
) -> Result<ConditionalTypes> {
    let partition = region_partition(code, subset)?;
    code.check_channel(ch)?;
    let mut estimate = 1.0f64;
    let mut shapes = Vec::new();
    for (tuple, coords) in &partition.regions {
        let support = ch.support(tuple).outputs().to_vec();
        let k = support.len() as u64;
        let count = if k == 0 {
            0.0
        } else {
            binomial_f64(coords.len() as u64 + k - 1, k - 1)
        };
        estimate *= count;
        shapes.push((tuple.clone(), support, coords.len()));
    }
    guard("conditional type classes", estimate, size_guard)?;
    let regions: Vec<RegionLattice> = shapes
        .into_iter()
        .map(|(tuple, support, len)| RegionLattice {
            compositions: if support.is_empty() {
                Vec::new()
            } else {
                compositions(len, support.len())
            },
            tuple,
            support,
        })
        .collect();
    let total = regions
        .iter()
        .map(|r| r.compositions.len() as u64)
        .product();
    Ok(ConditionalTypes {
        outputs: ch.output_size(),
        regions,
        total,
        next: 0,
    })
}

/// `M_c(x)`: how many codewords carry symbol `x` in column `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnComposition {
    /// `counts[c][x]`.
    pub counts: Vec<Vec<usize>>,
}

pub fn column_composition(code: &Code) -> ColumnComposition {
    let mut counts = vec![vec![0; code.alphabet_size()]; code.blocklength()];
    for w in code.words() {
        for (c, &x) in w.iter().enumerate() {
            counts[c][x] += 1;
        }
    }
    ColumnComposition { counts }
}

/// `sum_c prod_k M_c(x_k)` for every `x` in `X^K`, indexed lexicographically.
/// Equals `n` times the sum of `q_m(x)` over all `K`-tuples of message
/// indices, repetitions included.
pub fn column_product_counts(code: &Code, arity: usize) -> Vec<u128> {
    let comp = column_composition(code);
    let a = code.alphabet_size();
    let tuples = crate::combinatorics::all_tuples(a, arity);
    tuples
        .iter()
        .map(|t| {
            comp.counts
                .iter()
                .map(|col| t.iter().map(|&x| col[x] as u128).product::<u128>())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::all_tuples;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code(words: &[&[usize]]) -> Code {
        Code::from_words(words.iter().map(|w| w.to_vec()).collect()).unwrap()
    }

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn code_text_format() {
        let c = Code::from_text("# |X|=3\n0 1 2\n\n2 1 0\n").unwrap();
        assert_eq!(c.alphabet_size(), 3);
        assert_eq!((c.size(), c.blocklength()), (2, 3));
        assert_eq!(Code::from_text(&c.to_text()).unwrap(), c);
        let inferred = Code::from_text("0 1\n1 1\n").unwrap();
        assert_eq!(inferred.alphabet_size(), 2);
        assert!(matches!(Code::from_text("0 x\n"), Err(Error::Parse(_))));
        assert!(matches!(
            Code::from_text("# |X|=2\n0 2\n"),
            Err(Error::SymbolOutOfRange(_))
        ));
        assert!(matches!(
            Code::from_text("0 1\n1\n"),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn joint_type_examples() {
        let c = code(&[&[0, 0, 1, 1], &[0, 1, 0, 1]]);
        let q = joint_type(&c, &[0, 1]).unwrap();
        for t in all_tuples(2, 2) {
            assert_eq!(q.weight(&t), r(1, 4));
        }
        let same = code(&[&[0, 1, 1], &[0, 1, 1]]);
        let q = joint_type(&same, &[0, 1]).unwrap();
        assert_eq!(q.weight(&[0, 0]), r(1, 3));
        assert_eq!(q.weight(&[1, 1]), r(2, 3));
        assert_eq!(q.weight(&[0, 1]), r(0, 1));
        assert!(matches!(joint_type(&c, &[1, 1]), Err(Error::BadSubset(_))));
        assert!(matches!(joint_type(&c, &[0, 2]), Err(Error::BadSubset(_))));
    }

    #[test]
    fn region_partition_examples() {
        let c = code(&[&[0, 0, 1, 1], &[0, 1, 0, 1]]);
        let p = region_partition(&c, &[0, 1]).unwrap();
        assert_eq!(p.region(&[0, 0]), &[0]);
        assert_eq!(p.region(&[0, 1]), &[1]);
        assert_eq!(p.region(&[1, 0]), &[2]);
        assert_eq!(p.region(&[1, 1]), &[3]);
        let constant = code(&[&[1, 1, 1], &[0, 0, 0]]);
        let p = region_partition(&constant, &[0, 1]).unwrap();
        assert_eq!(p.regions.len(), 1);
        assert_eq!(p.region(&[1, 0]), &[0, 1, 2]);
        let short = code(&[&[1], &[0]]);
        assert_eq!(region_partition(&short, &[0, 1]).unwrap().regions.len(), 1);
    }

    #[test]
    fn joint_type_matches_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let words: Vec<Vec<usize>> = (0..4)
                .map(|_| (0..7).map(|_| rng.gen_range(0..3)).collect())
                .collect();
            let c = Code::new(words, 3).unwrap();
            let q = joint_type(&c, &[2, 0, 3]).unwrap();
            let p = region_partition(&c, &[2, 0, 3]).unwrap();
            for t in all_tuples(3, 3) {
                assert_eq!(q.weight(&t), r(p.region(&t).len() as i128, 7));
            }
        }
    }

    #[test]
    fn conditional_type_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        let c = code(&[&[0, 0], &[1, 1]]);
        let t = conditional_type(&bsc, &c, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(t.fraction(&[0, 1], 0), Some(r(1, 2)));
        assert_eq!(t.fraction(&[0, 1], 1), Some(r(1, 2)));
        let noiseless = Channel::identity(2).unwrap();
        let same = code(&[&[0, 1], &[0, 1]]);
        let t = conditional_type(&noiseless, &same, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(t.distribution(&[0, 0]), Some(vec![1.0, 0.0]));
        assert_eq!(
            conditional_type(&bsc, &c, &[0, 1], &[0]),
            Err(Error::LengthMismatch {
                expected: 2,
                got: 1
            })
        );
        let z = Channel::new(&[vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        assert_eq!(
            conditional_type(&z, &c, &[0, 1], &[0, 1]),
            Err(Error::OutOfSupport {
                position: 1,
                symbol: 1
            })
        );
    }

    #[test]
    fn enumeration_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        let two = code(&[&[0, 0], &[1, 1]]);
        let sizes: Vec<u128> = enumerate_conditional_types(&bsc, &two, &[0, 1], 1e7)
            .unwrap()
            .map(|c| c.size)
            .collect();
        assert_eq!(sizes, vec![1, 2, 1]);
        let four = code(&[&[0, 0, 0, 0], &[1, 1, 1, 1]]);
        let sizes: Vec<u128> = enumerate_conditional_types(&bsc, &four, &[0, 1], 1e7)
            .unwrap()
            .map(|c| c.size)
            .collect();
        assert_eq!(sizes, vec![1, 4, 6, 4, 1]);
        assert!(matches!(
            enumerate_conditional_types(&bsc, &four, &[0, 1], 4.0),
            Err(Error::SizeGuardExceeded { .. })
        ));
        let noiseless = Channel::identity(2).unwrap();
        assert_eq!(
            enumerate_conditional_types(&noiseless, &two, &[0, 1], 1e7)
                .unwrap()
                .count(),
            0
        );
    }

    /// Brute force over all output sequences: class sizes add up to
    /// `prod_x |Y_x|^{|I_x|}` and every sequence lands in exactly one class.
    #[test]
    fn enumeration_covers_every_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z3 = Channel::new(&[
            vec![0.5, 0.5, 0.0],
            vec![0.2, 0.3, 0.5],
            vec![0.0, 0.4, 0.6],
        ])
        .unwrap();
        for _ in 0..20 {
            let n = rng.gen_range(1..=6);
            let words: Vec<Vec<usize>> = (0..2)
                .map(|_| (0..n).map(|_| rng.gen_range(0..3)).collect())
                .collect();
            let c = Code::new(words, 3).unwrap();
            let classes: Vec<TypeClass> = enumerate_conditional_types(&z3, &c, &[0, 1], 1e7)
                .unwrap()
                .collect();
            let expected: u128 = region_partition(&c, &[0, 1])
                .unwrap()
                .regions
                .iter()
                .map(|(t, coords)| (z3.support(t).len() as u128).pow(coords.len() as u32))
                .product();
            assert_eq!(classes.iter().map(|c| c.size).sum::<u128>(), expected);
            let mut hits: BTreeMap<usize, u128> = BTreeMap::new();
            for y in all_tuples(3, n) {
                if let Ok(t) = conditional_type(&z3, &c, &[0, 1], &y) {
                    let i = classes.iter().position(|c| c.ctype == t).unwrap();
                    *hits.entry(i).or_default() += 1;
                }
            }
            for (i, class) in classes.iter().enumerate() {
                assert_eq!(hits.get(&i).copied().unwrap_or(0), class.size);
                assert!((class.ln_size - (class.size as f64).ln()).abs() < 1e-9);
            }
        }
    }

    /// Sequences in one class share every codeword likelihood.
    #[test]
    fn class_probability_is_constant() {
        let ch = Channel::new(&[vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap();
        let c = code(&[&[0, 1, 1, 0, 1], &[1, 1, 0, 0, 0]]);
        let mut by_class: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for y in all_tuples(3, 5) {
            let t = conditional_type(&ch, &c, &[0, 1], &y).unwrap();
            let p: f64 = y.iter().enumerate().map(|(i, &s)| ch.prob(c.word(1)[i], s)).product();
            by_class.entry(format!("{t:?}")).or_default().push(p);
        }
        for probs in by_class.values() {
            for p in probs {
                assert!((p - probs[0]).abs() <= 1e-15 * probs[0].max(1e-300));
            }
        }
    }

    #[test]
    fn column_composition_examples() {
        let c = code(&[&[0, 0], &[0, 1]]);
        let comp = column_composition(&c);
        assert_eq!(comp.counts, vec![vec![2, 0], vec![1, 1]]);
        let single = code(&[&[1, 0, 1]]);
        assert_eq!(
            column_composition(&single).counts,
            vec![vec![0, 1], vec![1, 0], vec![0, 1]]
        );
    }

    /// Column-by-column counting: summing joint-type counts over every
    /// K-tuple of message indices (repetitions included) gives
    /// `sum_c prod_k M_c(x_k)`; the distinct ordered subsets give at most that.
    #[test]
    fn column_product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let m = rng.gen_range(2..=8);
            let n = rng.gen_range(1..=6);
            let words: Vec<Vec<usize>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            let c = Code::new(words, 2).unwrap();
            let comp = column_composition(&c);
            for counts in &comp.counts {
                assert_eq!(counts.iter().sum::<usize>(), m);
            }
            let k = 2;
            let product = column_product_counts(&c, k);
            let mut with_rep = vec![0u128; 4];
            let mut distinct = vec![0u128; 4];
            for a in 0..m {
                for b in 0..m {
                    for col in 0..n {
                        let idx = tuple_index(&[c.word(a)[col], c.word(b)[col]], 2);
                        with_rep[idx] += 1;
                        if a != b {
                            distinct[idx] += 1;
                        }
                    }
                }
            }
            assert_eq!(product, with_rep);
            let mut ordered_sum = vec![0u128; 4];
            for a in 0..m {
                for b in 0..m {
                    if a != b {
                        for (t, cnt) in joint_type(&c, &[a, b]).unwrap().iter() {
                            ordered_sum[tuple_index(t, 2)] += cnt as u128;
                        }
                    }
                }
            }
            assert_eq!(ordered_sum, distinct);
            assert!(distinct.iter().zip(&product).all(|(d, p)| d <= p));
        }
    }
}
