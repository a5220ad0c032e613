//! The acceptance suite: ten end-to-end checks with fixed seeds and time
//! budgets. Each returns a [`CriterionResult`]; none of them panic.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{kl_divergence, mu_x, q_star_x, Channel, SimplexPoint};
use crate::decoder::{error_probabilities_direct, error_probabilities_pair, error_probabilities_via_types, verify_lower_bound};
use crate::error::Result;
use crate::exponent::{d_min, mu_code, mu_code_direct, plotkin_bound_value, sion_exchange_check, zero_rate_exponent, ZeroRateMethod};
use crate::halving::{ensemble_from_code, theorem_check};
use crate::ramsey::{color_edge, extract_subcode, is_monochromatic, ColorVector, SearchMode};
use crate::types::{Code, DEFAULT_ENUMERATION_GUARD};
use crate::util::dirichlet;

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {} ({:.2}s / {:.0}s budget) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(&str, f64); 10] = [
    ("divergence lower bound", 10.0),
    ("letter additivity", 5.0),
    ("decoder oracle equivalence", 60.0),
    ("pair exponent convergence", 10.0),
    ("finite-n lower bound", 60.0),
    ("min-max exchange", 30.0),
    ("zero-rate optimizer", 120.0),
    ("ramsey pipeline", 300.0),
    ("halving pipeline", 120.0),
    ("plotkin sandwich", 30.0),
];

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize) -> CriterionResult {
    let (name, budget) = CRITERIA[id - 1];
    let start = Instant::now();
    let outcome = match id {
        1 => divergence_lower_bound(),
        2 => letter_additivity(),
        3 => decoder_equivalence(),
        4 => pair_convergence(),
        5 => finite_lower_bound(),
        6 => minmax_exchange(),
        7 => zero_rate_optimizer(),
        8 => ramsey_pipeline(),
        9 => halving_pipeline(),
        10 => plotkin_sandwich(),
        _ => unreachable!("criteria are numbered 1 to 10"),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(Ok(detail)) => (true, detail),
        Ok(Err(detail)) => (false, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > budget {
        passed = false;
        detail = format!("over time budget; {detail}");
    }
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        seconds,
        budget_seconds: budget,
        detail,
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}

/// Inner result: `Ok(detail)` on pass, `Err(detail)` on a failed check.
type Check = Result<std::result::Result<String, String>>;

fn random_channel(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize, sparse: bool) -> Channel {
    let rows: Vec<Vec<f64>> = (0..inputs)
        .map(|_| {
            let mut row = dirichlet(rng, outputs);
            if sparse {
                let keep = rng.gen_range(0..outputs);
                for (y, v) in row.iter_mut().enumerate() {
                    if y != keep && rng.gen_bool(0.25) {
                        *v = 0.0;
                    }
                }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            row
        })
        .collect();
    Channel::new(&rows).expect("rows are normalized")
}

fn random_code(rng: &mut ChaCha8Rng, size: usize, n: usize, alphabet: usize) -> Code {
    let words = (0..size)
        .map(|_| (0..n).map(|_| rng.gen_range(0..alphabet)).collect())
        .collect();
    Code::new(words, alphabet).expect("symbols are in range")
}

/// Full-support instances for the decoder criteria.
struct Instance {
    ch: Channel,
    code: Code,
    list_size: usize,
}

fn decoder_instances(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let inputs = rng.gen_range(2..=3);
            let outputs = rng.gen_range(2..=3);
            let list_size = rng.gen_range(1..=2);
            let n = rng.gen_range(1..=6);
            Instance {
                ch: random_channel(&mut rng, inputs, outputs, false),
                code: random_code(&mut rng, list_size + 1, n, inputs),
                list_size,
            }
        })
        .collect()
}

fn divergence_lower_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_gap = f64::INFINITY;
    let mut worst_equality: f64 = 0.0;
    for _ in 0..200 {
        let inputs = rng.gen_range(2..=4);
        let outputs = rng.gen_range(2..=4);
        let ch = random_channel(&mut rng, inputs, outputs, true);
        let (tuple, support) = loop {
            let arity = rng.gen_range(2..=4);
            let tuple: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..inputs)).collect();
            let support = ch.support(&tuple);
            if !support.is_empty() {
                break (tuple, support);
            }
        };
        let alpha = SimplexPoint::new(dirichlet(&mut rng, tuple.len()))?;
        let mu = mu_x(&ch, &tuple, &alpha)?;
        let weighted = |t: &[f64]| -> Result<f64> {
            let mut total = 0.0;
            for (&x, &a) in tuple.iter().zip(alpha.as_slice()) {
                total += a * kl_divergence(t, ch.row(x))?.finite().expect("T is on the common support");
            }
            Ok(total)
        };
        let q_star = q_star_x(&ch, &tuple, &alpha)?;
        worst_equality = worst_equality.max((weighted(&q_star)? - mu).abs());
        for _ in 0..1000 {
            let mut t = vec![0.0; outputs];
            for (&y, v) in support.outputs().iter().zip(dirichlet(&mut rng, support.len())) {
                t[y] = v;
            }
            worst_gap = worst_gap.min(weighted(&t)? - mu);
        }
    }
    let detail = format!("min(sum - mu) = {worst_gap:.3e}, max |sum - mu| at Q* = {worst_equality:.3e}");
    Ok(if worst_gap >= -1e-12 && worst_equality <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    })
}

fn letter_additivity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let inputs = rng.gen_range(2..=3);
        let outputs = rng.gen_range(2..=3);
        let ch = random_channel(&mut rng, inputs, outputs, true);
        let arity = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=6);
        let code = random_code(&mut rng, arity, n, inputs);
        let subset: Vec<usize> = (0..arity).collect();
        let alpha = SimplexPoint::new(dirichlet(&mut rng, arity))?;
        let letters = match mu_code(&ch, &code, &subset, &alpha) {
            Ok(v) => v,
            Err(crate::Error::EmptySupport(_)) => continue,
            Err(e) => return Err(e),
        };
        let direct = mu_code_direct(&ch, &code, &subset, &alpha, DEFAULT_ENUMERATION_GUARD)?;
        worst = worst.max((letters - direct).abs());
    }
    let detail = format!("max |sequence - letters| = {worst:.3e}");
    Ok(if worst <= 1e-10 { Ok(detail) } else { Err(detail) })
}

fn decoder_equivalence() -> Check {
    let instances = decoder_instances(120, 3);
    let mut worst: f64 = 0.0;
    for inst in &instances {
        let subset: Vec<usize> = (0..inst.code.size()).collect();
        let direct = error_probabilities_direct(&inst.ch, &inst.code, inst.list_size, DEFAULT_ENUMERATION_GUARD)?;
        let types =
            error_probabilities_via_types(&inst.ch, &inst.code, &subset, inst.list_size, DEFAULT_ENUMERATION_GUARD)?;
        for (a, b) in direct.per_message_error.iter().zip(&types.per_message_error) {
            worst = worst.max((a - b).abs());
        }
    }
    let detail = format!("{} instances, max |direct - types| = {worst:.3e}", instances.len());
    Ok(if worst <= 1e-12 { Ok(detail) } else { Err(detail) })
}

fn pair_convergence() -> Check {
    let ch = Channel::bsc(0.1)?;
    let target = -(2.0 * 0.09f64.sqrt()).ln();
    let mut deviations = Vec::new();
    for n in [50usize, 100, 200, 400] {
        let code = Code::new(vec![vec![0; n], vec![1; n]], 2)?;
        let pe = error_probabilities_pair(&ch, &code)?.average;
        deviations.push((-pe.ln() / n as f64 - target).abs());
    }
    let monotone = deviations.windows(2).all(|w| w[1] < w[0]);
    let detail = format!("deviations {deviations:.5?}");
    Ok(if monotone && deviations[3] <= 0.02 {
        Ok(detail)
    } else {
        Err(detail)
    })
}

fn finite_lower_bound() -> Check {
    let instances = decoder_instances(120, 3);
    let mut min_margin = f64::INFINITY;
    let mut violations = 0;
    for inst in &instances {
        match verify_lower_bound(&inst.ch, &inst.code, inst.list_size) {
            Ok(r) => min_margin = min_margin.min(r.p_e_max.ln() - r.ln_bound),
            Err(crate::Error::BoundViolation(_)) => violations += 1,
            Err(e) => return Err(e),
        }
    }
    let detail = format!(
        "{} instances, {violations} violations, min ln(P_e,max / bound) = {min_margin:.3}",
        instances.len()
    );
    Ok(if violations == 0 { Ok(detail) } else { Err(detail) })
}

fn minmax_exchange() -> Check {
    let instances = decoder_instances(50, 6);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for inst in &instances {
        let subset: Vec<usize> = (0..inst.code.size()).collect();
        match sion_exchange_check(&inst.ch, &inst.code, &subset, 1e-6) {
            Ok(r) => worst = worst.max(r.difference),
            Err(crate::Error::BoundViolation(_)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    let detail = format!("50 instances, {failures} failures, max |primal - dual| = {worst:.3e}");
    Ok(if failures == 0 { Ok(detail) } else { Err(detail) })
}

fn zero_rate_optimizer() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for p in [0.05, 0.1, 0.2] {
        let ch = Channel::bsc(p)?;
        let closed = -0.5 * (2.0 * (p * (1.0 - p)).sqrt()).ln();
        let multi = zero_rate_exponent(&ch, 1, &ZeroRateMethod::default())?;
        let grid = zero_rate_exponent(&ch, 1, &ZeroRateMethod::Grid { step: 1e-4 })?;
        let err = (multi.value - closed).abs().max((grid.value - closed).abs());
        let arg = multi
            .argmax
            .as_slice()
            .iter()
            .chain(grid.argmax.as_slice())
            .map(|q| (q - 0.5).abs())
            .fold(0.0, f64::max);
        ok &= err <= 1e-6 && arg <= 1e-4;
        notes.push(format!("p={p}: err {err:.1e}, argmax off {arg:.1e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let outputs = rng.gen_range(2..=3);
        let ch = random_channel(&mut rng, 3, outputs, false);
        // Without the grid polish, so the two methods are independent.
        let pure = ZeroRateMethod::Multistart {
            starts: 64,
            seed: 0,
            grid_step: None,
        };
        let multi = zero_rate_exponent(&ch, 1, &pure)?;
        let grid = zero_rate_exponent(&ch, 1, &ZeroRateMethod::Grid { step: 1e-3 })?;
        worst = worst.max((multi.value - grid.value).abs());
    }
    ok &= worst <= 1e-3;
    notes.push(format!("|X|=3: max |multistart - grid| = {worst:.1e}"));
    let detail = notes.join("; ");
    Ok(if ok { Ok(detail) } else { Err(detail) })
}

/// Largest clique of a graph given by adjacency bitmasks (Bron-Kerbosch
/// with pivoting), used as an independent oracle for pair colorings.
fn max_clique(adj: &[u64], r: u32, mut p: u64, mut x: u64) -> u32 {
    if p == 0 {
        return if x == 0 { r } else { 0 };
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut best = 0;
    let mut cand = p & !adj[pivot];
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        best = best.max(max_clique(adj, r + 1, p & adj[v], x & adj[v]));
        p &= !(1 << v);
        x |= 1 << v;
    }
    best.max(r)
}

fn clique_oracle(code: &Code, t: u64) -> Result<usize> {
    let m = code.size();
    let mut colors: Vec<(ColorVector, usize, usize)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            colors.push((color_edge(code, &[i, j], t)?, i, j));
        }
    }
    colors.sort();
    let mut best = 1;
    for group in colors.chunk_by(|a, b| a.0 == b.0) {
        let mut adj = vec![0u64; m];
        for &(_, i, j) in group {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        best = best.max(max_clique(&adj, 0, (1u64 << m) - 1, 0) as usize);
    }
    Ok(best)
}

fn ramsey_pipeline() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut sizes = Vec::new();
    let mut slack = f64::INFINITY;
    for (count, size, k) in [(50usize, 30usize, 2usize), (10, 14, 3)] {
        for run in 0..count {
            let code = random_code(&mut rng, size, 10, 2);
            let report = match extract_subcode(&code, k, 2, SearchMode::Exact, None, None) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("K={k} run {run}: {e}"));
                    continue;
                }
            };
            sizes.push(report.monochromatic.len());
            if !is_monochromatic(&code, &report.monochromatic, k, 2)? {
                failures.push(format!("K={k} run {run}: not monochromatic"));
            }
            if !(report.conditions.epsilon_ok && report.conditions.delta_ok) {
                failures.push(format!("K={k} run {run}: averaging conditions fail"));
            }
            match report.max_deviation {
                Some(d) if d <= report.delta_bound => slack = slack.min(report.delta_bound - d),
                other => failures.push(format!("K={k} run {run}: deviation {other:?}")),
            }
            if k == 2 && clique_oracle(&code, 2)? != report.monochromatic.len() {
                failures.push(format!("K=2 run {run}: clique size differs from oracle"));
            }
        }
    }
    let detail = format!(
        "{} subcodes, sizes {}..={}, min Delta slack {slack:.3}{}",
        sizes.len(),
        sizes.iter().min().unwrap_or(&0),
        sizes.iter().max().unwrap_or(&0),
        failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
    );
    Ok(if failures.is_empty() { Ok(detail) } else { Err(detail) })
}

fn halving_pipeline() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut sizes = Vec::new();
    for run in 0..100 {
        let n = rng.gen_range(4..=20);
        let code = random_code(&mut rng, 64, n, 2);
        match theorem_check(&ensemble_from_code(&code), 4, SearchMode::Greedy, None) {
            Ok(r) => {
                min_slack = min_slack.min(r.slack);
                sizes.push(r.m_prime);
            }
            Err(e) => failures.push(format!("run {run}: {e}")),
        }
    }
    let detail = format!(
        "{} ensembles, M' in {}..={}, min Delta~ slack {min_slack:.3}{}",
        sizes.len(),
        sizes.iter().min().unwrap_or(&0),
        sizes.iter().max().unwrap_or(&0),
        failures.first().map(|f| format!("; first failure: {f}")).unwrap_or_default()
    );
    Ok(if failures.is_empty() { Ok(detail) } else { Err(detail) })
}

/// Nonzero codewords of the binary simplex code of dimension `dim`.
fn simplex_code(dim: u32, count: usize) -> Result<Code> {
    let n = (1usize << dim) - 1;
    let words = (1..=count)
        .map(|m| (1..=n).map(|c| ((m & c).count_ones() % 2) as usize).collect())
        .collect();
    Code::new(words, 2)
}

fn plotkin_sandwich() -> Check {
    let ch = Channel::bsc(0.1)?;
    let report = plotkin_bound_value(&ch, 1, 1000, 1_000_000)?;
    let e = report.zero_rate;
    let slack = report.correction + (report.factor - 1.0) * e;
    let mut ok = report.plotkin_upper >= e && report.plotkin_upper - e <= slack + 1e-12;
    // A large equidistant subcode: every pair has distance 512 of 1023.
    let simplex = simplex_code(10, 1000)?;
    let dm = d_min(&ch, &simplex, 1, crate::exponent::DEFAULT_SUBSET_GUARD)?;
    ok &= dm.d_min <= report.plotkin_upper && (dm.d_min - e).abs() <= slack;
    // Subcodes extracted from random codes.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut largest: f64 = 0.0;
    for _ in 0..10 {
        let code = random_code(&mut rng, 30, 10, 2);
        let sub = extract_subcode(&code, 2, 2, SearchMode::Exact, None, None)?;
        let words = sub.indices.iter().map(|&i| code.word(i).to_vec()).collect();
        let subcode = Code::new(words, 2)?;
        let d = d_min(&ch, &subcode, 1, crate::exponent::DEFAULT_SUBSET_GUARD)?.d_min;
        largest = largest.max(d);
    }
    ok &= largest <= report.plotkin_upper;
    let detail = format!(
        "bound {:.4} = E {e:.5} + slack {:.4}; simplex subcode D_min {:.5}; extracted D_min <= {largest:.4}",
        report.plotkin_upper,
        report.plotkin_upper - e,
        dm.d_min
    );
    Ok(if ok { Ok(detail) } else { Err(detail) })
}
