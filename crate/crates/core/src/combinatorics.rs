//! Enumeration helpers: tuples over an alphabet, k-subsets, multisets and
//! integer compositions, plus exact binomial and multinomial counts.

/// Number of tuples in `alphabet^len`, saturating at `u64::MAX`.
pub fn tuple_count(alphabet: usize, len: usize) -> u64 {
    (alphabet as u64).checked_pow(len as u32).unwrap_or(u64::MAX)
}

/// Index of `tuple` in the lexicographic order of `alphabet^len`.
pub fn tuple_index(tuple: &[usize], alphabet: usize) -> usize {
    tuple.iter().fold(0, |acc, &s| acc * alphabet + s)
}

/// Inverse of [`tuple_index`].
pub fn tuple_from_index(mut index: usize, alphabet: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % alphabet;
        index /= alphabet;
    }
    out
}

/// All tuples of `alphabet^len` in lexicographic order.
pub fn all_tuples(alphabet: usize, len: usize) -> Vec<Vec<usize>> {
    let count = tuple_count(alphabet, len) as usize;
    (0..count).map(|i| tuple_from_index(i, alphabet, len)).collect()
}

/// All nondecreasing tuples of length `len` over `0..alphabet`.
pub fn multisets(alphabet: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(alphabet: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for s in start..alphabet {
            cur.push(s);
            rec(alphabet, len, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(alphabet, len, 0, &mut Vec::with_capacity(len), &mut out);
    out
}

/// All increasing `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// All ways of writing `total` as an ordered sum of `parts` nonnegative integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in (0..=left).rev() {
            cur.push(v);
            rec(left - v, parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// `C(n, k)` as a float; exact below 2^53.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `C(n, k)` exactly, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

/// Multinomial coefficient `(sum counts)! / prod(counts!)`, `None` on overflow.
pub fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut total = 0u64;
    let mut acc: u128 = 1;
    for &c in counts {
        total += c as u64;
        acc = acc.checked_mul(binomial(total, c as u64)?)?;
    }
    Some(acc)
}

/// Natural log of the multinomial coefficient.
pub fn ln_multinomial(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    ln_factorial(total) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}
