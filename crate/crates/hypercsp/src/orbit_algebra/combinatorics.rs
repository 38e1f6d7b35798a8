//! Small combinatorial helpers shared by the orbit machinery.

/// Binomial coefficient, zero when `k > n`.
pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All `k`-subsets of `0..n` as sorted vectors, in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binom(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination in lex order
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Rank of a sorted combination of `0..n` in lexicographic order.
pub fn lex_rank(n: usize, comb: &[usize]) -> usize {
    let k = comb.len();
    let mut rank = 0;
    let mut start = 0;
    for (i, &a) in comb.iter().enumerate() {
        for j in start..a {
            rank += binom(n - j - 1, k - i - 1);
        }
        start = a + 1;
    }
    rank
}

/// Rank of a sorted combination in colexicographic order. Independent of the
/// ground set size, so it is stable while new elements are appended.
pub fn colex_rank(comb: &[usize]) -> usize {
    comb.iter().enumerate().map(|(i, &a)| binom(a, i + 1)).sum()
}

/// Restricted growth strings of length `m`: every set partition of `0..m`
/// with blocks numbered by least element, in lexicographic order.
pub fn set_partitions(m: usize) -> Vec<Vec<u8>> {
    fn rec(pos: usize, m: usize, max: u8, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos == m {
            out.push(cur.clone());
            return;
        }
        let limit = if pos == 0 { 0 } else { max + 1 };
        for c in 0..=limit {
            cur.push(c);
            rec(pos + 1, m, max.max(c), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    rec(0, m, 0, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Equality pattern of a sequence: the restricted growth string numbering
/// values by first appearance, plus the position of each class's first entry.
pub fn first_appearance<T: PartialEq>(values: &[T]) -> (Vec<u8>, Vec<usize>) {
    let mut reps: Vec<usize> = Vec::new();
    let mut pattern = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        match reps.iter().position(|&r| values[r] == *v) {
            Some(c) => pattern.push(c as u8),
            None => {
                pattern.push(reps.len() as u8);
                reps.push(i);
            }
        }
    }
    (pattern, reps)
}

/// Number of classes of a restricted growth string.
pub fn class_count(pattern: &[u8]) -> usize {
    pattern.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
}

pub fn is_restricted_growth(pattern: &[u8]) -> bool {
    let mut next = 0u8;
    for &c in pattern {
        if c > next {
            return false;
        }
        if c == next {
            next += 1;
        }
    }
    true
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Injective `k`-tuples over `0..n` in lexicographic order.
pub fn injective_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let perms = permutations(k);
    let mut out = Vec::new();
    for s in k_subsets(n, k) {
        for p in &perms {
            out.push(p.iter().map(|&i| s[i]).collect());
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(6, 3), 20);
        assert_eq!(binom(2, 3), 0);
        assert_eq!(binom(0, 0), 1);
    }

    #[test]
    fn subsets_are_lex_and_ranked() {
        for n in 0..7 {
            for k in 0..=n {
                let subs = k_subsets(n, k);
                assert_eq!(subs.len(), binom(n, k));
                for (i, s) in subs.iter().enumerate() {
                    assert_eq!(lex_rank(n, s), i);
                }
                let mut sorted = subs.clone();
                sorted.sort();
                assert_eq!(sorted, subs);
            }
        }
    }

    #[test]
    fn colex_ranks_are_a_bijection() {
        let mut seen: Vec<usize> = k_subsets(7, 3).iter().map(|s| colex_rank(s)).collect();
        seen.sort();
        assert_eq!(seen, (0..35).collect::<Vec<_>>());
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203];
        for (m, &b) in bell.iter().enumerate() {
            let parts = set_partitions(m);
            assert_eq!(parts.len(), b);
            assert!(parts.iter().all(|p| is_restricted_growth(p)));
        }
    }

    #[test]
    fn first_appearance_numbers_classes() {
        let (p, reps) = first_appearance(&['c', 'b', 'c', 'a']);
        assert_eq!(p, vec![0, 1, 0, 2]);
        assert_eq!(reps, vec![0, 1, 3]);
    }

    #[test]
    fn injective_tuple_count() {
        assert_eq!(injective_tuples(4, 3).len(), 24);
        assert_eq!(injective_tuples(3, 3).len(), 6);
    }
}
