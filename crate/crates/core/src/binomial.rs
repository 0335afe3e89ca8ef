//! Binomial coefficient table backing the combinatorial number system used
//! to index simplices.

/// `C(n, k)` for `n <= max_n`, `k <= max_k`, as `u64`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    max_k: usize,
    table: Vec<u64>,
}

impl BinomialTable {
    pub fn new(max_n: usize, max_k: usize) -> Self {
        let width = max_k + 1;
        let mut table = vec![0u64; (max_n + 1) * width];
        for n in 0..=max_n {
            table[n * width] = 1;
            for k in 1..=max_k.min(n) {
                let above = table[(n - 1) * width + k - 1];
                let left = if k < n { table[(n - 1) * width + k] } else { 0 };
                table[n * width + k] = above.saturating_add(left);
            }
        }
        Self { max_k, table }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        debug_assert!(k <= self.max_k);
        self.table[n * (self.max_k + 1) + k]
    }
}

/// Exact `C(n, k)` in `u128`, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_closed_form() {
        let t = BinomialTable::new(40, 5);
        for n in 0..=40 {
            for k in 0..=5 {
                assert_eq!(t.get(n, k) as u128, binomial(n as u64, k as u64), "C({n},{k})");
            }
        }
        assert_eq!(t.get(10, 3), 120);
        assert_eq!(t.get(2, 3), 0);
    }
}
