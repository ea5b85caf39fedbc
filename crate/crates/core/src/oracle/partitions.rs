//! Set partitions enumerated as restricted growth strings.
//!
//! A restricted growth string of length `n` is a sequence `a` with `a[0] = 0`
//! and `a[i] ≤ 1 + max(a[..i])`; item `i` goes into block `a[i]`. The strings
//! are produced in lexicographic order, one per partition.

/// Iterator over the restricted growth strings of length `n`.
#[derive(Debug, Clone)]
pub struct RestrictedGrowth {
    current: Vec<usize>,
    // prefix maxima: prefix_max[i] = max(current[..=i])
    prefix_max: Vec<usize>,
    done: bool,
}

impl RestrictedGrowth {
    pub fn new(n: usize) -> Self {
        Self {
            current: vec![0; n],
            prefix_max: vec![0; n],
            done: false,
        }
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let n = self.current.len();
        // rightmost position that can still grow
        let pivot = (1..n).rev().find(|&i| self.current[i] <= self.prefix_max[i - 1]);
        match pivot {
            None => self.done = true,
            Some(i) => {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
            }
        }
        Some(out)
    }
}

/// Groups `items` into blocks according to a restricted growth string.
pub fn blocks_of<T: Clone>(items: &[T], rgs: &[usize]) -> Vec<Vec<T>> {
    let count = rgs.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); count];
    for (item, &label) in items.iter().zip(rgs) {
        blocks[label].push(item.clone());
    }
    blocks
}

/// Every partition of `items`, as lists of blocks.
pub fn set_partitions<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<Vec<T>>> + '_ {
    RestrictedGrowth::new(items.len()).map(move |rgs| blocks_of(items, &rgs))
}

/// `fine` refines `coarse` when items sharing a block in `fine` also share one in `coarse`.
pub fn rgs_refines(fine: &[usize], coarse: &[usize]) -> bool {
    let n = fine.len();
    (0..n).all(|i| (i + 1..n).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}

/// Bell numbers via the Bell triangle.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}
