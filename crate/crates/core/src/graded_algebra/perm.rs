//! Permutations of `{0, .., k-1}` in one-line notation: `g[i] = g(i)`.

use alloc::vec::Vec;

pub type Perm = Vec<usize>;

pub fn identity(k: usize) -> Perm {
    (0..k).collect()
}

pub fn is_identity(g: &[usize]) -> bool {
    g.iter().enumerate().all(|(i, &x)| i == x)
}

/// `a ∘ b`.
pub fn compose(a: &[usize], b: &[usize]) -> Perm {
    b.iter().map(|&x| a[x]).collect()
}

pub fn inverse(g: &[usize]) -> Perm {
    let mut inv = alloc::vec![0; g.len()];
    for (i, &x) in g.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

pub fn transposition(k: usize, i: usize, j: usize) -> Perm {
    let mut g = identity(k);
    g.swap(i, j);
    g
}

pub fn is_permutation(g: &[usize]) -> bool {
    let mut seen = alloc::vec![false; g.len()];
    for &x in g {
        if x >= g.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// All of `S_k` in lexicographic order.
pub fn all(k: usize) -> Vec<Perm> {
    let mut out = Vec::new();
    let mut cur = identity(k);
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Adjacent transpositions `j_1, .., j_m` with `g = s_{j_m} ∘ .. ∘ s_{j_1}`,
/// where `s_j` swaps `j` and `j + 1`.
pub fn adjacent_word(g: &[usize]) -> Vec<usize> {
    let mut h = g.to_vec();
    let mut word = Vec::new();
    while let Some(i) = (0..h.len().saturating_sub(1)).find(|&i| h[i] > h[i + 1]) {
        h.swap(i, i + 1);
        word.push(i);
    }
    word
}

/// Right action on weight vectors: `(w.g)_i = w_{g(i)}`.
pub fn act<T: Clone>(w: &[T], g: &[usize]) -> Vec<T> {
    g.iter().map(|&x| w[x].clone()).collect()
}
