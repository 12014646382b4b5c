//! Strictly increasing index sets for alternating forms, encoded as bitmasks.

const N0: [&[u8]; 1] = [&[0]];
const N1: [&[u8]; 2] = [&[0], &[0b1]];
const N2: [&[u8]; 3] = [&[0], &[0b01, 0b10], &[0b11]];
const N3: [&[u8]; 4] = [
    &[0],
    &[0b001, 0b010, 0b100],
    &[0b011, 0b101, 0b110],
    &[0b111],
];

/// The `k`-subsets of `{0..n}` in lexicographic order of their sorted tuples.
pub fn subsets(n: usize, k: usize) -> &'static [u8] {
    match n {
        0 => N0[k],
        1 => N1[k],
        2 => N2[k],
        3 => N3[k],
        _ => panic!("alternating index sets only for n <= 3"),
    }
}

/// Number of components of a `k`-form in `n` dimensions.
pub fn num_components(n: usize, k: usize) -> usize {
    subsets(n, k).len()
}

/// Position of `mask` in [`subsets`]`(n, |mask|)`.
pub fn subset_index(n: usize, mask: u8) -> usize {
    subsets(n, mask.count_ones() as usize)
        .iter()
        .position(|&m| m == mask)
        .expect("mask within range")
}

/// Axis indices in `mask`, increasing.
pub fn elements(mask: u8) -> impl Iterator<Item = usize> {
    (0..8).filter(move |i| mask & (1 << i) != 0)
}

/// Sign of the permutation that sorts the concatenation of the sorted sets
/// `a` and `b`, or 0 if they intersect.
pub fn merge_sign(a: u8, b: u8) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut inversions = 0;
    for i in elements(a) {
        inversions += elements(b).filter(|&j| j < i).count();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn complement(n: usize, mask: u8) -> u8 {
    ((1u16 << n) - 1) as u8 & !mask
}

/// Sign in `⋆dx_I = sign(I, I^c) dx_{I^c}`.
pub fn star_sign(n: usize, mask: u8) -> f64 {
    merge_sign(mask, complement(n, mask))
}

/// Pointwise Hodge star of the coefficient vector of a `k`-form.
pub fn star_coeffs(n: usize, k: usize, c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; num_components(n, n - k)];
    for (i, &m) in subsets(n, k).iter().enumerate() {
        let mc = complement(n, m);
        out[subset_index(n, mc)] = star_sign(n, m) * c[i];
    }
    out
}
