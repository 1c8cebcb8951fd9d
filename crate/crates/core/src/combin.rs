//! Binomial coefficients and colexicographic ranking of fixed-weight bitmasks.
//!
//! Basis convention used throughout the crate: bit `p - 1` of a mask records
//! the occupation of site (paired orbital) `p`, so site 1 is the least
//! significant bit. Printed kets read site M leftmost, which makes the mask
//! value equal to the binary reading of the ket string. For fixed weight the
//! colexicographic order of occupied sets coincides with the numeric order of
//! masks, so rank r is simply the r-th smallest mask of the given weight.

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 1..=k {
        // exact at every step: acc * (n-k+i) is divisible by i
        acc = acc * (n - k + i) as u64 / i as u64;
    }
    acc
}

/// Colex rank of a fixed-weight mask among all masks of the same weight.
pub fn rank_colex(mask: u64) -> usize {
    let mut rank: u64 = 0;
    let mut rest = mask;
    let mut i = 1usize;
    while rest != 0 {
        let c = rest.trailing_zeros() as usize;
        rank += binomial(c, i);
        rest &= rest - 1;
        i += 1;
    }
    rank as usize
}

/// Inverse of [`rank_colex`] for weight `k`.
pub fn unrank_colex(k: usize, rank: usize) -> u64 {
    let mut mask = 0u64;
    let mut r = rank as u64;
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= r
        let mut c = i - 1;
        while binomial(c + 1, i) <= r {
            c += 1;
        }
        r -= binomial(c, i);
        mask |= 1u64 << c;
    }
    mask
}

/// All weight-`n` masks over `m` sites in increasing (= colex) order.
pub fn masks_of_weight(m: usize, n: usize) -> Vec<u64> {
    let dim = binomial(m, n) as usize;
    let mut out = Vec::with_capacity(dim);
    if n == 0 {
        out.push(0);
        return out;
    }
    if n > m {
        return out;
    }
    let limit = 1u64 << m;
    let mut v: u64 = (1u64 << n) - 1;
    while v < limit {
        out.push(v);
        // Gosper's hack
        let u = v & v.wrapping_neg();
        let t = v + u;
        v = t | (((v ^ t) >> 2) / u);
    }
    out
}

/// Occupied site indices (1-based) of a mask, ascending.
pub fn occupied_sites(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        out.push(rest.trailing_zeros() as usize + 1);
        rest &= rest - 1;
    }
    out
}

/// Ket string of a mask over `width` sites, site `width` leftmost.
pub fn bitstring(mask: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if mask >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}
