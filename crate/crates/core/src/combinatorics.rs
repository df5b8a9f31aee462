//! Integer combinatorics behind the congruences: the halving map f, the
//! binary-window function γ (two independent definitions, one from the digit
//! pattern and one counting odd iterates of f), the valuation bound formulas,
//! and the bounded-multiplicity partition counter driving the parity theorem.

use serde::Serialize;

use crate::series::Integer;
use num_traits::{One, Zero};

/// k-fold application of f(ℓ) = ⌈ℓ/2⌉; the fixed point is 1.
pub fn f_iter(ell: u64, k: u32) -> u64 {
    debug_assert!(ell >= 1);
    let mut x = ell;
    for _ in 0..k {
        x = (x + 1) >> 1;
    }
    x
}

/// The rightmost α binary digits of m, zero-padded, together with the index
/// of the rightmost 1 (if any) and the count of zero digits above it inside
/// the window.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BinaryProfile {
    pub m: u64,
    pub alpha: u32,
    /// m mod 2^α — the digits a_α…a₁ packed as an integer.
    pub window: u64,
    /// 1-based index of the rightmost 1 within the window.
    pub i_prime: Option<u32>,
    pub zeros_above: u32,
}

impl BinaryProfile {
    pub fn new(m: u64, alpha: u32) -> Self {
        debug_assert!(m >= 1);
        let window = if alpha >= 64 {
            m
        } else {
            m & ((1u64 << alpha) - 1)
        };
        if window == 0 {
            return Self {
                m,
                alpha,
                window,
                i_prime: None,
                zeros_above: 0,
            };
        }
        let i_prime = window.trailing_zeros() + 1;
        let ones_above = window.count_ones() - 1;
        let zeros_above = alpha - i_prime - ones_above;
        Self {
            m,
            alpha,
            window,
            i_prime: Some(i_prime),
            zeros_above,
        }
    }

    /// Digit a_i of the window, i = 1..=alpha.
    pub fn digit(&self, i: u32) -> u8 {
        debug_assert!(i >= 1 && i <= self.alpha);
        if i > 64 {
            0
        } else {
            ((self.window >> (i - 1)) & 1) as u8
        }
    }

    pub fn gamma(&self) -> u32 {
        match self.i_prime {
            None => 0,
            Some(_) => self.zeros_above + 1,
        }
    }
}

/// γ(m, α) from the binary window: zero if the rightmost α digits of m are
/// all zero, otherwise one plus the number of zero digits above the
/// rightmost 1.
pub fn gamma_binary(m: u64, alpha: u32) -> u32 {
    BinaryProfile::new(m, alpha).gamma()
}

/// γ(m, α) the other way: the number of odd values among
/// m, f(m), …, f^{α−1}(m). Agrees with `gamma_binary` everywhere; the two
/// are kept as independent routes.
pub fn gamma_via_f(m: u64, alpha: u32) -> u32 {
    let mut count = 0;
    let mut x = m;
    for _ in 0..alpha {
        if x & 1 == 1 {
            count += 1;
        }
        x = (x + 1) >> 1;
    }
    count
}

/// The correction term of the refined bound: −1 exactly when f^{α−1}(m) is
/// even and differs from 2j.
pub fn c_term(m: u64, j: u64, alpha: u32) -> i64 {
    debug_assert!(alpha >= 1);
    let s = f_iter(m, alpha - 1);
    if s & 1 == 0 && s != 2 * j {
        -1
    } else {
        0
    }
}

/// Refined lower bound on ν₂(d(m,j,α)): 8(j − f^α(m)) + 3γ(m,α) + c(m,j,α).
pub fn better_bound(m: u64, j: u64, alpha: u32) -> i64 {
    debug_assert!(alpha >= 1);
    let fa = f_iter(m, alpha);
    8 * (j as i64 - fa as i64) + 3 * i64::from(gamma_binary(m, alpha)) + c_term(m, j, alpha)
}

/// The classical bound: 8(j−1) + 3(α−m+1) + (1−m). Often negative, in which
/// case it says nothing.
pub fn lehner_bound(m: u64, j: u64, alpha: u32) -> i64 {
    let (m, j, alpha) = (m as i64, j as i64, i64::from(alpha));
    8 * (j - 1) + 3 * (alpha - m + 1) + (1 - m)
}

/// Writes n = 2^α·n′ with n′ odd.
pub fn factor_two(n: u64) -> (u32, u64) {
    debug_assert!(n >= 1);
    let alpha = n.trailing_zeros();
    (alpha, n >> alpha)
}

/// Floor of the square root, by integer Newton iteration — no floating point.
fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = 1u64 << (n.ilog2() / 2 + 1);
    loop {
        let y = (x + n / x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Whether n = (2k+1)² for some k ≥ 0.
pub fn is_odd_square(n: u64) -> bool {
    if n & 1 == 0 {
        return false;
    }
    let r = isqrt(n);
    r * r == n
}

/// Number of partitions of n in which every part appears at most 3 times.
pub fn t_count(n: u64) -> Integer {
    t_count_table(n).pop().unwrap()
}

/// The table t_count(0..=n_max), by bottom-up DP over the product
/// ∏(1 + q^k + q^{2k} + q^{3k}).
pub fn t_count_table(n_max: u64) -> Vec<Integer> {
    let n = n_max as usize;
    let mut table = vec![Integer::zero(); n + 1];
    table[0] = Integer::one();
    for k in 1..=n {
        let mut next = vec![Integer::zero(); n + 1];
        for (i, v) in table.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for mult in 0..4usize {
                let target = i + mult * k;
                if target > n {
                    break;
                }
                next[target] += v;
            }
        }
        table = next;
    }
    table
}

/// A congruence instance: n = 2^α·n′ with n′ odd, carrying γ(m,α) and the
/// asserted modulus exponent 3γ.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CongruenceCase {
    pub m: u64,
    pub n: u64,
    pub alpha: u32,
    pub n_prime: u64,
    pub gamma: u32,
    pub modulus_exponent: u32,
}

impl CongruenceCase {
    pub fn new(m: u64, n: u64) -> Self {
        let (alpha, n_prime) = factor_two(n);
        let gamma = gamma_binary(m, alpha);
        Self {
            m,
            n,
            alpha,
            n_prime,
            gamma,
            modulus_exponent: 3 * gamma,
        }
    }
}
