//! The level-2 Hauptmodul φ = (η(2z)/η(z))^24 and relatives, as exact
//! q-expansions.
//!
//! Two independent product formulas are provided for φ — the eta quotient
//! itself and the simplified product q·∏(1+q^n)^24 — and must agree
//! bit-for-bit; the verification suite leans on that as an oracle. Series on
//! the half-integer grid (variable w with q = w²) are ordinary
//! [`LaurentSeries`] values in w; conversions go through `dilate(2)` and
//! `u_p(2)` explicitly.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::series::{Integer, LaurentSeries};

/// A finite eta-quotient shape: (argument multiplier r, exponent e) pairs for
/// ∏ η(rz)^e, with the overall q-offset Σ r·e/24 tracked symbolically and
/// resolved to an integer shift before any series is materialized.
#[derive(Clone, Debug)]
pub struct EtaQuotientSpec {
    factors: Vec<(u32, i32)>,
    q_offset: i64,
}

impl EtaQuotientSpec {
    /// Fails unless the net fractional q-offset is an integer, which it is
    /// for every quotient this crate uses.
    pub fn new(factors: Vec<(u32, i32)>) -> Result<Self> {
        let numerator: i64 = factors
            .iter()
            .map(|&(r, e)| i64::from(r) * i64::from(e))
            .sum();
        if numerator.rem_euclid(24) != 0 {
            return Err(Error::FractionalEtaOffset { numerator });
        }
        Ok(Self {
            factors,
            q_offset: numerator.div_euclid(24),
        })
    }

    pub fn q_offset(&self) -> i64 {
        self.q_offset
    }

    /// Expands the quotient through the given precision by dense evaluation:
    /// every factor (1 - q^{rn})^{±e} with rn below the bound is expanded by
    /// binomial coefficients and folded into the accumulator in place.
    pub fn expand(&self, precision: i64) -> LaurentSeries {
        let window = precision - self.q_offset;
        if window <= 0 {
            return LaurentSeries::zero(precision);
        }
        let len = window as usize;
        let mut acc = vec![Integer::zero(); len];
        acc[0] = Integer::one();
        for &(r, e) in &self.factors {
            if e == 0 {
                continue;
            }
            let expansion = binomial_expansion(e, len);
            let mut n = 1usize;
            while r as usize * n < len {
                fold_factor(&mut acc, r as usize * n, &expansion);
                n += 1;
            }
        }
        LaurentSeries::new(self.q_offset, precision, acc)
    }
}

/// Coefficients of (1 - x)^e as far as index `len - 1`: finitely many signed
/// binomials for e > 0, the nonnegative binomial series for e < 0.
fn binomial_expansion(e: i32, len: usize) -> Vec<Integer> {
    let mut out = vec![Integer::one()];
    if e > 0 {
        let e = e as u64;
        let mut c = Integer::one();
        for i in 1..=e.min(len as u64) {
            c = c * (e - i + 1) / i;
            out.push(if i % 2 == 1 { -&c } else { c.clone() });
        }
    } else {
        let k = (-e) as u64;
        let mut c = Integer::one();
        for i in 1..len as u64 {
            c = c * (k + i - 1) / i;
            out.push(c.clone());
        }
    }
    out
}

/// In-place multiply of `acc` by Σ_i expansion[i]·x^{j·i}, descending so each
/// read sees pre-update values (the expansion has constant term 1).
fn fold_factor(acc: &mut [Integer], j: usize, expansion: &[Integer]) {
    for t in (0..acc.len()).rev() {
        let mut add = Integer::zero();
        let mut i = 1usize;
        while i * j <= t && i < expansion.len() {
            if !acc[t - i * j].is_zero() {
                add += &expansion[i] * &acc[t - i * j];
            }
            i += 1;
        }
        if !add.is_zero() {
            acc[t] += add;
        }
    }
}

/// q-expansion of φ(z) = (η(2z)/η(z))^24 = q + 24q² + 300q³ + ⋯ through the
/// given precision, via the eta-quotient product.
pub fn phi_series(precision: i64) -> LaurentSeries {
    EtaQuotientSpec::new(vec![(2, 24), (1, -24)])
        .expect("offset (2·24 - 24)/24 is integral")
        .expand(precision)
}

/// The same expansion via the simplified product q·∏(1+q^n)^24. Kept as a
/// deliberately separate code path so the two formulas can cross-check each
/// other.
pub fn phi_series_simplified(precision: i64) -> LaurentSeries {
    let window = precision - 1;
    if window <= 0 {
        return LaurentSeries::zero(precision);
    }
    let len = window as usize;
    // C(24, i) all fit comfortably in i64
    let mut binom = [0i64; 25];
    binom[0] = 1;
    for i in 1..=24usize {
        binom[i] = binom[i - 1] * (24 - i as i64 + 1) / i as i64;
    }
    let mut acc = vec![Integer::zero(); len];
    acc[0] = Integer::one();
    for n in 1..len {
        for t in (n..len).rev() {
            let mut add = Integer::zero();
            let mut i = 1usize;
            while i <= 24 && i * n <= t {
                if !acc[t - i * n].is_zero() {
                    add += &acc[t - i * n] * binom[i];
                }
                i += 1;
            }
            if !add.is_zero() {
                acc[t] += add;
            }
        }
    }
    LaurentSeries::new(1, precision, acc)
}

/// ψ = 1/φ = q⁻¹ - 24 + 276q - ⋯ through the given precision.
pub fn psi_series(precision: i64) -> LaurentSeries {
    phi_series(precision.saturating_add(2))
        .invert(precision)
        .expect("phi has unit leading coefficient")
}

/// The half-grid series h₀ = 2¹²·Σ a(1,n)wⁿ in the formal variable w, where
/// q = w². Its companion h₁ is `h0.substitute_neg()`.
pub fn h0_series(w_precision: i64) -> LaurentSeries {
    phi_series(w_precision).scale(&(Integer::one() << 12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::two_adic_valuation;

    #[test]
    fn phi_leading_coefficients() {
        let phi = phi_series(13);
        let expect: [(i64, i64); 12] = [
            (1, 1),
            (2, 24),
            (3, 300),
            (4, 2624),
            (5, 18126),
            (6, 105504),
            (7, 538296),
            (8, 2471424),
            (9, 10400997),
            (10, 40674128),
            (11, 149343012),
            (12, 519045888),
        ];
        for (n, c) in expect {
            assert_eq!(phi.coeff(n), &Integer::from(c), "a(1,{n})");
        }
        assert_eq!(phi.order(), Some(1));
    }

    #[test]
    fn simplified_formula_agrees() {
        let a = phi_series(300);
        let b = phi_series_simplified(300);
        assert_eq!(a, b);
        assert_eq!(b.coeff(2), &Integer::from(24));
        assert_eq!(b.coeff(5), &Integer::from(18126));
    }

    #[test]
    fn psi_expansion() {
        let psi = psi_series(4);
        assert_eq!(psi.order(), Some(-1));
        assert_eq!(psi.coeff(-1), &Integer::from(1));
        assert_eq!(psi.coeff(0), &Integer::from(-24));
        assert_eq!(psi.coeff(1), &Integer::from(276));
        assert_eq!(psi.coeff(2), &Integer::from(-2048));
        assert_eq!(psi.coeff(3), &Integer::from(11202));
        let prod = phi_series(8).mul(&psi_series(6));
        assert!(prod.agrees_with(&LaurentSeries::one()));
    }

    #[test]
    fn fractional_offset_rejected() {
        assert!(matches!(
            EtaQuotientSpec::new(vec![(1, 12)]),
            Err(Error::FractionalEtaOffset { numerator: 12 })
        ));
        assert_eq!(
            EtaQuotientSpec::new(vec![(2, 24), (1, -24)])
                .unwrap()
                .q_offset(),
            1
        );
    }

    #[test]
    fn h0_values() {
        let h0 = h0_series(4);
        assert_eq!(h0.coeff(1), &Integer::from(4096));
        assert_eq!(h0.coeff(2), &Integer::from(98304));
        let h1 = h0.substitute_neg();
        assert_eq!(h1.coeff(1), &Integer::from(-4096));
        assert_eq!(h1.coeff(2), &Integer::from(98304));
    }

    #[test]
    fn phi_mod_two_is_sparse_product() {
        // phi = q·prod(1 + q^{8n} + q^{16n} + q^{24n}) mod 2
        let bound = 600usize;
        let phi = phi_series(bound as i64 + 1);
        let mut p = vec![false; bound + 1];
        p[0] = true;
        for n in 1..=bound / 8 {
            for t in (0..=bound).rev() {
                for d in [8 * n, 16 * n, 24 * n] {
                    if d > t {
                        break;
                    }
                    p[t] ^= p[t - d];
                }
            }
        }
        for e in 1..=bound as i64 {
            let odd = phi.coeff(e).bit(0);
            assert_eq!(odd, p[(e - 1) as usize], "parity mismatch at q^{e}");
        }
        // spot checks on valuations while the series is handy
        assert_eq!(
            two_adic_valuation(phi.coeff(2)),
            crate::series::Valuation::Finite(3)
        );
        assert_eq!(
            two_adic_valuation(phi.coeff(4)),
            crate::series::Valuation::Finite(6)
        );
    }
}
