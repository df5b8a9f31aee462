//! Shared caches behind the φ-power and U₂-basis-row computations.
//!
//! A [`Workspace`] owns a ladder of φ-power expansions and the decomposed
//! basis rows U₂φ^i, both filled lazily and safe to share across threads.
//! All cached values are deterministic functions of their keys, so concurrent
//! fills are idempotent.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::eta;
use crate::phi_poly::U2BasisRow;
use crate::series::LaurentSeries;

/// Default certification guard: exponents of verified zero remainder required
/// above the top support degree when decomposing into ℤ[φ].
pub const DEFAULT_GUARD: i64 = 8;

/// Default cap on the series length the direct U₂-iteration strategy may
/// request before it errors out advising the algebraic strategy.
pub const DEFAULT_TERM_BUDGET: i64 = 1 << 22;

pub struct Workspace {
    guard: i64,
    term_budget: i64,
    ladder: Mutex<Vec<LaurentSeries>>,
    rows: Mutex<HashMap<(u32, i64), Arc<U2BasisRow>>>,
}

impl Default for Workspace {
    fn default() -> Self {
        Self::new()
    }
}

impl Workspace {
    pub fn new() -> Self {
        Self::with_guard(DEFAULT_GUARD)
    }

    pub fn with_guard(guard: i64) -> Self {
        Self {
            guard: guard.max(1),
            term_budget: DEFAULT_TERM_BUDGET,
            ladder: Mutex::new(Vec::new()),
            rows: Mutex::new(HashMap::new()),
        }
    }

    pub fn guard(&self) -> i64 {
        self.guard
    }

    pub fn term_budget(&self) -> i64 {
        self.term_budget
    }

    pub fn set_term_budget(&mut self, budget: i64) {
        self.term_budget = budget.max(1);
    }

    /// The q-expansion of φ^m through `precision` (cached; served from the
    /// ladder by truncation when a longer expansion is already known).
    pub fn phi_power(&self, m: u32, precision: i64) -> LaurentSeries {
        assert!(m >= 1, "phi_power needs m >= 1");
        let mut ladder = self.ladder.lock().unwrap();
        Self::ensure(&mut ladder, m as usize, precision);
        ladder[m as usize - 1].truncated(precision)
    }

    /// Fills the ladder up front so later per-power requests are pure cache
    /// hits; sweeps call this once with their grid maxima.
    pub fn prime_phi_powers(&self, max_m: u32, precision: i64) {
        if max_m == 0 {
            return;
        }
        let mut ladder = self.ladder.lock().unwrap();
        Self::ensure(&mut ladder, max_m as usize, precision);
    }

    fn ensure(ladder: &mut Vec<LaurentSeries>, m: usize, precision: i64) {
        if ladder.is_empty() || ladder[0].precision() < precision {
            let base = eta::phi_series(precision);
            if ladder.is_empty() {
                ladder.push(base);
            } else {
                ladder[0] = base;
            }
        }
        for k in 1..m {
            if k < ladder.len() && ladder[k].precision() >= precision {
                continue;
            }
            // predecessor has precision >= requested, so the product does too
            let next = ladder[k - 1].mul(&ladder[0]).truncated(precision);
            if k < ladder.len() {
                ladder[k] = next;
            } else {
                ladder.push(next);
            }
        }
    }

    pub(crate) fn cached_row(&self, key: (u32, i64)) -> Option<Arc<U2BasisRow>> {
        self.rows.lock().unwrap().get(&key).cloned()
    }

    pub(crate) fn store_row(&self, key: (u32, i64), row: Arc<U2BasisRow>) -> Arc<U2BasisRow> {
        self.rows.lock().unwrap().entry(key).or_insert(row).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Integer;

    #[test]
    fn ladder_serves_truncations_and_extensions() {
        let ws = Workspace::new();
        let p3 = ws.phi_power(3, 20);
        assert_eq!(p3.order(), Some(3));
        assert_eq!(p3.precision(), 20);
        // a(3,3) = 1, a(3,4) = 72
        assert_eq!(p3.coeff(3), &Integer::from(1));
        assert_eq!(p3.coeff(4), &Integer::from(72));
        let shorter = ws.phi_power(3, 10);
        assert_eq!(shorter.precision(), 10);
        assert!(shorter.agrees_with(&p3));
        // raising precision rebuilds only what is stale
        let longer = ws.phi_power(2, 40);
        assert_eq!(longer.precision(), 40);
        assert!(longer.agrees_with(&ws.phi_power(2, 12)));
    }

    #[test]
    fn leading_power_coefficients_are_one() {
        let ws = Workspace::new();
        ws.prime_phi_powers(32, 40);
        for m in 1..=32u32 {
            let p = ws.phi_power(m, 34);
            assert_eq!(p.order(), Some(i64::from(m)), "order of phi^{m}");
            assert_eq!(p.coeff(i64::from(m)), &Integer::from(1), "a({m},{m})");
        }
    }
}
