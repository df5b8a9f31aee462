//! Polynomials in φ and the U₂ action on them.
//!
//! Everything downstream rests on the triangular fact that a q-series with
//! positive order and enough known coefficients decomposes uniquely into
//! ℤ[φ]: peel the lowest remaining coefficient, subtract that multiple of the
//! matching φ-power, repeat, and demand a window of verified zeros above the
//! final support degree. On top of that sit the U₂ basis rows, α-fold U₂
//! iteration by two independent strategies, the Newton power-sum recursion,
//! the scaled ring-R divisibility predicate, and the modular-equation
//! residual on the half-integer grid.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::eta;
use crate::series::{ceil_div, two_adic_valuation, Integer, LaurentSeries, EXACT};
use crate::workspace::Workspace;

/// An element of ℤ[φ] with no constant term: a sparse map from degree j ≥ 1
/// to a nonzero integer coefficient d(j).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhiPolynomial {
    support: BTreeMap<i64, Integer>,
}

impl PhiPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn monomial(degree: i64, coeff: Integer) -> Self {
        let mut p = Self::new();
        p.insert_add(degree, coeff);
        p
    }

    /// Convenience constructor for tests and constants.
    pub fn from_terms(terms: &[(i64, i64)]) -> Self {
        let mut p = Self::new();
        for &(j, c) in terms {
            p.insert_add(j, c.into());
        }
        p
    }

    fn insert_add(&mut self, degree: i64, coeff: Integer) {
        if coeff.is_zero() {
            return;
        }
        assert!(degree >= 1, "phi-polynomials have no constant term");
        let entry = self.support.entry(degree).or_insert_with(Integer::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.support.remove(&degree);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.support.keys().next().copied()
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.support.keys().next_back().copied()
    }

    pub fn coeff(&self, degree: i64) -> Option<&Integer> {
        self.support.get(&degree)
    }

    /// Nonzero terms as (degree, coefficient), ascending by degree.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Integer)> {
        self.support.iter().map(|(&j, c)| (j, c))
    }

    /// Adds `scale · other` into self.
    pub fn add_scaled(&mut self, other: &Self, scale: &Integer) {
        if scale.is_zero() {
            return;
        }
        for (j, c) in other.terms() {
            self.insert_add(j, c * scale);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Integer::one());
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Integer::from(-1));
        out
    }

    pub fn scale(&self, c: &Integer) -> Self {
        let mut out = Self::new();
        out.add_scaled(self, c);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                out.insert_add(i + j, a * b);
            }
        }
        out
    }
}

impl Serialize for PhiPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> = self
            .support
            .iter()
            .map(|(j, c)| (j.to_string(), c.to_string()))
            .collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PhiPolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let map = BTreeMap::<String, String>::deserialize(deserializer)?;
        let mut p = PhiPolynomial::new();
        for (j, c) in map {
            let degree: i64 = j
                .parse()
                .map_err(|e| D::Error::custom(format!("bad degree {j:?}: {e}")))?;
            if degree < 1 {
                return Err(D::Error::custom(format!("degree {degree} below 1")));
            }
            let coeff: Integer = c
                .parse()
                .map_err(|e| D::Error::custom(format!("bad coefficient {c:?}: {e}")))?;
            p.insert_add(degree, coeff);
        }
        Ok(p)
    }
}

/// Decomposes a q-series into ℤ[φ] by triangular peeling.
///
/// The series must vanish at ∞ (order ≥ 1). The support is found
/// endogenously: the lowest remaining nonzero coefficient at exponent j fixes
/// d(j), and c·φ^j is subtracted. Membership is certified by `guard`
/// exponents of verified zero remainder above the final support degree;
/// a nonzero coefficient reaching that window is reported as not lying in
/// ℤ[φ] at this precision.
pub fn decompose_in_phi(g: &LaurentSeries, guard: i64, ws: &Workspace) -> Result<PhiPolynomial> {
    let guard = guard.max(1);
    if g.is_zero() {
        return Ok(PhiPolynomial::new());
    }
    let order = g.order().unwrap();
    if order <= 0 {
        return Err(Error::NotInPhiRing { exponent: order });
    }
    // An exactly-known input certifies itself at any window; restrict to a
    // finite one so the remainder can be materialized.
    let bounded;
    let g = if g.precision() == EXACT {
        let top = g.terms().last().map(|(e, _)| e).unwrap();
        bounded = g.truncated(top + guard + 1);
        &bounded
    } else {
        g
    };
    let prec = g.precision();
    let win_start = prec - guard;
    if order >= win_start {
        return Err(Error::InsufficientPrecision {
            context: "decomposition into Z[phi]",
            needed: order + guard + 1,
            available: prec,
        });
    }
    let mut rem = vec![Integer::zero(); (prec - order) as usize];
    for (e, c) in g.terms() {
        rem[(e - order) as usize] = c.clone();
    }
    let mut support = BTreeMap::new();
    let mut idx = 0usize;
    loop {
        while idx < rem.len() && rem[idx].is_zero() {
            idx += 1;
        }
        if idx == rem.len() {
            break;
        }
        let j = order + idx as i64;
        if j >= win_start {
            return Err(Error::NotInPhiRing { exponent: j });
        }
        let c = std::mem::take(&mut rem[idx]);
        let power = ws.phi_power(u32::try_from(j).expect("degree fits in u32"), prec);
        for (e, v) in power.terms() {
            if e > j {
                rem[(e - order) as usize] -= &c * v;
            }
        }
        support.insert(j, c);
        idx += 1;
    }
    Ok(PhiPolynomial { support })
}

/// Evaluates Σ d(j)·φ^j as a q-series through the given precision.
pub fn evaluate(poly: &PhiPolynomial, precision: i64, ws: &Workspace) -> LaurentSeries {
    let Some(min) = poly.min_degree() else {
        return LaurentSeries::zero(precision);
    };
    if min >= precision {
        return LaurentSeries::zero(precision);
    }
    let mut acc = vec![Integer::zero(); (precision - min) as usize];
    for (j, d) in poly.terms() {
        if j >= precision {
            continue;
        }
        let power = ws.phi_power(u32::try_from(j).expect("degree fits in u32"), precision);
        for (e, v) in power.terms() {
            acc[(e - min) as usize] += d * v;
        }
    }
    LaurentSeries::new(min, precision, acc)
}

/// The decomposition of U₂φ^i. By the support lemma it lives in degrees
/// ⌈i/2⌉ ..= 2i with nonzero endpoints; that claim is checked by the
/// verifier, not assumed here.
#[derive(Clone, Debug, Serialize)]
pub struct U2BasisRow {
    pub i: u32,
    pub row: PhiPolynomial,
}

/// Computes (or fetches) the basis row U₂φ^i: expand φ^i far enough that the
/// halved precision still covers degree 2i plus the certification window,
/// apply U₂, decompose.
pub fn u2_basis_row(i: u32, ws: &Workspace) -> Result<Arc<U2BasisRow>> {
    assert!(i >= 1, "basis rows start at i = 1");
    let guard = ws.guard();
    let key = (i, guard);
    if let Some(hit) = ws.cached_row(key) {
        return Ok(hit);
    }
    let precision = 2 * (2 * i64::from(i) + guard + 1);
    let image = ws.phi_power(i, precision).u_p(2);
    let row = decompose_in_phi(&image, guard, ws)?;
    Ok(ws.store_row(key, Arc::new(U2BasisRow { i, row })))
}

/// Applies U₂ on the φ-basis: d'(j) = Σ_i d(i)·b(i,j) over the stored
/// support, with rows served from the cache.
pub fn apply_u2_algebraic(poly: &PhiPolynomial, ws: &Workspace) -> Result<PhiPolynomial> {
    let mut out = PhiPolynomial::new();
    if let Some(max) = poly.max_degree() {
        prime_rows(u32::try_from(max).expect("degree fits in u32"), ws);
    }
    for (i, d) in poly.terms() {
        let row = u2_basis_row(u32::try_from(i).expect("degree fits in u32"), ws)?;
        out.add_scaled(&row.row, d);
    }
    Ok(out)
}

/// Fills the φ-power ladder for every request rows 1..=max_row will make, so
/// ascending row computations never rebuild the ladder at creeping
/// precisions. Peeling needs powers through 2·max_row at the halved
/// precision; row inputs need φ^i itself at the doubled one.
pub fn prime_rows(max_row: u32, ws: &Workspace) {
    let g = ws.guard();
    let r = i64::from(max_row);
    ws.prime_phi_powers(max_row * 2, 2 * r + g + 1);
    ws.prime_phi_powers(max_row, 2 * (2 * r + g + 1));
}

/// Which route `u2_iterate` takes to U₂^α φ^m.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Expand φ^m wide enough, apply the coefficient-extraction operator α
    /// times, decompose once. Simple, but the initial precision grows like
    /// 4^α.
    Direct,
    /// Start from the monomial φ^m and apply the basis-row action α times.
    Algebraic,
}

/// U₂^α φ^m as a φ-polynomial. Both strategies must agree exactly; the
/// direct one refuses grids whose initial expansion would exceed the
/// workspace term budget.
pub fn u2_iterate(m: u32, alpha: u32, strategy: Strategy, ws: &Workspace) -> Result<PhiPolynomial> {
    assert!(m >= 1, "u2_iterate needs m >= 1");
    if alpha == 0 {
        return Ok(PhiPolynomial::monomial(i64::from(m), Integer::one()));
    }
    match strategy {
        Strategy::Direct => {
            let guard = ws.guard();
            let budget = ws.term_budget();
            let required: i128 = if alpha >= 40 {
                i128::MAX
            } else {
                (1i128 << alpha) * ((1i128 << alpha) * i128::from(m) + i128::from(guard) + 1)
            };
            if required > i128::from(budget) {
                return Err(Error::TermBudgetExceeded { required, budget });
            }
            let mut series = ws.phi_power(m, required as i64);
            for _ in 0..alpha {
                series = series.u_p(2);
            }
            decompose_in_phi(&series, guard, ws)
        }
        Strategy::Algebraic => {
            let mut poly = PhiPolynomial::monomial(i64::from(m), Integer::one());
            for _ in 0..alpha {
                poly = apply_u2_algebraic(&poly, ws)?;
            }
            Ok(poly)
        }
    }
}

fn newton_g1() -> PhiPolynomial {
    // g1 = 2^16·3·φ + 2^24·φ²
    PhiPolynomial::from_terms(&[(1, 3 << 16), (2, 1 << 24)])
}

fn newton_g2() -> PhiPolynomial {
    // g2 = -2^24·φ
    PhiPolynomial::from_terms(&[(1, -(1 << 24))])
}

/// Rolling state of the power-sum recursion S_m = g₁S_{m−1} − g₂S_{m−2} for
/// the quadratic with roots h₀, h₁.
pub struct NewtonState {
    pub s_prev: PhiPolynomial,
    pub s_prev2: PhiPolynomial,
    pub g1: PhiPolynomial,
    pub g2: PhiPolynomial,
}

impl NewtonState {
    /// Seeds the recursion with S₁ = g₁ and S₂ = g₁S₁ − 2g₂, positioned to
    /// produce S₃ next.
    pub fn new() -> Self {
        let g1 = newton_g1();
        let g2 = newton_g2();
        let s1 = g1.clone();
        let s2 = g1.mul(&s1).sub(&g2.scale(&Integer::from(2)));
        Self {
            s_prev: s2,
            s_prev2: s1,
            g1,
            g2,
        }
    }

    /// Advances one step and returns the new power sum.
    pub fn advance(&mut self) -> PhiPolynomial {
        let next = self.g1.mul(&self.s_prev).sub(&self.g2.mul(&self.s_prev2));
        self.s_prev2 = std::mem::replace(&mut self.s_prev, next.clone());
        next
    }
}

impl Default for NewtonState {
    fn default() -> Self {
        Self::new()
    }
}

/// S_m via the two-term Newton recursion.
pub fn newton_s(m: u32) -> PhiPolynomial {
    assert!(m >= 1);
    let mut state = NewtonState::new();
    match m {
        1 => state.s_prev2,
        2 => state.s_prev,
        _ => {
            let mut s = PhiPolynomial::new();
            for _ in 3..=m {
                s = state.advance();
            }
            s
        }
    }
}

/// Whether `poly` lies in 2^k·R, where R is the set of φ-polynomials whose
/// degree-n coefficient has 2-adic valuation at least 8(n−1).
pub fn in_scaled_ring_r(poly: &PhiPolynomial, k: i64) -> bool {
    poly.terms()
        .all(|(j, d)| two_adic_valuation(d).satisfies(k + 8 * (j - 1)))
}

/// The Lehner modular-equation data: U₂φ = 2(b₁φ + b₂φ²) and the quadratic
/// x² − g₁x + g₂ with roots h₀, h₁.
///
/// b₁ and b₂ are never hardcoded: they are derived from the α = 1
/// decomposition at construction and cross-checked against the explicit g₁
/// driving the Newton recursion. A mismatch is an error, not a warning.
pub struct ModularEquation {
    pub b1: Integer,
    pub b2: Integer,
    pub g1: PhiPolynomial,
    pub g2: PhiPolynomial,
}

impl ModularEquation {
    pub fn derive(ws: &Workspace) -> Result<Self> {
        let row = u2_basis_row(1, ws)?;
        if row.row.min_degree() != Some(1) || row.row.max_degree() != Some(2) {
            return Err(Error::InconsistentConstants {
                detail: format!(
                    "U_2 phi should be supported on degrees 1..=2, got {:?}..={:?}",
                    row.row.min_degree(),
                    row.row.max_degree()
                ),
            });
        }
        let half = |j: i64| -> Result<Integer> {
            let c = row.row.coeff(j).cloned().unwrap_or_else(Integer::zero);
            if c.bit(0) {
                return Err(Error::InconsistentConstants {
                    detail: format!("U_2 phi coefficient {c} at degree {j} is odd"),
                });
            }
            Ok(c >> 1)
        };
        let b1 = half(1)?;
        let b2 = half(2)?;
        let scale: Integer = Integer::one() << 14;
        let scaled_b1: Integer = &b1 * &scale;
        let scaled_b2: Integer = &b2 * &scale;
        let g1 = PhiPolynomial::monomial(1, scaled_b1)
            .add(&PhiPolynomial::monomial(2, scaled_b2.clone()));
        let g2 = PhiPolynomial::monomial(1, -scaled_b2);
        if g1 != newton_g1() || g2 != newton_g2() {
            return Err(Error::InconsistentConstants {
                detail: "derived g1/g2 disagree with the Newton recursion constants".into(),
            });
        }
        Ok(Self { b1, b2, g1, g2 })
    }
}

/// The w-series h₀² − G₁·h₀ + G₂ with G₁, G₂ evaluated as q-series and
/// pushed onto the w-grid by q = w². Identically zero when everything above
/// it is right; returned as a series so callers can assert that through the
/// available precision.
pub fn modular_equation_residual(w_precision: i64, ws: &Workspace) -> Result<LaurentSeries> {
    let me = ModularEquation::derive(ws)?;
    let q_precision = ceil_div(w_precision, 2) + 1;
    let g1_w = evaluate(&me.g1, q_precision, ws).dilate(2);
    let g2_w = evaluate(&me.g2, q_precision, ws).dilate(2);
    let h0 = eta::h0_series(w_precision.saturating_add(1));
    Ok(h0.mul(&h0).sub(&g1_w.mul(&h0)).add(&g2_w))
}

/// U₂φ^m computed the half-grid way: 2^{−1−12m}(h₀^m + h₀(−w)^m), which has
/// only even w-powers, read back as a q-series. Fails if the claimed power
/// of two does not divide exactly.
pub fn half_grid_u2(m: u32, w_precision: i64) -> Result<LaurentSeries> {
    let h0 = eta::h0_series(w_precision);
    let hm = h0.pow(u64::from(m));
    let sum = hm.add(&hm.substitute_neg());
    let scaled = sum.div_exact(&(Integer::one() << (1 + 12 * u64::from(m))))?;
    Ok(scaled.u_p(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> Integer {
        Integer::from(v)
    }

    #[test]
    fn basis_row_one() {
        let ws = Workspace::new();
        let row = u2_basis_row(1, &ws).unwrap();
        assert_eq!(row.row, PhiPolynomial::from_terms(&[(1, 24), (2, 2048)]));
    }

    #[test]
    fn basis_row_two() {
        let ws = Workspace::new();
        let row = u2_basis_row(2, &ws).unwrap();
        assert_eq!(
            row.row,
            PhiPolynomial::from_terms(&[(1, 1), (2, 1152), (3, 196608), (4, 8388608)])
        );
    }

    #[test]
    fn basis_rows_are_cached() {
        let ws = Workspace::new();
        let a = u2_basis_row(3, &ws).unwrap();
        let b = u2_basis_row(3, &ws).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn decompose_basis_element() {
        let ws = Workspace::new();
        let g = ws.phi_power(3, 20);
        let p = decompose_in_phi(&g, 8, &ws).unwrap();
        assert_eq!(p, PhiPolynomial::from_terms(&[(3, 1)]));
    }

    #[test]
    fn decompose_rejects_junk_in_window() {
        let ws = Workspace::new();
        // phi plus a stray monomial too close to the precision bound
        let junk = LaurentSeries::polynomial(&[(17, 1)]).truncated(20);
        let g = ws.phi_power(1, 20).add(&junk);
        match decompose_in_phi(&g, 8, &ws) {
            Err(Error::NotInPhiRing { exponent }) => assert_eq!(exponent, 17),
            other => panic!("expected NotInPhiRing, got {other:?}"),
        }
    }

    #[test]
    fn decompose_rejects_constant_term() {
        let ws = Workspace::new();
        let g = LaurentSeries::polynomial(&[(0, 1), (1, 24)]).truncated(30);
        assert!(matches!(
            decompose_in_phi(&g, 8, &ws),
            Err(Error::NotInPhiRing { exponent: 0 })
        ));
    }

    #[test]
    fn decompose_insufficient_precision() {
        let ws = Workspace::new();
        let g = ws.phi_power(1, 5);
        assert!(matches!(
            decompose_in_phi(&g, 8, &ws),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn evaluate_round_trip() {
        let ws = Workspace::new();
        let p = PhiPolynomial::from_terms(&[(1, 24), (2, 2048)]);
        let series = evaluate(&p, 30, &ws);
        assert_eq!(series.coeff(1), &big(24));
        assert_eq!(series.coeff(2), &big(24 * 24 + 2048));
        assert_eq!(decompose_in_phi(&series, 8, &ws).unwrap(), p);
        assert!(evaluate(&PhiPolynomial::new(), 10, &ws).is_zero());
    }

    #[test]
    fn apply_u2_matches_composition() {
        let ws = Workspace::new();
        let p = PhiPolynomial::from_terms(&[(1, 24), (2, 2048)]);
        let q = apply_u2_algebraic(&p, &ws).unwrap();
        assert_eq!(
            q,
            PhiPolynomial::from_terms(
                &[(1, 2624), (2, 2408448), (3, 402653184), (4, 17179869184),]
            )
        );
        assert!(apply_u2_algebraic(&PhiPolynomial::new(), &ws)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn iterate_alpha_zero_and_one() {
        let ws = Workspace::new();
        assert_eq!(
            u2_iterate(3, 0, Strategy::Direct, &ws).unwrap(),
            PhiPolynomial::from_terms(&[(3, 1)])
        );
        for strategy in [Strategy::Direct, Strategy::Algebraic] {
            assert_eq!(
                u2_iterate(1, 1, strategy, &ws).unwrap(),
                PhiPolynomial::from_terms(&[(1, 24), (2, 2048)])
            );
        }
    }

    #[test]
    fn iterate_strategies_agree_small() {
        let ws = Workspace::new();
        for m in 1..=4u32 {
            for alpha in 1..=2u32 {
                let d = u2_iterate(m, alpha, Strategy::Direct, &ws).unwrap();
                let a = u2_iterate(m, alpha, Strategy::Algebraic, &ws).unwrap();
                assert_eq!(d, a, "strategy mismatch at m={m}, alpha={alpha}");
            }
        }
    }

    #[test]
    fn iterate_term_budget() {
        let ws = Workspace::new();
        assert!(matches!(
            u2_iterate(1, 12, Strategy::Direct, &ws),
            Err(Error::TermBudgetExceeded { .. })
        ));
    }

    #[test]
    fn newton_seeds() {
        assert_eq!(
            newton_s(1),
            PhiPolynomial::from_terms(&[(1, 196608), (2, 16777216)])
        );
        let s2 = newton_s(2);
        let unit = Integer::one() << 24;
        assert_eq!(s2.coeff(1), Some(&(&unit * 2)));
        assert_eq!(s2.coeff(2), Some(&(&unit * 2304)));
        assert_eq!(s2.coeff(3), Some(&(&unit * 393216)));
        assert_eq!(s2.coeff(4), Some(&(&unit * 16777216)));
    }

    #[test]
    fn newton_bridge_small() {
        let ws = Workspace::new();
        for m in 1..=6u32 {
            let row = u2_iterate(m, 1, Strategy::Algebraic, &ws).unwrap();
            let scaled = row.scale(&(Integer::one() << (1 + 12 * u64::from(m))));
            assert_eq!(scaled, newton_s(m), "Newton bridge fails at m={m}");
        }
    }

    #[test]
    fn ring_membership() {
        assert!(in_scaled_ring_r(&newton_s(1), 16));
        assert!(in_scaled_ring_r(&PhiPolynomial::new(), 123));
        assert!(!in_scaled_ring_r(
            &PhiPolynomial::from_terms(&[(1, 2), (2, 4)]),
            8
        ));
    }

    #[test]
    fn modular_equation_constants() {
        let ws = Workspace::new();
        let me = ModularEquation::derive(&ws).unwrap();
        assert_eq!(me.b1, big(12));
        assert_eq!(me.b2, big(1024));
        assert_eq!(me.g1, newton_g1());
        assert_eq!(me.g2, newton_g2());
    }

    #[test]
    fn residual_vanishes() {
        let ws = Workspace::new();
        let r = modular_equation_residual(100, &ws).unwrap();
        assert!(r.is_zero(), "residual should vanish, got {r}");
        assert!(r.precision() > 100);
    }

    #[test]
    fn half_grid_matches_u2() {
        let ws = Workspace::new();
        for m in 1..=4u32 {
            let lhs = half_grid_u2(m, 60).unwrap();
            let rhs = ws.phi_power(m, 60).u_p(2);
            assert!(lhs.agrees_with(&rhs), "half-grid identity fails at m={m}");
        }
    }

    #[test]
    fn polynomial_json_shape() {
        let p = PhiPolynomial::from_terms(&[(1, 24), (2, 2048)]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"1":"24","2":"2048"}"#);
        let back: PhiPolynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }
}
