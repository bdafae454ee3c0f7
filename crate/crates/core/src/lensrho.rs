//! Lens space triangulations, cotangent-sum rho invariants, and invariant counting.
//!
//! `L(N; 1, ..., 1)` of dimension `2d - 1` is triangulated as the quotient of the join
//! of `d` copies of an `N`-gon by rotating every factor one step at once.

use thiserror::Error;

use crate::simplicia::{polygon_rotation, ComplexError, DeltaComplex, FreeAction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LensError {
    #[error("the rotation quotient needs N >= 3, got N = {0}")]
    OrderTooSmall(u64),
    #[error("lens spaces here need d >= 1")]
    ZeroJoin,
    #[error("invariant counts are for odd dimensions, got {0}")]
    EvenDimension(u64),
    #[error("N must be at least 2, got {0}")]
    TrivialGroup(u64),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// `L(N; 1, ..., 1)` of dimension `2d - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LensSpec {
    pub n: u64,
    pub d: u32,
}

impl LensSpec {
    pub fn new(n: u64, d: u32) -> Self {
        Self { n, d }
    }

    pub fn dimension(&self) -> u32 {
        2 * self.d - 1
    }
}

/// The join of `d` rotated `N`-gons and the diagonal rotation on it.
pub fn lens_cover(spec: LensSpec) -> Result<(DeltaComplex, FreeAction), LensError> {
    if spec.d == 0 {
        return Err(LensError::ZeroJoin);
    }
    if spec.n < 3 {
        return Err(LensError::OrderTooSmall(spec.n));
    }
    let n = spec.n as usize;
    let polygon = DeltaComplex::polygon(n);
    let rot = polygon_rotation(n, 1);
    let mut k = polygon.clone();
    let mut action = rot.clone();
    for _ in 1..spec.d {
        let (j, idx) = k.join_indexed(&polygon);
        action = idx.map(&action, &rot);
        k = j;
    }
    Ok((k, FreeAction::cyclic(spec.n, action)?))
}

pub fn lens_complex(spec: LensSpec) -> Result<DeltaComplex, LensError> {
    let (k, action) = lens_cover(spec)?;
    Ok(k.quotient(&action)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LensCounts {
    pub f_vector: Vec<usize>,
    pub total: usize,
    pub top: usize,
}

/// Cell counts of [`lens_complex`], from the join's counts divided by `N`.
pub fn lens_count(spec: LensSpec) -> Result<LensCounts, LensError> {
    let f = lens_complex(spec)?.f_vector();
    Ok(LensCounts { total: f.iter().sum(), top: *f.last().unwrap_or(&0), f_vector: f })
}

/// Which cells a growth fit counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountKind {
    Top,
    Total,
}

/// Least-squares slope of `log(count)` against `log(N)`.
pub fn growth_exponent(d: u32, ns: &[u64], kind: CountKind) -> Result<f64, LensError> {
    let mut pts = Vec::with_capacity(ns.len());
    for &n in ns {
        let c = lens_count(LensSpec::new(n, d))?;
        let y = match kind {
            CountKind::Top => c.top,
            CountKind::Total => c.total,
        };
        pts.push(((n as f64).ln(), (y as f64).ln()));
    }
    Ok(least_squares_slope(&pts))
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Compensated (Neumaier) summation.
fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `sum_{k=1}^{N-1} cot^d(pi k / N)`. Terms with `k > N/2` are taken as `-cot` of the
/// mirror angle so that odd powers cancel exactly.
pub fn rho_atiyah_bott(spec: LensSpec) -> Result<f64, LensError> {
    if spec.n < 2 {
        return Err(LensError::TrivialGroup(spec.n));
    }
    let n = spec.n;
    let cot = |k: u64| {
        let x = std::f64::consts::PI * k as f64 / n as f64;
        x.cos() / x.sin()
    };
    let terms = (1..n).map(|k| {
        let c = if 2 * k > n {
            -cot(n - k)
        } else if 2 * k == n {
            0.0
        } else {
            cot(k)
        };
        c.powi(spec.d as i32)
    });
    Ok(neumaier_sum(terms))
}

/// `(N / pi)^d`.
pub fn rho_lower_bound(spec: LensSpec) -> f64 {
    (spec.n as f64 / std::f64::consts::PI).powi(spec.d as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCheck {
    Holds,
    Fails,
    /// The inequality is only claimed for `N >= 4` and even `d`.
    OutOfHypothesis,
}

impl BoundCheck {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundCheck::Holds => "holds",
            BoundCheck::Fails => "fails",
            BoundCheck::OutOfHypothesis => "out-of-hypothesis",
        }
    }
}

/// Checks `(N / pi)^d < rho`.
pub fn rho_lower_bound_check(spec: LensSpec) -> Result<BoundCheck, LensError> {
    if spec.n < 4 || spec.d % 2 == 1 {
        return Ok(BoundCheck::OutOfHypothesis);
    }
    Ok(if rho_lower_bound(spec) < rho_atiyah_bott(spec)? { BoundCheck::Holds } else { BoundCheck::Fails })
}

/// `c * N^(d-1)`, the simplex-count lower bound for a given dimensional constant `c`.
pub fn complexity_lower_bound(spec: LensSpec, c: f64) -> f64 {
    c * (spec.n as f64).powi(spec.d as i32 - 1)
}

pub fn divisor_count(n: u64) -> u64 {
    let mut count = 0;
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            count += if i * i == n { 1 } else { 2 };
        }
        i += 1;
    }
    count
}

fn delta(n: u64, dim: u64) -> Result<u64, LensError> {
    if dim.is_multiple_of(2) {
        return Err(LensError::EvenDimension(dim));
    }
    Ok(u64::from(n.is_multiple_of(2) && dim % 4 == 3))
}

/// `floor((N - 1) / 2) + delta`, with `delta = 1` exactly when `N` is even and the
/// manifold dimension is `3 mod 4`.
pub fn invariant_count(n: u64, dim: u64) -> Result<u64, LensError> {
    if n < 2 {
        return Err(LensError::TrivialGroup(n));
    }
    Ok((n - 1) / 2 + delta(n, dim)?)
}

/// `N - (number of divisors of N) + delta`.
pub fn homotopy_invariant_count(n: u64, dim: u64) -> Result<u64, LensError> {
    if n < 2 {
        return Err(LensError::TrivialGroup(n));
    }
    Ok(n - divisor_count(n) + delta(n, dim)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lens_spaces() {
        let l = lens_complex(LensSpec::new(3, 2)).unwrap();
        assert_eq!(l.f_vector(), vec![2, 5, 6, 3]);
        assert!(l.homology().h(1).is(0, &[3]));
        assert_eq!(l.euler(), 0);
        for n in 3..=9 {
            assert_eq!(lens_complex(LensSpec::new(n, 1)).unwrap().f_vector(), vec![1, 1]);
        }
        assert_eq!(lens_complex(LensSpec::new(2, 2)), Err(LensError::OrderTooSmall(2)));
    }

    #[test]
    fn count_formulas() {
        for n in 3..=12u64 {
            let c2 = lens_count(LensSpec::new(n, 2)).unwrap();
            assert_eq!(c2.total as u64, 4 * n + 4);
            assert_eq!(c2.top as u64, n);
        }
        for n in 3..=6u64 {
            let c3 = lens_count(LensSpec::new(n, 3)).unwrap();
            assert_eq!(c3.total as u64, 8 * n * n + 12 * n + 6);
            assert_eq!(c3.top as u64, n * n);
        }
    }

    #[test]
    fn growth() {
        let ns: Vec<u64> = (3..=8).collect();
        assert!(growth_exponent(1, &ns, CountKind::Total).unwrap().abs() < 1e-12);
        assert!((growth_exponent(2, &ns, CountKind::Top).unwrap() - 1.0).abs() < 1e-12);
        assert!((growth_exponent(3, &ns, CountKind::Top).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rho_values() {
        assert!((rho_atiyah_bott(LensSpec::new(4, 2)).unwrap() - 2.0).abs() < 1e-12);
        for n in 3..=200u64 {
            let want = ((n - 1) * (n - 2)) as f64 / 3.0;
            let got = rho_atiyah_bott(LensSpec::new(n, 2)).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.max(1.0), "{n}");
        }
        for d in [1, 3, 5] {
            assert_eq!(rho_atiyah_bott(LensSpec::new(2, d)).unwrap(), 0.0);
            assert!(rho_atiyah_bott(LensSpec::new(17, d)).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn lower_bound() {
        assert_eq!(rho_lower_bound_check(LensSpec::new(4, 2)).unwrap(), BoundCheck::Holds);
        assert_eq!(rho_lower_bound_check(LensSpec::new(3, 2)).unwrap(), BoundCheck::OutOfHypothesis);
        assert_eq!(rho_lower_bound_check(LensSpec::new(9, 3)).unwrap(), BoundCheck::OutOfHypothesis);
        assert!((rho_lower_bound(LensSpec::new(4, 2)) - 1.6211).abs() < 1e-4);
        assert_eq!(complexity_lower_bound(LensSpec::new(5, 3), 2.0), 50.0);
    }

    #[test]
    fn counting() {
        assert_eq!(invariant_count(5, 7), Ok(2));
        assert_eq!(invariant_count(6, 7), Ok(3));
        assert_eq!(invariant_count(6, 5), Ok(2));
        assert_eq!(divisor_count(6), 4);
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(36), 9);
        assert_eq!(homotopy_invariant_count(6, 7), Ok(3));
        assert_eq!(invariant_count(6, 8), Err(LensError::EvenDimension(8)));
    }
}
