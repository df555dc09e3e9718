use rayon::prelude::*;
use rational_core::{bracket, BigRational, ReducedRational, RoughSieve};
use serde::{Deserialize, Serialize};

use crate::sets::{build_n, check_alpha};
use crate::union::IntervalUnion;
use crate::{Error, Result};

fn zero() -> BigRational {
    BigRational::from_integer(0.into())
}

/// (sum_j P_T(E_j))^2 / sum_{i,j} P_T(E_i ∩ E_j), with every set clipped to [0, T].
pub fn second_moment_lb(sets: &[IntervalUnion], t: &BigRational) -> Result<BigRational> {
    if sets.is_empty() {
        return Err(Error::Input("second_moment_lb needs at least one set".into()));
    }
    let clipped = sets.iter().map(|s| s.clip(&zero(), t)).collect::<Result<Vec<_>>>()?;
    let single = clipped.iter().map(|s| s.measure_pt(t)).collect::<Result<Vec<_>>>()?;
    let first: BigRational = single.iter().fold(zero(), |a, b| a + b);
    let mut second = zero();
    for (i, a) in clipped.iter().enumerate() {
        second += &single[i];
        for b in &clipped[i + 1..] {
            second += a.intersect(b)?.measure_pt(t)? * BigRational::from_integer(2.into());
        }
    }
    if second == zero() {
        return Ok(zero());
    }
    Ok(&first * &first / second)
}

/// Brute-force probe for m alpha = n beta with m, n <= bound and P^-(m) > alpha.
/// Returns true when no such solution exists.
pub fn check_no_diagonal(alpha: &ReducedRational, beta: &ReducedRational, bound: u64) -> Result<bool> {
    if alpha <= beta || *beta < ReducedRational::one() {
        return Err(Error::Domain("need alpha > beta >= 1".into()));
    }
    let ratio = alpha.div(beta);
    if ratio.is_integer() {
        return Err(Error::Domain(format!("alpha/beta = {ratio} is an integer")));
    }
    if bracket(alpha, beta) > ratio {
        return Err(Error::Domain(format!("[alpha, beta] = {} exceeds alpha/beta = {ratio}", bracket(alpha, beta))));
    }
    let (s, t) = match (ratio.num_u64(), ratio.den_u64()) {
        (Some(s), Some(t)) => (s as u128, t as u128),
        _ => return Err(Error::Overflow("ratio".into())),
    };
    let sieve = RoughSieve::new(rational_core::floor_u64(&alpha.to_big_rational()), bound);
    // m s = n t forces t | m
    let mut m = t;
    while m <= bound as u128 {
        let n = m * s / t;
        if n <= bound as u128 && sieve.is_rough(m as u64) {
            return Ok(false);
        }
        m += t;
    }
    Ok(true)
}

/// Union measure, summed measures, the second-moment bound and all pairwise overlaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionReport {
    pub elements: Vec<ReducedRational>,
    #[serde(rename = "T", with = "rational_core::serde_rational")]
    pub t: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub union_measure: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub sum_measures: BigRational,
    #[serde(with = "rational_core::serde_rational")]
    pub second_moment_lb: BigRational,
    /// Row-major P_T(N_i ∩ N_j); the diagonal holds P_T(N_i).
    pub overlap_matrix: Vec<Vec<String>>,
}

/// Evaluates P_T of the union of N_alpha over the given family.
pub fn union_experiment(elements: &[ReducedRational], t: &BigRational) -> Result<UnionReport> {
    for a in elements {
        check_alpha(a)?;
    }
    let sets = elements.par_iter().map(|a| build_n(a, t)?.clip(&zero(), t)).collect::<Result<Vec<_>>>()?;
    let k = sets.len();
    let cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let vals = cells
        .par_iter()
        .map(|&(i, j)| if i == j { sets[i].measure_pt(t) } else { sets[i].intersect(&sets[j])?.measure_pt(t) })
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = vec![vec![zero(); k]; k];
    for (&(i, j), v) in cells.iter().zip(vals) {
        matrix[i][j] = v.clone();
        matrix[j][i] = v;
    }
    let sum_measures = (0..k).fold(zero(), |a, i| a + &matrix[i][i]);
    let second: BigRational = matrix.iter().flatten().fold(zero(), |a, b| a + b);
    let lb = if second == zero() { zero() } else { &sum_measures * &sum_measures / second };
    let union_measure = IntervalUnion::union_all(&sets)?.measure_pt(t)?;
    Ok(UnionReport {
        elements: elements.to_vec(),
        t: t.clone(),
        union_measure,
        sum_measures,
        second_moment_lb: lb,
        overlap_matrix: matrix.iter().map(|row| row.iter().map(rational_core::fmt_rational).collect()).collect(),
    })
}
