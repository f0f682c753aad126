//! Euler characteristics of line bundles on `(P^1)^(n-2) x P^3` and the
//! arithmetic genus of the complete-intersection curve cut by the `n`
//! divisors, via the Koszul resolution of its structure sheaf.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::chow;

/// `chi(O_{P^3}(d)) = (d+1)(d+2)(d+3)/6`.
fn chi_p3(d: i64) -> BigInt {
    BigInt::from((d + 1) * (d + 2) * (d + 3)) / 6
}

/// Euler characteristic of `O(d_1, ..., d_{n-2}; d_{n-1})`, the last twist
/// on the `P^3` factor, as a Künneth product.
pub fn chi_line_bundle(degs: &[i64]) -> BigInt {
    let (tau, sigma) = degs.split_last().expect("at least the P^3 twist");
    sigma
        .iter()
        .fold(chi_p3(*tau), |acc, &d| acc * BigInt::from(d + 1))
}

/// Multidegree of `D_i`.
pub fn divisor_multidegree(n: usize, i: usize) -> Vec<i64> {
    let mut d = vec![1i64; n - 1];
    if i <= n - 2 {
        d[i - 1] = 0;
    } else {
        d[n - 2] = 2;
    }
    d
}

/// Twist of `O(-sum_{i in S} D_i)`.
pub fn divisor_sum_bundle(n: usize, subset: &[usize]) -> Vec<i64> {
    assert!(!subset.is_empty(), "subset must be nonempty");
    let mut out = vec![0i64; n - 1];
    for &i in subset {
        for (o, d) in out.iter_mut().zip(divisor_multidegree(n, i)) {
            *o -= d;
        }
    }
    out
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n + 1 - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// `chi_k` by enumerating every `k`-subset of the divisors.
pub fn chi_k_enumerated(n: usize, k: usize) -> BigInt {
    k_subsets(n, k)
        .iter()
        .map(|s| chi_line_bundle(&divisor_sum_bundle(n, s)))
        .sum()
}

fn ipow(base: i64, e: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), e)
}

/// `chi_k` grouped by how many of the `k` divisors come from the independent
/// players (`a`) and how many from the edge pair (`b = k - a`).
///
/// For such a subset, a sigma block whose own divisor is in the subset
/// carries twist `1 - k`, every other sigma block carries `-k`, and the
/// `P^3` factor carries `-(a + 2b)`.
pub fn chi_k_orbits(n: usize, k: usize) -> BigInt {
    let m = n - 2;
    let mut total = BigInt::zero();
    for b in 0..=2usize.min(k) {
        let a = k - b;
        if a > m {
            continue;
        }
        let mult = binomial(BigInt::from(m), BigInt::from(a)) * binomial(BigInt::from(2), BigInt::from(b));
        let kk = k as i64;
        let value = ipow(2 - kk, a) * ipow(1 - kk, m - a) * chi_p3(-((a + 2 * b) as i64));
        total += mult * value;
    }
    total
}

pub fn chi_k(n: usize, k: usize) -> BigInt {
    chi_k_orbits(n, k)
}

/// `chi(O_C) = 1 + sum_k (-1)^k chi_k`.
pub fn euler_characteristic(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| {
        if k % 2 == 0 {
            acc + chi_k(n, k)
        } else {
            acc - chi_k(n, k)
        }
    })
}

pub fn arithmetic_genus(n: usize) -> BigInt {
    BigInt::one() - euler_characteristic(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveInvariants {
    pub n: usize,
    #[serde(serialize_with = "ser_big")]
    pub degree: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub genus: BigInt,
    #[serde(rename = "eulerChar", serialize_with = "ser_big")]
    pub euler_char: BigInt,
}

fn ser_big<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

pub fn curve_invariants(n: usize) -> CurveInvariants {
    let euler_char = euler_characteristic(n);
    CurveInvariants {
        n,
        degree: chow::curve_degree(n),
        genus: BigInt::one() - &euler_char,
        euler_char,
    }
}

/// One row per `n = 2..=n_max`, in increasing `n`.
pub fn invariants_table(n_max: usize) -> Vec<CurveInvariants> {
    (2..=n_max.max(2)).into_par_iter().map(curve_invariants).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn line_bundle_examples() {
        assert_eq!(chi_line_bundle(&[0, 0, 0]), b(1));
        for n in 3..=8 {
            let mut degs = vec![-2; n - 2];
            degs.push(-4);
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(chi_line_bundle(&degs), b(sign));
        }
        assert_eq!(chi_line_bundle(&[-2, -3, -5]), b(-8));
    }

    #[test]
    fn divisor_sum_examples() {
        assert_eq!(divisor_sum_bundle(4, &[3, 4]), vec![-2, -2, -4]);
        assert_eq!(divisor_sum_bundle(4, &[1]), vec![0, -1, -1]);
        assert_eq!(divisor_sum_bundle(3, &[1, 2, 3]), vec![-2, -5]);
    }

    #[test]
    fn chi_k_examples() {
        for n in 3..=12 {
            assert_eq!(chi_k(n, 1), b(0));
            assert_eq!(chi_k(n, 2), b(if n % 2 == 1 { 1 } else { -1 }));
        }
        assert_eq!(chi_k(4, 3), b(-18));
        assert_eq!(chi_k(4, 4), b(-40));
    }

    #[test]
    fn orbit_grouping_matches_enumeration() {
        for n in 2..=12 {
            for k in 1..=n {
                assert_eq!(chi_k_enumerated(n, k), chi_k_orbits(n, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn genus_examples() {
        assert_eq!(euler_characteristic(3), b(-2));
        assert_eq!(euler_characteristic(2), b(0));
        assert_eq!(euler_characteristic(5), b(-174));
        assert_eq!(arithmetic_genus(7), b(13491));
        assert_eq!(arithmetic_genus(9), b(1494879));
    }

    #[test]
    fn vanishing_factors() {
        assert!(chi_line_bundle(&[-1, 4, 2]).is_zero());
        for t in [-1, -2, -3] {
            assert!(chi_line_bundle(&[3, 5, t]).is_zero());
        }
    }

    #[test]
    fn table_rows() {
        let t = invariants_table(2);
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].n, t[0].genus.clone(), t[0].degree.clone()), (2, b(1), b(4)));
        let t = invariants_table(12);
        assert!(t.windows(2).all(|w| w[0].degree < w[1].degree && w[0].genus < w[1].genus));
        for row in &t {
            assert_eq!(b(2) * &row.genus - 2, chow::canonical_degree(row.n));
            assert_eq!(row.euler_char, b(1) - &row.genus);
        }
    }
}
