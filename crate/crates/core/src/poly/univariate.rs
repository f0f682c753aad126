//! Dense univariate polynomials over the rationals with Sturm-sequence real
//! root isolation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

/// Coefficients in ascending order with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        UniPoly::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        UniPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        UniPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let z = Rational::zero();
        UniPoly::new(
            (0..len)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) + other.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let c = rem.last().unwrap() / &lc;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &c * d;
            }
            quot[k] = c;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    pub fn monic(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        self.scale(&self.leading().recip())
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None => false,
            Some(0) => true,
            Some(_) => self.gcd(&self.derivative()).degree() == Some(0),
        }
    }

    /// Integer coefficients with unit content and positive leading term.
    pub fn primitive(&self) -> UniPoly {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let den = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        let mut g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if ints.last().is_some_and(Signed::is_negative) {
            g = -g;
        }
        UniPoly::new(ints.into_iter().map(|c| Rational::from_integer(c / &g)).collect())
    }

    /// Number of leading zero coefficients stripped: returns `(k, q)` with
    /// `self = x^k q` and `q(0) != 0`.
    pub fn split_zero_root(&self) -> (usize, UniPoly) {
        let k = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        (k, UniPoly::new(self.coeffs[k.min(self.coeffs.len())..].to_vec()))
    }

    /// `x^d p(1/x)` for `d = deg p`.
    pub fn reversed(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().rev().cloned().collect())
    }

    /// The Sturm chain `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq
    }

    /// Upper bound on the absolute value of all real roots (Cauchy).
    pub fn root_bound(&self) -> Rational {
        let lc = self.leading().abs();
        let n = self.coeffs.len();
        let max = self.coeffs[..n.saturating_sub(1)]
            .iter()
            .map(|c| c.abs() / &lc)
            .max()
            .unwrap_or_else(Rational::zero);
        max + Rational::one()
    }

    /// Disjoint isolating intervals `[a, b]` for all distinct real roots, in
    /// increasing order. An interval with `a == b` is an exact rational root.
    pub fn isolate_real_roots(&self) -> Vec<(Rational, Rational)> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let g = self.gcd(&self.derivative());
        let sqfree = if g.degree() == Some(0) { self.clone() } else { self.div_rem(&g).0 };
        let seq = sqfree.sturm_sequence();
        let bound = sqfree.root_bound();
        let mut out = Vec::new();
        let mut stack = vec![(-bound.clone(), bound)];
        while let Some((a, b)) = stack.pop() {
            // roots in (a, b]
            let count = sign_changes(&seq, &a) - sign_changes(&seq, &b);
            if count == 0 {
                continue;
            }
            if count == 1 {
                if sqfree.eval(&b).is_zero() {
                    out.push((b.clone(), b));
                } else {
                    out.push((a, b));
                }
                continue;
            }
            let mid = (&a + &b) / Rational::from_integer(2.into());
            stack.push((mid.clone(), b));
            stack.push((a, mid));
        }
        out.sort();
        out
    }

    /// Real roots refined by bisection to width below `tol`, as floats.
    pub fn real_roots(&self, tol: f64) -> Vec<f64> {
        let sqfree = {
            let g = self.gcd(&self.derivative());
            if g.degree() == Some(0) || self.is_zero() { self.clone() } else { self.div_rem(&g).0 }
        };
        let tol_q = Rational::from_float(tol).unwrap_or_else(|| Rational::new(1.into(), BigInt::from(10).pow(12)));
        self.isolate_real_roots()
            .into_iter()
            .map(|(mut a, mut b)| {
                if a == b {
                    return a.to_f64().unwrap_or(f64::NAN);
                }
                let sb = sqfree.eval(&b).signum();
                while &b - &a > tol_q {
                    let mid = (&a + &b) / Rational::from_integer(2.into());
                    let sm = sqfree.eval(&mid);
                    if sm.is_zero() {
                        return mid.to_f64().unwrap_or(f64::NAN);
                    }
                    if sm.signum() == sb {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                ((&a + &b) / Rational::from_integer(2.into())).to_f64().unwrap_or(f64::NAN)
            })
            .collect()
    }
}

fn sign_changes(seq: &[UniPoly], x: &Rational) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| {
            let v = p.eval(x);
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{k}"),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn isolates_simple_roots() {
        // (x - 1)(x + 2)(2x - 1)
        let p = UniPoly::from_i64(&[-1, 1]).mul(&UniPoly::from_i64(&[2, 1])).mul(&UniPoly::from_i64(&[-1, 2]));
        let roots = p.real_roots(1e-12);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-2.0, 0.5, 1.0]) {
            assert!((r - e).abs() < 1e-9, "{r} vs {e}");
        }
    }

    #[test]
    fn no_real_roots() {
        assert!(UniPoly::from_i64(&[1, 0, 1]).isolate_real_roots().is_empty());
    }

    #[test]
    fn repeated_roots_counted_once() {
        let p = UniPoly::from_i64(&[-1, 1]).mul(&UniPoly::from_i64(&[-1, 1]));
        assert!(!p.is_squarefree());
        assert_eq!(p.real_roots(1e-10).len(), 1);
    }

    #[test]
    fn irrational_roots() {
        let roots = UniPoly::from_i64(&[-2, 0, 1]).real_roots(1e-13);
        assert!((roots[1] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn division_identity() {
        let a = UniPoly::from_i64(&[3, -1, 4, 1, -5]);
        let b = UniPoly::from_i64(&[2, 0, 3]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    proptest! {
        #[test]
        fn root_count_matches_factored_form(roots in prop::collection::btree_set(-20i64..20, 1..6)) {
            let p = roots.iter().fold(UniPoly::from_i64(&[1]), |acc, &r| acc.mul(&UniPoly::from_i64(&[-r, 1])));
            let found = p.real_roots(1e-12);
            prop_assert_eq!(found.len(), roots.len());
            for (f, r) in found.iter().zip(roots.iter()) {
                prop_assert!((f - *r as f64).abs() < 1e-9);
            }
        }
    }
}
