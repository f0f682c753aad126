//! The Chow ring `Z[x_1, ..., x_{n-1}] / (x_1^2, ..., x_{n-2}^2, x_{n-1}^4)`
//! of `(P^1)^(n-2) x P^3`, stored densely.
//!
//! A monomial `x_1^{e_1} ... x_{n-2}^{e_{n-2}} x_{n-1}^e` is stored at index
//! `e * 2^(n-2) + bits`, where bit `k-1` of `bits` is `e_k`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChowClass {
    n: usize,
    coeffs: Vec<BigInt>,
}

impl ChowClass {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 2, "the Chow ring needs at least two players");
        ChowClass { n, coeffs: vec![BigInt::zero(); 4 << (n - 2)] }
    }

    pub fn one(n: usize) -> Self {
        let mut c = ChowClass::zero(n);
        c.coeffs[0] = BigInt::one();
        c
    }

    /// The generator `x_k`, `1 <= k <= n-1`.
    pub fn x(n: usize, k: usize) -> Self {
        assert!((1..n).contains(&k), "generator index out of range");
        let mut c = ChowClass::zero(n);
        let idx = if k == n - 1 { 1 << (n - 2) } else { 1 << (k - 1) };
        c.coeffs[idx] = BigInt::one();
        c
    }

    /// `sum_k c_k x_k` from integer coefficients `c_1..c_{n-1}`.
    pub fn linear(n: usize, coeffs: &[i64]) -> Self {
        assert_eq!(coeffs.len(), n - 1);
        let mut out = ChowClass::zero(n);
        for (k, &c) in coeffs.iter().enumerate() {
            out = out.add(&ChowClass::x(n, k + 1).scale(c));
        }
        out
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn sigma_blocks(&self) -> usize {
        self.n - 2
    }

    /// Coefficient of the monomial with the given exponent vector
    /// `(e_1, ..., e_{n-1})`; exponents beyond the caps give zero.
    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        let m = self.sigma_blocks();
        assert_eq!(exps.len(), m + 1);
        if exps[..m].iter().any(|&e| e > 1) || exps[m] > 3 {
            return BigInt::zero();
        }
        let bits: usize = exps[..m].iter().enumerate().map(|(k, &e)| (e as usize) << k).sum();
        self.coeffs[((exps[m] as usize) << m) + bits].clone()
    }

    /// Coefficient of the top class `x_1 ... x_{n-2} x_{n-1}^3`.
    pub fn top(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &ChowClass) -> ChowClass {
        assert_eq!(self.n, other.n);
        ChowClass {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: i64) -> ChowClass {
        let c = BigInt::from(c);
        ChowClass { n: self.n, coeffs: self.coeffs.iter().map(|a| a * &c).collect() }
    }

    pub fn mul(&self, other: &ChowClass) -> Result<ChowClass> {
        if self.n != other.n {
            return Err(Error::ChowMismatch(self.n, other.n));
        }
        let m = self.sigma_blocks();
        let mask = (1usize << m) - 1;
        let mut out = ChowClass::zero(self.n);
        let nz = |v: &[BigInt]| -> Vec<(usize, BigInt)> {
            v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect()
        };
        let (a, b) = (nz(&self.coeffs), nz(&other.coeffs));
        for (i, ca) in &a {
            for (j, cb) in &b {
                let (bi, bj) = (i & mask, j & mask);
                let e = (i >> m) + (j >> m);
                if bi & bj != 0 || e > 3 {
                    continue;
                }
                out.coeffs[(e << m) | bi | bj] += ca * cb;
            }
        }
        Ok(out)
    }

    pub fn product(n: usize, factors: &[ChowClass]) -> Result<ChowClass> {
        factors.iter().try_fold(ChowClass::one(n), |acc, f| acc.mul(f))
    }
}

impl fmt::Display for ChowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.sigma_blocks();
        let mut parts = Vec::new();
        for (idx, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mut vars: Vec<String> = (0..m).filter(|k| idx >> k & 1 == 1).map(|k| format!("x{}", k + 1)).collect();
            match idx >> m {
                0 => {}
                1 => vars.push(format!("x{}", self.n - 1)),
                e => vars.push(format!("x{}^{e}", self.n - 1)),
            }
            parts.push(match (vars.is_empty(), c.is_one()) {
                (true, _) => c.to_string(),
                (false, true) => vars.join("*"),
                (false, false) => format!("{c}*{}", vars.join("*")),
            });
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + ").replace("+ -", "- "))
        }
    }
}

/// Class of the divisor `V(F_i)`.
pub fn divisor_class(n: usize, i: usize) -> ChowClass {
    assert!((1..=n).contains(&i), "divisor index out of range");
    let mut coeffs = vec![1i64; n - 1];
    if i <= n - 2 {
        coeffs[i - 1] = 0;
    } else {
        coeffs[n - 2] = 2;
    }
    ChowClass::linear(n, &coeffs)
}

/// Hyperplane class pulled back along the Segre embedding.
pub fn hyperplane_class(n: usize) -> ChowClass {
    ChowClass::linear(n, &vec![1; n - 1])
}

/// `K_M + sum_i D_i`, the class whose restriction computes `2 p_a - 2`.
pub fn adjunction_class(n: usize) -> ChowClass {
    let mut coeffs = vec![n as i64 - 3; n - 1];
    coeffs[n - 2] = n as i64 - 2;
    ChowClass::linear(n, &coeffs)
}

fn curve_class(n: usize) -> ChowClass {
    let divisors: Vec<ChowClass> = (1..=n).map(|i| divisor_class(n, i)).collect();
    ChowClass::product(n, &divisors).expect("same ring")
}

pub fn curve_degree(n: usize) -> BigInt {
    curve_class(n).mul(&hyperplane_class(n)).expect("same ring").top()
}

pub fn canonical_degree(n: usize) -> BigInt {
    curve_class(n).mul(&adjunction_class(n)).expect("same ring").top()
}
