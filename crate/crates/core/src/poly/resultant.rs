//! Sylvester resultants and determinants of polynomial matrices.

use super::{MultiPoly, VarId};

/// Sylvester matrix of `f` and `g` as polynomials in `v` with declared
/// formal degrees `df >= deg_v f` and `dg >= deg_v g`.
pub fn sylvester_matrix(f: &MultiPoly, g: &MultiPoly, v: VarId, df: u32, dg: u32) -> Vec<Vec<MultiPoly>> {
    assert!(f.degree_in(v) <= df && g.degree_in(v) <= dg, "formal degree below actual degree");
    let size = (df + dg) as usize;
    let fc: Vec<MultiPoly> = (0..=df).rev().map(|k| f.coeff_of_power(v, k)).collect();
    let gc: Vec<MultiPoly> = (0..=dg).rev().map(|k| g.coeff_of_power(v, k)).collect();
    let mut rows = Vec::with_capacity(size);
    for shift in 0..dg as usize {
        let mut row = vec![MultiPoly::zero(); size];
        for (k, c) in fc.iter().enumerate() {
            row[shift + k] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..df as usize {
        let mut row = vec![MultiPoly::zero(); size];
        for (k, c) in gc.iter().enumerate() {
            row[shift + k] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant of `f` and `g` with respect to `v` at the given formal degrees.
pub fn resultant(f: &MultiPoly, g: &MultiPoly, v: VarId, df: u32, dg: u32) -> MultiPoly {
    if df + dg == 0 {
        return MultiPoly::one();
    }
    determinant(sylvester_matrix(f, g, v, df, dg))
}

/// Determinant by fraction-free (Bareiss) elimination; every division is
/// exact in the polynomial ring.
pub fn determinant(mut m: Vec<Vec<MultiPoly>>) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::one();
    }
    let mut sign_flip = false;
    let mut prev = MultiPoly::one();
    for k in 0..n - 1 {
        let pivot_row = (k..n)
            .filter(|&r| !m[r][k].is_zero())
            .min_by_key(|&r| m[r][k].len());
        let Some(p) = pivot_row else {
            return MultiPoly::zero();
        };
        if p != k {
            m.swap(p, k);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .expect("Bareiss step division must be exact");
            }
            m[i][k] = MultiPoly::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign_flip {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Rational;

    fn x() -> MultiPoly {
        MultiPoly::var(VarId::affine(1))
    }
    fn y() -> MultiPoly {
        MultiPoly::var(VarId::affine(2))
    }

    #[test]
    fn resultant_of_linear_forms() {
        // res_x(x - y, x + y - 2) = (1)(-y... ) -> root x = y substituted: 2y - 2
        let f = &x() - &y();
        let g = &(&x() + &y()) - &MultiPoly::integer(2);
        let r = resultant(&f, &g, VarId::affine(1), 1, 1);
        let expected = &y().scale(&Rational::from_integer(2.into())) - &MultiPoly::integer(2);
        assert!(r.proportional(&expected).is_some());
    }

    #[test]
    fn resultant_detects_common_root() {
        // x^2 - 1 and x - y: resultant y^2 - 1
        let f = &x().pow(2) - &MultiPoly::one();
        let g = &x() - &y();
        let r = resultant(&f, &g, VarId::affine(1), 2, 1);
        assert_eq!(r, &y().pow(2) - &MultiPoly::one());
    }

    #[test]
    fn determinant_matches_expansion() {
        let m = vec![
            vec![x(), y(), MultiPoly::integer(1)],
            vec![MultiPoly::integer(0), x(), y()],
            vec![y(), MultiPoly::integer(0), x()],
        ];
        // x*(x*x - 0) - y*(0 - y*y) + 1*(0 - x*y)
        let expected = &(&x().pow(3) + &y().pow(3)) - &(&x() * &y());
        assert_eq!(determinant(m), expected);
    }

    #[test]
    fn singular_matrix() {
        let m = vec![vec![x(), y()], vec![x().scale(&Rational::from_integer(2.into())), y().scale(&Rational::from_integer(2.into()))]];
        assert!(determinant(m).is_zero());
    }
}
