//! The linear maps sending a payoff tensor `X^(i)` to the coefficient
//! vector of `F_i`, their exact ranks, preimages, and the base loci of the
//! edge players' linear systems.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{Game, PayoffTensor, StrategyProfile};
use crate::poly::{Monomial, MultiPoly, Rational, VarId};
use crate::spohn::{ci_polynomial_from_tensor, coefficient_form_of};

/// Matrix of `X^(i) -> F_i` with rows indexed by the monomial basis of the
/// target space and columns by profiles in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapMatrix {
    pub players: usize,
    pub player: usize,
    pub rows: Vec<Monomial>,
    pub entries: Vec<Vec<Rational>>,
}

/// All monomials of the multidegree of `F_i`: degree one in every sigma
/// block except the player's own, and tau degree one (independent players)
/// or two (edge players).
pub fn monomial_basis(n: usize, player: usize) -> Vec<Monomial> {
    let blocks: Vec<usize> = (1..=n - 2).filter(|&l| l != player).collect();
    let tau_monos: Vec<Vec<VarId>> = if player <= n - 2 {
        VarId::taus().iter().map(|&t| vec![t]).collect()
    } else {
        let t = VarId::taus();
        (0..4).flat_map(|a| (a..4).map(move |b| vec![t[a], t[b]])).collect()
    };
    let mut out = Vec::new();
    for bits in 0..1usize << blocks.len() {
        let sig: Vec<VarId> = blocks
            .iter()
            .enumerate()
            .map(|(k, &l)| VarId::sigma(l, if bits >> k & 1 == 1 { 2 } else { 1 }))
            .collect();
        for t in &tau_monos {
            let mut vars = sig.clone();
            vars.extend_from_slice(t);
            out.push(Monomial::product(&vars));
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}

impl LinearMapMatrix {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        1 << self.players
    }

    pub fn apply(&self, tensor: &PayoffTensor) -> Vec<Rational> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(tensor.values()).map(|(a, x)| a * x).sum())
            .collect()
    }

    pub fn to_poly(&self, coeffs: &[Rational]) -> MultiPoly {
        MultiPoly::from_terms(self.rows.iter().cloned().zip(coeffs.iter().cloned()))
    }

    /// Coordinates of `poly` in the row basis, or the first monomial that
    /// lies outside it.
    pub fn coordinates(&self, poly: &MultiPoly) -> std::result::Result<Vec<Rational>, Monomial> {
        let index: HashMap<&Monomial, usize> = self.rows.iter().enumerate().map(|(k, m)| (m, k)).collect();
        let mut out = vec![Rational::zero(); self.rows.len()];
        for (m, c) in poly.terms() {
            match index.get(m) {
                Some(&k) => out[k] = c.clone(),
                None => return Err(m.clone()),
            }
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        exact_rank(&self.entries)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "players": self.players,
            "player": self.player,
            "rows": self.rows.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "columns": StrategyProfile::all(self.players).map(|p| p.label()).collect::<Vec<_>>(),
            "entries": self.entries.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

pub fn phi_matrix(n: usize, player: usize) -> Result<LinearMapMatrix> {
    if n < 3 {
        return Err(Error::Precondition("the payoff maps are defined for n >= 3".into()));
    }
    if player == 0 || player > n {
        return Err(Error::PlayerOutOfRange { index: player, players: n });
    }
    let rows = monomial_basis(n, player);
    let cols: Vec<MultiPoly> = (0..1usize << n)
        .into_par_iter()
        .map(|k| ci_polynomial_from_tensor(&PayoffTensor::unit(n, k), player))
        .collect::<Result<_>>()?;
    let entries = rows
        .iter()
        .map(|m| cols.iter().map(|f| f.coefficient(m)).collect())
        .collect();
    Ok(LinearMapMatrix { players: n, player, rows, entries })
}

/// Rank over the rationals by fraction-free elimination on the row-scaled
/// integer matrix.
pub fn exact_rank(m: &[Vec<Rational>]) -> usize {
    let rows: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let den = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&den / x.denom())).collect()
        })
        .collect();
    bareiss_rank(rows)
}

pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let v = &m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c];
                m[r][c] = v / &prev;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Solve `A x = b` by Gauss-Jordan elimination, trying pivot columns in
/// `column_order`; free variables are zero. `None` if inconsistent.
pub fn solve_linear(a: &[Vec<Rational>], b: &[Rational], column_order: &[usize]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in column_order {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (k, &c) in pivots.iter().enumerate() {
        x[c] = m[k][cols].clone();
    }
    Some(x)
}

/// Column order preferring profiles whose independent-player entries are
/// mostly 2, ties broken by descending canonical index.
pub fn preferred_columns(n: usize) -> Vec<usize> {
    let mut cols: Vec<usize> = (0..1usize << n).collect();
    let twos = |k: usize| {
        let p = StrategyProfile::from_index(n, k);
        (1..=n.saturating_sub(2)).filter(|&l| p.get(l) == 2).count()
    };
    cols.sort_by(|&a, &b| twos(b).cmp(&twos(a)).then(b.cmp(&a)));
    cols
}

/// Payoff tensor with `phi_i(X) = target`, or `NotInImage`.
pub fn preimage_tensor(map: &LinearMapMatrix, target: &MultiPoly) -> Result<PayoffTensor> {
    let n = map.players;
    let player = map.player;
    let b = map.coordinates(target).map_err(|m| Error::NotInImage {
        player,
        reason: format!("monomial {m} is not of the multidegree of F_{player}"),
    })?;
    match solve_linear(&map.entries, &b, &preferred_columns(n)) {
        Some(x) => PayoffTensor::new(n, x),
        None => {
            let reason = if player >= n - 1 {
                let form = coefficient_form_of(target, n, player);
                let bad: Vec<String> = form
                    .violations()
                    .iter()
                    .map(|&s| {
                        format!(
                            "D = B + C - A fails at sigma monomial {s}: D = {}, B + C - A = {}",
                            form.d[s],
                            &form.b[s] + &form.c[s] - &form.a[s]
                        )
                    })
                    .collect();
                if bad.is_empty() {
                    "linear system inconsistent".to_string()
                } else {
                    bad.join("; ")
                }
            } else {
                "linear system inconsistent".to_string()
            };
            Err(Error::NotInImage { player, reason })
        }
    }
}

/// A game whose CI polynomials are exactly `targets` (zero targets give
/// zero tensors).
pub fn solve_preimage(n: usize, targets: &[MultiPoly]) -> Result<Game> {
    if targets.len() != n {
        return Err(Error::Precondition(format!("expected {n} targets, got {}", targets.len())));
    }
    let tensors: Vec<PayoffTensor> = (1..=n)
        .into_par_iter()
        .map(|i| {
            if targets[i - 1].is_zero() {
                return Ok(PayoffTensor::zeros(n));
            }
            preimage_tensor(&phi_matrix(n, i)?, &targets[i - 1])
        })
        .collect::<Result<_>>()?;
    Game::from_tensors(tensors)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageDimension {
    pub n: usize,
    pub ranks: Vec<usize>,
    pub rows: Vec<usize>,
    pub image: usize,
    pub ambient: usize,
}

pub fn image_dimension(n: usize) -> Result<ImageDimension> {
    let maps: Vec<LinearMapMatrix> = (1..=n).into_par_iter().map(|i| phi_matrix(n, i)).collect::<Result<_>>()?;
    let ranks: Vec<usize> = maps.par_iter().map(LinearMapMatrix::rank).collect();
    let rows: Vec<usize> = maps.iter().map(LinearMapMatrix::row_count).collect();
    let image: usize = ranks.iter().sum();
    let ambient: usize = rows.iter().sum();
    let half = 1usize << (n - 1);
    if image != half * (n + 1) {
        return Err(Error::Assertion(format!("image dimension {image} differs from {}", half * (n + 1))));
    }
    if ambient != half * (n + 8) {
        return Err(Error::Assertion(format!("ambient dimension {ambient} differs from {}", half * (n + 8))));
    }
    Ok(ImageDimension { n, ranks, rows, image, ambient })
}

#[derive(Clone, Debug)]
pub struct BaseLocusLine {
    pub name: String,
    /// Two linear forms cutting out the line.
    pub forms: [MultiPoly; 2],
    /// `(t11, t12, t21, t22)` as linear forms in the parameters `x1, x2`.
    pub parametrization: [MultiPoly; 4],
}

#[derive(Clone, Debug)]
pub struct BaseLocusReport {
    pub players: usize,
    pub player: usize,
    pub generators: Vec<MultiPoly>,
    pub lines: Vec<BaseLocusLine>,
    /// `vanishes[l][g]`: generator `g` restricted to line `l` is zero.
    pub vanishes: Vec<Vec<bool>>,
    /// Every generator times every sigma monomial lies in the image of the map.
    pub generators_in_image: bool,
    pub witness: [Rational; 4],
    pub witness_values: Vec<Rational>,
}

impl BaseLocusReport {
    pub fn passed(&self) -> bool {
        self.vanishes.iter().flatten().all(|&v| v)
            && self.generators_in_image
            && self.witness_values.iter().any(|v| !v.is_zero())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "players": self.players,
            "player": self.player,
            "generators": self.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "lines": self.lines.iter().zip(&self.vanishes).map(|(l, v)| json!({
                "name": l.name,
                "equations": l.forms.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                "generatorsVanish": v,
            })).collect::<Vec<_>>(),
            "generatorsInImage": self.generators_in_image,
            "witness": self.witness.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "witnessValues": self.witness_values.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "passed": self.passed(),
        })
    }
}

fn tv(r: u8, c: u8) -> MultiPoly {
    MultiPoly::var(VarId::tau(r, c))
}

/// Quadrics spanning the tau part of the linear system of `F_i` for an
/// edge player, in the order of the A, B, C families.
pub fn base_locus_generators(n: usize, player: usize) -> Vec<MultiPoly> {
    if player == n - 1 {
        vec![
            &(&tv(1, 1) * &tv(2, 1)) - &(&tv(1, 2) * &tv(2, 2)),
            &tv(1, 2) * &(&tv(2, 1) + &tv(2, 2)),
            &tv(2, 2) * &(&tv(1, 1) + &tv(1, 2)),
        ]
    } else {
        vec![
            &(&tv(1, 1) * &tv(1, 2)) - &(&tv(2, 1) * &tv(2, 2)),
            &tv(2, 1) * &(&tv(1, 2) + &tv(2, 2)),
            &tv(2, 2) * &(&tv(1, 1) + &tv(2, 1)),
        ]
    }
}

pub fn base_locus_lines(n: usize, player: usize) -> Vec<BaseLocusLine> {
    let a = MultiPoly::var(VarId::affine(1));
    let b = MultiPoly::var(VarId::affine(2));
    let z = MultiPoly::zero;
    let line = |name: &str, forms: [MultiPoly; 2], parametrization: [MultiPoly; 4]| BaseLocusLine {
        name: name.to_string(),
        forms,
        parametrization,
    };
    if player == n - 1 {
        vec![
            line("L1", [tv(1, 1), tv(1, 2)], [z(), z(), a.clone(), b.clone()]),
            line("L2", [tv(2, 1), tv(2, 2)], [a.clone(), b.clone(), z(), z()]),
            line(
                "L3",
                [&tv(1, 1) + &tv(1, 2), &tv(2, 1) + &tv(2, 2)],
                [a.clone(), -&a, b.clone(), -&b],
            ),
        ]
    } else {
        vec![
            line("L1", [tv(1, 1), tv(2, 1)], [z(), a.clone(), z(), b.clone()]),
            line("L2", [tv(1, 2), tv(2, 2)], [a.clone(), z(), b.clone(), z()]),
            line(
                "L3",
                [&tv(1, 1) + &tv(2, 1), &tv(1, 2) + &tv(2, 2)],
                [a.clone(), b.clone(), -&a, -&b],
            ),
        ]
    }
}

pub fn base_locus_check(n: usize, player: usize) -> Result<BaseLocusReport> {
    if n < 3 {
        return Err(Error::Precondition("base loci are analysed for n >= 3".into()));
    }
    if player != n - 1 && player != n {
        return Err(Error::Precondition(format!("base loci concern players {} and {n}", n - 1)));
    }
    let generators = base_locus_generators(n, player);
    let lines = base_locus_lines(n, player);
    let vanishes = lines
        .iter()
        .map(|l| {
            let map: HashMap<VarId, MultiPoly> =
                VarId::taus().into_iter().zip(l.parametrization.iter().cloned()).collect();
            let forms_ok = l.forms.iter().all(|f| f.substitute(&map).is_zero());
            generators.iter().map(|g| forms_ok && g.substitute(&map).is_zero()).collect()
        })
        .collect();
    let map = phi_matrix(n, player)?;
    let sigma_monos: Vec<Monomial> = (0..1usize << (n - 2))
        .map(|s| {
            let p = StrategyProfile::from_index(n, s << 2);
            Monomial::product(&(1..=n - 2).map(|l| VarId::sigma(l, p.get(l))).collect::<Vec<_>>())
        })
        .collect();
    let generators_in_image = generators.iter().all(|g| {
        sigma_monos
            .iter()
            .all(|s| preimage_tensor(&map, &g.mul_monomial(s)).is_ok())
    });
    let witness = [1, 2, 3, 5].map(|v: i64| Rational::from_integer(v.into()));
    let point: HashMap<VarId, Rational> = VarId::taus().into_iter().zip(witness.iter().cloned()).collect();
    let witness_values = generators
        .iter()
        .map(|g| g.evaluate(&point))
        .collect::<Result<_>>()?;
    Ok(BaseLocusReport {
        players: n,
        player,
        generators,
        lines,
        vanishes,
        generators_in_image,
        witness,
        witness_values,
    })
}

/// Greatest absolute entry, for diagnostics.
pub fn max_abs_entry(m: &LinearMapMatrix) -> Rational {
    m.entries
        .iter()
        .flatten()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spohn::tests::paper_game;
    use crate::spohn::{ci_polynomial, ci_system};
    use proptest::prelude::*;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    #[test]
    fn matrix_shapes() {
        for n in 3..=5 {
            for i in 1..=n {
                let m = phi_matrix(n, i).unwrap();
                let rows = if i <= n - 2 { 1 << (n - 1) } else { 10 << (n - 2) };
                assert_eq!((m.row_count(), m.col_count()), (rows, 1 << n));
            }
        }
    }

    #[test]
    fn paper_first_player() {
        let game = paper_game();
        let m = phi_matrix(3, 1).unwrap();
        let v = m.apply(game.tensor(1).unwrap());
        // rows sorted t11, t12, t21, t22
        assert_eq!(v, vec![q(6), q(-5), q(-2), q(7)]);
        assert!(m.apply(&PayoffTensor::zeros(3)).iter().all(Zero::is_zero));
    }

    #[test]
    fn identity_rank() {
        let id: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| q((i == j) as i64)).collect()).collect();
        assert_eq!(exact_rank(&id), 4);
        assert_eq!(exact_rank(&[vec![q(1), q(2)], vec![q(2), q(4)]]), 1);
    }

    #[test]
    fn ranks_for_three_players() {
        assert_eq!(phi_matrix(3, 1).unwrap().rank(), 4);
        assert_eq!(phi_matrix(3, 2).unwrap().rank(), 6);
        assert_eq!(phi_matrix(3, 3).unwrap().rank(), 6);
    }

    #[test]
    fn image_dimensions() {
        for (n, image, ambient) in [(3, 16, 44), (4, 40, 96), (5, 96, 208)] {
            let d = image_dimension(n).unwrap();
            assert_eq!((d.image, d.ambient), (image, ambient));
        }
    }

    #[test]
    fn ranks_up_to_six() {
        for n in 3..=6 {
            for i in 1..=n {
                let expected = if i <= n - 2 { 1 << (n - 1) } else { 3 << (n - 2) };
                assert_eq!(phi_matrix(n, i).unwrap().rank(), expected, "n={n} i={i}");
            }
        }
    }

    #[test]
    fn image_satisfies_relation() {
        let m = phi_matrix(3, 2).unwrap();
        for k in 0..8 {
            let f = m.to_poly(&m.apply(&PayoffTensor::unit(3, k)));
            assert!(coefficient_form_of(&f, 3, 2).relation_holds());
        }
        // relation count equals the rank deficit
        for n in 3..=5 {
            let m = phi_matrix(n, n - 1).unwrap();
            assert_eq!(m.row_count() - m.rank(), (10 << (n - 2)) - (3 << (n - 2)));
        }
    }

    #[test]
    fn preimage_rejects_relation_violation() {
        let mut target = ci_polynomial(&paper_game(), 3).unwrap();
        target.add_term(Monomial::product(&[VarId::sigma(1, 1), VarId::tau(2, 1), VarId::tau(2, 2)]), q(1));
        match solve_preimage(3, &[MultiPoly::zero(), MultiPoly::zero(), target]) {
            Err(Error::NotInImage { player: 3, reason }) => assert!(reason.contains("D = B + C - A")),
            other => panic!("expected NotInImage, got {other:?}"),
        }
    }

    #[test]
    fn preimage_round_trip_paper() {
        let sys = ci_system(&paper_game());
        let g = solve_preimage(3, &sys.polys).unwrap();
        assert_eq!(ci_system(&g).polys, sys.polys);
    }

    #[test]
    fn base_locus() {
        for n in [3, 4] {
            for i in [n - 1, n] {
                let r = base_locus_check(n, i).unwrap();
                assert!(r.passed(), "n={n} i={i}");
            }
        }
        let r = base_locus_check(3, 2).unwrap();
        assert_eq!(r.witness_values[0], q(-7));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn matrix_matches_constructor(seed in 0u64..1000, n in 3usize..=5) {
            let game = Game::random(n, seed, 12);
            for i in 1..=n {
                let m = phi_matrix(n, i).unwrap();
                let f = ci_polynomial(&game, i).unwrap();
                prop_assert_eq!(m.to_poly(&m.apply(game.tensor(i).unwrap())), f);
            }
        }

        #[test]
        fn preimage_round_trip(seed in 0u64..1000, n in 3usize..=4) {
            let sys = ci_system(&Game::random(n, seed, 12));
            let g = solve_preimage(n, &sys.polys).unwrap();
            prop_assert_eq!(ci_system(&g).polys, sys.polys);
        }
    }
}
