//! Spohn matrices, Nash polynomials and the defining polynomials of the
//! one-edge CI curve.
//!
//! Players `1..=n-2` are independent and carry the sigma blocks; the last two
//! players are joined by the edge and share the `tau` block, so a joint
//! distribution on the model is `p_j = sigma^(1)_{j_1} ... sigma^(n-2)_{j_{n-2}} tau_{j_{n-1} j_n}`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{Game, PayoffTensor, StrategyProfile};
use crate::poly::{Monomial, MultiPoly, Rational, VarId};

/// The 2x2 matrix of linear forms in the `p` coordinates attached to one
/// player: row `k` holds the marginal `sum_{j_i = k} p_j` and the
/// conditional payoff sum `sum_{j_i = k} X^(i)_j p_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpohnMatrix {
    pub player: usize,
    pub entries: [[MultiPoly; 2]; 2],
}

impl SpohnMatrix {
    /// `row1 * col2 - row2 * col1`, i.e. `a d - b c`.
    pub fn determinant(&self) -> MultiPoly {
        let [[a, b], [c, d]] = &self.entries;
        &(a * d) - &(b * c)
    }

    pub fn evaluate(&self, p: &HashMap<VarId, Rational>) -> Result<[[Rational; 2]; 2]> {
        let e = &self.entries;
        Ok([
            [e[0][0].evaluate(p)?, e[0][1].evaluate(p)?],
            [e[1][0].evaluate(p)?, e[1][1].evaluate(p)?],
        ])
    }
}

pub fn spohn_matrix(game: &Game, player: usize) -> Result<SpohnMatrix> {
    game.check_player(player)?;
    let n = game.players();
    let tensor = game.tensor(player)?;
    let mut entries: [[MultiPoly; 2]; 2] = Default::default();
    for profile in StrategyProfile::all(n) {
        let row = (profile.get(player) - 1) as usize;
        let v = VarId::p(n, profile.index());
        entries[row][0].add_term(Monomial::var(v), Rational::from_integer(1.into()));
        entries[row][1].add_term(Monomial::var(v), tensor.at(&profile).clone());
    }
    Ok(SpohnMatrix { player, entries })
}

/// Uniform assignment `p_j = 1 / 2^n` for all profiles.
pub fn uniform_point(n: usize) -> HashMap<VarId, Rational> {
    let w = Rational::new(1.into(), (1u64 << n).into());
    (0..1usize << n).map(|k| (VarId::p(n, k), w.clone())).collect()
}

/// Segre monomial of a profile: `prod_l sigma^(l)_{j_l} * tau_{j_{n-1} j_n}`.
/// For two players this is just `tau_{j_1 j_2}`.
pub fn segre_monomial(profile: &StrategyProfile) -> Monomial {
    let n = profile.len();
    let e = profile.entries();
    let mut vars: Vec<VarId> = (0..n - 2).map(|l| VarId::sigma(l + 1, e[l])).collect();
    vars.push(VarId::tau(e[n - 2], e[n - 1]));
    Monomial::product(&vars)
}

/// Replace every `p` coordinate by its Segre monomial.
pub fn segre_substitute(p: &MultiPoly) -> MultiPoly {
    let map: HashMap<VarId, MultiPoly> = p
        .variables()
        .into_iter()
        .filter_map(|v| match v {
            VarId::P { players, index } => {
                let profile = StrategyProfile::from_index(players as usize, index as usize);
                Some((v, MultiPoly::term(Rational::from_integer(1.into()), segre_monomial(&profile))))
            }
            _ => None,
        })
        .collect();
    p.substitute(&map)
}

/// Multilinear Nash form of player `i` in the other players' mixed
/// strategies `u^(l)`, with coefficients `X^(i)_{..2..} - X^(i)_{..1..}`.
pub fn nash_polynomial(game: &Game, player: usize) -> Result<MultiPoly> {
    game.check_player(player)?;
    let n = game.players();
    let x = game.tensor(player)?;
    let mut out = MultiPoly::zero();
    for profile in StrategyProfile::all(n).filter(|p| p.get(player) == 2) {
        let diff = x.at(&profile) - x.at(&profile.with(player, 1));
        let vars: Vec<VarId> = (1..=n)
            .filter(|&l| l != player)
            .map(|l| VarId::nash(l, profile.get(l)))
            .collect();
        out.add_term(Monomial::product(&vars), diff);
    }
    Ok(out)
}

fn sigma_part(profile: &StrategyProfile, skip: Option<usize>) -> Vec<VarId> {
    let n = profile.len();
    (1..=n - 2)
        .filter(|&l| Some(l) != skip)
        .map(|l| VarId::sigma(l, profile.get(l)))
        .collect()
}

/// `F_i` built from the payoff tensor of player `i` alone.
pub fn ci_polynomial_from_tensor(tensor: &PayoffTensor, player: usize) -> Result<MultiPoly> {
    let n = tensor.players();
    if player == 0 || player > n {
        return Err(Error::PlayerOutOfRange { index: player, players: n });
    }
    if n == 2 {
        let mut game = Game::zero(2);
        game = game.with_tensor(player, tensor.clone())?;
        return Ok(spohn_matrix(&game, player)?.determinant());
    }
    if player <= n - 2 {
        let mut out = MultiPoly::zero();
        for profile in StrategyProfile::all(n).filter(|p| p.get(player) == 2) {
            let diff = tensor.at(&profile) - tensor.at(&profile.with(player, 1));
            let mut vars = sigma_part(&profile, Some(player));
            vars.push(VarId::tau(profile.get(n - 1), profile.get(n)));
            out.add_term(Monomial::product(&vars), diff);
        }
        return Ok(out);
    }
    // The edge players: expand det [[m_1, R_1], [m_2, R_2]] where m_k is the
    // tau-marginal of the k-th row and R_k the conditional payoff sum with
    // the independent players' sigma monomials attached.
    let (marg, slot) = if player == n - 1 {
        (
            [
                MultiPoly::var(VarId::tau(1, 1)) + MultiPoly::var(VarId::tau(1, 2)),
                MultiPoly::var(VarId::tau(2, 1)) + MultiPoly::var(VarId::tau(2, 2)),
            ],
            n - 1,
        )
    } else {
        (
            [
                MultiPoly::var(VarId::tau(1, 1)) + MultiPoly::var(VarId::tau(2, 1)),
                MultiPoly::var(VarId::tau(1, 2)) + MultiPoly::var(VarId::tau(2, 2)),
            ],
            n,
        )
    };
    let mut r = [MultiPoly::zero(), MultiPoly::zero()];
    for profile in StrategyProfile::all(n) {
        let k = (profile.get(slot) - 1) as usize;
        let mut vars = sigma_part(&profile, None);
        vars.push(VarId::tau(profile.get(n - 1), profile.get(n)));
        r[k].add_term(Monomial::product(&vars), tensor.at(&profile).clone());
    }
    Ok(&(&marg[0] * &r[1]) - &(&marg[1] * &r[0]))
}

pub fn ci_polynomial(game: &Game, player: usize) -> Result<MultiPoly> {
    game.check_player(player)?;
    ci_polynomial_from_tensor(game.tensor(player)?, player)
}

/// The CI system `F_1, ..., F_n` together with the players whose
/// polynomial vanishes identically.
#[derive(Clone, Debug)]
pub struct CiSystem {
    pub players: usize,
    pub polys: Vec<MultiPoly>,
    pub zero_players: Vec<usize>,
}

impl CiSystem {
    pub fn is_degenerate(&self) -> bool {
        !self.zero_players.is_empty()
    }

    /// Error out if some `F_i` is identically zero.
    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            return Err(Error::DegenerateGame(format!(
                "F_i vanishes identically for players {:?}",
                self.zero_players
            )));
        }
        Ok(())
    }

    pub fn dehomogenized(&self) -> Vec<MultiPoly> {
        self.polys.iter().map(MultiPoly::dehomogenize).collect()
    }
}

pub fn ci_system(game: &Game) -> CiSystem {
    let n = game.players();
    let polys: Vec<MultiPoly> = (1..=n)
        .into_par_iter()
        .map(|i| ci_polynomial(game, i).expect("player index in range"))
        .collect();
    let zero_players = polys
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_zero())
        .map(|(k, _)| k + 1)
        .collect();
    CiSystem { players: n, polys, zero_players }
}

/// Coefficients of `F_{n-1}` or `F_n` grouped by sigma monomial. Entry `s`
/// of each family belongs to the independent players' profile with
/// canonical index `s` among `{1,2}^(n-2)`.
///
/// For `F_{n-1}` the families multiply `t11 t21`, `t12 t21`, `t11 t22`,
/// `t12 t22`; for `F_n` they multiply `t11 t12`, `t12 t21`, `t11 t22`,
/// `t21 t22`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientForm {
    pub player: usize,
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    pub d: Vec<Rational>,
}

impl CoefficientForm {
    /// Tau monomials carrying the A, B, C, D families.
    pub fn tau_monomials(players: usize, player: usize) -> [[(u8, u8); 2]; 4] {
        if player == players - 1 {
            [[(1, 1), (2, 1)], [(1, 2), (2, 1)], [(1, 1), (2, 2)], [(1, 2), (2, 2)]]
        } else {
            [[(1, 1), (1, 2)], [(1, 2), (2, 1)], [(1, 1), (2, 2)], [(2, 1), (2, 2)]]
        }
    }

    /// Whether `D = B + C - A` holds for every sigma monomial.
    pub fn relation_holds(&self) -> bool {
        self.violations().is_empty()
    }

    /// Indices `s` at which `D_s != B_s + C_s - A_s`.
    pub fn violations(&self) -> Vec<usize> {
        (0..self.a.len())
            .filter(|&s| self.d[s] != &self.b[s] + &self.c[s] - &self.a[s])
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let f = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        json!({"player": self.player, "A": f(&self.a), "B": f(&self.b), "C": f(&self.c), "D": f(&self.d)})
    }
}

/// Read the A, B, C, D families off an arbitrary polynomial in the image
/// space of `F_{n-1}` or `F_n` (used to certify non-membership).
pub fn coefficient_form_of(poly: &MultiPoly, players: usize, player: usize) -> CoefficientForm {
    let n = players;
    let taus = CoefficientForm::tau_monomials(n, player);
    let count = 1usize << (n - 2);
    let mut fam: [Vec<Rational>; 4] = Default::default();
    for (slot, t) in taus.iter().enumerate() {
        for s in 0..count {
            let mut vars = if n > 2 {
                sigma_part(&StrategyProfile::from_index(n, s << 2), None)
            } else {
                Vec::new()
            };
            vars.push(VarId::tau(t[0].0, t[0].1));
            vars.push(VarId::tau(t[1].0, t[1].1));
            fam[slot].push(poly.coefficient(&Monomial::product(&vars)));
        }
    }
    let [a, b, c, d] = fam;
    CoefficientForm { player, a, b, c, d }
}

pub fn coefficient_form(game: &Game, player: usize) -> Result<CoefficientForm> {
    let n = game.players();
    if n < 3 {
        return Err(Error::Precondition("coefficient forms need at least three players".into()));
    }
    game.check_player(player)?;
    if player < n - 1 {
        return Err(Error::Precondition(format!(
            "coefficient forms exist only for players {} and {n}",
            n - 1
        )));
    }
    let form = coefficient_form_of(&ci_polynomial(game, player)?, n, player);
    if !form.relation_holds() {
        return Err(Error::Assertion("D = B + C - A violated by a constructed polynomial".into()));
    }
    Ok(form)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::poly::linear_form;
    use num_traits::Zero;
    use proptest::prelude::*;

    pub fn paper_game() -> Game {
        let labels = ["111", "121", "112", "122", "211", "221", "212", "222"];
        let rows: [[i64; 8]; 3] = [
            [0, 6, 11, 1, 6, 4, 6, 8],
            [12, 7, 6, 8, 10, 12, 8, 1],
            [11, 11, 3, 3, 0, 14, 2, 7],
        ];
        let payoffs: Vec<Vec<(StrategyProfile, Rational)>> = rows
            .iter()
            .map(|row| {
                labels
                    .iter()
                    .zip(row)
                    .map(|(l, &v)| (StrategyProfile::parse(l).unwrap(), Rational::from_integer(v.into())))
                    .collect()
            })
            .collect();
        Game::from_labeled(3, &payoffs).unwrap()
    }

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn s(k: u8) -> MultiPoly {
        MultiPoly::var(VarId::sigma(1, k))
    }

    fn t(r: u8, c: u8) -> MultiPoly {
        MultiPoly::var(VarId::tau(r, c))
    }

    fn lin(a: i64, b: i64) -> MultiPoly {
        linear_form(&[(a, VarId::sigma(1, 1)), (b, VarId::sigma(1, 2))])
    }

    pub fn printed_f2() -> MultiPoly {
        &(&(&(&lin(5, -2) * &(&t(1, 1) * &t(2, 1))) - &(&lin(1, 4) * &(&t(1, 2) * &t(2, 1))))
            + &(&lin(4, 9) * &(&t(1, 1) * &t(2, 2))))
            + &(&lin(-2, 7) * &(&t(1, 2) * &t(2, 2)))
    }

    pub fn printed_f3() -> MultiPoly {
        &(&(&(&lin(8, -2) * &(&t(1, 1) * &t(1, 2))) + &(&lin(8, 12) * &(&t(1, 2) * &t(2, 1))))
            + &(&lin(8, -7) * &(&t(1, 1) * &t(2, 2))))
            + &(&lin(8, 7) * &(&t(2, 1) * &t(2, 2)))
    }

    #[test]
    fn spohn_matrix_at_uniform_point() {
        let m = spohn_matrix(&paper_game(), 1).unwrap();
        let v = m.evaluate(&uniform_point(3)).unwrap();
        let r = |a: i64, b: i64| Rational::new(a.into(), b.into());
        assert_eq!(v, [[r(1, 2), r(9, 4)], [r(1, 2), r(3, 1)]]);
        assert_eq!(m.determinant().evaluate(&uniform_point(3)).unwrap(), r(3, 8));
    }

    #[test]
    fn constant_tensor_gives_zero_determinant() {
        let g = Game::zero(3).with_tensor(2, PayoffTensor::new(3, vec![q(5); 8]).unwrap()).unwrap();
        let m = spohn_matrix(&g, 2).unwrap();
        assert_eq!(m.entries[0][1], m.entries[0][0].scale(&q(5)));
        assert!(m.determinant().is_zero());
        let z = spohn_matrix(&Game::zero(3), 1).unwrap();
        assert!(z.entries[0][1].is_zero() && z.entries[1][1].is_zero());
    }

    #[test]
    fn nash_polynomial_examples() {
        let g1 = nash_polynomial(&paper_game(), 1).unwrap();
        let u = |p: usize, k: u8| VarId::nash(p, k);
        let expected = MultiPoly::from_terms([
            (Monomial::product(&[u(2, 1), u(3, 1)]), q(6)),
            (Monomial::product(&[u(2, 1), u(3, 2)]), q(-5)),
            (Monomial::product(&[u(2, 2), u(3, 1)]), q(-2)),
            (Monomial::product(&[u(2, 2), u(3, 2)]), q(7)),
        ]);
        assert_eq!(g1, expected);
        let constant = Game::zero(3).with_tensor(1, PayoffTensor::new(3, vec![q(3); 8]).unwrap()).unwrap();
        assert!(nash_polynomial(&constant, 1).unwrap().is_zero());
        let shift: Vec<Rational> = StrategyProfile::all(3).map(|p| q(p.get(2) as i64)).collect();
        let g = Game::zero(3).with_tensor(2, PayoffTensor::new(3, shift).unwrap()).unwrap();
        let g2 = nash_polynomial(&g, 2).unwrap();
        assert_eq!(g2.len(), 4);
        assert!(g2.terms().all(|(_, c)| *c == q(1)));
    }

    #[test]
    fn paper_equations() {
        let game = paper_game();
        let f1 = ci_polynomial(&game, 1).unwrap();
        let printed_f1 = linear_form(&[
            (6, VarId::tau(1, 1)),
            (-5, VarId::tau(1, 2)),
            (-2, VarId::tau(2, 1)),
            (7, VarId::tau(2, 2)),
        ]);
        assert_eq!(f1, printed_f1);
        let f2 = ci_polynomial(&game, 2).unwrap();
        assert_eq!(f2.proportional(&printed_f2()), Some(q(-1)));
        let f3 = ci_polynomial(&game, 3).unwrap();
        assert_eq!(f3.proportional(&printed_f3()), Some(q(-1)));
    }

    #[test]
    fn ci_system_block_degrees() {
        let sys = ci_system(&paper_game());
        let degs: Vec<Vec<u32>> = sys.polys.iter().map(|p| p.block_degree(3).unwrap().0).collect();
        assert_eq!(degs, vec![vec![0, 1], vec![1, 2], vec![1, 2]]);
        let sys4 = ci_system(&Game::random(4, 3, 10));
        let degs: Vec<Vec<u32>> = sys4.polys.iter().map(|p| p.block_degree(4).unwrap().0).collect();
        assert_eq!(degs, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 2], vec![1, 1, 2]]);
        let constant = Game::new(3, vec![vec![q(1); 8], vec![q(2); 8], vec![q(3); 8]]).unwrap();
        let sys = ci_system(&constant);
        assert!(sys.is_degenerate());
        assert_eq!(sys.zero_players, vec![1, 2, 3]);
    }

    #[test]
    fn two_player_system() {
        let sys = ci_system(&Game::random(2, 7, 5));
        assert_eq!(sys.polys.iter().filter(|p| !p.is_zero()).count(), 2);
        for p in &sys.polys {
            assert_eq!(p.block_degree(2).unwrap().0, vec![2]);
        }
    }

    #[test]
    fn coefficient_form_examples() {
        let form = coefficient_form(&paper_game(), 2).unwrap();
        assert_eq!(form.a[0], q(-5));
        assert!(form.relation_holds());
        let zero = coefficient_form(&Game::zero(3), 3).unwrap();
        assert!(zero.a.iter().chain(&zero.b).chain(&zero.c).chain(&zero.d).all(Zero::is_zero));
        assert!(matches!(coefficient_form(&paper_game(), 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn segre_examples() {
        let p111 = MultiPoly::var(VarId::p(4, 0));
        let expected = MultiPoly::term(
            q(1),
            Monomial::product(&[VarId::sigma(1, 1), VarId::sigma(2, 1), VarId::tau(1, 1)]),
        );
        assert_eq!(segre_substitute(&p111), expected);
        let total = MultiPoly::from_terms((0..8).map(|k| (Monomial::var(VarId::p(3, k)), q(1))));
        let expected = &(&s(1) + &s(2)) * &(&(&t(1, 1) + &t(1, 2)) + &(&t(2, 1) + &t(2, 2)));
        assert_eq!(segre_substitute(&total), expected);
    }

    /// The positive factor by which `det M_i` exceeds `F_i` on the model.
    pub fn marginal_factor(n: usize, i: usize) -> MultiPoly {
        let tau_sum = VarId::taus().iter().fold(MultiPoly::zero(), |acc, &v| &acc + &MultiPoly::var(v));
        let mut f = MultiPoly::one();
        for l in 1..=n - 2 {
            if l == i {
                f = &f * &(&MultiPoly::var(VarId::sigma(l, 1)) * &MultiPoly::var(VarId::sigma(l, 2)));
            } else {
                f = &f * &(&MultiPoly::var(VarId::sigma(l, 1)) + &MultiPoly::var(VarId::sigma(l, 2)));
            }
        }
        if i <= n - 2 {
            f = &f * &tau_sum;
        }
        f
    }

    #[test]
    fn determinant_factors_through_ci_polynomial() {
        let game = paper_game();
        for i in 1..=3 {
            let det = segre_substitute(&spohn_matrix(&game, i).unwrap().determinant());
            let f = ci_polynomial(&game, i).unwrap();
            assert_eq!(det, &marginal_factor(3, i) * &f, "player {i}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn ci_polynomial_is_linear(seed in 0u64..1000, c in -5i64..5) {
            let (a, b) = (Game::random(4, seed, 9), Game::random(4, seed + 1, 9));
            for i in 1..=4 {
                let (x, y) = (a.tensor(i).unwrap(), b.tensor(i).unwrap());
                let fx = ci_polynomial_from_tensor(x, i).unwrap();
                let fy = ci_polynomial_from_tensor(y, i).unwrap();
                prop_assert_eq!(ci_polynomial_from_tensor(&x.add(y), i).unwrap(), &fx + &fy);
                prop_assert_eq!(ci_polynomial_from_tensor(&x.scale(&q(c)), i).unwrap(), fx.scale(&q(c)));
            }
        }

        #[test]
        fn nash_polynomial_shift_invariant(seed in 0u64..1000, c in -20i64..20) {
            let g = Game::random(3, seed, 9);
            for i in 1..=3 {
                let shifted = g.tensor(i).unwrap().add(&PayoffTensor::new(3, vec![q(c); 8]).unwrap());
                let h = g.with_tensor(i, shifted).unwrap();
                prop_assert_eq!(nash_polynomial(&g, i).unwrap(), nash_polynomial(&h, i).unwrap());
            }
        }

        #[test]
        fn segre_factorization_random(seed in 0u64..1000, n in 3usize..=4) {
            let game = Game::random(n, seed, 7);
            for i in 1..=n {
                let det = segre_substitute(&spohn_matrix(&game, i).unwrap().determinant());
                let f = ci_polynomial(&game, i).unwrap();
                prop_assert_eq!(det.div_exact(&marginal_factor(n, i)), Some(f));
            }
        }

        #[test]
        fn coefficient_relation_random(seed in 0u64..1000) {
            let game = Game::random(4, seed, 20);
            for i in [3, 4] {
                prop_assert!(coefficient_form(&game, i).unwrap().relation_holds());
            }
        }
    }
}
