//! Solving on the three-player CI curve.
//!
//! Elimination and degree counts are exact; real roots come from Sturm
//! isolation of an exact univariate and are then polished by Newton's method
//! in floating point. The chart is `sigma^(1)_2 = tau_22 = 1`, so a point of
//! the curve is `(s, t11, t12, t21)` with `s = sigma^(1)_1`.

use std::collections::HashMap;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, StrategyProfile};
use crate::poly::{resultant, MultiPoly, Rational, UniPoly, VarId};
use crate::spohn::{ci_system, nash_polynomial, segre_substitute, spohn_matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub eps: f64,
    pub newton_iters: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { eps: 1e-9, newton_iters: 50 }
    }
}

impl Tolerance {
    pub fn new(eps: f64, newton_iters: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Precondition(format!("tolerance must be positive, got {eps}")));
        }
        Ok(Tolerance { eps, newton_iters })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    #[serde(rename = "onSpohn")]
    pub on_spohn: bool,
    #[serde(rename = "onSegre")]
    pub on_segre: bool,
    #[serde(rename = "inSimplex")]
    pub in_simplex: bool,
}

/// Largest relative residuals of the Spohn determinants and of the
/// flattening minors at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub spohn: f64,
    pub segre: f64,
}

/// A point of the model given by its chart coordinates, with its Segre
/// image `p` and membership flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    /// First coordinates of the sigma blocks; the second coordinates are 1.
    pub sigma: Vec<f64>,
    /// `t11, t12, t21, t22`, scaled so that `t22 = 1` unless it vanishes.
    pub tau: [f64; 4],
    pub p: Vec<f64>,
    pub residuals: Residuals,
    pub flags: Flags,
}

impl EquilibriumPoint {
    pub fn new(game: &Game, sigma: Vec<f64>, tau: [f64; 4], tol: &Tolerance) -> Result<Self> {
        if sigma.len() + 2 != game.players() {
            return Err(Error::Precondition(format!(
                "{} sigma coordinates for a {}-player game",
                sigma.len(),
                game.players()
            )));
        }
        let p = segre_point(&sigma, &tau);
        let mut point = EquilibriumPoint { sigma, tau, p, residuals: Residuals::default(), flags: Flags::default() };
        let (flags, residuals) = classify(game, &point, tol)?;
        point.flags = flags;
        point.residuals = residuals;
        Ok(point)
    }

    pub fn players(&self) -> usize {
        self.sigma.len() + 2
    }

    /// The Segre image computed in exact arithmetic from the (binary,
    /// hence exactly representable) float coordinates.
    pub fn exact_p(&self) -> Vec<Rational> {
        let q = |x: f64| Rational::from_float(x).unwrap_or_else(Rational::zero);
        let sigma: Vec<Rational> = self.sigma.iter().map(|&x| q(x)).collect();
        let tau: Vec<Rational> = self.tau.iter().map(|&x| q(x)).collect();
        let n = self.players();
        (0..1usize << n)
            .map(|k| {
                let e = StrategyProfile::from_index(n, k);
                let e = e.entries();
                let mut v = tau[2 * (e[n - 2] as usize - 1) + (e[n - 1] as usize - 1)].clone();
                for (l, s) in sigma.iter().enumerate() {
                    if e[l] == 1 {
                        v *= s;
                    }
                }
                v
            })
            .collect()
    }

    /// Chart assignment `s_l = sigma[l]`, `sigma_2 = 1`, and the four taus.
    pub fn assignment(&self) -> HashMap<VarId, f64> {
        let mut m: HashMap<VarId, f64> = HashMap::new();
        for (l, &s) in self.sigma.iter().enumerate() {
            m.insert(VarId::sigma(l + 1, 1), s);
            m.insert(VarId::sigma(l + 1, 2), 1.0);
        }
        for (v, &t) in VarId::taus().iter().zip(&self.tau) {
            m.insert(*v, t);
        }
        m
    }
}

fn segre_point(sigma: &[f64], tau: &[f64; 4]) -> Vec<f64> {
    let n = sigma.len() + 2;
    (0..1usize << n)
        .map(|k| {
            let prof = StrategyProfile::from_index(n, k);
            let e = prof.entries();
            let mut v = tau[2 * (e[n - 2] as usize - 1) + (e[n - 1] as usize - 1)];
            for (l, &s) in sigma.iter().enumerate() {
                if e[l] == 1 {
                    v *= s;
                }
            }
            v
        })
        .collect()
}

/// Index matrix of the flattening that separates the players in `group`
/// from the rest: rows range over the group's strategies, columns over the
/// others', both in row-major order.
fn flattening(n: usize, group: &[usize]) -> Vec<Vec<usize>> {
    let rest: Vec<usize> = (1..=n).filter(|l| !group.contains(l)).collect();
    let rows = 1usize << group.len();
    let cols = 1usize << rest.len();
    (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| {
                    let mut entries = vec![1u8; n];
                    for (k, &l) in group.iter().enumerate() {
                        entries[l - 1] = 1 + ((r >> (group.len() - 1 - k)) & 1) as u8;
                    }
                    for (k, &l) in rest.iter().enumerate() {
                        entries[l - 1] = 1 + ((c >> (rest.len() - 1 - k)) & 1) as u8;
                    }
                    StrategyProfile::new(entries).expect("binary profile").index()
                })
                .collect()
        })
        .collect()
}

/// Flattenings whose rank-one locus is the model: each independent player
/// against the rest, and the edge pair against the rest.
fn model_flattenings(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n < 3 {
        return Vec::new();
    }
    let mut out: Vec<Vec<Vec<usize>>> = (1..=n - 2).map(|l| flattening(n, &[l])).collect();
    out.push(flattening(n, &[n - 1, n]));
    out
}

fn for_each_minor(mat: &[Vec<usize>], mut f: impl FnMut(usize, usize, usize, usize)) {
    for r1 in 0..mat.len() {
        for r2 in r1 + 1..mat.len() {
            for c1 in 0..mat[0].len() {
                for c2 in c1 + 1..mat[0].len() {
                    f(mat[r1][c1], mat[r2][c2], mat[r1][c2], mat[r2][c1]);
                }
            }
        }
    }
}

/// Largest relative 2x2 minor `|ad - bc| / (|ad| + |bc|)` over the model
/// flattenings.
pub fn segre_residual(n: usize, p: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for mat in model_flattenings(n) {
        for_each_minor(&mat, |a, d, b, c| {
            let (x, y) = (p[a] * p[d], p[b] * p[c]);
            let scale = x.abs() + y.abs();
            if scale > 0.0 {
                worst = worst.max((x - y).abs() / scale);
            }
        });
    }
    worst
}

/// Every model flattening minor of an exact tensor.
pub fn segre_minors_exact(n: usize, p: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::new();
    for mat in model_flattenings(n) {
        for_each_minor(&mat, |a, d, b, c| out.push(&p[a] * &p[d] - &p[b] * &p[c]));
    }
    out
}

fn relative_residual(poly: &MultiPoly, at: &HashMap<VarId, f64>) -> Result<f64> {
    let v = poly.eval_f64(at)?;
    let scale = poly.abs_eval_f64(at)?;
    Ok(if scale > 0.0 { v.abs() / scale } else { v.abs() })
}

/// Membership flags of a point, judged against its stored `p`.
pub fn classify(game: &Game, point: &EquilibriumPoint, tol: &Tolerance) -> Result<(Flags, Residuals)> {
    let n = game.players();
    if point.p.len() != 1 << n {
        return Err(Error::Precondition(format!("point has {} entries, expected {}", point.p.len(), 1 << n)));
    }
    let at: HashMap<VarId, f64> = point.p.iter().enumerate().map(|(k, &x)| (VarId::p(n, k), x)).collect();
    let mut spohn: f64 = 0.0;
    for i in 1..=n {
        let det = spohn_matrix(game, i)?.determinant();
        spohn = spohn.max(relative_residual(&det, &at)?);
    }
    let segre = segre_residual(n, &point.p);
    let total: f64 = point.p.iter().sum();
    let in_simplex = total != 0.0 && point.p.iter().all(|&x| x / total > 0.0);
    Ok((
        Flags { on_spohn: spohn < tol.eps, on_segre: segre < tol.eps, in_simplex },
        Residuals { spohn, segre },
    ))
}

/// Newton's method with minimum-norm steps, so it also applies to
/// underdetermined (e.g. homogeneous) systems. Returns the iterate with the
/// smallest residual norm.
fn newton(
    polys: &[MultiPoly],
    vars: &[VarId],
    fixed: &HashMap<VarId, f64>,
    x0: &[f64],
    iters: usize,
) -> Result<Vec<f64>> {
    let jac: Vec<Vec<MultiPoly>> = polys.iter().map(|f| vars.iter().map(|&v| f.derivative(v)).collect()).collect();
    let mut at = fixed.clone();
    let mut x = x0.to_vec();
    let eval = |at: &HashMap<VarId, f64>| -> Result<DVector<f64>> {
        Ok(DVector::from_vec(polys.iter().map(|f| f.eval_f64(at)).collect::<Result<Vec<_>>>()?))
    };
    let mut best = (f64::INFINITY, x.clone());
    for _ in 0..=iters {
        for (v, &xi) in vars.iter().zip(&x) {
            at.insert(*v, xi);
        }
        let f = eval(&at)?;
        let norm = f.norm();
        if !norm.is_finite() {
            break;
        }
        if norm < best.0 {
            best = (norm, x.clone());
        }
        if norm == 0.0 {
            break;
        }
        let mut j = DMatrix::zeros(polys.len(), vars.len());
        for (r, row) in jac.iter().enumerate() {
            for (c, d) in row.iter().enumerate() {
                j[(r, c)] = d.eval_f64(&at)?;
            }
        }
        let Ok(step) = j.svd(true, true).solve(&f, 1e-300) else { break };
        let size = step.norm();
        for (xi, s) in x.iter_mut().zip(step.iter()) {
            *xi -= s;
        }
        let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if size <= 1e-16 * scale {
            for (v, &xi) in vars.iter().zip(&x) {
                at.insert(*v, xi);
            }
            let norm = eval(&at)?.norm();
            if norm < best.0 {
                best = (norm, x.clone());
            }
            break;
        }
    }
    Ok(best.1)
}

fn require_three(game: &Game) -> Result<()> {
    if game.players() != 3 {
        return Err(Error::Precondition(format!(
            "this solver handles three-player games, got {} players",
            game.players()
        )));
    }
    Ok(())
}

fn qf(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn eval_at(poly: &MultiPoly, vals: &[(VarId, f64)]) -> Result<f64> {
    poly.eval_f64(&vals.iter().copied().collect())
}

/// Solve `coef1 * y + coef0 = 0` for `y`, if the linear coefficient is not
/// negligible.
fn solve_linear_in(poly: &MultiPoly, v: VarId, known: &[(VarId, f64)]) -> Result<Option<f64>> {
    let c1 = eval_at(&poly.coeff_of_power(v, 1), known)?;
    let c0 = eval_at(&poly.coeff_of_power(v, 0), known)?;
    if c1.abs() <= 1e-12 * (c1.abs() + c0.abs()) || c1 == 0.0 {
        return Ok(None);
    }
    Ok(Some(-c0 / c1))
}

/// Dehomogenised Nash polynomials `G_1, G_2, G_3` of a three-player game in
/// `a = u1_1`, `b = u2_1`, `c = u3_1`.
pub fn nash_system3(game: &Game) -> Result<[MultiPoly; 3]> {
    require_three(game)?;
    let g: Vec<MultiPoly> = (1..=3).map(|i| nash_polynomial(game, i).map(|p| p.dehomogenize())).collect::<Result<_>>()?;
    if let Some(k) = g.iter().position(MultiPoly::is_zero) {
        return Err(Error::DegenerateGame(format!("the Nash polynomial of player {} vanishes identically", k + 1)));
    }
    Ok([g[0].clone(), g[1].clone(), g[2].clone()])
}

/// The univariate in `c` left after eliminating `b` and then `a`.
pub fn nash_eliminant3(game: &Game) -> Result<UniPoly> {
    let [g1, g2, g3] = nash_system3(game)?;
    let (a, b, c) = (VarId::nash(1, 1), VarId::nash(2, 1), VarId::nash(3, 1));
    let r = resultant(&g1, &g3, b, 1, 1);
    let r = resultant(&r, &g2, a, 1, 1);
    let u = r.to_univariate(c).ok_or_else(|| Error::Assertion("eliminant still involves a or b".into()))?;
    if u.is_zero() {
        return Err(Error::EliminationCollapse(
            "the eliminant vanishes identically, so the Nash set is positive-dimensional".into(),
        ));
    }
    Ok(u.primitive())
}

/// Totally mixed Nash equilibria of a three-player binary game.
pub fn totally_mixed_nash3(game: &Game, tol: &Tolerance) -> Result<Vec<EquilibriumPoint>> {
    let [g1, g2, g3] = nash_system3(game)?;
    let (a, b, c) = (VarId::nash(1, 1), VarId::nash(2, 1), VarId::nash(3, 1));
    let elim = nash_eliminant3(game)?;
    let polys = [g1.clone(), g2.clone(), g3.clone()];
    let mut out: Vec<EquilibriumPoint> = Vec::new();
    for cv in elim.real_roots(1e-13) {
        let known_c = [(c, cv)];
        let av = solve_linear_in(&g2, a, &known_c)?;
        let bv = solve_linear_in(&g1, b, &known_c)?;
        let (av, bv) = match (av, bv) {
            (Some(x), Some(y)) => (x, y),
            (Some(x), None) => (x, solve_linear_in(&g3, b, &[(a, x)])?.ok_or_else(|| collapse(cv))?),
            (None, Some(y)) => (solve_linear_in(&g3, a, &[(b, y)])?.ok_or_else(|| collapse(cv))?, y),
            (None, None) => return Err(collapse(cv)),
        };
        let x = newton(&polys, &[a, b, c], &HashMap::new(), &[av, bv, cv], tol.newton_iters)?;
        if x.iter().any(|&v| !(v > 0.0)) {
            continue;
        }
        let point = EquilibriumPoint::new(game, vec![x[0]], [x[1] * x[2], x[1], x[2], 1.0], tol)?;
        let duplicate = out.iter().any(|q| {
            q.sigma.iter().chain(&q.tau).zip(point.sigma.iter().chain(&point.tau)).all(|(u, v)| (u - v).abs() <= 1e-8 * (1.0 + u.abs()))
        });
        if !duplicate {
            out.push(point);
        }
    }
    if out.len() > 2 {
        return Err(Error::Assertion(format!("{} totally mixed equilibria exceed the bound of 2", out.len())));
    }
    Ok(out)
}

/// How the Nash solutions of a three-player game split: all complex ones
/// (with multiplicity, from the eliminant), the real ones, and those in the
/// open simplex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NashCount {
    pub complex: usize,
    pub real: usize,
    #[serde(rename = "totallyMixed")]
    pub totally_mixed: usize,
    /// Eliminant in `c` as decimal coefficients, increasing degree.
    pub eliminant: Vec<String>,
}

pub fn nash_count3(game: &Game, tol: &Tolerance) -> Result<NashCount> {
    let elim = nash_eliminant3(game)?;
    Ok(NashCount {
        complex: elim.degree().unwrap_or(0),
        real: elim.isolate_real_roots().len(),
        totally_mixed: totally_mixed_nash3(game, tol)?.len(),
        eliminant: elim.coeffs().iter().map(|c| c.to_string()).collect(),
    })
}

fn collapse(c: f64) -> Error {
    Error::EliminationCollapse(format!("the fiber over c = {c} is positive-dimensional"))
}

/// Points sampled over a grid of sigma values, plus the fibers that could
/// not be solved.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FiberSample {
    pub points: Vec<EquilibriumPoint>,
    /// Fibers containing a curve, by their `t` value.
    pub degenerate: Vec<String>,
    /// Candidates dropped because Newton did not reach the tolerance.
    pub rejected: usize,
}

/// Rational basis of the kernel of a nonzero linear form on `Q^4`.
fn kernel_basis(c: &[Rational; 4]) -> Vec<[Rational; 4]> {
    let k = (0..4).find(|&k| !c[k].is_zero()).expect("nonzero form");
    (0..4)
        .filter(|&j| j != k)
        .map(|j| {
            let mut w: [Rational; 4] = Default::default();
            w[j] = Rational::from_integer(1.into());
            w[k] = -&c[j] / &c[k];
            w
        })
        .collect()
}

fn linear_tau_coefficients(f: &MultiPoly) -> Result<[Rational; 4]> {
    let taus = VarId::taus();
    let mut out: [Rational; 4] = Default::default();
    for (m, coef) in f.terms() {
        let pairs = m.pairs();
        let pos = match pairs {
            [(v, 1)] => taus.iter().position(|t| t == v),
            _ => None,
        };
        let Some(pos) = pos else {
            return Err(Error::Assertion(format!("expected a linear form in tau, found the monomial {m}")));
        };
        out[pos] = coef.clone();
    }
    Ok(out)
}

/// Bases of the plane tried in turn until the projection to `(u0 : u1)`
/// separates the intersection points.
const PLANE_MIXES: [[[i64; 3]; 3]; 4] = [
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    [[1, 2, -1], [-2, 1, 3], [1, 1, 1]],
    [[3, -1, 2], [1, 4, -1], [-2, 1, 5]],
    [[2, 5, 1], [-3, 1, 4], [1, -2, 3]],
];

fn fiber_points(
    game: &Game,
    polys: &[MultiPoly],
    basis: &[[Rational; 4]],
    t: &Rational,
    tol: &Tolerance,
) -> Result<(Vec<EquilibriumPoint>, usize)> {
    let s_map: HashMap<VarId, MultiPoly> = HashMap::from([
        (VarId::sigma(1, 1), MultiPoly::constant(t.clone())),
        (VarId::sigma(1, 2), MultiPoly::integer(1)),
    ]);
    let fixed: Vec<MultiPoly> = polys.iter().map(|f| f.substitute(&s_map)).collect();
    let u = [VarId::affine(1), VarId::affine(2), VarId::affine(3)];
    let taus = VarId::taus();

    let mut chosen: Option<(Vec<[Rational; 4]>, MultiPoly, MultiPoly, UniPoly, usize)> = None;
    for mix in PLANE_MIXES {
        let w: Vec<[Rational; 4]> = mix
            .iter()
            .map(|row| {
                let mut v: [Rational; 4] = Default::default();
                for (coef, b) in row.iter().zip(basis) {
                    for k in 0..4 {
                        v[k] += &b[k] * Rational::from_integer((*coef).into());
                    }
                }
                v
            })
            .collect();
        let tau_map: HashMap<VarId, MultiPoly> = (0..4)
            .map(|k| {
                let mut lf = MultiPoly::zero();
                for (i, wi) in w.iter().enumerate() {
                    lf = &lf + &MultiPoly::var(u[i]).scale(&wi[k]);
                }
                (taus[k], lf)
            })
            .collect();
        let q2 = fixed[1].substitute(&tau_map);
        let q3 = fixed[2].substitute(&tau_map);
        if q2.is_zero() || q3.is_zero() {
            return Err(Error::DegenerateFiber(format!("a conic vanishes on the plane F_1 = 0 at t = {t}")));
        }
        let r = resultant(&q2, &q3, u[2], 2, 2);
        if r.is_zero() {
            continue;
        }
        let binary = r.substitute_var(u[1], &MultiPoly::integer(1));
        let f = binary.to_univariate(u[0]).ok_or_else(|| Error::Assertion("binary form in extra variables".into()))?;
        let deg = f.degree().unwrap_or(0);
        let at_infinity = 4usize.saturating_sub(deg);
        let good = f.is_squarefree() && at_infinity <= 1;
        if chosen.is_none() || good {
            chosen = Some((w, q2, q3, f, at_infinity));
        }
        if good {
            break;
        }
    }
    let Some((w, q2, q3, f, at_infinity)) = chosen else {
        return Err(Error::DegenerateFiber(format!("the conics share a component at t = {t}")));
    };

    let mut candidates: Vec<(f64, f64)> = f.real_roots(1e-13).into_iter().map(|x| (x, 1.0)).collect();
    if at_infinity > 0 {
        candidates.push((1.0, 0.0));
    }
    let fixed_vals: HashMap<VarId, f64> =
        HashMap::from([(VarId::sigma(1, 1), qf(t)), (VarId::sigma(1, 2), 1.0)]);
    let quad = |q: &MultiPoly, u0: f64, u1: f64| -> Result<[f64; 3]> {
        let known = [(u[0], u0), (u[1], u1)];
        Ok([
            eval_at(&q.coeff_of_power(u[2], 2), &known)?,
            eval_at(&q.coeff_of_power(u[2], 1), &known)?,
            eval_at(&q.coeff_of_power(u[2], 0), &known)?,
        ])
    };
    let mut points = Vec::new();
    let mut rejected = 0;
    for (u0, u1) in candidates {
        let [a2, b2, c2] = quad(&q2, u0, u1)?;
        let [a3, b3, c3] = quad(&q3, u0, u1)?;
        // a3*Q2 - a2*Q3 is linear in u2
        let lin1 = a3 * b2 - a2 * b3;
        let lin0 = a3 * c2 - a2 * c3;
        let u2 = if lin1.abs() > 1e-12 * (lin1.abs() + lin0.abs()) {
            -lin0 / lin1
        } else {
            let roots = UniPoly::new(
                [c2, b2, a2].iter().map(|&x| Rational::from_float(x).unwrap_or_else(Rational::zero)).collect(),
            )
            .real_roots(1e-13);
            let q3_at = |z: f64| (a3 * z * z + b3 * z + c3).abs();
            match roots.into_iter().min_by(|x, y| q3_at(*x).total_cmp(&q3_at(*y))) {
                Some(z) => z,
                None => {
                    rejected += 1;
                    continue;
                }
            }
        };
        let coords = [u0, u1, u2];
        let tau0: Vec<f64> = (0..4).map(|k| (0..3).map(|i| qf(&w[i][k]) * coords[i]).sum()).collect();
        let tau = newton(&fixed, &taus, &fixed_vals, &tau0, tol.newton_iters)?;
        let tau = normalize_tau(&tau);
        let mut at = fixed_vals.clone();
        for (v, x) in taus.iter().zip(&tau) {
            at.insert(*v, *x);
        }
        let mut worst: f64 = 0.0;
        for poly in &fixed {
            worst = worst.max(relative_residual(poly, &at)?);
        }
        let duplicate = points.iter().any(|p: &EquilibriumPoint| {
            p.tau.iter().zip(&tau).all(|(x, y)| (x - y).abs() <= 1e-8 * (1.0 + x.abs()))
        });
        if !(worst < tol.eps) || duplicate || tau.iter().any(|x| !x.is_finite()) {
            if !duplicate {
                warn!("dropping a fiber candidate at t = {t} with residual {worst:e}");
                rejected += 1;
            }
            continue;
        }
        points.push(EquilibriumPoint::new(game, vec![qf(t)], tau, tol)?);
    }
    Ok((points, rejected))
}

fn normalize_tau(tau: &[f64]) -> [f64; 4] {
    let max = tau.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let d = if tau[3].abs() > 1e-9 * max {
        tau[3]
    } else {
        let k = (0..4).max_by(|&i, &j| tau[i].abs().total_cmp(&tau[j].abs())).unwrap_or(0);
        tau[k]
    };
    [tau[0] / d, tau[1] / d, tau[2] / d, tau[3] / d]
}

/// Sample the curve over the sigma values in `t_grid`. Each fiber is a plane
/// section of two conics, so it holds at most four points.
pub fn fiber_sample3(game: &Game, t_grid: &[Rational], tol: &Tolerance) -> Result<FiberSample> {
    require_three(game)?;
    let system = ci_system(game);
    system.require_nondegenerate()?;
    let basis = kernel_basis(&linear_tau_coefficients(&system.polys[0])?);
    let results: Vec<Result<(Vec<EquilibriumPoint>, usize)>> = t_grid
        .par_iter()
        .map(|t| fiber_points(game, &system.polys, &basis, t, tol))
        .collect();
    let mut out = FiberSample::default();
    for (t, r) in t_grid.iter().zip(results) {
        match r {
            Ok((pts, rejected)) => {
                out.points.extend(pts);
                out.rejected += rejected;
            }
            Err(Error::DegenerateFiber(msg)) => {
                warn!("skipping fiber: {msg}");
                out.degenerate.push(t.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Evenly spaced grid `a, ..., b` with `steps` points (`steps = 1` gives `a`).
pub fn linear_grid(a: &Rational, b: &Rational, steps: usize) -> Vec<Rational> {
    match steps {
        0 => Vec::new(),
        1 => vec![a.clone()],
        _ => {
            let h = (b - a) / Rational::from_integer(((steps - 1) as i64).into());
            (0..steps).map(|k| a + &h * Rational::from_integer((k as i64).into())).collect()
        }
    }
}

/// Outcome of a hyperplane-section degree count.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeWitness {
    pub degree: usize,
    pub seed: u64,
    pub attempts: usize,
    /// Integer coefficients of the hyperplane in the `p` coordinates.
    pub hyperplane: Vec<i64>,
    /// Eliminant coefficients in increasing degree.
    pub eliminant: Vec<String>,
}

fn random_hyperplane(n: usize, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let h: Vec<i64> = (0..1usize << n).map(|_| rng.random_range(-9..=9)).collect();
        if h.iter().any(|&x| x != 0) {
            return h;
        }
    }
}

fn cross(a: &[MultiPoly; 3], b: &[MultiPoly; 3]) -> [MultiPoly; 3] {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

/// Eliminant of `{F_1, F_2, F_3, H}` in the sigma parameter `x`, with the
/// chart `sigma = (x, 1)` or, reversed, `sigma = (1, x)`.
fn section_eliminant(system: &[MultiPoly], h: &MultiPoly, reverse: bool) -> Result<UniPoly> {
    let x = VarId::affine(1);
    let lam = VarId::affine(2);
    let (s1, s2) = if reverse { (MultiPoly::integer(1), MultiPoly::var(x)) } else { (MultiPoly::var(x), MultiPoly::integer(1)) };
    let chart: HashMap<VarId, MultiPoly> = HashMap::from([(VarId::sigma(1, 1), s1), (VarId::sigma(1, 2), s2)]);
    let f2 = system[1].substitute(&chart);
    let f3 = system[2].substitute(&chart);
    let h = h.substitute(&chart);
    let taus = VarId::taus();
    let basis = kernel_basis(&linear_tau_coefficients(&system[0])?);

    // H restricted to the plane F_1 = 0, as a row vector over Q[x]
    let g: [MultiPoly; 3] = std::array::from_fn(|m| {
        let mut acc = MultiPoly::zero();
        for k in 0..4 {
            acc = &acc + &h.coeff_of_power(taus[k], 1).scale(&basis[m][k]);
        }
        acc
    });
    // kernel line of g spanned by g x e_i and g x e_j with (i, j, k) cyclic;
    // the parametrisation degenerates exactly where g_k vanishes
    let k = (0..3).find(|&k| !g[k].is_zero()).ok_or_else(|| {
        Error::UnluckyHyperplane("the hyperplane contains the plane F_1 = 0".into())
    })?;
    let unit = |i: usize| -> [MultiPoly; 3] { std::array::from_fn(|m| MultiPoly::integer((m == i) as i64)) };
    let v1 = cross(&g, &unit((k + 1) % 3));
    let v2 = cross(&g, &unit((k + 2) % 3));
    let tau_map: HashMap<VarId, MultiPoly> = (0..4)
        .map(|c| {
            let mut acc = MultiPoly::zero();
            for m in 0..3 {
                let coord = &(&MultiPoly::var(lam) * &v1[m]) + &v2[m];
                acc = &acc + &coord.scale(&basis[m][c]);
            }
            (taus[c], acc)
        })
        .collect();
    let q2 = f2.substitute(&tau_map);
    let q3 = f3.substitute(&tau_map);
    let r = resultant(&q2, &q3, lam, 2, 2);
    let r = r.to_univariate(x).ok_or_else(|| Error::Assertion("eliminant involves the line parameter".into()))?;
    if r.is_zero() {
        return Err(Error::UnluckyHyperplane("the section eliminant vanishes identically".into()));
    }
    let gk = g[k].to_univariate(x).ok_or_else(|| Error::Assertion("g involves tau".into()))?;
    let factor = (0..4).fold(UniPoly::from_i64(&[1]), |acc, _| acc.mul(&gk));
    let (q, rem) = r.div_rem(&factor);
    if !rem.is_zero() {
        return Err(Error::Assertion("the parametrisation factor does not divide the resultant".into()));
    }
    Ok(q.primitive())
}

fn section_degree(system: &[MultiPoly], hcoef: &[i64], n: usize) -> Result<UniPoly> {
    let mut h = MultiPoly::zero();
    for (k, &c) in hcoef.iter().enumerate() {
        h = &h + &MultiPoly::var(VarId::p(n, k)).scale(&Rational::from_integer(c.into()));
    }
    let h = segre_substitute(&h);
    let e = section_eliminant(system, &h, false)?;
    if !e.is_squarefree() {
        return Err(Error::UnluckyHyperplane("two section points share a sigma value".into()));
    }
    let rev = section_eliminant(system, &h, true)?;
    if rev.eval(&Rational::zero()).is_zero() {
        return Err(Error::UnluckyHyperplane("a section point lies at sigma = (1 : 0)".into()));
    }
    Ok(e)
}

/// Count the points of the curve on a random hyperplane of the `p` space.
/// Retries with the next seed when the hyperplane is special, up to five
/// attempts.
pub fn degree_witness3(game: &Game, seed: u64) -> Result<DegreeWitness> {
    require_three(game)?;
    let system = ci_system(game);
    system.require_nondegenerate()?;
    let mut last = String::new();
    for attempt in 0..5u64 {
        let s = seed.wrapping_add(attempt);
        let h = random_hyperplane(3, s);
        match section_degree(&system.polys, &h, 3) {
            Ok(e) => {
                return Ok(DegreeWitness {
                    degree: e.degree().unwrap_or(0),
                    seed: s,
                    attempts: attempt as usize + 1,
                    hyperplane: h,
                    eliminant: e.coeffs().iter().map(|c| c.to_string()).collect(),
                })
            }
            Err(Error::UnluckyHyperplane(msg)) => {
                warn!("hyperplane from seed {s} is special: {msg}");
                last = msg;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnluckyHyperplane(format!("five hyperplanes in a row were special; last: {last}")))
}

pub fn eliminant_degree3(game: &Game, seed: u64) -> Result<usize> {
    Ok(degree_witness3(game, seed)?.degree)
}

/// Chart variables of the three-player curve: `s, t11, t12, t21`.
pub fn chart_variables3() -> [VarId; 4] {
    [VarId::sigma(1, 1), VarId::tau(1, 1), VarId::tau(1, 2), VarId::tau(2, 1)]
}

fn chart_system3(game: &Game) -> Result<Vec<MultiPoly>> {
    require_three(game)?;
    let system = ci_system(game);
    system.require_nondegenerate()?;
    Ok(system.dehomogenized())
}

fn chart_values(point: &EquilibriumPoint) -> HashMap<VarId, f64> {
    let v = [point.sigma[0], point.tau[0], point.tau[1], point.tau[2]];
    chart_variables3().into_iter().zip(v).collect()
}

pub fn analytic_jacobian(game: &Game, point: &EquilibriumPoint) -> Result<DMatrix<f64>> {
    let polys = chart_system3(game)?;
    let at = chart_values(point);
    let vars = chart_variables3();
    let mut j = DMatrix::zeros(3, 4);
    for (r, f) in polys.iter().enumerate() {
        for (c, v) in vars.iter().enumerate() {
            j[(r, c)] = f.derivative(*v).eval_f64(&at)?;
        }
    }
    Ok(j)
}

/// Central differences with step `h`, evaluated in exact arithmetic at the
/// (exactly representable) float point so that only truncation error
/// remains.
pub fn finite_difference_jacobian(game: &Game, point: &EquilibriumPoint, h: f64) -> Result<DMatrix<f64>> {
    let polys = chart_system3(game)?;
    let q = |x: f64| Rational::from_float(x).ok_or_else(|| Error::Precondition(format!("non-finite coordinate {x}")));
    let base: HashMap<VarId, Rational> =
        chart_values(point).into_iter().map(|(v, x)| Ok((v, q(x)?))).collect::<Result<_>>()?;
    let hq = q(h)?;
    let vars = chart_variables3();
    let mut j = DMatrix::zeros(3, 4);
    for (c, v) in vars.iter().enumerate() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        *plus.get_mut(v).expect("chart variable") += &hq;
        *minus.get_mut(v).expect("chart variable") -= &hq;
        for (r, f) in polys.iter().enumerate() {
            let d = (f.evaluate(&plus)? - f.evaluate(&minus)?) / (&hq * Rational::from_integer(2.into()));
            j[(r, c)] = qf(&d);
        }
    }
    Ok(j)
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobianRecord {
    pub sigma: Vec<f64>,
    pub tau: [f64; 4],
    pub residual: f64,
    /// Singular values of the 3x4 Jacobian, decreasing.
    pub singular_values: Vec<f64>,
    /// The two smallest singular values of the Jacobian as a map on the
    /// 4-dimensional chart, the first always 0.
    pub smallest_two: [f64; 2],
    pub corank: usize,
    pub included: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JacobianReport {
    pub records: Vec<JacobianRecord>,
    pub checked: usize,
    pub excluded: usize,
    /// Every included point has corank one.
    pub smooth_evidence: bool,
}

/// Jacobian ranks at points of the curve. Points off the curve or outside
/// the chart are reported and excluded.
pub fn jacobian_spot_check(game: &Game, points: &[EquilibriumPoint], tol: &Tolerance) -> Result<JacobianReport> {
    let polys = chart_system3(game)?;
    let mut records = Vec::new();
    for point in points {
        let mut rec = JacobianRecord {
            sigma: point.sigma.clone(),
            tau: point.tau,
            residual: f64::NAN,
            singular_values: Vec::new(),
            smallest_two: [f64::NAN; 2],
            corank: 0,
            included: false,
            note: None,
        };
        if point.sigma.len() != 1 || (point.tau[3] - 1.0).abs() > 1e-12 {
            rec.note = Some("outside the chart t22 = 1".into());
            records.push(rec);
            continue;
        }
        let at = chart_values(point);
        let mut residual: f64 = 0.0;
        for f in &polys {
            residual = residual.max(relative_residual(f, &at)?);
        }
        rec.residual = residual;
        if !(residual < tol.eps) {
            rec.note = Some(format!("residual {residual:e} exceeds the tolerance"));
            records.push(rec);
            continue;
        }
        let j = analytic_jacobian(game, point)?;
        let mut sv: Vec<f64> = j.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let max = sv.first().copied().unwrap_or(0.0);
        let rank = sv.iter().filter(|&&s| s > 1e-6 * max).count();
        rec.smallest_two = [0.0, sv.last().copied().unwrap_or(0.0)];
        rec.corank = 4 - rank;
        rec.singular_values = sv;
        rec.included = true;
        records.push(rec);
    }
    let checked = records.iter().filter(|r| r.included).count();
    let smooth_evidence = checked > 0 && records.iter().filter(|r| r.included).all(|r| r.corank == 1);
    Ok(JacobianReport { excluded: records.len() - checked, checked, smooth_evidence, records })
}

/// Largest entrywise gap `|J - J_fd| / max(1, |J|)`.
pub fn jacobian_agreement(game: &Game, point: &EquilibriumPoint, h: f64) -> Result<f64> {
    let a = analytic_jacobian(game, point)?;
    let f = finite_difference_jacobian(game, point, h)?;
    Ok(a.iter().zip(f.iter()).map(|(x, y)| (x - y).abs() / x.abs().max(1.0)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spohn::tests::paper_game;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Independent count: scan the rational function obtained by solving
    /// G_2 for a and G_1 for b, then evaluating G_3, for sign changes of
    /// its numerator over c in (0, inf), and refine by bisection.
    fn grid_oracle(game: &Game) -> Vec<[f64; 3]> {
        let [g1, g2, g3] = nash_system3(game).unwrap();
        let (a, b, c) = (VarId::nash(1, 1), VarId::nash(2, 1), VarId::nash(3, 1));
        // coefficients as polynomials of degree <= 1 in c, evaluated by hand
        let coef = |p: &MultiPoly, v: VarId, k: u32| -> [f64; 2] {
            let part = p.coeff_of_power(v, k);
            [qf(&part.coeff_of_power(c, 0).constant_term()), qf(&part.coeff_of_power(c, 1).constant_term())]
        };
        let (al, be) = (coef(&g2, a, 1), coef(&g2, a, 0));
        let (ga, de) = (coef(&g1, b, 1), coef(&g1, b, 0));
        let e = |ka: u32, kb: u32| qf(&g3.coeff_of_power(a, ka).coeff_of_power(b, kb).constant_term());
        let (e11, e1, e2, e0) = (e(1, 1), e(1, 0), e(0, 1), e(0, 0));
        let numer = |cv: f64| -> (f64, f64, f64) {
            let l = |x: [f64; 2]| x[0] + x[1] * cv;
            let (al, be, ga, de) = (l(al), l(be), l(ga), l(de));
            let nval = e11 * be * de - e1 * be * ga - e2 * al * de + e0 * al * ga;
            (nval, -be / al, -de / ga)
        };
        let steps = 200_000;
        let cv = |k: usize| {
            let x = k as f64 / steps as f64;
            x / (1.0 - x)
        };
        let mut out = Vec::new();
        for k in 1..steps - 1 {
            let (mut lo, mut hi) = (cv(k), cv(k + 1));
            let (flo, fhi) = (numer(lo).0, numer(hi).0);
            if flo == 0.0 || flo.signum() == fhi.signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if numer(mid).0.signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (_, av, bv) = numer(lo);
            if av > 0.0 && bv > 0.0 {
                out.push([av, bv, lo]);
            }
        }
        out
    }

    /// The printed payoffs give two Nash points, but they are a complex
    /// conjugate pair; both still satisfy F_1 = F_2 = F_3 = 0.
    #[test]
    fn paper_game_nash_points_are_complex() {
        let game = paper_game();
        let count = nash_count3(&game, &tol()).unwrap();
        assert_eq!(count.eliminant, vec!["714", "-821", "318"]);
        assert_eq!((count.complex, count.real, count.totally_mixed), (2, 0, 0));
        assert!(grid_oracle(&game).is_empty());
    }

    /// A random game whose two Nash points are both totally mixed.
    fn two_point_game() -> Game {
        Game::random(3, 154, 10)
    }

    #[test]
    fn two_totally_mixed_equilibria() {
        let game = two_point_game();
        let pts = totally_mixed_nash3(&game, &tol()).unwrap();
        assert_eq!(pts.len(), 2);
        let oracle = grid_oracle(&game);
        assert_eq!(oracle.len(), 2);
        for p in &pts {
            assert!(p.flags.on_spohn && p.flags.on_segre && p.flags.in_simplex, "{p:?}");
            assert!(p.residuals.spohn < 1e-9 && p.residuals.segre < 1e-9);
            let hit = oracle.iter().any(|o| {
                (o[0] - p.sigma[0]).abs() < 1e-6 && (o[1] - p.tau[1]).abs() < 1e-6 && (o[2] - p.tau[2]).abs() < 1e-6
            });
            assert!(hit, "{p:?} not among {oracle:?}");
        }
    }

    #[test]
    fn random_games_match_the_oracle() {
        for seed in 0..20 {
            let game = Game::random(3, seed, 10);
            let pts = totally_mixed_nash3(&game, &tol()).unwrap();
            assert!(pts.len() <= 2);
            assert_eq!(pts.len(), grid_oracle(&game).len(), "seed {seed}");
        }
    }

    #[test]
    fn constant_game_is_degenerate() {
        let game = Game::zero(3);
        assert!(matches!(totally_mixed_nash3(&game, &tol()), Err(Error::DegenerateGame(_))));
        assert!(matches!(eliminant_degree3(&game, 1), Err(Error::DegenerateGame(_))));
        assert!(matches!(fiber_sample3(&game, &[q(1, 1)], &tol()), Err(Error::DegenerateGame(_))));
    }

    #[test]
    fn fiber_at_one() {
        let game = paper_game();
        let sample = fiber_sample3(&game, &[q(1, 1)], &tol()).unwrap();
        assert!(sample.points.len() <= 4 && !sample.points.is_empty());
        let f = ci_system(&game);
        for p in &sample.points {
            assert!(p.flags.on_spohn && p.flags.on_segre, "{p:?}");
            let at = p.assignment();
            for poly in &f.polys {
                assert!(relative_residual(poly, &at).unwrap() < 1e-9);
            }
            assert!(segre_minors_exact(3, &p.exact_p()).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn nash_points_lie_in_their_fibers() {
        let game = two_point_game();
        let nash = totally_mixed_nash3(&game, &tol()).unwrap();
        let grid: Vec<Rational> = nash.iter().map(|p| Rational::from_float(p.sigma[0]).unwrap()).collect();
        let sample = fiber_sample3(&game, &grid, &tol()).unwrap();
        for p in &nash {
            let found = sample.points.iter().any(|s| {
                s.sigma[0] == p.sigma[0] && s.tau.iter().zip(&p.tau).all(|(x, y)| (x - y).abs() < 1e-6 * (1.0 + x.abs()))
            });
            assert!(found, "{p:?}");
        }
        assert!(sample.points.iter().any(|s| s.flags.in_simplex));
    }

    #[test]
    fn uniform_point_is_not_on_the_spohn_variety() {
        let game = paper_game();
        let p = EquilibriumPoint::new(&game, vec![1.0], [1.0; 4], &tol()).unwrap();
        assert!(!p.flags.on_spohn);
        assert!(p.flags.on_segre && p.flags.in_simplex);
        assert_eq!(p.residuals.segre, 0.0);
    }

    #[test]
    fn flattenings_cover_the_model() {
        assert_eq!(flattening(3, &[1]), vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        assert_eq!(flattening(3, &[2, 3]), vec![vec![0, 4], vec![1, 5], vec![2, 6], vec![3, 7]]);
        // a tensor off the model: independent marginal times a non-product
        let p = [1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 5.0];
        assert!(segre_residual(3, &p) > 1e-3);
    }

    #[test]
    fn degree_witness() {
        assert_eq!(eliminant_degree3(&paper_game(), 1).unwrap(), 8);
        for s in 1..=5 {
            assert_eq!(eliminant_degree3(&Game::random(3, s, 10), s).unwrap(), 8, "seed {s}");
        }
    }

    #[test]
    fn jacobian_on_sampled_points() {
        let game = paper_game();
        let grid = linear_grid(&q(1, 4), &q(4, 1), 16);
        let sample = fiber_sample3(&game, &grid, &tol()).unwrap();
        let chart: Vec<EquilibriumPoint> = sample.points.into_iter().filter(|p| p.tau[3] == 1.0).collect();
        assert!(chart.len() >= 20, "only {} points", chart.len());
        let report = jacobian_spot_check(&game, &chart, &tol()).unwrap();
        assert_eq!(report.checked, chart.len());
        assert!(report.smooth_evidence);
        for p in &chart {
            assert!(jacobian_agreement(&game, p, 1e-7).unwrap() < 1e-6);
        }
    }

    #[test]
    fn far_point_is_excluded() {
        let game = paper_game();
        let p = EquilibriumPoint::new(&game, vec![3.0], [1.0, 2.0, -1.0, 1.0], &tol()).unwrap();
        let report = jacobian_spot_check(&game, &[p], &tol()).unwrap();
        assert_eq!((report.checked, report.excluded), (0, 1));
        assert!(report.records[0].residual > 1e-3);
        assert!(!report.smooth_evidence);
    }

    #[test]
    fn grid_helper() {
        assert_eq!(linear_grid(&q(0, 1), &q(1, 1), 3), vec![q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(linear_grid(&q(2, 1), &q(5, 1), 1), vec![q(2, 1)]);
        assert!(Tolerance::new(0.0, 5).is_err());
    }
}
