//! Universality encoders: realise a given game's Nash system times a line,
//! or an arbitrary real variety cut by fewer equations than variables, as
//! the affine chart of a game's CI curve.
//!
//! For a target in `x_1..x_n` with degree bounds `delta_i`, the encoded game
//! has `delta + n + 1` players. Its sigma blocks are laid out as the chain
//! blocks of `x_1` (`delta_1` of them), then those of `x_2`, and so on, followed
//! by one main block for each of `x_1..x_{n-1}`. The variable `x_n` lives in
//! `t11`. On the chart, chain block `(i, j)` carries `x_i^j`.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{Game, PayoffTensor};
use crate::linmap::solve_preimage;
use crate::matching::assign_slots;
use crate::poly::{Block, Monomial, MultiPoly, Rational, VarId};
use crate::spohn::{ci_system, nash_polynomial};

/// Real affine variety `V(G_1, ..., G_m)` in `R^n` with `m < n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetVariety {
    pub vars: Vec<String>,
    pub polys: Vec<MultiPoly>,
}

impl TargetVariety {
    pub fn new(n: usize, polys: Vec<MultiPoly>) -> Result<Self> {
        let t = TargetVariety { vars: (1..=n).map(|i| format!("x{i}")).collect(), polys };
        t.validate()?;
        Ok(t)
    }

    pub fn ambient_dim(&self) -> usize {
        self.vars.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.ambient_dim();
        if self.polys.len() >= n {
            return Err(Error::Precondition(format!(
                "need fewer equations than variables, got {} equations in {n} variables",
                self.polys.len()
            )));
        }
        for (k, g) in self.polys.iter().enumerate() {
            if g.is_zero() {
                return Err(Error::Precondition(format!("equation {} is zero", k + 1)));
            }
            for v in g.variables() {
                match v {
                    VarId::Affine { index } if (1..=n as u32).contains(&index) => {}
                    other => return Err(Error::Precondition(format!("unexpected variable {other}"))),
                }
            }
        }
        Ok(())
    }

    /// `delta_i`: the largest exponent of `x_i` among the equations.
    pub fn degree_bounds(&self) -> Vec<usize> {
        (1..=self.ambient_dim())
            .map(|i| self.polys.iter().map(|g| g.degree_in(VarId::affine(i)) as usize).max().unwrap_or(0))
            .collect()
    }

    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        let assignment = affine_assignment(point);
        for g in &self.polys {
            if !g.evaluate(&assignment)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Value {
        let n = self.ambient_dim();
        let polys: Vec<Value> = self
            .polys
            .iter()
            .map(|g| {
                g.terms()
                    .rev()
                    .map(|(m, c)| {
                        let exps: Vec<u32> = (1..=n).map(|i| m.exponent(VarId::affine(i))).collect();
                        json!({"coeff": c.to_string(), "exponents": exps})
                    })
                    .collect()
            })
            .collect();
        json!({"vars": self.vars, "polys": polys})
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let vars: Vec<String> = value
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("target needs a \"vars\" array".into()))?
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| Error::Format("variable names must be strings".into())))
            .collect::<Result<_>>()?;
        let n = vars.len();
        let polys = value
            .get("polys")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("target needs a \"polys\" array".into()))?
            .iter()
            .map(|p| {
                let terms = p.as_array().ok_or_else(|| Error::Format("each polynomial is a list of terms".into()))?;
                let mut out = MultiPoly::zero();
                for t in terms {
                    let c = crate::rational_from_json(t.get("coeff").ok_or_else(|| Error::Format("term without \"coeff\"".into()))?)?;
                    let exps = t
                        .get("exponents")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Error::Format("term without \"exponents\"".into()))?;
                    if exps.len() != n {
                        return Err(Error::Format(format!("exponent vector of length {} for {n} variables", exps.len())));
                    }
                    let pairs = exps
                        .iter()
                        .enumerate()
                        .map(|(i, e)| {
                            e.as_u64()
                                .map(|e| (VarId::affine(i + 1), e as u32))
                                .ok_or_else(|| Error::Format("exponents must be nonnegative integers".into()))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    out.add_term(Monomial::from_pairs(pairs), c);
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let t = TargetVariety { vars, polys };
        t.validate()?;
        Ok(t)
    }
}

fn affine_assignment(point: &[Rational]) -> HashMap<VarId, Rational> {
    point.iter().enumerate().map(|(i, x)| (VarId::affine(i + 1), x.clone())).collect()
}

/// One slot of the encoded system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotEntry {
    pub slot: usize,
    pub equation: String,
    /// Dehomogenised equation placed at this slot.
    pub affine: String,
    /// Scalar `c` with `F_slot` (dehomogenised) `= c * affine`.
    pub scalar: String,
}

/// Dictionary between target coordinates and game coordinates plus the
/// slot assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingCertificate {
    pub kind: String,
    pub players: usize,
    /// `x_i^j` lives in the sigma block `chain_blocks[i-1][j-1]`.
    pub chain_blocks: Vec<Vec<usize>>,
    /// Sigma block of `x_i`, or `None` for the variable carried by `t11`.
    pub main_blocks: Vec<Option<usize>>,
    /// Target variable carried by `t11` (1-based), if any.
    pub tau_variable: Option<usize>,
    /// Whether linear occurrences of `x_i` were written via its main
    /// coordinate rather than its first chain coordinate.
    pub linear_via_main: bool,
    pub slots: Vec<SlotEntry>,
}

impl EncodingCertificate {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serialises")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        Ok(serde_json::from_value(value.clone())?)
    }

    /// Names of the game coordinates carrying each target coordinate.
    pub fn dictionary(&self) -> Vec<(String, String)> {
        let n = self.chain_blocks.len();
        let mut out = Vec::new();
        for i in 1..=n {
            let base = match self.main_blocks[i - 1] {
                Some(b) => VarId::sigma(b, 1).name(),
                None => "t11".into(),
            };
            out.push((format!("x{i}"), base));
            for (j, &b) in self.chain_blocks[i - 1].iter().enumerate() {
                out.push((format!("x{i}^{}", j + 1), VarId::sigma(b, 1).name()));
            }
        }
        out
    }
}

/// Product of `sigma^(b)_2` over `blocks`.
fn sigma2_product(blocks: impl IntoIterator<Item = usize>) -> Monomial {
    Monomial::from_pairs(blocks.into_iter().map(|b| (VarId::sigma(b, 2), 1)))
}

/// Homogenise a chart equation for `slot` of a game with `sigma_blocks`
/// sigma factors: pad each term with `sigma^(b)_2` for every missing block
/// `b != slot` and with `t22` up to tau degree `tau_degree`.
pub fn pad_equation(affine: &MultiPoly, slot: Option<usize>, sigma_blocks: usize, tau_degree: u32) -> Result<MultiPoly> {
    let mut out = MultiPoly::zero();
    for (m, c) in affine.terms() {
        let degs = m.block_degrees();
        let mut missing = Vec::new();
        for b in 1..=sigma_blocks {
            let d = degs.get(&Block::Sigma(b as u32)).copied().unwrap_or(0);
            if Some(b) == slot {
                if d != 0 {
                    return Err(Error::MatchingFailure(format!("equation at slot {b} uses its own block")));
                }
            } else if d == 0 {
                missing.push(b);
            } else if d > 1 {
                return Err(Error::Precondition(format!("term {m} has degree {d} in block {b}")));
            }
        }
        let td = degs.get(&Block::Tau).copied().unwrap_or(0);
        if td > tau_degree {
            return Err(Error::Precondition(format!("term {m} exceeds tau degree {tau_degree}")));
        }
        let pad = sigma2_product(missing).mul(&Monomial::from_pairs([(VarId::tau(2, 2), tau_degree - td)]));
        out.add_term(m.mul(&pad), c.clone());
    }
    Ok(out)
}

fn tau_row() -> MultiPoly {
    MultiPoly::var(VarId::tau(1, 1)) + MultiPoly::var(VarId::tau(1, 2))
}

fn tau_col() -> MultiPoly {
    MultiPoly::var(VarId::tau(1, 1)) + MultiPoly::var(VarId::tau(2, 1))
}

/// Rename Nash coordinates `u^(l)_k` to sigma coordinates `s^(l)_k`.
pub fn nash_to_sigma(p: &MultiPoly) -> MultiPoly {
    MultiPoly::from_terms(p.terms().map(|(m, c)| {
        let pairs = m.pairs().iter().map(|&(v, e)| match v {
            VarId::Nash { player, idx } => (VarId::Sigma { block: player, idx }, e),
            other => (other, e),
        });
        (Monomial::from_pairs(pairs), c.clone())
    }))
}

fn slot_entries(game: &Game, affine: &[(String, MultiPoly)]) -> Result<Vec<SlotEntry>> {
    let produced = ci_system(game).dehomogenized();
    affine
        .iter()
        .zip(&produced)
        .enumerate()
        .map(|(k, ((label, want), got))| {
            let scalar = got.proportional(want).ok_or_else(|| {
                Error::Assertion(format!("slot {} produced {got}, expected a multiple of {want}", k + 1))
            })?;
            Ok(SlotEntry { slot: k + 1, equation: label.clone(), affine: want.to_string(), scalar: scalar.to_string() })
        })
        .collect()
}

/// Append two players whose equations are `t22 (t11 + t12)` and
/// `t22 (t11 + t21)`; the original players' payoffs are moved to the
/// profiles where both new players choose 2 and zeroed elsewhere.
pub fn encode_product_r1(game: &Game) -> Result<(Game, EncodingCertificate)> {
    let n = game.players();
    let big = n + 2;
    let mut tensors = Vec::with_capacity(big);
    for t in game.tensors() {
        let values = (0..1usize << big)
            .map(|k| if k & 3 == 3 { t.at_index(k >> 2).clone() } else { Rational::zero() })
            .collect();
        tensors.push(PayoffTensor::new(big, values)?);
    }
    let top = (1usize << big) - 1;
    tensors.push(PayoffTensor::unit(big, top));
    tensors.push(PayoffTensor::unit(big, top));
    let out = Game::from_tensors(tensors)?;
    let mut affine: Vec<(String, MultiPoly)> = (1..=n)
        .map(|i| Ok((format!("nash({i})"), nash_to_sigma(&nash_polynomial(game, i)?).dehomogenize())))
        .collect::<Result<_>>()?;
    affine.push(("tau-row".into(), tau_row()));
    affine.push(("tau-col".into(), tau_col()));
    let slots = slot_entries(&out, &affine)?;
    let cert = EncodingCertificate {
        kind: "product".into(),
        players: big,
        chain_blocks: Vec::new(),
        main_blocks: (1..=n).map(Some).collect(),
        tau_variable: None,
        linear_via_main: false,
        slots,
    };
    Ok((out, cert))
}

struct Layout {
    chain: Vec<Vec<usize>>,
    main: Vec<Option<usize>>,
    tau_var: usize,
    linear_via_main: bool,
    sigma_blocks: usize,
}

impl Layout {
    fn new(delta: &[usize], tau_var: usize, linear_via_main: bool) -> Self {
        let n = delta.len();
        let mut next = 1;
        let chain = delta
            .iter()
            .map(|&d| {
                let blocks: Vec<usize> = (next..next + d).collect();
                next += d;
                blocks
            })
            .collect();
        let main = (1..=n)
            .map(|i| {
                (i != tau_var).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Layout { chain, main, tau_var, linear_via_main, sigma_blocks: next - 1 }
    }

    /// Chart coordinate standing for `x_i`.
    fn base(&self, i: usize) -> MultiPoly {
        match self.main[i - 1] {
            Some(b) => MultiPoly::var(VarId::sigma(b, 1)),
            None => MultiPoly::var(VarId::tau(1, 1)),
        }
    }

    fn chain_var(&self, i: usize, j: usize) -> MultiPoly {
        MultiPoly::var(VarId::sigma(self.chain[i - 1][j - 1], 1))
    }

    /// `x_i^k -> sigma^(chain(i,k))_1`; `x_i -> base` when `x_i` has no
    /// chain or when linear occurrences go through the main coordinate.
    fn substitute(&self, g: &MultiPoly) -> MultiPoly {
        MultiPoly::from_terms(g.terms().map(|(m, c)| {
            let mut out = MultiPoly::one();
            for &(v, e) in m.pairs() {
                let VarId::Affine { index } = v else { unreachable!("validated target") };
                let i = index as usize;
                let piece = if self.chain[i - 1].is_empty() || (e == 1 && self.linear_via_main) {
                    self.base(i).pow(e)
                } else {
                    self.chain_var(i, e as usize)
                };
                out = &out * &piece;
            }
            let (mono, _) = out.leading_term().expect("monomial");
            (mono.clone(), c.clone())
        }))
    }
}

fn uses_block(p: &MultiPoly, block: usize) -> bool {
    p.variables().iter().any(|v| v.block() == Some(Block::Sigma(block as u32)))
}

/// Chart equations for one layout, with the slot assignment if one exists.
fn try_layout(target: &TargetVariety, layout: &Layout) -> Option<Vec<(String, MultiPoly)>> {
    let n = target.ambient_dim();
    let m = target.polys.len();
    let mut eqs: Vec<(String, MultiPoly)> = Vec::new();
    let mut chain_ids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..=n {
        for j in 1..=layout.chain[i - 1].len() {
            let prev = if j == 1 { MultiPoly::one() } else { layout.chain_var(i, j - 1) };
            let eq = &layout.chain_var(i, j) - &(&layout.base(i) * &prev);
            chain_ids[i - 1].push(eqs.len());
            eqs.push((format!("chain({i},{j})"), eq));
        }
    }
    let mut target_ids = Vec::new();
    for (k, g) in target.polys.iter().enumerate() {
        target_ids.push(eqs.len());
        eqs.push((format!("target({})", k + 1), layout.substitute(g)));
    }
    let mut zero_ids = Vec::new();
    for k in m + 1..n {
        zero_ids.push(eqs.len());
        eqs.push((format!("zero({k})"), MultiPoly::zero()));
    }
    debug_assert_eq!(eqs.len(), layout.sigma_blocks);

    let mut preference: Vec<usize> = chain_ids[layout.tau_var - 1].clone();
    for (i, ids) in chain_ids.iter().enumerate() {
        if i + 1 != layout.tau_var {
            preference.extend(ids);
        }
    }
    preference.extend(&target_ids);
    preference.extend(&zero_ids);
    let assignment = assign_slots(layout.sigma_blocks, eqs.len(), &preference, |slot, eq| {
        !uses_block(&eqs[eq].1, slot + 1)
    })?;
    Some(assignment.iter().map(|&e| eqs[e].clone()).collect())
}

/// Encode `V(G_1..G_m)` as a `(delta + n + 1)`-player game.
pub fn encode_variety(target: &TargetVariety) -> Result<(Game, EncodingCertificate)> {
    target.validate()?;
    let n = target.ambient_dim();
    let delta = target.degree_bounds();
    let configurations = (1..=n).rev().flat_map(|t| [(t, false), (t, true)]);
    let (layout, mut affine) = configurations
        .map(|(t, lin)| Layout::new(&delta, t, lin))
        .find_map(|layout| try_layout(target, &layout).map(|a| (layout, a)))
        .ok_or_else(|| {
            Error::MatchingFailure(
                "every assignment puts some equation at the slot of one of its own variables".into(),
            )
        })?;
    let players = layout.sigma_blocks + 2;
    affine.push(("tau-row".into(), tau_row()));
    affine.push(("tau-col".into(), tau_col()));
    let padded: Vec<MultiPoly> = affine
        .iter()
        .enumerate()
        .map(|(k, (_, eq))| {
            let slot = k + 1;
            if slot <= layout.sigma_blocks {
                pad_equation(eq, Some(slot), layout.sigma_blocks, 1)
            } else {
                pad_equation(eq, None, layout.sigma_blocks, 2)
            }
        })
        .collect::<Result<_>>()?;
    let game = solve_preimage(players, &padded)?;
    let slots = slot_entries(&game, &affine)?;
    let cert = EncodingCertificate {
        kind: "variety".into(),
        players,
        chain_blocks: layout.chain.clone(),
        main_blocks: layout.main.clone(),
        tau_variable: Some(layout.tau_var),
        linear_via_main: layout.linear_via_main,
        slots,
    };
    Ok((game, cert))
}

/// The dehomogenised CI equations: the equations of the affine chart.
pub fn decode_open_subset(game: &Game) -> Vec<MultiPoly> {
    ci_system(game).dehomogenized()
}

/// Chart coordinates of the image of a target point.
pub fn transport_point(cert: &EncodingCertificate, point: &[Rational]) -> Result<HashMap<VarId, Rational>> {
    let n = cert.chain_blocks.len();
    if point.len() != n {
        return Err(Error::Precondition(format!("point has {} coordinates, expected {n}", point.len())));
    }
    let mut out = HashMap::new();
    for i in 1..=n {
        let x = &point[i - 1];
        match cert.main_blocks[i - 1] {
            Some(b) => {
                out.insert(VarId::sigma(b, 1), x.clone());
            }
            None => {
                out.insert(VarId::tau(1, 1), x.clone());
                out.insert(VarId::tau(1, 2), -x.clone());
                out.insert(VarId::tau(2, 1), -x.clone());
            }
        }
        for (j, &b) in cert.chain_blocks[i - 1].iter().enumerate() {
            out.insert(VarId::sigma(b, 1), num_traits::pow(x.clone(), j + 1));
        }
    }
    Ok(out)
}

/// Inverse of [`transport_point`] on the chart.
pub fn pull_back_point(cert: &EncodingCertificate, chart: &HashMap<VarId, Rational>) -> Result<Vec<Rational>> {
    let n = cert.chain_blocks.len();
    (1..=n)
        .map(|i| {
            let v = match cert.main_blocks[i - 1] {
                Some(b) => VarId::sigma(b, 1),
                None => VarId::tau(1, 1),
            };
            chart.get(&v).cloned().ok_or_else(|| Error::MissingVariable(v.name()))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TransportRecord {
    pub point: Vec<String>,
    /// Exact residual of each dehomogenised game equation.
    pub residuals: Vec<String>,
    pub recovered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsomorphismReport {
    pub records: Vec<TransportRecord>,
    pub passed: bool,
}

/// Push each sample through the dictionary, check that every chart equation
/// vanishes exactly and that the sample is recovered from its image.
pub fn verify_isomorphism(
    target: &TargetVariety,
    game: &Game,
    cert: &EncodingCertificate,
    samples: &[Vec<Rational>],
) -> Result<IsomorphismReport> {
    if game.players() != cert.players {
        return Err(Error::Precondition(format!(
            "certificate is for {} players, game has {}",
            cert.players,
            game.players()
        )));
    }
    let eqs = decode_open_subset(game);
    let mut records = Vec::new();
    for sample in samples {
        if !target.contains(sample)? {
            let coords: Vec<String> = sample.iter().map(|x| x.to_string()).collect();
            return Err(Error::Precondition(format!("sample ({}) does not lie on the target", coords.join(", "))));
        }
        let chart = transport_point(cert, sample)?;
        let mut residuals = Vec::new();
        for (k, f) in eqs.iter().enumerate() {
            let r = f.evaluate(&chart)?;
            if !r.is_zero() {
                return Err(Error::TransportFailure(format!("equation {} ({f}) evaluates to {r}", k + 1)));
            }
            residuals.push(r.to_string());
        }
        let back = pull_back_point(cert, &chart)?;
        if &back != sample {
            return Err(Error::TransportFailure("reverse transport does not recover the sample".into()));
        }
        records.push(TransportRecord {
            point: sample.iter().map(|x| x.to_string()).collect(),
            residuals,
            recovered: true,
        });
    }
    Ok(IsomorphismReport { records, passed: true })
}

/// Rational points `((1 - t^2)/(1 + t^2), 2t/(1 + t^2))` on the unit circle.
pub fn circle_points(ts: &[Rational]) -> Vec<Vec<Rational>> {
    ts.iter()
        .map(|t| {
            let d = Rational::one() + t * t;
            vec![(Rational::one() - t * t) / &d, (t + t) / d]
        })
        .collect()
}

pub fn samples_from_json(value: &Value) -> Result<Vec<Vec<Rational>>> {
    value
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("samples need a \"points\" array".into()))?
        .iter()
        .map(|p| {
            p.as_array()
                .ok_or_else(|| Error::Format("each point is an array".into()))?
                .iter()
                .map(crate::rational_from_json)
                .collect()
        })
        .collect()
}

pub fn samples_to_json(points: &[Vec<Rational>]) -> Value {
    json!({"points": points.iter().map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()})
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linmap::phi_matrix;
    use crate::poly::linear_form;
    use crate::spohn::tests::paper_game;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(VarId::affine(i))
    }

    pub fn circle() -> TargetVariety {
        TargetVariety::new(2, vec![&(&x(1).pow(2) + &x(2).pow(2)) - &MultiPoly::one()]).unwrap()
    }

    fn s(b: usize, k: u8) -> MultiPoly {
        MultiPoly::var(VarId::sigma(b, k))
    }

    fn t(r: u8, c: u8) -> MultiPoly {
        MultiPoly::var(VarId::tau(r, c))
    }

    fn prod(ps: &[MultiPoly]) -> MultiPoly {
        ps.iter().fold(MultiPoly::one(), |a, b| &a * b)
    }

    /// The seven circle equations as printed.
    pub fn printed_circle() -> Vec<MultiPoly> {
        let all5 = prod(&[s(1, 2), s(2, 2), s(3, 2), s(4, 2), s(5, 2), t(2, 2)]);
        vec![
            &prod(&[s(2, 2), s(4, 2), s(5, 2)]) * &(&(&s(3, 1) * &t(2, 2)) - &(&t(1, 1) * &s(3, 2))),
            &prod(&[s(1, 2), s(5, 2)]) * &(&prod(&[s(3, 2), s(4, 1), t(2, 2)]) - &prod(&[s(3, 1), s(4, 2), t(1, 1)])),
            &prod(&[s(2, 2), s(4, 2), t(2, 2)]) * &(&(&s(1, 1) * &s(5, 2)) - &(&s(5, 1) * &s(1, 2))),
            &prod(&[s(3, 2), t(2, 2)]) * &(&prod(&[s(1, 2), s(2, 1), s(5, 2)]) - &prod(&[s(1, 1), s(2, 2), s(5, 1)])),
            &prod(&[s(1, 2), s(3, 2), t(2, 2)])
                * &(&(&(&s(4, 2) * &s(2, 1)) + &(&s(2, 2) * &s(4, 1))) - &(&s(2, 2) * &s(4, 2))),
            &all5 * &tau_row(),
            &all5 * &tau_col(),
        ]
    }

    #[test]
    fn circle_matches_printed_equations() {
        let (game, cert) = encode_variety(&circle()).unwrap();
        assert_eq!(game.players(), 7);
        let sys = ci_system(&game);
        for (k, (got, want)) in sys.polys.iter().zip(printed_circle()).enumerate() {
            assert!(got.proportional(&want).is_some(), "slot {}: {got} vs {want}", k + 1);
            assert!(got.dehomogenize().proportional(&want.dehomogenize()).is_some());
        }
        assert_eq!(cert.slots[0].equation, "chain(2,1)");
        assert_eq!(cert.slots[4].equation, "target(1)");
        assert_eq!((cert.tau_variable, cert.linear_via_main), (Some(2), false));
        // the last two players get the all-2 unit payoff
        let top = PayoffTensor::unit(7, 127);
        assert_eq!(game.tensor(6).unwrap(), &top);
        assert_eq!(game.tensor(7).unwrap(), &top);
    }

    #[test]
    fn circle_first_equation_dehomogenises() {
        let (game, _) = encode_variety(&circle()).unwrap();
        let eqs = decode_open_subset(&game);
        let expected = &s(3, 1) - &t(1, 1);
        assert!(eqs[0].proportional(&expected).is_some());
    }

    #[test]
    fn circle_transport() {
        let target = circle();
        let (game, cert) = encode_variety(&target).unwrap();
        let ts = [q(0), q(1), Rational::new(1.into(), 2.into()), q(-3)];
        let report = verify_isomorphism(&target, &game, &cert, &circle_points(&ts)).unwrap();
        assert!(report.passed);
        assert_eq!(report.records.len(), 4);
        assert!(report.records.iter().all(|r| r.residuals.iter().all(|v| v == "0")));
        assert!(matches!(
            verify_isomorphism(&target, &game, &cert, &[vec![q(1), q(1)]]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn line_target() {
        let target = TargetVariety::new(2, vec![x(1)]).unwrap();
        let (game, cert) = encode_variety(&target).unwrap();
        assert_eq!(game.players(), 4);
        let report = verify_isomorphism(&target, &game, &cert, &[vec![q(0), q(5)]]).unwrap();
        assert!(report.passed);
        let labels: Vec<&str> = cert.slots.iter().map(|s| s.equation.as_str()).collect();
        assert_eq!(labels, vec!["target(1)", "chain(1,1)", "tau-row", "tau-col"]);
        assert_eq!(cert.tau_variable, Some(1));
        assert!(cert.linear_via_main);
    }

    #[test]
    fn rejects_square_systems() {
        assert!(matches!(
            TargetVariety::new(1, vec![x(1)]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            TargetVariety::new(2, vec![x(1), x(2)]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn three_variable_target() {
        // twisted-cubic-like surface pieces: x1 x3 - x2^2 in R^3
        let g = &(&x(1) * &x(3)) - &x(2).pow(2);
        let target = TargetVariety::new(3, vec![g]).unwrap();
        let (game, cert) = encode_variety(&target).unwrap();
        assert_eq!(game.players(), 1 + 2 + 1 + 3 + 1);
        let pts = vec![vec![q(1), q(2), q(4)], vec![q(0), q(0), q(7)], vec![q(9), q(-3), q(1)]];
        assert!(verify_isomorphism(&target, &game, &cert, &pts).unwrap().passed);
    }

    #[test]
    fn encoded_equations_lie_in_image_with_correct_degrees() {
        let (game, _) = encode_variety(&circle()).unwrap();
        let n = game.players();
        for (k, f) in ci_system(&game).polys.iter().enumerate() {
            let i = k + 1;
            let m = phi_matrix(n, i).unwrap();
            assert_eq!(&m.to_poly(&m.apply(game.tensor(i).unwrap())), f);
            let deg = f.block_degree(n).unwrap().0;
            for (b, &d) in deg[..n - 2].iter().enumerate() {
                assert_eq!(d, if b + 1 == i { 0 } else { 1 });
            }
            assert_eq!(deg[n - 2], if i <= n - 2 { 1 } else { 2 });
        }
    }

    #[test]
    fn product_encoder_paper_game() {
        let game = paper_game();
        let (big, cert) = encode_product_r1(&game).unwrap();
        assert_eq!(big.players(), 5);
        let sys = ci_system(&big);
        let sig = prod(&[s(1, 2), s(2, 2), s(3, 2)]);
        assert!(sys.polys[3].proportional(&(&(&sig * &t(2, 2)) * &tau_row())).is_some());
        assert!(sys.polys[4].proportional(&(&(&sig * &t(2, 2)) * &tau_col())).is_some());
        for i in 1..=3 {
            let g = nash_to_sigma(&nash_polynomial(&game, i).unwrap()).dehomogenize();
            assert!(sys.polys[i - 1].dehomogenize().proportional(&g).is_some());
        }
        assert_eq!(cert.slots.len(), 5);
    }

    #[test]
    fn product_encoder_zero_game() {
        let (big, _) = encode_product_r1(&Game::zero(3)).unwrap();
        let eqs = decode_open_subset(&big);
        assert!(eqs[..3].iter().all(MultiPoly::is_zero));
        assert!(!eqs[3].is_zero());
    }

    #[test]
    fn decode_zero_and_paper() {
        assert!(decode_open_subset(&Game::zero(4)).iter().all(MultiPoly::is_zero));
        let eqs = decode_open_subset(&paper_game());
        let f1 = &linear_form(&[(6, VarId::tau(1, 1)), (-5, VarId::tau(1, 2)), (-2, VarId::tau(2, 1))]) + &MultiPoly::integer(7);
        assert_eq!(eqs[0], f1);
    }

    #[test]
    fn certificate_and_target_json_round_trip() {
        let (_, cert) = encode_variety(&circle()).unwrap();
        assert_eq!(EncodingCertificate::from_json(&cert.to_json()).unwrap(), cert);
        let t = circle();
        assert_eq!(TargetVariety::from_json(&t.to_json()).unwrap(), t);
        let pts = circle_points(&[q(2)]);
        assert_eq!(samples_from_json(&samples_to_json(&pts)).unwrap(), pts);
    }

    #[test]
    fn padding_examples() {
        let eq = &s(3, 1) - &t(1, 1);
        let padded = pad_equation(&eq, Some(1), 5, 1).unwrap();
        assert_eq!(padded, printed_circle()[0]);
        assert!(matches!(pad_equation(&s(1, 1), Some(1), 5, 1), Err(Error::MatchingFailure(_))));
    }
}
