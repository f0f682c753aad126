//! Sparse multivariate polynomials over the rationals in blocked variables.
//!
//! Variables come in blocks matching the factors of the Segre variety:
//! `sigma(i)` blocks with coordinates `s{i}_1, s{i}_2`, the `tau` block
//! `t11, t12, t21, t22`, and joint-probability coordinates `p{j_1...j_n}`.
//! Nash polynomials use their own per-player blocks `u{i}_1, u{i}_2` and
//! target varieties use affine coordinates `x{i}`.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose order is
//! graded lexicographic with variables ordered by block then index. Printing
//! walks the map from the largest monomial down.

mod resultant;
pub mod univariate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::StrategyProfile;

pub use resultant::{determinant, resultant, sylvester_matrix};
pub use univariate::UniPoly;

pub type Rational = BigRational;

/// A polynomial variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    /// `sigma^(block)_idx`, coordinates of the `block`-th `P^1` factor.
    Sigma { block: u32, idx: u8 },
    /// `tau_{row,col}`, coordinates of the `P^3` factor.
    Tau { row: u8, col: u8 },
    /// `p_{j_1...j_n}` stored as the canonical profile index.
    P { players: u8, index: u32 },
    /// `sigma~^(player)_idx`, coordinates of the Nash Segre variety `(P^1)^n`.
    Nash { player: u32, idx: u8 },
    /// Affine coordinate `x_index` of a target variety.
    Affine { index: u32 },
}

impl VarId {
    pub fn sigma(block: usize, idx: u8) -> Self {
        VarId::Sigma { block: block as u32, idx }
    }

    pub fn tau(row: u8, col: u8) -> Self {
        VarId::Tau { row, col }
    }

    pub fn p(players: usize, index: usize) -> Self {
        VarId::P { players: players as u8, index: index as u32 }
    }

    pub fn nash(player: usize, idx: u8) -> Self {
        VarId::Nash { player: player as u32, idx }
    }

    pub fn affine(index: usize) -> Self {
        VarId::Affine { index: index as u32 }
    }

    /// All four tau coordinates in the order `t11, t12, t21, t22`.
    pub fn taus() -> [VarId; 4] {
        [
            VarId::tau(1, 1),
            VarId::tau(1, 2),
            VarId::tau(2, 1),
            VarId::tau(2, 2),
        ]
    }

    pub fn name(&self) -> String {
        match *self {
            VarId::Sigma { block, idx } => format!("s{block}_{idx}"),
            VarId::Tau { row, col } => format!("t{row}{col}"),
            VarId::P { players, index } => {
                format!("p{}", StrategyProfile::from_index(players as usize, index as usize))
            }
            VarId::Nash { player, idx } => format!("u{player}_{idx}"),
            VarId::Affine { index } => format!("x{index}"),
        }
    }

    pub fn parse(name: &str) -> Result<VarId> {
        let bad = || Error::Format(format!("unknown variable name {name:?}"));
        let (head, rest) = name.split_at(name.char_indices().nth(1).map(|(i, _)| i).ok_or_else(bad)?);
        let block_idx = |rest: &str| -> Result<(u32, u8)> {
            let (b, i) = rest.split_once('_').ok_or_else(bad)?;
            let b: u32 = b.parse().map_err(|_| bad())?;
            let i: u8 = i.parse().map_err(|_| bad())?;
            if b == 0 || !(1..=2).contains(&i) {
                return Err(bad());
            }
            Ok((b, i))
        };
        match head {
            "s" => block_idx(rest).map(|(block, idx)| VarId::Sigma { block, idx }),
            "u" => block_idx(rest).map(|(player, idx)| VarId::Nash { player, idx }),
            "t" => {
                let digits: Vec<u8> = rest.bytes().map(|b| b.wrapping_sub(b'0')).collect();
                match digits.as_slice() {
                    [r @ 1..=2, c @ 1..=2] => Ok(VarId::tau(*r, *c)),
                    _ => Err(bad()),
                }
            }
            "p" => {
                let profile = StrategyProfile::parse(rest).map_err(|_| bad())?;
                Ok(VarId::p(profile.len(), profile.index()))
            }
            "x" => {
                let index: u32 = rest.parse().map_err(|_| bad())?;
                if index == 0 {
                    return Err(bad());
                }
                Ok(VarId::Affine { index })
            }
            _ => Err(bad()),
        }
    }

    /// The homogeneity block this variable belongs to, if any.
    pub fn block(&self) -> Option<Block> {
        match *self {
            VarId::Sigma { block, .. } => Some(Block::Sigma(block)),
            VarId::Tau { .. } => Some(Block::Tau),
            VarId::P { .. } => Some(Block::P),
            VarId::Nash { player, .. } => Some(Block::Nash(player)),
            VarId::Affine { .. } => None,
        }
    }

    /// Whether this coordinate is set to one in the affine chart
    /// `sigma_2 = tau_22 = 1` (also `sigma~_2 = 1` for Nash coordinates).
    pub fn is_chart_unit(&self) -> bool {
        matches!(
            self,
            VarId::Sigma { idx: 2, .. } | VarId::Nash { idx: 2, .. } | VarId::Tau { row: 2, col: 2 }
        )
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Sigma(u32),
    Tau,
    P,
    Nash(u32),
}

/// Per-block degrees `(d_1, ..., d_{n-1})`: one entry for each sigma block
/// followed by the tau degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockDegree(pub Vec<u32>);

impl BlockDegree {
    pub fn add(&self, other: &BlockDegree) -> BlockDegree {
        BlockDegree(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for BlockDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A monomial: sorted `(variable, exponent)` pairs with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn product(vars: &[VarId]) -> Self {
        Monomial::from_pairs(vars.iter().map(|&v| (v, 1)))
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.0.clone();
        for &(v, e) in &other.0 {
            let pos = out.binary_search_by(|(w, _)| w.cmp(&v)).ok()?;
            if out[pos].1 < e {
                return None;
            }
            out[pos].1 -= e;
        }
        out.retain(|&(_, e)| e > 0);
        Some(Monomial(out))
    }

    /// Remove `v` entirely, returning its exponent and the remaining monomial.
    pub fn split_off(&self, v: VarId) -> (u32, Monomial) {
        let e = self.exponent(v);
        (e, Monomial(self.0.iter().copied().filter(|&(w, _)| w != v).collect()))
    }

    pub fn block_degrees(&self) -> BTreeMap<Block, u32> {
        let mut out = BTreeMap::new();
        for &(v, e) in &self.0 {
            if let Some(b) = v.block() {
                *out.entry(b).or_insert(0) += e;
            }
        }
        out
    }

    pub fn eval_f64(&self, values: &HashMap<VarId, f64>) -> Option<f64> {
        self.0.iter().try_fold(1.0, |acc, &(v, e)| {
            values.get(&v).map(|x| acc * x.powi(e as i32))
        })
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: higher total degree is larger; ties are broken
    /// by the first variable (in block order) whose exponent differs.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match self.degree().cmp(&other.degree()) {
            Equal => {}
            ord => return ord,
        }
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.0.cmp(&b.0) {
                Less => return Greater,
                Greater => return Less,
                Equal => match a.1.cmp(&b.1) {
                    Equal => continue,
                    ord => return ord,
                },
            }
        }
        self.0.len().cmp(&other.0.len()).reverse()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(v, e)| if e == 1 { v.name() } else { format!("{}^{e}", v.name()) })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// A sparse polynomial with exact rational coefficients and no zero terms.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        MultiPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        MultiPoly::term(c, Monomial::one())
    }

    pub fn integer(c: i64) -> Self {
        MultiPoly::constant(Rational::from_integer(c.into()))
    }

    pub fn var(v: VarId) -> Self {
        MultiPoly::term(Rational::one(), Monomial::var(v))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = MultiPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Add `c * m` in place.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Constant term (the coefficient of the empty monomial).
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms
            .keys()
            .flat_map(|m| m.pairs().iter().map(|&(v, _)| v))
            .collect()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        (0..e).fold(MultiPoly::one(), |acc, _| &acc * self)
    }

    /// Exact value at a rational assignment covering every variable.
    pub fn evaluate(&self, assignment: &HashMap<VarId, Rational>) -> Result<Rational> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for &(var, e) in m.pairs() {
                let x = assignment
                    .get(&var)
                    .ok_or_else(|| Error::MissingVariable(var.name()))?;
                v *= num_traits::pow(x.clone(), e as usize);
            }
            total += v;
        }
        Ok(total)
    }

    pub fn eval_f64(&self, values: &HashMap<VarId, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mv = m
                .eval_f64(values)
                .ok_or_else(|| Error::MissingVariable(self.first_missing(values)))?;
            total += c.to_f64().unwrap_or(f64::NAN) * mv;
        }
        Ok(total)
    }

    /// `sum |c_t| * |m_t(x)|`, the scale against which residuals are judged.
    pub fn abs_eval_f64(&self, values: &HashMap<VarId, f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mv = m
                .eval_f64(values)
                .ok_or_else(|| Error::MissingVariable(self.first_missing(values)))?;
            total += c.to_f64().unwrap_or(f64::NAN).abs() * mv.abs();
        }
        Ok(total)
    }

    fn first_missing(&self, values: &HashMap<VarId, f64>) -> String {
        self.variables()
            .into_iter()
            .find(|v| !values.contains_key(v))
            .map(|v| v.name())
            .unwrap_or_default()
    }

    /// Replace variables by polynomials; unmapped variables stay.
    pub fn substitute(&self, map: &HashMap<VarId, MultiPoly>) -> MultiPoly {
        let mut out = MultiPoly::zero();
        let mut power_cache: HashMap<(VarId, u32), MultiPoly> = HashMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = MultiPoly::constant(c.clone());
            for &(v, e) in m.pairs() {
                match map.get(&v) {
                    Some(p) => {
                        let pe = power_cache.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                        factor = &factor * &pe;
                    }
                    None => kept.push((v, e)),
                }
            }
            out = &out + &factor.mul_monomial(&Monomial::from_pairs(kept));
        }
        out
    }

    pub fn substitute_var(&self, v: VarId, p: &MultiPoly) -> MultiPoly {
        self.substitute(&HashMap::from([(v, p.clone())]))
    }

    /// Restrict to the affine chart `sigma^(i)_2 = 1` for every sigma block
    /// and `tau_22 = 1` (Nash coordinates `sigma~^(i)_2` likewise).
    pub fn dehomogenize(&self) -> MultiPoly {
        MultiPoly::from_terms(self.terms.iter().map(|(m, c)| {
            let kept = m.pairs().iter().copied().filter(|(v, _)| !v.is_chart_unit());
            (Monomial::from_pairs(kept), c.clone())
        }))
    }

    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// The coefficient polynomial of `v^k`.
    pub fn coeff_of_power(&self, v: VarId, k: u32) -> MultiPoly {
        MultiPoly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let (e, rest) = m.split_off(v);
            (e == k).then(|| (rest, c.clone()))
        }))
    }

    pub fn derivative(&self, v: VarId) -> MultiPoly {
        MultiPoly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let (e, rest) = m.split_off(v);
            (e > 0).then(|| {
                let m2 = rest.mul(&Monomial::from_pairs([(v, e - 1)]));
                (m2, c * Rational::from_integer(e.into()))
            })
        }))
    }

    /// Convert to a univariate polynomial in `v`; fails if any other
    /// variable occurs.
    pub fn to_univariate(&self, v: VarId) -> Option<UniPoly> {
        let mut coeffs = vec![Rational::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            if !rest.is_one() {
                return None;
            }
            coeffs[e as usize] += c;
        }
        Some(UniPoly::new(coeffs))
    }

    pub fn from_univariate(u: &UniPoly, v: VarId) -> MultiPoly {
        MultiPoly::from_terms(
            u.coeffs()
                .iter()
                .enumerate()
                .map(|(e, c)| (Monomial::from_pairs([(v, e as u32)]), c.clone())),
        )
    }

    /// Degrees per homogeneity block, failing if the terms disagree.
    pub fn block_degrees(&self) -> Result<BTreeMap<Block, u32>> {
        let mut iter = self.terms.keys();
        let first = match iter.next() {
            Some(m) => m.block_degrees(),
            None => return Ok(BTreeMap::new()),
        };
        for m in iter {
            let bd = m.block_degrees();
            let blocks: BTreeSet<&Block> = first.keys().chain(bd.keys()).collect();
            for b in blocks {
                let (x, y) = (first.get(b).unwrap_or(&0), bd.get(b).unwrap_or(&0));
                if x != y {
                    return Err(Error::NotMultiHomogeneous(format!(
                        "terms have degree {x} and {y} in block {b:?}"
                    )));
                }
            }
        }
        Ok(first)
    }

    /// Multidegree on `(P^1)^(n-2) x P^3`: the degree in each of the `n-2`
    /// sigma blocks followed by the tau degree. For `n = 2` the ambient space
    /// is the `P^3` of joint probabilities, so `p` coordinates count towards
    /// the final entry.
    pub fn block_degree(&self, players: usize) -> Result<BlockDegree> {
        if self.is_zero() {
            return Err(Error::NotMultiHomogeneous("zero polynomial has no multidegree".into()));
        }
        let degrees = self.block_degrees()?;
        let sigma_blocks = players.saturating_sub(2);
        let mut out = vec![0u32; sigma_blocks + 1];
        for (b, d) in degrees {
            match b {
                Block::Sigma(i) if (i as usize) <= sigma_blocks => out[i as usize - 1] = d,
                Block::Tau => out[sigma_blocks] += d,
                Block::P if players == 2 => out[sigma_blocks] += d,
                other => {
                    return Err(Error::NotMultiHomogeneous(format!(
                        "block {other:?} does not belong to the {players}-player Segre variety"
                    )))
                }
            }
        }
        Ok(BlockDegree(out))
    }

    /// `Some(c)` with `self = c * other` and `c != 0`, if such `c` exists.
    /// Two zero polynomials are proportional with factor one.
    pub fn proportional(&self, other: &MultiPoly) -> Option<Rational> {
        if self.is_zero() || other.is_zero() {
            return (self.is_zero() && other.is_zero()).then(Rational::one);
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let (m0, a0) = self.terms.iter().next()?;
        let ratio = a0 / other.terms.get(m0)?;
        self.terms
            .iter()
            .all(|(m, a)| other.terms.get(m).is_some_and(|b| &(b * &ratio) == a))
            .then_some(ratio)
    }

    /// Exact quotient `self / divisor` when the division leaves no remainder.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Option<MultiPoly> {
        let (lm, lc) = divisor.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quotient = MultiPoly::zero();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.div(&lm)?;
            let qc = c / &lc;
            let step = MultiPoly::term(qc, qm);
            rem = &rem - &(&step * divisor);
            quotient = &quotient + &step;
        }
        Some(quotient)
    }

    /// Rational content made primitive: returns `(c, q)` with `self = c * q`,
    /// `q` having coprime integer coefficients and a positive leading term.
    pub fn primitive_part(&self) -> (Rational, MultiPoly) {
        if self.is_zero() {
            return (Rational::one(), MultiPoly::zero());
        }
        let den_lcm = self
            .terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num_gcd = self
            .terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(&(c.numer() * (&den_lcm / c.denom()))));
        let mut content = Rational::new(num_gcd, den_lcm);
        if self.leading_term().is_some_and(|(_, c)| c.is_negative()) {
            content = -content;
        }
        let q = self.scale(&content.recip());
        (content, q)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .rev()
                .map(|(m, c)| {
                    let vars: serde_json::Map<String, Value> = m
                        .pairs()
                        .iter()
                        .map(|&(v, e)| (v.name(), json!(e)))
                        .collect();
                    json!({"coeff": c.to_string(), "vars": vars})
                })
                .collect(),
        )
    }

    pub fn from_json(value: &Value) -> Result<MultiPoly> {
        let terms = value
            .as_array()
            .ok_or_else(|| Error::Format("polynomial must be an array of terms".into()))?;
        let mut p = MultiPoly::zero();
        for t in terms {
            let c = crate::rational_from_json(
                t.get("coeff")
                    .ok_or_else(|| Error::Format("term without \"coeff\"".into()))?,
            )?;
            let mut pairs = Vec::new();
            if let Some(vars) = t.get("vars") {
                let vars = vars
                    .as_object()
                    .ok_or_else(|| Error::Format("\"vars\" must be an object".into()))?;
                for (name, e) in vars {
                    let e = e
                        .as_u64()
                        .ok_or_else(|| Error::Format(format!("bad exponent for {name}")))?;
                    pairs.push((VarId::parse(name)?, e as u32));
                }
            }
            p.add_term(Monomial::from_pairs(pairs), c);
        }
        Ok(p)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            match (k, sign) {
                (0, "-") => f.write_str("-")?,
                (0, _) => {}
                (_, s) => write!(f, " {s} ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: MultiPoly) -> MultiPoly {
        &self + &rhs
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        &self - &rhs
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

/// `sum_k c_k * v_k` with integer coefficients; handy for tests and tables.
pub fn linear_form(coeffs: &[(i64, VarId)]) -> MultiPoly {
    MultiPoly::from_terms(
        coeffs
            .iter()
            .map(|&(c, v)| (Monomial::var(v), Rational::from_integer(c.into()))),
    )
}
