//! Binary `n`-player games with exact rational payoffs.
//!
//! Payoff entries are stored in the canonical row-major order: the profile
//! `(j_1, ..., j_n)` with every `j_k` in `{1, 2}` has index
//! `sum_k (j_k - 1) * 2^(n - k)`, so `j_n` varies fastest.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::Rational;
use crate::{parse_rational, rational_from_json};

/// Name of the positional payoff order accepted in game files.
pub const ROW_MAJOR_LAST_FASTEST: &str = "rowMajorLastFastest";

/// A pure strategy profile `(j_1, ..., j_n)` with entries in `{1, 2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(Vec<u8>);

impl StrategyProfile {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|&&j| j != 1 && j != 2) {
            return Err(Error::InvalidProfile(format!(
                "entry {bad} is not a binary strategy (expected 1 or 2)"
            )));
        }
        Ok(StrategyProfile(entries))
    }

    /// The profile at canonical index `index` among the `2^n` profiles.
    pub fn from_index(n: usize, index: usize) -> Self {
        debug_assert!(index < 1 << n);
        StrategyProfile(
            (0..n)
                .map(|k| 1 + ((index >> (n - 1 - k)) & 1) as u8)
                .collect(),
        )
    }

    /// Parse a label such as `"121"`.
    pub fn parse(label: &str) -> Result<Self> {
        let entries = label
            .trim()
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::InvalidProfile(format!(
                    "label {label:?} contains {c:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        if entries.is_empty() {
            return Err(Error::InvalidProfile("empty label".into()));
        }
        Ok(StrategyProfile(entries))
    }

    pub fn all(n: usize) -> impl Iterator<Item = StrategyProfile> {
        (0..1usize << n).map(move |idx| StrategyProfile::from_index(n, idx))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    /// Strategy of player `player` (1-based).
    pub fn get(&self, player: usize) -> u8 {
        self.0[player - 1]
    }

    /// Copy of this profile with player `player` switched to `strategy`.
    pub fn with(&self, player: usize, strategy: u8) -> Self {
        let mut entries = self.0.clone();
        entries[player - 1] = strategy;
        StrategyProfile(entries)
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &j| (acc << 1) | (j as usize - 1))
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|j| char::from(b'0' + j)).collect()
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The payoff table `X^(i)` of one player: `2^n` exact rationals in
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayoffTensor {
    n: usize,
    values: Vec<Rational>,
}

impl PayoffTensor {
    pub fn new(n: usize, values: Vec<Rational>) -> Result<Self> {
        if values.len() != 1 << n {
            return Err(Error::InvalidGame(format!(
                "payoff table has {} entries, expected 2^{n} = {}",
                values.len(),
                1usize << n
            )));
        }
        Ok(PayoffTensor { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        PayoffTensor {
            n,
            values: vec![Rational::zero(); 1 << n],
        }
    }

    /// Tensor with a single entry equal to one.
    pub fn unit(n: usize, index: usize) -> Self {
        let mut t = PayoffTensor::zeros(n);
        t.values[index] = Rational::from_integer(1.into());
        t
    }

    /// Build from `(label, value)` pairs; every profile must appear once.
    pub fn from_labeled(n: usize, entries: &[(StrategyProfile, Rational)]) -> Result<Self> {
        let mut slots: Vec<Option<Rational>> = vec![None; 1 << n];
        for (profile, value) in entries {
            if profile.len() != n {
                return Err(Error::InvalidProfile(format!(
                    "profile {profile} has {} entries, expected {n}",
                    profile.len()
                )));
            }
            let slot = &mut slots[profile.index()];
            if slot.is_some() {
                return Err(Error::InvalidGame(format!("duplicate profile label {profile}")));
            }
            *slot = Some(value.clone());
        }
        let values = slots
            .into_iter()
            .enumerate()
            .map(|(idx, v)| {
                v.ok_or_else(|| {
                    Error::InvalidGame(format!(
                        "missing profile label {}",
                        StrategyProfile::from_index(n, idx)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PayoffTensor { n, values })
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at(&self, profile: &StrategyProfile) -> &Rational {
        &self.values[profile.index()]
    }

    pub fn at_index(&self, index: usize) -> &Rational {
        &self.values[index]
    }

    pub fn set(&mut self, profile: &StrategyProfile, value: Rational) {
        self.values[profile.index()] = value;
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &PayoffTensor) -> PayoffTensor {
        PayoffTensor {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> PayoffTensor {
        PayoffTensor {
            n: self.n,
            values: self.values.iter().map(|a| a * c).collect(),
        }
    }
}

/// An `n`-player binary game: one payoff tensor per player.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    n: usize,
    tensors: Vec<PayoffTensor>,
}

impl Game {
    /// Build a game from `n` positional payoff lists in canonical order.
    pub fn new(n: usize, payoffs: Vec<Vec<Rational>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGame(format!("need at least 2 players, got {n}")));
        }
        if payoffs.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} payoff tables supplied for {n} players",
                payoffs.len()
            )));
        }
        let tensors = payoffs
            .into_iter()
            .map(|values| PayoffTensor::new(n, values))
            .collect::<Result<Vec<_>>>()?;
        Ok(Game { n, tensors })
    }

    /// Build a game from explicitly labelled entries, one list per player.
    pub fn from_labeled(n: usize, payoffs: &[Vec<(StrategyProfile, Rational)>]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGame(format!("need at least 2 players, got {n}")));
        }
        if payoffs.len() != n {
            return Err(Error::InvalidGame(format!(
                "{} payoff tables supplied for {n} players",
                payoffs.len()
            )));
        }
        let tensors = payoffs
            .iter()
            .map(|entries| PayoffTensor::from_labeled(n, entries))
            .collect::<Result<Vec<_>>>()?;
        Ok(Game { n, tensors })
    }

    pub fn from_tensors(tensors: Vec<PayoffTensor>) -> Result<Self> {
        let n = tensors.len();
        if n < 2 {
            return Err(Error::InvalidGame(format!("need at least 2 players, got {n}")));
        }
        if let Some(t) = tensors.iter().find(|t| t.n != n) {
            return Err(Error::InvalidGame(format!(
                "tensor for {} players in a {n}-player game",
                t.n
            )));
        }
        Ok(Game { n, tensors })
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 2, "games need at least two players");
        Game {
            n,
            tensors: vec![PayoffTensor::zeros(n); n],
        }
    }

    /// Seeded random game with integer payoffs uniform in `[-bound, bound]`.
    /// Tensors that come out constant are redrawn.
    pub fn random(n: usize, seed: u64, bound: u64) -> Self {
        assert!(n >= 2, "games need at least two players");
        let bound = bound.max(1) as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tensors = (0..n)
            .map(|_| loop {
                let values: Vec<Rational> = (0..1usize << n)
                    .map(|_| Rational::from_integer(rng.random_range(-bound..=bound).into()))
                    .collect();
                let tensor = PayoffTensor { n, values };
                if !tensor.is_constant() {
                    break tensor;
                }
            })
            .collect();
        Game { n, tensors }
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn tensors(&self) -> &[PayoffTensor] {
        &self.tensors
    }

    /// Payoff table of player `player` (1-based).
    pub fn tensor(&self, player: usize) -> Result<&PayoffTensor> {
        self.check_player(player)?;
        Ok(&self.tensors[player - 1])
    }

    pub fn with_tensor(&self, player: usize, tensor: PayoffTensor) -> Result<Game> {
        self.check_player(player)?;
        let mut g = self.clone();
        g.tensors[player - 1] = tensor;
        Ok(g)
    }

    /// `X^(player)_{j_1...j_n}`.
    pub fn payoff_at(&self, player: usize, profile: &StrategyProfile) -> Result<&Rational> {
        self.check_player(player)?;
        if profile.len() != self.n {
            return Err(Error::InvalidProfile(format!(
                "profile {profile} has {} entries for a {}-player game",
                profile.len(),
                self.n
            )));
        }
        Ok(self.tensors[player - 1].at(profile))
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player == 0 || player > self.n {
            return Err(Error::PlayerOutOfRange {
                index: player,
                players: self.n,
            });
        }
        Ok(())
    }

    /// Largest absolute payoff, used to scale numerical tolerances.
    pub fn max_abs_payoff(&self) -> Rational {
        self.tensors
            .iter()
            .flat_map(|t| t.values.iter())
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Labelled JSON form: every entry carries its profile label.
    pub fn to_json(&self) -> Value {
        let payoffs: Vec<Value> = self
            .tensors
            .iter()
            .map(|t| {
                Value::Array(
                    StrategyProfile::all(self.n)
                        .map(|p| json!({"profile": p.label(), "value": t.at(&p).to_string()}))
                        .collect(),
                )
            })
            .collect();
        json!({"players": self.n, "payoffs": payoffs})
    }

    /// Parse either the labelled form or the positional form with
    /// `"order": "rowMajorLastFastest"`.
    pub fn from_json(value: &Value) -> Result<Game> {
        let n = value
            .get("players")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Format("missing integer field \"players\"".into()))?
            as usize;
        if !(2..=24).contains(&n) {
            return Err(Error::InvalidGame(format!("unsupported player count {n}")));
        }
        let tables = value
            .get("payoffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("missing array field \"payoffs\"".into()))?;
        let order = value.get("order").and_then(Value::as_str);
        match order {
            Some(ROW_MAJOR_LAST_FASTEST) => {
                let lists = tables
                    .iter()
                    .map(|table| {
                        table
                            .as_array()
                            .ok_or_else(|| Error::Format("payoff table must be an array".into()))?
                            .iter()
                            .map(rational_from_json)
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Game::new(n, lists)
            }
            Some(other) => Err(Error::Format(format!("unknown payoff order {other:?}"))),
            None => {
                let labeled = tables
                    .iter()
                    .map(|table| {
                        table
                            .as_array()
                            .ok_or_else(|| Error::Format("payoff table must be an array".into()))?
                            .iter()
                            .map(|entry| {
                                let label = entry
                                    .get("profile")
                                    .and_then(Value::as_str)
                                    .ok_or_else(|| Error::Format("entry without \"profile\"".into()))?;
                                let val = entry
                                    .get("value")
                                    .ok_or_else(|| Error::Format("entry without \"value\"".into()))?;
                                Ok((StrategyProfile::parse(label)?, rational_from_json(val)?))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Game::from_labeled(n, &labeled)
            }
        }
    }

    pub fn from_json_str(text: &str) -> Result<Game> {
        Game::from_json(&serde_json::from_str(text)?)
    }
}

/// Parse a whitespace separated row of rationals, e.g. `"0 6 11 1"`.
pub fn parse_row(row: &str) -> Result<Vec<Rational>> {
    row.split_whitespace().map(parse_rational).collect()
}
