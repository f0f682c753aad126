//! Spohn conditional-independence curves of binary games.
//!
//! For an `n`-player game with binary choices and the undirected graphical
//! model with a single edge between the last two players, the Spohn CI
//! variety lives in the Segre variety `(P^1)^(n-2) x P^3`. This crate builds
//! its defining equations exactly, computes the degree, genus and Euler
//! characteristic of the generic curve, analyses the payoff-to-equation
//! linear maps, samples and solves the three-player case numerically and
//! encodes arbitrary real varieties as games.
//!
//! Module map:
//!
//! - [`game`]: payoff tensors, profiles, JSON and seeded random games
//! - [`poly`]: sparse exact multivariate polynomials in blocked variables
//! - [`spohn`]: Spohn matrices, Nash polynomials and the CI polynomials
//! - [`chow`]: the Chow ring of the Segre variety, degree and canonical degree
//! - [`euler`]: Euler characteristics of line bundles and the arithmetic genus
//! - [`linmap`]: the payoff-to-coefficient maps, exact ranks, preimages
//! - [`encoder`]: universality encoders and isomorphism verification
//! - [`solver`]: three-player Nash equilibria, fiber sampling, degree witness
//! - [`cli`]: command dispatch, Macaulay2 export

pub mod chow;
pub mod cli;
pub mod encoder;
pub mod error;
pub mod euler;
pub mod game;
pub mod linmap;
pub mod m2;
pub mod matching;
pub mod poly;
pub mod solver;
pub mod spohn;

pub use error::{Error, Result};
pub use game::{Game, PayoffTensor, StrategyProfile};
pub use poly::{BlockDegree, Monomial, MultiPoly, Rational, VarId};

/// Parse an exact rational from `"p"` or `"p/q"`. Decimal points and
/// exponents are rejected.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.is_empty() || t.contains(['.', 'e', 'E']) {
        return Err(Error::Format(format!("not an exact rational: {text:?}")));
    }
    let parsed = match t.split_once('/') {
        Some((num, den)) => {
            let num: num_bigint::BigInt = num.trim().parse().map_err(|_| bad_rational(text))?;
            let den: num_bigint::BigInt = den.trim().parse().map_err(|_| bad_rational(text))?;
            if num_traits::Zero::is_zero(&den) {
                return Err(Error::Format(format!("zero denominator in {text:?}")));
            }
            Rational::new(num, den)
        }
        None => Rational::from_integer(t.parse().map_err(|_| bad_rational(text))?),
    };
    Ok(parsed)
}

fn bad_rational(text: &str) -> Error {
    Error::Format(format!("not an exact rational: {text:?}"))
}

/// Parse a JSON value holding an exact rational: a string `"p/q"` or an
/// integer literal. Floating point literals are rejected.
pub fn rational_from_json(value: &serde_json::Value) -> Result<Rational> {
    match value {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(num) => {
            if num.is_i64() || num.is_u64() {
                parse_rational(&num.to_string())
            } else {
                Err(Error::Format(format!(
                    "floating point value {num} rejected; use an exact \"p/q\" string"
                )))
            }
        }
        other => Err(Error::Format(format!("expected a rational, found {other}"))),
    }
}
