//! Macaulay2 scripts for checking a game's CI curve with an external
//! computer algebra system.
//!
//! Sigma block `l` becomes the pair `x{l}, y{l}` (first and second
//! coordinate); the tau block keeps the names `t11, t12, t21, t22`.

use std::fmt::Write as _;

use num_traits::{One, Signed};

use crate::error::Result;
use crate::game::{Game, StrategyProfile};
use crate::poly::{MultiPoly, VarId};
use crate::spohn::{ci_system, segre_monomial, segre_substitute};

fn m2_name(v: VarId) -> String {
    match v {
        VarId::Sigma { block, idx: 1 } => format!("x{block}"),
        VarId::Sigma { block, .. } => format!("y{block}"),
        other => other.name(),
    }
}

fn m2_poly(p: &MultiPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let mag = c.abs();
        if k == 0 {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let factors: Vec<String> = m
            .pairs()
            .iter()
            .map(|&(v, e)| if e == 1 { m2_name(v) } else { format!("{}^{e}", m2_name(v)) })
            .collect();
        match (factors.is_empty(), mag.is_one()) {
            (true, _) => write!(out, "{mag}").unwrap(),
            (false, true) => out.push_str(&factors.join("*")),
            (false, false) => write!(out, "{mag}*{}", factors.join("*")).unwrap(),
        }
    }
    out
}

/// Script defining the multigraded ring of the model, the ideal of the CI
/// curve, and the commands printing its dimension, degree and genus. The
/// degree and genus are those of the image under the Segre map, i.e. with
/// respect to the hyperplane class.
pub fn export_macaulay2(game: &Game) -> Result<String> {
    let system = ci_system(game);
    system.require_nondegenerate()?;
    let n = game.players();
    let mut s = String::new();
    writeln!(s, "-- CI curve of a {n}-player binary game").unwrap();
    if n == 2 {
        writeln!(s, "S = QQ[t11,t12,t21,t22];").unwrap();
        for (i, f) in system.polys.iter().enumerate() {
            writeln!(s, "F{} = {};", i + 1, m2_poly(&segre_substitute(f))).unwrap();
        }
        writeln!(s, "I = ideal(F1, F2);").unwrap();
        writeln!(s, "print(\"dim \" | toString(dim I - 1));").unwrap();
        writeln!(s, "print(\"degree \" | toString(degree I));").unwrap();
        writeln!(s, "print(\"genus \" | toString(genus(S/I)));").unwrap();
        return Ok(s);
    }
    let blocks = n - 2;
    let mut vars = Vec::new();
    let mut degrees = Vec::new();
    let unit = |k: usize| -> String {
        let v: Vec<&str> = (0..=blocks).map(|j| if j == k { "1" } else { "0" }).collect();
        format!("{{{}}}", v.join(","))
    };
    for l in 1..=blocks {
        vars.push(format!("x{l}"));
        vars.push(format!("y{l}"));
        degrees.push(unit(l - 1));
        degrees.push(unit(l - 1));
    }
    for t in ["t11", "t12", "t21", "t22"] {
        vars.push(t.into());
        degrees.push(unit(blocks));
    }
    writeln!(s, "S = QQ[{}, Degrees => {{{}}}];", vars.join(","), degrees.join(",")).unwrap();
    for (i, f) in system.polys.iter().enumerate() {
        writeln!(s, "F{} = {};", i + 1, m2_poly(f)).unwrap();
    }
    let gens: Vec<String> = (1..=n).map(|i| format!("F{i}")).collect();
    writeln!(s, "I = ideal({});", gens.join(", ")).unwrap();
    let irrelevant: Vec<String> = (1..=blocks)
        .map(|l| format!("ideal(x{l},y{l})"))
        .chain(std::iter::once("ideal(t11,t12,t21,t22)".to_string()))
        .collect();
    writeln!(s, "B = intersect({});", irrelevant.join(", ")).unwrap();
    writeln!(s, "J = saturate(I, B);").unwrap();
    let p: Vec<String> = (0..1usize << n).map(|k| format!("p{k}")).collect();
    writeln!(s, "P = QQ[{}];", p.join(",")).unwrap();
    let images: Vec<String> = StrategyProfile::all(n)
        .map(|prof| m2_poly(&MultiPoly::term(num_traits::One::one(), segre_monomial(&prof))))
        .collect();
    writeln!(s, "phi = map(S/J, P, {{{}}});", images.join(", ")).unwrap();
    writeln!(s, "K = ker phi;").unwrap();
    writeln!(s, "print(\"dim \" | toString(dim K - 1));").unwrap();
    writeln!(s, "print(\"degree \" | toString(degree K));").unwrap();
    writeln!(s, "print(\"genus \" | toString(genus(P/K)));").unwrap();
    Ok(s)
}
