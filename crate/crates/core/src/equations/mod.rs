//! Quadratic equations over a free group and their standard form.
//!
//! A raw equation is a word in variables (each occurring exactly twice, with
//! either sign) and constants, equated to 1. [`normalize`] rewrites it into
//! standard form — a product of commutators or squares followed by
//! conjugated coefficients and a final coefficient — while recording every
//! change of variables so that solutions transport in both directions.

mod normalize;
mod parse;

pub use normalize::{normalize, BackMap, StdAssignment, TransportError};
pub use parse::{parse_equation, ParseError};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{free_reduce, Alphabet, CyclicWord, Letter, Sign, Word};

/// One symbol of a raw equation body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Token {
    Variable(String, Sign),
    Constant(Letter),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquationError {
    #[error("variable {0} occurs {1} times, expected exactly 2")]
    NotQuadratic(String, usize),
    #[error("variable {0} clashes with a constant letter")]
    SymbolClash(String),
    #[error("constant {0:?} is not in the alphabet")]
    UnknownConstant(char),
    #[error("missing assignment for variable {0}")]
    MissingAssignment(String),
}

/// A quadratic equation as written: `body = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEquation {
    alphabet: Alphabet,
    /// Variable names in order of first occurrence.
    variables: Vec<String>,
    body: Vec<Token>,
}

impl RawEquation {
    /// Validates the quadratic condition and the variable/constant symbol
    /// separation.
    pub fn new(alphabet: Alphabet, body: Vec<Token>) -> Result<RawEquation, EquationError> {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for token in &body {
            match token {
                Token::Variable(name, _) => {
                    match counts.iter_mut().find(|(n, _)| n == name) {
                        Some((_, c)) => *c += 1,
                        None => counts.push((name.clone(), 1)),
                    }
                    let mut chars = name.chars();
                    if let (Some(c), None) = (chars.next(), chars.next()) {
                        if alphabet.contains(c.to_ascii_lowercase() as u8) {
                            return Err(EquationError::SymbolClash(name.clone()));
                        }
                    }
                }
                Token::Constant(l) => {
                    if !alphabet.contains(l.sym) {
                        return Err(EquationError::UnknownConstant(l.sym as char));
                    }
                }
            }
        }
        for (name, count) in &counts {
            if *count != 2 {
                return Err(EquationError::NotQuadratic(name.clone(), *count));
            }
        }
        let variables = counts.into_iter().map(|(n, _)| n).collect();
        Ok(RawEquation { alphabet, variables, body })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn body(&self) -> &[Token] {
        &self.body
    }

    /// True iff substituting the assignment and freely reducing yields the
    /// empty word.
    pub fn check_solution(
        &self,
        assignment: &HashMap<String, Word>,
    ) -> Result<bool, EquationError> {
        let mut letters: Vec<Letter> = Vec::new();
        for token in &self.body {
            match token {
                Token::Variable(name, sign) => {
                    let value = assignment
                        .get(name)
                        .ok_or_else(|| EquationError::MissingAssignment(name.clone()))?;
                    let piece = match sign {
                        Sign::Plus => value.clone(),
                        Sign::Minus => value.inverse(),
                    };
                    letters.extend_from_slice(piece.letters());
                }
                Token::Constant(l) => letters.push(*l),
            }
        }
        Ok(free_reduce(letters).is_empty())
    }
}

impl Serialize for RawEquation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            alphabet: &'a Alphabet,
            body: Vec<(String, i8)>,
        }
        let body = self
            .body
            .iter()
            .map(|t| match t {
                Token::Variable(name, sign) => (name.clone(), sign.as_i8()),
                Token::Constant(l) => (String::from(l.sym as char), l.sign.as_i8()),
            })
            .collect();
        Repr { alphabet: &self.alphabet, body }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RawEquation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<RawEquation, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            alphabet: Alphabet,
            body: Vec<(String, i64)>,
        }
        let repr = Repr::deserialize(d)?;
        let mut body = Vec::with_capacity(repr.body.len());
        for (name, sign) in repr.body {
            let sign = Sign::from_i64(sign)
                .ok_or_else(|| serde::de::Error::custom("sign must be 1 or -1"))?;
            let mut chars = name.chars();
            let token = match (chars.next(), chars.next()) {
                (Some(c), None)
                    if c.is_ascii_lowercase() && repr.alphabet.contains(c as u8) =>
                {
                    Token::Constant(Letter::new(c as u8, sign))
                }
                _ => Token::Variable(name, sign),
            };
            body.push(token);
        }
        RawEquation::new(repr.alphabet, body).map_err(serde::de::Error::custom)
    }
}

/// An equation in standard form. The shape is implicit: `genus` commutator
/// blocks (orientable) or squared variables (non-orientable), one conjugated
/// coefficient block per entry of `coefficients`, then the last coefficient
/// `d`. The coefficient count `m` counts `coefficients` plus `d`; `d` is
/// absent exactly when `m = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardForm {
    alphabet: Alphabet,
    orientable: bool,
    genus: usize,
    coefficients: Vec<CyclicWord>,
    d: Option<CyclicWord>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StandardFormError {
    #[error("a genus-0 equation must be orientable")]
    GenusZeroNonOrientable,
    #[error("coefficients must be nonempty")]
    EmptyCoefficient,
    #[error("conjugated coefficients require the last coefficient to be present")]
    MissingLast,
}

impl StandardForm {
    pub fn new(
        alphabet: Alphabet,
        orientable: bool,
        genus: usize,
        coefficients: Vec<CyclicWord>,
        d: Option<CyclicWord>,
    ) -> Result<StandardForm, StandardFormError> {
        if genus == 0 && !orientable {
            return Err(StandardFormError::GenusZeroNonOrientable);
        }
        if coefficients.iter().any(|c| c.is_empty()) || d.as_ref().is_some_and(|d| d.is_empty()) {
            return Err(StandardFormError::EmptyCoefficient);
        }
        if d.is_none() && !coefficients.is_empty() {
            return Err(StandardFormError::MissingLast);
        }
        Ok(StandardForm { alphabet, orientable, genus, coefficients, d })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn orientable(&self) -> bool {
        self.orientable
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// The conjugated coefficients w₁ … w₍ₘ₋₁₎.
    pub fn coefficients(&self) -> &[CyclicWord] {
        &self.coefficients
    }

    /// The last coefficient, absent iff `m = 0`.
    pub fn last_coefficient(&self) -> Option<&CyclicWord> {
        self.d.as_ref()
    }

    /// Number of coefficients including the last one.
    pub fn coefficient_count(&self) -> usize {
        self.coefficients.len() + usize::from(self.d.is_some())
    }

    /// 2−2g for orientable equations, 2−g otherwise.
    pub fn reduced_euler_characteristic(&self) -> i64 {
        let g = self.genus as i64;
        if self.orientable {
            2 - 2 * g
        } else {
            2 - g
        }
    }

    /// Is every variable trivially assignable? Holds exactly for m = 0.
    pub fn trivially_solvable(&self) -> bool {
        self.coefficient_count() == 0
    }

    /// The equation body as signed tokens: standard variables interleaved
    /// with coefficient letters. Variables are indexed (kind, i).
    pub fn body(&self) -> Vec<StdToken> {
        let mut out = Vec::new();
        for i in 0..self.genus {
            if self.orientable {
                out.push(StdToken::Var(StdVar::X(i), Sign::Minus));
                out.push(StdToken::Var(StdVar::Y(i), Sign::Minus));
                out.push(StdToken::Var(StdVar::X(i), Sign::Plus));
                out.push(StdToken::Var(StdVar::Y(i), Sign::Plus));
            } else {
                out.push(StdToken::Var(StdVar::X(i), Sign::Plus));
                out.push(StdToken::Var(StdVar::X(i), Sign::Plus));
            }
        }
        for (j, w) in self.coefficients.iter().enumerate() {
            out.push(StdToken::Var(StdVar::Z(j), Sign::Minus));
            for &l in w.representative().letters() {
                out.push(StdToken::Const(l));
            }
            out.push(StdToken::Var(StdVar::Z(j), Sign::Plus));
        }
        if let Some(d) = &self.d {
            for &l in d.representative().letters() {
                out.push(StdToken::Const(l));
            }
        }
        out
    }

    /// True iff the assignment satisfies the equation.
    pub fn check_solution(&self, assignment: &StdAssignment) -> Result<bool, EquationError> {
        let mut letters: Vec<Letter> = Vec::new();
        for token in self.body() {
            match token {
                StdToken::Var(var, sign) => {
                    let value = assignment
                        .get(var)
                        .ok_or_else(|| EquationError::MissingAssignment(var.to_string()))?;
                    let piece = match sign {
                        Sign::Plus => value.clone(),
                        Sign::Minus => value.inverse(),
                    };
                    letters.extend_from_slice(piece.letters());
                }
                StdToken::Const(l) => letters.push(l),
            }
        }
        Ok(free_reduce(letters).is_empty())
    }

    /// Standard variables of this equation, in body order.
    pub fn std_variables(&self) -> Vec<StdVar> {
        let mut vars = Vec::new();
        for i in 0..self.genus {
            vars.push(StdVar::X(i));
            if self.orientable {
                vars.push(StdVar::Y(i));
            }
        }
        for j in 0..self.coefficients.len() {
            vars.push(StdVar::Z(j));
        }
        vars
    }
}

/// A standard-form variable: xᵢ/yᵢ from the genus part, zⱼ a coefficient
/// conjugator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StdVar {
    X(usize),
    Y(usize),
    Z(usize),
}

impl std::fmt::Display for StdVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StdVar::X(i) => write!(f, "x{}", i + 1),
            StdVar::Y(i) => write!(f, "y{}", i + 1),
            StdVar::Z(j) => write!(f, "z{}", j + 1),
        }
    }
}

impl StdVar {
    pub fn parse(name: &str) -> Option<StdVar> {
        let (kind, idx) = name.split_at(1);
        let i: usize = idx.parse().ok()?;
        if i == 0 {
            return None;
        }
        match kind {
            "x" => Some(StdVar::X(i - 1)),
            "y" => Some(StdVar::Y(i - 1)),
            "z" => Some(StdVar::Z(i - 1)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StdToken {
    Var(StdVar, Sign),
    Const(Letter),
}

impl Serialize for StandardForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            alphabet: &'a Alphabet,
            orientable: bool,
            genus: usize,
            coefficients: Vec<String>,
            #[serde(skip_serializing_if = "Option::is_none")]
            d: Option<String>,
        }
        Repr {
            alphabet: &self.alphabet,
            orientable: self.orientable,
            genus: self.genus,
            coefficients: self.coefficients.iter().map(|c| c.to_string()).collect(),
            d: self.d.as_ref().map(|d| d.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StandardForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<StandardForm, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            alphabet: Alphabet,
            orientable: bool,
            genus: usize,
            #[serde(default)]
            coefficients: Vec<String>,
            #[serde(default)]
            d: Option<String>,
        }
        let repr = Repr::deserialize(d)?;
        let parse_cyclic = |s: &String| -> Result<CyclicWord, D::Error> {
            let word = repr.alphabet.parse_word(s).map_err(serde::de::Error::custom)?;
            Ok(CyclicWord::canonical(&word))
        };
        let coefficients =
            repr.coefficients.iter().map(parse_cyclic).collect::<Result<Vec<_>, _>>()?;
        let last = repr.d.as_ref().map(parse_cyclic).transpose()?;
        StandardForm::new(repr.alphabet, repr.orientable, repr.genus, coefficients, last)
            .map_err(serde::de::Error::custom)
    }
}
