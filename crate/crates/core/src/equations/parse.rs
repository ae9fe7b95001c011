//! Text-form equation parser.
//!
//! Grammar: whitespace-separated tokens, each `NAME` or `NAME^-1`, closed by
//! the literal suffix `= 1`. A single-lowercase-letter name that belongs to
//! the declared alphabet is a constant; every other name is a variable.

use thiserror::Error;

use super::{EquationError, RawEquation, Token};
use crate::words::{Alphabet, Letter, Sign};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error(transparent)]
    Equation(#[from] EquationError),
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { position, message: message.into() }
}

/// Parses the CLI text form of a raw quadratic equation.
pub fn parse_equation(text: &str, alphabet: &Alphabet) -> Result<RawEquation, ParseError> {
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut rest = text;
    let mut offset = 0;
    while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
        let token_start = offset + start;
        rest = &rest[start..];
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        tokens.push((token_start, &rest[..end]));
        offset = token_start + end;
        rest = &rest[end..];
    }

    let Some(&(one_pos, one)) = tokens.last() else {
        return Err(syntax(text.len(), "empty input; expected an equation ending in `= 1`"));
    };
    if one != "1" {
        return Err(syntax(one_pos, "equation must end with the suffix `= 1`"));
    }
    let Some(&(eq_pos, eq)) = tokens.len().checked_sub(2).and_then(|i| tokens.get(i)) else {
        return Err(syntax(one_pos, "equation must end with the suffix `= 1`"));
    };
    if eq != "=" {
        return Err(syntax(eq_pos, "equation must end with the suffix `= 1`"));
    }

    let mut body = Vec::new();
    for &(pos, token) in &tokens[..tokens.len() - 2] {
        let (name, sign) = match token.strip_suffix("^-1") {
            Some(name) => (name, Sign::Minus),
            None => (token, Sign::Plus),
        };
        if name.is_empty()
            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            || !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        {
            return Err(syntax(pos, format!("invalid token {token:?}")));
        }
        let mut chars = name.chars();
        let token = match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() && alphabet.contains(c as u8) => {
                Token::Constant(Letter::new(c as u8, sign))
            }
            _ => Token::Variable(name.to_string(), sign),
        };
        body.push(token);
    }

    Ok(RawEquation::new(alphabet.clone(), body)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    #[test]
    fn parses_conjugation_equation() {
        let eq = parse_equation("x a x^-1 b = 1", &ab()).unwrap();
        assert_eq!(eq.variables(), ["x".to_string()]);
        assert_eq!(
            eq.body(),
            &[
                Token::Variable("x".into(), Sign::Plus),
                Token::Constant(Letter::new(b'a', Sign::Plus)),
                Token::Variable("x".into(), Sign::Minus),
                Token::Constant(Letter::new(b'b', Sign::Plus)),
            ]
        );
    }

    #[test]
    fn parses_commutator_equation() {
        let eq = parse_equation("x y x^-1 y^-1 = 1", &ab()).unwrap();
        assert_eq!(eq.variables(), ["x".to_string(), "y".to_string()]);
        assert_eq!(eq.body().len(), 4);
    }

    #[test]
    fn rejects_single_occurrence() {
        let err = parse_equation("x a = 1", &ab()).unwrap_err();
        assert_eq!(err, ParseError::Equation(EquationError::NotQuadratic("x".into(), 1)));
    }

    #[test]
    fn rejects_missing_suffix() {
        assert!(matches!(
            parse_equation("x a x^-1", &ab()).unwrap_err(),
            ParseError::Syntax { .. }
        ));
        assert!(matches!(parse_equation("", &ab()).unwrap_err(), ParseError::Syntax { .. }));
    }

    #[test]
    fn rejects_symbol_clash() {
        // "A" would collide with the uppercase-inverse encoding of constant a.
        let err = parse_equation("A a A^-1 a^-1 = 1", &ab()).unwrap_err();
        assert_eq!(err, ParseError::Equation(EquationError::SymbolClash("A".into())));
    }

    #[test]
    fn names_outside_the_alphabet_are_variables() {
        let eq = parse_equation("c a c^-1 a^-1 = 1", &ab()).unwrap();
        assert_eq!(eq.variables(), ["c".to_string()]);
    }

    #[test]
    fn empty_body_is_valid() {
        let eq = parse_equation("= 1", &ab()).unwrap();
        assert!(eq.body().is_empty());
        assert!(eq.variables().is_empty());
    }

    #[test]
    fn reports_error_positions() {
        match parse_equation("x ?? x^-1 = 1", &ab()).unwrap_err() {
            ParseError::Syntax { position, .. } => assert_eq!(position, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
