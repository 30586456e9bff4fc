//! Parsing of initial-state strings such as `0011`, `(|1⟩+|5⟩)/√2` or
//! `(|2,0⟩+|5,0⟩)/√2`.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! spec    := sum [ '/' divisor ] | label
//! sum     := [sign] term { sign term }   | '(' sum ')'
//! term    := [coef ['*']] ket
//! ket     := '|' label ( '⟩' | '>' )
//! coef    := number [ 'i' ] | 'i' | '√' number
//! divisor := number | '√' number | 'sqrt(' number ')'
//! ```
//!
//! Labels depend on the Hilbert structure: a bit string for qubit registers
//! (leftmost bit is site 0), a Fock level for a bare mode, and `n,bits` for
//! a mode coupled to qubits.

use num_complex::Complex64;

use crate::error::{SimError, SimResult};
use crate::linalg::CVector;
use crate::state::{HilbertStructure, QuantumState};

const NORMALIZATION_TOL: f64 = 1e-8;

/// Parses a normalized superposition of labeled basis kets.
pub fn basis_state(spec: &str, structure: &HilbertStructure) -> SimResult<QuantumState> {
    let cleaned: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let malformed = |reason: &str| SimError::MalformedKet {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    if cleaned.is_empty() {
        return Err(malformed("empty"));
    }

    let terms = if cleaned.contains('|') {
        let mut parser = Parser {
            chars: cleaned.chars().collect(),
            pos: 0,
        };
        let terms = parser.spec().map_err(|r| malformed(&r))?;
        if parser.pos != parser.chars.len() {
            return Err(malformed("trailing characters"));
        }
        terms
    } else {
        vec![(Complex64::new(1.0, 0.0), cleaned.clone())]
    };

    let mut amplitudes = CVector::zeros(structure.dim());
    for (coef, label) in terms {
        let index = label_index(&label, structure)?;
        amplitudes[index] += coef;
    }
    let norm = amplitudes.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(malformed(&format!("superposition has norm {norm}, expected 1")));
    }
    QuantumState::pure(amplitudes.unscale(norm), *structure)
}

fn label_index(label: &str, structure: &HilbertStructure) -> SimResult<usize> {
    let out_of_range = || SimError::LabelOutOfRange(label.to_string());
    let sites = structure.qubit_sites();
    let parse_bits = |bits: &str| -> SimResult<usize> {
        let bits: String = bits.chars().filter(|&c| c != ',').collect();
        if bits.len() != sites || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(out_of_range());
        }
        Ok(bits.chars().fold(0, |acc, c| (acc << 1) | usize::from(c == '1')))
    };
    let parse_level = |level: &str| -> SimResult<usize> {
        let n: usize = level.parse().map_err(|_| out_of_range())?;
        if n >= structure.fock_dim() {
            return Err(out_of_range());
        }
        Ok(n)
    };

    match (structure.has_fock_mode(), sites > 0) {
        (false, _) => parse_bits(label),
        (true, false) => parse_level(label),
        (true, true) => {
            let (level, bits) = label.split_once(',').ok_or_else(out_of_range)?;
            Ok(structure.index_of(parse_level(level)?, parse_bits(bits)?))
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

type Terms = Vec<(Complex64, String)>;

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars())
        {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn spec(&mut self) -> Result<Terms, String> {
        let mut terms = self.sum()?;
        if self.eat('/') {
            let d = self.divisor()?;
            if d == 0.0 {
                return Err("division by zero".into());
            }
            for (c, _) in &mut terms {
                *c /= d;
            }
        }
        Ok(terms)
    }

    fn sum(&mut self) -> Result<Terms, String> {
        if self.eat('(') {
            let inner = self.sum()?;
            if !self.eat(')') {
                return Err("unbalanced parenthesis".into());
            }
            return Ok(inner);
        }
        let mut terms = Vec::new();
        let mut sign = 1.0;
        if self.eat('-') {
            sign = -1.0;
        } else {
            self.eat('+');
        }
        loop {
            let (coef, label) = self.term()?;
            terms.push((coef * sign, label));
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<(Complex64, String), String> {
        let mut coef = Complex64::new(1.0, 0.0);
        if self.peek() != Some('|') {
            coef = self.coefficient()?;
            self.eat('*');
        }
        if !self.eat('|') {
            return Err(format!("expected `|` at position {}", self.pos));
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '⟩' || c == '>' {
                break;
            }
            self.pos += 1;
        }
        let label: String = self.chars[start..self.pos].iter().collect();
        if !(self.eat('⟩') || self.eat('>')) {
            return Err("unterminated ket".into());
        }
        if label.is_empty() {
            return Err("empty ket label".into());
        }
        Ok((coef, label))
    }

    fn coefficient(&mut self) -> Result<Complex64, String> {
        if self.eat('i') {
            return Ok(Complex64::new(0.0, 1.0));
        }
        let magnitude = if self.eat('√') {
            self.number()?.sqrt()
        } else {
            self.number()?
        };
        if self.eat('i') {
            Ok(Complex64::new(0.0, magnitude))
        } else {
            Ok(Complex64::new(magnitude, 0.0))
        }
    }

    fn divisor(&mut self) -> Result<f64, String> {
        if self.eat('√') {
            return Ok(self.number()?.sqrt());
        }
        if self.eat_str("sqrt(") {
            let v = self.number()?;
            if !self.eat(')') {
                return Err("unbalanced sqrt(".into());
            }
            return Ok(v.sqrt());
        }
        self.number()
    }

    fn number(&mut self) -> Result<f64, String> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map_err(|_| format!("invalid number `{text}` at position {start}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn bit_string_on_four_qubits() {
        let s = HilbertStructure::qubits(4).unwrap();
        let state = basis_state("0011", &s).unwrap();
        let v = state.as_pure().unwrap();
        assert_eq!(v[3], Complex64::new(1.0, 0.0));
        assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert_eq!(basis_state("|0011⟩", &s).unwrap(), state);
    }

    #[test]
    fn fock_superposition() {
        let s = HilbertStructure::fock(50).unwrap();
        let state = basis_state("(|1⟩+|5⟩)/√2", &s).unwrap();
        let v = state.as_pure().unwrap();
        assert!((v[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v[5].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(basis_state("(|1>+|5>)/sqrt(2)", &s).unwrap(), state);
    }

    #[test]
    fn hybrid_superposition() {
        let s = HilbertStructure::new(1, 50).unwrap();
        let state = basis_state("(|2,0⟩+|5,0⟩)/√2", &s).unwrap();
        let v = state.as_pure().unwrap();
        assert!((v[s.index_of(2, 0)].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v[s.index_of(5, 0)].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn coefficients_and_signs() {
        let s = HilbertStructure::qubits(1).unwrap();
        let state = basis_state("0.6|0⟩ - 0.8i|1⟩", &s).unwrap();
        let v = state.as_pure().unwrap();
        assert!((v[0].re - 0.6).abs() < 1e-15);
        assert!((v[1].im + 0.8).abs() < 1e-15);
    }

    #[test]
    fn malformed_and_out_of_range() {
        let s = HilbertStructure::fock(4).unwrap();
        assert!(matches!(basis_state("(|1⟩+|2⟩", &s), Err(SimError::MalformedKet { .. })));
        assert!(matches!(basis_state("|1⟩+|2⟩", &s), Err(SimError::MalformedKet { .. })));
        assert!(matches!(basis_state("|7⟩", &s), Err(SimError::LabelOutOfRange(_))));
        assert!(matches!(basis_state("", &s), Err(SimError::MalformedKet { .. })));
        let q = HilbertStructure::qubits(2).unwrap();
        assert!(matches!(basis_state("012", &q), Err(SimError::LabelOutOfRange(_))));
        assert!(matches!(basis_state("0", &q), Err(SimError::LabelOutOfRange(_))));
    }
}
