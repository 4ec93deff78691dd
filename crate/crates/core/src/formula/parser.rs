use std::fmt;

use thiserror::Error;

use super::Formula;

/// Syntax error: character position in the input, what was found there and
/// which tokens would have been accepted instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub position: usize,
    pub found: String,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at position {}: found {}, expected one of: {}",
            self.position,
            self.found,
            self.expected.join(" ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Atom(String),
    True,
    False,
    Not,
    And,
    Or,
    Imp,
    Iff,
    /// `=>`, Lewis's would-counterfactual
    Would,
    /// `~>`, Lewis's might-counterfactual
    Might,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    BoxOp,
    DiamondOp,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Atom(name) => format!("atom `{name}`"),
            Tok::End => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::Atom(_) => "atom",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Not => "~",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Imp => "->",
            Tok::Iff => "<->",
            Tok::Would => "=>",
            Tok::Might => "~>",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::BoxOp => "[]",
            Tok::DiamondOp => "<>",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::End => "end of input",
        }
    }
}

const FORMULA_START: &[&str] = &["atom", "true", "false", "_|_", "~", "[", "<", "[]", "<>", "("];
const BINARY_OPS: &[&str] = &["&", "|", "->", "=>", "~>", "<->"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let starts = |i: usize, pat: &str| -> bool {
        let pat: Vec<char> = pat.chars().collect();
        chars.len() >= i + pat.len() && chars[i..i + pat.len()] == pat[..]
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = if starts(i, "<->") {
            (Tok::Iff, 3)
        } else if starts(i, "_|_") {
            (Tok::False, 3)
        } else if starts(i, "->") {
            (Tok::Imp, 2)
        } else if starts(i, "=>") {
            (Tok::Would, 2)
        } else if starts(i, "~>") {
            (Tok::Might, 2)
        } else if starts(i, "[]") {
            (Tok::BoxOp, 2)
        } else if starts(i, "<>") {
            (Tok::DiamondOp, 2)
        } else {
            let tok = match c {
                '~' | '¬' => Tok::Not,
                '&' | '∧' => Tok::And,
                '|' | '∨' => Tok::Or,
                '⊃' | '→' => Tok::Imp,
                '≡' | '↔' => Tok::Iff,
                '⊥' => Tok::False,
                '⊤' => Tok::True,
                '□' => Tok::BoxOp,
                '◇' => Tok::DiamondOp,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '<' => Tok::LAngle,
                '>' => Tok::RAngle,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                'a'..='z' => {
                    let start = i;
                    let mut end = i + 1;
                    while end < chars.len() && (chars[end].is_ascii_alphanumeric() || chars[end] == '_') {
                        end += 1;
                    }
                    let word: String = chars[start..end].iter().collect();
                    let tok = match word.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        _ => Tok::Atom(word),
                    };
                    out.push((tok, start));
                    i = end;
                    continue;
                }
                other => {
                    let mut expected = FORMULA_START.to_vec();
                    expected.extend_from_slice(BINARY_OPS);
                    expected.extend_from_slice(&["]", ">", ")"]);
                    return Err(ParseError { position: i, found: format!("character `{other}`"), expected });
                }
            };
            (tok, 1)
        };
        out.push((tok, i));
        i += len;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if tok != Tok::End {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let (tok, position) = &self.toks[self.pos];
        ParseError { position: *position, found: tok.describe(), expected: expected.to_vec() }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[tok.spelling()]))
        }
    }

    // iff := imp ('<->' iff)?
    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    // imp := or (('->' | '=>' | '~>') imp)?
    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        let make: fn(Formula, Formula) -> Formula = match self.peek() {
            Tok::Imp => Formula::imp,
            Tok::Would => Formula::nec,
            Tok::Might => Formula::poss,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.imp()?;
        Ok(make(lhs, rhs))
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let antecedent = self.iff()?;
                self.expect(Tok::RBracket)?;
                Ok(Formula::nec(antecedent, self.unary()?))
            }
            Tok::LAngle => {
                self.bump();
                let antecedent = self.iff()?;
                self.expect(Tok::RAngle)?;
                Ok(Formula::poss(antecedent, self.unary()?))
            }
            Tok::BoxOp => {
                self.bump();
                Ok(Formula::necessarily(self.unary()?))
            }
            Tok::DiamondOp => {
                self.bump();
                Ok(Formula::possibly(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Atom(name) => {
                self.bump();
                Ok(Formula::atom(&name))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Bottom)
            }
            _ => Err(self.error(FORMULA_START)),
        }
    }
}

/// Parses the ASCII (or Unicode) concrete syntax.
///
/// Binding from tightest: `~`, the prefix modalities `[A]`/`<A>`, `&`, `|`,
/// the right-associative arrows `->`, `=>`, `~>`, and finally `<->`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser { toks: lex(text)?, pos: 0 };
    let formula = parser.iff()?;
    if *parser.peek() != Tok::End {
        let mut expected = BINARY_OPS.to_vec();
        expected.push("end of input");
        return Err(parser.error(&expected));
    }
    Ok(formula)
}
