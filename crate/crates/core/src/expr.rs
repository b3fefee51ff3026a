//! Text syntax for elements and radical words.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' '-'? int)?
//! atom   := int | 'zeta' | 'xi' | '(' expr ')'
//! ```
//!
//! A sum is folded into one element. At the multiplicative level every
//! factor becomes its own word factor, `/` and negative powers giving
//! negative exponents. Parenthesized groups without `/` or negative powers
//! fold into one element, so the [`Display`](std::fmt::Display) output of a
//! word parses back to the same word.

use num_bigint::BigInt;
use num_traits::One;

use crate::cyc::{CycElem, CycRing, RadicalWord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Zeta,
    Xi,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => n.to_string(),
            Tok::Zeta => "zeta".into(),
            Tok::Xi => "xi".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(src[start..i].parse().expect("digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                match &src[start..i] {
                    "zeta" => out.push((start, Tok::Zeta)),
                    "xi" => out.push((start, Tok::Xi)),
                    other => {
                        return Err(Error::Parse {
                            offset: start,
                            expected: vec!["zeta".into(), "xi".into()],
                            found: other.to_string(),
                        })
                    }
                }
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().expect("in bounds");
                return Err(Error::Parse {
                    offset: start,
                    expected: vec!["an integer, zeta, xi, operator or parenthesis".into()],
                    found: ch.to_string(),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

#[derive(Debug, Clone)]
enum Node {
    Int(BigInt),
    Zeta,
    Xi,
    Neg(Box<Node>),
    Paren(Box<Node>),
    /// Terms with their sign (`true` for minus).
    Add(Vec<(bool, Node)>),
    /// Factors with the offset of a preceding `/`, if any.
    Mul(Vec<(Option<usize>, Node)>),
    Pow(Box<Node>, i64, usize),
}

impl Node {
    /// Offset of the first `/` or negative power inside, if any.
    fn first_division(&self) -> Option<(usize, &'static str)> {
        match self {
            Node::Int(_) | Node::Zeta | Node::Xi => None,
            Node::Neg(b) | Node::Paren(b) => b.first_division(),
            Node::Add(ts) => ts.iter().find_map(|(_, t)| t.first_division()),
            Node::Mul(fs) => fs.iter().find_map(|(div, f)| match div {
                Some(off) => Some((*off, "'/'")),
                None => f.first_division(),
            }),
            Node::Pow(b, k, off) => {
                if *k < 0 {
                    Some((*off, "negative power"))
                } else {
                    b.first_division()
                }
            }
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> (usize, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(Error::Parse {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut terms = vec![(false, self.term()?)];
        loop {
            let neg = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            terms.push((neg, self.term()?));
        }
        Ok(if terms.len() == 1 { terms.pop().expect("one").1 } else { Node::Add(terms) })
    }

    fn term(&mut self) -> Result<Node> {
        let mut factors = vec![(None, self.factor()?)];
        loop {
            let div = match self.peek() {
                Tok::Star => None,
                Tok::Slash => Some(self.offset()),
                _ => break,
            };
            self.bump();
            factors.push((div, self.factor()?));
        }
        Ok(if factors.len() == 1 { factors.pop().expect("one").1 } else { Node::Mul(factors) })
    }

    fn factor(&mut self) -> Result<Node> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (off, _) = self.bump();
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let k = match self.peek().clone() {
            Tok::Int(n) => {
                let k: i64 = match i64::try_from(&n) {
                    Ok(k) if k <= u32::MAX as i64 => k,
                    _ => return Err(Error::Semantic { offset: self.offset(), message: "exponent too large".into() }),
                };
                self.bump();
                if neg {
                    -k
                } else {
                    k
                }
            }
            _ => return self.fail(&["an integer exponent"]),
        };
        Ok(Node::Pow(Box::new(base), k, off))
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Node::Int(n))
            }
            Tok::Zeta => {
                self.bump();
                Ok(Node::Zeta)
            }
            Tok::Xi => {
                self.bump();
                Ok(Node::Xi)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail(&["')'", "'+'", "'-'", "'*'", "'/'", "'^'"]);
                }
                self.bump();
                Ok(Node::Paren(Box::new(inner)))
            }
            _ => self.fail(&["an integer", "zeta", "xi", "'('", "'-'"]),
        }
    }
}

fn fold(node: &Node, ring: CycRing) -> CycElem {
    match node {
        Node::Int(n) => CycElem::int_embed(ring, n.clone()),
        Node::Zeta => CycElem::zeta(ring),
        Node::Xi => CycElem::xi(ring),
        Node::Neg(b) => fold(b, ring).neg(),
        Node::Paren(b) => fold(b, ring),
        Node::Add(ts) => ts.iter().fold(CycElem::zero(ring), |acc, (neg, t)| {
            let e = fold(t, ring);
            if *neg {
                &acc - &e
            } else {
                &acc + &e
            }
        }),
        Node::Mul(fs) => fs.iter().fold(CycElem::one(ring), |acc, (_, f)| &acc * &fold(f, ring)),
        Node::Pow(b, k, _) => fold(b, ring).pow(*k as u32),
    }
}

fn word_factor(e: CycElem, k: i64, offset: usize) -> Result<RadicalWord> {
    if e.is_zero_table() {
        return Err(Error::Semantic { offset, message: "factor is zero".into() });
    }
    let mut w = RadicalWord::empty();
    w.push(e, k)?;
    Ok(w)
}

fn to_word(node: &Node, ring: CycRing, offset: usize) -> Result<RadicalWord> {
    match node {
        Node::Add(_) => {
            if let Some((off, what)) = node.first_division() {
                return Err(Error::Semantic { offset: off, message: format!("{what} inside a sum") });
            }
            word_factor(fold(node, ring), 1, offset)
        }
        Node::Mul(fs) => {
            let mut w = RadicalWord::empty();
            for (div, f) in fs {
                let part = to_word(f, ring, div.unwrap_or(offset))?;
                w = w.mul(&if div.is_some() { part.inv() } else { part });
            }
            Ok(w)
        }
        Node::Pow(b, k, off) => {
            if b.first_division().is_none() {
                if *k == 0 {
                    return Ok(RadicalWord::empty());
                }
                word_factor(fold(b, ring), *k, *off)
            } else {
                Ok(to_word(b, ring, *off)?.pow(*k))
            }
        }
        Node::Neg(b) if b.first_division().is_some() => {
            Ok(word_factor(CycElem::int_embed(ring, -1), 1, offset)?.mul(&to_word(b, ring, offset)?))
        }
        Node::Paren(b) if b.first_division().is_some() => to_word(b, ring, offset),
        _ => word_factor(fold(node, ring), 1, offset),
    }
}

/// Parses a radical word over `Z[xi, zeta]` with `xi` of order `n`.
///
/// The bare literal `1` is the empty word.
pub fn parse_element(src: &str, n: u64, p: u64) -> Result<RadicalWord> {
    let ring = CycRing::new(p, n)?;
    let mut parser = Parser { toks: tokenize(src)?, pos: 0 };
    let node = parser.expr()?;
    if *parser.peek() != Tok::End {
        return parser.fail(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]);
    }
    if matches!(&node, Node::Int(v) if v.is_one()) {
        return Ok(RadicalWord::empty());
    }
    to_word(&node, ring, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyc::vandiver_unit;
    use proptest::prelude::*;

    fn ring() -> CycRing {
        CycRing::new(5, 6).unwrap()
    }

    #[test]
    fn examples() {
        let w = parse_element("1 + xi*zeta^2", 6, 5).unwrap();
        assert_eq!(w, RadicalWord::from(vandiver_unit(ring(), 2)));
        let w = parse_element("(1+xi*zeta^2)/(1+xi*zeta)", 6, 5).unwrap();
        assert_eq!(w.factors().len(), 2);
        assert_eq!(w.factors()[0], (vandiver_unit(ring(), 2), 1));
        assert_eq!(w.factors()[1], (vandiver_unit(ring(), 1), -1));
        let w = parse_element("zeta^-3", 6, 5).unwrap();
        assert_eq!(w.factors(), &[(CycElem::zeta(ring()), -3)]);
        assert!(parse_element("1", 6, 5).unwrap().is_empty());
        let w = parse_element("-(xi - 2)^2 * 3", 6, 5).unwrap();
        assert_eq!(w.factors().len(), 2);
    }

    #[test]
    fn errors() {
        match parse_element("1 + zeta/xi", 6, 5) {
            Err(Error::Semantic { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_element("zeta^-1 + 1", 6, 5), Err(Error::Semantic { offset: 4, .. })));
        match parse_element("1 + * 2", 6, 5) {
            Err(Error::Parse { offset, found, .. }) => {
                assert_eq!(offset, 4);
                assert_eq!(found, "'*'");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_element("eta", 6, 5), Err(Error::Parse { offset: 0, .. })));
        assert!(matches!(parse_element("(1+zeta", 6, 5), Err(Error::Parse { offset: 7, .. })));
        assert!(matches!(parse_element("zeta^x", 6, 5), Err(Error::Parse { .. })));
        assert!(matches!(parse_element("zeta - zeta", 6, 5), Err(Error::Semantic { .. })));
        assert!(matches!(parse_element("1 2", 6, 5), Err(Error::Parse { offset: 2, .. })));
    }

    #[test]
    fn display_round_trip_fixed() {
        for src in [
            "(1+xi*zeta^2)*(1+xi*zeta)^-1",
            "(zeta^2)*(1+zeta^2)*(1+zeta)^-1",
            "(-1-3*xi^2*zeta)^4",
            "(2)",
        ] {
            let w = parse_element(src, 6, 5).unwrap();
            assert_eq!(w.to_string(), src);
        }
    }

    fn elem() -> impl Strategy<Value = CycElem> {
        prop::collection::vec((0i64..6, 0i64..5, -30i64..=30), 1..5)
            .prop_map(|terms| CycElem::make(CycRing::new(5, 6).unwrap(), terms))
            .prop_filter("nonzero", |e| !e.is_zero_table())
    }

    proptest! {
        #[test]
        fn round_trip(factors in prop::collection::vec((elem(), -4i64..=4), 0..4)) {
            let w = RadicalWord::new(factors).unwrap();
            let back = parse_element(&w.to_string(), 6, 5).unwrap();
            prop_assert_eq!(back, w);
        }
    }
}
