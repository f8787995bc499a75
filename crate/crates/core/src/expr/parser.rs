use std::fmt;

use super::{BinOp, Constant, Expr, Func, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    BadNumber(String),
    UnknownIdentifier(String),
    UnknownFunction(String),
    VariableOutOfRange { name: String, dimension: usize },
    Arity { func: &'static str, expected: usize, found: usize },
}

/// Parse failure with the zero-based character offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at position {}: ", self.position)?;
        match &self.kind {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected '{t}'"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number '{s}'"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function '{s}'"),
            ParseErrorKind::VariableOutOfRange { name, dimension } => {
                write!(f, "variable '{name}' out of range for dimension {dimension}")
            }
            ParseErrorKind::Arity { func, expected, found } => {
                write!(f, "{func} takes {expected} argument(s), found {found}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(v) => format!("{v}"),
            Token::Ident(s) => s.clone(),
            Token::Op(c) => c.to_string(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
            Token::Comma => ",".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| ParseError {
                position: start,
                kind: ParseErrorKind::BadNumber(text.clone()),
            })?;
            out.push((start, Token::Num(value)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Token::Op(c),
            '(' => Token::LParen,
            ')' => Token::RParen,
            ',' => Token::Comma,
            other => {
                return Err(ParseError {
                    position: start,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((chars.len(), Token::End));
    Ok(out)
}

const PREFIX_MINUS_BP: u8 = 40;

fn infix_binding(op: char) -> Option<(BinOp, u8, u8)> {
    match op {
        '+' => Some((BinOp::Add, 10, 11)),
        '-' => Some((BinOp::Sub, 10, 11)),
        '*' => Some((BinOp::Mul, 20, 21)),
        '/' => Some((BinOp::Div, 20, 21)),
        '^' => Some((BinOp::Pow, 30, 30)),
        _ => None,
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    dimension: usize,
}

impl Parser {
    fn peek(&self) -> &(usize, Token) {
        &self.tokens[self.cursor]
    }

    fn next(&mut self) -> (usize, Token) {
        let tok = self.tokens[self.cursor].clone();
        if self.cursor + 1 < self.tokens.len() {
            self.cursor += 1;
        }
        tok
    }

    fn unexpected(&self, pos: usize, tok: &Token) -> ParseError {
        let kind = match tok {
            Token::End => ParseErrorKind::UnexpectedEnd,
            other => ParseErrorKind::UnexpectedToken(other.describe()),
        };
        ParseError { position: pos, kind }
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        let (pos, tok) = self.next();
        if tok == want {
            Ok(())
        } else {
            Err(self.unexpected(pos, &tok))
        }
    }

    fn expression(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match &self.peek().1 {
                Token::Op(c) => *c,
                _ => break,
            };
            let Some((bin, lbp, rbp)) = infix_binding(op) else { break };
            if lbp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expression(rbp)?;
            lhs = Expr::binary(bin, lhs, rhs);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = self.next();
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Op('-') => Ok(Expr::Neg(Box::new(self.expression(PREFIX_MINUS_BP)?))),
            Token::LParen => {
                let inner = self.expression(0)?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if matches!(self.peek().1, Token::LParen) {
                    self.call(pos, &name)
                } else {
                    self.identifier(pos, name)
                }
            }
            other => Err(self.unexpected(pos, &other)),
        }
    }

    fn call(&mut self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        let func = Func::from_name(name).ok_or_else(|| ParseError {
            position: pos,
            kind: ParseErrorKind::UnknownFunction(name.to_string()),
        })?;
        self.expect(Token::LParen)?;
        let mut args = Vec::new();
        if !matches!(self.peek().1, Token::RParen) {
            loop {
                args.push(self.expression(0)?);
                if matches!(self.peek().1, Token::Comma) {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Token::RParen)?;
        if args.len() != func.arity() {
            return Err(ParseError {
                position: pos,
                kind: ParseErrorKind::Arity {
                    func: func.name(),
                    expected: func.arity(),
                    found: args.len(),
                },
            });
        }
        Ok(Expr::Call(func, args))
    }

    fn identifier(&self, pos: usize, name: String) -> Result<Expr, ParseError> {
        match name.as_str() {
            "t" => return Ok(Expr::Var(Var::Time)),
            "eps" => return Ok(Expr::Var(Var::Eps)),
            "pi" => return Ok(Expr::Const(Constant::Pi)),
            "e" => return Ok(Expr::Const(Constant::E)),
            _ => {}
        }
        let index = name
            .strip_prefix('x')
            .or_else(|| name.strip_prefix('u'))
            .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|digits| digits.parse::<usize>().ok());
        match index {
            Some(k) if k >= 1 && k <= self.dimension => Ok(Expr::Var(Var::State(k - 1))),
            Some(_) => Err(ParseError {
                position: pos,
                kind: ParseErrorKind::VariableOutOfRange { name, dimension: self.dimension },
            }),
            None if Func::from_name(&name).is_some() => Err(ParseError {
                position: pos,
                kind: ParseErrorKind::UnexpectedToken(name),
            }),
            None => Err(ParseError { position: pos, kind: ParseErrorKind::UnknownIdentifier(name) }),
        }
    }
}

/// Parses `source` as an expression over `t`, `eps` and state variables
/// `x1..x{dimension}` (or `u1..`).
pub fn parse(source: &str, dimension: usize) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError { position: 0, kind: ParseErrorKind::Empty });
    }
    let mut parser = Parser { tokens: tokenize(source)?, cursor: 0, dimension };
    let expr = parser.expression(0)?;
    let (pos, tok) = parser.next();
    if tok != Token::End {
        return Err(parser.unexpected(pos, &tok));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(src: &str) -> f64 {
        parse(src, 2).unwrap().eval(0.5, &[2.0, -3.0], 0.25).unwrap()
    }

    #[test]
    fn precedence_corpus() {
        let corpus: [(&str, f64); 20] = [
            ("2+3*4", 14.0),
            ("(2+3)*4", 20.0),
            ("2*3+4", 10.0),
            ("10-4-3", 3.0),
            ("10-(4-3)", 9.0),
            ("64/4/2", 8.0),
            ("2^3^2", 512.0),
            ("(2^3)^2", 64.0),
            ("-2^2", 4.0),
            ("-(2^2)", -4.0),
            ("2^-1", 0.5),
            ("2*-3", -6.0),
            ("-x1^2", 4.0),
            ("x1^2*x2", -12.0),
            ("x1 - -x2", -1.0),
            ("1+2*3^2", 19.0),
            ("8/2^2", 2.0),
            ("x2*eps + t", -0.25),
            ("max(x1, x2) - min(x1, x2)", 5.0),
            ("1.5e1 + 2.5E-1", 15.25),
        ];
        for (src, want) in corpus {
            assert_eq!(value(src), want, "{src}");
        }
    }

    #[test]
    fn u_prefix_aliases_state() {
        assert_eq!(parse("u2", 2).unwrap(), parse("x2", 2).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("x1 + * 2", 1).unwrap_err();
        assert_eq!(err.position, 5);
        assert!(err.to_string().contains("position 5"));

        let err = parse("x1 + y", 1).unwrap_err();
        assert_eq!(err, ParseError { position: 5, kind: ParseErrorKind::UnknownIdentifier("y".into()) });

        let err = parse("x3", 2).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::VariableOutOfRange { .. }));

        let err = parse("foo(x1)", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownFunction(_)));

        let err = parse("max(x1)", 1).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { expected: 2, found: 1, .. }));

        let err = parse("sin(x1", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);

        let err = parse("x1 # 2", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('#'));

        assert_eq!(parse("   ", 1).unwrap_err().kind, ParseErrorKind::Empty);
        assert!(parse("x0", 1).is_err());
        assert!(parse("(x1))", 1).is_err());
        assert!(parse("1..2", 1).is_err());
    }

    #[test]
    fn display_round_trips_structure() {
        for src in ["-x1^2", "2^3^2", "x1*sin(t)^2 - x1^3*cos(t)^2*sin(t)^2", "max(x1, -eps) / pi + e"] {
            let e = parse(src, 1).unwrap();
            assert_eq!(parse(&e.to_string(), 1).unwrap(), e, "{src}");
        }
    }
}
