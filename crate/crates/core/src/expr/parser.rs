use super::{BinaryOp, NamedConst, Node, ParseError, UnaryOp};

/// Maximum tree depth accepted by the parser. Bounds recursion in both
/// parsing and evaluation regardless of input size.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok<'a>), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                // exponent only when followed by digits, so `2e` stays `2` `e`
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut k = end + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        end = k;
                    }
                }
                let text = &self.src[start..end];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::new(start, format!("malformed number `{text}`")))?;
                if !value.is_finite() {
                    return Err(ParseError::new(start, format!("number `{text}` overflows")));
                }
                self.pos = end;
                Tok::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Tok::Ident(&self.src[start..end])
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character `{ch}`")));
            }
        };
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok<'a>),
    signature: &'a [String],
    recursion: usize,
}

type Parsed = (Node, usize);

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(usize, Tok<'a>), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn check_depth(&self, pos: usize, depth: usize) -> Result<(), ParseError> {
        if depth > MAX_DEPTH {
            Err(ParseError::new(
                pos,
                format!("expression nesting exceeds {MAX_DEPTH}"),
            ))
        } else {
            Ok(())
        }
    }

    fn expect(&mut self, want: Tok<'static>, what: &str) -> Result<(), ParseError> {
        let (pos, tok) = self.advance()?;
        if tok == want {
            Ok(())
        } else {
            Err(ParseError::new(pos, format!("expected {what}, found {tok:?}")))
        }
    }

    fn expr(&mut self) -> Result<Parsed, ParseError> {
        let (mut lhs, mut depth) = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.peeked.1 {
            let pos = self.advance()?.0;
            let (rhs, d) = self.term()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Node::binary(op, lhs, rhs);
            depth = depth.max(d) + 1;
            self.check_depth(pos, depth)?;
        }
        Ok((lhs, depth))
    }

    fn term(&mut self) -> Result<Parsed, ParseError> {
        let (mut lhs, mut depth) = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.peeked.1 {
            let pos = self.advance()?.0;
            let (rhs, d) = self.unary()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Node::binary(op, lhs, rhs);
            depth = depth.max(d) + 1;
            self.check_depth(pos, depth)?;
        }
        Ok((lhs, depth))
    }

    fn unary(&mut self) -> Result<Parsed, ParseError> {
        if self.peeked.1 == Tok::Op('-') {
            let pos = self.advance()?.0;
            let (arg, d) = self.nested(pos, Self::unary)?;
            return Ok((Node::unary(UnaryOp::Neg, arg), d + 1));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Parsed, ParseError> {
        let (base, d) = self.atom()?;
        if self.peeked.1 == Tok::Op('^') {
            let pos = self.advance()?.0;
            let (exp, e) = self.nested(pos, Self::unary)?;
            let depth = d.max(e) + 1;
            self.check_depth(pos, depth)?;
            return Ok((Node::binary(BinaryOp::Pow, base, exp), depth));
        }
        Ok((base, d))
    }

    // Recursion guard: every recursive descent goes through here.
    fn nested(
        &mut self,
        pos: usize,
        f: fn(&mut Self) -> Result<Parsed, ParseError>,
    ) -> Result<Parsed, ParseError> {
        self.recursion += 1;
        if self.recursion > MAX_DEPTH {
            return Err(ParseError::new(
                pos,
                format!("expression nesting exceeds {MAX_DEPTH}"),
            ));
        }
        let out = f(self);
        self.recursion -= 1;
        let (node, depth) = out?;
        self.check_depth(pos, depth + 1)?;
        Ok((node, depth))
    }

    fn atom(&mut self) -> Result<Parsed, ParseError> {
        let (pos, tok) = self.advance()?;
        match tok {
            Tok::Num(v) => Ok((Node::Const(v), 1)),
            Tok::LParen => {
                let inner = self.nested(pos, Self::expr)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if self.peeked.1 == Tok::LParen {
                    return self.call(pos, name);
                }
                if let Some(i) = self.signature.iter().position(|v| v == name) {
                    return Ok((Node::Var(i), 1));
                }
                match name {
                    "pi" => Ok((Node::Named(NamedConst::Pi), 1)),
                    "e" => Ok((Node::Named(NamedConst::E), 1)),
                    _ if UnaryOp::from_name(name).is_some() || BinaryOp::from_name(name).is_some() => {
                        Err(ParseError::new(pos, format!("function `{name}` needs arguments")))
                    }
                    _ => Err(ParseError::new(pos, format!("unknown variable `{name}`"))),
                }
            }
            Tok::End => Err(ParseError::new(pos, "unexpected end of input")),
            other => Err(ParseError::new(pos, format!("unexpected {other:?}"))),
        }
    }

    fn call(&mut self, pos: usize, name: &str) -> Result<Parsed, ParseError> {
        let arity = if UnaryOp::from_name(name).is_some() {
            1
        } else if BinaryOp::from_name(name).is_some() {
            2
        } else {
            return Err(ParseError::new(pos, format!("unknown function `{name}`")));
        };
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::with_capacity(2);
        let mut depth = 0;
        loop {
            let (arg, d) = self.nested(pos, Self::expr)?;
            args.push(arg);
            depth = depth.max(d);
            let (p, tok) = self.advance()?;
            match tok {
                Tok::Comma => continue,
                Tok::RParen => break,
                other => {
                    return Err(ParseError::new(p, format!("expected `,` or `)`, found {other:?}")))
                }
            }
        }
        if args.len() != arity {
            return Err(ParseError::new(
                pos,
                format!("`{name}` takes {arity} argument(s), got {}", args.len()),
            ));
        }
        let depth = depth + 1;
        self.check_depth(pos, depth)?;
        let mut args = args.into_iter();
        let a = args.next().expect("arity checked");
        let node = match args.next() {
            None => Node::unary(UnaryOp::from_name(name).expect("arity 1"), a),
            Some(b) => Node::binary(BinaryOp::from_name(name).expect("arity 2"), a, b),
        };
        Ok((node, depth))
    }
}

pub(super) fn parse(source: &str, signature: &[String]) -> Result<Node, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::new(0, "empty expression"));
    }
    let mut lexer = Lexer { src: source, pos: 0 };
    let first = lexer.next()?;
    let mut parser = Parser {
        lexer,
        peeked: first,
        signature,
        recursion: 0,
    };
    let (node, _) = parser.expr()?;
    match parser.peeked {
        (_, Tok::End) => Ok(node),
        (pos, ref tok) => Err(ParseError::new(pos, format!("unexpected trailing {tok:?}"))),
    }
}
