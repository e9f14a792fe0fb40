//! Recursive-descent parser.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` while `2^-x` is `2^(-x)`.

use super::ast::{BinOp, Expr, Func, Var};
use super::lexer::{Token, TokenKind};
use super::ExprError;

pub fn parse(tokens: &[Token]) -> Result<Expr, ExprError> {
    let mut p = Parser { tokens, pos: 0 };
    if tokens.is_empty() {
        return Err(ExprError::Parse {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        let message = if t.kind == TokenKind::RightParen {
            "unbalanced parenthesis: unmatched ')'".to_string()
        } else {
            format!("unexpected trailing token '{}'", t.lexeme)
        };
        return Err(ExprError::Parse {
            position: t.position,
            message,
        });
    }
    Ok(e)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn end_position(&self) -> usize {
        self.tokens.last().map(|t| t.position + t.lexeme.len()).unwrap_or(0)
    }

    fn peek_operator(&self, ops: &[&str]) -> Option<&'a str> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Operator && ops.contains(&t.lexeme.as_str()) => Some(t.lexeme.as_str()),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op) = self.peek_operator(&["+", "-"]) {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if op == "+" { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_operator(&["*", "/"]) {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if op == "*" { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek_operator(&["-"]).is_some() {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek_operator(&["^"]).is_some() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(tok) = self.peek() else {
            return Err(ExprError::Parse {
                position: self.end_position(),
                message: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Number => {
                self.pos += 1;
                let v = tok.lexeme.parse::<f64>().map_err(|_| ExprError::Parse {
                    position: tok.position,
                    message: format!("invalid number '{}'", tok.lexeme),
                })?;
                Ok(Expr::Const(v))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                let next_is_paren = matches!(self.peek(), Some(t) if t.kind == TokenKind::LeftParen);
                if next_is_paren {
                    let func = Func::from_name(&tok.lexeme).ok_or_else(|| ExprError::Parse {
                        position: tok.position,
                        message: format!("unknown function '{}'", tok.lexeme),
                    })?;
                    let open = self.peek().unwrap();
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_close(open)?;
                    Ok(Expr::call(func, arg))
                } else if let Some(v) = Var::from_name(&tok.lexeme) {
                    Ok(Expr::Var(v))
                } else if Func::from_name(&tok.lexeme).is_some() {
                    Err(ExprError::Parse {
                        position: tok.position,
                        message: format!("function '{}' requires a parenthesized argument", tok.lexeme),
                    })
                } else {
                    Err(ExprError::Parse {
                        position: tok.position,
                        message: format!("unknown variable '{}' (expected x, y or z)", tok.lexeme),
                    })
                }
            }
            TokenKind::LeftParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_close(tok)?;
                Ok(inner)
            }
            TokenKind::RightParen => Err(ExprError::Parse {
                position: tok.position,
                message: "unbalanced parenthesis: unexpected ')'".into(),
            }),
            TokenKind::Operator | TokenKind::Comma => Err(ExprError::Parse {
                position: tok.position,
                message: format!("unexpected token '{}'", tok.lexeme),
            }),
        }
    }

    fn expect_close(&mut self, open: &Token) -> Result<(), ExprError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::RightParen => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ExprError::Parse {
                position: t.position,
                message: format!("expected ')' but found '{}'", t.lexeme),
            }),
            None => Err(ExprError::Parse {
                position: open.position,
                message: "unbalanced parenthesis: '(' is never closed".into(),
            }),
        }
    }
}
