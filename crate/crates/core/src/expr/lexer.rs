use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    LeftParen,
    RightParen,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// Byte offset of the first character in the source.
    pub position: usize,
}

impl Token {
    fn new(kind: TokenKind, lexeme: &str, position: usize) -> Self {
        Self {
            kind,
            lexeme: lexeme.to_string(),
            position,
        }
    }
}

/// Splits `source` into tokens. Whitespace separates tokens and is dropped.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;

    while pos < bytes.len() {
        let c = bytes[pos];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => pos += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                tokens.push(Token::new(TokenKind::Operator, &source[pos..pos + 1], pos));
                pos += 1;
            }
            b'(' => {
                tokens.push(Token::new(TokenKind::LeftParen, "(", pos));
                pos += 1;
            }
            b')' => {
                tokens.push(Token::new(TokenKind::RightParen, ")", pos));
                pos += 1;
            }
            b',' => {
                tokens.push(Token::new(TokenKind::Comma, ",", pos));
                pos += 1;
            }
            b'0'..=b'9' | b'.' => {
                let end = scan_number(bytes, pos);
                let lexeme = &source[pos..end];
                match lexeme.parse::<f64>() {
                    Ok(v) if v.is_finite() => {}
                    _ => {
                        return Err(ExprError::Lex {
                            position: pos,
                            message: format!("malformed number literal '{lexeme}'"),
                        })
                    }
                }
                tokens.push(Token::new(TokenKind::Number, lexeme, pos));
                pos = end;
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = pos + 1;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                tokens.push(Token::new(TokenKind::Identifier, &source[pos..end], pos));
                pos = end;
            }
            _ => {
                let ch = source[pos..].chars().next().unwrap_or('?');
                return Err(ExprError::Lex {
                    position: pos,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        }
    }
    Ok(tokens)
}

// digits [. digits] [(e|E) [+-] digits]; the exponent is only consumed when
// at least one digit follows it.
fn scan_number(bytes: &[u8], start: usize) -> usize {
    let mut end = start;
    while end < bytes.len() && bytes[end].is_ascii_digit() {
        end += 1;
    }
    if end < bytes.len() && bytes[end] == b'.' {
        end += 1;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
    }
    if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
        let mut exp = end + 1;
        if exp < bytes.len() && (bytes[exp] == b'+' || bytes[exp] == b'-') {
            exp += 1;
        }
        if exp < bytes.len() && bytes[exp].is_ascii_digit() {
            while exp < bytes.len() && bytes[exp].is_ascii_digit() {
                exp += 1;
            }
            end = exp;
        }
    }
    end
}
