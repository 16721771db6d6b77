//! Hand-rolled lexer for MJ source.

use super::ast::Pos;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    // literals
    IntLit(i32),
    FloatLit(f64),
    CharLit(char),
    Ident(String),
    // keywords
    Class,
    If,
    Else,
    While,
    For,
    Break,
    Return,
    New,
    Null,
    True,
    False,
    Public,
    Int,
    Float,
    Bool,
    Char,
    Void,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    PlusPlus,
    MinusMinus,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::IntLit(v) => format!("integer literal `{v}`"),
            Tok::FloatLit(v) => format!("float literal `{v}`"),
            Tok::CharLit(c) => format!("char literal `{c}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Class => "class",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::For => "for",
            Tok::Break => "break",
            Tok::Return => "return",
            Tok::New => "new",
            Tok::Null => "null",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Public => "public",
            Tok::Int => "int",
            Tok::Float => "float",
            Tok::Bool => "bool",
            Tok::Char => "char",
            Tok::Void => "void",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::PlusPlus => "++",
            Tok::MinusMinus => "--",
            Tok::PlusAssign => "+=",
            Tok::MinusAssign => "-=",
            Tok::StarAssign => "*=",
            Tok::SlashAssign => "/=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn lex(source: &str) -> Result<Vec<SpannedTok>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $pos:expr) => {
            out.push(SpannedTok { tok: $tok, pos: $pos })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut is_float = false;
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    is_float = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // optional Java-style float suffix
                if i < chars.len() && (chars[i] == 'f' || chars[i] == 'F') {
                    is_float = true;
                    i += 1;
                }
                let text: String = chars[start..i]
                    .iter()
                    .filter(|c| **c != 'f' && **c != 'F')
                    .collect();
                let len = (i - start) as u32;
                if is_float {
                    let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                        pos,
                        message: format!("malformed float literal `{text}`"),
                    })?;
                    push!(Tok::FloatLit(v), pos);
                } else {
                    // magnitude up to 2^31 so `-2147483648` round-trips;
                    // the bare literal 2147483648 wraps to i32::MIN.
                    let v: u64 = text.parse().map_err(|_| ParseError::Syntax {
                        pos,
                        message: format!("malformed integer literal `{text}`"),
                    })?;
                    if v > 1u64 << 31 {
                        return Err(ParseError::Syntax {
                            pos,
                            message: format!("integer literal `{text}` out of 32-bit range"),
                        });
                    }
                    push!(Tok::IntLit(v as u32 as i32), pos);
                }
                col += len;
            }
            '\'' => {
                if i + 2 < chars.len() && chars[i + 2] == '\'' && chars[i + 1] != '\\' {
                    push!(Tok::CharLit(chars[i + 1]), pos);
                    i += 3;
                    col += 3;
                } else if i + 3 < chars.len() && chars[i + 1] == '\\' && chars[i + 3] == '\'' {
                    let c = match chars[i + 2] {
                        'n' => '\n',
                        't' => '\t',
                        '\\' => '\\',
                        '\'' => '\'',
                        '0' => '\0',
                        other => {
                            return Err(ParseError::Syntax {
                                pos,
                                message: format!("unknown escape `\\{other}` in char literal"),
                            })
                        }
                    };
                    push!(Tok::CharLit(c), pos);
                    i += 4;
                    col += 4;
                } else {
                    return Err(ParseError::Syntax {
                        pos,
                        message: "unterminated char literal".to_string(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let len = (i - start) as u32;
                let tok = match word.as_str() {
                    "class" => Tok::Class,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "for" => Tok::For,
                    "break" => Tok::Break,
                    "return" => Tok::Return,
                    "new" => Tok::New,
                    "null" => Tok::Null,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "public" => Tok::Public,
                    "int" => Tok::Int,
                    "float" => Tok::Float,
                    "bool" => Tok::Bool,
                    "char" => Tok::Char,
                    "void" => Tok::Void,
                    _ => Tok::Ident(word),
                };
                push!(tok, pos);
                col += len;
            }
            _ => {
                let two = if i + 1 < chars.len() {
                    Some((chars[i], chars[i + 1]))
                } else {
                    None
                };
                let (tok, len) = match two {
                    Some(('+', '+')) => (Tok::PlusPlus, 2),
                    Some(('-', '-')) => (Tok::MinusMinus, 2),
                    Some(('+', '=')) => (Tok::PlusAssign, 2),
                    Some(('-', '=')) => (Tok::MinusAssign, 2),
                    Some(('*', '=')) => (Tok::StarAssign, 2),
                    Some(('/', '=')) => (Tok::SlashAssign, 2),
                    Some(('<', '=')) => (Tok::Le, 2),
                    Some(('>', '=')) => (Tok::Ge, 2),
                    Some(('=', '=')) => (Tok::EqEq, 2),
                    Some(('!', '=')) => (Tok::NotEq, 2),
                    Some(('&', '&')) => (Tok::AndAnd, 2),
                    Some(('|', '|')) => (Tok::OrOr, 2),
                    _ => match c {
                        '{' => (Tok::LBrace, 1),
                        '}' => (Tok::RBrace, 1),
                        '(' => (Tok::LParen, 1),
                        ')' => (Tok::RParen, 1),
                        '[' => (Tok::LBracket, 1),
                        ']' => (Tok::RBracket, 1),
                        ';' => (Tok::Semi, 1),
                        ',' => (Tok::Comma, 1),
                        '.' => (Tok::Dot, 1),
                        '=' => (Tok::Assign, 1),
                        '+' => (Tok::Plus, 1),
                        '-' => (Tok::Minus, 1),
                        '*' => (Tok::Star, 1),
                        '/' => (Tok::Slash, 1),
                        '%' => (Tok::Percent, 1),
                        '<' => (Tok::Lt, 1),
                        '>' => (Tok::Gt, 1),
                        '!' => (Tok::Bang, 1),
                        other => {
                            return Err(ParseError::Syntax {
                                pos,
                                message: format!("unexpected character `{other}`"),
                            })
                        }
                    },
                };
                push!(tok, pos);
                i += len;
                col += len as u32;
            }
        }
    }
    out.push(SpannedTok {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators_and_literals() {
        let toks = lex("i += 2.0f; x++ != 'a'").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert!(matches!(kinds[0], Tok::Ident(s) if s == "i"));
        assert_eq!(kinds[1], &Tok::PlusAssign);
        assert!(matches!(kinds[2], Tok::FloatLit(v) if *v == 2.0));
        assert_eq!(kinds[3], &Tok::Semi);
        assert!(matches!(kinds[5], Tok::PlusPlus));
        assert!(matches!(kinds[6], Tok::NotEq));
        assert!(matches!(kinds[7], Tok::CharLit('a')));
    }

    #[test]
    fn comments_are_skipped() {
        let toks = lex("a // trailing\nb").unwrap();
        assert_eq!(toks.len(), 3); // a, b, eof
        assert_eq!(toks[1].pos.line, 2);
    }

    #[test]
    fn rejects_stray_characters() {
        match lex("a # b").unwrap_err() {
            ParseError::Syntax { message, .. } => {
                assert!(message.contains("unexpected character"))
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }
}
