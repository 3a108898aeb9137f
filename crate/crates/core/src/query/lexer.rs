use crate::query::ast::{CmpOp, DurationUnit, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Lowercased identifier or keyword.
    Ident(String),
    Str(String),
    /// Numeric text, sign included.
    Number(String),
    Duration(i64, DurationUnit),
    Op(CmpOp),
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Number(n) => format!("number {n}"),
            Tok::Duration(v, u) => format!("duration {v}{}", u.suffix()),
            Tok::Op(op) => format!("`{}`", op.as_str()),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'=' => {
                i += 1;
                Tok::Op(CmpOp::Eq)
            }
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 2;
                Tok::Op(CmpOp::Ne)
            }
            b'<' | b'>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                i += 1 + usize::from(eq);
                Tok::Op(match (c, eq) {
                    (b'<', false) => CmpOp::Lt,
                    (b'<', true) => CmpOp::Le,
                    (b'>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                })
            }
            b'"' => {
                let close = text[i + 1..]
                    .find('"')
                    .ok_or_else(|| ParseError::at(text, text.len(), "closing `\"`", "end of input"))?;
                let s = text[i + 1..i + 1 + close].to_string();
                i += close + 2;
                Tok::Str(s)
            }
            b'-' | b'0'..=b'9' => {
                if c == b'-' {
                    i += 1;
                }
                let digits_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits_start {
                    return Err(ParseError::at(text, i, "digit", found_at(text, i)));
                }
                let mut fractional = false;
                if i < bytes.len() && bytes[i] == b'.' {
                    fractional = true;
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac_start {
                        return Err(ParseError::at(text, i, "digit after `.`", found_at(text, i)));
                    }
                }
                let number = &text[start..i];
                if i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    let unit_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    let unit = match text[unit_start..i].to_ascii_lowercase().as_str() {
                        "s" => DurationUnit::Seconds,
                        "min" => DurationUnit::Minutes,
                        "h" => DurationUnit::Hours,
                        other => {
                            return Err(ParseError::at(
                                text,
                                unit_start,
                                "duration unit `s`, `min` or `h`",
                                format!("`{other}`"),
                            ))
                        }
                    };
                    if fractional || c == b'-' {
                        return Err(ParseError::at(
                            text,
                            start,
                            "non-negative integer duration",
                            format!("`{}`", &text[start..i]),
                        ));
                    }
                    let value: i64 = number.parse().map_err(|_| {
                        ParseError::at(text, start, "duration that fits in 64 bits", format!("`{number}`"))
                    })?;
                    Tok::Duration(value, unit)
                } else {
                    Tok::Number(number.to_string())
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'-') {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_ascii_lowercase())
            }
            _ => return Err(ParseError::at(text, i, "a token", found_at(text, i))),
        };
        out.push(Token { tok, offset: start });
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: text.len(),
    });
    Ok(out)
}

fn found_at(text: &str, i: usize) -> String {
    text[i..]
        .chars()
        .next()
        .map_or_else(|| "end of input".to_string(), |c| format!("`{c}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn durations_and_numbers() {
        assert_eq!(
            toks("duration>600s"),
            vec![
                Tok::Ident("duration".into()),
                Tok::Op(CmpOp::Gt),
                Tok::Duration(600, DurationUnit::Seconds),
                Tok::Eof
            ]
        );
        assert_eq!(toks("10MIN")[0], Tok::Duration(10, DurationUnit::Minutes));
        assert_eq!(toks("-1.25")[0], Tok::Number("-1.25".into()));
        assert!(tokenize("5days").is_err());
        assert!(tokenize("1.5h").is_err());
        assert!(tokenize("1.").is_err());
    }

    #[test]
    fn idents_lowercased_strings_kept() {
        assert_eq!(
            toks("ROI-Visits \"MixedCase\""),
            vec![Tok::Ident("roi-visits".into()), Tok::Str("MixedCase".into()), Tok::Eof]
        );
    }

    #[test]
    fn unterminated_string_position() {
        let e = tokenize("raw where object = \"MO").unwrap_err();
        assert_eq!(e.offset, 22);
        assert_eq!(e.column, 23);
    }
}
