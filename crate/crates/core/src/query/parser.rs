use crate::query::ast::{Literal, ParseError, Predicate, Projection, QueryAst, Source};
use crate::query::fields::{field_table, FieldDef, FieldType};
use crate::query::lexer::{tokenize, Tok, Token};
use crate::store::STWindow;
use crate::time::TimeInterval;

/// Parses and validates a query. Field names are checked against the
/// source, and comparison literals against the field's type.
pub fn parse(text: &str) -> Result<QueryAst, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { text, tokens, pos: 0 };
    p.query()
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError::at(self.text, self.offset(), expected, self.peek().describe())
    }

    fn error_at(&self, offset: usize, expected: impl Into<String>, found: impl Into<String>) -> ParseError {
        ParseError::at(self.text, offset, expected, found)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("`{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let off = self.offset();
                self.advance();
                Ok((s, off))
            }
            _ => Err(self.error(what)),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.error("string literal")),
        }
    }

    fn query(&mut self) -> Result<QueryAst, ParseError> {
        let source_names = Source::ALL.map(Source::as_str).join(", ");
        let (name, off) = self.ident(&format!("source ({source_names})"))?;
        let source: Source = name
            .parse()
            .map_err(|_| self.error_at(off, format!("source ({source_names})"), format!("`{name}`")))?;
        let fields = field_table(source);

        let mut predicates = Vec::new();
        let mut field_refs = Vec::new();
        if self.at_keyword("where") {
            self.advance();
            loop {
                predicates.push(self.predicate(source, fields, &mut field_refs)?);
                if !self.at_keyword("and") {
                    break;
                }
                self.advance();
            }
        }

        let mut group_by = None;
        if self.at_keyword("group") {
            self.advance();
            self.keyword("by")?;
            let (f, off) = self.ident("field name")?;
            lookup(self.text, source, fields, &f, off)?;
            field_refs.push((f.clone(), off));
            group_by = Some(f);
        }

        let mut projection = Projection::All;
        if self.at_keyword("select") {
            self.advance();
            if self.at_keyword("count") && !matches!(self.peek2(), Tok::Comma) {
                self.advance();
                projection = Projection::Count;
            } else {
                let mut names = Vec::new();
                loop {
                    let (f, off) = self.ident("field name or `count`")?;
                    lookup(self.text, source, fields, &f, off)?;
                    if group_by.is_some() {
                        return Err(self.error_at(off, "`count` after `group by`", format!("`{f}`")));
                    }
                    field_refs.push((f.clone(), off));
                    names.push(f);
                    if !matches!(self.peek(), Tok::Comma) {
                        break;
                    }
                    self.advance();
                }
                projection = Projection::Fields(names);
            }
        }

        if *self.peek() != Tok::Eof {
            let expected = match (predicates.is_empty(), group_by.is_some(), &projection) {
                (_, _, Projection::Fields(_)) => "`,` or end of input",
                (_, _, Projection::Count) => "end of input",
                (_, true, _) => "`select` or end of input",
                (true, false, _) => "`where`, `group by`, `select` or end of input",
                (false, false, _) => "`and`, `group by`, `select` or end of input",
            };
            return Err(self.error(expected));
        }

        let has_layer = predicates.iter().any(|p| matches!(p, Predicate::IntersectsLayer(_)));
        for (f, off) in &field_refs {
            let def = lookup(self.text, source, fields, f, *off)?;
            if def.layer_only && !has_layer {
                return Err(self.error_at(
                    *off,
                    format!("an `intersects(layer \"...\")` predicate before using `{f}` on {source}"),
                    format!("`{f}`"),
                ));
            }
        }

        Ok(QueryAst {
            source,
            predicates,
            group_by,
            projection,
        })
    }

    fn predicate(
        &mut self,
        source: Source,
        fields: &'static [FieldDef],
        field_refs: &mut Vec<(String, usize)>,
    ) -> Result<Predicate, ParseError> {
        if matches!(self.peek2(), Tok::LParen) {
            if self.at_keyword("intersects") {
                self.advance();
                self.expect(Tok::LParen)?;
                self.keyword("layer")?;
                let cat = self.string()?;
                self.expect(Tok::RParen)?;
                return Ok(Predicate::IntersectsLayer(cat));
            }
            if self.at_keyword("within") {
                self.advance();
                self.expect(Tok::LParen)?;
                self.keyword("region")?;
                let name = self.string()?;
                self.expect(Tok::RParen)?;
                return Ok(Predicate::WithinRegion(name));
            }
            if self.at_keyword("window") {
                return self.window();
            }
        }

        let (field, off) = self.ident("field name, `intersects(`, `within(` or `window(`")?;
        let def = lookup(self.text, source, fields, &field, off)?;
        field_refs.push((field.clone(), off));
        if self.at_keyword("like") {
            self.advance();
            if def.ty != FieldType::Str {
                return Err(self.error_at(off, "a string field before `like`", format!("`{field}`")));
            }
            let pattern = self.string()?;
            return Ok(Predicate::Like { field, pattern });
        }
        let op = match self.peek() {
            Tok::Op(op) => *op,
            _ => return Err(self.error("comparison operator or `like`")),
        };
        self.advance();
        let lit_off = self.offset();
        let value = self.literal()?;
        if !def.ty.accepts(&value) {
            return Err(self.error_at(
                lit_off,
                format!("{} literal for `{field}`", def.ty.describe()),
                format!("{} literal", value.describe()),
            ));
        }
        Ok(Predicate::Compare { field, op, value })
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let off = self.offset();
        let lit = match self.peek().clone() {
            Tok::Str(s) => Literal::Str(s),
            Tok::Duration(value, unit) => Literal::Duration { value, unit },
            Tok::Number(n) => {
                number_literal(&n).ok_or_else(|| self.error_at(off, "number in range", format!("number {n}")))?
            }
            _ => return Err(self.error("literal")),
        };
        self.advance();
        Ok(lit)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let off = self.offset();
        match self.peek().clone() {
            Tok::Number(n) => {
                let v = n
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error_at(off, "finite number", format!("number {n}")))?;
                self.advance();
                Ok(v)
            }
            _ => Err(self.error("number")),
        }
    }

    fn instant(&mut self) -> Result<i64, ParseError> {
        let off = self.offset();
        match self.peek().clone() {
            Tok::Number(n) => match n.parse::<i64>() {
                Ok(t) if t >= 0 => {
                    self.advance();
                    Ok(t)
                }
                _ => Err(self.error_at(off, "non-negative integer time", format!("number {n}"))),
            },
            _ => Err(self.error("non-negative integer time")),
        }
    }

    fn window(&mut self) -> Result<Predicate, ParseError> {
        let start = self.offset();
        self.advance();
        self.expect(Tok::LParen)?;
        let mut coords = [0.0; 4];
        for c in coords.iter_mut() {
            *c = self.number()?;
            self.expect(Tok::Comma)?;
        }
        let t0 = self.instant()?;
        self.expect(Tok::Comma)?;
        let t1 = self.instant()?;
        self.expect(Tok::RParen)?;
        let [x_min, x_max, y_min, y_max] = coords;
        let time = TimeInterval::from_secs(t0, t1)
            .map_err(|_| self.error_at(start, "window with t0 <= t1", format!("t0 {t0} > t1 {t1}")))?;
        let w = STWindow::new(x_min, x_max, y_min, y_max, time).map_err(|_| {
            self.error_at(
                start,
                "window with x_min <= x_max and y_min <= y_max",
                format!("x [{x_min}, {x_max}], y [{y_min}, {y_max}]"),
            )
        })?;
        Ok(Predicate::InWindow(w))
    }
}

fn number_literal(text: &str) -> Option<Literal> {
    if text.contains('.') {
        text.parse::<f64>().ok().filter(|f| f.is_finite()).map(Literal::Num)
    } else {
        text.parse::<i64>().ok().map(Literal::Int)
    }
}

fn lookup(
    text: &str,
    source: Source,
    fields: &'static [FieldDef],
    name: &str,
    off: usize,
) -> Result<&'static FieldDef, ParseError> {
    fields.iter().find(|f| f.name == name).ok_or_else(|| {
        let valid: Vec<&str> = fields.iter().map(|f| f.name).collect();
        ParseError::at(
            text,
            off,
            format!("a field of {source} ({})", valid.join(", ")),
            format!("`{name}`"),
        )
    })
}
