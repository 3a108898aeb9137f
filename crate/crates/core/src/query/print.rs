use std::fmt::Write;

use crate::query::ast::{Literal, Predicate, Projection, QueryAst};

/// Canonical text of a query: lowercase keywords, single spaces, and no
/// `select` clause when every default field is projected. Parsing the
/// output yields an equal AST.
pub fn pretty_print(ast: &QueryAst) -> String {
    let mut out = ast.source.as_str().to_string();
    for (i, p) in ast.predicates.iter().enumerate() {
        out.push_str(if i == 0 { " where " } else { " and " });
        write_predicate(&mut out, p);
    }
    if let Some(g) = &ast.group_by {
        let _ = write!(out, " group by {g}");
    }
    match &ast.projection {
        Projection::All => {}
        Projection::Count => out.push_str(" select count"),
        Projection::Fields(fs) => {
            let _ = write!(out, " select {}", fs.join(", "));
        }
    }
    out
}

fn write_predicate(out: &mut String, p: &Predicate) {
    let _ = match p {
        Predicate::Compare { field, op, value } => {
            write!(out, "{field} {} {}", op.as_str(), literal(value))
        }
        Predicate::Like { field, pattern } => write!(out, "{field} like \"{pattern}\""),
        Predicate::IntersectsLayer(cat) => write!(out, "intersects(layer \"{cat}\")"),
        Predicate::WithinRegion(name) => write!(out, "within(region \"{name}\")"),
        Predicate::InWindow(w) => write!(
            out,
            "window({}, {}, {}, {}, {}, {})",
            w.rect.x_min,
            w.rect.x_max,
            w.rect.y_min,
            w.rect.y_max,
            w.time.begin().seconds(),
            w.time.end().seconds()
        ),
    };
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Str(s) => format!("\"{s}\""),
        Literal::Int(i) => i.to_string(),
        Literal::Num(f) => {
            let s = f.to_string();
            if s.contains('.') {
                s
            } else {
                s + ".0"
            }
        }
        Literal::Duration { value, unit } => format!("{value}{}", unit.suffix()),
    }
}
