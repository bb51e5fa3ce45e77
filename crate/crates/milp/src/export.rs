//! Plain-text LP export for debugging: one named constraint per line.

use crate::model::{Domain, ModelHandle, Sense};
use std::fmt::Write;

/// Renders the model in LP text format.
pub fn write_lp(model: &ModelHandle) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ model {}", model.name());
    let _ = writeln!(
        out,
        "{}",
        match model.sense() {
            Sense::Maximize => "Maximize",
            Sense::Minimize => "Minimize",
        }
    );
    let mut obj_line = String::from(" obj:");
    append_expr(&mut obj_line, model, model.objective().terms());
    if model.objective().constant_part() != 0.0 {
        let _ = write!(obj_line, " + {}", fmt_num(model.objective().constant_part()));
    }
    let _ = writeln!(out, "{obj_line}");
    let _ = writeln!(out, "Subject To");
    for c in model.constraints() {
        let mut line = format!(" {}:", sanitize(&c.name));
        if c.expr.is_empty() {
            let _ = write!(line, " 0");
        } else {
            append_expr(&mut line, model, c.expr.terms());
        }
        let _ = writeln!(out, "{line} {} {}", c.cmp.symbol(), fmt_num(c.rhs));
    }
    let _ = writeln!(out, "Bounds");
    for info in model.vars() {
        let lo = if info.lo == f64::NEG_INFINITY {
            "-inf".to_string()
        } else {
            fmt_num(info.lo)
        };
        let hi = if info.hi == f64::INFINITY {
            "+inf".to_string()
        } else {
            fmt_num(info.hi)
        };
        let _ = writeln!(out, " {lo} <= {} <= {hi}", sanitize(&info.name));
    }
    let generals: Vec<&str> = model
        .vars()
        .iter()
        .filter(|v| v.domain == Domain::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !generals.is_empty() {
        let _ = writeln!(out, "Generals");
        for name in generals {
            let _ = writeln!(out, " {}", sanitize(name));
        }
    }
    let binaries: Vec<&str> = model
        .vars()
        .iter()
        .filter(|v| v.domain == Domain::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        let _ = writeln!(out, "Binaries");
        for name in binaries {
            let _ = writeln!(out, " {}", sanitize(name));
        }
    }
    let _ = writeln!(out, "End");
    out
}

fn append_expr(
    line: &mut String,
    model: &ModelHandle,
    terms: impl Iterator<Item = (crate::VarRef, f64)>,
) {
    let mut first = true;
    for (v, c) in terms {
        let name = sanitize(&model.vars()[v.index()].name);
        if first {
            let _ = write!(line, " {} {}", fmt_num(c), name);
            first = false;
        } else if c < 0.0 {
            let _ = write!(line, " - {} {}", fmt_num(-c), name);
        } else {
            let _ = write!(line, " + {} {}", fmt_num(c), name);
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|ch| {
            if ch.is_ascii_alphanumeric() || ch == '_' || ch == '.' {
                ch
            } else {
                '_'
            }
        })
        .collect()
}
