//! `{name}` placeholder substitution for feedback hints. `{{` and `}}` are
//! literal braces.

use std::collections::BTreeMap;

use crate::testkit::TestKind;

/// Placeholders every failed test can fill.
pub const PLACEHOLDERS: &[&str] = &["tick", "x", "y", "heading", "measured", "detail", "kind", "title", "l_total"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: no value for placeholder {{{placeholder}}}")]
    MissingValue { template: String, placeholder: String },
    #[error("template {template}: {message}")]
    Malformed { template: String, message: String },
}

enum Piece<'a> {
    Text(&'a str),
    Var(&'a str),
}

fn pieces(src: &str) -> Result<Vec<Piece<'_>>, String> {
    let mut out = Vec::new();
    let mut rest = src;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("{{") {
            out.push(Piece::Text("{"));
            rest = r;
        } else if let Some(r) = rest.strip_prefix("}}") {
            out.push(Piece::Text("}"));
            rest = r;
        } else if let Some(r) = rest.strip_prefix('{') {
            let end = r.find('}').ok_or("unclosed '{'")?;
            let name = &r[..end];
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(format!("bad placeholder {{{name}}}"));
            }
            out.push(Piece::Var(name));
            rest = &r[end + 1..];
        } else if rest.starts_with('}') {
            return Err("unmatched '}'".into());
        } else {
            let end = rest.find(['{', '}']).unwrap_or(rest.len());
            out.push(Piece::Text(&rest[..end]));
            rest = &rest[end..];
        }
    }
    Ok(out)
}

/// Fills `src` from `values`; `name` labels errors.
pub fn render(name: &str, src: &str, values: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
    let parts = pieces(src).map_err(|message| TemplateError::Malformed {
        template: name.to_string(),
        message,
    })?;
    let mut out = String::with_capacity(src.len());
    for p in parts {
        match p {
            Piece::Text(t) => out.push_str(t),
            Piece::Var(v) => out.push_str(values.get(v).ok_or_else(|| TemplateError::MissingValue {
                template: name.to_string(),
                placeholder: v.to_string(),
            })?),
        }
    }
    Ok(out)
}

/// Checks syntax and that only known placeholders appear.
pub fn check_template(src: &str) -> Result<(), String> {
    for p in pieces(src)? {
        if let Piece::Var(v) = p {
            if !PLACEHOLDERS.contains(&v) {
                return Err(format!("unknown placeholder {{{v}}}"));
            }
        }
    }
    Ok(())
}

pub fn default_hint(kind: TestKind) -> &'static str {
    match kind {
        TestKind::NoCollision => {
            "Your robot hit an obstacle at tick {tick} near ({x},{y}); check your front-sensor threshold before turning."
        }
        TestKind::NoStall => {
            "Your robot stood still until tick {tick} near ({x},{y}); keep calling drive with a nonzero speed until the goal is reached."
        }
        TestKind::RightTurnsAtEdges => {
            "At tick {tick} near ({x},{y}) your robot turned left beside an obstacle; keep the obstacle on your left and turn right to go around it."
        }
        TestKind::Smoothness => {
            "Only {measured} of your ticks were smooth and the first jump came at tick {tick}; change v and omega a little at a time."
        }
        TestKind::GoalReached => {
            "The episode ended at tick {tick}, {measured} m from the goal; check when your robot leaves the obstacle and where it steers afterwards."
        }
        TestKind::PathLength => {
            "Your path was {measured} times the reference of {l_total} m; leave the obstacle as soon as you are back on the start-goal line, closer to the goal."
        }
    }
}
