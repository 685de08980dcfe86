use std::fmt;

use serde::{Deserialize, Serialize};

use super::kind::ElementKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    Position,
    Associate,
    Connect,
    Unfold,
}

impl Operator {
    pub fn as_str(self) -> &'static str {
        match self {
            Operator::Position => "position",
            Operator::Associate => "associate",
            Operator::Connect => "connect",
            Operator::Unfold => "unfold",
        }
    }

    fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "position" => Operator::Position,
            "associate" => Operator::Associate,
            "connect" => Operator::Connect,
            "unfold" => Operator::Unfold,
            _ => return None,
        })
    }
}

/// An operator chain over story elements. The left operand is any
/// expression; the right operand is always a single element kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructExpr {
    Base(ElementKind),
    Position(Box<ConstructExpr>, ElementKind),
    Associate(Box<ConstructExpr>, ElementKind),
    Connect(Box<ConstructExpr>, ElementKind),
    Unfold(Box<ConstructExpr>, ElementKind),
}

impl ConstructExpr {
    pub fn apply(self, op: Operator, kind: ElementKind) -> Self {
        let x = Box::new(self);
        match op {
            Operator::Position => ConstructExpr::Position(x, kind),
            Operator::Associate => ConstructExpr::Associate(x, kind),
            Operator::Connect => ConstructExpr::Connect(x, kind),
            Operator::Unfold => ConstructExpr::Unfold(x, kind),
        }
    }

    /// Splits off the outermost operator.
    pub fn outer(&self) -> Option<(&ConstructExpr, Operator, ElementKind)> {
        match self {
            ConstructExpr::Base(_) => None,
            ConstructExpr::Position(x, y) => Some((x, Operator::Position, *y)),
            ConstructExpr::Associate(x, y) => Some((x, Operator::Associate, *y)),
            ConstructExpr::Connect(x, y) => Some((x, Operator::Connect, *y)),
            ConstructExpr::Unfold(x, y) => Some((x, Operator::Unfold, *y)),
        }
    }

    pub fn base(&self) -> ElementKind {
        match self.outer() {
            None => match self {
                ConstructExpr::Base(k) => *k,
                _ => unreachable!(),
            },
            Some((x, _, _)) => x.base(),
        }
    }

    /// Operators in application order, innermost first.
    pub fn steps(&self) -> Vec<(Operator, ElementKind)> {
        let mut steps = Vec::new();
        let mut cursor = self;
        while let Some((x, op, y)) = cursor.outer() {
            steps.push((op, y));
            cursor = x;
        }
        steps.reverse();
        steps
    }

    /// Checks the operand constraints the parser enforces, for expressions
    /// built in code.
    pub fn validate(&self) -> Result<(), ExprError> {
        for (op, y) in self.steps() {
            if op == Operator::Position && !position_accepts(y) {
                return Err(ExprError::InvalidPosition(y));
            }
        }
        Ok(())
    }
}

fn position_accepts(kind: ElementKind) -> bool {
    matches!(kind, ElementKind::Location | ElementKind::Space)
}

impl fmt::Display for ConstructExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base().dsl_name())?;
        for (op, y) in self.steps() {
            write!(f, " |> {}({})", op.as_str(), y.dsl_name())?;
        }
        Ok(())
    }
}

pub fn pretty_print(expr: &ConstructExpr) -> String {
    expr.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("at column {column}: unknown story element `{name}`")]
    UnknownKind { column: usize, name: String },
    #[error("at column {column}: unknown operator `{name}` (expected position, associate, connect or unfold)")]
    UnknownOperator { column: usize, name: String },
    #[error("position only accepts locations or spaces, not {0}")]
    InvalidPosition(ElementKind),
}

impl ExprError {
    /// One-based column of the offending token, when the error has one.
    pub fn column(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { column, .. }
            | ExprError::UnknownKind { column, .. }
            | ExprError::UnknownOperator { column, .. } => Some(*column),
            ExprError::InvalidPosition(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Ident(&'a str),
    Pipe,
    Open,
    Close,
}

impl Token<'_> {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::Pipe => "`|>`".into(),
            Token::Open => "`(`".into(),
            Token::Close => "`)`".into(),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(usize, Token<'_>)>, ExprError> {
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();
    let column = |byte: usize| source[..byte].chars().count() + 1;
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push((column(i), Token::Open));
            }
            ')' => {
                chars.next();
                tokens.push((column(i), Token::Close));
            }
            '|' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => tokens.push((column(i), Token::Pipe)),
                    _ => {
                        return Err(ExprError::Syntax {
                            column: column(i),
                            message: "expected `|>`".into(),
                        })
                    }
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        end = j + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push((column(i), Token::Ident(&source[i..end])));
            }
            other => {
                return Err(ExprError::Syntax {
                    column: column(i),
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

/// Parses `<kind> (|> <operator>(<kind>))*`.
pub fn parse_expr(source: &str) -> Result<ConstructExpr, ExprError> {
    let tokens = lex(source)?;
    let end_column = source.chars().count() + 1;
    let mut pos = 0;

    let expect_ident = |pos: &mut usize, what: &str| -> Result<(usize, &str), ExprError> {
        match tokens.get(*pos) {
            Some((col, Token::Ident(name))) => {
                *pos += 1;
                Ok((*col, *name))
            }
            Some((col, other)) => Err(ExprError::Syntax {
                column: *col,
                message: format!("expected {what}, found {}", other.describe()),
            }),
            None => Err(ExprError::Syntax {
                column: end_column,
                message: format!("expected {what}, found end of input"),
            }),
        }
    };
    let kind_at = |col: usize, name: &str| {
        name.parse::<ElementKind>()
            .map_err(|_| ExprError::UnknownKind { column: col, name: name.to_string() })
    };

    let (col, name) = expect_ident(&mut pos, "a story element")?;
    let mut expr = ConstructExpr::Base(kind_at(col, name)?);

    while pos < tokens.len() {
        match &tokens[pos] {
            (_, Token::Pipe) => pos += 1,
            (col, other) => {
                return Err(ExprError::Syntax {
                    column: *col,
                    message: format!("expected `|>`, found {}", other.describe()),
                })
            }
        }
        let (col, name) = expect_ident(&mut pos, "an operator")?;
        let op = Operator::parse(name)
            .ok_or_else(|| ExprError::UnknownOperator { column: col, name: name.to_string() })?;
        match tokens.get(pos) {
            Some((_, Token::Open)) => pos += 1,
            Some((col, other)) => {
                return Err(ExprError::Syntax {
                    column: *col,
                    message: format!("expected `(`, found {}", other.describe()),
                })
            }
            None => {
                return Err(ExprError::Syntax {
                    column: end_column,
                    message: "expected `(`, found end of input".into(),
                })
            }
        }
        let (col, name) = expect_ident(&mut pos, "a story element")?;
        let kind = kind_at(col, name)?;
        match tokens.get(pos) {
            Some((_, Token::Close)) => pos += 1,
            Some((col, other)) => {
                return Err(ExprError::Syntax {
                    column: *col,
                    message: format!("expected `)`, found {}", other.describe()),
                })
            }
            None => {
                return Err(ExprError::Syntax {
                    column: end_column,
                    message: "expected `)`, found end of input".into(),
                })
            }
        }
        if op == Operator::Position && !position_accepts(kind) {
            return Err(ExprError::InvalidPosition(kind));
        }
        expr = expr.apply(op, kind);
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ElementKind::*;

    #[test]
    fn single_kind() {
        assert_eq!(parse_expr("characters").unwrap(), ConstructExpr::Base(Character));
    }

    #[test]
    fn chains_apply_left_to_right() {
        let expr = parse_expr("time |> unfold(characters) |> connect(events)").unwrap();
        assert_eq!(
            expr,
            ConstructExpr::Connect(
                Box::new(ConstructExpr::Unfold(Box::new(ConstructExpr::Base(Time)), Character)),
                Event
            )
        );
        assert_eq!(expr.to_string(), "time |> unfold(characters) |> connect(events)");
    }

    #[test]
    fn position_is_restricted() {
        assert_eq!(
            parse_expr("characters |> position(events)"),
            Err(ExprError::InvalidPosition(Event))
        );
        assert!(parse_expr("characters |> position(space)").is_ok());
    }

    #[test]
    fn errors_point_at_the_token() {
        let e = parse_expr("characters |> fold(events)").unwrap_err();
        assert_eq!(e.column(), Some(15));
        let e = parse_expr("characters |> connect(plots)").unwrap_err();
        assert!(matches!(e, ExprError::UnknownKind { column: 23, .. }));
        let e = parse_expr("characters |> connect(events").unwrap_err();
        assert_eq!(e.column(), Some(29));
        let e = parse_expr("characters connect").unwrap_err();
        assert_eq!(e.column(), Some(12));
        let e = parse_expr("").unwrap_err();
        assert_eq!(e.column(), Some(1));
        let e = parse_expr("characters | connect(events)").unwrap_err();
        assert_eq!(e.column(), Some(12));
    }
}
