use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use super::{LoopBlock, Node, Operand, Program, Statement, VarId};

const INDENT: &str = "    ";

/// Renders the program as Python-like source, one statement per line, with
/// four spaces of indentation per loop level.
pub fn render_source(program: &Program) -> String {
    let mut lines = Vec::new();
    render_nodes(&program.body, 0, &mut lines);
    lines.join("\n")
}

fn render_nodes(nodes: &[Node], depth: usize, out: &mut Vec<String>) {
    for node in nodes {
        match node {
            Node::Stmt(s) => out.push(format!("{}{}", INDENT.repeat(depth), render_statement(s))),
            Node::Loop(l) => {
                out.push(format!("{}for _ in range({}):", INDENT.repeat(depth), l.count));
                render_nodes(&l.body, depth + 1, out);
            }
        }
    }
}

pub(crate) fn render_statement(s: &Statement) -> String {
    match s {
        Statement::Init { var, value } => format!("{var}={value}"),
        // a one-element chain reads back as a plain initialisation
        Statement::MultiInit { vars, value } if vars.len() == 1 => format!("{}={value}", vars[0]),
        Statement::MultiInit { vars, value } => {
            let lhs: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            format!("{} = {value}", lhs.join(" = "))
        }
        Statement::Assign { dst, src } => format!("{dst} = {src}"),
        Statement::AddAssign { dst, operand } => format!("{dst} += {operand}"),
        Statement::SubAssign { dst, operand } => format!("{dst} -= {operand}"),
        Statement::AndAssign { dst, src } => format!("{dst} &= {src}"),
        Statement::OrAssign { dst, src } => format!("{dst} |= {src}"),
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: indentation is not a multiple of four spaces")]
    BadIndent { line: usize },
    #[error("line {line}: unexpected indentation")]
    UnexpectedIndent { line: usize },
    #[error("line {line}: cannot parse `{text}`")]
    Syntax { line: usize, text: String },
    #[error("loop at line {line} has an empty body")]
    EmptyLoop { line: usize },
}

static LOOP_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^for\s+\w+\s+in\s+range\((\d+)\)\s*:$").unwrap());
static COMPOUND_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^a(\d+)\s*(\+=|-=|&=|\|=)\s*(?:a(\d+)|(-?\d+))$").unwrap()
});
static ASSIGN_CHAIN_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^((?:a\d+\s*=\s*)+)(?:a(\d+)|(-?\d+))$").unwrap());
static VAR_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"a(\d+)").unwrap());

/// Parses text produced by [`render_source`]. Also accepts several statements
/// on one line separated by `;`. The variable count is one more than the
/// highest index mentioned.
pub fn parse_source(text: &str) -> Result<Program, ParseError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let body = raw.trim_start_matches(' ');
        let indent = raw.len() - body.len();
        if indent % INDENT.len() != 0 {
            return Err(ParseError::BadIndent { line });
        }
        for part in body.split(';') {
            let part = part.trim();
            if !part.is_empty() {
                lines.push((line, indent / INDENT.len(), part.to_string()));
            }
        }
    }
    let mut pos = 0;
    let body = parse_block(&lines, &mut pos, 0)?;
    if pos != lines.len() {
        return Err(ParseError::UnexpectedIndent { line: lines[pos].0 });
    }
    let mut max = None;
    for (_, _, t) in &lines {
        for c in VAR_RE.captures_iter(t) {
            let idx: u32 = c[1].parse().map_err(|_| ParseError::Syntax {
                line: 0,
                text: t.clone(),
            })?;
            max = max.max(Some(idx));
        }
    }
    Ok(Program::new(max.map_or(0, |m| m + 1), body))
}

fn parse_block(
    lines: &[(usize, usize, String)],
    pos: &mut usize,
    depth: usize,
) -> Result<Vec<Node>, ParseError> {
    let mut nodes = Vec::new();
    while *pos < lines.len() {
        let (line, indent, ref text) = lines[*pos];
        if indent < depth {
            break;
        }
        if indent > depth {
            return Err(ParseError::UnexpectedIndent { line });
        }
        *pos += 1;
        if let Some(c) = LOOP_RE.captures(text) {
            let count = c[1].parse().map_err(|_| syntax(line, text))?;
            let body = parse_block(lines, pos, depth + 1)?;
            if body.is_empty() {
                return Err(ParseError::EmptyLoop { line });
            }
            nodes.push(Node::Loop(LoopBlock { count, body }));
        } else {
            nodes.push(Node::Stmt(parse_statement(line, text)?));
        }
    }
    Ok(nodes)
}

fn syntax(line: usize, text: &str) -> ParseError {
    ParseError::Syntax {
        line,
        text: text.to_string(),
    }
}

fn parse_statement(line: usize, text: &str) -> Result<Statement, ParseError> {
    let var = |s: &str| s.parse::<u32>().map(VarId).map_err(|_| syntax(line, text));
    let lit = |s: &str| s.parse::<i64>().map_err(|_| syntax(line, text));
    if let Some(c) = COMPOUND_RE.captures(text) {
        let dst = var(&c[1])?;
        let operand = match (c.get(3), c.get(4)) {
            (Some(v), _) => Operand::Var(var(v.as_str())?),
            (_, Some(n)) => Operand::Lit(lit(n.as_str())?),
            _ => return Err(syntax(line, text)),
        };
        return match (&c[2], operand) {
            ("+=", operand) => Ok(Statement::AddAssign { dst, operand }),
            ("-=", operand) => Ok(Statement::SubAssign { dst, operand }),
            ("&=", Operand::Var(src)) => Ok(Statement::AndAssign { dst, src }),
            ("|=", Operand::Var(src)) => Ok(Statement::OrAssign { dst, src }),
            _ => Err(syntax(line, text)),
        };
    }
    if let Some(c) = ASSIGN_CHAIN_RE.captures(text) {
        let targets: Vec<VarId> = VAR_RE
            .captures_iter(&c[1])
            .map(|t| var(&t[1]))
            .collect::<Result<_, _>>()?;
        return match (c.get(2), c.get(3), targets.as_slice()) {
            (Some(src), _, [dst]) => Ok(Statement::Assign {
                dst: *dst,
                src: var(src.as_str())?,
            }),
            (_, Some(n), [v]) => Ok(Statement::Init {
                var: *v,
                value: lit(n.as_str())?,
            }),
            (_, Some(n), vars) if vars.len() > 1 => Ok(Statement::MultiInit {
                vars: vars.to_vec(),
                value: lit(n.as_str())?,
            }),
            _ => Err(syntax(line, text)),
        };
    }
    Err(syntax(line, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VarId {
        VarId(i)
    }

    #[test]
    fn statement_surface_forms() {
        assert_eq!(render_statement(&Statement::Init { var: v(0), value: -1 }), "a0=-1");
        assert_eq!(
            render_statement(&Statement::AddAssign {
                dst: v(1),
                operand: Operand::Var(v(2))
            }),
            "a1 += a2"
        );
        assert_eq!(render_statement(&Statement::Assign { dst: v(0), src: v(2) }), "a0 = a2");
        assert_eq!(
            render_statement(&Statement::MultiInit {
                vars: vec![v(0), v(1), v(2)],
                value: 1
            }),
            "a0 = a1 = a2 = 1"
        );
        assert_eq!(
            render_statement(&Statement::SubAssign {
                dst: v(3),
                operand: Operand::Lit(4)
            }),
            "a3 -= 4"
        );
        assert_eq!(render_statement(&Statement::OrAssign { dst: v(0), src: v(1) }), "a0 |= a1");
    }

    #[test]
    fn nested_loop_layout() {
        let inner = LoopBlock {
            count: 2,
            body: vec![Node::Stmt(Statement::AddAssign {
                dst: v(0),
                operand: Operand::Lit(1),
            })],
        };
        let p = Program::new(
            1,
            vec![Node::Loop(LoopBlock {
                count: 2,
                body: vec![Node::Loop(inner)],
            })],
        );
        // init-free so the snippet is exactly the loop nest
        let text = render_source(&p);
        assert_eq!(
            text,
            "for _ in range(2):\n    for _ in range(2):\n        a0 += 1"
        );
        assert_eq!(text.lines().count(), 3);

        let mut with_init = p.clone();
        with_init
            .body
            .insert(0, Node::Stmt(Statement::Init { var: v(0), value: 0 }));
        assert_eq!(render_source(&with_init).lines().count(), 4);
        assert_eq!(parse_source(&render_source(&with_init)).unwrap(), with_init);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_source("a0 *= 2"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_source("  a0=1"), Err(ParseError::BadIndent { .. })));
        assert!(matches!(parse_source("a0=1\n    a0 += 1"), Err(ParseError::UnexpectedIndent { .. })));
        assert!(matches!(parse_source("for _ in range(2):\na0=1"), Err(ParseError::EmptyLoop { .. })));
        assert!(matches!(parse_source("a0 &= 1"), Err(ParseError::Syntax { .. })));
    }
}
