//! Text format for SUT models.
//!
//! ```text
//! [PARAMETERS]
//! L: dy, ni;
//! E: hw, ur, co;
//! [CONSTRAINTS]
//! (L = ni && E = co) -> S != ca;   # comment
//! ```
//!
//! Precedence, tightest first: `!`, `&&`, `||`, `->` (right-assoc), `<->`.

use super::{Expr, Parameter, SutError, SutModel};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Section(String),
    Eq,
    Neq,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    Colon,
    Comma,
    Semi,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(text: &str) -> Result<Vec<Token>, SutError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, col) = (li + 1, i + 1);
            let err = |msg: String| SutError::Syntax { line, col, msg };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = if rest.starts_with("<->") {
                (Tok::Iff, 3)
            } else if rest.starts_with("->") {
                (Tok::Implies, 2)
            } else if rest.starts_with("&&") {
                (Tok::And, 2)
            } else if rest.starts_with("||") {
                (Tok::Or, 2)
            } else if rest.starts_with("!=") {
                (Tok::Neq, 2)
            } else {
                match c {
                    '!' => (Tok::Not, 1),
                    '=' => (Tok::Eq, 1),
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    ':' => (Tok::Colon, 1),
                    ',' => (Tok::Comma, 1),
                    ';' => (Tok::Semi, 1),
                    '[' => {
                        let end = chars[i..]
                            .iter()
                            .position(|&c| c == ']')
                            .ok_or_else(|| err("unterminated section header".into()))?;
                        let name: String = chars[i + 1..i + end].iter().collect();
                        (Tok::Section(name.trim().to_string()), end + 1)
                    }
                    c if is_ident_char(c) => {
                        let len = chars[i..].iter().take_while(|&&c| is_ident_char(c)).count();
                        (Tok::Ident(chars[i..i + len].iter().collect()), len)
                    }
                    c => return Err(err(format!("unexpected character {c:?}"))),
                }
            };
            out.push(Token { tok, line, col });
            i += len;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    params: &'a [Parameter],
    eof: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.eof, |t| (t.line, t.col))
    }

    fn syntax(&self, msg: impl Into<String>) -> SutError {
        let (line, col) = self.here();
        SutError::Syntax { line, col, msg: msg.into() }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), SutError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize, usize), SutError> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s.clone(), *line, *col))
            }
            _ => Err(self.syntax(format!("expected {what}"))),
        }
    }

    fn iff(&mut self) -> Result<Expr, SutError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            lhs = Expr::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Expr, SutError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, SutError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, SutError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SutError> {
        if self.eat(&Tok::Not) {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::LParen) {
            let e = self.iff()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(e);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, SutError> {
        let (name, line, col) = self.ident("parameter name")?;
        let equal = if self.eat(&Tok::Eq) {
            true
        } else if self.eat(&Tok::Neq) {
            false
        } else {
            return Err(self.syntax("expected `=` or `!=`"));
        };
        let (value, vline, vcol) = self.ident("value")?;
        let param = self
            .params
            .iter()
            .position(|p| p.name == name)
            .ok_or(SutError::UnknownParameter { name: name.clone(), line, col })?;
        let v = self.params[param].value_index(&value).ok_or(SutError::UnknownValue {
            param: name,
            value,
            line: vline,
            col: vcol,
        })?;
        Ok(Expr::Atom { param, value: v, equal })
    }
}

pub fn parse_model(text: &str) -> Result<SutModel, SutError> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), 1);
    let mut params: Vec<Parameter> = Vec::new();
    let mut pos = 0;
    let mut section = None::<String>;
    let mut constraint_starts = Vec::new();

    // Parameters first, so constraint atoms can be resolved regardless of order.
    while pos < toks.len() {
        let t = &toks[pos];
        if let Tok::Section(name) = &t.tok {
            match name.as_str() {
                "PARAMETERS" | "CONSTRAINTS" => section = Some(name.clone()),
                _ => {
                    return Err(SutError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: format!("unknown section [{name}]"),
                    })
                }
            }
            pos += 1;
            continue;
        }
        match section.as_deref() {
            None => {
                return Err(SutError::Syntax { line: t.line, col: t.col, msg: "expected a section header".into() })
            }
            Some("PARAMETERS") => {
                let mut p = Parser { toks: &toks, pos, params: &[], eof };
                let (name, _, _) = p.ident("parameter name")?;
                p.expect(&Tok::Colon, "`:`")?;
                let mut values = vec![p.ident("value")?.0];
                while p.eat(&Tok::Comma) {
                    values.push(p.ident("value")?.0);
                }
                p.expect(&Tok::Semi, "`;`")?;
                pos = p.pos;
                if params.iter().any(|q| q.name == name) {
                    return Err(SutError::Duplicate(name));
                }
                params.push(Parameter::new(name, values));
            }
            Some(_) => {
                constraint_starts.push(pos);
                while pos < toks.len() && toks[pos].tok != Tok::Semi {
                    if let Tok::Section(_) = toks[pos].tok {
                        break;
                    }
                    pos += 1;
                }
                if pos >= toks.len() || toks[pos].tok != Tok::Semi {
                    let (line, col) = toks.get(pos).map_or(eof, |t| (t.line, t.col));
                    return Err(SutError::Syntax { line, col, msg: "expected `;`".into() });
                }
                pos += 1;
            }
        }
    }

    let mut constraints = Vec::new();
    for start in constraint_starts {
        let mut p = Parser { toks: &toks, pos: start, params: &params, eof };
        let e = p.iff()?;
        p.expect(&Tok::Semi, "`;` or operator")?;
        constraints.push(e);
    }
    SutModel::new(params, constraints)
}

/// Parses one constraint expression against an existing model's parameters.
pub fn parse_expr(model: &SutModel, text: &str) -> Result<Expr, SutError> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), text.len() + 1);
    let mut p = Parser { toks: &toks, pos: 0, params: model.params(), eof };
    let e = p.iff()?;
    if p.pos != toks.len() {
        return Err(p.syntax("trailing input"));
    }
    Ok(e)
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Iff(..) => 1,
        Expr::Implies(..) => 2,
        Expr::Or(..) => 3,
        Expr::And(..) => 4,
        Expr::Not(..) | Expr::Atom { .. } => 5,
    }
}

fn render_into(model: &SutModel, e: &Expr, min: u8, out: &mut String) {
    let paren = prec(e) < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Atom { param, value, equal } => {
            let p = &model.params()[*param];
            out.push_str(&p.name);
            out.push_str(if *equal { " = " } else { " != " });
            out.push_str(&p.values[*value]);
        }
        Expr::Not(a) => {
            out.push('!');
            render_into(model, a, 5, out);
        }
        // Left-associative operators need a tighter right operand; `->` is
        // right-associative, so the tighter side is the left one.
        Expr::And(a, b) => binary(model, a, b, " && ", 4, 5, out),
        Expr::Or(a, b) => binary(model, a, b, " || ", 3, 4, out),
        Expr::Implies(a, b) => binary(model, a, b, " -> ", 3, 2, out),
        Expr::Iff(a, b) => binary(model, a, b, " <-> ", 1, 2, out),
    }
    if paren {
        out.push(')');
    }
}

fn binary(model: &SutModel, a: &Expr, b: &Expr, op: &str, l: u8, r: u8, out: &mut String) {
    render_into(model, a, l, out);
    out.push_str(op);
    render_into(model, b, r, out);
}

/// Renders with the fewest parentheses that parse back to the same tree.
pub fn render_expr(model: &SutModel, e: &Expr) -> String {
    let mut out = String::new();
    render_into(model, e, 1, &mut out);
    out
}

pub fn render_model(model: &SutModel) -> String {
    let mut out = String::from("[PARAMETERS]\n");
    for p in model.params() {
        out.push_str(&format!("{}: {};\n", p.name, p.values.join(", ")));
    }
    out.push_str("[CONSTRAINTS]\n");
    for c in model.constraints() {
        out.push_str(&render_expr(model, c));
        out.push_str(";\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    const AUTONOMOUS: &str = "\
# autonomous driving
[PARAMETERS]
L: dy, ni;
E: hw, ur, co;
M: cb, el;
S: ca, ra, li;
[CONSTRAINTS]
(L = ni && E = co) -> S != ca;
(E = hw || E = co) -> S != li;
M = el -> E = ur;
";

    #[test]
    fn parses_autonomous_model() {
        let m = parse_model(AUTONOMOUS).unwrap();
        assert_eq!(m.num_params(), 4);
        assert_eq!(m.constraints().len(), 3);
        assert_eq!(m.params()[1].values, vec!["hw", "ur", "co"]);
    }

    #[test]
    fn empty_constraint_section() {
        let m = parse_model("[PARAMETERS]\na: x, y;\n[CONSTRAINTS]\n").unwrap();
        assert!(m.constraints().is_empty());
        let m = parse_model("[PARAMETERS]\na: x, y;\n").unwrap();
        assert!(m.constraints().is_empty());
    }

    #[test]
    fn unknown_value_reports_position() {
        let text = "[PARAMETERS]\nL: dy, ni;\n[CONSTRAINTS]\nL = dz;\n";
        match parse_model(text) {
            Err(SutError::UnknownValue { value, line, col, .. }) => {
                assert_eq!(value, "dz");
                assert_eq!((line, col), (4, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_model("[PARAMETERS]\nL: a;\n[CONSTRAINTS]\nK = a;\n"),
            Err(SutError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let err = parse_model("[PARAMETERS]\nL: a, b\n").unwrap_err();
        assert!(matches!(err, SutError::Syntax { .. }), "{err:?}");
        let err = parse_model("[PARAMETERS]\nL: a;\n[CONSTRAINTS]\nL = a &&;\n").unwrap_err();
        assert_eq!(err, SutError::Syntax { line: 4, col: 9, msg: "expected parameter name".into() });
        assert!(matches!(parse_model("L: a;"), Err(SutError::Syntax { line: 1, col: 1, .. })));
        assert!(matches!(parse_model("[PARAMETERS]\nL: a;\nL: b;\n"), Err(SutError::Duplicate(_))));
    }

    #[test]
    fn precedence_and_associativity() {
        let m = parse_model("[PARAMETERS]\na: 0, 1;\nb: 0, 1;\nc: 0, 1;\n").unwrap();
        let e = parse_expr(&m, "a = 1 -> b = 1 -> c = 1").unwrap();
        assert!(matches!(&e, Expr::Implies(_, r) if matches!(**r, Expr::Implies(..))));
        let e = parse_expr(&m, "a = 1 || b = 1 && c = 1").unwrap();
        assert!(matches!(&e, Expr::Or(_, r) if matches!(**r, Expr::And(..))));
        let e = parse_expr(&m, "!a = 1 && b = 1 <-> c = 1").unwrap();
        assert!(matches!(&e, Expr::Iff(l, _) if matches!(**l, Expr::And(..))));
        assert_eq!(render_expr(&m, &e), "!a = 1 && b = 1 <-> c = 1");
    }

    #[test]
    fn render_round_trip_autonomous() {
        let m = parse_model(AUTONOMOUS).unwrap();
        let text = render_model(&m);
        assert_eq!(parse_model(&text).unwrap(), m);
        assert!(text.contains("L = ni && E = co -> S != ca;"));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = (0usize..3, 0usize..2, any::<bool>())
            .prop_map(|(p, v, equal)| Expr::Atom { param: p, value: v, equal });
        leaf.prop_recursive(5, 32, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Not(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Or(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Implies(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Iff(Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(exprs in prop::collection::vec(arb_expr(), 0..4)) {
            let params = ["a", "b", "c"]
                .iter()
                .map(|n| Parameter::new(*n, vec!["x0".into(), "x1".into()]))
                .collect();
            let m = SutModel::new(params, exprs).unwrap();
            let back = parse_model(&render_model(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
