//! Recursive-descent parser and name resolution.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{ParseError, ParseErrors, MAX_PARSE_ERRORS};

/// Parses and resolves a controller program.
pub fn parse(source: &str) -> Result<Program, ParseErrors> {
    let (tokens, lex_errors) = tokenize(source);
    let mut parser = Parser {
        tokens,
        pos: 0,
        errors: lex_errors,
    };
    let program = parser.program();
    let mut errors = parser.errors;
    if errors.is_empty() {
        if let Some(program) = &program {
            errors = resolve(program);
        }
    }
    errors.sort_by_key(|e| (e.line, e.col));
    errors.truncate(MAX_PARSE_ERRORS);
    match program {
        Some(p) if errors.is_empty() => Ok(p),
        _ => Err(ParseErrors(errors)),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

/// Marker for an error already recorded; unwinds to the nearest recovery point.
struct Bail;

type PResult<T> = Result<T, Bail>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&mut self, span: Span, message: impl Into<String>) -> Bail {
        self.errors.push(ParseError::at(span, message));
        Bail
    }

    fn expected(&mut self, what: &str) -> Bail {
        let found = self.peek().to_string();
        let span = self.span();
        self.error(span, format!("expected {what}, found {found}"))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if self.at(&tok) {
            Ok(self.advance().span)
        } else {
            Err(self.expected(&tok.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => Ok((name, self.advance().span)),
            _ => Err(self.expected("identifier")),
        }
    }

    fn too_many_errors(&self) -> bool {
        self.errors.len() >= MAX_PARSE_ERRORS
    }

    /// Skips to just past the next `;`, or up to (not past) a `}`.
    fn synchronize(&mut self) {
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.advance();
                    return;
                }
                Tok::RBrace | Tok::Eof => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn program(&mut self) -> Option<Program> {
        let mut program = Program::default();
        if self.eat(&Tok::State) {
            if self.expect(Tok::LBrace).is_err() {
                return None;
            }
            while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
                match self.state_decl() {
                    Ok(d) => program.state.push(d),
                    Err(Bail) => {
                        if self.too_many_errors() {
                            return None;
                        }
                        self.synchronize();
                    }
                }
            }
            self.expect(Tok::RBrace).ok()?;
        }
        if self.expect(Tok::Tick).is_err() {
            return None;
        }
        program.tick = self.block().ok()?;
        if !self.at(&Tok::Eof) {
            self.expected("end of input");
            return None;
        }
        Some(program)
    }

    fn state_decl(&mut self) -> PResult<StateDecl> {
        let (name, span) = self.ident()?;
        self.expect(Tok::Assign)?;
        let init = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(StateDecl { name, init, span })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            match self.stmt() {
                Ok(s) => stmts.push(s),
                Err(Bail) => {
                    if self.too_many_errors() {
                        return Err(Bail);
                    }
                    self.synchronize();
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Let => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Let { name, value }
            }
            Tok::Ident(name) => {
                self.advance();
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { name, value }
            }
            Tok::If => {
                self.advance();
                let mut branches = vec![(self.expr()?, self.block()?)];
                let mut otherwise = None;
                while self.eat(&Tok::Else) {
                    if self.eat(&Tok::If) {
                        branches.push((self.expr()?, self.block()?));
                    } else {
                        otherwise = Some(self.block()?);
                        break;
                    }
                }
                StmtKind::If { branches, otherwise }
            }
            Tok::While => {
                self.advance();
                let cond = self.expr()?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Drive => {
                self.advance();
                self.expect(Tok::LParen)?;
                let v = self.expr()?;
                self.expect(Tok::Comma)?;
                let omega = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                StmtKind::Drive { v, omega }
            }
            _ => return Err(self.expected("statement")),
        };
        Ok(Stmt { kind, span })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::OrOr => BinaryOp::Or,
            Tok::AndAnd => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            Tok::Percent => BinaryOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing; all levels left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let span = self.advance().span;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let op = match self.peek() {
            Tok::Minus => UnaryOp::Neg,
            Tok::Bang => UnaryOp::Not,
            _ => return self.atom(),
        };
        self.advance();
        let operand = self.unary()?;
        Ok(Expr::new(ExprKind::Unary(op, Box::new(operand)), span))
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(n) => {
                self.advance();
                Ok(Expr::new(ExprKind::Number(n), span))
            }
            Tok::True => {
                self.advance();
                Ok(Expr::new(ExprKind::Bool(true), span))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::new(ExprKind::Bool(false), span))
            }
            Tok::Ident(name) => {
                self.advance();
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.at(&Tok::RParen) {
                        args.push(self.expr()?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expr::new(ExprKind::Call(name, args), span))
                } else {
                    Ok(Expr::new(ExprKind::Var(name), span))
                }
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            _ => Err(self.expected("expression")),
        }
    }
}

/// Checks names: unique state, declared identifiers, known builtins and arity.
fn resolve(program: &Program) -> Vec<ParseError> {
    let mut r = Resolver {
        state: Vec::new(),
        scopes: vec![Vec::new()],
        errors: Vec::new(),
    };
    for decl in &program.state {
        r.expr(&decl.init);
        if r.reserved(&decl.name, decl.span) {
            continue;
        }
        if r.state.contains(&decl.name) {
            r.err(decl.span, format!("state `{}` is declared twice", decl.name));
        } else {
            r.state.push(decl.name.clone());
        }
    }
    r.block(&program.tick);
    r.errors
}

struct Resolver {
    state: Vec<String>,
    scopes: Vec<Vec<String>>,
    errors: Vec<ParseError>,
}

impl Resolver {
    fn err(&mut self, span: Span, message: String) {
        self.errors.push(ParseError::at(span, message));
    }

    fn reserved(&mut self, name: &str, span: Span) -> bool {
        if builtin_arity(name).is_some() {
            self.err(span, format!("`{name}` is a builtin and cannot be used as a variable"));
            true
        } else {
            false
        }
    }

    fn visible(&self, name: &str) -> bool {
        self.state.iter().any(|s| s == name) || self.scopes.iter().any(|s| s.iter().any(|l| l == name))
    }

    fn block(&mut self, stmts: &[Stmt]) {
        self.scopes.push(Vec::new());
        for s in stmts {
            self.stmt(s);
        }
        self.scopes.pop();
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                self.expr(value);
                if self.reserved(name, stmt.span) {
                    return;
                }
                if self.visible(name) {
                    self.err(stmt.span, format!("`{name}` is already declared"));
                    return;
                }
                self.scopes.last_mut().expect("scope").push(name.clone());
            }
            StmtKind::Assign { name, value } => {
                self.expr(value);
                if !self.visible(name) {
                    self.err(stmt.span, format!("assignment to undeclared name `{name}`"));
                }
            }
            StmtKind::If { branches, otherwise } => {
                for (cond, body) in branches {
                    self.expr(cond);
                    self.block(body);
                }
                if let Some(body) = otherwise {
                    self.block(body);
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Drive { v, omega } => {
                self.expr(v);
                self.expr(omega);
            }
        }
    }

    fn expr(&mut self, expr: &Expr) {
        match &expr.kind {
            ExprKind::Number(_) | ExprKind::Bool(_) => {}
            ExprKind::Var(name) => {
                if !self.visible(name) {
                    let hint = if builtin_arity(name).is_some() { format!(" (call it as `{name}()`)") } else { String::new() };
                    self.err(expr.span, format!("undeclared name `{name}`{hint}"));
                }
            }
            ExprKind::Unary(_, e) => self.expr(e),
            ExprKind::Binary(_, l, r) => {
                self.expr(l);
                self.expr(r);
            }
            ExprKind::Call(name, args) => {
                for a in args {
                    self.expr(a);
                }
                match builtin_arity(name) {
                    None => self.err(expr.span, format!("unknown function `{name}`")),
                    Some(n) if n != args.len() => self.err(
                        expr.span,
                        format!("`{name}` takes {n} argument{}, got {}", if n == 1 { "" } else { "s" }, args.len()),
                    ),
                    Some(_) => {}
                }
            }
        }
    }
}
