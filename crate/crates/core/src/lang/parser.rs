use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::Diagnostic;

/// Parses a whole source file. Classes without a declared constructor get a
/// synthesized zero-argument one.
pub fn parse_program(source: &str) -> Result<Program, Diagnostic> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, idx: 0 };
    let mut classes: Vec<ClassDef> = Vec::new();
    let mut seen = HashSet::new();
    while parser.peek() != &Tok::Eof {
        let class = parser.class()?;
        if !seen.insert(class.name.clone()) {
            return Err(Diagnostic::new(
                class.pos,
                format!("duplicate class {}", class.name),
            ));
        }
        classes.push(class);
    }
    Ok(Program { classes })
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.idx].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.idx + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.idx].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.idx].clone();
        if self.idx < self.tokens.len() - 1 {
            self.idx += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::new(
            self.pos(),
            format!("expected {what}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Pos> {
        if self.peek() == &tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn class(&mut self) -> PResult<ClassDef> {
        let pos = self.expect(Tok::Class, "'class'")?;
        let name = self.ident("class name")?;
        self.expect(Tok::LBrace, "'{'")?;
        let mut class = ClassDef {
            name,
            fields: Vec::new(),
            constructors: Vec::new(),
            methods: Vec::new(),
            pos,
        };
        while !self.eat(&Tok::RBrace) {
            self.member(&mut class)?;
        }
        if class.constructors.is_empty() {
            class.constructors.push(MethodDef {
                name: class.name.clone(),
                params: Vec::new(),
                return_type: None,
                is_static: false,
                visibility: Visibility::Public,
                body: Vec::new(),
                synthesized: true,
                pos,
            });
        }
        Ok(class)
    }

    fn member(&mut self, class: &mut ClassDef) -> PResult<()> {
        let pos = self.pos();
        let visibility = match self.peek() {
            Tok::Public => {
                self.bump();
                Some(Visibility::Public)
            }
            Tok::Private => {
                self.bump();
                Some(Visibility::Private)
            }
            _ => None,
        };
        let is_static = self.eat(&Tok::Static);

        // Constructor: `Name(` where Name is the enclosing class.
        if let (Tok::Ident(n), Tok::LParen) = (self.peek(), self.peek_at(1)) {
            if *n == class.name {
                if is_static {
                    return Err(Diagnostic::new(pos, "constructors cannot be static"));
                }
                self.bump();
                let params = self.params()?;
                let body = self.block()?;
                class.constructors.push(MethodDef {
                    name: class.name.clone(),
                    params,
                    return_type: None,
                    is_static: false,
                    visibility: visibility.unwrap_or(Visibility::Public),
                    body,
                    synthesized: false,
                    pos,
                });
                return Ok(());
            }
        }

        let return_type = if self.eat(&Tok::Void) {
            None
        } else {
            Some(self.type_name()?)
        };
        let name = self.ident("member name")?;
        match self.peek() {
            Tok::LParen => {
                let params = self.params()?;
                let body = self.block()?;
                class.methods.push(MethodDef {
                    name,
                    params,
                    return_type,
                    is_static,
                    visibility: visibility.unwrap_or(Visibility::Private),
                    body,
                    synthesized: false,
                    pos,
                });
                Ok(())
            }
            _ => {
                let Some(ty) = return_type else {
                    return Err(self.unexpected("'(' after void member name"));
                };
                if is_static {
                    return Err(Diagnostic::new(pos, "static fields are not supported"));
                }
                if !self.eat(&Tok::Semi) {
                    return Err(self.unexpected("';' after field declaration"));
                }
                class.fields.push(FieldDef {
                    name,
                    ty,
                    visibility: visibility.unwrap_or(Visibility::Private),
                    pos,
                });
                Ok(())
            }
        }
    }

    fn type_name(&mut self) -> PResult<TypeName> {
        let ty = match self.peek().clone() {
            Tok::IntKw => TypeName::Int,
            Tok::BoolKw => TypeName::Bool,
            Tok::StrKw => TypeName::Str,
            Tok::Ident(name) => TypeName::Class(name),
            _ => return Err(self.unexpected("type")),
        };
        self.bump();
        Ok(ty)
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect(Tok::LParen, "'('")?;
        let mut params = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(params);
        }
        loop {
            let ty = self.type_name()?;
            let name = self.ident("parameter name")?;
            params.push(Param { name, ty });
            if self.eat(&Tok::RParen) {
                return Ok(params);
            }
            self.expect(Tok::Comma, "',' or ')'")?;
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.peek() == &Tok::Eof {
                return Err(self.unexpected("'}'"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    /// Body of `if`/`while`: a block, or a single statement.
    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if self.peek() == &Tok::LBrace {
            self.block()
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn is_decl_start(&self) -> bool {
        match self.peek() {
            Tok::IntKw | Tok::BoolKw | Tok::StrKw => true,
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Ident(_)),
            _ => false,
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        match self.peek() {
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let then_body = self.body()?;
                let else_body = if self.eat(&Tok::Else) {
                    if self.peek() == &Tok::If {
                        vec![self.stmt()?]
                    } else {
                        self.body()?
                    }
                } else {
                    Vec::new()
                };
                Ok(Stmt::If {
                    cond,
                    then_body,
                    else_body,
                    pos,
                })
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let body = self.body()?;
                Ok(Stmt::While { cond, body, pos })
            }
            Tok::Return => {
                self.bump();
                let value = if self.peek() == &Tok::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(Tok::Semi, "';'")?;
                Ok(Stmt::Return { value, pos })
            }
            _ if self.is_decl_start() => {
                let ty = self.type_name()?;
                let name = self.ident("variable name")?;
                self.expect(Tok::Assign, "'=' in local declaration")?;
                let value = self.expr()?;
                self.expect(Tok::Semi, "';'")?;
                Ok(Stmt::Assign {
                    declared: Some(ty),
                    name,
                    value,
                    pos,
                })
            }
            _ => {
                let expr = self.expr()?;
                if self.eat(&Tok::Assign) {
                    let value = self.expr()?;
                    self.expect(Tok::Semi, "';'")?;
                    match expr {
                        Expr::Var(name, _) => Ok(Stmt::Assign {
                            declared: None,
                            name,
                            value,
                            pos,
                        }),
                        Expr::Field {
                            receiver, field, ..
                        } => Ok(Stmt::FieldAssign {
                            receiver: *receiver,
                            field,
                            value,
                            pos,
                        }),
                        _ => Err(Diagnostic::new(pos, "invalid assignment target")),
                    }
                } else {
                    self.expect(Tok::Semi, "';'")?;
                    Ok(Stmt::Expr { expr, pos })
                }
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let pos = self.bump().pos;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek() {
            Tok::Bang => {
                self.bump();
                let operand = self.unary()?;
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    operand: Box::new(operand),
                    pos,
                })
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(n) = *self.peek() {
                    // Fold `-<literal>` unless it is the receiver of a postfix chain.
                    if self.peek_at(1) != &Tok::Dot {
                        self.bump();
                        return Ok(Expr::Int(-n, pos));
                    }
                }
                let operand = self.unary()?;
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    operand: Box::new(operand),
                    pos,
                })
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.primary()?;
        while self.peek() == &Tok::Dot {
            let pos = self.bump().pos;
            let name = self.ident("field or method name after '.'")?;
            if self.peek() == &Tok::LParen {
                let args = self.args()?;
                expr = Expr::Call {
                    receiver: Some(Box::new(expr)),
                    method: name,
                    args,
                    pos,
                };
            } else {
                expr = Expr::Field {
                    receiver: Box::new(expr),
                    field: name,
                    pos,
                };
            }
        }
        Ok(expr)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma, "',' or ')'")?;
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n, pos))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s, pos))
            }
            Tok::True => {
                self.bump();
                Ok(Expr::Bool(true, pos))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::Bool(false, pos))
            }
            Tok::Null => {
                self.bump();
                Ok(Expr::Null(pos))
            }
            Tok::This => {
                self.bump();
                Ok(Expr::This(pos))
            }
            Tok::New => {
                self.bump();
                let class = self.ident("class name after 'new'")?;
                let args = self.args()?;
                Ok(Expr::New { class, args, pos })
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() == &Tok::LParen {
                    let args = self.args()?;
                    Ok(Expr::Call {
                        receiver: None,
                        method: name,
                        args,
                        pos,
                    })
                } else {
                    Ok(Expr::Var(name, pos))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}
