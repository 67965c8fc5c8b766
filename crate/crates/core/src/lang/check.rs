use std::collections::HashSet;
use std::sync::Arc;

use super::ast::*;
use super::ir::*;
use super::Diagnostic;

/// Resolves names, checks types and lowers bodies to the typed IR.
///
/// All diagnostics found are reported, not only the first.
pub fn typecheck(ast: Program) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let class_names: Vec<&str> = ast.classes.iter().map(|c| c.name.as_str()).collect();

    let resolve = |t: &TypeName, pos: Pos, diags: &mut Vec<Diagnostic>| -> Type {
        match t {
            TypeName::Int => Type::Int,
            TypeName::Bool => Type::Bool,
            TypeName::Str => Type::Str,
            TypeName::Class(name) => match class_names.iter().position(|c| c == name) {
                Some(i) => Type::Ref(ClassId(i as u32)),
                None => {
                    diags.push(Diagnostic::new(pos, format!("unknown class {name}")));
                    Type::Null
                }
            },
        }
    };

    // Signatures first so bodies can reference any class member.
    let mut classes = Vec::with_capacity(ast.classes.len());
    for class in &ast.classes {
        let mut fields: Vec<FieldInfo> = Vec::new();
        for f in &class.fields {
            if fields.iter().any(|g| g.name == f.name) {
                diags.push(Diagnostic::new(
                    f.pos,
                    format!("duplicate field {} in class {}", f.name, class.name),
                ));
                continue;
            }
            fields.push(FieldInfo {
                name: f.name.clone(),
                ty: resolve(&f.ty, f.pos, &mut diags),
                visibility: f.visibility,
            });
        }
        let mut methods: Vec<MethodInfo> = Vec::new();
        for (m, is_ctor) in class
            .constructors
            .iter()
            .map(|m| (m, true))
            .chain(class.methods.iter().map(|m| (m, false)))
        {
            let dup = methods.iter().any(|o| {
                o.is_ctor == is_ctor && o.name == m.name && o.params.len() == m.params.len()
            });
            if dup {
                diags.push(Diagnostic::new(
                    m.pos,
                    format!("duplicate method {}/{}", m.name, m.params.len()),
                ));
            }
            let mut seen = HashSet::new();
            for p in &m.params {
                if !seen.insert(p.name.as_str()) {
                    diags.push(Diagnostic::new(
                        m.pos,
                        format!("duplicate parameter {} in {}", p.name, m.name),
                    ));
                }
            }
            methods.push(MethodInfo {
                name: m.name.clone(),
                param_names: m.params.iter().map(|p| p.name.clone()).collect(),
                params: m
                    .params
                    .iter()
                    .map(|p| resolve(&p.ty, m.pos, &mut diags))
                    .collect(),
                ret: m.return_type.as_ref().map(|t| resolve(t, m.pos, &mut diags)),
                is_static: m.is_static,
                is_ctor,
                visibility: m.visibility,
                body: Vec::new(),
                locals: 0,
                predicates: 0,
                writes_this: false,
                self_calls: Vec::new(),
                pos: m.pos,
            });
        }
        classes.push(ClassInfo {
            name: class.name.clone(),
            fields,
            methods,
        });
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    let mut bodies = Vec::new();
    for (ci, class) in ast.classes.iter().enumerate() {
        let class_id = ClassId(ci as u32);
        for (mi, m) in class.constructors.iter().chain(&class.methods).enumerate() {
            let method_id = MethodId {
                class: class_id,
                index: mi as u32,
            };
            let info = &classes[ci].methods[mi];
            let mut checker = BodyChecker {
                classes: &classes,
                class: class_id,
                is_static: info.is_static,
                ret: info.ret,
                scopes: vec![Vec::new()],
                next_slot: 0,
                predicates: 0,
                writes_this: false,
                self_calls: Vec::new(),
                diags: &mut diags,
            };
            for (name, ty) in info.param_names.iter().zip(&info.params) {
                checker.declare(name, *ty);
            }
            let body = checker.block(&m.body);
            let result = (
                method_id,
                body,
                checker.next_slot,
                checker.predicates,
                checker.writes_this,
                checker.self_calls,
            );
            if info.ret.is_some() && !definitely_returns(&m.body) {
                diags.push(Diagnostic::new(
                    m.pos,
                    format!("missing return in {}/{}", m.name, m.params.len()),
                ));
            }
            bodies.push(result);
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    for (id, body, locals, predicates, writes_this, self_calls) in bodies {
        let info = &mut classes[id.class.0 as usize].methods[id.index as usize];
        info.body = body;
        info.locals = locals;
        info.predicates = predicates;
        info.writes_this = writes_this;
        info.self_calls = self_calls;
    }
    let string_literals = ast.string_literals();
    Ok(CheckedProgram {
        ast,
        classes,
        string_literals,
    })
}

fn definitely_returns(stmts: &[Stmt]) -> bool {
    stmts.iter().any(|s| match s {
        Stmt::Return { .. } => true,
        Stmt::If {
            then_body,
            else_body,
            ..
        } => definitely_returns(then_body) && definitely_returns(else_body),
        _ => false,
    })
}

struct BodyChecker<'a> {
    classes: &'a [ClassInfo],
    class: ClassId,
    is_static: bool,
    ret: Option<Type>,
    scopes: Vec<Vec<(String, u32, Type)>>,
    next_slot: u32,
    predicates: u32,
    writes_this: bool,
    self_calls: Vec<MethodId>,
    diags: &'a mut Vec<Diagnostic>,
}

type CResult<T> = Result<T, Diagnostic>;

impl BodyChecker<'_> {
    fn declare(&mut self, name: &str, ty: Type) -> u32 {
        let slot = self.next_slot;
        self.next_slot += 1;
        self.scopes
            .last_mut()
            .expect("scope stack is never empty")
            .push((name.to_string(), slot, ty));
        slot
    }

    fn lookup_local(&self, name: &str) -> Option<(u32, Type)> {
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _, _)| n == name)
            .map(|(_, slot, ty)| (*slot, *ty))
    }

    fn type_name(&self, ty: Type) -> String {
        match ty {
            Type::Ref(c) => self.classes[c.0 as usize].name.clone(),
            other => other.to_string(),
        }
    }

    fn class_id(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c.name == name)
            .map(|i| ClassId(i as u32))
    }

    fn block(&mut self, stmts: &[Stmt]) -> Vec<TStmt> {
        self.scopes.push(Vec::new());
        let mut out = Vec::new();
        for s in stmts {
            match self.stmt(s) {
                Ok(t) => out.push(t),
                Err(d) => self.diags.push(d),
            }
        }
        self.scopes.pop();
        out
    }

    fn expect_type(&self, expr: &TExpr, want: Type) -> CResult<()> {
        let got = self.value_type(expr)?;
        if got.assignable_to(want) {
            Ok(())
        } else {
            Err(Diagnostic::new(
                expr.pos,
                format!(
                    "type mismatch: expected {}, found {}",
                    self.type_name(want),
                    self.type_name(got)
                ),
            ))
        }
    }

    fn value_type(&self, expr: &TExpr) -> CResult<Type> {
        expr.ty
            .ok_or_else(|| Diagnostic::new(expr.pos, "void used as value"))
    }

    fn predicate(&mut self, cond: &Expr) -> CResult<(u32, TExpr)> {
        let index = self.predicates;
        self.predicates += 1;
        let cond = self.expr(cond)?;
        if cond.ty != Some(Type::Bool) {
            return Err(Diagnostic::new(cond.pos, "predicate must be Bool"));
        }
        Ok((index, cond))
    }

    fn this_field(&self, name: &str) -> Option<FieldId> {
        if self.is_static {
            return None;
        }
        self.classes[self.class.0 as usize]
            .fields
            .iter()
            .position(|f| f.name == name)
            .map(|i| FieldId {
                class: self.class,
                index: i as u32,
            })
    }

    fn this_expr(&self, pos: Pos) -> CResult<TExpr> {
        if self.is_static {
            return Err(Diagnostic::new(pos, "'this' used in static method"));
        }
        Ok(TExpr {
            kind: TExprKind::This,
            ty: Some(Type::Ref(self.class)),
            pos,
        })
    }

    fn stmt(&mut self, stmt: &Stmt) -> CResult<TStmt> {
        match stmt {
            Stmt::Assign {
                declared,
                name,
                value,
                pos,
            } => {
                let value = self.expr(value)?;
                match declared {
                    Some(t) => {
                        let ty = self.resolve(t, *pos)?;
                        if self.lookup_local(name).is_some() {
                            return Err(Diagnostic::new(
                                *pos,
                                format!("duplicate variable {name}"),
                            ));
                        }
                        self.expect_type(&value, ty)?;
                        let slot = self.declare(name, ty);
                        Ok(TStmt::SetLocal { slot, value })
                    }
                    None => {
                        if let Some((slot, ty)) = self.lookup_local(name) {
                            self.expect_type(&value, ty)?;
                            Ok(TStmt::SetLocal { slot, value })
                        } else if let Some(field) = self.this_field(name) {
                            let receiver = self.this_expr(*pos)?;
                            self.field_assign(receiver, field, value, *pos)
                        } else {
                            Err(Diagnostic::new(*pos, format!("unknown variable {name}")))
                        }
                    }
                }
            }
            Stmt::FieldAssign {
                receiver,
                field,
                value,
                pos,
            } => {
                let receiver = self.expr(receiver)?;
                let field = self.resolve_field(&receiver, field, *pos)?;
                let value = self.expr(value)?;
                self.field_assign(receiver, field, value, *pos)
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                ..
            } => {
                let (predicate, cond) = self.predicate(cond)?;
                let then_body = self.block(then_body);
                let else_body = self.block(else_body);
                Ok(TStmt::If {
                    predicate,
                    cond,
                    then_body,
                    else_body,
                })
            }
            Stmt::While { cond, body, .. } => {
                let (predicate, cond) = self.predicate(cond)?;
                let body = self.block(body);
                Ok(TStmt::While {
                    predicate,
                    cond,
                    body,
                })
            }
            Stmt::Return { value, pos } => match (value, self.ret) {
                (None, None) => Ok(TStmt::Return(None)),
                (Some(v), Some(ret)) => {
                    let v = self.expr(v)?;
                    self.expect_type(&v, ret)?;
                    Ok(TStmt::Return(Some(v)))
                }
                (Some(_), None) => Err(Diagnostic::new(*pos, "return with a value in void method")),
                (None, Some(_)) => Err(Diagnostic::new(*pos, "missing return value")),
            },
            Stmt::Expr { expr, .. } => Ok(TStmt::Expr(self.expr(expr)?)),
        }
    }

    fn field_assign(
        &mut self,
        receiver: TExpr,
        field: FieldId,
        value: TExpr,
        pos: Pos,
    ) -> CResult<TStmt> {
        let fty = self.classes[field.class.0 as usize].fields[field.index as usize].ty;
        self.expect_type(&value, fty)?;
        if matches!(receiver.kind, TExprKind::This) {
            self.writes_this = true;
        }
        Ok(TStmt::SetField {
            receiver,
            field,
            value,
            pos,
        })
    }

    fn resolve(&self, t: &TypeName, pos: Pos) -> CResult<Type> {
        Ok(match t {
            TypeName::Int => Type::Int,
            TypeName::Bool => Type::Bool,
            TypeName::Str => Type::Str,
            TypeName::Class(name) => Type::Ref(
                self.class_id(name)
                    .ok_or_else(|| Diagnostic::new(pos, format!("unknown class {name}")))?,
            ),
        })
    }

    fn resolve_field(&self, receiver: &TExpr, name: &str, pos: Pos) -> CResult<FieldId> {
        let Some(Type::Ref(class)) = receiver.ty else {
            return Err(Diagnostic::new(
                pos,
                format!("field access .{name} on non-object value"),
            ));
        };
        let info = &self.classes[class.0 as usize];
        let index = info
            .fields
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Diagnostic::new(pos, format!("unknown field {name}")))?;
        if info.fields[index].visibility == Visibility::Private && class != self.class {
            return Err(Diagnostic::new(
                pos,
                format!("field {name} of {} is private", info.name),
            ));
        }
        Ok(FieldId {
            class,
            index: index as u32,
        })
    }

    fn args(&mut self, args: &[Expr], params: &[Type]) -> CResult<Vec<TExpr>> {
        let mut out = Vec::with_capacity(args.len());
        for (a, p) in args.iter().zip(params) {
            let a = self.expr(a)?;
            self.expect_type(&a, *p)?;
            out.push(a);
        }
        Ok(out)
    }

    fn find_method(&self, class: ClassId, name: &str, arity: usize) -> Option<MethodId> {
        self.classes[class.0 as usize]
            .methods
            .iter()
            .position(|m| !m.is_ctor && m.name == name && m.params.len() == arity)
            .map(|i| MethodId {
                class,
                index: i as u32,
            })
    }

    fn call(
        &mut self,
        receiver: Option<TExpr>,
        class: ClassId,
        name: &str,
        args: &[Expr],
        pos: Pos,
    ) -> CResult<TExpr> {
        let method = self
            .find_method(class, name, args.len())
            .ok_or_else(|| Diagnostic::new(pos, format!("unknown method {name}/{}", args.len())))?;
        let info = &self.classes[class.0 as usize].methods[method.index as usize];
        if info.visibility == Visibility::Private && class != self.class {
            return Err(Diagnostic::new(
                pos,
                format!("method {name}/{} is private", args.len()),
            ));
        }
        let (params, ret, is_static) = (info.params.clone(), info.ret, info.is_static);
        let receiver = match (receiver, is_static) {
            (_, true) => None,
            (Some(r), false) => Some(Box::new(r)),
            (None, false) => {
                return Err(Diagnostic::new(
                    pos,
                    format!("instance method {name}/{} called without a receiver", args.len()),
                ))
            }
        };
        if let Some(r) = &receiver {
            if matches!(r.kind, TExprKind::This) && !self.self_calls.contains(&method) {
                self.self_calls.push(method);
            }
        }
        let args = self.args(args, &params)?;
        Ok(TExpr {
            kind: TExprKind::Call {
                receiver,
                method,
                args,
            },
            ty: ret,
            pos,
        })
    }

    fn expr(&mut self, e: &Expr) -> CResult<TExpr> {
        let pos = e.pos();
        let mk = |kind, ty| TExpr {
            kind,
            ty: Some(ty),
            pos,
        };
        match e {
            Expr::Int(n, _) => Ok(mk(TExprKind::Int(*n), Type::Int)),
            Expr::Bool(b, _) => Ok(mk(TExprKind::Bool(*b), Type::Bool)),
            Expr::Str(s, _) => Ok(mk(TExprKind::Str(Arc::from(s.as_str())), Type::Str)),
            Expr::Null(_) => Ok(mk(TExprKind::Null, Type::Null)),
            Expr::This(_) => self.this_expr(pos),
            Expr::Var(name, _) => {
                if let Some((slot, ty)) = self.lookup_local(name) {
                    Ok(mk(TExprKind::Local(slot), ty))
                } else if let Some(field) = self.this_field(name) {
                    let receiver = self.this_expr(pos)?;
                    let ty = self.classes[self.class.0 as usize].fields[field.index as usize].ty;
                    Ok(mk(
                        TExprKind::Field {
                            receiver: Box::new(receiver),
                            field,
                        },
                        ty,
                    ))
                } else {
                    Err(Diagnostic::new(pos, format!("unknown variable {name}")))
                }
            }
            Expr::Field {
                receiver, field, ..
            } => {
                let receiver = self.expr(receiver)?;
                let field = self.resolve_field(&receiver, field, pos)?;
                let ty = self.classes[field.class.0 as usize].fields[field.index as usize].ty;
                Ok(mk(
                    TExprKind::Field {
                        receiver: Box::new(receiver),
                        field,
                    },
                    ty,
                ))
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let lhs = self.expr(lhs)?;
                let rhs = self.expr(rhs)?;
                let lt = self.value_type(&lhs)?;
                let rt = self.value_type(&rhs)?;
                let ty = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul => {
                        self.expect_type(&lhs, Type::Int)?;
                        self.expect_type(&rhs, Type::Int)?;
                        Type::Int
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        self.expect_type(&lhs, Type::Int)?;
                        self.expect_type(&rhs, Type::Int)?;
                        Type::Bool
                    }
                    BinOp::And | BinOp::Or => {
                        self.expect_type(&lhs, Type::Bool)?;
                        self.expect_type(&rhs, Type::Bool)?;
                        Type::Bool
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let comparable = lt.assignable_to(rt)
                            || rt.assignable_to(lt)
                            || (lt == Type::Null && rt == Type::Null);
                        if !comparable {
                            return Err(Diagnostic::new(
                                pos,
                                format!(
                                    "type mismatch: cannot compare {} with {}",
                                    self.type_name(lt),
                                    self.type_name(rt)
                                ),
                            ));
                        }
                        Type::Bool
                    }
                };
                Ok(mk(
                    TExprKind::Binary {
                        op: *op,
                        lhs: Box::new(lhs),
                        rhs: Box::new(rhs),
                    },
                    ty,
                ))
            }
            Expr::Unary { op, operand, .. } => {
                let operand = self.expr(operand)?;
                match op {
                    UnOp::Not => {
                        self.expect_type(&operand, Type::Bool)?;
                        Ok(mk(TExprKind::Not(Box::new(operand)), Type::Bool))
                    }
                    UnOp::Neg => {
                        self.expect_type(&operand, Type::Int)?;
                        Ok(mk(TExprKind::Neg(Box::new(operand)), Type::Int))
                    }
                }
            }
            Expr::Call {
                receiver,
                method,
                args,
                ..
            } => match receiver.as_deref() {
                None => {
                    let receiver = if self.is_static {
                        None
                    } else {
                        Some(self.this_expr(pos)?)
                    };
                    self.call(receiver, self.class, method, args, pos)
                }
                Some(Expr::Var(name, vpos))
                    if self.lookup_local(name).is_none()
                        && self.this_field(name).is_none()
                        && self.class_id(name).is_some() =>
                {
                    let class = self.class_id(name).expect("checked in guard");
                    let target = self.find_method(class, method, args.len());
                    if let Some(m) = target {
                        if !self.classes[class.0 as usize].methods[m.index as usize].is_static {
                            return Err(Diagnostic::new(
                                *vpos,
                                format!("instance method {method}/{} called on class {name}", args.len()),
                            ));
                        }
                    }
                    self.call(None, class, method, args, pos)
                }
                Some(r) => {
                    let receiver = self.expr(r)?;
                    match self.value_type(&receiver)? {
                        Type::Str => {
                            let op = StrOp::from_name(method).ok_or_else(|| {
                                Diagnostic::new(
                                    pos,
                                    format!("unknown method {method}/{}", args.len()),
                                )
                            })?;
                            let (params, ret) = op.signature();
                            if params.len() != args.len() {
                                return Err(Diagnostic::new(
                                    pos,
                                    format!("unknown method {method}/{}", args.len()),
                                ));
                            }
                            let args = self.args(args, params)?;
                            Ok(mk(
                                TExprKind::StrOp {
                                    op,
                                    receiver: Box::new(receiver),
                                    args,
                                },
                                ret,
                            ))
                        }
                        Type::Ref(class) => self.call(Some(receiver), class, method, args, pos),
                        other => Err(Diagnostic::new(
                            pos,
                            format!(
                                "method call .{method} on value of type {}",
                                self.type_name(other)
                            ),
                        )),
                    }
                }
            },
            Expr::New { class, args, .. } => {
                let cid = self
                    .class_id(class)
                    .ok_or_else(|| Diagnostic::new(pos, format!("unknown class {class}")))?;
                let ctor = self.classes[cid.0 as usize]
                    .methods
                    .iter()
                    .position(|m| m.is_ctor && m.params.len() == args.len())
                    .ok_or_else(|| {
                        Diagnostic::new(
                            pos,
                            format!("no constructor {class}/{}", args.len()),
                        )
                    })?;
                let params = self.classes[cid.0 as usize].methods[ctor].params.clone();
                let args = self.args(args, &params)?;
                Ok(mk(
                    TExprKind::New {
                        ctor: MethodId {
                            class: cid,
                            index: ctor as u32,
                        },
                        args,
                    },
                    Type::Ref(cid),
                ))
            }
        }
    }
}
