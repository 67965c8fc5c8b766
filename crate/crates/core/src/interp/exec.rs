use std::sync::Arc;

use crate::lang::ast::{BinOp, Pos};
use crate::lang::ir::{StrOp, TExpr, TExprKind, TStmt};
use crate::lang::{Arm, BranchGoalId, CheckedProgram, MethodId};
use crate::testmodel::{Arg, TestCase, TestStatement, VarRef};

use super::distance::{self, K};
use super::{BranchEvent, ExecLimits, ExecutionTrace, FaultKind, Heap, ObjId, Outcome, Value};

/// Why evaluation stopped early.
#[derive(Debug)]
enum Halt {
    Fault(FaultKind, Pos),
    StepLimit,
    /// Speculative evaluation reached a call or a fault.
    Speculation,
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

struct Frame {
    this: Option<ObjId>,
    locals: Vec<Value>,
}

/// Incremental test executor. Runs test statements one at a time over a
/// private heap; cloneable so a prefix can be extended in several ways.
#[derive(Clone)]
pub struct Executor<'p> {
    program: &'p CheckedProgram,
    limits: ExecLimits,
    heap: Heap,
    vars: Vec<Option<Value>>,
    events: Vec<BranchEvent>,
    steps: u64,
    depth: u32,
    root: Option<MethodId>,
    outcome: Option<Outcome>,
}

impl<'p> Executor<'p> {
    pub fn new(program: &'p CheckedProgram, limits: ExecLimits) -> Self {
        Executor {
            program,
            limits,
            heap: Heap::default(),
            vars: Vec::new(),
            events: Vec::new(),
            steps: 0,
            depth: 0,
            root: None,
            outcome: None,
        }
    }

    /// Whether a fault or the step limit stopped execution.
    pub fn halted(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    /// Value bound to the variable defined at `var`, if any.
    pub fn var(&self, var: usize) -> Option<&Value> {
        self.vars.get(var).and_then(|v| v.as_ref())
    }

    pub fn vars(&self) -> &[Option<Value>] {
        &self.vars
    }

    pub fn events(&self) -> &[BranchEvent] {
        &self.events
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Runs the next statement. Does nothing once halted.
    pub fn run_statement(&mut self, stmt: &TestStatement) {
        if self.halted() {
            return;
        }
        let index = self.vars.len();
        let result = self.statement(stmt);
        match result {
            Ok(v) => self.vars.push(v),
            Err(Halt::Fault(kind, pos)) => {
                self.vars.push(None);
                self.outcome = Some(Outcome::RuntimeFault {
                    kind,
                    statement: index,
                    line: pos.line,
                    col: pos.col,
                });
            }
            Err(Halt::StepLimit) => {
                self.vars.push(None);
                self.outcome = Some(Outcome::StepLimit { statement: index });
            }
            Err(Halt::Speculation) => unreachable!("speculation escaped a predicate"),
        }
        self.root = None;
    }

    pub fn into_trace(self) -> ExecutionTrace {
        ExecutionTrace {
            events: self.events,
            outcome: self.outcome.unwrap_or(Outcome::Completed),
            steps: self.steps,
        }
    }

    fn tick(&mut self) -> Result<(), Halt> {
        if self.steps >= self.limits.max_steps {
            return Err(Halt::StepLimit);
        }
        self.steps += 1;
        Ok(())
    }

    fn arg(&self, arg: &Arg) -> Result<Value, Halt> {
        match arg {
            Arg::Lit(l) => Ok(Value::from_literal(l)),
            Arg::Var(v) => self.var_value(*v),
        }
    }

    fn var_value(&self, v: VarRef) -> Result<Value, Halt> {
        self.vars
            .get(v.0)
            .and_then(|x| x.clone())
            .ok_or(Halt::Fault(FaultKind::InvalidReference, Pos::default()))
    }

    fn receiver(&self, v: VarRef) -> Result<ObjId, Halt> {
        match self.var_value(v)? {
            Value::Obj(id) => Ok(id),
            Value::Null => Err(Halt::Fault(FaultKind::NullDereference, Pos::default())),
            _ => Err(Halt::Fault(FaultKind::InvalidReference, Pos::default())),
        }
    }

    fn statement(&mut self, stmt: &TestStatement) -> Result<Option<Value>, Halt> {
        self.tick()?;
        match stmt {
            TestStatement::Construct { ctor, args } => {
                let args = args.iter().map(|a| self.arg(a)).collect::<Result<_, _>>()?;
                self.root = Some(*ctor);
                self.construct(*ctor, args).map(Some)
            }
            TestStatement::Invoke {
                receiver,
                method,
                args,
            } => {
                let this = self.receiver(*receiver)?;
                let args = args.iter().map(|a| self.arg(a)).collect::<Result<_, _>>()?;
                self.root = Some(*method);
                self.call(*method, Some(this), args)
            }
            TestStatement::StaticInvoke { method, args } => {
                let args = args.iter().map(|a| self.arg(a)).collect::<Result<_, _>>()?;
                self.root = Some(*method);
                self.call(*method, None, args)
            }
            TestStatement::SetField {
                receiver,
                field,
                value,
            } => {
                let this = self.receiver(*receiver)?;
                let value = self.arg(value)?;
                self.heap.get_mut(this).fields[field.index as usize] = value;
                Ok(None)
            }
            TestStatement::Literal { value } => Ok(Some(Value::from_literal(value))),
        }
    }

    fn construct(&mut self, ctor: MethodId, args: Vec<Value>) -> Result<Value, Halt> {
        let obj = self.heap.alloc(self.program, ctor.class);
        self.call(ctor, Some(obj), args)?;
        Ok(Value::Obj(obj))
    }

    fn call(
        &mut self,
        method: MethodId,
        this: Option<ObjId>,
        args: Vec<Value>,
    ) -> Result<Option<Value>, Halt> {
        let program = self.program;
        let info = program.method(method);
        if self.depth >= self.limits.max_depth {
            return Err(Halt::Fault(FaultKind::StackOverflow, info.pos));
        }
        self.tick()?;
        let mut locals = args;
        locals.resize(info.locals as usize, Value::Null);
        let mut frame = Frame { this, locals };
        self.depth += 1;
        let flow = self.block(&info.body, &mut frame, method);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(None),
        }
    }

    fn block(&mut self, stmts: &[TStmt], frame: &mut Frame, method: MethodId) -> Result<Flow, Halt> {
        for s in stmts {
            if let Flow::Return(v) = self.stmt(s, frame, method)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn record(&mut self, method: MethodId, predicate: u32, outcome: distance::Outcome) -> bool {
        let (value, to_true, to_false) = outcome;
        let opposite = if value { to_false } else { to_true };
        debug_assert!(opposite > 0.0);
        self.events.push(BranchEvent {
            goal: BranchGoalId {
                method,
                predicate,
                arm: Arm::from_bool(value),
            },
            opposite_distance: opposite,
            root: self.root.expect("branch event outside a top-level call"),
            step: self.steps,
        });
        value
    }

    fn stmt(&mut self, stmt: &TStmt, frame: &mut Frame, method: MethodId) -> Result<Flow, Halt> {
        self.tick()?;
        match stmt {
            TStmt::SetLocal { slot, value } => {
                let v = self.eval(value, frame, false)?;
                frame.locals[*slot as usize] = v;
            }
            TStmt::SetField {
                receiver,
                field,
                value,
                pos,
            } => {
                let target = self.eval(receiver, frame, false)?;
                let v = self.eval(value, frame, false)?;
                match target {
                    Value::Obj(id) => self.heap.get_mut(id).fields[field.index as usize] = v,
                    _ => return Err(Halt::Fault(FaultKind::NullDereference, *pos)),
                }
            }
            TStmt::If {
                predicate,
                cond,
                then_body,
                else_body,
            } => {
                let outcome = self.predicate(cond, frame, false)?;
                let body = if self.record(method, *predicate, outcome) {
                    then_body
                } else {
                    else_body
                };
                return self.block(body, frame, method);
            }
            TStmt::While {
                predicate,
                cond,
                body,
            } => loop {
                self.tick()?;
                let outcome = self.predicate(cond, frame, false)?;
                if !self.record(method, *predicate, outcome) {
                    break;
                }
                if let Flow::Return(v) = self.block(body, frame, method)? {
                    return Ok(Flow::Return(v));
                }
            },
            TStmt::Return(value) => {
                let v = match value {
                    Some(e) => Some(self.eval(e, frame, false)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            TStmt::Expr(e) => {
                self.eval_any(e, frame, false)?;
            }
        }
        Ok(Flow::Normal)
    }

    /// Evaluates a predicate with its branch distances. In speculative mode
    /// nothing observable happens: calls, allocation and faults all abort
    /// with [`Halt::Speculation`].
    fn predicate(
        &mut self,
        e: &TExpr,
        frame: &mut Frame,
        speculative: bool,
    ) -> Result<distance::Outcome, Halt> {
        match &e.kind {
            TExprKind::Binary {
                op: op @ (BinOp::And | BinOp::Or),
                lhs,
                rhs,
            } => {
                let a = self.predicate(lhs, frame, speculative)?;
                let short_circuits = (*op == BinOp::And) != a.0;
                let b = if short_circuits {
                    // The right operand is not executed; estimate its distance
                    // without side effects.
                    match self.predicate(rhs, frame, true) {
                        Ok(b) => b,
                        Err(Halt::Speculation) => (false, K, K),
                        Err(other) => return Err(other),
                    }
                } else {
                    self.predicate(rhs, frame, speculative)?
                };
                Ok(if *op == BinOp::And {
                    distance::and(a, b)
                } else {
                    distance::or(a, b)
                })
            }
            TExprKind::Not(inner) => Ok(distance::not(self.predicate(inner, frame, speculative)?)),
            TExprKind::Binary {
                op: op @ (BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge),
                lhs,
                rhs,
            } => {
                let l = self.eval(lhs, frame, speculative)?;
                let r = self.eval(rhs, frame, speculative)?;
                Ok(distance::compare(*op, &l, &r))
            }
            _ => {
                let v = self.eval(e, frame, speculative)?;
                Ok(distance::atom(v.as_bool()))
            }
        }
    }

    fn fault(&self, kind: FaultKind, pos: Pos, speculative: bool) -> Halt {
        if speculative {
            Halt::Speculation
        } else {
            Halt::Fault(kind, pos)
        }
    }

    fn eval(&mut self, e: &TExpr, frame: &mut Frame, speculative: bool) -> Result<Value, Halt> {
        Ok(self
            .eval_any(e, frame, speculative)?
            .expect("typechecker rejects void used as value"))
    }

    fn eval_any(
        &mut self,
        e: &TExpr,
        frame: &mut Frame,
        speculative: bool,
    ) -> Result<Option<Value>, Halt> {
        let v = match &e.kind {
            TExprKind::Int(n) => Value::Int(*n),
            TExprKind::Bool(b) => Value::Bool(*b),
            TExprKind::Str(s) => Value::Str(s.clone()),
            TExprKind::Null => Value::Null,
            TExprKind::This => Value::Obj(frame.this.expect("typechecked `this`")),
            TExprKind::Local(slot) => frame.locals[*slot as usize].clone(),
            TExprKind::Field { receiver, field } => {
                match self.eval(receiver, frame, speculative)? {
                    Value::Obj(id) => self.heap.get(id).fields[field.index as usize].clone(),
                    _ => return Err(self.fault(FaultKind::NullDereference, e.pos, speculative)),
                }
            }
            TExprKind::Binary { op, lhs, rhs } => match op {
                BinOp::And => {
                    let a = self.eval(lhs, frame, speculative)?.as_bool();
                    Value::Bool(a && self.eval(rhs, frame, speculative)?.as_bool())
                }
                BinOp::Or => {
                    let a = self.eval(lhs, frame, speculative)?.as_bool();
                    Value::Bool(a || self.eval(rhs, frame, speculative)?.as_bool())
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    let a = self.eval(lhs, frame, speculative)?.as_int();
                    let b = self.eval(rhs, frame, speculative)?.as_int();
                    Value::Int(match op {
                        BinOp::Add => a.wrapping_add(b),
                        BinOp::Sub => a.wrapping_sub(b),
                        _ => a.wrapping_mul(b),
                    })
                }
                _ => {
                    let l = self.eval(lhs, frame, speculative)?;
                    let r = self.eval(rhs, frame, speculative)?;
                    Value::Bool(distance::compare(*op, &l, &r).0)
                }
            },
            TExprKind::Not(inner) => Value::Bool(!self.eval(inner, frame, speculative)?.as_bool()),
            TExprKind::Neg(inner) => {
                Value::Int(self.eval(inner, frame, speculative)?.as_int().wrapping_neg())
            }
            TExprKind::StrOp { op, receiver, args } => {
                let s = self.eval(receiver, frame, speculative)?;
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame, speculative)?);
                }
                match str_op(*op, s.as_str(), &vals) {
                    Some(v) => v,
                    None => return Err(self.fault(FaultKind::IndexOutOfBounds, e.pos, speculative)),
                }
            }
            TExprKind::Call {
                receiver,
                method,
                args,
            } => {
                if speculative {
                    return Err(Halt::Speculation);
                }
                let this = match receiver {
                    Some(r) => match self.eval(r, frame, false)? {
                        Value::Obj(id) => Some(id),
                        _ => return Err(Halt::Fault(FaultKind::NullDereference, e.pos)),
                    },
                    None => None,
                };
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame, false)?);
                }
                return self.call(*method, this, vals);
            }
            TExprKind::New { ctor, args } => {
                if speculative {
                    return Err(Halt::Speculation);
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame, false)?);
                }
                self.construct(*ctor, vals)?
            }
        };
        Ok(Some(v))
    }
}

fn char_len(s: &str) -> usize {
    if s.is_ascii() {
        s.len()
    } else {
        s.chars().count()
    }
}

fn char_slice(s: &str, from: usize, to: usize) -> &str {
    if s.is_ascii() {
        return &s[from..to];
    }
    let mut idx = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let start = idx.nth(from).unwrap_or(s.len());
    let end = if to == from {
        start
    } else {
        idx.nth(to - from - 1).unwrap_or(s.len())
    };
    &s[start..end]
}

/// `None` signals an out-of-range index.
fn str_op(op: StrOp, s: &Arc<str>, args: &[Value]) -> Option<Value> {
    Some(match op {
        StrOp::Length => Value::Int(char_len(s) as i64),
        StrOp::Contains => Value::Bool(s.contains(&**args[0].as_str())),
        StrOp::IndexOf => Value::Int(match s.find(&**args[0].as_str()) {
            Some(byte) => char_len(&s[..byte]) as i64,
            None => -1,
        }),
        StrOp::Concat => {
            let mut out = String::with_capacity(s.len() + args[0].as_str().len());
            out.push_str(s);
            out.push_str(args[0].as_str());
            Value::Str(Arc::from(out))
        }
        StrOp::CharAt => {
            let i = args[0].as_int();
            let len = char_len(s) as i64;
            if i < 0 || i >= len {
                return None;
            }
            Value::Str(Arc::from(char_slice(s, i as usize, i as usize + 1)))
        }
        StrOp::Substring => {
            let (from, to) = (args[0].as_int(), args[1].as_int());
            let len = char_len(s) as i64;
            if from < 0 || to < from || to > len {
                return None;
            }
            Value::Str(Arc::from(char_slice(s, from as usize, to as usize)))
        }
    })
}

/// Executes `test` from a fresh heap.
pub fn execute_test(program: &CheckedProgram, test: &TestCase, limits: ExecLimits) -> ExecutionTrace {
    let mut exec = Executor::new(program, limits);
    for stmt in &test.statements {
        exec.run_statement(stmt);
        if exec.halted() {
            break;
        }
    }
    exec.into_trace()
}
