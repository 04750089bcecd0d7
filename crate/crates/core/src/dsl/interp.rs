//! Deterministic tree-walking interpreter, run once per simulation tick.
//!
//! One step is charged per statement executed and per expression node
//! evaluated. Arithmetic is IEEE double precision, except that any division
//! by zero or non-finite result is a runtime error.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::*;
use crate::world::{normalize_angle, Pose, Vec2};

pub const DEFAULT_STEP_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Number(f64),
    Bool(bool),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Value {
    fn type_name(self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Bool(_) => "boolean",
        }
    }
}

/// Read-only world view a controller sees during one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickInputs {
    pub sensors: Vec<f64>,
    pub pose: Pose,
    pub goal: Vec2,
    pub robot_radius: f64,
    pub tick: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub v: f64,
    pub omega: f64,
}

impl Command {
    pub const STOP: Command = Command { v: 0.0, omega: 0.0 };

    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuntimeErrorKind {
    Fault,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{span}: {message}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub message: String,
    pub span: Span,
}

impl RuntimeError {
    fn fault(span: Span, message: impl Into<String>) -> Self {
        Self {
            kind: RuntimeErrorKind::Fault,
            message: message.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutcome {
    /// Last `drive` executed this tick; absent when none ran or the tick failed.
    pub command: Option<Command>,
    pub steps_used: u64,
    pub error: Option<RuntimeError>,
}

/// Persistent controller state, in declaration order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateStore {
    slots: Vec<(String, Value)>,
}

impl StateStore {
    pub fn get(&self, name: &str) -> Option<Value> {
        self.slots.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Value)> {
        self.slots.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Evaluates `state` declarations in order against the first tick's inputs.
pub fn init_state(program: &Program, inputs: &TickInputs, budget: u64) -> Result<StateStore, RuntimeError> {
    let mut store = StateStore::default();
    let mut m = Machine::new(inputs, budget);
    for decl in &program.state {
        let v = m.eval(&decl.init, &store)?;
        store.slots.push((decl.name.clone(), v));
    }
    Ok(store)
}

/// Runs the tick block once. State mutations persist in `state`.
pub fn run_tick(program: &Program, state: &mut StateStore, inputs: &TickInputs, budget: u64) -> TickOutcome {
    let mut m = Machine::new(inputs, budget);
    let result = m.block(&program.tick, state);
    match result {
        Ok(()) => TickOutcome {
            command: m.command,
            steps_used: m.steps,
            error: None,
        },
        Err(e) => TickOutcome {
            command: None,
            steps_used: m.steps,
            error: Some(e),
        },
    }
}

struct Machine<'a> {
    inputs: &'a TickInputs,
    locals: Vec<(String, Value)>,
    steps: u64,
    budget: u64,
    command: Option<Command>,
}

type Eval<T> = Result<T, RuntimeError>;

impl<'a> Machine<'a> {
    fn new(inputs: &'a TickInputs, budget: u64) -> Self {
        Self {
            inputs,
            locals: Vec::new(),
            steps: 0,
            budget,
            command: None,
        }
    }

    fn step(&mut self, span: Span) -> Eval<()> {
        if self.steps >= self.budget {
            return Err(RuntimeError {
                kind: RuntimeErrorKind::BudgetExceeded,
                message: format!("step budget of {} exceeded", self.budget),
                span,
            });
        }
        self.steps += 1;
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt], state: &mut StateStore) -> Eval<()> {
        let mark = self.locals.len();
        let result = stmts.iter().try_for_each(|s| self.stmt(s, state));
        self.locals.truncate(mark);
        result
    }

    fn stmt(&mut self, stmt: &Stmt, state: &mut StateStore) -> Eval<()> {
        self.step(stmt.span)?;
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                let v = self.eval(value, state)?;
                self.locals.push((name.clone(), v));
            }
            StmtKind::Assign { name, value } => {
                let v = self.eval(value, state)?;
                if let Some(slot) = self.locals.iter_mut().rev().find(|(n, _)| n == name) {
                    slot.1 = v;
                } else if let Some(slot) = state.slots.iter_mut().find(|(n, _)| n == name) {
                    slot.1 = v;
                } else {
                    return Err(RuntimeError::fault(stmt.span, format!("undeclared name `{name}`")));
                }
            }
            StmtKind::If { branches, otherwise } => {
                for (cond, body) in branches {
                    if self.truthy(cond, state)? {
                        return self.block(body, state);
                    }
                }
                if let Some(body) = otherwise {
                    return self.block(body, state);
                }
            }
            StmtKind::While { cond, body } => {
                while self.truthy(cond, state)? {
                    self.block(body, state)?;
                }
            }
            StmtKind::Drive { v, omega } => {
                let v = self.number(v, state)?;
                let omega = self.number(omega, state)?;
                self.command = Some(Command { v, omega });
            }
        }
        Ok(())
    }

    fn truthy(&mut self, e: &Expr, state: &StateStore) -> Eval<bool> {
        match self.eval(e, state)? {
            Value::Bool(b) => Ok(b),
            other => Err(RuntimeError::fault(
                e.span,
                format!("type mismatch: expected boolean, found {}", other.type_name()),
            )),
        }
    }

    fn number(&mut self, e: &Expr, state: &StateStore) -> Eval<f64> {
        match self.eval(e, state)? {
            Value::Number(n) => Ok(n),
            other => Err(RuntimeError::fault(
                e.span,
                format!("type mismatch: expected number, found {}", other.type_name()),
            )),
        }
    }

    fn finite(span: Span, n: f64) -> Eval<Value> {
        if n.is_finite() {
            Ok(Value::Number(n))
        } else {
            Err(RuntimeError::fault(span, "arithmetic produced a non-finite result"))
        }
    }

    fn eval(&mut self, e: &Expr, state: &StateStore) -> Eval<Value> {
        self.step(e.span)?;
        match &e.kind {
            ExprKind::Number(n) => Ok(Value::Number(*n)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Var(name) => self
                .locals
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .or_else(|| state.get(name))
                .ok_or_else(|| RuntimeError::fault(e.span, format!("undeclared name `{name}`"))),
            ExprKind::Unary(UnaryOp::Neg, operand) => Ok(Value::Number(-self.number(operand, state)?)),
            ExprKind::Unary(UnaryOp::Not, operand) => Ok(Value::Bool(!self.truthy(operand, state)?)),
            ExprKind::Binary(op, lhs, rhs) => self.binary(e.span, *op, lhs, rhs, state),
            ExprKind::Call(name, args) => self.call(e.span, name, args, state),
        }
    }

    fn binary(&mut self, span: Span, op: BinaryOp, lhs: &Expr, rhs: &Expr, state: &StateStore) -> Eval<Value> {
        match op {
            BinaryOp::And => return Ok(Value::Bool(self.truthy(lhs, state)? && self.truthy(rhs, state)?)),
            BinaryOp::Or => return Ok(Value::Bool(self.truthy(lhs, state)? || self.truthy(rhs, state)?)),
            BinaryOp::Eq | BinaryOp::Ne => {
                let (a, b) = (self.eval(lhs, state)?, self.eval(rhs, state)?);
                let same = match (a, b) {
                    (Value::Number(x), Value::Number(y)) => x == y,
                    (Value::Bool(x), Value::Bool(y)) => x == y,
                    _ => {
                        return Err(RuntimeError::fault(
                            span,
                            format!("type mismatch: cannot compare {} with {}", a.type_name(), b.type_name()),
                        ))
                    }
                };
                return Ok(Value::Bool(same == (op == BinaryOp::Eq)));
            }
            _ => {}
        }
        let a = self.number(lhs, state)?;
        let b = self.number(rhs, state)?;
        match op {
            BinaryOp::Lt => Ok(Value::Bool(a < b)),
            BinaryOp::Le => Ok(Value::Bool(a <= b)),
            BinaryOp::Gt => Ok(Value::Bool(a > b)),
            BinaryOp::Ge => Ok(Value::Bool(a >= b)),
            BinaryOp::Add => Self::finite(span, a + b),
            BinaryOp::Sub => Self::finite(span, a - b),
            BinaryOp::Mul => Self::finite(span, a * b),
            BinaryOp::Div | BinaryOp::Rem if b == 0.0 => Err(RuntimeError::fault(span, "division by zero")),
            BinaryOp::Div => Self::finite(span, a / b),
            BinaryOp::Rem => Self::finite(span, a % b),
            BinaryOp::And | BinaryOp::Or | BinaryOp::Eq | BinaryOp::Ne => unreachable!("handled above"),
        }
    }

    fn call(&mut self, span: Span, name: &str, args: &[Expr], state: &StateStore) -> Eval<Value> {
        let mut nums = [0.0; 3];
        if builtin_arity(name) != Some(args.len()) {
            return Err(RuntimeError::fault(span, format!("bad call to `{name}`")));
        }
        for (slot, a) in nums.iter_mut().zip(args) {
            *slot = self.number(a, state)?;
        }
        let inputs = self.inputs;
        let v = match name {
            "sensor" => {
                let i = nums[0];
                if i.fract() != 0.0 || i < 0.0 || i >= inputs.sensors.len() as f64 {
                    return Err(RuntimeError::fault(
                        span,
                        format!("sensor index {i} out of range (have {})", inputs.sensors.len()),
                    ));
                }
                inputs.sensors[i as usize]
            }
            "sensor_count" => inputs.sensors.len() as f64,
            "pose_x" => inputs.pose.position.x,
            "pose_y" => inputs.pose.position.y,
            "pose_heading" => inputs.pose.heading,
            "goal_x" => inputs.goal.x,
            "goal_y" => inputs.goal.y,
            "goal_dist" => inputs.pose.position.distance(inputs.goal),
            "robot_radius" => inputs.robot_radius,
            "tick_index" => inputs.tick as f64,
            "sin" => nums[0].sin(),
            "cos" => nums[0].cos(),
            "atan2" => nums[0].atan2(nums[1]),
            "sqrt" => {
                if nums[0] < 0.0 {
                    return Err(RuntimeError::fault(span, "sqrt of a negative number"));
                }
                nums[0].sqrt()
            }
            "abs" => nums[0].abs(),
            "min" => nums[0].min(nums[1]),
            "max" => nums[0].max(nums[1]),
            "wrap_angle" => normalize_angle(nums[0]),
            "clamp" => {
                if nums[1] > nums[2] {
                    return Err(RuntimeError::fault(span, "clamp lower bound exceeds upper bound"));
                }
                nums[0].clamp(nums[1], nums[2])
            }
            _ => return Err(RuntimeError::fault(span, format!("unknown function `{name}`"))),
        };
        Self::finite(span, v)
    }
}
