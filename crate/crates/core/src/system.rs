//! Systems in averaging standard form `x' = eps * g(t, x, eps)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::numkit::expm;

/// How a switching function depends on its arguments. Only state-dependent
/// switching can make the averaged field nonsmooth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchKind {
    /// Depends on `t` (and possibly `eps`) only.
    Temporal,
    /// Depends on the state but not on `t`.
    Spatial,
    /// Depends on both, so its `t`-roots move with the state.
    Mixed,
}

#[derive(Clone, Debug)]
enum Field {
    Expressions(Vec<Expr>),
    /// `g(t, x, eps) = exp(-A t) h(t, exp(A t) x, eps)`.
    Transformed { a: DMatrix<f64>, h: Vec<Expr> },
}

#[derive(Clone, Debug)]
struct Switching {
    expr: Expr,
    kind: SwitchKind,
}

#[derive(Clone, Debug)]
pub struct StandardSystem {
    label: String,
    dim: usize,
    period: f64,
    field: Field,
    switching: Vec<Switching>,
}

fn classify(expr: &Expr, transformed: bool) -> SwitchKind {
    let state = expr.references_state();
    let time = expr.references_time();
    match (state, time || (state && transformed)) {
        (false, _) => SwitchKind::Temporal,
        (true, false) => SwitchKind::Spatial,
        (true, true) => SwitchKind::Mixed,
    }
}

fn collect_switching(exprs: &[Expr], transformed: bool) -> Vec<Switching> {
    exprs
        .iter()
        .flat_map(Expr::switching_functions)
        .map(|expr| Switching { kind: classify(&expr, transformed), expr })
        .collect()
}

fn check_extent(exprs: &[Expr], dim: usize) -> Result<()> {
    if exprs.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: exprs.len() });
    }
    if let Some(e) = exprs.iter().find(|e| e.state_extent() > dim) {
        return Err(Error::InvalidInput(format!("expression {e} references a state beyond x{dim}")));
    }
    Ok(())
}

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("period must be positive and finite, got {period}")))
    }
}

impl StandardSystem {
    pub fn new(label: impl Into<String>, period: f64, g: Vec<Expr>) -> Result<Self> {
        check_period(period)?;
        let dim = g.len();
        if dim == 0 {
            return Err(Error::InvalidInput("system has no components".into()));
        }
        check_extent(&g, dim)?;
        let switching = collect_switching(&g, false);
        Ok(Self { label: label.into(), dim, period, field: Field::Expressions(g), switching })
    }

    /// Parses one expression per component.
    pub fn parse<S: AsRef<str>>(label: impl Into<String>, period: f64, sources: &[S]) -> Result<Self> {
        let n = sources.len();
        let g = sources.iter().map(|s| expr::parse(s.as_ref(), n)).collect::<Result<Vec<_>, _>>()?;
        Self::new(label, period, g)
    }

    /// The standard form of `u' = A u + eps h(t, u, eps)` under `u = exp(A t) x`.
    /// Callers are expected to have checked that `exp(A T) = I`.
    pub(crate) fn transformed(label: impl Into<String>, period: f64, a: DMatrix<f64>, h: Vec<Expr>) -> Result<Self> {
        check_period(period)?;
        let dim = a.nrows();
        check_extent(&h, dim)?;
        let nontrivial = a.iter().any(|v| *v != 0.0);
        let switching = collect_switching(&h, nontrivial);
        Ok(Self { label: label.into(), dim, period, field: Field::Transformed { a, h }, switching })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Component expressions when the field is given directly.
    pub fn expressions(&self) -> Option<&[Expr]> {
        match &self.field {
            Field::Expressions(g) => Some(g),
            Field::Transformed { .. } => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.switching.is_empty()
    }

    pub fn switching_count(&self) -> usize {
        self.switching.len()
    }

    pub fn switching_kind(&self, i: usize) -> SwitchKind {
        self.switching[i].kind
    }

    pub fn switching_expr(&self, i: usize) -> &Expr {
        &self.switching[i].expr
    }

    /// Evaluates `g(t, x, eps)` (without the `eps` prefactor) into `out`.
    pub fn eval_field(&self, t: f64, x: &[f64], eps: f64, out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        match &self.field {
            Field::Expressions(g) => {
                for (o, e) in out.iter_mut().zip(g) {
                    *o = e.eval(t, x, eps)?;
                }
            }
            Field::Transformed { a, h } => {
                let fwd = expm(&(a * t))?;
                let back = expm(&(a * -t))?;
                let u = &fwd * DVector::from_column_slice(x);
                let hv = h.iter().map(|e| e.eval(t, u.as_slice(), eps)).collect::<Result<Vec<_>, _>>()?;
                let g = back * DVector::from_vec(hv);
                out.copy_from_slice(g.as_slice());
            }
        }
        Ok(())
    }

    pub fn field(&self, t: f64, x: &[f64], eps: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_field(t, x, eps, &mut out)?;
        Ok(out)
    }

    /// Value of switching function `i` at `(t, x, eps)`, composed with the
    /// change of variables for transformed systems.
    pub fn eval_switching(&self, i: usize, t: f64, x: &[f64], eps: f64) -> Result<f64> {
        let sw = &self.switching[i];
        match &self.field {
            Field::Transformed { a, .. } if sw.expr.references_state() => {
                let u = expm(&(a * t))? * DVector::from_column_slice(x);
                Ok(sw.expr.eval(t, u.as_slice(), eps)?)
            }
            _ => Ok(sw.expr.eval(t, x, eps)?),
        }
    }

    pub fn eval_all_switching(&self, t: f64, x: &[f64], eps: f64, out: &mut [f64]) -> Result<()> {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.eval_switching(i, t, x, eps)?;
        }
        Ok(())
    }
}
