//! Grid functions on an interval and on the cylinder `[0,T] × S¹`.
//!
//! A [`CylFn`] stores `(nt + 1) × ntheta` values. The angular coordinate is
//! periodic with period 1 and the node `eta = 1` is never stored; every
//! angular index is taken modulo `ntheta`.

use std::fmt;
use std::io::{Read, Write};

use thiserror::Error;

use crate::expr::{EvalError, Expression};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least {need} nodes, got {got}")]
    TooFewNodes { need: usize, got: usize },
    #[error("invalid interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("grid mismatch: {0}")]
    Mismatch(String),
    #[error("angular grid of {ntheta} nodes is too coarse for {order} derivative(s); need at least {need}")]
    TooCoarse {
        ntheta: usize,
        order: usize,
        need: usize,
    },
    #[error("time {t} is not a node of the time grid")]
    NotOnGrid { t: f64 },
    #[error("evaluation failed at (t={t}, eta={eta}): {source}")]
    Eval {
        t: f64,
        eta: f64,
        #[source]
        source: EvalError,
    },
    #[error("expression variable `{0}` is not one of t, eta, xi")]
    UnknownVariable(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for GridError {
    fn from(e: csv::Error) -> Self {
        GridError::Csv(e.to_string())
    }
}

/// Derivative order, or time horizon index, of a seminorm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Level(pub usize);

/// Accuracy order of the periodic central difference stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    Second,
    #[default]
    Fourth,
}

/// Formats a value with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_finite(values: &[f64]) -> Result<(), GridError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(GridError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Values at `n + 1` uniform nodes of `[a, b]`.
#[derive(Clone, PartialEq)]
pub struct GridFn1D {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl fmt::Debug for GridFn1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFn1D")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("n", &self.n())
            .field("sup", &self.sup_norm())
            .finish_non_exhaustive()
    }
}

impl GridFn1D {
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self, GridError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(GridError::BadInterval { a, b });
        }
        if values.len() < 3 {
            return Err(GridError::TooFewNodes {
                need: 3,
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(GridFn1D { a, b, values })
    }

    /// Samples `f` at the `n + 1` nodes of `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let h = (b - a) / n as f64;
        let values = (0..=n)
            .map(|i| if i == n { f(b) } else { f(a + i as f64 * h) })
            .collect();
        GridFn1D::new(a, b, values)
    }

    /// Samples a one-variable expression (its first declared variable).
    pub fn from_expr(a: f64, b: f64, n: usize, e: &Expression) -> Result<Self, GridError> {
        let arity = e.variables().len();
        let h = (b - a) / n as f64;
        let mut values = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = if i == n { b } else { a + i as f64 * h };
            let mut args = vec![0.0; arity];
            if arity > 0 {
                args[0] = x;
            }
            let v = e.eval(&args).map_err(|source| GridError::Eval {
                t: x,
                eta: f64::NAN,
                source,
            })?;
            values.push(v);
        }
        GridFn1D::new(a, b, values)
    }

    pub fn constant(a: f64, b: f64, n: usize, c: f64) -> Result<Self, GridError> {
        GridFn1D::new(a, b, vec![c; n + 1])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n() {
            self.b
        } else {
            self.a + i as f64 * self.h()
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn same_grid(&self, other: &GridFn1D) -> bool {
        self.a == other.a && self.b == other.b && self.values.len() == other.values.len()
    }

    fn check_grid(&self, other: &GridFn1D) -> Result<(), GridError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(GridError::Mismatch(format!(
                "[{}, {}] with {} nodes vs [{}, {}] with {} nodes",
                self.a,
                self.b,
                self.values.len(),
                other.a,
                other.b,
                other.values.len()
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFn1D, GridError> {
        GridFn1D::new(self.a, self.b, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add(&self, other: &GridFn1D) -> Result<GridFn1D, GridError> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridFn1D) -> Result<GridFn1D, GridError> {
        self.check_grid(other)?;
        let values = zip_with(&self.values, &other.values, |x, y| x - y);
        GridFn1D::new(self.a, self.b, values)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &GridFn1D) -> Result<GridFn1D, GridError> {
        self.check_grid(other)?;
        let values = zip_with(&self.values, &other.values, |x, y| x + alpha * y);
        GridFn1D::new(self.a, self.b, values)
    }

    pub fn scale(&self, alpha: f64) -> Result<GridFn1D, GridError> {
        self.map(|v| alpha * v)
    }

    pub fn max_abs_diff(&self, other: &GridFn1D) -> Result<f64, GridError> {
        self.check_grid(other)?;
        Ok(max_abs_diff(&self.values, &other.values))
    }

    /// Writes `node,value` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GridError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["node", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([fmt17(self.node(i)), fmt17(*v)])?;
        }
        out.flush().map_err(|e| GridError::Csv(e.to_string()))
    }

    /// Reads `node,value` rows. Nodes must be uniformly spaced.
    pub fn read_csv<R: Read>(r: R) -> Result<GridFn1D, GridError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "node" || &headers[1] != "value" {
            return Err(GridError::Csv(format!(
                "expected header `node,value`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(GridError::Csv(format!(
                    "row {} has {} fields",
                    line + 1,
                    rec.len()
                )));
            }
            nodes.push(parse_field(&rec[0], line)?);
            values.push(parse_field(&rec[1], line)?);
        }
        if nodes.len() < 3 {
            return Err(GridError::TooFewNodes {
                need: 3,
                got: nodes.len(),
            });
        }
        let (a, b) = (nodes[0], *nodes.last().unwrap());
        if !(a < b) {
            return Err(GridError::BadInterval { a, b });
        }
        let h = (b - a) / (nodes.len() - 1) as f64;
        for (i, x) in nodes.iter().enumerate() {
            if (x - (a + i as f64 * h)).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                return Err(GridError::Csv(format!(
                    "node {i} at {x} is not uniformly spaced"
                )));
            }
        }
        GridFn1D::new(a, b, values)
    }
}

fn parse_field(s: &str, line: usize) -> Result<f64, GridError> {
    let v: f64 = s
        .parse()
        .map_err(|_| GridError::Csv(format!("row {}: `{s}` is not a number", line + 1)))?;
    if !v.is_finite() {
        return Err(GridError::Csv(format!(
            "row {}: non-finite value",
            line + 1
        )));
    }
    Ok(v)
}

pub(crate) fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

fn zip_with(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

/// Values on `nt + 1` time nodes of `[0, T]` times `ntheta` angular nodes.
#[derive(Clone, PartialEq)]
pub struct CylFn {
    t_final: f64,
    nt: usize,
    ntheta: usize,
    values: Vec<f64>,
}

impl fmt::Debug for CylFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CylFn")
            .field("t_final", &self.t_final)
            .field("nt", &self.nt)
            .field("ntheta", &self.ntheta)
            .field("sup", &self.sup_norm())
            .finish_non_exhaustive()
    }
}

impl CylFn {
    pub fn new(
        t_final: f64,
        nt: usize,
        ntheta: usize,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(GridError::BadInterval { a: 0.0, b: t_final });
        }
        if nt < 1 || ntheta < 1 {
            return Err(GridError::TooFewNodes {
                need: 2,
                got: nt.min(ntheta),
            });
        }
        if values.len() != (nt + 1) * ntheta {
            return Err(GridError::Mismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                nt + 1,
                ntheta
            )));
        }
        check_finite(&values)?;
        Ok(CylFn {
            t_final,
            nt,
            ntheta,
            values,
        })
    }

    pub fn zeros(t_final: f64, nt: usize, ntheta: usize) -> Result<Self, GridError> {
        CylFn::new(t_final, nt, ntheta, vec![0.0; (nt + 1) * ntheta])
    }

    pub fn constant(t_final: f64, nt: usize, ntheta: usize, c: f64) -> Result<Self, GridError> {
        CylFn::new(t_final, nt, ntheta, vec![c; (nt + 1) * ntheta])
    }

    pub fn from_fn(
        t_final: f64,
        nt: usize,
        ntheta: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let mut values = Vec::with_capacity((nt + 1) * ntheta);
        for k in 0..=nt {
            let t = time_node(t_final, nt, k);
            for m in 0..ntheta {
                values.push(f(t, m as f64 / ntheta as f64));
            }
        }
        CylFn::new(t_final, nt, ntheta, values)
    }

    /// Same grid as `self`, values from `f(k, m)`.
    pub fn from_indexed(&self, f: impl Fn(usize, usize) -> f64) -> Result<Self, GridError> {
        let mut values = Vec::with_capacity(self.values.len());
        for k in 0..=self.nt {
            for m in 0..self.ntheta {
                values.push(f(k, m));
            }
        }
        CylFn::new(self.t_final, self.nt, self.ntheta, values)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of time cells.
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    pub fn dtheta(&self) -> f64 {
        1.0 / self.ntheta as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        time_node(self.t_final, self.nt, k)
    }

    pub fn eta(&self, m: usize) -> f64 {
        (m % self.ntheta) as f64 / self.ntheta as f64
    }

    /// Value at time node `k` and angular index `m` (taken modulo `ntheta`).
    pub fn get(&self, k: usize, m: isize) -> f64 {
        let n = self.ntheta as isize;
        self.values[k * self.ntheta + m.rem_euclid(n) as usize]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.ntheta..(k + 1) * self.ntheta]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn same_grid(&self, other: &CylFn) -> bool {
        self.t_final == other.t_final && self.nt == other.nt && self.ntheta == other.ntheta
    }

    fn check_grid(&self, other: &CylFn) -> Result<(), GridError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(GridError::Mismatch(format!(
                "T={} {}x{} vs T={} {}x{}",
                self.t_final,
                self.nt + 1,
                self.ntheta,
                other.t_final,
                other.nt + 1,
                other.ntheta
            )))
        }
    }

    fn with_values(&self, values: Vec<f64>) -> Result<CylFn, GridError> {
        CylFn::new(self.t_final, self.nt, self.ntheta, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<CylFn, GridError> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add(&self, other: &CylFn) -> Result<CylFn, GridError> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &CylFn) -> Result<CylFn, GridError> {
        self.check_grid(other)?;
        self.with_values(zip_with(&self.values, &other.values, |x, y| x - y))
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &CylFn) -> Result<CylFn, GridError> {
        self.check_grid(other)?;
        self.with_values(zip_with(&self.values, &other.values, |x, y| x + alpha * y))
    }

    pub fn scale(&self, alpha: f64) -> Result<CylFn, GridError> {
        self.map(|v| alpha * v)
    }

    /// Nodewise product.
    pub fn mul(&self, other: &CylFn) -> Result<CylFn, GridError> {
        self.check_grid(other)?;
        self.with_values(zip_with(&self.values, &other.values, |x, y| x * y))
    }

    pub fn max_abs_diff(&self, other: &CylFn) -> Result<f64, GridError> {
        self.check_grid(other)?;
        Ok(max_abs_diff(&self.values, &other.values))
    }

    /// `l`-fold periodic central difference in the angular variable.
    pub fn d_theta(&self, l: usize, order: StencilOrder) -> Result<CylFn, GridError> {
        let need = 2 * l + 5;
        if l == 0 {
            return Ok(self.clone());
        }
        if self.ntheta < need {
            return Err(GridError::TooCoarse {
                ntheta: self.ntheta,
                order: l,
                need,
            });
        }
        let mut cur = self.values.clone();
        let mut next = vec![0.0; cur.len()];
        for _ in 0..l {
            for k in 0..=self.nt {
                let off = k * self.ntheta;
                periodic_diff(
                    &cur[off..off + self.ntheta],
                    self.dtheta(),
                    order,
                    &mut next[off..off + self.ntheta],
                );
            }
            std::mem::swap(&mut cur, &mut next);
        }
        self.with_values(cur)
    }

    /// `max_{l ≤ i} sup |∂_η^l y|`.
    pub fn c0i_norm(&self, level: Level, order: StencilOrder) -> Result<f64, GridError> {
        let mut best = self.sup_norm();
        for l in 1..=level.0 {
            best = best.max(self.d_theta(l, order)?.sup_norm());
        }
        Ok(best)
    }

    /// Time derivative: fourth-order central differences in the interior and
    /// fourth-order one-sided stencils at the two ends. Needs `nt ≥ 4`.
    pub fn d_time(&self) -> Result<CylFn, GridError> {
        let nt = self.nt;
        if nt < 4 {
            return Err(GridError::TooFewNodes {
                need: 5,
                got: nt + 1,
            });
        }
        let inv = 1.0 / (12.0 * self.dt());
        let at = |k: usize, m: usize| self.values[k * self.ntheta + m];
        let mut out = vec![0.0; self.values.len()];
        for k in 0..=nt {
            for m in 0..self.ntheta {
                let f = |j: usize| at(j, m);
                let d = match k {
                    0 => -25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4),
                    1 => -3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4),
                    k if k == nt - 1 => {
                        3.0 * f(nt) + 10.0 * f(nt - 1) - 18.0 * f(nt - 2) + 6.0 * f(nt - 3)
                            - f(nt - 4)
                    }
                    k if k == nt => {
                        25.0 * f(nt) - 48.0 * f(nt - 1) + 36.0 * f(nt - 2) - 16.0 * f(nt - 3)
                            + 3.0 * f(nt - 4)
                    }
                    k => -f(k + 2) + 8.0 * f(k + 1) - 8.0 * f(k - 1) + f(k - 2),
                };
                out[k * self.ntheta + m] = d * inv;
            }
        }
        self.with_values(out)
    }

    /// Index of the time node equal to `t`, if any.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let x = t / self.dt();
        let k = x.round();
        if k < 0.0 || k > self.nt as f64 || (x - k).abs() > 1e-9 * (1.0 + x.abs()) {
            return None;
        }
        Some(k as usize)
    }

    /// Restriction to `[0, t_new]`; `t_new` must be a time node.
    pub fn restrict(&self, t_new: f64) -> Result<CylFn, GridError> {
        let k = self
            .time_index(t_new)
            .ok_or(GridError::NotOnGrid { t: t_new })?;
        if k == 0 {
            return Err(GridError::NotOnGrid { t: t_new });
        }
        if k == self.nt {
            return Ok(self.clone());
        }
        CylFn::new(
            self.t(k),
            k,
            self.ntheta,
            self.values[..(k + 1) * self.ntheta].to_vec(),
        )
    }

    /// `z(t, η) = x(t, η, y(t, η))` nodewise. `x` may use any of the names
    /// `t`, `eta`, `xi`.
    pub fn compose(&self, x: &Expression) -> Result<CylFn, GridError> {
        let slots = cylinder_slots(x)?;
        let mut args = vec![0.0; slots.len()];
        let mut out = Vec::with_capacity(self.values.len());
        for k in 0..=self.nt {
            let t = self.t(k);
            for m in 0..self.ntheta {
                let eta = self.eta(m);
                let point = [t, eta, self.values[k * self.ntheta + m]];
                for (a, s) in args.iter_mut().zip(&slots) {
                    *a = point[*s];
                }
                let v = x
                    .eval(&args)
                    .map_err(|source| GridError::Eval { t, eta, source })?;
                out.push(v);
            }
        }
        self.with_values(out)
    }

    /// Writes `t,eta,value` rows, time-major.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GridError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "eta", "value"])?;
        for k in 0..=self.nt {
            for m in 0..self.ntheta {
                out.write_record([
                    fmt17(self.t(k)),
                    fmt17(self.eta(m)),
                    fmt17(self.values[k * self.ntheta + m]),
                ])?;
            }
        }
        out.flush().map_err(|e| GridError::Csv(e.to_string()))
    }

    /// Reads `t,eta,value` rows as written by [`CylFn::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<CylFn, GridError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 3
            || &headers[0] != "t"
            || &headers[1] != "eta"
            || &headers[2] != "value"
        {
            return Err(GridError::Csv("expected header `t,eta,value`".into()));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(GridError::Csv(format!(
                    "row {} has {} fields",
                    line + 1,
                    rec.len()
                )));
            }
            rows.push([
                parse_field(&rec[0], line)?,
                parse_field(&rec[1], line)?,
                parse_field(&rec[2], line)?,
            ]);
        }
        let first_t = rows
            .first()
            .map(|r| r[0])
            .ok_or(GridError::TooFewNodes { need: 2, got: 0 })?;
        let ntheta = rows.iter().take_while(|r| r[0] == first_t).count();
        if ntheta == 0 || rows.len() % ntheta != 0 || rows.len() / ntheta < 2 {
            return Err(GridError::Csv(
                "rows do not form a full t × eta grid".into(),
            ));
        }
        let nt = rows.len() / ntheta - 1;
        let t_final = rows.last().unwrap()[0];
        let grid = CylFn::zeros(t_final, nt, ntheta)?;
        for (i, r) in rows.iter().enumerate() {
            let (k, m) = (i / ntheta, i % ntheta);
            let tol = 1e-9 * (1.0 + t_final);
            if (r[0] - grid.t(k)).abs() > tol || (r[1] - grid.eta(m)).abs() > tol {
                return Err(GridError::Csv(format!(
                    "row {} at ({}, {}) is off the uniform grid",
                    i + 1,
                    r[0],
                    r[1]
                )));
            }
        }
        CylFn::new(t_final, nt, ntheta, rows.iter().map(|r| r[2]).collect())
    }
}

fn time_node(t_final: f64, nt: usize, k: usize) -> f64 {
    if k == nt {
        t_final
    } else {
        k as f64 * t_final / nt as f64
    }
}

/// Maps each variable of `x` to its slot in `(t, eta, xi)`.
pub(crate) fn cylinder_slots(x: &Expression) -> Result<Vec<usize>, GridError> {
    x.variables()
        .iter()
        .map(|v| match v.as_str() {
            "t" => Ok(0),
            "eta" => Ok(1),
            "xi" => Ok(2),
            other => Err(GridError::UnknownVariable(other.to_string())),
        })
        .collect()
}

/// `max_{l ≤ i} sup |∂_η^l f|` for one periodic angular row.
pub(crate) fn row_c0i(row: &[f64], level: Level, order: StencilOrder) -> f64 {
    let h = 1.0 / row.len() as f64;
    let mut best = sup(row);
    let mut cur = row.to_vec();
    let mut next = vec![0.0; row.len()];
    for _ in 0..level.0 {
        periodic_diff(&cur, h, order, &mut next);
        best = best.max(sup(&next));
        std::mem::swap(&mut cur, &mut next);
    }
    best
}

fn periodic_diff(f: &[f64], h: f64, order: StencilOrder, out: &mut [f64]) {
    let n = f.len();
    let at = |m: usize, off: isize| f[(m as isize + off).rem_euclid(n as isize) as usize];
    match order {
        StencilOrder::Second => {
            let inv = 1.0 / (2.0 * h);
            for m in 0..n {
                out[m] = (at(m, 1) - at(m, -1)) * inv;
            }
        }
        StencilOrder::Fourth => {
            let inv = 1.0 / (12.0 * h);
            for m in 0..n {
                out[m] = (8.0 * (at(m, 1) - at(m, -1)) - (at(m, 2) - at(m, -2))) * inv;
            }
        }
    }
}
