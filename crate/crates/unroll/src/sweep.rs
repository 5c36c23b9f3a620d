// Copyright 2026 The unroll authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Parameter-grid sweeps over the closed-form quantities.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use unroll_core::{
    best_linear_value, bilevel_optimal_value, optimal_omega, unrolling_optimal, unrolling_optimal_value, DataKind,
    ModelParams, OmegaSet,
};

use crate::io::fmt_f64;
use crate::par::mc_risk_par;

/// Largest grid a sweep may expand to.
pub const MAX_CELLS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    BestLinear,
    Bilevel,
    Unrolling,
    OptimalOmega,
    RiskRatio,
    McCheck,
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "best-linear" => Quantity::BestLinear,
            "bilevel" => Quantity::Bilevel,
            "unrolling" => Quantity::Unrolling,
            "optimal-omega" => Quantity::OptimalOmega,
            "risk-ratio" => Quantity::RiskRatio,
            "mc-check" => Quantity::McCheck,
            other => return Err(format!("unknown quantity {other:?}")),
        })
    }
}

/// A class-optimal risk used as one side of a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskSource {
    BestLinear,
    Bilevel,
    /// Unrolled class at the cell's `N` and `ω`.
    Unrolling,
    /// Unrolled class at the cell's `N` with the risk-optimal `ω`.
    UnrollingOptOmega,
}

impl FromStr for RiskSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "best-linear" => RiskSource::BestLinear,
            "bilevel" => RiskSource::Bilevel,
            "unrolling" => RiskSource::Unrolling,
            "unrolling-opt-omega" => RiskSource::UnrollingOptOmega,
            other => return Err(format!("unknown risk source {other:?}")),
        })
    }
}

impl fmt::Display for RiskSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskSource::BestLinear => "best-linear",
            RiskSource::Bilevel => "bilevel",
            RiskSource::Unrolling => "unrolling",
            RiskSource::UnrollingOptOmega => "unrolling-opt-omega",
        })
    }
}

/// Axes of a sweep. `theta` and `sigma` are standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub kind: Vec<DataKind>,
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub depth: Vec<usize>,
    pub omega: Vec<f64>,
    pub mu: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    pub numerator: RiskSource,
    pub denominator: RiskSource,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            quantity: Quantity::BestLinear,
            kind: vec![DataKind::RandomConstant],
            n: vec![1],
            k: vec![1],
            depth: vec![2],
            omega: vec![1.0],
            mu: vec![1.0],
            theta: vec![0.0],
            sigma: vec![1.0],
            numerator: RiskSource::BestLinear,
            denominator: RiskSource::Bilevel,
            mc_samples: 100_000,
            seed: 0,
        }
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub kind: DataKind,
    pub n: usize,
    pub k: usize,
    pub depth: usize,
    pub omega: f64,
    pub mu: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl Cell {
    pub fn params(&self) -> unroll_core::Result<ModelParams> {
        ModelParams::new(
            self.n,
            self.mu,
            self.theta * self.theta,
            self.sigma * self.sigma,
            self.kind,
        )
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SweepError {
    #[error("grid has {0} cells, more than the limit of {MAX_CELLS}")]
    TooManyCells(usize),
    #[error("axis {0} is empty")]
    EmptyAxis(&'static str),
    #[error("cell {cell}: {message}")]
    Cell { cell: usize, message: String },
}

impl SweepSpec {
    /// Number of grid cells, saturating on overflow.
    pub fn cell_count(&self) -> usize {
        [
            self.kind.len(),
            self.n.len(),
            self.k.len(),
            self.depth.len(),
            self.omega.len(),
            self.mu.len(),
            self.theta.len(),
            self.sigma.len(),
        ]
        .iter()
        .fold(1usize, |acc, &l| acc.saturating_mul(l))
    }

    fn check(&self) -> Result<(), SweepError> {
        let axes = [
            ("kind", self.kind.len()),
            ("n", self.n.len()),
            ("k", self.k.len()),
            ("depth", self.depth.len()),
            ("omega", self.omega.len()),
            ("mu", self.mu.len()),
            ("theta", self.theta.len()),
            ("sigma", self.sigma.len()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, l)| *l == 0) {
            return Err(SweepError::EmptyAxis(name));
        }
        let count = self.cell_count();
        if count > MAX_CELLS {
            return Err(SweepError::TooManyCells(count));
        }
        Ok(())
    }

    /// Grid points in lexicographic order of
    /// `(kind, n, k, depth, omega, mu, theta, sigma)`.
    pub fn cells(&self) -> Result<Vec<Cell>, SweepError> {
        self.check()?;
        let mut out = Vec::with_capacity(self.cell_count());
        for &kind in &self.kind {
            for &n in &self.n {
                for &k in &self.k {
                    for &depth in &self.depth {
                        for &omega in &self.omega {
                            for &mu in &self.mu {
                                for &theta in &self.theta {
                                    for &sigma in &self.sigma {
                                        out.push(Cell {
                                            kind,
                                            n,
                                            k,
                                            depth,
                                            omega,
                                            mu,
                                            theta,
                                            sigma,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Output columns: the grid axes followed by the computed fields.
    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = vec!["kind", "n", "k", "N", "omega", "mu", "theta", "sigma"];
        cols.extend_from_slice(match self.quantity {
            Quantity::BestLinear => &["risk"],
            Quantity::Bilevel => &["risk", "attained", "branch"],
            Quantity::Unrolling => &["risk", "branch"],
            Quantity::OptimalOmega => &["omega_lo", "omega_hi", "set", "risk", "method"],
            Quantity::RiskRatio => &["numerator", "denominator", "risk_num", "risk_den", "ratio"],
            Quantity::McCheck => &["risk", "mc_mean", "mc_std_error", "z"],
        });
        cols
    }
}

/// A value in an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Num(v) => fmt_f64(*v),
            Field::Int(v) => v.to_string(),
            Field::Bool(v) => v.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Num(v) => serde_json::Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Field::Int(v) => Value::from(*v),
            Field::Bool(v) => Value::Bool(*v),
            Field::Text(s) => Value::String(s.clone()),
        }
    }
}

fn class_risk(source: RiskSource, params: &ModelParams, cell: &Cell) -> unroll_core::Result<f64> {
    Ok(match source {
        RiskSource::BestLinear => best_linear_value(params)?.risk,
        RiskSource::Bilevel => bilevel_optimal_value(params, cell.k)?.risk,
        RiskSource::Unrolling => unrolling_optimal_value(params, cell.k, cell.depth, cell.omega)?.risk,
        RiskSource::UnrollingOptOmega => optimal_omega(params, cell.k, cell.depth)?.risk,
    })
}

fn evaluate(spec: &SweepSpec, index: usize, cell: &Cell) -> Result<Vec<Field>, SweepError> {
    let wrap = |e: unroll_core::Error| SweepError::Cell {
        cell: index,
        message: e.to_string(),
    };
    let params = cell.params().map_err(wrap)?;
    let mut row = vec![
        Field::Text(cell.kind.to_string()),
        Field::Int(cell.n as u64),
        Field::Int(cell.k as u64),
        Field::Int(cell.depth as u64),
        Field::Num(cell.omega),
        Field::Num(cell.mu),
        Field::Num(cell.theta),
        Field::Num(cell.sigma),
    ];
    match spec.quantity {
        Quantity::BestLinear => row.push(Field::Num(best_linear_value(&params).map_err(wrap)?.risk)),
        Quantity::Bilevel => {
            let rep = bilevel_optimal_value(&params, cell.k).map_err(wrap)?;
            row.extend([
                Field::Num(rep.risk),
                Field::Bool(rep.attained),
                Field::Text(rep.branch.to_string()),
            ]);
        }
        Quantity::Unrolling => {
            let rep = unrolling_optimal_value(&params, cell.k, cell.depth, cell.omega).map_err(wrap)?;
            row.extend([Field::Num(rep.risk), Field::Text(rep.branch.to_string())]);
        }
        Quantity::OptimalOmega => {
            let rep = optimal_omega(&params, cell.k, cell.depth).map_err(wrap)?;
            let (lo, hi, set) = match rep.omegas {
                OmegaSet::Pair { low, high } => (low, high, "pair"),
                OmegaSet::Interval { lo, hi } => (lo, hi, "interval"),
                OmegaSet::Point { omega } => (omega, omega, "point"),
            };
            let method = match rep.method {
                unroll_core::SolveMethod::ClosedForm => "closed-form",
                unroll_core::SolveMethod::Numeric => "numeric",
            };
            row.extend([
                Field::Num(lo),
                Field::Num(hi),
                Field::Text(set.into()),
                Field::Num(rep.risk),
                Field::Text(method.into()),
            ]);
        }
        Quantity::RiskRatio => {
            let num = class_risk(spec.numerator, &params, cell).map_err(wrap)?;
            let den = class_risk(spec.denominator, &params, cell).map_err(wrap)?;
            let ratio = unroll_core::risk_ratio(
                &unroll_core::RiskValue {
                    value: num,
                    kind: cell.kind,
                },
                &unroll_core::RiskValue {
                    value: den,
                    kind: cell.kind,
                },
            )
            .map_err(wrap)?;
            row.extend([
                Field::Text(spec.numerator.to_string()),
                Field::Text(spec.denominator.to_string()),
                Field::Num(num),
                Field::Num(den),
                Field::Num(ratio),
            ]);
        }
        Quantity::McCheck => {
            let rep = unrolling_optimal(&params, cell.k, cell.depth, cell.omega).map_err(wrap)?;
            let est = rep.estimator.expect("unrolled optimum is attained");
            let seed = unroll_core::model::derive_seed(spec.seed, index as u64);
            let mc = mc_risk_par(&est, &params, spec.mc_samples, seed).map_err(wrap)?;
            let z = if mc.std_error > 0.0 {
                (mc.mean - rep.risk) / mc.std_error
            } else {
                0.0
            };
            row.extend([
                Field::Num(rep.risk),
                Field::Num(mc.mean),
                Field::Num(mc.std_error),
                Field::Num(z),
            ]);
        }
    }
    Ok(row)
}

/// Evaluates every cell; rows are in grid order whatever the thread count.
pub fn run(spec: &SweepSpec) -> Result<Vec<Vec<Field>>, SweepError> {
    let cells = spec.cells()?;
    cells
        .par_iter()
        .enumerate()
        .map(|(i, c)| evaluate(spec, i, c))
        .collect()
}

pub fn to_csv(columns: &[&str], rows: &[Vec<Field>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(Field::csv).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(columns: &[&str], rows: &[Vec<Field>]) -> String {
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = columns
                .iter()
                .zip(row)
                .map(|(c, f)| (c.to_string(), f.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(array)).expect("serializable");
    s.push('\n');
    s
}
