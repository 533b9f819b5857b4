//! Communication graphs and their doubly-stochastic mixing matrices.
//!
//! The `np × np` operators `W ⊗ I_p` and `(1/n)11ᵀ ⊗ I_p` are never formed;
//! [`Topology::mix`] applies the `n × n` weights blockwise to a [`NodeBlock`]
//! and [`NodeBlock::mean_row`] plays the role of the averaging operator.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::block::NodeBlock;
use crate::error::{Error, Result};

/// Row/column sum tolerance for a matrix to count as doubly stochastic.
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ring,
    UndirectedExponential,
    DirectedExponential,
    Complete,
    Custom,
}

impl Family {
    pub const BUILTIN: [Family; 4] = [
        Family::Ring,
        Family::UndirectedExponential,
        Family::DirectedExponential,
        Family::Complete,
    ];

    /// The weight rule that reproduces the published λ values for n = 20
    /// (ring 0.98, undirected exponential 0.75, directed exponential 0.67,
    /// complete 0).
    pub fn default_rule(self) -> WeightRule {
        match self {
            Family::Ring | Family::UndirectedExponential => WeightRule::Lazy,
            _ => WeightRule::Equal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Ring => "ring",
            Family::UndirectedExponential => "exp_undirected",
            Family::DirectedExponential => "exp_directed",
            Family::Complete => "complete",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(Family::Ring),
            "exp_undirected" | "undirected_exponential" | "exponential" => {
                Ok(Family::UndirectedExponential)
            }
            "exp_directed" | "directed_exponential" => Ok(Family::DirectedExponential),
            "complete" => Ok(Family::Complete),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Topology(format!("unknown family `{other}`"))),
        }
    }
}

/// How a node splits its unit mass over its closed in-neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightRule {
    /// `1/(d_i + 1)` to itself and to each of its `d_i` in-neighbors.
    Equal,
    /// `1/2` to itself, `1/(2 d_i)` to each in-neighbor.
    Lazy,
}

/// A validated network: `weights[i][j] > 0` iff node `j` sends to node `i`
/// (or `j == i`). Immutable after construction.
#[derive(Debug, Clone)]
pub struct Topology {
    n: usize,
    family: Family,
    rule: Option<WeightRule>,
    weights: Vec<Vec<f64>>,
    in_neighbors: Vec<Vec<(usize, f64)>>,
    lambda: f64,
}

impl Topology {
    /// Builds a built-in family with its default weight rule.
    pub fn build(family: Family, n: usize) -> Result<Self> {
        Self::build_with_rule(family, n, family.default_rule())
    }

    pub fn build_with_rule(family: Family, n: usize, rule: WeightRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::Topology("node count must be at least 1".into()));
        }
        let neighbors: Vec<Vec<usize>> = match family {
            Family::Ring => {
                if n < 3 {
                    return Err(Error::Topology(format!("ring needs n >= 3, got {n}")));
                }
                (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect()
            }
            Family::DirectedExponential => (0..n)
                .map(|i| exponential_offsets(n).map(|o| (i + n - o) % n).collect())
                .collect(),
            Family::UndirectedExponential => (0..n)
                .map(|i| {
                    let mut set: Vec<usize> = exponential_offsets(n)
                        .flat_map(|o| [(i + o) % n, (i + n - o) % n])
                        .collect();
                    set.sort_unstable();
                    set.dedup();
                    set
                })
                .collect(),
            Family::Complete => (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect(),
            Family::Custom => {
                return Err(Error::Topology(
                    "custom topologies are loaded from a weight matrix file".into(),
                ))
            }
        };

        let mut weights = vec![vec![0.0; n]; n];
        for (i, nbrs) in neighbors.iter().enumerate() {
            let (own, other) = match (rule, nbrs.len()) {
                (_, 0) => (1.0, 0.0),
                (WeightRule::Equal, d) => {
                    let w = 1.0 / (d as f64 + 1.0);
                    (w, w)
                }
                (WeightRule::Lazy, d) => (0.5, 0.5 / d as f64),
            };
            weights[i][i] = own;
            for &j in nbrs {
                weights[i][j] = other;
            }
        }

        let report = validate_assumption3(&weights);
        if !report.passed() {
            return Err(Error::Topology(format!(
                "{family} with n = {n} is not a valid mixing matrix:\n{report}"
            )));
        }
        Ok(Self::from_parts(family, Some(rule), weights, report.lambda))
    }

    /// Accepts an arbitrary matrix only if it passes [`validate_assumption3`].
    pub fn custom(weights: Vec<Vec<f64>>) -> Result<Self> {
        let report = validate_assumption3(&weights);
        if !report.passed() {
            return Err(Error::WeightMatrix(report.to_string()));
        }
        Ok(Self::from_parts(Family::Custom, None, weights, report.lambda))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::custom(read_weight_matrix(path)?)
    }

    fn from_parts(
        family: Family,
        rule: Option<WeightRule>,
        weights: Vec<Vec<f64>>,
        lambda: f64,
    ) -> Self {
        let in_neighbors = weights
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(j, &w)| (j, w))
                    .collect()
            })
            .collect();
        Self {
            n: weights.len(),
            family,
            rule,
            weights,
            in_neighbors,
            lambda,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `None` for custom matrices.
    pub fn rule(&self) -> Option<WeightRule> {
        self.rule
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i][j]
    }

    /// Second largest singular value of the weight matrix.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Nonzero entries of row `i` as `(j, w_ij)`, in increasing `j`.
    pub fn in_neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.in_neighbors[i]
    }

    /// One synchronous communication round: row `i` of the result is
    /// `Σ_j w_ij z_j`.
    pub fn mix(&self, z: &NodeBlock) -> NodeBlock {
        assert_eq!(z.rows(), self.n, "block has wrong number of nodes");
        let mut out = NodeBlock::zeros(self.n, z.cols());
        for i in 0..self.n {
            let dst = out.row_mut(i);
            for &(j, w) in &self.in_neighbors[i] {
                for (d, s) in dst.iter_mut().zip(z.row(j)) {
                    *d += w * s;
                }
            }
        }
        out
    }
}

/// `1, 2, 4, ..., 2^⌊log2(n-1)⌋`; empty for n ≤ 1.
fn exponential_offsets(n: usize) -> impl Iterator<Item = usize> {
    let mut next = if n >= 2 { 1 } else { n };
    std::iter::from_fn(move || {
        if next == 0 || next > n - 1 {
            return None;
        }
        let cur = next;
        next *= 2;
        Some(cur)
    })
}

/// Largest singular value of `W − (1/n)11ᵀ`. For a doubly-stochastic `W`
/// this is the second largest singular value of `W` itself.
pub fn spectral_gap(weights: &[Vec<f64>]) -> f64 {
    let n = weights.len();
    if n == 0 {
        return 0.0;
    }
    let inv = 1.0 / n as f64;
    let centered = DMatrix::from_fn(n, n, |i, j| weights[i][j] - inv);
    centered.singular_values().max()
}

/// Findings of the network-assumption check on a candidate weight matrix.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub n: usize,
    pub square: bool,
    /// `|1 − Σ_j w_ij|` per row.
    pub row_sum_deviation: Vec<f64>,
    /// `|1 − Σ_i w_ij|` per column.
    pub col_sum_deviation: Vec<f64>,
    /// `(i, j, w_ij)` for every negative (or non-finite) entry.
    pub negative_entries: Vec<(usize, usize, f64)>,
    pub lambda: f64,
    pub primitive: bool,
}

impl ValidationReport {
    pub fn max_row_deviation(&self) -> f64 {
        self.row_sum_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_col_deviation(&self) -> f64 {
        self.col_sum_deviation.iter().copied().fold(0.0, f64::max)
    }

    pub fn row_stochastic(&self) -> bool {
        self.max_row_deviation() <= STOCHASTIC_TOL
    }

    pub fn col_stochastic(&self) -> bool {
        self.max_col_deviation() <= STOCHASTIC_TOL
    }

    pub fn passed(&self) -> bool {
        self.square
            && self.n > 0
            && self.row_stochastic()
            && self.col_stochastic()
            && self.negative_entries.is_empty()
            && self.primitive
            && self.lambda < 1.0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
        if !self.square {
            return writeln!(f, "square: FAIL");
        }
        writeln!(
            f,
            "row sums:    {} (max deviation {:e})",
            verdict(self.row_stochastic()),
            self.max_row_deviation()
        )?;
        writeln!(
            f,
            "column sums: {} (max deviation {:e})",
            verdict(self.col_stochastic()),
            self.max_col_deviation()
        )?;
        writeln!(
            f,
            "nonnegative: {} ({} violations)",
            verdict(self.negative_entries.is_empty()),
            self.negative_entries.len()
        )?;
        for (i, j, w) in self.negative_entries.iter().take(8) {
            writeln!(f, "  w[{i}][{j}] = {w}")?;
        }
        writeln!(f, "primitive:   {}", verdict(self.primitive))?;
        writeln!(f, "lambda:      {:.6}", self.lambda)?;
        write!(f, "overall:     {}", verdict(self.passed()))
    }
}

/// Checks double stochasticity, nonnegativity and primitivity, and computes λ.
pub fn validate_assumption3(weights: &[Vec<f64>]) -> ValidationReport {
    let n = weights.len();
    let square = weights.iter().all(|r| r.len() == n);
    if !square {
        return ValidationReport {
            n,
            square,
            row_sum_deviation: Vec::new(),
            col_sum_deviation: Vec::new(),
            negative_entries: Vec::new(),
            lambda: f64::NAN,
            primitive: false,
        };
    }
    let row_sum_deviation = weights
        .iter()
        .map(|r| (1.0 - r.iter().sum::<f64>()).abs())
        .collect();
    let col_sum_deviation = (0..n)
        .map(|j| (1.0 - weights.iter().map(|r| r[j]).sum::<f64>()).abs())
        .collect();
    let mut negative_entries = Vec::new();
    for (i, row) in weights.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                negative_entries.push((i, j, w));
            }
        }
    }
    ValidationReport {
        n,
        square,
        row_sum_deviation,
        col_sum_deviation,
        negative_entries,
        lambda: spectral_gap(weights),
        primitive: is_primitive(weights),
    }
}

/// Some power `A^k` of the support pattern is entrywise positive. Uses
/// repeated boolean squaring up to the Wielandt bound `(n−1)² + 1`; once a
/// power is positive every higher power is too.
fn is_primitive(weights: &[Vec<f64>]) -> bool {
    let n = weights.len();
    if n == 0 {
        return false;
    }
    let mut power: Vec<Vec<bool>> = weights
        .iter()
        .map(|r| r.iter().map(|&w| w > 0.0).collect())
        .collect();
    let bound = (n - 1) * (n - 1) + 1;
    let mut exponent = 1;
    while exponent < bound {
        power = bool_square(&power);
        exponent *= 2;
    }
    power.iter().all(|r| r.iter().all(|&b| b))
}

fn bool_square(a: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    out[i][j] |= a[k][j];
                }
            }
        }
    }
    out
}

/// Reads the plain-text format: first line `n`, then `n` rows of `n`
/// whitespace-separated decimals.
pub fn read_weight_matrix(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_weight_matrix(&text).map_err(|(line, message)| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

fn parse_weight_matrix(text: &str) -> std::result::Result<Vec<Vec<f64>>, (usize, String)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first_no, first) = lines.next().ok_or((1, "empty file".to_string()))?;
    let n: usize = first
        .parse()
        .map_err(|_| (first_no, format!("expected node count, found `{first}`")))?;
    let mut rows = Vec::with_capacity(n);
    for (line_no, line) in lines {
        if rows.len() == n {
            return Err((line_no, format!("more than {n} matrix rows")));
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| (line_no, format!("bad number `{tok}`")))
            })
            .collect::<std::result::Result<Vec<f64>, _>>()?;
        if row.len() != n {
            return Err((line_no, format!("expected {n} entries, found {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err((text.lines().count(), format!("expected {n} rows, found {}", rows.len())));
    }
    Ok(rows)
}

/// Serializes in the format accepted by [`read_weight_matrix`].
pub fn format_weight_matrix(weights: &[Vec<f64>]) -> String {
    let mut out = format!("{}\n", weights.len());
    for row in weights {
        let cells: Vec<String> = row.iter().map(|w| w.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
