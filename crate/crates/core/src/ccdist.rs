//! Carnot–Carathéodory distance bounds.
//!
//! Upper bounds come from explicit horizontal paths: either generator words
//! (products of one-parameter subgroups of the first layer) or piecewise
//! constant controls optimised by a quadratic-penalty method. The lower
//! bound is the length of the first-layer projection, which no horizontal
//! path can beat.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::fit::fit_order;
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::nilpotent::{CarnotGroup, NormVariant};
use crate::scalar::Scalar;
use crate::scale::ScaleGrid;

/// Piecewise constant first-layer controls on `K` segments of length `1/K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizontalPath {
    pub controls: Vec<Vec<f64>>,
}

impl HorizontalPath {
    pub fn new(controls: Vec<Vec<f64>>) -> Self {
        HorizontalPath { controls }
    }

    pub fn zero(segments: usize, rank: usize) -> Self {
        HorizontalPath { controls: vec![vec![0.0; rank]; segments] }
    }

    pub fn segments(&self) -> usize {
        self.controls.len()
    }

    pub fn step(&self) -> f64 {
        1.0 / self.segments() as f64
    }

    /// Halves every segment; the curve, its endpoint and its length are unchanged.
    pub fn split(&self) -> Self {
        HorizontalPath { controls: self.controls.iter().flat_map(|u| [u.clone(), u.clone()]).collect() }
    }

    /// Multiplies all controls by `factor`; the endpoint moves by `δ_factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        HorizontalPath { controls: self.controls.iter().map(|u| u.iter().map(|c| c * factor).collect()).collect() }
    }
}

/// `exp(h u)` for a first-layer control `u`, in exponential coordinates.
fn segment_element<S: Scalar>(g: &CarnotGroup, horizontal: &[usize], h: f64, u: &[f64]) -> Vec<S> {
    let mut out = g.identity::<S>();
    for (&idx, &c) in horizontal.iter().zip(u) {
        out[idx] = S::from_f64(h * c);
    }
    out
}

/// Endpoint of the path started at the identity.
pub fn endpoint<S: Scalar>(g: &CarnotGroup, path: &HorizontalPath) -> Vec<S> {
    let horizontal = g.horizontal_indices();
    let h = path.step();
    path.controls
        .iter()
        .fold(g.identity(), |acc, u| g.mul(&acc, &segment_element::<S>(g, &horizontal, h, u)))
}

/// `h Σ_j |u_j|` with the Euclidean norm on the first layer.
pub fn path_length(path: &HorizontalPath) -> f64 {
    path.step() * path.controls.iter().map(|u| u.iter().map(|c| c * c).sum::<f64>().sqrt()).sum::<f64>()
}

/// One factor `exp(t X_g)` of a generator word.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Letter {
    /// 0-based index among the first-layer generators.
    pub generator: usize,
    pub t: f64,
}

/// A product `Π exp(t_i X_{g(i)})` of first-layer one-parameter subgroups.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneratorWord {
    pub letters: Vec<Letter>,
    /// Number of first-layer generators, used for labels.
    pub rank: usize,
}

impl GeneratorWord {
    pub fn evaluate<S: Scalar>(&self, g: &CarnotGroup) -> Vec<S> {
        let horizontal = g.horizontal_indices();
        self.letters.iter().fold(g.identity(), |acc, l| {
            let mut factor = g.identity::<S>();
            factor[horizontal[l.generator]] = S::from_f64(l.t);
            g.mul(&acc, &factor)
        })
    }

    /// Length of the concatenated path, `Σ |t_i|`.
    pub fn length(&self) -> f64 {
        self.letters.iter().map(|l| l.t.abs()).sum()
    }

    pub fn max_param(&self) -> f64 {
        self.letters.iter().map(|l| l.t.abs()).fold(0.0, f64::max)
    }

    /// The word as a `segments`-piece path, giving each letter a number of
    /// segments roughly proportional to `|t_i|`. Needs at least one segment
    /// per letter.
    pub fn to_path(&self, segments: usize) -> Option<HorizontalPath> {
        let letters: Vec<&Letter> = self.letters.iter().filter(|l| l.t != 0.0).collect();
        if letters.is_empty() {
            return Some(HorizontalPath::zero(segments, self.rank));
        }
        if segments < letters.len() {
            return None;
        }
        let total: f64 = letters.iter().map(|l| l.t.abs()).sum();
        let spare = segments - letters.len();
        let mut counts: Vec<usize> = letters.iter().map(|l| 1 + (spare as f64 * l.t.abs() / total).floor() as usize).collect();
        // hand out what rounding left over, largest remainders first
        let mut order: Vec<usize> = (0..letters.len()).collect();
        let remainder = |i: usize| (spare as f64 * letters[i].t.abs() / total).fract();
        order.sort_by(|&a, &b| remainder(b).total_cmp(&remainder(a)).then(a.cmp(&b)));
        let mut left = segments - counts.iter().sum::<usize>();
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        let h = 1.0 / segments as f64;
        let mut controls = Vec::with_capacity(segments);
        for (l, &n) in letters.iter().zip(&counts) {
            let mut u = vec![0.0; self.rank];
            u[l.generator] = l.t / (n as f64 * h);
            controls.extend(std::iter::repeat(u).take(n));
        }
        Some(HorizontalPath::new(controls))
    }

    fn label(&self, generator: usize) -> String {
        match (self.rank, generator) {
            (2, 0) => "X".into(),
            (2, 1) => "Y".into(),
            (_, i) => format!("X{}", i + 1),
        }
    }
}

impl fmt::Display for GeneratorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| format!("{}:{}", self.label(l.generator), l.t)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Writes `x` as a product of first-layer exponentials.
///
/// For step `<= 2`: the first-layer part is reached by one letter per
/// generator, and the remaining central discrepancy is a combination
/// `Σ λ [X_a, X_b]` realised by commutator squares of side `sqrt|λ|`.
pub fn word_decomposition(g: &CarnotGroup, x: &[f64]) -> Result<GeneratorWord> {
    if x.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x.len() });
    }
    if g.step() > 2 {
        return Err(Error::UnsupportedStep { step: g.step() });
    }
    let horizontal = g.horizontal_indices();
    let rank = horizontal.len();
    let mut word = GeneratorWord { letters: Vec::new(), rank };
    for (gi, &idx) in horizontal.iter().enumerate() {
        if x[idx] != 0.0 {
            word.letters.push(Letter { generator: gi, t: x[idx] });
        }
    }
    let reached: Vec<f64> = word.evaluate(g);
    let vertical: Vec<usize> = (0..g.dim()).filter(|&i| g.weights()[i] == 2).collect();
    let residual: Vec<f64> = vertical.iter().map(|&k| x[k] - reached[k]).collect();
    if residual.iter().all(|&r| r == 0.0) {
        return Ok(word);
    }
    // pick pairs whose brackets form a basis of the second layer
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for a in 0..rank {
        for b in a + 1..rank {
            if pairs.len() == vertical.len() {
                break;
            }
            let mut ea = g.identity::<f64>();
            let mut eb = g.identity::<f64>();
            ea[horizontal[a]] = 1.0;
            eb[horizontal[b]] = 1.0;
            let br = g.bracket(&ea, &eb);
            let column: Vec<f64> = vertical.iter().map(|&k| br[k]).collect();
            let mut trial = basis.clone();
            trial.push(column);
            if numeric_rank(&trial) == trial.len() {
                basis = trial;
                pairs.push((a, b));
            }
        }
    }
    let n = vertical.len();
    if pairs.len() != n {
        return Err(Error::InvalidAlgebra { identity: "generation".into(), indices: vec![2] });
    }
    // basis vectors are the columns of the system
    let mut m = vec![0.0; n * n];
    for (col, v) in basis.iter().enumerate() {
        for (row, &c) in v.iter().enumerate() {
            m[row * n + col] = c;
        }
    }
    let lambda = solve(n, m, residual).ok_or_else(|| Error::NoConvergence("singular second layer".into()))?;
    for (&(a, b), &l) in pairs.iter().zip(&lambda) {
        if l == 0.0 {
            continue;
        }
        let s = l.abs().sqrt();
        let (p, q) = if l > 0.0 { (a, b) } else { (b, a) };
        for (gen, t) in [(p, s), (q, s), (p, -s), (q, -s)] {
            word.letters.push(Letter { generator: gen, t });
        }
    }
    Ok(word)
}

fn numeric_rank(vectors: &[Vec<f64>]) -> usize {
    let mut rows: Vec<Vec<f64>> = vectors.to_vec();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs())) else {
            break;
        };
        if rows[p][col].abs() < 1e-12 {
            continue;
        }
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            let f = rows[r][col] / rows[rank][col];
            for k in col..cols {
                rows[r][k] -= f * rows[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// How the word parameters of `δ_ε x₀` scale with `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TBoundReport {
    pub scales: Vec<f64>,
    pub max_params: Vec<f64>,
    /// `max |t_i| / |δ_ε x₀|` with the layer-quasi norm.
    pub ratios: Vec<f64>,
    pub exponent: f64,
    pub residual: f64,
}

pub fn t_bound_check(g: &CarnotGroup, x0: &[f64], grid: &ScaleGrid) -> Result<TBoundReport> {
    grid.validate()?;
    let scales = grid.values();
    let mut max_params = Vec::with_capacity(scales.len());
    let mut ratios = Vec::with_capacity(scales.len());
    for &eps in &scales {
        let x = g.dilation(x0, &eps);
        let word = word_decomposition(g, &x)?;
        let norm = g.homogeneous_norm(&x, NormVariant::LayerQuasi)?;
        max_params.push(word.max_param());
        ratios.push(if norm > 0.0 { word.max_param() / norm } else { 0.0 });
    }
    let samples: Vec<(f64, f64)> = scales.iter().copied().zip(max_params.iter().copied()).collect();
    let fit = fit_order(&samples)?;
    Ok(TBoundReport { scales, max_params, ratios, exponent: fit.order, residual: fit.residual })
}

/// Euclidean norm of the first-layer part of `x⁻¹ y`.
pub fn cc_lower(g: &CarnotGroup, x: &[f64], y: &[f64]) -> f64 {
    let t = g.mul(&g.inverse(x), y);
    g.horizontal_indices().iter().map(|&i| t[i] * t[i]).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcOptions {
    /// Final number of segments `K`.
    pub segments: usize,
    /// Penalty rounds per segment count.
    pub rounds: usize,
    pub inner_iterations: usize,
    pub initial_weight: f64,
    pub weight_factor: f64,
    /// Forward-difference step for the endpoint Jacobian.
    pub fd_step: f64,
    /// Largest endpoint residual a recorded path may have.
    pub tolerance: f64,
}

impl Default for CcOptions {
    fn default() -> Self {
        CcOptions {
            segments: 64,
            rounds: 5,
            inner_iterations: 60,
            initial_weight: 10.0,
            weight_factor: 10.0,
            fd_step: 1e-6,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcResult {
    pub lower: f64,
    pub upper: f64,
    pub segments: usize,
    /// Coordinate distance between the path endpoint and `x⁻¹ y`.
    pub residual: f64,
    pub path: HorizontalPath,
    pub word: Option<GeneratorWord>,
    /// Length of `word`, itself a valid upper bound.
    pub word_bound: Option<f64>,
    /// `false` when the optimiser never produced a feasible path and the
    /// bound comes from the word alone.
    pub optimized: bool,
}

struct Problem<'a> {
    g: &'a CarnotGroup,
    horizontal: Vec<usize>,
    target: Vec<f64>,
    fd: f64,
}

impl Problem<'_> {
    fn elements(&self, path: &HorizontalPath) -> Vec<Vec<f64>> {
        let h = path.step();
        path.controls.iter().map(|u| segment_element(self.g, &self.horizontal, h, u)).collect()
    }

    fn constraint(&self, path: &HorizontalPath) -> Vec<f64> {
        let end = endpoint::<f64>(self.g, path);
        end.iter().zip(&self.target).map(|(a, b)| a - b).collect()
    }

    fn energy(path: &HorizontalPath) -> f64 {
        path.step() * path.controls.iter().flatten().map(|c| c * c).sum::<f64>()
    }

    /// Endpoint Jacobian by forward differences, `dim x (K rank)` row-major,
    /// using prefix and suffix products so each column costs two products.
    fn jacobian(&self, path: &HorizontalPath) -> (Vec<f64>, Vec<f64>) {
        let g = self.g;
        let elems = self.elements(path);
        let k = elems.len();
        let mut prefix = vec![g.identity::<f64>()];
        for e in &elems {
            prefix.push(g.mul(prefix.last().expect("non-empty"), e));
        }
        let mut suffix = vec![g.identity::<f64>(); k + 1];
        for j in (0..k).rev() {
            suffix[j] = g.mul(&elems[j], &suffix[j + 1]);
        }
        let end = prefix[k].clone();
        let rank = self.horizontal.len();
        let cols = k * rank;
        let n = g.dim();
        let h = path.step();
        let mut jac = vec![0.0; n * cols];
        for j in 0..k {
            for (a, &idx) in self.horizontal.iter().enumerate() {
                let mut e = elems[j].clone();
                e[idx] += h * self.fd;
                let moved = g.mul(&g.mul(&prefix[j], &e), &suffix[j + 1]);
                for r in 0..n {
                    jac[r * cols + j * rank + a] = (moved[r] - end[r]) / self.fd;
                }
            }
        }
        let c = end.iter().zip(&self.target).map(|(a, b)| a - b).collect();
        (jac, c)
    }

    /// Gauss–Newton minimum-norm corrections onto the endpoint constraint.
    fn project(&self, path: &HorizontalPath) -> (HorizontalPath, f64) {
        let mut p = path.clone();
        let n = self.g.dim();
        let rank = self.horizontal.len();
        let mut best = (p.clone(), norm(&self.constraint(&p)));
        for _ in 0..40 {
            let (jac, c) = self.jacobian(&p);
            let r = norm(&c);
            if r < best.1 {
                best = (p.clone(), r);
            }
            if r <= 1e-15 {
                break;
            }
            let cols = p.segments() * rank;
            let mut jjt = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..n {
                    jjt[a * n + b] = (0..cols).map(|q| jac[a * cols + q] * jac[b * cols + q]).sum();
                }
                jjt[a * n + a] += 1e-15;
            }
            let Some(lambda) = solve(n, jjt, c) else { break };
            for (j, u) in p.controls.iter_mut().enumerate() {
                for (a, ua) in u.iter_mut().enumerate() {
                    let q = j * rank + a;
                    *ua -= (0..n).map(|r| jac[r * cols + q] * lambda[r]).sum::<f64>();
                }
            }
            if !p.controls.iter().flatten().all(|c| c.is_finite()) {
                break;
            }
        }
        let r = norm(&self.constraint(&p));
        if r < best.1 {
            best = (p, r);
        }
        best
    }

    /// Gradient descent with backtracking on `E + w |c|²`.
    fn descend(&self, path: &HorizontalPath, weight: f64, iterations: usize) -> HorizontalPath {
        let rank = self.horizontal.len();
        let objective = |p: &HorizontalPath| {
            let c = self.constraint(p);
            Self::energy(p) + weight * c.iter().map(|v| v * v).sum::<f64>()
        };
        let mut p = path.clone();
        let mut f = objective(&p);
        let mut step = 1e-2;
        for _ in 0..iterations {
            let (jac, c) = self.jacobian(&p);
            let cols = p.segments() * rank;
            let h = p.step();
            let grad: Vec<f64> = (0..cols)
                .map(|q| {
                    let u = p.controls[q / rank][q % rank];
                    2.0 * h * u + 2.0 * weight * (0..c.len()).map(|r| jac[r * cols + q] * c[r]).sum::<f64>()
                })
                .collect();
            let g2: f64 = grad.iter().map(|v| v * v).sum();
            if g2.sqrt() < 1e-12 {
                break;
            }
            step *= 2.0;
            let mut accepted = false;
            for _ in 0..50 {
                let mut trial = p.clone();
                for (q, gq) in grad.iter().enumerate() {
                    trial.controls[q / rank][q % rank] -= step * gq;
                }
                let ft = objective(&trial);
                if ft <= f - 1e-4 * step * g2 {
                    p = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        p
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Straight first-layer controls plus one loop, so that the endpoint map has
/// full rank even for purely vertical targets.
fn looped_line(target: &[f64], horizontal: &[usize], segments: usize) -> HorizontalPath {
    let rank = horizontal.len();
    let base: Vec<f64> = horizontal.iter().map(|&i| target[i]).collect();
    let controls = (0..segments)
        .map(|j| {
            let mut u = base.clone();
            if rank >= 2 {
                let angle = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / segments as f64;
                u[0] += angle.cos();
                u[1] += angle.sin();
            }
            u
        })
        .collect();
    HorizontalPath::new(controls)
}

/// Segment counts visited on the way to `k`: repeated doubling from the
/// smallest even divisor of `k` that is at most 8, so that every coarser
/// path splits exactly into the next level.
fn ladder(k: usize) -> Vec<usize> {
    let mut start = k;
    while start % 2 == 0 && start > 8 {
        start /= 2;
    }
    let mut levels = vec![start];
    while *levels.last().expect("non-empty") < k {
        let next = levels.last().expect("non-empty") * 2;
        levels.push(next);
    }
    levels
}

/// Upper bound on `d_CC(x, y)` from the shortest feasible path found.
///
/// The target `T = x⁻¹ y` is normalised to `δ_{1/|T|} T` with the layer-quasi
/// norm, so the optimisation problem, and hence the bound, is homogeneous
/// under dilations up to rounding.
pub fn cc_upper(g: &CarnotGroup, x: &[f64], y: &[f64], opts: &CcOptions) -> Result<CcResult> {
    for p in [x, y] {
        if p.len() != g.dim() {
            return Err(Error::DimensionMismatch { expected: g.dim(), found: p.len() });
        }
    }
    if opts.segments == 0 {
        return Err(Error::Parse("segment count must be positive".into()));
    }
    let horizontal = g.horizontal_indices();
    let rank = horizontal.len();
    let lower = cc_lower(g, x, y);
    let target = g.mul(&g.inverse(x), y);
    let word = word_decomposition(g, &target).ok();
    let word_bound = word.as_ref().map(GeneratorWord::length);
    let size = g.homogeneous_norm(&target, NormVariant::LayerQuasi)?;
    if size == 0.0 {
        return Ok(CcResult {
            lower,
            upper: 0.0,
            segments: opts.segments,
            residual: 0.0,
            path: HorizontalPath::zero(opts.segments, rank),
            word,
            word_bound,
            optimized: true,
        });
    }
    let unit = g.dilation(&target, &(1.0 / size));
    let problem = Problem { g, horizontal: horizontal.clone(), target: unit.clone(), fd: opts.fd_step };
    let unit_word = word_decomposition(g, &unit).ok();

    let mut best: Option<(HorizontalPath, f64)> = None;
    let consider = |p: &HorizontalPath, residual: f64, best: &mut Option<(HorizontalPath, f64)>| {
        if residual <= opts.tolerance {
            let len = path_length(p);
            if best.as_ref().map_or(true, |(_, b)| len < *b) {
                *best = Some((p.clone(), len));
            }
        }
    };

    let levels = ladder(opts.segments);
    let mut current: Option<HorizontalPath> = None;
    for &k in &levels {
        let start = match current.take() {
            Some(p) if p.segments() * 2 == k => p.split(),
            _ => {
                // first level: the better of the projected loop and the word
                let mut candidates = vec![problem.project(&looped_line(&unit, &horizontal, k))];
                if let Some(p) = unit_word.as_ref().and_then(|w| w.to_path(k)) {
                    let r = norm(&problem.constraint(&p));
                    candidates.push((p, r));
                }
                let mut chosen = candidates[0].0.clone();
                let mut chosen_len = f64::INFINITY;
                for (p, r) in &candidates {
                    consider(p, *r, &mut best);
                    if *r <= opts.tolerance && path_length(p) < chosen_len {
                        chosen_len = path_length(p);
                        chosen = p.clone();
                    }
                }
                chosen
            }
        };
        let mut p = start;
        let mut weight = opts.initial_weight;
        for _ in 0..opts.rounds {
            p = problem.descend(&p, weight, opts.inner_iterations);
            let (projected, r) = problem.project(&p);
            consider(&projected, r, &mut best);
            if r <= opts.tolerance {
                p = projected;
            }
            weight *= opts.weight_factor;
        }
        current = Some(match &best {
            Some((b, _)) if b.segments() == k => b.clone(),
            Some((b, _)) if k % b.segments() == 0 => {
                let mut q = b.clone();
                while q.segments() < k {
                    q = q.split();
                }
                q
            }
            _ => p,
        });
    }

    let (path, optimized) = match best {
        Some((mut p, _)) => {
            while p.segments() < opts.segments {
                p = p.split();
            }
            (p.scaled(size), true)
        }
        None => {
            let w = word.as_ref().ok_or_else(|| Error::NoConvergence("no feasible horizontal path found".into()))?;
            let p = w
                .to_path(opts.segments)
                .ok_or_else(|| Error::NoConvergence("word has more letters than segments".into()))?;
            (p, false)
        }
    };
    let end = endpoint::<f64>(g, &path);
    let residual = norm(&end.iter().zip(&target).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut upper = path_length(&path);
    if let Some(wb) = word_bound {
        if !optimized {
            upper = wb;
        }
    }
    Ok(CcResult { lower, upper, segments: path.segments(), residual, path, word, word_bound, optimized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilpotent::builtin;

    fn heis() -> CarnotGroup {
        builtin("heisenberg:1").unwrap()
    }

    #[test]
    fn single_segment_endpoint() {
        let p = HorizontalPath::new(vec![vec![1.0, 0.0]]);
        assert_eq!(endpoint::<f64>(&heis(), &p), vec![1.0, 0.0, 0.0]);
        assert_eq!(path_length(&p), 1.0);
    }

    #[test]
    fn zero_path() {
        let p = HorizontalPath::zero(5, 2);
        assert_eq!(endpoint::<f64>(&heis(), &p), vec![0.0; 3]);
        assert_eq!(path_length(&p), 0.0);
    }

    #[test]
    fn commutator_square_path() {
        let s = 0.5;
        // four segments of time 1/4, each travelling distance s
        let v = 4.0 * s;
        let p = HorizontalPath::new(vec![vec![v, 0.0], vec![0.0, v], vec![-v, 0.0], vec![0.0, -v]]);
        let end = endpoint::<f64>(&heis(), &p);
        assert!(norm(&[end[0], end[1], end[2] - s * s]) < 1e-15);
        assert!((path_length(&p) - 4.0 * s).abs() < 1e-15);
    }

    #[test]
    fn splitting_preserves_everything() {
        let p = HorizontalPath::new(vec![vec![0.3, -1.2], vec![2.0, 0.5], vec![-0.7, 0.1]]);
        let q = p.split();
        assert_eq!(q.segments(), 6);
        assert!((path_length(&p) - path_length(&q)).abs() < 1e-15);
        let (a, b) = (endpoint::<f64>(&heis(), &p), endpoint::<f64>(&heis(), &q));
        assert!(norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>()) < 1e-15);
    }

    #[test]
    fn central_word() {
        let w = word_decomposition(&heis(), &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(w.to_string(), "[X:1, Y:1, X:-1, Y:-1]");
        assert_eq!(w.evaluate::<f64>(&heis()), vec![0.0, 0.0, 1.0]);
        let neg = word_decomposition(&heis(), &[0.0, 0.0, -0.25]).unwrap();
        assert_eq!(neg.to_string(), "[Y:0.5, X:0.5, Y:-0.5, X:-0.5]");
    }

    #[test]
    fn horizontal_word_with_correction() {
        let (a, b) = (0.6, 0.8);
        let w = word_decomposition(&heis(), &[a, b, 0.0]).unwrap();
        assert_eq!(w.letters[..2], [Letter { generator: 0, t: a }, Letter { generator: 1, t: b }]);
        // X:a Y:b lands at c = ab/2, so the correction has area -ab/2
        assert_eq!(w.letters.len(), 6);
        assert!((w.letters[2].t.powi(2) - a * b / 2.0).abs() < 1e-15);
        let end = w.evaluate::<f64>(&heis());
        assert!(norm(&[end[0] - a, end[1] - b, end[2]]) < 1e-15);
    }

    #[test]
    fn identity_has_empty_word() {
        assert!(word_decomposition(&heis(), &[0.0; 3]).unwrap().letters.is_empty());
    }

    #[test]
    fn engel_is_unsupported() {
        let e = builtin("engel").unwrap();
        assert_eq!(word_decomposition(&e, &[0.0, 0.0, 0.0, 1.0]), Err(Error::UnsupportedStep { step: 3 }));
    }

    #[test]
    fn word_scaling_exponents() {
        let g = heis();
        let grid = ScaleGrid::dyadic(1, 10);
        for x0 in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 1.0, 1.0]] {
            let r = t_bound_check(&g, &x0, &grid).unwrap();
            assert!((r.exponent - 1.0).abs() < 1e-9, "{x0:?}: {}", r.exponent);
        }
    }

    #[test]
    fn word_to_path_keeps_endpoint() {
        let w = word_decomposition(&heis(), &[0.3, -0.4, 0.2]).unwrap();
        for k in [w.letters.len(), 16, 64] {
            let p = w.to_path(k).unwrap();
            assert_eq!(p.segments(), k);
            let end = endpoint::<f64>(&heis(), &p);
            assert!(norm(&[end[0] - 0.3, end[1] + 0.4, end[2] - 0.2]) < 1e-14);
            assert!((path_length(&p) - w.length()).abs() < 1e-14);
        }
        assert!(w.to_path(2).is_none());
    }

    #[test]
    fn ladders_double_up() {
        assert_eq!(ladder(64), vec![8, 16, 32, 64]);
        assert_eq!(ladder(48), vec![6, 12, 24, 48]);
        assert_eq!(ladder(5), vec![5]);
        assert_eq!(ladder(1), vec![1]);
    }

    #[test]
    fn horizontal_target_is_a_straight_line() {
        let r = cc_upper(&heis(), &[0.0; 3], &[1.0, 0.0, 0.0], &CcOptions::default()).unwrap();
        assert_eq!(r.lower, 1.0);
        assert!(r.upper <= 1.0 + 1e-6, "{}", r.upper);
        assert!(r.residual <= 1e-8);
    }

    #[test]
    fn central_target_beats_the_word() {
        let r = cc_upper(&heis(), &[0.0; 3], &[0.0, 0.0, 1.0], &CcOptions::default()).unwrap();
        assert_eq!(r.word_bound, Some(4.0));
        assert!(r.upper < 4.0);
        // no horizontal loop enclosing area 1 is shorter than the circle
        assert!(r.upper >= 2.0 * std::f64::consts::PI.sqrt() - 1e-6, "{}", r.upper);
        assert!(r.residual <= 1e-8);
    }
}
