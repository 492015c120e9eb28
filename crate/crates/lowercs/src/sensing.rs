//! Random sampling, normalized sensing systems and reference expansions.
//!
//! Samples are drawn i.i.d. from the orthogonalization measure of the
//! basis; the normalized sampling matrix is A = (Ψ_{ν_j}(y_i)/√m) and the
//! observation vector is g̃ = (g(y_i)/√m). Reference coefficients
//! c_ν ≈ ∫ g Ψ_ν dρ come from [`crate::quadrature`] and provide both the
//! L² tail ‖g_{J^c}‖₂ = √(‖g‖₂² − Σ_J c_ν²) and a weighted-ℓ1 tail
//! surrogate used to budget the residual constraint η.

use nalgebra::{DMatrix, DVector};
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::multiindex::{admissible_extensions, IndexSet, MultiIndex};
use crate::orthopoly::{eval_all_1d, weight, BasisKind};
use crate::quadrature::{build_nodes, unit_f64, QuadratureSpec};

/// Scalar coefficients keyed by an index set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    index_set: IndexSet,
    values: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(index_set: IndexSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != index_set.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for a set of {} indices",
                values.len(),
                index_set.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("coefficients must be finite".into()));
        }
        Ok(Self { index_set, values })
    }

    pub fn zeros(index_set: IndexSet) -> Self {
        let values = vec![0.0; index_set.len()];
        Self { index_set, values }
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn value_at(&self, nu: &MultiIndex) -> Option<f64> {
        self.index_set.position(nu).map(|j| self.values[j])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Σ ω_ν |c_ν| for the sup-norm weights of `kind`.
    pub fn weighted_l1_norm(&self, kind: BasisKind) -> f64 {
        self.index_set
            .iter()
            .zip(&self.values)
            .map(|(nu, v)| weight(kind, nu) * v.abs())
            .sum()
    }

    /// Support of the nonzero entries, as an index set.
    pub fn support(&self) -> Result<IndexSet> {
        let members = self
            .index_set
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| v != 0.0)
            .map(|(nu, _)| nu.clone())
            .collect();
        IndexSet::new(self.index_set.dim(), members)
    }

    /// Keeps the entries on `support`, zeroing everything else.
    pub fn restricted_to(&self, support: &IndexSet) -> Self {
        let values = self
            .index_set
            .iter()
            .zip(&self.values)
            .map(|(nu, &v)| if support.contains(nu) { v } else { 0.0 })
            .collect();
        Self {
            index_set: self.index_set.clone(),
            values,
        }
    }

    /// Evaluates Σ c_ν Ψ_ν(y).
    pub fn evaluate(&self, kind: BasisKind, y: &[f64]) -> Result<f64> {
        if y.len() != self.index_set.dim() {
            return Err(Error::Shape("point dimension mismatch".into()));
        }
        let max_deg = self.index_set.max_degree();
        let mut table: Vec<Vec<f64>> = Vec::with_capacity(y.len());
        for &yk in y {
            if !(-1.0..=1.0).contains(&yk) {
                return Err(Error::Domain(format!(
                    "point coordinate {yk} outside [-1,1]"
                )));
            }
            let mut col = Vec::new();
            eval_all_1d(kind, max_deg, yk, &mut col);
            table.push(col);
        }
        let mut acc = 0.0;
        for (nu, &c) in self.index_set.iter().zip(&self.values) {
            if c == 0.0 {
                continue;
            }
            let mut prod = c;
            for (k, col) in table.iter().enumerate() {
                prod *= col[nu.degree(k) as usize];
            }
            acc += prod;
        }
        Ok(acc)
    }
}

/// m sample points in [-1,1]^d with the seed that regenerates them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    kind: BasisKind,
    points: Vec<Vec<f64>>,
    seed: u64,
}

impl SampleSet {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// FNV-1a hash of the raw coordinate bytes; used to assert that weight
    /// modes share one sample set inside an experiment cell.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for p in &self.points {
            for &c in p {
                for b in c.to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }

    /// CSV dump: header `y1,...,yd`, one row per sample. Values round-trip
    /// bit-exactly through Rust's shortest-representation float printing.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        let header: Vec<String> = (1..=d).map(|k| format!("y{k}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(kind: BasisKind, seed: u64, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Usage("empty sample csv".into()))?;
        let d = header.split(',').count();
        let mut points = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let coords: Vec<f64> = line
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Usage(format!("bad coordinate '{tok}'")))
                })
                .collect::<Result<_>>()?;
            if coords.len() != d {
                return Err(Error::Shape("ragged sample csv".into()));
            }
            points.push(coords);
        }
        Ok(Self { kind, points, seed })
    }
}

/// Draws m i.i.d. points from the orthogonalization measure of `kind`:
/// uniform on [-1,1] per coordinate for Legendre, cos(π·U) for Chebyshev.
/// Identical arguments reproduce the points bit-exactly.
pub fn draw_samples(kind: BasisKind, d: usize, m: usize, seed: u64) -> Result<SampleSet> {
    if d == 0 || m == 0 {
        return Err(Error::Domain("draw_samples needs d >= 1 and m >= 1".into()));
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(m);
    for _ in 0..m {
        let mut p = Vec::with_capacity(d);
        for _ in 0..d {
            let u = unit_f64(&mut rng);
            p.push(match kind {
                BasisKind::Legendre => 2.0 * u - 1.0,
                BasisKind::Chebyshev => (std::f64::consts::PI * u).cos(),
            });
        }
        points.push(p);
    }
    Ok(SampleSet { kind, points, seed })
}

/// The normalized sampling matrix, observations and tail budget of one
/// recovery problem.
#[derive(Debug, Clone)]
pub struct SensingSystem {
    matrix: DMatrix<f64>,
    observations: DVector<f64>,
    eta: f64,
    index_set: IndexSet,
    kind: BasisKind,
    sample_seed: u64,
}

impl SensingSystem {
    /// Assembles a system from raw parts; the matrix must be m×N with N
    /// matching the index set, and η ≥ 0.
    pub fn from_parts(
        matrix: DMatrix<f64>,
        observations: DVector<f64>,
        eta: f64,
        index_set: IndexSet,
        kind: BasisKind,
        sample_seed: u64,
    ) -> Result<Self> {
        if matrix.ncols() != index_set.len() {
            return Err(Error::Shape(format!(
                "matrix has {} columns for {} indices",
                matrix.ncols(),
                index_set.len()
            )));
        }
        if matrix.nrows() != observations.len() {
            return Err(Error::Shape(format!(
                "matrix has {} rows for {} observations",
                matrix.nrows(),
                observations.len()
            )));
        }
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::Domain(format!("eta must be nonnegative, got {eta}")));
        }
        Ok(Self {
            matrix,
            observations,
            eta,
            index_set,
            kind,
            sample_seed,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.observations
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Residual bound η/√m of the basis-pursuit constraint.
    pub fn sigma(&self) -> f64 {
        self.eta / (self.rows() as f64).sqrt()
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn sample_seed(&self) -> u64 {
        self.sample_seed
    }

    /// Replaces the tail budget η (must be ≥ 0).
    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::Domain(format!("eta must be nonnegative, got {eta}")));
        }
        self.eta = eta;
        Ok(self)
    }

    /// Residual ‖g̃ − Az‖₂ of a candidate coefficient vector.
    pub fn residual_norm(&self, z: &CoefficientVector) -> f64 {
        let zv = DVector::from_column_slice(z.values());
        (&self.observations - &self.matrix * zv).norm()
    }

    /// CSV dump of the matrix and observations plus a `.meta` sidecar with
    /// kind, seed, m, N and η.
    pub fn export_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut body = String::new();
        for i in 0..self.rows() {
            let mut row: Vec<String> = (0..self.cols())
                .map(|j| format!("{}", self.matrix[(i, j)]))
                .collect();
            row.push(format!("{}", self.observations[i]));
            body.push_str(&row.join(","));
            body.push('\n');
        }
        std::fs::write(path, body)
            .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))?;
        let meta = format!(
            "kind={}\nseed={}\nm={}\nN={}\neta={}\n",
            self.kind.label(),
            self.sample_seed,
            self.rows(),
            self.cols(),
            self.eta
        );
        let meta_path = path.with_extension("meta");
        std::fs::write(&meta_path, meta)
            .map_err(|e| Error::Data(format!("cannot write {}: {e}", meta_path.display())))?;
        Ok(())
    }
}

/// Assembles A[i][j] = Ψ_{ν_j}(y_i)/√m and g̃[i] = g(y_i)/√m.
pub fn build_system<F>(
    kind: BasisKind,
    index_set: &IndexSet,
    samples: &SampleSet,
    g: F,
    eta: f64,
) -> Result<SensingSystem>
where
    F: Fn(&[f64]) -> f64,
{
    if index_set.is_empty() {
        return Err(Error::Precondition("index set must be nonempty".into()));
    }
    if samples.dim() != index_set.dim() {
        return Err(Error::Shape(format!(
            "samples have dimension {}, index set {}",
            samples.dim(),
            index_set.dim()
        )));
    }
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::Domain(format!("eta must be nonnegative, got {eta}")));
    }
    let m = samples.len();
    let n = index_set.len();
    let d = index_set.dim();
    let scale = 1.0 / (m as f64).sqrt();
    let max_deg = index_set.max_degree();

    let mut matrix = DMatrix::zeros(m, n);
    let mut observations = DVector::zeros(m);
    let mut table: Vec<Vec<f64>> = vec![Vec::new(); d];
    for i in 0..m {
        let y = samples.point(i);
        let gy = g(y);
        if !gy.is_finite() {
            return Err(Error::Data(format!(
                "function value at sample {i} is not finite"
            )));
        }
        observations[i] = gy * scale;
        for (k, col) in table.iter_mut().enumerate() {
            eval_all_1d(kind, max_deg, y[k], col);
        }
        for (j, nu) in index_set.iter().enumerate() {
            let mut prod = scale;
            for (k, col) in table.iter().enumerate() {
                prod *= col[nu.degree(k) as usize];
            }
            matrix[(i, j)] = prod;
        }
    }
    Ok(SensingSystem {
        matrix,
        observations,
        eta,
        index_set: index_set.clone(),
        kind,
        sample_seed: samples.seed(),
    })
}

/// Builds the synthetic observation g̃ = A c + tail-free noise for a known
/// coefficient vector; convenient for recovery experiments.
pub fn build_system_from_coefficients(
    kind: BasisKind,
    samples: &SampleSet,
    truth: &CoefficientVector,
    eta: f64,
) -> Result<SensingSystem> {
    let set = truth.index_set().clone();
    build_system(
        kind,
        &set,
        samples,
        |y| truth.evaluate(kind, y).unwrap_or(f64::NAN),
        eta,
    )
}

/// A quadrature-based reference expansion of a black-box function.
#[derive(Debug, Clone)]
pub struct ReferenceExpansion {
    /// c_ν ≈ ∫ g Ψ_ν dρ on the requested index set.
    pub coefficients: CoefficientVector,
    /// ‖g‖₂ estimate.
    pub l2_norm: f64,
    /// ‖g_{J^c}‖₂ = √(max(0, ‖g‖₂² − Σ_J c_ν²)).
    pub tail_l2: f64,
    /// Σ ω_ν|c_ν| over the integrated enlargement rings beyond J — the
    /// computable surrogate of ‖g_{J^c}‖_{ω,1}.
    pub tail_weighted_l1: f64,
    /// Standard error of ‖g‖₂² across QMC replicates, when stochastic.
    pub std_error: Option<f64>,
}

impl ReferenceExpansion {
    /// Deterministic default for the residual budget: η = √m × (weighted-ℓ1
    /// tail surrogate).
    pub fn eta_surrogate(&self, m: usize) -> f64 {
        (m as f64).sqrt() * self.tail_weighted_l1
    }

    /// Exact-tail budget η ∈ [E_g, (1+ε)E_g]·√m with
    /// E_g = max{√2‖g_{J^c}‖₂, √2‖g_{J^c}‖_{ω,1}/√K(s)}; this implementation
    /// returns the midpoint of the admissible interval.
    pub fn eta_exact_tail(&self, m: usize, k_of_s: f64, epsilon: f64) -> f64 {
        let e_g = (std::f64::consts::SQRT_2 * self.tail_l2)
            .max(std::f64::consts::SQRT_2 * self.tail_weighted_l1 / k_of_s.sqrt());
        (m as f64).sqrt() * e_g * (1.0 + 0.5 * epsilon)
    }
}

/// Computes reference coefficients of `g` on `index_set` together with the
/// L² tail and the weighted-ℓ1 tail surrogate.
///
/// The quadrature also integrates `spec.tail_rings` rings of admissible
/// extensions beyond the set; those coefficients feed the surrogate.
pub fn reference_coefficients<F>(
    kind: BasisKind,
    g: F,
    index_set: &IndexSet,
    spec: &QuadratureSpec,
) -> Result<ReferenceExpansion>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if index_set.is_empty() {
        return Err(Error::Precondition("index set must be nonempty".into()));
    }
    let d = index_set.dim();

    // enlarge by admissible-extension rings for the weighted-l1 surrogate
    let mut enlarged = index_set.clone();
    for _ in 0..spec.tail_rings {
        let ring = admissible_extensions(&enlarged)?;
        enlarged = enlarged.union(&ring)?;
    }

    let nodes = build_nodes(kind, &enlarged, &spec.rule)?;
    let n_plus = enlarged.len();
    let max_deg = enlarged.max_degree();

    // first pass: coefficients on the enlarged set and ‖g‖²
    let mut coeffs = vec![0.0; n_plus];
    let mut norm_sq = 0.0;
    let mut g_values = Vec::with_capacity(nodes.nodes.len());
    let mut replicate_norms = vec![0.0; nodes.replicates];
    let per_replicate = nodes.nodes.len() / nodes.replicates.max(1);

    let mut table: Vec<Vec<f64>> = vec![Vec::new(); d];
    for (idx, (w, y)) in nodes.nodes.iter().enumerate() {
        let gy = g(y);
        if !gy.is_finite() {
            return Err(Error::Data(format!(
                "function value at quadrature node {idx} is not finite"
            )));
        }
        g_values.push(gy);
        for (k, col) in table.iter_mut().enumerate() {
            eval_all_1d(kind, max_deg, y[k], col);
        }
        let wg = w * gy;
        for (j, nu) in enlarged.iter().enumerate() {
            let mut prod = wg;
            for (k, col) in table.iter().enumerate() {
                prod *= col[nu.degree(k) as usize];
            }
            coeffs[j] += prod;
        }
        norm_sq += w * gy * gy;
        if nodes.replicates > 1 {
            replicate_norms[idx / per_replicate.max(1)] += w * gy * gy * nodes.replicates as f64;
        }
    }

    let std_error = if nodes.replicates > 1 {
        let r = nodes.replicates as f64;
        let mean = replicate_norms.iter().sum::<f64>() / r;
        let var = replicate_norms
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (r - 1.0);
        Some((var / r).sqrt())
    } else {
        None
    };

    // restrict to the requested set; rings feed the surrogate
    let mut values = Vec::with_capacity(index_set.len());
    let mut tail_w1 = 0.0;
    for (j, nu) in enlarged.iter().enumerate() {
        if index_set.contains(nu) {
            values.push((index_set.position(nu).unwrap(), coeffs[j]));
        } else {
            tail_w1 += weight(kind, nu) * coeffs[j].abs();
        }
    }
    values.sort_by_key(|(p, _)| *p);
    let values: Vec<f64> = values.into_iter().map(|(_, v)| v).collect();
    let coefficients = CoefficientVector::new(index_set.clone(), values)?;

    // second pass: the tail as ∫(g − g_J)² dρ. Integrating the nonnegative
    // residual directly keeps the quadrature error relative to the tail
    // itself; the difference ‖g‖² − Σc² would lose it to cancellation.
    let inside: Vec<(usize, f64)> = enlarged
        .iter()
        .enumerate()
        .filter_map(|(j, nu)| index_set.contains(nu).then_some((j, coeffs[j])))
        .collect();
    let mut tail_sq = 0.0;
    for ((w, y), &gy) in nodes.nodes.iter().zip(&g_values) {
        for (k, col) in table.iter_mut().enumerate() {
            eval_all_1d(kind, max_deg, y[k], col);
        }
        let mut g_j = 0.0;
        for &(j, c) in &inside {
            let nu = enlarged.member(j);
            let mut prod = c;
            for (k, col) in table.iter().enumerate() {
                prod *= col[nu.degree(k) as usize];
            }
            g_j += prod;
        }
        let diff = gy - g_j;
        tail_sq += w * diff * diff;
    }
    let neg_tol = 1e-8 * norm_sq.max(1.0);
    if tail_sq < -neg_tol {
        return Err(Error::Accuracy(format!(
            "quadrature level too low: tail estimate {tail_sq:.3e} is negative beyond tolerance"
        )));
    }

    Ok(ReferenceExpansion {
        coefficients,
        l2_norm: norm_sq.max(0.0).sqrt(),
        tail_l2: tail_sq.max(0.0).sqrt(),
        tail_weighted_l1: tail_w1,
        std_error,
    })
}
