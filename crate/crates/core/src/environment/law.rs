use std::collections::HashSet;
use std::sync::Arc;

use num_complex::Complex64;

use super::EnvError;

/// Largest horizontal dimension the crate handles.
pub const MAX_DIM: usize = 3;

/// A horizontal lattice site; coordinates past the law's dimension are zero.
pub type Site = [i64; MAX_DIM];

pub(crate) const PROB_TOL: f64 = 1e-12;

/// Finitely supported probability law on Z^d with cached moments.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalLaw {
    dim: usize,
    points: Vec<Site>,
    masses: Vec<f64>,
    mean: [f64; MAX_DIM],
    second_moment: [[f64; MAX_DIM]; MAX_DIM],
    tail_moment: f64,
}

impl HorizontalLaw {
    /// Builds a law from `(point, mass)` pairs. Masses summing to 1 within
    /// 1e-12 are renormalized; anything further off is rejected.
    pub fn new(dim: usize, support: &[(Vec<i64>, f64)]) -> Result<Self, EnvError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(EnvError::Dimension(dim));
        }
        if support.is_empty() {
            return Err(EnvError::EmptySupport);
        }
        let mut seen = HashSet::new();
        let mut points = Vec::with_capacity(support.len());
        let mut masses = Vec::with_capacity(support.len());
        for (point, mass) in support {
            if point.len() != dim {
                return Err(EnvError::PointDimension {
                    expected: dim,
                    found: point.len(),
                });
            }
            if !mass.is_finite() || *mass < 0.0 {
                return Err(EnvError::Mass(*mass));
            }
            let mut site = [0i64; MAX_DIM];
            site[..dim].copy_from_slice(point);
            if !seen.insert(site) {
                return Err(EnvError::DuplicatePoint(point.clone()));
            }
            points.push(site);
            masses.push(*mass);
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(EnvError::MassSum(total));
        }
        masses.iter_mut().for_each(|m| *m /= total);
        Ok(Self::from_parts(dim, points, masses))
    }

    fn from_parts(dim: usize, points: Vec<Site>, masses: Vec<f64>) -> Self {
        let mut mean = [0.0; MAX_DIM];
        let mut second_moment = [[0.0; MAX_DIM]; MAX_DIM];
        let mut tail_moment = 0.0;
        let power = dim.max(3) as i32;
        for (site, &mass) in points.iter().zip(&masses) {
            let mut norm2 = 0.0;
            for i in 0..dim {
                let ki = site[i] as f64;
                mean[i] += mass * ki;
                norm2 += ki * ki;
                for j in 0..dim {
                    second_moment[i][j] += mass * ki * site[j] as f64;
                }
            }
            tail_moment += mass * norm2.sqrt().powi(power);
        }
        Self {
            dim,
            points,
            masses,
            mean,
            second_moment,
            tail_moment,
        }
    }

    /// Dirac mass at `point`.
    pub fn point_mass(point: &[i64]) -> Result<Self, EnvError> {
        Self::new(point.len(), &[(point.to_vec(), 1.0)])
    }

    /// Uniform law on the 2d unit vectors ±e_i.
    pub fn unit_cross(dim: usize) -> Result<Self, EnvError> {
        let mut support = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for sign in [1, -1] {
                let mut k = vec![0; dim];
                k[i] = sign;
                support.push((k, 1.0 / (2 * dim) as f64));
            }
        }
        Self::new(dim, &support)
    }

    /// The law translated by `shift`.
    pub fn shifted(&self, shift: &[i64]) -> Result<Self, EnvError> {
        if shift.len() != self.dim {
            return Err(EnvError::PointDimension {
                expected: self.dim,
                found: shift.len(),
            });
        }
        let points = self
            .points
            .iter()
            .map(|site| {
                let mut out = *site;
                for i in 0..self.dim {
                    out[i] += shift[i];
                }
                out
            })
            .collect();
        Ok(Self::from_parts(self.dim, points, self.masses.clone()))
    }

    /// Image of the law under k ↦ −k.
    pub fn mirrored(&self) -> Self {
        let points = self
            .points
            .iter()
            .map(|site| {
                let mut out = [0; MAX_DIM];
                for i in 0..self.dim {
                    out[i] = -site[i];
                }
                out
            })
            .collect();
        Self::from_parts(self.dim, points, self.masses.clone())
    }

    /// Equal as distributions, whatever the order of the support, with
    /// masses compared to 1e-12.
    pub fn same_distribution(&self, other: &Self) -> bool {
        let sorted = |law: &Self| {
            let mut v: Vec<(Site, f64)> = law
                .points
                .iter()
                .copied()
                .zip(law.masses.iter().copied())
                .filter(|(_, m)| *m > 0.0)
                .collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        let (a, b) = (sorted(self), sorted(other));
        self.dim == other.dim
            && a.len() == b.len()
            && a.iter().zip(&b).all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= 1e-12)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(site, mass)` pairs of the support.
    pub fn iter(&self) -> impl Iterator<Item = (&Site, f64)> + '_ {
        self.points.iter().zip(self.masses.iter().copied())
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn points(&self) -> &[Site] {
        &self.points
    }

    /// Mean vector, padded with zeros to [`MAX_DIM`].
    pub fn mean(&self) -> [f64; MAX_DIM] {
        self.mean
    }

    /// Σ k kᵀ μ(k), padded with zeros.
    pub fn second_moment(&self) -> [[f64; MAX_DIM]; MAX_DIM] {
        self.second_moment
    }

    /// Σ ‖k‖^{max(d,3)} μ(k).
    pub fn tail_moment(&self) -> f64 {
        self.tail_moment
    }

    /// Smallest eigenvalue of the second-moment matrix, in closed form.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let m = &self.second_moment;
        match self.dim {
            1 => m[0][0],
            2 => {
                let half_trace = 0.5 * (m[0][0] + m[1][1]);
                let half_gap = 0.5 * (m[0][0] - m[1][1]);
                half_trace - half_gap.hypot(m[0][1])
            }
            _ => smallest_symmetric_eigenvalue_3(m),
        }
    }

    /// True when all mass sits at the origin.
    pub fn is_degenerate(&self) -> bool {
        self.iter().all(|(site, mass)| mass == 0.0 || site.iter().all(|&k| k == 0))
    }

    /// Σ_k μ(k) e^{i x·k}.
    pub fn characteristic(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (site, mass) in self.iter() {
            let phase: f64 = x
                .iter()
                .take(self.dim)
                .zip(site.iter())
                .map(|(xi, &ki)| xi * ki as f64)
                .sum();
            acc += Complex64::from_polar(mass, phase);
        }
        acc
    }

    /// The largest Euclidean norm in the support.
    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|s| s.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

fn smallest_symmetric_eigenvalue_3(m: &[[f64; MAX_DIM]; MAX_DIM]) -> f64 {
    let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if off == 0.0 {
        return m[0][0].min(m[1][1]).min(m[2][2]);
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let angle = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    q + 2.0 * p * (angle + 2.0 * std::f64::consts::FRAC_PI_3).cos()
}

/// Transition law at one level: up `p`, down `q`, horizontal `r·μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumLaw {
    p: f64,
    q: f64,
    r: f64,
    mu: Arc<HorizontalLaw>,
}

impl StratumLaw {
    pub fn new(p: f64, q: f64, r: f64, mu: Arc<HorizontalLaw>) -> Result<Self, EnvError> {
        for x in [p, q, r] {
            if !x.is_finite() || x < 0.0 {
                return Err(EnvError::Probability(x));
            }
        }
        let total = p + q + r;
        if (total - 1.0).abs() > PROB_TOL {
            return Err(EnvError::ProbabilitySum(total));
        }
        Ok(Self {
            p: p / total,
            q: q / total,
            r: r / total,
            mu,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> &Arc<HorizontalLaw> {
        &self.mu
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// Odds ratio a = q/p.
    pub fn odds(&self) -> f64 {
        self.q / self.p
    }

    /// Stratum drift η = r·m/p.
    pub fn drift(&self) -> [f64; MAX_DIM] {
        let m = self.mu.mean();
        let scale = self.r / self.p;
        [scale * m[0], scale * m[1], scale * m[2]]
    }

    /// Probability p' = p/(p+q) of an up move given a vertical move.
    pub fn up_share(&self) -> f64 {
        self.p / (self.p + self.q)
    }

    /// The same stratum with up and down exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            p: self.q,
            q: self.p,
            r: self.r,
            mu: Arc::clone(&self.mu),
        }
    }

    /// min{p, q, r}.
    pub fn min_probability(&self) -> f64 {
        self.p.min(self.q).min(self.r)
    }
}
