//! Brute-force reference on truncated photon-number spaces.
//!
//! Everything here works directly with number-basis amplitudes: states are
//! prepared by exact amplitude recursions, networks act in the Schrödinger
//! picture block by block in total photon number, and expectation values
//! apply ladder-operator words to an explicitly padded vector. Nothing in
//! this module relies on the moment calculus of [`crate::moment_engine`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};
use crate::moment_engine::{Ladder, OperatorPolynomial};
use crate::network::NetworkUnitary;

/// Largest admissible norm deficit `1 - sum |c_n|^2` of a prepared state.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

/// Extra levels added around a state before applying ladder words.
pub const PADDING: usize = 4;

/// Hard ceiling on a single-mode basis size.
pub const MAX_DIM: usize = 4096;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Which number state the squeezing operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Seed {
    Vacuum,
    SinglePhoton,
}

impl Seed {
    pub fn photons(self) -> usize {
        match self {
            Seed::Vacuum => 0,
            Seed::SinglePhoton => 1,
        }
    }
}

/// Basis-size policy for state preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Size from the mean photon number, doubling once on failure.
    #[default]
    Auto,
    /// Use exactly this many levels.
    Fixed(usize),
}

/// `ceil(mu + 8 sqrt(mu + 1) + 20)`
pub fn sizing_rule(mean_photons: f64) -> usize {
    let mu = mean_photons.max(0.0);
    (mu + 8.0 * (mu + 1.0).sqrt() + 20.0).ceil() as usize
}

/// Levels needed before the geometric tail `~ cosh(r) tanh(r)^n` of a
/// squeezed state drops a factor 1000 below the leakage tolerance.
pub fn squeezed_tail_dim(r: f64) -> usize {
    let t = r.abs().tanh();
    if t < 1e-3 {
        return 0;
    }
    let levels = (LEAKAGE_TOLERANCE * 1e-3 / r.cosh()).ln() / t.ln();
    (levels.ceil() as usize).saturating_add(PADDING).min(MAX_DIM + 1)
}

/// Annihilation operator on `dim` levels: `a|n> = sqrt(n)|n-1>`.
///
/// Stored implicitly; only the superdiagonal is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderMatrix {
    dim: usize,
}

pub fn make_ladder(dim: usize) -> Result<LadderMatrix> {
    if dim == 0 {
        return Err(MetroError::InvalidDimension(dim));
    }
    Ok(LadderMatrix { dim })
}

impl LadderMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if col < self.dim && row + 1 == col {
            (col as f64).sqrt()
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j))
    }

    pub fn number_operator(&self) -> DMatrix<f64> {
        let a = self.to_dense();
        a.transpose() * a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedKet {
    amplitudes: Vec<C64>,
}

impl TruncatedKet {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(MetroError::InvalidDimension(0));
        }
        Ok(Self { amplitudes })
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if dim == 0 || n >= dim {
            return Err(MetroError::InvalidDimension(dim));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_deficit(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_photons(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }
}

fn prepare(
    auto_dim: usize,
    truncation: Truncation,
    fill: impl Fn(usize) -> Vec<C64>,
) -> Result<TruncatedKet> {
    let attempt = |dim: usize| -> Result<TruncatedKet> {
        if dim == 0 {
            return Err(MetroError::InvalidDimension(0));
        }
        if dim > MAX_DIM {
            return Err(MetroError::TruncationOverflow {
                dim,
                deficit: f64::NAN,
                tolerance: LEAKAGE_TOLERANCE,
            });
        }
        let ket = TruncatedKet {
            amplitudes: fill(dim),
        };
        let deficit = ket.norm_deficit();
        if deficit > LEAKAGE_TOLERANCE {
            return Err(MetroError::TruncationOverflow {
                dim,
                deficit,
                tolerance: LEAKAGE_TOLERANCE,
            });
        }
        Ok(ket)
    };
    match truncation {
        Truncation::Fixed(dim) => attempt(dim),
        Truncation::Auto => {
            attempt(auto_dim).or_else(|_| attempt(2 * auto_dim))
        }
    }
}

/// `S(r)|k>` with `S(r) = exp[r (a^dag^2 - a^2) / 2]`, `k` in {0, 1}.
///
/// Amplitudes come from the annihilation relation
/// `(a cosh r - a^dag sinh r) S(r)|0> = 0` and `S(r)|1> = a^dag S(r)|0> / cosh r`,
/// so every retained level is exact.
pub fn squeezed_fock_ket(r: f64, seed: Seed, truncation: Truncation) -> Result<TruncatedKet> {
    if !r.is_finite() {
        return Err(MetroError::ParameterRange {
            name: "r",
            value: r,
            reason: "squeezing must be finite",
        });
    }
    let sh2 = r.sinh().powi(2);
    let mean = match seed {
        Seed::Vacuum => sh2,
        Seed::SinglePhoton => 1.0 + 3.0 * sh2,
    };
    let (t, ch) = (r.tanh(), r.cosh());
    let auto_dim = sizing_rule(mean).max(squeezed_tail_dim(r));
    prepare(auto_dim, truncation, |dim| {
        // even ladder of S(r)|0>, one level past dim for the odd seed
        let mut vac = vec![0.0; dim + 1];
        vac[0] = 1.0 / ch.sqrt();
        let mut n = 2;
        while n <= dim {
            vac[n] = vac[n - 2] * t * ((n - 1) as f64 / n as f64).sqrt();
            n += 2;
        }
        (0..dim)
            .map(|n| match seed {
                Seed::Vacuum => C64::new(vac[n], 0.0),
                Seed::SinglePhoton if n == 0 => ZERO,
                Seed::SinglePhoton => C64::new((n as f64).sqrt() * vac[n - 1] / ch, 0.0),
            })
            .collect()
    })
}

/// Coherent state with real amplitude `gamma >= 0`.
pub fn coherent_ket(gamma: f64, truncation: Truncation) -> Result<TruncatedKet> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(MetroError::ParameterRange {
            name: "gamma",
            value: gamma,
            reason: "coherent amplitude must be finite and non-negative",
        });
    }
    let mean = gamma * gamma;
    prepare(sizing_rule(mean), truncation, |dim| {
        let mut amps = vec![ZERO; dim];
        if gamma == 0.0 {
            amps[0] = C64::new(1.0, 0.0);
            return amps;
        }
        let ln_g = gamma.ln();
        let mut ln_fact = 0.0;
        for (n, amp) in amps.iter_mut().enumerate() {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            let ln_c = -0.5 * mean + n as f64 * ln_g - 0.5 * ln_fact;
            *amp = C64::new(ln_c.exp(), 0.0);
        }
        amps
    })
}

/// Two-mode amplitudes, index `n_a * dim_b + n_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeKet {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<C64>,
}

impl TwoModeKet {
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(MetroError::InvalidDimension(0));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(MetroError::InvalidDimension(amplitudes.len()));
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    pub fn product(a: &TruncatedKet, b: &TruncatedKet) -> Self {
        let amplitudes = a
            .amplitudes
            .iter()
            .flat_map(|ca| b.amplitudes.iter().map(move |cb| ca * cb))
            .collect();
        Self {
            dim_a: a.dim(),
            dim_b: b.dim(),
            amplitudes,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n_a: usize, n_b: usize) -> C64 {
        if n_a < self.dim_a && n_b < self.dim_b {
            self.amplitudes[n_a * self.dim_b + n_b]
        } else {
            ZERO
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm_deficit(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn inner(&self, other: &TwoModeKet) -> C64 {
        let mut acc = ZERO;
        for n_a in 0..self.dim_a.min(other.dim_a) {
            for n_b in 0..self.dim_b.min(other.dim_b) {
                acc += self.amplitude(n_a, n_b).conj() * other.amplitude(n_a, n_b);
            }
        }
        acc
    }

    /// Largest total photon number carrying a nonzero amplitude.
    pub fn photon_support(&self) -> usize {
        let mut top = 0;
        for n_a in 0..self.dim_a {
            for n_b in 0..self.dim_b {
                if n_a + n_b > top && self.amplitudes[n_a * self.dim_b + n_b] != ZERO {
                    top = n_a + n_b;
                }
            }
        }
        top
    }

    /// Same state, embedded in a larger basis.
    pub fn padded(&self, dim_a: usize, dim_b: usize) -> TwoModeKet {
        let (dim_a, dim_b) = (dim_a.max(self.dim_a), dim_b.max(self.dim_b));
        let mut amplitudes = vec![ZERO; dim_a * dim_b];
        for n_a in 0..self.dim_a {
            for n_b in 0..self.dim_b {
                amplitudes[n_a * dim_b + n_b] = self.amplitudes[n_a * self.dim_b + n_b];
            }
        }
        TwoModeKet {
            dim_a,
            dim_b,
            amplitudes,
        }
    }

    /// Multiplies each amplitude by a function of its photon numbers.
    pub fn scaled(&self, f: impl Fn(usize, usize) -> C64) -> TwoModeKet {
        let mut out = self.clone();
        out.map_diagonal(f);
        out
    }

    fn map_diagonal(&mut self, f: impl Fn(usize, usize) -> C64) {
        for n_a in 0..self.dim_a {
            for n_b in 0..self.dim_b {
                self.amplitudes[n_a * self.dim_b + n_b] *= f(n_a, n_b);
            }
        }
    }

    /// Applies a single ladder letter. Levels pushed past the top are lost,
    /// callers pad first.
    fn apply_letter(&self, letter: Ladder) -> TwoModeKet {
        let (da, db) = (self.dim_a, self.dim_b);
        let mut out = vec![ZERO; da * db];
        for n_a in 0..da {
            for n_b in 0..db {
                let c = self.amplitudes[n_a * db + n_b];
                if c == ZERO {
                    continue;
                }
                match letter {
                    Ladder::A if n_a > 0 => {
                        out[(n_a - 1) * db + n_b] += c * (n_a as f64).sqrt();
                    }
                    Ladder::ADag if n_a + 1 < da => {
                        out[(n_a + 1) * db + n_b] += c * ((n_a + 1) as f64).sqrt();
                    }
                    Ladder::B if n_b > 0 => {
                        out[n_a * db + n_b - 1] += c * (n_b as f64).sqrt();
                    }
                    Ladder::BDag if n_b + 1 < db => {
                        out[n_a * db + n_b + 1] += c * ((n_b + 1) as f64).sqrt();
                    }
                    _ => {}
                }
            }
        }
        TwoModeKet {
            dim_a: da,
            dim_b: db,
            amplitudes: out,
        }
    }

    /// `P|psi>` for an operator polynomial, evaluated on the padded basis.
    pub fn apply_polynomial(&self, poly: &OperatorPolynomial) -> TwoModeKet {
        let base = self.padded(self.dim_a + PADDING, self.dim_b + PADDING);
        let mut acc = vec![ZERO; base.amplitudes.len()];
        for term in poly.terms() {
            let mut v = base.clone();
            for &letter in term.word.iter().rev() {
                v = v.apply_letter(letter);
            }
            for (slot, c) in acc.iter_mut().zip(&v.amplitudes) {
                *slot += term.coeff * c;
            }
        }
        TwoModeKet {
            dim_a: base.dim_a,
            dim_b: base.dim_b,
            amplitudes: acc,
        }
    }
}

/// Eigenbasis of `X = a^dag b + b^dag a` restricted to `N` photons, indexed
/// by `n_a`. The eigenvalues are the integers `-N, -N+2, ..., N`.
struct RotationBlock {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

fn rotation_block(total: usize) -> Arc<RotationBlock> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<RotationBlock>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(block) = cache.lock().unwrap().get(&total) {
        return block.clone();
    }
    let size = total + 1;
    let x = DMatrix::from_fn(size, size, |i, j| {
        if i == j + 1 {
            ((j + 1) as f64).sqrt() * ((total - j) as f64).sqrt()
        } else if j == i + 1 {
            ((i + 1) as f64).sqrt() * ((total - i) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(x);
    let block = Arc::new(RotationBlock {
        values: eig.eigenvalues.iter().map(|v| v.round()).collect(),
        vectors: eig.eigenvectors,
    });
    cache.lock().unwrap().insert(total, block.clone());
    block
}

/// Schrödinger-picture action of the passive network whose Heisenberg map
/// on `(a, b)` is `U`.
///
/// Photon number is conserved, so the output basis is sized to hold the
/// whole photon-number support of the input without truncation; the
/// returned dims are `(N_max + 1, N_max + 1)`.
pub fn apply_network(state: &TwoModeKet, network: &NetworkUnitary) -> TwoModeKet {
    let top = state.photon_support();
    let dim = top + 1;
    let mut out = state.padded(dim, dim);
    if out.dim_a > dim || out.dim_b > dim {
        // dims already exceed the support; drop the empty tail
        out = shrink(&out, dim);
    }
    let angles = network.euler_angles();

    let rz = |x: f64| {
        let (ua, ub) = (C64::from_polar(1.0, -0.5 * x), C64::from_polar(1.0, 0.5 * x));
        move |n_a: usize, n_b: usize| ua.powi(n_a as i32) * ub.powi(n_b as i32)
    };
    out.map_diagonal(rz(angles.beta));

    let t = angles.half_angle;
    if t != 0.0 {
        let i_pow = |n: usize, sign: f64| C64::new(0.0, sign).powi(n as i32);
        for total in 1..=top {
            let block = rotation_block(total);
            let lo = total.saturating_sub(dim - 1);
            let hi = total.min(dim - 1);
            let size = total + 1;
            // D^dag: (-i)^{n_a}
            let mut v = vec![ZERO; size];
            for n_a in lo..=hi {
                v[n_a] = out.amplitudes[n_a * dim + total - n_a] * i_pow(n_a, -1.0);
            }
            // Q^T v
            let proj: Vec<C64> = (0..size)
                .map(|k| {
                    (0..size)
                        .map(|n| v[n] * block.vectors[(n, k)])
                        .sum::<C64>()
                        * C64::from_polar(1.0, t * block.values[k])
                })
                .collect();
            for n_a in lo..=hi {
                let back: C64 = (0..size).map(|k| proj[k] * block.vectors[(n_a, k)]).sum();
                out.amplitudes[n_a * dim + total - n_a] = back * i_pow(n_a, 1.0);
            }
        }
    }

    out.map_diagonal(rz(angles.alpha));
    let g = C64::from_polar(1.0, angles.global);
    out.map_diagonal(|n_a, n_b| g.powi((n_a + n_b) as i32));
    out
}

fn shrink(state: &TwoModeKet, dim: usize) -> TwoModeKet {
    let mut amplitudes = vec![ZERO; dim * dim];
    for n_a in 0..dim.min(state.dim_a) {
        for n_b in 0..dim.min(state.dim_b) {
            amplitudes[n_a * dim + n_b] = state.amplitude(n_a, n_b);
        }
    }
    TwoModeKet {
        dim_a: dim,
        dim_b: dim,
        amplitudes,
    }
}

/// `<psi|P|psi>` with the operator matrices built on `dim + PADDING` levels.
pub fn expectation(state: &TwoModeKet, poly: &OperatorPolynomial) -> C64 {
    let image = state.apply_polynomial(poly);
    state.inner(&image)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotocountDistribution {
    dim_a: usize,
    dim_b: usize,
    probabilities: Vec<f64>,
    efficiency: f64,
}

fn check_efficiency(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(MetroError::InvalidEfficiency(eta))
    }
}

/// `T[m][n] = C(n, m) eta^m (1 - eta)^(n - m)`, column-major in `n`.
fn thinning_matrix(dim: usize, eta: f64) -> Vec<f64> {
    let mut ln_fact = vec![0.0; dim.max(1)];
    for n in 1..dim {
        ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
    }
    let mut t = vec![0.0; dim * dim];
    for n in 0..dim {
        for m in 0..=n {
            let binom = (ln_fact[n] - ln_fact[m] - ln_fact[n - m]).exp();
            t[m * dim + n] = binom * eta.powi(m as i32) * (1.0 - eta).powi((n - m) as i32);
        }
    }
    t
}

/// Binomial thinning applied independently to both modes of a joint
/// distribution (or of any linear functional of it, such as a derivative).
pub(crate) fn thin_joint(values: &[f64], dim_a: usize, dim_b: usize, eta: f64) -> Vec<f64> {
    if eta == 1.0 {
        return values.to_vec();
    }
    let ta = thinning_matrix(dim_a, eta);
    let tb = thinning_matrix(dim_b, eta);
    let mut along_b = vec![0.0; dim_a * dim_b];
    for n_a in 0..dim_a {
        for m_b in 0..dim_b {
            along_b[n_a * dim_b + m_b] = (m_b..dim_b)
                .map(|n_b| tb[m_b * dim_b + n_b] * values[n_a * dim_b + n_b])
                .sum();
        }
    }
    let mut out = vec![0.0; dim_a * dim_b];
    for m_a in 0..dim_a {
        for n_a in m_a..dim_a {
            let w = ta[m_a * dim_a + n_a];
            if w == 0.0 {
                continue;
            }
            for m_b in 0..dim_b {
                out[m_a * dim_b + m_b] += w * along_b[n_a * dim_b + m_b];
            }
        }
    }
    out
}

/// Joint photocount statistics of both output ports seen through detectors
/// of quantum efficiency `eta`.
pub fn photocount_distribution(state: &TwoModeKet, eta: f64) -> Result<PhotocountDistribution> {
    check_efficiency(eta)?;
    let raw: Vec<f64> = state.amplitudes.iter().map(|c| c.norm_sqr()).collect();
    Ok(PhotocountDistribution {
        dim_a: state.dim_a,
        dim_b: state.dim_b,
        probabilities: thin_joint(&raw, state.dim_a, state.dim_b, eta),
        efficiency: eta,
    })
}

impl PhotocountDistribution {
    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, n_a: usize, n_b: usize) -> f64 {
        if n_a < self.dim_a && n_b < self.dim_b {
            self.probabilities[n_a * self.dim_b + n_b]
        } else {
            0.0
        }
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Further loss in front of the detectors; efficiencies multiply.
    pub fn thin(&self, eta: f64) -> Result<PhotocountDistribution> {
        check_efficiency(eta)?;
        Ok(PhotocountDistribution {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            probabilities: thin_joint(&self.probabilities, self.dim_a, self.dim_b, eta),
            efficiency: self.efficiency * eta,
        })
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        (0..self.dim_a)
            .map(|n_a| (0..self.dim_b).map(|n_b| self.probability(n_a, n_b)).sum())
            .collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.dim_b)
            .map(|n_b| (0..self.dim_a).map(|n_a| self.probability(n_a, n_b)).sum())
            .collect()
    }

    /// Mean and variance of `n_a - n_b`.
    pub fn difference_moments(&self) -> (f64, f64) {
        let mut first = 0.0;
        let mut second = 0.0;
        for n_a in 0..self.dim_a {
            for n_b in 0..self.dim_b {
                let d = n_a as f64 - n_b as f64;
                let p = self.probabilities[n_a * self.dim_b + n_b];
                first += p * d;
                second += p * d * d;
            }
        }
        (first, second - first * first)
    }
}
