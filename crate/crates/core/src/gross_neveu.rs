//! Lattice Gross–Neveu model: Wilson–Dirac covariance, the transformed
//! interaction `V₁`, its norms, truncated two-point functions and decay fits.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::berezin::LogSeries;
use crate::error::{Error, Result};
use crate::grassmann::{CoefficientSystem, GeneratorIndex, Universe};
use crate::lattice::{Lattice, Metric};
use crate::norms::{coeff_norm, WeightSystem};

type C64 = Complex64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: usize,
    pub l: Vec<usize>,
    pub flavors: usize,
}

impl LatticeSpec {
    pub fn new(d: usize, l: Vec<usize>, flavors: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("dimension must satisfy d >= 2, got {d}")));
        }
        if l.len() != d || l.iter().any(|&x| x == 0) {
            return Err(Error::InvalidArgument(format!("need {d} positive side lengths, got {l:?}")));
        }
        if flavors == 0 {
            return Err(Error::InvalidArgument("flavor count must be at least 1".into()));
        }
        Ok(LatticeSpec { d, l, flavors })
    }

    pub fn cubic(d: usize, l: usize, flavors: usize) -> Result<Self> {
        Self::new(d, vec![l; d], flavors)
    }

    pub fn spinor_dim(&self) -> usize {
        1 << (self.d / 2)
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.l.clone())
    }

    pub fn universe(&self) -> Result<Universe> {
        Universe::new(self.lattice(), self.spinor_dim(), self.flavors)
    }
}

fn pauli() -> [DMatrix<C64>; 3] {
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ]
}

/// Euclidean gamma matrices `γ₁..γ_d` of size `2^⌊d/2⌋`: Pauli matrices, then
/// `σ₁⊗γⱼ, σ₂⊗1, σ₃⊗1` for each doubling.
pub fn gamma_matrices(d: usize) -> Vec<DMatrix<C64>> {
    let [s1, s2, s3] = pauli();
    let mut set = vec![s1.clone(), s2.clone(), s3.clone()];
    while set.len() < d {
        let id = DMatrix::<C64>::identity(set[0].nrows(), set[0].nrows());
        let mut next: Vec<_> = set.iter().map(|g| s1.kronecker(g)).collect();
        next.push(s2.kronecker(&id));
        next.push(s3.kronecker(&id));
        set = next;
    }
    set.truncate(d);
    set
}

/// `𝔇 + m_f` with `𝔇 = γ·∇ − ½Δ`, symmetric differences and periodic wrap,
/// indexed by `site * spinor_dim + spinor`.
pub fn dirac_matrix(spec: &LatticeSpec, m_f: f64) -> Result<DMatrix<C64>> {
    if !(m_f > 0.0) {
        return Err(Error::InvalidArgument(format!("fermion mass must be positive, got {m_f}")));
    }
    let lattice = spec.lattice();
    let s = spec.spinor_dim();
    let gammas = gamma_matrices(spec.d);
    let n = lattice.volume() * s;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for x in 0..lattice.volume() {
        for a in 0..s {
            m[(x * s + a, x * s + a)] += c(m_f + spec.d as f64);
        }
        for (mu, gamma) in gammas.iter().enumerate() {
            for (step, sign) in [(1isize, 0.5), (-1, -0.5)] {
                let y = lattice.shift(x, mu, step);
                for a in 0..s {
                    m[(x * s + a, y * s + a)] -= c(0.5);
                    for b in 0..s {
                        m[(x * s + a, y * s + b)] += gamma[(a, b)] * sign;
                    }
                }
            }
        }
    }
    Ok(m)
}

/// `S = (𝔇 + m_f)⁻¹`, flavor diagonal.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub matrix: DMatrix<C64>,
    pub mass: f64,
    /// `log |det S|` per flavor.
    pub log_det: f64,
    pub spinor_dim: usize,
    pub lattice: Lattice,
}

impl Covariance {
    pub fn entry(&self, x: usize, alpha: usize, y: usize, beta: usize) -> C64 {
        self.matrix[(x * self.spinor_dim + alpha, y * self.spinor_dim + beta)]
    }

    /// `max_{α,β} |S_{αβ}(0, y)|` per distinct torus distance, ascending.
    pub fn decay_table(&self, metric: Metric) -> Vec<(f64, f64)> {
        let rows = (0..self.lattice.volume()).flat_map(|y| {
            let r = self.lattice.distance(0, y, metric);
            (0..self.spinor_dim)
                .flat_map(move |a| (0..self.spinor_dim).map(move |b| (a, b)))
                .map(move |(a, b)| (r, self.entry(0, a, y, b).norm()))
        });
        envelope(rows)
    }
}

/// Largest magnitude per distinct distance (distances equal to 1e-9 merge).
pub fn envelope(rows: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut rows: Vec<(f64, f64)> = rows.into_iter().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (r, v) in rows {
        match out.last_mut() {
            Some(last) if (last.0 - r).abs() < 1e-9 => last.1 = last.1.max(v),
            _ => out.push((r, v)),
        }
    }
    out
}

pub fn covariance(spec: &LatticeSpec, m_f: f64) -> Result<Covariance> {
    let d = dirac_matrix(spec, m_f)?;
    let lu = d.lu();
    let det = lu.determinant();
    if det.norm() == 0.0 || !det.norm().is_finite() {
        return Err(Error::SingularOperator(format!("det(D + m) = {det}")));
    }
    let matrix = lu.try_inverse().ok_or_else(|| Error::SingularOperator("D + m is not invertible".into()))?;
    Ok(Covariance { matrix, mass: m_f, log_det: -det.norm().ln(), spinor_dim: spec.spinor_dim(), lattice: spec.lattice() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub m_f: f64,
    pub kappa: f64,
    pub h1: f64,
    pub h2: f64,
    pub metric: Metric,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { g: 0.05, m_f: 1.0, kappa: 0.5, h1: 4.0, h2: 1.0, metric: Metric::Euclidean }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidArgument(format!("coupling must satisfy g >= 0, got {}", self.g)));
        }
        if !(self.m_f > 0.0) {
            return Err(Error::InvalidArgument(format!("fermion mass must be positive, got {}", self.m_f)));
        }
        if !(self.kappa > 0.0 && self.kappa < self.m_f) {
            return Err(Error::InvalidArgument(format!("need 0 < kappa < m_f, got kappa = {}, m_f = {}", self.kappa, self.m_f)));
        }
        if !(self.h1 > 0.0 && self.h2 > 0.0) {
            return Err(Error::InvalidArgument("field weights must be positive".into()));
        }
        Ok(())
    }
}

/// The pieces of `V₁ = V(Sψ, ψ̄) − g⟨ψ̄, J⟩ − g⟨J̄, Sψ⟩` as kernels in
/// psi-then-source order. Sources `J`, `J̄` are the unbarred and barred eta generators.
#[derive(Debug, Clone, Default)]
pub struct V1Parts {
    /// `−g² S_{αβ}(x,y) S_{α′β′}(x,y′)` on `ψ̄_{αa}(x) ψ̄_{α′a′}(x) ψ_{βa}(y) ψ_{β′a′}(y′)`
    pub quartic: CoefficientSystem,
    /// `−g ψ̄_{αa}(x) J_{αa}(x)`
    pub local_source: CoefficientSystem,
    /// `−g J̄_{αa}(x) S_{αβ}(x,y) ψ_{βa}(y)`, stored as `+g S ψ J̄`
    pub smeared_source: CoefficientSystem,
}

impl V1Parts {
    pub fn total(&self) -> CoefficientSystem {
        self.quartic.merge(&self.local_source).merge(&self.smeared_source)
    }

    /// `f = −V₁`, the exponent handed to the expansion.
    pub fn exponent(&self) -> CoefficientSystem {
        self.total().scale(c(-1.0))
    }
}

fn kernel_floor(cov: &Covariance) -> f64 {
    1e-300 * cov.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn build_v1(universe: &Universe, cov: &Covariance, g: f64) -> Result<V1Parts> {
    if !(g >= 0.0) {
        return Err(Error::InvalidArgument(format!("coupling must satisfy g >= 0, got {g}")));
    }
    let mut parts = V1Parts::default();
    if g == 0.0 {
        return Ok(parts);
    }
    let volume = universe.lattice().volume();
    let s = universe.spinor_dim();
    let nf = universe.flavors();
    let bit = |gen: GeneratorIndex| universe.family_bit(&gen);
    let floor = kernel_floor(cov);
    for x in 0..volume {
        for alpha in 0..s {
            for a in 0..nf {
                let psibar = bit(GeneratorIndex::psi(x, alpha, a, true))?;
                let j = bit(GeneratorIndex::eta(x, alpha, a, false))?;
                let jbar = bit(GeneratorIndex::eta(x, alpha, a, true))?;
                parts.local_source.add_raw(&[psibar], &[j], c(-g));
                for y in 0..volume {
                    for beta in 0..s {
                        let sxy = cov.entry(x, alpha, y, beta);
                        if sxy.norm() <= floor {
                            continue;
                        }
                        let psi = bit(GeneratorIndex::psi(y, beta, a, false))?;
                        parts.smeared_source.add_raw(&[psi], &[jbar], sxy * g);
                    }
                }
            }
        }
        for (alpha, a, alpha2, a2) in (0..s).flat_map(|p| (0..nf).flat_map(move |q| (0..s).flat_map(move |r| (0..nf).map(move |t| (p, q, r, t))))) {
            let b1 = bit(GeneratorIndex::psi(x, alpha, a, true))?;
            let b2 = bit(GeneratorIndex::psi(x, alpha2, a2, true))?;
            for y in 0..volume {
                for beta in 0..s {
                    let s1 = cov.entry(x, alpha, y, beta);
                    if s1.norm() <= floor {
                        continue;
                    }
                    let p1 = bit(GeneratorIndex::psi(y, beta, a, false))?;
                    for y2 in 0..volume {
                        for beta2 in 0..s {
                            let s2 = cov.entry(x, alpha2, y2, beta2);
                            let p2 = bit(GeneratorIndex::psi(y2, beta2, a2, false))?;
                            if s2.norm() <= floor {
                                continue;
                            }
                            parts.quartic.add_raw(&[b1, b2, p1, p2], &[], s1 * s2 * (-g * g));
                        }
                    }
                }
            }
        }
    }
    Ok(parts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelNorms {
    /// `‖V‖_{w_{h₁,h₂}}`
    pub quartic: f64,
    /// `g‖⟨J̄, Sψ⟩‖`
    pub smeared_source: f64,
    /// `g‖⟨ψ̄, J⟩‖`
    pub local_source: f64,
    /// `‖V₁‖`
    pub v1: f64,
    /// `16 g² N² d⁴`, the `O(g²)` scale of `‖H − H(0)‖` up to the covariance constant.
    pub effective_scale: f64,
}

pub fn model_norms(universe: &Universe, parts: &V1Parts, params: &ModelParams) -> Result<ModelNorms> {
    let w = WeightSystem::new(params.kappa, params.h1, params.h2, params.metric)?;
    let d = universe.lattice().dim() as f64;
    let n = universe.flavors() as f64;
    Ok(ModelNorms {
        quartic: coeff_norm(universe, &parts.quartic, &w),
        smeared_source: coeff_norm(universe, &parts.smeared_source, &w),
        local_source: coeff_norm(universe, &parts.local_source, &w),
        v1: coeff_norm(universe, &parts.total(), &w),
        effective_scale: 16.0 * params.g * params.g * n * n * d.powi(4),
    })
}

/// `(1/g²)` times the coefficient of the ordered pair `J̄_{αa}(y₁) J_{βb}(y₂)` in
/// `log Z`, i.e. `b_{αβab}(y₁,y₂) − b_{βαba}(y₂,y₁)`.
#[allow(clippy::too_many_arguments)]
pub fn truncated_two_point(
    universe: &Universe,
    b: &LogSeries,
    g: f64,
    y1: usize,
    y2: usize,
    alpha: usize,
    beta: usize,
    a: usize,
    bflav: usize,
) -> Result<C64> {
    if !(g > 0.0) {
        return Err(Error::InvalidArgument(format!("two-point extraction divides by g^2, got g = {g}")));
    }
    let z = [GeneratorIndex::eta(y1, alpha, a, true), GeneratorIndex::eta(y2, beta, bflav, false)];
    Ok(b.coefficient_of(universe, &z)? / (g * g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub site: usize,
    pub distance: f64,
    pub alpha: usize,
    pub beta: usize,
    pub flavor: usize,
    pub value: C64,
}

/// Truncated two-point function from site 0 to every site, flavor diagonal.
pub fn correlation_table(universe: &Universe, b: &LogSeries, g: f64, metric: Metric) -> Result<Vec<CorrelationRow>> {
    let lattice = universe.lattice();
    let s = universe.spinor_dim();
    let mut rows = Vec::new();
    for y in 0..lattice.volume() {
        let distance = lattice.distance(0, y, metric);
        for flavor in 0..universe.flavors() {
            for alpha in 0..s {
                for beta in 0..s {
                    let value = truncated_two_point(universe, b, g, 0, y, alpha, beta, flavor, flavor)?;
                    rows.push(CorrelationRow { site: y, distance, alpha, beta, flavor, value });
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub kappa: f64,
    pub r2: f64,
    /// False when the fitted rate is not positive.
    pub decaying: bool,
    pub points: usize,
}

/// Least squares for `log |corr| = log c − κ r`.
pub fn decay_fit(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.iter().all(|s| s.1 == 0.0) {
        return Err(Error::InvalidArgument("all magnitudes are zero".into()));
    }
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0 && s.1.is_finite()).map(|&(r, v)| (r, v.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::InvalidArgument(format!("decay fit needs at least 3 positive samples, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mr = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mr).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mr) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("decay fit needs at least two distinct distances".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mr;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot <= 1e-300 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit { c: intercept.exp(), kappa: -slope, r2, decaying: -slope > 1e-12, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relations() {
        for d in 2..=6 {
            let g = gamma_matrices(d);
            assert_eq!(g.len(), d);
            let n = 1 << (d / 2);
            for i in 0..d {
                assert_eq!(g[i].nrows(), n);
                for j in 0..d {
                    let anti = &g[i] * &g[j] + &g[j] * &g[i];
                    let expected = DMatrix::<C64>::identity(n, n) * c(if i == j { 2.0 } else { 0.0 });
                    assert!((anti - expected).norm() < 1e-12, "d = {d}, ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn constants_see_only_the_mass() {
        let spec = LatticeSpec::cubic(2, 4, 1).unwrap();
        let m = dirac_matrix(&spec, 1.3).unwrap();
        let s = spec.spinor_dim();
        for spinor in 0..s {
            let v = DMatrix::<C64>::from_fn(m.nrows(), 1, |i, _| if i % s == spinor { c(1.0) } else { c(0.0) });
            let out = &m * &v;
            assert!((out - v * c(1.3)).norm() < 1e-12);
        }
    }

    #[test]
    fn wilson_stencil_weights() {
        let spec = LatticeSpec::cubic(2, 4, 1).unwrap();
        let m = dirac_matrix(&spec, 1.0).unwrap();
        let lattice = spec.lattice();
        let s = spec.spinor_dim();
        // the spinor-diagonal part of each row: m + d on site, -1/2 per neighbour
        for x in 0..lattice.volume() {
            for a in 0..s {
                let diag: f64 = (0..lattice.volume()).map(|y| m[(x * s + a, y * s + a)].re).sum();
                assert!((diag - 1.0).abs() < 1e-12);
                assert!((m[(x * s + a, x * s + a)].re - 3.0).abs() < 1e-12);
                assert!((m[(x * s + a, lattice.shift(x, 0, 1) * s + a)].re + 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_inverts_and_is_translation_invariant() {
        let spec = LatticeSpec::cubic(2, 4, 1).unwrap();
        let cov = covariance(&spec, 1.0).unwrap();
        let d = dirac_matrix(&spec, 1.0).unwrap();
        let id = DMatrix::<C64>::identity(d.nrows(), d.nrows());
        assert!((&cov.matrix * &d - id).norm() < 1e-10);
        let lattice = spec.lattice();
        for x in 0..lattice.volume() {
            for y in 0..lattice.volume() {
                let t = lattice.shift(lattice.shift(x, 0, 1), 1, 2);
                let u = lattice.shift(lattice.shift(y, 0, 1), 1, 2);
                for a in 0..2 {
                    for b in 0..2 {
                        assert!((cov.entry(x, a, y, b) - cov.entry(t, a, u, b)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn heavy_mass_covariance_is_local() {
        let spec = LatticeSpec::cubic(2, 3, 1).unwrap();
        let cov = covariance(&spec, 100.0).unwrap();
        for i in 0..cov.matrix.nrows() {
            assert!((cov.matrix[(i, i)].re * 100.0 - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let samples: Vec<(f64, f64)> = (0..6).map(|r| (r as f64, 2.5 * (-0.7 * r as f64).exp())).collect();
        let fit = decay_fit(&samples).unwrap();
        assert!((fit.c - 2.5).abs() < 1e-10 && (fit.kappa - 0.7).abs() < 1e-10);
        let flat = decay_fit(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).unwrap();
        assert!(!flat.decaying && flat.kappa.abs() < 1e-12);
        assert!(decay_fit(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).is_err());
        assert!(decay_fit(&[(0.0, 1.0), (1.0, 0.5)]).is_err());
    }

    #[test]
    fn zero_coupling_gives_empty_interaction() {
        let spec = LatticeSpec::cubic(2, 2, 1).unwrap();
        let cov = covariance(&spec, 1.0).unwrap();
        let parts = build_v1(&spec.universe().unwrap(), &cov, 0.0).unwrap();
        assert!(parts.total().is_empty());
    }

    #[test]
    fn dimension_one_rejected() {
        assert!(LatticeSpec::cubic(1, 4, 1).is_err());
    }
}
