//! Stochastic sampling of the damped oscillator: Euler-Maruyama
//! ensembles with per-step work and heat bookkeeping.  The ensemble is
//! split into fixed chunks that are folded in index order, so results
//! are bit-identical for any worker count and for the sequential twin.

use crate::core::{Oscillator, SecondMoments};
use crate::dynamics::{DiffusionSchedule, FrequencySchedule};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Trajectories per accumulation chunk.  Fixed so that the summation
/// order never depends on the thread pool.
const CHUNK: usize = 1024;

/// Full description of one ensemble run.
#[derive(Debug, Clone)]
pub struct EnsemblePlan {
    pub oscillator: Oscillator,
    pub omega: FrequencySchedule,
    pub noise: DiffusionSchedule,
    pub initial: SecondMoments,
    pub t_final: f64,
    pub dt: f64,
    pub n_trajectories: usize,
    /// Number of sample times kept (clamped to the step grid; always
    /// includes t = 0 and t_final).
    pub n_output: usize,
    pub seed: u64,
}

/// One realization, sampled on the output grid.  Work is counted as
/// done by the system, heat as absorbed from the bath, and the heat
/// entry is defined as energy_change + work so the first law closes
/// identically.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub work: f64,
    pub heat: f64,
    pub heat_direct: f64,
    pub energy_change: f64,
}

/// Ensemble moments and energy bookkeeping with standard errors.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub moments: Vec<SecondMoments>,
    pub moment_se: Vec<SecondMoments>,
    pub omega: Vec<f64>,
    pub noise: Vec<f64>,
    pub mean_work: f64,
    pub se_work: f64,
    pub mean_heat: f64,
    pub se_heat: f64,
    pub mean_heat_direct: f64,
    pub se_heat_direct: f64,
    pub mean_energy_change: f64,
    pub se_energy_change: f64,
    pub work_samples: Vec<f64>,
    pub heat_samples: Vec<f64>,
    pub n_trajectories: usize,
    pub dt: f64,
}

impl EnsembleStats {
    pub fn final_moments(&self) -> &SecondMoments {
        self.moments.last().expect("stats hold at least two sample times")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q2,qp,p2,omega,D\n");
        for i in 0..self.times.len() {
            let m = &self.moments[i];
            out.push_str(&format!(
                "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}\n",
                self.times[i], m.q2, m.qp, m.p2, self.omega[i], self.noise[i]
            ));
        }
        out
    }
}

/// Normalized histogram on a uniform grid: density integrates to one.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn total_mass(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| d * (self.edges[i + 1] - self.edges[i]))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| {
                d * (self.edges[i + 1] - self.edges[i]) * 0.5 * (self.edges[i] + self.edges[i + 1])
            })
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density\n");
        for i in 0..self.density.len() {
            out.push_str(&format!(
                "{:.14e},{:.14e},{:.14e}\n",
                self.edges[i],
                self.edges[i + 1],
                self.density[i]
            ));
        }
        out
    }
}

/// Precomputed step tables shared by every trajectory: stiffness
/// m omega^2 at each grid time and the noise amplitude per step.
struct Tables {
    h: f64,
    n_steps: usize,
    a: Vec<f64>,
    sig: Vec<f64>,
    two_kappa: f64,
    inv_m: f64,
}

/// Cholesky factor of the initial covariance.
struct InitSampler {
    l11: f64,
    l21: f64,
    l22: f64,
}

impl InitSampler {
    fn new(m: &SecondMoments) -> Result<Self> {
        if !(m.q2 >= 0.0 && m.p2 >= 0.0) || !m.qp.is_finite() {
            return Err(Error::InvalidMoments(format!(
                "initial covariance must be finite with q2, p2 >= 0, got {m:?}"
            )));
        }
        if m.q2 == 0.0 {
            if m.qp != 0.0 {
                return Err(Error::InvalidMoments(format!(
                    "q2 = 0 requires qp = 0, got qp = {}",
                    m.qp
                )));
            }
            return Ok(InitSampler { l11: 0.0, l21: 0.0, l22: m.p2.sqrt() });
        }
        let det = m.q2 * m.p2 - m.qp * m.qp;
        if det < -1e-9 * m.q2 * m.p2 {
            return Err(Error::InvalidMoments(format!(
                "initial covariance is not positive semidefinite (det = {det})"
            )));
        }
        let l11 = m.q2.sqrt();
        let l21 = m.qp / l11;
        let l22 = (m.p2 - l21 * l21).max(0.0).sqrt();
        Ok(InitSampler { l11, l21, l22 })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let x1: f64 = rng.sample(StandardNormal);
        let x2: f64 = rng.sample(StandardNormal);
        (self.l11 * x1, self.l21 * x1 + self.l22 * x2)
    }
}

impl EnsemblePlan {
    fn build_tables(&self) -> Result<(Tables, Vec<usize>)> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "final time must be positive, got {}",
                self.t_final
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("step must be positive, got {}", self.dt)));
        }
        if self.n_trajectories < 100 {
            return Err(Error::InvalidInput(format!(
                "ensemble needs at least 100 trajectories, got {}",
                self.n_trajectories
            )));
        }
        if self.n_output < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least two sample times, got {}",
                self.n_output
            )));
        }
        let n_steps = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        let h = self.t_final / n_steps as f64;
        let m = self.oscillator.mass;
        let mut a = Vec::with_capacity(n_steps + 1);
        let mut sig = Vec::with_capacity(n_steps);
        let mut omega_max: f64 = 0.0;
        for k in 0..=n_steps {
            let t = k as f64 * h;
            let w2 = self.omega.omega_sq(t);
            if !(w2 >= 0.0 && w2.is_finite()) {
                return Err(Error::InvalidInput(format!("omega^2 = {w2} at t = {t}")));
            }
            omega_max = omega_max.max(w2.sqrt());
            a.push(m * w2);
            if k < n_steps {
                let d = self.noise.d(t);
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "diffusion coefficient {d} at t = {t}"
                    )));
                }
                sig.push((2.0 * d * h).sqrt());
            }
        }
        let rate = self.oscillator.kappa.max(omega_max);
        if h * rate > 0.01 * (1.0 + 1e-9) {
            return Err(Error::InvalidInput(format!(
                "step {h} too coarse: need dt <= 0.01 / max(kappa, omega) = {}",
                0.01 / rate
            )));
        }
        let n_out = self.n_output.min(n_steps + 1);
        let out_steps: Vec<usize> = (0..n_out)
            .map(|j| ((j * n_steps) as f64 / (n_out - 1) as f64).round() as usize)
            .collect();
        Ok((
            Tables { h, n_steps, a, sig, two_kappa: 2.0 * self.oscillator.kappa, inv_m: 1.0 / m },
            out_steps,
        ))
    }
}

struct PathTotals {
    work: f64,
    heat: f64,
    heat_direct: f64,
    du: f64,
}

/// Advance one trajectory, reporting (q, p) at each requested step via
/// the callback.  The draw order (two for the initial state, one per
/// step) pins the stream layout for reproducibility.
fn run_path<F: FnMut(usize, f64, f64)>(
    tables: &Tables,
    init: &InitSampler,
    out_steps: &[usize],
    seed: u64,
    stream: u64,
    mut record: F,
) -> PathTotals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (mut q, mut p) = init.draw(&mut rng);
    let h = tables.h;
    let inv_m = tables.inv_m;
    let mut work = 0.0;
    let mut du = 0.0;
    let mut heat_direct = 0.0;
    let mut u_prev = 0.5 * (p * p * inv_m + tables.a[0] * q * q);
    let mut ptr = 0;
    if out_steps[ptr] == 0 {
        record(ptr, q, p);
        ptr += 1;
    }
    for k in 0..tables.n_steps {
        let a0 = tables.a[k];
        let a1 = tables.a[k + 1];
        let xi: f64 = rng.sample(StandardNormal);
        let qn = q + p * inv_m * h;
        let pn = p + (-tables.two_kappa * p - a0 * q) * h + tables.sig[k] * xi;
        let u_next = 0.5 * (pn * pn * inv_m + a1 * qn * qn);
        let dw = -0.25 * (q * q + qn * qn) * (a1 - a0);
        du += u_next - u_prev;
        work += dw;
        heat_direct +=
            (pn - p + 0.5 * (a0 + a1) * 0.5 * (q + qn) * h) * 0.5 * (p + pn) * inv_m;
        q = qn;
        p = pn;
        u_prev = u_next;
        if ptr < out_steps.len() && out_steps[ptr] == k + 1 {
            record(ptr, q, p);
            ptr += 1;
        }
    }
    PathTotals { work, heat: du + work, heat_direct, du }
}

struct ChunkAccum {
    m1: Vec<[f64; 3]>,
    m2: Vec<[f64; 3]>,
    scalars: [f64; 8],
    work: Vec<f64>,
    heat: Vec<f64>,
}

impl ChunkAccum {
    fn zeros(n_out: usize, cap: usize) -> Self {
        ChunkAccum {
            m1: vec![[0.0; 3]; n_out],
            m2: vec![[0.0; 3]; n_out],
            scalars: [0.0; 8],
            work: Vec::with_capacity(cap),
            heat: Vec::with_capacity(cap),
        }
    }

    fn absorb(&mut self, other: ChunkAccum) {
        for (s, o) in self.m1.iter_mut().zip(&other.m1) {
            for i in 0..3 {
                s[i] += o[i];
            }
        }
        for (s, o) in self.m2.iter_mut().zip(&other.m2) {
            for i in 0..3 {
                s[i] += o[i];
            }
        }
        for i in 0..8 {
            self.scalars[i] += other.scalars[i];
        }
        self.work.extend_from_slice(&other.work);
        self.heat.extend_from_slice(&other.heat);
    }
}

fn run_chunk(
    tables: &Tables,
    init: &InitSampler,
    out_steps: &[usize],
    seed: u64,
    range: std::ops::Range<usize>,
) -> ChunkAccum {
    let mut acc = ChunkAccum::zeros(out_steps.len(), range.len());
    for i in range {
        let totals = run_path(tables, init, out_steps, seed, i as u64, |j, q, p| {
            let vals = [q * q, q * p, p * p];
            for c in 0..3 {
                acc.m1[j][c] += vals[c];
                acc.m2[j][c] += vals[c] * vals[c];
            }
        });
        let s = &mut acc.scalars;
        s[0] += totals.work;
        s[1] += totals.work * totals.work;
        s[2] += totals.heat;
        s[3] += totals.heat * totals.heat;
        s[4] += totals.heat_direct;
        s[5] += totals.heat_direct * totals.heat_direct;
        s[6] += totals.du;
        s[7] += totals.du * totals.du;
        acc.work.push(totals.work);
        acc.heat.push(totals.heat);
    }
    acc
}

fn mean_se(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn finalize(plan: &EnsemblePlan, tables: &Tables, out_steps: &[usize], acc: ChunkAccum) -> EnsembleStats {
    let n = plan.n_trajectories;
    let mut times = Vec::with_capacity(out_steps.len());
    let mut moments = Vec::with_capacity(out_steps.len());
    let mut moment_se = Vec::with_capacity(out_steps.len());
    let mut omega = Vec::with_capacity(out_steps.len());
    let mut noise = Vec::with_capacity(out_steps.len());
    for (j, &step) in out_steps.iter().enumerate() {
        let t = step as f64 * tables.h;
        times.push(t);
        omega.push(plan.omega.omega(t));
        noise.push(plan.noise.d(t));
        let mut m = [0.0; 3];
        let mut se = [0.0; 3];
        for c in 0..3 {
            let (mu, s) = mean_se(acc.m1[j][c], acc.m2[j][c], n);
            m[c] = mu;
            se[c] = s;
        }
        moments.push(SecondMoments { q2: m[0], qp: m[1], p2: m[2] });
        moment_se.push(SecondMoments { q2: se[0], qp: se[1], p2: se[2] });
    }
    let (mean_work, se_work) = mean_se(acc.scalars[0], acc.scalars[1], n);
    let (mean_heat, se_heat) = mean_se(acc.scalars[2], acc.scalars[3], n);
    let (mean_heat_direct, se_heat_direct) = mean_se(acc.scalars[4], acc.scalars[5], n);
    let (mean_energy_change, se_energy_change) = mean_se(acc.scalars[6], acc.scalars[7], n);
    EnsembleStats {
        times,
        moments,
        moment_se,
        omega,
        noise,
        mean_work,
        se_work,
        mean_heat,
        se_heat,
        mean_heat_direct,
        se_heat_direct,
        mean_energy_change,
        se_energy_change,
        work_samples: acc.work,
        heat_samples: acc.heat,
        n_trajectories: n,
        dt: tables.h,
    }
}

fn chunk_ranges(n: usize) -> Vec<std::ops::Range<usize>> {
    (0..n.div_ceil(CHUNK)).map(|c| (c * CHUNK)..((c + 1) * CHUNK).min(n)).collect()
}

/// Run the ensemble, distributing chunks over the thread pool.  The
/// chunk fold is ordered, so the output is bit-identical to the
/// sequential twin.
#[cfg(feature = "parallel")]
pub fn simulate_ensemble(plan: &EnsemblePlan) -> Result<EnsembleStats> {
    let (tables, out_steps) = plan.build_tables()?;
    let init = InitSampler::new(&plan.initial)?;
    let chunks: Vec<ChunkAccum> = chunk_ranges(plan.n_trajectories)
        .into_par_iter()
        .map(|r| run_chunk(&tables, &init, &out_steps, plan.seed, r))
        .collect();
    let mut total = ChunkAccum::zeros(out_steps.len(), plan.n_trajectories);
    for c in chunks {
        total.absorb(c);
    }
    Ok(finalize(plan, &tables, &out_steps, total))
}

#[cfg(not(feature = "parallel"))]
pub fn simulate_ensemble(plan: &EnsemblePlan) -> Result<EnsembleStats> {
    simulate_ensemble_seq(plan)
}

/// Sequential twin of simulate_ensemble; always available.
pub fn simulate_ensemble_seq(plan: &EnsemblePlan) -> Result<EnsembleStats> {
    let (tables, out_steps) = plan.build_tables()?;
    let init = InitSampler::new(&plan.initial)?;
    let mut total = ChunkAccum::zeros(out_steps.len(), plan.n_trajectories);
    for r in chunk_ranges(plan.n_trajectories) {
        total.absorb(run_chunk(&tables, &init, &out_steps, plan.seed, r));
    }
    Ok(finalize(plan, &tables, &out_steps, total))
}

/// Re-run a single ensemble member by its index.  Uses the same stream
/// layout as the ensemble, so its totals match that member's entries
/// in the sample vectors bit for bit.
pub fn sample_path(plan: &EnsemblePlan, index: usize) -> Result<Trajectory> {
    if index >= plan.n_trajectories {
        return Err(Error::InvalidInput(format!(
            "trajectory index {index} out of range (ensemble of {})",
            plan.n_trajectories
        )));
    }
    let (tables, out_steps) = plan.build_tables()?;
    let init = InitSampler::new(&plan.initial)?;
    let mut q = vec![0.0; out_steps.len()];
    let mut p = vec![0.0; out_steps.len()];
    let totals = run_path(&tables, &init, &out_steps, plan.seed, index as u64, |j, qj, pj| {
        q[j] = qj;
        p[j] = pj;
    });
    Ok(Trajectory {
        times: out_steps.iter().map(|&s| s as f64 * tables.h).collect(),
        q,
        p,
        work: totals.work,
        heat: totals.heat,
        heat_direct: totals.heat_direct,
        energy_change: totals.du,
    })
}

/// Bin per-trajectory totals into a normalized density.  A degenerate
/// range (all samples equal) is widened by a tiny symmetric margin so
/// the density still integrates to one.
pub fn work_distribution(samples: &[f64], n_bins: usize) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples to bin".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidInput("need at least one bin".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in samples {
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite sample {s}")));
        }
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if hi - lo < f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
        let pad = 1e-9 * (1.0 + lo.abs());
        lo -= pad;
        hi += pad;
    }
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &s in samples {
        let raw = ((s - lo) / width) as usize;
        counts[raw.min(n_bins - 1)] += 1;
    }
    let edges: Vec<f64> = (0..=n_bins).map(|i| lo + i as f64 * width).collect();
    // Normalize by the realized edge gaps, not the nominal width, so
    // the mass stays exactly one even when the range is tiny relative
    // to its location.
    let n = samples.len() as f64;
    let density = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let w = edges[i + 1] - edges[i];
            if w <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "bin {i} collapsed: range too narrow for {n_bins} bins"
                )));
            }
            Ok(c as f64 / (n * w))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Histogram { edges, density })
}
