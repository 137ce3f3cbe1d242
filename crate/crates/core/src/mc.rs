//! Sampling from the closed-form family, forming the linear-form vectors,
//! and testing identical distribution with an energy-distance permutation
//! test.
//!
//! Sampling draws the Z(2) coordinate from the fiber masses and the real
//! coordinate by rejection against the two-Gaussian mixture proposal
//! (g_{sigma,beta} + g_{sigma',beta'}) / 2, which dominates both fiber
//! densities whenever the parameters describe a probability measure.
//!
//! The two-sample statistic is the energy distance with the metric
//!
//! ```text
//! d((x1, x2), (y1, y2))^2 = (t-differences)^2 summed over both components
//!                           + w^2 per differing Z(2) coordinate,   w = 1,
//! ```
//!
//! which embeds isometrically into Euclidean space, so the energy test is
//! consistent. The permutation null is computed from one pooled distance
//! matrix; all replicate quadratic forms z^T D z reduce to a single
//! matrix-matrix product over the stacked replicate indicator vectors.

use crate::charfn::ThetaParams;
use crate::error::{Error, Result};
use crate::group::{Bit, Character, Endomorphism, GroupElement};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Weight of the discrete coordinate in the sample metric.
pub const DISCRETE_WEIGHT: f64 = 1.0;

/// Pooled sizes up to this bound use the direct f64 statistic per replicate;
/// larger pools switch to the batched f32 matrix engine.
const DENSE_PATH_MIN_POOL: usize = 1024;

/// Draws from one distribution, reproducible from the seed.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub points: Vec<GroupElement>,
    pub seed: u64,
    pub params: ThetaParams,
}

impl SampleBatch {
    /// Fraction of draws landing on the fiber R x {k}.
    pub fn fiber_frequency(&self, k: Bit) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let hits = self.points.iter().filter(|x| x.k == k).count();
        hits as f64 / self.points.len() as f64
    }

    /// Empirical characteristic function at the character y.
    pub fn empirical_cf(&self, y: Character) -> Complex64 {
        let sum: Complex64 = self.points.iter().map(|&x| crate::group::pair(x, y)).sum();
        sum / self.points.len() as f64
    }
}

/// Realizations of an (X x X)-valued vector; both components come from the
/// same underlying draws.
#[derive(Clone, Debug)]
pub struct PairedSample {
    pub pairs: Vec<(GroupElement, GroupElement)>,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; 1 - u keeps the logarithm away from zero.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn gaussian_density(sigma: f64, beta: f64, t: f64) -> f64 {
    let d = t - beta;
    (-d * d / (4.0 * sigma)).exp() / (4.0 * std::f64::consts::PI * sigma).sqrt()
}

/// Draws `n` points from the distribution, reproducibly from `seed`.
///
/// The fiber is Bernoulli with the fiber masses; the real coordinate comes
/// either directly from the fiber Gaussian (equal-parameter branch, where
/// both conditionals coincide with g_{sigma,beta}) or by rejection against
/// the mixture proposal. Errors with [`Error::IllConditioned`] when a
/// reachable fiber would accept fewer than one proposal in 10^4.
pub fn sample(params: &ThetaParams, n: usize, seed: u64) -> Result<SampleBatch> {
    let (ok, label) = params.is_probability();
    if !ok {
        return Err(Error::NotProbability { index: 0, label });
    }
    let p1 = params.fiber_mass(Bit::ONE).clamp(0.0, 1.0);
    // GammaX / GammaR_times_M1Z2 sit on the sigma = sigma', beta = beta'
    // branch where the conditional law of t does not depend on the fiber.
    let equal_branch = label != crate::charfn::ClassLabel::ThetaProper;
    if !equal_branch {
        for k in [Bit::ZERO, Bit::ONE] {
            let mass = params.fiber_mass(k);
            if mass > 0.0 && mass < 1e-4 {
                return Err(Error::IllConditioned { acceptance: mass });
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut proposals: u64 = 0;
    let proposal_budget = 1_000_000 + 100 * n as u64;
    for _ in 0..n {
        let k = if rng.random::<f64>() < p1 { Bit::ONE } else { Bit::ZERO };
        let t = if equal_branch {
            if params.sigma == 0.0 {
                params.beta
            } else {
                params.beta + (2.0 * params.sigma).sqrt() * standard_normal(&mut rng)
            }
        } else {
            // target (unnormalized): f_k = (g0 + sign(k) kappa g1) / 2,
            // proposal: q = (g0 + g1) / 2 >= f_k since |kappa| < 1 here.
            loop {
                proposals += 1;
                if proposals > proposal_budget {
                    let acceptance = points.len() as f64 / proposals as f64;
                    return Err(Error::IllConditioned { acceptance });
                }
                let (mu, var2) = if rng.random::<f64>() < 0.5 {
                    (params.beta, params.sigma)
                } else {
                    (params.beta_p, params.sigma_p)
                };
                let t = mu + (2.0 * var2).sqrt() * standard_normal(&mut rng);
                let g0 = gaussian_density(params.sigma, params.beta, t);
                let g1 = gaussian_density(params.sigma_p, params.beta_p, t);
                let q = 0.5 * (g0 + g1);
                let f_k = 0.5 * (g0 + k.sign() * params.kappa * g1);
                if rng.random::<f64>() * q <= f_k {
                    break t;
                }
            }
        };
        points.push(GroupElement::new(t, k));
    }
    Ok(SampleBatch { points, seed, params: *params })
}

/// Componentwise (sum_j a_j xi_j, sum_j b_j xi_j) over equally sized batches.
pub fn apply_forms(
    batches: &[SampleBatch],
    a: &[Endomorphism],
    b: &[Endomorphism],
) -> Result<PairedSample> {
    if batches.is_empty() || batches.len() != a.len() || batches.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "expected equally many batches and coefficients, got {} batches, {} a, {} b",
            batches.len(),
            a.len(),
            b.len()
        )));
    }
    let n = batches[0].points.len();
    if batches.iter().any(|batch| batch.points.len() != n) {
        return Err(Error::LengthMismatch("sample batches differ in length".into()));
    }
    let pairs = (0..n)
        .map(|i| {
            let mut first = GroupElement::zero();
            let mut second = GroupElement::zero();
            for (j, batch) in batches.iter().enumerate() {
                let x = batch.points[i];
                first = first + a[j].apply(x);
                second = second + b[j].apply(x);
            }
            (first, second)
        })
        .collect();
    Ok(PairedSample { pairs })
}

fn pair_distance(x: &(GroupElement, GroupElement), y: &(GroupElement, GroupElement)) -> f64 {
    let dt1 = x.0.t - y.0.t;
    let dt2 = x.1.t - y.1.t;
    let mut sq = dt1 * dt1 + dt2 * dt2;
    if x.0.k != y.0.k {
        sq += DISCRETE_WEIGHT * DISCRETE_WEIGHT;
    }
    if x.1.k != y.1.k {
        sq += DISCRETE_WEIGHT * DISCRETE_WEIGHT;
    }
    sq.sqrt()
}

/// Energy statistic 2 E d(a, b) - E d(a, a') - E d(b, b') with all-pairs
/// means (so identical samples give exactly zero).
pub fn energy_distance(a: &PairedSample, b: &PairedSample) -> Result<f64> {
    let n = a.pairs.len();
    let m = b.pairs.len();
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter("energy distance needs at least 2 points per sample".into()));
    }
    let row_sums = |xs: &[(GroupElement, GroupElement)], ys: &[(GroupElement, GroupElement)]| {
        let rows: Vec<f64> = xs
            .par_iter()
            .map(|x| ys.iter().map(|y| pair_distance(x, y)).sum::<f64>())
            .collect();
        rows.iter().sum::<f64>()
    };
    let s_ab = row_sums(&a.pairs, &b.pairs);
    let s_aa = row_sums(&a.pairs, &a.pairs);
    let s_bb = row_sums(&b.pairs, &b.pairs);
    Ok(2.0 * s_ab / (n * m) as f64 - s_aa / (n * n) as f64 - s_bb / (m * m) as f64)
}

/// Result of the two-sample permutation test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermutationOutcome {
    /// Observed energy statistic (computed on the same pooled distance
    /// matrix as the replicates).
    pub statistic: f64,
    /// (1 + #{replicate >= observed}) / (n_perm + 1).
    pub p_value: f64,
    pub n_perm: usize,
}

/// Two-sample energy permutation test. Requires n_perm >= 99 and at least
/// two points per sample. Reproducible from the seed.
pub fn permutation_test(
    a: &PairedSample,
    b: &PairedSample,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationOutcome> {
    if n_perm < 99 {
        return Err(Error::InvalidParameter(format!("n_perm must be at least 99, got {n_perm}")));
    }
    let n = a.pairs.len();
    let m = b.pairs.len();
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter("permutation test needs at least 2 points per sample".into()));
    }
    let pool: Vec<(GroupElement, GroupElement)> =
        a.pairs.iter().chain(b.pairs.iter()).copied().collect();
    let stats = if pool.len() <= DENSE_PATH_MIN_POOL {
        replicate_statistics_direct(&pool, n, n_perm, seed)
    } else {
        replicate_statistics_batched(&pool, n, n_perm, seed)
    };
    let observed = stats[0];
    let exceed = stats[1..].iter().filter(|&&s| s >= observed).count();
    Ok(PermutationOutcome {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (n_perm + 1) as f64,
        n_perm,
    })
}

/// Statistic of the split selected by `z` (true = first sample) given the
/// within-selection pair sum, the selection's total row sum, the pool total,
/// and the two sizes.
fn statistic_from_sums(s_aa: f64, t_a: f64, s_tot: f64, n: usize, m: usize) -> f64 {
    let s_ab = t_a - s_aa;
    let s_bb = s_tot - 2.0 * t_a + s_aa;
    2.0 * s_ab / (n * m) as f64 - s_aa / (n * n) as f64 - s_bb / (m * m) as f64
}

/// Observed plus replicate statistics, each computed directly in f64.
fn replicate_statistics_direct(
    pool: &[(GroupElement, GroupElement)],
    n: usize,
    n_perm: usize,
    seed: u64,
) -> Vec<f64> {
    let total = pool.len();
    let m = total - n;
    let d: Vec<f64> = (0..total * total)
        .map(|idx| pair_distance(&pool[idx / total], &pool[idx % total]))
        .collect();
    let row_sums: Vec<f64> =
        (0..total).map(|i| d[i * total..(i + 1) * total].iter().sum()).collect();
    let s_tot: f64 = row_sums.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selections: Vec<Vec<usize>> = vec![(0..n).collect()];
    for _ in 0..n_perm {
        selections.push(rand::seq::index::sample(&mut rng, total, n).into_vec());
    }
    selections
        .iter()
        .map(|sel| {
            let mut s_aa = 0.0;
            let mut t_a = 0.0;
            let mut member = vec![false; total];
            for &i in sel {
                member[i] = true;
                t_a += row_sums[i];
            }
            for &i in sel {
                let row = &d[i * total..(i + 1) * total];
                s_aa += row
                    .iter()
                    .zip(&member)
                    .filter_map(|(v, &inside)| inside.then_some(*v))
                    .sum::<f64>();
            }
            statistic_from_sums(s_aa, t_a, s_tot, n, m)
        })
        .collect()
}

/// Observed plus replicate statistics through the pooled f32 distance matrix:
/// stacking the replicate indicators as columns of Z turns every quadratic
/// form z^T D z into a column of D * Z, one matrix product for all
/// replicates.
fn replicate_statistics_batched(
    pool: &[(GroupElement, GroupElement)],
    n: usize,
    n_perm: usize,
    seed: u64,
) -> Vec<f64> {
    let total = pool.len();
    let m = total - n;
    let cols = n_perm + 1;

    let t1: Vec<f32> = pool.iter().map(|p| p.0.t as f32).collect();
    let t2: Vec<f32> = pool.iter().map(|p| p.1.t as f32).collect();
    // two-bit fiber code; xor-derived penalty counts differing coordinates
    let code: Vec<u8> = pool.iter().map(|p| p.0.k.as_u8() | (p.1.k.as_u8() << 1)).collect();
    let w2 = (DISCRETE_WEIGHT * DISCRETE_WEIGHT) as f32;

    let mut d = vec![0.0f32; total * total];
    let row_sums: Vec<f64> = d
        .par_chunks_mut(total)
        .enumerate()
        .map(|(i, row)| {
            let (t1i, t2i, ci) = (t1[i], t2[i], code[i]);
            for (((slot, &x1), &x2), &cj) in
                row.iter_mut().zip(&t1).zip(&t2).zip(&code)
            {
                let dx = t1i - x1;
                let dy = t2i - x2;
                let diff = ci ^ cj;
                let pen = ((diff & 1) + (diff >> 1)) as f32;
                *slot = (dx * dx + dy * dy + w2 * pen).sqrt();
            }
            row.iter().map(|&v| v as f64).sum()
        })
        .collect();
    let s_tot: f64 = row_sums.iter().sum();

    // column 0: the observed split; columns 1..: permutation replicates
    let mut z = vec![0.0f32; total * cols];
    for i in 0..n {
        z[i * cols] = 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in 1..cols {
        for i in rand::seq::index::sample(&mut rng, total, n).into_vec() {
            z[i * cols + p] = 1.0;
        }
    }

    let mut product = vec![0.0f32; total * cols];
    unsafe {
        matrixmultiply::sgemm(
            total,
            total,
            cols,
            1.0,
            d.as_ptr(),
            total as isize,
            1,
            z.as_ptr(),
            cols as isize,
            1,
            0.0,
            product.as_mut_ptr(),
            cols as isize,
            1,
        );
    }
    drop(d);

    let mut s_aa = vec![0.0f64; cols];
    let mut t_a = vec![0.0f64; cols];
    for ((zrow, crow), &rs) in z.chunks(cols).zip(product.chunks(cols)).zip(&row_sums) {
        for (((&zv, &cv), s), t) in
            zrow.iter().zip(crow).zip(s_aa.iter_mut()).zip(t_a.iter_mut())
        {
            if zv != 0.0 {
                *s += cv as f64;
                *t += rs;
            }
        }
    }
    (0..cols).map(|p| statistic_from_sums(s_aa[p], t_a[p], s_tot, n, m)).collect()
}
