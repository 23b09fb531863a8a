//! Statistical machinery: categorical Kullback-Leibler divergence,
//! Kruskal-Wallis rank-sum tests with tie correction, the chi-square
//! survival function backing their p-values, and descriptive statistics.

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::musicology::Distribution;

/// Default additive smoothing constant for divergences between empirical
/// distributions with possibly disjoint support.
pub const DEFAULT_KLD_EPSILON: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Kullback-Leibler divergence
// ---------------------------------------------------------------------------

/// KL divergence D(P || Q) in bits between two categorical distributions.
///
/// Both distributions are extended to the union of their bin labels,
/// `epsilon` is added to every count, and both are renormalized before the
/// sum. With `epsilon = 0`, disjoint support yields infinity.
pub fn kld(p: &Distribution, q: &Distribution, epsilon: f64) -> Result<f64, StatsError> {
    let p_total = p.total();
    let q_total = q.total();
    if p_total <= 0.0 || q_total <= 0.0 {
        return Err(StatsError::BothEmpty);
    }

    // Union support: p's labels in order, then q's novel labels in order.
    let mut labels: Vec<&str> = p.bins().iter().map(|(label, _)| label.as_str()).collect();
    for (label, _) in q.bins() {
        if p.count(label).is_none() {
            labels.push(label);
        }
    }

    let union_size = labels.len() as f64;
    let p_denominator = p_total + epsilon * union_size;
    let q_denominator = q_total + epsilon * union_size;

    let mut divergence = 0.0;
    for label in labels {
        let p_i = (p.count(label).unwrap_or(0.0) + epsilon) / p_denominator;
        let q_i = (q.count(label).unwrap_or(0.0) + epsilon) / q_denominator;
        if p_i > 0.0 {
            divergence += p_i * (p_i / q_i).log2();
        }
    }
    Ok(divergence)
}

// ---------------------------------------------------------------------------
// Kruskal-Wallis rank-sum test
// ---------------------------------------------------------------------------

/// Result of a Kruskal-Wallis test: tie-corrected statistic, degrees of
/// freedom (groups − 1), upper-tail p-value, and the tie-correction factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwResult {
    pub statistic: f64,
    pub df: u32,
    pub p: f64,
    pub tie_correction: f64,
}

/// Kruskal-Wallis rank-sum test over k groups of real values.
///
/// Pooled values get midranks; the raw statistic is divided by the tie
/// correction `1 − Σ(t³−t)/(N³−N)` and referred to a chi-square
/// distribution with k−1 degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KwResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::DegenerateInput(
            "need at least 2 groups".to_string(),
        ));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::DegenerateInput("empty group".to_string()));
    }
    let n_total: usize = groups.iter().map(Vec::len).sum();
    if n_total < 3 {
        return Err(StatsError::DegenerateInput(
            "need at least 3 pooled values".to_string(),
        ));
    }
    if groups.iter().flatten().any(|v| !v.is_finite()) {
        return Err(StatsError::DegenerateInput("non-finite value".to_string()));
    }

    // Pool, sort, and assign midranks.
    let mut pooled: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(group_index, values)| values.iter().map(move |&v| (v, group_index)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = n_total as f64;
    let mut rank_sums = vec![0.0f64; groups.len()];
    let mut tie_sum = 0.0; // Σ (t³ − t) over tie groups
    let mut position = 0;
    while position < pooled.len() {
        let mut run_end = position + 1;
        while run_end < pooled.len() && pooled[run_end].0 == pooled[position].0 {
            run_end += 1;
        }
        let run_len = run_end - position;
        // ranks are 1-based; a run spanning positions p..run_end has midrank
        // (p+1 + run_end) / 2
        let midrank = (position + 1 + run_end) as f64 / 2.0;
        for &(_, group_index) in &pooled[position..run_end] {
            rank_sums[group_index] += midrank;
        }
        let t = run_len as f64;
        tie_sum += t * t * t - t;
        position = run_end;
    }

    let tie_correction = 1.0 - tie_sum / (n * n * n - n);
    if tie_correction <= 0.0 {
        return Err(StatsError::DegenerateInput(
            "all values identical".to_string(),
        ));
    }

    let mut h = 0.0;
    for (group, rank_sum) in groups.iter().zip(&rank_sums) {
        h += rank_sum * rank_sum / group.len() as f64;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    h /= tie_correction;

    let df = (groups.len() - 1) as u32;
    Ok(KwResult {
        statistic: h,
        df,
        p: chi_square_sf(h, df),
        tie_correction,
    })
}

// ---------------------------------------------------------------------------
// Chi-square survival function
// ---------------------------------------------------------------------------

/// Upper-tail probability P(X ≥ x) for a chi-square distribution with `df`
/// degrees of freedom, i.e. the regularized upper incomplete gamma
/// Q(df/2, x/2). Absolute error below 1e-10 over the tested range.
pub fn chi_square_sf(x: f64, df: u32) -> f64 {
    debug_assert!(df >= 1, "chi-square needs at least 1 degree of freedom");
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

const MAX_ITERATIONS: usize = 500;
const CONVERGENCE_EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

/// Regularized upper incomplete gamma Q(a, x) for a > 0, x ≥ 0.
/// Series expansion of P below x < a + 1, Lentz continued fraction above.
fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if log_prefactor < -700.0 {
        // prefactor underflows; the result is 0 or 1 depending on the side
        return if x < a { 1.0 } else { 0.0 };
    }
    let prefactor = log_prefactor.exp();

    if x < a + 1.0 {
        // P(a,x) = prefactor · Σ xⁿ / (a(a+1)…(a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denominator = a;
        for _ in 0..MAX_ITERATIONS {
            denominator += 1.0;
            term *= x / denominator;
            sum += term;
            if term.abs() < sum.abs() * CONVERGENCE_EPS {
                break;
            }
        }
        1.0 - prefactor * sum
    } else {
        // Q(a,x) = prefactor · continued fraction (modified Lentz)
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITERATIONS {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < CONVERGENCE_EPS {
                break;
            }
        }
        prefactor * h
    }
}

/// Natural log of the gamma function for positive arguments (Lanczos, g=7).
fn ln_gamma(x: f64) -> f64 {
    const COEFFICIENTS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_9;
    for (i, coefficient) in COEFFICIENTS.iter().enumerate() {
        acc += coefficient / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

// ---------------------------------------------------------------------------
// Descriptive statistics
// ---------------------------------------------------------------------------

/// Standard summary statistics; `std` is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

pub fn descriptive(values: &[f64]) -> Result<Descriptive, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;

    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };

    Ok(Descriptive {
        mean,
        median,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        std: variance.sqrt(),
    })
}
