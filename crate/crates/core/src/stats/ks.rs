use rand::Rng;

use super::{count_exceedances, PValue, Smoothing};
use crate::error::{Error, Result};
use crate::rng::tag;

fn statistic_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let above = (i + 1) as f64 / n - x;
            let below = x - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Two-sided KS distance `sup |F_n(t) - t|` between the empirical CDF of `p`
/// and the Uniform[0, 1] CDF.
pub fn ks_statistic_uniform(p: &[f64]) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::invalid("KS statistic needs at least one value"));
    }
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("value {bad} outside [0, 1]")));
    }
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(statistic_sorted(&sorted))
}

/// Monte-Carlo KS test of uniformity: the null distribution of the statistic
/// is sampled with `n_mc` sets of `p.len()` iid Uniform[0, 1] draws.
pub fn ks_uniformity_test(p: &[f64], n_mc: usize, seed: u64, smoothing: Smoothing) -> Result<PValue> {
    if n_mc == 0 {
        return Err(Error::invalid("need at least one Monte-Carlo draw"));
    }
    let observed = ks_statistic_uniform(p)?;
    let m = p.len();
    let exceed = count_exceedances(n_mc, seed, tag::MONTE_CARLO, |_, r| {
        let mut draw: Vec<f64> = (0..m).map(|_| r.random::<f64>()).collect();
        draw.sort_by(f64::total_cmp);
        statistic_sorted(&draw) >= observed
    });
    Ok(PValue::from_count(exceed, n_mc, smoothing))
}
