use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::HarnessError;

/// Variance floor applied before forming the statistic, so a degenerate
/// sample with zero spread still yields a finite result when the means
/// differ.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Welch's unequal-variance t-test result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub dof: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's t statistic with Welch–Satterthwaite degrees of freedom and a
/// two-sided p-value from the Student-t distribution. Both samples need
/// at least two values; two constant, equal samples are degenerate.
pub fn welch_t_test(samples_a: &[f64], samples_b: &[f64]) -> Result<TTest, HarnessError> {
    if samples_a.len() < 2 || samples_b.len() < 2 {
        return Err(HarnessError::Config(
            "t-test needs at least two values per sample".into(),
        ));
    }
    let (mean_a, var_a) = mean_var(samples_a);
    let (mean_b, var_b) = mean_var(samples_b);
    if var_a == 0.0 && var_b == 0.0 && mean_a == mean_b {
        return Err(HarnessError::DegenerateVariance);
    }
    let va = var_a.max(VARIANCE_FLOOR);
    let vb = var_b.max(VARIANCE_FLOOR);
    let (na, nb) = (samples_a.len() as f64, samples_b.len() as f64);
    let se2 = va / na + vb / nb;
    let t = (mean_a - mean_b) / se2.sqrt();
    let dof = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).expect("dof is positive and finite");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(TTest {
        t,
        p,
        dof,
        mean_a,
        mean_b,
        n_a: samples_a.len(),
        n_b: samples_b.len(),
    })
}
