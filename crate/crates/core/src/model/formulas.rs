//! Closed-form quantities feeding the outbreak model's CPTs.

use super::inputs::{Measure, PreventionProfile};
use super::ModelError;

/// Preventive index of one measure: `1 + (beta - alpha) / beta`, where
/// `alpha` and `beta` are infection percentages among people who do and do
/// not take the measure. Values above 1 mean the measure is protective.
pub fn preventive_index(alpha: f64, beta: f64) -> Result<f64, ModelError> {
    if !(beta > 0.0) {
        return Err(ModelError::ZeroBeta);
    }
    Ok(1.0 + (beta - alpha) / beta)
}

/// `base * prod_i (taken_i * PI_i + (1 - taken_i))`.
pub fn cumulative_pi(base: f64, profile: &PreventionProfile, indices: &[f64; 7]) -> f64 {
    Measure::ALL
        .iter()
        .zip(indices)
        .filter(|(m, _)| profile.is_taken(**m))
        .fold(base, |acc, (_, pi)| acc * pi)
}

/// Normalized product fusion of the age- and gender-conditional infection
/// rates: `a*g / (a*g + (1-a)(1-g))`.
pub fn vulnerability(a: f64, g: f64) -> Result<f64, ModelError> {
    for value in [a, g] {
        if !(0.0..=1.0).contains(&value) {
            return Err(ModelError::RateOutOfRange { value });
        }
    }
    let num = a * g;
    let den = num + (1.0 - a) * (1.0 - g);
    if den == 0.0 {
        return Err(ModelError::DegenerateRate);
    }
    Ok(num / den)
}

/// Raw infection pressure `ir / pi * (v + 1)`, before clamping.
pub fn has_covid_raw(ir: f64, pi: f64, vulnerable: bool) -> Result<f64, ModelError> {
    if !(pi > 0.0) {
        return Err(ModelError::NonpositivePi(pi));
    }
    let multiplier = if vulnerable { 2.0 } else { 1.0 };
    Ok(ir / pi * multiplier)
}

/// `P(HasCovid = Yes)` for infection rate `ir` in `[0, 1]`, cumulative
/// preventive index `pi` and vulnerability flag; clamped to 1.
pub fn has_covid_prob(ir: f64, pi: f64, vulnerable: bool) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&ir) {
        return Err(ModelError::RateOutOfRange { value: ir });
    }
    Ok(has_covid_raw(ir, pi, vulnerable)?.min(1.0))
}

/// Index of the grid value nearest to `value`; ties go to the lower index.
///
/// # Panics
/// If `grid` is empty.
pub fn snap_to_grid(value: f64, grid: &[f64]) -> usize {
    assert!(!grid.is_empty(), "snap_to_grid needs a nonempty grid");
    let mut best = 0;
    let mut best_dist = (grid[0] - value).abs();
    for (i, g) in grid.iter().enumerate().skip(1) {
        let d = (g - value).abs();
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    #[test]
    fn preventive_index_examples() {
        assert!((preventive_index(55.83, 80.81).unwrap() - 1.3091).abs() < 1e-4);
        assert!((preventive_index(63.52, 57.33).unwrap() - 0.8921).abs() < 1e-4);
        assert_eq!(preventive_index(42.0, 42.0).unwrap(), 1.0);
        assert_eq!(preventive_index(10.0, 0.0), Err(ModelError::ZeroBeta));
    }

    #[test]
    fn vulnerability_examples() {
        assert!((vulnerability(0.681, 0.657).unwrap() - 0.8035).abs() < 1e-4);
        assert_eq!(vulnerability(0.5, 0.5).unwrap(), 0.5);
        assert_eq!(vulnerability(1.0, 0.0), Err(ModelError::DegenerateRate));
        assert!(vulnerability(1.2, 0.5).is_err());
    }

    #[test]
    fn has_covid_examples() {
        assert_eq!(has_covid_prob(0.0, 1.3, true).unwrap(), 0.0);
        assert!((has_covid_prob(0.3, 1.5, false).unwrap() - 0.2).abs() < 1e-15);
        assert!((has_covid_raw(0.7, 1.0, true).unwrap() - 1.4).abs() < 1e-15);
        assert_eq!(has_covid_prob(0.7, 1.0, true).unwrap(), 1.0);
        assert_eq!(has_covid_prob(0.5, 0.0, false), Err(ModelError::NonpositivePi(0.0)));
    }

    #[test]
    fn snapping() {
        let grid = ModelConfig::default().pi_grid;
        assert_eq!(grid[snap_to_grid(1.2014, &grid)], 1.2);
        assert_eq!(snap_to_grid(0.0, &grid), 0);
        assert_eq!(snap_to_grid(99.0, &grid), grid.len() - 1);
        for (k, g) in grid.iter().enumerate() {
            assert_eq!(snap_to_grid(*g, &grid), k);
        }
        assert_eq!(snap_to_grid(1.5, &[1.0, 2.0]), 0);
    }
}
