use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::DegenerateFit(
            "values must be positive and finite".into(),
        ));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 1e-24 * n {
        return Err(Error::DegenerateFit("abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::crossover_distance;

    #[test]
    fn cubic() {
        let pts: Vec<_> = (1..8)
            .map(|n| (n as f64, 0.3 * (n as f64).powi(3)))
            .collect();
        assert!((fit_power_law(&pts).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn synthetic_crossover_exponent() {
        // c3 ~ n^4, defect ~ n^-3  =>  R_c = (4 c3^2 / d^2)^(1/6) ~ n^(14/6)
        let pts: Vec<_> = (40..80)
            .step_by(5)
            .map(|n| {
                let n = n as f64;
                (
                    n,
                    crossover_distance(1e-6 * n.powi(4), 1e4 * n.powi(-3)).unwrap(),
                )
            })
            .collect();
        assert!((fit_power_law(&pts).unwrap() - 14.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(fit_power_law(&[(1.0, -1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
    }
}
