//! Error measures against exact inference.

use trwfw_core::MarginalVector;

use crate::BenchError;

/// Mean over variables of `|mu_i(1) - mu*_i(1)|`; binary models only.
pub fn zeta_mu(mu: &MarginalVector, mu_star: &MarginalVector) -> Result<f64, BenchError> {
    if !mu.same_structure(mu_star) {
        return Err(BenchError::Spec("marginals over different models".into()));
    }
    let layout = mu.layout();
    let n = layout.num_vars();
    if let Some(v) = (0..n).find(|&v| layout.card(v) != 2) {
        return Err(BenchError::Spec(format!("variable {v} is not binary")));
    }
    Ok((0..n).map(|v| (mu.node(v)[1] - mu_star.node(v)[1]).abs()).sum::<f64>() / n as f64)
}

/// Error of the log-partition estimate. With an exact oracle the estimate is
/// the upper bound `primal + gap`, so the error is signed and nonnegative;
/// otherwise it is `|primal - truth|`.
pub fn zeta_logz(primal: f64, gap: f64, logz_true: f64, exact_oracle: bool) -> f64 {
    if exact_oracle {
        primal + gap - logz_true
    } else {
        (primal - logz_true).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trwfw_core::{BlockVector, MarkovRandomField};

    fn model(cards: Vec<usize>) -> MarkovRandomField {
        let n = cards.len();
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        let tables = edges.iter().map(|&(a, b)| vec![0.0; cards[a] * cards[b]]).collect();
        let nodes = cards.iter().map(|&c| vec![0.0; c]).collect();
        MarkovRandomField::new(cards, edges, nodes, tables).unwrap()
    }

    #[test]
    fn zeta_mu_examples() {
        let m = model(vec![2]);
        let a = BlockVector::from_vec(m.layout(), vec![1.0, 0.0]).unwrap();
        let b = BlockVector::from_vec(m.layout(), vec![0.0, 1.0]).unwrap();
        assert_eq!(zeta_mu(&a, &a).unwrap(), 0.0);
        assert_eq!(zeta_mu(&a, &b).unwrap(), 1.0);

        let m = model(vec![2, 2]);
        let a = BlockVector::from_vec(m.layout(), vec![0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25]).unwrap();
        let b = BlockVector::from_vec(m.layout(), vec![0.4, 0.6, 0.6, 0.4, 0.24, 0.16, 0.36, 0.24]).unwrap();
        assert!((zeta_mu(&a, &b).unwrap() - 0.1).abs() < 1e-15);

        let t = model(vec![3]);
        let c = BlockVector::from_vec(t.layout(), vec![1.0, 0.0, 0.0]).unwrap();
        assert!(zeta_mu(&c, &c).is_err());
        assert!(zeta_mu(&a, &BlockVector::from_vec(model(vec![2]).layout(), vec![0.5, 0.5]).unwrap()).is_err());
    }

    #[test]
    fn zeta_logz_examples() {
        assert_eq!(zeta_logz(3.0, 0.0, 3.0, true), 0.0);
        assert!((zeta_logz(10.0, 0.5, 10.2, true) - 0.3).abs() < 1e-12);
        assert!((zeta_logz(10.0, 0.5, 10.2, false) - 0.2).abs() < 1e-12);
    }
}
