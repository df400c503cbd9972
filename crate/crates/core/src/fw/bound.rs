//! Upper bounds on `log Z` from a solver snapshot.

use super::engine::GapSnapshot;
use crate::error::{Error, Result};

/// Upper bound on `log Z` at the snapshot's iterate.
///
/// Without a certificate this is `TRW(x) + fw_gap`, valid when the gap came
/// from an exact oracle. With a certificate `kappa >= max_v <-grad f(x), v>`
/// it is `TRW(x) + kappa - <-grad f(x), x>`, valid for any oracle.
pub fn logz_upper_bound(snapshot: &GapSnapshot, kappa: Option<f64>) -> Result<f64> {
    let primal = -snapshot.objective;
    match kappa {
        None => Ok(primal + snapshot.fw_gap),
        Some(k) => {
            let energy = snapshot.vertex_energy;
            if k < energy - 1e-12 * energy.abs().max(1.0) {
                return Err(Error::InconsistentCertificate { kappa: k, energy });
            }
            Ok(primal + k - snapshot.iterate_energy)
        }
    }
}
