//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use lrcone_core::{FockBasis, Lattice, SiteSet};

/// Chain of `len` sites with an `(n_tot, n_max)` sector.
pub fn chain_sector(len: i64, n_tot: usize, n_max: usize) -> (Arc<FockBasis>, SiteSet) {
    let lat = Arc::new(Lattice::chain(len).expect("positive length"));
    let basis = Arc::new(FockBasis::enumerate(Arc::clone(&lat), n_tot, n_max).expect("feasible sector"));
    (basis, SiteSet::all(lat))
}
