//! Fixed-`N` sector of bosonic Fock space with a per-site occupation cap.
//!
//! States are occupation vectors ordered lexicographically (first site most
//! significant). Ranking counts the capped compositions that precede a state,
//! so lookups cost `O(L * n_max)` and need no hash table.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::Lattice;

pub type Occupation = u16;

#[derive(Debug, Clone, Serialize)]
pub struct FockBasis {
    #[serde(skip)]
    lattice: Arc<Lattice>,
    n_tot: usize,
    n_max: usize,
    dim: usize,
    #[serde(skip)]
    states: Vec<Occupation>,
    // counts[k][n]: ways to put n bosons on k sites with at most n_max each.
    #[serde(skip)]
    counts: Vec<Vec<u64>>,
}

impl FockBasis {
    pub fn enumerate(lattice: Arc<Lattice>, n_tot: usize, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return invalid("per-site cap n_max must be at least 1");
        }
        if n_max > Occupation::MAX as usize {
            return invalid(format!("per-site cap {n_max} too large"));
        }
        let sites = lattice.len();
        if n_tot > n_max * sites {
            return invalid(format!(
                "infeasible sector: {n_tot} particles exceed cap {n_max} x {sites} sites"
            ));
        }
        let counts = capped_counts(sites, n_tot, n_max);
        let dim = counts[sites][n_tot] as usize;

        let mut states = Vec::with_capacity(dim * sites);
        let mut cur = vec![0 as Occupation; sites];
        fill(&mut cur, 0, n_tot, n_max, &mut states);
        debug_assert_eq!(states.len(), dim * sites);

        Ok(FockBasis {
            lattice,
            n_tot,
            n_max,
            dim,
            states,
            counts,
        })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn n_tot(&self) -> usize {
        self.n_tot
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.lattice.len()
    }

    pub fn state(&self, index: usize) -> &[Occupation] {
        let l = self.sites();
        &self.states[index * l..(index + 1) * l]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[Occupation]> + '_ {
        self.states.chunks_exact(self.sites().max(1)).take(self.dim)
    }

    /// Index of `occ` in the basis.
    pub fn rank(&self, occ: &[Occupation]) -> Result<usize> {
        let l = self.sites();
        if occ.len() != l {
            return Err(Error::NotFound(format!(
                "occupation vector has {} entries, lattice has {l} sites",
                occ.len()
            )));
        }
        let total: usize = occ.iter().map(|&n| n as usize).sum();
        if total != self.n_tot {
            return Err(Error::NotFound(format!(
                "occupation total {total} differs from sector N = {}",
                self.n_tot
            )));
        }
        if let Some(&n) = occ.iter().find(|&&n| n as usize > self.n_max) {
            return Err(Error::NotFound(format!(
                "occupation {n} exceeds cap {}",
                self.n_max
            )));
        }
        Ok(self.rank_unchecked(occ))
    }

    pub(crate) fn rank_unchecked(&self, occ: &[Occupation]) -> usize {
        let l = occ.len();
        let mut remaining = self.n_tot;
        let mut index = 0u64;
        for (i, &n) in occ.iter().enumerate() {
            let rest = l - i - 1;
            for v in 0..n as usize {
                if v <= remaining {
                    index += self.counts[rest][remaining - v];
                }
            }
            remaining -= n as usize;
        }
        index as usize
    }

    /// Matrix element of `b_x^† b_y` on `occ`: the state with one boson moved
    /// from `y` to `x` and the amplitude `sqrt((n_x + 1) n_y)`. `None` if `b_y`
    /// annihilates the state or the cap forbids another boson on `x`.
    pub fn apply_hop(
        &self,
        occ: &[Occupation],
        x: usize,
        y: usize,
    ) -> Option<(Vec<Occupation>, f64)> {
        let mut out = occ.to_vec();
        let amp = hop_in_place(&mut out, x, y, self.n_max)?;
        Some((out, amp))
    }
}

/// In-place hop used by operator assembly. Leaves `occ` untouched on `None`.
pub(crate) fn hop_in_place(
    occ: &mut [Occupation],
    x: usize,
    y: usize,
    n_max: usize,
) -> Option<f64> {
    if x == y {
        return None;
    }
    let ny = occ[y] as usize;
    let nx = occ[x] as usize;
    if ny == 0 || nx >= n_max {
        return None;
    }
    occ[y] -= 1;
    occ[x] += 1;
    Some((((nx + 1) * ny) as f64).sqrt())
}

fn capped_counts(sites: usize, n_tot: usize, n_max: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; n_tot + 1]; sites + 1];
    counts[0][0] = 1;
    for k in 1..=sites {
        for n in 0..=n_tot {
            counts[k][n] = (0..=n.min(n_max))
                .map(|v| counts[k - 1][n - v])
                .fold(0u64, u64::saturating_add);
        }
    }
    counts
}

fn fill(cur: &mut [Occupation], pos: usize, remaining: usize, n_max: usize, out: &mut Vec<Occupation>) {
    let l = cur.len();
    if pos == l {
        if remaining == 0 {
            out.extend_from_slice(cur);
        }
        return;
    }
    let capacity_after = n_max * (l - pos - 1);
    let lo = remaining.saturating_sub(capacity_after);
    let hi = remaining.min(n_max);
    for v in lo..=hi {
        cur[pos] = v as Occupation;
        fill(cur, pos + 1, remaining - v, n_max, out);
    }
    cur[pos] = 0;
}
