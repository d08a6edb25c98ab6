//! Finite boxes of `Z^d` with the Euclidean metric.
//!
//! Coordinates are centered: an extent `n` covers `-(n-1)/2 ..= n/2` (integer
//! division), so odd extents are symmetric around the origin. Boundaries are
//! open.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};

pub type Coord = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    dim: usize,
    extents: Vec<usize>,
    sites: Vec<Coord>,
    origin_index: usize,
}

impl Lattice {
    pub fn new(dim: usize, extents: &[i64]) -> Result<Self> {
        if dim == 0 {
            return invalid("lattice dimension must be at least 1");
        }
        if extents.len() != dim {
            return invalid(format!(
                "expected {dim} extents, got {}",
                extents.len()
            ));
        }
        if let Some(bad) = extents.iter().find(|&&e| e < 1) {
            return invalid(format!("lattice extents must be positive, got {bad}"));
        }
        let extents: Vec<usize> = extents.iter().map(|&e| e as usize).collect();
        let lows: Vec<i64> = extents.iter().map(|&e| -((e as i64 - 1) / 2)).collect();

        // Odometer over the box; last axis fastest gives lexicographic order.
        let total: usize = extents.iter().product();
        let mut sites = Vec::with_capacity(total);
        let mut cur = lows.clone();
        for _ in 0..total {
            sites.push(cur.clone());
            for axis in (0..dim).rev() {
                cur[axis] += 1;
                if cur[axis] < lows[axis] + extents[axis] as i64 {
                    break;
                }
                cur[axis] = lows[axis];
            }
        }
        let origin_index = sites
            .iter()
            .position(|c| c.iter().all(|&v| v == 0))
            .expect("centered box always contains the origin");
        Ok(Lattice {
            dim,
            extents,
            sites,
            origin_index,
        })
    }

    pub fn chain(len: i64) -> Result<Self> {
        Lattice::new(1, &[len])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Coord] {
        &self.sites
    }

    pub fn coord(&self, index: usize) -> &[i64] {
        &self.sites[index]
    }

    pub fn origin_index(&self) -> usize {
        self.origin_index
    }

    /// Index of the site with the given coordinates, if it lies in the box.
    pub fn index_of(&self, coord: &[i64]) -> Option<usize> {
        if coord.len() != self.dim {
            return None;
        }
        let mut idx = 0usize;
        for (axis, &c) in coord.iter().enumerate() {
            let n = self.extents[axis] as i64;
            let off = c + (n - 1) / 2;
            if off < 0 || off >= n {
                return None;
            }
            idx = idx * self.extents[axis] + off as usize;
        }
        Some(idx)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        dist(&self.sites[a], &self.sites[b])
    }

    /// Euclidean norm of a site's coordinates, i.e. its distance to the origin.
    pub fn norm(&self, a: usize) -> f64 {
        self.sites[a]
            .iter()
            .map(|&v| (v * v) as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Label such as `10` or `3x3`.
    pub fn extents_label(&self) -> String {
        self.extents
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("x")
    }
}

fn dist(a: &[i64], b: &[i64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| ((x - y) * (x - y)) as f64)
        .sum::<f64>()
        .sqrt()
}

fn squared_dist(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Sorted, duplicate-free subset of a lattice.
#[derive(Debug, Clone)]
pub struct SiteSet {
    lattice: Arc<Lattice>,
    members: Vec<usize>,
}

impl PartialEq for SiteSet {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && *self.lattice == *other.lattice
    }
}

impl SiteSet {
    pub fn new(lattice: Arc<Lattice>, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&m| m >= lattice.len()) {
            return invalid(format!(
                "site index {bad} out of range for lattice of {} sites",
                lattice.len()
            ));
        }
        members.sort_unstable();
        members.dedup();
        Ok(SiteSet { lattice, members })
    }

    pub fn all(lattice: Arc<Lattice>) -> Self {
        let n = lattice.len();
        SiteSet {
            lattice,
            members: (0..n).collect(),
        }
    }

    pub fn singleton(lattice: Arc<Lattice>, site: usize) -> Result<Self> {
        SiteSet::new(lattice, [site])
    }

    pub fn empty(lattice: Arc<Lattice>) -> Self {
        SiteSet {
            lattice,
            members: Vec::new(),
        }
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.members.binary_search(&site).is_ok()
    }

    pub fn is_subset_of(&self, other: &SiteSet) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.members.iter().all(|&m| !other.contains(m))
    }

    pub fn covers_lattice(&self) -> bool {
        self.members.len() == self.lattice.len()
    }

    /// Indicator vector over all lattice sites.
    pub fn indicator(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.lattice.len()];
        for &m in &self.members {
            out[m] = 1.0;
        }
        out
    }

    /// `X[R]`: every lattice site within Euclidean distance `radius` of the set.
    pub fn enlarge(&self, radius: f64) -> Result<SiteSet> {
        if self.members.is_empty() {
            return invalid("cannot enlarge an empty site set");
        }
        if !(radius >= 0.0) {
            return invalid(format!("enlargement radius must be >= 0, got {radius}"));
        }
        let lat = &self.lattice;
        let members = (0..lat.len()).filter(|&y| {
            self.members
                .iter()
                .any(|&x| within(lat.coord(x), lat.coord(y), radius))
        });
        SiteSet::new(Arc::clone(lat), members)
    }

    /// `d(X) = 1 + max pairwise distance`.
    pub fn diameter(&self) -> Result<f64> {
        if self.members.is_empty() {
            return invalid("diameter of an empty site set");
        }
        let lat = &self.lattice;
        let mut best = 0i64;
        for (i, &a) in self.members.iter().enumerate() {
            for &b in &self.members[i + 1..] {
                best = best.max(squared_dist(lat.coord(a), lat.coord(b)));
            }
        }
        Ok(1.0 + (best as f64).sqrt())
    }

    /// Ordered nearest-neighbour pairs `(x, y)` with `|x - y| = 1`; both
    /// orientations of each bond are listed.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let lat = &self.lattice;
        let mut out = Vec::new();
        for &x in &self.members {
            for &y in &self.members {
                if squared_dist(lat.coord(x), lat.coord(y)) == 1 {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn coords(&self) -> Vec<Coord> {
        self.members
            .iter()
            .map(|&m| self.lattice.coord(m).to_vec())
            .collect()
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:?}")?;
        }
        write!(f, "}}")
    }
}

// Integer coordinates: compare squared distances exactly when the radius
// squared is an integer, otherwise against a tiny slack.
fn within(a: &[i64], b: &[i64], radius: f64) -> bool {
    let d2 = squared_dist(a, b) as f64;
    d2 <= radius * radius * (1.0 + 1e-12) + 1e-12
}

/// `B_r(x)`.
pub fn ball(lattice: &Arc<Lattice>, center: usize, radius: f64) -> Result<SiteSet> {
    if center >= lattice.len() {
        return invalid(format!("ball center {center} out of range"));
    }
    if !(radius >= 0.0) {
        return invalid(format!("ball radius must be >= 0, got {radius}"));
    }
    SiteSet::singleton(Arc::clone(lattice), center)?.enlarge(radius)
}
