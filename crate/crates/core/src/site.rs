//! Finite causal sites: partial orders of spacetime points and the region
//! operations used by every causal condition (pasts, exclusive pasts,
//! joint and mutual pasts, spacelike separation).

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::bits;

/// Maximum number of points in a site.
pub const MAX_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SiteError {
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("order relation is cyclic: `{0}` and `{1}` precede each other")]
    Cycle(String, String),
    #[error("site has {0} points, at most {MAX_POINTS} are supported")]
    TooManyPoints(usize),
    #[error("regions belong to different sites")]
    SiteMismatch,
    #[error("spacelike separation is undefined for an empty region")]
    EmptyRegion,
}

/// A finite partial order of points. The relation is stored reflexively and
/// transitively closed; construction rejects cycles.
#[derive(Debug, Clone)]
pub struct CausalSite {
    names: Vec<String>,
    index: HashMap<String, usize>,
    /// `down[y]` = { x : x ≼ y }
    down: Vec<u64>,
    /// `up[x]` = { y : x ≼ y }
    up: Vec<u64>,
    id: u64,
}

impl PartialEq for CausalSite {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.down == other.down
    }
}

impl Eq for CausalSite {}

/// A set of points of one site. Cheap to copy; carries the fingerprint of
/// the site it was made for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    site: u64,
    members: u64,
}

impl Region {
    pub fn members(&self) -> u64 {
        self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn len(&self) -> usize {
        self.members.count_ones() as usize
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.members & !other.members == 0
    }

    pub fn union(&self, other: &Region) -> Region {
        Region { site: self.site, members: self.members | other.members }
    }

    pub fn intersection(&self, other: &Region) -> Region {
        Region { site: self.site, members: self.members & other.members }
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region { site: self.site, members: self.members & !other.members }
    }

    pub fn contains_point(&self, point: usize) -> bool {
        point < 64 && self.members >> point & 1 == 1
    }

    pub fn points(&self) -> impl Iterator<Item = usize> {
        bits::ones(self.members)
    }
}

impl CausalSite {
    /// Build a site from point names and strict order pairs `(x, y)` meaning
    /// x ≺ y. The pairs need not be transitively closed.
    pub fn new<S, P>(points: impl IntoIterator<Item = S>, order: impl IntoIterator<Item = (P, P)>) -> Result<Self, SiteError>
    where
        S: Into<String>,
        P: AsRef<str>,
    {
        let names: Vec<String> = points.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(SiteError::DuplicatePoint(n.clone()));
            }
        }
        let mut pairs = Vec::new();
        for (x, y) in order {
            let xi = *index.get(x.as_ref()).ok_or_else(|| SiteError::UnknownPoint(x.as_ref().to_string()))?;
            let yi = *index.get(y.as_ref()).ok_or_else(|| SiteError::UnknownPoint(y.as_ref().to_string()))?;
            pairs.push((xi, yi));
        }
        Self::from_indices(names, &pairs)
    }

    /// Build a site from names and strict order pairs given by index.
    pub fn from_indices(names: Vec<String>, order: &[(usize, usize)]) -> Result<Self, SiteError> {
        let n = names.len();
        if n > MAX_POINTS {
            return Err(SiteError::TooManyPoints(n));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(SiteError::DuplicatePoint(name.clone()));
            }
        }
        // up[x] holds every y with x ≼ y
        let mut up: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for &(x, y) in order {
            if x >= n {
                return Err(SiteError::UnknownPoint(format!("#{x}")));
            }
            if y >= n {
                return Err(SiteError::UnknownPoint(format!("#{y}")));
            }
            if x == y {
                return Err(SiteError::Cycle(names[x].clone(), names[y].clone()));
            }
            up[x] |= 1 << y;
        }
        for k in 0..n {
            for i in 0..n {
                if up[i] >> k & 1 == 1 {
                    up[i] |= up[k];
                }
            }
        }
        for i in 0..n {
            for j in bits::ones(up[i] & !(1u64 << i)) {
                if up[j] >> i & 1 == 1 {
                    return Err(SiteError::Cycle(names[i].clone(), names[j].clone()));
                }
            }
        }
        let mut down = vec![0u64; n];
        for (x, &reach) in up.iter().enumerate() {
            for y in bits::ones(reach) {
                down[y] |= 1 << x;
            }
        }
        let mut h = DefaultHasher::new();
        names.hash(&mut h);
        down.hash(&mut h);
        let id = h.finish();
        Ok(CausalSite { names, index, down, up, id })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, point: usize) -> &str {
        &self.names[point]
    }

    pub fn point(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Fingerprint shared by structurally identical sites.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// x ≼ y (reflexive order).
    pub fn precedes_or_eq(&self, x: usize, y: usize) -> bool {
        self.up[x] >> y & 1 == 1
    }

    /// Mask of all points.
    pub fn all_mask(&self) -> u64 {
        bits::low_mask(self.len())
    }

    pub fn full_region(&self) -> Region {
        self.region_from_mask(self.all_mask())
    }

    pub fn empty_region(&self) -> Region {
        self.region_from_mask(0)
    }

    /// Region from a bit mask over point indices. Bits beyond the site are
    /// dropped.
    pub fn region_from_mask(&self, mask: u64) -> Region {
        Region { site: self.id, members: mask & self.all_mask() }
    }

    pub fn region<S: AsRef<str>>(&self, names: impl IntoIterator<Item = S>) -> Result<Region, SiteError> {
        let mut mask = 0u64;
        for n in names {
            let p = self.point(n.as_ref()).ok_or_else(|| SiteError::UnknownPoint(n.as_ref().to_string()))?;
            mask |= 1 << p;
        }
        Ok(self.region_from_mask(mask))
    }

    pub fn owns(&self, region: &Region) -> bool {
        region.site == self.id
    }

    pub fn region_names(&self, region: &Region) -> Vec<String> {
        region.points().map(|p| self.names[p].clone()).collect()
    }

    /// Every region of the site, in increasing mask order.
    pub fn all_regions(&self) -> impl Iterator<Item = Region> + '_ {
        bits::subsets(self.all_mask()).map(move |m| self.region_from_mask(m))
    }

    /// Strict order pairs of the transitive reduction (covering relation).
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.len() {
            let strict_up = self.up[x] & !(1u64 << x);
            for y in bits::ones(strict_up) {
                // y covers x unless some z lies strictly between
                let between = strict_up & self.down[y] & !(1u64 << y);
                if between == 0 {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Points with no other point to their past.
    pub fn minimal_points(&self) -> Region {
        let mut mask = 0;
        for x in 0..self.len() {
            if self.down[x] == 1 << x {
                mask |= 1 << x;
            }
        }
        self.region_from_mask(mask)
    }

    fn past_mask(&self, members: u64) -> u64 {
        bits::ones(members).fold(0, |acc, y| acc | self.down[y])
    }

    /// J⁻(R): every point to the past of, or equal to, a point of R.
    pub fn past(&self, region: &Region) -> Region {
        debug_assert!(self.owns(region));
        self.region_from_mask(self.past_mask(region.members))
    }

    /// J⁻(R) \ R.
    pub fn exclusive_past(&self, region: &Region) -> Region {
        debug_assert!(self.owns(region));
        self.region_from_mask(self.past_mask(region.members) & !region.members)
    }

    fn check_pair(&self, a: &Region, b: &Region) -> Result<(), SiteError> {
        if a.site != b.site || !self.owns(a) {
            return Err(SiteError::SiteMismatch);
        }
        Ok(())
    }

    /// (J⁻(A) ∪ J⁻(B)) \ (A ∪ B).
    pub fn joint_past(&self, a: &Region, b: &Region) -> Result<Region, SiteError> {
        self.check_pair(a, b)?;
        let both = a.members | b.members;
        Ok(self.region_from_mask(self.past_mask(both) & !both))
    }

    /// J⁻(A) ∩ J⁻(B).
    pub fn mutual_past(&self, a: &Region, b: &Region) -> Result<Region, SiteError> {
        self.check_pair(a, b)?;
        Ok(self.region_from_mask(self.past_mask(a.members) & self.past_mask(b.members)))
    }

    /// No point of `a` is order-comparable to (or equal to) a point of `b`.
    pub fn is_spacelike(&self, a: &Region, b: &Region) -> Result<bool, SiteError> {
        self.check_pair(a, b)?;
        if a.is_empty() || b.is_empty() {
            return Err(SiteError::EmptyRegion);
        }
        Ok(a.points().all(|x| (self.down[x] | self.up[x]) & b.members == 0))
    }

    /// All ordered pairs (A, B) of non-empty, mutually spacelike regions.
    pub fn spacelike_pairs(&self) -> Vec<(Region, Region)> {
        let all = self.all_mask();
        let mut out = Vec::new();
        for a in bits::subsets(all).filter(|&m| m != 0) {
            let reach = bits::ones(a).fold(0, |acc, x| acc | self.down[x] | self.up[x]);
            for b in bits::subsets(all & !reach).filter(|&m| m != 0) {
                out.push((self.region_from_mask(a), self.region_from_mask(b)));
            }
        }
        out
    }
}

impl fmt::Display for CausalSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names.join(", "))?;
        for (x, y) in self.covering_pairs() {
            write!(f, " {}<{}", self.names[x], self.names[y])?;
        }
        Ok(())
    }
}
