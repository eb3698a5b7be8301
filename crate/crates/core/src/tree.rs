//! Spherically homogeneous rooted trees, truncated at a finite depth.
//!
//! Vertices are addressed by digit strings; level `n` is identified with
//! the product of the first `n` digit alphabets, ordered lexicographically.
//! Boundary points survive only as depth-`d` path prefixes, and every
//! metric or cylinder statement is a statement about those prefixes.

use std::fmt;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact boundary distance: zero or a dyadic `1/2^m`.
pub type BoundaryDistance = Ratio<BigUint>;

/// Branching degrees `(m_1, …, m_d)` of a depth-`d` tree; `entries[k]`
/// is the number of children of a level-`k` vertex.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SphericalIndex {
    entries: Vec<usize>,
}

impl SphericalIndex {
    pub fn new(entries: Vec<usize>) -> Result<SphericalIndex> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig(
                "spherical index must be nonempty".into(),
            ));
        }
        if let Some(&bad) = entries.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidConfig(format!(
                "spherical index entries must be >= 2, got {bad}"
            )));
        }
        Ok(SphericalIndex { entries })
    }

    /// Constant index `(m, m, …, m)` of the given depth.
    pub fn constant(m: usize, depth: usize) -> Result<SphericalIndex> {
        SphericalIndex::new(vec![m; depth])
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Children count of a level-`level` vertex (`level < depth`).
    pub fn arity(&self, level: usize) -> usize {
        self.entries[level]
    }

    /// |V_n| = m_1 ⋯ m_n; the root level has size 1.
    pub fn level_size(&self, n: usize) -> Result<usize> {
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        let mut size: usize = 1;
        for &m in &self.entries[..n] {
            size = size
                .checked_mul(m)
                .ok_or_else(|| Error::InvalidConfig("level size overflows usize".into()))?;
        }
        Ok(size)
    }

    pub fn truncated(&self, depth: usize) -> Result<SphericalIndex> {
        if depth == 0 || depth > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: depth,
                depth: self.depth(),
            });
        }
        Ok(SphericalIndex {
            entries: self.entries[..depth].to_vec(),
        })
    }

    pub fn check_vertex(&self, v: &VertexAddress) -> Result<()> {
        if v.level() > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: v.level(),
                depth: self.depth(),
            });
        }
        for (k, &digit) in v.digits().iter().enumerate() {
            if digit >= self.entries[k] {
                return Err(Error::ShapeMismatch(format!(
                    "digit {digit} at position {k} exceeds arity {}",
                    self.entries[k]
                )));
            }
        }
        Ok(())
    }

    /// Lexicographic rank of a vertex within its level.
    pub fn vertex_rank(&self, v: &VertexAddress) -> usize {
        let mut rank = 0;
        for (k, &digit) in v.digits().iter().enumerate() {
            rank = rank * self.entries[k] + digit;
        }
        rank
    }

    pub fn vertex_from_rank(&self, level: usize, rank: usize) -> VertexAddress {
        let mut digits = vec![0usize; level];
        let mut r = rank;
        for k in (0..level).rev() {
            digits[k] = r % self.entries[k];
            r /= self.entries[k];
        }
        debug_assert_eq!(r, 0, "rank out of range");
        VertexAddress { digits }
    }

    pub fn parent(&self, v: &VertexAddress) -> Result<VertexAddress> {
        self.check_vertex(v)?;
        if v.level() == 0 {
            return Err(Error::Precondition("the root has no parent".into()));
        }
        Ok(v.truncated(v.level() - 1))
    }

    /// One-digit extensions of `v`, in digit order.
    pub fn children(&self, v: &VertexAddress) -> Result<Vec<VertexAddress>> {
        self.check_vertex(v)?;
        if v.level() >= self.depth() {
            return Err(Error::LevelOutOfRange {
                level: v.level() + 1,
                depth: self.depth(),
            });
        }
        Ok((0..self.arity(v.level()))
            .map(|d| {
                let mut digits = v.digits().to_vec();
                digits.push(d);
                VertexAddress { digits }
            })
            .collect())
    }

    /// Boundary ultrametric on depth-`d` prefixes: 0 when equal through
    /// depth `d`, else `1/2^m` with `m` the first disagreeing level.
    pub fn metric(&self, p: &PathPrefix, q: &PathPrefix) -> Result<BoundaryDistance> {
        self.check_path(p)?;
        self.check_path(q)?;
        for (k, (a, b)) in p.digits().iter().zip(q.digits()).enumerate() {
            if a != b {
                let m = k as u32 + 1;
                return Ok(Ratio::new(BigUint::one(), BigUint::from(2u32).pow(m)));
            }
        }
        Ok(Ratio::zero())
    }

    /// Whether the prefix passes through the vertex, i.e. lies in its
    /// clopen cylinder. The root cylinder is the whole boundary.
    pub fn in_cylinder(&self, p: &PathPrefix, v: &VertexAddress) -> bool {
        v.level() <= p.digits().len() && p.digits()[..v.level()] == *v.digits()
    }

    /// The residual set `V^n_i`: level-`i` descendants of `x_n` that are
    /// not descendants of `x_{n+1}`. For `i = n` this is the singleton
    /// `{x_n}`.
    pub fn residual_vertices(
        &self,
        x: &PathPrefix,
        n: usize,
        i: usize,
    ) -> Result<Vec<VertexAddress>> {
        self.check_path(x)?;
        if i > self.depth() || n > i {
            return Err(Error::LevelOutOfRange {
                level: i.max(n),
                depth: self.depth(),
            });
        }
        if i == n {
            return Ok(vec![x.vertex(n)]);
        }
        // prefix x_n, digit at position n different from the path
        let mut out = Vec::new();
        let size_below: usize = self.entries[n + 1..i].iter().product();
        for d in 0..self.entries[n] {
            if d == x.digits()[n] {
                continue;
            }
            let mut stem = x.digits()[..n].to_vec();
            stem.push(d);
            for r in 0..size_below {
                let mut digits = stem.clone();
                let mut rr = r;
                let mut tail = vec![0usize; i - n - 1];
                for k in (0..i - n - 1).rev() {
                    tail[k] = rr % self.entries[n + 1 + k];
                    rr /= self.entries[n + 1 + k];
                }
                digits.extend(tail);
                out.push(VertexAddress { digits });
            }
        }
        Ok(out)
    }

    pub fn check_path(&self, p: &PathPrefix) -> Result<()> {
        if p.digits().len() != self.depth() {
            return Err(Error::ShapeMismatch(format!(
                "path has {} digits, tree depth is {}",
                p.digits().len(),
                self.depth()
            )));
        }
        self.check_vertex(&VertexAddress {
            digits: p.digits().to_vec(),
        })
    }
}

/// A vertex, addressed by the digit string from the root.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VertexAddress {
    digits: Vec<usize>,
}

impl VertexAddress {
    pub fn root() -> VertexAddress {
        VertexAddress { digits: Vec::new() }
    }

    pub fn new(digits: Vec<usize>) -> VertexAddress {
        VertexAddress { digits }
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn truncated(&self, n: usize) -> VertexAddress {
        VertexAddress {
            digits: self.digits[..n].to_vec(),
        }
    }

    /// Parses the text form: comma-separated digits, empty = root.
    pub fn parse(s: &str) -> Result<VertexAddress> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(VertexAddress::root());
        }
        let digits = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad vertex digit {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(VertexAddress { digits })
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A boundary-point truncation: a vertex address of maximal depth.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PathPrefix {
    digits: Vec<usize>,
}

impl PathPrefix {
    pub fn new(index: &SphericalIndex, digits: Vec<usize>) -> Result<PathPrefix> {
        let p = PathPrefix { digits };
        index.check_path(&p)?;
        Ok(p)
    }

    /// The leftmost path: all digits zero.
    pub fn zeros(index: &SphericalIndex) -> PathPrefix {
        PathPrefix {
            digits: vec![0; index.depth()],
        }
    }

    /// Constructor for digits already known valid (e.g. zipped from
    /// validated factor paths).
    pub(crate) fn from_digits_unchecked(digits: Vec<usize>) -> PathPrefix {
        PathPrefix { digits }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// The path's vertex at level `n`.
    pub fn vertex(&self, n: usize) -> VertexAddress {
        VertexAddress {
            digits: self.digits[..n].to_vec(),
        }
    }

    pub fn as_vertex(&self) -> VertexAddress {
        VertexAddress {
            digits: self.digits.clone(),
        }
    }
}

impl fmt::Display for PathPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// JSON wire form of a vertex together with its tree shape:
/// `{"index":[2,3,2],"vertex":[0,1]}`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct VertexJson {
    pub index: Vec<usize>,
    pub vertex: Vec<usize>,
}

impl VertexJson {
    pub fn pack(index: &SphericalIndex, v: &VertexAddress) -> VertexJson {
        VertexJson {
            index: index.entries().to_vec(),
            vertex: v.digits().to_vec(),
        }
    }

    pub fn unpack(self) -> Result<(SphericalIndex, VertexAddress)> {
        let index = SphericalIndex::new(self.index)?;
        let v = VertexAddress::new(self.vertex);
        index.check_vertex(&v)?;
        Ok((index, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(entries: &[usize]) -> SphericalIndex {
        SphericalIndex::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn level_sizes() {
        let m = idx(&[2, 3, 2]);
        assert_eq!(m.level_size(2).unwrap(), 6);
        assert_eq!(m.level_size(0).unwrap(), 1);
        assert_eq!(idx(&[2, 2, 2, 2]).level_size(4).unwrap(), 16);
        assert!(m.level_size(4).is_err());
    }

    #[test]
    fn parent_and_children() {
        let m = idx(&[2, 2, 2]);
        let v = VertexAddress::new(vec![0, 1]);
        assert_eq!(m.parent(&v).unwrap(), VertexAddress::new(vec![0]));
        assert_eq!(
            m.children(&v).unwrap(),
            vec![
                VertexAddress::new(vec![0, 1, 0]),
                VertexAddress::new(vec![0, 1, 1])
            ]
        );
        assert_eq!(m.children(&VertexAddress::root()).unwrap().len(), 2);
        assert!(m.parent(&VertexAddress::root()).is_err());
    }

    #[test]
    fn metric_values() {
        let m = idx(&[2, 2, 2, 2]);
        let p = PathPrefix::new(&m, vec![0, 0, 0, 0]).unwrap();
        let q = PathPrefix::new(&m, vec![0, 0, 1, 0]).unwrap();
        // agree through level 2, differ at level 3
        assert_eq!(
            m.metric(&p, &q).unwrap(),
            Ratio::new(BigUint::one(), BigUint::from(8u32))
        );
        assert_eq!(m.metric(&p, &p).unwrap(), Ratio::zero());
        let r = PathPrefix::new(&m, vec![1, 0, 0, 0]).unwrap();
        assert_eq!(
            m.metric(&p, &r).unwrap(),
            Ratio::new(BigUint::one(), BigUint::from(2u32))
        );
    }

    #[test]
    fn cylinders() {
        let m = idx(&[2, 2, 2]);
        let p = PathPrefix::new(&m, vec![0, 0, 0]).unwrap();
        assert!(m.in_cylinder(&p, &VertexAddress::root()));
        assert!(m.in_cylinder(&p, &VertexAddress::new(vec![0])));
        let q = PathPrefix::new(&m, vec![0, 1, 0]).unwrap();
        assert!(!m.in_cylinder(&q, &VertexAddress::new(vec![0, 0])));
    }

    #[test]
    fn residual_sets() {
        let m = idx(&[2, 2, 2]);
        let x = PathPrefix::zeros(&m);
        assert_eq!(m.residual_vertices(&x, 1, 2).unwrap().len(), 1);
        assert_eq!(m.residual_vertices(&x, 1, 3).unwrap().len(), 2);
        assert_eq!(m.residual_vertices(&x, 0, 3).unwrap().len(), 4);
        assert_eq!(m.residual_vertices(&x, 1, 1).unwrap(), vec![x.vertex(1)]);
    }

    #[test]
    fn residuals_partition_each_level() {
        let m = idx(&[2, 3, 2]);
        let x = PathPrefix::new(&m, vec![1, 2, 0]).unwrap();
        for i in 0..=m.depth() {
            let mut all: Vec<VertexAddress> = Vec::new();
            for n in 0..=i {
                all.extend(m.residual_vertices(&x, n, i).unwrap());
            }
            assert_eq!(all.len(), m.level_size(i).unwrap());
            let set: std::collections::HashSet<_> = all.iter().collect();
            assert_eq!(set.len(), all.len(), "residuals overlap at level {i}");
        }
    }

    #[test]
    fn residual_count_formula() {
        let m = idx(&[3, 2, 4, 2]);
        let x = PathPrefix::zeros(&m);
        for n in 0..m.depth() {
            for i in n + 1..=m.depth() {
                let big: usize = m.entries()[n..i].iter().product();
                let small: usize = m.entries()[n + 1..i].iter().product();
                assert_eq!(
                    m.residual_vertices(&x, n, i).unwrap().len(),
                    big - small,
                    "count mismatch at V^{n}_{i}"
                );
            }
        }
    }

    #[test]
    fn ranks_round_trip() {
        let m = idx(&[2, 3, 2]);
        for level in 0..=m.depth() {
            for rank in 0..m.level_size(level).unwrap() {
                let v = m.vertex_from_rank(level, rank);
                assert_eq!(m.vertex_rank(&v), rank);
            }
        }
    }

    #[test]
    fn vertex_text_round_trip() {
        let v = VertexAddress::new(vec![0, 1]);
        assert_eq!(v.to_string(), "0,1");
        assert_eq!(VertexAddress::parse("0,1").unwrap(), v);
        assert_eq!(VertexAddress::parse("").unwrap(), VertexAddress::root());
    }

    #[test]
    fn vertex_json_round_trip() {
        let m = idx(&[2, 3, 2]);
        let v = VertexAddress::new(vec![0, 1]);
        let j = serde_json::to_string(&VertexJson::pack(&m, &v)).unwrap();
        assert_eq!(j, r#"{"index":[2,3,2],"vertex":[0,1]}"#);
        let back: VertexJson = serde_json::from_str(&j).unwrap();
        let (m2, v2) = back.unpack().unwrap();
        assert_eq!(m2, m);
        assert_eq!(v2, v);
    }
}
