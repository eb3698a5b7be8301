//! Finite permutations of `{0, …, degree−1}`.
//!
//! A [`Perm`] stores its image list. Composition follows function
//! application: `g.compose(&h)` maps `p` to `g(h(p))`, the right factor
//! acting first. Points are plain `usize` indices; callers that act on
//! richer objects (vertices, cosets) keep their own labeling.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Box<[u32]>,
}

/// Sign of a permutation, read off its cycle decomposition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

impl Perm {
    pub fn identity(degree: usize) -> Perm {
        Perm {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from its image list, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Perm> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {x} out of range for degree {n}"
                )));
            }
            if seen[x] {
                return Err(Error::InvalidPermutation(format!("image {x} repeated")));
            }
            seen[x] = true;
        }
        Ok(Perm {
            images: images.into_iter().map(|x| x as u32).collect(),
        })
    }

    /// Builds a permutation of the given degree from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Perm> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &p) in cycle.iter().enumerate() {
                if p >= degree {
                    return Err(Error::PointOutOfRange { point: p, degree });
                }
                if touched[p] {
                    return Err(Error::InvalidPermutation(format!(
                        "point {p} appears in two cycles"
                    )));
                }
                touched[p] = true;
                images[p] = cycle[(i + 1) % cycle.len()];
            }
        }
        Perm::from_images(images)
    }

    /// Single cycle through the listed points.
    pub fn cycle(degree: usize, points: &[usize]) -> Result<Perm> {
        Perm::from_cycles(degree, &[points.to_vec()])
    }

    pub fn transposition(degree: usize, a: usize, b: usize) -> Result<Perm> {
        Perm::from_cycles(degree, &[vec![a, b]])
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, p: usize) -> usize {
        self.images[p] as usize
    }

    /// Preimage of `p`, by scan.
    pub fn apply_inverse(&self, p: usize) -> usize {
        self.images.iter().position(|&x| x as usize == p).unwrap()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn smallest_moved_point(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|(i, &x)| *i as u32 != x)
            .map(|(i, _)| i)
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    /// `self ∘ other`: the right factor acts first, so the result maps
    /// `p` to `self(other(p))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(
            self.degree(),
            other.degree(),
            "composing permutations of unequal degree"
        );
        Perm {
            images: other
                .images
                .iter()
                .map(|&p| self.images[p as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0u32; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u32;
        }
        Perm {
            images: images.into(),
        }
    }

    /// Nontrivial cycles, each starting at its smallest point, sorted by
    /// that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] || self.apply(start) == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut p = self.apply(start);
            while p != start {
                seen[p] = true;
                cycle.push(p);
                p = self.apply(p);
            }
            out.push(cycle);
        }
        out
    }

    /// `g^k`; negative `k` powers the inverse. Computed cycle-wise.
    pub fn power(&self, k: i64) -> Perm {
        let mut images: Vec<u32> = (0..self.degree() as u32).collect();
        for cycle in self.cycles() {
            let len = cycle.len() as i64;
            let shift = k.rem_euclid(len) as usize;
            for (i, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(i + shift) % cycle.len()] as u32;
            }
        }
        Perm {
            images: images.into(),
        }
    }

    /// `g^k` for arbitrary-precision non-negative exponents.
    pub fn power_big(&self, k: &BigUint) -> Perm {
        let mut images: Vec<u32> = (0..self.degree() as u32).collect();
        for cycle in self.cycles() {
            let len = BigUint::from(cycle.len());
            let shift = (k % &len).to_usize().unwrap();
            for (i, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(i + shift) % cycle.len()] as u32;
            }
        }
        Perm {
            images: images.into(),
        }
    }

    /// Order as the lcm of cycle lengths. Arbitrary precision: already at
    /// degree ~100 the order can exceed 64 bits.
    pub fn order(&self) -> BigUint {
        self.cycles()
            .iter()
            .fold(BigUint::one(), |acc, c| acc.lcm(&BigUint::from(c.len())))
    }

    pub fn parity(&self) -> Parity {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn order_and_parity(&self) -> (BigUint, Parity) {
        (self.order(), self.parity())
    }

    pub fn commutes_with(&self, other: &Perm) -> bool {
        self.compose(other) == other.compose(self)
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, &x) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Perm {
    type Err = Error;

    /// Accepts the one-line image list `[1,2,0]` or cycle notation
    /// `(0 1 2)(3 4)`. For cycle notation the degree is the largest point
    /// mentioned plus one.
    fn from_str(s: &str) -> Result<Perm> {
        parse_perm(s)
    }
}

pub fn parse_perm(s: &str) -> Result<Perm> {
    let s = s.trim();
    if s.starts_with('[') {
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("unterminated image list: {s}")))?;
        let images = parse_points(inner)?;
        Perm::from_images(images)
    } else if s.starts_with('(') {
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {s}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unterminated cycle in {s}")))?;
            cycles.push(parse_points(&open[..close])?);
            rest = open[close + 1..].trim_start();
        }
        let degree = cycles.iter().flatten().max().map(|&m| m + 1).unwrap_or(0);
        Perm::from_cycles(degree, &cycles)
    } else {
        Err(Error::Parse(format!(
            "expected image list [..] or cycles (..): {s}"
        )))
    }
}

/// Cycle-notation parse with an explicit degree; image lists must match it.
pub fn parse_perm_with_degree(s: &str, degree: usize) -> Result<Perm> {
    let p = parse_perm(s)?;
    if p.degree() == degree {
        return Ok(p);
    }
    if p.degree() < degree && s.trim_start().starts_with('(') {
        let mut images = p.images();
        images.extend(p.degree()..degree);
        return Perm::from_images(images);
    }
    Err(Error::DegreeMismatch {
        left: p.degree(),
        right: degree,
    })
}

fn parse_points(s: &str) -> Result<Vec<usize>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad point {t:?}")))
        })
        .collect()
}

/// The non-commuting stabilizer witness: given an even `g ≠ id` fixing
/// `x` on at least 5 points, returns a 3-cycle `τ` with `τ(x) = x` and
/// `gτ ≠ τg`. Deterministic: `y` is the smallest moved point and `u` the
/// smallest point outside `{x, y, g(y), g⁻¹(y)}`.
pub fn noncommuting_stabilizer_witness(g: &Perm, x: usize) -> Result<Perm> {
    let n = g.degree();
    if n < 5 {
        return Err(Error::Precondition(format!(
            "witness needs at least 5 points, got {n}"
        )));
    }
    if x >= n {
        return Err(Error::PointOutOfRange {
            point: x,
            degree: n,
        });
    }
    if g.is_identity() {
        return Err(Error::Precondition("witness needs g != identity".into()));
    }
    if g.apply(x) != x {
        return Err(Error::Precondition(format!("g does not fix x = {x}")));
    }
    if g.parity() != Parity::Even {
        return Err(Error::Precondition("witness needs an even g".into()));
    }
    let y = g.smallest_moved_point().unwrap();
    let gy = g.apply(y);
    let giy = g.apply_inverse(y);
    let u = (0..n)
        .find(|&p| p != x && p != y && p != gy && p != giy)
        .expect("n >= 5 leaves a point outside the excluded set");
    let tau = Perm::cycle(n, &[y, giy, u])?;
    debug_assert_eq!(tau.apply(x), x);
    debug_assert!(!g.commutes_with(&tau));
    Ok(tau)
}
