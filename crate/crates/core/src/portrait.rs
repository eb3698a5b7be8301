//! Tree automorphisms as portraits: one child permutation per internal
//! vertex.
//!
//! Decoration convention: the decoration sits at the *image* vertex, so
//! applying a portrait maps digits top-down and permutes digit `i+1` by
//! the decoration found at the already-mapped level-`i` ancestor. Under
//! this convention the wreath decomposition at level `i` reproduces the
//! two-coordinate action `(s, f)·(x, y) = (s(x), f(s(x))·y)` literally,
//! with `f` reading decorations off vertices of `V_i`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::tree::{SphericalIndex, VertexAddress};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Portrait {
    index: SphericalIndex,
    // decorations[level][vertex rank]: Perm of degree arity(level)
    decorations: Vec<Vec<Perm>>,
}

/// One permutation per level, acting coordinatewise.
#[derive(Clone, Debug)]
pub struct LevelPermTuple {
    index: SphericalIndex,
    perms: Vec<Perm>,
}

impl LevelPermTuple {
    pub fn new(index: SphericalIndex, perms: Vec<Perm>) -> Result<LevelPermTuple> {
        if perms.len() != index.depth() {
            return Err(Error::ShapeMismatch(format!(
                "{} level permutations for depth {}",
                perms.len(),
                index.depth()
            )));
        }
        for (k, p) in perms.iter().enumerate() {
            if p.degree() != index.arity(k) {
                return Err(Error::DegreeMismatch {
                    left: p.degree(),
                    right: index.arity(k),
                });
            }
        }
        Ok(LevelPermTuple { index, perms })
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }
}

impl Portrait {
    pub fn identity(index: &SphericalIndex) -> Portrait {
        let decorations = (0..index.depth())
            .map(|level| {
                let count = index.level_size(level).unwrap();
                vec![Perm::identity(index.arity(level)); count]
            })
            .collect();
        Portrait {
            index: index.clone(),
            decorations,
        }
    }

    /// The coordinatewise action of a level tuple: every vertex of level
    /// `i` carries the same decoration `g_{i+1}`.
    pub fn from_level_perms(tuple: &LevelPermTuple) -> Portrait {
        let index = tuple.index().clone();
        let decorations = (0..index.depth())
            .map(|level| {
                let count = index.level_size(level).unwrap();
                vec![tuple.perms()[level].clone(); count]
            })
            .collect();
        Portrait { index, decorations }
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    pub fn decoration(&self, level: usize, rank: usize) -> &Perm {
        &self.decorations[level][rank]
    }

    pub fn decoration_at(&self, v: &VertexAddress) -> Result<&Perm> {
        self.index.check_vertex(v)?;
        if v.level() >= self.depth() {
            return Err(Error::LevelOutOfRange {
                level: v.level(),
                depth: self.depth(),
            });
        }
        Ok(&self.decorations[v.level()][self.index.vertex_rank(v)])
    }

    pub fn set_decoration(&mut self, v: &VertexAddress, perm: Perm) -> Result<()> {
        self.index.check_vertex(v)?;
        if v.level() >= self.depth() {
            return Err(Error::LevelOutOfRange {
                level: v.level(),
                depth: self.depth(),
            });
        }
        if perm.degree() != self.index.arity(v.level()) {
            return Err(Error::DegreeMismatch {
                left: perm.degree(),
                right: self.index.arity(v.level()),
            });
        }
        let rank = self.index.vertex_rank(v);
        self.decorations[v.level()][rank] = perm;
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.decorations
            .iter()
            .all(|level| level.iter().all(|p| p.is_identity()))
    }

    /// Image of a vertex: digits are transformed top-down, each one
    /// permuted by the decoration at the already-mapped ancestor.
    pub fn apply(&self, v: &VertexAddress) -> VertexAddress {
        let mut out: Vec<usize> = Vec::with_capacity(v.level());
        let mut rank = 0usize;
        for (j, &digit) in v.digits().iter().enumerate() {
            let dec = &self.decorations[j][rank];
            let image = dec.apply(digit);
            rank = rank * self.index.arity(j) + image;
            out.push(image);
        }
        VertexAddress::new(out)
    }

    /// The permutation of `V_n` induced by `apply`, in lexicographic
    /// vertex order.
    pub fn level_restriction(&self, n: usize) -> Result<Perm> {
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        let mut current = Perm::identity(1);
        for j in 0..n {
            let m = self.index.arity(j);
            let size = self.index.level_size(j).unwrap();
            let mut images = vec![0usize; size * m];
            for r in 0..size {
                let r_image = current.apply(r);
                let dec = &self.decorations[j][r_image];
                for y in 0..m {
                    images[r * m + y] = r_image * m + dec.apply(y);
                }
            }
            current = Perm::from_images(images).expect("level restriction is a bijection");
        }
        Ok(current)
    }

    /// `self ∘ other` (the right factor acts first on vertices).
    pub fn compose(&self, other: &Portrait) -> Result<Portrait> {
        if self.index != other.index {
            return Err(Error::ShapeMismatch(
                "composing portraits over different trees".into(),
            ));
        }
        let mut decorations = Vec::with_capacity(self.depth());
        for level in 0..self.depth() {
            let self_level = self.level_restriction(level)?;
            let inv = self_level.inverse();
            let count = self.index.level_size(level).unwrap();
            let mut row = Vec::with_capacity(count);
            for w in 0..count {
                let b_rank = inv.apply(w);
                row.push(self.decorations[level][w].compose(&other.decorations[level][b_rank]));
            }
            decorations.push(row);
        }
        Ok(Portrait {
            index: self.index.clone(),
            decorations,
        })
    }

    pub fn inverse(&self) -> Portrait {
        let mut decorations = Vec::with_capacity(self.depth());
        for level in 0..self.depth() {
            let self_level = self.level_restriction(level).unwrap();
            let count = self.index.level_size(level).unwrap();
            let mut row = Vec::with_capacity(count);
            for v in 0..count {
                row.push(self.decorations[level][self_level.apply(v)].inverse());
            }
            decorations.push(row);
        }
        Portrait {
            index: self.index.clone(),
            decorations,
        }
    }

    /// Head permutation on `V_i` and per-vertex tail decorations; feeding
    /// the pair back through [`wreath_act`] reproduces the level-`i+1`
    /// restriction.
    pub fn wreath_decompose(&self, i: usize) -> Result<(Perm, Vec<Perm>)> {
        if i >= self.depth() {
            return Err(Error::LevelOutOfRange {
                level: i,
                depth: self.depth(),
            });
        }
        Ok((self.level_restriction(i)?, self.decorations[i].clone()))
    }

    /// Truncation to a shallower depth.
    pub fn truncated(&self, depth: usize) -> Result<Portrait> {
        let index = self.index.truncated(depth)?;
        Ok(Portrait {
            index,
            decorations: self.decorations[..depth].to_vec(),
        })
    }

    /// Recursive JSON form from the root; identity subtrees collapse to
    /// `null`.
    pub fn to_json(&self) -> Value {
        // identity flags per vertex, bottom-up
        let d = self.depth();
        let mut identity: Vec<Vec<bool>> = Vec::with_capacity(d);
        for level in 0..d {
            identity.push(vec![false; self.index.level_size(level).unwrap()]);
        }
        for level in (0..d).rev() {
            for rank in 0..identity[level].len() {
                let mut all_id = self.decorations[level][rank].is_identity();
                if all_id && level + 1 < d {
                    let m = self.index.arity(level);
                    for y in 0..m {
                        if !identity[level + 1][rank * m + y] {
                            all_id = false;
                            break;
                        }
                    }
                }
                identity[level][rank] = all_id;
            }
        }
        self.subtree_json(0, 0, &identity)
    }

    fn subtree_json(&self, level: usize, rank: usize, identity: &[Vec<bool>]) -> Value {
        if identity[level][rank] {
            return Value::Null;
        }
        let perm: Vec<usize> = self.decorations[level][rank].images();
        if level + 1 == self.depth() {
            json!({ "perm": perm })
        } else {
            let m = self.index.arity(level);
            let children: Vec<Value> = (0..m)
                .map(|y| self.subtree_json(level + 1, rank * m + y, identity))
                .collect();
            json!({ "perm": perm, "children": children })
        }
    }

    pub fn from_json(index: &SphericalIndex, value: &Value) -> Result<Portrait> {
        let mut portrait = Portrait::identity(index);
        portrait.fill_from_json(0, 0, value)?;
        Ok(portrait)
    }

    fn fill_from_json(&mut self, level: usize, rank: usize, value: &Value) -> Result<()> {
        if value.is_null() {
            return Ok(());
        }
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("portrait node must be an object or null".into()))?;
        let perm_val = obj
            .get("perm")
            .ok_or_else(|| Error::Parse("portrait node missing \"perm\"".into()))?;
        let images: Vec<usize> = serde_json::from_value(perm_val.clone())
            .map_err(|e| Error::Parse(format!("bad perm in portrait: {e}")))?;
        let perm = Perm::from_images(images)?;
        if perm.degree() != self.index.arity(level) {
            return Err(Error::DegreeMismatch {
                left: perm.degree(),
                right: self.index.arity(level),
            });
        }
        self.decorations[level][rank] = perm;
        if let Some(children) = obj.get("children") {
            if level + 1 >= self.depth() {
                if !children.is_null() && children.as_array().map_or(true, |a| !a.is_empty()) {
                    return Err(Error::Parse("children below the last level".into()));
                }
                return Ok(());
            }
            let arr = children
                .as_array()
                .ok_or_else(|| Error::Parse("children must be an array".into()))?;
            let m = self.index.arity(level);
            if arr.len() != m {
                return Err(Error::Parse(format!(
                    "expected {m} children, got {}",
                    arr.len()
                )));
            }
            for (y, child) in arr.iter().enumerate() {
                self.fill_from_json(level + 1, rank * m + y, child)?;
            }
        }
        Ok(())
    }

    /// Reconstructs a portrait from its leaf permutation. The permutation
    /// must respect sibling blocks level by level; otherwise it is not an
    /// automorphism of the truncated tree.
    pub fn from_leaf_perm(index: &SphericalIndex, leaf: &Perm) -> Result<Portrait> {
        let d = index.depth();
        let leaves = index.level_size(d)?;
        if leaf.degree() != leaves {
            return Err(Error::DegreeMismatch {
                left: leaf.degree(),
                right: leaves,
            });
        }
        // induced maps on every level, checked for block consistency
        let mut level_perms: Vec<Perm> = vec![Perm::identity(1); d + 1];
        level_perms[d] = leaf.clone();
        for level in (0..d).rev() {
            let m = index.arity(level);
            let size = index.level_size(level)?;
            let below = &level_perms[level + 1];
            let mut images = vec![usize::MAX; size];
            for r in 0..size {
                let target = below.apply(r * m) / m;
                for y in 1..m {
                    if below.apply(r * m + y) / m != target {
                        return Err(Error::ShapeMismatch(format!(
                            "permutation splits the sibling block of vertex {r} at level {level}"
                        )));
                    }
                }
                images[r] = target;
            }
            level_perms[level] = Perm::from_images(images)
                .map_err(|_| Error::ShapeMismatch("induced level map is not a bijection".into()))?;
        }
        let mut decorations = Vec::with_capacity(d);
        for level in 0..d {
            let m = index.arity(level);
            let size = index.level_size(level)?;
            let head = &level_perms[level];
            let below = &level_perms[level + 1];
            let mut row = vec![Perm::identity(m); size];
            for r in 0..size {
                // decoration lives at the image vertex
                let r_image = head.apply(r);
                let mut images = vec![0usize; m];
                for y in 0..m {
                    images[y] = below.apply(r * m + y) % m;
                }
                row[r_image] = Perm::from_images(images)?;
            }
            decorations.push(row);
        }
        let portrait = Portrait {
            index: index.clone(),
            decorations,
        };
        debug_assert_eq!(&portrait.level_restriction(d).unwrap(), leaf);
        Ok(portrait)
    }
}

/// The wreath action on a pair: `(s, f)·(x, y) = (s(x), f(s(x))·y)`.
pub fn wreath_act(s: &Perm, f: &[Perm], pair: (usize, usize)) -> (usize, usize) {
    let (x, y) = pair;
    let sx = s.apply(x);
    (sx, f[sx].apply(y))
}

/// The permutation of `V_n` induced by a permutation of the leaf level.
/// Fails if the leaf permutation does not respect sibling blocks.
pub fn induced_level_perm(index: &SphericalIndex, leaf: &Perm, n: usize) -> Result<Perm> {
    let d = index.depth();
    if leaf.degree() != index.level_size(d)? {
        return Err(Error::DegreeMismatch {
            left: leaf.degree(),
            right: index.level_size(d)?,
        });
    }
    if n > d {
        return Err(Error::LevelOutOfRange { level: n, depth: d });
    }
    let mut current = leaf.clone();
    for level in (n..d).rev() {
        let m = index.arity(level);
        let size = index.level_size(level)?;
        let mut images = vec![usize::MAX; size];
        for r in 0..size {
            let target = current.apply(r * m) / m;
            for y in 1..m {
                if current.apply(r * m + y) / m != target {
                    return Err(Error::ShapeMismatch(format!(
                        "leaf permutation splits the sibling block of vertex {r} at level {level}"
                    )));
                }
            }
            images[r] = target;
        }
        current = Perm::from_images(images)
            .map_err(|_| Error::ShapeMismatch("induced level map is not a bijection".into()))?;
    }
    Ok(current)
}
