//! Group chains arising from tree actions.
//!
//! A [`LevelGroupSystem`] is a spherical index together with generator
//! portraits; the group at level `n` is generated by the level-`n`
//! restrictions. The stabilizer chain `G_n` of a boundary path, the
//! normal cores `C_n`, and the discriminant truncation are all computed
//! on a combined domain `V_0 ⊔ V_1 ⊔ … ⊔ V_d` where each path vertex is
//! a single point, so one hinted stabilizer chain certifies every level
//! at once.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{PermGroup, StabChain};
use crate::perm::Perm;
use crate::portrait::Portrait;
use crate::tree::{PathPrefix, SphericalIndex, VertexAddress};

/// A compatible family of permutation groups acting on the vertex levels
/// of a truncated tree: the finite shadow of an acting group.
#[derive(Debug)]
pub struct LevelGroupSystem {
    index: SphericalIndex,
    generators: Vec<Portrait>,
    levels: Vec<OnceLock<PermGroup>>,
}

impl Clone for LevelGroupSystem {
    fn clone(&self) -> Self {
        // memoized groups are cheap to recompute; drop them
        LevelGroupSystem::new(self.index.clone(), self.generators.clone())
            .expect("validated on construction")
    }
}

impl LevelGroupSystem {
    pub fn new(index: SphericalIndex, generators: Vec<Portrait>) -> Result<LevelGroupSystem> {
        for g in &generators {
            if g.index() != &index {
                return Err(Error::ShapeMismatch(
                    "generator portrait over a different tree".into(),
                ));
            }
        }
        let levels = (0..=index.depth()).map(|_| OnceLock::new()).collect();
        Ok(LevelGroupSystem {
            index,
            generators,
            levels,
        })
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    pub fn generators(&self) -> &[Portrait] {
        &self.generators
    }

    /// The group generated by level-`n` restrictions of the generators.
    pub fn level_group(&self, n: usize) -> Result<&PermGroup> {
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        if self.levels[n].get().is_none() {
            let degree = self.index.level_size(n)?;
            let gens: Vec<Perm> = self
                .generators
                .iter()
                .map(|g| g.level_restriction(n))
                .collect::<Result<_>>()?;
            let group = PermGroup::new(degree, gens)?;
            let _ = self.levels[n].set(group);
        }
        Ok(self.levels[n].get().unwrap())
    }

    /// The same system truncated to a shallower depth.
    pub fn truncated(&self, depth: usize) -> Result<LevelGroupSystem> {
        let index = self.index.truncated(depth)?;
        let generators = self
            .generators
            .iter()
            .map(|g| g.truncated(depth))
            .collect::<Result<Vec<_>>>()?;
        LevelGroupSystem::new(index, generators)
    }

    // ---- combined-domain machinery ----

    /// Offsets of each level's block inside `V_0 ⊔ … ⊔ V_d`.
    pub(crate) fn combined_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.depth() + 2);
        let mut acc = 0usize;
        for n in 0..=self.depth() {
            offsets.push(acc);
            acc += self.index.level_size(n).unwrap();
        }
        offsets.push(acc);
        offsets
    }

    pub(crate) fn combined_point(&self, offsets: &[usize], v: &VertexAddress) -> usize {
        offsets[v.level()] + self.index.vertex_rank(v)
    }

    /// A generator's action on the combined domain.
    fn combined_perm(&self, g: &Portrait, offsets: &[usize]) -> Result<Perm> {
        let total = offsets[self.depth() + 1];
        let mut images = vec![0usize; total];
        for n in 0..=self.depth() {
            let restriction = g.level_restriction(n)?;
            for r in 0..self.index.level_size(n)? {
                images[offsets[n] + r] = offsets[n] + restriction.apply(r);
            }
        }
        Perm::from_images(images)
    }

    pub(crate) fn combined_generators(&self, offsets: &[usize]) -> Result<Vec<Perm>> {
        self.generators
            .iter()
            .map(|g| self.combined_perm(g, offsets))
            .collect()
    }

    /// Restricts a combined-domain permutation to the leaf block `V_d`.
    pub(crate) fn leaf_part(&self, offsets: &[usize], g: &Perm) -> Perm {
        let start = offsets[self.depth()];
        let size = offsets[self.depth() + 1] - start;
        let images: Vec<usize> = (0..size).map(|r| g.apply(start + r) - start).collect();
        Perm::from_images(images).expect("leaf block is invariant")
    }

    /// Builds a combined-domain chain with the given base hint (combined
    /// point ids) and all generators inserted.
    pub(crate) fn hinted_chain(&self, hint: &[usize]) -> Result<StabChain> {
        let offsets = self.combined_offsets();
        let mut chain = StabChain::new(offsets[self.depth() + 1], hint);
        for g in self.combined_generators(&offsets)? {
            chain.push_generator(g);
        }
        Ok(chain)
    }

    // ---- chain operations ----

    /// The vertex stabilizer chain `G_0 ⊇ G_1 ⊇ … ⊇ G_d` along a path,
    /// every `G_n` represented on the deepest level. The index
    /// `|G : G_n|` is certified against the orbit size of `x_n`.
    pub fn vertex_stabilizer_chain(&self, x: &PathPrefix) -> Result<ChainPoint> {
        self.index.check_path(x)?;
        let d = self.depth();
        let offsets = self.combined_offsets();
        let hint: Vec<usize> = (1..=d)
            .map(|n| self.combined_point(&offsets, &x.vertex(n)))
            .collect();
        let chain = self.hinted_chain(&hint)?;

        let full_order = chain.order();
        let mut levels = Vec::with_capacity(d + 1);
        for n in 0..=d {
            let order = chain.level_order(n);
            let generators: Vec<Perm> = chain
                .level_generators(n)
                .iter()
                .map(|g| self.leaf_part(&offsets, g))
                .collect();
            // |G : G_n| must be the orbit size of x_n
            let index_in_g = &full_order / &order;
            let orbit_len = if n == 0 {
                BigUint::one()
            } else {
                let point = self.combined_point(&offsets, &x.vertex(n));
                BigUint::from(orbit_size_under(
                    &self.combined_generators(&offsets)?,
                    offsets[d + 1],
                    point,
                ))
            };
            if index_in_g != orbit_len {
                return Err(Error::Certification(format!(
                    "|G : G_{n}| = {index_in_g} but orbit of x_{n} has {orbit_len} points"
                )));
            }
            levels.push(ChainLevel {
                order,
                generators,
                group: OnceLock::new(),
            });
        }
        Ok(ChainPoint {
            path: x.clone(),
            leaf_degree: self.index.level_size(d)?,
            levels,
        })
    }

    /// The normal core `C_n`: kernel of the restriction homomorphism from
    /// the depth-`d` level group to the level-`n` action. For the
    /// transitive actions built here this is the core of `G_n`, since the
    /// core is the kernel of the action on `G/G_n ↔ V_n`. Certified
    /// normal, and certified against |G| = |kernel| · |level-n image|.
    pub fn normal_core(&self, n: usize) -> Result<PermGroup> {
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        let d = self.depth();
        let offsets = self.combined_offsets();
        let hint: Vec<usize> = (0..self.index.level_size(n)?)
            .map(|r| offsets[n] + r)
            .collect();
        let chain = self.hinted_chain(&hint)?;
        let kernel_gens: Vec<Perm> = chain
            .level_generators(hint.len())
            .iter()
            .map(|g| self.leaf_part(&offsets, g))
            .collect();
        let kernel = PermGroup::new(self.index.level_size(d)?, kernel_gens)?;

        let image_order = self.level_group(n)?.order().clone();
        let full_order = self.level_group(d)?.order().clone();
        if kernel.order() * &image_order != full_order {
            return Err(Error::Certification(format!(
                "kernel order {} times image order {image_order} is not |G| = {full_order}",
                kernel.order()
            )));
        }
        // normality: conjugates of kernel generators stay in the kernel
        let full = self.level_group(d)?;
        for g in full.generators() {
            let g_inv = g.inverse();
            for k in kernel.generators() {
                let conj = g.compose(k).compose(&g_inv);
                if !kernel.contains(&conj)? {
                    return Err(Error::Certification(
                        "kernel is not closed under conjugation".into(),
                    ));
                }
            }
        }
        Ok(kernel)
    }

    /// The stabilizer of the entire path prefix in the depth-`d` level
    /// group: the finite shadow of the discriminant group.
    pub fn discriminant_truncation(&self, x: &PathPrefix) -> Result<PermGroup> {
        let chain = self.vertex_stabilizer_chain(x)?;
        Ok(chain.level(self.depth()).group().clone())
    }

    /// Labels the vertices of `V_n` by cosets `G/G_n` via an orbit
    /// transversal rooted at `x_n`, and certifies the isotropy conjugation
    /// identity `Iso(U_{g,m}) = g G_m g⁻¹` generator-wise.
    pub fn coset_labeling(&self, x: &PathPrefix, n: usize) -> Result<CosetLabeling> {
        self.index.check_path(x)?;
        if n > self.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        let group = self.level_group(n)?;
        if !group.is_transitive() {
            return Err(Error::NotTransitive);
        }
        let base = x.vertex(n);
        let base_rank = self.index.vertex_rank(&base);
        let degree = group.degree();

        let mut transversal: Vec<Option<Perm>> = vec![None; degree];
        transversal[base_rank] = Some(Perm::identity(degree));
        let mut queue = vec![base_rank];
        let mut i = 0;
        while i < queue.len() {
            let p = queue[i];
            i += 1;
            for g in group.generators() {
                let q = g.apply(p);
                if transversal[q].is_none() {
                    transversal[q] = Some(g.compose(transversal[p].as_ref().unwrap()));
                    queue.push(q);
                }
            }
        }
        let transversal: Vec<Perm> = transversal
            .into_iter()
            .map(|t| t.expect("transitive action reaches every vertex"))
            .collect();

        // conjugation certificate: t_v Stab(x_n) t_v⁻¹ fixes v
        let stabilizer = group.point_stabilizer(base_rank)?;
        for (v, t) in transversal.iter().enumerate() {
            let t_inv = t.inverse();
            for s in stabilizer.generators() {
                let conj = t.compose(s).compose(&t_inv);
                if conj.apply(v) != v {
                    return Err(Error::Certification(format!(
                        "conjugated stabilizer fails to fix vertex {v}"
                    )));
                }
            }
        }
        if group.order() != &(stabilizer.order() * BigUint::from(degree)) {
            return Err(Error::Certification(
                "coset count disagrees with orbit-stabilizer".into(),
            ));
        }
        Ok(CosetLabeling {
            level: n,
            base,
            transversal,
            stabilizer,
        })
    }
}

fn orbit_size_under(gens: &[Perm], degree: usize, p: usize) -> usize {
    let mut seen = vec![false; degree];
    seen[p] = true;
    let mut queue = vec![p];
    let mut i = 0;
    while i < queue.len() {
        let q = queue[i];
        i += 1;
        for g in gens {
            let r = g.apply(q);
            if !seen[r] {
                seen[r] = true;
                queue.push(r);
            }
        }
    }
    queue.len()
}

/// One level of a vertex stabilizer chain: generators and certified order
/// of `G_n`, as permutations of the deepest level.
#[derive(Debug)]
pub struct ChainLevel {
    order: BigUint,
    generators: Vec<Perm>,
    group: OnceLock<PermGroup>,
}

impl ChainLevel {
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }
}

/// A boundary path together with its stabilizer chain.
#[derive(Debug)]
pub struct ChainPoint {
    path: PathPrefix,
    leaf_degree: usize,
    levels: Vec<ChainLevel>,
}

impl ChainPoint {
    pub fn path(&self) -> &PathPrefix {
        &self.path
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> ChainLevelView<'_> {
        ChainLevelView { point: self, n }
    }

    pub fn order(&self, n: usize) -> &BigUint {
        &self.levels[n].order
    }

    pub fn generators(&self, n: usize) -> &[Perm] {
        &self.levels[n].generators
    }

    /// The stabilizer `G_n` as a certified group on the deepest level;
    /// built on first use.
    pub fn group_at(&self, n: usize) -> &PermGroup {
        self.levels[n].group.get_or_init(|| {
            let g = PermGroup::new(self.leaf_degree, self.levels[n].generators.clone())
                .expect("chain generators share the leaf degree");
            assert_eq!(
                g.order(),
                &self.levels[n].order,
                "rebuilt stabilizer order disagrees with the master chain"
            );
            g
        })
    }
}

/// Borrowed view of a chain level exposing the lazily-built group.
pub struct ChainLevelView<'a> {
    point: &'a ChainPoint,
    n: usize,
}

impl<'a> ChainLevelView<'a> {
    pub fn order(&self) -> &BigUint {
        self.point.order(self.n)
    }

    pub fn generators(&self) -> &[Perm] {
        self.point.generators(self.n)
    }

    pub fn group(&self) -> &'a PermGroup {
        self.point.group_at(self.n)
    }
}

/// Coset labeling `V_n ↔ G/G_n`: vertex `v` carries the transversal
/// element mapping the base vertex to `v`.
#[derive(Debug)]
pub struct CosetLabeling {
    pub level: usize,
    pub base: VertexAddress,
    /// indexed by vertex rank; entry `v` maps `rank(base)` to `v`
    pub transversal: Vec<Perm>,
    pub stabilizer: PermGroup,
}

/// Wire form of a system: spherical index plus generator portraits.
#[derive(Serialize, Deserialize)]
pub struct SystemJson {
    pub index: Vec<usize>,
    pub generators: Vec<Value>,
}

impl SystemJson {
    pub fn pack(sys: &LevelGroupSystem) -> SystemJson {
        SystemJson {
            index: sys.index().entries().to_vec(),
            generators: sys.generators().iter().map(|g| g.to_json()).collect(),
        }
    }

    pub fn unpack(self) -> Result<LevelGroupSystem> {
        let index = SphericalIndex::new(self.index)?;
        let generators = self
            .generators
            .iter()
            .map(|v| Portrait::from_json(&index, v))
            .collect::<Result<Vec<_>>>()?;
        LevelGroupSystem::new(index, generators)
    }
}
