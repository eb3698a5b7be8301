//! Permutation groups with certified orders and membership.
//!
//! A [`PermGroup`] is backed by a base and strong generating set built with
//! a deterministic Schreier–Sims procedure ([`StabChain`]). Once the chain
//! is complete, the group order is the exact product of the basic orbit
//! lengths, membership is decided by sifting, and the subgroup stabilizing
//! a prefix of the base can be read off directly. Construction accepts an
//! optional base hint so that callers can line the chain up with a path of
//! tree vertices and harvest the whole stabilizer chain from one build.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::perm::Perm;

/// Base and strong generating set, built incrementally.
///
/// Level `l` owns a base point `b_l`. The generators visible at level `l`
/// are all strong generators placed at levels `>= l`; they generate the
/// subgroup of the whole group stabilizing `b_0, …, b_{l-1}` pointwise
/// once the chain is complete. Every `push_generator` leaves the chain
/// complete, so orders and membership answers are exact at all times.
#[derive(Debug, Clone)]
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
    arena: Vec<Perm>,
    placed_at: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Level {
    base: usize,
    orbit: Vec<usize>,
    transversal: Vec<Option<Perm>>,
    // per arena index: number of orbit positions already paired with it
    cursors: Vec<usize>,
}

impl Level {
    fn new(degree: usize, base: usize) -> Level {
        let mut transversal = vec![None; degree];
        transversal[base] = Some(Perm::identity(degree));
        Level {
            base,
            orbit: vec![base],
            transversal,
            cursors: Vec::new(),
        }
    }
}

enum Sift {
    Member,
    Residue(Perm, usize),
}

impl StabChain {
    /// Empty chain. Hinted base points become the leading levels, in
    /// order, so stabilizers of hint prefixes are addressable afterwards.
    pub fn new(degree: usize, base_hint: &[usize]) -> StabChain {
        let mut levels = Vec::new();
        let mut seen = HashSet::new();
        for &b in base_hint {
            assert!(b < degree, "base hint point out of range");
            if seen.insert(b) {
                levels.push(Level::new(degree, b));
            }
        }
        StabChain {
            degree,
            levels,
            arena: Vec::new(),
            placed_at: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn push_generator(&mut self, g: Perm) {
        assert_eq!(g.degree(), self.degree, "generator degree mismatch");
        if g.is_identity() {
            return;
        }
        match self.sift_from(0, g) {
            Sift::Member => {}
            Sift::Residue(res, level) => self.place(res, level, 0),
        }
    }

    /// Exact membership test.
    pub fn contains(&self, g: &Perm) -> bool {
        if g.degree() != self.degree {
            return false;
        }
        matches!(self.sift_from(0, g.clone()), Sift::Member)
    }

    /// |group|.
    pub fn order(&self) -> BigUint {
        self.level_order(0)
    }

    /// Order of the subgroup stabilizing the first `level` base points.
    pub fn level_order(&self, level: usize) -> BigUint {
        self.levels[level..]
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Strong generators for the subgroup stabilizing the first `level`
    /// base points pointwise.
    pub fn level_generators(&self, level: usize) -> Vec<Perm> {
        self.arena
            .iter()
            .zip(&self.placed_at)
            .filter(|(_, &at)| at >= level)
            .map(|(g, _)| g.clone())
            .collect()
    }

    pub fn orbit_len(&self, level: usize) -> usize {
        self.levels[level].orbit.len()
    }

    fn sift_from(&self, start: usize, mut g: Perm) -> Sift {
        for l in start..self.levels.len() {
            let base = self.levels[l].base;
            let p = g.apply(base);
            if p == base {
                continue;
            }
            match &self.levels[l].transversal[p] {
                None => return Sift::Residue(g, l),
                Some(u) => g = u.inverse().compose(&g),
            }
        }
        if g.is_identity() {
            Sift::Member
        } else {
            Sift::Residue(g, self.levels.len())
        }
    }

    fn place(&mut self, g: Perm, level: usize, stop: usize) {
        let level = if level == self.levels.len() {
            let b = g.smallest_moved_point().expect("residue is not identity");
            self.levels.push(Level::new(self.degree, b));
            self.levels.len() - 1
        } else {
            level
        };
        self.arena.push(g);
        self.placed_at.push(level);
        for l in (stop..=level).rev() {
            self.complete_level(l);
        }
    }

    /// Processes all outstanding (orbit point, generator) pairs at `level`:
    /// growing the basic orbit, and sifting Schreier generators into the
    /// deeper chain. Pairs already processed stay valid when deeper levels
    /// grow, so each pair is visited once.
    fn complete_level(&mut self, level: usize) {
        while let Some((gi, k)) = self.next_pair(level) {
            self.levels[level].cursors[gi] = k + 1;
            let p = self.levels[level].orbit[k];
            if p == self.levels[level].base && self.placed_at[gi] > level {
                // the Schreier generator is the generator itself, which
                // already lives in the deeper list
                continue;
            }
            let s = self.arena[gi].clone();
            let sp = s.apply(p);
            if self.levels[level].transversal[sp].is_none() {
                let rep = self.levels[level].transversal[p]
                    .as_ref()
                    .expect("orbit point has a representative");
                let new_rep = s.compose(rep);
                self.levels[level].transversal[sp] = Some(new_rep);
                self.levels[level].orbit.push(sp);
                continue;
            }
            let u_p = self.levels[level].transversal[p].clone().unwrap();
            let u_sp = self.levels[level].transversal[sp].clone().unwrap();
            let schreier = u_sp.inverse().compose(&s).compose(&u_p);
            if schreier.is_identity() {
                continue;
            }
            match self.sift_from(level + 1, schreier) {
                Sift::Member => {}
                Sift::Residue(res, j) => {
                    debug_assert!(j > level);
                    self.place(res, j, level + 1);
                }
            }
        }
    }

    fn next_pair(&mut self, level: usize) -> Option<(usize, usize)> {
        let lv = &mut self.levels[level];
        if lv.cursors.len() < self.arena.len() {
            lv.cursors.resize(self.arena.len(), 0);
        }
        let orbit_len = lv.orbit.len();
        for gi in 0..self.arena.len() {
            if self.placed_at[gi] >= level && lv.cursors[gi] < orbit_len {
                return Some((gi, lv.cursors[gi]));
            }
        }
        None
    }
}

/// Result of a primitivity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Primitivity {
    Primitive,
    /// A nontrivial block system preserved by the group: blocks are sorted
    /// internally and ordered by their minima.
    Imprimitive {
        blocks: Vec<Vec<usize>>,
    },
}

/// Outcome of checking a candidate equivariant quotient map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuotientVerdict {
    /// The map is equivariant; the induced generator actions on the
    /// quotient are returned. When the group is primitive this also
    /// certifies |Q| = 1 or |Q| = |S|.
    Consistent { induced: Vec<Perm> },
    /// Fibers are not permuted consistently: `f(s) = f(t)` but the images
    /// under `generator` land in different fibers.
    NotEquivariant {
        generator: usize,
        s: usize,
        t: usize,
    },
    /// Equivariant, group primitive, yet 1 < |Q| < |S|. Never reachable
    /// for actually primitive groups; returned rather than asserted so a
    /// broken caller gets diagnostics instead of an abort.
    PrimitivityViolation { s_size: usize, q_size: usize },
}

/// A finite permutation group given by generators, with a complete
/// stabilizer chain built at construction.
#[derive(Debug, Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Perm>,
    chain: StabChain,
    order: BigUint,
}

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Perm>) -> Result<PermGroup> {
        PermGroup::with_base_hint(degree, generators, &[])
    }

    /// Builds the group with the leading base points forced to `hint`.
    pub fn with_base_hint(
        degree: usize,
        generators: Vec<Perm>,
        hint: &[usize],
    ) -> Result<PermGroup> {
        if degree == 0 {
            return Err(Error::InvalidConfig("degree must be positive".into()));
        }
        for p in hint {
            if *p >= degree {
                return Err(Error::PointOutOfRange { point: *p, degree });
            }
        }
        let mut kept = Vec::new();
        for g in generators {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    left: g.degree(),
                    right: degree,
                });
            }
            if !g.is_identity() && !kept.contains(&g) {
                kept.push(g);
            }
        }
        let mut chain = StabChain::new(degree, hint);
        for g in &kept {
            chain.push_generator(g.clone());
        }
        let order = chain.order();
        Ok(PermGroup {
            degree,
            generators: kept,
            chain,
            order,
        })
    }

    pub fn trivial(degree: usize) -> PermGroup {
        PermGroup::new(degree, Vec::new()).expect("degree checked by caller")
    }

    /// Sym(n), generated by a transposition and an n-cycle.
    pub fn symmetric(n: usize) -> PermGroup {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Perm::transposition(n, 0, 1).unwrap());
        }
        if n >= 3 {
            gens.push(Perm::cycle(n, &(0..n).collect::<Vec<_>>()).unwrap());
        }
        PermGroup::new(n.max(1), gens).unwrap()
    }

    /// Alt(n), generated by consecutive 3-cycles.
    pub fn alternating(n: usize) -> PermGroup {
        let mut gens = Vec::new();
        for i in 0..n.saturating_sub(2) {
            gens.push(Perm::cycle(n, &[i, i + 1, i + 2]).unwrap());
        }
        PermGroup::new(n.max(1), gens).unwrap()
    }

    /// C(n): the cyclic group generated by the n-cycle.
    pub fn cyclic(n: usize) -> PermGroup {
        let gens = if n >= 2 {
            vec![Perm::cycle(n, &(0..n).collect::<Vec<_>>()).unwrap()]
        } else {
            Vec::new()
        };
        PermGroup::new(n.max(1), gens).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order == BigUint::one()
    }

    pub fn chain(&self) -> &StabChain {
        &self.chain
    }

    /// Exact membership test.
    pub fn contains(&self, g: &Perm) -> Result<bool> {
        if g.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                left: g.degree(),
                right: self.degree,
            });
        }
        Ok(self.chain.contains(g))
    }

    /// Orbit of `p`, sorted.
    pub fn orbit(&self, p: usize) -> Result<Vec<usize>> {
        if p >= self.degree {
            return Err(Error::PointOutOfRange {
                point: p,
                degree: self.degree,
            });
        }
        let mut seen = vec![false; self.degree];
        seen[p] = true;
        let mut queue = vec![p];
        let mut i = 0;
        while i < queue.len() {
            let q = queue[i];
            i += 1;
            for g in &self.generators {
                let r = g.apply(q);
                if !seen[r] {
                    seen[r] = true;
                    queue.push(r);
                }
            }
        }
        queue.sort_unstable();
        Ok(queue)
    }

    pub fn is_transitive(&self) -> bool {
        self.orbit(0)
            .map(|o| o.len() == self.degree)
            .unwrap_or(false)
    }

    /// Generators of the full stabilizer of `p`, certified by the
    /// orbit–stabilizer count |G| = |orbit(p)| · |stabilizer|.
    pub fn point_stabilizer(&self, p: usize) -> Result<PermGroup> {
        if p >= self.degree {
            return Err(Error::PointOutOfRange {
                point: p,
                degree: self.degree,
            });
        }
        let mut chain = StabChain::new(self.degree, &[p]);
        for g in &self.generators {
            chain.push_generator(g.clone());
        }
        let stab = PermGroup::new(self.degree, chain.level_generators(1))?;
        let expected = stab.order() * BigUint::from(chain.orbit_len(0));
        if expected != self.order {
            return Err(Error::Certification(format!(
                "orbit-stabilizer mismatch at point {p}: {} * {} != {}",
                chain.orbit_len(0),
                stab.order(),
                self.order
            )));
        }
        Ok(stab)
    }

    /// Pointwise stabilizer of a set of points, via a hinted chain.
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> Result<PermGroup> {
        for &p in points {
            if p >= self.degree {
                return Err(Error::PointOutOfRange {
                    point: p,
                    degree: self.degree,
                });
            }
        }
        let mut hint: Vec<usize> = Vec::new();
        for &p in points {
            if !hint.contains(&p) {
                hint.push(p);
            }
        }
        let mut chain = StabChain::new(self.degree, &hint);
        for g in &self.generators {
            chain.push_generator(g.clone());
        }
        PermGroup::new(self.degree, chain.level_generators(hint.len()))
    }

    /// Primitivity of a transitive group, by minimal block systems.
    /// Imprimitive groups come back with the first nontrivial system found
    /// when seeding blocks with {0, q}, q ascending.
    pub fn primitivity(&self) -> Result<Primitivity> {
        if !self.is_transitive() {
            return Err(Error::NotTransitive);
        }
        if self.degree <= 2 {
            return Ok(Primitivity::Primitive);
        }
        for q in 1..self.degree {
            let classes = self.minimal_block(0, q);
            let block_count = {
                let mut reps = HashSet::new();
                for c in &classes {
                    reps.insert(*c);
                }
                reps.len()
            };
            if block_count > 1 && block_count < self.degree {
                let mut blocks_map: std::collections::BTreeMap<usize, Vec<usize>> =
                    std::collections::BTreeMap::new();
                for (point, rep) in classes.iter().enumerate() {
                    blocks_map.entry(*rep).or_default().push(point);
                }
                let blocks: Vec<Vec<usize>> = blocks_map.into_values().collect();
                debug_assert!(self.preserves_partition(&blocks));
                return Ok(Primitivity::Imprimitive { blocks });
            }
        }
        Ok(Primitivity::Primitive)
    }

    pub fn is_primitive(&self) -> Result<bool> {
        Ok(matches!(self.primitivity()?, Primitivity::Primitive))
    }

    /// Finest G-congruence identifying `a` and `b`; returns the class
    /// representative of every point.
    fn minimal_block(&self, a: usize, b: usize) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.degree).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut queue = vec![b];
        parent[b] = a;
        while let Some(c) = queue.pop() {
            let rc = find(&mut parent, c);
            for g in &self.generators {
                let ic = g.apply(c);
                let irc = g.apply(rc);
                let ric = find(&mut parent, ic);
                let rirc = find(&mut parent, irc);
                if ric != rirc {
                    // keep the smaller representative; requeue the absorbed root
                    let (keep, absorb) = if ric < rirc { (ric, rirc) } else { (rirc, ric) };
                    parent[absorb] = keep;
                    queue.push(absorb);
                }
            }
        }
        (0..self.degree).map(|x| find(&mut parent, x)).collect()
    }

    pub fn preserves_partition(&self, blocks: &[Vec<usize>]) -> bool {
        let mut block_of = vec![usize::MAX; self.degree];
        for (bi, block) in blocks.iter().enumerate() {
            for &p in block {
                if p >= self.degree || block_of[p] != usize::MAX {
                    return false;
                }
                block_of[p] = bi;
            }
        }
        if block_of.contains(&usize::MAX) {
            return false;
        }
        for g in &self.generators {
            for block in blocks {
                let target = block_of[g.apply(block[0])];
                if block.iter().any(|&p| block_of[g.apply(p)] != target) {
                    return false;
                }
            }
        }
        true
    }

    /// All elements, in breadth-first closure order from the identity.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Perm>> {
        let mut seen = HashSet::new();
        let mut out = vec![Perm::identity(self.degree)];
        seen.insert(out[0].clone());
        let mut i = 0;
        while i < out.len() {
            let e = out[i].clone();
            i += 1;
            for g in &self.generators {
                let next = g.compose(&e);
                if seen.insert(next.clone()) {
                    if out.len() >= cap {
                        return Err(Error::EnumerationCap { cap });
                    }
                    out.push(next);
                }
            }
        }
        Ok(out)
    }
}

/// Verifies that `f : S → Q` (given as the image list over `0..degree`)
/// is equivariant for some action on `Q`, inducing that action from the
/// generators. When the group is primitive, additionally certifies that
/// |Q| is 1 or |S|.
pub fn equivariant_quotient_check(group: &PermGroup, f: &[usize]) -> Result<QuotientVerdict> {
    let n = group.degree();
    if f.len() != n {
        return Err(Error::DegreeMismatch {
            left: f.len(),
            right: n,
        });
    }
    let q_size = f.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut hit = vec![false; q_size];
    for &q in f {
        hit[q] = true;
    }
    if hit.iter().any(|&h| !h) {
        return Err(Error::InvalidConfig(
            "quotient map is not surjective onto 0..=max".into(),
        ));
    }

    let mut induced = Vec::new();
    for (gi, g) in group.generators().iter().enumerate() {
        let mut image: Vec<Option<usize>> = vec![None; q_size];
        let mut first_src: Vec<usize> = vec![0; q_size];
        for s in 0..n {
            let q = f[s];
            let target = f[g.apply(s)];
            match image[q] {
                None => {
                    image[q] = Some(target);
                    first_src[q] = s;
                }
                Some(t) if t == target => {}
                Some(_) => {
                    return Ok(QuotientVerdict::NotEquivariant {
                        generator: gi,
                        s: first_src[q],
                        t: s,
                    });
                }
            }
        }
        let images: Vec<usize> = image.into_iter().map(|x| x.unwrap()).collect();
        induced.push(Perm::from_images(images).expect("induced map of a bijection is a bijection"));
    }

    if group.is_transitive() && group.is_primitive()? && q_size != 1 && q_size != n {
        return Ok(QuotientVerdict::PrimitivityViolation { s_size: n, q_size });
    }
    Ok(QuotientVerdict::Consistent { induced })
}

/// The centralizer of `h` in the full symmetric group on its domain,
/// returned as an explicit element list (identity included).
///
/// An element `z` commuting with all of `h` is determined on each orbit by
/// the image of one representative, which must be a point fixed by the
/// representative's stabilizer and lying in an orbit of the same size.
/// Candidates are combined across orbits, requiring distinct target
/// orbits so the assembled map is a bijection. Errors when more than
/// `cap` elements would be produced.
pub fn sym_centralizer(h: &PermGroup, cap: usize) -> Result<Vec<Perm>> {
    let n = h.degree();

    // orbits of h, each with per-point transversal representatives
    let mut orbit_id = vec![usize::MAX; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<Vec<Option<Perm>>> = Vec::new();
    for start in 0..n {
        if orbit_id[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut transversal: Vec<Option<Perm>> = vec![None; n];
        transversal[start] = Some(Perm::identity(n));
        let mut queue = vec![start];
        orbit_id[start] = id;
        let mut i = 0;
        while i < queue.len() {
            let p = queue[i];
            i += 1;
            for g in h.generators() {
                let q = g.apply(p);
                if orbit_id[q] == usize::MAX {
                    orbit_id[q] = id;
                    transversal[q] = Some(g.compose(transversal[p].as_ref().unwrap()));
                    queue.push(q);
                }
            }
        }
        orbits.push(queue);
        reps.push(transversal);
    }

    // candidate images for each orbit representative
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for orbit in &orbits {
        let rep = orbit[0];
        let stab = h.point_stabilizer(rep)?;
        let cand: Vec<usize> = (0..n)
            .filter(|&q| {
                orbits[orbit_id[q]].len() == orbit.len()
                    && stab.generators().iter().all(|s| s.apply(q) == q)
            })
            .collect();
        candidates.push(cand);
    }

    // assemble all consistent combinations
    struct Assembly<'a> {
        orbits: &'a [Vec<usize>],
        reps: &'a [Vec<Option<Perm>>],
        orbit_id: &'a [usize],
        candidates: &'a [Vec<usize>],
        cap: usize,
        degree: usize,
    }

    impl Assembly<'_> {
        fn run(
            &self,
            oi: usize,
            choice: &mut [usize],
            used: &mut [bool],
            out: &mut Vec<Perm>,
        ) -> Result<()> {
            if oi == self.orbits.len() {
                let mut images = vec![0usize; self.degree];
                for (k, orbit) in self.orbits.iter().enumerate() {
                    let q = choice[k];
                    for &p in orbit {
                        images[p] = self.reps[k][p].as_ref().unwrap().apply(q);
                    }
                }
                let z = Perm::from_images(images)
                    .expect("orbit-matched candidate assembles to a bijection");
                if out.len() >= self.cap {
                    return Err(Error::EnumerationCap { cap: self.cap });
                }
                out.push(z);
                return Ok(());
            }
            for &q in &self.candidates[oi] {
                let target = self.orbit_id[q];
                if used[target] {
                    continue;
                }
                used[target] = true;
                choice[oi] = q;
                self.run(oi + 1, choice, used, out)?;
                used[target] = false;
            }
            Ok(())
        }
    }

    let mut out: Vec<Perm> = Vec::new();
    let mut choice = vec![0usize; orbits.len()];
    let mut used = vec![false; orbits.len()];
    Assembly {
        orbits: &orbits,
        reps: &reps,
        orbit_id: &orbit_id,
        candidates: &candidates,
        cap,
        degree: n,
    }
    .run(0, &mut choice, &mut used, &mut out)?;

    // every assembled element commutes by construction; keep the check as
    // a certificate since the result feeds centralizer claims
    for z in &out {
        for g in h.generators() {
            if !z.commutes_with(g) {
                return Err(Error::Certification(
                    "assembled centralizer element fails to commute".into(),
                ));
            }
        }
    }
    Ok(out)
}
