//! Builders for the action families, their number-theoretic support, and
//! the witnesses the verification suites rely on.
//!
//! Three families are constructed here: the two-generated product of
//! alternating groups (prime pairs per level, generators synthesized as
//! certified cycle pairs), full iterated wreath products of transitive
//! level groups, and products of two systems. Builders certify their
//! outputs by exact order computations; nothing is trusted from the
//! construction recipe alone.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::LevelGroupSystem;
use crate::error::{Error, Result};
use crate::group::PermGroup;
use crate::perm::Perm;
use crate::portrait::{LevelPermTuple, Portrait};
use crate::tree::{PathPrefix, SphericalIndex, VertexAddress};

// ---------------------------------------------------------------------
// configurations
// ---------------------------------------------------------------------

/// One level of the product family: distinct odd primes `p1, p2` and the
/// level size `o` with `p1, p2 <= o < p1 + p2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductLevel {
    pub p1: usize,
    pub p2: usize,
    pub o: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductConfig {
    pub levels: Vec<ProductLevel>,
}

impl ProductConfig {
    pub fn new(levels: Vec<ProductLevel>) -> ProductConfig {
        ProductConfig { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn spherical_index(&self) -> Result<SphericalIndex> {
        SphericalIndex::new(self.levels.iter().map(|l| l.o).collect())
    }
}

/// Wreath family: a spherical index and one transitive group per level.
#[derive(Clone, Debug)]
pub struct WreathConfig {
    index: SphericalIndex,
    groups: Vec<PermGroup>,
}

impl WreathConfig {
    pub fn new(index: SphericalIndex, groups: Vec<PermGroup>) -> Result<WreathConfig> {
        if groups.len() != index.depth() {
            return Err(Error::InvalidConfig(format!(
                "{} level groups for depth {}",
                groups.len(),
                index.depth()
            )));
        }
        for (k, g) in groups.iter().enumerate() {
            if g.degree() != index.arity(k) {
                return Err(Error::DegreeMismatch {
                    left: g.degree(),
                    right: index.arity(k),
                });
            }
            if !g.is_transitive() {
                return Err(Error::InvalidConfig(format!(
                    "level-{} group is not transitive",
                    k + 1
                )));
            }
        }
        Ok(WreathConfig { index, groups })
    }

    /// Constant family `A^∞` truncated at `depth`: the same group at
    /// every level.
    pub fn constant(group: &PermGroup, depth: usize) -> Result<WreathConfig> {
        let index = SphericalIndex::constant(group.degree(), depth)?;
        WreathConfig::new(index, vec![group.clone(); depth])
    }

    pub fn index(&self) -> &SphericalIndex {
        &self.index
    }

    pub fn depth(&self) -> usize {
        self.index.depth()
    }

    /// The group acting on digit position `k` (level `k+1` of the tree).
    pub fn group(&self, k: usize) -> &PermGroup {
        &self.groups[k]
    }
}

// ---------------------------------------------------------------------
// number-theoretic support
// ---------------------------------------------------------------------

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// All violations of the size constraints: odd primality, the two
/// inequalities per level, and global injectivity of the prime map.
pub fn po_violations(cfg: &ProductConfig) -> Vec<String> {
    let mut violations = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for (n, level) in cfg.levels.iter().enumerate() {
        let n1 = n + 1;
        for p in [level.p1, level.p2] {
            if !is_prime(p) || p % 2 == 0 || p < 3 {
                violations.push(format!("level {n1}: {p} is not an odd prime"));
            }
            if seen.contains(&p) {
                violations.push(format!("level {n1}: prime {p} reused"));
            }
            seen.push(p);
        }
        if level.p1 > level.o || level.p2 > level.o {
            violations.push(format!(
                "level {n1}: primes ({}, {}) must be <= o = {}",
                level.p1, level.p2, level.o
            ));
        }
        if level.o >= level.p1 + level.p2 {
            violations.push(format!(
                "level {n1}: o = {} must be < p1 + p2 = {}",
                level.o,
                level.p1 + level.p2
            ));
        }
    }
    violations
}

/// Accepts exactly the configurations satisfying the size constraints.
pub fn validate_po(cfg: &ProductConfig) -> Result<()> {
    let violations = po_violations(cfg);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(violations.join("; ")))
    }
}

/// Smallest positive `s` with `s ≡ 1 (mod p(a,k))` and `s ≡ 0 (mod p(a,i))`
/// for every other level `i`. Isolates the level-`k` coordinate of the
/// generator `σ_a` when used as an exponent.
pub fn crt_exponent(cfg: &ProductConfig, a: usize, k: usize) -> Result<BigUint> {
    if a != 1 && a != 2 {
        return Err(Error::InvalidConfig(format!(
            "generator slot {a} not in {{1,2}}"
        )));
    }
    if k == 0 || k > cfg.depth() {
        return Err(Error::LevelOutOfRange {
            level: k,
            depth: cfg.depth(),
        });
    }
    let prime = |level: &ProductLevel| if a == 1 { level.p1 } else { level.p2 };
    let target = prime(&cfg.levels[k - 1]);
    let mut product = BigUint::one();
    for (i, level) in cfg.levels.iter().enumerate() {
        if i != k - 1 {
            product *= BigUint::from(prime(level));
        }
    }
    // smallest positive solution: product * (product^{-1} mod target)
    let reduced = (&product % BigUint::from(target))
        .to_u64_digits()
        .first()
        .copied()
        .unwrap_or(0);
    let inv = mod_inverse(reduced, target as u64)
        .ok_or_else(|| Error::InvalidConfig("prime map is not injective; no CRT inverse".into()))?;
    Ok(product * BigUint::from(inv))
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn alt_order(n: usize) -> BigUint {
    if n < 2 {
        BigUint::one()
    } else {
        factorial(n) / BigUint::from(2u32)
    }
}

/// Deterministically enumerates fresh odd primes into `p1, p2` and sets
/// `o = p1 + p2 − 1`; the output always validates.
pub fn prime_scheme(levels: usize) -> ProductConfig {
    let mut primes = (3usize..).filter(|&n| is_prime(n));
    let levels = (0..levels)
        .map(|_| {
            let p1 = primes.next().unwrap();
            let p2 = primes.next().unwrap();
            ProductLevel {
                p1,
                p2,
                o: p1 + p2 - 1,
            }
        })
        .collect();
    let cfg = ProductConfig::new(levels);
    debug_assert!(validate_po(&cfg).is_ok());
    cfg
}

// ---------------------------------------------------------------------
// generator synthesis
// ---------------------------------------------------------------------

/// Two cycles of the given odd lengths generating Alt(n), certified by
/// the exact order n!/2.
///
/// Deterministic search: the first cycle is fixed as `(0 … ℓ1−1)`; the
/// second runs over supports covering the complement (free part chosen
/// lexicographically inside the first support) and over arrangements in
/// lexicographic order, stopping at the first certified pair.
pub fn miller_generators(l1: usize, l2: usize, n: usize) -> Result<(Perm, Perm)> {
    if l1 < 3 || l2 < 3 || l1 % 2 == 0 || l2 % 2 == 0 {
        return Err(Error::Precondition(format!(
            "cycle lengths must be odd and >= 3, got ({l1}, {l2})"
        )));
    }
    if l1 > n || l2 > n || n >= l1 + l2 {
        return Err(Error::Precondition(format!(
            "need l1, l2 <= n < l1 + l2, got l1={l1}, l2={l2}, n={n}"
        )));
    }
    let sigma1 = Perm::cycle(n, &(0..l1).collect::<Vec<_>>())?;
    let target = alt_order(n);

    // the second support must contain {l1..n} or the pair fixes a point
    let forced: Vec<usize> = (l1..n).collect();
    let free = l1 + l2 - n;
    let mut budget = 20_000usize;
    let mut free_choice = (0..free).collect::<Vec<usize>>();
    loop {
        let mut support: Vec<usize> = free_choice.clone();
        support.extend(&forced);
        support.sort_unstable();
        // arrangements: fix the minimum first, permute the rest lexicographically
        let head = support[0];
        let mut rest: Vec<usize> = support[1..].to_vec();
        loop {
            let mut cycle_points = vec![head];
            cycle_points.extend(&rest);
            let sigma2 = Perm::cycle(n, &cycle_points)?;
            let group = PermGroup::new(n, vec![sigma1.clone(), sigma2.clone()])?;
            if group.order() == &target {
                return Ok((sigma1, sigma2));
            }
            budget = budget.saturating_sub(1);
            if budget == 0 {
                return Err(Error::Certification(format!(
                    "no certified cycle pair found for ({l1}, {l2}, {n}) within the search budget"
                )));
            }
            if !next_lex_permutation(&mut rest) {
                break;
            }
        }
        if !next_combination(&mut free_choice, l1) {
            return Err(Error::Certification(format!(
                "no certified cycle pair found for ({l1}, {l2}, {n})"
            )));
        }
    }
}

fn next_lex_permutation<T: Ord>(arr: &mut [T]) -> bool {
    if arr.len() < 2 {
        return false;
    }
    let mut i = arr.len() - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = arr.len() - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    true
}

/// Next k-combination of {0..bound} in lexicographic order.
fn next_combination(choice: &mut [usize], bound: usize) -> bool {
    let k = choice.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if choice[i] < bound - (k - i) {
            choice[i] += 1;
            for j in i + 1..k {
                choice[j] = choice[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------
// system builders
// ---------------------------------------------------------------------

/// The two-generated product system: per level a certified Alt(o(n))
/// cycle pair of prime lengths, assembled into two coordinatewise
/// generators. Certifies that every level group is the full product of
/// alternating groups.
pub fn build_theorem1(cfg: &ProductConfig) -> Result<LevelGroupSystem> {
    validate_po(cfg)?;
    let index = cfg.spherical_index()?;
    let mut firsts = Vec::with_capacity(cfg.depth());
    let mut seconds = Vec::with_capacity(cfg.depth());
    for level in &cfg.levels {
        let (s1, s2) = miller_generators(level.p1, level.p2, level.o)?;
        firsts.push(s1);
        seconds.push(s2);
    }
    let sigma1 = Portrait::from_level_perms(&LevelPermTuple::new(index.clone(), firsts)?);
    let sigma2 = Portrait::from_level_perms(&LevelPermTuple::new(index.clone(), seconds)?);
    let sys = LevelGroupSystem::new(index, vec![sigma1, sigma2])?;

    // product structure certificate at every level
    let mut expected = BigUint::one();
    for (n, level) in cfg.levels.iter().enumerate() {
        expected *= alt_order(level.o);
        let actual = sys.level_group(n + 1)?.order();
        if actual != &expected {
            return Err(Error::Certification(format!(
                "level-{} group has order {actual}, expected {expected}",
                n + 1
            )));
        }
    }
    Ok(sys)
}

/// Expected order of the level-`n` group of a full wreath system:
/// `∏_{i<=n} |A_i|^{|V_{i-1}|}`.
pub fn wreath_expected_level_order(cfg: &WreathConfig, n: usize) -> Result<BigUint> {
    let mut expected = BigUint::one();
    for k in 0..n {
        let copies = cfg.index().level_size(k)?;
        let mut factor = BigUint::one();
        for _ in 0..copies {
            factor *= cfg.group(k).order();
        }
        expected *= factor;
    }
    Ok(expected)
}

/// A system whose level groups are the full iterated wreath products of
/// the configured level groups. The generating set places each level
/// group at a single vertex; fullness is certified by the exact order
/// formula, not assumed from the recipe.
pub fn build_wreath(cfg: &WreathConfig) -> Result<LevelGroupSystem> {
    let index = cfg.index().clone();
    let mut generators = Vec::new();
    for k in 0..cfg.depth() {
        let anchor = VertexAddress::new(vec![0; k]);
        for g in cfg.group(k).generators() {
            let mut p = Portrait::identity(&index);
            p.set_decoration(&anchor, g.clone())?;
            generators.push(p);
        }
    }
    let sys = LevelGroupSystem::new(index, generators)?;
    let expected = wreath_expected_level_order(cfg, cfg.depth())?;
    let actual = sys.level_group(cfg.depth())?.order();
    if actual != &expected {
        return Err(Error::Certification(format!(
            "wreath level-{} group has order {actual}, expected {expected}",
            cfg.depth()
        )));
    }
    Ok(sys)
}

/// The m-ary adding machine truncated at `depth`: one generator, level
/// groups cyclic of order m^n, so the action on every level is regular.
pub fn build_odometer(m: usize, depth: usize) -> Result<LevelGroupSystem> {
    let index = SphericalIndex::constant(m, depth)?;
    let cycle = Perm::cycle(m, &(0..m).collect::<Vec<_>>())?;
    let mut gen = Portrait::identity(&index);
    for k in 0..depth {
        // carry propagates along the all-zeros image path
        gen.set_decoration(&VertexAddress::new(vec![0; k]), cycle.clone())?;
    }
    let sys = LevelGroupSystem::new(index, vec![gen])?;
    for n in 0..=depth {
        let expected = BigUint::from(m).pow(n as u32);
        if sys.level_group(n)?.order() != &expected {
            return Err(Error::Certification(format!(
                "odometer level-{n} group is not cyclic of order {m}^{n}"
            )));
        }
    }
    Ok(sys)
}

// ---------------------------------------------------------------------
// expected chain orders for wreath systems
// ---------------------------------------------------------------------

/// |S_n| at truncation depth `d`: the point stabilizer at level `n+1`
/// times one factor `|A_{i+1}|^{|V^n_i|}` per residual band.
pub fn expected_s_order(cfg: &WreathConfig, x: &PathPrefix, n: usize, d: usize) -> Result<BigUint> {
    if n >= d || d > cfg.depth() {
        return Err(Error::LevelOutOfRange { level: n, depth: d });
    }
    cfg.index().check_path(x)?;
    let digit = x.digits()[n];
    let mut order = cfg.group(n).point_stabilizer(digit)?.order().clone();
    for i in n + 1..d {
        // |V^n_i| = (m_{n+1}···m_i) − (m_{n+2}···m_i)
        let big: usize = cfg.index().entries()[n..i].iter().product();
        let small: usize = cfg.index().entries()[n + 1..i].iter().product();
        let copies = big - small;
        let mut factor = BigUint::one();
        for _ in 0..copies {
            factor *= cfg.group(i).order();
        }
        order *= factor;
    }
    Ok(order)
}

/// |K_n| at truncation depth `d` for a full wreath system:
/// `∏_{i=0}^{n-1} |S_i|`.
pub fn expected_k_order(cfg: &WreathConfig, x: &PathPrefix, n: usize, d: usize) -> Result<BigUint> {
    if n > d {
        return Err(Error::LevelOutOfRange { level: n, depth: d });
    }
    let mut order = BigUint::one();
    for i in 0..n {
        order *= expected_s_order(cfg, x, i, d)?;
    }
    Ok(order)
}

// ---------------------------------------------------------------------
// product actions
// ---------------------------------------------------------------------

/// The product system on the tree with level sets `X_n × Y_n`, generated
/// by `{(h, id)} ∪ {(id, g)}`. A shallower factor is padded with
/// one-point levels, which only ever appear inside the product entries.
pub fn build_product_action(
    sys_h: &LevelGroupSystem,
    sys_g: &LevelGroupSystem,
) -> Result<LevelGroupSystem> {
    let depth = sys_h.depth().max(sys_g.depth());
    let eh = |k: usize| {
        if k < sys_h.depth() {
            sys_h.index().arity(k)
        } else {
            1
        }
    };
    let eg = |k: usize| {
        if k < sys_g.depth() {
            sys_g.index().arity(k)
        } else {
            1
        }
    };
    let entries: Vec<usize> = (0..depth).map(|k| eh(k) * eg(k)).collect();
    let index = SphericalIndex::new(entries)?;

    let mut generators = Vec::new();
    for h in sys_h.generators() {
        generators.push(embed_factor(&index, h, true, &eh, &eg)?);
    }
    for g in sys_g.generators() {
        generators.push(embed_factor(&index, g, false, &eh, &eg)?);
    }
    LevelGroupSystem::new(index, generators)
}

/// Pairs a product-tree vertex with its factor vertices digit by digit.
pub fn unzip_vertex(
    v: &VertexAddress,
    eg: &dyn Fn(usize) -> usize,
) -> (VertexAddress, VertexAddress) {
    let mut h_digits = Vec::with_capacity(v.level());
    let mut g_digits = Vec::with_capacity(v.level());
    for (k, &digit) in v.digits().iter().enumerate() {
        h_digits.push(digit / eg(k));
        g_digits.push(digit % eg(k));
    }
    (VertexAddress::new(h_digits), VertexAddress::new(g_digits))
}

pub fn zip_vertex(
    h: &VertexAddress,
    g: &VertexAddress,
    eg: &dyn Fn(usize) -> usize,
) -> VertexAddress {
    debug_assert_eq!(h.level(), g.level());
    let digits = h
        .digits()
        .iter()
        .zip(g.digits())
        .enumerate()
        .map(|(k, (&a, &b))| a * eg(k) + b)
        .collect();
    VertexAddress::new(digits)
}

fn embed_factor(
    index: &SphericalIndex,
    factor: &Portrait,
    is_h: bool,
    eh: &dyn Fn(usize) -> usize,
    eg: &dyn Fn(usize) -> usize,
) -> Result<Portrait> {
    let mut out = Portrait::identity(index);
    for level in 0..index.depth() {
        for rank in 0..index.level_size(level)? {
            let v = index.vertex_from_rank(level, rank);
            let (hv, gv) = unzip_vertex(&v, eg);
            let local = if is_h {
                if level < factor.depth() {
                    Some((factor.decoration_at(&hv)?, eg(level), true))
                } else {
                    None
                }
            } else if level < factor.depth() {
                Some((factor.decoration_at(&gv)?, eg(level), false))
            } else {
                None
            };
            if let Some((sigma, eg_k, acting_on_h)) = local {
                if sigma.is_identity() {
                    continue;
                }
                let m = eh(level) * eg_k;
                let mut images = vec![0usize; m];
                for a in 0..eh(level) {
                    for b in 0..eg_k {
                        images[a * eg_k + b] = if acting_on_h {
                            sigma.apply(a) * eg_k + b
                        } else {
                            a * eg_k + sigma.apply(b)
                        };
                    }
                }
                out.set_decoration(&v, Perm::from_images(images)?)?;
            }
        }
    }
    Ok(out)
}

/// Proper-containment witness for a product system: a
/// nontrivial `ĝ` in the `K_n` truncation of the second factor, together
/// with a vertex-stabilizer element `ŝ` it fails to commute with, checked
/// on the assembled product action.
#[derive(Debug)]
pub struct ContainmentWitness {
    /// nontrivial element of the second factor's K_n truncation
    pub k_element: Portrait,
    /// element of the second factor's vertex stabilizer with
    /// `ĝ ŝ ≠ ŝ ĝ`
    pub noncommuting: Portrait,
    /// the product system the pair was verified on
    pub product: LevelGroupSystem,
    /// order of K_n of the product, for the factorization check
    pub product_k_order: BigUint,
}

pub fn product_proper_containment_witness(
    sys_h: &LevelGroupSystem,
    sys_g: &LevelGroupSystem,
    x: &PathPrefix,
    y: &PathPrefix,
    n: usize,
    cap: usize,
) -> Result<ContainmentWitness> {
    use crate::classify;

    let d = sys_g.depth();
    if sys_h.depth() != d {
        return Err(Error::Precondition(
            "factors must share a depth; truncate or pad first".into(),
        ));
    }
    let kg = classify::stabilizer_k(sys_g, y, n)?;
    if kg.is_trivial() {
        return Err(Error::Precondition(format!(
            "K_{n} of the second factor is trivial at depth {d}"
        )));
    }
    let zg = classify::centralizer_z_upper(sys_g, y, n, cap)?;
    // "trivial centralizer" at finite depth: everything in the bound must
    // die under restriction one level up, else nothing is certified
    if classify::restricted_order(sys_g, &zg, d - 1)? != BigUint::one() {
        return Err(Error::Precondition(format!(
            "centralizer bound of the second factor at (n={n}, d={d}) is not certifiably trivial"
        )));
    }

    // a K element outside the centralizer bound, preferring one visible
    // above the bottom layer
    let g_hat = kg
        .generators()
        .iter()
        .find(|g| !zg.contains(g).unwrap_or(false))
        .cloned()
        .ok_or_else(|| {
            Error::Precondition(format!(
                "every K_{n} generator lies in the centralizer bound at depth {d}"
            ))
        })?;

    // a vertex-stabilizer element it fails to commute with
    let chain_g = sys_g.vertex_stabilizer_chain(y)?;
    let s_hat = chain_g
        .generators(n)
        .iter()
        .find(|s| !g_hat.commutes_with(s))
        .cloned()
        .ok_or_else(|| {
            Error::Certification(
                "element outside the centralizer commutes with all stabilizer generators".into(),
            )
        })?;

    // assemble and verify on the product
    let product = build_product_action(sys_h, sys_g)?;
    let eg = |k: usize| {
        if k < sys_g.depth() {
            sys_g.index().arity(k)
        } else {
            1
        }
    };
    let g_portrait = Portrait::from_leaf_perm(sys_g.index(), &g_hat)?;
    let s_portrait = Portrait::from_leaf_perm(sys_g.index(), &s_hat)?;
    let eh = |k: usize| {
        if k < sys_h.depth() {
            sys_h.index().arity(k)
        } else {
            1
        }
    };
    let g_embedded = embed_factor(product.index(), &g_portrait, false, &eh, &eg)?;
    let s_embedded = embed_factor(product.index(), &s_portrait, false, &eh, &eg)?;

    // (id, ĝ) fixes every product leaf under the level-n pair vertex
    let pair_path = zip_path(x, y, &eg);
    let below: usize = product.index().entries()[n..].iter().product();
    let start = product.index().vertex_rank(&pair_path.vertex(n)) * below;
    let g_leaf = g_embedded.level_restriction(d)?;
    for r in start..start + below {
        if g_leaf.apply(r) != r {
            return Err(Error::Certification(
                "embedded K element moves a leaf inside the product cylinder".into(),
            ));
        }
    }
    // (id, ŝ) preserves the product cylinder
    let s_leaf = s_embedded.level_restriction(d)?;
    let pair_vertex_point = pair_path.vertex(n);
    if product
        .index()
        .vertex_rank(&induced_vertex(&s_embedded, &pair_vertex_point))
        != product.index().vertex_rank(&pair_vertex_point)
    {
        return Err(Error::Certification(
            "witness partner does not preserve the product cylinder".into(),
        ));
    }
    if g_leaf.compose(&s_leaf) == s_leaf.compose(&g_leaf) {
        return Err(Error::Certification(
            "assembled product pair unexpectedly commutes".into(),
        ));
    }

    let product_k = classify::stabilizer_k(&product, &pair_path, n)?;
    Ok(ContainmentWitness {
        k_element: g_portrait,
        noncommuting: s_portrait,
        product_k_order: product_k.order().clone(),
        product,
    })
}

fn induced_vertex(p: &Portrait, v: &VertexAddress) -> VertexAddress {
    p.apply(v)
}

/// Zips two factor paths into a path of the product tree.
pub fn zip_path(x: &PathPrefix, y: &PathPrefix, eg: &dyn Fn(usize) -> usize) -> PathPrefix {
    let digits: Vec<usize> = x
        .digits()
        .iter()
        .zip(y.digits())
        .enumerate()
        .map(|(k, (&a, &b))| a * eg(k) + b)
        .collect();
    // validity follows from the factor paths
    PathPrefix::from_digits_unchecked(digits)
}

// ---------------------------------------------------------------------
// non-Hausdorff witness construction
// ---------------------------------------------------------------------

/// The alternating-level witness: one nontrivial decoration at the root
/// of the sibling subtree of `x_k`, for `k = d−1, d−3, …`. Fixes the
/// path, acts nontrivially inside every cylinder on the horizon, and
/// leaves a fixed subtree inside each. The check is normative; this is
/// one concrete realization.
pub fn nonhausdorff_witness_construct(cfg: &WreathConfig, x: &PathPrefix) -> Result<Portrait> {
    let d = cfg.depth();
    if d < 4 {
        return Err(Error::Precondition(format!(
            "witness construction needs depth >= 4, got {d}"
        )));
    }
    cfg.index().check_path(x)?;
    let mut p = Portrait::identity(cfg.index());
    let mut k = d - 1;
    loop {
        // sibling of x_k: same parent, smallest different digit
        let mut digits = x.digits()[..k - 1].to_vec();
        let sibling_digit = (0..cfg.index().arity(k - 1))
            .find(|&t| t != x.digits()[k - 1])
            .expect("arity >= 2");
        digits.push(sibling_digit);
        let sibling = VertexAddress::new(digits);
        let decoration = cfg
            .group(k)
            .generators()
            .first()
            .cloned()
            .ok_or_else(|| Error::InvalidConfig(format!("level-{} group is trivial", k + 1)))?;
        p.set_decoration(&sibling, decoration)?;
        if k < 3 {
            break;
        }
        k -= 2;
    }
    debug_assert_eq!(p.apply(&x.as_vertex()), x.as_vertex());
    Ok(p)
}

// ---------------------------------------------------------------------
// exhaustive centralizer exclusion for product systems
// ---------------------------------------------------------------------

/// Outcome of the per-level exhaustion: every nontrivial element of the
/// coordinate stabilizer was excluded by a verified witness.
#[derive(Debug, Clone)]
pub struct LevelExclusion {
    pub level: usize,
    /// number of nontrivial stabilizer elements checked, exactly
    /// (o−1)!/2 − 1
    pub checked: u64,
    pub all_excluded: bool,
}

/// Certifies triviality of the centralizer of a product system by
/// exhaustion: every nontrivial element of `K_n ≅ D_1 × ⋯ × D_n` has a
/// first nontrivial coordinate `h ∈ D_i`, and the witness built from
/// `h` fails to commute in that coordinate, which already separates the
/// full portraits. So it suffices to run the witness over every
/// nontrivial element of every `D_i`, which this does, in parallel for
/// the large levels.
pub fn theorem1_exclusion_certificate(
    cfg: &ProductConfig,
    x: &PathPrefix,
    n: usize,
) -> Result<Vec<LevelExclusion>> {
    validate_po(cfg)?;
    if n > cfg.depth() {
        return Err(Error::LevelOutOfRange {
            level: n,
            depth: cfg.depth(),
        });
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let o = cfg.levels[i].o;
        let fixed = x.digits()[i];
        let (checked, all_excluded) = exhaust_stabilizer_witnesses(o, fixed);
        let expected = factorial_u64(o - 1) / 2 - 1;
        if checked != expected {
            return Err(Error::Certification(format!(
                "level {}: enumerated {checked} elements, expected {expected}",
                i + 1
            )));
        }
        if !all_excluded {
            return Err(Error::Certification(format!(
                "level {}: some stabilizer element has no valid witness",
                i + 1
            )));
        }
        out.push(LevelExclusion {
            level: i + 1,
            checked,
            all_excluded,
        });
    }
    Ok(out)
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Runs the witness check over every nontrivial even permutation of the
/// points other than `fixed`, allocation-free. Returns (count of
/// nontrivial even elements checked, whether all had valid witnesses).
fn exhaust_stabilizer_witnesses(o: usize, fixed: usize) -> (u64, bool) {
    assert!((5..=32).contains(&o), "desk-scale degrees only");
    let others: Vec<u8> = (0..o as u8).filter(|&p| p as usize != fixed).collect();
    let k = others.len();
    if k <= 9 {
        let mut arrangement: Vec<u8> = others.clone();
        let mut parity = 0u32;
        let mut checked = 0u64;
        let mut all_ok = true;
        loop {
            if parity == 0 {
                if let Some(ok) = check_one_witness(&others, &arrangement, fixed as u8, o as u8) {
                    checked += 1;
                    all_ok &= ok;
                }
            }
            match next_permutation_with_parity(&mut arrangement) {
                Some(flip) => parity ^= flip,
                None => break,
            }
        }
        (checked, all_ok)
    } else {
        // chunk on the first two slots and run chunks in parallel
        let mut prefixes = Vec::new();
        for &a in &others {
            for &b in &others {
                if a != b {
                    prefixes.push((a, b));
                }
            }
        }
        let results: Vec<(u64, bool)> = prefixes
            .par_iter()
            .map(|&(a, b)| {
                let mut arrangement = Vec::with_capacity(k);
                arrangement.push(a);
                arrangement.push(b);
                arrangement.extend(others.iter().copied().filter(|&v| v != a && v != b));
                let mut parity = permutation_parity(&others, &arrangement);
                let mut checked = 0u64;
                let mut all_ok = true;
                loop {
                    if parity == 0 {
                        if let Some(ok) =
                            check_one_witness(&others, &arrangement, fixed as u8, o as u8)
                        {
                            checked += 1;
                            all_ok &= ok;
                        }
                    }
                    match next_permutation_with_parity(&mut arrangement[2..]) {
                        Some(flip) => parity ^= flip,
                        None => break,
                    }
                }
                (checked, all_ok)
            })
            .collect();
        results
            .into_iter()
            .fold((0u64, true), |(c, ok), (c2, ok2)| (c + c2, ok && ok2))
    }
}

/// Parity (0 = even) of the arrangement relative to the sorted order.
fn permutation_parity(sorted: &[u8], arrangement: &[u8]) -> u32 {
    let mut inversions = 0u32;
    let pos = |v: u8| sorted.iter().position(|&s| s == v).unwrap();
    for i in 0..arrangement.len() {
        for j in i + 1..arrangement.len() {
            if pos(arrangement[i]) > pos(arrangement[j]) {
                inversions += 1;
            }
        }
    }
    inversions & 1
}

fn next_permutation_with_parity(arr: &mut [u8]) -> Option<u32> {
    let n = arr.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && arr[i - 1] >= arr[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while arr[j] <= arr[i - 1] {
        j -= 1;
    }
    arr.swap(i - 1, j);
    arr[i..].reverse();
    let suffix = n - i;
    Some(((1 + suffix / 2) & 1) as u32)
}

/// The witness check for one stabilizer element, without allocating: `g`
/// maps `others[j] ↦ arrangement[j]` and fixes `fixed`. Returns `None`
/// for the identity, else whether the deterministic witness separates.
#[inline]
fn check_one_witness(others: &[u8], arrangement: &[u8], fixed: u8, degree: u8) -> Option<bool> {
    let jy = (0..others.len()).find(|&j| arrangement[j] != others[j])?;
    let y = others[jy];
    let gy = arrangement[jy];
    let jinv = (0..others.len())
        .find(|&j| arrangement[j] == y)
        .expect("y is in the image");
    let giy = others[jinv];
    let mut u = 0u8;
    while u == fixed || u == y || u == gy || u == giy {
        u += 1;
    }
    debug_assert!(u < degree);
    // τ = (y g⁻¹(y) u); gτ(y) = y always, so the pair separates iff
    // τ(g(y)) ≠ y
    let t = if gy == giy {
        u
    } else if gy == u {
        y
    } else {
        gy
    };
    Some(t != y)
}

// ---------------------------------------------------------------------
// config files and presets
// ---------------------------------------------------------------------

/// Named level-group specs accepted in wreath configs: `C<k>`, `A<k>`,
/// `S<k>`.
pub fn parse_group_spec(spec: &str) -> Result<PermGroup> {
    let (kind, num) = spec.split_at(1);
    let k: usize = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad group spec {spec:?}")))?;
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "group degree in {spec:?} must be >= 2"
        )));
    }
    match kind {
        "C" => Ok(PermGroup::cyclic(k)),
        "A" => Ok(PermGroup::alternating(k)),
        "S" => Ok(PermGroup::symmetric(k)),
        _ => Err(Error::Parse(format!(
            "unknown group kind in {spec:?}; expected C/A/S"
        ))),
    }
}

/// Config-file form covering both families.
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BuildConfig {
    Product {
        levels: Vec<ProductLevel>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<usize>,
    },
    Wreath {
        index: Vec<usize>,
        groups: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<usize>,
    },
}

impl BuildConfig {
    pub fn build(&self) -> Result<LevelGroupSystem> {
        match self {
            BuildConfig::Product { levels, depth } => {
                let cfg = ProductConfig::new(levels.clone());
                if let Some(d) = depth {
                    if *d != cfg.depth() {
                        return Err(Error::InvalidConfig(format!(
                            "product depth {d} disagrees with {} levels",
                            cfg.depth()
                        )));
                    }
                }
                build_theorem1(&cfg)
            }
            BuildConfig::Wreath { index, depth, .. } => {
                if let Some(d) = depth {
                    if *d != index.len() {
                        return Err(Error::InvalidConfig(format!(
                            "wreath depth {d} disagrees with index length {}",
                            index.len()
                        )));
                    }
                }
                let cfg = self.wreath_config()?;
                build_wreath(&cfg)
            }
        }
    }

    pub fn wreath_config(&self) -> Result<WreathConfig> {
        match self {
            BuildConfig::Wreath { index, groups, .. } => {
                if groups.len() != index.len() {
                    return Err(Error::InvalidConfig(format!(
                        "{} groups for index of length {}",
                        groups.len(),
                        index.len()
                    )));
                }
                let parsed = groups
                    .iter()
                    .map(|s| parse_group_spec(s))
                    .collect::<Result<Vec<_>>>()?;
                WreathConfig::new(SphericalIndex::new(index.clone())?, parsed)
            }
            _ => Err(Error::InvalidConfig("not a wreath config".into())),
        }
    }
}

/// Named presets. `cyclic-wreath-<m>` takes its depth from the caller
/// (default 4); `alt-wreath` is Alt(5) at every level (default depth 2);
/// `theorem1-default` is the two-level product configuration.
pub fn preset(name: &str, depth: Option<usize>) -> Result<BuildConfig> {
    if name == "theorem1-default" {
        return Ok(BuildConfig::Product {
            levels: vec![
                ProductLevel { p1: 3, p2: 5, o: 5 },
                ProductLevel {
                    p1: 7,
                    p2: 11,
                    o: 13,
                },
            ],
            depth,
        });
    }
    if name == "alt-wreath" {
        let d = depth.unwrap_or(2);
        return Ok(BuildConfig::Wreath {
            index: vec![5; d],
            groups: vec!["A5".into(); d],
            depth: Some(d),
        });
    }
    if let Some(m) = name.strip_prefix("cyclic-wreath-") {
        let m: usize = m
            .parse()
            .map_err(|_| Error::Parse(format!("bad preset arity in {name:?}")))?;
        if m < 2 {
            return Err(Error::InvalidConfig("preset arity must be >= 2".into()));
        }
        let d = depth.unwrap_or(4);
        return Ok(BuildConfig::Wreath {
            index: vec![m; d],
            groups: vec![format!("C{m}"); d],
            depth: Some(d),
        });
    }
    Err(Error::InvalidConfig(format!("unknown preset {name:?}")))
}
