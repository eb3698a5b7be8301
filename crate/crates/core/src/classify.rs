//! Finite-depth computation of the stabilizer chain `K_n` and the
//! centralizer chain `Z_n`, classification evidence, and the
//! non-Hausdorff witness check.
//!
//! Everything here is a statement about a fixed truncation depth `d`.
//! Boundedness of the chains is undecidable from any finite truncation,
//! so the flags are evidence over the horizon, never theorems. The
//! centralizer is an upper bound for the same reason: decorations at the
//! deepest level have nothing below them to betray noncommutation, so
//! the truncated centralizer can pick up spurious elements. Reports
//! therefore carry both the raw depth-`d` centralizer order and the
//! order of its restriction one level up, where that inflation dies.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chains::{ChainPoint, LevelGroupSystem};
use crate::error::{Error, Result};
use crate::group::{sym_centralizer, PermGroup};
use crate::perm::Perm;
use crate::portrait::{induced_level_perm, Portrait};
use crate::tree::{PathPrefix, VertexAddress};

/// Default cap on brute-force enumeration, overridable through the
/// `ARBOREAL_MAX_ENUM` environment variable.
pub const DEFAULT_ENUM_CAP: usize = 1 << 20;

pub fn enum_cap_from_env() -> usize {
    std::env::var("ARBOREAL_MAX_ENUM")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ENUM_CAP)
}

/// Combined-domain hint for reading off all of `K_0 … K_{n_max}` and the
/// path stabilizer from a single chain: the path vertices first, then the
/// leaf sets below each `x_m`, deepest band first.
fn k_chain_positions(
    sys: &LevelGroupSystem,
    x: &PathPrefix,
    n_max: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let d = sys.depth();
    let offsets = sys.combined_offsets();
    let mut hint: Vec<usize> = (1..=d)
        .map(|n| sys.combined_point(&offsets, &x.vertex(n)))
        .collect();
    let leaf_offset = offsets[d];
    let leaf_count = sys.index().level_size(d)?;
    let mut in_hint = vec![false; leaf_count];
    in_hint[sys.index().vertex_rank(&x.as_vertex())] = true;

    let mut positions = vec![0usize; n_max + 1];
    for m in (0..=n_max).rev() {
        // leaves below x_m not yet hinted
        let below: usize = sys.index().entries()[m..].iter().product();
        let start = sys.index().vertex_rank(&x.vertex(m)) * below;
        for r in start..start + below {
            if !in_hint[r] {
                in_hint[r] = true;
                hint.push(leaf_offset + r);
            }
        }
        positions[m] = hint.len();
    }
    Ok((hint, positions))
}

/// The truncations of `K_0 ⊆ K_1 ⊆ … ⊆ K_{n_max}`: `K_n` is the subgroup
/// of the depth-`d` path stabilizer acting as the identity on every
/// depth-`d` vertex descending from `x_n`. One hinted chain certifies
/// all of them.
pub fn stabilizer_k_chain(
    sys: &LevelGroupSystem,
    x: &PathPrefix,
    n_max: usize,
) -> Result<Vec<PermGroup>> {
    sys.index().check_path(x)?;
    if n_max > sys.depth() {
        return Err(Error::LevelOutOfRange {
            level: n_max,
            depth: sys.depth(),
        });
    }
    let d = sys.depth();
    let offsets = sys.combined_offsets();
    let (hint, positions) = k_chain_positions(sys, x, n_max)?;
    let chain = sys.hinted_chain(&hint)?;
    let leaf_degree = sys.index().level_size(d)?;

    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let gens: Vec<Perm> = chain
            .level_generators(positions[n])
            .iter()
            .map(|g| sys.leaf_part(&offsets, g))
            .collect();
        let group = PermGroup::new(leaf_degree, gens)?;
        if group.order() != &chain.level_order(positions[n]) {
            return Err(Error::Certification(format!(
                "K_{n} rebuild disagrees with the master chain"
            )));
        }
        out.push(group);
    }
    Ok(out)
}

/// `K_n` at the system's depth.
pub fn stabilizer_k(sys: &LevelGroupSystem, x: &PathPrefix, n: usize) -> Result<PermGroup> {
    Ok(stabilizer_k_chain(sys, x, n)?.pop().unwrap())
}

/// Brute-force route to `K_n`: enumerate the whole depth-`d` level group
/// (subject to the cap) and keep the elements fixing the subtree of
/// `x_n` pointwise. Used as a cross-check against the chain route.
pub fn stabilizer_k_brute(
    sys: &LevelGroupSystem,
    x: &PathPrefix,
    n: usize,
    cap: usize,
) -> Result<Vec<Perm>> {
    sys.index().check_path(x)?;
    let d = sys.depth();
    let below: usize = sys.index().entries()[n..].iter().product();
    let start = sys.index().vertex_rank(&x.vertex(n)) * below;
    let all = sys.level_group(d)?.enumerate(cap)?;
    Ok(all
        .into_iter()
        .filter(|g| (start..start + below).all(|r| g.apply(r) == r))
        .collect())
}

/// The truncated centralizer: the subgroup of `K_n` commuting with every
/// element of the depth-`d` truncation of `Û_n` (the stabilizer of the
/// vertex `x_n`). Computed exactly as `K_n ∩ C_{Sym(V_d)}(G_n)`; the
/// symmetric-group centralizer is assembled orbit by orbit.
///
/// This is an upper bound for the true `Z_n`: decorations at the deepest
/// level can commute spuriously. Callers wanting the certified part
/// should restrict to `V_{d-1}` (see [`restricted_order`]).
pub fn centralizer_z_upper(
    sys: &LevelGroupSystem,
    x: &PathPrefix,
    n: usize,
    cap: usize,
) -> Result<PermGroup> {
    let chain = sys.vertex_stabilizer_chain(x)?;
    let kn = stabilizer_k(sys, x, n)?;
    centralizer_z_upper_from(&chain, &kn, n, cap)
}

/// Same computation reusing an already-built vertex chain and `K_n`.
pub fn centralizer_z_upper_from(
    chain: &ChainPoint,
    kn: &PermGroup,
    n: usize,
    cap: usize,
) -> Result<PermGroup> {
    let leaf_degree = kn.degree();
    if n == 0 || kn.is_trivial() {
        // Z_0 ⊆ K_0 and K_0 is trivial for effective actions
        return Ok(PermGroup::trivial(leaf_degree));
    }
    let g_n = PermGroup::new(leaf_degree, chain.generators(n).to_vec())?;
    let candidates = sym_centralizer(&g_n, cap)?;
    let mut elements = Vec::new();
    for z in candidates {
        if kn.contains(&z)? && !z.is_identity() {
            elements.push(z);
        }
    }
    let group = PermGroup::new(leaf_degree, elements)?;
    // both constraint sets are groups, so the generated group stays inside
    debug_assert!(group
        .generators()
        .iter()
        .all(|z| g_n.generators().iter().all(|h| z.commutes_with(h))));
    Ok(group)
}

/// Order of the restriction of a leaf-level subgroup to `V_n`.
pub fn restricted_order(sys: &LevelGroupSystem, group: &PermGroup, n: usize) -> Result<BigUint> {
    let gens: Vec<Perm> = group
        .generators()
        .iter()
        .map(|g| induced_level_perm(sys.index(), g, n))
        .collect::<Result<_>>()?;
    let restricted = PermGroup::new(sys.index().level_size(n)?.max(1), gens)?;
    Ok(restricted.order().clone())
}

/// Per-`n` record of the chain computation.
#[derive(Debug, Clone)]
pub struct ChainRow {
    pub n: usize,
    pub k_order: BigUint,
    /// order of the depth-`d` centralizer bound after restriction to
    /// `V_{d-1}`, where bottom-layer inflation dies
    pub z_upper_order: BigUint,
    /// raw order of the centralizer bound at depth `d`
    pub z_depth_order: BigUint,
    /// every element of the bound restricts to the identity on `V_{d-1}`
    pub z_bottom_kernel_certified: bool,
    /// growth trend: K strictly larger than at the previous level
    pub k_grew: bool,
}

/// Evidence flags per the classification scheme. All flags quantify over
/// the computed horizon only.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifyFlags {
    /// K-orders constant across the horizon (bounded-chain evidence)
    pub stable_evidence: bool,
    /// K-orders strictly grew at every step of the horizon
    pub wild_evidence: bool,
    /// every K_n on the horizon is finite (always true at truncation;
    /// reported as consistency, not proof)
    pub finite_type_evidence: bool,
    /// Z-bound equals K at every n on the horizon
    pub flat_type_evidence: bool,
    /// Z-bound is a proper subgroup of K at some n on the horizon
    pub dynamically_wild_evidence: bool,
    pub horizon_depth: usize,
    pub horizon_n_max: usize,
    pub horizon_buffer: usize,
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub depth: usize,
    pub buffer: usize,
    pub path: PathPrefix,
    pub rows: Vec<ChainRow>,
    pub summary: ClassifyFlags,
    pub horizon_caveat: String,
}

/// Derives the evidence flags from a computed report. Boundedness of
/// either chain is undecidable at finite depth; these are flags over the
/// horizon carried in the report.
pub fn classify_flags(rows: &[ChainRow], depth: usize, buffer: usize) -> ClassifyFlags {
    let n_max = rows.last().map(|r| r.n).unwrap_or(0);
    let wild = rows.len() >= 2 && rows.windows(2).all(|w| w[1].k_order > w[0].k_order);
    let stable = rows.windows(2).all(|w| w[1].k_order == w[0].k_order);
    let flat = rows.iter().all(|r| r.z_depth_order == r.k_order);
    let dynamically_wild = rows.iter().any(|r| r.z_depth_order < r.k_order);
    ClassifyFlags {
        stable_evidence: stable,
        wild_evidence: wild,
        finite_type_evidence: true,
        flat_type_evidence: flat,
        dynamically_wild_evidence: dynamically_wild,
        horizon_depth: depth,
        horizon_n_max: n_max,
        horizon_buffer: buffer,
    }
}

/// Computes the chain report for `n = 0 … n_max` at the system's depth.
/// Requires `n_max + buffer <= depth` so the largest analyzed level keeps
/// a buffer away from the truncation boundary.
pub fn chain_report(
    sys: &LevelGroupSystem,
    x: &PathPrefix,
    n_max: usize,
    buffer: usize,
    cap: usize,
) -> Result<ChainReport> {
    let d = sys.depth();
    if n_max + buffer > d {
        return Err(Error::Horizon(format!(
            "n_max {n_max} + buffer {buffer} exceeds depth {d}"
        )));
    }
    let chain = sys.vertex_stabilizer_chain(x)?;
    let k_groups = stabilizer_k_chain(sys, x, n_max)?;
    let mut rows = Vec::with_capacity(n_max + 1);
    for (n, kn) in k_groups.iter().enumerate() {
        let z = centralizer_z_upper_from(&chain, kn, n, cap)?;
        let z_restricted = restricted_order(sys, &z, d - 1)?;
        let k_grew = n > 0 && kn.order() > k_groups[n - 1].order();
        rows.push(ChainRow {
            n,
            k_order: kn.order().clone(),
            z_upper_order: z_restricted.clone(),
            z_depth_order: z.order().clone(),
            z_bottom_kernel_certified: z_restricted == BigUint::one(),
            k_grew,
        });
    }
    let summary = classify_flags(&rows, d, buffer);
    let horizon_caveat = format!(
        "orders computed at truncation depth {d} with buffer {buffer}; growth and triviality \
         statements are evidence over this horizon, not proofs about the infinite action; \
         z_upper_order is the centralizer bound restricted to level {}, z_depth_order the raw \
         depth-{d} bound, which deepest-level decorations may inflate",
        d - 1
    );
    Ok(ChainReport {
        depth: d,
        buffer,
        path: x.clone(),
        rows,
        summary,
        horizon_caveat,
    })
}

impl ChainReport {
    /// Re-derives the evidence flags from the rows.
    pub fn flags(&self) -> ClassifyFlags {
        classify_flags(&self.rows, self.depth, self.buffer)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "depth": self.depth,
            "buffer": self.buffer,
            "path": self.path.digits(),
            "rows": self.rows.iter().map(|r| json!({
                "n": r.n,
                "k_order": r.k_order.to_string(),
                "z_upper_order": r.z_upper_order.to_string(),
                "z_depth_order": r.z_depth_order.to_string(),
                "flags": {
                    "k_finite": true,
                    "k_grew": r.k_grew,
                    "z_equals_k": r.z_depth_order == r.k_order,
                    "z_bottom_kernel_certified": r.z_bottom_kernel_certified,
                },
            })).collect::<Vec<_>>(),
            "summary": serde_json::to_value(&self.summary).unwrap(),
            "horizon_caveat": self.horizon_caveat,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).unwrap()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,k_order,z_upper_order,z_depth_order,z_equals_k,z_bottom_kernel_certified\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.k_order,
                r.z_upper_order,
                r.z_depth_order,
                r.z_depth_order == r.k_order,
                r.z_bottom_kernel_certified
            ));
        }
        out
    }
}

/// Per-level verdict of the non-Hausdorff witness check.
#[derive(Debug, Clone)]
pub struct NonHausdorffRow {
    pub level: usize,
    /// a depth-`d` vertex inside the `x_level` cylinder moved by the
    /// element (condition 2), if any
    pub moved_leaf: Option<VertexAddress>,
    /// a vertex inside the cylinder whose entire depth-`d` subtree is
    /// fixed pointwise (condition 3), if any
    pub fixed_subtree: Option<VertexAddress>,
}

#[derive(Debug, Clone)]
pub struct NonHausdorffReport {
    pub depth: usize,
    pub rows: Vec<NonHausdorffRow>,
    pub witness_consistent: bool,
}

/// Checks the two finite-depth witness conditions for each `ℓ ≤ d−2`:
/// the element must move some depth-`d` vertex inside the `x_ℓ` cylinder
/// yet fix the whole subtree of some vertex inside it. Candidate fixed
/// subtrees are rooted at levels `ℓ+1 … d−1`; a single leaf is not
/// accepted as a subtree.
pub fn non_hausdorff_check(a: &Portrait, x: &PathPrefix) -> Result<NonHausdorffReport> {
    let index = a.index();
    index.check_path(x)?;
    if a.apply(&x.as_vertex()) != x.as_vertex() {
        return Err(Error::Precondition("element does not fix the path".into()));
    }
    let d = index.depth();
    let leaf = a.level_restriction(d)?;
    let leaf_fixed: Vec<bool> = (0..leaf.degree()).map(|r| leaf.apply(r) == r).collect();

    let mut rows = Vec::new();
    for level in 0..=d.saturating_sub(2) {
        // condition (2): a moved leaf below x_level
        let below: usize = index.entries()[level..].iter().product();
        let start = index.vertex_rank(&x.vertex(level)) * below;
        let moved_leaf = (start..start + below)
            .find(|&r| !leaf_fixed[r])
            .map(|r| index.vertex_from_rank(d, r));

        // condition (3): a fixed subtree rooted strictly inside the cylinder
        let mut fixed_subtree = None;
        'outer: for v_level in level + 1..d {
            let per_vertex: usize = index.entries()[v_level..].iter().product();
            let cyl: usize = index.entries()[level..v_level].iter().product();
            let first = index.vertex_rank(&x.vertex(level)) * cyl;
            for v_rank in first..first + cyl {
                let lo = v_rank * per_vertex;
                if leaf_fixed[lo..lo + per_vertex].iter().all(|&f| f) {
                    fixed_subtree = Some(index.vertex_from_rank(v_level, v_rank));
                    break 'outer;
                }
            }
        }
        rows.push(NonHausdorffRow {
            level,
            moved_leaf,
            fixed_subtree,
        });
    }
    let witness_consistent = !rows.is_empty()
        && rows
            .iter()
            .all(|r| r.moved_leaf.is_some() && r.fixed_subtree.is_some());
    Ok(NonHausdorffReport {
        depth: d,
        rows,
        witness_consistent,
    })
}
