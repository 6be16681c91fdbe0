//! Isoclinism testing by exhausting compatible isomorphism pairs.
//!
//! Two groups are isoclinic when some isomorphism of their central
//! quotients and some isomorphism of their derived subgroups carry one
//! commutator pairing onto the other. The search space is tiny for the
//! central indices we allow, so we enumerate isomorphisms outright from
//! generating sets rather than doing anything clever.

use super::{CentralQuotient, FiniteGroup, GroupError, DEFAULT_CENTRAL_INDEX_CAP};

/// Greedy generating set: repeatedly adjoin the smallest element outside
/// the running closure.
fn generating_set(g: &FiniteGroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut generated = g.closure(&[]);
    while generated.len() < g.order() {
        let next = (0..g.order())
            .find(|x| generated.binary_search(x).is_err())
            .expect("closure is a proper subset");
        gens.push(next);
        generated = g.closure(&gens);
    }
    gens
}

/// Grows the partial map gens[i] -> images[i] to a full isomorphism, or
/// reports that none extends it.
fn extend_to_isomorphism(
    a: &FiniteGroup,
    b: &FiniteGroup,
    gens: &[usize],
    images: &[usize],
) -> Option<Vec<usize>> {
    let n = a.order();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[0] = 0;
    used[0] = true;
    let mut members = vec![0];
    for (&g, &im) in gens.iter().zip(images) {
        if map[g] != usize::MAX {
            if map[g] != im {
                return None;
            }
            continue;
        }
        if used[im] {
            return None;
        }
        map[g] = im;
        used[im] = true;
        members.push(g);
    }
    // Close under products, mapping as we go; any clash kills the branch.
    let mut i = 0;
    while i < members.len() {
        let x = members[i];
        let mut j = 0;
        while j < members.len() {
            let y = members[j];
            for (p, q) in [
                (a.op(x, y), b.op(map[x], map[y])),
                (a.op(y, x), b.op(map[y], map[x])),
            ] {
                if map[p] == usize::MAX {
                    if used[q] {
                        return None;
                    }
                    map[p] = q;
                    used[q] = true;
                    members.push(p);
                } else if map[p] != q {
                    return None;
                }
            }
            j += 1;
        }
        i += 1;
    }
    if members.len() != n {
        return None;
    }
    // The closure already forced consistency, but a final full check keeps
    // this function trustworthy independent of the bookkeeping above.
    for x in 0..n {
        for y in 0..n {
            if map[a.op(x, y)] != b.op(map[x], map[y]) {
                return None;
            }
        }
    }
    Some(map)
}

/// All isomorphisms a -> b, as element maps. Empty when none exist.
pub fn isomorphisms(a: &FiniteGroup, b: &FiniteGroup) -> Vec<Vec<usize>> {
    if a.order() != b.order() {
        return Vec::new();
    }
    let mut orders_a: Vec<usize> = (0..a.order()).map(|x| a.element_order(x)).collect();
    let orders_b_raw: Vec<usize> = (0..b.order()).map(|x| b.element_order(x)).collect();
    let mut orders_b = orders_b_raw.clone();
    orders_a.sort_unstable();
    orders_b.sort_unstable();
    if orders_a != orders_b {
        return Vec::new();
    }
    let gens = generating_set(a);
    if gens.is_empty() {
        return vec![vec![0]];
    }
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| {
            let o = a.element_order(g);
            (0..b.order()).filter(|&h| orders_b_raw[h] == o).collect()
        })
        .collect();
    let mut found = Vec::new();
    let mut images = vec![0usize; gens.len()];
    fn recurse(
        a: &FiniteGroup,
        b: &FiniteGroup,
        gens: &[usize],
        candidates: &[Vec<usize>],
        images: &mut Vec<usize>,
        depth: usize,
        found: &mut Vec<Vec<usize>>,
    ) {
        if depth == gens.len() {
            if let Some(map) = extend_to_isomorphism(a, b, gens, images) {
                found.push(map);
            }
            return;
        }
        for &c in &candidates[depth] {
            images[depth] = c;
            recurse(a, b, gens, candidates, images, depth + 1, found);
        }
    }
    recurse(a, b, &gens, &candidates, &mut images, 0, &mut found);
    found
}

struct PairingData {
    quotient: CentralQuotient,
    derived: FiniteGroup,
    /// pairing[x][y] = local derived index of the commutator of coset reps.
    pairing: Vec<Vec<usize>>,
}

fn pairing_data(g: &FiniteGroup) -> PairingData {
    let (quotient, raw) = g.commutator_pairing();
    let derived_members = g.derived_subgroup();
    let derived = g
        .subgroup_table(&derived_members)
        .expect("derived subgroup is closed and contains the identity");
    let local = |x: usize| {
        derived_members
            .binary_search(&x)
            .expect("commutators lie in the derived subgroup")
    };
    let pairing = raw
        .iter()
        .map(|row| row.iter().map(|&x| local(x)).collect())
        .collect();
    PairingData { quotient, derived, pairing }
}

pub fn are_isoclinic_bruteforce(a: &FiniteGroup, b: &FiniteGroup) -> Result<bool, GroupError> {
    are_isoclinic_bruteforce_capped(a, b, DEFAULT_CENTRAL_INDEX_CAP)
}

/// Exhaustive isoclinism test; errors when either central quotient is
/// larger than `cap`.
pub fn are_isoclinic_bruteforce_capped(
    a: &FiniteGroup,
    b: &FiniteGroup,
    cap: usize,
) -> Result<bool, GroupError> {
    let da = pairing_data(a);
    let db = pairing_data(b);
    for d in [&da, &db] {
        let index = d.quotient.group.order();
        if index > cap {
            return Err(GroupError::CentralIndexCapExceeded { index, cap });
        }
    }
    if da.quotient.group.order() != db.quotient.group.order()
        || da.derived.order() != db.derived.order()
    {
        return Ok(false);
    }
    let quotient_isos = isomorphisms(&da.quotient.group, &db.quotient.group);
    if quotient_isos.is_empty() {
        return Ok(false);
    }
    let derived_isos = isomorphisms(&da.derived, &db.derived);
    if derived_isos.is_empty() {
        return Ok(false);
    }
    let q = da.quotient.group.order();
    for phi in &quotient_isos {
        for psi in &derived_isos {
            let compatible = (0..q).all(|x| {
                (0..q).all(|y| psi[da.pairing[x][y]] == db.pairing[phi[x]][phi[y]])
            });
            if compatible {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
