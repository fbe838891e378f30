use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FiniteGroup, GSet, Side};
use crate::error::{Error, Result};

/// A subgroup stored as the sorted list of member indices of its parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    /// Validates that `members` is closed under products and inverses.
    pub fn from_members(group: &FiniteGroup, members: &[usize]) -> Result<Self> {
        let set: BTreeSet<usize> = members.iter().copied().collect();
        if set.iter().any(|&x| x >= group.order()) {
            return Err(Error::NotASubgroup("member index out of range".into()));
        }
        if !set.contains(&group.identity()) {
            return Err(Error::NotASubgroup("identity missing".into()));
        }
        for &a in &set {
            if !set.contains(&group.inv(a)) {
                return Err(Error::NotASubgroup(format!("{} has no inverse inside", group.label(a))));
            }
            for &b in &set {
                if !set.contains(&group.mul(a, b)) {
                    return Err(Error::NotASubgroup(format!("{} * {} leaves the set", group.label(a), group.label(b))));
                }
            }
        }
        Ok(Subgroup { members: set.into_iter().collect() })
    }

    pub fn whole(group: &FiniteGroup) -> Self {
        Subgroup { members: group.elements().collect() }
    }

    pub fn trivial(group: &FiniteGroup) -> Self {
        Subgroup { members: vec![group.identity()] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&g| other.contains(g))
    }

    /// `x H x⁻¹`.
    pub fn conjugate(&self, group: &FiniteGroup, x: usize) -> Subgroup {
        let mut members: Vec<usize> = self.members.iter().map(|&h| group.conjugate(h, x)).collect();
        members.sort_unstable();
        Subgroup { members }
    }

    pub fn is_normal(&self, group: &FiniteGroup) -> bool {
        group.elements().all(|x| self.conjugate(group, x) == *self)
    }

    pub fn labels<'a>(&self, group: &'a FiniteGroup) -> Vec<&'a str> {
        self.members.iter().map(|&g| group.label(g)).collect()
    }
}

/// Smallest subgroup containing `gens`.
pub fn closure_of(group: &FiniteGroup, gens: &[usize]) -> Subgroup {
    let mut inside = vec![false; group.order()];
    inside[group.identity()] = true;
    let mut members = vec![group.identity()];
    let mut i = 0;
    while i < members.len() {
        let x = members[i];
        for &s in gens {
            let y = group.mul(x, s);
            if !inside[y] {
                inside[y] = true;
                members.push(y);
            }
        }
        i += 1;
    }
    members.sort_unstable();
    Subgroup { members }
}

/// All subgroups, sorted by order and then by member list.
///
/// Starts from the cyclic subgroups and joins pairs until nothing new appears;
/// every subgroup is generated by its cyclic subgroups, so this is complete.
pub fn enumerate_subgroups(group: &FiniteGroup) -> Vec<Subgroup> {
    let cyclic: BTreeSet<Subgroup> = group.elements().map(|g| closure_of(group, &[g])).collect();
    let cyclic: Vec<Subgroup> = cyclic.into_iter().collect();
    let mut all: BTreeSet<Subgroup> = cyclic.iter().cloned().collect();
    let mut frontier: Vec<Subgroup> = all.iter().cloned().collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            for c in &cyclic {
                if c.is_subset_of(h) {
                    continue;
                }
                let mut gens = h.members.clone();
                gens.extend_from_slice(&c.members);
                let joined = closure_of(group, &gens);
                if all.insert(joined.clone()) {
                    next.push(joined);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<Subgroup> = all.into_iter().collect();
    out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.members.cmp(&b.members)));
    out
}

/// One conjugacy class of subgroups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjClassOfSubgroups {
    pub representative: Subgroup,
    pub members: Vec<Subgroup>,
}

impl ConjClassOfSubgroups {
    pub fn contains(&self, h: &Subgroup) -> bool {
        self.members.contains(h)
    }

    pub fn subgroup_order(&self) -> usize {
        self.representative.order()
    }
}

/// Conjugacy classes of subgroups together with their containment order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgroupLattice {
    pub classes: Vec<ConjClassOfSubgroups>,
    /// `leq[i][j]` holds when some member of class `i` lies inside some
    /// member of class `j`.
    pub leq: Vec<Vec<bool>>,
}

impl SubgroupLattice {
    pub fn new(group: &FiniteGroup) -> Self {
        let classes = conjugacy_classes_of_subgroups(group);
        let leq = classes
            .iter()
            .map(|a| classes.iter().map(|b| a.members.iter().any(|h| h.is_subset_of(&b.representative))).collect())
            .collect();
        SubgroupLattice { classes, leq }
    }

    pub fn class_of(&self, h: &Subgroup) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(h))
    }
}

/// Partitions all subgroups into conjugacy classes, ordered like
/// [`enumerate_subgroups`] by their representatives.
pub fn conjugacy_classes_of_subgroups(group: &FiniteGroup) -> Vec<ConjClassOfSubgroups> {
    let subgroups = enumerate_subgroups(group);
    let mut assigned = vec![false; subgroups.len()];
    let mut classes = Vec::new();
    for (i, h) in subgroups.iter().enumerate() {
        if assigned[i] {
            continue;
        }
        let conj: BTreeSet<Subgroup> = group.elements().map(|x| h.conjugate(group, x)).collect();
        for (j, k) in subgroups.iter().enumerate() {
            if conj.contains(k) {
                assigned[j] = true;
            }
        }
        let mut members: Vec<Subgroup> = conj.into_iter().collect();
        members.sort_by(|a, b| a.members.cmp(&b.members));
        classes.push(ConjClassOfSubgroups { representative: h.clone(), members });
    }
    classes
}

/// Right cosets `Hx`, each sorted, ordered by smallest member.
pub fn right_cosets(group: &FiniteGroup, h: &Subgroup) -> Vec<Vec<usize>> {
    let mut seen = vec![false; group.order()];
    let mut cosets = Vec::new();
    for x in group.elements() {
        if seen[x] {
            continue;
        }
        let mut coset: Vec<usize> = h.members.iter().map(|&k| group.mul(k, x)).collect();
        coset.sort_unstable();
        for &c in &coset {
            seen[c] = true;
        }
        cosets.push(coset);
    }
    cosets
}

/// The left G-set of right cosets with `g · (Hx) = H x g⁻¹`.
pub fn coset_gset(group: &FiniteGroup, h: &Subgroup) -> Result<GSet> {
    let h = Subgroup::from_members(group, h.members())?;
    let cosets = right_cosets(group, &h);
    let mut which = vec![0usize; group.order()];
    for (i, c) in cosets.iter().enumerate() {
        for &x in c {
            which[x] = i;
        }
    }
    let points = cosets.iter().map(|c| format!("H{}", group.label(c[0]))).collect();
    let action =
        group.elements().map(|g| cosets.iter().map(|c| which[group.mul(c[0], group.inv(g))]).collect()).collect();
    GSet::new(group, points, action, Side::Left)
}

/// The commutator subgroup `[G, G]`.
pub fn derived_subgroup(group: &FiniteGroup) -> Subgroup {
    let commutators: Vec<usize> = group
        .elements()
        .flat_map(|a| group.elements().map(move |b| (a, b)))
        .map(|(a, b)| group.mul(group.mul(a, b), group.mul(group.inv(a), group.inv(b))))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    closure_of(group, &commutators)
}
