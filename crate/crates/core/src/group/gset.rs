use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FiniteGroup, Subgroup};
use crate::error::{Error, Result};

/// Which side the group acts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// A finite set with a group action, stored as one point permutation per
/// group element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSet {
    group_name: String,
    group_order: usize,
    points: Vec<String>,
    action: Vec<Vec<usize>>,
    side: Side,
}

impl GSet {
    /// Validates the action axioms exhaustively.
    pub fn new(group: &FiniteGroup, points: Vec<String>, action: Vec<Vec<usize>>, side: Side) -> Result<Self> {
        let n = points.len();
        if action.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} permutations for a group of order {}",
                action.len(),
                group.order()
            )));
        }
        for (g, row) in action.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidAction(format!("row {g} has the wrong length")));
            }
            let mut seen = vec![false; n];
            for &y in row {
                if y >= n || std::mem::replace(&mut seen[y], true) {
                    return Err(Error::InvalidAction(format!("{} does not act by a permutation", group.label(g))));
                }
            }
        }
        if action[group.identity()].iter().enumerate().any(|(x, &y)| x != y) {
            return Err(Error::InvalidAction("identity moves a point".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                for x in 0..n {
                    let lhs = action[gh][x];
                    let rhs = match side {
                        Side::Left => action[g][action[h][x]],
                        Side::Right => action[h][action[g][x]],
                    };
                    if lhs != rhs {
                        return Err(Error::InvalidAction(format!(
                            "compatibility fails for ({}, {}) at point {x}",
                            group.label(g),
                            group.label(h)
                        )));
                    }
                }
            }
        }
        Ok(GSet { group_name: group.name().to_string(), group_order: group.order(), points, action, side })
    }

    /// The trivial action on `n` points.
    pub fn trivial(group: &FiniteGroup, points: Vec<String>) -> Self {
        let n = points.len();
        let action = vec![(0..n).collect(); group.order()];
        GSet { group_name: group.name().to_string(), group_order: group.order(), points, action, side: Side::Left }
    }

    /// The left regular action `g · x = gx` on the group elements.
    pub fn regular(group: &FiniteGroup) -> Self {
        let action = group.elements().map(|g| group.elements().map(|x| group.mul(g, x)).collect()).collect();
        GSet {
            group_name: group.name().to_string(),
            group_order: group.order(),
            points: group.labels().to_vec(),
            action,
            side: Side::Left,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn group_order(&self) -> usize {
        self.group_order
    }

    pub fn group_name(&self) -> &str {
        &self.group_name
    }

    /// The image of point `x` under element `g`, read on whichever side the
    /// action is declared.
    pub fn act(&self, g: usize, x: usize) -> usize {
        self.action[g][x]
    }

    pub fn permutation(&self, g: usize) -> &[usize] {
        &self.action[g]
    }

    /// Converts to the opposite side by `x ↦ act(g⁻¹, x)`. A right action
    /// becomes a left action and vice versa.
    pub fn flipped(&self, group: &FiniteGroup) -> GSet {
        let action = group.elements().map(|g| self.action[group.inv(g)].clone()).collect();
        GSet {
            group_name: self.group_name.clone(),
            group_order: self.group_order,
            points: self.points.clone(),
            action,
            side: match self.side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            },
        }
    }

    /// A left action with the same orbits; right actions are flipped.
    pub fn to_left(&self, group: &FiniteGroup) -> GSet {
        match self.side {
            Side::Left => self.clone(),
            Side::Right => self.flipped(group),
        }
    }

    /// Restriction to a subset of points closed under the action.
    pub fn restrict(&self, keep: &[usize]) -> Result<GSet> {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &x) in keep.iter().enumerate() {
            index[x] = i;
        }
        let mut action = Vec::with_capacity(self.group_order);
        for row in &self.action {
            let mut r = Vec::with_capacity(keep.len());
            for &x in keep {
                let y = index[row[x]];
                if y == usize::MAX {
                    return Err(Error::InvalidAction("subset is not invariant".into()));
                }
                r.push(y);
            }
            action.push(r);
        }
        Ok(GSet {
            group_name: self.group_name.clone(),
            group_order: self.group_order,
            points: keep.iter().map(|&x| self.points[x].clone()).collect(),
            action,
            side: self.side,
        })
    }

    fn check_group(&self, group: &FiniteGroup) -> Result<()> {
        if self.group_order != group.order() {
            return Err(Error::GroupMismatch(self.group_name.clone(), group.name().to_string()));
        }
        Ok(())
    }
}

/// Orbits as sorted point lists, ordered by smallest point.
pub fn orbits(x: &GSet) -> Vec<Vec<usize>> {
    let mut seen = vec![false; x.len()];
    let mut out = Vec::new();
    for p in 0..x.len() {
        if seen[p] {
            continue;
        }
        let mut orbit: Vec<usize> = x.action.iter().map(|row| row[p]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &q in &orbit {
            seen[q] = true;
        }
        out.push(orbit);
    }
    out
}

/// `{g : g · x = x}`.
pub fn stabilizer(group: &FiniteGroup, x: &GSet, point: usize) -> Result<Subgroup> {
    x.check_group(group)?;
    let members: Vec<usize> = group.elements().filter(|&g| x.act(g, point) == point).collect();
    Subgroup::from_members(group, &members)
}

/// An equivariant bijection `X → Y` as a point map, or `None`.
///
/// Orbits are matched greedily by stabilizer: two transitive sets are
/// isomorphic exactly when some pair of points has equal stabilizers, and
/// any such pair extends uniquely along the orbit.
pub fn find_gset_isomorphism(group: &FiniteGroup, x: &GSet, y: &GSet) -> Result<Option<Vec<usize>>> {
    x.check_group(group)?;
    y.check_group(group)?;
    if x.len() != y.len() {
        return Ok(None);
    }
    let x = x.to_left(group);
    let y = y.to_left(group);
    let y_orbits = orbits(&y);
    let mut y_stabs: BTreeMap<usize, Vec<(usize, Subgroup)>> = BTreeMap::new();
    for (k, orbit) in y_orbits.iter().enumerate() {
        for &p in orbit {
            y_stabs.entry(k).or_default().push((p, stabilizer(group, &y, p)?));
        }
    }
    let mut used = vec![false; y_orbits.len()];
    let mut map = vec![usize::MAX; x.len()];
    for orbit in orbits(&x) {
        let rep = orbit[0];
        let s = stabilizer(group, &x, rep)?;
        let mut found = None;
        'search: for (k, candidates) in &y_stabs {
            if used[*k] || y_orbits[*k].len() != orbit.len() {
                continue;
            }
            for (p, t) in candidates {
                if *t == s {
                    found = Some((*k, *p));
                    break 'search;
                }
            }
        }
        let Some((k, target)) = found else {
            return Ok(None);
        };
        used[k] = true;
        for g in group.elements() {
            map[x.act(g, rep)] = y.act(g, target);
        }
    }
    Ok(Some(map))
}

#[derive(Serialize, Deserialize)]
struct GSetJson {
    points: Vec<String>,
    action: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    side: Side,
}

impl GSet {
    pub fn to_json(&self) -> serde_json::Value {
        let action = self.action.iter().enumerate().map(|(g, row)| (g.to_string(), row.clone())).collect();
        serde_json::to_value(GSetJson { points: self.points.clone(), action, side: self.side })
            .expect("plain data serializes")
    }

    /// Like [`GSet::to_json`] but keyed by element labels.
    pub fn to_json_labeled(&self, group: &FiniteGroup) -> serde_json::Value {
        let action = self.action.iter().enumerate().map(|(g, row)| (group.label(g).to_string(), row.clone())).collect();
        serde_json::to_value(GSetJson { points: self.points.clone(), action, side: self.side })
            .expect("plain data serializes")
    }

    pub fn from_json(group: &FiniteGroup, value: &serde_json::Value) -> Result<GSet> {
        let raw: GSetJson = serde_json::from_value(value.clone())?;
        let mut action = vec![Vec::new(); group.order()];
        for (key, row) in raw.action {
            let g: usize = key
                .parse()
                .ok()
                .or_else(|| group.find(&key))
                .filter(|&g| g < group.order())
                .ok_or_else(|| Error::InvalidAction(format!("unknown group element `{key}`")))?;
            action[g] = row;
        }
        GSet::new(group, raw.points, action, raw.side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{coset_gset, preset};

    fn relabeled_regular(group: &FiniteGroup, perm: &[usize]) -> GSet {
        // Point perm[x] plays the role of x.
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let action =
            group.elements().map(|g| (0..group.order()).map(|p| perm[group.mul(g, inv[p])]).collect()).collect();
        let points = (0..group.order()).map(|i| format!("p{i}")).collect();
        GSet::new(group, points, action, Side::Left).unwrap()
    }

    fn is_equivariant(group: &FiniteGroup, x: &GSet, y: &GSet, map: &[usize]) -> bool {
        group.elements().all(|g| (0..x.len()).all(|p| map[x.act(g, p)] == y.act(g, map[p])))
    }

    #[test]
    fn regular_action_has_one_orbit_and_trivial_stabilizer() {
        let g = preset("Z3").unwrap();
        let x = GSet::regular(&g);
        assert_eq!(orbits(&x).len(), 1);
        assert_eq!(stabilizer(&g, &x, 0).unwrap().order(), 1);
    }

    #[test]
    fn trivial_action_has_singleton_orbits() {
        let g = preset("Z4").unwrap();
        let x = GSet::trivial(&g, (0..4).map(|i| i.to_string()).collect());
        assert_eq!(orbits(&x).len(), 4);
        assert_eq!(stabilizer(&g, &x, 2).unwrap().order(), 4);
    }

    #[test]
    fn relabeled_regular_sets_are_isomorphic() {
        let g = preset("Z3").unwrap();
        let x = GSet::regular(&g);
        let y = relabeled_regular(&g, &[2, 0, 1]);
        let map = find_gset_isomorphism(&g, &x, &y).unwrap().unwrap();
        assert!(is_equivariant(&g, &x, &y, &map));
        // Brute force over all bijections agrees that some exist.
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        assert!(perms.iter().any(|p| is_equivariant(&g, &x, &y, p)));
    }

    #[test]
    fn regular_versus_fixed_points() {
        let g = preset("Z4").unwrap();
        let x = GSet::regular(&g);
        let y = GSet::trivial(&g, (0..4).map(|i| i.to_string()).collect());
        assert_eq!(find_gset_isomorphism(&g, &x, &y).unwrap(), None);
    }

    #[test]
    fn invalid_action_is_rejected() {
        let g = preset("Z3").unwrap();
        let gen = g.generators()[0];
        let mut action = vec![vec![0, 1, 2]; 3];
        action[gen] = vec![1, 0, 2];
        let points = (0..3).map(|i| i.to_string()).collect();
        assert!(GSet::new(&g, points, action, Side::Left).is_err());
    }

    #[test]
    fn right_action_flips_to_left() {
        let g = preset("S3").unwrap();
        let action: Vec<Vec<usize>> = g.elements().map(|h| g.elements().map(|x| g.mul(x, h)).collect()).collect();
        let right = GSet::new(&g, g.labels().to_vec(), action, Side::Right).unwrap();
        let left = right.flipped(&g);
        assert_eq!(left.side(), Side::Left);
        // Re-validate through the checked constructor.
        GSet::new(&g, left.points().to_vec(), left.action.clone(), Side::Left).unwrap();
        assert_eq!(left.flipped(&g), right);
    }

    #[test]
    fn json_roundtrip() {
        let g = preset("D3").unwrap();
        let x = coset_gset(&g, &crate::group::closure_of(&g, &[g.generators()[1]])).unwrap();
        let back = GSet::from_json(&g, &x.to_json()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn orbit_stabilizer_and_coset_isomorphism_on_all_s4_cosets() {
        let g = preset("S4").unwrap();
        for h in crate::group::enumerate_subgroups(&g) {
            let x = coset_gset(&g, &h).unwrap();
            for p in 0..x.len() {
                let s = stabilizer(&g, &x, p).unwrap();
                assert_eq!(x.len() * s.order(), g.order());
                let y = coset_gset(&g, &s).unwrap();
                let map = find_gset_isomorphism(&g, &y, &x).unwrap().expect("isomorphic");
                assert!(is_equivariant(&g, &y, &x, &map));
            }
        }
    }
}
