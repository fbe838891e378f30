//! Finite groups stored by multiplication table.
//!
//! Every group in this crate is small (order at most a few hundred), so the
//! full Cayley table is kept in memory and all questions about subgroups,
//! cosets and actions are answered by exhaustive enumeration.

mod gset;
mod perm;
mod subgroup;

pub use gset::{find_gset_isomorphism, orbits, stabilizer, GSet, Side};
pub use perm::Permutation;
pub use subgroup::{
    closure_of, conjugacy_classes_of_subgroups, coset_gset, derived_subgroup, enumerate_subgroups, right_cosets,
    ConjClassOfSubgroups, Subgroup, SubgroupLattice,
};

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the order of groups produced by closure.
pub const DEFAULT_SIZE_CAP: usize = 10_000;

/// A finite group given by its multiplication table.
///
/// Element `0` need not be the identity in general, but every constructor in
/// this crate places the identity first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    generators: Vec<usize>,
    permutations: Option<Vec<Permutation>>,
}

/// Input to [`build_group`].
#[derive(Debug, Clone)]
pub enum GroupSpec {
    Preset(String),
    Generators(Vec<Vec<usize>>),
}

/// Builds a permutation group either from a named preset (`Z5`, `D4`, `A4`,
/// `S4`, `A5`, `S5`, ...) or from explicit generator permutations.
pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    match spec {
        GroupSpec::Preset(name) => preset(name),
        GroupSpec::Generators(gens) => {
            let perms = gens
                .iter()
                .enumerate()
                .map(|(index, images)| {
                    Permutation::new(images.clone()).ok_or(Error::NotAPermutation { index, degree: images.len() })
                })
                .collect::<Result<Vec<_>>>()?;
            FiniteGroup::from_permutations("G", &perms, DEFAULT_SIZE_CAP)
        }
    }
}

/// Named permutation-group presets.
pub fn preset(name: &str) -> Result<FiniteGroup> {
    let unknown = || Error::UnknownPreset(name.to_string());
    let trimmed = name.trim();
    if trimmed.eq_ignore_ascii_case("trivial") || trimmed == "1" {
        return FiniteGroup::from_permutations("1", &[Permutation::identity(1)], DEFAULT_SIZE_CAP);
    }
    let (family, rest) = trimmed.split_at(1);
    let n: usize = rest.parse().map_err(|_| unknown())?;
    let gens: Vec<Permutation> = match family {
        "Z" | "C" => {
            if n == 0 {
                return Err(unknown());
            }
            vec![Permutation::cycle(n, &(0..n).collect::<Vec<_>>())]
        }
        "D" => match n {
            0 => return Err(unknown()),
            1 => vec![Permutation::cycle(2, &[0, 1])],
            // Klein four-group acting on four points.
            2 => {
                vec![Permutation::from_cycles(4, &[&[0, 1], &[2, 3]]), Permutation::from_cycles(4, &[&[0, 2], &[1, 3]])]
            }
            _ => {
                let rot = Permutation::new((0..n).map(|i| (i + 1) % n).collect()).unwrap();
                let flip = Permutation::new((0..n).map(|i| (n - i) % n).collect()).unwrap();
                vec![rot, flip]
            }
        },
        "S" => match n {
            0 => return Err(unknown()),
            1 => vec![Permutation::identity(1)],
            2 => vec![Permutation::cycle(2, &[0, 1])],
            _ => vec![Permutation::cycle(n, &[0, 1]), Permutation::cycle(n, &(0..n).collect::<Vec<_>>())],
        },
        "A" => match n {
            0 => return Err(unknown()),
            1 | 2 => vec![Permutation::identity(n)],
            3 => vec![Permutation::cycle(3, &[0, 1, 2])],
            _ => {
                // 3-cycles (0 1 k) generate A_n.
                (2..n).map(|k| Permutation::cycle(n, &[0, 1, k])).collect()
            }
        },
        _ => return Err(unknown()),
    };
    let label = format!("{family}{n}");
    FiniteGroup::from_permutations(&label, &gens, DEFAULT_SIZE_CAP)
}

/// Closes `gens` under `mul`, deduplicating with `same`.
///
/// Returns the elements in breadth-first order (identity first), the
/// multiplication table and the indices of the generators.
/// Elements, multiplication table and generator indices.
pub type Closure<T> = (Vec<T>, Vec<Vec<usize>>, Vec<usize>);

pub fn close_under<T: Clone>(
    identity: T,
    gens: &[T],
    mul: impl Fn(&T, &T) -> T,
    same: impl Fn(&T, &T) -> bool,
    cap: usize,
) -> Result<Closure<T>> {
    let mut elems = vec![identity];
    let find = |elems: &[T], x: &T| elems.iter().position(|e| same(e, x));
    let mut gen_idx = Vec::with_capacity(gens.len());
    for g in gens {
        match find(&elems, g) {
            Some(i) => gen_idx.push(i),
            None => {
                elems.push(g.clone());
                gen_idx.push(elems.len() - 1);
            }
        }
    }
    let mut frontier = 0;
    while frontier < elems.len() {
        let x = elems[frontier].clone();
        for g in gens {
            let y = mul(&x, g);
            if find(&elems, &y).is_none() {
                if elems.len() >= cap {
                    return Err(Error::SizeCapExceeded { cap });
                }
                elems.push(y);
            }
        }
        frontier += 1;
    }
    let mut table = vec![vec![0; elems.len()]; elems.len()];
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            let p = mul(a, b);
            table[i][j] = find(&elems, &p)
                .ok_or_else(|| Error::InvalidTable("closure is not closed under multiplication".into()))?;
        }
    }
    Ok((elems, table, gen_idx))
}

impl FiniteGroup {
    /// Builds a group from an explicit multiplication table, checking the
    /// group axioms exhaustively.
    pub fn from_table(
        name: &str,
        labels: Vec<String>,
        table: Vec<Vec<usize>>,
        generators: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidTable(format!("{} labels for {} elements", labels.len(), n)));
        }
        for row in &table {
            if row.len() != n || row.iter().any(|&x| x >= n) {
                return Err(Error::InvalidTable("table is not square over its index set".into()));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidTable("no identity element".into()))?;
        let mut inverses = vec![usize::MAX; n];
        for x in 0..n {
            let inv = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| Error::InvalidTable(format!("element {x} has no inverse")))?;
            inverses[x] = inv;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidTable(format!("associativity fails at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let mut group = FiniteGroup {
            name: name.to_string(),
            labels,
            table,
            identity,
            inverses,
            generators: Vec::new(),
            permutations: None,
        };
        group.generators = match generators {
            Some(g) if !g.is_empty() && g.iter().all(|&x| x < n) => {
                if closure_of(&group, &g).order() != n {
                    return Err(Error::InvalidTable("declared generators do not generate".into()));
                }
                g
            }
            _ => group.greedy_generators(),
        };
        Ok(group)
    }

    /// Closure of permutation generators. Elements are sorted
    /// lexicographically by their image vectors, so the identity is element 0.
    pub fn from_permutations(name: &str, gens: &[Permutation], cap: usize) -> Result<Self> {
        let degree = gens.iter().map(Permutation::degree).max().unwrap_or(1).max(1);
        let gens: Vec<Permutation> = gens.iter().map(|g| g.extended(degree)).collect();
        let mut seen: HashMap<Permutation, ()> = HashMap::new();
        let id = Permutation::identity(degree);
        let mut queue = VecDeque::from([id.clone()]);
        seen.insert(id, ());
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = x.compose(g);
                if !seen.contains_key(&y) {
                    if seen.len() >= cap {
                        return Err(Error::SizeCapExceeded { cap });
                    }
                    seen.insert(y.clone(), ());
                    queue.push_back(y);
                }
            }
        }
        let mut elems: Vec<Permutation> = seen.into_keys().collect();
        elems.sort();
        let index: HashMap<&Permutation, usize> = elems.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let table: Vec<Vec<usize>> =
            elems.iter().map(|a| elems.iter().map(|b| index[&a.compose(b)]).collect()).collect();
        let generators: Vec<usize> = gens.iter().map(|g| index[g]).collect();
        let labels = elems.iter().map(Permutation::cycle_notation).collect();
        let mut group = Self::from_table(name, labels, table, Some(generators))?;
        group.permutations = Some(elems);
        Ok(group)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// `x g x⁻¹`.
    pub fn conjugate(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(x, g), self.inv(x))
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn permutations(&self) -> Option<&[Permutation]> {
        self.permutations.as_deref()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    /// Looks an element up by label; falls back to parsing a numeric index
    /// or, for permutation groups, cycle notation.
    pub fn find(&self, label: &str) -> Option<usize> {
        if let Some(i) = self.labels.iter().position(|l| l == label) {
            return Some(i);
        }
        if let Ok(i) = label.parse::<usize>() {
            return (i < self.order()).then_some(i);
        }
        let perms = self.permutations.as_ref()?;
        let degree = perms[0].degree();
        let p = Permutation::parse_cycles(degree, label)?;
        perms.iter().position(|q| *q == p)
    }

    /// Returns a copy with new element labels.
    pub fn relabeled(mut self, name: &str, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.order() {
            return Err(Error::InvalidTable("label count differs from group order".into()));
        }
        self.name = name.to_string();
        self.labels = labels;
        Ok(self)
    }

    /// Shortest-word labels in the stored generators, e.g. `e`, `a`, `a^2b`.
    /// Falls back to `g0`, `g1`, ... when `names` does not match the
    /// generator count.
    pub fn word_labels(&self, names: &[&str]) -> Vec<String> {
        let fallback: Vec<String>;
        let names: Vec<&str> = if names.len() == self.generators.len() {
            names.to_vec()
        } else {
            fallback = (0..self.generators.len()).map(|i| format!("g{i}")).collect();
            fallback.iter().map(String::as_str).collect()
        };
        let mut words: Vec<Option<Vec<usize>>> = vec![None; self.order()];
        words[self.identity] = Some(Vec::new());
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            let wx = words[x].clone().unwrap();
            for (k, &s) in self.generators.iter().enumerate() {
                let y = self.mul(x, s);
                if words[y].is_none() {
                    let mut w = wx.clone();
                    w.push(k);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        words
            .into_iter()
            .map(|w| {
                let w = w.expect("generators generate");
                if w.is_empty() {
                    return "e".to_string();
                }
                let mut out = String::new();
                let mut i = 0;
                while i < w.len() {
                    let mut j = i;
                    while j < w.len() && w[j] == w[i] {
                        j += 1;
                    }
                    out.push_str(names[w[i]]);
                    if j - i > 1 {
                        out.push_str(&format!("^{}", j - i));
                    }
                    i = j;
                }
                out
            })
            .collect()
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    /// Least common multiple of all element orders.
    pub fn exponent(&self) -> usize {
        self.elements().map(|g| self.element_order(g)).fold(1, lcm)
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Conjugacy classes of elements, each sorted, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut assigned = vec![false; self.order()];
        let mut classes = Vec::new();
        for g in self.elements() {
            if assigned[g] {
                continue;
            }
            let mut class: Vec<usize> = self.elements().map(|x| self.conjugate(g, x)).collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                assigned[c] = true;
            }
            classes.push(class);
        }
        classes
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut current = closure_of(self, &[]);
        // Prefer elements of large order so that cyclic groups get one generator.
        let mut candidates: Vec<usize> = self.elements().collect();
        candidates.sort_by_key(|&g| (std::cmp::Reverse(self.element_order(g)), g));
        for g in candidates {
            if current.order() == self.order() {
                break;
            }
            if !current.contains(g) {
                gens.push(g);
                current = closure_of(self, &gens);
            }
        }
        gens
    }

    /// Extends images of the stored generators to a map on all elements,
    /// returning `None` if the assignment is not a homomorphism.
    pub fn extend_homomorphism<T: Clone>(
        &self,
        gen_images: &[T],
        identity: T,
        mul: impl Fn(&T, &T) -> T,
        same: impl Fn(&T, &T) -> bool,
    ) -> Option<Vec<T>> {
        if gen_images.len() != self.generators.len() {
            return None;
        }
        let mut image: Vec<Option<T>> = vec![None; self.order()];
        image[self.identity] = Some(identity);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            let fx = image[x].clone().unwrap();
            for (s, fs) in self.generators.iter().zip(gen_images) {
                let y = self.mul(x, *s);
                let fy = mul(&fx, fs);
                match &image[y] {
                    Some(existing) => {
                        if !same(existing, &fy) {
                            return None;
                        }
                    }
                    None => {
                        image[y] = Some(fy);
                        queue.push_back(y);
                    }
                }
            }
        }
        image.into_iter().collect()
    }

    /// Searches for an isomorphism `self → other` by trying all generator
    /// images of matching orders.
    pub fn find_isomorphism(&self, other: &FiniteGroup) -> Option<Vec<usize>> {
        if self.order() != other.order() {
            return None;
        }
        let candidates: Vec<Vec<usize>> = self
            .generators
            .iter()
            .map(|&s| {
                let k = self.element_order(s);
                other.elements().filter(|&t| other.element_order(t) == k).collect()
            })
            .collect();
        let mut choice = vec![0usize; candidates.len()];
        if candidates.iter().any(Vec::is_empty) {
            return None;
        }
        loop {
            let images: Vec<usize> = choice.iter().zip(&candidates).map(|(&c, v)| v[c]).collect();
            if let Some(map) =
                self.extend_homomorphism(&images, other.identity(), |a, b| other.mul(*a, *b), |a, b| a == b)
            {
                let mut seen = vec![false; other.order()];
                if map.iter().all(|&m| !std::mem::replace(&mut seen[m], true)) {
                    return Some(map);
                }
            }
            // Odometer increment.
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return None;
                }
                choice[k] += 1;
                if choice[k] < candidates[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    #[serde(default)]
    name: Option<String>,
    elements: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    #[serde(default)]
    generators: Option<Vec<usize>>,
}

impl Serialize for FiniteGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupJson {
            name: Some(self.name.clone()),
            elements: self.labels.clone(),
            table: self.table.clone(),
            identity: self.identity,
            generators: Some(self.generators.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GroupJson::deserialize(d)?;
        let group =
            FiniteGroup::from_table(raw.name.as_deref().unwrap_or("G"), raw.elements, raw.table, raw.generators)
                .map_err(serde::de::Error::custom)?;
        if group.identity != raw.identity {
            return Err(serde::de::Error::custom("declared identity does not act as identity"));
        }
        Ok(group)
    }
}
