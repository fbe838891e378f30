use std::fmt;

use serde::{Deserialize, Serialize};

/// A permutation of `0..n` stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    /// Returns `None` unless `images` is a bijection of `0..images.len()`.
    pub fn new(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// The cyclic permutation `c[0] → c[1] → ... → c[0]` on `n` points.
    pub fn cycle(n: usize, c: &[usize]) -> Self {
        Self::from_cycles(n, &[c])
    }

    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        for c in cycles {
            for (k, &from) in c.iter().enumerate() {
                images[from] = c[(k + 1) % c.len()];
            }
        }
        Permutation(images)
    }

    /// Parses 1-based cycle notation such as `(1,2,3)(4,5)` or `()`.
    pub fn parse_cycles(n: usize, text: &str) -> Option<Self> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut images: Vec<usize> = (0..n).collect();
        let mut rest = text.as_str();
        let mut touched = vec![false; n];
        while !rest.is_empty() {
            let body = rest.strip_prefix('(')?;
            let close = body.find(')')?;
            let inner = &body[..close];
            rest = &body[close + 1..];
            if inner.is_empty() {
                continue;
            }
            let pts = inner
                .split(',')
                .map(|s| s.parse::<usize>().ok().filter(|&p| p >= 1 && p <= n).map(|p| p - 1))
                .collect::<Option<Vec<_>>>()?;
            for (k, &from) in pts.iter().enumerate() {
                if std::mem::replace(&mut touched[from], true) {
                    return None;
                }
                images[from] = pts[(k + 1) % pts.len()];
            }
        }
        Some(Permutation(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// Pads with fixed points up to `n`.
    pub fn extended(&self, n: usize) -> Self {
        let mut images = self.0.clone();
        images.extend(self.0.len()..n);
        Permutation(images)
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// 1-based cycle notation with fixed points omitted; the identity is `()`.
    pub fn cycle_notation(&self) -> String {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cyc.push((x + 1).to_string());
                x = self.0[x];
            }
            out.push('(');
            out.push_str(&cyc.join(","));
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cycle_notation())
    }
}
