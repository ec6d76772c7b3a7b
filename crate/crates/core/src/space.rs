//! Finite T0 spaces as specialization posets; open sets are down-closed subsets.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Diagnostic {
    DuplicatePoint(String),
    UnknownPoint(String),
    TooManyPoints(usize),
    Reflexivity(String),
    Antisymmetry(String, String),
    Transitivity(String, String, String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicatePoint(p) => write!(f, "duplicate point {p}"),
            Diagnostic::UnknownPoint(p) => write!(f, "unknown point {p}"),
            Diagnostic::TooManyPoints(n) => write!(f, "{n} points exceed the limit of {MAX_POINTS}"),
            Diagnostic::Reflexivity(p) => write!(f, "reflexivity violated: missing ({p},{p})"),
            Diagnostic::Antisymmetry(x, y) => write!(f, "antisymmetry violated at ({x},{y})"),
            Diagnostic::Transitivity(x, y, z) => {
                write!(f, "transitivity violated: ({x},{y}) and ({y},{z}) but not ({x},{z})")
            }
        }
    }
}

/// Checks the poset axioms on a relation given as `(x, y)` pairs meaning `x ≤ y`.
pub fn validate(points: &[String], pairs: &[(String, String)]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if points.len() > MAX_POINTS {
        out.push(Diagnostic::TooManyPoints(points.len()));
        return out;
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].contains(p) {
            out.push(Diagnostic::DuplicatePoint(p.clone()));
        }
    }
    let n = points.len();
    let idx = |s: &str| points.iter().position(|p| p == s);
    let mut rel = vec![vec![false; n]; n];
    for (a, b) in pairs {
        match (idx(a), idx(b)) {
            (Some(i), Some(j)) => rel[i][j] = true,
            (None, _) => out.push(Diagnostic::UnknownPoint(a.clone())),
            (_, None) => out.push(Diagnostic::UnknownPoint(b.clone())),
        }
    }
    if !out.is_empty() {
        return out;
    }
    for i in 0..n {
        if !rel[i][i] {
            out.push(Diagnostic::Reflexivity(points[i].clone()));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rel[i][j] && rel[j][i] {
                out.push(Diagnostic::Antisymmetry(points[i].clone(), points[j].clone()));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !rel[i][j] {
                continue;
            }
            for k in 0..n {
                if k != j && rel[j][k] && !rel[i][k] {
                    out.push(Diagnostic::Transitivity(
                        points[i].clone(),
                        points[j].clone(),
                        points[k].clone(),
                    ));
                }
            }
        }
    }
    out
}

/// Finite T0 space. `below[y]` is the bitmask of `{x : x ≤ y}`, the minimal open set of `y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteSpace {
    id: u64,
    points: Vec<String>,
    below: Vec<u64>,
}

fn render(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl FiniteSpace {
    /// Builds a space from the full order relation; the relation must already be a partial order.
    pub fn from_relation(points: Vec<String>, pairs: &[(String, String)]) -> Result<Self> {
        let diags = validate(&points, pairs);
        if !diags.is_empty() {
            return Err(Error::parse("space", render(&diags)));
        }
        let n = points.len();
        let mut below = vec![0u64; n];
        for (a, b) in pairs {
            let i = points.iter().position(|p| p == a).unwrap();
            let j = points.iter().position(|p| p == b).unwrap();
            below[j] |= 1 << i;
        }
        Ok(Self::assemble(points, below))
    }

    /// Builds a space from covering pairs, taking the reflexive-transitive closure.
    pub fn from_covers(points: Vec<String>, covers: &[(String, String)]) -> Result<Self> {
        let n = points.len();
        let mut pairs: Vec<(String, String)> = points.iter().map(|p| (p.clone(), p.clone())).collect();
        pairs.extend(covers.iter().cloned());
        let pre = validate(&points, &pairs);
        if pre.iter().any(|d| matches!(d, Diagnostic::UnknownPoint(_) | Diagnostic::DuplicatePoint(_) | Diagnostic::TooManyPoints(_))) {
            return Err(Error::parse("space", render(&pre)));
        }
        let idx = |s: &str| points.iter().position(|p| p == s).unwrap();
        let mut rel = vec![vec![false; n]; n];
        for (a, b) in &pairs {
            rel[idx(a)][idx(b)] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if rel[i][k] && rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
        let closed: Vec<(String, String)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| rel[i][j])
            .map(|(i, j)| (points[i].clone(), points[j].clone()))
            .collect();
        Self::from_relation(points, &closed)
    }

    pub fn point() -> Self {
        Self::discrete(&["pt"])
    }

    pub fn discrete(names: &[&str]) -> Self {
        let points: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let below = (0..points.len()).map(|i| 1u64 << i).collect();
        Self::assemble(points, below)
    }

    /// Two points `o ≤ c`: `{o}` is open, `c` is closed.
    pub fn sierpinski() -> Self {
        Self::assemble(vec!["o".into(), "c".into()], vec![0b01, 0b11])
    }

    fn assemble(points: Vec<String>, below: Vec<u64>) -> Self {
        let mut h = DefaultHasher::new();
        points.hash(&mut h);
        below.hash(&mut h);
        FiniteSpace {
            id: h.finish(),
            points,
            below,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
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

    pub fn name(&self, x: usize) -> &str {
        &self.points[x]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::pre(format!("unknown point {name}")))
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.below[y] >> x & 1 == 1
    }

    fn full_mask(&self) -> u64 {
        if self.points.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.points.len()) - 1
        }
    }

    pub fn whole(&self) -> OpenSet {
        OpenSet {
            space: self.id,
            members: self.full_mask(),
        }
    }

    pub fn empty_open(&self) -> OpenSet {
        OpenSet {
            space: self.id,
            members: 0,
        }
    }

    pub fn minimal_open(&self, x: usize) -> OpenSet {
        OpenSet {
            space: self.id,
            members: self.below[x],
        }
    }

    pub fn minimal_open_named(&self, name: &str) -> Result<OpenSet> {
        Ok(self.minimal_open(self.index(name)?))
    }

    pub fn is_down_closed(&self, mask: u64) -> bool {
        (0..self.len()).all(|y| mask >> y & 1 == 0 || self.below[y] & !mask == 0)
    }

    pub fn is_up_closed(&self, mask: u64) -> bool {
        self.is_down_closed(self.full_mask() & !mask)
    }

    pub fn open_set(&self, mask: u64) -> Result<OpenSet> {
        if mask & !self.full_mask() != 0 || !self.is_down_closed(mask) {
            return Err(Error::pre(format!("{mask:#b} is not an open set")));
        }
        Ok(OpenSet {
            space: self.id,
            members: mask,
        })
    }

    pub fn open_from_names(&self, names: &[String]) -> Result<OpenSet> {
        let mut mask = 0u64;
        for n in names {
            mask |= 1 << self.index(n)?;
        }
        self.open_set(mask)
    }

    /// Smallest open set containing the given points.
    pub fn open_hull(&self, mask: u64) -> OpenSet {
        let mut m = 0;
        for y in 0..self.len() {
            if mask >> y & 1 == 1 {
                m |= self.below[y];
            }
        }
        OpenSet {
            space: self.id,
            members: m,
        }
    }

    /// Points ordered so that every point precedes everything strictly below it.
    pub fn descending_points(&self) -> Vec<usize> {
        let mut pts: Vec<usize> = (0..self.len()).collect();
        pts.sort_by_key(|&x| (std::cmp::Reverse(self.below[x].count_ones()), x));
        pts
    }

    /// Induced subspace on a set of points; returns the subspace and the old index of each new point.
    pub fn subspace(&self, mask: u64) -> (FiniteSpace, Vec<usize>) {
        let keep: Vec<usize> = (0..self.len()).filter(|&x| mask >> x & 1 == 1).collect();
        let points = keep.iter().map(|&x| self.points[x].clone()).collect();
        let below = keep
            .iter()
            .map(|&y| {
                keep.iter()
                    .enumerate()
                    .filter(|(_, &x)| self.leq(x, y))
                    .fold(0u64, |m, (i, _)| m | 1 << i)
            })
            .collect();
        (Self::assemble(points, below), keep)
    }

    pub fn members(&self, u: &OpenSet) -> Vec<usize> {
        (0..self.len()).filter(|&x| u.contains(x)).collect()
    }

    pub fn all_open_sets(&self) -> Vec<OpenSet> {
        let n = self.len();
        assert!(n <= 16, "enumeration of open sets only for small spaces");
        (0..1u64 << n)
            .filter(|&m| self.is_down_closed(m))
            .map(|m| OpenSet {
                space: self.id,
                members: m,
            })
            .collect()
    }

    pub fn format_set(&self, mask: u64) -> String {
        let names: Vec<&str> = (0..self.len())
            .filter(|&x| mask >> x & 1 == 1)
            .map(|x| self.points[x].as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpenSet {
    space: u64,
    members: u64,
}

impl OpenSet {
    pub fn members(&self) -> u64 {
        self.members
    }

    pub fn space_id(&self) -> u64 {
        self.space
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members >> x & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn is_subset(&self, other: &OpenSet) -> bool {
        self.members & !other.members == 0
    }

    pub fn intersect(&self, other: &OpenSet) -> Result<OpenSet> {
        if self.space != other.space {
            return Err(Error::Mismatch("open sets of different spaces".into()));
        }
        Ok(OpenSet {
            space: self.space,
            members: self.members & other.members,
        })
    }

    pub fn union(&self, other: &OpenSet) -> Result<OpenSet> {
        if self.space != other.space {
            return Err(Error::Mismatch("open sets of different spaces".into()));
        }
        Ok(OpenSet {
            space: self.space,
            members: self.members | other.members,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |&x| self.contains(x))
    }

    /// Re-indexes into a subspace produced by [`FiniteSpace::subspace`].
    pub fn restrict_to(&self, sub: &FiniteSpace, keep: &[usize]) -> OpenSet {
        let members = keep
            .iter()
            .enumerate()
            .filter(|(_, &x)| self.contains(x))
            .fold(0u64, |m, (i, _)| m | 1 << i);
        OpenSet {
            space: sub.id,
            members,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn p(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn sierpinski_minimal_opens() {
        let x = FiniteSpace::sierpinski();
        let o = x.index("o").unwrap();
        let c = x.index("c").unwrap();
        assert_eq!(x.minimal_open(o).members(), 0b01);
        assert_eq!(x.minimal_open(c).members(), 0b11);
        let u = x.minimal_open(o);
        assert_eq!(u.intersect(&x.whole()).unwrap(), u);
        assert_eq!(u.intersect(&x.empty_open()).unwrap(), x.empty_open());
        assert_eq!(x.descending_points(), vec![c, o]);
    }

    #[test]
    fn discrete_points_are_open() {
        let x = FiniteSpace::discrete(&["a", "b", "c"]);
        for i in 0..3 {
            assert_eq!(x.minimal_open(i).members(), 1 << i);
        }
    }

    #[test]
    fn diagnostics() {
        let pts = s(&["x", "y"]);
        let ok = vec![p("x", "x"), p("y", "y"), p("x", "y")];
        assert!(validate(&pts, &ok).is_empty());
        let cyc = vec![p("x", "x"), p("y", "y"), p("x", "y"), p("y", "x")];
        let d = validate(&pts, &cyc);
        assert_eq!(d, vec![Diagnostic::Antisymmetry("x".into(), "y".into())]);
        assert_eq!(d[0].to_string(), "antisymmetry violated at (x,y)");
        let missing = vec![p("x", "x"), p("x", "y")];
        assert_eq!(validate(&pts, &missing), vec![Diagnostic::Reflexivity("y".into())]);
        let pts3 = s(&["a", "b", "c"]);
        let nontrans = vec![p("a", "a"), p("b", "b"), p("c", "c"), p("a", "b"), p("b", "c")];
        assert_eq!(
            validate(&pts3, &nontrans),
            vec![Diagnostic::Transitivity("a".into(), "b".into(), "c".into())]
        );
    }

    #[test]
    fn covers_closure() {
        let x = FiniteSpace::from_covers(s(&["a", "b", "c"]), &[p("a", "b"), p("b", "c")]).unwrap();
        assert!(x.leq(0, 2));
        assert!(FiniteSpace::from_covers(s(&["a", "b"]), &[p("a", "b"), p("b", "a")]).is_err());
    }

    #[test]
    fn space_mismatch() {
        let a = FiniteSpace::sierpinski();
        let b = FiniteSpace::point();
        assert!(a.whole().intersect(&b.whole()).is_err());
    }
}
