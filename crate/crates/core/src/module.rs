//! Submodules of free modules over a polynomial ring: Gröbner bases (position over term),
//! syzygies, lifting, finite presentations and isomorphism testing.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Coeff, Field};
use crate::groebner::GroebnerBasis;
use crate::linalg::{self, Matrix};
use crate::poly::{divides, exps_sub, lcm, Exps, Poly, PolyRing};

/// Element of a free module `P^r`, stored densely by component.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModVec(pub Vec<Poly>);

impl ModVec {
    pub fn zero(ring: PolyRing, rank: usize) -> Self {
        ModVec(vec![Poly::zero(ring); rank])
    }

    pub fn unit(ring: PolyRing, rank: usize, k: usize) -> Self {
        let mut v = Self::zero(ring, rank);
        v.0[k] = ring.one();
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly::is_zero)
    }

    /// Leading component and term under position-over-term.
    pub fn lead(&self) -> Option<(usize, &Exps, &Coeff)> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_zero())
            .map(|(k, p)| (k, p.lm(), p.lc()))
    }

    pub fn add(&self, o: &ModVec) -> ModVec {
        ModVec(self.0.iter().zip(&o.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn sub(&self, o: &ModVec) -> ModVec {
        ModVec(self.0.iter().zip(&o.0).map(|(a, b)| a.sub(b)).collect())
    }

    pub fn neg(&self) -> ModVec {
        ModVec(self.0.iter().map(Poly::neg).collect())
    }

    pub fn scale_poly(&self, p: &Poly) -> ModVec {
        ModVec(self.0.iter().map(|a| a.mul(p)).collect())
    }

    pub fn mul_term(&self, m: &[u32], c: &Coeff) -> ModVec {
        ModVec(self.0.iter().map(|a| a.mul_term(m, c)).collect())
    }

    pub fn add_mul_term(&mut self, c: &Coeff, m: &[u32], g: &ModVec) {
        for (a, b) in self.0.iter_mut().zip(&g.0) {
            a.add_mul_term(c, m, b);
        }
    }

    pub fn concat(&self, o: &ModVec) -> ModVec {
        ModVec(self.0.iter().chain(&o.0).cloned().collect())
    }

    pub fn slice(&self, from: usize, to: usize) -> ModVec {
        ModVec(self.0[from..to].to_vec())
    }

    pub fn map_polys(&self, f: impl Fn(&Poly) -> Poly) -> ModVec {
        ModVec(self.0.iter().map(f).collect())
    }

    fn monic(&self) -> ModVec {
        match self.lead() {
            None => self.clone(),
            Some((_, _, c)) => {
                let field = self.0[0].field();
                let inv = field.inv(c);
                ModVec(self.0.iter().map(|p| p.scale(&inv)).collect())
            }
        }
    }
}

/// `Σ coeffs[i] * vecs[i]`.
pub fn combine(ring: PolyRing, rank: usize, coeffs: &[Poly], vecs: &[ModVec]) -> ModVec {
    let mut acc = ModVec::zero(ring, rank);
    for (c, v) in coeffs.iter().zip(vecs) {
        if !c.is_zero() {
            acc = acc.add(&v.scale_poly(c));
        }
    }
    acc
}

fn pot_cmp(ring: PolyRing, a: (usize, &Exps), b: (usize, &Exps)) -> Ordering {
    b.0.cmp(&a.0).then_with(|| ring.order.cmp(a.1, b.1))
}

fn find_reducer<'a>(basis: &'a [ModVec], k: usize, e: &Exps) -> Option<&'a ModVec> {
    basis.iter().find(|g| match g.lead() {
        Some((gk, gm, _)) => gk == k && divides(gm, e),
        None => false,
    })
}

/// Full normal form of `v` modulo `basis`.
pub fn reduce_vec(ring: PolyRing, v: &ModVec, basis: &[ModVec]) -> ModVec {
    let field = ring.field;
    let mut p = v.clone();
    let mut rem = ModVec::zero(ring, v.rank());
    while let Some((k, e, c)) = p.lead().map(|(k, e, c)| (k, e.clone(), c.clone())) {
        if let Some(g) = find_reducer(basis, k, &e) {
            let (_, gm, gc) = g.lead().unwrap();
            let q = field.div(&c, gc);
            let m = exps_sub(&e, gm);
            p.add_mul_term(&field.neg(&q), &m, g);
        } else {
            let t = Poly::monomial(ring, e, c);
            p.0[k] = p.0[k].sub(&t);
            rem.0[k] = rem.0[k].add(&t);
        }
    }
    rem
}

fn spoly_vec(ring: PolyRing, f: &ModVec, g: &ModVec) -> ModVec {
    let field = ring.field;
    let (_, fm, fc) = f.lead().unwrap();
    let (_, gm, gc) = g.lead().unwrap();
    let l = lcm(fm, gm);
    let mut s = f.mul_term(&exps_sub(&l, fm), &field.inv(fc));
    s.add_mul_term(&field.neg(&field.inv(gc)), &exps_sub(&l, gm), g);
    s
}

/// Gröbner basis of a submodule of `P^rank`, position over term.
#[derive(Clone, Debug)]
pub struct ModuleGb {
    ring: PolyRing,
    rank: usize,
    basis: Vec<ModVec>,
}

impl ModuleGb {
    pub fn new(ring: PolyRing, rank: usize, gens: &[ModVec]) -> Self {
        let mut basis: Vec<ModVec> = Vec::new();
        for g in gens {
            assert_eq!(g.rank(), rank, "module generator rank");
            let r = reduce_vec(ring, g, &basis);
            if !r.is_zero() {
                basis.push(r.monic());
            }
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let same_comp = |a: &ModVec, b: &ModVec| a.lead().unwrap().0 == b.lead().unwrap().0;
        for j in 0..basis.len() {
            for i in 0..j {
                if same_comp(&basis[i], &basis[j]) {
                    pairs.push((i, j));
                }
            }
        }
        let pair_key = |basis: &[ModVec], (i, j): (usize, usize)| {
            let (k, a, _) = basis[i].lead().unwrap();
            let (_, b, _) = basis[j].lead().unwrap();
            (k, lcm(a, b))
        };
        while !pairs.is_empty() {
            let mut best = 0;
            let mut best_key = pair_key(&basis, pairs[0]);
            for (idx, &pr) in pairs.iter().enumerate().skip(1) {
                let key = pair_key(&basis, pr);
                if pot_cmp(ring, (key.0, &key.1), (best_key.0, &best_key.1)) == Ordering::Less {
                    best = idx;
                    best_key = key;
                }
            }
            let (i, j) = pairs.swap_remove(best);
            let (k, l) = best_key;
            let chain = (0..basis.len()).any(|t| {
                t != i
                    && t != j
                    && matches!(basis[t].lead(), Some((tk, tm, _)) if tk == k && divides(tm, &l))
                    && !pairs.contains(&(i.min(t), i.max(t)))
                    && !pairs.contains(&(j.min(t), j.max(t)))
            });
            if chain {
                continue;
            }
            let r = reduce_vec(ring, &spoly_vec(ring, &basis[i], &basis[j]), &basis);
            if r.is_zero() {
                continue;
            }
            let n = basis.len();
            basis.push(r.monic());
            for t in 0..n {
                if same_comp(&basis[t], &basis[n]) {
                    pairs.push((t, n));
                }
            }
        }
        let mut minimal: Vec<ModVec> = Vec::new();
        for g in basis {
            let (gk, gm, _) = g.lead().unwrap();
            let covered = minimal.iter().any(|h| {
                let (hk, hm, _) = h.lead().unwrap();
                hk == gk && divides(hm, gm)
            });
            if covered {
                continue;
            }
            let (gk, gm) = (gk, gm.clone());
            minimal.retain(|h| {
                let (hk, hm, _) = h.lead().unwrap();
                !(hk == gk && divides(&gm, hm))
            });
            minimal.push(g);
        }
        ModuleGb {
            ring,
            rank,
            basis: minimal,
        }
    }

    pub fn ring(&self) -> PolyRing {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis(&self) -> &[ModVec] {
        &self.basis
    }

    pub fn reduce(&self, v: &ModVec) -> ModVec {
        reduce_vec(self.ring, v, &self.basis)
    }

    pub fn contains(&self, v: &ModVec) -> bool {
        let field = self.ring.field;
        let mut p = v.clone();
        while let Some((k, e, c)) = p.lead().map(|(k, e, c)| (k, e.clone(), c.clone())) {
            let Some(g) = find_reducer(&self.basis, k, &e) else {
                return false;
            };
            let (_, gm, gc) = g.lead().unwrap();
            let q = field.div(&c, gc);
            p.add_mul_term(&field.neg(&q), &exps_sub(&e, gm), g);
        }
        true
    }

    /// Leading monomials per component.
    fn leads_by_component(&self) -> Vec<Vec<Exps>> {
        let mut out = vec![Vec::new(); self.rank];
        for g in &self.basis {
            let (k, m, _) = g.lead().unwrap();
            out[k].push(m.clone());
        }
        out
    }
}

/// Generators of `{c in P^n : Σ c_i gens[i] = 0}`.
pub fn syzygies(ring: PolyRing, rank: usize, gens: &[ModVec]) -> Vec<ModVec> {
    let n = gens.len();
    if n == 0 {
        return Vec::new();
    }
    let ext: Vec<ModVec> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| g.concat(&ModVec::unit(ring, n, i)))
        .collect();
    let gb = ModuleGb::new(ring, rank + n, &ext);
    gb.basis
        .iter()
        .filter(|g| g.lead().unwrap().0 >= rank)
        .map(|g| g.slice(rank, rank + n))
        .collect()
}

/// Expresses vectors as combinations of a fixed generating list.
#[derive(Clone, Debug)]
pub struct Lifter {
    gb: ModuleGb,
    rank: usize,
    n: usize,
}

impl Lifter {
    pub fn new(ring: PolyRing, rank: usize, gens: &[ModVec]) -> Self {
        let n = gens.len();
        let ext: Vec<ModVec> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| g.concat(&ModVec::unit(ring, n, i)))
            .collect();
        Lifter {
            gb: ModuleGb::new(ring, rank + n, &ext),
            rank,
            n,
        }
    }

    pub fn num_gens(&self) -> usize {
        self.n
    }

    /// Coefficients `c` with `Σ c_i gens[i] = v`, if `v` lies in the span.
    pub fn lift(&self, v: &ModVec) -> Option<ModVec> {
        let ring = self.gb.ring;
        let field = ring.field;
        let mut p = v.concat(&ModVec::zero(ring, self.n));
        loop {
            let lead = p.lead().map(|(k, e, c)| (k, e.clone(), c.clone()));
            match lead {
                None => return Some(ModVec::zero(ring, self.n)),
                Some((k, _, _)) if k >= self.rank => {
                    return Some(p.slice(self.rank, self.rank + self.n).neg());
                }
                Some((k, e, c)) => {
                    let g = find_reducer(&self.gb.basis, k, &e)?;
                    let (_, gm, gc) = g.lead().unwrap();
                    let q = field.div(&c, gc);
                    p.add_mul_term(&field.neg(&q), &exps_sub(&e, gm), g);
                }
            }
        }
    }

    pub fn contains(&self, v: &ModVec) -> bool {
        self.lift(v).is_some()
    }
}

/// Kernel of the map `(P/I)^cols -> (P/I)^rows` given by `m` (row-major), where `I` is the ideal of `g`.
pub fn syzygy_kernel(m: &[Vec<Poly>], g: &GroebnerBasis) -> Result<Vec<ModVec>> {
    let ring = g.ring();
    let rows = m.len();
    let cols = m.first().map(Vec::len).unwrap_or(0);
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Mismatch("ragged matrix".into()));
    }
    if m.iter().flatten().any(|p| p.ring().nvars != ring.nvars) {
        return Err(Error::Mismatch("matrix entries use another variable list".into()));
    }
    let mut gens: Vec<ModVec> = (0..cols)
        .map(|j| ModVec((0..rows).map(|i| m[i][j].with_order(ring.order)).collect()))
        .collect();
    for r in 0..rows {
        for p in g.gens() {
            let mut v = ModVec::zero(ring, rows);
            v.0[r] = p.clone();
            gens.push(v);
        }
    }
    let syz = syzygies(ring, rows, &gens);
    let mut out = Vec::new();
    for s in syz {
        let v = ModVec(s.0[..cols].iter().map(|p| g.reduce(p)).collect());
        if !v.is_zero() && !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

/// Finitely presented module `P^ngens / relations`, with optional representatives of the
/// generators in some ambient free module.
#[derive(Clone, Debug)]
pub struct ModulePresentation {
    pub ring: PolyRing,
    pub vars: Vec<String>,
    pub ngens: usize,
    pub relations: Vec<ModVec>,
    pub representatives: Vec<ModVec>,
}

impl ModulePresentation {
    pub fn new(ring: PolyRing, vars: Vec<String>, ngens: usize, relations: Vec<ModVec>) -> Self {
        ModulePresentation {
            ring,
            vars,
            ngens,
            relations,
            representatives: Vec::new(),
        }
    }

    pub fn zero(ring: PolyRing, vars: Vec<String>) -> Self {
        Self::new(ring, vars, 0, Vec::new())
    }

    /// Removes generators killed by a relation with a unit entry.
    pub fn pruned(&self) -> ModulePresentation {
        let field = self.ring.field;
        let mut rels: Vec<ModVec> = self.relations.iter().filter(|r| !r.is_zero()).cloned().collect();
        let mut reps = self.representatives.clone();
        let mut ngens = self.ngens;
        loop {
            let hit = rels.iter().enumerate().find_map(|(ri, r)| {
                r.0.iter()
                    .position(|p| !p.is_zero() && p.is_constant())
                    .map(|j| (ri, j))
            });
            let Some((ri, j)) = hit else { break };
            let r = rels.remove(ri);
            let c = r.0[j].constant_value().unwrap();
            let inv = field.inv(&c);
            rels = rels
                .into_iter()
                .map(|s| {
                    if s.0[j].is_zero() {
                        s
                    } else {
                        let f = s.0[j].scale(&inv);
                        s.sub(&r.scale_poly(&f))
                    }
                })
                .map(|mut s| {
                    s.0.remove(j);
                    s
                })
                .filter(|s| !s.is_zero())
                .collect();
            if j < reps.len() {
                reps.remove(j);
            }
            ngens -= 1;
        }
        ModulePresentation {
            ring: self.ring,
            vars: self.vars.clone(),
            ngens,
            relations: rels,
            representatives: reps,
        }
    }

    pub fn gb(&self) -> ModuleGb {
        ModuleGb::new(self.ring, self.ngens, &self.relations)
    }

    pub fn is_zero(&self) -> bool {
        let gb = self.gb();
        gb.leads_by_component()
            .iter()
            .all(|ls| ls.iter().any(|m| m.iter().all(|&e| e == 0)))
    }

    /// Minimal number of generators after pruning unit relations (the reported rank).
    pub fn num_generators(&self) -> usize {
        self.pruned().ngens
    }

    pub fn is_finite_dimensional(&self) -> bool {
        self.to_fin_dim(&self.vars.clone()).is_ok()
    }

    pub fn k_dim(&self) -> Option<usize> {
        self.to_fin_dim(&self.vars.clone()).ok().map(|m| m.dim)
    }

    /// Vector-space model with action matrices for the named variables (a subset of `vars`).
    pub fn to_fin_dim(&self, act_vars: &[String]) -> Result<FinDimModule> {
        let gb = self.gb();
        let leads = gb.leads_by_component();
        let nv = self.ring.nvars;
        let mut basis: Vec<(usize, Exps)> = Vec::new();
        for (k, ls) in leads.iter().enumerate() {
            if ls.iter().any(|m| m.iter().all(|&e| e == 0)) {
                continue;
            }
            let mut bounds = vec![0u32; nv];
            for (i, b) in bounds.iter_mut().enumerate() {
                let pure = ls
                    .iter()
                    .filter(|m| m.iter().enumerate().all(|(j, &e)| j == i || e == 0))
                    .map(|m| m[i])
                    .min();
                match pure {
                    Some(p) => *b = p,
                    None => {
                        return Err(Error::InfiniteDimensional(format!(
                            "generator {k} is free in variable {}",
                            self.vars.get(i).cloned().unwrap_or_else(|| i.to_string())
                        )))
                    }
                }
            }
            let mut stack: Vec<Exps> = vec![self.ring.unit_exps()];
            let mut seen: Vec<Exps> = Vec::new();
            while let Some(e) = stack.pop() {
                if seen.contains(&e) || ls.iter().any(|m| divides(m, &e)) {
                    continue;
                }
                for i in 0..nv {
                    if e[i] + 1 < bounds[i] {
                        let mut n = e.clone();
                        n[i] += 1;
                        stack.push(n);
                    }
                }
                seen.push(e);
            }
            seen.sort_by(|a, b| self.ring.order.cmp(a, b));
            basis.extend(seen.into_iter().map(|e| (k, e)));
        }
        let index: HashMap<(usize, Exps), usize> =
            basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        let field = self.ring.field;
        let dim = basis.len();
        let mut actions = Vec::new();
        for name in act_vars {
            let vi = self
                .vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Mismatch(format!("unknown variable {name}")))?;
            let mut mat = linalg::zeros(field, dim, dim);
            for (col, (k, e)) in basis.iter().enumerate() {
                let mut ee = e.clone();
                ee[vi] += 1;
                let mut v = ModVec::zero(self.ring, self.ngens);
                v.0[*k] = Poly::monomial(self.ring, ee, field.one());
                let nf = gb.reduce(&v);
                for (comp, p) in nf.0.iter().enumerate() {
                    for (te, tc) in p.terms() {
                        let row = index[&(comp, te.clone())];
                        mat[row][col] = tc.clone();
                    }
                }
            }
            actions.push(mat);
        }
        Ok(FinDimModule {
            field,
            dim,
            actions,
        })
    }
}

/// Module given by commuting action matrices on `K^dim`.
#[derive(Clone, Debug)]
pub struct FinDimModule {
    pub field: Field,
    pub dim: usize,
    pub actions: Vec<Matrix>,
}

impl FinDimModule {
    fn span_dims(&self) -> Vec<usize> {
        // dims of m^k M for the ideal m generated by the acting variables
        let field = self.field;
        let mut out = vec![self.dim];
        let mut cur: Matrix = linalg::identity(field, self.dim);
        for _ in 0..self.dim + 1 {
            let mut cols: Vec<Vec<Coeff>> = Vec::new();
            for a in &self.actions {
                let prod = linalg::mat_mul(field, a, &cur);
                let n = if prod.is_empty() { 0 } else { prod[0].len() };
                for j in 0..n {
                    cols.push(prod.iter().map(|r| r[j].clone()).collect());
                }
            }
            let mut m = cols.clone();
            let piv = linalg::row_reduce(field, &mut m);
            let r = piv.len();
            out.push(r);
            if r == 0 || r == *out.iter().rev().nth(1).unwrap() {
                break;
            }
            cur = transpose(&m[..r].to_vec(), self.dim);
        }
        out
    }

    fn socle_dims(&self) -> Vec<usize> {
        // dims of {v : m^k v = 0}
        let field = self.field;
        let mut out = Vec::new();
        let mut words: Vec<Matrix> = vec![linalg::identity(field, self.dim)];
        for _ in 0..self.dim + 1 {
            words = words
                .iter()
                .flat_map(|w| self.actions.iter().map(move |a| linalg::mat_mul(field, w, a)))
                .collect();
            let stacked: Matrix = words.iter().flat_map(|w| w.iter().cloned()).collect();
            let d = if stacked.is_empty() {
                self.dim
            } else {
                self.dim - linalg::rank(field, &stacked)
            };
            out.push(d);
            if d == self.dim || words.len() > 4096 {
                break;
            }
            let mut basis = stacked;
            let piv = linalg::row_reduce(field, &mut basis);
            words = vec![basis[..piv.len()].to_vec()];
        }
        out
    }

    /// Basis of `Hom(self, other)` as matrices.
    pub fn hom_basis(&self, other: &FinDimModule) -> Vec<Matrix> {
        let field = self.field;
        let (m, n) = (self.dim, other.dim);
        let unknowns = n * m;
        let mut eqs: Matrix = Vec::new();
        for (a, b) in self.actions.iter().zip(&other.actions) {
            // X a - b X = 0, X is n x m, unknown X[i][j] at i*m + j
            for i in 0..n {
                for j in 0..m {
                    let mut row = vec![field.zero(); unknowns];
                    for k in 0..m {
                        if !a[k][j].is_zero() {
                            row[i * m + k] = field.add(&row[i * m + k], &a[k][j]);
                        }
                    }
                    for k in 0..n {
                        if !b[i][k].is_zero() {
                            row[k * m + j] = field.sub(&row[k * m + j], &b[i][k]);
                        }
                    }
                    eqs.push(row);
                }
            }
        }
        let sols = if eqs.is_empty() {
            linalg::identity(field, unknowns)
        } else {
            linalg::nullspace(field, &eqs, unknowns)
        };
        sols.into_iter()
            .map(|v| (0..n).map(|i| v[i * m..(i + 1) * m].to_vec()).collect())
            .collect()
    }
}

fn transpose(rows: &Matrix, dim: usize) -> Matrix {
    let r = rows.len();
    (0..dim).map(|i| (0..r).map(|j| rows[j][i].clone()).collect()).collect()
}

fn symbolic_det_nonzero(field: Field, basis: &[Matrix], n: usize) -> bool {
    let k = basis.len();
    let ring = PolyRing::new(field, k);
    let mut m: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut p = Poly::zero(ring);
                    for (t, b) in basis.iter().enumerate() {
                        if !b[i][j].is_zero() {
                            p = p.add(&ring.var(t).scale(&b[i][j]));
                        }
                    }
                    p
                })
                .collect()
        })
        .collect();
    let mut prev = ring.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return false;
        };
        m.swap(p, c);
        for i in c + 1..n {
            for j in c + 1..n {
                let num = m[i][j].mul(&m[c][c]).sub(&m[i][c].mul(&m[c][j]));
                m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][c] = Poly::zero(ring);
        }
        prev = m[c][c].clone();
    }
    !m[n - 1][n - 1].is_zero()
}

/// Decides whether two finite-dimensional modules are isomorphic.
pub fn fin_dim_isomorphic(a: &FinDimModule, b: &FinDimModule) -> bool {
    if a.dim != b.dim || a.actions.len() != b.actions.len() {
        return false;
    }
    if a.dim == 0 {
        return true;
    }
    if a.span_dims() != b.span_dims() || a.socle_dims() != b.socle_dims() {
        return false;
    }
    let field = a.field;
    let hom = a.hom_basis(b);
    if hom.is_empty() || hom.len() != a.hom_basis(a).len() {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eaf);
    for _ in 0..8 {
        let coeffs: Vec<Coeff> = hom
            .iter()
            .map(|_| field.from_i64(rng.gen_range(-1000..=1000)))
            .collect();
        let mut x = linalg::zeros(field, b.dim, a.dim);
        for (c, h) in coeffs.iter().zip(&hom) {
            for i in 0..b.dim {
                for j in 0..a.dim {
                    x[i][j] = field.add(&x[i][j], &field.mul(c, &h[i][j]));
                }
            }
        }
        if !linalg::det(field, &x).is_zero() {
            return true;
        }
    }
    symbolic_det_nonzero(field, &hom, a.dim)
}

/// Isomorphism test for finite-dimensional presented modules over the same ring.
pub fn module_iso_test(p1: &ModulePresentation, p2: &ModulePresentation) -> Result<bool> {
    if p1.vars != p2.vars || p1.ring.field != p2.ring.field {
        return Err(Error::Mismatch("presentations over different rings".into()));
    }
    let a = p1.to_fin_dim(&p1.vars)?;
    let b = p2.to_fin_dim(&p2.vars)?;
    Ok(fin_dim_isomorphic(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> PolyRing {
        PolyRing::new(Field::Rationals, n)
    }

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn koszul_syzygy() {
        let r = ring(2);
        let (x, y) = (r.var(0), r.var(1));
        let g = GroebnerBasis::new(r, &[]);
        let k = syzygy_kernel(&[vec![x.clone(), y.clone()]], &g).unwrap();
        assert_eq!(k.len(), 1);
        let s = &k[0];
        assert!(x.mul(&s.0[0]).add(&y.mul(&s.0[1])).is_zero());
        assert_eq!(s.0[0].total_degree(), 1);
    }

    #[test]
    fn kernel_over_quotient() {
        let r = ring(1);
        let x = r.var(0);
        let g = GroebnerBasis::new(r, &[x.pow(2)]);
        let k = syzygy_kernel(&[vec![x.clone()]], &g).unwrap();
        assert_eq!(k, vec![ModVec(vec![x.clone()])]);
        let id = syzygy_kernel(&[vec![r.one(), r.zero()], vec![r.zero(), r.one()]], &GroebnerBasis::new(r, &[])).unwrap();
        assert!(id.is_empty());
    }

    #[test]
    fn lifting_recovers_coefficients() {
        let r = ring(2);
        let (x, y) = (r.var(0), r.var(1));
        let gens = vec![ModVec(vec![x.clone()]), ModVec(vec![y.clone()])];
        let l = Lifter::new(r, 1, &gens);
        let target = ModVec(vec![x.mul(&y).add(&y.pow(3))]);
        let c = l.lift(&target).unwrap();
        assert_eq!(combine(r, 1, &c.0, &gens), target);
        assert!(l.lift(&ModVec(vec![r.one()])).is_none());
    }

    #[test]
    fn iso_test_distinguishes_cyclic_from_split() {
        let r = ring(1);
        let x = r.var(0);
        let v = names(&["x"]);
        let cyclic = ModulePresentation::new(r, v.clone(), 1, vec![ModVec(vec![x.pow(2)])]);
        let split = ModulePresentation::new(
            r,
            v.clone(),
            2,
            vec![ModVec(vec![x.clone(), r.zero()]), ModVec(vec![r.zero(), x.clone()])],
        );
        assert!(module_iso_test(&cyclic, &cyclic).unwrap());
        assert!(!module_iso_test(&cyclic, &split).unwrap());
        let zero = ModulePresentation::zero(r, v.clone());
        let coker_id = ModulePresentation::new(r, v.clone(), 1, vec![ModVec(vec![r.one()])]);
        assert!(module_iso_test(&zero, &coker_id).unwrap());
        let free = ModulePresentation::new(r, v, 1, vec![]);
        assert!(matches!(module_iso_test(&free, &free), Err(Error::InfiniteDimensional(_))));
    }

    #[test]
    fn iso_test_sees_through_change_of_generators() {
        let r = ring(1);
        let x = r.var(0);
        let one = r.one();
        let v = names(&["x"]);
        let a = ModulePresentation::new(r, v.clone(), 1, vec![ModVec(vec![x.pow(2)])]);
        // generators e1, e2 with e2 = x e1 and x^2 e1 = 0
        let b = ModulePresentation::new(
            r,
            v,
            2,
            vec![
                ModVec(vec![x.clone(), one.neg()]),
                ModVec(vec![x.pow(2), r.zero()]),
            ],
        );
        assert!(module_iso_test(&a, &b).unwrap());
        assert_eq!(b.num_generators(), 1);
    }
}
