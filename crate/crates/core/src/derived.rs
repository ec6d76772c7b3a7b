//! Derived tensor products, derived intersections of closed subspaces, the classical Tor
//! oracle, the registered Koszul comparison and the (experimental) cotangent complex.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::dg::{tensor_over_a, DgModuleSheaf, DgRing, SheafHom};
use crate::error::{Error, Result};
use crate::graded::GcPoly;
use crate::homology::{cohomology, complex_cohomology, is_quasi_iso, iso_over, CohomologyReport, DegreeReport, QisoVerdict, Window};
use crate::module::{syzygies, ModVec, ModulePresentation};
use crate::groebner::GroebnerBasis;
use crate::poly::{Poly, PolyRing};
use crate::pseudo_free::{Generator, Section};
use crate::resolution::{ore_square, resolve, OreSquare, ResolutionStage};
use crate::stalk::{module_tensor_complex, ExplicitComplex};

fn check_window(window: Window, q_max: usize) -> Result<()> {
    let lowest = 1 - q_max as i32;
    if window.min < lowest {
        return Err(Error::pre(format!(
            "window minimum {} is below the certified range {lowest} of q_max = {q_max}",
            window.min
        )));
    }
    Ok(())
}

/// Variable maps of `b` and `c` into `tensor_over_a(b, c)`.
pub fn tensor_injections(b: &DgRing, c: &DgRing) -> (Vec<u32>, Vec<u32>) {
    let ident = |r: &DgRing| (0..r.num_gens() as u32).collect::<Vec<_>>();
    let base_b = b.base_ring();
    if c.same_structure(&base_b) {
        return (ident(b), ident(c));
    }
    if b.same_structure(&c.base_ring()) {
        return (ident(b), ident(c));
    }
    let k = base_b.num_gens();
    let shift = (b.num_gens() - k) as u32;
    let cmap = (0..c.num_gens() as u32)
        .map(|v| if (v as usize) < k { v } else { v + shift })
        .collect();
    (ident(b), cmap)
}

fn transport(s: &Section, r: &DgRing, map: &[u32]) -> Section {
    let field = r.field();
    s.map_values(|_, v| v.substitute(&|u| GcPoly::var(field, map[u as usize], r.gens()[u as usize].degree)))
}

/// `f ⊗ g : F ⊗ G → B ⊗ C` for morphisms over a common base.
pub fn tensor_hom(f: &SheafHom, g: &SheafHom) -> Result<SheafHom> {
    let src = tensor_over_a(&f.source, &g.source)?;
    let tgt = tensor_over_a(&f.target, &g.target)?;
    let (_, gmap_t) = tensor_injections(&f.target, &g.target);
    let (fmap_s, gmap_s) = tensor_injections(&f.source, &g.source);
    let (fmap_t, _) = tensor_injections(&f.target, &g.target);
    let mut images: Vec<Option<Section>> = vec![None; src.num_gens()];
    for (i, img) in f.images.iter().enumerate() {
        images[fmap_s[i] as usize] = Some(transport(img, &f.target, &fmap_t));
    }
    for (i, img) in g.images.iter().enumerate() {
        let slot = &mut images[gmap_s[i] as usize];
        if slot.is_none() {
            *slot = Some(transport(img, &g.target, &gmap_t));
        }
    }
    let images = images
        .into_iter()
        .map(|s| s.ok_or_else(|| Error::pre("tensor of morphisms misses a generator")))
        .collect::<Result<_>>()?;
    SheafHom::new(src, tgt, images)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TensorMode {
    TwoSided,
    OneSided,
}

impl std::str::FromStr for TensorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" => Ok(TensorMode::TwoSided),
            "one-sided" => Ok(TensorMode::OneSided),
            other => Err(Error::parse("mode", format!("unknown tensor mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DerivedTensor {
    pub ring: Arc<DgRing>,
    pub report: CohomologyReport,
    pub resolutions: Vec<ResolutionStage>,
    /// Comparison from the resolved tensor product to the underived one.
    pub xi: SheafHom,
    pub xi_verdict: QisoVerdict,
}

/// `B ⊗^L_A C` from resolutions of both factors (or of `B` only in one-sided mode).
pub fn derived_tensor(b: &Arc<DgRing>, c: &Arc<DgRing>, q_max: usize, window: Window, mode: TensorMode, seeds: (u64, u64)) -> Result<DerivedTensor> {
    check_window(window, q_max)?;
    if !b.base_ring().same_structure(&c.base_ring()) {
        return Err(Error::Mismatch("tensor factors are rings over different bases".into()));
    }
    let rb = resolve(b, q_max, seeds.0)?;
    let (ring, xi, resolutions) = match mode {
        TensorMode::TwoSided => {
            let rc = resolve(c, q_max, seeds.1)?;
            let xi = tensor_hom(rb.phi(), rc.phi())?;
            (xi.source.clone(), xi, vec![rb, rc])
        }
        TensorMode::OneSided => {
            let xi = tensor_hom(rb.phi(), &SheafHom::identity(c))?;
            (xi.source.clone(), xi, vec![rb])
        }
    };
    let report = cohomology(&ring, window)?;
    let xi_verdict = is_quasi_iso(&xi, window)?;
    Ok(DerivedTensor {
        ring,
        report,
        resolutions,
        xi,
        xi_verdict,
    })
}

/// Closed subspace cut out by degree-0 sections of the structure sheaf.
#[derive(Clone, Debug)]
pub struct ClosedSubspace {
    pub ideal: Vec<Section>,
    pub quotient: Arc<DgRing>,
    /// Points where the quotient stalk is nonzero (an up-closed set).
    pub support: u64,
}

impl ClosedSubspace {
    pub fn new(o: &Arc<DgRing>, ideal: Vec<Section>) -> Result<Self> {
        let quotient = DgRing::from_parts(o, Vec::new(), Vec::new(), ideal.clone())?;
        let space = o.space();
        let one = GcPoly::one(o.field());
        let support = (0..space.len())
            .filter(|&x| !quotient.stalk(x).is_zero(&one))
            .fold(0u64, |m, x| m | 1 << x);
        if !space.is_up_closed(support) {
            return Err(Error::pre(format!("support {} is not closed", space.format_set(support))));
        }
        Ok(ClosedSubspace { ideal, quotient, support })
    }

    /// From expressions in the generators of `o`, used at every point.
    pub fn from_exprs(o: &Arc<DgRing>, exprs: &[String]) -> Result<Self> {
        let w = o.space().whole();
        let ideal = exprs
            .iter()
            .map(|e| o.parse_expr(e).map(|p| Section::uniform(w, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(o, ideal)
    }
}

#[derive(Clone, Debug)]
pub struct DerivedIntersection {
    pub support: u64,
    /// `O_Y` on the closed subspace `Y` with the induced order.
    pub ring: Arc<DgRing>,
    pub full: Arc<DgRing>,
    pub report: CohomologyReport,
    pub full_report: CohomologyReport,
    /// `F_1 ⊗ F_2 → F_1 ⊗ O_{Y_2}`.
    pub comparison: QisoVerdict,
    pub vanishes_off_support: bool,
}

pub fn derived_intersection(o: &Arc<DgRing>, y1: &ClosedSubspace, y2: &ClosedSubspace, q_max: usize, window: Window, seeds: (u64, u64)) -> Result<DerivedIntersection> {
    if o.gens().iter().any(|g| g.degree != 0) {
        return Err(Error::pre("the structure sheaf must be concentrated in degree 0"));
    }
    let t = derived_tensor(&y1.quotient, &y2.quotient, q_max, window, TensorMode::TwoSided, seeds)?;
    let f1 = t.resolutions[0].phi().clone();
    let one_sided = tensor_hom(&SheafHom::identity(&f1.source), t.resolutions[1].phi())?;
    let comparison = is_quasi_iso(&one_sided, window)?;
    let support = y1.support & y2.support;
    let (ring, _) = t.ring.restrict_to_subset(support);
    let report = cohomology(&ring, window)?;
    let space = o.space();
    let vanishes_off_support = (0..space.len())
        .filter(|x| support >> x & 1 == 0)
        .all(|x| window.degrees().all(|n| t.report.get(space.name(x), n).is_some_and(|d| d.module.is_zero())));
    Ok(DerivedIntersection {
        support,
        ring,
        full: t.ring,
        report,
        full_report: t.report,
        comparison,
        vanishes_off_support,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Koszul,
    Syzygy,
}

#[derive(Clone, Debug)]
pub struct TorOracle {
    pub method: OracleMethod,
    pub names: Vec<String>,
    /// `Tor_p` reported in cohomological degree `-p`.
    pub degrees: BTreeMap<i32, ModulePresentation>,
}

impl TorOracle {
    pub fn get(&self, n: i32) -> Option<&ModulePresentation> {
        self.degrees.get(&n)
    }
}

fn units(ring: PolyRing, r: usize) -> Vec<ModVec> {
    (0..r).map(|j| ModVec::unit(ring, r, j)).collect()
}

fn scaled_units(ring: PolyRing, r: usize, polys: &[Poly]) -> Vec<ModVec> {
    units(ring, r)
        .iter()
        .flat_map(|u| polys.iter().map(move |p| u.scale_poly(p)))
        .collect()
}

/// Whether `f` is a regular sequence on `P / base`.
pub fn is_regular_sequence(ring: PolyRing, base: &[Poly], f: &[Poly]) -> bool {
    let mut ideal: Vec<Poly> = base.to_vec();
    for fk in f {
        let gb = GroebnerBasis::new(ring, &ideal);
        let mut gens = vec![ModVec(vec![fk.clone()])];
        gens.extend(ideal.iter().map(|p| ModVec(vec![p.clone()])));
        let colon = syzygies(ring, 1, &gens);
        if colon.iter().any(|s| !gb.contains(&s.0[0])) {
            return false;
        }
        ideal.push(fk.clone());
    }
    true
}

/// Differentials `d_p : F_p → F_{p-1}` (columns) of a free resolution of `R / (f)` over
/// `R = P / base`, for `p = 1..=depth`.
fn resolution_matrices(ring: PolyRing, base: &[Poly], f: &[Poly], depth: usize, koszul: bool) -> Result<Vec<Vec<ModVec>>> {
    let mut out: Vec<Vec<ModVec>> = Vec::new();
    if koszul {
        let m = f.len();
        let subsets = |p: usize| -> Vec<Vec<usize>> {
            (0u32..1 << m)
                .filter(|s| s.count_ones() as usize == p)
                .map(|s| (0..m).filter(|i| s >> i & 1 == 1).collect())
                .collect()
        };
        for p in 1..=depth {
            let src = subsets(p);
            let dst = subsets(p - 1);
            let cols = src
                .iter()
                .map(|s| {
                    let mut v = ModVec::zero(ring, dst.len());
                    for (pos, &i) in s.iter().enumerate() {
                        let rest: Vec<usize> = s.iter().copied().filter(|&j| j != i).collect();
                        let row = dst.iter().position(|t| *t == rest).expect("face");
                        let term = if pos % 2 == 0 { f[i].clone() } else { f[i].neg() };
                        v.0[row] = v.0[row].add(&term);
                    }
                    v
                })
                .collect();
            out.push(cols);
        }
        return Ok(out);
    }
    let mut prev: Vec<ModVec> = f.iter().map(|p| ModVec(vec![p.clone()])).collect();
    let mut prev_rank = 1usize;
    for p in 1..=depth {
        if p > 1 {
            let mut gens = prev.clone();
            gens.extend(scaled_units(ring, prev_rank, base));
            let k = prev.len();
            let mut next: Vec<ModVec> = Vec::new();
            for s in syzygies(ring, prev_rank, &gens) {
                let v = s.slice(0, k);
                if !v.is_zero() && !next.contains(&v) {
                    next.push(v);
                }
            }
            if next.len() > 400 {
                return Err(Error::pre(format!("free resolution too large at depth {p} (achieved depth {})", p - 1)));
            }
            prev_rank = k;
            prev = next;
        }
        out.push(prev.clone());
    }
    Ok(out)
}

/// `Tor^R_•(R/(f), R/(g))` over `R = P / base` in the window, via the Koszul complex on `f`
/// when `f` is regular and an iterated-syzygy resolution otherwise.
pub fn koszul_tor_oracle(ring: PolyRing, names: &[String], base: &[Poly], f: &[Poly], g: &[Poly], window: Window) -> Result<TorOracle> {
    let depth = (1 - window.min).max(1) as usize;
    let regular = is_regular_sequence(ring, base, f);
    let method = if regular { OracleMethod::Koszul } else { OracleMethod::Syzygy };
    let mats = resolution_matrices(ring, base, f, depth, regular)?;
    let mut quot: Vec<Poly> = base.to_vec();
    quot.extend(g.iter().cloned());
    let mut ranks = BTreeMap::new();
    let mut rels = BTreeMap::new();
    let mut d = BTreeMap::new();
    ranks.insert(0, 1usize);
    rels.insert(0, scaled_units(ring, 1, &quot));
    for (i, cols) in mats.iter().enumerate() {
        let p = (i + 1) as i32;
        ranks.insert(-p, cols.len());
        rels.insert(-p, scaled_units(ring, cols.len(), &quot));
        d.insert(-p, cols.clone());
    }
    let complex = ExplicitComplex {
        ring,
        names: names.to_vec(),
        ranks,
        rels,
        d,
    };
    Ok(TorOracle {
        method,
        names: names.to_vec(),
        degrees: complex_cohomology(&complex, window),
    })
}

/// Tor oracle at one point of the structure sheaf `o` for two closed subspaces.
pub fn tor_oracle_at(o: &DgRing, y1: &ClosedSubspace, y2: &ClosedSubspace, x: usize, window: Window) -> Result<TorOracle> {
    let s = o.stalk(x);
    let to_polys = |c: &ClosedSubspace| -> Vec<Poly> {
        c.ideal
            .iter()
            .filter_map(|sec| sec.at(x))
            .map(|v| s.poly_of(v))
            .collect()
    };
    let base = s.ideal0().gens().to_vec();
    koszul_tor_oracle(s.pring, &s.pnames, &base, &to_polys(y1), &to_polys(y2), window)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleMismatch {
    pub point: String,
    pub degree: i32,
}

/// Compares an engine report with the Tor oracle at every point and degree of the window.
pub fn compare_with_oracle(o: &DgRing, y1: &ClosedSubspace, y2: &ClosedSubspace, report: &CohomologyReport, window: Window) -> Result<Vec<OracleMismatch>> {
    let space = o.space();
    let mut out = Vec::new();
    for x in 0..space.len() {
        let oracle = tor_oracle_at(o, y1, y2, x, window)?;
        let act = oracle.names.clone();
        for n in window.degrees() {
            let engine = report.get(space.name(x), n);
            let want = oracle.get(n).expect("oracle degree");
            let ok = match engine {
                Some(DegreeReport { module }) => {
                    let vars: Vec<String> = act.iter().filter(|v| module.vars.contains(v)).cloned().collect();
                    if module.is_zero() || want.is_zero() {
                        module.is_zero() == want.is_zero()
                    } else {
                        iso_over(module, want, &vars)?
                    }
                }
                None => want.is_zero(),
            };
            if !ok {
                out.push(OracleMismatch {
                    point: space.name(x).to_string(),
                    degree: n,
                });
            }
        }
    }
    Ok(out)
}

/// Koszul algebra `A[y_1..y_m; d y_i = f_i]` over the base of `b = A / (f_1..f_m)` and its map
/// to `b`; `b` must have no generators of its own.
pub fn registered_koszul(b: &Arc<DgRing>) -> Result<SheafHom> {
    if !b.own_gens().is_empty() {
        return Err(Error::pre("registered Koszul resolution needs a quotient without new generators"));
    }
    let a = b.base_ring();
    let field = a.field();
    let mut names: Vec<String> = a.gens().iter().map(|g| g.name.clone()).collect();
    let mut gens = Vec::new();
    let mut diffs = Vec::new();
    for (j, r) in b.own_relations().iter().enumerate() {
        if r.values.values().any(|v| !v.is_homogeneous_of(0)) {
            return Err(Error::pre("registered Koszul resolution needs degree-0 relations"));
        }
        let mut name = format!("y{}", j + 1);
        while names.contains(&name) {
            name.push('\'');
        }
        names.push(name.clone());
        gens.push(Generator {
            name,
            degree: -1,
            support: r.open,
        });
        diffs.push(r.clone());
    }
    let k = DgRing::from_parts(&a, gens.clone(), diffs, Vec::new())?;
    let own = gens.iter().map(|g| Section::zero(g.support, field)).collect();
    SheafHom::relative(k, b.clone(), own)
}

/// Ore square between an engine resolution of `b` and the registered Koszul resolution.
pub fn one_point_affine_comparison(b: &Arc<DgRing>, q_max: usize, seed: u64) -> Result<OreSquare> {
    if b.space().len() != 1 {
        return Err(Error::pre("the affine comparison is defined on a one-point space"));
    }
    let engine = resolve(b, q_max, seed)?;
    let registered = registered_koszul(b)?;
    ore_square(engine.phi(), &registered, q_max, seed)
}

#[derive(Clone, Debug)]
pub struct CotangentReport {
    pub experimental: bool,
    pub resolution: ResolutionStage,
    pub module: DgModuleSheaf,
    pub report: CohomologyReport,
}

/// Coefficient of `dt_j` in `D(p)` after mapping to a degree-0 target: terms linear in `t_j`
/// whose remaining factors all have degree 0.
fn kahler_coefficient(p: &GcPoly, j: u32) -> GcPoly {
    let field = p.field();
    let mut out = GcPoly::zero(field);
    for (m, c) in p.terms() {
        let facs = m.factors();
        let Some(pos) = facs.iter().position(|f| f.var == j) else { continue };
        let rest: Vec<_> = facs
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut f = *f;
                if i == pos {
                    f.exp -= 1;
                }
                f
            })
            .filter(|f| f.exp > 0)
            .collect();
        if rest.iter().any(|f| f.degree != 0) {
            continue;
        }
        let (mono, neg) = crate::graded::GcMonomial::from_factors(&rest).expect("even factors");
        let mut coef = field.mul(c, &field.from_i64(facs[pos].exp as i64));
        if neg {
            coef = field.neg(&coef);
        }
        out = out.add(&GcPoly::term(field, mono, coef));
    }
    out
}

/// `L = O ⊗_F Ω¹_F` for a resolution `F → O` over the constant sheaf (experimental).
pub fn cotangent_complex(o: &Arc<DgRing>, q_max: usize, window: Window, seed: u64) -> Result<CotangentReport> {
    check_window(window, q_max)?;
    if o.gens().iter().any(|g| g.degree != 0) {
        return Err(Error::pre("the structure sheaf must be concentrated in degree 0"));
    }
    if o.base_ring().num_gens() != 0 || !o.base_ring().relations().is_empty() {
        return Err(Error::pre("the cotangent complex is taken over the constant sheaf"));
    }
    let stage = resolve(o, q_max, seed)?;
    let f = &stage.ring;
    let phi = stage.phi();
    let gens: Vec<Generator> = f
        .gens()
        .iter()
        .map(|g| Generator {
            name: format!("d{}", g.name),
            ..g.clone()
        })
        .collect();
    let mut diff = Vec::new();
    for (i, g) in f.gens().iter().enumerate() {
        let dt = f.differential(i);
        let mut row = Vec::new();
        for (j, h) in f.gens().iter().enumerate() {
            if h.degree != g.degree + 1 {
                continue;
            }
            let coeff = dt.map_values(|x, v| phi.eval_at(x, &kahler_coefficient(v, j as u32)));
            if coeff.values.values().all(GcPoly::is_zero) {
                continue;
            }
            row.push((j, coeff));
        }
        diff.push(row);
    }
    let module = DgModuleSheaf::new(o.clone(), gens, diff)?;
    let report = module_cohomology(o, &module, window)?;
    Ok(CotangentReport {
        experimental: true,
        resolution: stage,
        module,
        report,
    })
}

/// Stalkwise cohomology of `B ⊗_A M` in the window.
pub fn module_cohomology(b: &Arc<DgRing>, m: &DgModuleSheaf, window: Window) -> Result<CohomologyReport> {
    let space = b.space();
    let mut per_point = BTreeMap::new();
    for x in 0..space.len() {
        let c = module_tensor_complex(b, m, x, window.min - 1, window.max);
        let h = complex_cohomology(&c, window);
        per_point.insert(
            space.name(x).to_string(),
            h.into_iter().map(|(n, module)| (n, DegreeReport { module })).collect(),
        );
    }
    Ok(CohomologyReport { window, per_point })
}

/// Two-term hypersurface oracle `R --f'--> R` in degrees `-1, 0` for `R = P / (f)`.
pub fn hypersurface_cotangent_oracle(ring: PolyRing, names: &[String], f: &Poly, var: usize) -> BTreeMap<i32, ModulePresentation> {
    let fprime = derivative(f, var);
    let complex = ExplicitComplex {
        ring,
        names: names.to_vec(),
        ranks: BTreeMap::from([(-1, 1), (0, 1)]),
        rels: BTreeMap::from([(-1, vec![ModVec(vec![f.clone()])]), (0, vec![ModVec(vec![f.clone()])])]),
        d: BTreeMap::from([(-1, vec![ModVec(vec![fprime])])]),
    };
    complex_cohomology(&complex, Window { min: -1, max: 0 })
}

fn derivative(f: &Poly, var: usize) -> Poly {
    let ring = f.ring();
    let field = ring.field;
    Poly::from_terms(
        ring,
        f.terms().iter().filter(|(e, _)| e[var] > 0).map(|(e, c)| {
            let mut e2 = e.clone();
            e2[var] -= 1;
            (e2, field.mul(c, &field.from_i64(e[var] as i64)))
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn ring(n: usize) -> (PolyRing, Vec<String>) {
        let names = ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect();
        (PolyRing::new(Field::Rationals, n), names)
    }

    fn dims(o: &TorOracle) -> Vec<usize> {
        o.degrees.values().rev().map(|m| m.k_dim().unwrap()).collect()
    }

    #[test]
    fn oracle_exterior_counts() {
        let (r, n) = ring(2);
        let w = Window::new(-3, 0).unwrap();
        let f = [r.var(0), r.var(1)];
        let o = koszul_tor_oracle(r, &n, &[], &f, &f, w).unwrap();
        assert_eq!(o.method, OracleMethod::Koszul);
        assert_eq!(dims(&o), vec![1, 2, 1, 0]);
        let o = koszul_tor_oracle(r, &n, &[], &[r.var(0)], &[r.var(1)], w).unwrap();
        assert_eq!(dims(&o), vec![1, 0, 0, 0]);
    }

    #[test]
    fn syzygy_path_agrees_with_koszul_path() {
        let (r, n) = ring(2);
        let w = Window::new(-3, 0).unwrap();
        let f = [r.var(0), r.var(1)];
        let k = resolution_matrices(r, &[], &f, 3, true).unwrap();
        let s = resolution_matrices(r, &[], &f, 3, false).unwrap();
        assert_eq!(k[0].len(), s[0].len());
        assert_eq!(k[1].len(), s[1].len());
        // a non-regular sequence takes the syzygy path
        let m = [r.var(0).mul(&r.var(0)), r.var(0).mul(&r.var(1))];
        let o = koszul_tor_oracle(r, &n, &[], &m, &f, w).unwrap();
        assert_eq!(o.method, OracleMethod::Syzygy);
        assert_eq!(o.get(0).unwrap().k_dim(), Some(1));
    }

    #[test]
    fn hypersurface_oracle() {
        let (r, n) = ring(1);
        let f = r.var(0).mul(&r.var(0));
        let h = hypersurface_cotangent_oracle(r, &n, &f, 0);
        assert_eq!(h[&0].k_dim(), Some(1));
        assert_eq!(h[&-1].k_dim(), Some(1));
    }
}
