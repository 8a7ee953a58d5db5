use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::filtered::{
    associated, e_of_morphism, e_of_morphism_between, homotopy_from_h, is_fc_fibration, is_fc_weq, product_comparison,
    pullback_fc, spectral_homotopy, tensor_lambda_fc, FilteredComplex, FilteredMorphism,
};
use crate::format::{print, Object};
use crate::multicomplex::{
    eprime, eprime_homotopy, eprime_of_morphism, mc_path, mc_product, mc_pullback, mc_strict_homotopy_check, tot,
    MultiMorphism, Multicomplex,
};
use crate::paths::{is_r_homotopy, mapping_path, path, path_contraction, RHomotopy};
use crate::representables::{acyclic_rfib_via_rlp, disk, rfib_via_rlp};
use crate::spectral::{
    find_isomorphism, is_er_quasi_iso, is_r_fibration, product, product2, pullback_surjection,
    SpectralMorphism, Ss,
};

use super::gen::{
    gen_filtered, gen_filtered_homotopy_data, gen_filtered_morphism, gen_morphism_or_zero, gen_multi_morphism,
    gen_multicomplex, gen_spectral,
};
use super::{Check, GenSpec, Mutation};

/// Result of one trial: the situations it exercised and an optional
/// counterexample with its documents.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub labels: Vec<String>,
    pub failure: Option<(String, Vec<(String, String)>)>,
}

impl Outcome {
    pub fn failed(labels: Vec<String>, message: String, documents: Vec<(String, String)>) -> Self {
        Outcome {
            labels,
            failure: Some((message, documents)),
        }
    }
}

pub struct Ctx {
    rng: ChaCha8Rng,
    spec: GenSpec,
    r: usize,
    mutation: Mutation,
    labels: Vec<String>,
    docs: Vec<(String, String)>,
}

type Checked = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Checked {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

impl Ctx {
    pub fn new(rng: ChaCha8Rng, spec: GenSpec, r: usize, mutation: Mutation) -> Self {
        Ctx {
            rng,
            spec,
            r,
            mutation,
            labels: Vec::new(),
            docs: Vec::new(),
        }
    }

    fn label(&mut self, s: impl Into<String>) {
        self.labels.push(s.into());
    }

    fn keep<F: Field>(&mut self, name: &str, f: &SpectralMorphism<F>) {
        self.docs.push((name.to_string(), print(&Object::Morphism(f.clone()))));
    }

    fn keep_object<F: Field>(&mut self, name: &str, obj: Object<F>) {
        self.docs.push((name.to_string(), print(&obj)));
    }

    fn weq<F: Field>(&self, f: &SpectralMorphism<F>) -> bool {
        let v = is_er_quasi_iso(f, self.r);
        if self.mutation == Mutation::NegateWeq {
            !v
        } else {
            v
        }
    }

    fn fib<F: Field>(&self, f: &SpectralMorphism<F>) -> bool {
        self.mutation != Mutation::NoFibrations && is_r_fibration(f, self.r)
    }

    fn acyclic<F: Field>(&self, f: &SpectralMorphism<F>) -> bool {
        self.fib(f) && self.weq(f)
    }

    fn spectral<F: Field>(&mut self) -> Ss<F> {
        gen_spectral(&mut self.rng, &self.spec)
    }

    fn small_r(&mut self) -> usize {
        self.rng.gen_range(0..=self.r)
    }

    fn any_r(&mut self) -> usize {
        self.rng.gen_range(0..=2)
    }

    fn morphism_from<F: Field>(&mut self, a: &Ss<F>) -> SpectralMorphism<F> {
        let b = self.spectral();
        gen_morphism_or_zero(&mut self.rng, a, &b)
    }

    /// A morphism drawn from a mix of random and structural sources.
    fn sample_morphism<F: Field>(&mut self) -> SpectralMorphism<F> {
        let a = self.spectral();
        let (label, f) = match self.rng.gen_range(0..8) {
            0 => ("random", self.morphism_from(&a)),
            1 => {
                let x = self.spectral();
                ("projection", product2(&a, &x).projections[0].clone())
            }
            2 => {
                let fa = Arc::new(gen_filtered::<F, _>(&mut self.rng, &self.spec));
                let fb = Arc::new(gen_filtered::<F, _>(&mut self.rng, &self.spec));
                let f = gen_filtered_morphism(&mut self.rng, &fa, &fb);
                ("filtered", e_of_morphism(&f).expect("E of a filtered morphism"))
            }
            3 => {
                let k = self.any_r();
                let pa = path(k, &a);
                if self.rng.gen_bool(0.5) {
                    ("path-minus", pa.d_minus)
                } else {
                    ("path-plus", pa.d_plus)
                }
            }
            4 => {
                let u = self.morphism_from(&a);
                let k = self.any_r();
                ("mapping-path-p", mapping_path(k, &u).p)
            }
            5 => {
                let k = self.any_r();
                ("path-iota", path(k, &a).iota)
            }
            6 => {
                let b = self.spectral();
                ("zero", SpectralMorphism::zero(a, b))
            }
            _ => {
                let e = gen_morphism_or_zero(&mut self.rng, &a, &a);
                ("perturbed-identity", SpectralMorphism::identity(a).add(&e))
            }
        };
        self.label(label);
        f
    }

    /// A weak equivalence at level `r` built from structural pieces.
    fn sample_weq<F: Field>(&mut self) -> SpectralMorphism<F> {
        let a = self.spectral();
        let k = self.small_r();
        let (label, f) = match self.rng.gen_range(0..6) {
            0 => ("identity", SpectralMorphism::identity(a)),
            1 => ("path-iota", path(k, &a).iota),
            2 => ("path-boundary", path(k, &a).d_plus),
            3 => {
                let u = self.morphism_from(&a);
                ("mapping-path-i", mapping_path(k, &u).i)
            }
            4 => {
                let u = self.morphism_from(&a);
                ("mapping-path-rho", mapping_path(k, &u).rho)
            }
            _ => {
                let pa = path(k, &a);
                let pp = path(self.small_r(), &pa.object);
                ("composite", pp.iota.compose(&pa.iota))
            }
        };
        self.label(format!("weq:{label}"));
        f
    }

    /// An acyclic r-fibration built from structural pieces.
    fn sample_acyclic_fibration<F: Field>(&mut self) -> SpectralMorphism<F> {
        let a = self.spectral();
        let k = self.small_r();
        let (label, p) = match self.rng.gen_range(0..4) {
            0 => ("path-boundary", path(k, &a).d_minus),
            1 => {
                let u = self.morphism_from(&a);
                ("mapping-path-rho", mapping_path(k, &u).rho)
            }
            2 => {
                let d = disk(k, self.rng.gen_range(-2..=2), self.rng.gen_range(-2..=2));
                ("disk-projection", product2(&a, &d).projections[0].clone())
            }
            _ => {
                let d = disk(k, self.rng.gen_range(-2..=2), self.rng.gen_range(-2..=2));
                let pr = product2(&a, &d);
                let pp = path(self.small_r(), &pr.object);
                ("composite", pr.projections[0].compose(&pp.d_minus))
            }
        };
        self.label(format!("acyclic:{label}"));
        p
    }
}

pub fn run<F: Field>(check: Check, ctx: &mut Ctx) -> Outcome {
    let res = match check {
        Check::TwoOutOfThree => two_out_of_three::<F>(ctx),
        Check::AxiomC => axiom_c::<F>(ctx),
        Check::AxiomD => axiom_d::<F>(ctx),
        Check::PartialBrown => partial_brown::<F>(ctx),
        Check::Lifting => lifting::<F>(ctx),
        Check::FunctorE => functor_e::<F>(ctx),
        Check::FunctorEprime => functor_eprime::<F>(ctx),
        Check::MultiPath => multi_path::<F>(ctx),
        Check::Homotopy => homotopy::<F>(ctx),
    };
    let labels = std::mem::take(&mut ctx.labels);
    match res {
        Ok(()) => Outcome { labels, failure: None },
        Err(msg) => Outcome::failed(labels, msg, std::mem::take(&mut ctx.docs)),
    }
}

fn two_out_of_three<F: Field>(c: &mut Ctx) -> Checked {
    let (f, g) = match c.rng.gen_range(0..5) {
        0 => {
            let a = c.spectral::<F>();
            let pa = path(c.small_r(), &a);
            c.label("config:iota-boundary");
            let g = if c.rng.gen_bool(0.5) { pa.d_minus } else { pa.d_plus };
            (pa.iota, g)
        }
        1 => {
            let u = c.sample_morphism::<F>();
            let mp = mapping_path(c.small_r(), &u);
            c.label("config:factorization");
            (mp.i, mp.p)
        }
        2 => {
            let f = c.sample_weq::<F>();
            let g = c.morphism_from(f.target());
            c.label("config:weq-then-random");
            (f, g)
        }
        3 => {
            let f = c.sample_morphism::<F>();
            let k = c.small_r();
            c.label("config:random-then-iota");
            (f.clone(), path(k, f.target()).iota)
        }
        _ => {
            let f = c.sample_morphism::<F>();
            let g = c.morphism_from(f.target());
            c.label("config:random-random");
            (f, g)
        }
    };
    let gf = g.compose(&f);
    let w = [c.weq(&f), c.weq(&g), c.weq(&gf)];
    let pattern: String = w.iter().map(|&b| if b { 'w' } else { '-' }).collect();
    c.label(format!("pattern:{pattern}"));
    if w.iter().filter(|&&b| b).count() == 2 {
        c.keep("f", &f);
        c.keep("g", &g);
        return Err(format!("two of f, g, gf are weak equivalences but not the third (pattern {pattern})"));
    }
    Ok(())
}

fn axiom_c<F: Field>(c: &mut Ctx) -> Checked {
    let p = c.sample_acyclic_fibration::<F>();
    let g = if c.rng.gen_bool(0.8) {
        let u = c.spectral();
        gen_morphism_or_zero(&mut c.rng, &u, p.target())
    } else {
        c.label("base:boundary");
        path(c.small_r(), p.target()).d_plus
    };
    c.keep("p", &p);
    c.keep("g", &g);
    ensure(c.acyclic(&p), || "manufactured map is not an acyclic r-fibration".into())?;
    let pb = pullback_surjection(&g, &p).map_err(|e| format!("pullback refused: {e}"))?;
    ensure(g.compose(&pb.pi_u) == p.compose(&pb.pi_a), || "pullback square does not commute".into())?;
    ensure(c.acyclic(&pb.pi_u), || "pullback of an acyclic r-fibration is not an acyclic r-fibration".into())
}

fn axiom_d<F: Field>(c: &mut Ctx) -> Checked {
    let u = c.sample_morphism::<F>();
    c.keep("u", &u);
    let mp = mapping_path(c.r, &u);
    ensure(mp.p.compose(&mp.i) == u, || "p ∘ i ≠ u".into())?;
    ensure(c.fib(&mp.p), || "p is not an r-fibration".into())?;
    ensure(mp.rho.compose(&mp.i) == SpectralMorphism::identity(u.source().clone()), || "ρ ∘ i ≠ 1".into())?;
    ensure(c.acyclic(&mp.rho), || "ρ is not an acyclic r-fibration".into())?;
    ensure(c.weq(&mp.i), || "i is not a weak equivalence".into())
}

fn partial_brown<F: Field>(c: &mut Ctx) -> Checked {
    let g = c.sample_weq::<F>();
    c.keep("g", &g);
    ensure(is_er_quasi_iso(&g, c.r), || "manufactured map is not a weak equivalence".into())?;
    let mp = mapping_path(c.r, &g);
    let (w, f, s) = (&mp.i, &mp.p, &mp.rho);
    ensure(f.compose(w) == g, || "g ≠ f(g) ∘ w(g)".into())?;
    ensure(s.compose(w) == SpectralMorphism::identity(g.source().clone()), || "s(g) ∘ w(g) ≠ 1".into())?;
    ensure(c.weq(w), || "w(g) is not a weak equivalence".into())?;
    ensure(c.acyclic(f), || "f(g) is not an acyclic r-fibration".into())?;
    ensure(c.acyclic(s), || "s(g) is not an acyclic r-fibration".into())
}

fn lifting<F: Field>(c: &mut Ctx) -> Checked {
    let f = c.sample_morphism::<F>();
    c.keep("f", &f);
    let direct = c.fib(&f);
    let direct_acyclic = direct && c.weq(&f);
    let via = rfib_via_rlp(&f, c.r);
    let via_acyclic = acyclic_rfib_via_rlp(&f, c.r);
    c.label(if direct { "fibration" } else { "not-fibration" });
    c.label(if direct_acyclic { "acyclic" } else { "not-acyclic" });
    ensure(direct == via, || format!("is_r_fibration = {direct} but the lifting test says {via}"))?;
    ensure(direct_acyclic == via_acyclic, || {
        format!("is_acyclic_r_fibration = {direct_acyclic} but the lifting test says {via_acyclic}")
    })
}

fn filtered<F: Field>(c: &mut Ctx) -> Arc<FilteredComplex<F>> {
    Arc::new(gen_filtered(&mut c.rng, &c.spec))
}

fn functor_e<F: Field>(c: &mut Ctx) -> Checked {
    let a = filtered::<F>(c);
    let b = filtered::<F>(c);
    c.keep_object("A", Object::Filtered(a.clone()));
    c.keep_object("B", Object::Filtered(b.clone()));
    let r = c.r;

    ensure(product_comparison(&a, &b).map_err(|e| e.to_string())?, || "E(A × B) → E(A) × E(B) is not an isomorphism".into())?;

    let fp = tensor_lambda_fc(r, &b);
    let f = match c.rng.gen_range(0..3) {
        0 => gen_filtered_morphism(&mut c.rng, &a, &b),
        1 => fp.d_minus.clone(),
        _ => FilteredMorphism::identity(a.clone()),
    };
    let ef = e_of_morphism(&f).map_err(|e| e.to_string())?;
    let fib = is_fc_fibration(&f, r).map_err(|e| e.to_string())?;
    let weq = is_fc_weq(&f, r).map_err(|e| e.to_string())?;
    c.label(match (fib, weq) {
        (true, true) => "fc:acyclic-fibration",
        (true, false) => "fc:fibration",
        _ => "fc:other",
    });
    if fib {
        ensure(c.fib(&ef), || "E does not preserve a fibration".into())?;
    }
    if fib && weq {
        ensure(c.acyclic(&ef), || "E does not preserve an acyclic fibration".into())?;
    }

    // pullback of the acyclic fibration ∂^-: Λ ⊗ B -> B along g: A -> B
    let p = &fp.d_minus;
    ensure(is_fc_fibration(p, r).map_err(|e| e.to_string())? && is_fc_weq(p, r).map_err(|e| e.to_string())?, || {
        "∂^- is not an acyclic filtered fibration".into()
    })?;
    let g = gen_filtered_morphism(&mut c.rng, &a, &b);
    let pb = pullback_fc(&g, p).map_err(|e| e.to_string())?;
    let (ex, ea, eb, el) = (
        associated(&pb.object).map_err(|e| e.to_string())?,
        associated(&a).map_err(|e| e.to_string())?,
        associated(&b).map_err(|e| e.to_string())?,
        associated(&fp.object).map_err(|e| e.to_string())?,
    );
    let eg = e_of_morphism_between(&g, &ea, &eb).map_err(|e| e.to_string())?;
    let ep = e_of_morphism_between(p, &el, &eb).map_err(|e| e.to_string())?;
    let epu = e_of_morphism_between(&pb.pi_u, &ex, &ea).map_err(|e| e.to_string())?;
    let epa = e_of_morphism_between(&pb.pi_a, &ex, &el).map_err(|e| e.to_string())?;
    let spb = pullback_surjection(&eg, &ep).map_err(|e| format!("spectral pullback refused: {e}"))?;
    let cmp = spb.mediate(&epu, &epa).ok_or("E of the pullback square does not commute")?;
    ensure(cmp.is_isomorphism(), || "E does not preserve the pullback of an acyclic fibration".into())?;
    ensure(c.acyclic(&epu), || "E of the pulled-back map is not an acyclic r-fibration".into())?;

    // homotopy witnesses
    let (src, f) = if c.rng.gen_bool(0.5) {
        (a.clone(), gen_filtered_morphism(&mut c.rng, &a, &b))
    } else {
        (b.clone(), FilteredMorphism::identity(b.clone()))
    };
    let data = gen_filtered_homotopy_data(&mut c.rng, r, &src, &b);
    let h = homotopy_from_h(r, &f, data).map_err(|e| e.to_string())?;
    let w = spectral_homotopy(&h).map_err(|e| format!("no spectral witness: {e}"))?;
    c.label(if w.f == w.g { "homotopy:equal-ends" } else { "homotopy:distinct-ends" });
    ensure(is_r_homotopy(&w), || "transported witness rejected".into())
}

fn multicomplex<F: Field>(c: &mut Ctx) -> Result<Arc<Multicomplex<F>>, String> {
    let m = gen_multicomplex::<F, _>(&mut c.rng, &c.spec);
    c.keep_object("multicomplex", Object::Multicomplex(Arc::new(m.clone())));
    c.label(format!("{}-multicomplex", m.num_ops()));
    ensure(tot(&m).is_ok(), || "D² ≠ 0 on the totalization".into())?;
    Ok(Arc::new(m))
}

fn functor_eprime<F: Field>(c: &mut Ctx) -> Checked {
    let r = c.r;
    let a = multicomplex::<F>(c)?;
    let b = multicomplex::<F>(c)?;
    let ea = eprime(&a).map_err(|e| e.to_string())?;
    ensure(ea.validate().is_ok(), || "E'(A) does not validate".into())?;
    let eb = eprime(&b).map_err(|e| e.to_string())?;

    let (x, pa, pb) = mc_product(&a, &b);
    let pair = product(&[ea.clone(), eb.clone()]).pair(&[
        &eprime_of_morphism(&pa).map_err(|e| e.to_string())?,
        &eprime_of_morphism(&pb).map_err(|e| e.to_string())?,
    ]);
    let pair = pair.map_err(|e| e.to_string())?;
    ensure(pair.is_isomorphism() && pair.source().module(0) == eprime(&x).map_err(|e| e.to_string())?.module(0), || {
        "E' does not preserve the product".into()
    })?;

    let path_b = mc_path(r, &b);
    let p = &path_b.d_minus;
    let ep = eprime_of_morphism(p).map_err(|e| e.to_string())?;
    ensure(c.acyclic(&ep), || "E'(∂^-) is not an acyclic r-fibration".into())?;
    let g = gen_multi_morphism(&mut c.rng, &a, &b);
    let eg = eprime_of_morphism(&g).map_err(|e| e.to_string())?;
    let fib = c.fib(&eg);
    c.label(if fib { "mc:fibration" } else { "mc:not-fibration" });
    let mpb = mc_pullback(&g, p).map_err(|e| e.to_string())?;
    let epu = eprime_of_morphism(&mpb.pi_u).map_err(|e| e.to_string())?;
    let epa = eprime_of_morphism(&mpb.pi_a).map_err(|e| e.to_string())?;
    let spb = pullback_surjection(&eg, &ep).map_err(|e| format!("spectral pullback refused: {e}"))?;
    let cmp = spb.mediate(&epu, &epa).ok_or("E' of the pullback square does not commute")?;
    ensure(cmp.is_isomorphism(), || "E' does not preserve the pullback of an acyclic fibration".into())?;

    let k = if c.rng.gen_bool(0.5) {
        gen_multi_morphism(&mut c.rng, &a, &path_b.object)
    } else {
        c.label("homotopy:path-identity");
        MultiMorphism::identity(path_b.object.clone())
    };
    let (f, g) = (path_b.d_minus.compose(&k), path_b.d_plus.compose(&k));
    ensure(mc_strict_homotopy_check(k.map(), &f, &g, &path_b), || "strict homotopy rejected".into())?;
    let w = eprime_homotopy(&k, &path_b).map_err(|e| format!("no spectral witness: {e}"))?;
    ensure(is_r_homotopy(&w), || "transported strict homotopy rejected".into())
}

/// An isomorphism `X -> P(r;B)` compatible with both boundary maps.
pub fn path_iso<F: Field>(
    x: &Ss<F>,
    dm: &SpectralMorphism<F>,
    dp: &SpectralMorphism<F>,
    r: usize,
) -> Option<SpectralMorphism<F>> {
    let pb = path(r, dm.target());
    find_isomorphism(x, &pb.object, |maps| {
        let mut res = pb.d_minus.map(0).compose(&maps[0]).sub(dm.map(0)).coords();
        res.extend(pb.d_plus.map(0).compose(&maps[0]).sub(dp.map(0)).coords());
        res
    })
}

fn multi_path<F: Field>(c: &mut Ctx) -> Checked {
    let a = multicomplex::<F>(c)?;
    let r = c.r;
    let p = mc_path(r, &a);
    ensure(p.object.validate().is_ok(), || "Λ_r ⊗ A breaks the multicomplex relation".into())?;
    let ex = eprime(&p.object).map_err(|e| e.to_string())?;
    let dm = eprime_of_morphism(&p.d_minus).map_err(|e| e.to_string())?;
    let dp = eprime_of_morphism(&p.d_plus).map_err(|e| e.to_string())?;
    let dm = SpectralMorphism::from_pages(dm.page_maps().to_vec(), ex.clone(), dm.target().clone()).map_err(|e| e.to_string())?;
    let dp = SpectralMorphism::from_pages(dp.page_maps().to_vec(), ex.clone(), dp.target().clone()).map_err(|e| e.to_string())?;
    ensure(path_iso(&ex, &dm, &dp, r).is_some(), || "E'(Λ_r ⊗ A) is not isomorphic to P(r; E'(A)) over the boundaries".into())
}

fn homotopy<F: Field>(c: &mut Ctx) -> Checked {
    let r = c.r;
    let b = c.spectral::<F>();
    let pb = path(r, &b);
    let (a, k) = if c.rng.gen_bool(0.5) {
        c.label("source:random");
        let a = c.spectral::<F>();
        let k = gen_morphism_or_zero(&mut c.rng, &a, &pb.object);
        (a, k)
    } else {
        c.label("source:path");
        let e = gen_morphism_or_zero(&mut c.rng, &pb.object, &pb.object);
        (pb.object.clone(), SpectralMorphism::identity(pb.object.clone()).add(&e))
    };
    let h = RHomotopy::from_path_morphism(&k, &pb).map_err(|e| format!("witness from a path morphism: {e}"))?;
    c.keep("f", &h.f);
    c.keep("g", &h.g);
    c.label(if h.f == h.g { "pair:equal" } else { "pair:distinct" });

    ensure(is_r_homotopy(&RHomotopy::reflexive(r, &h.f)), || "reflexivity witness rejected".into())?;
    ensure(is_r_homotopy(&h.symmetric()), || "symmetry witness rejected".into())?;

    let k2 = gen_morphism_or_zero(&mut c.rng, &a, &pb.object);
    let h2 = RHomotopy::from_path_morphism(&k2, &pb).map_err(|e| e.to_string())?;
    let target = h.g.add(&h2.g).sub(&h2.f);
    let shifted = RHomotopy::new(r, h.g.clone(), target.clone(), h2.map(0).clone()).map_err(|e| format!("shifted witness: {e}"))?;
    let t = h.transitive(&shifted).map_err(|e| format!("transitivity: {e}"))?;
    ensure(is_r_homotopy(&t) && t.g == target, || "transitivity witness rejected".into())?;

    let post = c.morphism_from(&b);
    let hp = h.post_compose(&post).map_err(|e| format!("post-composition: {e}"))?;
    ensure(is_r_homotopy(&hp), || "post-composed witness rejected".into())?;
    let z = c.spectral::<F>();
    let pre = gen_morphism_or_zero(&mut c.rng, &z, &a);
    let hq = h.pre_compose(&pre).map_err(|e| format!("pre-composition: {e}"))?;
    ensure(is_r_homotopy(&hq), || "pre-composed witness rejected".into())?;

    let pa = path(r, &a);
    let contraction = path_contraction(&pa).map_err(|e| format!("contraction: {e}"))?;
    ensure(
        is_r_homotopy(&contraction)
            && contraction.f == SpectralMorphism::identity(pa.object.clone())
            && contraction.g == pa.iota.compose(&pa.d_minus),
        || "ĥ(x,y,z) = (0,0,-y) does not certify 1 ≃ ι∂^-".into(),
    )
}
