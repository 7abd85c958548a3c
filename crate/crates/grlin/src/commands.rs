use std::collections::BTreeMap;

use clap::ValueEnum;
use grlin_core::bundle_model::numeric::sample_points;
use grlin_core::bundle_model::{validate, validate_morphism, CheckOptions, Morphism, NumericInstance, Presentation, WeightMatch};
use grlin_core::degree2::{algebroid, dual_dvb, isotropy_report, pairing_report, poisson, skew_form, Leg};
use grlin_core::functors::{
    flip, full_lin, full_lin_direct, full_lin_morphism, full_lin_renamed, iterated_to_direct, perm_label, plin, rename_morphism,
    tangent_lift, vertical,
};
use grlin_core::graded_algebra::perm;
use grlin_core::superise::{superise, z2k_sign_check};
use grlin_core::symmetric::{
    check_morphism_symmetry, diagonalise_from, iota_rescale, roundtrip_iso, symmetrise, symmetrise_morphism, validate_symmetric,
    SymmetricVB,
};
use grlin_core::{Error, Result};

use crate::parser::{parse, parse_document, Document};
use crate::printer::{print, print_morphism};
use crate::report::{digest, CommandReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Command {
    Validate,
    Lift,
    Vertical,
    Plin,
    Lin,
    LinDirect,
    Sigma,
    Symmetrise,
    Diagonalise,
    Roundtrip,
    MorphismCheck,
    Dual,
    SkewForm,
    Algebroid,
    Poisson,
    SuperiseCheck,
    Superise,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub seed: u64,
    pub samples: usize,
    pub degree_cap: u32,
    /// Zero-based permutation for `sigma`.
    pub g: Option<Vec<usize>>,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: 0, samples: 20, degree_cap: 2, g: None }
    }
}

impl Options {
    fn canonical(&self) -> String {
        let g = self.g.as_deref().map(perm_label).unwrap_or_default();
        format!("seed={} samples={} degree-cap={} g={g}", self.seed, self.samples, self.degree_cap)
    }

    fn check(&self) -> CheckOptions {
        CheckOptions { weights: WeightMatch::Exact, seed: self.seed, samples: self.samples, degree_cap: self.degree_cap }
    }
}

/// One-based permutation in one-line notation, `21` or `2,1`.
pub fn parse_perm(s: &str) -> std::result::Result<Vec<usize>, String> {
    let parts: Vec<&str> = if s.contains(',') { s.split(',').map(str::trim).collect() } else { s.split("").filter(|x| !x.is_empty()).collect() };
    let g: Vec<usize> = parts
        .iter()
        .map(|p| p.parse::<usize>().ok().filter(|n| *n >= 1).map(|n| n - 1).ok_or_else(|| format!("bad entry {p:?} in permutation {s:?}")))
        .collect::<std::result::Result<_, _>>()?;
    if g.is_empty() || !perm::is_permutation(&g) {
        return Err(format!("{s:?} is not a permutation of 1..{}", g.len()));
    }
    Ok(g)
}

/// Runs `cmd` on the bundle text `src`. Parse failures and library
/// errors become failed checks; the report passes iff every check does.
pub fn run(cmd: Command, src: &str, opts: &Options) -> CommandReport {
    let name = cmd.name();
    let mut r = CommandReport::new(&name, digest(&[&name, src, &opts.canonical()]));
    let doc = match parse_document(src) {
        Ok(d) => d,
        Err(e) => {
            r.push("parse", false, e);
            return r;
        }
    };
    r.push("parse", true, format!("bundle {} with {} blocks, {} morphisms", doc.presentation.name, doc.presentation.blocks.len(), doc.morphisms.len()));
    if cmd != Command::Validate {
        r.absorb("input", validate(&doc.presentation));
    }
    if let Err(e) = dispatch(cmd, &doc, opts, &mut r) {
        r.push(name, false, e);
    }
    r
}

/// Sets the emitted presentation and checks that it re-parses and validates.
fn emit(r: &mut CommandReport, p: &Presentation) {
    let text = print(p);
    match parse(&text) {
        Ok(q) if q == *p => r.push("emitted.reparse", true, "printed form parses back to the same presentation"),
        Ok(q) => r.push("emitted.reparse", false, q.compare(p).err().unwrap_or_else(|| "fields differ".into())),
        Err(e) => r.push("emitted.reparse", false, e),
    }
    r.absorb("emitted", validate(p));
    r.emitted = Some(text);
}

/// The symmetric k-fold vector bundle a command works on: the input itself
/// when every weight is at most one, otherwise `Lin` of the graded input.
struct SymInput {
    s: SymmetricVB,
    graded: Option<Presentation>,
}

fn symmetric_input(p: &Presentation, r: &mut CommandReport) -> Result<SymInput> {
    if p.blocks.iter().all(|b| b.weight.iter().all(|w| *w <= 1)) {
        r.note(format!("input read as a {}-fold vector bundle with the canonical flips", p.n_weights()));
        return Ok(SymInput { s: SymmetricVB::canonical(p.clone())?, graded: None });
    }
    if p.n_weights() != 1 {
        return Err(Error::Unsupported(format!("{} has {} weight fields and weights above one", p.name, p.n_weights())));
    }
    r.note(format!("input of degree {} linearised, with the canonical flips", p.degree[0]));
    Ok(SymInput { s: SymmetricVB::linearised(p)?, graded: Some(p.clone()) })
}

fn k_fold_input(p: &Presentation, r: &mut CommandReport) -> Result<Presentation> {
    if p.blocks.iter().all(|b| b.weight.iter().all(|w| *w <= 1)) {
        return Ok(p.clone());
    }
    r.note(format!("input of degree {} linearised", p.degree.first().copied().unwrap_or(0)));
    full_lin_direct(p)
}

/// Exact comparison, falling back to evaluation at sample points when the
/// symbolic forms differ.
fn compare(a: &Presentation, b: &Presentation, opts: &Options) -> (bool, String) {
    let Err(exact) = a.compare(b) else {
        return (true, "exact symbolic equality".into());
    };
    if a.blocks.len() != b.blocks.len() || a.transitions.len() != b.transitions.len() {
        return (false, exact);
    }
    let inst = NumericInstance::new(&[a, b], opts.seed, opts.degree_cap);
    for t in &a.transitions {
        let Some(u) = b.transition(&t.from, &t.to) else {
            return (false, exact);
        };
        for pt in sample_points(a, opts.seed, opts.samples) {
            match (inst.apply_transition(t, &pt), inst.apply_transition(u, &pt)) {
                (Ok(x), Ok(y)) if x == y => {}
                (Ok(_), Ok(_)) => return (false, format!("{exact}; values differ at a sample point of {}", t.label())),
                (Err(e), _) | (_, Err(e)) => return (false, format!("{exact}; evaluation failed: {e}")),
            }
        }
    }
    (true, format!("equal at {} sample points (symbolic forms differ: {exact})", opts.samples))
}

fn dispatch(cmd: Command, doc: &Document, opts: &Options, r: &mut CommandReport) -> Result<()> {
    let p = &doc.presentation;
    match cmd {
        Command::Validate => r.absorb("", validate(p)),
        Command::Lift => emit(r, &tangent_lift(p)),
        Command::Vertical => emit(r, &vertical(p)?),
        Command::Plin => emit(r, &plin(p)?),
        Command::Lin => emit(r, &full_lin(p)?),
        Command::LinDirect => {
            let direct = full_lin_direct(p)?;
            let (ok, detail) = compare(&full_lin_renamed(p)?, &direct, opts);
            r.push("iterated-vs-direct", ok, detail);
            emit(r, &direct);
        }
        Command::Sigma => {
            let input = symmetric_input(p, r)?;
            let s = &input.s;
            r.absorb("symmetric", validate_symmetric(s));
            match &opts.g {
                Some(g) => {
                    let sg = s.sigma(g)?;
                    let target = flip(&s.d, g)?;
                    r.absorb(&sg.name, validate_morphism(&sg, &s.d, &target, &opts.check()));
                    r.note(print_morphism(&sg, s.d.lift_depth).trim_end());
                    emit(r, &target);
                }
                None => {
                    for m in &s.generators {
                        r.note(print_morphism(m, s.d.lift_depth).trim_end());
                    }
                }
            }
        }
        Command::Symmetrise => {
            let input = symmetric_input(p, r)?;
            let sym = symmetrise(&input.s)?;
            r.absorb("symmetrise", sym.report.clone());
            emit(r, &sym.d_z);
        }
        Command::Diagonalise => {
            let input = symmetric_input(p, r)?;
            let sym = symmetrise(&input.s)?;
            r.absorb("symmetrise", sym.report.clone());
            let diag = diagonalise_from(&input.s, &sym)?;
            if let Some(f) = &input.graded {
                let back = iota_rescale(&diag)?.compare(f);
                r.push("recovers-input", back.is_ok(), back.err().unwrap_or_else(|| "the rescaled diagonal equals the input".into()));
            }
            r.note("coordinates of weight w carry the factor w!; the roundtrip command removes it");
            emit(r, &diag);
        }
        Command::Roundtrip => {
            let input = symmetric_input(p, r)?;
            let rt = roundtrip_iso(&input.s)?;
            r.absorb("roundtrip", rt.report.clone());
            if let Some(f) = &input.graded {
                let back = rt.f.compare(f);
                r.push("recovers-input", back.is_ok(), back.err().unwrap_or_else(|| "diagonal of Lin equals the input".into()));
            }
            emit(r, &rt.f);
        }
        Command::MorphismCheck => morphism_check(doc, opts, r)?,
        Command::Dual => {
            let input = symmetric_input(p, r)?;
            let d = &input.s.d;
            let a = dual_dvb(d, Leg::A)?;
            let b = dual_dvb(d, Leg::B)?;
            r.absorb("", pairing_report(d, &a, &b, opts.seed, opts.samples));
            r.note("emitted: the dual over the leg A; the dual over B pairs with it");
            emit(r, &a.presentation);
        }
        Command::SkewForm => {
            let input = symmetric_input(p, r)?;
            for chart in &input.s.d.charts {
                let f = skew_form(&input.s, chart, opts.seed, opts.samples)?;
                r.absorb(chart, f.report);
                r.note(format!("omega on {chart} = {}", f.omega));
            }
        }
        Command::Algebroid => {
            let input = symmetric_input(p, r)?;
            for chart in &input.s.d.charts {
                let alg = algebroid(&input.s, chart, opts.seed, opts.samples)?;
                r.absorb(chart, alg.report.clone());
                for ((a, b, i), c) in &alg.sigma {
                    if !c.is_zero() {
                        r.note(format!("on {chart}: [e{}, e{}] has f{} coefficient {c}", a + 1, b + 1, i + 1));
                    }
                }
            }
        }
        Command::Poisson => {
            let input = symmetric_input(p, r)?;
            let chart = input.s.d.charts.first().ok_or_else(|| Error::Invalid("no charts".into()))?.clone();
            let alg = algebroid(&input.s, &chart, opts.seed, opts.samples)?;
            r.absorb("algebroid", alg.report.clone());
            let pt = poisson(&input.s, &alg)?;
            r.absorb("poisson", pt.report);
            r.note(format!("Lambda on {chart} = {}", pt.lambda.describe()));
            emit(r, &pt.dual.presentation);
        }
        Command::SuperiseCheck => {
            let d = k_fold_input(p, r)?;
            let chk = z2k_sign_check(&d)?;
            r.absorb("", chk.report);
            for v in &chk.violations {
                r.note(format!("violation: {v}"));
            }
        }
        Command::Superise => {
            let d = k_fold_input(p, r)?;
            let chk = z2k_sign_check(&d)?;
            if !chk.violations.is_empty() {
                r.absorb("", chk.report);
                for v in &chk.violations {
                    r.note(format!("violation: {v}"));
                }
                return Ok(());
            }
            let s = superise(&d)?;
            r.absorb("", s.report.clone());
            let mut depth_var = String::new();
            for c in &s.coordinates {
                depth_var.clear();
                let _ = c.var.write_padded(&mut depth_var, d.lift_depth);
                r.note(format!("{depth_var} degree {} {}", c.degree, if c.is_odd() { "odd" } else { "even" }));
            }
            for (a, row) in s.classes.iter().zip(&s.signs) {
                let cells: Vec<String> = s.classes.iter().zip(row).map(|(b, x)| format!("{b}:{x:+}")).collect();
                r.note(format!("signs {a}: {}", cells.join(" ")));
            }
            emit(r, &s.presentation);
        }
    }
    Ok(())
}

fn morphism_check(doc: &Document, opts: &Options, r: &mut CommandReport) -> Result<()> {
    if doc.morphisms.is_empty() {
        return Err(Error::Invalid("the input has no morphism block".into()));
    }
    let input = symmetric_input(&doc.presentation, r)?;
    let s = &input.s;
    let rename: Option<BTreeMap<_, _>> = match &input.graded {
        Some(f) => Some(iterated_to_direct(&full_lin(f)?)?),
        None => None,
    };
    for phi in &doc.morphisms {
        let prefix = &phi.name;
        let lifted: Morphism = match (&input.graded, &rename) {
            (Some(f), Some(map)) => {
                r.absorb(&format!("{prefix}.graded"), validate_morphism(phi, f, f, &opts.check()));
                rename_morphism(&full_lin_morphism(phi, f, f)?, map, map)
            }
            _ => phi.clone(),
        };
        r.absorb(&format!("{prefix}.morphism"), validate_morphism(&lifted, &s.d, &s.d, &opts.check()));
        let sym = check_morphism_symmetry(&lifted, s, s)?;
        r.absorb(&format!("{prefix}.symmetry"), sym.report);
        for (m, mg) in sym.offending.iter().take(8) {
            r.note(format!("{prefix}: coefficients of {m} and {mg} differ"));
        }
        if let Some(restricted) = &sym.restricted {
            r.note(format!("induced map of diagonals:\n{}", print_morphism(restricted, 0).trim_end()));
        } else {
            let fixed = symmetrise_morphism(&lifted, s, s)?;
            let ok = check_morphism_symmetry(&fixed, s, s)?.report.passed();
            r.note(format!("symmetrised ({}):\n{}", if ok { "symmetric" } else { "still not symmetric" }, print_morphism(&fixed, s.d.lift_depth).trim_end()));
        }
        if s.k() == 2 {
            match isotropy_report(&lifted, s, s, &opts.check()) {
                Ok(iso) => r.absorb(&format!("{prefix}.isotropy"), iso),
                Err(e) => r.note(format!("{prefix}: isotropy not checked: {e}")),
            }
        }
    }
    Ok(())
}
