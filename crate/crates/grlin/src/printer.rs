//! Canonical text form of presentations and morphisms; output re-parses to
//! an identical value.

use std::fmt::Write;

use grlin_core::bundle_model::{Block, Morphism, Presentation};
use grlin_core::graded_algebra::{Poly, Var, VarKind};

/// Identifier-safe version of a presentation name.
pub fn ident(s: &str) -> String {
    let mut out: String = s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        out.insert(0, '_');
    }
    out
}

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn block_head(b: &Block, depth: usize) -> String {
    let mut s = b.name.to_string();
    let _ = b.lift.write_padded(&mut s, depth);
    format!("{s}[{}]", b.size)
}

fn var(v: &Var, depth: usize) -> String {
    let mut s = String::new();
    let _ = v.write_padded(&mut s, depth);
    s
}

fn poly(p: &Poly, depth: usize) -> String {
    let mut s = String::new();
    let _ = p.write_padded(&mut s, depth);
    s
}

fn laws<'a>(out: &mut String, laws: impl Iterator<Item = (&'a Var, &'a Poly)>, depth: usize) {
    for (v, p) in laws {
        let _ = writeln!(out, "    {}' = {};", var(v, depth), poly(p, depth));
    }
}

pub fn print(p: &Presentation) -> String {
    let depth = p.lift_depth;
    let mut out = String::new();
    let _ = writeln!(out, "bundle {} {{", ident(&p.name));
    if p.degree.len() == 1 {
        let _ = writeln!(out, "  degree {};", p.degree[0]);
    } else {
        let _ = writeln!(out, "  degree ({});", list(&p.degree));
    }
    if depth > 0 {
        let _ = writeln!(out, "  lifts {depth};");
    }
    let charts: Vec<String> = p.charts.iter().map(|c| ident(c)).collect();
    if charts.is_empty() {
        let _ = writeln!(out, "  charts;");
    } else {
        let _ = writeln!(out, "  charts {};", charts.join(", "));
    }
    for b in &p.blocks {
        match b.kind {
            VarKind::Base => {
                let _ = writeln!(out, "  base {};", block_head(b, 0));
            }
            VarKind::Fibre => {
                let _ = writeln!(out, "  coord {} weight ({});", block_head(b, depth), list(&b.weight));
            }
        }
    }
    for f in &p.fns {
        let mut line = format!("  fn {}", f.name);
        if !f.symmetric {
            line.push_str(" nonsymmetric");
        }
        if f.invertible {
            line.push_str(" invertible");
        }
        if let Some(inv) = &f.inverse {
            let _ = write!(line, " inverse {inv}");
        }
        let _ = writeln!(out, "{line};");
    }
    for t in &p.transitions {
        let _ = writeln!(out, "  transition {}->{} {{", ident(&t.from), ident(&t.to));
        laws(&mut out, t.laws.iter(), depth);
        let _ = writeln!(out, "  }}");
    }
    out.push_str("}\n");
    out
}

/// A morphism block, listing only the coordinates that do not map to themselves.
pub fn print_morphism(m: &Morphism, depth: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "morphism {} {{", ident(&m.name));
    for cm in &m.maps {
        let _ = writeln!(out, "  map {}->{} {{", ident(&cm.source), ident(&cm.target));
        let moved = cm.pullback.iter().filter(|(v, p)| p.as_var() != Some(*v));
        laws(&mut out, moved, depth);
        let _ = writeln!(out, "  }}");
    }
    out.push_str("}\n");
    out
}
