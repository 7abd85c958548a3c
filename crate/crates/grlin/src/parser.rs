//! Recursive-descent parser for the bundle description language.
//!
//! ```text
//! file       := bundle morphism*
//! bundle     := "bundle" IDENT "{" stmt* "}"
//! stmt       := "degree" (INT | "(" INT ("," INT)* ")") ";"
//!             | "lifts" INT ";"
//!             | "charts" (IDENT ("," IDENT)*)? ";"
//!             | "base" block ";"
//!             | "coord" block "weight" "(" INT ("," INT)* ")" ";"
//!             | "fn" IDENT signature? ("invertible" | "inverse" IDENT | "nonsymmetric")* ";"
//!             | "transition" IDENT "->" IDENT "{" law* "}"
//! block      := IDENT lift? "[" INT "]"
//! lift       := "{" INT "}"                      bit string, position 0 first
//! law        := var "'" "=" expr ";"             the prime may also follow the name
//! expr       := term (("+" | "-") term)*
//! term       := factor ("*" factor | "/" factor)*   divisors are rational constants
//! factor     := "-" factor | "+" factor | atom ("^" INT)?
//! atom       := INT | "(" expr ")" | var | symbol
//! var        := IDENT lift? "[" INT "]"
//! symbol     := IDENT "[" labels (";" labels)? ("|" labels)? "]"
//! morphism   := "morphism" IDENT "{" ("map" IDENT "->" IDENT "{" law* "}")* "}"
//! ```
//!
//! Symbols of a symmetric family have their lower slots sorted on input, so
//! `T[y2,y1;z1]` and `T[y1,y2;z1]` denote the same coefficient.

use std::collections::BTreeMap;

use grlin_core::bundle_model::{Block, ChartMap, FnDecl, Morphism, Presentation, Transition};
use grlin_core::graded_algebra::{name, q, FnSym, Label, Lift, Name, Poly, Var, Q};

use crate::diag::{Diagnostic, Pos};
use crate::lexer::{lex, Tok};

/// Parenthesis nesting accepted before the parser gives up.
pub const MAX_NESTING: usize = 128;
/// Largest literal exponent.
pub const MAX_EXPONENT: u32 = 64;
/// Largest declared block size.
pub const MAX_BLOCK_SIZE: u32 = 4096;

/// A bundle together with optional endomorphisms of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub presentation: Presentation,
    pub morphisms: Vec<Morphism>,
}

pub fn parse(src: &str) -> Result<Presentation, Diagnostic> {
    parse_document(src).map(|d| d.presentation)
}

pub fn parse_document(src: &str) -> Result<Document, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, depth: 0, degree: None, blocks: Vec::new(), fns: Vec::new() };
    p.document()
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    depth: usize,
    degree: Option<Vec<u32>>,
    blocks: Vec<Block>,
    fns: Vec<FnDecl>,
}

type Res<T> = Result<T, Diagnostic>;

/// `y12` as the label `(y, 12)`.
fn split_label(s: &str) -> Option<Label> {
    let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if cut == 0 || cut == s.len() {
        return None;
    }
    let index: u32 = s[cut..].parse().ok()?;
    Some(Label::new(&s[..cut], index))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> Res<T> {
        Err(Diagnostic::syntax(self.pos(), format!("expected {wanted}, found {}", self.peek().describe())))
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Res<Pos> {
        let pos = self.pos();
        if self.eat(c) {
            Ok(pos)
        } else {
            self.unexpected(&format!("`{c}`"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Res<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Res<(String, Pos)> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => Err(Diagnostic::syntax(pos, format!("expected an identifier, found {}", t.describe()))),
        }
    }

    fn int_text(&mut self) -> Res<(String, Pos)> {
        match self.bump() {
            (Tok::Int(s), pos) => Ok((s, pos)),
            (t, pos) => Err(Diagnostic::syntax(pos, format!("expected a number, found {}", t.describe()))),
        }
    }

    fn uint(&mut self) -> Res<(u32, Pos)> {
        let (s, pos) = self.int_text()?;
        s.parse().map(|n| (n, pos)).map_err(|_| Diagnostic::semantic(pos, format!("{s} does not fit in 32 bits")))
    }

    fn uint_list(&mut self) -> Res<Vec<u32>> {
        self.expect('(')?;
        let mut out = vec![self.uint()?.0];
        while self.eat(',') {
            out.push(self.uint()?.0);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn document(&mut self) -> Res<Document> {
        let presentation = self.bundle()?;
        let mut morphisms = Vec::new();
        while self.is_keyword("morphism") {
            morphisms.push(self.morphism(&presentation)?);
        }
        if *self.peek() != Tok::Eof {
            return self.unexpected("`morphism` or end of input");
        }
        Ok(Document { presentation, morphisms })
    }

    fn bundle(&mut self) -> Res<Presentation> {
        self.keyword("bundle")?;
        let (bundle_name, _) = self.ident()?;
        self.expect('{')?;
        let mut lift_depth = None;
        let mut charts: Option<Vec<Name>> = None;
        let mut transitions: Vec<Transition> = Vec::new();
        let mut transition_at: Vec<Pos> = Vec::new();
        loop {
            let (tok, pos) = (self.peek().clone(), self.pos());
            let kw = match tok {
                Tok::Sym('}') => {
                    self.bump();
                    break;
                }
                Tok::Ident(s) => s,
                _ => return self.unexpected("a declaration or `}`"),
            };
            self.bump();
            match kw.as_str() {
                "degree" => {
                    if self.degree.is_some() {
                        return Err(Diagnostic::semantic(pos, "degree declared twice"));
                    }
                    if !self.blocks.is_empty() {
                        return Err(Diagnostic::semantic(pos, "degree must be declared before any coordinate block"));
                    }
                    let d = if matches!(self.peek(), Tok::Int(_)) { vec![self.uint()?.0] } else { self.uint_list()? };
                    self.degree = Some(d);
                    self.expect(';')?;
                }
                "lifts" => {
                    let (n, at) = self.uint()?;
                    if n > 32 {
                        return Err(Diagnostic::semantic(at, "at most 32 lift positions"));
                    }
                    lift_depth = Some(n as usize);
                    self.expect(';')?;
                }
                "charts" => {
                    let mut cs: Vec<Name> = Vec::new();
                    if !self.eat(';') {
                        loop {
                            let (c, at) = self.ident()?;
                            if cs.iter().any(|x| **x == *c) {
                                return Err(Diagnostic::semantic(at, format!("chart {c} listed twice")));
                            }
                            cs.push(name(&c));
                            if !self.eat(',') {
                                break;
                            }
                        }
                        self.expect(';')?;
                    }
                    charts = Some(cs);
                }
                "base" => {
                    let n = self.n_weights(pos)?;
                    let (bn, lift, size, at) = self.block_head()?;
                    self.push_block(Block { lift, ..Block::base(&bn, size, n) }, at)?;
                    self.expect(';')?;
                }
                "coord" => {
                    let n = self.n_weights(pos)?;
                    let (bn, lift, size, at) = self.block_head()?;
                    self.keyword("weight")?;
                    let wpos = self.pos();
                    let w = self.uint_list()?;
                    if w.len() != n {
                        return Err(Diagnostic::semantic(
                            wpos,
                            format!("weight arity mismatch: {bn} has {} weight components but the bundle has {n} weight fields", w.len()),
                        ));
                    }
                    self.push_block(Block::fibre(&bn, lift, size, w), at)?;
                    self.expect(';')?;
                }
                "fn" => {
                    let d = self.fn_decl()?;
                    self.fns.push(d);
                }
                "transition" => {
                    let (from, to, at) = self.chart_pair()?;
                    if transitions.iter().any(|t| *t.from == *from && *t.to == *to) {
                        return Err(Diagnostic::semantic(at, format!("transition {from}->{to} declared twice")));
                    }
                    let laws = self.law_block()?;
                    transitions.push(Transition { from: name(&from), to: name(&to), laws });
                    transition_at.push(at);
                }
                other => return Err(Diagnostic::syntax(pos, format!("unknown declaration `{other}`"))),
            }
        }
        let Some(degree) = self.degree.clone() else {
            return Err(Diagnostic::semantic(self.pos(), format!("bundle {bundle_name} declares no degree")));
        };
        let charts = match charts {
            Some(cs) => {
                for (t, &at) in transitions.iter().zip(&transition_at) {
                    for c in [&t.from, &t.to] {
                        if !cs.contains(c) {
                            return Err(Diagnostic::semantic(at, format!("chart {c} is not listed in `charts`")));
                        }
                    }
                }
                cs
            }
            None => {
                let mut cs: Vec<Name> = Vec::new();
                for t in &transitions {
                    for c in [&t.from, &t.to] {
                        if !cs.contains(c) {
                            cs.push(c.clone());
                        }
                    }
                }
                if cs.is_empty() {
                    cs.push(name("U"));
                }
                cs
            }
        };
        Ok(Presentation {
            name: bundle_name,
            degree,
            lift_depth: lift_depth.unwrap_or(0),
            blocks: self.blocks.clone(),
            fns: self.fns.clone(),
            charts,
            transitions,
        })
    }

    fn n_weights(&self, pos: Pos) -> Res<usize> {
        self.degree.as_ref().map(Vec::len).ok_or_else(|| Diagnostic::semantic(pos, "degree must be declared before any coordinate block"))
    }

    fn lift_label(&mut self) -> Res<Lift> {
        if !self.eat('{') {
            return Ok(Lift::NONE);
        }
        let (bits, at) = self.int_text()?;
        if bits.len() > 32 || bits.chars().any(|c| c != '0' && c != '1') {
            return Err(Diagnostic::semantic(at, format!("lift label {{{bits}}} must be a string of at most 32 binary digits")));
        }
        self.expect('}')?;
        let bits: Vec<u32> = bits.chars().map(|c| (c == '1') as u32).collect();
        Ok(Lift::from_bits(&bits))
    }

    fn block_head(&mut self) -> Res<(String, Lift, u32, Pos)> {
        let (bn, at) = self.ident()?;
        if bn.ends_with(|c: char| c.is_ascii_digit()) {
            return Err(Diagnostic::semantic(at, format!("block name {bn} ends in a digit, which would make index labels ambiguous")));
        }
        let lift = self.lift_label()?;
        self.expect('[')?;
        let (size, spos) = self.uint()?;
        if size == 0 || size > MAX_BLOCK_SIZE {
            return Err(Diagnostic::semantic(spos, format!("block size must lie in 1..={MAX_BLOCK_SIZE}")));
        }
        self.expect(']')?;
        Ok((bn, lift, size, at))
    }

    fn push_block(&mut self, b: Block, at: Pos) -> Res<()> {
        if self.blocks.iter().any(|c| c.name == b.name && c.lift == b.lift) {
            return Err(Diagnostic::semantic(at, format!("block {} declared twice", b.var(1).with_lift(b.lift))));
        }
        if self.fns.iter().any(|f| f.name == b.name) {
            return Err(Diagnostic::semantic(at, format!("{} names both a block and a function family", b.name)));
        }
        self.blocks.push(b);
        Ok(())
    }

    fn fn_decl(&mut self) -> Res<FnDecl> {
        let (fname, at) = self.ident()?;
        if self.fns.iter().any(|f| *f.name == *fname) {
            return Err(Diagnostic::semantic(at, format!("function family {fname} declared twice")));
        }
        if self.blocks.iter().any(|b| *b.name == *fname) {
            return Err(Diagnostic::semantic(at, format!("{fname} names both a block and a function family")));
        }
        // an index signature documents the family; slots are read per occurrence
        if *self.peek() == Tok::Sym('[') {
            self.bump();
            while !matches!(self.peek(), Tok::Sym(']') | Tok::Eof) {
                match self.bump().0 {
                    Tok::Ident(_) | Tok::Int(_) | Tok::Sym(',' | ';' | '|') => {}
                    t => return Err(Diagnostic::syntax(self.toks[self.at - 1].1, format!("unexpected {} in index signature", t.describe()))),
                }
            }
            self.expect(']')?;
        }
        let mut d = FnDecl::plain(&fname);
        loop {
            if self.is_keyword("invertible") {
                self.bump();
                d.invertible = true;
            } else if self.is_keyword("nonsymmetric") {
                self.bump();
                d.symmetric = false;
            } else if self.is_keyword("inverse") {
                self.bump();
                let (inv, _) = self.ident()?;
                d.inverse = Some(name(&inv));
            } else {
                break;
            }
        }
        self.expect(';')?;
        Ok(d)
    }

    fn chart_pair(&mut self) -> Res<(String, String, Pos)> {
        let (from, at) = self.ident()?;
        if *self.peek() != Tok::Arrow {
            return self.unexpected("`->`");
        }
        self.bump();
        let (to, _) = self.ident()?;
        Ok((from, to, at))
    }

    fn law_block(&mut self) -> Res<BTreeMap<Var, Poly>> {
        self.expect('{')?;
        let mut laws = BTreeMap::new();
        while !self.eat('}') {
            let at = self.pos();
            let target = self.var_ref(true)?;
            self.expect('=')?;
            let law = self.expr()?;
            self.expect(';')?;
            if laws.insert(target.clone(), law).is_some() {
                return Err(Diagnostic::semantic(at, format!("law of {target} given twice")));
            }
        }
        Ok(laws)
    }

    fn morphism(&mut self, p: &Presentation) -> Res<Morphism> {
        self.keyword("morphism")?;
        let (mname, _) = self.ident()?;
        self.expect('{')?;
        let mut maps: Vec<ChartMap> = Vec::new();
        while !self.eat('}') {
            self.keyword("map")?;
            let (from, to, at) = self.chart_pair()?;
            for c in [&from, &to] {
                if !p.charts.iter().any(|x| **x == **c) {
                    return Err(Diagnostic::semantic(at, format!("chart {c} is not a chart of {}", p.name)));
                }
            }
            if maps.iter().any(|m| *m.source == *from) {
                return Err(Diagnostic::semantic(at, format!("chart {from} mapped twice")));
            }
            let mut pullback: BTreeMap<Var, Poly> = p.vars().into_iter().map(|v| (v.clone(), Poly::var(v))).collect();
            pullback.extend(self.law_block()?);
            maps.push(ChartMap { source: name(&from), target: name(&to), pullback });
        }
        Ok(Morphism { name: mname, maps })
    }

    /// A coordinate reference; `prime` accepts the mark of a law target.
    fn var_ref(&mut self, prime: bool) -> Res<Var> {
        let (vn, at) = self.ident()?;
        let mut primed = prime && self.eat('\'');
        let lift = self.lift_label()?;
        self.expect('[')?;
        let (index, ipos) = self.uint()?;
        self.expect(']')?;
        if prime && !primed {
            primed = self.eat('\'');
        }
        if prime && !primed {
            return self.unexpected("`'` marking the new coordinate");
        }
        self.resolve(&vn, lift, index, at, ipos)
    }

    fn resolve(&self, vn: &str, lift: Lift, index: u32, at: Pos, ipos: Pos) -> Res<Var> {
        let Some(b) = self.blocks.iter().find(|b| &*b.name == vn && b.lift == lift) else {
            let mut shown = String::from(vn);
            let _ = lift.write_padded(&mut shown, 0);
            return Err(Diagnostic::semantic(at, format!("unknown symbol {shown}")));
        };
        if index == 0 || index > b.size {
            return Err(Diagnostic::semantic(ipos, format!("index {index} out of range 1..={} for block {}", b.size, b.var(1))));
        }
        Ok(Var::new(b.kind, b.name.clone(), lift, index))
    }

    fn expr(&mut self) -> Res<Poly> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(Diagnostic::syntax(self.pos(), format!("expression nested deeper than {MAX_NESTING} levels")));
        }
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Res<Poly> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.factor()?;
            } else if *self.peek() == Tok::Sym('/') {
                let at = self.bump().1;
                let d = self.factor()?;
                match d.as_constant() {
                    Some(c) if c != q(0, 1) => acc = acc.scale(&(q(1, 1) / c)),
                    Some(_) => return Err(Diagnostic::semantic(at, "division by zero")),
                    None => return Err(Diagnostic::semantic(at, "only division by a rational constant is allowed")),
                }
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Res<Poly> {
        if self.eat('-') {
            self.depth += 1;
            if self.depth > MAX_NESTING {
                return Err(Diagnostic::syntax(self.pos(), "too many unary signs"));
            }
            let f = self.factor()?;
            self.depth -= 1;
            return Ok(f.scale(&q(-1, 1)));
        }
        if self.eat('+') {
            self.depth += 1;
            if self.depth > MAX_NESTING {
                return Err(Diagnostic::syntax(self.pos(), "too many unary signs"));
            }
            let f = self.factor();
            self.depth -= 1;
            return f;
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Sym('^') {
            self.bump();
            let (e, at) = self.uint()?;
            if e > MAX_EXPONENT {
                return Err(Diagnostic::semantic(at, format!("exponent {e} exceeds {MAX_EXPONENT}")));
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Res<Poly> {
        match self.peek().clone() {
            Tok::Int(s) => {
                let at = self.bump().1;
                let c: Q = s.parse().map_err(|_| Diagnostic::syntax(at, format!("bad number {s}")))?;
                Ok(Poly::constant(c))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(s) => {
                let is_fn = self.fns.iter().any(|f| *f.name == *s) && *self.peek_at(1) == Tok::Sym('[');
                if is_fn {
                    self.symbol()
                } else {
                    Ok(Poly::var(self.var_ref(false)?))
                }
            }
            _ => self.unexpected("a number, coordinate, symbol or `(`"),
        }
    }

    fn labels(&mut self) -> Res<Vec<Label>> {
        let mut out = Vec::new();
        if !matches!(self.peek(), Tok::Ident(_)) {
            return Ok(out);
        }
        loop {
            let (s, at) = self.ident()?;
            let l = split_label(&s).ok_or_else(|| Diagnostic::semantic(at, format!("index label {s} needs a block name followed by an index")))?;
            if l.index == 0 {
                return Err(Diagnostic::semantic(at, "indices start at 1"));
            }
            out.push(l);
            if !self.eat(',') {
                return Ok(out);
            }
        }
    }

    fn symbol(&mut self) -> Res<Poly> {
        let (fname, _) = self.ident()?;
        let decl = self.fns.iter().find(|f| *f.name == *fname).expect("checked by the caller").clone();
        self.expect('[')?;
        let lower = self.labels()?;
        let upper = if self.eat(';') { self.labels()? } else { Vec::new() };
        let deriv = if self.eat('|') { self.labels()? } else { Vec::new() };
        self.expect(']')?;
        let sym = FnSym::new(decl.name.clone(), decl.symmetric, lower, upper, deriv);
        Ok(Poly::fnsym(sym))
    }
}
