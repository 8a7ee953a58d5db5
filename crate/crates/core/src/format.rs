//! Line-oriented text format for every object kind.
//!
//! ```text
//! format 1
//! field Fp:7
//! kind spectral-sequence
//! stable 1
//! page 0
//! module (0,0):1 (0,1):1
//! block (0,0) 1 1 : 1
//! page 1
//! module
//! psi 0
//! ```
//!
//! `block (p,q) R C : e…` gives the `R×C` block at source bidegree `(p,q)`
//! row-major; missing blocks are zero. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::bigraded::{homology, Bidegree, BigradedMap, BigradedModule, RComplex};
use crate::error::{Result, SseqError};
use crate::field::Field;
use crate::filtered::{FilteredComplex, FilteredMorphism};
use crate::linalg::Matrix;
use crate::multicomplex::{op_shift, MultiMorphism, Multicomplex};
use crate::spectral::{SpectralMorphism, SpectralSequence, Ss};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    SpectralSequence,
    SpectralMorphism,
    FilteredComplex,
    FilteredMorphism,
    Multicomplex,
    MultiMorphism,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::SpectralSequence => "spectral-sequence",
            Kind::SpectralMorphism => "spectral-morphism",
            Kind::FilteredComplex => "filtered-complex",
            Kind::FilteredMorphism => "filtered-morphism",
            Kind::Multicomplex => "multicomplex",
            Kind::MultiMorphism => "multicomplex-morphism",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            Kind::SpectralSequence,
            Kind::SpectralMorphism,
            Kind::FilteredComplex,
            Kind::FilteredMorphism,
            Kind::Multicomplex,
            Kind::MultiMorphism,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug)]
pub enum Object<F> {
    Spectral(Ss<F>),
    Morphism(SpectralMorphism<F>),
    Filtered(Arc<FilteredComplex<F>>),
    FilteredMorphism(FilteredMorphism<F>),
    Multicomplex(Arc<Multicomplex<F>>),
    MultiMorphism(MultiMorphism<F>),
}

impl<F: Field> Object<F> {
    pub fn kind(&self) -> Kind {
        match self {
            Object::Spectral(_) => Kind::SpectralSequence,
            Object::Morphism(_) => Kind::SpectralMorphism,
            Object::Filtered(_) => Kind::FilteredComplex,
            Object::FilteredMorphism(_) => Kind::FilteredMorphism,
            Object::Multicomplex(_) => Kind::Multicomplex,
            Object::MultiMorphism(_) => Kind::MultiMorphism,
        }
    }
}

/// The header fields, readable without knowing the field type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub field: String,
    pub kind: Kind,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> SseqError {
    SseqError::Parse {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Clone, Debug)]
struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    fn head(&self) -> &'a str {
        self.tokens[0].1
    }

    fn err(&self, i: usize, message: impl Into<String>) -> SseqError {
        let col = self.tokens.get(i).map_or_else(|| self.tokens.last().map_or(1, |t| t.0 + t.1.len()), |t| t.0);
        perr(self.number, col, message)
    }

    fn arg(&self, i: usize) -> Result<&'a str> {
        self.tokens.get(i).map(|t| t.1).ok_or_else(|| self.err(i, "missing argument"))
    }

    fn int<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        self.arg(i)?.parse().map_err(|_| self.err(i, "expected an integer"))
    }

    fn arity(&self, n: usize) -> Result<()> {
        if self.tokens.len() != n {
            return Err(self.err(n.min(self.tokens.len()), format!("`{}` takes {} argument(s)", self.head(), n - 1)));
        }
        Ok(())
    }
}

struct Cursor<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    end_line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (j, c) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
                match (c.is_whitespace(), start) {
                    (false, None) => start = Some(j),
                    (true, Some(s)) => {
                        tokens.push((s + 1, &content[s..j]));
                        start = None;
                    }
                    _ => {}
                }
            }
            if !tokens.is_empty() {
                lines.push(Line { number: i + 1, tokens });
            }
        }
        Cursor {
            lines,
            pos: 0,
            end_line: text.lines().count() + 1,
        }
    }

    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    fn peek_head(&self) -> Option<&'a str> {
        self.peek().map(|l| l.head())
    }

    fn next(&mut self) -> Result<Line<'a>> {
        let l = self.lines.get(self.pos).cloned().ok_or_else(|| perr(self.end_line, 1, "unexpected end of document"))?;
        self.pos += 1;
        Ok(l)
    }

    fn expect(&mut self, head: &str) -> Result<Line<'a>> {
        let l = self.next()?;
        if l.head() != head {
            return Err(l.err(0, format!("expected `{head}`, found `{}`", l.head())));
        }
        Ok(l)
    }
}

fn parse_bidegree(line: &Line<'_>, i: usize, s: &str) -> Result<Bidegree> {
    let inner = s
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| line.err(i, "expected a bidegree `(p,q)`"))?;
    let (p, q) = inner.split_once(',').ok_or_else(|| line.err(i, "expected a bidegree `(p,q)`"))?;
    let p = p.trim().parse().map_err(|_| line.err(i, "bad p"))?;
    let q = q.trim().parse().map_err(|_| line.err(i, "bad q"))?;
    Ok(Bidegree::new(p, q))
}

fn parse_module(line: &Line<'_>) -> Result<BigradedModule> {
    let mut m = BigradedModule::zero();
    for i in 1..line.tokens.len() {
        let tok = line.tokens[i].1;
        let (b, d) = tok.rsplit_once(':').ok_or_else(|| line.err(i, "expected `(p,q):dim`"))?;
        let b = parse_bidegree(line, i, b)?;
        let d: usize = d.parse().map_err(|_| line.err(i, "bad dimension"))?;
        if m.dim(b) > 0 {
            return Err(line.err(i, format!("bidegree {b} listed twice")));
        }
        m.add_dim(b, d);
    }
    Ok(m)
}

/// `R C : entries` starting at token `i`.
fn parse_matrix<F: Field>(line: &Line<'_>, i: usize) -> Result<Matrix<F>> {
    let rows: usize = line.int(i)?;
    let cols: usize = line.int(i + 1)?;
    if line.arg(i + 2)? != ":" {
        return Err(line.err(i + 2, "expected `:`"));
    }
    let start = i + 3;
    let found = line.tokens.len() - start;
    if found != rows * cols {
        return Err(line.err(start.min(line.tokens.len()), format!("expected {} entries, found {found}", rows * cols)));
    }
    let mut data = Vec::with_capacity(found);
    for k in start..line.tokens.len() {
        data.push(F::parse(line.tokens[k].1).ok_or_else(|| line.err(k, format!("not an element of {}", F::descriptor())))?);
    }
    Ok(Matrix::new(rows, cols, data))
}

fn parse_blocks<F: Field>(cur: &mut Cursor<'_>, source: &BigradedModule, target: &BigradedModule, shift: Bidegree) -> Result<BigradedMap<F>> {
    let mut map = BigradedMap::zero(source.clone(), target.clone(), shift);
    while cur.peek_head() == Some("block") {
        let line = cur.next()?;
        let x = parse_bidegree(&line, 1, line.arg(1)?)?;
        let m = parse_matrix(&line, 2)?;
        let expect = (target.dim(x + shift), source.dim(x));
        if m.shape() != expect {
            return Err(line.err(2, format!("block at {x} must be {}x{}", expect.0, expect.1)));
        }
        if map.block_ref(x).is_some() {
            return Err(line.err(1, format!("block at {x} given twice")));
        }
        if m.rows() * m.cols() > 0 {
            map.set_block(x, m);
        }
    }
    Ok(map)
}

fn write_matrix<F: Field>(out: &mut String, m: &Matrix<F>) {
    write!(out, "{} {} :", m.rows(), m.cols()).unwrap();
    for e in m.entries() {
        write!(out, " {e}").unwrap();
    }
    out.push('\n');
}

fn write_blocks<F: Field>(out: &mut String, map: &BigradedMap<F>) {
    for (x, m) in map.blocks() {
        if m.is_zero() || m.rows() * m.cols() == 0 {
            continue;
        }
        write!(out, "block {x} ").unwrap();
        write_matrix(out, m);
    }
}

fn write_module(out: &mut String, m: &BigradedModule) {
    out.push_str("module");
    for (x, d) in m.entries() {
        if d > 0 {
            write!(out, " {x}:{d}").unwrap();
        }
    }
    out.push('\n');
}

fn write_body<F: Field>(out: &mut String, obj: &Object<F>) {
    writeln!(out, "kind {}", obj.kind().name()).unwrap();
    match obj {
        Object::Spectral(s) => {
            writeln!(out, "stable {}", s.stable_index()).unwrap();
            for (m, page) in s.stored_pages().iter().enumerate() {
                writeln!(out, "page {m}").unwrap();
                write_module(out, page.module());
                write_blocks(out, page.differential());
            }
            for (m, psi) in s.characteristic_maps().iter().enumerate() {
                writeln!(out, "psi {m}").unwrap();
                write_blocks(out, psi);
            }
        }
        Object::Morphism(f) => {
            write_nested(out, "source", &Object::Spectral(f.source().clone()));
            write_nested(out, "target", &Object::Spectral(f.target().clone()));
            for (m, map) in f.page_maps().iter().enumerate() {
                writeln!(out, "map {m}").unwrap();
                write_blocks(out, map);
            }
        }
        Object::Filtered(c) => {
            for (n, lv) in c.all_levels() {
                write!(out, "degree {n} levels").unwrap();
                for l in lv {
                    write!(out, " {l}").unwrap();
                }
                out.push('\n');
            }
            for (n, d) in c.all_diffs() {
                if !d.is_zero() {
                    write!(out, "diff {n} ").unwrap();
                    write_matrix(out, d);
                }
            }
        }
        Object::FilteredMorphism(f) => {
            write_nested(out, "source", &Object::Filtered(f.source().clone()));
            write_nested(out, "target", &Object::Filtered(f.target().clone()));
            for (n, m) in f.all_maps() {
                if !m.is_zero() {
                    write!(out, "map {n} ").unwrap();
                    write_matrix(out, m);
                }
            }
        }
        Object::Multicomplex(a) => {
            write_module(out, a.module());
            for (i, d) in a.ops().iter().enumerate() {
                writeln!(out, "op {i}").unwrap();
                write_blocks(out, d);
            }
        }
        Object::MultiMorphism(f) => {
            write_nested(out, "source", &Object::Multicomplex(f.source().clone()));
            write_nested(out, "target", &Object::Multicomplex(f.target().clone()));
            out.push_str("map\n");
            write_blocks(out, f.map());
        }
    }
}

fn write_nested<F: Field>(out: &mut String, name: &str, obj: &Object<F>) {
    writeln!(out, "{name}").unwrap();
    write_body(out, obj);
    out.push_str("end\n");
}

/// Canonical text of an object.
pub fn print<F: Field>(obj: &Object<F>) -> String {
    let mut out = String::new();
    writeln!(out, "format {FORMAT_VERSION}").unwrap();
    writeln!(out, "field {}", F::descriptor()).unwrap();
    write_body(&mut out, obj);
    out
}

fn parse_header_lines(cur: &mut Cursor<'_>) -> Result<String> {
    let l = cur.expect("format")?;
    l.arity(2)?;
    let v: u32 = l.int(1)?;
    if v != FORMAT_VERSION {
        return Err(l.err(1, format!("unsupported format version {v}")));
    }
    let l = cur.expect("field")?;
    l.arity(2)?;
    Ok(l.arg(1)?.to_string())
}

fn parse_kind(cur: &mut Cursor<'_>) -> Result<Kind> {
    let l = cur.expect("kind")?;
    l.arity(2)?;
    Kind::from_name(l.arg(1)?).ok_or_else(|| l.err(1, format!("unknown kind `{}`", l.arg(1).unwrap_or(""))))
}

/// Reads the header only.
pub fn read_header(text: &str) -> Result<Header> {
    let mut cur = Cursor::new(text);
    let field = parse_header_lines(&mut cur)?;
    let kind = parse_kind(&mut cur)?;
    Ok(Header { field, kind })
}

fn invalid_at(line: &Line<'_>, e: impl std::fmt::Display) -> SseqError {
    line.err(0, format!("{e}"))
}

fn parse_spectral_body<F: Field>(cur: &mut Cursor<'_>) -> Result<Ss<F>> {
    let l = cur.expect("stable")?;
    l.arity(2)?;
    let last: usize = l.int(1)?;
    let mut pages = Vec::with_capacity(last + 1);
    for m in 0..=last {
        let l = cur.expect("page")?;
        l.arity(2)?;
        if l.int::<usize>(1)? != m {
            return Err(l.err(1, format!("expected page {m}")));
        }
        let module = parse_module(&cur.expect("module")?)?;
        let d = parse_blocks(cur, &module, &module, Bidegree::differential(m))?;
        pages.push(RComplex::new_unchecked(module, m, d));
    }
    for (m, page) in pages.iter().enumerate() {
        page.validate().map_err(|v| SseqError::Invalid(v.at_page(m)))?;
    }
    let mut psi = Vec::with_capacity(last);
    let mut transfers = Vec::with_capacity(last);
    for m in 0..last {
        let l = cur.next()?;
        l.arity(2)?;
        if l.int::<usize>(1)? != m {
            return Err(l.err(1, format!("expected index {m}")));
        }
        let next = pages[m + 1].module().clone();
        match l.head() {
            "psi" => {
                let h = homology(&pages[m]);
                psi.push(parse_blocks(cur, &h.homology, &next, Bidegree::ZERO)?);
            }
            "transfer" => transfers.push(parse_blocks(cur, pages[m].module(), &next, Bidegree::ZERO)?),
            other => return Err(l.err(0, format!("expected `psi` or `transfer`, found `{other}`"))),
        }
    }
    let ss = if transfers.is_empty() {
        SpectralSequence::new(pages, psi)?
    } else if psi.is_empty() {
        SpectralSequence::from_transfers(pages, transfers)?
    } else {
        return Err(perr(cur.end_line, 1, "mixing `psi` and `transfer` sections"));
    };
    Ok(Arc::new(ss))
}

fn parse_nested<F: Field>(cur: &mut Cursor<'_>, name: &str, kind: Kind) -> Result<Object<F>> {
    cur.expect(name)?.arity(1)?;
    let k = parse_kind(cur)?;
    if k != kind {
        return Err(perr(cur.lines[cur.pos - 1].number, 6, format!("`{name}` must be a {}", kind.name())));
    }
    let obj = parse_body_of(cur, k)?;
    cur.expect("end")?.arity(1)?;
    Ok(obj)
}

fn parse_body_of<F: Field>(cur: &mut Cursor<'_>, kind: Kind) -> Result<Object<F>> {
    match kind {
        Kind::SpectralSequence => Ok(Object::Spectral(parse_spectral_body(cur)?)),
        Kind::SpectralMorphism => {
            let Object::Spectral(a) = parse_nested(cur, "source", Kind::SpectralSequence)? else { unreachable!() };
            let Object::Spectral(b) = parse_nested(cur, "target", Kind::SpectralSequence)? else { unreachable!() };
            let mut maps = Vec::new();
            while cur.peek_head() == Some("map") {
                let l = cur.next()?;
                l.arity(2)?;
                let m: usize = l.int(1)?;
                if m != maps.len() {
                    return Err(l.err(1, format!("expected map {}", maps.len())));
                }
                maps.push(parse_blocks(cur, a.module(m), b.module(m), Bidegree::ZERO)?);
            }
            let f = match maps.len() {
                0 => return Err(perr(cur.end_line, 1, "a morphism needs at least `map 0`")),
                1 => SpectralMorphism::derive(maps.pop().unwrap(), a, b)?,
                _ => SpectralMorphism::from_pages(maps, a, b)?,
            };
            Ok(Object::Morphism(f))
        }
        Kind::FilteredComplex => {
            let mut levels = BTreeMap::new();
            let mut diffs = BTreeMap::new();
            let mut last = None;
            while let Some(head) = cur.peek_head() {
                let l = match head {
                    "degree" | "diff" => cur.next()?,
                    _ => break,
                };
                let n: i32 = l.int(1)?;
                if head == "degree" {
                    if l.arg(2)? != "levels" {
                        return Err(l.err(2, "expected `levels`"));
                    }
                    let lv: Result<Vec<i32>> = (3..l.tokens.len()).map(|i| l.int(i)).collect();
                    if levels.insert(n, lv?).is_some() {
                        return Err(l.err(1, format!("degree {n} given twice")));
                    }
                } else {
                    let m = parse_matrix(&l, 2)?;
                    if diffs.insert(n, m).is_some() {
                        return Err(l.err(1, format!("diff {n} given twice")));
                    }
                }
                last = Some(l);
            }
            let c = FilteredComplex::new(levels, diffs).map_err(|v| match &last {
                Some(l) if matches!(v.kind, crate::error::ViolationKind::BlockShape) => invalid_at(l, v),
                _ => SseqError::Invalid(v),
            })?;
            Ok(Object::Filtered(Arc::new(c)))
        }
        Kind::FilteredMorphism => {
            let Object::Filtered(a) = parse_nested(cur, "source", Kind::FilteredComplex)? else { unreachable!() };
            let Object::Filtered(b) = parse_nested(cur, "target", Kind::FilteredComplex)? else { unreachable!() };
            let mut maps = BTreeMap::new();
            while cur.peek_head() == Some("map") {
                let l = cur.next()?;
                let n: i32 = l.int(1)?;
                maps.insert(n, parse_matrix(&l, 2)?);
            }
            Ok(Object::FilteredMorphism(FilteredMorphism::new(a, b, maps)?))
        }
        Kind::Multicomplex => {
            let module = parse_module(&cur.expect("module")?)?;
            let mut ops = Vec::new();
            while cur.peek_head() == Some("op") {
                let l = cur.next()?;
                l.arity(2)?;
                let i: usize = l.int(1)?;
                if i != ops.len() {
                    return Err(l.err(1, format!("expected op {}", ops.len())));
                }
                ops.push(parse_blocks(cur, &module, &module, op_shift(i))?);
            }
            Ok(Object::Multicomplex(Arc::new(Multicomplex::new(module, ops)?)))
        }
        Kind::MultiMorphism => {
            let Object::Multicomplex(a) = parse_nested(cur, "source", Kind::Multicomplex)? else { unreachable!() };
            let Object::Multicomplex(b) = parse_nested(cur, "target", Kind::Multicomplex)? else { unreachable!() };
            cur.expect("map")?.arity(1)?;
            let map = parse_blocks(cur, a.module(), b.module(), Bidegree::ZERO)?;
            Ok(Object::MultiMorphism(MultiMorphism::new(a, b, map)?))
        }
    }
}

/// Parses a full document whose field must be `F`.
pub fn parse<F: Field>(text: &str) -> Result<Object<F>> {
    let mut cur = Cursor::new(text);
    let field = parse_header_lines(&mut cur)?;
    if field != F::descriptor() {
        return Err(perr(cur.lines[cur.pos - 1].number, 7, format!("document is over {field}, expected {}", F::descriptor())));
    }
    let kind = parse_kind(&mut cur)?;
    let obj = parse_body_of(&mut cur, kind)?;
    if let Some(l) = cur.peek() {
        return Err(l.err(0, format!("unexpected `{}`", l.head())));
    }
    Ok(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Rational, F7};
    use crate::filtered::{lambda_fc, FilteredMorphism};
    use crate::multicomplex::lambda_mc;
    use crate::paths::lambda;
    use crate::representables::disk;
    use crate::spectral::fixtures;

    fn round_trip<F: Field>(obj: Object<F>) {
        let text = print(&obj);
        let back = parse::<F>(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(print(&back), text);
    }

    #[test]
    fn fixtures_round_trip() {
        round_trip::<F7>(Object::Spectral(lambda(2)));
        round_trip::<F7>(Object::Spectral(disk(1, 1, 1)));
        round_trip::<F7>(Object::Spectral(fixtures::t()));
        round_trip::<F7>(Object::Morphism(fixtures::pi_t()));
        round_trip::<Rational>(Object::Morphism(fixtures::f_into_s()));
        let l = lambda_fc::<F7>(1);
        round_trip(Object::Filtered(l.clone()));
        round_trip(Object::FilteredMorphism(FilteredMorphism::identity(l)));
        let mc = Arc::new(lambda_mc::<F7>(2));
        round_trip(Object::Multicomplex(mc.clone()));
        round_trip(Object::MultiMorphism(MultiMorphism::identity(mc)));
    }

    #[test]
    fn square_zero_violation_names_bidegree() {
        let text = "format 1\nfield Fp:7\nkind spectral-sequence\nstable 1\npage 0\n\
                    module (0,0):1 (0,1):1 (0,2):1\nblock (0,0) 1 1 : 1\nblock (0,1) 1 1 : 1\n\
                    page 1\nmodule\npsi 0\n";
        let err = parse::<F7>(text).unwrap_err().to_string();
        assert!(err.contains("NotSquareZero") && err.contains("(0,0)"), "{err}");
    }

    #[test]
    fn syntax_errors_have_positions() {
        let text = "format 1\nfield Fp:7\nkind spectral-sequence\nstable 0\npage 0\nmodule (0,0:1\n";
        match parse::<F7>(text).unwrap_err() {
            SseqError::Parse { line, column, .. } => assert_eq!((line, column), (6, 8)),
            e => panic!("{e}"),
        }
        let text = "format 1\nfield Q\nkind spectral-sequence\n";
        assert!(matches!(parse::<F7>(text), Err(SseqError::Parse { line: 2, .. })));
    }

    #[test]
    fn transfer_sections_are_accepted() {
        let text = "format 1\nfield Fp:7\nkind spectral-sequence\nstable 1\npage 0\n\
                    module (0,0):1\npage 1\nmodule (0,0):1\ntransfer 0\nblock (0,0) 1 1 : 3\n";
        let Object::Spectral(s) = parse::<F7>(text).unwrap() else { panic!() };
        assert_eq!(s.psi(0).block(Bidegree::ZERO), Matrix::from_i64_rows(&[&[3]]));
        assert_eq!(read_header(text).unwrap().kind, Kind::SpectralSequence);
    }
}
