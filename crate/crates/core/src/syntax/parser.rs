//! Recursive-descent parser for `.mpead` sources.
//!
//! Grammar (whitespace-insensitive, `#` starts a line comment):
//!
//! ```text
//! diagram     := "diagram" IDENT "{" item* "}"
//! item        := popdecl | compdecl | edgedecl | macrodecl | griddecl | repeatdecl
//! popdecl     := "population" IDENT ("{" popattr* "}")?
//! popattr     := "size" "=" INT | "genome" "=" genomespec | "algo" "=" STRING | "label" "=" STRING
//! genomespec  := "bits" "(" INT ")" | "reals" "(" INT ")"
//! compdecl    := "compute" IDENT "{" "fn" "=" STRING ("out" "=" kindlist)? ("label" "=" STRING)? "}"
//! edgedecl    := endpoint arrow (endpoint | "{" endpoint ("," endpoint)* "}") ":" kind ("group" IDENT)?
//! arrow       := "->" | "~>"
//! endpoint    := IDENT ("[" label "]")?
//! label       := binding ("/" IDENT)?
//! binding     := LETTER | INT (".." INT)? | "*"
//! kind        := "geno" | "pheno" | "eval"
//! kindlist    := kind ("," kind)*
//! macrodecl   := "macro" IDENT "{" "members" "=" "[" IDENT ("," IDENT)* "]" "}"
//! griddecl    := "grid" IDENT "{" "rows" "=" INT "cols" "=" INT "template" "=" IDENT
//!                ("adjacency" "=" ("von_neumann"|"moore"))? ("link" "=" kind ("inset")?)? "}"
//! repeatdecl  := "repeat" IDENT "{" "count" "=" INT "template" "=" IDENT boundary* "}"
//! boundary    := "edge" edgedecl
//! ```
//!
//! Attributes inside a block may appear in any order. Errors are collected
//! rather than returned early; the parser resynchronizes at the next item.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::lexer::{tokenize, Tok, Token};
use crate::diag::{has_errors, Diagnostic, SourceSpan};
use crate::ir::*;

const KEYWORDS: [&str; 7] = ["diagram", "population", "compute", "macro", "grid", "repeat", "edge"];
const ITEM_KEYWORDS: [&str; 5] = ["population", "compute", "macro", "grid", "repeat"];

pub const ADJACENCY_RULES: [&str; 2] = ["von_neumann", "moore"];

/// Parses `text`, reporting positions against the file name `<input>`.
pub fn parse(text: &str) -> Result<Diagram, Vec<Diagnostic>> {
    parse_file("<input>", text)
}

/// Like [`parse`] but with a file name for diagnostic spans. Warnings are
/// dropped; use [`parse_with_diagnostics`] to keep them.
pub fn parse_file(file: &str, text: &str) -> Result<Diagram, Vec<Diagnostic>> {
    match parse_with_diagnostics(file, text) {
        (Some(d), _) => Ok(d),
        (None, diags) => Err(diags),
    }
}

/// The diagram is `None` exactly when at least one error was reported.
pub fn parse_with_diagnostics(file: &str, text: &str) -> (Option<Diagram>, Vec<Diagnostic>) {
    let file: Arc<str> = Arc::from(file);
    let (tokens, mut diags) = tokenize(&file, text);
    let mut p = Parser::new(&tokens);
    p.diagram();
    diags.append(&mut p.diags);
    let parts = p.finish(&mut diags);
    if has_errors(&diags) {
        return (None, diags);
    }
    match build_diagram(parts) {
        Ok(d) => (Some(d), diags),
        Err(e) => {
            // finish() already reported every build error
            debug_assert!(false, "unreported build error {e}");
            diags.push(Diagnostic::error("B000", e.to_string(), None));
            (None, diags)
        }
    }
}

type PResult<T> = Result<T, ()>;

enum Targets {
    One(Endpoint, SourceSpan),
    Many(Vec<(Endpoint, SourceSpan)>),
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
    parts: DiagramParts,
    /// Every id mentioned by an edge endpoint, macro member or template.
    refs: Vec<(String, SourceSpan)>,
    decls: Vec<(String, SourceSpan)>,
    explicit_out: HashSet<String>,
    templates: Vec<(String, SourceSpan)>,
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token]) -> Self {
        Parser {
            toks,
            pos: 0,
            diags: Vec::new(),
            parts: DiagramParts::default(),
            refs: Vec::new(),
            decls: Vec::new(),
            explicit_out: HashSet::new(),
            templates: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> &'t Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn error(&mut self, code: &'static str, msg: impl Into<String>, span: SourceSpan) {
        self.diags.push(Diagnostic::error(code, msg, Some(span)));
    }

    fn unexpected(&mut self, expected: &str) {
        let found = self.peek().describe();
        let span = self.span();
        self.error("P001", format!("expected {expected}, found {found}"), span);
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceSpan> {
        if *self.peek() == tok {
            Ok(self.bump().span.clone())
        } else {
            self.unexpected(&tok.describe());
            Err(())
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<SourceSpan> {
        if self.at_word(w) {
            Ok(self.bump().span.clone())
        } else {
            self.unexpected(&format!("`{w}`"));
            Err(())
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                let span = self.span();
                self.error("P003", format!("`{s}` is a keyword and cannot name {what}"), span);
                Err(())
            }
            Tok::Ident(s) => Ok((s, self.bump().span.clone())),
            _ => {
                self.unexpected(what);
                Err(())
            }
        }
    }

    fn int(&mut self, what: &str) -> PResult<(u64, SourceSpan)> {
        match *self.peek() {
            Tok::Int(n) => Ok((n, self.bump().span.clone())),
            _ => {
                self.unexpected(what);
                Err(())
            }
        }
    }

    fn positive(&mut self, what: &str) -> PResult<u32> {
        let (n, span) = self.int(what)?;
        if n == 0 || n > u32::MAX as u64 {
            self.error("P004", format!("{what} must be a positive integer"), span);
            return Err(());
        }
        Ok(n as u32)
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => {
                self.unexpected(what);
                Err(())
            }
        }
    }

    fn kind(&mut self) -> PResult<InfoKind> {
        if let Tok::Ident(s) = self.peek() {
            if let Some(k) = InfoKind::from_keyword(s) {
                self.bump();
                return Ok(k);
            }
        }
        self.unexpected("an information kind (`geno`, `pheno` or `eval`)");
        Err(())
    }

    /// Skips to just past the `}` closing the block we are inside.
    fn skip_block_rest(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            self.bump();
        }
    }

    /// Skips to the next plausible item start at the current nesting level.
    fn synchronize(&mut self, keywords: &[&str], err_line: u32) {
        let mut depth = 0usize;
        loop {
            let line = self.span().start.line;
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace if depth == 0 => return,
                Tok::RBrace => depth -= 1,
                Tok::Ident(s) if depth == 0 && keywords.contains(&s.as_str()) => return,
                Tok::Ident(_)
                    if depth == 0
                        && line > err_line
                        && matches!(self.peek_at(1), Tok::Arrow | Tok::Squiggle | Tok::LBracket) =>
                {
                    return
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn diagram(&mut self) {
        let header = (|| -> PResult<SourceSpan> {
            self.expect_word("diagram")?;
            let (name, _) = self.ident("a diagram name")?;
            self.parts.name = name;
            self.expect(Tok::LBrace)
        })();
        let Ok(open) = header else {
            return;
        };
        self.items(open, &ITEM_KEYWORDS);
        if !self.at_eof() {
            let span = self.span();
            self.error("P005", "unexpected input after the end of the diagram", span);
        }
    }

    /// Parses items up to and including the closing brace of the diagram.
    fn items(&mut self, open: SourceSpan, keywords: &[&str]) {
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return;
                }
                Tok::Eof => {
                    self.error("P002", "unterminated block: missing `}`", open);
                    return;
                }
                _ => {}
            }
            let start = self.pos;
            let line = self.span().start.line;
            if self.item().is_err() {
                self.synchronize(keywords, line);
                if self.pos == start {
                    self.bump();
                }
            }
        }
    }

    fn item(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Ident(k) if k == "population" => self.population(),
            Tok::Ident(k) if k == "compute" => self.computation(),
            Tok::Ident(k) if k == "macro" => self.macro_box(),
            Tok::Ident(k) if k == "grid" => self.grid(),
            Tok::Ident(k) if k == "repeat" => self.repeat(),
            Tok::Ident(_) => {
                let edges = self.edge_statement(None)?;
                self.parts.edges.extend(edges);
                Ok(())
            }
            _ => {
                self.unexpected("a declaration or an edge");
                Err(())
            }
        }
    }

    fn declare(&mut self, id: &str, span: SourceSpan, class: &str) {
        self.decls.push((id.to_string(), span.clone()));
        self.parts.source_map.insert(class, id, span);
    }

    /// Runs `attr` for each attribute until the closing brace. On an attribute
    /// error, skips the rest of the block and reports `Err`.
    fn block(&mut self, mut attr: impl FnMut(&mut Self, String, SourceSpan) -> PResult<()>) -> PResult<()> {
        let open = self.expect(Tok::LBrace)?;
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(());
                }
                Tok::Eof => {
                    self.error("P002", "unterminated block: missing `}`", open);
                    return Err(());
                }
                Tok::Ident(name) => {
                    let span = self.bump().span.clone();
                    if attr(self, name, span).is_err() {
                        self.skip_block_rest();
                        return Err(());
                    }
                }
                _ => {
                    self.unexpected("an attribute name or `}`");
                    self.skip_block_rest();
                    return Err(());
                }
            }
        }
    }

    fn duplicate_attr(&mut self, seen: &mut HashSet<String>, name: &str, span: &SourceSpan) -> PResult<()> {
        if !seen.insert(name.to_string()) {
            self.error("P006", format!("attribute `{name}` given twice"), span.clone());
            return Err(());
        }
        Ok(())
    }

    fn population(&mut self) -> PResult<()> {
        self.bump();
        let (id, span) = self.ident("a population id")?;
        self.declare(&id, span, "node");
        let mut node = PopulationNode::new(id);
        let mut result = Ok(());
        if matches!(self.peek(), Tok::LBrace) {
            let mut seen = HashSet::new();
            result = self.block(|p, name, span| {
                p.duplicate_attr(&mut seen, &name, &span)?;
                match name.as_str() {
                    "size" => {
                        p.expect(Tok::Eq)?;
                        node.size = Some(p.positive("population size")? as usize);
                    }
                    "genome" => {
                        p.expect(Tok::Eq)?;
                        node.genome = Some(p.genome()?);
                    }
                    "algo" => {
                        p.expect(Tok::Eq)?;
                        node.algo = Some(p.string("an algorithm name string")?);
                    }
                    "label" => {
                        p.expect(Tok::Eq)?;
                        node.name = p.string("a label string")?;
                    }
                    other => {
                        p.error("P007", format!("unknown population attribute `{other}`"), span);
                        return Err(());
                    }
                }
                Ok(())
            });
        }
        self.parts.populations.push(node);
        // block errors are already reported and recovered from
        let _ = result;
        Ok(())
    }

    fn genome(&mut self) -> PResult<GenomeSpec> {
        let kind = match self.peek() {
            Tok::Ident(s) if s == "bits" || s == "reals" => s.clone(),
            _ => {
                self.unexpected("`bits(N)` or `reals(N)`");
                return Err(());
            }
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let n = self.positive("genome length")? as usize;
        self.expect(Tok::RParen)?;
        Ok(if kind == "bits" { GenomeSpec::Bits(n) } else { GenomeSpec::Reals(n) })
    }

    fn computation(&mut self) -> PResult<()> {
        let kw = self.bump().span.clone();
        let (id, span) = self.ident("a computation id")?;
        self.declare(&id, span.clone(), "node");
        let mut node = ComputationNode::new(id.clone(), "", []);
        let mut fn_ref = None;
        let mut seen = HashSet::new();
        let ok = self
            .block(|p, name, span| {
                p.duplicate_attr(&mut seen, &name, &span)?;
                p.expect(Tok::Eq)?;
                match name.as_str() {
                    "fn" => fn_ref = Some(p.string("a function name string")?),
                    "out" => {
                        let mut kinds = BTreeSet::from([p.kind()?]);
                        while matches!(p.peek(), Tok::Comma) {
                            p.bump();
                            kinds.insert(p.kind()?);
                        }
                        node.outputs = kinds;
                    }
                    "label" => node.name = p.string("a label string")?,
                    other => {
                        p.error("P007", format!("unknown computation attribute `{other}`"), span);
                        return Err(());
                    }
                }
                Ok(())
            })
            .is_ok();
        match fn_ref {
            Some(f) => node.fn_ref = f,
            None if ok => self.error("P008", format!("computation `{id}` is missing `fn = \"...\"`"), kw.to(&span)),
            None => {}
        }
        if !node.outputs.is_empty() {
            self.explicit_out.insert(id);
        }
        self.parts.computations.push(node);
        Ok(())
    }

    fn macro_box(&mut self) -> PResult<()> {
        self.bump();
        let (id, span) = self.ident("a macro box id")?;
        self.declare(&id, span, "box");
        let open = self.expect(Tok::LBrace)?;
        let members = (|| -> PResult<Vec<String>> {
            self.expect_word("members")?;
            self.expect(Tok::Eq)?;
            self.expect(Tok::LBracket)?;
            let mut members = Vec::new();
            loop {
                let (m, span) = self.ident("a member node id")?;
                self.refs.push((m.clone(), span));
                members.push(m);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBracket => {
                        self.bump();
                        break;
                    }
                    _ => {
                        self.unexpected("`,` or `]`");
                        return Err(());
                    }
                }
            }
            Ok(members)
        })();
        let members = match members {
            Ok(m) => m,
            Err(()) => {
                self.skip_block_rest();
                return Ok(());
            }
        };
        if matches!(self.peek(), Tok::Eof) {
            self.error("P002", "unterminated block: missing `}`", open);
            return Err(());
        }
        if self.expect(Tok::RBrace).is_err() {
            self.skip_block_rest();
        }
        self.parts.macro_boxes.push(MacroBox { id, members });
        Ok(())
    }

    fn template_ref(&mut self) -> PResult<String> {
        let (t, span) = self.ident("a template population id")?;
        self.refs.push((t.clone(), span.clone()));
        self.templates.push((t.clone(), span));
        Ok(t)
    }

    fn grid(&mut self) -> PResult<()> {
        let kw = self.bump().span.clone();
        let (id, span) = self.ident("a grid id")?;
        self.declare(&id, span.clone(), "group");
        let (mut rows, mut cols, mut template) = (None, None, None);
        let mut rule = None;
        let mut link = None;
        let mut seen = HashSet::new();
        let ok = self
            .block(|p, name, span| {
                p.duplicate_attr(&mut seen, &name, &span)?;
                p.expect(Tok::Eq)?;
                match name.as_str() {
                    "rows" => rows = Some(p.positive("rows")?),
                    "cols" => cols = Some(p.positive("cols")?),
                    "template" => template = Some(p.template_ref()?),
                    "adjacency" => {
                        let (r, span) = p.ident("an adjacency rule")?;
                        if !ADJACENCY_RULES.contains(&r.as_str()) {
                            p.error("P009", format!("unknown adjacency `{r}`; expected `von_neumann` or `moore`"), span);
                            return Err(());
                        }
                        rule = Some(r);
                    }
                    "link" => {
                        let kind = p.kind()?;
                        let attachment = if p.at_word("inset") {
                            p.bump();
                            Attachment::Inset
                        } else {
                            Attachment::AtNode
                        };
                        link = Some((kind, attachment));
                    }
                    other => {
                        p.error("P007", format!("unknown grid attribute `{other}`"), span);
                        return Err(());
                    }
                }
                Ok(())
            })
            .is_ok();
        let whole = kw.to(&span);
        match (rows, cols, template) {
            (Some(rows), Some(cols), Some(template)) => {
                let adjacency = link.map(|(link, attachment)| Adjacency {
                    rule: rule.unwrap_or_else(|| "von_neumann".to_string()),
                    link,
                    attachment,
                });
                self.parts.repeat_groups.push(RepeatGroup {
                    id,
                    template: vec![template],
                    shape: RepeatShape::Grid { rows, cols },
                    adjacency,
                    boundary: Vec::new(),
                });
            }
            _ if ok => self.error("P008", "grid needs `rows`, `cols` and `template`", whole),
            _ => {}
        }
        Ok(())
    }

    fn repeat(&mut self) -> PResult<()> {
        let kw = self.bump().span.clone();
        let (id, span) = self.ident("a repeat id")?;
        self.declare(&id, span.clone(), "group");
        let open = self.expect(Tok::LBrace)?;
        let (mut count, mut template) = (None, None);
        let mut boundary = Vec::new();
        let mut seen = HashSet::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    self.error("P002", "unterminated block: missing `}`", open);
                    return Err(());
                }
                Tok::Ident(w) if w == "edge" => {
                    let line = self.bump().span.start.line;
                    match self.edge_statement(Some((&id, boundary.len()))) {
                        Ok(edges) => boundary.extend(edges),
                        Err(()) => self.synchronize(&["edge", "count", "template"], line),
                    }
                }
                Tok::Ident(w) if w == "count" || w == "template" => {
                    let span = self.bump().span.clone();
                    let r = (|| -> PResult<()> {
                        self.duplicate_attr(&mut seen, &w, &span)?;
                        self.expect(Tok::Eq)?;
                        if w == "count" {
                            count = Some(self.positive("repeat count")?);
                        } else {
                            template = Some(self.template_ref()?);
                        }
                        Ok(())
                    })();
                    if r.is_err() {
                        self.synchronize(&["edge", "count", "template"], span.start.line);
                    }
                }
                _ => {
                    let line = self.span().start.line;
                    self.unexpected("`count`, `template`, `edge` or `}`");
                    self.bump();
                    self.synchronize(&["edge", "count", "template"], line);
                }
            }
        }
        match (count, template) {
            (Some(count), Some(template)) => self.parts.repeat_groups.push(RepeatGroup {
                id,
                template: vec![template],
                shape: RepeatShape::Linear { count },
                adjacency: None,
                boundary,
            }),
            _ => self.error("P008", "repeat needs `count` and `template`", kw.to(&span)),
        }
        Ok(())
    }

    fn label(&mut self) -> PResult<EdgeLabel> {
        let binding = match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span.clone();
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) if c.is_ascii_alphabetic() => Binding::IndexVar { letter: c },
                    _ => {
                        self.error("P010", format!("index variable `{s}` must be a single letter"), span);
                        return Err(());
                    }
                }
            }
            Tok::Int(_) => {
                let lo = self.positive("count")?;
                let hi = if matches!(self.peek(), Tok::DotDot) {
                    self.bump();
                    let span = self.span();
                    let hi = self.positive("range end")?;
                    if hi < lo {
                        self.error("P004", format!("range end {hi} is below its start {lo}"), span);
                        return Err(());
                    }
                    hi
                } else {
                    lo
                };
                Binding::Count { lo, hi }
            }
            Tok::Star => {
                self.bump();
                Binding::All
            }
            _ => {
                self.unexpected("an index letter, a count or `*`");
                return Err(());
            }
        };
        let selector = if matches!(self.peek(), Tok::Slash) {
            self.bump();
            Some(self.ident("a selector name")?.0)
        } else {
            None
        };
        Ok(EdgeLabel { binding, selector })
    }

    fn endpoint(&mut self) -> PResult<(Endpoint, SourceSpan)> {
        let (id, span) = self.ident("a node id")?;
        self.refs.push((id.clone(), span.clone()));
        let mut end = Endpoint::new(id);
        if matches!(self.peek(), Tok::LBracket) {
            self.bump();
            end.label = Some(self.label()?);
            self.expect(Tok::RBracket)?;
        }
        let span = span.to(&self.prev_span());
        Ok((end, span))
    }

    /// `boundary` carries the owning repeat id and how many boundary edges it
    /// already has, for id generation.
    fn edge_statement(&mut self, boundary: Option<(&str, usize)>) -> PResult<Vec<Edge>> {
        let (source, source_span) = self.endpoint()?;
        let attachment = match self.peek() {
            Tok::Arrow => Attachment::AtNode,
            Tok::Squiggle => Attachment::Inset,
            _ => {
                self.unexpected("`->` or `~>`");
                return Err(());
            }
        };
        self.bump();
        let targets = if matches!(self.peek(), Tok::LBrace) {
            let open = self.bump().span.clone();
            let mut ends = Vec::new();
            let parsed = (|| -> PResult<()> {
                loop {
                    ends.push(self.endpoint()?);
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RBrace => {
                            self.bump();
                            return Ok(());
                        }
                        Tok::Eof => {
                            self.error("P002", "unterminated block: missing `}`", open.clone());
                            return Err(());
                        }
                        _ => {
                            self.unexpected("`,` or `}`");
                            return Err(());
                        }
                    }
                }
            })();
            if parsed.is_err() {
                self.skip_block_rest();
                return Err(());
            }
            Targets::Many(ends)
        } else {
            let (end, span) = self.endpoint()?;
            Targets::One(end, span)
        };
        self.expect(Tok::Colon)?;
        let kind = self.kind()?;
        // `group NAME` places the edges in a named divergence group, which
        // may also collect edges written in other statements. A node called
        // `group` starting the next statement is followed by an arrow or a
        // label, never by a name.
        let named = if self.at_word("group") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            Some(self.ident("a divergence group")?.0)
        } else {
            None
        };
        let end_span = self.prev_span();

        let (prefix, base) = match boundary {
            Some((group, base)) => (format!("{group}."), base),
            None => (String::new(), self.parts.edges.len()),
        };
        let (targets, group) = match (targets, named) {
            (Targets::One(t, span), name) => (vec![(t, span)], name.map(|n| format!("{prefix}{n}"))),
            (Targets::Many(ts), Some(n)) => (ts, Some(format!("{prefix}{n}"))),
            (Targets::Many(ts), None) => (ts, Some(format!("{prefix}g{base}"))),
        };
        let mut edges = Vec::with_capacity(targets.len());
        for (n, (mut target, tspan)) in targets.into_iter().enumerate() {
            target.attachment = attachment;
            let id = format!("{prefix}e{}", base + n);
            let map = &mut self.parts.source_map;
            map.insert("edge", &id, source_span.to(&end_span));
            if source.label.is_some() {
                map.insert("label", &format!("{id}:source"), source_span.clone());
            }
            if target.label.is_some() {
                map.insert("label", &format!("{id}:target"), tspan);
            }
            edges.push(Edge {
                id,
                source: source.clone(),
                target,
                kind,
                divergence_group: group.clone(),
            });
        }
        Ok(edges)
    }

    fn finish(&mut self, diags: &mut Vec<Diagnostic>) -> DiagramParts {
        let mut parts = std::mem::take(&mut self.parts);

        let all_edges: Vec<&Edge> = parts
            .edges
            .iter()
            .chain(parts.repeat_groups.iter().flat_map(|g| g.boundary.iter()))
            .collect();
        let inferred: Vec<BTreeSet<InfoKind>> = parts
            .computations
            .iter()
            .map(|c| {
                if self.explicit_out.contains(&c.id) {
                    return c.outputs.clone();
                }
                let kinds: BTreeSet<InfoKind> =
                    all_edges.iter().filter(|e| e.source.node == c.id).map(|e| e.kind).collect();
                if kinds.is_empty() {
                    BTreeSet::from([InfoKind::Evaluative])
                } else {
                    kinds
                }
            })
            .collect();
        for (c, kinds) in parts.computations.iter_mut().zip(inferred) {
            c.outputs = kinds;
        }

        let mut seen_decl = HashSet::new();
        for err in check_parts(&parts) {
            let span = match &err {
                BuildError::DuplicateId(id) => {
                    // the second declaration, or the edge for duplicate edge ids
                    self.decls
                        .iter()
                        .filter(|(d, _)| d == id)
                        .nth(1)
                        .map(|(_, s)| s.clone())
                        .or_else(|| parts.source_map.edge(id).cloned())
                }
                other => self.refs.iter().find(|(r, _)| r == other.id()).map(|(_, s)| s.clone()),
            };
            let code = match err {
                BuildError::DuplicateId(_) => "B001",
                BuildError::DanglingReference(_) => "B002",
                BuildError::MultipleBoxes(_) => "B003",
                BuildError::TemplateReused(_) => "B004",
                BuildError::EmptyBox(_) => "B005",
            };
            if seen_decl.insert((code, err.id().to_string(), span.clone())) {
                diags.push(Diagnostic::error(code, err.to_string(), span));
            }
        }
        for (t, span) in &self.templates {
            if parts.computations.iter().any(|c| &c.id == t) {
                diags.push(Diagnostic::error(
                    "B006",
                    format!("template `{t}` must be a population"),
                    Some(span.clone()),
                ));
            }
        }
        parts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(src: &str) -> Diagram {
        parse(src).unwrap_or_else(|d| panic!("{d:#?}"))
    }

    fn codes(src: &str) -> Vec<&'static str> {
        parse(src).unwrap_err().into_iter().map(|d| d.code).collect()
    }

    const FIG2A: &str = r#"
        diagram fig2a {
            population P { size = 50 genome = bits(30) }
            compute F { fn = "onemax" out = eval }
            P[i] -> F : geno
            F -> P[i] : eval
        }
    "#;

    #[test]
    fn fig2a_program() {
        let d = ok(FIG2A);
        assert_eq!(d.name, "fig2a");
        assert_eq!(d.node_count(), 2);
        assert_eq!(d.edges.len(), 2);
        assert_eq!(d.populations[0].size, Some(50));
        assert_eq!(d.populations[0].genome, Some(GenomeSpec::Bits(30)));
        assert_eq!(d.edges[1].target.label, Some(EdgeLabel::index('i')));
        assert_eq!(d.edges[0].kind, InfoKind::Genotypic);
    }

    #[test]
    fn all_with_selector_parses() {
        let d = ok("diagram d { population P compute F { fn = \"f\" } P[*/rand] -> F : geno }");
        let label = d.edges[0].source.label.clone().unwrap();
        assert_eq!(label.binding, Binding::All);
        assert_eq!(label.selector.as_deref(), Some("rand"));
    }

    #[test]
    fn range_with_selector() {
        let d = ok("diagram d { population P compute F { fn = \"f\" } P[1..10/rand] -> F : geno }");
        assert_eq!(
            d.edges[0].source.label,
            Some(EdgeLabel { binding: Binding::Count { lo: 1, hi: 10 }, selector: Some("rand".into()) })
        );
    }

    #[test]
    fn named_groups_span_statements() {
        let d = parse("diagram d { population A population B compute F { fn = \"f\" } F -> A[i] : eval group out F -> B[i] : eval group out F -> A[i] : eval }").unwrap();
        assert_eq!(d.edges[0].divergence_group.as_deref(), Some("out"));
        assert_eq!(d.edges[1].divergence_group.as_deref(), Some("out"));
        assert_eq!(d.edges[2].divergence_group, None);
        // a node called `group` still starts a statement
        let d = parse("diagram d { population A population group A ~> group : geno group ~> A : geno }").unwrap();
        assert_eq!(d.edges.len(), 2);
        assert!(d.edges.iter().all(|e| e.divergence_group.is_none()));
    }

    #[test]
    fn fan_out_creates_one_group() {
        let d = ok("diagram d { population A population B compute F { fn = \"f\" } F -> { A[i], B[j] } : eval }");
        assert_eq!(d.edges.len(), 2);
        assert_eq!(d.edges[0].divergence_group, d.edges[1].divergence_group);
        assert!(d.edges[0].divergence_group.is_some());
    }

    #[test]
    fn inset_arrow() {
        let d = ok("diagram d { population A population B A ~> B : geno }");
        assert_eq!(d.edges[0].target.attachment, Attachment::Inset);
        assert_eq!(d.edges[0].source.attachment, Attachment::AtNode);
    }

    #[test]
    fn grid_and_repeat() {
        let d = ok(r#"diagram d {
            population P
            compute E { fn = "onemax" }
            grid G { rows = 3 cols = 4 template = P adjacency = moore link = geno inset }
            repeat R { count = 5 template = Q
                edge Q -> E : geno
            }
            population Q
        }"#);
        assert_eq!(d.repeat_groups.len(), 2);
        let g = &d.repeat_groups[0];
        assert_eq!(g.shape, RepeatShape::Grid { rows: 3, cols: 4 });
        assert_eq!(g.adjacency.as_ref().unwrap().rule, "moore");
        assert_eq!(g.adjacency.as_ref().unwrap().attachment, Attachment::Inset);
        let r = &d.repeat_groups[1];
        assert_eq!(r.boundary.len(), 1);
        assert_eq!(r.boundary[0].id, "R.e0");
        // out inferred from the boundary edge
        assert_eq!(d.computations[0].outputs, BTreeSet::from([InfoKind::Evaluative]));
    }

    #[test]
    fn inferred_outputs() {
        let d = ok("diagram d { population P compute D { fn = \"decode_binary\" } compute F { fn = \"f\" } D -> F : pheno F -> P[i] : eval P[i] -> D : geno }");
        assert_eq!(d.computations[0].outputs, BTreeSet::from([InfoKind::Phenotypic]));
    }

    #[test]
    fn dangling_and_duplicate() {
        assert_eq!(codes("diagram d { population P P -> X : geno }"), vec!["B002"]);
        assert_eq!(codes("diagram d { population P population P }"), vec!["B001"]);
    }

    #[test]
    fn reports_multiple_errors() {
        let src = "diagram d {\n population P { size = 0 }\n P -> : geno\n compute F { }\n Q $ R\n}";
        let diags = parse(src).unwrap_err();
        let codes: Vec<_> = diags.iter().map(|d| d.code).collect();
        assert!(codes.contains(&"P004"), "{codes:?}");
        assert!(codes.contains(&"P001"), "{codes:?}");
        assert!(codes.contains(&"P008"), "{codes:?}");
        assert!(codes.contains(&"L001"), "{codes:?}");
        assert!(diags.len() >= 4);
    }

    #[test]
    fn unterminated_block() {
        let diags = parse("diagram d {\n population P\n").unwrap_err();
        assert_eq!(diags[0].code, "P002");
        assert_eq!(diags[0].span.as_ref().unwrap().start.line, 1);
    }

    #[test]
    fn keyword_as_id_is_rejected() {
        assert!(codes("diagram d { population compute }").contains(&"P003"));
    }

    #[test]
    fn multi_letter_index_rejected() {
        assert!(codes("diagram d { population P compute F { fn = \"f\" } P[ij] -> F : geno }").contains(&"P010"));
    }

    #[test]
    fn template_must_be_population() {
        assert!(codes("diagram d { compute F { fn = \"f\" } repeat R { count = 3 template = F } }").contains(&"B006"));
    }

    #[test]
    fn spans_are_one_based() {
        let diags = parse("diagram d {\n  population 5\n}").unwrap_err();
        let span = diags[0].span.as_ref().unwrap();
        assert_eq!((span.start.line, span.start.col), (2, 14));
    }
}
