//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! mode 2' a 2 c
//! input qubit 2' 1 0 0 0            # re(H) im(H) re(V) im(V)
//! input qubit a 0.7071067811865476 0 0.7071067811865476 0
//! pbs hv 2' a 2 c                  # in1 in2 out1 out2
//! detect fs c as c
//! on c S do polphase 2 H 180
//! output 2
//! ```
//!
//! Further directives: `input twoqubit m1 m2 <8 reals>`, `input bell m1 m2`,
//! `input chi m1 m2 m3 m4`, `input term re im mode:pol[:count]...`,
//! `rotate mode deg`, `polphase mode H|V deg`, `accept all|passive` and
//! `ideal <gate>`. Several corrections in one `on` line are separated by `;`.
//! Modes must be declared before use; all `input term` lines form a single
//! superposition.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{FockBasisState, Mode, Pol, PolBasis, PolSlot};
use crate::optics::Pbs;

use super::{
    Acceptance, CircuitError, CircuitSpec, DetectorSpec, ElementSpec, FeedForwardRule, Item,
    PolLabel, Preparation, Site, Step, Trigger,
};

/// A diagnostic with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {error}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub error: CircuitError,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    pos: Pos,
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut column = 0;
    for (byte, ch) in line.char_indices() {
        column += 1;
        let boundary = ch.is_whitespace() || ch == ';';
        if boundary {
            if let Some((b, c)) = start.take() {
                tokens.push(Token {
                    text: &line[b..byte],
                    pos: Pos {
                        line: line_no,
                        column: c,
                    },
                });
            }
            if ch == ';' {
                tokens.push(Token {
                    text: &line[byte..byte + 1],
                    pos: Pos {
                        line: line_no,
                        column,
                    },
                });
            }
        } else if start.is_none() {
            start = Some((byte, column));
        }
    }
    if let Some((b, c)) = start {
        tokens.push(Token {
            text: &line[b..],
            pos: Pos {
                line: line_no,
                column: c,
            },
        });
    }
    tokens
}

/// Source positions of each item's fields, parallel to `CircuitSpec`.
#[derive(Default)]
struct Spans {
    modes: Vec<Pos>,
    inputs: Vec<Vec<Pos>>,
    steps: Vec<Vec<Pos>>,
    rules: Vec<Vec<Pos>>,
    outputs: Vec<Pos>,
    ideal: Option<Pos>,
    end: Pos,
}

impl Spans {
    fn locate(&self, site: Site) -> Pos {
        let pick = |v: &Vec<Pos>| v.get(site.field).or(v.first()).copied();
        let found = match site.item {
            Item::Mode(i) => self.modes.get(i).copied(),
            Item::Input(i) => self.inputs.get(i).and_then(pick),
            Item::Step(i) => self.steps.get(i).and_then(pick),
            Item::Rule(i) => self.rules.get(i).and_then(pick),
            Item::Output(i) => self.outputs.get(i).copied(),
            Item::Ideal => self.ideal,
            Item::Document => None,
        };
        found.unwrap_or(self.end)
    }
}

struct Parser {
    spec: CircuitSpec,
    spans: Spans,
    terms_input: Option<usize>,
    saw_accept: bool,
}

type PResult<T> = Result<T, ParseError>;

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        error: CircuitError::Syntax(msg.into()),
    }
}

/// Cursor over the tokens of one line.
struct Line<'a> {
    tokens: Vec<Token<'a>>,
    next: usize,
}

impl<'a> Line<'a> {
    fn end_pos(&self) -> Pos {
        match self.tokens.last() {
            Some(t) => Pos {
                line: t.pos.line,
                column: t.pos.column + t.text.chars().count(),
            },
            None => Pos { line: 1, column: 1 },
        }
    }

    fn take(&mut self, what: &str) -> PResult<Token<'a>> {
        match self.tokens.get(self.next) {
            Some(t) => {
                self.next += 1;
                Ok(*t)
            }
            None => Err(syntax(self.end_pos(), format!("expected {what}"))),
        }
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.next)
    }

    fn done(&self) -> PResult<()> {
        match self.tokens.get(self.next) {
            Some(t) => Err(syntax(t.pos, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Token<'a>> {
        let t = self.take(what)?;
        if t.text == ";" || t.text.contains(':') {
            return Err(syntax(
                t.pos,
                format!("expected {what}, found `{}`", t.text),
            ));
        }
        Ok(t)
    }

    fn number(&mut self, what: &str) -> PResult<f64> {
        let t = self.take(what)?;
        match t.text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(syntax(
                t.pos,
                format!("expected {what}, found `{}`", t.text),
            )),
        }
    }

    fn complex(&mut self) -> PResult<Complex64> {
        let re = self.number("real part")?;
        let im = self.number("imaginary part")?;
        Ok(Complex64::new(re, im))
    }

    fn keyword(&mut self, expected: &str) -> PResult<()> {
        let t = self.take(&format!("`{expected}`"))?;
        if t.text == expected {
            Ok(())
        } else {
            Err(syntax(
                t.pos,
                format!("expected `{expected}`, found `{}`", t.text),
            ))
        }
    }

    fn basis(&mut self) -> PResult<PolBasis> {
        let t = self.take("basis (hv|fs)")?;
        match t.text {
            "hv" => Ok(PolBasis::HV),
            "fs" => Ok(PolBasis::FS),
            other => Err(syntax(
                t.pos,
                format!("expected basis hv or fs, found `{other}`"),
            )),
        }
    }

    fn hv_pol(&mut self) -> PResult<Pol> {
        let t = self.take("polarization (H|V)")?;
        match t.text {
            "H" => Ok(Pol::H),
            "V" => Ok(Pol::V),
            other => Err(syntax(t.pos, format!("expected H or V, found `{other}`"))),
        }
    }

    fn pol_label(&mut self) -> PResult<PolLabel> {
        let t = self.take("polarization (H|V|F|S)")?;
        match t.text {
            "H" => Ok(PolLabel::H),
            "V" => Ok(PolLabel::V),
            "F" => Ok(PolLabel::F),
            "S" => Ok(PolLabel::S),
            other => Err(syntax(
                t.pos,
                format!("expected H, V, F or S, found `{other}`"),
            )),
        }
    }
}

impl Parser {
    fn mode(&self, t: Token<'_>) -> PResult<Mode> {
        let m = Mode::new(t.text);
        if self.spec.modes.contains(&m) {
            Ok(m)
        } else {
            Err(ParseError {
                line: t.pos.line,
                column: t.pos.column,
                error: CircuitError::UndeclaredMode(m),
            })
        }
    }

    fn mode_arg(&self, line: &mut Line<'_>, positions: &mut Vec<Pos>) -> PResult<Mode> {
        let t = line.ident("mode")?;
        positions.push(t.pos);
        self.mode(t)
    }

    fn line(&mut self, mut line: Line<'_>) -> PResult<()> {
        let head = line.take("directive")?;
        match head.text {
            "mode" => {
                let first = line.ident("mode name")?;
                let mut names = vec![first];
                while line.peek().is_some() {
                    names.push(line.ident("mode name")?);
                }
                for t in names {
                    self.spec.modes.push(Mode::new(t.text));
                    self.spans.modes.push(t.pos);
                }
            }
            "input" => self.input(&mut line)?,
            "pbs" => {
                let basis = line.basis()?;
                let mut pos = Vec::new();
                let in1 = self.mode_arg(&mut line, &mut pos)?;
                let in2 = self.mode_arg(&mut line, &mut pos)?;
                let out1 = self.mode_arg(&mut line, &mut pos)?;
                let out2 = self.mode_arg(&mut line, &mut pos)?;
                line.done()?;
                self.push_step(
                    Step::Element(ElementSpec::Pbs(Pbs::new(basis, in1, in2, out1, out2))),
                    pos,
                );
            }
            "rotate" | "polphase" => {
                let mut pos = Vec::new();
                let el = self.correction(head, &mut line, &mut pos)?;
                line.done()?;
                self.push_step(Step::Element(el), pos);
            }
            "detect" => {
                let basis = line.basis()?;
                let mut pos = Vec::new();
                let mode = self.mode_arg(&mut line, &mut pos)?;
                line.keyword("as")?;
                let label = line.ident("detector label")?;
                pos.push(label.pos);
                line.done()?;
                self.push_step(
                    Step::Detect(DetectorSpec {
                        mode,
                        basis,
                        label: label.text.to_string(),
                    }),
                    pos,
                );
            }
            "on" => {
                let label = line.ident("detector label")?;
                let pol_tok = line.peek().map(|t| t.pos).unwrap_or(line.end_pos());
                let pol = line.pol_label()?;
                line.keyword("do")?;
                let mut pos = vec![label.pos, pol_tok];
                let mut corrections = Vec::new();
                loop {
                    let kw = line.take("correction (rotate|polphase)")?;
                    if kw.text != "rotate" && kw.text != "polphase" {
                        return Err(syntax(
                            kw.pos,
                            format!("expected rotate or polphase, found `{}`", kw.text),
                        ));
                    }
                    let mut cpos = Vec::new();
                    corrections.push(self.correction(kw, &mut line, &mut cpos)?);
                    pos.push(cpos[0]);
                    match line.peek() {
                        None => break,
                        Some(t) if t.text == ";" => {
                            line.next += 1;
                        }
                        Some(t) => {
                            return Err(syntax(t.pos, format!("expected `;`, found `{}`", t.text)))
                        }
                    }
                }
                self.spec.rules.push(FeedForwardRule {
                    trigger: Trigger {
                        label: label.text.to_string(),
                        pol,
                    },
                    corrections,
                });
                self.spans.rules.push(pos);
            }
            "output" => {
                let mut pos = Vec::new();
                let first = self.mode_arg(&mut line, &mut pos)?;
                let mut outs = vec![first];
                while line.peek().is_some() {
                    outs.push(self.mode_arg(&mut line, &mut pos)?);
                }
                self.spec.outputs.extend(outs);
                self.spans.outputs.extend(pos);
            }
            "accept" => {
                let t = line.take("acceptance (all|passive)")?;
                if self.saw_accept {
                    return Err(syntax(head.pos, "acceptance given twice"));
                }
                self.spec.acceptance = match t.text {
                    "all" => Acceptance::AllSingles,
                    "passive" => Acceptance::Passive,
                    other => {
                        return Err(syntax(
                            t.pos,
                            format!("expected all or passive, found `{other}`"),
                        ))
                    }
                };
                self.saw_accept = true;
                line.done()?;
            }
            "ideal" => {
                let t = line.ident("gate name")?;
                if self.spec.ideal.is_some() {
                    return Err(syntax(head.pos, "ideal gate given twice"));
                }
                line.done()?;
                self.spec.ideal = Some(t.text.to_string());
                self.spans.ideal = Some(t.pos);
            }
            other => return Err(syntax(head.pos, format!("unknown directive `{other}`"))),
        }
        Ok(())
    }

    fn push_step(&mut self, step: Step, pos: Vec<Pos>) {
        self.spec.steps.push(step);
        self.spans.steps.push(pos);
    }

    fn correction(
        &self,
        kw: Token<'_>,
        line: &mut Line<'_>,
        pos: &mut Vec<Pos>,
    ) -> PResult<ElementSpec> {
        let mode = self.mode_arg(line, pos)?;
        if kw.text == "rotate" {
            let degrees = line.number("angle in degrees")?;
            Ok(ElementSpec::Rotate { mode, degrees })
        } else {
            let pol = line.hv_pol()?;
            let degrees = line.number("phase in degrees")?;
            Ok(ElementSpec::PolPhase { mode, pol, degrees })
        }
    }

    fn input(&mut self, line: &mut Line<'_>) -> PResult<()> {
        let kind = line.take("input kind")?;
        let mut pos = Vec::new();
        let prep = match kind.text {
            "qubit" => {
                let mode = self.mode_arg(line, &mut pos)?;
                let h = line.complex()?;
                let v = line.complex()?;
                Preparation::Qubit { mode, h, v }
            }
            "twoqubit" => {
                let m1 = self.mode_arg(line, &mut pos)?;
                let m2 = self.mode_arg(line, &mut pos)?;
                let mut amps = [Complex64::default(); 4];
                for a in &mut amps {
                    *a = line.complex()?;
                }
                Preparation::TwoQubit {
                    modes: [m1, m2],
                    amps,
                }
            }
            "bell" => {
                let m1 = self.mode_arg(line, &mut pos)?;
                let m2 = self.mode_arg(line, &mut pos)?;
                Preparation::Bell { modes: [m1, m2] }
            }
            "chi" => {
                let mut ms = Vec::with_capacity(4);
                for _ in 0..4 {
                    ms.push(self.mode_arg(line, &mut pos)?);
                }
                let modes: [Mode; 4] = ms.try_into().expect("four modes");
                Preparation::Chi { modes }
            }
            "term" => {
                let amp = line.complex()?;
                let mut counts = Vec::new();
                while let Some(t) = line.peek().copied() {
                    line.next += 1;
                    let (slot, n) = self.term_slot(t)?;
                    pos.push(t.pos);
                    counts.push((slot, n));
                }
                let basis = FockBasisState::from_counts(counts);
                line.done()?;
                match self.terms_input {
                    Some(i) => {
                        if let Preparation::Terms(terms) = &mut self.spec.inputs[i] {
                            terms.push((amp, basis));
                        }
                        self.spans.inputs[i].extend(pos);
                    }
                    None => {
                        self.terms_input = Some(self.spec.inputs.len());
                        self.spec
                            .inputs
                            .push(Preparation::Terms(vec![(amp, basis)]));
                        self.spans.inputs.push(pos);
                    }
                }
                return Ok(());
            }
            other => {
                return Err(syntax(
                    kind.pos,
                    format!("unknown input kind `{other}` (qubit, twoqubit, bell, chi, term)"),
                ))
            }
        };
        line.done()?;
        self.spec.inputs.push(prep);
        self.spans.inputs.push(pos);
        Ok(())
    }

    fn term_slot(&self, t: Token<'_>) -> PResult<(PolSlot, u32)> {
        let bad = || {
            syntax(
                t.pos,
                format!("expected mode:pol[:count], found `{}`", t.text),
            )
        };
        let mut parts = t.text.split(':');
        let mode = parts.next().filter(|s| !s.is_empty()).ok_or_else(bad)?;
        let pol = match parts.next() {
            Some("H") => Pol::H,
            Some("V") => Pol::V,
            _ => return Err(bad()),
        };
        let n = match parts.next() {
            None => 1,
            Some(s) => s
                .parse::<u32>()
                .ok()
                .filter(|&n| n > 0 && n <= 64)
                .ok_or_else(bad)?,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        let mode = self.mode(Token {
            text: mode,
            pos: t.pos,
        })?;
        Ok((PolSlot::new(mode, pol), n))
    }
}

/// Parses and validates a circuit document (UTF-8, LF or CRLF line ends).
pub fn parse_circuit(text: &str) -> Result<CircuitSpec, ParseError> {
    let mut parser = Parser {
        spec: CircuitSpec::default(),
        spans: Spans::default(),
        terms_input: None,
        saw_accept: false,
    };
    let mut line_count = 0;
    for (i, raw) in text.split('\n').enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        line_count = i + 1;
        let tokens = tokenize(raw, i + 1);
        if tokens.is_empty() {
            continue;
        }
        parser.line(Line { tokens, next: 0 })?;
    }
    parser.spans.end = Pos {
        line: line_count.max(1),
        column: 1,
    };
    parser.spec.validate_sites().map_err(|(error, site)| {
        let pos = parser.spans.locate(site);
        ParseError {
            line: pos.line,
            column: pos.column,
            error,
        }
    })?;
    Ok(parser.spec)
}

fn fmt_slot_count(slot: &PolSlot, n: u32) -> String {
    if n == 1 {
        format!("{}:{}", slot.mode, slot.pol)
    } else {
        format!("{}:{}:{n}", slot.mode, slot.pol)
    }
}

fn fmt_complex(c: Complex64) -> String {
    format!("{} {}", c.re, c.im)
}

fn fmt_element(el: &ElementSpec) -> String {
    match el {
        ElementSpec::Pbs(p) => format!("pbs {} {} {} {} {}", p.basis, p.in1, p.in2, p.out1, p.out2),
        ElementSpec::Rotate { mode, degrees } => format!("rotate {mode} {degrees}"),
        ElementSpec::PolPhase { mode, pol, degrees } => {
            format!("polphase {mode} {pol} {degrees}")
        }
    }
}

pub(super) fn pretty_print(spec: &CircuitSpec) -> String {
    let mut out = String::new();
    if !spec.modes.is_empty() {
        let names: Vec<&str> = spec.modes.iter().map(Mode::as_str).collect();
        let _ = writeln!(out, "mode {}", names.join(" "));
    }
    for prep in &spec.inputs {
        match prep {
            Preparation::Qubit { mode, h, v } => {
                let _ = writeln!(
                    out,
                    "input qubit {mode} {} {}",
                    fmt_complex(*h),
                    fmt_complex(*v)
                );
            }
            Preparation::TwoQubit { modes, amps } => {
                let a: Vec<String> = amps.iter().map(|c| fmt_complex(*c)).collect();
                let _ = writeln!(
                    out,
                    "input twoqubit {} {} {}",
                    modes[0],
                    modes[1],
                    a.join(" ")
                );
            }
            Preparation::Bell { modes } => {
                let _ = writeln!(out, "input bell {} {}", modes[0], modes[1]);
            }
            Preparation::Chi { modes } => {
                let _ = writeln!(
                    out,
                    "input chi {} {} {} {}",
                    modes[0], modes[1], modes[2], modes[3]
                );
            }
            Preparation::Terms(terms) => {
                for (amp, basis) in terms {
                    let slots: Vec<String> =
                        basis.iter().map(|(s, n)| fmt_slot_count(s, n)).collect();
                    let _ = writeln!(out, "input term {} {}", fmt_complex(*amp), slots.join(" "));
                }
            }
        }
    }
    for step in &spec.steps {
        match step {
            Step::Element(el) => {
                let _ = writeln!(out, "{}", fmt_element(el));
            }
            Step::Detect(d) => {
                let _ = writeln!(out, "detect {} {} as {}", d.basis, d.mode, d.label);
            }
        }
    }
    for rule in &spec.rules {
        let corr: Vec<String> = rule.corrections.iter().map(fmt_element).collect();
        let _ = writeln!(
            out,
            "on {} {} do {}",
            rule.trigger.label,
            rule.trigger.pol,
            corr.join(" ; ")
        );
    }
    if !spec.outputs.is_empty() {
        let names: Vec<&str> = spec.outputs.iter().map(Mode::as_str).collect();
        let _ = writeln!(out, "output {}", names.join(" "));
    }
    if spec.acceptance == Acceptance::Passive {
        out.push_str("accept passive\n");
    }
    if let Some(name) = &spec.ideal {
        let _ = writeln!(out, "ideal {name}");
    }
    out
}
