//! Line-oriented netlist describing a sorter.
//!
//! ```text
//! # parity sorter with a slightly miscut rotator
//! tree depth=2 frft_depth=1
//! stage kind=oam n=0 k=0 rot_err=0.01
//! stage kind=frft n=0 k=0 phase_err=-0.002
//! ```
//!
//! Exactly one `tree` line is required. Every stage of the tree exists with
//! default settings; `stage` lines override individual stages. An `frft`
//! stage line applies to that stage in every FRFT tree (one hangs off each
//! OAM port). `#` starts a comment that runs to the end of the line.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::stage::{StageKind, StageSpec, MAX_STAGE_EXPONENT};
use crate::tree::{append_frft_sorter, build_tree, Sorter, MAX_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeDecl {
    pub depth: u32,
    pub frft_depth: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageDecl {
    pub kind: StageKind,
    pub n: u32,
    pub k: u32,
    pub rot_err: Option<f64>,
    pub phase_err: Option<f64>,
}

impl StageDecl {
    pub fn to_spec(&self) -> crate::Result<StageSpec> {
        Ok(StageSpec::new(self.kind, self.n, self.k)?
            .with_arm_error(self.rot_err.unwrap_or(0.0))
            .with_phase_error(self.phase_err.unwrap_or(0.0)))
    }
}

/// Parsed netlist. `stages` holds only the explicit declarations, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub tree: TreeDecl,
    pub stages: Vec<StageDecl>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetlistErrorKind {
    // syntax
    #[error("unknown declaration '{0}' (expected 'tree' or 'stage')")]
    UnknownKeyword(String),
    #[error("expected key=value, found '{0}'")]
    ExpectedKeyValue(String),
    #[error("invalid integer '{value}' for {key}")]
    InvalidInteger { key: String, value: String },
    #[error("invalid number '{value}' for {key}")]
    InvalidNumber { key: String, value: String },
    #[error("invalid stage kind '{0}' (expected oam or frft)")]
    InvalidKind(String),
    #[error("{keyword} declaration is missing '{key}'")]
    MissingKey {
        keyword: &'static str,
        key: &'static str,
    },
    #[error("key '{0}' given twice")]
    DuplicateKey(String),

    // semantic
    #[error("unknown key '{key}' for {keyword}")]
    UnknownKey { keyword: &'static str, key: String },
    #[error("k out of range for n (n={n}, k={k}; need k < 2^n)")]
    KOutOfRange { n: u32, k: u32 },
    #[error("n={0} is larger than any supported stage level")]
    LevelTooLarge(u32),
    #[error("duplicate stage kind={kind} n={n} k={k} (first declared on line {first_line})")]
    DuplicateStage {
        kind: &'static str,
        n: u32,
        k: u32,
        first_line: usize,
    },
    #[error("duplicate tree declaration (first declared on line {first_line})")]
    DuplicateTree { first_line: usize },
    #[error("missing tree declaration")]
    MissingTree,
    #[error("{key}={value} outside supported range 1..={max}")]
    DepthOutOfRange {
        key: &'static str,
        value: u32,
        max: u32,
    },
    #[error("stage kind={kind} n={n} lies beyond {key}={depth}")]
    StageBeyondDepth {
        kind: &'static str,
        n: u32,
        key: &'static str,
        depth: u32,
    },
    #[error("frft stage declared but the tree has no frft_depth")]
    FrftWithoutDepth,
}

impl NetlistErrorKind {
    pub fn is_semantic(&self) -> bool {
        !matches!(
            self,
            Self::UnknownKeyword(_)
                | Self::ExpectedKeyValue(_)
                | Self::InvalidInteger { .. }
                | Self::InvalidNumber { .. }
                | Self::InvalidKind(_)
                | Self::MissingKey { .. }
                | Self::DuplicateKey(_)
        )
    }
}

/// Diagnostic with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct NetlistError {
    pub line: usize,
    pub column: usize,
    pub kind: NetlistErrorKind,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

struct Field<'a> {
    value: &'a str,
    column: usize,
}

struct LineParser<'a> {
    line: usize,
    keyword: &'static str,
    keyword_column: usize,
    fields: Vec<(&'a str, Field<'a>)>,
}

impl<'a> LineParser<'a> {
    fn new(
        line: usize,
        keyword: &'static str,
        keyword_column: usize,
        tokens: &[Token<'a>],
        allowed: &[&str],
    ) -> Result<Self, NetlistError> {
        let mut fields: Vec<(&str, Field)> = Vec::new();
        for t in tokens {
            let err = |kind| NetlistError {
                line,
                column: t.column,
                kind,
            };
            let (key, value) = match t.text.split_once('=') {
                Some((k, v)) if !k.is_empty() && !v.is_empty() => (k, v),
                _ => return Err(err(NetlistErrorKind::ExpectedKeyValue(t.text.to_string()))),
            };
            if fields.iter().any(|(k, _)| *k == key) {
                return Err(err(NetlistErrorKind::DuplicateKey(key.to_string())));
            }
            if !allowed.contains(&key) {
                return Err(err(NetlistErrorKind::UnknownKey {
                    keyword,
                    key: key.to_string(),
                }));
            }
            fields.push((
                key,
                Field {
                    value,
                    column: t.column + key.len() + 1,
                },
            ));
        }
        Ok(Self {
            line,
            keyword,
            keyword_column,
            fields,
        })
    }

    fn get(&self, key: &str) -> Option<&Field<'a>> {
        self.fields.iter().find(|(k, _)| *k == key).map(|(_, f)| f)
    }

    fn error(&self, column: usize, kind: NetlistErrorKind) -> NetlistError {
        NetlistError {
            line: self.line,
            column,
            kind,
        }
    }

    fn required(&self, key: &'static str) -> Result<&Field<'a>, NetlistError> {
        self.get(key).ok_or_else(|| {
            self.error(
                self.keyword_column,
                NetlistErrorKind::MissingKey {
                    keyword: self.keyword,
                    key,
                },
            )
        })
    }

    fn integer(&self, key: &'static str, f: &Field<'a>) -> Result<u32, NetlistError> {
        f.value.parse::<u32>().map_err(|_| {
            self.error(
                f.column,
                NetlistErrorKind::InvalidInteger {
                    key: key.to_string(),
                    value: f.value.to_string(),
                },
            )
        })
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>, NetlistError> {
        let Some(f) = self.get(key) else {
            return Ok(None);
        };
        match f.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(self.error(
                f.column,
                NetlistErrorKind::InvalidNumber {
                    key: key.to_string(),
                    value: f.value.to_string(),
                },
            )),
        }
    }
}

struct Located<T> {
    value: T,
    line: usize,
    column: usize,
}

fn parse_tree(p: &LineParser<'_>) -> Result<TreeDecl, NetlistError> {
    let depth_field = p.required("depth")?;
    let depth = p.integer("depth", depth_field)?;
    if depth == 0 || depth > MAX_DEPTH {
        return Err(p.error(
            depth_field.column,
            NetlistErrorKind::DepthOutOfRange {
                key: "depth",
                value: depth,
                max: MAX_DEPTH,
            },
        ));
    }
    let frft_depth = match p.get("frft_depth") {
        None => None,
        Some(f) => {
            let v = p.integer("frft_depth", f)?;
            if v == 0 || v > MAX_DEPTH {
                return Err(p.error(
                    f.column,
                    NetlistErrorKind::DepthOutOfRange {
                        key: "frft_depth",
                        value: v,
                        max: MAX_DEPTH,
                    },
                ));
            }
            Some(v)
        }
    };
    Ok(TreeDecl { depth, frft_depth })
}

fn parse_stage(p: &LineParser<'_>) -> Result<StageDecl, NetlistError> {
    let kind_field = p.required("kind")?;
    let kind = match kind_field.value {
        "oam" => StageKind::Oam,
        "frft" => StageKind::Frft,
        other => {
            return Err(p.error(
                kind_field.column,
                NetlistErrorKind::InvalidKind(other.to_string()),
            ))
        }
    };
    let n_field = p.required("n")?;
    let n = p.integer("n", n_field)?;
    let k_field = p.required("k")?;
    let k = p.integer("k", k_field)?;
    if n > MAX_STAGE_EXPONENT {
        return Err(p.error(n_field.column, NetlistErrorKind::LevelTooLarge(n)));
    }
    if u64::from(k) >= 1u64 << n {
        return Err(p.error(k_field.column, NetlistErrorKind::KOutOfRange { n, k }));
    }
    Ok(StageDecl {
        kind,
        n,
        k,
        rot_err: p.number("rot_err")?,
        phase_err: p.number("phase_err")?,
    })
}

/// Parses netlist text, reporting the first problem with its line and column.
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let mut tree: Option<(TreeDecl, usize)> = None;
    let mut stages: Vec<Located<StageDecl>> = Vec::new();
    let mut seen: HashMap<(&'static str, u32, u32), usize> = HashMap::new();
    let mut line_count = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        line_count = line;
        let content = raw.split_once('#').map_or(raw, |(c, _)| c);
        let tokens = tokenize(content);
        let Some((head, rest)) = tokens.split_first() else {
            continue;
        };
        match head.text {
            "tree" => {
                let p = LineParser::new(line, "tree", head.column, rest, &["depth", "frft_depth"])?;
                let decl = parse_tree(&p)?;
                if let Some((_, first_line)) = tree {
                    return Err(
                        p.error(head.column, NetlistErrorKind::DuplicateTree { first_line })
                    );
                }
                tree = Some((decl, line));
            }
            "stage" => {
                let p = LineParser::new(
                    line,
                    "stage",
                    head.column,
                    rest,
                    &["kind", "n", "k", "rot_err", "phase_err"],
                )?;
                let decl = parse_stage(&p)?;
                let key = (decl.kind.as_str(), decl.n, decl.k);
                if let Some(&first_line) = seen.get(&key) {
                    return Err(p.error(
                        head.column,
                        NetlistErrorKind::DuplicateStage {
                            kind: key.0,
                            n: decl.n,
                            k: decl.k,
                            first_line,
                        },
                    ));
                }
                seen.insert(key, line);
                let column = p.get("n").map_or(head.column, |f| f.column);
                stages.push(Located {
                    value: decl,
                    line,
                    column,
                });
            }
            other => {
                return Err(NetlistError {
                    line,
                    column: head.column,
                    kind: NetlistErrorKind::UnknownKeyword(other.to_string()),
                })
            }
        }
    }

    let Some((decl, _)) = tree else {
        return Err(NetlistError {
            line: line_count + 1,
            column: 1,
            kind: NetlistErrorKind::MissingTree,
        });
    };
    for s in &stages {
        let err = |kind| NetlistError {
            line: s.line,
            column: s.column,
            kind,
        };
        let st = &s.value;
        let (key, depth) = match st.kind {
            StageKind::Oam => ("depth", decl.depth),
            StageKind::Frft => match decl.frft_depth {
                Some(d) => ("frft_depth", d),
                None => return Err(err(NetlistErrorKind::FrftWithoutDepth)),
            },
        };
        if st.n >= depth {
            return Err(err(NetlistErrorKind::StageBeyondDepth {
                kind: st.kind.as_str(),
                n: st.n,
                key,
                depth,
            }));
        }
    }

    Ok(Netlist {
        tree: decl,
        stages: stages.into_iter().map(|s| s.value).collect(),
    })
}

impl Netlist {
    /// Every stage of the described network, level by level, with explicit
    /// declarations replacing the defaults. FRFT stages are listed once.
    pub fn resolved_stages(&self) -> Vec<StageDecl> {
        let mut out = Vec::new();
        let mut fill = |kind: StageKind, depth: u32| {
            for n in 0..depth {
                for k in 0..(1u32 << n) {
                    let explicit = self
                        .stages
                        .iter()
                        .find(|s| s.kind == kind && s.n == n && s.k == k);
                    out.push(explicit.copied().unwrap_or(StageDecl {
                        kind,
                        n,
                        k,
                        rot_err: None,
                        phase_err: None,
                    }));
                }
            }
        };
        fill(StageKind::Oam, self.tree.depth);
        if let Some(d) = self.tree.frft_depth {
            fill(StageKind::Frft, d);
        }
        out
    }

    pub fn build(&self) -> crate::Result<Sorter> {
        let mut oam = build_tree(self.tree.depth)?;
        for s in self.stages.iter().filter(|s| s.kind == StageKind::Oam) {
            oam.set_stage(s.to_spec()?)?;
        }
        let mut sorter = match self.tree.frft_depth {
            Some(d) => append_frft_sorter(oam, d)?,
            None => Sorter::from(oam),
        };
        for s in self.stages.iter().filter(|s| s.kind == StageKind::Frft) {
            let spec = s.to_spec()?;
            for t in sorter.order_trees_mut() {
                t.set_stage(spec)?;
            }
        }
        Ok(sorter)
    }

    /// Canonical text: the tree line, then stages in declaration order.
    /// Comments and spacing are not preserved.
    pub fn format(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write!(out, "tree depth={}", self.tree.depth)?;
        if let Some(d) = self.tree.frft_depth {
            write!(out, " frft_depth={d}")?;
        }
        out.push('\n');
        for s in &self.stages {
            write!(out, "stage kind={} n={} k={}", s.kind.as_str(), s.n, s.k)?;
            if let Some(e) = s.rot_err {
                write!(out, " rot_err={e:?}")?;
            }
            if let Some(e) = s.phase_err {
                write!(out, " phase_err={e:?}")?;
            }
            out.push('\n');
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kind_of(text: &str) -> NetlistErrorKind {
        parse_netlist(text).unwrap_err().kind
    }

    #[test]
    fn minimal_sorter() {
        let n = parse_netlist("tree depth=1\nstage kind=oam n=0 k=0").unwrap();
        assert_eq!(n.tree.depth, 1);
        assert_eq!(n.stages.len(), 1);
        assert_eq!(n.build().unwrap().oam_tree().stage_count(), 1);
    }

    #[test]
    fn k_out_of_range() {
        let e = parse_netlist("stage kind=oam n=1 k=2").unwrap_err();
        assert!(e.to_string().contains("k out of range for n"), "{e}");
        assert!(e.kind.is_semantic());
        assert_eq!((e.line, e.column), (1, 22));
    }

    #[test]
    fn auto_fill() {
        let n = parse_netlist("tree depth=2").unwrap();
        assert!(n.stages.is_empty());
        let pairs: Vec<_> = n.resolved_stages().iter().map(|s| (s.n, s.k)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 0), (1, 1)]);
        let built = n.build().unwrap();
        assert_eq!(*built.oam_tree(), build_tree(2).unwrap());
    }

    #[test]
    fn overrides_reach_the_tree() {
        let n = parse_netlist(
            "tree depth=2 frft_depth=1\nstage kind=oam n=1 k=1 rot_err=0.25\nstage kind=frft n=0 k=0 phase_err=-1e-3\n",
        )
        .unwrap();
        let s = n.build().unwrap();
        assert_eq!(s.oam_tree().stage(1, 1).unwrap().arm_error(), 0.25);
        assert_eq!(s.oam_tree().stage(1, 0).unwrap().arm_error(), 0.0);
        assert_eq!(s.order_trees().len(), 4);
        for t in s.order_trees() {
            assert_eq!(t.stage(0, 0).unwrap().phase_error(), -1e-3);
        }
        let resolved = n.resolved_stages();
        assert_eq!(resolved.len(), 4);
        assert_eq!(resolved[2].rot_err, Some(0.25));
    }

    #[test]
    fn comments_and_blank_lines() {
        let n = parse_netlist("# header\n\n  tree depth=3   # trailing\n\t\n").unwrap();
        assert_eq!(
            n.tree,
            TreeDecl {
                depth: 3,
                frft_depth: None
            }
        );
    }

    #[test]
    fn diagnostics() {
        use NetlistErrorKind::*;
        assert!(matches!(
            kind_of("tree depth=1\nwire a=b"),
            UnknownKeyword(_)
        ));
        assert!(matches!(kind_of("tree depth"), ExpectedKeyValue(_)));
        assert!(matches!(kind_of("tree depth="), ExpectedKeyValue(_)));
        assert!(matches!(kind_of("tree depth=two"), InvalidInteger { .. }));
        assert!(matches!(kind_of("tree depth=-1"), InvalidInteger { .. }));
        assert!(matches!(kind_of("tree depth=0"), DepthOutOfRange { .. }));
        assert!(matches!(kind_of("tree depth=9"), DepthOutOfRange { .. }));
        assert!(matches!(
            kind_of("tree depth=2 frft_depth=0"),
            DepthOutOfRange { .. }
        ));
        assert!(matches!(kind_of("tree depth=2 depth=3"), DuplicateKey(_)));
        assert!(matches!(kind_of("tree depth=2 width=3"), UnknownKey { .. }));
        assert!(matches!(
            kind_of("tree frft_depth=2"),
            MissingKey { key: "depth", .. }
        ));
        assert!(matches!(
            kind_of("tree depth=1\ntree depth=2"),
            DuplicateTree { first_line: 1 }
        ));
        assert!(matches!(kind_of(""), MissingTree));
        assert!(matches!(kind_of("stage kind=oam n=0 k=0"), MissingTree));
        assert!(matches!(
            kind_of("tree depth=1\nstage kind=hg n=0 k=0"),
            InvalidKind(_)
        ));
        assert!(matches!(
            kind_of("tree depth=1\nstage kind=oam k=0"),
            MissingKey { key: "n", .. }
        ));
        assert!(matches!(
            kind_of("tree depth=1\nstage kind=oam n=0 k=0 rot_err=abc"),
            InvalidNumber { .. }
        ));
        assert!(matches!(
            kind_of("tree depth=1\nstage kind=oam n=0 k=0 rot_err=NaN"),
            InvalidNumber { .. }
        ));
        assert!(matches!(
            kind_of("tree depth=2\nstage kind=oam n=1 k=1\nstage kind=oam n=1 k=1"),
            DuplicateStage { first_line: 2, .. }
        ));
        assert!(matches!(
            kind_of("tree depth=2\nstage kind=oam n=2 k=1"),
            StageBeyondDepth { .. }
        ));
        assert!(matches!(
            kind_of("tree depth=2\nstage kind=frft n=0 k=0"),
            FrftWithoutDepth
        ));
        assert!(matches!(
            kind_of("tree depth=2\nstage kind=oam n=40 k=0"),
            LevelTooLarge(40)
        ));
    }

    #[test]
    fn diagnostic_positions() {
        let e = parse_netlist("tree depth=2\n  stage kind=oam n=0 k=0 gain=2").unwrap_err();
        assert_eq!((e.line, e.column), (2, 26));
        assert_eq!(
            e.to_string(),
            "line 2, column 26: unknown key 'gain' for stage"
        );
        let e = parse_netlist("tree depth=x").unwrap_err();
        assert_eq!((e.line, e.column), (1, 12));
    }

    #[test]
    fn same_level_different_kinds_are_distinct() {
        let n = parse_netlist(
            "tree depth=1 frft_depth=1\nstage kind=oam n=0 k=0\nstage kind=frft n=0 k=0",
        )
        .unwrap();
        assert_eq!(n.stages.len(), 2);
    }

    fn netlist_strategy() -> impl Strategy<Value = Netlist> {
        (1u32..=MAX_DEPTH, proptest::option::of(1u32..=4)).prop_flat_map(|(depth, frft)| {
            let stage = (
                proptest::bool::ANY,
                0u32..8,
                0u32..256,
                proptest::option::of(-1.0..1.0f64),
                proptest::option::of(-1.0..1.0f64),
            );
            proptest::collection::vec(stage, 0..12).prop_map(move |raw| {
                let mut stages: Vec<StageDecl> = Vec::new();
                for (is_frft, n_seed, k_seed, rot_err, phase_err) in raw {
                    let (kind, d) = match (is_frft, frft) {
                        (true, Some(f)) => (StageKind::Frft, f),
                        _ => (StageKind::Oam, depth),
                    };
                    let n = n_seed % d;
                    let k = k_seed % (1 << n);
                    if stages
                        .iter()
                        .any(|s| s.kind == kind && s.n == n && s.k == k)
                    {
                        continue;
                    }
                    stages.push(StageDecl {
                        kind,
                        n,
                        k,
                        rot_err,
                        phase_err,
                    });
                }
                Netlist {
                    tree: TreeDecl {
                        depth,
                        frft_depth: frft,
                    },
                    stages,
                }
            })
        })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(n in netlist_strategy()) {
            let text = n.format();
            let back = parse_netlist(&text).unwrap();
            prop_assert_eq!(&back, &n);
            prop_assert_eq!(back.format(), text);
            prop_assert!(n.build().is_ok());
        }

        #[test]
        fn parser_never_panics(text in "[a-z=0-9 #.\\-\n]{0,80}") {
            let _ = parse_netlist(&text);
        }
    }
}
