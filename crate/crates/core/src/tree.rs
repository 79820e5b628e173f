//! Binary branching networks of stages.
//!
//! Stage `(n, k)` sends its `keep` output to `(n+1, k)` and its `offset`
//! output to `(n+1, k + 2^n)`; at the last level these become output ports
//! `k` and `k + 2^(D-1)`. Port labels are therefore residues mod `2^D`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mode_basis::ModeIndex;
use crate::stage::{stage_transfer, StageKind, StageSpec};

/// Deepest tree [`build_tree`] will construct (255 stages).
pub const MAX_DEPTH: u32 = 8;

/// Where a stage output leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    Stage { n: u32, k: u32 },
    Port(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SorterTree {
    depth: u32,
    kind: StageKind,
    // level-major: stage (n, k) at index 2^n - 1 + k
    stages: Vec<StageSpec>,
}

fn stage_index(n: u32, k: u32) -> usize {
    (1usize << n) - 1 + k as usize
}

fn check_depth(depth: u32) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidDepth {
            depth,
            max: MAX_DEPTH,
        });
    }
    Ok(())
}

/// Error-free OAM sorter of the given depth.
pub fn build_tree(depth: u32) -> Result<SorterTree> {
    SorterTree::new(StageKind::Oam, depth)
}

impl SorterTree {
    pub fn new(kind: StageKind, depth: u32) -> Result<Self> {
        check_depth(depth)?;
        let mut stages = Vec::with_capacity((1usize << depth) - 1);
        for n in 0..depth {
            for k in 0..(1u32 << n) {
                stages.push(StageSpec::new(kind, n, k)?);
            }
        }
        Ok(Self {
            depth,
            kind,
            stages,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn kind(&self) -> StageKind {
        self.kind
    }

    pub fn port_count(&self) -> u32 {
        1 << self.depth
    }

    pub fn port_labels(&self) -> impl Iterator<Item = u32> {
        0..self.port_count()
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// All stages, level by level, residues ascending within a level.
    pub fn stages(&self) -> &[StageSpec] {
        &self.stages
    }

    pub fn stage(&self, n: u32, k: u32) -> Option<&StageSpec> {
        if n >= self.depth || k >= (1 << n) {
            return None;
        }
        self.stages.get(stage_index(n, k))
    }

    /// Replaces the stage at `(spec.n(), spec.k())`.
    pub fn set_stage(&mut self, spec: StageSpec) -> Result<()> {
        if spec.kind() != self.kind {
            return Err(Error::StageKindMismatch);
        }
        let (n, k) = (spec.n(), spec.k());
        if n >= self.depth {
            return Err(Error::NoSuchStage { n, k });
        }
        self.stages[stage_index(n, k)] = spec;
        Ok(())
    }

    pub fn keep_child(&self, n: u32, k: u32) -> Child {
        self.child(n, k)
    }

    pub fn offset_child(&self, n: u32, k: u32) -> Child {
        self.child(n, k + (1 << n))
    }

    fn child(&self, n: u32, residue: u32) -> Child {
        if n + 1 == self.depth {
            Child::Port(residue)
        } else {
            Child::Stage {
                n: n + 1,
                k: residue,
            }
        }
    }

    /// Port an error-free tree sends `label` to: `label mod 2^D`.
    pub fn route_label(&self, label: i64) -> u32 {
        label.rem_euclid(self.port_count() as i64) as u32
    }

    /// Per-port amplitudes for `input` of mode `m`, indexed by port label.
    ///
    /// Both outputs of every stage are followed, so leakage caused by
    /// element errors ends up in the port it physically reaches.
    pub fn port_amplitudes(&self, m: ModeIndex, input: Complex64) -> Vec<Complex64> {
        let mut level = vec![input];
        for n in 0..self.depth {
            let width = 1usize << n;
            let mut next = vec![Complex64::new(0.0, 0.0); 2 * width];
            for (k, &amp) in level.iter().enumerate() {
                let out = stage_transfer(m, &self.stages[stage_index(n, k as u32)], amp);
                next[k] += out.keep_amp;
                next[k + width] += out.offset_amp;
            }
            level = next;
        }
        level
    }
}

/// Port an error-free OAM tree routes OAM index `l` to.
pub fn route(l: i64, tree: &SorterTree) -> u32 {
    tree.route_label(l)
}

/// Complex amplitude at each output port for a unit-amplitude input.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PortDistribution {
    pub entries: BTreeMap<u32, Complex64>,
}

impl PortDistribution {
    pub fn amplitude(&self, port: u32) -> Complex64 {
        self.entries.get(&port).copied().unwrap_or_default()
    }

    pub fn power(&self, port: u32) -> f64 {
        self.amplitude(port).norm_sqr()
    }

    pub fn powers(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&p, a)| (p, a.norm_sqr()))
    }

    pub fn total_power(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    /// Port with the most power (lowest label on ties).
    pub fn bright_port(&self) -> Option<u32> {
        self.powers()
            .fold(None, |best: Option<(u32, f64)>, (p, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((p, w)),
            })
            .map(|(p, _)| p)
    }

    /// Power everywhere except `port`.
    pub fn leakage(&self, port: u32) -> f64 {
        self.powers()
            .filter(|&(p, _)| p != port)
            .map(|(_, w)| w)
            .sum()
    }
}

pub fn simulate_tree(m: ModeIndex, tree: &SorterTree) -> PortDistribution {
    let amps = tree.port_amplitudes(m, Complex64::new(1.0, 0.0));
    PortDistribution {
        entries: amps
            .into_iter()
            .enumerate()
            .map(|(p, a)| (p as u32, a))
            .collect(),
    }
}

/// Final port of a sorter: the OAM residue, plus the mode-order residue
/// when FRFT trees are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortLabel {
    pub oam: u32,
    pub order: Option<u32>,
}

impl fmt::Display for PortLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            Some(order) => write!(f, "{}/{}", self.oam, order),
            None => write!(f, "{}", self.oam),
        }
    }
}

impl std::str::FromStr for PortLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid port label '{s}'"))
        };
        match s.split_once('/') {
            Some((a, b)) => Ok(Self {
                oam: parse(a)?,
                order: Some(parse(b)?),
            }),
            None => Ok(Self {
                oam: parse(s)?,
                order: None,
            }),
        }
    }
}

/// An OAM tree, optionally followed at every OAM port by an FRFT tree that
/// separates modes of equal `l` by their radial order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sorter {
    oam: SorterTree,
    order_trees: Vec<SorterTree>,
}

impl From<SorterTree> for Sorter {
    fn from(oam: SorterTree) -> Self {
        Self {
            oam,
            order_trees: Vec::new(),
        }
    }
}

/// Attaches an error-free FRFT tree of depth `frft_depth` to every port of `tree`.
pub fn append_frft_sorter(tree: SorterTree, frft_depth: u32) -> Result<Sorter> {
    if tree.kind() != StageKind::Oam {
        return Err(Error::StageKindMismatch);
    }
    let template = SorterTree::new(StageKind::Frft, frft_depth)?;
    let order_trees = vec![template; tree.port_count() as usize];
    Ok(Sorter {
        oam: tree,
        order_trees,
    })
}

impl Sorter {
    pub fn oam_tree(&self) -> &SorterTree {
        &self.oam
    }

    pub fn oam_tree_mut(&mut self) -> &mut SorterTree {
        &mut self.oam
    }

    pub fn frft_depth(&self) -> Option<u32> {
        self.order_trees.first().map(SorterTree::depth)
    }

    /// FRFT trees indexed by OAM port; empty without FRFT stages.
    pub fn order_trees(&self) -> &[SorterTree] {
        &self.order_trees
    }

    pub fn order_trees_mut(&mut self) -> &mut [SorterTree] {
        &mut self.order_trees
    }

    pub fn port_labels(&self) -> Vec<PortLabel> {
        match self.frft_depth() {
            None => self
                .oam
                .port_labels()
                .map(|oam| PortLabel { oam, order: None })
                .collect(),
            Some(d) => self
                .oam
                .port_labels()
                .flat_map(|oam| {
                    (0..1u32 << d).map(move |order| PortLabel {
                        oam,
                        order: Some(order),
                    })
                })
                .collect(),
        }
    }

    pub fn route(&self, m: ModeIndex) -> PortLabel {
        let oam = self.oam.route_label(m.l as i64);
        let order = self
            .order_trees
            .get(oam as usize)
            .map(|t| t.route_label(m.order() as i64));
        PortLabel { oam, order }
    }

    pub fn simulate(&self, m: ModeIndex) -> SorterDistribution {
        let oam_amps = self.oam.port_amplitudes(m, Complex64::new(1.0, 0.0));
        let mut entries = BTreeMap::new();
        for (oam, amp) in oam_amps.into_iter().enumerate() {
            let oam = oam as u32;
            match self.order_trees.get(oam as usize) {
                None => {
                    entries.insert(PortLabel { oam, order: None }, amp);
                }
                Some(t) => {
                    for (order, a) in t.port_amplitudes(m, amp).into_iter().enumerate() {
                        entries.insert(
                            PortLabel {
                                oam,
                                order: Some(order as u32),
                            },
                            a,
                        );
                    }
                }
            }
        }
        SorterDistribution { entries }
    }
}

/// Output of a [`Sorter`], keyed by final port label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SorterDistribution {
    pub entries: BTreeMap<PortLabel, Complex64>,
}

impl SorterDistribution {
    pub fn power(&self, port: PortLabel) -> f64 {
        self.entries.get(&port).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn powers(&self) -> impl Iterator<Item = (PortLabel, f64)> + '_ {
        self.entries.iter().map(|(&p, a)| (p, a.norm_sqr()))
    }

    pub fn total_power(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn bright_port(&self) -> Option<PortLabel> {
        self.powers()
            .fold(None, |best: Option<(PortLabel, f64)>, (p, w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((p, w)),
            })
            .map(|(p, _)| p)
    }
}
