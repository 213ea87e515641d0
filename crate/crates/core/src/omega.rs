//! Finite-radius pieces of the configuration space and its partial action.
//!
//! Words are stored in traversal order: a ball rooted at `v` holds reduced
//! admissible paths leaving `v`, and the children of `α` are `α` followed by
//! one more letter.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::SeparatedGraph;
use crate::paths::{
    base_simple_census, choice_report, format_word, is_admissible, is_composable, on_cycle,
    simple_cycles, step_allowed, sym_range, sym_source, trace, word_inverse, word_mul, Automaton,
    BaseSimple, Path, Sym, Word,
};

pub const DEFAULT_BALL_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum OmegaError {
    #[error("more than {cap} balls")]
    CapExceeded { cap: usize },
    #[error("word is not an element of the ball")]
    OutsideDomain,
    #[error("mode precondition violated: {0}")]
    ModePreconditionViolated(String),
}

/// The letters that may follow an element: every edge leaving `vertex` and
/// one distinguished inverse per group at `vertex`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LocalConfiguration {
    pub vertex: usize,
    /// Group index to distinguished member.
    pub choice: BTreeMap<usize, usize>,
}

impl LocalConfiguration {
    pub fn symbols(&self, g: &SeparatedGraph) -> Vec<Sym> {
        g.out_edges(self.vertex)
            .iter()
            .map(|&e| Sym::plain(e))
            .chain(self.choice.values().map(|&x| Sym::inv(x)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Ball {
    pub root: usize,
    pub radius: usize,
    /// The point ball of an isolated vertex.
    pub isolated: bool,
    pub elements: BTreeSet<Word>,
}

fn vertex_after(g: &SeparatedGraph, root: usize, alpha: &[Sym]) -> usize {
    alpha.last().map_or(root, |&s| sym_range(g, s))
}

/// Edges that must be children of `alpha`, and the groups whose
/// distinguished member is still open there.
fn slots(g: &SeparatedGraph, root: usize, alpha: &[Sym]) -> (Vec<Sym>, Vec<usize>) {
    let v = vertex_after(g, root, alpha);
    let back = alpha.last().map(|s| s.flip());
    let forced = g
        .out_edges(v)
        .iter()
        .map(|&e| Sym::plain(e))
        .filter(|&s| Some(s) != back)
        .collect();
    let fixed = match alpha.last() {
        Some(s) if !s.inverse => Some(g.group_of(s.edge)),
        _ => None,
    };
    let free = g
        .groups_at(v)
        .iter()
        .copied()
        .filter(|&x| Some(x) != fixed)
        .collect();
    (forced, free)
}

fn child(alpha: &[Sym], s: Sym) -> Word {
    let mut w = alpha.to_vec();
    w.push(s);
    w
}

/// Words in breadth-first order.
fn by_length(elements: &BTreeSet<Word>) -> Vec<Word> {
    let mut v: Vec<Word> = elements.iter().cloned().collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    v
}

impl Ball {
    pub fn point(v: usize, radius: usize) -> Ball {
        Ball {
            root: v,
            radius,
            isolated: true,
            elements: BTreeSet::from([Vec::new()]),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, alpha: &[Sym]) -> bool {
        self.elements.contains(alpha)
    }

    pub fn vertex_at(&self, g: &SeparatedGraph, alpha: &[Sym]) -> usize {
        vertex_after(g, self.root, alpha)
    }

    /// The local configuration at an interior element.
    pub fn local_configuration(
        &self,
        g: &SeparatedGraph,
        alpha: &[Sym],
    ) -> Option<LocalConfiguration> {
        if self.isolated || alpha.len() >= self.radius || !self.contains(alpha) {
            return None;
        }
        let vertex = self.vertex_at(g, alpha);
        let mut choice = BTreeMap::new();
        for &x in g.groups_at(vertex) {
            let members = &g.group(x).members;
            let chosen = match alpha.last() {
                Some(s) if !s.inverse && g.group_of(s.edge) == x => Some(s.edge),
                _ => members
                    .iter()
                    .copied()
                    .find(|&m| self.contains(&child(alpha, Sym::inv(m)))),
            };
            choice.insert(x, chosen?);
        }
        Some(LocalConfiguration { vertex, choice })
    }

    /// The same configuration seen to a smaller radius.
    pub fn truncate(&self, m: usize) -> Ball {
        let m = m.min(self.radius);
        Ball {
            root: self.root,
            radius: m,
            isolated: self.isolated,
            elements: self
                .elements
                .iter()
                .filter(|w| w.len() <= m)
                .cloned()
                .collect(),
        }
    }

    /// Number of distinct first letters among elements whose last letter is
    /// in `a`.
    pub fn s_count(&self, a: &[Sym]) -> usize {
        self.elements
            .iter()
            .filter(|w| w.last().is_some_and(|s| a.contains(s)))
            .map(|w| w[0])
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Whether this ball is the restriction of `other`.
    pub fn is_truncation_of(&self, other: &Ball) -> bool {
        self.radius <= other.radius && *self == other.truncate(self.radius)
    }

    /// Checks the configuration axioms directly on the element set.
    pub fn check(&self, g: &SeparatedGraph) -> Result<(), String> {
        if !self.elements.contains(&Vec::new()) {
            return Err("the identity is missing".into());
        }
        if self.isolated {
            return if g.is_isolated(self.root) && self.elements.len() == 1 {
                Ok(())
            } else {
                Err("malformed point ball".into())
            };
        }
        if g.is_isolated(self.root) {
            return Err("isolated root without the point convention".into());
        }
        for w in &self.elements {
            if w.len() > self.radius {
                return Err(format!("{} is longer than the radius", format_word(g, w)));
            }
            if let Some(&s) = w.first() {
                if sym_source(g, s) != self.root {
                    return Err(format!("{} does not leave the root", format_word(g, w)));
                }
                if !self.elements.contains(&w[..w.len() - 1]) {
                    return Err(format!("{} has a missing prefix", format_word(g, w)));
                }
            }
            if !is_composable(g, w) || !is_admissible(g, w).unwrap_or(false) {
                return Err(format!("{} is not admissible", format_word(g, w)));
            }
            if w.len() < self.radius {
                let v = self.vertex_at(g, w);
                let mut local: Vec<Sym> = self
                    .elements
                    .iter()
                    .filter(|c| c.len() == w.len() + 1 && c.starts_with(w))
                    .map(|c| *c.last().unwrap())
                    .collect();
                local.extend(w.last().map(|s| s.flip()));
                let plain: BTreeSet<usize> = local
                    .iter()
                    .filter(|s| !s.inverse)
                    .map(|s| s.edge)
                    .collect();
                if plain != g.out_edges(v).iter().copied().collect() {
                    return Err(format!("wrong edges after {}", format_word(g, w)));
                }
                let mut per_group: Vec<usize> = local
                    .iter()
                    .filter(|s| s.inverse)
                    .map(|s| g.group_of(s.edge))
                    .collect();
                per_group.sort_unstable();
                if per_group != g.groups_at(v).to_vec() {
                    return Err(format!("wrong inverse letters after {}", format_word(g, w)));
                }
            }
        }
        Ok(())
    }

    /// Elements listed shortest first, e.g. `{1, e, e^-1}`.
    pub fn display(&self, g: &SeparatedGraph) -> String {
        if self.isolated {
            return format!("{{{}}}", g.vertex_id(self.root));
        }
        let words: Vec<String> = by_length(&self.elements)
            .iter()
            .map(|w| format_word(g, w))
            .collect();
        format!("{{{}}}", words.join(", "))
    }
}

struct Grower<'a> {
    g: &'a SeparatedGraph,
    root: usize,
    radius: usize,
    allow: &'a dyn Fn(&[Sym], usize) -> bool,
    cap: usize,
}

impl Grower<'_> {
    /// Processes elements from `idx` on, branching over every open group.
    fn grow(
        &self,
        elements: &mut Vec<Word>,
        mut idx: usize,
        out: &mut Vec<Ball>,
    ) -> Result<(), OmegaError> {
        let mark = elements.len();
        loop {
            if idx == elements.len() || elements[idx].len() >= self.radius {
                if out.len() >= self.cap {
                    return Err(OmegaError::CapExceeded { cap: self.cap });
                }
                out.push(Ball {
                    root: self.root,
                    radius: self.radius,
                    isolated: false,
                    elements: elements.iter().cloned().collect(),
                });
                break;
            }
            let alpha = elements[idx].clone();
            let (forced, free) = slots(self.g, self.root, &alpha);
            elements.extend(forced.into_iter().map(|s| child(&alpha, s)));
            idx += 1;
            if free.is_empty() {
                continue;
            }
            let options: Vec<Vec<usize>> = free
                .iter()
                .map(|&x| {
                    self.g
                        .group(x)
                        .members
                        .iter()
                        .copied()
                        .filter(|&m| (self.allow)(&alpha, m))
                        .collect()
                })
                .collect();
            let mut tuples = product(&options);
            if tuples.len() == 1 {
                elements.extend(
                    tuples
                        .pop()
                        .unwrap()
                        .into_iter()
                        .map(|m| child(&alpha, Sym::inv(m))),
                );
                continue;
            }
            for tuple in tuples {
                let before = elements.len();
                elements.extend(tuple.into_iter().map(|m| child(&alpha, Sym::inv(m))));
                let r = self.grow(elements, idx, out);
                elements.truncate(before);
                r?;
            }
            break;
        }
        elements.truncate(mark);
        Ok(())
    }
}

fn product(options: &[Vec<usize>]) -> Vec<Vec<usize>> {
    options.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter()
            .flat_map(|prefix| {
                opts.iter().map(move |&o| {
                    let mut p = prefix.clone();
                    p.push(o);
                    p
                })
            })
            .collect()
    })
}

fn grow_from(
    g: &SeparatedGraph,
    root: usize,
    radius: usize,
    start: Vec<Word>,
    idx: usize,
    allow: &dyn Fn(&[Sym], usize) -> bool,
    cap: usize,
) -> Result<Vec<Ball>, OmegaError> {
    let mut out = Vec::new();
    let mut elements = start;
    Grower {
        g,
        root,
        radius,
        allow,
        cap,
    }
    .grow(&mut elements, idx, &mut out)?;
    Ok(out)
}

/// All balls of radius `n` rooted at `v`.
pub fn balls_at(
    g: &SeparatedGraph,
    v: usize,
    n: usize,
    cap: usize,
) -> Result<Vec<Ball>, OmegaError> {
    if g.is_isolated(v) {
        return Ok(vec![Ball::point(v, n)]);
    }
    grow_from(g, v, n, vec![Vec::new()], 0, &|_, _| true, cap)
}

/// All balls of radius `n`, grouped by root in vertex order.
pub fn enumerate_balls(g: &SeparatedGraph, n: usize, cap: usize) -> Result<Vec<Ball>, OmegaError> {
    let mut out = Vec::new();
    for v in g.vertices() {
        let left = cap.saturating_sub(out.len());
        out.extend(balls_at(g, v, n, left).map_err(|_| OmegaError::CapExceeded { cap })?);
    }
    Ok(out)
}

/// The balls of radius one more that restrict to `b`.
pub fn extensions(g: &SeparatedGraph, b: &Ball, cap: usize) -> Result<Vec<Ball>, OmegaError> {
    if b.isolated {
        return Ok(vec![Ball::point(b.root, b.radius + 1)]);
    }
    let ordered = by_length(&b.elements);
    let idx = ordered
        .iter()
        .position(|w| w.len() == b.radius)
        .unwrap_or(ordered.len());
    grow_from(g, b.root, b.radius + 1, ordered, idx, &|_, _| true, cap)
}

/// Number of one-step extensions: one factor `|X|` for every open group at
/// every boundary element.
pub fn extension_count(g: &SeparatedGraph, b: &Ball) -> usize {
    if b.isolated {
        return 1;
    }
    b.elements
        .iter()
        .filter(|w| w.len() == b.radius)
        .map(|w| {
            slots(g, b.root, w)
                .1
                .iter()
                .map(|&x| g.group(x).members.len())
                .product::<usize>()
        })
        .product()
}

/// Translates `b` by `alpha`: the elements `γ·α^-1`, kept up to radius
/// `radius(b) - |α|` and rooted at the end of `alpha`.
pub fn act(g: &SeparatedGraph, alpha: &[Sym], b: &Ball) -> Result<Ball, OmegaError> {
    if !b.contains(alpha) {
        return Err(OmegaError::OutsideDomain);
    }
    if alpha.is_empty() {
        return Ok(b.clone());
    }
    let radius = b.radius - alpha.len();
    let inv = word_inverse(alpha);
    let elements = b
        .elements
        .iter()
        .map(|w| word_mul(w, &inv))
        .filter(|w| w.len() <= radius)
        .collect();
    Ok(Ball {
        root: b.vertex_at(g, alpha),
        radius,
        isolated: false,
        elements,
    })
}

/// Balls at `root` none of whose elements ends in a letter of `forbidden`.
pub fn avoiding_balls(
    g: &SeparatedGraph,
    root: usize,
    forbidden: &[Sym],
    radius: usize,
    cap: usize,
) -> Result<Vec<Ball>, OmegaError> {
    if root >= g.vertex_count() {
        return Err(OmegaError::ModePreconditionViolated(format!(
            "unknown vertex #{root}"
        )));
    }
    if let Some(s) = forbidden
        .iter()
        .find(|s| s.edge >= g.edge_count() || !s.inverse || g.group_size(s.edge) < 2)
    {
        return Err(OmegaError::ModePreconditionViolated(format!(
            "letter #{} must be an inverse edge from a group of size at least 2",
            s.edge
        )));
    }
    if g.is_isolated(root) {
        return Ok(vec![Ball::point(root, radius)]);
    }
    grow_from(
        g,
        root,
        radius,
        vec![Vec::new()],
        0,
        &|_, m| !forbidden.contains(&Sym::inv(m)),
        cap,
    )
}

/// An `α`-periodic configuration `⊔ χ·α^k`, described by its spine: the
/// powers of `α` and, in the first case, the translates of the tail `β`.
/// Off the spine each group takes its least member whose inverse is not
/// avoided.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicConfig {
    pub root: usize,
    pub alpha: Word,
    pub beta: Option<Word>,
    /// 1 when a tail is present, 2 otherwise.
    pub case: u8,
    pub avoided: Vec<Sym>,
    /// The letter set whose s-count separates the configuration from its
    /// translates.
    pub marked: Vec<Sym>,
    /// Spine elements not lying past `α` or past the inverse of its last
    /// letter.
    pub chi: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsolationCertificate {
    pub radius: usize,
    pub center: usize,
    /// Largest s-count among translates by non-powers of `α`.
    pub max_translate: usize,
    pub worst: Option<Word>,
    pub fixed_by_period: bool,
    /// Every branch leaving the spine within one period of the root ends
    /// inside the ball. By periodicity all branches are then finite, the
    /// configuration is finite modulo `α`, and its orbit is a finite, hence
    /// discrete, set.
    pub finite_orbit: bool,
    pub holds: bool,
}

fn is_cycle_word(g: &SeparatedGraph, w: &[Sym]) -> bool {
    if w.is_empty() || w.iter().any(|s| s.edge >= g.edge_count()) {
        return false;
    }
    let mut twice = w.to_vec();
    twice.extend_from_slice(w);
    is_composable(g, &twice) && is_admissible(g, &twice).unwrap_or(false)
}

fn admissible(g: &SeparatedGraph, w: &[Sym]) -> bool {
    is_composable(g, w) && is_admissible(g, w).unwrap_or(false)
}

fn power(alpha: &[Sym], k: i64) -> Word {
    let base = if k < 0 {
        word_inverse(alpha)
    } else {
        alpha.to_vec()
    };
    base.repeat(k.unsigned_abs() as usize)
}

impl PeriodicConfig {
    pub fn new(
        g: &SeparatedGraph,
        alpha: &[Sym],
        beta: Option<&[Sym]>,
    ) -> Result<PeriodicConfig, OmegaError> {
        let bad = |m: &str| Err(OmegaError::ModePreconditionViolated(m.to_string()));
        if !is_cycle_word(g, alpha) {
            return bad("the period is not a cycle");
        }
        let root = sym_source(g, alpha[0]);
        let config = match beta {
            Some(beta) => {
                if beta.is_empty() || beta.iter().any(|s| s.edge >= g.edge_count()) {
                    return bad("the tail is empty or names unknown edges");
                }
                let mut forward = alpha.to_vec();
                forward.extend_from_slice(beta);
                let mut backward = word_inverse(alpha);
                backward.extend_from_slice(beta);
                if !admissible(g, &forward) || !admissible(g, &backward) {
                    return bad("the tail must compose admissibly with the period and its inverse");
                }
                let last = *beta.last().unwrap();
                if !last.inverse || g.group_size(last.edge) < 2 {
                    return bad("the tail must end in x^-1 with |[x]| at least 2");
                }
                let past = |w: &[Sym]| {
                    w.starts_with(alpha) || w.first() == alpha.last().map(|s| s.flip()).as_ref()
                };
                let chi = (0..=beta.len())
                    .map(|k| beta[..k].to_vec())
                    .filter(|w| !past(w))
                    .collect();
                PeriodicConfig {
                    root,
                    alpha: alpha.to_vec(),
                    beta: Some(beta.to_vec()),
                    case: 1,
                    avoided: vec![last],
                    marked: vec![last],
                    chi,
                }
            }
            None => {
                let (first, last) = (alpha[0], *alpha.last().unwrap());
                if !first.inverse
                    || last.inverse
                    || g.group_size(first.edge) < 2
                    || g.group_size(last.edge) < 2
                {
                    return bad("the period must start with x^-1 and end with y, with |[x]|, |[y]| at least 2");
                }
                PeriodicConfig {
                    root,
                    alpha: alpha.to_vec(),
                    beta: None,
                    case: 2,
                    avoided: Vec::new(),
                    marked: vec![first, last.flip()],
                    chi: vec![Vec::new()],
                }
            }
        };
        config.ball(g, config.default_radius())?;
        Ok(config)
    }

    pub fn chi_length(&self) -> usize {
        self.chi.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn default_radius(&self) -> usize {
        2 * self.alpha.len() + self.chi_length() + 2
    }

    /// Spine words up to length `radius`, with their prefixes.
    pub fn spine(&self, radius: usize) -> BTreeSet<Word> {
        let reach = (radius / self.alpha.len() + 2) as i64;
        let mut out = BTreeSet::new();
        for k in -reach..=reach {
            let mut w = power(&self.alpha, k);
            if let Some(beta) = &self.beta {
                w.extend_from_slice(beta);
            }
            for tip in [power(&self.alpha, k), w] {
                for len in 0..=tip.len().min(radius) {
                    out.insert(tip[..len].to_vec());
                }
            }
        }
        out
    }

    /// The configuration restricted to `radius`.
    pub fn ball(&self, g: &SeparatedGraph, radius: usize) -> Result<Ball, OmegaError> {
        let spine = self.spine(radius);
        let mut elements: Vec<Word> = vec![Vec::new()];
        let mut idx = 0;
        while idx < elements.len() && elements[idx].len() < radius {
            let alpha = elements[idx].clone();
            idx += 1;
            let (forced, free) = slots(g, self.root, &alpha);
            elements.extend(forced.into_iter().map(|s| child(&alpha, s)));
            for x in free {
                let members = &g.group(x).members;
                let on_spine: Vec<usize> = members
                    .iter()
                    .copied()
                    .filter(|&m| spine.contains(&child(&alpha, Sym::inv(m))))
                    .collect();
                let chosen = match on_spine.as_slice() {
                    [m] => *m,
                    [] => match members
                        .iter()
                        .copied()
                        .find(|&m| !self.avoided.contains(&Sym::inv(m)))
                    {
                        Some(m) => m,
                        None => {
                            return Err(OmegaError::ModePreconditionViolated(
                                "every member of a group is avoided".into(),
                            ))
                        }
                    },
                    _ => {
                        return Err(OmegaError::ModePreconditionViolated(format!(
                            "the spine picks two members of one group after {}",
                            format_word(g, &alpha)
                        )))
                    }
                };
                elements.push(child(&alpha, Sym::inv(chosen)));
            }
        }
        let ball = Ball {
            root: self.root,
            radius,
            isolated: false,
            elements: elements.into_iter().collect(),
        };
        if let Some(w) = spine.iter().find(|w| !ball.contains(w)) {
            return Err(OmegaError::ModePreconditionViolated(format!(
                "spine word {} is not admissible",
                format_word(g, w)
            )));
        }
        Ok(ball)
    }

    /// Whether `α` and `α^-1` map the ball of radius `radius` onto its own
    /// truncation.
    pub fn fixed_at(&self, g: &SeparatedGraph, radius: usize) -> Result<bool, OmegaError> {
        if radius < self.alpha.len() {
            return Ok(true);
        }
        let b = self.ball(g, radius)?;
        let smaller = b.truncate(radius - self.alpha.len());
        Ok(act(g, &self.alpha, &b)? == smaller
            && act(g, &word_inverse(&self.alpha), &b)? == smaller)
    }

    fn is_power(&self, w: &[Sym]) -> bool {
        let n = self.alpha.len();
        if !w.len().is_multiple_of(n) {
            return false;
        }
        let k = (w.len() / n) as i64;
        w == power(&self.alpha, k) || w == power(&self.alpha, -k)
    }

    /// Compares the s-count of the configuration with that of every
    /// translate by a non-power of `α`, all seen to `radius`. A finite orbit
    /// also certifies isolation.
    pub fn certificate(
        &self,
        g: &SeparatedGraph,
        radius: usize,
    ) -> Result<IsolationCertificate, OmegaError> {
        let b = self.ball(g, radius)?;
        let center = b.s_count(&self.marked);
        let mut max_translate = 0;
        let mut worst = None;
        for (w, c) in translate_s_counts(&b, &self.marked)
            .into_iter()
            .filter(|(w, _)| !self.is_power(w))
        {
            if c > max_translate || worst.is_none() {
                max_translate = max_translate.max(c);
                worst = Some(w);
            }
        }
        let fixed_by_period = self.fixed_at(g, radius)?;
        let spine = self.spine(radius);
        let domain = self.alpha.len() + self.chi_length();
        let attachment = |w: &Word| {
            (0..w.len())
                .find(|&k| !spine.contains(&w[..=k]))
                .unwrap_or(w.len())
        };
        let finite_orbit = radius > domain
            && b.elements
                .iter()
                .filter(|w| w.len() == radius)
                .all(|w| attachment(w) > domain);

        Ok(IsolationCertificate {
            radius,
            center,
            max_translate,
            worst,
            fixed_by_period,
            finite_orbit,
            holds: fixed_by_period && (max_translate < center || finite_orbit),
        })
    }
}

/// `act(w, b).s_count(marked)` for every element `w` of `b`, read off the
/// prefix tree of `b` instead of building each translate.
///
/// An element `γ` meeting `w` in a prefix of length `k` becomes the reduced
/// word `(w[k..])^-1 · γ[k..]`. When `γ` extends `w` its first letter is
/// the letter after `w`; otherwise it is the inverse of the last letter of
/// `w`, and only its existence matters.
fn translate_s_counts(b: &Ball, marked: &[Sym]) -> Vec<(Word, usize)> {
    let words: Vec<&Word> = b.elements.iter().collect();
    let index: BTreeMap<&[Sym], usize> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_slice(), i))
        .collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); words.len()];
    for (i, w) in words.iter().enumerate() {
        if let Some((_, parent)) = w.split_last() {
            children[index[parent]].push(i);
        }
    }
    // Shortest distance from each element down to an element ending in a
    // marked letter (itself included).
    let mut below: Vec<Option<usize>> = vec![None; words.len()];
    for i in (0..words.len()).rev().filter(|&i| !words[i].is_empty()) {
        below[i] = if marked.contains(words[i].last().unwrap()) {
            Some(0)
        } else {
            children[i]
                .iter()
                .filter_map(|&c| below[c])
                .min()
                .map(|d| d + 1)
        };
    }
    let mut out = Vec::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        let reach = b.radius.saturating_sub(w.len());
        let mut firsts: BTreeSet<Sym> = children[i]
            .iter()
            .filter(|&&c| below[c].is_some_and(|d| d < reach))
            .map(|&c| *words[c].last().unwrap())
            .collect();
        let branches = (0..w.len()).any(|k| {
            let up = w.len() - k;
            if up > reach {
                return false;
            }
            let p = index[&w[..k]];
            (marked.contains(&w[k].flip()))
                || children[p]
                    .iter()
                    .any(|&c| words[c][k] != w[k] && below[c].is_some_and(|d| up + 1 + d <= reach))
        });
        if branches {
            firsts.insert(w.last().unwrap().flip());
        }
        out.push(((*w).clone(), firsts.len()));
    }
    out
}

/// A shortest tail for the first case: it can follow both `α` and `α^-1`
/// and ends in `x^-1` with `|[x]| ≥ 2`.
fn find_tail(g: &SeparatedGraph, a: &Automaton, alpha: &[Sym]) -> Option<Word> {
    let after = *alpha.last()?;
    let before = alpha[0].flip();
    let starts: Vec<usize> = (0..a.len())
        .filter(|&i| {
            let s = Sym::from_index(i);
            step_allowed(g, after, s) && step_allowed(g, before, s)
        })
        .collect();
    let parent = a.bfs(&starts, |_| true, false);
    let end = (0..a.len()).find(|&i| {
        let s = Sym::from_index(i);
        parent[i].is_some() && s.inverse && g.group_size(s.edge) >= 2
    })?;
    Some(
        trace(&parent, end)
            .into_iter()
            .map(Sym::from_index)
            .collect(),
    )
}

/// A periodic configuration whose isolation certificate holds at its
/// default radius, built from some cycle carrying two choices. The periods
/// tried are the rotations of the simple cycles and of the cycles the
/// census finds at each vertex, shorter ones first, each in the first case
/// before the second.
pub fn isolated_witness(g: &SeparatedGraph) -> Option<(PeriodicConfig, IsolationCertificate)> {
    if choice_report(g).vertices.iter().all(|v| v.count < 2) {
        return None;
    }
    let a = Automaton::new(g);
    let found = |v: usize| {
        let census = match base_simple_census(g, v) {
            BaseSimple::Zero => Vec::new(),
            BaseSimple::One(c) => vec![c],
            BaseSimple::TwoOrMore(c, d) => vec![c, d],
        };
        simple_cycles(g, v)
            .into_iter()
            .chain(on_cycle(g, v))
            .chain(census)
    };
    let rotations: BTreeSet<(usize, Word)> = g
        .vertices()
        .flat_map(found)
        .flat_map(|c| {
            (0..c.len()).map(move |k| {
                let mut w = c.syms[k..].to_vec();
                w.extend_from_slice(&c.syms[..k]);
                (w.len(), w)
            })
        })
        .collect();
    let cycles: Vec<Path> = rotations
        .into_iter()
        .map(|(_, w)| Path::from_word(g, w))
        .collect();
    let certified = |c: PeriodicConfig| {
        let r = c.default_radius();
        c.certificate(g, r)
            .ok()
            .filter(|cert| cert.holds)
            .map(|cert| (c, cert))
    };
    cycles.iter().find_map(|c| {
        let tail = find_tail(g, &a, &c.syms)
            .and_then(|beta| PeriodicConfig::new(g, &c.syms, Some(&beta)).ok())
            .and_then(certified);
        tail.or_else(|| {
            PeriodicConfig::new(g, &c.syms, None)
                .ok()
                .and_then(certified)
        })
    })
}

/// The unique ball at a vertex without choices.
pub fn fixed_point(g: &SeparatedGraph, vertex: Option<usize>, radius: usize) -> Option<Ball> {
    let report = choice_report(g);
    let v = match vertex {
        Some(v) if v < g.vertex_count() && report.count(v) == 0 => v,
        Some(_) => return None,
        None => g.vertices().find(|&v| report.count(v) == 0)?,
    };
    let mut balls = balls_at(g, v, radius, 2).ok()?;
    (balls.len() == 1).then(|| balls.pop().unwrap())
}

/// A no-choice vertex on a simple cycle, together with its unique ball,
/// which the cycle maps onto itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedBallCertificate {
    pub vertex: usize,
    pub cycle: Path,
    pub ball: Ball,
}

impl FixedBallCertificate {
    pub fn verify(&self, g: &SeparatedGraph) -> bool {
        let r = self.ball.radius;
        let unique = matches!(balls_at(g, self.vertex, r, 2), Ok(b) if b == [self.ball.clone()]);
        let wide = balls_at(g, self.vertex, r + self.cycle.len(), 2);
        let fixed = match wide {
            Ok(b) if b.len() == 1 => act(g, &self.cycle.syms, &b[0]).is_ok_and(|t| t == self.ball),
            _ => false,
        };
        unique && fixed && choice_report(g).count(self.vertex) == 0
    }
}

pub fn fixed_ball_certificate(g: &SeparatedGraph, radius: usize) -> Option<FixedBallCertificate> {
    let report = choice_report(g);
    for v in g.vertices().filter(|&v| report.count(v) == 0) {
        let mut cycles = simple_cycles(g, v);
        if cycles.is_empty() {
            continue;
        }
        cycles.sort_by_key(|c| c.len());
        let Some(ball) = fixed_point(g, Some(v), radius) else {
            continue;
        };
        for cycle in cycles {
            let cert = FixedBallCertificate {
                vertex: v,
                cycle,
                ball: ball.clone(),
            };
            if cert.verify(g) {
                return Some(cert);
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecialMode {
    Avoid {
        root: usize,
        forbidden: Vec<Sym>,
        radius: usize,
    },
    Periodic {
        alpha: Word,
        beta: Option<Word>,
    },
    IsolatedWitness,
    FixedPoint {
        vertex: Option<usize>,
        radius: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SpecialConfiguration {
    Ball(Ball),
    Periodic(PeriodicConfig),
}

pub fn special_configuration(
    g: &SeparatedGraph,
    mode: &SpecialMode,
    cap: usize,
) -> Result<Option<SpecialConfiguration>, OmegaError> {
    Ok(match mode {
        SpecialMode::Avoid {
            root,
            forbidden,
            radius,
        } => avoiding_balls(g, *root, forbidden, *radius, cap)?
            .into_iter()
            .next()
            .map(SpecialConfiguration::Ball),
        SpecialMode::Periodic { alpha, beta } => Some(SpecialConfiguration::Periodic(
            PeriodicConfig::new(g, alpha, beta.as_deref())?,
        )),
        SpecialMode::IsolatedWitness => {
            isolated_witness(g).map(|(p, _)| SpecialConfiguration::Periodic(p))
        }
        SpecialMode::FixedPoint { vertex, radius } => {
            fixed_point(g, *vertex, *radius).map(SpecialConfiguration::Ball)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::RawGraph;
    use crate::paths::parse_word;

    fn words(g: &SeparatedGraph, list: &[&str]) -> BTreeSet<Word> {
        list.iter().map(|w| parse_word(g, w).unwrap()).collect()
    }

    #[test]
    fn z_balls() {
        let z = fixtures::z();
        let b1 = enumerate_balls(&z, 1, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(b1.len(), 1);
        assert_eq!(b1[0].elements, words(&z, &["1", "e", "e^-1"]));
        let b2 = enumerate_balls(&z, 2, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(
            b2[0].elements,
            words(&z, &["1", "e", "e^-1", "e e", "e^-1 e^-1"])
        );
        let e = parse_word(&z, "e").unwrap();
        assert_eq!(act(&z, &e, &b2[0]).unwrap(), b1[0]);
        assert_eq!(act(&z, &[], &b2[0]).unwrap(), b2[0]);
        assert_eq!(b2[0].s_count(&e), 1);
        assert_eq!(b2[0].s_count(&[]), 0);
        let ee = parse_word(&z, "e e e").unwrap();
        assert_eq!(act(&z, &ee, &b2[0]), Err(OmegaError::OutsideDomain));
    }

    #[test]
    fn s5_radius_one_balls() {
        let g = fixtures::s5();
        let balls = enumerate_balls(&g, 1, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(balls.len(), 8);
        let v = g.vertex_index("v").unwrap();
        let at_v: Vec<&Ball> = balls.iter().filter(|b| b.root == v).collect();
        assert_eq!(at_v.len(), 4);
        assert!(at_v.iter().all(|b| b.len() == 3 && b.check(&g).is_ok()));
        for b in &balls {
            assert_eq!(
                extensions(&g, b, DEFAULT_BALL_CAP).unwrap().len(),
                extension_count(&g, b)
            );
        }
    }

    #[test]
    fn isolated_vertex_is_a_point() {
        let g = RawGraph::new("pt").vertex("w").validate().unwrap();
        let balls = enumerate_balls(&g, 3, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(balls, vec![Ball::point(0, 3)]);
        assert_eq!(balls[0].display(&g), "{w}");
    }

    #[test]
    fn cap_is_enforced() {
        let g = fixtures::s5();
        assert_eq!(
            enumerate_balls(&g, 1, 5),
            Err(OmegaError::CapExceeded { cap: 5 })
        );
    }

    #[test]
    fn local_configuration_is_recovered() {
        let g = fixtures::k1();
        for b in enumerate_balls(&g, 2, DEFAULT_BALL_CAP).unwrap() {
            assert!(b.check(&g).is_ok());
            let lc = b.local_configuration(&g, &[]).unwrap();
            assert_eq!(lc.symbols(&g).len(), 3);
        }
    }

    #[test]
    fn l1_avoiding_line() {
        let g = fixtures::l1();
        let u2 = g.vertex_index("u2").unwrap();
        let forbidden = parse_word(&g, "x^-1 y^-1").unwrap();
        let one = avoiding_balls(&g, u2, &forbidden, 1, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].elements, words(&g, &["1", "x'^-1", "y'^-1"]));
        for r in 2..=6 {
            assert_eq!(
                avoiding_balls(&g, u2, &forbidden, r, DEFAULT_BALL_CAP)
                    .unwrap()
                    .len(),
                1
            );
        }
        let bad = parse_word(&g, "x").unwrap();
        assert!(matches!(
            avoiding_balls(&g, u2, &bad, 1, DEFAULT_BALL_CAP),
            Err(OmegaError::ModePreconditionViolated(_))
        ));
    }

    #[test]
    fn l2_periodic() {
        let g = fixtures::l2();
        let alpha = parse_word(&g, "f e").unwrap();
        let beta = parse_word(&g, "x^-1 g").unwrap();
        let p = PeriodicConfig::new(&g, &alpha, Some(&beta)).unwrap();
        assert_eq!(p.case, 1);
        assert_eq!(p.default_radius(), 8);
        let cert = p.certificate(&g, 8).unwrap();
        assert_eq!(cert.center, 3);
        assert!(cert.max_translate <= 2);
        assert!(cert.holds);
        for r in 0..=8 {
            assert!(p.fixed_at(&g, r).unwrap());
            assert!(p.ball(&g, r).unwrap().check(&g).is_ok());
        }
    }

    #[test]
    fn translate_counts_match_the_action() {
        let g = fixtures::l2();
        let p = PeriodicConfig::new(
            &g,
            &parse_word(&g, "f e").unwrap(),
            Some(&parse_word(&g, "x^-1 g").unwrap()),
        )
        .unwrap();
        let mut cases = vec![(g.clone(), p.ball(&g, 8).unwrap(), p.marked.clone())];
        for f in fixtures::all() {
            let letters: Vec<Sym> = f
                .edges()
                .flat_map(|e| [Sym::plain(e), Sym::inv(e)])
                .collect();
            for b in enumerate_balls(&f, 3, DEFAULT_BALL_CAP).unwrap() {
                for marked in [
                    letters.iter().copied().step_by(2).collect(),
                    letters[1..].to_vec(),
                ] {
                    cases.push((f.clone(), b.clone(), marked));
                }
            }
        }
        for (g, b, marked) in cases {
            for (w, c) in translate_s_counts(&b, &marked) {
                assert_eq!(
                    c,
                    act(&g, &w, &b).unwrap().s_count(&marked),
                    "{}",
                    format_word(&g, &w)
                );
            }
        }
    }

    #[test]
    fn isolated_witness_search() {
        assert_eq!(isolated_witness(&fixtures::k1()), None);
        let g = fixtures::l2();
        let (p, cert) = isolated_witness(&g).expect("two choices on the cycle");
        assert!(cert.holds);
        assert_eq!(p.certificate(&g, p.default_radius()).unwrap(), cert);
    }

    #[test]
    fn finite_hairs_keep_the_orbit_finite() {
        let g = crate::document::load(
            "vertex v0 v1 v2 v3
             edge e0 : v0 -> v1 @ x0
             edge e1 : v3 -> v1 @ x0
             edge e2 : v3 -> v2 @ x0
             edge e3 : v0 -> v2 @ x1
             edge e4 : v0 -> v2 @ x1
             edge e5 : v3 -> v2 @ x0",
            false,
        )
        .unwrap();
        let (_, cert) = isolated_witness(&g).unwrap();
        assert!(cert.max_translate >= cert.center);
        assert!(cert.finite_orbit && cert.holds);
    }

    #[test]
    fn fixed_points() {
        let z = fixtures::z();
        let cert = fixed_ball_certificate(&z, 6).unwrap();
        assert!(cert.verify(&z));
        assert_eq!(fixed_point(&fixtures::l1(), None, 2), None);
        assert!(fixed_ball_certificate(&fixtures::k1(), 6).is_none());
    }
}
