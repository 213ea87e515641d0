use serde::Serialize;

use super::{is_composable, sym_source, Path, PathError, Sym};
use crate::model::SeparatedGraph;

/// Normal form of a product of edges and starred edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StandardForm {
    Zero,
    /// Admissible segments in traversal order; consecutive segments meet at
    /// `e^-1 | e` with `|[e]| ≥ 2`.
    Segments(Vec<Path>),
}

impl StandardForm {
    pub fn segment_count(&self) -> usize {
        match self {
            StandardForm::Zero => 0,
            StandardForm::Segments(s) => s.len(),
        }
    }
}

/// One rewrite at position `i` (the pair `w[i], w[i+1]`), if any applies.
/// `Some(None)` means the product vanishes.
pub(crate) fn rewrite_at(g: &SeparatedGraph, w: &[Sym], i: usize) -> Option<Option<Vec<Sym>>> {
    let (a, b) = (w[i], w[i + 1]);
    let delete = || {
        let mut out = w[..i].to_vec();
        out.extend_from_slice(&w[i + 2..]);
        Some(out)
    };
    match (a.inverse, b.inverse) {
        (false, true) if a.edge == b.edge => Some(delete()),
        (false, true) if g.group_of(a.edge) == g.group_of(b.edge) => Some(None),
        (true, false) if a.edge == b.edge && g.group_size(a.edge) == 1 => Some(delete()),
        _ => None,
    }
}

/// Reduces the product `path` (letters in traversal order; `e^-1` stands for
/// `e*`) and splits the result at the junctions that remain.
pub fn standard_form(g: &SeparatedGraph, path: &Path) -> Result<StandardForm, PathError> {
    if let Some(s) = path.syms.iter().find(|s| s.edge >= g.edge_count()) {
        return Err(PathError::UnknownEdge(format!("#{}", s.edge)));
    }
    if !is_composable(g, &path.syms)
        || path
            .syms
            .first()
            .is_some_and(|&s| sym_source(g, s) != path.start)
    {
        return Err(PathError::NotComposable);
    }
    let mut stack: Vec<Sym> = Vec::new();
    for &s in &path.syms {
        stack.push(s);
        let k = stack.len();
        if k >= 2 {
            match rewrite_at(g, &stack, k - 2) {
                Some(None) => return Ok(StandardForm::Zero),
                Some(Some(_)) => {
                    stack.truncate(k - 2);
                }
                None => {}
            }
        }
    }
    let mut segments = Vec::new();
    let mut start = path.start;
    let mut current: Vec<Sym> = Vec::new();
    for s in stack {
        if let Some(&last) = current.last() {
            if last.inverse && !s.inverse && last.edge == s.edge {
                let seg = Path {
                    start,
                    syms: std::mem::take(&mut current),
                };
                start = seg.end(g);
                segments.push(seg);
            }
        }
        current.push(s);
    }
    segments.push(Path {
        start,
        syms: current,
    });
    Ok(StandardForm::Segments(segments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::paths::parse_word;

    fn product(g: &SeparatedGraph, text: &str) -> Path {
        Path::from_word(g, parse_word(g, text).unwrap())
    }

    #[test]
    fn fixture_examples() {
        let k1 = fixtures::k1();
        assert_eq!(
            standard_form(&k1, &product(&k1, "e* f")).unwrap(),
            StandardForm::Zero
        );
        assert_eq!(
            standard_form(&k1, &product(&k1, "e* e")).unwrap(),
            StandardForm::Segments(vec![Path::trivial(0)])
        );
        let f2 = fixtures::f2();
        let p = product(&f2, "e* f");
        assert_eq!(
            standard_form(&f2, &p).unwrap(),
            StandardForm::Segments(vec![p])
        );
    }

    #[test]
    fn junctions_split() {
        let k1 = fixtures::k1();
        let StandardForm::Segments(s) = standard_form(&k1, &product(&k1, "f e e*")).unwrap() else {
            panic!()
        };
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|p| p.is_admissible(&k1)));
        let z = fixtures::z();
        let p = product(&z, "e e*");
        assert_eq!(
            standard_form(&z, &p).unwrap(),
            StandardForm::Segments(vec![Path::trivial(0)])
        );
    }

    #[test]
    fn rejects_gaps() {
        let s5 = fixtures::s5();
        let p = Path {
            start: 0,
            syms: parse_word(&s5, "f2 f1").unwrap(),
        };
        assert_eq!(standard_form(&s5, &p), Err(PathError::NotComposable));
    }

    fn composable_word(g: &SeparatedGraph, picks: &[u8]) -> Vec<Sym> {
        let letters: Vec<Sym> = g
            .edges()
            .flat_map(|e| [Sym::plain(e), Sym::inv(e)])
            .collect();
        let mut word = vec![letters[picks[0] as usize % letters.len()]];
        for &p in &picks[1..] {
            let end = crate::paths::sym_range(g, *word.last().unwrap());
            let next: Vec<Sym> = letters
                .iter()
                .copied()
                .filter(|&s| sym_source(g, s) == end)
                .collect();
            if next.is_empty() {
                break;
            }
            word.push(next[p as usize % next.len()]);
        }
        word
    }

    /// Every normal form reachable by rewriting in any order; `None` is zero.
    fn all_normal_forms(
        g: &SeparatedGraph,
        word: Vec<Sym>,
    ) -> std::collections::BTreeSet<Option<Vec<Sym>>> {
        let mut out = std::collections::BTreeSet::new();
        let mut seen = std::collections::BTreeSet::new();
        let mut todo = vec![word];
        while let Some(w) = todo.pop() {
            if !seen.insert(w.clone()) {
                continue;
            }
            let mut terminal = true;
            for i in 0..w.len().saturating_sub(1) {
                match rewrite_at(g, &w, i) {
                    Some(None) => {
                        terminal = false;
                        out.insert(None);
                    }
                    Some(Some(next)) => {
                        terminal = false;
                        todo.push(next);
                    }
                    None => {}
                }
            }
            if terminal {
                out.insert(Some(w));
            }
        }
        out
    }

    proptest::proptest! {
        #[test]
        fn rewriting_is_confluent(graph in 0usize..8, picks in proptest::collection::vec(proptest::num::u8::ANY, 1..=8)) {
            let g = &fixtures::all()[graph];
            proptest::prop_assume!(g.edge_count() > 0);
            let word = composable_word(g, &picks);
            let path = Path::from_word(g, word.clone());
            let forms = all_normal_forms(g, word);
            proptest::prop_assert_eq!(forms.len(), 1);
            let expected = match standard_form(g, &path).unwrap() {
                StandardForm::Zero => None,
                StandardForm::Segments(s) => Some(s.into_iter().flat_map(|p| p.syms).collect()),
            };
            proptest::prop_assert_eq!(forms.into_iter().next().unwrap(), expected);
        }

        #[test]
        fn segments_are_admissible(graph in 0usize..8, picks in proptest::collection::vec(proptest::num::u8::ANY, 1..=8)) {
            let g = &fixtures::all()[graph];
            proptest::prop_assume!(g.edge_count() > 0);
            let path = Path::from_word(g, composable_word(g, &picks));
            if let StandardForm::Segments(s) = standard_form(g, &path).unwrap() {
                proptest::prop_assert!(s.iter().all(|p| p.is_admissible(g)));
                proptest::prop_assert!(s.windows(2).all(|w| w[0].end(g) == w[1].start));
                if crate::conditions::condition_c(g).holds {
                    proptest::prop_assert!(s.len() <= 2);
                }
            }
        }
    }
}
