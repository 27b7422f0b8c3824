//! The fixed graph `H`: its colours, adjacency (loops allowed) and the
//! structural queries the chains and couplings depend on.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Colour index, `0..q`.
pub type Colour = u8;

/// Largest supported number of colours.
pub const MAX_COLOURS: usize = Colour::MAX as usize;

/// Immutable undirected graph on colours `0..q`.
#[derive(Clone, PartialEq, Eq)]
pub struct ColourGraph {
    q: usize,
    adj: Vec<bool>,
    neighbours: Vec<Vec<Colour>>,
    name: Option<String>,
}

/// Two-colouring of a bipartite `H`, or a witness that none exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Bipartition {
    /// `class_of[c]` is 1 or 2; colour 0 is always in class 1.
    Bipartite { class_of: Vec<u8> },
    /// An odd closed walk `w0, w1, ..., wk = w0`.
    NonBipartite { witness: Vec<Colour> },
}

impl Bipartition {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartition::Bipartite { .. })
    }

    pub fn class_of(&self, c: Colour) -> Option<u8> {
        match self {
            Bipartition::Bipartite { class_of } => Some(class_of[c as usize]),
            Bipartition::NonBipartite { .. } => None,
        }
    }

    /// Colours of class 1 and class 2.
    pub fn classes(&self) -> Option<(Vec<Colour>, Vec<Colour>)> {
        match self {
            Bipartition::Bipartite { class_of } => {
                let pick = |k: u8| (0..class_of.len()).filter(|&c| class_of[c] == k).map(|c| c as Colour).collect();
                Some((pick(1), pick(2)))
            }
            Bipartition::NonBipartite { .. } => None,
        }
    }
}

#[derive(Deserialize)]
struct JsonGraph {
    q: usize,
    edges: Vec<[usize; 2]>,
}

impl ColourGraph {
    /// Build from an undirected edge list. Duplicate edges are idempotent.
    pub fn new(q: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        if q > MAX_COLOURS {
            return Err(Error::InvalidParameter(format!("q = {q} exceeds the supported maximum of {MAX_COLOURS}")));
        }
        let mut adj = vec![false; q * q];
        for &(i, j) in edges {
            for index in [i, j] {
                if index >= q {
                    return Err(Error::ColourIndex { line: 0, index, q });
                }
            }
            adj[i * q + j] = true;
            adj[j * q + i] = true;
        }
        Self::from_adjacency(q, adj)
    }

    fn from_adjacency(q: usize, adj: Vec<bool>) -> Result<Self> {
        if !adj.iter().any(|&a| a) {
            return Err(Error::EmptyGraph);
        }
        let neighbours: Vec<Vec<Colour>> =
            (0..q).map(|c| (0..q).filter(|&d| adj[c * q + d]).map(|d| d as Colour).collect()).collect();
        let g = ColourGraph { q, adj, neighbours, name: None };
        if let Some(unreachable) = g.first_unreachable() {
            return Err(Error::DisconnectedGraph { unreachable });
        }
        Ok(g)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Parse the line-oriented graph format, or its JSON equivalent
    /// `{"q": int, "edges": [[i, j], ...]}`.
    pub fn load(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let parsed: JsonGraph = serde_json::from_str(text)?;
            let edges: Vec<(usize, usize)> = parsed.edges.iter().map(|e| (e[0], e[1])).collect();
            return Self::new(parsed.q, &edges);
        }

        let mut q: Option<usize> = None;
        let mut adj: Vec<bool> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let raw = raw.trim();
            if raw.starts_with('#') {
                continue;
            }
            for stmt in raw.split(';') {
                let toks: Vec<&str> = stmt.split_whitespace().collect();
                if toks.is_empty() {
                    continue;
                }
                match (toks[0], q) {
                    ("q", None) => {
                        if toks.len() != 2 {
                            return Err(parse_err(line_no, "expected `q <integer>`"));
                        }
                        let value: usize =
                            toks[1].parse().map_err(|_| parse_err(line_no, "q is not a non-negative integer"))?;
                        if value == 0 || value > MAX_COLOURS {
                            return Err(parse_err(line_no, "q must be in 1..=255"));
                        }
                        q = Some(value);
                        adj = vec![false; value * value];
                    }
                    ("q", Some(_)) => return Err(parse_err(line_no, "duplicate `q` line")),
                    ("edge", None) => return Err(parse_err(line_no, "`edge` before the `q` line")),
                    ("edge", Some(qv)) => {
                        if toks.len() != 3 {
                            return Err(parse_err(line_no, "expected `edge <i> <j>`"));
                        }
                        let mut ends = [0usize; 2];
                        for (slot, tok) in ends.iter_mut().zip(&toks[1..]) {
                            *slot = tok
                                .parse()
                                .map_err(|_| parse_err(line_no, "edge endpoint is not a non-negative integer"))?;
                            if *slot >= qv {
                                return Err(Error::ColourIndex { line: line_no, index: *slot, q: qv });
                            }
                        }
                        adj[ends[0] * qv + ends[1]] = true;
                        adj[ends[1] * qv + ends[0]] = true;
                    }
                    (other, _) => return Err(parse_err(line_no, &format!("unknown directive `{other}`"))),
                }
            }
        }
        let q = q.ok_or_else(|| parse_err(0, "missing `q <integer>` line"))?;
        Self::from_adjacency(q, adj)
    }

    /// Built-in graphs: `clique(q)`, `independent_set`, `widom_rowlinson(q)`,
    /// `beach`, `path(q)`.
    ///
    /// `widom_rowlinson(q)` has the empty colour 0 and particles `1..=q`, with
    /// loops everywhere and the empty colour adjacent to every particle.
    /// `beach` uses four colours: loops and full adjacency inside `{0, 1}` and
    /// inside `{2, 3}`, plus the bridge edge `(1, 2)`. Both follow the usual
    /// literature definitions of these models.
    pub fn builtin(name: &str, q: Option<usize>) -> Result<Self> {
        let need_q = |min: usize| -> Result<usize> {
            let q = q.ok_or_else(|| Error::InvalidParameter(format!("built-in `{name}` needs q")))?;
            if q < min {
                return Err(Error::InvalidParameter(format!("built-in `{name}` needs q >= {min}, got {q}")));
            }
            Ok(q)
        };
        let (label, g) = match name {
            "clique" => {
                let q = need_q(2)?;
                let mut edges = Vec::new();
                for i in 0..q {
                    for j in i + 1..q {
                        edges.push((i, j));
                    }
                }
                (format!("clique({q})"), Self::new(q, &edges)?)
            }
            "independent_set" => ("independent_set".to_string(), Self::new(2, &[(0, 0), (0, 1)])?),
            "widom_rowlinson" => {
                let q = need_q(1)?;
                let mut edges = vec![(0, 0)];
                for i in 1..=q {
                    edges.push((0, i));
                    edges.push((i, i));
                }
                (format!("widom_rowlinson({q})"), Self::new(q + 1, &edges)?)
            }
            "beach" => ("beach".to_string(), Self::new(4, &[(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3), (1, 2)])?),
            "path" => {
                let q = need_q(2)?;
                let edges: Vec<(usize, usize)> = (0..q - 1).map(|i| (i, i + 1)).collect();
                (format!("path({q})"), Self::new(q, &edges)?)
            }
            other => return Err(Error::UnknownBuiltin(other.to_string())),
        };
        Ok(g.with_name(label))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    #[inline]
    pub fn adjacent(&self, c: Colour, d: Colour) -> bool {
        self.adj[c as usize * self.q + d as usize]
    }

    pub fn neighbours(&self, c: Colour) -> &[Colour] {
        &self.neighbours[c as usize]
    }

    pub fn colours(&self) -> impl DoubleEndedIterator<Item = Colour> + ExactSizeIterator {
        (0..self.q).map(|c| c as Colour)
    }

    /// Sorted unordered edge list, loops included.
    pub fn edges(&self) -> Vec<(Colour, Colour)> {
        let mut out = Vec::new();
        for c in self.colours() {
            for &d in self.neighbours(c) {
                if c <= d {
                    out.push((c, d));
                }
            }
        }
        out
    }

    /// Largest neighbour-set size. A loop puts the colour in its own
    /// neighbour set once.
    pub fn max_degree(&self) -> usize {
        self.neighbours.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn first_unreachable(&self) -> Option<Colour> {
        let dist = self.bfs_distances(0);
        dist.iter().position(Option::is_none).map(|c| c as Colour)
    }

    fn bfs_distances(&self, from: Colour) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.q];
        dist[from as usize] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let dc = dist[c as usize].unwrap();
            for &d in self.neighbours(c) {
                if dist[d as usize].is_none() {
                    dist[d as usize] = Some(dc + 1);
                    queue.push_back(d);
                }
            }
        }
        dist
    }

    /// Two-colour `H` by BFS from colour 0, or return an odd closed walk.
    pub fn colour_classes(&self) -> Bipartition {
        let q = self.q;
        let mut parent: Vec<Option<Colour>> = vec![None; q];
        let mut level: Vec<Option<usize>> = vec![None; q];
        level[0] = Some(0);
        let mut queue = VecDeque::from([0 as Colour]);
        while let Some(c) = queue.pop_front() {
            for &d in self.neighbours(c) {
                if level[d as usize].is_none() {
                    level[d as usize] = Some(level[c as usize].unwrap() + 1);
                    parent[d as usize] = Some(c);
                    queue.push_back(d);
                }
            }
        }
        let root_path = |mut c: Colour| {
            let mut path = vec![c];
            while let Some(p) = parent[c as usize] {
                path.push(p);
                c = p;
            }
            path.reverse();
            path
        };
        for c in self.colours() {
            for &d in self.neighbours(c) {
                if c <= d && level[c as usize].unwrap() % 2 == level[d as usize].unwrap() % 2 {
                    // root -> c, edge c-d, d -> root has odd length
                    let mut walk = root_path(c);
                    let mut back = root_path(d);
                    back.reverse();
                    walk.extend(back);
                    return Bipartition::NonBipartite { witness: walk };
                }
            }
        }
        let class_of = level.iter().map(|l| if l.unwrap() % 2 == 0 { 1 } else { 2 }).collect();
        Bipartition::Bipartite { class_of }
    }

    /// First pair `(c1, c2)`, `c1 <= c2`, with no common neighbour.
    pub fn two_path_witness(&self) -> Option<(Colour, Colour)> {
        for c1 in self.colours() {
            for c2 in c1..self.q as Colour {
                if !self.neighbours(c1).iter().any(|&m| self.adjacent(m, c2)) {
                    return Some((c1, c2));
                }
            }
        }
        None
    }

    /// Every pair of colours (equal colours included) is joined by a 2-edge path.
    pub fn has_all_two_paths(&self) -> bool {
        self.two_path_witness().is_none()
    }

    /// Walk of exactly `len` edges from `from` to `to`.
    ///
    /// The base walk is a BFS-shortest walk of the right parity (BFS on
    /// colour x parity, lowest colour index first); it is padded to `len` by
    /// going back and forth on its final edge.
    pub fn walk_of_length(&self, from: Colour, to: Colour, len: usize) -> Result<Vec<Colour>> {
        let no_walk = || Error::NoWalk { from, to, len };
        let q = self.q;
        let want = len % 2;
        let idx = |c: Colour, p: usize| c as usize * 2 + p;
        let mut prev: Vec<Option<(Colour, usize)>> = vec![None; q * 2];
        let mut seen = vec![false; q * 2];
        seen[idx(from, 0)] = true;
        let mut queue = VecDeque::from([(from, 0usize)]);
        while let Some((c, p)) = queue.pop_front() {
            if c == to && p == want {
                break;
            }
            for &d in self.neighbours(c) {
                let np = 1 - p;
                if !seen[idx(d, np)] {
                    seen[idx(d, np)] = true;
                    prev[idx(d, np)] = Some((c, p));
                    queue.push_back((d, np));
                }
            }
        }
        if !seen[idx(to, want)] {
            return Err(no_walk());
        }
        let mut walk = vec![to];
        let mut cur = (to, want);
        while let Some(p) = prev[idx(cur.0, cur.1)] {
            walk.push(p.0);
            cur = p;
        }
        walk.reverse();
        if walk.len() - 1 > len {
            return Err(no_walk());
        }
        if walk.len() == 1 && len > 0 {
            // even-length return to the start: step out to the lowest neighbour and back
            let out = *self.neighbours(from).first().ok_or_else(no_walk)?;
            walk.push(out);
            walk.push(from);
        }
        while walk.len() - 1 < len {
            let k = walk.len();
            walk.push(walk[k - 2]);
        }
        debug_assert_eq!(walk.len(), len + 1);
        Ok(walk)
    }

    /// Number of `len`-edge walks between every ordered pair, saturating at
    /// `u64::MAX`.
    pub fn walk_counts(&self, len: usize) -> Vec<u64> {
        let q = self.q;
        let mut m: Vec<u64> = (0..q * q).map(|k| if k % (q + 1) == 0 { 1 } else { 0 }).collect();
        for _ in 0..len {
            let mut next = vec![0u64; q * q];
            for a in 0..q {
                for b in 0..q {
                    let v = m[a * q + b];
                    if v == 0 {
                        continue;
                    }
                    for &c in &self.neighbours[b] {
                        let slot = &mut next[a * q + c as usize];
                        *slot = slot.saturating_add(v);
                    }
                }
            }
            m = next;
        }
        m
    }

    /// Shortest-path distances in `H`, `dist[a][b]`.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        (0..self.q)
            .map(|src| {
                let mut d = vec![usize::MAX; self.q];
                d[src] = 0;
                let mut queue = VecDeque::from([src]);
                while let Some(a) = queue.pop_front() {
                    for &b in &self.neighbours[a] {
                        if d[b as usize] == usize::MAX {
                            d[b as usize] = d[a] + 1;
                            queue.push_back(b as usize);
                        }
                    }
                }
                d
            })
            .collect()
    }

    /// Canonical text form (sorted edges), also the input to [`Self::hash`].
    pub fn canonical_text(&self) -> String {
        let mut s = format!("q {}\n", self.q);
        for (a, b) in self.edges() {
            s.push_str(&format!("edge {a} {b}\n"));
        }
        s
    }

    /// SHA-256 of the canonical text, hex-encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn is_walk(&self, walk: &[Colour]) -> bool {
        walk.windows(2).all(|w| self.adjacent(w[0], w[1]))
    }

    pub fn neighbour_set(&self, c: Colour) -> BTreeSet<Colour> {
        self.neighbours(c).iter().copied().collect()
    }
}

impl fmt::Debug for ColourGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColourGraph")
            .field("name", &self.name)
            .field("q", &self.q)
            .field("edges", &self.edges())
            .finish()
    }
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<ColourGraph> {
        vec![
            ColourGraph::builtin("clique", Some(2)).unwrap(),
            ColourGraph::builtin("clique", Some(3)).unwrap(),
            ColourGraph::builtin("clique", Some(4)).unwrap(),
            ColourGraph::builtin("independent_set", None).unwrap(),
            ColourGraph::builtin("widom_rowlinson", Some(3)).unwrap(),
            ColourGraph::builtin("widom_rowlinson", Some(4)).unwrap(),
            ColourGraph::builtin("beach", None).unwrap(),
            ColourGraph::builtin("path", Some(4)).unwrap(),
        ]
    }

    #[test]
    fn load_independent_set_text() {
        let g = ColourGraph::load("q 2; edge 0 0; edge 0 1").unwrap();
        assert_eq!(g, ColourGraph::builtin("independent_set", None).unwrap().clone_unnamed());
        assert!(g.adjacent(0, 0) && g.adjacent(0, 1) && !g.adjacent(1, 1));
    }

    #[test]
    fn load_triangle_with_comments() {
        let text = "# triangle\n\nq 3\nedge 0 1\nedge 1 2\nedge 0 2\nedge 2 0\n";
        let g = ColourGraph::load(text).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn load_json_matches_text() {
        let a = ColourGraph::load(r#"{"q": 3, "edges": [[0,1],[1,2],[0,2]]}"#).unwrap();
        let b = ColourGraph::load("q 3\nedge 0 1\nedge 1 2\nedge 0 2").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn load_errors() {
        assert!(matches!(ColourGraph::load("q 2"), Err(Error::EmptyGraph)));
        assert!(matches!(ColourGraph::load("q 2\nedge 0 2"), Err(Error::ColourIndex { line: 2, index: 2, q: 2 })));
        assert!(matches!(ColourGraph::load("q 2\nedgy 0 1"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(ColourGraph::load("edge 0 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ColourGraph::load("q x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            ColourGraph::load("q 4\nedge 0 1\nedge 2 3"),
            Err(Error::DisconnectedGraph { unreachable: 2 })
        ));
    }

    #[test]
    fn builtin_degrees() {
        let is = ColourGraph::builtin("independent_set", None).unwrap();
        assert_eq!(is.max_degree(), 2);
        let wr = ColourGraph::builtin("widom_rowlinson", Some(4)).unwrap();
        assert_eq!(wr.q(), 5);
        assert_eq!(wr.max_degree(), 5);
        assert_eq!(ColourGraph::builtin("clique", Some(3)).unwrap().max_degree(), 2);
        assert_eq!(ColourGraph::builtin("beach", None).unwrap().max_degree(), 3);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(ColourGraph::builtin("torus", None), Err(Error::UnknownBuiltin(_))));
        assert!(matches!(ColourGraph::builtin("clique", Some(1)), Err(Error::InvalidParameter(_))));
        assert!(matches!(ColourGraph::builtin("clique", None), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn bipartitions() {
        let k2 = ColourGraph::builtin("clique", Some(2)).unwrap();
        assert_eq!(k2.colour_classes(), Bipartition::Bipartite { class_of: vec![1, 2] });
        assert_eq!(k2.colour_classes().classes(), Some((vec![0], vec![1])));

        let k3 = ColourGraph::builtin("clique", Some(3)).unwrap();
        match k3.colour_classes() {
            Bipartition::NonBipartite { witness } => {
                assert_eq!(witness.len(), 4);
                assert_eq!(witness.first(), witness.last());
                assert!(k3.is_walk(&witness));
            }
            other => panic!("{other:?}"),
        }

        let is = ColourGraph::builtin("independent_set", None).unwrap();
        assert_eq!(is.colour_classes(), Bipartition::NonBipartite { witness: vec![0, 0] });

        let p4 = ColourGraph::builtin("path", Some(4)).unwrap();
        assert_eq!(p4.colour_classes(), Bipartition::Bipartite { class_of: vec![1, 2, 1, 2] });
    }

    #[test]
    fn odd_witness_is_odd_closed_walk() {
        for g in builtins() {
            if let Bipartition::NonBipartite { witness } = g.colour_classes() {
                assert_eq!(witness.first(), witness.last());
                assert_eq!((witness.len() - 1) % 2, 1, "{g:?}");
                assert!(g.is_walk(&witness));
            }
        }
    }

    #[test]
    fn bipartition_edges_cross() {
        for g in builtins() {
            if let Bipartition::Bipartite { class_of } = g.colour_classes() {
                for (a, b) in g.edges() {
                    assert_ne!(class_of[a as usize], class_of[b as usize]);
                }
            }
        }
    }

    #[test]
    fn two_path_condition() {
        assert!(ColourGraph::builtin("clique", Some(3)).unwrap().has_all_two_paths());
        assert!(ColourGraph::builtin("independent_set", None).unwrap().has_all_two_paths());
        assert!(ColourGraph::builtin("widom_rowlinson", Some(4)).unwrap().has_all_two_paths());
        let beach = ColourGraph::builtin("beach", None).unwrap();
        assert_eq!(beach.two_path_witness(), Some((0, 3)));
        assert!(!ColourGraph::builtin("clique", Some(2)).unwrap().has_all_two_paths());
    }

    #[test]
    fn two_path_matches_boolean_square() {
        for g in builtins() {
            let a2 = g.walk_counts(2);
            let brute = a2.iter().all(|&v| v > 0);
            assert_eq!(brute, g.has_all_two_paths(), "{g:?}");
        }
    }

    #[test]
    fn two_path_graphs_have_positive_walk_counts() {
        for g in builtins().into_iter().filter(|g| g.has_all_two_paths()) {
            for len in 2..=12 {
                assert!(g.walk_counts(len).iter().all(|&v| v > 0), "{g:?} len {len}");
            }
        }
    }

    #[test]
    fn walks() {
        let k2 = ColourGraph::builtin("clique", Some(2)).unwrap();
        assert_eq!(k2.walk_of_length(0, 1, 9).unwrap(), vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        assert!(matches!(k2.walk_of_length(0, 0, 9), Err(Error::NoWalk { .. })));

        let k3 = ColourGraph::builtin("clique", Some(3)).unwrap();
        let w = k3.walk_of_length(0, 1, 13).unwrap();
        assert_eq!(w.len(), 14);
        assert_eq!((w[0], w[13]), (0, 1));
        assert!(k3.is_walk(&w));

        let w = k3.walk_of_length(2, 2, 4).unwrap();
        assert_eq!(w, vec![2, 0, 2, 0, 2]);
        // too short for the shortest odd walk 0 -> 0
        assert!(matches!(k3.walk_of_length(0, 0, 1), Err(Error::NoWalk { .. })));
    }

    #[test]
    fn walks_are_exact_length_everywhere() {
        for g in builtins() {
            let s = 4 * g.q() + 1;
            for a in g.colours() {
                for b in g.colours() {
                    for len in [s, s + 1, 3 * g.q(), 3 * g.q() + 1] {
                        if let Ok(w) = g.walk_of_length(a, b, len) {
                            assert_eq!(w.len(), len + 1);
                            assert_eq!((w[0], w[len]), (a, b));
                            assert!(g.is_walk(&w));
                        } else {
                            // only a parity obstruction can block walks this long
                            assert!(g.colour_classes().is_bipartite());
                            let cls = g.colour_classes();
                            let same = cls.class_of(a) == cls.class_of(b);
                            assert_eq!(same, len % 2 == 1, "{g:?} {a} {b} {len}");
                        }
                    }
                }
            }
        }
    }

    impl ColourGraph {
        fn clone_unnamed(&self) -> Self {
            ColourGraph { name: None, ..self.clone() }
        }
    }
}
