//! Trees with ordered ends and the combinatorics induced by rooting them at
//! the last end.
//!
//! Ends are numbered `0..r` internally; end `r - 1` is the root. Sets of ends
//! are `u64` bitmasks, which caps `r` at 64.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Bitmask of end indices.
pub type EndSet = u64;

pub const MAX_ENDS: usize = 64;

pub fn end_set(ends: impl IntoIterator<Item = usize>) -> EndSet {
    ends.into_iter().fold(0, |s, i| s | (1 << i))
}

pub fn end_set_members(set: EndSet) -> impl Iterator<Item = usize> {
    (0..MAX_ENDS).filter(move |&i| set >> i & 1 == 1)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeId {
    End(usize),
    Bounded(usize),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Vertex {
    Finite(usize),
    /// The infinite vertex `u_i` at the far end of end `i`.
    Infinite(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("a tree needs at least 3 ends, got {0}")]
    TooFewEnds(usize),
    #[error("at most {MAX_ENDS} ends are supported, got {0}")]
    TooManyEnds(usize),
    #[error("end {end} is attached to vertex {vertex}, which does not exist")]
    BadEndVertex { end: usize, vertex: usize },
    #[error("bounded edge {edge} has an endpoint outside the vertex range")]
    BadEdge { edge: usize },
    #[error("bounded edge {edge} is a loop")]
    Loop { edge: usize },
    #[error("expected {expected} bounded edges for {vertices} finite vertices, got {got}")]
    EdgeCount { vertices: usize, expected: usize, got: usize },
    #[error("the graph is not connected")]
    Disconnected,
    #[error("vertex {vertex} has degree {degree}; every finite vertex needs degree at least 3")]
    LowDegree { vertex: usize, degree: usize },
}

/// A tree with `r` ordered ends. Finite vertices are anonymous indices; the
/// structure rooted at end `r - 1` is computed on construction.
#[derive(Clone, Debug)]
pub struct MarkedTree {
    num_vertices: usize,
    end_vertex: Vec<usize>,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<EdgeId>>,
    rooted: RootedStructure,
}

impl PartialEq for MarkedTree {
    fn eq(&self, other: &Self) -> bool {
        self.num_vertices == other.num_vertices
            && self.end_vertex == other.end_vertex
            && self.edges == other.edges
    }
}

impl Eq for MarkedTree {}

/// Orientation away from the root end and everything derived from it.
#[derive(Clone, Debug)]
pub struct RootedStructure {
    root_vertex: usize,
    tail: Vec<usize>,
    head: Vec<usize>,
    /// Parent edge of each finite vertex (`None` for the root vertex).
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    below: Vec<EndSet>,
    children: Vec<Vec<EdgeId>>,
    iota_bounded: Vec<usize>,
    essential: Vec<EdgeId>,
}

impl MarkedTree {
    pub fn new(
        num_vertices: usize,
        end_vertex: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, TreeError> {
        let r = end_vertex.len();
        if r < 3 {
            return Err(TreeError::TooFewEnds(r));
        }
        if r > MAX_ENDS {
            return Err(TreeError::TooManyEnds(r));
        }
        if let Some((end, &vertex)) = end_vertex.iter().enumerate().find(|(_, &v)| v >= num_vertices)
        {
            return Err(TreeError::BadEndVertex { end, vertex });
        }
        if num_vertices == 0 || edges.len() + 1 != num_vertices {
            return Err(TreeError::EdgeCount {
                vertices: num_vertices,
                expected: num_vertices.saturating_sub(1),
                got: edges.len(),
            });
        }
        let mut incident = vec![Vec::new(); num_vertices];
        for (j, &(a, b)) in edges.iter().enumerate() {
            if a >= num_vertices || b >= num_vertices {
                return Err(TreeError::BadEdge { edge: j });
            }
            if a == b {
                return Err(TreeError::Loop { edge: j });
            }
            incident[a].push(EdgeId::Bounded(j));
            incident[b].push(EdgeId::Bounded(j));
        }
        for (i, &v) in end_vertex.iter().enumerate() {
            incident[v].push(EdgeId::End(i));
        }
        for (vertex, inc) in incident.iter().enumerate() {
            if inc.len() < 3 {
                return Err(TreeError::LowDegree { vertex, degree: inc.len() });
            }
        }
        // |E| = |V| - 1 plus connectivity rules out cycles.
        let rooted = RootedStructure::build(num_vertices, &end_vertex, &edges, &incident)
            .ok_or(TreeError::Disconnected)?;
        Ok(MarkedTree { num_vertices, end_vertex, edges, incident, rooted })
    }

    /// The star with a single vertex carrying all `r` ends.
    pub fn star(r: usize) -> Result<Self, TreeError> {
        MarkedTree::new(1, vec![0; r], Vec::new())
    }

    pub fn num_ends(&self) -> usize {
        self.end_vertex.len()
    }

    pub fn root_end(&self) -> usize {
        self.num_ends() - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_bounded(&self) -> usize {
        self.edges.len()
    }

    /// The finite vertex `v_i` carrying end `i`.
    pub fn end_vertex(&self, i: usize) -> usize {
        self.end_vertex[i]
    }

    pub fn end_vertices(&self) -> &[usize] {
        &self.end_vertex
    }

    /// Endpoints of bounded edge `j` as stored (not oriented).
    pub fn bounded_edge(&self, j: usize) -> (usize, usize) {
        self.edges[j]
    }

    pub fn bounded_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn incident(&self, w: usize) -> &[EdgeId] {
        &self.incident[w]
    }

    pub fn degree(&self, w: usize) -> usize {
        self.incident[w].len()
    }

    pub fn is_trivalent(&self) -> bool {
        self.incident.iter().all(|inc| inc.len() == 3)
    }

    pub fn rooted(&self) -> &RootedStructure {
        &self.rooted
    }

    /// Ends on the side of bounded edge `j` away from the root.
    pub fn split(&self, j: usize) -> EndSet {
        self.rooted.below_edge(EdgeId::Bounded(j))
    }

    /// Isomorphism invariant fixing end labels: the sorted list of splits.
    pub fn canonical_key(&self) -> Vec<EndSet> {
        let mut key: Vec<EndSet> = (0..self.num_bounded()).map(|j| self.split(j)).collect();
        key.sort_unstable();
        key
    }

    /// Renames end `i` to `perm[i]`. The root changes if `perm` moves `r - 1`.
    pub fn relabel_ends(&self, perm: &[usize]) -> Result<Self, TreeError> {
        let r = self.num_ends();
        assert_eq!(perm.len(), r, "permutation length must equal the number of ends");
        let mut end_vertex = vec![usize::MAX; r];
        for (i, &p) in perm.iter().enumerate() {
            assert!(p < r && end_vertex[p] == usize::MAX, "not a permutation");
            end_vertex[p] = self.end_vertex[i];
        }
        MarkedTree::new(self.num_vertices, end_vertex, self.edges.clone())
    }

    /// Same tree with bounded edges listed in the order `order` (new edge `k`
    /// is old edge `order[k]`) and vertices renamed by `vertex_perm`
    /// (old `w` becomes `vertex_perm[w]`).
    pub fn reindex(&self, order: &[usize], vertex_perm: &[usize]) -> Result<Self, TreeError> {
        let edges =
            order.iter().map(|&j| (vertex_perm[self.edges[j].0], vertex_perm[self.edges[j].1])).collect();
        let end_vertex = self.end_vertex.iter().map(|&v| vertex_perm[v]).collect();
        MarkedTree::new(self.num_vertices, end_vertex, edges)
    }

    fn other_endpoint(&self, e: EdgeId, w: usize) -> Vertex {
        match e {
            EdgeId::End(i) => Vertex::Infinite(i),
            EdgeId::Bounded(j) => {
                let (a, b) = self.edges[j];
                Vertex::Finite(if a == w { b } else { a })
            }
        }
    }

    /// The unique simple path from `a` to `b`, each edge paired with `+1` if
    /// the path traverses it from tail to head and `-1` otherwise. Found by
    /// breadth-first search, independently of the split bookkeeping.
    pub fn geodesic(&self, a: Vertex, b: Vertex) -> Vec<(EdgeId, i8)> {
        if a == b {
            return Vec::new();
        }
        let finite = |v: Vertex| match v {
            Vertex::Finite(w) => w,
            Vertex::Infinite(i) => self.end_vertex[i],
        };
        let (start, goal) = (finite(a), finite(b));
        let mut prev: Vec<Option<(usize, EdgeId)>> = vec![None; self.num_vertices];
        let mut seen = vec![false; self.num_vertices];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(w) = queue.pop_front() {
            if w == goal {
                break;
            }
            for &e in &self.incident[w] {
                if let Vertex::Finite(x) = self.other_endpoint(e, w) {
                    if !seen[x] {
                        seen[x] = true;
                        prev[x] = Some((w, e));
                        queue.push_back(x);
                    }
                }
            }
        }
        let mut middle = Vec::new();
        let mut w = goal;
        while w != start {
            let (p, e) = prev[w].expect("trees are connected");
            middle.push((e, p, w));
            w = p;
        }
        middle.reverse();

        let mut path = Vec::with_capacity(middle.len() + 2);
        if let Vertex::Infinite(i) = a {
            path.push((EdgeId::End(i), self.end_orientation(i, false)));
        }
        for (e, from, _) in middle {
            let EdgeId::Bounded(j) = e else { unreachable!() };
            let sign = if self.rooted.tail[j] == from { 1 } else { -1 };
            path.push((e, sign));
        }
        if let Vertex::Infinite(i) = b {
            path.push((EdgeId::End(i), self.end_orientation(i, true)));
        }
        path
    }

    /// Orientation sign of traversing end `i` towards (`outward`) or away
    /// from its infinite vertex.
    fn end_orientation(&self, i: usize, outward: bool) -> i8 {
        // Ends point away from the root vertex except the root end itself.
        let points_outward = i != self.root_end();
        if points_outward == outward {
            1
        } else {
            -1
        }
    }

    /// `+1` if bounded edge `j` separates ends `{q0, q2}` from `{q1, q3}`,
    /// `-1` if it separates `{q0, q3}` from `{q1, q2}`, `0` otherwise.
    pub fn separates(&self, j: usize, quad: [usize; 4]) -> i8 {
        let s = self.split(j);
        let side = |i: usize| s >> i & 1 == 1;
        let [a, b, c, d] = quad.map(side);
        if a == b {
            0
        } else if a == c && b == d {
            1
        } else if a == d && b == c {
            -1
        } else {
            0
        }
    }
}

impl RootedStructure {
    fn build(
        num_vertices: usize,
        end_vertex: &[usize],
        edges: &[(usize, usize)],
        incident: &[Vec<EdgeId>],
    ) -> Option<Self> {
        let r = end_vertex.len();
        let root = r - 1;
        let root_vertex = end_vertex[root];
        let nb = edges.len();
        let mut tail = vec![usize::MAX; nb];
        let mut head = vec![usize::MAX; nb];
        let mut parent = vec![None; num_vertices];
        let mut depth = vec![0; num_vertices];
        let mut order = Vec::with_capacity(num_vertices);
        let mut seen = vec![false; num_vertices];
        seen[root_vertex] = true;
        let mut queue = VecDeque::from([root_vertex]);
        while let Some(w) = queue.pop_front() {
            order.push(w);
            for &e in &incident[w] {
                let EdgeId::Bounded(j) = e else { continue };
                let (a, b) = edges[j];
                let x = if a == w { b } else { a };
                if seen[x] {
                    continue;
                }
                seen[x] = true;
                tail[j] = w;
                head[j] = x;
                parent[x] = Some(j);
                depth[x] = depth[w] + 1;
                queue.push_back(x);
            }
        }
        if order.len() != num_vertices {
            return None;
        }

        let mut below = vec![0 as EndSet; num_vertices];
        for (i, &v) in end_vertex.iter().enumerate() {
            if i != root {
                below[v] |= 1 << i;
            }
        }
        for &w in order.iter().rev() {
            if let Some(j) = parent[w] {
                let t = tail[j];
                below[t] |= below[w];
            }
        }

        let iota_bounded: Vec<usize> =
            head.iter().map(|&h| below[h].trailing_zeros() as usize).collect();
        let iota = |e: EdgeId| match e {
            EdgeId::End(i) => i,
            EdgeId::Bounded(j) => iota_bounded[j],
        };
        let mut children = vec![Vec::new(); num_vertices];
        for (w, inc) in incident.iter().enumerate() {
            for &e in inc {
                let outgoing = match e {
                    EdgeId::End(i) => i != root,
                    EdgeId::Bounded(j) => tail[j] == w,
                };
                if outgoing {
                    children[w].push(e);
                }
            }
            children[w].sort_by_key(|&e| iota(e));
        }
        let mut essential: Vec<EdgeId> = children
            .iter()
            .flat_map(|c| c.iter().skip(1).take(c.len().saturating_sub(2)).copied())
            .collect();
        essential.sort_unstable();

        Some(RootedStructure { root_vertex, tail, head, parent, depth, below, children, iota_bounded, essential })
    }

    /// `v_r`, the vertex carrying the root end.
    pub fn root_vertex(&self) -> usize {
        self.root_vertex
    }

    /// Tail of bounded edge `j` (the endpoint closer to the root).
    pub fn tail(&self, j: usize) -> usize {
        self.tail[j]
    }

    pub fn head(&self, j: usize) -> usize {
        self.head[j]
    }

    pub fn parent_edge(&self, w: usize) -> Option<usize> {
        self.parent[w]
    }

    /// Number of bounded edges between `w` and the root vertex.
    pub fn depth(&self, w: usize) -> usize {
        self.depth[w]
    }

    /// `I_w^∞`: the ends (other than the root) whose infinite vertex lies
    /// above `w`.
    pub fn below(&self, w: usize) -> EndSet {
        self.below[w]
    }

    /// Ends above an edge: `I^∞` of its head, `{i}` for end `i`.
    pub fn below_edge(&self, e: EdgeId) -> EndSet {
        match e {
            EdgeId::End(i) => 1 << i,
            EdgeId::Bounded(j) => self.below[self.head[j]],
        }
    }

    /// ι: the smallest end index above the head of `e`.
    pub fn iota(&self, e: EdgeId) -> usize {
        match e {
            EdgeId::End(i) => i,
            EdgeId::Bounded(j) => self.iota_bounded[j],
        }
    }

    /// `E_w⁺`, sorted by ι.
    pub fn children(&self, w: usize) -> &[EdgeId] {
        &self.children[w]
    }

    /// `I_w = ι(E_w⁺)`.
    pub fn index_set(&self, w: usize) -> EndSet {
        end_set(self.children[w].iter().map(|&e| self.iota(e)))
    }

    pub fn essential_edges(&self) -> &[EdgeId] {
        &self.essential
    }

    pub fn is_essential(&self, e: EdgeId) -> bool {
        self.essential.binary_search(&e).is_ok()
    }

    /// Path of bounded edges from the root vertex up to `w`.
    pub fn path_from_root(&self, w: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth[w]);
        let mut x = w;
        while let Some(j) = self.parent[x] {
            path.push(j);
            x = self.tail[j];
        }
        path.reverse();
        path
    }
}

/// `(2r - 5)!!`, the number of trivalent trees with `r ≥ 3` ordered ends, or
/// `None` on overflow.
pub fn trivalent_tree_count(r: usize) -> Option<u128> {
    assert!(r >= 3, "trivalent trees need at least 3 ends");
    (3..r).try_fold(1u128, |acc, k| acc.checked_mul(2 * k as u128 - 3))
}

/// The trivalent tree with the given index in insertion order. Starting from
/// the tripod on ends 0, 1, 2, end `k` is inserted into one of the `2k - 3`
/// edges of the current tree; the choices are the mixed-radix digits of
/// `index`, least significant first. Edge `c < k` is end `c`, edge `c ≥ k`
/// is bounded edge `c - k`.
pub fn trivalent_tree(r: usize, index: u128) -> MarkedTree {
    let count = trivalent_tree_count(r).expect("tree count overflows");
    assert!(index < count, "tree index {index} out of range for r = {r}");
    let mut rest = index;
    let mut end_vertex = vec![0usize; 3];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut num_vertices = 1;
    for k in 3..r {
        let radix = 2 * k as u128 - 3;
        let c = (rest % radix) as usize;
        rest /= radix;
        let x = num_vertices;
        num_vertices += 1;
        if c < k {
            edges.push((end_vertex[c], x));
            end_vertex[c] = x;
        } else {
            let (a, b) = edges[c - k];
            edges[c - k] = (a, x);
            edges.push((x, b));
        }
        end_vertex.push(x);
    }
    MarkedTree::new(num_vertices, end_vertex, edges).expect("insertion preserves validity")
}

/// All trivalent trees with `r` ordered ends, each exactly once.
pub fn trivalent_trees(r: usize) -> impl Iterator<Item = MarkedTree> {
    let count = trivalent_tree_count(r).expect("tree count overflows");
    (0..count).map(move |i| trivalent_tree(r, i))
}

impl fmt::Display for MarkedTree {
    /// One-based end labels, e.g. `ends[1:0 2:2 …] edges[0-1 1-2]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ends[")?;
        for (i, v) in self.end_vertex.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}:{}", i + 1, v)?;
        }
        f.write_str("] edges[")?;
        for (j, (a, b)) in self.edges.iter().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        f.write_str("]")
    }
}
