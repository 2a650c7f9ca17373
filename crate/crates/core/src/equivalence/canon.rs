//! Canonical labelling of formal matrices by individualization-refinement.
//!
//! A matrix is encoded as a coloured graph with one vertex per row, per
//! column, per variable class `{x, x'}` and per side (`x` or `x'`) of each
//! class. Edges join a column to its classes, a class to its two sides and a
//! row to the side it holds in every column. Two sides of a class start with
//! the same colour, so swapping `x` and `x'` is a graph symmetry, and graph
//! isomorphisms are exactly matrix equivalences.

use std::collections::HashMap;

use crate::formal::{FormalMatrix, Var};

const ROW: u32 = 0;
const COLUMN: u32 = 1;
const CLASS: u32 = 2;
const SIDE: u32 = 3;

struct MatrixGraph<'a> {
    x: &'a FormalMatrix,
    kind: Vec<u32>,
    adj: Vec<Vec<usize>>,
    /// Class vertices of each column, with the id they stand for.
    classes: Vec<Vec<(u32, usize)>>,
    /// `(column, id)` to class vertex.
    class_of: HashMap<(usize, u32), usize>,
}

impl<'a> MatrixGraph<'a> {
    fn new(x: &'a FormalMatrix) -> Self {
        let (m, n) = (x.nrows(), x.ncols());
        let mut kind = vec![ROW; m];
        kind.extend(std::iter::repeat_n(COLUMN, n));
        let mut adj = vec![Vec::new(); m + n];
        let mut classes = vec![Vec::new(); n];
        let mut class_of = HashMap::new();
        for (j, col) in classes.iter_mut().enumerate() {
            for id in x.column_ids(j) {
                let c = kind.len();
                kind.extend([CLASS, SIDE, SIDE]);
                adj.extend([vec![m + j, c + 1, c + 2], vec![c], vec![c]]);
                adj[m + j].push(c);
                col.push((id, c));
                class_of.insert((j, id), c);
            }
        }
        for i in 0..m {
            for j in 0..n {
                let v = x.get(i, j);
                let side = class_of[&(j, v.id())] + 1 + v.is_primed() as usize;
                adj[i].push(side);
                adj[side].push(i);
            }
        }
        MatrixGraph { x, kind, adj, classes, class_of }
    }

    fn len(&self) -> usize {
        self.kind.len()
    }

    fn side_vertex(&self, j: usize, v: Var) -> usize {
        self.class_of[&(j, v.id())] + 1 + v.is_primed() as usize
    }

    /// Refine to the coarsest equitable partition below `colors`. Colours
    /// are dense ranks, and refinement never reorders existing cells.
    fn refine(&self, colors: &mut [u32]) {
        let mut cells = count_cells(colors);
        let mut sigs: Vec<(u32, Vec<u32>, usize)> = Vec::with_capacity(colors.len());
        loop {
            sigs.clear();
            for (v, nb) in self.adj.iter().enumerate() {
                let mut s: Vec<u32> = nb.iter().map(|&u| colors[u]).collect();
                s.sort_unstable();
                sigs.push((colors[v], s, v));
            }
            sigs.sort_unstable();
            let mut rank = 0u32;
            for k in 0..sigs.len() {
                if k > 0 && (sigs[k].0 != sigs[k - 1].0 || sigs[k].1 != sigs[k - 1].1) {
                    rank += 1;
                }
                colors[sigs[k].2] = rank;
            }
            let now = rank as usize + 1;
            if now == cells {
                return;
            }
            cells = now;
        }
    }
}

fn count_cells(colors: &[u32]) -> usize {
    let mut c: Vec<u32> = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// A discrete colouring read back as a relabelled matrix.
#[derive(Clone, Debug)]
struct Leaf {
    certificate: Vec<u32>,
    /// Canonical position to original row / column.
    row_order: Vec<usize>,
    col_order: Vec<usize>,
    /// Per original column: id to (canonical rank, side flip).
    renaming: Vec<HashMap<u32, (u32, bool)>>,
}

impl Leaf {
    fn read(g: &MatrixGraph<'_>, colors: &[u32]) -> Leaf {
        let x = g.x;
        let (m, n) = (x.nrows(), x.ncols());
        let mut row_order: Vec<usize> = (0..m).collect();
        row_order.sort_by_key(|&i| colors[i]);
        let mut col_order: Vec<usize> = (0..n).collect();
        col_order.sort_by_key(|&j| colors[m + j]);
        let renaming: Vec<HashMap<u32, (u32, bool)>> = g
            .classes
            .iter()
            .map(|col| {
                let mut ranked: Vec<(u32, usize)> = col.clone();
                ranked.sort_by_key(|&(_, c)| colors[c]);
                ranked
                    .iter()
                    .enumerate()
                    .map(|(r, &(id, c))| (id, (r as u32, colors[c + 2] < colors[c + 1])))
                    .collect()
            })
            .collect();
        let mut certificate = Vec::with_capacity(2 + m * n);
        certificate.extend([m as u32, n as u32]);
        for &i in &row_order {
            for &j in &col_order {
                let v = x.get(i, j);
                let (rank, flip) = renaming[j][&v.id()];
                certificate.push(2 * rank + (v.is_primed() ^ flip) as u32);
            }
        }
        Leaf { certificate, row_order, col_order, renaming }
    }

    /// Vertex permutation taking this leaf's labelling onto `other`'s. Only
    /// meaningful when the certificates agree.
    fn map_onto(&self, other: &Leaf, g: &MatrixGraph<'_>) -> Vec<usize> {
        let m = g.x.nrows();
        let mut perm: Vec<usize> = (0..g.len()).collect();
        for (p, &i) in self.row_order.iter().enumerate() {
            perm[i] = other.row_order[p];
        }
        for (q, &j) in self.col_order.iter().enumerate() {
            let j2 = other.col_order[q];
            perm[m + j] = m + j2;
            let inverse: HashMap<u32, (u32, bool)> =
                other.renaming[j2].iter().map(|(&id, &(r, f))| (r, (id, f))).collect();
            for (&id, &(rank, flip)) in &self.renaming[j] {
                let (id2, flip2) = inverse[&rank];
                let c = g.class_of[&(j, id)];
                let c2 = g.class_of[&(j2, id2)];
                perm[c] = c2;
                let swap = flip != flip2;
                perm[c + 1] = c2 + 1 + swap as usize;
                perm[c + 2] = c2 + 2 - swap as usize;
            }
        }
        perm
    }
}

struct Search<'g, 'a> {
    g: &'g MatrixGraph<'a>,
    first: Option<Leaf>,
    best: Option<Leaf>,
    generators: Vec<Vec<usize>>,
}

impl Search<'_, '_> {
    fn target_cell(&self, colors: &[u32]) -> Option<Vec<usize>> {
        let mut cells: HashMap<u32, Vec<usize>> = HashMap::new();
        for (v, &c) in colors.iter().enumerate() {
            cells.entry(c).or_default().push(v);
        }
        cells
            .into_iter()
            .filter(|(_, vs)| vs.len() > 1)
            .min_by_key(|(c, vs)| (self.g.kind[vs[0]] != ROW, vs.len(), *c))
            .map(|(_, vs)| vs)
    }

    fn visit(&mut self, mut colors: Vec<u32>, path: &mut Vec<usize>) {
        self.g.refine(&mut colors);
        let Some(cell) = self.target_cell(&colors) else {
            self.leaf(&colors);
            return;
        };
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            if !tried.is_empty() && self.in_explored_orbit(v, &tried, path) {
                continue;
            }
            tried.push(v);
            let mut child: Vec<u32> = colors.iter().map(|&c| 2 * c + 1).collect();
            child[v] -= 1;
            path.push(v);
            self.visit(child, path);
            path.pop();
        }
    }

    /// Whether `v` shares an orbit with an explored sibling under the
    /// automorphisms found so far that fix the current path.
    fn in_explored_orbit(&self, v: usize, tried: &[usize], path: &[usize]) -> bool {
        let gens: Vec<&Vec<usize>> =
            self.generators.iter().filter(|g| path.iter().all(|&p| g[p] == p)).collect();
        if gens.is_empty() {
            return false;
        }
        let mut uf = UnionFind::new(self.g.len());
        for g in gens {
            for (a, &b) in g.iter().enumerate() {
                uf.union(a, b);
            }
        }
        let rv = uf.find(v);
        tried.iter().any(|&t| uf.find(t) == rv)
    }

    fn leaf(&mut self, colors: &[u32]) {
        let leaf = Leaf::read(self.g, colors);
        if let Some(first) = &self.first {
            if first.certificate == leaf.certificate {
                let gen = leaf.map_onto(first, self.g);
                self.generators.push(gen);
                return;
            }
        } else {
            self.first = Some(leaf.clone());
        }
        match &self.best {
            Some(best) if best.certificate == leaf.certificate => {
                let gen = leaf.map_onto(best, self.g);
                self.generators.push(gen);
            }
            Some(best) if best.certificate <= leaf.certificate => {}
            _ => self.best = Some(leaf),
        }
    }
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Result of canonical labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    /// `[m, n]` followed by the canonical matrix row by row, each entry
    /// encoded as `2 * class_rank + primed`. Equal codes iff equivalent.
    pub code: Vec<u32>,
    /// `row_order[p]` is the original row placed at canonical position `p`.
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    /// Per original column: original id to (canonical id, whether the
    /// primed flag flips).
    pub renaming: Vec<Vec<(u32, u32, bool)>>,
    /// Orbit representative (smallest row index) of every row under the
    /// automorphism group.
    pub row_orbits: Vec<usize>,
    /// Generators of the automorphism group, acting on rows.
    pub row_automorphisms: Vec<Vec<usize>>,
}

impl CanonicalForm {
    pub fn matrix(&self) -> FormalMatrix {
        let (m, n) = (self.code[0] as usize, self.code[1] as usize);
        let entries = self.code[2..].iter().map(|&c| Var::from_code(c)).collect();
        FormalMatrix::new(m, n, entries).expect("canonical code has matrix shape")
    }

    /// Canonical position of every original row.
    pub fn row_positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.row_order.len()];
        for (p, &i) in self.row_order.iter().enumerate() {
            pos[i] = p;
        }
        pos
    }
}

pub fn canonical_form(x: &FormalMatrix) -> CanonicalForm {
    let g = MatrixGraph::new(x);
    let colors: Vec<u32> = g.kind.clone();
    let mut search = Search { g: &g, first: None, best: None, generators: Vec::new() };
    search.visit(colors, &mut Vec::new());
    let best = search.best.expect("search reaches a leaf");
    let m = x.nrows();
    let mut uf = UnionFind::new(m);
    for gen in &search.generators {
        for i in 0..m {
            uf.union(i, gen[i]);
        }
    }
    let row_orbits = (0..m).map(|i| uf.find(i)).collect();
    let row_automorphisms = search.generators.iter().map(|gen| gen[..m].to_vec()).collect();
    let renaming = best
        .renaming
        .iter()
        .map(|r| {
            let mut v: Vec<(u32, u32, bool)> =
                r.iter().map(|(&id, &(rank, flip))| (id, rank, flip)).collect();
            v.sort_unstable();
            v
        })
        .collect();
    debug_assert!(search.generators.iter().all(|gen| is_automorphism(&g, gen)));
    CanonicalForm {
        code: best.certificate,
        row_order: best.row_order,
        col_order: best.col_order,
        renaming,
        row_orbits,
        row_automorphisms,
    }
}

fn is_automorphism(g: &MatrixGraph<'_>, perm: &[usize]) -> bool {
    let x = g.x;
    (0..x.nrows()).all(|i| {
        (0..x.ncols()).all(|j| {
            let side = g.side_vertex(j, x.get(i, j));
            g.adj[perm[i]].contains(&perm[side])
        })
    })
}
