//! Exact maximum clique by branch and bound with greedy colouring bounds.

/// Dense undirected graph stored as adjacency bitsets.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph { n, words, adj: vec![0; n * words] }
    }

    pub fn from_fn(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Graph::new(n);
        for i in 0..n {
            for k in 0..i {
                if edge(i, k) {
                    g.add_edge(i, k);
                }
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.adj[a * self.words + b / 64] |= 1 << (b % 64);
        self.adj[b * self.words + a / 64] |= 1 << (a % 64);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.words + b / 64] & (1 << (b % 64)) != 0
    }

    fn neighbours(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    /// A maximum clique, vertices ascending.
    pub fn max_clique(&self) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        let mut best = vec![0];
        let mut current = Vec::new();
        let candidates: Vec<usize> = (0..self.n).collect();
        self.expand(&mut current, candidates, &mut best);
        best.sort_unstable();
        best
    }

    pub fn clique_number(&self) -> usize {
        self.max_clique().len()
    }

    /// Greedy sequential colouring. Returns vertices ordered by colour and
    /// the colour count up to each position.
    fn colour_sort(&self, cand: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::with_capacity(cand.len());
        let mut bounds = Vec::with_capacity(cand.len());
        let mut uncoloured: Vec<usize> = cand.to_vec();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut class: Vec<usize> = Vec::new();
            let mut rest = Vec::new();
            for &v in &uncoloured {
                if class.iter().all(|&u| !self.has_edge(u, v)) {
                    class.push(v);
                } else {
                    rest.push(v);
                }
            }
            for v in class {
                order.push(v);
                bounds.push(colour);
            }
            uncoloured = rest;
        }
        (order, bounds)
    }

    fn expand(&self, current: &mut Vec<usize>, cand: Vec<usize>, best: &mut Vec<usize>) {
        let (order, bounds) = self.colour_sort(&cand);
        let mut remaining = cand;
        for idx in (0..order.len()).rev() {
            if current.len() + bounds[idx] <= best.len() {
                return;
            }
            let v = order[idx];
            current.push(v);
            let nb = self.neighbours(v);
            let next: Vec<usize> =
                remaining.iter().copied().filter(|&u| nb[u / 64] & (1 << (u % 64)) != 0).collect();
            if next.is_empty() {
                if current.len() > best.len() {
                    *best = current.clone();
                }
            } else {
                self.expand(current, next, best);
            }
            current.pop();
            remaining.retain(|&u| u != v);
        }
    }
}
