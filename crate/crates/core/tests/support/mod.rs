//! Brute-force reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's numerical code paths; each oracle
//! evaluates its definition as literally as practical.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, SymmetricEigen};

/// SplitMix64, used only to draw test cases.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn series(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}

/// DCCC by literal summation: profiles, per-box OLS against the absolute
/// 1-based index via the normal equations, box moments over `w - 1`,
/// averages over `n - w`.
pub fn dccc_oracle(x: &[f64], y: &[f64], w: usize) -> f64 {
    let n = x.len();
    let profile = |s: &[f64]| -> Vec<f64> {
        let mean: f64 = s.iter().sum::<f64>() / n as f64;
        let mut out = Vec::with_capacity(n);
        for a in 0..n {
            let mut acc = 0.0;
            for b in 0..=a {
                acc += s[b] - mean;
            }
            out.push(acc);
        }
        out
    };
    let (pi, pj) = (profile(x), profile(y));
    let fit = |p: &[f64], beta: usize| -> Vec<f64> {
        let (mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0);
        for gamma in beta..beta + w {
            let g = gamma as f64;
            let v = p[gamma - 1];
            sg += g;
            sgg += g * g;
            sy += v;
            sgy += g * v;
        }
        let wf = w as f64;
        let slope = (wf * sgy - sg * sy) / (wf * sgg - sg * sg);
        let intercept = (sy - slope * sg) / wf;
        (beta..beta + w)
            .map(|gamma| p[gamma - 1] - (intercept + slope * gamma as f64))
            .collect()
    };
    let (mut fii, mut fjj, mut fij) = (0.0, 0.0, 0.0);
    for beta in 1..=n - w + 1 {
        let ri = fit(&pi, beta);
        let rj = fit(&pj, beta);
        let mut sii = 0.0;
        let mut sjj = 0.0;
        let mut sij = 0.0;
        for k in 0..w {
            sii += ri[k] * ri[k];
            sjj += rj[k] * rj[k];
            sij += ri[k] * rj[k];
        }
        fii += sii / (w - 1) as f64;
        fjj += sjj / (w - 1) as f64;
        fij += sij / (w - 1) as f64;
    }
    let d = (n - w) as f64;
    (fij / d) / ((fii / d).sqrt() * (fjj / d).sqrt())
}

pub type EdgeList = Vec<(usize, usize, f64)>;

/// Random graph on `n` nodes with every node touched: a random spanning
/// tree plus extra edges with probability `p`.
pub fn random_graph(rng: &mut TestRng, n: usize, p: f64, integer_weights: bool) -> EdgeList {
    let weight = |rng: &mut TestRng| {
        if integer_weights {
            (1 + rng.below(3)) as f64
        } else {
            rng.range(0.05, 1.0)
        }
    };
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.below(v);
        present[u][v] = true;
        let w = weight(rng);
        edges.push((u, v, w));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present[i][j] && rng.uniform() < p {
                let w = weight(rng);
                edges.push((i, j, w));
            }
        }
    }
    edges
}

pub fn weighted_degree_oracle(n: usize, edges: &EdgeList) -> Vec<f64> {
    let mut w = vec![vec![0.0; n]; n];
    for &(a, b, x) in edges {
        w[a][b] = x;
        w[b][a] = x;
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| w[i][j]).sum())
        .collect()
}

/// All-pairs distances with lengths `1 / weight`.
pub fn floyd_warshall(n: usize, edges: &EdgeList) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a][b] = d[a][b].min(1.0 / w);
        d[b][a] = d[b][a].min(1.0 / w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn closeness_oracle(n: usize, edges: &EdgeList) -> Vec<f64> {
    let d = floyd_warshall(n, edges);
    (0..n)
        .map(|i| {
            let reach: Vec<f64> = (0..n)
                .filter(|&j| j != i && d[i][j].is_finite())
                .map(|j| d[i][j])
                .collect();
            if reach.is_empty() {
                return 0.0;
            }
            let r = reach.len() as f64;
            let total: f64 = reach.iter().sum();
            (r / (n - 1) as f64) * (r / total)
        })
        .collect()
}

/// Enumerate every simple path between each unordered pair, keep those of
/// minimal length (relative tolerance 1e-9), and credit interior nodes.
pub fn betweenness_oracle(n: usize, edges: &EdgeList) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adj[a].push((b, 1.0 / w));
        adj[b].push((a, 1.0 / w));
    }
    fn walk(
        adj: &[Vec<(usize, f64)>],
        v: usize,
        target: usize,
        len: f64,
        path: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if v == target {
            out.push((len, path.clone()));
            return;
        }
        for &(u, l) in &adj[v] {
            if !path.contains(&u) {
                path.push(u);
                walk(adj, u, target, len + l, path, out);
                path.pop();
            }
        }
    }
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths = Vec::new();
            walk(&adj, s, t, 0.0, &mut vec![s], &mut paths);
            if paths.is_empty() {
                continue;
            }
            let best = paths.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let shortest: Vec<_> = paths.iter().filter(|p| p.0 - best <= 1e-9 * best).collect();
            let total = shortest.len() as f64;
            for (_, path) in &shortest {
                for &k in &path[1..path.len() - 1] {
                    score[k] += 1.0 / total;
                }
            }
        }
    }
    score
}

/// Limit of HITS from uniform hubs: project `W 1` onto the top eigenspace
/// of `W^2`, then scale to max 1.
pub fn authority_oracle(n: usize, edges: &EdgeList) -> Vec<f64> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for &(a, b, x) in edges {
        w[(a, b)] = x;
        w[(b, a)] = x;
    }
    let start = &w * nalgebra::DVector::from_element(n, 1.0);
    let w2 = &w * &w;
    let eig = SymmetricEigen::new(w2);
    let top = eig.eigenvalues.max();
    let mut proj = nalgebra::DVector::zeros(n);
    for k in 0..n {
        if eig.eigenvalues[k] >= top * (1.0 - 1e-9) {
            let v = eig.eigenvectors.column(k);
            proj += v * v.dot(&start);
        }
    }
    let max = proj.max();
    proj.iter().map(|x| x / max).collect()
}

/// Minimum total weight over every spanning tree, by checking every
/// `(n - 1)`-subset of the complete graph's edges.
pub fn exhaustive_mst_total(n: usize, dist: &[Vec<f64>]) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let k = n - 1;
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                x = p[x];
            }
            x
        }
        let mut acyclic = true;
        let mut total = 0.0;
        for &e in &idx {
            let (a, b) = pairs[e];
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra == rb {
                acyclic = false;
                break;
            }
            parent[ra] = rb;
            total += dist[a][b];
        }
        if acyclic && total < best {
            best = total;
        }
        // next combination
        let m = pairs.len();
        let mut i = k;
        while i > 0 && idx[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    best
}

/// O(n^2) Prim on a dense distance matrix.
pub fn prim_total(n: usize, dist: &[Vec<f64>]) -> f64 {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[v] = true;
        total += best[v];
        for u in 0..n {
            if !in_tree[u] && dist[v][u] < best[u] {
                best[u] = dist[v][u];
            }
        }
    }
    total
}

/// Random symmetric matrix with unit diagonal and off-diagonals in `(lo, hi)`.
pub fn random_correlation_like(rng: &mut TestRng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.range(lo, hi);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Random symmetric matrix `Q diag(l) Q^T` with `|l| <= radius`.
pub fn random_symmetric_with_radius(rng: &mut TestRng, n: usize, radius: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.normal());
    let q = a.qr().q();
    let eig = nalgebra::DVector::from_fn(n, |_, _| rng.range(-radius, radius));
    let m = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn codes(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i}")).collect()
}
