#![allow(dead_code, clippy::needless_range_loop)]

use ile::graph::Graph;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random weighted edge list on `n` nodes; when `connected` a random
/// spanning tree is laid down first.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64, connected: bool, weighted: bool) -> Vec<(usize, usize, f64)> {
    let weight = |rng: &mut ChaCha8Rng| {
        if weighted {
            // (0, 2]
            2.0 - rng.random::<f64>() * 2.0
        } else {
            1.0
        }
    };
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    if connected {
        for v in 1..n {
            let u = rng.random_range(0..v);
            present[u][v] = true;
            let w = weight(rng);
            edges.push((u, v, w));
        }
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !present[u][v] && rng.random::<f64>() < p {
                present[u][v] = true;
                let w = weight(rng);
                edges.push((u, v, w));
            }
        }
    }
    edges
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, connected: bool, weighted: bool) -> (Graph, Vec<(usize, usize, f64)>) {
    let edges = random_edges(rng, n, p, connected, weighted);
    (Graph::from_edge_list(&edges, n).unwrap(), edges)
}

/// Dense `t D - s A` assembled straight from an edge list.
pub fn dense_m(edges: &[(usize, usize, f64)], n: usize, t: f64, s: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for &(u, v, w) in edges {
        m[(u, v)] -= s * w;
        m[(v, u)] -= s * w;
        m[(u, u)] += t * w;
        m[(v, v)] += t * w;
    }
    m
}

pub fn dense_degrees(edges: &[(usize, usize, f64)], n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for &(u, v, w) in edges {
        d[u] += w;
        d[v] += w;
    }
    d
}

/// Eigenpairs of a dense symmetric matrix, ascending.
pub fn dense_spectrum(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `min(||a - b||, ||a + b||)` for two columns.
pub fn sign_free_distance(a: &[f64], b: &[f64]) -> f64 {
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum::<f64>().sqrt();
    plus.min(minus)
}

/// Indices `j < k` whose eigenvalue is separated by more than `gap` from
/// both neighbours in the full ascending list `values`.
pub fn isolated(values: &[f64], k: usize, gap: f64) -> Vec<usize> {
    (0..k)
        .filter(|&j| {
            let left = j == 0 || values[j] - values[j - 1] > gap;
            let right = j + 1 >= values.len() || values[j + 1] - values[j] > gap;
            left && right
        })
        .collect()
}

pub fn column(m: &DMatrix<f64>, j: usize) -> Vec<f64> {
    m.column(j).iter().copied().collect()
}

/// `|a - b| <= max(rel * max(|a|, |b|), abs)`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(abs)
}

use ile::nn::{Matrix, Model, Tape, Var};

/// Random matrix whose entries stay at least 0.1 away from zero, so ReLU
/// kinks are never crossed by a finite-difference step.
pub fn away_from_zero(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        let m = 0.1 + 0.9 * rng.random::<f64>();
        if rng.random::<bool>() {
            m
        } else {
            -m
        }
    })
}

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL: f64 = 1e-4;
pub const FD_ABS: f64 = 1e-7;

fn scalar_projection<'a>(
    inputs: &[Matrix],
    u: &Matrix,
    v: &Matrix,
    f: &impl Fn(&mut Tape<'a>, &[Var]) -> Var,
) -> (f64, Vec<Matrix>) {
    let mut tape = Tape::new();
    let leaves: Vec<Var> = inputs.iter().map(|m| tape.leaf(m.clone()).unwrap()).collect();
    let out = f(&mut tape, &leaves);
    let uv = tape.leaf(u.clone()).unwrap();
    let vv = tape.leaf(v.clone()).unwrap();
    let z = tape.matmul(uv, out).unwrap();
    let loss = tape.matmul(z, vv).unwrap();
    tape.backward(loss).unwrap();
    let value = tape.value(loss).data[0];
    (value, leaves.iter().map(|&l| tape.grad(l)).collect())
}

/// Compares the tape gradient of `u^T f(inputs) v` (random `u`, `v`) with
/// central differences. Returns the number of entries outside tolerance and
/// the worst relative error seen.
pub fn gradcheck<'a>(
    rng: &mut ChaCha8Rng,
    inputs: &[Matrix],
    out_shape: (usize, usize),
    f: impl Fn(&mut Tape<'a>, &[Var]) -> Var,
) -> (usize, f64) {
    let u = Matrix::from_fn(1, out_shape.0, |_, _| rng.random_range(-1.0..1.0));
    let v = Matrix::from_fn(out_shape.1, 1, |_, _| rng.random_range(-1.0..1.0));
    let (_, grads) = scalar_projection(inputs, &u, &v, &f);
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for (i, input) in inputs.iter().enumerate() {
        for j in 0..input.data.len() {
            let mut plus = inputs.to_vec();
            plus[i].data[j] += FD_STEP;
            let mut minus = inputs.to_vec();
            minus[i].data[j] -= FD_STEP;
            let fd = (scalar_projection(&plus, &u, &v, &f).0 - scalar_projection(&minus, &u, &v, &f).0) / (2.0 * FD_STEP);
            let an = grads[i].data[j];
            if !close(an, fd, FD_REL, FD_ABS) {
                bad += 1;
            }
            let scale = an.abs().max(fd.abs());
            if scale > FD_ABS {
                worst = worst.max((an - fd).abs() / scale);
            }
        }
    }
    (bad, worst)
}

/// Moves `model` to a generic point: biases start at exactly zero, which
/// puts dead hidden rows right on a ReLU kink in the next layer.
pub fn randomize_biases(rng: &mut ChaCha8Rng, model: &mut Model) {
    for p in model.params_mut().iter_mut().filter(|p| p.rows == 1) {
        let r = away_from_zero(rng, 1, p.cols);
        p.data.copy_from_slice(&r.data);
    }
}

/// Central-difference check of the training loss gradient with respect to
/// every parameter entry of `model`.
pub fn model_gradcheck(model: &Model, x: &Matrix, labels: &[usize], mask: &[usize]) -> (usize, f64) {
    let (_, grads) = model.loss_and_grads(x, labels, mask).unwrap();
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    for p in 0..model.params().len() {
        for j in 0..model.params()[p].data.len() {
            let mut plus = model.clone();
            plus.params_mut()[p].data[j] += FD_STEP;
            let mut minus = model.clone();
            minus.params_mut()[p].data[j] -= FD_STEP;
            let fd = (plus.loss(x, labels, mask).unwrap() - minus.loss(x, labels, mask).unwrap()) / (2.0 * FD_STEP);
            let an = grads[p].data[j];
            if !close(an, fd, FD_REL, FD_ABS) {
                bad += 1;
            }
            let scale = an.abs().max(fd.abs());
            if scale > FD_ABS {
                worst = worst.max((an - fd).abs() / scale);
            }
        }
    }
    (bad, worst)
}
