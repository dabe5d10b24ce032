//! Brute-force enumeration oracle for the multigraph counting constants
//! A_k, A'_k, A''_k and B_{g,k} and the auxiliary binomial identity.
//!
//! Tuples of bundle symbols are mapped to multigraphs; weights depend on the
//! first Betti number and the degree of the distinguished vertex. Everything
//! here is exact integer arithmetic; equality with the closed forms is strict.

use crate::error::{Error, Result};

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// A symbol over n ordinary vertices plus the distinguished vertex v_{g+1}:
/// a loop T_j at vertex j, an edge between two ordinary vertices, or an edge
/// from an ordinary vertex to the distinguished one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundleSymbol {
    Loop(usize),
    Edge(usize, usize),
    EdgeToLast(usize),
}

impl BundleSymbol {
    fn endpoints(self, last: usize) -> (usize, usize) {
        match self {
            BundleSymbol::Loop(j) => (j, j),
            BundleSymbol::Edge(j, k) => (j, k),
            BundleSymbol::EdgeToLast(j) => (j, last),
        }
    }
}

/// The symbol alphabet over n ordinary vertices; `with_last` adds the edges
/// to the distinguished vertex (the L_n set; without them it is L'_n).
fn alphabet(n: usize, with_last: bool) -> Vec<BundleSymbol> {
    let mut syms = Vec::new();
    for j in 0..n {
        syms.push(BundleSymbol::Loop(j));
    }
    for j in 0..n {
        for k in j + 1..n {
            syms.push(BundleSymbol::Edge(j, k));
        }
    }
    if with_last {
        for j in 0..n {
            syms.push(BundleSymbol::EdgeToLast(j));
        }
    }
    syms
}

/// Multigraph on the vertex set {v_1..v_n} (+ v_{g+1}) built from a symbol
/// tuple, with degree map and first Betti number b1 = E - V + C.
pub struct TupleGraph {
    pub degrees: Vec<u32>,
    pub betti: i64,
    pub components: usize,
    pub edges: usize,
}

impl TupleGraph {
    /// `vertices` counts all vertices including the distinguished one (which
    /// must be the last index). Loops add 2 to their vertex's degree.
    pub fn new(symbols: &[BundleSymbol], vertices: usize) -> Self {
        let last = vertices - 1;
        let mut degrees = vec![0u32; vertices];
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        for &s in symbols {
            let (a, b) = s.endpoints(last);
            if a == b {
                degrees[a] += 2;
            } else {
                degrees[a] += 1;
                degrees[b] += 1;
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut roots = std::collections::HashSet::new();
        for v in 0..vertices {
            let r = find(&mut parent, v);
            roots.insert(r);
        }
        let components = roots.len();
        let edges = symbols.len();
        let betti = edges as i64 - vertices as i64 + components as i64;
        TupleGraph {
            degrees,
            betti,
            components,
            edges,
        }
    }
}

/// The zero rule, exactly as stated: the weight vanishes if some sub-tuple of
/// cardinality l touches at most l-1 of the vertices v_1..v_k.
fn zero_rule(symbols: &[BundleSymbol], k: usize, last: usize) -> bool {
    let n = symbols.len();
    for mask in 1u32..(1 << n) {
        let l = mask.count_ones() as usize;
        let mut touched = vec![false; k];
        for (i, &s) in symbols.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (a, b) = s.endpoints(last);
                if a < k {
                    touched[a] = true;
                }
                if b < k {
                    touched[b] = true;
                }
            }
        }
        if touched.iter().filter(|&&t| t).count() < l {
            return true;
        }
    }
    false
}

/// Sum of weights (2-2g)^{b1} (-1)^{deg v_{g+1}} over all k-tuples from the
/// alphabet over g ordinary vertices with the distinguished vertex; equals
/// (-1)^k k! g!/(g-k)!.
pub fn enumerate_b(g: usize, k: usize) -> Result<i64> {
    if g > 4 || k > 4 {
        let syms = g + g * (g.saturating_sub(1)) / 2 + g;
        return Err(Error::ParameterTooLarge {
            estimate: (syms as f64).powi(k as i32),
        });
    }
    if k == 0 {
        // The empty tuple, weighted by 1.
        return Ok(1);
    }
    let syms = alphabet(g, true);
    let last = g; // distinguished vertex index in a (g+1)-vertex graph
    let mut total: i64 = 0;
    let mut tuple = vec![0usize; k];
    loop {
        let symbols: Vec<BundleSymbol> = tuple.iter().map(|&i| syms[i]).collect();
        if !zero_rule(&symbols, k, last) {
            let graph = TupleGraph::new(&symbols, g + 1);
            let w = (2i64 - 2 * g as i64).pow(graph.betti as u32)
                * if graph.degrees[last].is_multiple_of(2) { 1 } else { -1 };
            total += w;
        }
        let mut c = 0;
        loop {
            if c == k {
                return Ok(total);
            }
            tuple[c] += 1;
            if tuple[c] < syms.len() {
                break;
            }
            tuple[c] = 0;
            c += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AVariant {
    /// Two degree-3 vertices joined by three edge-disjoint paths (theta graph).
    ThreePaths,
    /// Two degree-3 vertices joined by one path (dumbbell).
    OnePath,
    /// A single degree-4 vertex, all others degree 2.
    FourValent,
}

/// Maximum number of edge-disjoint paths between s and t with unit edge
/// capacities, by repeated augmenting search on the edge list.
fn edge_disjoint_paths(symbols: &[BundleSymbol], n: usize, s: usize, t: usize) -> usize {
    let mut capacity = vec![1i32; symbols.len()];
    let mut count = 0;
    loop {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut visited = vec![false; n];
        visited[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for (ei, &sym) in symbols.iter().enumerate() {
                if capacity[ei] == 0 {
                    continue;
                }
                let (a, b) = sym.endpoints(n.wrapping_sub(1));
                if a == b {
                    continue;
                }
                let next = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !visited[next] {
                    visited[next] = true;
                    prev[next] = Some((v, ei));
                    queue.push_back(next);
                }
            }
        }
        if !visited[t] {
            return count;
        }
        let mut v = t;
        while v != s {
            let (u, ei) = prev[v].unwrap();
            capacity[ei] = 0;
            v = u;
        }
        count += 1;
    }
}

/// Count k-tuples over L'_{k-1} whose graph matches the structural predicate;
/// equals the closed forms binom(k-1,2) k!(k-1)!/12 (three paths),
/// k!(k-1)!/8 (k^2+k-4)/2 (one path) and k!(k-1)!/8 (k+1) (four-valent).
pub fn enumerate_a(k: usize, variant: AVariant) -> Result<u64> {
    if !(2..=5).contains(&k) {
        return Err(Error::ParameterTooLarge {
            estimate: 10f64.powi(k as i32),
        });
    }
    let n = k - 1;
    let syms = alphabet(n, false);
    let mut count = 0u64;
    let mut tuple = vec![0usize; k];
    loop {
        let symbols: Vec<BundleSymbol> = tuple.iter().map(|&i| syms[i]).collect();
        let graph = TupleGraph::new(&symbols, n);
        if graph.components == 1 {
            let mut deg3 = Vec::new();
            let mut deg4 = Vec::new();
            let mut rest_degree_2 = true;
            for (v, &d) in graph.degrees.iter().enumerate() {
                match d {
                    3 => deg3.push(v),
                    4 => deg4.push(v),
                    2 => {}
                    _ => rest_degree_2 = false,
                }
            }
            let matches = match variant {
                AVariant::FourValent => rest_degree_2 && deg3.is_empty() && deg4.len() == 1,
                AVariant::ThreePaths | AVariant::OnePath => {
                    if rest_degree_2 && deg4.is_empty() && deg3.len() == 2 {
                        let paths = edge_disjoint_paths(&symbols, n, deg3[0], deg3[1]);
                        match variant {
                            AVariant::ThreePaths => paths == 3,
                            _ => paths == 1,
                        }
                    } else {
                        false
                    }
                }
            };
            if matches {
                count += 1;
            }
        }
        let mut c = 0;
        loop {
            if c == k {
                return Ok(count);
            }
            tuple[c] += 1;
            if tuple[c] < syms.len() {
                break;
            }
            tuple[c] = 0;
            c += 1;
        }
    }
}

pub fn closed_form_b(g: u64, k: u64) -> i64 {
    let sign = if k.is_multiple_of(2) { 1i64 } else { -1 };
    let fact_k: i64 = (2..=k as i64).product();
    let mut falling: i64 = 1;
    for j in 0..k {
        falling *= (g - j) as i64;
    }
    sign * fact_k * falling
}

pub fn closed_form_a(k: u64, variant: AVariant) -> u64 {
    let fact = |n: u64| (1..=n).product::<u64>();
    match variant {
        AVariant::ThreePaths => (binomial(k - 1, 2) as u64) * fact(k) * fact(k - 1) / 12,
        AVariant::OnePath => {
            if k == 2 {
                0
            } else {
                fact(k) * fact(k - 1) * (k * k + k - 4) / 16
            }
        }
        AVariant::FourValent => {
            if k == 2 {
                1
            } else {
                fact(k) * fact(k - 1) * (k + 1) / 8
            }
        }
    }
}

/// Exact evaluation of the g-th finite difference sum
/// sum_{k=0}^g (-1)^k f(k) binom(g,k) for an integer polynomial f given by
/// coefficients (constant first). Zero whenever deg f < g.
pub fn binom_identity_check(g: usize, coeffs: &[i128]) -> Result<i128> {
    let degree = coeffs.len().saturating_sub(1);
    if degree >= g || g > 20 {
        return Err(Error::DegreeTooHigh { degree, genus: g });
    }
    let mut total: i128 = 0;
    for k in 0..=g as u64 {
        let mut fk: i128 = 0;
        let mut pow: i128 = 1;
        for &c in coeffs {
            fk += c * pow;
            pow *= k as i128;
        }
        let sign = if k.is_multiple_of(2) { 1 } else { -1 };
        total += sign * fk * binomial(g as u64, k) as i128;
    }
    Ok(total)
}

/// sum_{k=3}^g (-1)^{k-1} binom(k-1,2) binom(g,k); equals 1 for every g >= 3
/// as a consequence of the binomial identity.
pub fn alternating_path_count_sum(g: u64) -> i128 {
    (3..=g)
        .map(|k| {
            let sign: i128 = if (k - 1).is_multiple_of(2) { 1 } else { -1 };
            sign * binomial(k - 1, 2) as i128 * binomial(g, k) as i128
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_closed_form_small() {
        // B_{g,0} = 1: the empty tuple, weighted by 1.
        for g in 1..=4 {
            assert_eq!(enumerate_b(g, 0).unwrap(), 1);
        }
        assert_eq!(enumerate_b(3, 1).unwrap(), -3);
        assert_eq!(enumerate_b(4, 2).unwrap(), 24);
    }

    #[test]
    fn b_matches_closed_form_up_to_4() {
        for g in 1..=4usize {
            for k in 0..=4.min(g) {
                let brute = enumerate_b(g, k).unwrap();
                let closed = closed_form_b(g as u64, k as u64);
                assert_eq!(brute, closed, "B_{{{g},{k}}}");
            }
        }
    }

    #[test]
    fn b_rejects_large_parameters() {
        assert!(matches!(
            enumerate_b(5, 2),
            Err(Error::ParameterTooLarge { .. })
        ));
    }

    #[test]
    fn a_variants_small_values() {
        assert_eq!(enumerate_a(2, AVariant::OnePath).unwrap(), 0);
        assert_eq!(enumerate_a(2, AVariant::FourValent).unwrap(), 1);
        assert_eq!(enumerate_a(3, AVariant::ThreePaths).unwrap(), 1);
        assert_eq!(enumerate_a(4, AVariant::ThreePaths).unwrap(), 36);
    }

    #[test]
    fn a_matches_closed_forms_up_to_5() {
        for k in 2..=5usize {
            for variant in [AVariant::ThreePaths, AVariant::OnePath, AVariant::FourValent] {
                let brute = enumerate_a(k, variant).unwrap();
                let closed = closed_form_a(k as u64, variant);
                assert_eq!(brute, closed, "k={k} {variant:?}");
            }
        }
    }

    #[test]
    fn binom_identity_constant_and_random() {
        assert_eq!(binom_identity_check(3, &[1]).unwrap(), 0);
        // Fixed degree-(g-1) polynomial at g = 7.
        let coeffs: Vec<i128> = vec![3, -1, 4, 1, -5, 9, -2];
        assert_eq!(binom_identity_check(7, &coeffs).unwrap(), 0);
        for g in 2..=20usize {
            let coeffs: Vec<i128> = (0..g).map(|j| ((j * 37 + 11) % 13) as i128 - 6).collect();
            assert_eq!(binom_identity_check(g, &coeffs).unwrap(), 0, "g={g}");
        }
    }

    #[test]
    fn binom_identity_rejects_high_degree() {
        assert!(binom_identity_check(3, &[0, 0, 0, 1]).is_err());
    }

    #[test]
    fn path_count_sum_is_one() {
        for g in 3..=12 {
            assert_eq!(alternating_path_count_sum(g), 1, "g={g}");
        }
    }

    #[test]
    fn weights_are_order_independent() {
        // Permuting a tuple never changes its weight or structural class.
        let syms = alphabet(3, true);
        let tuple = [syms[0], syms[4], syms[6]];
        let g1 = TupleGraph::new(&tuple, 4);
        let rev: Vec<_> = tuple.iter().rev().cloned().collect();
        let g2 = TupleGraph::new(&rev, 4);
        assert_eq!(g1.betti, g2.betti);
        assert_eq!(g1.degrees, g2.degrees);
    }
}
