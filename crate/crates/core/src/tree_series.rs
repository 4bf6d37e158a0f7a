//! Series solution of the integral equation as a sum over decorated rooted
//! trees, used to cross-check the iteration solver.
//!
//! Nodes are decorated by active charges γ' (Ω(γ') ≠ 0). The multi-cover
//! decorations mγ' of the plain tree sum are resummed node by node: a node
//! with k children carries Σ_m m^{k−1} (X^sf_{γ'})^m = Li_{1−k}(X^sf_{γ'})
//! in place of c(mγ')·X^sf_{mγ'}, with the powers of m coming from the
//! pairings on its k + 1 incident edges (the root counts the pairing with
//! the evaluated charge). The truncation is by number of nodes.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::complex::Complex64 as C64;
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

use crate::charge_lattice::{Charge, Lattice};
use crate::error::{Error, Result};
use crate::quadrature::Side;
use crate::rh_solver::{kernel_point, QuadratureGrid};
use crate::semiflat::{CoordinateValue, SemiflatFrame};

/// Default limit on the number of enumerated trees.
pub const DEFAULT_BUDGET: usize = 200_000;

/// c(γ) = Σ_{n≥1} Ω(γ/n)/n² over the divisors of γ.
pub fn multicover(entries: &[(Charge, i64)], gamma: &Charge) -> BigRational {
    let mut c = BigRational::zero();
    let g = gamma.divisibility();
    for n in 1..=g.max(0) {
        if let Some(base) = gamma.divide(n) {
            let omega: i64 = entries.iter().filter(|(q, _)| *q == base).map(|(_, o)| *o).sum();
            if omega != 0 {
                c += BigRational::new(BigInt::from(omega), BigInt::from(n * n));
            }
        }
    }
    c
}

/// Rooted tree with each node decorated by an index into a charge table.
/// Children are kept sorted, which makes equal trees structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DecoratedTree {
    pub label: usize,
    pub children: Vec<DecoratedTree>,
}

impl DecoratedTree {
    pub fn leaf(label: usize) -> Self {
        DecoratedTree {
            label,
            children: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    /// Order of the automorphism group of the decorated tree.
    pub fn automorphisms(&self) -> u128 {
        let mut total: u128 = 1;
        let mut i = 0;
        while i < self.children.len() {
            let mut j = i;
            while j < self.children.len() && self.children[j] == self.children[i] {
                j += 1;
            }
            let mult = (j - i) as u128;
            let sub = self.children[i].automorphisms();
            total *= (1..=mult).product::<u128>() * sub.pow(mult as u32);
            i = j;
        }
        total
    }

    /// Bracketed form such as `0(1,2(3))`.
    pub fn render(&self) -> String {
        if self.children.is_empty() {
            return self.label.to_string();
        }
        let inner: Vec<String> = self.children.iter().map(|c| c.render()).collect();
        format!("{}({})", self.label, inner.join(","))
    }
}

/// A tree together with its exact weight
/// c(T) = (1/|Aut T|) Π Ω(γᵢ) Π_{edges (i,j)} ⟨γᵢ, γⱼ⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTree {
    pub tree: DecoratedTree,
    pub weight: BigRational,
}

/// Decoration table: the active charges with their Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct Decorations {
    pub charges: Vec<Charge>,
    pub omegas: Vec<i64>,
    pairings: Vec<Vec<i64>>,
}

impl Decorations {
    pub fn new(lattice: &Lattice, active: &[(Charge, i64)]) -> Result<Self> {
        let active: Vec<&(Charge, i64)> = active.iter().filter(|(_, o)| *o != 0).collect();
        for (g, _) in &active {
            lattice.check(g)?;
        }
        let charges: Vec<Charge> = active.iter().map(|(g, _)| g.clone()).collect();
        let omegas = active.iter().map(|(_, o)| *o).collect();
        let pairings = charges
            .iter()
            .map(|a| charges.iter().map(|b| lattice.pair(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Decorations {
            charges,
            omegas,
            pairings,
        })
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn pairing(&self, i: usize, j: usize) -> i64 {
        self.pairings[i][j]
    }

    /// Exact weight, zero when an edge pairing vanishes.
    pub fn weight(&self, t: &DecoratedTree) -> BigRational {
        let mut num = BigInt::from(self.omegas[t.label]);
        fn walk(d: &Decorations, t: &DecoratedTree, num: &mut BigInt) {
            for c in &t.children {
                *num *= d.omegas[c.label] * d.pairing(t.label, c.label);
                walk(d, c, num);
            }
        }
        walk(self, t, &mut num);
        BigRational::new(num, BigInt::from(t.automorphisms()))
    }
}

/// All decorated trees with at most `cutoff` nodes and nonzero weight.
pub fn enumerate_trees(dec: &Decorations, cutoff: usize, budget: usize) -> Result<Vec<WeightedTree>> {
    if cutoff == 0 {
        return Err(Error::InvalidParameter("tree cutoff must be at least 1".into()));
    }
    // by_size[n][label]: trees with n nodes and that root label
    let mut by_size: Vec<Vec<Vec<DecoratedTree>>> = vec![Vec::new(); cutoff + 1];
    let mut count = 0usize;
    for n in 1..=cutoff {
        let mut level = vec![Vec::new(); dec.len()];
        for (root, slot) in level.iter_mut().enumerate() {
            // candidate children: trees of size < n whose root pairs nontrivially
            let mut pool: Vec<&DecoratedTree> = Vec::new();
            for trees in by_size.iter().take(n).skip(1) {
                for (label, list) in trees.iter().enumerate() {
                    if dec.pairing(root, label) != 0 {
                        pool.extend(list.iter());
                    }
                }
            }
            pool.sort();
            let mut chosen = Vec::new();
            multisets(&pool, 0, n - 1, &mut chosen, &mut |kids| {
                slot.push(DecoratedTree {
                    label: root,
                    children: kids.iter().map(|k| (*k).clone()).collect(),
                });
            });
            count += slot.len();
            if count > budget {
                return Err(Error::BudgetExceeded(budget));
            }
        }
        by_size[n] = level;
    }
    let mut out = Vec::with_capacity(count);
    for level in by_size.into_iter().skip(1) {
        for tree in level.into_iter().flatten() {
            let weight = dec.weight(&tree);
            if !weight.is_zero() {
                out.push(WeightedTree { tree, weight });
            }
        }
    }
    Ok(out)
}

/// Non-decreasing selections from `pool` (sorted) with sizes summing to
/// exactly `remaining`.
fn multisets<'a>(
    pool: &[&'a DecoratedTree],
    start: usize,
    remaining: usize,
    chosen: &mut Vec<&'a DecoratedTree>,
    emit: &mut dyn FnMut(&[&'a DecoratedTree]),
) {
    if remaining == 0 {
        emit(chosen);
        return;
    }
    for i in start..pool.len() {
        if i > start && pool[i].cmp(pool[i - 1]) == Ordering::Equal {
            continue;
        }
        let s = pool[i].size();
        if s > remaining {
            continue;
        }
        chosen.push(pool[i]);
        multisets(pool, i, remaining - s, chosen, emit);
        chosen.pop();
    }
}

/// Li_{1−k}(x): −log(1 − x) for k = 0, x(Σ_j A(n,j)xʲ)/(1 − x)^{n+1} with
/// n = k − 1 and Eulerian numbers A otherwise.
pub fn node_polylog(k: usize, x: C64) -> C64 {
    if k == 0 {
        return -(1.0 - x).ln();
    }
    let n = k - 1;
    if n == 0 {
        return x / (1.0 - x);
    }
    let mut poly = C64::zero();
    let mut xp = C64::one();
    for j in 0..n {
        poly += eulerian(n, j) * xp;
        xp *= x;
    }
    x * poly / (1.0 - x).powi(n as i32 + 1)
}

fn eulerian(n: usize, m: usize) -> f64 {
    // A(n, m) = Σ_{i=0}^{m} (−1)^i C(n+1, i) (m + 1 − i)^n
    let mut s = 0.0;
    let mut binom = 1.0;
    for i in 0..=m {
        let term = binom * ((m + 1 - i) as f64).powi(n as i32);
        s += if i % 2 == 0 { term } else { -term };
        binom = binom * (n + 1 - i) as f64 / (i + 1) as f64;
    }
    s
}

/// Evaluator for G_T on the quadrature grids of the BPS rays.
pub struct TreeEvaluator<'a> {
    frame: &'a SemiflatFrame,
    grids: &'a [QuadratureGrid],
    dec: &'a Decorations,
    /// ray index of each decoration
    ray_of: Vec<usize>,
    delta: f64,
    cache: std::sync::Mutex<BTreeMap<(DecoratedTree, usize), Vec<C64>>>,
}

impl<'a> TreeEvaluator<'a> {
    /// Every decoration must lie on one of the grids' rays.
    pub fn new(
        frame: &'a SemiflatFrame,
        grids: &'a [QuadratureGrid],
        dec: &'a Decorations,
        delta: f64,
    ) -> Result<Self> {
        let mut ray_of = Vec::with_capacity(dec.len());
        for g in &dec.charges {
            let r = grids
                .iter()
                .position(|grid| grid.ray.charges.iter().any(|rc| &rc.charge == g))
                .ok_or_else(|| Error::InvalidParameter(format!("charge {g} is on no grid ray")))?;
            ray_of.push(r);
        }
        Ok(TreeEvaluator {
            frame,
            grids,
            dec,
            ray_of,
            delta,
            cache: std::sync::Mutex::new(BTreeMap::new()),
        })
    }

    /// Integrand of G_T at the nodes of the root ray.
    fn integrand(&self, t: &DecoratedTree) -> Vec<C64> {
        let ray = self.ray_of[t.label];
        if let Some(v) = self.cache.lock().unwrap().get(&(t.clone(), ray)) {
            return v.clone();
        }
        let grid = &self.grids[ray];
        let gamma = &self.dec.charges[t.label];
        let k = t.children.len();
        let children: Vec<Vec<C64>> = t.children.iter().map(|c| self.integrand(c)).collect();
        let values: Vec<C64> = grid
            .rule
            .nodes
            .iter()
            .map(|s| {
                let zeta = grid.ray.direction * s.exp();
                let xsf = self.frame.log_xsf(gamma, zeta).exp();
                let mut v = node_polylog(k, xsf);
                for (c, cv) in t.children.iter().zip(&children) {
                    v *= self.g_from_values(c, cv, zeta, None);
                }
                v
            })
            .collect();
        self.cache.lock().unwrap().insert((t.clone(), ray), values.clone());
        values
    }

    fn g_from_values(&self, t: &DecoratedTree, values: &[C64], zeta: C64, side: Option<Side>) -> C64 {
        let grid = &self.grids[self.ray_of[t.label]];
        let w = kernel_point(zeta, grid.ray.direction);
        grid.rule.coth_integral(values, w, side.unwrap_or(Side::Auto)) / C64::new(0.0, 4.0 * std::f64::consts::PI)
    }

    /// G_T(ζ) for ζ off the root ray.
    pub fn g_integral(&self, t: &DecoratedTree, zeta: C64) -> Result<C64> {
        let grid = &self.grids[self.ray_of[t.label]];
        if (zeta / grid.ray.direction).arg().abs() < self.delta {
            return Err(Error::DirectedLimitRequired(format!(
                "ζ = {zeta} is on the ray of {}",
                self.dec.charges[t.label]
            )));
        }
        let values = self.integrand(t);
        Ok(self.g_from_values(t, &values, zeta, None))
    }

    /// Σ_T ⟨γ, γ_T⟩ c(T) G_T(ζ).
    pub fn correction(&self, trees: &[WeightedTree], gamma: &Charge, zeta: C64) -> Result<C64> {
        self.frame.lattice.check(gamma)?;
        let mut total = C64::zero();
        for wt in trees {
            let p = self.frame.lattice.pair(gamma, &self.dec.charges[wt.tree.label])?;
            if p == 0 {
                continue;
            }
            let w = wt.weight.to_f64().unwrap_or(f64::NAN);
            total += p as f64 * w * self.g_integral(&wt.tree, zeta)?;
        }
        Ok(total)
    }

    /// X_γ(ζ) from the truncated tree sum.
    pub fn series_solution(&self, trees: &[WeightedTree], gamma: &Charge, zeta: C64) -> Result<CoordinateValue> {
        let log = self.frame.log_xsf(gamma, zeta) + self.correction(trees, gamma, zeta)?;
        Ok(CoordinateValue::from_log(gamma.clone(), zeta, log))
    }
}
