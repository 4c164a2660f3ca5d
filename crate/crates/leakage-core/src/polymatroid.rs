//! Leakage lower bounds from polymatroidal rank functions.
//!
//! Any mechanism that perfectly decodes induces a set function
//! `g(S) = H(Y | X_{S^c}) - H(Y | X_{[n]})` that is zero at the empty set,
//! monotone, submodular, and pins `g(G u W) - g(G) = H(X_W)` for every user
//! `i`, every nonempty `W` inside its must-decode set, and every `G` avoiding
//! `W` and the user's side information. Minimizing `g(Z^c) - g(Z^c n V^c)`
//! over all such `g` therefore lower-bounds `I(X_V; Y | X_Z)` for every
//! admissible mechanism, and with suitable `(V, Z)` choices assembles into a
//! leakage lower bound.
//!
//! The program has one variable per subset of sources. Monotonicity and
//! submodularity are emitted in elemental form, which generates the same
//! polyhedron as the all-pairs form at a fraction of the rows; the all-pairs
//! form stays available for cross-checking.

use crate::error::{Error, Result};
use crate::simplex::{self, Constraint, ConstraintOp, LinearProgram, LpStatus};
use crate::system::{SourceSet, SystemSpec};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintFamily {
    /// `n 2^(n-1)` monotonicity rows and `C(n,2) 2^(n-2)` submodularity rows.
    Elemental,
    /// Every proper subset pair (monotonicity) and every incomparable pair
    /// (submodularity). Exponentially many rows; for regression tests only.
    AllPairs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankConstraintKind {
    EmptySetZero,
    Monotonicity,
    Submodularity,
    Decoding,
}

/// A sparse row over the subset variables `g(mask)`.
#[derive(Clone, Debug)]
pub struct RankConstraint {
    pub kind: RankConstraintKind,
    /// `(subset mask, coefficient)` pairs.
    pub terms: Vec<(u32, f64)>,
    pub op: ConstraintOp,
    pub rhs: f64,
}

impl RankConstraint {
    /// Left-hand side evaluated at explicit rank values indexed by mask.
    pub fn evaluate(&self, g: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(mask, c)| c * g[mask as usize])
            .sum()
    }

    pub fn satisfied_by(&self, g: &[f64], tol: f64) -> bool {
        let lhs = self.evaluate(g);
        match self.op {
            ConstraintOp::Eq => (lhs - self.rhs).abs() <= tol,
            ConstraintOp::Ge => lhs >= self.rhs - tol,
            ConstraintOp::Le => lhs <= self.rhs + tol,
        }
    }
}

/// The rank minimization program for one `(V, Z)` query.
#[derive(Clone, Debug)]
pub struct PolymatroidProgram {
    ground_size: usize,
    /// Objective: minimize `g(maximize_mask) - g(subtract_mask)`.
    objective_add: u32,
    objective_sub: u32,
    rows: Vec<RankConstraint>,
}

impl PolymatroidProgram {
    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn num_variables(&self) -> usize {
        1 << self.ground_size
    }

    pub fn rows(&self) -> &[RankConstraint] {
        &self.rows
    }

    pub fn count_rows(&self, kind: RankConstraintKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    pub fn to_linear_program(&self) -> LinearProgram {
        let nv = self.num_variables();
        let mut objective = vec![0.0; nv];
        objective[self.objective_add as usize] += 1.0;
        objective[self.objective_sub as usize] -= 1.0;
        let constraints = self
            .rows
            .iter()
            .map(|r| {
                let mut coeffs = vec![0.0; nv];
                for &(mask, c) in &r.terms {
                    coeffs[mask as usize] += c;
                }
                Constraint {
                    coeffs,
                    op: r.op,
                    rhs: r.rhs,
                }
            })
            .collect();
        LinearProgram {
            num_vars: nv,
            objective,
            constraints,
        }
    }

    /// Row-by-row check of explicit rank values (for witness tests and
    /// external cross-checks).
    pub fn violations_of(&self, g: &[f64], tol: f64) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.satisfied_by(g, tol))
            .map(|(i, _)| i)
            .collect()
    }

    /// Plain-text listing for external solver cross-checks.
    pub fn dump(&self) -> String {
        fn var(mask: u32) -> String {
            format!("g{}", SourceSet(mask))
        }
        let mut out = String::new();
        out.push_str(&format!(
            "# rank program over {} subset variables; g{{...}} lists 1-based members\n",
            self.num_variables()
        ));
        out.push_str(&format!(
            "minimize {} - {}\n",
            var(self.objective_add),
            var(self.objective_sub)
        ));
        out.push_str("subject to\n");
        for r in &self.rows {
            let mut lhs = String::new();
            for (k, &(mask, c)) in r.terms.iter().enumerate() {
                if k > 0 || c < 0.0 {
                    lhs.push_str(if c < 0.0 { " - " } else { " + " });
                }
                if c.abs() != 1.0 {
                    lhs.push_str(&format!("{} ", c.abs()));
                }
                lhs.push_str(&var(mask));
            }
            let op = match r.op {
                ConstraintOp::Eq => "=",
                ConstraintOp::Ge => ">=",
                ConstraintOp::Le => "<=",
            };
            out.push_str(&format!("{} {} {}  [{:?}]\n", lhs.trim_start(), op, r.rhs, r.kind));
        }
        out
    }
}

/// Builds the elemental-form program for `min g(Z^c) - g(Z^c n V^c)`.
pub fn build_program(spec: &SystemSpec, v: SourceSet, z: SourceSet) -> Result<PolymatroidProgram> {
    build_program_with(spec, v, z, ConstraintFamily::Elemental)
}

pub fn build_program_with(
    spec: &SystemSpec,
    v: SourceSet,
    z: SourceSet,
    family: ConstraintFamily,
) -> Result<PolymatroidProgram> {
    if !v.is_disjoint_from(z) {
        return Err(Error::OverlappingAxes);
    }
    let n = spec.num_sources();
    let full = SourceSet::full(n).0;
    let nv = 1u32 << n;
    let mut rows = Vec::new();
    rows.push(RankConstraint {
        kind: RankConstraintKind::EmptySetZero,
        terms: vec![(0, 1.0)],
        op: ConstraintOp::Eq,
        rhs: 0.0,
    });
    match family {
        ConstraintFamily::Elemental => {
            for i in 0..n {
                let bit = 1u32 << i;
                for s in 0..nv {
                    if s & bit == 0 {
                        rows.push(RankConstraint {
                            kind: RankConstraintKind::Monotonicity,
                            terms: vec![(s | bit, 1.0), (s, -1.0)],
                            op: ConstraintOp::Ge,
                            rhs: 0.0,
                        });
                    }
                }
            }
            for i in 0..n {
                for j in i + 1..n {
                    let bi = 1u32 << i;
                    let bj = 1u32 << j;
                    for s in 0..nv {
                        if s & (bi | bj) == 0 {
                            rows.push(RankConstraint {
                                kind: RankConstraintKind::Submodularity,
                                terms: vec![
                                    (s | bi, 1.0),
                                    (s | bj, 1.0),
                                    (s | bi | bj, -1.0),
                                    (s, -1.0),
                                ],
                                op: ConstraintOp::Ge,
                                rhs: 0.0,
                            });
                        }
                    }
                }
            }
        }
        ConstraintFamily::AllPairs => {
            for s in 0..nv {
                for s2 in 0..nv {
                    if s != s2 && s & !s2 == 0 {
                        rows.push(RankConstraint {
                            kind: RankConstraintKind::Monotonicity,
                            terms: vec![(s2, 1.0), (s, -1.0)],
                            op: ConstraintOp::Ge,
                            rhs: 0.0,
                        });
                    }
                }
            }
            for s in 0..nv {
                for s2 in s + 1..nv {
                    let comparable = s & !s2 == 0 || s2 & !s == 0;
                    if !comparable {
                        rows.push(RankConstraint {
                            kind: RankConstraintKind::Submodularity,
                            terms: vec![(s, 1.0), (s2, 1.0), (s | s2, -1.0), (s & s2, -1.0)],
                            op: ConstraintOp::Ge,
                            rhs: 0.0,
                        });
                    }
                }
            }
        }
    }
    // decoding identities, deduplicated across users and subset choices
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    for u in spec.users() {
        let w_full = u.must_decode.0;
        let mut w = w_full;
        // nonempty submasks of the must-decode set
        while w > 0 {
            let free = full & !w & !u.side_info.0;
            let mut g = free;
            loop {
                let key = (g | w, g);
                if seen.insert(key) {
                    let h_w = spec.sources().entropy_of(SourceSet(w));
                    rows.push(RankConstraint {
                        kind: RankConstraintKind::Decoding,
                        terms: vec![(g | w, 1.0), (g, -1.0)],
                        op: ConstraintOp::Eq,
                        rhs: h_w,
                    });
                }
                if g == 0 {
                    break;
                }
                g = (g - 1) & free;
            }
            w = (w - 1) & w_full;
        }
    }
    let zc = full & !z.0;
    Ok(PolymatroidProgram {
        ground_size: n,
        objective_add: zc,
        objective_sub: zc & !v.0,
        rows,
    })
}

/// The solved program: optimum in bits plus the rank values at the optimum.
#[derive(Clone, Debug)]
pub struct RankSolution {
    pub optimal_bits: f64,
    pub rank_values: Vec<f64>,
}

/// Solves a program, reporting infeasible/unbounded outcomes as errors
/// rather than clamping them.
pub fn solve_program(program: &PolymatroidProgram) -> Result<RankSolution> {
    let solution = simplex::solve(&program.to_linear_program());
    match solution.status {
        LpStatus::Optimal => Ok(RankSolution {
            optimal_bits: solution.objective_value,
            rank_values: solution.values,
        }),
        status => Err(Error::LpNotOptimal(status)),
    }
}

/// `min g(Z^c) - g(Z^c n V^c)` in bits: the rank-program floor on
/// `I(X_V; Y | X_Z)`. Zero by construction when `V` is empty.
pub fn information_floor(spec: &SystemSpec, v: SourceSet, z: SourceSet) -> Result<f64> {
    let program = build_program(spec, v, z)?;
    Ok(solve_program(&program)?.optimal_bits)
}

/// One user's contribution to the assembled bound.
#[derive(Clone, Debug, PartialEq)]
pub struct UserBoundTerm {
    /// 1-based user index.
    pub user: usize,
    /// Whether the user's guess set lies inside the adversary's unknown set,
    /// making the term eligible for the maximum.
    pub counted: bool,
    pub threshold_bits: f64,
    pub must_decode_entropy_bits: f64,
    pub side_info_floor_bits: f64,
    pub term_bits: f64,
}

/// The assembled polymatroid lower bound and its breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct PolymatroidBound {
    pub bits: f64,
    /// `min` over rank functions for the full unknown set, `(V,Z) = (Q,P)`.
    pub base_floor_bits: f64,
    pub per_user: Vec<UserBoundTerm>,
}

/// Assembles the leakage lower bound
/// `max( floor(Q, P), max_i d_i + H(X_{W_i n Q}) + floor(A_i n Q, P) )`,
/// the inner max running over users whose guess set lies inside `Q`.
pub fn polymatroid_lower_bound(spec: &SystemSpec) -> Result<PolymatroidBound> {
    let q = spec.adversary_unknown();
    let p = spec.adversary_known();
    let base = information_floor(spec, q, p)?;
    let mut bits = base;
    let mut per_user = Vec::with_capacity(spec.num_users());
    for i in 0..spec.num_users() {
        let sets = spec.derived_sets(i);
        let counted = sets.guess.is_subset_of(q);
        let threshold = spec.user(i).gain_threshold;
        let decode_entropy = spec.sources().entropy_of(sets.must_decode_in_q);
        let side_floor = information_floor(spec, sets.side_info_in_q, p)?;
        let term = threshold + decode_entropy + side_floor;
        if counted {
            bits = bits.max(term);
        }
        per_user.push(UserBoundTerm {
            user: i + 1,
            counted,
            threshold_bits: threshold,
            must_decode_entropy_bits: decode_entropy,
            side_info_floor_bits: side_floor,
            term_bits: term,
        });
    }
    Ok(PolymatroidBound {
        bits,
        base_floor_bits: base,
        per_user,
    })
}
