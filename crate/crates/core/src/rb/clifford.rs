// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit Clifford group with CZ as the only entangler.
//!
//! Single-qubit Cliffords use virtual Z rotations, so each costs at most one
//! physical `Xπ` or `Xπ/2`. Two-qubit elements are generated breadth first
//! as `L_k · CZ · … · CZ · L_0` over layers `L = C1 ⊗ C1`, keeping for every
//! element the decomposition with the fewest CZs and, among those, the
//! fewest non-Z single-qubit gates. Ties go to the first decomposition found
//! in enumeration order.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C = Complex64;
pub type Unitary = Matrix4<C>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    Q1,
    Q2,
}

/// Virtual Z rotation angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZAngle {
    Pi,
    MinusPi,
    HalfPi,
    MinusHalfPi,
}

impl ZAngle {
    pub fn radians(self) -> f64 {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            ZAngle::Pi => PI,
            ZAngle::MinusPi => -PI,
            ZAngle::HalfPi => FRAC_PI_2,
            ZAngle::MinusHalfPi => -FRAC_PI_2,
        }
    }
}

/// Primitive gates: `Xπ`, `Xπ/2`, virtual `Z`, and `CZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    X(Qubit),
    X2(Qubit),
    Z(Qubit, ZAngle),
    Cz,
}

impl Gate {
    pub fn is_non_z_single(self) -> bool {
        matches!(self, Gate::X(_) | Gate::X2(_))
    }

    pub fn unitary(self) -> Unitary {
        match self {
            Gate::X(q) => embed(rx(std::f64::consts::PI), q),
            Gate::X2(q) => embed(rx(std::f64::consts::FRAC_PI_2), q),
            Gate::Z(q, a) => embed(rz(a.radians()), q),
            Gate::Cz => cz(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = |q: &Qubit| match q {
            Qubit::Q1 => 1,
            Qubit::Q2 => 2,
        };
        match self {
            Gate::X(k) => write!(f, "X{}", q(k)),
            Gate::X2(k) => write!(f, "X2_{}", q(k)),
            Gate::Z(k, a) => {
                let s = match a {
                    ZAngle::Pi => "+pi",
                    ZAngle::MinusPi => "-pi",
                    ZAngle::HalfPi => "+pi/2",
                    ZAngle::MinusHalfPi => "-pi/2",
                };
                write!(f, "Z{}({s})", q(k))
            }
            Gate::Cz => write!(f, "CZ"),
        }
    }
}

type M2 = nalgebra::Matrix2<C>;

fn rx(theta: f64) -> M2 {
    let (s, c) = (theta / 2.0).sin_cos();
    M2::new(
        C::new(c, 0.0),
        C::new(0.0, -s),
        C::new(0.0, -s),
        C::new(c, 0.0),
    )
}

fn rz(theta: f64) -> M2 {
    M2::new(
        C::from_polar(1.0, -theta / 2.0),
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
        C::from_polar(1.0, theta / 2.0),
    )
}

fn kron2(a: &M2, b: &M2) -> Unitary {
    Unitary::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

fn embed(u: M2, q: Qubit) -> Unitary {
    match q {
        Qubit::Q1 => kron2(&u, &M2::identity()),
        Qubit::Q2 => kron2(&M2::identity(), &u),
    }
}

pub fn cz() -> Unitary {
    Unitary::from_diagonal(&nalgebra::Vector4::new(
        C::new(1.0, 0.0),
        C::new(1.0, 0.0),
        C::new(1.0, 0.0),
        C::new(-1.0, 0.0),
    ))
}

/// Ordered gate list; the first gate acts first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateSeq(pub Vec<Gate>);

impl GateSeq {
    pub fn unitary(&self) -> Unitary {
        self.0
            .iter()
            .fold(Unitary::identity(), |acc, g| g.unitary() * acc)
    }

    pub fn cz_count(&self) -> usize {
        self.0.iter().filter(|g| matches!(g, Gate::Cz)).count()
    }

    pub fn non_z_count(&self) -> usize {
        self.0.iter().filter(|g| g.is_non_z_single()).count()
    }

    /// Products of the single-qubit gates between consecutive CZs
    /// (`cz_count + 1` entries).
    pub fn segments(&self) -> Vec<Unitary> {
        let mut out = vec![Unitary::identity()];
        for g in &self.0 {
            match g {
                Gate::Cz => out.push(Unitary::identity()),
                other => {
                    let last = out.last_mut().expect("non-empty");
                    *last = other.unitary() * *last;
                }
            }
        }
        out
    }
}

impl fmt::Display for GateSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Hashable representative of a unitary up to global phase.
pub type ProjectiveKey = [i64; 32];

const KEY_SCALE: f64 = 1e6;

pub fn projective_key(u: &Unitary) -> ProjectiveKey {
    let pivot = u
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or(C::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    let mut key = [0i64; 32];
    // column-major iteration; the pivot is the first nonzero in that order
    for (k, z) in u.iter().enumerate() {
        let w = z * phase;
        key[2 * k] = (w.re * KEY_SCALE).round() as i64;
        key[2 * k + 1] = (w.im * KEY_SCALE).round() as i64;
    }
    key
}

/// `‖a − e^{iφ} b‖_max` minimized over the global phase.
pub fn projective_distance(a: &Unitary, b: &Unitary) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C::new(1.0, 0.0)
    };
    (a - b * phase).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct CliffordElement {
    pub seq: GateSeq,
    pub unitary: Unitary,
    /// Single-qubit products between CZs, for noisy simulation.
    pub segments: Vec<Unitary>,
}

impl CliffordElement {
    pub fn cz_count(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn non_z_count(&self) -> usize {
        self.seq.non_z_count()
    }
}

/// The 11520-element two-qubit Clifford group.
#[derive(Debug, Clone)]
pub struct CliffordGroup {
    elements: Vec<CliffordElement>,
    index: HashMap<ProjectiveKey, usize>,
}

/// The 24 single-qubit Cliffords on `q` as minimal virtual-Z sequences,
/// identity first.
pub fn single_qubit_cliffords(q: Qubit) -> Vec<GateSeq> {
    let zs: [Option<ZAngle>; 4] = [
        None,
        Some(ZAngle::HalfPi),
        Some(ZAngle::Pi),
        Some(ZAngle::MinusHalfPi),
    ];
    let mut candidates: Vec<GateSeq> = Vec::new();
    for z in zs {
        candidates.push(GateSeq(z.map(|a| Gate::Z(q, a)).into_iter().collect()));
    }
    for x in [Gate::X2(q), Gate::X(q)] {
        for pre in zs {
            for post in zs {
                let mut g = Vec::new();
                g.extend(pre.map(|a| Gate::Z(q, a)));
                g.push(x);
                g.extend(post.map(|a| Gate::Z(q, a)));
                candidates.push(GateSeq(g));
            }
        }
    }
    // stable sort keeps enumeration order among equal costs
    candidates.sort_by_key(|s| (s.non_z_count(), s.0.len()));
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for s in candidates {
        let key = projective_key(&s.unitary());
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
            e.insert(());
            out.push(s);
        }
    }
    debug_assert_eq!(out.len(), 24);
    out
}

impl CliffordGroup {
    pub fn build() -> Self {
        let c1 = single_qubit_cliffords(Qubit::Q1);
        let c2 = single_qubit_cliffords(Qubit::Q2);
        let layers: Vec<(GateSeq, Unitary, usize)> = c1
            .iter()
            .flat_map(|a| {
                c2.iter().map(move |b| {
                    let mut g = a.0.clone();
                    g.extend_from_slice(&b.0);
                    let s = GateSeq(g);
                    let u = s.unitary();
                    let cost = s.non_z_count();
                    (s, u, cost)
                })
            })
            .collect();

        struct Node {
            unitary: Unitary,
            cost: usize,
            parent: Option<usize>,
            layer: usize,
        }
        let mut nodes: Vec<Node> = Vec::new();
        let mut index: HashMap<ProjectiveKey, usize> = HashMap::new();
        for (k, (_, u, cost)) in layers.iter().enumerate() {
            let key = projective_key(u);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key) {
                e.insert(nodes.len());
                nodes.push(Node {
                    unitary: *u,
                    cost: *cost,
                    parent: None,
                    layer: k,
                });
            }
        }
        let czu = cz();
        let mut level = 0..nodes.len();
        while !level.is_empty() {
            let start = nodes.len();
            let mut fresh: HashMap<ProjectiveKey, usize> = HashMap::new();
            for p in level.clone() {
                let base = czu * nodes[p].unitary;
                let pcost = nodes[p].cost;
                for (k, (_, lu, lcost)) in layers.iter().enumerate() {
                    let u = lu * base;
                    let key = projective_key(&u);
                    if index.contains_key(&key) {
                        continue;
                    }
                    let cost = pcost + lcost;
                    match fresh.get(&key) {
                        Some(&i) => {
                            if cost < nodes[i].cost {
                                nodes[i] = Node {
                                    unitary: u,
                                    cost,
                                    parent: Some(p),
                                    layer: k,
                                };
                            }
                        }
                        None => {
                            fresh.insert(key, nodes.len());
                            nodes.push(Node {
                                unitary: u,
                                cost,
                                parent: Some(p),
                                layer: k,
                            });
                        }
                    }
                }
            }
            index.extend(fresh);
            level = start..nodes.len();
        }

        let mut seqs: Vec<GateSeq> = Vec::with_capacity(nodes.len());
        for n in &nodes {
            let mut g = match n.parent {
                Some(p) => {
                    let mut g = seqs[p].0.clone();
                    g.push(Gate::Cz);
                    g
                }
                None => Vec::new(),
            };
            g.extend_from_slice(&layers[n.layer].0 .0);
            seqs.push(GateSeq(g));
        }
        let elements = nodes
            .iter()
            .zip(seqs)
            .map(|(n, seq)| CliffordElement {
                segments: seq.segments(),
                unitary: n.unitary,
                seq,
            })
            .collect();
        Self { elements, index }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, k: usize) -> &CliffordElement {
        &self.elements[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CliffordElement> {
        self.elements.iter()
    }

    /// Index of the element equal to `u` up to global phase.
    pub fn find(&self, u: &Unitary) -> Option<usize> {
        self.index.get(&projective_key(u)).copied()
    }

    /// Index of the inverse of `u`.
    pub fn inverse_of(&self, u: &Unitary) -> Option<usize> {
        self.find(&u.adjoint())
    }

    pub fn identity_index(&self) -> usize {
        self.find(&Unitary::identity())
            .expect("identity is in the group")
    }
}

static GROUP: OnceLock<CliffordGroup> = OnceLock::new();

/// Shared, lazily built group.
pub fn clifford_group() -> &'static CliffordGroup {
    GROUP.get_or_init(CliffordGroup::build)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionStats {
    pub elements: usize,
    /// Element counts with 0, 1, 2, 3 CZs.
    pub cz_class_sizes: Vec<usize>,
    pub avg_cz: f64,
    pub avg_non_z_1q: f64,
}

/// Exact averages over the group for this decomposition.
pub fn decomposition_stats() -> DecompositionStats {
    let g = clifford_group();
    let mut classes = vec![0usize; 4];
    let mut cz_total = 0usize;
    let mut nz_total = 0usize;
    for e in g.iter() {
        let c = e.cz_count();
        if c >= classes.len() {
            classes.resize(c + 1, 0);
        }
        classes[c] += 1;
        cz_total += c;
        nz_total += e.non_z_count();
    }
    DecompositionStats {
        elements: g.len(),
        cz_class_sizes: classes,
        avg_cz: cz_total as f64 / g.len() as f64,
        avg_non_z_1q: nz_total as f64 / g.len() as f64,
    }
}
