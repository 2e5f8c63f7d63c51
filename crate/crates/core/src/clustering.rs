//! Two-stage tap clustering: K-means centroids, then a soft decision that
//! lets weakly-held taps share two centroids.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::scalar::{dist_sqr, zero, Cplx, Real};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub seed: u64,
    pub max_iter: usize,
    /// Absolute centroid displacement below which iteration stops.
    pub tol: f64,
    /// Rescale fitted centroids onto the mean modulus of the points.
    pub renormalize: bool,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            renormalize: false,
        }
    }
}

/// Hard partition of the taps around `N_c` centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlan<T: Real> {
    centroids: Vec<Cplx<T>>,
    assignment: Vec<usize>,
    sse: T,
    sse_trace: Vec<T>,
}

impl<T: Real> ClusterPlan<T> {
    /// Assemble a plan from explicit centroids and a per-tap assignment.
    pub fn from_parts(
        centroids: Vec<Cplx<T>>,
        assignment: Vec<usize>,
        points: &[Cplx<T>],
    ) -> Result<Self> {
        if centroids.is_empty() {
            return param("a cluster plan needs at least one centroid");
        }
        if assignment.len() != points.len() {
            return param(format!(
                "assignment covers {} taps, expected {}",
                assignment.len(),
                points.len()
            ));
        }
        if let Some(&bad) = assignment.iter().find(|&&c| c >= centroids.len()) {
            return param(format!("assignment refers to missing centroid {bad}"));
        }
        let sse = sse_of(points, &centroids, &assignment);
        Ok(ClusterPlan {
            centroids,
            assignment,
            sse,
            sse_trace: vec![sse],
        })
    }

    /// One cluster per tap, centroid equal to the tap itself.
    pub fn identity(points: &[Cplx<T>]) -> Result<Self> {
        Self::from_parts(points.to_vec(), (0..points.len()).collect(), points)
    }

    pub fn centroids(&self) -> &[Cplx<T>] {
        &self.centroids
    }

    pub fn n_clusters(&self) -> usize {
        self.centroids.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Within-cluster sum of squared distances.
    pub fn sse(&self) -> T {
        self.sse
    }

    /// SSE after every Lloyd iteration, ending with the final fit.
    pub fn sse_trace(&self) -> &[T] {
        &self.sse_trace
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

fn sse_of<T: Real>(points: &[Cplx<T>], centroids: &[Cplx<T>], assignment: &[usize]) -> T {
    points
        .iter()
        .zip(assignment)
        .fold(T::zero(), |acc, (p, &c)| acc + dist_sqr(*p, centroids[c]))
}

/// Index of the closest centroid; equal distances go to the lower index.
fn nearest<T: Real>(point: Cplx<T>, centroids: &[Cplx<T>]) -> (usize, T) {
    let mut best = (0, dist_sqr(point, centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = dist_sqr(point, *c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign<T: Real>(points: &[Cplx<T>], centroids: &[Cplx<T>], assignment: &mut [usize]) {
    for (a, p) in assignment.iter_mut().zip(points) {
        *a = nearest(*p, centroids).0;
    }
}

/// Move each empty centroid onto the point farthest from its own centroid,
/// taking points only from clusters that can spare one. Returns whether
/// anything moved.
fn repair_empty<T: Real>(
    points: &[Cplx<T>],
    centroids: &mut [Cplx<T>],
    assignment: &mut [usize],
) -> bool {
    let mut sizes = vec![0usize; centroids.len()];
    for &c in assignment.iter() {
        sizes[c] += 1;
    }
    let mut moved = false;
    for j in 0..centroids.len() {
        if sizes[j] > 0 {
            continue;
        }
        let mut pick: Option<(usize, T)> = None;
        for (i, p) in points.iter().enumerate() {
            let owner = assignment[i];
            if sizes[owner] < 2 {
                continue;
            }
            let d = dist_sqr(*p, centroids[owner]);
            if pick.is_none_or(|(_, best)| d > best) {
                pick = Some((i, d));
            }
        }
        if let Some((i, _)) = pick {
            sizes[assignment[i]] -= 1;
            sizes[j] += 1;
            assignment[i] = j;
            centroids[j] = points[i];
            moved = true;
        }
    }
    moved
}

fn distinct_count<T: Real>(points: &[Cplx<T>]) -> usize {
    let mut sorted: Vec<Cplx<T>> = points.to_vec();
    sorted.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    sorted.dedup();
    sorted.len()
}

/// k-means++ seeding.
fn seed_centroids<T: Real>(points: &[Cplx<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Cplx<T>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.random_range(0..n)]);
    let mut closest: Vec<f64> = points
        .iter()
        .map(|p| dist_sqr(*p, centroids[0]).to_f64_lossy())
        .collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in closest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| closest.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // unreachable when k <= distinct points; keep seeding total anyway
            rng.random_range(0..n)
        };
        let c = points[idx];
        centroids.push(c);
        for (w, p) in closest.iter_mut().zip(points) {
            *w = w.min(dist_sqr(*p, c).to_f64_lossy());
        }
    }
    centroids
}

/// Lloyd's K-means on the complex plane with k-means++ seeding.
pub fn kmeans<T: Real>(
    points: &[Cplx<T>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: T,
) -> Result<ClusterPlan<T>> {
    kmeans_with(
        points,
        k,
        &KMeansOptions {
            seed,
            max_iter,
            tol: tol.to_f64_lossy(),
            renormalize: false,
        },
    )
}

pub fn kmeans_with<T: Real>(
    points: &[Cplx<T>],
    k: usize,
    opts: &KMeansOptions,
) -> Result<ClusterPlan<T>> {
    if points.is_empty() {
        return param("cannot cluster an empty point set");
    }
    if k == 0 {
        return param("cluster count must be positive");
    }
    if k > points.len() {
        return param(format!(
            "{k} clusters requested for {} points",
            points.len()
        ));
    }
    if points
        .iter()
        .any(|p| !p.re.is_finite() || !p.im.is_finite())
    {
        return param("points must be finite");
    }
    let distinct = distinct_count(points);
    if k > distinct {
        return param(format!(
            "{k} clusters requested but only {distinct} distinct points"
        ));
    }
    if opts.max_iter == 0 {
        return param("max_iter must be positive");
    }

    let tol = T::lit(opts.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut assignment = vec![0usize; points.len()];
    let mut trace = Vec::new();

    for _ in 0..opts.max_iter {
        assign(points, &centroids, &mut assignment);
        repair_empty(points, &mut centroids, &mut assignment);
        trace.push(sse_of(points, &centroids, &assignment));

        let mut sums = vec![zero::<T>(); k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            sums[c] = sums[c] + p;
            counts[c] += 1;
        }
        let mut movement = T::zero();
        for ((c, s), &m) in centroids.iter_mut().zip(&sums).zip(&counts) {
            let updated = s / T::from_count(m);
            movement = movement.max((updated - *c).norm());
            *c = updated;
        }
        if movement < tol {
            break;
        }
    }

    if opts.renormalize {
        let radius =
            points.iter().fold(T::zero(), |acc, p| acc + p.norm()) / T::from_count(points.len());
        for c in centroids.iter_mut() {
            let r = c.norm();
            if r > T::zero() {
                *c = *c * (radius / r);
            }
        }
    }

    // final argmin pass; a repaired centroid can capture points, so re-check
    for _ in 0..=k {
        assign(points, &centroids, &mut assignment);
        if !repair_empty(points, &mut centroids, &mut assignment) {
            break;
        }
    }
    let sse = sse_of(points, &centroids, &assignment);
    trace.push(sse);
    Ok(ClusterPlan {
        centroids,
        assignment,
        sse,
        sse_trace: trace,
    })
}

/// Distances to, and normalized memberships of, the two closest centroids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership<T> {
    pub nearest: usize,
    pub second: usize,
    pub v1: T,
    pub v2: T,
    pub d1: T,
    pub d2: T,
}

pub fn memberships<T: Real>(point: Cplx<T>, centroids: &[Cplx<T>]) -> Result<Membership<T>> {
    if centroids.len() < 2 {
        return param("memberships need at least two centroids");
    }
    let inf = T::infinity();
    let (mut i1, mut e1) = (usize::MAX, inf);
    let (mut i2, mut e2) = (usize::MAX, inf);
    for (j, c) in centroids.iter().enumerate() {
        let e = dist_sqr(point, *c);
        if i1 == usize::MAX || e < e1 {
            (i2, e2) = (i1, e1);
            (i1, e1) = (j, e);
        } else if i2 == usize::MAX || e < e2 {
            (i2, e2) = (j, e);
        }
    }
    let (d1, d2) = (e1.sqrt(), e2.sqrt());
    let sum = d1 + d2;
    let half = T::lit(0.5);
    let (v1, v2) = if sum > T::zero() {
        (d2 / sum, d1 / sum)
    } else {
        (half, half)
    };
    Ok(Membership {
        nearest: i1,
        second: i2,
        v1,
        v2,
        d1,
        d2,
    })
}

/// Per-tap outcome of the soft decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FuzzyEntry<T> {
    Hard {
        cluster: usize,
    },
    Soft {
        nearest: usize,
        second: usize,
        v1: T,
        v2: T,
    },
}

impl<T: Copy> FuzzyEntry<T> {
    pub fn nearest(&self) -> usize {
        match *self {
            FuzzyEntry::Hard { cluster } => cluster,
            FuzzyEntry::Soft { nearest, .. } => nearest,
        }
    }

    pub fn is_soft(&self) -> bool {
        matches!(self, FuzzyEntry::Soft { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyPlan<T: Real> {
    centroids: Vec<Cplx<T>>,
    entries: Vec<FuzzyEntry<T>>,
    eta: T,
}

impl<T: Real> FuzzyPlan<T> {
    pub fn centroids(&self) -> &[Cplx<T>] {
        &self.centroids
    }

    pub fn n_clusters(&self) -> usize {
        self.centroids.len()
    }

    pub fn entries(&self) -> &[FuzzyEntry<T>] {
        &self.entries
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn n_soft(&self) -> usize {
        self.entries.iter().filter(|e| e.is_soft()).count()
    }

    pub fn soft_fraction(&self) -> f64 {
        self.n_soft() as f64 / self.entries.len() as f64
    }

    /// Collapse every entry onto its nearest centroid.
    pub fn hard_plan(&self, taps: &[Cplx<T>]) -> Result<ClusterPlan<T>> {
        ClusterPlan::from_parts(
            self.centroids.clone(),
            self.entries.iter().map(|e| e.nearest()).collect(),
            taps,
        )
    }

    pub fn to_document(&self) -> FuzzyPlanDoc {
        FuzzyPlanDoc {
            centroids: self
                .centroids
                .iter()
                .map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()])
                .collect(),
            entries: self
                .entries
                .iter()
                .map(|e| match *e {
                    FuzzyEntry::Hard { cluster } => EntryDoc {
                        kind: EntryKind::Hard,
                        nearest: cluster,
                        second: None,
                        v1: None,
                    },
                    FuzzyEntry::Soft {
                        nearest,
                        second,
                        v1,
                        ..
                    } => EntryDoc {
                        kind: EntryKind::Soft,
                        nearest,
                        second: Some(second),
                        v1: Some(v1.to_f64_lossy()),
                    },
                })
                .collect(),
            eta: self.eta.to_f64_lossy(),
        }
    }

    /// Rebuild a plan from its exported document, checking the plan invariants.
    pub fn from_document(doc: &FuzzyPlanDoc) -> Result<Self> {
        let centroids: Vec<Cplx<T>> = doc
            .centroids
            .iter()
            .map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im)))
            .collect();
        if centroids.is_empty() {
            return param("plan document has no centroids");
        }
        if !(0.0..=1.0).contains(&doc.eta) {
            return param(format!("eta {} outside [0, 1]", doc.eta));
        }
        let nc = centroids.len();
        let mut entries = Vec::with_capacity(doc.entries.len());
        for (i, e) in doc.entries.iter().enumerate() {
            if e.nearest >= nc {
                return param(format!("entry {i}: centroid {} out of range", e.nearest));
            }
            let entry = match e.kind {
                EntryKind::Hard => FuzzyEntry::Hard { cluster: e.nearest },
                EntryKind::Soft => {
                    let (Some(second), Some(v1)) = (e.second, e.v1) else {
                        return param(format!("entry {i}: soft entry needs `second` and `v1`"));
                    };
                    if second >= nc || second == e.nearest {
                        return param(format!("entry {i}: invalid second centroid {second}"));
                    }
                    if !(0.5..=doc.eta).contains(&v1) {
                        return param(format!("entry {i}: v1 {v1} outside [0.5, eta]"));
                    }
                    FuzzyEntry::Soft {
                        nearest: e.nearest,
                        second,
                        v1: T::lit(v1),
                        v2: T::one() - T::lit(v1),
                    }
                }
            };
            entries.push(entry);
        }
        Ok(FuzzyPlan {
            centroids,
            entries,
            eta: T::lit(doc.eta),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}

/// Serialized form of a [`FuzzyPlan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPlanDoc {
    pub centroids: Vec<[f64; 2]>,
    pub entries: Vec<EntryDoc>,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    #[serde(rename = "type")]
    pub kind: EntryKind,
    pub nearest: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
}

/// Soft-decision stage: taps whose nearest-centroid membership exceeds `eta`
/// stay hard; the rest are shared between their two closest centroids.
pub fn fuzzify<T: Real>(plan: &ClusterPlan<T>, taps: &[Cplx<T>], eta: T) -> Result<FuzzyPlan<T>> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return param(format!("eta {eta} outside [0, 1]"));
    }
    if taps.len() != plan.assignment().len() {
        return param(format!(
            "plan covers {} taps but {} were given",
            plan.assignment().len(),
            taps.len()
        ));
    }
    let centroids = plan.centroids().to_vec();
    if centroids.len() < 2 {
        if eta >= T::lit(0.5) {
            return param("soft assignment needs at least two centroids");
        }
        return Ok(FuzzyPlan {
            entries: plan
                .assignment()
                .iter()
                .map(|&cluster| FuzzyEntry::Hard { cluster })
                .collect(),
            centroids,
            eta,
        });
    }
    let mut entries = Vec::with_capacity(taps.len());
    for tap in taps {
        let m = memberships(*tap, &centroids)?;
        if m.d1 == T::zero() || m.v1 > eta {
            entries.push(FuzzyEntry::Hard { cluster: m.nearest });
        } else {
            entries.push(FuzzyEntry::Soft {
                nearest: m.nearest,
                second: m.second,
                v1: m.v1,
                v2: m.v2,
            });
        }
    }
    Ok(FuzzyPlan {
        centroids,
        entries,
        eta,
    })
}
