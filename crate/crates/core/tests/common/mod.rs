#![allow(dead_code)]

use cryolink::defaults;
use cryolink::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A 4K-stage problem between two nodes with a power-law shield
/// `k(T) = b T^c`, constant sink resistance and a piecewise-linear load.
#[derive(Debug, Clone)]
pub struct SingleStage {
    pub length: f64,
    pub area: f64,
    pub k_b: f64,
    pub k_c: f64,
    pub cooling: CoolingCurve,
    pub sink_r: f64,
    /// `(x, w)` knots of the line density in W/m, covering `[0, length]`.
    pub knots: Vec<(f64, f64)>,
    pub deltas: Vec<(f64, f64)>,
}

impl SingleStage {
    pub fn assembly(&self) -> LinkAssembly {
        let mut stages = defaults::stages();
        let s = &mut stages[Stage::FourK];
        s.area = self.area;
        s.material =
            ConductivityModel::power_law(0.0, self.k_b, self.k_c, Domain::default()).unwrap();
        let mut node = defaults::node();
        node.cooling[Stage::FourK] = self.cooling;
        node.internal_resistance[Stage::FourK] =
            ResistanceCurve::power_law(self.sink_r, 4.0, 0.0).unwrap();
        let kinds = vec![
            ModuleKind::Node(node.clone()),
            ModuleKind::Adapter {
                length: self.length,
            },
            ModuleKind::Node(node),
        ];
        LinkAssembly::stacked(stages, kinds, defaults::vacuum_can(), Vec::new()).unwrap()
    }

    pub fn field(&self) -> LineLoadField {
        let cells = self
            .knots
            .windows(2)
            .map(|w| LoadCell {
                x0: w[0].0,
                x1: w[1].0,
                w0: w[0].1,
                w1: w[1].1,
            })
            .collect();
        LineLoadField::new(Stage::FourK, cells, self.deltas.clone())
    }

    pub fn solve(&self) -> StageProfile {
        solve_stage_with_field(
            &self.assembly(),
            Stage::FourK,
            self.field(),
            &SolverSettings::default(),
        )
        .unwrap()
        .0
    }

    /// Exact integral of the line density over `[a, b]`.
    pub fn density_integral(&self, a: f64, b: f64) -> f64 {
        let w = |x: f64| -> f64 {
            let k = self
                .knots
                .partition_point(|p| p.0 <= x)
                .clamp(1, self.knots.len() - 1);
            let (p, q) = (self.knots[k - 1], self.knots[k]);
            p.1 + (q.1 - p.1) * (x - p.0) / (q.0 - p.0)
        };
        let mut edges = vec![a];
        edges.extend(self.knots.iter().map(|p| p.0).filter(|&x| x > a && x < b));
        edges.push(b);
        edges
            .windows(2)
            .map(|e| 0.5 * (w(e[0]) + w(e[1])) * (e[1] - e[0]))
            .sum()
    }

    pub fn kirchhoff(&self, t: f64) -> f64 {
        self.k_b * t.powf(self.k_c + 1.0) / (self.k_c + 1.0)
    }

    pub fn kirchhoff_inv(&self, u: f64) -> f64 {
        ((self.k_c + 1.0) * u / self.k_b).powf(1.0 / (self.k_c + 1.0))
    }

    /// Shield-end temperature when the sink absorbs `q`.
    pub fn end_temperature(&self, q: f64) -> f64 {
        let c = &self.cooling;
        c.t0 * (c.offset + (q / c.prefactor).powf(1.0 / c.exponent)) + self.sink_r * q
    }

    fn end_temperature_slope(&self, q: f64) -> f64 {
        let c = &self.cooling;
        let e = c.exponent;
        c.t0 / (e * c.prefactor) * (q / c.prefactor).powf(1.0 / e - 1.0) + self.sink_r
    }

    /// Heat a sink absorbs when the shield end sits at `t`.
    pub fn sink_heat(&self, t: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1e-3);
        while self.end_temperature(hi) < t {
            hi *= 2.0;
        }
        if self.end_temperature(lo) >= t {
            return 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.end_temperature(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

pub fn random_single_stage(rng: &mut ChaCha8Rng, grid: usize) -> SingleStage {
    let length = rng.gen_range(2.0..15.0);
    let knots_n = rng.gen_range(2..6);
    let mut xs: Vec<f64> = (0..knots_n)
        .map(|_| rng.gen_range(0.05..0.95) * length)
        .collect();
    xs.push(0.0);
    xs.push(length);
    xs.sort_by(f64::total_cmp);
    let knots = xs
        .into_iter()
        .map(|x| (x, rng.gen_range(0.005..0.1)))
        .collect();
    let deltas = (0..rng.gen_range(0..3))
        .map(|_| {
            let k = (rng.gen_range(0.1..0.9) * grid as f64).round();
            (k / grid as f64 * length, rng.gen_range(0.005..0.05))
        })
        .collect();
    SingleStage {
        length,
        area: rng.gen_range(4e-4..1.9e-3),
        k_b: rng.gen_range(20.0..500.0),
        k_c: rng.gen_range(0.6..1.4),
        cooling: CoolingCurve::new(4.0, rng.gen_range(1.0..4.0), 0.75, rng.gen_range(1.0..1.5))
            .unwrap(),
        sink_r: rng.gen_range(0.05..1.0),
        knots,
        deltas,
    }
}

/// Vertex-centred finite-volume solution in the Kirchhoff variable.
pub struct FdSolution {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub q_left: f64,
    pub q_right: f64,
}

impl FdSolution {
    pub fn temperature(&self, p: &SingleStage, x: f64) -> f64 {
        let h = self.x[1] - self.x[0];
        let k = ((x / h).floor() as usize).min(self.x.len() - 2);
        let s = (x - self.x[k]) / h;
        p.kirchhoff_inv(self.u[k] + s * (self.u[k + 1] - self.u[k]))
    }

    pub fn max(&self) -> f64 {
        self.t.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Damped Newton on the discretized conduction equation with nonlinear
/// sink boundary conditions.
pub fn fd_oracle(p: &SingleStage, n: usize) -> FdSolution {
    let h = p.length / n as f64;
    let x: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut src: Vec<f64> = (0..=n)
        .map(|i| p.density_integral((x[i] - 0.5 * h).max(0.0), (x[i] + 0.5 * h).min(p.length)))
        .collect();
    for &(xd, power) in &p.deltas {
        src[(xd / h).round() as usize] += power;
    }
    let g = p.area / h;
    let boundary = |u: f64| -> (f64, f64) {
        let t = p.kirchhoff_inv(u);
        let q = p.sink_heat(t);
        let dq_dt = 1.0 / p.end_temperature_slope(q.max(1e-300));
        let dt_du = 1.0 / (p.k_b * t.powf(p.k_c));
        (q, dq_dt * dt_du)
    };
    let residual = |u: &[f64]| -> Vec<f64> {
        let mut r = vec![0.0; n + 1];
        for i in 1..n {
            r[i] = g * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + src[i];
        }
        r[0] = g * (u[1] - u[0]) + src[0] - boundary(u[0]).0;
        r[n] = g * (u[n - 1] - u[n]) + src[n] - boundary(u[n]).0;
        r
    };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();

    // start from the profile with both ends held where each sink takes half
    let u_end = p.kirchhoff(p.end_temperature(0.5 * src.iter().sum::<f64>()));
    let mut diag = vec![-2.0 * g; n + 1];
    let mut rhs: Vec<f64> = src.iter().map(|v| -v).collect();
    let (mut sub, mut sup) = (vec![g; n + 1], vec![g; n + 1]);
    diag[0] = 1.0;
    diag[n] = 1.0;
    sup[0] = 0.0;
    sub[n] = 0.0;
    rhs[0] = u_end;
    rhs[n] = u_end;
    let mut u = thomas(&sub, &diag, &sup, &rhs);
    let zero_point = p.kirchhoff(p.cooling.zero_point());
    let mut r = residual(&u);
    for _ in 0..200 {
        let (_, d0) = boundary(u[0]);
        let (_, dn) = boundary(u[n]);
        let sub = vec![g; n + 1];
        let sup = vec![g; n + 1];
        let mut diag = vec![-2.0 * g; n + 1];
        diag[0] = -g - d0;
        diag[n] = -g - dn;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = thomas(&sub, &diag, &sup, &rhs);
        assert!(
            delta.iter().all(|d| d.is_finite()),
            "singular finite-difference Jacobian"
        );
        let before = norm(&r);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let admissible =
                trial.iter().all(|&v| v > 0.0) && trial[0] > zero_point && trial[n] > zero_point;
            if admissible {
                let rt = residual(&trial);
                if norm(&rt) < before || alpha < 1e-6 {
                    u = trial;
                    r = rt;
                    break;
                }
            }
            alpha *= 0.5;
        }
        let step = delta.iter().map(|d| d.abs()).fold(0.0, f64::max) * alpha;
        let scale = u.iter().copied().fold(0.0, f64::max);
        if step <= 1e-13 * scale {
            break;
        }
    }
    FdSolution {
        t: u.iter().map(|&v| p.kirchhoff_inv(v)).collect(),
        q_left: boundary(u[0]).0,
        q_right: boundary(u[n]).0,
        x,
        u,
    }
}

/// Tridiagonal solve; `sub[i]` couples row `i` to `i - 1`, `sup[i]` to `i + 1`.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Independent transcription of the NIST RRR copper conductivity fit.
pub fn nist_copper_reference(rrr: f64, t: f64) -> f64 {
    let beta = 0.634 / rrr;
    let beta_r = beta / 3e-4;
    let p7 = 0.838 / beta_r.powf(0.1661);
    let w0 = beta / t;
    let wi = 1.754e-8 * t.powf(2.763)
        / (1.0 + 1.754e-8 * 1102.0 * t.powf(2.763 - 0.165) * (-(70.0 / t).powf(1.756)).exp());
    let wi0 = p7 * wi * w0 / (wi + w0);
    1.0 / (w0 + wi + wi0)
}

/// Composite Simpson rule in `ln T` with `n` (even) intervals.
pub fn simpson_log(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / n as f64;
    let g = |s: f64| {
        let t = s.exp();
        f(t) * t
    };
    let mut sum = g(la) + g(lb);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(la + i as f64 * h);
    }
    sum * h / 3.0
}

/// Temperatures sampled strictly inside every shield segment, away from
/// interface positions.
pub fn sample_positions(assembly: &LinkAssembly, per_segment: usize) -> Vec<f64> {
    assembly
        .shield_segments()
        .into_iter()
        .flat_map(|(a, b)| {
            (0..per_segment).map(move |k| a + (b - a) * (k as f64 + 0.5) / per_segment as f64)
        })
        .collect()
}

/// Heat received by `stage`, integrated directly from the solved profiles:
/// radiation from the enclosing surface over every shield segment, post
/// conduction from the enclosing stage and heaters.
pub fn received_heat(a: &LinkAssembly, sol: &Solution, stage: Stage) -> f64 {
    const SIGMA: f64 = 5.670374419e-8;
    let spec = &a.stages[stage];
    let hot = |x: f64| match stage.hotter() {
        Some(h) => sol.profile(h).temperature(x),
        None => a.vacuum_can.temperature,
    };
    let lambda = spec.attenuation_override.unwrap_or_else(|| {
        let (eps, c) = match stage.hotter() {
            Some(h) => (a.stages[h].emissivity, a.stages[h].circumference),
            None => (a.vacuum_can.emissivity, a.vacuum_can.circumference),
        };
        1.0 / (1.0 / spec.emissivity + (spec.circumference / c) / eps)
    });
    let own = sol.profile(stage);
    let mut total = 0.0;
    for (x0, x1) in a.shield_segments() {
        let n = ((x1 - x0) / 2e-3).ceil() as usize;
        let h = (x1 - x0) / n as f64;
        for k in 0..n {
            let x = x0 + (k as f64 + 0.5) * h;
            let back = if spec.include_self {
                own.temperature(x).powi(4)
            } else {
                0.0
            };
            let flux = SIGMA * lambda * (hot(x).powi(4) - back) + spec.extra_flux;
            total += flux * spec.circumference * h;
        }
    }
    if !spec.post_load.covered_by_mli {
        for (x, count) in a.post_sets() {
            total += count as f64 * spec.post_load.load(hot(x)).unwrap();
        }
    }
    total
        + a.heaters
            .iter()
            .filter(|h| h.stage == stage)
            .map(|h| h.power)
            .sum::<f64>()
}

/// Relative mismatch between the heat the sinks of `stage` absorb from the
/// link and the heat the stage receives.
pub fn balance_residual(a: &LinkAssembly, sol: &Solution, stage: Stage) -> f64 {
    let p = sol.profile(stage);
    let absorbed: f64 = p.sinks.iter().map(|s| s.q_from_left + s.q_from_right).sum();
    let received = received_heat(a, sol, stage);
    (absorbed - received).abs() / received.abs().max(f64::MIN_POSITIVE)
}
