//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use bohm_core::dynamics::{integrate, Integrator, StepControl};
use bohm_core::experiments::{
    chsh, contradiction_fraction, estimate_correlation, outcome_histogram, pair_positions,
    singlet_config, survey, two_particle_contradiction, ContradictionReport, PairGeometry,
    ProductCheck, Scenario,
};
use bohm_core::physics::{
    derive_constants, exit_speed, packet_z, post_magnet_center, spread_at, PhysicalParams,
};
use bohm_core::spin::{pattern_label, Spin};
use bohm_core::states::{
    born_distribution, ghz4_branches, mermin_branches, singlet_branches, BranchState, Ghz4Setting,
    MerminSetting, RotationSense,
};
use bohm_core::velocity::{numeric_velocity_oracle, velocity_scale, BranchField, PhaseSpacePoint};
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn criterion_1(p: &PhysicalParams) -> Verdict {
    let dc = derive_constants(p).unwrap();
    let ok = rel(dc.k, 2.91) < 5e-3 && rel(dc.alpha, 2.58e5) < 5e-3 && rel(dc.beta, 5.15e11) < 5e-3;
    verdict(
        ok,
        format!(
            "k = {:.4} s^-1, alpha = {:.4e} cm s^-2, beta = {:.4e} cm^-1 s^-2",
            dc.k, dc.alpha, dc.beta
        ),
    )
}

fn criterion_2(p: &PhysicalParams) -> Verdict {
    let up = packet_z(p, 0.0, p.tau, Spin::Up).center;
    let down = packet_z(p, 0.0, p.tau, Spin::Down).center;
    let v = exit_speed(p);
    let t_screen = p.tau + 100.0 / p.v0;
    let sep = post_magnet_center(p, Spin::Up, t_screen).unwrap()
        - post_magnet_center(p, Spin::Down, t_screen).unwrap();
    let ok = rel(up, 0.258) < 5e-3
        && rel(down, -0.258) < 5e-3
        && rel(v, 515.0) < 5e-3
        && (sep - 10.8).abs() <= 0.3;
    verdict(
        ok,
        format!("centres {up:+.4} / {down:+.4} cm, exit speed {v:.1} cm/s, screen separation {sep:.3} cm"),
    )
}

fn oracle_states() -> Vec<(String, BranchState)> {
    let mut states = vec![
        ("singlet 0".to_string(), singlet_branches(0.0)),
        (
            "singlet 2pi/3".to_string(),
            singlet_branches(2.0 * PI / 3.0),
        ),
    ];
    for s in MerminSetting::ALL {
        states.push((format!("mermin {s}"), mermin_branches(s)));
    }
    for s in Ghz4Setting::ALL {
        states.push((format!("ghz4 {s}"), ghz4_branches(s)));
    }
    states
}

fn criterion_3(p: &PhysicalParams) -> Verdict {
    let dc = derive_constants(p).unwrap();
    let mut worst = (0.0f64, String::new());
    let mut points = 0usize;
    for (name, st) in oracle_states() {
        let field = BranchField::new(&st, dc).unwrap();
        let n = st.n_particles();
        for frac in [0.25, 0.5, 1.0] {
            let t = frac * p.tau;
            let half = 3.0 * spread_at(p, t);
            let axis: Vec<f64> = (0..10)
                .map(|i| -half + 2.0 * half * i as f64 / 9.0)
                .collect();
            let scale = velocity_scale(p, &dc, t);
            let errs: Vec<f64> = (0..10usize.pow(n as u32))
                .into_par_iter()
                .map(|mut idx| {
                    let mut z = vec![0.0; n];
                    for zi in z.iter_mut() {
                        *zi = axis[idx % 10];
                        idx /= 10;
                    }
                    let mut v = vec![0.0; n];
                    field.velocity(t, &z, &mut v);
                    let o =
                        numeric_velocity_oracle(&st, p, &PhaseSpacePoint { coords: z, t }).unwrap();
                    let norm = o.0.iter().fold(scale, |m, x| m.max(x.abs()));
                    v.iter()
                        .zip(&o.0)
                        .map(|(a, b)| (a - b).abs() / norm)
                        .fold(0.0, f64::max)
                })
                .collect();
            points += errs.len();
            let m = errs.iter().copied().fold(0.0, f64::max);
            if m > worst.0 {
                worst = (m, format!("{name} at t = {frac} tau"));
            }
        }
    }
    verdict(
        worst.0 < 1e-6,
        format!(
            "max relative deviation {:.2e} ({}) over {points} grid points",
            worst.0, worst.1
        ),
    )
}

fn criterion_4(p: &PhysicalParams) -> Verdict {
    let free = PhysicalParams { a1: 0.0, ..*p };
    let dc = derive_constants(&free).unwrap();
    let mut worst = 0.0f64;
    let starts = [[1e-3, -2e-3], [-3e-4, 2.5e-3], [5e-5, 1e-3]];
    for (i, z0) in starts.iter().enumerate() {
        let st = if i == 0 {
            singlet_branches(0.0)
        } else {
            singlet_branches(2.0 * PI / 3.0)
        };
        let traj = integrate(&st, z0, &free, &StepControl::default()).unwrap();
        for s in &traj.samples {
            let g = (1.0 + dc.k * dc.k * s.t * s.t).sqrt();
            for (z, a) in s.coords.iter().zip(z0) {
                worst = worst.max(rel(*z, a * g));
            }
        }
    }
    let dc3 = derive_constants(&free).unwrap();
    let st = mermin_branches(MerminSetting::Xxx);
    let z0 = [2e-3, -1e-3, 4e-4];
    let end = Integrator::new(&st, &free, StepControl::default())
        .unwrap()
        .endpoint(&z0)
        .unwrap();
    let g = (1.0 + dc3.k * dc3.k * free.tau * free.tau).sqrt();
    for (z, a) in end.iter().zip(&z0) {
        worst = worst.max(rel(*z, a * g));
    }
    verdict(
        worst < 1e-6,
        format!("max relative deviation from z0 sqrt(1+k^2 t^2): {worst:.2e}"),
    )
}

fn criterion_5(p: &PhysicalParams) -> Verdict {
    let e = estimate_correlation(0.0, 1000, 5, p).unwrap();
    let ok = e.value == -1.0 && (e.n_ambiguous as f64) < 0.005 * e.n_samples as f64;
    verdict(
        ok,
        format!(
            "E = {} over {} non-ambiguous samples, {} ambiguous",
            e.value,
            e.n_samples - e.n_ambiguous,
            e.n_ambiguous
        ),
    )
}

fn outcome_list(r: &ContradictionReport) -> Vec<String> {
    ["ZL,ZR", "Z'L,Z'R", "Z'L,ZR", "ZL,Z'R"]
        .iter()
        .map(|k| pattern_label(&r.joint_outcomes[*k].signs))
        .collect()
}

fn criterion_6(p: &PhysicalParams) -> Verdict {
    let geometries = [
        ("Z'R at 4pi/3", PairGeometry::coplanar_120()),
        ("Z'R at pi/3", PairGeometry::coplanar_120_reversed_r_prime()),
    ];
    let senses = [RotationSense::Positive, RotationSense::Negative];
    let want = ["++", "++", "-+", "++"];
    let mut tried = Vec::new();
    let mut matched = None;
    for (gname, g) in geometries {
        for sense in senses {
            let first = two_particle_contradiction(&pair_positions(1.1), g, p, sense).unwrap();
            let mirrored = two_particle_contradiction(&pair_positions(-1.0), g, p, sense).unwrap();
            let got = outcome_list(&first);
            let mirrored_got = outcome_list(&mirrored);
            let ok = got == want
                && first.contradiction
                && (first.product_a, first.product_b) == (1, -1)
                && !mirrored.contradiction
                && !mirrored.indeterminate
                && mirrored_got.iter().all(|o| o == "+-");
            tried.push(format!(
                "[{gname}, sense {}: {} a={:+} b={:+} | mirrored {} contradiction={}]",
                sense.sign(),
                got.join(" "),
                first.product_a,
                first.product_b,
                mirrored_got.join(" "),
                mirrored.contradiction
            ));
            if ok && matched.is_none() {
                matched = Some(format!("{gname}, sense {}", sense.sign()));
            }
        }
    }
    let detail = match &matched {
        Some(m) => format!("reproduced with {m}; tried {}", tried.join(" ")),
        None => format!(
            "no convention reproduces the outcome list; tried {}",
            tried.join(" ")
        ),
    };
    verdict(matched.is_some(), detail)
}

fn criterion_7(p: &PhysicalParams) -> Verdict {
    let n = 10_000;
    let mut cases: Vec<(
        String,
        Scenario,
        bohm_core::states::MeasurementConfig,
        BranchState,
    )> = Vec::new();
    for (name, theta) in [("0", 0.0), ("pi/2", PI / 2.0), ("2pi/3", 2.0 * PI / 3.0)] {
        cases.push((
            format!("singlet {name}"),
            Scenario::Singlet,
            singlet_config(theta),
            singlet_branches(theta),
        ));
    }
    for s in MerminSetting::ALL {
        cases.push((
            format!("mermin {s}"),
            Scenario::Mermin { setting: s },
            s.measurement(),
            mermin_branches(s),
        ));
    }
    for s in Ghz4Setting::ALL {
        cases.push((
            format!("ghz4 {s}"),
            Scenario::Ghz4 { setting: s },
            s.measurement(),
            ghz4_branches(s),
        ));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, (name, scenario, config, state)) in cases.into_iter().enumerate() {
        let counts = outcome_histogram(
            scenario,
            &config,
            n,
            700 + k as u64,
            p,
            RotationSense::Positive,
        )
        .unwrap();
        let tv = counts.total_variation(&born_distribution(&state).probabilities);
        let n_patterns = 1usize << state.n_particles();
        let bound = 5.0 * (n_patterns as f64 / n as f64).sqrt();
        ok &= tv < bound;
        parts.push(format!("{name} {tv:.4}/{bound:.3}"));
    }
    verdict(ok, format!("TV/bound: {}", parts.join(", ")))
}

fn criterion_8(p: &PhysicalParams) -> Verdict {
    let mut ok = true;
    let mut worst = 0.0f64;
    for k in 0..13 {
        let theta = k as f64 * PI / 12.0;
        let e = estimate_correlation(theta, 10_000, 800 + k, p).unwrap();
        let dev = (e.value + theta.cos()).abs();
        ok &= dev <= 4.0 * e.stderr + 1e-12;
        if e.stderr > 0.0 {
            worst = worst.max(dev / e.stderr);
        }
    }
    verdict(ok, format!("13 angles, worst deviation {worst:.2} stderr"))
}

fn criterion_9(p: &PhysicalParams) -> Verdict {
    let g = PairGeometry::coplanar_120();
    let c = chsh(g.settings(), 10_000, 900, p, RotationSense::Positive).unwrap();
    let ok = (c.s - 2.5).abs() <= 3.0 * c.stderr && c.s > 2.0;
    verdict(
        ok,
        format!("S = {:.4} +/- {:.4}, {}", c.s, c.stderr, c.combination),
    )
}

/// Outcome signs of one singlet angle class on a grid of projected starting
/// coordinates.
struct BasinAtlas {
    half: f64,
    n: usize,
    signs: Vec<Option<(i8, i8)>>,
}

impl BasinAtlas {
    fn build(theta: f64, half: f64, n: usize, p: &PhysicalParams) -> Self {
        let integ = Integrator::new(&singlet_branches(theta), p, StepControl::default()).unwrap();
        let step = 2.0 * half / (n - 1) as f64;
        let signs = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let u = -half + step * (idx % n) as f64;
                let v = -half + step * (idx / n) as f64;
                let o = integ.outcome(&[u, v]).ok()?;
                (!o.ambiguous).then(|| (o.signs[0].sign() as i8, o.signs[1].sign() as i8))
            })
            .collect();
        Self { half, n, signs }
    }

    fn lookup(&self, u: f64, v: f64) -> Option<(i8, i8)> {
        let step = 2.0 * self.half / (self.n - 1) as f64;
        let i = ((u + self.half) / step).round() as isize;
        let j = ((v + self.half) / step).round() as isize;
        let max = self.n as isize - 1;
        let (i, j) = (i.clamp(0, max) as usize, j.clamp(0, max) as usize);
        self.signs[j * self.n + i]
    }
}

/// Quadrature of the contradiction indicator over a Gaussian-weighted 4-D
/// grid covering ±3 δr0 in every transverse coordinate.
fn atlas_fraction(p: &PhysicalParams, g: &PairGeometry) -> f64 {
    let d = p.delta_r0;
    let atlas_120 = BasinAtlas::build(2.0 * PI / 3.0, 3.0 * 2f64.sqrt() * d, 241, p);
    let atlas_0 = BasinAtlas::build(0.0, 3.0 * 2f64.sqrt() * d, 241, p);
    let m = 28usize;
    let h = 6.0 * d / m as f64;
    let nodes: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let x = -3.0 * d + h * (i as f64 + 0.5);
            (x, (-0.5 * (x / d).powi(2)).exp())
        })
        .collect();
    let proj = |y: f64, z: f64, a: f64| z * a.cos() + y * a.sin();
    let settings = g.settings();
    let (num, den) = (0..m * m)
        .into_par_iter()
        .map(|lz| {
            let (yl, wyl) = nodes[lz % m];
            let (zl, wzl) = nodes[lz / m];
            let mut num = 0.0;
            let mut den = 0.0;
            for &(yr, wyr) in &nodes {
                for &(zr, wzr) in &nodes {
                    let w = wyl * wzl * wyr * wzr;
                    let mut product = [1i8; 2];
                    let mut determinate = true;
                    for (k, (_, a, b)) in settings.iter().enumerate() {
                        let atlas = if (b - a).abs() < 1e-12 {
                            &atlas_0
                        } else {
                            &atlas_120
                        };
                        match atlas.lookup(proj(yl, zl, *a), proj(yr, zr, *b)) {
                            Some((sl, sr)) => {
                                let slot = if k == 0 || k == 2 { 0 } else { 1 };
                                product[slot] *= sl * sr;
                            }
                            None => determinate = false,
                        }
                    }
                    if determinate {
                        den += w;
                        if product[0] != product[1] {
                            num += w;
                        }
                    }
                }
            }
            (num, den)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    num / den
}

fn criterion_10(p: &PhysicalParams) -> Verdict {
    let g = PairGeometry::coplanar_120();
    let f = contradiction_fraction(1000, 1000, g, p, RotationSense::Positive).unwrap();
    let oracle = atlas_fraction(p, &g);
    let separated = f.fraction - 5.0 * f.stderr > 0.0 && f.fraction + 5.0 * f.stderr < 1.0;
    let agrees = (f.fraction - oracle).abs() <= 2.0 * f.stderr;
    verdict(
        separated && agrees,
        format!(
            "fraction {:.4} +/- {:.4} ({} indeterminate), basin-atlas oracle {oracle:.4}",
            f.fraction, f.stderr, f.n_indeterminate
        ),
    )
}

fn product_criterion(check: ProductCheck, seed: u64, p: &PhysicalParams) -> Verdict {
    let s = survey(&check, 1000, seed, p).unwrap();
    let tuple: Vec<String> = s
        .eigenvalues
        .iter()
        .map(|(l, e)| format!("{l}={e:+}"))
        .collect();
    let ok = s.n_contradiction == s.n_determinate()
        && s.n_eigenvalue_violations == 0
        && (s.n_indeterminate as f64) < 0.005 * s.n_samples as f64;
    verdict(
        ok,
        format!(
            "{}/{} contradictions, {} eigenvalue violations, {} ambiguous; eigenvalues {}",
            s.n_contradiction,
            s.n_determinate(),
            s.n_eigenvalue_violations,
            s.n_indeterminate,
            tuple.join(" ")
        ),
    )
}

fn criterion_11(p: &PhysicalParams) -> Verdict {
    product_criterion(
        ProductCheck::mermin(p, RotationSense::Positive).unwrap(),
        1100,
        p,
    )
}

fn criterion_12(p: &PhysicalParams) -> Verdict {
    product_criterion(
        ProductCheck::ghz4(p, RotationSense::Positive).unwrap(),
        1200,
        p,
    )
}

fn main() -> ExitCode {
    let p = PhysicalParams::default();
    let criteria: [(&str, fn(&PhysicalParams) -> Verdict); 12] = [
        ("derived constants", criterion_1),
        ("single-particle deflection", criterion_2),
        ("velocity oracle equivalence", criterion_3),
        ("free-flight spreading", criterion_4),
        ("singlet anticorrelation at theta = 0", criterion_5),
        ("hand-picked pair positions", criterion_6),
        ("Born equivariance", criterion_7),
        ("correlation curve", criterion_8),
        ("CHSH value", criterion_9),
        ("two-particle contradiction fraction", criterion_10),
        ("Mermin product contradiction", criterion_11),
        ("GHZ-4 product contradiction", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f(&p);
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.1} s) {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
