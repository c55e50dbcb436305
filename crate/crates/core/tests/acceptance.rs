//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary so the lines appear in order.

mod common;

use std::time::{Duration, Instant};

use common::{convex_collision_length, polygon, Pt};
use mas_planner::agents::{
    attraction_step, body_collision_length, AttractionAgent, HeadOrientationAgent, OperatorScript, RepulsionAgent,
    VisibilityAgent,
};
use mas_planner::blackboard::{normalize, Blackboard, NormalizationConstants, WorldState};
use mas_planner::body::{eye_point, misalignment, BodyState};
use mas_planner::scenario::{bundled, EventAction, EventSpec, OperatorMode, Overrides, Scenario};
use mas_planner::scheduler::{Outcome, RunConfig, Scheduler};
use mas_planner::world::{
    central_difference, collision_length, fd_gradient, segment_occluded, Bounds, GradientStep, HeightRange,
    PlanarPose, Polygon, Prism, RayFan, Scene,
};
use nalgebra::{Point2, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn manikin(x: f64, y: f64, th: f64, half: f64) -> BodyState {
    BodyState::manikin(PlanarPose::new(x, y, th), Polygon::rectangle(-half, -half, half, half).unwrap())
}

fn free_state(body: BodyState, target: Point3<f64>) -> WorldState {
    WorldState::new(body, Scene::empty(target, 20.0).unwrap()).unwrap()
}

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rate_schedule() -> Verdict {
    let started = Instant::now();
    let mut s = Scheduler::new(free_state(manikin(0.0, 0.0, 0.0, 0.2), Point3::new(6.0, 2.0, 1.0)), RunConfig::default())
        .map_err(|e| e.to_string())?;
    let step = GradientStep::default();
    s.register(Box::new(AttractionAgent::new("attraction")), 1, true).unwrap();
    s.register(Box::new(HeadOrientationAgent::new("head")), 3, true).unwrap();
    s.register(Box::new(VisibilityAgent::new("visibility", step, RayFan::default())), 9, true).unwrap();
    let mut fired = vec![Vec::new(); 3];
    for _ in 0..18 {
        let rec = s.tick();
        for f in &rec.firings {
            let i = ["attraction", "head", "visibility"].iter().position(|a| *a == f.agent).unwrap();
            fired[i].push(rec.tick);
        }
    }
    let elapsed = started.elapsed();
    let expect: Vec<Vec<u64>> = [1u64, 3, 9].iter().map(|r| (0..18).filter(|t| t % r == 0).collect()).collect();
    check(
        fired == expect && elapsed < Duration::from_secs(1),
        format!(
            "firings {}/{}/{} at rates 1/3/9 over 18 ticks in {:.1} ms",
            fired[0].len(),
            fired[1].len(),
            fired[2].len(),
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn attraction_walk() -> Verdict {
    let k = NormalizationConstants::new(0.05, 0.05).unwrap();
    let d_tol = 0.05;
    let mut details = Vec::new();
    for reach in [0.0, d_tol] {
        let mut board = Blackboard::new(free_state(manikin(0.0, 0.0, 0.0, 0.2), Point3::new(1.0, 0.0, 1.0)));
        board.register_agent("a");
        let dist = |s: &WorldState| s.body.trunk.plan_distance(s.scene.target.x, s.scene.target.y);
        let mut s = board.snapshot();
        let mut firings = 0;
        while dist(&s) > d_tol {
            if firings == 40 {
                return Err(format!("reach {reach}: still {} m away after 40 firings", dist(&s)));
            }
            let before = dist(&s);
            s = board.apply(&[normalize(&attraction_step("a", &s, reach), k).unwrap()]).unwrap();
            firings += 1;
            if before > 0.05 && (before - dist(&s) - 0.05).abs() > 1e-9 {
                return Err(format!("reach {reach}: step {firings} moved {} m", before - dist(&s)));
            }
        }
        if firings > 21 {
            return Err(format!("reach {reach}: {firings} firings"));
        }
        details.push(format!("reach {reach}: {firings} firings"));
    }
    Ok(details.join(", "))
}

fn repulsion_escape() -> Verdict {
    let wall = Prism::new("wall", Polygon::rectangle(1.0, -2.0, 2.0, 2.0).unwrap(), HeightRange::new(0.0, 2.5).unwrap());
    let bounds = Bounds::new(Point2::new(-5.0, -5.0), Point2::new(6.0, 5.0)).unwrap();
    let scene = Scene::new(vec![wall], Point3::new(5.0, 0.0, 1.0), bounds).unwrap();
    // A 1 x 1 body centred at x = 0.8 reaches x = 1.3, 0.3 m into the wall.
    let state = WorldState::new(manikin(0.8, 0.0, 0.0, 0.5), scene).unwrap();
    let mut s = Scheduler::new(state, RunConfig::default()).unwrap();
    s.register(Box::new(RepulsionAgent::new("repulsion", GradientStep::default())), 1, true).unwrap();
    let l = |st: &WorldState| body_collision_length(&st.body, st.body.trunk, &st.scene);
    let mut last = l(&s.state());
    let start = last;
    for tick in 1..=100 {
        s.tick();
        let now = l(&s.state());
        if now > last + 1e-12 {
            return Err(format!("collision length rose {last} -> {now} at tick {tick}"));
        }
        last = now;
        if now == 0.0 {
            return Ok(format!("collision {start:.3} -> 0 in {tick} ticks, never increasing"));
        }
    }
    Err(format!("collision still {last} after 100 ticks"))
}

fn square(c: Pt, half: f64, theta: f64) -> Vec<Pt> {
    let (s, co) = theta.sin_cos();
    [(-half, -half), (half, -half), (half, half), (-half, half)]
        .iter()
        .map(|&(x, y)| (c.0 + co * x - s * y, c.1 + s * x + co * y))
        .collect()
}

fn gradient_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let fixed = square((0.0, 0.0), 0.5, 0.0);
    let fixed_poly = polygon(&fixed);
    let step = GradientStep::default();
    let (mut accepted, mut rejected, mut worst) = (0, 0, 0.0f64);
    while accepted < 50 {
        if rejected > 2000 {
            return Err(format!("only {accepted} smooth samples"));
        }
        let half = rng.gen_range(0.3..0.7);
        let pose = PlanarPose::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), rng.gen_range(-1.5..1.5));
        let moving = |p: PlanarPose| square((p.x, p.y), half, p.theta());
        let lib = |p: PlanarPose| collision_length(&fixed_poly, &polygon(&moving(p)));
        let oracle = |p: PlanarPose| convex_collision_length(&fixed, &moving(p));
        if oracle(pose) < 1e-3 {
            rejected += 1;
            continue;
        }
        let g = fd_gradient(lib, pose, step).map_err(|e| e.to_string())?;
        let mut sample_ok = true;
        let mut errs = [0.0; 3];
        for (axis, (fd, delta)) in [(g.x, step.delta_xy()), (g.y, step.delta_xy()), (g.theta, step.delta_theta())]
            .into_iter()
            .enumerate()
        {
            let along = |v: f64| {
                let mut q = [pose.x, pose.y, pose.theta()];
                q[axis] = v;
                oracle(PlanarPose::new(q[0], q[1], q[2]))
            };
            let at = [pose.x, pose.y, pose.theta()][axis];
            // A kink inside the stencil shows up as unequal one-sided slopes.
            let fwd = (along(at + delta) - along(at)) / delta;
            let bwd = (along(at) - along(at - delta)) / delta;
            if (fwd - bwd).abs() > 1e-2 * (1.0 + fwd.abs().max(bwd.abs())) {
                sample_ok = false;
                break;
            }
            let secant = central_difference(along, at, 1e-6).map_err(|e| e.to_string())?;
            errs[axis] = (fd - secant).abs() / secant.abs().max(1e-2);
        }
        if !sample_ok {
            rejected += 1;
            continue;
        }
        accepted += 1;
        worst = errs.iter().copied().fold(worst, f64::max);
    }

    // Unit-scale affine criteria: rounding of f stays well below 1e-12 once
    // divided by the stencil width.
    let mut affine_worst = 0.0f64;
    for _ in 0..200 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let pose = PlanarPose::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let g = fd_gradient(|p| c[0] + c[1] * p.x + c[2] * p.y + c[3] * p.theta(), pose, step).unwrap();
        affine_worst = affine_worst.max((g.x - c[1]).abs()).max((g.y - c[2]).abs()).max((g.theta - c[3]).abs());
    }
    check(
        worst <= 1e-3 && affine_worst <= 1e-12,
        format!(
            "50 overlaps ({rejected} samples rejected as kinked or disjoint): worst relative error {worst:.2e}; affine worst {affine_worst:.1e}"
        ),
    )
}

fn head_alignment() -> Verdict {
    let body = manikin(0.0, 0.0, 0.0, 0.2);
    let eye = eye_point(&body);
    let toward = |yaw: f64| eye + 3.0 * nalgebra::Vector3::new(yaw.cos(), yaw.sin(), 0.0);

    let mut s = Scheduler::new(free_state(body.clone(), toward(0.9)), RunConfig::default()).unwrap();
    s.register(Box::new(HeadOrientationAgent::new("head")), 1, true).unwrap();
    let start = misalignment(&s.state().body, &s.state().scene).unwrap();
    let mut firings = 0;
    let mut m = start;
    while m >= 1e-6 {
        if firings == 19 {
            return Err(format!("misalignment {m} after 19 firings from {start}"));
        }
        s.tick();
        firings += 1;
        m = misalignment(&s.state().body, &s.state().scene).unwrap();
    }

    let mut s = Scheduler::new(free_state(body.clone(), toward(1.5)), RunConfig::default()).unwrap();
    s.register(Box::new(HeadOrientationAgent::new("head")), 1, true).unwrap();
    let limit = body.limits.theta.max;
    let mut pinned_at = None;
    for tick in 0..60 {
        s.tick();
        let yaw = s.state().body.head.theta;
        if yaw > limit {
            return Err(format!("yaw {yaw} beyond limit {limit} at tick {tick}"));
        }
        match pinned_at {
            None if yaw == limit => pinned_at = Some(tick),
            Some(_) if yaw != limit => return Err(format!("yaw left the limit at tick {tick}: {yaw}")),
            _ => {}
        }
    }
    let pinned = pinned_at.ok_or("yaw never reached its limit")?;
    Ok(format!("0.9 rad aligned in {firings} firings; yaw pinned at {limit:.4} from tick {pinned} on"))
}

fn cone_adaptation() -> Verdict {
    let scenario = bundled::load("empty-plane").unwrap();
    let mut s = scenario.build(OperatorMode::Headless).map_err(|e| e.to_string())?;
    let limits = s.state().body.cone_limits;
    let within = |c: f64| (limits.min..=limits.max).contains(&c);
    let mut reached_max = None;
    for tick in 0..300u64 {
        s.tick();
        let c = s.state().body.cone_half_angle;
        if !within(c) {
            return Err(format!("aperture {c} outside limits at tick {tick}"));
        }
        match reached_max {
            None if c == limits.max => reached_max = Some(tick),
            Some(_) if c != limits.max => return Err(format!("aperture left its maximum at tick {tick}: {c}")),
            _ => {}
        }
    }
    let reached = reached_max.ok_or("aperture never reached its maximum")?;

    // Turn the head away so the target leaves the cone; only visibility runs.
    let mut state = (*s.state()).clone();
    state.body.head.theta = 0.6;
    let mut v = Scheduler::new(state, RunConfig::default()).unwrap();
    v.register(Box::new(VisibilityAgent::new("visibility", GradientStep::default(), RayFan::default())), 1, true)
        .unwrap();
    let mut last = v.state().body.cone_half_angle;
    let mut narrowing = 0;
    for tick in 0..80 {
        v.tick();
        let c = v.state().body.cone_half_angle;
        let expect = (last - limits.step).max(limits.min);
        if !within(c) || (c - expect).abs() > 1e-12 {
            return Err(format!("misaligned tick {tick}: aperture {last} -> {c}, expected {expect}"));
        }
        if c < last {
            narrowing += 1;
        }
        last = c;
    }
    check(
        last == limits.min,
        format!("maximum from tick {reached} and held; misaligned cone narrowed {narrowing} steps to the minimum"),
    )
}

fn window_rescue() -> Verdict {
    let scenario = bundled::load("wall-with-window").unwrap();
    let started = Instant::now();
    let report = scenario.build(OperatorMode::Headless).map_err(|e| e.to_string())?.run(|_| {});
    let elapsed = started.elapsed();
    let st = &report.final_state;
    let occluded = segment_occluded(eye_point(&st.body), st.scene.target, &st.scene);
    let collision = body_collision_length(&st.body, st.body.trunk, &st.scene);
    check(
        report.outcome == Outcome::Converged && elapsed < Duration::from_secs(5) && occluded == 0.0 && collision == 0.0,
        format!(
            "{:?} after {} ticks in {:.2} s; occluded {occluded}, collision {collision}",
            report.outcome,
            report.ticks,
            elapsed.as_secs_f64()
        ),
    )
}

fn waypoint(tick: u64, target: Option<[f64; 3]>) -> EventSpec {
    EventSpec { tick, action: EventAction::IntermediateTarget { target } }
}

fn pocket_rescue() -> Verdict {
    let base = bundled::load("concave-pocket").unwrap();
    let run = |o: Overrides| -> Result<(Outcome, u64), String> {
        let sc: Scenario = base.with_overrides(&o).map_err(|e| e.to_string())?;
        let r = sc.build(OperatorMode::Headless).map_err(|e| e.to_string())?.run(|_| {});
        Ok((r.outcome, r.ticks))
    };
    let script = bundled::script("concave-pocket.ops").ok_or("no bundled pocket script")?;
    let script = OperatorScript::parse(script).map_err(|e| e.to_string())?;
    let alone = run(Overrides { no_operator_script: true, ..Default::default() })?;
    let scripted = run(Overrides { operator_script: Some(script), ..Default::default() })?;
    let waypoints = run(Overrides {
        no_operator_script: true,
        events: vec![
            waypoint(100, Some([-0.4, 0.0, 0.9])),
            waypoint(150, Some([-0.4, 1.5, 0.9])),
            waypoint(200, Some([2.8, 1.5, 0.9])),
            waypoint(260, None),
        ],
        ..Default::default()
    })?;
    check(
        alone.0.exit_code() == 2 && scripted.0 == Outcome::Converged && waypoints.0 == Outcome::Converged,
        format!(
            "unassisted {:?} at {}; script {:?} at {}; waypoints {:?} at {}",
            alone.0, alone.1, scripted.0, scripted.1, waypoints.0, waypoints.1
        ),
    )
}

fn determinism() -> Verdict {
    let names: Vec<&str> = bundled::names().collect();
    let results: Vec<Result<String, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = names
            .iter()
            .map(|&name| {
                scope.spawn(move || {
                    let scenario = bundled::load(name).map_err(|e| e.to_string())?;
                    let digests = |threads: usize| -> Result<Vec<u64>, String> {
                        let mut s = scenario.build(OperatorMode::Headless).map_err(|e| e.to_string())?;
                        s.set_threads(threads).map_err(|e| e.to_string())?;
                        let mut out = Vec::new();
                        s.run(|r| out.push(r.digest));
                        Ok(out)
                    };
                    let reference = digests(1)?;
                    for run in 1..10 {
                        if digests(1)? != reference {
                            return Err(format!("{name}: run {run} differs"));
                        }
                    }
                    if digests(4)? != reference {
                        return Err(format!("{name}: 4 threads differ from 1"));
                    }
                    Ok(format!("{name} ({} ticks)", reference.len()))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let (ok, bad): (Vec<_>, Vec<_>) = results.into_iter().partition(Result::is_ok);
    if bad.is_empty() {
        let ok: Vec<String> = ok.into_iter().map(Result::unwrap).collect();
        Ok(format!("10 identical runs and 1 vs 4 threads identical: {}", ok.join(", ")))
    } else {
        Err(bad.into_iter().map(Result::unwrap_err).collect::<Vec<_>>().join("; "))
    }
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("rate-schedule", rate_schedule),
        ("attraction-walk", attraction_walk),
        ("repulsion-escape", repulsion_escape),
        ("gradient-oracle", gradient_oracle),
        ("head-alignment", head_alignment),
        ("cone-adaptation", cone_adaptation),
        ("window-rescue", window_rescue),
        ("pocket-rescue", pocket_rescue),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
