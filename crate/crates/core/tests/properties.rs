use proptest::prelude::*;

use gaspower_core::conversion::{smoothing_s, smoothing_s_dx, ConversionLaw};
use gaspower_core::gas::{friction_lambda, GasConstants, PipeFriction, RE_MIN};
use gaspower_core::io::scenario::{BusSpec, ConversionSpec, EdgeSpec, LineSpec, NodeSpec};
use gaspower_core::network::{EdgeKind, NodeKind};
use gaspower_core::power::BusKind;
use gaspower_core::{build_layout, build_network, ScenarioDescription, TimeSeries};

/// Root of the Colebrook residual in x = 1/√λ by plain bisection.
fn colebrook_bisection(re: f64, d: f64, k: f64) -> f64 {
    let f = |x: f64| x + 2.0 * (2.51 * x / re + k / (3.71 * d)).log10();
    let (mut lo, mut hi) = (0.5, 100.0);
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    1.0 / (x * x)
}

fn flux_for(re: f64, d: f64) -> f64 {
    re * GasConstants::default().viscosity / d
}

#[test]
fn colebrook_matches_bisection() {
    let (d, k) = (0.5, 8e-6);
    let lambda = friction_lambda(flux_for(1e6, d), d, k, GasConstants::default().viscosity);
    assert!((lambda - colebrook_bisection(1e6, d, k)).abs() <= 1e-10);
}

#[test]
fn vacuum_speed_of_sound() {
    let c = GasConstants::default().c_vac();
    assert!((c - 364.9).abs() < 0.05, "{c}");
}

proptest! {
    #[test]
    fn pressure_and_density_are_inverse(rho in 1e-6f64..=50.0) {
        let g = GasConstants::default();
        let back = g.density(g.pressure(rho).unwrap()).unwrap();
        prop_assert!((back - rho).abs() <= 1e-12 * rho);
    }

    #[test]
    fn pressure_is_increasing(mut rho in prop::collection::vec(1e-3f64..50.0, 2..40)) {
        let g = GasConstants::default();
        rho.sort_by(f64::total_cmp);
        rho.dedup();
        let p: Vec<f64> = rho.iter().map(|&r| g.pressure(r).unwrap()).collect();
        prop_assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn colebrook_fixed_point(log_re in RE_MIN.log10()..8.0, d in 0.1f64..1.5, k in 0.0f64..1e-4) {
        let re = 10f64.powf(log_re);
        let lambda = friction_lambda(flux_for(re, d), d, k, GasConstants::default().viscosity);
        let x = 1.0 / lambda.sqrt();
        let rhs = -2.0 * (2.51 * x / re + k / (3.71 * d)).log10();
        prop_assert!((x - rhs).abs() <= 1e-10 * x);
    }

    #[test]
    fn friction_opposes_flow(rho in 1.0f64..50.0, q in -200.0f64..200.0) {
        let g = GasConstants::default();
        let f = PipeFriction { diameter: 0.6, area: 0.09 * std::f64::consts::PI, roughness: 8e-6, rho0: g.rho0, viscosity: g.viscosity };
        let s = f.source(rho, q);
        prop_assert_eq!(s, -f.source(rho, -q));
        if q != 0.0 {
            prop_assert!(s.signum() == -q.signum());
        } else {
            prop_assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn smoothing_properties(a in 0.001f64..1.0, b in 0.001f64..1.0, eps in 0.01f64..100.0) {
        let tol = 1e-12 * (1.0 + (a + b) * eps);
        prop_assert_eq!(smoothing_s(0.0, a, b, eps), 0.0);
        prop_assert!((smoothing_s(eps, a, b, eps) - a * eps).abs() <= tol);
        prop_assert!((smoothing_s(-eps, a, b, eps) + b * eps).abs() <= tol);
        prop_assert!((smoothing_s_dx(eps, a, b, eps) - a).abs() <= 1e-12);
        prop_assert!((smoothing_s_dx(-eps, a, b, eps) - b).abs() <= 1e-12);
        // degree four: the fifth finite difference on an even grid vanishes
        let h = eps / 3.0;
        let v: Vec<f64> = (0..6).map(|i| smoothing_s(-eps + i as f64 * h, a, b, eps)).collect();
        let fifth = v[5] - 5.0 * v[4] + 10.0 * v[3] - 10.0 * v[2] + 5.0 * v[1] - v[0];
        prop_assert!(fifth.abs() <= 1e-9 * (a + b) * eps);
    }

    #[test]
    fn conversion_law_is_c1(eps in 0.1f64..10.0) {
        let law = ConversionLaw::new(0.0796, 0.0229, eps).unwrap();
        let h = 1e-8 * eps;
        for x in [-eps, eps] {
            let left = (law.flow(x) - law.flow(x - h)) / h;
            let right = (law.flow(x + h) - law.flow(x)) / h;
            prop_assert!((left - right).abs() <= 1e-6 * left.abs());
            prop_assert!((law.flow(x + 1e-13) - law.flow(x - 1e-13)).abs() <= 1e-12);
        }
        prop_assert_eq!(law.flow(0.0), 0.0);
    }
}

/// Random connected gas network: a tree over `n` nodes with extra chords,
/// node 0 the source, leaves sinks. Edges are pipes or short pipes.
fn random_scenario(
    n: usize,
    parents: &[usize],
    chords: &[(usize, usize)],
    kinds: &[u8],
    buses: usize,
    dx: f64,
) -> ScenarioDescription {
    let mut s = ScenarioDescription::default();
    s.solver.dx = dx;
    let id = |i: usize| format!("n{i}");
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (parents[i - 1] % i, i)).collect();
    edges.extend(chords.iter().map(|&(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
    let mut is_pipe = vec![true; edges.len()];
    for (k, _) in edges.iter().enumerate() {
        is_pipe[k] = kinds[k % kinds.len()] % 3 != 0;
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        let kind = if is_pipe[k] {
            EdgeKind::Pipe
        } else {
            EdgeKind::ShortPipe
        };
        s.gas.edges.push(EdgeSpec {
            id: format!("e{k}"),
            kind,
            from: id(a),
            to: id(b),
            length: is_pipe[k].then_some(1000.0 + 731.0 * (k % 9) as f64),
            diameter: is_pipe[k].then_some(0.5),
            roughness: None,
            area: None,
        });
    }
    let degree = |v: usize| edges.iter().filter(|&&(a, b)| a == v || b == v).count();
    for i in 0..n {
        let kind = match i {
            0 => NodeKind::Source,
            _ if degree(i) == 1 => NodeKind::Sink,
            _ => NodeKind::Inner,
        };
        s.gas.nodes.push(NodeSpec {
            id: id(i),
            kind,
            flow: (kind != NodeKind::Inner).then(|| TimeSeries::constant(1.0)),
            coupling: None,
        });
    }
    for b in 0..buses {
        s.power.buses.push(BusSpec::new(
            format!("b{b}"),
            if b == 0 { BusKind::Slack } else { BusKind::PQ },
        ));
        if b > 0 {
            s.power.lines.push(LineSpec {
                from: format!("b{}", b - 1),
                to: format!("b{b}"),
                r: 0.01,
                x: 0.1,
                b: 0.0,
                tap: 1.0,
                shift_deg: 0.0,
            });
        }
    }
    if buses > 0 {
        if let Some(sink) = s.gas.nodes.iter().find(|n| n.kind == NodeKind::Sink) {
            s.coupling.conversions.push(ConversionSpec {
                id: "c".into(),
                gas_node: sink.id.clone(),
                bus: "b0".into(),
                epsilon: None,
            });
        }
    }
    s
}

proptest! {
    #[test]
    fn random_networks_give_square_systems(
        n in 2usize..12,
        parents in prop::collection::vec(0usize..100, 11),
        chords in prop::collection::vec((0usize..100, 0usize..100), 0..4),
        kinds in prop::collection::vec(any::<u8>(), 1..8),
        buses in 0usize..4,
        dx in 200.0f64..5000.0,
    ) {
        let s = random_scenario(n, &parents, &chords, &kinds, buses, dx);
        let net = build_network(&s).unwrap();
        let lay = build_layout(&net, dx);
        let c = lay.counts();
        prop_assert_eq!(c.unknowns(), c.equations());
        prop_assert_eq!(c.unknowns(), lay.n);
        let lay = &lay;
        let mut seen: Vec<usize> = lay
            .edges
            .iter()
            .flat_map(|b| (0..b.points).flat_map(move |j| [b.rho(j), b.q(j)]))
            .chain((0..net.buses.len()).flat_map(|i| (0..4).map(move |k| lay.bus(i) + k)))
            .chain((0..net.conversions.len()).map(|k| lay.conversion(k)))
            .collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..lay.n).collect::<Vec<_>>());
        for (i, node) in net.nodes.iter().enumerate() {
            let incident = net.edges.iter().filter(|e| e.from == i).count() + net.edges.iter().filter(|e| e.to == i).count();
            prop_assert_eq!(node.degree(), incident);
        }
    }
}
