use super::*;
use crate::generator::{generate_element, GeneratorParams};
use crate::model::{Canvas, Graph, Point};
use MetricId as M;

fn drawing(n: usize, edges: Vec<(usize, usize)>, pos: &[(f64, f64)]) -> Drawing {
    Drawing::straight(
        Graph::new(n, edges).unwrap(),
        pos.iter().map(|&(x, y)| Point::new(x, y)).collect(),
    )
}

fn x_drawing() -> Drawing {
    drawing(
        4,
        vec![(0, 1), (2, 3)],
        &[(400.0, 400.0), (600.0, 600.0), (400.0, 600.0), (600.0, 400.0)],
    )
}

fn triangle() -> Drawing {
    drawing(3, vec![(0, 1), (1, 2), (2, 0)], &[(100.0, 100.0), (400.0, 100.0), (250.0, 400.0)])
}

fn path() -> Drawing {
    drawing(3, vec![(0, 1), (1, 2)], &[(100.0, 100.0), (400.0, 100.0), (250.0, 400.0)])
}

#[test]
fn x_drawing_crossing_metrics() {
    let d = x_drawing();
    assert_eq!(evaluate(&d, M::NumberOfEdgeCrossings).unwrap().raw, 1.0);
    let angle = evaluate(&d, M::CrossingAngle).unwrap();
    assert!((angle.raw - 90.0).abs() < 1e-9);
    assert!((angle.score - 1.0).abs() < 1e-9);
    // one crossing: standard deviation needs two
    assert!(!evaluate(&d, M::CrossingAngleSd).unwrap().defined);
    let diff = evaluate(&d, M::DifferenceBetweenAngles).unwrap();
    assert!(diff.raw.abs() < 1e-9 && (diff.score - 1.0).abs() < 1e-9);
}

#[test]
fn face_area_needs_a_bounded_face() {
    let t = evaluate(&triangle(), M::FaceArea).unwrap();
    assert!(t.defined);
    let expected = 0.5 * 300.0 * 300.0 / 1e6;
    assert!((t.raw - expected).abs() < 1e-9 * expected.max(1.0));
    assert!(!evaluate(&path(), M::FaceArea).unwrap().defined);
    assert!(!evaluate(&path(), M::ConvexFaces).unwrap().defined);
    assert!(!evaluate(&triangle(), M::UniformFaces).unwrap().defined);
    assert_eq!(evaluate(&triangle(), M::ConvexFaces).unwrap().raw, 1.0);
}

#[test]
fn uniform_edge_lengths_matches_direct_recomputation() {
    for seed in 0..20 {
        let d = generate_element(&GeneratorParams::with_seed(seed)).unwrap();
        // oracle: sum segment lengths of independently flattened curves
        let lengths: Vec<f64> = (0..d.graph.edge_count())
            .map(|e| {
                let pts = crate::geometry::flatten_edge(&d, e).unwrap();
                pts.points().windows(2).map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt()).sum()
            })
            .collect();
        let m = lengths.len() as f64;
        let mean = lengths.iter().sum::<f64>() / m;
        let var = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / m;
        let cv = var.sqrt() / mean;
        let r = evaluate(&d, M::UniformEdgeLengths).unwrap();
        assert!((r.raw - cv).abs() < 1e-9 * cv.max(1.0), "seed {seed}");
        assert!((r.score - 1.0 / (1.0 + cv)).abs() < 1e-12);
    }
}

#[test]
fn evaluate_all_matches_per_id_evaluation() {
    for seed in 0..5 {
        let d = generate_element(&GeneratorParams::with_seed(seed)).unwrap();
        let all = evaluate_all(&d).unwrap();
        assert_eq!(all.results.len(), 31);
        assert_eq!(all.drawing_hash, d.content_hash());
        for id in MetricId::ALL {
            assert_eq!(*all.get(id), evaluate(&d, id).unwrap());
        }
        for r in &all.results {
            if r.defined {
                assert!(r.raw.is_finite() && (0.0..=1.0).contains(&r.score), "{:?}", r);
            }
        }
        assert_eq!(all, evaluate_all(&d).unwrap());
    }
}

#[test]
fn metric_vector_json_round_trips() {
    let d = generate_element(&GeneratorParams::with_seed(3)).unwrap();
    let v = evaluate_all(&d).unwrap();
    let text = v.to_json();
    assert!(text.contains("\"number_of_edge_crossings\": {"));
    let back: MetricVector = serde_json::from_str(&text).unwrap();
    assert_eq!(back, v);
    assert!(serde_json::from_str::<MetricVector>(r#"{"drawing_hash":"x","results":{}}"#).is_err());
}

#[test]
fn unknown_ids_are_errors() {
    assert_eq!(
        evaluate_named(&triangle(), "edge_curve"),
        Err(MetricsError::UnknownMetric("edge_curve".into()))
    );
    assert!(explain_named("nope").is_err());
    assert!(evaluate_named(&triangle(), "area").is_ok());
}

#[test]
fn invalid_drawing_is_rejected() {
    let mut d = triangle();
    d.curvatures[0] = 2.0;
    assert!(matches!(evaluate(&d, M::Area), Err(MetricsError::InvalidDrawing(_))));
}

#[test]
fn explanations() {
    assert!(explain(M::FaceArea).contains("mean bounded face area"));
    assert!(explain(M::NumberOfEdgeCrossings).contains("non-adjacent"));
    for id in MetricId::ALL {
        assert!(!explain(id).is_empty());
    }
}

/// Rigid motions keep every metric except the axis- or canvas-anchored ones.
const AXIS_DEPENDENT: [MetricId; 6] = [
    M::Area,
    M::AspectRatio,
    M::EdgeOrthogonality,
    M::NodeOrthogonality,
    M::DistributeNodesEvenly,
    M::GlobalSymmetry,
];
const CANVAS_ANCHORED: [MetricId; 2] = [M::NodeOrthogonality, M::DistributeNodesEvenly];

fn small_element(seed: u64) -> Drawing {
    // shrink into the canvas centre so transformed copies stay on canvas
    let d = generate_element(&GeneratorParams {
        seed,
        node_count_range: (4, 12),
        max_edges: 20,
        ..Default::default()
    })
    .unwrap();
    d.transformed(|p| Point::new(300.0 + p.x * 0.4, 300.0 + p.y * 0.4), d.canvas, 1.0)
}

fn assert_close(a: &MetricResult, b: &MetricResult, tol: f64, what: &str) {
    assert_eq!(a.defined, b.defined, "{what} {:?}", a.id);
    if a.defined {
        assert!((a.score - b.score).abs() <= tol, "{what} {:?}: {} vs {}", a.id, a.score, b.score);
    }
}

#[test]
fn translation_invariance() {
    for seed in 0..10 {
        let d = small_element(seed);
        let moved = d.transformed(|p| p + Point::new(37.5, -81.25), d.canvas, 1.0);
        let (a, b) = (evaluate_all(&d).unwrap(), evaluate_all(&moved).unwrap());
        for id in MetricId::ALL.iter().filter(|id| !CANVAS_ANCHORED.contains(id)) {
            assert_close(a.get(*id), b.get(*id), 1e-6, "translate");
        }
    }
}

#[test]
fn rotation_invariance() {
    for seed in 0..10 {
        let d = small_element(seed);
        let c = Point::new(500.0, 500.0);
        let (s, co) = (0.7f64.sin(), 0.7f64.cos());
        let rotated = d.transformed(
            |p| {
                let v = p - c;
                c + Point::new(co * v.x - s * v.y, s * v.x + co * v.y)
            },
            d.canvas,
            1.0,
        );
        let (a, b) = (evaluate_all(&d).unwrap(), evaluate_all(&rotated).unwrap());
        for id in MetricId::ALL.iter().filter(|id| !AXIS_DEPENDENT.contains(id)) {
            // flattening is not rotation-exact; crossings/faces counts agree
            assert_close(a.get(*id), b.get(*id), 1e-3, "rotate");
        }
    }
}

#[test]
fn joint_scaling_keeps_scores() {
    for seed in 0..10 {
        let d = small_element(seed);
        let k = 2.0;
        let scaled = d.transformed(|p| p * k, Canvas::new(d.canvas.width * k, d.canvas.height * k), k);
        let (a, b) = (evaluate_all(&d).unwrap(), evaluate_all(&scaled).unwrap());
        for id in MetricId::ALL {
            assert_close(a.get(id), b.get(id), 2e-3, "scale");
        }
        for id in MetricId::ALL {
            if [M::Area, M::MaximumEdgeLength, M::TotalEdgeLength, M::WhitespaceToInkRatio].contains(&id)
                || [M::KeepNodesApartFromEdges, M::PathBendiness, M::FaceArea].contains(&id)
            {
                continue;
            }
            let (x, y) = (a.get(id), b.get(id));
            if x.defined {
                assert!((x.raw - y.raw).abs() <= 2e-3 * x.raw.abs().max(1.0), "raw {id}: {} vs {}", x.raw, y.raw);
            }
        }
    }
}

#[test]
fn adding_a_crossing_never_raises_the_crossing_score() {
    let base = drawing(
        6,
        vec![(0, 1), (2, 3), (4, 5)],
        &[(100.0, 100.0), (300.0, 300.0), (100.0, 300.0), (300.0, 100.0), (600.0, 100.0), (600.0, 300.0)],
    );
    let before = evaluate(&base, M::NumberOfEdgeCrossings).unwrap();
    let mut crossed = base.clone();
    crossed.positions[5] = Point::new(50.0, 200.0);
    let after = evaluate(&crossed, M::NumberOfEdgeCrossings).unwrap();
    assert!(after.raw > before.raw);
    assert!(after.score <= before.score);
}

#[test]
fn breaking_mirror_symmetry_never_raises_global_symmetry() {
    // symmetric about the vertical line x = 500
    let sym = drawing(
        5,
        vec![(0, 1), (1, 2), (2, 3), (3, 4)],
        &[(300.0, 300.0), (400.0, 500.0), (500.0, 450.0), (600.0, 500.0), (700.0, 300.0)],
    );
    let s0 = evaluate(&sym, M::GlobalSymmetry).unwrap();
    assert_eq!(s0.raw, 1.0);
    for dx in [40.0, 90.0, 150.0] {
        let mut moved = sym.clone();
        moved.positions[4] = Point::new(700.0 + dx, 300.0 - dx);
        let s1 = evaluate(&moved, M::GlobalSymmetry).unwrap();
        assert!(s1.score <= s0.score);
    }
}

#[test]
fn hand_checked_values() {
    // square with one diagonal on a 1000 canvas
    let d = drawing(
        4,
        vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
        &[(200.0, 200.0), (600.0, 200.0), (600.0, 600.0), (200.0, 600.0)],
    );
    let v = evaluate_all(&d).unwrap();
    // every node sits on the 62.5 pitch grid? 200/62.5 = 3.2 -> no; 600/62.5 = 9.6 -> no
    assert_eq!(v.get(M::NodeOrthogonality).raw, 0.0);
    // 4 axis-aligned edges and one diagonal: mean deviation 45/5
    assert!((v.get(M::EdgeOrthogonality).raw - 9.0).abs() < 1e-9);
    // two equal triangles
    assert!((v.get(M::UniformFaces).raw).abs() < 1e-9);
    assert!((v.get(M::FaceArea).raw - 80_000.0 / 1e6).abs() < 1e-9);
    // angular resolution: min angle 45 at nodes 0 and 2 (degree 3), ideal 120
    assert!((v.get(M::AngularResolution).raw - 45.0).abs() < 1e-9);
    assert!((v.get(M::AngularResolution).score - 45.0 / 120.0).abs() < 1e-9);
    // no crossings
    assert_eq!(v.get(M::NumberOfEdgeCrossings).score, 1.0);
    assert!(!v.get(M::CrossingAngle).defined);
    // straight edges
    assert_eq!(v.get(M::DegreeOfEdgeBends).score, 1.0);
    assert_eq!(v.get(M::NumberOfBends).raw, 0.0);
    // ink bbox: 400 + 2 * 8 on each side
    assert!((v.get(M::Area).raw - 416.0 * 416.0).abs() < 1e-9);
    assert!((v.get(M::AspectRatio).raw - 1.0).abs() < 1e-12);
    // whitespace: 2 * (4*400 + 400 sqrt 2) + 4 * pi * 64
    let ink = 2.0 * (1600.0 + 400.0 * 2f64.sqrt()) + 4.0 * std::f64::consts::PI * 64.0;
    assert!((v.get(M::WhitespaceToInkRatio).raw - (1.0 - ink / 1e6)).abs() < 1e-12);
    // all pairs adjacent except (1,3): path 1-0-3 or 1-2-3, interior has degree 3 -> surplus 1
    assert!((v.get(M::NumberOfBranches).raw - 1.0 / 6.0).abs() < 1e-12);
    // node 1 to node 3 via node 0: 800 drawn vs 400 sqrt 2 direct
    let spl = (5.0 + 800.0 / (400.0 * 2f64.sqrt())) / 6.0;
    assert!((v.get(M::ShortestPathLength).raw - spl).abs() < 1e-9);
    assert!(v.get(M::GlobalSymmetry).raw == 1.0);
}
