//! Worked examples checked against independent oracles: brute-force
//! enumeration, hand elimination, and hand-derived closed forms.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pipsolver::bench::{conditioning_row, experiment_accuracy, run_method, ExperimentConfig, Method};
use pipsolver::decomposition::{alpha, assign_hyperplanes, build_tree, BitString, Lambda};
use pipsolver::frame::Frame;
use pipsolver::linearpip::{solve_linear, FlatSpec};
use pipsolver::monomials::{build_order, count_degree, count_total, position_of, symmetric_power, MultiIndex};
use pipsolver::nodegen::{assemble_generic, leaf_nodes, AssemblyConfig, NodeSet};
use pipsolver::onedim::{chebyshev_parameters, solve_on_line, solve_univariate, LineSpec};
use pipsolver::pipsolver::{corrected_value, solve, DivisorProduct, SolverConfig, SubProblemFrame};
use pipsolver::polynomial::{embed_univariate, MultiPoly};
use pipsolver::vandermonde::{build_vandermonde, genericity_check, invert, lu_solve, DenseMatrix};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Every exponent tuple of total degree at most `n`, by nested counting.
fn brute_force_order(m: usize, n: usize) -> Vec<Vec<u32>> {
    let mut all = Vec::new();
    let mut t = vec![0u32; m];
    loop {
        if t.iter().sum::<u32>() as usize <= n {
            all.push(t.clone());
        }
        let mut i = 0;
        loop {
            if i == m {
                // Graded, then first variable dominant and descending.
                all.sort_by(|a, b| {
                    let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
                    da.cmp(&db).then_with(|| b.cmp(a))
                });
                return all;
            }
            t[i] += 1;
            if t[i] as usize <= n {
                break;
            }
            t[i] = 0;
            i += 1;
        }
    }
}

/// Plain Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

#[test]
fn order_matches_brute_force_enumeration() {
    for m in 1..=4 {
        for n in 0..=5 {
            let order = build_order(m, n).unwrap();
            let table: Vec<Vec<u32>> = order.table().into_iter().map(|i| i.0).collect();
            assert_eq!(table, brute_force_order(m, n), "({m},{n})");
        }
    }
    let by_degree_two = brute_force_order(3, 2).into_iter().filter(|t| t.iter().sum::<u32>() == 2).count();
    assert_eq!(count_degree(3, 2).unwrap(), by_degree_two);
    let order = build_order(3, 3).unwrap();
    assert_eq!(position_of(&order, &MultiIndex(vec![0, 0, 3])).unwrap(), brute_force_order(3, 3).len() - 1);
}

#[test]
fn graded_order_for_two_variables() {
    let order = build_order(2, 2).unwrap();
    let want: Vec<Vec<u32>> = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
    assert_eq!(order.table().into_iter().map(|i| i.0).collect::<Vec<_>>(), want);
}

#[test]
fn symmetric_power_of_ones() {
    let block = symmetric_power(&[1.0, 1.0, 1.0], 3);
    assert_eq!(block.len(), brute_force_order(3, 3).iter().filter(|t| t.iter().sum::<u32>() == 3).count());
    assert!(block.iter().all(|&v| v == 1.0));
}

#[test]
fn embedding_along_the_diagonal() {
    let r = FRAC_1_SQRT_2;
    let q = embed_univariate(&[0.0, 1.0], &[r, r], &[0.0, 0.0]).unwrap();
    // <x, xi> = (x1 + x2) / sqrt 2 expanded by hand.
    assert!(max_diff(q.coeffs(), &[0.0, r, r]) < 1e-15);
}

#[test]
fn univariate_against_gaussian_elimination() {
    let c = solve_univariate(&[1.0, 2.0, 3.0], &[1.0, 4.0, 9.0]).unwrap();
    let rows = [1.0f64, 2.0, 3.0].iter().map(|&t| vec![1.0, t, t * t]).collect();
    assert!(max_diff(&c, &gauss_solve(rows, vec![1.0, 4.0, 9.0])) < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=12 {
        let t = chebyshev_parameters(n + 1, 1.0);
        let values: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let rows = t.iter().map(|&ti| (0..=n as i32).map(|k| ti.powi(k)).collect()).collect();
        let oracle = gauss_solve(rows, values.clone());
        let d = max_diff(&solve_univariate(&t, &values).unwrap(), &oracle);
        assert!(d < 1e-9, "n = {n}: {d:e}");
    }
}

#[test]
fn line_solve_on_the_diagonal() {
    let r = FRAC_1_SQRT_2;
    let line = LineSpec::new(vec![r, r], vec![0.0, 0.0], 1.0).unwrap();
    let f = |x: &[f64]| x[0] + x[1];
    let (_, q) = solve_on_line(f, 1, &line).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let p = line.point(rng.gen_range(-3.0..3.0));
        assert!((q.evaluate(&p).unwrap() - f(&p)).abs() < 1e-13);
    }
}

#[test]
fn linear_solve_by_hand() {
    let r = FRAC_1_SQRT_2;
    let frame = Frame::new(vec![vec![r, r], vec![-r, r]]).unwrap();
    let flat = FlatSpec::new(frame, vec![0], vec![0.0, 0.0]).unwrap();
    let (_, q) = solve_linear(|x| x[0] + x[1], &flat).unwrap();
    assert!(q.evaluate(&[0.0, 0.0]).unwrap().abs() < 1e-15);
    assert!((q.evaluate(&[r, r]).unwrap() - 2f64.sqrt()).abs() < 1e-15);

    // Standard frame at the origin: c = (f(p1), f(p2) - f(p1), ..., f(p_{m+1}) - f(p1)).
    let f = |x: &[f64]| 0.5 + x.iter().enumerate().map(|(i, v)| (i as f64 - 1.5) * v * v).sum::<f64>();
    let (nodes, q) = solve_linear(f, &FlatSpec::full(4)).unwrap();
    let fv: Vec<f64> = nodes.iter().map(|(p, _)| f(p)).collect();
    let want: Vec<f64> = (0..5).map(|i| if i == 0 { fv[0] } else { fv[i] - fv[0] }).collect();
    assert_eq!(q.coeffs(), want.as_slice());
}

fn recursive_leaf_count(m: usize, n: usize) -> usize {
    if m == 1 || n == 1 {
        1
    } else {
        recursive_leaf_count(m, n - 1) + recursive_leaf_count(m - 1, n)
    }
}

#[test]
fn tree_shapes() {
    let t = build_tree(2, 2).unwrap();
    let sig: Vec<_> = t.leaves().iter().map(|&l| t.vertex(l).sigma).collect();
    assert_eq!(sig, vec![(2, 1), (1, 2)]);
    assert_eq!(sig.len(), count_total(1, 1).unwrap());
    let t = build_tree(3, 3).unwrap();
    assert_eq!((t.depth(), t.leaves().len()), (4, 6));
    for m in 2..=7 {
        for n in 2..=7 {
            assert_eq!(build_tree(m, n).unwrap().leaves().len(), recursive_leaf_count(m, n));
        }
    }
}

#[test]
fn alpha_against_floating_sum() {
    let lambda = Lambda::from_ratio(2, 1).unwrap();
    for (eps, want) in [("1", 2.0), ("01", -4.0), ("011", 4.0)] {
        let e: BitString = eps.parse().unwrap();
        let direct: f64 =
            e.0.iter()
                .enumerate()
                .map(|(i, &b)| if b { (-1f64).powi(i as i32) * 2f64.powi(i as i32 + 1) } else { 0.0 })
                .sum();
        assert_eq!(direct, want);
        assert_eq!(pipsolver::decomposition::HyperplaneSpec::alpha_f64(&spec_for(&e)), want);
        assert_eq!(alpha(&e, &lambda), num_rational::BigRational::from_float(want).unwrap());
    }
}

fn spec_for(eps: &BitString) -> pipsolver::decomposition::HyperplaneSpec {
    let t = build_tree(3, 3).unwrap();
    let map = assign_hyperplanes(&t, &Frame::standard(3), &Lambda::from_ratio(2, 1).unwrap()).unwrap();
    map.get(eps).unwrap().clone()
}

#[test]
fn worked_hyperplanes_for_three_by_three() {
    let h = spec_for(&"11".parse().unwrap());
    assert_eq!(h.normal, vec![0.0, 1.0, 0.0]);
    assert_eq!(h.base, vec![0.0, -2.0, 2.0]);
    let h = spec_for(&"01".parse().unwrap());
    assert_eq!((h.normal, h.base), (vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -4.0]));
}

#[test]
fn line_leaf_below_the_eleven_plane() {
    let t = build_tree(3, 3).unwrap();
    let map = assign_hyperplanes(&t, &Frame::standard(3), &Lambda::from_ratio(2, 1).unwrap()).unwrap();
    let leaf = t.find(&"11".parse().unwrap()).unwrap();
    assert_eq!(t.vertex(leaf).sigma, (1, 3));
    let nodes = leaf_nodes(&t, leaf, &map, &Frame::standard(3), 1.0, 1.0).unwrap();
    let xs: Vec<f64> = (1..=4).map(|k| ((2 * k - 1) as f64 * PI / 8.0).cos()).collect();
    for (i, (p, _)) in nodes.iter().enumerate() {
        assert!((p[0] - xs[i]).abs() < 1e-15);
        assert_eq!(&p[1..], &[-2.0, 2.0]);
    }

    let leaf = t.find(&"00".parse().unwrap()).unwrap();
    assert_eq!(t.vertex(leaf).sigma, (3, 1));
    let beta = map.base(leaf).to_vec();
    let nodes = leaf_nodes(&t, leaf, &map, &Frame::standard(3), 1.0, 1.0).unwrap();
    let mut want = vec![beta.clone()];
    for a in 0..3 {
        let mut p = beta.clone();
        p[a] += 1.0;
        want.push(p);
    }
    let got: Vec<Vec<f64>> = nodes.iter().map(|(p, _)| p.to_vec()).collect();
    assert_eq!(got, want);
}

#[test]
fn two_by_two_layout() {
    let cfg = AssemblyConfig { lambda: Lambda::from_ratio(2, 1).unwrap(), ..Default::default() };
    let a = assemble_generic(2, 2, &cfg).unwrap();
    assert_eq!(a.nodes.len(), 6);
    let on_split = a.nodes.iter().filter(|(p, _)| p[1] == 2.0).count();
    assert_eq!(on_split, 3);
    assert_eq!(assemble_generic(3, 3, &cfg).unwrap().nodes.len(), 20);
    assert_eq!(assemble_generic(1, 4, &cfg).unwrap().nodes.len(), 5);
}

#[test]
fn corrected_value_after_one_split() {
    // f = x1^2 + x1 x2 + x2^2, split line x2 = 2 (lambda = 2). On the line the
    // solver's first piece is f(x1, 2) = 4 + 2 x1 + x1^2, and by hand
    // f - Q_w = (x2 - 2)(x1 + x2 + 2), so the corrected value is x1 + x2 + 2.
    let f = |x: &[f64]| x[0] * x[0] + x[0] * x[1] + x[1] * x[1];
    let cfg = AssemblyConfig { lambda: Lambda::from_ratio(2, 1).unwrap(), ..Default::default() };
    let asm = assemble_generic(2, 2, &cfg).unwrap();
    let h = asm.hyperplanes.as_ref().unwrap().split_of(0).unwrap().clone();
    let q_w = MultiPoly::from_coeffs(2, 2, vec![4.0, 2.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
    let frame =
        SubProblemFrame { vertex: 1, correction: Some(q_w), divisor: DivisorProduct::one().times(&h), solution: None };
    for (p, label) in asm.nodes.iter() {
        if label.to_string() == "0" {
            let v = corrected_value(f, &frame, p).unwrap();
            assert!((v - (p[0] + p[1] + 2.0)).abs() < 1e-13);
        }
    }
    assert_eq!(corrected_value(f, &SubProblemFrame::root(), &[0.3, 0.4]).unwrap(), f(&[0.3, 0.4]));
}

#[test]
fn solver_examples() {
    let c = vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
    let q = MultiPoly::from_coeffs(2, 2, c.clone()).unwrap();
    let sol = solve(|x| q.evaluate(x).unwrap(), 2, 2, &SolverConfig::default()).unwrap();
    assert!(max_diff(sol.poly.coeffs(), &c) < 1e-12);

    for (m, n) in [(1, 3), (2, 4), (3, 3), (4, 2), (5, 1)] {
        let sol = solve(|_| 7.0, m, n, &SolverConfig::default()).unwrap();
        assert!((sol.poly.coeffs()[0] - 7.0).abs() < 1e-12);
        assert!(sol.poly.coeffs()[1..].iter().all(|c| c.abs() <= 1e-12));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let c: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let q = MultiPoly::from_coeffs(3, 3, c).unwrap();
    let sol = solve(|x| q.evaluate(x).unwrap(), 3, 3, &SolverConfig::default()).unwrap();
    let values: Vec<f64> = sol.nodes().iter().map(|(p, _)| q.evaluate(p).unwrap()).collect();
    let v = build_vandermonde(sol.nodes(), 3, 3).unwrap();
    assert!(max_diff(sol.poly.coeffs(), &lu_solve(&v, &values).unwrap().x) < 1e-9);
}

#[test]
fn operation_counts_of_small_cases() {
    let c = 40;
    let uni = solve(|x| x[0].sin(), 1, 5, &SolverConfig::default()).unwrap();
    assert!(uni.report.multiply_adds <= c * 25, "{}", uni.report.multiply_adds);
    let lin = solve(|x| x.iter().sum(), 5, 1, &SolverConfig::default()).unwrap();
    assert!(lin.report.multiply_adds <= c * 25, "{}", lin.report.multiply_adds);
    let other = solve(|x| x.iter().product::<f64>().cos(), 5, 1, &SolverConfig::default()).unwrap();
    assert_eq!(other.report.multiply_adds, lin.report.multiply_adds);
}

#[test]
fn vandermonde_displays() {
    let p = NodeSet::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let v = build_vandermonde(&p, 2, 1).unwrap();
    assert_eq!(v.to_rows(), vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]]);
    assert!(max_diff(&lu_solve(&v, &[1.0, 3.0, 0.0]).unwrap().x, &[1.0, 2.0, -1.0]) < 1e-15);

    let p = NodeSet::from_points(&[vec![-1.0], vec![0.0], vec![1.0]]).unwrap();
    let v = build_vandermonde(&p, 1, 2).unwrap();
    assert_eq!(v.to_rows(), vec![vec![1.0, -1.0, 1.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]]);
    assert!(max_diff(&lu_solve(&v, &[1.0, 0.0, 1.0]).unwrap().x, &[0.0, 0.0, 1.0]) < 1e-15);

    // V_{m,1}^{-1} for P = {0, e_1, ..., e_m}: first column (1, -1, ..., -1),
    // identity below the first row elsewhere.
    let m = 4;
    let mut pts = vec![vec![0.0; m]];
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        pts.push(e);
    }
    let inv = invert(&build_vandermonde(&NodeSet::from_points(&pts).unwrap(), m, 1).unwrap()).unwrap();
    for i in 0..=m {
        for j in 0..=m {
            let want = match (i, j) {
                (0, 0) => 1.0,
                (_, 0) => -1.0,
                (i, j) if i == j => 1.0,
                _ => 0.0,
            };
            assert!((inv.get(i, j) - want).abs() < 1e-15);
        }
    }
    let two = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(invert(&two).unwrap().to_rows(), vec![vec![1.0, 0.0], vec![-1.0, 1.0]]);
}

#[test]
fn genericity_displays() {
    let p = NodeSet::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let r = genericity_check(&p, 2, 1).unwrap();
    assert!(r.generic && r.abs_det_log.abs() < 1e-14);
    let p = NodeSet::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
    let r = genericity_check(&p, 2, 1).unwrap();
    assert!(!r.generic);
    assert_eq!(r.cond_1, Some(f64::INFINITY));
    let a = assemble_generic(3, 3, &AssemblyConfig::default()).unwrap();
    assert!(genericity_check(&a.nodes, 3, 3).unwrap().generic);
}

#[test]
fn conditioning_examples() {
    let row = conditioning_row(1, 1, &AssemblyConfig::default()).unwrap();
    assert!(row.cond_1.is_finite() && row.cond_1 >= 1.0);
    let row = conditioning_row(2, 2, &AssemblyConfig { rescale: true, ..Default::default() }).unwrap();
    assert!(row.cond_1.is_finite());
    let _ = row.within_bound();
}

#[test]
fn accuracy_experiment_three_by_three() {
    let cfg = ExperimentConfig {
        dims: 3..=3,
        degrees: 3..=3,
        reps: 5,
        methods: vec![Method::PipSolver],
        ..Default::default()
    };
    let mut buf = Vec::new();
    experiment_accuracy(&cfg, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    for rec in r.records() {
        assert!(rec.unwrap()[5].parse::<f64>().unwrap() <= 1e-9);
    }
}

#[test]
fn small_problems_are_fast() {
    let asm = assemble_generic(3, 2, &AssemblyConfig::default()).unwrap();
    let values: Vec<f64> = (0..asm.nodes.len()).map(|i| (i as f64).sin()).collect();
    for method in Method::ALL {
        let start = std::time::Instant::now();
        run_method(method, &asm, &values).unwrap();
        assert!(start.elapsed().as_secs_f64() < 0.1, "{method}");
    }
}
