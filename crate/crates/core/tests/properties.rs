use proptest::prelude::*;

use stability_lab::bundle::{
    harder_narasimhan, merge_step, phi, psi_flag, BundleSpec, FlagData, QuotientDatum, WeightVector,
};
use stability_lab::exact::{
    compare_root_ratio, compare_sqrt_ratio, fit_polynomial, Rational, RootRatio, SqrtRatio, UniPoly,
};
use stability_lab::test_config::{invariants_from_spectrum, ConfigError, ConfigInvariants};
use stability_lab::toric::{
    exact_integral, volume, weight_spectrum, Facet, LatticePolytope, PLConvexFunction,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| Rational::frac(n, d))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=50, 1i64..=12).prop_map(|(n, d)| Rational::frac(n, d))
}

fn bundle_spec() -> impl Strategy<Value = BundleSpec> {
    prop::collection::vec((1u32..=3, -4i64..=4, 1u32..=2), 1..=4)
        .prop_map(|t| BundleSpec::from_triples(&t))
}

/// Pieces of a bundle in a random order, cut into consecutive blocks.
fn arbitrary_flag(spec: &BundleSpec, order: &[usize], cuts: &[bool]) -> FlagData {
    let mut units: Vec<(u32, i64)> = spec
        .pieces
        .iter()
        .flat_map(|p| std::iter::repeat_n((p.rank, p.degree), p.multiplicity as usize))
        .collect();
    for (i, &j) in order.iter().enumerate() {
        let (a, b) = (i % units.len(), j % units.len());
        units.swap(a, b);
    }
    let mut quotients = vec![QuotientDatum::new(0, 0)];
    for (i, (r, d)) in units.into_iter().enumerate() {
        if i > 0 && cuts.get(i).copied().unwrap_or(false) {
            quotients.push(QuotientDatum::new(0, 0));
        }
        let last = quotients.last_mut().unwrap();
        last.rank += r;
        last.degree += d;
    }
    FlagData::new(quotients).unwrap()
}

fn increasing_weights(len: usize, seed: &[i64]) -> WeightVector {
    let mut w: Vec<i64> = (0..len)
        .map(|i| seed.get(i).copied().unwrap_or(0))
        .collect();
    w.sort();
    WeightVector(w)
}

fn square(a: i64, b: i64) -> LatticePolytope {
    LatticePolytope::from_facets(
        2,
        vec![
            Facet::new(vec![1, 0], 0),
            Facet::new(vec![0, 1], 0),
            Facet::new(vec![-1, 0], a),
            Facet::new(vec![0, -1], b),
        ],
    )
    .unwrap()
}

fn triangle(m: i64) -> LatticePolytope {
    LatticePolytope::from_facets(
        2,
        vec![
            Facet::new(vec![1, 0], 0),
            Facet::new(vec![0, 1], 0),
            Facet::new(vec![-1, -1], m),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, Rational::zero());
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
        }
    }

    #[test]
    fn rational_string_round_trip(a in rational()) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<Rational>().unwrap(), a);
    }

    #[test]
    fn polynomial_fit_is_exact(coeffs in prop::collection::vec(rational(), 1..=6), k0 in -5i64..=5) {
        let p = UniPoly::from_coeffs(coeffs);
        let degree = p.degree().unwrap_or(0);
        let samples: Vec<(i64, Rational)> =
            (k0..k0 + degree as i64 + 3).map(|k| (k, p.eval(&Rational::from(k)))).collect();
        let fit = fit_polynomial(&samples, degree, 2).unwrap();
        prop_assert_eq!(fit, p);
    }

    #[test]
    fn polynomial_fit_detects_wrong_degree(coeffs in prop::collection::vec(rational(), 3..=5)) {
        let p = UniPoly::from_coeffs(coeffs);
        let degree = p.degree().unwrap_or(0);
        prop_assume!(degree >= 2);
        let samples: Vec<(i64, Rational)> =
            (1..=degree as i64 + 3).map(|k| (k, p.eval(&Rational::from(k)))).collect();
        prop_assert!(fit_polynomial(&samples, degree - 1, 2).is_err());
    }

    #[test]
    fn sqrt_ratio_order_matches_floats(a in rational(), b in positive_rational(), c in rational(), d in positive_rational()) {
        let x = SqrtRatio::new(a, b).unwrap();
        let y = SqrtRatio::new(c, d).unwrap();
        let (fx, fy) = (x.to_f64(), y.to_f64());
        if (fx - fy).abs() > 1e-9 * (1.0 + fx.abs().max(fy.abs())) {
            prop_assert_eq!(compare_sqrt_ratio(&x, &y), fx.partial_cmp(&fy).unwrap());
        }
        let rx: RootRatio = x.clone().into();
        let ry: RootRatio = y.clone().into();
        prop_assert_eq!(compare_root_ratio(&rx, &ry), compare_sqrt_ratio(&x, &y));
    }

    #[test]
    fn psi_is_scale_invariant(spec in bundle_spec(), seed in prop::collection::vec(-6i64..=6, 4), c in 1i64..=5) {
        let hn = harder_narasimhan(&spec).unwrap();
        let w = increasing_weights(hn.len(), &seed);
        prop_assume!(w.0.iter().any(|&x| x != 0));
        prop_assert_eq!(psi_flag(&hn, &w).unwrap(), psi_flag(&hn, &w.scaled(c)).unwrap());
    }

    #[test]
    fn hn_flag_is_slope_decreasing(spec in bundle_spec()) {
        let hn = harder_narasimhan(&spec).unwrap();
        prop_assert!(hn.is_slope_decreasing());
        let rank: u64 = spec.pieces.iter().map(|p| (p.rank * p.multiplicity) as u64).sum();
        let degree: i64 = spec.pieces.iter().map(|p| p.degree * p.multiplicity as i64).sum();
        prop_assert_eq!(hn.total_rank(), rank);
        prop_assert_eq!(hn.total_degree(), degree);
    }

    #[test]
    fn psi_never_exceeds_hn_norm(
        spec in bundle_spec(),
        order in prop::collection::vec(0usize..8, 0..8),
        cuts in prop::collection::vec(any::<bool>(), 8),
        seed in prop::collection::vec(-8i64..=8, 8),
    ) {
        let flag = arbitrary_flag(&spec, &order, &cuts);
        let w = increasing_weights(flag.len(), &seed);
        prop_assume!(w.0.iter().any(|&x| x != 0));
        let psi = psi_flag(&flag, &w).unwrap();
        let bound = phi(&harder_narasimhan(&spec).unwrap()).unwrap().value;
        prop_assert!(compare_sqrt_ratio(&psi, &bound) != std::cmp::Ordering::Greater,
            "{} > {}", psi, bound);
    }

    #[test]
    fn merging_equal_weights_keeps_psi(
        spec in bundle_spec(),
        cuts in prop::collection::vec(any::<bool>(), 8),
        seed in prop::collection::vec(-5i64..=5, 8),
        at in 0usize..8,
    ) {
        let flag = arbitrary_flag(&spec, &[], &cuts);
        prop_assume!(flag.len() >= 2);
        let i = at % (flag.len() - 1);
        let mut w = increasing_weights(flag.len(), &seed);
        w.0[i + 1] = w.0[i];
        let mut sorted = w.0.clone();
        sorted.sort();
        prop_assume!(sorted == w.0 && w.0.iter().any(|&x| x != 0));
        let (merged, mw) = merge_step(&flag, &w, i).unwrap();
        prop_assert_eq!(merged.len(), flag.len() - 1);
        prop_assert_eq!(psi_flag(&merged, &mw).unwrap(), psi_flag(&flag, &w).unwrap());
    }

    #[test]
    fn twist_and_base_change_laws(
        a0 in positive_rational(), a1 in rational(), b0 in rational(), b1 in rational(),
        extra in positive_rational(), nu in rational(), d in 1u32..=5, n in 1u32..=3, r in 1u32..=3,
    ) {
        let q = &(&b0 * &b0) / &a0 + extra;
        let inv = ConfigInvariants::from_coefficients(n, r, a0, a1, b0, b1, q).unwrap();
        let tw = inv.twist(&nu);
        prop_assert_eq!(&tw.b1 - &(&(&tw.b0 * &tw.a1) / &tw.a0), inv.futaki.clone());
        prop_assert_eq!(tw.n2_squared(), inv.n2_squared());
        prop_assert_eq!(&tw.psi_hat, &inv.psi_hat);
        let back = tw.twist(&-nu.clone());
        prop_assert_eq!(&back.q, &inv.q);
        let bc = inv.base_change(d).unwrap();
        prop_assert_eq!(&bc.psi, &inv.psi);
        prop_assert_eq!(&bc.psi_hat, &inv.psi_hat);
    }

    #[test]
    fn futaki_vanishes_for_linear_functions(a in 1i64..=3, b in 1i64..=3, c0 in -3i64..=3, c1 in -3i64..=3, d in -3i64..=3) {
        let p = square(a, b);
        let f = PLConvexFunction::affine(vec![c0, c1], d);
        let s = weight_spectrum(&p, &f, 1, 8).unwrap();
        match invariants_from_spectrum(&s, &[]) {
            Ok(inv) => prop_assert!(inv.futaki.is_zero()),
            // Only the trivial configuration has Q = 0.
            Err(e) => {
                prop_assert!(matches!(e, ConfigError::NonPositiveQ(_)), "{e}");
                prop_assert!((c0, c1, d) == (0, 0, 0));
            }
        }
    }

    // Creases along lattice lines keep every linearity region a lattice
    // polytope, so the power traces are polynomials rather than
    // quasi-polynomials.
    #[test]
    fn fitted_moments_match_exact_integrals(
        m in 1i64..=3,
        base in prop::collection::vec(-2i64..=2, 3),
        crease in 0usize..3,
        j in 0i64..=3,
        s in 1i64..=2,
    ) {
        let p = triangle(m);
        let dir = [[1, 0], [0, 1], [1, 1]][crease];
        let j = j.min(m);
        let bent = [base[0] + s * dir[0], base[1] + s * dir[1]];
        let f = PLConvexFunction::from_pieces(&[(&[base[0], base[1]], base[2]), (&bent, base[2] - s * j)]);
        let s = weight_spectrum(&p, &f, 1, 9).unwrap();
        let inv = match invariants_from_spectrum(&s, &[2, 4]) {
            Ok(inv) => inv,
            Err(e) => {
                prop_assert!(matches!(e, ConfigError::NonPositiveQ(_)), "{e}");
                prop_assert!(exact_integral(&p, &f, 2, false).unwrap().is_zero());
                return Ok(());
            }
        };
        prop_assert_eq!(&inv.b0, &exact_integral(&p, &f, 1, false).unwrap());
        prop_assert_eq!(&inv.np_pow_p[&2], &exact_integral(&p, &f, 2, true).unwrap());
        prop_assert_eq!(&inv.np_pow_p[&4], &exact_integral(&p, &f, 4, true).unwrap());
    }

    #[test]
    fn ehrhart_leading_coefficient_is_volume(a in 1i64..=4, b in 1i64..=4) {
        for p in [square(a, b), triangle(a)] {
            let counts: Vec<(i64, Rational)> =
                (1..=6).map(|k| (k, Rational::from(p.lattice_points(k).len()))).collect();
            let poly = fit_polynomial(&counts, 2, 2).unwrap();
            prop_assert_eq!(poly.coeff(2), volume(&p));
            prop_assert_eq!(poly.coeff(0), Rational::one());
        }
    }
}
