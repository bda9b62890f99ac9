#[test]
fn debug_perturbed_stages() {
    use cliffmorse::clifford::build_irreducible;
    use cliffmorse::flow::*;
    use cliffmorse::linalg::{max_abs, Mat};
    use std::time::Instant;
    let fam = build_irreducible(3).unwrap().repeated(2).unwrap();
    let small = build_irreducible(3).unwrap();
    let basis_fixed = Mat::identity(8, 8).view((0, 0), (8, 4)).into_owned();
    let basis_hopf = Mat::identity(8, 8).view((0, 4), (8, 4)).into_owned();
    let h = cliffmorse::hopf::AffineHopfMap::new(basis_fixed, basis_hopf, small).unwrap();
    let grid = grid_from_affine_hopf(&h, 16).unwrap();
    let perturbed = perturb_grid(&grid, 0.05, 42).unwrap();
    let opts = ShortenOptions::default();

    let t0 = Instant::now();
    let reference = reference_geodesic(&fam, 0).unwrap();
    let (norm0, rep0) = normalize_meridian(&perturbed, &fam, &reference, &opts).unwrap();
    println!("n0: straightened={} gauge={:.3} [{:.1}s]", rep0.straightened, rep0.max_gauge_angle, t0.elapsed().as_secs_f64());
    let t1 = Instant::now();
    let (g1, rep) = suspension_invert(&norm0, &fam, &opts).unwrap();
    println!("s0: maxE={:.9} iters={} pert={} [{:.1}s]", rep.max_energy, rep.total_iterations, rep.perturbations, t1.elapsed().as_secs_f64());
    let witness = &fam.mats[0];
    println!("g1: k={} res={} level={} step={:.3} north_diff={:.4}",
             g1.k, g1.res, g1.level, g1.max_adjacent_step(), max_abs(&(g1.north_value() - witness)));
    let t2 = Instant::now();
    let (g1r, angle) = rebase_to_witness(&g1, &fam).unwrap();
    println!("rebase1: angle={angle:.3} [{:.1}s]", t2.elapsed().as_secs_f64());
    let g1u = if g1r.max_adjacent_step() >= GRID_STEP_BOUND { println!("upsampling dim2!"); g1r.upsample().unwrap() } else { g1r };
    let t3 = Instant::now();
    let reference1 = reference_geodesic(&fam, 1).unwrap();
    let (norm1, rep1) = normalize_meridian(&g1u, &fam, &reference1, &opts).unwrap();
    println!("n1: straightened={} gauge={:.3} change={:.3} [{:.1}s]", rep1.straightened, rep1.max_gauge_angle, rep1.max_change, t3.elapsed().as_secs_f64());
    let t4 = Instant::now();
    let (g2, rep) = suspension_invert(&norm1, &fam, &opts).unwrap();
    println!("s1: maxE={:.9} iters={} pert={} [{:.1}s]", rep.max_energy, rep.total_iterations, rep.perturbations, t4.elapsed().as_secs_f64());
    println!("g2: k={} res={} level={} step={:.3}", g2.k, g2.res, g2.level, g2.max_adjacent_step());
    let (g2r, angle) = rebase_to_witness(&g2, &fam).unwrap();
    println!("rebase2: angle={angle:.3}");
    let loopg = g2r.upsample().unwrap();
    let eta = loop_winding(&loopg, &fam, 2).unwrap();
    println!("loop eta = {eta}");
}
