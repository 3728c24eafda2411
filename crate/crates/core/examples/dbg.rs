use mcfobs::contour::{curvature_on_contour, extract_contour};
use mcfobs::distance::{redistance, signed_distance, DistanceCap};
use mcfobs::grid::{Grid2, RegionMask, ScalarField};

fn main() {
    // Mask-derived disk distance: curvature statistics.
    let g = Grid2::square(128, 1.0).unwrap();
    let mask = RegionMask::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) < 0.25);
    let d = signed_distance(&mask, DistanceCap::uncapped(&g));
    let c = extract_contour(&d, 0.0).unwrap();
    let ks = curvature_on_contour(&d, &c);
    let mean = ks.mean();
    let maxabs = ks.max_abs();
    println!("mask-disk 128: n={} mean kappa={mean:.3} max|kappa|={maxabs:.3} skipped={}", ks.samples.len(), ks.skipped);

    // Analytic field for comparison.
    let fa = ScalarField::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) - 0.25);
    let ca = extract_contour(&fa, 0.0).unwrap();
    let ka = curvature_on_contour(&fa, &ca);
    println!("analytic-disk 128: mean={:.3} max|k|={:.3}", ka.mean(), ka.max_abs());

    // Redistanced mask field.
    let rd = redistance(&d, DistanceCap::uncapped(&g)).unwrap();
    let cr = extract_contour(&rd, 0.0).unwrap();
    let kr = curvature_on_contour(&rd, &cr);
    println!("redistanced mask-disk: mean={:.3} max|k|={:.3}", kr.mean(), kr.max_abs());

    // Redistance of analytic disk: crossing preservation.
    let out = redistance(&fa, DistanceCap::uncapped(&g)).unwrap();
    let c_in = extract_contour(&fa, 0.0).unwrap();
    let c_out = extract_contour(&out, 0.0).unwrap();
    println!(
        "redistance analytic: vc_in={} vc_out={}",
        c_in.vertex_count(),
        c_out.vertex_count()
    );
    let mut worst = 0.0f64;
    let n = c_in.vertex_count().min(c_out.vertex_count());
    for (p, q) in c_in.vertices().take(n).zip(c_out.vertices().take(n)) {
        worst = worst.max(p.dist(q));
    }
    println!("worst vertex shift = {:.3e} (spacing {:.3e})", worst, g.spacing);
    // Value agreement near front.
    let mut worst_v = 0.0f64;
    for k in 0..g.len() {
        if fa.values[k].abs() < 3.0 * g.spacing {
            worst_v = worst_v.max((out.values[k] - fa.values[k]).abs());
        }
    }
    println!("worst near-front value diff = {:.3e} = {:.3} s", worst_v, worst_v / g.spacing);

    // Upwind gradient of mask distance.
    let band = DistanceCap::uncapped(&g).value() / 2.0;
    let s = g.spacing;
    let mut worst_g: f64 = 0.0;
    let mut worst_at = (0, 0);
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            if d.at(i, j).abs() >= band {
                continue;
            }
            let c0 = d.at(i, j);
            let gx = ((c0 - d.at(i - 1, j)) / s).max(-(d.at(i + 1, j) - c0) / s).max(0.0);
            let gy = ((c0 - d.at(i, j - 1)) / s).max(-(d.at(i, j + 1) - c0) / s).max(0.0);
            let m = gx.hypot(gy);
            if (m - 1.0).abs() > worst_g {
                worst_g = (m - 1.0).abs();
                worst_at = (i, j);
            }
        }
    }
    println!("upwind gradient worst dev = {worst_g:.3} at {worst_at:?} d={:.4}", d.at(worst_at.0, worst_at.1));
}
