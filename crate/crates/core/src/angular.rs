//! Angular-momentum coupling helpers. All angular momenta are passed doubled
//! (`two_j = 2j`) so half-integers stay exact.

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley phases),
/// evaluated with the Racah formula.
pub fn clebsch_gordan(two_j1: i32, two_m1: i32, two_j2: i32, two_m2: i32, two_j: i32, two_m: i32) -> f64 {
    if two_m1 + two_m2 != two_m {
        return 0.0;
    }
    if two_m1.abs() > two_j1 || two_m2.abs() > two_j2 || two_m.abs() > two_j {
        return 0.0;
    }
    if two_j < (two_j1 - two_j2).abs() || two_j > two_j1 + two_j2 {
        return 0.0;
    }
    if (two_j1 + two_j2 + two_j) % 2 != 0
        || (two_j1 + two_m1) % 2 != 0
        || (two_j2 + two_m2) % 2 != 0
        || (two_j + two_m) % 2 != 0
    {
        return 0.0;
    }
    // Everything below is in integer units after halving.
    let h = |x: i32| x / 2;
    let a = h(two_j1 + two_j2 - two_j);
    let b = h(two_j1 - two_j2 + two_j);
    let c = h(-two_j1 + two_j2 + two_j);
    let d = h(two_j1 + two_j2 + two_j) + 1;
    let pre = ((two_j + 1) as f64 * factorial(a) * factorial(b) * factorial(c) / factorial(d)).sqrt();
    let pre = pre
        * (factorial(h(two_j + two_m))
            * factorial(h(two_j - two_m))
            * factorial(h(two_j1 - two_m1))
            * factorial(h(two_j1 + two_m1))
            * factorial(h(two_j2 - two_m2))
            * factorial(h(two_j2 + two_m2)))
        .sqrt();

    let mut sum = 0.0;
    for k in 0..=d {
        let d1 = a - k;
        let d2 = h(two_j1 - two_m1) - k;
        let d3 = h(two_j2 + two_m2) - k;
        let d4 = h(two_j - two_j2 + two_m1) + k;
        let d5 = h(two_j - two_j1 - two_m2) + k;
        if d1 < 0 || d2 < 0 || d3 < 0 || d4 < 0 || d5 < 0 {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / (factorial(k) * factorial(d1) * factorial(d2) * factorial(d3) * factorial(d4) * factorial(d5));
    }
    pre * sum
}

/// Matrix element <l' m | Y_20 | l m> of the spherical harmonic between orbital states.
pub fn y20_element(l_prime: u32, l: u32, m: i32) -> f64 {
    let (lp, l2) = (2 * l_prime as i32, 2 * l as i32);
    let norm = (5.0 * (l2 + 1) as f64 / (4.0 * std::f64::consts::PI * (lp + 1) as f64)).sqrt();
    norm * clebsch_gordan(l2, 0, 4, 0, lp, 0) * clebsch_gordan(l2, 2 * m, 4, 0, lp, 2 * m)
}

/// <j, m+1 | j_+ | j m> for doubled arguments.
pub fn raising(two_j: i32, two_m: i32) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}
