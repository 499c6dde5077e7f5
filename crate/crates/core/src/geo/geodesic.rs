//! Inverse geodesic problem on the WGS-84 ellipsoid (Vincenty's iteration), plus a
//! spherical haversine distance for the opt-in spherical mode.
//!
//! Vincenty's iteration fails to converge for nearly antipodal pairs, roughly when the
//! longitude difference is within a degree of 180° and the latitudes are close to
//! opposite (for example (0°, 0°) to (0.5°, 179.7°)). Those pairs fall back to the
//! auxiliary-sphere arc scaled by the mean meridional radius, which is within 0.2 %
//! of the true geodesic there because such geodesics run close to a meridian.

use crate::scalar::Scalar;

pub const WGS84_A_M: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// Mean meridional radius (quarter meridian × 2/π), metres.
pub const WGS84_MERIDIAN_RADIUS_M: f64 = 6_367_449.145_823_4;
pub const MEAN_EARTH_RADIUS_KM: f64 = 6371.0088;

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic<T> {
    pub distance_km: T,
    /// False when the near-antipodal fallback produced the value.
    pub converged: bool,
}

/// Geodesic distance in km between two (lat, lon) points given in degrees.
pub fn geodesic_km<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    inverse(a, b).distance_km
}

/// Full inverse solution. The arguments are put in a canonical order first, so the
/// result is bitwise symmetric.
pub fn inverse<T: Scalar>(a: (T, T), b: (T, T)) -> Geodesic<T> {
    if a == b {
        return Geodesic {
            distance_km: T::zero(),
            converged: true,
        };
    }
    let swap = match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Greater) => true,
        Some(std::cmp::Ordering::Equal) => a.1 > b.1,
        _ => false,
    };
    let (p, q) = if swap { (b, a) } else { (a, b) };
    vincenty(p, q)
}

fn vincenty<T: Scalar>((lat1, lon1): (T, T), (lat2, lon2): (T, T)) -> Geodesic<T> {
    let one = T::one();
    let two = T::of(2.0);
    let pi = T::of(std::f64::consts::PI);
    let a = T::of(WGS84_A_M);
    let f = T::of(WGS84_F);
    let b = a * (one - f);
    let tol = T::of(1e-12).max(T::epsilon() * T::of(8.0));

    let mut l = (lon2 - lon1).to_radians();
    if l > pi {
        l = l - two * pi;
    } else if l < -pi {
        l = l + two * pi;
    }
    let u1 = ((one - f) * lat1.to_radians().tan()).atan();
    let u2 = ((one - f) * lat2.to_radians().tan()).atan();
    let (sin_u1, cos_u1) = u1.sin_cos();
    let (sin_u2, cos_u2) = u2.sin_cos();

    let mut lambda = l;
    let mut state = None;
    for _ in 0..MAX_ITERATIONS {
        let (sin_l, cos_l) = lambda.sin_cos();
        let t1 = cos_u2 * sin_l;
        let t2 = cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_l;
        let sin_sigma = (t1 * t1 + t2 * t2).sqrt();
        if sin_sigma == T::zero() {
            return Geodesic {
                distance_km: T::zero(),
                converged: true,
            };
        }
        let cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_l;
        let sigma = sin_sigma.atan2(cos_sigma);
        let sin_alpha = cos_u1 * cos_u2 * sin_l / sin_sigma;
        let cos2_alpha = one - sin_alpha * sin_alpha;
        // equatorial line: cos2_alpha = 0
        let cos_2sm = if cos2_alpha != T::zero() {
            cos_sigma - two * sin_u1 * sin_u2 / cos2_alpha
        } else {
            T::zero()
        };
        let c = f / T::of(16.0)
            * cos2_alpha
            * (T::of(4.0) + f * (T::of(4.0) - T::of(3.0) * cos2_alpha));
        let prev = lambda;
        lambda = l
            + (one - c)
                * f
                * sin_alpha
                * (sigma
                    + c * sin_sigma * (cos_2sm + c * cos_sigma * (-one + two * cos_2sm * cos_2sm)));
        if lambda.abs() > pi {
            break;
        }
        if (lambda - prev).abs() < tol {
            state = Some((sin_sigma, cos_sigma, sigma, cos2_alpha, cos_2sm));
            break;
        }
    }

    let Some((sin_sigma, cos_sigma, sigma, cos2_alpha, cos_2sm)) = state else {
        return Geodesic {
            distance_km: antipodal_fallback_km(sin_u1, cos_u1, sin_u2, cos_u2, l),
            converged: false,
        };
    };

    let u_sq = cos2_alpha * (a * a - b * b) / (b * b);
    let big_a = one
        + u_sq / T::of(16384.0)
            * (T::of(4096.0)
                + u_sq * (T::of(-768.0) + u_sq * (T::of(320.0) - T::of(175.0) * u_sq)));
    let big_b = u_sq / T::of(1024.0)
        * (T::of(256.0) + u_sq * (T::of(-128.0) + u_sq * (T::of(74.0) - T::of(47.0) * u_sq)));
    let delta_sigma = big_b
        * sin_sigma
        * (cos_2sm
            + big_b / T::of(4.0)
                * (cos_sigma * (-one + two * cos_2sm * cos_2sm)
                    - big_b / T::of(6.0)
                        * cos_2sm
                        * (T::of(-3.0) + T::of(4.0) * sin_sigma * sin_sigma)
                        * (T::of(-3.0) + T::of(4.0) * cos_2sm * cos_2sm)));
    let metres = b * big_a * (sigma - delta_sigma);
    Geodesic {
        distance_km: metres / T::of(1000.0),
        converged: true,
    }
}

fn antipodal_fallback_km<T: Scalar>(sin_u1: T, cos_u1: T, sin_u2: T, cos_u2: T, l: T) -> T {
    let (sin_l, cos_l) = l.sin_cos();
    let t1 = cos_u2 * sin_l;
    let t2 = cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_l;
    let sin_sigma = (t1 * t1 + t2 * t2).sqrt();
    let cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_l;
    sin_sigma.atan2(cos_sigma) * T::of(WGS84_MERIDIAN_RADIUS_M / 1000.0)
}

/// Great-circle distance on a sphere of mean Earth radius. Only used in spherical mode.
pub fn haversine_km<T: Scalar>((lat1, lon1): (T, T), (lat2, lon2): (T, T)) -> T {
    let two = T::of(2.0);
    let dlat = (lat2 - lat1).to_radians();
    let dlon = (lon2 - lon1).to_radians();
    let h = (dlat / two).sin().powi(2)
        + lat1.to_radians().cos() * lat2.to_radians().cos() * (dlon / two).sin().powi(2);
    two * T::of(MEAN_EARTH_RADIUS_KM) * h.sqrt().min(T::one()).asin()
}
