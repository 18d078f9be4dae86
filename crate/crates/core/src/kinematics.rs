//! Homogeneous transformation chain edge -> tool -> spindle -> workpiece.
//!
//! Lengths are in mm and angles in rad. The composite for a tooth at one
//! instant is always `T_sw * (T_ts * T_ct)`, built by [`Transform4::chain`].

use std::f64::consts::{PI, TAU};
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::tool::{CuttingEdgePoint, ToolDefinition};

/// 4x4 homogeneous transform, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform4(pub [[f64; 4]; 4]);

impl Transform4 {
    pub const IDENTITY: Transform4 = Transform4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub fn translation(&self) -> [f64; 3] {
        [self.0[0][3], self.0[1][3], self.0[2][3]]
    }

    /// `sw * (ts * ct)`.
    #[inline]
    pub fn chain(sw: &Transform4, ts: &Transform4, ct: &Transform4) -> Transform4 {
        sw * &(ts * ct)
    }

    /// Applies the transform to `(x, y, z, 1)`.
    #[inline(always)]
    pub fn apply(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * x + m[0][1] * y + m[0][2] * z + m[0][3],
            m[1][0] * x + m[1][1] * y + m[1][2] * z + m[1][3],
            m[2][0] * x + m[2][1] * y + m[2][2] * z + m[2][3],
        ]
    }

    /// Only the height row of [`apply`](Self::apply).
    #[inline(always)]
    pub fn apply_z(&self, x: f64, y: f64, z: f64) -> f64 {
        let m = &self.0;
        m[2][0] * x + m[2][1] * y + m[2][2] * z + m[2][3]
    }

    /// Max deviation of the rotation block from orthonormality, and whether
    /// the bottom row is exactly `(0, 0, 0, 1)`.
    pub fn rigidity_error(&self) -> (f64, bool) {
        let m = &self.0;
        let mut err: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|k| m[a][k] * m[b][k]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                err = err.max((dot - expect).abs());
            }
        }
        (err, m[3] == [0.0, 0.0, 0.0, 1.0])
    }
}

impl Mul for &Transform4 {
    type Output = Transform4;

    #[inline]
    fn mul(self, rhs: &Transform4) -> Transform4 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] + a[i][3] * b[3][j];
            }
        }
        Transform4(out)
    }
}

impl Mul for Transform4 {
    type Output = Transform4;

    fn mul(self, rhs: Transform4) -> Transform4 {
        &self * &rhs
    }
}

/// Spindle state derived from either cutting speed or spindle speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuttingKinematics {
    /// rev/min
    pub spindle_speed: f64,
    /// rad/s
    pub angular_velocity: f64,
    /// mm/s
    pub feed_speed: f64,
    /// mm/tooth
    pub feed_per_tooth: f64,
    /// m/min, when derivable
    pub cutting_speed: Option<f64>,
}

/// How the feed is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Feed {
    /// mm/tooth
    PerTooth(f64),
    /// mm/s
    Speed(f64),
}

/// Resolves the spindle and feed speeds. Exactly one of
/// `cutting_speed` (m/min) and `spindle_speed` (rpm) must be given.
pub fn derive_kinematics(
    cutting_speed: Option<f64>,
    spindle_speed: Option<f64>,
    feed: Feed,
    teeth: usize,
    diameter: f64,
) -> Result<CuttingKinematics> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::config(name, format!("must be > 0, got {v}")))
        }
    };
    if teeth == 0 {
        return Err(Error::config("tool.teeth", "must be at least 1"));
    }
    positive("tool.diameter_mm", diameter)?;
    let rpm = match (cutting_speed, spindle_speed) {
        (Some(vc), None) => 1000.0 * positive("process.cutting_speed_m_min", vc)? / (PI * diameter),
        (None, Some(n)) => positive("process.spindle_speed_rpm", n)?,
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "process.cutting_speed_m_min, process.spindle_speed_rpm",
                "give exactly one of cutting speed and spindle speed",
            ))
        }
        (None, None) => {
            return Err(Error::config(
                "process.cutting_speed_m_min, process.spindle_speed_rpm",
                "one of cutting speed and spindle speed is required",
            ))
        }
    };
    let teeth_f = teeth as f64;
    let (feed_per_tooth, feed_speed) = match feed {
        Feed::PerTooth(fz) => {
            let fz = positive("process.feed_per_tooth_mm", fz)?;
            (fz, fz * teeth_f * rpm / 60.0)
        }
        Feed::Speed(vf) => {
            let vf = positive("process.feed_speed_mm_min", vf)?;
            (vf * 60.0 / (teeth_f * rpm), vf)
        }
    };
    Ok(CuttingKinematics {
        spindle_speed: rpm,
        angular_velocity: TAU * rpm / 60.0,
        feed_speed,
        feed_per_tooth,
        cutting_speed: Some(PI * diameter * rpm / 1000.0),
    })
}

/// Kinematic state of one cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessParameters {
    pub angular_velocity: f64,
    pub feed_speed: f64,
    pub phase: f64,
    pub depth_of_cut: f64,
    pub feed_per_tooth: f64,
    pub initial_position: [f64; 3],
    pub spindle_speed: f64,
    pub cutting_speed: Option<f64>,
}

impl ProcessParameters {
    pub fn new(
        kin: CuttingKinematics,
        depth_of_cut: f64,
        phase: f64,
        initial_position: [f64; 3],
    ) -> Result<Self> {
        let params = Self {
            angular_velocity: kin.angular_velocity,
            feed_speed: kin.feed_speed,
            phase,
            depth_of_cut,
            feed_per_tooth: kin.feed_per_tooth,
            initial_position,
            spindle_speed: kin.spindle_speed,
            cutting_speed: kin.cutting_speed,
        };
        params.validate(None)?;
        Ok(params)
    }

    /// Checks positivity and, given a tooth count, the feed consistency
    /// `v_f == f_z * z_n * n / 60`.
    pub fn validate(&self, teeth: Option<usize>) -> Result<()> {
        if !(self.angular_velocity.is_finite() && self.angular_velocity > 0.0) {
            return Err(Error::domain("angular velocity must be > 0"));
        }
        if !(self.feed_speed.is_finite() && self.feed_speed > 0.0) {
            return Err(Error::domain("feed speed must be > 0"));
        }
        if !(self.depth_of_cut.is_finite() && self.depth_of_cut > 0.0) {
            return Err(Error::domain("depth of cut must be > 0"));
        }
        if !self.phase.is_finite() || self.initial_position.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("phase and initial position must be finite"));
        }
        if let Some(z) = teeth {
            let expect = self.feed_per_tooth * z as f64 * self.spindle_speed / 60.0;
            if (expect - self.feed_speed).abs() > 1e-9 * expect.abs().max(1.0) {
                return Err(Error::domain(format!(
                    "feed speed {} mm/s inconsistent with f_z*z_n*n/60 = {expect}",
                    self.feed_speed
                )));
            }
        }
        Ok(())
    }
}

/// A cutting-edge point expressed in the workpiece frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkpiecePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
    pub tooth: usize,
}

/// Edge frame to tool frame for tooth `k` (1-based).
pub fn edge_to_tool_transform(tool: &ToolDefinition, k: usize) -> Result<Transform4> {
    let runout = tool.runout(k).ok_or_else(|| {
        Error::domain(format!("tooth index {k} outside 1..={}", tool.teeth()))
    })?;
    let (sf, cf) = tool.radial_rake().sin_cos();
    let (sp, cp) = tool.axial_rake().sin_cos();
    let index = (k - 1) as f64;
    Ok(Transform4([
        [cf, sf * cp, sf * sp, tool.diameter() / 2.0 + index * runout.radial],
        [-sf, cf * cp, cf * sp, 0.0],
        [0.0, -sp, cp, index * runout.axial],
        [0.0, 0.0, 0.0, 1.0],
    ]))
}

/// Angular offset of tooth `k` at time zero: `φ + 2π(k-1)/z_n`.
#[inline]
pub fn tooth_phase(phase: f64, k: usize, teeth: usize) -> f64 {
    phase + TAU * (k - 1) as f64 / teeth as f64
}

/// Tool frame to spindle frame: a planar rotation by
/// `θ = φ + 2π(k-1)/z_n - ωt` with the sign layout
/// `[[cos θ, sin θ], [-sin θ, cos θ]]`.
pub fn tool_to_spindle_transform(
    phase: f64,
    k: usize,
    teeth: usize,
    angular_velocity: f64,
    t: f64,
) -> Transform4 {
    rotation_for_angle(tooth_phase(phase, k, teeth) - angular_velocity * t)
}

#[inline]
pub(crate) fn rotation_for_angle(theta: f64) -> Transform4 {
    let (s, c) = theta.sin_cos();
    Transform4([
        [c, s, 0.0, 0.0],
        [-s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Spindle frame to workpiece frame: straight feed along `Y_W`.
pub fn spindle_to_workpiece_transform(origin: [f64; 3], feed_speed: f64, t: f64) -> Transform4 {
    Transform4([
        [1.0, 0.0, 0.0, origin[0]],
        [0.0, 1.0, 0.0, origin[1] + feed_speed * t],
        [0.0, 0.0, 1.0, origin[2]],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Composite edge-to-workpiece transform for tooth `k` at time `t`.
pub fn composite_transform(
    tool: &ToolDefinition,
    params: &ProcessParameters,
    k: usize,
    t: f64,
) -> Result<Transform4> {
    let ct = edge_to_tool_transform(tool, k)?;
    let ts = tool_to_spindle_transform(params.phase, k, tool.teeth(), params.angular_velocity, t);
    let sw = spindle_to_workpiece_transform(params.initial_position, params.feed_speed, t);
    Ok(Transform4::chain(&sw, &ts, &ct))
}

/// Maps one edge point of tooth `k` at time `t` into the workpiece frame.
pub fn transform_point(
    tool: &ToolDefinition,
    params: &ProcessParameters,
    k: usize,
    t: f64,
    p: &CuttingEdgePoint,
) -> Result<WorkpiecePoint> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let m = composite_transform(tool, params, k, t)?;
    let [x, y, z] = m.apply(p.x, p.y, p.z);
    Ok(WorkpiecePoint { x, y, z, t, tooth: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tool::{edge_point, Runout};
    use proptest::prelude::*;

    /// Textbook 4x4 product, row by column, written independently of
    /// `Transform4`'s multiplication.
    fn naive_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..4 {
                    *cell += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn naive_apply(m: &[[f64; 4]; 4], p: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            for k in 0..4 {
                out[i] += m[i][k] * p[k];
            }
        }
        out
    }

    fn case1() -> (ToolDefinition, ProcessParameters) {
        let tool = ToolDefinition::new(
            10.0,
            5.0,
            2,
            0.6f64.to_radians(),
            0.0,
            vec![Runout::default(), Runout { radial: 0.011, axial: 0.003 }],
        )
        .unwrap();
        let kin = derive_kinematics(Some(170.0), None, Feed::PerTooth(0.6), 2, 10.0).unwrap();
        let params = ProcessParameters::new(kin, 0.5, 0.0, [5.0, -10.0, 0.0]).unwrap();
        (tool, params)
    }

    #[test]
    fn edge_to_tool_examples() {
        let tool = ToolDefinition::ideal(10.0, 5.0, 2).unwrap();
        let t = edge_to_tool_transform(&tool, 1).unwrap();
        let mut expect = Transform4::IDENTITY;
        expect.0[0][3] = 5.0;
        assert_eq!(t, expect);

        let raked = ToolDefinition::new(10.0, 5.0, 2, 0.6f64.to_radians(), 0.0, vec![]).unwrap();
        let t = edge_to_tool_transform(&raked, 1).unwrap();
        assert!((t.0[0][0] - 0.9999452).abs() < 1e-7);
        assert!((t.0[0][1] - 0.0104717).abs() < 1e-7);
        assert_eq!(t.translation()[0], 5.0);

        let r = Runout { radial: 0.011, axial: 0.003 };
        let ro = ToolDefinition::new(10.0, 5.0, 2, 0.0, 0.0, vec![Runout::default(), r]).unwrap();
        let t = edge_to_tool_transform(&ro, 2).unwrap();
        let [x, y, z] = t.translation();
        assert!((x - 5.011).abs() < 1e-12);
        assert_eq!(y, 0.0);
        assert!((z - 0.003).abs() < 1e-12);

        assert!(edge_to_tool_transform(&ro, 0).is_err());
        assert!(edge_to_tool_transform(&ro, 3).is_err());
    }

    #[test]
    fn tool_to_spindle_examples() {
        assert_eq!(tool_to_spindle_transform(0.0, 1, 3, 100.0, 0.0), Transform4::IDENTITY);
        let t = tool_to_spindle_transform(0.0, 2, 2, 1.0, 0.0);
        assert!((t.0[0][0] + 1.0).abs() < 1e-15);
        assert!((t.0[1][1] + 1.0).abs() < 1e-15);
        assert!(t.0[0][1].abs() < 1e-15);
        assert_eq!(t.0[2][2], 1.0);
        let omega = 566.667;
        let t = tool_to_spindle_transform(PI / 2.0, 1, 2, omega, (PI / 2.0) / omega);
        for i in 0..4 {
            for j in 0..4 {
                assert!((t.0[i][j] - Transform4::IDENTITY.0[i][j]).abs() < 1e-12);
            }
        }
        // sign layout: sin in (0,1), -sin in (1,0)
        let t = tool_to_spindle_transform(0.3, 1, 1, 0.0, 0.0);
        assert_eq!(t.0[0][1], 0.3f64.sin());
        assert_eq!(t.0[1][0], -(0.3f64.sin()));
    }

    #[test]
    fn spindle_to_workpiece_examples() {
        assert_eq!(spindle_to_workpiece_transform([0.0; 3], 5.0, 0.0), Transform4::IDENTITY);
        let t = spindle_to_workpiece_transform([0.0, -10.0, 0.0], 108.225, 0.1);
        assert!((t.translation()[1] - 0.8225).abs() < 1e-9);
        let t = spindle_to_workpiece_transform([3.0, 1.0, 0.5], 2.0, 2.0);
        assert_eq!(t.translation(), [3.0, 5.0, 0.5]);
    }

    #[test]
    fn derive_examples() {
        let k = derive_kinematics(Some(170.0), None, Feed::PerTooth(0.6), 2, 10.0).unwrap();
        assert!((k.spindle_speed - 5411.27).abs() < 0.01);
        assert!((k.angular_velocity - 566.667).abs() < 1e-3);
        assert!((k.feed_speed - 108.225).abs() < 1e-3);

        let k = derive_kinematics(None, Some(995.0), Feed::Speed(125.0 / 60.0), 4, 50.0).unwrap();
        assert!((k.feed_speed - 2.0833).abs() < 1e-4);
        assert!((k.feed_per_tooth - 125.0 / (995.0 * 4.0)).abs() < 1e-15);

        let k = derive_kinematics(None, Some(60.0), Feed::PerTooth(1.0), 1, 10.0).unwrap();
        assert!((k.angular_velocity - TAU).abs() < 1e-15);
        assert!((k.feed_speed - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derive_requires_exactly_one_speed() {
        let both = derive_kinematics(Some(170.0), Some(5000.0), Feed::PerTooth(0.6), 2, 10.0);
        assert!(matches!(both, Err(Error::Config { .. })));
        let none = derive_kinematics(None, None, Feed::PerTooth(0.6), 2, 10.0);
        assert!(matches!(none, Err(Error::Config { .. })));
        assert!(derive_kinematics(Some(-1.0), None, Feed::PerTooth(0.6), 2, 10.0).is_err());
    }

    #[test]
    fn transform_point_zero_case() {
        let tool = ToolDefinition::ideal(10.0, 5.0, 2).unwrap();
        let kin = derive_kinematics(None, Some(60.0), Feed::PerTooth(0.1), 2, 10.0).unwrap();
        let params = ProcessParameters::new(kin, 0.5, 0.0, [1.0, 2.0, 3.0]).unwrap();
        let p = edge_point(0.0, 5.0).unwrap();
        let w = transform_point(&tool, &params, 1, 0.0, &p).unwrap();
        assert_eq!((w.x, w.y, w.z), (6.0, 2.0, 3.0));
        assert!(transform_point(&tool, &params, 1, -1.0, &p).is_err());
    }

    #[test]
    fn transform_point_matches_matrix_chain_oracle() {
        let (tool, params) = case1();
        for k in 1..=2 {
            for l in [-2.0, -0.5, 0.0, 1.3, 2.17] {
                let t = 0.001;
                let p = edge_point(l, 5.0).unwrap();
                let got = transform_point(&tool, &params, k, t, &p).unwrap();

                // Independent oracle: matrices written out from the formulas.
                let (gf, gp) = (0.6f64.to_radians(), 0.0f64);
                let ro = tool.runout(k).unwrap();
                let kk = (k - 1) as f64;
                let ct = [
                    [gf.cos(), gf.sin() * gp.cos(), gf.sin() * gp.sin(), 5.0 + kk * ro.radial],
                    [-gf.sin(), gf.cos() * gp.cos(), gf.cos() * gp.sin(), 0.0],
                    [0.0, -gp.sin(), gp.cos(), kk * ro.axial],
                    [0.0, 0.0, 0.0, 1.0],
                ];
                let th = params.phase + 2.0 * PI * kk / 2.0 - params.angular_velocity * t;
                let ts = [
                    [th.cos(), th.sin(), 0.0, 0.0],
                    [-th.sin(), th.cos(), 0.0, 0.0],
                    [0.0, 0.0, 1.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0],
                ];
                let sw = [
                    [1.0, 0.0, 0.0, 5.0],
                    [0.0, 1.0, 0.0, -10.0 + params.feed_speed * t],
                    [0.0, 0.0, 1.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0],
                ];
                let chain = naive_mul(&naive_mul(&sw, &ts), &ct);
                let o = naive_apply(&chain, [p.x, p.y, p.z, 1.0]);
                assert!((got.x - o[0]).abs() < 1e-12);
                assert!((got.y - o[1]).abs() < 1e-12);
                assert!((got.z - o[2]).abs() < 1e-12);
                assert_eq!(o[3], 1.0);
            }
        }
    }

    #[test]
    fn teeth_are_related_by_half_turn() {
        let tool = ToolDefinition::ideal(10.0, 5.0, 2).unwrap();
        let kin = derive_kinematics(Some(170.0), None, Feed::PerTooth(0.6), 2, 10.0).unwrap();
        let params = ProcessParameters::new(kin, 0.5, 0.4, [2.0, -3.0, 0.0]).unwrap();
        let t = 0.0123;
        let c = [2.0, -3.0 + params.feed_speed * t];
        for l in [-1.0, 0.0, 0.7] {
            let p = edge_point(l, 5.0).unwrap();
            let a = transform_point(&tool, &params, 1, t, &p).unwrap();
            let b = transform_point(&tool, &params, 2, t, &p).unwrap();
            assert!((a.x - c[0] + (b.x - c[0])).abs() < 1e-9);
            assert!((a.y - c[1] + (b.y - c[1])).abs() < 1e-9);
            assert!((a.z - b.z).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_order_matters() {
        let (tool, params) = case1();
        let t = 0.0021;
        let ct = edge_to_tool_transform(&tool, 2).unwrap();
        let ts = tool_to_spindle_transform(params.phase, 2, 2, params.angular_velocity, t);
        let sw = spindle_to_workpiece_transform(params.initial_position, params.feed_speed, t);
        let good = Transform4::chain(&sw, &ts, &ct).apply(1.0, 0.0, 0.1);
        let bad = (&(&ct * &ts) * &sw).apply(1.0, 0.0, 0.1);
        let bad2 = (&(&ts * &sw) * &ct).apply(1.0, 0.0, 0.1);
        let dist = |a: [f64; 3], b: [f64; 3]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dist(good, bad) > 1e-3);
        assert!(dist(good, bad2) > 1e-3);
    }

    proptest! {
        #[test]
        fn transforms_are_rigid(gf in -1.0f64..1.0, gp in -1.0f64..1.0, phase in -10.0f64..10.0,
                                t in 0.0f64..5.0, k in 1usize..=4) {
            let tool = ToolDefinition::new(12.0, 4.0, 4, gf, gp,
                vec![Runout { radial: 0.01, axial: -0.02 }; 4]).unwrap();
            let ct = edge_to_tool_transform(&tool, k).unwrap();
            let ts = tool_to_spindle_transform(phase, k, 4, 300.0, t);
            let sw = spindle_to_workpiece_transform([1.0, 2.0, 3.0], 10.0, t);
            for m in [ct, ts, sw, Transform4::chain(&sw, &ts, &ct)] {
                let (err, bottom) = m.rigidity_error();
                prop_assert!(err < 1e-12);
                prop_assert!(bottom);
            }
        }

        #[test]
        fn tooth_shift_periodicity(t in 0.0f64..0.05, l in -2.0f64..2.0, phase in -3.0f64..3.0) {
            let teeth = 3;
            let tool = ToolDefinition::ideal(10.0, 5.0, teeth).unwrap();
            let kin = derive_kinematics(Some(200.0), None, Feed::PerTooth(0.4), teeth, 10.0).unwrap();
            let params = ProcessParameters::new(kin, 0.4, phase, [0.0, 0.0, 0.0]).unwrap();
            let shift = TAU / (params.angular_velocity * teeth as f64);
            let p = edge_point(l, 5.0).unwrap();
            for k in 1..teeth {
                let a = transform_point(&tool, &params, k, t, &p).unwrap();
                let b = transform_point(&tool, &params, k + 1, t + shift, &p).unwrap();
                prop_assert!((a.x - b.x).abs() < 1e-9);
                prop_assert!((a.y + params.feed_speed * shift - b.y).abs() < 1e-9);
                prop_assert!((a.z - b.z).abs() < 1e-9);
            }
        }

        #[test]
        fn lowest_point_height_is_rotation_invariant(phase in -7.0f64..7.0, t in 0.0f64..1.0,
                                                     gf in -0.5f64..0.5, z0 in -1.0f64..1.0) {
            let tool = ToolDefinition::new(10.0, 5.0, 2, gf, 0.0,
                vec![Runout { radial: 0.02, axial: 0.0 }; 2]).unwrap();
            let kin = derive_kinematics(Some(170.0), None, Feed::PerTooth(0.6), 2, 10.0).unwrap();
            let params = ProcessParameters::new(kin, 0.5, phase, [0.0, 0.0, z0]).unwrap();
            let p = edge_point(0.0, 5.0).unwrap();
            for k in 1..=2 {
                let w = transform_point(&tool, &params, k, t, &p).unwrap();
                prop_assert!((w.z - z0).abs() < 1e-12);
            }
        }
    }
}
