//! Structure aspect: robots with a modality, parts, pose and environment.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::error::KbError;
use crate::iri::Iri;
use crate::kb::{Assertion, KnowledgeBase};
use crate::literal::Literal;
use crate::vocab::aur;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("{0} is already registered")]
    DuplicateId(Iri),
    #[error("unknown class {0}")]
    UnknownClass(Iri),
    #[error("{class} is not a subclass of {expected}")]
    WrongClass { class: Iri, expected: Iri },
    #[error("unknown robot {0}")]
    UnknownRobot(Iri),
    #[error("orientation quaternion has norm {0}, expected 1")]
    NonUnitQuaternion(f64),
    #[error("reference frame {0} is not declared")]
    UnknownFrame(Iri),
    #[error("{0} is not an environment")]
    UnknownEnvironment(Iri),
    #[error("zone {0} has min > max")]
    InvalidZone(Iri),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    Air,
    Ground,
    Water,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Air, Modality::Ground, Modality::Water];

    /// Individual naming the modality.
    pub fn iri(self) -> Iri {
        match self {
            Modality::Air => aur::AIR.clone(),
            Modality::Ground => aur::GROUND.clone(),
            Modality::Water => aur::WATER.clone(),
        }
    }

    /// Robot subclass for the modality.
    pub fn robot_class(self) -> Iri {
        match self {
            Modality::Air => aur::AIR_ROBOT.clone(),
            Modality::Ground => aur::GROUND_ROBOT.clone(),
            Modality::Water => aur::WATER_ROBOT.clone(),
        }
    }

    pub fn from_iri(iri: &Iri) -> Option<Self> {
        Modality::ALL.into_iter().find(|m| &m.iri() == iri)
    }

    pub fn name(self) -> &'static str {
        match self {
            Modality::Air => "Air",
            Modality::Ground => "Ground",
            Modality::Water => "Water",
        }
    }

    /// Case-insensitive name lookup.
    pub fn parse(name: &str) -> Option<Self> {
        Modality::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Position in meters plus unit-quaternion orientation in a named frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose {
    pub position: [f64; 3],
    pub orientation: Quaternion,
    pub frame: Iri,
}

const NORM_TOLERANCE: f64 = 1e-9;

impl Pose {
    pub fn new(position: [f64; 3], orientation: Quaternion, frame: Iri) -> Result<Self, StructureError> {
        let pose = Pose {
            position,
            orientation,
            frame,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn at_origin(frame: Iri) -> Self {
        Pose {
            position: [0.0; 3],
            orientation: Quaternion::IDENTITY,
            frame,
        }
    }

    pub fn validate(&self) -> Result<(), StructureError> {
        let q = self.orientation;
        if self
            .position
            .iter()
            .chain([q.w, q.x, q.y, q.z].iter())
            .any(|v| !v.is_finite())
        {
            return Err(StructureError::NonFinite);
        }
        let norm = q.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(StructureError::NonUnitQuaternion(norm));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Part {
    pub id: Iri,
    pub class: Iri,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobotDescription {
    pub id: Iri,
    pub robot_class: Iri,
    pub modality: Modality,
    pub parts: BTreeSet<Part>,
    pub pose: Option<Pose>,
    pub environment: Option<Iri>,
}

impl RobotDescription {
    pub fn new(id: Iri, robot_class: Iri, modality: Modality) -> Self {
        RobotDescription {
            id,
            robot_class,
            modality,
            parts: BTreeSet::new(),
            pose: None,
            environment: None,
        }
    }

    pub fn with_part(mut self, id: Iri, class: Iri) -> Self {
        self.parts.insert(Part { id, class });
        self
    }

    pub fn with_pose(mut self, pose: Pose) -> Self {
        self.pose = Some(pose);
        self
    }

    pub fn in_environment(mut self, environment: Iri) -> Self {
        self.environment = Some(environment);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ZoneKind {
    NoFly,
    Operational,
}

impl ZoneKind {
    pub fn class(self) -> Iri {
        match self {
            ZoneKind::NoFly => aur::NO_FLY_ZONE.clone(),
            ZoneKind::Operational => aur::OPERATIONAL_ZONE.clone(),
        }
    }
}

/// Axis-aligned box in meters, bounds inclusive.
#[derive(Clone, Debug, PartialEq)]
pub struct Zone {
    pub id: Iri,
    pub kind: ZoneKind,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Zone {
    pub fn contains(&self, point: [f64; 3]) -> bool {
        (0..3).all(|i| self.min[i] <= point[i] && point[i] <= self.max[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentDescription {
    pub id: Iri,
    pub zones: Vec<Zone>,
}

fn decimal(value: f64) -> Result<Literal, StructureError> {
    Literal::decimal_f64(value).map_err(|_| StructureError::NonFinite)
}

fn require_subclass(kb: &KnowledgeBase, class: &Iri, expected: &Iri) -> Result<(), StructureError> {
    if !kb.contains_term(class) {
        return Err(StructureError::UnknownClass(class.clone()));
    }
    if !kb.is_subclass_of(class, expected)? {
        return Err(StructureError::WrongClass {
            class: class.clone(),
            expected: expected.clone(),
        });
    }
    Ok(())
}

const POSE_PROPERTIES: [&std::sync::LazyLock<Iri>; 7] = [
    &aur::POSITION_X,
    &aur::POSITION_Y,
    &aur::POSITION_Z,
    &aur::ORIENTATION_W,
    &aur::ORIENTATION_X,
    &aur::ORIENTATION_Y,
    &aur::ORIENTATION_Z,
];

fn write_pose(kb: &mut KnowledgeBase, robot: &Iri, pose: &Pose) -> Result<(), StructureError> {
    if !kb.contains_term(&pose.frame) {
        return Err(StructureError::UnknownFrame(pose.frame.clone()));
    }
    let q = pose.orientation;
    let values = [
        pose.position[0],
        pose.position[1],
        pose.position[2],
        q.w,
        q.x,
        q.y,
        q.z,
    ];
    let literals = values.map(decimal);
    for literal in &literals {
        if let Err(e) = literal {
            return Err(e.clone());
        }
    }
    for (property, literal) in POSE_PROPERTIES.iter().zip(literals) {
        kb.set_literal(robot, property, literal?);
    }
    kb.retract_all(robot, &aur::IN_FRAME);
    kb.assert(Assertion::link(robot, &aur::IN_FRAME, &pose.frame));
    Ok(())
}

/// Adds the robot, its parts, pose and environment link to `kb`.
///
/// Parts whose class is a platform are also linked through `consistsOf`,
/// which classifies the robot as autonomous.
pub fn register_robot(kb: &mut KnowledgeBase, desc: &RobotDescription) -> Result<Iri, StructureError> {
    if kb.about(&desc.id).next().is_some() {
        return Err(StructureError::DuplicateId(desc.id.clone()));
    }
    require_subclass(kb, &desc.robot_class, &aur::ROBOT)?;
    for part in &desc.parts {
        require_subclass(kb, &part.class, &aur::DEVICE)?;
    }
    if let Some(pose) = &desc.pose {
        pose.validate()?;
        if !kb.contains_term(&pose.frame) {
            return Err(StructureError::UnknownFrame(pose.frame.clone()));
        }
    }
    if let Some(env) = &desc.environment {
        if !kb.is_instance_of(env, &aur::ENVIRONMENT) {
            return Err(StructureError::UnknownEnvironment(env.clone()));
        }
    }

    let id = &desc.id;
    kb.assert(Assertion::typed(id, &desc.robot_class));
    kb.assert(Assertion::typed(id, &desc.modality.robot_class()));
    kb.assert(Assertion::link(id, &aur::HAS_MODALITY, &desc.modality.iri()));
    for part in &desc.parts {
        kb.assert(Assertion::typed(&part.id, &part.class));
        kb.assert(Assertion::link(id, &aur::ROBOT_PART, &part.id));
        if kb.is_subclass_of(&part.class, &aur::PLATFORM)? {
            kb.assert(Assertion::link(id, &aur::CONSISTS_OF, &part.id));
        }
    }
    if let Some(pose) = &desc.pose {
        write_pose(kb, id, pose)?;
    }
    if let Some(env) = &desc.environment {
        kb.assert(Assertion::link(id, &aur::OPERATES_IN, env));
    }
    Ok(id.clone())
}

fn require_robot(kb: &KnowledgeBase, robot: &Iri) -> Result<(), StructureError> {
    if kb.is_instance_of(robot, &aur::ROBOT) {
        Ok(())
    } else {
        Err(StructureError::UnknownRobot(robot.clone()))
    }
}

/// Replaces the robot's pose. Last write wins.
pub fn set_pose(kb: &mut KnowledgeBase, robot: &Iri, pose: &Pose) -> Result<(), StructureError> {
    require_robot(kb, robot)?;
    pose.validate()?;
    write_pose(kb, robot, pose)
}

pub fn pose_of(kb: &KnowledgeBase, robot: &Iri) -> Option<Pose> {
    let mut values = [0.0; 7];
    for (slot, property) in values.iter_mut().zip(POSE_PROPERTIES) {
        *slot = kb.literal(robot, property)?.as_f64()?;
    }
    Some(Pose {
        position: [values[0], values[1], values[2]],
        orientation: Quaternion {
            w: values[3],
            x: values[4],
            y: values[5],
            z: values[6],
        },
        frame: kb.object(robot, &aur::IN_FRAME)?,
    })
}

pub fn modality_of(kb: &KnowledgeBase, robot: &Iri) -> Option<Modality> {
    kb.objects(robot, &aur::HAS_MODALITY)
        .iter()
        .find_map(Modality::from_iri)
}

/// Robots registered with modality `m`.
pub fn robots_by_modality(kb: &KnowledgeBase, m: Modality) -> BTreeSet<Iri> {
    kb.subjects(&aur::HAS_MODALITY, &m.iri()).into_iter().collect()
}

/// Every robot carrying a modality link.
pub fn registered_robots(kb: &KnowledgeBase) -> BTreeSet<Iri> {
    kb.links(&aur::HAS_MODALITY)
        .into_iter()
        .map(|(robot, _)| robot)
        .collect()
}

/// Reads a registered robot back out of the knowledge base.
pub fn robot_description(kb: &KnowledgeBase, robot: &Iri) -> Result<RobotDescription, StructureError> {
    let modality = modality_of(kb, robot).ok_or_else(|| StructureError::UnknownRobot(robot.clone()))?;
    let modality_class = modality.robot_class();
    // the registered class is the asserted robot class other than the modality class
    let robot_class = kb
        .asserted_types(robot)
        .into_iter()
        .find(|c| c != &modality_class && kb.is_subclass_of(c, &aur::ROBOT).unwrap_or(false))
        .unwrap_or_else(|| aur::ROBOT.clone());
    let parts = kb
        .objects(robot, &aur::ROBOT_PART)
        .into_iter()
        .filter_map(|part| {
            let class = kb.asserted_types(&part).into_iter().next()?;
            Some(Part { id: part, class })
        })
        .collect();
    Ok(RobotDescription {
        id: robot.clone(),
        robot_class,
        modality,
        parts,
        pose: pose_of(kb, robot),
        environment: kb.object(robot, &aur::OPERATES_IN),
    })
}

/// Adds an environment and its zones.
pub fn define_environment(kb: &mut KnowledgeBase, env: &EnvironmentDescription) -> Result<Iri, StructureError> {
    if kb.about(&env.id).next().is_some() {
        return Err(StructureError::DuplicateId(env.id.clone()));
    }
    for zone in &env.zones {
        if (0..3).any(|i| zone.min[i] > zone.max[i]) {
            return Err(StructureError::InvalidZone(zone.id.clone()));
        }
        if zone.min.iter().chain(&zone.max).any(|v| !v.is_finite()) {
            return Err(StructureError::NonFinite);
        }
    }
    kb.assert(Assertion::typed(&env.id, &aur::ENVIRONMENT));
    for zone in &env.zones {
        kb.assert(Assertion::typed(&zone.id, &zone.kind.class()));
        kb.assert(Assertion::link(&env.id, &aur::HAS_ZONE, &zone.id));
        let bounds = [
            (&aur::MIN_X, zone.min[0]),
            (&aur::MIN_Y, zone.min[1]),
            (&aur::MIN_Z, zone.min[2]),
            (&aur::MAX_X, zone.max[0]),
            (&aur::MAX_Y, zone.max[1]),
            (&aur::MAX_Z, zone.max[2]),
        ];
        for (property, value) in bounds {
            kb.set_literal(&zone.id, property, decimal(value)?);
        }
    }
    Ok(env.id.clone())
}

pub fn environment(kb: &KnowledgeBase, id: &Iri) -> Result<EnvironmentDescription, StructureError> {
    if !kb.is_instance_of(id, &aur::ENVIRONMENT) {
        return Err(StructureError::UnknownEnvironment(id.clone()));
    }
    let mut zones = Vec::new();
    for zone in kb.objects(id, &aur::HAS_ZONE) {
        let kind = if kb.is_instance_of(&zone, &aur::NO_FLY_ZONE) {
            ZoneKind::NoFly
        } else {
            ZoneKind::Operational
        };
        let get = |p: &Iri| kb.literal(&zone, p).and_then(|l| l.as_f64()).unwrap_or(0.0);
        zones.push(Zone {
            min: [get(&aur::MIN_X), get(&aur::MIN_Y), get(&aur::MIN_Z)],
            max: [get(&aur::MAX_X), get(&aur::MAX_Y), get(&aur::MAX_Z)],
            id: zone,
            kind,
        });
    }
    Ok(EnvironmentDescription {
        id: id.clone(),
        zones,
    })
}

/// Zones of `kind` whose box contains the pose's position.
pub fn pose_in_zone(pose: &Pose, env: &EnvironmentDescription, kind: ZoneKind) -> BTreeSet<Iri> {
    env.zones
        .iter()
        .filter(|z| z.kind == kind && z.contains(pose.position))
        .map(|z| z.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::seed_kb;
    use crate::vocab::aur_frame;

    fn fleet(local: &str) -> Iri {
        Iri::new(format!("https://w3id.org/aur/fleet#{local}")).unwrap()
    }

    fn quadrocopter() -> RobotDescription {
        let mut desc = RobotDescription::new(fleet("Quadrocopter1"), aur::ROBOT.clone(), Modality::Air);
        for i in 1..=4 {
            desc = desc.with_part(fleet(&format!("rotor{i}")), aur::ACTUATOR.clone());
        }
        desc.with_part(fleet("camera1"), aur::SENSOR.clone())
    }

    #[test]
    fn quadrocopter_with_rotors_and_camera() {
        let mut kb = seed_kb().unwrap();
        register_robot(&mut kb, &quadrocopter()).unwrap();
        assert!(kb.instances_of(&aur::ROBOT).unwrap().contains(&fleet("Quadrocopter1")));
        let devices = kb.instances_of(&aur::DEVICE).unwrap();
        for part in ["rotor1", "rotor2", "rotor3", "rotor4", "camera1"] {
            assert!(devices.contains(&fleet(part)), "{part}");
        }
        assert_eq!(robot_description(&kb, &fleet("Quadrocopter1")).unwrap(), quadrocopter());
    }

    #[test]
    fn bare_robot_registers() {
        let mut kb = seed_kb().unwrap();
        let desc = RobotDescription::new(fleet("Rover1"), aur::ROBOT.clone(), Modality::Ground);
        register_robot(&mut kb, &desc).unwrap();
        assert!(pose_of(&kb, &fleet("Rover1")).is_none());
        assert_eq!(
            register_robot(&mut kb, &desc),
            Err(StructureError::DuplicateId(fleet("Rover1")))
        );
    }

    #[test]
    fn platform_part_makes_autonomous_robot() {
        let mut kb = seed_kb().unwrap();
        let desc = RobotDescription::new(fleet("Rover1"), aur::ROBOT.clone(), Modality::Ground)
            .with_part(fleet("chassis"), aur::PLATFORM.clone());
        register_robot(&mut kb, &desc).unwrap();
        assert!(kb
            .instances_of(&aur::AUTONOMOUS_ROBOT)
            .unwrap()
            .contains(&fleet("Rover1")));
        assert!(kb.contains_assertion(&Assertion::link(
            &fleet("Rover1"),
            &aur::CONSISTS_OF,
            &fleet("chassis")
        )));
    }

    #[test]
    fn class_checks() {
        let mut kb = seed_kb().unwrap();
        let bad = RobotDescription::new(fleet("x"), aur::SENSOR.clone(), Modality::Air);
        assert!(matches!(register_robot(&mut kb, &bad), Err(StructureError::WrongClass { .. })));
        let unknown = RobotDescription::new(fleet("x"), fleet("Nope"), Modality::Air);
        assert!(matches!(register_robot(&mut kb, &unknown), Err(StructureError::UnknownClass(_))));
        let bad_part = RobotDescription::new(fleet("x"), aur::ROBOT.clone(), Modality::Air)
            .with_part(fleet("p"), aur::ENVIRONMENT.clone());
        assert!(matches!(register_robot(&mut kb, &bad_part), Err(StructureError::WrongClass { .. })));
    }

    #[test]
    fn pose_last_write_wins() {
        let mut kb = seed_kb().unwrap();
        register_robot(&mut kb, &quadrocopter()).unwrap();
        let robot = fleet("Quadrocopter1");
        let origin = Pose::at_origin(aur_frame::WORLD.clone());
        set_pose(&mut kb, &robot, &origin).unwrap();
        assert_eq!(pose_of(&kb, &robot), Some(origin));
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let second = Pose::new(
            [1.5, -2.25, 30.0],
            Quaternion { w: half, x: 0.0, y: 0.0, z: half },
            aur_frame::WORLD.clone(),
        )
        .unwrap();
        set_pose(&mut kb, &robot, &second).unwrap();
        assert_eq!(pose_of(&kb, &robot), Some(second));
        assert_eq!(kb.literals(&robot, &aur::POSITION_X).len(), 1);
    }

    #[test]
    fn pose_errors() {
        let mut kb = seed_kb().unwrap();
        register_robot(&mut kb, &quadrocopter()).unwrap();
        let q = Quaternion { w: 0.5, x: 0.0, y: 0.0, z: 0.0 };
        assert!(matches!(
            Pose::new([0.0; 3], q, aur_frame::WORLD.clone()),
            Err(StructureError::NonUnitQuaternion(n)) if (n - 0.5).abs() < 1e-12
        ));
        let raw = Pose { position: [0.0; 3], orientation: q, frame: aur_frame::WORLD.clone() };
        assert!(matches!(
            set_pose(&mut kb, &fleet("Quadrocopter1"), &raw),
            Err(StructureError::NonUnitQuaternion(_))
        ));
        assert!(matches!(
            set_pose(&mut kb, &fleet("Ghost"), &Pose::at_origin(aur_frame::WORLD.clone())),
            Err(StructureError::UnknownRobot(_))
        ));
        assert!(matches!(
            set_pose(&mut kb, &fleet("Quadrocopter1"), &Pose::at_origin(fleet("nowhere"))),
            Err(StructureError::UnknownFrame(_))
        ));
    }

    #[test]
    fn modality_queries() {
        let mut kb = seed_kb().unwrap();
        assert!(robots_by_modality(&kb, Modality::Air).is_empty());
        register_robot(&mut kb, &quadrocopter()).unwrap();
        register_robot(&mut kb, &RobotDescription::new(fleet("Rover1"), aur::ROBOT.clone(), Modality::Ground)).unwrap();
        assert_eq!(robots_by_modality(&kb, Modality::Air), BTreeSet::from([fleet("Quadrocopter1")]));
        assert!(robots_by_modality(&kb, Modality::Water).is_empty());
        assert!(kb.is_instance_of(&fleet("Rover1"), &aur::GROUND_ROBOT));
    }

    #[test]
    fn zones_are_inclusive() {
        let env = EnvironmentDescription {
            id: fleet("site"),
            zones: vec![
                Zone { id: fleet("nofly"), kind: ZoneKind::NoFly, min: [0.0, 0.0, 0.0], max: [10.0, 10.0, 100.0] },
                Zone { id: fleet("ops"), kind: ZoneKind::Operational, min: [-5.0, -5.0, 0.0], max: [50.0, 50.0, 120.0] },
            ],
        };
        let corner = Pose::at_origin(aur_frame::WORLD.clone());
        assert_eq!(pose_in_zone(&corner, &env, ZoneKind::NoFly), BTreeSet::from([fleet("nofly")]));
        let far = Pose { position: [500.0, 0.0, 0.0], ..corner.clone() };
        assert!(pose_in_zone(&far, &env, ZoneKind::NoFly).is_empty());
        assert!(pose_in_zone(&far, &env, ZoneKind::Operational).is_empty());

        let mut kb = seed_kb().unwrap();
        define_environment(&mut kb, &env).unwrap();
        assert_eq!(environment(&kb, &fleet("site")).unwrap(), env);
        let bad = EnvironmentDescription {
            id: fleet("bad"),
            zones: vec![Zone { id: fleet("z"), kind: ZoneKind::NoFly, min: [1.0, 0.0, 0.0], max: [0.0, 1.0, 1.0] }],
        };
        assert_eq!(define_environment(&mut kb, &bad), Err(StructureError::InvalidZone(fleet("z"))));
        let robot = RobotDescription::new(fleet("Rover1"), aur::ROBOT.clone(), Modality::Ground)
            .in_environment(fleet("site"));
        register_robot(&mut kb, &robot).unwrap();
        let orphan = RobotDescription::new(fleet("Rover2"), aur::ROBOT.clone(), Modality::Ground)
            .in_environment(fleet("nowhere"));
        assert!(matches!(register_robot(&mut kb, &orphan), Err(StructureError::UnknownEnvironment(_))));
    }
}
