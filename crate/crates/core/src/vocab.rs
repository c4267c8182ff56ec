//! Namespaces and well-known terms of the capability and skill model.
//!
//! Each submodule mirrors one ontology design pattern. Terms are lazily built
//! [`Iri`] statics so call sites can borrow them (`&*vocab::aur::ROBOT`).

use std::sync::LazyLock;

use crate::iri::Iri;

macro_rules! vocabulary {
    ($prefix:literal, $ns:literal; $($name:ident = $local:literal),* $(,)?) => {
        pub const PREFIX: &str = $prefix;
        pub const NS: &str = $ns;
        $(
            pub static $name: LazyLock<Iri> =
                LazyLock::new(|| Iri::from_static(concat!($ns, $local)));
        )*
    };
}

pub mod rdf {
    use super::*;
    vocabulary!("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
        TYPE = "type",
        PROPERTY = "Property",
    );
}

pub mod rdfs {
    use super::*;
    vocabulary!("rdfs", "http://www.w3.org/2000/01/rdf-schema#";
        SUB_CLASS_OF = "subClassOf",
        SUB_PROPERTY_OF = "subPropertyOf",
        CLASS = "Class",
    );
}

pub mod owl {
    use super::*;
    vocabulary!("owl", "http://www.w3.org/2002/07/owl#";
        CLASS = "Class",
        EQUIVALENT_CLASS = "equivalentClass",
        OBJECT_PROPERTY = "ObjectProperty",
        DATATYPE_PROPERTY = "DatatypeProperty",
        NAMED_INDIVIDUAL = "NamedIndividual",
        RESTRICTION = "Restriction",
        ON_PROPERTY = "onProperty",
        SOME_VALUES_FROM = "someValuesFrom",
    );
}

pub mod xsd {
    use super::*;
    vocabulary!("xsd", "http://www.w3.org/2001/XMLSchema#";
        STRING = "string",
        INTEGER = "integer",
        DECIMAL = "decimal",
        BOOLEAN = "boolean",
        ANY_URI = "anyURI",
    );
}

/// Upper-ontology anchors. Only stub classes, no import.
pub mod sumo {
    use super::*;
    vocabulary!("sumo", "https://w3id.org/aur/stub/sumo#";
        PROCESS = "Process",
        DEVICE = "Device",
        OBJECT = "Object",
    );
}

pub mod dul {
    use super::*;
    vocabulary!("dul", "https://w3id.org/aur/stub/dul#";
        PHYSICAL_OBJECT = "PhysicalObject",
        ACTION = "Action",
    );
}

/// Structure aspect and alignment terms.
pub mod aur {
    use super::*;
    vocabulary!("aur", "https://w3id.org/aur/core#";
        DEVICE = "Device",
        ROBOT = "Robot",
        AUTONOMOUS_ROBOT = "AutonomousRobot",
        AIR_ROBOT = "AirRobot",
        GROUND_ROBOT = "GroundRobot",
        WATER_ROBOT = "WaterRobot",
        PLATFORM = "Platform",
        SENSOR = "Sensor",
        ACTUATOR = "Actuator",
        MODALITY = "Modality",
        AIR = "Air",
        GROUND = "Ground",
        WATER = "Water",
        ENVIRONMENT = "Environment",
        ZONE = "Zone",
        NO_FLY_ZONE = "NoFlyZone",
        OPERATIONAL_ZONE = "OperationalZone",
        REFERENCE_FRAME = "ReferenceFrame",
        ROBOT_PART = "robotPart",
        CONSISTS_OF = "consistsOf",
        HAS_MODALITY = "hasModality",
        OPERATES_IN = "operatesIn",
        HAS_ZONE = "hasZone",
        IN_FRAME = "inFrame",
        POSITION_X = "positionX",
        POSITION_Y = "positionY",
        POSITION_Z = "positionZ",
        ORIENTATION_W = "orientationW",
        ORIENTATION_X = "orientationX",
        ORIENTATION_Y = "orientationY",
        ORIENTATION_Z = "orientationZ",
        MIN_X = "minX",
        MIN_Y = "minY",
        MIN_Z = "minZ",
        MAX_X = "maxX",
        MAX_Y = "maxY",
        MAX_Z = "maxZ",
    );
}

pub mod vdi2206 {
    use super::*;
    vocabulary!("vdi2206", "https://w3id.org/aur/vdi2206#";
        MECHATRONIC_SYSTEM = "MechatronicSystem",
        MODULE = "Module",
        COMPONENT = "Component",
    );
}

/// Formal process description (process operators, products, information, energy).
pub mod vdi3682 {
    use super::*;
    vocabulary!("vdi3682", "https://w3id.org/aur/vdi3682#";
        PROCESS = "Process",
        PROCESS_OPERATOR = "ProcessOperator",
        STATE = "State",
        PRODUCT = "Product",
        INFORMATION = "Information",
        ENERGY = "Energy",
        TECHNICAL_RESOURCE = "TechnicalResource",
        HAS_INPUT = "hasInput",
        HAS_OUTPUT = "hasOutput",
        HAS_SUB_OPERATOR = "hasSubOperator",
    );
}

pub mod ieee {
    use super::*;
    vocabulary!("ieee", "https://w3id.org/aur/ieee1872-2#";
        FUNCTION = "Function",
        FUNCTION_EXECUTION = "FunctionExecution",
        ENVIRONMENT = "Environment",
        COMMUNICATION = "Communication",
        INTERACTION = "Interaction",
    );
}

/// Capability/skill core classes and relations.
pub mod cask {
    use super::*;
    vocabulary!("cask", "https://w3id.org/aur/cask#";
        CAPABILITY = "Capability",
        SKILL = "Skill",
        SKILL_INTERFACE = "SkillInterface",
        MQTT_SKILL_INTERFACE = "MQTTSkillInterface",
        HTTP_SKILL_INTERFACE = "HTTPSkillInterface",
        OPCUA_SKILL_INTERFACE = "OPCUASkillInterface",
        PROVIDES_CAPABILITY = "providesCapability",
        IS_REALIZED_BY = "isRealizedBy",
        ACCESSIBLE_THROUGH = "accessibleThrough",
        HOSTED_BY = "hostedBy",
        HAS_STATE_MACHINE = "hasStateMachine",
        HAS_CURRENT_STATE = "hasCurrentState",
    );
}

pub mod isa88 {
    use super::*;
    vocabulary!("isa88", "https://w3id.org/aur/isa88#";
        STATE_MACHINE = "StateMachine",
        STATE = "State",
        TRANSITION = "Transition",
    );
}

pub mod mqtt {
    use super::*;
    vocabulary!("mqtt", "https://w3id.org/aur/mqtt#";
        MQTT_CLIENT = "MQTTClient",
        MQTT_TOPIC = "MQTTTopic",
        BROKER_URI = "brokerUri",
        COMMAND_TOPIC = "commandTopic",
        STATE_TOPIC = "stateTopic",
        QOS = "qos",
    );
}

pub mod wadl {
    use super::*;
    vocabulary!("wadl", "https://w3id.org/aur/wadl#";
        APPLICATION = "Application",
        BASE_URL = "baseUrl",
        RESOURCE_PATH = "resourcePath",
    );
}

pub mod opcua {
    use super::*;
    vocabulary!("opcua", "https://w3id.org/aur/opcua#";
        SERVER = "Server",
        ENDPOINT_URL = "endpointUrl",
        NODE_ID = "nodeId",
    );
}

/// Property vocabulary (type descriptions, data elements, instance descriptions).
pub mod iec {
    use super::*;
    vocabulary!("iec", "https://w3id.org/aur/iec61360#";
        TYPE_DESCRIPTION = "TypeDescription",
        DATA_ELEMENT = "DataElement",
        INSTANCE_DESCRIPTION = "InstanceDescription",
        PREFERRED_NAME = "preferredName",
        DEFINITION = "definition",
        UNIT = "unitOfMeasure",
        VALUE_TYPE = "valueType",
        HAS_TYPE_DESCRIPTION = "hasTypeDescription",
        HAS_DATA_ELEMENT = "hasDataElement",
        DESCRIBES = "describes",
        ROLE = "role",
        EXPRESSION = "expression",
        VALUE = "value",
        LOWER_BOUND = "lowerBound",
        UPPER_BOUND = "upperBound",
    );
}

/// Robot capability taxonomy and capability-description helpers.
pub mod aur_cap {
    use super::*;
    vocabulary!("aur-cap", "https://w3id.org/aur/cap#";
        MOTION = "Motion",
        FLY = "Fly",
        DRIVE = "Drive",
        SWIM = "Swim",
        NAVIGATE = "Navigate",
        MANIPULATION = "Manipulation",
        GRASP = "Grasp",
        RELEASE = "Release",
        TRANSPORT = "Transport",
        PERCEPTION = "Perception",
        DETECT = "Detect",
        LOCALIZE = "Localize",
        COMMUNICATION = "Communication",
        SEND = "Send",
        RECEIVE = "Receive",
        SLOT = "SubOperatorSlot",
        STATE_LABEL = "stateLabel",
        INDEX = "index",
        HAS_SLOT = "hasSubOperatorSlot",
        SLOT_OPERATOR = "slotOperator",
        CONSTRAINED_BY = "constrainedBy",
    );
}

pub mod aur_frame {
    use super::*;
    vocabulary!("aur-frame", "https://w3id.org/aur/frame#";
        WORLD = "world",
    );
}

pub mod aur_mission {
    use super::*;
    vocabulary!("aur-mission", "https://w3id.org/aur/mission#";
        MISSION = "Mission",
        STEP = "Step",
        REQUIRED_CAPABILITY = "RequiredCapability",
        START_PARAMETER = "StartParameter",
        HAS_STEP = "hasStep",
        STEP_INDEX = "stepIndex",
        DEPENDS_ON = "dependsOn",
        REQUIRES_CAPABILITY_TYPE = "requiresCapabilityType",
        REQUIRED_INPUTS = "requiredInputs",
        REQUIRED_OUTPUTS = "requiredOutputs",
        HAS_REQUIREMENT = "hasRequirement",
        CONSTRAINS = "constrains",
        HAS_START_PARAMETER = "hasStartParameter",
        PARAMETER_TYPE = "parameterType",
        PARAMETER_VALUE = "parameterValue",
    );
}

/// Property type descriptions shipped with the seed model.
pub mod aur_prop {
    use super::*;
    vocabulary!("aur-prop", "https://w3id.org/aur/prop#";
        MAX_ALTITUDE = "maxAltitude",
        TARGET_ALTITUDE = "targetAltitude",
        PAYLOAD_MASS = "payloadMass",
    );
}

/// Prefix table used by every knowledge base and by the serializer.
pub fn standard_prefixes() -> Vec<(&'static str, &'static str)> {
    vec![
        (rdf::PREFIX, rdf::NS),
        (rdfs::PREFIX, rdfs::NS),
        (owl::PREFIX, owl::NS),
        (xsd::PREFIX, xsd::NS),
    ]
}

/// Prefixes of the model's own namespaces, handy when writing fragments.
pub fn model_prefixes() -> Vec<(&'static str, &'static str)> {
    vec![
        (sumo::PREFIX, sumo::NS),
        (dul::PREFIX, dul::NS),
        (aur::PREFIX, aur::NS),
        (vdi2206::PREFIX, vdi2206::NS),
        (vdi3682::PREFIX, vdi3682::NS),
        (ieee::PREFIX, ieee::NS),
        (cask::PREFIX, cask::NS),
        (isa88::PREFIX, isa88::NS),
        (mqtt::PREFIX, mqtt::NS),
        (wadl::PREFIX, wadl::NS),
        (opcua::PREFIX, opcua::NS),
        (iec::PREFIX, iec::NS),
        (aur_cap::PREFIX, aur_cap::NS),
        (aur_frame::PREFIX, aur_frame::NS),
        (aur_mission::PREFIX, aur_mission::NS),
        (aur_prop::PREFIX, aur_prop::NS),
    ]
}
