//! Runs, measurement protocols, the MP construction and its comonad structure.

mod comonad;
mod mp;
mod protocol;
mod run;

pub use comonad::{
    check_laws, comonoidal, compose_with_extension, counit, extend, extend_protocol, is_endomorphism, mp_identity,
    LawReport,
};
pub use mp::{enumerate_protocols, mp_model, mp_scenario, protocols_compatible, MpModel, MpScenario};
pub use protocol::{is_protocol, MeasurementProtocol, ProtocolViolation};
pub use run::Run;
