//! Observations attached to events, and the capture devices behind them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{DeviceId, EventId, ObservationId};
use crate::store::TrajectoryStore;
use crate::time::TimeInstant;

/// A measured property of the moving object at an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub id: ObservationId,
    pub event_id: EventId,
    pub feature: String,
    pub value: f64,
    pub unit: String,
    pub time: TimeInstant,
}

impl Observation {
    pub fn validate(&self) -> Result<()> {
        if self.id.as_str().is_empty() {
            return Err(Error::validation("observation id is empty"));
        }
        if self.unit.is_empty() {
            return Err(Error::validation(format!("observation `{}` has no unit", self.id)));
        }
        if !self.value.is_finite() {
            return Err(Error::validation(format!(
                "observation `{}` value is not finite",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeviceKind {
    #[serde(rename = "GPS")]
    Gps,
    Camera,
    CellLocation,
    EPayment,
    #[serde(rename = "RFID")]
    Rfid,
}

impl DeviceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DeviceKind::Gps => "GPS",
            DeviceKind::Camera => "Camera",
            DeviceKind::CellLocation => "CellLocation",
            DeviceKind::EPayment => "EPayment",
            DeviceKind::Rfid => "RFID",
        }
    }
}

impl std::str::FromStr for DeviceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GPS" => Ok(DeviceKind::Gps),
            "Camera" => Ok(DeviceKind::Camera),
            "CellLocation" => Ok(DeviceKind::CellLocation),
            "EPayment" => Ok(DeviceKind::EPayment),
            "RFID" => Ok(DeviceKind::Rfid),
            other => Err(Error::validation(format!(
                "unknown device kind `{other}` (expected GPS, Camera, CellLocation, EPayment or RFID)"
            ))),
        }
    }
}

/// Metadata about a capture mechanism, including how far its fixes can be trusted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProxy {
    pub device_id: DeviceId,
    pub kind: DeviceKind,
    pub reliability: f64,
    pub description: String,
}

impl DeviceProxy {
    pub fn validate(&self) -> Result<()> {
        if self.device_id.as_str().is_empty() {
            return Err(Error::validation("device id is empty"));
        }
        if !(0.0..=1.0).contains(&self.reliability) {
            return Err(Error::validation(format!(
                "device `{}` reliability {} is outside [0, 1]",
                self.device_id, self.reliability
            )));
        }
        Ok(())
    }
}

impl TrajectoryStore {
    /// Adds a device. Unlike [`upsert`](TrajectoryStore::upsert), an existing
    /// id is an error.
    pub fn register_device(&mut self, device: DeviceProxy) -> Result<&DeviceProxy> {
        device.validate()?;
        if self.data.devices.contains_key(&device.device_id) {
            return Err(Error::Duplicate {
                kind: "device",
                id: device.device_id.to_string(),
            });
        }
        let id = device.device_id.clone();
        self.data.devices.insert(id.clone(), device);
        self.bump();
        Ok(&self.data.devices[&id])
    }

    pub fn record_observation(&mut self, obs: Observation) -> Result<&Observation> {
        obs.validate()?;
        if self.event(&obs.event_id).is_none() {
            return Err(Error::not_found("event", obs.event_id.as_str()));
        }
        let id = obs.id.clone();
        self.data.observations.insert(id.clone(), obs);
        self.bump();
        Ok(&self.data.observations[&id])
    }

    /// Observations of one event in `(time, id)` order.
    pub fn observations_of(&self, event: &EventId) -> Vec<&Observation> {
        let mut out: Vec<&Observation> = self
            .data
            .observations
            .values()
            .filter(|o| &o.event_id == event)
            .collect();
        out.sort_by(|a, b| (a.time, &a.id).cmp(&(b.time, &b.id)));
        out
    }

    /// The device that captured an event, if it names one.
    pub fn device_of(&self, event: &EventId) -> Result<Option<&DeviceProxy>> {
        let ev = self
            .event(event)
            .ok_or_else(|| Error::not_found("event", event.as_str()))?;
        match &ev.device_id {
            None => Ok(None),
            Some(d) => self.device(d).map(Some).ok_or_else(|| Error::DanglingDevice {
                event: event.to_string(),
                device: d.to_string(),
            }),
        }
    }
}
