//! JSON-lines route logs.
//!
//! Line 1 is the route header `{route_id, detector_id, route_completion,
//! infractions, timestep}`; every following non-empty line is one
//! [`FrameRecord`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FrameRecord, InfractionEvent, RouteLog};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteHeader {
    route_id: String,
    detector_id: String,
    route_completion: f64,
    infractions: Vec<InfractionEvent>,
    timestep: f64,
}

pub fn load_route_log(path: impl AsRef<Path>) -> Result<RouteLog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_route_log(BufReader::new(file))
}

pub fn read_route_log(reader: impl BufRead) -> Result<RouteLog> {
    let mut header: Option<RouteHeader> = None;
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        };
        if header.is_none() {
            header = Some(serde_json::from_str(&line).map_err(parse_err)?);
        } else {
            frames.push(serde_json::from_str::<FrameRecord>(&line).map_err(parse_err)?);
        }
    }
    let header = header.ok_or(Error::Parse {
        line: 1,
        msg: "missing route header".into(),
    })?;
    let mut log = RouteLog {
        route_id: header.route_id,
        detector_id: header.detector_id,
        timestep: header.timestep,
        route_completion: header.route_completion,
        infractions: header.infractions,
        frames,
    };
    log.validate()?;
    Ok(log)
}

pub fn write_route_log(mut writer: impl Write, log: &RouteLog) -> std::io::Result<()> {
    let header = RouteHeader {
        route_id: log.route_id.clone(),
        detector_id: log.detector_id.clone(),
        route_completion: log.route_completion,
        infractions: log.infractions.clone(),
        timestep: log.timestep,
    };
    serde_json::to_writer(&mut writer, &header)?;
    writer.write_all(b"\n")?;
    for frame in &log.frames {
        serde_json::to_writer(&mut writer, frame)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_route_log(path: impl AsRef<Path>, log: &RouteLog) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_route_log(BufWriter::new(file), log).map_err(io_err)
}
