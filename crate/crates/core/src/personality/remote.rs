//! Client side of the remote-estimator protocol.
//!
//! Request: a big-endian `u32` byte length followed by the raw image bytes.
//! Response: one UTF-8 line, `E=<f> A=<f> C=<f> N=<f> O=<f>\n`, where each
//! `<f>` is a plain decimal in `[0, 1]`. Anything else is a protocol error;
//! out-of-range values are rejected, never clamped.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::{
    CaptureEstimate, CaptureSource, PersonalityError, Trait, TraitEstimator, TraitScoreVector,
};

/// Longest response line accepted, newline included.
const MAX_RESPONSE_LEN: usize = 256;

pub fn write_request<W: Write>(writer: &mut W, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "payload exceeds u32 length"))?;
    writer.write_all(&len.to_be_bytes())?;
    writer.write_all(payload)?;
    writer.flush()
}

/// Server-side counterpart of [`write_request`].
pub fn read_request<R: Read>(reader: &mut R) -> io::Result<Vec<u8>> {
    let mut len = [0u8; 4];
    reader.read_exact(&mut len)?;
    let mut payload = vec![0u8; u32::from_be_bytes(len) as usize];
    reader.read_exact(&mut payload)?;
    Ok(payload)
}

pub fn format_scores(scores: &TraitScoreVector) -> String {
    let fields: Vec<String> = scores
        .iter()
        .map(|(t, v)| format!("{}={}", t.code(), v))
        .collect();
    format!("{}\n", fields.join(" "))
}

pub fn parse_scores(line: &str) -> Result<TraitScoreVector, PersonalityError> {
    let body = line
        .strip_suffix('\n')
        .ok_or_else(|| PersonalityError::Protocol("response is not newline-terminated".into()))?;
    let fields: Vec<&str> = body.split(' ').collect();
    if fields.len() != Trait::ALL.len() {
        return Err(PersonalityError::Protocol(format!(
            "expected 5 fields, got {}",
            fields.len()
        )));
    }
    let mut scores = [0.0; 5];
    for (t, field) in Trait::ALL.iter().zip(fields) {
        let value = field
            .strip_prefix(t.code())
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| {
                PersonalityError::Protocol(format!("expected field {}=, got {field:?}", t.code()))
            })?;
        if !is_plain_decimal(value) {
            return Err(PersonalityError::Protocol(format!(
                "{} value {value:?} is not a decimal",
                t.code()
            )));
        }
        let parsed: f64 = value
            .parse()
            .map_err(|_| PersonalityError::Protocol(format!("bad number {value:?}")))?;
        if !(0.0..=1.0).contains(&parsed) {
            return Err(PersonalityError::Protocol(format!(
                "{} value {parsed} outside [0, 1]",
                t.code()
            )));
        }
        scores[*t as usize] = parsed;
    }
    TraitScoreVector::new(scores)
}

// digits, optionally followed by '.' and more digits
fn is_plain_decimal(s: &str) -> bool {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

/// One round trip to a remote estimator.
pub fn request_remote_estimate(
    payload: &[u8],
    endpoint: &str,
    timeout: Duration,
) -> Result<TraitScoreVector, PersonalityError> {
    if payload.is_empty() {
        return Err(PersonalityError::EmptyPayload);
    }
    let addr = endpoint
        .to_socket_addrs()
        .map_err(io_error)?
        .next()
        .ok_or_else(|| PersonalityError::Io(format!("{endpoint} did not resolve")))?;
    let mut stream = TcpStream::connect_timeout(&addr, timeout).map_err(io_error)?;
    stream.set_read_timeout(Some(timeout)).map_err(io_error)?;
    stream.set_write_timeout(Some(timeout)).map_err(io_error)?;
    write_request(&mut stream, payload).map_err(io_error)?;

    let mut line = String::new();
    let mut reader = BufReader::new(stream.take(MAX_RESPONSE_LEN as u64));
    reader.read_line(&mut line).map_err(|e| {
        if e.kind() == io::ErrorKind::InvalidData {
            PersonalityError::Protocol("response is not UTF-8".into())
        } else {
            io_error(e)
        }
    })?;
    if line.is_empty() {
        return Err(PersonalityError::Protocol("empty response".into()));
    }
    parse_scores(&line)
}

fn io_error(e: io::Error) -> PersonalityError {
    match e.kind() {
        io::ErrorKind::TimedOut | io::ErrorKind::WouldBlock => PersonalityError::Timeout,
        _ => PersonalityError::Io(e.to_string()),
    }
}

/// Estimator backed by an external trained model.
#[derive(Debug, Clone)]
pub struct RemoteEstimator {
    endpoint: String,
    timeout: Duration,
}

impl RemoteEstimator {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl TraitEstimator for RemoteEstimator {
    fn estimate(
        &self,
        capture_index: u8,
        payload: &[u8],
    ) -> Result<CaptureEstimate, PersonalityError> {
        let scores = request_remote_estimate(payload, &self.endpoint, self.timeout)?;
        Ok(CaptureEstimate::new(capture_index, scores, CaptureSource::Remote))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_then_parse() {
        let v = TraitScoreVector::new([0.9, 0.25, 1.0, 0.0, 0.5]).unwrap();
        let line = format_scores(&v);
        assert_eq!(line, "E=0.9 A=0.25 C=1 N=0 O=0.5\n");
        assert_eq!(parse_scores(&line).unwrap(), v);
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "E=0.9 A=0.1 C=0.1 N=0.1 O=0.1",
            "E=0.9 A=0.1 C=0.1 N=0.1\n",
            "A=0.9 E=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=0.9  A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=1.2 A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=-0 A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=1e-1 A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=nan A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=.5 A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=0. A=0.1 C=0.1 N=0.1 O=0.1\n",
            "E=0.5 A=0.1 C=0.1 N=0.1 O=0.1\r\n",
        ] {
            assert!(
                matches!(parse_scores(bad), Err(PersonalityError::Protocol(_))),
                "{bad:?} should be rejected"
            );
        }
    }

    #[test]
    fn request_framing() {
        let mut buf = Vec::new();
        write_request(&mut buf, b"abc").unwrap();
        assert_eq!(buf, [0, 0, 0, 3, b'a', b'b', b'c']);
        assert_eq!(read_request(&mut buf.as_slice()).unwrap(), b"abc");
    }

    #[test]
    fn empty_payload_is_rejected_before_connecting() {
        assert_eq!(
            request_remote_estimate(&[], "127.0.0.1:1", Duration::from_millis(10)),
            Err(PersonalityError::EmptyPayload)
        );
    }
}
