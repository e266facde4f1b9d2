//! Dataset manifest: `index,person,path_or_synthetic,target,salience`.

use std::io::{Read, Write};

use crate::error::{Result, SannError};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    /// 1-based image index.
    pub index: usize,
    pub person: usize,
    /// Image path, or `synthetic` for generated images.
    pub source: String,
    pub target: f64,
    pub salience: f64,
}

const HEADER: [&str; 5] = ["index", "person", "path_or_synthetic", "target", "salience"];

pub fn write_manifest<W: Write>(writer: W, rows: &[ManifestRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| SannError::Io(std::io::Error::other(e));
    w.write_record(HEADER).map_err(to_io)?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.person.to_string(),
            r.source.clone(),
            format!("{:.16e}", r.target),
            r.salience.to_string(),
        ])
        .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest<R: Read>(reader: R) -> Result<Vec<ManifestRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SannError::Parse(format!("manifest header: {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(SannError::Parse(format!(
            "manifest header must be {}",
            HEADER.join(",")
        )));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| SannError::Parse(format!("manifest row: {e}")))?;
            let field = |i: usize| rec.get(i).unwrap_or_default();
            let num = |i: usize| -> Result<f64> {
                field(i)
                    .parse()
                    .map_err(|e| SannError::Parse(format!("{} {:?}: {e}", HEADER[i], field(i))))
            };
            let count = |i: usize| -> Result<usize> {
                field(i)
                    .parse()
                    .map_err(|e| SannError::Parse(format!("{} {:?}: {e}", HEADER[i], field(i))))
            };
            Ok(ManifestRow {
                index: count(0)?,
                person: count(1)?,
                source: field(2).to_owned(),
                target: num(3)?,
                salience: num(4)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = vec![
            ManifestRow {
                index: 1,
                person: 3,
                source: "synthetic".into(),
                target: 0.431_234_567_890_123_4,
                salience: 0.0,
            },
            ManifestRow {
                index: 2,
                person: 0,
                source: "faces/face 00002.pgm".into(),
                target: 0.5,
                salience: 1.0,
            },
        ];
        let mut buf = Vec::new();
        write_manifest(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,person,path_or_synthetic,target,salience\n"));
        assert_eq!(read_manifest(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_manifest("a,b,c,d,e\n1,2,x,0.1,0\n".as_bytes()).is_err());
        assert!(read_manifest("index,person,path_or_synthetic,target,salience\n1,2,x,zz,0\n".as_bytes()).is_err());
    }
}
