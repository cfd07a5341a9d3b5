use crate::error::Result;
use crate::model::CallGraph;

use super::json::{GraphConfig, GraphDocument};

/// Edges as CSV: `src,dst,defined_in,file,row,col` with a header row.
pub fn emit_csv(graph: &CallGraph) -> Result<String> {
    let doc = GraphDocument::new(graph, GraphConfig::default());
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["src", "dst", "defined_in", "file", "row", "col"])?;
    for e in &doc.edges {
        writer.serialize((&e.src, &e.dst, &e.defined_in, &e.file, e.row, e.col))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::Fixture;
    use crate::framework::EntryPointFilter;
    use crate::java::{generate_graph, Algorithm, ResolutionConfig};

    #[test]
    fn header_and_rows() {
        assert_eq!(
            emit_csv(&CallGraph::new()).unwrap(),
            "src,dst,defined_in,file,row,col\n"
        );
        let f = Fixture::by_name("dispatch").unwrap().forest();
        let g = generate_graph(
            &f,
            Algorithm::Scha,
            ResolutionConfig::default(),
            &EntryPointFilter::parse("name=foo").unwrap(),
        )
        .unwrap();
        let text = emit_csv(&g).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(&rows[1][1], "B#method/0@A");
        assert_eq!(&rows[1][2], "A#method/0");
        assert_eq!(&rows[1][4], "7");
    }
}
