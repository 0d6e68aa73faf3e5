//! `schema`: write the persisted-format and API schema documents.

use std::io::Write;

use recorder_core::model::schema::{dump_schemas, write_schemas};
use recorder_server::schema::api_schemas;

use super::emit;
use crate::failure::Failure;
use crate::SchemaArgs;

pub fn run(args: &SchemaArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut docs = dump_schemas();
    docs.extend(api_schemas());
    let written = write_schemas(&args.out, &docs).map_err(|e| Failure::io(&args.out, e))?;
    for path in &written {
        emit(out, path.display())?;
    }
    Ok(())
}
