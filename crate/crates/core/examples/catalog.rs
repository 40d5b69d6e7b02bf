//! Closed-form transforms available as references and candidates.

use powermix::{CatalogEntry, Transform};

fn main() -> powermix::Result<()> {
    for id in CatalogEntry::identifiers() {
        println!("{:<18} {:<40} {}", id.id, id.params, id.formula);
    }
    let entry: CatalogEntry = serde_json::from_str(r#"{"exp_mixture_atom": {"p": 0.25, "beta": 0.75}}"#)
        .expect("valid entry");
    let f = Transform::catalog(entry)?;
    println!("exp_mixture_atom(0.25, 0.75): mean {:?}, F(1) = {:.6}", f.mean(), f.eval(1.0)?);
    Ok(())
}
