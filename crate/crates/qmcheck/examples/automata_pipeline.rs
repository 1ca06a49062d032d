//! The automata layer on its own: parse a formula, translate it to a
//! Buchi automaton, abstract a trajectory as a lasso language, and decide
//! emptiness and inclusion of the product.

use std::collections::BTreeSet;

use anyhow::Result;
use qmcheck::automata::{
    check_inclusion_via_negation, lasso_to_nba, ltl_to_nba, nonempty_witness, product_empty,
    LassoLanguage,
};
use qmcheck::mltl::{parse, Formula, Letter};
use qmcheck::neighborhood::SymbolSet;

fn main() -> Result<()> {
    let universe: BTreeSet<String> = ["req".to_string(), "ack".to_string()].into();
    let phi = parse("G (ap(req) -> F ap(ack))", &universe)?;
    let a_phi = ltl_to_nba(&phi, &universe);
    println!("{}", a_phi.to_hoa("G (req -> F ack)"));

    // A lasso whose cycle is ambiguous about ack: the first cycle step
    // definitely carries req, the second may or may not carry ack.
    let prefix = vec![Letter::from_names(["req"])];
    let definite_req = SymbolSet::new(Letter::from_names(["req"]), BTreeSet::new());
    let maybe_ack = SymbolSet::new(Letter::new(), ["ack".to_string()].into());
    let lang = LassoLanguage::new(prefix, vec![definite_req, maybe_ack]);
    let a_g = lasso_to_nba(&lang, &universe);
    println!("lasso automaton has {} states", a_g.n_states());

    let (empty, witness) = product_empty(&a_g, &a_phi);
    println!("some abstracted run satisfies the formula: {}", !empty);
    if let Some(w) = witness {
        println!("  for example {w}");
    }
    let included = check_inclusion_via_negation(&a_g, &phi);
    println!("all abstracted runs satisfy it: {included}");
    if !included {
        // The complement direction: a run that never acknowledges.
        let neg = ltl_to_nba(&Formula::not(phi), &universe);
        if let Some((_, Some(bad))) = Some(product_empty(&a_g, &neg)) {
            println!("  refuting run {bad}");
        }
    }
    if let Some(any) = nonempty_witness(&a_g) {
        println!("sample word of the abstraction: {any}");
    }
    Ok(())
}
