//! Print node and link counts of the bundled networks.
fn main() {
    for name in sagin_core::topology::registry::names() {
        let t = sagin_core::topology::registry::get(name).unwrap().unwrap();
        println!("{name:12} {:3} nodes {:3} links", t.node_count(), t.link_count());
    }
}
