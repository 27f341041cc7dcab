use std::fmt::Write;

use super::{CritTree, SplitTest};
use crate::dataset::FeatureKind;

impl CritTree {
    /// Graphviz rendering: internal nodes show their test, leaves their consensus.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph crit {\n  node [shape=box, fontname=\"monospace\"];\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let stats = format!(
                "n={} w={:.3} γ={:.4}",
                node.count, node.weight, node.impurity
            );
            let label = match &node.split {
                Some(b) => {
                    let col = &self.schema.columns[b.rule.feature];
                    let test = match (&b.rule.test, &col.kind) {
                        (SplitTest::Threshold(s), _) => format!("{} <= {s}", col.name),
                        (SplitTest::Subset(ls), FeatureKind::Categorical { levels }) => {
                            let names: Vec<&str> = ls
                                .iter()
                                .map(|&l| levels.get(l as usize).map_or("?", String::as_str))
                                .collect();
                            format!("{} in {{{}}}", col.name, names.join(", "))
                        }
                        (SplitTest::Subset(ls), _) => format!("{} in {ls:?}", col.name),
                    };
                    format!("{test}\\n{stats}")
                }
                None => format!("{}\\n{stats}\\n{}", node.consensus.to_ordering_string(), node.method),
            };
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", label.replace('"', "\\\""));
            if let Some(b) = &node.split {
                let _ = writeln!(out, "  n{i} -> n{} [label=\"yes\"];", b.left);
                let _ = writeln!(out, "  n{i} -> n{} [label=\"no\"];", b.right);
            }
        }
        out.push_str("}\n");
        out
    }
}
